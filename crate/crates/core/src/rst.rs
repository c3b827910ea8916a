//! The generalized nested-relation inclusion: a left side built from
//! arbitrary relations `R_0..R_m` and reflexive relations `S_1..S_m`,
//! `T_1..T_m`, and a right side built from the same `R_0`, `R_m` together
//! with compatible-closure combinations of the inputs.
//!
//! Both sides share one inside-out evaluation scheme: the innermost layer
//! is `R_m`, and layer `k` is `R_k ∧ (S_{k+1} ∘ layer_{k+1} ∘ T_{k+1})`.
//! The X-family identity is the special case where all `R_i` below the top
//! are one relation, `R_m` is a meet, and the `S`/`T` families alternate
//! between two congruences.

use crate::algebra::FiniteAlgebra;
use crate::identities::{Family, IdentityInstance};
use crate::relation::{compatible_closure, compose, BinRelation, RelationError};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RstError {
    #[error("need at least 2 levels, got {0}")]
    BadM(usize),
    #[error("expected {expected} relations in family {family}, got {found}")]
    WrongCount {
        family: char,
        expected: usize,
        found: usize,
    },
    #[error("relation {family}_{index} has size {found}, expected {expected}")]
    SizeMismatch {
        family: char,
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("relation {family}_{index} must be reflexive")]
    NotReflexive { family: char, index: usize },
    #[error("instance requires an X-family identity with a delta relation")]
    NotAnXInstance,
    #[error(transparent)]
    Relation(#[from] RelationError),
}

/// An instance of the nested inclusion: `r` holds `R_0..R_m`, while `s`
/// and `t` hold `S_1..S_m` and `T_1..T_m` (index shifted down by one).
#[derive(Debug, Clone)]
pub struct RstInstance {
    m: usize,
    r: Vec<BinRelation>,
    s: Vec<BinRelation>,
    t: Vec<BinRelation>,
}

impl RstInstance {
    pub fn new(
        r: Vec<BinRelation>,
        s: Vec<BinRelation>,
        t: Vec<BinRelation>,
    ) -> Result<RstInstance, RstError> {
        let m = s.len();
        if m < 2 {
            return Err(RstError::BadM(m));
        }
        if r.len() != m + 1 {
            return Err(RstError::WrongCount {
                family: 'R',
                expected: m + 1,
                found: r.len(),
            });
        }
        if t.len() != m {
            return Err(RstError::WrongCount {
                family: 'T',
                expected: m,
                found: t.len(),
            });
        }
        let n = r[0].size();
        let families = [('R', &r), ('S', &s), ('T', &t)];
        for (family, rels) in families {
            for (idx, rel) in rels.iter().enumerate() {
                let index = if family == 'R' { idx } else { idx + 1 };
                if rel.size() != n {
                    return Err(RstError::SizeMismatch {
                        family,
                        index,
                        expected: n,
                        found: rel.size(),
                    });
                }
            }
        }
        for (family, rels) in [('S', &s), ('T', &t)] {
            for (idx, rel) in rels.iter().enumerate() {
                if !rel.is_reflexive() {
                    return Err(RstError::NotReflexive {
                        family,
                        index: idx + 1,
                    });
                }
            }
        }
        Ok(RstInstance { m, r, s, t })
    }

    /// The substitution that turns an X-family identity into this shape:
    /// `R_0 = … = R_{m-1} = alpha`, `R_m = alpha ∧ delta`, odd-indexed
    /// `S`/`T` equal to beta and even-indexed ones to gamma. The left and
    /// right evaluations then reproduce the identity's sides bit-exactly.
    pub fn from_x_instance(inst: &IdentityInstance) -> Result<RstInstance, RstError> {
        if inst.family() != Family::X {
            return Err(RstError::NotAnXInstance);
        }
        let delta = inst.delta().ok_or(RstError::NotAnXInstance)?;
        let m = inst.m();
        let mut r = vec![inst.alpha().clone(); m];
        r.push(inst.alpha().intersect(delta)?);
        let mut s = Vec::with_capacity(m);
        for j in 1..=m {
            s.push(if j % 2 == 1 {
                inst.beta().clone()
            } else {
                inst.gamma().clone()
            });
        }
        let t = s.clone();
        RstInstance::new(r, s, t)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn size(&self) -> usize {
        self.r[0].size()
    }

    /// `R_i` for `i` in `0..=m`.
    pub fn r(&self, i: usize) -> &BinRelation {
        &self.r[i]
    }

    /// `S_j` for `j` in `1..=m`.
    pub fn s(&self, j: usize) -> &BinRelation {
        &self.s[j - 1]
    }

    /// `T_j` for `j` in `1..=m`.
    pub fn t(&self, j: usize) -> &BinRelation {
        &self.t[j - 1]
    }
}

/// The closure-derived relations appearing on the right side.
#[derive(Debug, Clone)]
pub struct RstDerived {
    /// `R'_1..R'_{m-1}` at `r_prime[i-1]`.
    pub r_prime: Vec<BinRelation>,
    /// `S'_1..S'_m` at `s_prime[j-1]`.
    pub s_prime: Vec<BinRelation>,
    /// `T'_1..T'_m` at `t_prime[j-1]`.
    pub t_prime: Vec<BinRelation>,
}

/// Computes the derived families:
/// `R'_i` is the compatible closure of `R_{i-1} ∪ R_i ∪ R_{i+1}`; the
/// boundary `S'`/`T'` are closures of the second (respectively
/// second-to-last) member; interior `S'_i` composes the closures of
/// `S_{i-1}` and `S_{i+1}` and `T'_i` the closures of `T_{i+1}` and
/// `T_{i-1}` in that order.
pub fn rst_derived(alg: &FiniteAlgebra, inst: &RstInstance) -> Result<RstDerived, RelationError> {
    let m = inst.m();
    let cl = |x: &BinRelation| compatible_closure(alg, x);
    let mut r_prime = Vec::with_capacity(m - 1);
    for i in 1..m {
        let u = inst.r(i - 1).union(inst.r(i))?.union(inst.r(i + 1))?;
        r_prime.push(cl(&u)?);
    }
    let mut s_prime = Vec::with_capacity(m);
    let mut t_prime = Vec::with_capacity(m);
    for j in 1..=m {
        if j == 1 {
            s_prime.push(cl(inst.s(2))?);
            t_prime.push(cl(inst.t(2))?);
        } else if j == m {
            s_prime.push(cl(inst.s(m - 1))?);
            t_prime.push(cl(inst.t(m - 1))?);
        } else {
            s_prime.push(compose(&cl(inst.s(j - 1))?, &cl(inst.s(j + 1))?)?);
            t_prime.push(compose(&cl(inst.t(j + 1))?, &cl(inst.t(j - 1))?)?);
        }
    }
    Ok(RstDerived {
        r_prime,
        s_prime,
        t_prime,
    })
}

/// Inside-out layers: `layers[m] = R_m`, and
/// `layers[k] = R_k ∧ (S_{k+1} ∘ layers[k+1] ∘ T_{k+1})`. The side's value
/// is `layers[0]`; `layers[k]` holds the pairs at chain position `k`.
fn eval_layers(
    r_seq: &[&BinRelation],
    s_seq: &[&BinRelation],
    t_seq: &[&BinRelation],
) -> Vec<BinRelation> {
    let m = s_seq.len();
    debug_assert_eq!(r_seq.len(), m + 1);
    let mut layers = vec![BinRelation::empty(0); m + 1];
    layers[m] = r_seq[m].clone();
    for k in (0..m).rev() {
        let wrapped = compose(&compose(s_seq[k], &layers[k + 1]).unwrap(), t_seq[k]).unwrap();
        layers[k] = r_seq[k].intersect(&wrapped).unwrap();
    }
    layers
}

fn left_sequences(inst: &RstInstance) -> (Vec<&BinRelation>, Vec<&BinRelation>, Vec<&BinRelation>) {
    (
        inst.r.iter().collect(),
        inst.s.iter().collect(),
        inst.t.iter().collect(),
    )
}

fn right_sequences<'a>(
    inst: &'a RstInstance,
    derived: &'a RstDerived,
) -> (Vec<&'a BinRelation>, Vec<&'a BinRelation>, Vec<&'a BinRelation>) {
    let m = inst.m();
    let mut r_seq: Vec<&BinRelation> = Vec::with_capacity(m + 1);
    r_seq.push(inst.r(0));
    for rp in &derived.r_prime {
        r_seq.push(rp);
    }
    r_seq.push(inst.r(m));
    (
        r_seq,
        derived.s_prime.iter().collect(),
        derived.t_prime.iter().collect(),
    )
}

pub fn eval_left(inst: &RstInstance) -> BinRelation {
    let (r, s, t) = left_sequences(inst);
    eval_layers(&r, &s, &t).swap_remove(0)
}

pub fn eval_right(inst: &RstInstance, derived: &RstDerived) -> BinRelation {
    let (r, s, t) = right_sequences(inst, derived);
    eval_layers(&r, &s, &t).swap_remove(0)
}

/// Chains `a_0..a_m`, `b_0..b_m` witnessing membership of `(a_0, b_0)` in
/// a side: `a_i` is `R`-linked to `b_i` level-wise, consecutive `a`s are
/// `S`-linked forward, and consecutive `b`s are `T`-linked backward
/// (`b_{i+1} T_{i+1} b_i`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RstWitness {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RstWitnessError {
    #[error("pair ({0}, {1}) is not a member of the evaluated side")]
    NotAMember(usize, usize),
    #[error("chain has {found} entries, expected {expected}")]
    BadLength { expected: usize, found: usize },
    #[error("R_{i} fails to link a_{i} = {a} with b_{i} = {b}")]
    RBroken { i: usize, a: usize, b: usize },
    #[error("S_{j} fails on the a-chain: ({from}, {to})")]
    SBroken { j: usize, from: usize, to: usize },
    #[error("T_{j} fails on the b-chain backward step: ({from}, {to})")]
    TBroken { j: usize, from: usize, to: usize },
}

impl RstWitness {
    fn validate_sequences(
        &self,
        r_seq: &[&BinRelation],
        s_seq: &[&BinRelation],
        t_seq: &[&BinRelation],
    ) -> Result<(), RstWitnessError> {
        let m = s_seq.len();
        if self.a.len() != m + 1 || self.b.len() != m + 1 {
            return Err(RstWitnessError::BadLength {
                expected: m + 1,
                found: self.a.len().max(self.b.len()),
            });
        }
        for i in 0..=m {
            if !r_seq[i].contains(self.a[i], self.b[i]) {
                return Err(RstWitnessError::RBroken {
                    i,
                    a: self.a[i],
                    b: self.b[i],
                });
            }
        }
        for j in 1..=m {
            if !s_seq[j - 1].contains(self.a[j - 1], self.a[j]) {
                return Err(RstWitnessError::SBroken {
                    j,
                    from: self.a[j - 1],
                    to: self.a[j],
                });
            }
            if !t_seq[j - 1].contains(self.b[j], self.b[j - 1]) {
                return Err(RstWitnessError::TBroken {
                    j,
                    from: self.b[j],
                    to: self.b[j - 1],
                });
            }
        }
        Ok(())
    }

    /// Validates against the left side's conditions.
    pub fn validate_left(&self, inst: &RstInstance) -> Result<(), RstWitnessError> {
        let (r, s, t) = left_sequences(inst);
        self.validate_sequences(&r, &s, &t)
    }

    /// Validates against the right side's conditions (derived relations).
    pub fn validate_right(
        &self,
        inst: &RstInstance,
        derived: &RstDerived,
    ) -> Result<(), RstWitnessError> {
        let (r, s, t) = right_sequences(inst, derived);
        self.validate_sequences(&r, &s, &t)
    }
}

/// Extracts a left-side witness chain for a member pair by back-walking
/// the evaluation layers outward-in; deterministic lexicographic choice.
pub fn extract_left_witness(
    inst: &RstInstance,
    pair: (usize, usize),
) -> Result<RstWitness, RstWitnessError> {
    let (r_seq, s_seq, t_seq) = left_sequences(inst);
    let layers = eval_layers(&r_seq, &s_seq, &t_seq);
    if !layers[0].contains(pair.0, pair.1) {
        return Err(RstWitnessError::NotAMember(pair.0, pair.1));
    }
    let n = inst.size();
    let m = inst.m();
    let mut a = vec![pair.0];
    let mut b = vec![pair.1];
    for k in 0..m {
        let (ca, cb) = (*a.last().unwrap(), *b.last().unwrap());
        let mut found = None;
        'search: for u in 0..n {
            if !s_seq[k].contains(ca, u) {
                continue;
            }
            for v in 0..n {
                if layers[k + 1].contains(u, v) && t_seq[k].contains(v, cb) {
                    found = Some((u, v));
                    break 'search;
                }
            }
        }
        let (u, v) = found.expect("layer membership guarantees a continuation");
        a.push(u);
        b.push(v);
    }
    let w = RstWitness { a, b };
    debug_assert!(w.validate_left(inst).is_ok());
    Ok(w)
}

/// Verdict of the inclusion test `left ⊆ right`.
#[derive(Debug, Clone)]
pub struct RstVerdict {
    pub left: BinRelation,
    pub right: BinRelation,
    pub derived: RstDerived,
    /// A pair in `left \ right` with its left-side witness, when the
    /// inclusion fails.
    pub counterexample: Option<((usize, usize), RstWitness)>,
}

impl RstVerdict {
    pub fn holds(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Evaluates both sides and reports the inclusion. The caller vouches for
/// any variety-level claim; this is a per-algebra relation computation.
pub fn rst_check(alg: &FiniteAlgebra, inst: &RstInstance) -> Result<RstVerdict, RelationError> {
    let derived = rst_derived(alg, inst)?;
    let left = eval_left(inst);
    let right = eval_right(inst, &derived);
    let counterexample = left.first_difference(&right).map(|pair| {
        let w = extract_left_witness(inst, pair).expect("difference pairs lie in the left side");
        (pair, w)
    });
    Ok(RstVerdict {
        left,
        right,
        derived,
        counterexample,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::congruence::{enumerate_con, Congruence};
    use crate::identities::{Mode, Side};
    use crate::reference;

    fn all_diag(n: usize, m: usize) -> Vec<BinRelation> {
        vec![BinRelation::diagonal(n); m]
    }

    #[test]
    fn derived_of_diagonals_is_diagonal() {
        let a = FiniteAlgebra::cyclic_group(2);
        let inst = RstInstance::new(
            vec![BinRelation::full(2); 4],
            all_diag(2, 3),
            all_diag(2, 3),
        )
        .unwrap();
        let d = rst_derived(&a, &inst).unwrap();
        for j in 0..3 {
            assert_eq!(d.s_prime[j], BinRelation::diagonal(2));
            assert_eq!(d.t_prime[j], BinRelation::diagonal(2));
        }
    }

    #[test]
    fn derived_without_operations_is_plain_union() {
        let a = FiniteAlgebra::bare_set(3);
        let r0 = BinRelation::from_pairs(3, [(0, 1)]);
        let r1 = BinRelation::from_pairs(3, [(1, 2)]);
        let r2 = BinRelation::from_pairs(3, [(2, 0)]);
        let inst = RstInstance::new(
            vec![r0.clone(), r1.clone(), r2.clone()],
            all_diag(3, 2),
            all_diag(3, 2),
        )
        .unwrap();
        let d = rst_derived(&a, &inst).unwrap();
        let expect = r0.union(&r1).unwrap().union(&r2).unwrap();
        assert_eq!(d.r_prime[0], expect);
    }

    #[test]
    fn boundary_s_prime_in_z2() {
        let a = FiniteAlgebra::cyclic_group(2);
        let s1 = BinRelation::from_pairs(2, [(0, 0), (1, 1), (0, 1)]);
        let inst = RstInstance::new(
            vec![BinRelation::full(2); 3],
            vec![s1, BinRelation::diagonal(2)],
            all_diag(2, 2),
        )
        .unwrap();
        let d = rst_derived(&a, &inst).unwrap();
        // S'_2 = closure(S_1); (0,1)+(1,1) = (1,0) forces the full square
        assert_eq!(d.s_prime[1], BinRelation::full(2));
        // S'_1 = closure(S_2) = closure(Δ) = Δ
        assert_eq!(d.s_prime[0], BinRelation::diagonal(2));
    }

    #[test]
    fn all_full_relations_include() {
        let a = FiniteAlgebra::cyclic_group(2);
        let inst = RstInstance::new(
            vec![BinRelation::full(2); 3],
            vec![BinRelation::full(2); 2],
            vec![BinRelation::full(2); 2],
        )
        .unwrap();
        let v = rst_check(&a, &inst).unwrap();
        assert!(v.holds());
        assert_eq!(v.left, BinRelation::full(2));
        assert_eq!(v.right, BinRelation::full(2));
    }

    #[test]
    fn left_side_matches_chain_enumeration() {
        let r = vec![
            BinRelation::from_pairs(3, [(0, 1), (2, 2)]),
            BinRelation::from_pairs(3, [(1, 1), (0, 2)]),
            BinRelation::from_pairs(3, [(2, 1), (1, 0)]),
        ];
        let mk_refl = |pairs: &[(usize, usize)]| {
            BinRelation::from_pairs(3, pairs.iter().copied())
                .union(&BinRelation::diagonal(3))
                .unwrap()
        };
        let s = vec![mk_refl(&[(0, 2), (1, 0)]), mk_refl(&[(2, 0)])];
        let t = vec![mk_refl(&[(1, 2)]), mk_refl(&[(0, 1), (2, 1)])];
        let inst = RstInstance::new(r.clone(), s.clone(), t.clone()).unwrap();
        let left = eval_left(&inst);
        let oracle = reference::rst_left_by_chain_enumeration(
            &r.iter().collect::<Vec<_>>(),
            &s.iter().collect::<Vec<_>>(),
            &t.iter().collect::<Vec<_>>(),
        );
        assert_eq!(left, oracle);
    }

    #[test]
    fn x_specialization_reproduces_identity_sides() {
        let a = FiniteAlgebra::cyclic_group(4);
        let con = enumerate_con(&a).unwrap();
        for alpha in &con {
            for beta in &con {
                for gamma in &con {
                    for delta in &con {
                        for m in 2..=3 {
                            let inst = IdentityInstance::x(
                                &a,
                                m,
                                Mode::Strict,
                                false,
                                alpha.relation().clone(),
                                beta.relation().clone(),
                                gamma.relation().clone(),
                                delta.relation().clone(),
                            )
                            .unwrap();
                            let rst = RstInstance::from_x_instance(&inst).unwrap();
                            let derived = rst_derived(&a, &rst).unwrap();
                            assert_eq!(eval_left(&rst), inst.eval_side(Side::Left));
                            assert_eq!(eval_right(&rst, &derived), inst.eval_side(Side::Right));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn z4_inclusion_holds_on_handpicked_instances() {
        let a = FiniteAlgebra::cyclic_group(4);
        let even = Congruence::from_partition(&a, &[0, 1, 0, 1]).unwrap();
        let r = vec![
            BinRelation::from_pairs(4, [(0, 2), (1, 1), (3, 0)]),
            even.relation().clone(),
            BinRelation::from_pairs(4, [(2, 2), (0, 1)]),
        ];
        let s = vec![
            even.relation().clone(),
            BinRelation::from_pairs(4, [(0, 3)])
                .union(&BinRelation::diagonal(4))
                .unwrap(),
        ];
        let t = vec![
            BinRelation::from_pairs(4, [(1, 2)])
                .union(&BinRelation::diagonal(4))
                .unwrap(),
            BinRelation::full(4),
        ];
        let inst = RstInstance::new(r, s, t).unwrap();
        let v = rst_check(&a, &inst).unwrap();
        assert!(v.holds());
    }

    #[test]
    fn extracted_left_witnesses_validate() {
        let inst = RstInstance::new(
            vec![BinRelation::full(2); 3],
            vec![BinRelation::full(2); 2],
            vec![BinRelation::full(2); 2],
        )
        .unwrap();
        let left = eval_left(&inst);
        for pair in left.pairs() {
            let w = extract_left_witness(&inst, pair).unwrap();
            w.validate_left(&inst).unwrap();
        }
    }

    #[test]
    fn rejects_non_reflexive_s() {
        let bad = BinRelation::from_pairs(2, [(0, 1)]);
        let err = RstInstance::new(
            vec![BinRelation::full(2); 3],
            vec![bad, BinRelation::diagonal(2)],
            all_diag(2, 2),
        )
        .unwrap_err();
        assert!(matches!(err, RstError::NotReflexive { family: 'S', index: 1 }));
    }

    #[test]
    fn rejects_m_below_two() {
        let err = RstInstance::new(
            vec![BinRelation::full(2); 2],
            vec![BinRelation::diagonal(2)],
            vec![BinRelation::diagonal(2)],
        )
        .unwrap_err();
        assert!(matches!(err, RstError::BadM(1)));
    }
}
