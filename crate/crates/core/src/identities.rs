//! The alternating bracket identity families (X_m) and (Y_m), their starred
//! (transitively closed) variants, the alpha-beta-h congruence identity, and
//! witness-chain extraction and validation.
//!
//! A side of an identity is evaluated inside out: the innermost layer is the
//! meet of alpha with the core relation, and each surrounding bracket wraps
//! the previous layer as `alpha ∧ (theta ∘ layer ∘ theta)`. Membership of a
//! pair in a side is equivalently witnessed by a chain of elements; both
//! readings are implemented (the chain one via extraction/validation) and
//! cross-checked in the test suites.

use crate::algebra::FiniteAlgebra;
use crate::congruence::{beta_gamma, meet, Congruence, CongruenceError};
use crate::relation::{compose, transitive_closure, BinRelation, RelationError};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    X,
    Y,
}

/// Strict mode demands congruences everywhere; generalized mode relaxes
/// alpha to a reflexive compatible relation and delta to an arbitrary
/// relation (beta and gamma stay congruences in both modes).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Strict,
    Generalized,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("bracket count m must be at least 1, got {0}")]
    BadM(usize),
    #[error("relation `{name}` has size {found}, algebra has size {expected}")]
    SizeMismatch {
        name: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("relation `{name}` must be a congruence in this mode: {source}")]
    NotACongruence {
        name: &'static str,
        source: CongruenceError,
    },
    #[error("relation `alpha` must be reflexive in generalized mode")]
    AlphaNotReflexive,
    #[error("relation `alpha` must be compatible in generalized mode")]
    AlphaNotCompatible,
    #[error(transparent)]
    Relation(#[from] RelationError),
}

/// One concrete identity instance: the family, the bracket count, the mode,
/// whether the right side is transitively closed, and the four relations.
///
/// The delta slot is only meaningful for the X family; the Y family's core
/// is determined by beta/gamma and the parity of m.
#[derive(Debug, Clone)]
pub struct IdentityInstance {
    m: usize,
    family: Family,
    starred: bool,
    mode: Mode,
    alpha: BinRelation,
    beta: BinRelation,
    gamma: BinRelation,
    delta: Option<BinRelation>,
}

impl IdentityInstance {
    /// An X-family instance. In strict mode all four relations must be
    /// congruences of `alg`.
    pub fn x(
        alg: &FiniteAlgebra,
        m: usize,
        mode: Mode,
        starred: bool,
        alpha: BinRelation,
        beta: BinRelation,
        gamma: BinRelation,
        delta: BinRelation,
    ) -> Result<IdentityInstance, InstanceError> {
        let inst = IdentityInstance {
            m,
            family: Family::X,
            starred,
            mode,
            alpha,
            beta,
            gamma,
            delta: Some(delta),
        };
        inst.validate(alg)?;
        Ok(inst)
    }

    /// A Y-family instance; no delta is involved.
    pub fn y(
        alg: &FiniteAlgebra,
        m: usize,
        mode: Mode,
        starred: bool,
        alpha: BinRelation,
        beta: BinRelation,
        gamma: BinRelation,
    ) -> Result<IdentityInstance, InstanceError> {
        let inst = IdentityInstance {
            m,
            family: Family::Y,
            starred,
            mode,
            alpha,
            beta,
            gamma,
            delta: None,
        };
        inst.validate(alg)?;
        Ok(inst)
    }

    /// The Y-instance one bracket shallower with the same alpha, beta,
    /// gamma. An X-instance with delta = bottom evaluates side-for-side
    /// equal to this weakening.
    pub fn y_weakening(&self, alg: &FiniteAlgebra) -> Result<IdentityInstance, InstanceError> {
        if self.m < 2 {
            return Err(InstanceError::BadM(0));
        }
        IdentityInstance::y(
            alg,
            self.m - 1,
            self.mode,
            self.starred,
            self.alpha.clone(),
            self.beta.clone(),
            self.gamma.clone(),
        )
    }

    fn validate(&self, alg: &FiniteAlgebra) -> Result<(), InstanceError> {
        if self.m < 1 {
            return Err(InstanceError::BadM(self.m));
        }
        let n = alg.size();
        let named: [(&'static str, &BinRelation); 3] = [
            ("alpha", &self.alpha),
            ("beta", &self.beta),
            ("gamma", &self.gamma),
        ];
        for (name, r) in named {
            if r.size() != n {
                return Err(InstanceError::SizeMismatch {
                    name,
                    expected: n,
                    found: r.size(),
                });
            }
        }
        if let Some(d) = &self.delta {
            if d.size() != n {
                return Err(InstanceError::SizeMismatch {
                    name: "delta",
                    expected: n,
                    found: d.size(),
                });
            }
        }
        let congruence_slots: Vec<(&'static str, &BinRelation)> = match self.mode {
            Mode::Strict => {
                let mut v = vec![
                    ("alpha", &self.alpha),
                    ("beta", &self.beta),
                    ("gamma", &self.gamma),
                ];
                if let Some(d) = &self.delta {
                    v.push(("delta", d));
                }
                v
            }
            Mode::Generalized => vec![("beta", &self.beta), ("gamma", &self.gamma)],
        };
        for (name, r) in congruence_slots {
            crate::congruence::as_congruence(alg, r)
                .map_err(|source| InstanceError::NotACongruence { name, source })?;
        }
        if self.mode == Mode::Generalized {
            if !self.alpha.is_reflexive() {
                return Err(InstanceError::AlphaNotReflexive);
            }
            if !self.alpha.is_compatible_with(alg)? {
                return Err(InstanceError::AlphaNotCompatible);
            }
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn starred(&self) -> bool {
        self.starred
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn alpha(&self) -> &BinRelation {
        &self.alpha
    }

    pub fn beta(&self) -> &BinRelation {
        &self.beta
    }

    pub fn gamma(&self) -> &BinRelation {
        &self.gamma
    }

    pub fn delta(&self) -> Option<&BinRelation> {
        self.delta.as_ref()
    }

    pub fn size(&self) -> usize {
        self.alpha.size()
    }

    /// The relation linking chain positions `i` and `i+1` on a side: beta
    /// at even `i` on the left (gamma at odd), swapped on the right.
    pub fn edge_relation(&self, side: Side, i: usize) -> &BinRelation {
        debug_assert!(i < self.m);
        let beta_slot = i % 2 == 0;
        match (side, beta_slot) {
            (Side::Left, true) | (Side::Right, false) => &self.beta,
            (Side::Left, false) | (Side::Right, true) => &self.gamma,
        }
    }

    /// The innermost relation met with alpha: delta for the X family; for
    /// the Y family the "bulleted" relation, which on the left is gamma for
    /// odd m and beta for even m (and the opposite on the right).
    pub fn core_relation(&self, side: Side) -> &BinRelation {
        match self.family {
            Family::X => self.delta.as_ref().expect("X instances always carry delta"),
            Family::Y => {
                let left_core_is_gamma = self.m % 2 == 1;
                match (side, left_core_is_gamma) {
                    (Side::Left, true) | (Side::Right, false) => &self.gamma,
                    (Side::Left, false) | (Side::Right, true) => &self.beta,
                }
            }
        }
    }

    /// All layers of the inside-out evaluation; `layers[k]` covers the
    /// innermost k brackets and holds the pairs at chain position `m - k`.
    pub fn side_layers(&self, side: Side) -> Vec<BinRelation> {
        let mut layers = Vec::with_capacity(self.m + 1);
        let mut cur = self
            .alpha
            .intersect(self.core_relation(side))
            .expect("validated instance relations share one size");
        layers.push(cur.clone());
        for k in 1..=self.m {
            let theta = self.edge_relation(side, self.m - k);
            let wrapped = compose(&compose(theta, &cur).unwrap(), theta).unwrap();
            cur = self.alpha.intersect(&wrapped).unwrap();
            layers.push(cur.clone());
        }
        layers
    }

    /// The relation denoted by one side of the identity (no closure even
    /// for starred instances; starring affects the comparison only).
    pub fn eval_side(&self, side: Side) -> BinRelation {
        self.side_layers(side).pop().unwrap()
    }
}

/// The elements `a_0..a_m`, `b_0..b_m` witnessing that `(a_0, b_0)` lies in
/// one side of an identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessChain {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WitnessError {
    #[error("pair ({0}, {1}) is not a member of the requested side")]
    NotAMember(usize, usize),
    #[error("chain has {found} entries, expected {expected}")]
    BadLength { expected: usize, found: usize },
    #[error("alpha fails to link a_{i} = {a} with b_{i} = {b}")]
    AlphaBroken { i: usize, a: usize, b: usize },
    #[error("core relation fails to link a_m = {a} with b_m = {b}")]
    CoreBroken { a: usize, b: usize },
    #[error("edge relation at position {i} fails on the {chain} chain: ({from}, {to})")]
    EdgeBroken {
        i: usize,
        chain: &'static str,
        from: usize,
        to: usize,
    },
}

impl WitnessChain {
    pub fn m(&self) -> usize {
        self.a.len().saturating_sub(1)
    }

    /// Checks exactly the chain conditions for membership of
    /// `(a[0], b[0])` in the given side: alpha links level-wise, the core
    /// relation links the last pair, and the alternating edge relations
    /// link consecutive entries of each chain.
    pub fn validate(&self, inst: &IdentityInstance, side: Side) -> Result<(), WitnessError> {
        let m = inst.m();
        if self.a.len() != m + 1 || self.b.len() != m + 1 {
            return Err(WitnessError::BadLength {
                expected: m + 1,
                found: self.a.len().max(self.b.len()),
            });
        }
        for i in 0..=m {
            if !inst.alpha().contains(self.a[i], self.b[i]) {
                return Err(WitnessError::AlphaBroken {
                    i,
                    a: self.a[i],
                    b: self.b[i],
                });
            }
        }
        if !inst.core_relation(side).contains(self.a[m], self.b[m]) {
            return Err(WitnessError::CoreBroken {
                a: self.a[m],
                b: self.b[m],
            });
        }
        for i in 0..m {
            let theta = inst.edge_relation(side, i);
            if !theta.contains(self.a[i], self.a[i + 1]) {
                return Err(WitnessError::EdgeBroken {
                    i,
                    chain: "a",
                    from: self.a[i],
                    to: self.a[i + 1],
                });
            }
            if !theta.contains(self.b[i], self.b[i + 1]) {
                return Err(WitnessError::EdgeBroken {
                    i,
                    chain: "b",
                    from: self.b[i],
                    to: self.b[i + 1],
                });
            }
        }
        Ok(())
    }
}

/// Recovers a witness chain for a pair known to lie in a side, by walking
/// the stored evaluation layers back outside-in. Deterministic: the
/// lexicographically least continuation is chosen at each step.
pub fn extract_witness(
    inst: &IdentityInstance,
    side: Side,
    pair: (usize, usize),
) -> Result<WitnessChain, WitnessError> {
    let m = inst.m();
    let layers = inst.side_layers(side);
    if !layers[m].contains(pair.0, pair.1) {
        return Err(WitnessError::NotAMember(pair.0, pair.1));
    }
    let n = inst.size();
    let mut a = vec![pair.0];
    let mut b = vec![pair.1];
    let (mut ca, mut cb) = pair;
    for k in (1..=m).rev() {
        let theta = inst.edge_relation(side, m - k);
        let inner = &layers[k - 1];
        let mut found = None;
        'search: for u in 0..n {
            if !theta.contains(ca, u) {
                continue;
            }
            for v in 0..n {
                if inner.contains(u, v) && theta.contains(v, cb) {
                    found = Some((u, v));
                    break 'search;
                }
            }
        }
        let (u, v) = found.expect("membership in a layer guarantees a continuation");
        a.push(u);
        b.push(v);
        ca = u;
        cb = v;
    }
    let chain = WitnessChain { a, b };
    debug_assert!(chain.validate(inst, side).is_ok());
    Ok(chain)
}

/// Outcome of comparing the two sides of an identity instance. Failures
/// carry a concrete pair from the difference plus its witness chain on the
/// side where the pair belongs; holds carry both evaluated relations.
#[derive(Debug, Clone)]
pub enum IdentityVerdict {
    Holds {
        left: BinRelation,
        right: BinRelation,
    },
    Fails {
        left: BinRelation,
        right: BinRelation,
        side: Side,
        pair: (usize, usize),
        witness: WitnessChain,
    },
}

impl IdentityVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, IdentityVerdict::Holds { .. })
    }

    pub fn left(&self) -> &BinRelation {
        match self {
            IdentityVerdict::Holds { left, .. } | IdentityVerdict::Fails { left, .. } => left,
        }
    }

    pub fn right(&self) -> &BinRelation {
        match self {
            IdentityVerdict::Holds { right, .. } | IdentityVerdict::Fails { right, .. } => right,
        }
    }
}

/// Compares the two sides: equality for plain instances, or the inclusion
/// `left ⊆ (right)*` for starred ones (the closure applies to the whole
/// right-hand side).
pub fn check_identity(inst: &IdentityInstance) -> IdentityVerdict {
    let left = inst.eval_side(Side::Left);
    let right = inst.eval_side(Side::Right);
    if inst.starred() {
        let closed = transitive_closure(&right);
        match left.first_difference(&closed) {
            None => IdentityVerdict::Holds { left, right },
            Some(pair) => {
                let witness = extract_witness(inst, Side::Left, pair)
                    .expect("difference pairs lie in the left side");
                IdentityVerdict::Fails {
                    left,
                    right,
                    side: Side::Left,
                    pair,
                    witness,
                }
            }
        }
    } else {
        let diff = left
            .first_difference(&right)
            .map(|p| (Side::Left, p))
            .or_else(|| right.first_difference(&left).map(|p| (Side::Right, p)));
        match diff {
            None => IdentityVerdict::Holds { left, right },
            Some((side, pair)) => {
                let witness = extract_witness(inst, side, pair)
                    .expect("difference pairs lie in the side they came from");
                IdentityVerdict::Fails {
                    left,
                    right,
                    side,
                    pair,
                    witness,
                }
            }
        }
    }
}

/// `m · ⌊(m+1)/2⌋ − 1`, the sequence index paired with m-permutability.
pub fn h_from_m(m: usize) -> Result<usize, InstanceError> {
    if m < 3 {
        return Err(InstanceError::BadM(m));
    }
    Ok(m * ((m + 1) / 2) - 1)
}

/// Result of comparing `alpha ∧ beta_h` with `alpha ∧ gamma_h`.
#[derive(Debug, Clone)]
pub struct AbhOutcome {
    pub h: usize,
    pub left: Congruence,
    pub right: Congruence,
    pub witness: Option<(usize, usize)>,
}

impl AbhOutcome {
    pub fn holds(&self) -> bool {
        self.witness.is_none()
    }
}

/// Checks `alpha ∧ beta_h = alpha ∧ gamma_h` for congruences of `alg`,
/// with the beta/gamma sequences generated from the given triple.
pub fn check_abh(
    alg: &FiniteAlgebra,
    alpha: &Congruence,
    beta: &Congruence,
    gamma: &Congruence,
    h: usize,
) -> Result<AbhOutcome, CongruenceError> {
    let pair = beta_gamma(alg, alpha, beta, gamma, h)?;
    let left = meet(alg, alpha, &pair.beta_n)?;
    let right = meet(alg, alpha, &pair.gamma_n)?;
    let witness = left
        .relation()
        .first_difference(right.relation())
        .or_else(|| right.relation().first_difference(left.relation()));
    Ok(AbhOutcome {
        h,
        left,
        right,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::congruence::enumerate_con;
    use crate::reference;

    fn z4() -> FiniteAlgebra {
        FiniteAlgebra::cyclic_group(4)
    }

    fn con_of(alg: &FiniteAlgebra) -> Vec<Congruence> {
        enumerate_con(alg).unwrap()
    }

    fn x_inst(
        alg: &FiniteAlgebra,
        m: usize,
        alpha: &Congruence,
        beta: &Congruence,
        gamma: &Congruence,
        delta: &Congruence,
    ) -> IdentityInstance {
        IdentityInstance::x(
            alg,
            m,
            Mode::Strict,
            false,
            alpha.relation().clone(),
            beta.relation().clone(),
            gamma.relation().clone(),
            delta.relation().clone(),
        )
        .unwrap()
    }

    #[test]
    fn diagonal_alpha_collapses_both_sides() {
        let a = z4();
        let con = con_of(&a);
        let bottom = Congruence::bottom(4);
        for beta in &con {
            for gamma in &con {
                let inst = x_inst(&a, 2, &bottom, beta, gamma, &Congruence::top(4));
                assert_eq!(inst.eval_side(Side::Left), BinRelation::diagonal(4));
                assert_eq!(inst.eval_side(Side::Right), BinRelation::diagonal(4));
            }
        }
    }

    #[test]
    fn equal_beta_gamma_makes_sides_equal() {
        let a = z4();
        let con = con_of(&a);
        for theta in &con {
            for delta in &con {
                for m in 1..=3 {
                    let inst = x_inst(&a, m, &Congruence::top(4), theta, theta, delta);
                    assert_eq!(inst.eval_side(Side::Left), inst.eval_side(Side::Right));
                }
            }
        }
    }

    #[test]
    fn m1_matches_direct_composition() {
        let a = z4();
        let con = con_of(&a);
        for alpha in &con {
            for beta in &con {
                for gamma in &con {
                    for delta in &con {
                        let inst = x_inst(&a, 1, alpha, beta, gamma, delta);
                        let alpha_delta =
                            alpha.relation().intersect(delta.relation()).unwrap();
                        let left = alpha
                            .relation()
                            .intersect(
                                &compose(
                                    &compose(beta.relation(), &alpha_delta).unwrap(),
                                    beta.relation(),
                                )
                                .unwrap(),
                            )
                            .unwrap();
                        assert_eq!(inst.eval_side(Side::Left), left);
                        let right = alpha
                            .relation()
                            .intersect(
                                &compose(
                                    &compose(gamma.relation(), &alpha_delta).unwrap(),
                                    gamma.relation(),
                                )
                                .unwrap(),
                            )
                            .unwrap();
                        assert_eq!(inst.eval_side(Side::Right), right);
                    }
                }
            }
        }
    }

    #[test]
    fn z4_satisfies_x3_for_all_congruence_choices() {
        let a = z4();
        let con = con_of(&a);
        for alpha in &con {
            for beta in &con {
                for gamma in &con {
                    for delta in &con {
                        let inst = x_inst(&a, 3, alpha, beta, gamma, delta);
                        assert!(check_identity(&inst).holds());
                    }
                }
            }
        }
    }

    #[test]
    fn bottom_everything_holds_trivially() {
        let a = z4();
        let bottom = Congruence::bottom(4);
        let inst = x_inst(&a, 2, &Congruence::top(4), &bottom, &bottom, &bottom);
        let v = check_identity(&inst);
        assert!(v.holds());
        assert_eq!(*v.left(), BinRelation::diagonal(4));
    }

    #[test]
    fn swapping_beta_gamma_swaps_sides() {
        let a = FiniteAlgebra::chain_lattice(3);
        let con = con_of(&a);
        for alpha in &con {
            for beta in &con {
                for gamma in &con {
                    for delta in &con {
                        for m in 1..=3 {
                            let inst = x_inst(&a, m, alpha, beta, gamma, delta);
                            let swapped = x_inst(&a, m, alpha, gamma, beta, delta);
                            assert_eq!(
                                inst.eval_side(Side::Left),
                                swapped.eval_side(Side::Right)
                            );
                            assert_eq!(
                                inst.eval_side(Side::Right),
                                swapped.eval_side(Side::Left)
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn sides_match_chain_enumeration_oracle() {
        let algebras = [
            z4(),
            FiniteAlgebra::chain_lattice(3),
            FiniteAlgebra::bare_set(3),
        ];
        for a in &algebras {
            let con = con_of(a);
            for alpha in &con {
                for beta in &con {
                    for gamma in &con {
                        for delta in &con {
                            for m in 1..=3 {
                                let inst = x_inst(a, m, alpha, beta, gamma, delta);
                                for side in [Side::Left, Side::Right] {
                                    let dp = inst.eval_side(side);
                                    let oracle = reference::side_by_chain_enumeration(
                                        reference::Family::X,
                                        side == Side::Right,
                                        m,
                                        alpha.relation(),
                                        beta.relation(),
                                        gamma.relation(),
                                        Some(delta.relation()),
                                    );
                                    assert_eq!(dp, oracle);
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn y_family_matches_chain_enumeration_oracle() {
        let a = FiniteAlgebra::chain_lattice(3);
        let con = con_of(&a);
        for alpha in &con {
            for beta in &con {
                for gamma in &con {
                    for m in 1..=3 {
                        let inst = IdentityInstance::y(
                            &a,
                            m,
                            Mode::Strict,
                            false,
                            alpha.relation().clone(),
                            beta.relation().clone(),
                            gamma.relation().clone(),
                        )
                        .unwrap();
                        for side in [Side::Left, Side::Right] {
                            let dp = inst.eval_side(side);
                            let oracle = reference::side_by_chain_enumeration(
                                reference::Family::Y,
                                side == Side::Right,
                                m,
                                alpha.relation(),
                                beta.relation(),
                                gamma.relation(),
                                None,
                            );
                            assert_eq!(dp, oracle);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn x_with_bottom_delta_equals_y_weakening() {
        let a = FiniteAlgebra::chain_lattice(3);
        let con = con_of(&a);
        let bottom = Congruence::bottom(3);
        for alpha in &con {
            for beta in &con {
                for gamma in &con {
                    for m in 2..=3 {
                        let x = x_inst(&a, m, alpha, beta, gamma, &bottom);
                        let y = x.y_weakening(&a).unwrap();
                        for side in [Side::Left, Side::Right] {
                            assert_eq!(x.eval_side(side), y.eval_side(side));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn failing_verdicts_carry_validating_witness() {
        // on the operation-free 3-set with alpha = ∇ and delta = Δ, the
        // m = 1 sides collapse to beta and gamma and differ whenever they do
        let a = FiniteAlgebra::bare_set(3);
        let con = con_of(&a);
        assert_eq!(con.len(), 5);
        let mut saw_failure = false;
        for alpha in &con {
            for beta in &con {
                for gamma in &con {
                    for delta in &con {
                        for m in 1..=3 {
                            let inst = x_inst(&a, m, alpha, beta, gamma, delta);
                            if alpha.is_top() && delta.is_bottom() && m == 1 {
                                assert_eq!(inst.eval_side(Side::Left), *beta.relation());
                                assert_eq!(inst.eval_side(Side::Right), *gamma.relation());
                            }
                            if let IdentityVerdict::Fails {
                                side,
                                pair,
                                witness,
                                left,
                                right,
                            } = check_identity(&inst)
                            {
                                saw_failure = true;
                                witness.validate(&inst, side).unwrap();
                                assert_eq!(witness.a[0], pair.0);
                                assert_eq!(witness.b[0], pair.1);
                                let (inside, outside) = match side {
                                    Side::Left => (&left, &right),
                                    Side::Right => (&right, &left),
                                };
                                assert!(inside.contains(pair.0, pair.1));
                                assert!(!outside.contains(pair.0, pair.1));
                            }
                        }
                    }
                }
            }
        }
        assert!(saw_failure, "expected at least one failing instance");
    }

    #[test]
    fn extracted_witnesses_validate_everywhere() {
        let a = z4();
        let con = con_of(&a);
        for alpha in &con {
            for beta in &con {
                for gamma in &con {
                    for delta in &con {
                        let inst = x_inst(&a, 3, alpha, beta, gamma, delta);
                        for side in [Side::Left, Side::Right] {
                            let rel = inst.eval_side(side);
                            for (p, q) in rel.pairs() {
                                let w = extract_witness(&inst, side, (p, q)).unwrap();
                                w.validate(&inst, side).unwrap();
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn constant_chain_validates_when_reflexive() {
        let a = z4();
        let top = Congruence::top(4);
        let inst = x_inst(&a, 3, &top, &top, &top, &top);
        let chain = WitnessChain {
            a: vec![2; 4],
            b: vec![2; 4],
        };
        chain.validate(&inst, Side::Left).unwrap();
    }

    #[test]
    fn extract_rejects_non_members() {
        let a = z4();
        let bottom = Congruence::bottom(4);
        let inst = x_inst(&a, 2, &bottom, &bottom, &bottom, &bottom);
        assert!(matches!(
            extract_witness(&inst, Side::Left, (0, 1)),
            Err(WitnessError::NotAMember(0, 1))
        ));
    }

    #[test]
    fn m1_witness_shape() {
        let a = z4();
        let con = con_of(&a);
        let even_odd = con.iter().find(|c| c.partition() == [0, 1, 0, 1]).unwrap();
        let inst = x_inst(&a, 1, &Congruence::top(4), even_odd, even_odd, &Congruence::top(4));
        let rel = inst.eval_side(Side::Left);
        assert!(rel.contains(0, 1), "0 β 2 αδ 3 β 1 is a witness");
        let w = extract_witness(&inst, Side::Left, (0, 1)).unwrap();
        assert_eq!(w.a.len(), 2);
        assert!(even_odd.related(w.a[0], w.a[1]));
        assert!(even_odd.related(w.b[0], w.b[1]));
        assert!(inst.alpha().contains(w.a[1], w.b[1]));
        assert!(inst.core_relation(Side::Left).contains(w.a[1], w.b[1]));
    }

    #[test]
    fn h_formula_values() {
        assert_eq!(h_from_m(3).unwrap(), 5);
        assert_eq!(h_from_m(4).unwrap(), 7);
        assert_eq!(h_from_m(5).unwrap(), 14);
        assert!(h_from_m(2).is_err());
    }

    #[test]
    fn abh_at_h0_is_trivial() {
        let a = z4();
        let con = con_of(&a);
        for alpha in &con {
            for beta in &con {
                for gamma in &con {
                    let out = check_abh(&a, alpha, beta, gamma, 0).unwrap();
                    assert!(out.holds());
                    assert!(out.left.is_bottom());
                }
            }
        }
    }

    #[test]
    fn abh_symmetric_inputs_hold() {
        let a = z4();
        let con = con_of(&a);
        for alpha in &con {
            for theta in &con {
                for h in 0..=6 {
                    assert!(check_abh(&a, alpha, theta, theta, h).unwrap().holds());
                }
            }
        }
    }

    #[test]
    fn abh_klein_factor_kernels() {
        let a = FiniteAlgebra::klein_group();
        let alpha = Congruence::top(4);
        let beta = Congruence::from_partition(&a, &[0, 0, 1, 1]).unwrap();
        let gamma = Congruence::from_partition(&a, &[0, 1, 0, 1]).unwrap();
        let out = check_abh(&a, &alpha, &beta, &gamma, 5).unwrap();
        assert!(out.holds());
        // both meets reach the top once the sequences join everything
        assert!(out.left.is_top());
    }

    #[test]
    fn generalized_mode_accepts_compatible_reflexive_alpha() {
        let a = FiniteAlgebra::chain_lattice(2);
        // the lattice order itself: reflexive, compatible, not symmetric
        let order = BinRelation::from_pairs(2, [(0, 0), (1, 1), (0, 1)]);
        assert!(order.is_compatible_with(&a).unwrap());
        let top = BinRelation::full(2);
        let inst = IdentityInstance::x(
            &a,
            2,
            Mode::Generalized,
            false,
            order.clone(),
            top.clone(),
            top.clone(),
            order.clone(),
        )
        .unwrap();
        let _ = check_identity(&inst);
        // strict mode rejects the same alpha
        assert!(matches!(
            IdentityInstance::x(&a, 2, Mode::Strict, false, order.clone(), top.clone(), top, order),
            Err(InstanceError::NotACongruence { name: "alpha", .. })
        ));
    }

    #[test]
    fn starred_inclusion_never_stricter_than_plain() {
        let a = FiniteAlgebra::chain_lattice(3);
        let con = con_of(&a);
        for alpha in &con {
            for beta in &con {
                for gamma in &con {
                    for delta in &con {
                        let plain = x_inst(&a, 2, alpha, beta, gamma, delta);
                        let starred = IdentityInstance::x(
                            &a,
                            2,
                            Mode::Strict,
                            true,
                            alpha.relation().clone(),
                            beta.relation().clone(),
                            gamma.relation().clone(),
                            delta.relation().clone(),
                        )
                        .unwrap();
                        if check_identity(&plain).holds() {
                            assert!(check_identity(&starred).holds());
                        }
                    }
                }
            }
        }
    }
}
