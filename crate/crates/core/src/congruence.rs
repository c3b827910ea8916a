//! Congruences of a finite algebra: recognition, principal congruences,
//! full enumeration, lattice operations, and the mutually recursive
//! beta/gamma join-meet sequences.

use crate::algebra::{increment, FiniteAlgebra};
use crate::relation::{alt_power, transitive_closure, BinRelation, RelationError};
use crate::textio::{ParseError, Scanner};
use std::fmt::Write as _;
use thiserror::Error;

/// Default cap on the universe size for full congruence-lattice
/// enumeration (Bell(8) = 4140 partitions).
pub const DEFAULT_CON_CAP: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CongruenceError {
    #[error("relation is not an equivalence: {reason} at ({a}, {b})")]
    NotEquivalence { reason: String, a: usize, b: usize },
    #[error("relation is not compatible: op `{symbol}` maps related arguments {left:?} ~ {right:?} to unrelated ({out_left}, {out_right})")]
    NotCompatible {
        symbol: String,
        left: Vec<usize>,
        right: Vec<usize>,
        out_left: usize,
        out_right: usize,
    },
    #[error("partition has {found} entries, expected {expected}")]
    BadPartitionLength { expected: usize, found: usize },
    #[error("universe size {size} exceeds enumeration cap {cap}")]
    EnumerationCapExceeded { size: usize, cap: usize },
    #[error("sizes differ: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error(transparent)]
    Relation(#[from] RelationError),
}

/// A congruence stored as a canonical partition (block ids numbered by
/// first occurrence) together with its relation view. The two views are
/// kept in sync by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Congruence {
    partition: Vec<usize>,
    relation: BinRelation,
}

impl Congruence {
    /// The diagonal congruence (every element its own block).
    pub fn bottom(n: usize) -> Congruence {
        Congruence {
            partition: (0..n).collect(),
            relation: BinRelation::diagonal(n),
        }
    }

    /// The full congruence (a single block).
    pub fn top(n: usize) -> Congruence {
        Congruence {
            partition: vec![0; n],
            relation: BinRelation::full(n),
        }
    }

    /// Builds a congruence from block ids, validating compatibility with
    /// `alg`. Block ids are canonicalized to first-occurrence order.
    pub fn from_partition(alg: &FiniteAlgebra, blocks: &[usize]) -> Result<Congruence, CongruenceError> {
        if blocks.len() != alg.size() {
            return Err(CongruenceError::BadPartitionLength {
                expected: alg.size(),
                found: blocks.len(),
            });
        }
        let partition = canonicalize(blocks);
        if let Some(v) = partition_compatibility_violation(alg, &partition) {
            return Err(v);
        }
        let relation = relation_of_partition(&partition);
        Ok(Congruence { partition, relation })
    }

    pub fn size(&self) -> usize {
        self.partition.len()
    }

    pub fn partition(&self) -> &[usize] {
        &self.partition
    }

    pub fn relation(&self) -> &BinRelation {
        &self.relation
    }

    pub fn block_count(&self) -> usize {
        self.partition.iter().copied().max().map_or(0, |m| m + 1)
    }

    pub fn related(&self, a: usize, b: usize) -> bool {
        self.partition[a] == self.partition[b]
    }

    pub fn is_bottom(&self) -> bool {
        self.partition.iter().enumerate().all(|(i, &b)| i == b)
    }

    pub fn is_top(&self) -> bool {
        self.partition.iter().all(|&b| b == 0)
    }
}

fn canonicalize(blocks: &[usize]) -> Vec<usize> {
    let mut map: Vec<Option<usize>> = vec![None; blocks.len()];
    let mut next = 0;
    blocks
        .iter()
        .map(|&b| {
            *map[b].get_or_insert_with(|| {
                let id = next;
                next += 1;
                id
            })
        })
        .collect()
}

fn relation_of_partition(partition: &[usize]) -> BinRelation {
    let n = partition.len();
    let mut r = BinRelation::empty(n);
    for a in 0..n {
        for b in 0..n {
            if partition[a] == partition[b] {
                r.insert(a, b);
            }
        }
    }
    r
}

/// One-coordinate compatibility check, sound and complete for equivalence
/// relations: it suffices to vary a single argument position at a time.
fn partition_compatibility_violation(
    alg: &FiniteAlgebra,
    partition: &[usize],
) -> Option<CongruenceError> {
    let n = alg.size();
    for op in alg.ops() {
        if op.arity == 0 {
            continue;
        }
        let mut args = vec![0usize; op.arity];
        loop {
            let base = op.apply(&args, n);
            for pos in 0..op.arity {
                let orig = args[pos];
                for alt in 0..n {
                    if alt != orig && partition[alt] == partition[orig] {
                        let mut other = args.clone();
                        other[pos] = alt;
                        let v = op.apply(&other, n);
                        if partition[base] != partition[v] {
                            return Some(CongruenceError::NotCompatible {
                                symbol: op.symbol.clone(),
                                left: args.clone(),
                                right: other,
                                out_left: base,
                                out_right: v,
                            });
                        }
                    }
                }
            }
            if !increment(&mut args, n) {
                break;
            }
        }
    }
    None
}

/// Validates that `r` is a congruence of `alg` and returns it in canonical
/// form. Violations name a concrete witnessing tuple.
pub fn as_congruence(alg: &FiniteAlgebra, r: &BinRelation) -> Result<Congruence, CongruenceError> {
    let n = alg.size();
    if r.size() != n {
        return Err(CongruenceError::SizeMismatch(r.size(), n));
    }
    for a in 0..n {
        if !r.contains(a, a) {
            return Err(CongruenceError::NotEquivalence {
                reason: "not reflexive".into(),
                a,
                b: a,
            });
        }
    }
    for a in 0..n {
        for b in 0..n {
            if r.contains(a, b) && !r.contains(b, a) {
                return Err(CongruenceError::NotEquivalence {
                    reason: "not symmetric".into(),
                    a,
                    b,
                });
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            if r.contains(a, b) {
                for c in 0..n {
                    if r.contains(b, c) && !r.contains(a, c) {
                        return Err(CongruenceError::NotEquivalence {
                            reason: format!("not transitive via {b}"),
                            a,
                            b: c,
                        });
                    }
                }
            }
        }
    }
    let mut partition = vec![usize::MAX; n];
    let mut next = 0;
    for a in 0..n {
        if partition[a] == usize::MAX {
            for b in a..n {
                if r.contains(a, b) {
                    partition[b] = next;
                }
            }
            next += 1;
        }
    }
    if let Some(v) = partition_compatibility_violation(alg, &partition) {
        return Err(v);
    }
    Ok(Congruence {
        relation: relation_of_partition(&partition),
        partition,
    })
}

/// Least congruence of `alg` collapsing `a` and `b`: union-find saturation
/// under all one-argument translations of the basic operations.
pub fn principal_congruence(
    alg: &FiniteAlgebra,
    a: usize,
    b: usize,
) -> Result<Congruence, CongruenceError> {
    let n = alg.size();
    if a >= n || b >= n {
        return Err(CongruenceError::SizeMismatch(a.max(b) + 1, n));
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut queue = vec![(a, b)];
    while let Some((u, v)) = queue.pop() {
        let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
        if ru == rv {
            continue;
        }
        parent[ru.max(rv)] = ru.min(rv);
        // push the images of (u, v) under every one-argument translation
        for op in alg.ops() {
            if op.arity == 0 {
                continue;
            }
            let mut rest = vec![0usize; op.arity - 1];
            loop {
                for pos in 0..op.arity {
                    let mut left = Vec::with_capacity(op.arity);
                    let mut right = Vec::with_capacity(op.arity);
                    left.extend_from_slice(&rest[..pos]);
                    left.push(u);
                    left.extend_from_slice(&rest[pos..]);
                    right.extend_from_slice(&rest[..pos]);
                    right.push(v);
                    right.extend_from_slice(&rest[pos..]);
                    let iu = op.apply(&left, n);
                    let iv = op.apply(&right, n);
                    if find(&mut parent, iu) != find(&mut parent, iv) {
                        queue.push((iu, iv));
                    }
                }
                if rest.is_empty() || !increment(&mut rest, n) {
                    break;
                }
            }
        }
    }
    let blocks: Vec<usize> = (0..n).map(|x| find(&mut parent, x)).collect();
    Congruence::from_partition(alg, &blocks)
}

/// All congruences of `alg` in restricted-growth-string order (bottom and
/// top included). Errors out above the enumeration cap.
pub fn enumerate_con(alg: &FiniteAlgebra) -> Result<Vec<Congruence>, CongruenceError> {
    enumerate_con_capped(alg, DEFAULT_CON_CAP)
}

pub fn enumerate_con_capped(
    alg: &FiniteAlgebra,
    cap: usize,
) -> Result<Vec<Congruence>, CongruenceError> {
    let n = alg.size();
    if n > cap {
        return Err(CongruenceError::EnumerationCapExceeded { size: n, cap });
    }
    let mut out = Vec::new();
    // restricted growth strings: s[0] = 0, s[i] ≤ max(s[..i]) + 1
    let mut s = vec![0usize; n];
    loop {
        if partition_compatibility_violation(alg, &s).is_none() {
            out.push(Congruence {
                partition: s.clone(),
                relation: relation_of_partition(&s),
            });
        }
        // advance to the next RGS
        let mut i = n;
        loop {
            if i <= 1 {
                return Ok(out);
            }
            i -= 1;
            let max_prefix = s[..i].iter().copied().max().unwrap_or(0);
            if s[i] <= max_prefix {
                s[i] += 1;
                for v in s[i + 1..].iter_mut() {
                    *v = 0;
                }
                break;
            }
        }
    }
}

/// Meet in the congruence lattice: intersection of the relations. The
/// result is re-validated rather than assumed.
pub fn meet(
    alg: &FiniteAlgebra,
    theta: &Congruence,
    psi: &Congruence,
) -> Result<Congruence, CongruenceError> {
    let r = theta.relation().intersect(psi.relation())?;
    as_congruence(alg, &r)
}

/// Join in the congruence lattice: transitive closure of the union. The
/// union of congruences is reflexive, symmetric and compatible, and the
/// closure stays compatible; this is asserted via re-validation.
pub fn join(
    alg: &FiniteAlgebra,
    theta: &Congruence,
    psi: &Congruence,
) -> Result<Congruence, CongruenceError> {
    let r = transitive_closure(&theta.relation().union(psi.relation())?);
    as_congruence(alg, &r)
}

/// One index of the mutually recursive sequences starting from
/// `beta_0 = gamma_0 = bottom` with
/// `beta_{n+1} = beta + alpha·gamma_n` and `gamma_{n+1} = gamma + alpha·beta_n`
/// (join written `+`, meet by juxtaposition).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BetaGammaPair {
    pub index: usize,
    pub beta_n: Congruence,
    pub gamma_n: Congruence,
}

/// The full prefix `0..=n` of the beta/gamma sequences. Computed jointly;
/// both sequences are monotone and stabilize within |Con A| steps.
pub fn beta_gamma_sequence(
    alg: &FiniteAlgebra,
    alpha: &Congruence,
    beta: &Congruence,
    gamma: &Congruence,
    n: usize,
) -> Result<Vec<BetaGammaPair>, CongruenceError> {
    let bottom = Congruence::bottom(alg.size());
    let mut seq = vec![BetaGammaPair {
        index: 0,
        beta_n: bottom.clone(),
        gamma_n: bottom,
    }];
    for i in 1..=n {
        let prev = &seq[i - 1];
        let next = BetaGammaPair {
            index: i,
            beta_n: join(alg, beta, &meet(alg, alpha, &prev.gamma_n)?)?,
            gamma_n: join(alg, gamma, &meet(alg, alpha, &prev.beta_n)?)?,
        };
        seq.push(next);
    }
    Ok(seq)
}

/// The `n`-th beta/gamma pair.
pub fn beta_gamma(
    alg: &FiniteAlgebra,
    alpha: &Congruence,
    beta: &Congruence,
    gamma: &Congruence,
    n: usize,
) -> Result<BetaGammaPair, CongruenceError> {
    Ok(beta_gamma_sequence(alg, alpha, beta, gamma, n)?.pop().unwrap())
}

/// A failing pair of congruences with an element pair witnessing
/// `theta ∘_m psi ≠ psi ∘_m theta`.
#[derive(Debug, Clone)]
pub struct PermutabilityViolation {
    pub theta: Congruence,
    pub psi: Congruence,
    pub pair: (usize, usize),
}

#[derive(Debug, Clone)]
pub struct PermutabilityOutcome {
    pub m: usize,
    pub con_size: usize,
    pub violation: Option<PermutabilityViolation>,
}

impl PermutabilityOutcome {
    pub fn permutable(&self) -> bool {
        self.violation.is_none()
    }
}

/// Whether every pair of congruences of `alg` m-permutes:
/// `theta ∘_m psi = psi ∘_m theta` with `m` alternating factors.
pub fn is_m_permutable(alg: &FiniteAlgebra, m: usize) -> Result<PermutabilityOutcome, CongruenceError> {
    is_m_permutable_capped(alg, m, DEFAULT_CON_CAP)
}

pub fn is_m_permutable_capped(
    alg: &FiniteAlgebra,
    m: usize,
    cap: usize,
) -> Result<PermutabilityOutcome, CongruenceError> {
    assert!(m >= 2, "permutability level must be at least 2");
    let con = enumerate_con_capped(alg, cap)?;
    for (i, theta) in con.iter().enumerate() {
        for psi in &con[i + 1..] {
            let forward = alt_power(theta.relation(), psi.relation(), m)?;
            let backward = alt_power(psi.relation(), theta.relation(), m)?;
            if forward != backward {
                let pair = forward
                    .first_difference(&backward)
                    .or_else(|| backward.first_difference(&forward))
                    .expect("unequal relations must differ somewhere");
                return Ok(PermutabilityOutcome {
                    m,
                    con_size: con.len(),
                    violation: Some(PermutabilityViolation {
                        theta: theta.clone(),
                        psi: psi.clone(),
                        pair,
                    }),
                });
            }
        }
    }
    Ok(PermutabilityOutcome {
        m,
        con_size: con.len(),
        violation: None,
    })
}

/// The relation view of a block-id array, with no algebra validation;
/// handy when a partition file is consumed as a plain relation.
pub fn relation_of_blocks(blocks: &[usize]) -> BinRelation {
    relation_of_partition(blocks)
}

/// Parse `cong <name> <n> : <block ids>`; validation against an algebra is
/// the caller's second step.
pub fn parse_congruence(input: &str) -> Result<(String, Vec<usize>), ParseError> {
    let mut sc = Scanner::new(input);
    sc.expect_word("cong")?;
    let (_, name) = sc.expect_token("congruence name")?;
    let n = sc.expect_usize("universe size")?;
    sc.expect_word(":")?;
    let mut blocks = Vec::with_capacity(n);
    for _ in 0..n {
        blocks.push(sc.expect_usize("block id")?);
    }
    sc.expect_end()?;
    Ok((name.to_string(), blocks))
}

pub fn serialize_congruence(name: &str, c: &Congruence) -> String {
    let mut out = String::new();
    write!(out, "cong {} {} :", name, c.size()).unwrap();
    for b in c.partition() {
        write!(out, " {b}").unwrap();
    }
    out.push('\n');
    out
}
