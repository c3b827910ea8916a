//! Binary relations on a fixed finite universe as bit matrices, with the
//! relational-algebra kernel: composition, alternating powers, transitive
//! closure, compatible closure, and structural predicates.

use crate::algebra::{increment, AlgebraError, FiniteAlgebra};
use crate::textio::{ParseError, Scanner};
use std::fmt;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RelationError {
    #[error("relation sizes differ: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// An arbitrary binary relation on `{0, …, n-1}`; `bits[a][b]` ⇔ `(a,b) ∈ R`.
///
/// Rows are packed into 64-bit words; trailing bits of the last word in each
/// row are kept zero so that equality and subset tests are plain word scans.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinRelation {
    n: usize,
    words_per_row: usize,
    bits: Vec<u64>,
}

impl BinRelation {
    pub fn empty(n: usize) -> Self {
        let words_per_row = n.div_ceil(64).max(1);
        BinRelation {
            n,
            words_per_row,
            bits: vec![0; words_per_row * n],
        }
    }

    pub fn diagonal(n: usize) -> Self {
        let mut r = Self::empty(n);
        for a in 0..n {
            r.insert(a, a);
        }
        r
    }

    pub fn full(n: usize) -> Self {
        let mut r = Self::empty(n);
        for a in 0..n {
            for b in 0..n {
                r.insert(a, b);
            }
        }
        r
    }

    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut r = Self::empty(n);
        for (a, b) in pairs {
            r.insert(a, b);
        }
        r
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn contains(&self, a: usize, b: usize) -> bool {
        debug_assert!(a < self.n && b < self.n);
        self.bits[a * self.words_per_row + b / 64] >> (b % 64) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, a: usize, b: usize) {
        assert!(a < self.n && b < self.n);
        self.bits[a * self.words_per_row + b / 64] |= 1 << (b % 64);
    }

    #[inline]
    fn row(&self, a: usize) -> &[u64] {
        &self.bits[a * self.words_per_row..(a + 1) * self.words_per_row]
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.n {
            for b in 0..self.n {
                if self.contains(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn pair_count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    /// First pair of `self \ other`, scanning rows in order.
    pub fn first_difference(&self, other: &BinRelation) -> Option<(usize, usize)> {
        for a in 0..self.n {
            for (w, (&x, &y)) in self.row(a).iter().zip(other.row(a)).enumerate() {
                let diff = x & !y;
                if diff != 0 {
                    return Some((a, w * 64 + diff.trailing_zeros() as usize));
                }
            }
        }
        None
    }

    pub fn union(&self, other: &BinRelation) -> Result<BinRelation, RelationError> {
        self.check_size(other)?;
        let mut out = self.clone();
        for (w, &o) in out.bits.iter_mut().zip(&other.bits) {
            *w |= o;
        }
        Ok(out)
    }

    pub fn intersect(&self, other: &BinRelation) -> Result<BinRelation, RelationError> {
        self.check_size(other)?;
        let mut out = self.clone();
        for (w, &o) in out.bits.iter_mut().zip(&other.bits) {
            *w &= o;
        }
        Ok(out)
    }

    pub fn is_subset(&self, other: &BinRelation) -> Result<bool, RelationError> {
        self.check_size(other)?;
        Ok(self.bits.iter().zip(&other.bits).all(|(&x, &y)| x & !y == 0))
    }

    pub fn converse(&self) -> BinRelation {
        let mut out = Self::empty(self.n);
        for (a, b) in self.pairs() {
            out.insert(b, a);
        }
        out
    }

    fn check_size(&self, other: &BinRelation) -> Result<(), RelationError> {
        if self.n != other.n {
            return Err(RelationError::SizeMismatch(self.n, other.n));
        }
        Ok(())
    }

    pub fn is_reflexive(&self) -> bool {
        (0..self.n).all(|a| self.contains(a, a))
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|a| (0..self.n).all(|b| !self.contains(a, b) || self.contains(b, a)))
    }

    pub fn is_transitive(&self) -> bool {
        // R transitive ⇔ for each (a,b) ∈ R, row(b) ⊆ row(a)
        for a in 0..self.n {
            for b in 0..self.n {
                if self.contains(a, b) {
                    let ra = self.row(a);
                    let rb = self.row(b);
                    if rb.iter().zip(ra).any(|(&x, &y)| x & !y != 0) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Whether the pair set is closed under every operation of `a` applied
    /// coordinatewise, i.e. is a subuniverse of the square.
    pub fn is_compatible_with(&self, alg: &FiniteAlgebra) -> Result<bool, RelationError> {
        Ok(self.compatibility_violation(alg)?.is_none())
    }

    /// A violating `(symbol, argument pairs, result pair)` when the relation
    /// is not compatible with `alg`.
    #[allow(clippy::type_complexity)]
    pub fn compatibility_violation(
        &self,
        alg: &FiniteAlgebra,
    ) -> Result<Option<(String, Vec<(usize, usize)>, (usize, usize))>, RelationError> {
        if alg.size() != self.n {
            return Err(RelationError::SizeMismatch(alg.size(), self.n));
        }
        let pairs = self.pairs();
        for op in alg.ops() {
            if op.arity == 0 {
                let c = op.table[0];
                if !self.contains(c, c) {
                    return Ok(Some((op.symbol.clone(), vec![], (c, c))));
                }
                continue;
            }
            let mut idx = vec![0usize; op.arity];
            if pairs.is_empty() {
                continue;
            }
            let mut left = vec![0usize; op.arity];
            let mut right = vec![0usize; op.arity];
            loop {
                for (i, &j) in idx.iter().enumerate() {
                    left[i] = pairs[j].0;
                    right[i] = pairs[j].1;
                }
                let va = op.apply(&left, self.n);
                let vb = op.apply(&right, self.n);
                if !self.contains(va, vb) {
                    let args = idx.iter().map(|&j| pairs[j]).collect();
                    return Ok(Some((op.symbol.clone(), args, (va, vb))));
                }
                if !increment(&mut idx, pairs.len()) {
                    break;
                }
            }
        }
        Ok(None)
    }
}

impl fmt::Debug for BinRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BinRelation(n={}, {:?})", self.n, self.pairs())
    }
}

/// Relational product: `(a,c) ∈ R ∘ S` iff `a R b` and `b S c` for some `b`.
/// The left factor applies first, matching the chain reading `a₀ R a₁ S a₂`.
pub fn compose(r: &BinRelation, s: &BinRelation) -> Result<BinRelation, RelationError> {
    if r.n != s.n {
        return Err(RelationError::SizeMismatch(r.n, s.n));
    }
    let mut out = BinRelation::empty(r.n);
    let wpr = r.words_per_row;
    for a in 0..r.n {
        let row = r.row(a);
        let out_row = &mut out.bits[a * wpr..(a + 1) * wpr];
        for (w, &word) in row.iter().enumerate() {
            let mut word = word;
            while word != 0 {
                let b = w * 64 + word.trailing_zeros() as usize;
                word &= word - 1;
                for (o, &sv) in out_row.iter_mut().zip(s.row(b)) {
                    *o |= sv;
                }
            }
        }
    }
    Ok(out)
}

/// `first ∘ second ∘ first ∘ …` with `m` factors total (m−1 composition
/// signs), starting with `first`. `m = 1` is `first` itself.
pub fn alt_power(
    first: &BinRelation,
    second: &BinRelation,
    m: usize,
) -> Result<BinRelation, RelationError> {
    assert!(m >= 1, "alternating power needs at least one factor");
    if first.n != second.n {
        return Err(RelationError::SizeMismatch(first.n, second.n));
    }
    let mut acc = first.clone();
    for i in 1..m {
        let factor = if i % 2 == 1 { second } else { first };
        acc = compose(&acc, factor)?;
    }
    Ok(acc)
}

/// Least transitive relation containing `r` (bitset Warshall).
pub fn transitive_closure(r: &BinRelation) -> BinRelation {
    let mut out = r.clone();
    let wpr = out.words_per_row;
    let mut krow = vec![0u64; wpr];
    for k in 0..out.n {
        // row k is stable during pass k (the only write would be i == k,
        // an OR with itself), so a snapshot is safe
        krow.copy_from_slice(&out.bits[k * wpr..(k + 1) * wpr]);
        for i in 0..out.n {
            if out.contains(i, k) {
                for (w, &kv) in out.bits[i * wpr..(i + 1) * wpr].iter_mut().zip(&krow) {
                    *w |= kv;
                }
            }
        }
    }
    out
}

/// Least relation containing `x` whose pair set is closed under the
/// operations of `alg` applied coordinatewise. Delegates to subuniverse
/// generation in the square so that a single closure engine is in play.
pub fn compatible_closure(
    alg: &FiniteAlgebra,
    x: &BinRelation,
) -> Result<BinRelation, RelationError> {
    if alg.size() != x.n {
        return Err(RelationError::SizeMismatch(alg.size(), x.n));
    }
    let square = alg.direct_power(2)?;
    let n = alg.size();
    let gens: Vec<usize> = x.pairs().iter().map(|&(a, b)| a * n + b).collect();
    let closed = square.subuniverse_generate(&gens)?;
    Ok(BinRelation::from_pairs(
        n,
        closed.iter().map(|&e| (e / n, e % n)),
    ))
}

/// Structural flags reported by [`relation_predicates`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RelationFlags {
    pub reflexive: bool,
    pub symmetric: bool,
    pub transitive: bool,
    /// Present only when an algebra was supplied.
    pub compatible: Option<bool>,
}

pub fn relation_predicates(
    r: &BinRelation,
    alg: Option<&FiniteAlgebra>,
) -> Result<RelationFlags, RelationError> {
    let compatible = match alg {
        Some(a) => Some(r.is_compatible_with(a)?),
        None => None,
    };
    Ok(RelationFlags {
        reflexive: r.is_reflexive(),
        symmetric: r.is_symmetric(),
        transitive: r.is_transitive(),
        compatible,
    })
}

/// All reflexive compatible relations of `alg`, ascending by pair set.
///
/// Enumerates supersets of the diagonal and keeps the compatible ones, so it
/// is only meant for small universes (the check panics above n = 5 where
/// 2^(n²−n) blows up).
pub fn compatible_reflexive_relations(alg: &FiniteAlgebra) -> Vec<BinRelation> {
    let n = alg.size();
    let off_diag: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (0..n).map(move |b| (a, b)))
        .filter(|&(a, b)| a != b)
        .collect();
    assert!(off_diag.len() <= 20, "universe too large to enumerate relations");
    let mut out = Vec::new();
    for mask in 0..(1usize << off_diag.len()) {
        let mut r = BinRelation::diagonal(n);
        for (i, &(a, b)) in off_diag.iter().enumerate() {
            if mask >> i & 1 == 1 {
                r.insert(a, b);
            }
        }
        if r.is_compatible_with(alg).unwrap() {
            out.push(r);
        }
    }
    out
}

/// A relation together with the name it carried in its source file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedRelation {
    pub name: String,
    pub relation: BinRelation,
}

/// Parse the relation text format: `rel <name> <n>` followed by `a b` pair
/// lines, or the shorthands `diag <n>` / `full <n>`.
pub fn parse_relation(input: &str) -> Result<NamedRelation, ParseError> {
    let mut sc = Scanner::new(input);
    let (line, kind) = sc.expect_token("`rel`, `diag` or `full`")?;
    match kind {
        "diag" => {
            let n = sc.expect_usize("universe size")?;
            sc.expect_end()?;
            Ok(NamedRelation {
                name: "diag".into(),
                relation: BinRelation::diagonal(n),
            })
        }
        "full" => {
            let n = sc.expect_usize("universe size")?;
            sc.expect_end()?;
            Ok(NamedRelation {
                name: "full".into(),
                relation: BinRelation::full(n),
            })
        }
        "rel" => {
            let (_, name) = sc.expect_token("relation name")?;
            let n = sc.expect_usize("universe size")?;
            let mut rel = BinRelation::empty(n);
            while !sc.at_end() {
                let a = sc.expect_usize("pair element")?;
                let b = sc.expect_usize("pair element")?;
                if a >= n || b >= n {
                    return Err(ParseError::new(
                        sc.line(),
                        format!("pair ({a}, {b}) out of range for size {n}"),
                    ));
                }
                rel.insert(a, b);
            }
            Ok(NamedRelation {
                name: name.to_string(),
                relation: rel,
            })
        }
        other => Err(ParseError::new(
            line,
            format!("expected `rel`, `diag` or `full`, found `{other}`"),
        )),
    }
}

/// Serialize in `rel` form with ascending pairs; `parse_relation`
/// round-trips this exactly.
pub fn serialize_relation(name: &str, r: &BinRelation) -> String {
    let mut out = String::new();
    writeln!(out, "rel {} {}", name, r.size()).unwrap();
    for (a, b) in r.pairs() {
        writeln!(out, "{a} {b}").unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(n: usize, pairs: &[(usize, usize)]) -> BinRelation {
        BinRelation::from_pairs(n, pairs.iter().copied())
    }

    #[test]
    fn compose_single_link() {
        let r = rel(3, &[(0, 1)]);
        let s = rel(3, &[(1, 2)]);
        assert_eq!(compose(&r, &s).unwrap(), rel(3, &[(0, 2)]));
    }

    #[test]
    fn compose_identity() {
        let r = rel(4, &[(0, 1), (2, 3), (3, 3)]);
        let d = BinRelation::diagonal(4);
        assert_eq!(compose(&d, &r).unwrap(), r);
        assert_eq!(compose(&r, &d).unwrap(), r);
    }

    #[test]
    fn compose_size_mismatch() {
        assert!(matches!(
            compose(&BinRelation::empty(2), &BinRelation::empty(3)),
            Err(RelationError::SizeMismatch(2, 3))
        ));
    }

    #[test]
    fn alt_power_base_cases() {
        let a = rel(4, &[(0, 1), (1, 2)]);
        let b = rel(4, &[(2, 3)]);
        assert_eq!(alt_power(&a, &b, 1).unwrap(), a);
        assert_eq!(alt_power(&a, &b, 2).unwrap(), compose(&a, &b).unwrap());
        let m4 = compose(
            &compose(&compose(&a, &b).unwrap(), &a).unwrap(),
            &b,
        )
        .unwrap();
        assert_eq!(alt_power(&a, &b, 4).unwrap(), m4);
    }

    #[test]
    fn closure_adds_chain_pair() {
        let r = rel(3, &[(0, 1), (1, 2)]);
        let c = transitive_closure(&r);
        assert_eq!(c, rel(3, &[(0, 1), (0, 2), (1, 2)]));
    }

    #[test]
    fn closure_fixpoint_on_transitive() {
        let r = rel(4, &[(0, 1), (0, 2), (1, 2), (3, 3)]);
        assert!(r.is_transitive());
        assert_eq!(transitive_closure(&r), r);
    }

    #[test]
    fn compatible_closure_no_ops_is_identity() {
        let a = FiniteAlgebra::bare_set(3);
        let x = rel(3, &[(0, 2), (1, 0)]);
        assert_eq!(compatible_closure(&a, &x).unwrap(), x);
    }

    #[test]
    fn compatible_closure_in_z2() {
        let a = FiniteAlgebra::cyclic_group(2);
        let x = rel(2, &[(0, 1)]);
        // (0,1)+(0,1) = (0,0); the constant contributes (0,0) as well
        assert_eq!(
            compatible_closure(&a, &x).unwrap(),
            rel(2, &[(0, 0), (0, 1)])
        );
    }

    #[test]
    fn compatible_closure_fixes_congruences() {
        let a = FiniteAlgebra::cyclic_group(4);
        let theta = rel(4, &[(0, 0), (1, 1), (2, 2), (3, 3), (0, 2), (2, 0), (1, 3), (3, 1)]);
        assert_eq!(compatible_closure(&a, &theta).unwrap(), theta);
    }

    #[test]
    fn predicates_on_diagonal() {
        let f = relation_predicates(&BinRelation::diagonal(4), None).unwrap();
        assert!(f.reflexive && f.symmetric && f.transitive);
        assert_eq!(f.compatible, None);
    }

    #[test]
    fn predicates_non_reflexive() {
        let f = relation_predicates(&rel(2, &[(0, 1)]), None).unwrap();
        assert!(!f.reflexive);
    }

    #[test]
    fn predicates_on_z4_congruence() {
        let a = FiniteAlgebra::cyclic_group(4);
        let theta = rel(4, &[(0, 0), (1, 1), (2, 2), (3, 3), (0, 2), (2, 0), (1, 3), (3, 1)]);
        let f = relation_predicates(&theta, Some(&a)).unwrap();
        assert!(f.reflexive && f.symmetric && f.transitive);
        assert_eq!(f.compatible, Some(true));
    }

    #[test]
    fn compose_matches_triple_loop_oracle() {
        let r = rel(5, &[(0, 1), (1, 3), (2, 2), (4, 0), (3, 4)]);
        let s = rel(5, &[(1, 2), (3, 3), (2, 4), (0, 0), (4, 1)]);
        assert_eq!(compose(&r, &s).unwrap(), crate::reference::compose_by_loops(&r, &s));
    }

    #[test]
    fn compatible_reflexive_relations_of_z2() {
        // Z2 group: only the two congruences survive among the 4 reflexive
        // candidates ((0,1) alone forces (1,0) via -; adding both gives ∇).
        let rels = compatible_reflexive_relations(&FiniteAlgebra::cyclic_group(2));
        assert_eq!(rels.len(), 2);
        assert!(rels.contains(&BinRelation::diagonal(2)));
        assert!(rels.contains(&BinRelation::full(2)));
    }

    #[test]
    fn format_round_trip_and_shorthands() {
        let r = rel(4, &[(0, 1), (3, 2), (2, 2)]);
        let text = serialize_relation("r", &r);
        let parsed = parse_relation(&text).unwrap();
        assert_eq!(parsed.name, "r");
        assert_eq!(parsed.relation, r);
        assert_eq!(parse_relation("diag 3").unwrap().relation, BinRelation::diagonal(3));
        assert_eq!(parse_relation("full 2").unwrap().relation, BinRelation::full(2));
        assert!(parse_relation("rel r 2\n0 5\n").is_err());
    }

    fn arb_relation(n: usize) -> impl Strategy<Value = BinRelation> {
        proptest::collection::vec((0..n, 0..n), 0..=n * n)
            .prop_map(move |pairs| BinRelation::from_pairs(n, pairs))
    }

    proptest! {
        #[test]
        fn compose_associative(r in arb_relation(5), s in arb_relation(5), t in arb_relation(5)) {
            let left = compose(&compose(&r, &s).unwrap(), &t).unwrap();
            let right = compose(&r, &compose(&s, &t).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn transitive_closure_is_a_closure(r in arb_relation(6), s in arb_relation(6)) {
            let c = transitive_closure(&r);
            prop_assert!(r.is_subset(&c).unwrap());
            prop_assert_eq!(transitive_closure(&c.clone()), c.clone());
            let bigger = transitive_closure(&r.union(&s).unwrap());
            prop_assert!(c.is_subset(&bigger).unwrap());
        }

        #[test]
        fn alt_power_monotone_when_reflexive(r in arb_relation(4), s in arb_relation(4), m in 1usize..4) {
            let r = r.union(&BinRelation::diagonal(4)).unwrap();
            let s = s.union(&BinRelation::diagonal(4)).unwrap();
            let small = alt_power(&r, &s, m).unwrap();
            let big = alt_power(&r, &s, m + 1).unwrap();
            prop_assert!(small.is_subset(&big).unwrap());
        }

        #[test]
        fn transitive_closure_matches_reachability(r in arb_relation(6)) {
            prop_assert_eq!(transitive_closure(&r), crate::reference::reachability_closure(&r));
        }
    }
}
