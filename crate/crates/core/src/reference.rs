//! Independent reference implementations used as oracles by the test
//! suites. Everything here trades speed for directness: explicit chain
//! enumeration, per-source reachability, subset scans, and full-tuple
//! compatibility checks, deliberately sharing no algorithmic path with the
//! main implementations they cross-check.

use crate::algebra::{increment, FiniteAlgebra};
use crate::relation::BinRelation;
use std::collections::VecDeque;

/// Identity family selector for [`side_by_chain_enumeration`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    X,
    Y,
}

/// Evaluates one side of an identity directly from the witness-chain
/// reading: `(a_0, b_0)` belongs iff chains `a_0..a_m`, `b_0..b_m` exist
/// with `a_i` alpha-linked to `b_i` throughout, the final pair linked by
/// the core relation (delta for X, the off-parity congruence for Y), and
/// consecutive members linked by beta/gamma alternating from beta at the
/// outermost step (gamma first when `swapped`, i.e. on the right side).
pub fn side_by_chain_enumeration(
    family: Family,
    swapped: bool,
    m: usize,
    alpha: &BinRelation,
    beta: &BinRelation,
    gamma: &BinRelation,
    delta: Option<&BinRelation>,
) -> BinRelation {
    let n = alpha.size();
    let (first, second) = if swapped { (gamma, beta) } else { (beta, gamma) };
    let edge = |i: usize| if i % 2 == 0 { first } else { second };
    let core: &BinRelation = match family {
        Family::X => delta.expect("X-family evaluation needs delta"),
        // the core is the complement of the innermost edge relation
        Family::Y => {
            if (m - 1) % 2 == 0 {
                second
            } else {
                first
            }
        }
    };

    // all edge-respecting walks of length m+1, stored flat
    let stride = m + 1;
    let mut walks: Vec<usize> = (0..n).collect();
    let mut len = 1;
    while len <= m {
        let e = edge(len - 1);
        let mut next = Vec::new();
        for w in walks.chunks(len) {
            let last = w[len - 1];
            for t in 0..n {
                if e.contains(last, t) {
                    next.extend_from_slice(w);
                    next.push(t);
                }
            }
        }
        walks = next;
        len += 1;
    }

    let mut out = BinRelation::empty(n);
    let count = walks.len() / stride;
    for ai in 0..count {
        let wa = &walks[ai * stride..(ai + 1) * stride];
        for bi in 0..count {
            let wb = &walks[bi * stride..(bi + 1) * stride];
            if out.contains(wa[0], wb[0]) {
                continue;
            }
            if !core.contains(wa[m], wb[m]) {
                continue;
            }
            if (0..=m).all(|i| alpha.contains(wa[i], wb[i])) {
                out.insert(wa[0], wb[0]);
            }
        }
    }
    out
}

/// Left side of the nested R/S/T inclusion by explicit chain enumeration:
/// `a`-chains walk the `S` relations forward, `b`-chains walk the `T`
/// relations backward (`b_{j} T_j b_{j-1}`), and levels pair up through
/// the `R` relations.
pub fn rst_left_by_chain_enumeration(
    r: &[&BinRelation],
    s: &[&BinRelation],
    t: &[&BinRelation],
) -> BinRelation {
    let m = s.len();
    let n = r[0].size();
    let stride = m + 1;

    let grow = |rels: &[&BinRelation], backward: bool| -> Vec<usize> {
        let mut walks: Vec<usize> = (0..n).collect();
        for (k, rel) in rels.iter().enumerate() {
            let mut next = Vec::new();
            for w in walks.chunks(k + 1) {
                let last = w[k];
                for v in 0..n {
                    let linked = if backward {
                        rel.contains(v, last)
                    } else {
                        rel.contains(last, v)
                    };
                    if linked {
                        next.extend_from_slice(w);
                        next.push(v);
                    }
                }
            }
            walks = next;
        }
        walks
    };

    let a_walks = grow(s, false);
    let b_walks = grow(t, true);
    let mut out = BinRelation::empty(n);
    for wa in a_walks.chunks(stride) {
        for wb in b_walks.chunks(stride) {
            if out.contains(wa[0], wb[0]) {
                continue;
            }
            if (0..=m).all(|i| r[i].contains(wa[i], wb[i])) {
                out.insert(wa[0], wb[0]);
            }
        }
    }
    out
}

/// Transitive closure via per-source breadth-first reachability.
pub fn reachability_closure(r: &BinRelation) -> BinRelation {
    let n = r.size();
    let mut out = BinRelation::empty(n);
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    for s in 0..n {
        seen.iter_mut().for_each(|x| *x = false);
        queue.clear();
        for b in 0..n {
            if r.contains(s, b) && !seen[b] {
                seen[b] = true;
                queue.push_back(b);
            }
        }
        while let Some(u) = queue.pop_front() {
            out.insert(s, u);
            for v in 0..n {
                if r.contains(u, v) && !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    out
}

/// Relational composition with the plain three-loop definition.
pub fn compose_by_loops(r: &BinRelation, s: &BinRelation) -> BinRelation {
    let n = r.size();
    let mut out = BinRelation::empty(n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if r.contains(a, b) && s.contains(b, c) {
                    out.insert(a, c);
                }
            }
        }
    }
    out
}

/// Generated subuniverse as the intersection of every closed subset
/// containing the generators (subset scan; universes up to 16 elements).
pub fn subuniverse_by_intersection(alg: &FiniteAlgebra, gens: &[usize]) -> Vec<usize> {
    let n = alg.size();
    assert!(n <= 16, "subset scan oracle is for small universes");
    let gen_mask: u32 = gens.iter().fold(0, |m, &g| m | 1 << g);
    let mut acc: u32 = (1 << n) - 1;
    for mask in 0..(1u32 << n) {
        if mask & gen_mask == gen_mask && subset_closed(alg, mask) {
            acc &= mask;
        }
    }
    (0..n).filter(|&e| acc >> e & 1 == 1).collect()
}

fn subset_closed(alg: &FiniteAlgebra, mask: u32) -> bool {
    let n = alg.size();
    let elems: Vec<usize> = (0..n).filter(|&e| mask >> e & 1 == 1).collect();
    for op in alg.ops() {
        if op.arity == 0 {
            if mask >> op.table[0] & 1 == 0 {
                return false;
            }
            continue;
        }
        if elems.is_empty() {
            continue;
        }
        let mut idx = vec![0usize; op.arity];
        let mut args = vec![0usize; op.arity];
        loop {
            for (i, &j) in idx.iter().enumerate() {
                args[i] = elems[j];
            }
            if mask >> op.apply(&args, n) & 1 == 0 {
                return false;
            }
            if !increment(&mut idx, elems.len()) {
                break;
            }
        }
    }
    true
}

/// All congruences as canonical partitions, generated by a route disjoint
/// from the partition-scan implementation: reflexive-symmetric bit masks
/// over unordered pairs, a naive triple-loop transitivity filter, and a
/// full-tuple compatibility check (all argument tuples, not one coordinate
/// at a time).
pub fn congruences_by_relation_scan(alg: &FiniteAlgebra) -> Vec<Vec<usize>> {
    let n = alg.size();
    let pair_index: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    assert!(pair_index.len() <= 20, "relation scan oracle is for small universes");
    let mut out = Vec::new();
    for mask in 0u32..(1 << pair_index.len()) {
        let mut r = BinRelation::diagonal(n);
        for (k, &(i, j)) in pair_index.iter().enumerate() {
            if mask >> k & 1 == 1 {
                r.insert(i, j);
                r.insert(j, i);
            }
        }
        if !naive_transitive(&r) || !full_tuple_compatible(alg, &r) {
            continue;
        }
        out.push(partition_of(&r));
    }
    out.sort();
    out
}

fn naive_transitive(r: &BinRelation) -> bool {
    let n = r.size();
    for a in 0..n {
        for b in 0..n {
            if r.contains(a, b) {
                for c in 0..n {
                    if r.contains(b, c) && !r.contains(a, c) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

fn full_tuple_compatible(alg: &FiniteAlgebra, r: &BinRelation) -> bool {
    let n = alg.size();
    for op in alg.ops() {
        if op.arity == 0 {
            continue;
        }
        let count = n.pow(op.arity as u32);
        let mut u = vec![0usize; op.arity];
        for _ in 0..count {
            let mut v = vec![0usize; op.arity];
            for _ in 0..count {
                if u.iter().zip(&v).all(|(&x, &y)| r.contains(x, y))
                    && !r.contains(op.apply(&u, n), op.apply(&v, n))
                {
                    return false;
                }
                if !increment(&mut v, n) {
                    break;
                }
            }
            if !increment(&mut u, n) {
                break;
            }
        }
    }
    true
}

fn partition_of(r: &BinRelation) -> Vec<usize> {
    let n = r.size();
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
    partition
}

/// Number of isomorphism classes by explicit orbit partitioning: every
/// operation-table tuple is mapped under every universe permutation and
/// orbits are collected in a set.
pub fn iso_class_count(size: usize, ops: &[(String, usize)], tables: &[FiniteAlgebra]) -> usize {
    use std::collections::BTreeSet;
    let perms = permutations(size);
    let mut canon_forms = BTreeSet::new();
    for alg in tables {
        let mut orbit_min: Option<Vec<Vec<usize>>> = None;
        for perm in &perms {
            let image: Vec<Vec<usize>> = ops
                .iter()
                .map(|(sym, _)| permuted_table(alg, sym, perm))
                .collect();
            if orbit_min.as_ref().map_or(true, |m| image < *m) {
                orbit_min = Some(image);
            }
        }
        canon_forms.insert(orbit_min.unwrap());
    }
    canon_forms.len()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..n).collect();
    heap_permute(&mut items, n, &mut out);
    out
}

fn heap_permute(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(items.clone());
        return;
    }
    for i in 0..k {
        heap_permute(items, k - 1, out);
        if k % 2 == 0 {
            items.swap(i, k - 1);
        } else {
            items.swap(0, k - 1);
        }
    }
}

/// The table of `sym` after relabeling the universe by `perm`:
/// `f'(σa, σb) = σ f(a, b)` rewritten as a plain table.
fn permuted_table(alg: &FiniteAlgebra, sym: &str, perm: &[usize]) -> Vec<usize> {
    let n = alg.size();
    let op = alg.op(sym).unwrap();
    let mut inv = vec![0usize; n];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    let count = n.pow(op.arity as u32);
    let mut table = vec![0usize; count];
    let mut args = vec![0usize; op.arity];
    let mut pre = vec![0usize; op.arity];
    for slot in table.iter_mut() {
        for (i, &a) in args.iter().enumerate() {
            pre[i] = inv[a];
        }
        *slot = perm[op.apply(&pre, n)];
        increment(&mut args, n);
    }
    table
}
