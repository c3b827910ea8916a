//! Acceptance suite: one test per criterion, each printing a pass line
//! with its runtime (visible under `--nocapture`) and asserting the stated
//! time budget. Run with:
//!
//! ```text
//! cargo test -p conlab-core --test acceptance -- --nocapture
//! ```

use conlab_core::algebra::FiniteAlgebra;
use conlab_core::congruence::{enumerate_con, is_m_permutable, Congruence};
use conlab_core::harness::{
    enumerate_algebras, probe_abh_vs_xmstar, square_subalgebras_permutable, SignatureSpec,
};
use conlab_core::identities::{
    check_abh, check_identity, extract_witness, h_from_m, IdentityInstance, Mode, Side,
};
use conlab_core::malcev::{
    construct_witnesses_rst, construct_witnesses_xm, hm_search, hm_verify, HmChain, HmOutcome,
    DEFAULT_FREE_CAP, DEFAULT_MAX_M,
};
use conlab_core::reference;
use conlab_core::relation::{
    compatible_reflexive_relations, transitive_closure, BinRelation,
};
use conlab_core::rst::{extract_left_witness, rst_check, rst_derived, RstInstance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::time::{Duration, Instant};

fn pass(criterion: &str, started: Instant, budget: Duration, detail: &str) {
    let elapsed = started.elapsed();
    println!(
        "acceptance {criterion}: PASS in {:.2}s (budget {:.0}s) — {detail}",
        elapsed.as_secs_f64(),
        budget.as_secs_f64()
    );
    assert!(
        elapsed < budget,
        "{criterion} exceeded its time budget: {elapsed:?} >= {budget:?}"
    );
}

/// Isomorphism-class representatives of the one-binary-operation algebras
/// on universes of size 1, 2 and 3.
fn groupoid_pool() -> Vec<FiniteAlgebra> {
    let mut pool = Vec::new();
    for n in 1..=3 {
        let spec = SignatureSpec::new(n, vec![("f".into(), 2)]);
        pool.extend(enumerate_algebras(&spec, usize::MAX, true));
    }
    pool
}

fn found_chain(alg: &FiniteAlgebra) -> HmChain {
    match hm_search(alg, DEFAULT_MAX_M, DEFAULT_FREE_CAP).unwrap() {
        HmOutcome::Found(c) => c,
        other => panic!("expected a chain for {}, got {other:?}", alg.name()),
    }
}

#[test]
fn criterion_1_h_formula() {
    let t = Instant::now();
    assert_eq!(h_from_m(3).unwrap(), 5);
    assert_eq!(h_from_m(4).unwrap(), 7);
    assert_eq!(h_from_m(5).unwrap(), 14);
    pass(
        "1 (h formula)",
        t,
        Duration::from_secs(5),
        "h(3)=5, h(4)=7, h(5)=14",
    );
}

#[test]
fn criterion_2_chain_search_on_cyclic_groups() {
    for n in [2usize, 4] {
        let t = Instant::now();
        let alg = FiniteAlgebra::cyclic_group(n);
        let chain = found_chain(&alg);
        assert_eq!(chain.m(), 2, "Z{n} should have a 3-term chain");
        assert!(hm_verify(&alg, &chain).unwrap().is_valid());
        match hm_search(&alg, 1, DEFAULT_FREE_CAP).unwrap() {
            HmOutcome::NotFound { max_m: 1, shortest } => assert_eq!(shortest, Some(2)),
            other => panic!("expected NotFound at max_m = 1, got {other:?}"),
        }
        pass(
            &format!("2 (chain search, Z{n})"),
            t,
            Duration::from_secs(5),
            "m = 2 found, certificate verified, NotFound at max_m = 1",
        );
    }
}

#[test]
fn criterion_3_x3_witness_replay_on_z4() {
    let t = Instant::now();
    let alg = FiniteAlgebra::cyclic_group(4);
    let con = enumerate_con(&alg).unwrap();
    assert_eq!(con.len(), 3);
    let chain = found_chain(&alg).extended_to(3);
    assert!(hm_verify(&alg, &chain).unwrap().is_valid());

    let mut tuples = 0usize;
    let mut pairs_replayed = 0usize;
    for alpha in &con {
        for beta in &con {
            for gamma in &con {
                for delta in &con {
                    tuples += 1;
                    let inst = IdentityInstance::x(
                        &alg,
                        3,
                        Mode::Strict,
                        false,
                        alpha.relation().clone(),
                        beta.relation().clone(),
                        gamma.relation().clone(),
                        delta.relation().clone(),
                    )
                    .unwrap();
                    let left = inst.eval_side(Side::Left);
                    for pair in left.pairs() {
                        let witness = extract_witness(&inst, Side::Left, pair).unwrap();
                        let right = construct_witnesses_xm(&alg, &chain, &inst, &witness).unwrap();
                        right.validate(&inst, Side::Right).unwrap();
                        pairs_replayed += 1;
                    }
                }
            }
        }
    }
    assert_eq!(tuples, 81);
    assert!(pairs_replayed > 0);
    pass(
        "3 (X3 replay on Z4)",
        t,
        Duration::from_secs(60),
        &format!("{tuples} tuples, {pairs_replayed} pairs transported and validated"),
    );
}

fn random_relation(rng: &mut ChaCha8Rng, n: usize, reflexive: bool) -> BinRelation {
    let mut r = if reflexive {
        BinRelation::diagonal(n)
    } else {
        BinRelation::empty(n)
    };
    for a in 0..n {
        for b in 0..n {
            if rng.gen_bool(0.4) {
                r.insert(a, b);
            }
        }
    }
    r
}

#[test]
fn criterion_4_rst_replay_on_z2() {
    let t = Instant::now();
    let alg = FiniteAlgebra::cyclic_group(2);
    let chain = found_chain(&alg);
    assert_eq!(chain.m(), 2);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);

    let mut inclusions = 0usize;
    let mut pairs_replayed = 0usize;
    for _ in 0..100 {
        let r: Vec<BinRelation> = (0..3).map(|_| random_relation(&mut rng, 2, false)).collect();
        let s: Vec<BinRelation> = (0..2).map(|_| random_relation(&mut rng, 2, true)).collect();
        let tt: Vec<BinRelation> = (0..2).map(|_| random_relation(&mut rng, 2, true)).collect();
        let inst = RstInstance::new(r, s, tt).unwrap();
        let verdict = rst_check(&alg, &inst).unwrap();
        assert!(
            verdict.holds(),
            "inclusion must hold over a 2-permutable base"
        );
        inclusions += 1;
        let derived = rst_derived(&alg, &inst).unwrap();
        for pair in verdict.left.pairs() {
            let left = extract_left_witness(&inst, pair).unwrap();
            let right = construct_witnesses_rst(&alg, &chain, &inst, &left).unwrap();
            right.validate_right(&inst, &derived).unwrap();
            pairs_replayed += 1;
        }
    }

    // the substitution into the nested-inclusion shape reproduces the
    // bracket identity's sides bit-exactly
    let con = enumerate_con(&alg).unwrap();
    let mut specializations = 0usize;
    for alpha in &con {
        for beta in &con {
            for gamma in &con {
                for delta in &con {
                    for m in 2..=3 {
                        let inst = IdentityInstance::x(
                            &alg,
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
                        let derived = rst_derived(&alg, &rst).unwrap();
                        assert_eq!(
                            conlab_core::rst::eval_left(&rst),
                            inst.eval_side(Side::Left)
                        );
                        assert_eq!(
                            conlab_core::rst::eval_right(&rst, &derived),
                            inst.eval_side(Side::Right)
                        );
                        specializations += 1;
                    }
                }
            }
        }
    }
    pass(
        "4 (nested-inclusion replay on Z2)",
        t,
        Duration::from_secs(30),
        &format!(
            "{inclusions} random inclusions held, {pairs_replayed} pairs transported, {specializations} specializations bit-exact"
        ),
    );
}

#[test]
fn criterion_5_oracle_equivalences() {
    let t = Instant::now();

    // (a) evaluator vs chain enumeration over the full groupoid pool
    let pool = groupoid_pool();
    assert_eq!(pool.len(), 1 + 10 + 3330);
    let discrepancies: usize = pool
        .par_iter()
        .map(|alg| {
            let con = enumerate_con(alg).unwrap();
            let mut bad = 0usize;
            for alpha in &con {
                for beta in &con {
                    for gamma in &con {
                        for delta in &con {
                            for m in 1..=3 {
                                let inst = IdentityInstance::x(
                                    alg,
                                    m,
                                    Mode::Strict,
                                    false,
                                    alpha.relation().clone(),
                                    beta.relation().clone(),
                                    gamma.relation().clone(),
                                    delta.relation().clone(),
                                )
                                .unwrap();
                                for (side, swapped) in
                                    [(Side::Left, false), (Side::Right, true)]
                                {
                                    let dp = inst.eval_side(side);
                                    let oracle = reference::side_by_chain_enumeration(
                                        reference::Family::X,
                                        swapped,
                                        m,
                                        alpha.relation(),
                                        beta.relation(),
                                        gamma.relation(),
                                        Some(delta.relation()),
                                    );
                                    if dp != oracle {
                                        bad += 1;
                                    }
                                }
                            }
                        }
                    }
                }
            }
            bad
        })
        .sum();
    assert_eq!(discrepancies, 0, "evaluator disagreed with chain enumeration");
    let part_a = t.elapsed();

    // (b) congruence enumeration vs the relation-scan oracle at n ≤ 5
    let mut con_pool: Vec<FiniteAlgebra> = Vec::new();
    for n in 1..=5 {
        con_pool.push(FiniteAlgebra::bare_set(n));
        con_pool.push(FiniteAlgebra::cyclic_group(n));
        con_pool.push(FiniteAlgebra::chain_lattice(n));
    }
    con_pool.push(FiniteAlgebra::klein_group());
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
    for _ in 0..30 {
        let n = rng.gen_range(4..=5);
        let spec = SignatureSpec::new(n, vec![("f".into(), 2)]);
        let skip = rng.gen_range(0..5000usize);
        let mut stream = enumerate_algebras(&spec, usize::MAX, false).skip(skip);
        con_pool.push(stream.next().unwrap());
    }
    let con_mismatch: usize = con_pool
        .par_iter()
        .map(|alg| {
            let enumerated: Vec<Vec<usize>> = enumerate_con(alg)
                .unwrap()
                .iter()
                .map(|c| c.partition().to_vec())
                .collect();
            let mut sorted = enumerated.clone();
            sorted.sort();
            let scanned = reference::congruences_by_relation_scan(alg);
            usize::from(sorted != scanned)
        })
        .sum();
    assert_eq!(con_mismatch, 0, "enumeration disagreed with relation scan");
    let part_b = t.elapsed() - part_a;

    // (c) transitive closure vs reachability on 200 seeded random relations
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0006);
    for i in 0..200 {
        let n = 3 + i % 6;
        let r = random_relation(&mut rng, n, false);
        assert_eq!(
            transitive_closure(&r),
            reference::reachability_closure(&r),
            "closure mismatch on seeded relation {i}"
        );
    }

    pass(
        "5 (oracle equivalences)",
        t,
        Duration::from_secs(600),
        &format!(
            "a: {} algebras vs chain oracle in {:.1}s; b: {} algebras vs relation scan in {:.1}s; c: 200 closures",
            pool.len(),
            part_a.as_secs_f64(),
            con_pool.len(),
            part_b.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_6_implication_suite() {
    let t = Instant::now();
    let pool = groupoid_pool();

    let violations: usize = pool
        .par_iter()
        .map(|alg| {
            let n = alg.size();
            let con = enumerate_con(alg).unwrap();
            let mut bad = 0usize;

            // X with delta = bottom evaluates side-for-side equal to the
            // one-bracket-down Y weakening, so the verdicts coincide
            let bottom = Congruence::bottom(n);
            for alpha in &con {
                for beta in &con {
                    for gamma in &con {
                        for m in 2..=3usize {
                            for starred in [false, true] {
                                let x = IdentityInstance::x(
                                    alg,
                                    m,
                                    Mode::Strict,
                                    starred,
                                    alpha.relation().clone(),
                                    beta.relation().clone(),
                                    gamma.relation().clone(),
                                    bottom.relation().clone(),
                                )
                                .unwrap();
                                let y = x.y_weakening(alg).unwrap();
                                if x.eval_side(Side::Left) != y.eval_side(Side::Left)
                                    || x.eval_side(Side::Right) != y.eval_side(Side::Right)
                                    || check_identity(&x).holds() != check_identity(&y).holds()
                                {
                                    bad += 1;
                                }
                            }
                        }
                    }
                }
            }

            // quantified over all congruence choices, the starred inclusion
            // form and the starred two-sided form agree; instance-wise the
            // two-sided form implies the inclusion form
            for m in 2..=3usize {
                let mut all_inclusion = true;
                let mut all_two_sided = true;
                for alpha in &con {
                    for beta in &con {
                        for gamma in &con {
                            for delta in &con {
                                let inst = IdentityInstance::x(
                                    alg,
                                    m,
                                    Mode::Strict,
                                    true,
                                    alpha.relation().clone(),
                                    beta.relation().clone(),
                                    gamma.relation().clone(),
                                    delta.relation().clone(),
                                )
                                .unwrap();
                                let left = inst.eval_side(Side::Left);
                                let right = inst.eval_side(Side::Right);
                                let inclusion =
                                    left.is_subset(&transitive_closure(&right)).unwrap();
                                let two_sided =
                                    transitive_closure(&left) == transitive_closure(&right);
                                assert_eq!(
                                    check_identity(&inst).holds(),
                                    inclusion,
                                    "starred verdict must be the inclusion form"
                                );
                                if two_sided && !inclusion {
                                    bad += 1;
                                }
                                all_inclusion &= inclusion;
                                all_two_sided &= two_sided;
                            }
                        }
                    }
                }
                if all_inclusion != all_two_sided {
                    bad += 1;
                }
            }

            // permutability is monotone in the number of factors
            for m in 2..=3usize {
                if is_m_permutable(alg, m).unwrap().permutable()
                    && !is_m_permutable(alg, m + 1).unwrap().permutable()
                {
                    bad += 1;
                }
            }
            bad
        })
        .sum();

    assert_eq!(violations, 0);
    pass(
        "6 (implication suite)",
        t,
        Duration::from_secs(600),
        &format!("{} algebras, zero violations", pool.len()),
    );
}

#[test]
fn criterion_7_square_subalgebra_spot_check() {
    let t = Instant::now();
    let spec = SignatureSpec::new(2, vec![("f".into(), 2)]);
    let mut qualifying = 0usize;
    let mut violations = 0usize;
    let mut instances = 0usize;
    for alg in enumerate_algebras(&spec, usize::MAX, true) {
        let hypothesis = square_subalgebras_permutable(&alg, 3, 4, 8).unwrap();
        if !hypothesis.all_permutable() {
            continue;
        }
        qualifying += 1;
        let con = enumerate_con(&alg).unwrap();
        let alphas = compatible_reflexive_relations(&alg);
        for alpha in &alphas {
            for beta in &con {
                for gamma in &con {
                    for delta_mask in 0..16u32 {
                        let mut delta = BinRelation::empty(2);
                        for (bit, (a, b)) in
                            [(0, 0), (0, 1), (1, 0), (1, 1)].iter().copied().enumerate()
                        {
                            if delta_mask >> bit & 1 == 1 {
                                delta.insert(a, b);
                            }
                        }
                        let inst = IdentityInstance::x(
                            &alg,
                            3,
                            Mode::Generalized,
                            false,
                            alpha.clone(),
                            beta.relation().clone(),
                            gamma.relation().clone(),
                            delta,
                        )
                        .unwrap();
                        instances += 1;
                        if !check_identity(&inst).holds() {
                            violations += 1;
                        }
                    }
                }
            }
        }
    }
    assert!(qualifying > 0, "the pool must contain qualifying algebras");
    assert_eq!(violations, 0);
    pass(
        "7 (square-subalgebra spot check)",
        t,
        Duration::from_secs(300),
        &format!("{qualifying} qualifying algebras, {instances} generalized instances, zero violations"),
    );
}

#[test]
fn criterion_8_probe_on_two_element_pool() {
    let t = Instant::now();
    let spec = SignatureSpec::new(2, vec![("f".into(), 2)]);
    let pool: Vec<FiniteAlgebra> = enumerate_algebras(&spec, usize::MAX, true).collect();
    assert_eq!(pool.len(), 10);
    let report = probe_abh_vs_xmstar(pool, 5, 3, 8);
    assert_eq!(report.skipped, 0, "zero inconclusive algebras required");
    assert_eq!(report.records.len(), 10);

    // full replay: rebuild every algebra from its stored text and reproduce
    // the recorded counts bit-exactly
    for record in &report.records {
        assert!(!record.skipped);
        let alg = conlab_core::algebra::parse_algebra(&record.algebra).unwrap();
        let con = enumerate_con(&alg).unwrap();
        assert_eq!(con.len(), record.con_size);
        let mut abh_holds = 0usize;
        let mut abh_instances = 0usize;
        for alpha in &con {
            for beta in &con {
                for gamma in &con {
                    abh_instances += 1;
                    if check_abh(&alg, alpha, beta, gamma, 5).unwrap().holds() {
                        abh_holds += 1;
                    }
                }
            }
        }
        assert_eq!(abh_instances, record.abh_instances);
        assert_eq!(abh_holds, record.abh_holds);
        let mut xm_holds = 0usize;
        let mut xm_instances = 0usize;
        for alpha in &con {
            for beta in &con {
                for gamma in &con {
                    for delta in &con {
                        xm_instances += 1;
                        let inst = IdentityInstance::x(
                            &alg,
                            3,
                            Mode::Strict,
                            true,
                            alpha.relation().clone(),
                            beta.relation().clone(),
                            gamma.relation().clone(),
                            delta.relation().clone(),
                        )
                        .unwrap();
                        if check_identity(&inst).holds() {
                            xm_holds += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(xm_instances, record.xmstar_instances);
        assert_eq!(xm_holds, record.xmstar_holds);
    }
    pass(
        "8 (evidence probe)",
        t,
        Duration::from_secs(300),
        &format!(
            "10 records, 0 skipped, {} flagged, replay reproduced all counts",
            report.flagged_count
        ),
    );
}
