//! Batch machinery: deterministic enumeration of small algebras over a
//! signature (with optional isomorphism rejection), permutability checks
//! over subalgebras of the square, and the evidence probe comparing the
//! alpha-beta-h identity against the starred X-family identity.

use crate::algebra::{increment, serialize_algebra, AlgebraError, FiniteAlgebra, OperationTable};
use crate::congruence::{
    enumerate_con_capped, is_m_permutable_capped, CongruenceError, PermutabilityViolation,
};
use crate::identities::{check_identity, IdentityInstance, Mode};
use crate::malcev::{hm_search, HmOutcome, DEFAULT_FREE_CAP, DEFAULT_MAX_M};
use crate::relation::serialize_relation;
use crate::textio::{ParseError, Scanner};
use itertools::Itertools;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use thiserror::Error;

/// Every probe output is tagged with this scope note: the computations are
/// per finite algebra and decide nothing about whole varieties.
pub const SCOPE_NOTE: &str =
    "finite-algebra-level evidence only; no variety-level claim is made";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Congruence(#[from] CongruenceError),
}

/// An operation signature plus universe size; the enumeration space for
/// [`enumerate_algebras`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignatureSpec {
    pub size: usize,
    pub ops: Vec<(String, usize)>,
}

impl SignatureSpec {
    pub fn new(size: usize, ops: Vec<(String, usize)>) -> SignatureSpec {
        assert!(size >= 1);
        SignatureSpec { size, ops }
    }

    fn table_lens(&self) -> Vec<usize> {
        self.ops
            .iter()
            .map(|(_, arity)| self.size.pow(*arity as u32))
            .collect()
    }
}

/// Parse `signature` / `size <n>` / `op <symbol> <arity>` lines.
pub fn parse_signature(input: &str) -> Result<SignatureSpec, ParseError> {
    let mut sc = Scanner::new(input);
    sc.expect_word("signature")?;
    sc.expect_word("size")?;
    let size = sc.expect_usize("universe size")?;
    if size == 0 {
        return Err(ParseError::new(sc.line(), "size must be at least 1"));
    }
    let mut ops = Vec::new();
    while !sc.at_end() {
        sc.expect_word("op")?;
        let (_, symbol) = sc.expect_token("operation symbol")?;
        let arity = sc.expect_usize("arity")?;
        ops.push((symbol.to_string(), arity));
    }
    Ok(SignatureSpec::new(size, ops))
}

pub fn serialize_signature(spec: &SignatureSpec) -> String {
    let mut out = String::from("signature\n");
    writeln!(out, "size {}", spec.size).unwrap();
    for (sym, arity) in &spec.ops {
        writeln!(out, "op {sym} {arity}").unwrap();
    }
    out
}

/// Deterministic stream over all operation-table assignments for a
/// signature, in lexicographic order of the concatenated tables (first
/// entry most significant). With `canonical_only`, an algebra is yielded
/// only when its table tuple is the lexicographic minimum of its orbit
/// under universe permutations, so exactly one representative per
/// isomorphism class survives.
pub struct AlgebraStream {
    spec: SignatureSpec,
    digits: Option<Vec<usize>>,
    index: usize,
    canonical_only: bool,
    remaining: usize,
}

impl Iterator for AlgebraStream {
    type Item = FiniteAlgebra;

    fn next(&mut self) -> Option<FiniteAlgebra> {
        while self.remaining > 0 {
            let digits = self.digits.as_ref()?;
            let keep = !self.canonical_only || is_canonical(&self.spec, digits);
            let item = if keep {
                Some(build_algebra(&self.spec, digits, self.index))
            } else {
                None
            };
            let mut next_digits = self.digits.take().unwrap();
            if increment(&mut next_digits, self.spec.size) {
                self.digits = Some(next_digits);
            }
            self.index += 1;
            if let Some(alg) = item {
                self.remaining -= 1;
                return Some(alg);
            }
        }
        None
    }
}

/// Enumerates up to `limit` algebras over the signature; see
/// [`AlgebraStream`] for ordering and the isomorphism filter.
pub fn enumerate_algebras(
    spec: &SignatureSpec,
    limit: usize,
    canonical_only: bool,
) -> AlgebraStream {
    AlgebraStream {
        spec: spec.clone(),
        digits: Some(vec![0; spec.table_lens().iter().sum()]),
        index: 0,
        canonical_only,
        remaining: limit,
    }
}

fn build_algebra(spec: &SignatureSpec, digits: &[usize], index: usize) -> FiniteAlgebra {
    let mut ops = Vec::with_capacity(spec.ops.len());
    let mut offset = 0;
    for ((sym, arity), len) in spec.ops.iter().zip(spec.table_lens()) {
        ops.push(OperationTable {
            symbol: sym.clone(),
            arity: *arity,
            table: digits[offset..offset + len].to_vec(),
        });
        offset += len;
    }
    FiniteAlgebra::new(format!("a{index}"), spec.size, ops)
        .expect("enumerated digits are valid tables")
}

/// Whether the concatenated tables are the minimum over all relabelings
/// `f'(σa…) = σ f(a…)` of the universe.
fn is_canonical(spec: &SignatureSpec, digits: &[usize]) -> bool {
    let n = spec.size;
    let lens = spec.table_lens();
    let mut image = vec![0usize; digits.len()];
    for perm in (0..n).permutations(n) {
        let mut inv = vec![0usize; n];
        for (i, &p) in perm.iter().enumerate() {
            inv[p] = i;
        }
        let mut offset = 0;
        for ((_, arity), len) in spec.ops.iter().zip(&lens) {
            let table = &digits[offset..offset + len];
            let k = *arity;
            let mut args = vec![0usize; k];
            for slot in 0..*len {
                // argument tuple of `slot`, pulled back through the permutation
                let mut rest = slot;
                for i in (0..k).rev() {
                    args[i] = inv[rest % n];
                    rest /= n;
                }
                let pre = OperationTable::index(&args, n);
                image[offset + slot] = perm[table[pre]];
            }
            offset += len;
        }
        if image.as_slice() < digits {
            return false;
        }
    }
    true
}

/// Result of checking permutability across a family of subalgebras of the
/// square.
#[derive(Debug, Clone)]
pub struct SquareCheck {
    pub subalgebras_checked: usize,
    pub violation: Option<(Vec<usize>, PermutabilityViolation)>,
}

impl SquareCheck {
    pub fn all_permutable(&self) -> bool {
        self.violation.is_none()
    }
}

/// Checks that every subalgebra of `A²` generated by at most
/// `max_generators` elements is m-permutable. Distinct generated
/// subuniverses are deduplicated before their congruence lattices are
/// enumerated.
pub fn square_subalgebras_permutable(
    alg: &FiniteAlgebra,
    m: usize,
    max_generators: usize,
    con_cap: usize,
) -> Result<SquareCheck, HarnessError> {
    let square = alg.direct_power(2)?;
    let mut seen = std::collections::BTreeSet::new();
    let mut checked = 0;
    for k in 1..=max_generators.min(square.size()) {
        for gens in (0..square.size()).combinations(k) {
            let sub = square.subuniverse_generate(&gens)?;
            if !seen.insert(sub.clone()) {
                continue;
            }
            checked += 1;
            let induced = square.induced_subalgebra(&sub)?;
            let out = is_m_permutable_capped(&induced, m, con_cap)?;
            if let Some(v) = out.violation {
                return Ok(SquareCheck {
                    subalgebras_checked: checked,
                    violation: Some((sub, v)),
                });
            }
        }
    }
    Ok(SquareCheck {
        subalgebras_checked: checked,
        violation: None,
    })
}

/// Checks that every congruence of `A`, viewed as a subalgebra of `A²` on
/// its pair set, is m-permutable.
pub fn congruence_subalgebras_permutable(
    alg: &FiniteAlgebra,
    m: usize,
    con_cap: usize,
) -> Result<SquareCheck, HarnessError> {
    let square = alg.direct_power(2)?;
    let n = alg.size();
    let con = enumerate_con_capped(alg, con_cap)?;
    let mut checked = 0;
    for theta in &con {
        let sub: Vec<usize> = theta
            .relation()
            .pairs()
            .iter()
            .map(|&(a, b)| a * n + b)
            .collect();
        checked += 1;
        let induced = square.induced_subalgebra(&sub)?;
        let out = is_m_permutable_capped(&induced, m, con_cap)?;
        if let Some(v) = out.violation {
            return Ok(SquareCheck {
                subalgebras_checked: checked,
                violation: Some((sub, v)),
            });
        }
    }
    Ok(SquareCheck {
        subalgebras_checked: checked,
        violation: None,
    })
}

/// Summary of the chain search for one algebra.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(tag = "kind")]
pub enum HmSummary {
    Found { m: usize },
    NotFound { max_m: usize },
    Inconclusive { discovered: usize },
}

/// A replayable failure certificate: the serialized relations and the pair
/// that lies in the left side but not the closed right side.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct FlagCertificate {
    pub alpha: String,
    pub beta: String,
    pub gamma: String,
    pub delta: String,
    pub pair: (usize, usize),
}

/// Per-algebra probe record; `algebra` holds the full replayable text.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct AlgebraRecord {
    pub index: usize,
    pub name: String,
    pub hash: String,
    pub algebra: String,
    pub skipped: bool,
    pub con_size: usize,
    pub hm: HmSummary,
    pub abh_instances: usize,
    pub abh_holds: usize,
    pub xmstar_instances: usize,
    pub xmstar_holds: usize,
    pub flagged: bool,
    pub certificate: Option<FlagCertificate>,
}

/// Pool-level probe report. `contingency[i][j]` counts algebras with
/// (all-abh-hold = i, all-xmstar-hold = j).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchReport {
    pub h: usize,
    pub m: usize,
    pub scope: String,
    pub records: Vec<AlgebraRecord>,
    pub skipped: usize,
    pub contingency: [[usize; 2]; 2],
    pub flagged_count: usize,
}

/// For each algebra in the pool, tests the alpha-beta-h identity over all
/// congruence triples at the given `h`, and the starred X-family identity
/// over all congruence 4-tuples at the given `m`. An algebra is flagged
/// when every abh instance holds but some starred instance fails; flags
/// are finite-algebra-level evidence only.
pub fn probe_abh_vs_xmstar(
    pool: impl IntoIterator<Item = FiniteAlgebra>,
    h: usize,
    m: usize,
    con_cap: usize,
) -> SearchReport {
    let mut records = Vec::new();
    let mut contingency = [[0usize; 2]; 2];
    let mut skipped = 0;
    let mut flagged_count = 0;
    for (index, alg) in pool.into_iter().enumerate() {
        let text = serialize_algebra(&alg);
        let hash = short_hash(&text);
        let con = match enumerate_con_capped(&alg, con_cap) {
            Ok(c) => c,
            Err(_) => {
                skipped += 1;
                records.push(AlgebraRecord {
                    index,
                    name: alg.name().to_string(),
                    hash,
                    algebra: text,
                    skipped: true,
                    con_size: 0,
                    hm: HmSummary::Inconclusive { discovered: 0 },
                    abh_instances: 0,
                    abh_holds: 0,
                    xmstar_instances: 0,
                    xmstar_holds: 0,
                    flagged: false,
                    certificate: None,
                });
                continue;
            }
        };
        let hm = match hm_search(&alg, DEFAULT_MAX_M, DEFAULT_FREE_CAP) {
            Ok(HmOutcome::Found(chain)) => HmSummary::Found { m: chain.m() },
            Ok(HmOutcome::NotFound { max_m, .. }) => HmSummary::NotFound { max_m },
            Ok(HmOutcome::Inconclusive { discovered, .. }) => {
                HmSummary::Inconclusive { discovered }
            }
            Err(_) => HmSummary::Inconclusive { discovered: 0 },
        };

        let mut abh_instances = 0;
        let mut abh_holds = 0;
        for alpha in &con {
            for beta in &con {
                for gamma in &con {
                    abh_instances += 1;
                    if crate::identities::check_abh(&alg, alpha, beta, gamma, h)
                        .map(|o| o.holds())
                        .unwrap_or(false)
                    {
                        abh_holds += 1;
                    }
                }
            }
        }

        let mut xmstar_instances = 0;
        let mut xmstar_holds = 0;
        let mut certificate = None;
        for alpha in &con {
            for beta in &con {
                for gamma in &con {
                    for delta in &con {
                        xmstar_instances += 1;
                        let inst = IdentityInstance::x(
                            &alg,
                            m,
                            Mode::Strict,
                            true,
                            alpha.relation().clone(),
                            beta.relation().clone(),
                            gamma.relation().clone(),
                            delta.relation().clone(),
                        )
                        .expect("congruences form valid strict instances");
                        let verdict = check_identity(&inst);
                        if verdict.holds() {
                            xmstar_holds += 1;
                        } else if certificate.is_none() {
                            if let crate::identities::IdentityVerdict::Fails { pair, .. } = &verdict
                            {
                                certificate = Some(FlagCertificate {
                                    alpha: serialize_relation("alpha", alpha.relation()),
                                    beta: serialize_relation("beta", beta.relation()),
                                    gamma: serialize_relation("gamma", gamma.relation()),
                                    delta: serialize_relation("delta", delta.relation()),
                                    pair: *pair,
                                });
                            }
                        }
                    }
                }
            }
        }

        let abh_all = abh_holds == abh_instances;
        let xmstar_all = xmstar_holds == xmstar_instances;
        contingency[abh_all as usize][xmstar_all as usize] += 1;
        let flagged = abh_all && !xmstar_all;
        if flagged {
            flagged_count += 1;
        }
        records.push(AlgebraRecord {
            index,
            name: alg.name().to_string(),
            hash,
            algebra: text,
            skipped: false,
            con_size: con.len(),
            hm,
            abh_instances,
            abh_holds,
            xmstar_instances,
            xmstar_holds,
            flagged,
            certificate: if flagged { certificate } else { None },
        });
    }
    SearchReport {
        h,
        m,
        scope: SCOPE_NOTE.to_string(),
        records,
        skipped,
        contingency,
        flagged_count,
    }
}

fn short_hash(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    let digest = hasher.finalize();
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

impl SearchReport {
    /// Human-readable summary block.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        writeln!(out, "probe: h = {}, m = {} ({})", self.h, self.m, self.scope).unwrap();
        writeln!(
            out,
            "algebras: {} total, {} skipped, {} flagged",
            self.records.len(),
            self.skipped,
            self.flagged_count
        )
        .unwrap();
        writeln!(
            out,
            "contingency (abh-all x xmstar-all): both {}, abh-only {}, xmstar-only {}, neither {}",
            self.contingency[1][1],
            self.contingency[1][0],
            self.contingency[0][1],
            self.contingency[0][0]
        )
        .unwrap();
        for r in self.records.iter().filter(|r| r.flagged) {
            writeln!(
                out,
                "flagged: index {} hash {} (abh {}/{}, xmstar {}/{})",
                r.index, r.hash, r.abh_holds, r.abh_instances, r.xmstar_holds, r.xmstar_instances
            )
            .unwrap();
        }
        out
    }
}
