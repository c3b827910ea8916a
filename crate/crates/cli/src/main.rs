//! Command-line front end: parse algebras, relations, congruences and
//! certificates; enumerate congruence lattices; decide permutability;
//! check the bracket identities and the generalized nested inclusion;
//! replay certificates; and run the batch evidence probe.
//!
//! Exit codes: 0 = holds/success, 1 = a checked property fails (a
//! counterexample is written), 2 = usage or parse error, 3 = inconclusive
//! (a cap was exceeded).

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use conlab_core::algebra::{parse_algebra, FiniteAlgebra, DEFAULT_SIZE_CAP};
use conlab_core::congruence::{
    enumerate_con_capped, is_m_permutable_capped, relation_of_blocks, serialize_congruence,
    Congruence, CongruenceError, DEFAULT_CON_CAP,
};
use conlab_core::harness::{enumerate_algebras, parse_signature, probe_abh_vs_xmstar};
use conlab_core::identities::{
    check_abh, check_identity, h_from_m, IdentityInstance, IdentityVerdict, Mode, Side,
    WitnessChain,
};
use conlab_core::malcev::{
    hm_search_capped, hm_verify, parse_chain, serialize_chain, HmOutcome, HmVerdict,
    DEFAULT_FREE_CAP, DEFAULT_MAX_M,
};
use conlab_core::congruence::parse_congruence;
use conlab_core::relation::{parse_relation, BinRelation};
use conlab_core::rst::{rst_check, RstInstance};
use conlab_core::textio::Scanner;

const EXIT_HOLDS: u8 = 0;
const EXIT_FAILS: u8 = 1;
const EXIT_INCONCLUSIVE: u8 = 3;

#[derive(Parser)]
#[command(name = "conlab")]
#[command(about = "Workbench for finite algebras: congruence lattices, permutability term chains, bracket identities, witness replay")]
#[command(version)]
struct Cli {
    /// Emit line-delimited JSON records instead of human-readable text
    #[arg(long, global = true)]
    machine: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate all congruences of an algebra
    Con {
        /// Algebra file
        algebra: PathBuf,
        /// Enumeration cap on the universe size
        #[arg(long, default_value_t = default_con_cap())]
        con_cap: usize,
    },
    /// Decide whether every congruence pair m-permutes
    Permutable {
        algebra: PathBuf,
        /// Number of alternating factors (at least 2)
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = default_con_cap())]
        con_cap: usize,
    },
    /// Search for a shortest bridging term chain and emit its certificate
    Hm {
        algebra: PathBuf,
        /// Largest chain length to accept
        #[arg(long, default_value_t = DEFAULT_MAX_M)]
        max_m: usize,
        /// Cap on free-algebra elements before giving up
        #[arg(long, default_value_t = DEFAULT_FREE_CAP)]
        cap: usize,
        /// Write the certificate to this file as well
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check one instance of the alternating bracket identity
    CheckXm {
        algebra: PathBuf,
        /// Number of open brackets per side
        #[arg(long)]
        m: usize,
        /// Relation or congruence file for alpha
        #[arg(long)]
        alpha: PathBuf,
        #[arg(long)]
        beta: PathBuf,
        #[arg(long)]
        gamma: PathBuf,
        /// Required for family X, ignored for family Y
        #[arg(long)]
        delta: Option<PathBuf>,
        /// Compare via transitive closure of the right side
        #[arg(long)]
        starred: bool,
        #[arg(long, value_enum, default_value_t = FamilyArg::X)]
        family: FamilyArg,
        /// Allow alpha to be any reflexive compatible relation and delta
        /// any relation
        #[arg(long)]
        generalized: bool,
    },
    /// Check alpha∧beta_h = alpha∧gamma_h over congruences
    CheckAbh {
        algebra: PathBuf,
        /// Sequence index h
        #[arg(long, conflicts_with = "from_m")]
        h: Option<usize>,
        /// Derive h from a permutability level m via m·⌊(m+1)/2⌋−1
        #[arg(long)]
        from_m: Option<usize>,
        /// Pin alpha instead of ranging over all congruences
        #[arg(long)]
        alpha: Option<PathBuf>,
        #[arg(long)]
        beta: Option<PathBuf>,
        #[arg(long)]
        gamma: Option<PathBuf>,
        #[arg(long, default_value_t = default_con_cap())]
        con_cap: usize,
    },
    /// Check the nested R/S/T inclusion described by a spec file
    CheckRst {
        /// Spec file naming the algebra and the relation files
        #[arg(long)]
        spec: PathBuf,
    },
    /// Re-verify a term-chain certificate against an algebra
    WitnessReplay {
        algebra: PathBuf,
        /// Certificate file as emitted by `hm`
        #[arg(long)]
        chain: PathBuf,
    },
    /// Enumerate algebras over a signature and compare the abh identity
    /// against the starred bracket identity on each
    Probe {
        /// Signature file
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        h: usize,
        #[arg(long)]
        m: usize,
        /// Bound on the number of algebras taken from the stream
        #[arg(long, default_value_t = usize::MAX)]
        limit: usize,
        /// Keep isomorphic copies instead of canonical representatives
        #[arg(long)]
        no_iso_filter: bool,
        #[arg(long, default_value_t = default_con_cap())]
        con_cap: usize,
        /// Write the line-delimited report to this file as well
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    X,
    Y,
}

fn default_con_cap() -> usize {
    std::env::var("CONLAB_CON_CAP")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_CON_CAP)
}

fn size_cap() -> usize {
    std::env::var("CONLAB_SIZE_CAP")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_SIZE_CAP)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let machine = cli.machine;
    match run(cli.command, machine) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read `{}`", path.display()))
}

fn load_algebra(path: &Path) -> Result<FiniteAlgebra> {
    let text = read_file(path)?;
    parse_algebra(&text).map_err(|e| anyhow!("{}:{}", path.display(), e))
}

/// Loads a relation from either a relation file (`rel`/`diag`/`full`) or a
/// congruence file (`cong`), dispatching on the leading keyword.
fn load_relation(path: &Path) -> Result<BinRelation> {
    let text = read_file(path)?;
    let first = Scanner::new(&text).peek().map(str::to_string);
    match first.as_deref() {
        Some("cong") => {
            let (_, blocks) =
                parse_congruence(&text).map_err(|e| anyhow!("{}:{}", path.display(), e))?;
            Ok(relation_of_blocks(&blocks))
        }
        _ => Ok(parse_relation(&text)
            .map_err(|e| anyhow!("{}:{}", path.display(), e))?
            .relation),
    }
}

fn cap_outcome<T>(r: Result<T, CongruenceError>, machine: bool, what: &str) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(CongruenceError::EnumerationCapExceeded { size, cap }) => {
            if machine {
                println!(
                    "{}",
                    json!({"outcome": "inconclusive", "reason": "enumeration cap", "size": size, "cap": cap})
                );
            } else {
                println!("inconclusive: {what} needs universe size {size} over cap {cap}");
            }
            Ok(None)
        }
        Err(e) => Err(e.into()),
    }
}

fn run(cmd: Command, machine: bool) -> Result<u8> {
    match cmd {
        Command::Con { algebra, con_cap } => {
            let alg = load_algebra(&algebra)?;
            let Some(con) = cap_outcome(enumerate_con_capped(&alg, con_cap), machine, "enumeration")?
            else {
                return Ok(EXIT_INCONCLUSIVE);
            };
            if machine {
                for (i, c) in con.iter().enumerate() {
                    println!(
                        "{}",
                        json!({"index": i, "blocks": c.partition(), "block_count": c.block_count()})
                    );
                }
            } else {
                println!("algebra {} (size {}): {} congruences", alg.name(), alg.size(), con.len());
                for (i, c) in con.iter().enumerate() {
                    print!("{}", serialize_congruence(&format!("c{i}"), c));
                }
            }
            Ok(EXIT_HOLDS)
        }

        Command::Permutable { algebra, m, con_cap } => {
            if m < 2 {
                bail!("--m must be at least 2");
            }
            let alg = load_algebra(&algebra)?;
            let Some(out) =
                cap_outcome(is_m_permutable_capped(&alg, m, con_cap), machine, "permutability")?
            else {
                return Ok(EXIT_INCONCLUSIVE);
            };
            match out.violation {
                None => {
                    if machine {
                        println!(
                            "{}",
                            json!({"outcome": "permutable", "m": m, "con_size": out.con_size})
                        );
                    } else {
                        println!(
                            "algebra {} is {}-permutable ({} congruences checked)",
                            alg.name(),
                            m,
                            out.con_size
                        );
                    }
                    Ok(EXIT_HOLDS)
                }
                Some(v) => {
                    if machine {
                        println!(
                            "{}",
                            json!({
                                "outcome": "not-permutable", "m": m,
                                "theta": v.theta.partition(), "psi": v.psi.partition(),
                                "pair": [v.pair.0, v.pair.1]
                            })
                        );
                    } else {
                        println!("algebra {} is not {}-permutable", alg.name(), m);
                        print!("{}", serialize_congruence("theta", &v.theta));
                        print!("{}", serialize_congruence("psi", &v.psi));
                        println!(
                            "witness: ({}, {}) lies in one of theta∘_m psi, psi∘_m theta only",
                            v.pair.0, v.pair.1
                        );
                    }
                    Ok(EXIT_FAILS)
                }
            }
        }

        Command::Hm {
            algebra,
            max_m,
            cap,
            out,
        } => {
            if max_m < 1 {
                bail!("--max-m must be at least 1");
            }
            let alg = load_algebra(&algebra)?;
            match hm_search_capped(&alg, max_m, cap, size_cap())? {
                HmOutcome::Found(chain) => {
                    let cert = serialize_chain(&chain);
                    if let Some(path) = &out {
                        fs::write(path, &cert)
                            .with_context(|| format!("cannot write `{}`", path.display()))?;
                    }
                    if machine {
                        println!(
                            "{}",
                            json!({"outcome": "found", "m": chain.m(), "certificate": cert})
                        );
                    } else {
                        println!("chain found with m = {}", chain.m());
                        print!("{cert}");
                    }
                    Ok(EXIT_HOLDS)
                }
                HmOutcome::NotFound { max_m, shortest } => {
                    if machine {
                        println!(
                            "{}",
                            json!({"outcome": "not-found", "max_m": max_m, "shortest": shortest})
                        );
                    } else {
                        println!(
                            "no chain of length up to {max_m}: the variety generated by {} is not m-permutable for any m <= {max_m}",
                            alg.name()
                        );
                        if let Some(s) = shortest {
                            println!("shortest bridge in the free algebra has length {s}");
                        }
                    }
                    Ok(EXIT_FAILS)
                }
                HmOutcome::Inconclusive { discovered, cap } => {
                    if machine {
                        println!(
                            "{}",
                            json!({"outcome": "inconclusive", "discovered": discovered, "cap": cap})
                        );
                    } else {
                        println!(
                            "inconclusive: free algebra exceeded the cap ({discovered} elements found, cap {cap})"
                        );
                    }
                    Ok(EXIT_INCONCLUSIVE)
                }
            }
        }

        Command::CheckXm {
            algebra,
            m,
            alpha,
            beta,
            gamma,
            delta,
            starred,
            family,
            generalized,
        } => {
            let alg = load_algebra(&algebra)?;
            let mode = if generalized { Mode::Generalized } else { Mode::Strict };
            let alpha = load_relation(&alpha)?;
            let beta = load_relation(&beta)?;
            let gamma = load_relation(&gamma)?;
            let inst = match family {
                FamilyArg::X => {
                    let delta_path = delta.ok_or_else(|| anyhow!("family X requires --delta"))?;
                    let delta = load_relation(&delta_path)?;
                    IdentityInstance::x(&alg, m, mode, starred, alpha, beta, gamma, delta)
                }
                FamilyArg::Y => IdentityInstance::y(&alg, m, mode, starred, alpha, beta, gamma),
            }
            .map_err(|e| anyhow!("invalid instance: {e}"))?;
            let verdict = check_identity(&inst);
            // the starred X verdict is always accompanied by the weaker
            // one-bracket-down Y verdict on the same relations
            let companion = if family == FamilyArg::X && starred && m >= 2 {
                inst.y_weakening(&alg).ok().map(|y| check_identity(&y))
            } else {
                None
            };
            report_identity(&inst, &verdict, companion.as_ref(), machine);
            Ok(if verdict.holds() { EXIT_HOLDS } else { EXIT_FAILS })
        }

        Command::CheckAbh {
            algebra,
            h,
            from_m,
            alpha,
            beta,
            gamma,
            con_cap,
        } => {
            let alg = load_algebra(&algebra)?;
            let h = match (h, from_m) {
                (Some(h), None) => h,
                (None, Some(m)) => {
                    let derived = h_from_m(m).map_err(|_| anyhow!("--from-m needs m >= 3"))?;
                    if !machine {
                        println!("derived h = {derived} from m = {m}");
                    }
                    derived
                }
                _ => bail!("exactly one of --h or --from-m is required"),
            };
            let pinned = |p: Option<PathBuf>| -> Result<Option<Congruence>> {
                match p {
                    None => Ok(None),
                    Some(path) => {
                        let rel = load_relation(&path)?;
                        Ok(Some(
                            conlab_core::congruence::as_congruence(&alg, &rel)
                                .map_err(|e| anyhow!("{}: {e}", path.display()))?,
                        ))
                    }
                }
            };
            let alpha = pinned(alpha)?;
            let beta = pinned(beta)?;
            let gamma = pinned(gamma)?;
            let Some(con) = cap_outcome(enumerate_con_capped(&alg, con_cap), machine, "enumeration")?
            else {
                return Ok(EXIT_INCONCLUSIVE);
            };
            let pick = |pin: &Option<Congruence>| -> Vec<Congruence> {
                match pin {
                    Some(c) => vec![c.clone()],
                    None => con.clone(),
                }
            };
            let mut checked = 0;
            for a in pick(&alpha) {
                for b in pick(&beta) {
                    for g in pick(&gamma) {
                        checked += 1;
                        let out = check_abh(&alg, &a, &b, &g, h)?;
                        if let Some(pair) = out.witness {
                            if machine {
                                println!(
                                    "{}",
                                    json!({
                                        "outcome": "fails", "h": h,
                                        "alpha": a.partition(), "beta": b.partition(),
                                        "gamma": g.partition(), "pair": [pair.0, pair.1]
                                    })
                                );
                            } else {
                                println!("identity fails at h = {h}");
                                print!("{}", serialize_congruence("alpha", &a));
                                print!("{}", serialize_congruence("beta", &b));
                                print!("{}", serialize_congruence("gamma", &g));
                                println!(
                                    "witness: ({}, {}) separates alpha∧beta_h from alpha∧gamma_h",
                                    pair.0, pair.1
                                );
                            }
                            return Ok(EXIT_FAILS);
                        }
                    }
                }
            }
            if machine {
                println!("{}", json!({"outcome": "holds", "h": h, "instances": checked}));
            } else {
                println!("identity holds at h = {h} ({checked} instance(s) checked)");
            }
            Ok(EXIT_HOLDS)
        }

        Command::CheckRst { spec } => {
            let (alg, inst) = load_rst_spec(&spec)?;
            let verdict = rst_check(&alg, &inst)?;
            match &verdict.counterexample {
                None => {
                    if machine {
                        println!(
                            "{}",
                            json!({
                                "outcome": "holds", "m": inst.m(),
                                "left_pairs": verdict.left.pair_count(),
                                "right_pairs": verdict.right.pair_count()
                            })
                        );
                    } else {
                        println!(
                            "inclusion holds (left {} pairs ⊆ right {} pairs)",
                            verdict.left.pair_count(),
                            verdict.right.pair_count()
                        );
                    }
                    Ok(EXIT_HOLDS)
                }
                Some((pair, witness)) => {
                    if machine {
                        println!(
                            "{}",
                            json!({
                                "outcome": "fails", "pair": [pair.0, pair.1],
                                "witness_a": witness.a, "witness_b": witness.b
                            })
                        );
                    } else {
                        println!("inclusion fails at pair ({}, {})", pair.0, pair.1);
                        println!("left-side witness a-chain: {:?}", witness.a);
                        println!("left-side witness b-chain: {:?}", witness.b);
                    }
                    Ok(EXIT_FAILS)
                }
            }
        }

        Command::WitnessReplay { algebra, chain } => {
            let alg = load_algebra(&algebra)?;
            let text = read_file(&chain)?;
            let chain = parse_chain(&text).map_err(|e| anyhow!("{}:{}", chain.display(), e))?;
            match hm_verify(&alg, &chain)? {
                HmVerdict::Valid => {
                    if machine {
                        println!("{}", json!({"outcome": "valid", "m": chain.m()}));
                    } else {
                        println!("certificate valid: chain of m = {} verified", chain.m());
                    }
                    Ok(EXIT_HOLDS)
                }
                HmVerdict::Invalid(f) => {
                    if machine {
                        println!("{}", json!({"outcome": "invalid", "failure": f.to_string()}));
                    } else {
                        println!("certificate invalid: {f}");
                    }
                    Ok(EXIT_FAILS)
                }
            }
        }

        Command::Probe {
            spec,
            h,
            m,
            limit,
            no_iso_filter,
            con_cap,
            out,
        } => {
            let text = read_file(&spec)?;
            let sig = parse_signature(&text).map_err(|e| anyhow!("{}:{}", spec.display(), e))?;
            let pool = enumerate_algebras(&sig, limit, !no_iso_filter);
            let report = probe_abh_vs_xmstar(pool, h, m, con_cap);
            let mut lines = String::new();
            for r in &report.records {
                lines.push_str(&serde_json::to_string(r)?);
                lines.push('\n');
            }
            if let Some(path) = &out {
                fs::write(path, &lines)
                    .with_context(|| format!("cannot write `{}`", path.display()))?;
            }
            if machine {
                print!("{lines}");
                println!(
                    "{}",
                    json!({
                        "summary": {"h": report.h, "m": report.m, "scope": report.scope,
                        "records": report.records.len(), "skipped": report.skipped,
                        "flagged": report.flagged_count, "contingency": report.contingency}
                    })
                );
            } else {
                print!("{}", report.summary());
            }
            if report.flagged_count > 0 {
                Ok(EXIT_FAILS)
            } else if report.skipped > 0 {
                Ok(EXIT_INCONCLUSIVE)
            } else {
                Ok(EXIT_HOLDS)
            }
        }
    }
}

fn report_identity(
    inst: &IdentityInstance,
    verdict: &IdentityVerdict,
    companion: Option<&IdentityVerdict>,
    machine: bool,
) {
    let describe = |w: &WitnessChain| (w.a.clone(), w.b.clone());
    let family_name = match inst.family() {
        conlab_core::identities::Family::X => "X",
        conlab_core::identities::Family::Y => "Y",
    };
    if machine {
        let mut obj = match verdict {
            IdentityVerdict::Holds { left, right } => json!({
                "outcome": "holds", "family": family_name, "m": inst.m(),
                "starred": inst.starred(),
                "left_pairs": left.pair_count(), "right_pairs": right.pair_count()
            }),
            IdentityVerdict::Fails {
                side,
                pair,
                witness,
                ..
            } => {
                let (a, b) = describe(witness);
                json!({
                    "outcome": "fails", "family": family_name, "m": inst.m(),
                    "starred": inst.starred(),
                    "side": match side { Side::Left => "left", Side::Right => "right" },
                    "pair": [pair.0, pair.1], "witness_a": a, "witness_b": b
                })
            }
        };
        if let Some(c) = companion {
            obj["companion_y_weakening_holds"] = json!(c.holds());
        }
        println!("{obj}");
        return;
    }
    println!(
        "instance: ({family_name}_{}){} in {} mode; alpha {} pairs, beta {}, gamma {}{}",
        inst.m(),
        if inst.starred() { "*" } else { "" },
        match inst.mode() {
            Mode::Strict => "strict",
            Mode::Generalized => "generalized",
        },
        inst.alpha().pair_count(),
        inst.beta().pair_count(),
        inst.gamma().pair_count(),
        match inst.delta() {
            Some(d) => format!(", delta {}", d.pair_count()),
            None => String::new(),
        }
    );
    match verdict {
        IdentityVerdict::Holds { left, right } => {
            println!(
                "identity holds: left and right sides agree ({} / {} pairs)",
                left.pair_count(),
                right.pair_count()
            );
        }
        IdentityVerdict::Fails {
            side, pair, witness, ..
        } => {
            let side_name = match side {
                Side::Left => "left",
                Side::Right => "right",
            };
            println!(
                "identity fails: pair ({}, {}) lies in the {side_name} side only",
                pair.0, pair.1
            );
            println!("witness a-chain: {:?}", witness.a);
            println!("witness b-chain: {:?}", witness.b);
        }
    }
    if let Some(c) = companion {
        println!(
            "companion verdict (one-bracket-down Y weakening, same relations): {}",
            if c.holds() { "holds" } else { "fails" }
        );
    }
}

/// Spec format for the nested inclusion:
///
/// ```text
/// rst
/// algebra <path>
/// m <m>
/// R0 <path> … Rm <path>
/// S1 <path> … Sm <path>
/// T1 <path> … Tm <path>
/// ```
///
/// Paths are resolved relative to the spec file's directory.
fn load_rst_spec(path: &Path) -> Result<(FiniteAlgebra, RstInstance)> {
    let text = read_file(path)?;
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let mut sc = Scanner::new(&text);
    let fail = |line: usize, msg: String| anyhow!("{}:{}: {}", path.display(), line, msg);
    sc.expect_word("rst")
        .map_err(|e| anyhow!("{}:{}", path.display(), e))?;
    sc.expect_word("algebra")
        .map_err(|e| anyhow!("{}:{}", path.display(), e))?;
    let (line, alg_path) = sc
        .expect_token("algebra path")
        .map_err(|e| anyhow!("{}:{}", path.display(), e))?;
    let alg = load_algebra(&dir.join(alg_path)).map_err(|e| fail(line, e.to_string()))?;
    sc.expect_word("m").map_err(|e| anyhow!("{}:{}", path.display(), e))?;
    let m = sc
        .expect_usize("level count m")
        .map_err(|e| anyhow!("{}:{}", path.display(), e))?;
    if m < 2 {
        bail!("{}: m must be at least 2", path.display());
    }
    let mut r: Vec<Option<BinRelation>> = vec![None; m + 1];
    let mut s: Vec<Option<BinRelation>> = vec![None; m];
    let mut t: Vec<Option<BinRelation>> = vec![None; m];
    while !sc.at_end() {
        let (line, tag) = sc
            .expect_token("relation tag")
            .map_err(|e| anyhow!("{}:{}", path.display(), e))?;
        let (fline, file) = sc
            .expect_token("relation path")
            .map_err(|e| anyhow!("{}:{}", path.display(), e))?;
        let rel = load_relation(&dir.join(file)).map_err(|e| fail(fline, e.to_string()))?;
        let (kind, idx_str) = tag.split_at(1);
        let idx: usize = idx_str
            .parse()
            .map_err(|_| fail(line, format!("bad relation tag `{tag}`")))?;
        let slot = match kind {
            "R" if idx <= m => &mut r[idx],
            "S" if (1..=m).contains(&idx) => &mut s[idx - 1],
            "T" if (1..=m).contains(&idx) => &mut t[idx - 1],
            _ => return Err(fail(line, format!("tag `{tag}` out of range for m = {m}"))),
        };
        if slot.replace(rel).is_some() {
            return Err(fail(line, format!("duplicate tag `{tag}`")));
        }
    }
    let unwrap_all = |v: Vec<Option<BinRelation>>, fam: char, base: usize| -> Result<Vec<BinRelation>> {
        v.into_iter()
            .enumerate()
            .map(|(i, o)| o.ok_or_else(|| anyhow!("{}: missing {}{}", path.display(), fam, i + base)))
            .collect()
    };
    let inst = RstInstance::new(
        unwrap_all(r, 'R', 0)?,
        unwrap_all(s, 'S', 1)?,
        unwrap_all(t, 'T', 1)?,
    )
    .map_err(|e| anyhow!("{}: {}", path.display(), e))?;
    Ok((alg, inst))
}
