//! Deciding m-permutability of the variety generated by a finite algebra:
//! the free algebra on three generators realized inside `A^(n³)`, shortest
//! chains of terms bridging the first projection to the third, exhaustive
//! chain verification, and replay of the witness constructions that
//! transport identity membership from one side to the other.

use crate::algebra::{eval_term, AlgebraError, FiniteAlgebra, Term, DEFAULT_SIZE_CAP};
use crate::identities::{IdentityInstance, Side, WitnessChain, WitnessError};
use crate::rst::{RstInstance, RstWitness, RstWitnessError};
use crate::textio::ParseError;
use std::collections::HashMap;
use std::fmt::Write as _;
use thiserror::Error;

/// Default cap on the number of free-algebra elements discovered before
/// the build gives up as inconclusive.
pub const DEFAULT_FREE_CAP: usize = 200_000;

/// Default bound on the chain length searched for.
pub const DEFAULT_MAX_M: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainError {
    #[error("a chain needs at least two terms, got {0}")]
    TooShort(usize),
    #[error("chain length mismatch: chain has m = {chain_m}, instance has m = {instance_m}")]
    LengthMismatch { chain_m: usize, instance_m: usize },
    #[error("left-side witness does not validate: {0}")]
    InvalidLeftWitness(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// A chain `t_0..t_m` of three-variable terms intended to satisfy the
/// bridging conditions: `t_0` acts as the first projection, `t_m` as the
/// third, and `t_i(x,x,y) = t_{i+1}(x,y,y)` pointwise for each step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HmChain {
    terms: Vec<Term>,
}

impl HmChain {
    pub fn new(terms: Vec<Term>) -> Result<HmChain, ChainError> {
        if terms.len() < 2 {
            return Err(ChainError::TooShort(terms.len()));
        }
        Ok(HmChain { terms })
    }

    pub fn m(&self) -> usize {
        self.terms.len() - 1
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Pads the chain to a larger m by appending copies of the third
    /// projection; the bridging conditions are preserved because the last
    /// term already acts as the third projection.
    pub fn extended_to(&self, m: usize) -> HmChain {
        assert!(m >= self.m());
        let mut terms = self.terms.clone();
        while terms.len() < m + 1 {
            terms.push(Term::z());
        }
        HmChain { terms }
    }
}

/// Why a chain failed verification.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HmFailure {
    #[error("t_0 is not the first projection at (x,y,z) = ({x},{y},{z})")]
    NotFirstProjection { x: usize, y: usize, z: usize },
    #[error("bridge {i} broken: t_{i}(x,x,y) ≠ t_{next}(x,y,y) at (x,y) = ({x},{y})", next = i + 1)]
    BridgeBroken { i: usize, x: usize, y: usize },
    #[error("t_m is not the third projection at (x,y,z) = ({x},{y},{z})")]
    NotThirdProjection { x: usize, y: usize, z: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HmVerdict {
    Valid,
    Invalid(HmFailure),
}

impl HmVerdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, HmVerdict::Valid)
    }
}

fn index3(x: usize, y: usize, z: usize, n: usize) -> usize {
    (x * n + y) * n + z
}

fn projection_vector(var: usize, n: usize) -> Vec<u32> {
    let cube = n * n * n;
    let mut v = vec![0u32; cube];
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                v[index3(x, y, z, n)] = [x, y, z][var] as u32;
            }
        }
    }
    v
}

/// Evaluates a term to its full function table over `A³`.
fn term_vector(alg: &FiniteAlgebra, t: &Term) -> Result<Vec<u32>, AlgebraError> {
    let n = alg.size();
    match t {
        Term::Var(i) => {
            if *i >= 3 {
                return Err(AlgebraError::BadVariable(*i));
            }
            Ok(projection_vector(*i, n))
        }
        Term::App(sym, args) => {
            let op = alg
                .op(sym)
                .ok_or_else(|| AlgebraError::UnknownSymbol(sym.clone()))?;
            if op.arity != args.len() {
                return Err(AlgebraError::ArityMismatch {
                    symbol: sym.clone(),
                    expected: op.arity,
                    found: args.len(),
                });
            }
            let children: Vec<Vec<u32>> = args
                .iter()
                .map(|a| term_vector(alg, a))
                .collect::<Result<_, _>>()?;
            let cube = n * n * n;
            let mut out = vec![0u32; cube];
            let mut argv = vec![0usize; op.arity];
            for (p, slot) in out.iter_mut().enumerate() {
                for (i, child) in children.iter().enumerate() {
                    argv[i] = child[p] as usize;
                }
                *slot = op.apply(&argv, n) as u32;
            }
            Ok(out)
        }
    }
}

/// Exhaustively checks the three chain conditions over `A`: the pointwise
/// check over all of `A³` is exactly evaluation in the free algebra on
/// three generators, so a pass certifies the conditions in the variety
/// generated by `A`.
pub fn hm_verify(alg: &FiniteAlgebra, chain: &HmChain) -> Result<HmVerdict, AlgebraError> {
    let n = alg.size();
    let vectors: Vec<Vec<u32>> = chain
        .terms()
        .iter()
        .map(|t| term_vector(alg, t))
        .collect::<Result<_, _>>()?;
    let first = projection_vector(0, n);
    let third = projection_vector(2, n);
    if let Some(p) = (0..n * n * n).find(|&p| vectors[0][p] != first[p]) {
        let (x, y, z) = unindex3(p, n);
        return Ok(HmVerdict::Invalid(HmFailure::NotFirstProjection { x, y, z }));
    }
    let m = chain.m();
    for i in 0..m {
        for x in 0..n {
            for y in 0..n {
                if vectors[i][index3(x, x, y, n)] != vectors[i + 1][index3(x, y, y, n)] {
                    return Ok(HmVerdict::Invalid(HmFailure::BridgeBroken { i, x, y }));
                }
            }
        }
    }
    if let Some(p) = (0..n * n * n).find(|&p| vectors[m][p] != third[p]) {
        let (x, y, z) = unindex3(p, n);
        return Ok(HmVerdict::Invalid(HmFailure::NotThirdProjection { x, y, z }));
    }
    Ok(HmVerdict::Valid)
}

fn unindex3(p: usize, n: usize) -> (usize, usize, usize) {
    (p / (n * n), p / n % n, p % n)
}

/// How a free-algebra element was first produced.
#[derive(Debug, Clone)]
enum Provenance {
    Generator(usize),
    App { op: usize, args: Vec<usize> },
}

/// The free algebra on three generators over the variety generated by the
/// base algebra, realized as the subalgebra of `A^(n³)` generated by the
/// three projections. Elements are keyed by their full function table, so
/// element equality is equality of term functions; each element carries a
/// minimal-depth witnessing term via its discovery provenance.
#[derive(Debug, Clone)]
pub struct FreeAlgebra3 {
    base: FiniteAlgebra,
    vectors: Vec<Vec<u32>>,
    provenance: Vec<Provenance>,
    index: HashMap<Vec<u32>, usize>,
    proj: [usize; 3],
}

#[derive(Debug, Clone)]
pub enum Free3Outcome {
    Built(FreeAlgebra3),
    /// The element cap was hit; `discovered` counts elements found so far.
    Capped { discovered: usize, cap: usize },
}

impl FreeAlgebra3 {
    pub fn base(&self) -> &FiniteAlgebra {
        &self.base
    }

    pub fn element_count(&self) -> usize {
        self.vectors.len()
    }

    pub fn vector(&self, idx: usize) -> &[u32] {
        &self.vectors[idx]
    }

    /// Indices of the three projection generators. On a one-element base
    /// all three coincide as functions and share a single element.
    pub fn projections(&self) -> [usize; 3] {
        self.proj
    }

    pub fn find_vector(&self, v: &[u32]) -> Option<usize> {
        self.index.get(v).copied()
    }

    /// The witnessing term of an element, materialized from provenance.
    pub fn term(&self, idx: usize) -> Term {
        match &self.provenance[idx] {
            Provenance::Generator(v) => Term::Var(*v),
            Provenance::App { op, args } => Term::App(
                self.base.ops()[*op].symbol.clone(),
                args.iter().map(|&a| self.term(a)).collect(),
            ),
        }
    }
}

/// Builds the free algebra with the default caps.
pub fn build_free3(alg: &FiniteAlgebra, elem_cap: usize) -> Result<Free3Outcome, AlgebraError> {
    build_free3_capped(alg, elem_cap, DEFAULT_SIZE_CAP)
}

/// Round-based saturation from the three projections; elements discovered
/// in one round come from argument tuples touching the previous round, so
/// provenance terms have minimal depth and the ordering is deterministic.
pub fn build_free3_capped(
    alg: &FiniteAlgebra,
    elem_cap: usize,
    size_cap: usize,
) -> Result<Free3Outcome, AlgebraError> {
    let n = alg.size();
    if n.checked_pow(3).map_or(true, |c| c > size_cap) {
        return Err(AlgebraError::SizeCapExceeded {
            needed: n.saturating_pow(3),
            cap: size_cap,
        });
    }

    let mut free = FreeAlgebra3 {
        base: alg.clone(),
        vectors: Vec::new(),
        provenance: Vec::new(),
        index: HashMap::new(),
        proj: [0; 3],
    };
    let push = |free: &mut FreeAlgebra3, v: Vec<u32>, prov: Provenance| -> Option<usize> {
        if free.index.contains_key(&v) {
            None
        } else {
            let id = free.vectors.len();
            free.index.insert(v.clone(), id);
            free.vectors.push(v);
            free.provenance.push(prov);
            Some(id)
        }
    };
    for var in 0..3 {
        let v = projection_vector(var, n);
        free.proj[var] = match push(&mut free, v.clone(), Provenance::Generator(var)) {
            Some(id) => id,
            None => free.index[&v],
        };
    }
    // nullary operations contribute constant functions
    for (oi, op) in alg.ops().iter().enumerate() {
        if op.arity == 0 {
            let v = vec![op.table[0] as u32; n * n * n];
            push(&mut free, v, Provenance::App { op: oi, args: vec![] });
        }
    }

    let mut frontier = 0;
    let mut argv = vec![0usize; 0];
    while frontier < free.vectors.len() {
        let prev_len = free.vectors.len();
        if prev_len > elem_cap {
            return Ok(Free3Outcome::Capped {
                discovered: prev_len,
                cap: elem_cap,
            });
        }
        for (oi, op) in alg.ops().iter().enumerate() {
            if op.arity == 0 {
                continue;
            }
            let mut idx = vec![0usize; op.arity];
            loop {
                if idx.iter().any(|&i| i >= frontier) {
                    let mut v = vec![0u32; n * n * n];
                    argv.resize(op.arity, 0);
                    for (p, slot) in v.iter_mut().enumerate() {
                        for (i, &j) in idx.iter().enumerate() {
                            argv[i] = free.vectors[j][p] as usize;
                        }
                        *slot = op.apply(&argv, n) as u32;
                    }
                    push(
                        &mut free,
                        v,
                        Provenance::App {
                            op: oi,
                            args: idx.clone(),
                        },
                    );
                    if free.vectors.len() > elem_cap {
                        return Ok(Free3Outcome::Capped {
                            discovered: free.vectors.len(),
                            cap: elem_cap,
                        });
                    }
                }
                if !crate::algebra::increment(&mut idx, prev_len) {
                    break;
                }
            }
        }
        frontier = prev_len;
    }
    Ok(Free3Outcome::Built(free))
}

/// Result of the chain search.
#[derive(Debug, Clone)]
pub enum HmOutcome {
    Found(HmChain),
    /// The free algebra is complete and no chain of length ≤ max_m exists;
    /// `shortest` reports the true shortest bridge length when one exists
    /// at all. The claim is bounded: nothing beyond max_m is asserted.
    NotFound { max_m: usize, shortest: Option<usize> },
    /// The free algebra hit its element cap; no negative claim is made.
    Inconclusive { discovered: usize, cap: usize },
}

impl HmOutcome {
    pub fn chain(&self) -> Option<&HmChain> {
        match self {
            HmOutcome::Found(c) => Some(c),
            _ => None,
        }
    }
}

/// Searches for a shortest chain by breadth-first search over free-algebra
/// elements, with an edge `f → g` exactly when `f(x,x,y) = g(x,y,y)` for
/// all `x, y`. First-occurrence tie-breaking keeps certificates
/// deterministic.
pub fn hm_search(alg: &FiniteAlgebra, max_m: usize, elem_cap: usize) -> Result<HmOutcome, AlgebraError> {
    hm_search_capped(alg, max_m, elem_cap, DEFAULT_SIZE_CAP)
}

/// As [`hm_search`] with an explicit cap on the base cube `n³`.
pub fn hm_search_capped(
    alg: &FiniteAlgebra,
    max_m: usize,
    elem_cap: usize,
    size_cap: usize,
) -> Result<HmOutcome, AlgebraError> {
    assert!(max_m >= 1);
    let free = match build_free3_capped(alg, elem_cap, size_cap)? {
        Free3Outcome::Built(f) => f,
        Free3Outcome::Capped { discovered, cap } => {
            return Ok(HmOutcome::Inconclusive { discovered, cap })
        }
    };
    let n = alg.size();
    let count = free.element_count();

    // f → g iff the "merge left" signature of f equals the "merge right"
    // signature of g
    let left_sig = |f: usize| -> Vec<u32> {
        let v = free.vector(f);
        let mut sig = Vec::with_capacity(n * n);
        for x in 0..n {
            for y in 0..n {
                sig.push(v[index3(x, x, y, n)]);
            }
        }
        sig
    };
    let mut by_right_sig: HashMap<Vec<u32>, Vec<usize>> = HashMap::new();
    for g in 0..count {
        let v = free.vector(g);
        let mut sig = Vec::with_capacity(n * n);
        for x in 0..n {
            for y in 0..n {
                sig.push(v[index3(x, y, y, n)]);
            }
        }
        by_right_sig.entry(sig).or_default().push(g);
    }

    let [px, _, pz] = free.projections();
    let mut dist = vec![usize::MAX; count];
    let mut parent = vec![usize::MAX; count];
    let mut queue = std::collections::VecDeque::new();
    dist[px] = 0;
    queue.push_back(px);
    while let Some(f) = queue.pop_front() {
        if f == pz {
            break;
        }
        if let Some(neighbors) = by_right_sig.get(&left_sig(f)) {
            for &g in neighbors {
                if dist[g] == usize::MAX {
                    dist[g] = dist[f] + 1;
                    parent[g] = f;
                    queue.push_back(g);
                }
            }
        }
    }

    if dist[pz] == usize::MAX {
        return Ok(HmOutcome::NotFound {
            max_m,
            shortest: None,
        });
    }
    let shortest = dist[pz].max(1); // a one-element base makes x and z coincide
    if shortest > max_m {
        return Ok(HmOutcome::NotFound {
            max_m,
            shortest: Some(shortest),
        });
    }
    let chain = if dist[pz] == 0 {
        HmChain::new(vec![Term::x(), Term::z()]).unwrap()
    } else {
        let mut path = vec![pz];
        let mut cur = pz;
        while cur != px {
            cur = parent[cur];
            path.push(cur);
        }
        path.reverse();
        HmChain::new(path.into_iter().map(|e| free.term(e)).collect()).unwrap()
    };
    debug_assert!(matches!(hm_verify(alg, &chain), Ok(v) if v.is_valid()));
    Ok(HmOutcome::Found(chain))
}

/// Applies the chain terms symmetrically to a left-side witness to obtain
/// a right-side witness: `c_i = t_i(a_{i-1}, a_i, a_{i+1})` and likewise
/// for the `b` chain, with the endpoints carried over unchanged.
pub fn construct_witnesses_xm(
    alg: &FiniteAlgebra,
    chain: &HmChain,
    inst: &IdentityInstance,
    left: &WitnessChain,
) -> Result<WitnessChain, ChainError> {
    if chain.m() != inst.m() {
        return Err(ChainError::LengthMismatch {
            chain_m: chain.m(),
            instance_m: inst.m(),
        });
    }
    left.validate(inst, Side::Left)
        .map_err(|e: WitnessError| ChainError::InvalidLeftWitness(e.to_string()))?;
    let transported = transport(alg, chain, &left.a, &left.b)?;
    Ok(WitnessChain {
        a: transported.0,
        b: transported.1,
    })
}

/// The same construction for the nested R/S/T inclusion.
pub fn construct_witnesses_rst(
    alg: &FiniteAlgebra,
    chain: &HmChain,
    inst: &RstInstance,
    left: &RstWitness,
) -> Result<RstWitness, ChainError> {
    if chain.m() != inst.m() {
        return Err(ChainError::LengthMismatch {
            chain_m: chain.m(),
            instance_m: inst.m(),
        });
    }
    left.validate_left(inst)
        .map_err(|e: RstWitnessError| ChainError::InvalidLeftWitness(e.to_string()))?;
    let transported = transport(alg, chain, &left.a, &left.b)?;
    Ok(RstWitness {
        a: transported.0,
        b: transported.1,
    })
}

fn transport(
    alg: &FiniteAlgebra,
    chain: &HmChain,
    a: &[usize],
    b: &[usize],
) -> Result<(Vec<usize>, Vec<usize>), ChainError> {
    let m = chain.m();
    let mut c = Vec::with_capacity(m + 1);
    let mut d = Vec::with_capacity(m + 1);
    c.push(a[0]);
    d.push(b[0]);
    for i in 1..m {
        let t = &chain.terms()[i];
        c.push(eval_term(alg, t, (a[i - 1], a[i], a[i + 1]))?);
        d.push(eval_term(alg, t, (b[i - 1], b[i], b[i + 1]))?);
    }
    c.push(a[m]);
    d.push(b[m]);
    Ok((c, d))
}

/// Serializes a chain as one labelled S-expression per line.
pub fn serialize_chain(chain: &HmChain) -> String {
    let mut out = String::new();
    for (i, t) in chain.terms().iter().enumerate() {
        writeln!(out, "(t{} {})", i, t.to_sexpr()).unwrap();
    }
    out
}

/// Parses the chain certificate format emitted by [`serialize_chain`].
pub fn parse_chain(input: &str) -> Result<HmChain, ParseError> {
    let tokens = sexpr_tokens(input);
    let mut pos = 0;
    let mut terms = Vec::new();
    while pos < tokens.len() {
        let (line, tok) = &tokens[pos];
        if tok != "(" {
            return Err(ParseError::new(*line, format!("expected `(`, found `{tok}`")));
        }
        pos += 1;
        let (line, label) = tokens
            .get(pos)
            .ok_or_else(|| ParseError::new(*line, "unexpected end of chain entry"))?;
        let expect = format!("t{}", terms.len());
        if *label != expect {
            return Err(ParseError::new(
                *line,
                format!("expected chain label `{expect}`, found `{label}`"),
            ));
        }
        pos += 1;
        let term = parse_term(&tokens, &mut pos)?;
        match tokens.get(pos) {
            Some((_, t)) if t == ")" => pos += 1,
            Some((line, t)) => {
                return Err(ParseError::new(*line, format!("expected `)`, found `{t}`")))
            }
            None => return Err(ParseError::new(*line, "unclosed chain entry")),
        }
        terms.push(term);
    }
    HmChain::new(terms).map_err(|e| ParseError::new(1, e.to_string()))
}

fn sexpr_tokens(input: &str) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    for (li, raw) in input.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let mut cur = String::new();
        for ch in line.chars() {
            match ch {
                '(' | ')' => {
                    if !cur.is_empty() {
                        out.push((li + 1, std::mem::take(&mut cur)));
                    }
                    out.push((li + 1, ch.to_string()));
                }
                c if c.is_whitespace() => {
                    if !cur.is_empty() {
                        out.push((li + 1, std::mem::take(&mut cur)));
                    }
                }
                c => cur.push(c),
            }
        }
        if !cur.is_empty() {
            out.push((li + 1, cur));
        }
    }
    out
}

fn parse_term(tokens: &[(usize, String)], pos: &mut usize) -> Result<Term, ParseError> {
    let (line, tok) = tokens
        .get(*pos)
        .ok_or_else(|| ParseError::new(1, "unexpected end of term"))?;
    *pos += 1;
    match tok.as_str() {
        "(" => {
            let (sline, sym) = tokens
                .get(*pos)
                .ok_or_else(|| ParseError::new(*line, "unexpected end after `(`"))?;
            if sym == "(" || sym == ")" {
                return Err(ParseError::new(*sline, "expected operation symbol after `(`"));
            }
            *pos += 1;
            let mut args = Vec::new();
            loop {
                match tokens.get(*pos) {
                    Some((_, t)) if t == ")" => {
                        *pos += 1;
                        return Ok(Term::App(sym.clone(), args));
                    }
                    Some(_) => args.push(parse_term(tokens, pos)?),
                    None => return Err(ParseError::new(*sline, "unclosed term")),
                }
            }
        }
        ")" => Err(ParseError::new(*line, "unexpected `)`")),
        "x" => Ok(Term::Var(0)),
        "y" => Ok(Term::Var(1)),
        "z" => Ok(Term::Var(2)),
        atom => Ok(Term::App(atom.to_string(), Vec::new())),
    }
}
