//! Finite algebras with tabulated operations, term evaluation, direct
//! powers, and subuniverse generation.
//!
//! The universe of an algebra of size `n` is always `{0, …, n-1}`; element
//! names, if any, live in the file-format layer only. Constants are
//! operations of arity 0.

use crate::textio::{ParseError, Scanner};
use std::fmt::Write as _;
use thiserror::Error;

/// Default cap on the size of generated universes (direct powers) and on
/// materialized operation tables. Exceeding it is an explicit error, never
/// silent truncation.
pub const DEFAULT_SIZE_CAP: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("unknown operation symbol `{0}`")]
    UnknownSymbol(String),
    #[error("operation `{symbol}` has arity {expected}, applied to {found} arguments")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("element {element} out of range for universe of size {size}")]
    ElementOutOfRange { element: usize, size: usize },
    #[error("duplicate operation symbol `{0}`")]
    DuplicateSymbol(String),
    #[error("operation `{symbol}` table has {found} entries, expected {expected}")]
    BadTableLength {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("size cap exceeded: {needed} elements required, cap is {cap}")]
    SizeCapExceeded { needed: usize, cap: usize },
    #[error("variable index {0} out of range (only x, y, z are supported)")]
    BadVariable(usize),
}

/// A finitary operation given by its full table.
///
/// The table is flat and row-major: the result for arguments
/// `(a_0, …, a_{k-1})` sits at index `Σ a_i · n^(k-1-i)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OperationTable {
    pub symbol: String,
    pub arity: usize,
    pub table: Vec<usize>,
}

impl OperationTable {
    pub fn new(
        symbol: impl Into<String>,
        arity: usize,
        size: usize,
        table: Vec<usize>,
    ) -> Result<Self, AlgebraError> {
        let symbol = symbol.into();
        let expected = size.checked_pow(arity as u32).unwrap_or(usize::MAX);
        if table.len() != expected {
            return Err(AlgebraError::BadTableLength {
                symbol,
                expected,
                found: table.len(),
            });
        }
        if let Some(&bad) = table.iter().find(|&&v| v >= size) {
            return Err(AlgebraError::ElementOutOfRange {
                element: bad,
                size,
            });
        }
        Ok(OperationTable {
            symbol,
            arity,
            table,
        })
    }

    /// Table index of an argument tuple, most-significant coordinate first.
    #[inline]
    pub fn index(args: &[usize], size: usize) -> usize {
        let mut idx = 0;
        for &a in args {
            idx = idx * size + a;
        }
        idx
    }

    #[inline]
    pub fn apply(&self, args: &[usize], size: usize) -> usize {
        debug_assert_eq!(args.len(), self.arity);
        self.table[Self::index(args, size)]
    }
}

/// A finite algebra: universe `{0, …, size-1}` plus an ordered list of
/// operation tables with pairwise distinct symbols.
///
/// Immutable after construction; all operations on it are pure, so shared
/// concurrent use is safe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteAlgebra {
    name: String,
    size: usize,
    ops: Vec<OperationTable>,
}

impl FiniteAlgebra {
    pub fn new(
        name: impl Into<String>,
        size: usize,
        ops: Vec<OperationTable>,
    ) -> Result<Self, AlgebraError> {
        assert!(size >= 1, "universe must be nonempty");
        for (i, op) in ops.iter().enumerate() {
            let expected = size.checked_pow(op.arity as u32).unwrap_or(usize::MAX);
            if op.table.len() != expected {
                return Err(AlgebraError::BadTableLength {
                    symbol: op.symbol.clone(),
                    expected,
                    found: op.table.len(),
                });
            }
            if let Some(&bad) = op.table.iter().find(|&&v| v >= size) {
                return Err(AlgebraError::ElementOutOfRange {
                    element: bad,
                    size,
                });
            }
            if ops[..i].iter().any(|o| o.symbol == op.symbol) {
                return Err(AlgebraError::DuplicateSymbol(op.symbol.clone()));
            }
        }
        Ok(FiniteAlgebra {
            name: name.into(),
            size,
            ops,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn ops(&self) -> &[OperationTable] {
        &self.ops
    }

    pub fn op(&self, symbol: &str) -> Option<&OperationTable> {
        self.ops.iter().find(|o| o.symbol == symbol)
    }

    pub fn elements(&self) -> impl Iterator<Item = usize> {
        0..self.size
    }

    /// The cyclic group of order `n` with operations `+`, `-`, `0`.
    pub fn cyclic_group(n: usize) -> FiniteAlgebra {
        assert!(n >= 1);
        let mut add = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                add.push((a + b) % n);
            }
        }
        let neg = (0..n).map(|a| (n - a) % n).collect();
        FiniteAlgebra::new(
            format!("Z{n}"),
            n,
            vec![
                OperationTable::new("+", 2, n, add).unwrap(),
                OperationTable::new("-", 1, n, neg).unwrap(),
                OperationTable::new("0", 0, n, vec![0]).unwrap(),
            ],
        )
        .unwrap()
    }

    /// The `n`-element chain as a lattice, with `meet` and `join`.
    pub fn chain_lattice(n: usize) -> FiniteAlgebra {
        assert!(n >= 1);
        let mut meet = Vec::with_capacity(n * n);
        let mut join = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                meet.push(a.min(b));
                join.push(a.max(b));
            }
        }
        FiniteAlgebra::new(
            format!("chain{n}"),
            n,
            vec![
                OperationTable::new("meet", 2, n, meet).unwrap(),
                OperationTable::new("join", 2, n, join).unwrap(),
            ],
        )
        .unwrap()
    }

    /// A universe with no operations at all.
    pub fn bare_set(n: usize) -> FiniteAlgebra {
        FiniteAlgebra::new(format!("set{n}"), n, Vec::new()).unwrap()
    }

    /// Direct product of two copies of `Z2` presented as a group on
    /// `{0,1,2,3}`, element `2a+b` standing for the pair `(a,b)`.
    pub fn klein_group() -> FiniteAlgebra {
        FiniteAlgebra::cyclic_group(2)
            .direct_power(2)
            .expect("4-element power is under any sane cap")
    }

    /// `k`-th direct power with materialized tables.
    ///
    /// Elements of the power are encoded base-`n`, most-significant
    /// coordinate first: the tuple `(c_0, …, c_{k-1})` becomes
    /// `Σ c_i · n^(k-1-i)`. The relation and free-algebra layers rely on
    /// this exact encoding.
    pub fn direct_power(&self, k: u32) -> Result<FiniteAlgebra, AlgebraError> {
        self.direct_power_capped(k, DEFAULT_SIZE_CAP)
    }

    /// As [`direct_power`](Self::direct_power) with an explicit cap. Both
    /// the power universe and every materialized table must fit the cap.
    pub fn direct_power_capped(&self, k: u32, cap: usize) -> Result<FiniteAlgebra, AlgebraError> {
        assert!(k >= 1, "power exponent must be positive");
        let psize = self
            .size
            .checked_pow(k)
            .filter(|&s| s <= cap)
            .ok_or(AlgebraError::SizeCapExceeded {
                needed: self.size.saturating_pow(k),
                cap,
            })?;
        for op in &self.ops {
            let table_len = psize.checked_pow(op.arity as u32);
            if table_len.is_none() || table_len.unwrap() > cap {
                return Err(AlgebraError::SizeCapExceeded {
                    needed: psize.saturating_pow(op.arity as u32),
                    cap,
                });
            }
        }

        let k = k as usize;
        let mut ops = Vec::with_capacity(self.ops.len());
        let mut coords: Vec<Vec<usize>> = Vec::new();
        for op in &self.ops {
            let table_len = psize.pow(op.arity as u32);
            let mut table = Vec::with_capacity(table_len);
            let mut args = vec![0usize; op.arity];
            coords.clear();
            coords.resize(op.arity, vec![0usize; k]);
            let mut base_args = vec![0usize; op.arity];
            loop {
                for (i, &a) in args.iter().enumerate() {
                    decode(a, self.size, k, &mut coords[i]);
                }
                // coordinatewise application
                let mut encoded = 0usize;
                for c in 0..k {
                    for i in 0..op.arity {
                        base_args[i] = coords[i][c];
                    }
                    encoded = encoded * self.size + op.apply(&base_args, self.size);
                }
                table.push(encoded);
                if !increment(&mut args, psize) {
                    break;
                }
            }
            ops.push(OperationTable {
                symbol: op.symbol.clone(),
                arity: op.arity,
                table,
            });
        }
        FiniteAlgebra::new(format!("{}^{}", self.name, k), psize, ops)
    }

    /// Least subset of the universe containing `generators` and closed under
    /// every operation. Worklist saturation; output is ascending.
    pub fn subuniverse_generate(&self, generators: &[usize]) -> Result<Vec<usize>, AlgebraError> {
        for &g in generators {
            if g >= self.size {
                return Err(AlgebraError::ElementOutOfRange {
                    element: g,
                    size: self.size,
                });
            }
        }
        let mut member = vec![false; self.size];
        let mut elems: Vec<usize> = Vec::new();
        for &g in generators {
            if !member[g] {
                member[g] = true;
                elems.push(g);
            }
        }
        // Constants enter even from an empty generating set.
        for op in &self.ops {
            if op.arity == 0 {
                let v = op.table[0];
                if !member[v] {
                    member[v] = true;
                    elems.push(v);
                }
            }
        }
        // Saturate: each round applies every operation to tuples over the
        // current set; `frontier` marks where the previous round ended so a
        // tuple is revisited only when it touches a new element.
        let mut frontier = 0;
        let mut args = Vec::new();
        while frontier < elems.len() {
            let prev_len = elems.len();
            for op in &self.ops {
                if op.arity == 0 {
                    continue;
                }
                let mut idx = vec![0usize; op.arity];
                loop {
                    if idx.iter().any(|&i| i >= frontier) {
                        args.clear();
                        args.extend(idx.iter().map(|&i| elems[i]));
                        let v = op.apply(&args, self.size);
                        if !member[v] {
                            member[v] = true;
                            elems.push(v);
                        }
                    }
                    if !increment(&mut idx, prev_len) {
                        break;
                    }
                }
            }
            frontier = prev_len;
        }
        elems.sort_unstable();
        Ok(elems)
    }

    /// The subalgebra induced on a subuniverse, with elements renumbered to
    /// `{0, …, |sub|-1}` in ascending order of the original elements.
    ///
    /// `sub` must be closed under every operation (as produced by
    /// [`subuniverse_generate`](Self::subuniverse_generate)).
    pub fn induced_subalgebra(&self, sub: &[usize]) -> Result<FiniteAlgebra, AlgebraError> {
        let mut sorted = sub.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let mut back = vec![usize::MAX; self.size];
        for (new, &old) in sorted.iter().enumerate() {
            if old >= self.size {
                return Err(AlgebraError::ElementOutOfRange {
                    element: old,
                    size: self.size,
                });
            }
            back[old] = new;
        }
        let m = sorted.len();
        let mut ops = Vec::with_capacity(self.ops.len());
        for op in &self.ops {
            let mut table = Vec::with_capacity(m.pow(op.arity as u32));
            let mut idx = vec![0usize; op.arity];
            let mut args = vec![0usize; op.arity];
            loop {
                for (i, &j) in idx.iter().enumerate() {
                    args[i] = sorted[j];
                }
                let v = op.apply(&args, self.size);
                if back[v] == usize::MAX {
                    return Err(AlgebraError::ElementOutOfRange {
                        element: v,
                        size: m,
                    });
                }
                table.push(back[v]);
                if !increment(&mut idx, m) {
                    break;
                }
            }
            ops.push(OperationTable {
                symbol: op.symbol.clone(),
                arity: op.arity,
                table,
            });
        }
        FiniteAlgebra::new(format!("{}|{}", self.name, m), m, ops)
    }
}

/// Decode a base-`n` encoded power element, most-significant coordinate
/// first, into `out` (length `k`).
#[inline]
pub fn decode(mut value: usize, n: usize, k: usize, out: &mut [usize]) {
    debug_assert_eq!(out.len(), k);
    for i in (0..k).rev() {
        out[i] = value % n;
        value /= n;
    }
    debug_assert_eq!(value, 0);
}

/// Encode coordinates into a base-`n` power element, most-significant first.
#[inline]
pub fn encode(coords: &[usize], n: usize) -> usize {
    coords.iter().fold(0, |acc, &c| acc * n + c)
}

/// Advance a mixed-radix counter with uniform radix; false when wrapped.
#[inline]
pub(crate) fn increment(digits: &mut [usize], radix: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < radix {
            return true;
        }
        *d = 0;
    }
    false
}

/// A three-variable term over an algebra's operation symbols.
///
/// Variable indices 0, 1, 2 stand for x, y, z.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(usize),
    App(String, Vec<Term>),
}

pub const VAR_NAMES: [&str; 3] = ["x", "y", "z"];

impl Term {
    pub fn x() -> Term {
        Term::Var(0)
    }
    pub fn y() -> Term {
        Term::Var(1)
    }
    pub fn z() -> Term {
        Term::Var(2)
    }

    pub fn app(symbol: impl Into<String>, args: Vec<Term>) -> Term {
        Term::App(symbol.into(), args)
    }

    /// Renders the term in the S-expression certificate syntax:
    /// variables as `x`/`y`/`z`, applications as `(symbol a b …)`.
    pub fn to_sexpr(&self) -> String {
        let mut s = String::new();
        self.write_sexpr(&mut s);
        s
    }

    fn write_sexpr(&self, out: &mut String) {
        match self {
            Term::Var(i) => out.push_str(VAR_NAMES[*i]),
            Term::App(sym, args) => {
                out.push('(');
                out.push_str(sym);
                for a in args {
                    out.push(' ');
                    a.write_sexpr(out);
                }
                out.push(')');
            }
        }
    }
}

/// Evaluate `t` in `A` under an assignment for x, y, z. Bottom-up via the
/// operation tables.
pub fn eval_term(
    a: &FiniteAlgebra,
    t: &Term,
    assignment: (usize, usize, usize),
) -> Result<usize, AlgebraError> {
    let vars = [assignment.0, assignment.1, assignment.2];
    for &v in &vars {
        if v >= a.size() {
            return Err(AlgebraError::ElementOutOfRange {
                element: v,
                size: a.size(),
            });
        }
    }
    eval_rec(a, t, &vars)
}

fn eval_rec(a: &FiniteAlgebra, t: &Term, vars: &[usize; 3]) -> Result<usize, AlgebraError> {
    match t {
        Term::Var(i) => {
            if *i >= 3 {
                return Err(AlgebraError::BadVariable(*i));
            }
            Ok(vars[*i])
        }
        Term::App(sym, args) => {
            let op = a
                .op(sym)
                .ok_or_else(|| AlgebraError::UnknownSymbol(sym.clone()))?;
            if op.arity != args.len() {
                return Err(AlgebraError::ArityMismatch {
                    symbol: sym.clone(),
                    expected: op.arity,
                    found: args.len(),
                });
            }
            let mut vals = Vec::with_capacity(args.len());
            for arg in args {
                vals.push(eval_rec(a, arg, vars)?);
            }
            Ok(op.apply(&vals, a.size()))
        }
    }
}

/// Parse the algebra text format:
///
/// ```text
/// algebra <name>
/// size <n>
/// op <symbol> <arity>
/// <n^arity whitespace-separated entries, row-major>
/// ```
pub fn parse_algebra(input: &str) -> Result<FiniteAlgebra, ParseError> {
    let mut sc = Scanner::new(input);
    sc.expect_word("algebra")?;
    let (_, name) = sc.expect_token("algebra name")?;
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
        let count = size.checked_pow(arity as u32).ok_or_else(|| {
            ParseError::new(sc.line(), format!("table for arity {arity} does not fit memory"))
        })?;
        let mut table = Vec::with_capacity(count);
        for _ in 0..count {
            let (line, tok) = sc.expect_token("table entry")?;
            let v: usize = tok
                .parse()
                .map_err(|_| ParseError::new(line, format!("expected table entry, found `{tok}`")))?;
            if v >= size {
                return Err(ParseError::new(
                    line,
                    format!("table entry {v} out of range for size {size}"),
                ));
            }
            table.push(v);
        }
        ops.push((symbol.to_string(), arity, table, sc.line()));
    }
    let tables = ops
        .iter()
        .map(|(s, k, t, _)| OperationTable {
            symbol: s.clone(),
            arity: *k,
            table: t.clone(),
        })
        .collect();
    FiniteAlgebra::new(name, size, tables)
        .map_err(|e| ParseError::new(1, format!("invalid algebra: {e}")))
}

/// Serialize in the algebra text format; `parse_algebra` round-trips this
/// bit-exactly.
pub fn serialize_algebra(a: &FiniteAlgebra) -> String {
    let mut out = String::new();
    writeln!(out, "algebra {}", a.name()).unwrap();
    writeln!(out, "size {}", a.size()).unwrap();
    for op in a.ops() {
        writeln!(out, "op {} {}", op.symbol, op.arity).unwrap();
        if op.arity == 0 {
            writeln!(out, "{}", op.table[0]).unwrap();
        } else {
            for row in op.table.chunks(a.size()) {
                let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                writeln!(out, "{}", line.join(" ")).unwrap();
            }
        }
    }
    out
}
