use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use nalgebra::DMatrix;

use crate::linalg::ensure_hermitian;
use crate::{CMatrix, Complex64, Error, Result};

/// One coefficient of an affine symmetric matrix map. `var == None` is the
/// constant term. Only the upper triangle is stored (`row <= col`); the
/// mirror entry is implied.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LmiEntry {
    pub row: usize,
    pub col: usize,
    pub var: Option<usize>,
    pub value: f64,
}

/// `F(x) = F_0 + Σ x_i F_i ⪰ 0` for real symmetric `F_i` of a fixed size.
#[derive(Clone, Debug, PartialEq)]
pub struct LmiBlock {
    size: usize,
    entries: Vec<LmiEntry>,
}

impl LmiBlock {
    pub fn new(size: usize) -> Self {
        Self {
            size,
            entries: Vec::new(),
        }
    }

    /// Adds `value` at `(row, col)` and its mirror. Zero values are dropped.
    pub fn push(&mut self, row: usize, col: usize, var: Option<usize>, value: f64) {
        if value == 0.0 {
            return;
        }
        let (row, col) = if row <= col { (row, col) } else { (col, row) };
        self.entries.push(LmiEntry { row, col, var, value });
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn entries(&self) -> &[LmiEntry] {
        &self.entries
    }

    /// Dense `F_0 + Σ x_i F_i`.
    pub fn evaluate(&self, x: &[f64]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.size, self.size);
        for e in &self.entries {
            let v = match e.var {
                None => e.value,
                Some(i) => e.value * x[i],
            };
            m[(e.row, e.col)] += v;
            if e.row != e.col {
                m[(e.col, e.row)] += v;
            }
        }
        m
    }
}

/// Complex Hermitian affine map, realized as a real block through the
/// embedding `H = A + jB  ↦  [[A, -B], [B, A]]`.
#[derive(Clone, Debug, Default)]
pub struct HermitianLmi {
    size: usize,
    entries: Vec<(usize, usize, Option<usize>, Complex64)>,
}

impl HermitianLmi {
    pub fn new(size: usize) -> Self {
        Self {
            size,
            entries: Vec::new(),
        }
    }

    /// Adds `value` at `(row, col)` and `conj(value)` at `(col, row)`.
    /// Diagonal values must be real.
    pub fn push(&mut self, row: usize, col: usize, var: Option<usize>, value: Complex64) {
        if row <= col {
            self.entries.push((row, col, var, value));
        } else {
            self.entries.push((col, row, var, value.conj()));
        }
    }

    pub fn to_real_block(&self) -> LmiBlock {
        let n = self.size;
        let mut block = LmiBlock::new(2 * n);
        for &(i, j, var, z) in &self.entries {
            block.push(i, j, var, z.re);
            block.push(i + n, j + n, var, z.re);
            if i != j {
                block.push(i, j + n, var, -z.im);
                block.push(j, i + n, var, z.im);
            }
        }
        block
    }
}

/// Real symmetric embedding `[[Re H, -Im H], [Im H, Re H]]` of a Hermitian
/// matrix. Each eigenvalue of `H` appears twice in the result.
pub fn embed_hermitian(h: &CMatrix) -> Result<DMatrix<f64>> {
    ensure_hermitian(h, "embedded matrix")?;
    let n = h.nrows();
    Ok(DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let (i, j) = (r % n, c % n);
        let z = (h[(i, j)] + h[(j, i)].conj()) * 0.5;
        match (r < n, c < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    }))
}

/// Minimize `c·x` subject to block LMIs and per-variable bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct SdpProblem {
    objective: Vec<f64>,
    blocks: Vec<LmiBlock>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl SdpProblem {
    pub fn new(num_vars: usize) -> Self {
        Self {
            objective: vec![0.0; num_vars],
            blocks: Vec::new(),
            lower: vec![f64::NEG_INFINITY; num_vars],
            upper: vec![f64::INFINITY; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn set_objective(&mut self, var: usize, coeff: f64) {
        self.objective[var] = coeff;
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, x)| c * x).sum()
    }

    pub fn add_block(&mut self, block: LmiBlock) -> usize {
        self.blocks.push(block);
        self.blocks.len() - 1
    }

    pub fn blocks(&self) -> &[LmiBlock] {
        &self.blocks
    }

    pub fn set_bounds(&mut self, var: usize, lo: f64, hi: f64) {
        self.lower[var] = lo;
        self.upper[var] = hi;
    }

    pub fn bounds(&self, var: usize) -> (f64, f64) {
        (self.lower[var], self.upper[var])
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if let Some(c) = self.objective.iter().find(|c| !c.is_finite()) {
            return Err(Error::invalid(format!("objective coefficient {c} is not finite")));
        }
        for i in 0..n {
            let (lo, hi) = (self.lower[i], self.upper[i]);
            if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(Error::invalid(format!("variable {i} has bounds [{lo}, {hi}]")));
            }
        }
        let mut used = vec![false; n];
        for (b, block) in self.blocks.iter().enumerate() {
            if block.size == 0 {
                return Err(Error::invalid(format!("block {b} is empty")));
            }
            for e in &block.entries {
                if e.col >= block.size {
                    return Err(Error::invalid(format!(
                        "entry ({}, {}) outside block {b} of size {}",
                        e.row, e.col, block.size
                    )));
                }
                if !e.value.is_finite() {
                    return Err(Error::invalid(format!("block {b} has a non-finite coefficient")));
                }
                if let Some(v) = e.var {
                    if v >= n {
                        return Err(Error::invalid(format!("block {b} references variable {v} of {n}")));
                    }
                    used[v] = true;
                }
            }
        }
        for i in 0..n {
            let bounded = self.lower[i].is_finite() && self.upper[i].is_finite();
            if !used[i] && !bounded && self.objective[i] != 0.0 {
                return Err(Error::invalid(format!("variable {i} is unconstrained")));
            }
        }
        Ok(())
    }

    /// Sparse text form. Lines are
    ///
    /// ```text
    /// vars <n>
    /// objective <c_1> ... <c_n>
    /// bound <var> <lo> <hi>          (1-based var, only for finite bounds)
    /// block <b> <size>               (1-based block)
    /// <b> <i> <j> <var> <coeff>      (1-based; var 0 is the constant term)
    /// ```
    ///
    /// `#` starts a comment. Entries list the upper triangle only.
    pub fn to_sparse_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# sparse SDP: minimize c.x s.t. F_b(x) >= 0, lo <= x <= hi");
        let _ = writeln!(out, "vars {}", self.num_vars());
        out.push_str("objective");
        for c in &self.objective {
            let _ = write!(out, " {c:e}");
        }
        out.push('\n');
        for i in 0..self.num_vars() {
            let (lo, hi) = (self.lower[i], self.upper[i]);
            if lo.is_finite() || hi.is_finite() {
                let _ = writeln!(out, "bound {} {lo:e} {hi:e}", i + 1);
            }
        }
        for (b, block) in self.blocks.iter().enumerate() {
            let _ = writeln!(out, "block {} {}", b + 1, block.size);
            for e in &block.entries {
                let var = e.var.map_or(0, |v| v + 1);
                let _ = writeln!(out, "{} {} {} {} {:e}", b + 1, e.row + 1, e.col + 1, var, e.value);
            }
        }
        out
    }

    pub fn from_sparse_text(text: &str) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse { line, message };
        let mut problem: Option<SdpProblem> = None;
        for (ln, raw) in text.lines().enumerate() {
            let line = ln + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let fields: Vec<&str> = body.split_whitespace().collect();
            let num = |s: &str| s.parse::<f64>().map_err(|_| err(line, format!("bad number {s:?}")));
            let idx = |s: &str| s.parse::<usize>().map_err(|_| err(line, format!("bad index {s:?}")));
            match fields[0] {
                "vars" => {
                    if fields.len() != 2 {
                        return Err(err(line, "expected `vars <n>`".into()));
                    }
                    problem = Some(SdpProblem::new(idx(fields[1])?));
                }
                keyword => {
                    let p = problem
                        .as_mut()
                        .ok_or_else(|| err(line, "`vars` must come first".into()))?;
                    match keyword {
                        "objective" => {
                            if fields.len() != p.num_vars() + 1 {
                                return Err(err(line, "objective length does not match vars".into()));
                            }
                            for (i, f) in fields[1..].iter().enumerate() {
                                p.objective[i] = num(f)?;
                            }
                        }
                        "bound" => {
                            if fields.len() != 4 {
                                return Err(err(line, "expected `bound <var> <lo> <hi>`".into()));
                            }
                            let v = idx(fields[1])?;
                            if v == 0 || v > p.num_vars() {
                                return Err(err(line, format!("variable {v} out of range")));
                            }
                            p.set_bounds(v - 1, num(fields[2])?, num(fields[3])?);
                        }
                        "block" => {
                            if fields.len() != 3 {
                                return Err(err(line, "expected `block <b> <size>`".into()));
                            }
                            let b = idx(fields[1])?;
                            if b != p.blocks.len() + 1 {
                                return Err(err(line, format!("block {b} declared out of order")));
                            }
                            p.blocks.push(LmiBlock::new(idx(fields[2])?));
                        }
                        _ => {
                            if fields.len() != 5 {
                                return Err(err(line, "expected `<b> <i> <j> <var> <coeff>`".into()));
                            }
                            let (b, i, j, v) = (idx(fields[0])?, idx(fields[1])?, idx(fields[2])?, idx(fields[3])?);
                            let value = num(fields[4])?;
                            if b == 0 || b > p.blocks.len() || i == 0 || j == 0 {
                                return Err(err(line, "indices are 1-based and blocks must be declared".into()));
                            }
                            if v > p.num_vars() {
                                return Err(err(line, format!("variable {v} out of range")));
                            }
                            let var = if v == 0 { None } else { Some(v - 1) };
                            p.blocks[b - 1].push(i - 1, j - 1, var, value);
                        }
                    }
                }
            }
        }
        let p = problem.ok_or_else(|| err(0, "missing `vars` line".into()))?;
        p.validate()?;
        Ok(p)
    }
}
