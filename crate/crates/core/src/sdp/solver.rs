//! Infeasible-start primal-dual path-following interior point method with
//! Nesterov-Todd scaling and a Mehrotra predictor-corrector step.
//!
//! The problem is handled in the form
//!
//! ```text
//! minimize c·x   s.t.  S = F_0 + Σ x_i F_i,  S ⪰ 0
//! maximize -<F_0, Y>   s.t.  <F_i, Y> = c_i,  Y ⪰ 0
//! ```
//!
//! with every bound turned into a 1 x 1 block. Before iterating, variables
//! are rescaled so each one's largest LMI coefficient is 1, every block is
//! divided by its largest entry and the objective by its largest
//! coefficient. The returned point is mapped back and checked against the
//! original problem by [`verify`].

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SVD};

use super::problem::SdpProblem;
use super::verify::{verify, Verification};
use crate::linalg::symmetric_eigenvalues;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    MaxIter,
    NumericalFailure,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SdpOptions {
    pub tol_feas: f64,
    pub tol_gap: f64,
    pub max_iter: usize,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            tol_feas: 1e-7,
            tol_gap: 1e-7,
            max_iter: 200,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Residuals {
    /// Smallest eigenvalue of each LMI block at the returned point, divided
    /// by `max(1, max |F_b(x)|)`.
    pub min_eigenvalues: Vec<f64>,
    /// Largest bound violation before clamping, relative to `max(1, |bound|)`.
    pub bound_violation: f64,
    /// `<S, Y> / (1 + |primal| + |dual|)` on the scaled problem.
    pub relative_gap: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdpSolution {
    pub x: Vec<f64>,
    pub objective_value: f64,
    pub status: SdpStatus,
    pub residuals: Residuals,
    pub iterations: usize,
}

/// Symmetric coefficient matrix of one variable inside one block, with both
/// triangles listed.
struct Coef {
    var: usize,
    entries: Vec<(usize, usize, f64)>,
}

struct Block {
    size: usize,
    f0: DMatrix<f64>,
    coefs: Vec<Coef>,
}

impl Block {
    fn new(size: usize) -> Self {
        Self {
            size,
            f0: DMatrix::zeros(size, size),
            coefs: Vec::new(),
        }
    }

    fn add(&mut self, row: usize, col: usize, var: Option<usize>, value: f64) {
        match var {
            None => {
                self.f0[(row, col)] += value;
                if row != col {
                    self.f0[(col, row)] += value;
                }
            }
            Some(v) => {
                let pos = match self.coefs.iter().position(|c| c.var == v) {
                    Some(p) => p,
                    None => {
                        self.coefs.push(Coef { var: v, entries: Vec::new() });
                        self.coefs.len() - 1
                    }
                };
                let entries = &mut self.coefs[pos].entries;
                entries.push((row, col, value));
                if row != col {
                    entries.push((col, row, value));
                }
            }
        }
    }

    fn scale(&mut self, s: f64) {
        self.f0 *= s;
        for c in &mut self.coefs {
            for e in &mut c.entries {
                e.2 *= s;
            }
        }
    }

    fn max_abs(&self) -> f64 {
        let mut m = self.f0.amax();
        for c in &self.coefs {
            for e in &c.entries {
                m = m.max(e.2.abs());
            }
        }
        m
    }

    /// `Σ x_i F_i` (no constant term).
    fn linear(&self, x: &[f64]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.size, self.size);
        for c in &self.coefs {
            let xi = x[c.var];
            if xi != 0.0 {
                for &(r, col, v) in &c.entries {
                    m[(r, col)] += v * xi;
                }
            }
        }
        m
    }

    fn inner(coef: &Coef, m: &DMatrix<f64>) -> f64 {
        coef.entries.iter().map(|&(r, c, v)| v * m[(c, r)]).sum()
    }
}

struct Scaled {
    blocks: Vec<Block>,
    c: Vec<f64>,
    col_scale: Vec<f64>,
    f0_norm: f64,
    c_norm: f64,
}

fn scale_problem(problem: &SdpProblem) -> Scaled {
    let n = problem.num_vars();
    let mut col_max = vec![0.0_f64; n];
    for block in problem.blocks() {
        for e in block.entries() {
            if let Some(v) = e.var {
                col_max[v] = col_max[v].max(e.value.abs());
            }
        }
    }
    let col_scale: Vec<f64> = (0..n)
        .map(|i| {
            if col_max[i] > 0.0 {
                1.0 / col_max[i]
            } else {
                let (lo, hi) = problem.bounds(i);
                let mut m = 1.0_f64;
                if lo.is_finite() {
                    m = m.max(lo.abs());
                }
                if hi.is_finite() {
                    m = m.max(hi.abs());
                }
                m
            }
        })
        .collect();

    let mut blocks = Vec::new();
    for block in problem.blocks() {
        let mut b = Block::new(block.size());
        for e in block.entries() {
            let v = match e.var {
                Some(i) => e.value * col_scale[i],
                None => e.value,
            };
            b.add(e.row, e.col, e.var, v);
        }
        let m = b.max_abs();
        if m > 0.0 {
            b.scale(1.0 / m);
        }
        blocks.push(b);
    }
    for i in 0..n {
        let (lo, hi) = problem.bounds(i);
        let s = col_scale[i];
        if lo.is_finite() {
            let mut b = Block::new(1);
            b.add(0, 0, None, -lo / s);
            b.add(0, 0, Some(i), 1.0);
            b.scale(1.0 / (lo / s).abs().max(1.0));
            blocks.push(b);
        }
        if hi.is_finite() {
            let mut b = Block::new(1);
            b.add(0, 0, None, hi / s);
            b.add(0, 0, Some(i), -1.0);
            b.scale(1.0 / (hi / s).abs().max(1.0));
            blocks.push(b);
        }
    }
    let mut c: Vec<f64> = (0..n).map(|i| problem.objective()[i] * col_scale[i]).collect();
    let cmax = c.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if cmax > 0.0 {
        c.iter_mut().for_each(|v| *v /= cmax);
    }
    let f0_norm = blocks.iter().fold(0.0_f64, |m, b| m.max(b.f0.norm()));
    let c_norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    Scaled {
        blocks,
        c,
        col_scale,
        f0_norm,
        c_norm,
    }
}

/// Per-block Nesterov-Todd scaling: `G^T Y G = G^{-1} S G^{-T} = diag(λ)`.
struct NtScaling {
    g: DMatrix<f64>,
    ginv: DMatrix<f64>,
    winv: DMatrix<f64>,
    lambda: DVector<f64>,
    ls: DMatrix<f64>,
    ly: DMatrix<f64>,
}

fn nt_scaling(s: &DMatrix<f64>, y: &DMatrix<f64>) -> Option<NtScaling> {
    let ls = Cholesky::new(s.clone())?.unpack();
    let ly = Cholesky::new(y.clone())?.unpack();
    let svd = SVD::new(ly.transpose() * &ls, true, true);
    let u = svd.u?;
    let vt = svd.v_t?;
    let lambda = svd.singular_values;
    if lambda.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
        return None;
    }
    let inv_sqrt = lambda.map(|l| 1.0 / l.sqrt());
    let g = &ls * vt.transpose() * DMatrix::from_diagonal(&inv_sqrt);
    let ginv = DMatrix::from_diagonal(&inv_sqrt) * u.transpose() * ly.transpose();
    let winv = ginv.transpose() * &ginv;
    Some(NtScaling {
        g,
        ginv,
        winv,
        lambda,
        ls,
        ly,
    })
}

fn sym(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// Largest `α` with `L L^T + α D ⪰ 0`, or infinity.
fn max_step(l: &DMatrix<f64>, d: &DMatrix<f64>) -> f64 {
    let x = match l.solve_lower_triangular(d) {
        Some(x) => x,
        None => return 0.0,
    };
    let m = match l.solve_lower_triangular(&x.transpose()) {
        Some(m) => m,
        None => return 0.0,
    };
    let ev = symmetric_eigenvalues(&m);
    let lo = ev.first().copied().unwrap_or(0.0);
    if lo >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lo
    }
}

struct Direction {
    dy: DVector<f64>,
    ds: Vec<DMatrix<f64>>,
    dz: Vec<DMatrix<f64>>,
}

struct Iterate {
    y: Vec<f64>,
    s: Vec<DMatrix<f64>>,
    z: Vec<DMatrix<f64>>,
}

struct Measures {
    pobj: f64,
    dobj: f64,
    mu: f64,
    rel_gap: f64,
    pinf: f64,
    dinf: f64,
    rp: Vec<DMatrix<f64>>,
    rd: Vec<f64>,
}

fn measure(sc: &Scaled, it: &Iterate) -> Measures {
    let n = sc.c.len();
    let mut rp = Vec::with_capacity(sc.blocks.len());
    let mut rd: Vec<f64> = sc.c.iter().map(|c| -c).collect();
    let mut dobj = 0.0;
    let mut sz = 0.0;
    let mut dim = 0usize;
    let mut rp2 = 0.0;
    for (b, block) in sc.blocks.iter().enumerate() {
        let r = &block.f0 + block.linear(&it.y) - &it.s[b];
        rp2 += r.norm_squared();
        rp.push(r);
        for coef in &block.coefs {
            rd[coef.var] += Block::inner(coef, &it.z[b]);
        }
        dobj -= block.f0.dot(&it.z[b]);
        sz += it.s[b].dot(&it.z[b]);
        dim += block.size;
    }
    let pobj: f64 = (0..n).map(|i| sc.c[i] * it.y[i]).sum();
    let rd_norm = rd.iter().map(|v| v * v).sum::<f64>().sqrt();
    Measures {
        pobj,
        dobj,
        mu: sz / dim as f64,
        rel_gap: sz / (1.0 + pobj.abs() + dobj.abs()),
        pinf: rp2.sqrt() / (1.0 + sc.f0_norm),
        dinf: rd_norm / (1.0 + sc.c_norm),
        rp,
        rd,
    }
}

fn schur_matrix(sc: &Scaled, nt: &[NtScaling], n: usize) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(n, n);
    for (b, block) in sc.blocks.iter().enumerate() {
        let w = &nt[b].winv;
        for (ci, fi) in block.coefs.iter().enumerate() {
            if fi.entries.len() <= 16 {
                for fj in &block.coefs[ci..] {
                    let mut acc = 0.0;
                    for &(a, bb, v) in &fi.entries {
                        for &(c, d, v2) in &fj.entries {
                            acc += v * v2 * w[(bb, c)] * w[(d, a)];
                        }
                    }
                    h[(fi.var, fj.var)] += acc;
                    if fi.var != fj.var {
                        h[(fj.var, fi.var)] += acc;
                    }
                }
            } else {
                let mut m = DMatrix::zeros(block.size, block.size);
                for &(a, bb, v) in &fi.entries {
                    let ca = w.column(a);
                    let rb = w.row(bb);
                    m.ger(v, &ca, &rb.transpose(), 1.0);
                }
                for fj in &block.coefs[ci..] {
                    let acc = Block::inner(fj, &m);
                    h[(fi.var, fj.var)] += acc;
                    if fi.var != fj.var {
                        h[(fj.var, fi.var)] += acc;
                    }
                }
            }
        }
    }
    h
}

enum Kind {
    Chol(Cholesky<f64, Dyn>),
    Lu(nalgebra::LU<f64, Dyn, Dyn>),
}

/// Factorization of the Schur complement after symmetric diagonal
/// equilibration, with a small diagonal shift if Cholesky fails. Solves are
/// refined against the unshifted matrix.
struct Factor {
    h: DMatrix<f64>,
    d: DVector<f64>,
    kind: Kind,
}

impl Factor {
    fn new(h: &DMatrix<f64>) -> Self {
        let d = h.diagonal().map(|v| if v > 0.0 { 1.0 / v.sqrt() } else { 1.0 });
        let hs = DMatrix::from_fn(h.nrows(), h.ncols(), |i, j| h[(i, j)] * d[i] * d[j]);
        let kind = Self::factor(&hs);
        Self { h: h.clone(), d, kind }
    }

    fn factor(hs: &DMatrix<f64>) -> Kind {
        if let Some(c) = Cholesky::new(hs.clone()) {
            return Kind::Chol(c);
        }
        let mut reg = 1e-14;
        for _ in 0..6 {
            let mut hr = hs.clone();
            for i in 0..hr.nrows() {
                hr[(i, i)] += reg;
            }
            if let Some(c) = Cholesky::new(hr) {
                return Kind::Chol(c);
            }
            reg *= 100.0;
        }
        Kind::Lu(hs.clone().lu())
    }

    fn raw_solve(&self, rhs: &DVector<f64>) -> Option<DVector<f64>> {
        let b = rhs.component_mul(&self.d);
        let x = match &self.kind {
            Kind::Chol(c) => c.solve(&b),
            Kind::Lu(l) => l.solve(&b)?,
        };
        Some(x.component_mul(&self.d))
    }

    fn solve(&self, rhs: &DVector<f64>) -> Option<DVector<f64>> {
        let mut x = self.raw_solve(rhs)?;
        for _ in 0..3 {
            let r = rhs - &self.h * &x;
            if r.amax() <= 1e-15 * rhs.amax() {
                break;
            }
            x += self.raw_solve(&r)?;
        }
        x.iter().all(|v| v.is_finite()).then_some(x)
    }
}

/// Solves for the direction given per-block scaled complementarity targets
/// `rc` (so that `Λ∘(ΔS̃ + ΔỸ) = rc`).
fn direction(
    sc: &Scaled,
    nt: &[NtScaling],
    m: &Measures,
    rc: &[DMatrix<f64>],
    factor: &Factor,
) -> Option<Direction> {
    let n = sc.c.len();
    let mut rhs = DVector::from_iterator(n, m.rd.iter().copied());
    let mut e_mats = Vec::with_capacity(sc.blocks.len());
    for (b, block) in sc.blocks.iter().enumerate() {
        let ntb = &nt[b];
        let lam = &ntb.lambda;
        let t = DMatrix::from_fn(block.size, block.size, |i, j| 2.0 * rc[b][(i, j)] / (lam[i] + lam[j]));
        let e = sym(ntb.ginv.transpose() * t * &ntb.ginv - &ntb.winv * &m.rp[b] * &ntb.winv);
        for coef in &block.coefs {
            rhs[coef.var] += Block::inner(coef, &e);
        }
        e_mats.push(e);
    }
    let dy = factor.solve(&rhs)?;
    let dyv: Vec<f64> = dy.iter().copied().collect();
    let mut ds = Vec::with_capacity(sc.blocks.len());
    let mut dz = Vec::with_capacity(sc.blocks.len());
    for (b, block) in sc.blocks.iter().enumerate() {
        let df = block.linear(&dyv);
        let w = &nt[b].winv;
        dz.push(sym(&e_mats[b] - w * &df * w));
        ds.push(&m.rp[b] + df);
    }
    Some(Direction { dy, ds, dz })
}

fn step_lengths(it: &Iterate, nt: &[NtScaling], d: &Direction) -> (f64, f64) {
    let mut ap = f64::INFINITY;
    let mut ad = f64::INFINITY;
    for b in 0..it.s.len() {
        ap = ap.min(max_step(&nt[b].ls, &d.ds[b]));
        ad = ad.min(max_step(&nt[b].ly, &d.dz[b]));
    }
    (ap, ad)
}

/// Least-squares projection of `Z` onto `A*(Z) = c`. Near the boundary the
/// Schur solves lose the dual residual to cancellation while the primal
/// point is already converged; the projected `Z` is used only if it stays
/// PSD (relative to its scale), so the certificate stays a real one.
fn polish_dual(sc: &Scaled, it: &Iterate, m: &Measures, tol: f64) -> Option<Vec<DMatrix<f64>>> {
    let n = sc.c.len();
    let mut gram = DMatrix::zeros(n, n);
    for block in &sc.blocks {
        for fi in &block.coefs {
            let mut dense = DMatrix::zeros(block.size, block.size);
            for &(r, c, v) in &fi.entries {
                dense[(r, c)] += v;
            }
            for fj in &block.coefs {
                gram[(fi.var, fj.var)] += Block::inner(fj, &dense);
            }
        }
    }
    let rd = DVector::from_column_slice(&m.rd);
    let u = match Cholesky::new(gram.clone()) {
        Some(c) => c.solve(&rd),
        None => gram.lu().solve(&rd)?,
    };
    let mut z = Vec::with_capacity(sc.blocks.len());
    for (b, block) in sc.blocks.iter().enumerate() {
        let mut zb = it.z[b].clone();
        for coef in &block.coefs {
            for &(r, c, v) in &coef.entries {
                zb[(c, r)] -= u[coef.var] * v;
            }
        }
        let zb = sym(zb);
        let eig = symmetric_eigenvalues(&zb);
        let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0_f64), |(lo, hi), &e| (lo.min(e), hi.max(e.abs())));
        if !(lo >= -tol * hi.max(1.0)) {
            return None;
        }
        z.push(zb);
    }
    Some(z)
}

fn finish(problem: &SdpProblem, sc: &Scaled, it: &Iterate, m: &Measures, iterations: usize, status: SdpStatus, opts: &SdpOptions) -> SdpSolution {
    let x: Vec<f64> = it.y.iter().zip(&sc.col_scale).map(|(y, s)| y * s).collect();
    let Verification {
        x,
        min_eigenvalues,
        bound_violation,
    } = verify(problem, &x);
    let mut rel_gap = m.rel_gap;
    let mut dinf = m.dinf;
    if status != SdpStatus::Infeasible && dinf > opts.tol_feas && m.pinf <= opts.tol_feas {
        if let Some(z) = polish_dual(sc, it, m, opts.tol_feas) {
            let polished = measure(sc, &Iterate { y: it.y.clone(), s: it.s.clone(), z });
            if polished.dinf < dinf {
                rel_gap = (polished.pobj - polished.dobj).abs() / (1.0 + polished.pobj.abs() + polished.dobj.abs());
                dinf = polished.dinf;
            }
        }
    }
    let residuals = Residuals {
        min_eigenvalues,
        bound_violation,
        relative_gap: rel_gap,
        primal_infeasibility: m.pinf,
        dual_infeasibility: dinf,
    };
    let certified = residuals.min_eigenvalues.iter().all(|&e| e >= -opts.tol_feas)
        && residuals.bound_violation <= opts.tol_feas
        && residuals.relative_gap <= opts.tol_gap
        && residuals.dual_infeasibility <= opts.tol_feas;
    let status = match status {
        SdpStatus::Infeasible => SdpStatus::Infeasible,
        _ if certified => SdpStatus::Optimal,
        SdpStatus::Optimal => SdpStatus::NumericalFailure,
        s => s,
    };
    SdpSolution {
        objective_value: problem.objective_value(&x),
        x,
        status,
        residuals,
        iterations,
    }
}

/// Solves `problem`. A returned [`SdpStatus::Optimal`] means the point passed
/// the independent residual check in [`verify`] at the requested tolerances.
pub fn solve(problem: &SdpProblem, opts: &SdpOptions) -> crate::Result<SdpSolution> {
    problem.validate()?;
    let sc = scale_problem(problem);
    let n = sc.c.len();

    let mut it = Iterate {
        y: vec![0.0; n],
        s: Vec::new(),
        z: Vec::new(),
    };
    for block in &sc.blocks {
        let nb = block.size as f64;
        let mut fmax = block.f0.norm();
        let mut zfac = 0.0_f64;
        for coef in &block.coefs {
            let fn_ = coef.entries.iter().map(|e| e.2 * e.2).sum::<f64>().sqrt();
            fmax = fmax.max(fn_);
            zfac = zfac.max((1.0 + sc.c[coef.var].abs()) / (1.0 + fn_));
        }
        let xi = 10.0_f64.max(nb.sqrt()).max(fmax);
        let eta = 10.0_f64.max(nb.sqrt()).max(nb * zfac);
        it.s.push(DMatrix::identity(block.size, block.size) * xi);
        it.z.push(DMatrix::identity(block.size, block.size) * eta);
    }

    let mut inner_tol = 0.1;
    let mut stalls = 0;
    let mut m = measure(&sc, &it);
    for iter in 0..opts.max_iter {
        if m.pinf <= inner_tol * opts.tol_feas && m.dinf <= inner_tol * opts.tol_feas && m.rel_gap <= inner_tol * opts.tol_gap {
            let sol = finish(problem, &sc, &it, &m, iter, SdpStatus::Optimal, opts);
            if sol.status == SdpStatus::Optimal || inner_tol < 1e-5 {
                return Ok(sol);
            }
            inner_tol *= 0.1;
        }
        if m.dobj > 0.0 {
            let cert: f64 = m.rd.iter().zip(&sc.c).map(|(r, c)| (r + c) * (r + c)).sum::<f64>().sqrt();
            if cert / m.dobj < opts.tol_feas && m.dobj > 1e3 * (1.0 + m.pobj.abs().min(1e12)) {
                return Ok(finish(problem, &sc, &it, &m, iter, SdpStatus::Infeasible, opts));
            }
        }

        let nt: Option<Vec<NtScaling>> = it.s.iter().zip(&it.z).map(|(s, z)| nt_scaling(s, z)).collect();
        let nt = match nt {
            Some(nt) => nt,
            None => return Ok(finish(problem, &sc, &it, &m, iter, SdpStatus::NumericalFailure, opts)),
        };
        let h = schur_matrix(&sc, &nt, n);
        let factor = Factor::new(&h);

        // predictor
        let rc_aff: Vec<DMatrix<f64>> = nt.iter().map(|t| DMatrix::from_diagonal(&t.lambda.map(|l| -l * l))).collect();
        let aff = match direction(&sc, &nt, &m, &rc_aff, &factor) {
            Some(d) => d,
            None => return Ok(finish(problem, &sc, &it, &m, iter, SdpStatus::NumericalFailure, opts)),
        };
        let (ap, ad) = step_lengths(&it, &nt, &aff);
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let mut sz_aff = 0.0;
        let mut dim = 0;
        for b in 0..it.s.len() {
            let s = &it.s[b] + &aff.ds[b] * ap;
            let z = &it.z[b] + &aff.dz[b] * ad;
            sz_aff += s.dot(&z);
            dim += sc.blocks[b].size;
        }
        let mu_aff = sz_aff / dim as f64;
        let sigma = (mu_aff / m.mu).clamp(0.0, 1.0).powi(3);

        // corrector
        let rc: Vec<DMatrix<f64>> = nt
            .iter()
            .enumerate()
            .map(|(b, t)| {
                let ds_s = &t.ginv * &aff.ds[b] * t.ginv.transpose();
                let dz_s = t.g.transpose() * &aff.dz[b] * &t.g;
                let prod = sym(&ds_s * &dz_s);
                let mut r = -prod;
                for i in 0..t.lambda.len() {
                    r[(i, i)] += sigma * m.mu - t.lambda[i] * t.lambda[i];
                }
                r
            })
            .collect();
        let dir = match direction(&sc, &nt, &m, &rc, &factor) {
            Some(d) => d,
            None => return Ok(finish(problem, &sc, &it, &m, iter, SdpStatus::NumericalFailure, opts)),
        };
        let (ap, ad) = step_lengths(&it, &nt, &dir);
        let gamma = 0.9 + 0.09 * ap.min(ad).min(1.0);
        let ap = (gamma * ap).min(1.0);
        let ad = (gamma * ad).min(1.0);
        if ap < 1e-10 && ad < 1e-10 {
            stalls += 1;
            if stalls >= 3 {
                return Ok(finish(problem, &sc, &it, &m, iter, SdpStatus::NumericalFailure, opts));
            }
        } else {
            stalls = 0;
        }
        for i in 0..n {
            it.y[i] += ap * dir.dy[i];
        }
        for b in 0..it.s.len() {
            it.s[b] = sym(&it.s[b] + &dir.ds[b] * ap);
            it.z[b] = sym(&it.z[b] + &dir.dz[b] * ad);
        }
        m = measure(&sc, &it);
    }
    Ok(finish(problem, &sc, &it, &m, opts.max_iter, SdpStatus::MaxIter, opts))
}
