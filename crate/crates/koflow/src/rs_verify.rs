//! Discretized check that the Clifford index of `D = A(x) ⊗ ω₁,₁ − d/dx ⊗ K₁` equals
//! the spectral flow of `A(x) = f(x) F_{s+1}`.
//!
//! Unknowns are laid out as grid ⊗ V ⊗ ℝ², index `(j · dim V + v) · 2 + c`.
//! The central difference admits a staggered doubler for every smooth zero mode; the
//! two are separated by the sign of the neighbour average `(u_{j+1} + u_{j−1}) / 2`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::abs_index::{abs_class, KOClass};
use crate::banded::Banded;
use crate::clifford::{k1, k2, l1, omega11, CliffordRep};
use crate::error::{invalid, Error, Result};
use crate::flow::{spectral_flow, FlowOptions, SkewPath};
use crate::linalg::{eye, kron, max_abs, orthonormalize, sym_eigen, Mat, SquareSvd};

pub type SwitchFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `f = 1` on `x ≤ 0`, `1 − 2x` on `[0, 1]`, `−1` on `x ≥ 1`.
pub fn linear_switch(x: f64) -> f64 {
    (1.0 - 2.0 * x).clamp(-1.0, 1.0)
}

#[derive(Clone)]
pub struct RSProblem {
    v: CliffordRep,
    f: SwitchFn,
    l: f64,
    m: usize,
}

impl fmt::Debug for RSProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RSProblem")
            .field("sig", &self.v.sig())
            .field("L", &self.l)
            .field("m", &self.m)
            .finish()
    }
}

/// Largest accepted operator dimension.
pub const MAX_DIM: usize = 1_000_000;

impl RSProblem {
    pub fn new(v: CliffordRep, l: f64, m: usize) -> Result<Self> {
        Self::with_switch(v, l, m, Arc::new(linear_switch))
    }

    pub fn with_switch(v: CliffordRep, l: f64, m: usize, f: SwitchFn) -> Result<Self> {
        if v.sig().s == 0 {
            return invalid("the module needs a skew generator to carry A(x)");
        }
        let report = crate::clifford::check_relations(&v, crate::clifford::CONSTRUCTION_TOL)?;
        if !report.is_clean() {
            return invalid(format!("invalid module: {report}"));
        }
        if !(l > 2.0) {
            return invalid(format!("half-length L = {l} must exceed 2"));
        }
        if m < MIN_GRID {
            return invalid(format!("grid size m = {m} must be at least {MIN_GRID}"));
        }
        let p = RSProblem { v, f, l, m };
        let n = p.dim();
        if n > MAX_DIM {
            return invalid(format!("operator dimension {n} exceeds {MAX_DIM}"));
        }
        if let Some(x) = p.grid().into_iter().find(|&x| !((p.f)(x).abs() <= 1.0)) {
            return invalid(format!("|f({x})| exceeds 1"));
        }
        Ok(p)
    }

    pub fn module(&self) -> &CliffordRep {
        &self.v
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn half_length(&self) -> f64 {
        self.l
    }

    pub fn h(&self) -> f64 {
        2.0 * self.l / (self.m - 1) as f64
    }

    pub fn dim(&self) -> usize {
        2 * self.v.n() * self.m
    }

    pub fn grid(&self) -> Vec<f64> {
        let h = self.h();
        (0..self.m).map(|j| -self.l + j as f64 * h).collect()
    }

    pub fn switch(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    fn carrier(&self) -> &Mat {
        self.v.f().last().expect("checked at construction")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Boundary {
    Dirichlet,
}

#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub matrix: Banded,
    pub h: f64,
    pub m: usize,
    pub dim_v: usize,
    pub boundary: Boundary,
}

impl DiscreteOperator {
    pub fn dim(&self) -> usize {
        self.matrix.n()
    }

    /// Sum of the lower and upper bandwidths.
    pub fn bandwidth(&self) -> usize {
        self.matrix.lower() + self.matrix.upper()
    }
}

/// Which Clifford normalization of the discrete operator to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Convention {
    /// `A ⊗ ω₁,₁ − d/dx ⊗ K₁` with generators `E ⊗ ω₁,₁`, `F_k ⊗ ω₁,₁`, `−I ⊗ L₁`.
    Standard,
    /// `A ⊗ K₁ + d/dx ⊗ K₂` with generators `E ⊗ K₁`, `F_k ⊗ K₁`, `I ⊗ L₁`.
    Swapped,
}

fn assemble(p: &RSProblem, conv: Convention) -> DiscreteOperator {
    let dv = p.v.n();
    let block = 2 * dv;
    // A diagonal derivative coupling stays at offset `block`; `K₂` mixes c across it.
    let band = match conv {
        Convention::Standard => block,
        Convention::Swapped => block + 1,
    };
    let n = p.dim();
    let h = p.h();
    let (local, deriv) = local_pieces(conv);
    let a_site = kron(p.carrier(), &local);
    let mut mat = Banded::zeros(n, band, band);
    for (j, x) in p.grid().into_iter().enumerate() {
        let fx = p.switch(x);
        let base = j * block;
        for a in 0..block {
            for b in 0..block {
                let v = a_site[(a, b)];
                if v != 0.0 {
                    mat.add(base + a, base + b, fx * v);
                }
            }
        }
        // (u_{j+1} − u_{j−1}) / 2h on every (v, c), mixed by `deriv` in c.
        for (nb, sign) in [(j + 1, 1.0), (j.wrapping_sub(1), -1.0)] {
            if nb >= p.m {
                continue;
            }
            for v in 0..dv {
                for c in 0..2 {
                    for c2 in 0..2 {
                        let w = deriv[(c, c2)];
                        if w != 0.0 {
                            mat.add(base + 2 * v + c, nb * block + 2 * v + c2, sign * w / (2.0 * h));
                        }
                    }
                }
            }
        }
    }
    DiscreteOperator {
        matrix: mat,
        h,
        m: p.m,
        dim_v: dv,
        boundary: Boundary::Dirichlet,
    }
}

/// `D = A(x_j) ⊗ ω₁,₁ − (central difference) ⊗ I ⊗ K₁` with zero padding.
pub fn assemble_rs_operator(p: &RSProblem) -> Result<DiscreteOperator> {
    Ok(assemble(p, Convention::Standard))
}

/// `D′ = A(x_j) ⊗ K₁ + (central difference) ⊗ I ⊗ K₂`.
pub fn assemble_swapped_operator(p: &RSProblem) -> Result<DiscreteOperator> {
    Ok(assemble(p, Convention::Swapped))
}

/// Site-local generators on `V ⊗ ℝ²` anticommuting with the discrete operator.
pub fn lifted_generators(v: &CliffordRep, conv: Convention) -> Result<CliffordRep> {
    let s = v.sig().s - 1;
    let (w, last) = match conv {
        Convention::Standard => (omega11(), -kron(&eye(v.n()), &l1())),
        Convention::Swapped => (k1(), kron(&eye(v.n()), &l1())),
    };
    let e = v.e().iter().map(|g| kron(g, &w)).collect();
    let mut f: Vec<Mat> = v.f()[..s].iter().map(|g| kron(g, &w)).collect();
    f.push(last);
    CliffordRep::new(2 * v.n(), e, f)
}

/// `(I_grid ⊗ G) x` for a site-local `G`.
fn apply_local(g: &Mat, x: &[f64]) -> Vec<f64> {
    let b = g.nrows();
    let mut out = vec![0.0; x.len()];
    for (blk_in, blk_out) in x.chunks(b).zip(out.chunks_mut(b)) {
        for i in 0..b {
            blk_out[i] = (0..b).map(|k| g[(i, k)] * blk_in[k]).sum();
        }
    }
    out
}

/// Largest entry of `D G + G D` over the lifted generators. Dense, for small grids.
pub fn equivariance_residual(op: &DiscreteOperator, gens: &CliffordRep) -> f64 {
    let dense = op.matrix.to_dense();
    let id = eye(op.m);
    gens.generators()
        .map(|g| {
            let big = kron(&id, g);
            max_abs(&(&dense * &big + &big * &dense))
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelReport {
    pub dim: usize,
    pub sigma_max: f64,
    pub threshold: f64,
    /// Smallest Ritz singular values, ascending.
    pub singular_values: Vec<f64>,
    /// `σ_next / σ_zero_max`, or `σ_min / threshold` for an empty cluster.
    pub gap_ratio: f64,
    pub iterations: usize,
    #[serde(skip)]
    pub basis: Mat,
}

fn column_vec(m: &Mat, j: usize) -> Vec<f64> {
    m.column(j).iter().copied().collect()
}

fn matvec_cols(op: &Banded, q: &Mat) -> Mat {
    let mut out = Mat::zeros(q.nrows(), q.ncols());
    for j in 0..q.ncols() {
        let y = op.matvec(&column_vec(q, j));
        out.set_column(j, &nalgebra::DVector::from_vec(y));
    }
    out
}

/// Largest singular value by power iteration on `DᵀD`.
fn sigma_max(op: &Banded, seed: u64) -> f64 {
    let t = op.transpose();
    let mut rng = crate::random::rng(seed);
    let mut x = column_vec(&crate::random::gaussian(&mut rng, op.n(), 1), 0);
    let mut est = 0.0;
    for _ in 0..300 {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= norm);
        let y = t.matvec(&op.matvec(&x));
        let next = x.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>().sqrt();
        x = y;
        if (next - est).abs() <= 1e-10 * next {
            return next;
        }
        est = next;
    }
    est
}

/// `R` of a thin QR factorization by modified Gram–Schmidt with reorthogonalization.
fn thin_r(w: &Mat) -> Mat {
    let p = w.ncols();
    let mut q = w.clone();
    let mut r = Mat::zeros(p, p);
    for j in 0..p {
        for _ in 0..2 {
            for i in 0..j {
                let c = q.column(i).dot(&q.column(j));
                r[(i, j)] += c;
                let qi = q.column(i).into_owned();
                q.column_mut(j).axpy(-c, &qi, 1.0);
            }
        }
        let nj = q.column(j).norm();
        r[(j, j)] = nj;
        if nj > 0.0 {
            q.column_mut(j).scale_mut(1.0 / nj);
        }
    }
    r
}

/// Smallest singular triplets by block subspace iteration on `(DᵀD)⁻¹` with
/// Rayleigh–Ritz on `D Q`.
pub fn smallest_singular(op: &DiscreteOperator, block: usize, seed: u64) -> Result<(Vec<f64>, Mat, usize)> {
    let a = &op.matrix;
    let n = a.n();
    let block = block.min(n);
    let lu = a.lu()?;
    let lut = a.transpose().lu()?;
    let mut rng = crate::random::rng(seed);
    let mut q = orthonormalize(&crate::random::gaussian(&mut rng, n, block), 1e-12);
    let mut prev: Vec<f64> = vec![f64::INFINITY; block];
    for it in 1..=500 {
        let mut y = Mat::zeros(n, block);
        for j in 0..q.ncols() {
            let z = lu.solve(&lut.solve(&column_vec(&q, j)));
            y.set_column(j, &nalgebra::DVector::from_vec(z));
        }
        q = orthonormalize(&y, 1e-14);
        if q.ncols() < block {
            return Err(Error::Numerical("subspace iteration lost rank".into()));
        }
        let w = matvec_cols(a, &q);
        let svd = SquareSvd::new(&thin_r(&w));
        let sv = svd.sigma.clone();
        q = &q * &svd.v;
        // Only the near-zero cluster and the first value above it are watched.
        let cut = sv.iter().take_while(|&&x| x < 1e-2 * sv[block - 1]).count();
        let watch = (cut + 1).min(block - 1);
        let converged = (0..watch).all(|i| {
            let (a, b) = (sv[i], prev[i]);
            let rel = if i < cut { 1e-9 } else { 1e-8 };
            (a - b).abs() <= rel * a.max(1e-12 * sv[block - 1])
        });
        prev = sv;
        if converged && it > 2 {
            return Ok((prev, q, it));
        }
    }
    Err(Error::Numerical("subspace iteration did not converge".into()))
}

/// Relative kernel threshold `σ < tol · σ_max`.
pub const RS_KERNEL_TOL: f64 = 1e-4;
/// Required gap ratio for the kernel cluster.
pub const RS_GAP: f64 = 100.0;
/// Smallest grid that resolves the profile on `[-L, L]`.
pub const MIN_GRID: usize = 200;

pub fn numeric_kernel(op: &DiscreteOperator, tol: f64) -> Result<KernelReport> {
    let block = (4 * op.dim_v + 4).max(8);
    let smax = sigma_max(&op.matrix, 17);
    let (sv, q, iterations) = smallest_singular(op, block, 29)?;
    let threshold = tol * smax;
    let dim = sv.iter().filter(|&&x| x < threshold).count();
    if dim == sv.len() {
        return Err(Error::AmbiguousKernel(format!(
            "all {dim} computed singular values are below the threshold; enlarge the block"
        )));
    }
    let gap_ratio = if dim == 0 {
        sv[0] / threshold
    } else {
        sv[dim] / sv[dim - 1]
    };
    if gap_ratio < RS_GAP {
        return Err(Error::AmbiguousKernel(format!(
            "kernel cluster of size {dim} has gap ratio {gap_ratio:.3e} below {RS_GAP}"
        )));
    }
    Ok(KernelReport {
        dim,
        sigma_max: smax,
        threshold,
        singular_values: sv,
        gap_ratio,
        iterations,
        basis: q.columns(0, dim).into_owned(),
    })
}

/// `(Avg u)_j = (u_{j+1} + u_{j−1}) / 2` with zero padding.
fn neighbour_average(x: &[f64], block: usize) -> Vec<f64> {
    let m = x.len() / block;
    let mut out = vec![0.0; x.len()];
    for j in 0..m {
        for k in 0..block {
            let up = if j + 1 < m { x[(j + 1) * block + k] } else { 0.0 };
            let dn = if j > 0 { x[(j - 1) * block + k] } else { 0.0 };
            out[j * block + k] = 0.5 * (up + dn);
        }
    }
    out
}

/// Splits a kernel basis into the smooth (`Avg > 0`) and staggered (`Avg < 0`) branches.
fn branch_split(z: &Mat, block: usize) -> (Mat, Mat) {
    let k = z.ncols();
    if k == 0 {
        return (z.clone(), z.clone());
    }
    let mut az = Mat::zeros(z.nrows(), k);
    for j in 0..k {
        az.set_column(j, &nalgebra::DVector::from_vec(neighbour_average(&column_vec(z, j), block)));
    }
    let eig = sym_eigen(&(z.transpose() * az));
    let pos: Vec<usize> = (0..k).filter(|&i| eig.values[i] > 0.0).collect();
    let neg: Vec<usize> = (0..k).filter(|&i| eig.values[i] <= 0.0).collect();
    (z * eig.columns(pos), z * eig.columns(neg))
}

/// Module of the site-local generators compressed onto the columns of `basis`.
fn kernel_module(gens: &CliffordRep, basis: &Mat) -> Result<CliffordRep> {
    let k = basis.ncols();
    let bt = basis.transpose();
    let comp = |g: &Mat| -> Result<Mat> {
        let mut gb = Mat::zeros(basis.nrows(), k);
        for j in 0..k {
            gb.set_column(j, &nalgebra::DVector::from_vec(apply_local(g, &column_vec(basis, j))));
        }
        let small = &bt * &gb;
        let res = max_abs(&(gb - basis * &small));
        if res > 1e-6 {
            return Err(Error::Numerical(format!(
                "kernel branch is not invariant under a lifted generator (residual {res:.3e})"
            )));
        }
        Ok(small)
    };
    let e = gens.e().iter().map(comp).collect::<Result<Vec<_>>>()?;
    let f = gens.f().iter().map(comp).collect::<Result<Vec<_>>>()?;
    CliffordRep::with_tolerance(k, e, f, 1e-6)
}

/// `ū(x) = exp(∫₀ˣ f)` by composite Simpson quadrature.
fn profile_envelope(f: &SwitchFn, x: f64) -> f64 {
    let steps = 64.max((x.abs() * 64.0) as usize) * 2;
    let h = x / steps as f64;
    let mut acc = f(0.0) + f(x);
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(i as f64 * h);
    }
    (acc * h / 3.0).exp()
}

/// Site-local pieces `(W, D)` of the operator `f(x) F ⊗ W + D d/dx`.
fn local_pieces(conv: Convention) -> (Mat, Mat) {
    match conv {
        Convention::Standard => (omega11(), -k1()),
        Convention::Swapped => (k1(), k2()),
    }
}

/// Orthonormal basis of `ū(x) w` over the `+1` eigenspace of `−(I ⊗ D)(F ⊗ W)`,
/// sampled on the grid. `D² = I` for both conventions.
pub fn analytic_kernel(p: &RSProblem, conv: Convention) -> Mat {
    let dv = p.v.n();
    let (w, d) = local_pieces(conv);
    let g = -(kron(&eye(dv), &d) * kron(p.carrier(), &w));
    let g = crate::linalg::sym_part(&g);
    let eig = sym_eigen(&g);
    let top: Vec<usize> = (0..2 * dv).filter(|&i| eig.values[i] > 0.0).collect();
    let fibre = eig.columns(top);
    let grid = p.grid();
    let mut cols = Mat::zeros(p.dim(), fibre.ncols());
    for (j, &x) in grid.iter().enumerate() {
        let u = profile_envelope(&p.f, x);
        for k in 0..fibre.ncols() {
            for a in 0..2 * dv {
                cols[(j * 2 * dv + a, k)] = u * fibre[(a, k)];
            }
        }
    }
    orthonormalize(&cols, 1e-10)
}

/// Sine of the largest principal angle between two column spans; `1` when ranks differ.
pub fn subspace_distance(a: &Mat, b: &Mat) -> f64 {
    if a.ncols() != b.ncols() {
        return 1.0;
    }
    if a.ncols() == 0 {
        return 0.0;
    }
    let sv = crate::linalg::singular_values(&(a.transpose() * b));
    let c = sv[0].min(1.0);
    (1.0 - c * c).max(0.0).sqrt()
}

#[derive(Debug, Clone, Serialize)]
pub struct RsReport {
    pub m: usize,
    pub half_length: f64,
    pub h: f64,
    pub dim: usize,
    pub bandwidth: usize,
    pub convention: Convention,
    /// Dimension of the smooth branch of the zero cluster.
    pub kernel_dim: usize,
    pub raw_cluster_dim: usize,
    pub doubler_dim: usize,
    pub kernel_class: KOClass,
    pub doubler_class: KOClass,
    pub flow_class: KOClass,
    pub module_class: KOClass,
    pub profile_error: f64,
    pub gap_ratio: f64,
    pub sigma_max: f64,
    pub cluster_singular_values: Vec<f64>,
    pub next_singular_value: Option<f64>,
    #[serde(skip)]
    pub grid: Vec<f64>,
    #[serde(skip)]
    pub kernel_basis: Mat,
}

impl RsReport {
    /// Kernel class, flow class and module class agree.
    pub fn classes_agree(&self) -> bool {
        self.kernel_class == self.flow_class && self.flow_class == self.module_class
    }
}

/// Path `t ↦ f(t) F_{s+1}` on `V` over the switching interval `[0, 1]`.
pub fn switching_path(p: &RSProblem) -> Result<SkewPath> {
    let v = &p.v;
    let s = v.sig().s - 1;
    let ctx = CliffordRep::new(v.n(), v.e().to_vec(), v.f()[..s].to_vec())?;
    let carrier = p.carrier().clone();
    let f = p.f.clone();
    Ok(SkewPath::new(ctx, "switching path", move |t| &carrier * f(t)))
}

pub fn verify_rs(p: &RSProblem) -> Result<RsReport> {
    verify_rs_with(p, Convention::Standard)
}

pub fn verify_rs_with(p: &RSProblem, conv: Convention) -> Result<RsReport> {
    let op = assemble(p, conv);
    let kr = numeric_kernel(&op, RS_KERNEL_TOL)?;
    let gens = lifted_generators(&p.v, conv)?;
    let (phys, doubler) = branch_split(&kr.basis, 2 * p.v.n());
    let kernel_class = abs_class(&kernel_module(&gens, &phys)?)?;
    let doubler_class = abs_class(&kernel_module(&gens, &doubler)?)?;
    let flow_class = spectral_flow(&switching_path(p)?, &FlowOptions::default())?;
    let module_class = abs_class(&p.v)?;
    let profile_error = subspace_distance(&analytic_kernel(p, conv), &phys);
    Ok(RsReport {
        m: p.m,
        half_length: p.l,
        h: p.h(),
        dim: op.dim(),
        bandwidth: op.bandwidth(),
        convention: conv,
        kernel_dim: phys.ncols(),
        raw_cluster_dim: kr.dim,
        doubler_dim: doubler.ncols(),
        kernel_class,
        doubler_class,
        flow_class,
        module_class,
        profile_error,
        gap_ratio: kr.gap_ratio,
        sigma_max: kr.sigma_max,
        cluster_singular_values: kr.singular_values[..kr.dim].to_vec(),
        next_singular_value: kr.singular_values.get(kr.dim).copied(),
        grid: p.grid(),
        kernel_basis: phys,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergencePoint {
    pub m: usize,
    pub largest_zero: f64,
    pub smallest_nonzero: f64,
}

/// Zero-cluster edge and first nonzero singular value for each grid size.
pub fn convergence_study(p: &RSProblem, ms: &[usize]) -> Result<Vec<ConvergencePoint>> {
    ms.iter()
        .map(|&m| {
            let q = RSProblem::with_switch(p.v.clone(), p.l, m, p.f.clone())?;
            let op = assemble(&q, Convention::Standard);
            let kr = numeric_kernel(&op, RS_KERNEL_TOL)?;
            Ok(ConvergencePoint {
                m,
                largest_zero: if kr.dim == 0 { 0.0 } else { kr.singular_values[kr.dim - 1] },
                smallest_nonzero: kr.singular_values[kr.dim],
            })
        })
        .collect()
}

/// Continuum gap estimate `min(|f(−L)|, |f(L)|)`.
pub fn continuum_gap(p: &RSProblem) -> f64 {
    p.switch(-p.l).abs().min(p.switch(p.l).abs())
}

/// Kernel profiles as CSV rows `x, components...`, one component per kernel vector and slot.
pub fn profiles_csv(report: &RsReport) -> String {
    let k = report.kernel_basis.ncols();
    let m = report.grid.len();
    if m == 0 {
        return String::new();
    }
    let block = report.kernel_basis.nrows() / m;
    let mut out = String::from("x");
    for c in 0..k {
        for b in 0..block {
            out.push_str(&format!(",u{c}_{b}"));
        }
    }
    out.push('\n');
    for (j, x) in report.grid.iter().enumerate() {
        out.push_str(&format!("{x}"));
        for c in 0..k {
            for b in 0..block {
                out.push_str(&format!(",{}", report.kernel_basis[(j * block + b, c)]));
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{irreducible_rep, Signature};
    use crate::linalg::singular_values;

    fn plane() -> CliffordRep {
        CliffordRep::new(2, Vec::new(), vec![l1()]).unwrap()
    }

    /// Dense `diag f(x_j) ⊗ F ⊗ W + C ⊗ I ⊗ D` with `C` the central difference.
    fn dense_oracle(p: &RSProblem, w: &Mat, d: &Mat) -> Mat {
        let m = p.m();
        let h = p.h();
        let f = p.module().f().last().unwrap().clone();
        let fx = Mat::from_diagonal(&nalgebra::DVector::from_vec(
            p.grid().iter().map(|&x| p.switch(x)).collect(),
        ));
        let mut c = Mat::zeros(m, m);
        for j in 0..m - 1 {
            c[(j, j + 1)] = 0.5 / h;
            c[(j + 1, j)] = -0.5 / h;
        }
        let id = eye(p.module().n());
        kron(&fx, &kron(&f, w)) + kron(&c, &kron(&id, d))
    }

    #[test]
    fn assembled_operators_match_the_dense_formula() {
        let p = RSProblem::new(plane(), 12.0, 200).unwrap();
        let std = assemble_rs_operator(&p).unwrap();
        let oracle = dense_oracle(&p, &omega11(), &(-k1()));
        assert_eq!(max_abs(&(std.matrix.to_dense() - &oracle)), 0.0);
        let sw = assemble_swapped_operator(&p).unwrap();
        let oracle = dense_oracle(&p, &k1(), &k2());
        assert_eq!(max_abs(&(sw.matrix.to_dense() - &oracle)), 0.0);
        assert_eq!(std.matrix.skew_residual(), 0.0);
        assert_eq!(sw.matrix.skew_residual(), 0.0);
    }

    #[test]
    fn lifted_generators_anticommute_with_the_operator() {
        let v = irreducible_rep(Signature::new(1, 2), None).unwrap();
        let p = RSProblem::new(v.clone(), 6.0, 200).unwrap();
        for conv in [Convention::Standard, Convention::Swapped] {
            let op = assemble(&p, conv);
            let gens = lifted_generators(&v, conv).unwrap();
            assert_eq!(equivariance_residual(&op, &gens), 0.0, "{conv:?}");
        }
    }

    #[test]
    fn subspace_iteration_matches_dense_singular_values() {
        let p = RSProblem::new(plane(), 6.0, 240).unwrap();
        let op = assemble_rs_operator(&p).unwrap();
        let kr = numeric_kernel(&op, RS_KERNEL_TOL).unwrap();
        let dense = singular_values(&op.matrix.to_dense());
        let smax = dense[dense.len() - 1];
        // Power iteration gives a lower estimate of the scale.
        assert!(kr.sigma_max <= smax * (1.0 + 1e-12) && kr.sigma_max > 0.99 * smax);
        // The zero cluster and the first value above it are resolved.
        for i in 0..=kr.dim {
            let (a, b) = (kr.singular_values[i], dense[i]);
            assert!((a - b).abs() < 1e-8 * smax, "sigma_{i}: {a:e} vs {b:e}");
        }
        let expect = dense.iter().filter(|&&x| x < RS_KERNEL_TOL * smax).count();
        assert_eq!(kr.dim, expect);
    }

    #[test]
    fn problems_are_validated() {
        assert!(RSProblem::new(plane(), 12.0, MIN_GRID - 1).is_err());
        assert!(RSProblem::new(plane(), 2.0, 400).is_err());
        let no_skew = CliffordRep::new(1, vec![eye(1)], Vec::new()).unwrap();
        assert!(RSProblem::new(no_skew, 12.0, 400).is_err());
    }

    #[test]
    fn envelope_integrates_the_switch() {
        // ∫₀ˣ −x' dx' = −x²/2 for the linear switch inside [−1, 1].
        let f: SwitchFn = Arc::new(|x| -x);
        for x in [-0.7, 0.3, 1.0] {
            assert!((profile_envelope(&f, x) - (-x * x / 2.0f64).exp()).abs() < 1e-12);
        }
        assert_eq!(
            [linear_switch(-3.0), linear_switch(0.0), linear_switch(0.5), linear_switch(2.0)],
            [1.0, 1.0, 0.0, -1.0]
        );
    }

    #[test]
    fn subspace_distance_of_equal_spans_is_zero() {
        let a = Mat::from_fn(6, 2, |i, j| if i == j { 1.0 } else { 0.0 });
        let r = crate::linalg::from_rows(&[&[0.6, -0.8], &[0.8, 0.6]]);
        assert!(subspace_distance(&a, &(&a * r)) < 1e-12);
        let b = Mat::from_fn(6, 2, |i, j| if i == j + 2 { 1.0 } else { 0.0 });
        assert!((subspace_distance(&a, &b) - 1.0).abs() < 1e-12);
    }
}
