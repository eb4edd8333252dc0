//! Lattice models as skew paths: realified particle-hole symmetric Hamiltonians.
//!
//! Complex matrices are pairs `(re, im)` of real matrices. A real structure
//! `C v = U v̄` with `U Ū = I` fixes a real subspace `H_ℝ`, and every complex
//! operator commuting with `C` restricts to a real matrix on it.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use crate::clifford::{CliffordRep, Signature};
use crate::error::{invalid, Result};
use crate::flow::SkewPath;
use crate::linalg::{eye, kron, max_abs, orthonormalize, Mat};

#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    pub re: Mat,
    pub im: Mat,
}

impl CMat {
    pub fn new(re: Mat, im: Mat) -> Self {
        assert_eq!(re.shape(), im.shape(), "real and imaginary parts differ in shape");
        CMat { re, im }
    }

    pub fn real(re: Mat) -> Self {
        let im = Mat::zeros(re.nrows(), re.ncols());
        CMat { re, im }
    }

    pub fn imag(im: Mat) -> Self {
        let re = Mat::zeros(im.nrows(), im.ncols());
        CMat { re, im }
    }

    pub fn zeros(p: usize, q: usize) -> Self {
        CMat::real(Mat::zeros(p, q))
    }

    pub fn identity(n: usize) -> Self {
        CMat::real(eye(n))
    }

    pub fn nrows(&self) -> usize {
        self.re.nrows()
    }

    pub fn conj(&self) -> Self {
        CMat::new(self.re.clone(), -&self.im)
    }

    pub fn adjoint(&self) -> Self {
        CMat::new(self.re.transpose(), -self.im.transpose())
    }

    /// Multiplication by `i`.
    pub fn times_i(&self) -> Self {
        CMat::new(-&self.im, self.re.clone())
    }

    pub fn scale(&self, re: f64, im: f64) -> Self {
        CMat::new(
            &self.re * re - &self.im * im,
            &self.re * im + &self.im * re,
        )
    }

    pub fn kron(&self, other: &CMat) -> Self {
        CMat::new(
            kron(&self.re, &other.re) - kron(&self.im, &other.im),
            kron(&self.re, &other.im) + kron(&self.im, &other.re),
        )
    }

    /// `[[Re, −Im], [Im, Re]]` acting on stacked `(re; im)`.
    pub fn realified(&self) -> Mat {
        let (p, q) = (self.re.nrows(), self.re.ncols());
        let mut out = Mat::zeros(2 * p, 2 * q);
        out.view_mut((0, 0), (p, q)).copy_from(&self.re);
        out.view_mut((0, q), (p, q)).copy_from(&(-&self.im));
        out.view_mut((p, 0), (p, q)).copy_from(&self.im);
        out.view_mut((p, q), (p, q)).copy_from(&self.re);
        out
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.re).max(max_abs(&self.im))
    }
}

impl Add for &CMat {
    type Output = CMat;
    fn add(self, o: &CMat) -> CMat {
        CMat::new(&self.re + &o.re, &self.im + &o.im)
    }
}

impl Sub for &CMat {
    type Output = CMat;
    fn sub(self, o: &CMat) -> CMat {
        CMat::new(&self.re - &o.re, &self.im - &o.im)
    }
}

impl Mul for &CMat {
    type Output = CMat;
    fn mul(self, o: &CMat) -> CMat {
        CMat::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }
}

impl Neg for &CMat {
    type Output = CMat;
    fn neg(self) -> CMat {
        CMat::new(-&self.re, -&self.im)
    }
}

/// `C v = U v̄` with the orthonormal basis of its fixed space in stacked coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct RealStructure {
    u: CMat,
    basis: Mat,
}

impl RealStructure {
    /// For each standard basis vector `e`, keep `e + Ce` and `i(e − Ce)` in order,
    /// orthonormalized, dropping directions below `1e−8`.
    pub fn new(u: CMat) -> Result<Self> {
        let n = u.nrows();
        let invol = &(&u * &u.conj()) - &CMat::identity(n);
        if invol.max_abs() > 1e-10 || u.re.ncols() != n {
            return invalid(format!(
                "U Ubar must equal I for an involution (residual {:.2e})",
                invol.max_abs()
            ));
        }
        let mut cand = Mat::zeros(2 * n, 2 * n);
        for k in 0..n {
            // C e_k is column k of U.
            let (cr, ci) = (u.re.column(k), u.im.column(k));
            for i in 0..n {
                let e = if i == k { 1.0 } else { 0.0 };
                cand[(i, 2 * k)] = e + cr[i];
                cand[(n + i, 2 * k)] = ci[i];
                // i (e − Ce) = (ci, e − cr) in stacked form.
                cand[(i, 2 * k + 1)] = ci[i];
                cand[(n + i, 2 * k + 1)] = e - cr[i];
            }
        }
        let basis = orthonormalize(&cand, 1e-8);
        if basis.ncols() != n {
            return invalid(format!(
                "fixed space has real dimension {}, expected {n}",
                basis.ncols()
            ));
        }
        Ok(RealStructure { u, basis })
    }

    /// Plain complex conjugation on `ℂⁿ`.
    pub fn conjugation(n: usize) -> Self {
        Self::new(CMat::identity(n)).expect("identity is an involution")
    }

    pub fn n(&self) -> usize {
        self.u.nrows()
    }

    pub fn u(&self) -> &CMat {
        &self.u
    }

    /// Columns: orthonormal real basis of `H_ℝ` in stacked `(re; im)` coordinates.
    pub fn basis(&self) -> &Mat {
        &self.basis
    }

    /// `‖U Ā Ū − A‖`, zero exactly when `A` commutes with `C`.
    pub fn commutation_residual(&self, a: &CMat) -> f64 {
        (&(&(&self.u * &a.conj()) * &self.u.conj()) - a).max_abs()
    }
}

/// Matrix of `A|_{H_ℝ}` in the realification basis.
pub fn realify(rs: &RealStructure, a: &CMat) -> Result<Mat> {
    if a.nrows() != rs.n() || a.re.ncols() != rs.n() {
        return invalid("operator dimension does not match the real structure");
    }
    let res = rs.commutation_residual(a);
    if res > 1e-10 * a.max_abs().max(1.0) {
        return invalid(format!("operator does not commute with C (residual {res:.2e})"));
    }
    Ok(rs.basis.transpose() * a.realified() * &rs.basis)
}

fn ring_shift(n: usize) -> Mat {
    let mut s = Mat::zeros(n, n);
    for k in 0..n {
        s[((k + 1) % n, k)] = 1.0;
    }
    s
}

/// `ν₁ν₀*`.
fn flux_bond(n: usize) -> Mat {
    let mut b = Mat::zeros(n, n);
    b[(1, 0)] = 1.0;
    b
}

/// `M = ½[[1, i], [i, −1]]`.
fn hop_matrix() -> CMat {
    CMat::new(
        Mat::from_row_slice(2, 2, &[0.5, 0.0, 0.0, -0.5]),
        Mat::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0]),
    )
}

/// Bond correction `B(α)` so that `M + B(α)` is the flux-threaded hopping on bond (0,1).
fn bond_matrix(alpha: f64) -> CMat {
    let (c, s) = ((PI * alpha).cos(), (PI * alpha).sin());
    // e^{−iπα} − 1 = (c − 1) − i s, e^{iπα} − 1 = (c − 1) + i s.
    let (mr, mi) = (c - 1.0, -s);
    let (pr, pi) = (c - 1.0, s);
    let re = Mat::from_row_slice(2, 2, &[0.5 * mr, -0.5 * pi, -0.5 * mi, -0.5 * pr]);
    let im = Mat::from_row_slice(2, 2, &[0.5 * mi, 0.5 * pr, 0.5 * mr, -0.5 * pi]);
    CMat::new(re, im)
}

/// `Ĥ_α = Ŝ_α + Ŝ_α*` with `Ŝ_α = S ⊗ X ⊗ M + ν₁ν₀* ⊗ X ⊗ B(α)` on `ℂ^N ⊗ ℝ^d ⊗ ℂ²`.
fn kitaev_hamiltonian(n_sites: usize, orbital: &Mat, alpha: f64) -> CMat {
    let s = CMat::real(kron(&ring_shift(n_sites), orbital));
    let nu = CMat::real(kron(&flux_bond(n_sites), orbital));
    let sh = &s.kron(&hop_matrix()) + &nu.kron(&bond_matrix(alpha));
    &sh + &sh.adjoint()
}

fn check_ring(n_sites: usize) -> Result<()> {
    if n_sites < 3 {
        return invalid(format!("ring length N = {n_sites} must be at least 3"));
    }
    Ok(())
}

/// Particle-hole conjugation `C = 𝔠 ∘ (I ⊗ K₂)` on `ℂ^d ⊗ ℂ²`.
fn particle_hole(d: usize) -> Result<RealStructure> {
    RealStructure::new(CMat::real(kron(&eye(d), &crate::clifford::k2())))
}

/// Kitaev ring with `μ = 0`, `w = −1` and flux `α` through bond (0,1): the path
/// `α ↦ realify(i Ĥ_α)` on `ℝ^{2N}` with empty context.
pub fn kitaev_path(n_sites: usize) -> Result<SkewPath> {
    check_ring(n_sites)?;
    let rs = particle_hole(n_sites)?;
    let ctx = CliffordRep::trivial(2 * n_sites);
    let one = eye(1);
    // Validate once so that the closure cannot fail.
    realify(&rs, &kitaev_hamiltonian(n_sites, &one, 0.0).times_i())?;
    Ok(SkewPath::new(ctx, format!("kitaev N={n_sites}"), move |a| {
        realify(&rs, &kitaev_hamiltonian(n_sites, &one, a).times_i())
            .expect("i H commutes with C for every flux")
    }))
}

/// Complex Kitaev Hamiltonian `Ĥ_α` on `ℂ^{2N}`.
pub fn kitaev_hamiltonian_at(n_sites: usize, alpha: f64) -> Result<CMat> {
    check_ring(n_sites)?;
    Ok(kitaev_hamiltonian(n_sites, &eye(1), alpha))
}

fn check_flux_module(v: &CliffordRep) -> Result<()> {
    if v.sig().s == 0 {
        return invalid("the flux module needs at least one skew generator");
    }
    let report = crate::clifford::check_relations(v, crate::clifford::CONSTRUCTION_TOL)?;
    if !report.is_clean() {
        return invalid(format!("invalid module: {report}"));
    }
    Ok(())
}

/// Context `I ⊗ E_i`, `I ⊗ F_k` (k ≤ s) and the last generator of a Cl_{r,s+1} module.
fn split_module(v: &CliffordRep, outer: usize) -> Result<(CliffordRep, Mat)> {
    let s = v.sig().s - 1;
    let id = eye(outer);
    let e = v.e().iter().map(|g| kron(&id, g)).collect();
    let f = v.f()[..s].iter().map(|g| kron(&id, g)).collect();
    let ctx = CliffordRep::new(outer * v.n(), e, f)?;
    Ok((ctx, v.f()[s].clone()))
}

/// Threaded ring `X_α = ½(S_α + S_αᵀ) − μ I` with bond (0,1) weighted by `cos πα` and
/// `μ = (1 + cos(π/N))/2`. Exactly one eigenvalue of `X_α` crosses from `+` to `−`.
pub fn flux_ring(n_sites: usize, alpha: f64) -> Mat {
    let mut s = ring_shift(n_sites);
    s[(1, 0)] = (PI * alpha).cos();
    let mu = 0.5 * (1.0 + (PI / n_sites as f64).cos());
    (&s + s.transpose()) * 0.5 - eye(n_sites) * mu
}

/// Flux insertion carrying a Cl_{r,s+1} module `V`: `T_α = X_α ⊗ F_{s+1}` on
/// `ℓ²(ℤ_N) ⊗ V`, one copy of `V` per site. Its flow is `[V]`.
pub fn flux_path(v: &CliffordRep, n_sites: usize) -> Result<SkewPath> {
    check_ring(n_sites)?;
    check_flux_module(v)?;
    let (ctx, last) = split_module(v, n_sites)?;
    Ok(SkewPath::new(
        ctx,
        format!("flux {} N={n_sites}", v.sig()),
        move |a| kron(&flux_ring(n_sites, a), &last),
    ))
}

/// Two-orbital flux model: the Kitaev Hamiltonian tensored with `F_{s+1}`, realified
/// under `C = 𝔠 ∘ (I ⊗ K₂)`. At the flux endpoints the pair kernel is `V ⊕ V^op`,
/// so its class vanishes.
pub fn flux_path_two_orbital(v: &CliffordRep, n_sites: usize) -> Result<SkewPath> {
    check_ring(n_sites)?;
    check_flux_module(v)?;
    let d = v.n();
    let s = v.sig().s - 1;
    let rs = particle_hole(n_sites * d)?;
    let lift = |g: &Mat| -> Result<Mat> {
        let op = CMat::real(kron(&kron(&eye(n_sites), g), &eye(2)));
        realify(&rs, &op)
    };
    let e = v.e().iter().map(lift).collect::<Result<Vec<_>>>()?;
    let f = v.f()[..s].iter().map(lift).collect::<Result<Vec<_>>>()?;
    let ctx = CliffordRep::with_tolerance(2 * n_sites * d, e, f, 1e-10)?;
    let last = v.f()[s].clone();
    realify(&rs, &kitaev_hamiltonian(n_sites, &last, 0.0).times_i())?;
    Ok(SkewPath::new(
        ctx,
        format!("flux two-orbital {} N={n_sites}", v.sig()),
        move |a| {
            realify(&rs, &kitaev_hamiltonian(n_sites, &last, a).times_i())
                .expect("i H commutes with C for every flux")
        },
    ))
}

/// Standard quaternionic structure `T = Ω ∘ 𝔠` with `Ω = I ⊗ L₁` on `ℂⁿ`, `n` even.
pub fn quaternionic_omega(n: usize) -> Result<Mat> {
    if n == 0 || !n.is_multiple_of(2) {
        return invalid(format!("quaternionic structure needs even dimension, got {n}"));
    }
    Ok(kron(&eye(n / 2), &crate::clifford::l1()))
}

type HamiltonianFn = dyn Fn(f64) -> CMat + Send + Sync;

/// Class AII path: `H = diag(h, −h̄)` realified under `C(v₁, v₂) = (v̄₂, v̄₁)`, with
/// context `F₁ = realify([[0, Ω], [Ω, 0]])`, `F₂ = realify(i[[0, −Ω], [Ω, 0]])`.
///
/// `h` must commute with `T = Ω ∘ 𝔠`, i.e. `Ω h̄ = h Ω`; this is checked at the endpoints
/// and midpoint.
pub fn aii_path(
    n: usize,
    h: impl Fn(f64) -> CMat + Send + Sync + 'static,
) -> Result<SkewPath> {
    let omega = CMat::real(quaternionic_omega(n)?);
    for t in [0.0, 0.5, 1.0] {
        let ht = h(t);
        if ht.nrows() != n {
            return invalid(format!("h({t}) has dimension {}, expected {n}", ht.nrows()));
        }
        let herm = (&ht - &ht.adjoint()).max_abs();
        let tr = (&(&omega * &ht.conj()) - &(&ht * &omega)).max_abs();
        if herm > 1e-10 || tr > 1e-10 {
            return invalid(format!(
                "h({t}) must be self-adjoint and commute with T (residuals {herm:.2e}, {tr:.2e})"
            ));
        }
    }
    let mut swap = Mat::zeros(2 * n, 2 * n);
    swap.view_mut((0, n), (n, n)).copy_from(&eye(n));
    swap.view_mut((n, 0), (n, n)).copy_from(&eye(n));
    let rs = RealStructure::new(CMat::real(swap))?;
    let block = |a: &Mat, b: &Mat| {
        let mut m = Mat::zeros(2 * n, 2 * n);
        m.view_mut((0, n), (n, n)).copy_from(a);
        m.view_mut((n, 0), (n, n)).copy_from(b);
        m
    };
    let om = &omega.re;
    let f1 = realify(&rs, &CMat::real(block(om, om)))?;
    let f2 = realify(&rs, &CMat::imag(block(&(-om), om)))?;
    let ctx = CliffordRep::with_tolerance(2 * n, Vec::new(), vec![f1, f2], 1e-10)?;
    let h: Box<HamiltonianFn> = Box::new(h);
    let nambu = move |t: f64| {
        let ht = h(t);
        let mut big = CMat::zeros(2 * n, 2 * n);
        big.re.view_mut((0, 0), (n, n)).copy_from(&ht.re);
        big.im.view_mut((0, 0), (n, n)).copy_from(&ht.im);
        let hb = -&ht.conj();
        big.re.view_mut((n, n), (n, n)).copy_from(&hb.re);
        big.im.view_mut((n, n), (n, n)).copy_from(&hb.im);
        big
    };
    realify(&rs, &nambu(0.0).times_i())?;
    Ok(SkewPath::new(ctx, format!("aii n={n}"), move |t| {
        realify(&rs, &nambu(t).times_i()).expect("i H commutes with C")
    }))
}

/// `h` realified as a real symmetric `2n × 2n` matrix.
pub fn realified_hermitian(h: &CMat) -> Mat {
    h.realified()
}

/// The three demonstration paths of the quaternionic example, as `(label, n, h)`.
pub fn aii_demos() -> Vec<(&'static str, usize, Box<HamiltonianFn>)> {
    let ramp = |n: usize| move |t: f64| CMat::real(eye(n) * (2.0 * t - 1.0));
    vec![
        ("ramp", 4, Box::new(ramp(4)) as Box<HamiltonianFn>),
        ("constant", 4, Box::new(|_t: f64| CMat::real(eye(4)))),
        (
            "block ramp",
            8,
            Box::new(|t: f64| {
                let mut d = eye(8);
                for i in 0..4 {
                    d[(i, i)] = 2.0 * t - 1.0;
                }
                CMat::real(d)
            }),
        ),
    ]
}

/// Signature of the flux context for a Cl_{r,s+1} module.
pub fn flux_context_signature(v: &CliffordRep) -> Signature {
    let sig = v.sig();
    Signature::new(sig.r, sig.s.saturating_sub(1))
}
