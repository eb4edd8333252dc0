//! KO-valued spectral flow by the local formula and by the endpoint formula.
//!
//! The local formula sums pair indices of completed phases over a partition of
//! `[0, 1]`. The operator norm replaces the Calkin norm throughout.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::abs_index::{abs_class, KOClass};
use crate::clifford::{average_intertwiner, CliffordRep, RESTRICTION_TOL};
use crate::error::{invalid, Error, Result};
use crate::linalg::{
    eye, max_abs, op_norm, phase, polar_orthogonal, skew_part, sym_eigen, sym_function, Mat,
    SquareSvd,
};
use crate::pairs::{compress, pair_index, ComplexStructure};

type EvalFn = dyn Fn(f64) -> Mat + Send + Sync;

/// Path `t ↦ T_t` of skew matrices anticommuting with a fixed context.
#[derive(Clone)]
pub struct SkewPath {
    context: CliffordRep,
    eval: Arc<EvalFn>,
    label: String,
}

impl fmt::Debug for SkewPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SkewPath")
            .field("label", &self.label)
            .field("sig", &self.context.sig())
            .field("n", &self.context.n())
            .finish()
    }
}

/// Sample validation tolerance, relative to `max(1, ‖T‖)`.
pub const PATH_TOL: f64 = 1e-10;

impl SkewPath {
    pub fn new(
        context: CliffordRep,
        label: impl Into<String>,
        eval: impl Fn(f64) -> Mat + Send + Sync + 'static,
    ) -> Self {
        SkewPath {
            context,
            eval: Arc::new(eval),
            label: label.into(),
        }
    }

    pub fn context(&self) -> &CliffordRep {
        &self.context
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn n(&self) -> usize {
        self.context.n()
    }

    /// Sample at `t`, checking skewness and anticommutation.
    pub fn eval(&self, t: f64) -> Result<Mat> {
        let m = (self.eval)(t);
        let n = self.n();
        if m.nrows() != n || m.ncols() != n {
            return invalid(format!(
                "path '{}' returned {}x{} at t = {t}, expected {n}x{n}",
                self.label,
                m.nrows(),
                m.ncols()
            ));
        }
        let scale = max_abs(&m).max(1.0);
        let skew = max_abs(&(&m + m.transpose()));
        let anti = self
            .context
            .generators()
            .map(|g| max_abs(&(&m * g + g * &m)))
            .fold(0.0, f64::max);
        if skew > PATH_TOL * scale || anti > PATH_TOL * scale {
            return invalid(format!(
                "path '{}' at t = {t}: skew residual {skew:.2e}, anticommutator residual {anti:.2e}",
                self.label
            ));
        }
        Ok(m)
    }

    /// Raw sample without validation.
    pub fn sample(&self, t: f64) -> Mat {
        (self.eval)(t)
    }

    /// `self` on `[0, ½]` followed by `other` on `[½, 1]`.
    pub fn concat(&self, other: &SkewPath) -> Result<SkewPath> {
        if self.context != other.context {
            return invalid("concatenated paths need the same context");
        }
        let (a, b) = (self.eval.clone(), other.eval.clone());
        Ok(SkewPath::new(
            self.context.clone(),
            format!("{} * {}", self.label, other.label),
            move |t| {
                if t <= 0.5 {
                    a(2.0 * t)
                } else {
                    b(2.0 * t - 1.0)
                }
            },
        ))
    }

    pub fn reversed(&self) -> SkewPath {
        let a = self.eval.clone();
        SkewPath::new(self.context.clone(), format!("rev {}", self.label), move |t| {
            a(1.0 - t)
        })
    }

    /// Block-diagonal sum over the direct sum of contexts.
    pub fn direct_sum(&self, other: &SkewPath) -> Result<SkewPath> {
        let ctx = crate::clifford::direct_sum(&self.context, &other.context)?;
        let (a, b) = (self.eval.clone(), other.eval.clone());
        Ok(SkewPath::new(
            ctx,
            format!("{} + {}", self.label, other.label),
            move |t| crate::linalg::block_diag(&a(t), &b(t)),
        ))
    }

    /// Degree `(s + 2 − r) mod 8` of the flow for a Cl_{r,s} context.
    pub fn degree(&self) -> u8 {
        let sig = self.context.sig();
        (sig.s as i64 + 2 - sig.r as i64).rem_euclid(8) as u8
    }
}

/// How `complete_phase` fills in the kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Completion {
    /// Continuity hint, then the block `L₁` seed, then seeded random seeds.
    Canonical,
    /// Seeded random seeds only.
    Random(u64),
}

/// Kernel cluster of `T`: `σ ≤ 1e−9 · σ_max`.
pub const PHASE_KERNEL_REL: f64 = 1e-9;
/// Minimal ratio across a cluster boundary before it is widened.
const PHASE_GAP: f64 = 1e3;
/// Ratio that marks a candidate boundary when widening.
const WIDEN_GAP: f64 = 10.0;

pub fn complete_phase(t: &Mat, context: &CliffordRep) -> Result<ComplexStructure> {
    complete_phase_with(t, context, Completion::Canonical, None)
}

/// `J = T|T|⁻¹` off the kernel, completed on the kernel by an anticommuting
/// complex structure.
///
/// An ambiguous or obstructed cluster boundary is widened to the next spectral gap,
/// which replaces `T` by a finite-rank perturbation on the low-lying subspace.
pub fn complete_phase_with(
    t: &Mat,
    context: &CliffordRep,
    completion: Completion,
    hint: Option<&Mat>,
) -> Result<ComplexStructure> {
    let n = context.n();
    if t.nrows() != n || t.ncols() != n {
        return invalid("operator dimension does not match the context");
    }
    if n == 0 {
        return ComplexStructure::new(Mat::zeros(0, 0), context.clone());
    }
    let svd = SquareSvd::new(t);
    let sv = svd.sigma.clone();
    let smax = sv[n - 1];
    let base = sv.iter().filter(|&&x| x <= PHASE_KERNEL_REL * smax).count();

    let mut candidates = vec![base];
    candidates.extend((base + 1..=n).filter(|&k| k == n || sv[k] >= WIDEN_GAP * sv[k - 1].max(f64::MIN_POSITIVE)));
    candidates.dedup();

    let mut last_err = None;
    for &k in &candidates {
        if k == base && k > 0 && k < n && sv[k] < PHASE_GAP * sv[k - 1] {
            last_err = Some(Error::AmbiguousKernel(format!(
                "kernel cluster of size {k} ends at {:.3e}, next singular value {:.3e}",
                sv[k - 1],
                sv[k]
            )));
            continue;
        }
        match complete_on_split(context, &svd, k, completion, hint) {
            Ok(j) => return Ok(j),
            Err(e @ Error::Obstruction(_)) | Err(e @ Error::AmbiguousKernel(_)) => {
                last_err = Some(e);
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err.expect("at least one candidate"))
}

fn complete_on_split(
    context: &CliffordRep,
    svd: &SquareSvd,
    k: usize,
    completion: Completion,
    hint: Option<&Mat>,
) -> Result<ComplexStructure> {
    let n = context.n();
    if k == 0 {
        return ComplexStructure::new(skew_part(&svd.partial_phase(0)), context.clone());
    }
    // The whole space uses the identity basis.
    let kernel = if k == n {
        eye(n)
    } else {
        let eig = sym_eigen(&svd.kernel_projector(k));
        eig.columns(n - k..n)
    };
    let mut j = svd.partial_phase(k);
    let module = compress(context, &kernel, &[], RESTRICTION_TOL.max(1e-6))?;
    let class = abs_class(&module)?;
    if !class.is_zero() {
        return Err(Error::Obstruction(format!(
            "kernel of dimension {k} carries the nonzero class {class} and admits no anticommuting complex structure"
        )));
    }
    let jk = kernel_structure(&module, completion, hint.map(|h| kernel.transpose() * h * &kernel))?;
    j += &kernel * jk * kernel.transpose();
    let j = skew_part(&polar_orthogonal(&skew_part(&j)));
    ComplexStructure::new(j, context.clone())
}

/// Anticommuting complex structure on an unobstructed module.
fn kernel_structure(module: &CliffordRep, completion: Completion, hint: Option<Mat>) -> Result<Mat> {
    let k = module.n();
    let mut seeds: Vec<Mat> = Vec::new();
    let mut rng = crate::random::rng(match completion {
        Completion::Canonical => 0x5eed,
        Completion::Random(s) => s,
    });
    if completion == Completion::Canonical {
        if let Some(h) = hint {
            seeds.push(h);
        }
        let mut x0 = Mat::zeros(k, k);
        for b in 0..k / 2 {
            x0[(2 * b + 1, 2 * b)] = 1.0;
            x0[(2 * b, 2 * b + 1)] = -1.0;
        }
        seeds.push(x0);
    }
    for _ in 0..8 {
        seeds.push(skew_part(&crate::random::gaussian(&mut rng, k, k)));
    }
    for x in seeds {
        let y = skew_part(&average_intertwiner(module, module, &x, true)?);
        let sv = crate::linalg::singular_values(&y);
        let (lo, hi) = (sv[0], sv[k - 1]);
        if hi > 0.0 && lo > 1e-6 * hi {
            return Ok(skew_part(&phase(&y)));
        }
    }
    Err(Error::Numerical(
        "no invertible anticommuting seed found on the kernel".into(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowOptions {
    pub initial_segments: usize,
    pub max_depth: u32,
    /// Target bound on `‖J_a − J_b‖` per segment.
    pub bound: f64,
    /// Endpoints need smallest singular value above `inv_tol · max(1, ‖T‖)`.
    pub inv_tol: f64,
    pub completion: Completion,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            initial_segments: 16,
            max_depth: 20,
            bound: 0.9,
            inv_tol: 1e-8,
            completion: Completion::Canonical,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Segment {
    pub t0: f64,
    pub t1: f64,
    /// `‖J_{t0} − J_{t1}‖`.
    pub distance: f64,
    /// Bisection stopped at the depth cap with the distance still above the bound.
    pub jump: bool,
    pub kernel_dim: usize,
    pub class: KOClass,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowReport {
    pub class: KOClass,
    pub segments: Vec<Segment>,
}

impl FlowReport {
    /// Segments with a nonzero pair index.
    pub fn contributing(&self) -> impl Iterator<Item = &Segment> {
        self.segments.iter().filter(|s| !s.class.is_zero())
    }
}

fn check_endpoint(path: &SkewPath, t: f64, tol: f64) -> Result<Mat> {
    let m = path.eval(t)?;
    let sv = crate::linalg::singular_values(&m);
    let smin = sv.first().copied().unwrap_or(f64::INFINITY);
    let scale = sv.last().copied().unwrap_or(0.0).max(1.0);
    if smin <= tol * scale {
        return invalid(format!(
            "path '{}' is not invertible at t = {t} (smallest singular value {smin:.3e})",
            path.label()
        ));
    }
    Ok(m)
}

pub fn spectral_flow(path: &SkewPath, opts: &FlowOptions) -> Result<KOClass> {
    Ok(spectral_flow_report(path, opts)?.class)
}

/// Local formula `Σ_j ind(J_{t_{j−1}}, J_{t_j})`.
///
/// Segments are bisected while the phase distance exceeds `opts.bound`. A segment still
/// above the bound at `opts.max_depth` holds an isolated jump of the phase and its pair
/// index is taken as is.
pub fn spectral_flow_report(path: &SkewPath, opts: &FlowOptions) -> Result<FlowReport> {
    if opts.initial_segments == 0 {
        return invalid("at least one segment is required");
    }
    let ctx = path.context().clone();
    let t0 = check_endpoint(path, 0.0, opts.inv_tol)?;
    let t1 = check_endpoint(path, 1.0, opts.inv_tol)?;
    let j_start = ComplexStructure::new(phase(&t0), ctx.clone())?;
    let j_end = ComplexStructure::new(phase(&t1), ctx.clone())?;

    let sampler = Sampler {
        path,
        completion: opts.completion,
    };
    let m = opts.initial_segments;
    let mut points: Vec<(f64, ComplexStructure)> = vec![(0.0, j_start)];
    for i in 1..m {
        let t = i as f64 / m as f64;
        let prev = points.last().map(|p| p.1.j().clone());
        points.push(sampler.at(t, prev.as_ref())?);
    }
    points.push((1.0, j_end));

    let mut segments = Vec::new();
    let mut total = KOClass::zero(path.degree());
    for w in points.windows(2) {
        refine(&sampler, &w[0], &w[1], 0, opts, &mut segments, &mut total)?;
    }
    Ok(FlowReport {
        class: total,
        segments,
    })
}

struct Sampler<'a> {
    path: &'a SkewPath,
    completion: Completion,
}

impl Sampler<'_> {
    /// Completed phase at `t`, nudging the sample when the kernel cannot be completed.
    fn at(&self, t: f64, hint: Option<&Mat>) -> Result<(f64, ComplexStructure)> {
        let ctx = self.path.context();
        let mut first_err = None;
        for k in 0..9 {
            let step = 1e-7 * ((k + 1) / 2) as f64 * if k % 2 == 1 { 1.0 } else { -1.0 };
            let tt = if k == 0 { t } else { t + step };
            if tt <= 0.0 || tt >= 1.0 {
                continue;
            }
            let m = self.path.eval(tt)?;
            match complete_phase_with(&m, ctx, self.completion, hint) {
                Ok(j) => return Ok((tt, j)),
                Err(e @ Error::Obstruction(_))
                | Err(e @ Error::AmbiguousKernel(_))
                | Err(e @ Error::Numerical(_)) => {
                    first_err.get_or_insert(e);
                }
                Err(e) => return Err(e),
            }
        }
        Err(first_err.expect("at least one sample attempted"))
    }
}

fn refine(
    sampler: &Sampler,
    a: &(f64, ComplexStructure),
    b: &(f64, ComplexStructure),
    depth: u32,
    opts: &FlowOptions,
    segments: &mut Vec<Segment>,
    total: &mut KOClass,
) -> Result<()> {
    let distance = op_norm(&(a.1.j() - b.1.j()));
    if distance > opts.bound && depth < opts.max_depth {
        let mid = 0.5 * (a.0 + b.0);
        if mid > a.0 && mid < b.0 {
            if let Ok(m) = sampler.at(mid, Some(a.1.j())) {
                if m.0 > a.0 && m.0 < b.0 {
                    refine(sampler, a, &m, depth + 1, opts, segments, total)?;
                    return refine(sampler, &m, b, depth + 1, opts, segments, total);
                }
            }
        }
    }
    let pi = pair_index(&a.1, &b.1)?;
    *total = total.plus(&pi.class)?;
    segments.push(Segment {
        t0: a.0,
        t1: b.0,
        distance,
        jump: distance > opts.bound,
        kernel_dim: pi.kernel_dim(),
        class: pi.class,
    });
    Ok(())
}

/// `ind_{r,s+2}(J(T_0), J(T_1))`.
pub fn endpoint_flow(path: &SkewPath) -> Result<KOClass> {
    let opts = FlowOptions::default();
    let ctx = path.context().clone();
    let j0 = ComplexStructure::new(phase(&check_endpoint(path, 0.0, opts.inv_tol)?), ctx.clone())?;
    let j1 = ComplexStructure::new(phase(&check_endpoint(path, 1.0, opts.inv_tol)?), ctx)?;
    Ok(pair_index(&j0, &j1)?.class)
}

/// `Φ(T) = −F_s (I + T F_s)(I − T F_s)⁻¹` with `F_s` the last skew context generator.
pub fn cayley(t: &Mat, context: &CliffordRep) -> Result<Mat> {
    let fs = match context.f().last() {
        Some(f) => f,
        None => return invalid("the Cayley transform needs a skew context generator"),
    };
    let n = context.n();
    if t.nrows() != n || t.ncols() != n {
        return invalid("operator dimension does not match the context");
    }
    let tf = t * fs;
    let id = eye(n);
    let minus = &id - &tf;
    let sv = crate::linalg::singular_values(&minus);
    let cond = sv[n - 1] / sv[0];
    if !cond.is_finite() || cond > 1e12 {
        return Err(Error::Numerical(format!(
            "I - T F_s is ill-conditioned (condition number {cond:.3e})"
        )));
    }
    let inv = minus
        .try_inverse()
        .ok_or_else(|| Error::Numerical("I - T F_s is singular".into()))?;
    Ok(-(fs * (&id + &tf) * inv))
}

/// `Ψ(T) = T · min(1, |T|⁻¹)` by the functional calculus of `−T²`.
pub fn clamp_phase(t: &Mat) -> Mat {
    let g = sym_function(&(t.transpose() * t), |x| if x <= 1.0 { 1.0 } else { 1.0 / x.sqrt() });
    t * g
}

/// `n₋(h(0)) − n₋(h(1))` for a path of symmetric matrices.
pub fn classical_sf(h: &dyn Fn(f64) -> Mat) -> Result<i64> {
    let count = |t: f64| -> Result<i64> {
        let m = h(t);
        let asym = max_abs(&(&m - m.transpose()));
        if asym > 1e-10 * max_abs(&m).max(1.0) {
            return invalid(format!("h({t}) is not symmetric (residual {asym:.2e})"));
        }
        let e = sym_eigen(&m);
        let scale = e.values.iter().fold(1.0_f64, |a, x| a.max(x.abs()));
        if e.values.iter().any(|x| x.abs() <= 1e-10 * scale) {
            return invalid(format!("h({t}) is singular"));
        }
        Ok(e.values.iter().filter(|&&x| x < 0.0).count() as i64)
    };
    Ok(count(0.0)? - count(1.0)?)
}

/// Smallest `k` singular values at `samples + 1` uniform points.
pub fn singular_value_tracks(path: &SkewPath, k: usize, samples: usize) -> Vec<(f64, Vec<f64>)> {
    (0..=samples)
        .map(|i| {
            let t = i as f64 / samples.max(1) as f64;
            let sv = crate::linalg::singular_values(&path.sample(t));
            (t, sv.into_iter().take(k).collect())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{irreducible_rep, k1, l1, Signature};
    use crate::linalg::{eye, kron, max_abs};

    fn line(ctx: CliffordRep, a: Mat, b: Mat) -> SkewPath {
        SkewPath::new(ctx, "line", move |t| &a * (1.0 - t) + &b * t)
    }

    #[test]
    fn sign_flip_of_a_plane_rotation() {
        let p = line(CliffordRep::trivial(2), l1(), -l1());
        let opts = FlowOptions::default();
        assert_eq!(spectral_flow(&p, &opts).unwrap(), KOClass::new(2, 1));
        assert_eq!(endpoint_flow(&p).unwrap(), KOClass::new(2, 1));
        let r = spectral_flow_report(&p, &opts).unwrap();
        assert_eq!(r.contributing().count(), 1);
        assert_eq!(r.contributing().next().unwrap().kernel_dim, 2);
        // Two planes flipping together cancel mod 2.
        let two = line(CliffordRep::trivial(4), kron(&eye(2), &l1()), -kron(&eye(2), &l1()));
        assert_eq!(spectral_flow(&two, &opts).unwrap(), KOClass::zero(2));
    }

    #[test]
    fn normalization_in_degree_one() {
        // Context E₁ = K₁, which anticommutes with L₁.
        let ctx = CliffordRep::new(2, vec![k1()], Vec::new()).unwrap();
        let p = line(ctx, l1(), -l1());
        let sf = spectral_flow(&p, &FlowOptions::default()).unwrap();
        let v = CliffordRep::new(2, vec![k1()], vec![l1()]).unwrap();
        assert_eq!(sf, crate::abs_index::abs_class(&v).unwrap());
        assert_eq!(sf, KOClass::new(1, 1));
        assert_eq!(spectral_flow(&p.reversed(), &FlowOptions::default()).unwrap(), sf.negate());
    }

    #[test]
    fn non_invertible_endpoints_are_rejected() {
        let p = line(CliffordRep::trivial(2), Mat::zeros(2, 2), l1());
        assert!(spectral_flow(&p, &FlowOptions::default()).is_err());
        let not_skew = line(CliffordRep::trivial(2), k1(), k1());
        assert!(spectral_flow(&not_skew, &FlowOptions::default()).is_err());
    }

    #[test]
    fn phase_completion_fills_the_kernel() {
        let v = irreducible_rep(Signature::new(0, 2), None).unwrap();
        let ctx = CliffordRep::new(4, Vec::new(), vec![v.f()[0].clone()]).unwrap();
        let j = complete_phase(&Mat::zeros(4, 4), &ctx).unwrap();
        let f = &v.f()[0];
        assert!(max_abs(&(j.j() * f + f * j.j())) < 1e-12);
        let ctx0 = CliffordRep::trivial(2);
        let j = complete_phase(&Mat::zeros(2, 2), &ctx0).unwrap();
        assert!(max_abs(&(j.j() * j.j() + eye(2))) < 1e-12);
        let t = l1() * 3.0;
        let j = complete_phase(&t, &ctx0).unwrap();
        assert!(max_abs(&(j.j() - l1())) < 1e-12);
    }

    #[test]
    fn cayley_and_clamp() {
        let ctx = CliffordRep::new(2, Vec::new(), vec![l1()]).unwrap();
        let phi = cayley(&Mat::zeros(2, 2), &ctx).unwrap();
        assert!(max_abs(&(phi + l1())) < 1e-15);
        assert!(cayley(&Mat::zeros(2, 2), &CliffordRep::trivial(2)).is_err());
        assert!(max_abs(&(clamp_phase(&(l1() * 3.0)) - l1())) < 1e-12);
        assert!(max_abs(&(clamp_phase(&(l1() * 0.5)) - l1() * 0.5)) < 1e-12);
    }

    #[test]
    fn classical_flow_counts_negative_eigenvalues() {
        let h = |t: f64| Mat::from_diagonal(&nalgebra::DVector::from_column_slice(&[1.0 - 2.0 * t, 1.0, -1.0]));
        assert_eq!(classical_sf(&h).unwrap(), -1);
        let singular = |_t: f64| Mat::zeros(1, 1);
        assert!(classical_sf(&singular).is_err());
    }

    #[test]
    fn concatenation_and_direct_sums() {
        let a = line(CliffordRep::trivial(2), l1(), -l1());
        let b = line(CliffordRep::trivial(2), -l1(), l1());
        let ab = a.concat(&b).unwrap();
        assert_eq!(spectral_flow(&ab, &FlowOptions::default()).unwrap(), KOClass::zero(2));
        let s = a.direct_sum(&a).unwrap();
        assert_eq!(s.n(), 4);
    }
}
