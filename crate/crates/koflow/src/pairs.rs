//! Indices of pairs of complex structures and of pairs of orthogonal projections.
//!
//! In finite dimension every pair is Fredholm. Where an argument needs a pair to be
//! close modulo compacts, the operator norm condition `‖J0 − J1‖ < 1` stands in for it.

use serde::Serialize;

use crate::abs_index::{abs_class, KOClass};
use crate::clifford::{check_relations, k1, k2, l1, CliffordRep, RESTRICTION_TOL};
use crate::error::{invalid, Error, Result};
use crate::linalg::{eye, kron, max_abs, phase, sym_eigen, zero_split, Mat, ZeroSplit};

/// Zero cluster of `MᵀM`: `λ ≤ 1e−8 · λ_max`.
pub const KERNEL_REL: f64 = 1e-8;
/// Required ratio between the smallest nonzero and the largest zero singular value.
pub const KERNEL_GAP: f64 = 1e3;
/// Tolerance for complex-structure invariants.
pub const STRUCTURE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexStructure {
    j: Mat,
    context: CliffordRep,
    /// Largest measured violation of the structure invariants.
    residual: f64,
}

impl ComplexStructure {
    pub fn new(j: Mat, context: CliffordRep) -> Result<Self> {
        Self::with_tolerance(j, context, STRUCTURE_TOL)
    }

    /// Skew, orthogonal and anticommuting with every context generator, within `tol`.
    pub fn with_tolerance(j: Mat, context: CliffordRep, tol: f64) -> Result<Self> {
        let n = context.n();
        if j.nrows() != n || j.ncols() != n {
            return invalid(format!(
                "complex structure is {}x{}, context acts on dimension {n}",
                j.nrows(),
                j.ncols()
            ));
        }
        let skew = max_abs(&(&j + j.transpose()));
        let orth = max_abs(&(j.transpose() * &j - eye(n)));
        let anti = context
            .generators()
            .map(|g| max_abs(&(&j * g + g * &j)))
            .fold(0.0, f64::max);
        if skew > tol || orth > tol || anti > tol {
            return invalid(format!(
                "not an anticommuting complex structure: skew {skew:.2e}, orthogonality {orth:.2e}, anticommutator {anti:.2e}"
            ));
        }
        Ok(ComplexStructure {
            j,
            context,
            residual: skew.max(orth).max(anti),
        })
    }

    pub fn j(&self) -> &Mat {
        &self.j
    }

    pub fn context(&self) -> &CliffordRep {
        &self.context
    }

    pub fn n(&self) -> usize {
        self.j.nrows()
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }
}

fn same_context(a: &CliffordRep, b: &CliffordRep) -> Result<()> {
    if a.sig() != b.sig() || a.n() != b.n() {
        return invalid("complex structures live in different contexts");
    }
    let diff = a
        .generators()
        .zip(b.generators())
        .map(|(x, y)| max_abs(&(x - y)))
        .fold(0.0, f64::max);
    if diff > 1e-10 {
        return invalid(format!("context generators differ by {diff:.2e}"));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct PairIndex {
    pub class: KOClass,
    /// `ker(J0 + J1)` as a Cl_{r,s+1} module with `F_{s+1} = J0`.
    pub kernel: CliffordRep,
    pub split: ZeroSplit,
}

impl PairIndex {
    pub fn kernel_dim(&self) -> usize {
        self.kernel.n()
    }
}

/// Orthonormal basis of the zero cluster of `MᵀM`, with singular-value split.
pub(crate) fn kernel_basis(m: &Mat, scale: f64) -> Result<(Mat, ZeroSplit)> {
    let gram = m.transpose() * m;
    let eig = sym_eigen(&gram);
    let split = zero_split(&eig.values, KERNEL_REL, KERNEL_GAP, scale)?;
    Ok((eig.columns(0..split.dim), split))
}

/// Compress generators onto an orthonormal basis of an approximately invariant subspace.
pub(crate) fn compress(rep: &CliffordRep, basis: &Mat, extra: &[&Mat], tol: f64) -> Result<CliffordRep> {
    let bt = basis.transpose();
    let comp = |g: &Mat| -> Result<Mat> {
        let gb = g * basis;
        let small = &bt * &gb;
        let res = max_abs(&(gb - basis * &small));
        if res > tol {
            return Err(Error::Numerical(format!(
                "subspace is not invariant under a generator (residual {res:.3e})"
            )));
        }
        Ok(small)
    };
    let e = rep.e().iter().map(comp).collect::<Result<Vec<_>>>()?;
    let mut f = rep.f().iter().map(comp).collect::<Result<Vec<_>>>()?;
    for g in extra {
        f.push(comp(g)?);
    }
    let out = CliffordRep::unchecked(basis.ncols(), e, f)?;
    let report = check_relations(&out, tol)?;
    if !report.is_clean() {
        return Err(Error::Numerical(format!("compressed module: {report}")));
    }
    Ok(out)
}

/// `ind_{r,s+2}(J0, J1) = [ker(J0 + J1)]` with `F_{s+1} = J0|ker`.
pub fn pair_index(j0: &ComplexStructure, j1: &ComplexStructure) -> Result<PairIndex> {
    same_context(&j0.context, &j1.context)?;
    let m = &j0.j + &j1.j;
    let (basis, split) = kernel_basis(&m, 1.0)?;
    // The kernel module inherits the invariant residuals of its inputs.
    let tol = RESTRICTION_TOL
        .max(10.0 * split.largest_zero)
        .max(4.0 * j0.residual.max(j1.residual));
    let kernel = compress(&j0.context, &basis, &[&j0.j], tol)?;
    let class = abs_class(&kernel)?;
    Ok(PairIndex {
        class,
        kernel,
        split,
    })
}

#[derive(Debug, Clone)]
pub struct MidpointPair {
    pub t0: Mat,
    pub t1: Mat,
    /// Max-abs residual of each identity, by name.
    pub residuals: Vec<(String, f64)>,
}

impl MidpointPair {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |a, (_, r)| a.max(*r))
    }
}

/// `T0 = (J0 + J1)/2`, `T1 = (J0 − J1)/2` and the residuals of their identities.
pub fn midpoint_operators(j0: &ComplexStructure, j1: &ComplexStructure) -> Result<MidpointPair> {
    same_context(&j0.context, &j1.context)?;
    let (a, b) = (&j0.j, &j1.j);
    let t0 = (a + b) * 0.5;
    let t1 = (a - b) * 0.5;
    let n = a.nrows();
    let anti = |t: &Mat| {
        j0.context
            .generators()
            .map(|g| max_abs(&(t * g + g * t)))
            .fold(0.0, f64::max)
    };
    let residuals = vec![
        ("T0^2 + T1^2 = -I".into(), max_abs(&(&t0 * &t0 + &t1 * &t1 + eye(n)))),
        ("T0 T1 = -T1 T0".into(), max_abs(&(&t0 * &t1 + &t1 * &t0))),
        ("T0 J0 = J1 T0".into(), max_abs(&(&t0 * a - b * &t0))),
        ("T1 J0 = -J1 T1".into(), max_abs(&(&t1 * a + b * &t1))),
        ("T0 anticommutes with generators".into(), anti(&t0)),
        ("T1 anticommutes with generators".into(), anti(&t1)),
    ];
    Ok(MidpointPair { t0, t1, residuals })
}

/// Cl_{r,s+2} module on `range χ_(0,λ²)(−T0²)` with `F_{s+1} = J0` and
/// `F_{s+2}` the phase of `J0 T1 T0`.
pub fn spectral_submodule(
    j0: &ComplexStructure,
    j1: &ComplexStructure,
    lambda: f64,
) -> Result<CliffordRep> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return invalid(format!("lambda = {lambda} must lie in (0, 1)"));
    }
    let mp = midpoint_operators(j0, j1)?;
    let eig = sym_eigen(&(-(&mp.t0 * &mp.t0)));
    let l2 = lambda * lambda;
    const SEP: f64 = 1e-10;
    if let Some(x) = eig.values.iter().find(|&&x| (x - l2).abs() <= SEP) {
        return invalid(format!("lambda^2 = {l2} is within {SEP:e} of the eigenvalue {x}"));
    }
    let idx: Vec<usize> = (0..eig.values.len())
        .filter(|&i| eig.values[i] > SEP && eig.values[i] < l2)
        .collect();
    let x = eig.columns(idx);
    let ctx = &j0.context;
    if x.ncols() == 0 {
        return CliffordRep::unchecked(
            0,
            vec![Mat::zeros(0, 0); ctx.sig().r],
            vec![Mat::zeros(0, 0); ctx.sig().s + 2],
        );
    }
    let xt = x.transpose();
    let restrict = |g: &Mat| &xt * g * &x;
    let e = ctx.e().iter().map(restrict).collect();
    let mut f: Vec<Mat> = ctx.f().iter().map(restrict).collect();
    f.push(restrict(&j0.j));
    f.push(phase(&restrict(&(&j0.j * &mp.t1 * &mp.t0))));
    CliffordRep::with_tolerance(x.ncols(), e, f, RESTRICTION_TOL)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionPair {
    p: Mat,
    q: Mat,
}

impl ProjectionPair {
    pub fn new(p: Mat, q: Mat) -> Result<Self> {
        const TOL: f64 = 1e-10;
        if p.shape() != q.shape() || p.nrows() != p.ncols() {
            return invalid("projections must be square of equal size");
        }
        for (name, m) in [("P", &p), ("Q", &q)] {
            let sym = max_abs(&(m - m.transpose()));
            let idem = max_abs(&(m * m - m));
            if sym > TOL || idem > TOL {
                return invalid(format!(
                    "{name} is not an orthogonal projection (symmetry {sym:.2e}, idempotence {idem:.2e})"
                ));
            }
        }
        Ok(ProjectionPair { p, q })
    }

    pub fn p(&self) -> &Mat {
        &self.p
    }

    pub fn q(&self) -> &Mat {
        &self.q
    }
}

/// `dim(ran P ∩ ker Q) − dim(ker P ∩ ran Q)`, read off `ker(P + Q − I)` split by `P`.
pub fn projection_pair_index(pp: &ProjectionPair) -> Result<i64> {
    let n = pp.p.nrows();
    let (basis, _) = kernel_basis(&(&pp.p + &pp.q - eye(n)), 1.0)?;
    let k = basis.ncols() as f64;
    let in_ran_p = crate::linalg::trace(&(basis.transpose() * &pp.p * &basis));
    let a = crate::linalg::integer_of(in_ran_p, 1e-6, "dim(ran P ∩ ker Q)")?;
    let b = crate::linalg::integer_of(k - in_ran_p, 1e-6, "dim(ker P ∩ ran Q)")?;
    Ok(a - b)
}

/// Complex structures `(2P − I) ⊗ L₁` and `(2Q − I) ⊗ L₁` on `H′ ⊗ ℝ²`, anticommuting
/// with `E₁ = I ⊗ K₁`, `E₂ = I ⊗ K₂`.
pub fn projections_to_structures(
    pp: &ProjectionPair,
) -> Result<(ComplexStructure, ComplexStructure)> {
    let n = pp.p.nrows();
    let id = eye(n);
    let ctx = CliffordRep::new(2 * n, vec![kron(&id, &k1()), kron(&id, &k2())], Vec::new())?;
    let lift = |m: &Mat| kron(&(m * 2.0 - &id), &l1());
    Ok((
        ComplexStructure::new(lift(&pp.p), ctx.clone())?,
        ComplexStructure::new(lift(&pp.q), ctx)?,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Parity {
    pub value: u8,
    pub kernel_dim: usize,
}

/// `dim ker(I + U0ᵀU1) mod 2`.
pub fn orthogonal_pair_parity(u0: &Mat, u1: &Mat) -> Result<Parity> {
    const TOL: f64 = 1e-10;
    if u0.shape() != u1.shape() || u0.nrows() != u0.ncols() {
        return invalid("orthogonal matrices must be square of equal size");
    }
    let n = u0.nrows();
    for (name, u) in [("U0", u0), ("U1", u1)] {
        let res = max_abs(&(u.transpose() * u - eye(n)));
        if res > TOL {
            return invalid(format!("{name} is not orthogonal (residual {res:.2e})"));
        }
    }
    let (basis, _) = kernel_basis(&(eye(n) + u0.transpose() * u1), 1.0)?;
    let kernel_dim = basis.ncols();
    Ok(Parity {
        value: (kernel_dim % 2) as u8,
        kernel_dim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{k1, l1};
    use crate::linalg::from_rows;

    fn diag(d: &[f64]) -> Mat {
        Mat::from_diagonal(&nalgebra::DVector::from_column_slice(d))
    }

    #[test]
    fn opposite_structures_have_full_kernel() {
        let ctx = CliffordRep::trivial(2);
        let j0 = ComplexStructure::new(l1(), ctx.clone()).unwrap();
        let j1 = ComplexStructure::new(-l1(), ctx.clone()).unwrap();
        let idx = pair_index(&j0, &j1).unwrap();
        assert_eq!(idx.kernel_dim(), 2);
        assert_eq!(idx.class, KOClass::new(2, 1));
        let same = pair_index(&j0, &j0).unwrap();
        assert_eq!((same.kernel_dim(), same.class), (0, KOClass::zero(2)));
    }

    #[test]
    fn structures_are_validated() {
        let ctx = CliffordRep::trivial(2);
        assert!(ComplexStructure::new(k1(), ctx.clone()).is_err());
        assert!(ComplexStructure::new(l1() * 2.0, ctx).is_err());
        // L₁ anticommutes with K₁ and commutes with itself.
        let e = CliffordRep::new(2, vec![k1()], Vec::new()).unwrap();
        assert!(ComplexStructure::new(l1(), e).is_ok());
        let c = CliffordRep::new(2, Vec::new(), vec![l1()]).unwrap();
        assert!(ComplexStructure::new(l1(), c).is_err());
    }

    #[test]
    fn projection_pair_examples() {
        let cases = [
            (diag(&[1.0, 0.0]), diag(&[0.0, 0.0]), 1),
            (diag(&[1.0, 0.0]), diag(&[0.0, 1.0]), 0),
            (diag(&[0.0, 0.0, 1.0]), diag(&[1.0, 1.0, 0.0]), -1),
            (diag(&[1.0, 1.0]), diag(&[1.0, 1.0]), 0),
        ];
        for (p, q, expect) in cases {
            let pp = ProjectionPair::new(p, q).unwrap();
            assert_eq!(projection_pair_index(&pp).unwrap(), expect);
            let (j0, j1) = projections_to_structures(&pp).unwrap();
            assert_eq!(pair_index(&j0, &j1).unwrap().class, KOClass::new(0, expect));
        }
        assert!(ProjectionPair::new(diag(&[2.0]), diag(&[0.0])).is_err());
    }

    #[test]
    fn parity_examples() {
        let u1 = diag(&[-1.0, 1.0, 1.0]);
        let p = orthogonal_pair_parity(&Mat::identity(3, 3), &u1).unwrap();
        assert_eq!((p.value, p.kernel_dim), (1, 1));
        let minus = -Mat::identity(4, 4);
        assert_eq!(orthogonal_pair_parity(&Mat::identity(4, 4), &minus).unwrap().kernel_dim, 4);
        let rot = from_rows(&[&[0.0, -1.0], &[1.0, 0.0]]);
        assert_eq!(orthogonal_pair_parity(&rot, &rot).unwrap().value, 0);
        assert!(orthogonal_pair_parity(&diag(&[2.0]), &diag(&[1.0])).is_err());
    }

    #[test]
    fn midpoint_identities_hold_for_opposite_structures() {
        let ctx = CliffordRep::trivial(2);
        let j0 = ComplexStructure::new(l1(), ctx.clone()).unwrap();
        let j1 = ComplexStructure::new(-l1(), ctx).unwrap();
        assert!(midpoint_operators(&j0, &j1).unwrap().max_residual() < 1e-12);
    }
}
