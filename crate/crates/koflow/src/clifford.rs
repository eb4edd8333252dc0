//! Matrix representations of the real Clifford algebras Cl_{r,s}.
//!
//! A representation carries `r` symmetric orthogonal generators squaring to `+I`
//! and `s` skew orthogonal generators squaring to `−I`, all pairwise anticommuting.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{eye, kron, max_abs, Mat};

/// `K₁ = diag(1, −1)`.
pub fn k1() -> Mat {
    Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])
}

/// `K₂ = antidiag(1, 1)`.
pub fn k2() -> Mat {
    Mat::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])
}

/// `L₁ = [[0, −1], [1, 0]]`.
pub fn l1() -> Mat {
    Mat::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0])
}

/// `ω₁,₁ = K₁L₁ = −K₂`.
pub fn omega11() -> Mat {
    k1() * l1()
}

/// `ω₂,₀ = K₁K₂ = −L₁`.
pub fn omega20() -> Mat {
    k1() * k2()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub r: usize,
    pub s: usize,
}

impl Signature {
    pub fn new(r: usize, s: usize) -> Self {
        Signature { r, s }
    }

    /// `(s − r) mod 8`.
    pub fn degree(&self) -> u8 {
        (self.s as i64 - self.r as i64).rem_euclid(8) as u8
    }

    /// Two inequivalent irreducibles exist exactly when `r − s ≡ 1 mod 4`.
    pub fn has_two_irreducibles(&self) -> bool {
        (self.r as i64 - self.s as i64).rem_euclid(4) == 1
    }

    /// Real dimension of an irreducible module.
    pub fn irreducible_dim(&self) -> usize {
        let (r, s) = (self.r, self.s);
        let k = r.min(s);
        let base = if r > s {
            positive_dim(r - s)
        } else {
            negative_dim(s - r)
        };
        base << k
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cl_{{{},{}}}", self.r, self.s)
    }
}

fn positive_dim(r: usize) -> usize {
    match r {
        0 | 1 => 1,
        2 => 2,
        _ => 2 * negative_dim(r - 2),
    }
}

fn negative_dim(s: usize) -> usize {
    const TABLE: [usize; 8] = [1, 2, 4, 4, 8, 8, 8, 8];
    if s < 8 {
        TABLE[s]
    } else {
        16 * negative_dim(s - 8)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Chirality {
    Plus,
    Minus,
}

impl Chirality {
    pub fn sign(self) -> f64 {
        match self {
            Chirality::Plus => 1.0,
            Chirality::Minus => -1.0,
        }
    }

    pub fn from_sign(x: f64) -> Self {
        if x >= 0.0 {
            Chirality::Plus
        } else {
            Chirality::Minus
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliffordRep {
    sig: Signature,
    n: usize,
    e: Vec<Mat>,
    f: Vec<Mat>,
}

/// Tolerance applied to user-supplied generators.
pub const CONSTRUCTION_TOL: f64 = 1e-12;
/// Tolerance applied to generators restricted to a numerically computed subspace.
pub const RESTRICTION_TOL: f64 = 1e-9;

impl CliffordRep {
    /// Validated constructor; relations must hold to `1e−12`.
    pub fn new(n: usize, e: Vec<Mat>, f: Vec<Mat>) -> Result<Self> {
        Self::with_tolerance(n, e, f, CONSTRUCTION_TOL)
    }

    pub fn with_tolerance(n: usize, e: Vec<Mat>, f: Vec<Mat>, tol: f64) -> Result<Self> {
        let rep = Self::unchecked(n, e, f)?;
        let report = check_relations(&rep, tol)?;
        if !report.is_clean() {
            return Err(Error::Invalid(format!("{} relations violated: {report}", rep.sig)));
        }
        Ok(rep)
    }

    /// Shape-checked only; use `check_relations` to inspect the algebra relations.
    pub fn unchecked(n: usize, e: Vec<Mat>, f: Vec<Mat>) -> Result<Self> {
        for (name, g) in e.iter().map(|g| ("E", g)).chain(f.iter().map(|g| ("F", g))) {
            if g.nrows() != n || g.ncols() != n {
                return invalid(format!(
                    "{name} generator has shape {}x{}, expected {n}x{n}",
                    g.nrows(),
                    g.ncols()
                ));
            }
        }
        Ok(CliffordRep {
            sig: Signature::new(e.len(), f.len()),
            n,
            e,
            f,
        })
    }

    /// `ℝⁿ` with no generators.
    pub fn trivial(n: usize) -> Self {
        CliffordRep {
            sig: Signature::new(0, 0),
            n,
            e: Vec::new(),
            f: Vec::new(),
        }
    }

    pub fn sig(&self) -> Signature {
        self.sig
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn e(&self) -> &[Mat] {
        &self.e
    }

    pub fn f(&self) -> &[Mat] {
        &self.f
    }

    /// Symmetric generators first, then skew ones.
    pub fn generators(&self) -> impl Iterator<Item = &Mat> {
        self.e.iter().chain(self.f.iter())
    }

    /// Same module with one more skew generator appended.
    pub fn with_f(&self, g: Mat, tol: f64) -> Result<Self> {
        let mut f = self.f.clone();
        f.push(g);
        Self::with_tolerance(self.n, self.e.clone(), f, tol)
    }

    /// Drop the last skew generator.
    pub fn without_last_f(&self) -> Result<Self> {
        if self.f.is_empty() {
            return invalid("no skew generator to drop");
        }
        let mut f = self.f.clone();
        f.pop();
        Ok(CliffordRep {
            sig: Signature::new(self.e.len(), f.len()),
            n: self.n,
            e: self.e.clone(),
            f,
        })
    }

    /// Generators `QᵀGQ` for orthogonal `Q`.
    pub fn conjugate(&self, q: &Mat) -> Self {
        let qt = q.transpose();
        CliffordRep {
            sig: self.sig,
            n: q.ncols(),
            e: self.e.iter().map(|g| &qt * g * q).collect(),
            f: self.f.iter().map(|g| &qt * g * q).collect(),
        }
    }

    /// Operator `G ⊗ X` for each generator, i.e. acting on `H ⊗ ℝᵏ` with the
    /// second factor untouched when `X = I`.
    pub fn map_generators(&self, map: impl Fn(&Mat) -> Mat) -> Self {
        let e: Vec<Mat> = self.e.iter().map(&map).collect();
        let f: Vec<Mat> = self.f.iter().map(&map).collect();
        let n = e.first().or(f.first()).map(|g| g.nrows()).unwrap_or(self.n);
        CliffordRep {
            sig: self.sig,
            n,
            e,
            f,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub relation: String,
    pub residual: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn max_residual(&self) -> f64 {
        self.violations.iter().fold(0.0, |a, v| a.max(v.residual))
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .violations
            .iter()
            .map(|v| format!("{} (residual {:.3e})", v.relation, v.residual))
            .collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Residuals are entrywise maxima. A relation is reported when its residual exceeds `tol`.
pub fn check_relations(rep: &CliffordRep, tol: f64) -> Result<ValidationReport> {
    let n = rep.n;
    for g in rep.generators() {
        if g.nrows() != n || g.ncols() != n {
            return invalid("generator dimension does not match the module dimension");
        }
    }
    let id = eye(n);
    let mut out = ValidationReport::default();
    let mut push = |relation: String, residual: f64| {
        if residual > tol {
            out.violations.push(Violation { relation, residual });
        }
    };
    let names: Vec<String> = (0..rep.e.len())
        .map(|i| format!("E{}", i + 1))
        .chain((0..rep.f.len()).map(|k| format!("F{}", k + 1)))
        .collect();
    let gens: Vec<&Mat> = rep.generators().collect();
    let r = rep.e.len();
    for (i, g) in gens.iter().enumerate() {
        let sym = i < r;
        let sq = if sym { 1.0 } else { -1.0 };
        let transpose_res = if sym {
            max_abs(&(*g - g.transpose()))
        } else {
            max_abs(&(*g + g.transpose()))
        };
        let which = if sym { "symmetric" } else { "skew" };
        push(format!("{} {which}", names[i]), transpose_res);
        let sq_sign = if sym { "+I" } else { "-I" };
        push(
            format!("{}^2 = {sq_sign}", names[i]),
            max_abs(&(*g * *g - &id * sq)),
        );
        push(
            format!("{} orthogonal", names[i]),
            max_abs(&(g.transpose() * *g - &id)),
        );
    }
    for i in 0..gens.len() {
        for j in (i + 1)..gens.len() {
            let ac = gens[i] * gens[j] + gens[j] * gens[i];
            push(format!("{}{} + {}{} = 0", names[i], names[j], names[j], names[i]), max_abs(&ac));
        }
    }
    Ok(out)
}

/// `ω = E₁⋯E_r·F₁⋯F_s`; the `1×1`-free case `(0,0)` returns the identity.
pub fn volume_element(rep: &CliffordRep) -> Mat {
    rep.generators().fold(eye(rep.n), |acc, g| acc * g)
}

/// Sign `c` with `ω² = c·I`, from the closed form in `r` and `s`.
pub fn volume_square_sign(sig: Signature) -> f64 {
    let (r, s) = (sig.r, sig.s);
    let parity = |k: usize| if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    match (r + s) % 4 {
        3 | 0 => parity(r),
        _ => parity(r + 1),
    }
}

pub fn direct_sum(a: &CliffordRep, b: &CliffordRep) -> Result<CliffordRep> {
    if a.sig != b.sig {
        return invalid(format!("signature mismatch: {} vs {}", a.sig, b.sig));
    }
    let bd = crate::linalg::block_diag;
    Ok(CliffordRep {
        sig: a.sig,
        n: a.n + b.n,
        e: a.e.iter().zip(&b.e).map(|(x, y)| bd(x, y)).collect(),
        f: a.f.iter().zip(&b.f).map(|(x, y)| bd(x, y)).collect(),
    })
}

/// `V ↦ V ⊗ ℝ²` with `X ↦ X ⊗ ω₁,₁`, a new last symmetric generator `I ⊗ K₁` and a
/// new first skew generator `I ⊗ L₁`. This placement keeps `ω` unchanged up to
/// `ω ⊗ I`, so the class in `A_{r+1,s+2}` equals the class in `A_{r,s+1}`.
pub fn cl11_tensor(rep: &CliffordRep) -> CliffordRep {
    let w = omega11();
    let id = eye(rep.n);
    let mut e: Vec<Mat> = rep.e.iter().map(|g| kron(g, &w)).collect();
    e.push(kron(&id, &k1()));
    let mut f = vec![kron(&id, &l1())];
    f.extend(rep.f.iter().map(|g| kron(g, &w)));
    CliffordRep {
        sig: Signature::new(rep.sig.r + 1, rep.sig.s + 1),
        n: 2 * rep.n,
        e,
        f,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Multiplicity {
    Single { m: usize },
    Pair { plus: usize, minus: usize },
}

/// Multiplicities of the irreducibles. With two irreducibles they are read off the
/// `±1` eigenspaces of the central involution `ω`, via `dim ker(ω ∓ I) = (n ± tr ω)/2`.
pub fn decompose(rep: &CliffordRep) -> Result<Multiplicity> {
    let d = rep.sig.irreducible_dim() as f64;
    let n = rep.n as f64;
    let fractional = |x: f64, what: &str| -> Result<usize> {
        let r = x.round();
        if (x - r).abs() > 1e-6 || r < 0.0 {
            return Err(Error::Invalid(format!(
                "non-integer multiplicity {x} for {what} of {}",
                rep.sig
            )));
        }
        Ok(r as usize)
    };
    if rep.sig.has_two_irreducibles() {
        let tr = crate::linalg::trace(&volume_element(rep));
        let plus = fractional((n + tr) / 2.0 / d, "the +1 eigenspace of the volume element")?;
        let minus = fractional((n - tr) / 2.0 / d, "the -1 eigenspace of the volume element")?;
        Ok(Multiplicity::Pair { plus, minus })
    } else {
        Ok(Multiplicity::Single {
            m: fractional(n / d, "the module")?,
        })
    }
}

/// Restriction to the invariant subspace spanned by the orthonormal columns of `basis`.
pub fn restrict_to_subspace(rep: &CliffordRep, basis: &Mat) -> Result<CliffordRep> {
    if basis.nrows() != rep.n {
        return invalid("basis rows do not match the module dimension");
    }
    let k = basis.ncols();
    let ortho = max_abs(&(basis.transpose() * basis - eye(k)));
    if ortho > RESTRICTION_TOL {
        return invalid(format!("basis is not orthonormal (residual {ortho:.3e})"));
    }
    let bt = basis.transpose();
    let mut restrict = |g: &Mat| -> Result<Mat> {
        let gb = g * basis;
        let small = &bt * &gb;
        let res = max_abs(&(gb - basis * &small));
        if res > RESTRICTION_TOL {
            return Err(Error::Invalid(format!(
                "subspace is not invariant (residual {res:.3e})"
            )));
        }
        Ok(small)
    };
    let e = rep.e.iter().map(&mut restrict).collect::<Result<Vec<_>>>()?;
    let f = rep.f.iter().map(&mut restrict).collect::<Result<Vec<_>>>()?;
    CliffordRep::with_tolerance(k, e, f, RESTRICTION_TOL)
}

/// Canonical irreducible module with entries in `{−1, 0, 1}`.
///
/// `chirality` selects `ω = ±I` when two irreducibles exist and defaults to `+`;
/// it is rejected otherwise.
pub fn irreducible_rep(sig: Signature, chirality: Option<Chirality>) -> Result<CliffordRep> {
    if chirality.is_some() && !sig.has_two_irreducibles() {
        return invalid(format!(
            "{sig} has a unique irreducible module (r - s is not 1 mod 4); chirality does not apply"
        ));
    }
    let chir = if sig.has_two_irreducibles() {
        Some(chirality.unwrap_or(Chirality::Plus))
    } else {
        None
    };
    let rep = build(sig.r, sig.s, chir);
    debug_assert_eq!(rep.n, sig.irreducible_dim());
    Ok(rep)
}

fn exact(n: usize, e: Vec<Mat>, f: Vec<Mat>) -> CliffordRep {
    CliffordRep {
        sig: Signature::new(e.len(), f.len()),
        n,
        e,
        f,
    }
}

fn has_chirality(rep: &CliffordRep, c: Chirality) -> bool {
    max_abs(&(volume_element(rep) - eye(rep.n) * c.sign())) < 0.5
}

/// Build from a sub-module, choosing the sub-module chirality that yields `chir`.
fn lift_with(
    sub_sig: (usize, usize),
    chir: Option<Chirality>,
    lift: impl Fn(&CliffordRep) -> CliffordRep,
) -> CliffordRep {
    let sub_two = Signature::new(sub_sig.0, sub_sig.1).has_two_irreducibles();
    let candidates: Vec<Option<Chirality>> = if sub_two {
        vec![Some(Chirality::Plus), Some(Chirality::Minus)]
    } else {
        vec![None]
    };
    let mut last = None;
    for c in candidates {
        let out = lift(&build(sub_sig.0, sub_sig.1, c));
        match chir {
            Some(want) if !has_chirality(&out, want) => last = Some(out),
            _ => return out,
        }
    }
    let mut out = last.expect("at least one candidate");
    // No sub-module choice reaches the requested chirality: flip the last generator.
    flip_last(&mut out);
    out
}

fn flip_last(rep: &mut CliffordRep) {
    if let Some(g) = rep.f.last_mut() {
        *g = -g.clone();
    } else if let Some(g) = rep.e.last_mut() {
        *g = -g.clone();
    }
}

fn build(r: usize, s: usize, chir: Option<Chirality>) -> CliffordRep {
    if r >= 1 && s >= 1 {
        // Cl_{r,s} ≅ Cl_{r-1,s-1} ⊗ Cl_{1,1}: new symmetric generator first, new skew last.
        return lift_with((r - 1, s - 1), chir, |sub| {
            let w = omega11();
            let id = eye(sub.n);
            let mut e = vec![kron(&id, &k1())];
            e.extend(sub.e.iter().map(|g| kron(g, &w)));
            let mut f: Vec<Mat> = sub.f.iter().map(|g| kron(g, &w)).collect();
            f.push(kron(&id, &l1()));
            exact(2 * sub.n, e, f)
        });
    }
    if s == 0 {
        return match r {
            0 => CliffordRep::trivial(1),
            1 => {
                let c = chir.unwrap_or(Chirality::Plus).sign();
                exact(1, vec![Mat::from_element(1, 1, c)], Vec::new())
            }
            2 => exact(2, vec![k1(), k2()], Vec::new()),
            // Cl_{r,0} ≅ Cl_{0,r-2} ⊗ Cl_{2,0}.
            _ => lift_with((0, r - 2), chir, |sub| {
                let w = omega20();
                let id = eye(sub.n);
                let mut e: Vec<Mat> = sub.f.iter().map(|g| kron(g, &w)).collect();
                e.push(kron(&id, &k1()));
                e.push(kron(&id, &k2()));
                exact(2 * sub.n, e, Vec::new())
            }),
        };
    }
    match s {
        1 => exact(2, Vec::new(), vec![l1()]),
        // Cl_{0,s} ≅ Cl_{s-2,0} ⊗ Cl_{0,2}, with Cl_{0,2} ≅ ℍ acting on ℝ⁴.
        2..=4 => lift_with((s - 2, 0), chir, |sub| {
            let q1 = kron(&k1(), &l1());
            let q2 = kron(&k2(), &l1());
            let w = &q1 * &q2;
            let id = eye(sub.n);
            let mut f: Vec<Mat> = sub.e.iter().map(|g| kron(g, &w)).collect();
            f.push(kron(&id, &q1));
            f.push(kron(&id, &q2));
            exact(4 * sub.n, Vec::new(), f)
        }),
        5..=8 => {
            let mut rep = signed_permutation_base(s);
            if let Some(c) = chir {
                if !has_chirality(&rep, c) {
                    flip_last(&mut rep);
                }
            }
            rep
        }
        // Cl_{0,s} ≅ Cl_{0,s-8} ⊗ Cl_{0,8}.
        _ => lift_with((0, s - 8), chir, |sub| {
            let base = signed_permutation_base(8);
            let w = volume_element(&base);
            let id = eye(sub.n);
            let mut f: Vec<Mat> = sub.f.iter().map(|g| kron(g, &w)).collect();
            f.extend(base.f.iter().map(|g| kron(&id, g)));
            exact(sub.n * base.n, Vec::new(), f)
        }),
    }
}

/// Irreducible Cl_{0,s} modules for `5 ≤ s ≤ 8` as tensor words in `{I, K₁, K₂, L₁}`:
/// the lexicographically first set of `s` mutually anticommuting skew words of the
/// irreducible length.
fn signed_permutation_base(s: usize) -> CliffordRep {
    let n = Signature::new(0, s).irreducible_dim();
    let len = n.trailing_zeros() as usize;
    let words: Vec<Vec<u8>> = (0..4usize.pow(len as u32))
        .map(|mut code| {
            let mut w = vec![0u8; len];
            for slot in w.iter_mut().rev() {
                *slot = (code % 4) as u8;
                code /= 4;
            }
            w
        })
        .filter(|w| w.iter().filter(|&&x| x == 3).count() % 2 == 1)
        .collect();
    let anticommute = |a: &[u8], b: &[u8]| {
        a.iter()
            .zip(b)
            .filter(|(&x, &y)| x != 0 && y != 0 && x != y)
            .count()
            % 2
            == 1
    };
    fn search(
        words: &[Vec<u8>],
        start: usize,
        chosen: &mut Vec<usize>,
        want: usize,
        ac: &dyn Fn(&[u8], &[u8]) -> bool,
    ) -> bool {
        if chosen.len() == want {
            return true;
        }
        for i in start..words.len() {
            if chosen.iter().all(|&j| ac(&words[i], &words[j])) {
                chosen.push(i);
                if search(words, i + 1, chosen, want, ac) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    let mut chosen = Vec::new();
    let found = search(&words, 0, &mut chosen, s, &anticommute);
    assert!(found, "no signed-permutation realization for Cl_(0,{s})");
    let letter = |x: u8| match x {
        0 => eye(2),
        1 => k1(),
        2 => k2(),
        _ => l1(),
    };
    let f = chosen
        .iter()
        .map(|&i| {
            words[i]
                .iter()
                .fold(eye(1), |acc, &x| kron(&acc, &letter(x)))
        })
        .collect();
    exact(n, Vec::new(), f)
}

/// Group average `A ↦ 2^{-k} Σ_g ρ(g) A ρ̃(g)ᵀ` over products of generators in
/// increasing order, i.e. the orthogonal projection onto `Hom(ρ̃, ρ)`.
///
/// With `twisted = true` the average carries the character `(−1)^{|g|}` and projects
/// onto operators `A` with `G_i A = −A G̃_i` for every generator.
pub fn average_intertwiner(
    target: &CliffordRep,
    source: &CliffordRep,
    a: &Mat,
    twisted: bool,
) -> Result<Mat> {
    if target.sig != source.sig {
        return invalid("intertwiners need matching signatures");
    }
    if a.nrows() != target.n || a.ncols() != source.n {
        return invalid("matrix shape does not match the modules");
    }
    let eps = if twisted { -1.0 } else { 1.0 };
    let pairs: Vec<(&Mat, &Mat)> = target.generators().zip(source.generators()).collect();
    let mut x = a.clone();
    // Expanding Π_i (1 + ε Ad_i) enumerates every ordered product exactly once.
    for (g, h) in pairs.iter().rev() {
        let moved = *g * &x * h.transpose();
        x = (&x + moved * eps) * 0.5;
    }
    Ok(x)
}

/// Dimension of the intertwiner space, estimated from `samples` random probes.
pub fn intertwiner_dim(
    target: &CliffordRep,
    source: &CliffordRep,
    samples: usize,
    seed: u64,
) -> Result<usize> {
    let mut rng = crate::random::rng(seed);
    let (p, q) = (target.n, source.n);
    let mut stack = Mat::zeros(p * q, samples);
    for k in 0..samples {
        let a = crate::random::gaussian(&mut rng, p, q);
        let avg = average_intertwiner(target, source, &a, false)?;
        for (idx, v) in avg.iter().enumerate() {
            stack[(idx, k)] = *v;
        }
    }
    let gram = crate::linalg::sym_eigen(&(stack.transpose() * &stack));
    let top = gram.values.last().copied().unwrap_or(0.0);
    Ok(gram.values.iter().filter(|&&x| x > 1e-16 * top.max(1.0)).count())
}
