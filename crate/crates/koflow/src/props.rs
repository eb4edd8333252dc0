//! Seeded invariant suites for every module. The `props` command and the test targets
//! share these families; a suite passes when every one of its checks passes.

use std::f64::consts::PI;

use rand::Rng as _;
use serde::Serialize;

use crate::abs_index::{abs_class, forgetful, group_of, Group, KOClass};
use crate::clifford::{
    cl11_tensor, check_relations, decompose, direct_sum, intertwiner_dim, irreducible_rep,
    k1, k2, restrict_to_subspace, volume_element, volume_square_sign, Chirality, CliffordRep,
    Multiplicity, Signature,
};
use crate::error::{invalid, Result};
use crate::flow::{
    cayley, clamp_phase, classical_sf, endpoint_flow, spectral_flow, Completion, FlowOptions,
    SkewPath,
};
use crate::linalg::{eye, kron, max_abs, op_norm, phase, singular_values, skew_part, sym_part, Mat};
use crate::models::{self, CMat, RealStructure};
use crate::pairs::{
    midpoint_operators, orthogonal_pair_parity, pair_index, projection_pair_index,
    projections_to_structures, spectral_submodule, ComplexStructure, ProjectionPair,
};
use crate::random::{self, Rng};
use crate::rs_verify::{self, Convention, RSProblem};

pub const SUITES: [&str; 6] = ["clifford", "abs_index", "pairs", "flow", "models", "rs_verify"];

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PropsReport {
    pub seed: u64,
    pub passed: bool,
    pub suites: Vec<SuiteReport>,
}

impl PropsReport {
    pub fn failures(&self) -> impl Iterator<Item = (&str, &CheckResult)> {
        self.suites
            .iter()
            .flat_map(|s| s.checks.iter().map(move |c| (s.suite.as_str(), c)))
            .filter(|(_, c)| !c.passed)
    }
}

/// `Ok(Ok(detail))` passes; `Ok(Err(detail))` and library errors fail.
type Outcome = std::result::Result<String, String>;

fn check(name: &str, f: impl FnOnce() -> Result<Outcome>) -> CheckResult {
    let (passed, detail) = match f() {
        Ok(Ok(d)) => (true, d),
        Ok(Err(d)) => (false, d),
        Err(e) => (false, format!("error: {e}")),
    };
    CheckResult {
        name: name.to_string(),
        passed,
        detail,
    }
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn suite_seed(seed: u64, suite: &str) -> u64 {
    suite
        .bytes()
        .fold(seed ^ 0x9e37_79b9_7f4a_7c15, |h, b| h.rotate_left(7) ^ u64::from(b))
}

pub fn run_suite(name: &str, seed: u64) -> Result<SuiteReport> {
    let s = suite_seed(seed, name);
    let checks = match name {
        "clifford" => clifford_suite(s),
        "abs_index" => abs_suite(s),
        "pairs" => pairs_suite(s),
        "flow" => flow_suite(s),
        "models" => models_suite(s),
        "rs_verify" => rs_suite(s),
        other => return invalid(format!("unknown suite '{other}'; known: {}", SUITES.join(", "))),
    };
    Ok(SuiteReport {
        suite: name.to_string(),
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

pub fn run_all(seed: u64) -> PropsReport {
    let suites: Vec<SuiteReport> = SUITES
        .iter()
        .map(|s| run_suite(s, seed).expect("known suite"))
        .collect();
    PropsReport {
        seed,
        passed: suites.iter().all(|s| s.passed),
        suites,
    }
}

// ---------------------------------------------------------------------------
// Seeded families

/// Both chiralities when they exist, otherwise the unique irreducible.
pub fn irreducibles(sig: Signature) -> Result<Vec<CliffordRep>> {
    if sig.has_two_irreducibles() {
        Ok(vec![
            irreducible_rep(sig, Some(Chirality::Plus))?,
            irreducible_rep(sig, Some(Chirality::Minus))?,
        ])
    } else {
        Ok(vec![irreducible_rep(sig, None)?])
    }
}

/// Sum of one to three random irreducibles of `sig` in a random orthonormal basis, or
/// `None` when a single irreducible exceeds `max_n`.
pub fn random_module(rng: &mut Rng, sig: Signature, max_n: usize) -> Result<Option<CliffordRep>> {
    let d = sig.irreducible_dim();
    if d > max_n {
        return Ok(None);
    }
    let count = rng.random_range(1..=(max_n / d).clamp(1, 3));
    let pick = |rng: &mut Rng| -> Result<CliffordRep> {
        let c = sig
            .has_two_irreducibles()
            .then(|| if rng.random_bool(0.5) { Chirality::Plus } else { Chirality::Minus });
        irreducible_rep(sig, c)
    };
    let mut v = pick(rng)?;
    for _ in 1..count {
        v = direct_sum(&v, &pick(rng)?)?;
    }
    let q = random::orthogonal(rng, v.n());
    Ok(Some(v.conjugate(&q)))
}

fn random_signature(rng: &mut Rng, max_gens: usize) -> Signature {
    let total = rng.random_range(1..=max_gens);
    let r = rng.random_range(0..total);
    Signature::new(r, total - r)
}

/// Random Cl_{r,s+1} module with at least one skew generator, `r + s + 1 ≤ max_gens`.
pub fn random_flow_module(rng: &mut Rng, max_gens: usize, max_n: usize) -> Result<CliffordRep> {
    loop {
        let sig = random_signature(rng, max_gens);
        if let Some(v) = random_module(rng, sig, max_n)? {
            return Ok(v);
        }
    }
}

/// Random anticommuting skew operator normalized to unit norm, rejected until
/// `σ_min ≥ 0.05`. Fails when no invertible one turns up, as for contexts that are
/// not the restriction of a module with one more skew generator.
fn invertible_anticommuting(rng: &mut Rng, ctx: &CliffordRep) -> Result<Mat> {
    for _ in 0..200 {
        let a = random::anticommuting_skew(rng, ctx);
        let sv = singular_values(&a);
        let (lo, hi) = (sv[0], sv[sv.len() - 1]);
        if hi > 0.0 && lo >= 0.05 * hi {
            return Ok(a / hi);
        }
    }
    invalid(format!("no invertible anticommuting operator found for {}", ctx.sig()))
}

/// `(1 − t) A₀ + t A₁ + sin(πt) B`.
pub fn bump_path(ctx: &CliffordRep, a0: Mat, a1: Mat, b: Mat, label: &str) -> SkewPath {
    SkewPath::new(ctx.clone(), label, move |t| {
        &a0 * (1.0 - t) + &a1 * t + &b * (PI * t).sin()
    })
}

/// Random admissible path: context is a random module with its last skew generator
/// removed, endpoints are random invertible anticommuting operators.
pub fn random_path(rng: &mut Rng, max_gens: usize, max_n: usize) -> Result<SkewPath> {
    let v = random_flow_module(rng, max_gens, max_n)?;
    let ctx = v.without_last_f()?;
    let a0 = invertible_anticommuting(rng, &ctx)?;
    let a1 = invertible_anticommuting(rng, &ctx)?;
    let b = random::anticommuting_skew(rng, &ctx);
    let b = &b / op_norm(&b).max(1e-300) * 2.0;
    Ok(bump_path(&ctx, a0, a1, b, &format!("random {}", v.sig())))
}

/// Random complex structure in `ctx`: the phase of an invertible anticommuting operator.
pub fn random_structure(rng: &mut Rng, ctx: &CliffordRep) -> Result<ComplexStructure> {
    ComplexStructure::new(phase(&invertible_anticommuting(rng, ctx)?), ctx.clone())
}

/// Projection pair with prescribed `dim(ran P ∩ ker Q) = a`, `dim(ker P ∩ ran Q) = b`,
/// `c` common range directions and `g` planes in generic position, rotated at random.
pub fn projection_pair_with(rng: &mut Rng, a: usize, b: usize, c: usize, g: usize, z: usize) -> Result<ProjectionPair> {
    let n = a + b + c + 2 * g + z;
    let mut p = Mat::zeros(n, n);
    let mut q = Mat::zeros(n, n);
    let mut i = 0;
    for _ in 0..a {
        p[(i, i)] = 1.0;
        i += 1;
    }
    for _ in 0..b {
        q[(i, i)] = 1.0;
        i += 1;
    }
    for _ in 0..c {
        p[(i, i)] = 1.0;
        q[(i, i)] = 1.0;
        i += 1;
    }
    for _ in 0..g {
        let th: f64 = rng.random_range(0.15..(PI / 2.0 - 0.15));
        let (cs, sn) = (th.cos(), th.sin());
        p[(i, i)] = 1.0;
        q[(i, i)] = cs * cs;
        q[(i, i + 1)] = cs * sn;
        q[(i + 1, i)] = cs * sn;
        q[(i + 1, i + 1)] = sn * sn;
        i += 2;
    }
    let o = random::orthogonal(rng, n);
    let sym = |m: &Mat| sym_part(&(&o * m * o.transpose()));
    ProjectionPair::new(sym(&p), sym(&q))
}

/// `J₀ = F ⊕ F|_V`, `J₁ = F ⊕ −F|_V` on `H₀ ⊕ V` for Cl_{r,s+1} modules `H₀`, `V`.
pub fn standard_pair(h0: &CliffordRep, v: &CliffordRep) -> Result<(ComplexStructure, ComplexStructure)> {
    let h = direct_sum(h0, v)?;
    let ctx = h.without_last_f()?;
    let f0 = h0.f().last().expect("skew generator").clone();
    let fv = v.f().last().expect("skew generator").clone();
    let j0 = crate::linalg::block_diag(&f0, &fv);
    let j1 = crate::linalg::block_diag(&f0, &(-fv));
    Ok((ComplexStructure::new(j0, ctx.clone())?, ComplexStructure::new(j1, ctx)?))
}

fn all_signatures(max_total: usize) -> impl Iterator<Item = Signature> {
    (0..=max_total).flat_map(move |t| (0..=t).map(move |r| Signature::new(r, t - r)))
}

// ---------------------------------------------------------------------------
// clifford

fn clifford_suite(seed: u64) -> Vec<CheckResult> {
    let mut rng = random::rng(seed);
    let mut out = Vec::new();
    out.push(check("irreducibles satisfy the relations exactly for r+s <= 10", || {
        let mut count = 0;
        for sig in all_signatures(10) {
            for v in irreducibles(sig)? {
                let rep = check_relations(&v, 0.0)?;
                if !rep.is_clean() || v.n() != sig.irreducible_dim() {
                    return Ok(Err(format!("{sig}: {rep}, dim {}", v.n())));
                }
                count += 1;
            }
        }
        Ok(Ok(format!("{count} irreducibles")))
    }));
    out.push(check("volume element squares to the signature sign for r+s <= 8", || {
        for sig in all_signatures(8) {
            for v in irreducibles(sig)? {
                let w = volume_element(&v);
                let sign = volume_square_sign(sig);
                let res = max_abs(&(&w * &w - eye(v.n()) * sign));
                if res != 0.0 {
                    return Ok(Err(format!("{sig}: residual {res}")));
                }
            }
        }
        Ok(Ok("all signatures exact".into()))
    }));
    out.push(check("two chiralities are distinguished by the volume element", || {
        for sig in all_signatures(8).filter(|s| s.has_two_irreducibles()) {
            for c in [Chirality::Plus, Chirality::Minus] {
                let v = irreducible_rep(sig, Some(c))?;
                let res = max_abs(&(volume_element(&v) - eye(v.n()) * c.sign()));
                if res != 0.0 {
                    return Ok(Err(format!("{sig} {c:?}: residual {res}")));
                }
            }
        }
        Ok(Ok("omega = chirality * I".into()))
    }));
    out.push(check("cl11_tensor keeps relations exact and doubles dimension", || {
        for sig in all_signatures(6) {
            for v in irreducibles(sig)? {
                let w = cl11_tensor(&v);
                let rep = check_relations(&w, 0.0)?;
                let want = Signature::new(sig.r + 1, sig.s + 1);
                if !rep.is_clean() || w.n() != 2 * v.n() || w.sig() != want {
                    return Ok(Err(format!("{sig}: {rep}")));
                }
            }
        }
        Ok(Ok("r+s <= 6".into()))
    }));
    out.push(check("decompose is additive under direct sums", || {
        for _ in 0..20 {
            let sig = random_signature(&mut rng, 5);
            let (Some(a), Some(b)) = (random_module(&mut rng, sig, 16)?, random_module(&mut rng, sig, 16)?) else {
                continue;
            };
            let sum = decompose(&direct_sum(&a, &b)?)?;
            let ok = match (decompose(&a)?, decompose(&b)?, sum) {
                (Multiplicity::Single { m: x }, Multiplicity::Single { m: y }, Multiplicity::Single { m: z }) => x + y == z,
                (
                    Multiplicity::Pair { plus: p1, minus: m1 },
                    Multiplicity::Pair { plus: p2, minus: m2 },
                    Multiplicity::Pair { plus, minus },
                ) => p1 + p2 == plus && m1 + m2 == minus,
                _ => false,
            };
            if !ok {
                return Ok(Err(format!("{sig}: multiplicities do not add")));
            }
        }
        Ok(Ok("20 random pairs".into()))
    }));
    out.push(check("opposite chiralities admit no intertwiner", || {
        for sig in all_signatures(6).filter(|s| s.has_two_irreducibles()) {
            let p = irreducible_rep(sig, Some(Chirality::Plus))?;
            let m = irreducible_rep(sig, Some(Chirality::Minus))?;
            let cross = intertwiner_dim(&p, &m, 8, seed)?;
            let same = intertwiner_dim(&p, &p, 8, seed)?;
            if cross != 0 || same == 0 {
                return Ok(Err(format!("{sig}: cross {cross}, same {same}")));
            }
        }
        Ok(Ok("r+s <= 6".into()))
    }));
    out.push(check("restriction to a summand recovers a valid module", || {
        for _ in 0..10 {
            let sig = random_signature(&mut rng, 4);
            let (Some(a), Some(b)) = (random_module(&mut rng, sig, 8)?, random_module(&mut rng, sig, 8)?) else {
                continue;
            };
            let sum = direct_sum(&a, &b)?;
            let basis = eye(sum.n()).columns(0, a.n()).into_owned();
            let r = restrict_to_subspace(&sum, &basis)?;
            let res = a
                .generators()
                .zip(r.generators())
                .map(|(x, y)| max_abs(&(x - y)))
                .fold(0.0, f64::max);
            if res > 1e-12 {
                return Ok(Err(format!("{sig}: residual {res:.2e}")));
            }
        }
        Ok(Ok("10 random sums".into()))
    }));
    out
}

// ---------------------------------------------------------------------------
// abs_index

fn abs_suite(seed: u64) -> Vec<CheckResult> {
    let mut rng = random::rng(seed);
    let mut out = Vec::new();
    out.push(check("group table", || {
        let want = [Group::Z, Group::Z2, Group::Z2, Group::Trivial, Group::Z, Group::Trivial, Group::Trivial, Group::Trivial];
        let ok = (0..8u8).all(|d| group_of(d) == want[d as usize]);
        Ok(verdict(ok, "degrees 0..8".into()))
    }));
    out.push(check("abs_class is additive", || {
        for _ in 0..30 {
            let sig = random_signature(&mut rng, 5);
            let (Some(a), Some(b)) = (random_module(&mut rng, sig, 16)?, random_module(&mut rng, sig, 16)?) else {
                continue;
            };
            let lhs = abs_class(&direct_sum(&a, &b)?)?;
            let rhs = abs_class(&a)?.plus(&abs_class(&b)?)?;
            if lhs != rhs {
                return Ok(Err(format!("{sig}: {lhs} vs {rhs}")));
            }
        }
        Ok(Ok("30 random pairs".into()))
    }));
    out.push(check("abs_class is invariant under cl11_tensor", || {
        for sig in all_signatures(6) {
            for v in irreducibles(sig)? {
                let (a, b) = (abs_class(&v)?, abs_class(&cl11_tensor(&v))?);
                if a != b {
                    return Ok(Err(format!("{sig}: {a} vs {b}")));
                }
            }
        }
        Ok(Ok("r+s <= 6".into()))
    }));
    out.push(check("swapping K1 and K2 negates the class", || {
        let v = CliffordRep::new(2, vec![k1(), k2()], vec![crate::clifford::l1()])?;
        let w = CliffordRep::new(2, vec![k2(), k1()], vec![crate::clifford::l1()])?;
        let (a, b) = (abs_class(&v)?, abs_class(&w)?);
        Ok(verdict(a.group == Group::Z && a.value != 0 && b == a.negate(), format!("{a} vs {b}")))
    }));
    out.push(check("trivial degrees give zero", || {
        for sig in all_signatures(7) {
            if group_of(((sig.s + 1) as i64 - sig.r as i64).rem_euclid(8) as u8) != Group::Trivial {
                continue;
            }
            for v in irreducibles(sig)? {
                let double = direct_sum(&v, &v)?;
                for m in [&v, &double] {
                    let c = abs_class(m)?;
                    if c.group != Group::Trivial || c.value != 0 {
                        return Ok(Err(format!("{sig}: {c}")));
                    }
                }
            }
        }
        Ok(Ok("r+s <= 7".into()))
    }));
    out.push(check("forgetful identities", || {
        let l = crate::clifford::l1();
        let v22 = CliffordRep::new(2, vec![k1(), k2()], vec![l.clone()])?;
        let c11 = abs_class(&forgetful(&v22, 1)?)?;
        let c02 = abs_class(&forgetful(&forgetful(&v22, 1)?, 0)?)?;
        let double = direct_sum(&v22, &v22)?;
        let c_double = abs_class(&forgetful(&double, 1)?)?;
        let ok = c11 == KOClass::new(1, 1) && c02 == KOClass::new(2, 1) && c_double == KOClass::new(1, 0);
        // fg_{1,2} preserves the Z2 value on every Cl_{1,1} module.
        let mut ok2 = true;
        for _ in 0..10 {
            if let Some(v) = random_module(&mut rng, Signature::new(1, 1), 12)? {
                ok2 &= abs_class(&v)?.value == abs_class(&forgetful(&v, 0)?)?.value;
            }
        }
        Ok(verdict(ok && ok2, format!("fg(2,2): {c11}, then {c02}; doubled {c_double}")))
    }));
    out
}

// ---------------------------------------------------------------------------
// pairs

fn structure_residual(j: &ComplexStructure) -> f64 {
    let m = j.j();
    let n = j.n();
    let anti = j
        .context()
        .generators()
        .map(|g| max_abs(&(m * g + g * m)))
        .fold(0.0, f64::max);
    max_abs(&(m + m.transpose()))
        .max(max_abs(&(m.transpose() * m - eye(n))))
        .max(anti)
}

fn pairs_suite(seed: u64) -> Vec<CheckResult> {
    let mut rng = random::rng(seed);
    let mut out = Vec::new();
    out.push(check("standard pairs have class [V]", || {
        for _ in 0..15 {
            let v = random_flow_module(&mut rng, 4, 8)?;
            let Some(h0) = random_module(&mut rng, v.sig(), 16)? else { continue };
            let (j0, j1) = standard_pair(&h0, &v)?;
            let pi = pair_index(&j0, &j1)?;
            if pi.class != abs_class(&v)? || pi.kernel_dim() != v.n() {
                return Ok(Err(format!("{}: {} vs {}", v.sig(), pi.class, abs_class(&v)?)));
            }
        }
        Ok(Ok("15 random (H0, V)".into()))
    }));
    out.push(check("complex structures and midpoint identities", || {
        let mut worst = 0.0_f64;
        for _ in 0..15 {
            let v = random_flow_module(&mut rng, 4, 16)?;
            let ctx = v.without_last_f()?;
            let j0 = random_structure(&mut rng, &ctx)?;
            let j1 = random_structure(&mut rng, &ctx)?;
            worst = worst.max(structure_residual(&j0)).max(structure_residual(&j1));
            worst = worst.max(midpoint_operators(&j0, &j1)?.max_residual());
        }
        Ok(verdict(worst < 1e-10, format!("max residual {worst:.2e}")))
    }));
    out.push(check("spectral submodules are Cl_{r,s+2} modules", || {
        for _ in 0..10 {
            let v = random_flow_module(&mut rng, 3, 8)?;
            let Some(h0) = random_module(&mut rng, v.sig(), 8)? else { continue };
            let (j0, j1) = standard_pair(&h0, &v)?;
            let ctx = j0.context().clone();
            let rot = random::commuting_rotation(&mut rng, &ctx, 0.3);
            let j1 = ComplexStructure::new(&rot * j1.j() * rot.transpose(), ctx.clone())?;
            let x = spectral_submodule(&j0, &j1, 0.5)?;
            let want = Signature::new(ctx.sig().r, ctx.sig().s + 2);
            if x.sig() != want || !check_relations(&x, 1e-8)?.is_clean() {
                return Ok(Err(format!("submodule of signature {}", x.sig())));
            }
        }
        Ok(Ok("10 perturbed standard pairs".into()))
    }));
    out.push(check("pair index is additive for close structures", || {
        for _ in 0..20 {
            let v = random_flow_module(&mut rng, 4, 16)?;
            let ctx = v.without_last_f()?;
            let j0 = random_structure(&mut rng, &ctx)?;
            let mut js = vec![j0];
            for _ in 0..2 {
                let r = random::commuting_rotation(&mut rng, &ctx, 0.2);
                let last = js.last().expect("nonempty").j().clone();
                js.push(ComplexStructure::new(&r * &last * r.transpose(), ctx.clone())?);
            }
            let d01 = op_norm(&(js[0].j() - js[1].j()));
            let d12 = op_norm(&(js[1].j() - js[2].j()));
            if d01 >= 1.0 || d12 >= 1.0 {
                return Ok(Err(format!("hypothesis violated: {d01:.3}, {d12:.3}")));
            }
            let a = pair_index(&js[0], &js[1])?.class;
            let b = pair_index(&js[1], &js[2])?.class;
            let c = pair_index(&js[0], &js[2])?.class;
            if a.plus(&b)? != c {
                return Ok(Err(format!("{a} + {b} != {c}")));
            }
        }
        Ok(Ok("20 triples with both distances < 1".into()))
    }));
    out.push(check("pair index is additive for block flips", || {
        for _ in 0..15 {
            let sig = random_signature(&mut rng, 4);
            let (Some(h0), Some(v1), Some(v2)) = (
                random_module(&mut rng, sig, 8)?,
                random_module(&mut rng, sig, 8)?,
                random_module(&mut rng, sig, 8)?,
            ) else {
                continue;
            };
            if sig.s == 0 {
                continue;
            }
            let h = direct_sum(&direct_sum(&h0, &v1)?, &v2)?;
            let ctx = h.without_last_f()?;
            let f = h.f().last().expect("skew").clone();
            let flip = |lo: usize, hi: usize| {
                let mut s = eye(h.n());
                for i in lo..hi {
                    s[(i, i)] = -1.0;
                }
                &f * s
            };
            let (n0, n1) = (h0.n(), h0.n() + v1.n());
            let j0 = ComplexStructure::new(f.clone(), ctx.clone())?;
            let j1 = ComplexStructure::new(flip(n0, n1), ctx.clone())?;
            let j2 = ComplexStructure::new(flip(n0, h.n()), ctx)?;
            let a = pair_index(&j0, &j1)?.class;
            let b = pair_index(&j1, &j2)?.class;
            let c = pair_index(&j0, &j2)?.class;
            let want_c = abs_class(&v1)?.plus(&abs_class(&v2)?)?;
            if a.plus(&b)? != c || c != want_c {
                return Ok(Err(format!("{sig}: {a} + {b} vs {c}")));
            }
        }
        Ok(Ok("15 nested flips".into()))
    }));
    out.push(check("pair index is locally constant", || {
        for _ in 0..15 {
            let v = random_flow_module(&mut rng, 4, 8)?;
            let sig = v.sig();
            let deg = (sig.s as i64 + 1 - sig.r as i64).rem_euclid(8) as u8;
            if group_of(deg) == Group::Trivial {
                continue;
            }
            let irr = irreducibles(sig)?.remove(0);
            let Some(h0) = random_module(&mut rng, sig, 16)? else { continue };
            let (j0, j1) = standard_pair(&h0, &irr)?;
            let base = pair_index(&j0, &j1)?.class;
            let ctx = j0.context().clone();
            let rot = random::commuting_rotation(&mut rng, &ctx, 0.05);
            let moved = ComplexStructure::new(&rot * j1.j() * rot.transpose(), ctx)?;
            let after = pair_index(&j0, &moved)?.class;
            if base != after {
                return Ok(Err(format!("{sig}: {base} -> {after}")));
            }
        }
        Ok(Ok("15 rotated standard pairs".into()))
    }));
    out.push(check("det parity of conjugated structures", || {
        for _ in 0..30 {
            let k = rng.random_range(1..=6);
            let ctx = CliffordRep::trivial(2 * k);
            let j = random_structure(&mut rng, &ctx)?;
            let o = random::orthogonal(&mut rng, 2 * k);
            let j1 = ComplexStructure::new(o.transpose() * j.j() * &o, ctx)?;
            let ind = pair_index(&j, &j1)?.class.value;
            let det = o.determinant().signum() as i64;
            if (1 - 2 * ind) != det {
                return Ok(Err(format!("Ind = {ind}, det = {det}")));
            }
        }
        Ok(Ok("30 orthogonal matrices".into()))
    }));
    out.push(check("parity of orthogonal pairs", || {
        for _ in 0..30 {
            let n = rng.random_range(1..=12);
            let u0 = random::orthogonal(&mut rng, n);
            let u1 = random::orthogonal(&mut rng, n);
            let p = orthogonal_pair_parity(&u0, &u1)?;
            let det = (u0.determinant() * u1.determinant()).signum() as i64;
            if 1 - 2 * i64::from(p.value) != det {
                return Ok(Err(format!("parity {} vs det {det}", p.value)));
            }
        }
        Ok(Ok("30 pairs".into()))
    }));
    out.push(check("projection dictionary and mod-2 chain", || {
        for _ in 0..20 {
            let (a, b, c, g, z) = (
                rng.random_range(0..=3),
                rng.random_range(0..=3),
                rng.random_range(0..=2),
                rng.random_range(0..=2),
                rng.random_range(0..=2),
            );
            if a + b + c + 2 * g + z == 0 {
                continue;
            }
            let pp = projection_pair_with(&mut rng, a, b, c, g, z)?;
            let want = a as i64 - b as i64;
            let got = projection_pair_index(&pp)?;
            let (j0, j1) = projections_to_structures(&pp)?;
            let ind22 = pair_index(&j0, &j1)?.class;
            let chain = mod2_chain(&j0, &j1)?;
            if got != want || ind22 != KOClass::new(0, want) || chain != [want.rem_euclid(2); 2] {
                return Ok(Err(format!("a={a} b={b}: ind {got}, Ind22 {ind22}, chain {chain:?}")));
            }
        }
        Ok(Ok("20 prescribed pairs".into()))
    }));
    out
}

/// `(Ind_{1,2}, Ind_{0,2})` after forgetting `E₂` and then `E₁`.
pub fn mod2_chain(j0: &ComplexStructure, j1: &ComplexStructure) -> Result<[i64; 2]> {
    let ctx1 = forgetful(j0.context(), 1)?;
    let ctx0 = forgetful(&ctx1, 0)?;
    let on = |ctx: &CliffordRep| -> Result<i64> {
        let a = ComplexStructure::new(j0.j().clone(), ctx.clone())?;
        let b = ComplexStructure::new(j1.j().clone(), ctx.clone())?;
        Ok(pair_index(&a, &b)?.class.value)
    };
    Ok([on(&ctx1)?, on(&ctx0)?])
}

// ---------------------------------------------------------------------------
// flow

/// `(1 − 2t) F_{s+1}` on a Cl_{r,s+1} module.
pub fn normalization_path(v: &CliffordRep) -> Result<SkewPath> {
    let ctx = v.without_last_f()?;
    let f = v.f().last().expect("skew generator").clone();
    Ok(SkewPath::new(ctx, format!("normalization {}", v.sig()), move |t| &f * (1.0 - 2.0 * t)))
}

/// Every irreducible Cl_{r,s+1} module and its double with `r, s+1 ≤ 4`.
pub fn normalization_modules() -> Result<Vec<CliffordRep>> {
    let mut out = Vec::new();
    for r in 0..=4 {
        for s1 in 1..=4 {
            for v in irreducibles(Signature::new(r, s1))? {
                out.push(direct_sum(&v, &v)?);
                out.push(v);
            }
        }
    }
    Ok(out)
}

fn flow_suite(seed: u64) -> Vec<CheckResult> {
    let mut rng = random::rng(seed);
    let opts = FlowOptions::default();
    let mut out = Vec::new();
    out.push(check("normalization", || {
        let mods = normalization_modules()?;
        for v in &mods {
            let (a, b) = (spectral_flow(&normalization_path(v)?, &opts)?, abs_class(v)?);
            if a != b {
                return Ok(Err(format!("{}: flow {a}, abs {b}", v.sig())));
            }
        }
        Ok(Ok(format!("{} modules", mods.len())))
    }));
    out.push(check("endpoint theorem", || {
        let mut nonzero = 0;
        for _ in 0..20 {
            let p = random_path(&mut rng, 4, 16)?;
            let (a, b) = (spectral_flow(&p, &opts)?, endpoint_flow(&p)?);
            if a != b {
                return Ok(Err(format!("{}: {a} vs {b}", p.label())));
            }
            nonzero += usize::from(!a.is_zero());
        }
        Ok(Ok(format!("20 random paths, {nonzero} with nonzero flow")))
    }));
    out.push(check("homotopy invariance", || {
        for _ in 0..10 {
            let v = random_flow_module(&mut rng, 4, 16)?;
            let ctx = v.without_last_f()?;
            let a0 = invertible_anticommuting(&mut rng, &ctx)?;
            let a1 = invertible_anticommuting(&mut rng, &ctx)?;
            let b0 = random::anticommuting_skew(&mut rng, &ctx) * 2.0;
            let b1 = random::anticommuting_skew(&mut rng, &ctx) * 2.0;
            let x = spectral_flow(&bump_path(&ctx, a0.clone(), a1.clone(), b0, "u=0"), &opts)?;
            let y = spectral_flow(&bump_path(&ctx, a0, a1, b1, "u=1"), &opts)?;
            if x != y {
                return Ok(Err(format!("{}: {x} vs {y}", v.sig())));
            }
        }
        Ok(Ok("10 homotopic pairs of paths".into()))
    }));
    out.push(check("path additivity and reversal", || {
        for _ in 0..10 {
            let v = random_flow_module(&mut rng, 4, 16)?;
            let ctx = v.without_last_f()?;
            let a = (0..3).map(|_| invertible_anticommuting(&mut rng, &ctx)).collect::<Result<Vec<Mat>>>()?;
            let b = random::anticommuting_skew(&mut rng, &ctx) * 2.0;
            let p = bump_path(&ctx, a[0].clone(), a[1].clone(), b.clone(), "p");
            let q = bump_path(&ctx, a[1].clone(), a[2].clone(), -b, "q");
            let (fp, fq) = (spectral_flow(&p, &opts)?, spectral_flow(&q, &opts)?);
            let fpq = spectral_flow(&p.concat(&q)?, &opts)?;
            let frev = spectral_flow(&p.reversed(), &opts)?;
            if fpq != fp.plus(&fq)? || frev != fp.negate() {
                return Ok(Err(format!("{}: {fp} + {fq} vs {fpq}, reversed {frev}", v.sig())));
            }
        }
        Ok(Ok("10 concatenations".into()))
    }));
    out.push(check("stability, constancy and direct sums", || {
        for _ in 0..10 {
            let v = random_flow_module(&mut rng, 4, 12)?;
            let ctx = v.without_last_f()?;
            let Some(w) = random_module(&mut rng, v.sig(), 12)? else { continue };
            let ctx_w = w.without_last_f()?;
            let mk = |rng: &mut Rng, c: &CliffordRep| -> Result<SkewPath> {
                let a0 = invertible_anticommuting(rng, c)?;
                let a1 = invertible_anticommuting(rng, c)?;
                let b = random::anticommuting_skew(rng, c) * 2.0;
                Ok(bump_path(c, a0, a1, b, "p"))
            };
            let p = mk(&mut rng, &ctx)?;
            let q = mk(&mut rng, &ctx_w)?;
            let s = invertible_anticommuting(&mut rng, &ctx_w)?;
            let s2 = s.clone();
            let constant = SkewPath::new(ctx_w.clone(), "constant", move |_| s2.clone());
            let (fp, fq) = (spectral_flow(&p, &opts)?, spectral_flow(&q, &opts)?);
            let stab = spectral_flow(&p.direct_sum(&constant)?, &opts)?;
            let fc = spectral_flow(&constant, &opts)?;
            let sum = spectral_flow(&p.direct_sum(&q)?, &opts)?;
            if stab != fp || !fc.is_zero() || sum != fp.plus(&fq)? {
                return Ok(Err(format!("{}: flow {fp}, stabilized {stab}, constant {fc}, sum {sum}", v.sig())));
            }
        }
        Ok(Ok("10 families".into()))
    }));
    out.push(check("straight line between structures gives the pair index", || {
        for _ in 0..10 {
            let v = random_flow_module(&mut rng, 4, 8)?;
            let Some(h0) = random_module(&mut rng, v.sig(), 8)? else { continue };
            let (j0, j1) = standard_pair(&h0, &v)?;
            let ctx = j0.context().clone();
            let rot = random::commuting_rotation(&mut rng, &ctx, 0.4);
            let j1 = &rot * j1.j() * rot.transpose();
            let (a, b) = (j0.j().clone(), j1.clone());
            let path = SkewPath::new(ctx.clone(), "line", move |t| &a * (1.0 - t) + &b * t);
            let f = spectral_flow(&path, &opts)?;
            let pi = pair_index(&j0, &ComplexStructure::new(j1, ctx)?)?.class;
            if f != pi {
                return Ok(Err(format!("{}: flow {f}, pair {pi}", v.sig())));
            }
        }
        Ok(Ok("10 lines".into()))
    }));
    out.push(check("flow is independent of the kernel completion", || {
        for k in 0..10 {
            let v = random_flow_module(&mut rng, 4, 16)?;
            let p = normalization_path(&v)?;
            let q = random_path(&mut rng, 4, 16)?;
            for path in [&p, &q] {
                let random_opts = FlowOptions {
                    completion: Completion::Random(seed.wrapping_add(k)),
                    ..opts
                };
                let (a, b) = (spectral_flow(path, &opts)?, spectral_flow(path, &random_opts)?);
                if a != b {
                    return Ok(Err(format!("{}: {a} vs {b}", path.label())));
                }
            }
        }
        Ok(Ok("20 paths".into()))
    }));
    out.push(check("relation to classical and mod-2 flows", || {
        for _ in 0..10 {
            let n = rng.random_range(1..=6);
            let sym = |rng: &mut Rng| sym_part(&random::gaussian(rng, n, n));
            let (s0, s1, s2) = (sym(&mut rng), sym(&mut rng), sym(&mut rng));
            let h = move |t: f64| &s0 * (1.0 - t) + &s1 * t + &s2 * (PI * t).sin();
            let cl = classical_sf(&h)?;
            let ctx = CliffordRep::new(2 * n, vec![kron(&eye(n), &k1()), kron(&eye(n), &k2())], Vec::new())?;
            let kk = k1() * k2();
            let h2 = h.clone();
            let path = SkewPath::new(ctx, "relation r=2", move |t| kron(&h2(t), &kk));
            let sf = spectral_flow(&path, &opts)?;
            if sf != KOClass::new(0, cl) {
                return Ok(Err(format!("classical {cl}, SF22 {sf}")));
            }
        }
        for _ in 0..10 {
            let s1 = rng.random_range(1..=3);
            let Some(v) = random_module(&mut rng, Signature::new(1, s1), 16)? else { continue };
            let ctx = v.without_last_f()?;
            let a0 = invertible_anticommuting(&mut rng, &ctx)?;
            let a1 = invertible_anticommuting(&mut rng, &ctx)?;
            let b = random::anticommuting_skew(&mut rng, &ctx) * 2.0;
            let with_e = bump_path(&ctx, a0.clone(), a1.clone(), b.clone(), "r=1");
            let without = bump_path(&forgetful(&ctx, 0)?, a0, a1, b, "r=0");
            let (x, y) = (spectral_flow(&with_e, &opts)?, spectral_flow(&without, &opts)?);
            if x.group == Group::Z2 && y.group == Group::Z2 && x.value != y.value {
                return Ok(Err(format!("SF1 {x}, SF0 {y}")));
            }
        }
        Ok(Ok("10 symmetric paths, forgetful r=1".into()))
    }));
    out.push(check("cayley transform and clamp", || {
        let mut worst = 0.0_f64;
        for _ in 0..15 {
            let v = random_flow_module(&mut rng, 4, 16)?;
            let ctx = v.without_last_f()?;
            if ctx.sig().s == 0 {
                continue;
            }
            let t = invertible_anticommuting(&mut rng, &ctx)? * rng.random_range(0.2..5.0);
            let phi = cayley(&t, &ctx)?;
            let n = ctx.n();
            let fs = ctx.f().last().expect("skew");
            let mut res = max_abs(&(&phi + phi.transpose())).max(max_abs(&(phi.transpose() * &phi - eye(n))));
            for g in ctx.e().iter().chain(&ctx.f()[..ctx.f().len() - 1]) {
                res = res.max(max_abs(&(&phi * g + g * &phi)));
            }
            let dist = op_norm(&(&phi - fs));
            if dist >= 2.0 {
                return Ok(Err(format!("{}: |Phi(T) - F_s| = {dist}", ctx.sig())));
            }
            let small = skew_part(&random::gaussian(&mut rng, n, n));
            let small = &small / (2.0 * op_norm(&small));
            res = res.max(max_abs(&(clamp_phase(&small) - &small)));
            res = res.max((op_norm(&clamp_phase(&(&small * 40.0))) - 1.0).max(0.0));
            res = res.max(max_abs(&(clamp_phase(&(fs * 3.0)) - fs)));
            worst = worst.max(res);
        }
        Ok(verdict(worst < 1e-9, format!("max residual {worst:.2e}")))
    }));
    out
}

// ---------------------------------------------------------------------------
// models

/// `(label, SF₀,₄, classical_sf, kernel dimensions of the contributing segments)`.
pub type AiiRow = (String, KOClass, i64, Vec<usize>);

pub fn aii_quarter_relation() -> Result<Vec<AiiRow>> {
    models::aii_demos()
        .into_iter()
        .map(|(label, n, h)| {
            let h = std::sync::Arc::new(h);
            let h2 = h.clone();
            let classical = classical_sf(&move |t| models::realified_hermitian(&h2(t)))?;
            let path = models::aii_path(n, move |t| h(t))?;
            let report = crate::flow::spectral_flow_report(&path, &FlowOptions::default())?;
            let dims = report.segments.iter().map(|s| s.kernel_dim).filter(|&d| d > 0).collect();
            Ok((label.to_string(), report.class, classical, dims))
        })
        .collect()
}

fn random_c_commuting(rng: &mut Rng, rs: &RealStructure) -> CMat {
    let n = rs.n();
    let a = CMat::new(random::gaussian(rng, n, n), random::gaussian(rng, n, n));
    let u = rs.u();
    // ½(A + U Ā Ū) commutes with C = U ∘ conj.
    &(&a + &(&(u * &a.conj()) * &u.conj())) * &CMat::real(eye(n) * 0.5)
}

fn models_suite(seed: u64) -> Vec<CheckResult> {
    let mut rng = random::rng(seed);
    let opts = FlowOptions::default();
    let mut out = Vec::new();
    out.push(check("kitaev flow is 1 for every ring length", || {
        for n in 3..=16 {
            let p = models::kitaev_path(n)?;
            let f = spectral_flow(&p, &opts)?;
            if f != KOClass::new(2, 1) {
                return Ok(Err(format!("N = {n}: {f}")));
            }
        }
        Ok(Ok("N = 3..16".into()))
    }));
    out.push(check("flux insertion reproduces abs_class", || {
        let mut count = 0;
        for r in 0..=3 {
            for s1 in 1..=(4 - r) {
                for v in irreducibles(Signature::new(r, s1))? {
                    let f = spectral_flow(&models::flux_path(&v, 4)?, &opts)?;
                    let a = abs_class(&v)?;
                    if f != a {
                        return Ok(Err(format!("{}: flow {f}, abs {a}", v.sig())));
                    }
                    count += 1;
                }
            }
        }
        Ok(Ok(format!("{count} modules")))
    }));
    out.push(check("quaternionic quarter relation", || {
        let rows = aii_quarter_relation()?;
        let mut ok = true;
        let mut detail = Vec::new();
        for (label, sf, cl, dims) in &rows {
            let quarter = cl % 4 == 0 && *sf == KOClass::new(4, cl / 4);
            let dims_ok = dims.iter().all(|d| d % 4 == 0);
            ok &= quarter && dims_ok;
            detail.push(format!("{label}: SF04 {} classical {cl} kernels {dims:?}", sf.value));
        }
        Ok(verdict(ok, detail.join("; ")))
    }));
    out.push(check("realification is an algebra map", || {
        let mut worst = 0.0_f64;
        for _ in 0..10 {
            let n = 2 * rng.random_range(1..=4);
            let rs = RealStructure::new(CMat::real(kron(&eye(n / 2), &k2())))?;
            let basis = rs.basis();
            worst = worst.max(max_abs(&(basis.transpose() * basis - eye(n))));
            let a = random_c_commuting(&mut rng, &rs);
            let b = random_c_commuting(&mut rng, &rs);
            let ab = &a * &b;
            let lhs = models::realify(&rs, &ab)?;
            let rhs = models::realify(&rs, &a)? * models::realify(&rs, &b)?;
            worst = worst.max(max_abs(&(lhs - rhs)));
        }
        Ok(verdict(worst < 1e-10, format!("max residual {worst:.2e}")))
    }));
    out
}

// ---------------------------------------------------------------------------
// rs_verify

fn rs_suite(_seed: u64) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let v = match irreducible_rep(Signature::new(0, 1), None) {
        Ok(v) => v,
        Err(e) => {
            out.push(check("module", || Err(e)));
            return out;
        }
    };
    out.push(check("discrete operator is skew and equivariant", || {
        let p = RSProblem::new(v.clone(), 12.0, 200)?;
        let mut worst = 0.0_f64;
        for conv in [Convention::Standard, Convention::Swapped] {
            let op = match conv {
                Convention::Standard => rs_verify::assemble_rs_operator(&p)?,
                Convention::Swapped => rs_verify::assemble_swapped_operator(&p)?,
            };
            let gens = rs_verify::lifted_generators(&v, conv)?;
            worst = worst
                .max(op.matrix.skew_residual())
                .max(rs_verify::equivariance_residual(&op, &gens));
        }
        Ok(verdict(worst == 0.0, format!("max residual {worst:e}")))
    }));
    out.push(check("kernel class equals flow class", || {
        let p = RSProblem::new(v.clone(), 12.0, 1200)?;
        let r = rs_verify::verify_rs(&p)?;
        let ok = r.kernel_dim == 2
            && r.gap_ratio >= rs_verify::RS_GAP
            && r.classes_agree()
            && r.kernel_class == KOClass::new(2, 1)
            && r.profile_error < 1e-2;
        Ok(verdict(
            ok,
            format!(
                "kernel dim {}, gap {:.3e}, class {}, profile error {:.2e}",
                r.kernel_dim, r.gap_ratio, r.kernel_class, r.profile_error
            ),
        ))
    }));
    out.push(check("swapped convention gives the same class", || {
        let p = RSProblem::new(v.clone(), 12.0, 600)?;
        let a = rs_verify::verify_rs_with(&p, Convention::Standard)?;
        let b = rs_verify::verify_rs_with(&p, Convention::Swapped)?;
        Ok(verdict(
            a.kernel_class == b.kernel_class && b.classes_agree() && b.profile_error < 1e-2,
            format!("{} vs {}", a.kernel_class, b.kernel_class),
        ))
    }));
    out.push(check("other modules", || {
        for (sig, c) in [
            (Signature::new(2, 1), Some(Chirality::Plus)),
            (Signature::new(2, 1), Some(Chirality::Minus)),
            (Signature::new(1, 2), None),
        ] {
            let w = irreducible_rep(sig, c)?;
            let r = rs_verify::verify_rs(&RSProblem::new(w.clone(), 12.0, 600)?)?;
            if !r.classes_agree() || r.kernel_class != abs_class(&w)? {
                return Ok(Err(format!("{sig}: kernel {}, flow {}", r.kernel_class, r.flow_class)));
            }
        }
        Ok(Ok("Cl_{2,1} both chiralities, Cl_{1,2}".into()))
    }));
    out.push(check("zero cluster converges under refinement", || {
        let p = RSProblem::new(v.clone(), 12.0, 1200)?;
        let pts = rs_verify::convergence_study(&p, &[300, 600, 1200])?;
        let gap = rs_verify::continuum_gap(&p);
        let shrink = pts[1].largest_zero / pts[2].largest_zero;
        let bounded = pts.iter().all(|c| c.smallest_nonzero >= 0.5 * gap);
        let detail = pts
            .iter()
            .map(|c| format!("m={}: {:.3e} / {:.4}", c.m, c.largest_zero, c.smallest_nonzero))
            .collect::<Vec<_>>()
            .join(", ");
        Ok(verdict(shrink >= 3.0 && bounded, format!("{detail}; shrink 600->1200 {shrink:.2}")))
    }));
    out
}
