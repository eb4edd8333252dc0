//! One line per acceptance criterion. Runs without the libtest harness so that every
//! line is printed; exits nonzero when any criterion fails.

use std::time::{Duration, Instant};

use koflow::abs_index::{abs_class, KOClass};
use koflow::clifford::{
    check_relations, cl11_tensor, direct_sum, volume_element, volume_square_sign, CliffordRep, Signature,
};
use koflow::flow::{endpoint_flow, spectral_flow, FlowOptions};
use koflow::linalg::{eye, op_norm, Mat};
use koflow::models::kitaev_path;
use koflow::pairs::{
    orthogonal_pair_parity, pair_index, projection_pair_index, projections_to_structures, ComplexStructure,
};
use koflow::props::{
    irreducibles, mod2_chain, normalization_modules, normalization_path, projection_pair_with, random_module,
    random_path, random_structure, run_suite,
};
use koflow::random::{commuting_rotation, orthogonal, rng};
use koflow::rs_verify::{convergence_study, verify_rs, RSProblem};
use koflow::Result;
use rand::Rng;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Result<Verdict> {
    Ok(Verdict { passed, detail: detail.into() })
}

fn criterion_1() -> Result<Verdict> {
    let mut slowest = Duration::ZERO;
    for n in 3..=16 {
        let start = Instant::now();
        let sf = spectral_flow(&kitaev_path(n)?, &FlowOptions::default())?;
        let dt = start.elapsed();
        slowest = slowest.max(dt);
        if sf != KOClass::new(2, 1) {
            return verdict(false, format!("N = {n}: flow {sf}"));
        }
        if dt >= Duration::from_secs(1) {
            return verdict(false, format!("N = {n} took {dt:?}"));
        }
    }
    verdict(true, format!("SF = 1 in Z/2 for N = 3..16, slowest {slowest:?}"))
}

fn criterion_2() -> Result<Verdict> {
    let mods = normalization_modules()?;
    let mut degrees = [false; 8];
    for v in &mods {
        let sf = spectral_flow(&normalization_path(v)?, &FlowOptions::default())?;
        let abs = abs_class(v)?;
        if sf != abs {
            return verdict(false, format!("{}: flow {sf}, abs {abs}", v.sig()));
        }
        degrees[sf.degree as usize] = true;
    }
    let covered = degrees.iter().all(|&d| d);
    verdict(covered, format!("{} modules, all degrees covered: {covered}", mods.len()))
}

fn criterion_3() -> Result<Verdict> {
    let start = Instant::now();
    let mut nonzero = 0;
    let mut largest = 0;
    for seed in 0..100 {
        let path = random_path(&mut rng(seed), 4, 32)?;
        largest = largest.max(path.n());
        let (sf, ep) = (spectral_flow(&path, &FlowOptions::default())?, endpoint_flow(&path)?);
        if sf != ep {
            return verdict(false, format!("seed {seed} ({}): flow {sf}, endpoint {ep}", path.label()));
        }
        nonzero += usize::from(!sf.is_zero());
    }
    let dt = start.elapsed();
    verdict(
        dt < Duration::from_secs(60) && largest <= 32,
        format!("100 paths up to n = {largest}, {nonzero} with nonzero flow, {dt:.2?}"),
    )
}

fn criterion_4() -> Result<Verdict> {
    let mut r = rng(4);
    let mut nonzero = 0;
    for i in 0..100 {
        let (a, b, c, g) = (r.random_range(0..=6), r.random_range(0..=6), r.random_range(0..=6), r.random_range(0..=6));
        let used = a + b + c + 2 * g;
        let z = r.random_range(0..=(40 - used).min(8));
        if used + z == 0 {
            continue;
        }
        let pp = projection_pair_with(&mut r, a, b, c, g, z)?;
        let ind = projection_pair_index(&pp)?;
        let (j0, j1) = projections_to_structures(&pp)?;
        let ind22 = pair_index(&j0, &j1)?.class;
        let chain = mod2_chain(&j0, &j1)?;
        if ind != a as i64 - b as i64 || ind22 != KOClass::new(0, ind) || chain != [ind.rem_euclid(2); 2] {
            return verdict(false, format!("pair {i}: ind {ind}, Ind22 {ind22}, chain {chain:?}"));
        }
        nonzero += usize::from(ind != 0);
    }
    verdict(true, format!("100 pairs up to n = 40, {nonzero} with nonzero index, mod-2 chain holds"))
}

fn criterion_5() -> Result<Verdict> {
    let mut r = rng(5);
    let mut flips = 0;
    for i in 0..100 {
        // (−1)^Ind₀,₂(J, OᵀJO) = det O.
        let k = r.random_range(1..=10);
        let ctx = CliffordRep::trivial(2 * k);
        let j = random_structure(&mut r, &ctx)?;
        let o = orthogonal(&mut r, 2 * k);
        let jo = ComplexStructure::new(o.transpose() * j.j() * &o, ctx)?;
        let ind = pair_index(&j, &jo)?.class.value;
        let det = o.determinant().signum() as i64;
        if 1 - 2 * ind != det {
            return verdict(false, format!("matrix {i}: Ind {ind}, det {det}"));
        }
        // (−1)^dim ker(I + U₀ᵀU₁) = det U₀ det U₁, with a prescribed −1 eigenspace.
        let n = r.random_range(1..=20);
        let m = r.random_range(0..=n);
        let (u0, q) = (orthogonal(&mut r, n), orthogonal(&mut r, n));
        let d = Mat::from_fn(n, n, |a, b| if a != b { 0.0 } else if a < m { -1.0 } else { 1.0 });
        let u1 = &u0 * (&q * d * q.transpose());
        let p = orthogonal_pair_parity(&u0, &u1)?;
        let det = (u0.determinant() * u1.determinant()).signum() as i64;
        if p.kernel_dim != m || 1 - 2 * i64::from(p.value) != det {
            return verdict(false, format!("pair {i}: kernel {} of {m}, parity {}, det {det}", p.kernel_dim, p.value));
        }
        flips += usize::from(det < 0);
    }
    verdict(true, format!("100 conjugations and 100 pairs, {flips} with det -1"))
}

/// `J_σ = F · diag(σ_i I_{V_i})` on `H₀ ⊕ V₁ ⊕ … ⊕ V_k`, turned by a rotation commuting
/// with the context. `Ind(J_σ, J_τ) = Σ_{σ_i = +, τ_i = −} [V_i] − Σ_{σ_i = −, τ_i = +} [V_i]`.
fn criterion_6() -> Result<Verdict> {
    let mut r = rng(6);
    let mut triples = 0;
    let mut nonzero = 0;
    while triples < 40 {
        let total = r.random_range(1..=4);
        let rr = r.random_range(0..total);
        let sig = Signature::new(rr, total - rr);
        let Some(h0) = random_module(&mut r, sig, 6)? else { continue };
        let mut parts = vec![h0];
        for _ in 0..3 {
            let Some(v) = random_module(&mut r, sig, 6)? else { continue };
            parts.push(v);
        }
        if parts.len() < 2 {
            continue;
        }
        let mut h = parts[0].clone();
        for p in &parts[1..] {
            h = direct_sum(&h, p)?;
        }
        let ctx = h.without_last_f()?;
        let f = h.f().last().expect("skew generator").clone();
        let q = commuting_rotation(&mut r, &ctx, 1.0);
        let signs: Vec<Vec<f64>> = (0..3)
            .map(|_| {
                let mut s: Vec<f64> = (0..parts.len()).map(|_| if r.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
                s[0] = 1.0;
                s
            })
            .collect();
        let structure = |sg: &[f64]| -> Result<ComplexStructure> {
            let mut d = eye(h.n());
            let mut at = 0;
            for (p, &x) in parts.iter().zip(sg) {
                for i in at..at + p.n() {
                    d[(i, i)] = x;
                }
                at += p.n();
            }
            ComplexStructure::new(&q * (&f * d) * q.transpose(), ctx.clone())
        };
        let js = signs.iter().map(|s| structure(s)).collect::<Result<Vec<_>>>()?;
        let expected = |a: &[f64], b: &[f64]| -> Result<KOClass> {
            let mut acc = KOClass::zero(abs_class(&parts[0])?.degree);
            for (p, (x, y)) in parts.iter().zip(a.iter().zip(b)) {
                let c = abs_class(p)?;
                if x > y {
                    acc = acc.plus(&c)?;
                } else if x < y {
                    acc = acc.plus(&c.negate())?;
                }
            }
            Ok(acc)
        };
        let i01 = pair_index(&js[0], &js[1])?.class;
        let i12 = pair_index(&js[1], &js[2])?.class;
        let i02 = pair_index(&js[0], &js[2])?.class;
        if i01.plus(&i12)? != i02
            || i01 != expected(&signs[0], &signs[1])?
            || i02 != expected(&signs[0], &signs[2])?
        {
            return verdict(false, format!("{sig}: {i01} + {i12} vs {i02}"));
        }
        nonzero += usize::from(!i02.is_zero());
        triples += 1;
    }
    // Triples of nearby structures also meet the operator-norm form of the hypothesis.
    let mut close = 0;
    while close < 20 {
        let total = r.random_range(1..=4);
        let rr = r.random_range(0..total);
        let sig = Signature::new(rr, total - rr);
        let Some(v) = random_module(&mut r, sig, 12)? else { continue };
        let ctx = v.without_last_f()?;
        let mut js = vec![random_structure(&mut r, &ctx)?];
        for _ in 0..2 {
            let q = commuting_rotation(&mut r, &ctx, 0.2);
            let last = js.last().expect("nonempty").j().clone();
            js.push(ComplexStructure::new(&q * last * q.transpose(), ctx.clone())?);
        }
        let d01 = op_norm(&(js[0].j() - js[1].j()));
        let d12 = op_norm(&(js[1].j() - js[2].j()));
        let (a, b, c) = (pair_index(&js[0], &js[1])?.class, pair_index(&js[1], &js[2])?.class, pair_index(&js[0], &js[2])?.class);
        if d01 >= 1.0 || d12 >= 1.0 || a.plus(&b)? != c {
            return verdict(false, format!("close triple {sig}: {d01:.3}, {d12:.3}: {a} + {b} vs {c}"));
        }
        close += 1;
    }
    verdict(true, format!("40 sign-pattern triples ({nonzero} nonzero), 20 close triples"))
}

fn criterion_7() -> Result<Verdict> {
    let plane = CliffordRep::new(2, Vec::new(), vec![koflow::clifford::l1()])?;
    let p = RSProblem::new(plane, 12.0, 1200)?;
    let start = Instant::now();
    let rep = verify_rs(&p)?;
    let dt = start.elapsed();
    let one = KOClass::new(2, 1);
    let main = rep.kernel_dim == 2
        && rep.gap_ratio >= 100.0
        && rep.kernel_class == one
        && rep.flow_class == one
        && rep.profile_error < 1e-2
        && dt < Duration::from_secs(30);
    let conv = convergence_study(&p, &[600, 1200])?;
    let ratio = conv[0].largest_zero / conv[1].largest_zero;
    verdict(
        main && ratio >= 3.0,
        format!(
            "kernel {} gap {:.3e} kernel {} flow {} profile error {:.2e} in {dt:.2?}; zero cluster {:.3e} -> {:.3e}, ratio {ratio:.2} (needs 3)",
            rep.kernel_dim, rep.gap_ratio, rep.kernel_class, rep.flow_class, rep.profile_error,
            conv[0].largest_zero, conv[1].largest_zero
        ),
    )
}

fn criterion_8() -> Result<Verdict> {
    let mut ok = true;
    let mut parts = Vec::new();
    for (label, sf, classical, kernels) in koflow::props::aii_quarter_relation()? {
        let holds = 4 * sf.value == classical && kernels.iter().all(|k| k % 4 == 0);
        ok &= holds;
        parts.push(format!("{label}: SF04 {} vs classical/4 = {}/4, kernels {kernels:?}", sf.value, classical));
    }
    verdict(ok, parts.join("; "))
}

fn criterion_9() -> Result<Verdict> {
    let mut count = 0;
    for total in 0..=10 {
        for r in 0..=total {
            let sig = Signature::new(r, total - r);
            for v in irreducibles(sig)? {
                if check_relations(&v, 0.0)?.max_residual() != 0.0 || v.n() != sig.irreducible_dim() {
                    return verdict(false, format!("{sig} is not exact"));
                }
                if total <= 8 {
                    // ω² = (−1)^{n(n−1)/2} (−1)^s.
                    let n = total as i64;
                    let expect = if (n * (n - 1) / 2 + (total - r) as i64) % 2 == 0 { 1.0 } else { -1.0 };
                    let w = volume_element(&v);
                    if volume_square_sign(sig) != expect || &w * &w != eye(v.n()) * expect {
                        return verdict(false, format!("{sig}: volume sign"));
                    }
                }
                if total <= 6 {
                    for m in [v.clone(), direct_sum(&v, &v)?] {
                        if abs_class(&cl11_tensor(&m))? != abs_class(&m)? {
                            return verdict(false, format!("{sig}: cl11 tensor changes the class"));
                        }
                    }
                }
                count += 1;
            }
        }
    }
    verdict(true, format!("{count} irreducibles exact, volume signs and cl11 invariance hold"))
}

fn criterion_10() -> Result<Verdict> {
    const WANTED: [&str; 3] = [
        "homotopy invariance",
        "path additivity and reversal",
        "stability, constancy and direct sums",
    ];
    for seed in 0..3 {
        let suite = run_suite("flow", seed)?;
        for name in WANTED {
            let Some(c) = suite.checks.iter().find(|c| c.name == name) else {
                return verdict(false, format!("missing check '{name}'"));
            };
            if !c.passed {
                return verdict(false, format!("seed {seed}, {name}: {}", c.detail));
            }
        }
    }
    verdict(true, "homotopy, path additivity, stability, constancy and direct sums on seeds 0..3")
}

type Criterion = (&'static str, fn() -> Result<Verdict>);

fn main() {
    let criteria: [Criterion; 10] = [
        ("Kitaev flux insertion", criterion_1),
        ("normalization sweep", criterion_2),
        ("endpoint theorem", criterion_3),
        ("projection dictionary", criterion_4),
        ("parity identities", criterion_5),
        ("pair-index additivity", criterion_6),
        ("Robbin-Salamon discretization", criterion_7),
        ("AII quarter relation", criterion_8),
        ("Clifford layer", criterion_9),
        ("property suites", criterion_10),
    ];
    let mut failed = 0;
    for (i, (title, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = run().unwrap_or_else(|e| Verdict { passed: false, detail: format!("error: {e}") });
        let tag = if v.passed { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {tag} {title}: {} [{:.2?}]", i + 1, v.detail, start.elapsed());
        failed += usize::from(!v.passed);
    }
    println!("{} of 10 criteria pass", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
