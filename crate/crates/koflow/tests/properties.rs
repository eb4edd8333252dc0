use koflow::abs_index::{abs_class, KOClass};
use koflow::banded::Banded;
use koflow::clifford::{
    check_relations, cl11_tensor, direct_sum, irreducible_rep, volume_element, Chirality, Signature,
    CONSTRUCTION_TOL,
};
use koflow::flow::{endpoint_flow, spectral_flow, FlowOptions};
use koflow::json::{rep_from_str, rep_to_string};
use koflow::linalg::{eye, Mat};
use koflow::pairs::{orthogonal_pair_parity, ComplexStructure, pair_index, projection_pair_index, projections_to_structures};
use koflow::props::{projection_pair_with, random_module, random_path, standard_pair};
use koflow::random::{commuting_rotation, gaussian, orthogonal, rng};
use proptest::prelude::*;

fn signature(max_total: usize) -> impl Strategy<Value = Signature> {
    (0..=max_total).prop_flat_map(|t| (0..=t).prop_map(move |r| Signature::new(r, t - r)))
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn ko_classes_form_a_group(d in 0u8..8, a in -20i64..20, b in -20i64..20, c in -20i64..20) {
        let (x, y, z) = (KOClass::new(d, a), KOClass::new(d, b), KOClass::new(d, c));
        prop_assert_eq!(x.plus(&y).unwrap(), y.plus(&x).unwrap());
        prop_assert_eq!(x.plus(&y).unwrap().plus(&z).unwrap(), x.plus(&y.plus(&z).unwrap()).unwrap());
        prop_assert!(x.plus(&x.negate()).unwrap().is_zero());
        prop_assert_eq!(x.plus(&y).unwrap(), KOClass::new(d, a + b));
    }

    #[test]
    fn irreducibles_satisfy_relations_exactly(sig in signature(9), plus in any::<bool>()) {
        let c = sig.has_two_irreducibles().then_some(if plus { Chirality::Plus } else { Chirality::Minus });
        let v = irreducible_rep(sig, c).unwrap();
        prop_assert_eq!(v.n(), sig.irreducible_dim());
        prop_assert_eq!(check_relations(&v, 0.0).unwrap().max_residual(), 0.0);
        if let Some(c) = c {
            prop_assert_eq!(volume_element(&v), eye(v.n()) * c.sign());
        }
    }

    #[test]
    fn class_is_additive_and_conjugation_invariant(sig in signature(6), seed in any::<u64>()) {
        let mut r = rng(seed);
        let (Some(a), Some(b)) = (random_module(&mut r, sig, 24).unwrap(), random_module(&mut r, sig, 24).unwrap()) else {
            return Ok(());
        };
        let sum = direct_sum(&a, &b).unwrap();
        let (ca, cb) = (abs_class(&a).unwrap(), abs_class(&b).unwrap());
        prop_assert_eq!(abs_class(&sum).unwrap(), ca.plus(&cb).unwrap());
        let q = orthogonal(&mut r, sum.n());
        prop_assert_eq!(abs_class(&sum.conjugate(&q)).unwrap(), abs_class(&sum).unwrap());
    }

    #[test]
    fn cl11_tensor_preserves_class(sig in signature(6), seed in any::<u64>()) {
        let mut r = rng(seed);
        if let Some(v) = random_module(&mut r, sig, 16).unwrap() {
            let t = cl11_tensor(&v);
            prop_assert!(check_relations(&t, 1e-10).unwrap().is_clean());
            prop_assert_eq!(abs_class(&t).unwrap(), abs_class(&v).unwrap());
        }
    }

    #[test]
    fn json_round_trip_is_exact(sig in signature(7), plus in any::<bool>()) {
        let c = sig.has_two_irreducibles().then_some(if plus { Chirality::Plus } else { Chirality::Minus });
        let v = irreducible_rep(sig, c).unwrap();
        let back = rep_from_str(&rep_to_string(&v)).unwrap();
        prop_assert_eq!(back.e(), v.e());
        prop_assert_eq!(back.f(), v.f());
    }

    #[test]
    fn banded_solve_inverts_matvec(n in 2usize..40, kl in 0usize..4, ku in 0usize..4, seed in any::<u64>()) {
        let g = gaussian(&mut rng(seed), n, n);
        let mut a = Banded::zeros(n, kl, ku);
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                // Diagonal dominance keeps the system well conditioned.
                let v = if i == j { 10.0 + g[(i, j)].abs() } else { g[(i, j)] };
                a.add(i, j, v);
            }
        }
        let x: Vec<f64> = (0..n).map(|i| g[(i, 0)]).collect();
        let b = a.matvec(&x);
        let y = a.lu().unwrap().solve(&b);
        for i in 0..n {
            prop_assert!((x[i] - y[i]).abs() < 1e-10);
        }
        prop_assert_eq!(a.to_dense() * Mat::from_column_slice(n, 1, &x), Mat::from_column_slice(n, 1, &b));
    }
}

proptest! {
    #![proptest_config(config(32))]

    #[test]
    fn projection_index_counts_intersections(
        a in 0usize..4, b in 0usize..4, c in 0usize..4, g in 0usize..5, z in 0usize..4, seed in any::<u64>()
    ) {
        prop_assume!(a + b + c + g + z > 0);
        let pp = projection_pair_with(&mut rng(seed), a, b, c, g, z).unwrap();
        let ind = projection_pair_index(&pp).unwrap();
        prop_assert_eq!(ind, a as i64 - b as i64);
        let (j0, j1) = projections_to_structures(&pp).unwrap();
        prop_assert_eq!(pair_index(&j0, &j1).unwrap().class, KOClass::new(0, ind));
    }

    #[test]
    fn orthogonal_parity_matches_determinants(n in 1usize..16, k in 0usize..16, seed in any::<u64>()) {
        let k = k % (n + 1);
        let mut r = rng(seed);
        let (u0, o) = (orthogonal(&mut r, n), orthogonal(&mut r, n));
        // U₀ᵀU₁ = O D Oᵀ with D = diag(−1 × k, 1 × (n − k)).
        let d = Mat::from_fn(n, n, |i, j| if i != j { 0.0 } else if i < k { -1.0 } else { 1.0 });
        let u1 = &u0 * (&o * d * o.transpose());
        let p = orthogonal_pair_parity(&u0, &u1).unwrap();
        prop_assert_eq!(p.kernel_dim, k);
        let det = u0.determinant() * u1.determinant();
        prop_assert_eq!(p.value == 1, det < 0.0);
    }

    #[test]
    fn standard_pairs_recover_the_module(sig in signature(4), seed in any::<u64>()) {
        let sig = Signature::new(sig.r, sig.s + 1);
        let mut r = rng(seed);
        let (Some(h0), Some(v)) = (random_module(&mut r, sig, 16).unwrap(), random_module(&mut r, sig, 16).unwrap()) else {
            return Ok(());
        };
        let (j0, j1) = standard_pair(&h0, &v).unwrap();
        let idx = pair_index(&j0, &j1).unwrap();
        prop_assert_eq!(idx.kernel_dim(), v.n());
        prop_assert_eq!(idx.class, abs_class(&v).unwrap());
    }

    #[test]
    fn pair_index_is_antisymmetric(sig in signature(4), seed in any::<u64>()) {
        let sig = Signature::new(sig.r, sig.s + 1);
        let mut r = rng(seed);
        let (Some(h0), Some(v)) = (random_module(&mut r, sig, 12).unwrap(), random_module(&mut r, sig, 12).unwrap()) else {
            return Ok(());
        };
        let (j0, j1) = standard_pair(&h0, &v).unwrap();
        let q = commuting_rotation(&mut r, j0.context(), 0.5);
        let ctx = j0.context().conjugate(&q);
        let turn = |j: &ComplexStructure| ComplexStructure::new(&q * j.j() * q.transpose(), ctx.clone()).unwrap();
        let (k0, k1) = (turn(&j0), turn(&j1));
        let a = pair_index(&k0, &k1).unwrap().class;
        let b = pair_index(&k1, &k0).unwrap().class;
        prop_assert_eq!(a, abs_class(&v).unwrap());
        prop_assert_eq!(a.plus(&b).unwrap(), KOClass::zero(a.degree));
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn local_flow_equals_endpoint_flow(seed in any::<u64>()) {
        let path = random_path(&mut rng(seed), 4, 16).unwrap();
        let opts = FlowOptions::default();
        let sf = spectral_flow(&path, &opts).unwrap();
        prop_assert_eq!(sf, endpoint_flow(&path).unwrap());
        prop_assert_eq!(spectral_flow(&path.reversed(), &opts).unwrap(), sf.negate());
    }

    #[test]
    fn flow_is_additive_under_direct_sums(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_path(&mut r, 3, 8).unwrap();
        // A second path with the same context: reuse `a` conjugated by a commuting rotation.
        let q = commuting_rotation(&mut r, a.context(), 0.7);
        let qt = q.transpose();
        let ctx = a.context().clone();
        let a2 = a.clone();
        let b = koflow::flow::SkewPath::new(ctx, "conjugated", move |t| &q * a2.sample(t) * &qt);
        let opts = FlowOptions::default();
        let (sa, sb) = (spectral_flow(&a, &opts).unwrap(), spectral_flow(&b, &opts).unwrap());
        prop_assert_eq!(sa, sb);
        let sum = a.direct_sum(&b).unwrap();
        prop_assert_eq!(spectral_flow(&sum, &opts).unwrap(), sa.plus(&sb).unwrap());
    }
}

#[test]
fn relation_check_rejects_perturbations() {
    let v = irreducible_rep(Signature::new(1, 2), None).unwrap();
    let mut e = v.e().to_vec();
    e[0][(0, 0)] += 1e-6;
    let w = koflow::clifford::CliffordRep::unchecked(v.n(), e, v.f().to_vec()).unwrap();
    let report = check_relations(&w, CONSTRUCTION_TOL).unwrap();
    assert!(!report.is_clean());
}

#[test]
fn structures_are_refused_when_none_exist() {
    // Every skew 2×2 matrix commutes with L₁.
    let c = irreducible_rep(Signature::new(0, 1), None).unwrap();
    assert!(koflow::props::random_structure(&mut rng(0), &c).is_err());
}
