use svv_core::entropy::{
    coherent_info_alpha, cond_renyi_entropy, cond_vn_entropy, von_neumann_entropy, w_alpha,
    CoherentOptions, RenyiOrder,
};
use svv_core::linalg::{
    random_bipartite_density, random_channel, random_density, random_pure_state, BipartiteOp,
    Channel, Factor, Seed,
};
use svv_core::vvnorm::BoundKind;

fn ro(a: f64) -> RenyiOrder {
    RenyiOrder::new(a).unwrap()
}

#[test]
fn renyi_approaches_von_neumann() {
    for (k, dx) in [(0u64, 2usize), (1, 3)] {
        let rho = random_bipartite_density::<f64>(2, dx, Seed::new(200 + k)).unwrap();
        let h1 = cond_vn_entropy(&rho).unwrap();
        let gaps: Vec<f64> = [1e-1, 1e-2, 1e-3]
            .iter()
            .map(|h| (cond_renyi_entropy(&rho, ro(1.0 + h)).unwrap() - h1).abs())
            .collect();
        assert!(gaps[1] < gaps[0] && gaps[2] < gaps[1], "{gaps:?}");
        assert!(gaps[2] < 1e-2);
    }
}

#[test]
fn renyi_is_non_increasing_in_order() {
    let orders = [1.0, 1.25, 1.5, 2.0, 3.0, 5.0];
    for k in 0..4 {
        let rho = random_bipartite_density::<f64>(2, 2, Seed::new(300 + k)).unwrap();
        let hs: Vec<f64> = orders
            .iter()
            .map(|&a| cond_renyi_entropy(&rho, ro(a)).unwrap())
            .collect();
        for w in hs.windows(2) {
            assert!(w[1] <= w[0] + 5e-7, "{hs:?}");
        }
    }
}

#[test]
fn data_processing_on_conditioning_system() {
    for k in 0..4u64 {
        let rho = random_bipartite_density::<f64>(2, 2, Seed::new(400 + k)).unwrap();
        let ch = random_channel::<f64>(2, 2, 2, Seed::new(500 + k)).unwrap();
        let out = ch.apply_on(&rho, Factor::First).unwrap();
        for a in [1.0, 1.5, 2.0] {
            let before = cond_renyi_entropy(&rho, ro(a)).unwrap();
            let after = cond_renyi_entropy(&out, ro(a)).unwrap();
            assert!(after >= before - 5e-7, "α={a}: {after} < {before}");
        }
        let wb = w_alpha(&rho, ro(1.0)).unwrap().value;
        let wa = w_alpha(&out, ro(1.0)).unwrap().value;
        assert!(wa <= wb + 1e-12);
    }
}

#[test]
fn coherent_information_of_identity_and_replacer() {
    let opts = CoherentOptions {
        restarts: 2,
        max_evals: 600,
        ..Default::default()
    };
    let id = Channel::<f64>::identity(2);
    for a in [1.0, 2.0] {
        let r = coherent_info_alpha(&id, ro(a), &opts).unwrap();
        assert!((r.value - 2f64.ln()).abs() < 1e-6, "α={a}: {}", r.value);
    }
    let omega = random_density::<f64>(2, 2, Seed::new(1)).unwrap();
    let rep = Channel::replacer(2, &omega).unwrap();
    for a in [1.0, 2.0] {
        let r = coherent_info_alpha(&rep, ro(a), &opts).unwrap();
        assert!(r.value.abs() < 1e-6, "α={a}: {}", r.value);
    }
}

/// `H(Y) − H(YR)` for the output of `ch ⊗ id` on a pure input.
fn vn_coherent(ch: &Channel, psi: &svv_core::linalg::CVec) -> f64 {
    let d = ch.dim_in();
    let rho = BipartiteOp::new(psi * psi.adjoint(), d, d).unwrap();
    let out = ch.apply_on(&rho, Factor::First).unwrap();
    von_neumann_entropy(&out.partial_trace(Factor::Second)).unwrap()
        - von_neumann_entropy(out.as_mat()).unwrap()
}

#[test]
fn von_neumann_coherent_information_matches_sampling() {
    let ch = random_channel::<f64>(2, 2, 2, Seed::new(71)).unwrap();
    let best = (0..3000)
        .map(|i| vn_coherent(&ch, &random_pure_state::<f64>(4, Seed::new(9).derive(i))))
        .fold(f64::NEG_INFINITY, f64::max);
    let r = coherent_info_alpha(&ch, ro(1.0), &CoherentOptions::default()).unwrap();
    assert!(r.value >= best - 1e-9, "{} < sampled {}", r.value, best);
    assert!(r.value - best < 5e-2);
    assert!(r.value <= 2f64.ln() + 1e-12);
}

#[test]
fn mixed_inputs_do_not_beat_pure_ones() {
    // a mixed ρ_{XR} on a 2-dimensional reference never exceeds the pure optimum
    let ch = random_channel::<f64>(2, 2, 2, Seed::new(72)).unwrap();
    let opts = CoherentOptions {
        restarts: 2,
        max_evals: 600,
        ..Default::default()
    };
    let pure = coherent_info_alpha(&ch, ro(2.0), &opts).unwrap();
    for k in 0..10 {
        let rho = random_bipartite_density::<f64>(2, 2, Seed::new(600 + k)).unwrap();
        let out = ch.apply_on(&rho, Factor::First).unwrap();
        let v = -cond_renyi_entropy(&out, ro(2.0)).unwrap();
        assert!(v <= pure.value + 1e-6, "{v} > {}", pure.value);
    }
    assert!(matches!(
        pure.bound_kind,
        BoundKind::Exact | BoundKind::Lower
    ));
}
