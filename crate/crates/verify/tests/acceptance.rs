//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_complex::Complex;
use rand::Rng;
use svv_core::entropy::RenyiOrder;
use svv_core::linalg::{
    c, ginibre, random_bipartite_density, random_density, BipartiteOp, CMat, Seed,
};
use svv_core::schatten::SchattenOrder;
use svv_core::specfact::{
    eval_analytic, eval_trig, spectral_factorize, AnalyticMatPoly, TrigMatPoly,
};
use svv_core::vvnorm::{norm_1alpha_result, PQQuery};
use svv_verify::checks::{check_continuity, check_quadrature, check_subharmonicity, Check};
use svv_verify::{run_checks, run_suite, ExperimentConfig, Report, Row};

type Outcome = Result<String, String>;

const TOL: f64 = 1e-6;

fn ro(a: f64) -> RenyiOrder {
    RenyiOrder::new(a).unwrap()
}

fn base(seed: u64, trials: usize) -> ExperimentConfig {
    ExperimentConfig {
        seed: Seed::new(seed),
        trials,
        tol: TOL,
        ..Default::default()
    }
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    if start.elapsed() > limit {
        Err(format!("took {:.1?}, limit {limit:?}", start.elapsed()))
    } else {
        Ok(())
    }
}

/// Fails unless every row has `margin ≥ −allow`.
fn no_violations<'a>(rows: impl IntoIterator<Item = &'a Row>, allow: f64) -> Outcome {
    let rows: Vec<&Row> = rows.into_iter().collect();
    if rows.is_empty() {
        return Err("no rows".into());
    }
    let bad: Vec<&&Row> = rows.iter().filter(|r| !(r.margin >= -allow)).collect();
    let worst = rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    if bad.is_empty() {
        Ok(format!("{} rows, worst margin {worst:.3e}", rows.len()))
    } else {
        Err(format!(
            "{} of {} rows violate by more than {allow:e}; first {:?}",
            bad.len(),
            rows.len(),
            bad[0]
        ))
    }
}

fn c1_trace_norm_of_states() -> Outcome {
    let start = Instant::now();
    let dims = [(2, 2), (2, 3), (3, 2), (3, 3)];
    let mut worst = 0.0f64;
    for k in 0..100u64 {
        let (dy, dx) = dims[k as usize % dims.len()];
        let rho = random_bipartite_density::<f64>(dy, dx, Seed::new(1).derive(k))
            .map_err(|e| e.to_string())?;
        let one = SchattenOrder::one();
        let v = norm_1alpha_result(&rho, one, &PQQuery::new(one, one))
            .map_err(|e| e.to_string())?
            .value;
        worst = worst.max((v - 1.0).abs());
    }
    within(Duration::from_secs(10), start)?;
    if worst <= 1e-6 {
        Ok(format!("max |‖ρ‖ − 1| = {worst:.2e}"))
    } else {
        Err(format!("max |‖ρ‖ − 1| = {worst:.2e}"))
    }
}

fn c2_product_with_maximally_mixed() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for (k, dx) in [2usize, 3, 4].into_iter().enumerate() {
        for alpha in [ro(1.5), ro(2.0), ro(3.0), RenyiOrder::infinity()] {
            let rho_y = random_density::<f64>(2, 2, Seed::new(2).derive(k as u64)).unwrap();
            let m = BipartiteOp::product(
                rho_y.as_mat(),
                &(CMat::identity(dx, dx) * c(1.0 / dx as f64)),
            )
            .unwrap();
            let one = SchattenOrder::one();
            let v = norm_1alpha_result(&m, alpha.schatten(), &PQQuery::new(one, one))
                .map_err(|e| e.to_string())?
                .value;
            let want = (dx as f64).powf(-1.0 / alpha.conjugate());
            worst = worst.max((v - want).abs());
        }
    }
    within(Duration::from_secs(30), start)?;
    if worst <= 1e-5 {
        Ok(format!("max deviation from d_X^(-1/α') = {worst:.2e}"))
    } else {
        Err(format!("max deviation from d_X^(-1/α') = {worst:.2e}"))
    }
}

fn c3_dimension_bounds() -> Outcome {
    let cfg = ExperimentConfig {
        dims: vec![vec![2, 2], vec![2, 3]],
        alphas: vec![ro(2.0), ro(5.0), RenyiOrder::infinity()],
        ..base(3, 100)
    };
    let r = run_checks(&cfg, &[Check::DimBounds], None).map_err(|e| e.to_string())?;
    no_violations(&r.rows, 1e-4)
}

fn c4_monotone_in_alpha() -> Outcome {
    let cfg = ExperimentConfig {
        dims: vec![vec![2, 2], vec![2, 3]],
        alphas: [1.2, 1.5, 2.0, 3.0, 5.0].map(ro).to_vec(),
        ..base(4, 100)
    };
    let r = run_checks(&cfg, &[Check::MonotoneAlpha], None).map_err(|e| e.to_string())?;
    no_violations(&r.rows, 5.0 * TOL)
}

fn c5_alpha_limit() -> Outcome {
    let cfg = ExperimentConfig {
        dims: vec![vec![2, 2]],
        ..base(5, 50)
    };
    let r = run_checks(&cfg, &[Check::AlphaLimit], None).map_err(|e| e.to_string())?;
    let worst_dev = r
        .rows
        .iter()
        .filter(|r| r.rhs == 5e-3)
        .map(|r| r.lhs)
        .fold(0.0, f64::max);
    no_violations(&r.rows, TOL)
        .map(|s| format!("{s}, largest deviation at h=1e-3: {worst_dev:.2e} nats"))
}

fn c6_data_processing() -> Outcome {
    let cfg = ExperimentConfig {
        dims: vec![vec![2, 2], vec![2, 3]],
        ..base(6, 50)
    };
    let r = run_checks(&cfg, &[Check::DataProcessing], None).map_err(|e| e.to_string())?;
    no_violations(&r.rows, 5.0 * TOL)
}

fn c7_continuity() -> Outcome {
    let mut rows = Vec::new();
    let mut zero_eps = 0.0f64;
    let mut max_eps = 0.0f64;
    let mut group = 0;
    for dx in [2, 3] {
        for a in [1.5, 2.0, 4.0] {
            let part = check_continuity((2, dx), ro(a), 0.1, 200, Seed::new(7), group, 10.0 * TOL)
                .map_err(|e| e.to_string())?;
            zero_eps = zero_eps.max(part[0].lhs);
            for r in &part {
                let eps: f64 = r
                    .note
                    .as_deref()
                    .and_then(|n| n.strip_prefix("eps="))
                    .and_then(|e| e.parse().ok())
                    .unwrap_or(f64::NAN);
                max_eps = max_eps.max(eps);
            }
            rows.extend(part);
            group += 1;
        }
    }
    if !(max_eps <= 0.1) {
        return Err(format!("measured ε reached {max_eps}"));
    }
    if zero_eps > 1e-5 {
        return Err(format!("ε = 0 gives |ΔH| = {zero_eps:e}"));
    }
    no_violations(&rows, 10.0 * TOL)
        .map(|s| format!("{s}, max ε {max_eps:.3}, ε=0 |ΔH| {zero_eps:.1e}"))
}

fn c8_chain_rule() -> Outcome {
    let cfg = ExperimentConfig {
        dims: vec![vec![2, 2, 2]],
        ..base(8, 100)
    };
    let r = run_checks(&cfg, &[Check::ChainRule], None).map_err(|e| e.to_string())?;
    no_violations(&r.rows, 10.0 * TOL)
}

fn c9_decoupling() -> Outcome {
    let start = Instant::now();
    let cfg = ExperimentConfig {
        decouple_dims: [4, 4],
        decouple_keep: 2,
        mc_samples: 2000,
        alphas: vec![ro(1.5), ro(2.0)],
        ..base(9, 50)
    };
    let r = run_checks(&cfg, &[Check::Decoupling], None).map_err(|e| e.to_string())?;
    within(Duration::from_secs(300), start)?;
    if r.rows.len() != 51 * 3 {
        return Err(format!("expected 153 rows, got {}", r.rows.len()));
    }
    no_violations(&r.rows, 0.0)
}

fn c10_spectral_factorization() -> Outcome {
    let start = Instant::now();
    let mut rng = Seed::new(10).rng();
    let mut worst = 0.0f64;
    for k in 0..100u64 {
        let d = rng.random_range(1..=4);
        let n = rng.random_range(1..=4);
        let mut r = Seed::new(10).derive(k).rng();
        let p = AnalyticMatPoly::new((0..=n).map(|_| ginibre::<f64, _>(d, d, &mut r)).collect())
            .unwrap();
        let mut coeffs: Vec<CMat> = (0..=n as i64).map(|j| p.gram().coeff(j)).collect();
        coeffs[0] += CMat::identity(d, d) * c(0.1);
        let t = TrigMatPoly::new(coeffs).unwrap();
        let f = spectral_factorize(&t, 1e-10, 200).map_err(|e| format!("case {k}: {e}"))?;
        let res = (0..4096)
            .map(|j| {
                let th = std::f64::consts::TAU * j as f64 / 4096.0;
                let a = eval_analytic(&f.factor, Complex::new(th.cos(), th.sin()));
                (a.adjoint() * &a - eval_trig(&t, th).as_mat()).norm()
            })
            .fold(0.0, f64::max);
        worst = worst.max(res);
        let winding = f.certificate.map(|c| c.winding);
        if res > 1e-8 || winding != Some(0) {
            return Err(format!("case {k}: residual {res:e}, winding {winding:?}"));
        }
    }
    let scalar = TrigMatPoly::new(vec![
        CMat::from_element(1, 1, c(2.0)),
        CMat::from_element(1, 1, c(1.0)),
    ])
    .unwrap();
    let f = spectral_factorize(&scalar, 1e-10, 200).map_err(|e| e.to_string())?;
    let a0 = f.factor.coeffs()[0][(0, 0)];
    let gamma = a0 / a0.norm();
    let mut dev = 0.0f64;
    for j in 0..512 {
        let th = std::f64::consts::TAU * j as f64 / 512.0;
        for r in [0.0, 0.5, 0.9, 1.0] {
            let z = Complex::new(r * th.cos(), r * th.sin());
            dev = dev.max((eval_analytic(&f.factor, z)[(0, 0)] - gamma * (c(1.0) + z)).norm());
        }
    }
    within(Duration::from_secs(60), start)?;
    if dev > 1e-8 {
        return Err(format!("2+2cos t: |A − γ(1+z)| = {dev:e}"));
    }
    Ok(format!(
        "max residual {worst:.2e}, all winding 0; 2+2cos t deviation {dev:.1e}"
    ))
}

fn c11_quadrature_and_subharmonicity() -> Outcome {
    let cfg = ExperimentConfig {
        poly_degree: 3,
        matrix_dim: 4,
        ..base(11, 50)
    };
    let q = check_quadrature(&cfg).map_err(|e| e.to_string())?;
    let s = check_subharmonicity(&cfg).map_err(|e| e.to_string())?;
    if s.len() != 50 {
        return Err(format!("expected 50 subharmonicity rows, got {}", s.len()));
    }
    let a = no_violations(&q, 1e-8)?;
    let b = no_violations(&s, TOL)?;
    Ok(format!("quadrature {a}; subharmonicity {b}"))
}

fn c12_determinism() -> Outcome {
    let cfg = ExperimentConfig {
        mc_samples: 200,
        ..base(12, 3)
    };
    let one: Report = run_suite(&cfg, "all", Some(1)).map_err(|e| e.to_string())?;
    let four: Report = run_suite(&cfg, "all", Some(4)).map_err(|e| e.to_string())?;
    let again: Report = run_suite(&cfg, "all", Some(4)).map_err(|e| e.to_string())?;
    let (a, b, c) = (one.to_csv(), four.to_csv(), again.to_csv());
    if a != b || b != c {
        return Err("CSV differs between runs".into());
    }
    if !one.all_pass() {
        return Err(format!(
            "suite has failing rows: {:?}",
            one.failures().next()
        ));
    }
    Ok(format!(
        "{} rows, {} bytes identical across 1 and 4 threads",
        one.rows.len(),
        a.len()
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("(1,1)-norm of states equals 1", c1_trace_norm_of_states),
        (
            "‖ρ_Y ⊗ I/d_X‖_(1,α) = d_X^(-1/α')",
            c2_product_with_maximally_mixed,
        ),
        ("|H_α(X|Y)| ≤ log d_X", c3_dimension_bounds),
        ("H_α non-increasing in α", c4_monotone_in_alpha),
        ("α → 1 limit", c5_alpha_limit),
        ("data processing", c6_data_processing),
        ("continuity", c7_continuity),
        ("chain rule", c8_chain_rule),
        ("decoupling Monte-Carlo", c9_decoupling),
        ("spectral factorization", c10_spectral_factorization),
        (
            "strip quadrature and subharmonicity",
            c11_quadrature_and_subharmonicity,
        ),
        ("determinism across thread counts", c12_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or(p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS {name} [{secs:.1}s] {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name} [{secs:.1}s] {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
