//! Acceptance criteria. Runs without the libtest harness so that one
//! PASS/FAIL line per criterion is always printed; exits non-zero if any
//! criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use hermcurv_core::catalog::{self, builtin, sample_points, CatalogEntry};
use hermcurv_core::conformal::ConformalChange;
use hermcurv_core::curvature::{analyze, kahler_defect, kahler_like_defect, PointGeometry};
use hermcurv_core::mixed::{
    constancy_tensor_residual, extremize, mixed_curvature, sphere_average_closed_form, sphere_average_monte_carlo,
    trace_identity_residual, ExtremizeOptions, MixedForm, MixedParams,
};
use hermcurv_core::surface::{c1_squared_pointwise_residual, ricci_combination_residual, weyl_minus};
use hermcurv_core::tensor::max_abs;
use hermcurv_core::{fd_residual, holomorphic_sectional, parse_expr, CMatrix, Complex64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn entry(name: &str) -> CatalogEntry {
    builtin(name).unwrap()
}

fn geo(e: &CatalogEntry, p: &[Complex64]) -> PointGeometry {
    analyze(&e.spec, p).unwrap_or_else(|err| panic!("{}: {err} at {p:?}", e.name))
}

fn params(a: f64, b: f64) -> MixedParams {
    MixedParams::new(a, b).unwrap()
}

fn id(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

fn direction(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
}

/// Fails with a message naming the worst value when `worst > tol`.
fn within(label: &str, worst: f64, tol: f64) -> Result<(), String> {
    if worst <= tol {
        Ok(())
    } else {
        Err(format!("{label}: {worst:.3e} > {tol:.0e}"))
    }
}

fn hopf_curvature_oracle(z: &[Complex64], i: usize, j: usize, k: usize, l: usize) -> Complex64 {
    let s: f64 = z.iter().map(|w| w.norm_sqr()).sum();
    let dij = if i == j { 1.0 } else { 0.0 };
    let dkl = if k == l { 1.0 } else { 0.0 };
    (c(dij, 0.0) - z[i].conj() * z[j] / s) * dkl
}

fn criterion_1() -> Outcome {
    let mut worst = [0.0f64; 4];
    for n in [2usize, 3] {
        let e = entry(&format!("hopf-{n}"));
        let nf = n as f64;
        for p in sample_points(&e, 200, 1) {
            let g = geo(&e, &p);
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        for l in 0..n {
                            let d = (g.unitary.r[[i, j, k, l]] - hopf_curvature_oracle(&p, i, j, k, l)).norm();
                            worst[0] = worst[0].max(d);
                        }
                    }
                    let rho: Complex64 = (0..n).map(|k| hopf_curvature_oracle(&p, i, j, k, k)).sum();
                    worst[3] = worst[3].max((g.bundle.rho1[(i, j)] - rho).norm());
                }
            }
            worst[1] = worst[1].max((g.bundle.u - (nf * nf - nf)).abs());
            worst[2] = worst[2].max((g.bundle.v - (nf - 1.0)).abs());
        }
    }
    within("curvature", worst[0], 1e-10)?;
    within("u", worst[1], 1e-10)?;
    within("v", worst[2], 1e-10)?;
    within("rho1", worst[3], 1e-10)?;
    Ok(format!("max deviation {:.1e}", worst.iter().fold(0.0f64, |a, &b| a.max(b))))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut value, mut tensor) = (0.0f64, 0.0f64);
    for n in [2usize, 3] {
        let e = entry(&format!("hopf-{n}"));
        for p in sample_points(&e, 100, 2) {
            let g = geo(&e, &p);
            let alpha = rng.random_range(0.2..3.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let pr = params(alpha, -(n as f64) * alpha);
            let x = direction(&mut rng, n);
            value = value.max(mixed_curvature(&g.coordinate, &g.jet.g, pr, &x).unwrap().abs());
            tensor = tensor.max(constancy_tensor_residual(&g.unitary, &id(n), params(1.0, -(n as f64)), 0.0).unwrap());
        }
    }
    within("|C|", value, 1e-10)?;
    within("constancy tensor", tensor, 1e-10)?;
    Ok(format!("max |C| {value:.1e}, tensor residual {tensor:.1e}"))
}

fn criterion_3() -> Outcome {
    let mut worst = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 1..=4 {
        let e = entry(&format!("euclidean-{n}"));
        for p in sample_points(&e, 10, 3) {
            let g = geo(&e, &p);
            worst = worst.max(g.coordinate.r.max_abs()).max(g.unitary.r.max_abs());
            worst = worst.max(g.torsion.t.max_abs()).max(g.torsion.eta_norm2.abs());
            for (a, b) in [(1.0, 0.0), (0.0, 1.0), (0.7, -1.9)] {
                let x = direction(&mut rng, n);
                worst = worst.max(mixed_curvature(&g.coordinate, &g.jet.g, params(a, b), &x).unwrap().abs());
            }
            if n == 2 {
                worst = worst.max(weyl_minus(&g.unitary, &g.frame).unwrap().max_abs());
            }
        }
    }
    within("euclidean outputs", worst, 1e-12)?;
    Ok(format!("max output {worst:.1e}"))
}

fn criterion_4() -> Outcome {
    let opts = ExtremizeOptions::default();
    let mut worst = [0.0f64; 6];
    for (family, h) in [("fubini-study", 2.0), ("complex-hyperbolic", -2.0)] {
        for n in [2usize, 3] {
            let e = entry(&format!("{family}-{n}"));
            let mut h_values = Vec::new();
            for (k, p) in sample_points(&e, 50, 4).into_iter().enumerate() {
                let g = geo(&e, &p);
                let b = &g.bundle;
                worst[0] = worst[0].max(kahler_defect(&g.jet));
                worst[1] = worst[1].max(kahler_like_defect(&g.unitary));
                worst[2] = worst[2]
                    .max(max_abs(&(&b.rho1 - &b.rho2)))
                    .max(max_abs(&(&b.rho1 - &b.rho3)))
                    .max(max_abs(&(&b.rho1 - &b.rho4)));
                worst[3] = worst[3].max((b.u - b.v).abs());
                let rep = extremize(&g.unitary, &id(n), params(0.0, 1.0), &opts).unwrap();
                worst[4] = worst[4].max(rep.spread);
                h_values.push(rep.max_value);
                if k < 3 {
                    // grid oracle over real-phase directions in the first two axes
                    let form = MixedForm::new(&g.unitary, &id(n), params(0.0, 1.0)).unwrap();
                    for a in 0..=40 {
                        let t = a as f64 / 40.0 * std::f64::consts::FRAC_PI_2;
                        for s in 0..16 {
                            let phase = Complex64::from_polar(t.sin(), s as f64 / 16.0 * std::f64::consts::TAU);
                            let mut w = vec![c(0.0, 0.0); n];
                            w[0] = c(t.cos(), 0.0);
                            w[1] = phase;
                            worst[5] = worst[5].max((form.value(&w) - h).abs());
                        }
                    }
                    let x = direction(&mut ChaCha8Rng::seed_from_u64(k as u64), n);
                    let hx = holomorphic_sectional(&g.coordinate, &g.jet.g, &x).unwrap();
                    worst[5] = worst[5].max((hx - h).abs());
                }
            }
            let lo = h_values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = h_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            within(&format!("{} H agreement", e.name), hi - lo, 1e-8)?;
        }
    }
    within("kahler_defect", worst[0], 1e-10)?;
    within("kahler_like_defect", worst[1], 1e-9)?;
    within("Riccis equal", worst[2], 1e-9)?;
    within("u = v", worst[3], 1e-9)?;
    within("extremize spread", worst[4], 1e-8)?;
    within("grid oracle H = ±2", worst[5], 1e-8)?;
    Ok(format!("max spread {:.1e}, grid deviation {:.1e}", worst[4], worst[5]))
}

const FACTORS: [&str; 3] = [
    "0.1*(z1*zbar1 - z2*zbar2)",
    "0.05*z1*zbar1 + 0.02*(z1*zbar2 + z2*zbar1)",
    "0.2*log(3 + z1*zbar1 + 2*z2*zbar2)",
];

fn criterion_5() -> Outcome {
    let (mut formula, mut scalars) = (0.0f64, 0.0f64);
    for name in ["euclidean-2", "fubini-study-2", "hopf-2"] {
        let e = entry(name);
        for f in FACTORS {
            let change = ConformalChange::new(&e.spec, parse_expr(f, 2).unwrap()).unwrap();
            for p in sample_points(&e, 10, 5) {
                formula = formula.max(change.formula_residual(&p).unwrap());
                let (ru, rv) = change.surface_scalar_residuals(&p).unwrap();
                scalars = scalars.max(ru).max(rv);
            }
        }
    }
    within("formula vs direct", formula, 1e-8)?;
    within("surface scalar relations", scalars, 1e-8)?;
    Ok(format!("relative formula error {formula:.1e}, scalar residual {scalars:.1e}"))
}

fn criterion_6() -> Outcome {
    let (mut combo, mut c1, mut weyl) = (0.0f64, 0.0f64, 0.0f64);
    for name in [
        "euclidean-2",
        "fubini-study-2",
        "complex-hyperbolic-2",
        "hopf-2",
        "adm-product-surface",
        "isosceles-hopf-surface",
    ] {
        let e = entry(name);
        for p in sample_points(&e, 50, 6) {
            let g = geo(&e, &p);
            combo = combo.max(ricci_combination_residual(&g.bundle).unwrap());
            c1 = c1.max(c1_squared_pointwise_residual(&g.bundle).unwrap());
            if ["fubini-study-2", "hopf-2", "adm-product-surface"].contains(&name) {
                weyl = weyl.max(weyl_minus(&g.unitary, &g.frame).unwrap().max_abs());
            }
        }
    }
    within("Ricci combination", combo, 1e-8)?;
    within("c1^2 pointwise", c1, 1e-8)?;
    within("W-", weyl, 1e-8)?;
    Ok(format!("residuals {combo:.1e} / {c1:.1e} / {weyl:.1e}"))
}

fn criterion_7() -> Outcome {
    let mut worst = 0.0f64;
    let mut configs = 0;
    for name in catalog::names() {
        let e = entry(name);
        let constants = e.constant_mixed();
        configs += constants.len();
        for p in sample_points(&e, 10, 7) {
            let g = geo(&e, &p);
            for &(pr, f) in &constants {
                worst = worst.max(trace_identity_residual(&g.bundle, pr, f));
            }
        }
    }
    within("trace identities", worst, 1e-8)?;
    Ok(format!("{configs} configurations, max residual {worst:.1e}"))
}

fn criterion_8() -> Outcome {
    let pairs = [(1.0, 0.0), (0.0, 1.0), (1.0, -1.0), (2.0, 0.5), (-0.7, 1.3)];
    let mut worst_ratio = 0.0f64;
    for (k, name) in catalog::names().into_iter().enumerate() {
        let e = entry(name);
        let p = sample_points(&e, 1, 80 + k as u64).remove(0);
        let g = geo(&e, &p);
        for (i, &(a, b)) in pairs.iter().enumerate() {
            let closed = sphere_average_closed_form(&g.bundle, params(a, b));
            let (mean, se) =
                sphere_average_monte_carlo(&g.unitary, &id(e.dim()), params(a, b), 100_000, 800 + i as u64).unwrap();
            let band = 3.0 * se + 1e-10 * closed.abs().max(1.0);
            let ratio = (mean - closed).abs() / band;
            if ratio > 1.0 {
                return Err(format!("{name} ({a},{b}): mean {mean} vs closed form {closed}, band {band:.2e}"));
            }
            worst_ratio = worst_ratio.max(ratio);
        }
    }
    let e = entry("hopf-2");
    let p = sample_points(&e, 1, 88).remove(0);
    let g = geo(&e, &p);
    let closed = sphere_average_closed_form(&g.bundle, params(0.0, 1.0));
    within("hopf-2 closed form", (closed - 0.5).abs(), 1e-10)?;
    let (mean, se) = sphere_average_monte_carlo(&g.unitary, &id(2), params(0.0, 1.0), 100_000, 888).unwrap();
    within("hopf-2 MC vs 0.5 (in bands)", (mean - 0.5).abs() / (3.0 * se + 1e-10), 1.0)?;
    Ok(format!("worst |MC - closed| / 3se = {worst_ratio:.2}"))
}

fn criterion_9() -> Outcome {
    let mut worst = 0.0f64;
    for n in [2usize, 3] {
        let e = entry(&format!("hopf-{n}"));
        let target = ((n - 1) * (n - 1)) as f64;
        for p in sample_points(&e, 50, 9) {
            let g = geo(&e, &p);
            worst = worst
                .max((g.bundle.u - g.bundle.v - g.torsion.eta_norm2).abs())
                .max((g.torsion.eta_norm2 - target).abs());
        }
    }
    within("u - v = |eta|^2 = (n-1)^2", worst, 1e-9)?;
    Ok(format!("max residual {worst:.1e}"))
}

fn criterion_10() -> Outcome {
    let mut worst = 0.0f64;
    for name in catalog::names() {
        let e = entry(name);
        for p in sample_points(&e, 20, 10) {
            for x in e.spec.entries() {
                worst = worst.max(fd_residual(x, &p, 1e-5).unwrap());
            }
        }
    }
    let e = entry("euclidean-2");
    for f in FACTORS {
        let f = parse_expr(f, 2).unwrap();
        for p in sample_points(&e, 20, 10) {
            worst = worst.max(fd_residual(&f, &p, 1e-5).unwrap());
        }
    }
    within("fd residual", worst, 1e-6)?;
    Ok(format!("max fd residual {worst:.1e}"))
}

fn criterion_11() -> Outcome {
    let e = entry("hopf-2");
    let p = [c(1.0, 0.0), c(0.0, 0.0)];
    let g = geo(&e, &p);
    let pr = params(0.0, 1.0);
    let rep = extremize(&g.unitary, &id(2), pr, &ExtremizeOptions::default()).unwrap();
    let form = MixedForm::new(&g.unitary, &id(2), pr).unwrap();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for a in 0..=400 {
        let t = a as f64 / 400.0 * std::f64::consts::FRAC_PI_2;
        for s in 0..32 {
            let w = [c(t.cos(), 0.0), Complex64::from_polar(t.sin(), s as f64 / 32.0 * std::f64::consts::TAU)];
            let v = form.value(&w);
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if rep.spread <= 1e-2 {
        return Err(format!("spread {:.3e} not above 1e-2", rep.spread));
    }
    within("extremizer vs grid min", (rep.min_value - lo).abs(), 1e-6)?;
    within("extremizer vs grid max", (rep.max_value - hi).abs(), 1e-6)?;
    Ok(format!("spread {:.6} (grid {:.6})", rep.spread, hi - lo))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("1 Hopf closed form", criterion_1),
        ("2 Hopf mixed-curvature vanishing", criterion_2),
        ("3 Euclidean sanity", criterion_3),
        ("4 space forms", criterion_4),
        ("5 conformal law", criterion_5),
        ("6 surface identities", criterion_6),
        ("7 trace identities", criterion_7),
        ("8 sphere average", criterion_8),
        ("9 Hopf torsion identity", criterion_9),
        ("10 symbolic vs finite difference", criterion_10),
        ("11 non-constancy witness", criterion_11),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  criterion {name:<36} {detail} ({secs:.2}s)"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  criterion {name:<36} {detail} ({secs:.2}s)");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
