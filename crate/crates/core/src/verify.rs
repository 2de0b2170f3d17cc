//! The verification battery behind `hermcurv verify`. Every check reduces to
//! a residual compared against a tolerance; checks that run over many points
//! report the worst one.

use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::catalog::{self, builtin, hopf_unitary_curvature, hopf_unitary_ricci, sample_points, CatalogEntry, Provenance};
use crate::conformal::{conformal_constancy_residual, ConformalChange, ConformalFactor};
use crate::curvature::{analyze, kahler_defect, kahler_like_defect, PointGeometry};
use crate::error::GeometryError;
use crate::expr::{fd_residual, Expr, Wirtinger, FD_STEP};
use crate::mixed::{
    constancy_tensor_residual, extremize, mixed_curvature, sphere_average_closed_form, sphere_average_monte_carlo,
    trace_identity_residual, ExtremizeOptions, MixedParams,
};
use crate::parser::parse_expr;
use crate::surface::{c1_squared_pointwise_residual, ricci_combination_residual, weyl_minus};
use crate::tensor::{max_abs, CMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    All,
    Core,
    Conformal,
    Surface,
    Mixed,
    Catalog,
}

impl Suite {
    fn includes(self, other: Suite) -> bool {
        self == Suite::All || self == other
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::All => "all",
            Suite::Core => "core",
            Suite::Conformal => "conformal",
            Suite::Surface => "surface",
            Suite::Mixed => "mixed",
            Suite::Catalog => "catalog",
        }
    }
}

#[derive(Clone, Debug)]
pub struct VerificationOutcome {
    pub check_id: String,
    pub metric: String,
    /// The point that produced the reported residual, when there is one.
    pub point: Option<Vec<Complex64>>,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub provenance: Provenance,
    /// Error raised while evaluating the check; such checks always fail.
    pub error: Option<String>,
}

impl fmt::Display for VerificationOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<52} {:<24} residual {:.3e} tol {:.1e} [{}]",
            if self.pass { "PASS" } else { "FAIL" },
            self.check_id,
            self.metric,
            self.residual,
            self.tolerance,
            self.provenance.as_str()
        )?;
        if let Some(e) = &self.error {
            write!(f, " error: {e}")?;
        }
        Ok(())
    }
}

/// Running maximum of a residual over points.
#[derive(Clone, Debug, Default)]
struct Worst {
    residual: f64,
    point: Option<Vec<Complex64>>,
    error: Option<String>,
}

impl Worst {
    fn update(&mut self, r: f64, p: &[Complex64]) {
        if self.point.is_none() || r.is_nan() || r > self.residual {
            self.residual = r;
            self.point = Some(p.to_vec());
        }
    }

    fn absorb(&mut self, r: Result<f64, GeometryError>, p: &[Complex64]) {
        match r {
            Ok(r) => self.update(r, p),
            Err(e) => {
                self.residual = f64::INFINITY;
                self.point = Some(p.to_vec());
                self.error.get_or_insert_with(|| e.to_string());
            }
        }
    }

    fn over(points: &[Vec<Complex64>], mut f: impl FnMut(&[Complex64]) -> Result<f64, GeometryError>) -> Self {
        let mut w = Worst::default();
        for p in points {
            w.absorb(f(p), p);
        }
        w
    }
}

struct Battery {
    tol_override: Option<f64>,
    out: Vec<VerificationOutcome>,
}

impl Battery {
    fn record(&mut self, id: String, metric: &str, w: Worst, tol: f64, provenance: Provenance) {
        let tolerance = self.tol_override.unwrap_or(tol);
        let pass = w.error.is_none() && w.residual <= tolerance;
        self.out.push(VerificationOutcome {
            check_id: id,
            metric: metric.to_string(),
            point: w.point,
            residual: w.residual,
            tolerance,
            pass,
            provenance,
            error: w.error,
        });
    }
}

fn entry(name: &str) -> CatalogEntry {
    builtin(name).expect("built-in catalog entries parse")
}

fn geometry(e: &CatalogEntry, p: &[Complex64]) -> Result<PointGeometry, GeometryError> {
    analyze(&e.spec, p)
}

fn params(alpha: f64, beta: f64) -> MixedParams {
    MixedParams::new(alpha, beta).expect("admissible parameters")
}

fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

fn random_direction(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
        .collect()
}

/// Conformal factors exercised by the conformal checks.
pub const CONFORMAL_FACTORS: [&str; 3] = [
    "0.1*(z1*zbar1 - z2*zbar2)",
    "0.05*z1*zbar1 + 0.02*(z1*zbar2 + z2*zbar1)",
    "0.2*log(3 + z1*zbar1 + 2*z2*zbar2)",
];

pub const CONFORMAL_BASES: [&str; 3] = ["euclidean-2", "fubini-study-2", "hopf-2"];

pub const SURFACES: [&str; 6] = [
    "euclidean-2",
    "fubini-study-2",
    "complex-hyperbolic-2",
    "hopf-2",
    "adm-product-surface",
    "isosceles-hopf-surface",
];

/// Parameter pairs used for the sphere-average comparison.
pub const AVERAGE_PARAMS: [(f64, f64); 5] = [(1.0, 0.0), (0.0, 1.0), (1.0, -1.0), (2.0, 0.5), (-0.7, 1.3)];

/// Largest fd discrepancy for an expression and all of its holomorphic
/// first derivatives, which covers every second derivative the curvature
/// uses.
pub fn jet_fd_residual(e: &Expr, p: &[Complex64]) -> Result<f64, GeometryError> {
    let mut worst = fd_residual(e, p, FD_STEP)?;
    for k in 1..=p.len() {
        worst = worst.max(fd_residual(&e.diff(Wirtinger::Holo, k), p, FD_STEP)?);
    }
    Ok(worst)
}

pub fn run_suite(suite: Suite, tol_override: Option<f64>) -> Vec<VerificationOutcome> {
    let mut b = Battery { tol_override, out: Vec::new() };
    if suite.includes(Suite::Core) {
        core_checks(&mut b);
    }
    if suite.includes(Suite::Mixed) {
        mixed_checks(&mut b);
    }
    if suite.includes(Suite::Conformal) {
        conformal_checks(&mut b);
    }
    if suite.includes(Suite::Surface) {
        surface_checks(&mut b);
    }
    if suite.includes(Suite::Catalog) {
        catalog_checks(&mut b);
    }
    b.out
}

fn core_checks(b: &mut Battery) {
    for n in [2, 3] {
        let e = entry(&format!("hopf-{n}"));
        let pts = sample_points(&e, 200, 100 + n as u64);
        let nf = n as f64;
        let geos: Vec<_> = pts.iter().map(|p| geometry(&e, p)).collect();
        let over = |f: &dyn Fn(&PointGeometry, &[Complex64]) -> f64| {
            let mut w = Worst::default();
            for (p, g) in pts.iter().zip(&geos) {
                w.absorb(g.as_ref().map(|g| f(g, p)).map_err(Clone::clone), p);
            }
            w
        };
        let w = over(&|g, p| g.unitary.r.max_abs_diff(&hopf_unitary_curvature(p)));
        b.record(format!("core/hopf-closed-form/{n}"), &e.name, w, 1e-10, Provenance::Literature);
        let w = over(&|g, p| max_abs(&(&g.bundle.rho1 - hopf_unitary_ricci(p))));
        b.record(format!("core/hopf-ricci/{n}"), &e.name, w, 1e-10, Provenance::Literature);
        let w = over(&|g, _| (g.bundle.u - (nf * nf - nf)).abs());
        b.record(format!("core/hopf-u/{n}"), &e.name, w, 1e-10, Provenance::Literature);
        let w = over(&|g, _| (g.bundle.v - (nf - 1.0)).abs());
        b.record(format!("core/hopf-v/{n}"), &e.name, w, 1e-10, Provenance::Literature);
        let w = over(&|g, _| {
            let eta = g.torsion.eta_norm2;
            (g.bundle.u - g.bundle.v - eta).abs().max((eta - (nf - 1.0) * (nf - 1.0)).abs())
        });
        b.record(format!("core/hopf-torsion/{n}"), &e.name, w, 1e-9, Provenance::Derived);
    }

    for n in 1..=4 {
        let e = entry(&format!("euclidean-{n}"));
        let pts = sample_points(&e, 10, 7);
        let w = Worst::over(&pts, |p| {
            let g = geometry(&e, p)?;
            let eta = g.torsion.eta.iter().map(|z| z.norm()).fold(0.0, f64::max);
            Ok(g.coordinate.r.max_abs().max(g.torsion.t.max_abs()).max(eta))
        });
        b.record(format!("core/euclidean-flat/{n}"), &e.name, w, 1e-12, Provenance::Trivial);
    }

    for family in ["fubini-study", "complex-hyperbolic"] {
        for n in [2, 3] {
            let e = entry(&format!("{family}-{n}"));
            let pts = sample_points(&e, 50, 200 + n as u64);
            let geos: Vec<_> = pts.iter().map(|p| geometry(&e, p)).collect();
            let over = |f: &dyn Fn(&PointGeometry) -> f64| {
                let mut w = Worst::default();
                for (p, g) in pts.iter().zip(&geos) {
                    w.absorb(g.as_ref().map(f).map_err(Clone::clone), p);
                }
                w
            };
            let w = over(&|g| kahler_defect(&g.jet));
            b.record(format!("core/space-form/{}/kahler", e.name), &e.name, w, 1e-10, Provenance::Derived);
            let w = over(&|g| kahler_like_defect(&g.unitary));
            b.record(format!("core/space-form/{}/kahler-like", e.name), &e.name, w, 1e-9, Provenance::Derived);
            let w = over(&|g| {
                let bu = &g.bundle;
                max_abs(&(&bu.rho1 - &bu.rho2))
                    .max(max_abs(&(&bu.rho1 - &bu.rho3)))
                    .max(max_abs(&(&bu.rho1 - &bu.rho4)))
            });
            b.record(format!("core/space-form/{}/riccis-equal", e.name), &e.name, w, 1e-9, Provenance::Derived);
            let w = over(&|g| (g.bundle.u - g.bundle.v).abs());
            b.record(format!("core/space-form/{}/u-equals-v", e.name), &e.name, w, 1e-9, Provenance::Derived);
        }
    }

    for name in catalog::names() {
        let e = entry(name);
        let pts = sample_points(&e, 10, 5);
        let w = Worst::over(&pts, |p| Ok(geometry(&e, p)?.coordinate.hermitian_symmetry_residual()));
        b.record(format!("core/curvature-hermitian/{name}"), name, w, 1e-10, Provenance::Trivial);
    }

    for name in catalog::names() {
        let e = entry(name);
        let pts = sample_points(&e, 20, 13);
        let w = Worst::over(&pts, |p| {
            let mut worst = 0.0f64;
            for expr in e.spec.entries() {
                worst = worst.max(fd_residual(expr, p, FD_STEP)?);
            }
            Ok(worst)
        });
        b.record(format!("core/symbolic-vs-fd/{name}"), name, w, 1e-6, Provenance::Derived);
        // differencing the first derivatives loses about one more digit
        let w = Worst::over(&pts, |p| {
            let mut worst = 0.0f64;
            for expr in e.spec.entries() {
                worst = worst.max(jet_fd_residual(expr, p)?);
            }
            Ok(worst)
        });
        b.record(format!("core/symbolic-vs-fd-jet/{name}"), name, w, 1e-5, Provenance::Derived);
    }
}

fn mixed_checks(b: &mut Battery) {
    for n in [2usize, 3] {
        let e = entry(&format!("hopf-{n}"));
        let nf = n as f64;
        let pts = sample_points(&e, 100, 300 + n as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(31 + n as u64);
        let mut w = Worst::default();
        for p in &pts {
            let alpha = rng.random_range(0.5..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let x = random_direction(&mut rng, n);
            let r = geometry(&e, p).and_then(|g| mixed_curvature(&g.coordinate, &g.jet.g, params(alpha, -nf * alpha), &x));
            w.absorb(r.map(f64::abs), p);
        }
        b.record(format!("mixed/hopf-vanishing/{n}"), &e.name, w, 1e-10, Provenance::Literature);
        let w = Worst::over(&pts, |p| {
            let g = geometry(&e, p)?;
            constancy_tensor_residual(&g.unitary, &identity(n), params(1.0, -nf), 0.0)
        });
        b.record(format!("mixed/hopf-constancy-tensor/{n}"), &e.name, w, 1e-10, Provenance::Literature);
    }

    let opts = ExtremizeOptions::default();
    for family in ["fubini-study", "complex-hyperbolic"] {
        for n in [2, 3] {
            let e = entry(&format!("{family}-{n}"));
            let pts = sample_points(&e, 50, 400 + n as u64);
            let mut values = Vec::new();
            let w = Worst::over(&pts, |p| {
                let g = geometry(&e, p)?;
                let rep = extremize(&g.unitary, &identity(n), params(0.0, 1.0), &opts)?;
                values.push((rep.max_value, p.to_vec()));
                Ok(rep.spread)
            });
            b.record(format!("mixed/space-form-spread/{}", e.name), &e.name, w, 1e-8, Provenance::Derived);
            let mut w = Worst::default();
            if let Some((first, _)) = values.first().cloned() {
                for (v, p) in &values {
                    w.update((v - first).abs(), p);
                }
            }
            b.record(format!("mixed/space-form-h-constant/{}", e.name), &e.name, w, 1e-8, Provenance::Derived);
        }
    }

    for name in catalog::names() {
        let e = entry(name);
        let pts = sample_points(&e, 10, 17);
        for (p, f) in e.constant_mixed() {
            let w = Worst::over(&pts, |x| Ok(trace_identity_residual(&geometry(&e, x)?.bundle, p, f)));
            let id = format!("mixed/trace-identity/{name}/({},{})", p.alpha, p.beta);
            b.record(id, name, w, 1e-8, Provenance::Literature);
        }
    }

    for (k, name) in catalog::names().into_iter().enumerate() {
        let e = entry(name);
        let p = sample_points(&e, 1, 500 + k as u64).remove(0);
        let mut w = Worst::default();
        match geometry(&e, &p) {
            Ok(g) => {
                for (i, &(alpha, beta)) in AVERAGE_PARAMS.iter().enumerate() {
                    let pr = params(alpha, beta);
                    let closed = sphere_average_closed_form(&g.bundle, pr);
                    let r = sphere_average_monte_carlo(&g.unitary, &identity(e.dim()), pr, 100_000, 600 + i as u64)
                        .map(|(mean, se)| (mean - closed).abs() / (3.0 * se + 1e-10 * closed.abs().max(1.0)));
                    w.absorb(r, &p);
                }
            }
            Err(err) => w.absorb(Err(err), &p),
        }
        b.record(format!("mixed/sphere-average/{name}"), name, w, 1.0, Provenance::Derived);
    }

    let e = entry("hopf-2");
    let p = sample_points(&e, 1, 700).remove(0);
    let pr = params(0.0, 1.0);
    let mut closed = Worst::default();
    let mut mc = Worst::default();
    match geometry(&e, &p) {
        Ok(g) => {
            let value = sphere_average_closed_form(&g.bundle, pr);
            closed.update((value - 0.5).abs(), &p);
            mc.absorb(
                sphere_average_monte_carlo(&g.unitary, &identity(2), pr, 100_000, 701)
                    .map(|(mean, se)| (mean - 0.5).abs() / (3.0 * se + 1e-10)),
                &p,
            );
        }
        Err(err) => {
            closed.absorb(Err(err.clone()), &p);
            mc.absorb(Err(err), &p);
        }
    }
    b.record("mixed/hopf-average/closed-form".into(), &e.name, closed, 1e-10, Provenance::Derived);
    b.record("mixed/hopf-average/monte-carlo".into(), &e.name, mc, 1.0, Provenance::Derived);

    let p = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    let w = Worst::over(std::slice::from_ref(&p), |p| {
        let g = geometry(&e, p)?;
        let rep = extremize(&g.unitary, &identity(2), pr, &opts)?;
        Ok((1e-2 - rep.spread).max(0.0))
    });
    b.record("mixed/non-constancy-witness".into(), &e.name, w, 0.0, Provenance::Derived);
}

fn conformal_checks(b: &mut Battery) {
    let factors: Vec<Expr> = CONFORMAL_FACTORS
        .iter()
        .map(|s| parse_expr(s, 2).expect("built-in conformal factors parse"))
        .collect();
    for name in CONFORMAL_BASES {
        let e = entry(name);
        let pts = sample_points(&e, 10, 800);
        for (k, f) in factors.iter().enumerate() {
            let change = ConformalChange::new(&e.spec, f.clone());
            let w = match &change {
                Ok(c) => Worst::over(&pts, |p| c.formula_residual(p)),
                Err(err) => Worst::over(&pts[..1], |_| Err(err.clone())),
            };
            b.record(format!("conformal/formula/{name}/F{}", k + 1), name, w, 1e-8, Provenance::Derived);
            let w = match &change {
                Ok(c) => Worst::over(&pts, |p| c.surface_scalar_residuals(p).map(|(ru, rv)| ru.max(rv))),
                Err(err) => Worst::over(&pts[..1], |_| Err(err.clone())),
            };
            b.record(format!("conformal/surface-scalars/{name}/F{}", k + 1), name, w, 1e-8, Provenance::Derived);
        }
    }

    let base = entry("euclidean-2");
    let pts = sample_points(&entry("hopf-2"), 10, 801);
    let lens = ConformalFactor::new(parse_expr("-0.5*log(abs2(z))", 2).expect("factor parses"), 2);
    let w = Worst::over(&pts, |p| {
        let g = geometry(&base, p)?;
        let fj = lens.as_ref().map_err(Clone::clone)?.jet(p)?;
        conformal_constancy_residual(&g.jet, &g.coordinate, &fj, params(1.0, -2.0), 0.0)
    });
    b.record("conformal/constancy/euclidean-to-hopf".into(), &base.name, w, 1e-8, Provenance::Literature);

    let adm = entry("adm-product-surface");
    let pts = sample_points(&adm, 10, 802);
    let zero = ConformalFactor::new(Expr::zero(), 2).expect("zero factor");
    let w = Worst::over(&pts, |p| {
        let g = geometry(&adm, p)?;
        conformal_constancy_residual(&g.jet, &g.coordinate, &zero.jet(p)?, params(1.0, -1.0), 0.0)
    });
    b.record("conformal/constancy/adm-product".into(), &adm.name, w, 1e-9, Provenance::Derived);

    let pts = sample_points(&entry("euclidean-2"), 20, 803);
    for (k, f) in factors.iter().enumerate() {
        let w = Worst::over(&pts, |p| jet_fd_residual(f, p));
        b.record(format!("conformal/symbolic-vs-fd/F{}", k + 1), "-", w, 1e-6, Provenance::Derived);
    }
}

fn surface_checks(b: &mut Battery) {
    for name in SURFACES {
        let e = entry(name);
        let pts = sample_points(&e, 50, 900);
        let geos: Vec<_> = pts.iter().map(|p| geometry(&e, p)).collect();
        let over = |f: &dyn Fn(&PointGeometry) -> Result<f64, GeometryError>| {
            let mut w = Worst::default();
            for (p, g) in pts.iter().zip(&geos) {
                w.absorb(g.as_ref().map_err(Clone::clone).and_then(f), p);
            }
            w
        };
        let w = over(&|g| ricci_combination_residual(&g.bundle));
        b.record(format!("surface/ricci-combination/{name}"), name, w, 1e-8, Provenance::Literature);
        let w = over(&|g| c1_squared_pointwise_residual(&g.bundle));
        b.record(format!("surface/c1-squared/{name}"), name, w, 1e-8, Provenance::Literature);
        let w = over(&|g| Ok(weyl_minus(&g.unitary, &g.frame)?.max_abs()));
        b.record(format!("surface/weyl-minus/{name}"), name, w, 1e-8, Provenance::Derived);
    }
}

fn catalog_checks(b: &mut Battery) {
    for name in catalog::names() {
        let e = entry(name);
        let pts = sample_points(&e, 10, 1000);
        let geos: Vec<_> = pts.iter().map(|p| geometry(&e, p)).collect();
        for ex in &e.expected {
            let mut w = Worst::default();
            for (p, g) in pts.iter().zip(&geos) {
                w.absorb(g.as_ref().map_err(Clone::clone).and_then(|g| ex.residual(g)), p);
            }
            b.record(format!("catalog/{name}/{}", ex.label), name, w, ex.tolerance, ex.provenance);
        }
        let mut w = Worst::default();
        if e.kahler {
            for (p, g) in pts.iter().zip(&geos) {
                w.absorb(g.as_ref().map(|g| kahler_defect(&g.jet)).map_err(Clone::clone), p);
            }
            b.record(format!("catalog/{name}/kahler"), name, w, 1e-10, Provenance::Trivial);
        } else {
            let near: Vec<Vec<Complex64>> = sample_points(&e, 200, 1001)
                .into_iter()
                .filter(|p| (0.8..1.25).contains(&p.iter().map(|z| z.norm_sqr()).sum::<f64>()))
                .take(10)
                .collect();
            let w = Worst::over(&near, |p| Ok((0.1 - kahler_defect(&geometry(&e, p)?.jet)).max(0.0)));
            b.record(format!("catalog/{name}/non-kahler"), name, w, 0.0, Provenance::Derived);
        }
    }
}
