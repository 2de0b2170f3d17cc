//! Conformal changes `g̃ = e^{2F} g`: the symbolic metric, the predicted
//! curvature `R̃_{ij̄kl̄} = e^{2F}(R_{ij̄kl̄} - 2 g_{kl̄} F_{ij̄})`, the Chern
//! Laplacian and the scalar relations on surfaces.

use num_complex::Complex64;

use crate::curvature::{analyze, metric_trace, real_part_checked, ChernCurvature, Frame};
use crate::error::GeometryError;
use crate::expr::{Expr, Wirtinger};
use crate::metric::{MetricJet, MetricSpec};
use crate::mixed::{symmetrized_residual, MixedParams};
use crate::tensor::{CMatrix, Tensor4};

/// Imaginary parts above this are rejected when evaluating `F`.
pub const REALITY_TOL: f64 = 1e-10;

/// A real function `F` together with its symbolic `∂_i ∂_{j̄} F`.
#[derive(Clone, Debug)]
pub struct ConformalFactor {
    f: Expr,
    n: usize,
    ddbar: Vec<Expr>,
}

/// `F` and `F_{ij̄}` at a point.
#[derive(Clone, Debug)]
pub struct ConformalJet {
    pub value: f64,
    /// `ddbar[(i, j)] = ∂_i ∂_{j̄} F`.
    pub ddbar: CMatrix,
}

impl ConformalFactor {
    pub fn new(f: Expr, n: usize) -> Result<Self, GeometryError> {
        if f.max_coord() > n {
            return Err(GeometryError::WrongDimension { expected: n, got: f.max_coord() });
        }
        let mut ddbar = Vec::with_capacity(n * n);
        for i in 1..=n {
            let di = f.diff(Wirtinger::Holo, i);
            for j in 1..=n {
                ddbar.push(di.diff(Wirtinger::Anti, j));
            }
        }
        Ok(Self { f, n, ddbar })
    }

    pub fn expr(&self) -> &Expr {
        &self.f
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn value(&self, p: &[Complex64]) -> Result<f64, GeometryError> {
        let v = self.f.eval(p)?;
        if v.im.abs() > REALITY_TOL * v.re.abs().max(1.0) {
            return Err(GeometryError::NotReal { quantity: "conformal factor", imag: v.im });
        }
        Ok(v.re)
    }

    pub fn jet(&self, p: &[Complex64]) -> Result<ConformalJet, GeometryError> {
        let value = self.value(p)?;
        let mut ddbar = CMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                ddbar[(i, j)] = self.ddbar[i * self.n + j].eval(p)?;
            }
        }
        Ok(ConformalJet { value, ddbar })
    }
}

/// The spec with entries `exp(2F)·g_{ij̄}`, on the same domain.
pub fn conformal_metric(spec: &MetricSpec, f: &Expr) -> MetricSpec {
    let weight = Expr::exp(Expr::mul(Expr::real(2.0), f.clone()));
    spec.map_entries(|e| Expr::mul(weight.clone(), e.clone()))
        .with_name(format!("{}+conformal", spec.name))
}

/// Curvature of `e^{2F} g` in coordinates, predicted from the curvature of
/// `g` and the jet of `F`.
pub fn conformal_curvature_via_formula(
    rc: &ChernCurvature,
    jet: &MetricJet,
    fj: &ConformalJet,
) -> Result<ChernCurvature, GeometryError> {
    if rc.frame != Frame::Coordinate {
        return Err(GeometryError::WrongFrame { expected: "coordinate" });
    }
    let n = rc.dim();
    let weight = (2.0 * fj.value).exp();
    let r = Tensor4::from_fn(n, |i, j, k, l| {
        (rc.r[[i, j, k, l]] - jet.g[(k, l)] * fj.ddbar[(i, j)] * 2.0) * weight
    });
    Ok(ChernCurvature { r, frame: Frame::Coordinate, at: rc.at.clone() })
}

/// `ΔF = g^{kl̄} ∂_k ∂_{l̄} F`.
pub fn chern_laplacian(jet: &MetricJet, fj: &ConformalJet) -> Result<f64, GeometryError> {
    real_part_checked(metric_trace(&fj.ddbar, &jet.g_up()), "Chern Laplacian")
}

/// A base metric, a conformal factor and the symbolic image metric, kept
/// together so the image's derivatives are built once.
#[derive(Clone, Debug)]
pub struct ConformalChange {
    pub base: MetricSpec,
    pub factor: ConformalFactor,
    pub image: MetricSpec,
}

impl ConformalChange {
    pub fn new(base: &MetricSpec, f: Expr) -> Result<Self, GeometryError> {
        let factor = ConformalFactor::new(f, base.dim())?;
        let image = conformal_metric(base, factor.expr());
        Ok(Self { base: base.clone(), factor, image })
    }

    /// Largest difference between predicted and directly computed
    /// coordinate curvature of the image, divided by the largest direct
    /// component (or absolute when that is below 1).
    pub fn formula_residual(&self, p: &[Complex64]) -> Result<f64, GeometryError> {
        let base = analyze(&self.base, p)?;
        let fj = self.factor.jet(p)?;
        let predicted = conformal_curvature_via_formula(&base.coordinate, &base.jet, &fj)?;
        let direct = analyze(&self.image, p)?;
        let diff = predicted.r.max_abs_diff(&direct.coordinate.r);
        Ok(diff / direct.coordinate.r.max_abs().max(1.0))
    }

    /// `(|e^{2F}ũ - (u - 4ΔF)|, |e^{2F}ṽ - (v - 2ΔF)|)` on a surface.
    pub fn surface_scalar_residuals(&self, p: &[Complex64]) -> Result<(f64, f64), GeometryError> {
        if self.base.dim() != 2 {
            return Err(GeometryError::WrongDimension { expected: 2, got: self.base.dim() });
        }
        let base = analyze(&self.base, p)?;
        let image = analyze(&self.image, p)?;
        let fj = self.factor.jet(p)?;
        let lap = chern_laplacian(&base.jet, &fj)?;
        let w = (2.0 * fj.value).exp();
        let r_u = (w * image.bundle.u - (base.bundle.u - 4.0 * lap)).abs();
        let r_v = (w * image.bundle.v - (base.bundle.v - 2.0 * lap)).abs();
        Ok((r_u, r_v))
    }
}

pub fn surface_scalar_relation_residual(
    spec: &MetricSpec,
    f: &Expr,
    p: &[Complex64],
) -> Result<(f64, f64), GeometryError> {
    ConformalChange::new(spec, f.clone())?.surface_scalar_residuals(p)
}

/// Largest component residual of the constancy equation for `e^{2F} g`
/// written in terms of the base curvature:
/// `(constancy LHS of g) - 2(nα+β)[sym g⊗F] - 2 f e^{2F}(g⊗g + g⊗g)`.
/// Vanishes exactly when the mixed curvature of `e^{2F}g` equals `f` at the
/// point.
pub fn conformal_constancy_residual(
    jet: &MetricJet,
    rc: &ChernCurvature,
    fj: &ConformalJet,
    params: MixedParams,
    f: f64,
) -> Result<f64, GeometryError> {
    if rc.frame != Frame::Coordinate {
        return Err(GeometryError::WrongFrame { expected: "coordinate" });
    }
    let n = rc.dim();
    let g_up = jet.g_up();
    let ricci = CMatrix::from_fn(n, n, |i, j| {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..n {
            for l in 0..n {
                acc += g_up[(k, l)] * rc.r[[i, j, k, l]];
            }
        }
        acc
    });
    Ok(symmetrized_residual(&rc.r, &ricci, &jet.g, &fj.ddbar, params, fj.value, f))
}
