//! Identities specific to complex surfaces: the anti-self-dual Weyl
//! components, `ρ⁽¹⁾ + ρ⁽²⁾ - 2 Re ρ⁽³⁾ = (u - v) g`, and the pointwise
//! form of `c₁²`.

use num_complex::Complex64;

use crate::curvature::{metric_trace, ChernCurvature, Frame, RicciBundle};
use crate::error::GeometryError;
use crate::metric::inverse_metric;
use crate::tensor::{hermitian_residual, max_abs, CMatrix};

const HERMITIAN_TOL: f64 = 1e-10;

fn require_surface(n: usize) -> Result<(), GeometryError> {
    if n != 2 {
        return Err(GeometryError::WrongDimension { expected: 2, got: n });
    }
    Ok(())
}

/// The three components of `W⁻` in the unitary frame `frame`. They depend on
/// the frame and are only comparable between results sharing it.
#[derive(Clone, Debug)]
pub struct WeylMinus {
    pub w1: Complex64,
    pub w2: Complex64,
    pub w3: Complex64,
    pub frame: CMatrix,
}

impl WeylMinus {
    pub fn max_abs(&self) -> f64 {
        self.w1.norm().max(self.w2.norm()).max(self.w3.norm())
    }
}

pub fn weyl_minus(rc: &ChernCurvature, frame: &CMatrix) -> Result<WeylMinus, GeometryError> {
    require_surface(rc.dim())?;
    if rc.frame != Frame::Unitary {
        return Err(GeometryError::WrongFrame { expected: "unitary" });
    }
    let r = |i: usize, j: usize, k: usize, l: usize| rc.r[[i - 1, j - 1, k - 1, l - 1]];
    let w1 = r(1, 2, 1, 2);
    let w2 = (r(1, 2, 2, 2) + r(2, 2, 1, 2) - r(1, 2, 1, 1) - r(1, 1, 1, 2)) * std::f64::consts::FRAC_1_SQRT_2;
    let w3 = (r(1, 1, 1, 1) + r(2, 2, 2, 2) - r(1, 1, 2, 2) - r(2, 2, 1, 1) - r(1, 2, 2, 1) - r(2, 1, 1, 2)) / 6.0;
    Ok(WeylMinus { w1, w2, w3, frame: frame.clone() })
}

/// Components `a_{ij̄}` of a (1,1)-form.
#[derive(Clone, Debug, PartialEq)]
pub struct OneOneForm {
    pub a: CMatrix,
    pub real: bool,
}

impl OneOneForm {
    /// A real form; the component matrix must be Hermitian.
    pub fn real(a: CMatrix) -> Result<Self, GeometryError> {
        let residual = hermitian_residual(&a);
        if residual > HERMITIAN_TOL * max_abs(&a).max(1.0) {
            return Err(GeometryError::NotHermitian { residual });
        }
        Ok(Self { a, real: true })
    }

    pub fn complex(a: CMatrix) -> Self {
        Self { a, real: false }
    }

    /// `⟨a, b⟩ = g^{ik̄} g^{lj̄} a_{ij̄} conj(b_{kl̄})`, so that `⟨ω, ω⟩ = n`.
    pub fn inner(&self, other: &OneOneForm, g: &CMatrix) -> Result<Complex64, GeometryError> {
        let g_up = inverse_metric(g)?;
        let n = g.nrows();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        acc += g_up[(i, k)] * g_up[(l, j)] * self.a[(i, j)] * other.a[(k, l)].conj();
                    }
                }
            }
        }
        Ok(acc)
    }

    /// Coefficient of `a ∧ b` against `ω ∧ ω` on a surface.
    pub fn wedge_ratio(&self, other: &OneOneForm, g: &CMatrix) -> Result<Complex64, GeometryError> {
        require_surface(g.nrows())?;
        Ok(wedge_coefficient(&self.a, &other.a) / wedge_coefficient(g, g))
    }
}

fn wedge_coefficient(a: &CMatrix, b: &CMatrix) -> Complex64 {
    a[(0, 0)] * b[(1, 1)] + a[(1, 1)] * b[(0, 0)] - a[(0, 1)] * b[(1, 0)] - a[(1, 0)] * b[(0, 1)]
}

/// Largest component of `ρ⁽¹⁾ + ρ⁽²⁾ - 2 Re ρ⁽³⁾ - (u - v) g`.
pub fn ricci_combination_residual(bundle: &RicciBundle) -> Result<f64, GeometryError> {
    require_surface(bundle.dim())?;
    let lhs = &bundle.rho1 + &bundle.rho2 - bundle.re_rho3() * Complex64::from(2.0);
    let rhs = &bundle.metric * Complex64::from(bundle.u - bundle.v);
    Ok(max_abs(&(lhs - rhs)))
}

/// `|ρ∧ρ/ω∧ω - ½[u² - ⟨ρ, ρ⟩]|` for `ρ = ρ⁽¹⁾`.
pub fn c1_squared_pointwise_residual(bundle: &RicciBundle) -> Result<f64, GeometryError> {
    require_surface(bundle.dim())?;
    let g = &bundle.metric;
    let rho = OneOneForm::real(bundle.rho1.clone())?;
    let u = metric_trace(&rho.a, &inverse_metric(g)?);
    let lhs = rho.wedge_ratio(&rho, g)?;
    let rhs = (u * u - rho.inner(&rho, g)?) * 0.5;
    Ok((lhs - rhs).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::analyze;
    use crate::parser::parse_metric;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    const HOPF2: &str = "dim 2; domain annulus 0.5 2; g[1,1]=1/abs2(z); g[2,2]=1/abs2(z)";
    const FS2: &str = "dim 2\nlet w = 1 + abs2(z)\ng[1,1] = 1/w - zbar1*z1/w^2\ng[1,2] = -zbar1*z2/w^2\n\
                       g[2,1] = -zbar2*z1/w^2\ng[2,2] = 1/w - zbar2*z2/w^2";
    const ADM: &str = "dim 2; g[1,1] = 2/(1 - z1*zbar1)^2; g[2,2] = 2/(1 + z2*zbar2)^2";
    const MESSY: &str = "dim 2\ng[1,1] = 2 + z1*zbar1\ng[1,2] = 0.3*z1*zbar2 + 0.1*zbar1\n\
                         g[2,1] = 0.3*zbar1*z2 + 0.1*z1\ng[2,2] = 1 + 0.5*z2*zbar2";

    #[test]
    fn weyl_minus_vanishes_on_examples() {
        let p = [c(0.3, -0.2), c(0.1, 0.4)];
        for src in [HOPF2, FS2, ADM] {
            let geo = analyze(&parse_metric(src).unwrap(), &p).unwrap();
            let w = weyl_minus(&geo.unitary, &geo.frame).unwrap();
            assert!(w.max_abs() < 1e-10, "{src}: {w:?}");
        }
    }

    #[test]
    fn weyl_minus_frame_checks() {
        let p = [c(0.3, -0.2), c(0.1, 0.4)];
        let geo = analyze(&parse_metric(MESSY).unwrap(), &p).unwrap();
        assert!(weyl_minus(&geo.coordinate, &geo.frame).is_err());
        let three = parse_metric("dim 3; g[1,1]=1; g[2,2]=1; g[3,3]=1").unwrap();
        let geo3 = analyze(&three, &[c(0.0, 0.0); 3]).unwrap();
        assert!(weyl_minus(&geo3.unitary, &geo3.frame).is_err());
    }

    #[test]
    fn phase_change_keeps_w1_modulus_and_w3() {
        let p = [c(0.3, -0.2), c(0.1, 0.4)];
        let geo = analyze(&parse_metric(MESSY).unwrap(), &p).unwrap();
        let a = weyl_minus(&geo.unitary, &geo.frame).unwrap();
        let phases = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::from_polar(1.0, 0.7),
            Complex64::from_polar(1.0, -1.9),
        ]));
        let rotated = ChernCurvature {
            r: geo.unitary.r.change_frame(&phases),
            frame: Frame::Unitary,
            at: p.to_vec(),
        };
        let b = weyl_minus(&rotated, &(&geo.frame * &phases)).unwrap();
        assert!(a.w1.norm() > 1e-3);
        assert!((a.w1.norm() - b.w1.norm()).abs() < 1e-12);
        assert!((a.w3 - b.w3).norm() < 1e-12);
    }

    #[test]
    fn ricci_combination_on_hopf_and_generic() {
        let geo = analyze(&parse_metric(HOPF2).unwrap(), &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let lhs = &geo.bundle.rho1 + &geo.bundle.rho2 - geo.bundle.re_rho3() * Complex64::from(2.0);
        assert!((lhs[(0, 0)] - 1.0).norm() < 1e-12 && (lhs[(1, 1)] - 1.0).norm() < 1e-12);
        assert!(ricci_combination_residual(&geo.bundle).unwrap() < 1e-12);
        let geo = analyze(&parse_metric(MESSY).unwrap(), &[c(0.3, -0.2), c(0.1, 0.4)]).unwrap();
        assert!(ricci_combination_residual(&geo.bundle).unwrap() < 1e-10);
    }

    #[test]
    fn c1_squared_fixture_and_examples() {
        // ρ = ω in a unitary frame
        let id = CMatrix::identity(2, 2);
        let bundle = RicciBundle {
            rho1: id.clone(),
            rho2: id.clone(),
            rho3: id.clone(),
            rho4: id.clone(),
            u: 2.0,
            v: 2.0,
            metric: id.clone(),
        };
        let w = OneOneForm::real(id.clone()).unwrap();
        assert!((w.wedge_ratio(&w, &id).unwrap() - 1.0).norm() < 1e-15);
        assert!((w.inner(&w, &id).unwrap() - 2.0).norm() < 1e-15);
        assert!(c1_squared_pointwise_residual(&bundle).unwrap() < 1e-15);

        let geo = analyze(&parse_metric(ADM).unwrap(), &[c(0.2, 0.1), c(-0.5, 0.3)]).unwrap();
        let rho = OneOneForm::real(geo.bundle.rho1.clone()).unwrap();
        assert!((rho.wedge_ratio(&rho, &geo.bundle.metric).unwrap() + 1.0).norm() < 1e-10);
        for src in [HOPF2, ADM, MESSY] {
            let geo = analyze(&parse_metric(src).unwrap(), &[c(0.3, -0.2), c(0.1, 0.4)]).unwrap();
            assert!(c1_squared_pointwise_residual(&geo.bundle).unwrap() < 1e-10);
        }
    }

    #[test]
    fn pairing_in_coordinates_matches_unitary_frame() {
        let geo = analyze(&parse_metric(MESSY).unwrap(), &[c(0.3, -0.2), c(0.1, 0.4)]).unwrap();
        let g = geo.jet.g.clone();
        let e = &geo.frame;
        let a = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.2, 0.5), c(0.2, -0.5), c(-0.7, 0.0)]);
        let a_frame = e.transpose() * &a * e.map(|z| z.conj());
        let x = OneOneForm::real(a).unwrap();
        let y = OneOneForm::real(a_frame).unwrap();
        let id = CMatrix::identity(2, 2);
        assert!((x.inner(&x, &g).unwrap() - y.inner(&y, &id).unwrap()).norm() < 1e-12);
        assert!((x.wedge_ratio(&x, &g).unwrap() - y.wedge_ratio(&y, &id).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian_real_form() {
        let a = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(OneOneForm::real(a.clone()).is_err());
        assert!(!OneOneForm::complex(a).real);
    }
}
