//! Chern curvature, its four Ricci traces, torsion, and Kähler defects.
//!
//! Index convention: `R[[i, j, k, l]]` is `R_{i j̄ k l̄}` with `(i, j̄)` the
//! differentiation pair, so in holomorphic coordinates
//! `R_{i j̄ k l̄} = -∂_i∂_{j̄} g_{k l̄} + g^{p q̄} ∂_i g_{k q̄} ∂_{j̄} g_{p l̄}`.

use num_complex::Complex64;

use crate::error::GeometryError;
use crate::metric::{inverse_metric, metric_jet, MetricJet, MetricSpec};
use crate::tensor::{metric_pairing, orthonormal_frame, CMatrix, Tensor3, Tensor4, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Frame {
    Coordinate,
    Unitary,
}

#[derive(Clone, Debug)]
pub struct ChernCurvature {
    pub r: Tensor4,
    pub frame: Frame,
    pub at: Vec<Complex64>,
}

impl ChernCurvature {
    pub fn dim(&self) -> usize {
        self.r.dim()
    }

    /// `max |R_{i j̄ k l̄} - conj(R_{j ī l k̄})|` relative to `max |R|`
    /// (absolute when the tensor vanishes).
    pub fn hermitian_symmetry_residual(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let d = self.r[[i, j, k, l]] - self.r[[j, i, l, k]].conj();
                        worst = worst.max(d.norm());
                    }
                }
            }
        }
        worst / self.r.max_abs().max(1.0)
    }

    /// Metric used for traces in this frame: `g` itself in coordinates, the
    /// identity in a unitary frame.
    pub fn trace_metric(&self, jet: &MetricJet) -> CMatrix {
        match self.frame {
            Frame::Coordinate => jet.g.clone(),
            Frame::Unitary => CMatrix::identity(self.dim(), self.dim()),
        }
    }
}

pub fn chern_curvature(jet: &MetricJet) -> ChernCurvature {
    let n = jet.dim();
    let g_up = jet.g_up();
    let r = Tensor4::from_fn(n, |i, j, k, l| {
        let mut acc = -jet.ddbar_g[[i, j, k, l]];
        for p in 0..n {
            for q in 0..n {
                acc += g_up[(p, q)] * jet.dg[[i, k, q]] * jet.dbar_g[[j, p, l]];
            }
        }
        acc
    });
    ChernCurvature { r, frame: Frame::Coordinate, at: jet.point.clone() }
}

/// Re-expresses coordinate-frame curvature in the unitary frame produced by
/// [`orthonormal_frame`] from `jet.g`.
pub fn to_unitary_frame(rc: &ChernCurvature, jet: &MetricJet) -> Result<ChernCurvature, GeometryError> {
    if rc.frame != Frame::Coordinate {
        return Err(GeometryError::WrongFrame { expected: "coordinate" });
    }
    let e = orthonormal_frame(&jet.g)?;
    Ok(ChernCurvature { r: rc.r.change_frame(&e), frame: Frame::Unitary, at: rc.at.clone() })
}

/// The four Chern Ricci curvatures and the two scalar curvatures, all
/// traced with `metric`.
#[derive(Clone, Debug)]
pub struct RicciBundle {
    /// `ρ⁽¹⁾_{i j̄} = g^{k l̄} R_{i j̄ k l̄}`
    pub rho1: CMatrix,
    /// `ρ⁽²⁾_{k l̄} = g^{i j̄} R_{i j̄ k l̄}`
    pub rho2: CMatrix,
    /// `ρ⁽³⁾_{i l̄} = g^{k j̄} R_{i j̄ k l̄}`
    pub rho3: CMatrix,
    /// `ρ⁽⁴⁾_{k j̄} = g^{i l̄} R_{i j̄ k l̄}`
    pub rho4: CMatrix,
    /// Chern scalar curvature.
    pub u: f64,
    /// Altered Chern scalar curvature.
    pub v: f64,
    /// Frame metric the traces were taken with.
    pub metric: CMatrix,
}

impl RicciBundle {
    pub fn dim(&self) -> usize {
        self.metric.nrows()
    }

    /// `Re ρ⁽³⁾ = ½(ρ⁽³⁾ + ρ⁽⁴⁾)`, since `ρ⁽⁴⁾` is the conjugate transpose of `ρ⁽³⁾`.
    pub fn re_rho3(&self) -> CMatrix {
        (&self.rho3 + self.rho3.adjoint()) * Complex64::new(0.5, 0.0)
    }
}

/// `g^{i j̄} a_{i j̄}`
pub fn metric_trace(a: &CMatrix, g_up: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..n {
            acc += g_up[(i, j)] * a[(i, j)];
        }
    }
    acc
}

const REALNESS_TOL: f64 = 1e-10;

pub(crate) fn real_part_checked(z: Complex64, quantity: &'static str) -> Result<f64, GeometryError> {
    if z.im.abs() > REALNESS_TOL * z.re.abs().max(1.0) {
        return Err(GeometryError::NotReal { quantity, imag: z.im });
    }
    Ok(z.re)
}

pub fn ricci_bundle(rc: &ChernCurvature, g: &CMatrix) -> Result<RicciBundle, GeometryError> {
    let n = rc.dim();
    let g_up = inverse_metric(g)?;
    let r = &rc.r;
    let mut rho1 = CMatrix::zeros(n, n);
    let mut rho2 = CMatrix::zeros(n, n);
    let mut rho3 = CMatrix::zeros(n, n);
    let mut rho4 = CMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            let (mut s1, mut s2, mut s3, mut s4) = (ZERO, ZERO, ZERO, ZERO);
            for c in 0..n {
                for d in 0..n {
                    let w = g_up[(c, d)];
                    s1 += w * r[[a, b, c, d]];
                    s2 += w * r[[c, d, a, b]];
                    s3 += w * r[[a, d, c, b]];
                    s4 += w * r[[c, b, a, d]];
                }
            }
            rho1[(a, b)] = s1;
            rho2[(a, b)] = s2;
            rho3[(a, b)] = s3;
            rho4[(a, b)] = s4;
        }
    }
    let u = real_part_checked(metric_trace(&rho1, &g_up), "scalar curvature u")?;
    let v = real_part_checked(metric_trace(&rho3, &g_up), "altered scalar curvature v")?;
    Ok(RicciBundle { rho1, rho2, rho3, rho4, u, v, metric: g.clone() })
}

#[derive(Clone, Debug)]
pub struct Torsion {
    /// `t[[i, j, k]] = T^k_{ij}`
    pub t: Tensor3,
    /// `η_i = Σ_k T^k_{ik}`
    pub eta: Vec<Complex64>,
    /// `|η|²_g = g^{i j̄} η_i conj(η_j)`
    pub eta_norm2: f64,
}

pub fn torsion(jet: &MetricJet) -> Torsion {
    let n = jet.dim();
    let g_up = jet.g_up();
    let t = Tensor3::from_fn(n, |i, j, k| {
        let mut acc = ZERO;
        for l in 0..n {
            acc += g_up[(k, l)] * (jet.dg[[i, j, l]] - jet.dg[[j, i, l]]);
        }
        acc
    });
    let eta: Vec<Complex64> = (0..n).map(|i| (0..n).map(|k| t[[i, k, k]]).sum()).collect();
    let mut norm2 = ZERO;
    for i in 0..n {
        for j in 0..n {
            norm2 += g_up[(i, j)] * eta[i] * eta[j].conj();
        }
    }
    Torsion { t, eta, eta_norm2: norm2.re.max(0.0) }
}

/// `max |∂_i g_{j l̄} - ∂_j g_{i l̄}|`; zero exactly when `dω = 0` at the point.
pub fn kahler_defect(jet: &MetricJet) -> f64 {
    let n = jet.dim();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                worst = worst.max((jet.dg[[i, j, l]] - jet.dg[[j, i, l]]).norm());
            }
        }
    }
    worst
}

/// Largest violation of the Kähler symmetries `R_{i j̄ k l̄} = R_{k j̄ i l̄}`
/// and `R_{i j̄ k l̄} = R_{i l̄ k j̄}`.
pub fn kahler_like_defect(rc: &ChernCurvature) -> f64 {
    let n = rc.dim();
    let r = &rc.r;
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let x = r[[i, j, k, l]];
                    worst = worst.max((x - r[[k, j, i, l]]).norm()).max((x - r[[i, l, k, j]]).norm());
                }
            }
        }
    }
    worst
}

/// `R(X, X̄, Y, Ȳ) = Σ R_{i j̄ k l̄} X^i conj(X^j) Y^k conj(Y^l)`.
pub fn curvature_form(r: &Tensor4, x: &[Complex64], y: &[Complex64]) -> Complex64 {
    let n = r.dim();
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..n {
            let xx = x[i] * x[j].conj();
            if xx == ZERO {
                continue;
            }
            let mut inner = ZERO;
            for k in 0..n {
                for l in 0..n {
                    inner += r[[i, j, k, l]] * y[k] * y[l].conj();
                }
            }
            acc += xx * inner;
        }
    }
    acc
}

pub(crate) fn norm2(g: &CMatrix, x: &[Complex64]) -> Result<f64, GeometryError> {
    let s = metric_pairing(g, x, x).re;
    if !(s > 0.0) {
        return Err(GeometryError::ZeroVector);
    }
    Ok(s)
}

/// Holomorphic sectional curvature `H(X) = R(X, X̄, X, X̄)/|X|⁴`, with `g`
/// the metric of the frame `rc` is expressed in.
pub fn holomorphic_sectional(rc: &ChernCurvature, g: &CMatrix, x: &[Complex64]) -> Result<f64, GeometryError> {
    if x.len() != rc.dim() {
        return Err(GeometryError::PointDimension { expected: rc.dim(), got: x.len() });
    }
    let s = norm2(g, x)?;
    Ok(curvature_form(&rc.r, x, x).re / (s * s))
}

/// Everything the pointwise analysis needs at one point.
#[derive(Clone, Debug)]
pub struct PointGeometry {
    pub jet: MetricJet,
    pub coordinate: ChernCurvature,
    pub unitary: ChernCurvature,
    /// Unitary frame used for `unitary`.
    pub frame: CMatrix,
    /// Ricci data in the unitary frame.
    pub bundle: RicciBundle,
    pub torsion: Torsion,
}

pub fn analyze(spec: &MetricSpec, p: &[Complex64]) -> Result<PointGeometry, GeometryError> {
    let jet = metric_jet(spec, p)?;
    let coordinate = chern_curvature(&jet);
    let frame = orthonormal_frame(&jet.g)?;
    let unitary = ChernCurvature { r: coordinate.r.change_frame(&frame), frame: Frame::Unitary, at: p.to_vec() };
    let bundle = ricci_bundle(&unitary, &CMatrix::identity(spec.dim(), spec.dim()))?;
    let torsion = torsion(&jet);
    Ok(PointGeometry { jet, coordinate, unitary, frame, bundle, torsion })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_metric;
    use crate::tensor::max_abs;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    const FS2: &str = "dim 2\nlet w = 1 + abs2(z)\ng[1,1] = 1/w - zbar1*z1/w^2\ng[1,2] = -zbar1*z2/w^2\n\
                       g[2,1] = -zbar2*z1/w^2\ng[2,2] = 1/w - zbar2*z2/w^2";
    const HOPF2: &str = "dim 2; domain annulus 0.5 2; g[1,1]=1/abs2(z); g[2,2]=1/abs2(z)";

    #[test]
    fn euclidean_is_flat() {
        let spec = parse_metric("dim 2; g[1,1]=1; g[2,2]=1").unwrap();
        let geo = analyze(&spec, &[c(0.2, 0.1), c(-0.4, 0.3)]).unwrap();
        assert_eq!(geo.coordinate.r.max_abs(), 0.0);
        assert_eq!(geo.bundle.u, 0.0);
        assert_eq!(geo.bundle.v, 0.0);
        assert_eq!(geo.torsion.eta_norm2, 0.0);
        assert_eq!(kahler_defect(&geo.jet), 0.0);
        assert_eq!(kahler_like_defect(&geo.coordinate), 0.0);
        assert!(max_abs(&(geo.frame - CMatrix::identity(2, 2))) < 1e-15);
        let h = holomorphic_sectional(&geo.coordinate, &geo.jet.g, &[c(1.0, 0.0), c(0.5, 0.5)]).unwrap();
        assert_eq!(h, 0.0);
    }

    #[test]
    fn hopf_closed_form_unitary_components() {
        let spec = parse_metric(HOPF2).unwrap();
        let p = [c(0.8, -0.3), c(0.1, 0.6)];
        let s: f64 = p.iter().map(|z| z.norm_sqr()).sum();
        let geo = analyze(&spec, &p).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
                        let expected = c(delta(i, j) * delta(k, l), 0.0)
                            - p[i].conj() * p[j] * delta(k, l) / s;
                        assert!((geo.unitary.r[[i, j, k, l]] - expected).norm() < 1e-12);
                    }
                }
            }
        }
        assert!((geo.bundle.u - 2.0).abs() < 1e-12);
        assert!((geo.bundle.v - 1.0).abs() < 1e-12);
        assert!((geo.torsion.eta_norm2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hopf_at_unit_point_frames_agree() {
        let spec = parse_metric(HOPF2).unwrap();
        let geo = analyze(&spec, &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(geo.coordinate.r.max_abs_diff(&geo.unitary.r) < 1e-14);
        assert!((kahler_defect(&geo.jet) - 1.0).abs() < 1e-14);
        assert!(kahler_like_defect(&geo.unitary) > 0.5);
        let h = holomorphic_sectional(&geo.unitary, &CMatrix::identity(2, 2), &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(h.abs() < 1e-14);
    }

    #[test]
    fn fubini_study_is_kahler_with_equal_riccis() {
        let spec = parse_metric(FS2).unwrap();
        let p = [c(0.3, -0.25), c(-0.15, 0.4)];
        let geo = analyze(&spec, &p).unwrap();
        assert!(kahler_defect(&geo.jet) < 1e-12);
        assert!(kahler_like_defect(&geo.coordinate) < 1e-10);
        assert!(geo.torsion.t.max_abs() < 1e-12);
        let b = &geo.bundle;
        for m in [&b.rho2, &b.rho3, &b.rho4] {
            assert!(max_abs(&(m - &b.rho1)) < 1e-10);
        }
        assert!((b.u - 6.0).abs() < 1e-10 && (b.v - 6.0).abs() < 1e-10);
        assert!(geo.coordinate.hermitian_symmetry_residual() < 1e-12);
    }

    #[test]
    fn holomorphic_sectional_is_frame_and_scale_invariant() {
        let spec = parse_metric(FS2).unwrap();
        let p = [c(0.5, 0.1), c(0.2, -0.3)];
        let geo = analyze(&spec, &p).unwrap();
        // coordinate vector ∂_1 versus the first unitary frame vector e_1,
        // which is parallel to ∂_1 since the frame is upper triangular
        let h_coord = holomorphic_sectional(&geo.coordinate, &geo.jet.g, &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let h_unit =
            holomorphic_sectional(&geo.unitary, &CMatrix::identity(2, 2), &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!((h_coord - h_unit).abs() < 1e-10);
        let x = [c(0.3, 0.7), c(-1.2, 0.4)];
        let h1 = holomorphic_sectional(&geo.coordinate, &geo.jet.g, &x).unwrap();
        let lam = c(-2.5, 1.5);
        let h2 = holomorphic_sectional(&geo.coordinate, &geo.jet.g, &[x[0] * lam, x[1] * lam]).unwrap();
        assert!((h1 - h2).abs() < 1e-10 * h1.abs().max(1.0));
        // constant holomorphic sectional curvature 2
        assert!((h1 - 2.0).abs() < 1e-10);
        assert_eq!(
            holomorphic_sectional(&geo.coordinate, &geo.jet.g, &[c(0.0, 0.0), c(0.0, 0.0)]),
            Err(GeometryError::ZeroVector)
        );
    }

    #[test]
    fn unitary_frame_requires_coordinate_input() {
        let spec = parse_metric(FS2).unwrap();
        let geo = analyze(&spec, &[c(0.1, 0.0), c(0.0, 0.2)]).unwrap();
        assert!(to_unitary_frame(&geo.unitary, &geo.jet).is_err());
        let again = to_unitary_frame(&geo.coordinate, &geo.jet).unwrap();
        assert!(again.r.max_abs_diff(&geo.unitary.r) < 1e-14);
    }

    #[test]
    fn trace_consistency_on_general_hermitian_metric() {
        // a non-Kähler, non-conformally-flat metric
        let spec = parse_metric(
            "dim 2\ng[1,1] = 2 + z1*zbar1\ng[1,2] = 0.3*z1*zbar2\ng[2,1] = 0.3*zbar1*z2\n\
             g[2,2] = 1 + 0.5*z2*zbar2 + 0.2*(z1 + zbar1)",
        )
        .unwrap();
        let p = [c(0.4, -0.2), c(0.3, 0.5)];
        let jet = metric_jet(&spec, &p).unwrap();
        let rc = chern_curvature(&jet);
        assert!(rc.hermitian_symmetry_residual() < 1e-12);
        let b = ricci_bundle(&rc, &jet.g).unwrap();
        let g_up = jet.g_up();
        assert!((metric_trace(&b.rho2, &g_up).re - b.u).abs() < 1e-10);
        assert!((metric_trace(&b.rho4, &g_up).re - b.v).abs() < 1e-10);
        assert!(max_abs(&(b.rho4.clone() - b.rho3.adjoint())) < 1e-10);
        // u and v are frame independent
        let u = to_unitary_frame(&rc, &jet).unwrap();
        let bu = ricci_bundle(&u, &CMatrix::identity(2, 2)).unwrap();
        assert!((bu.u - b.u).abs() < 1e-10 && (bu.v - b.v).abs() < 1e-10);
        assert!(kahler_defect(&jet) > 0.01);
    }
}
