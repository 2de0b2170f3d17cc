//! Mixed curvature `𝒞_{α,β}(X) = α Ric(X, X̄)/|X|² + β H(X)` with `Ric` the
//! first Chern Ricci curvature, its average over the unit sphere, its extrema
//! over unit directions, and the tensor/trace identities characterising a
//! pointwise-constant value.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::curvature::{curvature_form, norm2, ChernCurvature, Frame, RicciBundle};
use crate::error::GeometryError;
use crate::metric::inverse_metric;
use crate::tensor::{max_abs, metric_pairing, orthonormal_frame, CMatrix, Tensor4, ZERO};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixedParams {
    pub alpha: f64,
    pub beta: f64,
}

impl MixedParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self, GeometryError> {
        if !(alpha.is_finite() && beta.is_finite()) || alpha.abs() + beta.abs() == 0.0 {
            return Err(GeometryError::InvalidArgument(format!(
                "mixed parameters must be finite and not both zero (got α={alpha}, β={beta})"
            )));
        }
        Ok(Self { alpha, beta })
    }
}

fn first_ricci(r: &Tensor4, g_up: &CMatrix) -> CMatrix {
    let n = r.dim();
    CMatrix::from_fn(n, n, |i, j| {
        let mut acc = ZERO;
        for k in 0..n {
            for l in 0..n {
                acc += g_up[(k, l)] * r[[i, j, k, l]];
            }
        }
        acc
    })
}

/// `𝒞_{α,β}(X)` for curvature `rc` expressed in a frame with metric `g`.
pub fn mixed_curvature(
    rc: &ChernCurvature,
    g: &CMatrix,
    params: MixedParams,
    x: &[Complex64],
) -> Result<f64, GeometryError> {
    if x.len() != rc.dim() {
        return Err(GeometryError::PointDimension { expected: rc.dim(), got: x.len() });
    }
    let s = norm2(g, x)?;
    let ricci = first_ricci(&rc.r, &inverse_metric(g)?);
    let ric = metric_pairing(&ricci, x, x).re;
    let quartic = curvature_form(&rc.r, x, x).re;
    Ok(params.alpha * ric / s + params.beta * quartic / (s * s))
}

/// `[((n+1)α + β) u + β v] / (n(n+1))`, the average of `𝒞_{α,β}` over the
/// unit sphere of a tangent space.
pub fn sphere_average_closed_form(bundle: &RicciBundle, params: MixedParams) -> f64 {
    let n = bundle.dim() as f64;
    (((n + 1.0) * params.alpha + params.beta) * bundle.u + params.beta * bundle.v) / (n * (n + 1.0))
}

/// `𝒞_{α,β}` restricted to unit vectors of a unitary frame, where it is the
/// polynomial `α ρ(w, w̄) + β R(w, w̄, w, w̄)`.
#[derive(Clone, Debug)]
pub struct MixedForm {
    ricci: CMatrix,
    r: Tensor4,
    params: MixedParams,
}

impl MixedForm {
    /// Moves `rc` into the unitary frame built from `g` when it is given in
    /// coordinates; unitary-frame input is used as is.
    pub fn new(rc: &ChernCurvature, g: &CMatrix, params: MixedParams) -> Result<Self, GeometryError> {
        let r = match rc.frame {
            Frame::Coordinate => rc.r.change_frame(&orthonormal_frame(g)?),
            Frame::Unitary => rc.r.clone(),
        };
        let n = r.dim();
        let ricci = first_ricci(&r, &CMatrix::identity(n, n));
        Ok(Self { ricci, r, params })
    }

    pub fn dim(&self) -> usize {
        self.r.dim()
    }

    /// Value at a unit vector `w`.
    pub fn value(&self, w: &[Complex64]) -> f64 {
        let ric = metric_pairing(&self.ricci, w, w).re;
        let quartic = curvature_form(&self.r, w, w).re;
        self.params.alpha * ric + self.params.beta * quartic
    }

    /// Value and `∂f/∂w̄` of the polynomial extension off the sphere.
    fn value_and_dbar(&self, w: &[Complex64]) -> (f64, Vec<Complex64>) {
        let n = self.dim();
        let (a, b) = (self.params.alpha, self.params.beta);
        let r = &self.r;
        // m[(i, j)] = Σ_kl R_{i j̄ k l̄} w_k w̄_l, m2[(k, l)] = Σ_ij R_{i j̄ k l̄} w_i w̄_j
        let mut m = CMatrix::zeros(n, n);
        let mut m2 = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let x = r[[i, j, k, l]];
                        m[(i, j)] += x * w[k] * w[l].conj();
                        m2[(k, l)] += x * w[i] * w[j].conj();
                    }
                }
            }
        }
        let mut quartic = ZERO;
        let mut dbar = vec![ZERO; n];
        for i in 0..n {
            for j in 0..n {
                quartic += m[(i, j)] * w[i] * w[j].conj();
                dbar[j] += a * self.ricci[(i, j)] * w[i] + b * (m[(i, j)] + m2[(i, j)]) * w[i];
            }
        }
        let ric = metric_pairing(&self.ricci, w, w).re;
        (a * ric + b * quartic.re, dbar)
    }
}

/// Monte Carlo average of `𝒞_{α,β}` over the unit sphere. Returns the mean
/// and its standard error.
pub fn sphere_average_monte_carlo(
    rc: &ChernCurvature,
    g: &CMatrix,
    params: MixedParams,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64), GeometryError> {
    if samples < 1000 {
        return Err(GeometryError::InvalidArgument("at least 1000 samples are required".into()));
    }
    let form = MixedForm::new(rc, g, params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = form.dim();
    let (mut sum, mut sum_sq) = (0.0f64, 0.0f64);
    let mut w = vec![ZERO; n];
    for _ in 0..samples {
        random_unit(&mut rng, &mut w);
        let x = form.value(&w);
        sum += x;
        sum_sq += x * x;
    }
    let count = samples as f64;
    let mean = sum / count;
    let var = ((sum_sq - count * mean * mean) / (count - 1.0)).max(0.0);
    Ok((mean, (var / count).sqrt()))
}

fn random_unit(rng: &mut ChaCha8Rng, w: &mut [Complex64]) {
    loop {
        for z in w.iter_mut() {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            *z = Complex64::new(re, im);
        }
        if normalize(w) {
            return;
        }
    }
}

fn normalize(w: &mut [Complex64]) -> bool {
    let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return false;
    }
    w.iter_mut().for_each(|z| *z /= norm);
    true
}

#[derive(Clone, Debug)]
pub struct ExtremizeOptions {
    /// Random starting directions, in addition to the deterministic seeds.
    pub restarts: usize,
    /// Convergence threshold on the norm of the projected gradient.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for ExtremizeOptions {
    fn default() -> Self {
        Self { restarts: 16, tol: 1e-7, max_iter: 5000, seed: 0x5eed }
    }
}

#[derive(Clone, Debug)]
pub struct ExtremumReport {
    pub min_value: f64,
    pub max_value: f64,
    /// Unit vectors in the unitary frame.
    pub argmin: Vec<Complex64>,
    pub argmax: Vec<Complex64>,
    pub spread: f64,
    pub restarts_used: usize,
    pub converged: bool,
}

struct Climb {
    value: f64,
    point: Vec<Complex64>,
    converged: bool,
}

/// Deterministic starting directions: the frame axes and, for each pair of
/// axes, `(e_a + e_b)/√2` and `(e_a ± i e_b)/√2`.
pub fn seed_directions(n: usize) -> Vec<Vec<Complex64>> {
    let mut out = Vec::new();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for a in 0..n {
        let mut w = vec![ZERO; n];
        w[a] = Complex64::new(1.0, 0.0);
        out.push(w);
    }
    for a in 0..n {
        for b in a + 1..n {
            for second in [Complex64::new(h, 0.0), Complex64::new(0.0, h), Complex64::new(0.0, -h)] {
                let mut w = vec![ZERO; n];
                w[a] = Complex64::new(h, 0.0);
                w[b] = second;
                out.push(w);
            }
        }
    }
    out
}

fn climb(form: &MixedForm, start: &[Complex64], sign: f64, opts: &ExtremizeOptions) -> Climb {
    let n = form.dim();
    let mut w = start.to_vec();
    normalize(&mut w);
    let (mut f, mut dbar) = form.value_and_dbar(&w);
    let mut step = 0.25;
    let mut trial = vec![ZERO; n];
    for _ in 0..opts.max_iter {
        // ascent direction for sign*f, projected onto the sphere's tangent space
        let grad: Vec<Complex64> = dbar.iter().map(|d| d * (2.0 * sign)).collect();
        let radial: f64 = w.iter().zip(&grad).map(|(wi, gi)| (wi.conj() * gi).re).sum();
        let tangent: Vec<Complex64> = grad.iter().zip(&w).map(|(gi, wi)| gi - wi * radial).collect();
        let gnorm2: f64 = tangent.iter().map(|z| z.norm_sqr()).sum();
        if gnorm2.sqrt() < opts.tol {
            return Climb { value: f, point: w, converged: true };
        }
        let noise = 1e-14 * (1.0 + f.abs());
        loop {
            for m in 0..n {
                trial[m] = w[m] + tangent[m] * step;
            }
            normalize(&mut trial);
            let f_new = form.value(&trial);
            if sign * (f_new - f) >= 1e-4 * step * gnorm2 - noise {
                w.copy_from_slice(&trial);
                (f, dbar) = form.value_and_dbar(&w);
                step = (step * 2.0).min(1e3);
                break;
            }
            step *= 0.5;
            if step < 1e-20 {
                return Climb { value: f, point: w, converged: false };
            }
        }
    }
    Climb { value: f, point: w, converged: false }
}

/// Minimum and maximum of `𝒞_{α,β}` over unit directions by projected
/// gradient descent/ascent from the deterministic seeds plus
/// `opts.restarts` random directions.
pub fn extremize(
    rc: &ChernCurvature,
    g: &CMatrix,
    params: MixedParams,
    opts: &ExtremizeOptions,
) -> Result<ExtremumReport, GeometryError> {
    let form = MixedForm::new(rc, g, params)?;
    Ok(extremize_form(&form, opts))
}

pub fn extremize_form(form: &MixedForm, opts: &ExtremizeOptions) -> ExtremumReport {
    let n = form.dim();
    let mut starts = seed_directions(n);
    for restart in 0..opts.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(restart as u64);
        let mut w = vec![ZERO; n];
        random_unit(&mut rng, &mut w);
        starts.push(w);
    }

    let mut best_max: Option<Climb> = None;
    let mut best_min: Option<Climb> = None;
    for start in &starts {
        let up = climb(form, start, 1.0, opts);
        if best_max.as_ref().is_none_or(|b| up.value > b.value) {
            best_max = Some(up);
        }
        let down = climb(form, start, -1.0, opts);
        if best_min.as_ref().is_none_or(|b| down.value < b.value) {
            best_min = Some(down);
        }
    }
    let (max, min) = (best_max.expect("at least one start"), best_min.expect("at least one start"));
    ExtremumReport {
        min_value: min.value,
        max_value: max.value.max(min.value),
        spread: (max.value - min.value).max(0.0),
        argmin: min.point,
        argmax: max.point,
        restarts_used: opts.restarts,
        converged: min.converged && max.converged,
    }
}

/// Largest component of
/// `α(R_{ij̄}g_{kl̄}+R_{kj̄}g_{il̄}+R_{il̄}g_{kj̄}+R_{kl̄}g_{ij̄})
///  + β(R_{ij̄kl̄}+R_{kj̄il̄}+R_{il̄kj̄}+R_{kl̄ij̄}) - 2c(g_{ij̄}g_{kl̄}+g_{il̄}g_{kj̄})`,
/// which vanishes exactly when `𝒞_{α,β} ≡ c` at the point.
pub fn constancy_tensor_residual(
    rc: &ChernCurvature,
    g: &CMatrix,
    params: MixedParams,
    c: f64,
) -> Result<f64, GeometryError> {
    let ricci = first_ricci(&rc.r, &inverse_metric(g)?);
    let zero_f = CMatrix::zeros(rc.dim(), rc.dim());
    Ok(symmetrized_residual(&rc.r, &ricci, g, &zero_f, params, 0.0, c))
}

/// Shared kernel for the plain and conformal constancy equations:
/// `… - 2(nα+β)[g_{ij̄}F_{kl̄}+g_{kj̄}F_{il̄}+g_{il̄}F_{kj̄}+g_{kl̄}F_{ij̄}]
///  = 2 f e^{2F} (g_{ij̄}g_{kl̄}+g_{il̄}g_{kj̄})`.
pub(crate) fn symmetrized_residual(
    r: &Tensor4,
    ricci: &CMatrix,
    g: &CMatrix,
    f_ddbar: &CMatrix,
    params: MixedParams,
    f_value: f64,
    c: f64,
) -> f64 {
    let n = r.dim();
    let (a, b) = (params.alpha, params.beta);
    let conformal_weight = 2.0 * (n as f64 * a + b);
    let rhs_scale = 2.0 * c * (2.0 * f_value).exp();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let ric = ricci[(i, j)] * g[(k, l)]
                        + ricci[(k, j)] * g[(i, l)]
                        + ricci[(i, l)] * g[(k, j)]
                        + ricci[(k, l)] * g[(i, j)];
                    let quartic = r[[i, j, k, l]] + r[[k, j, i, l]] + r[[i, l, k, j]] + r[[k, l, i, j]];
                    let conformal = g[(i, j)] * f_ddbar[(k, l)]
                        + g[(k, j)] * f_ddbar[(i, l)]
                        + g[(i, l)] * f_ddbar[(k, j)]
                        + g[(k, l)] * f_ddbar[(i, j)];
                    let lhs = ric * a + quartic * b - conformal * conformal_weight;
                    let rhs = (g[(i, j)] * g[(k, l)] + g[(i, l)] * g[(k, j)]) * rhs_scale;
                    worst = worst.max((lhs - rhs).norm());
                }
            }
        }
    }
    worst
}

/// Residual of the traced constancy identities for a pointwise-constant
/// value `f`:
/// `[α(n+2)+β]ρ⁽¹⁾ + βρ⁽²⁾ + 2β Re ρ⁽³⁾ = [2(n+1)f - αu] g` and
/// `[α(n+1)+β]u + βv = n(n+1) f`. Returns the larger of the two.
pub fn trace_identity_residual(bundle: &RicciBundle, params: MixedParams, f: f64) -> f64 {
    let n = bundle.dim() as f64;
    let (a, b) = (params.alpha, params.beta);
    let lhs = &bundle.rho1 * Complex64::from(a * (n + 2.0) + b)
        + &bundle.rho2 * Complex64::from(b)
        + bundle.re_rho3() * Complex64::from(2.0 * b);
    let rhs = &bundle.metric * Complex64::from(2.0 * (n + 1.0) * f - a * bundle.u);
    let matrix = max_abs(&(lhs - rhs));
    let scalar = ((a * (n + 1.0) + b) * bundle.u + b * bundle.v - n * (n + 1.0) * f).abs();
    matrix.max(scalar)
}

/// Solves the scalar trace identity for the constant value `f`.
pub fn constant_value_from_scalars(bundle: &RicciBundle, params: MixedParams) -> f64 {
    let n = bundle.dim() as f64;
    ((params.alpha * (n + 1.0) + params.beta) * bundle.u + params.beta * bundle.v) / (n * (n + 1.0))
}
