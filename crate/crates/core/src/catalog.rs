//! Built-in metrics with their known curvature values.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::curvature::PointGeometry;
use crate::error::{CatalogError, GeometryError};
use crate::metric::MetricSpec;
use crate::mixed::{constancy_tensor_residual, MixedParams};
use crate::parser::parse_metric;
use crate::tensor::{CMatrix, Tensor4};

macro_rules! sources {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../catalog/", $name, ".metric")))),*]
    };
}

const SOURCES: &[(&str, &str)] = sources![
    "euclidean-1",
    "euclidean-2",
    "euclidean-3",
    "euclidean-4",
    "fubini-study-1",
    "fubini-study-2",
    "fubini-study-3",
    "fubini-study-4",
    "complex-hyperbolic-1",
    "complex-hyperbolic-2",
    "complex-hyperbolic-3",
    "complex-hyperbolic-4",
    "hopf-1",
    "hopf-2",
    "hopf-3",
    "hopf-4",
    "adm-product-surface",
    "isosceles-hopf-surface",
];

/// Where an expected value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    /// Stated in the literature for this example.
    Literature,
    /// Computed independently of this library (by hand or by a separate
    /// oracle) and frozen.
    Derived,
    /// Holds by construction.
    Trivial,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Literature => "literature",
            Provenance::Derived => "derived",
            Provenance::Trivial => "trivial",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Quantity {
    U,
    V,
    EtaNorm2,
    /// Unitary-frame curvature component (0-based indices).
    UnitaryComponent([usize; 4]),
    /// Unitary-frame first Ricci component (0-based indices).
    UnitaryRicci([usize; 2]),
    /// Every unitary curvature component.
    AllCurvature,
    /// `𝒞_{α,β}` is pointwise constant with the expected value, measured by
    /// the constancy tensor.
    MixedConstant(MixedParams),
}

#[derive(Clone, Debug)]
pub struct Expected {
    pub label: String,
    pub quantity: Quantity,
    pub value: f64,
    pub tolerance: f64,
    pub provenance: Provenance,
}

impl Expected {
    fn new(label: impl Into<String>, quantity: Quantity, value: f64, tolerance: f64, provenance: Provenance) -> Self {
        Self { label: label.into(), quantity, value, tolerance, provenance }
    }

    /// Distance between the expected value and what the pipeline computes.
    pub fn residual(&self, geo: &PointGeometry) -> Result<f64, GeometryError> {
        let b = &geo.bundle;
        Ok(match &self.quantity {
            Quantity::U => (b.u - self.value).abs(),
            Quantity::V => (b.v - self.value).abs(),
            Quantity::EtaNorm2 => (geo.torsion.eta_norm2 - self.value).abs(),
            Quantity::UnitaryComponent(idx) => (geo.unitary.r[*idx] - self.value).norm(),
            Quantity::UnitaryRicci([i, j]) => (b.rho1[(*i, *j)] - self.value).norm(),
            Quantity::AllCurvature => {
                let n = geo.unitary.dim();
                let target = Tensor4::from_fn(n, |_, _, _, _| Complex64::from(self.value));
                geo.unitary.r.max_abs_diff(&target)
            }
            Quantity::MixedConstant(params) => {
                let n = geo.unitary.dim();
                constancy_tensor_residual(&geo.unitary, &CMatrix::identity(n, n), *params, self.value)?
            }
        })
    }
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: String,
    pub spec: MetricSpec,
    pub expected: Vec<Expected>,
    pub notes: &'static str,
    /// The metric is Kähler.
    pub kahler: bool,
}

impl CatalogEntry {
    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    /// Parameter pairs for which `𝒞_{α,β}` is known to be pointwise constant,
    /// with the constant.
    pub fn constant_mixed(&self) -> Vec<(MixedParams, f64)> {
        self.expected
            .iter()
            .filter_map(|e| match e.quantity {
                Quantity::MixedConstant(p) => Some((p, e.value)),
                _ => None,
            })
            .collect()
    }
}

pub fn names() -> Vec<&'static str> {
    SOURCES.iter().map(|(name, _)| *name).collect()
}

pub fn source(name: &str) -> Result<&'static str, CatalogError> {
    SOURCES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| *s)
        .ok_or_else(|| CatalogError::UnknownName(name.to_string()))
}

fn params(alpha: f64, beta: f64) -> MixedParams {
    MixedParams::new(alpha, beta).expect("catalog parameters are admissible")
}

pub fn builtin(name: &str) -> Result<CatalogEntry, CatalogError> {
    let text = source(name)?;
    let spec = parse_metric(text)
        .map_err(|source| CatalogError::Parse { name: name.to_string(), source })?
        .with_name(name);
    let n = spec.dim();
    let nf = n as f64;
    let (family, _) = name.rsplit_once('-').unwrap_or((name, ""));
    use Provenance::*;
    use Quantity::*;
    let (expected, notes, kahler) = match family {
        "euclidean" => (
            vec![
                Expected::new("curvature", AllCurvature, 0.0, 1e-12, Trivial),
                Expected::new("u", U, 0.0, 1e-12, Trivial),
                Expected::new("v", V, 0.0, 1e-12, Trivial),
                Expected::new("|eta|^2", EtaNorm2, 0.0, 1e-12, Trivial),
                Expected::new("C(1,0)", MixedConstant(params(1.0, 0.0)), 0.0, 1e-12, Trivial),
                Expected::new("C(0,1)", MixedConstant(params(0.0, 1.0)), 0.0, 1e-12, Trivial),
                Expected::new("C(1,-1)", MixedConstant(params(1.0, -1.0)), 0.0, 1e-12, Trivial),
            ],
            "flat metric",
            true,
        ),
        "fubini-study" | "complex-hyperbolic" => {
            let sign = if family == "fubini-study" { 1.0 } else { -1.0 };
            let scalar = sign * nf * (nf + 1.0);
            (
                vec![
                    Expected::new("u", U, scalar, 1e-8, Derived),
                    Expected::new("v", V, scalar, 1e-8, Derived),
                    Expected::new("|eta|^2", EtaNorm2, 0.0, 1e-10, Trivial),
                    Expected::new("C(0,1)", MixedConstant(params(0.0, 1.0)), 2.0 * sign, 1e-8, Derived),
                    Expected::new("C(1,0)", MixedConstant(params(1.0, 0.0)), sign * (nf + 1.0), 1e-8, Derived),
                ],
                if sign > 0.0 {
                    "Kähler metric of constant holomorphic sectional curvature 2"
                } else {
                    "Kähler metric of constant holomorphic sectional curvature -2"
                },
                true,
            )
        }
        "hopf" => (
            vec![
                Expected::new("u", U, nf * nf - nf, 1e-9, Literature),
                Expected::new("v", V, nf - 1.0, 1e-9, Literature),
                Expected::new("|eta|^2", EtaNorm2, (nf - 1.0) * (nf - 1.0), 1e-9, Derived),
                Expected::new(format!("C(1,-{n})"), MixedConstant(params(1.0, -nf)), 0.0, 1e-9, Literature),
            ],
            "standard Hopf metric; non-Kähler for n >= 2 and mixed curvature vanishes when n*alpha + beta = 0",
            n == 1,
        ),
        "adm-product" => (
            vec![
                Expected::new("R_1111", UnitaryComponent([0, 0, 0, 0]), -1.0, 1e-9, Literature),
                Expected::new("R_2222", UnitaryComponent([1, 1, 1, 1]), 1.0, 1e-9, Literature),
                Expected::new("R_1122", UnitaryComponent([0, 0, 1, 1]), 0.0, 1e-9, Derived),
                Expected::new("Ric_11", UnitaryRicci([0, 0]), -1.0, 1e-9, Literature),
                Expected::new("Ric_22", UnitaryRicci([1, 1]), 1.0, 1e-9, Literature),
                Expected::new("Ric_12", UnitaryRicci([0, 1]), 0.0, 1e-9, Literature),
                Expected::new("u", U, 0.0, 1e-9, Derived),
                Expected::new("C(1,-1)", MixedConstant(params(1.0, -1.0)), 0.0, 1e-9, Derived),
            ],
            "product of a disc of curvature -1 and a sphere of curvature +1; mixed curvature vanishes when alpha + beta = 0",
            true,
        ),
        "isosceles-hopf" => (
            vec![
                Expected::new("u", U, 2.0, 1e-9, Literature),
                Expected::new("v", V, 1.0, 1e-9, Literature),
                Expected::new("|eta|^2", EtaNorm2, 1.0, 1e-9, Derived),
                Expected::new("C(1,-2)", MixedConstant(params(1.0, -2.0)), 0.0, 1e-9, Literature),
            ],
            "locally the standard Hopf surface metric; mixed curvature vanishes when 2*alpha + beta = 0",
            false,
        ),
        _ => unreachable!("every catalog source has a family"),
    };
    Ok(CatalogEntry { name: name.to_string(), spec, expected, notes, kahler })
}

/// `count` points of the entry's domain, reproducible from `seed`.
pub fn sample_points(entry: &CatalogEntry, count: usize, seed: u64) -> Vec<Vec<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| entry.spec.domain.sample(entry.dim(), &mut rng)).collect()
}

/// Unitary-frame curvature of the Hopf metric at `z`:
/// `R_{ij̄kl̄} = δ_{kl}(δ_{ij} - z̄_i z_j / |z|²)`.
pub fn hopf_unitary_curvature(z: &[Complex64]) -> Tensor4 {
    let n = z.len();
    let s: f64 = z.iter().map(|w| w.norm_sqr()).sum();
    Tensor4::from_fn(n, |i, j, k, l| {
        if k != l {
            return Complex64::new(0.0, 0.0);
        }
        let delta = if i == j { 1.0 } else { 0.0 };
        Complex64::from(delta) - z[i].conj() * z[j] / s
    })
}

/// First Ricci form of the Hopf metric in the unitary frame:
/// `n(δ_{ij} - z̄_i z_j / |z|²)`.
pub fn hopf_unitary_ricci(z: &[Complex64]) -> CMatrix {
    let n = z.len();
    let s: f64 = z.iter().map(|w| w.norm_sqr()).sum();
    CMatrix::from_fn(n, n, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        (Complex64::from(delta) - z[i].conj() * z[j] / s) * n as f64
    })
}
