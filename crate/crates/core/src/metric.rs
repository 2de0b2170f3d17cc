//! Metric specifications, sampling domains and metric jets.

use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rand::Rng;

use crate::error::GeometryError;
use crate::expr::{Expr, Wirtinger};
use crate::tensor::{hermitian_residual, max_abs, CMatrix, Tensor3, Tensor4};

/// Region of `ℂⁿ` a metric is meant to be evaluated on.
#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    /// `|z| ≤ radius`
    Ball { radius: f64 },
    /// `inner ≤ |z| ≤ outer`
    Annulus { inner: f64, outer: f64 },
    /// `|z_k| ≤ radius` for every k
    Polydisc { radius: f64 },
    /// Factors acting on consecutive, equally sized coordinate blocks.
    Product(Vec<Domain>),
}

impl Default for Domain {
    fn default() -> Self {
        Domain::Ball { radius: 1.0 }
    }
}

impl Domain {
    pub fn contains(&self, p: &[Complex64]) -> bool {
        let norm = || p.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        match self {
            Domain::Ball { radius } => norm() <= *radius,
            Domain::Annulus { inner, outer } => {
                let r = norm();
                r >= *inner && r <= *outer
            }
            Domain::Polydisc { radius } => p.iter().all(|z| z.norm() <= *radius),
            Domain::Product(factors) => match block_size(p.len(), factors.len()) {
                Some(b) => factors
                    .iter()
                    .zip(p.chunks(b))
                    .all(|(f, block)| f.contains(block)),
                None => false,
            },
        }
    }

    /// Whether the domain can be split over `n` coordinates.
    pub fn fits_dimension(&self, n: usize) -> bool {
        match self {
            Domain::Product(factors) => match block_size(n, factors.len()) {
                Some(b) => factors.iter().all(|f| f.fits_dimension(b)),
                None => false,
            },
            _ => true,
        }
    }

    /// Uniform rejection sample from the bounding cube of the domain.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<Complex64> {
        match self {
            Domain::Product(factors) => {
                let b = block_size(n, factors.len()).expect("product domain does not fit dimension");
                factors.iter().flat_map(|f| f.sample(b, rng)).collect()
            }
            _ => {
                let r = self.bounding_radius();
                loop {
                    let p: Vec<Complex64> = (0..n)
                        .map(|_| Complex64::new(rng.random_range(-r..=r), rng.random_range(-r..=r)))
                        .collect();
                    if self.contains(&p) {
                        return p;
                    }
                }
            }
        }
    }

    fn bounding_radius(&self) -> f64 {
        match self {
            Domain::Ball { radius } | Domain::Polydisc { radius } => *radius,
            Domain::Annulus { outer, .. } => *outer,
            Domain::Product(f) => f.iter().map(Domain::bounding_radius).fold(0.0, f64::max),
        }
    }
}

fn block_size(n: usize, factors: usize) -> Option<usize> {
    (factors > 0 && n.is_multiple_of(factors)).then(|| n / factors)
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Ball { radius } => write!(f, "ball {radius:?}"),
            Domain::Annulus { inner, outer } => write!(f, "annulus {inner:?} {outer:?}"),
            Domain::Polydisc { radius } => write!(f, "polydisc {radius:?}"),
            Domain::Product(factors) => {
                write!(f, "product ")?;
                for (i, d) in factors.iter().enumerate() {
                    if i > 0 {
                        write!(f, "; ")?;
                    }
                    write!(f, "{d}")?;
                }
                Ok(())
            }
        }
    }
}

/// Symbolic first and mixed second derivatives of every metric entry.
#[derive(Debug)]
struct MetricDerivatives {
    /// `[i][k][l] -> ∂_i g_{k l̄}`
    dg: Vec<Expr>,
    /// `[j][k][l] -> ∂_{j̄} g_{k l̄}`
    dbar_g: Vec<Expr>,
    /// `[i][j][k][l] -> ∂_i ∂_{j̄} g_{k l̄}`
    ddbar_g: Vec<Expr>,
}

/// A Hermitian metric `g_{i j̄}` given by closed-form expressions.
#[derive(Clone, Debug)]
pub struct MetricSpec {
    pub name: String,
    pub domain: Domain,
    n: usize,
    entries: Vec<Expr>,
    derivatives: OnceLock<Arc<MetricDerivatives>>,
}

impl MetricSpec {
    /// `entries` is row-major `n × n`, entry `[i*n + j]` holding `g_{i j̄}`.
    pub fn new(name: impl Into<String>, n: usize, entries: Vec<Expr>, domain: Domain) -> Self {
        assert!(n >= 1, "dimension must be at least 1");
        assert_eq!(entries.len(), n * n, "expected n*n metric entries");
        Self {
            name: name.into(),
            domain,
            n,
            entries,
            derivatives: OnceLock::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Entry `g_{i j̄}`, 0-based.
    pub fn entry(&self, i: usize, j: usize) -> &Expr {
        &self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[Expr] {
        &self.entries
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// New spec whose entries are `f(g_{i j̄})`.
    pub fn map_entries(&self, mut f: impl FnMut(&Expr) -> Expr) -> MetricSpec {
        MetricSpec::new(
            self.name.clone(),
            self.n,
            self.entries.iter().map(&mut f).collect(),
            self.domain.clone(),
        )
    }

    /// Renders the spec in the metric DSL.
    pub fn to_dsl(&self) -> String {
        let mut out = format!("dim {}\ndomain {}\n", self.n, self.domain);
        for i in 0..self.n {
            for j in 0..self.n {
                let e = self.entry(i, j);
                if !e.is_zero() {
                    out.push_str(&format!("g[{},{}] = {}\n", i + 1, j + 1, e));
                }
            }
        }
        out
    }

    fn derivatives(&self) -> &MetricDerivatives {
        self.derivatives.get_or_init(|| {
            let n = self.n;
            let mut dg = Vec::with_capacity(n * n * n);
            let mut dbar_g = Vec::with_capacity(n * n * n);
            for a in 1..=n {
                for e in &self.entries {
                    dg.push(e.diff(Wirtinger::Holo, a));
                    dbar_g.push(e.diff(Wirtinger::Anti, a));
                }
            }
            let mut ddbar_g = Vec::with_capacity(n * n * n * n);
            for i in 0..n {
                for j in 1..=n {
                    for kl in 0..n * n {
                        ddbar_g.push(dg[i * n * n + kl].diff(Wirtinger::Anti, j));
                    }
                }
            }
            Arc::new(MetricDerivatives { dg, dbar_g, ddbar_g })
        })
    }

    /// Numeric metric matrix `g[i][j] = g_{i j̄}` at `p`.
    pub fn metric_at(&self, p: &[Complex64]) -> Result<CMatrix, GeometryError> {
        self.check_point(p)?;
        let values = self
            .entries
            .iter()
            .map(|e| e.eval(p))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CMatrix::from_row_slice(self.n, self.n, &values))
    }

    fn check_point(&self, p: &[Complex64]) -> Result<(), GeometryError> {
        if p.len() != self.n {
            return Err(GeometryError::PointDimension { expected: self.n, got: p.len() });
        }
        Ok(())
    }
}

/// Hermitian-symmetry tolerance applied when building a jet.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Values of `g`, `∂g`, `∂̄g` and `∂∂̄g` at a point.
#[derive(Clone, Debug)]
pub struct MetricJet {
    pub point: Vec<Complex64>,
    /// `g[(k, l)] = g_{k l̄}`
    pub g: CMatrix,
    /// Ordinary matrix inverse of `g`; `g^{p q̄} = g_inv[(q, p)]`.
    pub g_inv: CMatrix,
    /// `dg[[i, k, l]] = ∂_i g_{k l̄}`
    pub dg: Tensor3,
    /// `dbar_g[[j, k, l]] = ∂_{j̄} g_{k l̄}`
    pub dbar_g: Tensor3,
    /// `ddbar_g[[i, j, k, l]] = ∂_i ∂_{j̄} g_{k l̄}`
    pub ddbar_g: Tensor4,
}

impl MetricJet {
    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    /// Matrix of `g^{p q̄}` indexed `[(p, q)]`.
    pub fn g_up(&self) -> CMatrix {
        self.g_inv.transpose()
    }
}

/// Inverse metric in index form: `result[(p, q)] = g^{p q̄}`.
pub fn inverse_metric(g: &CMatrix) -> Result<CMatrix, GeometryError> {
    let chol = crate::tensor::cholesky(g)?;
    Ok(chol.inverse().transpose())
}

pub fn metric_jet(spec: &MetricSpec, p: &[Complex64]) -> Result<MetricJet, GeometryError> {
    let g = spec.metric_at(p)?;
    let residual = hermitian_residual(&g);
    if residual > HERMITIAN_TOL * max_abs(&g).max(1.0) {
        return Err(GeometryError::NotHermitian { residual });
    }
    let chol = crate::tensor::cholesky(&g)?;
    let g_inv = chol.inverse();

    let n = spec.dim();
    let d = spec.derivatives();
    let eval_all = |exprs: &[Expr]| -> Result<Vec<Complex64>, GeometryError> {
        exprs.iter().map(|e| e.eval(p).map_err(Into::into)).collect()
    };
    let dg_vals = eval_all(&d.dg)?;
    let dbar_vals = eval_all(&d.dbar_g)?;
    let ddbar_vals = eval_all(&d.ddbar_g)?;

    let mut dg = Tensor3::zeros(n);
    let mut dbar_g = Tensor3::zeros(n);
    let mut ddbar_g = Tensor4::zeros(n);
    for a in 0..n {
        for k in 0..n {
            for l in 0..n {
                let o = (a * n + k) * n + l;
                dg[[a, k, l]] = dg_vals[o];
                dbar_g[[a, k, l]] = dbar_vals[o];
                for j in 0..n {
                    ddbar_g[[a, j, k, l]] = ddbar_vals[((a * n + j) * n + k) * n + l];
                }
            }
        }
    }

    Ok(MetricJet { point: p.to_vec(), g, g_inv, dg, dbar_g, ddbar_g })
}

/// Largest `|g_{i j̄} - conj(g_{j ī})|` at `p`.
pub fn hermitian_defect(spec: &MetricSpec, p: &[Complex64]) -> Result<f64, GeometryError> {
    Ok(hermitian_residual(&spec.metric_at(p)?))
}

/// Smallest eigenvalue of the metric matrix at `p`.
pub fn min_eigenvalue(spec: &MetricSpec, p: &[Complex64]) -> Result<f64, GeometryError> {
    let g = spec.metric_at(p)?;
    Ok(crate::tensor::hermitian_eigenvalues(&g)[0])
}
