//! JSON encoding for reports. Numbers are written with 17 significant
//! digits so that every `f64` round-trips exactly.

use num_complex::Complex64;
use serde_json::{json, Map, Number, Value};

use crate::curvature::PointGeometry;
use crate::mixed::{ExtremumReport, MixedParams};
use crate::tensor::{hermitian_eigenvalues, CMatrix};

pub const SCHEMA_VERSION: u64 = 1;

/// A real number as JSON; non-finite values become `null`.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let text = format!("{x:.16e}");
    Value::Number(text.parse::<Number>().expect("formatted float is valid JSON"))
}

/// `[re, im]`.
pub fn complex(z: Complex64) -> Value {
    Value::Array(vec![num(z.re), num(z.im)])
}

pub fn vector(v: &[Complex64]) -> Value {
    Value::Array(v.iter().copied().map(complex).collect())
}

/// Row-major nested arrays of `[re, im]` pairs.
pub fn matrix(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| complex(m[(i, j)])).collect()))
            .collect(),
    )
}

pub fn reals(v: &[f64]) -> Value {
    Value::Array(v.iter().copied().map(num).collect())
}

pub fn extremum(params: MixedParams, rep: &ExtremumReport) -> Value {
    json!({
        "alpha": num(params.alpha),
        "beta": num(params.beta),
        "min": num(rep.min_value),
        "max": num(rep.max_value),
        "spread": num(rep.spread),
        "argmin": vector(&rep.argmin),
        "argmax": vector(&rep.argmax),
        "restarts": rep.restarts_used,
        "converged": rep.converged,
    })
}

/// The curvature fields of a per-point record. The Ricci matrices are in the
/// unitary frame.
pub fn geometry_fields(geo: &PointGeometry, kahler_defect: f64, kahler_like_defect: f64) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("metric_eigenvalues".into(), reals(&hermitian_eigenvalues(&geo.jet.g)));
    m.insert("kahler_defect".into(), num(kahler_defect));
    m.insert("kahler_like_defect".into(), num(kahler_like_defect));
    m.insert("u".into(), num(geo.bundle.u));
    m.insert("v".into(), num(geo.bundle.v));
    m.insert("eta_norm2".into(), num(geo.torsion.eta_norm2));
    m.insert("rho1".into(), matrix(&geo.bundle.rho1));
    m.insert("rho2".into(), matrix(&geo.bundle.rho2));
    m.insert("rho3".into(), matrix(&geo.bundle.rho3));
    m.insert("rho4".into(), matrix(&geo.bundle.rho4));
    m
}

/// Parses a number written by [`num`], for consumers and tests.
pub fn parse_num(v: &Value) -> Option<f64> {
    v.as_f64()
}
