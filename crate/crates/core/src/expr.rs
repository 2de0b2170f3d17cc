//! Complex-valued expressions in the independent symbols `z_k` and `zbar_k`.
//!
//! Nodes are immutable and children are shared through [`Arc`], so a
//! derivative tree reuses the subtrees of the expression it came from.
//! The smart constructors ([`Expr::add`], [`Expr::mul`], ...) fold constants
//! and drop additive/multiplicative identities; nothing beyond that is
//! simplified.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::EvalError;

/// Denominators (and log arguments) smaller than this in modulus are
/// treated as exact zeros during evaluation.
pub const ZERO_THRESHOLD: f64 = 1e-300;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(Complex64),
    /// `z_k`, 1-based.
    Coord(usize),
    /// `zbar_k`, 1-based.
    ConjCoord(usize),
    Neg(Arc<Expr>),
    Conj(Arc<Expr>),
    Exp(Arc<Expr>),
    Log(Arc<Expr>),
    Add(Arc<Expr>, Arc<Expr>),
    Sub(Arc<Expr>, Arc<Expr>),
    Mul(Arc<Expr>, Arc<Expr>),
    Div(Arc<Expr>, Arc<Expr>),
    /// Non-negative integer power. Negative powers are built as divisions
    /// by [`Expr::powi`].
    Pow(Arc<Expr>, u32),
}

/// Which Wirtinger derivative to take.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Wirtinger {
    /// `∂/∂z_k`
    Holo,
    /// `∂/∂zbar_k`
    Anti,
}

impl Wirtinger {
    pub fn opposite(self) -> Self {
        match self {
            Wirtinger::Holo => Wirtinger::Anti,
            Wirtinger::Anti => Wirtinger::Holo,
        }
    }
}

impl Expr {
    pub fn constant(c: Complex64) -> Self {
        Expr::Const(c)
    }

    pub fn real(x: f64) -> Self {
        Expr::Const(Complex64::new(x, 0.0))
    }

    pub fn zero() -> Self {
        Expr::real(0.0)
    }

    pub fn one() -> Self {
        Expr::real(1.0)
    }

    pub fn z(k: usize) -> Self {
        Expr::Coord(k)
    }

    pub fn zbar(k: usize) -> Self {
        Expr::ConjCoord(k)
    }

    /// `Σ_k z_k zbar_k` over the first `n` coordinates.
    pub fn abs2(n: usize) -> Self {
        (1..=n)
            .map(|k| Expr::mul(Expr::z(k), Expr::zbar(k)))
            .reduce(Expr::add)
            .unwrap_or_else(Expr::zero)
    }

    pub fn as_const(&self) -> Option<Complex64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == Complex64::new(0.0, 0.0))
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == Complex64::new(1.0, 0.0))
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x + y),
            _ if a.is_zero() => b,
            _ if b.is_zero() => a,
            _ => Expr::Add(Arc::new(a), Arc::new(b)),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x - y),
            _ if b.is_zero() => a,
            _ if a.is_zero() => Expr::neg(b),
            _ => Expr::Sub(Arc::new(a), Arc::new(b)),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x * y),
            _ if a.is_zero() || b.is_zero() => Expr::zero(),
            _ if a.is_one() => b,
            _ if b.is_one() => a,
            _ => Expr::Mul(Arc::new(a), Arc::new(b)),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Const(x), Expr::Const(y)) if y.norm() >= ZERO_THRESHOLD => Expr::Const(x / y),
            _ if a.is_zero() => Expr::zero(),
            _ if b.is_one() => a,
            _ => Expr::Div(Arc::new(a), Arc::new(b)),
        }
    }

    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Const(c) => Expr::Const(-c),
            Expr::Neg(inner) => (*inner).clone(),
            other => Expr::Neg(Arc::new(other)),
        }
    }

    pub fn conj(a: Expr) -> Expr {
        match a {
            Expr::Const(c) => Expr::Const(c.conj()),
            Expr::Coord(k) => Expr::ConjCoord(k),
            Expr::ConjCoord(k) => Expr::Coord(k),
            Expr::Conj(inner) => (*inner).clone(),
            other => Expr::Conj(Arc::new(other)),
        }
    }

    pub fn exp(a: Expr) -> Expr {
        match a {
            Expr::Const(c) => Expr::Const(c.exp()),
            other => Expr::Exp(Arc::new(other)),
        }
    }

    pub fn log(a: Expr) -> Expr {
        match a {
            Expr::Const(c) if c == Complex64::new(1.0, 0.0) => Expr::zero(),
            other => Expr::Log(Arc::new(other)),
        }
    }

    /// Integer power; a negative exponent becomes `1 / a^(-k)`.
    pub fn powi(a: Expr, k: i32) -> Expr {
        if k < 0 {
            return Expr::div(Expr::one(), Expr::powi(a, -k));
        }
        match (a, k) {
            (_, 0) => Expr::one(),
            (a, 1) => a,
            (Expr::Const(c), k) => Expr::Const(c.powu(k as u32)),
            (a, k) => Expr::Pow(Arc::new(a), k as u32),
        }
    }

    /// Largest coordinate index referenced by the expression (0 if none).
    pub fn max_coord(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Coord(k) | Expr::ConjCoord(k) => *k,
            Expr::Neg(a) | Expr::Conj(a) | Expr::Exp(a) | Expr::Log(a) | Expr::Pow(a, _) => {
                a.max_coord()
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.max_coord().max(b.max_coord())
            }
        }
    }

    /// Exact Wirtinger derivative with `z_m` and `zbar_m` independent.
    pub fn diff(&self, kind: Wirtinger, k: usize) -> Expr {
        match self {
            Expr::Const(_) => Expr::zero(),
            Expr::Coord(m) => {
                if kind == Wirtinger::Holo && *m == k {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Expr::ConjCoord(m) => {
                if kind == Wirtinger::Anti && *m == k {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Expr::Neg(a) => Expr::neg(a.diff(kind, k)),
            // d/dz conj(f) = conj(d/dzbar f)
            Expr::Conj(a) => Expr::conj(a.diff(kind.opposite(), k)),
            Expr::Exp(a) => Expr::mul(self.clone(), a.diff(kind, k)),
            Expr::Log(a) => Expr::div(a.diff(kind, k), (**a).clone()),
            Expr::Add(a, b) => Expr::add(a.diff(kind, k), b.diff(kind, k)),
            Expr::Sub(a, b) => Expr::sub(a.diff(kind, k), b.diff(kind, k)),
            Expr::Mul(a, b) => Expr::add(
                Expr::mul(a.diff(kind, k), (**b).clone()),
                Expr::mul((**a).clone(), b.diff(kind, k)),
            ),
            Expr::Div(a, b) => {
                let da = a.diff(kind, k);
                let db = b.diff(kind, k);
                if db.is_zero() {
                    return Expr::div(da, (**b).clone());
                }
                Expr::div(
                    Expr::sub(
                        Expr::mul(da, (**b).clone()),
                        Expr::mul((**a).clone(), db),
                    ),
                    Expr::powi((**b).clone(), 2),
                )
            }
            Expr::Pow(a, p) => {
                let da = a.diff(kind, k);
                if da.is_zero() {
                    return Expr::zero();
                }
                Expr::mul(
                    Expr::mul(Expr::real(*p as f64), Expr::powi((**a).clone(), *p as i32 - 1)),
                    da,
                )
            }
        }
    }

    /// Evaluates at `p`, where `zbar_k` takes the value `conj(p[k-1])`.
    pub fn eval(&self, p: &[Complex64]) -> Result<Complex64, EvalError> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Coord(k) => *coord(p, *k)?,
            Expr::ConjCoord(k) => coord(p, *k)?.conj(),
            Expr::Neg(a) => -a.eval(p)?,
            Expr::Conj(a) => a.eval(p)?.conj(),
            Expr::Exp(a) => a.eval(p)?.exp(),
            Expr::Log(a) => {
                let x = a.eval(p)?;
                if x.norm() < ZERO_THRESHOLD {
                    return Err(EvalError::LogOfZero);
                }
                x.ln()
            }
            Expr::Add(a, b) => a.eval(p)? + b.eval(p)?,
            Expr::Sub(a, b) => a.eval(p)? - b.eval(p)?,
            Expr::Mul(a, b) => a.eval(p)? * b.eval(p)?,
            Expr::Div(a, b) => {
                let num = a.eval(p)?;
                let den = b.eval(p)?;
                if den.norm() < ZERO_THRESHOLD {
                    return Err(EvalError::DivisionByZero);
                }
                num / den
            }
            Expr::Pow(a, k) => a.eval(p)?.powu(*k),
        })
    }

    /// Number of nodes, counting shared subtrees once per occurrence.
    pub fn node_count(&self) -> usize {
        1 + match self {
            Expr::Const(_) | Expr::Coord(_) | Expr::ConjCoord(_) => 0,
            Expr::Neg(a) | Expr::Conj(a) | Expr::Exp(a) | Expr::Log(a) | Expr::Pow(a, _) => {
                a.node_count()
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.node_count() + b.node_count()
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Const(c) if c.im == 0.0 && c.re.is_sign_negative() => 3,
            _ => 5,
        }
    }

    fn write_child(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        if self.precedence() < min_prec {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

fn coord(p: &[Complex64], k: usize) -> Result<&Complex64, EvalError> {
    if k == 0 {
        return Err(EvalError::CoordinateOutOfRange { index: k, dim: p.len() });
    }
    p.get(k - 1)
        .ok_or(EvalError::CoordinateOutOfRange { index: k, dim: p.len() })
}

fn write_real(f: &mut fmt::Formatter<'_>, x: f64) -> fmt::Result {
    write!(f, "{x:?}")
}

/// Prints in the metric DSL's expression syntax; the output parses back to
/// an evaluation-equivalent expression.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                if c.im == 0.0 {
                    write_real(f, c.re)
                } else if c.re == 0.0 {
                    write!(f, "(")?;
                    write_real(f, c.im)?;
                    write!(f, "i)")
                } else {
                    write!(f, "(")?;
                    write_real(f, c.re)?;
                    write!(f, "{}", if c.im < 0.0 { "-" } else { "+" })?;
                    write_real(f, c.im.abs())?;
                    write!(f, "i)")
                }
            }
            Expr::Coord(k) => write!(f, "z{k}"),
            Expr::ConjCoord(k) => write!(f, "zbar{k}"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                a.write_child(f, 4)
            }
            Expr::Conj(a) => write!(f, "conj({a})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Log(a) => write!(f, "log({a})"),
            Expr::Add(a, b) => {
                a.write_child(f, 1)?;
                write!(f, " + ")?;
                b.write_child(f, 2)
            }
            Expr::Sub(a, b) => {
                a.write_child(f, 1)?;
                write!(f, " - ")?;
                b.write_child(f, 2)
            }
            Expr::Mul(a, b) => {
                a.write_child(f, 2)?;
                write!(f, "*")?;
                b.write_child(f, 3)
            }
            Expr::Div(a, b) => {
                a.write_child(f, 2)?;
                write!(f, "/")?;
                b.write_child(f, 3)
            }
            Expr::Pow(a, k) => {
                a.write_child(f, 5)?;
                write!(f, "^{k}")
            }
        }
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::add(self, rhs)
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::sub(self, rhs)
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::mul(self, rhs)
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::div(self, rhs)
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

/// Convenience wrapper around [`Expr::diff`].
pub fn wirtinger_diff(e: &Expr, kind: Wirtinger, k: usize) -> Expr {
    e.diff(kind, k)
}

/// Convenience wrapper around [`Expr::eval`].
pub fn evaluate(e: &Expr, p: &[Complex64]) -> Result<Complex64, EvalError> {
    e.eval(p)
}

/// Default central-difference step.
pub const FD_STEP: f64 = 1e-5;

/// Largest discrepancy between the symbolic Wirtinger derivatives of `e` at
/// `p` and their central finite-difference approximations
/// `½(∂_x ∓ i ∂_y)`, over every coordinate and both kinds.
pub fn fd_residual(e: &Expr, p: &[Complex64], h: f64) -> Result<f64, EvalError> {
    let mut worst = 0.0f64;
    let mut q = p.to_vec();
    for k in 1..=p.len() {
        let base = p[k - 1];
        q[k - 1] = base + Complex64::new(h, 0.0);
        let fxp = e.eval(&q)?;
        q[k - 1] = base - Complex64::new(h, 0.0);
        let fxm = e.eval(&q)?;
        q[k - 1] = base + Complex64::new(0.0, h);
        let fyp = e.eval(&q)?;
        q[k - 1] = base - Complex64::new(0.0, h);
        let fym = e.eval(&q)?;
        q[k - 1] = base;

        let dx = (fxp - fxm) / (2.0 * h);
        let dy = (fyp - fym) / (2.0 * h);
        let i = Complex64::new(0.0, 1.0);
        let fd_holo = 0.5 * (dx - i * dy);
        let fd_anti = 0.5 * (dx + i * dy);

        let holo = e.diff(Wirtinger::Holo, k).eval(p)?;
        let anti = e.diff(Wirtinger::Anti, k).eval(p)?;
        worst = worst.max((holo - fd_holo).norm()).max((anti - fd_anti).norm());
    }
    Ok(worst)
}
