//! Recursive-descent parser for the metric DSL.
//!
//! ```text
//! dim N
//! let name = expr
//! g[i,j] = expr
//! domain ball R | annulus R1 R2 | polydisc R | product <factor>; <factor> ...
//! ```
//!
//! Statements are separated by newlines or `;`, and `#` starts a comment.
//! Inside `domain product`, a `;` followed by another domain keyword
//! continues the product instead of ending the statement.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::ParseError;
use crate::expr::Expr;
use crate::metric::{Domain, MetricSpec};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num { value: f64, imaginary: bool },
    Ident(String),
    Sym(char),
    /// newline or `;`
    Sep,
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax { line, column, message: message.into() }
}

fn lex(source: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = source.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut col) = (1usize, 1usize);
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        let (tl, tc) = (line, col);
        let push = |out: &mut Vec<Token>, tok| out.push(Token { tok, line: tl, column: tc });
        match ch {
            '\n' => {
                push(&mut out, Tok::Sep);
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            ';' => push(&mut out, Tok::Sep),
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            c if c.is_whitespace() => {}
            '+' | '-' | '*' | '/' | '^' | '(' | ')' | '[' | ']' | ',' | '=' => push(&mut out, Tok::Sym(ch)),
            '−' => push(&mut out, Tok::Sym('-')),
            c if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(char::is_ascii_digit)) => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let value: f64 = text
                    .parse()
                    .map_err(|_| syntax(tl, tc, format!("invalid number `{text}`")))?;
                let imaginary = i < chars.len()
                    && chars[i] == 'i'
                    && !chars.get(i + 1).is_some_and(|c| c.is_alphanumeric() || *c == '_');
                if imaginary {
                    i += 1;
                }
                col += i - start;
                push(&mut out, Tok::Num { value, imaginary });
                continue;
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                col += i - start;
                push(&mut out, Tok::Ident(chars[start..i].iter().collect()));
                continue;
            }
            other => return Err(syntax(tl, tc, format!("unexpected character `{other}`"))),
        }
        i += 1;
        col += 1;
    }
    out.push(Token { tok: Tok::Eof, line, column: col });
    Ok(out)
}

const RESERVED: &[&str] = &["i", "z", "conj", "exp", "log", "abs2", "dim", "let", "g", "domain"];
const DOMAIN_KEYWORDS: &[&str] = &["ball", "annulus", "polydisc"];

fn coordinate_symbol(name: &str) -> Option<(bool, &str)> {
    if let Some(rest) = name.strip_prefix("zbar") {
        (!rest.is_empty() && rest.chars().all(|c| c.is_ascii_digit())).then_some((true, rest))
    } else if let Some(rest) = name.strip_prefix('z') {
        (!rest.is_empty() && rest.chars().all(|c| c.is_ascii_digit())).then_some((false, rest))
    } else {
        None
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    dim: Option<usize>,
    lets: HashMap<String, Expr>,
}

impl Parser {
    fn new(tokens: Vec<Token>) -> Self {
        Self { tokens, pos: 0, dim: None, lets: HashMap::new() }
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, offset: usize) -> &Token {
        let idx = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[idx]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, message: impl Into<String>) -> ParseError {
        let t = self.peek();
        syntax(t.line, t.column, message)
    }

    fn expect_sym(&mut self, c: char) -> Result<(), ParseError> {
        if self.peek().tok == Tok::Sym(c) {
            self.next();
            Ok(())
        } else {
            Err(self.error_here(format!("expected `{c}`")))
        }
    }

    fn expect_ident(&mut self) -> Result<(String, Token), ParseError> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(s) => Ok((s.clone(), t.clone())),
            _ => Err(syntax(t.line, t.column, "expected identifier")),
        }
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        let negative = if self.peek().tok == Tok::Sym('-') {
            self.next();
            true
        } else {
            false
        };
        let t = self.next();
        match t.tok {
            Tok::Num { value, imaginary: false } => Ok(if negative { -value } else { value }),
            _ => Err(syntax(t.line, t.column, "expected a real number")),
        }
    }

    fn index(&mut self) -> Result<(usize, Token), ParseError> {
        let t = self.next();
        match t.tok {
            Tok::Num { value, imaginary: false } if value.fract() == 0.0 && value >= 1.0 => {
                Ok((value as usize, t))
            }
            _ => Err(syntax(t.line, t.column, "expected a positive integer index")),
        }
    }

    fn end_statement(&mut self) -> Result<(), ParseError> {
        match self.peek().tok {
            Tok::Sep => {
                self.next();
                Ok(())
            }
            Tok::Eof => Ok(()),
            _ => Err(self.error_here("expected end of statement")),
        }
    }

    fn require_dim(&self, at: &Token) -> Result<usize, ParseError> {
        self.dim
            .ok_or_else(|| syntax(at.line, at.column, "`dim` must be declared first"))
    }

    fn metric(mut self) -> Result<MetricSpec, ParseError> {
        let mut entries: HashMap<(usize, usize), Expr> = HashMap::new();
        let mut domain = None;
        loop {
            while self.peek().tok == Tok::Sep {
                self.next();
            }
            if self.peek().tok == Tok::Eof {
                break;
            }
            let (kw, at) = self.expect_ident()?;
            match kw.as_str() {
                "dim" => {
                    if self.dim.is_some() {
                        return Err(syntax(at.line, at.column, "`dim` declared twice"));
                    }
                    let (n, _) = self.index()?;
                    self.dim = Some(n);
                }
                "let" => {
                    self.require_dim(&at)?;
                    let (name, name_tok) = self.expect_ident()?;
                    if RESERVED.contains(&name.as_str()) || coordinate_symbol(&name).is_some() {
                        return Err(syntax(
                            name_tok.line,
                            name_tok.column,
                            format!("`{name}` is reserved"),
                        ));
                    }
                    self.expect_sym('=')?;
                    let e = self.expr()?;
                    self.lets.insert(name, e);
                }
                "g" => {
                    let n = self.require_dim(&at)?;
                    self.expect_sym('[')?;
                    let (i, _) = self.index()?;
                    self.expect_sym(',')?;
                    let (j, _) = self.index()?;
                    self.expect_sym(']')?;
                    for idx in [i, j] {
                        if idx > n {
                            return Err(ParseError::DimensionMismatch { line: at.line, index: idx, dim: n });
                        }
                    }
                    self.expect_sym('=')?;
                    let e = self.expr()?;
                    if entries.insert((i, j), e).is_some() {
                        return Err(ParseError::DuplicateEntry { line: at.line, i, j });
                    }
                }
                "domain" => {
                    self.require_dim(&at)?;
                    if domain.is_some() {
                        return Err(syntax(at.line, at.column, "`domain` declared twice"));
                    }
                    domain = Some(self.domain()?);
                }
                other => {
                    return Err(syntax(at.line, at.column, format!("unknown statement `{other}`")));
                }
            }
            self.end_statement()?;
        }

        let eof = self.peek().clone();
        let n = self.require_dim(&eof)?;
        let domain = domain.unwrap_or_default();
        if !domain.fits_dimension(n) {
            return Err(syntax(eof.line, eof.column, "product domain does not split the dimension evenly"));
        }
        let mut flat = vec![Expr::zero(); n * n];
        for ((i, j), e) in entries {
            flat[(i - 1) * n + (j - 1)] = e;
        }
        Ok(MetricSpec::new("unnamed", n, flat, domain))
    }

    fn domain(&mut self) -> Result<Domain, ParseError> {
        if self.peek().tok == Tok::Ident("product".into()) {
            self.next();
            let mut factors = vec![self.domain_factor()?];
            while self.peek().tok == Tok::Sep
                && matches!(&self.peek_at(1).tok, Tok::Ident(s) if DOMAIN_KEYWORDS.contains(&s.as_str()))
            {
                self.next();
                factors.push(self.domain_factor()?);
            }
            return Ok(Domain::Product(factors));
        }
        self.domain_factor()
    }

    fn domain_factor(&mut self) -> Result<Domain, ParseError> {
        let (kw, at) = self.expect_ident()?;
        let positive = |x: f64, t: &Token| {
            if x > 0.0 {
                Ok(x)
            } else {
                Err(syntax(t.line, t.column, "radii must be positive"))
            }
        };
        match kw.as_str() {
            "ball" => Ok(Domain::Ball { radius: positive(self.number()?, &at)? }),
            "polydisc" => Ok(Domain::Polydisc { radius: positive(self.number()?, &at)? }),
            "annulus" => {
                let inner = self.number()?;
                let outer = positive(self.number()?, &at)?;
                if inner < 0.0 || inner >= outer {
                    return Err(syntax(at.line, at.column, "annulus needs 0 <= R1 < R2"));
                }
                Ok(Domain::Annulus { inner, outer })
            }
            other => Err(syntax(at.line, at.column, format!("unknown domain `{other}`"))),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Sym('+') => {
                    self.next();
                    lhs = Expr::add(lhs, self.term()?);
                }
                Tok::Sym('-') => {
                    self.next();
                    lhs = Expr::sub(lhs, self.term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek().tok {
                Tok::Sym('*') => {
                    self.next();
                    lhs = Expr::mul(lhs, self.unary()?);
                }
                Tok::Sym('/') => {
                    self.next();
                    lhs = Expr::div(lhs, self.unary()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek().tok {
            Tok::Sym('-') => {
                self.next();
                Ok(Expr::neg(self.unary()?))
            }
            Tok::Sym('+') => {
                self.next();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.peek().tok != Tok::Sym('^') {
            return Ok(base);
        }
        self.next();
        let parenthesized = self.peek().tok == Tok::Sym('(');
        if parenthesized {
            self.next();
        }
        let at = self.peek().clone();
        let k = self.number()?;
        if k.fract() != 0.0 || k.abs() > i32::MAX as f64 {
            return Err(syntax(at.line, at.column, "exponent must be an integer"));
        }
        if parenthesized {
            self.expect_sym(')')?;
        }
        Ok(Expr::powi(base, k as i32))
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let t = self.next();
        match t.tok {
            Tok::Num { value, imaginary } => Ok(Expr::constant(if imaginary {
                Complex64::new(0.0, value)
            } else {
                Complex64::new(value, 0.0)
            })),
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect_sym(')')?;
                Ok(e)
            }
            Tok::Ident(ref name) => self.identifier(name, &t),
            Tok::Eof | Tok::Sep => Err(syntax(t.line, t.column, "expected an expression")),
            Tok::Sym(c) => Err(syntax(t.line, t.column, format!("unexpected `{c}` in expression"))),
        }
    }

    fn identifier(&mut self, name: &str, t: &Token) -> Result<Expr, ParseError> {
        let n = self.require_dim(t)?;
        if let Some((conj, digits)) = coordinate_symbol(name) {
            let k: usize = digits
                .parse()
                .map_err(|_| syntax(t.line, t.column, "invalid coordinate index"))?;
            if k == 0 {
                return Err(syntax(t.line, t.column, "coordinates are 1-based"));
            }
            if k > n {
                return Err(ParseError::DimensionMismatch { line: t.line, index: k, dim: n });
            }
            return Ok(if conj { Expr::zbar(k) } else { Expr::z(k) });
        }
        match name {
            "i" => Ok(Expr::constant(Complex64::new(0.0, 1.0))),
            "conj" | "exp" | "log" => {
                self.expect_sym('(')?;
                let arg = self.expr()?;
                self.expect_sym(')')?;
                Ok(match name {
                    "conj" => Expr::conj(arg),
                    "exp" => Expr::exp(arg),
                    _ => Expr::log(arg),
                })
            }
            "abs2" => {
                self.expect_sym('(')?;
                let whole_vector = self.peek().tok == Tok::Ident("z".into())
                    && self.peek_at(1).tok == Tok::Sym(')');
                let e = if whole_vector {
                    self.next();
                    Expr::abs2(n)
                } else {
                    let arg = self.expr()?;
                    Expr::mul(arg.clone(), Expr::conj(arg))
                };
                self.expect_sym(')')?;
                Ok(e)
            }
            other => self
                .lets
                .get(other)
                .cloned()
                .ok_or_else(|| syntax(t.line, t.column, format!("unknown identifier `{other}`"))),
        }
    }
}

/// Parses a complete metric definition.
pub fn parse_metric(source: &str) -> Result<MetricSpec, ParseError> {
    Parser::new(lex(source)?).metric()
}

/// Parses a single expression over `n` coordinates (e.g. a conformal factor).
pub fn parse_expr(source: &str, n: usize) -> Result<Expr, ParseError> {
    let mut p = Parser::new(lex(source)?);
    p.dim = Some(n);
    let e = p.expr()?;
    if p.peek().tok != Tok::Eof {
        return Err(p.error_here("unexpected trailing input"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn euclidean_example() {
        let spec = parse_metric("dim 2; g[1,1]=1; g[2,2]=1").unwrap();
        assert_eq!(spec.dim(), 2);
        assert!(spec.entry(0, 0).is_one() && spec.entry(1, 1).is_one());
        assert!(spec.entry(0, 1).is_zero() && spec.entry(1, 0).is_zero());
        assert_eq!(spec.domain, Domain::Ball { radius: 1.0 });
    }

    #[test]
    fn hopf_example() {
        let spec = parse_metric("dim 2; g[1,1]=1/abs2(z); g[2,2]=1/abs2(z)").unwrap();
        let p = [c(0.5, 0.5), c(-1.0, 0.25)];
        let s: f64 = p.iter().map(|z| z.norm_sqr()).sum();
        let v = spec.entry(1, 1).eval(&p).unwrap();
        assert!((v - c(1.0 / s, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn missing_expression_is_a_syntax_error() {
        let err = parse_metric("dim 2; g[1,1]=").unwrap_err();
        match err {
            ParseError::Syntax { line, column, .. } => {
                assert_eq!(line, 1);
                assert_eq!(column, 15);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse_metric("dim 2\n# comment\ng[1,1] = 1 +* 2\n").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn dimension_and_duplicate_errors() {
        assert!(matches!(
            parse_metric("dim 2; g[3,1]=1").unwrap_err(),
            ParseError::DimensionMismatch { index: 3, dim: 2, .. }
        ));
        assert!(matches!(
            parse_metric("dim 2; g[1,1]=z3").unwrap_err(),
            ParseError::DimensionMismatch { index: 3, .. }
        ));
        assert!(matches!(
            parse_metric("dim 1; g[1,1]=1\ng[1,1]=2").unwrap_err(),
            ParseError::DuplicateEntry { line: 2, i: 1, j: 1 }
        ));
    }

    #[test]
    fn complex_literals_and_lets() {
        let spec = parse_metric("dim 1\nlet a = 2+3i\nlet b = a*i\ng[1,1] = b - 1.5e-1").unwrap();
        let v = spec.entry(0, 0).eval(&[c(0.0, 0.0)]).unwrap();
        assert!((v - c(-3.15, 2.0)).norm() < 1e-15);
    }

    #[test]
    fn powers_and_unary_minus() {
        let e = parse_expr("-z1^2 + z1^-1 + z1^(-2)", 1).unwrap();
        let p = [c(0.6, 0.8)];
        let z = p[0];
        let expected = -z * z + 1.0 / z + 1.0 / (z * z);
        assert!((e.eval(&p).unwrap() - expected).norm() < 1e-14);
    }

    #[test]
    fn abs2_of_general_expression() {
        let e = parse_expr("abs2(z1 + 2*zbar2)", 2).unwrap();
        let p = [c(0.3, 0.1), c(-0.2, 0.4)];
        let w = p[0] + 2.0 * p[1].conj();
        assert!((e.eval(&p).unwrap() - c(w.norm_sqr(), 0.0)).norm() < 1e-14);
    }

    #[test]
    fn product_domain_consumes_factor_segments() {
        let spec = parse_metric("dim 2; domain product ball 0.6; ball 2; g[1,1]=1; g[2,2]=1").unwrap();
        assert_eq!(
            spec.domain,
            Domain::Product(vec![Domain::Ball { radius: 0.6 }, Domain::Ball { radius: 2.0 }])
        );
        assert!(spec.entry(1, 1).is_one());
    }

    #[test]
    fn annulus_domain() {
        let spec = parse_metric("dim 3\ndomain annulus 0.5 2\ng[1,1]=1").unwrap();
        assert_eq!(spec.domain, Domain::Annulus { inner: 0.5, outer: 2.0 });
        assert!(parse_metric("dim 1\ndomain annulus 2 1").is_err());
    }

    #[test]
    fn reserved_and_unknown_names() {
        assert!(parse_metric("dim 1; let z1 = 2").is_err());
        assert!(parse_metric("dim 1; g[1,1] = foo").is_err());
        assert!(parse_metric("g[1,1] = 1").is_err());
    }

    #[test]
    fn round_trip_through_printer() {
        let src = "dim 2\ndomain annulus 0.5 2\nlet s = abs2(z)\n\
                   g[1,1] = exp(-0.1*s)/s + conj(z1)*z2*(0.5-0.25i)\n\
                   g[1,2] = log(2 + s)*zbar1*z2/(1 + s)^2\n\
                   g[2,1] = log(2 + s)*z1*zbar2/(1 + s)^2\ng[2,2] = 1/s - -2";
        let spec = parse_metric(src).unwrap();
        let reparsed = parse_metric(&spec.to_dsl()).unwrap();
        assert_eq!(reparsed.domain, spec.domain);
        let p = [c(0.7, -0.3), c(0.2, 0.9)];
        for i in 0..2 {
            for j in 0..2 {
                let a = spec.entry(i, j).eval(&p).unwrap();
                let b = reparsed.entry(i, j).eval(&p).unwrap();
                assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
            }
        }
    }
}
