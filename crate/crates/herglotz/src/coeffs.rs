//! Coefficient functions of `x`: a small expression language plus grid-sampled fields.

use std::fmt;

use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
    Tanh,
}

impl Func {
    pub const ALL: [Func; 8] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Abs,
        Func::Tanh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Tanh => "tanh",
        }
    }

    pub fn from_name(s: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

/// Expression tree over `x`, `pi`, numeric literals, `+ - * / ^`, unary minus and a fixed
/// set of elementary functions.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    X,
    Pi,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at position {pos}: {msg}")]
pub struct ParseError {
    /// 0-based byte offset into the source.
    pub pos: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("domain error: {func}({arg}) at x = {x}")]
    Domain { func: &'static str, arg: f64, x: f64 },
    #[error("non-finite value at x = {x}")]
    NonFinite { x: f64 },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let v: f64 = text.parse().map_err(|_| ParseError {
                pos: start,
                msg: format!("malformed number '{text}'"),
            })?;
            if !v.is_finite() {
                return Err(ParseError { pos: start, msg: format!("number '{text}' overflows") });
            }
            out.push((Tok::Num(v), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
        } else if "+-*/^()".contains(c) {
            out.push((Tok::Sym(c), i));
            i += 1;
        } else {
            let ch = src[i..].chars().next().unwrap_or(c);
            return Err(ParseError { pos: i, msg: format!("unexpected character '{ch}'") });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.0)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |t| t.1)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { pos: self.pos(), msg: msg.into() })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat('+') {
                BinOp::Add
            } else if self.eat('-') {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = if self.eat('*') {
                BinOp::Mul
            } else if self.eat('/') {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.factor()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.base()?;
        if self.eat('^') {
            let exp = self.factor()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.peek().cloned() {
            None => self.err("unexpected end of input, expected an expression"),
            Some(Tok::Num(v)) => {
                self.at += 1;
                Ok(Expr::Num(v))
            }
            Some(Tok::Sym('(')) => {
                self.at += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return self.err("expected ')'");
                }
                Ok(e)
            }
            Some(Tok::Sym(c)) => self.err(format!("unexpected '{c}'")),
            Some(Tok::Ident(name)) => {
                self.at += 1;
                match name.as_str() {
                    "x" => Ok(Expr::X),
                    "pi" => Ok(Expr::Pi),
                    _ => {
                        if self.peek() == Some(&Tok::Sym('(')) {
                            let Some(f) = Func::from_name(&name) else {
                                return Err(ParseError { pos, msg: format!("unknown function '{name}'") });
                            };
                            self.at += 1;
                            let arg = self.expr()?;
                            if !self.eat(')') {
                                return self.err("expected ')'");
                            }
                            Ok(Expr::Call(f, Box::new(arg)))
                        } else {
                            Err(ParseError { pos, msg: format!("unknown identifier '{name}'") })
                        }
                    }
                }
            }
        }
    }
}

/// Parses an expression in `x`.
pub fn parse_expr(source: &str) -> Result<Expr, ParseError> {
    let toks = tokenize(source)?;
    if toks.is_empty() {
        return Err(ParseError { pos: 0, msg: "empty expression".into() });
    }
    let mut p = Parser { toks, at: 0, end: source.len() };
    let e = p.expr()?;
    if p.at < p.toks.len() {
        return p.err("unexpected trailing input");
    }
    Ok(e)
}

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
        Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
        Expr::Neg(_) => 3,
        Expr::Bin(BinOp::Pow, ..) => 4,
        Expr::Num(v) if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) => 3,
        _ => 5,
    }
}

fn write_wrapped(f: &mut fmt::Formatter<'_>, e: &Expr, paren: bool) -> fmt::Result {
    if paren {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::X => f.write_str("x"),
            Expr::Pi => f.write_str("pi"),
            Expr::Neg(a) => {
                f.write_str("-")?;
                write_wrapped(f, a, prec(a) < 3)
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
            Expr::Bin(op, l, r) => {
                let (lp, rp) = match op {
                    BinOp::Add | BinOp::Sub => (prec(l) < 1, prec(r) <= 1),
                    BinOp::Mul | BinOp::Div => (prec(l) < 2, prec(r) <= 2),
                    BinOp::Pow => (prec(l) < 5, prec(r) < 3),
                };
                write_wrapped(f, l, lp)?;
                match op {
                    BinOp::Add | BinOp::Sub => write!(f, " {} ", op.symbol())?,
                    _ => f.write_str(op.symbol())?,
                }
                write_wrapped(f, r, rp)
            }
        }
    }
}

fn apply<T: Real>(func: Func, a: T, x: T) -> Result<T, EvalError> {
    let domain = |func: Func| EvalError::Domain {
        func: func.name(),
        arg: a.to_f64_lossy(),
        x: x.to_f64_lossy(),
    };
    Ok(match func {
        Func::Sin => a.sin(),
        Func::Cos => a.cos(),
        Func::Tan => a.tan(),
        Func::Exp => a.exp(),
        Func::Log => {
            if a <= T::zero() {
                return Err(domain(func));
            }
            a.ln()
        }
        Func::Sqrt => {
            if a < T::zero() {
                return Err(domain(func));
            }
            a.sqrt()
        }
        Func::Abs => a.abs(),
        Func::Tanh => a.tanh(),
    })
}

fn finite<T: Real>(v: T, x: T) -> Result<T, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite { x: x.to_f64_lossy() })
    }
}

impl Expr {
    /// Evaluates at `x`. Domain violations and non-finite intermediates are errors.
    pub fn eval<T: Real>(&self, x: T) -> Result<T, EvalError> {
        let v = match self {
            Expr::Num(v) => T::c(*v),
            Expr::X => x,
            Expr::Pi => T::PI(),
            Expr::Neg(a) => -a.eval(x)?,
            Expr::Call(func, a) => apply(*func, a.eval(x)?, x)?,
            Expr::Bin(op, l, r) => {
                let (l, r) = (l.eval(x)?, r.eval(x)?);
                match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    BinOp::Div => l / r,
                    BinOp::Pow => {
                        if l < T::zero() && r.fract() != T::zero() {
                            return Err(EvalError::Domain {
                                func: "pow",
                                arg: l.to_f64_lossy(),
                                x: x.to_f64_lossy(),
                            });
                        }
                        l.powf(r)
                    }
                }
            }
        };
        finite(v, x)
    }

    /// Value and x-derivative by forward-mode dual arithmetic.
    pub fn eval_with_derivative<T: Real>(&self, x: T) -> Result<(T, T), EvalError> {
        let (v, d) = match self {
            Expr::Num(v) => (T::c(*v), T::zero()),
            Expr::X => (x, T::one()),
            Expr::Pi => (T::PI(), T::zero()),
            Expr::Neg(a) => {
                let (v, d) = a.eval_with_derivative(x)?;
                (-v, -d)
            }
            Expr::Call(func, a) => {
                let (u, du) = a.eval_with_derivative(x)?;
                let v = apply(*func, u, x)?;
                let dv = match func {
                    Func::Sin => u.cos(),
                    Func::Cos => -u.sin(),
                    Func::Tan => T::one() + v * v,
                    Func::Exp => v,
                    Func::Log => u.recip(),
                    Func::Sqrt => T::c(0.5) / v,
                    Func::Abs => u.signum(),
                    Func::Tanh => T::one() - v * v,
                };
                (v, dv * du)
            }
            Expr::Bin(op, l, r) => {
                let (a, da) = l.eval_with_derivative(x)?;
                let (b, db) = r.eval_with_derivative(x)?;
                match op {
                    BinOp::Add => (a + b, da + db),
                    BinOp::Sub => (a - b, da - db),
                    BinOp::Mul => (a * b, da * b + a * db),
                    BinOp::Div => (a / b, (da * b - a * db) / (b * b)),
                    BinOp::Pow => {
                        let v = Expr::Bin(BinOp::Pow, l.clone(), r.clone()).eval(x)?;
                        let mut d = if da == T::zero() {
                            T::zero()
                        } else {
                            b * a.powf(b - T::one()) * da
                        };
                        if db != T::zero() {
                            d = d + v * a.ln() * db;
                        }
                        (v, d)
                    }
                }
            }
        };
        Ok((finite(v, x)?, finite(d, x)?))
    }

    /// True when the tree contains no `x`.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::Pi => true,
            Expr::X => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.is_constant(),
            Expr::Bin(_, l, r) => l.is_constant() && r.is_constant(),
        }
    }
}

/// Evaluates a parsed expression at `x`.
pub fn eval_expr<T: Real>(e: &Expr, x: T) -> Result<T, EvalError> {
    e.eval(x)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Eval(#[from] EvalError),
    #[error("invalid field: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldRepr {
    Expr { expr: Expr, source: String },
    /// Uniform samples on `[a, b]`, `values.len() - 1` cells. When `origin` is set, point queries
    /// go to the original field and the samples are a cache.
    Sampled { values: Vec<f64>, origin: Option<Box<CoefficientField>> },
    /// `base(x) / divisor` on `[lo, hi)`, `base(x)` elsewhere.
    Modulated { base: Box<CoefficientField>, lo: f64, hi: f64, divisor: f64 },
    /// `scale * base(x) + shift`.
    Affine { base: Box<CoefficientField>, scale: f64, shift: f64 },
}

/// A real function of `x` on `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    pub a: f64,
    pub b: f64,
    pub repr: FieldRepr,
}

/// Slack used for half-open interval membership on floating-point grids.
const EDGE_EPS: f64 = 1e-9;

impl CoefficientField {
    pub fn parse(source: &str, a: f64, b: f64) -> Result<Self, FieldError> {
        let expr = parse_expr(source)?;
        Self::from_expr(expr, source, a, b)
    }

    pub fn from_expr(expr: Expr, source: &str, a: f64, b: f64) -> Result<Self, FieldError> {
        check_domain(a, b)?;
        Ok(Self { a, b, repr: FieldRepr::Expr { expr, source: source.to_string() } })
    }

    pub fn constant(v: f64, a: f64, b: f64) -> Self {
        Self {
            a,
            b,
            repr: FieldRepr::Expr { expr: Expr::Num(v), source: format!("{v:?}") },
        }
    }

    pub fn from_samples(values: Vec<f64>, a: f64, b: f64) -> Result<Self, FieldError> {
        check_domain(a, b)?;
        if values.len() < 2 {
            return Err(FieldError::Invalid("a sampled field needs at least 2 samples".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(FieldError::Invalid(format!("sample {i} is not finite")));
        }
        Ok(Self { a, b, repr: FieldRepr::Sampled { values, origin: None } })
    }

    pub fn modulated(base: CoefficientField, lo: f64, hi: f64, divisor: f64) -> Self {
        Self {
            a: base.a,
            b: base.b,
            repr: FieldRepr::Modulated { base: Box::new(base), lo, hi, divisor },
        }
    }

    pub fn affine(base: CoefficientField, scale: f64, shift: f64) -> Self {
        Self { a: base.a, b: base.b, repr: FieldRepr::Affine { base: Box::new(base), scale, shift } }
    }

    /// Source text for expression-backed fields.
    pub fn source(&self) -> Option<&str> {
        match &self.repr {
            FieldRepr::Expr { source, .. } => Some(source),
            _ => None,
        }
    }

    /// Expression text equivalent to the field, when the grammar can express it. Affine
    /// wrappers are spelled out; sampled and piecewise fields have none.
    pub fn to_expression(&self) -> Option<String> {
        match &self.repr {
            FieldRepr::Expr { source, .. } => Some(source.clone()),
            FieldRepr::Affine { base, scale, shift } => {
                Some(format!("{scale:?}*({}) + {shift:?}", base.to_expression()?))
            }
            _ => None,
        }
    }

    /// Constant value if the field is an `x`-free expression.
    pub fn as_constant(&self) -> Option<f64> {
        match &self.repr {
            FieldRepr::Expr { expr, .. } if expr.is_constant() => expr.eval(0.0).ok(),
            FieldRepr::Affine { base, scale, shift } => base.as_constant().map(|v| scale * v + shift),
            _ => None,
        }
    }

    pub fn eval<T: Real>(&self, x: T) -> Result<T, FieldError> {
        Ok(self.eval_with_derivative(x, false)?.0)
    }

    /// Value and derivative. Sampled fields use second-order differences of the samples.
    pub fn eval_d<T: Real>(&self, x: T) -> Result<(T, T), FieldError> {
        self.eval_with_derivative(x, true)
    }

    fn eval_with_derivative<T: Real>(&self, x: T, want_d: bool) -> Result<(T, T), FieldError> {
        match &self.repr {
            FieldRepr::Expr { expr, .. } => {
                if want_d {
                    Ok(expr.eval_with_derivative(x)?)
                } else {
                    Ok((expr.eval(x)?, T::zero()))
                }
            }
            FieldRepr::Sampled { origin: Some(o), .. } => o.eval_with_derivative(x, want_d),
            FieldRepr::Sampled { values, origin: None } => Ok(self.interp(values, x, want_d)),
            FieldRepr::Modulated { base, lo, hi, divisor } => {
                let (v, d) = base.eval_with_derivative(x, want_d)?;
                let xf = x.to_f64_lossy();
                if xf >= lo - EDGE_EPS && xf < hi - EDGE_EPS {
                    let q = T::c(*divisor);
                    Ok((v / q, d / q))
                } else {
                    Ok((v, d))
                }
            }
            FieldRepr::Affine { base, scale, shift } => {
                let (v, d) = base.eval_with_derivative(x, want_d)?;
                Ok((T::c(*scale) * v + T::c(*shift), T::c(*scale) * d))
            }
        }
    }

    fn interp<T: Real>(&self, values: &[f64], x: T, want_d: bool) -> (T, T) {
        let n = values.len() - 1;
        let h = (self.b - self.a) / n as f64;
        let s = ((x.to_f64_lossy() - self.a) / h).clamp(0.0, n as f64);
        let i = (s.floor() as usize).min(n - 1);
        let t = T::c(s - i as f64);
        let (v0, v1) = (T::c(values[i]), T::c(values[i + 1]));
        let v = v0 + (v1 - v0) * t;
        if !want_d {
            return (v, T::zero());
        }
        let nodal = |k: usize| -> f64 {
            if n == 1 {
                (values[1] - values[0]) / h
            } else if k == 0 {
                (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h)
            } else if k == n {
                (3.0 * values[n] - 4.0 * values[n - 1] + values[n - 2]) / (2.0 * h)
            } else {
                (values[k + 1] - values[k - 1]) / (2.0 * h)
            }
        };
        let (d0, d1) = (T::c(nodal(i)), T::c(nodal(i + 1)));
        (v, d0 + (d1 - d0) * t)
    }
}

fn check_domain(a: f64, b: f64) -> Result<(), FieldError> {
    if a.is_finite() && b.is_finite() && a < b {
        Ok(())
    } else {
        Err(FieldError::Invalid(format!("domain [{a}, {b}] must be finite with a < b")))
    }
}

/// Samples `f` at `n + 1` uniform points on its domain. The result keeps `f` for off-grid
/// queries when `f` is expression-backed.
pub fn sample_field(f: &CoefficientField, n: usize) -> Result<CoefficientField, FieldError> {
    if n < 2 {
        return Err(FieldError::Invalid(format!("sample count n = {n} must be at least 2")));
    }
    let h = (f.b - f.a) / n as f64;
    let values = (0..=n)
        .map(|i| {
            let x = if i == n { f.b } else { f.a + i as f64 * h };
            f.eval(x)
        })
        .collect::<Result<Vec<f64>, _>>()?;
    let origin = match &f.repr {
        FieldRepr::Sampled { origin, .. } => origin.clone(),
        _ => Some(Box::new(f.clone())),
    };
    Ok(CoefficientField { a: f.a, b: f.b, repr: FieldRepr::Sampled { values, origin } })
}

impl CoefficientField {
    /// Sample values for sampled fields.
    pub fn samples(&self) -> Option<&[f64]> {
        match &self.repr {
            FieldRepr::Sampled { values, .. } => Some(values),
            _ => None,
        }
    }

    /// Same field with any expression origin dropped, so queries interpolate the samples.
    pub fn detached(&self) -> Self {
        match &self.repr {
            FieldRepr::Sampled { values, .. } => CoefficientField {
                a: self.a,
                b: self.b,
                repr: FieldRepr::Sampled { values: values.clone(), origin: None },
            },
            _ => self.clone(),
        }
    }
}
