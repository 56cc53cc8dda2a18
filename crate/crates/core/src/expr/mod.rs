//! Closed-form radial functions.
//!
//! Expressions in the single variable `r` are parsed into an [`Expr`] tree
//! and evaluated on [`Jet2`]s, which gives the value together with exact
//! first and second derivatives. Every coefficient that downstream solvers
//! need (`g'`, `g''`, `f'`, ...) comes from here; nothing is finite-differenced.

mod jet;
mod parse;

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub use jet::Jet2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at offset {offset}: expected {}", expected.join(" or "))]
    Syntax { offset: usize, expected: Vec<String> },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("domain error in {op} at r = {r}")]
    Domain { op: &'static str, r: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
    Tanh,
    Sin,
    Cos,
}

impl UnaryOp {
    fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "neg",
            UnaryOp::Exp => "exp",
            UnaryOp::Log => "log",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Sinh => "sinh",
            UnaryOp::Cosh => "cosh",
            UnaryOp::Tanh => "tanh",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Pow => "^",
        }
    }
}

/// Expression tree. Leaves are constants or the radial variable.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    /// True when the subtree does not mention `r`.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Const(_) => true,
            Expr::Var => false,
            Expr::Unary(_, a) => a.is_constant(),
            Expr::Binary(_, a, b) => a.is_constant() && b.is_constant(),
        }
    }

    /// Plain value; unlike `eval_jet` it accepts points where only the
    /// derivatives blow up, such as `sqrt` at 0.
    pub fn eval_value(&self, r: f64) -> Result<f64, ExprError> {
        let out = match self {
            Expr::Const(c) => *c,
            Expr::Var => r,
            Expr::Unary(op, a) => {
                let x = a.eval_value(r)?;
                let dom = || ExprError::Domain { op: op.name(), r };
                match op {
                    UnaryOp::Neg => -x,
                    UnaryOp::Exp => x.exp(),
                    UnaryOp::Log if x > 0.0 => x.ln(),
                    UnaryOp::Sqrt if x >= 0.0 => x.sqrt(),
                    UnaryOp::Log | UnaryOp::Sqrt => return Err(dom()),
                    UnaryOp::Sinh => x.sinh(),
                    UnaryOp::Cosh => x.cosh(),
                    UnaryOp::Tanh => x.tanh(),
                    UnaryOp::Sin => x.sin(),
                    UnaryOp::Cos => x.cos(),
                }
            }
            Expr::Binary(op, a, b) => {
                let (x, y) = (a.eval_value(r)?, b.eval_value(r)?);
                match op {
                    BinaryOp::Add => x + y,
                    BinaryOp::Sub => x - y,
                    BinaryOp::Mul => x * y,
                    BinaryOp::Div if y != 0.0 => x / y,
                    BinaryOp::Div => return Err(ExprError::Domain { op: "/", r }),
                    BinaryOp::Pow => {
                        if x < 0.0 && y.fract() != 0.0 {
                            return Err(ExprError::Domain { op: "^", r });
                        }
                        if x == 0.0 && y < 0.0 {
                            return Err(ExprError::Domain { op: "^", r });
                        }
                        x.powf(y)
                    }
                }
            }
        };
        if out.is_finite() {
            Ok(out)
        } else {
            Err(ExprError::Domain {
                op: "non-finite intermediate",
                r,
            })
        }
    }

    pub fn eval_jet(&self, r: f64) -> Result<Jet2, ExprError> {
        let out = match self {
            Expr::Const(c) => Jet2::constant(*c),
            Expr::Var => Jet2::var(r),
            Expr::Unary(op, a) => {
                let x = a.eval_jet(r)?;
                let dom = || ExprError::Domain { op: op.name(), r };
                match op {
                    UnaryOp::Neg => -x,
                    UnaryOp::Exp => x.exp(),
                    UnaryOp::Log if x.value > 0.0 => x.ln(),
                    UnaryOp::Sqrt if x.value > 0.0 => x.sqrt(),
                    UnaryOp::Log | UnaryOp::Sqrt => return Err(dom()),
                    UnaryOp::Sinh => x.sinh(),
                    UnaryOp::Cosh => x.cosh(),
                    UnaryOp::Tanh => x.tanh(),
                    UnaryOp::Sin => x.sin(),
                    UnaryOp::Cos => x.cos(),
                }
            }
            Expr::Binary(op, a, b) => {
                let x = a.eval_jet(r)?;
                match op {
                    BinaryOp::Add => x + b.eval_jet(r)?,
                    BinaryOp::Sub => x - b.eval_jet(r)?,
                    BinaryOp::Mul => x * b.eval_jet(r)?,
                    BinaryOp::Div => {
                        let y = b.eval_jet(r)?;
                        if y.value == 0.0 {
                            return Err(ExprError::Domain { op: "/", r });
                        }
                        x / y
                    }
                    BinaryOp::Pow => {
                        if b.is_constant() {
                            let p = b.eval_jet(r)?.value;
                            x.powf(p).ok_or(ExprError::Domain { op: "^", r })?
                        } else {
                            if x.value <= 0.0 {
                                return Err(ExprError::Domain { op: "^", r });
                            }
                            (b.eval_jet(r)? * x.ln()).exp()
                        }
                    }
                }
            }
        };
        if out.is_finite() {
            Ok(out)
        } else {
            Err(ExprError::Domain {
                op: "non-finite intermediate",
                r,
            })
        }
    }

    /// Jet of `ln(self)` for positive-valued expressions.
    ///
    /// Exponentials, products, quotients, powers and hyperbolic functions are
    /// taken apart symbolically so that `ln(exp(r^3))` stays finite far past
    /// the point where `exp(r^3)` overflows.
    pub fn eval_ln_jet(&self, r: f64) -> Result<Jet2, ExprError> {
        let dom = |op: &'static str| ExprError::Domain { op, r };
        let structured = match self {
            Expr::Unary(UnaryOp::Exp, a) => Some(a.eval_jet(r)),
            Expr::Unary(UnaryOp::Sqrt, a) => Some(a.eval_ln_jet(r).map(|l| l * 0.5)),
            Expr::Unary(UnaryOp::Sinh, a) => Some(a.eval_jet(r).and_then(|x| {
                if x.value <= 0.0 {
                    return Err(dom("log"));
                }
                if x.value < 1.0 {
                    let s = x.value.sinh();
                    return Ok(x.chain(s.ln(), 1.0 / x.value.tanh(), -1.0 / (s * s)));
                }
                let q = (-2.0 * x.value).exp();
                let f0 = x.value - std::f64::consts::LN_2 + (-q).ln_1p();
                let coth = (1.0 + q) / (1.0 - q);
                let csch2 = 4.0 * q / ((1.0 - q) * (1.0 - q));
                Ok(x.chain(f0, coth, -csch2))
            })),
            Expr::Unary(UnaryOp::Cosh, a) => Some(a.eval_jet(r).map(|x| {
                let ax = x.value.abs();
                let q = (-2.0 * ax).exp();
                let f0 = ax - std::f64::consts::LN_2 + q.ln_1p();
                let sech2 = 4.0 * q / ((1.0 + q) * (1.0 + q));
                x.chain(f0, x.value.tanh(), sech2)
            })),
            Expr::Binary(BinaryOp::Mul, a, b) => match (a.eval_ln_jet(r), b.eval_ln_jet(r)) {
                (Ok(la), Ok(lb)) => Some(Ok(la + lb)),
                _ => None,
            },
            Expr::Binary(BinaryOp::Div, a, b) => match (a.eval_ln_jet(r), b.eval_ln_jet(r)) {
                (Ok(la), Ok(lb)) => Some(Ok(la - lb)),
                _ => None,
            },
            Expr::Binary(BinaryOp::Add, a, b) => match (a.eval_ln_jet(r), b.eval_ln_jet(r)) {
                (Ok(la), Ok(lb)) => Some(Ok(log_sum(la, lb))),
                _ => None,
            },
            Expr::Binary(BinaryOp::Pow, a, b) => {
                if b.is_constant() {
                    let p = b.eval_jet(r)?.value;
                    a.eval_ln_jet(r).ok().map(|la| Ok(la * p))
                } else {
                    match (a.eval_ln_jet(r), b.eval_jet(r)) {
                        (Ok(la), Ok(y)) => Some(Ok(y * la)),
                        _ => None,
                    }
                }
            }
            Expr::Const(c) if *c > 0.0 => Some(Ok(Jet2::constant(c.ln()))),
            Expr::Var if r > 0.0 => Some(Ok(Jet2::var(r).ln())),
            _ => None,
        };
        let out = match structured {
            Some(res) => res?,
            None => {
                let v = self.eval_jet(r)?;
                if v.value <= 0.0 {
                    return Err(dom("log"));
                }
                v.ln()
            }
        };
        if out.is_finite() {
            Ok(out)
        } else {
            Err(dom("non-finite intermediate"))
        }
    }
}

/// `ln(e^a + e^b)` on jets of logarithms.
fn log_sum(la: Jet2, lb: Jet2) -> Jet2 {
    let m = la.value.max(lb.value);
    let (ea, eb) = ((la.value - m).exp(), (lb.value - m).exp());
    let s = ea + eb;
    let (wa, wb) = (ea / s, eb / s);
    let d1 = wa * la.d1 + wb * lb.d1;
    let d2 = wa * (la.d2 + la.d1 * la.d1) + wb * (lb.d2 + lb.d1 * lb.d1) - d1 * d1;
    Jet2::new(m + s.ln(), d1, d2)
}

/// Canonical, fully parenthesised form. Re-parsing yields the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var => write!(f, "r"),
            Expr::Unary(UnaryOp::Neg, a) => write!(f, "(-{a})"),
            Expr::Unary(op, a) => write!(f, "{}({a})", op.name()),
            Expr::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
        }
    }
}

/// A parsed radial function together with the text it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialFunction {
    ast: Expr,
    source: String,
}

impl RadialFunction {
    pub fn parse(text: &str) -> Result<Self, ExprError> {
        if text.trim().is_empty() {
            return Err(ExprError::Syntax {
                offset: 0,
                expected: vec!["expression".into()],
            });
        }
        Ok(Self {
            ast: parse::parse(text)?,
            source: text.to_string(),
        })
    }

    pub fn from_ast(ast: Expr) -> Self {
        let source = ast.to_string();
        Self { ast, source }
    }

    pub fn ast(&self) -> &Expr {
        &self.ast
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn canonical(&self) -> String {
        self.ast.to_string()
    }

    pub fn eval_jet(&self, r: f64) -> Result<Jet2, ExprError> {
        self.ast.eval_jet(r)
    }

    pub fn eval_ln_jet(&self, r: f64) -> Result<Jet2, ExprError> {
        self.ast.eval_ln_jet(r)
    }

    pub fn value(&self, r: f64) -> Result<f64, ExprError> {
        self.ast.eval_value(r)
    }

    pub fn is_constant(&self) -> bool {
        self.ast.is_constant()
    }
}

impl fmt::Display for RadialFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

impl std::str::FromStr for RadialFunction {
    type Err = ExprError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl Serialize for RadialFunction {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.source)
    }
}

impl<'de> Deserialize<'de> for RadialFunction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        Self::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// Parse a radial expression.
pub fn parse_expr(text: &str) -> Result<RadialFunction, ExprError> {
    RadialFunction::parse(text)
}
