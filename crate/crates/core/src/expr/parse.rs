//! Recursive-descent parser for radial expressions.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := ('-' | '+') unary | power
//! power := atom ('^' unary)?
//! atom  := NUMBER | 'r' | 'pi' | 'e' | FUNC '(' expr ')' | '(' expr ')'
//! ```
//!
//! `^` binds tighter than unary minus and is right-associative, so `-r^2`
//! is `-(r^2)` and `r^2^3` is `r^(2^3)`.

use super::{BinaryOp, Expr, ExprError, UnaryOp};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    offset: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ExprError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            _ if c.is_ascii_digit() || c == '.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                // exponent only when followed by a digit (optionally signed)
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let lit = &text[start..i];
                let v: f64 = lit.parse().map_err(|_| ExprError::Syntax {
                    offset: start,
                    expected: vec!["number".into()],
                })?;
                if !v.is_finite() {
                    return Err(ExprError::Syntax {
                        offset: start,
                        expected: vec!["finite number".into()],
                    });
                }
                out.push(Token {
                    tok: Tok::Num(v),
                    offset: start,
                });
                continue;
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push(Token {
                    tok: Tok::Ident(text[start..i].to_string()),
                    offset: start,
                });
                continue;
            }
            _ => {
                return Err(ExprError::Syntax {
                    offset: start,
                    expected: vec!["operand".into(), "operator".into()],
                })
            }
        };
        out.push(Token { tok, offset: start });
        i += 1;
    }
    out.push(Token {
        tok: Tok::End,
        offset: text.len(),
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

fn function_op(name: &str) -> Option<UnaryOp> {
    Some(match name {
        "exp" => UnaryOp::Exp,
        "log" | "ln" => UnaryOp::Log,
        "sqrt" => UnaryOp::Sqrt,
        "sinh" => UnaryOp::Sinh,
        "cosh" => UnaryOp::Cosh,
        "tanh" => UnaryOp::Tanh,
        "sin" => UnaryOp::Sin,
        "cos" => UnaryOp::Cos,
        _ => return None,
    })
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, label: &str) -> Result<(), ExprError> {
        if self.peek().tok == want {
            self.bump();
            Ok(())
        } else {
            Err(ExprError::Syntax {
                offset: self.peek().offset,
                expected: vec![label.into()],
            })
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Plus => BinaryOp::Add,
                Tok::Minus => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Star => BinaryOp::Mul,
                Tok::Slash => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        match self.peek().tok {
            Tok::Minus => {
                self.bump();
                Ok(Expr::Unary(UnaryOp::Neg, Box::new(self.unary()?)))
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.peek().tok == Tok::Caret {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Expr::Binary(BinaryOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let t = self.bump();
        match t.tok {
            Tok::Num(v) => Ok(Expr::Const(v)),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, ")")?;
                Ok(inner)
            }
            Tok::Ident(name) => match name.as_str() {
                "r" => Ok(Expr::Var),
                "pi" => Ok(Expr::Const(std::f64::consts::PI)),
                "e" => Ok(Expr::Const(std::f64::consts::E)),
                _ => {
                    let op = function_op(&name).ok_or(ExprError::UnknownIdentifier {
                        name: name.clone(),
                        offset: t.offset,
                    })?;
                    self.expect(Tok::LParen, "(")?;
                    let arg = self.expr()?;
                    self.expect(Tok::RParen, ")")?;
                    Ok(Expr::Unary(op, Box::new(arg)))
                }
            },
            _ => Err(ExprError::Syntax {
                offset: t.offset,
                expected: vec!["number".into(), "identifier".into(), "(".into()],
            }),
        }
    }
}

pub(crate) fn parse(text: &str) -> Result<Expr, ExprError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    match p.peek().tok {
        Tok::End => Ok(e),
        _ => Err(ExprError::Syntax {
            offset: p.peek().offset,
            expected: vec!["operator".into(), "end of input".into()],
        }),
    }
}
