//! A deliberately small arithmetic grammar for user-supplied functions.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' unary)?
//! primary := number | variable | constant | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! | operator   | precedence | associativity |
//! |------------|-----------:|---------------|
//! | `+` `-`    | 1          | left          |
//! | `*` `/`    | 2          | left          |
//! | unary `-`  | 3          | prefix        |
//! | `^`        | 4          | right         |
//!
//! So `-x^2 = -(x^2)` and `2^3^2 = 2^9`. Functions are `exp`, `sin`, `cos`;
//! constants are `pi` and `e`. Variables are whatever the caller allows
//! (`x`, `y` for kernels, `t` for paths). Columns in errors are 1-based.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprErrorKind {
    UnexpectedChar(char),
    UnexpectedEnd,
    UnbalancedParen,
    UnknownIdentifier(String),
    UnknownFunction(String),
    TrailingInput,
    BadNumber(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at column {column}")]
pub struct ExprError {
    pub kind: ExprErrorKind,
    pub column: usize,
}

impl fmt::Display for ExprErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprErrorKind::UnexpectedChar(c) => write!(f, "unexpected character `{c}`"),
            ExprErrorKind::UnexpectedEnd => f.write_str("unexpected end of expression"),
            ExprErrorKind::UnbalancedParen => f.write_str("unbalanced parenthesis"),
            ExprErrorKind::UnknownIdentifier(s) => write!(f, "unknown identifier `{s}`"),
            ExprErrorKind::UnknownFunction(s) => write!(f, "unknown function `{s}`"),
            ExprErrorKind::TrailingInput => f.write_str("unexpected trailing input"),
            ExprErrorKind::BadNumber(s) => write!(f, "malformed number `{s}`"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Sin,
    Cos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Var(usize),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

impl Node {
    fn eval(&self, vars: &[f64]) -> f64 {
        match self {
            Node::Num(v) => *v,
            Node::Var(k) => vars[*k],
            Node::Neg(a) => -a.eval(vars),
            Node::Bin(op, a, b) => {
                let (a, b) = (a.eval(vars), b.eval(vars));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                }
            }
            Node::Call(f, a) => {
                let a = a.eval(vars);
                match f {
                    Func::Exp => a.exp(),
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        let col = i + 1;
        if ch.is_whitespace() {
            i += 1;
        } else if ch.is_ascii_digit() || ch == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // exponent part: 1e-3, 2.5E+4
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
            let v = text.parse::<f64>().map_err(|_| ExprError {
                kind: ExprErrorKind::BadNumber(text.clone()),
                column: col,
            })?;
            out.push((Tok::Num(v), col));
        } else if ch.is_ascii_alphabetic() || ch == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
        } else if "+-*/^".contains(ch) {
            out.push((Tok::Op(ch), col));
            i += 1;
        } else if ch == '(' {
            out.push((Tok::LParen, col));
            i += 1;
        } else if ch == ')' {
            out.push((Tok::RParen, col));
            i += 1;
        } else {
            return Err(ExprError { kind: ExprErrorKind::UnexpectedChar(ch), column: col });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    vars: &'a [&'a str],
    end_col: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|(_, c)| *c).unwrap_or(self.end_col)
    }

    fn err<T>(&self, kind: ExprErrorKind) -> Result<T, ExprError> {
        Err(ExprError { kind, column: self.col() })
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        while let Some(Tok::Op(op @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            let op = if op == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(op @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.unary()?;
            let op = if op == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        match self.peek() {
            Some(Tok::Op('-')) => {
                self.pos += 1;
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Some(Tok::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.primary()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            // right associative; the exponent may carry a sign
            let exp = self.unary()?;
            return Ok(Node::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn parenthesised(&mut self) -> Result<Node, ExprError> {
        let open_col = self.col();
        self.pos += 1;
        let inner = self.expr()?;
        match self.peek() {
            Some(Tok::RParen) => {
                self.pos += 1;
                Ok(inner)
            }
            None => Err(ExprError { kind: ExprErrorKind::UnbalancedParen, column: open_col }),
            Some(_) => self.err(ExprErrorKind::TrailingInput),
        }
    }

    fn primary(&mut self) -> Result<Node, ExprError> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Node::Num(v))
            }
            Some(Tok::LParen) => self.parenthesised(),
            Some(Tok::Ident(name)) => {
                let col = self.col();
                self.pos += 1;
                if let Some(Tok::LParen) = self.peek() {
                    let func = match name.as_str() {
                        "exp" => Func::Exp,
                        "sin" => Func::Sin,
                        "cos" => Func::Cos,
                        _ => {
                            return Err(ExprError {
                                kind: ExprErrorKind::UnknownFunction(name),
                                column: col,
                            })
                        }
                    };
                    let arg = self.parenthesised()?;
                    return Ok(Node::Call(func, Box::new(arg)));
                }
                if let Some(k) = self.vars.iter().position(|v| *v == name) {
                    return Ok(Node::Var(k));
                }
                match name.as_str() {
                    "pi" => Ok(Node::Num(std::f64::consts::PI)),
                    "e" => Ok(Node::Num(std::f64::consts::E)),
                    _ => Err(ExprError { kind: ExprErrorKind::UnknownIdentifier(name), column: col }),
                }
            }
            Some(Tok::RParen) => self.err(ExprErrorKind::UnbalancedParen),
            Some(Tok::Op(c)) => self.err(ExprErrorKind::UnexpectedChar(c)),
            None => self.err(ExprErrorKind::UnexpectedEnd),
        }
    }
}

/// A parsed expression over a fixed list of variable names.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    source: String,
    vars: Vec<String>,
    root: Node,
}

impl Expression {
    pub fn parse(source: &str, vars: &[&str]) -> Result<Expression, ExprError> {
        let toks = tokenize(source)?;
        let mut p = Parser { toks, pos: 0, vars, end_col: source.chars().count() + 1 };
        let root = p.expr()?;
        if p.pos < p.toks.len() {
            return match p.peek() {
                Some(Tok::RParen) => p.err(ExprErrorKind::UnbalancedParen),
                _ => p.err(ExprErrorKind::TrailingInput),
            };
        }
        Ok(Expression {
            source: source.to_string(),
            vars: vars.iter().map(|s| s.to_string()).collect(),
            root,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn variables(&self) -> &[String] {
        &self.vars
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Values are matched to the variable list given at parse time.
    pub fn eval(&self, values: &[f64]) -> f64 {
        self.root.eval(values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(src: &str, x: f64) -> f64 {
        Expression::parse(src, &["x"]).unwrap().eval(&[x])
    }

    #[test]
    fn precedence_table() {
        assert_eq!(ev("1 + 2 * 3", 0.0), 7.0);
        assert_eq!(ev("(1 + 2) * 3", 0.0), 9.0);
        assert_eq!(ev("2 ^ 3 ^ 2", 0.0), 512.0);
        assert_eq!(ev("-x^2", 3.0), -9.0);
        assert_eq!(ev("8 / 4 / 2", 0.0), 1.0);
        assert_eq!(ev("1 - 2 - 3", 0.0), -4.0);
        assert_eq!(ev("2^-1", 0.0), 0.5);
        assert_eq!(ev("--x", 2.0), 2.0);
    }

    #[test]
    fn functions_and_constants() {
        assert!((ev("exp(x*exp(-1))", 1.0) - (1.0f64 / std::f64::consts::E).exp()).abs() < 1e-15);
        assert!((ev("sin(pi/2) + cos(0)", 0.0) - 2.0).abs() < 1e-15);
        assert!((ev("e^x", 2.0) - 2.0f64.exp()).abs() < 1e-12);
        assert_eq!(ev("1.5e-3 * 2", 0.0), 3e-3);
    }

    #[test]
    fn two_variables() {
        let e = Expression::parse("x * exp(-y)", &["x", "y"]).unwrap();
        assert!((e.eval(&[2.0, 0.0]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn unbalanced_paren_reports_column_of_open() {
        let err = Expression::parse("e^(x", &["x"]).unwrap_err();
        assert_eq!(err.kind, ExprErrorKind::UnbalancedParen);
        assert_eq!(err.column, 3);
        let err = Expression::parse("x)", &["x"]).unwrap_err();
        assert_eq!(err.kind, ExprErrorKind::UnbalancedParen);
        assert_eq!(err.column, 2);
    }

    #[test]
    fn error_positions() {
        let err = Expression::parse("x + z", &["x"]).unwrap_err();
        assert_eq!(err.kind, ExprErrorKind::UnknownIdentifier("z".into()));
        assert_eq!(err.column, 5);
        let err = Expression::parse("tan(x)", &["x"]).unwrap_err();
        assert_eq!(err.kind, ExprErrorKind::UnknownFunction("tan".into()));
        assert_eq!(err.column, 1);
        let err = Expression::parse("x +", &["x"]).unwrap_err();
        assert_eq!(err.kind, ExprErrorKind::UnexpectedEnd);
        assert_eq!(err.column, 4);
        let err = Expression::parse("x $ 2", &["x"]).unwrap_err();
        assert_eq!(err.kind, ExprErrorKind::UnexpectedChar('$'));
        assert_eq!(err.column, 3);
        let err = Expression::parse("x 2", &["x"]).unwrap_err();
        assert_eq!(err.kind, ExprErrorKind::TrailingInput);
        let err = Expression::parse("1..2", &[]).unwrap_err();
        assert!(matches!(err.kind, ExprErrorKind::BadNumber(_)));
    }
}
