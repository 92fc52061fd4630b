//! Small expression language for time coefficients.
//!
//! Grammar (`^` binds tightest and associates to the right):
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := ('-')? power
//! power  := atom ('^' power)?
//! atom   := number | VAR | func '(' expr ')' | '(' expr ')'
//! func   := 'exp' | 'log' | 'sqrt' | 'sin' | 'cos'
//! ```
//!
//! `VAR` is `t` for time coefficients and `s` for custom nonlinearities.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Sin,
    Cos,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Exp => x.exp(),
            Func::Log => x.ln(),
            Func::Sqrt => x.sqrt(),
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
        }
    }
}

/// Expression tree in a single real variable.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("empty input")]
    EmptyInput,
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("unbalanced parentheses")]
    UnbalancedParens,
    #[error("unexpected character `{0}`")]
    UnexpectedChar(char),
    #[error("unexpected token `{0}`")]
    UnexpectedToken(String),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("invalid number literal `{0}`")]
    InvalidNumber(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at byte {offset}: {kind}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(v) => write!(f, "{v}"),
            Tok::Ident(s) => f.write_str(s),
            Tok::Op(c) => write!(f, "{c}"),
            Tok::LParen => f.write_str("("),
            Tok::RParen => f.write_str(")"),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || c == b'.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            // exponent part, only when followed by a digit (so `2e` stays an error)
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
            let value: f64 = text.parse().map_err(|_| ParseError {
                kind: ParseErrorKind::InvalidNumber(text.to_string()),
                offset: start,
            })?;
            out.push((Tok::Num(value), start));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
        } else {
            let tok = match c {
                b'+' | b'-' | b'*' | b'/' | b'^' => Tok::Op(c as char),
                b'(' => Tok::LParen,
                b')' => Tok::RParen,
                _ => {
                    let ch = src[start..].chars().next().unwrap_or('?');
                    return Err(ParseError {
                        kind: ParseErrorKind::UnexpectedChar(ch),
                        offset: start,
                    });
                }
            };
            i += 1;
            out.push((tok, start));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    var: &'a str,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(_, o)| *o)
    }

    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            kind,
            offset: self.offset(),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek() {
            let op = if *c == '+' { BinOp::Add } else { BinOp::Sub };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        while let Some(Tok::Op(c @ ('*' | '/'))) = self.peek() {
            let op = if *c == '*' { BinOp::Mul } else { BinOp::Div };
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if let Some(Tok::Op('-')) = self.peek() {
            self.pos += 1;
            let inner = self.power()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            let exponent = self.power()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let Some(tok) = self.peek().cloned() else {
            return Err(self.err(ParseErrorKind::UnexpectedEnd));
        };
        match tok {
            Tok::Num(v) => {
                self.pos += 1;
                Ok(Expr::Const(v))
            }
            Tok::Ident(name) => {
                if name == self.var {
                    self.pos += 1;
                    return Ok(Expr::Var);
                }
                let Some(func) = Func::from_name(&name) else {
                    return Err(self.err(ParseErrorKind::UnknownIdentifier(name)));
                };
                self.pos += 1;
                match self.peek() {
                    Some(Tok::LParen) => self.pos += 1,
                    Some(other) => {
                        return Err(self.err(ParseErrorKind::UnexpectedToken(other.to_string())))
                    }
                    None => return Err(self.err(ParseErrorKind::UnexpectedEnd)),
                }
                let arg = self.expr()?;
                self.close_paren()?;
                Ok(Expr::Call(func, Box::new(arg)))
            }
            Tok::LParen => {
                self.pos += 1;
                let inner = self.expr()?;
                self.close_paren()?;
                Ok(inner)
            }
            Tok::RParen => Err(self.err(ParseErrorKind::UnbalancedParens)),
            Tok::Op(c) => Err(self.err(ParseErrorKind::UnexpectedToken(c.to_string()))),
        }
    }

    fn close_paren(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::RParen) => {
                self.pos += 1;
                Ok(())
            }
            None => Err(self.err(ParseErrorKind::UnbalancedParens)),
            Some(other) => Err(self.err(ParseErrorKind::UnexpectedToken(other.to_string()))),
        }
    }
}

/// Parses an expression in the time variable `t`.
pub fn parse_expr(source: &str) -> Result<Expr, ParseError> {
    parse_expr_in(source, "t")
}

/// Parses an expression in an arbitrary single-letter variable.
pub fn parse_expr_in(source: &str, var: &str) -> Result<Expr, ParseError> {
    let toks = tokenize(source)?;
    if toks.is_empty() {
        return Err(ParseError {
            kind: ParseErrorKind::EmptyInput,
            offset: 0,
        });
    }
    let mut parser = Parser {
        toks,
        pos: 0,
        end: source.len(),
        var,
    };
    let expr = parser.expr()?;
    match parser.peek() {
        None => Ok(expr),
        Some(Tok::RParen) => Err(parser.err(ParseErrorKind::UnbalancedParens)),
        Some(other) => {
            let text = other.to_string();
            Err(parser.err(ParseErrorKind::UnexpectedToken(text)))
        }
    }
}

/// A real number stored as sign and log-magnitude, used to evaluate
/// expressions whose direct evaluation under- or overflows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog {
    /// -1, 0 or +1.
    pub sign: f64,
    pub ln_abs: f64,
}

impl SignedLog {
    pub const ZERO: SignedLog = SignedLog {
        sign: 0.0,
        ln_abs: f64::NEG_INFINITY,
    };

    pub fn from_value(x: f64) -> Option<Self> {
        if x.is_nan() {
            return None;
        }
        if x == 0.0 {
            return Some(Self::ZERO);
        }
        Some(SignedLog {
            sign: x.signum(),
            ln_abs: x.abs().ln(),
        })
    }

    pub fn value(self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.ln_abs.exp()
        }
    }

    fn add(self, other: SignedLog) -> Option<SignedLog> {
        if self.sign == 0.0 {
            return Some(other);
        }
        if other.sign == 0.0 {
            return Some(self);
        }
        let (big, small) = if self.ln_abs >= other.ln_abs {
            (self, other)
        } else {
            (other, self)
        };
        if big.ln_abs.is_infinite() {
            if small.ln_abs.is_infinite() && small.sign != big.sign {
                return None;
            }
            return Some(big);
        }
        let ratio = (small.ln_abs - big.ln_abs).exp();
        let factor = if big.sign == small.sign {
            1.0 + ratio
        } else {
            1.0 - ratio
        };
        if factor == 0.0 {
            return Some(Self::ZERO);
        }
        Some(SignedLog {
            sign: big.sign,
            ln_abs: big.ln_abs + factor.ln(),
        })
    }

    fn neg(self) -> SignedLog {
        SignedLog {
            sign: -self.sign,
            ln_abs: self.ln_abs,
        }
    }
}

impl Expr {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var => x,
            Expr::Neg(a) => -a.eval(x),
            Expr::Binary(op, a, b) => {
                let (a, b) = (a.eval(x), b.eval(x));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                }
            }
            Expr::Call(f, a) => f.apply(a.eval(x)),
        }
    }

    /// Evaluates in sign/log-magnitude arithmetic. Returns `None` when the
    /// value is undefined (NaN, log of a negative number, ...).
    pub fn eval_signed_log(&self, x: f64) -> Option<SignedLog> {
        match self {
            Expr::Const(c) => SignedLog::from_value(*c),
            Expr::Var => SignedLog::from_value(x),
            Expr::Neg(a) => Some(a.eval_signed_log(x)?.neg()),
            Expr::Binary(op, a, b) => {
                let la = a.eval_signed_log(x)?;
                match op {
                    BinOp::Add => la.add(b.eval_signed_log(x)?),
                    BinOp::Sub => la.add(b.eval_signed_log(x)?.neg()),
                    BinOp::Mul => {
                        let lb = b.eval_signed_log(x)?;
                        let sign = la.sign * lb.sign;
                        if sign == 0.0 {
                            return Some(SignedLog::ZERO);
                        }
                        Some(SignedLog {
                            sign,
                            ln_abs: la.ln_abs + lb.ln_abs,
                        })
                    }
                    BinOp::Div => {
                        let lb = b.eval_signed_log(x)?;
                        if lb.sign == 0.0 {
                            return None;
                        }
                        if la.sign == 0.0 {
                            return Some(SignedLog::ZERO);
                        }
                        Some(SignedLog {
                            sign: la.sign * lb.sign,
                            ln_abs: la.ln_abs - lb.ln_abs,
                        })
                    }
                    BinOp::Pow => {
                        let e = b.eval_signed_log(x)?.value();
                        if la.sign == 0.0 {
                            return SignedLog::from_value(0f64.powf(e));
                        }
                        let sign = if la.sign > 0.0 {
                            1.0
                        } else if e.fract() == 0.0 {
                            if (e / 2.0).fract() == 0.0 {
                                1.0
                            } else {
                                -1.0
                            }
                        } else {
                            return None;
                        };
                        let ln_abs = e * la.ln_abs;
                        if ln_abs.is_nan() {
                            return None;
                        }
                        Some(SignedLog { sign, ln_abs })
                    }
                }
            }
            Expr::Call(f, a) => {
                let la = a.eval_signed_log(x)?;
                match f {
                    Func::Exp => {
                        let arg = la.value();
                        Some(SignedLog {
                            sign: 1.0,
                            ln_abs: arg,
                        })
                    }
                    Func::Log => {
                        if la.sign <= 0.0 {
                            return None;
                        }
                        SignedLog::from_value(la.ln_abs)
                    }
                    Func::Sqrt => {
                        if la.sign < 0.0 {
                            return None;
                        }
                        if la.sign == 0.0 {
                            return Some(SignedLog::ZERO);
                        }
                        Some(SignedLog {
                            sign: 1.0,
                            ln_abs: 0.5 * la.ln_abs,
                        })
                    }
                    Func::Sin | Func::Cos => SignedLog::from_value(f.apply(la.value())),
                }
            }
        }
    }

    /// True when the expression mentions its variable.
    pub fn depends_on_var(&self) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var => true,
            Expr::Neg(a) | Expr::Call(_, a) => a.depends_on_var(),
            Expr::Binary(_, a, b) => a.depends_on_var() || b.depends_on_var(),
        }
    }

    /// Prints the expression with `var` as the variable name, fully
    /// parenthesised so that it parses back to the same tree shape.
    pub fn to_source(&self, var: &str) -> String {
        let mut out = String::new();
        self.write_source(&mut out, var);
        out
    }

    fn write_source(&self, out: &mut String, var: &str) {
        match self {
            Expr::Const(c) => {
                if *c < 0.0 {
                    out.push_str(&format!("(-{})", -c));
                } else {
                    out.push_str(&format!("{c}"));
                }
            }
            Expr::Var => out.push_str(var),
            Expr::Neg(a) => {
                out.push_str("(-");
                a.write_source(out, var);
                out.push(')');
            }
            Expr::Binary(op, a, b) => {
                out.push('(');
                a.write_source(out, var);
                out.push(op.symbol());
                b.write_source(out, var);
                out.push(')');
            }
            Expr::Call(f, a) => {
                out.push_str(f.name());
                out.push('(');
                a.write_source(out, var);
                out.push(')');
            }
        }
    }

    pub fn mul(self, other: Expr) -> Expr {
        Expr::Binary(BinOp::Mul, Box::new(self), Box::new(other))
    }

    pub fn div(self, other: Expr) -> Expr {
        Expr::Binary(BinOp::Div, Box::new(self), Box::new(other))
    }

    pub fn powf(self, exponent: f64) -> Expr {
        Expr::Binary(BinOp::Pow, Box::new(self), Box::new(Expr::Const(exponent)))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_source("t"))
    }
}
