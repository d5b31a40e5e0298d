//! A small expression language for nets.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := factor (('*' | '/') factor)*
//! factor  := unary ('^' factor)?
//! unary   := '-'? primary
//! primary := number | 'eps' | 'x' index | '|x|' | fn '(' expr ')' | '(' expr ')'
//! fn      := 'ln' | 'exp' | 'sigma' | 'abs' | 'log_eps'
//! ```
//!
//! `^` is right-associative and binds looser than unary minus, so `-2^2` is `(-2)^2`.
//! Expressions without `x` variables compile to scalar nets.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::asymptotics::{ScalarNet, SignedLog};
use crate::counterexample::sigma;
use crate::error::{Error, Result};
use crate::gfunction::{norm, FunctionNet};
use crate::gpoint::OpenBox;
use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Ln,
    Exp,
    Sigma,
    Abs,
    LogEps,
}

impl Func {
    pub const ALL: [Func; 5] = [Func::Ln, Func::Exp, Func::Sigma, Func::Abs, Func::LogEps];

    pub fn name(self) -> &'static str {
        match self {
            Func::Ln => "ln",
            Func::Exp => "exp",
            Func::Sigma => "sigma",
            Func::Abs => "abs",
            Func::LogEps => "log_eps",
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    pub const ALL: [BinOp; 5] = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Pow];

    pub fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

/// Syntax tree. Literals are finite and non-negative; `Var` indices start at 1.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Eps,
    Var(usize),
    AbsX,
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        Expr::Call(f, Box::new(a))
    }

    pub fn negate(a: Expr) -> Expr {
        Expr::Neg(Box::new(a))
    }

    /// Mentions `x_i` or `|x|`.
    pub fn uses_x(&self) -> bool {
        match self {
            Expr::Var(_) | Expr::AbsX => true,
            Expr::Num(_) | Expr::Eps => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.uses_x(),
            Expr::Bin(_, a, b) => a.uses_x() || b.uses_x(),
        }
    }

    /// Largest variable index used (0 if none).
    pub fn max_var(&self) -> usize {
        match self {
            Expr::Var(i) => *i,
            Expr::Num(_) | Expr::Eps | Expr::AbsX => 0,
            Expr::Neg(a) | Expr::Call(_, a) => a.max_var(),
            Expr::Bin(_, a, b) => a.max_var().max(b.max_var()),
        }
    }

    /// Random well-formed tree of depth at most `depth` over `x1..x_dim`.
    pub fn random(rng: &mut impl Rng, depth: u32, dim: usize) -> Expr {
        if depth == 0 || rng.gen_bool(0.25) {
            return match rng.gen_range(0..5) {
                0 => Expr::Num(random_literal(rng)),
                1 => Expr::Eps,
                2 => Expr::AbsX,
                3 => Expr::Var(rng.gen_range(1..=dim.max(1))),
                _ => Expr::Num(rng.gen_range(0..100) as f64),
            };
        }
        match rng.gen_range(0..4) {
            0 => Expr::negate(Expr::random(rng, depth - 1, dim)),
            1 => Expr::call(
                Func::ALL[rng.gen_range(0..5)],
                Expr::random(rng, depth - 1, dim),
            ),
            _ => Expr::bin(
                BinOp::ALL[rng.gen_range(0..5)],
                Expr::random(rng, depth - 1, dim),
                Expr::random(rng, depth - 1, dim),
            ),
        }
    }
}

fn random_literal(rng: &mut impl Rng) -> f64 {
    let mantissa: f64 = rng.gen_range(0.0..10.0);
    mantissa * 10f64.powi(rng.gen_range(-12..12))
}

/// Canonical, fully parenthesized form: `(a op b)`, `(-a)`, `fn(a)`.
pub fn pretty_print(e: &Expr) -> String {
    e.to_string()
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Eps => f.write_str("eps"),
            Expr::Var(i) => write!(f, "x{i}"),
            Expr::AbsX => f.write_str("|x|"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
            Expr::Bin(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
        }
    }
}

/// Malformed input: byte offset of the offending token and what was expected there.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub offset: usize,
    pub expected: String,
    pub excerpt: String,
}

impl ParseError {
    fn new(src: &str, offset: usize, expected: impl Into<String>) -> Self {
        let offset = offset.min(src.len());
        let end = (offset + 12).min(src.len());
        let end = (end..=src.len())
            .find(|&i| src.is_char_boundary(i))
            .unwrap_or(src.len());
        ParseError {
            offset,
            expected: expected.into(),
            excerpt: src[offset..end].to_string(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.excerpt.is_empty() {
            write!(
                f,
                "at byte {}: expected {}, found end of input",
                self.offset, self.expected
            )
        } else {
            write!(
                f,
                "at byte {}: expected {}, found `{}`",
                self.offset, self.expected, self.excerpt
            )
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    AbsX,
    Sym(char),
    End,
}

fn lex(src: &str) -> std::result::Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit()
            || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit))
        {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
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
                } else {
                    return Err(ParseError::new(src, j, "exponent digits"));
                }
            }
            let v: f64 = src[start..i]
                .parse()
                .map_err(|_| ParseError::new(src, start, "number"))?;
            if !v.is_finite() {
                return Err(ParseError::new(src, start, "finite number"));
            }
            out.push((Tok::Num(v), start));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
        } else if c == b'|' {
            let start = i;
            let mut j = i + 1;
            while j < bytes.len() && bytes[j].is_ascii_whitespace() {
                j += 1;
            }
            if bytes.get(j) != Some(&b'x') {
                return Err(ParseError::new(src, j, "`x` inside `|x|`"));
            }
            j += 1;
            while j < bytes.len() && bytes[j].is_ascii_whitespace() {
                j += 1;
            }
            if bytes.get(j) != Some(&b'|') {
                return Err(ParseError::new(src, j, "closing `|` of `|x|`"));
            }
            i = j + 1;
            out.push((Tok::AbsX, start));
        } else if b"+-*/^(),".contains(&c) {
            out.push((Tok::Sym(c as char), i));
            i += 1;
        } else {
            let ch = src[i..].chars().next().expect("in bounds");
            return Err(ParseError::new(src, i, format!("expression, not `{ch}`")));
        }
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize)>,
    pos: usize,
    dim: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn err(&self, expected: impl Into<String>) -> ParseError {
        ParseError::new(self.src, self.offset(), expected)
    }

    fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Sym(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> std::result::Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(format!("`{c}`")))
        }
    }

    fn expr(&mut self) -> std::result::Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat('+') {
                BinOp::Add
            } else if self.eat('-') {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            lhs = Expr::bin(op, lhs, self.term()?);
        }
    }

    fn term(&mut self) -> std::result::Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = if self.eat('*') {
                BinOp::Mul
            } else if self.eat('/') {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            lhs = Expr::bin(op, lhs, self.factor()?);
        }
    }

    fn factor(&mut self) -> std::result::Result<Expr, ParseError> {
        let base = self.unary()?;
        if self.eat('^') {
            Ok(Expr::bin(BinOp::Pow, base, self.factor()?))
        } else {
            Ok(base)
        }
    }

    fn unary(&mut self) -> std::result::Result<Expr, ParseError> {
        if self.eat('-') {
            Ok(Expr::negate(self.primary()?))
        } else {
            self.primary()
        }
    }

    fn primary(&mut self) -> std::result::Result<Expr, ParseError> {
        let at = self.offset();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Tok::AbsX => {
                self.pos += 1;
                Ok(Expr::AbsX)
            }
            Tok::Sym('(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.pos += 1;
                if name == "eps" {
                    return Ok(Expr::Eps);
                }
                if let Some(f) = Func::from_name(&name) {
                    self.expect('(')?;
                    let e = self.expr()?;
                    self.expect(')')?;
                    return Ok(Expr::call(f, e));
                }
                if let Some(idx) = name.strip_prefix('x') {
                    if !idx.is_empty() && idx.bytes().all(|b| b.is_ascii_digit()) {
                        return match idx.parse::<usize>() {
                            Ok(i) if i >= 1 && i <= self.dim => Ok(Expr::Var(i)),
                            _ => Err(ParseError::new(
                                self.src,
                                at,
                                format!(
                                    "variable index in 1..={} (dimension {})",
                                    self.dim, self.dim
                                ),
                            )),
                        };
                    }
                }
                Err(ParseError::new(
                    self.src,
                    at,
                    format!("known identifier (eps, x1..x{}, ln, exp, sigma, abs, log_eps), not `{name}`", self.dim),
                ))
            }
            _ => Err(self.err("expression")),
        }
    }
}

fn parser(src: &str, dim: usize) -> std::result::Result<Parser<'_>, ParseError> {
    if dim == 0 {
        return Err(ParseError::new(src, 0, "dimension >= 1"));
    }
    Ok(Parser {
        src,
        toks: lex(src)?,
        pos: 0,
        dim,
    })
}

pub fn parse(src: &str, dim: usize) -> std::result::Result<Expr, ParseError> {
    let mut p = parser(src, dim)?;
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.err("operator or end of input"));
    }
    Ok(e)
}

/// Comma-separated list of expressions, e.g. a point spec `eps^-2, 0.5`.
pub fn parse_list(src: &str, dim: usize) -> std::result::Result<Vec<Expr>, ParseError> {
    let mut p = parser(src, dim)?;
    let mut out = vec![p.expr()?];
    while p.eat(',') {
        out.push(p.expr()?);
    }
    if *p.peek() != Tok::End {
        return Err(p.err("`,` or end of input"));
    }
    Ok(out)
}

/// Evaluates in signed-log form over the extended reals: `ln 0 = -inf` and
/// `log_eps 0 = +inf`, so `eps^(log_eps(|x|)^2)` takes its limit 0 at the origin. Negative
/// logarithm arguments and other undefined operations are errors unless an exactly zero
/// factor annihilates them.
pub fn eval<T: Scalar>(e: &Expr, eps: T, x: &[T]) -> std::result::Result<SignedLog<T>, String> {
    Ok(match e {
        Expr::Num(v) => SignedLog::from_value(T::lit(*v)),
        Expr::Eps => SignedLog::from_value(eps),
        Expr::Var(i) => {
            SignedLog::from_value(*x.get(i - 1).ok_or_else(|| format!("x{i} out of range"))?)
        }
        Expr::AbsX => SignedLog::from_value(norm(x)),
        Expr::Neg(a) => -eval(a, eps, x)?,
        Expr::Call(f, a) => {
            let v = eval(a, eps, x)?;
            match f {
                Func::Ln => {
                    if v.is_zero() {
                        return Ok(SignedLog::from_value(T::neg_infinity()));
                    }
                    if !v.is_positive() {
                        return Err(format!("ln of negative value {}", v.to_value()));
                    }
                    v.ln()
                }
                Func::Exp => v.exp(),
                Func::Abs => v.abs(),
                Func::Sigma => {
                    SignedLog::from_value(sigma(v.to_value()).map_err(|e| e.to_string())?)
                }
                Func::LogEps => {
                    if !(eps > T::zero() && eps < T::one()) {
                        return Err(format!("log_eps needs eps in (0,1), got {eps}"));
                    }
                    if v.is_zero() {
                        return Ok(SignedLog::from_value(T::infinity()));
                    }
                    if !v.is_positive() {
                        return Err(format!("log_eps of negative value {}", v.to_value()));
                    }
                    SignedLog::from_value(v.ln_abs() / eps.ln())
                }
            }
        }
        Expr::Bin(BinOp::Mul, a, b) => {
            // An exactly zero factor annihilates the product even where the other factor is
            // undefined, as the cutoff `1 - sigma` does for `ln|x|` terms at the origin.
            match (eval(a, eps, x), eval(b, eps, x)) {
                (Ok(a), _) if a.is_zero() => a,
                (_, Ok(b)) if b.is_zero() => b,
                (a, b) => a? * b?,
            }
        }
        Expr::Bin(op, a, b) => {
            let (a, b) = (eval(a, eps, x)?, eval(b, eps, x)?);
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => unreachable!("handled above"),
                BinOp::Div => {
                    if b.is_zero() {
                        return Err("division by zero".into());
                    }
                    a / b
                }
                BinOp::Pow => {
                    let r = a.powf(b.to_value());
                    if r.is_nan() {
                        return Err(format!("power {}^{} undefined", a.to_value(), b.to_value()));
                    }
                    r
                }
            }
        }
    })
}

/// A compiled expression.
#[derive(Clone, Debug)]
pub enum Compiled<T> {
    Scalar(ScalarNet<T>),
    Function(FunctionNet<T>),
}

/// Compiles to a pure net; evaluation failures surface as NaN values, which the
/// classifiers report as evaluation errors carrying `(eps, x)`.
pub fn compile<T: Scalar>(e: &Expr, dim: usize) -> Result<Compiled<T>> {
    compile_on(e, OpenBox::whole_space(dim))
}

/// As [`compile`], with the function net living on `domain`.
pub fn compile_on<T: Scalar>(e: &Expr, domain: OpenBox<T>) -> Result<Compiled<T>> {
    if e.max_var() > domain.dim() {
        return Err(Error::Domain(format!(
            "x{} exceeds dimension {}",
            e.max_var(),
            domain.dim()
        )));
    }
    let label = pretty_print(e);
    let tree = Arc::new(e.clone());
    if e.uses_x() {
        Ok(Compiled::Function(FunctionNet::from_log(
            label,
            domain,
            move |eps, x| eval(&tree, eps, x).unwrap_or_else(|_| SignedLog::nan()),
        )))
    } else {
        Ok(Compiled::Scalar(ScalarNet::from_log(label, move |eps| {
            eval(&tree, eps, &[]).unwrap_or_else(|_| SignedLog::nan())
        })))
    }
}

impl<T: Scalar> Compiled<T> {
    /// Function view; a scalar net becomes constant in `x`.
    pub fn into_function(self, domain: OpenBox<T>) -> FunctionNet<T> {
        match self {
            Compiled::Function(f) => f,
            Compiled::Scalar(s) => {
                let label = s.label().to_string();
                FunctionNet::from_log(label, domain, move |eps, _| s.eval_log(eps))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counterexample::u_eps_log;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn precedence_golden() {
        let e = parse("a", 1);
        assert!(e.is_err());
        let e = parse("1 + 2 * 3 ^ 4", 1).unwrap();
        assert_eq!(pretty_print(&e), "(1.0 + (2.0 * (3.0 ^ 4.0)))");
        let e = parse("eps + x1 * |x| ^ 2", 1).unwrap();
        assert_eq!(pretty_print(&e), "(eps + (x1 * (|x| ^ 2.0)))");
        assert_eq!(
            pretty_print(&parse("2^3^2", 1).unwrap()),
            "(2.0 ^ (3.0 ^ 2.0))"
        );
        assert_eq!(pretty_print(&parse("-2^2", 1).unwrap()), "((-2.0) ^ 2.0)");
        assert_eq!(
            pretty_print(&parse("1 - 2 - 3", 1).unwrap()),
            "((1.0 - 2.0) - 3.0)"
        );
        assert_eq!(pretty_print(&parse("eps^-2", 1).unwrap()), "(eps ^ (-2.0))");
        assert_eq!(
            pretty_print(&parse("1.5e-3 * log_eps( | x | )", 2).unwrap()),
            "(0.0015 * log_eps(|x|))"
        );
    }

    #[test]
    fn parse_error_golden() {
        let e = parse("eps^(", 1).unwrap_err();
        assert_eq!((e.offset, e.expected.as_str()), (5, "expression"));
        let e = parse("x3", 2).unwrap_err();
        assert_eq!(e.offset, 0);
        assert!(e.expected.contains("variable index"));
        let e = parse("foo(1)", 1).unwrap_err();
        assert!(e.expected.contains("known identifier") && e.offset == 0);
        let e = parse("(1 + 2", 1).unwrap_err();
        assert_eq!((e.offset, e.expected.as_str()), (6, "`)`"));
        let e = parse("1 2", 1).unwrap_err();
        assert_eq!(e.offset, 2);
        let e = parse("1e+", 1).unwrap_err();
        assert_eq!(e.offset, 3);
        let e = parse("ln 2", 1).unwrap_err();
        assert_eq!((e.offset, e.expected.as_str()), (3, "`(`"));
        let e = parse("|y|", 1).unwrap_err();
        assert_eq!(e.offset, 1);
        let e = parse("", 1).unwrap_err();
        assert_eq!(e.offset, 0);
        let e = parse("2 $ 3", 1).unwrap_err();
        assert_eq!(e.offset, 2);
        assert!(e.to_string().contains("byte 2"));
    }

    #[test]
    fn list_parsing() {
        let v = parse_list("eps^-2, 0.5", 2).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v[1], Expr::Num(0.5));
        assert!(parse_list("1,", 1).is_err());
    }

    #[test]
    fn compile_examples() {
        let Compiled::Scalar(s) = compile::<f64>(&parse("eps", 1).unwrap(), 1).unwrap() else {
            panic!("scalar expected")
        };
        assert_eq!(s.eval(0.125), 0.125);
        let Compiled::Function(f) = compile::<f64>(&parse("|x|^2", 2).unwrap(), 2).unwrap() else {
            panic!("function expected")
        };
        assert_eq!(f.eval(0.5, &[3.0, 4.0]), 25.0);
        let Compiled::Function(f) = compile::<f64>(&parse("log_eps(x1)", 1).unwrap(), 1).unwrap()
        else {
            panic!()
        };
        assert!(f.eval_log(0.5, &[-1.0]).is_nan());
        assert!(compile::<f64>(&Expr::Var(3), 2).is_err());
    }

    #[test]
    fn counterexample_expression_matches() {
        let src = "(1 - sigma(|x|)) * eps^(log_eps(|x|)^2) + sigma(|x|)";
        let e = parse(src, 2).unwrap();
        let f = compile::<f64>(&e, 2)
            .unwrap()
            .into_function(OpenBox::whole_space(2));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let eps = 2f64.powf(-rng.gen_range(1.5..40.0));
            let r = (rng.gen_range(-1.0..6.0) * -eps.ln()).exp();
            let x = [r * 0.6, r * 0.8];
            let (a, b) = (f.eval_log(eps, &x), u_eps_log(eps, &x));
            assert!(
                (a.ln_abs() - b.ln_abs()).abs() < 1e-12,
                "eps {eps} r {r}: {a:?} {b:?}"
            );
        }
        assert_eq!(f.eval(0.01, &[0.0, 0.0]), 1.0);
    }

    #[test]
    fn extended_logs_and_zero_factors() {
        let at_origin = |src: &str| eval::<f64>(&parse(src, 1).unwrap(), 0.5, &[0.0]);
        assert_eq!(at_origin("log_eps(|x|)").unwrap().to_value(), f64::INFINITY);
        assert!(at_origin("eps^(log_eps(|x|)^2)").unwrap().is_zero());
        assert!(at_origin("ln(x1 - 1)").is_err());
        assert!(at_origin("0 * ln(x1 - 1)").unwrap().is_zero());
        assert!(at_origin("ln(x1 - 1) * x1").unwrap().is_zero());
        assert!(at_origin("1 + ln(x1 - 1)").is_err());
    }

    #[test]
    fn random_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let e = Expr::random(&mut rng, 5, 3);
            let printed = pretty_print(&e);
            assert_eq!(parse(&printed, 3).unwrap(), e, "{printed}");
        }
    }
}
