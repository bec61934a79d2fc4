//! Arithmetic expressions over the variables `r`, `w`, `t`, `u`.
//!
//! Grammar (usual precedence, `^` binds tightest and is right-associative):
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := integer | var | func '(' expr (',' expr)* ')' | '(' expr ')'
//! func  := ceil | floor | log2 | max | min
//! ```
//!
//! Evaluation is exact over rationals. `log2(x)` is exact when `x` is a power
//! of two; otherwise it yields a symbolic value that must be passed straight
//! to `ceil` or `floor`. Exponents must be integers.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

const MAX_EXPONENT: i64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier {name:?} at position {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("variable {0} is not bound here")]
    Unbound(Var),
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} is irrational; wrap it in ceil() or floor()")]
    Irrational(String),
    #[error("exponent {0} is not an integer")]
    NonIntegerExponent(String),
    #[error("exponent {0} is too large")]
    ExponentTooLarge(String),
    #[error("log2 of non-positive value {0}")]
    LogOfNonPositive(String),
    #[error("{func} expects {expected} argument(s), got {got}")]
    Arity {
        func: &'static str,
        expected: &'static str,
        got: usize,
    },
    #[error("{what} = {value} is not an integer")]
    NotInteger { what: String, value: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    R,
    W,
    T,
    U,
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Var::R => "r",
            Var::W => "w",
            Var::T => "t",
            Var::U => "u",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Ceil,
    Floor,
    Log2,
    Max,
    Min,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Ceil => "ceil",
            Func::Floor => "floor",
            Func::Log2 => "log2",
            Func::Max => "max",
            Func::Min => "min",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Int(BigInt),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

/// Variable bindings for evaluation.
#[derive(Debug, Clone, Default)]
pub struct Env {
    r: Option<BigRational>,
    w: Option<BigRational>,
    t: Option<BigRational>,
    u: Option<BigRational>,
}

impl Env {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, var: Var, value: impl Into<BigRational>) -> Self {
        let slot = match var {
            Var::R => &mut self.r,
            Var::W => &mut self.w,
            Var::T => &mut self.t,
            Var::U => &mut self.u,
        };
        *slot = Some(value.into());
        self
    }

    pub fn with_int(self, var: Var, value: u64) -> Self {
        self.with(var, BigRational::from_integer(BigInt::from(value)))
    }

    fn get(&self, var: Var) -> Result<&BigRational, ExprError> {
        match var {
            Var::R => self.r.as_ref(),
            Var::W => self.w.as_ref(),
            Var::T => self.t.as_ref(),
            Var::U => self.u.as_ref(),
        }
        .ok_or(ExprError::Unbound(var))
    }
}

#[derive(Debug, Clone)]
enum Value {
    Exact(BigRational),
    /// `log2(x)` for a positive `x` that is not a power of two.
    Log2(BigRational),
}

impl Value {
    fn exact(self) -> Result<BigRational, ExprError> {
        match self {
            Value::Exact(q) => Ok(q),
            Value::Log2(x) => Err(ExprError::Irrational(format!("log2({x})"))),
        }
    }
}

impl Expr {
    pub fn parse(text: &str) -> Result<Expr, ExprError> {
        let tokens = tokenize(text)?;
        let mut p = Parser { tokens, pos: 0 };
        let e = p.expr()?;
        match p.peek() {
            None => Ok(e),
            Some((pos, tok)) => Err(ExprError::Syntax {
                pos,
                msg: format!("unexpected {tok}"),
            }),
        }
    }

    pub fn eval(&self, env: &Env) -> Result<BigRational, ExprError> {
        self.value(env)?.exact()
    }

    /// Evaluates and requires an integral result.
    pub fn eval_integer(&self, env: &Env, what: &str) -> Result<BigInt, ExprError> {
        let q = self.eval(env)?;
        if q.is_integer() {
            Ok(q.to_integer())
        } else {
            Err(ExprError::NotInteger {
                what: what.to_string(),
                value: q.to_string(),
            })
        }
    }

    fn value(&self, env: &Env) -> Result<Value, ExprError> {
        Ok(match self {
            Expr::Int(i) => Value::Exact(BigRational::from_integer(i.clone())),
            Expr::Var(v) => Value::Exact(env.get(*v)?.clone()),
            Expr::Neg(e) => Value::Exact(-e.value(env)?.exact()?),
            Expr::Bin(op, a, b) => {
                let a = a.value(env)?.exact()?;
                let b = b.value(env)?.exact()?;
                Value::Exact(match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b.is_zero() {
                            return Err(ExprError::DivisionByZero);
                        }
                        a / b
                    }
                    BinOp::Pow => pow(a, b)?,
                })
            }
            Expr::Call(func, args) => call(*func, args, env)?,
        })
    }
}

fn pow(base: BigRational, exp: BigRational) -> Result<BigRational, ExprError> {
    if !exp.is_integer() {
        return Err(ExprError::NonIntegerExponent(exp.to_string()));
    }
    let e = exp
        .to_integer()
        .to_i64()
        .filter(|e| e.abs() <= MAX_EXPONENT)
        .ok_or_else(|| ExprError::ExponentTooLarge(exp.to_string()))?;
    if e < 0 && base.is_zero() {
        return Err(ExprError::DivisionByZero);
    }
    let mag = num_traits::pow(base, e.unsigned_abs() as usize);
    Ok(if e < 0 { mag.recip() } else { mag })
}

fn call(func: Func, args: &[Expr], env: &Env) -> Result<Value, ExprError> {
    let arity = |expected: &'static str, ok: bool| {
        if ok {
            Ok(())
        } else {
            Err(ExprError::Arity {
                func: func.name(),
                expected,
                got: args.len(),
            })
        }
    };
    match func {
        Func::Ceil | Func::Floor => {
            arity("1", args.len() == 1)?;
            let up = func == Func::Ceil;
            let out = match args[0].value(env)? {
                Value::Exact(q) => {
                    if up {
                        q.ceil()
                    } else {
                        q.floor()
                    }
                }
                Value::Log2(x) => BigRational::from_integer(BigInt::from(if up {
                    ceil_log2(&x)
                } else {
                    floor_log2(&x)
                })),
            };
            Ok(Value::Exact(out))
        }
        Func::Log2 => {
            arity("1", args.len() == 1)?;
            let x = args[0].value(env)?.exact()?;
            if !x.is_positive() {
                return Err(ExprError::LogOfNonPositive(x.to_string()));
            }
            let lo = floor_log2(&x);
            if power_of_two(lo) == x {
                Ok(Value::Exact(BigRational::from_integer(BigInt::from(lo))))
            } else {
                Ok(Value::Log2(x))
            }
        }
        Func::Max | Func::Min => {
            arity("at least 1", !args.is_empty())?;
            let mut best: Option<BigRational> = None;
            for a in args {
                let v = a.value(env)?.exact()?;
                best = Some(match best {
                    None => v,
                    Some(b) => {
                        let keep_b = match func {
                            Func::Max => b >= v,
                            _ => b <= v,
                        };
                        if keep_b {
                            b
                        } else {
                            v
                        }
                    }
                });
            }
            Ok(Value::Exact(best.expect("non-empty")))
        }
    }
}

fn power_of_two(k: i64) -> BigRational {
    let p = BigRational::from_integer(BigInt::one() << k.unsigned_abs());
    if k < 0 {
        p.recip()
    } else {
        p
    }
}

/// Compares `2^k` with `x`.
fn cmp_pow2(k: i64, x: &BigRational) -> Ordering {
    power_of_two(k).cmp(x)
}

/// Largest integer `k` with `2^k <= x`, for `x > 0`.
pub fn floor_log2(x: &BigRational) -> i64 {
    assert!(x.is_positive());
    let (p, q) = (x.numer(), x.denom());
    let mut k = p.bits() as i64 - q.bits() as i64;
    while cmp_pow2(k, x) == Ordering::Greater {
        k -= 1;
    }
    while cmp_pow2(k + 1, x) != Ordering::Greater {
        k += 1;
    }
    k
}

/// Smallest integer `k` with `2^k >= x`, for `x > 0`.
pub fn ceil_log2(x: &BigRational) -> i64 {
    let k = floor_log2(x);
    if cmp_pow2(k, x) == Ordering::Equal {
        k
    } else {
        k + 1
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Int(i) => write!(f, "{i}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Neg(e) => write!(f, "-({e})"),
            Expr::Bin(op, a, b) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({a} {sym} {b})")
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Int(BigInt),
    Ident(String),
    Op(char),
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Int(i) => write!(f, "number {i}"),
            Token::Ident(s) => write!(f, "identifier {s:?}"),
            Token::Op(c) => write!(f, "{c:?}"),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, ExprError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            let value = digits.parse::<BigInt>().expect("ascii digits");
            out.push((start, Token::Int(value)));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((start, Token::Ident(chars[start..i].iter().collect())));
        } else if "+-*/^(),".contains(c) {
            out.push((i, Token::Op(c)));
            i += 1;
        } else if c == '\u{2212}' {
            out.push((i, Token::Op('-')));
            i += 1;
        } else {
            return Err(ExprError::Syntax {
                pos: i,
                msg: format!("unexpected character {c:?}"),
            });
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<(usize, &Token)> {
        self.tokens.get(self.pos).map(|(p, t)| (*p, t))
    }

    fn end_pos(&self) -> usize {
        self.tokens.last().map_or(0, |(p, _)| p + 1)
    }

    fn eat(&mut self, op: char) -> bool {
        if matches!(self.peek(), Some((_, Token::Op(c))) if *c == op) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, op: char) -> Result<(), ExprError> {
        if self.eat(op) {
            return Ok(());
        }
        let (pos, msg) = match self.peek() {
            Some((p, tok)) => (p, format!("expected {op:?}, found {tok}")),
            None => (
                self.end_pos(),
                format!("expected {op:?}, found end of input"),
            ),
        };
        Err(ExprError::Syntax { pos, msg })
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
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

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat('*') {
                BinOp::Mul
            } else if self.eat('/') {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        let base = self.atom()?;
        if self.eat('^') {
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let Some((pos, tok)) = self.peek() else {
            return Err(ExprError::Syntax {
                pos: self.end_pos(),
                msg: "unexpected end of input".into(),
            });
        };
        let tok = tok.clone();
        self.pos += 1;
        match tok {
            Token::Int(i) => Ok(Expr::Int(i)),
            Token::Op('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Token::Ident(name) => {
                let var = match name.as_str() {
                    "r" => Some(Var::R),
                    "w" => Some(Var::W),
                    "t" => Some(Var::T),
                    "u" => Some(Var::U),
                    _ => None,
                };
                if let Some(v) = var {
                    return Ok(Expr::Var(v));
                }
                let func = match name.as_str() {
                    "ceil" => Func::Ceil,
                    "floor" => Func::Floor,
                    "log2" => Func::Log2,
                    "max" => Func::Max,
                    "min" => Func::Min,
                    _ => return Err(ExprError::UnknownIdentifier { name, pos }),
                };
                self.expect('(')?;
                let mut args = vec![self.expr()?];
                while self.eat(',') {
                    args.push(self.expr()?);
                }
                self.expect(')')?;
                Ok(Expr::Call(func, args))
            }
            Token::Op(c) => Err(ExprError::Syntax {
                pos,
                msg: format!("unexpected {c:?}"),
            }),
        }
    }
}

/// Integer value of a rational, if it is one.
pub(crate) fn as_integer(q: &BigRational) -> Option<BigInt> {
    q.is_integer().then(|| q.to_integer())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }

    fn env(pairs: &[(Var, u64)]) -> Env {
        pairs.iter().fold(Env::new(), |e, &(v, x)| e.with_int(v, x))
    }

    #[test]
    fn goppa_length_constraint() {
        let e = Expr::parse("2^(r/w)").unwrap();
        assert_eq!(e.eval(&env(&[(Var::R, 12), (Var::W, 3)])).unwrap(), int(16));
    }

    #[test]
    fn goppa_redundancy() {
        let e = Expr::parse("t*ceil(log2(u))").unwrap();
        assert_eq!(e.eval(&env(&[(Var::T, 3), (Var::U, 9)])).unwrap(), int(12));
        let pad = Expr::parse("t*(ceil(log2(u)) - 3)").unwrap();
        assert_eq!(pad.eval(&env(&[(Var::T, 3), (Var::U, 9)])).unwrap(), int(3));
    }

    #[test]
    fn exact_logs_and_rounding() {
        let e = Expr::parse("log2(u)").unwrap();
        assert_eq!(e.eval(&env(&[(Var::U, 64)])).unwrap(), int(6));
        assert!(matches!(
            e.eval(&env(&[(Var::U, 9)])),
            Err(ExprError::Irrational(_))
        ));
        let f = Expr::parse("floor(log2(u))").unwrap();
        assert_eq!(f.eval(&env(&[(Var::U, 9)])).unwrap(), int(3));
        assert_eq!(f.eval(&env(&[(Var::U, 8)])).unwrap(), int(3));
        let c = Expr::parse("ceil(log2(u))").unwrap();
        assert_eq!(c.eval(&env(&[(Var::U, 8)])).unwrap(), int(3));
        assert_eq!(c.eval(&env(&[(Var::U, 1)])).unwrap(), int(0));
        let half = Expr::parse("log2(1/8)").unwrap();
        assert_eq!(half.eval(&Env::new()).unwrap(), int(-3));
        assert_eq!(
            Expr::parse("ceil(log2(3/8))")
                .unwrap()
                .eval(&Env::new())
                .unwrap(),
            int(-1)
        );
        assert_eq!(
            Expr::parse("ceil(7/2) + floor(-7/2)")
                .unwrap()
                .eval(&Env::new())
                .unwrap(),
            int(0)
        );
    }

    #[test]
    fn precedence_and_associativity() {
        let ev = |s: &str| Expr::parse(s).unwrap().eval(&Env::new()).unwrap();
        assert_eq!(ev("2+3*4"), int(14));
        assert_eq!(ev("2^3^2"), int(512));
        assert_eq!(ev("-2^2"), int(-4));
        assert_eq!(ev("2^-1"), BigRational::new(1.into(), 2.into()));
        assert_eq!(ev("10-4-3"), int(3));
        assert_eq!(ev("max(1, 7, 3) - min(4, 2)"), int(5));
        assert_eq!(ev("12/8*2"), int(3));
    }

    #[test]
    fn errors() {
        assert!(matches!(
            Expr::parse("2 + * 3"),
            Err(ExprError::Syntax { pos: 4, .. })
        ));
        assert!(matches!(
            Expr::parse("x + 1"),
            Err(ExprError::UnknownIdentifier { pos: 0, .. })
        ));
        assert!(matches!(
            Expr::parse("(1 + 2"),
            Err(ExprError::Syntax { .. })
        ));
        assert!(matches!(
            Expr::parse("1 $ 2"),
            Err(ExprError::Syntax { pos: 2, .. })
        ));
        let ev = |s: &str| Expr::parse(s).unwrap().eval(&Env::new());
        assert_eq!(ev("1/0"), Err(ExprError::DivisionByZero));
        assert!(matches!(
            ev("2^(1/2)"),
            Err(ExprError::NonIntegerExponent(_))
        ));
        assert!(matches!(ev("log2(0)"), Err(ExprError::LogOfNonPositive(_))));
        assert!(matches!(ev("ceil(1, 2)"), Err(ExprError::Arity { .. })));
        assert!(matches!(
            ev("2^100000"),
            Err(ExprError::ExponentTooLarge(_))
        ));
        assert_eq!(
            Expr::parse("t").unwrap().eval(&Env::new()),
            Err(ExprError::Unbound(Var::T))
        );
        assert!(matches!(
            Expr::parse("7/2").unwrap().eval_integer(&Env::new(), "n"),
            Err(ExprError::NotInteger { .. })
        ));
    }

    #[test]
    fn display_reparses_to_same_tree() {
        for src in ["2^(r/w)", "t*ceil(log2(u)) - 3", "-max(t, u)/2", "2^3^2"] {
            let e = Expr::parse(src).unwrap();
            assert_eq!(Expr::parse(&e.to_string()).unwrap(), e);
        }
    }

    #[test]
    fn log2_bounds_are_tight() {
        for n in 1u64..200 {
            let x = int(n as i64);
            let lo = floor_log2(&x);
            let hi = ceil_log2(&x);
            assert!(1u64 << lo <= n && n < 1u64 << (lo + 1));
            assert!(1u64 << hi >= n && (hi == 0 || 1u64 << (hi - 1) < n));
        }
    }
}
