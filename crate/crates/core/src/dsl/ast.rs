use std::fmt;

use crate::error::{Error, Result};
use crate::padic::{check_prime, PAdicInt, PAdicVec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Xor,
    And,
    Or,
}

impl BinOp {
    pub fn is_bitwise(self) -> bool {
        matches!(self, BinOp::Xor | BinOp::And | BinOp::Or)
    }

    pub(crate) fn precedence(self) -> u8 {
        match self {
            BinOp::Xor | BinOp::And | BinOp::Or => 1,
            BinOp::Add | BinOp::Sub => 2,
            BinOp::Mul => 3,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Xor => "xor",
            BinOp::And => "and",
            BinOp::Or => "or",
        }
    }
}

const NOT_PRECEDENCE: u8 = 4;
const ATOM_PRECEDENCE: u8 = 5;

/// Expression over the coordinates `x0..x{k-1}`. Every node denotes a
/// 1-Lipschitz function, so any tree built from these nodes does too.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    /// Non-negative literal, read modulo `p^n` at evaluation time.
    Const(u128),
    Var(usize),
    Not(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Self {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn complement(e: Expr) -> Self {
        Expr::Not(Box::new(e))
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Const(_) | Expr::Var(_) => ATOM_PRECEDENCE,
            Expr::Not(_) => NOT_PRECEDENCE,
            Expr::Binary(op, ..) => op.precedence(),
        }
    }

    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Not(e) => e.max_var(),
            Expr::Binary(_, l, r) => l.max_var().max(r.max_var()),
        }
    }

    pub fn uses_bitwise(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Var(_) => false,
            Expr::Not(_) => true,
            Expr::Binary(op, l, r) => op.is_bitwise() || l.uses_bitwise() || r.uses_bitwise(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 0,
            Expr::Not(e) => 1 + e.depth(),
            Expr::Binary(_, l, r) => 1 + l.depth().max(r.depth()),
        }
    }

    /// Evaluates with every variable at the same precision `n`.
    pub fn eval(&self, vars: &[PAdicInt], p: u32, n: usize) -> Result<PAdicInt> {
        match self {
            Expr::Const(c) => PAdicInt::from_u128(p, n, *c),
            Expr::Var(i) => vars.get(*i).cloned().ok_or(Error::ArityMismatch {
                expected: i + 1,
                found: vars.len(),
            }),
            Expr::Not(e) => e.eval(vars, p, n)?.not(),
            Expr::Binary(op, l, r) => {
                let a = l.eval(vars, p, n)?;
                let b = r.eval(vars, p, n)?;
                match op {
                    BinOp::Add => a.add(&b),
                    BinOp::Sub => a.sub(&b),
                    BinOp::Mul => a.mul(&b),
                    BinOp::Xor => a.xor(&b),
                    BinOp::And => a.and(&b),
                    BinOp::Or => a.or(&b),
                }
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(i) => write!(f, "x{i}"),
            Expr::Not(e) => {
                if e.precedence() < NOT_PRECEDENCE {
                    write!(f, "not ({e})")
                } else {
                    write!(f, "not {e}")
                }
            }
            Expr::Binary(op, l, r) => {
                let prec = op.precedence();
                if l.precedence() < prec {
                    write!(f, "({l})")?;
                } else {
                    write!(f, "{l}")?;
                }
                write!(f, " {} ", op.symbol())?;
                // Left-associative: an equal-precedence right operand needs parentheses.
                if r.precedence() <= prec {
                    write!(f, "({r})")
                } else {
                    write!(f, "{r}")
                }
            }
        }
    }
}

/// A T-function `F(x) = (e_0(x), ..., e_{k-1}(x))` on `Z_p^k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MapSpec {
    p: u32,
    coords: Vec<Expr>,
}

impl MapSpec {
    pub fn new(p: u32, coords: Vec<Expr>) -> Result<Self> {
        check_prime(p)?;
        let k = coords.len();
        if k == 0 {
            return Err(Error::EmptyVector);
        }
        for e in &coords {
            if let Some(v) = e.max_var() {
                if v >= k {
                    return Err(Error::ArityMismatch {
                        expected: k,
                        found: v + 1,
                    });
                }
            }
            if p != 2 && e.uses_bitwise() {
                return Err(Error::BitwiseRequiresBinary(p));
            }
        }
        Ok(Self { p, coords })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn k(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Expr] {
        &self.coords
    }

    /// `F(x) mod p^n`; `x` may carry more than `n` digits.
    pub fn evaluate(&self, x: &PAdicVec, n: usize) -> Result<PAdicVec> {
        if x.p() != self.p {
            return Err(Error::Mismatch {
                left_p: self.p,
                left_n: n,
                right_p: x.p(),
                right_n: x.precision(),
            });
        }
        if x.arity() != self.k() {
            return Err(Error::ArityMismatch {
                expected: self.k(),
                found: x.arity(),
            });
        }
        let x = x.reduce(n)?;
        let comps = self
            .coords
            .iter()
            .map(|e| e.eval(x.components(), self.p, n))
            .collect::<Result<Vec<_>>>()?;
        PAdicVec::new(comps)
    }
}

impl fmt::Display for MapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p={} k={};", self.p, self.k())?;
        for (i, e) in self.coords.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, " f{i} = {e}")?;
        }
        Ok(())
    }
}
