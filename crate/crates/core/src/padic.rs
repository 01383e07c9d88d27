//! Truncated p-adic integers and their cartesian powers.
//!
//! A [`PAdicInt`] is an element of `Z/p^n Z` stored as its base-p expansion
//! `a_0 + a_1 p + ... + a_{n-1} p^{n-1}`, least-significant digit first, so
//! reduction modulo `p^m` is taking a prefix. A [`PAdicVec`] is a k-tuple of
//! such values sharing `p` and `n`, i.e. an element of `(Z/p^n Z)^k`.
//!
//! Every value carries its own precision. Binary operations require both
//! operands to agree on `p` and precision and report a [`Error::Mismatch`]
//! otherwise.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest modulus supported; digits are stored as bytes.
pub const MAX_PRIME: u32 = 251;

pub fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) fn check_prime(p: u32) -> Result<()> {
    if p <= MAX_PRIME && is_prime(p) {
        Ok(())
    } else {
        Err(Error::InvalidPrime(p))
    }
}

/// `p^e` if it fits in a `u64`.
pub fn checked_pow(p: u32, e: usize) -> Option<u64> {
    let e = u32::try_from(e).ok()?;
    (p as u64).checked_pow(e)
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PAdicInt {
    p: u32,
    digits: Vec<u8>,
}

impl PAdicInt {
    pub fn new(p: u32, digits: Vec<u8>) -> Result<Self> {
        check_prime(p)?;
        if digits.is_empty() {
            return Err(Error::ZeroPrecision);
        }
        if let Some(&d) = digits.iter().find(|&&d| d as u32 >= p) {
            return Err(Error::DigitOutOfRange { digit: d as u32, p });
        }
        Ok(Self { p, digits })
    }

    pub fn zero(p: u32, precision: usize) -> Result<Self> {
        Self::new(p, vec![0; precision])
    }

    /// The residue of `value` modulo `p^precision`.
    pub fn from_u128(p: u32, precision: usize, mut value: u128) -> Result<Self> {
        check_prime(p)?;
        if precision == 0 {
            return Err(Error::ZeroPrecision);
        }
        let base = p as u128;
        let digits = (0..precision)
            .map(|_| {
                let d = (value % base) as u8;
                value /= base;
                d
            })
            .collect();
        Ok(Self { p, digits })
    }

    pub fn from_u64(p: u32, precision: usize, value: u64) -> Result<Self> {
        Self::from_u128(p, precision, value as u128)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn precision(&self) -> usize {
        self.digits.len()
    }

    /// Digits, least-significant first.
    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    pub fn digit(&self, i: usize) -> u8 {
        self.digits[i]
    }

    /// The represented residue, or `None` when `p^n` does not fit in a `u64`.
    pub fn to_u64(&self) -> Option<u64> {
        let mut acc: u64 = 0;
        for &d in self.digits.iter().rev() {
            acc = acc.checked_mul(self.p as u64)?.checked_add(d as u64)?;
        }
        Some(acc)
    }

    pub fn is_zero(&self) -> bool {
        self.digits.iter().all(|&d| d == 0)
    }

    /// Index of the lowest non-zero digit, or the precision for zero.
    pub fn valuation(&self) -> usize {
        self.digits
            .iter()
            .position(|&d| d != 0)
            .unwrap_or(self.digits.len())
    }

    fn check_same_ring(&self, other: &Self) -> Result<()> {
        if self.p != other.p || self.precision() != other.precision() {
            return Err(Error::Mismatch {
                left_p: self.p,
                left_n: self.precision(),
                right_p: other.p,
                right_n: other.precision(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_ring(other)?;
        let p = self.p;
        let mut carry = 0u32;
        let digits = self
            .digits
            .iter()
            .zip(&other.digits)
            .map(|(&a, &b)| {
                let t = a as u32 + b as u32 + carry;
                carry = t / p;
                (t % p) as u8
            })
            .collect();
        Ok(Self { p, digits })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_ring(other)?;
        let p = self.p as i32;
        let mut borrow = 0i32;
        let digits = self
            .digits
            .iter()
            .zip(&other.digits)
            .map(|(&a, &b)| {
                let mut t = a as i32 - b as i32 - borrow;
                borrow = 0;
                if t < 0 {
                    t += p;
                    borrow = 1;
                }
                t as u8
            })
            .collect();
        Ok(Self { p: self.p, digits })
    }

    pub fn neg(&self) -> Self {
        let zero = Self {
            p: self.p,
            digits: vec![0; self.precision()],
        };
        zero.sub(self).expect("same ring")
    }

    /// Schoolbook product truncated to the common precision.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_ring(other)?;
        let p = self.p;
        let n = self.precision();
        let mut acc = vec![0u32; n];
        for (i, &a) in self.digits.iter().enumerate() {
            if a == 0 {
                continue;
            }
            let mut carry = 0u32;
            for (j, &b) in other.digits[..n - i].iter().enumerate() {
                let t = acc[i + j] + a as u32 * b as u32 + carry;
                acc[i + j] = t % p;
                carry = t / p;
            }
        }
        Ok(Self {
            p,
            digits: acc.into_iter().map(|d| d as u8).collect(),
        })
    }

    fn bitwise(&self, other: &Self, op: impl Fn(u8, u8) -> u8) -> Result<Self> {
        if self.p != 2 {
            return Err(Error::BitwiseRequiresBinary(self.p));
        }
        self.check_same_ring(other)?;
        let digits = self
            .digits
            .iter()
            .zip(&other.digits)
            .map(|(&a, &b)| op(a, b))
            .collect();
        Ok(Self { p: 2, digits })
    }

    pub fn xor(&self, other: &Self) -> Result<Self> {
        self.bitwise(other, |a, b| a ^ b)
    }

    pub fn and(&self, other: &Self) -> Result<Self> {
        self.bitwise(other, |a, b| a & b)
    }

    pub fn or(&self, other: &Self) -> Result<Self> {
        self.bitwise(other, |a, b| a | b)
    }

    pub fn not(&self) -> Result<Self> {
        if self.p != 2 {
            return Err(Error::BitwiseRequiresBinary(self.p));
        }
        Ok(Self {
            p: 2,
            digits: self.digits.iter().map(|&d| d ^ 1).collect(),
        })
    }

    /// Reduction modulo `p^m`: keeps the `m` low digits.
    pub fn reduce(&self, m: usize) -> Result<Self> {
        if m == 0 || m > self.precision() {
            return Err(Error::BadPrecision {
                from: self.precision(),
                to: m,
            });
        }
        Ok(Self {
            p: self.p,
            digits: self.digits[..m].to_vec(),
        })
    }

    /// Zero-pads to precision `m >= n`; the canonical lift of a residue.
    pub fn extend(&self, m: usize) -> Result<Self> {
        if m < self.precision() {
            return Err(Error::BadPrecision {
                from: self.precision(),
                to: m,
            });
        }
        let mut digits = self.digits.clone();
        digits.resize(m, 0);
        Ok(Self { p: self.p, digits })
    }

    /// Reduce or zero-pad to exactly `m` digits.
    pub(crate) fn resize(&self, m: usize) -> Self {
        let mut digits = self.digits.clone();
        digits.resize(m, 0);
        Self { p: self.p, digits }
    }

    /// Exponent `v` with `|self - other|_p = p^{-v}`; equals the precision
    /// when the operands agree on every digit.
    pub fn distance(&self, other: &Self) -> Result<usize> {
        self.check_same_ring(other)?;
        Ok(self
            .digits
            .iter()
            .zip(&other.digits)
            .position(|(a, b)| a != b)
            .unwrap_or(self.precision()))
    }
}

impl fmt::Display for PAdicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}:", self.p, self.precision())?;
        if self.p <= 10 {
            for d in self.digits.iter().rev() {
                write!(f, "{d}")?;
            }
        } else {
            for (i, d) in self.digits.iter().rev().enumerate() {
                if i > 0 {
                    f.write_str(".")?;
                }
                write!(f, "{d}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for PAdicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for PAdicInt {
    type Err = Error;

    /// Parses `p^n:digits`, most-significant digit first.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Syntax(format!("expected `p^n:digits`, found `{s}`"));
        let (head, body) = s.trim().split_once(':').ok_or_else(bad)?;
        let (p, n) = head.split_once('^').ok_or_else(bad)?;
        let p: u32 = p.trim().parse().map_err(|_| bad())?;
        let n: usize = n.trim().parse().map_err(|_| bad())?;
        check_prime(p)?;
        let mut digits: Vec<u8> = if p <= 10 {
            body.trim()
                .chars()
                .map(|c| c.to_digit(10).map(|d| d as u8).ok_or_else(bad))
                .collect::<Result<_>>()?
        } else {
            body.trim()
                .split('.')
                .map(|t| t.parse::<u8>().map_err(|_| bad()))
                .collect::<Result<_>>()?
        };
        if digits.len() != n {
            return Err(Error::Syntax(format!(
                "`{s}` declares {n} digits but has {}",
                digits.len()
            )));
        }
        digits.reverse();
        Self::new(p, digits)
    }
}

/// An element of `(Z/p^n Z)^k`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PAdicVec {
    components: Vec<PAdicInt>,
}

impl PAdicVec {
    pub fn new(components: Vec<PAdicInt>) -> Result<Self> {
        let first = components.first().ok_or(Error::EmptyVector)?;
        for c in &components[1..] {
            first.check_same_ring(c)?;
        }
        Ok(Self { components })
    }

    pub fn scalar(x: PAdicInt) -> Self {
        Self {
            components: vec![x],
        }
    }

    pub fn zero(p: u32, arity: usize, precision: usize) -> Result<Self> {
        if arity == 0 {
            return Err(Error::EmptyVector);
        }
        let z = PAdicInt::zero(p, precision)?;
        Ok(Self {
            components: vec![z; arity],
        })
    }

    pub fn from_u64s(p: u32, precision: usize, values: &[u64]) -> Result<Self> {
        let components = values
            .iter()
            .map(|&v| PAdicInt::from_u64(p, precision, v))
            .collect::<Result<Vec<_>>>()?;
        Self::new(components)
    }

    pub fn p(&self) -> u32 {
        self.components[0].p
    }

    pub fn precision(&self) -> usize {
        self.components[0].precision()
    }

    pub fn arity(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[PAdicInt] {
        &self.components
    }

    pub fn component(&self, j: usize) -> &PAdicInt {
        &self.components[j]
    }

    pub fn into_components(self) -> Vec<PAdicInt> {
        self.components
    }

    pub fn to_u64s(&self) -> Option<Vec<u64>> {
        self.components.iter().map(PAdicInt::to_u64).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(PAdicInt::is_zero)
    }

    pub fn reduce(&self, m: usize) -> Result<Self> {
        let components = self
            .components
            .iter()
            .map(|c| c.reduce(m))
            .collect::<Result<_>>()?;
        Ok(Self { components })
    }

    pub fn extend(&self, m: usize) -> Result<Self> {
        let components = self
            .components
            .iter()
            .map(|c| c.extend(m))
            .collect::<Result<_>>()?;
        Ok(Self { components })
    }

    pub(crate) fn resize(&self, m: usize) -> Self {
        Self {
            components: self.components.iter().map(|c| c.resize(m)).collect(),
        }
    }

    /// Ultrametric distance exponent: the minimum over components of the
    /// first differing digit index.
    pub fn distance(&self, other: &Self) -> Result<usize> {
        if self.arity() != other.arity() {
            return Err(Error::ArityMismatch {
                expected: self.arity(),
                found: other.arity(),
            });
        }
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.distance(b))
            .try_fold(self.precision(), |acc, v| v.map(|v| acc.min(v)))
    }

    /// Canonical dense index in `0..p^{kn}`: the digit-interleaved value,
    /// with digit `i` of component `j` at position `i*k + j`.
    ///
    /// Panics if `p^{kn}` overflows a `u64`.
    pub fn index(&self) -> u64 {
        let p = self.p() as u64;
        let mut acc: u64 = 0;
        for i in (0..self.precision()).rev() {
            for c in self.components.iter().rev() {
                acc = acc
                    .checked_mul(p)
                    .and_then(|a| a.checked_add(c.digits[i] as u64))
                    .expect("state index overflows u64");
            }
        }
        acc
    }

    /// Inverse of [`PAdicVec::index`].
    pub fn from_index(p: u32, arity: usize, precision: usize, mut index: u64) -> Result<Self> {
        check_prime(p)?;
        if arity == 0 {
            return Err(Error::EmptyVector);
        }
        if precision == 0 {
            return Err(Error::ZeroPrecision);
        }
        let base = p as u64;
        let mut digits = vec![vec![0u8; precision]; arity];
        for i in 0..precision {
            for comp in digits.iter_mut() {
                comp[i] = (index % base) as u8;
                index /= base;
            }
        }
        Ok(Self {
            components: digits
                .into_iter()
                .map(|digits| PAdicInt { p, digits })
                .collect(),
        })
    }
}

impl fmt::Display for PAdicVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for PAdicVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({self})")
    }
}

impl FromStr for PAdicVec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let s = s
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .unwrap_or(s);
        let components = s
            .split(',')
            .map(str::parse)
            .collect::<Result<Vec<PAdicInt>>>()?;
        Self::new(components)
    }
}
