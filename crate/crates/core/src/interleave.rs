//! Digit interleaving `H_k : Z_p^k -> Z_p` and its inverse.
//!
//! Digit `i` of component `j` becomes digit `i*k + j` of the image, so a
//! k-vector at precision `n` maps onto a single value at precision `k*n`.
//! Two vectors that first differ at digit `v` have images that first differ
//! somewhere in `[v*k, v*k + k - 1]`, which is what makes conjugation by
//! `H_k` preserve the 1-Lipschitz property.

use crate::error::{Error, Result};
use crate::padic::{PAdicInt, PAdicVec};

pub fn interleave(x: &PAdicVec) -> PAdicInt {
    let k = x.arity();
    let n = x.precision();
    let mut digits = vec![0u8; k * n];
    for (j, c) in x.components().iter().enumerate() {
        for (i, &d) in c.digits().iter().enumerate() {
            digits[i * k + j] = d;
        }
    }
    PAdicInt::new(x.p(), digits).expect("digits already validated")
}

pub fn deinterleave(h: &PAdicInt, k: usize) -> Result<PAdicVec> {
    if k == 0 {
        return Err(Error::EmptyVector);
    }
    let total = h.precision();
    if !total.is_multiple_of(k) {
        return Err(Error::NotDivisible {
            precision: total,
            k,
        });
    }
    let n = total / k;
    let components = (0..k)
        .map(|j| {
            let digits = (0..n).map(|i| h.digit(i * k + j)).collect();
            PAdicInt::new(h.p(), digits)
        })
        .collect::<Result<Vec<_>>>()?;
    PAdicVec::new(components)
}
