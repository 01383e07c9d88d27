#![allow(dead_code)]

use std::sync::Arc;

use padic_ergodic::dsl::{parse, BinOp, Expr, MapSpec};
use padic_ergodic::MapRef;
use proptest::prelude::*;
use rand::Rng;

pub fn spec(src: &str) -> MapRef {
    Arc::new(parse(src).unwrap())
}

const ARITH: [BinOp; 3] = [BinOp::Add, BinOp::Sub, BinOp::Mul];
const ALL_OPS: [BinOp; 6] = [
    BinOp::Add,
    BinOp::Sub,
    BinOp::Mul,
    BinOp::Xor,
    BinOp::And,
    BinOp::Or,
];

fn random_leaf<R: Rng>(rng: &mut R, arity: usize) -> Expr {
    match rng.gen_range(0..4) {
        0 => Expr::Const(rng.gen_range(0..16)),
        1 if rng.gen_bool(0.2) => Expr::Const(rng.gen()),
        _ => Expr::Var(rng.gen_range(0..arity)),
    }
}

/// A random expression of depth at most `depth` (leaves have depth 1).
pub fn random_expr<R: Rng>(rng: &mut R, arity: usize, depth: usize, bitwise: bool) -> Expr {
    if depth <= 1 || rng.gen_bool(0.25) {
        return random_leaf(rng, arity);
    }
    if bitwise && rng.gen_bool(0.15) {
        return Expr::complement(random_expr(rng, arity, depth - 1, bitwise));
    }
    let op = if bitwise {
        ALL_OPS[rng.gen_range(0..ALL_OPS.len())]
    } else {
        ARITH[rng.gen_range(0..ARITH.len())]
    };
    Expr::binary(
        op,
        random_expr(rng, arity, depth - 1, bitwise),
        random_expr(rng, arity, depth - 1, bitwise),
    )
}

pub fn random_spec<R: Rng>(rng: &mut R, p: u32, arity: usize, depth: usize) -> MapSpec {
    let coords = (0..arity)
        .map(|_| random_expr(rng, arity, depth, p == 2))
        .collect();
    MapSpec::new(p, coords).unwrap()
}

/// Proptest strategy over specs, driven by a seed so shrinking stays simple.
pub fn spec_strategy(p: u32, max_arity: usize, depth: usize) -> impl Strategy<Value = MapSpec> {
    (1..=max_arity, any::<u64>()).prop_map(move |(arity, seed)| {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        random_spec(&mut rng, p, arity, depth)
    })
}

/// Twist of the `+1` map on indices mod `modulus` with `p^k = block`:
/// `y -> y - i + P(i)` where `i = y mod block`, read as `block` when zero.
pub fn successor_twist(images: &[usize], y: u64, modulus: u64) -> u64 {
    let block = images.len() as u64;
    let i = match y % block {
        0 => block,
        r => r,
    };
    (y + modulus - i + images[i as usize - 1] as u64) % modulus
}

/// All permutations of `1..=n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                prefix.push(v + 1);
                go(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Interleaved index of a vector of coordinate values, computed digit by
/// digit with integer arithmetic.
pub fn interleave_index(p: u64, n: usize, coords: &[u64]) -> u64 {
    let k = coords.len();
    let mut out = 0;
    let mut scale = 1;
    let mut rest = coords.to_vec();
    for _ in 0..n {
        for c in rest.iter_mut().take(k) {
            out += (*c % p) * scale;
            *c /= p;
            scale *= p;
        }
    }
    out
}
