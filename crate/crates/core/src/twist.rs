//! Orbit indexing along residue cycles and the orbit twist `T_{k,P}`.
//!
//! Let `d` act on `m` coordinates with `m | k`, and let `R = (Z/p^{k/m} Z)^m`
//! (exactly `p^k` residues). If `d` is a single cycle on `R`, walking it from
//! the zero residue gives every residue a position `j in 0..p^k`.
//!
//! Each point `b` with zero residue anchors the segment
//! `d^1(b), ..., d^{p^k}(b)`; these segments partition the state space at any
//! precision where `d` is a bijection. A point `y` has segment position
//! `i(y)` (its cycle position, with `0` read as `p^k`) and anchor
//! `b(y) = d^{-i(y)}(y)`, and the twist moves it within its segment:
//! `T_{k,P}(y) = d^{P(i(y))}(b(y))`. Composed with `d` this is
//! `T_{k,P}(d(x)) = d^{P(j+1)}(x_0)` for `x = d^j(x_0)`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::interleave::{deinterleave, interleave};
use crate::map::{eval_granular, lcm, prepare_input, round_up, CompatibleMap, MapRef};
use crate::padic::{checked_pow, PAdicInt, PAdicVec};

/// A permutation `P` of `{1, ..., p^k}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TwistPermutation {
    p: u32,
    k: usize,
    /// `images[i - 1] = P(i)`.
    images: Vec<usize>,
}

impl TwistPermutation {
    pub fn new(p: u32, images: Vec<usize>) -> Result<Self> {
        crate::padic::check_prime(p)?;
        let len = images.len();
        let k = (1..=64)
            .find(|&k| checked_pow(p, k) == Some(len as u64))
            .ok_or_else(|| {
                Error::InvalidPermutation(format!("length {len} is not a positive power of {p}"))
            })?;
        let mut seen = vec![false; len];
        for &v in &images {
            if v == 0 || v > len || seen[v - 1] {
                return Err(Error::InvalidPermutation(format!(
                    "{images:?} is not a permutation of 1..={len}"
                )));
            }
            seen[v - 1] = true;
        }
        Ok(Self { p, k, images })
    }

    pub fn identity(p: u32, k: usize) -> Result<Self> {
        let len = checked_pow(p, k).filter(|_| k > 0).ok_or_else(|| {
            Error::InvalidPermutation(format!("p^k too large or k = 0 ({p}^{k})"))
        })?;
        Self::new(p, (1..=len as usize).collect())
    }

    /// Parses `P: 3 4 1 2` (the `P:` prefix is optional).
    pub fn parse(text: &str, p: u32) -> Result<Self> {
        let body = text.trim();
        let body = body.strip_prefix("P:").unwrap_or(body);
        let images = body
            .split_whitespace()
            .map(|w| {
                w.parse::<usize>()
                    .map_err(|_| Error::Syntax(format!("bad permutation entry `{w}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(p, images)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// `P(i)` for `i` in `1..=p^k`.
    pub fn apply(&self, i: usize) -> usize {
        self.images[i - 1]
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &v)| v == i + 1)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.len()];
        for (i, &v) in self.images.iter().enumerate() {
            inv[v - 1] = i + 1;
        }
        Self {
            images: inv,
            ..self.clone()
        }
    }

    /// `self ∘ inner`: apply `inner` first.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        if self.p != inner.p || self.k != inner.k {
            return Err(Error::InvalidPermutation(
                "composing permutations of different sizes".into(),
            ));
        }
        Ok(Self {
            images: inner.images.iter().map(|&i| self.apply(i)).collect(),
            ..self.clone()
        })
    }
}

impl fmt::Display for TwistPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("P:")?;
        for v in &self.images {
            write!(f, " {v}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for TwistPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for TwistPermutation {
    type Err = Error;

    /// Infers `p` from the length when it is a power of 2 or 3; use
    /// [`TwistPermutation::parse`] otherwise.
    fn from_str(s: &str) -> Result<Self> {
        let body = s.trim().strip_prefix("P:").unwrap_or(s.trim());
        let len = body.split_whitespace().count() as u64;
        let p = (2..=crate::padic::MAX_PRIME)
            .filter(|&p| crate::padic::is_prime(p))
            .find(|&p| (1..=64).any(|k| checked_pow(p, k) == Some(len)))
            .ok_or_else(|| {
                Error::InvalidPermutation(format!("length {len} is not a prime power"))
            })?;
        Self::parse(s, p)
    }
}

/// Positions of the residues `(Z/p^{k/m} Z)^m` along the single cycle of `d`
/// through zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueCycle {
    p: u32,
    arity: usize,
    digits: usize,
    /// Residue index at each position.
    states: Vec<u64>,
    /// Position of each residue index.
    positions: Vec<usize>,
}

impl ResidueCycle {
    pub fn new(d: &dyn CompatibleMap, k: usize) -> Result<Self> {
        let m = d.arity();
        if k == 0 || !k.is_multiple_of(m) {
            return Err(Error::BadTwistParameter { k, arity: m });
        }
        let p = d.prime();
        let r = k / m;
        let size = checked_pow(p, k)
            .filter(|&s| s <= 1 << crate::analysis::ENUMERATION_LIMIT_LOG2)
            .ok_or(Error::StateSpaceTooLarge {
                p,
                exponent: k,
                limit_log2: crate::analysis::ENUMERATION_LIMIT_LOG2,
            })? as usize;
        let mut positions = vec![usize::MAX; size];
        let mut states = Vec::with_capacity(size);
        let mut x = PAdicVec::zero(p, m, r)?;
        for t in 0..size {
            let idx = x.index();
            if positions[idx as usize] != usize::MAX {
                return Err(Error::NotTransitive(format!(
                    "{} revisits residue {x} after {t} of {size} steps modulo p^{r}",
                    d.describe()
                )));
            }
            positions[idx as usize] = t;
            states.push(idx);
            x = d.eval(&x, r)?;
        }
        if !x.is_zero() {
            return Err(Error::NotTransitive(format!(
                "{} does not return to zero after {size} steps modulo p^{r}",
                d.describe()
            )));
        }
        Ok(Self {
            p,
            arity: m,
            digits: r,
            states,
            positions,
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Residue digits per coordinate (`k / m`).
    pub fn digits(&self) -> usize {
        self.digits
    }

    /// Cycle position `j in 0..p^k` of the residue of `y`.
    pub fn position(&self, y: &PAdicVec) -> Result<usize> {
        if y.precision() < self.digits {
            return Err(Error::BadPrecision {
                from: y.precision(),
                to: self.digits,
            });
        }
        Ok(self.positions[y.reduce(self.digits)?.index() as usize])
    }

    /// The residue at cycle position `t`.
    pub fn residue(&self, t: usize) -> PAdicVec {
        PAdicVec::from_index(self.p, self.arity, self.digits, self.states[t % self.len()])
            .expect("stored index in range")
    }
}

/// `(x_0, j)` with `x = d^j(x_0)` and `x_0` of zero residue.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitCoords {
    pub base: PAdicVec,
    pub index: usize,
}

/// `(b, i)` with `y = d^i(b)`, `i in 1..=p^k` and `b` of zero residue: the
/// segment a twist acts on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentCoords {
    pub anchor: PAdicVec,
    pub position: usize,
}

/// All extensions of `x` (precision `from`, or nothing) to precision `to`.
fn extensions(
    p: u32,
    arity: usize,
    x: Option<&PAdicVec>,
    to: usize,
) -> impl Iterator<Item = PAdicVec> + '_ {
    let from = x.map_or(0, PAdicVec::precision);
    let fresh = arity * (to - from);
    let count = checked_pow(p, fresh).expect("extension block fits in u64");
    (0..count).map(move |mut t| {
        let comps = (0..arity).map(|j| {
            let mut digits = x.map_or_else(Vec::new, |x| x.component(j).digits().to_vec());
            digits.resize(to, 0);
            digits
        });
        let mut comps: Vec<Vec<u8>> = comps.collect();
        for i in from..to {
            for comp in comps.iter_mut() {
                comp[i] = (t % p as u64) as u8;
                t /= p as u64;
            }
        }
        let comps = comps
            .into_iter()
            .map(|d| PAdicInt::new(p, d).expect("digits below p"))
            .collect();
        PAdicVec::new(comps).expect("homogeneous")
    })
}

/// The unique `x` mod `p^n` with `d(x) ≡ y`, found one granularity block of
/// digits at a time: each surviving prefix is extended by every possible
/// block and exactly one extension must match `y` at that precision.
pub fn invert(d: &dyn CompatibleMap, y: &PAdicVec, n: usize) -> Result<PAdicVec> {
    if let Some(hit) = d.cached_preimage(y, n) {
        return hit;
    }
    let y = prepare_input(d, y, n)?;
    let (p, m, g) = (d.prime(), d.arity(), d.granularity());
    let mut x: Option<PAdicVec> = None;
    let mut level = 0;
    while level < n {
        let next = (level + g).min(n);
        let target = y.reduce(next)?;
        let mut found = None;
        for cand in extensions(p, m, x.as_ref(), next) {
            if d.eval(&cand, next)? == target {
                if found.is_some() {
                    return Err(Error::NotBijective {
                        level: next,
                        detail: format!("{target} has several preimages"),
                    });
                }
                found = Some(cand);
            }
        }
        x = Some(found.ok_or_else(|| Error::NotBijective {
            level: next,
            detail: format!("{target} has no preimage"),
        })?);
        level = next;
    }
    Ok(x.expect("n >= 1"))
}

/// `d^e(x) mod p^n` for any integer `e`; negative exponents invert.
pub fn step(d: &dyn CompatibleMap, x: &PAdicVec, e: i64, n: usize) -> Result<PAdicVec> {
    let mut y = prepare_input(d, x, n)?;
    if e >= 0 {
        for _ in 0..e {
            y = d.eval(&y, n)?;
        }
    } else {
        for _ in 0..e.unsigned_abs() {
            y = invert(d, &y, n)?;
        }
    }
    Ok(y)
}

/// Locates `x` on the residue cycle of `d` (twist parameter `k`): the cycle
/// distance `j` from the zero residue and the base point `d^{-j}(x)`.
pub fn orbit_coords(d: &dyn CompatibleMap, x: &PAdicVec, k: usize) -> Result<OrbitCoords> {
    let cycle = ResidueCycle::new(d, k)?;
    let n = x.precision();
    let index = cycle.position(x)?;
    let base = step(d, x, -(index as i64), n)?;
    Ok(OrbitCoords { base, index })
}

/// The standalone twist `T_{k,P}` built over the dynamic `d`.
pub struct Twist {
    map: MapRef,
    perm: TwistPermutation,
    cycle: Option<ResidueCycle>,
    granularity: usize,
}

impl Twist {
    /// Requires `d` to be a single cycle on the residue space, except for the
    /// identity permutation, which never consults it.
    pub fn new(map: MapRef, perm: TwistPermutation) -> Result<Self> {
        if map.prime() != perm.p() {
            return Err(Error::Mismatch {
                left_p: map.prime(),
                left_n: 0,
                right_p: perm.p(),
                right_n: 0,
            });
        }
        let k = perm.k();
        let m = map.arity();
        if !k.is_multiple_of(m) {
            return Err(Error::BadTwistParameter { k, arity: m });
        }
        let cycle = if perm.is_identity() {
            None
        } else {
            Some(ResidueCycle::new(map.as_ref(), k)?)
        };
        let granularity = lcm(k / m, map.granularity());
        Ok(Self {
            map,
            perm,
            cycle,
            granularity,
        })
    }

    pub fn map(&self) -> &MapRef {
        &self.map
    }

    pub fn permutation(&self) -> &TwistPermutation {
        &self.perm
    }

    pub fn granularity(&self) -> usize {
        self.granularity
    }

    fn cycle(&self) -> Result<&ResidueCycle> {
        match &self.cycle {
            Some(c) => Ok(c),
            None => {
                // Identity twists skip the cycle; rebuild on demand for coordinates.
                Err(Error::NotTransitive(
                    "identity twist was built without a residue cycle".into(),
                ))
            }
        }
    }

    fn segment_position(&self, y: &PAdicVec) -> Result<usize> {
        let cycle = self.cycle()?;
        let j = cycle.position(y)?;
        Ok(if j == 0 { cycle.len() } else { j })
    }

    /// `T(y)` at a precision that is a multiple of the granularity.
    fn apply_exact(&self, y: &PAdicVec, n: usize) -> Result<PAdicVec> {
        if self.perm.is_identity() {
            return Ok(y.clone());
        }
        let i = self.segment_position(y)?;
        let e = self.perm.apply(i) as i64 - i as i64;
        step(self.map.as_ref(), y, e, n)
    }

    /// `T_{k,P}(y) mod p^n`.
    pub fn apply(&self, y: &PAdicVec, n: usize) -> Result<PAdicVec> {
        let y = prepare_input(self.map.as_ref(), y, n)?;
        eval_granular(&y, n, self.granularity, |y, n| self.apply_exact(y, n))
    }

    /// Anchor and position of `y` in its twist segment.
    pub fn segment_coords(&self, y: &PAdicVec, n: usize) -> Result<SegmentCoords> {
        let owned;
        let cycle = match &self.cycle {
            Some(c) => c,
            None => {
                owned = ResidueCycle::new(self.map.as_ref(), self.perm.k())?;
                &owned
            }
        };
        let y = prepare_input(self.map.as_ref(), y, n)?;
        let j = cycle.position(&y.resize(round_up(n, self.granularity)))?;
        let position = if j == 0 { cycle.len() } else { j };
        let anchor = eval_granular(&y, n, self.granularity, |y, n| {
            step(self.map.as_ref(), y, -(position as i64), n)
        })?;
        Ok(SegmentCoords { anchor, position })
    }
}

/// `T_{k,P}(y)` over the dynamic `d`; see [`Twist`].
pub fn twist_apply(d: MapRef, perm: &TwistPermutation, y: &PAdicVec, n: usize) -> Result<PAdicVec> {
    Twist::new(d, perm.clone())?.apply(y, n)
}

/// `T_{k,P} ∘ d` as a compatible map.
pub struct TwistedMap {
    twist: Twist,
}

impl TwistedMap {
    pub fn new(d: MapRef, perm: TwistPermutation) -> Result<Self> {
        Ok(Self {
            twist: Twist::new(d, perm)?,
        })
    }

    pub fn twist(&self) -> &Twist {
        &self.twist
    }
}

impl CompatibleMap for TwistedMap {
    fn prime(&self) -> u32 {
        self.twist.map.prime()
    }

    fn arity(&self) -> usize {
        self.twist.map.arity()
    }

    fn granularity(&self) -> usize {
        self.twist.granularity
    }

    fn max_precision(&self) -> Option<usize> {
        self.twist.map.max_precision()
    }

    fn eval(&self, x: &PAdicVec, n: usize) -> Result<PAdicVec> {
        let x = prepare_input(self, x, n)?;
        eval_granular(&x, n, self.twist.granularity, |x, n| {
            let y = self.twist.map.eval(x, n)?;
            self.twist.apply_exact(&y, n)
        })
    }

    fn describe(&self) -> String {
        format!("T[{}] . [{}]", self.twist.perm, self.twist.map.describe())
    }
}

pub fn twisted_map(d: MapRef, perm: TwistPermutation) -> Result<TwistedMap> {
    TwistedMap::new(d, perm)
}

/// The permutation `P` with `H_k ∘ T_{k,P} ∘ F ∘ H_k^{-1} ≡ G1 (mod p^k)`.
///
/// With `c_0 = 0, c_1, ..., c_{p^k-1}` the residue cycle of `F` mod `p`,
/// `P(i)` is the position of `H_k^{-1}(G1(H_k(c_{i-1})))`, position `0` being
/// written `p^k`. The congruence is re-checked on every residue before
/// returning.
pub fn solve_twist(f: MapRef, g1: &dyn CompatibleMap) -> Result<TwistPermutation> {
    let p = f.prime();
    let k = f.arity();
    if g1.prime() != p {
        return Err(Error::Mismatch {
            left_p: p,
            left_n: 0,
            right_p: g1.prime(),
            right_n: 0,
        });
    }
    if g1.arity() != 1 {
        return Err(Error::ArityMismatch {
            expected: 1,
            found: g1.arity(),
        });
    }
    let f_cycle = ResidueCycle::new(f.as_ref(), k)
        .map_err(|e| Error::NotTransitive(format!("F must be transitive modulo p: {e}")))?;
    ResidueCycle::new(g1, k)
        .map_err(|e| Error::NotTransitive(format!("G1 must be transitive modulo p^k: {e}")))?;

    let len = f_cycle.len();
    let images = (1..=len)
        .map(|i| {
            let c = f_cycle.residue(i - 1);
            let z = PAdicVec::scalar(interleave(&c));
            let w = g1.eval(&z, k)?;
            let t = f_cycle.position(&deinterleave(w.component(0), k)?)?;
            Ok(if t == 0 { len } else { t })
        })
        .collect::<Result<Vec<_>>>()?;
    let perm = TwistPermutation::new(p, images)?;

    let twisted = TwistedMap::new(f, perm.clone())?;
    for z in 0..len as u64 {
        let zv = PAdicInt::from_u64(p, k, z)?;
        let lhs = interleave(&twisted.eval(&deinterleave(&zv, k)?, 1)?);
        let rhs = g1.eval(&PAdicVec::scalar(zv.clone()), k)?;
        if &lhs != rhs.component(0) {
            return Err(Error::InvalidPermutation(format!(
                "{perm} fails the defining congruence at {zv}"
            )));
        }
    }
    Ok(perm)
}
