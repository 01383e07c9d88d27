//! The compatible-map abstraction: anything that can evaluate `F(x) mod p^n`
//! for a k-vector `x` of precision at least `n`.
//!
//! Implementations here cover parsed specs, explicit tables, conjugation by
//! the digit interleaver, composition and a memoizing cache. The twisted,
//! lifted and pushed maps live in [`crate::twist`] and [`crate::transfer`].

use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::analysis::{state_count, InducedPermutation};
use crate::dsl::MapSpec;
use crate::error::{Error, Result};
use crate::interleave::{deinterleave, interleave};
use crate::padic::PAdicVec;

/// A map `F : Z_p^k -> Z_p^k` whose value mod `p^m` depends only on the
/// argument mod `p^m` (checked, not assumed, by
/// [`crate::analysis::check_compatibility`]).
pub trait CompatibleMap: Send + Sync {
    fn prime(&self) -> u32;

    fn arity(&self) -> usize;

    /// `F(x) mod p^n`. `x` must carry at least `n` digits; extra digits are
    /// ignored.
    fn eval(&self, x: &PAdicVec, n: usize) -> Result<PAdicVec>;

    /// Precisions at which the map is guaranteed well defined are the
    /// multiples of this value. Evaluation at other precisions goes through
    /// the next multiple.
    fn granularity(&self) -> usize {
        1
    }

    fn max_precision(&self) -> Option<usize> {
        None
    }

    /// A precomputed preimage, if the implementation keeps one.
    fn cached_preimage(&self, _y: &PAdicVec, _n: usize) -> Option<Result<PAdicVec>> {
        None
    }

    fn describe(&self) -> String;
}

pub type MapRef = Arc<dyn CompatibleMap>;

impl fmt::Debug for dyn CompatibleMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

/// Validates `x` against the map and truncates it to `n` digits.
pub(crate) fn prepare_input(map: &dyn CompatibleMap, x: &PAdicVec, n: usize) -> Result<PAdicVec> {
    if n == 0 {
        return Err(Error::ZeroPrecision);
    }
    if x.p() != map.prime() {
        return Err(Error::Mismatch {
            left_p: map.prime(),
            left_n: n,
            right_p: x.p(),
            right_n: x.precision(),
        });
    }
    if x.arity() != map.arity() {
        return Err(Error::ArityMismatch {
            expected: map.arity(),
            found: x.arity(),
        });
    }
    if let Some(max) = map.max_precision() {
        if n > max {
            return Err(Error::BeyondTable { requested: n, max });
        }
    }
    x.reduce(n)
}

pub(crate) fn round_up(n: usize, g: usize) -> usize {
    n.div_ceil(g) * g
}

pub(crate) fn lcm(a: usize, b: usize) -> usize {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

/// Evaluates `f` at the next multiple of `granularity` at or above `n`,
/// zero-padding `x mod p^n`, and reduces the result back to `n` digits.
pub(crate) fn eval_granular(
    x: &PAdicVec,
    n: usize,
    granularity: usize,
    f: impl FnOnce(&PAdicVec, usize) -> Result<PAdicVec>,
) -> Result<PAdicVec> {
    let level = round_up(n, granularity);
    if level == n {
        return f(x, n);
    }
    let y = f(&x.resize(level), level)?;
    y.reduce(n)
}

/// Applies `f` `steps` times at precision `n`.
pub fn iterate(f: &dyn CompatibleMap, x: &PAdicVec, steps: usize, n: usize) -> Result<PAdicVec> {
    let mut y = x.reduce(n)?;
    for _ in 0..steps {
        y = f.eval(&y, n)?;
    }
    Ok(y)
}

impl CompatibleMap for MapSpec {
    fn prime(&self) -> u32 {
        self.p()
    }

    fn arity(&self) -> usize {
        self.k()
    }

    fn eval(&self, x: &PAdicVec, n: usize) -> Result<PAdicVec> {
        let x = prepare_input(self, x, n)?;
        self.evaluate(&x, n)
    }

    fn describe(&self) -> String {
        self.to_string()
    }
}

/// A map given by explicit images at precisions `1..=max`, over canonical
/// state indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableMap {
    p: u32,
    arity: usize,
    /// `levels[n - 1][i]` is the image of state `i` modulo `p^n`.
    levels: Vec<Vec<u64>>,
}

impl TableMap {
    pub fn new(p: u32, arity: usize, levels: Vec<Vec<u64>>) -> Result<Self> {
        crate::padic::check_prime(p)?;
        if arity == 0 {
            return Err(Error::EmptyVector);
        }
        if levels.is_empty() {
            return Err(Error::ZeroPrecision);
        }
        for (i, table) in levels.iter().enumerate() {
            let size = state_count(p, arity, i + 1)?;
            if table.len() as u64 != size {
                return Err(Error::Syntax(format!(
                    "table for precision {} has {} entries, expected {size}",
                    i + 1,
                    table.len()
                )));
            }
            if let Some(&bad) = table.iter().find(|&&v| v >= size) {
                return Err(Error::Syntax(format!(
                    "image {bad} out of range at precision {}",
                    i + 1
                )));
            }
        }
        Ok(Self { p, arity, levels })
    }

    /// A table known only at its top precision; lower precisions evaluate the
    /// zero-padded state there and reduce.
    pub fn from_top(p: u32, arity: usize, precision: usize, table: Vec<u64>) -> Result<Self> {
        let mut levels = vec![Vec::new(); precision];
        for n in 1..precision {
            let size = state_count(p, arity, n)?;
            let modulus = size;
            levels[n - 1] = (0..size)
                .map(|i| table.get(i as usize).map(|&v| v % modulus).unwrap_or(0))
                .collect();
        }
        levels[precision - 1] = table;
        Self::new(p, arity, levels)
    }

    pub fn from_induced(tables: &[InducedPermutation]) -> Result<Self> {
        let first = tables.first().ok_or(Error::ZeroPrecision)?;
        let mut sorted: Vec<&InducedPermutation> = tables.iter().collect();
        sorted.sort_by_key(|t| t.level());
        for (i, t) in sorted.iter().enumerate() {
            if t.level() != i + 1 || t.p() != first.p() || t.arity() != first.arity() {
                return Err(Error::Syntax(
                    "table map needs one table per precision 1..=n with equal p and k".into(),
                ));
            }
        }
        Self::new(
            first.p(),
            first.arity(),
            sorted.iter().map(|t| t.image().to_vec()).collect(),
        )
    }

    pub fn levels(&self) -> &[Vec<u64>] {
        &self.levels
    }
}

impl CompatibleMap for TableMap {
    fn prime(&self) -> u32 {
        self.p
    }

    fn arity(&self) -> usize {
        self.arity
    }

    fn max_precision(&self) -> Option<usize> {
        Some(self.levels.len())
    }

    fn eval(&self, x: &PAdicVec, n: usize) -> Result<PAdicVec> {
        let x = prepare_input(self, x, n)?;
        let image = self.levels[n - 1][x.index() as usize];
        PAdicVec::from_index(self.p, self.arity, n, image)
    }

    fn describe(&self) -> String {
        format!(
            "table(p={}, k={}, max precision {})",
            self.p,
            self.arity,
            self.levels.len()
        )
    }
}

/// `H_k^{-1} ∘ g ∘ H_k` for a univariate `g`: a map on `Z_p^k`.
pub struct Conjugated {
    inner: MapRef,
    k: usize,
}

impl Conjugated {
    pub fn new(inner: MapRef, k: usize) -> Result<Self> {
        if inner.arity() != 1 {
            return Err(Error::ArityMismatch {
                expected: 1,
                found: inner.arity(),
            });
        }
        if k == 0 {
            return Err(Error::EmptyVector);
        }
        Ok(Self { inner, k })
    }
}

impl CompatibleMap for Conjugated {
    fn prime(&self) -> u32 {
        self.inner.prime()
    }

    fn arity(&self) -> usize {
        self.k
    }

    fn granularity(&self) -> usize {
        lcm(self.inner.granularity(), self.k) / self.k
    }

    fn max_precision(&self) -> Option<usize> {
        self.inner.max_precision().map(|m| m / self.k)
    }

    fn eval(&self, x: &PAdicVec, n: usize) -> Result<PAdicVec> {
        let x = prepare_input(self, x, n)?;
        eval_granular(&x, n, self.granularity(), |x, n| {
            let h = PAdicVec::scalar(interleave(x));
            let g = self.inner.eval(&h, self.k * n)?;
            deinterleave(g.component(0), self.k)
        })
    }

    fn describe(&self) -> String {
        format!("H_{k}^-1 . [{}] . H_{k}", self.inner.describe(), k = self.k)
    }
}

/// `H_k ∘ f ∘ H_k^{-1}` for `f` on `Z_p^k`: a univariate map. Precisions
/// that are not multiples of `k` go through the next multiple.
pub struct Interleaved {
    inner: MapRef,
}

impl Interleaved {
    pub fn new(inner: MapRef) -> Self {
        Self { inner }
    }
}

impl CompatibleMap for Interleaved {
    fn prime(&self) -> u32 {
        self.inner.prime()
    }

    fn arity(&self) -> usize {
        1
    }

    fn granularity(&self) -> usize {
        self.inner.arity() * self.inner.granularity()
    }

    fn max_precision(&self) -> Option<usize> {
        self.inner.max_precision().map(|m| m * self.inner.arity())
    }

    fn eval(&self, x: &PAdicVec, n: usize) -> Result<PAdicVec> {
        let x = prepare_input(self, x, n)?;
        let k = self.inner.arity();
        eval_granular(&x, n, self.granularity(), |x, n| {
            let v = deinterleave(x.component(0), k)?;
            let y = self.inner.eval(&v, n / k)?;
            Ok(PAdicVec::scalar(interleave(&y)))
        })
    }

    fn describe(&self) -> String {
        format!(
            "H_{k} . [{}] . H_{k}^-1",
            self.inner.describe(),
            k = self.inner.arity()
        )
    }
}

/// `outer ∘ inner`.
pub struct Composed {
    outer: MapRef,
    inner: MapRef,
}

impl Composed {
    pub fn new(outer: MapRef, inner: MapRef) -> Result<Self> {
        if outer.prime() != inner.prime() {
            return Err(Error::Mismatch {
                left_p: outer.prime(),
                left_n: 0,
                right_p: inner.prime(),
                right_n: 0,
            });
        }
        if outer.arity() != inner.arity() {
            return Err(Error::ArityMismatch {
                expected: outer.arity(),
                found: inner.arity(),
            });
        }
        Ok(Self { outer, inner })
    }
}

impl CompatibleMap for Composed {
    fn prime(&self) -> u32 {
        self.inner.prime()
    }

    fn arity(&self) -> usize {
        self.inner.arity()
    }

    fn granularity(&self) -> usize {
        lcm(self.outer.granularity(), self.inner.granularity())
    }

    fn max_precision(&self) -> Option<usize> {
        match (self.outer.max_precision(), self.inner.max_precision()) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    fn eval(&self, x: &PAdicVec, n: usize) -> Result<PAdicVec> {
        let x = prepare_input(self, x, n)?;
        eval_granular(&x, n, self.granularity(), |x, n| {
            let y = self.inner.eval(x, n)?;
            self.outer.eval(&y, n)
        })
    }

    fn describe(&self) -> String {
        format!("[{}] . [{}]", self.outer.describe(), self.inner.describe())
    }
}

/// Largest state space a [`Memoized`] map will tabulate.
pub const MEMO_LIMIT_LOG2: u32 = 22;

struct LevelCache {
    forward: Vec<u32>,
    inverse: Option<Vec<u32>>,
}

/// Caches the induced table (and its inverse, when bijective) of a map at
/// each precision on first use. Evaluations above the cache limit go to the
/// wrapped map.
///
/// Tables are built sequentially so that parallel callers blocking on a
/// level never wait on work scheduled behind them.
pub struct Memoized {
    inner: MapRef,
    levels: Vec<OnceLock<Option<LevelCache>>>,
}

impl Memoized {
    pub fn new(inner: MapRef) -> Self {
        let p = inner.prime();
        let k = inner.arity();
        let mut depth = 0;
        while state_count(p, k, depth + 1)
            .map(|s| s <= 1u64 << MEMO_LIMIT_LOG2)
            .unwrap_or(false)
        {
            depth += 1;
        }
        if let Some(max) = inner.max_precision() {
            depth = depth.min(max);
        }
        Self {
            inner,
            levels: (0..depth).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn wrap(inner: MapRef) -> MapRef {
        Arc::new(Self::new(inner))
    }

    fn level(&self, n: usize) -> Option<&LevelCache> {
        let slot = self.levels.get(n.checked_sub(1)?)?;
        slot.get_or_init(|| {
            let (p, k) = (self.inner.prime(), self.inner.arity());
            let size = state_count(p, k, n).ok()?;
            let mut forward = Vec::with_capacity(size as usize);
            for i in 0..size {
                let x = PAdicVec::from_index(p, k, n, i).ok()?;
                forward.push(self.inner.eval(&x, n).ok()?.index() as u32);
            }
            let mut inverse = vec![u32::MAX; size as usize];
            let mut bijective = true;
            for (i, &y) in forward.iter().enumerate() {
                if inverse[y as usize] != u32::MAX {
                    bijective = false;
                    break;
                }
                inverse[y as usize] = i as u32;
            }
            Some(LevelCache {
                forward,
                inverse: bijective.then_some(inverse),
            })
        })
        .as_ref()
    }
}

impl CompatibleMap for Memoized {
    fn prime(&self) -> u32 {
        self.inner.prime()
    }

    fn arity(&self) -> usize {
        self.inner.arity()
    }

    fn granularity(&self) -> usize {
        self.inner.granularity()
    }

    fn max_precision(&self) -> Option<usize> {
        self.inner.max_precision()
    }

    fn eval(&self, x: &PAdicVec, n: usize) -> Result<PAdicVec> {
        let x = prepare_input(self, x, n)?;
        match self.level(n) {
            Some(cache) => {
                let y = cache.forward[x.index() as usize];
                PAdicVec::from_index(self.prime(), self.arity(), n, y as u64)
            }
            None => self.inner.eval(&x, n),
        }
    }

    fn cached_preimage(&self, y: &PAdicVec, n: usize) -> Option<Result<PAdicVec>> {
        let inverse = self.level(n)?.inverse.as_ref()?;
        let idx = y.reduce(n).ok()?.index();
        let x = inverse[idx as usize];
        Some(PAdicVec::from_index(
            self.prime(),
            self.arity(),
            n,
            x as u64,
        ))
    }

    fn describe(&self) -> String {
        self.inner.describe()
    }
}
