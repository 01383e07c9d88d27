//! Exhaustive certification on residue rings.
//!
//! For a compatible map, measure preservation is equivalent to bijectivity of
//! every induced map mod `p^n`, and ergodicity to every induced map being a
//! single cycle. Only a finite ladder `n = 1..=N` can be checked, so every
//! [`Certificate`] reports `pass-up-to-N` or `fail-at-n`, never a proof.

use std::fmt::{self, Write as _};
use std::io::{self, BufRead, Write};
use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::map::CompatibleMap;
use crate::padic::{checked_pow, PAdicVec};

/// Exhaustive operations refuse state spaces above `2^24`.
pub const ENUMERATION_LIMIT_LOG2: u32 = 24;

/// Default ladder height for multivariate maps: `p^{kN} <= 2^20`.
pub const LADDER_LIMIT_LOG2: u32 = 20;

/// `p^{k n}`, or an error when it exceeds the enumeration bound.
pub fn state_count(p: u32, arity: usize, n: usize) -> Result<u64> {
    let exponent = arity * n;
    let too_large = Error::StateSpaceTooLarge {
        p,
        exponent,
        limit_log2: ENUMERATION_LIMIT_LOG2,
    };
    match checked_pow(p, exponent) {
        Some(s) if s <= 1u64 << ENUMERATION_LIMIT_LOG2 => Ok(s),
        _ => Err(too_large),
    }
}

fn largest_level(p: u32, arity: usize, limit_log2: u32) -> usize {
    let mut n = 0;
    while checked_pow(p, arity * (n + 1)).is_some_and(|s| s <= 1u64 << limit_log2) {
        n += 1;
    }
    n.max(1)
}

/// `6` for univariate maps (capped by the enumeration bound), otherwise the
/// largest `N` with `p^{kN} <= 2^20`.
pub fn default_max_level(p: u32, arity: usize) -> usize {
    if arity == 1 {
        6.min(largest_level(p, 1, ENUMERATION_LIMIT_LOG2))
    } else {
        largest_level(p, arity, LADDER_LIMIT_LOG2)
    }
}

/// The map induced on `(Z/p^n Z)^k`, as an image array over canonical state
/// indices.
pub struct InducedPermutation {
    p: u32,
    arity: usize,
    level: usize,
    image: Vec<u64>,
    cycles: OnceLock<Option<Vec<u64>>>,
}

impl Clone for InducedPermutation {
    fn clone(&self) -> Self {
        Self {
            p: self.p,
            arity: self.arity,
            level: self.level,
            image: self.image.clone(),
            cycles: OnceLock::new(),
        }
    }
}

impl fmt::Debug for InducedPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InducedPermutation")
            .field("p", &self.p)
            .field("arity", &self.arity)
            .field("level", &self.level)
            .field("image", &self.image)
            .finish()
    }
}

impl PartialEq for InducedPermutation {
    fn eq(&self, other: &Self) -> bool {
        (self.p, self.arity, self.level) == (other.p, other.arity, other.level)
            && self.image == other.image
    }
}

impl Eq for InducedPermutation {}

impl InducedPermutation {
    /// Evaluates `f` on every state mod `p^n`, in parallel. The result is
    /// identical to a sequential build; on failure the error of the lowest
    /// failing state is returned.
    pub fn build(f: &dyn CompatibleMap, n: usize) -> Result<Self> {
        let (p, k) = (f.prime(), f.arity());
        let size = state_count(p, k, n)?;
        let results: Vec<Result<u64>> = (0..size)
            .into_par_iter()
            .map(|i| {
                let x = PAdicVec::from_index(p, k, n, i)?;
                Ok(f.eval(&x, n)?.index())
            })
            .collect();
        let image = results.into_iter().collect::<Result<Vec<_>>>()?;
        Ok(Self {
            p,
            arity: k,
            level: n,
            image,
            cycles: OnceLock::new(),
        })
    }

    /// Single-threaded build, kept as a reference for the parallel one.
    pub fn build_sequential(f: &dyn CompatibleMap, n: usize) -> Result<Self> {
        let (p, k) = (f.prime(), f.arity());
        let size = state_count(p, k, n)?;
        let image = (0..size)
            .map(|i| Ok(f.eval(&PAdicVec::from_index(p, k, n, i)?, n)?.index()))
            .collect::<Result<Vec<_>>>()?;
        Self::from_image(p, k, n, image)
    }

    pub fn from_image(p: u32, arity: usize, level: usize, image: Vec<u64>) -> Result<Self> {
        let size = state_count(p, arity, level)?;
        if image.len() as u64 != size {
            return Err(Error::Syntax(format!(
                "expected {size} images for p={p} k={arity} n={level}, found {}",
                image.len()
            )));
        }
        if let Some(&bad) = image.iter().find(|&&v| v >= size) {
            return Err(Error::Syntax(format!("image {bad} out of range 0..{size}")));
        }
        Ok(Self {
            p,
            arity,
            level,
            image,
            cycles: OnceLock::new(),
        })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn image(&self) -> &[u64] {
        &self.image
    }

    pub fn apply(&self, state: u64) -> u64 {
        self.image[state as usize]
    }

    pub fn state(&self, index: u64) -> PAdicVec {
        PAdicVec::from_index(self.p, self.arity, self.level, index).expect("index in range")
    }

    /// First pair of states with a common image, as `(a, b, image)`.
    pub fn first_collision(&self) -> Option<(u64, u64, u64)> {
        let mut preimage = vec![u64::MAX; self.image.len()];
        for (i, &y) in self.image.iter().enumerate() {
            let slot = &mut preimage[y as usize];
            if *slot != u64::MAX {
                return Some((*slot, i as u64, y));
            }
            *slot = i as u64;
        }
        None
    }

    pub fn is_bijective(&self) -> bool {
        self.first_collision().is_none()
    }

    /// Sorted cycle lengths, or `None` if the map is not a permutation.
    pub fn cycle_lengths(&self) -> Option<&[u64]> {
        self.cycles
            .get_or_init(|| {
                if !self.is_bijective() {
                    return None;
                }
                let mut visited = vec![false; self.image.len()];
                let mut lengths = Vec::new();
                for start in 0..self.image.len() {
                    if visited[start] {
                        continue;
                    }
                    let mut len = 0;
                    let mut s = start;
                    while !visited[s] {
                        visited[s] = true;
                        s = self.image[s] as usize;
                        len += 1;
                    }
                    lengths.push(len);
                }
                lengths.sort_unstable();
                Some(lengths)
            })
            .as_deref()
    }

    pub fn is_transitive(&self) -> bool {
        self.cycle_lengths()
            .is_some_and(|c| c.len() == 1 && c[0] == self.image.len() as u64)
    }

    /// The orbit of `start` under the induced map, `steps` states long
    /// (starting with `start` itself).
    pub fn orbit(&self, start: u64, steps: usize) -> Vec<u64> {
        let mut out = Vec::with_capacity(steps);
        let mut s = start;
        for _ in 0..steps {
            out.push(s);
            s = self.image[s as usize];
        }
        out
    }

    /// Reduction of states mod `p^m`: the image of this table under state
    /// projection. Returns `None` if the projection is not well defined.
    pub fn project(&self, m: usize) -> Option<Vec<u64>> {
        if m == 0 || m > self.level {
            return None;
        }
        let modulus = checked_pow(self.p, self.arity * m)?;
        let mut out = vec![u64::MAX; modulus as usize];
        for (i, &y) in self.image.iter().enumerate() {
            let slot = &mut out[(i as u64 % modulus) as usize];
            let v = y % modulus;
            if *slot == u64::MAX {
                *slot = v;
            } else if *slot != v {
                return None;
            }
        }
        Some(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Property {
    Compatible,
    Bijective,
    Transitive,
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Property::Compatible => "compatible",
            Property::Bijective => "bijective",
            Property::Transitive => "transitive",
        })
    }
}

/// Why a rung failed. States are canonical indices at the rung's level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Failure {
    Collision { first: u64, second: u64, image: u64 },
    Cycles { count: usize, lengths: Vec<u64> },
    Incompatible(Incompatibility),
}

/// `F(x) mod p^level` differs from `F(x mod p^level)` at precision `level`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Incompatibility {
    pub state: PAdicVec,
    pub level: usize,
    pub reduced_image: PAdicVec,
    pub image_of_reduced: PAdicVec,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rung {
    pub level: usize,
    pub failure: Option<Failure>,
}

impl Rung {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    PassUpTo(usize),
    FailAt(usize),
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::PassUpTo(n) => write!(f, "pass-up-to-{n}"),
            Verdict::FailAt(n) => write!(f, "fail-at-{n}"),
        }
    }
}

/// Per-rung verdicts for one property over precisions `1..=N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub property: Property,
    pub subject: String,
    pub p: u32,
    pub arity: usize,
    pub rungs: Vec<Rung>,
}

impl Certificate {
    pub fn max_level(&self) -> usize {
        self.rungs.last().map_or(0, |r| r.level)
    }

    pub fn first_failure(&self) -> Option<usize> {
        self.rungs.iter().find(|r| !r.passed()).map(|r| r.level)
    }

    pub fn passed(&self) -> bool {
        self.first_failure().is_none()
    }

    pub fn verdict(&self) -> Verdict {
        match self.first_failure() {
            Some(n) => Verdict::FailAt(n),
            None => Verdict::PassUpTo(self.max_level()),
        }
    }

    fn state_text(&self, level: usize, index: u64) -> String {
        PAdicVec::from_index(self.p, self.arity, level, index)
            .map(|s| s.to_string())
            .unwrap_or_else(|_| index.to_string())
    }

    /// `key: value` lines in a fixed order.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "certificate: {}", self.property);
        let _ = writeln!(out, "subject: {}", self.subject);
        let _ = writeln!(out, "p: {}", self.p);
        let _ = writeln!(out, "k: {}", self.arity);
        let first = self.rungs.first().map_or(0, |r| r.level);
        let _ = writeln!(out, "levels: {first}..{}", self.max_level());
        for rung in &self.rungs {
            let _ = write!(out, "rung.{}: ", rung.level);
            match &rung.failure {
                None => {
                    let _ = writeln!(out, "pass");
                }
                Some(Failure::Collision {
                    first,
                    second,
                    image,
                }) => {
                    let _ = writeln!(
                        out,
                        "fail collision {} and {} -> {}",
                        self.state_text(rung.level, *first),
                        self.state_text(rung.level, *second),
                        self.state_text(rung.level, *image)
                    );
                }
                Some(Failure::Cycles { count, lengths }) => {
                    let shown: Vec<String> = lengths.iter().take(8).map(u64::to_string).collect();
                    let more = if lengths.len() > 8 { " ..." } else { "" };
                    let _ = writeln!(
                        out,
                        "fail cycles={count} lengths=[{}{more}]",
                        shown.join(" ")
                    );
                }
                Some(Failure::Incompatible(inc)) => {
                    let _ = writeln!(
                        out,
                        "fail at level {}: F({}) reduces to {} but F of the reduced state is {}",
                        inc.level, inc.state, inc.reduced_image, inc.image_of_reduced
                    );
                }
            }
        }
        let _ = writeln!(out, "verdict: {}", self.verdict());
        out
    }
}

fn bijectivity_rung(table: &InducedPermutation) -> Rung {
    Rung {
        level: table.level(),
        failure: table
            .first_collision()
            .map(|(first, second, image)| Failure::Collision {
                first,
                second,
                image,
            }),
    }
}

fn transitivity_rung(table: &InducedPermutation) -> Rung {
    let failure = match table.cycle_lengths() {
        None => table
            .first_collision()
            .map(|(first, second, image)| Failure::Collision {
                first,
                second,
                image,
            }),
        Some(c) if c.len() == 1 => None,
        Some(c) => Some(Failure::Cycles {
            count: c.len(),
            lengths: c.iter().rev().copied().collect(),
        }),
    };
    Rung {
        level: table.level(),
        failure,
    }
}

/// Smallest-level compatibility counterexample among states of the top
/// table, given tables for every level `1..=n` in order.
fn compatibility_failure(tables: &[InducedPermutation]) -> Option<Incompatibility> {
    let top = tables.last()?;
    let n = top.level();
    let (p, k) = (top.p(), top.arity());
    for m in 1..n {
        let lower = &tables[m - 1];
        let modulus = lower.len() as u64;
        for (i, &y) in top.image().iter().enumerate() {
            let i = i as u64;
            let expected = y % modulus;
            let found = lower.apply(i % modulus);
            if expected != found {
                let state = PAdicVec::from_index(p, k, n, i).expect("in range");
                return Some(Incompatibility {
                    state,
                    level: m,
                    reduced_image: PAdicVec::from_index(p, k, m, expected).expect("in range"),
                    image_of_reduced: PAdicVec::from_index(p, k, m, found).expect("in range"),
                });
            }
        }
    }
    None
}

fn tables_up_to(f: &dyn CompatibleMap, max_level: usize) -> Result<Vec<InducedPermutation>> {
    if max_level == 0 {
        return Err(Error::ZeroPrecision);
    }
    state_count(f.prime(), f.arity(), max_level)?;
    (1..=max_level)
        .map(|n| InducedPermutation::build(f, n))
        .collect()
}

/// Outcome of [`check_compatibility`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompatibilityCheck {
    pub level: usize,
    pub counterexample: Option<Incompatibility>,
}

impl CompatibilityCheck {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Verifies `F(x) mod p^m = F(x mod p^m)` for every state `x` mod `p^n` and
/// every `m <= n`. The counterexample, if any, has the smallest failing `m`.
pub fn check_compatibility(f: &dyn CompatibleMap, n: usize) -> Result<CompatibilityCheck> {
    let tables = tables_up_to(f, n)?;
    Ok(CompatibilityCheck {
        level: n,
        counterexample: compatibility_failure(&tables),
    })
}

pub fn induced_permutation(f: &dyn CompatibleMap, n: usize) -> Result<InducedPermutation> {
    InducedPermutation::build(f, n)
}

pub fn is_bijective_mod(f: &dyn CompatibleMap, n: usize) -> Result<bool> {
    Ok(InducedPermutation::build(f, n)?.is_bijective())
}

pub fn is_transitive_mod(f: &dyn CompatibleMap, n: usize) -> Result<bool> {
    Ok(InducedPermutation::build(f, n)?.is_transitive())
}

/// Compatibility, bijectivity and transitivity certificates from one set of
/// induced tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Analysis {
    pub compatible: Certificate,
    pub bijective: Certificate,
    pub transitive: Certificate,
}

impl Analysis {
    pub fn passed(&self) -> bool {
        self.compatible.passed() && self.bijective.passed() && self.transitive.passed()
    }

    pub fn render(&self) -> String {
        [&self.compatible, &self.bijective, &self.transitive]
            .iter()
            .map(|c| c.render())
            .collect::<Vec<_>>()
            .join("\n")
    }
}

fn certificate(f: &dyn CompatibleMap, property: Property, rungs: Vec<Rung>) -> Certificate {
    Certificate {
        property,
        subject: f.describe(),
        p: f.prime(),
        arity: f.arity(),
        rungs,
    }
}

pub fn analyze(f: &dyn CompatibleMap, max_level: usize) -> Result<Analysis> {
    let tables = tables_up_to(f, max_level)?;
    let compatible = (1..=max_level)
        .map(|n| Rung {
            level: n,
            failure: compatibility_failure(&tables[..n]).map(Failure::Incompatible),
        })
        .collect();
    Ok(Analysis {
        compatible: certificate(f, Property::Compatible, compatible),
        bijective: certificate(
            f,
            Property::Bijective,
            tables.iter().map(bijectivity_rung).collect(),
        ),
        transitive: certificate(
            f,
            Property::Transitive,
            tables.iter().map(transitivity_rung).collect(),
        ),
    })
}

/// Bijectivity for `n = 1..=N`: finite evidence of measure preservation.
pub fn measure_preservation_ladder(f: &dyn CompatibleMap, max_level: usize) -> Result<Certificate> {
    let rungs = tables_up_to(f, max_level)?
        .iter()
        .map(bijectivity_rung)
        .collect();
    Ok(certificate(f, Property::Bijective, rungs))
}

/// Single-cycle transitivity for `n = 1..=N`: finite evidence of ergodicity.
pub fn ergodicity_ladder(f: &dyn CompatibleMap, max_level: usize) -> Result<Certificate> {
    let rungs = tables_up_to(f, max_level)?
        .iter()
        .map(transitivity_rung)
        .collect();
    Ok(certificate(f, Property::Transitive, rungs))
}

/// Transitivity rungs at the given precisions only.
pub fn transitivity_at(f: &dyn CompatibleMap, levels: &[usize]) -> Result<Certificate> {
    let rungs = levels
        .iter()
        .map(|&n| InducedPermutation::build(f, n).map(|t| transitivity_rung(&t)))
        .collect::<Result<_>>()?;
    Ok(certificate(f, Property::Transitive, rungs))
}

pub fn compatibility_ladder(f: &dyn CompatibleMap, max_level: usize) -> Result<Certificate> {
    let tables = tables_up_to(f, max_level)?;
    let rungs = (1..=max_level)
        .map(|n| Rung {
            level: n,
            failure: compatibility_failure(&tables[..n]).map(Failure::Incompatible),
        })
        .collect();
    Ok(certificate(f, Property::Compatible, rungs))
}

/// Visit counts over one full period of a transitive induced map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equidistribution {
    pub p: u32,
    pub arity: usize,
    pub level: usize,
    pub period: u64,
    /// Visits per state at the full level.
    pub visits: Vec<u64>,
    /// `(m, visits per residue mod p^{km})` for `m = 1..level-1`.
    pub coarse: Vec<(usize, Vec<u64>)>,
}

impl Equidistribution {
    /// Every state visited once, and every residue mod `p^{km}` exactly
    /// `p^{k(n-m)}` times.
    pub fn is_uniform(&self) -> bool {
        self.visits.iter().all(|&c| c == 1)
            && self.coarse.iter().all(|(_, counts)| {
                let expected = self.period / counts.len() as u64;
                counts.iter().all(|&c| c == expected)
            })
    }
}

/// Walks one period from the zero state and counts visits at every coarser
/// level. Requires the induced map mod `p^n` to be a single cycle.
pub fn equidistribution_report(f: &dyn CompatibleMap, n: usize) -> Result<Equidistribution> {
    let table = InducedPermutation::build(f, n)?;
    if !table.is_transitive() {
        return Err(Error::NotTransitive(format!(
            "{} is not a single cycle modulo p^{n}",
            f.describe()
        )));
    }
    let period = table.len() as u64;
    let mut visits = vec![0u64; table.len()];
    let mut coarse: Vec<(usize, Vec<u64>)> = (1..n)
        .map(|m| {
            let size = checked_pow(table.p(), table.arity() * m).expect("below the level");
            (m, vec![0u64; size as usize])
        })
        .collect();
    let mut s = 0u64;
    for _ in 0..period {
        visits[s as usize] += 1;
        for (_, counts) in coarse.iter_mut() {
            let modulus = counts.len() as u64;
            counts[(s % modulus) as usize] += 1;
        }
        s = table.apply(s);
    }
    Ok(Equidistribution {
        p: table.p(),
        arity: table.arity(),
        level: n,
        period,
        visits,
        coarse,
    })
}

/// Writes tables as `p k n` header lines, each followed by a line of
/// `p^{kn}` image indices in canonical state order.
pub fn write_tables<W: Write>(mut w: W, tables: &[InducedPermutation]) -> io::Result<()> {
    for t in tables {
        writeln!(w, "{} {} {}", t.p(), t.arity(), t.level())?;
        let line: Vec<String> = t.image().iter().map(u64::to_string).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}

pub fn read_tables<R: BufRead>(r: R) -> Result<Vec<InducedPermutation>> {
    let mut text = String::new();
    for line in r.lines() {
        let line = line.map_err(|e| Error::Syntax(e.to_string()))?;
        text.push_str(&line);
        text.push('\n');
    }
    let mut words = text.split_whitespace();
    let mut tables = Vec::new();
    let parse = |w: Option<&str>, what: &str| -> Result<u64> {
        w.ok_or_else(|| Error::Syntax(format!("missing {what}")))?
            .parse()
            .map_err(|_| Error::Syntax(format!("bad {what}")))
    };
    while let Some(p) = words.next() {
        let p = parse(Some(p), "p")? as u32;
        let k = parse(words.next(), "k")? as usize;
        let n = parse(words.next(), "n")? as usize;
        if n == 0 || k == 0 {
            return Err(Error::Syntax("k and n must be positive".into()));
        }
        let size = state_count(p, k, n)?;
        let image = (0..size)
            .map(|_| parse(words.next(), "image index"))
            .collect::<Result<Vec<_>>>()?;
        tables.push(InducedPermutation::from_image(p, k, n, image)?);
    }
    Ok(tables)
}
