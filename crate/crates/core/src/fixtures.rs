//! Named maps used in tests, examples and the command line.
//!
//! No short T-function expression is a single cycle on `Z_2^2`, so the
//! multivariate ergodic fixtures are conjugates of univariate ones.

use std::sync::Arc;

use crate::dsl::parse;
use crate::error::{Error, Result};
use crate::map::{Conjugated, MapRef};

fn spec(src: &str) -> Result<MapRef> {
    Ok(Arc::new(parse(src)?))
}

/// `x + 1` on `Z_p`.
pub fn odometer(p: u32) -> Result<MapRef> {
    translation(p, 1)
}

/// `x + c` on `Z_p`.
pub fn translation(p: u32, c: u64) -> Result<MapRef> {
    spec(&format!("p={p} k=1; f0 = x0 + {c}"))
}

/// `x + x` on `Z_2`: not injective modulo 2.
pub fn doubling() -> Result<MapRef> {
    spec("p=2 k=1; f0 = x0 + x0")
}

/// `x + 2` on `Z_2`: bijective, two cycles modulo 2.
pub fn plus_two() -> Result<MapRef> {
    translation(2, 2)
}

/// `H_k^{-1} ∘ (x + 1) ∘ H_k` on `Z_p^k`.
pub fn interleaved_odometer(p: u32, k: usize) -> Result<MapRef> {
    Ok(Arc::new(Conjugated::new(odometer(p)?, k)?))
}

/// The ergodic affine map `5x + 3` (`p = 2`) or `(1 + p)x + 1` (odd `p`).
pub fn affine(p: u32) -> Result<MapRef> {
    if p == 2 {
        spec("p=2 k=1; f0 = 5 * x0 + 3")
    } else {
        spec(&format!("p={p} k=1; f0 = {} * x0 + 1", p + 1))
    }
}

/// [`affine`] conjugated onto `Z_p^k`.
pub fn interleaved_affine(p: u32, k: usize) -> Result<MapRef> {
    Ok(Arc::new(Conjugated::new(affine(p)?, k)?))
}

/// `x_i + c` in every coordinate of `Z_p^k`.
pub fn coordinate_shift(p: u32, k: usize, c: u64) -> Result<MapRef> {
    if k == 0 {
        return Err(Error::EmptyVector);
    }
    let coords: Vec<String> = (0..k).map(|i| format!("f{i} = x{i} + {c}")).collect();
    spec(&format!("p={p} k={k}; {}", coords.join("; ")))
}

/// `(x_1, x_0 + 1)` on `Z_2^2`: one cycle modulo 2, two modulo 4.
pub fn swap_shift() -> Result<MapRef> {
    spec("p=2 k=2; f0 = x1; f1 = x0 + 1")
}

/// Fixture names with a one-line description; `<p>`, `<k>` and `<c>` are
/// numeric parameters.
pub fn catalog() -> &'static [(&'static str, &'static str)] {
    &[
        ("odometer", "x + 1 on Z_2"),
        ("odometer-<p>", "x + 1 on Z_p"),
        ("translation-<p>-<c>", "x + c on Z_p"),
        ("doubling", "x + x on Z_2"),
        ("plus-two", "x + 2 on Z_2"),
        ("affine-<p>", "5x + 3 (p = 2) or (1 + p)x + 1 on Z_p"),
        (
            "interleaved-odometer-<p>-<k>",
            "x + 1 conjugated onto Z_p^k",
        ),
        (
            "interleaved-affine-<p>-<k>",
            "affine-<p> conjugated onto Z_p^k",
        ),
        (
            "coordinate-shift-<p>-<k>-<c>",
            "x_i + c in every coordinate of Z_p^k",
        ),
        ("swap-shift", "(x1, x0 + 1) on Z_2^2"),
    ]
}

fn numbers(rest: &str, count: usize, name: &str) -> Result<Vec<u64>> {
    let parts: Vec<&str> = rest.split('-').collect();
    if parts.len() != count {
        return Err(Error::UnknownFixture(name.into()));
    }
    parts
        .iter()
        .map(|s| s.parse().map_err(|_| Error::UnknownFixture(name.into())))
        .collect()
}

/// Looks up a fixture by its [`catalog`] name.
pub fn by_name(name: &str) -> Result<MapRef> {
    let prime = |v: u64| u32::try_from(v).map_err(|_| Error::InvalidPrime(u32::MAX));
    let arity = |v: u64| usize::try_from(v).map_err(|_| Error::UnknownFixture(name.into()));
    match name {
        "odometer" => return odometer(2),
        "doubling" => return doubling(),
        "plus-two" => return plus_two(),
        "swap-shift" => return swap_shift(),
        _ => {}
    }
    let families: [(&str, usize); 6] = [
        ("interleaved-odometer-", 2),
        ("interleaved-affine-", 2),
        ("coordinate-shift-", 3),
        ("translation-", 2),
        ("odometer-", 1),
        ("affine-", 1),
    ];
    for (prefix, count) in families {
        if let Some(rest) = name.strip_prefix(prefix) {
            let v = numbers(rest, count, name)?;
            return match prefix {
                "interleaved-odometer-" => interleaved_odometer(prime(v[0])?, arity(v[1])?),
                "interleaved-affine-" => interleaved_affine(prime(v[0])?, arity(v[1])?),
                "coordinate-shift-" => coordinate_shift(prime(v[0])?, arity(v[1])?, v[2]),
                "translation-" => translation(prime(v[0])?, v[1]),
                "odometer-" => odometer(prime(v[0])?),
                _ => affine(prime(v[0])?),
            };
        }
    }
    Err(Error::UnknownFixture(name.into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{ergodicity_ladder, measure_preservation_ladder};

    #[test]
    fn ergodic_fixtures_pass() {
        for name in [
            "odometer",
            "odometer-3",
            "affine-2",
            "affine-5",
            "interleaved-odometer-2-2",
            "interleaved-odometer-3-2",
            "interleaved-affine-2-3",
        ] {
            let f = by_name(name).unwrap();
            let cert = ergodicity_ladder(f.as_ref(), 3).unwrap();
            assert!(cert.passed(), "{name}\n{}", cert.render());
        }
    }

    #[test]
    fn negative_fixtures_fail_where_expected() {
        let cases = [
            ("plus-two", Some(1), None),
            ("doubling", Some(1), Some(1)),
            ("coordinate-shift-2-2-2", Some(1), None),
            ("swap-shift", Some(2), None),
        ];
        for (name, transitive, bijective) in cases {
            let f = by_name(name).unwrap();
            assert_eq!(
                ergodicity_ladder(f.as_ref(), 3).unwrap().first_failure(),
                transitive
            );
            assert_eq!(
                measure_preservation_ladder(f.as_ref(), 3)
                    .unwrap()
                    .first_failure(),
                bijective,
                "{name}"
            );
        }
    }

    #[test]
    fn unknown_names() {
        for name in [
            "odometre",
            "odometer-4",
            "interleaved-odometer-2",
            "swap-shift-2",
        ] {
            assert!(by_name(name).is_err(), "{name}");
        }
        assert!(matches!(by_name("nope"), Err(Error::UnknownFixture(_))));
    }
}
