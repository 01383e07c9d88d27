//! Moving ergodic dynamics between `Z_p^k` and `Z_p`.
//!
//! `lift(F, P) = H_k ∘ T_{k,P} ∘ F ∘ H_k^{-1}` and `push` undoes it. Writing a
//! point of `Z_p^k` as an anchor `a` (zero residue) plus an offset
//! `j in 0..p^k` along the residue cycle of `F`, the twisted map `T_{k,P}∘F`
//! moves offset `j` to `P(j+1) mod p^k`, advancing the anchor by `F^{p^k}`
//! when the offset wraps to zero. Starting at zero it visits the offsets in
//! the order `π_0 = 0, π_{s+1} = P(π_s + 1) mod p^k`. Recovering `F` from the
//! lifted map is again a twist, over the lifted map itself, by
//! `Q = σ ∘ P^{-1} ∘ σ^{-1}` where `σ` sends an offset to its place in that
//! schedule.

use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;

use crate::analysis::{
    ergodicity_ladder, transitivity_at, Certificate, InducedPermutation, LADDER_LIMIT_LOG2,
};
use crate::error::{Error, Result};
use crate::map::{CompatibleMap, Conjugated, Interleaved, MapRef, Memoized};
use crate::padic::{checked_pow, PAdicVec};
use crate::twist::{solve_twist, ResidueCycle, TwistPermutation, TwistedMap};

fn check_permutation(map: &dyn CompatibleMap, perm: &TwistPermutation, k: usize) -> Result<()> {
    if map.prime() != perm.p() {
        return Err(Error::Mismatch {
            left_p: map.prime(),
            left_n: 0,
            right_p: perm.p(),
            right_n: 0,
        });
    }
    if perm.k() != k {
        return Err(Error::BadTwistParameter {
            k: perm.k(),
            arity: k,
        });
    }
    Ok(())
}

/// `G = H_k ∘ T_{k,P} ∘ F ∘ H_k^{-1}` on `Z_p`, where `k` is the arity of `F`.
///
/// `G` is evaluated at precision `kn` by running the twisted `F` at `n`;
/// other precisions go through the next multiple of `k`.
pub fn lift(f: MapRef, perm: TwistPermutation) -> Result<MapRef> {
    check_permutation(f.as_ref(), &perm, f.arity())?;
    let twisted = TwistedMap::new(f, perm)?;
    Ok(Arc::new(Interleaved::new(Arc::new(twisted))))
}

/// The offsets `π_0, ..., π_{p^k - 1}` visited by the twisted map from a
/// zero residue. Fails unless they are all distinct.
pub fn residue_schedule(perm: &TwistPermutation) -> Result<Vec<usize>> {
    let len = perm.len();
    let mut schedule = Vec::with_capacity(len);
    let mut offset = 0;
    for s in 0..len {
        if s > 0 && offset == 0 {
            return Err(Error::NotTransitive(format!(
                "{perm} returns to offset 0 after {s} of {len} steps"
            )));
        }
        schedule.push(offset);
        offset = perm.apply(offset + 1) % len;
    }
    Ok(schedule)
}

/// The twist `Q` with `T^G_{k,Q} ∘ G` conjugate to `F` when `G = lift(F, P)`.
pub fn pushed_permutation(perm: &TwistPermutation) -> Result<TwistPermutation> {
    let len = perm.len();
    let schedule = residue_schedule(perm)?;
    // π and σ as permutations of 1..=len, with π(len) = len.
    let pi = |t: usize| if t == len { len } else { schedule[t] };
    let mut sigma = vec![0; len + 1];
    for t in 1..=len {
        sigma[pi(t)] = t;
    }
    let inv = perm.inverse();
    let images = (1..=len).map(|t| sigma[inv.apply(pi(t))]).collect();
    TwistPermutation::new(perm.p(), images)
}

/// `F = H_k^{-1} ∘ T^G_{k,Q} ∘ G ∘ H_k` on `Z_p^k`: the inverse of [`lift`].
/// Requires `G` to be a single cycle modulo `p^k`.
pub fn push(g: MapRef, perm: TwistPermutation) -> Result<MapRef> {
    if g.arity() != 1 {
        return Err(Error::ArityMismatch {
            expected: 1,
            found: g.arity(),
        });
    }
    let k = perm.k();
    check_permutation(g.as_ref(), &perm, k)?;
    ResidueCycle::new(g.as_ref(), k)?;
    let q = pushed_permutation(&perm)?;
    let twisted = TwistedMap::new(g, q)?;
    Ok(Arc::new(Conjugated::new(Arc::new(twisted), k)?))
}

/// Largest `N` with `p^{kN}` within the default verification bound.
pub fn default_theorem_level(p: u32, k: usize) -> usize {
    (1..)
        .take_while(|&n| checked_pow(p, k * n).is_some_and(|s| s <= 1 << LADDER_LIMIT_LOG2))
        .last()
        .unwrap_or(1)
}

/// One rung of the transfer check: `F` mod `p^n` against `G` mod `p^{kn}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransferRung {
    pub level: usize,
    pub source_transitive: bool,
    pub lifted_transitive: bool,
}

impl TransferRung {
    pub fn agrees(&self) -> bool {
        self.source_transitive == self.lifted_transitive
    }
}

/// Outcome of [`verify_theorem`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TheoremReport {
    pub p: u32,
    pub k: usize,
    pub max_level: usize,
    pub permutation: TwistPermutation,
    /// First residue mod `p^k` where the lift disagrees with the target.
    pub target_mismatch: Option<u64>,
    pub rungs: Vec<TransferRung>,
    /// Transitivity of `F` at `1..=N`.
    pub source: Certificate,
    /// Transitivity of the lift at `k, 2k, ..., kN`.
    pub lifted: Certificate,
    /// First state mod `p^N` where pushing the lift back differs from `F`.
    pub round_trip_mismatch: Option<u64>,
}

impl TheoremReport {
    pub fn target_agrees(&self) -> bool {
        self.target_mismatch.is_none()
    }

    pub fn transfer_holds(&self) -> bool {
        self.rungs.iter().all(TransferRung::agrees)
    }

    pub fn round_trip_holds(&self) -> bool {
        self.round_trip_mismatch.is_none()
    }

    pub fn passed(&self) -> bool {
        self.target_agrees() && self.transfer_holds() && self.round_trip_holds()
    }

    pub fn render(&self) -> String {
        let verdict = |ok: bool| if ok { "pass" } else { "fail" };
        let state = |arity: usize, level: usize, idx: u64| {
            PAdicVec::from_index(self.p, arity, level, idx)
                .map(|s| s.to_string())
                .unwrap_or_else(|_| idx.to_string())
        };
        let mut out = String::new();
        let _ = writeln!(out, "report: transfer");
        let _ = writeln!(out, "subject: {}", self.source.subject);
        let _ = writeln!(out, "p: {}", self.p);
        let _ = writeln!(out, "k: {}", self.k);
        let _ = writeln!(out, "levels: 1..{}", self.max_level);
        let _ = writeln!(out, "permutation: {}", self.permutation);
        match self.target_mismatch {
            None => {
                let _ = writeln!(out, "check.target: pass");
            }
            Some(idx) => {
                let _ = writeln!(out, "check.target: fail at {}", state(1, self.k, idx));
            }
        }
        for rung in &self.rungs {
            let _ = writeln!(
                out,
                "check.transfer.{}: F mod p^{} {}, G mod p^{} {}, {}",
                rung.level,
                rung.level,
                verdict(rung.source_transitive),
                rung.level * self.k,
                verdict(rung.lifted_transitive),
                if rung.agrees() { "agree" } else { "DISAGREE" }
            );
        }
        match self.round_trip_mismatch {
            None => {
                let _ = writeln!(out, "check.round-trip: pass");
            }
            Some(idx) => {
                let _ = writeln!(
                    out,
                    "check.round-trip: fail at {}",
                    state(self.k, self.max_level, idx)
                );
            }
        }
        let _ = writeln!(out, "ergodic: F {}, G {}", self.source.verdict(), {
            match self.lifted.first_failure() {
                Some(n) => format!("fail-at-{n}"),
                None => format!("pass-up-to-{}", self.lifted.max_level()),
            }
        });
        let _ = writeln!(out, "verdict: {}", verdict(self.passed()));
        out
    }
}

fn first_difference(a: &InducedPermutation, b: &InducedPermutation) -> Option<u64> {
    a.image()
        .par_iter()
        .zip(b.image().par_iter())
        .position_first(|(x, y)| x != y)
        .map(|i| i as u64)
}

/// Solves for `P` against the target, lifts `F`, and checks at finite
/// precision that the lift matches the target mod `p^k`, that transitivity
/// of `F` mod `p^n` and of the lift mod `p^{kn}` agree for every `n <= N`,
/// and that pushing the lift back recovers `F` mod `p^N`.
pub fn verify_theorem(f: MapRef, target: MapRef, max_level: usize) -> Result<TheoremReport> {
    let p = f.prime();
    let k = f.arity();
    if max_level == 0 {
        return Err(Error::ZeroPrecision);
    }
    crate::analysis::state_count(p, k, max_level)?;
    if target.arity() != 1 {
        return Err(Error::ArityMismatch {
            expected: 1,
            found: target.arity(),
        });
    }
    let f = Memoized::wrap(f);
    let target = Memoized::wrap(target);

    let base = ergodicity_ladder(f.as_ref(), 1)?;
    if !base.passed() {
        return Err(Error::Precondition {
            what: "F must be transitive modulo p".into(),
            certificate: Box::new(base),
        });
    }
    let target_cert = transitivity_at(target.as_ref(), &[k])?;
    if !target_cert.passed() {
        return Err(Error::Precondition {
            what: format!("the target must be transitive modulo p^{k}"),
            certificate: Box::new(target_cert),
        });
    }

    let permutation = solve_twist(f.clone(), target.as_ref())?;
    let g = Memoized::wrap(lift(f.clone(), permutation.clone())?);

    let target_mismatch = first_difference(
        &InducedPermutation::build(g.as_ref(), k)?,
        &InducedPermutation::build(target.as_ref(), k)?,
    );

    let source = ergodicity_ladder(f.as_ref(), max_level)?;
    let lifted_levels: Vec<usize> = (1..=max_level).map(|n| k * n).collect();
    let lifted = transitivity_at(g.as_ref(), &lifted_levels)?;
    let rungs = source
        .rungs
        .iter()
        .zip(&lifted.rungs)
        .map(|(s, l)| TransferRung {
            level: s.level,
            source_transitive: s.passed(),
            lifted_transitive: l.passed(),
        })
        .collect();

    let pushed = push(g, permutation.clone())?;
    let round_trip_mismatch = first_difference(
        &InducedPermutation::build(pushed.as_ref(), max_level)?,
        &InducedPermutation::build(f.as_ref(), max_level)?,
    );

    Ok(TheoremReport {
        p,
        k,
        max_level,
        permutation,
        target_mismatch,
        rungs,
        source,
        lifted,
        round_trip_mismatch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{induced_permutation, is_transitive_mod};
    use crate::dsl::parse;

    fn spec(src: &str) -> MapRef {
        Arc::new(parse(src).unwrap())
    }

    fn interleaved_odometer() -> MapRef {
        Arc::new(Conjugated::new(spec("p=2 k=1; f0 = x0 + 1"), 2).unwrap())
    }

    fn perm(images: &[usize]) -> TwistPermutation {
        TwistPermutation::new(2, images.to_vec()).unwrap()
    }

    #[test]
    fn schedule_and_pushed_permutation() {
        assert_eq!(
            residue_schedule(&perm(&[3, 4, 1, 2])).unwrap(),
            vec![0, 3, 2, 1]
        );
        assert_eq!(
            residue_schedule(&perm(&[1, 2, 3, 4])).unwrap(),
            vec![0, 1, 2, 3]
        );
        assert!(residue_schedule(&perm(&[4, 2, 3, 1])).is_err());
        assert!(pushed_permutation(&perm(&[1, 2, 3, 4]))
            .unwrap()
            .is_identity());
        // Q is conjugate to P^-1.
        let q = pushed_permutation(&perm(&[3, 2, 4, 1])).unwrap();
        assert_eq!(q.len(), 4);
    }

    #[test]
    fn lift_of_worked_example() {
        let g = lift(interleaved_odometer(), perm(&[3, 4, 1, 2])).unwrap();
        for v in 0..16u64 {
            let x = PAdicVec::from_u64s(2, 4, &[v]).unwrap();
            let expected = if v % 4 < 2 { (v + 3) % 16 } else { v - 1 };
            assert_eq!(g.eval(&x, 4).unwrap().to_u64s(), Some(vec![expected]));
        }
        assert!(is_transitive_mod(g.as_ref(), 4).unwrap());
    }

    #[test]
    fn lift_identity_is_successor() {
        let g = lift(interleaved_odometer(), perm(&[1, 2, 3, 4])).unwrap();
        for n in [2, 4, 6] {
            let t = induced_permutation(g.as_ref(), n).unwrap();
            let size = 1u64 << n;
            assert!(t
                .image()
                .iter()
                .enumerate()
                .all(|(i, &v)| v == (i as u64 + 1) % size));
        }
    }

    #[test]
    fn lift_rejects_wrong_size() {
        let p = TwistPermutation::new(2, vec![2, 1]).unwrap();
        assert!(lift(interleaved_odometer(), p).is_err());
    }

    #[test]
    fn push_successor_is_interleaved_odometer() {
        let f = push(spec("p=2 k=1; f0 = x0 + 1"), perm(&[1, 2, 3, 4])).unwrap();
        let odo = interleaved_odometer();
        for n in 1..=4 {
            assert_eq!(
                induced_permutation(f.as_ref(), n).unwrap(),
                induced_permutation(odo.as_ref(), n).unwrap()
            );
        }
        assert!(matches!(
            push(spec("p=2 k=1; f0 = x0 + 2"), perm(&[1, 2, 3, 4])),
            Err(Error::NotTransitive(_))
        ));
    }

    #[test]
    fn round_trips() {
        let f = interleaved_odometer();
        for images in [[3, 4, 1, 2], [3, 2, 4, 1], [1, 3, 4, 2]] {
            let p = perm(&images);
            let g = lift(f.clone(), p.clone()).unwrap();
            let back = push(g.clone(), p.clone()).unwrap();
            for n in 1..=4 {
                assert_eq!(
                    induced_permutation(back.as_ref(), n).unwrap(),
                    induced_permutation(f.as_ref(), n).unwrap(),
                    "{p} at n={n}"
                );
            }
            let again = lift(back, p.clone()).unwrap();
            for n in [2, 4, 6] {
                assert_eq!(
                    induced_permutation(again.as_ref(), n).unwrap(),
                    induced_permutation(g.as_ref(), n).unwrap()
                );
            }
        }
    }

    #[test]
    fn default_level_bound() {
        assert_eq!(default_theorem_level(2, 2), 10);
        assert_eq!(default_theorem_level(3, 2), 6);
        assert_eq!(default_theorem_level(2, 1), 20);
    }

    #[test]
    fn theorem_runs() {
        let f = interleaved_odometer();
        let r = verify_theorem(f.clone(), spec("p=2 k=1; f0 = x0 + 1"), 4).unwrap();
        assert!(r.passed(), "{}", r.render());
        assert!(r.permutation.is_identity());
        let r = verify_theorem(f, spec("p=2 k=1; f0 = x0 + 3"), 4).unwrap();
        assert!(r.passed());
        assert_eq!(r.permutation.images(), &[3, 4, 1, 2]);
        let text = r.render();
        assert!(text.contains("permutation: P: 3 4 1 2"));
        assert!(text.ends_with("verdict: pass\n"));
    }

    #[test]
    fn theorem_reports_joint_failure() {
        let f = spec("p=2 k=2; f0 = x1; f1 = x0 + 1");
        let r = verify_theorem(f, spec("p=2 k=1; f0 = x0 + 1"), 3).unwrap();
        assert!(r.passed());
        assert_eq!(r.source.first_failure(), Some(2));
        assert_eq!(r.lifted.first_failure(), Some(4));
        assert!(r
            .render()
            .contains("check.transfer.2: F mod p^2 fail, G mod p^4 fail, agree"));
    }

    #[test]
    fn theorem_preconditions() {
        let bad = spec("p=2 k=2; f0 = x0 + 2; f1 = x1 + 2");
        match verify_theorem(bad, spec("p=2 k=1; f0 = x0 + 1"), 3) {
            Err(Error::Precondition { certificate, .. }) => {
                assert_eq!(certificate.first_failure(), Some(1))
            }
            other => panic!("{other:?}"),
        }
        match verify_theorem(interleaved_odometer(), spec("p=2 k=1; f0 = x0 + 2"), 3) {
            Err(Error::Precondition { certificate, .. }) => {
                assert_eq!(certificate.first_failure(), Some(2))
            }
            other => panic!("{other:?}"),
        }
    }
}
