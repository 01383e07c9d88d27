mod common;

use std::sync::Arc;

use padic_ergodic::analysis::{induced_permutation, is_bijective_mod};
use padic_ergodic::fixtures;
use padic_ergodic::map::{Interleaved, MapRef, Memoized};
use padic_ergodic::transfer::lift;
use padic_ergodic::twist::{invert, orbit_coords, step, twisted_map, Twist, TwistPermutation};
use padic_ergodic::PAdicVec;
use proptest::prelude::*;

use common::{permutations, successor_twist};

fn permutation(p: u32, k: usize) -> impl Strategy<Value = TwistPermutation> {
    let len = (p as usize).pow(k as u32);
    Just((1..=len).collect::<Vec<_>>())
        .prop_shuffle()
        .prop_map(move |v| TwistPermutation::new(p, v).unwrap())
}

fn dynamic(name: &str) -> MapRef {
    Memoized::wrap(fixtures::by_name(name).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn laws_on_ternary_pairs(
        a in permutation(3, 2),
        b in permutation(3, 2),
        seed in any::<u64>(),
        n in 1usize..=3,
        name in prop::sample::select(vec!["interleaved-odometer-3-2", "interleaved-affine-3-2"]),
    ) {
        let d = dynamic(name);
        let ta = Twist::new(d.clone(), a.clone()).unwrap();
        let tb = Twist::new(d.clone(), b.clone()).unwrap();
        let inv = Twist::new(d.clone(), a.inverse()).unwrap();
        let both = Twist::new(d.clone(), b.compose(&a).unwrap()).unwrap();
        let y = PAdicVec::from_index(3, 2, n, seed % 9u64.pow(n as u32)).unwrap();
        let t = ta.apply(&y, n).unwrap();
        prop_assert_eq!(inv.apply(&t, n).unwrap(), y.clone());
        prop_assert_eq!(tb.apply(&t, n).unwrap(), both.apply(&y, n).unwrap());
        let before = ta.segment_coords(&y, n).unwrap();
        let after = ta.segment_coords(&t, n).unwrap();
        prop_assert_eq!(&before.anchor, &after.anchor);
        prop_assert_eq!(after.position, a.apply(before.position));
    }

    #[test]
    fn univariate_twist_matches_closed_form(a in permutation(2, 3), v in any::<u64>(), n in 1usize..=4) {
        // The odometer on indices: y -> y - i + P(i) with i = y mod 8 (8 for 0).
        let d = fixtures::odometer(2).unwrap();
        let level = 3 * n;
        let modulus = 1u64 << level;
        let y = PAdicVec::from_u64s(2, level, &[v % modulus]).unwrap();
        let t = Twist::new(d, a.clone()).unwrap().apply(&y, level).unwrap();
        prop_assert_eq!(t.index(), successor_twist(a.images(), v % modulus, modulus));
    }

    #[test]
    fn twisted_maps_stay_bijective(a in permutation(2, 2), n in 1usize..=4) {
        for name in ["interleaved-odometer-2-2", "interleaved-affine-2-2", "swap-shift"] {
            let tm = twisted_map(fixtures::by_name(name).unwrap(), a.clone()).unwrap();
            prop_assert!(is_bijective_mod(&tm, n).unwrap());
        }
    }

    // Conjugating the twisted map is the twist over the conjugated dynamic.
    #[test]
    fn commutes_with_interleaving(a in permutation(2, 2), n in 1usize..=4) {
        for name in ["interleaved-odometer-2-2", "interleaved-affine-2-2", "swap-shift"] {
            let f = fixtures::by_name(name).unwrap();
            let lifted = lift(f.clone(), a.clone()).unwrap();
            let conjugated: MapRef = Arc::new(Interleaved::new(f));
            let other = twisted_map(conjugated, a.clone()).unwrap();
            prop_assert_eq!(
                induced_permutation(lifted.as_ref(), 2 * n).unwrap(),
                induced_permutation(&other, 2 * n).unwrap()
            );
        }
    }

    #[test]
    fn invert_undoes_evaluation(v in any::<u64>(), n in 1usize..=40) {
        for name in ["odometer", "affine-2"] {
            let f = fixtures::by_name(name).unwrap();
            let x = PAdicVec::from_u64s(2, 64, &[v]).unwrap().reduce(n).unwrap();
            let y = f.eval(&x, n).unwrap();
            prop_assert_eq!(invert(f.as_ref(), &y, n).unwrap(), x.clone());
            prop_assert_eq!(step(f.as_ref(), &y, -1, n).unwrap(), x);
        }
    }

    #[test]
    fn invert_lifts_whole_blocks(idx in 0u64..(1 << 12)) {
        let f = fixtures::by_name("interleaved-affine-2-3").unwrap();
        let x = PAdicVec::from_index(2, 3, 4, idx).unwrap();
        let y = f.eval(&x, 4).unwrap();
        prop_assert_eq!(invert(f.as_ref(), &y, 4).unwrap(), x);
    }

    #[test]
    fn orbit_coords_reconstruct(v in any::<u64>(), n in 2usize..=12, k in 1usize..=3) {
        let f = fixtures::affine(2).unwrap();
        let x = PAdicVec::from_u64s(2, 64, &[v]).unwrap().reduce(n.max(k)).unwrap();
        let c = orbit_coords(f.as_ref(), &x, k).unwrap();
        prop_assert!(c.index < 1 << k);
        prop_assert!(c.base.component(0).reduce(k).unwrap().is_zero());
        prop_assert_eq!(step(f.as_ref(), &c.base, c.index as i64, n.max(k)).unwrap(), x);
    }
}

#[test]
fn every_binary_twist_keeps_segments() {
    let d = fixtures::interleaved_odometer(2, 2).unwrap();
    for images in permutations(4) {
        let p = TwistPermutation::new(2, images).unwrap();
        let twist = Twist::new(d.clone(), p.clone()).unwrap();
        for idx in 0..256 {
            let y = PAdicVec::from_index(2, 2, 4, idx).unwrap();
            let t = twist.apply(&y, 4).unwrap();
            // Index arithmetic oracle: the dynamic is +1 on indices.
            assert_eq!(t.index(), successor_twist(p.images(), idx, 256));
        }
    }
}
