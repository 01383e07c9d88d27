use padic_ergodic::{deinterleave, interleave, PAdicInt, PAdicVec};
use proptest::prelude::*;

const PRIMES: [u32; 6] = [2, 3, 5, 7, 13, 251];

/// `(p, n, p^n)` with `p^n <= 2^63`, so products of residues fit in u128.
fn ring() -> impl Strategy<Value = (u32, usize, u128)> {
    prop::sample::select(PRIMES.to_vec()).prop_flat_map(|p| {
        let mut max = 0;
        while (p as u128).pow(max + 1) <= 1 << 63 {
            max += 1;
        }
        (Just(p), 1..=max as usize).prop_map(|(p, n)| (p, n, (p as u128).pow(n as u32)))
    })
}

fn elem(p: u32, n: usize, v: u128) -> PAdicInt {
    PAdicInt::from_u128(p, n, v).unwrap()
}

fn value(x: &PAdicInt) -> u128 {
    x.digits()
        .iter()
        .rev()
        .fold(0u128, |acc, &d| acc * x.p() as u128 + d as u128)
}

proptest! {
    #[test]
    fn arithmetic_matches_integers((p, n, m) in ring(), a in any::<u128>(), b in any::<u128>()) {
        let (a, b) = (a % m, b % m);
        let (x, y) = (elem(p, n, a), elem(p, n, b));
        prop_assert_eq!(value(&x.add(&y).unwrap()), (a + b) % m);
        prop_assert_eq!(value(&x.sub(&y).unwrap()), (a + m - b) % m);
        prop_assert_eq!(value(&x.mul(&y).unwrap()), a * b % m);
        prop_assert_eq!(value(&x.neg()), (m - a) % m);
    }

    #[test]
    fn ring_laws((p, n, m) in ring(), a in any::<u128>(), b in any::<u128>(), c in any::<u128>()) {
        let (x, y, z) = (elem(p, n, a % m), elem(p, n, b % m), elem(p, n, c % m));
        prop_assert_eq!(x.add(&y).unwrap(), y.add(&x).unwrap());
        prop_assert_eq!(x.mul(&y).unwrap(), y.mul(&x).unwrap());
        prop_assert_eq!(x.add(&y).unwrap().add(&z).unwrap(), x.add(&y.add(&z).unwrap()).unwrap());
        prop_assert_eq!(x.mul(&y).unwrap().mul(&z).unwrap(), x.mul(&y.mul(&z).unwrap()).unwrap());
        prop_assert_eq!(
            x.mul(&y.add(&z).unwrap()).unwrap(),
            x.mul(&y).unwrap().add(&x.mul(&z).unwrap()).unwrap()
        );
        prop_assert_eq!(x.sub(&y).unwrap().add(&y).unwrap(), x.clone());
        prop_assert!(x.add(&x.neg()).unwrap().is_zero());
    }

    #[test]
    fn reduction_is_a_ring_map((p, n, m) in ring(), a in any::<u128>(), b in any::<u128>(), cut in 1usize..64) {
        let k = 1 + cut % n;
        let (x, y) = (elem(p, n, a % m), elem(p, n, b % m));
        let r = |v: &PAdicInt| v.reduce(k).unwrap();
        prop_assert_eq!(r(&x.add(&y).unwrap()), r(&x).add(&r(&y)).unwrap());
        prop_assert_eq!(r(&x.mul(&y).unwrap()), r(&x).mul(&r(&y)).unwrap());
        prop_assert_eq!(value(&r(&x)), (a % m) % (p as u128).pow(k as u32));
    }

    #[test]
    fn strong_triangle((p, n, m) in ring(), a in any::<u128>(), b in any::<u128>(), c in any::<u128>()) {
        let (x, y, z) = (elem(p, n, a % m), elem(p, n, b % m), elem(p, n, c % m));
        let d = |u: &PAdicInt, v: &PAdicInt| u.distance(v).unwrap();
        prop_assert!(d(&x, &z) >= d(&x, &y).min(d(&y, &z)));
        prop_assert_eq!(d(&x, &y), x.sub(&y).unwrap().valuation());
    }

    #[test]
    fn bitwise_matches_integers(n in 1usize..=64, a in any::<u64>(), b in any::<u64>()) {
        let mask = if n == 64 { u64::MAX } else { (1 << n) - 1 };
        let (a, b) = (a & mask, b & mask);
        let (x, y) = (PAdicInt::from_u64(2, n, a).unwrap(), PAdicInt::from_u64(2, n, b).unwrap());
        prop_assert_eq!(x.xor(&y).unwrap().to_u64(), Some(a ^ b));
        prop_assert_eq!(x.and(&y).unwrap().to_u64(), Some(a & b));
        prop_assert_eq!(x.or(&y).unwrap().to_u64(), Some(a | b));
        prop_assert_eq!(x.not().unwrap().to_u64(), Some(!a & mask));
    }

    #[test]
    fn text_round_trip((p, n, m) in ring(), values in prop::collection::vec(any::<u128>(), 1..4)) {
        let comps: Vec<PAdicInt> = values.iter().map(|&v| elem(p, n, v % m)).collect();
        let x = comps[0].clone();
        prop_assert_eq!(x.to_string().parse::<PAdicInt>().unwrap(), x);
        let v = PAdicVec::new(comps).unwrap();
        prop_assert_eq!(v.to_string().parse::<PAdicVec>().unwrap(), v);
    }

    #[test]
    fn interleave_round_trip(p in prop::sample::select(vec![2u32, 3, 5]), k in 1usize..5, n in 1usize..8, seed in any::<u64>()) {
        let count = (p as u64).checked_pow((k * n) as u32);
        prop_assume!(count.is_some());
        let count = count.unwrap();
        let x = PAdicVec::from_index(p, k, n, seed % count).unwrap();
        let h = interleave(&x);
        prop_assert_eq!(h.precision(), k * n);
        prop_assert_eq!(h.to_u64(), Some(x.index()));
        prop_assert_eq!(deinterleave(&h, k).unwrap(), x.clone());
        for m in 1..=n {
            prop_assert_eq!(interleave(&x.reduce(m).unwrap()), h.reduce(k * m).unwrap());
        }
    }
}
