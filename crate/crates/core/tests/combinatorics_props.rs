use proptest::prelude::*;

use srs_core::combinatorics::{
    binomial, config_ratio, configs_one_epoch, configs_with, configs_without, CountParams,
};

/// Little-endian base-1e9 naturals, just enough for binomials by the
/// multiplicative formula. Independent of num-bigint on purpose.
#[derive(Clone, Debug, PartialEq)]
struct Limbs(Vec<u64>);

const BASE: u64 = 1_000_000_000;

impl Limbs {
    fn one() -> Self {
        Limbs(vec![1])
    }

    fn mul_small(&mut self, m: u64) {
        let mut carry = 0u128;
        for limb in &mut self.0 {
            let v = *limb as u128 * m as u128 + carry;
            *limb = (v % BASE as u128) as u64;
            carry = v / BASE as u128;
        }
        while carry > 0 {
            self.0.push((carry % BASE as u128) as u64);
            carry /= BASE as u128;
        }
    }

    fn div_small(&mut self, d: u64) -> u64 {
        let mut rem = 0u128;
        for limb in self.0.iter_mut().rev() {
            let v = rem * BASE as u128 + *limb as u128;
            *limb = (v / d as u128) as u64;
            rem = v % d as u128;
        }
        while self.0.len() > 1 && *self.0.last().unwrap() == 0 {
            self.0.pop();
        }
        rem as u64
    }

    fn to_decimal(&self) -> String {
        let mut s = self.0.last().unwrap().to_string();
        for limb in self.0.iter().rev().skip(1) {
            s.push_str(&format!("{limb:09}"));
        }
        s
    }
}

fn limb_binomial(n: u64, k: u64) -> Limbs {
    let mut acc = Limbs::one();
    for i in 0..k {
        acc.mul_small(n - i);
        assert_eq!(acc.div_small(i + 1), 0);
    }
    acc
}

#[test]
fn pascal_identity_up_to_64() {
    for n in 1..=64u64 {
        for k in 1..n {
            let lhs = binomial(n, k).unwrap().into_biguint();
            let rhs = binomial(n - 1, k - 1).unwrap().into_biguint()
                + binomial(n - 1, k).unwrap().into_biguint();
            assert_eq!(lhs, rhs, "C({n},{k})");
        }
        assert_eq!(binomial(n, 0).unwrap().to_string(), "1");
        assert_eq!(binomial(n, n).unwrap().to_string(), "1");
    }
    assert!(binomial(3, 4).is_err());
}

#[test]
fn large_binomial_matches_independent_bignum() {
    let ours = binomial(50_000, 64).unwrap();
    let oracle = limb_binomial(50_000, 64);
    assert_eq!(ours.to_string(), oracle.to_decimal());
    // python: math.comb(50000, 64), 212 digits
    let text = ours.to_string();
    assert_eq!(ours.decimal_digits(), 212);
    assert!(text.starts_with("41034128021233837326"));
    assert!(text.ends_with("61619073031071190625"));
}

#[test]
fn large_counts_match_independent_bignum() {
    let p = CountParams::new(500, 16, 2).unwrap();
    let mut one = Limbs(vec![0]);
    for k in 0..p.batches_per_epoch() {
        let term = limb_binomial(500 - 16 * k, 16);
        let mut sum = Vec::new();
        let mut carry = 0;
        for i in 0..one.0.len().max(term.0.len()) {
            let v = one.0.get(i).copied().unwrap_or(0) + term.0.get(i).copied().unwrap_or(0) + carry;
            sum.push(v % BASE);
            carry = v / BASE;
        }
        if carry > 0 {
            sum.push(carry);
        }
        one = Limbs(sum);
    }
    assert_eq!(configs_one_epoch(&p).to_string(), one.to_decimal());
    let mut without = one.clone();
    without.mul_small(2);
    assert_eq!(configs_without(&p).to_string(), without.to_decimal());
    let mut with = limb_binomial(500, 16);
    with.mul_small(2 * 31);
    assert_eq!(configs_with(&p).to_string(), with.to_decimal());
}

proptest! {
    #[test]
    fn with_dominates_without((n, b) in (1u64..80).prop_flat_map(|n| (Just(n), 1..=n)), e in 1u64..5) {
        let p = CountParams::new(n, b, e).unwrap();
        let (with, without) = (configs_with(&p), configs_without(&p));
        prop_assert!(with >= without);
        prop_assert_eq!(with == without, n / b == 1);
    }

    #[test]
    fn gap_grows_with_epochs((n, b) in (2u64..60).prop_flat_map(|n| (Just(n), 1..=n / 2)), e in 1u64..5) {
        let gap = |e| {
            let p = CountParams::new(n, b, e).unwrap();
            configs_with(&p).into_biguint() - configs_without(&p).into_biguint()
        };
        prop_assert!(gap(e + 1) > gap(e));
    }

    #[test]
    fn ratio_increases_with_position((n, b) in (2u64..200).prop_flat_map(|n| (Just(n), 1..=n / 2))) {
        let nb = n / b;
        let ratios: Vec<_> = (0..nb).map(|k| config_ratio(n, b, k).unwrap()).collect();
        prop_assert!(ratios[0].is_one());
        for w in ratios.windows(2) {
            prop_assert!(w[0] < w[1]);
        }
        prop_assert!(config_ratio(n, b, nb).is_err());
    }
}
