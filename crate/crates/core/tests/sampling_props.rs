use proptest::prelude::*;

use srs_core::sampling::{draw_batch_replacement, EpochShuffleState, PoolState, Sampler};
use srs_core::{RngStream, SamplerKind};

fn size_and_batch() -> impl Strategy<Value = (usize, usize)> {
    (1usize..60).prop_flat_map(|n| (Just(n), 1..=n))
}

proptest! {
    #[test]
    fn pool_conserves_size_and_follows_refill_formula(
        (n, b) in size_and_batch(),
        steps in 0u64..200,
        seed in any::<u64>(),
    ) {
        let mut pool = PoolState::new(n, b).unwrap();
        let mut rng = RngStream::new(seed, 0);
        let mut drawn = vec![0i64; n];
        for _ in 0..steps {
            let batch = pool.draw(&mut rng);
            prop_assert_eq!(batch.len(), b);
            for &i in batch.indices() {
                drawn[i] += 1;
            }
        }
        let hist = pool.histogram();
        prop_assert_eq!(hist.iter().map(|&m| m as usize).sum::<usize>(), n);
        let total = steps * b as u64;
        for i in 0..n {
            let expect = total / n as u64 + u64::from((i as u64) < total % n as u64);
            prop_assert_eq!(pool.refills(i), expect);
            prop_assert_eq!(hist[i] as i64, 1 + expect as i64 - drawn[i]);
        }
        prop_assert_eq!(pool.cursor() as u64, total % n as u64);
    }

    #[test]
    fn samplers_are_deterministic(
        (n, b) in size_and_batch(),
        seed in any::<u64>(),
        stream in 0u64..4,
    ) {
        for kind in SamplerKind::ALL {
            let run = || {
                let mut rng = RngStream::new(seed, stream);
                let mut s = Sampler::new(kind, n, b, &mut rng).unwrap();
                (0..20).map(|_| s.next_batch(&mut rng).into_inner()).collect::<Vec<_>>()
            };
            prop_assert_eq!(run(), run());
        }
    }

    #[test]
    fn epoch_batches_partition_each_epoch(
        (n, b) in size_and_batch(),
        seed in any::<u64>(),
    ) {
        let mut rng = RngStream::new(seed, 0);
        let mut s = EpochShuffleState::new(n, b, &mut rng).unwrap();
        let nb = n / b;
        for _ in 0..3 {
            let mut seen = Vec::new();
            for _ in 0..nb {
                seen.extend(s.draw(&mut rng).into_inner());
            }
            seen.sort_unstable();
            let before = seen.len();
            seen.dedup();
            prop_assert_eq!(seen.len(), before);
            prop_assert_eq!(seen.len(), nb * b);
        }
    }

    #[test]
    fn replacement_batches_are_distinct_and_in_range(
        (n, b) in size_and_batch(),
        seed in any::<u64>(),
    ) {
        let mut rng = RngStream::new(seed, 0);
        let mut batch = draw_batch_replacement(n, b, &mut rng).unwrap().sorted();
        prop_assert!(batch.iter().all(|&i| i < n));
        batch.dedup();
        prop_assert_eq!(batch.len(), b);
    }
}

#[test]
fn invalid_parameters_are_rejected() {
    let mut rng = RngStream::new(0, 0);
    for kind in SamplerKind::ALL {
        assert!(Sampler::new(kind, 4, 5, &mut rng).is_err());
        assert!(Sampler::new(kind, 4, 0, &mut rng).is_err());
        assert!(Sampler::new(kind, 0, 0, &mut rng).is_err());
    }
    let mut pool = PoolState::new(5, 2).unwrap();
    assert!(pool.draw_slots(&[0, 0]).is_err());
    assert!(pool.draw_slots(&[0]).is_err());
    assert!(pool.draw_slots(&[0, 5]).is_err());
}

#[test]
fn srs_batches_can_repeat_a_sample() {
    // After the first refill, a sample can sit in two slots at once.
    let mut rng = RngStream::new(11, 0);
    let mut pool = PoolState::new(6, 3).unwrap();
    let mut saw_repeat = false;
    for _ in 0..500 {
        let mut b = pool.draw(&mut rng).sorted();
        let len = b.len();
        b.dedup();
        saw_repeat |= b.len() < len;
    }
    assert!(saw_repeat);
}
