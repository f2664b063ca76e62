//! Mini-batch samplers.
//!
//! Three regimes share one interface:
//!
//! * [`PoolState`]: sequenced-replacement sampling (SRS). The sampler keeps a
//!   pool of `N` slots. Each draw removes `B` uniformly chosen slots and
//!   refills them with the next `B` samples of the fixed dataset order,
//!   wrapping modulo `N`. A sample may occupy several slots, so a batch can
//!   contain duplicates.
//! * [`EpochShuffleState`]: non-replacement sampling. A fresh permutation per
//!   epoch is cut into `floor(N / B)` batches; the trailing `N mod B` samples
//!   are dropped.
//! * [`ReplacementState`]: batched replacement sampling. Each draw is a
//!   uniform `B`-subset of `[0, N)`, independent of all earlier draws.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::rng::RngStream;

/// Position of a sample in the fixed dataset order, in `[0, N)`.
pub type SampleIndex = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SamplingError {
    #[error("invalid sampler configuration: dataset_size={dataset_size}, batch_size={batch_size} (need 1 <= batch_size <= dataset_size)")]
    InvalidConfig {
        dataset_size: usize,
        batch_size: usize,
    },
    #[error("forced draw must name {expected} distinct slots below {dataset_size}, got {got:?}")]
    InvalidSlots {
        expected: usize,
        dataset_size: usize,
        got: Vec<usize>,
    },
    #[error("unknown sampler kind `{0}` (expected srs, epoch or replacement)")]
    UnknownKind(String),
}

fn check_config(dataset_size: usize, batch_size: usize) -> Result<(), SamplingError> {
    if dataset_size == 0 || batch_size == 0 || batch_size > dataset_size {
        return Err(SamplingError::InvalidConfig {
            dataset_size,
            batch_size,
        });
    }
    Ok(())
}

/// An ordered list of exactly `B` sample indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MiniBatch(Vec<SampleIndex>);

impl MiniBatch {
    pub fn indices(&self) -> &[SampleIndex] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<SampleIndex> {
        self.0
    }

    /// Indices sorted ascending, for comparing batches as multisets.
    pub fn sorted(&self) -> Vec<SampleIndex> {
        let mut v = self.0.clone();
        v.sort_unstable();
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SamplerKind {
    Srs,
    EpochShuffle,
    Replacement,
}

impl SamplerKind {
    pub const ALL: [SamplerKind; 3] = [
        SamplerKind::Srs,
        SamplerKind::EpochShuffle,
        SamplerKind::Replacement,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SamplerKind::Srs => "srs",
            SamplerKind::EpochShuffle => "epoch",
            SamplerKind::Replacement => "replacement",
        }
    }
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SamplerKind {
    type Err = SamplingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "srs" => Ok(SamplerKind::Srs),
            "epoch" => Ok(SamplerKind::EpochShuffle),
            "replacement" => Ok(SamplerKind::Replacement),
            other => Err(SamplingError::UnknownKind(other.to_string())),
        }
    }
}

/// The SRS pool: `N` slots holding sample indices, plus the refill cursor.
///
/// Slots are stored as a flat array so a draw of `B` slots is a partial
/// Fisher-Yates pass over the first `B` positions, O(B) per draw. A
/// per-index multiplicity table is kept alongside for observability.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolState {
    batch_size: usize,
    slots: Vec<SampleIndex>,
    multiplicity: Vec<u32>,
    cursor: usize,
    draws_completed: u64,
}

impl PoolState {
    /// Pool with one copy of every index `0..N`, cursor at index 0.
    pub fn new(dataset_size: usize, batch_size: usize) -> Result<Self, SamplingError> {
        check_config(dataset_size, batch_size)?;
        Ok(Self {
            batch_size,
            slots: (0..dataset_size).collect(),
            multiplicity: vec![1; dataset_size],
            cursor: 0,
            draws_completed: 0,
        })
    }

    pub fn dataset_size(&self) -> usize {
        self.slots.len()
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    /// Sequence index of the next sample to be refilled.
    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn draws_completed(&self) -> u64 {
        self.draws_completed
    }

    pub fn slots(&self) -> &[SampleIndex] {
        &self.slots
    }

    /// Multiplicity of sample `i` in the pool.
    pub fn multiplicity(&self, i: SampleIndex) -> u32 {
        self.multiplicity[i]
    }

    /// Multiplicity of every index `0..N`, zeros included.
    pub fn histogram(&self) -> Vec<u32> {
        self.multiplicity.clone()
    }

    /// Number of times sample `i` has been refilled so far, derived from
    /// cursor arithmetic: the count of `j` in `[0, t*B)` with `j mod N == i`.
    pub fn refills(&self, i: SampleIndex) -> u64 {
        let n = self.dataset_size() as u64;
        let total = self.draws_completed * self.batch_size as u64;
        total / n + u64::from((i as u64) < total % n)
    }

    /// Draws `B` distinct slots uniformly at random, then refills them.
    pub fn draw(&mut self, rng: &mut RngStream) -> MiniBatch {
        let b = self.batch_size;
        rng.partial_shuffle(&mut self.slots, b);
        let batch = self.slots[..b].to_vec();
        for (pos, &i) in batch.iter().enumerate() {
            self.multiplicity[i] -= 1;
            self.refill_slot(pos);
        }
        self.finish_draw();
        MiniBatch(batch)
    }

    /// Draws the given slot positions instead of random ones. Used to replay
    /// a prescribed sequence of draws.
    pub fn draw_slots(&mut self, positions: &[usize]) -> Result<MiniBatch, SamplingError> {
        let n = self.dataset_size();
        let mut seen = vec![false; n];
        let valid = positions.len() == self.batch_size
            && positions
                .iter()
                .all(|&p| p < n && !std::mem::replace(&mut seen[p], true));
        if !valid {
            return Err(SamplingError::InvalidSlots {
                expected: self.batch_size,
                dataset_size: n,
                got: positions.to_vec(),
            });
        }
        let batch: Vec<SampleIndex> = positions.iter().map(|&p| self.slots[p]).collect();
        for (&pos, &i) in positions.iter().zip(&batch) {
            self.multiplicity[i] -= 1;
            self.refill_slot(pos);
        }
        self.finish_draw();
        Ok(MiniBatch(batch))
    }

    fn refill_slot(&mut self, pos: usize) {
        let next = self.cursor;
        self.slots[pos] = next;
        self.multiplicity[next] += 1;
        self.cursor = (next + 1) % self.slots.len();
    }

    fn finish_draw(&mut self) {
        self.draws_completed += 1;
        debug_assert_eq!(
            self.cursor as u64,
            (self.draws_completed * self.batch_size as u64) % self.slots.len() as u64
        );
    }
}

/// Non-replacement sampling over a reshuffled permutation per epoch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpochShuffleState {
    batch_size: usize,
    permutation: Vec<SampleIndex>,
    position: usize,
    epochs_started: u64,
}

impl EpochShuffleState {
    pub fn new(
        dataset_size: usize,
        batch_size: usize,
        rng: &mut RngStream,
    ) -> Result<Self, SamplingError> {
        check_config(dataset_size, batch_size)?;
        let mut permutation: Vec<SampleIndex> = (0..dataset_size).collect();
        rng.shuffle(&mut permutation);
        Ok(Self {
            batch_size,
            permutation,
            position: 0,
            epochs_started: 1,
        })
    }

    pub fn dataset_size(&self) -> usize {
        self.permutation.len()
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    /// `floor(N / B)`.
    pub fn batches_per_epoch(&self) -> usize {
        self.permutation.len() / self.batch_size
    }

    pub fn permutation(&self) -> &[SampleIndex] {
        &self.permutation
    }

    pub fn position(&self) -> usize {
        self.position
    }

    pub fn epochs_started(&self) -> u64 {
        self.epochs_started
    }

    pub fn draw(&mut self, rng: &mut RngStream) -> MiniBatch {
        if self.permutation.len() - self.position < self.batch_size {
            rng.shuffle(&mut self.permutation);
            self.position = 0;
            self.epochs_started += 1;
        }
        let start = self.position;
        self.position += self.batch_size;
        MiniBatch(self.permutation[start..self.position].to_vec())
    }
}

/// Batched replacement: every draw is a fresh uniform `B`-subset.
///
/// `scratch` holds a permutation of `[0, N)` reused across draws to avoid
/// reallocating; a partial Fisher-Yates pass yields a uniform subset whatever
/// order the scratch array starts in, so no distributional state is carried.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplacementState {
    batch_size: usize,
    scratch: Vec<SampleIndex>,
}

impl ReplacementState {
    pub fn new(dataset_size: usize, batch_size: usize) -> Result<Self, SamplingError> {
        check_config(dataset_size, batch_size)?;
        Ok(Self {
            batch_size,
            scratch: (0..dataset_size).collect(),
        })
    }

    pub fn dataset_size(&self) -> usize {
        self.scratch.len()
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    pub fn draw(&mut self, rng: &mut RngStream) -> MiniBatch {
        rng.partial_shuffle(&mut self.scratch, self.batch_size);
        MiniBatch(self.scratch[..self.batch_size].to_vec())
    }
}

/// One-shot batched replacement draw.
pub fn draw_batch_replacement(
    dataset_size: usize,
    batch_size: usize,
    rng: &mut RngStream,
) -> Result<MiniBatch, SamplingError> {
    Ok(ReplacementState::new(dataset_size, batch_size)?.draw(rng))
}

/// Any of the three samplers behind one type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sampler {
    Srs(PoolState),
    EpochShuffle(EpochShuffleState),
    Replacement(ReplacementState),
}

impl Sampler {
    pub fn new(
        kind: SamplerKind,
        dataset_size: usize,
        batch_size: usize,
        rng: &mut RngStream,
    ) -> Result<Self, SamplingError> {
        Ok(match kind {
            SamplerKind::Srs => Sampler::Srs(PoolState::new(dataset_size, batch_size)?),
            SamplerKind::EpochShuffle => {
                Sampler::EpochShuffle(EpochShuffleState::new(dataset_size, batch_size, rng)?)
            }
            SamplerKind::Replacement => {
                Sampler::Replacement(ReplacementState::new(dataset_size, batch_size)?)
            }
        })
    }

    pub fn kind(&self) -> SamplerKind {
        match self {
            Sampler::Srs(_) => SamplerKind::Srs,
            Sampler::EpochShuffle(_) => SamplerKind::EpochShuffle,
            Sampler::Replacement(_) => SamplerKind::Replacement,
        }
    }

    pub fn batch_size(&self) -> usize {
        match self {
            Sampler::Srs(s) => s.batch_size(),
            Sampler::EpochShuffle(s) => s.batch_size(),
            Sampler::Replacement(s) => s.batch_size(),
        }
    }

    pub fn next_batch(&mut self, rng: &mut RngStream) -> MiniBatch {
        match self {
            Sampler::Srs(s) => s.draw(rng),
            Sampler::EpochShuffle(s) => s.draw(rng),
            Sampler::Replacement(s) => s.draw(rng),
        }
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;

    #[test]
    fn init_holds_one_copy_of_each_index() {
        let pool = PoolState::new(5, 2).unwrap();
        assert_eq!(pool.histogram(), vec![1; 5]);
        assert_eq!(pool.cursor(), 0);
        assert_eq!(pool.draws_completed(), 0);

        let tiny = PoolState::new(1, 1).unwrap();
        assert_eq!(tiny.slots(), &[0]);
    }

    #[test]
    fn init_rejects_bad_sizes() {
        assert!(PoolState::new(5, 6).is_err());
        assert!(PoolState::new(0, 0).is_err());
        assert!(PoolState::new(5, 0).is_err());
        let mut rng = RngStream::new(0, 0);
        assert!(EpochShuffleState::new(3, 4, &mut rng).is_err());
        assert!(ReplacementState::new(3, 4).is_err());
        assert!(draw_batch_replacement(5, 6, &mut rng).is_err());
    }

    // The two-step walk-through with N=5, B=2, relabelled to 0-based indices
    // (figure label k is index k-1).
    #[test]
    fn figure_walkthrough() {
        let mut pool = PoolState::new(5, 2).unwrap();
        // slots [0,1,2,3,4]; draw labels 2 and 5 -> positions 1 and 4.
        let b1 = pool.draw_slots(&[1, 4]).unwrap();
        assert_eq!(b1.sorted(), vec![1, 4]);
        // refill adds labels 1 and 2; pool {1,3,4,1,2}
        assert_eq!(pool.histogram(), vec![2, 1, 1, 1, 0]);
        assert_eq!(pool.cursor(), 2);

        // draw both copies of label 1
        let pos: Vec<usize> = (0..5).filter(|&p| pool.slots()[p] == 0).collect();
        let b2 = pool.draw_slots(&pos).unwrap();
        assert_eq!(b2.sorted(), vec![0, 0]);
        // refill adds labels 3 and 4; pool {3,4,2,3,4}
        assert_eq!(pool.histogram(), vec![0, 1, 2, 2, 0]);
        assert_eq!(pool.cursor(), 4);
        assert_eq!(pool.draws_completed(), 2);
    }

    #[test]
    fn forced_draw_validates_positions() {
        let mut pool = PoolState::new(5, 2).unwrap();
        assert!(pool.draw_slots(&[1]).is_err());
        assert!(pool.draw_slots(&[1, 1]).is_err());
        assert!(pool.draw_slots(&[1, 5]).is_err());
        assert_eq!(pool.draws_completed(), 0);
    }

    #[test]
    fn single_slot_pool_never_changes() {
        let mut pool = PoolState::new(1, 1).unwrap();
        let mut rng = RngStream::new(3, 0);
        for _ in 0..10 {
            assert_eq!(pool.draw(&mut rng).indices(), &[0]);
            assert_eq!(pool.histogram(), vec![1]);
        }
    }

    #[test]
    fn cursor_wraps_mid_refill() {
        // N=5, B=3: second refill covers 3,4,0.
        let mut pool = PoolState::new(5, 3).unwrap();
        let mut rng = RngStream::new(11, 0);
        pool.draw(&mut rng);
        assert_eq!(pool.cursor(), 3);
        pool.draw(&mut rng);
        assert_eq!(pool.cursor(), 1);
        assert_eq!(pool.refills(0), 2);
        assert_eq!(pool.refills(4), 1);
        assert_eq!(pool.histogram().iter().sum::<u32>(), 5);
    }

    #[test]
    fn never_drawn_index_gains_multiplicity() {
        // Replaying the refill arithmetic alone: an index that is never drawn
        // gains one copy every time the cursor passes it.
        let (n, b) = (10usize, 3usize);
        let pool = |t: u64| PoolState {
            batch_size: b,
            slots: vec![0; n],
            multiplicity: vec![0; n],
            cursor: ((t * b as u64) % n as u64) as usize,
            draws_completed: t,
        };
        let i = 7;
        let mut last = 0;
        for t in 0..200u64 {
            let r = pool(t).refills(i);
            assert!(r >= last);
            last = r;
            if t >= (n / b) as u64 + 1 {
                assert!(r >= 1);
            }
        }
        assert_eq!(pool(200).refills(i), 200 * 3 / 10);
    }

    #[test]
    fn epoch_batches_partition_the_permutation() {
        let mut rng = RngStream::new(5, 0);
        let mut s = EpochShuffleState::new(4, 2, &mut rng).unwrap();
        let a = s.draw(&mut rng);
        let b = s.draw(&mut rng);
        let mut all = a.into_inner();
        all.extend(b.into_inner());
        all.sort_unstable();
        assert_eq!(all, vec![0, 1, 2, 3]);
        assert_eq!(s.epochs_started(), 1);
        s.draw(&mut rng);
        assert_eq!(s.epochs_started(), 2);
    }

    #[test]
    fn epoch_drops_the_remainder() {
        let mut rng = RngStream::new(6, 0);
        let mut s = EpochShuffleState::new(5, 2, &mut rng).unwrap();
        assert_eq!(s.batches_per_epoch(), 2);
        for _ in 0..20 {
            let mut seen = HashSet::new();
            for _ in 0..2 {
                for &i in s.draw(&mut rng).indices() {
                    assert!(seen.insert(i));
                }
            }
            assert_eq!(seen.len(), 4);
        }
    }

    #[test]
    fn replacement_full_batch_is_a_permutation() {
        let mut rng = RngStream::new(8, 0);
        let mut s = ReplacementState::new(5, 5).unwrap();
        for _ in 0..20 {
            assert_eq!(s.draw(&mut rng).sorted(), vec![0, 1, 2, 3, 4]);
        }
    }

    #[test]
    fn replacement_two_of_two_is_fair() {
        let mut rng = RngStream::new(12, 0);
        let mut s = ReplacementState::new(2, 1).unwrap();
        let zeros = (0..10_000)
            .filter(|_| s.draw(&mut rng).indices()[0] == 0)
            .count();
        let freq = zeros as f64 / 10_000.0;
        assert!((freq - 0.5).abs() < 0.02, "{freq}");
    }

    #[test]
    fn replacement_support_is_every_pair() {
        let mut rng = RngStream::new(13, 0);
        let mut s = ReplacementState::new(5, 2).unwrap();
        let support: HashSet<Vec<usize>> = (0..2000).map(|_| s.draw(&mut rng).sorted()).collect();
        assert_eq!(support.len(), 10);
        assert!(support.iter().all(|v| v[0] != v[1]));
    }

    #[test]
    fn kind_parses() {
        for k in SamplerKind::ALL {
            assert_eq!(k.as_str().parse::<SamplerKind>().unwrap(), k);
        }
        assert!("uniform".parse::<SamplerKind>().is_err());
    }
}
