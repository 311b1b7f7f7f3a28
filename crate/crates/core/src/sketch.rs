//! Mergeable bottom-`t` count-distinct estimator.
//!
//! Each of `r` independent pairwise-independent hash functions maps element
//! ids into `[1, N]` with `N = universe^3`; a sketch keeps, per hash function,
//! the `t` smallest distinct hash values seen. The per-trial estimate is
//! `t * N / l` where `l` is the `t`-th smallest value, or the exact number of
//! stored values when fewer than `t` have been seen. The answer is the median
//! over trials.
//!
//! The state depends only on the *set* of inserted ids, so merging two
//! sketches is bit-for-bit identical to streaming the union.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Modulus of the hash field, the Mersenne prime `2^61 - 1`.
pub const MERSENNE_61: u64 = (1 << 61) - 1;

/// Cap on `N`. Reducing a value uniform on `[0, p)` modulo `N` skews residues
/// by up to `N / p`, so `N` has to stay well below `p`; `2^52` keeps that under
/// 0.2% while collisions among up to `2^20` ids stay below `2^-12`.
pub const MAX_RANGE: u64 = 1 << 52;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SketchError {
    #[error("element {element} is outside the universe [0, {universe})")]
    OutOfUniverse { element: u64, universe: u64 },
    #[error("sketches were built from different hash families")]
    SpecMismatch,
    #[error("invalid sketch parameters: {0}")]
    InvalidParams(&'static str),
}

/// Tunables shared by every hash family built for a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SketchParams {
    /// Target relative error.
    pub epsilon: f64,
    /// Constant in `t = ceil(c / epsilon^2)`.
    pub c: f64,
    /// Forces the number of hash functions (must be odd and at least 3).
    pub trials: Option<usize>,
    /// Failure exponent `d`: by default `r = d * ceil(ln universe) + 1`,
    /// rounded up to odd.
    pub failure_exponent: u32,
}

impl Default for SketchParams {
    fn default() -> Self {
        Self { epsilon: 1.0 / 3.0, c: 4.0, trials: None, failure_exponent: 2 }
    }
}

impl SketchParams {
    pub fn validate(&self) -> Result<(), SketchError> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(SketchError::InvalidParams("epsilon must lie in (0, 1)"));
        }
        if !(self.c >= 1.0 && self.c.is_finite()) {
            return Err(SketchError::InvalidParams("c must be a finite constant >= 1"));
        }
        if let Some(r) = self.trials {
            if r < 3 || r % 2 == 0 {
                return Err(SketchError::InvalidParams("trial count must be odd and >= 3"));
            }
        }
        if self.failure_exponent == 0 {
            return Err(SketchError::InvalidParams("failure exponent must be >= 1"));
        }
        Ok(())
    }

    /// Retained minima per trial.
    pub fn retained(&self) -> usize {
        // Tolerance absorbs rounding in c / eps^2 (4 / (1/3)^2 = 36.000...01).
        libm::ceil(self.c / (self.epsilon * self.epsilon) - 1e-9).max(1.0) as usize
    }

    /// Number of hash functions for a universe of `universe` ids.
    pub fn trials_for(&self, universe: u64) -> usize {
        if let Some(r) = self.trials {
            return r;
        }
        let ln = libm::ceil(libm::log((universe.max(2)) as f64)) as usize;
        let r = self.failure_exponent as usize * ln + 1;
        let r = if r.is_multiple_of(2) { r + 1 } else { r };
        r.max(3)
    }
}

/// A fixed draw of `r` hash functions `h_i(x) = ((a_i x + b_i) mod p) mod N + 1`.
///
/// Sketches can only be merged when they share the same family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashFamilySpec {
    universe: u64,
    range: u64,
    retained: usize,
    coeffs: Vec<(u64, u64)>,
}

#[inline]
fn mul_add_mod(a: u64, x: u64, b: u64) -> u64 {
    let prod = (a as u128) * (x as u128) + b as u128;
    let folded = (prod & MERSENNE_61 as u128) + (prod >> 61);
    let folded = (folded & MERSENNE_61 as u128) + (folded >> 61);
    let r = folded as u64;
    if r >= MERSENNE_61 {
        r - MERSENNE_61
    } else {
        r
    }
}

impl HashFamilySpec {
    /// Draws a family for ids in `[0, universe)` from `seed`.
    pub fn new(universe: u64, params: &SketchParams, seed: u64) -> Result<Self, SketchError> {
        params.validate()?;
        let base = universe.max(2);
        let range = base.saturating_mul(base).saturating_mul(base).min(MAX_RANGE);
        let trials = params.trials_for(universe);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs = (0..trials)
            .map(|_| (rng.random_range(1..MERSENNE_61), rng.random_range(0..MERSENNE_61)))
            .collect();
        Ok(Self { universe, range, retained: params.retained(), coeffs })
    }

    pub fn universe(&self) -> u64 {
        self.universe
    }

    /// `N`, the size of the hash range.
    pub fn range(&self) -> u64 {
        self.range
    }

    /// `t`, minima kept per trial.
    pub fn retained(&self) -> usize {
        self.retained
    }

    /// `r`, the number of hash functions.
    pub fn trials(&self) -> usize {
        self.coeffs.len()
    }

    /// `h_i(x)`, a value in `[1, N]`.
    #[inline]
    pub fn hash(&self, trial: usize, x: u64) -> u64 {
        let (a, b) = self.coeffs[trial];
        mul_add_mod(a, x % MERSENNE_61, b) % self.range + 1
    }

    /// Short fingerprint for debug dumps.
    pub fn fingerprint(&self) -> u64 {
        self.coeffs
            .iter()
            .fold(self.universe ^ ((self.retained as u64) << 48), |acc, &(a, b)| {
                crate::seed::derive_seed(acc, &[a, b])
            })
    }
}

/// Bottom-`t` minima for every trial of a [`HashFamilySpec`].
#[derive(Clone)]
pub struct CardinalitySketch<'s> {
    spec: &'s HashFamilySpec,
    lens: Vec<u32>,
    values: Vec<u64>,
}

impl<'s> CardinalitySketch<'s> {
    pub fn new(spec: &'s HashFamilySpec) -> Self {
        Self { spec, lens: vec![0; spec.trials()], values: vec![0; spec.trials() * spec.retained] }
    }

    pub fn spec(&self) -> &'s HashFamilySpec {
        self.spec
    }

    /// Sorted stored minima of one trial.
    pub fn minima(&self, trial: usize) -> &[u64] {
        let t = self.spec.retained;
        &self.values[trial * t..trial * t + self.lens[trial] as usize]
    }

    pub fn is_empty(&self) -> bool {
        self.lens.iter().all(|&l| l == 0)
    }

    pub fn insert(&mut self, x: u64) -> Result<(), SketchError> {
        if x >= self.spec.universe {
            return Err(SketchError::OutOfUniverse { element: x, universe: self.spec.universe });
        }
        let t = self.spec.retained;
        for trial in 0..self.spec.trials() {
            let h = self.spec.hash(trial, x);
            let len = self.lens[trial] as usize;
            let slot = &mut self.values[trial * t..(trial + 1) * t];
            if len == t && h >= slot[t - 1] {
                continue;
            }
            let Err(at) = slot[..len].binary_search(&h) else { continue };
            if len < t {
                slot.copy_within(at..len, at + 1);
                self.lens[trial] += 1;
            } else {
                slot.copy_within(at..t - 1, at + 1);
            }
            slot[at] = h;
        }
        Ok(())
    }

    /// Folds `other` into `self`: per trial, the `t` smallest distinct values
    /// of the union.
    pub fn merge_from(&mut self, other: &CardinalitySketch<'_>) -> Result<(), SketchError> {
        if !core::ptr::eq(self.spec, other.spec) && self.spec != other.spec {
            return Err(SketchError::SpecMismatch);
        }
        let t = self.spec.retained;
        for trial in 0..self.spec.trials() {
            let b = other.minima(trial);
            if b.is_empty() {
                continue;
            }
            let alen = self.lens[trial] as usize;
            let slot = &mut self.values[trial * t..(trial + 1) * t];

            // Forward pass: how many of each input survive in the result.
            let (mut i, mut j, mut k) = (0, 0, 0);
            while k < t && (i < alen || j < b.len()) {
                if j == b.len() || (i < alen && slot[i] < b[j]) {
                    i += 1;
                } else if i == alen || b[j] < slot[i] {
                    j += 1;
                } else {
                    i += 1;
                    j += 1;
                }
                k += 1;
            }
            // Backward pass writes in place: the write cursor never passes the
            // unread prefix of `slot`.
            let mut w = k;
            while w > 0 {
                w -= 1;
                if j == 0 || (i > 0 && slot[i - 1] > b[j - 1]) {
                    i -= 1;
                    slot[w] = slot[i];
                } else if i == 0 || b[j - 1] > slot[i - 1] {
                    j -= 1;
                    slot[w] = b[j];
                } else {
                    i -= 1;
                    j -= 1;
                    slot[w] = b[j];
                }
            }
            self.lens[trial] = k as u32;
        }
        Ok(())
    }

    pub fn merge(a: &CardinalitySketch<'s>, b: &CardinalitySketch<'_>) -> Result<Self, SketchError> {
        let mut out = a.clone();
        out.merge_from(b)?;
        Ok(out)
    }

    /// Estimate of one trial: exact when below `t`, `t * N / l` otherwise.
    pub fn trial_estimate(&self, trial: usize) -> f64 {
        let t = self.spec.retained;
        let len = self.lens[trial] as usize;
        if len < t {
            len as f64
        } else {
            t as f64 * self.spec.range as f64 / self.values[trial * t + t - 1] as f64
        }
    }

    /// Median of the per-trial estimates.
    pub fn estimate(&self) -> f64 {
        let r = self.spec.trials();
        let mut buf = [0.0f64; 64];
        let mut heap;
        let xs: &mut [f64] = if r <= buf.len() {
            &mut buf[..r]
        } else {
            heap = vec![0.0; r];
            &mut heap
        };
        for (trial, x) in xs.iter_mut().enumerate() {
            *x = self.trial_estimate(trial);
        }
        xs.sort_unstable_by(f64::total_cmp);
        xs[r / 2]
    }
}

impl PartialEq for CardinalitySketch<'_> {
    fn eq(&self, other: &Self) -> bool {
        (core::ptr::eq(self.spec, other.spec) || self.spec == other.spec)
            && (0..self.spec.trials()).all(|i| self.minima(i) == other.minima(i))
    }
}

impl fmt::Debug for CardinalitySketch<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Debug dump: spec fingerprint, then one line of sorted minima per trial.
/// The layout is not a stable interchange format.
impl fmt::Display for CardinalitySketch<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "sketch spec={:016x} r={} t={} N={}",
            self.spec.fingerprint(),
            self.spec.trials(),
            self.spec.retained,
            self.spec.range
        )?;
        for trial in 0..self.spec.trials() {
            write!(f, "  {trial}:")?;
            for v in self.minima(trial) {
                write!(f, " {v}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(universe: u64, seed: u64) -> HashFamilySpec {
        HashFamilySpec::new(universe, &SketchParams::default(), seed).unwrap()
    }

    fn sketch_of<'s>(spec: &'s HashFamilySpec, xs: impl IntoIterator<Item = u64>) -> CardinalitySketch<'s> {
        let mut s = CardinalitySketch::new(spec);
        for x in xs {
            s.insert(x).unwrap();
        }
        s
    }

    #[test]
    fn defaults() {
        let p = SketchParams::default();
        assert_eq!(p.retained(), 36);
        // 2 * ceil(ln 10^4) + 1 = 2 * 10 + 1
        assert_eq!(p.trials_for(10_000), 21);
        assert_eq!(p.trials_for(1), 3);
        let s = HashFamilySpec::new(7, &SketchParams { trials: Some(7), ..p }, 0).unwrap();
        let sk = CardinalitySketch::new(&s);
        assert_eq!(s.trials(), 7);
        assert!((0..7).all(|i| sk.minima(i).is_empty()));
        assert_eq!(sk.estimate(), 0.0);
        assert_eq!(sk, CardinalitySketch::new(&s));
    }

    #[test]
    fn rejects_bad_params() {
        let p = SketchParams::default();
        assert!(HashFamilySpec::new(10, &SketchParams { trials: Some(4), ..p }, 0).is_err());
        assert!(HashFamilySpec::new(10, &SketchParams { epsilon: 0.0, ..p }, 0).is_err());
        assert!(HashFamilySpec::new(10, &SketchParams { c: 0.5, ..p }, 0).is_err());
    }

    #[test]
    fn hashes_land_in_range() {
        let s = spec(1000, 3);
        for i in 0..s.trials() {
            for x in 0..1000 {
                let h = s.hash(i, x);
                assert!((1..=s.range()).contains(&h));
            }
        }
    }

    #[test]
    fn range_is_cubed_then_capped() {
        assert_eq!(spec(1000, 0).range(), 1_000_000_000);
        assert_eq!(spec(1, 0).range(), 8);
        assert_eq!(spec(1 << 20, 0).range(), MAX_RANGE);
        let s = spec(1 << 40, 1);
        assert!((0..100).all(|x| (1..=MAX_RANGE).contains(&s.hash(0, x << 30))));
    }

    #[test]
    fn out_of_universe() {
        let s = spec(10, 0);
        let mut sk = CardinalitySketch::new(&s);
        assert_eq!(sk.insert(10), Err(SketchError::OutOfUniverse { element: 10, universe: 10 }));
    }

    #[test]
    fn repeated_inserts_are_idempotent() {
        let s = spec(100, 1);
        let once = sketch_of(&s, [5]);
        let many = sketch_of(&s, [5; 5]);
        assert_eq!(once, many);
        assert_eq!(once.estimate(), 1.0);
    }

    #[test]
    fn below_t_is_exact() {
        let s = spec(1000, 2);
        let sk = sketch_of(&s, 0..35);
        for i in 0..s.trials() {
            let mut expect: Vec<u64> = (0..35).map(|x| s.hash(i, x)).collect();
            expect.sort_unstable();
            expect.dedup();
            assert_eq!(sk.minima(i), &expect[..]);
        }
        assert_eq!(sk.estimate(), 35.0);
    }

    #[test]
    fn keeps_true_bottom_t() {
        let s = spec(5000, 4);
        let xs: Vec<u64> = (0..360).map(|i| i * 13 % 5000).collect();
        let sk = sketch_of(&s, xs.iter().copied());
        for i in 0..s.trials() {
            let mut all: Vec<u64> = xs.iter().map(|&x| s.hash(i, x)).collect();
            all.sort_unstable();
            all.dedup();
            assert_eq!(sk.minima(i), &all[..36]);
        }
    }

    #[test]
    fn merge_identity_and_mismatch() {
        let s = spec(500, 5);
        let a = sketch_of(&s, 0..100);
        assert_eq!(CardinalitySketch::merge(&a, &CardinalitySketch::new(&s)).unwrap(), a);
        assert_eq!(CardinalitySketch::merge(&CardinalitySketch::new(&s), &a).unwrap(), a);
        let other = spec(500, 6);
        let b = sketch_of(&other, 0..10);
        assert_eq!(CardinalitySketch::merge(&a, &b), Err(SketchError::SpecMismatch));
        // A structurally identical family is accepted.
        let twin = spec(500, 5);
        assert!(CardinalitySketch::merge(&a, &sketch_of(&twin, 0..3)).is_ok());
    }

    #[test]
    fn display_lists_every_trial() {
        let s = HashFamilySpec::new(10, &SketchParams { trials: Some(3), ..Default::default() }, 0).unwrap();
        let sk = sketch_of(&s, [1, 2]);
        let text = alloc::format!("{sk}");
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("sketch spec="));
    }

    proptest! {
        #[test]
        fn order_and_multiplicity_do_not_matter(xs in proptest::collection::vec(0u64..300, 0..200), seed in any::<u64>()) {
            let s = spec(300, seed);
            let forward = sketch_of(&s, xs.iter().copied());
            let backward = sketch_of(&s, xs.iter().rev().copied().chain(xs.iter().copied()));
            prop_assert_eq!(forward, backward);
        }

        #[test]
        fn merge_equals_streaming_union(a in proptest::collection::vec(0u64..2000, 0..300),
                                        b in proptest::collection::vec(0u64..2000, 0..300),
                                        c in proptest::collection::vec(0u64..2000, 0..100),
                                        seed in any::<u64>()) {
            let s = spec(2000, seed);
            let (sa, sb, sc) = (sketch_of(&s, a.iter().copied()), sketch_of(&s, b.iter().copied()), sketch_of(&s, c.iter().copied()));
            let union = sketch_of(&s, a.iter().chain(&b).copied());
            let ab = CardinalitySketch::merge(&sa, &sb).unwrap();
            prop_assert_eq!(&ab, &union);
            prop_assert_eq!(&CardinalitySketch::merge(&sb, &sa).unwrap(), &union);
            let left = CardinalitySketch::merge(&ab, &sc).unwrap();
            let right = CardinalitySketch::merge(&sa, &CardinalitySketch::merge(&sb, &sc).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn stored_minima_never_grow(xs in proptest::collection::vec(0u64..1000, 1..300), seed in any::<u64>()) {
            let s = spec(1000, seed);
            let mut sk = CardinalitySketch::new(&s);
            let t = s.retained();
            for &x in &xs {
                let before: Vec<Option<u64>> = (0..s.trials()).map(|i| {
                    let m = sk.minima(i);
                    (m.len() == t).then(|| m[t - 1])
                }).collect();
                sk.insert(x).unwrap();
                for (i, b) in before.into_iter().enumerate() {
                    if let Some(l) = b {
                        prop_assert!(sk.minima(i)[t - 1] <= l);
                    }
                }
            }
        }
    }
}
