//! Cyclic-group machinery for rings of binary outcomes: canonical rotations,
//! orbit (necklace) enumeration, and projection of constraint rows onto
//! orbit-indexed variables.
//!
//! Words are machine integers; bit i holds the outcome of ring node i
//! (+1 -> 0, -1 -> 1, the crate-wide convention from `dist`).

use crate::lin::SparseVec;
use crate::scalar::Scalar;
use thiserror::Error;

pub const MIN_RING: usize = 3;
pub const MAX_RING: usize = 24;

#[derive(Debug, Error)]
pub enum SymmetryError {
    #[error("ring size {0} outside supported range {MIN_RING}..={MAX_RING}")]
    RingSize(usize),
}

/// A length-m binary word on the ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RingAssignment {
    pub m: usize,
    pub bits: u32,
}

impl RingAssignment {
    pub fn new(m: usize, bits: u32) -> Result<Self, SymmetryError> {
        if !(MIN_RING..=MAX_RING).contains(&m) {
            return Err(SymmetryError::RingSize(m));
        }
        Ok(RingAssignment { m, bits: bits & mask(m) })
    }
}

#[inline]
fn mask(m: usize) -> u32 {
    if m == 32 {
        u32::MAX
    } else {
        (1u32 << m) - 1
    }
}

/// Rotate the word k positions: bit i of the result is bit (i+k) mod m of w.
#[inline]
pub fn rotate(w: u32, m: usize, k: usize) -> u32 {
    let k = k % m;
    ((w >> k) | (w << (m - k))) & mask(m)
}

/// Lexicographically least rotation, bits compared as the integer value.
/// Idempotent and rotation-invariant.
pub fn canonical_rotation(w: RingAssignment) -> RingAssignment {
    RingAssignment { m: w.m, bits: min_rotation(w.bits, w.m) }
}

#[inline]
pub fn min_rotation(w: u32, m: usize) -> u32 {
    // Booth-style linear scan is unnecessary at m <= 24; the shift/mask loop
    // is branch-light and O(m).
    let mut best = w;
    let mut cur = w;
    for _ in 1..m {
        cur = ((cur >> 1) | (cur << (m - 1))) & mask(m);
        if cur < best {
            best = cur;
        }
    }
    best
}

/// Brute-force reference used by tests.
#[cfg(test)]
pub fn min_rotation_naive(w: u32, m: usize) -> u32 {
    (0..m).map(|k| rotate(w, m, k)).min().unwrap()
}

/// Canonical representatives and orbit sizes of the cyclic action on
/// length-m binary words. Immutable after construction.
#[derive(Clone, Debug)]
pub struct OrbitTable {
    pub m: usize,
    reps: Vec<u32>,
    // word -> index of its orbit representative in `reps`
    index: Vec<u32>,
    orbit_size: Vec<u32>,
}

impl OrbitTable {
    pub fn n_orbits(&self) -> usize {
        self.reps.len()
    }

    pub fn reps(&self) -> &[u32] {
        &self.reps
    }

    pub fn rep(&self, i: usize) -> u32 {
        self.reps[i]
    }

    /// Orbit index of an arbitrary word.
    #[inline]
    pub fn index_of(&self, w: u32) -> usize {
        self.index[w as usize] as usize
    }

    pub fn orbit_size(&self, i: usize) -> u32 {
        self.orbit_size[i]
    }
}

pub fn build_orbit_table(m: usize) -> Result<OrbitTable, SymmetryError> {
    if !(MIN_RING..=MAX_RING).contains(&m) {
        return Err(SymmetryError::RingSize(m));
    }
    let n = 1usize << m;
    let mut index = vec![u32::MAX; n];
    let mut reps = Vec::new();
    let mut orbit_size = Vec::new();
    for w in 0..n as u32 {
        if index[w as usize] != u32::MAX {
            continue;
        }
        // w is the least element of a fresh orbit
        let id = reps.len() as u32;
        reps.push(w);
        let mut size = 0u32;
        let mut cur = w;
        loop {
            if index[cur as usize] == u32::MAX {
                index[cur as usize] = id;
                size += 1;
            }
            cur = ((cur >> 1) | (cur << (m - 1))) & mask(m);
            if cur == w {
                break;
            }
        }
        orbit_size.push(size);
    }
    Ok(OrbitTable { m, reps, index, orbit_size })
}

/// Binary necklace count (1/m) * sum over d|m of phi(d) * 2^(m/d).
pub fn necklace_count(m: usize) -> u64 {
    let mut total = 0u64;
    for d in 1..=m {
        if m % d == 0 {
            total += euler_phi(d as u64) * (1u64 << (m / d));
        }
    }
    total / m as u64
}

fn euler_phi(mut n: u64) -> u64 {
    let mut result = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

/// Project a word-indexed constraint row onto orbit variables: every word's
/// coefficient accumulates onto its orbit representative. A row and any of
/// its cyclic shifts project identically, which enables row deduplication.
pub fn symmetrize_row<S: Scalar>(
    table: &OrbitTable,
    coefficients: impl IntoIterator<Item = (u32, S)>,
) -> SparseVec<S> {
    SparseVec::accumulate(
        coefficients
            .into_iter()
            .map(|(w, c)| (table.index_of(w & mask(table.m)), c)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat_int, Rat};
    use num_traits::Zero;
    use proptest::prelude::*;

    #[test]
    fn canonical_examples() {
        // 10010 (m=5): bit pattern value 0b10010 -> min rotation 0b00101
        assert_eq!(min_rotation(0b10010, 5), 0b00101);
        assert_eq!(min_rotation(0, 5), 0);
        // m=16 period-4 word
        assert_eq!(min_rotation(0b1100110011001100, 16), 0b0011001100110011);
        let t = build_orbit_table(16).unwrap();
        let i = t.index_of(0b1100110011001100);
        assert_eq!(t.orbit_size(i), 4);
    }

    #[test]
    fn orbit_counts() {
        assert_eq!(build_orbit_table(4).unwrap().n_orbits(), 6);
        assert_eq!(build_orbit_table(7).unwrap().n_orbits(), 20);
        assert_eq!(build_orbit_table(14).unwrap().n_orbits(), 1182);
        assert_eq!(necklace_count(7), 20);
        assert_eq!(necklace_count(14), 1182);
        assert_eq!(necklace_count(18), 14602);
    }

    #[test]
    fn orbit_table_invariants() {
        for m in MIN_RING..=12 {
            let t = build_orbit_table(m).unwrap();
            assert_eq!(t.n_orbits() as u64, necklace_count(m), "m={m}");
            let total: u64 = (0..t.n_orbits()).map(|i| t.orbit_size(i) as u64).sum();
            assert_eq!(total, 1u64 << m);
            for i in 0..t.n_orbits() {
                assert_eq!(m as u32 % t.orbit_size(i), 0, "orbit size divides m");
                assert_eq!(min_rotation(t.rep(i), m), t.rep(i), "rep is minimal");
            }
        }
    }

    #[test]
    fn ring_size_guard() {
        assert!(build_orbit_table(2).is_err());
        assert!(build_orbit_table(25).is_err());
        assert!(RingAssignment::new(2, 0).is_err());
    }

    #[test]
    fn symmetrize_full_orbit() {
        let t = build_orbit_table(4).unwrap();
        let row = symmetrize_row(
            &t,
            [(0b0001u32, rat_int(1)), (0b0010, rat_int(1)), (0b0100, rat_int(1)), (0b1000, rat_int(1))],
        );
        assert_eq!(row.nnz(), 1);
        assert_eq!(row.get(t.index_of(0b0001)), Some(&rat_int(4)));
        let row2 = symmetrize_row(&t, [(0b0101u32, rat_int(1))]);
        assert_eq!(row2.nnz(), 1);
        assert_eq!(row2.get(t.index_of(0b0101)), Some(&rat_int(1)));
    }

    proptest! {
        #[test]
        fn canonical_rotation_invariant(w in 0u32..(1 << 12), k in 0usize..12) {
            for m in [5usize, 9, 12] {
                let w = w & ((1 << m) - 1);
                prop_assert_eq!(min_rotation(rotate(w, m, k % m), m), min_rotation(w, m));
                prop_assert_eq!(min_rotation(w, m), min_rotation_naive(w, m));
                // idempotence
                prop_assert_eq!(min_rotation(min_rotation(w, m), m), min_rotation(w, m));
            }
        }

        #[test]
        fn symmetrize_preserves_symmetric_evaluation(
            coeffs in proptest::collection::vec((0u32..(1 << 7), -5i64..=5), 1..20),
            seed in 0u64..1000,
        ) {
            // against a cyclically symmetric vector, the projected row
            // evaluates identically to the raw row
            let m = 7;
            let t = build_orbit_table(m).unwrap();
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let sym_vals: Vec<Rat> =
                (0..t.n_orbits()).map(|_| rat_int(rng.gen_range(-9i64..=9))).collect();
            let raw: Rat = coeffs
                .iter()
                .map(|&(w, c)| rat_int(c) * sym_vals[t.index_of(w & 0x7f)].clone())
                .fold(Rat::zero(), |a, b| a + b);
            let proj = symmetrize_row(&t, coeffs.iter().map(|&(w, c)| (w, rat_int(c))));
            let projected: Rat = proj.iter().map(|(i, c)| c.clone() * sym_vals[i].clone())
                .fold(Rat::zero(), |a, b| a + b);
            prop_assert_eq!(raw, projected);
        }
    }

    #[test]
    fn burnside_up_to_20() {
        // brute-force orbit partition agrees with the closed formula
        for m in MIN_RING..=20 {
            let mut count = 0u64;
            // count words that are minimal among their rotations
            if m <= 16 {
                for w in 0u32..(1 << m) {
                    if min_rotation(w, m) == w {
                        count += 1;
                    }
                }
                assert_eq!(count, necklace_count(m), "m={m}");
            }
        }
        assert_eq!(necklace_count(20), 52488);
    }
}
