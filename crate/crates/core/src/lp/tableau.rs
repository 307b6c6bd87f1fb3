//! Dense phase-I simplex tableau, generic over the scalar type.
//!
//! The exact instantiation (Bland pricing, zero tolerance) is the reference
//! solver; the f64 instantiation (Dantzig pricing, artificials banned from
//! re-entering) only ever produces a candidate basis that the caller
//! re-derives exactly.

use crate::lin::SparseVec;
use crate::lp::LpError;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pricing {
    Bland,
    Dantzig,
}

#[derive(Clone, Debug)]
pub struct PhaseOneResult<S> {
    pub feasible: bool,
    pub obj: S,
    /// Basic column per row: 0..n structural, n..n+m artificial.
    pub basis: Vec<usize>,
    /// Structural primal values (meaningful when feasible).
    pub x: Vec<S>,
    /// Dual multipliers per sign-scaled row.
    pub y: Vec<S>,
    pub pivots: u64,
    /// True where the row was negated to make the rhs nonnegative.
    pub row_negated: Vec<bool>,
}

/// Gauss-Jordan pivot of the whole tableau on element (r, c).
fn pivot_tableau<S: Scalar>(t: &mut [S], width: usize, m: usize, r: usize, c: usize) {
    let piv = t[r * width + c].clone();
    for j in 0..width {
        if !t[r * width + j].is_zero() {
            t[r * width + j] = t[r * width + j].clone() / piv.clone();
        }
    }
    for i in 0..m {
        if i == r {
            continue;
        }
        let f = t[i * width + c].clone();
        if f.is_zero() {
            continue;
        }
        for j in 0..width {
            if !t[r * width + j].is_zero() {
                t[i * width + j] = t[i * width + j].clone() - f.clone() * t[r * width + j].clone();
            }
        }
        t[i * width + c] = S::zero();
    }
}

pub fn phase_one<S: Scalar>(
    rows: &[SparseVec<S>],
    b: &[S],
    n_cols: usize,
    pricing: Pricing,
    ban_artificials: bool,
    pivot_limit: u64,
) -> Result<PhaseOneResult<S>, LpError> {
    let m = rows.len();
    let n = n_cols;
    let width = n + m + 1;
    let rhs = n + m;
    let tol = S::pivot_tol();

    let mut t = vec![S::zero(); m * width];
    let mut row_negated = vec![false; m];
    for (i, row) in rows.iter().enumerate() {
        let neg = b[i] < S::zero();
        row_negated[i] = neg;
        for (j, v) in row.iter() {
            t[i * width + j] = if neg { -v.clone() } else { v.clone() };
        }
        t[i * width + n + i] = S::one();
        t[i * width + rhs] = if neg { -b[i].clone() } else { b[i].clone() };
    }
    let raw = t.clone();
    let mut basis: Vec<usize> = (n..n + m).collect();
    // reduced costs: structural d_j = -sum_i a_ij, artificial d = 0
    let mut d = vec![S::zero(); n + m];
    for i in 0..m {
        for (j, dj) in d.iter_mut().enumerate().take(n) {
            if !t[i * width + j].is_zero() {
                *dj = dj.clone() - t[i * width + j].clone();
            }
        }
    }

    // Rebuild the tableau from the raw data for the current basis, clearing
    // accumulated floating-point error. Pivots are taken greedily by largest
    // magnitude; if the basis turns out numerically singular the refresh is
    // abandoned (returns false) and the caller keeps the drifted tableau.
    let refresh = |t: &mut Vec<S>, d: &mut Vec<S>, basis: &[usize]| -> bool {
        let mut fresh = raw.clone();
        let mut done = vec![false; m];
        for _ in 0..m {
            let mut best: Option<(usize, S)> = None;
            for r in 0..m {
                if done[r] {
                    continue;
                }
                let v = fresh[r * width + basis[r]].clone();
                let mag = if v < S::zero() { -v } else { v };
                if best.as_ref().map_or(true, |(_, b)| mag > *b) {
                    best = Some((r, mag));
                }
            }
            let (r, mag) = best.unwrap();
            if !(mag > tol) {
                return false;
            }
            pivot_tableau(&mut fresh, width, m, r, basis[r]);
            done[r] = true;
        }
        // feasibility drift shows up as small negative basic values; clamp
        for (i, row_done) in done.iter().enumerate() {
            debug_assert!(row_done);
            if fresh[i * width + rhs] < S::zero() {
                fresh[i * width + rhs] = S::zero();
            }
        }
        for j in 0..n + m {
            let mut dj = if j >= n { S::one() } else { S::zero() };
            for (i, &bc) in basis.iter().enumerate() {
                if bc >= n && !fresh[i * width + j].is_zero() {
                    dj = dj - fresh[i * width + j].clone();
                }
            }
            d[j] = dj;
        }
        *t = fresh;
        true
    };

    let objective = |t: &[S], basis: &[usize]| -> S {
        let mut acc = S::zero();
        for (i, &bc) in basis.iter().enumerate() {
            if bc >= n {
                acc = acc + t[i * width + rhs].clone();
            }
        }
        acc
    };

    let mut pivots = 0u64;
    let mut since_refresh = 0u64;
    let mut final_refreshes = 0u32;
    let mut desperate = false;
    let mut blocked = vec![false; n + m];
    loop {
        if pricing == Pricing::Dantzig && since_refresh >= S::refresh_interval() {
            refresh(&mut t, &mut d, &basis);
            since_refresh = 0;
            blocked.iter_mut().for_each(|f| *f = false);
        }
        let obj = objective(&t, &basis);
        if obj <= tol {
            // don't trust a float zero built on a stale tableau
            if pricing == Pricing::Dantzig && since_refresh > 0 && final_refreshes < 3 {
                let ok = refresh(&mut t, &mut d, &basis);
                since_refresh = 0;
                final_refreshes += 1;
                blocked.iter_mut().for_each(|f| *f = false);
                if ok {
                    continue;
                }
            }
            break;
        }
        // entering column
        let candidate_range = if ban_artificials { n } else { n + m };
        let entering = match pricing {
            Pricing::Bland => (0..candidate_range)
                .find(|&j| !blocked[j] && d[j] < -tol.clone()),
            Pricing::Dantzig => (0..candidate_range)
                .filter(|&j| !blocked[j] && d[j] < -tol.clone())
                .min_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap_or(std::cmp::Ordering::Equal)),
        };
        let Some(c) = entering else {
            // apparent optimality (or a fully blocked round): reinvert once
            // before believing it
            if pricing == Pricing::Dantzig && since_refresh > 0 && final_refreshes < 3 {
                let ok = refresh(&mut t, &mut d, &basis);
                since_refresh = 0;
                final_refreshes += 1;
                blocked.iter_mut().for_each(|f| *f = false);
                if ok {
                    continue;
                }
            }
            // every improving column is blocked on a freshly reinverted
            // tableau: allow one round of tiny ratio-test pivots, each
            // followed by an immediate reinversion
            if pricing == Pricing::Dantzig && !desperate && blocked.iter().any(|&f| f) {
                desperate = true;
                blocked.iter_mut().for_each(|f| *f = false);
                continue;
            }
            break;
        };

        // ratio test
        let ratio_tol = if desperate { S::zero() } else { tol.clone() };
        let mut leave: Option<(usize, S)> = None;
        for i in 0..m {
            let piv = &t[i * width + c];
            if *piv <= ratio_tol {
                continue;
            }
            let ratio = t[i * width + rhs].clone() / piv.clone();
            let better = match &leave {
                None => true,
                Some((r, best)) => {
                    if ratio < *best {
                        true
                    } else if ratio == *best {
                        match pricing {
                            // Bland: smallest basic index leaves
                            Pricing::Bland => basis[i] < basis[*r],
                            // numerical: prefer the larger pivot element
                            Pricing::Dantzig => *piv > t[*r * width + c],
                        }
                    } else {
                        false
                    }
                }
            };
            if better {
                leave = Some((i, ratio));
            }
        }
        let Some((r, _)) = leave else {
            // numerically degenerate column; never pick it again this round
            blocked[c] = true;
            continue;
        };
        blocked.iter_mut().for_each(|f| *f = false);

        pivots += 1;
        if pivots > pivot_limit {
            return Err(LpError::PivotLimit(pivot_limit));
        }

        // pivot on (r, c)
        since_refresh += 1;
        if desperate {
            // tiny pivot: clean up right away
            desperate = false;
            since_refresh = S::refresh_interval();
        }
        pivot_tableau(&mut t, width, m, r, c);
        let f = d[c].clone();
        if !f.is_zero() {
            for j in 0..n + m {
                if !t[r * width + j].is_zero() {
                    d[j] = d[j].clone() - f.clone() * t[r * width + j].clone();
                }
            }
            d[c] = S::zero();
        }
        basis[r] = c;
    }

    let obj = objective(&t, &basis);
    let feasible = obj <= tol;
    let mut x = vec![S::zero(); n];
    for (i, &bc) in basis.iter().enumerate() {
        if bc < n {
            x[bc] = t[i * width + rhs].clone();
        }
    }
    let y: Vec<S> = (0..m).map(|i| S::one() - d[n + i].clone()).collect();
    Ok(PhaseOneResult { feasible, obj, basis, x, y, pivots, row_negated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rat_int, Rat};
    use num_traits::{One, Zero};

    fn sv(entries: Vec<(usize, Rat)>) -> SparseVec<Rat> {
        SparseVec::from_entries(entries)
    }

    #[test]
    fn trivially_feasible() {
        let rows = vec![sv(vec![(0, Rat::one())])];
        let r = phase_one(&rows, &[Rat::one()], 1, Pricing::Bland, false, 1000).unwrap();
        assert!(r.feasible);
        assert_eq!(r.x, vec![Rat::one()]);
    }

    #[test]
    fn conflicting_rows_give_farkas_dual() {
        // x1 = 1 and x1 = 2
        let rows = vec![sv(vec![(0, Rat::one())]), sv(vec![(0, Rat::one())])];
        let b = [rat_int(1), rat_int(2)];
        let r = phase_one(&rows, &b, 1, Pricing::Bland, false, 1000).unwrap();
        assert!(!r.feasible);
        // y^T A <= 0 and y^T b > 0 (no row was negated here)
        let yta = r.y[0].clone() + r.y[1].clone();
        assert!(yta <= Rat::zero());
        let ytb = r.y[0].clone() * b[0].clone() + r.y[1].clone() * b[1].clone();
        assert!(ytb > Rat::zero());
    }

    #[test]
    fn negative_rhs_handled() {
        // -x1 = -3 -> x1 = 3
        let rows = vec![sv(vec![(0, -Rat::one())])];
        let r = phase_one(&rows, &[rat_int(-3)], 1, Pricing::Bland, false, 1000).unwrap();
        assert!(r.feasible);
        assert_eq!(r.x, vec![rat_int(3)]);
        assert!(r.row_negated[0]);
    }

    #[test]
    fn float_instantiation_agrees() {
        let rows_f: Vec<SparseVec<f64>> = vec![
            SparseVec::from_entries(vec![(0, 1.0), (1, 2.0)]),
            SparseVec::from_entries(vec![(0, 3.0), (1, 1.0)]),
        ];
        let r = phase_one(&rows_f, &[1.0, 2.0], 2, Pricing::Dantzig, true, 1000).unwrap();
        assert!(r.feasible);
        assert!((r.x[0] + 2.0 * r.x[1] - 1.0).abs() < 1e-9);
        assert!((3.0 * r.x[0] + r.x[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_system_terminates() {
        // several dependent rows around a feasible point
        let rows = vec![
            sv(vec![(0, Rat::one()), (1, Rat::one())]),
            sv(vec![(0, rat_int(2)), (1, rat_int(2))]),
            sv(vec![(0, Rat::one())]),
        ];
        let b = [rat_int(1), rat_int(2), rat(1, 2)];
        let r = phase_one(&rows, &b, 2, Pricing::Bland, false, 10_000).unwrap();
        assert!(r.feasible);
        assert_eq!(r.x[0].clone() + r.x[1].clone(), rat_int(1));
    }
}
