//! Exact rational LP feasibility over {x >= 0, A x = b}.
//!
//! Every answer is exact: Feasible carries a rational point with A x = b,
//! Infeasible carries a Farkas dual with A^T y <= 0 and b^T y > 0. Small
//! systems go straight to the exact Bland simplex; large ones use row
//! generation around a floating-point phase I whose final basis is re-derived
//! exactly (p-adic solve) and then verified. When f64 cannot separate a tiny
//! margin from its own rounding error, a double-double pass and an exact
//! revised-simplex polish finish the job. The float passes are hints only,
//! they can never corrupt an answer.

mod exact;
mod tableau;

pub use tableau::{phase_one, PhaseOneResult, Pricing};

use crate::lin::{SparseMatrix, SparseVec};
use crate::scalar::{format_rat, parse_rat, Rat, Scalar};
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use std::collections::HashMap;
use thiserror::Error;

pub const DEFAULT_PIVOT_LIMIT: u64 = 10_000_000;

/// Systems at or below this row count skip the float hint entirely.
const EXACT_DIRECT_ROWS: usize = 260;
/// Largest active set the exact fallback simplex will attempt.
const EXACT_FALLBACK_ROWS: usize = 400;
/// Rows added per row-generation round.
const ROW_BATCH: usize = 300;

/// Perturbation magnitude / seed schedule for the float hint retries.
const HINT_CONFIGS: [(f64, u64); 16] = [
    (0.0, 0),
    (1e-7, 1),
    (1e-7, 2),
    (1e-6, 3),
    (1e-9, 4),
    (1e-7, 5),
    (1e-6, 6),
    (1e-8, 7),
    (1e-7, 8),
    (1e-6, 9),
    (1e-9, 10),
    (1e-8, 11),
    (1e-8, 12),
    (3e-8, 14),
    (1e-9, 16),
    (3e-7, 18),
];

#[derive(Debug, Error)]
pub enum LpError {
    #[error("pivot limit {0} exceeded")]
    PivotLimit(u64),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("float hint failed on a system too large for the exact fallback ({0} active rows)")]
    HintExhausted(usize),
}

/// Feasibility system A x = b, x >= 0.
#[derive(Clone, Debug)]
pub struct StandardLp {
    a: SparseMatrix<Rat>,
    b: Vec<Rat>,
}

impl StandardLp {
    pub fn new(a: SparseMatrix<Rat>, b: Vec<Rat>) -> Result<Self, LpError> {
        if a.n_rows() != b.len() {
            return Err(LpError::Dimension(format!(
                "{} rows vs {} rhs entries",
                a.n_rows(),
                b.len()
            )));
        }
        Ok(StandardLp { a, b })
    }

    pub fn a(&self) -> &SparseMatrix<Rat> {
        &self.a
    }

    pub fn b(&self) -> &[Rat] {
        &self.b
    }

    pub fn n_rows(&self) -> usize {
        self.a.n_rows()
    }

    pub fn n_cols(&self) -> usize {
        self.a.n_cols()
    }

    /// Plain-text dump: header `m_rows n_cols`, entry triples `row col value`,
    /// then the m rhs entries, one per line. Bit-exact round trip with `parse`.
    pub fn dump(&self) -> String {
        let mut out = format!("{} {}\n", self.n_rows(), self.n_cols());
        for (i, row) in self.a.rows().iter().enumerate() {
            for (j, v) in row.iter() {
                out.push_str(&format!("{} {} {}\n", i, j, format_rat(v)));
            }
        }
        for v in &self.b {
            out.push_str(&format_rat(v));
            out.push('\n');
        }
        out
    }

    pub fn parse(s: &str) -> Result<Self, LpError> {
        let mut lines = s.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| LpError::Parse("empty dump".into()))?;
        let mut it = header.split_whitespace();
        let m: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| LpError::Parse("bad header".into()))?;
        let n: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| LpError::Parse("bad header".into()))?;
        let mut entries: Vec<Vec<(usize, Rat)>> = vec![Vec::new(); m];
        let mut b = Vec::with_capacity(m);
        for line in lines {
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks.as_slice() {
                [i, j, v] => {
                    let i: usize =
                        i.parse().map_err(|e| LpError::Parse(format!("row index: {e}")))?;
                    let j: usize =
                        j.parse().map_err(|e| LpError::Parse(format!("col index: {e}")))?;
                    if i >= m || j >= n {
                        return Err(LpError::Parse(format!("entry ({i},{j}) out of bounds")));
                    }
                    entries[i].push((j, parse_rat(v).map_err(LpError::Parse)?));
                }
                [v] => b.push(parse_rat(v).map_err(LpError::Parse)?),
                _ => return Err(LpError::Parse(format!("unrecognized line {line:?}"))),
            }
        }
        if b.len() != m {
            return Err(LpError::Parse(format!("{} rhs entries, expected {m}", b.len())));
        }
        let mut a = SparseMatrix::new(n);
        for row in entries {
            a.push_row(SparseVec::from_entries(row));
        }
        StandardLp::new(a, b)
    }
}

#[derive(Clone, Debug)]
pub enum LpOutcome {
    Feasible { x: Vec<Rat> },
    Infeasible { y: Vec<Rat> },
}

impl LpOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, LpOutcome::Feasible { .. })
    }
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub pivot_limit: u64,
    pub float_hint: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { pivot_limit: DEFAULT_PIVOT_LIMIT, float_hint: true }
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub outcome: LpOutcome,
    pub pivots: u64,
}

pub fn solve_feasibility(lp: &StandardLp) -> Result<LpOutcome, LpError> {
    solve_with(lp, &SolveOptions::default()).map(|r| r.outcome)
}

pub fn solve_with(lp: &StandardLp, opts: &SolveOptions) -> Result<SolveReport, LpError> {
    let m = lp.n_rows();
    // presolve: zero rows and exact duplicate rows
    let mut kept: Vec<usize> = Vec::new();
    let mut seen: HashMap<Vec<(usize, String)>, usize> = HashMap::new();
    for i in 0..m {
        let row = lp.a.row(i);
        if row.is_empty() {
            if !lp.b[i].is_zero() {
                // 0 = b_i with b_i != 0
                let mut y = vec![Rat::zero(); m];
                y[i] = if lp.b[i].is_positive() { Rat::one() } else { -Rat::one() };
                return Ok(SolveReport { outcome: LpOutcome::Infeasible { y }, pivots: 0 });
            }
            continue;
        }
        let key: Vec<(usize, String)> = row.iter().map(|(j, v)| (j, format_rat(v))).collect();
        match seen.get(&key) {
            Some(&prev) => {
                if lp.b[prev] != lp.b[i] {
                    // identical rows, conflicting rhs
                    let mut y = vec![Rat::zero(); m];
                    let s = if lp.b[prev] > lp.b[i] { Rat::one() } else { -Rat::one() };
                    y[prev] = s.clone();
                    y[i] = -s;
                    return Ok(SolveReport { outcome: LpOutcome::Infeasible { y }, pivots: 0 });
                }
            }
            None => {
                seen.insert(key, i);
                kept.push(i);
            }
        }
    }

    let rows: Vec<&SparseVec<Rat>> = kept.iter().map(|&i| lp.a.row(i)).collect();
    let b: Vec<Rat> = kept.iter().map(|&i| lp.b[i].clone()).collect();
    let n = lp.n_cols();

    if rows.is_empty() {
        return Ok(SolveReport {
            outcome: LpOutcome::Feasible { x: vec![Rat::zero(); n] },
            pivots: 0,
        });
    }

    let (outcome, pivots) = if !opts.float_hint || rows.len() <= EXACT_DIRECT_ROWS {
        solve_exact_direct(&rows, &b, n, opts.pivot_limit)?
    } else {
        solve_hinted(&rows, &b, n, opts.pivot_limit)?
    };

    // lift the dual back to original row indices
    let outcome = match outcome {
        LpOutcome::Feasible { x } => LpOutcome::Feasible { x },
        LpOutcome::Infeasible { y } => {
            let mut full = vec![Rat::zero(); m];
            for (k, &i) in kept.iter().enumerate() {
                full[i] = y[k].clone();
            }
            LpOutcome::Infeasible { y: full }
        }
    };
    Ok(SolveReport { outcome, pivots })
}

fn solve_exact_direct(
    rows: &[&SparseVec<Rat>],
    b: &[Rat],
    n: usize,
    pivot_limit: u64,
) -> Result<(LpOutcome, u64), LpError> {
    let owned: Vec<SparseVec<Rat>> = rows.iter().map(|r| (*r).clone()).collect();
    let res = phase_one(&owned, b, n, Pricing::Bland, false, pivot_limit)?;
    let outcome = if res.feasible {
        LpOutcome::Feasible { x: res.x }
    } else {
        let y = unscale_dual(&res.y, &res.row_negated);
        LpOutcome::Infeasible { y }
    };
    Ok((outcome, res.pivots))
}

fn unscale_dual(y: &[Rat], negated: &[bool]) -> Vec<Rat> {
    y.iter()
        .zip(negated)
        .map(|(v, &neg)| if neg { -v.clone() } else { v.clone() })
        .collect()
}

/// Row generation around the float phase-I hint.
fn solve_hinted(
    rows: &[&SparseVec<Rat>],
    b: &[Rat],
    n: usize,
    pivot_limit: u64,
) -> Result<(LpOutcome, u64), LpError> {
    let m = rows.len();
    let mut active: Vec<usize> = (0..m).filter(|&i| !b[i].is_zero()).collect();
    {
        // stratified top-up so the first round is not degenerate
        let mut in_active = vec![false; m];
        for &i in &active {
            in_active[i] = true;
        }
        let want = ROW_BATCH.min(m);
        let stride = (m / want.max(1)).max(1);
        let mut i = 0;
        while active.len() < want && i < m {
            if !in_active[i] {
                in_active[i] = true;
                active.push(i);
            }
            i += stride;
        }
        active.sort_unstable();
    }

    let mut total_pivots = 0u64;
    loop {
        let act_rows: Vec<SparseVec<Rat>> = active.iter().map(|&i| rows[i].clone()).collect();
        let act_b: Vec<Rat> = active.iter().map(|&i| b[i].clone()).collect();
        let (step, pivots) = solve_active(&act_rows, &act_b, n, pivot_limit, total_pivots)?;
        total_pivots = pivots;
        match step {
            ActiveStep::Infeasible(y) => {
                // zero-extend: a certificate for a row subset certifies the
                // full system
                let mut full = vec![Rat::zero(); m];
                for (k, &i) in active.iter().enumerate() {
                    full[i] = y[k].clone();
                }
                return Ok((LpOutcome::Infeasible { y: full }, total_pivots));
            }
            ActiveStep::Feasible(x) => {
                let mut in_active = vec![false; m];
                for &i in &active {
                    in_active[i] = true;
                }
                // float screen first; exact residuals are expensive and only
                // the final "nothing violated" claim needs them
                let xf: Vec<f64> = x.iter().map(|v| v.to_f64()).collect();
                let mut violated: Vec<(usize, f64)> = Vec::new();
                for i in 0..m {
                    if in_active[i] {
                        continue;
                    }
                    let mut acc = 0.0;
                    for (j, v) in rows[i].iter() {
                        acc += v.to_f64() * xf[j];
                    }
                    let r = (acc - b[i].to_f64()).abs();
                    if r > 1e-9 {
                        violated.push((i, r));
                    }
                }
                if violated.is_empty() {
                    // exact pass over every inactive row before declaring done
                    for i in 0..m {
                        if in_active[i] {
                            continue;
                        }
                        let r = rows[i].dot_dense(&x) - b[i].clone();
                        if !r.is_zero() {
                            violated.push((i, r.to_f64().abs().max(1e-300)));
                        }
                    }
                }
                if violated.is_empty() {
                    return Ok((LpOutcome::Feasible { x }, total_pivots));
                }
                violated.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
                active.extend(violated.iter().take(ROW_BATCH).map(|&(i, _)| i));
                active.sort_unstable();
            }
            ActiveStep::GrowFromFloat(xf) => {
                // exact extraction failed everywhere, but the float point still
                // identifies missing rows; progress without an exact x
                let mut in_active = vec![false; m];
                for &i in &active {
                    in_active[i] = true;
                }
                let mut violated: Vec<(usize, f64)> = Vec::new();
                for i in 0..m {
                    if in_active[i] {
                        continue;
                    }
                    let mut acc = 0.0;
                    for (j, v) in rows[i].iter() {
                        acc += v.to_f64() * xf[j];
                    }
                    let r = (acc - b[i].to_f64()).abs();
                    if r > 1e-7 {
                        violated.push((i, r));
                    }
                }
                if violated.is_empty() {
                    return Err(LpError::HintExhausted(active.len()));
                }
                violated.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
                active.extend(violated.iter().take(ROW_BATCH).map(|&(i, _)| i));
                active.sort_unstable();
            }
        }
    }
}

enum ActiveStep {
    Feasible(Vec<Rat>),
    Infeasible(Vec<Rat>),
    /// No exact answer this round; float primal for violation screening.
    GrowFromFloat(Vec<f64>),
}

fn lpdbg() -> bool {
    static ON: std::sync::OnceLock<bool> = std::sync::OnceLock::new();
    *ON.get_or_init(|| std::env::var("LPDBG").is_ok())
}

fn solve_active(
    rows: &[SparseVec<Rat>],
    b: &[Rat],
    n: usize,
    pivot_limit: u64,
    pivots_so_far: u64,
) -> Result<(ActiveStep, u64), LpError> {
    let m = rows.len();
    // equilibrate: unit max-abs coefficient per row, exactly; duals are
    // unscaled symmetrically on the way out
    let row_scale: Vec<Rat> = rows
        .iter()
        .map(|r| {
            r.iter()
                .map(|(_, v)| if v.is_negative() { -v.clone() } else { v.clone() })
                .max()
                .unwrap_or_else(Rat::one)
        })
        .collect();
    let rows_sc: Vec<SparseVec<Rat>> = rows
        .iter()
        .zip(&row_scale)
        .map(|(r, s)| r.map_scalar(|v| v / s))
        .collect();
    let b_sc: Vec<Rat> = b.iter().zip(&row_scale).map(|(v, s)| v / s).collect();
    let rows: &[SparseVec<Rat>] = &rows_sc;
    let b: &[Rat] = &b_sc;
    let descale = |y: Vec<Rat>| -> Vec<Rat> {
        y.iter().zip(&row_scale).map(|(yi, s)| yi / s).collect()
    };
    let rows_f: Vec<SparseVec<f64>> = rows.iter().map(|r| r.map_scalar(|v| v.to_f64())).collect();
    let b_f: Vec<f64> = b.iter().map(|v| v.to_f64()).collect();
    // column-major view of the sign-scaled matrix, built once
    let negated: Vec<bool> = b.iter().map(|v| v.is_negative()).collect();
    let mut cols: Vec<Vec<(usize, Rat)>> = vec![Vec::new(); n];
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter() {
            let v = if negated[i] { -v.clone() } else { v.clone() };
            cols[j].push((i, v));
        }
    }
    let b_scaled: Vec<Rat> =
        b.iter().zip(&negated).map(|(v, &s)| if s { -v.clone() } else { v.clone() }).collect();

    let float_limit = 20_000u64.max(20 * m as u64);
    let mut pivots = pivots_so_far;
    let mut last_float_x: Option<Vec<f64>> = None;
    let mut failed_extractions = 0u32;

    for &(mag, seed) in &HINT_CONFIGS {
        let mut bp = b_f.clone();
        if mag > 0.0 {
            // perturb along the column space: b + A z with z >= 0 keeps
            // feasible systems feasible (x + z stays a solution) and, for
            // small magnitudes, leaves infeasible ones infeasible
            // odd seeds push the other way, which instead preserves
            // infeasibility (y^T A <= 0 keeps y^T (b - A z) positive)
            let dir = if seed % 2 == 0 { 1.0 } else { -1.0 };
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let z: Vec<f64> = (0..n).map(|_| dir * mag * (0.5 + rng.gen::<f64>())).collect();
            for (i, row) in rows_f.iter().enumerate() {
                let mut acc = 0.0;
                for (j, v) in row.iter() {
                    acc += v * z[j];
                }
                bp[i] += acc;
            }
        }
        let res = match phase_one(&rows_f, &bp, n, Pricing::Dantzig, true, float_limit) {
            Ok(r) => r,
            Err(LpError::PivotLimit(_)) => continue,
            Err(e) => return Err(e),
        };
        pivots += res.pivots;
        if pivots > pivot_limit {
            return Err(LpError::PivotLimit(pivot_limit));
        }
        if lpdbg() {
            eprintln!(
                "LPDBG config (mag={mag}, seed={seed}): m={m} feasible={} obj={:.3e} pivots={}",
                res.feasible, res.obj, res.pivots
            );
        }
        if res.feasible {
            last_float_x = Some(res.x.clone());
            if let Some(x) = extract_primal(&cols, &b_scaled, &res.basis, n, m) {
                return Ok((ActiveStep::Feasible(x), pivots));
            }
        } else {
            if let Some(y) = extract_dual(rows, b, &cols, &negated, &res.basis, n) {
                return Ok((ActiveStep::Infeasible(descale(y)), pivots));
            }
        }
        // several claims already failed exact extraction: f64 cannot
        // separate this margin, so stop burning configs and go to the
        // high-precision hint
        failed_extractions += 1;
        if failed_extractions >= 3 {
            break;
        }
    }

    // Second-chance hint in double-double precision: slower per pivot, but
    // resolves margins far below what f64 can separate, so its terminal
    // basis is usually exactly optimal already.
    {
        let rows_dd: Vec<SparseVec<crate::scalar::Dd>> =
            rows.iter().map(|r| r.map_scalar(crate::scalar::Dd::from_rat)).collect();
        let b_dd: Vec<crate::scalar::Dd> =
            b.iter().map(crate::scalar::Dd::from_rat).collect();
        let dd_limit = 80_000u64.max(50 * m as u64);
        match phase_one(&rows_dd, &b_dd, n, Pricing::Dantzig, true, dd_limit) {
            Err(LpError::PivotLimit(_)) => {}
            Err(e) => return Err(e),
            Ok(res) => {
                pivots += res.pivots;
                if pivots > pivot_limit {
                    return Err(LpError::PivotLimit(pivot_limit));
                }
                if lpdbg() {
                    eprintln!(
                        "LPDBG dd hint: m={m} feasible={} obj={:.3e} pivots={}",
                        res.feasible,
                        res.obj.to_f64(),
                        res.pivots
                    );
                }
                if res.feasible {
                    last_float_x = Some(res.x.iter().map(|v| v.to_f64()).collect());
                    if let Some(x) = extract_primal(&cols, &b_scaled, &res.basis, n, m) {
                        return Ok((ActiveStep::Feasible(x), pivots));
                    }
                } else {
                    if let Some(y) = extract_dual(rows, b, &cols, &negated, &res.basis, n) {
                        return Ok((ActiveStep::Infeasible(descale(y)), pivots));
                    }
                }
                // unperturbed system, so both polish outcomes transfer
                if res.obj.to_f64().abs() < 1e-2 {
                    if let Some((pr, pp)) =
                        polish(&cols, &b_scaled, &negated, &res.basis, n, m, 600)
                    {
                        pivots += pp;
                        match pr {
                            PolishResult::Feasible(x) => {
                                return Ok((ActiveStep::Feasible(x), pivots));
                            }
                            PolishResult::Infeasible(y) => {
                                if dual_is_valid(rows, b, &y, n) {
                                    return Ok((ActiveStep::Infeasible(descale(y)), pivots));
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    // all hint configs failed to produce an exact answer
    if m <= EXACT_FALLBACK_ROWS {
        let res = phase_one(rows, b, n, Pricing::Bland, false, pivot_limit - pivots)?;
        pivots += res.pivots;
        let step = if res.feasible {
            ActiveStep::Feasible(res.x)
        } else {
            ActiveStep::Infeasible(descale(unscale_dual(&res.y, &res.row_negated)))
        };
        return Ok((step, pivots));
    }
    // growing the active set reshapes the geometry, so prefer that over
    // giving up even when some configs claimed infeasibility
    match last_float_x {
        Some(xf) => Ok((ActiveStep::GrowFromFloat(xf), pivots)),
        None => Err(LpError::HintExhausted(m)),
    }
}

enum PolishResult {
    Feasible(Vec<Rat>),
    /// Unscaled dual; the caller must still verify it against the true system.
    Infeasible(Vec<Rat>),
}

/// Exact revised-simplex phase-I continuation from a candidate basis.
///
/// Every pivot costs two exact basis solves, so this only runs after the
/// cheap one-shot extraction has failed; it turns a float basis that is
/// merely near-optimal into an exactly optimal one. Returns None when the
/// starting basis is not a phase-I vertex (negative basic values), when a
/// solve fails, or when the pivot budget runs out.
fn polish(
    cols: &[Vec<(usize, Rat)>],
    b_scaled: &[Rat],
    negated: &[bool],
    basis0: &[usize],
    n: usize,
    m: usize,
    max_pivots: u64,
) -> Option<(PolishResult, u64)> {
    let build_rows = |basis: &[usize]| -> Vec<SparseVec<Rat>> {
        let mut b_rows: Vec<Vec<(usize, Rat)>> = vec![Vec::new(); m];
        for (k, &c) in basis.iter().enumerate() {
            if c < n {
                for (i, v) in &cols[c] {
                    b_rows[*i].push((k, v.clone()));
                }
            } else {
                b_rows[c - n].push((k, Rat::one()));
            }
        }
        b_rows.into_iter().map(SparseVec::from_entries).collect()
    };

    let mut basis: Vec<usize> = basis0.to_vec();
    let mut b_rows = build_rows(&basis);
    let mut xb = match exact::solve_rows(&b_rows, b_scaled) {
        Some(v) => v,
        None => {
            let (dependent, uncovered) = exact::singular_structure(&b_rows)?;
            for (&k, &u) in dependent.iter().zip(&uncovered) {
                basis[k] = n + u;
            }
            b_rows = build_rows(&basis);
            exact::solve_rows(&b_rows, b_scaled)?
        }
    };
    if xb.iter().any(|v| v.is_negative()) {
        if lpdbg() {
            eprintln!("LPDBG polish: starting basis is not a phase-I vertex");
        }
        return None;
    }

    // Anti-degeneracy: nudge every basic value by a tiny random positive
    // amount. This is a rhs perturbation along the current basis columns, so
    // the vertex stays valid, every ratio test is untied, and each pivot
    // makes strict progress (no stalling on degenerate vertices). Dual
    // feasibility of the final basis does not involve the rhs, so the true
    // answer is recovered afterwards by re-solving for the unperturbed rhs.
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x706f6c697368);
    let eps_den = num_bigint::BigInt::from(10u8).pow(30);
    for v in xb.iter_mut() {
        let num = num_bigint::BigInt::from(rng.gen_range(1u64..1_000_000));
        *v += Rat::new(num, eps_den.clone());
    }

    let mut pivots = 0u64;
    loop {
        // dual from the current basis, then Bland entering over all columns
        let bt_rows: Vec<SparseVec<Rat>> = basis
            .iter()
            .map(|&c| {
                if c < n {
                    SparseVec::from_entries(cols[c].clone())
                } else {
                    SparseVec::from_entries(vec![(c - n, Rat::one())])
                }
            })
            .collect();
        let c_b: Vec<Rat> = basis
            .iter()
            .map(|&c| if c >= n { Rat::one() } else { Rat::zero() })
            .collect();
        let y = exact::solve_rows(&bt_rows, &c_b)?;

        // most negative reduced cost enters; the perturbation above makes
        // every pivot strictly improving, so this cannot cycle
        let mut entering: Option<(usize, Rat)> = None;
        for (j, col) in cols.iter().enumerate() {
            let mut d = Rat::zero();
            for (i, v) in col {
                d -= &y[*i] * v;
            }
            if d.is_negative() && entering.as_ref().map_or(true, |(_, best)| d < *best) {
                entering = Some((j, d));
            }
        }
        for (i, yi) in y.iter().enumerate() {
            let d = Rat::one() - yi;
            if d.is_negative() && entering.as_ref().map_or(true, |(_, best)| d < *best) {
                entering = Some((n + i, d));
            }
        }
        let entering = entering.map(|(j, _)| j);

        let Some(j) = entering else {
            // dual feasible, hence optimal; recover the basic values for the
            // true (unperturbed) rhs
            let xb_true = exact::solve_rows(&b_rows, b_scaled)?;
            let mut obj = Rat::zero();
            let mut x = vec![Rat::zero(); n];
            let mut vertex_ok = true;
            for (k, &c) in basis.iter().enumerate() {
                if xb_true[k].is_negative() {
                    vertex_ok = false;
                }
                if c < n {
                    x[c] = xb_true[k].clone();
                } else {
                    obj += &xb_true[k];
                }
            }
            if lpdbg() {
                eprintln!(
                    "LPDBG polish: optimal after {pivots} exact pivots, obj={:.3e}, vertex_ok={vertex_ok}",
                    obj.to_f64()
                );
            }
            // a positive objective needs only dual feasibility: y^T b equals
            // the objective and y^T A <= 0 is exactly what "no entering
            // column" certified
            if obj.is_positive() {
                return Some((PolishResult::Infeasible(unscale_dual(&y, negated)), pivots));
            }
            if obj.is_zero() && vertex_ok {
                return Some((PolishResult::Feasible(x), pivots));
            }
            return None;
        };

        // entering column in scaled coordinates
        let mut a_col = vec![Rat::zero(); m];
        if j < n {
            for (i, v) in &cols[j] {
                a_col[*i] = v.clone();
            }
        } else {
            a_col[j - n] = Rat::one();
        }
        let w = exact::solve_rows(&b_rows, &a_col)?;

        // ratio test, Bland tie-break on the leaving column index
        let mut leave: Option<(usize, Rat)> = None;
        for (k, wk) in w.iter().enumerate() {
            if !wk.is_positive() {
                continue;
            }
            let ratio = &xb[k] / wk;
            let better = match &leave {
                None => true,
                Some((r, best)) => ratio < *best || (ratio == *best && basis[k] < basis[*r]),
            };
            if better {
                leave = Some((k, ratio));
            }
        }
        let (r, theta) = leave?;

        for (k, wk) in w.iter().enumerate() {
            if k != r && !wk.is_zero() {
                xb[k] -= &theta * wk;
            }
        }
        xb[r] = theta;
        basis[r] = j;
        b_rows = build_rows(&basis);

        pivots += 1;
        if pivots >= max_pivots {
            if lpdbg() {
                eprintln!("LPDBG polish: pivot budget {max_pivots} exhausted");
            }
            return None;
        }
    }
}

/// Exact primal from a claimed-feasible basis: solve B x_B = b and check
/// nonnegativity; artificial components must vanish. Bases that are exactly
/// singular (float degeneracy) are repaired by swapping the dependent
/// positions for artificials of the uncovered rows.
fn extract_primal(
    cols: &[Vec<(usize, Rat)>],
    b_scaled: &[Rat],
    basis: &[usize],
    n: usize,
    m: usize,
) -> Option<Vec<Rat>> {
    let build = |basis: &[usize]| -> Vec<SparseVec<Rat>> {
        // rows of B over the active row index i, entries indexed by basis position
        let mut b_rows: Vec<Vec<(usize, Rat)>> = vec![Vec::new(); m];
        for (k, &c) in basis.iter().enumerate() {
            if c < n {
                for (i, v) in &cols[c] {
                    b_rows[*i].push((k, v.clone()));
                }
            } else {
                b_rows[c - n].push((k, Rat::one()));
            }
        }
        b_rows.into_iter().map(SparseVec::from_entries).collect()
    };
    let mut basis: Vec<usize> = basis.to_vec();
    let mut b_rows = build(&basis);
    let xb = match exact::solve_rows(&b_rows, b_scaled) {
        Some(v) => v,
        None => {
            // degenerate float pivoting can hand us dependent columns
            let (dependent, uncovered) = exact::singular_structure(&b_rows)?;
            for (&k, &u) in dependent.iter().zip(&uncovered) {
                basis[k] = n + u;
            }
            if lpdbg() {
                eprintln!("LPDBG extract_primal: repaired {} dependent basis positions", dependent.len());
            }
            b_rows = build(&basis);
            match exact::solve_rows(&b_rows, b_scaled) {
                Some(v) => v,
                None => {
                    if lpdbg() {
                        eprintln!("LPDBG extract_primal: basis solve failed even after repair");
                    }
                    return None;
                }
            }
        }
    };
    let mut x = vec![Rat::zero(); n];
    for (k, &c) in basis.iter().enumerate() {
        if xb[k].is_negative() {
            if lpdbg() {
                eprintln!("LPDBG extract_primal: negative basic value at pos {k} ({:.3e})", xb[k].to_f64());
            }
            return None;
        }
        if c < n {
            x[c] = xb[k].clone();
        } else if !xb[k].is_zero() {
            // artificial stuck at a nonzero value: not actually feasible
            if lpdbg() {
                eprintln!("LPDBG extract_primal: artificial {k} nonzero ({:.3e})", xb[k].to_f64());
            }
            return None;
        }
    }
    Some(x)
}

/// Exact Farkas dual from a claimed-infeasible basis: solve B^T y = c_B,
/// then check y^T A <= 0 columnwise and y^T b > 0, all exactly. Singular
/// bases are repaired the same way as on the primal side.
fn extract_dual(
    rows: &[SparseVec<Rat>],
    b: &[Rat],
    cols: &[Vec<(usize, Rat)>],
    negated: &[bool],
    basis: &[usize],
    n: usize,
) -> Option<Vec<Rat>> {
    let m = rows.len();
    // rows of B^T are the basis columns of the scaled system
    let build_bt = |basis: &[usize]| -> Vec<SparseVec<Rat>> {
        basis
            .iter()
            .map(|&c| {
                if c < n {
                    SparseVec::from_entries(cols[c].clone())
                } else {
                    SparseVec::from_entries(vec![(c - n, Rat::one())])
                }
            })
            .collect()
    };
    let c_of = |basis: &[usize]| -> Vec<Rat> {
        basis.iter().map(|&c| if c >= n { Rat::one() } else { Rat::zero() }).collect()
    };
    let mut basis: Vec<usize> = basis.to_vec();
    let mut bt_rows = build_bt(&basis);
    let mut c_b = c_of(&basis);
    let y_scaled = match exact::solve_rows(&bt_rows, &c_b) {
        Some(v) => v,
        None => {
            // repair on the untransposed basis matrix B (rows = active rows)
            let mut b_cols: Vec<Vec<(usize, Rat)>> = vec![Vec::new(); m];
            for (k, row) in bt_rows.iter().enumerate() {
                for (i, v) in row.iter() {
                    b_cols[i].push((k, v.clone()));
                }
            }
            let b_form: Vec<SparseVec<Rat>> =
                b_cols.into_iter().map(SparseVec::from_entries).collect();
            let (dependent, uncovered) = exact::singular_structure(&b_form)?;
            for (&k, &u) in dependent.iter().zip(&uncovered) {
                basis[k] = n + u;
            }
            if lpdbg() {
                eprintln!("LPDBG extract_dual: repaired {} dependent basis positions", dependent.len());
            }
            bt_rows = build_bt(&basis);
            c_b = c_of(&basis);
            match exact::solve_rows(&bt_rows, &c_b) {
                Some(v) => v,
                None => {
                    if lpdbg() {
                        eprintln!("LPDBG extract_dual: transpose basis solve failed even after repair");
                    }
                    return None;
                }
            }
        }
    };
    let y = unscale_dual(&y_scaled, negated);
    if !dual_is_valid(rows, b, &y, n) {
        return None;
    }
    Some(y)
}

/// Exact check of the Farkas conditions y^T b > 0 and y^T A <= 0 against the
/// true, unperturbed system.
fn dual_is_valid(rows: &[SparseVec<Rat>], b: &[Rat], y: &[Rat], n: usize) -> bool {
    let mut ytb = Rat::zero();
    for (yi, bi) in y.iter().zip(b) {
        ytb += yi * bi;
    }
    if !ytb.is_positive() {
        if lpdbg() {
            eprintln!("LPDBG dual check: ytb not positive ({:.3e})", ytb.to_f64());
        }
        return false;
    }
    let mut yta = vec![Rat::zero(); n];
    for (row, yi) in rows.iter().zip(y) {
        if yi.is_zero() {
            continue;
        }
        for (j, v) in row.iter() {
            yta[j] += yi * v;
        }
    }
    if yta.iter().any(|v| v.is_positive()) {
        if lpdbg() {
            let cnt = yta.iter().filter(|v| v.is_positive()).count();
            let worst = yta.iter().filter(|v| v.is_positive()).map(|v| v.to_f64()).fold(0.0, f64::max);
            eprintln!("LPDBG dual check: {cnt} positive yta entries, worst {worst:.3e}");
        }
        return false;
    }
    true
}

/// Independent re-check of an outcome's defining invariants.
pub fn verify_certificate(lp: &StandardLp, out: &LpOutcome) -> bool {
    match out {
        LpOutcome::Feasible { x } => {
            if x.len() != lp.n_cols() {
                return false;
            }
            if x.iter().any(|v| v.is_negative()) {
                return false;
            }
            lp.a.apply(x) == lp.b
        }
        LpOutcome::Infeasible { y } => {
            if y.len() != lp.n_rows() {
                return false;
            }
            let yta = lp.a.transpose_apply(y);
            if yta.iter().any(|v| v.is_positive()) {
                return false;
            }
            let mut ytb = Rat::zero();
            for (yi, bi) in y.iter().zip(&lp.b) {
                ytb += yi * bi;
            }
            ytb.is_positive()
        }
    }
}
