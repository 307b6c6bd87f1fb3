//! Classical simulators.
//!
//! Two distinct roles: the asymmetric triangle-local model (three different
//! sources and response tables) that reproduces the target distribution, and
//! the fully symmetric classical ring simulator (one shared source table, one
//! shared response map) that serves as the soundness oracle for every
//! inflation constraint family.

use crate::dist::{constant, ConstantTag, Outcome};
use crate::scalar::{format_rat, parse_rat, rat, Rat};
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LocalModelError {
    #[error("no wiring convention reproduces the target correlators; transcription error in the tables")]
    NoConvention,
    #[error("{0} distinct distributions match the target; the convention search is ambiguous")]
    Ambiguous(usize),
    #[error("{0}")]
    Guard(String),
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Constant(#[from] crate::dist::constants::ConstantError),
}

/// How a party's response table is indexed and how bits map to outcomes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Wiring {
    /// Permutation applied to the source labels (alpha, beta, gamma).
    pub source_perm: [usize; 3],
    /// Per party (a, b, c): true swaps the row/column sources of its table.
    pub swapped: [bool; 3],
    /// False: table bit 0 is +1; true: table bit 0 is -1.
    pub flip_sign: bool,
}

/// The Appendix-style triangle model: three source distributions over
/// {1,2,3}, three binary response tables, and the wiring that connects them.
///
/// Party a reads sources (beta, gamma), party b (gamma, alpha), party c
/// (alpha, beta); the first source indexes the rows unless swapped.
#[derive(Clone, Debug)]
pub struct TriangleLocalModel {
    /// Rows alpha, beta, gamma.
    pub source_dists: [[Rat; 3]; 3],
    /// f_a, f_b, f_c.
    pub response_tables: [[[u8; 3]; 3]; 3],
    pub wiring: Wiring,
}

const PARTY_SOURCES: [(usize, usize); 3] = [(1, 2), (2, 0), (0, 1)];

impl TriangleLocalModel {
    pub fn validate(&self) -> Result<(), LocalModelError> {
        for (name, row) in ["alpha", "beta", "gamma"].iter().zip(&self.source_dists) {
            if row.iter().any(|v| v.is_negative()) {
                return Err(LocalModelError::Invalid(format!("source {name} has a negative entry")));
            }
            let total: Rat = row.iter().cloned().fold(Rat::zero(), |a, b| a + b);
            if !total.is_one() {
                return Err(LocalModelError::Invalid(format!("source {name} sums to {total}, not 1")));
            }
        }
        for (name, t) in ["f_a", "f_b", "f_c"].iter().zip(&self.response_tables) {
            if t.iter().flatten().any(|&b| b > 1) {
                return Err(LocalModelError::Invalid(format!("table {name} has a non-binary entry")));
            }
        }
        Ok(())
    }

    /// Plain-text model file: source rows as exact rationals, then the three
    /// response tables, then the sign map.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (name, row) in ["alpha", "beta", "gamma"].iter().zip(&self.source_dists) {
            out.push_str(name);
            for v in row {
                out.push(' ');
                out.push_str(&format_rat(v));
            }
            out.push('\n');
        }
        for (name, t) in ["f_a", "f_b", "f_c"].iter().zip(&self.response_tables) {
            for r in t {
                out.push_str(&format!("{name} {} {} {}\n", r[0], r[1], r[2]));
            }
        }
        out.push_str(&format!(
            "wiring perm {} {} {} swapped {} {} {} flip {}\n",
            self.wiring.source_perm[0],
            self.wiring.source_perm[1],
            self.wiring.source_perm[2],
            self.wiring.swapped[0] as u8,
            self.wiring.swapped[1] as u8,
            self.wiring.swapped[2] as u8,
            self.wiring.flip_sign as u8,
        ));
        out
    }

    pub fn from_text(s: &str) -> Result<Self, LocalModelError> {
        let mut sources: [Option<[Rat; 3]>; 3] = [None, None, None];
        let mut tables: [Vec<[u8; 3]>; 3] = [Vec::new(), Vec::new(), Vec::new()];
        let mut wiring = None;
        for line in s.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let toks: Vec<&str> = line.split_whitespace().collect();
            let parse3 = |t: &[&str]| -> Result<[Rat; 3], LocalModelError> {
                if t.len() != 3 {
                    return Err(LocalModelError::Parse(format!("expected 3 values in {line:?}")));
                }
                Ok([
                    parse_rat(t[0]).map_err(LocalModelError::Parse)?,
                    parse_rat(t[1]).map_err(LocalModelError::Parse)?,
                    parse_rat(t[2]).map_err(LocalModelError::Parse)?,
                ])
            };
            match toks[0] {
                "alpha" => sources[0] = Some(parse3(&toks[1..])?),
                "beta" => sources[1] = Some(parse3(&toks[1..])?),
                "gamma" => sources[2] = Some(parse3(&toks[1..])?),
                "f_a" | "f_b" | "f_c" => {
                    let k = (toks[0].as_bytes()[2] - b'a') as usize;
                    if toks.len() != 4 {
                        return Err(LocalModelError::Parse(format!("bad table row {line:?}")));
                    }
                    let mut row = [0u8; 3];
                    for (slot, t) in row.iter_mut().zip(&toks[1..]) {
                        *slot = t
                            .parse()
                            .map_err(|e| LocalModelError::Parse(format!("table {}: {e}", toks[0])))?;
                    }
                    tables[k].push(row);
                }
                "wiring" => {
                    if toks.len() != 11 || toks[1] != "perm" || toks[5] != "swapped" || toks[9] != "flip" {
                        return Err(LocalModelError::Parse(format!("bad wiring line {line:?}")));
                    }
                    let u = |t: &str| -> Result<usize, LocalModelError> {
                        t.parse().map_err(|e| LocalModelError::Parse(format!("wiring: {e}")))
                    };
                    wiring = Some(Wiring {
                        source_perm: [u(toks[2])?, u(toks[3])?, u(toks[4])?],
                        swapped: [u(toks[6])? != 0, u(toks[7])? != 0, u(toks[8])? != 0],
                        flip_sign: u(toks[10])? != 0,
                    });
                }
                other => return Err(LocalModelError::Parse(format!("unknown line tag {other:?}"))),
            }
        }
        let model = TriangleLocalModel {
            source_dists: [
                sources[0].clone().ok_or_else(|| LocalModelError::Parse("missing alpha".into()))?,
                sources[1].clone().ok_or_else(|| LocalModelError::Parse("missing beta".into()))?,
                sources[2].clone().ok_or_else(|| LocalModelError::Parse("missing gamma".into()))?,
            ],
            response_tables: [
                to_table(&tables[0], "f_a")?,
                to_table(&tables[1], "f_b")?,
                to_table(&tables[2], "f_c")?,
            ],
            wiring: wiring.ok_or_else(|| LocalModelError::Parse("missing wiring".into()))?,
        };
        model.validate()?;
        Ok(model)
    }
}

fn to_table(rows: &[[u8; 3]], name: &str) -> Result<[[u8; 3]; 3], LocalModelError> {
    if rows.len() != 3 {
        return Err(LocalModelError::Parse(format!("table {name} needs 3 rows, got {}", rows.len())));
    }
    Ok([rows[0], rows[1], rows[2]])
}

/// Exact distribution over the 8 outcome triples, indexed by
/// bit(a) | bit(b) << 1 | bit(c) << 2.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangleDist {
    pub probs: [Rat; 8],
}

impl TriangleDist {
    pub fn prob(&self, a: Outcome, b: Outcome, c: Outcome) -> &Rat {
        &self.probs[(a.bit() | b.bit() << 1 | c.bit() << 2) as usize]
    }

    /// (E1, E2, E3) averages: single-, two- and three-body correlators.
    pub fn correlators(&self) -> (Rat, Rat, Rat) {
        let mut e1 = Rat::zero();
        let mut e2 = Rat::zero();
        let mut e3 = Rat::zero();
        for idx in 0..8u32 {
            let s: Vec<i64> =
                (0..3).map(|k| Outcome::from_bit(idx >> k & 1).sign()).collect();
            let p = &self.probs[idx as usize];
            e1 += p * Rat::from_integer(((s[0] + s[1] + s[2]) as i64).into());
            e2 += p * Rat::from_integer(((s[0] * s[1] + s[0] * s[2] + s[1] * s[2]) as i64).into());
            e3 += p * Rat::from_integer((s[0] * s[1] * s[2]).into());
        }
        (e1 / rat(3, 1), e2 / rat(3, 1), e3)
    }

    /// Largest |p(a,b,c) - p(sigma(a,b,c))| over all 6 party permutations.
    pub fn permutation_asymmetry(&self) -> Rat {
        let perms: [[usize; 3]; 6] =
            [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let mut worst = Rat::zero();
        for idx in 0..8u32 {
            let bits = [idx & 1, idx >> 1 & 1, idx >> 2 & 1];
            for perm in perms {
                let j = bits[perm[0]] | bits[perm[1]] << 1 | bits[perm[2]] << 2;
                let d = (&self.probs[idx as usize] - &self.probs[j as usize]).abs();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }
}

/// Exact enumeration over the 27 source-symbol combinations.
pub fn simulate_triangle(model: &TriangleLocalModel) -> TriangleDist {
    let mut probs: [Rat; 8] = Default::default();
    let perm = model.wiring.source_perm;
    for i in 0..3usize {
        for j in 0..3usize {
            for k in 0..3usize {
                let sym = [i, j, k]; // symbol emitted by alpha, beta, gamma
                let w = &model.source_dists[perm[0]][i]
                    * &model.source_dists[perm[1]][j]
                    * &model.source_dists[perm[2]][k];
                if w.is_zero() {
                    continue;
                }
                let mut idx = 0u32;
                for party in 0..3 {
                    let (s1, s2) = PARTY_SOURCES[party];
                    let (mut r, mut c) = (sym[s1], sym[s2]);
                    if model.wiring.swapped[party] {
                        std::mem::swap(&mut r, &mut c);
                    }
                    let mut bit = model.response_tables[party][r][c] as u32;
                    if model.wiring.flip_sign {
                        bit ^= 1;
                    }
                    idx |= bit << party;
                }
                probs[idx as usize] += w;
            }
        }
    }
    TriangleDist { probs }
}

/// One shared bipartite source table and one shared stochastic response map;
/// the symmetric-realization hypothesis made concrete.
#[derive(Clone, Debug)]
pub struct SymmetricClassicalModel {
    /// source[u][v]: joint probability that a source sends u left, v right.
    pub source: Vec<Vec<Rat>>,
    /// response[left][right]: probability of outputting +1.
    pub response: Vec<Vec<Rat>>,
}

pub const MAX_ALPHABET: usize = 6;
pub const MAX_SIM_RING: usize = 8;

impl SymmetricClassicalModel {
    pub fn new(source: Vec<Vec<Rat>>, response: Vec<Vec<Rat>>) -> Result<Self, LocalModelError> {
        let k = source.len();
        if k == 0 || k > MAX_ALPHABET {
            return Err(LocalModelError::Guard(format!(
                "alphabet size {k} outside 1..={MAX_ALPHABET}"
            )));
        }
        if source.iter().any(|r| r.len() != k) || response.len() != k
            || response.iter().any(|r| r.len() != k)
        {
            return Err(LocalModelError::Invalid("ragged source/response tables".into()));
        }
        let mut total = Rat::zero();
        for row in &source {
            for v in row {
                if v.is_negative() {
                    return Err(LocalModelError::Invalid("negative source probability".into()));
                }
                total += v;
            }
        }
        if !total.is_one() {
            return Err(LocalModelError::Invalid(format!("source sums to {total}, not 1")));
        }
        for row in &response {
            for v in row {
                if v.is_negative() || v > &Rat::one() {
                    return Err(LocalModelError::Invalid("response probability outside [0,1]".into()));
                }
            }
        }
        Ok(SymmetricClassicalModel { source, response })
    }

    pub fn alphabet(&self) -> usize {
        self.source.len()
    }
}

/// Exact ring distribution over the 2^m outcome words, word bit i = node i.
///
/// Node i receives the right message of source i-1 and the left message of
/// source i; the result is p(word) = tr(M_{a_0} ... M_{a_{m-1}}) for transfer
/// matrices M_a[v_prev][v] = sum_u source[u][v] resp(v_prev, u, a), which
/// makes cyclic invariance structural.
pub fn simulate_symmetric_ring(
    model: &SymmetricClassicalModel,
    m: usize,
) -> Result<Vec<Rat>, LocalModelError> {
    if !(3..=MAX_SIM_RING).contains(&m) {
        return Err(LocalModelError::Guard(format!("ring size {m} outside 3..={MAX_SIM_RING}")));
    }
    let k = model.alphabet();
    // transfer matrices for outcomes +1 and -1
    let mut transfer = [vec![vec![Rat::zero(); k]; k], vec![vec![Rat::zero(); k]; k]];
    for v_prev in 0..k {
        for v in 0..k {
            let mut plus = Rat::zero();
            let mut minus = Rat::zero();
            for u in 0..k {
                let s = &model.source[u][v];
                plus += s * &model.response[v_prev][u];
                minus += s * (Rat::one() - &model.response[v_prev][u]);
            }
            transfer[0][v_prev][v] = plus;
            transfer[1][v_prev][v] = minus;
        }
    }
    let mut out = Vec::with_capacity(1 << m);
    for word in 0u32..1 << m {
        let mut prod = transfer[(word & 1) as usize].clone();
        for pos in 1..m {
            let next = &transfer[(word >> pos & 1) as usize];
            prod = mat_mul(&prod, next);
        }
        let trace = (0..k).map(|i| prod[i][i].clone()).fold(Rat::zero(), |a, b| a + b);
        out.push(trace);
    }
    Ok(out)
}

fn mat_mul(a: &[Vec<Rat>], b: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    let k = a.len();
    let mut out = vec![vec![Rat::zero(); k]; k];
    for i in 0..k {
        for l in 0..k {
            if a[i][l].is_zero() {
                continue;
            }
            for j in 0..k {
                out[i][j] += &a[i][l] * &b[l][j];
            }
        }
    }
    out
}

/// The (E1, E2, E3) the symmetric model induces on the triangle itself.
pub fn triangle_correlators(
    model: &SymmetricClassicalModel,
) -> Result<(Rat, Rat, Rat), LocalModelError> {
    let p3 = simulate_symmetric_ring(model, 3)?;
    let probs: [Rat; 8] = p3.try_into().expect("2^3 entries");
    Ok(TriangleDist { probs }.correlators())
}

fn paper_p_rows(x: &Rat, y: &Rat) -> [[Rat; 3]; 3] {
    let half = rat(1, 2);
    [
        [x.clone(), Rat::one() - x, Rat::zero()],
        [y.clone(), (Rat::one() - y) * &half, (Rat::one() - y) * &half],
        [Rat::one() - x, x.clone(), Rat::zero()],
    ]
}

const PAPER_TABLES: [[[u8; 3]; 3]; 3] = [
    [[1, 0, 1], [0, 0, 0], [1, 1, 1]],
    [[1, 1, 0], [0, 1, 0], [0, 0, 0]],
    [[0, 1, 0], [1, 1, 0], [0, 0, 0]],
];

const PERMS: [[usize; 3]; 6] =
    [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

fn search_wirings(
    p_rows: &[[Rat; 3]; 3],
    targets: &(Rat, Rat, Rat),
    tol: &Rat,
) -> Vec<(Wiring, TriangleDist)> {
    let mut found = Vec::new();
    for perm in PERMS {
        for orders in 0u8..8 {
            for flip in [false, true] {
                let wiring = Wiring {
                    source_perm: perm,
                    swapped: [orders & 1 != 0, orders & 2 != 0, orders & 4 != 0],
                    flip_sign: flip,
                };
                let model = TriangleLocalModel {
                    source_dists: p_rows.clone(),
                    response_tables: PAPER_TABLES,
                    wiring,
                };
                let dist = simulate_triangle(&model);
                let (e1, e2, e3) = dist.correlators();
                if (&e1 - &targets.0).abs() < *tol
                    && (&e2 - &targets.1).abs() < *tol
                    && (&e3 - &targets.2).abs() < *tol
                {
                    found.push((wiring, dist));
                }
            }
        }
    }
    found
}

/// Search the finite convention space of the published tables for the one
/// reproducing (E1c, -1/3, E3c). Conventions that yield the same distribution
/// are treated as one; anything else is a hard failure.
pub fn resolve_wiring(precision_bits: u32) -> Result<TriangleLocalModel, LocalModelError> {
    let x = constant(ConstantTag::XRoot, precision_bits)?;
    let y = constant(ConstantTag::YValue, precision_bits)?;
    let e1c = constant(ConstantTag::E1C, precision_bits)?;
    let e3c = constant(ConstantTag::E3C, precision_bits)?;
    let p_rows = paper_p_rows(x.value(), y.value());
    let targets = (e1c.value().clone(), rat(-1, 3), e3c.value().clone());
    let tol = rat(1, 100_000_000);
    let found = search_wirings(&p_rows, &targets, &tol);
    if found.is_empty() {
        return Err(LocalModelError::NoConvention);
    }
    // distinct distributions among the matches
    let mut distinct: Vec<&TriangleDist> = Vec::new();
    for (_, d) in &found {
        if !distinct.iter().any(|seen| {
            seen.probs.iter().zip(&d.probs).all(|(a, b)| (a - b).abs() < tol)
        }) {
            distinct.push(d);
        }
    }
    if distinct.len() != 1 {
        return Err(LocalModelError::Ambiguous(distinct.len()));
    }
    let wiring = found[0].0;
    Ok(TriangleLocalModel { source_dists: p_rows, response_tables: PAPER_TABLES, wiring })
}
