//! Ring-inflation constraint systems.
//!
//! A symmetric triangle realization of the observed distribution implies, for
//! every ring size m, a cyclically symmetric distribution over the 2^m ring
//! outcomes whose short marginals are inherited from the observed one. The
//! generators below emit those implied linear constraints over orbit
//! variables; `assemble` stitches them into a feasibility LP.
//!
//! Orbit variables hold per-word probabilities: x_rep = p(rep), so the
//! normalization row is sum over orbits of orbit_size * x_rep = 1.

use crate::dist::{marginal1_poly, marginal2_poly, Outcome, SymmetricDist, OUTCOMES};
use crate::lin::{Poly2, SparseMatrix, SparseVec};
use crate::lp::StandardLp;
use crate::scalar::{format_rat, rat_int, Rat};
use crate::symmetry::{self, build_orbit_table, min_rotation, symmetrize_row, OrbitTable};
use num_traits::{One, Zero};
use std::collections::HashSet;
use std::fmt;
use thiserror::Error;

pub const MIN_INFLATION_RING: usize = 4;

#[derive(Debug, Error)]
pub enum InflationError {
    #[error("ring size {0} outside {MIN_INFLATION_RING}..={}", symmetry::MAX_RING)]
    RingSize(usize),
    #[error("hierarchy level {0} out of range 1..={}", symmetry::MAX_RING - 3)]
    Level(usize),
    #[error("symbolic right-hand sides are unavailable with {0:?}: that family puts the observed correlators into the coefficient matrix, so its certificates bind only the anchor distribution")]
    SymbolicWithLpi(Family),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RingSpec {
    pub m: usize,
}

impl RingSpec {
    pub fn new(m: usize) -> Result<Self, InflationError> {
        if !(MIN_INFLATION_RING..=symmetry::MAX_RING).contains(&m) {
            return Err(InflationError::RingSize(m));
        }
        Ok(RingSpec { m })
    }
}

/// Level n demands rings {4, 5, ..., n+3}; level 11 reaches 14 nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HierarchyLevel {
    pub n: usize,
}

impl HierarchyLevel {
    pub fn new(n: usize) -> Result<Self, InflationError> {
        if n < 1 || n + 3 > symmetry::MAX_RING {
            return Err(InflationError::Level(n));
        }
        Ok(HierarchyLevel { n })
    }

    pub fn ring_sizes(&self) -> Vec<usize> {
        (4..=self.n + 3).collect()
    }
}

/// Which rings an assembly covers.
#[derive(Clone, Copy, Debug)]
pub enum Scope {
    Ring(RingSpec),
    Level(HierarchyLevel),
}

impl Scope {
    pub fn ring_sizes(&self) -> Vec<usize> {
        match self {
            Scope::Ring(r) => vec![r.m],
            Scope::Level(l) => l.ring_sizes(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    L1,
    L2,
    Factorized,
    DirectMarginal,
    Coupling,
    Normalization,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::L1,
        Family::L2,
        Family::Factorized,
        Family::DirectMarginal,
        Family::Coupling,
        Family::Normalization,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::L1 => "L1",
            Family::L2 => "L2",
            Family::Factorized => "FACTORIZED",
            Family::DirectMarginal => "DIRECT_MARGINAL",
            Family::Coupling => "COUPLING",
            Family::Normalization => "NORMALIZATION",
        }
    }
}

impl std::str::FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "L1" => Ok(Family::L1),
            "L2" => Ok(Family::L2),
            "FACTORIZED" | "FACT" => Ok(Family::Factorized),
            "DIRECT_MARGINAL" | "DIRECT" => Ok(Family::DirectMarginal),
            "COUPLING" | "COUP" => Ok(Family::Coupling),
            "NORMALIZATION" | "NORM" => Ok(Family::Normalization),
            other => Err(format!("unknown family {other:?}")),
        }
    }
}

/// Set of enabled constraint families; NORMALIZATION is always present.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilySet(std::collections::BTreeSet<Family>);

impl FamilySet {
    pub fn new() -> Self {
        let mut s = std::collections::BTreeSet::new();
        s.insert(Family::Normalization);
        FamilySet(s)
    }

    pub fn with(mut self, f: Family) -> Self {
        self.0.insert(f);
        self
    }

    pub fn all() -> Self {
        Family::ALL.iter().fold(FamilySet::new(), |s, &f| s.with(f))
    }

    /// The scan default: LPI rows plus couplings.
    pub fn scan_default() -> Self {
        FamilySet::new().with(Family::L1).with(Family::L2).with(Family::Coupling)
    }

    pub fn contains(&self, f: Family) -> bool {
        self.0.contains(&f)
    }

    pub fn iter(&self) -> impl Iterator<Item = Family> + '_ {
        self.0.iter().copied()
    }

    /// Parse a comma-separated list; NORMALIZATION is added regardless.
    pub fn parse(s: &str) -> Result<Self, String> {
        let mut set = FamilySet::new();
        for tok in s.split(',').filter(|t| !t.trim().is_empty()) {
            set = set.with(tok.parse()?);
        }
        Ok(set)
    }
}

impl Default for FamilySet {
    fn default() -> Self {
        FamilySet::new()
    }
}

impl fmt::Display for FamilySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.iter().map(Family::name).collect();
        write!(f, "{}", names.join(","))
    }
}

fn word(assignments: &[(usize, Outcome)]) -> u32 {
    let mut w = 0u32;
    for &(pos, o) in assignments {
        w |= o.bit() << pos;
    }
    w
}

fn ctx_outcome(ctx: u32, i: usize) -> Outcome {
    Outcome::from_bit((ctx >> i) & 1)
}

type RowKey = Vec<(usize, String)>;

fn row_key(row: &SparseVec<Rat>) -> RowKey {
    row.iter().map(|(j, v)| (j, format_rat(v))).collect()
}

/// Eq. (5) first identity: the single-node marginal of three consecutive ring
/// nodes, conditioned on any outside context, factors through q1. Empty for
/// m < 5 (the content is then FACTORIZED).
pub fn gen_l1(table: &OrbitTable, d: &SymmetricDist) -> Vec<SparseVec<Rat>> {
    let m = table.m;
    if m < 5 {
        return Vec::new();
    }
    let mut seen: HashSet<RowKey> = HashSet::new();
    let mut out = Vec::new();
    for a1 in OUTCOMES {
        for ctx in 0u32..1 << (m - 3) {
            let mut coeffs: Vec<(u32, Rat)> = Vec::new();
            let fixed: Vec<(usize, Outcome)> = std::iter::once((1, a1))
                .chain((0..m - 3).map(|i| (3 + i, ctx_outcome(ctx, i))))
                .collect();
            for a0 in OUTCOMES {
                for a2 in OUTCOMES {
                    let mut asg = fixed.clone();
                    asg.push((0, a0));
                    asg.push((2, a2));
                    coeffs.push((word(&asg), Rat::one()));
                }
            }
            let c = d.marginal1(a1);
            let fixed2: Vec<(usize, Outcome)> =
                (0..m - 3).map(|i| (3 + i, ctx_outcome(ctx, i))).collect();
            for a0 in OUTCOMES {
                for a1b in OUTCOMES {
                    for a2 in OUTCOMES {
                        let mut asg = fixed2.clone();
                        asg.extend([(0, a0), (1, a1b), (2, a2)]);
                        coeffs.push((word(&asg), -c.clone()));
                    }
                }
            }
            let row = symmetrize_row(table, coeffs);
            if seen.insert(row_key(&row)) {
                out.push(row);
            }
        }
    }
    out
}

/// Eq. (5) second identity: the adjacent-pair marginal of four consecutive
/// nodes factors through q2. Empty for m < 6.
pub fn gen_l2(table: &OrbitTable, d: &SymmetricDist) -> Vec<SparseVec<Rat>> {
    let m = table.m;
    if m < 6 {
        return Vec::new();
    }
    let mut seen: HashSet<RowKey> = HashSet::new();
    let mut out = Vec::new();
    for a1 in OUTCOMES {
        for a2 in OUTCOMES {
            for ctx in 0u32..1 << (m - 4) {
                let mut coeffs: Vec<(u32, Rat)> = Vec::new();
                let fixed: Vec<(usize, Outcome)> = [(1, a1), (2, a2)]
                    .into_iter()
                    .chain((0..m - 4).map(|i| (4 + i, ctx_outcome(ctx, i))))
                    .collect();
                for a0 in OUTCOMES {
                    for a3 in OUTCOMES {
                        let mut asg = fixed.clone();
                        asg.push((0, a0));
                        asg.push((3, a3));
                        coeffs.push((word(&asg), Rat::one()));
                    }
                }
                let c = d.marginal2(a1, a2);
                let fixed2: Vec<(usize, Outcome)> =
                    (0..m - 4).map(|i| (4 + i, ctx_outcome(ctx, i))).collect();
                for free in 0u32..16 {
                    let mut asg = fixed2.clone();
                    for p in 0..4 {
                        asg.push((p, ctx_outcome(free, p)));
                    }
                    coeffs.push((word(&asg), -c.clone()));
                }
                let row = symmetrize_row(table, coeffs);
                if seen.insert(row_key(&row)) {
                    out.push(row);
                }
            }
        }
    }
    out
}

/// Maximal runs of consecutive surviving nodes on the ring, as (start, len).
fn arcs(survive_mask: u32, m: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for start in 0..m {
        let alive = |i: usize| (survive_mask >> (i % m)) & 1 == 1;
        if !alive(start) || alive(start + m - 1) {
            continue;
        }
        let mut len = 1;
        while alive(start + len) {
            len += 1;
        }
        out.push((start, len));
    }
    out
}

/// Eq. (7): deletion sets whose surviving arcs have length 1 or 2 give rows
/// whose right-hand side is a fully known product of q1/q2 factors. All valid
/// deletion sets are enumerated up to cyclic equivalence.
pub fn gen_factorized(table: &OrbitTable) -> Vec<(SparseVec<Rat>, Poly2<Rat>)> {
    let m = table.m;
    let full = (1u32 << m) - 1;
    let mut seen_masks: HashSet<u32> = HashSet::new();
    let mut seen_rows: HashSet<(RowKey, String)> = HashSet::new();
    let mut out = Vec::new();
    for deleted in 1..full {
        if !seen_masks.insert(min_rotation(deleted, m)) {
            continue;
        }
        let survive = full & !deleted;
        let arcs = arcs(survive, m);
        if arcs.iter().any(|&(_, len)| len > 2) {
            continue;
        }
        let surv: Vec<usize> = (0..m).filter(|&i| (survive >> i) & 1 == 1).collect();
        let del: Vec<usize> = (0..m).filter(|&i| (deleted >> i) & 1 == 1).collect();
        for assign in 0u32..1 << surv.len() {
            let amap: Vec<(usize, Outcome)> =
                surv.iter().enumerate().map(|(t, &pos)| (pos, ctx_outcome(assign, t))).collect();
            let at = |pos: usize| {
                amap.iter().find(|&&(p, _)| p == pos).map(|&(_, o)| o).expect("surviving node")
            };
            let mut coeffs: Vec<(u32, Rat)> = Vec::new();
            for dels in 0u32..1 << del.len() {
                let mut asg = amap.clone();
                for (t, &pos) in del.iter().enumerate() {
                    asg.push((pos, ctx_outcome(dels, t)));
                }
                coeffs.push((word(&asg), Rat::one()));
            }
            let mut rhs = Poly2::constant(Rat::one());
            for &(start, len) in &arcs {
                let factor = if len == 1 {
                    marginal1_poly(at(start))
                } else {
                    marginal2_poly(at(start), at((start + 1) % m))
                };
                rhs = rhs.mul(&factor).expect("bounded degree");
            }
            let row = symmetrize_row(table, coeffs);
            if seen_rows.insert((row_key(&row), rhs.to_text())) {
                out.push((row, rhs));
            }
        }
    }
    out
}

/// Single-node marginal equals q1, adjacent-pair marginal equals q2.
pub fn gen_direct_marginals(table: &OrbitTable) -> Vec<(SparseVec<Rat>, Poly2<Rat>)> {
    let m = table.m;
    let mut seen: HashSet<(RowKey, String)> = HashSet::new();
    let mut out = Vec::new();
    for a0 in OUTCOMES {
        let mut coeffs: Vec<(u32, Rat)> = Vec::new();
        for rest in 0u32..1 << (m - 1) {
            let mut asg = vec![(0, a0)];
            asg.extend((0..m - 1).map(|i| (i + 1, ctx_outcome(rest, i))));
            coeffs.push((word(&asg), Rat::one()));
        }
        let row = symmetrize_row(table, coeffs);
        let rhs = marginal1_poly(a0);
        if seen.insert((row_key(&row), rhs.to_text())) {
            out.push((row, rhs));
        }
    }
    for a0 in OUTCOMES {
        for a1 in OUTCOMES {
            let mut coeffs: Vec<(u32, Rat)> = Vec::new();
            for rest in 0u32..1 << (m - 2) {
                let mut asg = vec![(0, a0), (1, a1)];
                asg.extend((0..m - 2).map(|i| (i + 2, ctx_outcome(rest, i))));
                coeffs.push((word(&asg), Rat::one()));
            }
            let row = symmetrize_row(table, coeffs);
            let rhs = marginal2_poly(a0, a1);
            if seen.insert((row_key(&row), rhs.to_text())) {
                out.push((row, rhs));
            }
        }
    }
    out
}

/// Eq. (6): marginalizing the last two nodes of the m-ring gives the same
/// distribution as marginalizing the last node of the (m-1)-ring, for every
/// shared context. Variable indices: m-ring orbits first, then (m-1)-ring
/// orbits shifted by the m-ring orbit count.
pub fn gen_coupling(
    table_m: &OrbitTable,
    table_m1: &OrbitTable,
) -> Vec<SparseVec<Rat>> {
    let m = table_m.m;
    assert_eq!(table_m1.m, m - 1, "coupling links consecutive ring sizes");
    let shift = table_m.n_orbits();
    let mut seen: HashSet<RowKey> = HashSet::new();
    let mut out = Vec::new();
    for ctx in 0u32..1 << (m - 2) {
        let base: Vec<(usize, Outcome)> = (0..m - 2).map(|i| (i, ctx_outcome(ctx, i))).collect();
        let mut coeffs: Vec<(usize, Rat)> = Vec::new();
        for tail in 0u32..4 {
            let mut asg = base.clone();
            asg.push((m - 2, ctx_outcome(tail, 0)));
            asg.push((m - 1, ctx_outcome(tail, 1)));
            coeffs.push((table_m.index_of(word(&asg)), Rat::one()));
        }
        for tail in 0u32..2 {
            let mut asg = base.clone();
            asg.push((m - 2, ctx_outcome(tail, 0)));
            coeffs.push((shift + table_m1.index_of(word(&asg)), -Rat::one()));
        }
        let row = SparseVec::accumulate(coeffs);
        if seen.insert(row_key(&row)) {
            out.push(row);
        }
    }
    out
}

/// Pre-substitution system: E-independent coefficient matrix with Poly2
/// right-hand sides. Only available for family sets without L1/L2.
#[derive(Clone, Debug)]
pub struct SymbolicSystem {
    pub a: SparseMatrix<Rat>,
    pub rhs: Vec<Poly2<Rat>>,
    pub ring_sizes: Vec<usize>,
    /// Column offset of each ring's orbit block.
    pub offsets: Vec<usize>,
}

impl SymbolicSystem {
    pub fn substitute(&self, e1: &Rat, e2: &Rat) -> StandardLp {
        let b: Vec<Rat> = self.rhs.iter().map(|p| p.eval(e1, e2)).collect();
        StandardLp::new(self.a.clone(), b).expect("dimensions consistent by construction")
    }
}

/// Assembled LP plus the ring/column layout behind it.
#[derive(Clone, Debug)]
pub struct Assembly {
    pub lp: StandardLp,
    pub ring_sizes: Vec<usize>,
    pub offsets: Vec<usize>,
}

pub fn assemble(
    scope: &Scope,
    d: &SymmetricDist,
    families: &FamilySet,
) -> Result<Assembly, InflationError> {
    let sizes = validated_sizes(scope)?;
    let tables: Vec<OrbitTable> = sizes
        .iter()
        .map(|&m| build_orbit_table(m).expect("size validated"))
        .collect();
    let (offsets, n_cols) = layout(&tables);

    let mut rows: Vec<SparseVec<Rat>> = Vec::new();
    let mut b: Vec<Rat> = Vec::new();
    for (k, table) in tables.iter().enumerate() {
        let off = offsets[k];
        push_normalization(table, off, &mut rows, &mut b);
        if families.contains(Family::L1) {
            for r in gen_l1(table, d) {
                rows.push(shift_row(&r, off));
                b.push(Rat::zero());
            }
        }
        if families.contains(Family::L2) {
            for r in gen_l2(table, d) {
                rows.push(shift_row(&r, off));
                b.push(Rat::zero());
            }
        }
        if families.contains(Family::Factorized) {
            for (r, rhs) in gen_factorized(table) {
                rows.push(shift_row(&r, off));
                b.push(rhs.eval(d.e1(), d.e2()));
            }
        }
        if families.contains(Family::DirectMarginal) {
            for (r, rhs) in gen_direct_marginals(table) {
                rows.push(shift_row(&r, off));
                b.push(rhs.eval(d.e1(), d.e2()));
            }
        }
    }
    if families.contains(Family::Coupling) {
        push_couplings(&sizes, &tables, &offsets, |row| {
            rows.push(row);
            b.push(Rat::zero());
        });
    }

    let (rows, b) = dedup_rows(rows, b, |bv: &Rat| format_rat(bv));
    let mut a = SparseMatrix::new(n_cols);
    for r in rows {
        a.push_row(r);
    }
    let lp = StandardLp::new(a, b).expect("dimensions consistent by construction");
    Ok(Assembly { lp, ring_sizes: sizes, offsets })
}

/// Assemble with the right-hand sides kept as polynomials in (E1, E2).
pub fn assemble_symbolic(
    scope: &Scope,
    families: &FamilySet,
) -> Result<SymbolicSystem, InflationError> {
    for f in [Family::L1, Family::L2] {
        if families.contains(f) {
            return Err(InflationError::SymbolicWithLpi(f));
        }
    }
    let sizes = validated_sizes(scope)?;
    let tables: Vec<OrbitTable> = sizes
        .iter()
        .map(|&m| build_orbit_table(m).expect("size validated"))
        .collect();
    let (offsets, n_cols) = layout(&tables);

    let mut rows: Vec<SparseVec<Rat>> = Vec::new();
    let mut rhs: Vec<Poly2<Rat>> = Vec::new();
    for (k, table) in tables.iter().enumerate() {
        let off = offsets[k];
        {
            let mut b_tmp = Vec::new();
            push_normalization(table, off, &mut rows, &mut b_tmp);
            rhs.push(Poly2::constant(Rat::one()));
        }
        if families.contains(Family::Factorized) {
            for (r, p) in gen_factorized(table) {
                rows.push(shift_row(&r, off));
                rhs.push(p);
            }
        }
        if families.contains(Family::DirectMarginal) {
            for (r, p) in gen_direct_marginals(table) {
                rows.push(shift_row(&r, off));
                rhs.push(p);
            }
        }
    }
    if families.contains(Family::Coupling) {
        push_couplings(&sizes, &tables, &offsets, |row| {
            rows.push(row);
            rhs.push(Poly2::zero());
        });
    }

    let (rows, rhs) = dedup_rows(rows, rhs, |p: &Poly2<Rat>| p.to_text());
    let mut a = SparseMatrix::new(n_cols);
    for r in rows {
        a.push_row(r);
    }
    Ok(SymbolicSystem { a, rhs, ring_sizes: sizes, offsets })
}

fn validated_sizes(scope: &Scope) -> Result<Vec<usize>, InflationError> {
    let sizes = scope.ring_sizes();
    for &m in &sizes {
        RingSpec::new(m)?;
    }
    Ok(sizes)
}

fn layout(tables: &[OrbitTable]) -> (Vec<usize>, usize) {
    let mut offsets = Vec::with_capacity(tables.len());
    let mut off = 0;
    for t in tables {
        offsets.push(off);
        off += t.n_orbits();
    }
    (offsets, off)
}

fn push_normalization(
    table: &OrbitTable,
    off: usize,
    rows: &mut Vec<SparseVec<Rat>>,
    b: &mut Vec<Rat>,
) {
    let row = SparseVec::from_entries(
        (0..table.n_orbits()).map(|i| (off + i, rat_int(table.orbit_size(i) as i64))).collect(),
    );
    rows.push(row);
    b.push(Rat::one());
}

fn push_couplings(
    sizes: &[usize],
    tables: &[OrbitTable],
    offsets: &[usize],
    mut sink: impl FnMut(SparseVec<Rat>),
) {
    for k in 0..sizes.len() {
        let m = sizes[k];
        let Some(k1) = sizes.iter().position(|&s| s == m - 1) else { continue };
        let shift = tables[k].n_orbits();
        for r in gen_coupling(&tables[k], &tables[k1]) {
            // remap concatenated-local indices into the global layout
            let remapped = SparseVec::from_entries(
                r.iter()
                    .map(|(j, v)| {
                        let g = if j < shift {
                            offsets[k] + j
                        } else {
                            offsets[k1] + (j - shift)
                        };
                        (g, v.clone())
                    })
                    .collect(),
            );
            sink(remapped);
        }
    }
}

fn shift_row(row: &SparseVec<Rat>, off: usize) -> SparseVec<Rat> {
    SparseVec::from_entries(row.iter().map(|(j, v)| (off + j, v.clone())).collect())
}

fn dedup_rows<B>(
    rows: Vec<SparseVec<Rat>>,
    b: Vec<B>,
    key_of: impl Fn(&B) -> String,
) -> (Vec<SparseVec<Rat>>, Vec<B>) {
    let mut seen: HashSet<(RowKey, String)> = HashSet::new();
    let mut out_rows = Vec::new();
    let mut out_b = Vec::new();
    for (r, bv) in rows.into_iter().zip(b) {
        if seen.insert((row_key(&r), key_of(&bv))) {
            out_rows.push(r);
            out_b.push(bv);
        }
    }
    (out_rows, out_b)
}

/// Sidecar manifest accompanying an exported constraint system.
pub fn manifest(ring_sizes: &[usize], families: &FamilySet, e1: &Rat, e2: &Rat) -> String {
    let sizes: Vec<String> = ring_sizes.iter().map(|m| m.to_string()).collect();
    format!(
        "rings {}\nfamilies {}\ne1 {}\ne2 {}\n",
        sizes.join(","),
        families,
        format_rat(e1),
        format_rat(e2),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{solve_feasibility, verify_certificate};
    use crate::scalar::rat;
    use num_traits::{Signed, Zero};

    fn heptagon_families() -> FamilySet {
        FamilySet::new().with(Family::L1).with(Family::L2)
    }

    fn dist(e1: Rat, e2: Rat) -> SymmetricDist {
        SymmetricDist::marginal_only(e1, e2).unwrap()
    }

    /// Per-word uniform vector over orbit variables of one ring.
    fn uniform_x(table: &OrbitTable) -> Vec<Rat> {
        vec![rat(1, 1 << table.m); table.n_orbits()]
    }

    #[test]
    fn l1_row_counts_and_uniform() {
        let t = build_orbit_table(7).unwrap();
        let d0 = dist(Rat::zero(), Rat::zero());
        let rows = gen_l1(&t, &d0);
        // raw count 2 * 2^4 = 32 before projection; projection collapses shifts
        assert!(!rows.is_empty() && rows.len() <= 32);
        let x = uniform_x(&t);
        for r in &rows {
            assert!(r.dot_dense(&x).is_zero(), "uniform violates an L1 row");
        }
        assert!(gen_l1(&build_orbit_table(4).unwrap(), &d0).is_empty());
    }

    #[test]
    fn l2_uniform_and_min_size() {
        let d0 = dist(Rat::zero(), Rat::zero());
        let t6 = build_orbit_table(6).unwrap();
        let rows = gen_l2(&t6, &d0);
        assert!(!rows.is_empty());
        let x = uniform_x(&t6);
        for r in &rows {
            assert!(r.dot_dense(&x).is_zero());
        }
        assert!(gen_l2(&build_orbit_table(5).unwrap(), &d0).is_empty());
    }

    #[test]
    fn l2_known_block_coefficient() {
        // q2(+1,-1) at (1753/10000, -1/3) is 1/3
        let d = dist(rat(1753, 10000), rat(-1, 3));
        assert_eq!(d.marginal2(Outcome::Plus, Outcome::Minus), rat(1, 3));
    }

    #[test]
    fn factorized_contains_paper_patterns() {
        let t = build_orbit_table(7).unwrap();
        let rows = gen_factorized(&t);
        // S = {2,5,6}: arcs {0,1} and {3,4} -> q2 * q2
        let target1 = marginal2_poly(Outcome::Plus, Outcome::Plus)
            .mul(&marginal2_poly(Outcome::Minus, Outcome::Plus))
            .unwrap();
        assert!(rows.iter().any(|(_, rhs)| *rhs == target1));
        // S = {2,4,6}: arcs {0,1}, {3}, {5} -> q2 * q1 * q1
        let target2 = marginal2_poly(Outcome::Plus, Outcome::Minus)
            .mul(&marginal1_poly(Outcome::Plus))
            .unwrap()
            .mul(&marginal1_poly(Outcome::Minus))
            .unwrap();
        assert!(rows.iter().any(|(_, rhs)| *rhs == target2));
    }

    #[test]
    fn factorized_square_full_split() {
        // m=4, S={1,3}: arcs {0}, {2} -> q1(a0) q1(a2)
        let t = build_orbit_table(4).unwrap();
        let rows = gen_factorized(&t);
        let target = marginal1_poly(Outcome::Plus).mul(&marginal1_poly(Outcome::Minus)).unwrap();
        assert!(rows.iter().any(|(_, rhs)| *rhs == target));
    }

    #[test]
    fn no_rhs_references_e3() {
        for m in [4, 5, 6, 7] {
            let t = build_orbit_table(m).unwrap();
            for (_, rhs) in gen_factorized(&t).iter().chain(gen_direct_marginals(&t).iter()) {
                let (d1, d2) = rhs.degree_support();
                assert!(d1 <= 2 * m as u32 && d2 <= m as u32);
            }
        }
    }

    #[test]
    fn uniform_satisfies_factorized_and_direct_at_zero() {
        let t = build_orbit_table(6).unwrap();
        let x = uniform_x(&t);
        let (z1, z2) = (Rat::zero(), Rat::zero());
        for (r, rhs) in gen_factorized(&t).iter().chain(gen_direct_marginals(&t).iter()) {
            assert_eq!(r.dot_dense(&x), rhs.eval(&z1, &z2));
        }
    }

    #[test]
    fn coupling_uniform_and_count() {
        let t5 = build_orbit_table(5).unwrap();
        let t4 = build_orbit_table(4).unwrap();
        let rows = gen_coupling(&t5, &t4);
        assert!(!rows.is_empty() && rows.len() <= 8);
        let mut x = uniform_x(&t5);
        x.extend(uniform_x(&t4));
        for r in &rows {
            assert!(r.dot_dense(&x).is_zero());
        }
    }

    #[test]
    fn heptagon_point_infeasible() {
        let scope = Scope::Ring(RingSpec::new(7).unwrap());
        let d = dist(rat(1753, 10000), rat(-1, 3));
        let asm = assemble(&scope, &d, &heptagon_families()).unwrap();
        assert_eq!(asm.lp.n_cols(), 20);
        let out = solve_feasibility(&asm.lp).unwrap();
        assert!(!out.is_feasible());
        assert!(verify_certificate(&asm.lp, &out));
    }

    #[test]
    fn heptagon_uniform_feasible() {
        let scope = Scope::Ring(RingSpec::new(7).unwrap());
        let d = dist(Rat::zero(), Rat::zero());
        let asm = assemble(&scope, &d, &heptagon_families()).unwrap();
        let out = solve_feasibility(&asm.lp).unwrap();
        assert!(out.is_feasible());
        assert!(verify_certificate(&asm.lp, &out));
    }

    #[test]
    fn level2_all_families_feasible_at_zero() {
        let scope = Scope::Level(HierarchyLevel::new(2).unwrap());
        let d = dist(Rat::zero(), Rat::zero());
        let asm = assemble(&scope, &d, &FamilySet::all()).unwrap();
        assert_eq!(asm.ring_sizes, vec![4, 5]);
        let out = solve_feasibility(&asm.lp).unwrap();
        assert!(out.is_feasible());
        assert!(verify_certificate(&asm.lp, &out));
    }

    #[test]
    fn family_superset_monotone_on_heptagon_point() {
        let scope = Scope::Ring(RingSpec::new(7).unwrap());
        let d = dist(rat(1753, 10000), rat(-1, 3));
        let bigger = FamilySet::all();
        let asm = assemble(&scope, &d, &bigger).unwrap();
        let out = solve_feasibility(&asm.lp).unwrap();
        assert!(!out.is_feasible());
        assert!(verify_certificate(&asm.lp, &out));
    }

    #[test]
    fn symbolic_rejects_lpi_families() {
        let scope = Scope::Ring(RingSpec::new(7).unwrap());
        assert!(matches!(
            assemble_symbolic(&scope, &heptagon_families()),
            Err(InflationError::SymbolicWithLpi(Family::L1))
        ));
    }

    #[test]
    fn symbolic_substitution_matches_direct_assembly() {
        let scope = Scope::Ring(RingSpec::new(6).unwrap());
        let fams = FamilySet::new().with(Family::Factorized).with(Family::DirectMarginal);
        let sym = assemble_symbolic(&scope, &fams).unwrap();
        let (e1, e2) = (rat(1, 5), rat(-1, 4));
        let lp = sym.substitute(&e1, &e2);
        let asm = assemble(&scope, &dist(e1, e2), &fams).unwrap();
        assert_eq!(lp.dump(), asm.lp.dump());
    }

    #[test]
    fn level_and_ring_guards() {
        assert!(RingSpec::new(3).is_err());
        assert!(RingSpec::new(25).is_err());
        assert!(HierarchyLevel::new(0).is_err());
        assert!(HierarchyLevel::new(22).is_err());
        assert_eq!(HierarchyLevel::new(11).unwrap().ring_sizes().last(), Some(&14));
    }

    #[test]
    fn manifest_format() {
        let fams = heptagon_families();
        let text = manifest(&[4, 5], &fams, &rat(1753, 10000), &rat(-1, 3));
        assert!(text.contains("rings 4,5"));
        assert!(text.contains("e1 1753/10000"));
        assert!(text.contains("NORMALIZATION"));
    }

    #[test]
    fn family_parsing() {
        let f = FamilySet::parse("L1,L2,coup").unwrap();
        assert!(f.contains(Family::L1) && f.contains(Family::Coupling));
        assert!(f.contains(Family::Normalization));
        assert!(FamilySet::parse("bogus").is_err());
    }

    #[test]
    fn normalization_row_positive_mass() {
        let scope = Scope::Ring(RingSpec::new(5).unwrap());
        let d = dist(Rat::zero(), Rat::zero());
        let asm = assemble(&scope, &d, &FamilySet::new()).unwrap();
        // only the normalization row
        assert_eq!(asm.lp.n_rows(), 1);
        let total: Rat = asm.lp.a().row(0).iter().map(|(_, v)| v.clone())
            .fold(Rat::zero(), |a, b| a + b);
        assert_eq!(total, rat(1 << 5, 1));
        assert!(asm.lp.b()[0].is_positive());
    }
}
