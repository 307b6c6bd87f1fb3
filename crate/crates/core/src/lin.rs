//! Sparse vectors/matrices and bivariate polynomials in (E1, E2), generic
//! over the scalar type. Exact-rational instantiations carry all certificate
//! arithmetic; no stored zeros anywhere.

use crate::scalar::{format_rat, parse_rat, Rat, Scalar};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("total degree {0} exceeds configured bound {1}")]
    DegreeOverflow(u32, u32),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Sparse vector: sorted (index, value) pairs, zeros never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseVec<S> {
    entries: Vec<(usize, S)>,
}

impl<S: Scalar> Default for SparseVec<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S: Scalar> SparseVec<S> {
    pub fn new() -> Self {
        SparseVec { entries: Vec::new() }
    }

    pub fn from_entries(mut entries: Vec<(usize, S)>) -> Self {
        entries.retain(|(_, v)| !v.is_zero());
        entries.sort_by_key(|(i, _)| *i);
        for w in entries.windows(2) {
            assert!(w[0].0 != w[1].0, "duplicate index {}", w[0].0);
        }
        SparseVec { entries }
    }

    /// Accumulate possibly-repeated (index, value) pairs.
    pub fn accumulate(pairs: impl IntoIterator<Item = (usize, S)>) -> Self {
        let mut map: BTreeMap<usize, S> = BTreeMap::new();
        for (i, v) in pairs {
            let slot = map.entry(i).or_insert_with(S::zero);
            *slot = slot.clone() + v;
        }
        SparseVec {
            entries: map.into_iter().filter(|(_, v)| !v.is_zero()).collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &S)> {
        self.entries.iter().map(|(i, v)| (*i, v))
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&S> {
        self.entries
            .binary_search_by_key(&i, |(j, _)| *j)
            .ok()
            .map(|k| &self.entries[k].1)
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.last().map(|(i, _)| *i)
    }

    /// Dot product against a dense slice.
    pub fn dot_dense(&self, x: &[S]) -> S {
        let mut acc = S::zero();
        for (i, v) in &self.entries {
            acc = acc + v.clone() * x[*i].clone();
        }
        acc
    }

    pub fn scale(&self, c: &S) -> Self {
        if c.is_zero() {
            return SparseVec::new();
        }
        SparseVec {
            entries: self.entries.iter().map(|(i, v)| (*i, v.clone() * c.clone())).collect(),
        }
    }

    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> SparseVec<T> {
        SparseVec::from_entries(self.entries.iter().map(|(i, v)| (*i, f(v))).collect())
    }
}

/// Exact linear combination of sparse rows; serves Farkas aggregation.
pub fn row_combine<S: Scalar>(rows: &[(S, &SparseVec<S>)]) -> SparseVec<S> {
    SparseVec::accumulate(
        rows.iter()
            .flat_map(|(c, r)| r.iter().map(move |(i, v)| (i, c.clone() * v.clone()))),
    )
}

/// Row-major sparse matrix with explicit dimensions.
#[derive(Clone, Debug)]
pub struct SparseMatrix<S> {
    rows: Vec<SparseVec<S>>,
    n_cols: usize,
}

impl<S: Scalar> SparseMatrix<S> {
    pub fn new(n_cols: usize) -> Self {
        SparseMatrix { rows: Vec::new(), n_cols }
    }

    pub fn push_row(&mut self, row: SparseVec<S>) {
        if let Some(m) = row.max_index() {
            assert!(m < self.n_cols, "column {m} out of bounds ({})", self.n_cols);
        }
        self.rows.push(row);
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &SparseVec<S> {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[SparseVec<S>] {
        &self.rows
    }

    /// y^T A as a dense vector of length n_cols.
    pub fn transpose_apply(&self, y: &[S]) -> Vec<S> {
        assert_eq!(y.len(), self.rows.len(), "dimension mismatch");
        let mut out = vec![S::zero(); self.n_cols];
        for (row, yi) in self.rows.iter().zip(y) {
            if yi.is_zero() {
                continue;
            }
            for (j, v) in row.iter() {
                out[j] = out[j].clone() + yi.clone() * v.clone();
            }
        }
        out
    }

    pub fn apply(&self, x: &[S]) -> Vec<S> {
        assert_eq!(x.len(), self.n_cols, "dimension mismatch");
        self.rows.iter().map(|r| r.dot_dense(x)).collect()
    }
}

/// Bivariate polynomial in (E1, E2) with scalar coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly2<S> {
    // (deg_e1, deg_e2) -> coefficient, zeros never stored
    terms: BTreeMap<(u32, u32), S>,
}

pub const DEFAULT_DEGREE_BOUND: u32 = 40;

impl<S: Scalar> Default for Poly2<S> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<S: Scalar> Poly2<S> {
    pub fn zero() -> Self {
        Poly2 { terms: BTreeMap::new() }
    }

    pub fn constant(c: S) -> Self {
        let mut p = Poly2::zero();
        p.add_term(0, 0, c);
        p
    }

    pub fn term(d1: u32, d2: u32, c: S) -> Self {
        let mut p = Poly2::zero();
        p.add_term(d1, d2, c);
        p
    }

    pub fn add_term(&mut self, d1: u32, d2: u32, c: S) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry((d1, d2)).or_insert_with(S::zero);
        *slot = slot.clone() + c;
        if slot.is_zero() {
            self.terms.remove(&(d1, d2));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, &S)> {
        self.terms.iter().map(|(&(d1, d2), c)| (d1, d2, c))
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|&(a, b)| a + b).max().unwrap_or(0)
    }

    /// Largest degree in each variable: (max deg_e1, max deg_e2).
    pub fn degree_support(&self) -> (u32, u32) {
        let d1 = self.terms.keys().map(|&(a, _)| a).max().unwrap_or(0);
        let d2 = self.terms.keys().map(|&(_, b)| b).max().unwrap_or(0);
        (d1, d2)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (d1, d2, c) in other.terms() {
            out.add_term(d1, d2, c.clone());
        }
        out
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut out = Poly2::zero();
        for (d1, d2, v) in self.terms() {
            out.add_term(d1, d2, v.clone() * c.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self, LinError> {
        self.mul_bounded(other, DEFAULT_DEGREE_BOUND)
    }

    pub fn mul_bounded(&self, other: &Self, bound: u32) -> Result<Self, LinError> {
        let d = self.total_degree() + other.total_degree();
        if !self.is_zero() && !other.is_zero() && d > bound {
            return Err(LinError::DegreeOverflow(d, bound));
        }
        let mut out = Poly2::zero();
        for (a1, a2, c) in self.terms() {
            for (b1, b2, e) in other.terms() {
                out.add_term(a1 + b1, a2 + b2, c.clone() * e.clone());
            }
        }
        Ok(out)
    }

    /// Exact evaluation, Horner in e1 with inner Horner in e2.
    pub fn eval(&self, e1: &S, e2: &S) -> S {
        // group coefficients by deg_e1 descending
        let mut by_d1: BTreeMap<u32, Vec<(u32, &S)>> = BTreeMap::new();
        let mut max1 = 0;
        for (d1, d2, c) in self.terms() {
            by_d1.entry(d1).or_default().push((d2, c));
            max1 = max1.max(d1);
        }
        if self.is_zero() {
            return S::zero();
        }
        let mut acc = S::zero();
        for d1 in (0..=max1).rev() {
            acc = acc * e1.clone();
            if let Some(terms) = by_d1.get(&d1) {
                // horner in e2 over the sparse exponents
                let mut inner = S::zero();
                let mut prev: Option<u32> = None;
                for &(d2, c) in terms.iter().rev() {
                    if let Some(p) = prev {
                        for _ in d2..p {
                            inner = inner * e2.clone();
                        }
                    }
                    inner = inner + c.clone();
                    prev = Some(d2);
                }
                if let Some(p) = prev {
                    for _ in 0..p {
                        inner = inner * e2.clone();
                    }
                }
                acc = acc + inner;
            }
        }
        acc
    }

    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Poly2<T> {
        let mut out = Poly2::zero();
        for (d1, d2, c) in self.terms() {
            out.add_term(d1, d2, f(c));
        }
        out
    }
}

impl Poly2<Rat> {
    /// Plain-text monomial list: one `<num>/<den> <deg_e1> <deg_e2>` per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (d1, d2, c) in self.terms() {
            out.push_str(&format!("{} {} {}\n", format_rat(c), d1, d2));
        }
        out
    }

    pub fn from_text(s: &str) -> Result<Self, LinError> {
        let mut p = Poly2::zero();
        for (ln, line) in s.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let (c, d1, d2) = (it.next(), it.next(), it.next());
            match (c, d1, d2, it.next()) {
                (Some(c), Some(d1), Some(d2), None) => {
                    let c = parse_rat(c).map_err(|e| LinError::Parse(format!("line {}: {e}", ln + 1)))?;
                    let d1: u32 = d1.parse().map_err(|e| LinError::Parse(format!("line {}: {e}", ln + 1)))?;
                    let d2: u32 = d2.parse().map_err(|e| LinError::Parse(format!("line {}: {e}", ln + 1)))?;
                    p.add_term(d1, d2, c);
                }
                _ => return Err(LinError::Parse(format!("line {}: expected 3 fields", ln + 1))),
            }
        }
        Ok(p)
    }
}
