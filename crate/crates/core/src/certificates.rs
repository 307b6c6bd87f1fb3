//! Polynomial witnesses and point classification.
//!
//! A Farkas dual of a factorized-family system whose matrix is E-independent
//! lifts to a bivariate polynomial in (E1, E2): wherever the polynomial is
//! positive, no symmetric triangle realization exists for any E3. The
//! published Appendix-style witness is stored verbatim alongside the
//! machinery for deriving fresh ones.

use crate::dist::{e3_interval, SymmetricDist};
use crate::inflation::{assemble, assemble_symbolic, FamilySet, InflationError, Scope};
use crate::lin::Poly2;
use crate::lp::{solve_with, verify_certificate, LpError, LpOutcome, SolveOptions};
use crate::scalar::{format_rat, parse_rat, rat, Rat};
use num_traits::Zero;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CertError {
    #[error("dual does not verify against the substituted system at the anchor point")]
    Unverifiable,
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Dist(#[from] crate::dist::DistError),
    #[error(transparent)]
    Inflation(#[from] InflationError),
    #[error(transparent)]
    Lp(#[from] LpError),
}

#[derive(Clone, Debug)]
pub enum Provenance {
    /// The published witness, coefficients stored exactly as printed.
    PaperAppendixC,
    /// Derived here from a verified Farkas dual.
    SelfDerived { scope: Scope, families: FamilySet, anchor: (Rat, Rat) },
}

/// Value > 0 at (E1, E2) certifies that no symmetric triangle realization
/// exists there, for any E3.
#[derive(Clone, Debug)]
pub struct WitnessPolynomial {
    pub poly: Poly2<Rat>,
    pub provenance: Provenance,
}

impl WitnessPolynomial {
    pub fn eval(&self, e1: &Rat, e2: &Rat) -> Rat {
        self.poly.eval(e1, e2)
    }

    /// Poly2 text prefixed with a provenance header line.
    pub fn to_text(&self) -> String {
        let header = match &self.provenance {
            Provenance::PaperAppendixC => "witness paper".to_string(),
            Provenance::SelfDerived { scope, families, anchor } => {
                let scope_txt = match scope {
                    Scope::Ring(r) => format!("ring {}", r.m),
                    Scope::Level(l) => format!("level {}", l.n),
                };
                format!(
                    "witness derived {scope_txt} families {families} anchor {} {}",
                    format_rat(&anchor.0),
                    format_rat(&anchor.1),
                )
            }
        };
        format!("{header}\n{}", self.poly.to_text())
    }

    pub fn from_text(s: &str) -> Result<Self, CertError> {
        let mut lines = s.lines();
        let header = lines
            .next()
            .ok_or_else(|| CertError::Parse("empty witness file".into()))?
            .trim();
        let toks: Vec<&str> = header.split_whitespace().collect();
        let provenance = match toks.as_slice() {
            ["witness", "paper"] => Provenance::PaperAppendixC,
            ["witness", "derived", kind, num, "families", fams, "anchor", e1, e2] => {
                let n: usize = num
                    .parse()
                    .map_err(|e| CertError::Parse(format!("witness header: {e}")))?;
                let scope = match *kind {
                    "ring" => Scope::Ring(crate::inflation::RingSpec::new(n)?),
                    "level" => Scope::Level(crate::inflation::HierarchyLevel::new(n)?),
                    other => return Err(CertError::Parse(format!("unknown scope kind {other:?}"))),
                };
                let families = FamilySet::parse(fams).map_err(CertError::Parse)?;
                let anchor = (
                    parse_rat(e1).map_err(CertError::Parse)?,
                    parse_rat(e2).map_err(CertError::Parse)?,
                );
                Provenance::SelfDerived { scope, families, anchor }
            }
            _ => return Err(CertError::Parse(format!("bad witness header {header:?}"))),
        };
        let body: String = lines.map(|l| format!("{l}\n")).collect();
        let poly = Poly2::from_text(&body).map_err(|e| CertError::Parse(e.to_string()))?;
        Ok(WitnessPolynomial { poly, provenance })
    }
}

/// Lift a Farkas dual of a symbolic system to a witness polynomial.
///
/// The dual is re-verified against the system substituted at the anchor
/// before anything is emitted; the result is sum_i y_i rhs_i(E1, E2), which
/// equals the exact b^T y > 0 at the anchor and is <= 0 wherever a symmetric
/// realization exists.
pub fn extract_witness(
    symbolic: &crate::inflation::SymbolicSystem,
    scope: Scope,
    families: &FamilySet,
    y: &[Rat],
    anchor_e1: &Rat,
    anchor_e2: &Rat,
) -> Result<WitnessPolynomial, CertError> {
    let lp = symbolic.substitute(anchor_e1, anchor_e2);
    let outcome = LpOutcome::Infeasible { y: y.to_vec() };
    if !verify_certificate(&lp, &outcome) {
        return Err(CertError::Unverifiable);
    }
    let mut poly = Poly2::zero();
    for (yi, rhs) in y.iter().zip(&symbolic.rhs) {
        if !yi.is_zero() {
            poly = poly.add(&rhs.scale(yi));
        }
    }
    Ok(WitnessPolynomial {
        poly,
        provenance: Provenance::SelfDerived {
            scope,
            families: families.clone(),
            anchor: (anchor_e1.clone(), anchor_e2.clone()),
        },
    })
}

/// Solve the factorized-family system at the anchor and, if infeasible, turn
/// the dual into a witness in one step.
pub fn derive_witness(
    scope: Scope,
    families: &FamilySet,
    e1: &Rat,
    e2: &Rat,
    opts: &SolveOptions,
) -> Result<Option<WitnessPolynomial>, CertError> {
    let symbolic = assemble_symbolic(&scope, families)?;
    let lp = symbolic.substitute(e1, e2);
    let report = solve_with(&lp, opts)?;
    match report.outcome {
        LpOutcome::Feasible { .. } => Ok(None),
        LpOutcome::Infeasible { ref y } => {
            Some(extract_witness(&symbolic, scope, families, y, e1, e2)).transpose()
        }
    }
}

const PAPER_DEN: i64 = 10_000;
const PAPER_TERMS: [(u32, u32, i64); 37] = [
    (9, 0, 1843),
    (8, 0, -18290),
    (7, 1, -46758),
    (7, 0, -395446),
    (6, 2, -8972),
    (6, 1, -740838),
    (6, 0, -1162647),
    (5, 2, 105142),
    (5, 1, -2483040),
    (5, 0, -791817),
    (4, 3, -286167),
    (4, 2, -2383961),
    (4, 1, -5326388),
    (4, 0, -1530877),
    (3, 4, -33372),
    (3, 3, -434770),
    (3, 2, -4517175),
    (3, 1, -3086530),
    (3, 0, 329430),
    (2, 4, 185457),
    (2, 3, -734824),
    (2, 2, -4912832),
    (2, 1, -4505083),
    (2, 0, -1352657),
    (1, 5, 13657),
    (1, 4, -359763),
    (1, 3, -2251462),
    (1, 2, -3101144),
    (1, 1, -758387),
    (1, 0, 133812),
    (0, 6, -2856),
    (0, 5, -46748),
    (0, 4, -340812),
    (0, 3, -754711),
    (0, 2, -1232455),
    (0, 1, -794846),
    (0, 0, -165823),
];

/// The published witness, coefficients as printed (rationals over 10^4),
/// oriented so that a positive value certifies impossibility.
pub fn paper_witness() -> WitnessPolynomial {
    let mut poly = Poly2::zero();
    for (d1, d2, num) in PAPER_TERMS {
        poly.add_term(d1, d2, rat(num, PAPER_DEN));
    }
    WitnessPolynomial { poly, provenance: Provenance::PaperAppendixC }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    /// No tripartite binary distribution at all has these (E1, E2).
    InvalidGray,
    /// The inflation LP is infeasible: no symmetric realization.
    InfeasibleSymmetric,
    /// The relaxation is feasible; a one-sided test proves nothing here.
    Undecided,
}

impl Classification {
    pub fn name(self) -> &'static str {
        match self {
            Classification::InvalidGray => "INVALID_GRAY",
            Classification::InfeasibleSymmetric => "INFEASIBLE_SYMMETRIC",
            Classification::Undecided => "UNDECIDED",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ClassifyReport {
    pub verdict: Classification,
    pub pivots: u64,
}

pub fn classify_point_with(
    e1: &Rat,
    e2: &Rat,
    scope: Scope,
    families: &FamilySet,
    opts: &SolveOptions,
) -> Result<ClassifyReport, CertError> {
    if e3_interval(e1, e2).is_empty() {
        return Ok(ClassifyReport { verdict: Classification::InvalidGray, pivots: 0 });
    }
    let d = SymmetricDist::marginal_only(e1.clone(), e2.clone())?;
    let assembly = assemble(&scope, &d, families)?;
    let report = solve_with(&assembly.lp, opts)?;
    let verdict = match report.outcome {
        LpOutcome::Feasible { .. } => Classification::Undecided,
        LpOutcome::Infeasible { .. } => Classification::InfeasibleSymmetric,
    };
    Ok(ClassifyReport { verdict, pivots: report.pivots })
}

pub fn classify_point(
    e1: &Rat,
    e2: &Rat,
    scope: Scope,
    families: &FamilySet,
) -> Result<Classification, CertError> {
    Ok(classify_point_with(e1, e2, scope, families, &SolveOptions::default())?.verdict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inflation::{Family, RingSpec, SymbolicSystem};
    use crate::lin::SparseMatrix;
    use crate::scalar::rat_int;
    use num_traits::{One, Signed};

    fn fact_families() -> FamilySet {
        FamilySet::new().with(Family::Factorized).with(Family::DirectMarginal)
    }

    #[test]
    fn toy_witness_is_one_plus_e1_squared() {
        // x1 = -1 - E1^2 with x1 >= 0: infeasible everywhere
        let mut a = SparseMatrix::new(1);
        a.push_row(crate::lin::SparseVec::from_entries(vec![(0, Rat::one())]));
        let mut rhs_poly = Poly2::constant(rat_int(-1));
        rhs_poly.add_term(2, 0, rat_int(-1));
        let symbolic = SymbolicSystem {
            a,
            rhs: vec![rhs_poly],
            ring_sizes: vec![4],
            offsets: vec![0],
        };
        let scope = Scope::Ring(RingSpec::new(4).unwrap());
        let w = extract_witness(
            &symbolic,
            scope,
            &fact_families(),
            &[rat_int(-1)],
            &Rat::zero(),
            &Rat::zero(),
        )
        .unwrap();
        assert_eq!(w.eval(&Rat::zero(), &Rat::zero()), rat_int(1));
        assert_eq!(w.eval(&rat_int(2), &rat_int(3)), rat_int(5));
        // a bogus dual is refused
        assert!(matches!(
            extract_witness(
                &symbolic,
                scope,
                &fact_families(),
                &[rat_int(1)],
                &Rat::zero(),
                &Rat::zero()
            ),
            Err(CertError::Unverifiable)
        ));
    }

    #[test]
    fn derived_heptagon_witness() {
        let scope = Scope::Ring(RingSpec::new(7).unwrap());
        let anchor = (rat(3, 10), rat(-1, 3));
        let w = derive_witness(scope, &fact_families(), &anchor.0, &anchor.1, &SolveOptions::default())
            .unwrap()
            .expect("anchor refuted by factorized families");
        assert!(w.eval(&anchor.0, &anchor.1).is_positive());
        // realizable points must evaluate <= 0
        assert!(!w.eval(&Rat::zero(), &Rat::zero()).is_positive());
        // round trip with provenance
        let back = WitnessPolynomial::from_text(&w.to_text()).unwrap();
        assert_eq!(back.poly, w.poly);
        match back.provenance {
            Provenance::SelfDerived { scope: Scope::Ring(r), ref anchor, .. } => {
                assert_eq!(r.m, 7);
                assert_eq!(anchor.0, rat(3, 10));
            }
            ref other => panic!("wrong provenance {other:?}"),
        }
    }

    #[test]
    fn paper_witness_values() {
        let w = paper_witness();
        assert_eq!(w.poly.n_terms(), 37);
        assert_eq!(w.eval(&Rat::zero(), &Rat::zero()), rat(-165823, 10_000));
        let third = rat(-1, 3);
        assert!(w.eval(&rat(1656, 10_000), &third).is_positive());
        assert!(w.eval(&rat(1753, 10_000), &third).is_positive());
        assert!(w.eval(&rat(158, 1000), &third).is_negative());
        assert!(w.eval(&rat(1, 10), &third).is_negative());
        let back = WitnessPolynomial::from_text(&w.to_text()).unwrap();
        assert_eq!(back.poly, w.poly);
        assert!(matches!(back.provenance, Provenance::PaperAppendixC));
    }

    #[test]
    fn classify_probe_points() {
        let scope = Scope::Ring(RingSpec::new(7).unwrap());
        let lpi = FamilySet::new().with(Family::L1).with(Family::L2);
        assert_eq!(
            classify_point(&rat(1753, 10_000), &rat(-1, 3), scope, &lpi).unwrap(),
            Classification::InfeasibleSymmetric
        );
        assert_eq!(
            classify_point(&Rat::zero(), &Rat::zero(), scope, &lpi).unwrap(),
            Classification::Undecided
        );
        assert_eq!(
            classify_point(&rat(9, 10), &Rat::zero(), scope, &lpi).unwrap(),
            Classification::InvalidGray
        );
    }
}
