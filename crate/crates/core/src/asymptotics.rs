//! Asymptotic coefficients of the reduced volume density.
//!
//! The density along a ray expands as `1 + sum_{nu>=2} H_nu r^nu`, with
//! each `H_nu` a universal rational polynomial in traces of the Jacobi
//! operator and its covariant derivatives at the basepoint. This module
//! stores those polynomials as data for orders 2 through 8, evaluates
//! them on a [`TraceTable`], and extracts coefficient sequences from
//! density series.
//!
//! Storing the formulas as data keeps two structural audits mechanical:
//! every product in a term must have total weight nu, and the term count
//! per order is pinned to (1, 1, 3, 3, 8, 9, 19).

use num_traits::{One, Zero};
use once_cell::sync::Lazy;

use crate::models::{Monomial, TraceTable};
use crate::rational::{rat, Rat};
use crate::series::TruncatedSeries;
use crate::{Error, Result};

/// One term of a coefficient formula: a rational prefactor times a sum
/// of integer-weighted products of trace monomials. Every term except
/// one has a single product with weight 1; the order-8 formula groups
/// two products over the common prefactor -1/18144.
#[derive(Clone, Debug)]
pub struct HTerm {
    pub coeff: Rat,
    pub summands: Vec<(i64, Vec<Monomial>)>,
}

impl HTerm {
    fn eval(&self, table: &TraceTable) -> Result<Rat> {
        let mut total = Rat::zero();
        for (mult, monos) in &self.summands {
            let mut prod = Rat::from_integer((*mult).into());
            for mono in monos {
                let value = table
                    .get(mono)
                    .ok_or_else(|| Error::IncompleteTable(mono.to_string()))?;
                prod *= value;
            }
            total += prod;
        }
        Ok(&self.coeff * total)
    }
}

/// The full set of coefficient formulas, indexed by order 2..=8.
#[derive(Clone, Debug)]
pub struct FormulaTable {
    terms: Vec<Vec<HTerm>>,
}

impl FormulaTable {
    pub fn terms(&self, nu: u32) -> Result<&[HTerm]> {
        if !(2..=8).contains(&nu) {
            return Err(Error::UnsupportedOrder(nu));
        }
        Ok(&self.terms[(nu - 2) as usize])
    }

    pub fn term_count(&self, nu: u32) -> Result<usize> {
        Ok(self.terms(nu)?.len())
    }

    /// Weight homogeneity: every monomial product inside an order-nu term
    /// has total weight exactly nu.
    pub fn audit_weights(&self) -> Result<()> {
        for nu in 2..=8u32 {
            for (i, term) in self.terms(nu)?.iter().enumerate() {
                for (_, monos) in &term.summands {
                    let w: u32 = monos.iter().map(Monomial::weight).sum();
                    if w != nu {
                        return Err(Error::Domain(format!(
                            "term {i} of order {nu} has weight {w}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

fn term(n: i64, d: i64, monos: &[&[u8]]) -> HTerm {
    HTerm {
        coeff: rat(n, d),
        summands: vec![(1, monos.iter().map(|m| Monomial::new(m)).collect())],
    }
}

static TABLE: Lazy<FormulaTable> = Lazy::new(|| {
    let h2 = vec![term(-1, 6, &[&[0]])];
    let h3 = vec![term(-1, 12, &[&[1]])];
    let h4 = vec![
        term(1, 72, &[&[0], &[0]]),
        term(-1, 180, &[&[0, 0]]),
        term(-1, 40, &[&[2]]),
    ];
    let h5 = vec![
        term(1, 72, &[&[0], &[1]]),
        term(-1, 180, &[&[0, 1]]),
        term(-1, 180, &[&[3]]),
    ];
    let h6 = vec![
        term(-1, 1296, &[&[0], &[0], &[0]]),
        term(1, 1080, &[&[0], &[0, 0]]),
        term(1, 240, &[&[0], &[2]]),
        term(-1, 2835, &[&[0, 0, 0]]),
        term(-1, 630, &[&[0, 2]]),
        term(1, 288, &[&[1], &[1]]),
        term(-1, 672, &[&[1, 1]]),
        term(-1, 1008, &[&[4]]),
    ];
    let h7 = vec![
        term(1, 1080, &[&[0], &[0, 1]]),
        term(-1, 864, &[&[0], &[0], &[1]]),
        term(-1, 6720, &[&[5]]),
        term(1, 1080, &[&[0], &[3]]),
        term(1, 2160, &[&[0, 0], &[1]]),
        term(-1, 1890, &[&[0, 0, 1]]),
        term(-1, 3024, &[&[0, 3]]),
        term(1, 480, &[&[1], &[2]]),
        term(-1, 1120, &[&[1, 2]]),
    ];
    let h8 = vec![
        term(1, 31104, &[&[0], &[0], &[0], &[0]]),
        term(-1, 12960, &[&[0], &[0], &[0, 0]]),
        term(-1, 2880, &[&[0], &[0], &[2]]),
        term(1, 17010, &[&[0], &[0, 0, 0]]),
        term(1, 3780, &[&[0], &[0, 2]]),
        term(-1, 51840, &[&[6]]),
        term(-1, 1728, &[&[0], &[1], &[1]]),
        term(1, 4032, &[&[0], &[1, 1]]),
        term(-1, 7200, &[&[2, 2]]),
        term(1, 6048, &[&[0], &[4]]),
        term(1, 7200, &[&[0, 0], &[2]]),
        term(1, 64800, &[&[0, 0], &[0, 0]]),
        term(-1, 37800, &[&[0, 0, 0, 0]]),
        term(-17, 113400, &[&[0, 0, 2]]),
        term(1, 2160, &[&[0, 1], &[1]]),
        // one printed term covering -(5 Tr{J J1 J1} + Tr{J J4})/18144
        HTerm {
            coeff: rat(-1, 18144),
            summands: vec![
                (5, vec![Monomial::new(&[0, 1, 1])]),
                (1, vec![Monomial::new(&[0, 4])]),
            ],
        },
        term(1, 2160, &[&[1], &[3]]),
        term(-1, 5184, &[&[1, 3]]),
        term(1, 3200, &[&[2], &[2]]),
    ];
    FormulaTable {
        terms: vec![h2, h3, h4, h5, h6, h7, h8],
    }
});

/// The static coefficient-formula table.
pub fn formula_table() -> &'static FormulaTable {
    &TABLE
}

/// Evaluate the order-nu coefficient formula on a trace table. Exact;
/// orders outside 2..=8 and missing monomials are errors.
pub fn eval_h(table: &TraceTable, nu: u32) -> Result<Rat> {
    let mut total = Rat::zero();
    for term in formula_table().terms(nu)? {
        total += term.eval(table)?;
    }
    Ok(total)
}

/// The coefficient sequence of a reduced density: entry nu is the
/// coefficient of `r^nu`, with entry 0 equal to 1 and odd entries zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HSequence(Vec<Rat>);

impl HSequence {
    /// Validates the two sequence invariants: leading entry 1 and odd
    /// entries zero.
    pub fn new(coeffs: Vec<Rat>) -> Result<HSequence> {
        match coeffs.first() {
            Some(c) if c.is_one() => {}
            Some(c) => return Err(Error::InvalidTarget(format!("leading entry must be 1, got {c}"))),
            None => return Err(Error::InvalidTarget("empty sequence".into())),
        }
        for (i, c) in coeffs.iter().enumerate() {
            if i % 2 == 1 && !c.is_zero() {
                return Err(Error::InvalidTarget(format!(
                    "entry {i} is odd-indexed and must vanish, got {c}"
                )));
            }
        }
        Ok(HSequence(coeffs))
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.0
    }

    /// Entry nu, zero beyond the stored length.
    pub fn get(&self, nu: usize) -> Rat {
        self.0.get(nu).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The sequence as an even density series of the given order.
    pub fn to_series(&self, order: usize) -> TruncatedSeries {
        let mut coeffs = Vec::with_capacity(order + 1);
        for i in 0..=order {
            coeffs.push(self.get(i));
        }
        TruncatedSeries::new(coeffs, crate::series::Parity::Even)
            .expect("odd entries vanish by the sequence invariant")
    }
}

/// Read the coefficient sequence off a density series. Requires constant
/// term 1; nonzero odd coefficients violate the sequence invariant and
/// are reported rather than dropped.
pub fn extract_h(theta_tilde: &TruncatedSeries) -> Result<HSequence> {
    if !theta_tilde.coeff(0).is_one() {
        return Err(Error::Normalization(theta_tilde.coeff(0).to_string()));
    }
    HSequence::new(theta_tilde.coeffs().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{make_space, product_oracle, trace_table, Family};
    use crate::rational::rint;

    #[test]
    fn term_counts_as_printed() {
        let counts: Vec<usize> = (2..=8)
            .map(|nu| formula_table().term_count(nu).unwrap())
            .collect();
        assert_eq!(counts, vec![1, 1, 3, 3, 8, 9, 19]);
    }

    #[test]
    fn weight_homogeneity() {
        formula_table().audit_weights().unwrap();
    }

    #[test]
    fn every_formula_monomial_is_tabulated() {
        // trace_table enumerates all canonical monomials of weight <= 8,
        // so no formula evaluation can hit an absent key.
        let known: std::collections::BTreeSet<_> =
            crate::models::monomials_up_to_weight(8).into_iter().collect();
        for nu in 2..=8u32 {
            for term in formula_table().terms(nu).unwrap() {
                for (_, monos) in &term.summands {
                    for mono in monos {
                        assert!(known.contains(mono), "untabulated {mono} in order {nu}");
                    }
                }
            }
        }
    }

    #[test]
    fn h2_is_minus_sixth_of_trace() {
        let s4 = make_space(Family::Sphere, Some(4)).unwrap();
        assert_eq!(eval_h(&trace_table(&s4), 2).unwrap(), rat(-1, 2));
    }

    #[test]
    fn h4_of_cp2() {
        let cp2 = make_space(Family::Cp, Some(2)).unwrap();
        assert_eq!(eval_h(&trace_table(&cp2), 4).unwrap(), rat(2, 5));
    }

    #[test]
    fn odd_orders_vanish_on_symmetric_tables() {
        for space in crate::verify::catalog_representatives() {
            let table = trace_table(&space);
            for nu in [3, 5, 7] {
                assert_eq!(eval_h(&table, nu).unwrap(), rint(0), "{} nu={nu}", space.name());
            }
        }
    }

    #[test]
    fn unsupported_orders_error() {
        let t = trace_table(&make_space(Family::Flat, Some(4)).unwrap());
        assert!(matches!(eval_h(&t, 1), Err(Error::UnsupportedOrder(1))));
        assert!(matches!(eval_h(&t, 9), Err(Error::UnsupportedOrder(9))));
    }

    #[test]
    fn missing_monomial_is_reported() {
        let empty = TraceTable::new(Default::default(), 4);
        assert!(matches!(eval_h(&empty, 2), Err(Error::IncompleteTable(_))));
    }

    #[test]
    fn extract_cp2() {
        let cp2 = make_space(Family::Cp, Some(2)).unwrap();
        let h = extract_h(&crate::models::theta_tilde_series(&cp2, 4)).unwrap();
        assert_eq!(h.coeffs(), &[rint(1), rint(0), rint(-1), rint(0), rat(2, 5)]);
    }

    #[test]
    fn extract_flat_and_hsphere() {
        let flat = make_space(Family::Flat, Some(5)).unwrap();
        let h = extract_h(&crate::models::theta_tilde_series(&flat, 6)).unwrap();
        assert!(h.coeffs()[1..].iter().all(Rat::is_zero));

        let hs = make_space(Family::HSphere, Some(4)).unwrap();
        let h = extract_h(&crate::models::theta_tilde_series(&hs, 4)).unwrap();
        assert_eq!(h.get(2), rat(1, 2));
        assert_eq!(h.get(4), rat(13, 120));
    }

    #[test]
    fn extract_requires_unit_constant() {
        let s = TruncatedSeries::constant(rint(2), 4);
        assert!(matches!(extract_h(&s), Err(Error::Normalization(_))));
    }

    #[test]
    fn oracle_equivalence_sample() {
        // eval on traces equals the series coefficient, for a few members
        // here; the full catalog sweep lives in the verification battery.
        for (fam, param) in [
            (Family::Sphere, Some(4)),
            (Family::Cp, Some(3)),
            (Family::Hhp, Some(2)),
            (Family::Op2, None),
        ] {
            let space = make_space(fam, param).unwrap();
            let table = trace_table(&space);
            let h = extract_h(&crate::models::theta_tilde_series(&space, 8)).unwrap();
            for nu in 2..=8u32 {
                assert_eq!(
                    eval_h(&table, nu).unwrap(),
                    h.get(nu as usize),
                    "{} nu={nu}",
                    space.name()
                );
            }
        }
    }

    #[test]
    fn directional_oracle_sample() {
        let s2 = make_space(Family::Sphere, Some(2)).unwrap();
        let (table, series) = product_oracle(&s2, &s2, &rat(1, 4), 8).unwrap();
        for nu in 2..=8u32 {
            assert_eq!(eval_h(&table, nu).unwrap(), series.coeff(nu as usize));
        }
    }

    #[test]
    fn scaling_homogeneity() {
        // Rescaling every entry of weight w by c^-w multiplies the order
        // nu value by c^-nu.
        let op2 = make_space(Family::Op2, None).unwrap();
        let table = trace_table(&op2);
        let c = rat(3, 2);
        let inv_c = rat(2, 3);
        let rescaled = table.rescaled(&inv_c);
        for nu in 2..=8u32 {
            let mut factor = Rat::one();
            for _ in 0..nu {
                factor *= &c;
            }
            assert_eq!(
                eval_h(&rescaled, nu).unwrap() * factor,
                eval_h(&table, nu).unwrap(),
                "nu={nu}"
            );
        }
    }

    #[test]
    fn hsequence_invariants() {
        assert!(HSequence::new(vec![rint(1), rint(0), rat(1, 2)]).is_ok());
        assert!(HSequence::new(vec![rint(2)]).is_err());
        assert!(HSequence::new(vec![rint(1), rat(1, 3)]).is_err());
        assert!(HSequence::new(vec![]).is_err());
    }

    #[test]
    fn hsequence_to_series_pads() {
        let h = HSequence::new(vec![rint(1), rint(0), rat(-1, 2)]).unwrap();
        let s = h.to_series(6);
        assert_eq!(s.order(), 6);
        assert_eq!(s.coeff(2), rat(-1, 2));
        assert_eq!(s.coeff(4), rint(0));
    }
}
