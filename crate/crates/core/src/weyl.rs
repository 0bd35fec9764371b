//! Weyl-Jacobi spectra of the catalog spaces and of the odd-dimensional
//! product construction, and the pairwise distinguishability test.
//!
//! Every catalog member is Einstein, so the Weyl-Jacobi operator at a
//! unit direction is the Jacobi operator minus `kappa` times the
//! constant-curvature model, `kappa = ricci_unit / (m - 1)`, acting as
//! the identity on the orthogonal complement of the direction. Its
//! spectrum is therefore `{0}` on the radial line and `{mu - kappa}` on
//! each nonradial Jacobi eigenspace. The spectrum is a pointwise
//! conformal invariant: no deformation parameter enters here.

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::models::ModelSpace;
use crate::rational::{rat_to_string, Rat};
use crate::{Error, Result};

/// Eigenvalues with multiplicities of a Weyl-Jacobi operator, plus the
/// (negative, zero, positive) count triple.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeylSignature {
    spectrum: Vec<(Rat, u32)>,
    counts: (u32, u32, u32),
}

impl WeylSignature {
    fn from_spectrum(mut spectrum: Vec<(Rat, u32)>) -> WeylSignature {
        // Merge equal eigenvalues and sort for a canonical layout.
        spectrum.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(Rat, u32)> = Vec::with_capacity(spectrum.len());
        for (ev, mult) in spectrum {
            match merged.last_mut() {
                Some((last, m)) if *last == ev => *m += mult,
                _ => merged.push((ev, mult)),
            }
        }
        let mut counts = (0u32, 0u32, 0u32);
        for (ev, mult) in &merged {
            if ev.is_negative() {
                counts.0 += mult;
            } else if ev.is_zero() {
                counts.1 += mult;
            } else {
                counts.2 += mult;
            }
        }
        WeylSignature { spectrum: merged, counts }
    }

    /// Sorted eigenvalue/multiplicity pairs.
    pub fn spectrum(&self) -> &[(Rat, u32)] {
        &self.spectrum
    }

    /// (negative, zero, positive) multiplicity totals.
    pub fn counts(&self) -> (u32, u32, u32) {
        self.counts
    }

    /// Total dimension carried by the signature.
    pub fn dim(&self) -> u32 {
        self.spectrum.iter().map(|(_, m)| m).sum()
    }

    /// Weighted eigenvalue sum; zero for every Weyl-Jacobi spectrum.
    pub fn trace(&self) -> Rat {
        self.spectrum.iter().fold(Rat::zero(), |acc, (ev, mult)| {
            acc + ev * Rat::from_integer((*mult).into())
        })
    }

    pub fn is_zero(&self) -> bool {
        self.spectrum.iter().all(|(ev, _)| ev.is_zero())
    }

    /// Spectrum rescaled so the largest absolute eigenvalue is 1; the
    /// canonical form compared by [`signatures_distinct`]. Zero spectra
    /// normalize to themselves.
    fn normalized(&self) -> Vec<(Rat, u32)> {
        let scale = self
            .spectrum
            .iter()
            .map(|(ev, _)| ev.abs())
            .max()
            .unwrap_or_else(Rat::zero);
        if scale.is_zero() {
            return self.spectrum.clone();
        }
        self.spectrum
            .iter()
            .map(|(ev, mult)| (ev / &scale, *mult))
            .collect()
    }

    pub fn to_json_entry(&self, space_name: &str, m: u32) -> WeylJsonEntry {
        WeylJsonEntry {
            space: space_name.to_string(),
            m,
            spectrum: self
                .spectrum
                .iter()
                .map(|(ev, mult)| (rat_to_string(ev), *mult))
                .collect(),
            counts: [self.counts.0, self.counts.1, self.counts.2],
        }
    }
}

/// Serialized form used by the classification output.
#[derive(Clone, Debug, Serialize)]
pub struct WeylJsonEntry {
    pub space: String,
    pub m: u32,
    pub spectrum: Vec<(String, u32)>,
    pub counts: [u32; 3],
}

/// Weyl-Jacobi spectrum of a catalog member at a unit direction.
/// Defined for dimension at least 4.
pub fn weyl_spectrum(space: &ModelSpace) -> Result<WeylSignature> {
    if space.dim() < 4 {
        return Err(Error::WeylUndefined(space.dim()));
    }
    let m = space.dim();
    let kappa = space.ricci_unit() / Rat::from_integer((m as i64 - 1).into());
    let mut spectrum: Vec<(Rat, u32)> = vec![(Rat::zero(), 1)];
    for (mu, mult) in space.jacobi_spectrum() {
        if mu.is_zero() {
            // The radial zero eigenspace is already accounted for; extra
            // zero-eigenvalue directions (flat space) shift by -kappa = 0.
            if *mult > 1 {
                spectrum.push((-&kappa, mult - 1));
            }
        } else {
            spectrum.push((mu - &kappa, *mult));
        }
    }
    Ok(WeylSignature::from_spectrum(spectrum))
}

/// Weyl-Jacobi spectrum of the product of an even-dimensional catalog
/// member with a line, at a maximal-rank direction tangent to the even
/// factor: the factor's signature with the zero multiplicity raised by
/// one (the line direction joins the kernel).
pub fn odd_product_spectrum(even_factor: &ModelSpace) -> Result<WeylSignature> {
    if even_factor.dim() % 2 != 0 {
        return Err(Error::Domain(format!(
            "the product construction takes an even-dimensional factor, got dimension {}",
            even_factor.dim()
        )));
    }
    let base = weyl_spectrum(even_factor)?;
    let mut spectrum = base.spectrum.clone();
    spectrum.push((Rat::zero(), 1));
    Ok(WeylSignature::from_spectrum(spectrum))
}

/// Whether two signatures differ as multisets up to an overall positive
/// rescaling. A linear isomorphism can rescale a spectrum but cannot
/// change sign patterns or multiplicities, so this is a sound criterion
/// for distinguishing the catalog. Two identically-zero spectra are not
/// distinct.
pub fn signatures_distinct(a: &WeylSignature, b: &WeylSignature) -> bool {
    a.normalized() != b.normalized()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{make_space, Family};
    use crate::rational::{rat, rint};

    fn space(f: Family, p: Option<u32>) -> ModelSpace {
        make_space(f, p).unwrap()
    }

    #[test]
    fn cp2_signature() {
        let sig = weyl_spectrum(&space(Family::Cp, Some(2))).unwrap();
        assert_eq!(sig.spectrum(), &[(rint(-1), 2), (rint(0), 1), (rint(2), 1)]);
        assert_eq!(sig.counts(), (2, 1, 1));
    }

    #[test]
    fn op2_signature() {
        let sig = weyl_spectrum(&space(Family::Op2, None)).unwrap();
        assert_eq!(
            sig.spectrum(),
            &[(rat(-7, 5), 8), (rint(0), 1), (rat(8, 5), 7)]
        );
    }

    #[test]
    fn flat_and_sphere_vanish() {
        assert!(weyl_spectrum(&space(Family::Flat, Some(9))).unwrap().is_zero());
        assert!(weyl_spectrum(&space(Family::Sphere, Some(7))).unwrap().is_zero());
        assert!(weyl_spectrum(&space(Family::HSphere, Some(4))).unwrap().is_zero());
    }

    #[test]
    fn low_dimensions_rejected() {
        assert!(matches!(
            weyl_spectrum(&space(Family::Sphere, Some(3))),
            Err(Error::WeylUndefined(3))
        ));
    }

    #[test]
    fn tracelessness_and_dimension() {
        for (f, p) in [
            (Family::Cp, Some(5)),
            (Family::Hp, Some(3)),
            (Family::Op2, None),
            (Family::Chp, Some(2)),
            (Family::Hhp, Some(4)),
            (Family::Hop2, None),
            (Family::Flat, Some(8)),
        ] {
            let s = space(f, p);
            let sig = weyl_spectrum(&s).unwrap();
            assert_eq!(sig.trace(), rint(0), "trace of {}", s.name());
            assert_eq!(sig.dim(), s.dim(), "dimension of {}", s.name());
        }
    }

    #[test]
    fn dual_symmetry() {
        for (f, fd, p) in [
            (Family::Cp, Family::Chp, Some(3)),
            (Family::Hp, Family::Hhp, Some(2)),
            (Family::Op2, Family::Hop2, None),
        ] {
            let sig = weyl_spectrum(&space(f, p)).unwrap();
            let dual = weyl_spectrum(&space(fd, p)).unwrap();
            let negated: Vec<(Rat, u32)> =
                sig.spectrum().iter().map(|(ev, m)| (-ev, *m)).collect();
            assert_eq!(WeylSignature::from_spectrum(negated), dual);
        }
    }

    #[test]
    fn multiplicity_patterns() {
        // cp: negative of multiplicity m-2, positive of multiplicity 1;
        // hp: negative m-4, positive 3; octonionic plane: 8 and 7;
        // duals swap the signs.
        let cp4 = weyl_spectrum(&space(Family::Cp, Some(4))).unwrap();
        assert_eq!(cp4.counts(), (6, 1, 1));
        let hp2 = weyl_spectrum(&space(Family::Hp, Some(2))).unwrap();
        assert_eq!(hp2.counts(), (4, 1, 3));
        let chp4 = weyl_spectrum(&space(Family::Chp, Some(4))).unwrap();
        assert_eq!(chp4.counts(), (1, 1, 6));
        let hop2 = weyl_spectrum(&space(Family::Hop2, None)).unwrap();
        assert_eq!(hop2.counts(), (7, 1, 8));
    }

    #[test]
    fn odd_product_shifts_kernel() {
        let sig = odd_product_spectrum(&space(Family::Cp, Some(2))).unwrap();
        assert_eq!(sig.spectrum(), &[(rint(-1), 2), (rint(0), 2), (rint(2), 1)]);
        assert_eq!(sig.dim(), 5);

        let flat = odd_product_spectrum(&space(Family::Flat, Some(4))).unwrap();
        assert!(flat.is_zero());
        assert_eq!(flat.dim(), 5);

        // dual flips the product signature too
        let hhp = odd_product_spectrum(&space(Family::Hhp, Some(2))).unwrap();
        let hp = odd_product_spectrum(&space(Family::Hp, Some(2))).unwrap();
        let negated: Vec<(Rat, u32)> = hp.spectrum().iter().map(|(ev, m)| (-ev, *m)).collect();
        assert_eq!(WeylSignature::from_spectrum(negated), hhp);
    }

    #[test]
    fn odd_product_rejects_odd_factor() {
        assert!(odd_product_spectrum(&space(Family::Sphere, Some(5))).is_err());
    }

    #[test]
    fn distinctness_basics() {
        let cp4 = weyl_spectrum(&space(Family::Cp, Some(4))).unwrap();
        let hp2 = weyl_spectrum(&space(Family::Hp, Some(2))).unwrap();
        assert!(signatures_distinct(&cp4, &hp2));
        assert!(!signatures_distinct(&cp4, &cp4));

        // compact vs dual: sign patterns swap
        let chp4 = weyl_spectrum(&space(Family::Chp, Some(4))).unwrap();
        assert!(signatures_distinct(&cp4, &chp4));

        // two zero spectra are not distinct
        let flat = weyl_spectrum(&space(Family::Flat, Some(8))).unwrap();
        let sphere = weyl_spectrum(&space(Family::Sphere, Some(8))).unwrap();
        assert!(!signatures_distinct(&flat, &sphere));
    }

    #[test]
    fn rescaled_spectra_are_not_distinct() {
        let sig = weyl_spectrum(&space(Family::Hp, Some(3))).unwrap();
        let doubled: Vec<(Rat, u32)> = sig
            .spectrum()
            .iter()
            .map(|(ev, m)| (ev * rint(2), *m))
            .collect();
        let doubled = WeylSignature::from_spectrum(doubled);
        assert!(!signatures_distinct(&sig, &doubled));
    }
}
