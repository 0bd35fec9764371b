//! Catalog of the model geometries: spheres, the projective planes and
//! spaces over C, H and O, their negative-curvature duals, and flat space.
//!
//! Each catalog member carries its dimension, curvature sign, Jacobi
//! spectrum, Einstein constant, closed-form density, and injectivity
//! radius. Densities are normalized so that the nonflat compact spaces
//! have Jacobi eigenvalues in {0, 1, 4}; the duals reverse the sign of
//! the curvature tensor, which negates spectra and replaces sin/cos by
//! sinh/cosh in the densities.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::rational::Rat;
use crate::series::{elementary, Elementary, Parity, TruncatedSeries};
use crate::{Error, Result};

/// The nine density families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    Sphere,
    Cp,
    Hp,
    Op2,
    HSphere,
    Chp,
    Hhp,
    Hop2,
    Flat,
}

impl Family {
    /// CLI selector token.
    pub fn token(self) -> &'static str {
        match self {
            Family::Sphere => "sphere",
            Family::Cp => "cp",
            Family::Hp => "hp",
            Family::Op2 => "op2",
            Family::HSphere => "hsphere",
            Family::Chp => "chp",
            Family::Hhp => "hhp",
            Family::Hop2 => "hop2",
            Family::Flat => "flat",
        }
    }

    pub fn from_token(tok: &str) -> Result<Self> {
        Ok(match tok {
            "sphere" => Family::Sphere,
            "cp" => Family::Cp,
            "hp" => Family::Hp,
            "op2" => Family::Op2,
            "hsphere" => Family::HSphere,
            "chp" => Family::Chp,
            "hhp" => Family::Hhp,
            "hop2" => Family::Hop2,
            "flat" => Family::Flat,
            other => return Err(Error::UndefinedSpace(format!("unknown family '{other}'"))),
        })
    }

    /// Index of the family in the classification catalog: the projective
    /// families and their duals come first, flat space last. Spheres and
    /// hyperbolic spaces are conformally flat and sit after the catalog
    /// proper; they never enter the distinguishability tables.
    pub fn catalog_index(self) -> u32 {
        match self {
            Family::Cp => 1,
            Family::Hp => 2,
            Family::Op2 => 3,
            Family::Chp => 4,
            Family::Hhp => 5,
            Family::Hop2 => 6,
            Family::Flat => 7,
            Family::Sphere => 8,
            Family::HSphere => 9,
        }
    }

    fn is_dual(self) -> bool {
        matches!(self, Family::HSphere | Family::Chp | Family::Hhp | Family::Hop2)
    }
}

/// Injectivity radius of a catalog member.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InjectivityRadius {
    Pi,
    HalfPi,
    Infinite,
}

impl InjectivityRadius {
    pub fn as_f64(self) -> f64 {
        match self {
            InjectivityRadius::Pi => std::f64::consts::PI,
            InjectivityRadius::HalfPi => std::f64::consts::FRAC_PI_2,
            InjectivityRadius::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for InjectivityRadius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InjectivityRadius::Pi => write!(f, "pi"),
            InjectivityRadius::HalfPi => write!(f, "pi/2"),
            InjectivityRadius::Infinite => write!(f, "inf"),
        }
    }
}

/// A fully populated catalog member. Immutable once constructed; the
/// basepoint is not a parameter because every member is homogeneous.
#[derive(Clone, Debug)]
pub struct ModelSpace {
    family: Family,
    /// k for the projective families, m for sphere/hsphere/flat, 2 for
    /// the octonionic planes.
    param: u32,
    dim: u32,
    curvature_sign: i8,
    jacobi_spectrum: Vec<(Rat, u32)>,
    ricci_unit: Rat,
    injectivity_radius: InjectivityRadius,
    cut_locus: String,
    density_id: String,
}

impl ModelSpace {
    pub fn family(&self) -> Family {
        self.family
    }

    pub fn param(&self) -> u32 {
        self.param
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn curvature_sign(&self) -> i8 {
        self.curvature_sign
    }

    /// Eigenvalue/multiplicity pairs of the Jacobi operator at a unit
    /// direction; the eigenvalue 0 always carries the radial direction.
    pub fn jacobi_spectrum(&self) -> &[(Rat, u32)] {
        &self.jacobi_spectrum
    }

    /// Ricci curvature on a unit vector (all members are Einstein).
    pub fn ricci_unit(&self) -> &Rat {
        &self.ricci_unit
    }

    /// Scalar curvature, `dim * ricci_unit`.
    pub fn scalar_curvature(&self) -> Rat {
        &self.ricci_unit * Rat::from_integer(self.dim.into())
    }

    pub fn injectivity_radius(&self) -> InjectivityRadius {
        self.injectivity_radius
    }

    pub fn cut_locus(&self) -> &str {
        &self.cut_locus
    }

    pub fn density_id(&self) -> &str {
        &self.density_id
    }

    /// Short display name, e.g. `cp(k=2)` or `sphere(m=4)`.
    pub fn name(&self) -> String {
        match self.family {
            Family::Op2 | Family::Hop2 => self.family.token().to_string(),
            Family::Sphere | Family::HSphere | Family::Flat => {
                format!("{}(m={})", self.family.token(), self.param)
            }
            _ => format!("{}(k={})", self.family.token(), self.param),
        }
    }
}

/// Construct a catalog member. `param` is k for the projective families
/// (k >= 2), m for sphere/hsphere/flat (m >= 2), and must be absent for
/// the octonionic planes.
pub fn make_space(family: Family, param: Option<u32>) -> Result<ModelSpace> {
    let err = |msg: String| Err(Error::UndefinedSpace(msg));
    match family {
        Family::Sphere | Family::HSphere | Family::Flat => {
            let m = match param {
                Some(m) if m >= 2 => m,
                Some(m) => return err(format!("{} needs m >= 2, got {m}", family.token())),
                None => return err(format!("{} needs a dimension m", family.token())),
            };
            Ok(build(family, m, m))
        }
        Family::Cp | Family::Chp => {
            let k = match param {
                Some(k) if k >= 2 => k,
                Some(k) => return err(format!("{} needs k >= 2, got {k}", family.token())),
                None => return err(format!("{} needs a parameter k", family.token())),
            };
            Ok(build(family, k, 2 * k))
        }
        Family::Hp | Family::Hhp => {
            let k = match param {
                Some(k) if k >= 2 => k,
                Some(k) => return err(format!("{} needs k >= 2, got {k}", family.token())),
                None => return err(format!("{} needs a parameter k", family.token())),
            };
            Ok(build(family, k, 4 * k))
        }
        Family::Op2 | Family::Hop2 => match param {
            None => Ok(build(family, 2, 16)),
            Some(p) => err(format!("{} takes no parameter, got {p}", family.token())),
        },
    }
}

/// Resolve a `(family, m)` request to a catalog member, mapping the total
/// dimension onto the family parameter. Used by the CLI's `--m` flag.
pub fn make_space_by_dim(family: Family, m: u32) -> Result<ModelSpace> {
    let err = |msg: String| Err(Error::UndefinedSpace(msg));
    match family {
        Family::Sphere | Family::HSphere | Family::Flat => make_space(family, Some(m)),
        Family::Cp | Family::Chp => {
            if m % 2 != 0 {
                return err(format!("{} requires even dimension, got {m}", family.token()));
            }
            make_space(family, Some(m / 2))
        }
        Family::Hp | Family::Hhp => {
            if m % 4 != 0 {
                return err(format!(
                    "{} requires dimension divisible by 4, got {m}",
                    family.token()
                ));
            }
            make_space(family, Some(m / 4))
        }
        Family::Op2 | Family::Hop2 => {
            if m != 16 {
                return err(format!("{} exists only in dimension 16, got {m}", family.token()));
            }
            make_space(family, None)
        }
    }
}

fn build(family: Family, param: u32, dim: u32) -> ModelSpace {
    let m = dim as i64;
    // Spectrum of the compact representative; duals negate it.
    let (compact_spectrum, iota_compact, cut_compact, density): (
        Vec<(i64, u32)>,
        InjectivityRadius,
        String,
        String,
    ) = match family {
        Family::Sphere | Family::HSphere => (
            vec![(0, 1), (1, dim - 1)],
            InjectivityRadius::Pi,
            "antipodal point".into(),
            format!("{}(r)^{}", trig(family), m - 1),
        ),
        Family::Cp | Family::Chp => (
            vec![(0, 1), (1, dim - 2), (4, 1)],
            InjectivityRadius::HalfPi,
            format!("cp(k={})", param - 1),
            format!("{}(r)^{} {}(r)", trig(family), m - 1, cotrig(family)),
        ),
        Family::Hp | Family::Hhp => (
            vec![(0, 1), (1, dim - 4), (4, 3)],
            InjectivityRadius::HalfPi,
            format!("hp(k={})", param - 1),
            format!("{}(r)^{} {}(r)^3", trig(family), m - 1, cotrig(family)),
        ),
        Family::Op2 | Family::Hop2 => (
            vec![(0, 1), (1, 8), (4, 7)],
            InjectivityRadius::HalfPi,
            "s7".into(),
            format!("{}(r)^15 {}(r)^7", trig(family), cotrig(family)),
        ),
        Family::Flat => (
            vec![(0, dim)],
            InjectivityRadius::Infinite,
            "empty".into(),
            format!("r^{}", m - 1),
        ),
    };

    let sign: i8 = if family == Family::Flat {
        0
    } else if family.is_dual() {
        -1
    } else {
        1
    };
    let jacobi_spectrum: Vec<(Rat, u32)> = compact_spectrum
        .iter()
        .map(|&(ev, mult)| (Rat::from_integer((ev * sign as i64).into()), mult))
        .collect();
    let ricci_unit: Rat = jacobi_spectrum
        .iter()
        .fold(Rat::zero(), |acc, (ev, mult)| acc + ev * Rat::from_integer((*mult).into()));
    let (injectivity_radius, cut_locus) = if sign == 1 {
        (iota_compact, cut_compact)
    } else {
        (InjectivityRadius::Infinite, "empty".into())
    };

    ModelSpace {
        family,
        param,
        dim,
        curvature_sign: sign,
        jacobi_spectrum,
        ricci_unit,
        injectivity_radius,
        cut_locus,
        density_id: density,
    }
}

fn trig(family: Family) -> &'static str {
    if family.is_dual() {
        "sinh"
    } else {
        "sin"
    }
}

fn cotrig(family: Family) -> &'static str {
    if family.is_dual() {
        "cosh"
    } else {
        "cos"
    }
}

/// Reduced density `Theta~ = Theta / r^(m-1)` as an exact even series
/// with constant term 1.
pub fn theta_tilde_series(space: &ModelSpace, order: usize) -> TruncatedSeries {
    let m = space.dim as i64;
    let (sin_name, cos_name) = if space.family.is_dual() {
        (Elementary::Sinh, Elementary::Cosh)
    } else {
        (Elementary::Sin, Elementary::Cos)
    };
    let sinc = elementary(sin_name, order + 1)
        .shift_down(1)
        .expect("sin-type expansion starts at r");
    let int_pow = |s: &TruncatedSeries, p: i64| {
        s.pow_q(&Rat::from_integer(p.into()))
            .expect("unit constant term by construction")
    };
    let series = match space.family {
        Family::Flat => TruncatedSeries::one(order),
        Family::Sphere | Family::HSphere => int_pow(&sinc, m - 1),
        Family::Cp | Family::Chp => {
            int_pow(&sinc, m - 1).mul(&elementary(cos_name, order))
        }
        Family::Hp | Family::Hhp => {
            int_pow(&sinc, m - 1).mul(&int_pow(&elementary(cos_name, order), 3))
        }
        Family::Op2 | Family::Hop2 => {
            int_pow(&sinc, 15).mul(&int_pow(&elementary(cos_name, order), 7))
        }
    };
    series
        .with_parity(Parity::Even)
        .expect("catalog densities are even")
}

/// Closed-form polar density `Theta` at radius r. Domain: 0 < r < the
/// injectivity radius.
pub fn theta_value(space: &ModelSpace, r: f64) -> Result<f64> {
    let iota = space.injectivity_radius.as_f64();
    if !(r > 0.0 && r < iota) {
        return Err(Error::Domain(format!(
            "theta of {} is defined for 0 < r < {}, got {r}",
            space.name(),
            space.injectivity_radius
        )));
    }
    Ok(theta_value_unchecked(space, r))
}

fn theta_value_unchecked(space: &ModelSpace, r: f64) -> f64 {
    let m = space.dim as i32;
    let (s, c) = if space.family.is_dual() {
        (r.sinh(), r.cosh())
    } else {
        (r.sin(), r.cos())
    };
    match space.family {
        Family::Flat => r.powi(m - 1),
        Family::Sphere | Family::HSphere => s.powi(m - 1),
        Family::Cp | Family::Chp => s.powi(m - 1) * c,
        Family::Hp | Family::Hhp => s.powi(m - 1) * c.powi(3),
        Family::Op2 | Family::Hop2 => s.powi(15) * c.powi(7),
    }
}

/// Reduced density `Theta~ = Theta / r^(m-1)` at radius r, extended by
/// continuity to 1 at r = 0.
pub fn theta_tilde_value(space: &ModelSpace, r: f64) -> f64 {
    if r == 0.0 {
        return 1.0;
    }
    theta_value_unchecked(space, r) / r.powi(space.dim as i32 - 1)
}

// --- Trace monomials and tables ---------------------------------------------

/// A canonical trace monomial: the sequence of covariant-derivative
/// orders inside one trace, `[k_1, .., k_n]` standing for
/// `Tr{ J_{k_1} ... J_{k_n} }` with `J_0 = J`. Keys are canonicalized as
/// the lexicographic minimum over cyclic rotations and reversal, which
/// are trace identities for products of self-adjoint operators.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(Vec<u8>);

impl Monomial {
    pub fn new(orders: &[u8]) -> Monomial {
        assert!(!orders.is_empty(), "a trace monomial has at least one factor");
        let mut best = orders.to_vec();
        let mut consider = |cand: &[u8]| {
            if cand < best.as_slice() {
                best = cand.to_vec();
            }
        };
        let n = orders.len();
        let mut fwd = orders.to_vec();
        let mut rev: Vec<u8> = orders.iter().rev().cloned().collect();
        for _ in 0..n {
            fwd.rotate_left(1);
            rev.rotate_left(1);
            consider(&fwd);
            consider(&rev);
        }
        Monomial(best)
    }

    pub fn orders(&self) -> &[u8] {
        &self.0
    }

    /// Total weight: each factor `J_k` weighs `k + 2`.
    pub fn weight(&self) -> u32 {
        self.0.iter().map(|&k| k as u32 + 2).sum()
    }

    /// True when the monomial contains a covariant-derivative factor.
    pub fn has_derivative(&self) -> bool {
        self.0.iter().any(|&k| k > 0)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tr{{")?;
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            if *k == 0 {
                write!(f, "J")?;
            } else {
                write!(f, "J{k}")?;
            }
        }
        write!(f, "}}")
    }
}

/// All canonical monomials of total weight at most `max_weight`.
pub fn monomials_up_to_weight(max_weight: u32) -> Vec<Monomial> {
    let mut out = std::collections::BTreeSet::new();
    fn extend(
        prefix: &mut Vec<u8>,
        remaining: i64,
        out: &mut std::collections::BTreeSet<Monomial>,
    ) {
        if !prefix.is_empty() {
            out.insert(Monomial::new(prefix));
        }
        let mut k = 0u8;
        while (k as i64 + 2) <= remaining {
            prefix.push(k);
            extend(prefix, remaining - (k as i64 + 2), out);
            prefix.pop();
            k += 1;
        }
    }
    extend(&mut Vec::new(), max_weight as i64, &mut out);
    out.into_iter().collect()
}

/// Values of canonical trace monomials at one direction, the input to
/// the coefficient-formula evaluator.
#[derive(Clone, Debug)]
pub struct TraceTable {
    entries: BTreeMap<Monomial, Rat>,
    dim: u32,
}

impl TraceTable {
    pub fn new(entries: BTreeMap<Monomial, Rat>, dim: u32) -> TraceTable {
        TraceTable { entries, dim }
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn get(&self, key: &Monomial) -> Option<&Rat> {
        self.entries.get(key)
    }

    pub fn entries(&self) -> &BTreeMap<Monomial, Rat> {
        &self.entries
    }

    /// Rescale entry values as a metric rescale would: an entry of weight
    /// w is multiplied by `factor^w`. Exposed for homogeneity checks.
    pub fn rescaled(&self, factor: &Rat) -> TraceTable {
        let entries = self
            .entries
            .iter()
            .map(|(k, v)| {
                let mut p = Rat::one();
                for _ in 0..k.weight() {
                    p *= factor;
                }
                (k.clone(), v * p)
            })
            .collect();
        TraceTable { entries, dim: self.dim }
    }
}

/// Trace table of a locally symmetric catalog member: power sums of the
/// Jacobi spectrum for the derivative-free monomials, zero for every
/// monomial containing a covariant derivative.
pub fn trace_table(space: &ModelSpace) -> TraceTable {
    let mut entries = BTreeMap::new();
    for mono in monomials_up_to_weight(8) {
        let value = if mono.has_derivative() {
            Rat::zero()
        } else {
            let p = mono.orders().len() as u32;
            power_sum(&space.jacobi_spectrum, p)
        };
        entries.insert(mono, value);
    }
    TraceTable::new(entries, space.dim)
}

fn power_sum(spectrum: &[(Rat, u32)], p: u32) -> Rat {
    spectrum.iter().fold(Rat::zero(), |acc, (ev, mult)| {
        let mut evp = Rat::one();
        for _ in 0..p {
            evp *= ev;
        }
        acc + evp * Rat::from_integer((*mult).into())
    })
}

/// Desk-scale oracle for direction dependence: the Riemannian product of
/// two catalog members, probed along the direction that makes angle
/// parameters `c, s` with the factors, `c^2 + s^2 = 1`. Takes the exact
/// squared weight `c^2` so everything stays rational.
///
/// Returns the trace table `Tr{J(theta)^p} = c^(2p) Tr_a + s^(2p) Tr_b`
/// (derivative monomials vanish: both factors are locally symmetric) and
/// the directional reduced density `Theta~_a(c r) * Theta~_b(s r)`.
pub fn product_oracle(
    a: &ModelSpace,
    b: &ModelSpace,
    c_squared: &Rat,
    order: usize,
) -> Result<(TraceTable, TruncatedSeries)> {
    if c_squared < &Rat::zero() || c_squared > &Rat::one() {
        return Err(Error::Domain(format!(
            "product weight c^2 must lie in [0, 1], got {c_squared}"
        )));
    }
    let s_squared = Rat::one() - c_squared;
    let mut entries = BTreeMap::new();
    for mono in monomials_up_to_weight(8) {
        let value = if mono.has_derivative() {
            Rat::zero()
        } else {
            let p = mono.orders().len() as u32;
            let mut cp = Rat::one();
            let mut sp = Rat::one();
            for _ in 0..p {
                cp *= c_squared;
                sp *= &s_squared;
            }
            cp * power_sum(&a.jacobi_spectrum, p) + sp * power_sum(&b.jacobi_spectrum, p)
        };
        entries.insert(mono, value);
    }
    let table = TraceTable::new(entries, a.dim + b.dim);
    let series_a = theta_tilde_series(a, order).scale_argument_even(c_squared)?;
    let series_b = theta_tilde_series(b, order).scale_argument_even(&s_squared)?;
    Ok((table, series_a.mul(&series_b)))
}

/// The compact/dual partner of a space (flat maps to itself).
pub fn dual_space(space: &ModelSpace) -> ModelSpace {
    let family = match space.family {
        Family::Sphere => Family::HSphere,
        Family::HSphere => Family::Sphere,
        Family::Cp => Family::Chp,
        Family::Chp => Family::Cp,
        Family::Hp => Family::Hhp,
        Family::Hhp => Family::Hp,
        Family::Op2 => Family::Hop2,
        Family::Hop2 => Family::Op2,
        Family::Flat => Family::Flat,
    };
    match family {
        Family::Op2 | Family::Hop2 => make_space(family, None),
        _ => make_space(family, Some(space.param)),
    }
    .expect("dual of a valid space is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_to_f64, rint};

    #[test]
    fn op2_row() {
        let s = make_space(Family::Op2, None).unwrap();
        assert_eq!(s.dim(), 16);
        assert_eq!(
            s.jacobi_spectrum(),
            &[(rint(0), 1), (rint(1), 8), (rint(4), 7)]
        );
        assert_eq!(s.ricci_unit(), &rint(36));
        assert_eq!(s.injectivity_radius(), InjectivityRadius::HalfPi);
    }

    #[test]
    fn flat_row() {
        let s = make_space(Family::Flat, Some(6)).unwrap();
        assert_eq!(s.jacobi_spectrum(), &[(rint(0), 6)]);
        assert_eq!(s.ricci_unit(), &rint(0));
    }

    #[test]
    fn hp3_row() {
        let s = make_space(Family::Hp, Some(3)).unwrap();
        assert_eq!(s.dim(), 12);
        assert_eq!(
            s.jacobi_spectrum(),
            &[(rint(0), 1), (rint(1), 8), (rint(4), 3)]
        );
        assert_eq!(s.ricci_unit(), &rint(20));
        assert_eq!(make_space_by_dim(Family::Hp, 12).unwrap().param(), 3);
    }

    #[test]
    fn invalid_spaces_are_rejected() {
        assert!(make_space(Family::Cp, Some(1)).is_err());
        assert!(make_space(Family::Hp, None).is_err());
        assert!(make_space(Family::Op2, Some(3)).is_err());
        assert!(make_space(Family::Sphere, Some(1)).is_err());
        assert!(make_space_by_dim(Family::Hp, 10).is_err());
        assert!(make_space_by_dim(Family::Op2, 8).is_err());
        assert!(make_space_by_dim(Family::Cp, 7).is_err());
    }

    #[test]
    fn einstein_consistency_all_members() {
        for space in crate::verify::catalog_representatives() {
            let sum: Rat = space
                .jacobi_spectrum()
                .iter()
                .fold(Rat::zero(), |acc, (ev, mult)| {
                    acc + ev * Rat::from_integer((*mult).into())
                });
            assert_eq!(&sum, space.ricci_unit(), "einstein mismatch for {}", space.name());
            let mults: u32 = space.jacobi_spectrum().iter().map(|(_, m)| m).sum();
            assert_eq!(mults, space.dim(), "multiplicities of {}", space.name());
            let zero_mult = space
                .jacobi_spectrum()
                .iter()
                .find(|(ev, _)| ev.is_zero())
                .map(|(_, m)| *m)
                .unwrap_or(0);
            assert!(zero_mult >= 1, "radial zero eigenvalue of {}", space.name());
        }
    }

    #[test]
    fn cp2_density_series() {
        let cp2 = make_space(Family::Cp, Some(2)).unwrap();
        let t = theta_tilde_series(&cp2, 4);
        assert_eq!(t.coeff(0), rint(1));
        assert_eq!(t.coeff(2), rint(-1));
        assert_eq!(t.coeff(4), rat(2, 5));
        assert_eq!(t.parity(), Parity::Even);
    }

    #[test]
    fn sphere4_density_series() {
        let s4 = make_space(Family::Sphere, Some(4)).unwrap();
        let t = theta_tilde_series(&s4, 8);
        assert_eq!(t.coeff(2), rat(-1, 2));
        assert_eq!(t.coeff(4), rat(13, 120));
        assert_eq!(t.coeff(6), rat(-41, 3024));
        assert_eq!(t.coeff(8), rat(671, 604800));
    }

    #[test]
    fn flat_density_is_one() {
        let f = make_space(Family::Flat, Some(9)).unwrap();
        assert!(theta_tilde_series(&f, 10).sub(&TruncatedSeries::one(10)).is_zero());
    }

    #[test]
    fn dual_coefficient_law() {
        // Coefficient nu of a dual density is (-1)^(nu/2) times the
        // compact one.
        for (fam, param) in [
            (Family::Sphere, Some(5)),
            (Family::Cp, Some(3)),
            (Family::Hp, Some(2)),
            (Family::Op2, None),
        ] {
            let compact = make_space(fam, param).unwrap();
            let dual = dual_space(&compact);
            let tc = theta_tilde_series(&compact, 8);
            let td = theta_tilde_series(&dual, 8);
            for nu in (0..=8).step_by(2) {
                let sign = if (nu / 2) % 2 == 0 { rint(1) } else { rint(-1) };
                assert_eq!(td.coeff(nu), tc.coeff(nu) * sign, "{} at r^{nu}", compact.name());
            }
        }
    }

    #[test]
    fn theta_values() {
        let s4 = make_space(Family::Sphere, Some(4)).unwrap();
        let v = theta_value(&s4, std::f64::consts::FRAC_PI_2).unwrap();
        assert!((v - 1.0).abs() < 1e-15);

        let cp2 = make_space(Family::Cp, Some(2)).unwrap();
        let q = std::f64::consts::FRAC_PI_4;
        let expect = q.sin().powi(3) * q.cos();
        assert!((theta_value(&cp2, q).unwrap() - expect).abs() < 1e-15);

        let h3 = make_space(Family::HSphere, Some(3)).unwrap();
        assert!((theta_value(&h3, 0.7).unwrap() - 0.7f64.sinh().powi(2)).abs() < 1e-15);
    }

    #[test]
    fn theta_value_domain() {
        let cp2 = make_space(Family::Cp, Some(2)).unwrap();
        assert!(theta_value(&cp2, 0.0).is_err());
        assert!(theta_value(&cp2, 1.6).is_err());
        let h = make_space(Family::HSphere, Some(4)).unwrap();
        assert!(theta_value(&h, 50.0).is_ok());
    }

    #[test]
    fn tilde_value_matches_series_near_zero() {
        for space in crate::verify::catalog_representatives() {
            let series = theta_tilde_series(&space, 16);
            for r in [0.01, 0.1] {
                let direct = theta_tilde_value(&space, r);
                let via_series = series.eval_f64(r);
                assert!(
                    (direct - via_series).abs() < 1e-12,
                    "{} at r={r}: {direct} vs {via_series}",
                    space.name()
                );
            }
        }
    }

    #[test]
    fn monomial_canonicalization() {
        assert_eq!(Monomial::new(&[1, 1, 0]), Monomial::new(&[0, 1, 1]));
        assert_eq!(Monomial::new(&[1, 0, 2]), Monomial::new(&[2, 0, 1]));
        assert_eq!(Monomial::new(&[3]).weight(), 5);
        assert_eq!(Monomial::new(&[0, 1, 1]).weight(), 8);
        assert!(Monomial::new(&[0, 0]).orders() == &[0, 0]);
    }

    #[test]
    fn monomial_enumeration_covers_weight_8() {
        let all = monomials_up_to_weight(8);
        // Spot checks: every monomial used by the coefficient formulas.
        for key in [
            vec![0u8],
            vec![0, 0],
            vec![0, 0, 0],
            vec![0, 0, 0, 0],
            vec![6],
            vec![0, 1, 1],
            vec![1, 3],
            vec![0, 4],
        ] {
            assert!(all.contains(&Monomial::new(&key)), "missing {key:?}");
        }
        for mono in &all {
            assert!(mono.weight() <= 8);
        }
    }

    #[test]
    fn op2_trace_table() {
        let t = trace_table(&make_space(Family::Op2, None).unwrap());
        assert_eq!(t.get(&Monomial::new(&[0])).unwrap(), &rint(36));
        assert_eq!(t.get(&Monomial::new(&[0, 0])).unwrap(), &rint(120));
        assert_eq!(t.get(&Monomial::new(&[0, 0, 0])).unwrap(), &rint(456));
        assert_eq!(t.get(&Monomial::new(&[0, 0, 0, 0])).unwrap(), &rint(1800));
        assert_eq!(t.get(&Monomial::new(&[1])).unwrap(), &rint(0));
        assert_eq!(t.get(&Monomial::new(&[0, 1, 1])).unwrap(), &rint(0));
    }

    #[test]
    fn flat_trace_table_is_zero() {
        let t = trace_table(&make_space(Family::Flat, Some(7)).unwrap());
        assert!(t.entries().values().all(Rat::is_zero));
    }

    #[test]
    fn dual_trace_law() {
        let t = trace_table(&make_space(Family::Chp, Some(2)).unwrap());
        assert_eq!(t.get(&Monomial::new(&[0])).unwrap(), &rint(-6));
        assert_eq!(t.get(&Monomial::new(&[0, 0])).unwrap(), &rint(18));
        // General law: Tr{J^p} of a dual is (-1)^p the compact value.
        for (fam, param) in [(Family::Sphere, Some(6)), (Family::Hp, Some(2))] {
            let compact = make_space(fam, param).unwrap();
            let dual = dual_space(&compact);
            let tc = trace_table(&compact);
            let td = trace_table(&dual);
            for p in 1..=4usize {
                let key = Monomial::new(&vec![0u8; p]);
                let sign = if p % 2 == 0 { rint(1) } else { rint(-1) };
                assert_eq!(td.get(&key).unwrap(), &(tc.get(&key).unwrap() * sign));
            }
        }
    }

    #[test]
    fn product_oracle_two_spheres() {
        let s2 = make_space(Family::Sphere, Some(2)).unwrap();
        let (table, series) = product_oracle(&s2, &s2, &rat(1, 2), 8).unwrap();
        assert_eq!(table.get(&Monomial::new(&[0])).unwrap(), &rint(1));
        assert_eq!(table.get(&Monomial::new(&[0, 0])).unwrap(), &rat(1, 2));
        assert_eq!(series.coeff(2), rat(-1, 6));
        assert_eq!(table.dim(), 4);
    }

    #[test]
    fn product_oracle_degenerate_weight() {
        let s2 = make_space(Family::Sphere, Some(2)).unwrap();
        let flat = make_space(Family::Flat, Some(3)).unwrap();
        let (table, series) = product_oracle(&s2, &flat, &rint(1), 8).unwrap();
        let own_table = trace_table(&s2);
        for (key, v) in table.entries() {
            assert_eq!(v, own_table.get(key).unwrap());
        }
        let own_series = theta_tilde_series(&s2, 8);
        assert!(series.sub(&own_series).is_zero());
    }

    #[test]
    fn product_oracle_rejects_bad_weight() {
        let s2 = make_space(Family::Sphere, Some(2)).unwrap();
        assert!(product_oracle(&s2, &s2, &rat(3, 2), 4).is_err());
        assert!(product_oracle(&s2, &s2, &rat(-1, 2), 4).is_err());
    }

    #[test]
    fn product_series_cross_check_f64() {
        // Theta~_a(cr) * Theta~_b(sr) against direct floating evaluation.
        let s2 = make_space(Family::Sphere, Some(2)).unwrap();
        let cp2 = make_space(Family::Cp, Some(2)).unwrap();
        let csq = rat(3, 4);
        let (_, series) = product_oracle(&s2, &cp2, &csq, 16).unwrap();
        let c = rat_to_f64(&csq).sqrt();
        let s = (1.0 - rat_to_f64(&csq)).sqrt();
        for r in [0.05, 0.2] {
            let direct = theta_tilde_value(&s2, c * r) * theta_tilde_value(&cp2, s * r);
            assert!((series.eval_f64(r) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn names_and_tokens() {
        assert_eq!(make_space(Family::Cp, Some(2)).unwrap().name(), "cp(k=2)");
        assert_eq!(make_space(Family::Op2, None).unwrap().name(), "op2");
        assert_eq!(Family::from_token("hhp").unwrap(), Family::Hhp);
        assert!(Family::from_token("nope").is_err());
    }
}
