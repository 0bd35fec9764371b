//! Radial conformal deformation: prescribe a target reduced density on a
//! model space.
//!
//! Given even densities `f1` (target, as a function of the new radius)
//! and `f2` (source, as a function of the old radius), both with value 1
//! at 0, the deformation is an odd reparametrization `eta` with
//! `eta'(0) = 1` satisfying
//!
//! ```text
//!   f1(eta(r)) = eta(r)^(1-m) r^(m-1) eta'(r)^(m-1) f2(r).
//! ```
//!
//! Substituting `phi_i = f_i^(1/(1-m))`, `phi_i = 1 + r^2 Phi_i`,
//! `alpha_i(r) = int_0^r t Phi_i(t) dt` and `eta = r beta` turns this into
//! `ln beta + alpha_1(r beta) = alpha_2(r)`, which is solved here both as
//! an exact series germ (fixed point gaining two orders per pass) and
//! numerically by Newton continuation along a grid.
//!
//! The module also applies the density transformation law to a series,
//! re-expressed in the new radial coordinate by exact reversion, and
//! carries the explicit flattening deformation of the complex projective
//! plane in closed form for cross-checks.

use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::asymptotics::HSequence;
use crate::models::{self, ModelSpace};
use crate::numeric::{adaptive_simpson, newton_with_bisection, CumulativeIntegral};
use crate::rational::{rat, rat_to_f64, Rat};
use crate::series::{exp_of, Parity, TruncatedSeries};
use crate::{Error, Result};

/// A density function: an exact even series germ with constant term 1,
/// optionally backed by a closed-form evaluator on `0 <= r < domain_max`
/// for the numeric paths.
#[derive(Clone)]
pub struct DensitySpec {
    series: TruncatedSeries,
    closed: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
    domain_max: f64,
}

impl std::fmt::Debug for DensitySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DensitySpec")
            .field("series", &self.series)
            .field("closed", &self.closed.is_some())
            .field("domain_max", &self.domain_max)
            .finish()
    }
}

impl DensitySpec {
    /// Series-only density. Must be even with constant term 1.
    pub fn from_series(series: TruncatedSeries) -> Result<DensitySpec> {
        validate_density(&series)?;
        Ok(DensitySpec { series, closed: None, domain_max: f64::INFINITY })
    }

    /// Series germ plus a closed-form evaluator valid below `domain_max`.
    pub fn with_closed(
        series: TruncatedSeries,
        closed: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        domain_max: f64,
    ) -> Result<DensitySpec> {
        validate_density(&series)?;
        Ok(DensitySpec { series, closed: Some(closed), domain_max })
    }

    /// The constant density 1.
    pub fn constant_one(order: usize) -> DensitySpec {
        DensitySpec {
            series: TruncatedSeries::one(order),
            closed: Some(Arc::new(|_| 1.0)),
            domain_max: f64::INFINITY,
        }
    }

    /// Reduced density of a catalog member, closed form attached.
    pub fn for_space(space: &ModelSpace, order: usize) -> DensitySpec {
        let series = models::theta_tilde_series(space, order);
        let spc = space.clone();
        DensitySpec {
            series,
            closed: Some(Arc::new(move |r| models::theta_tilde_value(&spc, r))),
            domain_max: space.injectivity_radius().as_f64(),
        }
    }

    pub fn series(&self) -> &TruncatedSeries {
        &self.series
    }

    pub fn domain_max(&self) -> f64 {
        self.domain_max
    }

    pub fn has_closed(&self) -> bool {
        self.closed.is_some()
    }

    /// Evaluate: series below the switch radius, closed form above.
    fn eval(&self, r: f64, switch: f64) -> Result<f64> {
        let v = match &self.closed {
            Some(closed) if r.abs() >= switch => {
                if r >= self.domain_max {
                    return Err(Error::Domain(format!(
                        "density evaluated at r = {r} beyond its domain bound {}",
                        self.domain_max
                    )));
                }
                closed(r)
            }
            _ => self.series.eval_f64(r),
        };
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Positivity(format!("density value {v} at r = {r}")));
        }
        Ok(v)
    }
}

fn validate_density(series: &TruncatedSeries) -> Result<()> {
    if !series.coeff(0).is_one() {
        return Err(Error::Normalization(series.coeff(0).to_string()));
    }
    for i in (1..=series.order()).step_by(2) {
        if !series.coeff(i).is_zero() {
            return Err(Error::Parity(format!(
                "density must be even: coefficient of r^{i} is {}",
                series.coeff(i)
            )));
        }
    }
    Ok(())
}

/// The deformation problem: target density (new radius), source density
/// (old radius), and the dimension.
#[derive(Clone, Debug)]
pub struct DeformationProblem {
    pub target: DensitySpec,
    pub source: DensitySpec,
    pub dim: u32,
}

impl DeformationProblem {
    pub fn new(target: DensitySpec, source: DensitySpec, dim: u32) -> Result<DeformationProblem> {
        if dim < 2 {
            return Err(Error::Domain(format!("dimension must be at least 2, got {dim}")));
        }
        Ok(DeformationProblem { target, source, dim })
    }
}

/// One row of a numeric continuation grid.
#[derive(Clone, Copy, Debug)]
pub struct GridRow {
    pub r: f64,
    pub beta: f64,
    pub eta: f64,
    pub psi: f64,
    pub residual: f64,
}

/// A solved deformation: the odd reparametrization `eta` (unit linear
/// coefficient), its derivative `psi` (the conformal factor), the even
/// quotient `beta = eta / r`, and the numeric grid when requested.
#[derive(Clone, Debug)]
pub struct DeformationSolution {
    pub eta: TruncatedSeries,
    pub psi: TruncatedSeries,
    pub beta: TruncatedSeries,
    pub grid: Option<Vec<GridRow>>,
}

/// Tolerances of the numeric path. The defaults are what the
/// verification battery pins; the CLI exposes them as advanced flags.
#[derive(Clone, Copy, Debug)]
pub struct NumericTolerances {
    pub quad_tol: f64,
    pub newton_tol: f64,
    pub series_switch: f64,
    pub max_newton_iter: u32,
}

impl Default for NumericTolerances {
    fn default() -> Self {
        NumericTolerances {
            quad_tol: 1e-12,
            newton_tol: 1e-12,
            series_switch: 0.1,
            max_newton_iter: 50,
        }
    }
}

/// Exponent `1/(1-m)` as an exact rational.
fn inv_one_minus_m(dim: u32) -> Rat {
    rat(1, 1 - dim as i64)
}

/// `phi = f^(1/(1-m))` as a series.
fn phi_series(f: &TruncatedSeries, dim: u32) -> Result<TruncatedSeries> {
    f.pow_q(&inv_one_minus_m(dim))
}

/// `Phi = (phi - 1)/r^2`; the removable quotient of an even unit series.
fn big_phi_series(phi: &TruncatedSeries) -> Result<TruncatedSeries> {
    phi.sub(&TruncatedSeries::one(phi.order())).shift_down(2)
}

/// `alpha(r) = int_0^r t Phi(t) dt` as a series.
fn alpha_series(big_phi: &TruncatedSeries) -> TruncatedSeries {
    big_phi.shift_up(1).antiderivative().truncate(big_phi.order() + 2)
}

/// Solve the deformation equation as an exact series germ.
///
/// The fixed point `beta <- exp(alpha_2 - alpha_1(r beta))` starts at
/// `beta = 1` and is exact two orders deeper each pass (both alphas
/// begin at r^2), so `ceil(order/2) + 1` passes pin all coefficients
/// through `order`. `eta = r beta` has order `order + 1`; `psi = eta'`
/// has order `order`. Both density germs must reach `order`.
pub fn solve_series(problem: &DeformationProblem, order: usize) -> Result<DeformationSolution> {
    for (what, density) in [("target", &problem.target), ("source", &problem.source)] {
        if density.series().order() < order {
            return Err(Error::Domain(format!(
                "{what} density germ has order {}, below the requested order {order}",
                density.series().order()
            )));
        }
    }
    let f1 = problem.target.series().truncate(order);
    let f2 = problem.source.series().truncate(order);
    validate_density(&f1)?;
    validate_density(&f2)?;

    let alpha1 = alpha_series(&big_phi_series(&phi_series(&f1, problem.dim)?)?).truncate(order);
    let alpha2 = alpha_series(&big_phi_series(&phi_series(&f2, problem.dim)?)?).truncate(order);

    let r = TruncatedSeries::identity(order + 1);
    let mut beta = TruncatedSeries::one(order);
    for _ in 0..(order.div_ceil(2) + 1) {
        let r_beta = r.mul(&beta.truncate(order + 1));
        let composed = alpha1.compose(&r_beta.truncate(order))?;
        beta = exp_of(&alpha2.sub(&composed))?;
    }
    finish_series_solution(beta, order)
}

/// Closed-form flattening: target density 1, so `beta = exp(alpha_2)`
/// with no fixed point. Agrees exactly with
/// `solve_series` on the same inputs.
pub fn flatten_series(
    source: &DensitySpec,
    dim: u32,
    order: usize,
) -> Result<DeformationSolution> {
    if dim < 2 {
        return Err(Error::Domain(format!("dimension must be at least 2, got {dim}")));
    }
    if source.series().order() < order {
        return Err(Error::Domain(format!(
            "source density germ has order {}, below the requested order {order}",
            source.series().order()
        )));
    }
    let f2 = source.series().truncate(order);
    validate_density(&f2)?;
    let alpha2 = alpha_series(&big_phi_series(&phi_series(&f2, dim)?)?).truncate(order);
    let beta = exp_of(&alpha2)?;
    finish_series_solution(beta, order)
}

fn finish_series_solution(beta: TruncatedSeries, order: usize) -> Result<DeformationSolution> {
    let beta = beta.truncate(order).with_parity(Parity::Even)?;
    let eta = beta.shift_up(1); // r * beta, odd, order + 1
    let psi = eta.derivative();
    Ok(DeformationSolution { eta, psi, beta, grid: None })
}

/// Residual of the deformation equation for a series solution: zero to
/// the common truncation order exactly when the solution is correct.
pub fn residual_series(
    problem: &DeformationProblem,
    solution: &DeformationSolution,
) -> Result<TruncatedSeries> {
    let m = problem.dim as i64;
    let lhs = problem.target.series().compose(&solution.eta)?;
    let beta_pow = solution.beta.pow_q(&Rat::from_integer((1 - m).into()))?;
    let psi_pow = solution.psi.pow_q(&Rat::from_integer((m - 1).into()))?;
    let rhs = beta_pow.mul(&psi_pow).mul(problem.source.series());
    Ok(lhs.sub(&rhs))
}

/// Apply the density transformation law to a reduced density series:
///
/// ```text
///   T(r) = (eta/r)^(1-m) * eta'(r)^(m-1) * theta~(r)
/// ```
///
/// then re-express in the new radial coordinate `s = eta(r)` by exact
/// reversion. `eta` must be odd with a positive linear coefficient
/// (unit in the canonical deformation; any positive rational slope is
/// accepted so plain metric rescalings can be expressed too).
pub fn transform_density(
    theta_tilde: &TruncatedSeries,
    eta: &TruncatedSeries,
    dim: u32,
) -> Result<TruncatedSeries> {
    if eta.parity() != Parity::Odd {
        return Err(Error::Parity("transformation needs an odd eta".into()));
    }
    let slope = eta.coeff(1);
    if !slope.is_positive() {
        return Err(Error::Domain(format!(
            "eta must have a positive linear coefficient, got {slope}"
        )));
    }
    if !theta_tilde.coeff(0).is_one() {
        return Err(Error::Normalization(theta_tilde.coeff(0).to_string()));
    }
    let m = dim as i64;
    let order = theta_tilde.order().min(eta.order().saturating_sub(1));
    let inv_slope = Rat::one() / &slope;

    // Normalize the slope away so both factors have constant term 1; the
    // scalars cancel between the two powers.
    let eta_over_r = eta.shift_down(1)?.scale(&inv_slope).truncate(order);
    let psi = eta.derivative().scale(&inv_slope).truncate(order);
    let t = eta_over_r
        .pow_q(&Rat::from_integer((1 - m).into()))?
        .mul(&psi.pow_q(&Rat::from_integer((m - 1).into()))?)
        .mul(&theta_tilde.truncate(order));

    // Inverse of eta: with u = eta/slope of unit slope,
    // eta^{-1}(s) = u^{-1}(s / slope).
    let unit = eta.scale(&inv_slope);
    let eta_inverse = unit.revert()?.scale_argument(&inv_slope);
    t.compose(&eta_inverse.truncate(order))?.with_parity(Parity::Even)
}

/// Prescribe a target coefficient sequence on a catalog member: solve for
/// the deformation whose transformed density realizes the sequence
/// through the truncation order. Target entries beyond `order` do not
/// constrain the germ; entries the sequence does not reach are 0.
pub fn prescribe(
    space: &ModelSpace,
    target: &HSequence,
    order: usize,
) -> Result<DeformationSolution> {
    let xi = DensitySpec::from_series(target.to_series(order))?;
    let source = DensitySpec::for_space(space, order);
    let problem = DeformationProblem::new(xi, source, space.dim())?;
    solve_series(&problem, order)
}

// --- Numeric continuation ---------------------------------------------------

/// Evaluator for `Phi(t) = (f(t)^(1/(1-m)) - 1)/t^2`, switching between
/// the exact series (small t, where the quotient loses float precision)
/// and the closed form.
struct PhiEvaluator {
    phi_series_f64: Vec<f64>,
    density: DensitySpec,
    exponent: f64,
    switch: f64,
}

impl PhiEvaluator {
    fn new(density: &DensitySpec, dim: u32, switch: f64) -> Result<PhiEvaluator> {
        let phi = phi_series(density.series(), dim)?;
        let big_phi = big_phi_series(&phi)?;
        let phi_series_f64 = big_phi.coeffs().iter().map(rat_to_f64).collect();
        Ok(PhiEvaluator {
            phi_series_f64,
            density: density.clone(),
            exponent: 1.0 / (1.0 - dim as f64),
            switch,
        })
    }

    fn eval(&self, t: f64) -> Result<f64> {
        if t.abs() < self.switch {
            let mut acc = 0.0;
            for c in self.phi_series_f64.iter().rev() {
                acc = acc * t + c;
            }
            Ok(acc)
        } else {
            let f = self.density.eval(t, self.switch)?;
            Ok((f.powf(self.exponent) - 1.0) / (t * t))
        }
    }

    /// phi itself: `1 + t^2 Phi(t)`.
    fn phi(&self, t: f64) -> Result<f64> {
        Ok(1.0 + t * t * self.eval(t)?)
    }
}

/// Solve the deformation equation on a strictly increasing grid by
/// continuation from `(r = 0, beta = 1)`.
///
/// Each grid point runs Newton on `beta -> alpha_2(r) - ln beta -
/// alpha_1(r beta)`, seeded by the previous point. The alphas are
/// cumulative adaptive quadratures of `t Phi_i(t)`; `psi` comes from the
/// pointwise identity `psi = beta phi_2(r) / phi_1(eta)` rather than
/// numeric differentiation; the recorded residual is the defect of the
/// deformation equation itself.
pub fn solve_numeric(
    problem: &DeformationProblem,
    grid: &[f64],
    tol: &NumericTolerances,
) -> Result<Vec<GridRow>> {
    if grid.is_empty() {
        return Ok(Vec::new());
    }
    let mut prev = 0.0f64;
    for &r in grid {
        if !(r > prev) {
            return Err(Error::Domain(format!(
                "grid must be strictly increasing and positive (offending r = {r})"
            )));
        }
        prev = r;
    }
    let r_max = *grid.last().unwrap();
    if r_max >= problem.source.domain_max() {
        return Err(Error::Domain(format!(
            "grid reaches r = {r_max}, at or beyond the source density domain bound {}",
            problem.source.domain_max()
        )));
    }
    if !problem.source.has_closed() || !problem.target.has_closed() {
        return Err(Error::Domain(
            "the numeric path needs closed-form evaluators for both densities".into(),
        ));
    }

    let m = problem.dim as f64;
    let phi1 = PhiEvaluator::new(&problem.target, problem.dim, tol.series_switch)?;
    let phi2 = PhiEvaluator::new(&problem.source, problem.dim, tol.series_switch)?;

    // Quadrature failures inside the integrand cannot be surfaced through
    // the f64 signature; poison with NaN and let the caller's finiteness
    // checks catch it.
    let quad_tol = tol.quad_tol;
    let mut alpha1 = CumulativeIntegral::new(
        |t: f64| match phi1.eval(t) {
            Ok(v) => t * v,
            Err(_) => f64::NAN,
        },
        quad_tol,
    );
    let mut alpha2 = CumulativeIntegral::new(
        |t: f64| match phi2.eval(t) {
            Ok(v) => t * v,
            Err(_) => f64::NAN,
        },
        quad_tol,
    );

    let mut rows: Vec<GridRow> = Vec::with_capacity(grid.len());
    let mut beta_seed = 1.0f64;
    let mut last_good = 0.0f64;
    let target_domain = problem.target.domain_max();

    for &r in grid {
        let a2 = alpha2.value(r);
        if !a2.is_finite() {
            return Err(Error::Continuation {
                last_good,
                reason: format!("source quadrature failed at r = {r}"),
            });
        }
        // G and G' in beta; alpha_1'(u) = u Phi_1(u).
        let mut g = |b: f64| -> f64 {
            if !(b > 0.0) || r * b >= target_domain {
                return f64::NAN;
            }
            let a1 = alpha1.value(r * b);
            a2 - b.ln() - a1
        };
        let mut dg = |b: f64| -> f64 {
            if !(b > 0.0) {
                return f64::NAN;
            }
            match phi1.eval(r * b) {
                Ok(p) => -1.0 / b - r * r * b * p,
                Err(_) => f64::NAN,
            }
        };
        let beta = match newton_with_bisection(
            &mut g,
            &mut dg,
            beta_seed,
            tol.newton_tol,
            tol.max_newton_iter,
        ) {
            Some(b) if b.is_finite() && b > 0.0 => b,
            _ => {
                return Err(Error::Continuation {
                    last_good,
                    reason: format!("root search failed at r = {r}"),
                })
            }
        };

        let eta = r * beta;
        if eta >= target_domain {
            return Err(Error::Continuation {
                last_good,
                reason: format!("eta = {eta} left the target density domain at r = {r}"),
            });
        }
        let psi = beta * phi2.phi(r)? / phi1.phi(eta)?;
        let f1_eta = problem.target.eval(eta, tol.series_switch)?;
        let f2_r = problem.source.eval(r, tol.series_switch)?;
        let residual = (f1_eta - eta.powf(1.0 - m) * r.powf(m - 1.0) * psi.powf(m - 1.0) * f2_r).abs();
        rows.push(GridRow { r, beta, eta, psi, residual });
        beta_seed = beta;
        last_good = r;
    }
    Ok(rows)
}

// --- Closed-form reference deformation on the complex projective plane ------

/// `3^(3/4) e^(pi / (2 sqrt 3))`, the integration constant that makes the
/// closed-form flattening deformation of the complex projective plane
/// tangent to the identity at 0.
pub fn cp2_constant() -> f64 {
    3f64.powf(0.75) * (std::f64::consts::PI / (2.0 * 3f64.sqrt())).exp()
}

/// Closed-form flattening deformation of the complex projective plane:
/// returns `(eta(r), phi(r))` for `0 < r < pi/2`, where `eta` is the new
/// radial coordinate and `phi = eta'` the conformal factor. `phi` blows
/// up like `(pi/2 - r)^(-1/3)` at the far end of the domain.
pub fn cp2_reference(r: f64) -> Result<(f64, f64)> {
    if !(r > 0.0 && r < std::f64::consts::FRAC_PI_2) {
        return Err(Error::Domain(format!(
            "closed-form deformation is defined for 0 < r < pi/2, got {r}"
        )));
    }
    let c1 = cp2_constant();
    let cos = r.cos();
    let c23 = cos.powf(2.0 / 3.0);
    let c43 = cos.powf(4.0 / 3.0);
    // 1 - cos^(2/3) via expm1 to keep full precision near r = 0.
    let one_minus_c23 = -f64::exp_m1(2.0 / 3.0 * cos.ln());
    let poly = c23 + c43 + 1.0;
    let arctan_factor = (-(3f64.sqrt()) / 2.0 * ((2.0 * c23 + 1.0) / 3f64.sqrt()).atan()).exp();
    let eta = c1 * one_minus_c23.sqrt() * poly.powf(-0.25) * arctan_factor;
    let phi = c1 * r.sin() * arctan_factor / (one_minus_c23.sqrt() * cos.powf(1.0 / 3.0) * poly.powf(1.25));
    Ok((eta, phi))
}

/// Adaptive quadrature of the conformal factor `phi` of the closed-form
/// deformation over `[0, pi/2]`. The integrand has an integrable
/// `(pi/2 - r)^(-1/3)` endpoint singularity, removed by the substitution
/// `r = pi/2 - u^3`; convergence of this integral is what makes the
/// flattened metric geodesically incomplete yet of finite radius.
pub fn cp2_phi_integral(tol: f64) -> f64 {
    let integrand = |u: f64| -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        let r = std::f64::consts::FRAC_PI_2 - u * u * u;
        let phi = if r < 0.1 {
            // series head; the tail is far below quadrature tolerance here
            1.0 + r * r / 2.0 + 13.0 * r.powi(4) / 72.0 + 1177.0 * r.powi(6) / 19440.0
        } else {
            cp2_reference(r).map(|(_, p)| p).unwrap_or(f64::NAN)
        };
        3.0 * u * u * phi
    };
    adaptive_simpson(&integrand, 0.0, std::f64::consts::FRAC_PI_2.cbrt(), tol)
}
