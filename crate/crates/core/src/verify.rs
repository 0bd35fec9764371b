//! The verification battery: every reproducibility check the project
//! makes, runnable from the CLI (`harmdens verify`) and from the
//! acceptance test suite. Exact checks compare reduced rationals;
//! numeric checks carry pinned tolerances. Checks are independent and
//! may run in parallel.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use num_traits::{One, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::asymptotics::{eval_h, extract_h, formula_table, HSequence};
use crate::deformation::{
    cp2_phi_integral, cp2_reference, flatten_series, solve_numeric, transform_density, DeformationProblem, DensitySpec, NumericTolerances,
};
use crate::models::{
    make_space, product_oracle, theta_tilde_series, trace_table, Family, ModelSpace,
};
use crate::rational::{rat, rint, Rat};
use crate::series::{Parity, TruncatedSeries};
use crate::weyl::{odd_product_spectrum, signatures_distinct, weyl_spectrum, WeylSignature};

/// Outcome of one check.
#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

type CheckFn = fn() -> std::result::Result<String, String>;

/// The battery, in report order.
pub const CHECKS: &[(&str, CheckFn)] = &[
    ("cp2-flatten-exact-coefficients", check_cp2_flatten),
    ("trace-formula-vs-series-equivalence", check_formula_series_equivalence),
    ("directional-product-oracle", check_directional_product),
    ("formula-table-structural-audit", check_formula_audit),
    ("prescription-round-trip", check_prescription_round_trip),
    ("transformation-law-vs-bruteforce", check_transform_bruteforce),
    ("numeric-grid-vs-closed-form", check_numeric_vs_closed_form),
    ("blowup-asymptotics-and-integrability", check_blowup),
    ("weyl-signature-distinguishability", check_weyl_distinguishability),
];

/// One canonical member per density family.
pub fn catalog_representatives() -> Vec<ModelSpace> {
    vec![
        make_space(Family::Sphere, Some(4)).unwrap(),
        make_space(Family::Cp, Some(2)).unwrap(),
        make_space(Family::Hp, Some(2)).unwrap(),
        make_space(Family::Op2, None).unwrap(),
        make_space(Family::HSphere, Some(4)).unwrap(),
        make_space(Family::Chp, Some(2)).unwrap(),
        make_space(Family::Hhp, Some(2)).unwrap(),
        make_space(Family::Hop2, None).unwrap(),
        make_space(Family::Flat, Some(4)).unwrap(),
    ]
}

/// The sweep used by the trace/series equivalence check: spheres in
/// dimensions 4..=16, the complex family for k in 2..=8, the quaternionic
/// family for k in 2..=4, both octonionic planes, every dual, and flat
/// space.
pub fn equivalence_sweep() -> Vec<ModelSpace> {
    let mut spaces = Vec::new();
    for m in 4..=16 {
        spaces.push(make_space(Family::Sphere, Some(m)).unwrap());
        spaces.push(make_space(Family::HSphere, Some(m)).unwrap());
    }
    for k in 2..=8 {
        spaces.push(make_space(Family::Cp, Some(k)).unwrap());
        spaces.push(make_space(Family::Chp, Some(k)).unwrap());
    }
    for k in 2..=4 {
        spaces.push(make_space(Family::Hp, Some(k)).unwrap());
        spaces.push(make_space(Family::Hhp, Some(k)).unwrap());
    }
    spaces.push(make_space(Family::Op2, None).unwrap());
    spaces.push(make_space(Family::Hop2, None).unwrap());
    spaces.push(make_space(Family::Flat, Some(4)).unwrap());
    spaces
}

/// Thread cap for [`run_all`]: the `HARMDENS_THREADS` environment
/// variable when set, otherwise the available parallelism.
pub fn default_threads() -> usize {
    if let Ok(v) = std::env::var("HARMDENS_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            return n.max(1);
        }
    }
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Run the whole battery on up to `threads` worker threads; results come
/// back in report order regardless of scheduling.
pub fn run_all(threads: usize) -> Vec<CheckResult> {
    let n = CHECKS.len();
    let threads = threads.clamp(1, n);
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<CheckResult>>> = (0..n).map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let result = run_indexed(i);
                *slots[i].lock().unwrap() = Some(result);
            });
        }
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().unwrap().expect("every slot filled"))
        .collect()
}

fn run_indexed(i: usize) -> CheckResult {
    let (name, f) = CHECKS[i];
    let t0 = Instant::now();
    let outcome = f();
    let seconds = t0.elapsed().as_secs_f64();
    match outcome {
        Ok(detail) => CheckResult { name, passed: true, detail, seconds },
        Err(detail) => CheckResult { name, passed: false, detail, seconds },
    }
}

/// Run a single check by name.
pub fn run_named(name: &str) -> Option<CheckResult> {
    CHECKS
        .iter()
        .position(|(n, _)| *n == name)
        .map(run_indexed)
}

fn budget(t0: Instant, limit: f64, what: &str) -> std::result::Result<String, String> {
    let secs = t0.elapsed().as_secs_f64();
    if secs <= limit {
        Ok(format!("{what} in {secs:.2}s (budget {limit}s)"))
    } else {
        Err(format!("{what} took {secs:.2}s, over the {limit}s budget"))
    }
}

// --- the individual checks ---------------------------------------------------

/// Flattening of the complex projective plane, exact conformal-factor
/// coefficients through order 10. Budget 1 s.
fn check_cp2_flatten() -> std::result::Result<String, String> {
    let t0 = Instant::now();
    let cp2 = make_space(Family::Cp, Some(2)).unwrap();
    let sol = flatten_series(&DensitySpec::for_space(&cp2, 10), 4, 10)
        .map_err(|e| e.to_string())?;
    let expect = [
        (0usize, rint(1)),
        (2, rat(1, 2)),
        (4, rat(13, 72)),
        (6, rat(1177, 19440)),
        (8, rat(7369, 362880)),
        (10, rat(681907, 97977600)),
    ];
    for (i, want) in expect {
        let got = sol.psi.coeff(i);
        if got != want {
            return Err(format!("psi coefficient of r^{i}: got {got}, want {want}"));
        }
    }
    for i in (1..=9).step_by(2) {
        if !sol.psi.coeff(i).is_zero() {
            return Err(format!("psi has a nonzero odd coefficient at r^{i}"));
        }
    }
    budget(t0, 1.0, "6 exact coefficients matched")
}

/// For every space in the sweep and every order 2..=8, the trace-formula
/// value equals the series coefficient exactly. Budget 5 s.
fn check_formula_series_equivalence() -> std::result::Result<String, String> {
    let t0 = Instant::now();
    let spaces = equivalence_sweep();
    let mut cases = 0usize;
    for space in &spaces {
        let table = trace_table(space);
        let h = extract_h(&theta_tilde_series(space, 8)).map_err(|e| e.to_string())?;
        for nu in 2..=8u32 {
            let lhs = eval_h(&table, nu).map_err(|e| e.to_string())?;
            let rhs = h.get(nu as usize);
            if lhs != rhs {
                return Err(format!(
                    "{} at order {nu}: formula {lhs} vs series {rhs}",
                    space.name()
                ));
            }
            cases += 1;
        }
    }
    budget(t0, 5.0, &format!("{cases} exact equalities over {} spaces", spaces.len()))
}

/// Product of two 2-spheres probed at five direction weights: the
/// formula evaluated on the product trace table reproduces the
/// directional density coefficients.
fn check_directional_product() -> std::result::Result<String, String> {
    let t0 = Instant::now();
    let s2 = make_space(Family::Sphere, Some(2)).unwrap();
    let weights = [rat(0, 1), rat(1, 4), rat(1, 2), rat(3, 4), rat(1, 1)];
    let mut cases = 0usize;
    for csq in &weights {
        let (table, series) = product_oracle(&s2, &s2, csq, 8).map_err(|e| e.to_string())?;
        for nu in 2..=8u32 {
            let lhs = eval_h(&table, nu).map_err(|e| e.to_string())?;
            let rhs = series.coeff(nu as usize);
            if lhs != rhs {
                return Err(format!(
                    "weight c^2 = {csq}, order {nu}: formula {lhs} vs density {rhs}"
                ));
            }
            cases += 1;
        }
    }
    budget(t0, 5.0, &format!("{cases} directional equalities"))
}

/// Structural audit of the formula table: weight homogeneity of every
/// product, the printed term counts (1, 1, 3, 3, 8, 9, 19), and odd-order
/// vanishing on derivative-free tables.
fn check_formula_audit() -> std::result::Result<String, String> {
    let t0 = Instant::now();
    formula_table().audit_weights().map_err(|e| e.to_string())?;
    let counts: Vec<usize> = (2..=8)
        .map(|nu| formula_table().term_count(nu).unwrap())
        .collect();
    let expect = vec![1usize, 1, 3, 3, 8, 9, 19];
    if counts != expect {
        return Err(format!("term counts {counts:?}, want {expect:?}"));
    }
    for space in catalog_representatives() {
        let table = trace_table(&space);
        for nu in [3u32, 5, 7] {
            let v = eval_h(&table, nu).map_err(|e| e.to_string())?;
            if !v.is_zero() {
                return Err(format!("odd order {nu} gave {v} on {}", space.name()));
            }
        }
    }
    budget(t0, 5.0, "weights, counts and odd-order vanishing verified")
}

fn random_h_sequence(rng: &mut ChaCha8Rng, order: usize) -> HSequence {
    let mut coeffs = vec![rint(0); order + 1];
    coeffs[0] = Rat::one();
    for i in (2..=order).step_by(2) {
        coeffs[i] = rat(rng.gen_range(-9..=9), rng.gen_range(1..=9));
    }
    HSequence::new(coeffs).expect("generated sequence satisfies the invariants")
}

/// Prescribe 50 random coefficient sequences on each density family and
/// recover them exactly from the transformed density. Budget 30 s.
fn check_prescription_round_trip() -> std::result::Result<String, String> {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
    let mut cases = 0usize;
    for space in catalog_representatives() {
        let m = space.dim();
        for _ in 0..50 {
            let order = 2 * rng.gen_range(2..=6); // 4..=12
            let target = random_h_sequence(&mut rng, order);
            let sol = crate::deformation::prescribe(&space, &target, order)
                .map_err(|e| e.to_string())?;
            let out = transform_density(&theta_tilde_series(&space, order), &sol.eta, m)
                .map_err(|e| e.to_string())?;
            let back = extract_h(&out).map_err(|e| e.to_string())?;
            for nu in 0..=order {
                if back.get(nu) != target.get(nu) {
                    return Err(format!(
                        "{} order {order}: entry {nu} came back {} instead of {}",
                        space.name(),
                        back.get(nu),
                        target.get(nu)
                    ));
                }
            }
            cases += 1;
        }
    }
    budget(t0, 30.0, &format!("{cases} exact round trips"))
}

/// The transformation law against an independent brute-force route built
/// on raw coefficient vectors and Lagrange inversion, to order 12.
fn check_transform_bruteforce() -> std::result::Result<String, String> {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0006);
    const ORDER: usize = 12;
    for space in catalog_representatives() {
        let theta = theta_tilde_series(&space, ORDER);
        for _ in 0..4 {
            // random odd eta with unit linear coefficient, order 13
            let mut eta_coeffs = vec![rint(0); ORDER + 2];
            eta_coeffs[1] = Rat::one();
            for i in (3..=ORDER + 1).step_by(2) {
                eta_coeffs[i] = rat(rng.gen_range(-4..=4), rng.gen_range(1..=4));
            }
            let eta = TruncatedSeries::new(eta_coeffs.clone(), Parity::Odd).unwrap();
            let fast = transform_density(&theta, &eta, space.dim())
                .map_err(|e| e.to_string())?;
            let slow = bruteforce::transform(theta.coeffs(), &eta_coeffs, space.dim(), ORDER);
            for nu in 0..=ORDER {
                if fast.coeff(nu) != slow[nu] {
                    return Err(format!(
                        "{} at r^{nu}: {} vs brute-force {}",
                        space.name(),
                        fast.coeff(nu),
                        slow[nu]
                    ));
                }
            }
        }
    }
    budget(t0, 20.0, "36 transformations matched the brute-force route")
}

/// Numeric continuation against the closed-form deformation on the grid
/// r = 0.05, 0.06, ..., 1.40: both the new radius and the equation
/// residual within 1e-8 everywhere. Budget 10 s.
fn check_numeric_vs_closed_form() -> std::result::Result<String, String> {
    let t0 = Instant::now();
    let cp2 = make_space(Family::Cp, Some(2)).unwrap();
    let problem = DeformationProblem::new(
        DensitySpec::constant_one(16),
        DensitySpec::for_space(&cp2, 16),
        4,
    )
    .map_err(|e| e.to_string())?;
    let grid: Vec<f64> = (5..=140).map(|i| i as f64 * 0.01).collect();
    let rows = solve_numeric(&problem, &grid, &NumericTolerances::default())
        .map_err(|e| e.to_string())?;
    if rows.len() != grid.len() {
        return Err(format!("continuation covered {} of {} points", rows.len(), grid.len()));
    }
    let mut max_eta_err = 0f64;
    let mut max_residual = 0f64;
    for row in &rows {
        let (eta_ref, _) = cp2_reference(row.r).map_err(|e| e.to_string())?;
        let err = (row.eta - eta_ref).abs();
        max_eta_err = max_eta_err.max(err);
        max_residual = max_residual.max(row.residual);
        if err > 1e-8 {
            return Err(format!("eta at r = {}: numeric {} vs closed {}", row.r, row.eta, eta_ref));
        }
        if row.residual > 1e-8 {
            return Err(format!("residual {} at r = {}", row.residual, row.r));
        }
    }
    budget(
        t0,
        10.0,
        &format!(
            "{} points, max |eta err| {:.2e}, max residual {:.2e}",
            rows.len(),
            max_eta_err,
            max_residual
        ),
    )
}

/// Blow-up rate of the closed-form conformal factor at the domain edge,
/// and convergence of its improper integral.
fn check_blowup() -> std::result::Result<String, String> {
    let t0 = Instant::now();
    let target = 3f64.powf(0.75) * (std::f64::consts::PI / (4.0 * 3f64.sqrt())).exp();
    let r = std::f64::consts::FRAC_PI_2 - 1e-6;
    let (_, phi) = cp2_reference(r).map_err(|e| e.to_string())?;
    let scaled = phi * (std::f64::consts::FRAC_PI_2 - r).powf(1.0 / 3.0);
    if (scaled - target).abs() > 1e-3 {
        return Err(format!(
            "phi * (pi/2 - r)^(1/3) = {scaled} vs {target} at r = pi/2 - 1e-6"
        ));
    }
    let integral = cp2_phi_integral(1e-10);
    if !integral.is_finite() || integral <= 0.0 {
        return Err(format!("integral of phi did not converge: {integral}"));
    }
    // The converged value is the finite new radius of the flattened ball,
    // which equals the same constant.
    if (integral - target).abs() > 1e-6 {
        return Err(format!("integral of phi = {integral}, expected {target}"));
    }
    budget(
        t0,
        5.0,
        &format!("edge rate {scaled:.6} vs {target:.6}; integral {integral:.9}"),
    )
}

fn even_dim_catalog(m: u32) -> Vec<(u32, ModelSpace)> {
    let mut out = Vec::new();
    if m % 2 == 0 && m >= 4 {
        out.push((1, make_space(Family::Cp, Some(m / 2)).unwrap()));
        if m % 4 == 0 && m / 4 >= 2 {
            out.push((2, make_space(Family::Hp, Some(m / 4)).unwrap()));
        }
        if m == 16 {
            out.push((3, make_space(Family::Op2, None).unwrap()));
        }
        out.push((4, make_space(Family::Chp, Some(m / 2)).unwrap()));
        if m % 4 == 0 && m / 4 >= 2 {
            out.push((5, make_space(Family::Hhp, Some(m / 4)).unwrap()));
        }
        if m == 16 {
            out.push((6, make_space(Family::Hop2, None).unwrap()));
        }
        out.push((7, make_space(Family::Flat, Some(m)).unwrap()));
    }
    out
}

/// Pairwise distinguishability of the Weyl signatures in even dimensions
/// 4, 8, 12, 16 and for the product construction in odd dimensions 5, 9,
/// 13, 17, with the exact multiplicity count patterns.
fn check_weyl_distinguishability() -> std::result::Result<String, String> {
    let t0 = Instant::now();
    let mut pairs = 0usize;

    let expect_counts = |idx: u32, m: u32, odd: bool| -> (u32, u32, u32) {
        let zero = if odd { 2 } else { 1 };
        let shift = if odd { zero } else { 1 };
        match idx {
            1 => (m - shift - 1, zero, 1),
            2 => (m - shift - 3, zero, 3),
            3 => (8, zero, 7),
            4 => (1, zero, m - shift - 1),
            5 => (3, zero, m - shift - 3),
            6 => (7, zero, 8),
            _ => (0, m, 0),
        }
    };

    for m in [4u32, 8, 12, 16] {
        let sigs: Vec<(u32, WeylSignature, String)> = even_dim_catalog(m)
            .into_iter()
            .map(|(idx, s)| {
                let sig = weyl_spectrum(&s).expect("catalog members have dim >= 4");
                let name = s.name();
                (idx, sig, name)
            })
            .collect();
        for (idx, sig, name) in &sigs {
            let want = expect_counts(*idx, m, false);
            if sig.counts() != want {
                return Err(format!(
                    "counts of {name} in dimension {m}: {:?}, want {want:?}",
                    sig.counts()
                ));
            }
            if !sig.trace().is_zero() {
                return Err(format!("nonzero trace for {name}"));
            }
        }
        for i in 0..sigs.len() {
            for j in (i + 1)..sigs.len() {
                if !signatures_distinct(&sigs[i].1, &sigs[j].1) {
                    return Err(format!(
                        "dimension {m}: {} and {} are not distinguished",
                        sigs[i].2, sigs[j].2
                    ));
                }
                pairs += 1;
            }
        }
    }

    for m in [5u32, 9, 13, 17] {
        let sigs: Vec<(u32, WeylSignature, String)> = even_dim_catalog(m - 1)
            .into_iter()
            .map(|(idx, s)| {
                let sig = odd_product_spectrum(&s).expect("factor dimension is even");
                let name = format!("{} x line", s.name());
                (idx, sig, name)
            })
            .collect();
        for (idx, sig, name) in &sigs {
            if sig.dim() != m {
                return Err(format!("{name} carries dimension {} not {m}", sig.dim()));
            }
            let want = expect_counts(*idx, m, true);
            if sig.counts() != want {
                return Err(format!(
                    "counts of {name} in dimension {m}: {:?}, want {want:?}",
                    sig.counts()
                ));
            }
        }
        for i in 0..sigs.len() {
            for j in (i + 1)..sigs.len() {
                if !signatures_distinct(&sigs[i].1, &sigs[j].1) {
                    return Err(format!(
                        "dimension {m}: {} and {} are not distinguished",
                        sigs[i].2, sigs[j].2
                    ));
                }
                pairs += 1;
            }
        }
    }
    budget(t0, 5.0, &format!("{pairs} ordered pairs distinguished, all patterns exact"))
}

/// Independent reimplementation of the transformation law on raw
/// coefficient vectors: naive convolution products, triangular inversion
/// and Lagrange series reversion, sharing no code with the series type.
mod bruteforce {
    use num_traits::{One, Zero};

    use crate::rational::Rat;

    fn mul(a: &[Rat], b: &[Rat], order: usize) -> Vec<Rat> {
        let mut out = vec![Rat::zero(); order + 1];
        for i in 0..=order.min(a.len().saturating_sub(1)) {
            if a[i].is_zero() {
                continue;
            }
            for j in 0..=(order - i).min(b.len().saturating_sub(1)) {
                if !b[j].is_zero() {
                    out[i + j] += &a[i] * &b[j];
                }
            }
        }
        out
    }

    /// Reciprocal of a series with unit constant term, by triangular
    /// back-substitution.
    fn inv(a: &[Rat], order: usize) -> Vec<Rat> {
        assert!(a[0].is_one());
        let mut out = vec![Rat::zero(); order + 1];
        out[0] = Rat::one();
        for n in 1..=order {
            let mut acc = Rat::zero();
            for k in 1..=n.min(a.len() - 1) {
                acc += &a[k] * &out[n - k];
            }
            out[n] = -acc;
        }
        out
    }

    fn int_pow(a: &[Rat], e: i64, order: usize) -> Vec<Rat> {
        let base = if e < 0 { inv(a, order) } else { a.to_vec() };
        let mut out = vec![Rat::zero(); order + 1];
        out[0] = Rat::one();
        for _ in 0..e.unsigned_abs() {
            out = mul(&out, &base, order);
        }
        out
    }

    fn compose(outer: &[Rat], inner: &[Rat], order: usize) -> Vec<Rat> {
        assert!(inner[0].is_zero());
        let mut out = vec![Rat::zero(); order + 1];
        out[0] = outer[0].clone();
        let mut power = vec![Rat::zero(); order + 1];
        power[0] = Rat::one();
        for k in 1..=order.min(outer.len() - 1) {
            power = mul(&power, inner, order);
            for (o, p) in out.iter_mut().zip(power.iter()) {
                *o += &outer[k] * p;
            }
        }
        out
    }

    /// Lagrange inversion: the n-th coefficient of the inverse of `s`
    /// (with s(0) = 0, s'(0) = 1) is `[r^(n-1)] (r/s)^n / n`.
    fn revert(s: &[Rat], order: usize) -> Vec<Rat> {
        assert!(s[0].is_zero() && s[1].is_one());
        let shifted: Vec<Rat> = s[1..].to_vec(); // s / r, unit constant term
        let mut out = vec![Rat::zero(); order + 1];
        if order >= 1 {
            out[1] = Rat::one();
        }
        let base = inv(&shifted, order); // (r/s)(r)
        let mut power = base.clone();
        for n in 2..=order {
            power = mul(&power, &base, order);
            // power now holds (r/s)^n
            out[n] = &power[n - 1] / Rat::from_integer((n as i64).into());
        }
        out
    }

    fn derivative(a: &[Rat]) -> Vec<Rat> {
        (1..a.len())
            .map(|i| &a[i] * Rat::from_integer((i as i64).into()))
            .collect()
    }

    /// The whole transformation: `(eta/r)^(1-m) (eta')^(m-1) theta`,
    /// then substitution of the reverted eta.
    pub fn transform(theta: &[Rat], eta: &[Rat], dim: u32, order: usize) -> Vec<Rat> {
        let m = dim as i64;
        let eta_over_r: Vec<Rat> = eta[1..].to_vec();
        let factor1 = int_pow(&eta_over_r, 1 - m, order);
        let psi = derivative(eta);
        let factor2 = int_pow(&psi, m - 1, order);
        let t = mul(&mul(&factor1, &factor2, order), theta, order);
        let eta_inv = revert(eta, order + 1);
        compose(&t, &eta_inv, order)
    }
}
