//! Floating-point building blocks for the grid solver: adaptive Simpson
//! quadrature with a cumulative cache, and a guarded Newton iteration
//! with bisection fallback.

/// Adaptive Simpson quadrature to an absolute tolerance.
///
/// The integrands here are smooth (removable singularities are handled
/// by the callers' series switch), so plain Simpson bisection with the
/// factor-15 Richardson test is adequate.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    recurse(f, a, b, fa, fm, fb, whole, tol.max(1e-300), 60)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Cumulative antiderivative cache: `alpha(u) = integral of f on [0, u]`.
///
/// Queries integrate from the nearest cached point at or below `u`, so
/// a monotone sweep (the continuation solver) only ever pays for short
/// segments. Keys are the IEEE bit patterns of the nonnegative abscissae,
/// which order correctly for nonnegative finite floats.
pub struct CumulativeIntegral<F: Fn(f64) -> f64> {
    f: F,
    tol: f64,
    cache: std::collections::BTreeMap<u64, f64>,
}

impl<F: Fn(f64) -> f64> CumulativeIntegral<F> {
    pub fn new(f: F, tol: f64) -> Self {
        let mut cache = std::collections::BTreeMap::new();
        cache.insert(0f64.to_bits(), 0.0);
        CumulativeIntegral { f, tol, cache }
    }

    pub fn value(&mut self, u: f64) -> f64 {
        debug_assert!(u >= 0.0 && u.is_finite());
        if let Some(v) = self.cache.get(&u.to_bits()) {
            return *v;
        }
        let (&bits0, &base) = self
            .cache
            .range(..=u.to_bits())
            .next_back()
            .expect("cache is seeded at 0");
        let u0 = f64::from_bits(bits0);
        let v = base + adaptive_simpson(&|x| (self.f)(x), u0, u, self.tol);
        self.cache.insert(u.to_bits(), v);
        v
    }
}

/// Newton iteration on a scalar equation `g(x) = 0` with derivative `dg`,
/// stopping on `|g| <= tol`. After `max_iter` steps without convergence a
/// bracketing bisection around the seed is attempted before giving up.
/// The closures may carry state (quadrature caches).
pub fn newton_with_bisection(
    g: &mut dyn FnMut(f64) -> f64,
    dg: &mut dyn FnMut(f64) -> f64,
    seed: f64,
    tol: f64,
    max_iter: u32,
) -> Option<f64> {
    let mut x = seed;
    for _ in 0..max_iter {
        let gx = g(x);
        if !gx.is_finite() {
            break;
        }
        if gx.abs() <= tol {
            return Some(x);
        }
        let d = dg(x);
        if !d.is_finite() || d.abs() < 1e-300 {
            break;
        }
        let step = gx / d;
        x -= step;
        if !x.is_finite() {
            break;
        }
    }
    bisect(g, seed, tol)
}

fn bisect(g: &mut dyn FnMut(f64) -> f64, seed: f64, tol: f64) -> Option<f64> {
    let mut glo = g(seed);
    if glo.abs() <= tol {
        return Some(seed);
    }
    // Expand a bracket around the seed until the sign changes.
    let mut lo = seed;
    let mut hi = seed;
    let mut ghi = glo;
    let mut span = seed.abs().max(1e-3) * 0.5;
    for _ in 0..64 {
        lo = (lo - span).max(1e-12);
        hi += span;
        glo = g(lo);
        ghi = g(hi);
        if glo.is_finite() && ghi.is_finite() && glo.signum() != ghi.signum() {
            break;
        }
        span *= 2.0;
    }
    if !(glo.is_finite() && ghi.is_finite() && glo.signum() != ghi.signum()) {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if !gm.is_finite() {
            return None;
        }
        if gm.abs() <= tol {
            return Some(mid);
        }
        if gm.signum() == glo.signum() {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    None
}
