//! Bracketed scalar root finding.

/// Bisection on `[lo, hi]` where `f(lo)` and `f(hi)` differ in sign (or one is zero).
///
/// Stops when the bracket is narrower than `tol`; returns the midpoint of the
/// final bracket, or an endpoint if it is an exact zero.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut f_lo = f(lo);
    if f_lo == 0.0 {
        return lo;
    }
    if f(hi) == 0.0 {
        return hi;
    }
    for _ in 0..200 {
        if (hi - lo).abs() <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// All sign changes of `f` on `[a, b]` found by sampling `n` equal steps,
/// each refined by [`bisect`]. Exact zeros at sample points are reported once.
pub fn scan_roots<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize, tol: f64) -> Vec<f64> {
    let n = n.max(1);
    let h = (b - a) / n as f64;
    let mut roots = Vec::new();
    let mut t0 = a;
    let mut f0 = f(a);
    if f0 == 0.0 {
        roots.push(a);
    }
    for i in 1..=n {
        let t1 = if i == n { b } else { a + h * i as f64 };
        let f1 = f(t1);
        if f1 == 0.0 {
            roots.push(t1);
        } else if f0 != 0.0 && (f0 > 0.0) != (f1 > 0.0) {
            roots.push(bisect(&mut f, t0, t1, tol));
        }
        t0 = t1;
        f0 = f1;
    }
    roots
}
