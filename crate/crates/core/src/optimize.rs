//! Scalar minimisation for unimodal objectives.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Minimiser of a unimodal `f` on `[lo, hi]`. Bisects on the sign of the
/// analytic derivative `df` when it changes sign across the interval, and
/// falls back to golden-section search otherwise.
pub(crate) fn minimize_unimodal<F, D>(f: F, df: D, lo: f64, hi: f64, width: f64) -> f64
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    // Stationary point inside the interval: bisect on the derivative sign.
    if df(lo) < 0.0 && df(hi) > 0.0 {
        let (mut a, mut b) = (lo, hi);
        for _ in 0..2000 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if df(m) < 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        return 0.5 * (a + b);
    }

    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > width {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }

    // Otherwise the minimum sits at an end of the search interval.
    let candidates = [lo, hi, a, b, 0.5 * (a + b)];
    let mut best = candidates[0];
    let mut fbest = f(best);
    for &x in &candidates[1..] {
        let fx = f(x);
        if fx < fbest {
            best = x;
            fbest = fx;
        }
    }
    best
}
