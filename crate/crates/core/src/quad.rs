//! Adaptive Simpson quadrature.

/// Result of a quadrature call.
#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    /// Sum of the local Richardson error estimates.
    pub error: f64,
    pub evaluations: usize,
}

const INITIAL_PANELS: usize = 32;
const MAX_DEPTH: u32 = 48;

/// Integrates `f` over `[a, b]` with adaptive Simpson and Richardson
/// correction. The target error is `max(abs_tol, rel_tol * |integral|)`,
/// split over 32 starting panels in proportion to width.
///
/// `f` must be finite on the closed interval. Returns zero for `a == b`;
/// reversed limits flip the sign.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Integral
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Integral {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        };
    }
    if b < a {
        let r = adaptive_simpson(f, b, a, rel_tol, abs_tol);
        return Integral {
            value: -r.value,
            ..r
        };
    }

    let h = (b - a) / INITIAL_PANELS as f64;
    let mut panels = Vec::with_capacity(INITIAL_PANELS);
    let mut evaluations = 0;
    let mut rough = 0.0;
    let mut f_left = f(a);
    evaluations += 1;
    for i in 0..INITIAL_PANELS {
        let lo = a + h * i as f64;
        let hi = if i + 1 == INITIAL_PANELS { b } else { lo + h };
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        let f_right = f(hi);
        evaluations += 2;
        let s = (hi - lo) / 6.0 * (f_left + 4.0 * f_mid + f_right);
        rough += s;
        panels.push((lo, hi, f_left, f_mid, f_right, s));
        f_left = f_right;
    }

    let tol = abs_tol.max(rel_tol * rough.abs());
    let mut value = 0.0;
    let mut error = 0.0;
    for (lo, hi, fa, fm, fb, s) in panels {
        let panel_tol = tol * (hi - lo) / (b - a);
        let (v, e) = refine(&f, lo, hi, fa, fm, fb, s, panel_tol, MAX_DEPTH, &mut evaluations);
        value += v;
        error += e;
    }
    Integral {
        value,
        error,
        evaluations,
    }
}

#[allow(clippy::too_many_arguments)]
fn refine<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    evaluations: &mut usize,
) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    *evaluations += 2;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol || m <= a || m >= b {
        return (left + right + delta / 15.0, delta.abs() / 15.0);
    }
    let (lv, le) = refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, evaluations);
    let (rv, re) = refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, evaluations);
    (lv + rv, le + re)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = adaptive_simpson(|x| 3.0 * x * x + 2.0 * x + 1.0, 0.0, 2.0, 1e-12, 0.0);
        assert!((r.value - 14.0).abs() < 1e-12);
    }

    #[test]
    fn exponential_tail() {
        let r = adaptive_simpson(|x| (-x).exp(), 0.0, 40.0, 1e-11, 0.0);
        assert!((r.value - (1.0 - (-40.0f64).exp())).abs() < 1e-10, "{}", r.value);
    }

    #[test]
    fn reversed_and_empty() {
        assert_eq!(adaptive_simpson(|x| x, 1.0, 1.0, 1e-9, 0.0).value, 0.0);
        let r = adaptive_simpson(|x| x, 1.0, 0.0, 1e-12, 0.0);
        assert!((r.value + 0.5).abs() < 1e-14);
    }

    #[test]
    fn kink_resolved() {
        let r = adaptive_simpson(|x: f64| x.abs(), -1.0, 3.0, 1e-12, 0.0);
        assert!((r.value - 5.0).abs() < 1e-10);
    }
}
