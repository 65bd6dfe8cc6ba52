//! Scalar quadrature helpers: adaptive Simpson for smooth integrands on a
//! finite interval, composite Simpson for uniformly sampled data, and a
//! log-domain rectangle rule for integrands spanning thousands of orders of
//! magnitude.

/// Adaptive Simpson quadrature of `f` on `[a, b]`.
///
/// Recursive bisection with the Richardson error estimate
/// `|s_left + s_right - s_whole| / 15`; `tol` is absolute. The interval is
/// first split into 16 panels so peaked integrands that vanish at the
/// midpoint and endpoints are not mistaken for zero.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let panels = 16;
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for i in 0..panels {
        let pa = a + i as f64 * h;
        let pb = if i + 1 == panels { b } else { pa + h };
        let fa = f(pa);
        let fb = f(pb);
        let m = 0.5 * (pa + pb);
        let fm = f(m);
        let whole = simpson_estimate(pa, pb, fa, fm, fb);
        total += adaptive_step(f, pa, pb, fa, fm, fb, whole, tol / panels as f64, 44);
    }
    total
}

fn simpson_estimate(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_step(
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
    let left = simpson_estimate(a, m, fa, flm, fm);
    let right = simpson_estimate(m, b, fm, frm, fb);
    let err = left + right - whole;
    if depth == 0 || err.abs() <= 15.0 * tol {
        return left + right + err / 15.0;
    }
    adaptive_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + adaptive_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Quadrature weights of the composite Simpson rule on `n` uniformly spaced
/// samples with spacing `h`. Even interval counts use pure Simpson, odd ones
/// finish with a Simpson-3/8 tail so the rule stays O(h^4).
pub fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    assert!(n >= 2, "simpson_weights needs at least two samples");
    let mut w = vec![0.0; n];
    if n == 2 {
        w[0] = 0.5 * h;
        w[1] = 0.5 * h;
        return w;
    }
    let intervals = n - 1;
    let simpson_end = if intervals.is_multiple_of(2) {
        n - 1
    } else {
        // 3/8 rule on the last three intervals.
        w[n - 4] += 3.0 * h / 8.0;
        w[n - 3] += 9.0 * h / 8.0;
        w[n - 2] += 9.0 * h / 8.0;
        w[n - 1] += 3.0 * h / 8.0;
        n - 4
    };
    if simpson_end >= 2 {
        w[0] += h / 3.0;
        w[simpson_end] += h / 3.0;
        let mut i = 1;
        while i < simpson_end {
            w[i] += 4.0 * h / 3.0;
            if i + 1 < simpson_end {
                w[i + 1] += 2.0 * h / 3.0;
            }
            i += 2;
        }
    }
    w
}

/// Composite Simpson rule on uniformly spaced samples.
pub fn composite_simpson(values: &[f64], h: f64) -> f64 {
    simpson_weights(values.len(), h)
        .iter()
        .zip(values)
        .map(|(w, v)| w * v)
        .sum()
}

/// Rectangle (midpoint) rule for `∫ exp(log_f(x)) dx` on `[a, b]`, computed
/// entirely in log space. Returns `ln` of the integral. Safe for integrands
/// like `exp(c x^2)` whose values overflow f64.
pub fn log_integral_rectangle(log_f: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    assert!(n >= 2 && b > a);
    let h = (b - a) / n as f64;
    let mut max_term = f64::NEG_INFINITY;
    let mut terms = Vec::with_capacity(n);
    for i in 0..n {
        let x = a + (i as f64 + 0.5) * h;
        let t = log_f(x);
        if t > max_term {
            max_term = t;
        }
        terms.push(t);
    }
    if max_term == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = terms.iter().map(|t| (t - max_term).exp()).sum();
    max_term + sum.ln() + h.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn adaptive_simpson_gaussian() {
        let v = adaptive_simpson(&|x: f64| (-x * x).exp(), -20.0, 20.0, 1e-12);
        assert!((v - PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn composite_simpson_matches_polynomial() {
        // Exact for cubics.
        let n = 101;
        let h = 1.0 / (n as f64 - 1.0);
        let vals: Vec<f64> = (0..n)
            .map(|i| {
                let x = i as f64 * h;
                x * x * x - 2.0 * x + 1.0
            })
            .collect();
        let v = composite_simpson(&vals, h);
        assert!((v - 0.25).abs() < 1e-13);
    }

    #[test]
    fn composite_simpson_odd_interval_count() {
        let n = 100; // 99 intervals, exercises the 3/8 tail
        let h = 1.0 / (n as f64 - 1.0);
        let vals: Vec<f64> = (0..n).map(|i| (i as f64 * h).sin()).collect();
        let v = composite_simpson(&vals, h);
        assert!((v - (1.0 - 1.0f64.cos())).abs() < 1e-9);
    }

    #[test]
    fn log_rectangle_handles_overflowing_integrand() {
        // ∫_{-L}^{L} e^{2x^2} dx with L = 30 overflows f64 but its log does not.
        let log_v = log_integral_rectangle(&|x| 2.0 * x * x, -30.0, 30.0, 100_000);
        // Asymptotics: 2 * e^{2L^2} / (4L), log = 2L^2 - ln(2L) with small correction.
        let approx = 2.0 * 900.0 - (2.0 * 30.0f64).ln();
        assert!((log_v - approx).abs() < 0.01);
    }

    #[test]
    fn log_rectangle_matches_plain_quadrature() {
        let log_v = log_integral_rectangle(&|x| -x * x, -15.0, 15.0, 20_000);
        assert!((log_v.exp() - PI.sqrt()).abs() < 1e-8);
    }
}
