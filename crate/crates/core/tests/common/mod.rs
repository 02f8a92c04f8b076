//! Reference integrators used as independent oracles.

#![allow(dead_code)]

/// Adaptive Simpson quadrature on `[a, b]`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step(
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
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// `int_0^1 x^{a-1} (1-x)^{b-1} h(x) dx` using `x = u^{1/a}` on `[0, 1/2]`
/// and the mirrored substitution on `[1/2, 1]`.
pub fn beta_weighted_integral(a: f64, b: f64, h: &dyn Fn(f64) -> f64) -> f64 {
    let left_end = 0.5f64.powf(a);
    let left = adaptive_simpson(
        &|u: f64| {
            let x = u.powf(1.0 / a);
            (1.0 - x).powf(b - 1.0) * h(x) / a
        },
        0.0,
        left_end,
        1e-14,
    );
    let right_end = 0.5f64.powf(b);
    let right = adaptive_simpson(
        &|u: f64| {
            let y = u.powf(1.0 / b);
            (1.0 - y).powf(a - 1.0) * h(1.0 - y) / b
        },
        0.0,
        right_end,
        1e-14,
    );
    left + right
}

/// Posterior mean of `f` under Beta(a, b) times the likelihood `l`.
pub fn beta_posterior_mean(a: f64, b: f64, l: &dyn Fn(f64) -> f64, f: &dyn Fn(f64) -> f64) -> f64 {
    beta_weighted_integral(a, b, &|x| l(x) * f(x)) / beta_weighted_integral(a, b, l)
}
