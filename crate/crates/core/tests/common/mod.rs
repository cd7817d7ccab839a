#![allow(dead_code)]

/// Adaptive Simpson quadrature on `[a, b]`.
pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
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
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let diff = left + right - whole;
        if depth == 0 || diff.abs() <= 15.0 * tol {
            left + right + diff / 15.0
        } else {
            step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let (fa, fb) = (f(a), f(b));
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// `∫_0^∞ f` through `s = x/(1-x)`, split at `x = 1/2` so each piece is smooth.
pub fn half_line(f: &dyn Fn(f64) -> f64, tol: f64) -> f64 {
    let g = |x: f64| {
        if x >= 1.0 {
            return 0.0;
        }
        let s = x / (1.0 - x);
        f(s) / ((1.0 - x) * (1.0 - x))
    };
    simpson(&g, 0.0, 0.5, tol) + simpson(&g, 0.5, 1.0, tol)
}

/// `Γ(s)` for `s ∈ (0, 1]` from `Γ(s) = (1/s)∫_0^∞ exp(-u^{1/s}) du`.
pub fn gamma_by_quadrature(s: f64) -> f64 {
    let upper = 60f64.powf(s);
    let f = |u: f64| (-u.powf(1.0 / s)).exp();
    simpson(&f, 0.0, upper, 1e-13) / s
}

/// `|S^{d-1}|`, the surface of the unit sphere in `R^d`, by the recursion
/// `|S^{d+1}| = 2π/d · |S^{d-1}|`.
pub fn unit_sphere_surface(d: u32) -> f64 {
    use std::f64::consts::PI;
    match d {
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI / (d - 2) as f64 * unit_sphere_surface(d - 2),
    }
}

pub fn log_grid(from: f64, to: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| 10f64.powf(from + (to - from) * i as f64 / (count - 1) as f64)).collect()
}

/// `r_ε` case table written out as `(ε-exponent, log power)`.
pub fn r_table(n: i64, m: i64, k: i64) -> (f64, i32) {
    let mixed = (n + k - 1 - m) as f64 / ((n + k - 1) * (m + 1)) as f64;
    if m > n + k {
        (1.0 / m as f64, 0)
    } else if m == n + k {
        (1.0 / m as f64, 1)
    } else if m == n + k - 1 || m == n - 1 {
        (0.0, -1)
    } else if m > n - 1 {
        (mixed, 0)
    } else {
        (mixed.min(1.0 / 6.0), 0)
    }
}

pub fn r_tilde_table(n: i64, m: i64) -> (f64, i32) {
    let base = (m + n - 2) as f64 / ((m + 1) * (2 * m + n - 2)) as f64;
    if m > n - 1 {
        (base, 0)
    } else if m == n - 1 {
        (0.0, -1)
    } else {
        (base.min(1.0 / 6.0), 0)
    }
}
