//! All-roots solver for real univariate polynomials.
//!
//! Roots are the eigenvalues of the companion matrix; real roots are then
//! polished with a few Newton steps on the original coefficients.

use nalgebra::{Complex, DMatrix};

/// Coefficients are ordered from the constant term upward.
pub fn eval_poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn eval_poly_and_derivative(coeffs: &[f64], x: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    for &c in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

/// Strips (exactly) zero leading coefficients.
fn trimmed(coeffs: &[f64]) -> &[f64] {
    let mut n = coeffs.len();
    while n > 0 && coeffs[n - 1] == 0.0 {
        n -= 1;
    }
    &coeffs[..n]
}

/// All complex roots, with multiplicity. Returns an empty list for constant
/// polynomials.
pub fn polynomial_roots(coeffs: &[f64]) -> Vec<Complex<f64>> {
    let c = trimmed(coeffs);
    if c.len() <= 1 {
        return Vec::new();
    }
    let n = c.len() - 1;
    let lead = c[n];
    let mut companion = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        companion[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        companion[(i, n - 1)] = -c[i] / lead;
    }
    companion.complex_eigenvalues().iter().copied().collect()
}

/// Real roots (sorted ascending) whose imaginary part is at most `imag_tol`.
pub fn real_roots(coeffs: &[f64], imag_tol: f64) -> Vec<f64> {
    let c = trimmed(coeffs);
    let mut out: Vec<f64> = polynomial_roots(c)
        .into_iter()
        .filter(|z| z.im.abs() <= imag_tol)
        .map(|z| polish(c, z.re))
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

fn polish(coeffs: &[f64], mut x: f64) -> f64 {
    for _ in 0..8 {
        let (p, dp) = eval_poly_and_derivative(coeffs, x);
        if dp == 0.0 || !p.is_finite() {
            break;
        }
        let step = p / dp;
        let next = x - step;
        // keep the eigenvalue estimate if Newton starts to wander
        if !next.is_finite() || eval_poly(coeffs, next).abs() > p.abs() {
            break;
        }
        x = next;
        if step.abs() <= 1e-16 * x.abs().max(1.0) {
            break;
        }
    }
    x
}
