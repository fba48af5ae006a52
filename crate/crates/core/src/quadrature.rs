//! Adaptive Gauss-Legendre quadrature on a finite interval.

use std::sync::OnceLock;

const ORDER: usize = 15;
const MAX_DEPTH: u32 = 48;

/// Nodes and weights of the `ORDER`-point Gauss-Legendre rule on [-1, 1].
fn rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| legendre_rule(ORDER))
}

/// Gauss-Legendre nodes by Newton iteration on P_n, starting from the
/// Chebyshev-like asymptotic guesses.
pub fn legendre_rule(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn fixed<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    rule().iter().map(|&(x, w)| w * f(mid + half * x)).sum::<f64>() * half
}

/// Integrates `f` over `[a, b]` to relative accuracy `rel_tol` by bisecting
/// any panel whose single-rule and split-rule estimates disagree.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    let whole = fixed(&f, a, b);
    let scale = whole.abs().max(f64::MIN_POSITIVE);
    let mut stack = vec![(a, b, whole, 0u32)];
    let mut total = 0.0;
    let mut comp = 0.0;
    while let Some((lo, hi, est, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = fixed(&f, lo, mid);
        let right = fixed(&f, mid, hi);
        let refined = left + right;
        let budget = rel_tol * scale * (hi - lo) / (b - a);
        if (refined - est).abs() <= budget || depth >= MAX_DEPTH {
            // Neumaier summation over accepted panels.
            let t = total + refined;
            if total.abs() >= refined.abs() {
                comp += (total - t) + refined;
            } else {
                comp += (refined - t) + total;
            }
            total = t;
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    total + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let w: f64 = legendre_rule(ORDER).iter().map(|p| p.1).sum();
        assert!((w - 2.0).abs() < 1e-14);
        let m: f64 = legendre_rule(ORDER).iter().map(|&(x, w)| w * x.powi(28)).sum();
        assert!((m - 2.0 / 29.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let v = integrate(|x| x.sqrt(), 0.0, 1.0, 1e-12);
        assert!((v - 2.0 / 3.0).abs() < 1e-11);
        let v = integrate(|x| (1.0 - x * x).sqrt(), -1.0, 1.0, 1e-12);
        assert!((v - std::f64::consts::FRAC_PI_2).abs() < 1e-10);
    }
}
