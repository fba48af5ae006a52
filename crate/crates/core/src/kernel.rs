//! Diagonal Bergman kernels of the egg domains `E_s = {|z|^2 + |w|^{2s} < 1}`
//! and of the unit ball.
//!
//! Two independent evaluation routes are provided for the egg: the
//! closed form, and direct summation of the orthogonal monomial expansion
//! `K = sum_{a,b} |z|^{2a} |w|^{2b} / ||z^a w^b||^2` with a certified tail
//! bound. Both work in the reduced coordinates `x = |z|^2`, `y = |w|^2`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::beta::ln_beta;

use crate::error::{Error, Result};
use crate::quadrature;

/// Terms summed by the series route before giving up.
pub const SERIES_TERM_BUDGET: u64 = 50_000_000;

/// A point of C^2, used for kernel evaluation on the diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagonalPoint {
    pub z: Complex64,
    pub w: Complex64,
}

impl DiagonalPoint {
    pub fn new(z: Complex64, w: Complex64) -> Self {
        Self { z, w }
    }

    pub fn real(z: f64, w: f64) -> Self {
        Self::new(Complex64::new(z, 0.0), Complex64::new(w, 0.0))
    }

    /// From real coordinates ordered `(Re z, Im z, Re w, Im w)`.
    pub fn from_coords(c: [f64; 4]) -> Self {
        Self::new(Complex64::new(c[0], c[1]), Complex64::new(c[2], c[3]))
    }

    pub fn coords(&self) -> [f64; 4] {
        [self.z.re, self.z.im, self.w.re, self.w.im]
    }

    /// A point with `|z|^2 = x` and `|w|^2 = y` on the real slice.
    pub fn from_reduced(x: f64, y: f64) -> Self {
        Self::real(x.sqrt(), y.sqrt())
    }

    pub fn x(&self) -> f64 {
        self.z.norm_sqr()
    }

    pub fn y(&self) -> f64 {
        self.w.norm_sqr()
    }

    /// `self + t * v` with `v` given in real coordinates.
    pub fn offset(&self, v: &[f64; 4], t: f64) -> Self {
        let c = self.coords();
        Self::from_coords([c[0] + t * v[0], c[1] + t * v[1], c[2] + t * v[2], c[3] + t * v[3]])
    }
}

/// Constants of the closed-form egg kernel
/// `K = sum_k c_k (1-x)^{-2+k/s} / ((1-x)^{1/s} - y)^{1+k}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EggKernelCoefficients {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

/// Value of the series route together with its certified error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesValue {
    pub value: f64,
    /// Upper bound on the neglected tail (absolute).
    pub tail_bound: f64,
    pub terms: u64,
}

/// The egg domain `E_s`; `s = 1` is the unit ball of C^2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EggDomain {
    s: f64,
}

impl EggDomain {
    pub fn new(s: f64) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::Parameter(format!("egg exponent s must be positive, got {s}")));
        }
        Ok(Self { s })
    }

    pub fn ball() -> Self {
        Self { s: 1.0 }
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// `Some(s)` when the exponent is a positive integer.
    pub fn integer_s(&self) -> Option<u32> {
        (self.s.fract() == 0.0 && self.s <= u32::MAX as f64).then_some(self.s as u32)
    }

    /// `1 - x - y^s`, positive exactly on the interior.
    pub fn defining_reduced(&self, x: f64, y: f64) -> f64 {
        1.0 - x - y.powf(self.s)
    }

    /// `1 - |z|^2 - |w|^{2s}`.
    pub fn defining(&self, p: &DiagonalPoint) -> f64 {
        self.defining_reduced(p.x(), p.y())
    }

    pub fn coefficients(&self) -> EggKernelCoefficients {
        let s = self.s;
        EggKernelCoefficients {
            c0: 0.0,
            c1: (s - 1.0) / (s * PI * PI),
            c2: 2.0 / (s * PI * PI),
        }
    }

    fn check_interior(&self, x: f64, y: f64) -> Result<()> {
        let value = self.defining_reduced(x, y);
        if value > 0.0 && x >= 0.0 && y >= 0.0 {
            Ok(())
        } else {
            Err(Error::DomainMembership { value })
        }
    }

    /// Closed-form diagonal kernel at reduced coordinates.
    pub fn kernel_closed_reduced(&self, x: f64, y: f64) -> Result<f64> {
        self.check_interior(x, y)?;
        let one_minus_x = 1.0 - x;
        let d = one_minus_x.powf(1.0 / self.s) - y;
        self.closed_from_parts(one_minus_x, d)
    }

    /// `sum_k c_k X^{-2+k/s} / d^{1+k}` with `X = 1 - x` and `d = X^{1/s} - y`.
    fn closed_from_parts(&self, one_minus_x: f64, d: f64) -> Result<f64> {
        if one_minus_x <= 0.0 {
            return Err(Error::DomainMembership { value: one_minus_x });
        }
        if d <= 0.0 {
            return Err(Error::DomainMembership { value: d });
        }
        let c = self.coefficients();
        let s = self.s;
        let mut k = 0.0;
        for (j, cj) in [(0, c.c0), (1, c.c1), (2, c.c2)] {
            if cj != 0.0 {
                let jf = j as f64;
                k += cj * one_minus_x.powf(-2.0 + jf / s) / d.powi(1 + j);
            }
        }
        Ok(k)
    }

    /// Closed form at `base + t v` for `base` on (or very near) the boundary.
    ///
    /// `1 - x` and `(1-x)^{1/s} - y` are formed as increments from their
    /// values at `base`, so they keep full relative precision as `t -> 0`
    /// instead of cancelling in `1 - |z|^2`.
    pub fn kernel_closed_along(&self, base: &DiagonalPoint, v: &[f64; 4], t: f64) -> Result<f64> {
        let vz = Complex64::new(v[0], v[1]);
        let vw = Complex64::new(v[2], v[3]);
        let x0 = 1.0 - base.x();
        let dx = 2.0 * t * (base.z.conj() * vz).re + t * t * vz.norm_sqr();
        let dy = 2.0 * t * (base.w.conj() * vw).re + t * t * vw.norm_sqr();
        let one_minus_x = x0 - dx;
        if one_minus_x <= 0.0 {
            return Err(Error::DomainMembership { value: one_minus_x });
        }
        let d = if x0 > 0.0 {
            let u0 = x0.powf(1.0 / self.s);
            let du = u0 * ((-dx / x0).ln_1p() / self.s).exp_m1();
            (u0 - base.y()) + du - dy
        } else {
            one_minus_x.powf(1.0 / self.s) - base.offset(v, t).y()
        };
        self.closed_from_parts(one_minus_x, d)
    }

    pub fn kernel_closed(&self, p: &DiagonalPoint) -> Result<f64> {
        self.kernel_closed_reduced(p.x(), p.y())
    }

    /// `||z^a w^b||^2 = pi^2 / (s (a+1)) * B((b+1)/s, a+2)`.
    pub fn monomial_norm_sq(&self, a: u32, b: u32) -> f64 {
        self.ln_monomial_norm_sq(a, b).exp()
    }

    fn ln_monomial_norm_sq(&self, a: u32, b: u32) -> f64 {
        let s = self.s;
        2.0 * PI.ln() - s.ln() - (a as f64 + 1.0).ln()
            + ln_beta((b as f64 + 1.0) / s, a as f64 + 2.0)
    }

    /// The same norm computed by quadrature: after integrating the angles and
    /// `u = |z|^2` analytically, `pi^2/(a+1) * int_0^1 v^b (1 - v^s)^{a+1} dv`.
    pub fn monomial_norm_sq_quadrature(&self, a: u32, b: u32, rel_tol: f64) -> f64 {
        let s = self.s;
        let af = a as f64 + 1.0;
        let inner = quadrature::integrate(|v| v.powi(b as i32) * (1.0 - v.powf(s)).powf(af), 0.0, 1.0, rel_tol);
        PI * PI / af * inner
    }

    /// Series route at reduced coordinates with relative error at most `rel_tol`.
    ///
    /// Columns `C_b = y^b sum_a x^a / ||z^a w^b||^2` are summed with the exact
    /// term ratio `x ((b+1)/s + a + 2) / (a + 1)`, which decreases in `a`, so
    /// each inner tail is dominated by a geometric series. Successive column
    /// ratios decrease in `b`, which bounds the outer tail the same way.
    pub fn kernel_series_reduced(&self, x: f64, y: f64, rel_tol: f64) -> Result<SeriesValue> {
        self.check_interior(x, y)?;
        if !(rel_tol > 0.0 && rel_tol < 1.0) {
            return Err(Error::Parameter(format!("rel_tol must lie in (0, 1), got {rel_tol}")));
        }
        let s = self.s;
        let col_tol = rel_tol / 4.0;
        let ln_y = y.ln();
        let mut total = Compensated::default();
        let mut inner_tails = 0.0;
        let mut terms = 0u64;
        let mut prev_col: Option<f64> = None;
        let mut prev_ratio = f64::INFINITY;

        for b in 0u32.. {
            let p = (b as f64 + 1.0) / s;
            let ln_first = if b == 0 { 0.0 } else { b as f64 * ln_y } - self.ln_monomial_norm_sq(0, b);
            // The column is summed relative to its first term, which can
            // underflow long before the column itself is negligible; the
            // running scale keeps the partial sums inside f64 range.
            let mut ln_scale = ln_first;
            let mut term = 1.0;
            let mut col = Compensated::default();
            col.add(term);
            terms += 1;
            let mut a = 0u32;
            let mut col_tail = 0.0;
            if x > 0.0 {
                loop {
                    let af = a as f64;
                    let ratio = x * (p + af + 2.0) / (af + 1.0);
                    if ratio < 1.0 {
                        let tail = term * ratio / (1.0 - ratio);
                        if tail <= col_tol * col.value() {
                            col_tail = tail;
                            break;
                        }
                    }
                    term *= ratio;
                    a += 1;
                    col.add(term);
                    terms += 1;
                    if term > RESCALE {
                        term /= RESCALE;
                        col.scale(1.0 / RESCALE);
                        ln_scale += RESCALE.ln();
                    }
                    if terms > SERIES_TERM_BUDGET {
                        return Err(Error::Truncation {
                            partial_sum: total.value() + (ln_scale + col.value().ln()).exp(),
                            tail_bound: f64::INFINITY,
                            terms,
                        });
                    }
                }
            }
            let col_tail = if col_tail > 0.0 { (ln_scale + col_tail.ln()).exp() } else { 0.0 };
            let col = (ln_scale + col.value().ln()).exp();
            total.add(col);
            inner_tails += col_tail;

            if y == 0.0 {
                break;
            }
            if let Some(prev) = prev_col {
                let ratio = col / prev;
                if ratio < 1.0 && ratio <= prev_ratio * (1.0 + 1e-9) {
                    let tail = col * ratio / (1.0 - ratio);
                    if tail <= 0.5 * rel_tol * total.value() {
                        return Ok(SeriesValue {
                            value: total.value(),
                            tail_bound: tail + inner_tails,
                            terms,
                        });
                    }
                }
                prev_ratio = ratio;
            }
            prev_col = Some(col);
            if terms > SERIES_TERM_BUDGET {
                return Err(Error::Truncation {
                    partial_sum: total.value(),
                    tail_bound: f64::INFINITY,
                    terms,
                });
            }
        }
        Ok(SeriesValue {
            value: total.value(),
            tail_bound: inner_tails,
            terms,
        })
    }

    pub fn kernel_series(&self, p: &DiagonalPoint, rel_tol: f64) -> Result<SeriesValue> {
        self.kernel_series_reduced(p.x(), p.y(), rel_tol)
    }
}

/// `n!/pi^n (1 - |p|^2)^{-(n+1)}`, the Bergman kernel of the unit ball of C^n.
pub fn ball_kernel(p: &[Complex64]) -> Result<f64> {
    let n = p.len();
    if n == 0 {
        return Err(Error::Parameter("ball dimension must be at least 1".into()));
    }
    let r2: f64 = p.iter().map(|c| c.norm_sqr()).sum();
    let rho = 1.0 - r2;
    if rho <= 0.0 {
        return Err(Error::DomainMembership { value: rho });
    }
    let nf = n as f64;
    let ln_fact: f64 = (1..=n).map(|k| (k as f64).ln()).sum();
    Ok((ln_fact - nf * PI.ln() - (nf + 1.0) * rho.ln()).exp())
}

/// Neumaier compensated summation.
#[derive(Debug, Default, Clone, Copy)]
struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }

    fn scale(&mut self, k: f64) {
        self.sum *= k;
        self.comp *= k;
    }
}

/// Rescaling threshold for column partial sums.
const RESCALE: f64 = 1e150;

/// One row of the closed-vs-series comparison grid.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GridRow {
    pub s: f64,
    pub x: f64,
    pub y: f64,
    pub k_closed: f64,
    pub k_series: f64,
    pub rel_err: f64,
    pub terms: u64,
}

/// Summary of a cross-oracle grid run.
#[derive(Debug, Clone, Serialize)]
pub struct GridReport {
    pub s: f64,
    pub grid: usize,
    pub max_rel_err: f64,
    pub terms_used: u64,
    #[serde(skip)]
    pub rows: Vec<GridRow>,
}

/// `n x n` reduced-coordinate grid filling `{x + y^s <= limit}`: `x` runs over
/// `limit * i/(n-1)` and, for each `x`, `y` over `(limit - x)^{1/s} * j/(n-1)`.
pub fn interior_grid(dom: &EggDomain, n: usize, limit: f64) -> Vec<(f64, f64)> {
    let denom = (n.max(2) - 1) as f64;
    let mut pts = Vec::with_capacity(n * n);
    for i in 0..n {
        let x = limit * i as f64 / denom;
        let ymax = (limit - x).max(0.0).powf(1.0 / dom.s());
        for j in 0..n {
            pts.push((x, ymax * j as f64 / denom));
        }
    }
    pts
}

/// Evaluates both routes on [`interior_grid`]; points are processed in
/// parallel and collected in grid order.
pub fn cross_oracle_grid(dom: &EggDomain, n: usize, limit: f64, rel_tol: f64) -> Result<GridReport> {
    let pts = interior_grid(dom, n, limit);
    let rows: Vec<GridRow> = pts
        .par_iter()
        .map(|&(x, y)| -> Result<GridRow> {
            let k_closed = dom.kernel_closed_reduced(x, y)?;
            let series = dom.kernel_series_reduced(x, y, rel_tol)?;
            Ok(GridRow {
                s: dom.s(),
                x,
                y,
                k_closed,
                k_series: series.value,
                rel_err: (series.value - k_closed).abs() / k_closed,
                terms: series.terms,
            })
        })
        .collect::<Result<_>>()?;
    let max_rel_err = rows.iter().map(|r| r.rel_err).fold(0.0, f64::max);
    let terms_used = rows.iter().map(|r| r.terms).sum();
    Ok(GridReport {
        s: dom.s(),
        grid: n,
        max_rel_err,
        terms_used,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn closed_form_at_origin() {
        let k1 = EggDomain::ball().kernel_closed(&DiagonalPoint::real(0.0, 0.0)).unwrap();
        assert!(rel(k1, 2.0 / (PI * PI)) < 1e-15);
        assert!((k1 - 0.2026423).abs() < 1e-7);
        let k2 = EggDomain::new(2.0).unwrap().kernel_closed(&DiagonalPoint::real(0.0, 0.0)).unwrap();
        assert!(rel(k2, 1.5 / (PI * PI)) < 1e-15);
        assert!((k2 - 0.1519817).abs() < 1e-7);
    }

    #[test]
    fn closed_form_on_w_zero_slice_collapses() {
        let dom = EggDomain::new(2.0).unwrap();
        for &xr in &[0.1, 0.5, 0.9, 0.999] {
            let k = dom.kernel_closed(&DiagonalPoint::real(xr, 0.0)).unwrap();
            let expect = 1.5 / (PI * PI) * (1.0 - xr * xr).powf(-2.5);
            assert!(rel(k, expect) < 1e-12, "{xr}: {k} vs {expect}");
        }
    }

    #[test]
    fn coefficients_match_closed_constants() {
        let c = EggDomain::new(3.0).unwrap().coefficients();
        assert_eq!(c.c0, 0.0);
        assert!(rel(c.c1, 2.0 / (3.0 * PI * PI)) < 1e-15);
        assert!(c.c2 > 0.0);
    }

    #[test]
    fn boundary_and_exterior_points_rejected() {
        let dom = EggDomain::new(2.0).unwrap();
        assert!(matches!(dom.kernel_closed(&DiagonalPoint::real(1.0, 0.0)), Err(Error::DomainMembership { .. })));
        assert!(matches!(dom.kernel_closed(&DiagonalPoint::real(0.9, 0.9)), Err(Error::DomainMembership { .. })));
        assert!(dom.kernel_series(&DiagonalPoint::real(0.0, 1.0), 1e-8).is_err());
        assert!(ball_kernel(&[Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)]).is_err());
    }

    #[test]
    fn rejects_nonpositive_exponent() {
        assert!(matches!(EggDomain::new(0.0), Err(Error::Parameter(_))));
        assert!(EggDomain::new(-1.0).is_err());
        assert!(EggDomain::new(f64::NAN).is_err());
    }

    #[test]
    fn ball_kernel_values() {
        let o = Complex64::new(0.0, 0.0);
        assert!(rel(ball_kernel(&[o, o]).unwrap(), 2.0 / (PI * PI)) < 1e-15);
        assert!(rel(ball_kernel(&[o]).unwrap(), 1.0 / PI) < 1e-15);
        let h = (0.25f64).sqrt();
        let p = [Complex64::new(h, 0.0), Complex64::new(0.0, h)];
        assert!(rel(ball_kernel(&p).unwrap(), 16.0 / (PI * PI)) < 1e-14);
    }

    #[test]
    fn monomial_norms() {
        let ball = EggDomain::ball();
        assert!(rel(ball.monomial_norm_sq(0, 0), PI * PI / 2.0) < 1e-13);
        let e2 = EggDomain::new(2.0).unwrap();
        assert!(rel(e2.monomial_norm_sq(0, 0), 2.0 * PI * PI / 3.0) < 1e-13);
        assert!(rel(e2.monomial_norm_sq(1, 0), PI * PI / 4.0 * 16.0 / 15.0) < 1e-13);
    }

    #[test]
    fn monomial_norms_agree_with_quadrature() {
        for &s in &[0.5, 1.0, 1.5, 2.0, 3.0, 5.0] {
            let dom = EggDomain::new(s).unwrap();
            for a in 0..6 {
                for b in 0..6 {
                    let closed = dom.monomial_norm_sq(a, b);
                    let quad = dom.monomial_norm_sq_quadrature(a, b, 1e-12);
                    assert!(rel(closed, quad) < 1e-10, "s={s} a={a} b={b}: {closed} vs {quad}");
                }
            }
        }
    }

    #[test]
    fn series_examples() {
        let e2 = EggDomain::new(2.0).unwrap();
        let v = e2.kernel_series_reduced(0.0, 0.0, 1e-10).unwrap();
        assert!(rel(v.value, 1.5 / (PI * PI)) < 1e-12);
        let v = EggDomain::ball().kernel_series_reduced(0.3, 0.4, 1e-8).unwrap();
        assert!(rel(v.value, 2.0 / (PI * PI) * 0.3f64.powi(-3)) < 1e-8);
        let v = e2.kernel_series_reduced(0.5, 0.25, 1e-8).unwrap();
        let c = e2.kernel_closed_reduced(0.5, 0.25).unwrap();
        assert!(rel(v.value, c) < 1e-6);
        assert!(v.tail_bound <= 1e-8 * v.value);
    }

    #[test]
    fn series_tracks_closed_form_for_fractional_exponent() {
        let dom = EggDomain::new(1.5).unwrap();
        for &(x, y) in &[(0.2, 0.3), (0.6, 0.2), (0.05, 0.85)] {
            let v = dom.kernel_series_reduced(x, y, 1e-9).unwrap();
            let c = dom.kernel_closed_reduced(x, y).unwrap();
            assert!(rel(v.value, c) < 1e-8, "({x},{y}) {} vs {c}", v.value);
        }
    }

    // Summing over a first gives C_b = (s/pi^2) p (p+1) y^b (1-x)^{-(p+2)}
    // with p = (b+1)/s.
    fn column_oracle(s: f64, x: f64, y: f64) -> f64 {
        let mut total = 0.0;
        for b in 0..200_000u32 {
            let p = (b as f64 + 1.0) / s;
            let c = ((s / (PI * PI)).ln() + (p * (p + 1.0)).ln() + b as f64 * y.ln() - (p + 2.0) * (1.0 - x).ln()).exp();
            total += c;
            if b > 10 && c < 1e-17 * total {
                break;
            }
        }
        total
    }

    #[test]
    fn series_near_boundary_respects_tail_bound() {
        // Columns here start below the f64 range while their sums are large.
        for (s, x, m) in [(2.0f64, 0.5f64, 0.99f64), (1.5, 0.5, 0.99), (3.0, 0.3, 0.995), (1.0, 0.2, 0.99)] {
            let y = (m - x).powf(1.0 / s);
            let dom = EggDomain::new(s).unwrap();
            let v = dom.kernel_series_reduced(x, y, 1e-10).unwrap();
            let oracle = column_oracle(s, x, y);
            let c = dom.kernel_closed_reduced(x, y).unwrap();
            assert!(rel(c, oracle) < 1e-11, "s={s}: closed {c} vs oracle {oracle}");
            assert!((v.value - oracle).abs() <= v.tail_bound + 1e-12 * oracle, "s={s}: {} vs {oracle}, bound {}", v.value, v.tail_bound);
            assert!(v.tail_bound <= 1e-10 * oracle);
        }
    }

    #[test]
    fn norm_consistency_at_origin() {
        for s in 1..=5 {
            let dom = EggDomain::new(s as f64).unwrap();
            let k = dom.kernel_closed_reduced(0.0, 0.0).unwrap();
            assert!(rel(1.0 / dom.monomial_norm_sq(0, 0), k) < 1e-13);
        }
    }

    #[test]
    fn along_matches_pointwise_away_from_boundary() {
        for &s in &[1.0, 2.0, 2.5] {
            let dom = EggDomain::new(s).unwrap();
            let base = DiagonalPoint::from_reduced(1.0 - 0.3f64.powf(s), 0.3);
            let v = [-0.4, 0.1, -0.2, 0.3];
            for &t in &[0.05, 0.2, 0.5] {
                let a = dom.kernel_closed_along(&base, &v, t).unwrap();
                let b = dom.kernel_closed(&base.offset(&v, t)).unwrap();
                assert!(rel(a, b) < 1e-10, "s={s} t={t}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn along_keeps_precision_near_boundary() {
        let dom = EggDomain::new(2.0).unwrap();
        let base = DiagonalPoint::real(1.0, 0.0);
        let t = 1e-7;
        let k = dom.kernel_closed_along(&base, &[-1.0, 0.0, 0.0, 0.0], t).unwrap();
        let expect = 1.5 / (PI * PI) * (2.0 * t - t * t).powf(-2.5);
        assert!(rel(k, expect) < 1e-14);
        let base = DiagonalPoint::real(0.0, 1.0);
        let k = dom.kernel_closed_along(&base, &[0.0, 0.0, -1.0, 0.0], t).unwrap();
        let d = 2.0 * t - t * t;
        let c = dom.coefficients();
        assert!(rel(k, c.c1 / (d * d) + c.c2 / (d * d * d)) < 1e-14);
    }

    #[test]
    fn ball_consistency() {
        let ball = EggDomain::ball();
        for &(zr, zi, wr, wi) in &[(0.1, 0.2, 0.3, -0.4), (0.7, 0.0, 0.0, 0.7), (-0.5, 0.5, 0.1, 0.1)] {
            let p = DiagonalPoint::from_coords([zr, zi, wr, wi]);
            let e = ball.kernel_closed(&p).unwrap();
            let b = ball_kernel(&[p.z, p.w]).unwrap();
            assert!(rel(e, b) < 1e-12);
        }
    }

    #[test]
    fn grid_stays_in_region() {
        let dom = EggDomain::new(3.0).unwrap();
        let pts = interior_grid(&dom, 20, 0.9);
        assert_eq!(pts.len(), 400);
        assert!(pts.iter().all(|&(x, y)| x + y.powi(3) <= 0.9 + 1e-12));
    }
}
