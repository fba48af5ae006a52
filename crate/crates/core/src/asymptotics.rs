//! Kernel blow-up along rays that meet the boundary transversally.
//!
//! Near a boundary point of type `r` the diagonal kernel behaves like
//! `t^{-2-2/r} (a_0 + a_1 t^{1/r} + ...)` along a transversal ray, so the
//! log-log slope gives `r` and a fractional-power regression gives the `a_j`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{DiagonalPoint, EggDomain};
use crate::linalg;

/// Largest scaled condition number accepted by the regressions here.
pub const MAX_CONDITION: f64 = 1e15;

/// A diagonal kernel together with the defining function of its domain
/// (positive inside).
pub trait DiagonalKernel: Sync {
    fn kernel(&self, p: &DiagonalPoint) -> Result<f64>;
    fn defining(&self, p: &DiagonalPoint) -> f64;

    /// Kernel at `base + t v`; implementations may use the ray structure to
    /// avoid cancellation near the boundary.
    fn kernel_along(&self, base: &DiagonalPoint, v: &[f64; 4], t: f64) -> Result<f64> {
        self.kernel(&base.offset(v, t))
    }
}

impl DiagonalKernel for EggDomain {
    fn kernel(&self, p: &DiagonalPoint) -> Result<f64> {
        self.kernel_closed(p)
    }

    fn kernel_along(&self, base: &DiagonalPoint, v: &[f64; 4], t: f64) -> Result<f64> {
        self.kernel_closed_along(base, v, t)
    }

    fn defining(&self, p: &DiagonalPoint) -> f64 {
        EggDomain::defining(self, p)
    }
}

/// Directional derivative of the defining function at `p` along `v`.
pub fn directional_derivative<K: DiagonalKernel + ?Sized>(k: &K, p: &DiagonalPoint, v: &[f64; 4]) -> f64 {
    let h = 1e-6;
    (k.defining(&p.offset(v, h)) - k.defining(&p.offset(v, -h))) / (2.0 * h)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryRay {
    pub base: DiagonalPoint,
    /// Real direction `(Re z, Im z, Re w, Im w)`.
    pub direction: [f64; 4],
    pub t_min: f64,
    pub t_max: f64,
}

impl BoundaryRay {
    /// Validates the base point, transversality and interiority at the ends
    /// of the parameter range.
    pub fn new<K: DiagonalKernel + ?Sized>(
        k: &K,
        base: DiagonalPoint,
        direction: [f64; 4],
        t_min: f64,
        t_max: f64,
    ) -> Result<Self> {
        if !(t_min > 0.0 && t_min < t_max) {
            return Err(Error::Parameter(format!("need 0 < t_min < t_max, got ({t_min}, {t_max})")));
        }
        let rho = k.defining(&base);
        if rho.abs() > 1e-12 {
            return Err(Error::Precondition(format!("base point is off the boundary: defining function {rho:.3e}")));
        }
        let vnorm = direction.iter().map(|c| c * c).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            return Err(Error::Parameter("ray direction is zero".into()));
        }
        let dd = directional_derivative(k, &base, &direction);
        if dd.abs() <= 1e-6 * vnorm {
            return Err(Error::Precondition(format!(
                "direction is tangential: directional derivative {dd:.3e}"
            )));
        }
        if dd < 0.0 {
            return Err(Error::Precondition("direction points out of the domain".into()));
        }
        for t in [t_min, t_max] {
            let value = k.defining(&base.offset(&direction, t));
            if value <= 0.0 {
                return Err(Error::DomainMembership { value });
            }
        }
        Ok(Self { base, direction, t_min, t_max })
    }

    pub fn point(&self, t: f64) -> DiagonalPoint {
        self.base.offset(&self.direction, t)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelRaySamples {
    pub ray: BoundaryRay,
    /// Strictly decreasing from `t_max` to `t_min`.
    pub t_values: Vec<f64>,
    pub k_values: Vec<f64>,
}

impl KernelRaySamples {
    /// True when `K` increases as `t` decreases.
    pub fn is_monotone(&self) -> bool {
        self.k_values.windows(2).all(|w| w[1] > w[0])
    }
}

/// Geometric grid of `n` points from `t_max` down to `t_min`.
pub fn geometric_grid(t_min: f64, t_max: f64, n: usize) -> Vec<f64> {
    let ratio = (t_min / t_max).ln() / (n - 1) as f64;
    (0..n)
        .map(|i| if i + 1 == n { t_min } else { t_max * (ratio * i as f64).exp() })
        .collect()
}

pub fn sample_along_ray<K: DiagonalKernel + ?Sized>(k: &K, ray: &BoundaryRay, n_points: usize) -> Result<KernelRaySamples> {
    if n_points < 8 {
        return Err(Error::Parameter(format!("need at least 8 ray samples, got {n_points}")));
    }
    let t_values = geometric_grid(ray.t_min, ray.t_max, n_points);
    let k_values = t_values
        .iter()
        .map(|&t| k.kernel_along(&ray.base, &ray.direction, t))
        .collect::<Result<Vec<_>>>()?;
    if let Some(bad) = k_values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::Precondition(format!("kernel value {bad} is not positive and finite")));
    }
    Ok(KernelRaySamples { ray: *ray, t_values, k_values })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentFit {
    pub slope: f64,
    /// Standard error of the slope.
    pub slope_stderr: f64,
    pub r_estimate: f64,
    /// RMS residual in `log K`.
    pub residual: f64,
    pub c0_estimate: f64,
    /// Coefficient `b` of the `t` column.
    pub smooth: f64,
}

impl ExponentFit {
    /// Fitted `c0 t^m e^{b t}`.
    pub fn predict(&self, t: f64) -> f64 {
        self.c0_estimate * t.powf(self.slope) * (self.smooth * t).exp()
    }
}

/// Fits `log K = log c0 + m log t + b t`.
///
/// The linear-in-`t` column absorbs the smooth factor that multiplies the
/// leading power; without it the slope over `t <= 0.1` is biased by about
/// `1e-2`, which is enough to move `r = -2/(m+2)` off its integer for `r >= 8`.
pub fn fit_blowup_exponent(samples: &KernelRaySamples) -> Result<ExponentFit> {
    let n = samples.t_values.len();
    if n < 8 {
        return Err(Error::Parameter(format!("need at least 8 samples, got {n}")));
    }
    let tmax = samples.t_values.iter().copied().fold(f64::MIN, f64::max);
    let tmin = samples.t_values.iter().copied().fold(f64::MAX, f64::min);
    if tmax / tmin < 10.0 {
        return Err(Error::Parameter("samples must span at least one decade in t".into()));
    }
    let a = DMatrix::from_fn(n, 3, |i, j| {
        let t = samples.t_values[i];
        match j {
            0 => 1.0,
            1 => t.ln(),
            _ => t,
        }
    });
    let b = DVector::from_iterator(n, samples.k_values.iter().map(|k| k.ln()));
    let sol = linalg::lstsq(&a, &b, MAX_CONDITION)?;
    let slope = sol.coeffs[1];
    let sse = sol.residuals.norm_squared();
    let residual = (sse / n as f64).sqrt();
    let slope_stderr = slope_standard_error(&a, sse, n);
    if slope >= -2.0 || !slope.is_finite() {
        return Err(Error::FitInconsistency {
            message: format!("slope {slope} admits no finite type"),
            slope,
            residual,
        });
    }
    Ok(ExponentFit {
        slope,
        slope_stderr,
        r_estimate: -2.0 / (slope + 2.0),
        residual,
        c0_estimate: sol.coeffs[0].exp(),
        smooth: sol.coeffs[2],
    })
}

fn slope_standard_error(a: &DMatrix<f64>, sse: f64, n: usize) -> f64 {
    let dof = n.saturating_sub(a.ncols()).max(1) as f64;
    match (a.transpose() * a).try_inverse() {
        Some(inv) => (sse / dof * inv[(1, 1)]).max(0.0).sqrt(),
        None => f64::INFINITY,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PuiseuxFit {
    pub r: u32,
    /// Coefficients of `t^{j/r}`, `j = 0..=J`.
    pub a: Vec<f64>,
    pub b_log: Option<f64>,
    /// RMS of the relative residual in `K t^{2+2/r}`.
    pub residual: f64,
    pub condition: f64,
}

/// Regresses `g = K t^{2+2/r}` on `t^{j/r}`, `j = 0..=J`, plus
/// `t^{2+2/r} log t` when `include_log`.
pub fn puiseux_fit(samples: &KernelRaySamples, r: u32, big_j: usize, include_log: bool) -> Result<PuiseuxFit> {
    if r == 0 {
        return Err(Error::Parameter("type r must be positive".into()));
    }
    let n = samples.t_values.len();
    if big_j + 2 >= n {
        return Err(Error::Parameter(format!("J = {big_j} needs more than {} samples", big_j + 2)));
    }
    let rf = r as f64;
    let lead = 2.0 + 2.0 / rf;
    let g: Vec<f64> = samples
        .t_values
        .iter()
        .zip(&samples.k_values)
        .map(|(t, k)| k * t.powf(lead))
        .collect();
    let extra: Vec<Box<dyn Fn(f64) -> f64>> = if include_log {
        vec![Box::new(move |t: f64| t.powf(lead) * t.ln())]
    } else {
        Vec::new()
    };
    let fit = fit_fractional_powers(&samples.t_values, &g, r, big_j, &extra)?;
    Ok(PuiseuxFit {
        r,
        a: fit.powers,
        b_log: fit.extra.first().copied(),
        residual: fit.residual,
        condition: fit.condition,
    })
}

/// Result of [`fit_fractional_powers`].
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalFit {
    pub powers: Vec<f64>,
    pub extra: Vec<f64>,
    pub residual: f64,
    pub condition: f64,
}

/// Least squares of `g(t)` on `t^{j/r}` for `j = 0..=J` and any extra
/// regressor functions. The residual is RMS relative to `max |g|`.
pub fn fit_fractional_powers(
    t: &[f64],
    g: &[f64],
    r: u32,
    big_j: usize,
    extra: &[Box<dyn Fn(f64) -> f64>],
) -> Result<FractionalFit> {
    let n = t.len();
    let ncols = big_j + 1 + extra.len();
    if g.len() != n || n < ncols {
        return Err(Error::Parameter(format!("{n} samples cannot determine {ncols} coefficients")));
    }
    let rf = r as f64;
    let a = DMatrix::from_fn(n, ncols, |i, j| {
        if j <= big_j {
            t[i].powf(j as f64 / rf)
        } else {
            extra[j - big_j - 1](t[i])
        }
    });
    let b = DVector::from_column_slice(g);
    let sol = linalg::lstsq(&a, &b, MAX_CONDITION)?;
    let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let residual = if gmax > 0.0 {
        (sol.residuals.norm_squared() / n as f64).sqrt() / gmax
    } else {
        sol.residuals.amax()
    };
    let coeffs: Vec<f64> = sol.coeffs.iter().copied().collect();
    Ok(FractionalFit {
        powers: coeffs[..=big_j].to_vec(),
        extra: coeffs[big_j + 1..].to_vec(),
        residual,
        condition: sol.condition,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoteConfig {
    pub t_min: f64,
    pub t_max: f64,
    pub n_points: usize,
    pub snap_tol: f64,
}

impl Default for AsymptoteConfig {
    fn default() -> Self {
        Self { t_min: 1e-4, t_max: 1e-1, n_points: 32, snap_tol: 0.1 }
    }
}

/// Fit along one direction, as written to the report.
#[derive(Debug, Clone, Serialize)]
pub struct DirectionFit {
    pub direction: [f64; 4],
    pub fit: ExponentFit,
}

#[derive(Debug, Clone, Serialize)]
pub struct TypeEstimate {
    pub r: u32,
    pub fits: Vec<DirectionFit>,
}

/// Snaps `r_estimate` to a positive integer within `tol`.
pub fn snap_type(r_estimate: f64, tol: f64) -> Option<u32> {
    let r = r_estimate.round();
    ((r_estimate - r).abs() < tol && r >= 1.0).then_some(r as u32)
}

/// Estimated type at `xi`: every direction must snap to the same integer.
pub fn estimate_type<K: DiagonalKernel + ?Sized>(
    k: &K,
    xi: DiagonalPoint,
    directions: &[[f64; 4]],
    config: &AsymptoteConfig,
) -> Result<TypeEstimate> {
    if directions.is_empty() {
        return Err(Error::Parameter("at least one direction is required".into()));
    }
    let mut fits = Vec::with_capacity(directions.len());
    for &v in directions {
        let ray = BoundaryRay::new(k, xi, v, config.t_min, config.t_max)?;
        let samples = sample_along_ray(k, &ray, config.n_points)?;
        fits.push(DirectionFit { direction: v, fit: fit_blowup_exponent(&samples)? });
    }
    let snapped: Vec<Option<u32>> = fits.iter().map(|f| snap_type(f.fit.r_estimate, config.snap_tol)).collect();
    let describe = || {
        fits.iter()
            .map(|f| format!("{:?}: r = {:.4}", f.direction, f.fit.r_estimate))
            .collect::<Vec<_>>()
            .join("; ")
    };
    let Some(first) = snapped[0] else {
        return Err(Error::Ambiguity(describe()));
    };
    if snapped.iter().any(|s| *s != Some(first)) {
        return Err(Error::Ambiguity(describe()));
    }
    Ok(TypeEstimate { r: first, fits })
}

/// Fit report for one ray.
#[derive(Debug, Clone, Serialize)]
pub struct RayReport {
    pub xi: [f64; 4],
    pub direction: [f64; 4],
    pub m: f64,
    pub r_estimate: f64,
    pub residual: f64,
    pub a: Vec<f64>,
    pub b_log: Option<f64>,
}

/// Exponent fit plus a Puiseux fit at the snapped type.
pub fn ray_report(samples: &KernelRaySamples, big_j: usize, include_log: bool, snap_tol: f64) -> Result<RayReport> {
    let fit = fit_blowup_exponent(samples)?;
    let r = snap_type(fit.r_estimate, snap_tol)
        .ok_or_else(|| Error::Ambiguity(format!("r estimate {:.4} is not near an integer", fit.r_estimate)))?;
    let p = puiseux_fit(samples, r, big_j, include_log)?;
    Ok(RayReport {
        xi: samples.ray.base.coords(),
        direction: samples.ray.direction,
        m: fit.slope,
        r_estimate: fit.r_estimate,
        residual: fit.residual,
        a: p.a,
        b_log: p.b_log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const INWARD_Z: [f64; 4] = [-1.0, 0.0, 0.0, 0.0];
    const INWARD_W: [f64; 4] = [0.0, 0.0, -1.0, 0.0];

    fn egg(s: f64) -> EggDomain {
        EggDomain::new(s).unwrap()
    }

    fn ray(k: &EggDomain, xi: DiagonalPoint, v: [f64; 4], lo: f64, hi: f64) -> BoundaryRay {
        BoundaryRay::new(k, xi, v, lo, hi).unwrap()
    }

    #[test]
    fn ball_samples_match_closed_form() {
        let ball = EggDomain::ball();
        let r = ray(&ball, DiagonalPoint::real(1.0, 0.0), INWARD_Z, 1e-4, 1e-1);
        let s = sample_along_ray(&ball, &r, 32).unwrap();
        assert!(s.is_monotone());
        assert!(s.t_values.windows(2).all(|w| w[1] < w[0]));
        for (t, k) in s.t_values.iter().zip(&s.k_values) {
            let expect = 2.0 / (PI * PI) * (2.0 * t - t * t).powi(-3);
            assert!((k - expect).abs() / expect < 1e-9);
        }
    }

    #[test]
    fn egg_samples_match_w_zero_reduction() {
        let e = egg(2.0);
        let r = ray(&e, DiagonalPoint::real(1.0, 0.0), INWARD_Z, 1e-4, 1e-1);
        let s = sample_along_ray(&e, &r, 32).unwrap();
        for (t, k) in s.t_values.iter().zip(&s.k_values) {
            let expect = 1.5 / (PI * PI) * (2.0 * t - t * t).powf(-2.5);
            assert!((k - expect).abs() / expect < 1e-9);
        }
    }

    #[test]
    fn tangential_direction_rejected() {
        let e = egg(2.0);
        let err = BoundaryRay::new(&e, DiagonalPoint::real(1.0, 0.0), [0.0, 1.0, 0.0, 0.0], 1e-4, 1e-1);
        assert!(matches!(err, Err(Error::Precondition(_))));
        let err = BoundaryRay::new(&e, DiagonalPoint::real(0.5, 0.0), INWARD_Z, 1e-4, 1e-1);
        assert!(matches!(err, Err(Error::Precondition(_))));
    }

    #[test]
    fn exponent_examples() {
        let e = egg(2.0);
        let s = sample_along_ray(&e, &ray(&e, DiagonalPoint::real(1.0, 0.0), INWARD_Z, 1e-4, 1e-1), 32).unwrap();
        let f = fit_blowup_exponent(&s).unwrap();
        assert!((f.slope + 2.5).abs() < 1e-3, "{f:?}");
        assert!((f.r_estimate - 4.0).abs() < 0.05);
        assert!(f.c0_estimate > 0.0);

        let s = sample_along_ray(&e, &ray(&e, DiagonalPoint::real(0.0, 1.0), INWARD_W, 1e-4, 1e-1), 32).unwrap();
        let f = fit_blowup_exponent(&s).unwrap();
        assert!((f.slope + 3.0).abs() < 1e-2, "{f:?}");
    }

    #[test]
    fn flat_samples_are_inconsistent() {
        let e = egg(2.0);
        let mut s = sample_along_ray(&e, &ray(&e, DiagonalPoint::real(1.0, 0.0), INWARD_Z, 1e-4, 1e-1), 16).unwrap();
        for (k, t) in s.k_values.iter_mut().zip(&s.t_values) {
            *k = t.powf(-1.5);
        }
        assert!(matches!(fit_blowup_exponent(&s), Err(Error::FitInconsistency { .. })));
    }

    #[test]
    fn puiseux_examples() {
        let e = egg(2.0);
        let s = sample_along_ray(&e, &ray(&e, DiagonalPoint::real(1.0, 0.0), INWARD_Z, 1e-6, 1e-2), 48).unwrap();
        let p = puiseux_fit(&s, 4, 12, false).unwrap();
        let a0 = 1.5 / (PI * PI) * 2f64.powf(-2.5);
        assert!((p.a[0] - a0).abs() / a0 < 1e-6, "{:?}", p.a);
        for j in 1..=3 {
            assert!(p.a[j].abs() / a0 < 1e-4, "a{j} = {}", p.a[j]);
        }

        let ball = EggDomain::ball();
        let s = sample_along_ray(&ball, &ray(&ball, DiagonalPoint::real(1.0, 0.0), INWARD_Z, 1e-6, 1e-2), 48).unwrap();
        let p = puiseux_fit(&s, 2, 7, false).unwrap();
        let a0 = 2.0 / (PI * PI) / 8.0;
        assert!((p.a[0] - a0).abs() / a0 < 1e-6);
        assert!(p.a[1].abs() / a0 < 1e-4);
    }

    #[test]
    fn log_coefficient_vanishes_for_egg() {
        let e = egg(2.0);
        let s = sample_along_ray(&e, &ray(&e, DiagonalPoint::real(1.0, 0.0), INWARD_Z, 1e-6, 1e-2), 48).unwrap();
        let p = puiseux_fit(&s, 4, 11, true).unwrap();
        let b = p.b_log.unwrap();
        // The log column is nearly collinear with the power columns over a
        // finite range, so compare its largest contribution with g itself.
        let t: f64 = 1e-2;
        let contribution = (b * t.powf(2.5) * t.ln()).abs();
        assert!(contribution < 1e-4 * p.a[0], "b = {b}, a0 = {}", p.a[0]);
        assert!(p.residual < 1e-8);
    }

    #[test]
    fn puiseux_rejects_too_many_terms() {
        let e = egg(2.0);
        let s = sample_along_ray(&e, &ray(&e, DiagonalPoint::real(1.0, 0.0), INWARD_Z, 1e-4, 1e-1), 10).unwrap();
        assert!(matches!(puiseux_fit(&s, 4, 8, false), Err(Error::Parameter(_))));
    }

    #[test]
    fn type_examples() {
        let cfg = AsymptoteConfig::default();
        let e3 = egg(3.0);
        let t = estimate_type(&e3, DiagonalPoint::real(1.0, 0.0), &[INWARD_Z], &cfg).unwrap();
        assert_eq!(t.r, 6);
        let t = estimate_type(&e3, DiagonalPoint::real(0.0, 1.0), &[INWARD_W], &cfg).unwrap();
        assert_eq!(t.r, 2);
        let t = estimate_type(&EggDomain::ball(), DiagonalPoint::real(0.0, 1.0), &[INWARD_W], &cfg).unwrap();
        assert_eq!(t.r, 2);
    }

    #[test]
    fn type_is_direction_independent() {
        let cfg = AsymptoteConfig::default();
        for s in 1..=4 {
            let e = egg(s as f64);
            let dirs = [INWARD_Z, [-1.0, 0.0, 0.3, 0.0], [-1.0, 0.5, 0.0, -0.2]];
            let t = estimate_type(&e, DiagonalPoint::real(1.0, 0.0), &dirs, &cfg).unwrap();
            assert_eq!(t.r, 2 * s, "{t:?}");
        }
    }

    #[test]
    fn snapping() {
        assert_eq!(snap_type(3.95, 0.1), Some(4));
        assert_eq!(snap_type(3.5, 0.1), None);
        assert_eq!(snap_type(0.04, 0.1), None);
    }
}
