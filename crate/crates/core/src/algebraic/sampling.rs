//! Sample grids, including exact rational samples for kernels whose values
//! are rational multiples of a fixed constant at suitably chosen points.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{ball_kernel, EggDomain};

/// Sampled points stay in `{x + y^s <= REGION}` (or `|p|^2 <= REGION`).
pub const REGION: f64 = 0.8;

/// Exact counterpart of a grid: `value_float = scale * value`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactSamples {
    pub points: Vec<Vec<BigRational>>,
    pub values: Vec<BigRational>,
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleGrid {
    pub variables: Vec<String>,
    /// Degree of each variable as a polynomial in real coordinates.
    pub weights: Vec<u32>,
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub exact: Option<ExactSamples>,
}

impl SampleGrid {
    /// A float-only grid; rejects non-finite values and ragged points.
    pub fn from_floats(variables: Vec<String>, weights: Vec<u32>, points: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self> {
        let grid = Self { variables, weights, points, values, exact: None };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.variables.len();
        if self.weights.len() != n {
            return Err(Error::Parameter("one weight per variable is required".into()));
        }
        if self.points.len() != self.values.len() {
            return Err(Error::Parameter("points and values differ in length".into()));
        }
        if self.points.iter().any(|p| p.len() != n) {
            return Err(Error::Parameter(format!("every point needs {n} coordinates")));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("sample values must be finite".into()));
        }
        if let Some(e) = &self.exact {
            if e.points.len() != self.points.len() || e.values.len() != self.values.len() {
                return Err(Error::Parameter("exact samples do not match the float grid".into()));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn nvars(&self) -> usize {
        self.variables.len()
    }

    /// Multiplies every value by `lambda`; exact values are scaled by the
    /// exact binary value of `lambda`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::Parameter(format!("scale factor must be positive, got {lambda}")));
        }
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= lambda);
        if let Some(e) = &mut out.exact {
            let q = BigRational::from_float(lambda).expect("finite");
            e.values.iter_mut().for_each(|v| *v = &*v * &q);
        }
        Ok(out)
    }

    /// The sub-grid of the given indices.
    pub fn select(&self, idx: std::ops::Range<usize>) -> Self {
        Self {
            variables: self.variables.clone(),
            weights: self.weights.clone(),
            points: self.points[idx.clone()].to_vec(),
            values: self.values[idx.clone()].to_vec(),
            exact: self.exact.as_ref().map(|e| ExactSamples {
                points: e.points[idx.clone()].to_vec(),
                values: e.values[idx].to_vec(),
                scale: e.scale,
            }),
        }
    }
}

/// Kernels with an exact sampler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelFamily {
    /// Egg kernel in `(x, y) = (|z|^2, |w|^2)`, integer `s`.
    EggReduced { s: u32 },
    /// Egg kernel on the real slice `(Re z, Re w)`; `s` is 1 or 2.
    EggRealSlice { s: u32 },
    /// Ball kernel of C^2 in `(Re z, Im z, Re w, Im w)`.
    BallReal,
    /// The constant function 1 of two variables.
    Constant,
}

/// A rational line `base + tau * dir` in family coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactLine {
    pub base: Vec<BigRational>,
    pub dir: Vec<BigRational>,
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// A random rational in `(lo, hi)` with denominator in `[256, 1024)`.
fn random_rational(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> BigRational {
    let d: i64 = rng.random_range(256..1024);
    let a = (lo * d as f64).floor() as i64 + 1;
    let b = ((hi * d as f64).ceil() as i64 - 1).max(a);
    rat(rng.random_range(a..=b), d)
}

/// Exact `s`-th root of a positive rational, when it is rational.
pub fn exact_root(q: &BigRational, s: u32) -> Option<BigRational> {
    if !q.is_positive() {
        return None;
    }
    let n = q.numer().nth_root(s);
    let d = q.denom().nth_root(s);
    (num_traits::pow(n.clone(), s as usize) == *q.numer() && num_traits::pow(d.clone(), s as usize) == *q.denom())
        .then(|| BigRational::new(n, d))
}

fn qpow(q: &BigRational, e: i32) -> BigRational {
    if e >= 0 {
        num_traits::pow(q.clone(), e as usize)
    } else {
        num_traits::pow(q.recip(), (-e) as usize)
    }
}

/// `pi^2 K` of the egg written through `u = (1-x)^{1/s}`:
/// `(s-1)/s u^{1-2s} (u-y)^{-2} + 2/s u^{2-2s} (u-y)^{-3}`.
fn egg_scaled_value(s: u32, u: &BigRational, y: &BigRational) -> Option<BigRational> {
    let d = u - y;
    if !d.is_positive() || !u.is_positive() {
        return None;
    }
    let si = s as i32;
    let sq = BigRational::from_integer(BigInt::from(s));
    let c1 = (&sq - BigRational::one()) / &sq;
    let c2 = BigRational::from_integer(BigInt::from(2)) / &sq;
    Some(c1 * qpow(u, 1 - 2 * si) * qpow(&d, -2) + c2 * qpow(u, 2 - 2 * si) * qpow(&d, -3))
}

impl KernelFamily {
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelFamily::EggReduced { s: 0 } => Err(Error::Parameter("s must be a positive integer".into())),
            KernelFamily::EggRealSlice { s } if !(s == 1 || s == 2) => {
                Err(Error::Parameter(format!("exact real-slice sampling needs s in {{1, 2}}, got {s}")))
            }
            _ => Ok(()),
        }
    }

    pub fn variables(&self) -> Vec<String> {
        let v: &[&str] = match self {
            KernelFamily::EggReduced { .. } => &["x", "y"],
            KernelFamily::EggRealSlice { .. } => &["re_z", "re_w"],
            KernelFamily::BallReal => &["re_z", "im_z", "re_w", "im_w"],
            KernelFamily::Constant => &["t1", "t2"],
        };
        v.iter().map(|s| s.to_string()).collect()
    }

    pub fn weights(&self) -> Vec<u32> {
        match self {
            KernelFamily::EggReduced { .. } => vec![2, 2],
            _ => vec![1; self.variables().len()],
        }
    }

    /// Float value = `scale() * exact value`.
    pub fn scale(&self) -> f64 {
        match self {
            KernelFamily::Constant => 1.0,
            _ => 1.0 / (PI * PI),
        }
    }

    /// Exact scaled value; `None` if the point is exterior or the value is
    /// not rational at this point.
    pub fn exact_value(&self, p: &[BigRational]) -> Option<BigRational> {
        match *self {
            KernelFamily::EggReduced { s } => {
                let u = exact_root(&(BigRational::one() - &p[0]), s)?;
                egg_scaled_value(s, &u, &p[1])
            }
            KernelFamily::EggRealSlice { s } => {
                let x = &p[0] * &p[0];
                let u = exact_root(&(BigRational::one() - x), s)?;
                egg_scaled_value(s, &u, &(&p[1] * &p[1]))
            }
            KernelFamily::BallReal => {
                let r2: BigRational = p.iter().map(|c| c * c).fold(BigRational::zero(), |a, b| a + b);
                let rho = BigRational::one() - r2;
                rho.is_positive().then(|| BigRational::from_integer(BigInt::from(2)) * qpow(&rho, -3))
            }
            KernelFamily::Constant => Some(BigRational::one()),
        }
    }

    /// Float value from the floating-point kernel implementation.
    pub fn float_value(&self, p: &[f64]) -> Result<f64> {
        match *self {
            KernelFamily::EggReduced { s } => EggDomain::new(s as f64)?.kernel_closed_reduced(p[0], p[1]),
            KernelFamily::EggRealSlice { s } => EggDomain::new(s as f64)?.kernel_closed_reduced(p[0] * p[0], p[1] * p[1]),
            KernelFamily::BallReal => ball_kernel(&[Complex64::new(p[0], p[1]), Complex64::new(p[2], p[3])]),
            KernelFamily::Constant => Ok(1.0),
        }
    }

    fn in_region(&self, p: &[f64]) -> bool {
        match *self {
            KernelFamily::EggReduced { s } => p[0] >= 0.0 && p[1] >= 0.0 && p[0] + p[1].powi(s as i32) <= REGION,
            KernelFamily::EggRealSlice { s } => p[0] * p[0] + (p[1] * p[1]).powi(s as i32) <= REGION,
            KernelFamily::BallReal => p.iter().map(|c| c * c).sum::<f64>() <= REGION,
            KernelFamily::Constant => true,
        }
    }

    /// A point where the exact value is defined.
    fn random_point(&self, rng: &mut ChaCha8Rng) -> Vec<BigRational> {
        loop {
            let p = match *self {
                KernelFamily::EggReduced { s } => {
                    let sf = s as f64;
                    let u = random_rational(rng, (1.0 - REGION + 0.02).powf(1.0 / sf), 0.999);
                    let us = to_f64(&u).powi(s as i32);
                    let ymax = (us - (1.0 - REGION)).max(0.0).powf(1.0 / sf);
                    let y = random_rational(rng, 0.0, ymax);
                    vec![BigRational::one() - num_traits::pow(u, s as usize), y]
                }
                KernelFamily::EggRealSlice { s } => {
                    let a = random_slice_abscissa(s, rng);
                    let cmax = (1.0 - to_f64(&a).powi(2) - (1.0 - REGION)).max(0.0).powf(0.5 / s as f64);
                    let mut c = random_rational(rng, 0.0, cmax);
                    if rng.random_bool(0.5) {
                        c = -c;
                    }
                    vec![a, c]
                }
                KernelFamily::BallReal => (0..4).map(|_| random_rational(rng, -0.62, 0.62)).collect(),
                KernelFamily::Constant => (0..2).map(|_| random_rational(rng, -1.0, 1.0)).collect(),
            };
            let pf: Vec<f64> = p.iter().map(to_f64).collect();
            if self.in_region(&pf) && self.exact_value(&p).is_some() {
                return p;
            }
        }
    }

    fn random_line(&self, rng: &mut ChaCha8Rng) -> ExactLine {
        let base = self.random_point(rng);
        let n = base.len();
        let dir = (0..n)
            .map(|i| {
                // Keep the first coordinate moving so it can parametrize the line.
                if i == 0 {
                    random_rational(rng, 0.6, 1.0)
                } else {
                    random_rational(rng, -0.4, 0.4)
                }
            })
            .collect();
        ExactLine { base, dir }
    }

    /// Parameter of a random point of `line` with a rational exact value.
    fn random_line_param(&self, line: &ExactLine, rng: &mut ChaCha8Rng) -> BigRational {
        match *self {
            KernelFamily::EggReduced { s } => {
                let sf = s as f64;
                let u = random_rational(rng, (1.0 - REGION).powf(1.0 / sf), 0.999);
                let x = BigRational::one() - num_traits::pow(u, s as usize);
                (x - &line.base[0]) / &line.dir[0]
            }
            KernelFamily::EggRealSlice { s } => {
                let a = random_slice_abscissa(s, rng);
                (a - &line.base[0]) / &line.dir[0]
            }
            KernelFamily::BallReal | KernelFamily::Constant => random_rational(rng, -0.5, 0.5),
        }
    }
}

/// `a` in `(-1, 1)` with `sqrt(1 - a^2)` rational when `s = 2`.
fn random_slice_abscissa(s: u32, rng: &mut ChaCha8Rng) -> BigRational {
    let a = if s == 2 {
        // a = (1 - m^2) / (1 + m^2) puts (a, 2m/(1+m^2)) on the unit circle.
        let m = random_rational(rng, 0.2, 1.0);
        let m2 = &m * &m;
        (BigRational::one() - &m2) / (BigRational::one() + m2)
    } else {
        random_rational(rng, 0.0, REGION.sqrt())
    };
    if rng.random_bool(0.5) {
        -a
    } else {
        a
    }
}

fn finish(family: &KernelFamily, variables: Vec<String>, weights: Vec<u32>, exact_pts: Vec<Vec<BigRational>>, float_pts: Vec<Vec<f64>>, exact_vals: Vec<BigRational>, float_vals: Vec<f64>) -> SampleGrid {
    SampleGrid {
        variables,
        weights,
        points: float_pts,
        values: float_vals,
        exact: Some(ExactSamples { points: exact_pts, values: exact_vals, scale: family.scale() }),
    }
}

/// `n` exact samples of `family` in its own coordinates.
pub fn exact_grid(family: KernelFamily, n: usize, seed: u64) -> Result<SampleGrid> {
    family.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut ep, mut fp, mut ev, mut fv) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    while ep.len() < n {
        let p = family.random_point(&mut rng);
        let v = family.exact_value(&p).expect("sampler returns rational points");
        let pf: Vec<f64> = p.iter().map(to_f64).collect();
        fv.push(family.float_value(&pf)?);
        fp.push(pf);
        ev.push(v);
        ep.push(p);
    }
    Ok(finish(&family, family.variables(), family.weights(), ep, fp, ev, fv))
}

/// `n` exact samples along one random line, in the line parameter.
pub fn exact_line_grid(family: KernelFamily, n: usize, seed: u64) -> Result<SampleGrid> {
    family.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_11e5);
    let line = family.random_line(&mut rng);
    let (mut ep, mut fp, mut ev, mut fv) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut attempts = 0usize;
    while ep.len() < n {
        attempts += 1;
        if attempts > 200 * n + 1000 {
            return Err(Error::Precondition("line sampler found too few interior points".into()));
        }
        let tau = family.random_line_param(&line, &mut rng);
        let p: Vec<BigRational> = line.base.iter().zip(&line.dir).map(|(b, d)| b + d * &tau).collect();
        let pf: Vec<f64> = p.iter().map(to_f64).collect();
        if !family.in_region(&pf) {
            continue;
        }
        let Some(v) = family.exact_value(&p) else { continue };
        fv.push(family.float_value(&pf)?);
        fp.push(vec![to_f64(&tau)]);
        ev.push(v);
        ep.push(vec![tau]);
    }
    Ok(finish(&family, vec!["tau".into()], vec![1], ep, fp, ev, fv))
}
