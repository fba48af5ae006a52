//! Boundary type in C^2: an exact rule for eggs, the Levi form at strongly
//! pseudoconvex points, and a brute-force order-of-contact search along
//! polynomial holomorphic curves.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::ellipsoid::EllipsoidParams;
use crate::error::{Error, Result};
use crate::kernel::DiagonalPoint;

/// Coefficients below this are treated as zero in vanishing orders.
pub const ZERO_THRESHOLD: f64 = 1e-10;

const C0: Complex64 = Complex64::new(0.0, 0.0);

/// A real-valued polynomial in `(z, z̄, w, w̄)`; keys are exponents
/// `[deg z, deg z̄, deg w, deg w̄]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RealPolynomial {
    pub terms: BTreeMap<[u32; 4], Complex64>,
}

impl RealPolynomial {
    pub fn add_term(&mut self, e: [u32; 4], c: Complex64) {
        *self.terms.entry(e).or_insert(C0) += c;
    }

    /// `1 - |z|^2 - |w|^{2s}`.
    pub fn egg(s: u32) -> Self {
        let mut p = Self::default();
        p.add_term([0, 0, 0, 0], Complex64::new(1.0, 0.0));
        p.add_term([1, 1, 0, 0], Complex64::new(-1.0, 0.0));
        p.add_term([0, 0, s, s], Complex64::new(-1.0, 0.0));
        p
    }

    /// `1 - |z|^2 - |w|^2 - sum_j A_j (z_j^2 + z̄_j^2)` for `n = 2`.
    pub fn ellipsoid(params: &EllipsoidParams) -> Result<Self> {
        if params.dim() != 2 {
            return Err(Error::UnsupportedFamily(format!(
                "contact search works in C^2, got an ellipsoid in C^{}",
                params.dim()
            )));
        }
        let a = params.a();
        let mut p = Self::default();
        p.add_term([0, 0, 0, 0], Complex64::new(1.0, 0.0));
        p.add_term([1, 1, 0, 0], Complex64::new(-1.0, 0.0));
        p.add_term([0, 0, 1, 1], Complex64::new(-1.0, 0.0));
        p.add_term([2, 0, 0, 0], Complex64::new(-a[0], 0.0));
        p.add_term([0, 2, 0, 0], Complex64::new(-a[0], 0.0));
        p.add_term([0, 0, 2, 0], Complex64::new(-a[1], 0.0));
        p.add_term([0, 0, 0, 2], Complex64::new(-a[1], 0.0));
        Ok(p)
    }

    pub fn eval(&self, p: &DiagonalPoint) -> Complex64 {
        let vars = [p.z, p.z.conj(), p.w, p.w.conj()];
        self.terms
            .iter()
            .map(|(e, c)| c * (0..4).fold(Complex64::new(1.0, 0.0), |acc, k| acc * vars[k].powu(e[k])))
            .sum()
    }

    /// Derivative in variable `k` of `(z, z̄, w, w̄)`, treated as independent.
    pub fn derivative(&self, k: usize) -> Self {
        let mut out = Self::default();
        for (e, c) in &self.terms {
            if e[k] > 0 {
                let mut e2 = *e;
                e2[k] -= 1;
                out.add_term(e2, c * e[k] as f64);
            }
        }
        out
    }
}

/// Polynomial in `(t, t̄)`, dense by degree.
#[derive(Debug, Clone, PartialEq)]
struct BiPoly {
    c: Vec<Vec<Complex64>>,
}

impl BiPoly {
    fn constant(v: Complex64) -> Self {
        Self { c: vec![vec![v]] }
    }

    fn from_t(coeffs: &[Complex64], conj: bool) -> Self {
        let n = coeffs.len();
        let mut c = if conj { vec![vec![C0; n]; 1] } else { vec![vec![C0; 1]; n] };
        for (k, &v) in coeffs.iter().enumerate() {
            if conj {
                c[0][k] = v.conj();
            } else {
                c[k][0] = v;
            }
        }
        Self { c }
    }

    fn mul(&self, o: &Self) -> Self {
        let (p1, q1) = (self.c.len(), self.c[0].len());
        let (p2, q2) = (o.c.len(), o.c[0].len());
        let mut c = vec![vec![C0; q1 + q2 - 1]; p1 + p2 - 1];
        for i in 0..p1 {
            for j in 0..q1 {
                let a = self.c[i][j];
                if a == C0 {
                    continue;
                }
                for k in 0..p2 {
                    for l in 0..q2 {
                        c[i + k][j + l] += a * o.c[k][l];
                    }
                }
            }
        }
        Self { c }
    }

    fn add_scaled(&mut self, o: &Self, s: Complex64) {
        let p = self.c.len().max(o.c.len());
        let q = self.c[0].len().max(o.c[0].len());
        for row in &mut self.c {
            row.resize(q, C0);
        }
        self.c.resize(p, vec![C0; q]);
        for (i, row) in o.c.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                self.c[i][j] += s * v;
            }
        }
    }

    fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::constant(Complex64::new(1.0, 0.0)), |acc, _| acc.mul(self))
    }

    /// Lowest `p + q` with a coefficient above the threshold.
    fn order(&self, scale: f64) -> Option<u32> {
        let mut best: Option<u32> = None;
        for (i, row) in self.c.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if v.norm() > ZERO_THRESHOLD * scale {
                    let d = (i + j) as u32;
                    best = Some(best.map_or(d, |b| b.min(d)));
                }
            }
        }
        best
    }
}

/// `t ↦ ξ + (γ1(t), γ2(t))` with `γk(0) = 0`; `gamma[k][m]` is the
/// coefficient of `t^{m+1}` in component `k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolomorphicCurve {
    pub base: DiagonalPoint,
    pub gamma: [Vec<Complex64>; 2],
}

impl HolomorphicCurve {
    /// Least degree with a nonzero coefficient over both components.
    pub fn order(&self) -> Option<u32> {
        self.gamma
            .iter()
            .filter_map(|g| g.iter().position(|c| c.norm() > 0.0).map(|m| m as u32 + 1))
            .min()
    }

    fn component(&self, k: usize) -> Vec<Complex64> {
        let b = if k == 0 { self.base.z } else { self.base.w };
        let mut v = vec![b];
        v.extend_from_slice(&self.gamma[k]);
        v
    }
}

/// `ord_0(ρ∘γ)`, or `None` when `ρ∘γ` vanishes identically.
pub fn composition_order(rho: &RealPolynomial, curve: &HolomorphicCurve) -> Option<u32> {
    let z = curve.component(0);
    let w = curve.component(1);
    let factors = [BiPoly::from_t(&z, false), BiPoly::from_t(&z, true), BiPoly::from_t(&w, false), BiPoly::from_t(&w, true)];
    let mut total = BiPoly::constant(C0);
    let mut scale = 0.0f64;
    for (e, c) in &rho.terms {
        let mut term = BiPoly::constant(Complex64::new(1.0, 0.0));
        for k in 0..4 {
            if e[k] > 0 {
                term = term.mul(&factors[k].pow(e[k]));
            }
        }
        scale = scale.max(c.norm());
        total.add_scaled(&term, *c);
    }
    total.order(scale.max(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContactBound {
    /// Best ratio `ord(ρ∘γ) / ord(γ)` as numerator and denominator.
    pub numerator: u32,
    pub denominator: u32,
    pub infinite: bool,
    pub witness: Option<HolomorphicCurve>,
    pub curves_tried: usize,
}

impl ContactBound {
    pub fn value(&self) -> f64 {
        if self.infinite {
            f64::INFINITY
        } else {
            self.numerator as f64 / self.denominator as f64
        }
    }
}

fn coefficient_grid(g: i32) -> Vec<Complex64> {
    let mut v = Vec::new();
    for a in -g..=g {
        for b in -g..=g {
            v.push(Complex64::new(a as f64, b as f64));
        }
    }
    v
}

fn monomial_curve(base: DiagonalPoint, c1: Complex64, k1: usize, c2: Complex64, k2: usize) -> HolomorphicCurve {
    let mut g1 = vec![C0; k1];
    let mut g2 = vec![C0; k2];
    g1[k1 - 1] = c1;
    g2[k2 - 1] = c2;
    HolomorphicCurve { base, gamma: [g1, g2] }
}

/// Curves tried by [`contact_order_lower_bound`]: monomial components
/// `(c1 t^k1, c2 t^k2)` and first components `c1 t + c1' t^2`, all with
/// coefficients `a + bi`, `|a|, |b| <= max_coeff_grid`.
pub fn curve_family(base: DiagonalPoint, max_curve_degree: usize, max_coeff_grid: i32) -> Vec<HolomorphicCurve> {
    let grid = coefficient_grid(max_coeff_grid);
    let mut out = Vec::new();
    for k1 in 1..=max_curve_degree {
        for k2 in 1..=max_curve_degree {
            for &c1 in &grid {
                for &c2 in &grid {
                    if c1 == C0 && c2 == C0 {
                        continue;
                    }
                    out.push(monomial_curve(base, c1, k1, c2, k2));
                }
            }
        }
    }
    if max_curve_degree >= 2 {
        for &a in &grid {
            for &b in &grid {
                for &c in &grid {
                    if a == C0 || b == C0 {
                        continue;
                    }
                    out.push(HolomorphicCurve { base, gamma: [vec![a, b], vec![c]] });
                }
            }
        }
    }
    out
}

/// Largest `ord(ρ∘γ)/ord(γ)` over [`curve_family`]; a certified lower bound
/// on the order of contact at `xi`.
pub fn contact_order_lower_bound(rho: &RealPolynomial, xi: DiagonalPoint, max_curve_degree: usize, max_coeff_grid: i32) -> Result<ContactBound> {
    if max_curve_degree < 1 || max_coeff_grid < 1 {
        return Err(Error::Parameter("curve search budgets must be at least 1".into()));
    }
    let v = rho.eval(&xi);
    if v.norm() > 1e-12 {
        return Err(Error::Precondition(format!("point is off the boundary: defining function {:.3e}", v.re)));
    }
    let family = curve_family(xi, max_curve_degree, max_coeff_grid);
    let tried = family.len();
    let results: Vec<(Option<u32>, u32, usize)> = family
        .par_iter()
        .enumerate()
        .map(|(i, c)| (composition_order(rho, c), c.order().expect("nonconstant"), i))
        .collect();
    if let Some(&(_, _, i)) = results.iter().find(|r| r.0.is_none()) {
        return Ok(ContactBound { numerator: 0, denominator: 1, infinite: true, witness: Some(family[i].clone()), curves_tried: tried });
    }
    // Largest ratio; ties keep the earliest curve.
    let mut best = (0u32, 1u32, usize::MAX);
    for &(o, d, i) in &results {
        let o = o.expect("finite");
        if (o as u64) * (best.1 as u64) > (best.0 as u64) * (d as u64) {
            best = (o, d, i);
        }
    }
    let g = gcd(best.0, best.1);
    Ok(ContactBound {
        numerator: best.0 / g,
        denominator: best.1 / g,
        infinite: false,
        witness: family.get(best.2).cloned(),
        curves_tried: tried,
    })
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

/// Levi form of `ρ` on the complex tangent line at `p`, for `{ρ > 0}`;
/// negative values mean strong pseudoconvexity there.
pub fn levi_form(rho: &RealPolynomial, p: &DiagonalPoint) -> f64 {
    let rz = rho.derivative(0).eval(p);
    let rw = rho.derivative(2).eval(p);
    // Tangent vector v with rz v1 + rw v2 = 0.
    let v = [-rw, rz];
    let mixed = |j: usize, k: usize| rho.derivative(2 * j).derivative(2 * k + 1).eval(p);
    let mut l = C0;
    for j in 0..2 {
        for k in 0..2 {
            l += mixed(j, k) * v[j] * v[k].conj();
        }
    }
    let n2 = v[0].norm_sqr() + v[1].norm_sqr();
    if n2 == 0.0 {
        return f64::NAN;
    }
    l.re / n2
}

/// Type of the egg boundary at `xi`: `2s` on `{w = 0}`, `2` elsewhere.
pub fn egg_type(s: u32, xi: &DiagonalPoint) -> Result<u32> {
    if s == 0 {
        return Err(Error::Parameter("s must be a positive integer".into()));
    }
    let rho = 1.0 - xi.x() - xi.y().powi(s as i32);
    if rho.abs() > 1e-12 {
        return Err(Error::Precondition(format!("point is off the boundary: defining function {rho:.3e}")));
    }
    Ok(if xi.w.norm() == 0.0 { 2 * s } else { 2 })
}

#[derive(Debug, Clone, PartialEq)]
pub enum DomainDescriptor {
    Egg { s: f64 },
    Ellipsoid(EllipsoidParams),
    Polynomial(RealPolynomial),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TypeMethod {
    ExactRule,
    Levi,
    CurveSearch,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypePoint {
    pub xi: [f64; 4],
    pub r: u32,
    pub method: TypeMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeReport {
    pub points: Vec<TypePoint>,
    pub max_type: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveBudget {
    pub max_curve_degree: usize,
    pub max_coeff_grid: i32,
}

impl Default for CurveBudget {
    fn default() -> Self {
        Self { max_curve_degree: 6, max_coeff_grid: 1 }
    }
}

/// Type at each probe: the exact rule for eggs, otherwise the Levi form and,
/// where it degenerates, the curve search (reported as its floor).
pub fn type_report(domain: &DomainDescriptor, probes: &[DiagonalPoint], budget: CurveBudget) -> Result<TypeReport> {
    let mut points = Vec::with_capacity(probes.len());
    for p in probes {
        let (r, method) = match domain {
            DomainDescriptor::Egg { s } => {
                if s.fract() != 0.0 || *s < 1.0 {
                    return Err(Error::UnsupportedFamily(format!("egg types need a positive integer s, got {s}")));
                }
                (egg_type(*s as u32, p)?, TypeMethod::ExactRule)
            }
            DomainDescriptor::Ellipsoid(params) => polynomial_type(&RealPolynomial::ellipsoid(params)?, p, budget)?,
            DomainDescriptor::Polynomial(rho) => polynomial_type(rho, p, budget)?,
        };
        points.push(TypePoint { xi: p.coords(), r, method });
    }
    let max_type = points.iter().map(|p| p.r).max().unwrap_or(0);
    Ok(TypeReport { points, max_type })
}

fn polynomial_type(rho: &RealPolynomial, p: &DiagonalPoint, budget: CurveBudget) -> Result<(u32, TypeMethod)> {
    let v = rho.eval(p);
    if v.norm() > 1e-12 {
        return Err(Error::Precondition(format!("probe is off the boundary: defining function {:.3e}", v.re)));
    }
    let levi = levi_form(rho, p);
    if levi < -1e-9 {
        return Ok((2, TypeMethod::Levi));
    }
    let bound = contact_order_lower_bound(rho, *p, budget.max_curve_degree, budget.max_coeff_grid)?;
    if bound.infinite {
        return Err(Error::UnsupportedFamily("boundary contains a complex curve (infinite type)".into()));
    }
    Ok(((bound.numerator / bound.denominator), TypeMethod::CurveSearch))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn egg_type_examples() {
        assert_eq!(egg_type(2, &DiagonalPoint::real(1.0, 0.0)).unwrap(), 4);
        assert_eq!(egg_type(4, &DiagonalPoint::real(0.0, 1.0)).unwrap(), 2);
        assert_eq!(egg_type(1, &DiagonalPoint::real(1.0, 0.0)).unwrap(), 2);
        assert!(matches!(egg_type(2, &DiagonalPoint::real(0.5, 0.0)), Err(Error::Precondition(_))));
    }

    #[test]
    fn composition_along_w_axis() {
        let rho = RealPolynomial::egg(2);
        let curve = HolomorphicCurve { base: DiagonalPoint::real(1.0, 0.0), gamma: [vec![], vec![c(1.0, 0.0)]] };
        assert_eq!(composition_order(&rho, &curve), Some(4));
    }

    #[test]
    fn contact_search_examples() {
        let b = contact_order_lower_bound(&RealPolynomial::egg(2), DiagonalPoint::real(1.0, 0.0), 3, 1).unwrap();
        assert_eq!((b.numerator, b.denominator), (4, 1));
        let b = contact_order_lower_bound(&RealPolynomial::egg(1), DiagonalPoint::real(1.0, 0.0), 3, 1).unwrap();
        assert_eq!(b.value(), 2.0);
    }

    #[test]
    fn lower_bound_never_exceeds_egg_type() {
        for s in 1..=4u32 {
            let rho = RealPolynomial::egg(s);
            for xi in [DiagonalPoint::real(1.0, 0.0), DiagonalPoint::real(0.0, 1.0)] {
                let b = contact_order_lower_bound(&rho, xi, 3, 1).unwrap();
                assert!(b.value() <= egg_type(s, &xi).unwrap() as f64);
            }
        }
    }

    #[test]
    fn levi_form_signs() {
        let ball = RealPolynomial::egg(1);
        assert!(levi_form(&ball, &DiagonalPoint::real(1.0, 0.0)) < 0.0);
        let e3 = RealPolynomial::egg(3);
        assert!(levi_form(&e3, &DiagonalPoint::real(1.0, 0.0)).abs() < 1e-12);
        let y = 0.7f64;
        let z = (1.0 - y.powi(3)).sqrt();
        assert!(levi_form(&e3, &DiagonalPoint::real(z, y.sqrt())) < 0.0);
    }

    #[test]
    fn curve_inside_zero_set_is_infinite() {
        // ρ = Re(z) - Re(z)... use ρ = z + z̄ - 2: the line z = 1 lies in it.
        let mut rho = RealPolynomial::default();
        rho.add_term([1, 0, 0, 0], c(1.0, 0.0));
        rho.add_term([0, 1, 0, 0], c(1.0, 0.0));
        rho.add_term([0, 0, 0, 0], c(-2.0, 0.0));
        let b = contact_order_lower_bound(&rho, DiagonalPoint::real(1.0, 0.0), 2, 1).unwrap();
        assert!(b.infinite);
    }

    #[test]
    fn reports() {
        let s3 = 0.64f64.powf(1.0 / 6.0);
        let probes = [DiagonalPoint::real(1.0, 0.0), DiagonalPoint::real(0.0, 1.0), DiagonalPoint::real(0.6, s3)];
        let r = type_report(&DomainDescriptor::Egg { s: 3.0 }, &probes, CurveBudget::default()).unwrap();
        assert_eq!(r.points.iter().map(|p| p.r).collect::<Vec<_>>(), vec![6, 2, 2]);
        assert_eq!(r.max_type, 6);
        assert!(matches!(
            type_report(&DomainDescriptor::Egg { s: 2.5 }, &probes, CurveBudget::default()),
            Err(Error::UnsupportedFamily(_))
        ));
    }

    #[test]
    fn ellipsoid_points_are_levi_type_two() {
        let params = EllipsoidParams::new(vec![0.1, 0.2]).unwrap();
        let probes: Vec<DiagonalPoint> = (0..6)
            .map(|k| {
                let th = k as f64 * 0.9;
                let dir = [th.cos(), 0.3 * th.sin(), -0.5 * th.sin(), 0.2];
                params.boundary_point_along(&dir)
            })
            .collect();
        let r = type_report(&DomainDescriptor::Ellipsoid(params), &probes, CurveBudget::default()).unwrap();
        assert!(r.points.iter().all(|p| p.r == 2 && p.method == TypeMethod::Levi));
    }
}
