//! Real ellipsoids `E(A) = {1 - |z|^2 - sum_j A_j (z_j^2 + z̄_j^2) > 0}` in
//! C^n, affine normalization of real quadrics, and support-function
//! geometry of affine images of `E(A)`.
//!
//! Quadrics are stored as `q(z) = z^H H z + 2 Re(z^T B z) + 2 Re(l^T z) + r0`
//! with `H` Hermitian and `B` complex symmetric. Real coordinates are
//! interleaved: `X = (Re z_1, Im z_1, ..., Re z_n, Im z_n)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use statrs::function::erf::erf_inv;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::kernel::DiagonalPoint;

type CMat = DMatrix<Complex64>;
type CVec = DVector<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipsoidParams {
    a: Vec<f64>,
}

impl EllipsoidParams {
    /// Requires `0 <= A_1 <= ... <= A_n < 1/2`.
    pub fn new(a: Vec<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::Parameter("ellipsoid dimension must be at least 1".into()));
        }
        if a.iter().any(|v| !v.is_finite() || *v < 0.0 || *v >= 0.5) {
            return Err(Error::Parameter(format!("every A_j must lie in [0, 1/2), got {a:?}")));
        }
        if a.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Parameter(format!("A must be nondecreasing, got {a:?}")));
        }
        Ok(Self { a })
    }

    pub fn ball(n: usize) -> Self {
        Self { a: vec![0.0; n] }
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    /// `f_A` as a quadric: `H = -I`, `B = -diag(A)`.
    pub fn defining_poly(&self) -> RealQuadric {
        let n = self.dim();
        RealQuadric {
            h: CMat::from_diagonal_element(n, n, c(-1.0)),
            b: CMat::from_diagonal(&CVec::from_iterator(n, self.a.iter().map(|&v| c(-v)))),
            l: CVec::zeros(n),
            r0: 1.0,
        }
    }

    /// Diagonal of the real form: `(1 + 2A_1, 1 - 2A_1, ...)`.
    pub fn real_diagonal(&self) -> Vec<f64> {
        self.a.iter().flat_map(|&v| [1.0 + 2.0 * v, 1.0 - 2.0 * v]).collect()
    }

    /// The boundary point on the ray from the origin along the real vector `dir`.
    pub fn boundary_point(&self, dir: &[f64]) -> Vec<f64> {
        let d = self.real_diagonal();
        let s: f64 = dir.iter().zip(&d).map(|(x, w)| w * x * x).sum();
        dir.iter().map(|x| x / s.sqrt()).collect()
    }

    /// [`boundary_point`](Self::boundary_point) as a point of C^2.
    pub fn boundary_point_along(&self, dir: &[f64; 4]) -> DiagonalPoint {
        let p = self.boundary_point(dir);
        DiagonalPoint::from_coords([p[0], p[1], p[2], p[3]])
    }
}

/// Real quadric `q(z) = z^H H z + 2 Re(z^T B z) + 2 Re(l^T z) + r0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealQuadric {
    pub h: CMat,
    pub b: CMat,
    pub l: CVec,
    pub r0: f64,
}

/// `Q` with `X = Q z + conj(Q) z̄`, i.e. `x_j = (z_j + z̄_j)/2`, `y_j = (z_j - z̄_j)/(2i)`.
fn real_from_complex(n: usize) -> CMat {
    let mut q = CMat::zeros(2 * n, n);
    for j in 0..n {
        q[(2 * j, j)] = c(0.5);
        q[(2 * j + 1, j)] = -0.5 * I;
    }
    q
}

/// `P` with `z = P X`.
fn complex_from_real(n: usize) -> CMat {
    let mut p = CMat::zeros(n, 2 * n);
    for j in 0..n {
        p[(j, 2 * j)] = c(1.0);
        p[(j, 2 * j + 1)] = I;
    }
    p
}

fn re(m: &CMat) -> DMatrix<f64> {
    m.map(|v| v.re)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Definiteness {
    PositiveDefinite,
    NegativeDefinite,
    IndefiniteOrDegenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Classification {
    pub class: Definiteness,
    /// Smallest eigenvalue magnitude of the real quadratic form.
    pub margin: f64,
}

impl RealQuadric {
    pub fn dim(&self) -> usize {
        self.l.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        if n == 0 || self.h.shape() != (n, n) || self.b.shape() != (n, n) {
            return Err(Error::Parameter("quadric blocks have inconsistent sizes".into()));
        }
        let scale = self.h.iter().chain(self.b.iter()).map(|v| v.norm()).fold(1.0, f64::max);
        if (&self.h - self.h.adjoint()).iter().any(|v| v.norm() > 1e-12 * scale) {
            return Err(Error::Parameter("H must be Hermitian".into()));
        }
        if (&self.b - self.b.transpose()).iter().any(|v| v.norm() > 1e-12 * scale) {
            return Err(Error::Parameter("B must be symmetric".into()));
        }
        if !self.r0.is_finite() || self.h.iter().chain(self.b.iter()).chain(self.l.iter()).any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Parameter("quadric coefficients must be finite".into()));
        }
        Ok(())
    }

    /// Builds a quadric from the real form `X^T S X + g^T X + r0`.
    pub fn from_real(s: &DMatrix<f64>, g: &DVector<f64>, r0: f64) -> Result<Self> {
        let m = s.nrows();
        if !m.is_multiple_of(2) || s.ncols() != m || g.len() != m {
            return Err(Error::Parameter("real form needs an even square matrix and matching vector".into()));
        }
        let sym = (s + s.transpose()) * 0.5;
        let n = m / 2;
        let q = real_from_complex(n);
        let sc = sym.map(c);
        let h = (q.adjoint() * &sc * &q) * c(2.0);
        let b = q.transpose() * &sc * &q;
        let l = q.transpose() * g.map(c);
        Ok(Self { h, b, l, r0 })
    }

    /// `(S, g)` of the real form `X^T S X + g^T X + r0`.
    pub fn real_form(&self) -> (DMatrix<f64>, DVector<f64>) {
        let p = complex_from_real(self.dim());
        let s = re(&(p.adjoint() * &self.h * &p)) + re(&(p.transpose() * &self.b * &p)) * 2.0;
        let s = (&s + s.transpose()) * 0.5;
        let g = (p.transpose() * &self.l).map(|v| 2.0 * v.re);
        (s, g)
    }

    pub fn eval(&self, z: &CVec) -> f64 {
        let quad = (z.adjoint() * &self.h * z)[(0, 0)].re;
        let sym = (z.transpose() * &self.b * z)[(0, 0)].re;
        let lin = (self.l.transpose() * z)[(0, 0)].re;
        quad + 2.0 * sym + 2.0 * lin + self.r0
    }

    /// `q(N ζ + d)`.
    pub fn compose_affine(&self, n_mat: &CMat, d: &CVec) -> RealQuadric {
        let h = n_mat.adjoint() * &self.h * n_mat;
        let b = n_mat.transpose() * &self.b * n_mat;
        let lin_t = self.l.transpose() * n_mat + d.adjoint() * &self.h * n_mat + (d.transpose() * &self.b * n_mat) * c(2.0);
        RealQuadric { h, b, l: lin_t.transpose(), r0: self.eval(d) }
    }

    pub fn scaled(&self, lambda: f64) -> RealQuadric {
        RealQuadric {
            h: &self.h * c(lambda),
            b: &self.b * c(lambda),
            l: &self.l * c(lambda),
            r0: self.r0 * lambda,
        }
    }

    pub fn negated(&self) -> RealQuadric {
        self.scaled(-1.0)
    }

    /// Largest coefficient difference against `other`.
    pub fn max_coefficient_diff(&self, other: &RealQuadric) -> f64 {
        let m = |a: &CMat, b: &CMat| (a - b).iter().map(|v| v.norm()).fold(0.0, f64::max);
        let v = (&self.l - &other.l).iter().map(|v| v.norm()).fold(0.0, f64::max);
        m(&self.h, &other.h).max(m(&self.b, &other.b)).max(v).max((self.r0 - other.r0).abs())
    }

    /// JSON `{H: [[[re, im], ...], ...], B: ..., r1: [[re, im], ...], r0}`.
    pub fn to_json(&self) -> Value {
        let mat = |m: &CMat| -> Value {
            Value::Array(
                (0..m.nrows())
                    .map(|i| Value::Array((0..m.ncols()).map(|j| serde_json::json!([m[(i, j)].re, m[(i, j)].im])).collect()))
                    .collect(),
            )
        };
        serde_json::json!({
            "H": mat(&self.h),
            "B": mat(&self.b),
            "r1": self.l.iter().map(|v| serde_json::json!([v.re, v.im])).collect::<Vec<_>>(),
            "r0": self.r0,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |m: &str| Error::Parameter(format!("quadric json: {m}"));
        let cplx = |x: &Value| -> Result<Complex64> {
            let a = x.as_array().filter(|a| a.len() == 2).ok_or_else(|| bad("complex entries are [re, im] pairs"))?;
            match (a[0].as_f64(), a[1].as_f64()) {
                (Some(r), Some(i)) => Ok(Complex64::new(r, i)),
                _ => Err(bad("complex entries must be numbers")),
            }
        };
        let mat = |key: &str| -> Result<CMat> {
            let rows = v.get(key).and_then(Value::as_array).ok_or_else(|| bad(&format!("missing {key}")))?;
            let n = rows.len();
            let mut m = CMat::zeros(n, n);
            for (i, row) in rows.iter().enumerate() {
                let row = row.as_array().filter(|r| r.len() == n).ok_or_else(|| bad(&format!("{key} must be square")))?;
                for (j, x) in row.iter().enumerate() {
                    m[(i, j)] = cplx(x)?;
                }
            }
            Ok(m)
        };
        let h = mat("H")?;
        let b = mat("B")?;
        let r1 = v.get("r1").and_then(Value::as_array).ok_or_else(|| bad("missing r1"))?;
        let l = CVec::from_iterator(r1.len(), r1.iter().map(cplx).collect::<Result<Vec<_>>>()?);
        let r0 = v.get("r0").and_then(Value::as_f64).ok_or_else(|| bad("missing r0"))?;
        let q = Self { h, b, l, r0 };
        q.validate()?;
        Ok(q)
    }
}

/// Eigenvalue test of the real quadratic part.
pub fn classify_quadric(q: &RealQuadric) -> Classification {
    let (s, _) = q.real_form();
    let eig = SymmetricEigen::new(s).eigenvalues;
    let scale = eig.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let margin = eig.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    let tol = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let class = if eig.iter().all(|&v| v > tol) {
        Definiteness::PositiveDefinite
    } else if eig.iter().all(|&v| v < -tol) {
        Definiteness::NegativeDefinite
    } else {
        Definiteness::IndefiniteOrDegenerate
    };
    Classification { class, margin }
}

/// Complex affine map `z ↦ M z + xi`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    pub m: CMat,
    pub xi: CVec,
}

impl AffineMap {
    pub fn new(m: CMat, xi: CVec) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() != xi.len() {
            return Err(Error::Parameter("affine map needs a square matrix and matching shift".into()));
        }
        let map = Self { m, xi };
        if !(map.condition_number() < 1e12) {
            return Err(Error::Parameter("affine map matrix is singular".into()));
        }
        Ok(map)
    }

    pub fn identity(n: usize) -> Self {
        Self { m: CMat::identity(n, n), xi: CVec::zeros(n) }
    }

    pub fn dim(&self) -> usize {
        self.xi.len()
    }

    pub fn apply(&self, z: &CVec) -> CVec {
        &self.m * z + &self.xi
    }

    pub fn inverse(&self) -> Result<Self> {
        let inv = self.m.clone().try_inverse().ok_or_else(|| Error::Parameter("affine map is not invertible".into()))?;
        let xi = -(&inv * &self.xi);
        Ok(Self { m: inv, xi })
    }

    /// Ratio of extreme singular values of `M`.
    pub fn condition_number(&self) -> f64 {
        let sv = self.m.clone().singular_values();
        let (mx, mn) = (sv.max(), sv.min());
        if mn > 0.0 {
            mx / mn
        } else {
            f64::INFINITY
        }
    }

    /// Real `2n x 2n` matrix and shift acting on interleaved coordinates.
    pub fn real_parts(&self) -> (DMatrix<f64>, DVector<f64>) {
        let n = self.dim();
        let mut r = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                let v = self.m[(i, j)];
                r[(2 * i, 2 * j)] = v.re;
                r[(2 * i, 2 * j + 1)] = -v.im;
                r[(2 * i + 1, 2 * j)] = v.im;
                r[(2 * i + 1, 2 * j + 1)] = v.re;
            }
        }
        let xi = DVector::from_iterator(2 * n, self.xi.iter().flat_map(|v| [v.re, v.im]));
        (r, xi)
    }

    /// `I + delta N` with `|N|_2 <= 1` and `|xi| <= xi_max`.
    pub fn random_near_identity(n: usize, delta: f64, xi_max: f64, rng: &mut ChaCha8Rng) -> Self {
        let raw = CMat::from_fn(n, n, |_, _| Complex64::new(gauss(rng), gauss(rng)));
        let frob = raw.norm().max(f64::MIN_POSITIVE);
        let m = CMat::identity(n, n) + raw * c(delta / frob);
        Self { m, xi: random_ball_vector(n, xi_max, rng) }
    }

    /// A random map with singular values within a factor of about 4.
    pub fn random_general(n: usize, rng: &mut ChaCha8Rng) -> Self {
        loop {
            let m = CMat::from_fn(n, n, |_, _| Complex64::new(gauss(rng), gauss(rng)) * 0.4) + CMat::identity(n, n) * Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
            let xi = CVec::from_fn(n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let map = Self { m, xi };
            let k = map.condition_number();
            if k < 4.0 {
                return map;
            }
        }
    }

    pub fn to_json(&self) -> Value {
        let n = self.dim();
        serde_json::json!({
            "M": (0..n).map(|i| (0..n).map(|j| [self.m[(i, j)].re, self.m[(i, j)].im]).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "xi": self.xi.iter().map(|v| [v.re, v.im]).collect::<Vec<_>>(),
        })
    }
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller.
    let u1: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.random_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn random_ball_vector(n: usize, radius: f64, rng: &mut ChaCha8Rng) -> CVec {
    let v = CVec::from_fn(n, |_, _| Complex64::new(gauss(rng), gauss(rng)));
    let norm = v.norm().max(f64::MIN_POSITIVE);
    let r = radius * rng.random_range(0.0f64..1.0).powf(1.0 / (2 * n) as f64);
    v * c(r / norm)
}

/// Sorted nondecreasing parameters in `[0, a_max)`.
pub fn random_params(n: usize, a_max: f64, rng: &mut ChaCha8Rng) -> EllipsoidParams {
    let mut a: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..a_max)).collect();
    a.sort_by(f64::total_cmp);
    EllipsoidParams { a }
}

/// Takagi factorization `C = U diag(sigma) U^T` of a complex symmetric
/// matrix, with `U` unitary and `sigma >= 0` ascending.
///
/// Uses the real symmetric embedding `[[Re C, Im C], [Im C, -Re C]]`, whose
/// eigenvectors `(a, b)` for `sigma >= 0` give `u = a + ib` with
/// `C conj(u) = sigma u`. Vectors from a degenerate zero block are
/// Gram-Schmidt orthogonalized over C.
pub fn takagi(cm: &CMat) -> (CMat, Vec<f64>) {
    let n = cm.nrows();
    let cr = re(cm);
    let ci = cm.map(|v| v.im);
    let mut big = DMatrix::zeros(2 * n, 2 * n);
    big.view_mut((0, 0), (n, n)).copy_from(&cr);
    big.view_mut((0, n), (n, n)).copy_from(&ci);
    big.view_mut((n, 0), (n, n)).copy_from(&ci);
    big.view_mut((n, n), (n, n)).copy_from(&(-&cr));
    let eig = SymmetricEigen::new(big);
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let mut cols: Vec<CVec> = Vec::with_capacity(n);
    let mut sigma = Vec::with_capacity(n);
    for &k in &order {
        if cols.len() == n {
            break;
        }
        let v = eig.eigenvectors.column(k);
        let mut u = CVec::from_fn(n, |i, _| Complex64::new(v[i], v[i + n]));
        for w in &cols {
            let proj = w.dotc(&u);
            u -= w * proj;
        }
        let norm = u.norm();
        if norm < 0.5 {
            continue;
        }
        cols.push(u / c(norm));
        sigma.push(eig.eigenvalues[k].max(0.0));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| sigma[i].total_cmp(&sigma[j]));
    let u = CMat::from_columns(&idx.iter().map(|&i| cols[i].clone()).collect::<Vec<_>>());
    (u, idx.iter().map(|&i| sigma[i]).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Normalization {
    /// `Φ` with `λ (q ∘ Φ^{-1}) = f_A`.
    pub phi: AffineMap,
    pub params: EllipsoidParams,
    pub lambda: f64,
    /// The input sign was flipped so that the interior is `{q > 0}` bounded.
    pub sign_flipped: bool,
    /// Max coefficient deviation of `λ (q ∘ Φ^{-1})` from `f_A`.
    pub residual: f64,
}

impl Normalization {
    /// `{A, M, xi, lambda, residual}` (plus the sign flag).
    pub fn to_json(&self) -> Value {
        let mut v = self.phi.to_json();
        let obj = v.as_object_mut().expect("object");
        obj.insert("A".into(), serde_json::json!(self.params.a()));
        obj.insert("lambda".into(), serde_json::json!(self.lambda));
        obj.insert("residual".into(), serde_json::json!(self.residual));
        obj.insert("sign_flipped".into(), serde_json::json!(self.sign_flipped));
        v
    }
}

/// Affine normal form of a definite real quadric: returns `Φ`, `A` and
/// `λ > 0` with `λ (q ∘ Φ^{-1}) = f_A`.
///
/// Steps: flip the sign if the quadratic part is positive definite;
/// translate to the critical point `c`; reduce `-H` to the identity by
/// Cholesky; diagonalize the remaining symmetric part by Takagi; scale by
/// `sqrt(q(c))`.
pub fn normalize_ellipsoid(q: &RealQuadric) -> Result<Normalization> {
    q.validate()?;
    let n = q.dim();
    let cls = classify_quadric(q);
    let (work, sign_flipped) = match cls.class {
        Definiteness::NegativeDefinite => (q.clone(), false),
        Definiteness::PositiveDefinite => (q.negated(), true),
        Definiteness::IndefiniteOrDegenerate => {
            return Err(Error::Precondition(format!(
                "quadratic part is indefinite or degenerate (margin {:.3e})",
                cls.margin
            )))
        }
    };
    let (s, g) = work.real_form();
    let center_real = s.clone().lu().solve(&(-&g * 0.5)).ok_or_else(|| Error::Precondition("quadratic part is singular".into()))?;
    let center = CVec::from_fn(n, |j, _| Complex64::new(center_real[2 * j], center_real[2 * j + 1]));
    let qc = work.eval(&center);
    if !(qc > 0.0) {
        return Err(Error::NotBoundedEllipsoid(format!("the set q > 0 is empty (max value {qc:.3e})")));
    }
    let hn = -&work.h;
    let hn = (&hn + hn.adjoint()) * c(0.5);
    let chol = hn
        .cholesky()
        .ok_or_else(|| Error::NotBoundedEllipsoid("Hermitian part is not negative definite".into()))?;
    // N = L^{-H} gives N^H (-H) N = I.
    let n_mat = chol
        .l()
        .adjoint()
        .try_inverse()
        .ok_or_else(|| Error::NotBoundedEllipsoid("Hermitian part is singular".into()))?;
    let b1 = n_mat.transpose() * &work.b * &n_mat;
    let b1 = (&b1 + b1.transpose()) * c(0.5);
    let (u, sigma) = takagi(&(-b1));
    if sigma.iter().any(|&v| v >= 0.5) {
        return Err(Error::NotBoundedEllipsoid(format!("normal-form parameters {sigma:?} reach 1/2")));
    }
    let w = u.map(|v| v.conj());
    let g_mat = &n_mat * &w * c(qc.sqrt());
    let g_inv = g_mat.clone().try_inverse().ok_or_else(|| Error::Precondition("normalizing map is singular".into()))?;
    let phi = AffineMap { xi: -(&g_inv * &center), m: g_inv };
    let params = EllipsoidParams { a: sigma };
    let lambda = 1.0 / qc;
    let back = work.compose_affine(&g_mat, &center).scaled(lambda);
    let residual = back.max_coefficient_diff(&params.defining_poly());
    Ok(Normalization {
        phi,
        params,
        lambda: if sign_flipped { -lambda } else { lambda }.abs(),
        sign_flipped,
        residual,
    })
}

/// `Ψ(E(A))` for an affine map `Ψ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexBody {
    pub params: EllipsoidParams,
    pub map: AffineMap,
    /// `M_R D^{-1} M_R^T` with `D` the real diagonal of `E(A)`.
    shape: DMatrix<f64>,
    /// `(M_R D^{-1} M_R^T)^{-1}`, the form of the body around its center.
    form: DMatrix<f64>,
    center: DVector<f64>,
}

impl ConvexBody {
    pub fn new(params: EllipsoidParams, map: AffineMap) -> Result<Self> {
        if params.dim() != map.dim() {
            return Err(Error::Parameter("ellipsoid and map dimensions differ".into()));
        }
        let (mr, xr) = map.real_parts();
        let dinv = DMatrix::from_diagonal(&DVector::from_iterator(2 * params.dim(), params.real_diagonal().into_iter().map(|v| 1.0 / v)));
        let shape = &mr * dinv * mr.transpose();
        let shape = (&shape + shape.transpose()) * 0.5;
        let form = shape.clone().try_inverse().ok_or_else(|| Error::Parameter("degenerate body".into()))?;
        Ok(Self { params, map, shape, form, center: xr })
    }

    pub fn ball(n: usize) -> Self {
        Self::new(EllipsoidParams::ball(n), AffineMap::identity(n)).expect("ball is valid")
    }

    /// `E(A)` itself.
    pub fn ellipsoid(params: EllipsoidParams) -> Self {
        let n = params.dim();
        Self::new(params, AffineMap::identity(n)).expect("valid")
    }

    /// Real dimension `2n`.
    pub fn real_dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    /// `h(u) = sqrt(u^T S u) + <center, u>`.
    pub fn support(&self, u: &DVector<f64>) -> f64 {
        (u.dot(&(&self.shape * u))).max(0.0).sqrt() + self.center.dot(u)
    }

    fn support_gradient(&self, u: &DVector<f64>) -> DVector<f64> {
        let su = &self.shape * u;
        let r = u.dot(&su).max(f64::MIN_POSITIVE).sqrt();
        su / r + &self.center
    }

    pub fn contains(&self, y: &DVector<f64>) -> bool {
        let d = y - &self.center;
        d.dot(&(&self.form * &d)) < 1.0
    }

    /// Longest segment in direction `d`: `2 / sqrt(d^T Q d)` for unit `d`.
    pub fn longest_chord(&self, d: &DVector<f64>) -> Result<f64> {
        let n = d.norm();
        if n == 0.0 {
            return Err(Error::Parameter("chord direction is zero".into()));
        }
        let u = d / n;
        Ok(2.0 / u.dot(&(&self.form * &u)).sqrt())
    }
}

/// Points on `S^{m-1}`: the `2m` signed axes, then Halton points mapped
/// through the normal quantile and normalized.
pub fn sphere_directions(m: usize, count: usize) -> Vec<DVector<f64>> {
    const PRIMES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    let mut out = Vec::with_capacity(count + 2 * m);
    for k in 0..m {
        for s in [1.0, -1.0] {
            let mut v = DVector::zeros(m);
            v[k] = s;
            out.push(v);
        }
    }
    let mut i = 1u64;
    while out.len() < count.max(2 * m) {
        let v = DVector::from_iterator(m, (0..m).map(|k| normal_quantile(halton(i, PRIMES[k % PRIMES.len()]))));
        let nv = v.norm();
        if nv > 1e-12 {
            out.push(v / nv);
        }
        i += 1;
    }
    out
}

fn halton(mut i: u64, base: u32) -> f64 {
    let b = base as f64;
    let (mut f, mut r) = (1.0, 0.0);
    while i > 0 {
        f /= b;
        r += f * (i % base as u64) as f64;
        i /= base as u64;
    }
    r
}

fn normal_quantile(p: f64) -> f64 {
    std::f64::consts::SQRT_2 * erf_inv(2.0 * p - 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HausdorffEstimate {
    pub epsilon: f64,
    /// Direction attaining the estimate.
    pub direction: Vec<f64>,
    /// Lipschitz bound of `h` times the measured angular mesh of the
    /// sampled directions; bounds how far the raw sampled maximum can sit
    /// below the true supremum.
    pub sampling_gap: f64,
    pub directions: usize,
}

/// `sup_u |h(u) - 1|` by direction sampling and projected gradient ascent
/// from the best samples.
pub fn hausdorff_to_ball(body: &ConvexBody, n_dirs: usize, refine_steps: usize) -> Result<HausdorffEstimate> {
    if n_dirs < 100 {
        return Err(Error::Parameter(format!("need at least 100 directions, got {n_dirs}")));
    }
    let m = body.real_dim();
    let dirs = sphere_directions(m, n_dirs);
    let f = |u: &DVector<f64>| (body.support(u) - 1.0).abs();
    let mut scored: Vec<(f64, usize)> = dirs.iter().enumerate().map(|(i, u)| (f(u), i)).collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = (scored[0].0, dirs[scored[0].1].clone());
    for &(_, i) in scored.iter().take(8) {
        let (v, u) = refine(body, dirs[i].clone(), refine_steps);
        if v > best.0 {
            best = (v, u);
        }
    }
    let lipschitz = body.shape.symmetric_eigenvalues().max().max(0.0).sqrt() + body.center.norm();
    let sampling_gap = lipschitz * angular_mesh(&dirs, m);
    Ok(HausdorffEstimate { epsilon: best.0, direction: best.1.iter().copied().collect(), sampling_gap, directions: dirs.len() })
}

fn refine(body: &ConvexBody, mut u: DVector<f64>, steps: usize) -> (f64, DVector<f64>) {
    let f = |u: &DVector<f64>| (body.support(u) - 1.0).abs();
    let mut val = f(&u);
    let mut eta = 0.5;
    for _ in 0..steps {
        let sign = if body.support(&u) >= 1.0 { 1.0 } else { -1.0 };
        let g = body.support_gradient(&u) * sign;
        let tangent = &g - &u * g.dot(&u);
        if tangent.norm() < 1e-15 {
            break;
        }
        let mut improved = false;
        while eta > 1e-12 {
            let cand = &u + &tangent * eta;
            let cand = &cand / cand.norm();
            let v = f(&cand);
            if v > val {
                u = cand;
                val = v;
                eta *= 1.5;
                improved = true;
                break;
            }
            eta *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (val, u)
}

/// Largest angle from a fixed set of probe directions to the nearest sample.
fn angular_mesh(dirs: &[DVector<f64>], m: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6d65_7368);
    let mut worst = 0.0f64;
    for _ in 0..256 {
        let v = DVector::from_fn(m, |_, _| gauss(&mut rng));
        let v = &v / v.norm();
        let best = dirs.iter().map(|d| d.dot(&v)).fold(-1.0f64, f64::max);
        worst = worst.max(best.clamp(-1.0, 1.0).acos());
    }
    worst
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub epsilon: f64,
    pub bound: f64,
    pub a: Vec<f64>,
    /// `bound - A_j`.
    pub slack: Vec<f64>,
    pub holds: bool,
}

pub const DEFAULT_DIRECTIONS: usize = 4000;
pub const DEFAULT_REFINE_STEPS: usize = 200;

/// Checks `A_j <= ε/(1+ε²)` with `ε = d_H(Ψ(E(A)), B)`.
pub fn check_hausdorff_bound(params: &EllipsoidParams, map: &AffineMap) -> Result<BoundReport> {
    let body = ConvexBody::new(params.clone(), map.clone())?;
    let est = hausdorff_to_ball(&body, DEFAULT_DIRECTIONS, DEFAULT_REFINE_STEPS)?;
    let eps = est.epsilon;
    if eps >= 0.5 {
        return Err(Error::Precondition(format!("Hausdorff distance {eps:.4} is not below 1/2")));
    }
    let bound = eps / (1.0 + eps * eps);
    let slack: Vec<f64> = params.a().iter().map(|a| bound - a).collect();
    let holds = slack.iter().all(|&s| s >= -1e-12);
    let report = BoundReport { epsilon: eps, bound, a: params.a().to_vec(), slack, holds };
    if !holds {
        return Err(Error::TheoremViolation(format!(
            "A = {:?} exceeds ε/(1+ε²) = {bound:.6} at ε = {eps:.6}",
            report.a
        )));
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContainmentReport {
    pub epsilon: f64,
    /// `1 + ε - max h`.
    pub outer_margin: f64,
    /// `min h - (1 - ε)`.
    pub inner_margin: f64,
    pub interior_points: usize,
    pub holds: bool,
}

/// Checks `B_{1-ε} ⊂ body ⊂ B_{1+ε}` by support sampling and membership
/// of sampled points of `B_{1-ε}`.
pub fn check_containment(body: &ConvexBody, eps: f64, seed: u64) -> Result<ContainmentReport> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::Parameter(format!("ε must lie in (0, 1/2), got {eps}")));
    }
    let d = hausdorff_to_ball(body, DEFAULT_DIRECTIONS, DEFAULT_REFINE_STEPS)?;
    if d.epsilon >= eps {
        return Err(Error::Precondition(format!("Hausdorff distance {:.6} is not below ε = {eps}", d.epsilon)));
    }
    let m = body.real_dim();
    let dirs = sphere_directions(m, DEFAULT_DIRECTIONS);
    let hs: Vec<f64> = dirs.iter().map(|u| body.support(u)).collect();
    let hmax = hs.iter().copied().fold(f64::MIN, f64::max);
    let hmin = hs.iter().copied().fold(f64::MAX, f64::min);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inside = true;
    let n_pts = 2000;
    for k in 0..n_pts {
        // Half the points on the sphere of radius 1 - ε, half inside.
        let v = DVector::from_fn(m, |_, _| gauss(&mut rng));
        let r = if k % 2 == 0 { 1.0 - eps } else { (1.0 - eps) * rng.random_range(0.0f64..1.0).powf(1.0 / m as f64) };
        let y = &v * (r * (1.0 - 1e-12) / v.norm());
        if !body.contains(&y) {
            inside = false;
        }
    }
    let outer_margin = 1.0 + eps - hmax;
    let inner_margin = hmin - (1.0 - eps);
    let holds = outer_margin >= 0.0 && inner_margin >= 0.0 && inside;
    let report = ContainmentReport { epsilon: eps, outer_margin, inner_margin, interior_points: n_pts, holds };
    if !holds {
        return Err(Error::TheoremViolation(format!(
            "containment fails at ε = {eps}: outer margin {outer_margin:.3e}, inner margin {inner_margin:.3e}, interior ok = {inside}"
        )));
    }
    Ok(report)
}
