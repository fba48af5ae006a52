//! Detection of polynomial relations `P(t, f(t)) = 0` satisfied by sampled
//! functions, and the degrees read off from them.
//!
//! Grids that carry exact rational samples are solved over a prime field:
//! the nullspace there is exact, so a relation is accepted only if it truly
//! exists for the requested degrees. Float-only grids fall back to a
//! column-scaled SVD with holdout validation.

pub mod modular;
pub mod sampling;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::finite_type::TypeReport;
use crate::linalg;
use modular::{Field, CHECK_PRIME, MERSENNE_61};
pub use sampling::{exact_grid, exact_line_grid, ExactSamples, KernelFamily, SampleGrid};

pub const DEFAULT_TOL: f64 = 1e-7;
/// Float route: accept only if `sigma_min / sigma_next` is below this.
pub const GAP_RATIO: f64 = 1e-6;
/// Extra rows beyond the column count used for modular elimination.
const EXTRA_ROWS: usize = 32;
/// Largest design for which the float singular-value gap is computed.
const MAX_DIAGNOSTIC_COLUMNS: usize = 700;

/// All exponent vectors in `nvars` variables of total degree `<= dt`,
/// ordered by degree.
pub fn monomials(nvars: usize, dt: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for deg in 0..=dt {
        let mut cur = vec![0u32; nvars];
        compositions(nvars, deg as u32, 0, &mut cur, &mut out);
    }
    out
}

fn compositions(nvars: usize, left: u32, i: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if nvars == 0 {
        if left == 0 {
            out.push(Vec::new());
        }
        return;
    }
    if i + 1 == nvars {
        cur[i] = left;
        out.push(cur.clone());
        return;
    }
    for e in (0..=left).rev() {
        cur[i] = e;
        compositions(nvars, left - e, i + 1, cur, out);
    }
}

#[cfg(test)]
fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

#[cfg(test)]
fn monomial_count(nvars: usize, dt: usize) -> usize {
    binomial(nvars + dt, nvars)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegreeBudget {
    pub d_y_max: usize,
    pub dt_max: usize,
}

impl Default for DegreeBudget {
    fn default() -> Self {
        Self { d_y_max: 6, dt_max: 30 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub alpha: Vec<u32>,
    pub j: usize,
    pub c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionMethod {
    Modular,
    Svd,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimalPolynomialCandidate {
    pub variables: Vec<String>,
    pub weights: Vec<u32>,
    pub d_y: usize,
    pub dt: usize,
    /// Unit-norm coefficients of the relation in the float values.
    pub coeffs: Vec<Term>,
    /// Primitive integer relation in the exact (unscaled) values.
    pub integer_coeffs: Option<Vec<(Vec<u32>, usize, BigInt)>>,
    pub total_degree: usize,
    pub rational_degree: Option<usize>,
    /// Max scaled residual over the holdout points.
    pub residual: f64,
    /// `sigma_min / sigma_next` of the column-scaled design.
    pub condition: Option<f64>,
    pub method: DetectionMethod,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Detection {
    Found(Box<MinimalPolynomialCandidate>),
    /// No relation exists (or none passed validation) within the budget.
    NotFound { budget: DegreeBudget, notes: Vec<String> },
}

impl Detection {
    pub fn candidate(&self) -> Option<&MinimalPolynomialCandidate> {
        match self {
            Detection::Found(c) => Some(c),
            Detection::NotFound { .. } => None,
        }
    }
}

fn weighted_degree(alpha: &[u32], weights: &[u32]) -> usize {
    alpha.iter().zip(weights).map(|(a, w)| (a * w) as usize).sum()
}

fn eval_monomial(alpha: &[u32], t: &[f64]) -> f64 {
    alpha.iter().zip(t).map(|(&a, &x)| x.powi(a as i32)).product()
}

impl MinimalPolynomialCandidate {
    fn degrees(terms: &[Term], weights: &[u32]) -> (usize, usize) {
        let total = terms.iter().map(|t| weighted_degree(&t.alpha, weights) + t.j).max().unwrap_or(0);
        let dt = terms.iter().map(|t| t.alpha.iter().sum::<u32>() as usize).max().unwrap_or(0);
        (total, dt)
    }

    /// `P(t, f)` at one point.
    pub fn evaluate(&self, t: &[f64], f: f64) -> f64 {
        self.coeffs.iter().map(|term| term.c * eval_monomial(&term.alpha, t) * f.powi(term.j as i32)).sum()
    }

    /// `(deg p, deg q)` in real-coordinate degrees for `P = q Y - p`.
    pub fn numerator_denominator_degrees(&self) -> Option<(usize, usize)> {
        if self.d_y != 1 {
            return None;
        }
        let deg = |j: usize| {
            self.coeffs
                .iter()
                .filter(|t| t.j == j)
                .map(|t| weighted_degree(&t.alpha, &self.weights))
                .max()
        };
        Some((deg(0).unwrap_or(0), deg(1).unwrap_or(0)))
    }

    /// JSON object `{dY, dt, total_degree, rational_degree, coeffs, residual, condition}`
    /// plus the variable labels and weights needed to read it back.
    pub fn to_json(&self) -> Value {
        let coeffs: Vec<Value> = self
            .coeffs
            .iter()
            .map(|t| {
                let mut row: Vec<Value> = t.alpha.iter().map(|&a| Value::from(a)).collect();
                row.push(Value::from(t.j));
                row.push(Value::from(t.c));
                Value::Array(row)
            })
            .collect();
        serde_json::json!({
            "variables": self.variables,
            "weights": self.weights,
            "method": self.method,
            "dY": self.d_y,
            "dt": self.dt,
            "total_degree": self.total_degree,
            "rational_degree": self.rational_degree,
            "coeffs": coeffs,
            "residual": self.residual,
            "condition": self.condition,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |m: &str| Error::Parameter(format!("candidate json: {m}"));
        let variables: Vec<String> = serde_json::from_value(v.get("variables").cloned().ok_or_else(|| bad("missing variables"))?)?;
        let nvars = variables.len();
        let weights: Vec<u32> = match v.get("weights") {
            Some(w) => serde_json::from_value(w.clone())?,
            None => vec![1; nvars],
        };
        if weights.len() != nvars {
            return Err(bad("weights and variables differ in length"));
        }
        let rows = v.get("coeffs").and_then(Value::as_array).ok_or_else(|| bad("missing coeffs"))?;
        let mut coeffs = Vec::with_capacity(rows.len());
        for row in rows {
            let row = row.as_array().ok_or_else(|| bad("coefficient row is not an array"))?;
            if row.len() != nvars + 2 {
                return Err(bad("coefficient row has the wrong length"));
            }
            let int = |x: &Value| x.as_u64().map(|u| u as u32).ok_or_else(|| bad("exponent is not a nonnegative integer"));
            let alpha = row[..nvars].iter().map(int).collect::<Result<Vec<_>>>()?;
            let j = int(&row[nvars])? as usize;
            let c = row[nvars + 1].as_f64().ok_or_else(|| bad("coefficient is not a number"))?;
            coeffs.push(Term { alpha, j, c });
        }
        if coeffs.is_empty() {
            return Err(bad("empty relation"));
        }
        let d_y = coeffs.iter().map(|t| t.j).max().unwrap_or(0);
        let (total_degree, dt) = Self::degrees(&coeffs, &weights);
        let mut cand = Self {
            variables,
            weights,
            d_y,
            dt,
            coeffs,
            integer_coeffs: None,
            total_degree,
            rational_degree: None,
            residual: v.get("residual").and_then(Value::as_f64).unwrap_or(f64::NAN),
            condition: v.get("condition").and_then(Value::as_f64),
            method: v.get("method").cloned().map(serde_json::from_value).transpose()?.unwrap_or(DetectionMethod::Svd),
            warnings: Vec::new(),
        };
        cand.rational_degree = rational_degree(&cand);
        Ok(cand)
    }
}

/// `max(deg p, deg q)` for `P = q Y - p`; absent when `dY > 1`.
pub fn rational_degree(c: &MinimalPolynomialCandidate) -> Option<usize> {
    c.numerator_denominator_degrees().map(|(p, q)| p.max(q))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualReport {
    pub max: f64,
    pub rms: f64,
    pub points: usize,
    pub accepted: bool,
}

/// Residual `|P(t_i, f_i)| / max(1, |f_i|^dY)` over a grid.
pub fn verify_relation(c: &MinimalPolynomialCandidate, holdout: &SampleGrid, tol: f64) -> Result<ResidualReport> {
    if holdout.nvars() != c.variables.len() {
        return Err(Error::Parameter(format!(
            "holdout has {} variables, relation has {}",
            holdout.nvars(),
            c.variables.len()
        )));
    }
    let mut max = 0.0f64;
    let mut sq = 0.0;
    for (t, &f) in holdout.points.iter().zip(&holdout.values) {
        let r = c.evaluate(t, f).abs() / f.abs().powi(c.d_y as i32).max(1.0);
        max = max.max(r);
        sq += r * r;
    }
    let n = holdout.len();
    let rms = if n > 0 { (sq / n as f64).sqrt() } else { 0.0 };
    Ok(ResidualReport { max, rms, points: n, accepted: n > 0 && max <= tol })
}

/// Unknowns of a relation: the columns `t^alpha f^j`.
type Support = Vec<(Vec<u32>, usize)>;

/// All `t^alpha f^j` with `|alpha| <= dt`, `j <= d_y`, `j` outer.
fn dense_support(nvars: usize, d_y: usize, dt: usize) -> Support {
    graded_support(nvars, &vec![dt; d_y + 1])
}

/// `t^alpha f^j` with `|alpha| <= degs[j]`.
fn graded_support(nvars: usize, degs: &[usize]) -> Support {
    degs.iter()
        .enumerate()
        .flat_map(|(j, &d)| monomials(nvars, d).into_iter().map(move |a| (a, j)))
        .collect()
}

/// Float design matrix over `support`.
fn float_design(grid: &SampleGrid, rows: std::ops::Range<usize>, support: &Support) -> DMatrix<f64> {
    let idx: Vec<usize> = rows.collect();
    DMatrix::from_fn(idx.len(), support.len(), |r, c| {
        let i = idx[r];
        let (a, j) = &support[c];
        eval_monomial(a, &grid.points[i]) * grid.values[i].powi(*j as i32)
    })
}

/// `sigma_min / sigma_next` of the column-scaled design, and the number of
/// singular values below `1e-13 sigma_max`.
fn singular_gap(a: &DMatrix<f64>) -> (Option<f64>, usize) {
    if a.ncols() < 2 || a.ncols() > MAX_DIAGNOSTIC_COLUMNS {
        return (None, 0);
    }
    let sv = linalg::scaled_singular_values(a);
    let n = sv.len();
    let tiny = sv.iter().filter(|&&v| v <= 1e-13 * sv[0]).count();
    ((sv[n - 2] > 0.0).then(|| sv[n - 1] / sv[n - 2]), tiny)
}

/// Rows over `support` modulo `field.p` from exact samples.
fn modular_rows(field: &Field, exact: &ExactSamples, rows: std::ops::Range<usize>, support: &Support) -> Option<Vec<u64>> {
    let max_deg = support.iter().flat_map(|(m, _)| m.iter().copied()).max().unwrap_or(0) as usize;
    let max_j = support.iter().map(|(_, j)| *j).max().unwrap_or(0);
    let mut out = Vec::with_capacity(rows.len() * support.len());
    for i in rows {
        let pt: Vec<u64> = exact.points[i].iter().map(|q| field.from_rational(q)).collect::<Option<_>>()?;
        let f = field.from_rational(&exact.values[i])?;
        let powers = |x: u64, k: usize| {
            let mut v = Vec::with_capacity(k + 1);
            let mut acc = 1;
            for _ in 0..=k {
                v.push(acc);
                acc = field.mul(acc, x);
            }
            v
        };
        let pows: Vec<Vec<u64>> = pt.iter().map(|&x| powers(x, max_deg)).collect();
        let fpow = powers(f, max_j);
        out.extend(support.iter().map(|(m, j)| {
            let mv = m.iter().enumerate().fold(1, |acc, (k, &e)| field.mul(acc, pows[k][e as usize]));
            field.mul(mv, fpow[*j])
        }));
    }
    Some(out)
}

/// Nullspace of the exact system over `support` using the first
/// `cols + EXTRA_ROWS` samples.
fn modular_cell(exact: &ExactSamples, support: &Support) -> Result<Vec<Vec<u64>>> {
    let ncols = support.len();
    let rows = ncols + EXTRA_ROWS;
    if exact.points.len() < rows {
        return Err(Error::Precondition(format!("{} exact samples cannot resolve {ncols} unknowns", exact.points.len())));
    }
    let field = Field::new(MERSENNE_61);
    let m = modular_rows(&field, exact, 0..rows, support)
        .ok_or_else(|| Error::Precondition("sample denominator vanishes modulo the prime".into()))?;
    Ok(modular::nullspace(&field, m, rows, ncols))
}

fn exact_of(grid: &SampleGrid) -> Result<&ExactSamples> {
    grid.exact.as_ref().ok_or_else(|| Error::Precondition("grid has no exact samples".into()))
}

/// True when an exact relation with `Y`-degree `d_y` and coefficient degree
/// `<= dt` exists on the grid.
pub fn relation_exists(grid: &SampleGrid, d_y: usize, dt: usize) -> Result<bool> {
    Ok(!modular_cell(exact_of(grid)?, &dense_support(grid.nvars(), d_y, dt))?.is_empty())
}

/// Smallest `dt <= dt_max` with a relation of `Y`-degree `d_y` on a
/// one-variable grid, with the degree of each `Y^j` coefficient of that
/// relation.
fn min_line_degree(line: &SampleGrid, d_y: usize, dt_max: usize) -> Result<Option<(usize, Vec<usize>)>> {
    let exact = exact_of(line)?;
    if !relation_exists(line, d_y, dt_max)? {
        return Ok(None);
    }
    for dt in 0..=dt_max {
        let support = dense_support(1, d_y, dt);
        let basis = modular_cell(exact, &support)?;
        if let [v] = basis.as_slice() {
            let mut degs = vec![0usize; d_y + 1];
            for ((a, j), &c) in support.iter().zip(v) {
                if c != 0 {
                    degs[*j] = degs[*j].max(a[0] as usize);
                }
            }
            return Ok(Some((dt, degs)));
        }
        if basis.len() > 1 {
            return Ok(Some((dt, vec![dt; d_y + 1])));
        }
    }
    Ok(Some((dt_max, vec![dt_max; d_y + 1])))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct DetectOptions<'a> {
    /// Exact samples of the same function along a line. A relation of total
    /// degree `dt` restricts to one of degree `<= dt` on the line, so line
    /// results give certified lower bounds that prune the scan.
    pub line: Option<&'a SampleGrid>,
}

/// Scans `dY = 1..=d_y_max`, then `dt = 0..=dt_max`, and returns the first
/// cell whose relation passes holdout validation.
pub fn detect_min_polynomial(grid: &SampleGrid, budget: DegreeBudget, tol: f64, opts: DetectOptions) -> Result<Detection> {
    grid.validate()?;
    if budget.d_y_max == 0 {
        return Err(Error::Parameter("d_y_max must be at least 1".into()));
    }
    if grid.values.contains(&0.0) && grid.exact.is_none() {
        return Err(Error::Parameter("sampled values must be nonzero".into()));
    }
    match &grid.exact {
        Some(_) => detect_modular(grid, budget, tol, opts),
        None => detect_svd(grid, budget, tol),
    }
}

fn holdout_range(grid: &SampleGrid, used: usize) -> std::ops::Range<usize> {
    let n = grid.len();
    let k = (n / 4).max(32).min(n.saturating_sub(used));
    n - k..n
}

fn check_sample_count(grid: &SampleGrid, ncols: usize) -> Result<()> {
    if grid.len() < 2 * ncols {
        return Err(Error::Precondition(format!(
            "{} samples; at least {} (twice the unknowns) are required",
            grid.len(),
            2 * ncols
        )));
    }
    Ok(())
}

fn detect_modular(grid: &SampleGrid, budget: DegreeBudget, tol: f64, opts: DetectOptions) -> Result<Detection> {
    let exact = exact_of(grid)?;
    let nvars = grid.nvars();
    let mut notes = Vec::new();
    for d_y in 1..=budget.d_y_max {
        let (dt_lo, predicted) = match opts.line {
            Some(line) => match min_line_degree(line, d_y, budget.dt_max)? {
                Some((k, degs)) => (k, Some(degs)),
                None => {
                    notes.push(format!("dY = {d_y}: no relation on the line with dt <= {}", budget.dt_max));
                    continue;
                }
            },
            None => (0, None),
        };
        // Coefficient degrees on a generic line equal the total degrees of
        // the coefficients, so try that graded support before dense cells.
        if let Some(degs) = predicted.filter(|d| d.iter().any(|&k| k < dt_lo)) {
            let support = graded_support(nvars, &degs);
            if let Some(c) = try_support(grid, exact, &support, d_y, tol, &mut notes)? {
                return Ok(Detection::Found(Box::new(c)));
            }
        }
        for dt in dt_lo..=budget.dt_max {
            let support = dense_support(nvars, d_y, dt);
            if let Some(c) = try_support(grid, exact, &support, d_y, tol, &mut notes)? {
                return Ok(Detection::Found(Box::new(c)));
            }
        }
    }
    Ok(Detection::NotFound { budget, notes })
}

fn try_support(
    grid: &SampleGrid,
    exact: &ExactSamples,
    support: &Support,
    d_y: usize,
    tol: f64,
    notes: &mut Vec<String>,
) -> Result<Option<MinimalPolynomialCandidate>> {
    let ncols = support.len();
    check_sample_count(grid, ncols)?;
    let degs: Vec<usize> = (0..=d_y)
        .map(|j| support.iter().filter(|(_, k)| *k == j).map(|(a, _)| a.iter().sum::<u32>() as usize).max().unwrap_or(0))
        .collect();
    let label = format!("dY = {d_y}, coefficient degrees {degs:?}");
    let basis = modular_cell(exact, support)?;
    if basis.is_empty() {
        return Ok(None);
    }
    let mut warnings = Vec::new();
    if basis.len() > 1 {
        warnings.push(format!("nullspace has dimension {}", basis.len()));
    }
    let Some(ints) = modular::reconstruct_integer_vector(&basis[0], MERSENNE_61) else {
        notes.push(format!("{label}: coefficient reconstruction failed"));
        return Ok(None);
    };
    let used = ncols + EXTRA_ROWS;
    if !exact_check(exact, used..grid.len(), support, &ints) {
        notes.push(format!("{label}: relation fails the independent prime check"));
        return Ok(None);
    }
    let cand = build_candidate(grid, support, &ints, exact.scale, used, tol, warnings)?;
    if cand.is_none() {
        notes.push(format!("{label}: exact relation exceeds the float holdout tolerance"));
    }
    Ok(cand)
}

/// Checks the integer relation at the given samples modulo `CHECK_PRIME`.
fn exact_check(exact: &ExactSamples, rows: std::ops::Range<usize>, support: &Support, ints: &[BigInt]) -> bool {
    let field = Field::new(CHECK_PRIME);
    let coeffs: Vec<u64> = ints.iter().map(|c| field.from_bigint(c)).collect();
    let ncols = coeffs.len();
    let n = rows.len();
    let Some(m) = modular_rows(&field, exact, rows, support) else {
        return false;
    };
    (0..n).all(|r| {
        let row = &m[r * ncols..(r + 1) * ncols];
        row.iter().zip(&coeffs).fold(0, |acc, (&a, &c)| field.mul_add(acc, a, c)) == 0
    })
}

#[allow(clippy::too_many_arguments)]
fn build_candidate(
    grid: &SampleGrid,
    support: &Support,
    ints: &[BigInt],
    scale: f64,
    used: usize,
    tol: f64,
    warnings: Vec<String>,
) -> Result<Option<MinimalPolynomialCandidate>> {
    let mut integer_coeffs = Vec::new();
    let mut terms = Vec::new();
    for ((alpha, j), c) in support.iter().zip(ints) {
        if c.is_zero() {
            continue;
        }
        integer_coeffs.push((alpha.clone(), *j, c.clone()));
        // Relation in f = scale * g: coefficient of f^j is c * scale^{-j}.
        let cf = c.to_f64().unwrap_or(f64::INFINITY) * scale.powi(-(*j as i32));
        terms.push(Term { alpha: alpha.clone(), j: *j, c: cf });
    }
    let norm = terms.iter().map(|t| t.c * t.c).sum::<f64>().sqrt();
    if !(norm.is_finite() && norm > 0.0) {
        return Ok(None);
    }
    terms.iter_mut().for_each(|t| t.c /= norm);
    let d_y_actual = terms.iter().map(|t| t.j).max().unwrap_or(0);
    let (total_degree, dt) = MinimalPolynomialCandidate::degrees(&terms, &grid.weights);

    let (condition, tiny) = singular_gap(&float_design(grid, 0..used.min(grid.len()), support));
    let mut warnings = warnings;
    if tiny > 1 {
        warnings.push(format!("float design is numerically rank deficient by {tiny}; the exact nullspace decides"));
    }
    if condition.is_some_and(|g| g > 0.1) {
        warnings.push("singular-value gap below 10x".into());
    }
    let mut cand = MinimalPolynomialCandidate {
        variables: grid.variables.clone(),
        weights: grid.weights.clone(),
        d_y: d_y_actual,
        dt,
        coeffs: terms,
        integer_coeffs: Some(integer_coeffs),
        total_degree,
        rational_degree: None,
        residual: f64::NAN,
        condition,
        method: DetectionMethod::Modular,
        warnings,
    };
    cand.rational_degree = rational_degree(&cand);
    let holdout = grid.select(holdout_range(grid, used));
    let report = verify_relation(&cand, &holdout, tol)?;
    cand.residual = report.max;
    Ok(report.accepted.then_some(cand))
}

fn detect_svd(grid: &SampleGrid, budget: DegreeBudget, tol: f64) -> Result<Detection> {
    let nvars = grid.nvars();
    let mut notes = Vec::new();
    for d_y in 1..=budget.d_y_max {
        for dt in 0..=budget.dt_max {
            let support = dense_support(nvars, d_y, dt);
            let ncols = support.len();
            check_sample_count(grid, ncols)?;
            let hold = holdout_range(grid, ncols);
            let train = 0..hold.start;
            let mut a = float_design(grid, train, &support);
            let scales = linalg::scale_columns(&mut a);
            let svd = a.svd(false, true);
            let vt = svd.v_t.as_ref().expect("requested");
            let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
            order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
            let last = *order.last().expect("nonempty");
            let gap = if order.len() >= 2 {
                svd.singular_values[last] / svd.singular_values[order[order.len() - 2]]
            } else {
                0.0
            };
            if !(gap < GAP_RATIO) {
                continue;
            }
            let mut terms: Vec<Term> = (0..ncols)
                .map(|k| Term { alpha: support[k].0.clone(), j: support[k].1, c: vt[(last, k)] / scales[k] })
                .collect();
            let cmax = terms.iter().fold(0.0f64, |m, t| m.max(t.c.abs()));
            terms.retain(|t| t.c.abs() > 1e-9 * cmax);
            let norm = terms.iter().map(|t| t.c * t.c).sum::<f64>().sqrt();
            terms.iter_mut().for_each(|t| t.c /= norm);
            let (total_degree, dt_eff) = MinimalPolynomialCandidate::degrees(&terms, &grid.weights);
            let mut warnings = Vec::new();
            if gap > 0.1 {
                warnings.push(format!("singular-value gap only {:.2}x", 1.0 / gap));
            }
            let mut cand = MinimalPolynomialCandidate {
                variables: grid.variables.clone(),
                weights: grid.weights.clone(),
                d_y: terms.iter().map(|t| t.j).max().unwrap_or(0),
                dt: dt_eff,
                coeffs: terms,
                integer_coeffs: None,
                total_degree,
                rational_degree: None,
                residual: f64::NAN,
                condition: Some(gap),
                method: DetectionMethod::Svd,
                warnings,
            };
            cand.rational_degree = rational_degree(&cand);
            let report = verify_relation(&cand, &grid.select(hold), tol)?;
            cand.residual = report.max;
            if report.accepted {
                return Ok(Detection::Found(Box::new(cand)));
            }
            notes.push(format!("(dY, dt) = ({d_y}, {dt}): holdout residual {:.3e}", report.max));
        }
    }
    Ok(Detection::NotFound { budget, notes })
}

/// Lowest `dY <= d_y_max` with a relation on `line`, and the coefficient
/// degrees of that line relation.
pub fn line_prediction(line: &SampleGrid, budget: DegreeBudget) -> Result<Option<(usize, Vec<usize>)>> {
    for d_y in 1..=budget.d_y_max {
        if let Some((_, degs)) = min_line_degree(line, d_y, budget.dt_max)? {
            return Ok(Some((d_y, degs)));
        }
    }
    Ok(None)
}

/// Samples needed for the predicted support: twice its unknowns, plus a
/// holdout of at least 32.
pub fn predicted_sample_count(nvars: usize, degs: &[usize]) -> usize {
    let cols = graded_support(nvars, degs).len();
    2 * cols + 64
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyDetection {
    pub detection: Detection,
    pub samples: usize,
    pub line_samples: usize,
}

/// Detection on an exact family, with the 2-D grid sized from a line
/// restriction. `scale` multiplies every sample (the detected degrees must
/// not depend on it).
pub fn detect_family(family: KernelFamily, budget: DegreeBudget, tol: f64, seed: u64, scale: f64) -> Result<FamilyDetection> {
    family.validate()?;
    let line_samples = 2 * (budget.dt_max + 1) * (budget.d_y_max + 1) + 64;
    let line = exact_line_grid(family, line_samples, seed)?;
    let nvars = family.variables().len();
    let Some((_, degs)) = line_prediction(&line, budget)? else {
        return Ok(FamilyDetection {
            detection: Detection::NotFound {
                budget,
                notes: vec![format!("no relation on a random line within dY <= {}, dt <= {}", budget.d_y_max, budget.dt_max)],
            },
            samples: 0,
            line_samples,
        });
    };
    let samples = predicted_sample_count(nvars, &degs);
    let mut grid = exact_grid(family, samples, seed.wrapping_add(1))?;
    let mut line = line;
    if scale != 1.0 {
        grid = grid.scaled(scale)?;
        line = line.scaled(scale)?;
    }
    let detection = detect_min_polynomial(&grid, budget, tol, DetectOptions { line: Some(&line) })?;
    Ok(FamilyDetection { detection, samples, line_samples })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DegreeReport {
    pub d: usize,
    pub total_degree: Option<usize>,
    pub type_max: u32,
    pub inequality_holds: bool,
    pub equality: bool,
}

/// Checks `max r <= 2d`.
pub fn check_type_degree_inequality(d: usize, total_degree: Option<usize>, types: &TypeReport) -> Result<DegreeReport> {
    let type_max = types.max_type;
    let bound = 2 * d as u64;
    let report = DegreeReport {
        d,
        total_degree,
        type_max,
        inequality_holds: type_max as u64 <= bound,
        equality: type_max as u64 == bound,
    };
    if !report.inequality_holds {
        return Err(Error::TheoremViolation(format!("max type {type_max} exceeds twice the algebraic degree {d}")));
    }
    Ok(report)
}
