//! Acceptance criteria 1 to 8, one PASS/FAIL line each. Expected values are
//! computed here from closed forms, independently of the library routines
//! under test. Runs without the libtest harness so the lines always print.

use std::f64::consts::PI;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use bergman_core::algebraic::{self, exact_grid, verify_relation, DegreeBudget, Detection, KernelFamily, DEFAULT_TOL};
use bergman_core::asymptotics::{fit_blowup_exponent, fit_fractional_powers, ray_report, sample_along_ray, snap_type, BoundaryRay};
use bergman_core::ellipsoid::{self, AffineMap, ConvexBody, EllipsoidParams};
use bergman_core::kernel::{cross_oracle_grid, DiagonalPoint, EggDomain};
use bergman_core::verify::{self, Family};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(failures: Vec<String>, summary: String) -> Outcome {
    if failures.is_empty() {
        Outcome { ok: true, detail: summary }
    } else {
        Outcome { ok: false, detail: failures.join("; ") }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

const INWARD_Z: [f64; 4] = [-1.0, 0.0, 0.0, 0.0];
const INWARD_W: [f64; 4] = [0.0, 0.0, -1.0, 0.0];

fn egg(s: u32) -> EggDomain {
    EggDomain::new(s as f64).unwrap()
}

fn slope_at(dom: &EggDomain, xi: DiagonalPoint, dir: [f64; 4]) -> Result<f64, String> {
    let ray = BoundaryRay::new(dom, xi, dir, 1e-4, 1e-1).map_err(|e| e.to_string())?;
    let samples = sample_along_ray(dom, &ray, 32).map_err(|e| e.to_string())?;
    fit_blowup_exponent(&samples).map(|f| f.slope).map_err(|e| e.to_string())
}

fn criterion_1() -> Outcome {
    let mut fails = Vec::new();
    let mut worst = 0.0f64;
    for s in 1..=5u32 {
        let expect = (s as f64 + 1.0) / (s as f64 * PI * PI);
        let dom = egg(s);
        let closed = dom.kernel_closed_reduced(0.0, 0.0).unwrap();
        let series = dom.kernel_series_reduced(0.0, 0.0, 1e-12).unwrap().value;
        let e = rel(closed, expect).max(rel(series, closed));
        worst = worst.max(e);
        if rel(closed, expect) > 1e-14 || rel(series, closed) > 1e-8 {
            fails.push(format!("s={s}: closed {closed}, series {series}, expected {expect}"));
        }
    }
    let ball = EggDomain::ball().kernel_closed_reduced(0.0, 0.0).unwrap();
    if rel(ball, 2.0 / (PI * PI)) > 1e-15 {
        fails.push(format!("ball {ball}"));
    }
    outcome(fails, format!("s=1..5 origin values, max rel {worst:.1e}"))
}

fn criterion_2() -> Outcome {
    let mut fails = Vec::new();
    let mut worst = 0.0f64;
    for s in 1..=3u32 {
        let rep = cross_oracle_grid(&egg(s), 20, 0.9, 1e-12).unwrap();
        worst = worst.max(rep.max_rel_err);
        if rep.rows.len() != 400 || rep.max_rel_err > 1e-6 {
            fails.push(format!("s={s}: {} points, max rel {:.3e}", rep.rows.len(), rep.max_rel_err));
        }
        if let Some(r) = rep.rows.iter().find(|r| r.x + r.y.powi(s as i32) > 0.9 + 1e-12) {
            fails.push(format!("s={s}: point ({}, {}) outside x + y^s <= 0.9", r.x, r.y));
        }
    }
    outcome(fails, format!("3 x 400 points, max rel {worst:.1e}"))
}

fn criterion_3() -> Outcome {
    let mut fails = Vec::new();
    let mut worst = 0.0f64;
    for s in 1..=5u32 {
        let dom = egg(s);
        for (xi, dir, m_exp, r_exp) in [
            (DiagonalPoint::real(1.0, 0.0), INWARD_Z, -2.0 - 1.0 / s as f64, 2 * s),
            (DiagonalPoint::real(0.0, 1.0), INWARD_W, -3.0, 2),
        ] {
            match slope_at(&dom, xi, dir) {
                Ok(m) => {
                    worst = worst.max((m - m_exp).abs());
                    let r = snap_type(-2.0 / (m + 2.0), 0.1);
                    if (m - m_exp).abs() > 0.05 || r != Some(r_exp) {
                        fails.push(format!("s={s} at {:?}: slope {m:.5}, type {r:?}, expected {m_exp:.5}/{r_exp}", xi.coords()));
                    }
                }
                Err(e) => fails.push(format!("s={s}: {e}")),
            }
        }
    }
    outcome(fails, format!("10 rays, max slope error {worst:.1e}"))
}

fn criterion_4() -> Outcome {
    let mut fails = Vec::new();
    let mut notes = Vec::new();
    let budget = DegreeBudget::default();
    let cases = [
        ("ball", KernelFamily::BallReal, 1usize, Some(7usize), Some(6usize)),
        ("egg s=2", KernelFamily::EggReduced { s: 2 }, 2, None, None),
        ("egg s=3", KernelFamily::EggReduced { s: 3 }, 3, None, None),
    ];
    for (name, fam, d, tot, rat) in cases {
        let fd = algebraic::detect_family(fam, budget, DEFAULT_TOL, 11, 1.0).unwrap();
        let Some(c) = fd.detection.candidate() else {
            fails.push(format!("{name}: no relation"));
            continue;
        };
        let holdout = exact_grid(fam, 300, 0xabcdef).unwrap();
        let res = verify_relation(c, &holdout, DEFAULT_TOL).unwrap();
        if c.d_y != d || tot.is_some_and(|t| c.total_degree != t) || (rat.is_some() && c.rational_degree != rat) {
            fails.push(format!("{name}: d={} total={} rational={:?}", c.d_y, c.total_degree, c.rational_degree));
        }
        if c.residual > DEFAULT_TOL || !res.accepted {
            fails.push(format!("{name}: holdout residual {:.3e} / {:.3e}", c.residual, res.max));
        }
        notes.push(format!("{name} d={} total={} res={:.0e}", c.d_y, c.total_degree, res.max));
    }
    for s in [2u32, 3] {
        let low = DegreeBudget { d_y_max: s as usize - 1, dt_max: 30 };
        let fd = algebraic::detect_family(KernelFamily::EggReduced { s }, low, DEFAULT_TOL, 11, 1.0).unwrap();
        if !matches!(fd.detection, Detection::NotFound { .. }) {
            fails.push(format!("egg s={s}: relation found with dY <= {}", s - 1));
        }
    }
    outcome(fails, format!("{}; dY=s-1 fails for s=2,3", notes.join(", ")))
}

fn criterion_5() -> Outcome {
    let mut fails = Vec::new();
    for s in 1..=5u32 {
        match verify::run(&Family::Egg { s }, 1) {
            Ok(r) => {
                let (Some(d), Some(t)) = (r.d, r.max_type) else {
                    fails.push(format!("s={s}: incomplete report {:?}", r.failed));
                    continue;
                };
                if t as usize != 2 * d || d != s as usize || r.exit_code() != 0 {
                    fails.push(format!("s={s}: d={d}, max r={t}, failed {:?}", r.failed));
                }
            }
            Err(e) => fails.push(format!("s={s}: {e}")),
        }
        let status = Command::new(env!("CARGO_BIN_EXE_bergman"))
            .args(["verify", "--egg", &s.to_string()])
            .output()
            .map(|o| o.status.code());
        if !matches!(status, Ok(Some(0))) {
            fails.push(format!("s={s}: verify command exited {status:?}"));
        }
    }
    outcome(fails, "max r = 2d for s=1..5, verify exits 0".into())
}

fn criterion_6() -> Outcome {
    let mut fails = Vec::new();
    let mut worst = 0.0f64;
    let mut balls = 0;
    for case in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + case);
        let n = 1 + (case % 3) as usize;
        let params = if case % 10 == 0 {
            balls += 1;
            EllipsoidParams::ball(n)
        } else {
            ellipsoid::random_params(n, 0.49, &mut rng)
        };
        let psi = AffineMap::random_general(n, &mut rng);
        let inv = psi.inverse().unwrap();
        let lambda0 = rng.random_range(0.5..2.0);
        let q = params.defining_poly().compose_affine(&inv.m, &inv.xi).scaled(lambda0);
        match ellipsoid::normalize_ellipsoid(&q) {
            Ok(nrm) => {
                let err = nrm.params.a().iter().zip(params.a()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                worst = worst.max(err);
                if err > 1e-8 {
                    fails.push(format!("case {case}: A {:?} recovered as {:?}", params.a(), nrm.params.a()));
                }
                if case % 10 == 0 {
                    // Normal form of a ball image is the ball itself.
                    let back = q.compose_affine(&nrm.phi.inverse().unwrap().m, &nrm.phi.inverse().unwrap().xi).scaled(nrm.lambda);
                    let dev = back.max_coefficient_diff(&EllipsoidParams::ball(n).defining_poly());
                    if dev > 1e-8 {
                        fails.push(format!("case {case}: ball normal form deviates by {dev:.3e}"));
                    }
                }
            }
            Err(e) => fails.push(format!("case {case}: {e}")),
        }
    }
    outcome(fails, format!("200 cases ({balls} balls), max |dA| {worst:.1e}"))
}

fn criterion_7() -> Outcome {
    let mut fails = Vec::new();
    let mut min_slack = f64::INFINITY;
    let mut worst_chord = 0.0f64;
    let mut max_eps = 0.0f64;
    for case in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(5000 + case);
        let n = 1 + (case % 3) as usize;
        let (params, map, eps) = loop {
            let params = ellipsoid::random_params(n, 0.2, &mut rng);
            let map = AffineMap::random_near_identity(n, 0.05, 0.05, &mut rng);
            let body = ConvexBody::new(params.clone(), map.clone()).unwrap();
            let est = ellipsoid::hausdorff_to_ball(&body, ellipsoid::DEFAULT_DIRECTIONS, ellipsoid::DEFAULT_REFINE_STEPS).unwrap();
            if est.epsilon < 0.5 {
                break (params, map, est.epsilon);
            }
        };
        max_eps = max_eps.max(eps);
        let bound = eps / (1.0 + eps * eps);
        for &a in params.a() {
            min_slack = min_slack.min(bound - a);
        }
        if let Err(e) = ellipsoid::check_hausdorff_bound(&params, &map) {
            fails.push(format!("case {case}: {e}"));
        }
        let body = ConvexBody::new(params.clone(), map).unwrap();
        if let Err(e) = ellipsoid::check_containment(&body, eps + 1e-6, case) {
            fails.push(format!("case {case}: {e}"));
        }
        let an = params.a()[n - 1];
        let e = ConvexBody::ellipsoid(params.clone());
        let mut ax = DVector::zeros(2 * n);
        ax[2 * n - 2] = 1.0;
        let cx = e.longest_chord(&ax).unwrap();
        ax[2 * n - 2] = 0.0;
        ax[2 * n - 1] = 1.0;
        let cy = e.longest_chord(&ax).unwrap();
        let dc = (cx - 2.0 / (1.0 + 2.0 * an).sqrt()).abs().max((cy - 2.0 / (1.0 - 2.0 * an).sqrt()).abs());
        worst_chord = worst_chord.max(dc);
        if dc > 1e-9 {
            fails.push(format!("case {case}: chord deviation {dc:.3e}"));
        }
    }
    outcome(fails, format!("100 cases, max eps {max_eps:.3}, min bound slack {min_slack:.2e}, chord err {worst_chord:.0e}"))
}

fn criterion_8() -> Outcome {
    let mut fails = Vec::new();

    // Synthetic sum of p_j(t) t^{j/r} (c_j + beta_j(t)); the t^{j/r}
    // coefficient for j < r is p_j(0) c_j.
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for trial in 0..20 {
        let r = 2 + trial % 4;
        let t = bergman_core::asymptotics::geometric_grid(1e-4, 1e-1, 64);
        let parts: Vec<(f64, f64, f64, f64)> = (0..r)
            .map(|_| (rng.random_range(0.5..2.0), rng.random_range(-1.0..1.0), rng.random_range(-2.0f64..2.0), rng.random_range(-1.0..1.0)))
            .map(|(p0, p1, c, b)| (p0, p1, if c.abs() < 0.2 { 1.0 } else { c }, b))
            .collect();
        let g: Vec<f64> = t
            .iter()
            .map(|&t| {
                parts
                    .iter()
                    .enumerate()
                    .map(|(j, &(p0, p1, c, b))| (p0 + p1 * t) * t.powf(j as f64 / r as f64) * (c + b * t))
                    .sum()
            })
            .collect();
        let fit = fit_fractional_powers(&t, &g, r as u32, 3 * r - 1, &[]).unwrap();
        for (j, &(p0, _, c, _)) in parts.iter().enumerate() {
            let e = (fit.powers[j] - p0 * c).abs();
            worst = worst.max(e);
            if e > 1e-4 {
                fails.push(format!("trial {trial}: coefficient {j} off by {e:.3e}"));
            }
        }
    }
    let t = bergman_core::asymptotics::geometric_grid(1e-4, 1e-1, 64);
    let g: Vec<f64> = t
        .iter()
        .map(|&t| (1.0 + t).powi(2) * t.powf(1.0 / 3.0) - (t.powf(1.0 / 3.0) + 2.0 * t.powf(4.0 / 3.0) + t.powf(7.0 / 3.0)))
        .collect();
    let zero = fit_fractional_powers(&t, &g, 3, 8, &[]).unwrap();
    let zmax = zero.powers.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if zmax > 1e-8 {
        fails.push(format!("enforced-zero fit has coefficient {zmax:.3e}"));
    }

    // Detected d under value scaling.
    for (fam, d) in [(KernelFamily::BallReal, 1usize), (KernelFamily::EggReduced { s: 2 }, 2)] {
        for lambda in [0.5, 2.0, 10.0] {
            let got = algebraic::detect_family(fam, DegreeBudget::default(), DEFAULT_TOL, 3, lambda)
                .ok()
                .and_then(|f| f.detection.candidate().map(|c| c.d_y));
            if got != Some(d) {
                fails.push(format!("{fam:?} scaled by {lambda}: d = {got:?}"));
            }
        }
    }

    // Leading coefficient on kernel rays.
    let mut rays = 0;
    let mut min_a0 = f64::INFINITY;
    for s in 1..=5u32 {
        let dom = egg(s);
        let b = 0.64f64.powf(1.0 / (2.0 * s as f64));
        let normal = [-1.2, 0.0, -2.0 * s as f64 * b.powi(2 * s as i32 - 1), 0.0];
        for (xi, dir) in [
            (DiagonalPoint::real(1.0, 0.0), INWARD_Z),
            (DiagonalPoint::real(1.0, 0.0), [-1.0, 0.3, 0.2, -0.1]),
            (DiagonalPoint::real(0.0, 1.0), INWARD_W),
            (DiagonalPoint::real(0.0, 1.0), [0.1, 0.2, -1.0, 0.3]),
            (DiagonalPoint::real(0.6, b), normal),
        ] {
            let res = BoundaryRay::new(&dom, xi, dir, 1e-4, 1e-1)
                .and_then(|ray| sample_along_ray(&dom, &ray, 32))
                .and_then(|smp| ray_report(&smp, 4, false, 0.1));
            match res {
                Ok(rep) => {
                    rays += 1;
                    min_a0 = min_a0.min(rep.a[0]);
                    if rep.a[0].is_nan() || rep.a[0] <= 0.0 {
                        fails.push(format!("s={s} ray {:?}+t{dir:?}: a0 = {}", xi.coords(), rep.a[0]));
                    }
                }
                Err(e) => fails.push(format!("s={s} ray {:?}+t{dir:?}: {e}", xi.coords())),
            }
        }
    }
    outcome(fails, format!("Puiseux max err {worst:.1e}, zero case {zmax:.0e}, d scale-invariant, {rays} rays min a0 {min_a0:.3e}"))
}

type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        (1, "origin kernel values", Duration::from_secs(1), criterion_1),
        (2, "cross-oracle grid", Duration::from_secs(30), criterion_2),
        (3, "blow-up exponents and types", Duration::from_secs(5), criterion_3),
        (4, "degree detection", Duration::from_secs(60), criterion_4),
        (5, "type/degree inequality", Duration::from_secs(10), criterion_5),
        (6, "normalization round trip", Duration::from_secs(30), criterion_6),
        (7, "Hausdorff bounds and chords", Duration::from_secs(30), criterion_7),
        (8, "property suites", Duration::from_secs(30), criterion_8),
    ];
    let mut all = true;
    for (k, name, limit, f) in criteria {
        let start = Instant::now();
        let out = f();
        let took = start.elapsed();
        let ok = out.ok && took < limit;
        all &= ok;
        println!(
            "criterion {k} {}: {name}: {} [{:.2} s, limit {} s]",
            if ok { "PASS" } else { "FAIL" },
            out.detail,
            took.as_secs_f64(),
            limit.as_secs()
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
