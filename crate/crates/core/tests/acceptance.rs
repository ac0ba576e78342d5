//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;
use std::time::{Duration, Instant};

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use resplit::certificate::{
    build_family_system, build_ppxa_system, build_ryu3_system, family_coefficients, impossibility_probe, int, rat,
    random_no_lifting_candidate, rowspace_implies, verify_encoding, EncodingTargets, RatMatrix, Rational,
};
use resplit::counterexamples::{
    build_rotation_pair, closed_form_growth, predicted_growth, rotation_growth_row, theta_range_iterates, RotationPair,
};
use resplit::engine::{compute_reference, iterate, IterationConfig, Metrics, Status};
use resplit::experiments::{generate, run_experiment, ProblemKind, ProblemParams};
use resplit::operators::{project_simplex, tv_pair_prox};
use resplit::splittings::{step_family, FamilyParams, Ryu3Params};
use resplit::{LiftedPoint, Method, MonotoneOp, Splitting, Vector};

use common::{gaussian_vector, random_affine, random_point};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn ryu3_encoding() -> Verdict {
    let start = Instant::now();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(101);
    let cfg = IterationConfig::new(20_000, 1e-9);
    let mut unconverged = 0;
    let mut worst_sum = 0.0f64;
    let mut worst_iters = 0;
    for _ in 0..100 {
        let ops: Vec<Arc<MonotoneOp>> = (0..3).map(|_| Arc::new(random_affine(&mut rng, 10))).collect();
        let s = Splitting::new(Method::Ryu3(Ryu3Params { alpha: 1.0, theta: 0.5 }), ops.clone()).unwrap();
        let out = iterate(|z| s.step(z), s.initial_point(), &cfg, Metrics::default()).unwrap();
        if out.status != Status::Converged {
            unconverged += 1;
        }
        worst_iters = worst_iters.max(out.iterations);
        let x = &out.solution;
        let sum = ops.iter().map(|o| o.forward(x).unwrap()).fold(Vector::zeros(10), |acc, v| acc + v);
        worst_sum = worst_sum.max(sum.norm());
    }
    let t = start.elapsed();
    verdict(
        unconverged == 0 && worst_sum <= 1e-6 && within(t, 10.0),
        format!(
            "unconverged {unconverged}/100, max iterations {worst_iters}, max ||A+B+C at Sz|| {worst_sum:.2e}, {:.2}s",
            t.as_secs_f64()
        ),
    )
}

fn ryu3_nonexpansive() -> Verdict {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(202);
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..500 {
        let d = rng.random_range(1..=6);
        let ops: Vec<Arc<MonotoneOp>> = (0..3).map(|_| Arc::new(random_affine(&mut rng, d))).collect();
        let s = Splitting::new(Method::Ryu3(Ryu3Params { alpha: rng.random_range(0.1..3.0), theta: 1.0 }), ops)
            .unwrap();
        for _ in 0..10 {
            let y = random_point(&mut rng, 2, d);
            let z = random_point(&mut rng, 2, d);
            let excess = s.step(&y).unwrap().image.distance(&s.step(&z).unwrap().image) - y.distance(&z);
            worst = worst.max(excess);
            if excess > 1e-10 {
                violations += 1;
            }
        }
    }
    verdict(violations == 0, format!("violations {violations}/5000, max excess {worst:.2e}"))
}

fn drs_reduction() -> Verdict {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(303);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let d = rng.random_range(1..=5);
        let a = Arc::new(random_affine(&mut rng, d));
        let c = Arc::new(random_affine(&mut rng, d));
        let alpha = rng.random_range(0.1..3.0);
        let theta = rng.random_range(0.05..1.0);
        let s = Splitting::new(
            Method::Ryu3(Ryu3Params { alpha, theta }),
            vec![a.clone(), Arc::new(MonotoneOp::zero(d).unwrap()), c.clone()],
        )
        .unwrap();
        let z = random_point(&mut rng, 2, d);
        let lifted = s.step(&z).unwrap().image;
        let drs = step_family(&FamilyParams::drs(alpha, theta), &a, &c, z.block(0)).unwrap().image;
        worst = worst.max((lifted.block(0) - drs).amax());
    }
    verdict(worst <= 1e-12, format!("max block-1 deviation {worst:.2e} over 1000 inputs"))
}

fn rotation_divergence() -> Verdict {
    let start = Instant::now();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(404);
    let cfg = IterationConfig::new(1000, 1e-9);
    let (mut worst_err, mut worst_closed, mut min_growth) = (0.0f64, 0.0f64, f64::INFINITY);
    let mut equal_failures = 0;
    for _ in 0..50 {
        let alpha = rng.random_range(0.25..4.0);
        let beta = loop {
            let b: f64 = rng.random_range(0.25..4.0);
            if (b - alpha).abs() > 0.05 {
                break b;
            }
        };
        let omega = rng.random_range(0.05..FRAC_PI_2 - 0.05);
        let theta = rng.random_range(0.05..1.95);
        let p = RotationPair::new(alpha, beta, omega, 2).unwrap();
        let row = rotation_growth_row(&p, theta, 100).unwrap();
        worst_err = worst_err.max(row.error);
        worst_closed = worst_closed.max((row.measured - closed_form_growth(&p, theta)).abs());
        min_growth = min_growth.min(row.measured);

        let same = RotationPair::new(alpha, alpha, omega, 2).unwrap();
        let (a, b) = build_rotation_pair(&same).unwrap();
        let s = Splitting::new(Method::Family(same.family(theta)), vec![Arc::new(a), Arc::new(b)]).unwrap();
        let z0 = LiftedPoint::single(DVector::from_vec(vec![1.0, 0.5]));
        let out = iterate(|z| s.step(z), z0, &cfg, Metrics::default()).unwrap();
        if out.status != Status::Converged || out.final_residual > 1e-9 {
            equal_failures += 1;
        }
    }
    let quarter = RotationPair::new(1.0, 2.0, std::f64::consts::FRAC_PI_4, 2).unwrap();
    let example = rotation_growth_row(&quarter, 1.0, 100).unwrap();
    let t = start.elapsed();
    verdict(
        worst_err <= 1e-8 && min_growth > 1.0 && equal_failures == 0 && within(t, 5.0),
        format!(
            "max |measured - published formula| {worst_err:.3e}, max |measured - closed form without 1/2| \
             {worst_closed:.1e}, min growth {min_growth:.6}, equal-step runs not converged {equal_failures}/50, \
             (alpha, beta, omega, theta) = (1, 2, pi/4, 1): published {:.6} measured {:.6}, {:.2}s",
            predicted_growth(&quarter, 1.0),
            example.measured,
            t.as_secs_f64()
        ),
    )
}

fn theta_range() -> Verdict {
    let mut worst = 0.0f64;
    let mut regimes_ok = true;
    for &theta in &[0.1, 0.5, 1.0, 1.5, 1.9, 2.0, 2.5, 3.0] {
        let z0 = 1.25;
        let it = theta_range_iterates(theta, z0, 40).unwrap();
        for (k, &zk) in it.iter().enumerate() {
            let exact = (1.0 - theta).powi(k as i32) * z0;
            worst = worst.max((zk - exact).abs() / exact.abs().max(1.0));
        }
        let (first, last) = (it[1].abs(), it[40].abs());
        regimes_ok &= if theta < 2.0 {
            last <= first && last < z0
        } else if theta == 2.0 {
            it.iter().enumerate().all(|(k, &z)| z == if k % 2 == 0 { z0 } else { -z0 })
        } else {
            last > first
        };
    }
    verdict(worst <= 1e-14 && regimes_ok, format!("max relative deviation {worst:.1e}, regimes ok {regimes_ok}"))
}

fn certificates() -> Verdict {
    let start = Instant::now();
    let certify = |sys| verify_encoding(&sys, &EncodingTargets::standard(&sys).unwrap()).unwrap().all_hold();

    let members = [
        (int(1), int(1), int(1), int(0)),
        (int(2), rat(3, 5), rat(1, 2), rat(1, 3)),
        (rat(1, 7), int(5), int(-3), int(2)),
        (int(3), int(3), rat(7, 4), rat(-5, 2)),
    ];
    let family_ok = members.iter().all(|(a, b, t, e)| certify(build_family_system(a, b, &family_coefficients(a, b, t, e)).unwrap()));

    let (alpha, beta) = (int(2), int(3));
    let base = family_coefficients(&alpha, &beta, &rat(1, 2), &rat(1, 3));
    let deltas = [int(1), int(-1), rat(1, 3), rat(-1, 3), int(7), int(-7)];
    let mut still_certified = Vec::new();
    for i in 0..8 {
        for d in &deltas {
            let mut t = base.clone();
            t[i] += d;
            if certify(build_family_system(&alpha, &beta, &t).unwrap()) {
                still_certified.push(format!("theta{}{:+}", i + 1, d));
            }
        }
    }

    let lifted_ok = certify(build_ryu3_system(&int(1), &rat(1, 2)).unwrap())
        && certify(build_ryu3_system(&rat(3, 2), &int(1)).unwrap())
        && certify(build_ppxa_system(&int(1), &[rat(1, 3), rat(1, 3), rat(1, 3)], &int(1)).unwrap())
        && certify(build_ppxa_system(&rat(2, 3), &[rat(1, 2), rat(1, 4), rat(1, 4)], &rat(3, 2)).unwrap());

    let mut rng = Xoshiro256PlusPlus::seed_from_u64(606);
    let both = (0..1000)
        .filter(|_| {
            let cand = random_no_lifting_candidate(&mut rng, 1).unwrap();
            impossibility_probe(&cand, true).unwrap().both()
        })
        .count();
    let t = start.elapsed();
    verdict(
        family_ok && still_certified.is_empty() && lifted_ok && both == 0 && within(t, 30.0),
        format!(
            "family members certified {family_ok}, perturbations still certified {}/48 {:?}, ryu3/ppxa certified \
             {lifted_ok}, probe both-implied {both}/1000, {:.2}s",
            still_certified.len(),
            still_certified,
            t.as_secs_f64()
        ),
    )
}

fn experiments() -> Verdict {
    let cfg = IterationConfig::new(10_000, 1e-9);
    let mut pass = true;
    let mut parts = Vec::new();
    for kind in [ProblemKind::DenoiseL1, ProblemKind::Portfolio, ProblemKind::PoissonTv] {
        let start = Instant::now();
        let mut worst_rel = 0.0f64;
        let mut latest_hit = 0;
        let mut missed = 0;
        for seed in [1, 2, 3] {
            let spec = generate(kind, &ProblemParams::default(), seed).unwrap();
            let methods: Vec<Method> = spec
                .default_methods()
                .into_iter()
                .filter(|m| matches!(m, Method::Ryu3(_) | Method::Ppxa(_)))
                .collect();
            let reference = compute_reference(&spec.splitting(methods[0]).unwrap(), &cfg).unwrap();
            let f_ref = spec.objective_finite(&reference);
            let runs = run_experiment(&spec, &methods, &cfg, Some(&reference), true).unwrap();
            let values: Vec<f64> = runs.iter().map(|r| r.objective.finite).collect();
            for (i, &f) in values.iter().enumerate() {
                worst_rel = worst_rel.max((f - f_ref).abs() / f_ref.abs());
                for &g in &values[i + 1..] {
                    worst_rel = worst_rel.max((f - g).abs() / f_ref.abs());
                }
            }
            for r in &runs {
                match r.outcome.trace.first_rel_change_below(1e-6) {
                    Some(k) if k < 10_000 => latest_hit = latest_hit.max(k),
                    _ => missed += 1,
                }
            }
        }
        let t = start.elapsed();
        pass &= worst_rel <= 1e-3 && missed == 0 && within(t, 120.0);
        parts.push(format!(
            "{}: max rel objective gap {worst_rel:.1e}, rel_change<1e-6 by iteration {latest_hit} (missed {missed}), {:.1}s",
            kind.name(),
            t.as_secs_f64()
        ));
    }
    verdict(pass, parts.join("; "))
}

fn det(m: &[Vec<Rational>]) -> Rational {
    // Laplace expansion along the first row
    if m.is_empty() {
        return int(1);
    }
    let mut total = int(0);
    for j in 0..m.len() {
        if m[0][j] == int(0) {
            continue;
        }
        let minor: Vec<Vec<Rational>> =
            m[1..].iter().map(|r| r.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, v)| v.clone()).collect()).collect();
        let term = &m[0][j] * det(&minor);
        if j % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n).filter(|s| s.count_ones() as usize == k).map(|s| (0..n).filter(|i| s >> i & 1 == 1).collect()).collect()
}

/// Rank as the size of the largest nonvanishing minor.
fn minor_rank(rows: &[Vec<Rational>]) -> usize {
    let (r, c) = (rows.len(), rows.first().map_or(0, Vec::len));
    for k in (1..=r.min(c)).rev() {
        for rs in subsets(r, k) {
            for cs in subsets(c, k) {
                let sub: Vec<Vec<Rational>> = rs.iter().map(|&i| cs.iter().map(|&j| rows[i][j].clone()).collect()).collect();
                if det(&sub) != int(0) {
                    return k;
                }
            }
        }
    }
    0
}

fn simplex_by_enumeration(z: &[f64]) -> Vec<f64> {
    let d = z.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for s in 1u32..1 << d {
        let support: Vec<usize> = (0..d).filter(|i| s >> i & 1 == 1).collect();
        let shift = (support.iter().map(|&i| z[i]).sum::<f64>() - 1.0) / support.len() as f64;
        let mut x = vec![0.0; d];
        for &i in &support {
            x[i] = z[i] - shift;
        }
        if x.iter().any(|&v| v < 0.0) {
            continue;
        }
        let dist: f64 = x.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
        if best.as_ref().is_none_or(|(bd, _)| dist < *bd) {
            best = Some((dist, x));
        }
    }
    best.expect("the vertex supports are always feasible").1
}

/// Prox of `t |x1 - x2|` by bisection on the derivative of the reduced
/// one-dimensional problem in `u = x1 - x2`.
fn tv_pair_by_bisection(z: (f64, f64), t: f64) -> (f64, f64) {
    let u0 = z.0 - z.1;
    // derivative of (u - u0)^2 / 4 + t |u|, one-sided at 0
    let right = |u: f64| (u - u0) / 2.0 + if u >= 0.0 { t } else { -t };
    let (mut lo, mut hi) = (-u0.abs() - 1.0, u0.abs() + 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if right(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let u = if (-u0 / 2.0 - t) <= 0.0 && (-u0 / 2.0 + t) >= 0.0 { 0.0 } else { 0.5 * (lo + hi) };
    let mean = 0.5 * (z.0 + z.1);
    (mean + u / 2.0, mean - u / 2.0)
}

fn oracles() -> Verdict {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(808);
    let mut rank_mismatch = 0;
    let mut implied_cases = 0;
    for _ in 0..10_000 {
        let (r, c) = (rng.random_range(1..=4), rng.random_range(2..=5));
        let rows: Vec<Vec<Rational>> =
            (0..r).map(|_| (0..c).map(|_| int(rng.random_range(-2..=2))).collect()).collect();
        let target: Vec<Rational> = if rng.random_bool(0.5) {
            let w: Vec<i64> = (0..r).map(|_| rng.random_range(-3..=3)).collect();
            (0..c).map(|j| rows.iter().zip(&w).map(|(row, &wi)| &row[j] * int(wi)).sum()).collect()
        } else {
            (0..c).map(|_| int(rng.random_range(-2..=2))).collect()
        };
        let mut stacked = rows.clone();
        stacked.push(target.clone());
        let brute = minor_rank(&stacked) == minor_rank(&rows);
        implied_cases += brute as usize;
        if brute != rowspace_implies(&RatMatrix::from_rows(rows).unwrap(), &target) {
            rank_mismatch += 1;
        }
    }

    let mut simplex_worst = 0.0f64;
    for _ in 0..1000 {
        let d = rng.random_range(1..=6);
        let z = gaussian_vector(&mut rng, d) * 2.0;
        let fast = project_simplex(&z);
        let slow = simplex_by_enumeration(z.as_slice());
        simplex_worst = simplex_worst.max(fast.iter().zip(&slow).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }

    let mut tv_worst = 0.0f64;
    for _ in 0..10_000 {
        let z = (rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        let t = rng.random_range(0.0..3.0);
        let (a, b) = (tv_pair_prox(z, t), tv_pair_by_bisection(z, t));
        tv_worst = tv_worst.max((a.0 - b.0).abs()).max((a.1 - b.1).abs());
    }

    verdict(
        rank_mismatch == 0 && simplex_worst <= 1e-12 && tv_worst <= 1e-10,
        format!(
            "rowspace mismatches {rank_mismatch}/10000 ({implied_cases} implied), simplex max deviation \
             {simplex_worst:.1e}, tv pair max deviation {tv_worst:.1e}"
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("ryu3 encoding on random affine triples", ryu3_encoding),
        ("ryu3 nonexpansive at theta = 1", ryu3_nonexpansive),
        ("ryu3 with B = 0 reduces to DRS", drs_reduction),
        ("rotation pair growth matches published formula", rotation_divergence),
        ("theta-range iterates (1 - theta)^k z0", theta_range),
        ("exact encoding certificates", certificates),
        ("experiment agreement on seeds 1-3", experiments),
        ("oracle equivalence", oracles),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        println!("{} {}. {name}: {}", if v.pass { "PASS" } else { "FAIL" }, i + 1, v.detail);
        failed += !v.pass as usize;
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
