//! Acceptance suite: one pass/fail line per criterion, nonzero exit if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use revmono::auction::myerson;
use revmono::curves::ironing_intervals;
use revmono::dist::{ProductDist, ValueDist};
use revmono::feasible::FeasibleSet;
use revmono::lab::fuzz::{Family, Fuzzer, Instance, GRID};
use revmono::lab::{self, Closeness};
use revmono::learn::{bernstein_radius, hellinger_sq, hellinger_sq_product, Setting};
use revmono::{opt_revenue, Result, TOL};

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { ok, detail: detail.into() })
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Result<Outcome>) -> Outcome {
    let start = Instant::now();
    let result = f();
    let elapsed = start.elapsed();
    match result {
        Ok(mut o) => {
            if let Some(limit) = limit {
                if elapsed > limit {
                    o.ok = false;
                    o.detail.push_str(&format!("; runtime {elapsed:.2?} exceeds {limit:?}"));
                }
            }
            o.detail.push_str(&format!(" [{elapsed:.2?}]"));
            o
        }
        Err(e) => Outcome {
            ok: false,
            detail: format!("error: {e} [{elapsed:.2?}]"),
        },
    }
}

fn grid_prior(n: usize) -> ProductDist {
    let values: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
    ProductDist::iid(ValueDist::new(&values, &[0.1; 10]).unwrap(), n).unwrap()
}

fn nonmonotone_gap() -> Result<Outcome> {
    let r = lab::run_nonmonotone(0.1)?;
    let design = r.get("revenue_design");
    let truth = r.get("revenue_true");
    let ok = (design - 0.605).abs() <= 1e-9 && (truth - 0.2).abs() <= 1e-9;
    outcome(ok, format!("M(D~) on D~ = {design:.12}, on D = {truth:.12}"))
}

fn copies_gap() -> Result<Outcome> {
    let r = lab::run_copies(4, 0, 0)?;
    let gap = r.get("gap");
    outcome((gap - 0.810).abs() <= 1e-9, format!("gap = {gap:.12}"))
}

fn ironing_golden() -> Result<Outcome> {
    // Uniform[0, 1] with weight 0.8 discretized at cell midpoints, plus an
    // atom of 0.2 at 1/2.
    let cells = 1000;
    let mut values: Vec<f64> = (0..cells).map(|i| (i as f64 + 0.5) / cells as f64).collect();
    let mut probs = vec![0.8 / cells as f64; cells];
    values.push(0.5);
    probs.push(0.2);
    let d = ValueDist::new(&values, &probs)?;
    let intervals = ironing_intervals(&d);
    let (lo, hi) = ((3.0 - 3f64.sqrt()) / 5.0, 0.6);
    let ok = intervals.len() == 1 && (intervals[0].0 - lo).abs() <= 2e-3 && (intervals[0].1 - hi).abs() <= 2e-3;
    outcome(ok, format!("intervals {intervals:?} vs ({lo:.6}, {hi})"))
}

/// Utility of bidder `i` with true value `v[i]` reporting `bid`.
fn utility(a: &revmono::Auction, v: &[f64], i: usize, bid: f64) -> f64 {
    let mut report = v.to_vec();
    report[i] = bid;
    v[i] * a.allocate(&report)[i] - a.payments(&report)[i]
}

fn myerson_identity() -> Result<Outcome> {
    let fz = Fuzzer::new(0xA11CE);
    let mut instances = 0;
    let mut worst: f64 = 0.0;
    let mut deviations = 0;
    for idx in 0..70u64 {
        for family in Family::ALL {
            let inst = fz.dominated(idx, family);
            for prior in [&inst.big, &inst.small] {
                let a = myerson(prior, &inst.fs)?;
                let rev = a.expected_revenue(prior)?;
                let welfare = a.expected_virtual_welfare(prior)?;
                worst = worst.max((rev - welfare).abs());
                instances += 1;
                prior.for_each_profile(|v, _| {
                    for i in 0..v.len() {
                        let honest = utility(&a, v, i, v[i]);
                        if honest < -TOL || GRID.iter().any(|&b| utility(&a, v, i, b) > honest + TOL) {
                            deviations += 1;
                        }
                    }
                });
            }
        }
    }
    outcome(
        instances >= 200 && worst <= 1e-9 && deviations == 0,
        format!("{instances} priors, max |revenue - virtual welfare| = {worst:.2e}, profitable deviations = {deviations}"),
    )
}

fn matroid_monotone() -> Result<Outcome> {
    let fz = Fuzzer::new(0xB0B);
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for idx in 0..200u64 {
        let inst = fz.dominated(idx, Family::UniformMatroid);
        let a = myerson(&inst.small, &inst.fs)?;
        let margin = a.expected_revenue(&inst.big)? - a.expected_revenue(&inst.small)?;
        worst = worst.min(margin);
        if margin < -1e-9 {
            violations += 1;
        }
    }
    outcome(violations == 0, format!("200 pairs, violations = {violations}, min margin = {worst:.3e}"))
}

const EPS_SWEEP: [f64; 4] = [0.1, 0.3, 0.6, 1.0];

fn approx_monotone_and_lipschitz() -> Result<Outcome> {
    let fz = Fuzzer::new(0xC0FFEE);
    let mut mono_checked = 0;
    let mut mono_violations = 0;
    for idx in 0..70u64 {
        for family in Family::ALL {
            let eps = EPS_SWEEP[idx as usize % EPS_SWEEP.len()];
            for closeness in [Closeness::Variance, Closeness::Uniform] {
                let inst = fz.close(idx, family, eps, closeness == Closeness::Uniform);
                let r = lab::check_approx_monotone(&inst.big, &inst.small, eps, &inst.fs, closeness)?;
                mono_checked += 1;
                if !r.passed() {
                    mono_violations += 1;
                }
            }
        }
    }
    let mut lip_checked = 0;
    let mut lip_violations = 0;
    for idx in 0..100u64 {
        for family in [Family::UniformMatroid, Family::MinimumNonMatroid] {
            let eps = EPS_SWEEP[idx as usize % EPS_SWEEP.len()];
            let Instance { fs, big, small, .. } = fz.close(1000 + idx, family, eps, false);
            lip_checked += 1;
            if opt_revenue(&small, &fs)? < opt_revenue(&big, &fs)? - eps - 1e-9 {
                lip_violations += 1;
            }
        }
    }
    outcome(
        mono_checked >= 200 && lip_checked >= 200 && mono_violations == 0 && lip_violations == 0,
        format!(
            "monotone: {mono_checked} checks, {mono_violations} violations; lipschitz: {lip_checked} checks, {lip_violations} violations"
        ),
    )
}

fn lipschitz_lower_bound() -> Result<Outcome> {
    let mut failures = Vec::new();
    let mut worst_closed: f64 = 0.0;
    for n in [2, 4] {
        for k in [1, 2] {
            for eps in [0.01, 0.005] {
                let r = lab::run_lipschitz_lb(n, k, eps)?;
                let err = (r.get("difference") - r.get("closed_form")).abs();
                worst_closed = worst_closed.max(err);
                if r.get("difference") < r.get("bound") || err > 1e-12 {
                    failures.push((n, k, eps));
                }
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!("8 grid points, failures {failures:?}, max closed-form error {worst_closed:.2e}"),
    )
}

fn bernstein_quadratic() -> Result<Outcome> {
    let mut violations = 0;
    let mut points = 0;
    for a in 0..10 {
        let mean = a as f64 / 9.0;
        for b in 0..10 {
            let count = 10usize.pow(b / 2) * if b % 2 == 0 { 1 } else { 3 };
            for c in 0..10 {
                let delta = 0.001 + 0.998 * c as f64 / 9.0;
                let t = bernstein_radius(mean, count, delta)?.value();
                let rhs = (2.0 * mean * (1.0 - mean) + 2.0 / 3.0 * t) * (2.0 / delta).ln() / count as f64;
                points += 1;
                if t * t < rhs {
                    violations += 1;
                }
            }
        }
    }
    outcome(violations == 0, format!("{points} points, violations = {violations}"))
}

fn dominated_empirical() -> Result<Outcome> {
    let r = lab::run_dominated_empirical(&grid_prior(2), 1.0, 0.1, 0.1, 4.0, 500, 2024)?;
    outcome(
        r.passed(),
        format!(
            "N = {}, dominance {:.3}, closeness {:.3}, both {:.3} vs threshold {:.4}",
            r.get("samples"),
            r.get("dominance_rate"),
            r.get("closeness_rate"),
            r.get("success_rate"),
            r.get("threshold")
        ),
    )
}

fn sample_complexity() -> Result<Outcome> {
    let prior = grid_prior(2);
    let single = lab::run_sample_complexity(
        &FeasibleSet::uniform_matroid(2, 1)?,
        &prior,
        Setting::DownwardClosed,
        0.1,
        0.1,
        2.0,
        200,
        7,
    )?;
    let general = lab::run_sample_complexity(
        &FeasibleSet::all_or_nothing(2, 1)?,
        &prior,
        Setting::General,
        0.1,
        0.1,
        2.0,
        200,
        8,
    )?;
    outcome(
        single.passed() && general.passed(),
        format!(
            "single item: N = {}, failure {:.3}; all-or-nothing: N = {}, failure {:.3}; threshold {:.4}",
            single.get("samples"),
            single.get("failure_frequency"),
            general.get("samples"),
            general.get("failure_frequency"),
            single.get("threshold")
        ),
    )
}

fn hellinger() -> Result<Outcome> {
    let mut grid_violations = 0;
    let mut grid_points = 0;
    for n in [2usize, 4, 8, 16] {
        for k in (1..=n).filter(|k| k.is_power_of_two()) {
            for eps in [0.01, 0.005, 0.001] {
                let nf = n as f64;
                let delta = 48.0 * eps / (nf * k as f64);
                let plus = ValueDist::new(&[0.0, 1.0], &[1.0 / nf - delta, 1.0 - 1.0 / nf + delta])?;
                let minus = ValueDist::new(&[0.0, 1.0], &[1.0 / nf + delta, 1.0 - 1.0 / nf - delta])?;
                grid_points += 1;
                if hellinger_sq(&plus, &minus) > 2.0 * delta * delta * nf {
                    grid_violations += 1;
                }
            }
        }
    }
    let fz = Fuzzer::new(0x4E11);
    let mut product_violations = 0;
    for idx in 0..100u64 {
        let inst = fz.dominated(idx, Family::UniformMatroid);
        let h = hellinger_sq_product(&inst.big, &inst.small)?;
        if h.exact > h.coordinate_sum + 1e-12 {
            product_violations += 1;
        }
    }
    outcome(
        grid_violations == 0 && product_violations == 0,
        format!(
            "{grid_points} grid points, {grid_violations} bound violations; 100 products, {product_violations} subadditivity violations"
        ),
    )
}

type Criterion = fn() -> Result<Outcome>;

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let criteria: Vec<(&str, Option<Duration>, Criterion)> = vec![
        ("1 non-monotonicity gap", Some(secs(1)), nonmonotone_gap),
        ("2 disjoint gadget copies", Some(secs(5)), copies_gap),
        ("3 ironing golden case", None, ironing_golden),
        ("4 payment identity and truthfulness", None, myerson_identity),
        ("5 matroid strong monotonicity", Some(secs(60)), matroid_monotone),
        ("6 approximate monotonicity and optimal-revenue lipschitzness", None, approx_monotone_and_lipschitz),
        ("7 lipschitz lower bound", None, lipschitz_lower_bound),
        ("8 bernstein radius quadratic condition", None, bernstein_quadratic),
        ("9 dominated empirical dominance and closeness", None, dominated_empirical),
        ("10 sample complexity at desk scale", Some(secs(600)), sample_complexity),
        ("11 hellinger bounds", None, hellinger),
    ];
    let mut failed = 0;
    for (name, limit, run) in criteria {
        let o = timed(limit, run);
        if !o.ok {
            failed += 1;
        }
        println!("criterion {name}: {} - {}", if o.ok { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} of 11 criteria passed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
