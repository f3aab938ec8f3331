use rand::Rng;
use rayon::prelude::*;

use crate::auction::{myerson, opt_revenue};
use crate::curves::{Virtual, VirtualTable};
use crate::dist::{dominates, is_close, ProductDist, ValueDist};
use crate::feasible::FeasibleSet;
use crate::learn::{draw_samples, dominated_empirical, hellinger_sq, required_samples, Setting};
use crate::rng::{derive_seed, trial_rng};
use crate::{Error, Result};

use super::Report;

/// Failure parameter the lower-bound learner passes to the dominated empirical.
pub const LB_LEARNER_DELTA: f64 = 0.1;

const LB_FULL_FAMILY_MAX_N: usize = 8;
const LB_SUBSAMPLE: usize = 32;

fn binomial_sigma(p: f64, trials: usize) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        Err(Error::InvalidParameter("trials must be at least 1".into()))
    } else {
        Ok(())
    }
}

fn setting_name(setting: Setting) -> &'static str {
    match setting {
        Setting::DownwardClosed => "downward_closed",
        Setting::General => "general",
    }
}

/// Learns `Ẽ` from `N = required_samples(..)` draws in each trial and runs
/// `M_Ẽ` on the true prior; counts trials whose revenue falls more than
/// `eps` below `Opt(D)`.
#[allow(clippy::too_many_arguments)]
pub fn run_sample_complexity(
    fs: &FeasibleSet,
    d: &ProductDist,
    setting: Setting,
    eps: f64,
    delta: f64,
    constant: f64,
    trials: usize,
    seed: u64,
) -> Result<Report> {
    check_trials(trials)?;
    let count = required_samples(setting, fs.n(), fs.rank(), eps, delta, constant)?;
    let opt = opt_revenue(d, fs)?;
    let revenues = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let samples = draw_samples(d, count as usize, derive_seed(seed, t))?;
            let learned = dominated_empirical(&samples, delta)?;
            myerson(&learned, fs)?.expected_revenue(d)
        })
        .collect::<Result<Vec<f64>>>()?;
    let failures = revenues.iter().filter(|&&r| r < opt - eps).count();
    let freq = failures as f64 / trials as f64;
    let sigma = binomial_sigma(delta, trials);
    let mean = revenues.iter().sum::<f64>() / trials as f64;
    let worst = revenues.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(Report::new("sample_complexity")
        .param("setting", setting_name(setting))
        .param("n", fs.n() as u64)
        .param("k", fs.rank())
        .param("eps", eps)
        .param("delta", delta)
        .param("constant", constant)
        .param("trials", trials as u64)
        .metric("samples", count as f64)
        .metric("opt", opt)
        .metric("mean_revenue", mean)
        .metric("min_revenue", worst)
        .metric("failure_frequency", freq)
        .metric("sigma", sigma)
        .metric("threshold", delta + 3.0 * sigma)
        .verdict(freq <= delta + 3.0 * sigma)
        .with_seed(seed))
}

/// Frequency over seeded trials of `D ⪰ Ẽ ∧ D ≈_ε Ẽ` at the downward-closed
/// sample count.
#[allow(clippy::too_many_arguments)]
pub fn run_dominated_empirical(
    d: &ProductDist,
    k: f64,
    eps: f64,
    delta: f64,
    constant: f64,
    trials: usize,
    seed: u64,
) -> Result<Report> {
    check_trials(trials)?;
    let n = d.n();
    let count = required_samples(Setting::DownwardClosed, n, k, eps, delta, constant)?;
    let outcomes = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let samples = draw_samples(d, count as usize, derive_seed(seed, t))?;
            let learned = dominated_empirical(&samples, delta)?;
            let dom = dominates(d, &learned)?;
            let close = is_close(d, &learned, eps, n, k)?;
            Ok((dom, close))
        })
        .collect::<Result<Vec<(bool, bool)>>>()?;
    let tf = trials as f64;
    let dom_rate = outcomes.iter().filter(|o| o.0).count() as f64 / tf;
    let close_rate = outcomes.iter().filter(|o| o.1).count() as f64 / tf;
    let both_rate = outcomes.iter().filter(|o| o.0 && o.1).count() as f64 / tf;
    let sigma = binomial_sigma(delta, trials);
    let threshold = 1.0 - delta - 3.0 * sigma;
    Ok(Report::new("dominated_empirical")
        .param("n", n as u64)
        .param("k", k)
        .param("eps", eps)
        .param("delta", delta)
        .param("constant", constant)
        .param("trials", trials as u64)
        .metric("samples", count as f64)
        .metric("dominance_rate", dom_rate)
        .metric("closeness_rate", close_rate)
        .metric("success_rate", both_rate)
        .metric("sigma", sigma)
        .metric("threshold", threshold)
        .verdict(both_rate >= threshold)
        .with_seed(seed))
}

/// Member of the lower-bound family: bidder `i` has value 0 with
/// probability `1/n − δ` if `signs[i]` else `1/n + δ`, and value 1 otherwise.
pub fn lb_family_member(signs: &[bool], delta: f64) -> Result<ProductDist> {
    let n = signs.len() as f64;
    let dists = signs
        .iter()
        .map(|&plus| {
            let low = if plus { 1.0 / n - delta } else { 1.0 / n + delta };
            ValueDist::new(&[0.0, 1.0], &[low, 1.0 - low])
        })
        .collect::<Result<Vec<_>>>()?;
    ProductDist::new(dists)
}

/// Sign patterns of the family members to evaluate: all of them for small
/// `n`, a seeded subsample otherwise.
fn family_members(n: usize, seed: u64) -> Vec<Vec<bool>> {
    if n <= LB_FULL_FAMILY_MAX_N {
        (0..1u64 << n).map(|mask| (0..n).map(|i| mask >> i & 1 == 1).collect()).collect()
    } else {
        let mut rng = trial_rng(seed, u64::MAX);
        (0..LB_SUBSAMPLE).map(|_| (0..n).map(|_| rng.gen()).collect()).collect()
    }
}

/// Lower-bound family on the all-or-nothing allocation with
/// `δ = 48ε/(nk)`. For each member `D` and each trial, the dominated
/// empirical learner sees `sample_budget` draws from `D`; its loss is
/// `Σ_i Pr_D[v^i] · Dif_D(v^i)` where `v^i` has only bidder `i` at value 0
/// and `Dif` is the virtual-welfare shortfall against the optimum.
pub fn run_lb_family(n: usize, k: usize, eps: f64, sample_budget: usize, trials: usize, seed: u64) -> Result<Report> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("{n} bidders; need at least 2")));
    }
    if !(eps > 0.0 && eps <= 0.01) {
        return Err(Error::InvalidParameter(format!("eps {eps} outside (0, 0.01]")));
    }
    check_trials(trials)?;
    let fs = FeasibleSet::all_or_nothing(n, k)?;
    let nf = n as f64;
    let kf = k as f64;
    let delta = 48.0 * eps / (nf * kf);
    let plus = ValueDist::new(&[0.0, 1.0], &[1.0 / nf - delta, 1.0 - 1.0 / nf + delta])?;
    let minus = ValueDist::new(&[0.0, 1.0], &[1.0 / nf + delta, 1.0 - 1.0 / nf - delta])?;
    let h2 = hellinger_sq(&plus, &minus);
    let budget_product = sample_budget as f64 * h2;

    let members = family_members(n, seed);
    let jobs: Vec<(usize, u64)> = (0..members.len()).flat_map(|m| (0..trials as u64).map(move |t| (m, t))).collect();
    let losses = jobs
        .par_iter()
        .map(|&(m, t)| {
            let truth = lb_family_member(&members[m], delta)?;
            let tables: Vec<VirtualTable> = truth.dists().iter().map(VirtualTable::new).collect();
            let samples = draw_samples(&truth, sample_budget, derive_seed(seed, (m as u64) << 32 | t))?;
            let learned = myerson(&dominated_empirical(&samples, LB_LEARNER_DELTA)?, &fs)?;
            let mut loss = 0.0;
            for i in 0..n {
                let mut profile = vec![1.0; n];
                profile[i] = 0.0;
                let welfare = |x: &[f64]| -> f64 {
                    x.iter()
                        .zip(&tables)
                        .zip(&profile)
                        .map(|((&xi, tab), &v)| match tab.eval(v) {
                            Virtual::Finite(phi) => xi * phi,
                            Virtual::NegInf => f64::NEG_INFINITY,
                        })
                        .sum()
                };
                let best = fs.vertices().iter().map(|x| welfare(x)).fold(f64::NEG_INFINITY, f64::max);
                let chosen = welfare(&learned.allocate(&profile));
                let prob: f64 = truth
                    .dists()
                    .iter()
                    .zip(&profile)
                    .map(|(di, &v)| di.cdf(v) - di.cdf_left(v))
                    .product();
                loss += prob * (best - chosen);
            }
            Ok(loss)
        })
        .collect::<Result<Vec<f64>>>()?;
    let avg_loss = losses.iter().sum::<f64>() / losses.len() as f64;

    // Smallest probability of a single-zero profile over the family.
    let min_profile_prob = (1.0 - 1.0 / nf - delta).powf(nf - 1.0) * (1.0 / nf - delta);
    let informative = budget_product <= 0.01;
    Ok(Report::new("lb_family")
        .param("n", n as u64)
        .param("k", k as u64)
        .param("eps", eps)
        .param("sample_budget", sample_budget as u64)
        .param("trials", trials as u64)
        .param("members", members.len() as u64)
        .metric("delta", delta)
        .metric("hellinger_sq", h2)
        .metric("hellinger_bound", 2.0 * delta * delta * nf)
        .metric("budget_product", budget_product)
        .metric("min_profile_prob", min_profile_prob)
        .metric("average_loss", avg_loss)
        .verdict(!informative || avg_loss >= eps)
        .with_seed(seed))
}
