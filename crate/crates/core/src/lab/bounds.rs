use serde::{Deserialize, Serialize};

use crate::auction::{myerson, opt_revenue};
use crate::curves::{is_regular, revenue_curve, Virtual, VirtualTable};
use crate::dist::{dominates, is_close, is_close_uniform, ProductDist, ValueDist};
use crate::feasible::FeasibleSet;
use crate::{Error, Result, TOL};

use super::Report;

/// Which closeness notion a check assumes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Closeness {
    #[default]
    Variance,
    Uniform,
}

impl Closeness {
    fn as_str(self) -> &'static str {
        match self {
            Closeness::Variance => "variance",
            Closeness::Uniform => "uniform",
        }
    }

    fn holds(self, a: &ProductDist, b: &ProductDist, eps: f64, n: usize, k: f64) -> Result<bool> {
        match self {
            Closeness::Variance => is_close(a, b, eps, n, k),
            Closeness::Uniform => is_close_uniform(a, b, eps, n, k),
        }
    }
}

fn require(ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Precondition(what.to_string()))
    }
}

/// Revenue of the auction designed for `dtilde` when run on `dd`, against
/// its revenue on `dtilde`. Requires `dd ⪰ dtilde` and closeness at `eps`.
pub fn check_approx_monotone(
    dd: &ProductDist,
    dtilde: &ProductDist,
    eps: f64,
    fs: &FeasibleSet,
    closeness: Closeness,
) -> Result<Report> {
    let n = fs.n();
    let k = fs.rank();
    require(dominates(dd, dtilde)?, "true prior does not dominate the design prior")?;
    require(
        closeness.holds(dd, dtilde, eps, n, k)?,
        &format!("priors are not {}-close at eps = {eps}", closeness.as_str()),
    )?;
    let slack = match closeness {
        Closeness::Variance => eps,
        Closeness::Uniform => (n as f64 / k).sqrt() * eps,
    };
    let auction = myerson(dtilde, fs)?;
    let on_true = auction.expected_revenue(dd)?;
    let on_design = auction.expected_revenue(dtilde)?;
    Ok(Report::new("approx_monotone")
        .param("eps", eps)
        .param("n", n as u64)
        .param("k", k)
        .param("closeness", closeness.as_str())
        .metric("revenue_true", on_true)
        .metric("revenue_design", on_design)
        .metric("slack", slack)
        .metric("margin", on_true - (on_design - slack))
        .verdict(on_true >= on_design - slack - TOL))
}

/// `∫_0^θ φ_{D̃}(v_D(q)) dq` for a single coordinate. `v_D(q)` is the atom
/// `v_j` (descending) on `[Pr[u > v_j], Pr[u >= v_j])`, so the integrand is a
/// step function.
pub fn virtual_integral(d: &ValueDist, dtilde: &ValueDist, theta: f64) -> f64 {
    let table = VirtualTable::new(dtilde);
    let mut total = 0.0;
    let mut lo = 0.0;
    for (&v, &hi) in d.support().iter().rev().zip(&d.tail_masses()) {
        let width = hi.min(theta) - lo;
        if width > 0.0 {
            total += match table.eval(v) {
                Virtual::Finite(phi) => phi * width,
                Virtual::NegInf => f64::NEG_INFINITY,
            };
        }
        lo = hi;
        if lo >= theta {
            break;
        }
    }
    total
}

/// Per-bidder overestimate bound: for regular `dtilde_i` and a threshold
/// `theta` where `φ_{D̃_i}(v_{D_i}(θ)) >= 0`, the design-prior virtual
/// surplus over `[0, θ]` exceeds `R_{D_i}(θ)` by at most
/// `sqrt(θ ε² / 4nk) + ε² / 2nk` (or `ε / sqrt(nk)` under uniform closeness).
#[allow(clippy::too_many_arguments)]
pub fn check_single_bidder_bound(
    dd: &ProductDist,
    dtilde: &ProductDist,
    eps: f64,
    n: usize,
    k: f64,
    i: usize,
    theta: f64,
    closeness: Closeness,
) -> Result<Report> {
    if i >= dd.n() {
        return Err(Error::IndexOutOfRange { index: i, n: dd.n() });
    }
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::InvalidParameter(format!("threshold quantile {theta} outside [0, 1]")));
    }
    require(dominates(dd, dtilde)?, "true prior does not dominate the design prior")?;
    require(
        closeness.holds(dd, dtilde, eps, n, k)?,
        &format!("priors are not {}-close at eps = {eps}", closeness.as_str()),
    )?;
    let (di, dti) = (dd.get(i), dtilde.get(i));
    require(is_regular(dti), "design prior of the bidder is not regular")?;
    let at_theta = VirtualTable::new(dti).eval(di.value_of_quantile(theta)?);
    require(
        at_theta.finite().is_some_and(|phi| phi >= 0.0),
        "design virtual value at the threshold is negative",
    )?;

    let lhs = virtual_integral(di, dti, theta);
    let revenue = revenue_curve(di).eval(theta);
    let nk = n as f64 * k;
    let slack = match closeness {
        Closeness::Variance => (theta * eps * eps / (4.0 * nk)).sqrt() + eps * eps / (2.0 * nk),
        Closeness::Uniform => eps / nk.sqrt(),
    };
    Ok(Report::new("single_bidder_bound")
        .param("eps", eps)
        .param("n", n as u64)
        .param("k", k)
        .param("bidder", i as u64)
        .param("theta", theta)
        .param("closeness", closeness.as_str())
        .metric("lhs", lhs)
        .metric("revenue_at_theta", revenue)
        .metric("slack", slack)
        .metric("margin", revenue + slack - lhs)
        .verdict(lhs <= revenue + slack + TOL))
}

/// `Opt(D̃) − Opt(D)` on the all-or-nothing instance, in closed form:
/// `k (1 − 1/2n)^n ((1 + ε / (2(2n − 1)√k))^n − 1)`.
pub fn lipschitz_closed_form(n: usize, k: usize, eps: f64) -> f64 {
    let nf = n as f64;
    let kf = k as f64;
    let base = 1.0 - 1.0 / (2.0 * nf);
    kf * base.powf(nf) * ((1.0 + eps / (2.0 * (2.0 * nf - 1.0) * kf.sqrt())).powf(nf) - 1.0)
}

/// All-or-nothing allocation with `D` putting mass `1/2n` on value 0 and
/// `D̃` moving `ε / 4n√k` of it to value 1.
pub fn run_lipschitz_lb(n: usize, k: usize, eps: f64) -> Result<Report> {
    if k < 1 || k > n {
        return Err(Error::InvalidParameter(format!("rank {k} outside 1..={n}")));
    }
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!("eps {eps} outside [0, 1]")));
    }
    let nf = n as f64;
    let kf = k as f64;
    let low = 1.0 / (2.0 * nf);
    let shift = eps / (4.0 * nf * kf.sqrt());
    let d = ProductDist::iid(ValueDist::new(&[0.0, 1.0], &[low, 1.0 - low])?, n)?;
    let dt = ProductDist::iid(ValueDist::new(&[0.0, 1.0], &[low - shift, 1.0 - low + shift])?, n)?;
    let fs = FeasibleSet::all_or_nothing(n, k)?;
    let opt_d = opt_revenue(&d, &fs)?;
    let opt_dt = opt_revenue(&dt, &fs)?;
    let diff = opt_dt - opt_d;
    let bound = eps * kf.sqrt() / 8.0;
    let close = if eps > 0.0 { is_close(&d, &dt, eps, n, kf)? } else { d == dt };
    let closed = lipschitz_closed_form(n, k, eps);
    Ok(Report::new("lipschitz_lb")
        .param("n", n as u64)
        .param("k", k as u64)
        .param("eps", eps)
        .metric("opt_true", opt_d)
        .metric("opt_perturbed", opt_dt)
        .metric("difference", diff)
        .metric("closed_form", closed)
        .metric("bound", bound)
        .metric("close", f64::from(u8::from(close)))
        .verdict(diff >= bound - 1e-12 && close))
}
