use crate::auction::myerson;
use crate::dist::{ProductDist, ValueDist};
use crate::feasible::{ExchangeViolation, FeasibleSet};
use crate::{Error, Result, TOL};

use super::Report;

const EMBED_MAX_BIDDERS: usize = 10;
const EXACT_COPIES: usize = 4;
const MAX_COPIES: usize = 6;

fn check_gadget_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 0.5 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("gadget parameter {eps} outside (0, 0.5)")))
    }
}

/// The three-bidder pair `(D, D̃)` on the minimum non-matroid, with every
/// value multiplied by `scale`. A has value 1/2; under `D̃` each of B and C
/// is 1 with probability `eps` and `eps` otherwise, under `D` both are 1.
fn scaled_gadget(eps: f64, scale: f64) -> Result<(Vec<ValueDist>, Vec<ValueDist>)> {
    let a = ValueDist::point(0.5 * scale)?;
    let low = ValueDist::new(&[eps * scale, scale], &[1.0 - eps, eps])?;
    let high = ValueDist::point(scale)?;
    Ok((vec![a.clone(), high.clone(), high], vec![a, low.clone(), low]))
}

/// `(D, D̃)` for the minimum non-matroid with bidders A, B, C.
pub fn gadget_priors(eps: f64) -> Result<(ProductDist, ProductDist)> {
    check_gadget_eps(eps)?;
    let (d, dt) = scaled_gadget(eps, 1.0)?;
    Ok((ProductDist::new(d)?, ProductDist::new(dt)?))
}

pub fn run_nonmonotone(eps: f64) -> Result<Report> {
    let (d, dt) = gadget_priors(eps)?;
    let auction = myerson(&dt, &FeasibleSet::minimum_non_matroid())?;
    let on_design = auction.expected_revenue(&dt)?;
    let on_true = auction.expected_revenue(&d)?;
    let closed = (1.0 - eps).powi(2) / 2.0 + 2.0 * eps * (1.0 - eps) * (1.0 + eps) + 2.0 * eps.powi(3);
    Ok(Report::new("nonmonotone")
        .param("eps", eps)
        .metric("revenue_design", on_design)
        .metric("revenue_true", on_true)
        .metric("gap", on_design - on_true)
        .metric("closed_form_design", closed)
        .metric("closed_form_true", 2.0 * eps)
        .verdict(on_true < on_design))
}

/// `⌊k/2⌋` independent gadget copies with `eps = 0.1`.
///
/// Up to four copies are evaluated exactly. Five or six copies estimate the
/// design-prior revenue by simulation (the true prior is deterministic) and
/// allow four standard errors of slack.
pub fn run_copies(k: usize, trials: usize, seed: u64) -> Result<Report> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("rank {k} must be at least 2")));
    }
    let copies = k / 2;
    if copies > MAX_COPIES {
        return Err(Error::InvalidParameter(format!(
            "{copies} gadget copies exceeds the supported maximum {MAX_COPIES}"
        )));
    }
    let eps = 0.1;
    let (d1, dt1) = gadget_priors(eps)?;
    let mut d = d1.clone();
    let mut dt = dt1.clone();
    let mut fs = FeasibleSet::minimum_non_matroid();
    for _ in 1..copies {
        d = d.concat(&d1);
        dt = dt.concat(&dt1);
        fs = fs.disjoint_union(&FeasibleSet::minimum_non_matroid())?;
    }
    let auction = myerson(&dt, &fs)?;
    let on_true = auction.expected_revenue(&d)?;
    let target = 0.405 * copies as f64;
    let report = Report::new("copies").param("k", k as u64).param("copies", copies as u64).param("eps", eps);
    if copies <= EXACT_COPIES {
        let on_design = auction.expected_revenue(&dt)?;
        let gap = on_design - on_true;
        Ok(report
            .param("mode", "exact")
            .metric("revenue_design", on_design)
            .metric("revenue_true", on_true)
            .metric("gap", gap)
            .metric("target", target)
            .verdict(gap >= target - TOL))
    } else {
        let est = auction.expected_revenue_mc(&dt, trials, seed)?;
        let gap = est.mean - on_true;
        Ok(report
            .param("mode", "monte_carlo")
            .param("trials", trials as u64)
            .metric("revenue_design", est.mean)
            .metric("revenue_design_stderr", est.stderr)
            .metric("revenue_true", on_true)
            .metric("gap", gap)
            .metric("target", target)
            .verdict(gap >= target - TOL - 4.0 * est.stderr)
            .with_seed(seed))
    }
}

/// Priors `(D, D̃)` embedding the gadget into a downward-closed non-matroid.
///
/// Bidders in `S ∩ S'` have value 1, those outside `S ∪ S'` value 0. One
/// bidder A of `S' \ S` and two bidders B, C of `S \ S'` carry the gadget
/// scaled by `1/n`; the remaining members of both differences sit at `1/n`.
pub fn embedded_priors(fs: &FeasibleSet, eps: f64) -> Result<(ProductDist, ProductDist, ExchangeViolation)> {
    check_gadget_eps(eps)?;
    let n = fs.n();
    if n > EMBED_MAX_BIDDERS {
        return Err(Error::InvalidParameter(format!(
            "{n} bidders exceeds embedding limit {EMBED_MAX_BIDDERS}"
        )));
    }
    if !fs.is_binary() {
        return Err(Error::NotBinary);
    }
    let violation = fs.find_exchange_violation()?.ok_or(Error::IsMatroid)?;
    let common = violation.larger.intersect(violation.smaller);
    let side_a = violation.smaller.minus(violation.larger).members();
    let side_bc = violation.larger.minus(violation.smaller).members();
    let (a, b, c) = (side_a[0], side_bc[0], side_bc[1]);

    let scale = 1.0 / n as f64;
    let (gd, gdt) = scaled_gadget(eps, scale)?;
    let mut d = Vec::with_capacity(n);
    let mut dt = Vec::with_capacity(n);
    for i in 0..n {
        let (di, dti) = if i == a {
            (gd[0].clone(), gdt[0].clone())
        } else if i == b || i == c {
            (gd[1].clone(), gdt[1].clone())
        } else if common.contains(i) {
            (ValueDist::point(1.0)?, ValueDist::point(1.0)?)
        } else if side_a.contains(&i) || side_bc.contains(&i) {
            (ValueDist::point(scale)?, ValueDist::point(scale)?)
        } else {
            (ValueDist::point(0.0)?, ValueDist::point(0.0)?)
        };
        d.push(di);
        dt.push(dti);
    }
    Ok((ProductDist::new(d)?, ProductDist::new(dt)?, violation))
}

pub fn embed_counterexample(fs: &FeasibleSet, eps: f64) -> Result<Report> {
    let (d, dt, violation) = embedded_priors(fs, eps)?;
    let auction = myerson(&dt, fs)?;
    let on_design = auction.expected_revenue(&dt)?;
    let on_true = auction.expected_revenue(&d)?;
    let n = fs.n() as f64;
    Ok(Report::new("embed")
        .param("n", fs.n() as u64)
        .param("eps", eps)
        .param("larger", violation.larger.members().iter().map(|&i| i as u64).collect::<Vec<_>>())
        .param("smaller", violation.smaller.members().iter().map(|&i| i as u64).collect::<Vec<_>>())
        .metric("overlap", violation.overlap() as f64)
        .metric("revenue_design", on_design)
        .metric("revenue_true", on_true)
        .metric("gap", on_design - on_true)
        .metric("gap_times_n", (on_design - on_true) * n)
        .verdict(on_true < on_design))
}
