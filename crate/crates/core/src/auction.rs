//! Myerson's optimal auction with respect to a design prior.
//!
//! The allocation maximizes ironed virtual welfare over the vertices of the
//! feasible set. Ties are broken by a fixed, value-independent vertex order
//! (descending total allocation, then descending lexicographic), which keeps
//! every `x_i` nondecreasing in `v_i`: if raising `v_i` changes the winner,
//! the new winner gained more welfare than the old one, so it has the larger
//! `x_i`, or the same `x_i` and an earlier position in the order.
//!
//! Payments follow the payment identity `p_i = v_i x_i - ∫_0^{v_i} x_i(t) dt`.
//! For fixed `v_-i` the integrand is a step function whose breakpoints are the
//! prior's support values for bidder `i`, so the integral is a finite sum.

use rand::Rng;
use rayon::prelude::*;

use crate::curves::{Virtual, VirtualTable};
use crate::dist::ProductDist;
use crate::feasible::FeasibleSet;
use crate::rng::trial_rng;
use crate::{Error, Result, TOL};

/// Default cap on the number of support profiles for exact enumeration.
pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

/// Monte Carlo revenue estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
}

/// Myerson's optimal auction `M_D` for prior `D` over a feasible set.
#[derive(Debug, Clone)]
pub struct Auction {
    prior: ProductDist,
    feasible: FeasibleSet,
    // Vertex indices in tie-breaking order.
    order: Vec<usize>,
    tables: Vec<VirtualTable>,
    cap: u128,
}

/// Builds the optimal auction for `prior` over `fs`.
pub fn myerson(prior: &ProductDist, fs: &FeasibleSet) -> Result<Auction> {
    if prior.n() != fs.n() {
        return Err(Error::DimensionMismatch {
            expected: fs.n(),
            got: prior.n(),
        });
    }
    let vertices = fs.vertices();
    let mut order: Vec<usize> = (0..vertices.len()).collect();
    order.sort_by(|&a, &b| {
        let sa: f64 = vertices[a].iter().sum();
        let sb: f64 = vertices[b].iter().sum();
        sb.total_cmp(&sa).then_with(|| {
            vertices[b]
                .iter()
                .zip(&vertices[a])
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    let tables = prior.dists().iter().map(VirtualTable::new).collect();
    Ok(Auction {
        prior: prior.clone(),
        feasible: fs.clone(),
        order,
        tables,
        cap: DEFAULT_ENUMERATION_CAP,
    })
}

impl Auction {
    pub fn with_enumeration_cap(mut self, cap: u128) -> Self {
        self.cap = cap;
        self
    }

    pub fn prior(&self) -> &ProductDist {
        &self.prior
    }

    pub fn feasible(&self) -> &FeasibleSet {
        &self.feasible
    }

    pub fn n(&self) -> usize {
        self.prior.n()
    }

    /// Vertices in the fixed tie-breaking order.
    pub fn vertex_order(&self) -> Vec<&[f64]> {
        self.order.iter().map(|&i| self.feasible.vertices()[i].as_slice()).collect()
    }

    pub fn virtual_table(&self, i: usize) -> &VirtualTable {
        &self.tables[i]
    }

    /// Ironed virtual values of a profile under the prior.
    pub fn virtuals(&self, values: &[f64]) -> Vec<Virtual> {
        self.tables.iter().zip(values).map(|(t, &v)| t.eval(v)).collect()
    }

    /// Index of the chosen vertex for a vector of virtual values.
    ///
    /// Vertices giving positive allocation to a `NegInf` bidder are excluded.
    /// If every vertex is excluded, the one with the least allocation to such
    /// bidders wins, then the highest finite welfare.
    fn choose(&self, phis: &[Virtual]) -> usize {
        let vertices = self.feasible.vertices();
        let score = |x: &[f64]| -> (f64, f64) {
            let mut blocked = 0.0;
            let mut welfare = 0.0;
            for (&xi, phi) in x.iter().zip(phis) {
                match phi {
                    Virtual::Finite(p) => welfare += xi * p,
                    Virtual::NegInf => blocked += xi,
                }
            }
            (blocked, welfare)
        };
        let scores: Vec<(f64, f64)> = self.order.iter().map(|&v| score(&vertices[v])).collect();
        let least_blocked = scores.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
        let best = scores
            .iter()
            .filter(|s| s.0 <= least_blocked)
            .map(|s| s.1)
            .fold(f64::NEG_INFINITY, f64::max);
        let pos = scores
            .iter()
            .position(|s| s.0 <= least_blocked && s.1 >= best - TOL)
            .expect("feasible set has at least one vertex");
        self.order[pos]
    }

    fn chosen(&self, values: &[f64]) -> &[f64] {
        &self.feasible.vertices()[self.choose(&self.virtuals(values))]
    }

    /// The allocation for a reported profile.
    pub fn allocate(&self, values: &[f64]) -> Vec<f64> {
        self.chosen(values).to_vec()
    }

    /// Payment of bidder `i` given the virtual values of everyone.
    fn payment(&self, values: &[f64], phis: &mut [Virtual], i: usize) -> f64 {
        let vi = values[i];
        let own = phis[i];
        let xi = self.feasible.vertices()[self.choose(phis)][i];
        if xi == 0.0 {
            return 0.0;
        }
        let table = &self.tables[i];
        let cuts = table.breakpoints();
        let mut integral = 0.0;
        let mut lo = 0.0;
        let mut last: Option<(Virtual, f64)> = None;
        for p in 0..=cuts.len() {
            if lo >= vi {
                break;
            }
            let hi = cuts.get(p).copied().unwrap_or(f64::INFINITY).min(vi);
            if hi > lo {
                let phi = table.piece(p);
                let x = match last {
                    Some((prev, x)) if prev == phi => x,
                    _ => {
                        phis[i] = phi;
                        let x = self.feasible.vertices()[self.choose(phis)][i];
                        last = Some((phi, x));
                        x
                    }
                };
                integral += x * (hi - lo);
            }
            lo = lo.max(hi);
        }
        phis[i] = own;
        (vi * xi - integral).max(0.0)
    }

    /// Payment vector for a reported profile.
    pub fn payments(&self, values: &[f64]) -> Vec<f64> {
        let mut phis = self.virtuals(values);
        (0..self.n()).map(|i| self.payment(values, &mut phis, i)).collect()
    }

    /// Total payment collected on a profile.
    pub fn revenue_on_profile(&self, values: &[f64]) -> f64 {
        self.payments(values).iter().sum()
    }

    /// Ironed virtual welfare (w.r.t. the prior) of the chosen allocation.
    ///
    /// Returns negative infinity if a `NegInf` bidder is allocated.
    pub fn virtual_welfare(&self, values: &[f64]) -> f64 {
        let phis = self.virtuals(values);
        let x = &self.feasible.vertices()[self.choose(&phis)];
        x.iter()
            .zip(&phis)
            .map(|(&xi, phi)| match phi {
                Virtual::Finite(p) => xi * p,
                Virtual::NegInf if xi > 0.0 => f64::NEG_INFINITY,
                Virtual::NegInf => 0.0,
            })
            .sum()
    }

    fn check_eval(&self, eval: &ProductDist) -> Result<()> {
        if eval.n() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: eval.n(),
            });
        }
        let profiles = eval.profile_count();
        if profiles > self.cap {
            return Err(Error::EnumerationCap {
                profiles,
                cap: self.cap,
            });
        }
        Ok(())
    }

    /// Exact expected revenue when values are drawn from `eval`.
    pub fn expected_revenue(&self, eval: &ProductDist) -> Result<f64> {
        self.check_eval(eval)?;
        let mut total = 0.0;
        eval.for_each_profile(|v, prob| total += prob * self.revenue_on_profile(v));
        Ok(total)
    }

    /// Exact expected ironed virtual welfare when values are drawn from `eval`.
    pub fn expected_virtual_welfare(&self, eval: &ProductDist) -> Result<f64> {
        self.check_eval(eval)?;
        let mut total = 0.0;
        eval.for_each_profile(|v, prob| total += prob * self.virtual_welfare(v));
        Ok(total)
    }

    /// Seeded Monte Carlo estimate of expected revenue on `eval`.
    ///
    /// Trial `t` draws from its own stream derived from `(seed, t)`, so the
    /// result does not depend on the number of worker threads.
    pub fn expected_revenue_mc(&self, eval: &ProductDist, trials: usize, seed: u64) -> Result<McEstimate> {
        if eval.n() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: eval.n(),
            });
        }
        if trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        let revenues: Vec<f64> = (0..trials as u64)
            .into_par_iter()
            .map(|t| {
                let mut rng = trial_rng(seed, t);
                let profile: Vec<f64> = eval.dists().iter().map(|d| d.sample_with(rng.gen())).collect();
                self.revenue_on_profile(&profile)
            })
            .collect();
        let count = trials as f64;
        let mean = revenues.iter().sum::<f64>() / count;
        let stderr = if trials > 1 {
            let var = revenues.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (count - 1.0);
            (var / count).sqrt()
        } else {
            0.0
        };
        Ok(McEstimate { mean, stderr })
    }
}

/// `Opt(D)`: expected revenue of `M_D` on `D`.
///
/// Cross-checked against expected ironed virtual welfare; a disagreement
/// beyond tolerance signals an allocation or payment bug.
pub fn opt_revenue(d: &ProductDist, fs: &FeasibleSet) -> Result<f64> {
    let auction = myerson(d, fs)?;
    let revenue = auction.expected_revenue(d)?;
    let welfare = auction.expected_virtual_welfare(d)?;
    if (revenue - welfare).abs() > TOL {
        return Err(Error::RevenueIdentity { revenue, welfare });
    }
    Ok(revenue)
}
