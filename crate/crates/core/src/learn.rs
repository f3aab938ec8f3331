//! Learning priors from samples: empirical and dominated empirical
//! distributions, Bernstein radii, sample-count formulas and Hellinger
//! distances.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dist::{merged_support, ProductDist, ValueDist};
use crate::{Error, Result};

/// `count` i.i.d. value profiles drawn from a product prior.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    n: usize,
    // Row-major: rows[s][i] is bidder i's value in sample s.
    rows: Vec<Vec<f64>>,
    seed: u64,
}

impl SampleMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn count(&self) -> usize {
        self.rows.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn column(&self, i: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[i]).collect()
    }
}

/// Draws `count` profiles by inverse-CDF sampling; deterministic in `seed`.
pub fn draw_samples(d: &ProductDist, count: usize, seed: u64) -> Result<SampleMatrix> {
    if count == 0 {
        return Err(Error::InvalidParameter("sample count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..count)
        .map(|_| d.dists().iter().map(|di| di.sample_with(rng.gen())).collect())
        .collect();
    Ok(SampleMatrix { n: d.n(), rows, seed })
}

/// Sorted distinct values of a column with their multiplicities.
fn value_counts(mut column: Vec<f64>) -> (Vec<f64>, Vec<usize>) {
    column.sort_by(f64::total_cmp);
    let mut values: Vec<f64> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    for v in column {
        if values.last() == Some(&v) {
            *counts.last_mut().unwrap() += 1;
        } else {
            values.push(v);
            counts.push(1);
        }
    }
    (values, counts)
}

/// Product empirical distribution: coordinate `i` is uniform over column `i`.
pub fn empirical(s: &SampleMatrix) -> Result<ProductDist> {
    let total = s.count() as f64;
    let dists = (0..s.n)
        .map(|i| {
            let (values, counts) = value_counts(s.column(i));
            let probs: Vec<f64> = counts.iter().map(|&c| c as f64 / total).collect();
            ValueDist::new(&values, &probs)
        })
        .collect::<Result<Vec<_>>>()?;
    ProductDist::new(dists)
}

/// The inflated CDF value `min{1, E + sqrt(2E(1-E)L/N) + 4L/N}` with
/// `L = ln(2 n N / delta)`.
pub fn inflate_cdf(e: f64, n: usize, count: usize, delta: f64) -> f64 {
    let big_n = count as f64;
    let log_term = (2.0 * n as f64 * big_n / delta).ln();
    let spread = (2.0 * e * (1.0 - e) * log_term / big_n).max(0.0).sqrt();
    (e + spread + 4.0 * log_term / big_n).min(1.0)
}

/// Dominated product empirical distribution.
///
/// Per coordinate the inflated CDF is evaluated at every sample value and
/// made nondecreasing with a running maximum. The mass it adds below the
/// lowest sample sits on an atom at value 0, so the true prior dominates the
/// result whenever the CDF bound holds.
pub fn dominated_empirical(s: &SampleMatrix, delta: f64) -> Result<ProductDist> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("failure probability {delta} outside (0, 1)")));
    }
    let n = s.n;
    let count = s.count();
    let dists = (0..n)
        .map(|i| {
            let (values, counts) = value_counts(s.column(i));
            let mut atoms = Vec::with_capacity(values.len() + 1);
            let mut masses = Vec::with_capacity(values.len() + 1);
            let mut below = 0usize;
            // CDF just below the lowest sample.
            let mut prev = inflate_cdf(0.0, n, count, delta);
            if values[0] > 0.0 {
                atoms.push(0.0);
                masses.push(prev);
            } else {
                prev = 0.0;
            }
            for (&v, &c) in values.iter().zip(&counts) {
                below += c;
                let f = if below == count {
                    1.0
                } else {
                    inflate_cdf(below as f64 / count as f64, n, count, delta).max(prev)
                };
                atoms.push(v);
                masses.push(f - prev);
                prev = f;
            }
            ValueDist::new(&atoms, &masses)
        })
        .collect::<Result<Vec<_>>>()?;
    ProductDist::new(dists)
}

/// A Bernstein confidence radius on the probability scale.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Radius(f64);

impl Radius {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// `t = sqrt(2 m (1 - m) ln(2/δ) / N) + ln(2/δ) / N`: with probability at
/// least `1 - δ` the mean of `N` samples in `[0, 1]` lies within `t` of `m`.
pub fn bernstein_radius(mean: f64, count: usize, delta: f64) -> Result<Radius> {
    if !(0.0..=1.0).contains(&mean) {
        return Err(Error::InvalidParameter(format!("mean {mean} outside [0, 1]")));
    }
    if count == 0 {
        return Err(Error::InvalidParameter("sample count must be at least 1".into()));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("failure probability {delta} outside (0, 1)")));
    }
    let big_n = count as f64;
    let log_term = (2.0 / delta).ln();
    Ok(Radius(
        (2.0 * mean * (1.0 - mean) * log_term / big_n).sqrt() + log_term / big_n,
    ))
}

/// Which sample-complexity bound applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Setting {
    DownwardClosed,
    General,
}

/// Samples prescribed for an `eps`-approximation with probability `1 - delta`:
///
/// - downward-closed: `C (nk/ε²) ln(nk/(εδ))`
/// - general: `C (nk²/ε²) ln(nk/ε) ln(nk/(εδ))`
pub fn required_samples(setting: Setting, n: usize, k: f64, eps: f64, delta: f64, constant: f64) -> Result<u64> {
    if n == 0 || k.is_nan() || k <= 0.0 || constant.is_nan() || constant <= 0.0 {
        return Err(Error::InvalidParameter("n, k and C must be positive".into()));
    }
    if !(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter("eps and delta must lie in (0, 1)".into()));
    }
    let nk = n as f64 * k;
    let conf = (nk / (eps * delta)).ln();
    let raw = match setting {
        Setting::DownwardClosed => constant * nk / (eps * eps) * conf,
        Setting::General => constant * nk * k / (eps * eps) * (nk / eps).ln() * conf,
    };
    Ok(raw.ceil().max(1.0) as u64)
}

/// Squared Hellinger distance `½ Σ (√p − √q)²` over the merged support.
pub fn hellinger_sq(p: &ValueDist, q: &ValueDist) -> f64 {
    let mass = |d: &ValueDist, v: f64| match d.support().binary_search_by(|s| s.total_cmp(&v)) {
        Ok(i) => d.probs()[i],
        Err(_) => 0.0,
    };
    let sum: f64 = merged_support(p, q)
        .into_iter()
        .map(|v| (mass(p, v).sqrt() - mass(q, v).sqrt()).powi(2))
        .sum();
    (0.5 * sum).clamp(0.0, 1.0)
}

/// Squared Hellinger distance between product distributions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductHellinger {
    /// `1 - Π (1 - H_i²)`.
    pub exact: f64,
    /// `Σ H_i²`, the subadditive upper bound.
    pub coordinate_sum: f64,
}

pub fn hellinger_sq_product(ps: &ProductDist, qs: &ProductDist) -> Result<ProductHellinger> {
    if ps.n() != qs.n() {
        return Err(Error::DimensionMismatch {
            expected: ps.n(),
            got: qs.n(),
        });
    }
    let coords: Vec<f64> = ps.dists().iter().zip(qs.dists()).map(|(p, q)| hellinger_sq(p, q)).collect();
    let affinity: f64 = coords.iter().map(|h| 1.0 - h).product();
    Ok(ProductHellinger {
        exact: (1.0 - affinity).clamp(0.0, 1.0),
        coordinate_sum: coords.iter().sum(),
    })
}
