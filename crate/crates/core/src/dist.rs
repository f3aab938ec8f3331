//! Finite value distributions on `[0, 1]` and the product priors built from them.
//!
//! CDF-based predicates (dominance, closeness) only need to be evaluated at the
//! merged support points of the two distributions and the left limits just
//! below them, since step CDFs attain every value there.

use serde::{Deserialize, Serialize};

use crate::{Error, Result, MASS_TOL};

/// A discrete distribution with finitely many atoms in `[0, 1]`.
///
/// The support is strictly increasing and every stored atom has positive mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDist", into = "RawDist")]
pub struct ValueDist {
    support: Vec<f64>,
    probs: Vec<f64>,
    // cum[j] = Pr[u <= support[j]]
    cum: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawDist {
    support: Vec<f64>,
    probs: Vec<f64>,
}

impl TryFrom<RawDist> for ValueDist {
    type Error = Error;

    fn try_from(raw: RawDist) -> Result<Self> {
        ValueDist::new(&raw.support, &raw.probs)
    }
}

impl From<ValueDist> for RawDist {
    fn from(d: ValueDist) -> Self {
        RawDist {
            support: d.support,
            probs: d.probs,
        }
    }
}

impl ValueDist {
    /// Builds a distribution from parallel value/probability lists.
    ///
    /// Duplicate values are merged, zero-probability atoms dropped and the
    /// support sorted ascending.
    pub fn new(values: &[f64], probs: &[f64]) -> Result<Self> {
        if values.len() != probs.len() {
            return Err(Error::LengthMismatch {
                values: values.len(),
                probs: probs.len(),
            });
        }
        if values.is_empty() {
            return Err(Error::Empty("distribution"));
        }
        for &v in values {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::ValueOutOfRange(v));
            }
        }
        for &p in probs {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidProbability(p));
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::MassSum(total));
        }

        let mut atoms: Vec<(f64, f64)> = values.iter().copied().zip(probs.iter().copied()).collect();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut support: Vec<f64> = Vec::with_capacity(atoms.len());
        let mut masses: Vec<f64> = Vec::with_capacity(atoms.len());
        for (v, p) in atoms {
            match support.last() {
                Some(&last) if last == v => *masses.last_mut().unwrap() += p,
                _ => {
                    support.push(v);
                    masses.push(p);
                }
            }
        }
        let (support, probs): (Vec<f64>, Vec<f64>) = support
            .into_iter()
            .zip(masses)
            .filter(|&(_, p)| p > 0.0)
            .unzip();
        if support.is_empty() {
            return Err(Error::MassSum(0.0));
        }
        Ok(Self::from_parts(support, probs))
    }

    fn from_parts(support: Vec<f64>, probs: Vec<f64>) -> Self {
        let mut acc = 0.0;
        let cum = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        ValueDist { support, probs, cum }
    }

    /// A point mass at `v`.
    pub fn point(v: f64) -> Result<Self> {
        Self::new(&[v], &[1.0])
    }

    /// Support values, strictly increasing.
    pub fn support(&self) -> &[f64] {
        &self.support
    }

    /// Atom masses aligned with [`support`](Self::support).
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.support.iter().copied().zip(self.probs.iter().copied())
    }

    pub fn min_value(&self) -> f64 {
        self.support[0]
    }

    pub fn max_value(&self) -> f64 {
        *self.support.last().unwrap()
    }

    /// `Pr[u <= v]`.
    pub fn cdf(&self, v: f64) -> f64 {
        if v >= self.max_value() {
            return 1.0;
        }
        let idx = self.support.partition_point(|&s| s <= v);
        if idx == 0 {
            0.0
        } else {
            self.cum[idx - 1]
        }
    }

    /// `Pr[u < v]`, the left limit of the CDF at `v`.
    pub fn cdf_left(&self, v: f64) -> f64 {
        let idx = self.support.partition_point(|&s| s < v);
        if idx == 0 {
            0.0
        } else if idx == self.len() {
            1.0
        } else {
            self.cum[idx - 1]
        }
    }

    /// The quantile `Pr[u > v]`.
    pub fn quantile_of_value(&self, v: f64) -> f64 {
        1.0 - self.cdf(v)
    }

    /// Tail masses `Pr[u >= v_(j)]` over the support in descending order.
    ///
    /// Accumulated from the top so that small quantiles carry no cancellation
    /// error; the last entry is exactly 1.
    pub fn tail_masses(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut tails: Vec<f64> = self
            .probs
            .iter()
            .rev()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        if let Some(last) = tails.last_mut() {
            *last = 1.0;
        }
        tails
    }

    /// `inf { v : Pr[u > v] <= q }`; a support value, or 0.
    pub fn value_of_quantile(&self, q: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidParameter(format!("quantile {q} outside [0, 1]")));
        }
        let tails = self.tail_masses();
        // Largest j with tails[j-1] <= q (tails[-1] = 0 always qualifies).
        let j = tails.partition_point(|&t| t <= q + MASS_TOL);
        let m = self.len();
        Ok(if j >= m { 0.0 } else { self.support[m - 1 - j] })
    }

    /// Multiplies every support value by `factor`.
    pub fn scale_values(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor <= 1.0) {
            return Err(Error::InvalidParameter(format!("scale factor {factor} outside (0, 1]")));
        }
        let support = self.support.iter().map(|v| v * factor).collect();
        Ok(Self::from_parts(support, self.probs.clone()))
    }

    /// Mean value.
    pub fn mean(&self) -> f64 {
        self.atoms().map(|(v, p)| v * p).sum()
    }

    /// Draws one value by inverse-CDF sampling from a uniform `u` in `[0, 1)`.
    pub fn sample_with(&self, u: f64) -> f64 {
        let idx = self.cum.partition_point(|&c| c <= u);
        self.support[idx.min(self.len() - 1)]
    }
}

/// Merged support of two distributions, ascending and deduplicated.
pub(crate) fn merged_support(a: &ValueDist, b: &ValueDist) -> Vec<f64> {
    let mut points: Vec<f64> = a.support().iter().chain(b.support()).copied().collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    points
}

/// `(a(v), b(v))` at every point where either CDF can change, together with
/// the left limits just below those points.
fn cdf_checkpoints(a: &ValueDist, b: &ValueDist) -> Vec<(f64, f64)> {
    let points = merged_support(a, b);
    let mut out = Vec::with_capacity(2 * points.len());
    for &v in &points {
        out.push((a.cdf_left(v), b.cdf_left(v)));
        out.push((a.cdf(v), b.cdf(v)));
    }
    out
}

/// An ordered product `D_1 x ... x D_n` of independent value distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ValueDist>", into = "Vec<ValueDist>")]
pub struct ProductDist {
    dists: Vec<ValueDist>,
}

impl TryFrom<Vec<ValueDist>> for ProductDist {
    type Error = Error;

    fn try_from(dists: Vec<ValueDist>) -> Result<Self> {
        ProductDist::new(dists)
    }
}

impl From<ProductDist> for Vec<ValueDist> {
    fn from(p: ProductDist) -> Self {
        p.dists
    }
}

impl ProductDist {
    pub fn new(dists: Vec<ValueDist>) -> Result<Self> {
        if dists.is_empty() {
            return Err(Error::Empty("product distribution"));
        }
        Ok(ProductDist { dists })
    }

    /// `n` independent copies of `d`.
    pub fn iid(d: ValueDist, n: usize) -> Result<Self> {
        Self::new(vec![d; n])
    }

    pub fn n(&self) -> usize {
        self.dists.len()
    }

    pub fn dists(&self) -> &[ValueDist] {
        &self.dists
    }

    pub fn get(&self, i: usize) -> &ValueDist {
        &self.dists[i]
    }

    /// Concatenates the bidders of `self` and `other`.
    pub fn concat(&self, other: &ProductDist) -> ProductDist {
        let mut dists = self.dists.clone();
        dists.extend(other.dists.iter().cloned());
        ProductDist { dists }
    }

    /// Number of support profiles, saturating.
    pub fn profile_count(&self) -> u128 {
        self.dists
            .iter()
            .fold(1u128, |acc, d| acc.saturating_mul(d.len() as u128))
    }

    /// Visits every support profile with its probability.
    pub fn for_each_profile(&self, mut f: impl FnMut(&[f64], f64)) {
        let n = self.n();
        let mut idx = vec![0usize; n];
        let mut values: Vec<f64> = self.dists.iter().map(|d| d.support[0]).collect();
        loop {
            let prob: f64 = (0..n).map(|i| self.dists[i].probs[idx[i]]).product();
            f(&values, prob);
            let mut i = 0;
            loop {
                if i == n {
                    return;
                }
                idx[i] += 1;
                if idx[i] < self.dists[i].len() {
                    values[i] = self.dists[i].support[idx[i]];
                    break;
                }
                idx[i] = 0;
                values[i] = self.dists[i].support[0];
                i += 1;
            }
        }
    }

    fn check_dims(&self, other: &ProductDist) -> Result<()> {
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: other.n(),
            });
        }
        Ok(())
    }
}

/// First-order stochastic dominance of `big` over `small`, coordinate-wise:
/// `big_i(v) <= small_i(v)` for every bidder and value.
pub fn dominates(big: &ProductDist, small: &ProductDist) -> Result<bool> {
    big.check_dims(small)?;
    Ok(big.dists.iter().zip(&small.dists).all(|(b, s)| {
        merged_support(b, s)
            .into_iter()
            .all(|v| b.cdf(v) <= s.cdf(v) + MASS_TOL)
    }))
}

fn check_close_params(a: &ProductDist, b: &ProductDist, eps: f64, n: usize, k: f64) -> Result<()> {
    a.check_dims(b)?;
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::InvalidParameter(format!("closeness tolerance {eps} must be positive")));
    }
    if n == 0 || k.is_nan() || k <= 0.0 {
        return Err(Error::InvalidParameter("n and k must be positive".into()));
    }
    Ok(())
}

/// Largest CDF gap allowed at one point by variance-sensitive closeness.
pub fn closeness_radius(fa: f64, fb: f64, eps: f64, n: usize, k: f64) -> f64 {
    let nk = n as f64 * k;
    let var = (fa * (1.0 - fa)).min(fb * (1.0 - fb)).max(0.0);
    (var * eps * eps / (4.0 * nk)).sqrt() + eps * eps / (2.0 * nk)
}

/// Variance-sensitive `eps`-closeness of two product priors.
pub fn is_close(a: &ProductDist, b: &ProductDist, eps: f64, n: usize, k: f64) -> Result<bool> {
    check_close_params(a, b, eps, n, k)?;
    Ok(a.dists.iter().zip(&b.dists).all(|(da, db)| {
        cdf_checkpoints(da, db)
            .into_iter()
            .all(|(fa, fb)| (fa - fb).abs() <= closeness_radius(fa, fb, eps, n, k) + MASS_TOL)
    }))
}

/// Uniform `eps`-closeness: every CDF gap at most `eps / sqrt(n k)`.
pub fn is_close_uniform(a: &ProductDist, b: &ProductDist, eps: f64, n: usize, k: f64) -> Result<bool> {
    check_close_params(a, b, eps, n, k)?;
    let bound = eps / (n as f64 * k).sqrt();
    Ok(a.dists.iter().zip(&b.dists).all(|(da, db)| {
        cdf_checkpoints(da, db)
            .into_iter()
            .all(|(fa, fb)| (fa - fb).abs() <= bound + MASS_TOL)
    }))
}
