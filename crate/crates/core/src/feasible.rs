//! Feasible allocation systems.
//!
//! A system is stored by its vertices: randomized allocations never beat a
//! vertex on a linear (virtual-welfare) objective, so the auction only ever
//! optimizes over them. Binary systems additionally keep the set-system view
//! as bitmasks over bidders.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest bidder count for which explicit set families are enumerated.
pub const MAX_SET_BIDDERS: usize = 20;

/// A subset of bidders encoded as a bitmask (bit `i` is bidder `i`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BidderSet(pub u64);

impl BidderSet {
    pub const EMPTY: BidderSet = BidderSet(0);

    pub fn from_members(members: &[usize]) -> Self {
        BidderSet(members.iter().fold(0u64, |m, &i| m | (1u64 << i)))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn with(self, i: usize) -> Self {
        BidderSet(self.0 | (1u64 << i))
    }

    pub fn without(self, i: usize) -> Self {
        BidderSet(self.0 & !(1u64 << i))
    }

    pub fn intersect(self, other: Self) -> Self {
        BidderSet(self.0 & other.0)
    }

    pub fn minus(self, other: Self) -> Self {
        BidderSet(self.0 & !other.0)
    }

    pub fn union(self, other: Self) -> Self {
        BidderSet(self.0 | other.0)
    }

    pub fn members(self) -> Vec<usize> {
        (0..64).filter(|&i| self.contains(i)).collect()
    }
}

/// A finite set of allocation vectors in `[0, 1]^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibleSet {
    n: usize,
    vertices: Vec<Vec<f64>>,
    sets: Option<Vec<BidderSet>>,
    rank: f64,
}

impl FeasibleSet {
    /// Builds a system from explicit allocation vectors (duplicates removed).
    pub fn from_vertices(vectors: Vec<Vec<f64>>) -> Result<Self> {
        let n = vectors.first().ok_or(Error::Empty("vertex list"))?.len();
        if n == 0 {
            return Err(Error::Empty("allocation vector"));
        }
        let mut vertices: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
        for x in vectors {
            if x.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: x.len() });
            }
            if let Some(&bad) = x.iter().find(|c| !(0.0..=1.0).contains(*c)) {
                return Err(Error::ValueOutOfRange(bad));
            }
            if !vertices.contains(&x) {
                vertices.push(x);
            }
        }
        let binary = n <= 64 && vertices.iter().all(|x| x.iter().all(|&c| c == 0.0 || c == 1.0));
        let sets = binary.then(|| {
            vertices
                .iter()
                .map(|x| BidderSet(x.iter().enumerate().filter(|(_, &c)| c == 1.0).fold(0, |m, (i, _)| m | 1 << i)))
                .collect()
        });
        let rank = vertices
            .iter()
            .map(|x| x.iter().sum::<f64>())
            .fold(0.0, f64::max);
        Ok(FeasibleSet { n, vertices, sets, rank })
    }

    /// The set system whose independent sets are `sets` (bidders 0-indexed).
    pub fn from_independent_sets(n: usize, sets: &[Vec<usize>]) -> Result<Self> {
        if sets.is_empty() {
            return Err(Error::Empty("set family"));
        }
        if n == 0 || n > 64 {
            return Err(Error::InvalidParameter(format!("bidder count {n} outside 1..=64")));
        }
        let mut masks = Vec::with_capacity(sets.len());
        for s in sets {
            if let Some(&index) = s.iter().find(|&&i| i >= n) {
                return Err(Error::IndexOutOfRange { index, n });
            }
            masks.push(BidderSet::from_members(s));
        }
        Ok(Self::from_masks(n, masks))
    }

    fn from_masks(n: usize, masks: Vec<BidderSet>) -> Self {
        let mut seen = HashSet::new();
        let masks: Vec<BidderSet> = masks.into_iter().filter(|m| seen.insert(*m)).collect();
        let vertices = masks
            .iter()
            .map(|m| (0..n).map(|i| if m.contains(i) { 1.0 } else { 0.0 }).collect())
            .collect();
        let rank = masks.iter().map(|m| m.len()).max().unwrap_or(0) as f64;
        FeasibleSet {
            n,
            vertices,
            sets: Some(masks),
            rank,
        }
    }

    /// All subsets of at most `k` of the `n` bidders.
    pub fn uniform_matroid(n: usize, k: usize) -> Result<Self> {
        if k < 1 || k > n {
            return Err(Error::InvalidParameter(format!("rank {k} outside 1..={n}")));
        }
        if n > MAX_SET_BIDDERS {
            return Err(Error::InvalidParameter(format!("{n} bidders exceeds enumeration limit {MAX_SET_BIDDERS}")));
        }
        let masks = (0u64..1 << n)
            .filter(|m| m.count_ones() as usize <= k)
            .map(BidderSet)
            .collect();
        Ok(Self::from_masks(n, masks))
    }

    /// Three bidders A, B, C (indices 0, 1, 2): A alone, or any subset of {B, C}.
    pub fn minimum_non_matroid() -> Self {
        Self::from_masks(
            3,
            [vec![], vec![0], vec![1], vec![2], vec![1, 2]]
                .iter()
                .map(|s| BidderSet::from_members(s))
                .collect(),
        )
    }

    /// Allocate nothing, or `k / n` to every bidder.
    pub fn all_or_nothing(n: usize, k: usize) -> Result<Self> {
        if k < 1 || k > n {
            return Err(Error::InvalidParameter(format!("rank {k} outside 1..={n}")));
        }
        let share = k as f64 / n as f64;
        let mut fs = Self::from_vertices(vec![vec![0.0; n], vec![share; n]])?;
        fs.rank = k as f64;
        Ok(fs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    /// Independent sets, present iff every vertex is 0/1.
    pub fn sets(&self) -> Option<&[BidderSet]> {
        self.sets.as_deref()
    }

    pub fn is_binary(&self) -> bool {
        self.sets.is_some()
    }

    /// Maximum total allocation of any vertex.
    pub fn rank(&self) -> f64 {
        self.rank
    }

    /// Largest single coordinate over all vertices.
    pub fn max_demand(&self) -> f64 {
        self.vertices
            .iter()
            .flat_map(|x| x.iter().copied())
            .fold(0.0, f64::max)
    }

    fn set_view(&self) -> Result<(&[BidderSet], HashSet<BidderSet>)> {
        let sets = self.sets.as_deref().ok_or(Error::NotBinary)?;
        Ok((sets, sets.iter().copied().collect()))
    }

    /// Every subset of a member is a member.
    pub fn is_downward_closed(&self) -> Result<bool> {
        let (sets, family) = self.set_view()?;
        // Closure under single removals implies closure under all subsets.
        Ok(sets
            .iter()
            .all(|s| s.members().into_iter().all(|i| family.contains(&s.without(i)))))
    }

    /// Matroid axioms: empty set, downward closure, exchange.
    pub fn is_matroid(&self) -> Result<bool> {
        let (sets, family) = self.set_view()?;
        if !family.contains(&BidderSet::EMPTY) || !self.is_downward_closed()? {
            return Ok(false);
        }
        for &big in sets {
            for &small in sets {
                if small.len() < big.len()
                    && !big
                        .minus(small)
                        .members()
                        .into_iter()
                        .any(|i| family.contains(&small.with(i)))
                {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// An exchange violation `(S, S')` with `|S| = |S'| + 1` maximizing
    /// `|S ∩ S'|`, or `None` for a matroid.
    ///
    /// Ties are broken by the smallest `(S, S')` in bitmask order.
    pub fn find_exchange_violation(&self) -> Result<Option<ExchangeViolation>> {
        if !self.is_downward_closed()? {
            return Err(Error::NotDownwardClosed);
        }
        let (sets, family) = self.set_view()?;
        let mut sorted: Vec<BidderSet> = sets.to_vec();
        sorted.sort();
        let mut best: Option<ExchangeViolation> = None;
        for &big in &sorted {
            for &small in &sorted {
                if big.len() != small.len() + 1 {
                    continue;
                }
                let blocked = big
                    .minus(small)
                    .members()
                    .into_iter()
                    .all(|i| !family.contains(&small.with(i)));
                if !blocked {
                    continue;
                }
                let overlap = big.intersect(small).len();
                if best.is_none_or(|b| overlap > b.overlap()) {
                    best = Some(ExchangeViolation { larger: big, smaller: small });
                }
            }
        }
        Ok(best)
    }

    /// Scales every allocation by `1 / demand`.
    pub fn demand_reduce(&self, demand: f64) -> Result<Self> {
        if demand.is_nan() || demand <= 0.0 || demand < self.max_demand() {
            return Err(Error::InvalidParameter(format!(
                "demand {demand} below maximum coordinate {}",
                self.max_demand()
            )));
        }
        if demand == 1.0 {
            return Ok(self.clone());
        }
        let vertices = self
            .vertices
            .iter()
            .map(|x| x.iter().map(|c| c / demand).collect())
            .collect();
        let mut fs = Self::from_vertices(vertices)?;
        fs.rank = self.rank / demand;
        Ok(fs)
    }

    /// Independent juxtaposition: bidders of `other` follow those of `self`
    /// and any pair of allocations may be combined.
    pub fn disjoint_union(&self, other: &FeasibleSet) -> Result<Self> {
        let n = self.n + other.n;
        match (&self.sets, &other.sets) {
            (Some(a), Some(b)) if n <= 64 => {
                let masks = a
                    .iter()
                    .flat_map(|x| b.iter().map(move |y| BidderSet(x.0 | y.0 << self.n)))
                    .collect();
                Ok(Self::from_masks(n, masks))
            }
            _ => {
                let vertices = self
                    .vertices
                    .iter()
                    .flat_map(|x| {
                        other.vertices.iter().map(move |y| {
                            let mut v = x.clone();
                            v.extend_from_slice(y);
                            v
                        })
                    })
                    .collect();
                let mut fs = Self::from_vertices(vertices)?;
                fs.rank = self.rank + other.rank;
                Ok(fs)
            }
        }
    }
}

/// A pair of independent sets witnessing failure of the exchange axiom.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExchangeViolation {
    /// `S`, one element larger than `S'`.
    pub larger: BidderSet,
    /// `S'`: no element of `S \ S'` can be added to it.
    pub smaller: BidderSet,
}

impl ExchangeViolation {
    pub fn overlap(&self) -> usize {
        self.larger.intersect(self.smaller).len()
    }
}

/// JSON description of a feasible set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FeasibleSpec {
    Sets { n: usize, sets: Vec<Vec<usize>> },
    UniformMatroid { n: usize, k: usize },
    AllOrNothing { n: usize, k: usize },
    MinimumNonMatroid,
    Vertices { vectors: Vec<Vec<f64>> },
}

impl FeasibleSpec {
    pub fn build(&self) -> Result<FeasibleSet> {
        match self {
            FeasibleSpec::Sets { n, sets } => FeasibleSet::from_independent_sets(*n, sets),
            FeasibleSpec::UniformMatroid { n, k } => FeasibleSet::uniform_matroid(*n, *k),
            FeasibleSpec::AllOrNothing { n, k } => FeasibleSet::all_or_nothing(*n, *k),
            FeasibleSpec::MinimumNonMatroid => Ok(FeasibleSet::minimum_non_matroid()),
            FeasibleSpec::Vertices { vectors } => FeasibleSet::from_vertices(vectors.clone()),
        }
    }
}

impl TryFrom<FeasibleSpec> for FeasibleSet {
    type Error = Error;

    fn try_from(spec: FeasibleSpec) -> Result<Self> {
        spec.build()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sets(n: usize, family: &[&[usize]]) -> FeasibleSet {
        let v: Vec<Vec<usize>> = family.iter().map(|s| s.to_vec()).collect();
        FeasibleSet::from_independent_sets(n, &v).unwrap()
    }

    #[test]
    fn set_system_constructors() {
        let fs = sets(3, &[&[], &[0], &[1], &[2], &[1, 2]]);
        assert_eq!(fs, FeasibleSet::minimum_non_matroid());
        assert_eq!(fs.rank(), 2.0);

        let single = sets(2, &[&[], &[0], &[1]]);
        assert_eq!(single.rank(), 1.0);
        assert_eq!(single, FeasibleSet::uniform_matroid(2, 1).unwrap());

        let u = FeasibleSet::uniform_matroid(3, 2).unwrap();
        assert_eq!(u.sets().unwrap().len(), 7);
        assert_eq!(u.rank(), 2.0);
        assert_eq!(FeasibleSet::uniform_matroid(3, 1).unwrap().sets().unwrap().len(), 4);
        assert_eq!(FeasibleSet::uniform_matroid(2, 2).unwrap().sets().unwrap().len(), 4);
        assert!(FeasibleSet::uniform_matroid(3, 0).is_err());
        assert!(FeasibleSet::uniform_matroid(3, 4).is_err());

        assert!(matches!(
            FeasibleSet::from_independent_sets(2, &[vec![2]]),
            Err(Error::IndexOutOfRange { index: 2, n: 2 })
        ));
        assert!(FeasibleSet::from_independent_sets(2, &[]).is_err());
    }

    #[test]
    fn minimum_non_matroid_properties() {
        let fs = FeasibleSet::minimum_non_matroid();
        assert!(fs.is_downward_closed().unwrap());
        assert!(!fs.is_matroid().unwrap());
        assert_eq!(fs.rank(), 2.0);
    }

    #[test]
    fn all_or_nothing_is_fractional() {
        let fs = FeasibleSet::all_or_nothing(2, 1).unwrap();
        assert_eq!(fs.vertices(), &[vec![0.0, 0.0], vec![0.5, 0.5]]);
        assert_eq!(fs.rank(), 1.0);
        assert!(!fs.is_binary());
        assert!(matches!(fs.is_downward_closed(), Err(Error::NotBinary)));
        assert_eq!(FeasibleSet::all_or_nothing(4, 2).unwrap().rank(), 2.0);
        assert!(FeasibleSet::all_or_nothing(2, 3).is_err());
    }

    #[test]
    fn downward_closure_and_matroid_checks() {
        assert!(FeasibleSet::uniform_matroid(3, 2).unwrap().is_downward_closed().unwrap());
        assert!(!sets(2, &[&[], &[0, 1]]).is_downward_closed().unwrap());
        assert!(FeasibleSet::uniform_matroid(4, 2).unwrap().is_matroid().unwrap());
        // Exchange fails for S = {0,1}, S' = {2}.
        assert!(!sets(3, &[&[], &[0], &[1], &[0, 1], &[2]]).is_matroid().unwrap());
        // Missing empty set.
        assert!(!sets(1, &[&[0]]).is_matroid().unwrap());
    }

    #[test]
    fn exchange_violation_examples() {
        let v = FeasibleSet::minimum_non_matroid().find_exchange_violation().unwrap().unwrap();
        assert_eq!(v.larger, BidderSet::from_members(&[1, 2]));
        assert_eq!(v.smaller, BidderSet::from_members(&[0]));

        assert_eq!(FeasibleSet::uniform_matroid(3, 2).unwrap().find_exchange_violation().unwrap(), None);

        // Pad with bidders 3 and 4 that combine with every set.
        let base = FeasibleSet::minimum_non_matroid();
        let free = FeasibleSet::uniform_matroid(2, 2).unwrap();
        let padded = base.disjoint_union(&free).unwrap();
        let v = padded.find_exchange_violation().unwrap().unwrap();
        assert_eq!(v.overlap(), 2);
        assert_eq!(v.larger, BidderSet::from_members(&[1, 2, 3, 4]));
        assert_eq!(v.smaller, BidderSet::from_members(&[0, 3, 4]));

        assert!(matches!(
            sets(2, &[&[], &[0, 1]]).find_exchange_violation(),
            Err(Error::NotDownwardClosed)
        ));
    }

    #[test]
    fn demand_reduction() {
        let fs = FeasibleSet::all_or_nothing(2, 2).unwrap();
        let half = fs.demand_reduce(2.0).unwrap();
        assert_eq!(half.vertices(), &[vec![0.0, 0.0], vec![0.5, 0.5]]);
        assert_eq!(half.rank(), 1.0);
        assert_eq!(fs.demand_reduce(1.0).unwrap(), fs);

        let single = FeasibleSet::uniform_matroid(2, 1).unwrap().demand_reduce(2.0).unwrap();
        assert!(single.vertices().iter().flatten().all(|&c| c == 0.0 || c == 0.5));
        assert_eq!(single.rank(), 0.5);

        let frac = FeasibleSet::from_vertices(vec![vec![0.8, 0.0]]).unwrap();
        assert!(frac.demand_reduce(0.5).is_err());
    }

    #[test]
    fn json_specs() {
        let fs: FeasibleSpec = serde_json::from_str(r#"{"type":"sets","n":3,"sets":[[ ],[0],[1],[2],[1,2]]}"#).unwrap();
        assert_eq!(fs.build().unwrap(), FeasibleSet::minimum_non_matroid());
        let fs: FeasibleSpec = serde_json::from_str(r#"{"type":"uniform_matroid","n":3,"k":2}"#).unwrap();
        assert_eq!(fs.build().unwrap().rank(), 2.0);
        let fs: FeasibleSpec = serde_json::from_str(r#"{"type":"all_or_nothing","n":4,"k":2}"#).unwrap();
        assert_eq!(fs.build().unwrap().vertices()[1], vec![0.5; 4]);
        let fs: FeasibleSpec = serde_json::from_str(r#"{"type":"vertices","vectors":[[0,0],[0.5,0.5]]}"#).unwrap();
        assert_eq!(fs.build().unwrap().rank(), 1.0);
        assert!(serde_json::from_str::<FeasibleSpec>(r#"{"type":"bogus"}"#).is_err());
    }
}
