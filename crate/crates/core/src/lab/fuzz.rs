//! Random small instances on a coarse value grid.
//!
//! Supports have at most four atoms from `{0, 0.25, 0.5, 0.75, 1}`, there are
//! at most three bidders, and the feasible set comes from one of three
//! families. Exact enumeration stays well under `10^4` profiles.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::dist::{dominates, is_close, is_close_uniform, ProductDist, ValueDist};
use crate::feasible::FeasibleSet;
use crate::rng::trial_rng;

pub const GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];
pub const MAX_SUPPORT: usize = 4;
pub const MAX_BIDDERS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    UniformMatroid,
    MinimumNonMatroid,
    AllOrNothing,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::UniformMatroid, Family::MinimumNonMatroid, Family::AllOrNothing];

    pub fn is_downward_closed(self) -> bool {
        self != Family::AllOrNothing
    }
}

/// A dominated pair `big ⪰ small` over a feasible set.
#[derive(Debug, Clone)]
pub struct Instance {
    pub family: Family,
    pub fs: FeasibleSet,
    pub big: ProductDist,
    pub small: ProductDist,
}

/// Deterministic generator; instance `index` depends only on `(seed, index)`.
pub struct Fuzzer {
    seed: u64,
}

impl Fuzzer {
    pub fn new(seed: u64) -> Self {
        Fuzzer { seed }
    }

    pub fn rng(&self, index: u64) -> ChaCha8Rng {
        trial_rng(self.seed, index)
    }

    /// A dominated pair with arbitrary (large) mass moves.
    pub fn dominated(&self, index: u64, family: Family) -> Instance {
        let mut rng = self.rng(index);
        let fs = random_feasible(&mut rng, family);
        let big = random_product(&mut rng, fs.n());
        let small = product_map(&big, |d| push_down(&mut rng, d, 1.0));
        Instance { family, fs, big, small }
    }

    /// A dominated pair that is also `eps`-close (variance-sensitive or
    /// uniform) at the instance's `n` and rank.
    pub fn close(&self, index: u64, family: Family, eps: f64, uniform: bool) -> Instance {
        let mut rng = self.rng(index);
        let fs = random_feasible(&mut rng, family);
        let n = fs.n();
        let k = fs.rank();
        let big = random_product(&mut rng, n);
        let small = product_map(&big, |d| close_push_down(&mut rng, d, |a, b| {
            let (a, b) = (single(a), single(b));
            if uniform {
                is_close_uniform(&a, &b, eps, n, k).unwrap()
            } else {
                is_close(&a, &b, eps, n, k).unwrap()
            }
        }));
        debug_assert!(dominates(&big, &small).unwrap());
        Instance { family, fs, big, small }
    }

    /// A pair, not necessarily dominated, whose coordinates move mass in
    /// either direction and stay `eps`-close.
    pub fn perturbed(&self, index: u64, family: Family, eps: f64) -> Instance {
        let mut rng = self.rng(index);
        let fs = random_feasible(&mut rng, family);
        let n = fs.n();
        let k = fs.rank();
        let big = random_product(&mut rng, n);
        let small = product_map(&big, |d| {
            let mut scale = 1.0;
            let upward = rng.gen_bool(0.5);
            let (from, to, frac) = random_move(&mut rng, d, upward);
            loop {
                let moved = move_mass(d, from, to, frac * scale);
                if is_close(&single(d), &single(&moved), eps, n, k).unwrap() {
                    return moved;
                }
                scale *= 0.5;
            }
        });
        Instance { family, fs, big, small }
    }
}

fn single(d: &ValueDist) -> ProductDist {
    ProductDist::new(vec![d.clone()]).expect("one coordinate")
}

fn product_map(p: &ProductDist, mut f: impl FnMut(&ValueDist) -> ValueDist) -> ProductDist {
    ProductDist::new(p.dists().iter().map(&mut f).collect()).expect("nonempty product")
}

pub fn random_feasible(rng: &mut impl Rng, family: Family) -> FeasibleSet {
    match family {
        Family::MinimumNonMatroid => FeasibleSet::minimum_non_matroid(),
        Family::UniformMatroid => {
            let n = rng.gen_range(1..=MAX_BIDDERS);
            FeasibleSet::uniform_matroid(n, rng.gen_range(1..=n)).expect("valid rank")
        }
        Family::AllOrNothing => {
            let n = rng.gen_range(1..=MAX_BIDDERS);
            FeasibleSet::all_or_nothing(n, rng.gen_range(1..=n)).expect("valid rank")
        }
    }
}

/// Random distribution on 1..=4 grid points with random positive masses.
pub fn random_dist(rng: &mut impl Rng) -> ValueDist {
    let size = rng.gen_range(1..=MAX_SUPPORT);
    let values: Vec<f64> = GRID.choose_multiple(rng, size).copied().collect();
    let weights: Vec<f64> = (0..size).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
    // Absorb rounding so the masses sum to 1 within tolerance.
    let drift: f64 = 1.0 - probs.iter().sum::<f64>();
    probs[0] += drift;
    ValueDist::new(&values, &probs).expect("valid random distribution")
}

pub fn random_product(rng: &mut impl Rng, n: usize) -> ProductDist {
    ProductDist::new((0..n).map(|_| random_dist(rng)).collect()).expect("nonempty product")
}

/// Moves `amount` (a fraction of the atom's mass) from atom `from` to value `to`.
pub fn move_mass(d: &ValueDist, from: usize, to: f64, fraction: f64) -> ValueDist {
    let mut values = d.support().to_vec();
    let mut probs = d.probs().to_vec();
    let moved = probs[from] * fraction;
    probs[from] -= moved;
    values.push(to);
    probs.push(moved);
    ValueDist::new(&values, &probs).expect("mass move keeps a distribution")
}

/// Picks an atom and a grid target below it (or above it when `upward`).
/// Returns `(atom index, target, fraction)`; a degenerate choice moves nothing.
fn random_move(rng: &mut impl Rng, d: &ValueDist, upward: bool) -> (usize, f64, f64) {
    let from = rng.gen_range(0..d.len());
    let v = d.support()[from];
    let targets: Vec<f64> = GRID.iter().copied().filter(|&g| if upward { g > v } else { g < v }).collect();
    match targets.choose(rng) {
        Some(&to) => (from, to, rng.gen_range(0.1..=1.0)),
        None => (from, v, 0.0),
    }
}

/// One or two random downward mass moves.
pub fn push_down(rng: &mut impl Rng, d: &ValueDist, max_fraction: f64) -> ValueDist {
    let moves = rng.gen_range(1..=2);
    let mut out = d.clone();
    for _ in 0..moves {
        let (from, to, frac) = random_move(rng, &out, false);
        out = move_mass(&out, from, to, frac * max_fraction);
    }
    out
}

/// A downward move, halved until `accept(d, moved)` holds.
pub fn close_push_down(rng: &mut impl Rng, d: &ValueDist, accept: impl Fn(&ValueDist, &ValueDist) -> bool) -> ValueDist {
    let (from, to, frac) = random_move(rng, d, false);
    let mut scale = 1.0;
    loop {
        let moved = move_mass(d, from, to, frac * scale);
        if accept(d, &moved) {
            return moved;
        }
        scale *= 0.5;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instances_are_small_and_dominated() {
        let fz = Fuzzer::new(1);
        for i in 0..60 {
            for family in Family::ALL {
                let inst = fz.dominated(i, family);
                assert!(inst.fs.n() <= MAX_BIDDERS);
                assert!(inst.big.dists().iter().all(|d| d.len() <= MAX_SUPPORT));
                assert!(dominates(&inst.big, &inst.small).unwrap());
                assert!(inst.small.profile_count() < 10_000);
            }
        }
    }

    #[test]
    fn close_instances_satisfy_preconditions() {
        let fz = Fuzzer::new(2);
        for i in 0..40 {
            for family in Family::ALL {
                let inst = fz.close(i, family, 0.3, false);
                let (n, k) = (inst.fs.n(), inst.fs.rank());
                assert!(dominates(&inst.big, &inst.small).unwrap());
                assert!(is_close(&inst.big, &inst.small, 0.3, n, k).unwrap());
                let inst = fz.close(i, family, 0.3, true);
                assert!(is_close_uniform(&inst.big, &inst.small, 0.3, inst.fs.n(), inst.fs.rank()).unwrap());
            }
        }
    }

    #[test]
    fn generator_is_deterministic() {
        let a = Fuzzer::new(7).dominated(3, Family::UniformMatroid);
        let b = Fuzzer::new(7).dominated(3, Family::UniformMatroid);
        assert_eq!(a.big, b.big);
        assert_eq!(a.small, b.small);
    }
}
