//! Revenue curves in quantile space, ironing and ironed virtual values.
//!
//! For a finite distribution with atoms `v_(1) > v_(2) > ... > v_(m)` the
//! revenue curve has breakpoints `(0, 0)` and `(q_j, q_j v_(j))` with
//! `q_j = Pr[u >= v_(j)]`; linear interpolation between consecutive
//! breakpoints is exactly the point-mass interpolation between `q-` and `q+`.
//! Ironing takes the upper concave envelope of those breakpoints.
//!
//! A value `v` has quantile `Pr[u > v]`, which is always one of the breakpoint
//! quantiles. Virtual values are therefore looked up by breakpoint *index*
//! rather than by floating-point quantile, which keeps them exact.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dist::ValueDist;
use crate::MASS_TOL;

/// An extended real used for (ironed) virtual values.
///
/// `NegInf` marks values strictly below the lowest atom of the prior, whose
/// quantile is 1 and which have no curve to the right. It only supports
/// comparison; welfare code must handle it explicitly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Virtual {
    NegInf,
    Finite(f64),
}

impl Virtual {
    pub fn finite(self) -> Option<f64> {
        match self {
            Virtual::Finite(x) => Some(x),
            Virtual::NegInf => None,
        }
    }

    pub fn is_neg_inf(self) -> bool {
        matches!(self, Virtual::NegInf)
    }
}

impl PartialOrd for Virtual {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Virtual::NegInf, Virtual::NegInf) => Some(Ordering::Equal),
            (Virtual::NegInf, Virtual::Finite(_)) => Some(Ordering::Less),
            (Virtual::Finite(_), Virtual::NegInf) => Some(Ordering::Greater),
            (Virtual::Finite(a), Virtual::Finite(b)) => a.partial_cmp(b),
        }
    }
}

impl fmt::Display for Virtual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Virtual::NegInf => write!(f, "-inf"),
            Virtual::Finite(x) => write!(f, "{x}"),
        }
    }
}

/// A piecewise-linear curve on quantile space `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RevenueCurve {
    breakpoints: Vec<(f64, f64)>,
}

impl RevenueCurve {
    /// Breakpoints `(quantile, revenue)`, quantiles strictly increasing from 0 to 1.
    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.breakpoints
    }

    /// Linear interpolation at quantile `q` (clamped to `[0, 1]`).
    pub fn eval(&self, q: f64) -> f64 {
        let pts = &self.breakpoints;
        let q = q.clamp(0.0, 1.0);
        let idx = pts.partition_point(|&(x, _)| x <= q);
        if idx == 0 {
            return pts[0].1;
        }
        if idx == pts.len() {
            return pts[pts.len() - 1].1;
        }
        let (x0, y0) = pts[idx - 1];
        let (x1, y1) = pts[idx];
        y0 + (y1 - y0) * (q - x0) / (x1 - x0)
    }

    /// Slope of segment `s` (between breakpoints `s` and `s + 1`).
    pub fn slope(&self, s: usize) -> f64 {
        let (x0, y0) = self.breakpoints[s];
        let (x1, y1) = self.breakpoints[s + 1];
        (y1 - y0) / (x1 - x0)
    }

    pub fn slopes(&self) -> Vec<f64> {
        (0..self.breakpoints.len() - 1).map(|s| self.slope(s)).collect()
    }

    /// Maximum revenue over breakpoints.
    pub fn max_revenue(&self) -> f64 {
        self.breakpoints.iter().map(|&(_, r)| r).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// The revenue curve of `d`.
pub fn revenue_curve(d: &ValueDist) -> RevenueCurve {
    let tails = d.tail_masses();
    let mut breakpoints = Vec::with_capacity(d.len() + 1);
    breakpoints.push((0.0, 0.0));
    for (&v, &q) in d.support().iter().rev().zip(&tails) {
        breakpoints.push((q, q * v));
    }
    RevenueCurve { breakpoints }
}

/// Indices of the breakpoints on the upper concave envelope (monotone chain).
///
/// Points on or below the chord of their neighbours are dropped.
fn upper_hull_indices(pts: &[(f64, f64)]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::with_capacity(pts.len());
    for (i, &p) in pts.iter().enumerate() {
        while hull.len() >= 2 {
            let a = pts[hull[hull.len() - 2]];
            let b = pts[hull[hull.len() - 1]];
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    hull
}

/// The ironed curve: upper concave envelope of `c`'s breakpoints.
pub fn iron(c: &RevenueCurve) -> RevenueCurve {
    let breakpoints = upper_hull_indices(&c.breakpoints)
        .into_iter()
        .map(|i| c.breakpoints[i])
        .collect();
    RevenueCurve { breakpoints }
}

/// Ironed virtual values of a distribution, as a right-continuous step function.
///
/// `phis[j]` is the ironed virtual value of every `v` in
/// `[support[j], support[j + 1])`; values above the top atom map to the
/// quantile-0 slope and values below the lowest atom to [`Virtual::NegInf`].
#[derive(Debug, Clone, PartialEq)]
pub struct VirtualTable {
    support: Vec<f64>,
    phis: Vec<f64>,
}

impl VirtualTable {
    pub fn new(d: &ValueDist) -> Self {
        let raw = revenue_curve(d);
        let hull = upper_hull_indices(&raw.breakpoints);
        let m = d.len();
        // Breakpoint index t in 0..m is the quantile Pr[u > v] for the atom
        // v_(t+1) in descending order; its right derivative is the slope of
        // the hull segment that starts at or covers t.
        let mut by_desc = Vec::with_capacity(m);
        let mut seg = 0;
        for t in 0..m {
            while hull[seg + 1] <= t {
                seg += 1;
            }
            let (x0, y0) = raw.breakpoints[hull[seg]];
            let (x1, y1) = raw.breakpoints[hull[seg + 1]];
            by_desc.push((y1 - y0) / (x1 - x0));
        }
        by_desc.reverse();
        VirtualTable {
            support: d.support().to_vec(),
            phis: by_desc,
        }
    }

    /// Prior support values; the step function only changes at these points.
    pub fn breakpoints(&self) -> &[f64] {
        &self.support
    }

    /// Ironed virtual value of each support atom, ascending by value.
    pub fn atom_values(&self) -> &[f64] {
        &self.phis
    }

    pub fn eval(&self, v: f64) -> Virtual {
        let idx = self.support.partition_point(|&s| s <= v);
        if idx == 0 {
            Virtual::NegInf
        } else {
            Virtual::Finite(self.phis[idx - 1])
        }
    }

    /// Value on piece `p`, where piece 0 is `[0, support[0])` and piece
    /// `j + 1` is `[support[j], support[j + 1])`.
    pub fn piece(&self, p: usize) -> Virtual {
        if p == 0 {
            Virtual::NegInf
        } else {
            Virtual::Finite(self.phis[p - 1])
        }
    }
}

/// Right derivative of the ironed revenue curve at the quantile of `v`.
pub fn ironed_virtual(d: &ValueDist, v: f64) -> Virtual {
    VirtualTable::new(d).eval(v)
}

/// Quantile intervals on which ironing strictly raises the curve of `d`.
pub fn ironing_intervals(d: &ValueDist) -> Vec<(f64, f64)> {
    curve_ironing_intervals(&revenue_curve(d))
}

/// Quantile intervals on which the envelope of `c` lies strictly above `c`.
///
/// One interval per envelope segment that passes above a skipped breakpoint
/// by more than the mass tolerance.
pub fn curve_ironing_intervals(c: &RevenueCurve) -> Vec<(f64, f64)> {
    let pts = c.breakpoints();
    let hull = upper_hull_indices(pts);
    let ironed = RevenueCurve {
        breakpoints: hull.iter().map(|&i| pts[i]).collect(),
    };
    hull.windows(2)
        .filter(|w| (w[0] + 1..w[1]).any(|i| ironed.eval(pts[i].0) > pts[i].1 + MASS_TOL))
        .map(|w| (pts[w[0]].0, pts[w[1]].0))
        .collect()
}

/// Whether the revenue curve is already concave.
pub fn is_regular(d: &ValueDist) -> bool {
    ironing_intervals(d).is_empty()
}

/// Breakpoint lists for export: raw and ironed curves plus the ironed
/// virtual value at each support atom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveDump {
    pub raw: Vec<(f64, f64)>,
    pub ironed: Vec<(f64, f64)>,
    pub ironing_intervals: Vec<(f64, f64)>,
    pub virtual_values: Vec<(f64, f64)>,
}

pub fn dump(d: &ValueDist) -> CurveDump {
    let raw = revenue_curve(d);
    let ironed = iron(&raw);
    let table = VirtualTable::new(d);
    CurveDump {
        ironing_intervals: curve_ironing_intervals(&raw),
        virtual_values: table.breakpoints().iter().copied().zip(table.atom_values().iter().copied()).collect(),
        raw: raw.breakpoints,
        ironed: ironed.breakpoints,
    }
}

/// Monopoly price and revenue: the support value maximising `p Pr[u >= p]`,
/// ties broken toward the larger price.
pub fn monopoly(d: &ValueDist) -> (f64, f64) {
    let tails = d.tail_masses();
    let mut best = (0.0, f64::NEG_INFINITY);
    for (&v, &q) in d.support().iter().rev().zip(&tails) {
        let rev = v * q;
        if rev > best.1 + MASS_TOL {
            best = (v, rev);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn two_point() -> ValueDist {
        ValueDist::new(&[0.1, 1.0], &[0.9, 0.1]).unwrap()
    }

    fn thirds() -> ValueDist {
        ValueDist::new(&[1.0 / 3.0, 2.0 / 3.0, 1.0], &[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]).unwrap()
    }

    fn assert_points(actual: &[(f64, f64)], expected: &[(f64, f64)]) {
        assert_eq!(actual.len(), expected.len(), "{actual:?} vs {expected:?}");
        for (a, e) in actual.iter().zip(expected) {
            assert_abs_diff_eq!(a.0, e.0, epsilon = 1e-12);
            assert_abs_diff_eq!(a.1, e.1, epsilon = 1e-12);
        }
    }

    #[test]
    fn revenue_curve_examples() {
        assert_points(
            revenue_curve(&two_point()).breakpoints(),
            &[(0.0, 0.0), (0.1, 0.1), (1.0, 0.1)],
        );
        assert_points(
            revenue_curve(&ValueDist::point(0.5).unwrap()).breakpoints(),
            &[(0.0, 0.0), (1.0, 0.5)],
        );
        assert_points(
            revenue_curve(&thirds()).breakpoints(),
            &[(0.0, 0.0), (1.0 / 3.0, 1.0 / 3.0), (2.0 / 3.0, 4.0 / 9.0), (1.0, 1.0 / 3.0)],
        );
    }

    #[test]
    fn iron_examples() {
        let c = revenue_curve(&two_point());
        assert_eq!(iron(&c), c);

        let v = RevenueCurve {
            breakpoints: vec![(0.0, 0.0), (0.5, 0.1), (1.0, 0.4)],
        };
        assert_points(iron(&v).breakpoints(), &[(0.0, 0.0), (1.0, 0.4)]);
    }

    #[test]
    fn ironed_virtual_examples() {
        let d = two_point();
        assert_eq!(ironed_virtual(&d, 1.0), Virtual::Finite(1.0));
        assert_eq!(ironed_virtual(&d, 0.5), Virtual::Finite(0.0));
        assert_eq!(ironed_virtual(&d, 0.1), Virtual::Finite(0.0));
        assert_eq!(ironed_virtual(&d, 0.05), Virtual::NegInf);
        assert_eq!(ironed_virtual(&d, 1.0), ironed_virtual(&d, 1.0));

        let half = ValueDist::point(0.5).unwrap();
        assert_eq!(ironed_virtual(&half, 0.5), Virtual::Finite(0.5));
        // Above the top atom: quantile 0, first slope.
        assert_eq!(ironed_virtual(&half, 0.9), Virtual::Finite(0.5));

        let one = ValueDist::point(1.0).unwrap();
        assert_eq!(ironed_virtual(&one, 1.0), Virtual::Finite(1.0));
    }

    #[test]
    fn neg_inf_orders_below_everything() {
        assert!(Virtual::NegInf < Virtual::Finite(-1e300));
        assert!(Virtual::Finite(0.0) > Virtual::NegInf);
        assert!(Virtual::Finite(1.0) > Virtual::Finite(0.5));
    }

    #[test]
    fn ironing_interval_examples() {
        assert!(ironing_intervals(&two_point()).is_empty());

        let v = RevenueCurve {
            breakpoints: vec![(0.0, 0.0), (0.5, 0.1), (1.0, 0.4)],
        };
        assert_eq!(curve_ironing_intervals(&v), vec![(0.0, 1.0)]);
    }

    #[test]
    fn irregular_distribution_is_ironed() {
        // High value with small mass, a middle mass that the curve dips under.
        let d = ValueDist::new(&[0.3, 0.5, 1.0], &[0.5, 0.3, 0.2]).unwrap();
        // Breakpoints: (0,0), (0.2,0.2), (0.5,0.25), (1,0.3): slopes 1, 1/6, 1/10 concave.
        assert!(is_regular(&d));
        let d = ValueDist::new(&[0.25, 0.3, 1.0], &[0.2, 0.6, 0.2]).unwrap();
        // (0,0), (0.2,0.2), (0.8,0.24), (1,0.25): slopes 1, 1/15, 1/20: concave.
        assert!(is_regular(&d));
        let d = ValueDist::new(&[0.2, 0.25, 1.0], &[0.6, 0.2, 0.2]).unwrap();
        // (0,0), (0.2,0.2), (0.4,0.1), (1,0.2): middle point under the chord.
        let iv = ironing_intervals(&d);
        assert_eq!(iv.len(), 1);
        assert_abs_diff_eq!(iv[0].0, 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(iv[0].1, 1.0, epsilon = 1e-12);
        let table = VirtualTable::new(&d);
        // Atoms 0.25 and 0.2 share the ironed slope 0.
        assert_abs_diff_eq!(table.atom_values()[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(table.atom_values()[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(table.atom_values()[2], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn monopoly_examples() {
        assert_eq!(monopoly(&two_point()), (1.0, 0.1));
        assert_eq!(monopoly(&ValueDist::point(0.5).unwrap()), (0.5, 0.5));
        let (p, r) = monopoly(&thirds());
        assert_abs_diff_eq!(p, 2.0 / 3.0);
        assert_abs_diff_eq!(r, 4.0 / 9.0, epsilon = 1e-12);
    }

    #[test]
    fn curve_eval_interpolates() {
        let c = revenue_curve(&two_point());
        assert_abs_diff_eq!(c.eval(0.05), 0.05);
        assert_abs_diff_eq!(c.eval(0.55), 0.1);
        assert_abs_diff_eq!(c.eval(1.0), 0.1);
    }

    #[test]
    fn dump_lists_breakpoints() {
        let d = dump(&two_point());
        assert_points(&d.raw, &[(0.0, 0.0), (0.1, 0.1), (1.0, 0.1)]);
        assert_eq!(d.raw, d.ironed);
        assert!(d.ironing_intervals.is_empty());
        assert_points(&d.virtual_values, &[(0.1, 0.0), (1.0, 1.0)]);
        let json = serde_json::to_value(&d).unwrap();
        assert_eq!(json["raw"][1], serde_json::json!([0.1, 0.1]));
    }
}
