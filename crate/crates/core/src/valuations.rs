//! Symmetric valuation functions over identical items.
//!
//! A valuation is the vector `v(0), v(1), ..., v(m)` with `v(0) = 0` and
//! non-decreasing entries. This module classifies valuations into the
//! additive / submodular / XOS / subadditive hierarchy, builds the minimal
//! XOS and submodular functions dominating a valuation, and measures how
//! far apart two valuations are.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{self, from_usize, Frac, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValuationError {
    #[error("valuation must have at least one entry")]
    Empty,
    #[error("valuation is not normalized: v(0) = {0}")]
    NotNormalized(String),
    #[error("valuation is not monotone: v({index}) = {next} < v({prev_index}) = {prev}", prev_index = index - 1)]
    NotMonotone {
        index: usize,
        prev: String,
        next: String,
    },
    #[error("closeness undefined: upper bound is {upper} > 0 = v({index})")]
    Domain { index: usize, upper: String },
    #[error("valuations have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
}

/// The valuation classes for symmetric functions, ordered from most to least restrictive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValuationClass {
    Additive,
    Submodular,
    Xos,
    Subadditive,
    General,
}

impl ValuationClass {
    pub const ALL: [ValuationClass; 5] = [
        ValuationClass::Additive,
        ValuationClass::Submodular,
        ValuationClass::Xos,
        ValuationClass::Subadditive,
        ValuationClass::General,
    ];

    /// `true` when every valuation of class `self` also belongs to `other`.
    pub fn is_within(self, other: ValuationClass) -> bool {
        self <= other
    }

    pub fn name(self) -> &'static str {
        match self {
            ValuationClass::Additive => "additive",
            ValuationClass::Submodular => "submodular",
            ValuationClass::Xos => "xos",
            ValuationClass::Subadditive => "subadditive",
            ValuationClass::General => "general",
        }
    }
}

impl fmt::Display for ValuationClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Value by bundle size, `values[k] = v(k)` for `k = 0..=m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawValuation", into = "RawValuation")]
pub struct SymmetricValuation {
    values: Vec<Rational>,
}

#[derive(Serialize, Deserialize)]
struct RawValuation {
    #[serde(with = "rational::serde_vec")]
    values: Vec<Rational>,
}

impl TryFrom<RawValuation> for SymmetricValuation {
    type Error = ValuationError;

    fn try_from(raw: RawValuation) -> Result<Self, Self::Error> {
        SymmetricValuation::new(raw.values)
    }
}

impl From<SymmetricValuation> for RawValuation {
    fn from(v: SymmetricValuation) -> Self {
        RawValuation { values: v.values }
    }
}

impl SymmetricValuation {
    pub fn new(values: Vec<Rational>) -> Result<Self, ValuationError> {
        let first = values.first().ok_or(ValuationError::Empty)?;
        if !first.is_zero() {
            return Err(ValuationError::NotNormalized(rational::format_rational(first)));
        }
        for (index, pair) in values.windows(2).enumerate() {
            if pair[1] < pair[0] {
                return Err(ValuationError::NotMonotone {
                    index: index + 1,
                    prev: rational::format_rational(&pair[0]),
                    next: rational::format_rational(&pair[1]),
                });
            }
        }
        Ok(SymmetricValuation { values })
    }

    /// Builds a valuation from integer values; panics on invalid input. Handy for tests and generators.
    pub fn from_ints(values: &[i64]) -> Self {
        Self::new(values.iter().map(|&v| rational::int(v)).collect()).expect("valid integer valuation")
    }

    /// Running sum of the given marginals, prefixed with `v(0) = 0`.
    pub fn from_marginals(marginals: &[Rational]) -> Result<Self, ValuationError> {
        let mut values = Vec::with_capacity(marginals.len() + 1);
        values.push(Rational::zero());
        let mut acc = Rational::zero();
        for marginal in marginals {
            acc += marginal;
            values.push(acc.clone());
        }
        Self::new(values)
    }

    pub fn zero(m: usize) -> Self {
        SymmetricValuation {
            values: vec![Rational::zero(); m + 1],
        }
    }

    /// `v(k) = value` for every `k >= 1`.
    pub fn unit_demand(m: usize, value: Rational) -> Self {
        let mut values = vec![value; m + 1];
        values[0] = Rational::zero();
        Self::new(values).expect("unit-demand value must be non-negative")
    }

    /// `v(k) = k * per_item`.
    pub fn additive(m: usize, per_item: Rational) -> Self {
        Self::new((0..=m).map(|k| from_usize(k) * &per_item).collect()).expect("additive value must be non-negative")
    }

    /// Positive value only for the grand bundle.
    pub fn single_minded(m: usize, value: Rational) -> Self {
        let mut values = vec![Rational::zero(); m + 1];
        if m > 0 {
            values[m] = value;
        }
        Self::new(values).expect("single-minded value must be non-negative")
    }

    /// Number of items the valuation is defined over.
    pub fn m(&self) -> usize {
        self.values.len() - 1
    }

    pub fn value(&self, k: usize) -> &Rational {
        &self.values[k]
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    /// `v(k) - v(k-1)` for `k >= 1`.
    pub fn marginal(&self, k: usize) -> Rational {
        &self.values[k] - &self.values[k - 1]
    }

    pub fn marginals(&self) -> Vec<Rational> {
        (1..=self.m()).map(|k| self.marginal(k)).collect()
    }

    pub fn scaled(&self, factor: &Rational) -> Self {
        Self::new(self.values.iter().map(|v| v * factor).collect()).expect("non-negative scale keeps validity")
    }

    /// Pointwise `self >= other`.
    pub fn dominates(&self, other: &SymmetricValuation) -> bool {
        self.values.len() == other.values.len() && self.values.iter().zip(&other.values).all(|(a, b)| a >= b)
    }

    pub fn is_additive(&self) -> bool {
        match self.values.get(1) {
            None => true,
            Some(a) => self.values.iter().enumerate().all(|(i, v)| *v == from_usize(i) * a),
        }
    }

    pub fn is_submodular(&self) -> bool {
        let marginals = self.marginals();
        marginals.windows(2).all(|w| w[0] >= w[1])
    }

    /// `v(i) >= (i/j) v(j)` for all `1 <= i < j <= m`, i.e. `v(i)/i` is non-increasing.
    pub fn is_xos(&self) -> bool {
        let m = self.m();
        (1..m).all(|i| {
            // Comparing consecutive averages suffices: the ratio v(i)/i must be non-increasing.
            &self.values[i] * from_usize(i + 1) >= &self.values[i + 1] * from_usize(i)
        })
    }

    pub fn is_subadditive(&self) -> bool {
        let m = self.m();
        (1..=m).all(|i| (i..=m - i).all(|j| &self.values[i] + &self.values[j] >= self.values[i + j]))
    }

    pub fn is_in_class(&self, class: ValuationClass) -> bool {
        match class {
            ValuationClass::Additive => self.is_additive(),
            ValuationClass::Submodular => self.is_submodular(),
            ValuationClass::Xos => self.is_xos(),
            ValuationClass::Subadditive => self.is_subadditive(),
            ValuationClass::General => true,
        }
    }

    /// The most restrictive class containing this valuation.
    pub fn classify(&self) -> ValuationClass {
        ValuationClass::ALL
            .into_iter()
            .find(|&class| self.is_in_class(class))
            .unwrap_or(ValuationClass::General)
    }

    /// Smallest symmetric XOS function dominating `self`:
    /// `w(i) = max_{j >= i} (i/j) v(j) = i * max_{j >= i} v(j)/j`.
    pub fn minimal_xos_envelope(&self) -> SymmetricValuation {
        let m = self.m();
        let mut values = vec![Rational::zero(); m + 1];
        let mut best_average: Option<Rational> = None;
        for i in (1..=m).rev() {
            let average = &self.values[i] / from_usize(i);
            best_average = Some(match best_average {
                Some(best) if best >= average => best,
                _ => average,
            });
            values[i] = from_usize(i) * best_average.as_ref().expect("set above");
        }
        SymmetricValuation { values }
    }

    /// Smallest symmetric submodular function dominating `self`: the upper
    /// concave envelope of the points `(i, v(i))`, read off at integers.
    pub fn minimal_submodular_envelope(&self) -> SymmetricValuation {
        let hull = upper_hull(&self.values);
        let mut values = Vec::with_capacity(self.values.len());
        for pair in hull.windows(2) {
            let (r, s) = (pair[0], pair[1]);
            let (vr, vs) = (&self.values[r], &self.values[s]);
            let slope = (vs - vr) / from_usize(s - r);
            for i in r..s {
                values.push(vr + &slope * from_usize(i - r));
            }
        }
        values.push(self.values[self.m()].clone());
        SymmetricValuation { values }
    }

    /// Running maximum of arbitrary normalized values, the smallest monotone function above them.
    pub fn monotone_closure(values: &[Rational]) -> Result<SymmetricValuation, ValuationError> {
        let first = values.first().ok_or(ValuationError::Empty)?;
        if !first.is_zero() {
            return Err(ValuationError::NotNormalized(rational::format_rational(first)));
        }
        let mut out = Vec::with_capacity(values.len());
        let mut running = Rational::zero();
        for value in values {
            if *value > running {
                running = value.clone();
            }
            out.push(running.clone());
        }
        Ok(SymmetricValuation { values: out })
    }
}

impl fmt::Display for SymmetricValuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", Frac(v))?;
        }
        f.write_str(")")
    }
}

/// Indices of the upper convex hull of `(i, values[i])`, left to right (monotone chain).
fn upper_hull(values: &[Rational]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::with_capacity(values.len());
    for k in 0..values.len() {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // Drop b unless it lies strictly above the chord from a to k.
            let lhs = (&values[b] - &values[a]) * from_usize(k - a);
            let rhs = (&values[k] - &values[a]) * from_usize(b - a);
            if lhs <= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(k);
    }
    hull
}

/// `max_{i >= 1} upper(i) / v(i)`, with `0/0` read as 1.
pub fn closeness_factor(v: &SymmetricValuation, upper: &SymmetricValuation) -> Result<Rational, ValuationError> {
    if v.values.len() != upper.values.len() {
        return Err(ValuationError::LengthMismatch(v.values.len(), upper.values.len()));
    }
    let mut factor = Rational::one();
    for i in 1..=v.m() {
        let (base, top) = (&v.values[i], &upper.values[i]);
        if base.is_zero() {
            if top.is_positive() {
                return Err(ValuationError::Domain {
                    index: i,
                    upper: rational::format_rational(top),
                });
            }
            continue;
        }
        let ratio = top / base;
        if ratio > factor {
            factor = ratio;
        }
    }
    Ok(factor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use proptest::prelude::*;

    fn v(values: &[i64]) -> SymmetricValuation {
        SymmetricValuation::from_ints(values)
    }

    /// Direct evaluation of `max_{k <= i <= j} ((i-k)/(j-k)) (v(j) - v(k)) + v(k)`.
    fn submodular_envelope_by_formula(val: &SymmetricValuation) -> Vec<Rational> {
        let m = val.m();
        let x = val.values();
        (0..=m)
            .map(|i| {
                let mut best = x[i].clone();
                for k in 0..=i {
                    for j in i..=m {
                        if j == k {
                            continue;
                        }
                        let cand = from_usize(i - k) / from_usize(j - k) * (&x[j] - &x[k]) + &x[k];
                        if cand > best {
                            best = cand;
                        }
                    }
                }
                best
            })
            .collect()
    }

    #[test]
    fn make_valuation_accepts_and_rejects() {
        let example = v(&[0, 5, 9, 11]);
        assert_eq!(example.m(), 3);
        assert_eq!(v(&[0, 0, 0]).m(), 2);
        assert!(matches!(
            SymmetricValuation::new(vec![int(0), int(2), int(1)]),
            Err(ValuationError::NotMonotone { index: 2, .. })
        ));
        assert!(matches!(
            SymmetricValuation::new(vec![int(1), int(2)]),
            Err(ValuationError::NotNormalized(_))
        ));
        assert_eq!(SymmetricValuation::new(vec![]), Err(ValuationError::Empty));
    }

    #[test]
    fn classify_examples() {
        assert_eq!(v(&[0, 5, 9, 11]).classify(), ValuationClass::Submodular);
        assert_eq!(v(&[0, 1, 1, 3]).classify(), ValuationClass::General);
        assert_eq!(v(&[0, 2, 4, 6]).classify(), ValuationClass::Additive);
        // Average non-increasing but marginals 1,0,1: XOS, not submodular.
        assert_eq!(v(&[0, 2, 2, 3]).classify(), ValuationClass::Xos);
        // Averages 1, 1/2, 2/3 are not monotone, yet every pair is subadditive.
        assert_eq!(v(&[0, 1, 1, 2]).classify(), ValuationClass::Subadditive);
        assert_eq!(v(&[0]).classify(), ValuationClass::Additive);
        assert_eq!(v(&[0, 0, 0]).classify(), ValuationClass::Additive);
    }

    #[test]
    fn xos_envelope_examples() {
        assert_eq!(v(&[0, 1, 1, 3]).minimal_xos_envelope(), v(&[0, 1, 2, 3]));
        let xos = v(&[0, 2, 2, 3]);
        assert_eq!(xos.minimal_xos_envelope(), xos);
        // Step function 1..1, 2 at l+1: w(l) = 2l/(l+1).
        for l in 1..8usize {
            let mut values = vec![int(0)];
            values.extend(std::iter::repeat_n(int(1), l));
            values.push(int(2));
            let step = SymmetricValuation::new(values).unwrap();
            let w = step.minimal_xos_envelope();
            assert_eq!(*w.value(l), rat(2 * l as i64, l as i64 + 1));
        }
    }

    #[test]
    fn submodular_envelope_examples() {
        assert_eq!(v(&[0, 1, 1, 3]).minimal_submodular_envelope(), v(&[0, 1, 2, 3]));
        let concave = v(&[0, 5, 9, 11]);
        assert_eq!(concave.minimal_submodular_envelope(), concave);
        assert_eq!(v(&[0]).minimal_submodular_envelope(), v(&[0]));
        assert_eq!(v(&[0]).minimal_xos_envelope(), v(&[0]));
    }

    #[test]
    fn submodular_envelope_on_xos_family_matches_chord_value() {
        for l in 2..9i64 {
            let m = (l * l) as usize;
            let values: Vec<Rational> = (0..=m as i64)
                .map(|i| if i == 0 { int(0) } else if i <= l { int(1) } else { rat(i, l) })
                .collect();
            let val = SymmetricValuation::new(values).unwrap();
            assert!(val.is_xos());
            let w = val.minimal_submodular_envelope();
            assert_eq!(*w.value(l as usize), int(1) + rat(l - 1, l + 1));
            assert_eq!(closeness_factor(&val, &w).unwrap(), rat(2 * l, l + 1));
        }
    }

    #[test]
    fn closeness_examples() {
        let mut values = vec![int(0)];
        values.extend(std::iter::repeat_n(int(1), 3));
        values.push(int(2));
        let step = SymmetricValuation::new(values).unwrap();
        assert_eq!(closeness_factor(&step, &step.minimal_xos_envelope()).unwrap(), rat(3, 2));
        let xos = v(&[0, 3, 5, 6]);
        assert_eq!(closeness_factor(&xos, &xos.minimal_xos_envelope()).unwrap(), int(1));
        assert!(matches!(
            closeness_factor(&v(&[0, 0, 2]), &v(&[0, 1, 2])),
            Err(ValuationError::Domain { index: 1, .. })
        ));
        assert_eq!(closeness_factor(&v(&[0, 0, 0]), &v(&[0, 0, 0])).unwrap(), int(1));
    }

    #[test]
    fn monotone_closure_is_running_max() {
        let closure = SymmetricValuation::monotone_closure(&[int(0), int(3), int(1), int(4), int(2)]).unwrap();
        assert_eq!(closure, v(&[0, 3, 3, 4, 4]));
    }

    #[test]
    fn class_names_round_trip_through_serde() {
        let text = serde_json::to_string(&ValuationClass::Xos).unwrap();
        assert_eq!(text, "\"xos\"");
        let back: ValuationClass = serde_json::from_str(&text).unwrap();
        assert_eq!(back, ValuationClass::Xos);
    }

    fn arb_valuation(max_m: usize) -> impl Strategy<Value = SymmetricValuation> {
        proptest::collection::vec(0i64..6, 0..=max_m).prop_map(|increments| {
            let marginals: Vec<Rational> = increments.into_iter().map(int).collect();
            SymmetricValuation::from_marginals(&marginals).unwrap()
        })
    }

    proptest! {
        #[test]
        fn hull_sweep_matches_max_formula(val in arb_valuation(9)) {
            let sweep = val.minimal_submodular_envelope();
            prop_assert_eq!(sweep.values().to_vec(), submodular_envelope_by_formula(&val));
        }

        #[test]
        fn envelopes_are_idempotent_and_dominate(val in arb_valuation(9)) {
            let xos = val.minimal_xos_envelope();
            let sub = val.minimal_submodular_envelope();
            prop_assert!(xos.dominates(&val));
            prop_assert!(sub.dominates(&val));
            prop_assert!(xos.classify() <= ValuationClass::Xos);
            prop_assert!(sub.classify() <= ValuationClass::Submodular);
            prop_assert_eq!(xos.minimal_xos_envelope(), xos.clone());
            prop_assert_eq!(sub.minimal_submodular_envelope(), sub.clone());
            // Submodular functions are XOS, so the XOS envelope is never above the submodular one.
            prop_assert!(sub.dominates(&xos));
        }

        #[test]
        fn classifier_respects_lattice(val in arb_valuation(8)) {
            let class = val.classify();
            for other in ValuationClass::ALL {
                if class <= other {
                    prop_assert!(val.is_in_class(other));
                }
            }
        }

        #[test]
        fn subadditive_closeness_at_most_two(val in arb_valuation(10)) {
            prop_assume!(val.is_subadditive());
            let two = int(2);
            let sub = val.minimal_submodular_envelope();
            let xos = val.minimal_xos_envelope();
            prop_assert!(closeness_factor(&val, &sub).unwrap() <= two);
            prop_assert!(closeness_factor(&val, &xos).unwrap() <= two);
        }
    }
}
