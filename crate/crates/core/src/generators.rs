//! Seeded random markets per valuation class, on a half-integer value grid
//! so that ties are common.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::market::Market;
use crate::rational::{from_usize, int, rat, Rational};
use crate::simulator::PriceVector;
use crate::valuations::{SymmetricValuation, ValuationClass};

/// Independent stream `trial` of `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn halves<R: Rng + ?Sized>(rng: &mut R, max_halves: i64) -> Rational {
    rat(rng.random_range(0..=max_halves), 2)
}

/// Uniform draw from the half-integers in `[lo, hi]`; both ends are half-integers.
fn halves_between<R: Rng + ?Sized>(rng: &mut R, lo: &Rational, hi: &Rational) -> Rational {
    let steps: i64 = ((hi - lo) * int(2)).to_integer().try_into().expect("small grid");
    lo + rat(rng.random_range(0..=steps), 2)
}

pub fn random_valuation<R: Rng + ?Sized>(rng: &mut R, class: ValuationClass, m: usize) -> SymmetricValuation {
    match class {
        ValuationClass::Additive => SymmetricValuation::additive(m, halves(rng, 8)),
        ValuationClass::Submodular => {
            let mut marginals: Vec<Rational> = (0..m).map(|_| halves(rng, 8)).collect();
            marginals.sort_by(|a, b| b.cmp(a));
            SymmetricValuation::from_marginals(&marginals).expect("non-negative marginals")
        }
        ValuationClass::Xos => {
            // Max of additive functions over random sub-bundles: a_t * min(i, s_t).
            let clauses: Vec<(Rational, usize)> = (0..rng.random_range(1..=3))
                .map(|_| (rat(rng.random_range(1..=8), 2), rng.random_range(1..=m.max(1))))
                .collect();
            let values = (0..=m)
                .map(|i| {
                    clauses
                        .iter()
                        .map(|(a, s)| a * from_usize(i.min(*s)))
                        .max()
                        .unwrap_or_else(|| int(0))
                })
                .collect();
            SymmetricValuation::new(values).expect("monotone by construction")
        }
        ValuationClass::Subadditive => {
            // Each v(i) is drawn between v(i-1) and the tightest split bound.
            let mut values = vec![int(0)];
            for i in 1..=m {
                let lo = values[i - 1].clone();
                let hi = (1..i).map(|j| &values[j] + &values[i - j]).min();
                let v = match hi {
                    None => halves(rng, 8),
                    Some(hi) if rng.random_bool(0.3) => hi,
                    Some(hi) => halves_between(rng, &lo, &hi),
                };
                values.push(v);
            }
            SymmetricValuation::new(values).expect("monotone by construction")
        }
        ValuationClass::General => {
            let steps = [0, 0, 0, 1, 2, 4, 6];
            let mut values = vec![int(0)];
            for i in 1..=m {
                let step = rat(*steps.choose(rng).expect("non-empty"), 2);
                values.push(&values[i - 1] + step);
            }
            SymmetricValuation::new(values).expect("monotone by construction")
        }
    }
}

pub fn random_market<R: Rng + ?Sized>(rng: &mut R, class: ValuationClass, n: usize, m: usize) -> Market {
    let agents = (0..n).map(|_| random_valuation(rng, class, m)).collect();
    Market::new(m, agents).expect("valuations have length m + 1")
}

/// Agents drawn from any class in the lattice up to `class`.
pub fn random_mixed_market<R: Rng + ?Sized>(rng: &mut R, class: ValuationClass, n: usize, m: usize) -> Market {
    let allowed: Vec<ValuationClass> = ValuationClass::ALL.into_iter().filter(|c| c.is_within(class)).collect();
    let agents = (0..n)
        .map(|_| {
            let c = *allowed.choose(rng).expect("class is in the lattice");
            random_valuation(rng, c, m)
        })
        .collect();
    Market::new(m, agents).expect("valuations have length m + 1")
}

pub fn random_identical_pair<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Market {
    let v = random_valuation(rng, ValuationClass::Subadditive, m);
    Market::new(m, vec![v.clone(), v]).expect("valuations have length m + 1")
}

/// Uniform or mixed prices from a small grid around typical marginal values.
pub fn random_prices<R: Rng + ?Sized>(rng: &mut R, m: usize) -> PriceVector {
    if rng.random_bool(0.4) {
        PriceVector::uniform(m, halves(rng, 8))
    } else {
        PriceVector::new((0..m).map(|_| halves(rng, 8)).collect()).expect("non-negative prices")
    }
}

pub fn random_order<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_valuations_are_in_class() {
        let mut rng = trial_rng(1, 0);
        for class in ValuationClass::ALL {
            for m in 0..8 {
                for _ in 0..40 {
                    let v = random_valuation(&mut rng, class, m);
                    assert_eq!(v.m(), m);
                    assert!(v.is_in_class(class), "{class} {:?}", v.values());
                }
            }
        }
    }

    #[test]
    fn subadditive_generator_leaves_xos() {
        let mut rng = trial_rng(2, 0);
        let outside = (0..200)
            .filter(|_| !random_valuation(&mut rng, ValuationClass::Subadditive, 5).is_xos())
            .count();
        assert!(outside > 0);
    }

    #[test]
    fn streams_are_reproducible() {
        let a = random_market(&mut trial_rng(9, 3), ValuationClass::General, 3, 4);
        let b = random_market(&mut trial_rng(9, 3), ValuationClass::General, 3, 4);
        assert_eq!(a, b);
    }
}
