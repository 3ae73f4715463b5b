mod common;

use common::*;
use multiunit::generators::{random_market, random_prices, random_valuation, trial_rng};
use multiunit::market::{optimal_welfare, Market};
use multiunit::rational::Rational;
use multiunit::simulator::{
    self, best_case_welfare, best_response, simulate, worst_case_fixed_order, worst_case_welfare, PriceVector, TieMode,
};
use multiunit::valuations::{SymmetricValuation, ValuationClass};
use proptest::prelude::*;

fn class() -> impl Strategy<Value = ValuationClass> {
    prop::sample::select(ValuationClass::ALL.to_vec())
}

/// Market and price vector from a seed, so shrinking stays within the generators.
fn case(seed: u64, class: ValuationClass, n: usize, m: usize) -> (Market, PriceVector) {
    let mut rng = trial_rng(seed, 0);
    let market = random_market(&mut rng, class, n, m);
    let prices = random_prices(&mut rng, m);
    (market, prices)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn opt_matches_allocation_enumeration(seed in any::<u64>(), class in class(), n in 0usize..5, m in 0usize..8) {
        let (market, _) = case(seed, class, n, m);
        let (opt, alloc) = optimal_welfare(&market);
        prop_assert_eq!(&opt, &brute_opt(&market));
        prop_assert!(alloc.total() <= m);
        prop_assert_eq!(market.welfare(&alloc), opt);
    }

    #[test]
    fn worst_case_matches_enumeration(seed in any::<u64>(), class in class(), n in 1usize..5, m in 1usize..7) {
        let (market, prices) = case(seed, class, n, m);
        let lib = worst_case_welfare(&market, &prices).unwrap();
        prop_assert_eq!(&lib.welfare, &brute_worst(&market, prices.prices()));
        // The witness replays to the reported welfare.
        let replay = simulate(&market, &prices, &lib.order, &lib.ties).unwrap();
        prop_assert_eq!(replay.welfare, lib.welfare);
    }

    #[test]
    fn fixed_and_best_order_match_enumeration(seed in any::<u64>(), class in class(), n in 1usize..5, m in 1usize..7) {
        let (market, prices) = case(seed, class, n, m);
        let order: Vec<usize> = (0..n).rev().collect();
        let fixed = worst_case_fixed_order(&market, &prices, &order).unwrap();
        prop_assert_eq!(fixed.welfare, brute_worst_order(&market, prices.prices(), &order));
        let best = best_case_welfare(&market, &prices).unwrap();
        prop_assert_eq!(best.welfare, brute_best_order(&market, prices.prices()));
    }

    /// Any utility-maximizing purchase of k items costs exactly the k cheapest prices.
    #[test]
    fn cheapest_prefix_lemma(seed in any::<u64>(), class in class(), m in 1usize..9) {
        let (market, prices) = case(seed, class, 1, m);
        let (sizes, totals) = argmax_subsets(&market, 0, prices.prices());
        prop_assert_eq!(&sizes, &argmax_cheapest(&market, 0, prices.prices()));
        prop_assert_eq!(&sizes, &best_response(market.agent(0), prices.prices(), TieMode::All));
        let prefix = prices.prefix_sums();
        for total in totals {
            prop_assert!(sizes.iter().any(|&k| prefix[k] == total));
        }
    }

    #[test]
    fn naive_search_agrees(seed in any::<u64>(), n in 1usize..4, m in 1usize..6) {
        let (market, prices) = case(seed, ValuationClass::General, n, m);
        prop_assert_eq!(
            simulator::worst_case_naive(&market, &prices).unwrap(),
            worst_case_welfare(&market, &prices).unwrap().welfare
        );
    }

    #[test]
    fn envelopes_match_closed_forms(seed in any::<u64>(), class in class(), m in 0usize..9) {
        let v = random_valuation(&mut trial_rng(seed, 1), class, m);
        let sub = v.minimal_submodular_envelope();
        prop_assert_eq!(sub.values(), &concave_majorant(v.values())[..]);
        if v.is_subadditive() {
            let xos = v.minimal_xos_envelope();
            prop_assert_eq!(xos.values(), &xos_envelope(v.values())[..]);
            prop_assert!(ratio(v.values(), xos.values()) <= r(2, 1));
            prop_assert!(ratio(v.values(), sub.values()) <= r(2, 1));
        }
    }
}

#[test]
fn class_predicates_on_known_functions() {
    let ints = |xs: &[i64]| SymmetricValuation::from_ints(xs);
    let unit = ints(&[0, 3, 3, 3]);
    assert!(unit.is_submodular());
    // Clauses 3 * min(i, 1) and 2 * min(i, 3); marginals 3, 1, 2 are not decreasing.
    let xos = ints(&[0, 3, 4, 6]);
    assert!(xos.is_xos() && !xos.is_submodular());
    let subadd = ints(&[0, 1, 1, 2]);
    assert!(subadd.is_subadditive() && !subadd.is_xos());
    let general = ints(&[0, 0, 0, 5]);
    assert_eq!(general.classify(), ValuationClass::General);
}

#[test]
fn zero_prices_give_adversarial_zero_price_allocation() {
    let market = Market::new(
        3,
        vec![SymmetricValuation::from_ints(&[0, 1, 1, 1]), SymmetricValuation::from_ints(&[0, 2, 4, 6])],
    )
    .unwrap();
    let zero = PriceVector::uniform(3, Rational::from_integer(0.into()));
    // At price 0 the unit-demand agent may take everything first.
    let worst = worst_case_welfare(&market, &zero).unwrap();
    assert_eq!(worst.welfare, brute_worst(&market, zero.prices()));
    assert_eq!(worst.welfare, r(1, 1));
}
