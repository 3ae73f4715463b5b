//! Price constructions with their worst-case guarantees.
//!
//! Each scheme builds a small set of candidate price vectors, evaluates
//! every candidate exactly with the adversarial simulator and keeps the
//! best one. The guarantee factor is attached so callers can check
//! `welfare >= guarantee * OPT`.

use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::market::{self, optimal_welfare, Allocation, MarginalProfile, Market, MarketError};
use crate::rational::{self, from_usize, int, rat, Rational};
use crate::simulator::{
    self, DynamicPolicy, PolicyError, PriceVector, SearchLimits, SimError, WorstCaseResult,
};
use crate::valuations::{SymmetricValuation, ValuationClass};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PricingError {
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("scheme needs exactly two agents with identical valuations")]
    NotTwoIdentical,
    #[error("market has no items")]
    NoItems,
    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeId {
    #[serde(rename = "submod23")]
    Submod23,
    #[serde(rename = "submod57")]
    Submod57,
    KnownOrder,
    UniformHalf,
    DynamicSubmod,
    #[serde(rename = "subadd13")]
    Subadd13,
    #[serde(rename = "subadd-2iden")]
    Subadd2Iden,
    #[serde(rename = "general-1m")]
    General1m,
    GeneralBestOrder,
}

impl SchemeId {
    pub const ALL: [SchemeId; 9] = [
        SchemeId::Submod23,
        SchemeId::Submod57,
        SchemeId::KnownOrder,
        SchemeId::UniformHalf,
        SchemeId::DynamicSubmod,
        SchemeId::Subadd13,
        SchemeId::Subadd2Iden,
        SchemeId::General1m,
        SchemeId::GeneralBestOrder,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SchemeId::Submod23 => "submod23",
            SchemeId::Submod57 => "submod57",
            SchemeId::KnownOrder => "known-order",
            SchemeId::UniformHalf => "uniform-half",
            SchemeId::DynamicSubmod => "dynamic-submod",
            SchemeId::Subadd13 => "subadd13",
            SchemeId::Subadd2Iden => "subadd-2iden",
            SchemeId::General1m => "general-1m",
            SchemeId::GeneralBestOrder => "general-best-order",
        }
    }

    /// The valuation class the scheme's guarantee needs.
    pub fn required_class(self) -> ValuationClass {
        match self {
            SchemeId::Submod23
            | SchemeId::Submod57
            | SchemeId::KnownOrder
            | SchemeId::UniformHalf
            | SchemeId::DynamicSubmod => ValuationClass::Submodular,
            SchemeId::Subadd13 | SchemeId::Subadd2Iden => ValuationClass::Subadditive,
            SchemeId::General1m | SchemeId::GeneralBestOrder => ValuationClass::General,
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeId {
    type Err = PricingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SchemeId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| PricingError::UnknownScheme(s.to_string()))
    }
}

/// How a candidate is scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Evaluation {
    /// Worst case over all orders and ties.
    AnyOrder,
    /// The candidate's own order; ties stay adversarial.
    FixedOrder,
    /// Prices re-posted every round by a policy; `prices` holds the first round.
    Dynamic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Candidate {
    pub label: String,
    pub prices: PriceVector,
    pub evaluation: Evaluation,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<Vec<usize>>,
    pub result: WorstCaseResult,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SchemeResult {
    pub scheme: SchemeId,
    pub candidates: Vec<Candidate>,
    pub chosen: usize,
    #[serde(with = "rational::serde_str")]
    pub guarantee: Rational,
    #[serde(with = "rational::serde_str")]
    pub opt: Rational,
    pub opt_allocation: Allocation,
}

impl SchemeResult {
    pub fn best(&self) -> &Candidate {
        &self.candidates[self.chosen]
    }

    pub fn welfare(&self) -> &Rational {
        &self.best().result.welfare
    }

    /// `welfare >= guarantee * OPT`, exactly.
    pub fn meets_guarantee(&self) -> bool {
        *self.welfare() >= &self.guarantee * &self.opt
    }
}

/// The cutoff data a scheme prices around, or the fallback when fewer than
/// `m` marginals are positive.
enum Cutoff {
    Profile(MarginalProfile),
    Fallback { epsilon: Rational },
}

fn cutoff(m: usize, agents: &[SymmetricValuation]) -> Result<Cutoff, PricingError> {
    match market::marginal_profile(m, agents) {
        Ok(profile) => Ok(Cutoff::Profile(profile)),
        Err(MarketError::InsufficientDemand { .. }) => {
            let values = market::sorted_marginals(agents);
            Ok(Cutoff::Fallback {
                epsilon: rational::half(&market::separation(&values)),
            })
        }
        Err(MarketError::NoItems) => Err(PricingError::NoItems),
        Err(e) => Err(e.into()),
    }
}

fn fallback_candidate(m: usize, epsilon: &Rational) -> (String, PriceVector) {
    ("uniform epsilon (too few positive marginals)".to_string(), PriceVector::uniform(m, epsilon.clone()))
}

struct Plan {
    label: String,
    prices: PriceVector,
    order: Option<Vec<usize>>,
}

impl Plan {
    fn any(label: impl Into<String>, prices: PriceVector) -> Self {
        Plan { label: label.into(), prices, order: None }
    }
}

fn evaluate(
    scheme: SchemeId,
    market: &Market,
    plans: Vec<Plan>,
    guarantee: Rational,
    limits: SearchLimits,
) -> Result<SchemeResult, PricingError> {
    let (opt, opt_allocation) = optimal_welfare(market);
    let candidates = plans
        .into_par_iter()
        .map(|plan| {
            let (evaluation, result) = match &plan.order {
                Some(order) => (
                    Evaluation::FixedOrder,
                    simulator::worst_case_fixed_order(market, &plan.prices, order)?,
                ),
                None => (
                    Evaluation::AnyOrder,
                    simulator::worst_case_welfare_with(market, &plan.prices, limits)?,
                ),
            };
            Ok(Candidate {
                label: plan.label,
                prices: plan.prices,
                evaluation,
                order: plan.order,
                result,
            })
        })
        .collect::<Result<Vec<_>, SimError>>()?;
    let chosen = best_index(&candidates);
    Ok(SchemeResult {
        scheme,
        candidates,
        chosen,
        guarantee,
        opt,
        opt_allocation,
    })
}

/// First candidate with the highest welfare.
fn best_index(candidates: &[Candidate]) -> usize {
    let mut chosen = 0;
    for (i, c) in candidates.iter().enumerate() {
        if c.result.welfare > candidates[chosen].result.welfare {
            chosen = i;
        }
    }
    chosen
}

fn empty_result(scheme: SchemeId, market: &Market, guarantee: Rational) -> SchemeResult {
    let (opt, opt_allocation) = optimal_welfare(market);
    let order: Vec<usize> = (0..market.n()).collect();
    SchemeResult {
        scheme,
        candidates: vec![Candidate {
            label: "no items".into(),
            prices: PriceVector::uniform(0, Rational::zero()),
            evaluation: Evaluation::AnyOrder,
            order: None,
            result: WorstCaseResult {
                welfare: Rational::zero(),
                ties: vec![0; order.len()],
                order,
                states: 0,
            },
        }],
        chosen: 0,
        guarantee,
        opt,
        opt_allocation,
    }
}

/// Runs any scheme by id. `order` is used by `known-order` only (identity if absent).
pub fn run_scheme(
    scheme: SchemeId,
    market: &Market,
    order: Option<&[usize]>,
    limits: SearchLimits,
) -> Result<SchemeResult, PricingError> {
    match scheme {
        SchemeId::Submod23 => scheme_submodular_23(market, limits),
        SchemeId::Submod57 => scheme_submodular_57(market, limits),
        SchemeId::KnownOrder => {
            let identity: Vec<usize> = (0..market.n()).collect();
            scheme_known_order(market, order.unwrap_or(&identity))
        }
        SchemeId::UniformHalf => scheme_uniform_half(market, limits),
        SchemeId::DynamicSubmod => scheme_dynamic_submodular(market, limits),
        SchemeId::Subadd13 => scheme_subadditive_third(market, limits),
        SchemeId::Subadd2Iden => scheme_two_identical_subadditive(market, limits),
        SchemeId::General1m => scheme_general_1m(market, limits),
        SchemeId::GeneralBestOrder => scheme_general_best_order(market, limits),
    }
}

/// Uniform `b - eps` and the split `b - eps` / `b + eps` on `m'` items; 2/3.
pub fn scheme_submodular_23(market: &Market, limits: SearchLimits) -> Result<SchemeResult, PricingError> {
    market.require_class(ValuationClass::Submodular)?;
    let guarantee = rat(2, 3);
    let m = market.m();
    if m == 0 {
        return Ok(empty_result(SchemeId::Submod23, market, guarantee));
    }
    let plans = match cutoff(m, market.agents())? {
        Cutoff::Profile(p) => vec![
            Plan::any("P1 uniform b-eps", PriceVector::uniform(m, p.b_minus_eps())),
            Plan::any(
                "P2 b-eps on m-m', b+eps on m'",
                PriceVector::two_level(m - p.m_prime, p.b_minus_eps(), p.m_prime, p.b_plus_eps()),
            ),
        ],
        Cutoff::Fallback { epsilon } => {
            let (label, prices) = fallback_candidate(m, &epsilon);
            vec![Plan::any(label, prices)]
        }
    };
    evaluate(SchemeId::Submod23, market, plans, guarantee, limits)
}

/// Number of marginals at least `2b`.
pub fn count_at_least_double(profile: &MarginalProfile) -> usize {
    let double = &profile.b * int(2);
    profile.values.iter().take_while(|v| **v >= double).count()
}

/// The four candidates P1..P4; guarantee `5/7 - 1/m`.
pub fn scheme_submodular_57(market: &Market, limits: SearchLimits) -> Result<SchemeResult, PricingError> {
    market.require_class(ValuationClass::Submodular)?;
    let m = market.m();
    if m == 0 {
        return Ok(empty_result(SchemeId::Submod57, market, rat(5, 7)));
    }
    let guarantee = rat(5, 7) - rat(1, m as i64);
    let plans = match cutoff(m, market.agents())? {
        Cutoff::Profile(p) => {
            let k = count_at_least_double(&p);
            let half_up = p.m_prime.div_ceil(2);
            let double_minus = &p.b * int(2) - &p.epsilon;
            vec![
                Plan::any("P1 uniform b-eps", PriceVector::uniform(m, p.b_minus_eps())),
                Plan::any(
                    "P2 b-eps on m-m', b+eps on m'",
                    PriceVector::two_level(m - p.m_prime, p.b_minus_eps(), p.m_prime, p.b_plus_eps()),
                ),
                Plan::any(
                    "P3 b-eps on m-k, 2b-eps on k",
                    PriceVector::two_level(m - k, p.b_minus_eps(), k, double_minus),
                ),
                Plan::any(
                    "P4 b-eps on m-ceil(m'/2), b+eps on ceil(m'/2)",
                    PriceVector::two_level(m - half_up, p.b_minus_eps(), half_up, p.b_plus_eps()),
                ),
            ]
        }
        Cutoff::Fallback { epsilon } => {
            let (label, prices) = fallback_candidate(m, &epsilon);
            vec![Plan::any(label, prices)]
        }
    };
    evaluate(SchemeId::Submod57, market, plans, guarantee, limits)
}

/// Per-agent counts of marginals strictly above `b` and exactly at `b`.
fn above_and_at(agents: &[SymmetricValuation], b: &Rational) -> (Vec<usize>, Vec<usize>) {
    agents
        .iter()
        .map(|v| {
            let marginals = v.marginals();
            (
                marginals.iter().filter(|x| *x > b).count(),
                marginals.iter().filter(|x| *x == b).count(),
            )
        })
        .unzip()
}

/// Static prices that extract OPT when the arrival order is known.
pub fn known_order_prices(market: &Market, order: &[usize]) -> Result<PriceVector, PricingError> {
    market.require_class(ValuationClass::Submodular)?;
    let m = market.m();
    if m == 0 {
        return Ok(PriceVector::uniform(0, Rational::zero()));
    }
    let profile = match cutoff(m, market.agents())? {
        Cutoff::Profile(p) => p,
        Cutoff::Fallback { epsilon } => return Ok(PriceVector::uniform(m, epsilon)),
    };
    let (above, at) = above_and_at(market.agents(), &profile.b);
    // Greedy allocation of the cutoff-valued items along the arrival order.
    let mut spare = m - profile.m_prime;
    let mut cheap = 0;
    let mut last_cutoff_buyer = None;
    let mut x = vec![0usize; market.n()];
    for (pos, &i) in order.iter().enumerate() {
        let extra = at[i].min(spare);
        spare -= extra;
        x[i] = above[i] + extra;
        if extra > 0 {
            last_cutoff_buyer = Some(pos);
        }
    }
    if let Some(last) = last_cutoff_buyer {
        cheap = order[..=last].iter().map(|&i| x[i]).sum();
    }
    Ok(PriceVector::two_level(cheap, profile.b_minus_eps(), m - cheap, profile.b_plus_eps()))
}

/// Known arrival order: a single candidate, evaluated on that order; guarantee 1.
pub fn scheme_known_order(market: &Market, order: &[usize]) -> Result<SchemeResult, PricingError> {
    let prices = known_order_prices(market, order)?;
    evaluate(
        SchemeId::KnownOrder,
        market,
        vec![Plan {
            label: "b-eps up to the last cutoff buyer, b+eps after".into(),
            prices,
            order: Some(order.to_vec()),
        }],
        int(1),
        SearchLimits::default(),
    )
}

/// Uniform `b - eps` or uniform `b + eps`; 1/2.
pub fn scheme_uniform_half(market: &Market, limits: SearchLimits) -> Result<SchemeResult, PricingError> {
    market.require_class(ValuationClass::Submodular)?;
    let guarantee = rat(1, 2);
    let m = market.m();
    if m == 0 {
        return Ok(empty_result(SchemeId::UniformHalf, market, guarantee));
    }
    let plans = match cutoff(m, market.agents())? {
        Cutoff::Profile(p) => vec![
            Plan::any("uniform b-eps", PriceVector::uniform(m, p.b_minus_eps())),
            Plan::any("uniform b+eps", PriceVector::uniform(m, p.b_plus_eps())),
        ],
        Cutoff::Fallback { epsilon } => {
            let (label, prices) = fallback_candidate(m, &epsilon);
            vec![Plan::any(label, prices)]
        }
    };
    evaluate(SchemeId::UniformHalf, market, plans, guarantee, limits)
}

/// Dynamic prices keeping the partial allocation completable to an optimum.
///
/// With agents `X` still to come and `l` items left, let `K = sum k_i` over
/// `X` (`k_i` marginals above `b`, `y_i` at `b`). If some `y_i > l - K`,
/// `min k_i + l - K` (over those `i`) items cost `b - eps` and the rest
/// `b + eps`; otherwise everything costs `b - eps`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SubmodularDynamicPolicy {
    Cutoff {
        above: Vec<usize>,
        at: Vec<usize>,
        low: Rational,
        high: Rational,
    },
    Uniform(Rational),
}

impl SubmodularDynamicPolicy {
    pub fn new(market: &Market) -> Result<Self, PricingError> {
        market.require_class(ValuationClass::Submodular)?;
        if market.m() == 0 {
            return Ok(SubmodularDynamicPolicy::Uniform(Rational::zero()));
        }
        Ok(match cutoff(market.m(), market.agents())? {
            Cutoff::Profile(p) => {
                let (above, at) = above_and_at(market.agents(), &p.b);
                SubmodularDynamicPolicy::Cutoff {
                    above,
                    at,
                    low: p.b_minus_eps(),
                    high: p.b_plus_eps(),
                }
            }
            Cutoff::Fallback { epsilon } => SubmodularDynamicPolicy::Uniform(epsilon),
        })
    }
}

impl DynamicPolicy for SubmodularDynamicPolicy {
    fn prices(&self, remaining_agents: &[usize], items: usize) -> Result<PriceVector, PolicyError> {
        let (above, at, low, high) = match self {
            SubmodularDynamicPolicy::Uniform(p) => return Ok(PriceVector::uniform(items, p.clone())),
            SubmodularDynamicPolicy::Cutoff { above, at, low, high } => (above, at, low, high),
        };
        let k_sum: usize = remaining_agents.iter().map(|&i| above[i]).sum();
        let ky_sum: usize = remaining_agents.iter().map(|&i| above[i] + at[i]).sum();
        if k_sum > items || ky_sum < items {
            return Err(PolicyError::Undefined {
                items,
                reason: format!("completion invariant fails (sum k = {k_sum}, sum k+y = {ky_sum})"),
            });
        }
        let slack = items - k_sum;
        let cheap = remaining_agents
            .iter()
            .filter(|&&i| at[i] > slack)
            .map(|&i| above[i] + slack)
            .min()
            .unwrap_or(items);
        Ok(PriceVector::two_level(cheap, low.clone(), items - cheap, high.clone()))
    }
}

/// Evaluates the submodular dynamic policy; guarantee 1.
pub fn scheme_dynamic_submodular(market: &Market, limits: SearchLimits) -> Result<SchemeResult, PricingError> {
    let policy = SubmodularDynamicPolicy::new(market)?;
    let (opt, opt_allocation) = optimal_welfare(market);
    let all: Vec<usize> = (0..market.n()).collect();
    let first = if market.n() == 0 {
        PriceVector::uniform(market.m(), Rational::zero())
    } else {
        policy.prices(&all, market.m()).map_err(SimError::from)?
    };
    let result = simulator::worst_case_welfare_dynamic_with(market, &policy, limits)?;
    Ok(SchemeResult {
        scheme: SchemeId::DynamicSubmod,
        candidates: vec![Candidate {
            label: "dynamic cutoff policy".into(),
            prices: first,
            evaluation: Evaluation::Dynamic,
            order: None,
            result,
        }],
        chosen: 0,
        guarantee: int(1),
        opt,
        opt_allocation,
    })
}

/// Uniform `b + eps` or uniform `b/2`, with `b` taken over the minimal
/// submodular envelopes; 1/3.
pub fn scheme_subadditive_third(market: &Market, limits: SearchLimits) -> Result<SchemeResult, PricingError> {
    market.require_class(ValuationClass::Subadditive)?;
    let guarantee = rat(1, 3);
    let m = market.m();
    if m == 0 {
        return Ok(empty_result(SchemeId::Subadd13, market, guarantee));
    }
    let envelopes = market.submodular_envelopes();
    let plans = match cutoff(m, envelopes.agents())? {
        Cutoff::Profile(p) => vec![
            Plan::any("uniform b+eps", PriceVector::uniform(m, p.b_plus_eps())),
            Plan::any("uniform b/2", PriceVector::uniform(m, rational::half(&p.b))),
        ],
        Cutoff::Fallback { epsilon } => {
            let (label, prices) = fallback_candidate(m, &epsilon);
            vec![Plan::any(label, prices)]
        }
    };
    evaluate(SchemeId::Subadd13, market, plans, guarantee, limits)
}

/// Two identical subadditive agents: uniform `OPT / 3m`; 2/3.
pub fn scheme_two_identical_subadditive(market: &Market, limits: SearchLimits) -> Result<SchemeResult, PricingError> {
    if market.n() != 2 || market.agent(0) != market.agent(1) {
        return Err(PricingError::NotTwoIdentical);
    }
    market.require_class(ValuationClass::Subadditive)?;
    let m = market.m();
    if m == 0 {
        return Ok(empty_result(SchemeId::Subadd2Iden, market, rat(2, 3)));
    }
    let (opt, _) = optimal_welfare(market);
    let price = opt / (from_usize(m) * int(3));
    evaluate(
        SchemeId::Subadd2Iden,
        market,
        vec![Plan::any("uniform OPT/3m", PriceVector::uniform(m, price))],
        rat(2, 3),
        limits,
    )
}

/// Highest per-item average in the optimal allocation and a safe margin
/// below it: half the smallest positive gap between that average and any
/// other achievable average `v_i(q)/q` (or 0).
pub fn general_price(market: &Market) -> (Rational, Rational) {
    let (_, allocation) = optimal_welfare(market);
    let beta = allocation
        .quantities
        .iter()
        .zip(market.agents())
        .filter(|(q, _)| **q > 0)
        .map(|(&q, v)| v.value(q) / from_usize(q))
        .max()
        .unwrap_or_else(Rational::zero);
    let mut gap: Option<Rational> = if beta.is_positive() { Some(beta.clone()) } else { None };
    for v in market.agents() {
        for q in 1..=market.m() {
            let diff = (v.value(q) / from_usize(q) - &beta).abs();
            if diff.is_positive() && gap.as_ref().is_none_or(|g| diff < *g) {
                gap = Some(diff);
            }
        }
    }
    let epsilon = gap.map(|g| rational::half(&g)).unwrap_or_else(Rational::zero);
    (beta, epsilon)
}

/// Uniform `beta - eps`; guarantee `1/m`.
pub fn scheme_general_1m(market: &Market, limits: SearchLimits) -> Result<SchemeResult, PricingError> {
    let m = market.m();
    if m == 0 {
        return Ok(empty_result(SchemeId::General1m, market, int(1)));
    }
    let (beta, epsilon) = general_price(market);
    let price = if beta.is_positive() { &beta - &epsilon } else { Rational::zero() };
    evaluate(
        SchemeId::General1m,
        market,
        vec![Plan::any("uniform beta-eps", PriceVector::uniform(m, price))],
        rat(1, m as i64),
        limits,
    )
}

/// Margin below `b` small enough that every purchase step whose average
/// marginal value (of the raw valuation) clears `b - eps'` also clears `b`:
/// half the smallest positive `b - (v(y) - v(x)) / (y - x)`, capped by `eps`.
pub fn refined_epsilon(agents: &[SymmetricValuation], b: &Rational, epsilon: &Rational) -> Rational {
    let mut slack = epsilon * int(2);
    for v in agents {
        for x in 0..v.m() {
            for y in x + 1..=v.m() {
                let average = (v.value(y) - v.value(x)) / from_usize(y - x);
                let gap = b - average;
                if gap.is_positive() && gap < slack {
                    slack = gap;
                }
            }
        }
    }
    rational::half(&slack)
}

/// Uniform `b + eps` in any order, or uniform `b - eps'` with a chosen
/// order (the identity, or one agent moved to the front); 1/2.
pub fn scheme_general_best_order(market: &Market, limits: SearchLimits) -> Result<SchemeResult, PricingError> {
    let guarantee = rat(1, 2);
    let m = market.m();
    if m == 0 {
        return Ok(empty_result(SchemeId::GeneralBestOrder, market, guarantee));
    }
    let n = market.n();
    let identity: Vec<usize> = (0..n).collect();
    let envelopes = market.submodular_envelopes();
    let (high, low) = match cutoff(m, envelopes.agents())? {
        Cutoff::Profile(p) => {
            let refined = refined_epsilon(market.agents(), &p.b, &p.epsilon);
            (p.b_plus_eps(), &p.b - refined)
        }
        Cutoff::Fallback { epsilon } => (epsilon.clone(), epsilon),
    };
    let mut plans = vec![Plan {
        label: "uniform b+eps".into(),
        prices: PriceVector::uniform(m, high),
        order: Some(identity.clone()),
    }];
    let low_prices = PriceVector::uniform(m, low);
    plans.push(Plan {
        label: "uniform b-eps', identity order".into(),
        prices: low_prices.clone(),
        order: Some(identity.clone()),
    });
    for first in 1..n {
        let mut order = vec![first];
        order.extend(identity.iter().copied().filter(|&i| i != first));
        plans.push(Plan {
            label: format!("uniform b-eps', agent {first} first"),
            prices: low_prices.clone(),
            order: Some(order),
        });
    }
    evaluate(SchemeId::GeneralBestOrder, market, plans, guarantee, limits)
}
