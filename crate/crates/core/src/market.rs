//! Markets of `m` identical items, the welfare-maximizing allocation, and
//! the marginal-value profile (cutoff `b`, separation `epsilon`, `m'`) the
//! pricing schemes are built from.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{self, Rational};
use crate::valuations::{SymmetricValuation, ValuationClass, ValuationError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MarketError {
    #[error("agent {agent} has {len} values, expected m + 1 = {expected}")]
    WrongLength { agent: usize, len: usize, expected: usize },
    #[error("fewer positive marginal values ({positive}) than items ({m})")]
    InsufficientDemand { positive: usize, m: usize },
    #[error("market has no items")]
    NoItems,
    #[error("agent {agent} is not {required}")]
    ClassViolation { agent: usize, required: ValuationClass },
    #[error(transparent)]
    Valuation(#[from] ValuationError),
}

/// `m` identical items and the agents' symmetric valuations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawMarket")]
pub struct Market {
    m: usize,
    agents: Vec<SymmetricValuation>,
}

#[derive(Deserialize)]
struct RawMarket {
    m: usize,
    agents: Vec<SymmetricValuation>,
}

impl TryFrom<RawMarket> for Market {
    type Error = MarketError;

    fn try_from(raw: RawMarket) -> Result<Self, Self::Error> {
        Market::new(raw.m, raw.agents)
    }
}

impl Market {
    pub fn new(m: usize, agents: Vec<SymmetricValuation>) -> Result<Self, MarketError> {
        for (agent, valuation) in agents.iter().enumerate() {
            if valuation.values().len() != m + 1 {
                return Err(MarketError::WrongLength {
                    agent,
                    len: valuation.values().len(),
                    expected: m + 1,
                });
            }
        }
        Ok(Market { m, agents })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.agents.len()
    }

    pub fn agents(&self) -> &[SymmetricValuation] {
        &self.agents
    }

    pub fn agent(&self, i: usize) -> &SymmetricValuation {
        &self.agents[i]
    }

    /// Error naming the first agent outside `class`.
    pub fn require_class(&self, class: ValuationClass) -> Result<(), MarketError> {
        match self.agents.iter().position(|v| !v.is_in_class(class)) {
            Some(agent) => Err(MarketError::ClassViolation { agent, required: class }),
            None => Ok(()),
        }
    }

    /// The least restrictive class among the agents.
    pub fn class(&self) -> ValuationClass {
        self.agents
            .iter()
            .map(SymmetricValuation::classify)
            .max()
            .unwrap_or(ValuationClass::Additive)
    }

    /// Same items, every agent replaced by its minimal submodular envelope.
    pub fn submodular_envelopes(&self) -> Market {
        Market {
            m: self.m,
            agents: self.agents.iter().map(|v| v.minimal_submodular_envelope()).collect(),
        }
    }

    pub fn welfare(&self, allocation: &Allocation) -> Rational {
        allocation
            .quantities
            .iter()
            .zip(&self.agents)
            .map(|(&q, v)| v.value(q).clone())
            .sum()
    }

    pub fn marginal_profile(&self) -> Result<MarginalProfile, MarketError> {
        marginal_profile(self.m, &self.agents)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("market serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Number of items allocated to each agent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Allocation {
    pub quantities: Vec<usize>,
}

impl Allocation {
    pub fn total(&self) -> usize {
        self.quantities.iter().sum()
    }
}

/// Maximum welfare over all allocations with `sum q_i <= m`, plus the
/// lexicographically smallest allocation attaining it.
///
/// Dynamic program over agents and remaining supply, `O(n m^2)`.
pub fn optimal_welfare(market: &Market) -> (Rational, Allocation) {
    let (m, n) = (market.m(), market.n());
    if n == 0 {
        return (Rational::zero(), Allocation { quantities: vec![] });
    }
    // best[i][r]: best welfare of agents i.. with at most r items.
    let mut best: Vec<Vec<Rational>> = vec![Vec::new(); n + 1];
    best[n] = vec![Rational::zero(); m + 1];
    // The last agent alone takes everything it is offered, by monotonicity.
    if n > 1 {
        best[n - 1] = market.agent(n - 1).values().to_vec();
    }
    for i in (1..n.saturating_sub(1)).rev() {
        best[i] = best_layer(market.agent(i), &best[i + 1], m);
    }
    // Agent 0 only needs supply m.
    let top = (0..=m)
        .map(|q| market.agent(0).value(q) + &best[1][m - q])
        .max()
        .expect("non-empty range");
    let mut quantities = Vec::with_capacity(n);
    let mut target = top.clone();
    let mut remaining = m;
    for (i, valuation) in market.agents().iter().enumerate() {
        let q = (0..=remaining)
            .find(|&q| valuation.value(q) + &best[i + 1][remaining - q] == target)
            .expect("optimal choice exists");
        target -= valuation.value(q);
        remaining -= q;
        quantities.push(q);
    }
    (top, Allocation { quantities })
}

fn best_layer(valuation: &SymmetricValuation, next: &[Rational], m: usize) -> Vec<Rational> {
    (0..=m)
        .map(|r| {
            (0..=r)
                .map(|q| valuation.value(q) + &next[r - q])
                .max()
                .expect("non-empty range")
        })
        .collect()
}

/// Marginal-value statistics of a list of valuations over `m` items.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarginalProfile {
    pub m: usize,
    /// All `n * m` marginal values, sorted non-increasing.
    #[serde(with = "rational::serde_vec")]
    pub values: Vec<Rational>,
    #[serde(with = "rational::serde_str")]
    pub delta: Rational,
    #[serde(with = "rational::serde_str")]
    pub epsilon: Rational,
    /// The cutoff `b` with `G(b) < m <= G(b) + E(b)`.
    #[serde(with = "rational::serde_str")]
    pub b: Rational,
    /// `m' = G(b)`, the number of marginals strictly above `b`.
    pub m_prime: usize,
    pub g_of_b: usize,
    pub e_of_b: usize,
}

impl MarginalProfile {
    /// `G(x)`: marginal values strictly greater than `x`.
    pub fn count_greater(&self, x: &Rational) -> usize {
        self.values.iter().take_while(|v| *v > x).count()
    }

    /// `E(x)`: marginal values equal to `x`.
    pub fn count_equal(&self, x: &Rational) -> usize {
        self.values.iter().filter(|v| *v == x).count()
    }

    /// Sum of the `k` largest marginal values.
    pub fn top_sum(&self, k: usize) -> Rational {
        self.values.iter().take(k).sum()
    }

    pub fn b_minus_eps(&self) -> Rational {
        &self.b - &self.epsilon
    }

    pub fn b_plus_eps(&self) -> Rational {
        &self.b + &self.epsilon
    }
}

/// All marginal values of `agents`, sorted non-increasing.
pub fn sorted_marginals(agents: &[SymmetricValuation]) -> Vec<Rational> {
    let mut values: Vec<Rational> = agents.iter().flat_map(|v| v.marginals()).collect();
    values.sort_by(|a, b| b.cmp(a));
    values
}

/// Minimum positive gap between distinct values of `values` together with 0;
/// 1 when there is no such gap.
pub fn separation(values: &[Rational]) -> Rational {
    let mut distinct: Vec<&Rational> = values.iter().collect();
    let zero = Rational::zero();
    distinct.push(&zero);
    distinct.sort();
    distinct.dedup();
    distinct
        .windows(2)
        .map(|w| w[1] - w[0])
        .min()
        .unwrap_or_else(rational::one)
}

/// Builds the profile for an explicit list of valuations (the raw
/// valuations, or their envelopes, as the caller decides).
pub fn marginal_profile(m: usize, agents: &[SymmetricValuation]) -> Result<MarginalProfile, MarketError> {
    if m == 0 {
        return Err(MarketError::NoItems);
    }
    for (agent, valuation) in agents.iter().enumerate() {
        if valuation.m() != m {
            return Err(MarketError::WrongLength {
                agent,
                len: valuation.values().len(),
                expected: m + 1,
            });
        }
    }
    let values = sorted_marginals(agents);
    let positive = values.iter().filter(|v| v.is_positive()).count();
    if positive < m {
        return Err(MarketError::InsufficientDemand { positive, m });
    }
    let delta = separation(&values);
    let epsilon = rational::half(&delta);
    // The m-th largest marginal is the unique value sandwiched by G and G + E.
    let b = values[m - 1].clone();
    let g_of_b = values.iter().take_while(|v| **v > b).count();
    let e_of_b = values.iter().filter(|v| **v == b).count();
    Ok(MarginalProfile {
        m,
        values,
        delta,
        epsilon,
        b,
        m_prime: g_of_b,
        g_of_b,
        e_of_b,
    })
}

/// Replaces each submodular agent `i` by `m` unit-demand agents `(i, j)`
/// valuing one item at `v_i(j) - v_i(j-1)`; agent `(i, j)` lands at index `i * m + (j - 1)`.
pub fn unit_demand_reduction(market: &Market) -> Result<Market, MarketError> {
    market.require_class(ValuationClass::Submodular)?;
    let m = market.m();
    let agents = market
        .agents()
        .iter()
        .flat_map(|v| (1..=m).map(move |j| SymmetricValuation::unit_demand(m, v.marginal(j))))
        .collect();
    Market::new(m, agents)
}
