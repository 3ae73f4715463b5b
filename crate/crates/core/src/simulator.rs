//! Sequential arrivals at posted prices.
//!
//! Every purchase of `k` items takes the `k` cheapest remaining ones (any
//! utility-maximizing bundle of size `k` costs exactly that much), so the
//! unsold stock is always a suffix of the ascending price list. The
//! adversarial searches exploit this: a state is the multiset of agents
//! still to arrive plus the index where the remaining suffix starts.
//! Agents with identical valuations are interchangeable and are grouped
//! into classes, which keeps large symmetric instances tractable.

use std::collections::HashMap;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::market::{Allocation, Market};
use crate::rational::{self, Rational};
use crate::valuations::SymmetricValuation;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("step {step}: agent {agent} cannot choose {quantity} items (argmax set {allowed:?})")]
    InvalidTieChoice {
        step: usize,
        agent: usize,
        quantity: usize,
        allowed: Vec<usize>,
    },
    #[error("order is not a permutation of the {n} agents")]
    InvalidOrder { n: usize },
    #[error("{given} tie choices for {n} arrivals")]
    TieCount { given: usize, n: usize },
    #[error("price vector has {got} entries, market has {expected} items")]
    PriceLength { expected: usize, got: usize },
    #[error("negative price {0}")]
    NegativePrice(String),
    #[error("search exceeds the {what} limit of {limit}")]
    SizeLimit { what: &'static str, limit: usize },
    #[error(transparent)]
    Policy(#[from] PolicyError),
}

/// Static prices, kept sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PriceVector {
    prices: Vec<Rational>,
}

impl PriceVector {
    pub fn new(mut prices: Vec<Rational>) -> Result<Self, SimError> {
        if let Some(p) = prices.iter().find(|p| p.is_negative()) {
            return Err(SimError::NegativePrice(rational::format_rational(p)));
        }
        prices.sort();
        Ok(PriceVector { prices })
    }

    pub fn uniform(m: usize, price: Rational) -> Self {
        PriceVector::new(vec![price; m]).expect("uniform price must be non-negative")
    }

    /// `low_count` items at `low` and `high_count` items at `high`.
    pub fn two_level(low_count: usize, low: Rational, high_count: usize, high: Rational) -> Self {
        let mut prices = vec![low; low_count];
        prices.extend(std::iter::repeat_n(high, high_count));
        PriceVector::new(prices).expect("two-level prices must be non-negative")
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    pub fn prices(&self) -> &[Rational] {
        &self.prices
    }

    pub fn is_uniform(&self) -> bool {
        self.prices.windows(2).all(|w| w[0] == w[1])
    }

    /// `prefix[k]` is the total of the `k` cheapest prices.
    pub fn prefix_sums(&self) -> Vec<Rational> {
        let mut out = Vec::with_capacity(self.prices.len() + 1);
        let mut acc = Rational::zero();
        out.push(acc.clone());
        for p in &self.prices {
            acc += p;
            out.push(acc.clone());
        }
        out
    }

    /// The `items` most expensive prices: what is left of a static price
    /// list once the cheapest items are sold.
    pub fn last(&self, items: usize) -> PriceVector {
        PriceVector {
            prices: self.prices[self.prices.len() - items..].to_vec(),
        }
    }

    pub fn to_file(&self) -> PricesFile {
        if !self.prices.is_empty() && self.is_uniform() {
            PricesFile::Uniform { uniform: self.prices[0].clone() }
        } else {
            PricesFile::Explicit { prices: self.prices.clone() }
        }
    }
}

impl std::fmt::Display for PriceVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if !self.prices.is_empty() && self.is_uniform() {
            return write!(f, "uniform {} x{}", rational::Frac(&self.prices[0]), self.prices.len());
        }
        let parts: Vec<String> = self.prices.iter().map(rational::format_rational).collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl Serialize for PriceVector {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Raw<'a> {
            #[serde(with = "rational::serde_vec")]
            prices: &'a [Rational],
        }
        Raw { prices: &self.prices }.serialize(serializer)
    }
}

/// On-disk price description: explicit list or a single uniform price.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PricesFile {
    Explicit {
        #[serde(with = "rational::serde_vec")]
        prices: Vec<Rational>,
    },
    Uniform {
        #[serde(with = "rational::serde_str")]
        uniform: Rational,
    },
}

impl PricesFile {
    pub fn resolve(&self, m: usize) -> Result<PriceVector, SimError> {
        match self {
            PricesFile::Explicit { prices } => {
                if prices.len() != m {
                    return Err(SimError::PriceLength { expected: m, got: prices.len() });
                }
                PriceVector::new(prices.clone())
            }
            PricesFile::Uniform { uniform } => PriceVector::new(vec![uniform.clone(); m]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TieMode {
    /// Only the largest utility-maximizing quantity.
    Canonical,
    /// Every utility-maximizing quantity.
    #[default]
    All,
}

/// Utility-maximizing purchase sizes against the remaining stock
/// `prefix[start..]` (prefix sums of the full ascending price list).
fn argmax_quantities(v: &SymmetricValuation, prefix: &[Rational], start: usize) -> Vec<usize> {
    let available = (prefix.len() - 1 - start).min(v.m());
    let base = &prefix[start];
    let mut best: Option<Rational> = None;
    let mut set = Vec::new();
    for k in 0..=available {
        let utility = v.value(k) - (&prefix[start + k] - base);
        match &best {
            Some(b) if utility < *b => {}
            Some(b) if utility == *b => set.push(k),
            _ => {
                best = Some(utility);
                set.clear();
                set.push(k);
            }
        }
    }
    set
}

/// Argmax set of `v(k) - (sum of the k cheapest remaining prices)`.
pub fn best_response(v: &SymmetricValuation, remaining: &[Rational], mode: TieMode) -> Vec<usize> {
    let mut sorted = remaining.to_vec();
    sorted.sort();
    let prices = PriceVector { prices: sorted };
    let set = argmax_quantities(v, &prices.prefix_sums(), 0);
    match mode {
        TieMode::All => set,
        TieMode::Canonical => vec![*set.last().expect("argmax set is never empty")],
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Purchase {
    pub agent: usize,
    pub quantity: usize,
    #[serde(with = "rational::serde_str")]
    pub paid: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcome {
    pub allocation: Allocation,
    #[serde(with = "rational::serde_str")]
    pub welfare: Rational,
    #[serde(with = "rational::serde_str")]
    pub revenue: Rational,
    pub order: Vec<usize>,
    pub purchases: Vec<Purchase>,
}

impl Outcome {
    /// Sum of the agents' realized utilities.
    pub fn total_utility(&self) -> Rational {
        &self.welfare - &self.revenue
    }
}

fn check_order(order: &[usize], n: usize) -> Result<(), SimError> {
    let mut seen = vec![false; n];
    if order.len() != n {
        return Err(SimError::InvalidOrder { n });
    }
    for &i in order {
        if i >= n || std::mem::replace(&mut seen[i], true) {
            return Err(SimError::InvalidOrder { n });
        }
    }
    Ok(())
}

fn check_prices(market: &Market, prices: &PriceVector) -> Result<(), SimError> {
    if prices.len() != market.m() {
        return Err(SimError::PriceLength { expected: market.m(), got: prices.len() });
    }
    Ok(())
}

/// Replays one arrival order with explicit purchase quantities.
pub fn simulate(market: &Market, prices: &PriceVector, order: &[usize], ties: &[usize]) -> Result<Outcome, SimError> {
    check_prices(market, prices)?;
    check_order(order, market.n())?;
    if ties.len() != order.len() {
        return Err(SimError::TieCount { given: ties.len(), n: order.len() });
    }
    let prefix = prices.prefix_sums();
    let mut start = 0;
    let mut quantities = vec![0; market.n()];
    let mut purchases = Vec::with_capacity(order.len());
    for (step, (&agent, &quantity)) in order.iter().zip(ties).enumerate() {
        let allowed = argmax_quantities(market.agent(agent), &prefix, start);
        if !allowed.contains(&quantity) {
            return Err(SimError::InvalidTieChoice { step, agent, quantity, allowed });
        }
        let paid = &prefix[start + quantity] - &prefix[start];
        start += quantity;
        quantities[agent] = quantity;
        purchases.push(Purchase { agent, quantity, paid });
    }
    let allocation = Allocation { quantities };
    Ok(Outcome {
        welfare: market.welfare(&allocation),
        revenue: prefix[start].clone(),
        allocation,
        order: order.to_vec(),
        purchases,
    })
}

/// Search caps. Agents with identical valuations count once toward `max_classes`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchLimits {
    pub max_classes: usize,
    pub max_states: usize,
    pub max_orders: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_classes: 12,
            max_states: 4_000_000,
            max_orders: 100_000,
        }
    }
}

/// An extremal welfare together with a replayable witness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorstCaseResult {
    #[serde(with = "rational::serde_str")]
    pub welfare: Rational,
    pub order: Vec<usize>,
    pub ties: Vec<usize>,
    pub states: usize,
}

/// Agents grouped by identical valuation, in order of first appearance.
struct Classes<'a> {
    valuations: Vec<&'a SymmetricValuation>,
    members: Vec<Vec<usize>>,
}

impl<'a> Classes<'a> {
    fn of(market: &'a Market) -> Self {
        let mut valuations: Vec<&SymmetricValuation> = Vec::new();
        let mut members: Vec<Vec<usize>> = Vec::new();
        for (i, v) in market.agents().iter().enumerate() {
            match valuations.iter().position(|w| *w == v) {
                Some(c) => members[c].push(i),
                None => {
                    valuations.push(v);
                    members.push(vec![i]);
                }
            }
        }
        Classes { valuations, members }
    }

    fn len(&self) -> usize {
        self.valuations.len()
    }
}

#[derive(Clone)]
struct Entry {
    value: Rational,
    /// Class and quantity of the extremal move, `None` at terminal states.
    choice: Option<(usize, usize)>,
}

struct Search<'a> {
    classes: Classes<'a>,
    prefix: Vec<Rational>,
    m: usize,
    memo: HashMap<(Vec<u16>, usize), Entry>,
    argmax: HashMap<(usize, usize), Vec<usize>>,
    max_states: usize,
}

impl Search<'_> {
    fn argmax(&mut self, class: usize, start: usize) -> Vec<usize> {
        let (valuations, prefix) = (&self.classes.valuations, &self.prefix);
        self.argmax
            .entry((class, start))
            .or_insert_with(|| argmax_quantities(valuations[class], prefix, start))
            .clone()
    }

    /// Minimum welfare over orders and ties.
    fn worst(&mut self, counts: &mut Vec<u16>, start: usize) -> Result<Rational, SimError> {
        if start == self.m || counts.iter().all(|&c| c == 0) {
            return Ok(Rational::zero());
        }
        if let Some(entry) = self.memo.get(&(counts.clone(), start)) {
            return Ok(entry.value.clone());
        }
        if self.memo.len() >= self.max_states {
            return Err(SimError::SizeLimit { what: "state", limit: self.max_states });
        }
        let mut best: Option<Entry> = None;
        for class in 0..counts.len() {
            if counts[class] == 0 {
                continue;
            }
            counts[class] -= 1;
            for k in self.argmax(class, start) {
                let value = self.classes.valuations[class].value(k) + self.worst(counts, start + k)?;
                if best.as_ref().is_none_or(|b| value < b.value) {
                    best = Some(Entry { value, choice: Some((class, k)) });
                }
            }
            counts[class] += 1;
        }
        let entry = best.expect("at least one agent remains");
        let value = entry.value.clone();
        self.memo.insert((counts.clone(), start), entry);
        Ok(value)
    }

    fn witness(&self, mut counts: Vec<u16>) -> (Vec<usize>, Vec<usize>) {
        let mut used = vec![0usize; counts.len()];
        let (mut order, mut ties) = (Vec::new(), Vec::new());
        let mut start = 0;
        while let Some(Entry { choice: Some((class, k)), .. }) = self.memo.get(&(counts.clone(), start)) {
            order.push(self.classes.members[*class][used[*class]]);
            ties.push(*k);
            used[*class] += 1;
            counts[*class] -= 1;
            start += k;
        }
        // Whoever is left arrives to an empty (or worthless) stock.
        for (class, members) in self.classes.members.iter().enumerate() {
            for &agent in &members[used[class]..] {
                order.push(agent);
                ties.push(0);
            }
        }
        (order, ties)
    }
}

/// Exact minimum welfare over all arrival orders and all utility-maximizing
/// tie choices.
pub fn worst_case_welfare(market: &Market, prices: &PriceVector) -> Result<WorstCaseResult, SimError> {
    worst_case_welfare_with(market, prices, SearchLimits::default())
}

pub fn worst_case_welfare_with(
    market: &Market,
    prices: &PriceVector,
    limits: SearchLimits,
) -> Result<WorstCaseResult, SimError> {
    check_prices(market, prices)?;
    let classes = Classes::of(market);
    if classes.len() > limits.max_classes {
        return Err(SimError::SizeLimit { what: "agent class", limit: limits.max_classes });
    }
    let counts: Vec<u16> = classes.members.iter().map(|m| m.len() as u16).collect();
    let mut search = Search {
        classes,
        prefix: prices.prefix_sums(),
        m: market.m(),
        memo: HashMap::new(),
        argmax: HashMap::new(),
        max_states: limits.max_states,
    };
    let welfare = search.worst(&mut counts.clone(), 0)?;
    let (order, ties) = search.witness(counts);
    Ok(WorstCaseResult {
        welfare,
        order,
        ties,
        states: search.memo.len(),
    })
}

/// Minimum welfare over tie choices for a fixed arrival order.
pub fn worst_case_fixed_order(market: &Market, prices: &PriceVector, order: &[usize]) -> Result<WorstCaseResult, SimError> {
    check_prices(market, prices)?;
    check_order(order, market.n())?;
    let prefix = prices.prefix_sums();
    let valuations: Vec<&SymmetricValuation> = order.iter().map(|&i| market.agent(i)).collect();
    let mut memo: Vec<Vec<Option<(Rational, usize)>>> = vec![vec![None; market.m() + 1]; order.len() + 1];
    let welfare = fixed_order_worst(&valuations, &prefix, 0, 0, &mut memo);
    let mut ties = Vec::with_capacity(order.len());
    let mut start = 0;
    for row in memo.iter().take(order.len()) {
        let k = match &row[start] {
            Some((_, k)) => *k,
            None => 0,
        };
        ties.push(k);
        start += k;
    }
    let states = memo.iter().flatten().filter(|e| e.is_some()).count();
    Ok(WorstCaseResult {
        welfare,
        order: order.to_vec(),
        ties,
        states,
    })
}

fn fixed_order_worst(
    valuations: &[&SymmetricValuation],
    prefix: &[Rational],
    pos: usize,
    start: usize,
    memo: &mut Vec<Vec<Option<(Rational, usize)>>>,
) -> Rational {
    if pos == valuations.len() || start + 1 == prefix.len() {
        return Rational::zero();
    }
    if let Some((value, _)) = &memo[pos][start] {
        return value.clone();
    }
    let mut best: Option<(Rational, usize)> = None;
    for k in argmax_quantities(valuations[pos], prefix, start) {
        let value = valuations[pos].value(k) + fixed_order_worst(valuations, prefix, pos + 1, start + k, memo);
        if best.as_ref().is_none_or(|(b, _)| value < *b) {
            best = Some((value, k));
        }
    }
    let best = best.expect("argmax set is never empty");
    let value = best.0.clone();
    memo[pos][start] = Some(best);
    value
}

/// Distinct arrival orders up to swapping agents with identical valuations.
fn distinct_orders(classes: &Classes<'_>, limit: usize) -> Result<Vec<Vec<usize>>, SimError> {
    fn go(
        classes: &Classes<'_>,
        used: &mut Vec<usize>,
        current: &mut Vec<usize>,
        total: usize,
        out: &mut Vec<Vec<usize>>,
        limit: usize,
    ) -> Result<(), SimError> {
        if current.len() == total {
            if out.len() >= limit {
                return Err(SimError::SizeLimit { what: "arrival order", limit });
            }
            out.push(current.clone());
            return Ok(());
        }
        for class in 0..classes.len() {
            if used[class] < classes.members[class].len() {
                current.push(classes.members[class][used[class]]);
                used[class] += 1;
                go(classes, used, current, total, out, limit)?;
                used[class] -= 1;
                current.pop();
            }
        }
        Ok(())
    }
    let total = classes.members.iter().map(Vec::len).sum();
    let mut out = Vec::new();
    go(classes, &mut vec![0; classes.len()], &mut Vec::new(), total, &mut out, limit)?;
    Ok(out)
}

/// The seller commits to an arrival order in advance; ties stay adversarial.
/// Returns the best committed order and its worst tie outcome.
pub fn best_case_welfare(market: &Market, prices: &PriceVector) -> Result<WorstCaseResult, SimError> {
    best_case_welfare_with(market, prices, SearchLimits::default())
}

pub fn best_case_welfare_with(
    market: &Market,
    prices: &PriceVector,
    limits: SearchLimits,
) -> Result<WorstCaseResult, SimError> {
    check_prices(market, prices)?;
    let classes = Classes::of(market);
    if classes.len() > limits.max_classes {
        return Err(SimError::SizeLimit { what: "agent class", limit: limits.max_classes });
    }
    let mut best: Option<WorstCaseResult> = None;
    let mut states = 0;
    for order in distinct_orders(&classes, limits.max_orders)? {
        let result = worst_case_fixed_order(market, prices, &order)?;
        states += result.states;
        if best.as_ref().is_none_or(|b| result.welfare > b.welfare) {
            best = Some(result);
        }
    }
    let mut best = best.expect("at least the empty order exists");
    best.states = states;
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolicyError {
    #[error("policy undefined with {items} items left: {reason}")]
    Undefined { items: usize, reason: String },
    #[error("policy posted {got} prices for {items} remaining items")]
    WrongLength { items: usize, got: usize },
}

/// Prices re-posted every round from the set of agents yet to arrive and
/// the number of unsold items.
pub trait DynamicPolicy: Sync {
    fn prices(&self, remaining_agents: &[usize], items: usize) -> Result<PriceVector, PolicyError>;
}

/// A static price list seen as a dynamic policy: each round shows the
/// unsold (most expensive) part of the list.
pub struct StaticPolicy(pub PriceVector);

impl DynamicPolicy for StaticPolicy {
    fn prices(&self, _remaining_agents: &[usize], items: usize) -> Result<PriceVector, PolicyError> {
        if items > self.0.len() {
            return Err(PolicyError::Undefined {
                items,
                reason: "more items than the static list".into(),
            });
        }
        Ok(self.0.last(items))
    }
}

struct DynamicSearch<'a, P: DynamicPolicy + ?Sized> {
    market: &'a Market,
    policy: &'a P,
    memo: HashMap<(u64, usize), Entry>,
    max_states: usize,
}

impl<P: DynamicPolicy + ?Sized> DynamicSearch<'_, P> {
    fn worst(&mut self, mask: u64, items: usize) -> Result<Rational, SimError> {
        if mask == 0 || items == 0 {
            return Ok(Rational::zero());
        }
        if let Some(entry) = self.memo.get(&(mask, items)) {
            return Ok(entry.value.clone());
        }
        if self.memo.len() >= self.max_states {
            return Err(SimError::SizeLimit { what: "state", limit: self.max_states });
        }
        let remaining: Vec<usize> = (0..self.market.n()).filter(|i| mask >> i & 1 == 1).collect();
        let prices = self.policy.prices(&remaining, items)?;
        if prices.len() != items {
            return Err(PolicyError::WrongLength { items, got: prices.len() }.into());
        }
        let prefix = prices.prefix_sums();
        let mut best: Option<Entry> = None;
        for &agent in &remaining {
            let valuation = self.market.agent(agent);
            for k in argmax_quantities(valuation, &prefix, 0) {
                let value = valuation.value(k) + self.worst(mask & !(1 << agent), items - k)?;
                if best.as_ref().is_none_or(|b| value < b.value) {
                    best = Some(Entry { value, choice: Some((agent, k)) });
                }
            }
        }
        let entry = best.expect("mask is non-empty");
        let value = entry.value.clone();
        self.memo.insert((mask, items), entry);
        Ok(value)
    }
}

/// Exact minimum welfare over orders and ties when prices are re-posted
/// from `policy` before every arrival.
pub fn worst_case_welfare_dynamic<P: DynamicPolicy + ?Sized>(
    market: &Market,
    policy: &P,
) -> Result<WorstCaseResult, SimError> {
    worst_case_welfare_dynamic_with(market, policy, SearchLimits::default())
}

pub fn worst_case_welfare_dynamic_with<P: DynamicPolicy + ?Sized>(
    market: &Market,
    policy: &P,
    limits: SearchLimits,
) -> Result<WorstCaseResult, SimError> {
    let n = market.n();
    if n > limits.max_classes.min(63) {
        return Err(SimError::SizeLimit { what: "agent", limit: limits.max_classes.min(63) });
    }
    let full = (1u64 << n) - 1;
    let mut search = DynamicSearch {
        market,
        policy,
        memo: HashMap::new(),
        max_states: limits.max_states,
    };
    let welfare = search.worst(full, market.m())?;
    let (mut order, mut ties) = (Vec::new(), Vec::new());
    let (mut mask, mut items) = (full, market.m());
    while let Some(Entry { choice: Some((agent, k)), .. }) = search.memo.get(&(mask, items)) {
        order.push(*agent);
        ties.push(*k);
        mask &= !(1 << agent);
        items -= k;
    }
    for agent in (0..n).filter(|i| mask >> i & 1 == 1) {
        order.push(agent);
        ties.push(0);
    }
    Ok(WorstCaseResult {
        welfare,
        order,
        ties,
        states: search.memo.len(),
    })
}

/// Replays a dynamic-policy witness; returns the realized outcome.
pub fn simulate_dynamic<P: DynamicPolicy + ?Sized>(
    market: &Market,
    policy: &P,
    order: &[usize],
    ties: &[usize],
) -> Result<Outcome, SimError> {
    check_order(order, market.n())?;
    if ties.len() != order.len() {
        return Err(SimError::TieCount { given: ties.len(), n: order.len() });
    }
    let mut remaining: Vec<usize> = (0..market.n()).collect();
    let mut items = market.m();
    let mut quantities = vec![0; market.n()];
    let mut purchases = Vec::new();
    let mut revenue = Rational::zero();
    for (step, (&agent, &quantity)) in order.iter().zip(ties).enumerate() {
        let prefix = if items == 0 {
            vec![Rational::zero()]
        } else {
            let prices = policy.prices(&remaining, items)?;
            if prices.len() != items {
                return Err(PolicyError::WrongLength { items, got: prices.len() }.into());
            }
            prices.prefix_sums()
        };
        let allowed = argmax_quantities(market.agent(agent), &prefix, 0);
        if !allowed.contains(&quantity) {
            return Err(SimError::InvalidTieChoice { step, agent, quantity, allowed });
        }
        let paid = prefix[quantity].clone();
        revenue += &paid;
        purchases.push(Purchase { agent, quantity, paid });
        items -= quantity;
        quantities[agent] = quantity;
        remaining.retain(|&i| i != agent);
    }
    let allocation = Allocation { quantities };
    Ok(Outcome {
        welfare: market.welfare(&allocation),
        revenue,
        allocation,
        order: order.to_vec(),
        purchases,
    })
}

/// Brute force over every order and tie branch, without memoization or
/// class grouping. Exponential; meant for cross-checking small markets.
pub fn worst_case_naive(market: &Market, prices: &PriceVector) -> Result<Rational, SimError> {
    check_prices(market, prices)?;
    let prefix = prices.prefix_sums();
    fn go(market: &Market, prefix: &[Rational], left: &mut Vec<usize>, start: usize) -> Rational {
        if left.is_empty() {
            return Rational::zero();
        }
        let mut best: Option<Rational> = None;
        for idx in 0..left.len() {
            let agent = left.remove(idx);
            for k in argmax_quantities(market.agent(agent), prefix, start) {
                let value = market.agent(agent).value(k) + go(market, prefix, left, start + k);
                if best.as_ref().is_none_or(|b| value < *b) {
                    best = Some(value);
                }
            }
            left.insert(idx, agent);
        }
        best.expect("non-empty")
    }
    Ok(go(market, &prefix, &mut (0..market.n()).collect(), 0))
}
