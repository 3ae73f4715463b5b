//! Independent finite-support valuation distributions, seeded Monte Carlo
//! estimates, exhaustive expectations, and uniform posted prices built
//! from the expected optimum.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::market::{optimal_welfare, Market, MarketError};
use crate::rational::{self, from_usize, int, to_f64, Rational};
use crate::simulator::{self, PriceVector, SearchLimits, SimError};
use crate::valuations::{closeness_factor, SymmetricValuation, ValuationClass, ValuationError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BayesError {
    #[error("agent {agent} has an empty support")]
    EmptySupport { agent: usize },
    #[error("agent {agent}: probabilities must be positive and sum to 1")]
    BadProbabilities { agent: usize },
    #[error("support valuations disagree on the number of items")]
    LengthMismatch,
    #[error("agent {agent} draws a valuation outside {required}")]
    ClassMismatch { agent: usize, required: ValuationClass },
    #[error("agent {agent} draws a valuation {factor}-close to XOS, above the declared {c}")]
    NotClose { agent: usize, factor: String, c: String },
    #[error("at least one sample is required")]
    NoSamples,
    #[error("support enumeration has {count} profiles, above the limit {limit}")]
    TooManyProfiles { count: u128, limit: u128 },
    #[error(transparent)]
    Valuation(#[from] ValuationError),
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportPoint {
    #[serde(with = "rational::serde_str")]
    pub prob: Rational,
    #[serde(flatten)]
    pub valuation: SymmetricValuation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentDistribution {
    pub support: Vec<SupportPoint>,
}

/// A product of per-agent finite-support distributions over symmetric valuations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawDistribution")]
pub struct ValuationDistribution {
    #[serde(skip)]
    m: usize,
    agents: Vec<AgentDistribution>,
}

#[derive(Deserialize)]
struct RawDistribution {
    agents: Vec<AgentDistribution>,
}

impl TryFrom<RawDistribution> for ValuationDistribution {
    type Error = BayesError;

    fn try_from(raw: RawDistribution) -> Result<Self, Self::Error> {
        ValuationDistribution::new(raw.agents)
    }
}

impl ValuationDistribution {
    pub fn new(agents: Vec<AgentDistribution>) -> Result<Self, BayesError> {
        let mut m = None;
        for (agent, dist) in agents.iter().enumerate() {
            if dist.support.is_empty() {
                return Err(BayesError::EmptySupport { agent });
            }
            let total: Rational = dist.support.iter().map(|p| p.prob.clone()).sum();
            if !total.is_one() || dist.support.iter().any(|p| p.prob <= Rational::zero()) {
                return Err(BayesError::BadProbabilities { agent });
            }
            for point in &dist.support {
                match m {
                    None => m = Some(point.valuation.m()),
                    Some(m) if m != point.valuation.m() => return Err(BayesError::LengthMismatch),
                    Some(_) => {}
                }
            }
        }
        Ok(ValuationDistribution { m: m.unwrap_or(0), agents })
    }

    /// Every agent's valuation is fixed.
    pub fn point_mass(market: &Market) -> Self {
        ValuationDistribution {
            m: market.m(),
            agents: market
                .agents()
                .iter()
                .map(|v| AgentDistribution {
                    support: vec![SupportPoint { prob: Rational::one(), valuation: v.clone() }],
                })
                .collect(),
        }
    }

    /// `n` independent copies of one agent distribution.
    pub fn iid(n: usize, agent: AgentDistribution) -> Result<Self, BayesError> {
        ValuationDistribution::new(vec![agent; n])
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.agents.len()
    }

    pub fn agents(&self) -> &[AgentDistribution] {
        &self.agents
    }

    pub fn profile_count(&self) -> u128 {
        self.agents.iter().map(|a| a.support.len() as u128).product()
    }

    /// Every profile with its probability, in lexicographic support order.
    pub fn profiles(&self, limit: u128) -> Result<Vec<(Rational, Market)>, BayesError> {
        let count = self.profile_count();
        if count > limit {
            return Err(BayesError::TooManyProfiles { count, limit });
        }
        let mut out = Vec::with_capacity(count as usize);
        let mut index = vec![0usize; self.n()];
        loop {
            let prob: Rational = index
                .iter()
                .zip(&self.agents)
                .map(|(&i, a)| a.support[i].prob.clone())
                .product();
            let agents = index
                .iter()
                .zip(&self.agents)
                .map(|(&i, a)| a.support[i].valuation.clone())
                .collect();
            out.push((prob, Market::new(self.m, agents)?));
            // Odometer increment, last agent fastest.
            let mut pos = self.n();
            loop {
                if pos == 0 {
                    return Ok(out);
                }
                pos -= 1;
                index[pos] += 1;
                if index[pos] < self.agents[pos].support.len() {
                    break;
                }
                index[pos] = 0;
            }
        }
    }

    /// Support indices of draw number `index`; deterministic in `(seed, index)`.
    pub fn sample_indices(&self, seed: u64, index: u64) -> Vec<usize> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let scale = Rational::from_integer(BigInt::from(1u128 << 64));
        self.agents
            .iter()
            .map(|a| {
                let u = Rational::from_integer(BigInt::from(rng.random::<u64>())) / &scale;
                let mut acc = Rational::zero();
                for (i, point) in a.support.iter().enumerate() {
                    acc += &point.prob;
                    if u < acc {
                        return i;
                    }
                }
                a.support.len() - 1
            })
            .collect()
    }

    pub fn market_from_indices(&self, indices: &[usize]) -> Market {
        let agents = indices
            .iter()
            .zip(&self.agents)
            .map(|(&i, a)| a.support[i].valuation.clone())
            .collect();
        Market::new(self.m, agents).expect("support lengths were validated")
    }

    pub fn sample(&self, seed: u64, index: u64) -> Market {
        self.market_from_indices(&self.sample_indices(seed, index))
    }

    /// Errors on the first support valuation outside `class`.
    pub fn require_class(&self, class: ValuationClass) -> Result<(), BayesError> {
        for (agent, dist) in self.agents.iter().enumerate() {
            if dist.support.iter().any(|p| !p.valuation.is_in_class(class)) {
                return Err(BayesError::ClassMismatch { agent, required: class });
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("distribution serializes")
    }
}

/// Sample mean and its standard error (the latter in floating point, for reports only).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanEstimate {
    #[serde(with = "rational::serde_str")]
    pub mean: Rational,
    pub stderr: f64,
    pub samples: usize,
}

fn mean_of(values: &[Rational]) -> MeanEstimate {
    let count = from_usize(values.len());
    let mean: Rational = values.iter().sum::<Rational>() / &count;
    let stderr = if values.len() < 2 {
        0.0
    } else {
        let mu = to_f64(&mean);
        let var: f64 = values.iter().map(|v| (to_f64(v) - mu).powi(2)).sum::<f64>() / (values.len() - 1) as f64;
        (var / values.len() as f64).sqrt()
    };
    MeanEstimate { mean, stderr, samples: values.len() }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BayesEstimate {
    #[serde(with = "rational::serde_str")]
    pub expected_opt: Rational,
    pub opt_stderr: f64,
    #[serde(with = "rational::serde_str")]
    pub expected_welfare: Rational,
    pub welfare_stderr: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Monte Carlo mean of OPT over draws `0..samples`.
pub fn expected_opt(dist: &ValuationDistribution, samples: usize, seed: u64) -> Result<MeanEstimate, BayesError> {
    if samples == 0 {
        return Err(BayesError::NoSamples);
    }
    let values: Vec<Rational> = (0..samples as u64)
        .into_par_iter()
        .map(|i| optimal_welfare(&dist.sample(seed, i)).0)
        .collect();
    Ok(mean_of(&values))
}

/// Exact expected OPT by enumerating the support.
pub fn exact_expected_opt(dist: &ValuationDistribution, limit: u128) -> Result<Rational, BayesError> {
    Ok(dist
        .profiles(limit)?
        .par_iter()
        .map(|(p, market)| p * optimal_welfare(market).0)
        .sum())
}

/// Exact expected worst-case welfare at `prices`, by support enumeration.
pub fn exact_expected_welfare(
    dist: &ValuationDistribution,
    prices: &PriceVector,
    limit: u128,
    limits: SearchLimits,
) -> Result<Rational, BayesError> {
    let terms = dist
        .profiles(limit)?
        .par_iter()
        .map(|(p, market)| Ok(p * simulator::worst_case_welfare_with(market, prices, limits)?.welfare))
        .collect::<Result<Vec<Rational>, SimError>>()?;
    Ok(terms.into_iter().sum())
}

/// Mean worst-case welfare at `prices` over draws `first..first + samples`.
pub fn estimate_welfare(
    dist: &ValuationDistribution,
    prices: &PriceVector,
    samples: usize,
    seed: u64,
    first: u64,
    limits: SearchLimits,
) -> Result<MeanEstimate, BayesError> {
    if samples == 0 {
        return Err(BayesError::NoSamples);
    }
    let values = (first..first + samples as u64)
        .into_par_iter()
        .map(|i| Ok(simulator::worst_case_welfare_with(&dist.sample(seed, i), prices, limits)?.welfare))
        .collect::<Result<Vec<Rational>, SimError>>()?;
    Ok(mean_of(&values))
}

fn uniform_price(total: &Rational, m: usize, divisor: &Rational) -> Rational {
    if m == 0 {
        Rational::zero()
    } else {
        total / (from_usize(m) * divisor)
    }
}

/// Uniform price `E[OPT] / 2m` estimated from draws `0..samples`; the
/// welfare estimate uses the fresh draws `samples..2 * samples`.
pub fn bayes_uniform_xos(
    dist: &ValuationDistribution,
    samples: usize,
    seed: u64,
    limits: SearchLimits,
) -> Result<(PriceVector, BayesEstimate), BayesError> {
    if samples == 0 {
        return Err(BayesError::NoSamples);
    }
    for i in 0..samples as u64 {
        check_sample_class(dist, seed, i, ValuationClass::Xos)?;
    }
    let opt = expected_opt(dist, samples, seed)?;
    let prices = PriceVector::uniform(dist.m(), uniform_price(&opt.mean, dist.m(), &int(2)));
    let welfare = estimate_welfare(dist, &prices, samples, seed, samples as u64, limits)?;
    Ok((prices, estimate(opt, welfare, seed)))
}

fn check_sample_class(dist: &ValuationDistribution, seed: u64, index: u64, class: ValuationClass) -> Result<(), BayesError> {
    let market = dist.sample(seed, index);
    match market.agents().iter().position(|v| !v.is_in_class(class)) {
        Some(agent) => Err(BayesError::ClassMismatch { agent, required: class }),
        None => Ok(()),
    }
}

fn estimate(opt: MeanEstimate, welfare: MeanEstimate, seed: u64) -> BayesEstimate {
    BayesEstimate {
        expected_opt: opt.mean,
        opt_stderr: opt.stderr,
        expected_welfare: welfare.mean,
        welfare_stderr: welfare.stderr,
        samples: opt.samples,
        seed,
    }
}

/// `sum_i w_i(x_i) / c`, where `x` is the optimal allocation for the drawn
/// valuations and `w_i` the minimal XOS envelope of `v_i`. Errors when a
/// valuation is not `c`-close to XOS.
pub fn close_contribution(market: &Market, c: &Rational) -> Result<Rational, BayesError> {
    let (_, allocation) = optimal_welfare(market);
    let mut total = Rational::zero();
    for (agent, (v, &q)) in market.agents().iter().zip(&allocation.quantities).enumerate() {
        let w = v.minimal_xos_envelope();
        let factor = closeness_factor(v, &w)?;
        if factor > *c {
            return Err(BayesError::NotClose {
                agent,
                factor: rational::format_rational(&factor),
                c: rational::format_rational(c),
            });
        }
        total += w.value(q);
    }
    Ok(total / c)
}

/// Uniform price `E[sum_i w_i(x_i) / c] / 2m` for valuations `c`-close to XOS.
pub fn bayes_prices_c_close(
    dist: &ValuationDistribution,
    c: &Rational,
    samples: usize,
    seed: u64,
    limits: SearchLimits,
) -> Result<(PriceVector, BayesEstimate), BayesError> {
    if samples == 0 {
        return Err(BayesError::NoSamples);
    }
    let draws: Vec<Market> = (0..samples as u64).map(|i| dist.sample(seed, i)).collect();
    let contributions = draws
        .par_iter()
        .map(|market| close_contribution(market, c))
        .collect::<Result<Vec<_>, _>>()?;
    let contribution = mean_of(&contributions);
    let prices = PriceVector::uniform(dist.m(), uniform_price(&contribution.mean, dist.m(), &int(2)));
    let opt = mean_of(&draws.par_iter().map(|m| optimal_welfare(m).0).collect::<Vec<_>>());
    let welfare = estimate_welfare(dist, &prices, samples, seed, samples as u64, limits)?;
    Ok((prices, estimate(opt, welfare, seed)))
}

/// Exhaustive counterpart of [`bayes_uniform_xos`]: price `E[OPT]/2m` and
/// the exact expected worst-case welfare at it.
pub fn exact_uniform_xos(
    dist: &ValuationDistribution,
    limit: u128,
    limits: SearchLimits,
) -> Result<(PriceVector, Rational, Rational), BayesError> {
    dist.require_class(ValuationClass::Xos)?;
    let opt = exact_expected_opt(dist, limit)?;
    let prices = PriceVector::uniform(dist.m(), uniform_price(&opt, dist.m(), &int(2)));
    let welfare = exact_expected_welfare(dist, &prices, limit, limits)?;
    Ok((prices, opt, welfare))
}

/// Exhaustive counterpart of [`bayes_prices_c_close`].
pub fn exact_c_close(
    dist: &ValuationDistribution,
    c: &Rational,
    limit: u128,
    limits: SearchLimits,
) -> Result<(PriceVector, Rational, Rational), BayesError> {
    let profiles = dist.profiles(limit)?;
    let mut contribution = Rational::zero();
    let mut opt = Rational::zero();
    for (p, market) in &profiles {
        contribution += p * close_contribution(market, c)?;
        opt += p * optimal_welfare(market).0;
    }
    let prices = PriceVector::uniform(dist.m(), uniform_price(&contribution, dist.m(), &int(2)));
    let welfare = exact_expected_welfare(dist, &prices, limit, limits)?;
    Ok((prices, opt, welfare))
}

/// Each of `n` agents is unit-demand with value 1 w.p. `1 - 1/n`, otherwise
/// single-minded for all `m = n^2` items with value `m`.
pub fn unit_or_grand_bundle(n: usize) -> ValuationDistribution {
    let m = n * n;
    let rare = Rational::new(BigInt::one(), BigInt::from(n));
    let agent = AgentDistribution {
        support: vec![
            SupportPoint {
                prob: Rational::one() - &rare,
                valuation: SymmetricValuation::unit_demand(m, int(1)),
            },
            SupportPoint {
                prob: rare,
                valuation: SymmetricValuation::single_minded(m, from_usize(m)),
            },
        ],
    };
    ValuationDistribution::iid(n, agent).expect("probabilities sum to one")
}
