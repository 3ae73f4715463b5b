//! Named example and lower-bound markets, each paired with the welfare
//! bound it is supposed to witness and a finite grid of price vectors
//! (one representative per case of the bound's argument, plus boundaries).

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bayesian::{self, BayesError, ValuationDistribution};
use crate::market::{optimal_welfare, Market, MarketError};
use crate::rational::{self, euler_e, format_rational, from_usize, int, rat, to_f64, Rational};
use crate::simulator::{self, best_response, PriceVector, SearchLimits, SimError, TieMode};
use crate::valuations::{closeness_factor, SymmetricValuation, ValuationClass, ValuationError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("unknown instance `{0}`")]
    UnknownId(String),
    #[error("bad parameters for {id}: {reason}")]
    BadParams { id: &'static str, reason: String },
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Bayes(#[from] BayesError),
    #[error(transparent)]
    Valuation(#[from] ValuationError),
}

/// What the bound limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    /// Worked example; the bound is the trivial `welfare <= OPT`.
    Example,
    /// Worst-case welfare of every static price vector.
    AllStatic,
    /// Worst-case welfare of every uniform price.
    UniformStatic,
    /// Any dynamic continuation after the given first-round prices.
    Dynamic,
    /// Welfare under the best committed arrival order.
    BestOrder,
    /// Welfare under the arrival order `0, 1, .., n-1`, known in advance.
    FixedOrder,
    /// Expected welfare over a valuation distribution.
    Bayesian,
    /// Closeness factor of a valuation to its minimal envelope.
    Envelope,
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundKind::Example => "example",
            BoundKind::AllStatic => "all-static",
            BoundKind::UniformStatic => "uniform-static",
            BoundKind::Dynamic => "dynamic",
            BoundKind::BestOrder => "best-order",
            BoundKind::FixedOrder => "fixed-order",
            BoundKind::Bayesian => "bayesian",
            BoundKind::Envelope => "envelope",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    pub label: String,
    pub prices: PriceVector,
}

/// Optional generator parameters; unset fields take the documented defaults.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InstanceParams {
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub l: Option<usize>,
    pub epsilon: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedInstance {
    pub id: InstanceId,
    pub params: Vec<(&'static str, String)>,
    pub market: Option<Market>,
    pub distribution: Option<ValuationDistribution>,
    /// Claimed class of each agent, in market order.
    pub agent_classes: Vec<ValuationClass>,
    /// Closed-form OPT (expected OPT for distributions, `v(m)` for envelope instances).
    pub opt: Rational,
    pub bound: Rational,
    pub bound_kind: BoundKind,
    /// Ratio tolerance, only for bounds built from irrational constants.
    pub tolerance: Option<f64>,
    pub grid: Vec<Region>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceId {
    IntroExample,
    PrelimExample,
    Submod2item,
    Submod0802,
    SubmodUniform2agents,
    SubmodIdentical,
    XosStatic1e,
    XosDynamic56,
    SubaddHalf,
    SubaddThird,
    Subadd34Identical,
    Subadd23Identical,
    General1m,
    GeneralBestOrder,
    BayesLower,
    EnvelopeTightXos,
    EnvelopeTightSubadd,
}

impl InstanceId {
    pub const ALL: [InstanceId; 17] = [
        InstanceId::IntroExample,
        InstanceId::PrelimExample,
        InstanceId::Submod2item,
        InstanceId::Submod0802,
        InstanceId::SubmodUniform2agents,
        InstanceId::SubmodIdentical,
        InstanceId::XosStatic1e,
        InstanceId::XosDynamic56,
        InstanceId::SubaddHalf,
        InstanceId::SubaddThird,
        InstanceId::Subadd34Identical,
        InstanceId::Subadd23Identical,
        InstanceId::General1m,
        InstanceId::GeneralBestOrder,
        InstanceId::BayesLower,
        InstanceId::EnvelopeTightXos,
        InstanceId::EnvelopeTightSubadd,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            InstanceId::IntroExample => "intro_example",
            InstanceId::PrelimExample => "prelim_example",
            InstanceId::Submod2item => "submod_2item",
            InstanceId::Submod0802 => "submod_0802",
            InstanceId::SubmodUniform2agents => "submod_uniform_2agents",
            InstanceId::SubmodIdentical => "submod_identical",
            InstanceId::XosStatic1e => "xos_static_1e",
            InstanceId::XosDynamic56 => "xos_dynamic_56",
            InstanceId::SubaddHalf => "subadd_half",
            InstanceId::SubaddThird => "subadd_third",
            InstanceId::Subadd34Identical => "subadd_34_identical",
            InstanceId::Subadd23Identical => "subadd_23_identical",
            InstanceId::General1m => "general_1m",
            InstanceId::GeneralBestOrder => "general_best_order",
            InstanceId::BayesLower => "bayes_lower",
            InstanceId::EnvelopeTightXos => "envelope_tight_xos",
            InstanceId::EnvelopeTightSubadd => "envelope_tight_subadd",
        }
    }

    /// One-line description with the parameters the generator reads.
    pub fn summary(self) -> &'static str {
        match self {
            InstanceId::IntroExample => "two agents (0,5,9,11), three items, uniform price 4",
            InstanceId::PrelimExample => "agents (0,5,9,11) and (0,2,4,5); V={5,4,2,2,2,1}, OPT=11",
            InstanceId::Submod2item => "unit-demand 2 vs additive 1 on two items; static pricing <= 2/3",
            InstanceId::Submod0802 => "[m=14] m unit-demand 1 and floor(alpha m) unit-demand beta; static <= ~0.802",
            InstanceId::SubmodUniform2agents => "[m=10] unit-demand m vs additive 1; uniform <= m/(2m-1)",
            InstanceId::SubmodIdentical => "[n=3] n agents v(i)=n+i on n^2 items; uniform <= (n+1)/(2n)",
            InstanceId::XosStatic1e => "[m=1000] two XOS agents, k=floor(m/e); static <= ~1-1/e",
            InstanceId::XosDynamic56 => "v1=(0,4,4,6) vs unit-demand 1 on three items; dynamic <= 5/6",
            InstanceId::SubaddHalf => "[m=10] v1=1 up to m-1, v1(m)=2, unit-demand 1/(m-1); static <= ~1/2",
            InstanceId::SubaddThird => "[m=50] three subadditive agents; uniform <= (m+2)/(3m-2)",
            InstanceId::Subadd34Identical => "[m=10, eps=1/m^2] two identical subadditive agents; static <= ~3/4",
            InstanceId::Subadd23Identical => "[m=6] two agents v(i)=m+i; uniform <= (2m+2)/(3m)",
            InstanceId::General1m => "[m=5] unit-demand 1 then single-minded m; static <= 1/m even for this known order",
            InstanceId::GeneralBestOrder => "[m=10, eps=1/m^2] two identical general agents; best order <= m/2+1",
            InstanceId::BayesLower => "[n=3] unit-demand 1 w.p. 1-1/n else grand bundle m=n^2; Theta(1/n)",
            InstanceId::EnvelopeTightXos => "[l=39] XOS v with submodular envelope ratio >= 1+(l-1)/(l+1)",
            InstanceId::EnvelopeTightSubadd => "[l=20] subadditive v with XOS envelope ratio >= 2l/(l+1)",
        }
    }
}

impl fmt::Display for InstanceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InstanceId {
    type Err = InstanceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        InstanceId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| InstanceError::UnknownId(s.to_string()))
    }
}

/// Root of `x^3 - 2x^2 - x + 1` in `[2, 3]`, bracketed to width `1e-12`.
pub fn beta_0802() -> Rational {
    let width = Rational::new(BigInt::one(), BigInt::from(10u64.pow(12)));
    rational::bisect(|x| x * x * x - int(2) * x * x - x + int(1), int(2), int(3), &width)
}

fn bad(id: &'static str, reason: impl Into<String>) -> InstanceError {
    InstanceError::BadParams { id, reason: reason.into() }
}

fn floor(x: &Rational) -> usize {
    x.floor().to_integer().try_into().expect("non-negative and small")
}

fn uniform_regions(m: usize, levels: &[Rational]) -> Vec<Region> {
    levels
        .iter()
        .map(|p| Region {
            label: format!("uniform {}", format_rational(p)),
            prices: PriceVector::uniform(m, p.clone()),
        })
        .collect()
}

/// Every sorted price vector with entries drawn from `levels`.
fn multiset_regions(m: usize, levels: &[Rational]) -> Vec<Region> {
    fn go(levels: &[Rational], left: usize, level: usize, counts: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if level + 1 == levels.len() {
            counts.push(left);
            out.push(counts.clone());
            counts.pop();
            return;
        }
        for c in (0..=left).rev() {
            counts.push(c);
            go(levels, left - c, level + 1, counts, out);
            counts.pop();
        }
    }
    let mut all = Vec::new();
    go(levels, m, 0, &mut Vec::new(), &mut all);
    all.into_iter()
        .map(|counts| {
            let label = counts
                .iter()
                .zip(levels)
                .filter(|(&c, _)| c > 0)
                .map(|(c, p)| format!("{}x{}", format_rational(p), c))
                .collect::<Vec<_>>()
                .join(" ");
            let prices = counts
                .iter()
                .zip(levels)
                .flat_map(|(&c, p)| std::iter::repeat_n(p.clone(), c))
                .collect();
            Region { label, prices: PriceVector::new(prices).expect("levels are non-negative") }
        })
        .collect()
}

impl NamedInstance {
    #[allow(clippy::too_many_arguments)]
    fn simple(
        id: InstanceId,
        params: Vec<(&'static str, String)>,
        market: Market,
        agent_classes: Vec<ValuationClass>,
        opt: Rational,
        bound: Rational,
        bound_kind: BoundKind,
        grid: Vec<Region>,
    ) -> Self {
        NamedInstance {
            id,
            params,
            market: Some(market),
            distribution: None,
            agent_classes,
            opt,
            bound,
            bound_kind,
            tolerance: None,
            grid,
        }
    }

    pub fn m(&self) -> usize {
        match (&self.market, &self.distribution) {
            (Some(market), _) => market.m(),
            (None, Some(dist)) => dist.m(),
            (None, None) => 0,
        }
    }

    /// JSON of the market, or of the distribution for Bayesian instances.
    pub fn to_json(&self) -> String {
        match (&self.market, &self.distribution) {
            (Some(market), _) => market.to_json(),
            (None, Some(dist)) => dist.to_json(),
            (None, None) => "{}".to_string(),
        }
    }
}

/// Builds instance `id` with `params`, falling back to the documented defaults.
pub fn generate(id: InstanceId, params: &InstanceParams) -> Result<NamedInstance, InstanceError> {
    use ValuationClass::*;
    let ints = SymmetricValuation::from_ints;
    Ok(match id {
        InstanceId::IntroExample => {
            let market = Market::new(3, vec![ints(&[0, 5, 9, 11]), ints(&[0, 5, 9, 11])])?;
            let grid = uniform_regions(3, &[int(4)]);
            NamedInstance::simple(id, vec![], market, vec![Submodular; 2], int(14), int(1), BoundKind::Example, grid)
        }
        InstanceId::PrelimExample => {
            let market = Market::new(3, vec![ints(&[0, 5, 9, 11]), ints(&[0, 2, 4, 5])])?;
            let grid = uniform_regions(3, &[rat(3, 2), rat(5, 2), int(4)]);
            NamedInstance::simple(id, vec![], market, vec![Submodular; 2], int(11), int(1), BoundKind::Example, grid)
        }
        InstanceId::Submod2item => {
            let market = Market::new(
                2,
                vec![SymmetricValuation::unit_demand(2, int(2)), SymmetricValuation::additive(2, int(1))],
            )?;
            let grid = multiset_regions(2, &[rat(1, 2), int(1), rat(3, 2), int(2), rat(5, 2)]);
            NamedInstance::simple(id, vec![], market, vec![Submodular; 2], int(3), rat(2, 3), BoundKind::AllStatic, grid)
        }
        InstanceId::Submod0802 => submod_0802(params.m.unwrap_or(14))?,
        InstanceId::SubmodUniform2agents => {
            let m = params.m.unwrap_or(10);
            if m < 2 {
                return Err(bad("submod_uniform_2agents", "m >= 2"));
            }
            let mm = from_usize(m);
            let market = Market::new(
                m,
                vec![SymmetricValuation::unit_demand(m, mm.clone()), SymmetricValuation::additive(m, int(1))],
            )?;
            let opt = int(2) * &mm - int(1);
            let levels = [int(0), rat(1, 2), int(1), rat(3, 2), &mm - rat(1, 2), mm.clone(), &mm + int(1)];
            NamedInstance::simple(
                id,
                vec![("m", m.to_string())],
                market,
                vec![Submodular; 2],
                opt.clone(),
                &mm / opt,
                BoundKind::UniformStatic,
                uniform_regions(m, &levels),
            )
        }
        InstanceId::SubmodIdentical => {
            let n = params.n.unwrap_or(3);
            if !(1..=12).contains(&n) {
                return Err(bad("submod_identical", "1 <= n <= 12"));
            }
            let m = n * n;
            let v = SymmetricValuation::new((0..=m).map(|i| if i == 0 { int(0) } else { from_usize(n + i) }).collect())?;
            let market = Market::new(m, vec![v; n])?;
            let nn = from_usize(n);
            let levels = [int(0), rat(1, 2), int(1), rat(3, 2), nn.clone(), &nn + int(1), &nn + int(2)];
            NamedInstance::simple(
                id,
                vec![("n", n.to_string())],
                market,
                vec![Submodular; n],
                int(2) * &nn * &nn,
                (&nn + int(1)) / (int(2) * &nn),
                BoundKind::UniformStatic,
                uniform_regions(m, &levels),
            )
        }
        InstanceId::XosStatic1e => xos_static_1e(params.m.unwrap_or(1000))?,
        InstanceId::XosDynamic56 => {
            let market = Market::new(3, vec![ints(&[0, 4, 4, 6]), SymmetricValuation::unit_demand(3, int(1))])?;
            let levels = [rat(1, 2), int(1), rat(3, 2), int(2), int(4), int(5), int(7)];
            NamedInstance::simple(
                id,
                vec![],
                market,
                vec![Xos, Submodular],
                int(6),
                rat(5, 6),
                BoundKind::Dynamic,
                multiset_regions(3, &levels),
            )
        }
        InstanceId::SubaddHalf => {
            let m = params.m.unwrap_or(10);
            if m < 2 {
                return Err(bad("subadd_half", "m >= 2"));
            }
            let low = Rational::new(BigInt::one(), BigInt::from(m - 1));
            let v1 = SymmetricValuation::new((0..=m).map(|i| int(if i == 0 { 0 } else if i < m { 1 } else { 2 })).collect())?;
            let market = Market::new(m, vec![v1, SymmetricValuation::unit_demand(m, low.clone())])?;
            let levels = [&low / int(2), low.clone(), &low * int(2), int(1), int(2)];
            NamedInstance::simple(
                id,
                vec![("m", m.to_string())],
                market,
                vec![Subadditive, Submodular],
                int(2),
                (int(1) + &low) / int(2),
                BoundKind::AllStatic,
                multiset_regions(m, &levels),
            )
        }
        InstanceId::SubaddThird => {
            let m = params.m.unwrap_or(50);
            if m < 2 {
                return Err(bad("subadd_third", "m >= 2"));
            }
            let mm = from_usize(m);
            let top = int(3) * &mm - int(2);
            let v1 = SymmetricValuation::new(
                (0..=m)
                    .map(|i| match i {
                        0 => int(0),
                        i if i < m => from_usize(m - 1 + i),
                        _ => top.clone(),
                    })
                    .collect(),
            )?;
            let market = Market::new(
                m,
                vec![v1, SymmetricValuation::unit_demand(m, int(2)), SymmetricValuation::additive(m, int(1))],
            )?;
            let levels = [rat(1, 2), int(1), rat(3, 2), int(2), rat(5, 2), mm.clone()];
            NamedInstance::simple(
                id,
                vec![("m", m.to_string())],
                market,
                vec![Subadditive, Submodular, Additive],
                top.clone(),
                (&mm + int(2)) / top,
                BoundKind::UniformStatic,
                uniform_regions(m, &levels),
            )
        }
        InstanceId::Subadd34Identical => {
            let m = params.m.unwrap_or(10);
            if m < 10 || m % 2 == 1 {
                return Err(bad("subadd_34_identical", "m must be even and at least 10"));
            }
            let mm = from_usize(m);
            let eps = params.epsilon.clone().unwrap_or_else(|| Rational::new(BigInt::one(), BigInt::from(m * m)));
            if !eps.is_positive() || eps > rat(1, 4) {
                return Err(bad("subadd_34_identical", "0 < eps <= 1/4"));
            }
            let half = m / 2;
            let v = SymmetricValuation::new(
                (0..=m)
                    .map(|i| match i {
                        0 => int(0),
                        i if i < half => &mm / int(4),
                        i if i == half => &mm / int(2) - int(1) - &eps,
                        _ => &mm / int(2),
                    })
                    .collect(),
            )?;
            let market = Market::new(m, vec![v.clone(), v])?;
            let opt = &mm - int(2) - int(2) * &eps;
            let levels = [int(0), rat(1, 2), int(1), int(1) + &eps, int(2), &mm / int(4)];
            NamedInstance::simple(
                id,
                vec![("m", m.to_string()), ("eps", format_rational(&eps))],
                market,
                vec![Subadditive; 2],
                opt.clone(),
                int(3) * &mm / (int(4) * opt),
                BoundKind::AllStatic,
                multiset_regions(m, &levels),
            )
        }
        InstanceId::Subadd23Identical => {
            let m = params.m.unwrap_or(6);
            if m < 1 {
                return Err(bad("subadd_23_identical", "m >= 1"));
            }
            let mm = from_usize(m);
            let v = SymmetricValuation::new((0..=m).map(|i| if i == 0 { int(0) } else { from_usize(m + i) }).collect())?;
            let market = Market::new(m, vec![v.clone(), v])?;
            let levels = [int(0), rat(1, 2), int(1), rat(3, 2), mm.clone(), &mm + int(1), &mm + int(2)];
            NamedInstance::simple(
                id,
                vec![("m", m.to_string())],
                market,
                vec![Subadditive; 2],
                int(3) * &mm,
                (int(2) * &mm + int(2)) / (int(3) * &mm),
                BoundKind::UniformStatic,
                uniform_regions(m, &levels),
            )
        }
        InstanceId::General1m => {
            let m = params.m.unwrap_or(5);
            if m < 1 {
                return Err(bad("general_1m", "m >= 1"));
            }
            let mm = from_usize(m);
            let market = Market::new(
                m,
                vec![SymmetricValuation::unit_demand(m, int(1)), SymmetricValuation::single_minded(m, mm.clone())],
            )?;
            NamedInstance::simple(
                id,
                vec![("m", m.to_string())],
                market,
                vec![Submodular, General],
                mm.clone(),
                int(1) / mm,
                BoundKind::FixedOrder,
                multiset_regions(m, &[rat(1, 2), int(1), rat(3, 2)]),
            )
        }
        InstanceId::GeneralBestOrder => {
            let m = params.m.unwrap_or(10);
            if m < 4 || m % 2 == 1 {
                return Err(bad("general_best_order", "m must be even and at least 4"));
            }
            let mm = from_usize(m);
            let eps = params.epsilon.clone().unwrap_or_else(|| Rational::new(BigInt::one(), BigInt::from(m * m)));
            if !eps.is_positive() || eps > rat(1, 2) {
                return Err(bad("general_best_order", "0 < eps <= 1/2"));
            }
            let half = m / 2;
            let v = SymmetricValuation::new(
                (0..=m)
                    .map(|i| match i {
                        i if i < half => int(0),
                        i if i == half => &mm / int(2) - &eps,
                        _ => &mm / int(2) + int(1),
                    })
                    .collect(),
            )?;
            let market = Market::new(m, vec![v.clone(), v])?;
            let opt = &mm - int(2) * &eps;
            let levels = [int(0), rat(1, 2), int(1) - &eps, int(1), int(1) + &eps, &mm / int(2)];
            NamedInstance::simple(
                id,
                vec![("m", m.to_string()), ("eps", format_rational(&eps))],
                market,
                vec![General; 2],
                opt.clone(),
                (&mm / int(2) + int(1)) / opt,
                BoundKind::BestOrder,
                multiset_regions(m, &levels),
            )
        }
        InstanceId::BayesLower => {
            let n = params.n.unwrap_or(3);
            if !(2..=10).contains(&n) {
                return Err(bad("bayes_lower", "2 <= n <= 10"));
            }
            let m = n * n;
            let (nn, mm) = (from_usize(n), from_usize(m));
            let dist = bayesian::unit_or_grand_bundle(n);
            // OPT is m when some agent wants the bundle, else n.
            let none = (int(1) - int(1) / &nn).pow(n as i32);
            let opt = &mm * (int(1) - &none) + &nn * &none;
            let levels = [rat(1, 2), int(1), int(2), mm.clone()];
            let mut grid = uniform_regions(m, &levels);
            grid.push(Region {
                label: format!("1/2x1 {}x{}", m + 1, m - 1),
                prices: PriceVector::two_level(1, rat(1, 2), m - 1, &mm + int(1)),
            });
            NamedInstance {
                id,
                params: vec![("n", n.to_string())],
                market: None,
                distribution: Some(dist),
                agent_classes: vec![],
                opt,
                bound: int(1) - int(1) / euler_e(),
                bound_kind: BoundKind::Bayesian,
                tolerance: None,
                grid,
            }
        }
        InstanceId::EnvelopeTightXos => {
            let l = params.l.unwrap_or(39);
            if !(2..=60).contains(&l) {
                return Err(bad("envelope_tight_xos", "2 <= l <= 60"));
            }
            let m = l * l;
            let ll = from_usize(l);
            let v = SymmetricValuation::new(
                (0..=m)
                    .map(|i| match i {
                        0 => int(0),
                        i if i <= l => int(1),
                        i => from_usize(i) / &ll,
                    })
                    .collect(),
            )?;
            let market = Market::new(m, vec![v])?;
            NamedInstance::simple(
                id,
                vec![("l", l.to_string())],
                market,
                vec![Xos],
                ll.clone(),
                int(1) + (&ll - int(1)) / (&ll + int(1)),
                BoundKind::Envelope,
                vec![],
            )
        }
        InstanceId::EnvelopeTightSubadd => {
            let l = params.l.unwrap_or(20);
            if l < 1 {
                return Err(bad("envelope_tight_subadd", "l >= 1"));
            }
            let m = l + 1;
            let v = SymmetricValuation::new((0..=m).map(|i| int(if i == 0 { 0 } else if i <= l { 1 } else { 2 })).collect())?;
            let market = Market::new(m, vec![v])?;
            let ll = from_usize(l);
            NamedInstance::simple(
                id,
                vec![("l", l.to_string())],
                market,
                vec![Subadditive],
                int(2),
                int(2) * &ll / (&ll + int(1)),
                BoundKind::Envelope,
                vec![],
            )
        }
    })
}

fn submod_0802(m: usize) -> Result<NamedInstance, InstanceError> {
    if !(2..=200).contains(&m) {
        return Err(bad("submod_0802", "2 <= m <= 200"));
    }
    let beta = beta_0802();
    let alpha = int(1) / ((&beta - int(1)) * (&beta - int(1)));
    let heavy = floor(&(&alpha * from_usize(m)));
    let mut agents = vec![SymmetricValuation::unit_demand(m, int(1)); m];
    agents.extend(std::iter::repeat_n(SymmetricValuation::unit_demand(m, beta.clone()), heavy));
    let market = Market::new(m, agents)?;
    let opt = from_usize(heavy) * &beta + from_usize(m - heavy.min(m));
    let cheap = [int(0), rat(1, 2), int(1)];
    let dear = [(int(1) + &beta) / int(2), beta.clone(), &beta + int(1)];
    let dear_names = ["(1+beta)/2", "beta", "beta+1"];
    let mut grid = Vec::new();
    for c in 0..=m {
        for low in &cheap {
            if c == m && !low.is_zero() {
                continue;
            }
            for (high, name) in dear.iter().zip(dear_names) {
                if c == 0 && name != "beta" {
                    continue;
                }
                grid.push(Region {
                    label: format!("{}x{} {}x{}", format_rational(low), m - c, name, c),
                    prices: PriceVector::two_level(m - c, low.clone(), c, high.clone()),
                });
            }
        }
    }
    Ok(NamedInstance {
        id: InstanceId::Submod0802,
        params: vec![("m", m.to_string())],
        market: Some(market),
        distribution: None,
        agent_classes: vec![ValuationClass::Submodular; m + heavy],
        opt,
        bound: int(1) - int(1) / (&beta * &beta),
        bound_kind: BoundKind::AllStatic,
        tolerance: Some(1e-3),
        grid,
    })
}

fn xos_static_1e(m: usize) -> Result<NamedInstance, InstanceError> {
    if !(3..=5000).contains(&m) {
        return Err(bad("xos_static_1e", "3 <= m <= 5000"));
    }
    let e = euler_e();
    let k = floor(&(from_usize(m) / &e));
    let v1 = SymmetricValuation::new(
        (0..=m)
            .map(|i| match i {
                0 => int(0),
                i if i < k => from_usize(k),
                i => from_usize(i),
            })
            .collect(),
    )?;
    let marginals: Vec<Rational> = (0..m)
        .map(|j| {
            if j < m - k {
                Rational::new(BigInt::from(m - k - j), BigInt::from(m - 1 - j))
            } else {
                int(0)
            }
        })
        .collect();
    let v2 = SymmetricValuation::from_marginals(&marginals)?;
    let mm = from_usize(m);
    let mut grid = uniform_regions(m, &[int(0), rat(1, 2), marginals[0].clone(), int(1), from_usize(k)]);
    let mut ladder = marginals.clone();
    ladder.sort();
    grid.push(Region { label: "v2 marginals".into(), prices: PriceVector::new(ladder)? });
    grid.push(Region {
        label: format!("1/2x{} 1x{}", m - k, k),
        prices: PriceVector::two_level(m - k, rat(1, 2), k, int(1)),
    });
    Ok(NamedInstance {
        id: InstanceId::XosStatic1e,
        params: vec![("m", m.to_string()), ("k", k.to_string())],
        market: Some(Market::new(m, vec![v1, v2])?),
        distribution: None,
        agent_classes: vec![ValuationClass::Xos, ValuationClass::Submodular],
        opt: mm,
        bound: int(1) - int(1) / e,
        bound_kind: BoundKind::AllStatic,
        tolerance: Some(1e-3),
        grid,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionResult {
    pub label: String,
    /// Worst-case welfare, best-order welfare, first-round upper bound or
    /// expected welfare, depending on the bound kind.
    #[serde(with = "rational::serde_str")]
    pub welfare: Rational,
    #[serde(with = "rational::serde_str")]
    pub limit: Rational,
    pub ratio: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub label: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub id: InstanceId,
    pub kind: BoundKind,
    #[serde(with = "rational::serde_str")]
    pub opt: Rational,
    #[serde(with = "rational::serde_str")]
    pub bound: Rational,
    pub tolerance: Option<f64>,
    pub checks: Vec<Check>,
    pub regions: Vec<RegionResult>,
    /// Largest welfare-to-OPT ratio over the grid.
    pub max_ratio: f64,
    pub pass: bool,
}

impl BoundReport {
    pub fn failures(&self) -> impl Iterator<Item = String> + '_ {
        self.checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| format!("{}: {}", c.label, c.detail))
            .chain(self.regions.iter().filter(|r| !r.pass).map(|r| format!("region {}", r.label)))
    }
}

fn ratio(welfare: &Rational, opt: &Rational) -> f64 {
    if opt.is_zero() {
        0.0
    } else {
        to_f64(&(welfare / opt))
    }
}

/// Upper bound on what any dynamic continuation achieves once the adversary
/// picks the first agent and her tie: that agent's value plus OPT of the
/// rest on the remaining items.
pub fn dynamic_first_round_bound(market: &Market, prices: &PriceVector) -> Result<Rational, InstanceError> {
    let m = market.m();
    let mut best: Option<Rational> = None;
    for first in 0..market.n() {
        let v = market.agent(first);
        for k in best_response(v, prices.prices(), TieMode::All) {
            let rest = market
                .agents()
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != first)
                .map(|(_, w)| SymmetricValuation::new(w.values()[..=m - k].to_vec()))
                .collect::<Result<Vec<_>, _>>()?;
            let value = v.value(k) + optimal_welfare(&Market::new(m - k, rest)?).0;
            if best.as_ref().is_none_or(|b| value < *b) {
                best = Some(value);
            }
        }
    }
    Ok(best.unwrap_or_else(Rational::zero))
}

/// Runs the instance's claims: agent classes, OPT formula, and the bound on
/// every grid region (or the closeness factor for envelope instances).
pub fn verify_bound(inst: &NamedInstance, limits: SearchLimits) -> Result<BoundReport, InstanceError> {
    let mut checks = Vec::new();
    if let Some(market) = &inst.market {
        let wrong: Vec<usize> = market
            .agents()
            .iter()
            .zip(&inst.agent_classes)
            .enumerate()
            .filter(|(_, (v, &c))| !v.is_in_class(c))
            .map(|(i, _)| i)
            .collect();
        checks.push(Check {
            label: "agent classes".into(),
            pass: wrong.is_empty() && inst.agent_classes.len() == market.n(),
            detail: if wrong.is_empty() { "ok".into() } else { format!("agents {wrong:?} outside their class") },
        });
        let (opt, _) = optimal_welfare(market);
        checks.push(Check {
            label: "opt formula".into(),
            pass: opt == inst.opt,
            detail: format!("computed {}, claimed {}", format_rational(&opt), format_rational(&inst.opt)),
        });
    }
    let mut regions = Vec::new();
    match inst.bound_kind {
        BoundKind::Envelope => {
            let market = inst.market.as_ref().expect("envelope instances carry a market");
            let v = market.agent(0);
            let envelope = if inst.agent_classes[0] == ValuationClass::Xos {
                v.minimal_submodular_envelope()
            } else {
                v.minimal_xos_envelope()
            };
            let factor = closeness_factor(v, &envelope)?;
            checks.push(Check {
                label: "closeness".into(),
                pass: factor >= inst.bound,
                detail: format!("factor {:.6} >= claimed {:.6}", to_f64(&factor), to_f64(&inst.bound)),
            });
            checks.push(Check {
                label: "closeness above 1.9".into(),
                pass: factor > rat(19, 10),
                detail: format!("{:.6}", to_f64(&factor)),
            });
        }
        BoundKind::Bayesian => {
            let dist = inst.distribution.as_ref().expect("Bayesian instances carry a distribution");
            regions = verify_bayes_lower(inst, dist, &mut checks)?;
        }
        kind => {
            let market = inst.market.as_ref().expect("static instances carry a market");
            let limit = &inst.bound * &inst.opt;
            regions = inst
                .grid
                .par_iter()
                .map(|region| {
                    let welfare = match kind {
                        BoundKind::Dynamic => dynamic_first_round_bound(market, &region.prices)?,
                        BoundKind::BestOrder => simulator::best_case_welfare_with(market, &region.prices, limits)?.welfare,
                        BoundKind::FixedOrder => {
                            let order: Vec<usize> = (0..market.n()).collect();
                            simulator::worst_case_fixed_order(market, &region.prices, &order)?.welfare
                        }
                        _ => simulator::worst_case_welfare_with(market, &region.prices, limits)?.welfare,
                    };
                    let r = ratio(&welfare, &inst.opt);
                    let pass = match inst.tolerance {
                        Some(tol) => r <= to_f64(&inst.bound) + tol,
                        None => welfare <= limit,
                    };
                    Ok(RegionResult { label: region.label.clone(), welfare, limit: limit.clone(), ratio: r, pass })
                })
                .collect::<Result<Vec<_>, InstanceError>>()?;
        }
    }
    let max_ratio = regions.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let pass = checks.iter().all(|c| c.pass) && regions.iter().all(|r| r.pass);
    Ok(BoundReport {
        id: inst.id,
        kind: inst.bound_kind,
        opt: inst.opt.clone(),
        bound: inst.bound.clone(),
        tolerance: inst.tolerance,
        checks,
        regions,
        max_ratio,
        pass,
    })
}

/// The order is fixed before valuations are drawn (agents are ex-ante
/// identical, so every fixed order has the same expectation).
fn verify_bayes_lower(
    inst: &NamedInstance,
    dist: &ValuationDistribution,
    checks: &mut Vec<Check>,
) -> Result<Vec<RegionResult>, InstanceError> {
    let (n, m) = (dist.n(), dist.m());
    let profiles = dist.profiles(1 << 12)?;
    let opt: Rational = profiles.iter().map(|(p, market)| p * optimal_welfare(market).0).sum();
    checks.push(Check {
        label: "expected opt formula".into(),
        pass: opt == inst.opt,
        detail: format!("computed {}, claimed {}", format_rational(&opt), format_rational(&inst.opt)),
    });
    let floor_opt = &inst.bound * from_usize(m);
    checks.push(Check {
        label: "expected opt >= (1-1/e) m".into(),
        pass: opt >= floor_opt,
        detail: format!("{:.4} >= {:.4}", to_f64(&opt), to_f64(&floor_opt)),
    });
    let nn = from_usize(n);
    let order: Vec<usize> = (0..n).collect();
    inst.grid
        .par_iter()
        .map(|region| {
            let mut welfare = Rational::zero();
            for (p, market) in &profiles {
                welfare += p * simulator::worst_case_fixed_order(market, &region.prices, &order)?.welfare;
            }
            let limit = if region.prices.prices().iter().all(|p| *p >= int(1)) {
                nn.clone()
            } else {
                (int(1) - int(1) / &nn) * &nn + from_usize(m) / &nn
            };
            Ok(RegionResult {
                label: region.label.clone(),
                ratio: ratio(&welfare, &opt),
                pass: welfare <= limit,
                welfare,
                limit,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gen(id: InstanceId) -> NamedInstance {
        generate(id, &InstanceParams::default()).unwrap()
    }

    #[test]
    fn ids_round_trip() {
        for id in InstanceId::ALL {
            assert_eq!(id.as_str().parse::<InstanceId>().unwrap(), id);
        }
        assert!(matches!("nope".parse::<InstanceId>(), Err(InstanceError::UnknownId(_))));
    }

    #[test]
    fn submod_2item_matches_cases() {
        let inst = gen(InstanceId::Submod2item);
        assert_eq!(inst.opt, int(3));
        let report = verify_bound(&inst, SearchLimits::default()).unwrap();
        assert!(report.pass, "{:?}", report.failures().collect::<Vec<_>>());
        assert_eq!(report.regions.len(), 15);
        assert!(report.regions.iter().all(|r| r.welfare <= int(2)));
    }

    #[test]
    fn general_1m_defaults() {
        let inst = gen(InstanceId::General1m);
        assert_eq!(inst.opt, int(5));
        assert_eq!(inst.bound, rat(1, 5));
        let report = verify_bound(&inst, SearchLimits::default()).unwrap();
        assert!(report.pass);
        assert!(report.regions.iter().all(|r| r.welfare <= int(1)));
    }

    #[test]
    fn subadd_23_identical_opt() {
        let inst = gen(InstanceId::Subadd23Identical);
        assert_eq!(inst.opt, int(18));
        assert!(verify_bound(&inst, SearchLimits::default()).unwrap().pass);
    }

    #[test]
    fn dynamic_first_round() {
        let inst = gen(InstanceId::XosDynamic56);
        let market = inst.market.as_ref().unwrap();
        // All prices above 1: v1 first buys one item, the other agent then gets 1.
        let bound = dynamic_first_round_bound(market, &PriceVector::uniform(3, int(2))).unwrap();
        assert_eq!(bound, int(5));
        assert!(verify_bound(&inst, SearchLimits::default()).unwrap().pass);
    }

    #[test]
    fn beta_is_bracketed() {
        let beta = beta_0802();
        assert!((to_f64(&beta) - 2.24698).abs() < 1e-5);
        let inst = gen(InstanceId::Submod0802);
        assert!(verify_bound(&inst, SearchLimits::default()).unwrap().pass);
    }

    #[test]
    fn envelopes_exceed_threshold() {
        for id in [InstanceId::EnvelopeTightSubadd, InstanceId::EnvelopeTightXos] {
            let report = verify_bound(&gen(id), SearchLimits::default()).unwrap();
            assert!(report.pass, "{id}: {:?}", report.failures().collect::<Vec<_>>());
        }
    }

    #[test]
    fn bayes_lower_inequalities() {
        let report = verify_bound(&gen(InstanceId::BayesLower), SearchLimits::default()).unwrap();
        assert!(report.pass, "{:?}", report.failures().collect::<Vec<_>>());
    }

    #[test]
    fn params_are_validated() {
        let odd = InstanceParams { m: Some(11), ..Default::default() };
        assert!(matches!(generate(InstanceId::Subadd34Identical, &odd), Err(InstanceError::BadParams { .. })));
        let tiny = InstanceParams { m: Some(1), ..Default::default() };
        assert!(generate(InstanceId::SubaddHalf, &tiny).is_err());
    }
}
