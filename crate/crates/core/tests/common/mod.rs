//! Brute-force reference implementations, written without the library's
//! search code. Only data types are shared.
#![allow(dead_code)]

use multiunit::market::Market;
use multiunit::rational::Rational;
use multiunit::simulator::DynamicPolicy;
use num_traits::Zero;

pub fn r(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

pub fn value(market: &Market, agent: usize, k: usize) -> Rational {
    market.agent(agent).values()[k].clone()
}

/// Max welfare over every vector of quantities with total at most m.
pub fn brute_opt(market: &Market) -> Rational {
    fn go(market: &Market, agent: usize, left: usize) -> Rational {
        if agent == market.n() {
            return Rational::zero();
        }
        (0..=left)
            .map(|q| value(market, agent, q) + go(market, agent + 1, left - q))
            .max()
            .expect("q = 0 always exists")
    }
    go(market, 0, market.m())
}

/// Quantities maximizing v(k) minus the k cheapest remaining prices.
pub fn argmax_cheapest(market: &Market, agent: usize, remaining: &[Rational]) -> Vec<usize> {
    let mut sorted = remaining.to_vec();
    sorted.sort();
    let mut utilities = Vec::new();
    let mut paid = Rational::zero();
    for k in 0..=sorted.len() {
        if k > 0 {
            paid += &sorted[k - 1];
        }
        utilities.push(value(market, agent, k) - &paid);
    }
    let best = utilities.iter().max().expect("k = 0").clone();
    (0..utilities.len()).filter(|&k| utilities[k] == best).collect()
}

/// Utility-maximizing item subsets by enumerating all 2^|remaining| subsets.
/// Returns the argmax sizes and the set of paid totals among maximizers.
pub fn argmax_subsets(market: &Market, agent: usize, remaining: &[Rational]) -> (Vec<usize>, Vec<Rational>) {
    let len = remaining.len();
    let mut best: Option<Rational> = None;
    let mut sizes = Vec::new();
    let mut totals = Vec::new();
    for mask in 0u32..(1 << len) {
        let k = mask.count_ones() as usize;
        let paid: Rational = (0..len).filter(|i| mask >> i & 1 == 1).map(|i| remaining[i].clone()).sum();
        let u = value(market, agent, k) - &paid;
        match &best {
            Some(b) if u < *b => continue,
            Some(b) if u == *b => {}
            _ => {
                best = Some(u);
                sizes.clear();
                totals.clear();
            }
        }
        if !sizes.contains(&k) {
            sizes.push(k);
        }
        if !totals.contains(&paid) {
            totals.push(paid);
        }
    }
    sizes.sort();
    (sizes, totals)
}

fn remove_cheapest(remaining: &[Rational], k: usize) -> Vec<Rational> {
    let mut sorted = remaining.to_vec();
    sorted.sort();
    sorted.split_off(k)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Welfare of every tie branch along a fixed order.
pub fn branch_welfares(market: &Market, prices: &[Rational], order: &[usize]) -> Vec<Rational> {
    fn go(market: &Market, remaining: &[Rational], order: &[usize], acc: Rational, out: &mut Vec<Rational>) {
        let Some((&agent, rest)) = order.split_first() else {
            out.push(acc);
            return;
        };
        for k in argmax_cheapest(market, agent, remaining) {
            go(market, &remove_cheapest(remaining, k), rest, &acc + value(market, agent, k), out);
        }
    }
    let mut out = Vec::new();
    go(market, prices, order, Rational::zero(), &mut out);
    out
}

/// Minimum welfare over all n! orders and every tie branch.
pub fn brute_worst(market: &Market, prices: &[Rational]) -> Rational {
    permutations(market.n())
        .iter()
        .flat_map(|order| branch_welfares(market, prices, order))
        .min()
        .expect("at least one branch")
}

/// Minimum over tie branches for one order.
pub fn brute_worst_order(market: &Market, prices: &[Rational], order: &[usize]) -> Rational {
    branch_welfares(market, prices, order).into_iter().min().expect("at least one branch")
}

/// Max over orders of the adversarial-tie welfare.
pub fn brute_best_order(market: &Market, prices: &[Rational]) -> Rational {
    permutations(market.n())
        .iter()
        .map(|order| brute_worst_order(market, prices, order))
        .max()
        .expect("at least one order")
}

/// Worst case when `policy` re-posts prices before every arrival; plain
/// recursion over who arrives next and which argmax quantity they take.
pub fn brute_worst_dynamic<P: DynamicPolicy + ?Sized>(market: &Market, policy: &P) -> Rational {
    fn go<P: DynamicPolicy + ?Sized>(market: &Market, policy: &P, left: &[usize], items: usize) -> Rational {
        if left.is_empty() || items == 0 {
            return Rational::zero();
        }
        let prices = policy.prices(left, items).expect("policy defined").prices().to_vec();
        let mut worst: Option<Rational> = None;
        for (pos, &agent) in left.iter().enumerate() {
            let mut rest = left.to_vec();
            rest.remove(pos);
            for k in argmax_cheapest(market, agent, &prices) {
                let w = value(market, agent, k) + go(market, policy, &rest, items - k);
                if worst.as_ref().is_none_or(|x| w < *x) {
                    worst = Some(w);
                }
            }
        }
        worst.expect("non-empty")
    }
    let all: Vec<usize> = (0..market.n()).collect();
    go(market, policy, &all, market.m())
}

/// Marginals of every agent, sorted non-increasing.
pub fn all_marginals(market: &Market) -> Vec<Rational> {
    let mut out: Vec<Rational> = (0..market.n())
        .flat_map(|a| (1..=market.m()).map(move |k| value(market, a, k) - value(market, a, k - 1)))
        .collect();
    out.sort_by(|a, b| b.cmp(a));
    out
}

/// Least concave majorant of the points (i, v(i)); upper hull by monotone chain.
pub fn concave_majorant(v: &[Rational]) -> Vec<Rational> {
    let mut hull: Vec<usize> = Vec::new();
    for i in 0..v.len() {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // Drop b if it lies on or below the chord a..i.
            let lhs = (&v[b] - &v[a]) * Rational::from_integer(((i - a) as i64).into());
            let rhs = (&v[i] - &v[a]) * Rational::from_integer(((b - a) as i64).into());
            if lhs <= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    let mut out = vec![Rational::zero(); v.len()];
    for w in hull.windows(2) {
        let (a, b) = (w[0], w[1]);
        for (i, slot) in out.iter_mut().enumerate().take(b + 1).skip(a) {
            let t = Rational::new(((i - a) as i64).into(), ((b - a) as i64).into());
            *slot = &v[a] + (&v[b] - &v[a]) * t;
        }
    }
    if hull.len() == 1 {
        out[0] = v[0].clone();
    }
    out
}

/// Smallest symmetric XOS function above v: for each size k, spread v(k)
/// evenly over a k-bundle and take the best clause.
pub fn xos_envelope(v: &[Rational]) -> Vec<Rational> {
    (0..v.len())
        .map(|i| {
            (1..v.len())
                .map(|k| &v[k] * Rational::new((i.min(k) as i64).into(), (k as i64).into()))
                .max()
                .unwrap_or_else(Rational::zero)
        })
        .collect()
}

/// max_i upper(i)/v(i) over i with v(i) > 0.
pub fn ratio(v: &[Rational], upper: &[Rational]) -> Rational {
    v.iter()
        .zip(upper)
        .filter(|(a, _)| !a.is_zero())
        .map(|(a, b)| b / a)
        .max()
        .unwrap_or_else(|| Rational::from_integer(1.into()))
}
