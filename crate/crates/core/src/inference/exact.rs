//! Finite-sample p-values by full enumeration of outcome tuples.
//!
//! Every tuple of per-edge win counts is scored once. Sorting tuples by
//! statistic (descending) turns each rejection region `{T > t}` into a
//! prefix of that order, so the p-value is the supremum over the null
//! polytope of the probability mass of a prefix:
//!
//! `pi_t = sup_{p in P0} sum_{tuples with T > t} prod_e C(n_e, i_e) p_e^i_e (1 - p_e)^(n_e - i_e)`.
//!
//! The supremum is searched by projected gradient ascent from many starts
//! (polytope vertices, constant directed points, random feasible points).
//! Global optimality is not certified; the value is a lower bound on the
//! true supremum and `converged` reports whether the best start stopped at
//! a stationary point.

use std::collections::HashMap;
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ident::ConstraintSystem;
use crate::inference::mle::{inequalities, restricted_mle, test_statistic};
use crate::projection::{project, Inequality};

/// Which side of the observed statistic forms the rejection region.
///
/// `Strict` is `{T > t}`. `Inclusive` is `{T >= t}`, the usual p-value
/// convention for discrete statistics: it keeps the observed outcome in its
/// own tail, which makes the finite-sample test valid and gives p-value 1
/// whenever the estimate already satisfies the null (`t = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    Strict,
    #[default]
    Inclusive,
}

impl Tail {
    /// Whether `stat` lies in the tail of `t`. A relative slack of 1e-9
    /// absorbs rounding between equal statistics computed in different
    /// order.
    pub fn contains(self, stat: f64, t: f64) -> bool {
        let slack = 1e-9 * t.abs().max(1.0);
        match self {
            Tail::Strict => stat > t + slack,
            Tail::Inclusive => stat >= t - slack,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactOptions {
    /// Largest number of outcome tuples that may be enumerated.
    pub budget: u64,
    pub random_starts: usize,
    pub max_iter: usize,
    /// Stop a start when an accepted step improves by less than this.
    pub tol: f64,
    /// Seed of the random starting points.
    pub seed: u64,
    /// Enumerate polytope vertices as starts when at most this many
    /// candidate bases exist.
    pub vertex_limit: usize,
}

impl Default for ExactOptions {
    fn default() -> Self {
        Self {
            budget: 10_000_000,
            random_starts: 32,
            max_iter: 500,
            tol: 1e-13,
            seed: 0x5eed,
            vertex_limit: 5_000,
        }
    }
}

/// Result of the supremum search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteSamplePValue {
    pub p_value: f64,
    /// Canonical per-edge probabilities at which the supremum was found.
    pub argmax: Vec<f64>,
    pub converged: bool,
    /// Number of outcome tuples in the rejection region.
    pub region_size: usize,
    pub tuples: usize,
}

/// The exact null distribution of the statistic for one design (game
/// counts) and one tested ranking.
#[derive(Debug)]
pub struct ExactNullDistribution {
    games: Vec<u64>,
    constraints: ConstraintSystem,
    polytope: Vec<Inequality<f64>>,
    /// Statistic per tuple, indexed in mixed radix (edge 0 fastest).
    stat_by_index: Vec<f64>,
    /// Tuple win counts sorted by decreasing statistic, `edges` per tuple.
    sorted_wins: Vec<u16>,
    sorted_stats: Vec<f64>,
    options: ExactOptions,
    starts: Vec<Vec<f64>>,
    cache: Mutex<HashMap<usize, FiniteSamplePValue>>,
    critical: Mutex<HashMap<u64, usize>>,
}

pub(crate) fn tuple_count(games: &[u64]) -> u128 {
    games.iter().map(|&n| n as u128 + 1).product()
}

impl ExactNullDistribution {
    pub fn new(games: &[u64], constraints: &ConstraintSystem, options: ExactOptions) -> Result<Self> {
        let edges = games.len();
        if edges != constraints.edge_count() {
            return Err(Error::LengthMismatch { expected: constraints.edge_count(), got: edges });
        }
        if games.iter().any(|&n| n == 0 || n > u16::MAX as u64) {
            return Err(Error::InvalidArgument("game counts must lie in 1..=65535".into()));
        }
        let count = tuple_count(games);
        if count > options.budget as u128 {
            return Err(Error::CapExceeded {
                what: "outcome tuples",
                size: count,
                cap: options.budget as u128,
            });
        }
        let count = count as usize;
        let weights: Vec<f64> = games.iter().map(|&n| n as f64).collect();
        let stat_by_index = (0..count)
            .into_par_iter()
            .map(|idx| {
                let wins = decode(idx, games);
                let p_hat: Vec<f64> = wins.iter().zip(games).map(|(&w, &n)| w as f64 / n as f64).collect();
                let fit = restricted_mle(&p_hat, &weights, constraints)?;
                Ok(test_statistic(&p_hat, &fit.p_star, &weights))
            })
            .collect::<Result<Vec<f64>>>()?;

        let mut order: Vec<usize> = (0..count).collect();
        order.sort_by(|&a, &b| stat_by_index[b].total_cmp(&stat_by_index[a]).then(a.cmp(&b)));
        let mut sorted_wins = Vec::with_capacity(count * edges);
        for &idx in &order {
            sorted_wins.extend(decode(idx, games).into_iter().map(|w| w as u16));
        }
        let sorted_stats = order.iter().map(|&i| stat_by_index[i]).collect();

        let mut polytope: Vec<Inequality<f64>> = inequalities::<f64>(constraints).into_iter().map(|(_, r)| r).collect();
        for s in 0..edges {
            polytope.push(Inequality { terms: vec![(s, 1.0)], rhs: 1.0 });
            polytope.push(Inequality { terms: vec![(s, -1.0)], rhs: 0.0 });
        }
        let starts = starting_points(constraints, &polytope, &options)?;
        Ok(Self {
            games: games.to_vec(),
            constraints: constraints.clone(),
            polytope,
            stat_by_index,
            sorted_wins,
            sorted_stats,
            options,
            starts,
            cache: Mutex::new(HashMap::new()),
            critical: Mutex::new(HashMap::new()),
        })
    }

    pub fn tuples(&self) -> usize {
        self.sorted_stats.len()
    }

    pub fn constraints(&self) -> &ConstraintSystem {
        &self.constraints
    }

    pub fn games(&self) -> &[u64] {
        &self.games
    }

    /// Statistic of the tuple with the given canonical win counts.
    pub fn statistic_of(&self, wins: &[u64]) -> Result<f64> {
        if wins.len() != self.games.len() {
            return Err(Error::LengthMismatch { expected: self.games.len(), got: wins.len() });
        }
        let mut idx = 0usize;
        for (&w, &n) in wins.iter().zip(&self.games).rev() {
            if w > n {
                return Err(Error::InvalidArgument(format!("{w} wins out of {n} games")));
            }
            idx = idx * (n as usize + 1) + w as usize;
        }
        Ok(self.stat_by_index[idx])
    }

    /// Number of tuples in the tail of `t`.
    pub fn region_size(&self, t: f64, tail: Tail) -> usize {
        self.sorted_stats.partition_point(|&s| tail.contains(s, t))
    }

    /// `P_p(T in tail of t)` at a fixed canonical probability vector.
    pub fn region_probability(&self, t: f64, tail: Tail, p: &[f64]) -> f64 {
        self.prefix_mass(self.region_size(t, tail), p, false).0
    }

    /// Mass of the first `k` sorted tuples and optionally its gradient.
    fn prefix_mass(&self, k: usize, p: &[f64], gradient: bool) -> (f64, Vec<f64>) {
        let e = self.games.len();
        let tables: Vec<(Vec<f64>, Vec<f64>)> =
            self.games.iter().zip(p).map(|(&n, &pe)| binomial_tables(n, pe, gradient)).collect();
        let mut total = 0.0;
        let mut grad = vec![0.0; e];
        let mut prefix = vec![1.0; e + 1];
        for tuple in self.sorted_wins.chunks_exact(e).take(k) {
            for (j, &w) in tuple.iter().enumerate() {
                prefix[j + 1] = prefix[j] * tables[j].0[w as usize];
            }
            total += prefix[e];
            if gradient {
                let mut suffix = 1.0;
                for j in (0..e).rev() {
                    let w = tuple[j] as usize;
                    grad[j] += prefix[j] * tables[j].1[w] * suffix;
                    suffix *= tables[j].0[w];
                }
            }
        }
        (total, grad)
    }

    /// Finite-sample p-value of an observed statistic `t`: the supremum
    /// over the null polytope of the tail probability.
    pub fn pvalue(&self, t: f64, tail: Tail) -> FiniteSamplePValue {
        self.pvalue_for_region(self.region_size(t, tail))
    }

    fn pvalue_for_region(&self, k: usize) -> FiniteSamplePValue {
        if let Some(hit) = self.cache.lock().expect("cache lock").get(&k) {
            return hit.clone();
        }
        let tuples = self.tuples();
        let out = if k == 0 || k == tuples {
            FiniteSamplePValue {
                p_value: if k == 0 { 0.0 } else { 1.0 },
                argmax: vec![0.5; self.games.len()],
                converged: true,
                region_size: k,
                tuples,
            }
        } else {
            let (value, argmax, converged) = self.maximize(k, None);
            FiniteSamplePValue { p_value: value.min(1.0), argmax, converged, region_size: k, tuples }
        };
        self.cache.lock().expect("cache lock").insert(k, out.clone());
        out
    }

    /// Whether the finite-sample test rejects at level `alpha` when the
    /// observed statistic is `t`. Uses a cached critical region size found
    /// by bisection over the nested regions.
    pub fn rejects(&self, t: f64, tail: Tail, alpha: f64) -> bool {
        self.region_size(t, tail) <= self.critical_region_size(alpha)
    }

    /// Largest region size whose supremum mass stays at or below `alpha`.
    pub fn critical_region_size(&self, alpha: f64) -> usize {
        let key = alpha.to_bits();
        if let Some(&k) = self.critical.lock().expect("critical lock").get(&key) {
            return k;
        }
        // Candidate sizes are the region sizes realized by some statistic.
        let mut sizes: Vec<usize> = vec![0];
        for &s in &self.sorted_stats {
            sizes.push(self.region_size(s, Tail::Strict));
            sizes.push(self.region_size(s, Tail::Inclusive));
        }
        sizes.sort_unstable();
        sizes.dedup();
        // Find the last candidate with mass <= alpha; size 0 always passes.
        let (mut lo, mut hi) = (0usize, sizes.len());
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.mass_at_most(sizes[mid], alpha) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let k = sizes[lo];
        self.critical.lock().expect("critical lock").insert(key, k);
        k
    }

    fn mass_at_most(&self, k: usize, alpha: f64) -> bool {
        if k == 0 {
            return true;
        }
        if k == self.tuples() {
            return alpha >= 1.0;
        }
        if let Some(hit) = self.cache.lock().expect("cache lock").get(&k) {
            return hit.p_value <= alpha;
        }
        let (value, _, _) = self.maximize(k, Some(alpha));
        value <= alpha
    }

    /// Multi-start projected gradient ascent of the prefix mass. With
    /// `stop_above`, returns as soon as some start exceeds it.
    fn maximize(&self, k: usize, stop_above: Option<f64>) -> (f64, Vec<f64>, bool) {
        let mut best = (f64::NEG_INFINITY, vec![0.5; self.games.len()], false);
        for start in &self.starts {
            let (value, x, converged) = self.ascend(k, start.clone());
            if value > best.0 {
                best = (value, x, converged);
            }
            if stop_above.is_some_and(|a| best.0 > a) {
                break;
            }
        }
        best
    }

    fn ascend(&self, k: usize, mut x: Vec<f64>) -> (f64, Vec<f64>, bool) {
        let (mut f, mut g) = self.prefix_mass(k, &x, true);
        let mut step = 0.1;
        for _ in 0..self.options.max_iter {
            let gmax = g.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            if gmax == 0.0 {
                return (f, x, true);
            }
            let mut accepted = None;
            let mut s = step;
            while s > 1e-12 {
                let trial: Vec<f64> = x.iter().zip(&g).map(|(&xi, &gi)| xi + s * gi / gmax).collect();
                let Ok(proj) = project(&trial, &vec![1.0; x.len()], &self.polytope) else {
                    break;
                };
                let moved: f64 = proj.x.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                if moved < 1e-13 {
                    break;
                }
                let (fn_, gn) = self.prefix_mass(k, &proj.x, true);
                if fn_ > f {
                    accepted = Some((proj.x, fn_, gn));
                    break;
                }
                s *= 0.5;
            }
            let Some((xn, fn_, gn)) = accepted else {
                return (f, x, true);
            };
            let gain = fn_ - f;
            x = xn;
            f = fn_;
            g = gn;
            step = (2.0 * s).min(0.5);
            if gain <= self.options.tol * f.max(1e-300) {
                return (f, x, true);
            }
        }
        (f, x, false)
    }
}

/// Finite-sample p-value of `t` for the design `games` under the null of
/// `c`. Builds the enumeration; prefer [`ExactNullDistribution`] when the
/// same design is tested repeatedly.
pub fn pvalue_finite_sample(
    games: &[u64],
    c: &ConstraintSystem,
    t: f64,
    tail: Tail,
    options: &ExactOptions,
) -> Result<FiniteSamplePValue> {
    Ok(ExactNullDistribution::new(games, c, options.clone())?.pvalue(t, tail))
}

fn decode(mut idx: usize, games: &[u64]) -> Vec<u64> {
    games
        .iter()
        .map(|&n| {
            let base = n as usize + 1;
            let w = idx % base;
            idx /= base;
            w as u64
        })
        .collect()
}

/// Binomial pmf over `0..=n` at `p`, and optionally its derivative in `p`.
fn binomial_tables(n: u64, p: f64, derivative: bool) -> (Vec<f64>, Vec<f64>) {
    let n_i = n as i32;
    let q = 1.0 - p;
    let mut coef = 1.0_f64;
    let mut pmf = Vec::with_capacity(n as usize + 1);
    let mut dpmf = Vec::with_capacity(if derivative { n as usize + 1 } else { 0 });
    for j in 0..=n_i {
        if j > 0 {
            coef = coef * (n_i - j + 1) as f64 / j as f64;
        }
        pmf.push(coef * p.powi(j) * q.powi(n_i - j));
        if derivative {
            let up = if j > 0 { j as f64 * p.powi(j - 1) * q.powi(n_i - j) } else { 0.0 };
            let down = if j < n_i { (n_i - j) as f64 * p.powi(j) * q.powi(n_i - j - 1) } else { 0.0 };
            dpmf.push(coef * (up - down));
        }
    }
    (pmf, dpmf)
}

/// Starting points for the ascent: polytope vertices (when few enough
/// bases exist), constant directed values, and random feasible points.
fn starting_points(
    c: &ConstraintSystem,
    polytope: &[Inequality<f64>],
    opts: &ExactOptions,
) -> Result<Vec<Vec<f64>>> {
    let d = c.edge_count();
    let unit = vec![1.0; d];
    let mut raw: Vec<Vec<f64>> = Vec::new();
    raw.extend(vertices(polytope, d, opts.vertex_limit));
    // Every slot takes the value c along its first constrained orientation.
    let mut orientation = vec![true; d];
    for e in c.boundary().iter().rev() {
        orientation[e.slot] = e.forward;
    }
    for level in [0.5, 0.25, 0.0, 0.1, 0.18, 0.3, 0.4, 0.45] {
        raw.push(orientation.iter().map(|&f| if f { level } else { 1.0 - level }).collect());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.random_starts {
        raw.push((0..d).map(|_| rng.random::<f64>()).collect());
    }
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(raw.len());
    for x in raw {
        let p = project(&x, &unit, polytope)?.x;
        if !out.iter().any(|y| y.iter().zip(&p).all(|(a, b)| (a - b).abs() < 1e-9)) {
            out.push(p);
        }
    }
    Ok(out)
}

/// Vertices of `{x : rows}` in dimension `d` by solving every `d`-subset of
/// rows as equalities. Skipped (empty) when there are more than `limit`
/// subsets.
fn vertices(rows: &[Inequality<f64>], d: usize, limit: usize) -> Vec<Vec<f64>> {
    let m = rows.len();
    if d == 0 || d > m || binomial(m, d) > limit as u128 {
        return Vec::new();
    }
    let dense: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            let mut a = vec![0.0; d];
            for &(i, c) in &r.terms {
                a[i] += c;
            }
            a
        })
        .collect();
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut pick: Vec<usize> = (0..d).collect();
    loop {
        let a: Vec<Vec<f64>> = pick.iter().map(|&i| dense[i].clone()).collect();
        let b: Vec<f64> = pick.iter().map(|&i| rows[i].rhs).collect();
        if let Some(x) = solve_dense(a, b) {
            let feasible = rows.iter().all(|r| r.lhs(&x) <= r.rhs + 1e-10);
            if feasible && !out.iter().any(|y| y.iter().zip(&x).all(|(p, q)| (p - q).abs() < 1e-9)) {
                out.push(x);
            }
        }
        // Next combination in lexicographic order.
        let mut i = d;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if pick[i] < m - d + i {
                pick[i] += 1;
                for j in i + 1..d {
                    pick[j] = pick[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i as u128 + 1))
}

fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            let (top, rest) = a.split_at_mut(row);
            for (x, &y) in rest[0][col..].iter_mut().zip(&top[col][col..]) {
                *x -= f * y;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s = (row + 1..n).fold(b[row], |acc, c| acc - a[row][c] * x[c]);
        x[row] = s / a[row][row];
    }
    Some(x)
}
