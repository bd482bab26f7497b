//! Brute-force and quadrature oracles used to check the bounds.
//!
//! Nothing here calls into the bound computations of [`crate::inference`];
//! marginals and posteriors are summed directly from the mechanism's output
//! laws.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Open01, Poisson};
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{Continuous, Discrete};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::inference::DataModel;
use crate::measures::{is_zero, DensityFunction, FiniteMeasure};
use crate::mechanisms::{Mechanism, Outcome};
use crate::sampling;
use crate::universe::{DataUniverse, Dataset};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rule {
    Trapezoid,
    Midpoint,
}

/// Nodes and weights for integrating over an interval.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureGrid {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureGrid {
    /// `n` equal cells on `[a, b]`.
    pub fn new(a: f64, b: f64, n: usize, rule: Rule) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) || n == 0 {
            return Err(Error::InvalidInput("grid needs finite a < b and n >= 1".into()));
        }
        let h = (b - a) / n as f64;
        let (points, weights) = match rule {
            Rule::Trapezoid => (
                (0..=n).map(|i| a + i as f64 * h).collect(),
                (0..=n)
                    .map(|i| if i == 0 || i == n { h / 2.0 } else { h })
                    .collect(),
            ),
            Rule::Midpoint => (
                (0..n).map(|i| a + (i as f64 + 0.5) * h).collect(),
                vec![h; n],
            ),
        };
        Ok(QuadratureGrid { points, weights })
    }

    /// Cells of width close to `step` on `[a, b]`.
    pub fn with_step(a: f64, b: f64, step: f64, rule: Rule) -> Result<Self> {
        if !(step > 0.0) {
            return Err(Error::InvalidInput("step must be positive".into()));
        }
        Self::new(a, b, ((b - a) / step).round().max(1.0) as usize, rule)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    pub fn integrate_fn(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&x, w)| w * f(x)).sum()
    }
}

/// A most powerful randomized test.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestResult {
    pub size: f64,
    pub power: f64,
    /// Likelihood ratio at the rejection boundary.
    pub threshold: f64,
    /// Rejection probability on the boundary.
    pub randomization: f64,
    pub description: String,
}

/// Neyman-Pearson test of `p0` against `p1` at level `alpha`, randomized on
/// the boundary so the size is exactly `alpha`.
pub fn np_test(p0: &[f64], p1: &[f64], alpha: f64) -> Result<TestResult> {
    if p0.len() != p1.len() {
        return Err(Error::OutcomeMismatch);
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidInput(format!("alpha = {alpha} is not a probability")));
    }
    // Order by decreasing log likelihood ratio; p0 = 0 < p1 sorts first.
    let key = |i: usize| if p0[i] > 0.0 { p1[i].ln() - p0[i].ln() } else { f64::INFINITY };
    let mut idx: Vec<usize> = (0..p0.len()).filter(|&i| p0[i] > 0.0 || p1[i] > 0.0).collect();
    idx.sort_by(|&a, &b| key(b).total_cmp(&key(a)));
    let ratio = |i: usize| key(i).exp();
    let tied = |a: usize, b: usize| key(a) == key(b) || (key(a) - key(b)).abs() <= 1e-12;

    let (mut size, mut power) = (0.0, 0.0);
    let mut threshold = f64::INFINITY;
    let mut gamma = 1.0;
    let mut k = 0;
    while k < idx.len() {
        let mut j = k + 1;
        while j < idx.len() && tied(idx[k], idx[j]) {
            j += 1;
        }
        let (b0, b1): (f64, f64) = idx[k..j].iter().fold((0.0, 0.0), |(a, b), &i| (a + p0[i], b + p1[i]));
        threshold = ratio(idx[k]);
        if size + b0 <= alpha {
            size += b0;
            power += b1;
            gamma = 1.0;
            k = j;
            if size >= alpha {
                break;
            }
        } else {
            gamma = (alpha - size) / b0;
            size = alpha;
            power += gamma * b1;
            break;
        }
    }
    Ok(TestResult {
        size,
        power: power.min(1.0),
        threshold,
        randomization: gamma,
        description: format!(
            "reject when p1/p0 > {threshold}; reject with probability {gamma} when equal"
        ),
    })
}

/// `P(t | θ) = Σ_x P_θ(x) P_x(t)` for every output of a discrete mechanism.
pub fn exact_marginal(m: &Mechanism, theta: usize, model: &DataModel, u: &DataUniverse) -> Result<Vec<f64>> {
    let law = model.law(theta);
    let mut acc: Option<Vec<f64>> = None;
    for (x, w) in law.iter() {
        let px = m.distribution(u, x)?;
        let a = acc.get_or_insert_with(|| vec![0.0; px.len()]);
        for (s, &p) in a.iter_mut().zip(px.weights()) {
            *s += w * p;
        }
    }
    acc.ok_or_else(|| Error::EmptySupport("model law has no support".into()))
}

/// Power of the most powerful size-`alpha` test of `θ0` against `θ1` from a
/// single release of `m`.
pub fn exact_np_power(
    m: &Mechanism,
    theta0: usize,
    theta1: usize,
    model: &DataModel,
    u: &DataUniverse,
    alpha: f64,
) -> Result<TestResult> {
    if !m.is_discrete() {
        return Err(Error::Unsupported("exact NP power needs a discrete mechanism".into()));
    }
    let p0 = exact_marginal(m, theta0, model, u)?;
    let p1 = exact_marginal(m, theta1, model, u)?;
    np_test(&p0, &p1, alpha)
}

/// Most powerful test of `t ~ Lap(0, b)` against `t ~ Lap(s, b)`, `s >= 0`:
/// reject when `t > t0`.
pub fn laplace_np_power(b: f64, separation: f64, alpha: f64) -> Result<TestResult> {
    if !(b > 0.0 && b.is_finite()) || !(separation >= 0.0) || !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidInput("need b > 0, separation >= 0, alpha in [0, 1]".into()));
    }
    let null = DensityFunction::laplace(0.0, b)?;
    let alt = DensityFunction::laplace(separation, b)?;
    let t0 = if alpha == 0.0 { f64::INFINITY } else { null.quantile(1.0 - alpha) };
    let power = if t0 >= separation {
        // the likelihood ratio is constant at e^{s/b} beyond the alternative's location
        (alpha * (separation / b).exp()).min(1.0)
    } else {
        1.0 - alt.cdf(t0)
    };
    Ok(TestResult {
        size: alpha,
        power,
        threshold: t0,
        randomization: 0.0,
        description: format!("reject when t > {t0}"),
    })
}

/// Bayes' rule by exact summation over Θ and the universe.
pub fn exact_posterior(
    prior: &FiniteMeasure<String>,
    model: &DataModel,
    m: &Mechanism,
    u: &DataUniverse,
    t: Outcome,
) -> Result<FiniteMeasure<String>> {
    let mut post = Vec::with_capacity(prior.len());
    for (label, w) in prior.iter() {
        let th = model.theta_index(label)?;
        let mut lik = 0.0;
        for (x, px) in model.law(th).iter() {
            if px > 0.0 {
                lik += px * m.density(u, x, t)?;
            }
        }
        post.push(w * lik);
    }
    let z: f64 = post.iter().sum();
    if is_zero(z) {
        return Err(Error::UndefinedPosterior);
    }
    FiniteMeasure::new(prior.outcomes().to_vec(), post.iter().map(|p| p / z).collect())
}

/// Posterior density `π(θ) L(θ) / ∫ π L` at the points `at`, with the
/// normalising integral taken on `grid`.
pub fn posterior_density(
    prior: impl Fn(f64) -> f64,
    likelihood: impl Fn(f64) -> f64,
    grid: &QuadratureGrid,
    at: &[f64],
) -> Result<Vec<f64>> {
    let z = grid.integrate_fn(|th| prior(th) * likelihood(th));
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::UndefinedPosterior);
    }
    Ok(at.iter().map(|&th| prior(th) * likelihood(th) / z).collect())
}

/// θ ~ Gamma(shape α, rate β), x | θ ~ Poisson(θ), and the release
/// t | x ~ Lap(clamp(x, a0, a1), (a1 - a0)/ε).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PrivateCount {
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub a0: i64,
    pub a1: i64,
}

impl Default for PrivateCount {
    fn default() -> Self {
        PrivateCount {
            alpha: 3.0,
            beta: 1.0,
            epsilon: 1.0,
            a0: 0,
            a1: 6,
        }
    }
}

/// Smallest `k` with the Chernoff bound `e^{-θ}(eθ/k)^k` on `P(X >= k)`
/// below `tol` for `X ~ Poisson(θ)`.
pub fn poisson_chernoff_cutoff(theta: f64, tol: f64) -> u64 {
    let mut k = theta.ceil().max(1.0) as u64;
    loop {
        let kf = k as f64;
        let log_bound = if theta > 0.0 {
            -theta + kf * (1.0 + theta.ln() - kf.ln())
        } else {
            f64::NEG_INFINITY
        };
        if kf > theta && log_bound < tol.ln() {
            return k;
        }
        k += 1;
    }
}

impl PrivateCount {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.beta > 0.0) || self.a0 >= self.a1 || !(self.epsilon > 0.0) {
            return Err(Error::InvalidInput(
                "need alpha, beta, epsilon > 0 and a0 < a1".into(),
            ));
        }
        Ok(())
    }

    pub fn scale(&self) -> f64 {
        (self.a1 - self.a0) as f64 / self.epsilon
    }

    pub fn prior_density(&self, theta: f64) -> f64 {
        if theta <= 0.0 {
            return 0.0;
        }
        statrs::distribution::Gamma::new(self.alpha, self.beta)
            .map(|g| g.pdf(theta))
            .unwrap_or(f64::NAN)
    }

    fn release_density(&self, t: f64, x: u64) -> f64 {
        let loc = (x as f64).clamp(self.a0 as f64, self.a1 as f64);
        if self.epsilon.is_infinite() {
            return if t == loc { f64::INFINITY } else { 0.0 };
        }
        let b = self.scale();
        (-(t - loc).abs() / b).exp() / (2.0 * b)
    }

    /// `p(t | θ) = Σ_{x <= x_max} Pois(x; θ) Lap(t; clamp(x))`.
    pub fn likelihood(&self, theta: f64, t: f64, x_max: u64) -> f64 {
        (0..=x_max)
            .map(|x| poisson_pmf(theta, x) * self.release_density(t, x))
            .sum()
    }

    /// Truncation point for the sum over `x`, shared by every θ up to
    /// `theta_max`: twice the Chernoff cutoff for tail mass 1e-12.
    pub fn truncation(&self, theta_max: f64) -> u64 {
        2 * poisson_chernoff_cutoff(theta_max, 1e-12)
    }

    /// Posterior density of θ given the release `t`, at the grid points.
    pub fn posterior(&self, t: f64, grid: &QuadratureGrid) -> Result<Vec<f64>> {
        self.validate()?;
        let theta_max = grid.points().last().copied().unwrap_or(0.0);
        let x_max = self.truncation(theta_max);
        let lik: Vec<f64> = grid.points().iter().map(|&th| self.likelihood(th, t, x_max)).collect();
        let un: Vec<f64> = grid
            .points()
            .iter()
            .zip(&lik)
            .map(|(&th, l)| self.prior_density(th) * l)
            .collect();
        let z = grid.integrate(&un);
        if !(z > 0.0 && z.is_finite()) {
            return Err(Error::UndefinedPosterior);
        }
        Ok(un.iter().map(|v| v / z).collect())
    }

    /// One prior predictive draw of `t`; draw `k` depends only on `(seed, k)`.
    pub fn sample(&self, seed: u64, draw: u64) -> Result<f64> {
        self.validate()?;
        let mut rng = sampling::draw_rng(seed, None, draw);
        let theta: f64 = Gamma::new(self.alpha, 1.0 / self.beta)
            .map_err(|e| Error::InvalidInput(e.to_string()))?
            .sample(&mut rng);
        let x = if theta > 0.0 {
            Poisson::new(theta)
                .map_err(|e| Error::InvalidInput(e.to_string()))?
                .sample(&mut rng)
        } else {
            0.0
        };
        let loc = x.clamp(self.a0 as f64, self.a1 as f64);
        let v: f64 = rng.sample(Open01);
        Ok(DensityFunction::laplace(loc, self.scale())?.quantile(v))
    }
}

fn poisson_pmf(theta: f64, x: u64) -> f64 {
    if theta <= 0.0 {
        return if x == 0 { 1.0 } else { 0.0 };
    }
    match statrs::distribution::Poisson::new(theta) {
        Ok(p) => p.pmf(x),
        Err(_) => (x as f64 * theta.ln() - theta - ln_gamma(x as f64 + 1.0)).exp(),
    }
}

/// Prior predictive draw for the private count model.
pub fn prior_predictive_sample(
    alpha_g: f64,
    beta_g: f64,
    eps: f64,
    a0: i64,
    a1: i64,
    seed: u64,
) -> Result<f64> {
    PrivateCount {
        alpha: alpha_g,
        beta: beta_g,
        epsilon: eps,
        a0,
        a1,
    }
    .sample(seed, 0)
}

/// Posterior density on `grid` for the private count model.
pub fn gamma_poisson_laplace_posterior(
    alpha_g: f64,
    beta_g: f64,
    eps: f64,
    a0: i64,
    a1: i64,
    t: f64,
    grid: &QuadratureGrid,
) -> Result<Vec<f64>> {
    PrivateCount {
        alpha: alpha_g,
        beta: beta_g,
        epsilon: eps,
        a0,
        a1,
    }
    .posterior(t, grid)
}

/// Monte Carlo frequency with a 99% normal-approximation radius.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub radius: f64,
    pub hits: u64,
    pub draws: u64,
    pub seed: u64,
}

impl McEstimate {
    pub fn contains(&self, p: f64) -> bool {
        (self.estimate - p).abs() <= self.radius
    }
}

const Z99: f64 = 2.5758293035489004;
const SHARD: u64 = 4096;

/// Frequency of `event` among `n_draws` releases of `m` on `x`. Draws are
/// indexed, so the result does not depend on how shards are scheduled.
pub fn mc_probability(
    m: &Mechanism,
    u: &DataUniverse,
    x: &Dataset,
    event: impl Fn(Outcome) -> bool + Sync,
    n_draws: u64,
    seed: u64,
) -> Result<McEstimate> {
    if n_draws == 0 {
        return Err(Error::InvalidInput("need at least one draw".into()));
    }
    let shards = n_draws.div_ceil(SHARD);
    let hits = (0..shards)
        .into_par_iter()
        .map(|s| {
            let mut h = 0u64;
            for d in s * SHARD..((s + 1) * SHARD).min(n_draws) {
                if event(m.sample_draw(u, x, seed, d)?) {
                    h += 1;
                }
            }
            Ok(h)
        })
        .collect::<Result<Vec<u64>>>()?
        .into_iter()
        .sum::<u64>();
    let p = hits as f64 / n_draws as f64;
    Ok(McEstimate {
        estimate: p,
        radius: Z99 * (p * (1.0 - p) / n_draws as f64).sqrt(),
        hits,
        draws: n_draws,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::{LaplaceMechanism, RandomizedResponse};
    use std::f64::consts::E;

    #[test]
    fn grid_rules() {
        let t = QuadratureGrid::new(0.0, 1.0, 100, Rule::Trapezoid).unwrap();
        assert_eq!(t.len(), 101);
        assert!((t.integrate_fn(|x| x) - 0.5).abs() < 1e-15);
        let m = QuadratureGrid::new(0.0, 1.0, 100, Rule::Midpoint).unwrap();
        assert!((m.integrate_fn(|x| x * x) - 1.0 / 3.0).abs() < 1e-4);
        assert!(QuadratureGrid::new(1.0, 0.0, 3, Rule::Midpoint).is_err());
    }

    #[test]
    fn np_test_examples() {
        let p = [0.2, 0.3, 0.5];
        let r = np_test(&p, &p, 0.05).unwrap();
        assert!((r.power - 0.05).abs() < 1e-15 && (r.size - 0.05).abs() < 1e-15);

        // RR on one bit, point masses at 0 and 1: reject on output 1 only
        let q = 1.0 / (E + 1.0);
        let r = np_test(&[1.0 - q, q], &[q, 1.0 - q], q).unwrap();
        assert!((r.power - E / (E + 1.0)).abs() < 1e-15);

        let r = np_test(&[0.5, 0.5, 0.0], &[0.0, 0.5, 0.5], 0.1).unwrap();
        assert!((r.power - 0.6).abs() < 1e-15);
        assert!((r.size - 0.1).abs() < 1e-15);
    }

    #[test]
    fn np_power_monotone_in_alpha() {
        let p0 = [0.1, 0.2, 0.3, 0.4];
        let p1 = [0.4, 0.3, 0.2, 0.1];
        let mut last = 0.0;
        for k in 0..=100 {
            let a = k as f64 / 100.0;
            let r = np_test(&p0, &p1, a).unwrap();
            assert!((r.size - a).abs() < 1e-12);
            assert!(r.power >= last - 1e-15);
            last = r.power;
        }
        assert!((last - 1.0).abs() < 1e-12);
    }

    #[test]
    fn laplace_np_examples() {
        let r = laplace_np_power(5.0, 5.0, 0.05).unwrap();
        assert!((r.power - 0.05 * E).abs() < 1e-12);
        assert!(r.threshold >= 5.0);
        let r = laplace_np_power(1.0, 0.0, 0.05).unwrap();
        assert!((r.power - 0.05).abs() < 1e-15);
        // large separation: t0 below the alternative's location
        let r = laplace_np_power(1.0, 10.0, 0.05).unwrap();
        let t0 = -(0.1f64).ln();
        assert!((r.power - (1.0 - 0.5 * (-(10.0 - t0)).exp())).abs() < 1e-12);
    }

    #[test]
    fn laplace_np_matches_discretised_np() {
        // midpoint-discretised Laplace laws on a wide window
        let (b, s) = (2.0, 1.5);
        let g = QuadratureGrid::new(-80.0, 80.0, 160_000, Rule::Midpoint).unwrap();
        let f0 = DensityFunction::laplace(0.0, b).unwrap();
        let f1 = DensityFunction::laplace(s, b).unwrap();
        let p0: Vec<f64> = g.points().iter().zip(g.weights()).map(|(&t, w)| f0.density(t) * w).collect();
        let p1: Vec<f64> = g.points().iter().zip(g.weights()).map(|(&t, w)| f1.density(t) * w).collect();
        for alpha in [0.01, 0.05, 0.2] {
            let disc = np_test(&p0, &p1, alpha).unwrap().power;
            let exact = laplace_np_power(b, s, alpha).unwrap().power;
            assert!((disc - exact).abs() < 1e-4, "{alpha}: {disc} vs {exact}");
        }
    }

    #[test]
    fn exact_posterior_examples() {
        let u = DataUniverse::binary(1);
        let xs = u.datasets().unwrap().to_vec();
        let model = DataModel::point_masses(vec!["a".into(), "b".into()], xs).unwrap();
        let prior = FiniteMeasure::probability(vec!["a".to_string(), "b".to_string()], vec![0.3, 0.7]).unwrap();
        let rr = Mechanism::RandomizedResponse(RandomizedResponse::new(1.0).unwrap());
        let post = exact_posterior(&prior, &model, &rr, &u, Outcome::Discrete(0)).unwrap();
        let q = 1.0 / (E + 1.0);
        let want = 0.3 * (1.0 - q) / (0.3 * (1.0 - q) + 0.7 * q);
        assert!((post.weight(0) - want).abs() < 1e-15);

        let post = exact_posterior(&prior, &model, &Mechanism::Constant, &u, Outcome::Discrete(0)).unwrap();
        assert!((post.weight(0) - 0.3).abs() < 1e-15);

        let id = Mechanism::Identity;
        let only_a = FiniteMeasure::probability(vec!["a".to_string()], vec![1.0]).unwrap();
        assert!(matches!(
            exact_posterior(&only_a, &model, &id, &u, Outcome::Discrete(1)),
            Err(Error::UndefinedPosterior)
        ));
    }

    #[test]
    fn chernoff_cutoff() {
        for theta in [0.5, 3.0, 12.0, 30.0] {
            let k = poisson_chernoff_cutoff(theta, 1e-12);
            let tail: f64 = 1.0 - (0..k).map(|x| poisson_pmf(theta, x)).sum::<f64>();
            assert!(tail < 1e-12 + 1e-14, "{theta}: {tail}");
        }
    }

    #[test]
    fn private_count_posterior() {
        let pc = PrivateCount::default();
        let g = QuadratureGrid::with_step(0.0, 30.0, 0.01, Rule::Trapezoid).unwrap();
        for t in [-3.0, 2.5, 40.0] {
            let post = pc.posterior(t, &g).unwrap();
            assert!((g.integrate(&post) - 1.0).abs() < 1e-12);
            for (&th, p) in g.points().iter().zip(&post) {
                let prior = pc.prior_density(th);
                assert!(*p <= prior * E + 1e-4 && *p >= prior / E - 1e-4);
            }
        }
        // clamping hides large counts: far above a1 the release says little
        let post = pc.posterior(1e3, &g).unwrap();
        let mean: f64 = g.points().iter().zip(g.weights()).zip(&post).map(|((&th, w), p)| th * w * p).sum();
        assert!(mean > 3.0 && mean < 3.0 * E);

        // nearly noiseless release: posterior mean moves toward the conjugate update
        let sharp = PrivateCount { epsilon: 200.0, ..pc };
        let post = sharp.posterior(1.0, &g).unwrap();
        let mean: f64 = g.points().iter().zip(g.weights()).zip(&post).map(|((&th, w), p)| th * w * p).sum();
        assert!((mean - 2.0).abs() < 0.05, "{mean}");
    }

    #[test]
    fn private_count_samples() {
        let pc = PrivateCount::default();
        assert_eq!(pc.sample(7, 3).unwrap(), pc.sample(7, 3).unwrap());
        assert_ne!(pc.sample(7, 3).unwrap(), pc.sample(7, 4).unwrap());
        let sharp = PrivateCount { epsilon: 1e6, ..pc };
        let t = sharp.sample(1, 0).unwrap();
        assert!((t - t.round()).abs() < 1e-3 && (0.0..=6.0).contains(&t.round()));
    }

    #[test]
    fn mc_examples() {
        let u = DataUniverse::binary(1);
        let x = Dataset::vector([0]);
        let rr = Mechanism::RandomizedResponse(RandomizedResponse::new(1.0).unwrap());
        let sure = mc_probability(&rr, &u, &x, |_| true, 1000, 1).unwrap();
        assert_eq!(sure.estimate, 1.0);
        let flip = mc_probability(&rr, &u, &x, |t| t == Outcome::Discrete(1), 20_000, 2).unwrap();
        assert!(flip.contains(1.0 / (E + 1.0)), "{flip:?}");
        let lap = Mechanism::Laplace(LaplaceMechanism::count(0.5).unwrap());
        let tail = mc_probability(&lap, &u, &x, |t| matches!(t, Outcome::Real(v) if v > 0.0), 20_000, 3).unwrap();
        assert!(tail.contains(0.5), "{tail:?}");
        assert_eq!(
            tail,
            mc_probability(&lap, &u, &x, |t| matches!(t, Outcome::Real(v) if v > 0.0), 20_000, 3).unwrap()
        );
    }
}
