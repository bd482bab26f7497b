//! Random instances shared by the integration tests.
#![allow(dead_code)]

use dp_bounds::inference::DataModel;
use dp_bounds::mechanisms::TableMechanism;
use dp_bounds::pufferfish::{AttackerPrior, ConjecturePair, Event};
use dp_bounds::{DataUniverse, Dataset, DatasetMode, FiniteMeasure, Mechanism, Metric};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A small connected universe of at most `max_size` datasets.
pub fn random_universe(rng: &mut ChaCha8Rng, max_size: usize) -> DataUniverse {
    loop {
        let u = match rng.random_range(0..4) {
            0 => DataUniverse::binary(rng.random_range(1..=8)),
            1 => DataUniverse::hamming_product(["a", "b", "c"], [rng.random_range(1..=4)]).unwrap(),
            2 => {
                let lo = rng.random_range(0..=2);
                DataUniverse::multiset_product(["a", "b"], lo..=lo + rng.random_range(1..=3)).unwrap()
            }
            _ => {
                // a cycle with a chord, over single-record datasets
                let k = rng.random_range(3..=9usize);
                let datasets = (0..k as u32).map(|i| Dataset::vector([i])).collect();
                let mut edges: Vec<(usize, usize)> = (0..k).map(|i| (i, (i + 1) % k)).collect();
                edges.push((0, k / 2));
                let alphabet: Vec<String> = (0..k).map(|i| format!("v{i}")).collect();
                DataUniverse::explicit(DatasetMode::Vector, alphabet, datasets, Metric::Graph(edges)).unwrap()
            }
        };
        if (u.size() as usize) <= max_size {
            return u;
        }
    }
}

/// Random ε-DP table mechanism with `k` outputs:
/// `p_x(t) ∝ g(t) exp(-(ε/2) c_t d(x, a_t))` with `c_t ∈ [0, 1]`; both the
/// numerator and the normaliser are (ε/2)-Lipschitz in log scale. Output 0
/// has `c_0 = 0`, so no row is all zero.
pub fn random_dp_mechanism(u: &DataUniverse, eps: f64, k: usize, rng: &mut ChaCha8Rng) -> Mechanism {
    let list = u.datasets().unwrap();
    let anchors: Vec<&Dataset> = (0..k).map(|_| list.choose(rng).unwrap()).collect();
    let g: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let c: Vec<f64> = (0..k)
        .map(|t| if t == 0 { 0.0 } else if rng.random_bool(0.5) { 1.0 } else { rng.random_range(0.0..1.0) })
        .collect();
    let rows = list
        .iter()
        .map(|x| {
            let w: Vec<f64> = (0..k)
                .map(|t| {
                    let d = u.distance(x, anchors[t]).unwrap().as_f64();
                    g[t] * (-(eps / 2.0) * c[t] * d).exp()
                })
                .collect();
            let z: f64 = w.iter().sum();
            w.into_iter().map(|v| v / z).collect()
        })
        .collect();
    table(k, rows)
}

/// Arbitrary table mechanism; with probability 1/3 some entries are zero.
pub fn random_table(u: &DataUniverse, k: usize, rng: &mut ChaCha8Rng) -> Mechanism {
    let sparse = rng.random_bool(1.0 / 3.0);
    let rows = (0..u.datasets().unwrap().len())
        .map(|_| {
            let mut w: Vec<f64> = (0..k)
                .map(|t| if sparse && t > 0 && rng.random_bool(0.2) { 0.0 } else { rng.random_range(0.01..1.0) })
                .collect();
            let z: f64 = w.iter().sum();
            w.iter_mut().for_each(|v| *v /= z);
            w
        })
        .collect();
    table(k, rows)
}

fn table(k: usize, rows: Vec<Vec<f64>>) -> Mechanism {
    Mechanism::Table(TableMechanism::new((0..k).map(|t| format!("t{t}")).collect(), rows).unwrap())
}

/// Random probability vector; entries are zero with probability `p_zero`
/// (at least one entry stays positive).
pub fn random_simplex(k: usize, p_zero: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let keep = rng.random_range(0..k);
    let mut w: Vec<f64> = (0..k)
        .map(|i| if i != keep && rng.random_bool(p_zero) { 0.0 } else { -rng.random_range(1e-9f64..1.0).ln() })
        .collect();
    let z: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= z);
    w
}

/// `n_theta` random laws, each on a random subset of the universe.
pub fn random_model(u: &DataUniverse, n_theta: usize, rng: &mut ChaCha8Rng) -> DataModel {
    let list = u.datasets().unwrap().to_vec();
    let laws = (0..n_theta)
        .map(|_| {
            let p_zero = rng.random_range(0.0..0.9);
            FiniteMeasure::probability(list.clone(), random_simplex(list.len(), p_zero, rng)).unwrap()
        })
        .collect();
    DataModel::new((0..n_theta).map(|i| format!("θ{i}")).collect(), laws).unwrap()
}

pub fn random_prior(model: &DataModel, rng: &mut ChaCha8Rng) -> FiniteMeasure<String> {
    FiniteMeasure::probability(model.thetas().to_vec(), random_simplex(model.len(), 0.2, rng)).unwrap()
}

pub fn random_attacker(u: &DataUniverse, rng: &mut ChaCha8Rng) -> AttackerPrior {
    let n = u.datasets().unwrap().len();
    AttackerPrior::new(random_simplex(n, 0.3, rng)).unwrap()
}

pub fn random_event(u: &DataUniverse, rng: &mut ChaCha8Rng) -> Event {
    let n = u.datasets().unwrap().len();
    let mut members: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.4)).collect();
    if members.is_empty() {
        members.push(rng.random_range(0..n));
    }
    Event::new(members, u).unwrap()
}

pub fn random_pairs(u: &DataUniverse, count: usize, rng: &mut ChaCha8Rng) -> Vec<ConjecturePair> {
    (0..count)
        .map(|_| ConjecturePair {
            first: random_event(u, rng),
            second: random_event(u, rng),
        })
        .collect()
}

/// Positive dominating weights for `k` outputs.
pub fn random_tau(k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..k).map(|_| rng.random_range(0.1..3.0)).collect()
}
