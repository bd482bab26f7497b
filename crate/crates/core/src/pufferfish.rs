//! Pufferfish privacy on a finite universe.
//!
//! An attacker is a probability law on the universe's datasets (stored
//! densely, in [`DataUniverse::datasets`] order). A Pufferfish instantiation
//! lists attackers, pairs of competing conjectures (events) and a budget ε.
//! The mechanism satisfies it when, for every attacker θ and every pair
//! `(E, E')` with both conditionings well defined, the output laws
//! `P(t | θ, X ∈ E)` and `P(t | θ, X ∈ E')` are within ε in multiplicative
//! distance.
//!
//! The graph `G_{D,S}` on attacker laws is built on the finite set of
//! vertices reached by conditioning the listed attackers on the listed
//! events.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Label;
use crate::error::{Error, Result};
use crate::inference::{budget, power_bounds_two_sided, Bounds};
use crate::measures::{
    density_ratio_metric, is_zero, log_ratio, max_abs_log_ratio, DensityFunction, FiniteMeasure,
    MeasureInterval, TOL,
};
use crate::mechanisms::{Mechanism, Outcome};
use crate::sampling;
use crate::universe::{DataUniverse, Dataset, DatasetMode, Distance};

/// Two attacker laws closer than this (max-norm) are the same vertex.
pub const VERTEX_TOL: f64 = 1e-12;

/// An attacker's prior on the dataset, one weight per universe dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct AttackerPrior {
    weights: Vec<f64>,
}

impl AttackerPrior {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidInput("attacker weights must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "attacker prior has total mass {total}, not 1"
            )));
        }
        Ok(AttackerPrior {
            weights: weights.iter().map(|w| w / total).collect(),
        })
    }

    /// From a measure over (some of) the universe's datasets.
    pub fn from_measure(mu: &FiniteMeasure<Dataset>, u: &DataUniverse) -> Result<Self> {
        let n = u.datasets()?.len();
        let mut w = vec![0.0; n];
        for (x, m) in mu.iter() {
            let i = u.index_of(x).ok_or_else(|| Error::NotInUniverse(x.to_string()))?;
            w[i] += m;
        }
        Self::new(w)
    }

    pub fn uniform(u: &DataUniverse) -> Result<Self> {
        let n = u.datasets()?.len();
        Self::new(vec![1.0 / n as f64; n])
    }

    pub fn point_mass(u: &DataUniverse, x: &Dataset) -> Result<Self> {
        let n = u.datasets()?.len();
        let i = u.index_of(x).ok_or_else(|| Error::NotInUniverse(x.to_string()))?;
        let mut w = vec![0.0; n];
        w[i] = 1.0;
        Self::new(w)
    }

    /// Independent records: `P(x) = Π_i q_i(x_i)` on a single-length vector
    /// product universe, with `marginals[i][r]` the law of record `i`.
    pub fn product(u: &DataUniverse, marginals: &[Vec<f64>]) -> Result<Self> {
        let n = single_length(u)?;
        if marginals.len() != n || marginals.iter().any(|q| q.len() != u.alphabet().len()) {
            return Err(Error::InvalidInput(
                "need one marginal per record, one weight per alphabet symbol".into(),
            ));
        }
        let w = u
            .datasets()?
            .iter()
            .map(|x| x.values().enumerate().map(|(i, r)| marginals[i][r as usize]).product())
            .collect();
        Self::new(w)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mass(&self, e: &Event) -> f64 {
        e.members.iter().map(|&i| self.weights[i]).sum()
    }

    pub fn to_measure(&self, u: &DataUniverse) -> Result<FiniteMeasure<Dataset>> {
        FiniteMeasure::probability(u.datasets()?.to_vec(), self.weights.clone())
    }

    fn close_to(&self, other: &AttackerPrior) -> bool {
        self.weights.len() == other.weights.len()
            && self
                .weights
                .iter()
                .zip(&other.weights)
                .all(|(a, b)| (a - b).abs() <= VERTEX_TOL)
    }
}

fn single_length(u: &DataUniverse) -> Result<usize> {
    match u.product_lengths() {
        Some(l) if l.len() == 1 && u.mode() == DatasetMode::Vector => Ok(l[0]),
        _ => Err(Error::InvalidInput(
            "needs a product universe R^n of vectors with a single length n".into(),
        )),
    }
}

/// A set of universe datasets, by index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Event {
    members: Vec<usize>,
}

impl Event {
    pub fn new(mut members: Vec<usize>, u: &DataUniverse) -> Result<Self> {
        let n = u.datasets()?.len();
        members.sort_unstable();
        members.dedup();
        if let Some(&bad) = members.iter().find(|&&i| i >= n) {
            return Err(Error::InvalidInput(format!("event member {bad} out of range")));
        }
        Ok(Event { members })
    }

    /// The whole universe.
    pub fn all(u: &DataUniverse) -> Result<Self> {
        Ok(Event {
            members: (0..u.datasets()?.len()).collect(),
        })
    }

    /// `E(r, i) = {x : x_i = r}` (record index `i` is zero-based).
    pub fn record(u: &DataUniverse, i: usize, r: u32) -> Result<Self> {
        let members = u
            .datasets()?
            .iter()
            .enumerate()
            .filter(|(_, x)| x.mode() == DatasetMode::Vector && x.get(i) == Some(r))
            .map(|(k, _)| k)
            .collect();
        Ok(Event { members })
    }

    pub fn singleton(u: &DataUniverse, x: &Dataset) -> Result<Self> {
        let i = u.index_of(x).ok_or_else(|| Error::NotInUniverse(x.to_string()))?;
        Ok(Event { members: vec![i] })
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.binary_search(&i).is_ok()
    }
}

/// A pair `(E, E')` of competing conjectures.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjecturePair {
    pub first: Event,
    pub second: Event,
}

/// `ε-PufferFish(D, S)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PufferfishInstantiation {
    pub attackers: Vec<AttackerPrior>,
    pub pairs: Vec<ConjecturePair>,
    pub epsilon: f64,
}

impl PufferfishInstantiation {
    pub fn new(attackers: Vec<AttackerPrior>, pairs: Vec<ConjecturePair>, epsilon: f64) -> Result<Self> {
        if epsilon.is_nan() || epsilon < 0.0 {
            return Err(Error::InvalidInput("epsilon must be nonnegative".into()));
        }
        let lens: Vec<usize> = attackers.iter().map(|a| a.weights.len()).collect();
        if lens.windows(2).any(|w| w[0] != w[1]) {
            return Err(Error::InvalidInput("attackers live on different universes".into()));
        }
        Ok(PufferfishInstantiation {
            attackers,
            pairs,
            epsilon,
        })
    }
}

/// Disjoint events covering the universe.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    blocks: Vec<Event>,
}

impl Partition {
    pub fn new(blocks: Vec<Event>, u: &DataUniverse) -> Result<Self> {
        let n = u.datasets()?.len();
        let mut seen = vec![false; n];
        for b in &blocks {
            for &i in &b.members {
                if i >= n || seen[i] {
                    return Err(Error::InvalidInput("partition blocks overlap".into()));
                }
                seen[i] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidInput("partition blocks do not cover the universe".into()));
        }
        Ok(Partition { blocks })
    }

    /// `{E(r, i) : r ∈ R}`: level sets of record `i`.
    pub fn by_record(u: &DataUniverse, i: usize) -> Result<Self> {
        let blocks = (0..u.alphabet().len() as u32)
            .map(|r| Event::record(u, i, r))
            .collect::<Result<Vec<_>>>()?;
        Self::new(blocks, u)
    }

    pub fn singletons(u: &DataUniverse) -> Result<Self> {
        let n = u.datasets()?.len();
        Self::new((0..n).map(|i| Event { members: vec![i] }).collect(), u)
    }

    /// The one-block partition `{X}`.
    pub fn whole(u: &DataUniverse) -> Result<Self> {
        Self::new(vec![Event::all(u)?], u)
    }

    pub fn blocks(&self) -> &[Event] {
        &self.blocks
    }
}

/// `θ|_E`, the attacker's law conditioned on `X ∈ E`.
pub fn condition(theta: &AttackerPrior, e: &Event) -> Result<AttackerPrior> {
    let mass = theta.mass(e);
    if is_zero(mass) {
        return Err(Error::IllDefined(format!(
            "event with {} datasets has probability zero",
            e.members.len()
        )));
    }
    let mut w = vec![0.0; theta.weights.len()];
    for &i in &e.members {
        w[i] = theta.weights[i] / mass;
    }
    Ok(AttackerPrior { weights: w })
}

/// Mixture of Laplace laws sharing one scale.
#[derive(Clone, Debug, PartialEq)]
pub struct LaplaceMixture {
    pub locations: Vec<f64>,
    pub weights: Vec<f64>,
    pub scale: f64,
}

impl LaplaceMixture {
    pub fn density(&self, t: f64) -> f64 {
        self.locations
            .iter()
            .zip(&self.weights)
            .map(|(&l, &w)| w * (-(t - l).abs() / self.scale).exp())
            .sum::<f64>()
            / (2.0 * self.scale)
    }

    fn ln_density(&self, t: f64) -> f64 {
        log_sum_exp(
            self.locations
                .iter()
                .zip(&self.weights)
                .filter(|(_, &w)| w > 0.0)
                .map(|(&l, &w)| w.ln() - (t - l).abs() / self.scale),
        ) - (2.0 * self.scale).ln()
    }

    /// `ln` of the density's tail coefficient: as `t → +∞` (`sign = 1`) the
    /// density behaves like `exp(tail - t/b)`, and symmetrically for `-∞`.
    fn ln_tail(&self, sign: f64) -> f64 {
        log_sum_exp(
            self.locations
                .iter()
                .zip(&self.weights)
                .filter(|(_, &w)| w > 0.0)
                .map(|(&l, &w)| w.ln() + sign * l / self.scale),
        )
    }

    /// Exact `sup_t |ln f(t) - ln g(t)|`. Between consecutive locations each
    /// density is `A e^{t/b} + B e^{-t/b}`, so the ratio is a Möbius map of
    /// `e^{2t/b}` and monotone; the supremum is attained at a location or in
    /// one of the two tails.
    pub fn mult_distance(&self, other: &LaplaceMixture) -> Result<(f64, Outcome)> {
        if (self.scale - other.scale).abs() > TOL * self.scale {
            return Err(Error::Unsupported(
                "Laplace mixtures with different scales".into(),
            ));
        }
        let mut best = (0.0, Outcome::Real(0.0));
        let mut consider = |d: f64, t: f64| {
            if d > best.0 {
                best = (d, Outcome::Real(t));
            }
        };
        for &t in self.locations.iter().chain(&other.locations) {
            consider((self.ln_density(t) - other.ln_density(t)).abs(), t);
        }
        let hi = self.locations.iter().chain(&other.locations).fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let lo = self.locations.iter().chain(&other.locations).fold(f64::INFINITY, |a, &b| a.min(b));
        consider((self.ln_tail(1.0) - other.ln_tail(1.0)).abs(), hi + self.scale);
        consider((self.ln_tail(-1.0) - other.ln_tail(-1.0)).abs(), lo - self.scale);
        Ok(best)
    }
}

fn log_sum_exp<I: Iterator<Item = f64>>(it: I) -> f64 {
    let v: Vec<f64> = it.collect();
    let m = v.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Law of the output `t` of the data-provision procedure.
#[derive(Clone, Debug, PartialEq)]
pub enum OutputLaw {
    Discrete(FiniteMeasure<usize>),
    Laplace(LaplaceMixture),
}

impl OutputLaw {
    pub fn density(&self, t: Outcome) -> Result<f64> {
        match (self, t) {
            (OutputLaw::Discrete(mu), Outcome::Discrete(k)) => Ok(mu.weight(k)),
            (OutputLaw::Laplace(mix), Outcome::Real(t)) => Ok(mix.density(t)),
            _ => Err(Error::InvalidInput("outcome kind does not match the output law".into())),
        }
    }

    /// Multiplicative distance and an outcome attaining it.
    pub fn mult_distance(&self, other: &OutputLaw) -> Result<(f64, Option<Outcome>)> {
        match (self, other) {
            (OutputLaw::Discrete(a), OutputLaw::Discrete(b)) => {
                let (d, k) = max_abs_log_ratio(a.weights(), b.weights());
                Ok((d, k.map(Outcome::Discrete)))
            }
            (OutputLaw::Laplace(a), OutputLaw::Laplace(b)) => {
                let (d, t) = a.mult_distance(b)?;
                Ok((d, Some(t)))
            }
            _ => Err(Error::InvalidInput("output laws of different kinds".into())),
        }
    }

    pub fn as_discrete(&self) -> Result<&FiniteMeasure<usize>> {
        match self {
            OutputLaw::Discrete(mu) => Ok(mu),
            OutputLaw::Laplace(_) => Err(Error::Unsupported(
                "continuous output law where a discrete one is needed".into(),
            )),
        }
    }
}

/// Per-dataset output laws of a mechanism, computed once.
#[derive(Clone, Debug)]
pub struct MechanismTable {
    discrete: Option<Vec<FiniteMeasure<usize>>>,
    laws: Vec<DensityFunction>,
}

impl MechanismTable {
    pub fn new(m: &Mechanism, u: &DataUniverse) -> Result<Self> {
        m.audit(u)?;
        if m.is_discrete() {
            Ok(MechanismTable {
                discrete: Some(m.distribution_table(u)?),
                laws: Vec::new(),
            })
        } else {
            let laws = u
                .datasets()?
                .iter()
                .map(|x| m.law(u, x))
                .collect::<Result<Vec<_>>>()?;
            Ok(MechanismTable {
                discrete: None,
                laws,
            })
        }
    }

    /// `P(t ∈ · | θ) = Σ_x P_θ(x) P_x`.
    pub fn privatised(&self, theta: &AttackerPrior) -> Result<OutputLaw> {
        match &self.discrete {
            Some(table) => {
                if table.len() != theta.weights.len() {
                    return Err(Error::InvalidInput("attacker and universe sizes differ".into()));
                }
                let k = table.first().map_or(0, FiniteMeasure::len);
                let mut w = vec![0.0; k];
                for (row, &p) in table.iter().zip(&theta.weights) {
                    if p > 0.0 {
                        for (acc, &q) in w.iter_mut().zip(row.weights()) {
                            *acc += p * q;
                        }
                    }
                }
                Ok(OutputLaw::Discrete(FiniteMeasure::probability((0..k).collect(), w)?))
            }
            None => {
                if self.laws.len() != theta.weights.len() {
                    return Err(Error::InvalidInput("attacker and universe sizes differ".into()));
                }
                let mut locations = Vec::new();
                let mut weights = Vec::new();
                let mut scale = 0.0;
                for (law, &p) in self.laws.iter().zip(&theta.weights) {
                    let DensityFunction::Laplace { location, scale: b } = *law;
                    scale = b;
                    if p > 0.0 {
                        locations.push(location);
                        weights.push(p);
                    }
                }
                Ok(OutputLaw::Laplace(LaplaceMixture {
                    locations,
                    weights,
                    scale,
                }))
            }
        }
    }

    /// Output density at dataset index `i`.
    fn density_at(&self, i: usize, t: Outcome) -> Result<f64> {
        match (&self.discrete, t) {
            (Some(table), Outcome::Discrete(k)) => Ok(table[i].weight(k)),
            (None, Outcome::Real(t)) => Ok(self.laws[i].density(t)),
            _ => Err(Error::InvalidInput("outcome kind does not match the mechanism".into())),
        }
    }
}

/// `P(t ∈ · | θ)` for attacker θ.
pub fn privatised_data_prob(theta: &AttackerPrior, m: &Mechanism, u: &DataUniverse) -> Result<OutputLaw> {
    MechanismTable::new(m, u)?.privatised(theta)
}

/// First violation found by [`pufferfish_satisfied`].
#[derive(Clone, Debug, PartialEq)]
pub struct PufferfishWitness {
    pub attacker: usize,
    pub pair: usize,
    pub outcome: Option<Outcome>,
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PufferfishReport {
    pub epsilon: f64,
    pub satisfied: bool,
    /// Largest multiplicative distance over checked (attacker, pair) triples.
    pub max_distance: f64,
    pub checked: usize,
    /// (attacker, pair) combinations skipped because a conditioning event has
    /// probability zero.
    pub skipped: usize,
    /// Lexicographically first violating (attacker, pair).
    pub witness: Option<PufferfishWitness>,
}

/// Conditioned output laws for one attacker and every pair; `None` where a
/// conditioning is ill defined.
fn conditioned_laws(
    theta: &AttackerPrior,
    pairs: &[ConjecturePair],
    table: &MechanismTable,
) -> Result<Vec<Option<(OutputLaw, OutputLaw)>>> {
    pairs
        .iter()
        .map(|p| match (condition(theta, &p.first), condition(theta, &p.second)) {
            (Ok(a), Ok(b)) => Ok(Some((table.privatised(&a)?, table.privatised(&b)?))),
            _ => Ok(None),
        })
        .collect()
}

/// Checks `d_Mult(P(t | θ, E), P(t | θ, E')) <= ε` for every attacker and
/// every well-defined pair.
pub fn pufferfish_satisfied(
    inst: &PufferfishInstantiation,
    m: &Mechanism,
    u: &DataUniverse,
) -> Result<PufferfishReport> {
    let table = MechanismTable::new(m, u)?;
    let eps = inst.epsilon;
    let per_attacker: Vec<Result<Vec<Option<(f64, Option<Outcome>)>>>> = inst
        .attackers
        .par_iter()
        .map(|theta| {
            conditioned_laws(theta, &inst.pairs, &table)?
                .into_iter()
                .map(|laws| match laws {
                    Some((a, b)) => Ok(Some(a.mult_distance(&b)?)),
                    None => Ok(None),
                })
                .collect()
        })
        .collect();
    let mut report = PufferfishReport {
        epsilon: eps,
        satisfied: true,
        max_distance: 0.0,
        checked: 0,
        skipped: 0,
        witness: None,
    };
    for (a, res) in per_attacker.into_iter().enumerate() {
        for (p, entry) in res?.into_iter().enumerate() {
            match entry {
                None => report.skipped += 1,
                Some((d, outcome)) => {
                    report.checked += 1;
                    report.max_distance = report.max_distance.max(d);
                    if d > eps + TOL && report.witness.is_none() {
                        report.satisfied = false;
                        report.witness = Some(PufferfishWitness {
                            attacker: a,
                            pair: p,
                            outcome,
                            distance: d,
                        });
                    }
                }
            }
        }
    }
    Ok(report)
}

/// `G_{D,S}` on the finite closure of conditioned attackers.
#[derive(Clone, Debug)]
pub struct PufferfishGraph {
    vertices: Vec<AttackerPrior>,
    adjacency: Vec<Vec<usize>>,
}

impl PufferfishGraph {
    /// Depth 1 uses the listed attackers only; each further level treats
    /// the previous level's vertices as attackers too.
    pub fn build(inst: &PufferfishInstantiation, depth: usize) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidInput("closure depth must be at least 1".into()));
        }
        let mut g = PufferfishGraph {
            vertices: Vec::new(),
            adjacency: Vec::new(),
        };
        let mut sources: Vec<AttackerPrior> = inst.attackers.clone();
        for _ in 0..depth {
            let mut next = Vec::new();
            for theta in &sources {
                for pair in &inst.pairs {
                    let (Ok(a), Ok(b)) = (condition(theta, &pair.first), condition(theta, &pair.second)) else {
                        continue;
                    };
                    let (ia, new_a) = g.intern(a);
                    let (ib, new_b) = g.intern(b);
                    if new_a {
                        next.push(g.vertices[ia].clone());
                    }
                    if new_b {
                        next.push(g.vertices[ib].clone());
                    }
                    if ia != ib && !g.adjacency[ia].contains(&ib) {
                        g.adjacency[ia].push(ib);
                        g.adjacency[ib].push(ia);
                    }
                }
            }
            sources = next;
        }
        for a in g.adjacency.iter_mut() {
            a.sort_unstable();
        }
        Ok(g)
    }

    fn intern(&mut self, p: AttackerPrior) -> (usize, bool) {
        if let Some(i) = self.vertex_of(&p) {
            return (i, false);
        }
        self.vertices.push(p);
        self.adjacency.push(Vec::new());
        (self.vertices.len() - 1, true)
    }

    pub fn vertices(&self) -> &[AttackerPrior] {
        &self.vertices
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    /// Index of the vertex equal to `p` within [`VERTEX_TOL`].
    pub fn vertex_of(&self, p: &AttackerPrior) -> Option<usize> {
        self.vertices.iter().position(|v| v.close_to(p))
    }

    /// BFS distances from vertex `s`.
    pub fn distances_from(&self, s: usize) -> Vec<Distance> {
        let mut dist = vec![Distance::Infinite; self.vertices.len()];
        dist[s] = Distance::Finite(0);
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            let dv = dist[v].finite().unwrap();
            for &w in &self.adjacency[v] {
                if dist[w] == Distance::Infinite {
                    dist[w] = Distance::Finite(dv + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }
}

/// `d_{D,S}(θa, θb)`: shortest-path length in the closure graph.
pub fn dps_distance(
    inst: &PufferfishInstantiation,
    theta_a: &AttackerPrior,
    theta_b: &AttackerPrior,
    depth: usize,
) -> Result<Distance> {
    let g = PufferfishGraph::build(inst, depth)?;
    let find = |p: &AttackerPrior| {
        g.vertex_of(p).ok_or_else(|| {
            Error::InvalidInput("attacker law is not a vertex of the conditioning closure".into())
        })
    };
    let (a, b) = (find(theta_a)?, find(theta_b)?);
    Ok(g.distances_from(a)[b])
}

/// Prior-to-posterior odds ratio of `E` against `E'` after observing `t`,
/// computed by exact Bayes over the universe, and whether it lies within
/// `e^{±eps}` (relative tolerance 1e-9).
pub fn odds_ratio_check(
    theta: &AttackerPrior,
    e: &Event,
    e2: &Event,
    m: &Mechanism,
    u: &DataUniverse,
    t: Outcome,
    eps: f64,
) -> Result<(f64, bool)> {
    let table = MechanismTable::new(m, u)?;
    odds_ratio_with(theta, e, e2, &table, t, eps)
}

fn odds_ratio_with(
    theta: &AttackerPrior,
    e: &Event,
    e2: &Event,
    table: &MechanismTable,
    t: Outcome,
    eps: f64,
) -> Result<(f64, bool)> {
    let (pe, pe2) = (theta.mass(e), theta.mass(e2));
    if is_zero(pe) || is_zero(pe2) {
        return Err(Error::IllDefined("zero prior odds".into()));
    }
    let post: Vec<f64> = theta
        .weights
        .iter()
        .enumerate()
        .map(|(i, &w)| if w > 0.0 { Ok(w * table.density_at(i, t)?) } else { Ok(0.0) })
        .collect::<Result<_>>()?;
    let z: f64 = post.iter().sum();
    if is_zero(z) {
        return Err(Error::UndefinedPosterior);
    }
    let qe: f64 = e.members.iter().map(|&i| post[i] / z).sum();
    let qe2: f64 = e2.members.iter().map(|&i| post[i] / z).sum();
    let ratio = (qe / qe2) / (pe / pe2);
    let ok = if eps.is_infinite() {
        true
    } else {
        ratio >= (-eps).exp() * (1.0 - 1e-9) && ratio <= eps.exp() * (1.0 + 1e-9)
    };
    Ok((ratio, ok))
}

/// Whether the attacker's posterior on the partition blocks lies in the
/// density ratio neighbourhood of radius `eps` around its prior on them.
/// Returns the density ratio metric as well.
pub fn drn_membership(
    theta: &AttackerPrior,
    partition: &Partition,
    m: &Mechanism,
    u: &DataUniverse,
    t: Outcome,
    eps: f64,
) -> Result<(f64, bool)> {
    let table = MechanismTable::new(m, u)?;
    drn_with(theta, partition, &table, t, eps)
}

fn drn_with(
    theta: &AttackerPrior,
    partition: &Partition,
    table: &MechanismTable,
    t: Outcome,
    eps: f64,
) -> Result<(f64, bool)> {
    let k = partition.blocks.len();
    let prior: Vec<f64> = partition.blocks.iter().map(|b| theta.mass(b)).collect();
    let mut post = vec![0.0; k];
    for (bi, b) in partition.blocks.iter().enumerate() {
        for &i in &b.members {
            let w = theta.weights[i];
            if w > 0.0 {
                post[bi] += w * table.density_at(i, t)?;
            }
        }
    }
    let z: f64 = post.iter().sum();
    if is_zero(z) {
        return Err(Error::UndefinedPosterior);
    }
    let prior = FiniteMeasure::new((0..k).collect(), prior)?;
    let post = FiniteMeasure::new((0..k).collect(), post.iter().map(|p| p / z).collect())?;
    let delta = density_ratio_metric(&prior, &post)?;
    Ok((delta, delta <= eps + TOL))
}

/// `max(α/φ, 1-(1-α)φ) <= 1-β <= min(αφ, 1-(1-α)/φ)` with
/// `φ = exp(eps d_{D,S})`.
pub fn pufferfish_power_bounds(alpha: f64, eps: f64, dps: Distance) -> Result<Bounds> {
    power_bounds_two_sided(alpha, eps, dps)
}

/// Conjecture pairs `⋃_i {E(r,i) : r ∈ R}²` (ordered, including `(E, E)`)
/// on a single-length vector product universe, with the given attackers.
pub fn dp_correspondence_instantiation(
    u: &DataUniverse,
    attackers: Vec<AttackerPrior>,
    eps: f64,
) -> Result<PufferfishInstantiation> {
    let n = single_length(u)?;
    let r = u.alphabet().len() as u32;
    let mut pairs = Vec::with_capacity(n * (r * r) as usize);
    for i in 0..n {
        let events = (0..r).map(|v| Event::record(u, i, v)).collect::<Result<Vec<_>>>()?;
        for a in &events {
            for b in &events {
                pairs.push(ConjecturePair {
                    first: a.clone(),
                    second: b.clone(),
                });
            }
        }
    }
    PufferfishInstantiation::new(attackers, pairs, eps)
}

/// `count` independent-record attackers on `R^n`; each record's marginal is
/// drawn from the flat Dirichlet on the alphabet. Attacker `k` depends only
/// on `(seed, k)`.
pub fn sample_product_priors(u: &DataUniverse, count: usize, seed: u64) -> Result<Vec<AttackerPrior>> {
    use rand_distr::{Distribution, Exp1};
    let n = single_length(u)?;
    let r = u.alphabet().len();
    (0..count as u64)
        .map(|k| {
            let mut rng = sampling::draw_rng(seed, None, k);
            let marginals: Vec<Vec<f64>> = (0..n)
                .map(|_| {
                    let g: Vec<f64> = (0..r).map(|_| Exp1.sample(&mut rng)).collect();
                    let s: f64 = g.iter().sum();
                    g.into_iter().map(|x: f64| x / s).collect()
                })
                .collect();
            AttackerPrior::product(u, &marginals)
        })
        .collect()
}

fn discrete_laws(inst: &PufferfishInstantiation, table: &MechanismTable, g: &PufferfishGraph) -> Result<Vec<FiniteMeasure<usize>>> {
    let _ = inst;
    g.vertices
        .iter()
        .map(|v| Ok(table.privatised(v)?.as_discrete()?.clone()))
        .collect()
}

/// `eps * δ` as used in the statements below (`δ = 0` gives 0 even for an
/// infinite budget).
fn radius(eps: f64, d: Distance) -> f64 {
    budget(eps, d)
}

/// Statement I: `d_Mult(P(t|θ), P(t|θ')) <= ε d_{D,S}(θ, θ')` for every pair
/// of closure vertices.
pub fn puff_statement_i(inst: &PufferfishInstantiation, m: &Mechanism, u: &DataUniverse) -> Result<bool> {
    let table = MechanismTable::new(m, u)?;
    let g = PufferfishGraph::build(inst, 1)?;
    let laws: Vec<OutputLaw> = g.vertices.iter().map(|v| table.privatised(v)).collect::<Result<_>>()?;
    for s in 0..laws.len() {
        let dist = g.distances_from(s);
        for (t, &d) in dist.iter().enumerate() {
            if t <= s || !d.is_finite() {
                continue;
            }
            if laws[s].mult_distance(&laws[t])?.0 > radius(inst.epsilon, d) + TOL {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Statement II: for every attacker, well-defined pair and event `S` of
/// outputs, `P(S | θ, E) <= e^ε P(S | θ, E')` and the reverse. Events are
/// enumerated for at most 12 outputs, single outputs otherwise.
pub fn puff_statement_ii(inst: &PufferfishInstantiation, m: &Mechanism, u: &DataUniverse) -> Result<bool> {
    let table = MechanismTable::new(m, u)?;
    for theta in &inst.attackers {
        for laws in conditioned_laws(theta, &inst.pairs, &table)?.into_iter().flatten() {
            let (a, b) = (laws.0.as_discrete()?, laws.1.as_discrete()?);
            if !dominated(a.weights(), b.weights(), inst.epsilon)
                || !dominated(b.weights(), a.weights(), inst.epsilon)
            {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn dominated(p: &[f64], q: &[f64], eps: f64) -> bool {
    let ok = |ps: f64, qs: f64| is_zero(ps) || (!is_zero(qs) && log_ratio(ps, qs) <= eps + TOL);
    let k = p.len();
    if k <= 12 {
        (1u32..1 << k).all(|mask| {
            let (mut ps, mut qs) = (0.0, 0.0);
            for t in 0..k {
                if mask >> t & 1 == 1 {
                    ps += p[t];
                    qs += q[t];
                }
            }
            ok(ps, qs)
        })
    } else {
        p.iter().zip(q).all(|(&a, &b)| ok(a, b))
    }
}

/// Statement III: `P(t|θ') ∈ I(e^{-δε} P(t|θ), e^{δε} P(t|θ))` whenever
/// `d_{D,S}(θ, θ') = δ < ∞`.
pub fn puff_statement_iii(inst: &PufferfishInstantiation, m: &Mechanism, u: &DataUniverse) -> Result<bool> {
    let table = MechanismTable::new(m, u)?;
    let g = PufferfishGraph::build(inst, 1)?;
    let laws = discrete_laws(inst, &table, &g)?;
    for s in 0..laws.len() {
        let dist = g.distances_from(s);
        for (t, &d) in dist.iter().enumerate() {
            if !d.is_finite() {
                continue;
            }
            let iv = MeasureInterval::centered(&laws[s], radius(inst.epsilon, d));
            if !iv.contains(&laws[t])? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Statement IV: densities against the dominating measure `tau` satisfy
/// `p(t|θ') ∈ p(t|θ) exp(±ε d_{D,S}(θ, θ'))` for connected vertices.
pub fn puff_statement_iv(
    inst: &PufferfishInstantiation,
    m: &Mechanism,
    u: &DataUniverse,
    tau: &[f64],
) -> Result<bool> {
    let table = MechanismTable::new(m, u)?;
    let g = PufferfishGraph::build(inst, 1)?;
    let laws = discrete_laws(inst, &table, &g)?;
    if let Some(first) = laws.first() {
        if tau.len() != first.len() || tau.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidInput(
                "dominating measure needs one positive weight per output".into(),
            ));
        }
    }
    let dens: Vec<Vec<f64>> = laws
        .iter()
        .map(|mu| mu.weights().iter().zip(tau).map(|(w, t)| w / t).collect())
        .collect();
    for s in 0..dens.len() {
        let dist = g.distances_from(s);
        for (t, &d) in dist.iter().enumerate() {
            if !d.is_finite() {
                continue;
            }
            let r = radius(inst.epsilon, d);
            for (&a, &b) in dens[s].iter().zip(&dens[t]) {
                if is_zero(a) && is_zero(b) {
                    continue;
                }
                if is_zero(a) || is_zero(b) || log_ratio(b, a).abs() > r + TOL {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Odds-ratio and density-ratio-neighbourhood checks for every attacker,
/// every well-defined pair and every output of positive probability.
#[derive(Clone, Debug, PartialEq)]
pub struct PosteriorSemantics {
    pub odds_checked: usize,
    pub odds_violations: usize,
    pub max_log_odds_ratio: f64,
    pub drn_checked: usize,
    pub drn_violations: usize,
    pub max_drn: f64,
}

/// Runs [`odds_ratio_check`] and [`drn_membership`] over all outputs of a
/// discrete mechanism.
pub fn posterior_semantics(
    inst: &PufferfishInstantiation,
    partition: &Partition,
    m: &Mechanism,
    u: &DataUniverse,
) -> Result<PosteriorSemantics> {
    let table = MechanismTable::new(m, u)?;
    let eps = inst.epsilon;
    let k = m.output_labels(u)?.len();
    let parts: Vec<Result<PosteriorSemantics>> = inst
        .attackers
        .par_iter()
        .map(|theta| {
            let mut s = PosteriorSemantics {
                odds_checked: 0,
                odds_violations: 0,
                max_log_odds_ratio: 0.0,
                drn_checked: 0,
                drn_violations: 0,
                max_drn: 0.0,
            };
            let marginal = table.privatised(theta)?;
            for t in (0..k).map(Outcome::Discrete) {
                if is_zero(marginal.density(t)?) {
                    continue;
                }
                for pair in &inst.pairs {
                    match odds_ratio_with(theta, &pair.first, &pair.second, &table, t, eps) {
                        Ok((ratio, ok)) => {
                            s.odds_checked += 1;
                            s.max_log_odds_ratio = s.max_log_odds_ratio.max(ratio.ln().abs());
                            if !ok {
                                s.odds_violations += 1;
                            }
                        }
                        Err(Error::IllDefined(_)) => {}
                        Err(e) => return Err(e),
                    }
                }
                let (delta, ok) = drn_with(theta, partition, &table, t, eps)?;
                s.drn_checked += 1;
                s.max_drn = s.max_drn.max(delta);
                if !ok {
                    s.drn_violations += 1;
                }
            }
            Ok(s)
        })
        .collect();
    let mut total = PosteriorSemantics {
        odds_checked: 0,
        odds_violations: 0,
        max_log_odds_ratio: 0.0,
        drn_checked: 0,
        drn_violations: 0,
        max_drn: 0.0,
    };
    for p in parts {
        let p = p?;
        total.odds_checked += p.odds_checked;
        total.odds_violations += p.odds_violations;
        total.max_log_odds_ratio = total.max_log_odds_ratio.max(p.max_log_odds_ratio);
        total.drn_checked += p.drn_checked;
        total.drn_violations += p.drn_violations;
        total.max_drn = total.max_drn.max(p.max_drn);
    }
    Ok(total)
}

/// JSON form of an event: a list of dataset indices, or the record
/// predicate `{"record": i, "value": r}` (zero-based record, alphabet label).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EventConfig {
    Indices(Vec<usize>),
    Record { record: usize, value: Label },
}

impl EventConfig {
    pub fn build(&self, u: &DataUniverse) -> Result<Event> {
        match self {
            EventConfig::Indices(ix) => Event::new(ix.clone(), u),
            EventConfig::Record { record, value } => {
                let r = u
                    .alphabet()
                    .iter()
                    .position(|a| a == &value.0)
                    .ok_or_else(|| Error::InvalidInput(format!("value {:?} not in alphabet", value.0)))?;
                Event::record(u, *record, r as u32)
            }
        }
    }
}

/// JSON form of an attacker: `{"outcomes": [dataset keys], "weights": [...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackerConfig {
    pub outcomes: Vec<String>,
    pub weights: Vec<f64>,
}

/// JSON form of an instantiation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstantiationConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<u32>,
    pub attackers: Vec<AttackerConfig>,
    pub pairs: Vec<(EventConfig, EventConfig)>,
    #[serde(deserialize_with = "crate::config::extended_real")]
    pub epsilon: f64,
}

impl InstantiationConfig {
    pub fn build(&self, u: &DataUniverse) -> Result<PufferfishInstantiation> {
        let attackers = self
            .attackers
            .iter()
            .map(|a| {
                let xs = a
                    .outcomes
                    .iter()
                    .map(|k| u.parse_dataset(k))
                    .collect::<Result<Vec<_>>>()?;
                AttackerPrior::from_measure(&FiniteMeasure::new(xs, a.weights.clone())?, u)
            })
            .collect::<Result<Vec<_>>>()?;
        let pairs = self
            .pairs
            .iter()
            .map(|(a, b)| {
                Ok(ConjecturePair {
                    first: a.build(u)?,
                    second: b.build(u)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        PufferfishInstantiation::new(attackers, pairs, self.epsilon)
    }
}
