//! Data-release mechanisms and their privacy checks.
//!
//! A mechanism maps a dataset to an output law. Discrete mechanisms expose
//! that law as a [`FiniteMeasure`] over output indices `0..k`; the Laplace
//! family exposes a closed-form [`DensityFunction`] on the real line.
//!
//! The checks here work on a materialized universe: every pair of datasets
//! (or every unit pair) is visited.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{
    log_ratio, max_abs_log_ratio, DensityFunction, FiniteMeasure, MeasureInterval, TOL,
};
use crate::sampling;
use crate::universe::{DataUniverse, Dataset, DatasetMode, Distance};

/// A real-valued query on datasets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Query {
    /// Sum of record values (see [`DataUniverse::record_value`]). On `{0,1}^n`
    /// this is the count of ones.
    Sum,
    /// Number of records equal to the given alphabet index.
    CountEqual(u32),
    /// Number of records `|x|`.
    Size,
}

impl Query {
    pub fn eval(&self, u: &DataUniverse, x: &Dataset) -> f64 {
        match self {
            Query::Sum => x.records().iter().map(|&r| u.record_value(r)).sum(),
            Query::CountEqual(v) => x.values().filter(|r| r == v).count() as f64,
            Query::Size => x.len() as f64,
        }
    }
}

/// Largest `|q(x) - q(x')|` over unit-distance pairs, by brute force.
pub fn realized_sensitivity(u: &DataUniverse, q: &Query) -> Result<f64> {
    let list = u.datasets()?;
    let values: Vec<f64> = list.iter().map(|x| q.eval(u, x)).collect();
    Ok(u
        .unit_pairs()?
        .into_iter()
        .map(|(i, j)| (values[i] - values[j]).abs())
        .fold(0.0, f64::max))
}

/// Laplace mechanism `t = q(x) + Lap(b)` with `b = sensitivity / epsilon`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaplaceMechanism {
    pub query: Query,
    pub sensitivity: f64,
    pub epsilon: f64,
}

impl LaplaceMechanism {
    pub fn new(query: Query, sensitivity: f64, epsilon: f64) -> Result<Self> {
        let m = LaplaceMechanism {
            query,
            sensitivity,
            epsilon,
        };
        m.validate()?;
        Ok(m)
    }

    /// Counting query (sum of a binary vector) with sensitivity 1.
    pub fn count(epsilon: f64) -> Result<Self> {
        Self::new(Query::Sum, 1.0, epsilon)
    }

    fn validate(&self) -> Result<()> {
        if !(self.sensitivity > 0.0 && self.sensitivity.is_finite()) {
            return Err(Error::InvalidInput("sensitivity must be positive and finite".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidInput(
                "Laplace epsilon must be positive and finite".into(),
            ));
        }
        Ok(())
    }

    pub fn scale(&self) -> f64 {
        self.sensitivity / self.epsilon
    }

    /// Fails when the declared sensitivity is below the realized one.
    pub fn audit(&self, u: &DataUniverse) -> Result<f64> {
        let realized = realized_sensitivity(u, &self.query)?;
        if realized > self.sensitivity * (1.0 + TOL) + TOL {
            return Err(Error::InvalidInput(format!(
                "declared sensitivity {} is below the realized sensitivity {realized}",
                self.sensitivity
            )));
        }
        Ok(realized)
    }

    pub fn law(&self, u: &DataUniverse, x: &Dataset) -> DensityFunction {
        DensityFunction::Laplace {
            location: self.query.eval(u, x),
            scale: self.scale(),
        }
    }

    /// `p_x(t) = exp(-|t - q(x)| / b) / (2b)`.
    pub fn density(&self, u: &DataUniverse, x: &Dataset, t: f64) -> f64 {
        self.law(u, x).density(t)
    }
}

/// Laplace noise added to a count clamped to `[a0, a1]`; the sensitivity is
/// `a1 - a0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClampedCountLaplace {
    pub a0: i64,
    pub a1: i64,
    pub epsilon: f64,
}

impl ClampedCountLaplace {
    pub fn new(a0: i64, a1: i64, epsilon: f64) -> Result<Self> {
        if a0 >= a1 {
            return Err(Error::InvalidInput("clamp range needs a0 < a1".into()));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidInput(
                "Laplace epsilon must be positive and finite".into(),
            ));
        }
        Ok(ClampedCountLaplace { a0, a1, epsilon })
    }

    pub fn sensitivity(&self) -> f64 {
        (self.a1 - self.a0) as f64
    }

    pub fn scale(&self) -> f64 {
        self.sensitivity() / self.epsilon
    }

    pub fn clamp(&self, count: f64) -> f64 {
        count.clamp(self.a0 as f64, self.a1 as f64)
    }

    pub fn law_at(&self, count: f64) -> DensityFunction {
        DensityFunction::Laplace {
            location: self.clamp(count),
            scale: self.scale(),
        }
    }

    pub fn law(&self, u: &DataUniverse, x: &Dataset) -> DensityFunction {
        self.law_at(Query::Sum.eval(u, x))
    }
}

/// Randomized response on binary record vectors: each bit is flipped
/// independently with probability `1 / (e^eps + 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomizedResponse {
    pub epsilon: f64,
}

impl RandomizedResponse {
    pub fn new(epsilon: f64) -> Result<Self> {
        if epsilon.is_nan() || epsilon < 0.0 {
            return Err(Error::InvalidInput("epsilon must be nonnegative".into()));
        }
        Ok(RandomizedResponse { epsilon })
    }

    pub fn flip_probability(&self) -> f64 {
        1.0 / (self.epsilon.exp() + 1.0)
    }

    /// Output law for `x` over `{0,1}^|x|`, outcomes in lexicographic order
    /// (first record most significant).
    pub fn distribution_for(&self, x: &Dataset) -> Result<FiniteMeasure<Dataset>> {
        let n = x.len();
        check_binary(x)?;
        if n > 24 {
            return Err(Error::Resource {
                size: 1u128 << n,
                cap: 1 << 24,
            });
        }
        let outcomes: Vec<Dataset> = (0..1u64 << n)
            .map(|v| Dataset::vector((0..n).map(|i| ((v >> (n - 1 - i)) & 1) as u32)))
            .collect();
        let weights = self.block_weights(x);
        FiniteMeasure::probability(outcomes, weights)
    }

    fn block_weights(&self, x: &Dataset) -> Vec<f64> {
        let n = x.len();
        let p = self.flip_probability();
        let xb = bits_of(x);
        (0..1u64 << n)
            .map(|v| {
                let k = (v ^ xb).count_ones() as i32;
                p.powi(k) * (1.0 - p).powi(n as i32 - k)
            })
            .collect()
    }
}

fn check_binary(x: &Dataset) -> Result<()> {
    if x.mode() != DatasetMode::Vector || x.values().any(|r| r > 1) {
        return Err(Error::InvalidInput(format!(
            "randomized response needs a binary vector, got {x}"
        )));
    }
    Ok(())
}

fn bits_of(x: &Dataset) -> u64 {
    x.values().fold(0u64, |acc, b| (acc << 1) | b as u64)
}

/// An explicit discrete mechanism: one output law per universe dataset, in
/// the universe's dataset order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableMechanism {
    pub outputs: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl TableMechanism {
    pub fn new(outputs: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            if row.len() != outputs.len() {
                return Err(Error::InvalidInput(format!(
                    "row {i} has {} weights for {} outputs",
                    row.len(),
                    outputs.len()
                )));
            }
            let total: f64 = row.iter().sum();
            if row.iter().any(|w| !w.is_finite() || *w < 0.0) || (total - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidInput(format!("row {i} is not a probability vector")));
            }
        }
        Ok(TableMechanism { outputs, rows })
    }

    fn check_universe(&self, u: &DataUniverse) -> Result<()> {
        if self.rows.len() as u128 != u.size() {
            return Err(Error::InvalidInput(format!(
                "table has {} rows but the universe has {} datasets",
                self.rows.len(),
                u.size()
            )));
        }
        Ok(())
    }
}

/// A release mechanism.
#[derive(Clone, Debug, PartialEq)]
pub enum Mechanism {
    Laplace(LaplaceMechanism),
    ClampedCount(ClampedCountLaplace),
    RandomizedResponse(RandomizedResponse),
    Table(TableMechanism),
    /// Publishes the dataset itself.
    Identity,
    /// Publishes a fixed symbol regardless of the data.
    Constant,
    /// Publishes the connected component of the data alongside the inner
    /// mechanism's (discrete) output.
    ComponentAugmented(Box<Mechanism>),
}

/// One output value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Outcome {
    /// Index into [`Mechanism::output_labels`].
    Discrete(usize),
    Real(f64),
}

impl Mechanism {
    pub fn is_discrete(&self) -> bool {
        match self {
            Mechanism::Laplace(_) | Mechanism::ClampedCount(_) => false,
            Mechanism::ComponentAugmented(inner) => inner.is_discrete(),
            _ => true,
        }
    }

    /// The privacy parameter the mechanism was built with, when it has one.
    pub fn epsilon(&self) -> Option<f64> {
        match self {
            Mechanism::Laplace(m) => Some(m.epsilon),
            Mechanism::ClampedCount(m) => Some(m.epsilon),
            Mechanism::RandomizedResponse(m) => Some(m.epsilon),
            Mechanism::Constant => Some(0.0),
            Mechanism::ComponentAugmented(inner) => inner.epsilon(),
            _ => None,
        }
    }

    /// Same mechanism with a different privacy parameter.
    pub fn with_epsilon(&self, eps: f64) -> Result<Self> {
        Ok(match self {
            Mechanism::Laplace(m) => {
                Mechanism::Laplace(LaplaceMechanism::new(m.query.clone(), m.sensitivity, eps)?)
            }
            Mechanism::ClampedCount(m) => {
                Mechanism::ClampedCount(ClampedCountLaplace::new(m.a0, m.a1, eps)?)
            }
            Mechanism::RandomizedResponse(_) => {
                Mechanism::RandomizedResponse(RandomizedResponse::new(eps)?)
            }
            Mechanism::ComponentAugmented(inner) => {
                Mechanism::ComponentAugmented(Box::new(inner.with_epsilon(eps)?))
            }
            other => {
                return Err(Error::Unsupported(format!(
                    "{} has no privacy parameter",
                    other.name()
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Mechanism::Laplace(_) => "laplace",
            Mechanism::ClampedCount(_) => "clamped_count",
            Mechanism::RandomizedResponse(_) => "rr",
            Mechanism::Table(_) => "table",
            Mechanism::Identity => "identity",
            Mechanism::Constant => "constant",
            Mechanism::ComponentAugmented(_) => "augmented",
        }
    }

    fn require_discrete(&self) -> Result<()> {
        if self.is_discrete() {
            Ok(())
        } else {
            Err(Error::Unsupported(format!(
                "{} has a continuous output space",
                self.name()
            )))
        }
    }

    /// Labels of the finite output space.
    pub fn output_labels(&self, u: &DataUniverse) -> Result<Vec<String>> {
        self.require_discrete()?;
        Ok(match self {
            Mechanism::RandomizedResponse(_) => {
                let mut out = Vec::new();
                for n in rr_lengths(u)? {
                    for v in 0..1u64 << n {
                        out.push((0..n).map(|i| if (v >> (n - 1 - i)) & 1 == 1 { '1' } else { '0' }).collect());
                    }
                }
                out
            }
            Mechanism::Table(t) => {
                t.check_universe(u)?;
                t.outputs.clone()
            }
            Mechanism::Identity => u.datasets()?.iter().map(|x| u.format_dataset(x)).collect(),
            Mechanism::Constant => vec!["*".to_string()],
            Mechanism::ComponentAugmented(inner) => {
                let inner_labels = inner.output_labels(u)?;
                let ncomp = u.connected_components()?.len();
                let mut out = Vec::with_capacity(ncomp * inner_labels.len());
                for c in 0..ncomp {
                    for l in &inner_labels {
                        out.push(format!("{c}:{l}"));
                    }
                }
                out
            }
            Mechanism::Laplace(_) | Mechanism::ClampedCount(_) => unreachable!(),
        })
    }

    /// Exact output law of a discrete mechanism at `x`, over output indices.
    pub fn distribution(&self, u: &DataUniverse, x: &Dataset) -> Result<FiniteMeasure<usize>> {
        let weights = self.distribution_weights(u, x)?;
        let k = weights.len();
        FiniteMeasure::probability((0..k).collect(), weights)
    }

    fn distribution_weights(&self, u: &DataUniverse, x: &Dataset) -> Result<Vec<f64>> {
        self.require_discrete()?;
        if !u.contains(x) {
            return Err(Error::NotInUniverse(x.to_string()));
        }
        Ok(match self {
            Mechanism::RandomizedResponse(rr) => {
                check_binary(x)?;
                let lengths = rr_lengths(u)?;
                let total: usize = lengths.iter().map(|&n| 1usize << n).sum();
                let mut w = vec![0.0; total];
                let mut offset = 0;
                for n in lengths {
                    if n == x.len() {
                        w[offset..offset + (1 << n)].copy_from_slice(&rr.block_weights(x));
                    }
                    offset += 1 << n;
                }
                w
            }
            Mechanism::Table(t) => {
                t.check_universe(u)?;
                let i = u.index_of(x).ok_or_else(|| Error::NotInUniverse(x.to_string()))?;
                t.rows[i].clone()
            }
            Mechanism::Identity => {
                let n = u.datasets()?.len();
                let i = u.index_of(x).ok_or_else(|| Error::NotInUniverse(x.to_string()))?;
                let mut w = vec![0.0; n];
                w[i] = 1.0;
                w
            }
            Mechanism::Constant => vec![1.0],
            Mechanism::ComponentAugmented(inner) => {
                let inner_w = inner.distribution_weights(u, x)?;
                let labels = u.component_labels()?;
                let ncomp = labels.iter().max().map_or(0, |m| m + 1);
                let c = labels[u.index_of(x).unwrap()];
                let k = inner_w.len();
                let mut w = vec![0.0; ncomp * k];
                w[c * k..(c + 1) * k].copy_from_slice(&inner_w);
                w
            }
            Mechanism::Laplace(_) | Mechanism::ClampedCount(_) => unreachable!(),
        })
    }

    /// Output laws for every dataset of the universe, in dataset order.
    pub fn distribution_table(&self, u: &DataUniverse) -> Result<Vec<FiniteMeasure<usize>>> {
        u.datasets()?.iter().map(|x| self.distribution(u, x)).collect()
    }

    /// Closed-form output density of a continuous mechanism at `x`.
    pub fn law(&self, u: &DataUniverse, x: &Dataset) -> Result<DensityFunction> {
        if !u.contains(x) {
            return Err(Error::NotInUniverse(x.to_string()));
        }
        match self {
            Mechanism::Laplace(m) => Ok(m.law(u, x)),
            Mechanism::ClampedCount(m) => Ok(m.law(u, x)),
            other => Err(Error::Unsupported(format!(
                "{} has no closed-form density on the real line",
                other.name()
            ))),
        }
    }

    /// Density of the output law at `x` evaluated at `t` (probability mass for
    /// discrete mechanisms).
    pub fn density(&self, u: &DataUniverse, x: &Dataset, t: Outcome) -> Result<f64> {
        match t {
            Outcome::Real(t) => Ok(self.law(u, x)?.density(t)),
            Outcome::Discrete(k) => {
                let w = self.distribution_weights(u, x)?;
                w.get(k)
                    .copied()
                    .ok_or_else(|| Error::InvalidInput(format!("output index {k} out of range")))
            }
        }
    }

    /// `sup_t |ln p_x(t) - ln p_y(t)|` together with an outcome attaining it.
    pub fn pair_loss(
        &self,
        u: &DataUniverse,
        x: &Dataset,
        y: &Dataset,
    ) -> Result<(f64, Option<Outcome>)> {
        if self.is_discrete() {
            let a = self.distribution_weights(u, x)?;
            let b = self.distribution_weights(u, y)?;
            let (d, k) = max_abs_log_ratio(&a, &b);
            Ok((d, k.map(Outcome::Discrete)))
        } else {
            let (fx, fy) = (self.law(u, x)?, self.law(u, y)?);
            let d = fx.mult_distance(&fy);
            let DensityFunction::Laplace { location: lx, .. } = fx;
            let DensityFunction::Laplace { location: ly, .. } = fy;
            // any t outside the segment between the locations attains the sup
            Ok((d, Some(Outcome::Real(lx.max(ly) + 1.0))))
        }
    }

    /// One draw from the output law at `x`, deterministic in `(seed, x)`.
    pub fn sample(&self, u: &DataUniverse, x: &Dataset, seed: u64) -> Result<Outcome> {
        self.sample_draw(u, x, seed, 0)
    }

    /// Draw number `draw` of the stream keyed by `(seed, x)`; see
    /// [`crate::sampling`].
    pub fn sample_draw(&self, u: &DataUniverse, x: &Dataset, seed: u64, draw: u64) -> Result<Outcome> {
        let v = sampling::uniform(seed, Some(x), draw);
        if self.is_discrete() {
            let w = self.distribution_weights(u, x)?;
            Ok(Outcome::Discrete(inverse_cdf(&w, v)))
        } else {
            Ok(Outcome::Real(self.law(u, x)?.quantile(v)))
        }
    }

    /// Largest `|q(x) - q(x')|` audit for Laplace mechanisms; a no-op for the
    /// others.
    pub fn audit(&self, u: &DataUniverse) -> Result<()> {
        if let Mechanism::Laplace(m) = self {
            m.audit(u)?;
        }
        Ok(())
    }
}

pub(crate) fn inverse_cdf(weights: &[f64], v: f64) -> usize {
    let total: f64 = weights.iter().sum();
    let target = v * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        last = i;
        acc += w;
        if target < acc {
            return i;
        }
    }
    last
}

fn rr_lengths(u: &DataUniverse) -> Result<Vec<usize>> {
    if u.mode() != DatasetMode::Vector || u.alphabet().len() != 2 {
        return Err(Error::InvalidInput(
            "randomized response needs a vector universe over a two-letter alphabet".into(),
        ));
    }
    let lengths = match u.product_lengths() {
        Some(l) => l,
        None => {
            let mut l: Vec<usize> = u.datasets()?.iter().map(Dataset::len).collect();
            l.sort_unstable();
            l.dedup();
            l
        }
    };
    let total: u128 = lengths.iter().map(|&n| 1u128 << n.min(100)).sum();
    if lengths.iter().any(|&n| n > 24) || total > crate::universe::DEFAULT_MAX_DATASETS as u128 {
        return Err(Error::Resource {
            size: total,
            cap: crate::universe::DEFAULT_MAX_DATASETS,
        });
    }
    Ok(lengths)
}

/// A pair of datasets with the loss between their output laws.
#[derive(Clone, Debug, PartialEq)]
pub struct PairWitness {
    pub x: Dataset,
    pub y: Dataset,
    pub distance: Distance,
    pub loss: f64,
    pub outcome: Option<Outcome>,
}

/// Result of an ε-DP verification over unit-distance pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct DpReport {
    pub epsilon: f64,
    pub satisfied: bool,
    /// Largest loss over unit pairs: the smallest ε the mechanism satisfies.
    pub min_epsilon: f64,
    pub pairs_checked: usize,
    /// First violating unit pair, in dataset order.
    pub witness: Option<PairWitness>,
}

fn unit_pair_losses(
    m: &Mechanism,
    u: &DataUniverse,
) -> Result<Vec<(usize, usize, f64, Option<Outcome>)>> {
    m.audit(u)?;
    let list = u.datasets()?;
    let pairs = u.unit_pairs()?;
    if m.is_discrete() {
        let table = m.distribution_table(u)?;
        Ok(pairs
            .into_iter()
            .map(|(i, j)| {
                let (d, k) = max_abs_log_ratio(table[i].weights(), table[j].weights());
                (i, j, d, k.map(Outcome::Discrete))
            })
            .collect())
    } else {
        pairs
            .into_iter()
            .map(|(i, j)| {
                let (d, t) = m.pair_loss(u, &list[i], &list[j])?;
                Ok((i, j, d, t))
            })
            .collect()
    }
}

/// Checks `d_Mult(P_x, P_x') <= eps` on every unit-distance pair.
pub fn verify_eps_dp(m: &Mechanism, u: &DataUniverse, eps: f64) -> Result<DpReport> {
    check_eps(eps)?;
    let losses = unit_pair_losses(m, u)?;
    let list = u.datasets()?;
    let min_epsilon = losses.iter().map(|l| l.2).fold(0.0, f64::max);
    let witness = losses
        .iter()
        .find(|l| l.2 > eps + TOL)
        .map(|&(i, j, loss, outcome)| PairWitness {
            x: list[i].clone(),
            y: list[j].clone(),
            distance: Distance::Finite(1),
            loss,
            outcome,
        });
    Ok(DpReport {
        epsilon: eps,
        satisfied: witness.is_none(),
        min_epsilon,
        pairs_checked: losses.len(),
        witness,
    })
}

/// Smallest ε for which the mechanism is ε-DP on the universe.
pub fn min_epsilon(m: &Mechanism, u: &DataUniverse) -> Result<f64> {
    Ok(unit_pair_losses(m, u)?
        .iter()
        .map(|l| l.2)
        .fold(0.0, f64::max))
}

/// Result of a group-privacy check over all connected pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupReport {
    pub epsilon: f64,
    pub satisfied: bool,
    pub pairs_checked: usize,
    /// Largest `loss / d` over connected pairs at distance at least one.
    pub worst_ratio: f64,
    pub witness: Option<PairWitness>,
}

/// Checks `d_Mult(P_x, P_x') <= d(x, x') * eps` on every pair; pairs in
/// different components are unconstrained.
pub fn group_privacy_check(m: &Mechanism, u: &DataUniverse, eps: f64) -> Result<GroupReport> {
    check_eps(eps)?;
    m.audit(u)?;
    let list = u.datasets()?;
    let dist = u.distance_matrix()?;
    let table = if m.is_discrete() {
        Some(m.distribution_table(u)?)
    } else {
        None
    };
    let mut report = GroupReport {
        epsilon: eps,
        satisfied: true,
        pairs_checked: 0,
        worst_ratio: 0.0,
        witness: None,
    };
    for i in 0..list.len() {
        for j in (i + 1)..list.len() {
            let Distance::Finite(d) = dist[i][j] else {
                continue;
            };
            let (loss, outcome) = match &table {
                Some(t) => {
                    let (l, k) = max_abs_log_ratio(t[i].weights(), t[j].weights());
                    (l, k.map(Outcome::Discrete))
                }
                None => m.pair_loss(u, &list[i], &list[j])?,
            };
            report.pairs_checked += 1;
            if d > 0 {
                report.worst_ratio = report.worst_ratio.max(loss / d as f64);
            }
            if report.witness.is_none() && loss > bound(eps, d) + TOL {
                report.satisfied = false;
                report.witness = Some(PairWitness {
                    x: list[i].clone(),
                    y: list[j].clone(),
                    distance: dist[i][j],
                    loss,
                    outcome,
                });
            }
        }
    }
    Ok(report)
}

fn check_eps(eps: f64) -> Result<()> {
    if eps.is_nan() || eps < 0.0 {
        return Err(Error::InvalidInput("epsilon must be nonnegative".into()));
    }
    Ok(())
}

/// `eps * d` with `inf * 0 = 0`: at distance zero the laws coincide.
fn bound(eps: f64, d: u64) -> f64 {
    if d == 0 {
        0.0
    } else {
        eps * d as f64
    }
}

/// Statement I: the Lipschitz condition `d_Mult(P_x, P_x') <= eps d(x, x')`
/// on every pair of datasets.
pub fn dp_statement_i(m: &Mechanism, u: &DataUniverse, eps: f64) -> Result<bool> {
    Ok(group_privacy_check(m, u, eps)?.satisfied)
}

/// Statement II: `P_x'(S) <= e^eps P_x(S)` for every event `S` and every
/// unit pair, both orders. Events are enumerated explicitly for output spaces
/// of at most 12 outcomes; larger spaces are checked on single outcomes,
/// which is equivalent because a ratio of sums is at most the largest ratio
/// of its terms.
pub fn dp_statement_ii(m: &Mechanism, u: &DataUniverse, eps: f64) -> Result<bool> {
    check_eps(eps)?;
    m.require_discrete()?;
    let table = m.distribution_table(u)?;
    for (i, j) in u.unit_pairs()? {
        for (a, b) in [(&table[i], &table[j]), (&table[j], &table[i])] {
            if !events_dominated(b.weights(), a.weights(), eps) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Whether `p(S) <= e^eps q(S)` for every event `S`.
fn events_dominated(p: &[f64], q: &[f64], eps: f64) -> bool {
    let k = p.len();
    let ok = |ps: f64, qs: f64| {
        if ps <= 0.0 {
            return true;
        }
        if qs <= 0.0 {
            return false;
        }
        log_ratio(ps, qs) <= eps + TOL
    };
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

/// Statement III: `P_x'` lies in `[e^{-δ eps} P_x, e^{δ eps} P_x]` for every
/// pair at finite distance `δ`.
pub fn dp_statement_iii(m: &Mechanism, u: &DataUniverse, eps: f64) -> Result<bool> {
    check_eps(eps)?;
    m.require_discrete()?;
    let table = m.distribution_table(u)?;
    let dist = u.distance_matrix()?;
    for i in 0..table.len() {
        for j in 0..table.len() {
            if let Distance::Finite(d) = dist[i][j] {
                let iv = MeasureInterval::centered(&table[i], bound(eps, d));
                if !iv.contains(&table[j])? {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Statement IV: with densities taken against the dominating measure `tau`
/// (one positive weight per output), `p_x'(t)` lies within
/// `p_x(t) exp(±eps d(x, x'))` for every connected pair and every `t`.
pub fn dp_statement_iv(m: &Mechanism, u: &DataUniverse, eps: f64, tau: &[f64]) -> Result<bool> {
    check_eps(eps)?;
    m.require_discrete()?;
    let table = m.distribution_table(u)?;
    if let Some(first) = table.first() {
        if tau.len() != first.len() || tau.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidInput(
                "dominating measure needs one positive weight per output".into(),
            ));
        }
    }
    let densities: Vec<Vec<f64>> = table
        .iter()
        .map(|mu| mu.weights().iter().zip(tau).map(|(w, t)| w / t).collect())
        .collect();
    let dist = u.distance_matrix()?;
    for i in 0..densities.len() {
        for j in 0..densities.len() {
            let Distance::Finite(d) = dist[i][j] else {
                continue;
            };
            let r = bound(eps, d);
            for (&px, &py) in densities[i].iter().zip(&densities[j]) {
                if px <= 0.0 && py <= 0.0 {
                    continue;
                }
                if px <= 0.0 || py <= 0.0 || log_ratio(py, px).abs() > r + TOL {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// JSON form of a mechanism.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MechanismConfig {
    Laplace {
        #[serde(default = "default_query")]
        query: Query,
        #[serde(default = "one")]
        sensitivity: f64,
        #[serde(deserialize_with = "crate::config::extended_real")]
        epsilon: f64,
    },
    #[serde(alias = "randomized_response")]
    Rr {
        #[serde(deserialize_with = "crate::config::extended_real")]
        epsilon: f64,
    },
    ClampedCount {
        a0: i64,
        a1: i64,
        #[serde(deserialize_with = "crate::config::extended_real")]
        epsilon: f64,
    },
    Table { outputs: Vec<String>, rows: Vec<Vec<f64>> },
    Identity,
    Constant,
    Augmented { inner: Box<MechanismConfig> },
}

fn default_query() -> Query {
    Query::Sum
}

fn one() -> f64 {
    1.0
}

impl TryFrom<&MechanismConfig> for Mechanism {
    type Error = Error;

    fn try_from(c: &MechanismConfig) -> Result<Self> {
        Ok(match c {
            MechanismConfig::Laplace {
                query,
                sensitivity,
                epsilon,
            } => Mechanism::Laplace(LaplaceMechanism::new(query.clone(), *sensitivity, *epsilon)?),
            MechanismConfig::Rr { epsilon } => {
                Mechanism::RandomizedResponse(RandomizedResponse::new(*epsilon)?)
            }
            MechanismConfig::ClampedCount { a0, a1, epsilon } => {
                Mechanism::ClampedCount(ClampedCountLaplace::new(*a0, *a1, *epsilon)?)
            }
            MechanismConfig::Table { outputs, rows } => {
                Mechanism::Table(TableMechanism::new(outputs.clone(), rows.clone())?)
            }
            MechanismConfig::Identity => Mechanism::Identity,
            MechanismConfig::Constant => Mechanism::Constant,
            MechanismConfig::Augmented { inner } => {
                Mechanism::ComponentAugmented(Box::new(Mechanism::try_from(inner.as_ref())?))
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn rr(eps: f64) -> Mechanism {
        Mechanism::RandomizedResponse(RandomizedResponse::new(eps).unwrap())
    }

    #[test]
    fn laplace_density_examples() {
        let u = DataUniverse::binary(3);
        let m = LaplaceMechanism::count(0.1).unwrap();
        let x = Dataset::vector([1, 1, 0]);
        assert!((m.density(&u, &x, 2.0) - 0.05).abs() < 1e-15);
        let b = m.scale();
        assert!((m.density(&u, &x, 2.0 + b) - 0.05 / E).abs() < 1e-15);
        assert!((m.density(&u, &x, 2.0 - b) - 0.05 / E).abs() < 1e-15);
        // midpoint rule over [-400, 400] with step 0.01
        let h = 0.01;
        let mass: f64 = (0..80_000)
            .map(|k| m.density(&u, &x, -400.0 + (k as f64 + 0.5) * h) * h)
            .sum();
        assert!((mass - 1.0).abs() < 1e-6);
    }

    #[test]
    fn rr_distribution_examples() {
        let m = RandomizedResponse::new(1.0).unwrap();
        let d = m.distribution_for(&Dataset::vector([0])).unwrap();
        assert!((d.weight(0) - E / (E + 1.0)).abs() < 1e-15);
        assert!((d.weight(1) - 1.0 / (E + 1.0)).abs() < 1e-15);
        let d2 = m.distribution_for(&Dataset::vector([0, 0])).unwrap();
        let p = m.flip_probability();
        assert!((d2.weight_of(&Dataset::vector([1, 1])) - p * p).abs() < 1e-15);
        assert!((d2.total() - 1.0).abs() < 1e-15);
        assert!(m.distribution_for(&Dataset::vector([0, 2])).is_err());
    }

    #[test]
    fn rr_output_space_matches_universe_order() {
        let u = DataUniverse::binary(2);
        let m = rr(1.0);
        let labels = m.output_labels(&u).unwrap();
        assert_eq!(labels, vec!["00", "01", "10", "11"]);
        for (i, x) in u.datasets().unwrap().iter().enumerate() {
            assert_eq!(u.format_dataset(x), labels[i]);
        }
    }

    #[test]
    fn verify_examples() {
        for n in 1..=3 {
            let u = DataUniverse::binary(n);
            let r = verify_eps_dp(&rr(1.0), &u, 1.0).unwrap();
            assert!(r.satisfied);
            assert!((r.min_epsilon - 1.0).abs() < 1e-12);
            let r = verify_eps_dp(&rr(1.0), &u, 0.99).unwrap();
            assert!(!r.satisfied);
            let w = r.witness.unwrap();
            assert_eq!(u.distance(&w.x, &w.y).unwrap(), Distance::Finite(1));
            assert!((w.loss - 1.0).abs() < 1e-12);
            assert!(w.outcome.is_some());
        }
        let u = DataUniverse::binary(2);
        assert!(verify_eps_dp(&Mechanism::Constant, &u, 0.0).unwrap().satisfied);
    }

    #[test]
    fn min_epsilon_examples() {
        let u = DataUniverse::binary(3);
        assert!((min_epsilon(&rr(1.0), &u).unwrap() - 1.0).abs() < 1e-12);
        let lap = Mechanism::Laplace(LaplaceMechanism::count(0.2).unwrap());
        assert!((min_epsilon(&lap, &u).unwrap() - 0.2).abs() < 1e-12);
        assert_eq!(min_epsilon(&Mechanism::Identity, &u).unwrap(), f64::INFINITY);
    }

    #[test]
    fn understated_sensitivity_is_rejected() {
        let u = DataUniverse::hamming_product(["0", "1", "2"], [2]).unwrap();
        let lap = Mechanism::Laplace(LaplaceMechanism::new(Query::Sum, 1.0, 1.0).unwrap());
        assert!(matches!(verify_eps_dp(&lap, &u, 1.0), Err(Error::InvalidInput(_))));
        let ok = Mechanism::Laplace(LaplaceMechanism::new(Query::Sum, 2.0, 1.0).unwrap());
        assert!(verify_eps_dp(&ok, &u, 1.0).unwrap().satisfied);
    }

    #[test]
    fn group_privacy_examples() {
        let u = DataUniverse::binary(3);
        let m = rr(1.0);
        let x = Dataset::vector([0, 0, 0]);
        let y = Dataset::vector([1, 1, 1]);
        let (loss, _) = m.pair_loss(&u, &x, &y).unwrap();
        assert!((loss - 3.0).abs() < 1e-12);
        assert_eq!(m.pair_loss(&u, &x, &x).unwrap().0, 0.0);
        let rep = group_privacy_check(&m, &u, 1.0).unwrap();
        assert!(rep.satisfied);
        assert!((rep.worst_ratio - 1.0).abs() < 1e-12);

        // unconnected pairs are unconstrained
        let two = DataUniverse::hamming_product(["0", "1"], [1, 2]).unwrap();
        let rep = group_privacy_check(&Mechanism::Identity, &two, 0.0);
        assert!(!rep.unwrap().satisfied);
        let table = Mechanism::Table(
            TableMechanism::new(
                vec!["a".into(), "b".into()],
                vec![
                    vec![1.0, 0.0],
                    vec![1.0, 0.0],
                    vec![0.0, 1.0],
                    vec![0.0, 1.0],
                    vec![0.0, 1.0],
                    vec![0.0, 1.0],
                ],
            )
            .unwrap(),
        );
        assert!(group_privacy_check(&table, &two, 0.0).unwrap().satisfied);
    }

    #[test]
    fn sampling_is_deterministic_and_matches_the_law() {
        let u = DataUniverse::binary(1);
        let m = rr(1.0);
        let x = Dataset::vector([0]);
        assert_eq!(m.sample(&u, &x, 5).unwrap(), m.sample(&u, &x, 5).unwrap());
        let n = 100_000;
        let flips = (0..n)
            .filter(|&k| m.sample_draw(&u, &x, 11, k).unwrap() == Outcome::Discrete(1))
            .count() as f64;
        let p = 1.0 / (E + 1.0);
        let sd = (p * (1.0 - p) / n as f64).sqrt();
        assert!((flips / n as f64 - p).abs() < 3.0 * sd);

        let lap = Mechanism::Laplace(LaplaceMechanism::count(1.0).unwrap());
        let u3 = DataUniverse::binary(3);
        let y = Dataset::vector([1, 1, 0]);
        let mean = (0..n)
            .map(|k| match lap.sample_draw(&u3, &y, 3, k).unwrap() {
                Outcome::Real(t) => t,
                _ => unreachable!(),
            })
            .sum::<f64>()
            / n as f64;
        // Laplace(b = 1) has variance 2
        assert!((mean - 2.0).abs() < 3.0 * (2.0 / n as f64).sqrt());
    }

    #[test]
    fn statements_agree_on_rr() {
        let u = DataUniverse::binary(2);
        let m = rr(1.0);
        let tau = [0.3, 1.0, 2.5, 0.7];
        for eps in [0.9, 1.0, 1.1] {
            let want = eps >= 1.0;
            assert_eq!(dp_statement_i(&m, &u, eps).unwrap(), want);
            assert_eq!(dp_statement_ii(&m, &u, eps).unwrap(), want);
            assert_eq!(dp_statement_iii(&m, &u, eps).unwrap(), want);
            assert_eq!(dp_statement_iv(&m, &u, eps, &tau).unwrap(), want);
        }
    }

    #[test]
    fn augmented_mechanism_reveals_component_only() {
        let u = DataUniverse::hamming_product(["0", "1"], [1, 2]).unwrap();
        let m = Mechanism::ComponentAugmented(Box::new(rr(1.0)));
        let labels = m.output_labels(&u).unwrap();
        assert_eq!(labels.len(), 2 * 6);
        let r = verify_eps_dp(&m, &u, 1.0).unwrap();
        assert!(r.satisfied);
        assert!((r.min_epsilon - 1.0).abs() < 1e-12);
    }

    #[test]
    fn config_json() {
        let c: MechanismConfig =
            serde_json::from_str(r#"{"type":"laplace","query":"sum","sensitivity":1,"epsilon":0.1}"#)
                .unwrap();
        let m = Mechanism::try_from(&c).unwrap();
        assert_eq!(m.epsilon(), Some(0.1));
        let c: MechanismConfig = serde_json::from_str(r#"{"type":"rr","epsilon":1}"#).unwrap();
        assert_eq!(Mechanism::try_from(&c).unwrap(), rr(1.0));
        let c: MechanismConfig =
            serde_json::from_str(r#"{"type":"clamped_count","a0":6,"a1":0,"epsilon":1}"#).unwrap();
        assert!(Mechanism::try_from(&c).is_err());
        let c: MechanismConfig =
            serde_json::from_str(r#"{"type":"laplace","query":{"count_equal":1},"epsilon":1}"#)
                .unwrap();
        assert!(Mechanism::try_from(&c).is_ok());
    }
}
