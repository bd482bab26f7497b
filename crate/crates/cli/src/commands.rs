use std::collections::BTreeMap;

use dp_bounds::config::{extended_real, extended_real_opt};
use dp_bounds::inference::{
    power_bounds_two_sided, posterior_bounds, rr_marginal_bounds, testing_distance, DataModel, EnvelopeScanner,
    ModelConfig,
};
use dp_bounds::mechanisms::{min_epsilon, verify_eps_dp, MechanismConfig};
use dp_bounds::oracles::{exact_np_power, laplace_np_power, PrivateCount, QuadratureGrid, Rule};
use dp_bounds::pufferfish::{
    dp_correspondence_instantiation, posterior_semantics, pufferfish_satisfied, sample_product_priors,
    InstantiationConfig, Partition,
};
use dp_bounds::universe::UniverseConfig;
use dp_bounds::{DataUniverse, Distance, Error, FiniteMeasure, Mechanism, Outcome};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::config::{typed, CliError};
use crate::output::{number, sig12, Cell, Table};
use crate::{Command, Options};

pub struct CommandOutput {
    pub table: Table,
    pub summary: Option<String>,
    pub passed: bool,
}

impl CommandOutput {
    fn data(table: Table) -> Self {
        CommandOutput {
            table,
            summary: None,
            passed: true,
        }
    }
}

pub fn dispatch(cmd: Command, cfg: &Value, opts: &Options) -> Result<CommandOutput, CliError> {
    match cmd {
        Command::VerifyDp => verify_dp(typed(cfg)?, opts),
        Command::MarginalBounds => marginal_bounds(typed(cfg)?, opts),
        Command::RrBounds => rr_bounds(typed(cfg)?, opts),
        Command::PosteriorBounds => posterior(typed(cfg)?, opts),
        Command::PowerBounds => power(typed(cfg)?, opts),
        Command::PufferfishCheck => pufferfish(typed(cfg)?, opts),
    }
}

/// A real that may be "inf" in JSON.
#[derive(Deserialize, Clone, Copy, Debug)]
#[serde(transparent)]
struct Ext(#[serde(deserialize_with = "extended_real")] f64);

fn distance(v: f64) -> Result<Distance, CliError> {
    if v == f64::INFINITY {
        Ok(Distance::Infinite)
    } else if v >= 0.0 && v.fract() == 0.0 {
        Ok(Distance::Finite(v as u64))
    } else {
        Err(CliError::Config(format!("distance {v} is not a nonnegative integer or \"inf\"")))
    }
}

fn distance_cell(d: Distance) -> Cell {
    match d.finite() {
        Some(n) => Cell::Int(n),
        None => Cell::Text("inf".into()),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Grid {
    from: f64,
    to: f64,
    step: f64,
}

impl Grid {
    fn points(&self) -> Result<Vec<f64>, CliError> {
        if !(self.step > 0.0 && self.to >= self.from && self.from.is_finite() && self.to.is_finite()) {
            return Err(CliError::Config("grid needs finite from <= to and step > 0".into()));
        }
        let n = ((self.to - self.from) / self.step + 1e-9).floor() as usize;
        Ok((0..=n).map(|k| self.from + k as f64 * self.step).collect())
    }
}

fn build(universe: &UniverseConfig, mechanism: &MechanismConfig) -> Result<(DataUniverse, Mechanism), CliError> {
    let u = DataUniverse::try_from(universe)?;
    let m = Mechanism::try_from(mechanism)?;
    Ok((u, m))
}

fn outcome_cell(m: &Mechanism, u: &DataUniverse, o: Option<Outcome>) -> Result<Cell, CliError> {
    Ok(match o {
        None => Cell::Empty,
        Some(Outcome::Real(t)) => Cell::Text(sig12(t)),
        Some(Outcome::Discrete(k)) => Cell::Text(m.output_labels(u)?.swap_remove(k)),
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VerifyConfig {
    #[serde(default)]
    #[allow(dead_code)]
    schema: Option<u32>,
    universe: UniverseConfig,
    mechanism: MechanismConfig,
    #[serde(default, deserialize_with = "extended_real_opt")]
    epsilon: Option<f64>,
}

fn verify_dp(c: VerifyConfig, opts: &Options) -> Result<CommandOutput, CliError> {
    let (u, m) = build(&c.universe, &c.mechanism)?;
    let eps = opts
        .epsilon
        .or(c.epsilon)
        .or_else(|| m.epsilon())
        .ok_or_else(|| CliError::Usage(format!("{} has no epsilon; pass --epsilon", m.name())))?;
    let r = verify_eps_dp(&m, &u, eps)?;
    let mut t = Table::new(
        "verify-dp",
        &[
            "satisfied", "epsilon", "min_epsilon", "pairs_checked", "witness_x", "witness_y", "witness_loss",
            "witness_outcome",
        ],
    );
    let w = r.witness.as_ref();
    t.push(vec![
        r.satisfied.into(),
        r.epsilon.into(),
        r.min_epsilon.into(),
        r.pairs_checked.into(),
        w.map(|w| u.format_dataset(&w.x)).into(),
        w.map(|w| u.format_dataset(&w.y)).into(),
        w.map(|w| w.loss).into(),
        outcome_cell(&m, &u, w.and_then(|w| w.outcome))?,
    ]);
    let mut summary = format!(
        "{}: {} is {}{}-DP on {} unit pairs; smallest epsilon {}",
        if r.satisfied { "PASS" } else { "FAIL" },
        m.name(),
        if r.satisfied { "" } else { "not " },
        sig12(eps),
        r.pairs_checked,
        sig12(r.min_epsilon)
    );
    if let Some(w) = w {
        summary += &format!(
            "; witness {} vs {} with loss {}",
            u.format_dataset(&w.x),
            u.format_dataset(&w.y),
            sig12(w.loss)
        );
    }
    Ok(CommandOutput {
        table: t,
        summary: Some(summary),
        passed: r.satisfied,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MarginalConfig {
    #[serde(default)]
    #[allow(dead_code)]
    schema: Option<u32>,
    universe: UniverseConfig,
    mechanism: MechanismConfig,
    #[serde(default)]
    model: Option<ModelConfig>,
    #[serde(default)]
    theta: Option<String>,
    #[serde(default)]
    prior: Option<BTreeMap<String, f64>>,
    #[serde(default, deserialize_with = "extended_real_opt")]
    epsilon: Option<f64>,
    #[serde(default)]
    grid: Option<Grid>,
}

/// Mechanism and ε for the envelope: a requested ε is applied to mechanisms
/// that carry one; for the rest it must be at least the audited minimum.
fn envelope_mechanism(m: Mechanism, u: &DataUniverse, requested: Option<f64>) -> Result<(Mechanism, f64), CliError> {
    match (requested, m.epsilon()) {
        (Some(e), Some(_)) => Ok((m.with_epsilon(e)?, e)),
        (None, Some(e)) => Ok((m, e)),
        (req, None) => {
            let min = min_epsilon(&m, u)?;
            let e = req.unwrap_or(min);
            if e < min - 1e-12 {
                return Err(CliError::Config(format!(
                    "{} is not {}-DP (smallest epsilon {})",
                    m.name(),
                    sig12(e),
                    sig12(min)
                )));
            }
            Ok((m, e))
        }
    }
}

fn uniform_model(u: &DataUniverse) -> Result<DataModel, CliError> {
    let list = u.datasets()?.to_vec();
    let w = vec![1.0 / list.len() as f64; list.len()];
    Ok(DataModel::new(vec!["uniform".into()], vec![FiniteMeasure::probability(list, w)?])?)
}

fn marginal_bounds(c: MarginalConfig, opts: &Options) -> Result<CommandOutput, CliError> {
    let (u, m) = build(&c.universe, &c.mechanism)?;
    let (m, eps) = envelope_mechanism(m, &u, opts.epsilon.or(c.epsilon))?;
    let model = match &c.model {
        Some(mc) => mc.build(&u)?,
        None => uniform_model(&u)?,
    };
    model.validate(&u)?;
    let theta = match &c.theta {
        Some(label) => model.theta_index(label)?,
        None => 0,
    };
    let prior = match &c.prior {
        None => None,
        Some(p) => {
            let raw = FiniteMeasure::new(p.keys().cloned().collect(), p.values().copied().collect())?;
            Some(model.align_prior(&raw)?)
        }
    };
    let outputs: Vec<(Outcome, Cell)> = if m.is_discrete() {
        if c.grid.is_some() {
            return Err(CliError::Config("grid is only used with continuous mechanisms".into()));
        }
        m.output_labels(&u)?
            .into_iter()
            .enumerate()
            .map(|(k, l)| (Outcome::Discrete(k), Cell::Text(l)))
            .collect()
    } else {
        let grid = c
            .grid
            .as_ref()
            .ok_or_else(|| CliError::Config("continuous mechanisms need a grid".into()))?;
        grid.points()?.into_iter().map(|t| (Outcome::Real(t), Cell::Num(t))).collect()
    };
    let mut scan = EnvelopeScanner::new(&u, &m, eps);
    let mut t = Table::new("marginal-bounds", &["t", "lower", "upper"]);
    for (o, label) in outputs {
        let (lo, hi) = match scan.envelope(o, &model, theta, prior.as_ref()) {
            Ok(b) => (b.lower, b.upper),
            // no dataset in the support can produce this output
            Err(Error::EmptySupport(_)) => (0.0, 0.0),
            Err(e) => return Err(e.into()),
        };
        t.push(vec![label, lo.into(), hi.into()]);
    }
    t.meta("epsilon", number(eps));
    Ok(CommandOutput::data(t))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RrConfig {
    #[serde(default)]
    #[allow(dead_code)]
    schema: Option<u32>,
    #[serde(deserialize_with = "extended_real")]
    epsilon: f64,
    #[serde(default)]
    min_records: usize,
    max_records: usize,
}

fn rr_bounds(c: RrConfig, opts: &Options) -> Result<CommandOutput, CliError> {
    let eps = opts.epsilon.unwrap_or(c.epsilon);
    if !(eps >= 0.0) {
        return Err(CliError::Config("epsilon must be nonnegative".into()));
    }
    if c.min_records > c.max_records {
        return Err(CliError::Config("min_records exceeds max_records".into()));
    }
    let mut t = Table::new("rr-bounds", &["abs_t", "lower", "upper"]);
    for n in c.min_records..=c.max_records {
        let b = rr_marginal_bounds(eps, n);
        t.push(vec![n.into(), b.lower.into(), b.upper.into()]);
    }
    t.meta("epsilon", number(eps));
    Ok(CommandOutput::data(t))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PosteriorConfig {
    #[serde(default)]
    #[allow(dead_code)]
    schema: Option<u32>,
    alpha: f64,
    beta: f64,
    #[serde(deserialize_with = "extended_real")]
    epsilon: f64,
    a0: i64,
    a1: i64,
    #[serde(default)]
    draws: u64,
    /// `d**` for the bounds; one for the single-count model.
    #[serde(default = "one")]
    distance: Ext,
    grid: Grid,
}

fn one() -> Ext {
    Ext(1.0)
}

fn posterior(c: PosteriorConfig, opts: &Options) -> Result<CommandOutput, CliError> {
    let pc = PrivateCount {
        alpha: c.alpha,
        beta: c.beta,
        epsilon: opts.epsilon.unwrap_or(c.epsilon),
        a0: c.a0,
        a1: c.a1,
    };
    pc.validate()?;
    let d2 = distance(c.distance.0)?;
    c.grid.points()?;
    let grid = QuadratureGrid::with_step(c.grid.from, c.grid.to, c.grid.step, Rule::Trapezoid)?;
    let releases = (0..c.draws).map(|k| pc.sample(opts.seed, k)).collect::<Result<Vec<_>, _>>()?;
    let posts = releases
        .iter()
        .map(|&r| pc.posterior(r, &grid))
        .collect::<Result<Vec<_>, _>>()?;

    let mut columns = vec!["theta".to_string(), "prior".into(), "lower".into(), "upper".into()];
    columns.extend((1..=posts.len()).map(|k| format!("posterior_{k}")));
    let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut t = Table::new("posterior-bounds", &cols);
    let mut excess: f64 = 0.0;
    for (i, &th) in grid.points().iter().enumerate() {
        let prior = pc.prior_density(th);
        let b = posterior_bounds(prior, pc.epsilon, d2);
        let mut row: Vec<Cell> = vec![th.into(), prior.into(), b.lower.into(), b.upper.into()];
        for p in &posts {
            excess = excess.max(b.lower - p[i]).max(p[i] - b.upper);
            row.push(p[i].into());
        }
        t.push(row);
    }
    t.meta("epsilon", number(pc.epsilon));
    t.meta("releases", Value::Array(releases.iter().map(|&r| number(r)).collect()));
    let summary = (!posts.is_empty()).then(|| {
        format!(
            "{} posteriors on {} grid points; largest excess over the bounds {}",
            posts.len(),
            grid.len(),
            sig12(excess.max(0.0))
        )
    });
    Ok(CommandOutput {
        table: t,
        summary,
        passed: true,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Instance {
    universe: UniverseConfig,
    mechanism: MechanismConfig,
    model: ModelConfig,
    theta0: String,
    theta1: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PowerConfig {
    #[serde(default)]
    #[allow(dead_code)]
    schema: Option<u32>,
    alphas: Vec<f64>,
    #[serde(default)]
    epsilons: Option<Vec<Ext>>,
    #[serde(default)]
    distances: Option<Vec<Ext>>,
    /// Adds the power of the most powerful test between two Laplace releases
    /// with scale 1/ε whose locations differ by d.
    #[serde(default)]
    laplace_exact: bool,
    #[serde(default)]
    instance: Option<Instance>,
}

const POWER_COLUMNS: [&str; 6] = ["alpha", "epsilon", "d", "lower", "upper", "exact"];

fn power(c: PowerConfig, opts: &Options) -> Result<CommandOutput, CliError> {
    if let Some(inst) = &c.instance {
        if c.epsilons.is_some() || c.distances.is_some() || c.laplace_exact {
            return Err(CliError::Config(
                "instance mode takes epsilon from the mechanism and d from the model".into(),
            ));
        }
        return power_instance(inst, &c.alphas, opts);
    }
    let epsilons: Vec<f64> = match opts.epsilon {
        Some(e) => vec![e],
        None => c.epsilons.unwrap_or_default().into_iter().map(|e| e.0).collect(),
    };
    let distances = c
        .distances
        .unwrap_or_default()
        .into_iter()
        .map(|d| distance(d.0))
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new("power-bounds", &POWER_COLUMNS);
    for &alpha in &c.alphas {
        for &eps in &epsilons {
            for &d in &distances {
                let b = power_bounds_two_sided(alpha, eps, d)?;
                let exact = if !c.laplace_exact {
                    Cell::Empty
                } else {
                    match dp_bounds::inference::budget(eps, d) {
                        0.0 => Cell::Num(alpha),
                        r if r.is_finite() => Cell::Num(laplace_np_power(1.0 / eps, d.as_f64(), alpha)?.power),
                        _ => Cell::Empty,
                    }
                };
                t.push(vec![alpha.into(), eps.into(), distance_cell(d), b.lower.into(), b.upper.into(), exact]);
            }
        }
    }
    Ok(CommandOutput::data(t))
}

fn power_instance(inst: &Instance, alphas: &[f64], opts: &Options) -> Result<CommandOutput, CliError> {
    let (u, m) = build(&inst.universe, &inst.mechanism)?;
    let (m, eps) = envelope_mechanism(m, &u, opts.epsilon)?;
    let model = inst.model.build(&u)?;
    model.validate(&u)?;
    let (th0, th1) = (model.theta_index(&inst.theta0)?, model.theta_index(&inst.theta1)?);
    let d2 = testing_distance(&model, th0, th1, &u)?;
    let mut t = Table::new("power-bounds", &POWER_COLUMNS);
    for &alpha in alphas {
        let b = power_bounds_two_sided(alpha, eps, d2)?;
        let exact = match &m {
            Mechanism::Laplace(lap) => {
                // point-mass laws: two Laplace releases a known distance apart
                let (x0, x1) = match (point_mass(&model, th0), point_mass(&model, th1)) {
                    (Some(a), Some(b)) => (a, b),
                    _ => {
                        return Err(CliError::Config(
                            "exact power for a Laplace instance needs point-mass laws".into(),
                        ))
                    }
                };
                let s = (lap.query.eval(&u, x1) - lap.query.eval(&u, x0)).abs();
                laplace_np_power(lap.scale(), s, alpha)?.power
            }
            _ => exact_np_power(&m, th0, th1, &model, &u, alpha)?.power,
        };
        t.push(vec![alpha.into(), eps.into(), distance_cell(d2), b.lower.into(), b.upper.into(), exact.into()]);
    }
    Ok(CommandOutput::data(t))
}

fn point_mass(model: &DataModel, theta: usize) -> Option<&dp_bounds::Dataset> {
    let law = model.law(theta);
    let support: Vec<usize> = law.support();
    match support.as_slice() {
        [i] => Some(&law.outcomes()[*i]),
        _ => None,
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Correspondence {
    attackers: usize,
    #[serde(default, deserialize_with = "extended_real_opt")]
    epsilon: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PufferfishConfig {
    #[serde(default)]
    #[allow(dead_code)]
    schema: Option<u32>,
    universe: UniverseConfig,
    mechanism: MechanismConfig,
    #[serde(default)]
    instantiation: Option<InstantiationConfig>,
    #[serde(default)]
    correspondence: Option<Correspondence>,
    /// Also run the odds-ratio and density-ratio-neighbourhood checks.
    #[serde(default)]
    semantics: bool,
    #[serde(default)]
    partition_record: usize,
}

fn pufferfish(c: PufferfishConfig, opts: &Options) -> Result<CommandOutput, CliError> {
    let (u, m) = build(&c.universe, &c.mechanism)?;
    let mut inst = match (&c.instantiation, &c.correspondence) {
        (Some(i), None) => i.build(&u)?,
        (None, Some(corr)) => {
            let eps = opts
                .epsilon
                .or(corr.epsilon)
                .or_else(|| m.epsilon())
                .ok_or_else(|| CliError::Usage(format!("{} has no epsilon; pass --epsilon", m.name())))?;
            let attackers = sample_product_priors(&u, corr.attackers, opts.seed)?;
            dp_correspondence_instantiation(&u, attackers, eps)?
        }
        _ => {
            return Err(CliError::Config(
                "give exactly one of instantiation and correspondence".into(),
            ))
        }
    };
    if let Some(e) = opts.epsilon {
        inst.epsilon = e;
    }
    let r = pufferfish_satisfied(&inst, &m, &u)?;
    let sem = if c.semantics {
        let part = Partition::by_record(&u, c.partition_record)?;
        Some(posterior_semantics(&inst, &part, &m, &u)?)
    } else {
        None
    };
    let mut t = Table::new(
        "pufferfish-check",
        &[
            "satisfied", "epsilon", "max_distance", "checked", "skipped", "witness_attacker", "witness_pair",
            "witness_distance", "witness_outcome", "odds_checked", "odds_violations", "max_log_odds_ratio",
            "drn_checked", "drn_violations", "max_drn",
        ],
    );
    let w = r.witness.as_ref();
    let s = sem.as_ref();
    t.push(vec![
        r.satisfied.into(),
        r.epsilon.into(),
        r.max_distance.into(),
        r.checked.into(),
        r.skipped.into(),
        w.map(|w| w.attacker).into(),
        w.map(|w| w.pair).into(),
        w.map(|w| w.distance).into(),
        outcome_cell(&m, &u, w.and_then(|w| w.outcome))?,
        s.map(|s| s.odds_checked).into(),
        s.map(|s| s.odds_violations).into(),
        s.map(|s| s.max_log_odds_ratio).into(),
        s.map(|s| s.drn_checked).into(),
        s.map(|s| s.drn_violations).into(),
        s.map(|s| s.max_drn).into(),
    ]);
    let mut summary = format!(
        "{}: {} attackers x {} pairs, {} checked, {} skipped; largest distance {} against epsilon {}",
        if r.satisfied { "PASS" } else { "FAIL" },
        inst.attackers.len(),
        inst.pairs.len(),
        r.checked,
        r.skipped,
        sig12(r.max_distance),
        sig12(r.epsilon)
    );
    if let Some(w) = w {
        summary += &format!("; witness attacker {} pair {} at distance {}", w.attacker, w.pair, sig12(w.distance));
    }
    if let Some(s) = s {
        summary += &format!(
            "; odds ratios {} of {} outside, neighbourhood {} of {} outside",
            s.odds_violations, s.odds_checked, s.drn_violations, s.drn_checked
        );
    }
    let passed = r.satisfied && s.is_none_or(|s| s.odds_violations == 0 && s.drn_violations == 0);
    let mut out = CommandOutput {
        table: t,
        summary: Some(summary),
        passed,
    };
    out.table.meta("attackers", json!(inst.attackers.len()));
    Ok(out)
}
