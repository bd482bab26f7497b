//! What an analyst (or attacker) can infer from a privatised output.
//!
//! Given a data model `{P_θ}` over a finite universe and an ε-DP mechanism,
//! the likelihood `p(t | θ)` of an output is pinned between envelopes that
//! depend on the model only through its support, hypothesis tests have
//! bounded power and posteriors stay within `π(θ) exp(±ε d**)`.
//!
//! Supports are finite here, so essential suprema and infima are plain
//! maxima and minima over datasets.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::config::Label;
use crate::error::{Error, Result};
use crate::measures::{is_zero, FiniteMeasure};
use crate::mechanisms::{Mechanism, Outcome};
use crate::universe::{DataUniverse, Dataset, Distance};

/// A finite family `{P_θ}` of data-generating laws over one universe.
#[derive(Clone, Debug, PartialEq)]
pub struct DataModel {
    thetas: Vec<String>,
    laws: Vec<FiniteMeasure<Dataset>>,
}

impl DataModel {
    pub fn new(thetas: Vec<String>, laws: Vec<FiniteMeasure<Dataset>>) -> Result<Self> {
        if thetas.len() != laws.len() {
            return Err(Error::InvalidInput(format!(
                "{} parameter labels but {} laws",
                thetas.len(),
                laws.len()
            )));
        }
        if thetas.is_empty() {
            return Err(Error::InvalidInput("model has no parameters".into()));
        }
        if thetas.iter().collect::<BTreeSet<_>>().len() != thetas.len() {
            return Err(Error::InvalidInput("parameter labels are not unique".into()));
        }
        for (th, law) in thetas.iter().zip(&laws) {
            if (law.total() - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidInput(format!("P_{th} is not normalized")));
            }
        }
        let laws = laws
            .into_iter()
            .map(|l| l.normalize())
            .collect::<Result<Vec<_>>>()?;
        Ok(DataModel { thetas, laws })
    }

    /// One point mass per parameter.
    pub fn point_masses(thetas: Vec<String>, datasets: Vec<Dataset>) -> Result<Self> {
        let laws = datasets
            .into_iter()
            .map(|x| FiniteMeasure::dirac(vec![x], 0))
            .collect::<Result<Vec<_>>>()?;
        Self::new(thetas, laws)
    }

    pub fn thetas(&self) -> &[String] {
        &self.thetas
    }

    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }

    pub fn law(&self, theta: usize) -> &FiniteMeasure<Dataset> {
        &self.laws[theta]
    }

    pub fn theta_index(&self, label: &str) -> Result<usize> {
        self.thetas
            .iter()
            .position(|t| t == label)
            .ok_or_else(|| Error::InvalidInput(format!("unknown parameter {label:?}")))
    }

    /// Datasets with positive probability under `P_θ`.
    pub fn support(&self, theta: usize) -> Vec<Dataset> {
        self.laws[theta]
            .iter()
            .filter(|(_, w)| !is_zero(*w))
            .map(|(x, _)| x.clone())
            .collect()
    }

    /// Checks every dataset the model mentions belongs to `u`.
    pub fn validate(&self, u: &DataUniverse) -> Result<()> {
        for law in &self.laws {
            for x in law.outcomes() {
                if !u.contains(x) {
                    return Err(Error::NotInUniverse(x.to_string()));
                }
            }
        }
        Ok(())
    }

    /// Prior with outcomes in the model's parameter order.
    pub fn align_prior(&self, prior: &FiniteMeasure<String>) -> Result<FiniteMeasure<String>> {
        if (prior.total() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput("prior is not proper (total mass 1)".into()));
        }
        if prior.len() != self.thetas.len() {
            return Err(Error::InvalidInput(
                "prior and model list different parameters".into(),
            ));
        }
        prior.aligned_to(&self.thetas)?.normalize()
    }
}

/// Output density at `x` (mass for discrete mechanisms).
fn density(m: &Mechanism, u: &DataUniverse, x: &Dataset, t: Outcome) -> Result<f64> {
    m.density(u, x, t)
}

/// `supp(x | t, θ)`: datasets with positive model weight that can produce `t`.
pub fn support_given(
    t: Outcome,
    theta: usize,
    model: &DataModel,
    m: &Mechanism,
    u: &DataUniverse,
) -> Result<Vec<Dataset>> {
    let mut out = Vec::new();
    for x in model.support(theta) {
        if !is_zero(density(m, u, &x, t)?) {
            out.push(x);
        }
    }
    Ok(out)
}

/// `supp(x | t)`: the union of `supp(x | t, θ)` over the prior's support, in
/// first-seen order.
pub fn support_given_prior(
    t: Outcome,
    prior: &FiniteMeasure<String>,
    model: &DataModel,
    m: &Mechanism,
    u: &DataUniverse,
) -> Result<Vec<Dataset>> {
    let prior = model.align_prior(prior)?;
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for th in 0..model.len() {
        if is_zero(prior.weight(th)) {
            continue;
        }
        for x in support_given(t, th, model, m, u)? {
            if seen.insert(x.clone()) {
                out.push(x);
            }
        }
    }
    Ok(out)
}

/// Whether every pair of the set is at finite distance.
pub fn connectedness_check(set: &[Dataset], u: &DataUniverse) -> Result<bool> {
    // finite distance is an equivalence relation, so one anchor suffices
    let Some(first) = set.first() else {
        return Ok(true);
    };
    for x in &set[1..] {
        if !u.distance(first, x)?.is_finite() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `p(t | θ) = Σ_x P_θ(x) p_x(t)`.
pub fn marginal_likelihood(
    t: Outcome,
    theta: usize,
    model: &DataModel,
    m: &Mechanism,
    u: &DataUniverse,
) -> Result<f64> {
    let mut acc = 0.0;
    for (x, w) in model.law(theta).iter() {
        if w > 0.0 {
            acc += w * density(m, u, x, t)?;
        }
    }
    Ok(acc)
}

/// Constants a bound was computed with.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundContext {
    pub epsilon: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_star: Option<Distance>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_double_star: Option<Distance>,
}

/// A closed interval `[lower, upper]` of reals with its context.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
    pub context: BoundContext,
}

impl Bounds {
    pub fn contains(&self, v: f64) -> bool {
        v >= self.lower * (1.0 - 1e-12) - 1e-300 && v <= self.upper * (1.0 + 1e-12) + 1e-300
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// `eps * d`, with `eps * 0 = 0` and `eps * inf = inf` for every `eps`
/// (including 0: unconnected datasets can be told apart with certainty).
pub fn budget(eps: f64, d: Distance) -> f64 {
    match d {
        Distance::Finite(0) => 0.0,
        Distance::Finite(d) => eps * d as f64,
        Distance::Infinite => f64::INFINITY,
    }
}

/// `p_{x*}(t) exp(±eps d*)` for a given anchor and radius.
pub fn marginal_bounds(
    t: Outcome,
    x_star: &Dataset,
    d_star: Distance,
    eps: f64,
    m: &Mechanism,
    u: &DataUniverse,
) -> Result<Bounds> {
    let p = density(m, u, x_star, t)?;
    let r = budget(eps, d_star);
    Ok(Bounds {
        lower: p * (-r).exp(),
        upper: p * r.exp(),
        context: BoundContext {
            epsilon: eps,
            d_star: Some(d_star),
            d_double_star: None,
        },
    })
}

/// Anchor-specific bound for `p(t | θ)`. With no anchor, the anchor giving
/// the narrowest interval is used.
pub fn marginal_bounds_for(
    t: Outcome,
    theta: usize,
    model: &DataModel,
    m: &Mechanism,
    u: &DataUniverse,
    eps: f64,
    anchor: Option<&Dataset>,
) -> Result<(Dataset, Bounds)> {
    let support = support_given(t, theta, model, m, u)?;
    let geo = SupportGeometry::new(&support, u)?;
    match anchor {
        Some(a) => {
            let k = support.iter().position(|x| x == a).ok_or_else(|| {
                Error::InvalidInput(format!("anchor {a} is not in supp(x | t, θ)"))
            })?;
            Ok((a.clone(), marginal_bounds(t, a, geo.ecc[k], eps, m, u)?))
        }
        None => {
            let mut best: Option<(Dataset, Bounds)> = None;
            for (k, x) in support.iter().enumerate() {
                let b = marginal_bounds(t, x, geo.ecc[k], eps, m, u)?;
                if best.as_ref().is_none_or(|(_, cur)| b.width() < cur.width()) {
                    best = Some((x.clone(), b));
                }
            }
            Ok(best.expect("support is nonempty"))
        }
    }
}

/// Eccentricities of the members of a connected support set.
#[derive(Clone, Debug)]
pub struct SupportGeometry {
    pub datasets: Vec<Dataset>,
    /// `d*(x) = max_{y in S} d(x, y)` per member.
    pub ecc: Vec<Distance>,
}

impl SupportGeometry {
    /// Fails on an empty or disconnected set.
    pub fn new(set: &[Dataset], u: &DataUniverse) -> Result<Self> {
        if set.is_empty() {
            return Err(Error::EmptySupport(
                "no dataset in the model support can produce this output".into(),
            ));
        }
        if !connectedness_check(set, u)? {
            return Err(Error::Disconnected(format!(
                "{} datasets in the support fall in more than one component; \
                 publish the component alongside the output to restore connectedness",
                set.len()
            )));
        }
        let ecc = u.eccentricities(set)?;
        Ok(SupportGeometry {
            datasets: set.to_vec(),
            ecc,
        })
    }

    /// `sup_{x, x' in S} d(x, x')`.
    pub fn diameter(&self) -> Distance {
        self.ecc.iter().copied().max().unwrap_or(Distance::Finite(0))
    }

    /// `[max_x e^{-eps d*} p_x(t), min_x e^{eps d*} p_x(t)]`.
    pub fn envelope(&self, t: Outcome, eps: f64, m: &Mechanism, u: &DataUniverse) -> Result<Bounds> {
        let mut lower = 0.0f64;
        let mut upper = f64::INFINITY;
        for (x, &d) in self.datasets.iter().zip(&self.ecc) {
            let p = density(m, u, x, t)?;
            let r = budget(eps, d);
            lower = lower.max(p * (-r).exp());
            upper = upper.min(p * r.exp());
        }
        Ok(Bounds {
            lower,
            upper,
            context: BoundContext {
                epsilon: eps,
                d_star: Some(self.diameter()),
                d_double_star: None,
            },
        })
    }
}

/// Envelope `[L_eps(t), U_eps(t)]` containing `p(t | θ)`.
pub fn marginal_envelope(
    t: Outcome,
    theta: usize,
    model: &DataModel,
    m: &Mechanism,
    u: &DataUniverse,
    eps: f64,
) -> Result<Bounds> {
    let support = support_given(t, theta, model, m, u)?;
    SupportGeometry::new(&support, u)?.envelope(t, eps, m, u)
}

/// Envelope containing the prior predictive density `p(t)`; built like
/// [`marginal_envelope`] on `supp(x | t)`.
pub fn prior_predictive_envelope(
    t: Outcome,
    prior: &FiniteMeasure<String>,
    model: &DataModel,
    m: &Mechanism,
    u: &DataUniverse,
    eps: f64,
) -> Result<Bounds> {
    let support = support_given_prior(t, prior, model, m, u)?;
    SupportGeometry::new(&support, u)?.envelope(t, eps, m, u)
}

/// Evaluates envelopes over many outputs, computing eccentricities once per
/// distinct support set.
pub struct EnvelopeScanner<'a> {
    u: &'a DataUniverse,
    m: &'a Mechanism,
    eps: f64,
    cache: HashMap<Vec<Dataset>, SupportGeometry>,
}

impl<'a> EnvelopeScanner<'a> {
    pub fn new(u: &'a DataUniverse, m: &'a Mechanism, eps: f64) -> Self {
        EnvelopeScanner {
            u,
            m,
            eps,
            cache: HashMap::new(),
        }
    }

    /// Envelope for `p(t | θ)` when `prior` is `None`, else for `p(t)`.
    pub fn envelope(
        &mut self,
        t: Outcome,
        model: &DataModel,
        theta: usize,
        prior: Option<&FiniteMeasure<String>>,
    ) -> Result<Bounds> {
        let support = match prior {
            None => support_given(t, theta, model, self.m, self.u)?,
            Some(p) => support_given_prior(t, p, model, self.m, self.u)?,
        };
        if !self.cache.contains_key(&support) {
            let geo = SupportGeometry::new(&support, self.u)?;
            self.cache.insert(support.clone(), geo);
        }
        self.cache[&support].envelope(t, self.eps, self.m, self.u)
    }
}

/// Local randomized response on `records` bits:
/// `(e^eps + 1)^{-|t|} <= p(t | θ) <= e^{|t| eps} (e^eps + 1)^{-|t|}` for
/// every data model.
pub fn rr_marginal_bounds(eps: f64, records: usize) -> Bounds {
    let n = records as f64;
    let (lower, upper) = if eps.is_infinite() {
        (if records == 0 { 1.0 } else { 0.0 }, 1.0)
    } else {
        let lo = (-n * (eps.exp() + 1.0).ln()).exp();
        (lo, (n * eps - n * (eps.exp() + 1.0).ln()).exp())
    };
    Bounds {
        lower,
        upper,
        context: BoundContext {
            epsilon: eps,
            d_star: Some(Distance::Finite(records as u64)),
            d_double_star: None,
        },
    }
}

/// Upper bound `min(1, α e^{eps d**})` on the power of a level-α test.
pub fn power_bound(alpha: f64, eps: f64, d_double_star: Distance) -> Result<f64> {
    check_alpha(alpha)?;
    Ok((alpha * budget(eps, d_double_star).exp()).min(1.0))
}

/// Two-sided envelope on the power `1 - β` of a size-α test:
/// `max(α e^{-r}, 1 - e^{r}(1-α)) <= 1 - β <= min(α e^{r}, 1 - e^{-r}(1-α))`
/// with `r = eps d**`.
pub fn power_bounds_two_sided(alpha: f64, eps: f64, d_double_star: Distance) -> Result<Bounds> {
    check_alpha(alpha)?;
    let r = budget(eps, d_double_star);
    let (lo, hi) = if r.is_infinite() {
        (0.0, 1.0)
    } else {
        (
            (alpha * (-r).exp()).max(1.0 - r.exp() * (1.0 - alpha)),
            (alpha * r.exp()).min(1.0 - (-r).exp() * (1.0 - alpha)),
        )
    };
    Ok(Bounds {
        lower: lo.max(0.0),
        upper: hi.min(1.0),
        context: BoundContext {
            epsilon: eps,
            d_star: None,
            d_double_star: Some(d_double_star),
        },
    })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidInput(format!("alpha {alpha} is not a probability")));
    }
    Ok(())
}

/// `d** = sup_{x in S0, x' in S1} d(x, x')` for testing θ0 against θ1, with
/// `S_i = supp(P_θi)` (a superset of every `supp(x | t, θi)`, so the
/// resulting bound holds for all outputs).
pub fn testing_distance(
    model: &DataModel,
    theta0: usize,
    theta1: usize,
    u: &DataUniverse,
) -> Result<Distance> {
    u.cross_diameter(&model.support(theta0), &model.support(theta1))
}

/// `π(θ) exp(±eps d**)` for a prior mass or density value.
pub fn posterior_bounds(prior_value: f64, eps: f64, d_double_star: Distance) -> Bounds {
    let r = budget(eps, d_double_star);
    Bounds {
        lower: prior_value * (-r).exp(),
        upper: if prior_value == 0.0 { 0.0 } else { prior_value * r.exp() },
        context: BoundContext {
            epsilon: eps,
            d_star: None,
            d_double_star: Some(d_double_star),
        },
    }
}

/// Posterior bounds for every parameter after observing `t`, with `d**` the
/// diameter of `supp(x | t)` (which must be connected).
pub fn posterior_bounds_for(
    t: Outcome,
    prior: &FiniteMeasure<String>,
    model: &DataModel,
    m: &Mechanism,
    u: &DataUniverse,
    eps: f64,
) -> Result<Vec<Bounds>> {
    let aligned = model.align_prior(prior)?;
    let support = support_given_prior(t, &aligned, model, m, u)?;
    let d2 = SupportGeometry::new(&support, u)?.diameter();
    Ok(aligned
        .weights()
        .iter()
        .map(|&w| posterior_bounds(w, eps, d2))
        .collect())
}

/// JSON form of a model: `{"thetas": [...], "P": {theta: {dataset: weight}}}`
/// with dataset keys as accepted by [`DataUniverse::parse_dataset`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<u32>,
    pub thetas: Vec<Label>,
    #[serde(rename = "P")]
    pub p: BTreeMap<String, BTreeMap<String, f64>>,
}

impl ModelConfig {
    pub fn build(&self, u: &DataUniverse) -> Result<DataModel> {
        let mut thetas = Vec::with_capacity(self.thetas.len());
        let mut laws = Vec::with_capacity(self.thetas.len());
        for th in &self.thetas {
            let row = self
                .p
                .get(&th.0)
                .ok_or_else(|| Error::InvalidInput(format!("no law given for parameter {:?}", th.0)))?;
            let mut outcomes = Vec::with_capacity(row.len());
            let mut weights = Vec::with_capacity(row.len());
            for (key, &w) in row {
                outcomes.push(u.parse_dataset(key)?);
                weights.push(w);
            }
            thetas.push(th.0.clone());
            laws.push(FiniteMeasure::new(outcomes, weights)?);
        }
        if self.p.len() != self.thetas.len() {
            return Err(Error::InvalidInput("law given for an unlisted parameter".into()));
        }
        DataModel::new(thetas, laws)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::{LaplaceMechanism, RandomizedResponse};
    use std::f64::consts::E;

    fn lap(eps: f64) -> Mechanism {
        Mechanism::Laplace(LaplaceMechanism::count(eps).unwrap())
    }

    fn rr(eps: f64) -> Mechanism {
        Mechanism::RandomizedResponse(RandomizedResponse::new(eps).unwrap())
    }

    fn uniform_model(u: &DataUniverse) -> DataModel {
        let list = u.datasets().unwrap().to_vec();
        let w = vec![1.0 / list.len() as f64; list.len()];
        DataModel::new(vec!["θ".into()], vec![FiniteMeasure::probability(list, w).unwrap()]).unwrap()
    }

    #[test]
    fn support_examples() {
        let u = DataUniverse::binary(3);
        let x0 = Dataset::vector([1, 0, 1]);
        let point = DataModel::point_masses(vec!["a".into()], vec![x0.clone()]).unwrap();
        assert_eq!(support_given(Outcome::Real(7.0), 0, &point, &lap(1.0), &u).unwrap(), vec![x0]);

        let mixed = DataUniverse::hamming_product(["0", "1"], [1, 2]).unwrap();
        let model = uniform_model(&mixed);
        let labels = rr(1.0).output_labels(&mixed).unwrap();
        let t = Outcome::Discrete(labels.iter().position(|l| l == "01").unwrap());
        let s = support_given(t, 0, &model, &rr(1.0), &mixed).unwrap();
        assert_eq!(s.len(), 4);
        assert!(s.iter().all(|x| x.len() == 2));

        let ones = DataModel::point_masses(vec!["a".into()], vec![Dataset::vector([1])]).unwrap();
        let s = support_given(t, 0, &ones, &rr(1.0), &mixed).unwrap();
        assert!(s.is_empty());
        assert!(matches!(
            marginal_envelope(t, 0, &ones, &rr(1.0), &mixed, 1.0),
            Err(Error::EmptySupport(_))
        ));
    }

    #[test]
    fn connectedness_examples() {
        let u = DataUniverse::hamming_product(["0", "1"], [2, 3]).unwrap();
        assert!(connectedness_check(&[Dataset::vector([0, 1])], &u).unwrap());
        let block: Vec<Dataset> = u.datasets().unwrap().iter().filter(|x| x.len() == 3).cloned().collect();
        assert!(connectedness_check(&block, &u).unwrap());
        let mixed = vec![Dataset::vector([0, 1]), Dataset::vector([0, 1, 1])];
        assert!(!connectedness_check(&mixed, &u).unwrap());
    }

    #[test]
    fn marginal_likelihood_examples() {
        let u = DataUniverse::binary(2);
        let m = lap(0.5);
        let x = Dataset::vector([1, 0]);
        let y = Dataset::vector([1, 1]);
        let point = DataModel::point_masses(vec!["a".into()], vec![x.clone()]).unwrap();
        let t = Outcome::Real(0.3);
        assert_eq!(
            marginal_likelihood(t, 0, &point, &m, &u).unwrap(),
            m.density(&u, &x, t).unwrap()
        );
        let two = DataModel::new(
            vec!["a".into()],
            vec![FiniteMeasure::probability(vec![x.clone(), y.clone()], vec![0.5, 0.5]).unwrap()],
        )
        .unwrap();
        let want = 0.5 * (m.density(&u, &x, t).unwrap() + m.density(&u, &y, t).unwrap());
        assert!((marginal_likelihood(t, 0, &two, &m, &u).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn marginal_bounds_examples() {
        let u = DataUniverse::binary(10);
        let x = Dataset::vector([1, 1, 1, 1, 1, 0, 0, 0, 0, 0]);
        let b = marginal_bounds(Outcome::Real(5.0), &x, Distance::Finite(10), 0.1, &lap(0.1), &u).unwrap();
        assert!((b.lower - 0.05 / E).abs() < 1e-15);
        assert!((b.upper - 0.05 * E).abs() < 1e-15);
        let b0 = marginal_bounds(Outcome::Real(5.0), &x, Distance::Finite(10), 0.0, &lap(0.1), &u).unwrap();
        assert_eq!(b0.lower, b0.upper);

        let point = DataModel::point_masses(vec!["a".into()], vec![x.clone()]).unwrap();
        let (anchor, b) =
            marginal_bounds_for(Outcome::Real(3.3), 0, &point, &lap(0.1), &u, 0.1, None).unwrap();
        assert_eq!(anchor, x);
        assert!(b.contains(marginal_likelihood(Outcome::Real(3.3), 0, &point, &lap(0.1), &u).unwrap()));
    }

    #[test]
    fn rr_envelope_matches_closed_form() {
        for n in 1..=4 {
            let u = DataUniverse::binary(n);
            let model = uniform_model(&u);
            let m = rr(1.0);
            let k = m.output_labels(&u).unwrap().len();
            for t in 0..k {
                let b = marginal_envelope(Outcome::Discrete(t), 0, &model, &m, &u, 1.0).unwrap();
                let lo = (E + 1.0).powi(-(n as i32));
                let hi = E.powi(n as i32) * lo;
                assert!((b.lower - lo).abs() < 1e-12);
                assert!((b.upper - hi).abs() < 1e-12);
                let p = marginal_likelihood(Outcome::Discrete(t), 0, &model, &m, &u).unwrap();
                assert!(b.contains(p));
            }
        }
    }

    #[test]
    fn binary_sum_envelope_values() {
        let u = DataUniverse::binary(10);
        let model = uniform_model(&u);
        let m = lap(0.1);
        let mut scan = EnvelopeScanner::new(&u, &m, 0.1);
        for t in 0..=10 {
            let b = scan.envelope(Outcome::Real(t as f64), &model, 0, None).unwrap();
            assert!((b.lower - 0.05 / E).abs() < 1e-12);
        }
        let b = scan.envelope(Outcome::Real(5.0), &model, 0, None).unwrap();
        assert!((b.upper - 0.05 * 0.5f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn disconnected_support_is_refused() {
        let u = DataUniverse::hamming_product(["0", "1"], [1, 2]).unwrap();
        let model = uniform_model(&u);
        let m = lap(1.0);
        assert!(matches!(
            marginal_envelope(Outcome::Real(0.0), 0, &model, &m, &u, 1.0),
            Err(Error::Disconnected(_))
        ));
    }

    #[test]
    fn power_bound_examples() {
        let d1 = Distance::Finite(1);
        assert!((power_bound(0.05, 1.0, d1).unwrap() - 0.05 * E).abs() < 1e-15);
        assert_eq!(power_bound(0.05, 0.0, d1).unwrap(), 0.05);
        assert!((power_bound(0.05, 0.2, Distance::Finite(5)).unwrap() - 0.05 * E).abs() < 1e-15);
        assert_eq!(power_bound(0.9, 1.0, d1).unwrap(), 1.0);

        let b = power_bounds_two_sided(0.05, 0.0, d1).unwrap();
        assert!((b.lower - 0.05).abs() < 1e-15 && (b.upper - 0.05).abs() < 1e-15);
        let b = power_bounds_two_sided(0.05, 1.0, d1).unwrap();
        assert!((b.lower - 0.05 / E).abs() < 1e-12);
        assert!((b.upper - 0.05 * E).abs() < 1e-12);
        let b = power_bounds_two_sided(0.5, 1.0, Distance::Infinite).unwrap();
        assert_eq!((b.lower, b.upper), (0.0, 1.0));
    }

    #[test]
    fn posterior_bound_examples() {
        // Gamma(3, 1) density at 2
        let prior = 2.0 * (-2.0f64).exp();
        let b = posterior_bounds(prior, 1.0, Distance::Finite(1));
        assert!((prior - 0.27067).abs() < 1e-5);
        assert!((b.lower - 0.09957).abs() < 1e-5);
        assert!((b.upper - 0.73576).abs() < 1e-5);
        let b0 = posterior_bounds(prior, 0.0, Distance::Finite(1));
        assert_eq!((b0.lower, b0.upper), (prior, prior));
    }

    #[test]
    fn single_theta_prior_predictive_equals_marginal() {
        let u = DataUniverse::binary(3);
        let model = uniform_model(&u);
        let prior = FiniteMeasure::probability(vec!["θ".to_string()], vec![1.0]).unwrap();
        let m = lap(0.3);
        let t = Outcome::Real(1.7);
        let a = prior_predictive_envelope(t, &prior, &model, &m, &u, 0.3).unwrap();
        let b = marginal_envelope(t, 0, &model, &m, &u, 0.3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn model_json() {
        let u = DataUniverse::binary(2);
        let json = r#"{"thetas":["a", 2], "P":{"a":{"00":0.5,"11":0.5}, "2":{"01":1}}}"#;
        let c: ModelConfig = serde_json::from_str(json).unwrap();
        let model = c.build(&u).unwrap();
        assert_eq!(model.thetas(), &["a".to_string(), "2".to_string()]);
        assert_eq!(model.support(0).len(), 2);
        let bad = r#"{"thetas":["a"], "P":{"a":{"00":0.5}}}"#;
        let c: ModelConfig = serde_json::from_str(bad).unwrap();
        assert!(c.build(&u).is_err());
    }
}
