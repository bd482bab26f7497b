//! Finite measures, the multiplicative distance, the density ratio metric and
//! intervals of measures.
//!
//! Every measure here has finite support. On a finite outcome set the
//! supremum over events in the multiplicative distance is attained on a
//! singleton: for nonnegative `a_i`, `b_i`,
//!
//! ```text
//! (a_1 + ... + a_k) / (b_1 + ... + b_k) <= max_i a_i / b_i
//! ```
//!
//! (the mediant inequality), and symmetrically for the minimum. So
//! `sup_S |ln mu(S)/nu(S)|` is the largest absolute pointwise log ratio, and
//! containment in an interval of measures reduces to pointwise comparison of
//! weights.
//!
//! Conventions: `0/0 = 1`, `a/0 = +inf` for `a > 0`, and weights below
//! [`ZERO_WEIGHT`] are exact zeros.

use std::collections::HashSet;
use std::fmt::Debug;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weights at or below this are treated as exact zeros.
pub const ZERO_WEIGHT: f64 = 1e-300;

/// Default absolute tolerance for real comparisons.
pub const TOL: f64 = 1e-12;

#[inline]
pub(crate) fn is_zero(w: f64) -> bool {
    w <= ZERO_WEIGHT
}

/// `ln(a / b)` with `0/0 = 1`.
#[inline]
pub fn log_ratio(a: f64, b: f64) -> f64 {
    match (is_zero(a), is_zero(b)) {
        (true, true) => 0.0,
        (true, false) => f64::NEG_INFINITY,
        (false, true) => f64::INFINITY,
        (false, false) => a.ln() - b.ln(),
    }
}

/// A nonnegative measure on a finite, ordered set of outcome labels.
///
/// The `normalized` flag records that the total mass is 1 (within
/// [`TOL`]). It is a flag rather than an invariant of the type because
/// envelope measures such as `e^eps * P` are not probability measures.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "RawMeasure<T>",
    bound(
        serialize = "T: Serialize",
        deserialize = "T: Deserialize<'de> + Clone + Eq + Hash"
    )
)]
pub struct FiniteMeasure<T> {
    outcomes: Vec<T>,
    weights: Vec<f64>,
    normalized: bool,
}

#[derive(Deserialize)]
struct RawMeasure<T> {
    outcomes: Vec<T>,
    weights: Vec<f64>,
    #[serde(default)]
    normalized: bool,
}

impl<T: Clone + Eq + Hash> TryFrom<RawMeasure<T>> for FiniteMeasure<T> {
    type Error = Error;

    fn try_from(raw: RawMeasure<T>) -> Result<Self> {
        if raw.normalized {
            FiniteMeasure::probability(raw.outcomes, raw.weights)
        } else {
            FiniteMeasure::new(raw.outcomes, raw.weights)
        }
    }
}

impl<T> FiniteMeasure<T> {
    pub fn outcomes(&self) -> &[T] {
        &self.outcomes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// Mass of the event given by outcome indices.
    pub fn mass_of<I: IntoIterator<Item = usize>>(&self, indices: I) -> f64 {
        indices.into_iter().map(|i| self.weights[i]).sum()
    }

    /// Indices of outcomes with positive weight.
    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !is_zero(self.weights[i])).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&T, f64)> {
        self.outcomes.iter().zip(self.weights.iter().copied())
    }
}

impl<T: PartialEq> FiniteMeasure<T> {
    pub fn same_outcomes(&self, other: &Self) -> bool {
        self.outcomes == other.outcomes
    }

    pub fn index_of(&self, outcome: &T) -> Option<usize> {
        self.outcomes.iter().position(|o| o == outcome)
    }

    /// Weight of `outcome`, zero when the label is absent.
    pub fn weight_of(&self, outcome: &T) -> f64 {
        self.index_of(outcome).map_or(0.0, |i| self.weights[i])
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.same_outcomes(other) {
            Ok(())
        } else {
            Err(Error::OutcomeMismatch)
        }
    }
}

impl<T: Clone> FiniteMeasure<T> {
    /// Multiplies every weight by `c >= 0`.
    pub fn scale(&self, c: f64) -> Self {
        assert!(c >= 0.0 && c.is_finite(), "scale factor must be finite and nonnegative");
        FiniteMeasure {
            outcomes: self.outcomes.clone(),
            weights: self.weights.iter().map(|w| w * c).collect(),
            normalized: self.normalized && c == 1.0,
        }
    }

    /// Rescales to total mass one.
    pub fn normalize(&self) -> Result<Self> {
        let total = self.total();
        if is_zero(total) {
            return Err(Error::InvalidInput("cannot normalize a zero measure".into()));
        }
        Ok(FiniteMeasure {
            outcomes: self.outcomes.clone(),
            weights: self.weights.iter().map(|w| w / total).collect(),
            normalized: true,
        })
    }

    /// Same outcome list with new weights.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.outcomes.len() {
            return Err(Error::InvalidInput("weight vector has the wrong length".into()));
        }
        validate_weights(&weights)?;
        Ok(FiniteMeasure {
            outcomes: self.outcomes.clone(),
            weights,
            normalized: false,
        })
    }
}

impl<T: Clone + Eq + Hash> FiniteMeasure<T> {
    pub fn new(outcomes: Vec<T>, weights: Vec<f64>) -> Result<Self> {
        if outcomes.len() != weights.len() {
            return Err(Error::InvalidInput(format!(
                "{} outcomes but {} weights",
                outcomes.len(),
                weights.len()
            )));
        }
        validate_weights(&weights)?;
        let mut seen = HashSet::with_capacity(outcomes.len());
        if !outcomes.iter().all(|o| seen.insert(o)) {
            return Err(Error::InvalidInput("outcome labels are not unique".into()));
        }
        Ok(FiniteMeasure {
            outcomes,
            weights,
            normalized: false,
        })
    }

    /// A probability measure; the weights must already sum to one.
    pub fn probability(outcomes: Vec<T>, weights: Vec<f64>) -> Result<Self> {
        let mut m = Self::new(outcomes, weights)?;
        let total = m.total();
        if (total - 1.0).abs() > TOL {
            return Err(Error::InvalidInput(format!(
                "probability weights sum to {total}, not 1"
            )));
        }
        m.normalized = true;
        Ok(m)
    }

    /// Point mass at `outcomes[at]`.
    pub fn dirac(outcomes: Vec<T>, at: usize) -> Result<Self> {
        let mut w = vec![0.0; outcomes.len()];
        *w.get_mut(at)
            .ok_or_else(|| Error::InvalidInput("point mass index out of range".into()))? = 1.0;
        Self::probability(outcomes, w)
    }

    /// Re-expresses the measure on another outcome list. Labels missing from
    /// `self` get weight zero; positive mass outside `outcomes` is an error.
    pub fn aligned_to(&self, outcomes: &[T]) -> Result<Self> {
        let mut weights = vec![0.0; outcomes.len()];
        let mut placed = 0.0;
        for (i, o) in outcomes.iter().enumerate() {
            if let Some(j) = self.index_of(o) {
                weights[i] = self.weights[j];
                placed += self.weights[j];
            }
        }
        if (placed - self.total()).abs() > TOL * self.total().max(1.0) {
            return Err(Error::OutcomeMismatch);
        }
        let mut m = Self::new(outcomes.to_vec(), weights)?;
        m.normalized = self.normalized;
        Ok(m)
    }

    /// `sum_k c_k * mu_k` over measures sharing one outcome list.
    pub fn mixture(components: &[(f64, &FiniteMeasure<T>)]) -> Result<Self> {
        let (_, first) = components
            .first()
            .ok_or_else(|| Error::InvalidInput("empty mixture".into()))?;
        let mut weights = vec![0.0; first.len()];
        for (c, m) in components {
            first.check_same(m)?;
            for (acc, w) in weights.iter_mut().zip(&m.weights) {
                *acc += c * w;
            }
        }
        let mut out = Self::new(first.outcomes.clone(), weights)?;
        if (out.total() - 1.0).abs() <= TOL && components.iter().all(|(_, m)| m.normalized) {
            out.normalized = true;
        }
        Ok(out)
    }
}

fn validate_weights(weights: &[f64]) -> Result<()> {
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(Error::InvalidInput(format!(
            "weights must be finite and nonnegative, got {w}"
        )));
    }
    Ok(())
}

/// Multiplicative distance `sup_S |ln mu(S)/nu(S)|`.
///
/// Returns `+inf` exactly when the supports differ.
pub fn mult_distance<T: PartialEq>(mu: &FiniteMeasure<T>, nu: &FiniteMeasure<T>) -> Result<f64> {
    mult_distance_witness(mu, nu).map(|(d, _)| d)
}

/// Like [`mult_distance`], also returning the index of an outcome attaining
/// the supremum (`None` when the distance is zero).
pub fn mult_distance_witness<T: PartialEq>(
    mu: &FiniteMeasure<T>,
    nu: &FiniteMeasure<T>,
) -> Result<(f64, Option<usize>)> {
    mu.check_same(nu)?;
    Ok(max_abs_log_ratio(&mu.weights, &nu.weights))
}

pub(crate) fn max_abs_log_ratio(a: &[f64], b: &[f64]) -> (f64, Option<usize>) {
    let mut best = 0.0;
    let mut at = None;
    for (i, (&x, &y)) in a.iter().zip(b).enumerate() {
        let r = log_ratio(x, y).abs();
        if r > best {
            best = r;
            at = Some(i);
            if r == f64::INFINITY {
                break;
            }
        }
    }
    (best, at)
}

/// Density ratio metric with the counting measure as dominating measure:
/// `max_t ln(f/g)(t) - min_t ln(f/g)(t)` over the common support, `+inf`
/// unless `mu` and `nu` are mutually absolutely continuous.
pub fn density_ratio_metric<T: PartialEq>(
    mu: &FiniteMeasure<T>,
    nu: &FiniteMeasure<T>,
) -> Result<f64> {
    mu.check_same(nu)?;
    let mut hi = f64::NEG_INFINITY;
    let mut lo = f64::INFINITY;
    for (&f, &g) in mu.weights.iter().zip(&nu.weights) {
        match (is_zero(f), is_zero(g)) {
            (true, true) => {}
            (false, false) => {
                let r = f.ln() - g.ln();
                hi = hi.max(r);
                lo = lo.min(r);
            }
            _ => return Ok(f64::INFINITY),
        }
    }
    Ok(if hi >= lo { hi - lo } else { 0.0 })
}

/// Density ratio metric evaluated from densities with respect to an explicit
/// dominating measure `tau` (one weight per outcome), by direct search over
/// all pairs `(t, t')` of the double ratio `[f(t)/f(t')] / [g(t)/g(t')]`.
///
/// Outcomes with `tau = 0` are outside the dominating measure's support and
/// do not enter the essential supremum; `tau` must therefore be positive
/// wherever `mu` or `nu` carries mass.
pub fn density_ratio_metric_wrt<T: PartialEq>(
    mu: &FiniteMeasure<T>,
    nu: &FiniteMeasure<T>,
    tau: &[f64],
) -> Result<f64> {
    mu.check_same(nu)?;
    if tau.len() != mu.len() {
        return Err(Error::InvalidInput("dominating measure has the wrong length".into()));
    }
    let mut f = Vec::new();
    let mut g = Vec::new();
    for ((&m, &n), &t) in mu.weights.iter().zip(&nu.weights).zip(tau) {
        if is_zero(t) {
            if !is_zero(m) || !is_zero(n) {
                return Err(Error::InvalidInput(
                    "tau does not dominate the measures".into(),
                ));
            }
            continue;
        }
        f.push(m / t);
        g.push(n / t);
    }
    if f.iter().zip(&g).any(|(&a, &b)| is_zero(a) != is_zero(b)) {
        return Ok(f64::INFINITY);
    }
    let mut best: f64 = 0.0;
    for i in 0..f.len() {
        for j in 0..f.len() {
            // both ratios are 0/0 = 1 when either point lies outside the support
            if is_zero(f[i]) || is_zero(f[j]) {
                continue;
            }
            let v = ((f[i] / f[j]) / (g[i] / g[j])).ln();
            best = best.max(v);
        }
    }
    Ok(best)
}

/// Membership in the density ratio neighbourhood `N_radius(center)`.
pub fn drn_contains<T: PartialEq>(
    center: &FiniteMeasure<T>,
    radius: f64,
    mu: &FiniteMeasure<T>,
) -> Result<bool> {
    let d = density_ratio_metric(center, mu)?;
    Ok(d <= radius + TOL)
}

/// Interval of measures `{mu : lower <= mu <= upper}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasureInterval<T> {
    lower: FiniteMeasure<T>,
    upper: FiniteMeasure<T>,
}

impl<T: Clone + PartialEq> MeasureInterval<T> {
    pub fn new(lower: FiniteMeasure<T>, upper: FiniteMeasure<T>) -> Result<Self> {
        lower.check_same(&upper)?;
        if lower
            .weights
            .iter()
            .zip(&upper.weights)
            .any(|(&l, &u)| l > u * (1.0 + TOL))
        {
            return Err(Error::InvalidInput("lower measure exceeds upper measure".into()));
        }
        Ok(MeasureInterval { lower, upper })
    }

    /// `I(e^{-radius} mu, e^{radius} mu)` for a finite `radius >= 0`.
    pub fn centered(mu: &FiniteMeasure<T>, radius: f64) -> Self {
        MeasureInterval {
            lower: mu.scale((-radius).exp()),
            upper: mu.scale(radius.exp()),
        }
    }

    pub fn lower(&self) -> &FiniteMeasure<T> {
        &self.lower
    }

    pub fn upper(&self) -> &FiniteMeasure<T> {
        &self.upper
    }

    /// Pointwise `lower <= mu <= upper`, with relative tolerance [`TOL`].
    pub fn contains(&self, mu: &FiniteMeasure<T>) -> Result<bool> {
        self.lower.check_same(mu)?;
        Ok(self
            .lower
            .weights
            .iter()
            .zip(&self.upper.weights)
            .zip(&mu.weights)
            .all(|((&l, &u), &x)| x >= l * (1.0 - TOL) && x <= u * (1.0 + TOL)))
    }
}

/// Free-function form of [`MeasureInterval::contains`].
pub fn interval_contains<T: Clone + PartialEq>(
    iv: &MeasureInterval<T>,
    mu: &FiniteMeasure<T>,
) -> Result<bool> {
    iv.contains(mu)
}

/// Closed-form densities on the real line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DensityFunction {
    /// `(1 / 2b) exp(-|t - location| / b)`.
    Laplace { location: f64, scale: f64 },
}

impl DensityFunction {
    pub fn laplace(location: f64, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) || !location.is_finite() {
            return Err(Error::InvalidInput(format!(
                "Laplace needs a finite location and positive scale, got ({location}, {scale})"
            )));
        }
        Ok(DensityFunction::Laplace { location, scale })
    }

    pub fn ln_density(&self, t: f64) -> f64 {
        match *self {
            DensityFunction::Laplace { location, scale } => {
                -(t - location).abs() / scale - (2.0 * scale).ln()
            }
        }
    }

    pub fn density(&self, t: f64) -> f64 {
        match *self {
            DensityFunction::Laplace { location, scale } => {
                (-(t - location).abs() / scale).exp() / (2.0 * scale)
            }
        }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        match *self {
            DensityFunction::Laplace { location, scale } => {
                let z = (t - location) / scale;
                if z < 0.0 {
                    0.5 * z.exp()
                } else {
                    1.0 - 0.5 * (-z).exp()
                }
            }
        }
    }

    /// Inverse CDF for `u` in `(0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        match *self {
            DensityFunction::Laplace { location, scale } => {
                if u < 0.5 {
                    location + scale * (2.0 * u).ln()
                } else {
                    location - scale * (2.0 * (1.0 - u)).ln()
                }
            }
        }
    }

    /// `sup_t |ln p(t) - ln q(t)|`, analytic within the family.
    ///
    /// For equal scales `|ln p - ln q| = ||t - l2| - |t - l1|| / b`, which
    /// the triangle inequality bounds by `|l1 - l2| / b` with equality for
    /// `t` outside the two locations. Unequal scales give an unbounded ratio.
    pub fn mult_distance(&self, other: &DensityFunction) -> f64 {
        match (*self, *other) {
            (
                DensityFunction::Laplace { location: l1, scale: b1 },
                DensityFunction::Laplace { location: l2, scale: b2 },
            ) => {
                if b1 == b2 {
                    (l1 - l2).abs() / b1
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// Density ratio metric within the family: the log ratio ranges over
    /// `[-|l1 - l2|/b, |l1 - l2|/b]`, so the metric is twice the half-width.
    pub fn density_ratio_metric(&self, other: &DensityFunction) -> f64 {
        let d = self.mult_distance(other);
        if d.is_finite() {
            2.0 * d
        } else {
            d
        }
    }
}

/// Brute-force multiplicative distance by enumerating every event. Only for
/// small outcome sets (at most 20 outcomes).
pub fn mult_distance_by_events<T: PartialEq + Debug>(
    mu: &FiniteMeasure<T>,
    nu: &FiniteMeasure<T>,
) -> Result<f64> {
    mu.check_same(nu)?;
    let n = mu.len();
    if n > 20 {
        return Err(Error::Unsupported("event enumeration beyond 20 outcomes".into()));
    }
    let mut best: f64 = 0.0;
    for mask in 1u32..(1u32 << n) {
        let (mut a, mut b) = (0.0, 0.0);
        for i in 0..n {
            if mask & (1 << i) != 0 {
                a += mu.weights[i];
                b += nu.weights[i];
            }
        }
        best = best.max(log_ratio(a, b).abs());
    }
    Ok(best)
}
