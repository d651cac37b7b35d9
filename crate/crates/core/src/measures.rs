//! Central probability measures given by their scalar Fourier multipliers,
//! and Monte Carlo samplers for the ones with densities.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_distr::UnitSphere;
use serde::{Deserialize, Serialize};

use crate::dual::{enumerate_irreps, GroupId, Irrep, RootSystemData};
use crate::error::{invalid, unsupported, NcfaError, Result};
use crate::exec::Exec;
use crate::groups::{chunked_draw, wrap_angle, Quaternion, SampleData, SampleSet, GENERATOR_ID};
use crate::spectra::{transform_central, ClassSeries, SpectralCoeffs};

/// Closed-form Bernstein functions used for subordination.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bernstein {
    /// `f(u) = u`: Brownian motion with `σ = √2`, so `c = e^{-tκ}`.
    Linear,
    /// `f(u) = log(1 + β²u)`.
    Laplace { beta: f64 },
    /// `f(u) = b^α u^{α/2}`.
    Stable { b: f64, alpha: f64 },
}

/// A Bernstein function together with the subordination time `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BernsteinFunction {
    pub kind: Bernstein,
    pub t: f64,
}

impl BernsteinFunction {
    pub fn new(kind: Bernstein, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return invalid(format!("subordination time must be positive, got {t}"));
        }
        match kind {
            Bernstein::Linear => {}
            Bernstein::Laplace { beta } if !(beta > 0.0 && beta.is_finite()) => {
                return invalid(format!("laplace beta must be positive, got {beta}"))
            }
            Bernstein::Stable { b, .. } if !(b > 0.0 && b.is_finite()) => {
                return invalid(format!("stable scale b must be positive, got {b}"))
            }
            Bernstein::Stable { alpha, .. } if !(alpha > 0.0 && alpha < 2.0) => {
                return invalid(format!("stable index alpha must lie in (0, 2), got {alpha}"))
            }
            _ => {}
        }
        Ok(BernsteinFunction { kind, t })
    }

    /// `f(u)` (without the factor `t`).
    pub fn eval(&self, u: f64) -> f64 {
        match self.kind {
            Bernstein::Linear => u,
            Bernstein::Laplace { beta } => (beta * beta * u).ln_1p(),
            Bernstein::Stable { b, alpha } => b.powf(alpha) * u.powf(alpha / 2.0),
        }
    }

    /// `log c = -t f(κ)`.
    pub fn log_multiplier(&self, casimir: f64) -> f64 {
        -self.t * self.eval(casimir)
    }
}

/// How fast a multiplier decays in `|λ|`, read off the closed form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum DecayClass {
    /// Only the trivial coefficient is nonzero.
    FiniteSupport,
    /// `|c_λ| ≍ |λ|^{-order}`.
    Polynomial { order: f64 },
    /// Faster than every power of `|λ|`.
    SuperPolynomial,
    /// Tabulated multipliers: no closed form to reason about.
    Unknown,
}

#[derive(Clone, Debug, PartialEq)]
pub enum MeasureFamily {
    Dirac,
    Haar,
    /// Brownian motion at time 1 with generator `½σ²Δ`: `c = e^{-σ²κ/2}`.
    Gaussian { sigma2: f64 },
    /// Subordinated Brownian motion: `c = e^{-t f(κ)}`.
    Cid(BernsteinFunction),
    /// Arbitrary real multipliers; weights not listed have `c = 0`.
    CustomScalar(Vec<(Vec<i64>, f64)>),
}

/// A central probability measure on `group`, described by its multiplier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureJson", into = "MeasureJson")]
pub struct CentralMeasureSpec {
    pub group: GroupId,
    pub family: MeasureFamily,
}

impl CentralMeasureSpec {
    pub fn new(group: GroupId, family: MeasureFamily) -> Result<Self> {
        match &family {
            MeasureFamily::Gaussian { sigma2 } if !(*sigma2 > 0.0 && sigma2.is_finite()) => {
                return invalid(format!("gaussian variance must be positive, got {sigma2}"))
            }
            MeasureFamily::Cid(f) => {
                BernsteinFunction::new(f.kind, f.t)?;
            }
            MeasureFamily::CustomScalar(table) => {
                let rs = RootSystemData::new(group);
                let mut has_trivial = false;
                for (lambda, c) in table {
                    rs.check_dominant(lambda)?;
                    if !c.is_finite() || c.abs() > 1.0 + 1e-12 {
                        return invalid(format!("custom multiplier {c} at {lambda:?} is not in [-1, 1]"));
                    }
                    if lambda.iter().all(|&x| x == 0) {
                        if (c - 1.0).abs() > 1e-12 {
                            return invalid("custom multiplier must equal 1 on the trivial irrep");
                        }
                        has_trivial = true;
                    }
                }
                if !has_trivial {
                    return invalid("custom multiplier table must contain the trivial irrep with c = 1");
                }
            }
            _ => {}
        }
        Ok(CentralMeasureSpec { group, family })
    }

    pub fn dirac(group: GroupId) -> Self {
        CentralMeasureSpec { group, family: MeasureFamily::Dirac }
    }

    pub fn haar(group: GroupId) -> Self {
        CentralMeasureSpec { group, family: MeasureFamily::Haar }
    }

    pub fn gaussian(group: GroupId, sigma2: f64) -> Result<Self> {
        Self::new(group, MeasureFamily::Gaussian { sigma2 })
    }

    /// Heat semigroup at time `t`: `c = e^{-tκ}`.
    pub fn heat(group: GroupId, t: f64) -> Result<Self> {
        Self::subordinated(group, Bernstein::Linear, t)
    }

    pub fn laplace(group: GroupId, beta: f64, t: f64) -> Result<Self> {
        Self::subordinated(group, Bernstein::Laplace { beta }, t)
    }

    pub fn stable(group: GroupId, b: f64, alpha: f64, t: f64) -> Result<Self> {
        Self::subordinated(group, Bernstein::Stable { b, alpha }, t)
    }

    pub fn subordinated(group: GroupId, kind: Bernstein, t: f64) -> Result<Self> {
        Self::new(group, MeasureFamily::Cid(BernsteinFunction::new(kind, t)?))
    }

    pub fn custom(group: GroupId, table: Vec<(Vec<i64>, f64)>) -> Result<Self> {
        Self::new(group, MeasureFamily::CustomScalar(table))
    }

    pub fn is_builtin(&self) -> bool {
        !matches!(self.family, MeasureFamily::CustomScalar(_))
    }

    fn check_group(&self, irrep: &Irrep) -> Result<()> {
        if irrep.group != self.group {
            return invalid(format!("irrep of {} used with a measure on {}", irrep.group, self.group));
        }
        Ok(())
    }

    /// Scalar Fourier coefficient `c_λ`.
    pub fn multiplier(&self, irrep: &Irrep) -> Result<f64> {
        self.check_group(irrep)?;
        Ok(match &self.family {
            MeasureFamily::CustomScalar(table) => table
                .iter()
                .find(|(l, _)| *l == irrep.lambda)
                .map_or(0.0, |(_, c)| *c),
            _ => self.log_abs_multiplier_unchecked(irrep).exp(),
        })
    }

    /// `ln |c_λ|`, `-∞` where the multiplier vanishes. Stays finite where
    /// `c_λ` itself underflows.
    pub fn log_abs_multiplier(&self, irrep: &Irrep) -> Result<f64> {
        self.check_group(irrep)?;
        Ok(match &self.family {
            MeasureFamily::CustomScalar(_) => self.multiplier(irrep)?.abs().ln(),
            _ => self.log_abs_multiplier_unchecked(irrep),
        })
    }

    fn log_abs_multiplier_unchecked(&self, irrep: &Irrep) -> f64 {
        let kappa = irrep.casimir;
        match &self.family {
            MeasureFamily::Dirac => 0.0,
            MeasureFamily::Haar => {
                if irrep.is_trivial() {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            MeasureFamily::Gaussian { sigma2 } => -0.5 * sigma2 * kappa,
            MeasureFamily::Cid(f) => f.log_multiplier(kappa),
            MeasureFamily::CustomScalar(_) => unreachable!("handled by caller"),
        }
    }

    /// Decay class of `|c_λ|` as `|λ| → ∞`, derived from the closed form:
    /// `c = e^{-η}` decays faster than any power iff `η(κ)/log κ → ∞`.
    pub fn decay_class(&self) -> DecayClass {
        match &self.family {
            MeasureFamily::Haar => DecayClass::FiniteSupport,
            MeasureFamily::Dirac => DecayClass::Polynomial { order: 0.0 },
            MeasureFamily::Gaussian { .. } => DecayClass::SuperPolynomial,
            MeasureFamily::Cid(f) => match f.kind {
                // power growth of f beats log
                Bernstein::Linear | Bernstein::Stable { .. } => DecayClass::SuperPolynomial,
                // t log(1 + β²κ) ~ t log κ ~ 2t log|λ|
                Bernstein::Laplace { .. } => DecayClass::Polynomial { order: 2.0 * f.t },
            },
            MeasureFamily::CustomScalar(table) => {
                if table.iter().all(|(l, c)| *c == 0.0 || l.iter().all(|&x| x == 0)) {
                    DecayClass::FiniteSupport
                } else {
                    DecayClass::Unknown
                }
            }
        }
    }

    pub fn has_density(&self) -> bool {
        !matches!(self.family, MeasureFamily::Dirac)
    }

    /// Picks the truncation radius for synthesis; see [`CutoffChoice`].
    pub fn auto_cutoff(&self) -> Result<CutoffChoice> {
        auto_cutoff(self, TAIL_TOLERANCE)
    }

    /// Coefficients on the dual ball chosen by [`CentralMeasureSpec::auto_cutoff`].
    pub fn coefficients(&self) -> Result<SpectralCoeffs> {
        let cut = self.auto_cutoff()?;
        let rs = RootSystemData::new(self.group);
        transform_central(self, &enumerate_irreps(&rs, cut.max_norm)?)
    }

    pub fn coefficients_up_to(&self, max_norm: f64) -> Result<SpectralCoeffs> {
        let rs = RootSystemData::new(self.group);
        transform_central(self, &enumerate_irreps(&rs, max_norm)?)
    }
}

/// Target for `Σ_{|λ|>Λ} d_λ² |c_λ|` when choosing a cutoff.
pub const TAIL_TOLERANCE: f64 = 1e-12;

/// Truncation radius of a multiplier's series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CutoffChoice {
    pub max_norm: f64,
    /// `Σ d²|c|` over the computed range beyond `max_norm`; `None` when the
    /// search hit its cap with the tail still above tolerance.
    pub tail_bound: Option<f64>,
    pub capped: bool,
}

/// Largest radius searched for a cutoff, by group rank.
fn cutoff_cap(group: GroupId, class: DecayClass) -> f64 {
    let rank = RootSystemData::new(group).rank;
    let base: f64 = match rank {
        1 => 4096.0,
        2 => 64.0,
        _ => 16.0,
    };
    match class {
        DecayClass::SuperPolynomial => base,
        _ => base.min(256.0),
    }
}

fn auto_cutoff(spec: &CentralMeasureSpec, tol: f64) -> Result<CutoffChoice> {
    let rs = RootSystemData::new(spec.group);
    let class = spec.decay_class();
    if let MeasureFamily::CustomScalar(table) = &spec.family {
        let max = table
            .iter()
            .filter(|(_, c)| *c != 0.0)
            .map(|(l, _)| rs.inner(l, l).sqrt())
            .fold(0.0, f64::max);
        return Ok(CutoffChoice { max_norm: max.max(1.0), tail_bound: Some(0.0), capped: false });
    }
    if class == DecayClass::FiniteSupport {
        return Ok(CutoffChoice { max_norm: 1.0, tail_bound: Some(0.0), capped: false });
    }
    let cap = cutoff_cap(spec.group, class);
    let irreps = enumerate_irreps(&rs, cap)?;
    let terms: Vec<f64> = irreps
        .iter()
        .map(|ir| {
            let l = spec.log_abs_multiplier(ir)?;
            Ok((2.0 * ir.dim_f64().ln() + l).exp())
        })
        .collect::<Result<_>>()?;
    // suffix sums, accumulated from the far end
    let mut suffix = vec![0.0; terms.len() + 1];
    for i in (0..terms.len()).rev() {
        suffix[i] = suffix[i + 1] + terms[i];
    }
    // the last term must itself be negligible, otherwise the tail is unknown
    let last_ok = terms.last().is_some_and(|&t| t < tol * 1e-3);
    if last_ok {
        for (i, ir) in irreps.iter().enumerate() {
            // cut after a whole norm shell
            let shell_end = irreps.get(i + 1).is_none_or(|next| next.norm > ir.norm);
            if shell_end && suffix[i + 1] < tol {
                return Ok(CutoffChoice {
                    max_norm: ir.norm.max(1.0),
                    tail_bound: Some(suffix[i + 1]),
                    capped: false,
                });
            }
        }
    }
    Ok(CutoffChoice { max_norm: cap, tail_bound: None, capped: true })
}

/// Density of the push-forward to the conjugacy angle, with respect to
/// Lebesgue measure: `(2/π) sin²θ f(θ)` on `[0, π]` for SU(2)/SO(3) and
/// `f(θ)/2π` on `[0, 2π)` for `T^1`.
pub fn conjugacy_density(spec: &CentralMeasureSpec, theta: f64) -> Result<f64> {
    Ok(ClassDensity::new(spec)?.pdf(theta))
}

/// Reusable evaluator of [`conjugacy_density`].
#[derive(Clone, Debug)]
pub struct ClassDensity {
    pub group: GroupId,
    series: ClassSeries,
    pub cutoff: CutoffChoice,
}

impl ClassDensity {
    pub fn new(spec: &CentralMeasureSpec) -> Result<Self> {
        if !spec.has_density() {
            return unsupported("the Dirac measure has no density");
        }
        match spec.group {
            GroupId::Su2 | GroupId::So3 | GroupId::Torus(1) => {}
            g => return unsupported(format!("conjugacy densities are only provided for su2, so3, torus:1 (got {g})")),
        }
        let cutoff = spec.auto_cutoff()?;
        let rs = RootSystemData::new(spec.group);
        let coeffs = transform_central(spec, &enumerate_irreps(&rs, cutoff.max_norm)?)?;
        Ok(ClassDensity { group: spec.group, series: coeffs.class_series()?, cutoff })
    }

    /// Domain `[0, upper]` of the conjugacy angle.
    pub fn upper(&self) -> f64 {
        if self.group.is_torus() {
            TAU
        } else {
            PI
        }
    }

    /// Class function `f(θ)` (density with respect to Haar measure).
    pub fn class_value(&self, theta: f64) -> f64 {
        self.series.eval(theta).re
    }

    pub fn pdf(&self, theta: f64) -> f64 {
        let f = self.class_value(theta);
        if self.group.is_torus() {
            f / TAU
        } else {
            2.0 / PI * theta.sin().powi(2) * f
        }
    }
}

/// Cells of the inverse-CDF grid.
pub const CDF_GRID: usize = 4096;

/// Inverse-CDF sampler for the conjugacy angle of a central measure.
///
/// The CDF is tabulated on [`CDF_GRID`] cells (4-point Gauss-Legendre per
/// cell) and interpolated by a monotone cubic Hermite spline whose slopes
/// start from the exact density and are limited à la Fritsch-Carlson.
#[derive(Clone, Debug)]
pub struct ClassSampler {
    pub group: GroupId,
    knots: Vec<f64>,
    cdf: Vec<f64>,
    slopes: Vec<f64>,
}

impl ClassSampler {
    pub fn new(spec: &CentralMeasureSpec) -> Result<Self> {
        Self::with_exec(spec, Exec::default())
    }

    pub fn with_exec(spec: &CentralMeasureSpec, exec: Exec) -> Result<Self> {
        let density = ClassDensity::new(spec)?;
        let upper = density.upper();
        let h = upper / CDF_GRID as f64;
        let knots: Vec<f64> = (0..=CDF_GRID).map(|i| i as f64 * h).collect();
        let gl = crate::quadrature::GaussLegendre::new(4);
        let pdf_knots = exec.map_indices(CDF_GRID + 1, |i| density.pdf(knots[i]));
        let cell_mass = exec.map_indices(CDF_GRID, |i| gl.integrate(knots[i], knots[i + 1], |t| density.pdf(t)));
        let worst = pdf_knots.iter().copied().fold(f64::INFINITY, f64::min);
        if worst < -1e-8 {
            return Err(NcfaError::NumericalFailure(format!(
                "truncated density reaches {worst:.3e} < -1e-8; raise the cutoff (currently |λ| ≤ {})",
                density.cutoff.max_norm
            )));
        }
        let mut cdf = Vec::with_capacity(CDF_GRID + 1);
        cdf.push(0.0);
        let mut acc = 0.0;
        for m in &cell_mass {
            acc += m.max(0.0);
            cdf.push(acc);
        }
        let total = acc;
        if !(total > 0.0) {
            return Err(NcfaError::NumericalFailure("density has no mass".into()));
        }
        for c in cdf.iter_mut() {
            *c /= total;
        }
        let mut slopes: Vec<f64> = pdf_knots.iter().map(|p| p.max(0.0) / total).collect();
        // Fritsch-Carlson limiter on each cell
        for i in 0..CDF_GRID {
            let delta = (cdf[i + 1] - cdf[i]) / h;
            if delta <= 0.0 {
                slopes[i] = 0.0;
                slopes[i + 1] = 0.0;
                continue;
            }
            let a = slopes[i] / delta;
            let b = slopes[i + 1] / delta;
            let r = a * a + b * b;
            if r > 9.0 {
                let tau = 3.0 / r.sqrt();
                slopes[i] = tau * a * delta;
                slopes[i + 1] = tau * b * delta;
            }
        }
        Ok(ClassSampler { group: spec.group, knots, cdf, slopes })
    }

    /// CDF of the interpolant.
    pub fn cdf(&self, theta: f64) -> f64 {
        let h = self.knots[1] - self.knots[0];
        let pos = (theta / h).clamp(0.0, CDF_GRID as f64);
        let i = (pos.floor() as usize).min(CDF_GRID - 1);
        self.hermite(i, pos - i as f64)
    }

    fn hermite(&self, i: usize, s: f64) -> f64 {
        let h = self.knots[1] - self.knots[0];
        let (y0, y1) = (self.cdf[i], self.cdf[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * m0 + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * m1
    }

    /// Angle with CDF value `u ∈ [0, 1]`.
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let i = match self.cdf.partition_point(|&c| c <= u) {
            0 => 0,
            p => (p - 1).min(CDF_GRID - 1),
        };
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.hermite(i, mid) < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let h = self.knots[1] - self.knots[0];
        self.knots[i] + 0.5 * (lo + hi) * h
    }

    pub fn sample(&self, count: usize, seed: u64) -> Result<SampleSet> {
        self.sample_with(count, seed, Exec::default())
    }

    pub fn sample_with(&self, count: usize, seed: u64, exec: Exec) -> Result<SampleSet> {
        if count == 0 {
            return invalid("sample count must be at least 1");
        }
        let group = self.group;
        let data = match group {
            GroupId::Torus(_) => {
                let values = chunked_draw(count, seed, exec, |rng| Ok(wrap_angle(self.quantile(rng.random()))))?;
                SampleData::Angles { dim: 1, values }
            }
            _ => {
                let qs = chunked_draw(count, seed, exec, |rng| {
                    let theta = self.quantile(rng.random());
                    let axis: [f64; 3] = rng.sample(UnitSphere);
                    let q = Quaternion::from_angle_axis(theta, axis).normalized();
                    Ok(if group == GroupId::So3 { q.canonical_sign() } else { q })
                })?;
                SampleData::Quaternions(qs)
            }
        };
        Ok(SampleSet { group, data, seed, generator_id: GENERATOR_ID.to_string() })
    }
}

/// i.i.d. draws from a central measure with a density.
pub fn sample_central(spec: &CentralMeasureSpec, count: usize, seed: u64) -> Result<SampleSet> {
    if count == 0 {
        return invalid("sample count must be at least 1");
    }
    ClassSampler::new(spec)?.sample(count, seed)
}

/// Elementwise product `Y_i = X_i ε_i`.
pub fn noise_multiply(xs: &SampleSet, es: &SampleSet) -> Result<SampleSet> {
    if xs.group != es.group {
        return invalid(format!("cannot multiply samples on {} and {}", xs.group, es.group));
    }
    if xs.len() != es.len() {
        return invalid(format!("sample counts differ: {} vs {}", xs.len(), es.len()));
    }
    let data = match (&xs.data, &es.data) {
        (SampleData::Quaternions(a), SampleData::Quaternions(b)) => {
            let so3 = xs.group == GroupId::So3;
            SampleData::Quaternions(
                a.iter()
                    .zip(b)
                    .map(|(x, e)| {
                        let q = (*x * *e).normalized();
                        if so3 {
                            q.canonical_sign()
                        } else {
                            q
                        }
                    })
                    .collect(),
            )
        }
        (SampleData::Angles { dim, values: a }, SampleData::Angles { values: b, .. }) => SampleData::Angles {
            dim: *dim,
            values: a.iter().zip(b).map(|(x, e)| wrap_angle(x + e)).collect(),
        },
        _ => return invalid("sample storage does not match"),
    };
    Ok(SampleSet { group: xs.group, data, seed: xs.seed, generator_id: xs.generator_id.clone() })
}

/// On-disk JSON form, e.g. `{"family": "laplace", "beta": 1.0, "t": 1.0, "group": "su2"}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum MeasureJson {
    Dirac {
        group: GroupId,
    },
    Haar {
        group: GroupId,
    },
    Gaussian {
        sigma2: f64,
        group: GroupId,
    },
    /// Heat semigroup `c = e^{-tκ}`.
    Brownian {
        t: f64,
        group: GroupId,
    },
    Laplace {
        beta: f64,
        #[serde(default = "one")]
        t: f64,
        group: GroupId,
    },
    Stable {
        b: f64,
        alpha: f64,
        #[serde(default = "one")]
        t: f64,
        group: GroupId,
    },
    Custom {
        coeffs: Vec<CustomCoeff>,
        group: GroupId,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CustomCoeff {
    pub lambda: Vec<i64>,
    pub c: f64,
}

fn one() -> f64 {
    1.0
}

impl TryFrom<MeasureJson> for CentralMeasureSpec {
    type Error = NcfaError;

    fn try_from(m: MeasureJson) -> Result<Self> {
        match m {
            MeasureJson::Dirac { group } => Ok(Self::dirac(group)),
            MeasureJson::Haar { group } => Ok(Self::haar(group)),
            MeasureJson::Gaussian { sigma2, group } => Self::gaussian(group, sigma2),
            MeasureJson::Brownian { t, group } => Self::heat(group, t),
            MeasureJson::Laplace { beta, t, group } => Self::laplace(group, beta, t),
            MeasureJson::Stable { b, alpha, t, group } => Self::stable(group, b, alpha, t),
            MeasureJson::Custom { coeffs, group } => {
                Self::custom(group, coeffs.into_iter().map(|c| (c.lambda, c.c)).collect())
            }
        }
    }
}

impl From<CentralMeasureSpec> for MeasureJson {
    fn from(s: CentralMeasureSpec) -> Self {
        let group = s.group;
        match s.family {
            MeasureFamily::Dirac => MeasureJson::Dirac { group },
            MeasureFamily::Haar => MeasureJson::Haar { group },
            MeasureFamily::Gaussian { sigma2 } => MeasureJson::Gaussian { sigma2, group },
            MeasureFamily::Cid(f) => match f.kind {
                Bernstein::Linear => MeasureJson::Brownian { t: f.t, group },
                Bernstein::Laplace { beta } => MeasureJson::Laplace { beta, t: f.t, group },
                Bernstein::Stable { b, alpha } => MeasureJson::Stable { b, alpha, t: f.t, group },
            },
            MeasureFamily::CustomScalar(table) => MeasureJson::Custom {
                coeffs: table.into_iter().map(|(lambda, c)| CustomCoeff { lambda, c }).collect(),
                group,
            },
        }
    }
}

impl std::str::FromStr for CentralMeasureSpec {
    type Err = NcfaError;
    fn from_str(s: &str) -> Result<Self> {
        let json: MeasureJson = serde_json::from_str(s)?;
        CentralMeasureSpec::try_from(json)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{haar_sample, su2_character, WeylRule};
    use crate::spectra::{empirical_transform, EmpiricalMode};
    use crate::stats::{ks_critical_1pct, ks_two_sample};

    const SU2: GroupId = GroupId::Su2;

    fn irrep(n: i64) -> Irrep {
        RootSystemData::new(SU2).irrep(&[n]).unwrap()
    }

    #[test]
    fn multiplier_examples() {
        let k = irrep(2);
        assert_eq!(k.casimir, 2.0);
        let g = CentralMeasureSpec::gaussian(SU2, 2.0).unwrap();
        assert!((g.multiplier(&k).unwrap() - (-2.0f64).exp()).abs() < 1e-16);
        let lap = CentralMeasureSpec::laplace(SU2, 1.0, 1.0).unwrap();
        assert!((lap.multiplier(&k).unwrap() - 1.0 / 3.0).abs() < 1e-16);
        // κ = 4 at the so(3) weight l with l(l+1) = 4 does not exist; use the torus k = 2
        let torus_k = RootSystemData::new(GroupId::Torus(1)).irrep(&[2]).unwrap();
        let st = CentralMeasureSpec::stable(GroupId::Torus(1), 1.0, 1.0, 1.0).unwrap();
        assert!((st.multiplier(&torus_k).unwrap() - (-2.0f64).exp()).abs() < 1e-16);
        assert_eq!(CentralMeasureSpec::dirac(SU2).multiplier(&k).unwrap(), 1.0);
        assert_eq!(CentralMeasureSpec::haar(SU2).multiplier(&k).unwrap(), 0.0);
        assert_eq!(CentralMeasureSpec::haar(SU2).multiplier(&irrep(0)).unwrap(), 1.0);
        assert!(g.multiplier(&torus_k).is_err());
    }

    #[test]
    fn parameter_validation() {
        assert!(CentralMeasureSpec::laplace(SU2, 0.0, 1.0).is_err());
        assert!(CentralMeasureSpec::laplace(SU2, -1.0, 1.0).is_err());
        assert!(CentralMeasureSpec::stable(SU2, 1.0, 2.0, 1.0).is_err());
        assert!(CentralMeasureSpec::stable(SU2, 1.0, 0.0, 1.0).is_err());
        assert!(CentralMeasureSpec::gaussian(SU2, 0.0).is_err());
        assert!(CentralMeasureSpec::heat(SU2, -0.1).is_err());
        assert!(CentralMeasureSpec::custom(SU2, vec![(vec![1], 0.5)]).is_err());
        assert!(CentralMeasureSpec::custom(SU2, vec![(vec![0], 1.0), (vec![1], 1.5)]).is_err());
    }

    #[test]
    fn bernstein_functions_are_bernstein_like() {
        for kind in [Bernstein::Linear, Bernstein::Laplace { beta: 0.7 }, Bernstein::Stable { b: 2.0, alpha: 0.5 }] {
            let f = BernsteinFunction::new(kind, 1.0).unwrap();
            assert_eq!(f.eval(0.0), 0.0);
            let grid: Vec<f64> = (0..2000).map(|i| i as f64 * 0.5).collect();
            assert!(grid.windows(2).all(|w| f.eval(w[1]) >= f.eval(w[0])));
        }
    }

    #[test]
    fn multipliers_are_probability_contracts() {
        let specs = [
            CentralMeasureSpec::dirac(SU2),
            CentralMeasureSpec::haar(SU2),
            CentralMeasureSpec::gaussian(SU2, 0.3).unwrap(),
            CentralMeasureSpec::heat(SU2, 0.05).unwrap(),
            CentralMeasureSpec::laplace(SU2, 2.0, 0.5).unwrap(),
            CentralMeasureSpec::stable(SU2, 0.5, 1.5, 2.0).unwrap(),
        ];
        let irreps = enumerate_irreps(&RootSystemData::new(SU2), 40.0).unwrap();
        for s in &specs {
            assert_eq!(s.multiplier(&irreps[0]).unwrap(), 1.0);
            for ir in &irreps {
                assert!(s.multiplier(ir).unwrap().abs() <= 1.0);
            }
        }
    }

    #[test]
    fn cutoff_meets_tail_tolerance() {
        let g = CentralMeasureSpec::heat(SU2, 0.1).unwrap();
        let cut = g.auto_cutoff().unwrap();
        assert!(!cut.capped);
        assert!(cut.tail_bound.unwrap() < TAIL_TOLERANCE);
        // independent tail: Σ_{n/2 > R} (n+1)² e^{-0.1 n(n+2)/4}
        let first = (2.0 * cut.max_norm).floor() as u32 + 1;
        let tail: f64 = (first..first + 400)
            .map(|n| (n as f64 + 1.0).powi(2) * (-0.1 * n as f64 * (n as f64 + 2.0) / 4.0).exp())
            .sum();
        assert!(tail < 1e-12);
        let lap = CentralMeasureSpec::laplace(SU2, 1.0, 1.0).unwrap().auto_cutoff().unwrap();
        assert!(lap.capped && lap.tail_bound.is_none());
    }

    #[test]
    fn haar_conjugacy_density() {
        let haar = CentralMeasureSpec::haar(SU2);
        for th in [0.0f64, 0.4, 1.5, 3.0] {
            let want = 2.0 / PI * th.sin().powi(2);
            assert!((conjugacy_density(&haar, th).unwrap() - want).abs() < 1e-15);
        }
        assert!(matches!(conjugacy_density(&CentralMeasureSpec::dirac(SU2), 1.0), Err(NcfaError::Unsupported(_))));
    }

    #[test]
    fn gaussian_density_is_normalized_and_nonnegative() {
        let d = ClassDensity::new(&CentralMeasureSpec::heat(SU2, 0.2).unwrap()).unwrap();
        let rule = WeylRule::new(SU2, 256).unwrap();
        assert!((rule.integrate(|t| d.class_value(t)) - 1.0).abs() < 1e-9);
        let by_lebesgue = crate::quadrature::CompositeRule::new(0.0, PI, 256).integrate(|t| d.pdf(t));
        assert!((by_lebesgue - 1.0).abs() < 1e-9);
        assert!((0..=512).all(|i| d.pdf(i as f64 * PI / 512.0) >= -1e-8));
    }

    #[test]
    fn laplace_density_matches_closed_form() {
        // Σ k sin(kθ)/(k² + a²) = π sinh(a(π-θ)) / (2 sinh(aπ)) with k = n+1, a² = 3
        let a = 3f64.sqrt();
        let exact = |t: f64| 2.0 * PI * (a * (PI - t)).sinh() / ((a * PI).sinh() * t.sin());
        let d = ClassDensity::new(&CentralMeasureSpec::laplace(SU2, 1.0, 1.0).unwrap()).unwrap();
        for t in [0.3f64, 1.0, 2.0, 2.8] {
            let pdf_exact = 2.0 / PI * t.sin().powi(2) * exact(t);
            assert!((d.pdf(t) - pdf_exact).abs() < 1e-2, "θ={t}: {} vs {pdf_exact}", d.pdf(t));
        }
        let vals: Vec<f64> = (1..1000).map(|i| d.pdf(i as f64 * PI / 1000.0)).collect();
        assert!(vals.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn sampler_reproducible_and_policy_independent() {
        let spec = CentralMeasureSpec::heat(SU2, 0.3).unwrap();
        let s = ClassSampler::new(&spec).unwrap();
        let a = s.sample_with(9000, 5, Exec::Sequential).unwrap();
        let b = s.sample_with(9000, 5, Exec::Parallel).unwrap();
        assert_eq!(a, b);
        assert_eq!(sample_central(&spec, 1, 77).unwrap(), sample_central(&spec, 1, 77).unwrap());
        assert!(sample_central(&spec, 0, 1).is_err());
        assert!(sample_central(&CentralMeasureSpec::dirac(SU2), 10, 1).is_err());
    }

    #[test]
    fn quantile_inverts_cdf() {
        let s = ClassSampler::new(&CentralMeasureSpec::heat(SU2, 0.1).unwrap()).unwrap();
        for u in [0.01, 0.2, 0.5, 0.9, 0.999] {
            assert!((s.cdf(s.quantile(u)) - u).abs() < 1e-12);
        }
    }

    #[test]
    fn too_negative_truncation_is_reported() {
        let bad = CentralMeasureSpec::custom(SU2, vec![(vec![0], 1.0), (vec![1], -1.0)]).unwrap();
        assert!(matches!(ClassSampler::new(&bad), Err(NcfaError::NumericalFailure(_))));
    }

    #[test]
    fn haar_spec_sampler_matches_haar_sampling() {
        let n = 20_000;
        let a = sample_central(&CentralMeasureSpec::haar(SU2), n, 1).unwrap().class_angles().unwrap();
        let b = haar_sample(SU2, n, 2).unwrap().class_angles().unwrap();
        assert!(ks_two_sample(&a, &b) < ks_critical_1pct(n, Some(n)));
    }

    #[test]
    fn gaussian_samples_hit_the_first_moment() {
        let n = 100_000;
        let t = 0.1;
        let s = sample_central(&CentralMeasureSpec::heat(SU2, t).unwrap(), n, 42).unwrap();
        let mean: f64 = s.class_angles().unwrap().iter().map(|&th| su2_character(1, th)).sum::<f64>() / n as f64;
        let want = 2.0 * (-0.075f64).exp();
        assert!((mean - want).abs() <= 3.0 * 2.0 / (n as f64).sqrt(), "{mean} vs {want}");
    }

    #[test]
    fn noise_multiply_examples() {
        let xs = haar_sample(SU2, 50, 3).unwrap();
        let id = SampleSet {
            group: SU2,
            data: SampleData::Quaternions(vec![Quaternion::IDENTITY; 50]),
            seed: 0,
            generator_id: "identity".into(),
        };
        let ys = noise_multiply(&xs, &id).unwrap();
        for (a, b) in xs.quaternions().unwrap().iter().zip(ys.quaternions().unwrap()) {
            assert!((a.dot(*b) - 1.0).abs() < 1e-15);
        }
        let short = haar_sample(SU2, 49, 3).unwrap();
        assert!(noise_multiply(&xs, &short).is_err());
        assert!(noise_multiply(&xs, &haar_sample(GroupId::So3, 50, 1).unwrap()).is_err());
    }

    #[test]
    fn noise_multiply_composes_heat_kernels() {
        let n = 100_000;
        let (t1, t2) = (0.1, 0.2);
        let xs = sample_central(&CentralMeasureSpec::heat(SU2, t1).unwrap(), n, 10).unwrap();
        let es = sample_central(&CentralMeasureSpec::heat(SU2, t2).unwrap(), n, 11).unwrap();
        let ys = noise_multiply(&xs, &es).unwrap();
        let c = empirical_transform(&ys, &[irrep(1)], EmpiricalMode::TraceOnly).unwrap();
        let tr = c.entries[0].block.trace(2).re;
        let want = 2.0 * (-(t1 + t2) * 0.75f64).exp();
        assert!((tr - want).abs() <= 3.0 * 2.0 / (n as f64).sqrt());
    }

    #[test]
    fn measure_json() {
        let s: CentralMeasureSpec = r#"{"family":"laplace","beta":1.0,"t":1.0,"group":"su2"}"#.parse().unwrap();
        assert_eq!(s, CentralMeasureSpec::laplace(SU2, 1.0, 1.0).unwrap());
        let st: CentralMeasureSpec = r#"{"family":"stable","b":1.0,"alpha":0.5,"group":"torus:1"}"#.parse().unwrap();
        assert_eq!(st, CentralMeasureSpec::stable(GroupId::Torus(1), 1.0, 0.5, 1.0).unwrap());
        let back: CentralMeasureSpec = serde_json::to_string(&st).unwrap().parse().unwrap();
        assert_eq!(back, st);
        assert!(r#"{"family":"laplace","beta":-1.0,"group":"su2"}"#.parse::<CentralMeasureSpec>().is_err());
        assert!(r#"{"family":"cauchy","group":"su2"}"#.parse::<CentralMeasureSpec>().is_err());
    }

    #[test]
    fn decay_classes() {
        assert_eq!(CentralMeasureSpec::haar(SU2).decay_class(), DecayClass::FiniteSupport);
        assert_eq!(CentralMeasureSpec::dirac(SU2).decay_class(), DecayClass::Polynomial { order: 0.0 });
        assert_eq!(
            CentralMeasureSpec::laplace(SU2, 3.0, 1.5).unwrap().decay_class(),
            DecayClass::Polynomial { order: 3.0 }
        );
        assert_eq!(CentralMeasureSpec::stable(SU2, 1.0, 0.3, 1.0).unwrap().decay_class(), DecayClass::SuperPolynomial);
    }
}
