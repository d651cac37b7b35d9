//! Density deconvolution for `Y = Xε` with known central noise `ε`.
//!
//! The estimator is the spectral-cutoff inversion
//! `f_X(σ) ≈ Σ_{κ_λ < T} d_λ tr(π_λ(σ) f̂_Y(λ) f̂_ε(λ)^{-1})`. With central
//! noise `f̂_ε(λ) = c_ε(λ) I`, and the trace collapses to the character sum
//! `Σ_{κ_λ < T} d_λ c_ε(λ)^{-1} (1/n) Σ_i χ_λ(Y_i^{-1} σ)`, which is what
//! [`estimate`] evaluates. Estimates are taken at the representatives
//! `σ(θ) = (cos θ, sin θ, 0, 0)`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{supersmooth_fit, Source, SuperSmoothFit};
use crate::dual::{enumerate_irreps, GroupId, Irrep, RootSystemData};
use crate::error::{invalid, unsupported, Result};
use crate::exec::Exec;
use crate::groups::{chebyshev_u_into, derive_seed, GroupElement, Quaternion, SampleData, SampleSet};
use crate::measures::{noise_multiply, sample_central, ClassDensity, CentralMeasureSpec, MeasureFamily};
use crate::spectra::{empirical_transform_with, synthesize_complex, CoeffBlock, EmpiricalMode, SpectralCoeffs, SynthesisPoint};
use crate::stats::linear_fit;

/// Smallest noise multiplier the inversion accepts.
pub const MIN_NOISE_MULTIPLIER: f64 = 1e-300;

/// How the spectral cutoff `T_n` (a bound on the Casimir) is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffRule {
    Fixed(f64),
    /// `T_n = scale · (ln n)^{1/β̂} / (2γ̂)^{1/β̂}` from the noise fit.
    LogRule(f64),
}

fn default_grid() -> usize {
    256
}

fn default_sobolev() -> f64 {
    2.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeconvConfig {
    #[serde(alias = "group_id")]
    pub group: GroupId,
    pub signal: CentralMeasureSpec,
    pub noise: CentralMeasureSpec,
    pub n_values: Vec<usize>,
    pub cutoff_rule: CutoffRule,
    #[serde(default = "default_grid")]
    pub eval_grid: usize,
    pub seed: u64,
    /// Smoothness order `s` used only for the reported rate `-s/(2β)`.
    #[serde(default = "default_sobolev")]
    pub sobolev_order: f64,
}

impl DeconvConfig {
    pub fn validate(&self) -> Result<()> {
        if self.signal.group != self.group || self.noise.group != self.group {
            return invalid(format!(
                "signal ({}) and noise ({}) must live on the configured group {}",
                self.signal.group, self.noise.group, self.group
            ));
        }
        check_group(self.group)?;
        if !self.signal.has_density() {
            return invalid("the signal must have a density");
        }
        if self.n_values.is_empty() {
            return invalid("n_values is empty");
        }
        if let Some(n) = self.n_values.iter().find(|&&n| n < 2) {
            return invalid(format!("sample sizes must be at least 2, got {n}"));
        }
        if self.eval_grid < 16 {
            return invalid(format!("eval_grid must be at least 16, got {}", self.eval_grid));
        }
        match self.cutoff_rule {
            CutoffRule::Fixed(t) | CutoffRule::LogRule(t) if !(t > 0.0 && t.is_finite()) => {
                invalid(format!("cutoff parameter must be positive, got {t}"))
            }
            _ if !(self.sobolev_order >= 0.0) => invalid("sobolev_order must be nonnegative"),
            _ => Ok(()),
        }
    }
}

fn check_group(group: GroupId) -> Result<()> {
    match group {
        GroupId::Su2 | GroupId::So3 | GroupId::Torus(1) => Ok(()),
        g => unsupported(format!("deconvolution is implemented for su2, so3 and torus:1, not {g}")),
    }
}

/// Uniform grid of conjugacy angles with Weyl-weighted midpoint weights
/// (weights sum to one).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalGrid {
    pub group: GroupId,
    pub angles: Vec<f64>,
    pub weights: Vec<f64>,
}

impl EvalGrid {
    pub fn uniform(group: GroupId, npoints: usize) -> Result<Self> {
        check_group(group)?;
        if npoints < 16 {
            return invalid(format!("grid needs at least 16 points, got {npoints}"));
        }
        let n = npoints as f64;
        let (angles, weights) = match group {
            GroupId::Torus(_) => (0..npoints).map(|j| ((j as f64 + 0.5) * TAU / n, 1.0 / n)).unzip(),
            _ => (0..npoints)
                .map(|j| {
                    let t = (j as f64 + 0.5) * PI / n;
                    (t, 2.0 / n * t.sin().powi(2))
                })
                .unzip(),
        };
        Ok(EvalGrid { group, angles, weights })
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    /// The representative `σ(θ)` of each grid angle.
    pub fn elements(&self) -> Vec<GroupElement> {
        self.angles
            .iter()
            .map(|&t| match self.group {
                GroupId::Torus(_) => GroupElement::Angles(vec![t]),
                _ => GroupElement::Quat(Quaternion::new(t.cos(), t.sin(), 0.0, 0.0)),
            })
            .collect()
    }
}

/// Irreps with `κ < cutoff` and the weights `1/c_ε` used for them.
fn inversion_weights(noise: &CentralMeasureSpec, cutoff: f64) -> Result<Vec<(Irrep, f64)>> {
    if !(cutoff > 0.0 && cutoff.is_finite()) {
        return invalid(format!("cutoff must be positive, got {cutoff}"));
    }
    let rs = RootSystemData::new(noise.group);
    // κ ≥ |λ|² in every supported group
    let irreps = enumerate_irreps(&rs, cutoff.sqrt().max(1.0))?;
    irreps
        .into_iter()
        .filter(|ir| ir.casimir < cutoff)
        .map(|ir| {
            let c = noise.multiplier(&ir)?;
            if c.abs() <= MIN_NOISE_MULTIPLIER {
                return invalid(format!(
                    "noise multiplier {c} at lambda = {:?} (kappa = {}) cannot be inverted",
                    ir.lambda, ir.casimir
                ));
            }
            Ok((ir, 1.0 / c))
        })
        .collect()
}

fn character_sum(samples: &SampleSet, weights: &[(Irrep, f64)], grid: &EvalGrid, exec: Exec) -> Result<Vec<f64>> {
    if samples.group != grid.group {
        return invalid(format!("samples on {} but grid on {}", samples.group, grid.group));
    }
    if samples.is_empty() {
        return invalid("no samples");
    }
    let inv_n = 1.0 / samples.len() as f64;
    match &samples.data {
        SampleData::Quaternions(qs) => {
            let top = weights.iter().map(|(ir, _)| ir.su2_label() as usize).max().unwrap_or(0);
            let mut coef = vec![0.0; top + 1];
            for (ir, w) in weights {
                coef[ir.su2_label() as usize] = ir.dim_f64() * w;
            }
            Ok(exec.map_indices(grid.len(), |j| {
                let (s, c) = grid.angles[j].sin_cos();
                let mut u = vec![0.0; top + 1];
                let mut acc = 0.0;
                for q in qs {
                    // Re(Y⁻¹σ) = ⟨Y, σ⟩ = cos θ(Y⁻¹σ)
                    chebyshev_u_into(q.w * c + q.x * s, &mut u);
                    acc += coef.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>();
                }
                acc * inv_n
            }))
        }
        SampleData::Angles { dim: 1, values } => {
            // abelian case: the empirical coefficients carry everything
            let means: Vec<(i64, f64, Complex64)> = weights
                .iter()
                .map(|(ir, w)| {
                    let k = ir.lambda[0];
                    let m: Complex64 = values.iter().map(|&y| Complex64::from_polar(1.0, -(k as f64) * y)).sum();
                    (k, *w, m * inv_n)
                })
                .collect();
            Ok(exec.map_indices(grid.len(), |j| {
                let t = grid.angles[j];
                means
                    .iter()
                    .map(|&(k, w, m)| w * (m * Complex64::from_polar(1.0, k as f64 * t)).re)
                    .sum()
            }))
        }
        SampleData::Angles { .. } => unsupported("deconvolution on tori of dimension above one"),
    }
}

/// Deconvolution estimate of `f_X` on the grid from samples of `Y = Xε`.
pub fn estimate(samples: &SampleSet, noise: &CentralMeasureSpec, cutoff: f64, grid: &EvalGrid) -> Result<Vec<f64>> {
    estimate_with(samples, noise, cutoff, grid, Exec::default())
}

pub fn estimate_with(
    samples: &SampleSet,
    noise: &CentralMeasureSpec,
    cutoff: f64,
    grid: &EvalGrid,
    exec: Exec,
) -> Result<Vec<f64>> {
    if noise.group != samples.group {
        return invalid(format!("noise on {} but samples on {}", noise.group, samples.group));
    }
    character_sum(samples, &inversion_weights(noise, cutoff)?, grid, exec)
}

/// The same cutoff series with the noise ignored (`c_ε ≡ 1`).
pub fn naive_estimate(samples: &SampleSet, cutoff: f64, grid: &EvalGrid, exec: Exec) -> Result<Vec<f64>> {
    estimate_with(samples, &CentralMeasureSpec::dirac(samples.group), cutoff, grid, exec)
}

/// Reference implementation through full representation matrices:
/// `Σ d_λ tr(π_λ(σ) F̂_Y(λ)) / c_ε(λ)` with `F̂_Y(λ) = (1/n) Σ π_λ(Y_i⁻¹)`.
/// Cost grows like `d³`; meant for validating [`estimate`].
pub fn estimate_full_matrix(
    samples: &SampleSet,
    noise: &CentralMeasureSpec,
    cutoff: f64,
    grid: &EvalGrid,
) -> Result<Vec<f64>> {
    let weights = inversion_weights(noise, cutoff)?;
    let irreps: Vec<Irrep> = weights.iter().map(|(ir, _)| ir.clone()).collect();
    let mut emp = empirical_transform_with(samples, &irreps, EmpiricalMode::FullMatrix, Exec::Sequential)?;
    for (e, (_, w)) in emp.entries.iter_mut().zip(&weights) {
        e.block = match &e.block {
            CoeffBlock::Matrix(m) => CoeffBlock::Matrix(m * Complex64::from(*w)),
            CoeffBlock::Scalar(c) => CoeffBlock::Scalar(c * *w),
        };
    }
    grid.elements()
        .into_iter()
        .map(|g| synthesize_complex(&emp, &SynthesisPoint::Element(g)).map(|z| z.re))
        .collect()
}

/// Weyl-weighted `L²` distance between grid values and a central density:
/// `sqrt(Σ_j w_j (f_est(θ_j) - f(θ_j))²)`.
pub fn l2_error(values: &[f64], truth: &CentralMeasureSpec, grid: &EvalGrid) -> Result<f64> {
    if values.len() != grid.len() {
        return invalid(format!("{} values for a grid of {} points", values.len(), grid.len()));
    }
    if truth.group != grid.group {
        return invalid(format!("truth on {} but grid on {}", truth.group, grid.group));
    }
    let density = ClassDensity::new(truth)?;
    Ok(values
        .iter()
        .zip(&grid.angles)
        .zip(&grid.weights)
        .map(|((v, &t), w)| w * (v - density.class_value(t)).powi(2))
        .sum::<f64>()
        .sqrt())
}

/// `‖f - Σ_{κ<T} …‖₂`: the error of the exact cutoff series, by Plancherel.
pub fn truncation_bias(truth: &CentralMeasureSpec, cutoff: f64) -> Result<f64> {
    let coeffs: SpectralCoeffs = truth.coefficients()?;
    Ok(coeffs
        .entries
        .iter()
        .filter(|e| e.irrep.casimir >= cutoff)
        .map(|e| e.irrep.dim_f64() * e.block.frobenius_sq(e.irrep.dim))
        .sum::<f64>()
        .sqrt())
}

/// Casimir cutoff `T_n` for sample size `n`.
pub fn cutoff_from_rule(rule: CutoffRule, n: usize, noise_fit: Option<&SuperSmoothFit>) -> Result<f64> {
    if n < 2 {
        return invalid(format!("sample size must be at least 2, got {n}"));
    }
    match rule {
        CutoffRule::Fixed(t) => Ok(t),
        CutoffRule::LogRule(scale) => {
            let Some(fit) = noise_fit else {
                return invalid("log_rule needs a super-smooth fit of the noise");
            };
            if !(fit.beta_hat > 0.0 && fit.gamma_hat > 0.0) {
                return invalid(format!(
                    "log_rule needs beta > 0 and gamma > 0, fit gave beta = {}, gamma = {}",
                    fit.beta_hat, fit.gamma_hat
                ));
            }
            let inv_b = 1.0 / fit.beta_hat;
            let t = scale * (n as f64).ln().powf(inv_b) / (2.0 * fit.gamma_hat).powf(inv_b);
            // κ = 0 must stay below the cutoff
            Ok(t.max(f64::MIN_POSITIVE))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeconvRow {
    pub n: usize,
    pub cutoff_used: f64,
    pub irreps_used: usize,
    pub l2_error: f64,
    pub naive_error: f64,
    /// Error of the noiseless, infinite-sample cutoff series.
    pub bias_floor: f64,
    pub signal_seed: u64,
    pub noise_seed: u64,
}

/// Least-squares fit of `ln error` against `ln ln n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    /// `-s/(2β̂)`, reported for comparison only.
    pub theoretical_slope: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeconvReport {
    pub group: GroupId,
    pub eval_grid: usize,
    pub rows: Vec<DeconvRow>,
    pub rate_fit: Option<RateFit>,
    pub noise_fit: Option<SuperSmoothFit>,
}

/// Report plus the grid values behind it.
#[derive(Clone, Debug)]
pub struct ExperimentRun {
    pub report: DeconvReport,
    pub grid: EvalGrid,
    /// One estimate per entry of `n_values`.
    pub estimates: Vec<Vec<f64>>,
    pub truth: Vec<f64>,
}

/// Seeds of the signal and noise streams for sample size `n`.
pub fn experiment_seeds(seed: u64, n: usize) -> (u64, u64) {
    let base = derive_seed(seed, n as u64);
    (derive_seed(base, 0), derive_seed(base, 1))
}

pub fn run_experiment(config: &DeconvConfig) -> Result<DeconvReport> {
    Ok(run_experiment_with(config, Exec::default())?.report)
}

pub fn run_experiment_with(config: &DeconvConfig, exec: Exec) -> Result<ExperimentRun> {
    config.validate()?;
    let grid = EvalGrid::uniform(config.group, config.eval_grid)?;
    let noise_fit = match config.cutoff_rule {
        CutoffRule::LogRule(_) => Some(supersmooth_fit(Source::Spec(&config.noise), None)?),
        CutoffRule::Fixed(_) => supersmooth_fit(Source::Spec(&config.noise), None).ok(),
    };
    let density = ClassDensity::new(&config.signal)?;
    let truth: Vec<f64> = grid.angles.iter().map(|&t| density.class_value(t)).collect();
    let mut rows = Vec::with_capacity(config.n_values.len());
    let mut estimates = Vec::with_capacity(config.n_values.len());
    for &n in &config.n_values {
        let (signal_seed, noise_seed) = experiment_seeds(config.seed, n);
        let xs = sample_central(&config.signal, n, signal_seed)?;
        let ys = match config.noise.family {
            MeasureFamily::Dirac => xs,
            _ => noise_multiply(&xs, &sample_central(&config.noise, n, noise_seed)?)?,
        };
        let cutoff = cutoff_from_rule(config.cutoff_rule, n, noise_fit.as_ref())?;
        let weights = inversion_weights(&config.noise, cutoff)?;
        let est = character_sum(&ys, &weights, &grid, exec)?;
        let naive = naive_estimate(&ys, cutoff, &grid, exec)?;
        rows.push(DeconvRow {
            n,
            cutoff_used: cutoff,
            irreps_used: weights.len(),
            l2_error: l2_error(&est, &config.signal, &grid)?,
            naive_error: l2_error(&naive, &config.signal, &grid)?,
            bias_floor: truncation_bias(&config.signal, cutoff)?,
            signal_seed,
            noise_seed,
        });
        estimates.push(est);
    }
    let rate_fit = rate_fit(&rows, config.sobolev_order, noise_fit.as_ref());
    Ok(ExperimentRun {
        report: DeconvReport { group: config.group, eval_grid: config.eval_grid, rows, rate_fit, noise_fit },
        grid,
        estimates,
        truth,
    })
}

fn rate_fit(rows: &[DeconvRow], s: f64, fit: Option<&SuperSmoothFit>) -> Option<RateFit> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.n >= 3 && r.l2_error > 0.0)
        .map(|r| ((r.n as f64).ln().ln(), r.l2_error.ln()))
        .collect();
    let distinct = pts.iter().any(|p| (p.0 - pts[0].0).abs() > 1e-12);
    if pts.len() < 2 || !distinct {
        return None;
    }
    let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    let (slope, intercept) = linear_fit(&x, &y);
    let residual = (x.iter().zip(&y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum::<f64>() / x.len() as f64).sqrt();
    Some(RateFit {
        slope,
        intercept,
        residual,
        theoretical_slope: fit.filter(|f| f.beta_hat > 0.0).map(|f| -s / (2.0 * f.beta_hat)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::haar_sample;
    use crate::spectra::empirical_transform;
    use crate::stats::{mean, std_dev};

    const SU2: GroupId = GroupId::Su2;

    fn heat(t: f64) -> CentralMeasureSpec {
        CentralMeasureSpec::heat(SU2, t).unwrap()
    }

    #[test]
    fn grid_weights_integrate_class_functions() {
        let g = EvalGrid::uniform(SU2, 256).unwrap();
        assert!((g.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        let d = ClassDensity::new(&heat(0.2)).unwrap();
        let total: f64 = g.angles.iter().zip(&g.weights).map(|(&t, w)| w * d.class_value(t)).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(EvalGrid::uniform(SU2, 8).is_err());
        assert!(EvalGrid::uniform(GroupId::Torus(2), 64).is_err());
    }

    #[test]
    fn l2_error_examples() {
        let g = EvalGrid::uniform(SU2, 256).unwrap();
        let h = heat(0.1);
        let d = ClassDensity::new(&h).unwrap();
        let own: Vec<f64> = g.angles.iter().map(|&t| d.class_value(t)).collect();
        assert_eq!(l2_error(&own, &h, &g).unwrap(), 0.0);
        let ones = vec![1.0; 256];
        let spectral: f64 = (1..400)
            .map(|n| {
                let n = n as f64;
                (n + 1.0).powi(2) * (-0.2 * n * (n + 2.0) / 4.0).exp()
            })
            .sum::<f64>()
            .sqrt();
        assert!((l2_error(&ones, &h, &g).unwrap() - spectral).abs() < 1e-6);
        assert!(l2_error(&ones[..10], &h, &g).is_err());
    }

    #[test]
    fn character_sum_matches_full_matrix_oracle() {
        let ys = noise_multiply(
            &sample_central(&heat(0.1), 100, 1).unwrap(),
            &sample_central(&heat(0.05), 100, 2).unwrap(),
        )
        .unwrap();
        let grid = EvalGrid::uniform(SU2, 32).unwrap();
        // κ < 12.5 admits n ≤ 6
        let cutoff = 12.5;
        assert_eq!(inversion_weights(&heat(0.05), cutoff).unwrap().len(), 7);
        let fast = estimate(&ys, &heat(0.05), cutoff, &grid).unwrap();
        let slow = estimate_full_matrix(&ys, &heat(0.05), cutoff, &grid).unwrap();
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn exec_policies_agree_bitwise() {
        let ys = haar_sample(SU2, 5000, 9).unwrap();
        let grid = EvalGrid::uniform(SU2, 64).unwrap();
        let a = estimate_with(&ys, &heat(0.05), 20.0, &grid, Exec::Sequential).unwrap();
        let b = estimate_with(&ys, &heat(0.05), 20.0, &grid, Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn noiseless_haar_estimates_one() {
        let n = 20_000;
        let ys = haar_sample(SU2, n, 3).unwrap();
        let grid = EvalGrid::uniform(SU2, 64).unwrap();
        let est = estimate(&ys, &CentralMeasureSpec::dirac(SU2), 6.0, &grid).unwrap();
        let err = l2_error(&est, &CentralMeasureSpec::haar(SU2), &grid).unwrap();
        // Σ_{0<κ<6} d² = 2²+3²+4² = 29 terms of variance ≤ 1/n each
        assert!(err < 3.0 * (29.0 / n as f64).sqrt(), "{err}");
    }

    #[test]
    fn haar_is_a_fixed_point() {
        let config = DeconvConfig {
            group: SU2,
            signal: CentralMeasureSpec::haar(SU2),
            noise: heat(0.05),
            n_values: vec![20_000],
            cutoff_rule: CutoffRule::Fixed(6.0),
            eval_grid: 64,
            seed: 5,
            sobolev_order: 2.0,
        };
        let r = run_experiment(&config).unwrap();
        let row = &r.rows[0];
        // inverse multipliers inflate the variance by at most e^{2·0.05·6}
        let floor = (29.0 * (0.6f64).exp() / 20_000.0).sqrt();
        assert!(row.l2_error < 3.0 * floor && row.naive_error < 3.0 * floor, "{row:?}");
        assert_eq!(row.bias_floor, 0.0);
    }

    #[test]
    fn corrected_beats_naive_at_fixed_cutoff() {
        let config = DeconvConfig {
            group: SU2,
            signal: heat(0.1),
            noise: heat(0.05),
            n_values: vec![100_000],
            cutoff_rule: CutoffRule::Fixed(12.0),
            eval_grid: 128,
            seed: 42,
            sobolev_order: 2.0,
        };
        let row = run_experiment(&config).unwrap().rows[0].clone();
        assert!(row.l2_error < row.naive_error, "{row:?}");
    }

    #[test]
    fn tiny_cutoff_plateaus_at_bias_floor() {
        let mk = |n| DeconvConfig {
            group: SU2,
            signal: heat(0.1),
            noise: heat(0.05),
            n_values: vec![n],
            cutoff_rule: CutoffRule::Fixed(0.5),
            eval_grid: 256,
            seed: 7,
            sobolev_order: 2.0,
        };
        let floor = truncation_bias(&heat(0.1), 0.5).unwrap();
        // κ < 1/2 keeps only the trivial irrep, so the estimate is exactly 1
        let row = run_experiment(&mk(1000)).unwrap().rows[0].clone();
        assert_eq!(row.irreps_used, 1);
        assert!((row.l2_error - floor).abs() < 1e-6 * floor);
        let row = DeconvConfig { cutoff_rule: CutoffRule::Fixed(3.0), ..mk(100_000) };
        let r = run_experiment(&row).unwrap().rows[0].clone();
        let floor3 = truncation_bias(&heat(0.1), 3.0).unwrap();
        assert!((r.l2_error - floor3).abs() < 0.02 * floor3, "{r:?} vs {floor3}");
    }

    #[test]
    fn log_rule_cutoffs() {
        let fit = supersmooth_fit(Source::Spec(&heat(0.05)), None).unwrap();
        let n = 10f64.exp().round() as usize;
        let exact = SuperSmoothFit { beta_hat: 1.0, gamma_hat: 0.05, ..fit.clone() };
        let t = cutoff_from_rule(CutoffRule::LogRule(1.0), n, Some(&exact)).unwrap();
        assert!((t - (n as f64).ln() / 0.1).abs() < 1e-9);
        assert!((t - 100.0).abs() < 0.01);
        assert_eq!(cutoff_from_rule(CutoffRule::Fixed(5.0), 1000, None).unwrap(), 5.0);
        assert!(cutoff_from_rule(CutoffRule::LogRule(1.0), 1000, None).is_err());
        assert!(cutoff_from_rule(CutoffRule::Fixed(5.0), 1, None).is_err());
        let ts: Vec<f64> = [10, 100, 1000, 100_000]
            .iter()
            .map(|&n| cutoff_from_rule(CutoffRule::LogRule(0.26), n, Some(&fit)).unwrap())
            .collect();
        assert!(ts.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn noninvertible_noise_is_rejected() {
        let ys = haar_sample(SU2, 100, 1).unwrap();
        let grid = EvalGrid::uniform(SU2, 32).unwrap();
        assert!(estimate(&ys, &CentralMeasureSpec::haar(SU2), 3.0, &grid).is_err());
        let holes = CentralMeasureSpec::custom(SU2, vec![(vec![0], 1.0), (vec![2], 0.5)]).unwrap();
        // κ_1 = 3/4 has a zero multiplier
        assert!(estimate(&ys, &holes, 0.5, &grid).is_ok());
        assert!(estimate(&ys, &holes, 1.0, &grid).is_err());
    }

    #[test]
    fn empirical_traces_are_unbiased() {
        let (tx, te) = (0.1, 0.05);
        let irreps = enumerate_irreps(&RootSystemData::new(SU2), 2.0).unwrap();
        let mut per_seed: Vec<Vec<f64>> = vec![Vec::new(); irreps.len()];
        for s in 0..50u64 {
            let ys = noise_multiply(
                &sample_central(&heat(tx), 1000, 2 * s).unwrap(),
                &sample_central(&heat(te), 1000, 2 * s + 1).unwrap(),
            )
            .unwrap();
            let c = empirical_transform(&ys, &irreps, EmpiricalMode::TraceOnly).unwrap();
            for (i, e) in c.entries.iter().enumerate() {
                per_seed[i].push(e.block.trace(e.irrep.dim).re);
            }
        }
        for (ir, vals) in irreps.iter().zip(&per_seed) {
            let want = ir.dim_f64() * (-(tx + te) * ir.casimir).exp();
            let se = std_dev(vals) / (vals.len() as f64).sqrt();
            if se == 0.0 {
                assert!((mean(vals) - want).abs() < 1e-12);
            } else {
                assert!((mean(vals) - want).abs() < 4.0 * se, "{:?}: {} vs {want}", ir.lambda, mean(vals));
            }
        }
    }

    #[test]
    fn torus_deconvolution_runs() {
        let g = GroupId::Torus(1);
        let config = DeconvConfig {
            group: g,
            signal: CentralMeasureSpec::heat(g, 0.1).unwrap(),
            noise: CentralMeasureSpec::heat(g, 0.05).unwrap(),
            n_values: vec![1000, 100_000],
            cutoff_rule: CutoffRule::LogRule(0.26),
            eval_grid: 128,
            seed: 42,
            sobolev_order: 2.0,
        };
        let r = run_experiment(&config).unwrap();
        assert!(r.rows[1].l2_error < r.rows[0].l2_error, "{:?}", r.rows);
        assert!(r.rate_fit.is_some());
    }

    #[test]
    fn config_json() {
        let text = r#"{
            "group": "su2",
            "signal": {"family": "brownian", "t": 0.1, "group": "su2"},
            "noise": {"family": "brownian", "t": 0.05, "group": "su2"},
            "n_values": [1000, 10000],
            "cutoff_rule": {"log_rule": 0.26},
            "seed": 42
        }"#;
        let c: DeconvConfig = serde_json::from_str(text).unwrap();
        assert_eq!(c.eval_grid, 256);
        assert_eq!(c.cutoff_rule, CutoffRule::LogRule(0.26));
        c.validate().unwrap();
        let bad = DeconvConfig { noise: CentralMeasureSpec::heat(GroupId::So3, 0.1).unwrap(), ..c.clone() };
        assert!(bad.validate().is_err());
        let back: DeconvConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
