//! Decision procedures read off spectral decay: square integrability,
//! smoothness, super-smooth fits, Sobolev norms and heat-semigroup traces.
//!
//! Numeric verdicts group the dual into geometric shells
//! `|λ| ∈ (2^{j-1}, 2^j]` (shell 0 is `|λ| ≤ 1`) and look at the trend of a
//! per-shell quantity over the last three complete shells. They classify
//! decay type; they are not quantitative derivative bounds.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dual::{enumerate_irreps, GroupId, Irrep, RootSystemData};
use crate::error::{invalid, unsupported, NcfaError, Result};
use crate::groups::GroupElement;
use crate::measures::{CentralMeasureSpec, DecayClass};
use crate::spectra::{plancherel_norm_sq, synthesize, CoeffBlock, SpectralCoeffs, SynthesisPoint};

/// Fitted shell ratio at or below which a sequence counts as decreasing.
pub const DECREASING_RATIO: f64 = 0.9;
/// Fitted shell ratio at or above which a sequence counts as increasing.
pub const INCREASING_RATIO: f64 = 1.1;
/// Complete shells needed before a numeric verdict is attempted.
pub const MIN_SHELLS: usize = 4;
const WINDOW: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Converges,
    Diverges,
    Smooth,
    NotSmooth,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Analytic,
    Numeric,
}

/// Requested decision method. `Auto` is analytic for built-in families and
/// numeric otherwise.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Auto,
    Analytic,
    Numeric,
}

/// What a diagnostic looks at: a closed-form measure or stored coefficients.
#[derive(Clone, Copy, Debug)]
pub enum Source<'a> {
    Spec(&'a CentralMeasureSpec),
    Coeffs(&'a SpectralCoeffs),
}

impl<'a> From<&'a CentralMeasureSpec> for Source<'a> {
    fn from(s: &'a CentralMeasureSpec) -> Self {
        Source::Spec(s)
    }
}

impl<'a> From<&'a SpectralCoeffs> for Source<'a> {
    fn from(c: &'a SpectralCoeffs) -> Self {
        Source::Coeffs(c)
    }
}

impl Source<'_> {
    fn group(&self) -> GroupId {
        match self {
            Source::Spec(s) => s.group,
            Source::Coeffs(c) => c.group,
        }
    }
}

/// One complete shell of the dual.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShellRow {
    pub shell: u32,
    pub lower: f64,
    pub upper: f64,
    /// Number of dual points in the shell.
    pub count: usize,
    /// `Σ d_λ |||F(λ)|||²` over the shell.
    pub increment: f64,
    /// `Σ d_λ |||F(λ)|||²` over `|λ| ≤ upper`.
    pub partial_sum: f64,
    /// `max |λ|^k |||F(λ)|||` over the shell for `k = 1..=max_k`; empty for
    /// the L² test.
    pub seminorms: Vec<f64>,
}

/// Trend of a per-shell sequence over the last three shells.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioFit {
    pub label: String,
    /// `exp` of the least-squares slope of the log values per shell.
    /// `0` when the sequence vanishes at the end; `None` when a zero is
    /// followed by a positive value.
    pub ratio: Option<f64>,
    /// Log-log slope against the shell radius, `log₂ ratio`, when finite.
    pub exponent: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Evidence {
    pub shells: Vec<ShellRow>,
    pub fits: Vec<RatioFit>,
    pub decay_class: Option<DecayClass>,
    pub rule: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayVerdict {
    pub verdict: Verdict,
    pub method: Method,
    pub evidence: Evidence,
}

/// Per-irrep data every diagnostic needs, kept in log form so that
/// multipliers far below the smallest double still carry information.
#[derive(Clone, Debug)]
struct ProfileRow {
    norm: f64,
    casimir: f64,
    dim: f64,
    /// `ln |||F(λ)|||` (Hilbert-Schmidt norm).
    log_hs: f64,
    /// `ln ‖F(λ)‖` (operator norm).
    log_op: f64,
    /// `ln (1/‖F(λ)^{-1}‖)`, i.e. the log of the smallest singular value.
    log_min_sv: f64,
    scalar: bool,
}

fn block_profile(block: &CoeffBlock, dim: u64) -> (f64, f64, f64, bool) {
    match block {
        CoeffBlock::Scalar(c) => {
            let l = c.norm().ln();
            (l + 0.5 * (dim as f64).ln(), l, l, true)
        }
        CoeffBlock::Matrix(m) => {
            let sv = m.clone().svd(false, false).singular_values;
            let hs = sv.iter().map(|s| s * s).sum::<f64>().sqrt();
            (hs.ln(), sv.max().ln(), sv.min().ln(), false)
        }
    }
}

fn profile(source: Source<'_>, max_norm: f64) -> Result<(Vec<ProfileRow>, f64)> {
    match source {
        Source::Spec(spec) => {
            let irreps = enumerate_irreps(&RootSystemData::new(spec.group), max_norm)?;
            let rows = irreps
                .iter()
                .map(|ir| {
                    let l = spec.log_abs_multiplier(ir)?;
                    Ok(row_from(ir, l + 0.5 * ir.dim_f64().ln(), l, l, true))
                })
                .collect::<Result<_>>()?;
            Ok((rows, max_norm))
        }
        Source::Coeffs(coeffs) => {
            let rows = coeffs
                .entries
                .iter()
                .filter(|e| e.irrep.norm <= max_norm + 1e-12)
                .map(|e| {
                    let (hs, op, min, scalar) = block_profile(&e.block, e.irrep.dim);
                    row_from(&e.irrep, hs, op, min, scalar)
                })
                .collect();
            Ok((rows, coeffs.cutoff_norm.min(max_norm)))
        }
    }
}

fn row_from(ir: &Irrep, log_hs: f64, log_op: f64, log_min_sv: f64, scalar: bool) -> ProfileRow {
    ProfileRow { norm: ir.norm, casimir: ir.casimir, dim: ir.dim_f64(), log_hs, log_op, log_min_sv, scalar }
}

fn shell_of(norm: f64) -> u32 {
    if norm <= 1.0 {
        0
    } else {
        // smallest j with norm ≤ 2^j
        let mut j = norm.log2().ceil() as u32;
        while 2f64.powi(j as i32 - 1) >= norm {
            j -= 1;
        }
        while 2f64.powi(j as i32) < norm {
            j += 1;
        }
        j
    }
}

/// Shells whose upper edge lies within `cutoff`, with `max_k` seminorm columns.
fn shell_table(rows: &[ProfileRow], cutoff: f64, max_k: u32) -> Vec<ShellRow> {
    let mut full = 0u32;
    while 2f64.powi(full as i32 + 1) <= cutoff + 1e-12 {
        full += 1;
    }
    if cutoff < 1.0 {
        return Vec::new();
    }
    let mut table: Vec<ShellRow> = (0..=full)
        .map(|j| ShellRow {
            shell: j,
            lower: if j == 0 { 0.0 } else { 2f64.powi(j as i32 - 1) },
            upper: 2f64.powi(j as i32),
            count: 0,
            increment: 0.0,
            partial_sum: 0.0,
            seminorms: vec![0.0; max_k as usize],
        })
        .collect();
    // rows arrive in dual order, so increments accumulate in a fixed order
    for r in rows {
        let j = shell_of(r.norm);
        let Some(row) = table.get_mut(j as usize) else { continue };
        row.count += 1;
        row.increment += (r.dim.ln() + 2.0 * r.log_hs).exp();
        for k in 1..=max_k {
            let g = (k as f64 * r.norm.ln() + r.log_hs).exp();
            let slot = &mut row.seminorms[k as usize - 1];
            *slot = slot.max(g);
        }
    }
    let mut acc = 0.0;
    for row in &mut table {
        acc += row.increment;
        row.partial_sum = acc;
    }
    table
}

/// Trend ratio of the last three values, `+∞` for a zero-to-positive jump.
fn window_ratio(values: &[f64]) -> f64 {
    let w = &values[values.len() - WINDOW..];
    let mut seen_zero = false;
    for &v in w {
        if v == 0.0 {
            seen_zero = true;
        } else if seen_zero {
            return f64::INFINITY;
        }
    }
    if seen_zero {
        return 0.0;
    }
    // least-squares slope through three equally spaced points
    let slope = (w[2].ln() - w[0].ln()) / 2.0;
    slope.exp()
}

fn ratio_fit(label: String, ratio: f64) -> RatioFit {
    let finite = ratio.is_finite() && ratio > 0.0;
    RatioFit {
        label,
        ratio: ratio.is_finite().then_some(ratio),
        exponent: finite.then(|| ratio.log2()),
    }
}

fn analytic_allowed(source: Source<'_>, mode: Mode) -> Result<Option<&CentralMeasureSpec>> {
    let builtin = match source {
        Source::Spec(s) if s.is_builtin() => Some(s),
        _ => None,
    };
    match (mode, builtin) {
        (Mode::Numeric, _) | (Mode::Auto, None) => Ok(None),
        (_, Some(s)) => Ok(Some(s)),
        (Mode::Analytic, None) => unsupported("analytic verdicts exist only for built-in measure families"),
    }
}

fn check_scalar(rows: &[ProfileRow]) -> Result<()> {
    if rows.iter().all(|r| r.scalar) {
        Ok(())
    } else {
        invalid("this diagnostic needs scalar coefficient blocks")
    }
}

/// L² criterion: the density is square integrable iff `Σ d_λ |||μ̂(λ)|||² < ∞`.
pub fn l2_test(source: Source<'_>, max_norm: f64, mode: Mode) -> Result<DecayVerdict> {
    let rs = RootSystemData::new(source.group());
    if let Some(spec) = analytic_allowed(source, mode)? {
        let class = spec.decay_class();
        // d² c² ~ |λ|^{2m - 2·order}, summed against |λ|^{r-1} d|λ|
        let threshold = (2 * rs.m + rs.rank) as f64;
        let (verdict, rule) = match class {
            DecayClass::FiniteSupport => (Verdict::Converges, "finitely many nonzero coefficients".to_string()),
            DecayClass::SuperPolynomial => (Verdict::Converges, "multiplier decays faster than every power".to_string()),
            DecayClass::Polynomial { order } => {
                let v = if 2.0 * order > threshold { Verdict::Converges } else { Verdict::Diverges };
                (v, format!("2 x decay order {} vs 2m + r = {}", 2.0 * order, threshold))
            }
            DecayClass::Unknown => return unsupported("no closed form for this family"),
        };
        return Ok(DecayVerdict {
            verdict,
            method: Method::Analytic,
            evidence: Evidence { decay_class: Some(class), rule, ..Evidence::default() },
        });
    }
    let (rows, cutoff) = profile(source, max_norm)?;
    check_scalar(&rows)?;
    let shells = shell_table(&rows, cutoff, 0);
    let rule = format!(
        "shell increments over the last {WINDOW} complete shells: converges if ratio <= {DECREASING_RATIO}, diverges if >= {INCREASING_RATIO}"
    );
    if shells.len() < MIN_SHELLS {
        return Ok(DecayVerdict {
            verdict: Verdict::Inconclusive,
            method: Method::Numeric,
            evidence: Evidence { shells, rule, ..Evidence::default() },
        });
    }
    let incs: Vec<f64> = shells.iter().map(|s| s.increment).collect();
    let ratio = window_ratio(&incs);
    let verdict = if ratio <= DECREASING_RATIO {
        Verdict::Converges
    } else if ratio >= INCREASING_RATIO {
        Verdict::Diverges
    } else {
        Verdict::Inconclusive
    };
    Ok(DecayVerdict {
        verdict,
        method: Method::Numeric,
        evidence: Evidence { shells, fits: vec![ratio_fit("increment".into(), ratio)], decay_class: None, rule },
    })
}

/// Sugiura seminorm `sup_λ |λ|^s |||F(λ)|||` over the stored entries.
pub fn sugiura_seminorm(coeffs: &SpectralCoeffs, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return invalid(format!("seminorm order must be nonnegative, got {s}"));
    }
    Ok(coeffs
        .entries
        .iter()
        .map(|e| e.irrep.norm.powf(s) * e.block.frobenius_sq(e.irrep.dim).sqrt())
        .fold(0.0, f64::max))
}

/// Smoothness criterion: the density is `C^∞` iff `|λ|^k |||μ̂(λ)||| → 0`
/// for every `k`.
pub fn smoothness_test(source: Source<'_>, max_k: u32, max_norm: f64, mode: Mode) -> Result<DecayVerdict> {
    if max_k < 4 {
        return invalid(format!("max_k must be at least 4, got {max_k}"));
    }
    if let Some(spec) = analytic_allowed(source, mode)? {
        let class = spec.decay_class();
        // c = e^{-t f(κ)} beats every power of κ iff t f(u) / log u → ∞
        let (verdict, rule) = match class {
            DecayClass::FiniteSupport => (Verdict::Smooth, "finitely many nonzero coefficients"),
            DecayClass::SuperPolynomial => (Verdict::Smooth, "t f(u) / log u grows without bound"),
            DecayClass::Polynomial { .. } => (Verdict::NotSmooth, "t f(u) / log u stays bounded"),
            DecayClass::Unknown => return unsupported("no closed form for this family"),
        };
        return Ok(DecayVerdict {
            verdict,
            method: Method::Analytic,
            evidence: Evidence { decay_class: Some(class), rule: rule.into(), ..Evidence::default() },
        });
    }
    let (rows, cutoff) = profile(source, max_norm)?;
    let shells = shell_table(&rows, cutoff, max_k);
    let rule = format!(
        "g_k = shell max of |lambda|^k |||F|||, k = 1..{max_k}: not_smooth if some g_k ratio >= {INCREASING_RATIO}, smooth if all <= {DECREASING_RATIO}"
    );
    if shells.len() < MIN_SHELLS {
        return Ok(DecayVerdict {
            verdict: Verdict::Inconclusive,
            method: Method::Numeric,
            evidence: Evidence { shells, rule, ..Evidence::default() },
        });
    }
    let ratios: Vec<f64> = (0..max_k as usize)
        .map(|k| window_ratio(&shells.iter().map(|s| s.seminorms[k]).collect::<Vec<_>>()))
        .collect();
    let verdict = if ratios.iter().any(|&r| r >= INCREASING_RATIO) {
        Verdict::NotSmooth
    } else if ratios.iter().all(|&r| r <= DECREASING_RATIO) {
        Verdict::Smooth
    } else {
        Verdict::Inconclusive
    };
    let fits = ratios.iter().enumerate().map(|(k, &r)| ratio_fit(format!("k={}", k + 1), r)).collect();
    Ok(DecayVerdict {
        verdict,
        method: Method::Numeric,
        evidence: Evidence { shells, fits, decay_class: None, rule },
    })
}

/// Heat semigroup `T_t` with eigenvalues `e^{-tκ}` (multiplicity `d²`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceReport {
    pub group: GroupId,
    pub t: f64,
    pub max_norm: f64,
    /// `Σ d_λ² e^{-tκ_λ}`.
    pub trace_spectral: f64,
    /// Heat kernel at the identity, by synthesis.
    pub density_at_e: f64,
    /// Hilbert-Schmidt norm² of `T_t`, computed as the Plancherel sum
    /// `Σ d_λ² e^{-2tκ_λ}` of the kernel (no kernel matrix is formed).
    pub hs_norm_sq: f64,
    /// `trace_spectral` at `2t` on the same irreps.
    pub trace_spectral_2t: f64,
    pub note: String,
}

/// Trace and Hilbert-Schmidt data of the heat semigroup at time `t`.
/// `max_norm = None` takes the heat kernel's automatic cutoff.
pub fn trace_report(t: f64, group: GroupId, max_norm: Option<f64>) -> Result<TraceReport> {
    if !(t > 0.0 && t.is_finite()) {
        return invalid(format!("heat time must be positive, got {t}"));
    }
    let heat = CentralMeasureSpec::heat(group, t)?;
    let max_norm = match max_norm {
        Some(m) => m,
        None => heat.auto_cutoff()?.max_norm,
    };
    let coeffs = heat.coefficients_up_to(max_norm)?;
    let trace_at = |s: f64| -> f64 {
        coeffs.entries.iter().map(|e| e.irrep.dim_f64().powi(2) * (-s * e.irrep.casimir).exp()).sum()
    };
    let density_at_e = synthesize(&coeffs, &SynthesisPoint::Element(GroupElement::identity(group)))?;
    Ok(TraceReport {
        group,
        t,
        max_norm,
        trace_spectral: trace_at(t),
        density_at_e,
        hs_norm_sq: plancherel_norm_sq(&coeffs),
        trace_spectral_2t: trace_at(2.0 * t),
        note: "Hilbert-Schmidt norm evaluated through the Plancherel identity; the integral kernel is never formed".into(),
    })
}

/// `Σ d_λ (1 + κ_λ)^p |||F(λ)|||²`.
pub fn sobolev_norm_sq(coeffs: &SpectralCoeffs, p: f64) -> Result<f64> {
    if !(p >= 0.0) {
        return invalid(format!("Sobolev order must be nonnegative, got {p}"));
    }
    Ok(coeffs
        .entries
        .iter()
        .map(|e| e.irrep.dim_f64() * (1.0 + e.irrep.casimir).powf(p) * e.block.frobenius_sq(e.irrep.dim))
        .sum())
}

/// Fit of `‖F(λ)‖ ≈ A κ^{a₂} e^{-γ κ^β}` and of `‖F(λ)^{-1}‖ ≈ B κ^{a₁} e^{γ κ^β}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuperSmoothFit {
    pub beta_hat: f64,
    pub gamma_hat: f64,
    pub a1_hat: f64,
    pub a2_hat: f64,
    pub log_a: f64,
    /// Max relative deviation of the fitted model over the fit range.
    pub residual: f64,
    pub kappa_range: (f64, f64),
    pub points: usize,
    /// `β̂` ended at an end of the search interval.
    pub beta_at_bound: bool,
    pub super_smooth: bool,
}

pub const BETA_SEARCH: (f64, f64) = (0.05, 2.0);
/// Thresholds for classifying a fit as super-smooth.
pub const MIN_A2: f64 = -0.1;
pub const MAX_RESIDUAL: f64 = 0.05;
const GOLDEN_MAX_ITER: usize = 200;

/// Weighted-free linear least squares of `y` on `[1, ln κ, -κ^β]`.
fn linear_part(kappa: &[f64], y: &[f64], beta: f64) -> Option<(DVector<f64>, f64)> {
    let n = kappa.len();
    let a = DMatrix::from_fn(n, 3, |i, j| match j {
        0 => 1.0,
        1 => kappa[i].ln(),
        _ => -kappa[i].powf(beta),
    });
    let b = DVector::from_column_slice(y);
    let x = a.clone().svd(true, true).solve(&b, 1e-14).ok()?;
    let r = &a * &x - b;
    Some((x, r.norm_squared()))
}

/// Default range: from the lower edge of shell 3 (`|λ| > 4`) to the cutoff.
pub fn default_fit_range(source: Source<'_>) -> Result<(f64, f64)> {
    let cutoff = match source {
        Source::Spec(s) => s.auto_cutoff()?.max_norm,
        Source::Coeffs(c) => c.cutoff_norm,
    };
    Ok((4.0, cutoff))
}

/// Fits the super-smooth model over dual points with `lo < |λ| ≤ hi`
/// (norms, not Casimirs). `fit_range = None` uses [`default_fit_range`].
pub fn supersmooth_fit(source: Source<'_>, fit_range: Option<(f64, f64)>) -> Result<SuperSmoothFit> {
    let (lo, hi) = match fit_range {
        Some(r) => r,
        None => default_fit_range(source)?,
    };
    if !(lo >= 0.0 && hi > lo) {
        return invalid(format!("fit range ({lo}, {hi}] is empty"));
    }
    let (rows, _) = profile(source, hi)?;
    let rows: Vec<&ProfileRow> = rows.iter().filter(|r| r.norm > lo && r.norm <= hi + 1e-12).collect();
    if rows.len() < 4 {
        return invalid(format!("fit range ({lo}, {hi}] holds {} dual points, need at least 4", rows.len()));
    }
    if let Some(r) = rows.iter().find(|r| !r.log_op.is_finite() || !r.log_min_sv.is_finite()) {
        return invalid(format!("nonpositive multiplier at |lambda| = {} inside the fit range", r.norm));
    }
    let kappa: Vec<f64> = rows.iter().map(|r| r.casimir).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.log_op).collect();
    let sse = |beta: f64| linear_part(&kappa, &y, beta).map_or(f64::NAN, |(_, s)| s);

    let (mut a, mut b) = BETA_SEARCH;
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (sse(c), sse(d));
    let mut converged = false;
    for _ in 0..GOLDEN_MAX_ITER {
        if !(fc.is_finite() && fd.is_finite()) {
            break;
        }
        if b - a < 1e-10 {
            converged = true;
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = sse(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = sse(d);
        }
    }
    let beta = 0.5 * (a + b);
    let fit = linear_part(&kappa, &y, beta);
    let residual_of = |x: &DVector<f64>| {
        kappa
            .iter()
            .zip(&y)
            .map(|(&k, &yi)| {
                let model = x[0] + x[1] * k.ln() - x[2] * k.powf(beta);
                (model - yi).exp_m1().abs()
            })
            .fold(0.0, f64::max)
            .min(f64::MAX)
    };
    let Some((x, _)) = fit.filter(|_| converged) else {
        let residual = linear_part(&kappa, &y, beta).map_or(f64::NAN, |(x, _)| residual_of(&x));
        return Err(NcfaError::NumericalFailure(format!(
            "super-smooth fit did not converge in {GOLDEN_MAX_ITER} iterations (residual {residual})"
        )));
    };
    let residual = residual_of(&x);
    // inverse coefficients: ln ‖F^{-1}‖ = -ln σ_min = ln B + a₁ ln κ + γ κ^β
    let inv: Vec<f64> = rows.iter().map(|r| r.log_min_sv).collect();
    let a1 = linear_part(&kappa, &inv, beta).map_or(f64::NAN, |(xi, _)| -xi[1]);
    let beta_at_bound = beta - BETA_SEARCH.0 < 1e-6 || BETA_SEARCH.1 - beta < 1e-6;
    let (gamma, a2) = (x[2], x[1]);
    Ok(SuperSmoothFit {
        beta_hat: beta,
        gamma_hat: gamma,
        a1_hat: a1,
        a2_hat: a2,
        log_a: x[0],
        residual,
        kappa_range: (kappa[0], *kappa.last().unwrap()),
        points: rows.len(),
        beta_at_bound,
        super_smooth: gamma > 0.0 && !beta_at_bound && a2 >= MIN_A2 && residual <= MAX_RESIDUAL,
    })
}

/// Outcome of checking that a super-smooth multiplier gives a smooth density.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuperSmoothSmoothReport {
    pub applicable: bool,
    pub fit: Option<SuperSmoothFit>,
    /// Envelope constant `K` in `K |λ|^{m/2} (1+|λ|²)^{a₂} e^{-γ|λ|^{2β}}`,
    /// calibrated on `|λ| ≤ Λ/2`.
    pub envelope_constant: Option<f64>,
    pub checked: usize,
    pub violations: usize,
    pub dominated: bool,
    pub smoothness: Option<Verdict>,
    pub passed: bool,
    pub note: String,
}

/// Checks the chain `|||F(λ)||| ≤ K |λ|^{m/2} (1+|λ|²)^{a₂} e^{-γ|λ|^{2β}}` on
/// every stored nontrivial `λ`, then that the smoothness test agrees.
pub fn supersmooth_implies_smooth_check(spec: &CentralMeasureSpec) -> Result<SuperSmoothSmoothReport> {
    let fit = match supersmooth_fit(Source::Spec(spec), None) {
        Ok(f) => f,
        Err(NcfaError::InvalidArgument(msg)) | Err(NcfaError::NumericalFailure(msg)) => {
            return Ok(not_applicable(None, format!("super-smooth fit unavailable: {msg}")))
        }
        Err(e) => return Err(e),
    };
    if !fit.super_smooth {
        return Ok(not_applicable(Some(fit), "multiplier is not super-smooth".into()));
    }
    let rs = RootSystemData::new(spec.group);
    let cutoff = spec.auto_cutoff()?.max_norm.max(8.0);
    let (rows, _) = profile(Source::Spec(spec), cutoff)?;
    let half_m = rs.m as f64 / 2.0;
    let log_env = |norm: f64| {
        half_m * norm.ln() + fit.a2_hat * (norm * norm).ln_1p() - fit.gamma_hat * norm.powf(2.0 * fit.beta_hat)
    };
    let rows: Vec<&ProfileRow> = rows.iter().filter(|r| r.norm > 0.0).collect();
    let log_k = rows
        .iter()
        .filter(|r| r.norm <= cutoff / 2.0)
        .map(|r| r.log_hs - log_env(r.norm))
        .fold(f64::NEG_INFINITY, f64::max);
    let violations = rows
        .iter()
        .filter(|r| {
            let slack = 1e-9 * (1.0 + log_env(r.norm).abs());
            r.log_hs > log_k + log_env(r.norm) + slack
        })
        .count();
    let smooth = smoothness_test(Source::Spec(spec), 4, cutoff.max(64.0), Mode::Auto)?.verdict;
    let dominated = violations == 0 && log_k.is_finite();
    Ok(SuperSmoothSmoothReport {
        applicable: true,
        fit: Some(fit),
        envelope_constant: log_k.is_finite().then(|| log_k.exp()),
        checked: rows.len(),
        violations,
        dominated,
        smoothness: Some(smooth),
        passed: dominated && smooth == Verdict::Smooth,
        note: format!("envelope checked on {} nontrivial dual points up to |lambda| = {cutoff}", rows.len()),
    })
}

fn not_applicable(fit: Option<SuperSmoothFit>, note: String) -> SuperSmoothSmoothReport {
    SuperSmoothSmoothReport {
        applicable: false,
        fit,
        envelope_constant: None,
        checked: 0,
        violations: 0,
        dominated: false,
        smoothness: None,
        passed: false,
        note,
    }
}
