//! Fourier coefficients of measures and the operations on them.
//!
//! The transform follows the `π(σ⁻¹)` convention, `μ̂(π) = ∫ π(σ⁻¹) μ(dσ)`,
//! so convolution reverses the product: `(μ₁∗μ₂)^(π) = μ̂₂(π) μ̂₁(π)`.
//! Synthesis is `f(σ) = Σ d_π tr(f̂(π) π(σ))`.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dual::{GroupId, Irrep, RootSystemData};
use crate::error::{invalid, unsupported, NcfaError, Result};
use crate::exec::Exec;
use crate::groups::{chebyshev_u_into, rep_matrix, torus_character, GroupElement, SampleData, SampleSet, WeylRule, CHUNK_SIZE};
use crate::measures::CentralMeasureSpec;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Coefficient of one irrep.
#[derive(Clone, Debug, PartialEq)]
pub enum CoeffBlock {
    /// `c · I_{d_λ}`.
    Scalar(Complex64),
    Matrix(DMatrix<Complex64>),
}

impl CoeffBlock {
    /// `tr(block)`; `dim` is only used for scalar blocks.
    pub fn trace(&self, dim: u64) -> Complex64 {
        match self {
            CoeffBlock::Scalar(c) => c * dim as f64,
            CoeffBlock::Matrix(m) => m.trace(),
        }
    }

    /// Squared Hilbert-Schmidt norm.
    pub fn frobenius_sq(&self, dim: u64) -> f64 {
        match self {
            CoeffBlock::Scalar(c) => dim as f64 * c.norm_sqr(),
            CoeffBlock::Matrix(m) => m.iter().map(|z| z.norm_sqr()).sum(),
        }
    }

    pub fn operator_norm(&self) -> f64 {
        match self {
            CoeffBlock::Scalar(c) => c.norm(),
            CoeffBlock::Matrix(m) => m.clone().svd(false, false).singular_values.max(),
        }
    }

    /// `self · rhs`.
    pub fn mul(&self, rhs: &CoeffBlock) -> CoeffBlock {
        match (self, rhs) {
            (CoeffBlock::Scalar(a), CoeffBlock::Scalar(b)) => CoeffBlock::Scalar(a * b),
            (CoeffBlock::Scalar(a), CoeffBlock::Matrix(m)) | (CoeffBlock::Matrix(m), CoeffBlock::Scalar(a)) => {
                CoeffBlock::Matrix(m * *a)
            }
            (CoeffBlock::Matrix(a), CoeffBlock::Matrix(b)) => CoeffBlock::Matrix(a * b),
        }
    }

    fn is_scalar(&self) -> bool {
        matches!(self, CoeffBlock::Scalar(_))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralEntry {
    pub irrep: Irrep,
    pub block: CoeffBlock,
}

/// A truncated Fourier transform: one block per stored irrep, in dual order.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralCoeffs {
    pub group: GroupId,
    pub normalization: String,
    pub cutoff_norm: f64,
    pub entries: Vec<SpectralEntry>,
}

impl SpectralCoeffs {
    pub fn new(group: GroupId, entries: Vec<SpectralEntry>) -> Self {
        let cutoff_norm = entries.iter().map(|e| e.irrep.norm).fold(0.0, f64::max);
        SpectralCoeffs { group, normalization: group.normalization_note().to_string(), cutoff_norm, entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, lambda: &[i64]) -> Option<&SpectralEntry> {
        self.entries.iter().find(|e| e.irrep.lambda == lambda)
    }

    pub fn all_scalar(&self) -> bool {
        self.entries.iter().all(|e| e.block.is_scalar())
    }

    /// Scalar value of each entry (real part), erroring on matrix blocks.
    pub fn scalar_values(&self) -> Result<Vec<f64>> {
        self.entries
            .iter()
            .map(|e| match &e.block {
                CoeffBlock::Scalar(c) => Ok(c.re),
                CoeffBlock::Matrix(_) => invalid("expected scalar blocks"),
            })
            .collect()
    }

    /// Checks the probability-measure contract: every block has operator
    /// norm at most `1 + 1e-9` and the trivial block equals 1.
    pub fn check_probability(&self) -> Result<()> {
        for e in &self.entries {
            let n = e.block.operator_norm();
            if n > 1.0 + 1e-9 {
                return Err(NcfaError::NumericalFailure(format!(
                    "block at {:?} has operator norm {n}",
                    e.irrep.lambda
                )));
            }
            if e.irrep.is_trivial() && (e.block.trace(1) - Complex64::new(1.0, 0.0)).norm() > 1e-12 {
                return Err(NcfaError::NumericalFailure("trivial coefficient differs from 1".into()));
            }
        }
        Ok(())
    }

    /// Series form used for fast evaluation of central (scalar) coefficients.
    pub fn class_series(&self) -> Result<ClassSeries> {
        if !self.all_scalar() {
            return invalid("class series needs scalar blocks");
        }
        match self.group {
            GroupId::Su2 | GroupId::So3 => {
                let top = self.entries.iter().map(|e| e.irrep.su2_label()).max().unwrap_or(0) as usize;
                let mut a = vec![ZERO; top + 1];
                for e in &self.entries {
                    a[e.irrep.su2_label() as usize] += e.block.trace(e.irrep.dim);
                }
                Ok(ClassSeries::Chebyshev(a))
            }
            GroupId::Torus(1) => Ok(ClassSeries::Circle(
                self.entries.iter().map(|e| (e.irrep.lambda[0], e.block.trace(1))).collect(),
            )),
            g => unsupported(format!("class series on {g}")),
        }
    }

    /// Keeps only entries with `κ < cutoff` (strict).
    pub fn below_casimir(&self, cutoff: f64) -> SpectralCoeffs {
        let entries = self.entries.iter().filter(|e| e.irrep.casimir < cutoff).cloned().collect();
        SpectralCoeffs { cutoff_norm: self.cutoff_norm, ..SpectralCoeffs::new(self.group, entries) }
    }
}

/// `f(θ) = Σ d_λ tr(c_λ) χ_λ(θ)` for scalar coefficients.
#[derive(Clone, Debug, PartialEq)]
pub enum ClassSeries {
    /// SU(2)/SO(3): `f(θ) = Σ_n a_n U_n(cos θ)` with `a_n = d_n c_n = tr(block_n)`.
    Chebyshev(Vec<Complex64>),
    /// `T^1`: `f(θ) = Σ_k c_k e^{ikθ}`.
    Circle(Vec<(i64, Complex64)>),
}

impl ClassSeries {
    pub fn eval(&self, theta: f64) -> Complex64 {
        match self {
            ClassSeries::Chebyshev(a) => clenshaw_u(a, theta.cos()),
            ClassSeries::Circle(terms) => terms
                .iter()
                .map(|&(k, c)| c * Complex64::from_polar(1.0, k as f64 * theta))
                .sum(),
        }
    }

    /// Evaluates with `x = cos θ` supplied directly (SU(2)/SO(3) only).
    pub fn eval_cos(&self, x: f64) -> Option<Complex64> {
        match self {
            ClassSeries::Chebyshev(a) => Some(clenshaw_u(a, x)),
            ClassSeries::Circle(_) => None,
        }
    }
}

/// Clenshaw summation of `Σ a_n U_n(x)`.
fn clenshaw_u(a: &[Complex64], x: f64) -> Complex64 {
    let mut b1 = ZERO;
    let mut b2 = ZERO;
    for &ak in a.iter().rev() {
        let b0 = ak + b1 * (2.0 * x) - b2;
        b2 = b1;
        b1 = b0;
    }
    b1
}

fn check_irreps(group: GroupId, irreps: &[Irrep]) -> Result<()> {
    if irreps.is_empty() {
        return invalid("irrep list is empty");
    }
    if let Some(bad) = irreps.iter().find(|ir| ir.group != group) {
        return invalid(format!("irrep {:?} belongs to {}, not {group}", bad.lambda, bad.group));
    }
    Ok(())
}

/// Scalar coefficients `c_λ I` of a central measure.
pub fn transform_central(spec: &CentralMeasureSpec, irreps: &[Irrep]) -> Result<SpectralCoeffs> {
    check_irreps(spec.group, irreps)?;
    let entries = irreps
        .iter()
        .map(|ir| {
            Ok(SpectralEntry {
                irrep: ir.clone(),
                block: CoeffBlock::Scalar(Complex64::new(spec.multiplier(ir)?, 0.0)),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralCoeffs::new(spec.group, entries))
}

/// What the empirical transform stores per irrep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmpiricalMode {
    /// Only the averaged character, stored as the scalar block `(tr/d) I`.
    TraceOnly,
    /// The averaged representation matrices `(1/n) Σ π(Y_i⁻¹)`.
    FullMatrix,
}

/// Empirical characteristic function `(1/n) Σ π(Y_i⁻¹)`.
pub fn empirical_transform(samples: &SampleSet, irreps: &[Irrep], mode: EmpiricalMode) -> Result<SpectralCoeffs> {
    empirical_transform_with(samples, irreps, mode, Exec::default())
}

pub fn empirical_transform_with(
    samples: &SampleSet,
    irreps: &[Irrep],
    mode: EmpiricalMode,
    exec: Exec,
) -> Result<SpectralCoeffs> {
    check_irreps(samples.group, irreps)?;
    if samples.is_empty() {
        return invalid("sample set is empty");
    }
    let n = samples.len() as f64;
    let blocks: Vec<CoeffBlock> = match (&samples.data, mode) {
        (SampleData::Angles { values, dim }, _) => {
            let dim = *dim;
            exec.try_map_indices(irreps.len(), |i| {
                let lambda = &irreps[i].lambda;
                let mut acc = ZERO;
                for row in values.chunks_exact(dim) {
                    // π(Y⁻¹) = conj(e^{ik·θ})
                    acc += torus_character(lambda, row)?.conj();
                }
                Ok(CoeffBlock::Scalar(acc / n))
            })?
        }
        (SampleData::Quaternions(qs), EmpiricalMode::TraceOnly) => {
            let top = irreps.iter().map(|ir| ir.su2_label()).max().unwrap_or(0) as usize;
            let chunks = qs.len().div_ceil(CHUNK_SIZE);
            let partial = exec.map_indices(chunks, |c| {
                let mut acc = vec![0.0; top + 1];
                let mut u = vec![0.0; top + 1];
                for q in &qs[c * CHUNK_SIZE..qs.len().min((c + 1) * CHUNK_SIZE)] {
                    chebyshev_u_into(q.w.clamp(-1.0, 1.0), &mut u);
                    for (a, v) in acc.iter_mut().zip(&u) {
                        *a += v;
                    }
                }
                acc
            });
            let mut sums = vec![0.0; top + 1];
            for p in partial {
                for (s, v) in sums.iter_mut().zip(p) {
                    *s += v;
                }
            }
            irreps
                .iter()
                .map(|ir| CoeffBlock::Scalar(Complex64::new(sums[ir.su2_label() as usize] / n / ir.dim as f64, 0.0)))
                .collect()
        }
        (SampleData::Quaternions(qs), EmpiricalMode::FullMatrix) => exec.try_map_indices(irreps.len(), |i| {
            let ir = &irreps[i];
            let d = ir.dim as usize;
            let mut acc = DMatrix::from_element(d, d, ZERO);
            for q in qs {
                acc += rep_matrix(ir, &GroupElement::Quat(q.conj()))?;
            }
            Ok(CoeffBlock::Matrix(acc / Complex64::new(n, 0.0)))
        })?,
    };
    let entries = irreps
        .iter()
        .zip(blocks)
        .map(|(ir, block)| SpectralEntry { irrep: ir.clone(), block })
        .collect();
    Ok(SpectralCoeffs::new(samples.group, entries))
}

/// Where to evaluate a synthesized series.
#[derive(Clone, Debug, PartialEq)]
pub enum SynthesisPoint {
    Element(GroupElement),
    /// Conjugacy angle; only valid for scalar coefficients (or `T^1`).
    Angle(f64),
}

/// `Σ d_λ tr(f̂(λ) π_λ(σ))` as a complex number.
pub fn synthesize_complex(coeffs: &SpectralCoeffs, at: &SynthesisPoint) -> Result<Complex64> {
    let rs = RootSystemData::new(coeffs.group);
    let mut acc = ZERO;
    match coeffs.group {
        GroupId::Torus(d) => {
            let angles = match at {
                SynthesisPoint::Element(GroupElement::Angles(a)) => a.clone(),
                SynthesisPoint::Angle(t) if d == 1 => vec![*t],
                _ => return invalid("torus synthesis needs an angle vector"),
            };
            for e in &coeffs.entries {
                acc += e.block.trace(1) * torus_character(&e.irrep.lambda, &angles)?;
            }
        }
        GroupId::Su2 | GroupId::So3 => match at {
            SynthesisPoint::Angle(theta) => {
                if !coeffs.all_scalar() {
                    return invalid("matrix coefficients need a group element, not an angle");
                }
                acc = coeffs.class_series()?.eval(*theta);
            }
            SynthesisPoint::Element(g) => {
                let theta = g.conjugacy_angle()?;
                for e in &coeffs.entries {
                    let d = e.irrep.dim as f64;
                    acc += match &e.block {
                        CoeffBlock::Scalar(c) => c * d * crate::groups::character(&rs, &e.irrep, theta)?,
                        CoeffBlock::Matrix(m) => (m * rep_matrix(&e.irrep, g)?).trace() * d,
                    };
                }
            }
        },
    }
    Ok(acc)
}

/// Real part of [`synthesize_complex`]; fails if the imaginary residue
/// exceeds `1e-9` relative to the size of the series.
pub fn synthesize(coeffs: &SpectralCoeffs, at: &SynthesisPoint) -> Result<f64> {
    let z = synthesize_complex(coeffs, at)?;
    let scale = 1.0 + coeffs.entries.iter().map(|e| e.irrep.dim as f64 * e.block.trace(e.irrep.dim).norm()).sum::<f64>();
    if z.im.abs() > 1e-9 * scale {
        return Err(NcfaError::NumericalFailure(format!("synthesis has imaginary residue {}", z.im)));
    }
    Ok(z.re)
}

/// Real synthesis of scalar coefficients on a list of conjugacy angles.
pub fn synthesize_grid(coeffs: &SpectralCoeffs, angles: &[f64], exec: Exec) -> Result<Vec<f64>> {
    let series = coeffs.class_series()?;
    Ok(exec.map_indices(angles.len(), |i| series.eval(angles[i]).re))
}

/// `Σ d_λ |||f̂(λ)|||²`.
pub fn plancherel_norm_sq(coeffs: &SpectralCoeffs) -> f64 {
    coeffs
        .entries
        .iter()
        .map(|e| e.irrep.dim as f64 * e.block.frobenius_sq(e.irrep.dim))
        .sum()
}

fn same_cutoff(a: &SpectralCoeffs, b: &SpectralCoeffs) -> Result<()> {
    if a.group != b.group {
        return invalid(format!("coefficients live on {} and {}", a.group, b.group));
    }
    if (a.cutoff_norm - b.cutoff_norm).abs() > 1e-12 {
        return invalid(format!("cutoff mismatch: {} vs {}", a.cutoff_norm, b.cutoff_norm));
    }
    Ok(())
}

/// `⟨f, g⟩ = Σ d_λ tr(f̂(λ) ĝ(λ)*)`.
pub fn parseval(f: &SpectralCoeffs, g: &SpectralCoeffs) -> Result<Complex64> {
    same_cutoff(f, g)?;
    let index: HashMap<&[i64], &SpectralEntry> = g.entries.iter().map(|e| (e.irrep.lambda.as_slice(), e)).collect();
    let mut acc = ZERO;
    for e in &f.entries {
        let Some(other) = index.get(e.irrep.lambda.as_slice()) else { continue };
        let d = e.irrep.dim as f64;
        acc += d * match (&e.block, &other.block) {
            (CoeffBlock::Scalar(a), CoeffBlock::Scalar(b)) => a * b.conj() * d,
            (CoeffBlock::Scalar(a), CoeffBlock::Matrix(m)) => m.adjoint().trace() * a,
            (CoeffBlock::Matrix(m), CoeffBlock::Scalar(b)) => m.trace() * b.conj(),
            (CoeffBlock::Matrix(a), CoeffBlock::Matrix(b)) => (a * b.adjoint()).trace(),
        };
    }
    Ok(acc)
}

/// Result of [`convolve`].
#[derive(Clone, Debug, PartialEq)]
pub struct Convolution {
    pub coeffs: SpectralCoeffs,
    /// Set when the inputs covered different irreps and were cut to the
    /// common part.
    pub truncated: bool,
}

/// Coefficients of `μ₁ ∗ μ₂`: blockwise `μ̂₂ μ̂₁`.
pub fn convolve(first: &SpectralCoeffs, second: &SpectralCoeffs) -> Result<Convolution> {
    if first.group != second.group {
        return invalid(format!("coefficients live on {} and {}", first.group, second.group));
    }
    let index: HashMap<&[i64], &SpectralEntry> =
        second.entries.iter().map(|e| (e.irrep.lambda.as_slice(), e)).collect();
    let mut entries = Vec::with_capacity(first.len());
    for e in &first.entries {
        if let Some(other) = index.get(e.irrep.lambda.as_slice()) {
            entries.push(SpectralEntry { irrep: e.irrep.clone(), block: other.block.mul(&e.block) });
        }
    }
    let truncated = entries.len() != first.len() || entries.len() != second.len();
    Ok(Convolution { coeffs: SpectralCoeffs::new(first.group, entries), truncated })
}

/// Coefficients of a class function by quadrature:
/// `c_λ = (1/d_λ) ∫ f χ̄_λ dm`.
pub fn analyze_class_function<F>(group: GroupId, f: F, irreps: &[Irrep], npoints: usize) -> Result<SpectralCoeffs>
where
    F: Fn(f64) -> f64,
{
    check_irreps(group, irreps)?;
    let rule = WeylRule::new(group, npoints)?;
    let values: Vec<f64> = rule.angles.iter().map(|&t| f(t)).collect();
    let rs = RootSystemData::new(group);
    let entries = irreps
        .iter()
        .map(|ir| {
            let mut acc = ZERO;
            for ((&t, &w), &v) in rule.angles.iter().zip(&rule.weights).zip(&values) {
                let chi = if group.is_torus() {
                    torus_character(&ir.lambda, &[t])?
                } else {
                    Complex64::new(crate::groups::character(&rs, ir, t)?, 0.0)
                };
                acc += chi.conj() * (w * v);
            }
            Ok(SpectralEntry { irrep: ir.clone(), block: CoeffBlock::Scalar(acc / ir.dim as f64) })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralCoeffs::new(group, entries))
}

/// JSON form of [`SpectralCoeffs`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralFile {
    pub group: GroupId,
    pub normalization: String,
    pub cutoff_norm: f64,
    pub entries: Vec<SpectralFileEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralFileEntry {
    pub lambda: Vec<i64>,
    pub dim: u64,
    pub casimir: f64,
    pub block: BlockJson,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockJson {
    Scalar([f64; 2]),
    /// Row-major `d × d` entries as `[re, im]` pairs.
    Matrix(Vec<[f64; 2]>),
}

impl From<&SpectralCoeffs> for SpectralFile {
    fn from(c: &SpectralCoeffs) -> Self {
        SpectralFile {
            group: c.group,
            normalization: c.normalization.clone(),
            cutoff_norm: c.cutoff_norm,
            entries: c
                .entries
                .iter()
                .map(|e| SpectralFileEntry {
                    lambda: e.irrep.lambda.clone(),
                    dim: e.irrep.dim,
                    casimir: e.irrep.casimir,
                    block: match &e.block {
                        CoeffBlock::Scalar(z) => BlockJson::Scalar([z.re, z.im]),
                        CoeffBlock::Matrix(m) => BlockJson::Matrix(
                            (0..m.nrows())
                                .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
                                .map(|(i, j)| [m[(i, j)].re, m[(i, j)].im])
                                .collect(),
                        ),
                    },
                })
                .collect(),
        }
    }
}

impl TryFrom<SpectralFile> for SpectralCoeffs {
    type Error = NcfaError;

    fn try_from(f: SpectralFile) -> Result<Self> {
        let rs = RootSystemData::new(f.group);
        let entries = f
            .entries
            .into_iter()
            .map(|e| {
                let irrep = rs.irrep(&e.lambda)?;
                if irrep.dim != e.dim {
                    return invalid(format!("entry {:?}: dim {} but formula gives {}", e.lambda, e.dim, irrep.dim));
                }
                let block = match e.block {
                    BlockJson::Scalar([re, im]) => CoeffBlock::Scalar(Complex64::new(re, im)),
                    BlockJson::Matrix(v) => {
                        let d = irrep.dim as usize;
                        if v.len() != d * d {
                            return invalid(format!("entry {:?}: expected {} matrix entries", e.lambda, d * d));
                        }
                        CoeffBlock::Matrix(DMatrix::from_row_iterator(
                            d,
                            d,
                            v.into_iter().map(|[re, im]| Complex64::new(re, im)),
                        ))
                    }
                };
                Ok(SpectralEntry { irrep, block })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SpectralCoeffs { group: f.group, normalization: f.normalization, cutoff_norm: f.cutoff_norm, entries })
    }
}
