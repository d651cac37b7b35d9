//! Highest-weight parameterization of the unitary dual.
//!
//! Weights are integer coordinate vectors. The invariant inner product is an
//! integer Gram matrix over a common denominator, so dimensions and Casimir
//! values are exact rationals; floats only appear in the reported norms.
//!
//! Normalization: the SU(2) fundamental weight `ω` has `(ω, ω) = 1/4`. The
//! irrep with highest weight `nω` then has `|λ| = n/2` and Casimir
//! `n(n+2)/4 = l(l+1)` with `l = n/2`. SO(3) reuses the SU(2) data restricted
//! to even `n`; the torus `T^d` uses the standard lattice `ℤ^d`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, NcfaError, Result};

/// Which compact group we are working on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum GroupId {
    Torus(u32),
    Su2,
    So3,
}

impl GroupId {
    /// Length of a highest-weight coordinate vector.
    pub fn weight_len(self) -> usize {
        match self {
            GroupId::Torus(d) => d as usize,
            GroupId::Su2 | GroupId::So3 => 1,
        }
    }

    pub fn is_torus(self) -> bool {
        matches!(self, GroupId::Torus(_))
    }

    /// Human-readable statement of the inner-product scale.
    pub fn normalization_note(self) -> &'static str {
        match self {
            GroupId::Su2 => "su2: kappa = l(l+1), |lambda| = l = n/2",
            GroupId::So3 => "so3: kappa = l(l+1), |lambda| = l (even su2 weights n = 2l)",
            GroupId::Torus(_) => "torus: kappa = |k|^2, |lambda| = |k|",
        }
    }
}

impl fmt::Display for GroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupId::Torus(d) => write!(f, "torus:{d}"),
            GroupId::Su2 => f.write_str("su2"),
            GroupId::So3 => f.write_str("so3"),
        }
    }
}

impl FromStr for GroupId {
    type Err = NcfaError;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "su2" => Ok(GroupId::Su2),
            "so3" => Ok(GroupId::So3),
            "torus" => Ok(GroupId::Torus(1)),
            other => {
                let Some(d) = other.strip_prefix("torus:") else {
                    return invalid(format!("unknown group '{s}' (expected su2, so3 or torus:d)"));
                };
                match d.parse::<u32>() {
                    Ok(d) if d >= 1 => Ok(GroupId::Torus(d)),
                    _ => invalid(format!("bad torus dimension in '{s}'")),
                }
            }
        }
    }
}

impl TryFrom<String> for GroupId {
    type Error = NcfaError;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<GroupId> for String {
    fn from(g: GroupId) -> String {
        g.to_string()
    }
}

/// Root and weight data of a rank-1 group or a torus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootSystemData {
    pub group: GroupId,
    pub rank: usize,
    /// Dimension of the group manifold.
    pub dim: usize,
    pub positive_roots: Vec<Vec<i64>>,
    pub fundamental_roots: Vec<Vec<i64>>,
    /// `2ρ`, i.e. the sum of the positive roots; kept doubled to stay integral.
    pub two_rho: Vec<i64>,
    /// Number of positive roots.
    pub m: usize,
    gram: Vec<Vec<i64>>,
    gram_den: i64,
}

impl RootSystemData {
    pub fn new(group: GroupId) -> Self {
        match group {
            GroupId::Su2 | GroupId::So3 => {
                let alpha = vec![2];
                RootSystemData {
                    group,
                    rank: 1,
                    dim: 3,
                    positive_roots: vec![alpha.clone()],
                    fundamental_roots: vec![alpha.clone()],
                    two_rho: alpha,
                    m: 1,
                    gram: vec![vec![1]],
                    gram_den: 4,
                }
            }
            GroupId::Torus(d) => {
                let d = d as usize;
                let gram = (0..d)
                    .map(|i| (0..d).map(|j| i64::from(i == j)).collect())
                    .collect();
                RootSystemData {
                    group,
                    rank: d,
                    dim: d,
                    positive_roots: Vec::new(),
                    fundamental_roots: Vec::new(),
                    two_rho: vec![0; d],
                    m: 0,
                    gram,
                    gram_den: 1,
                }
            }
        }
    }

    /// `ρ = ½ Σ α` over the positive roots.
    pub fn half_sum_rho(&self) -> Vec<f64> {
        self.two_rho.iter().map(|&x| x as f64 / 2.0).collect()
    }

    fn gram_numerator(&self, u: &[i64], v: &[i64]) -> i64 {
        let mut acc = 0i64;
        for (i, row) in self.gram.iter().enumerate() {
            for (j, &g) in row.iter().enumerate() {
                acc += u[i] * g * v[j];
            }
        }
        acc
    }

    /// Exact inner product of two weights.
    pub fn inner_exact(&self, u: &[i64], v: &[i64]) -> Ratio<i64> {
        Ratio::new(self.gram_numerator(u, v), self.gram_den)
    }

    pub fn inner(&self, u: &[i64], v: &[i64]) -> f64 {
        self.gram_numerator(u, v) as f64 / self.gram_den as f64
    }

    /// Checks that `lambda` is a highest weight of this group.
    pub fn check_dominant(&self, lambda: &[i64]) -> Result<()> {
        if lambda.len() != self.group.weight_len() {
            return invalid(format!(
                "weight {lambda:?} has {} coordinates, {} expects {}",
                lambda.len(),
                self.group,
                self.group.weight_len()
            ));
        }
        match self.group {
            GroupId::Torus(_) => Ok(()),
            GroupId::Su2 if lambda[0] < 0 => {
                invalid(format!("weight {lambda:?} is not dominant (negative coordinate)"))
            }
            GroupId::So3 if lambda[0] < 0 => {
                invalid(format!("weight {lambda:?} is not dominant (negative coordinate)"))
            }
            GroupId::So3 if lambda[0] % 2 != 0 => invalid(format!(
                "weight {lambda:?} is odd; SO(3) only carries even su(2) weights"
            )),
            _ => Ok(()),
        }
    }

    /// Builds the dual point for `lambda`.
    pub fn irrep(&self, lambda: &[i64]) -> Result<Irrep> {
        let dim = weyl_dimension(self, lambda)?;
        let casimir = casimir(self, lambda)?;
        let norm_sq = self.inner_exact(lambda, lambda);
        Ok(Irrep {
            group: self.group,
            lambda: lambda.to_vec(),
            dim,
            casimir,
            norm: (*norm_sq.numer() as f64 / *norm_sq.denom() as f64).sqrt(),
        })
    }
}

/// One point of the unitary dual.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Irrep {
    #[serde(skip)]
    pub group: GroupId,
    pub lambda: Vec<i64>,
    pub dim: u64,
    pub casimir: f64,
    pub norm: f64,
}

impl Irrep {
    pub fn is_trivial(&self) -> bool {
        self.lambda.iter().all(|&x| x == 0)
    }

    /// The su(2) label `n` (twice the spin). Only meaningful for SU(2)/SO(3).
    pub fn su2_label(&self) -> i64 {
        self.lambda[0]
    }

    pub fn dim_f64(&self) -> f64 {
        self.dim as f64
    }
}

/// Total order of the dual: by norm, then lexicographically by weight.
pub fn dual_order(rs: &RootSystemData, a: &[i64], b: &[i64]) -> Ordering {
    rs.inner_exact(a, a)
        .cmp(&rs.inner_exact(b, b))
        .then_with(|| a.cmp(b))
}

/// All dual points with `|λ| ≤ max_norm`, sorted by [`dual_order`].
pub fn enumerate_irreps(rs: &RootSystemData, max_norm: f64) -> Result<Vec<Irrep>> {
    if !(max_norm > 0.0) || !max_norm.is_finite() {
        return invalid(format!("max_norm must be positive and finite, got {max_norm}"));
    }
    let r2 = max_norm * max_norm;
    let mut weights: Vec<Vec<i64>> = match rs.group {
        GroupId::Su2 | GroupId::So3 => {
            let step = if rs.group == GroupId::So3 { 2 } else { 1 };
            let top = (2.0 * max_norm).floor() as i64;
            (0..=top)
                .step_by(step)
                .map(|n| vec![n])
                .filter(|w| rs.inner(w, w) <= r2)
                .collect()
        }
        GroupId::Torus(d) => {
            let k = max_norm.floor() as i64;
            let mut out = Vec::new();
            let mut cur = vec![-k; d as usize];
            'outer: loop {
                if rs.inner(&cur, &cur) <= r2 {
                    out.push(cur.clone());
                }
                // odometer increment over the box [-k, k]^d
                for c in cur.iter_mut() {
                    if *c < k {
                        *c += 1;
                        continue 'outer;
                    }
                    *c = -k;
                }
                break out;
            }
        }
    };
    weights.sort_by(|a, b| dual_order(rs, a, b));
    weights.iter().map(|w| rs.irrep(w)).collect()
}

/// Weyl's dimension formula `∏(λ+ρ, α) / ∏(ρ, α)` evaluated exactly.
pub fn weyl_dimension(rs: &RootSystemData, lambda: &[i64]) -> Result<u64> {
    rs.check_dominant(lambda)?;
    let shifted: Vec<i64> = lambda
        .iter()
        .zip(&rs.two_rho)
        .map(|(&l, &r)| 2 * l + r)
        .collect();
    let mut num: i128 = 1;
    let mut den: i128 = 1;
    for alpha in &rs.positive_roots {
        num *= rs.gram_numerator(&shifted, alpha) as i128;
        den *= rs.gram_numerator(&rs.two_rho, alpha) as i128;
    }
    if den == 0 || num % den != 0 {
        return Err(NcfaError::NumericalFailure(format!(
            "dimension formula did not yield an integer for {lambda:?}"
        )));
    }
    Ok((num / den) as u64)
}

/// Casimir value `(λ, λ + 2ρ)` as an exact rational.
pub fn casimir_exact(rs: &RootSystemData, lambda: &[i64]) -> Result<Ratio<i64>> {
    rs.check_dominant(lambda)?;
    let shifted: Vec<i64> = lambda.iter().zip(&rs.two_rho).map(|(&l, &r)| l + r).collect();
    Ok(rs.inner_exact(lambda, &shifted))
}

pub fn casimir(rs: &RootSystemData, lambda: &[i64]) -> Result<f64> {
    let c = casimir_exact(rs, lambda)?;
    Ok(*c.numer() as f64 / *c.denom() as f64)
}

/// Smallest constants in `d_λ ≤ N|λ|^m` and `|λ|² ≤ κ_λ ≤ C(1 + |λ|²)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InequalityReport {
    pub dim_constant: f64,
    pub dim_witness: Vec<i64>,
    pub casimir_constant: f64,
    pub casimir_witness: Vec<i64>,
    /// Number of `λ ≠ 0` with `|λ|² > κ_λ`; always expected to be zero.
    pub lower_bound_violations: usize,
    pub checked: usize,
}

pub fn verify_inequalities(rs: &RootSystemData, max_norm: f64) -> Result<InequalityReport> {
    if !(max_norm >= 1.0) {
        return invalid(format!("max_norm must be >= 1, got {max_norm}"));
    }
    let irreps = enumerate_irreps(rs, max_norm)?;
    let mut rep = InequalityReport {
        dim_constant: 0.0,
        dim_witness: Vec::new(),
        casimir_constant: 0.0,
        casimir_witness: Vec::new(),
        lower_bound_violations: 0,
        checked: 0,
    };
    for ir in irreps.iter().filter(|ir| !ir.is_trivial()) {
        rep.checked += 1;
        let n_ratio = ir.dim as f64 / ir.norm.powi(rs.m as i32);
        if n_ratio > rep.dim_constant {
            rep.dim_constant = n_ratio;
            rep.dim_witness = ir.lambda.clone();
        }
        let c_ratio = ir.casimir / (1.0 + ir.norm * ir.norm);
        if c_ratio > rep.casimir_constant {
            rep.casimir_constant = c_ratio;
            rep.casimir_witness = ir.lambda.clone();
        }
        // exact comparison |λ|² ≤ (λ, λ + 2ρ)
        if rs.inner_exact(&ir.lambda, &ir.lambda) > casimir_exact(rs, &ir.lambda)? {
            rep.lower_bound_violations += 1;
        }
    }
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZetaReport {
    pub partial_sum: f64,
    pub converged: bool,
    /// Estimate of the omitted tail; `None` when the series diverges.
    pub tail_estimate: Option<f64>,
}

impl ZetaReport {
    pub fn total(&self) -> Option<f64> {
        self.tail_estimate.map(|t| self.partial_sum + t)
    }
}

/// Partial sums of `Σ_{λ≠0} |λ|^{-s}`; the series converges iff `s > rank`.
pub fn sugiura_zeta(rs: &RootSystemData, s: f64, max_norm: f64) -> Result<ZetaReport> {
    if !(max_norm >= 1.0) {
        return invalid(format!("max_norm must be >= 1, got {max_norm}"));
    }
    let partial_sum = enumerate_irreps(rs, max_norm)?
        .iter()
        .filter(|ir| !ir.is_trivial())
        .map(|ir| ir.norm.powf(-s))
        .sum();
    let converged = s > rs.rank as f64;
    let tail_estimate = converged.then(|| match rs.group {
        GroupId::Su2 => {
            let last = (2.0 * max_norm).floor();
            2f64.powf(s) * euler_maclaurin_tail(last, s)
        }
        GroupId::So3 => euler_maclaurin_tail(max_norm.floor(), s),
        GroupId::Torus(1) => 2.0 * euler_maclaurin_tail(max_norm.floor(), s),
        GroupId::Torus(d) => {
            // lattice-point count ~ volume: ∫_R^∞ ω_d r^{d-1} r^{-s} dr
            let d = d as f64;
            let omega = 2.0 * std::f64::consts::PI.powf(d / 2.0) / gamma(d / 2.0);
            omega * max_norm.powf(d - s) / (s - d)
        }
    });
    Ok(ZetaReport { partial_sum, converged, tail_estimate })
}

/// `Σ_{n > last} n^{-s}` by Euler-Maclaurin with three correction terms.
fn euler_maclaurin_tail(last: f64, s: f64) -> f64 {
    let n = last;
    n.powf(1.0 - s) / (s - 1.0) - 0.5 * n.powf(-s) + s * n.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * n.powf(-s - 3.0) / 720.0
}

/// Gamma function at half-integers and integers, enough for sphere areas.
fn gamma(x: f64) -> f64 {
    if (x - x.round()).abs() < 1e-12 {
        (1..x.round() as i64).map(|k| k as f64).product()
    } else {
        // x = k + 1/2
        let mut acc = std::f64::consts::PI.sqrt();
        let mut y = 0.5;
        while y < x - 1e-12 {
            acc *= y;
            y += 1.0;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn su2() -> RootSystemData {
        RootSystemData::new(GroupId::Su2)
    }

    #[test]
    fn root_data_invariants() {
        for g in [GroupId::Su2, GroupId::So3, GroupId::Torus(1), GroupId::Torus(3)] {
            let rs = RootSystemData::new(g);
            assert_eq!(2 * rs.m, rs.dim - rs.rank);
            assert_eq!(rs.m, rs.positive_roots.len());
            let sum: Vec<f64> = (0..rs.rank)
                .map(|i| rs.positive_roots.iter().map(|a| a[i] as f64).sum::<f64>() / 2.0)
                .collect();
            assert_eq!(rs.half_sum_rho(), sum);
        }
        let t = RootSystemData::new(GroupId::Torus(4));
        assert_eq!((t.rank, t.dim, t.m), (4, 4, 0));
    }

    #[test]
    fn su2_enumeration() {
        let irreps = enumerate_irreps(&su2(), 1.0).unwrap();
        let labels: Vec<i64> = irreps.iter().map(|i| i.lambda[0]).collect();
        assert_eq!(labels, vec![0, 1, 2]);
        let norms: Vec<f64> = irreps.iter().map(|i| i.norm).collect();
        assert_eq!(norms, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn so3_is_even_sublattice() {
        let rs = RootSystemData::new(GroupId::So3);
        let irreps = enumerate_irreps(&rs, 2.0).unwrap();
        let labels: Vec<i64> = irreps.iter().map(|i| i.lambda[0]).collect();
        assert_eq!(labels, vec![0, 2, 4]);
        assert_eq!(weyl_dimension(&rs, &[4]).unwrap(), 5);
        assert!(weyl_dimension(&rs, &[3]).is_err());
    }

    #[test]
    fn torus_enumeration() {
        let rs = RootSystemData::new(GroupId::Torus(1));
        let ks: Vec<i64> = enumerate_irreps(&rs, 2.0).unwrap().iter().map(|i| i.lambda[0]).collect();
        assert_eq!(ks, vec![0, -1, 1, -2, 2]);
        let rs2 = RootSystemData::new(GroupId::Torus(2));
        assert_eq!(casimir(&rs2, &[3, 4]).unwrap(), 25.0);
        assert_eq!(weyl_dimension(&rs2, &[3, -4]).unwrap(), 1);
    }

    #[test]
    fn dimension_and_casimir_examples() {
        let rs = su2();
        assert_eq!(weyl_dimension(&rs, &[0]).unwrap(), 1);
        assert_eq!(weyl_dimension(&rs, &[5]).unwrap(), 6);
        assert_eq!(casimir(&rs, &[0]).unwrap(), 0.0);
        assert_eq!(casimir(&rs, &[2]).unwrap(), 2.0);
        assert!(matches!(weyl_dimension(&rs, &[-1]), Err(NcfaError::InvalidArgument(_))));
        assert!(casimir(&rs, &[1, 2]).is_err());
    }

    #[test]
    fn bad_max_norm() {
        assert!(enumerate_irreps(&su2(), 0.0).is_err());
        assert!(enumerate_irreps(&su2(), -1.0).is_err());
        assert!(enumerate_irreps(&su2(), f64::NAN).is_err());
        assert!(verify_inequalities(&su2(), 0.5).is_err());
    }

    #[test]
    fn inequality_constants() {
        let rep = verify_inequalities(&su2(), 50.0).unwrap();
        assert_eq!(rep.dim_constant, 4.0);
        assert_eq!(rep.dim_witness, vec![1]);
        assert_eq!(rep.lower_bound_violations, 0);
        // max over n of n(n+2)/(4+n²) is attained at n = 5
        assert_eq!(rep.casimir_witness, vec![5]);
        assert!((rep.casimir_constant - 35.0 / 29.0).abs() < 1e-15);
        let t = verify_inequalities(&RootSystemData::new(GroupId::Torus(1)), 50.0).unwrap();
        assert_eq!(t.dim_constant, 1.0);
    }

    #[test]
    fn zeta_examples() {
        let z = sugiura_zeta(&su2(), 2.0, 200.0).unwrap();
        let exact = 2.0 * std::f64::consts::PI.powi(2) / 3.0;
        assert!((z.total().unwrap() - exact).abs() < 1e-9);
        let z1 = sugiura_zeta(&su2(), 1.0, 50.0).unwrap();
        assert!(!z1.converged);
        assert!(z1.tail_estimate.is_none());
        let t2 = sugiura_zeta(&RootSystemData::new(GroupId::Torus(2)), 3.0, 200.0).unwrap();
        assert!(t2.converged && t2.partial_sum.is_finite());
        assert!(t2.tail_estimate.unwrap() > 0.0);
    }

    #[test]
    fn group_id_parsing() {
        assert_eq!("su2".parse::<GroupId>().unwrap(), GroupId::Su2);
        assert_eq!("torus:3".parse::<GroupId>().unwrap(), GroupId::Torus(3));
        assert!("torus:0".parse::<GroupId>().is_err());
        assert!("su3".parse::<GroupId>().is_err());
        assert_eq!(GroupId::Torus(2).to_string(), "torus:2");
    }
}
