//! Concrete geometry of SU(2), SO(3) and the torus.
//!
//! SU(2) elements are unit quaternions `w + xi + yj + zk`; SO(3) elements are
//! the same quaternions modulo sign, stored in the canonical half `w ≥ 0`.
//! Torus elements are angle vectors in `[0, 2π)^d`.

use std::f64::consts::{PI, TAU};
use std::io::{Read, Write};
use std::ops::Mul;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dual::{GroupId, Irrep, RootSystemData};
use crate::error::{invalid, unsupported, NcfaError, Result};
use crate::exec::Exec;
use crate::quadrature::CompositeRule;

/// Unit quaternion `w + xi + yj + zk`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const IDENTITY: Quaternion = Quaternion { w: 1.0, x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quaternion { w, x, y, z }
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(self) -> Self {
        let n = self.norm();
        Quaternion::new(self.w / n, self.x / n, self.y / n, self.z / n)
    }

    /// Inverse of a unit quaternion.
    pub fn conj(self) -> Self {
        Quaternion::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn dot(self, o: Self) -> f64 {
        self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z
    }

    /// Conjugacy angle `θ = arccos(w) ∈ [0, π]`; the eigenvalues of the
    /// defining representation are `e^{±iθ}`.
    pub fn conjugacy_angle(self) -> f64 {
        self.w.clamp(-1.0, 1.0).acos()
    }

    /// Canonical representative of `±q`: `w ≥ 0`, ties broken by the first
    /// nonzero coordinate being positive.
    pub fn canonical_sign(self) -> Self {
        let coords = [self.w, self.x, self.y, self.z];
        let first = coords.iter().copied().find(|&c| c != 0.0).unwrap_or(0.0);
        if first < 0.0 {
            Quaternion::new(-self.w, -self.x, -self.y, -self.z)
        } else {
            self
        }
    }

    /// `cos θ + sin θ (u_x i + u_y j + u_z k)` for a unit axis `u`.
    pub fn from_angle_axis(theta: f64, axis: [f64; 3]) -> Self {
        let (s, c) = theta.sin_cos();
        Quaternion::new(c, s * axis[0], s * axis[1], s * axis[2])
    }

    /// The defining 2×2 unitary matrix `[[α, β], [-β̄, ᾱ]]` with
    /// `α = w + ix`, `β = y + iz`.
    pub fn su2_matrix(self) -> [[Complex64; 2]; 2] {
        let a = Complex64::new(self.w, self.x);
        let b = Complex64::new(self.y, self.z);
        [[a, b], [-b.conj(), a.conj()]]
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;

    fn mul(self, r: Quaternion) -> Quaternion {
        Quaternion {
            w: self.w * r.w - self.x * r.x - self.y * r.y - self.z * r.z,
            x: self.w * r.x + self.x * r.w + self.y * r.z - self.z * r.y,
            y: self.w * r.y - self.x * r.z + self.y * r.w + self.z * r.x,
            z: self.w * r.z + self.x * r.y - self.y * r.x + self.z * r.w,
        }
    }
}

/// A single group element.
#[derive(Clone, Debug, PartialEq)]
pub enum GroupElement {
    Quat(Quaternion),
    Angles(Vec<f64>),
}

impl GroupElement {
    pub fn identity(group: GroupId) -> Self {
        match group {
            GroupId::Torus(d) => GroupElement::Angles(vec![0.0; d as usize]),
            _ => GroupElement::Quat(Quaternion::IDENTITY),
        }
    }

    /// Group product, renormalized / reduced mod 2π.
    pub fn mul(&self, other: &GroupElement, group: GroupId) -> Result<GroupElement> {
        match (self, other) {
            (GroupElement::Quat(a), GroupElement::Quat(b)) => {
                let q = (*a * *b).normalized();
                Ok(GroupElement::Quat(if group == GroupId::So3 { q.canonical_sign() } else { q }))
            }
            (GroupElement::Angles(a), GroupElement::Angles(b)) if a.len() == b.len() => Ok(
                GroupElement::Angles(a.iter().zip(b).map(|(x, y)| wrap_angle(x + y)).collect()),
            ),
            _ => invalid("cannot multiply elements of different groups"),
        }
    }

    pub fn inverse(&self) -> GroupElement {
        match self {
            GroupElement::Quat(q) => GroupElement::Quat(q.conj()),
            GroupElement::Angles(a) => GroupElement::Angles(a.iter().map(|x| wrap_angle(-x)).collect()),
        }
    }

    pub fn conjugacy_angle(&self) -> Result<f64> {
        match self {
            GroupElement::Quat(q) => Ok(q.conjugacy_angle()),
            GroupElement::Angles(_) => unsupported("torus elements have no conjugacy angle (abelian)"),
        }
    }
}

pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Fills `out[n] = U_n(x)` (Chebyshev polynomials of the second kind) for
/// `n = 0..out.len()`. With `x = cos θ` this is the SU(2) character
/// `sin((n+1)θ)/sin θ`, exact at the endpoints `x = ±1`.
pub fn chebyshev_u_into(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = 2.0 * x;
    }
    for n in 2..out.len() {
        out[n] = 2.0 * x * out[n - 1] - out[n - 2];
    }
}

/// SU(2) character `χ_n(θ) = sin((n+1)θ)/sin θ`.
pub fn su2_character(n: u64, theta: f64) -> f64 {
    let s = theta.sin();
    if s.abs() > 1e-4 {
        ((n as f64 + 1.0) * theta).sin() / s
    } else {
        let mut u = vec![0.0; n as usize + 1];
        let x = if theta < PI / 2.0 && theta.abs() < 1e-300 {
            1.0
        } else {
            theta.cos()
        };
        chebyshev_u_into(x, &mut u);
        u[n as usize]
    }
}

/// Character of `irrep` at conjugacy angle `theta` (SU(2)/SO(3) only).
pub fn character(rs: &RootSystemData, irrep: &Irrep, theta: f64) -> Result<f64> {
    if rs.group.is_torus() {
        return unsupported("torus characters take an angle vector; use torus_character");
    }
    if !(-1e-12..=PI + 1e-12).contains(&theta) {
        return invalid(format!("conjugacy angle {theta} outside [0, π]"));
    }
    let theta = theta.clamp(0.0, PI);
    if theta == 0.0 {
        return Ok(irrep.dim as f64);
    }
    if theta == PI {
        let n = irrep.su2_label();
        return Ok(if n % 2 == 0 { 1.0 } else { -1.0 } * irrep.dim as f64);
    }
    Ok(su2_character(irrep.su2_label() as u64, theta))
}

/// Torus character `e^{i k·θ}`.
pub fn torus_character(lambda: &[i64], angles: &[f64]) -> Result<Complex64> {
    if lambda.len() != angles.len() {
        return invalid("weight and angle vector lengths differ");
    }
    let phase: f64 = lambda.iter().zip(angles).map(|(&k, &a)| k as f64 * a).sum();
    Ok(Complex64::from_polar(1.0, phase))
}

/// Default bound on `d_λ` for explicit representation matrices.
pub const REP_MATRIX_CAP: u64 = 64;

/// The irrep of highest weight `n` as the `n`-th symmetric power of the
/// defining representation, in the orthonormal monomial basis
/// `e_k = sqrt(C(n,k)) x^{n-k} y^k`.
///
/// Built up one degree at a time: multiplying a degree-`n-1` monomial by `x`
/// or `y` mixes two entries of the previous matrix with weights `sqrt(j)`,
/// `sqrt(n-j)`. This avoids the cancellation of the closed-form binomial
/// expansion, which loses all accuracy well before `n = 63`.
pub fn rep_matrix(irrep: &Irrep, g: &GroupElement) -> Result<DMatrix<Complex64>> {
    rep_matrix_capped(irrep, g, REP_MATRIX_CAP)
}

pub fn rep_matrix_capped(irrep: &Irrep, g: &GroupElement, cap: u64) -> Result<DMatrix<Complex64>> {
    let q = match g {
        GroupElement::Quat(q) => *q,
        GroupElement::Angles(_) => {
            return unsupported("representation matrices are not provided for the torus")
        }
    };
    if irrep.group.is_torus() {
        return unsupported("representation matrices are not provided for the torus");
    }
    if irrep.dim > cap {
        return unsupported(format!("irrep dimension {} exceeds cap {cap}", irrep.dim));
    }
    let n_top = irrep.su2_label() as usize;
    let u = q.su2_matrix();
    let mut r = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
    for n in 1..=n_top {
        let prev = r;
        let mut next = DMatrix::from_element(n + 1, n + 1, Complex64::new(0.0, 0.0));
        let get = |j: usize, k: usize| -> Complex64 {
            if j < n && k < n {
                prev[(j, k)]
            } else {
                Complex64::new(0.0, 0.0)
            }
        };
        for k in 0..=n {
            for j in 0..=n {
                let sj = (j as f64).sqrt();
                let snj = ((n - j) as f64).sqrt();
                let lower = if j > 0 { j - 1 } else { 0 };
                // x-rule needs k < n, y-rule needs k > 0; pick the one with the
                // larger divisor so rounding errors are not amplified
                let val = if k < n && (n - k >= k) {
                    let a = u[0][0] * snj * get(j, k);
                    let b = if j > 0 { u[1][0] * sj * get(lower, k) } else { Complex64::new(0.0, 0.0) };
                    (a + b) / ((n - k) as f64).sqrt()
                } else {
                    let a = u[0][1] * snj * get(j, k - 1);
                    let b = if j > 0 { u[1][1] * sj * get(lower, k - 1) } else { Complex64::new(0.0, 0.0) };
                    (a + b) / (k as f64).sqrt()
                };
                next[(j, k)] = val;
            }
        }
        r = next;
    }
    Ok(r)
}

/// Identifier of the sampling generator recorded in every [`SampleSet`].
pub const GENERATOR_ID: &str = "chacha8-chunk4096-v1";
/// Number of variates drawn from one derived seed.
pub const CHUNK_SIZE: usize = 4096;

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of chunk `j` for a run seeded with `seed`: `splitmix64(seed ^ splitmix64(j))`.
pub fn derive_seed(seed: u64, j: u64) -> u64 {
    splitmix64(seed ^ splitmix64(j))
}

/// Draws `count` values in chunks of [`CHUNK_SIZE`]; chunk `j` uses its own
/// ChaCha8 stream seeded by [`derive_seed`]. The output does not depend on
/// the execution policy.
pub fn chunked_draw<T, F>(count: usize, seed: u64, exec: Exec, draw: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> Result<T> + Sync + Send,
{
    let chunks = count.div_ceil(CHUNK_SIZE);
    let parts = exec.try_map_indices(chunks, |j| {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, j as u64));
        let len = CHUNK_SIZE.min(count - j * CHUNK_SIZE);
        (0..len).map(|_| draw(&mut rng)).collect::<Result<Vec<T>>>()
    })?;
    Ok(parts.into_iter().flatten().collect())
}

/// Storage for a batch of group elements.
#[derive(Clone, Debug, PartialEq)]
pub enum SampleData {
    Quaternions(Vec<Quaternion>),
    /// Row-major `count × dim` angle matrix.
    Angles { dim: usize, values: Vec<f64> },
}

/// i.i.d. group elements with their provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    pub group: GroupId,
    pub data: SampleData,
    pub seed: u64,
    pub generator_id: String,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        match &self.data {
            SampleData::Quaternions(q) => q.len(),
            SampleData::Angles { dim, values } => values.len() / dim,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn quaternions(&self) -> Option<&[Quaternion]> {
        match &self.data {
            SampleData::Quaternions(q) => Some(q),
            SampleData::Angles { .. } => None,
        }
    }

    pub fn element(&self, i: usize) -> GroupElement {
        match &self.data {
            SampleData::Quaternions(q) => GroupElement::Quat(q[i]),
            SampleData::Angles { dim, values } => GroupElement::Angles(values[i * dim..(i + 1) * dim].to_vec()),
        }
    }

    /// Conjugacy angles of SU(2)/SO(3) samples; for `T^1` the raw angles.
    pub fn class_angles(&self) -> Result<Vec<f64>> {
        match &self.data {
            SampleData::Quaternions(q) => Ok(q.iter().map(|q| q.conjugacy_angle()).collect()),
            SampleData::Angles { dim: 1, values } => Ok(values.clone()),
            SampleData::Angles { .. } => unsupported("class angles are only defined for SU(2), SO(3) and T^1"),
        }
    }
}

fn standard_normal_quaternion<R: Rng>(rng: &mut R) -> Quaternion {
    loop {
        let q = Quaternion::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        let n = q.norm();
        if n > 1e-12 {
            return Quaternion::new(q.w / n, q.x / n, q.y / n, q.z / n);
        }
    }
}

/// Samples from normalized Haar measure.
pub fn haar_sample(group: GroupId, count: usize, seed: u64) -> Result<SampleSet> {
    haar_sample_with(group, count, seed, Exec::default())
}

pub fn haar_sample_with(group: GroupId, count: usize, seed: u64, exec: Exec) -> Result<SampleSet> {
    if count == 0 {
        return invalid("sample count must be at least 1");
    }
    let data = match group {
        GroupId::Su2 | GroupId::So3 => {
            let so3 = group == GroupId::So3;
            let qs = chunked_draw(count, seed, exec, |rng| {
                let q = standard_normal_quaternion(rng);
                Ok(if so3 { q.canonical_sign() } else { q })
            })?;
            SampleData::Quaternions(qs)
        }
        GroupId::Torus(d) => {
            let d = d as usize;
            let rows = chunked_draw(count, seed, exec, |rng| {
                Ok((0..d).map(|_| rng.random::<f64>() * TAU).collect::<Vec<_>>())
            })?;
            SampleData::Angles { dim: d, values: rows.into_iter().flatten().collect() }
        }
    };
    Ok(SampleSet { group, data, seed, generator_id: GENERATOR_ID.to_string() })
}

/// Quadrature rule for class functions with the Haar weight folded in.
#[derive(Clone, Debug)]
pub struct WeylRule {
    pub group: GroupId,
    pub angles: Vec<f64>,
    pub weights: Vec<f64>,
}

impl WeylRule {
    pub const DEFAULT_POINTS: usize = 256;

    /// SU(2)/SO(3): `(2/π) ∫₀^π f(θ) sin²θ dθ`; `T^1`: `(1/2π) ∫₀^{2π} f(θ) dθ`.
    pub fn new(group: GroupId, npoints: usize) -> Result<Self> {
        if npoints < 16 {
            return invalid(format!("weyl quadrature needs at least 16 points, got {npoints}"));
        }
        match group {
            GroupId::Su2 | GroupId::So3 => {
                let rule = CompositeRule::new(0.0, PI, npoints);
                let weights = rule
                    .nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(&t, &w)| w * 2.0 / PI * t.sin().powi(2))
                    .collect();
                Ok(WeylRule { group, angles: rule.nodes, weights })
            }
            GroupId::Torus(1) => {
                let rule = CompositeRule::new(0.0, TAU, npoints);
                let weights = rule.weights.iter().map(|w| w / TAU).collect();
                Ok(WeylRule { group, angles: rule.nodes, weights })
            }
            GroupId::Torus(_) => unsupported("class-function quadrature is only provided for T^1"),
        }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.angles.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)).sum()
    }
}

pub fn weyl_quadrature<F: Fn(f64) -> f64>(group: GroupId, f: F, npoints: usize) -> Result<f64> {
    Ok(WeylRule::new(group, npoints)?.integrate(f))
}

const MAGIC: &[u8; 4] = b"NCFA";
const FORMAT_VERSION: u16 = 1;

fn group_tag(group: GroupId) -> (u16, u16) {
    match group {
        GroupId::Su2 => (1, 0),
        GroupId::So3 => (2, 0),
        GroupId::Torus(d) => (3, d as u16),
    }
}

/// Writes the binary sample format (all little-endian):
/// `"NCFA"`, version `u16`, group kind `u16` (1 su2, 2 so3, 3 torus),
/// torus dimension `u16` (0 otherwise), count `u64`, seed `u64`, then
/// `4 × f64` (w, x, y, z) per quaternion or `d × f64` per angle vector.
pub fn write_samples<W: Write>(samples: &SampleSet, mut w: W) -> Result<()> {
    let (kind, dim) = group_tag(samples.group);
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&kind.to_le_bytes())?;
    w.write_all(&dim.to_le_bytes())?;
    w.write_all(&(samples.len() as u64).to_le_bytes())?;
    w.write_all(&samples.seed.to_le_bytes())?;
    match &samples.data {
        SampleData::Quaternions(qs) => {
            for q in qs {
                for v in [q.w, q.x, q.y, q.z] {
                    w.write_all(&v.to_le_bytes())?;
                }
            }
        }
        SampleData::Angles { values, .. } => {
            for v in values {
                w.write_all(&v.to_le_bytes())?;
            }
        }
    }
    Ok(())
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

pub fn read_samples<R: Read>(mut r: R) -> Result<SampleSet> {
    if &read_array::<4, _>(&mut r)? != MAGIC {
        return invalid("not an NCFA sample file (bad magic)");
    }
    let version = u16::from_le_bytes(read_array(&mut r)?);
    if version != FORMAT_VERSION {
        return Err(NcfaError::Unsupported(format!("sample file version {version}")));
    }
    let kind = u16::from_le_bytes(read_array(&mut r)?);
    let dim = u16::from_le_bytes(read_array(&mut r)?);
    let count = u64::from_le_bytes(read_array(&mut r)?) as usize;
    let seed = u64::from_le_bytes(read_array(&mut r)?);
    let group = match (kind, dim) {
        (1, _) => GroupId::Su2,
        (2, _) => GroupId::So3,
        (3, d) if d >= 1 => GroupId::Torus(d as u32),
        _ => return invalid(format!("unknown group tag ({kind}, {dim})")),
    };
    let mut f = || -> Result<f64> { Ok(f64::from_le_bytes(read_array(&mut r)?)) };
    let data = match group {
        GroupId::Torus(d) => {
            let values = (0..count * d as usize).map(|_| f()).collect::<Result<Vec<_>>>()?;
            SampleData::Angles { dim: d as usize, values }
        }
        _ => {
            let qs = (0..count)
                .map(|_| Ok(Quaternion::new(f()?, f()?, f()?, f()?)))
                .collect::<Result<Vec<_>>>()?;
            SampleData::Quaternions(qs)
        }
    };
    Ok(SampleSet { group, data, seed, generator_id: GENERATOR_ID.to_string() })
}
