//! Invariant suite behind `ncfa verify`.

use ncfa::deconv::{estimate, estimate_full_matrix, EvalGrid};
use ncfa::diagnostics::{
    l2_test, smoothness_test, supersmooth_fit, supersmooth_implies_smooth_check, trace_report, Mode, Source, Verdict,
};
use ncfa::dual::{casimir, verify_inequalities, weyl_dimension, GroupId, RootSystemData};
use ncfa::groups::{haar_sample, rep_matrix, su2_character, WeylRule};
use ncfa::measures::{noise_multiply, sample_central, CentralMeasureSpec, ClassDensity};
use ncfa::spectra::{convolve, plancherel_norm_sq};
use ncfa::stats::{ks_critical_1pct, ks_two_sample};
use ncfa::Result;
use num_complex::Complex64;
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub quick: bool,
    pub passed: bool,
    pub checks: Vec<Check>,
}

type Probe = fn() -> Result<(bool, String)>;

pub fn run(quick: bool) -> VerifyReport {
    let mut probes: Vec<(&'static str, Probe)> = vec![
        ("dual: dimensions and casimirs", dual_formulas),
        ("dual: inequality constants", inequalities),
        ("characters: orthogonality", character_orthogonality),
        ("representations: unitary homomorphisms", representations),
        ("plancherel: su2", || plancherel(GroupId::Su2)),
        ("plancherel: torus:1", || plancherel(GroupId::Torus(1))),
        ("trace identities: su2", || trace_identities(GroupId::Su2)),
        ("trace identities: torus:1", || trace_identities(GroupId::Torus(1))),
        ("example measure verdicts", example_verdicts),
        ("super-smooth fit and smoothness chain", super_smooth),
        ("convolution semigroup", semigroup),
    ];
    if !quick {
        probes.push(("sampler: first moment and Haar KS", sampler));
        probes.push(("deconvolution: character sum = full matrix", deconv_oracle));
    }
    let checks: Vec<Check> = probes
        .into_iter()
        .map(|(name, probe)| match probe() {
            Ok((passed, detail)) => Check { name, passed, detail },
            Err(e) => Check { name, passed: false, detail: format!("error: {e}") },
        })
        .collect();
    VerifyReport { quick, passed: checks.iter().all(|c| c.passed), checks }
}

fn dual_formulas() -> Result<(bool, String)> {
    let rs = RootSystemData::new(GroupId::Su2);
    let mut ok = true;
    for n in 0..=100i64 {
        ok &= weyl_dimension(&rs, &[n])? == n as u64 + 1;
        ok &= casimir(&rs, &[n])? == (n * (n + 2)) as f64 / 4.0;
    }
    Ok((ok, "su2 n <= 100".into()))
}

fn inequalities() -> Result<(bool, String)> {
    let r = verify_inequalities(&RootSystemData::new(GroupId::Su2), 50.0)?;
    let ok = r.dim_constant == 4.0 && r.dim_witness == vec![1] && r.lower_bound_violations == 0;
    Ok((ok, format!("N = {} at {:?}, C = {:.6}", r.dim_constant, r.dim_witness, r.casimir_constant)))
}

fn character_orthogonality() -> Result<(bool, String)> {
    let rule = WeylRule::new(GroupId::Su2, 256)?;
    let mut worst: f64 = 0.0;
    for m in 0..=12u64 {
        for n in 0..=12u64 {
            let ip = rule.integrate(|t| su2_character(m, t) * su2_character(n, t));
            worst = worst.max((ip - f64::from(m == n)).abs());
        }
    }
    Ok((worst < 1e-12, format!("max deviation {worst:.1e}")))
}

fn representations() -> Result<(bool, String)> {
    let rs = RootSystemData::new(GroupId::Su2);
    let s = haar_sample(GroupId::Su2, 6, 17)?;
    let mut worst: f64 = 0.0;
    for n in [1i64, 2, 5, 8] {
        let ir = rs.irrep(&[n])?;
        for i in 0..3 {
            let (g, h) = (s.element(2 * i), s.element(2 * i + 1));
            let (pg, ph) = (rep_matrix(&ir, &g)?, rep_matrix(&ir, &h)?);
            let pgh = rep_matrix(&ir, &g.mul(&h, GroupId::Su2)?)?;
            worst = worst.max((&pg * &ph - &pgh).camax());
            let id = nalgebra::DMatrix::<Complex64>::identity(ir.dim as usize, ir.dim as usize);
            worst = worst.max((pg.adjoint() * &pg - id).camax());
            let chi = su2_character(n as u64, g.conjugacy_angle()?);
            worst = worst.max((pg.trace().re - chi).abs());
        }
    }
    Ok((worst < 1e-10, format!("max deviation {worst:.1e}")))
}

fn plancherel(group: GroupId) -> Result<(bool, String)> {
    let spec = CentralMeasureSpec::heat(group, 0.2)?;
    let density = ClassDensity::new(&spec)?;
    let quad = WeylRule::new(group, 512)?.integrate(|t| density.class_value(t).powi(2));
    let spectral = plancherel_norm_sq(&spec.coefficients()?);
    let dev = (quad - spectral).abs();
    Ok((dev < 1e-8, format!("quadrature {quad:.12}, spectral {spectral:.12}")))
}

fn trace_identities(group: GroupId) -> Result<(bool, String)> {
    let (mut trace_dev, mut hs_dev): (f64, f64) = (0.0, 0.0);
    for t in [0.1, 0.25, 0.5, 1.0] {
        let r = trace_report(t, group, None)?;
        trace_dev = trace_dev.max((r.trace_spectral - r.density_at_e).abs());
        hs_dev = hs_dev.max((r.hs_norm_sq - r.trace_spectral_2t).abs());
    }
    Ok((trace_dev < 1e-10 && hs_dev < 1e-12, format!("trace vs density {trace_dev:.1e}, hs vs trace(2t) {hs_dev:.1e}")))
}

fn example_verdicts() -> Result<(bool, String)> {
    let g = GroupId::Su2;
    let specs = [
        (CentralMeasureSpec::gaussian(g, 0.2)?, Verdict::Smooth),
        (CentralMeasureSpec::stable(g, 1.0, 0.5, 1.0)?, Verdict::Smooth),
        (CentralMeasureSpec::stable(g, 1.0, 1.0, 1.0)?, Verdict::Smooth),
        (CentralMeasureSpec::stable(g, 1.0, 1.5, 1.0)?, Verdict::Smooth),
        (CentralMeasureSpec::laplace(g, 1.0, 1.0)?, Verdict::NotSmooth),
    ];
    let mut bad = Vec::new();
    for (spec, want) in &specs {
        for mode in [Mode::Analytic, Mode::Numeric] {
            let s = smoothness_test(Source::Spec(spec), 4, 512.0, mode)?.verdict;
            let l = l2_test(Source::Spec(spec), 512.0, mode)?.verdict;
            if s != *want || l != Verdict::Converges {
                bad.push(format!("{:?} {mode:?}: {s:?}/{l:?}", spec.family));
            }
        }
    }
    let detail = if bad.is_empty() { "all five specs, both modes".to_string() } else { bad.join("; ") };
    Ok((bad.is_empty(), detail))
}

fn super_smooth() -> Result<(bool, String)> {
    let noise = CentralMeasureSpec::heat(GroupId::Su2, 0.05)?;
    let f = supersmooth_fit(Source::Spec(&noise), None)?;
    let chain = supersmooth_implies_smooth_check(&noise)?;
    let ok = (f.beta_hat - 1.0).abs() <= 0.02 && (f.gamma_hat - 0.05).abs() <= 1e-3 && f.a2_hat.abs() <= 0.1 && chain.passed;
    Ok((ok, format!("beta {:.4}, gamma {:.5}, chain passed: {}", f.beta_hat, f.gamma_hat, chain.passed)))
}

fn semigroup() -> Result<(bool, String)> {
    let g = GroupId::Su2;
    let a = CentralMeasureSpec::heat(g, 0.1)?.coefficients_up_to(30.0)?;
    let b = CentralMeasureSpec::heat(g, 0.25)?.coefficients_up_to(30.0)?;
    let c = CentralMeasureSpec::heat(g, 0.35)?.coefficients_up_to(30.0)?;
    let conv = convolve(&a, &b)?.coeffs.scalar_values()?;
    let worst = conv
        .iter()
        .zip(c.scalar_values()?)
        .map(|(x, y)| (x - y).abs() / y.max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    Ok((worst < 1e-12, format!("max relative deviation {worst:.1e}")))
}

fn sampler() -> Result<(bool, String)> {
    let n = 100_000;
    let g = GroupId::Su2;
    let angles = sample_central(&CentralMeasureSpec::heat(g, 0.1)?, n, 42)?.class_angles()?;
    let chi1 = angles.iter().map(|&t| su2_character(1, t)).sum::<f64>() / n as f64;
    let sigma = (chi1 - 2.0 * (-0.075f64).exp()).abs() / (2.0 / (n as f64).sqrt());
    let a = sample_central(&CentralMeasureSpec::haar(g), n, 42)?.class_angles()?;
    let b = haar_sample(g, n, 43)?.class_angles()?;
    let ks = ks_two_sample(&a, &b);
    let crit = ks_critical_1pct(n, Some(n));
    Ok((sigma <= 3.0 && ks < crit, format!("chi1 off by {sigma:.2} sigma, KS {ks:.4} vs {crit:.4}")))
}

fn deconv_oracle() -> Result<(bool, String)> {
    let g = GroupId::Su2;
    let noise = CentralMeasureSpec::heat(g, 0.05)?;
    let ys = noise_multiply(&sample_central(&CentralMeasureSpec::heat(g, 0.1)?, 100, 1)?, &sample_central(&noise, 100, 2)?)?;
    let grid = EvalGrid::uniform(g, 32)?;
    let fast = estimate(&ys, &noise, 12.5, &grid)?;
    let slow = estimate_full_matrix(&ys, &noise, 12.5, &grid)?;
    let worst = fast.iter().zip(&slow).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok((worst < 1e-10, format!("max deviation {worst:.1e}")))
}
