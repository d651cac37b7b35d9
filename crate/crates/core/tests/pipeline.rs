use ncfa::deconv::{estimate_with, EvalGrid};
use ncfa::dual::{enumerate_irreps, GroupId, RootSystemData};
use ncfa::exec::Exec;
use ncfa::groups::{haar_sample_with, read_samples, write_samples};
use ncfa::measures::{noise_multiply, sample_central, CentralMeasureSpec, ClassSampler};
use ncfa::spectra::{empirical_transform_with, CoeffBlock, EmpiricalMode, SpectralCoeffs, SpectralFile};

const SU2: GroupId = GroupId::Su2;

fn block_gap(a: &CoeffBlock, b: &CoeffBlock) -> f64 {
    match (a, b) {
        (CoeffBlock::Scalar(x), CoeffBlock::Scalar(y)) => (x - y).norm(),
        (CoeffBlock::Matrix(x), CoeffBlock::Matrix(y)) => (x - y).camax(),
        _ => f64::INFINITY,
    }
}

#[test]
fn sampling_is_identical_under_both_policies() {
    for g in [SU2, GroupId::So3, GroupId::Torus(3)] {
        let a = haar_sample_with(g, 10_000, 5, Exec::Sequential).unwrap();
        let b = haar_sample_with(g, 10_000, 5, Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }
    let sampler = ClassSampler::new(&CentralMeasureSpec::heat(SU2, 0.2).unwrap()).unwrap();
    assert_eq!(
        sampler.sample_with(9_000, 6, Exec::Sequential).unwrap(),
        sampler.sample_with(9_000, 6, Exec::Parallel).unwrap()
    );
}

#[test]
fn transforms_and_estimates_agree_under_both_policies() {
    let s = haar_sample_with(SU2, 5_000, 8, Exec::Parallel).unwrap();
    let irreps = enumerate_irreps(&RootSystemData::new(SU2), 6.0).unwrap();
    for mode in [EmpiricalMode::TraceOnly, EmpiricalMode::FullMatrix] {
        let a = empirical_transform_with(&s, &irreps, mode, Exec::Sequential).unwrap();
        let b = empirical_transform_with(&s, &irreps, mode, Exec::Parallel).unwrap();
        for (x, y) in a.entries.iter().zip(&b.entries) {
            assert!(block_gap(&x.block, &y.block) < 1e-12);
        }
    }
    let noise = CentralMeasureSpec::heat(SU2, 0.05).unwrap();
    let grid = EvalGrid::uniform(SU2, 48).unwrap();
    let a = estimate_with(&s, &noise, 20.0, &grid, Exec::Sequential).unwrap();
    let b = estimate_with(&s, &noise, 20.0, &grid, Exec::Parallel).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() <= 1e-10 * (1.0 + x.abs()));
    }
}

#[test]
fn sample_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let x = sample_central(&CentralMeasureSpec::heat(SU2, 0.1).unwrap(), 777, 12).unwrap();
    let e = sample_central(&CentralMeasureSpec::heat(SU2, 0.05).unwrap(), 777, 13).unwrap();
    for set in [noise_multiply(&x, &e).unwrap(), haar_sample_with(GroupId::Torus(2), 100, 1, Exec::Parallel).unwrap()] {
        let path = dir.path().join("s.bin");
        write_samples(&set, std::fs::File::create(&path).unwrap()).unwrap();
        let back = read_samples(std::fs::File::open(&path).unwrap()).unwrap();
        assert_eq!(back, set);
    }
}

#[test]
fn truncated_sample_file_is_rejected() {
    let set = haar_sample_with(SU2, 10, 1, Exec::Sequential).unwrap();
    let mut bytes = Vec::new();
    write_samples(&set, &mut bytes).unwrap();
    bytes.truncate(bytes.len() - 3);
    assert!(read_samples(bytes.as_slice()).is_err());
}

#[test]
fn spectral_json_round_trips_exactly() {
    let s = haar_sample_with(SU2, 300, 4, Exec::Parallel).unwrap();
    let irreps = enumerate_irreps(&RootSystemData::new(SU2), 3.0).unwrap();
    let c = empirical_transform_with(&s, &irreps, EmpiricalMode::FullMatrix, Exec::Parallel).unwrap();
    let text = serde_json::to_string(&SpectralFile::from(&c)).unwrap();
    let back = SpectralCoeffs::try_from(serde_json::from_str::<SpectralFile>(&text).unwrap()).unwrap();
    assert_eq!(serde_json::to_string(&SpectralFile::from(&back)).unwrap(), text);
    assert_eq!(back, c);
}
