mod common;

use cmdsdml::io::{read_csv, write_csv};
use cmdsdml::{
    fit_pca, load_csv, save_csv, split, synth, LabeledDataset, LinearMetric, Matrix, Model,
    SplitSpec, SynthSpec,
};
use common::*;

#[test]
fn csv_round_trip_is_exact() {
    let mut r = rng(1);
    let x = gaussian(&mut r, 6, 4).scaled(1e3);
    let labels = vec![0.0, 0.0, 1.5, 1.5, 2.0, 2.0];
    let d = LabeledDataset::new(x, labels).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    save_csv(&d, &path).unwrap();
    let back: LabeledDataset<f64> = load_csv(&path).unwrap();
    assert_eq!(back, d);
}

#[test]
fn csv_round_trip_f32() {
    let d = synth::<f32>(&SynthSpec {
        dim: 8,
        per_group: 3,
        ..SynthSpec::benchmark(2)
    })
    .unwrap();
    let mut buf = Vec::new();
    write_csv(&d, &mut buf).unwrap();
    let back: LabeledDataset<f32> = read_csv(buf.as_slice()).unwrap();
    assert_eq!(back, d);
}

#[test]
fn model_file_round_trips_bit_identically() {
    let mut r = rng(3);
    let m = Model::CmdsDml(
        LinearMetric::new(
            gaussian(&mut r, 3, 7).scaled(1e-3),
            0.987654321,
            gaussian(&mut r, 1, 7).into_vec(),
        )
        .unwrap(),
    );
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.txt");
    m.save(&path).unwrap();
    let back = Model::<f64>::load(&path).unwrap();
    assert_eq!(back, m);
    back.save(&path).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), m.to_text());
}

#[test]
fn pca_variances_match_nalgebra() {
    let mut r = rng(9);
    let base = gaussian(&mut r, 40, 6);
    let mix = gaussian(&mut r, 6, 6);
    let x = base.matmul(&mix).unwrap();
    let d = LabeledDataset::new(x.clone(), vec![0.0; 40]).unwrap();
    let p = fit_pca(&d, 4).unwrap();
    let xc = x.sub_row_vector(&x.column_means()).unwrap();
    let cov = to_na(&xc).transpose() * to_na(&xc) / 39.0;
    let mut ev: Vec<f64> = cov.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
    for (v, e) in p.variances().iter().zip(&ev) {
        assert!(rel_err(*v, *e) < 1e-10);
    }
    let y = p.apply(&x).unwrap();
    for (k, e) in ev.iter().take(4).enumerate() {
        let var = y.column(k).iter().map(|v| v * v).sum::<f64>() / 39.0;
        assert!(rel_err(var, *e) < 1e-9);
    }
}

#[test]
fn pca_preserves_inner_products_in_its_subspace() {
    let mut r = rng(10);
    let x = gaussian(&mut r, 20, 5);
    let d = LabeledDataset::new(x, vec![0.0; 20]).unwrap();
    let p = fit_pca(&d, 3).unwrap();
    let c = p.components();
    // Points already in the component span, expressed around the mean.
    let coeffs = gaussian(&mut r, 2, 3);
    let pts = Matrix::from_fn(2, 5, |i, j| {
        p.mean()[j] + (0..3).map(|k| coeffs[(i, k)] * c[(k, j)]).sum::<f64>()
    });
    let y = p.apply(&pts).unwrap();
    let ip = |m: &Matrix<f64>, centre: &[f64]| {
        let a: Vec<f64> = m.row(0).iter().zip(centre).map(|(x, c)| x - c).collect();
        let b: Vec<f64> = m.row(1).iter().zip(centre).map(|(x, c)| x - c).collect();
        a.iter().zip(&b).map(|(p, q)| p * q).sum::<f64>()
    };
    assert!((ip(&pts, p.mean()) - ip(&y, &[0.0; 3])).abs() < 1e-10);
}

#[test]
fn split_partitions_and_is_seeded() {
    let data = synth::<f64>(&SynthSpec::benchmark(0)).unwrap();
    let (a_tr, a_te) = split(&data, SplitSpec::new(10, 42)).unwrap();
    let (b_tr, b_te) = split(&data, SplitSpec::new(10, 42)).unwrap();
    assert_eq!(a_tr, b_tr);
    assert_eq!(a_te, b_te);
    assert_eq!(a_tr.len() + a_te.len(), data.len());
    assert!(a_tr.is_grouped());
    let (c_tr, _) = split(&data, SplitSpec::new(10, 43)).unwrap();
    assert_ne!(a_tr, c_tr);
}

#[test]
fn synth_is_bit_identical_per_seed() {
    let a = synth::<f64>(&SynthSpec::benchmark(17)).unwrap();
    let b = synth::<f64>(&SynthSpec::benchmark(17)).unwrap();
    assert_eq!(a.features().as_slice(), b.features().as_slice());
    assert_eq!(a.len(), 90);
    assert_eq!(a.dim(), 150);
}
