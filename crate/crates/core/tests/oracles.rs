//! Cross-checks against dense reference computations done with nalgebra.

use crap_core::clutter::{
    calibrate, crap_remove, eca_c_remove, eca_s_remove, estimate_order_mdl, ClutterSnapshots, OrderSelection,
};
use crap_core::numerics::{svd_thin, ComplexMatrix, GramSpectrum};
use crap_core::scene::{CsiFrame, RfConfig};
use crap_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;
use common::*;

fn cn(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| cn(rng))
}

fn tiny() -> RfConfig {
    RfConfig::with_frame(8, 4, 27.4e9, 120e3, 1e-3)
}

fn random_snapshots(k: usize, rng: &mut ChaCha8Rng) -> ClutterSnapshots {
    let c = tiny();
    ClutterSnapshots::from_fn(c.n_subcarriers, c.n_symbols, k, |_| Ok(random_matrix(8, 4, rng))).unwrap()
}

fn random_frame(rng: &mut ChaCha8Rng) -> CsiFrame {
    CsiFrame::new(tiny(), random_matrix(8, 4, rng)).unwrap()
}

#[test]
fn thin_svd_matches_nalgebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (rows, cols) in [(3, 7), (6, 6), (9, 4), (1, 5)] {
        let c = random_matrix(rows, cols, &mut rng);
        let ours = svd_thin(&c).unwrap();
        let reference = to_na(&c).svd(false, false);
        let mut expected: Vec<f64> = reference.singular_values.iter().copied().collect();
        expected.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert_eq!(ours.singular_values.len(), expected.len());
        for (s, e) in ours.singular_values.iter().zip(&expected) {
            assert!((s - e).abs() < 1e-10 * expected[0], "{rows}x{cols}: {s} vs {e}");
        }
        let back = to_na(&ours.reconstruct());
        assert!(max_abs_diff(&back, &to_na(&c)) < 1e-10);
    }
}

#[test]
fn gram_spectrum_matches_nalgebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let c = random_matrix(5, 40, &mut rng);
    let spectrum = GramSpectrum::new(&c).unwrap();
    let mut expected: Vec<f64> = to_na(&c).singular_values().iter().copied().collect();
    expected.sort_by(|a, b| b.partial_cmp(a).unwrap());
    for (s, e) in spectrum.singular_values().iter().zip(&expected) {
        assert!((s - e).abs() < 1e-10 * expected[0]);
    }
    let lead = spectrum.leading(&c, 5);
    assert!(max_abs_diff(&to_na(&lead.reconstruct()), &to_na(&c)) < 1e-10);
}

#[test]
fn crap_matches_dense_projector() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for order in [1, 2, 3] {
        let snaps = random_snapshots(3, &mut rng);
        let cal = calibrate(&snaps, OrderSelection::Fixed(order)).unwrap();
        let frame = random_frame(&mut rng);
        let got = crap_remove(&cal, &frame).unwrap();
        let got = CMat::from_column_slice(32, 1, got.h.as_slice());
        assert!(max_abs_diff(&got, &crap_oracle(&snaps, order, &frame)) < 1e-10, "order {order}");
    }
}

#[test]
fn eca_matches_dense_projectors() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..5 {
        let snaps = random_snapshots(3, &mut rng);
        let frame = random_frame(&mut rng);
        let c = eca_c_remove(&snaps, &frame).unwrap();
        assert!(max_abs_diff(&to_na(&c.h), &eca_c_oracle(&snaps, &frame)) < 1e-10);
        let s = eca_s_remove(&snaps, &frame).unwrap();
        assert!(max_abs_diff(&to_na(&s.h), &eca_s_oracle(&snaps, &frame)) < 1e-10);
    }
}

/// Direct evaluation of the MDL criterion over every candidate order.
fn mdl_oracle(sigma: &[f64], q: usize) -> usize {
    let k = sigma.len();
    let lambda: Vec<f64> = sigma.iter().map(|s| s * s / q as f64).collect();
    let mut best = (f64::INFINITY, 0);
    for order in 0..k {
        let tail = &lambda[order..];
        let len = tail.len() as f64;
        let geo = tail.iter().map(|l| l.ln()).sum::<f64>() / len;
        let arith = (tail.iter().sum::<f64>() / len).ln();
        let value = -(q as f64) * len * (geo - arith) + 0.5 * (order * (2 * k - order)) as f64 * (q as f64).ln();
        if value < best.0 {
            best = (value, order);
        }
    }
    best.1
}

#[test]
fn mdl_three_dominant_values() {
    let mut sigma = vec![10.0; 3];
    sigma.extend(std::iter::repeat_n(1e-6, 7));
    let est = estimate_order_mdl(&sigma, 10, 1000).unwrap();
    assert_eq!(est.order, 3);
    assert_eq!(est.order, mdl_oracle(&sigma, 1000));
}

#[test]
fn mdl_flat_spectrum_has_no_signal() {
    let est = estimate_order_mdl(&[2.0; 8], 8, 500).unwrap();
    assert_eq!(est.order, 0);
}

#[test]
fn mdl_agrees_with_oracle_on_graded_spectra() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..50 {
        let k = rng.random_range(3..12);
        let q = rng.random_range(k..400);
        let strong = rng.random_range(0..k);
        let mut sigma: Vec<f64> = (0..k)
            .map(|i| if i < strong { rng.random_range(5.0..50.0) } else { rng.random_range(0.9..1.1) })
            .collect();
        sigma.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert_eq!(estimate_order_mdl(&sigma, k, q).unwrap().order, mdl_oracle(&sigma, q));
    }
}
