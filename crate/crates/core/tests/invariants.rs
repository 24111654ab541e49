use std::f64::consts::TAU;

use crap_core::clutter::{calibrate, ClutterSnapshots, EcaC, EcaS, OrderSelection, Remover, RemoverKind};
use crap_core::numerics::ComplexMatrix;
use crap_core::radar::periodogram;
use crap_core::scene::{CsiFrame, RfConfig};
use crap_core::tracker::{init, predict, update, KfParams};
use crap_core::Complex64;
use nalgebra::{Matrix2, Vector2};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const N: usize = 8;
const M: usize = 6;

fn config() -> RfConfig {
    RfConfig::with_frame(N, M, 27.4e9, 120e3, 1e-3)
}

fn matrix(rng: &mut ChaCha8Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(N, M, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn frame(rng: &mut ChaCha8Rng) -> CsiFrame {
    CsiFrame::new(config(), matrix(rng)).unwrap()
}

fn snapshots(k: usize, rng: &mut ChaCha8Rng) -> ClutterSnapshots {
    ClutterSnapshots::from_fn(N, M, k, |_| Ok(matrix(rng))).unwrap()
}

fn removers(k: usize, rng: &mut ChaCha8Rng) -> Vec<Remover> {
    let s = snapshots(k, rng);
    vec![
        Remover::Crap(calibrate(&s, OrderSelection::Fixed(k)).unwrap()),
        Remover::EcaC(EcaC::new(&s).unwrap()),
        Remover::EcaS(EcaS::new(&s).unwrap()),
    ]
}

fn diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.sub(b).unwrap().frobenius_norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn removal_is_idempotent(seed in any::<u64>(), k in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = frame(&mut rng);
        for r in removers(k, &mut rng) {
            let once = r.remove(&f).unwrap();
            let twice = r.remove(&once).unwrap();
            prop_assert!(diff(&once.h, &twice.h) <= 1e-10 * f.h.frobenius_norm(), "{}", r.kind());
        }
    }

    #[test]
    fn removal_is_linear(seed in any::<u64>(), k in 1usize..4, a_re in -2.0f64..2.0, a_im in -2.0f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (f, g) = (frame(&mut rng), frame(&mut rng));
        let a = Complex64::new(a_re, a_im);
        let combo = f.with_matrix(f.h.scale(a).add(&g.h).unwrap());
        for r in removers(k, &mut rng) {
            let lhs = r.remove(&combo).unwrap().h;
            let rhs = r.remove(&f).unwrap().h.scale(a).add(&r.remove(&g).unwrap().h).unwrap();
            prop_assert!(diff(&lhs, &rhs) <= 1e-10 * (1.0 + combo.h.frobenius_norm()), "{}", r.kind());
        }
    }

    #[test]
    fn residual_is_orthogonal_to_removed_part(seed in any::<u64>(), k in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = frame(&mut rng);
        for r in removers(k, &mut rng) {
            let kept = r.remove(&f).unwrap().h;
            let removed = f.h.sub(&kept).unwrap();
            let inner: Complex64 = kept.as_slice().iter().zip(removed.as_slice()).map(|(x, y)| x.conj() * y).sum();
            prop_assert!(inner.norm() <= 1e-10 * f.h.energy(), "{}", r.kind());
            prop_assert!(kept.energy() <= f.h.energy() * (1.0 + 1e-12), "{}", r.kind());
        }
    }

    #[test]
    fn snapshot_phase_does_not_change_removal(seed in any::<u64>(), k in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = snapshots(k, &mut rng);
        let phases: Vec<Complex64> = (0..k).map(|_| Complex64::from_polar(1.0, rng.random_range(0.0..TAU))).collect();
        let rotated = ClutterSnapshots::from_fn(N, M, k, |i| Ok(s.frame(i).scale(phases[i]))).unwrap();
        let f = frame(&mut rng);
        for kind in [RemoverKind::Crap, RemoverKind::EcaC, RemoverKind::EcaS] {
            let a = Remover::prepare(kind, &s, OrderSelection::Fixed(k)).unwrap().remove(&f).unwrap();
            let b = Remover::prepare(kind, &rotated, OrderSelection::Fixed(k)).unwrap().remove(&f).unwrap();
            prop_assert!(diff(&a.h, &b.h) <= 1e-10 * f.h.frobenius_norm(), "{kind}");
        }
    }

    #[test]
    fn periodogram_ignores_global_phase(seed in any::<u64>(), phi in 0.0f64..TAU) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = frame(&mut rng);
        let rotated = f.with_matrix(f.h.scale(Complex64::from_polar(1.0, phi)));
        let (a, b) = (periodogram(&f), periodogram(&rotated));
        let scale = a.values.iter().cloned().fold(0.0, f64::max);
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((x - y).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn kalman_covariance_stays_psd(
        seed in any::<u64>(),
        steps in 1usize..60,
        q in 1e-3f64..10.0,
        dt in 1e-3f64..0.1,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = Matrix2::new(0.04, 0.0, 0.0, 0.07);
        let qm = Matrix2::new(dt.powi(4) / 4.0, dt.powi(3) / 2.0, dt.powi(3) / 2.0, dt * dt) * q;
        let params = KfParams::new(qm, r, dt, 0.5, 2.0, 2.0).unwrap();
        let mut state = init(Vector2::new(5.0, 1.0), Matrix2::new(0.6, 0.0, 0.0, 0.3), 0.0).unwrap();
        for i in 0..steps {
            state = predict(&state, &params);
            if rng.random_bool(0.7) {
                let z = Vector2::new(5.0 + rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                state = update(&state, z, &params, i as f64 * dt).unwrap();
            }
            let p = state.p;
            prop_assert!((p[(0, 1)] - p[(1, 0)]).abs() <= 1e-12 * p.norm());
            prop_assert!(p[(0, 0)] > 0.0 && p.determinant() >= -1e-12 * p.norm_squared());
        }
    }
}
