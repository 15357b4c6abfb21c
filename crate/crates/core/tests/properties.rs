use proptest::prelude::*;
use rdbf_core::beamforming::{lcmv, LinearConstraintSet};
use rdbf_core::linalg::{hermitian_deviation, hermitian_eigenvalues, symmetric_eigenvalues};
use rdbf_core::quantization::quant_noise_variance;
use rdbf_core::scene::{assemble_covariances, build_freefield_atf, Point, SceneConfig};
use rdbf_core::sdp::embed_hermitian;
use rdbf_core::{CMatrix, CVector, Complex64};

fn point() -> impl Strategy<Value = Point> {
    (0.1f64..3.9, 0.1f64..3.9).prop_map(|(x, y)| Point::new(x, y))
}

fn scene() -> impl Strategy<Value = SceneConfig> {
    (
        proptest::collection::vec(point(), 3..8),
        proptest::collection::vec(point(), 1..3),
        proptest::collection::vec(point(), 0..3),
        1e-6f64..1e-2,
    )
        .prop_map(|(sensors, targets, interferers, v)| SceneConfig {
            room_size: [4.0, 4.0],
            sensor_positions: sensors,
            fc_position: Point::new(2.0, 2.0),
            target_psd: vec![1.0; targets.len()],
            interferer_psd: vec![0.5; interferers.len()],
            target_positions: targets,
            interferer_positions: interferers,
            self_noise_psd: v,
            speed_of_sound: 343.0,
            sample_rate: 16_000.0,
        })
}

fn noise_with_rates(r_nn: &CMatrix, amps: &[f64], bits: &[f64]) -> CMatrix {
    let mut r = r_nn.clone();
    for k in 0..amps.len() {
        r[(k, k)] += Complex64::new(quant_noise_variance(amps[k], bits[k]), 0.0);
    }
    r
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn covariances_are_hermitian_psd_and_additive(s in scene(), f in 50.0f64..4000.0) {
        let atf = build_freefield_atf(&s, f).unwrap();
        let cov = assemble_covariances(&atf, &s.statistics()).unwrap();
        let scale = cov.r_yy.norm().max(1.0);
        for r in [&cov.r_xx, &cov.r_nn, &cov.r_yy] {
            prop_assert!(hermitian_deviation(r) <= 1e-12 * scale);
            prop_assert!(hermitian_eigenvalues(r)[0] >= -1e-12 * scale);
        }
        prop_assert!((&cov.r_yy - &cov.r_xx - &cov.r_nn).norm() <= 1e-12 * scale);
    }

    #[test]
    fn freefield_gain_is_inverse_distance(s in scene(), f in 50.0f64..4000.0) {
        let atf = build_freefield_atf(&s, f).unwrap();
        for (k, p) in s.sensor_positions.iter().enumerate() {
            for (i, t) in s.target_positions.iter().enumerate() {
                let d = p.distance(t).max(rdbf_core::scene::MIN_DISTANCE);
                prop_assert!((atf.a[(k, i)].norm() * d - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn lcmv_meets_constraints_and_is_minimal(s in scene(), f in 100.0f64..4000.0, dir in proptest::collection::vec(-1.0f64..1.0, 16)) {
        let atf = build_freefield_atf(&s, f).unwrap();
        let cov = assemble_covariances(&atf, &s.statistics()).unwrap();
        let Ok(cons) = LinearConstraintSet::distortionless(&atf.a) else { return Ok(()) };
        let sol = lcmv(&cov.r_nn, &cons).unwrap();
        let m = s.sensor_positions.len();
        let resp = cons.lambda().adjoint() * &sol.weights.w;
        for (r, t) in resp.iter().zip(cons.f().iter()) {
            prop_assert!((r - t).norm() <= 1e-8);
        }
        // perturb within the constraint null space
        let l = cons.lambda();
        let g = CVector::from_fn(m, |k, _| Complex64::new(dir[k % 16], dir[(k + 7) % 16]));
        let proj = l * (l.adjoint() * l).try_inverse().unwrap() * l.adjoint();
        let h = &g - proj * &g;
        let w2 = &sol.weights.w + h.scale(1e-2 * sol.weights.w.norm() / h.norm().max(1e-300));
        let p2 = (w2.adjoint() * &cov.r_nn * &w2)[(0, 0)].re;
        prop_assert!(p2 >= sol.noise_power * (1.0 - 1e-9));
    }

    #[test]
    fn more_bits_never_raise_output_noise(s in scene(), bits in proptest::collection::vec(0.0f64..12.0, 8), k in 0usize..8, extra in 0.0f64..4.0) {
        let atf = build_freefield_atf(&s, 1000.0).unwrap();
        let cov = assemble_covariances(&atf, &s.statistics()).unwrap();
        let Ok(cons) = LinearConstraintSet::distortionless(&atf.a) else { return Ok(()) };
        let m = s.sensor_positions.len();
        let amps: Vec<f64> = (0..m).map(|i| 8.0 * cov.r_yy[(i, i)].re.sqrt()).collect();
        let b: Vec<f64> = bits[..m].to_vec();
        let mut raised = b.clone();
        raised[k % m] += extra;
        let lo = lcmv(&noise_with_rates(&cov.r_nn, &amps, &b), &cons).unwrap().noise_power;
        let hi = lcmv(&noise_with_rates(&cov.r_nn, &amps, &raised), &cons).unwrap().noise_power;
        prop_assert!(hi <= lo * (1.0 + 1e-9));
    }

    #[test]
    fn real_embedding_doubles_the_spectrum(entries in proptest::collection::vec(-1.0f64..1.0, 32)) {
        let n = 4;
        let g = CMatrix::from_fn(n, n, |r, c| Complex64::new(entries[r * n + c], entries[16 + r * n + c]));
        let h = &g + g.adjoint();
        let mut want: Vec<f64> = hermitian_eigenvalues(&h).into_iter().flat_map(|e| [e, e]).collect();
        want.sort_by(f64::total_cmp);
        let mut got = symmetric_eigenvalues(&embed_hermitian(&h).unwrap());
        got.sort_by(f64::total_cmp);
        for (a, b) in got.iter().zip(&want) {
            prop_assert!((a - b).abs() <= 1e-10);
        }
    }
}
