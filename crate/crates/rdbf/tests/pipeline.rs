use proptest::prelude::*;
use rdbf::config::{Mode, ScenarioConfig};
use rdbf::denoise::end_to_end_denoise;
use rdbf::experiment::{run_scenario, Methods, Scenario};
use rdbf::rdbf_core::allocation::solve_rd_lcmv;
use rdbf::rdbf_core::sdp::SdpOptions;

const QUIET: &str = r#"
b0 = 16
alpha = [1.0]
duration = 1.0
crest_factor = 6.0

[scene]
room_size = [3.0, 3.0]
sensors = [[1.0, 1.0], [2.0, 1.0], [1.0, 2.0], [2.0, 2.0]]
fc = [1.5, 1.5]
targets = [[0.3, 2.7]]
target_psd = [1.0]
self_noise_psd = 1e-14
"#;

#[test]
fn clean_scene_at_full_rate_is_transparent() {
    let s = Scenario::new(ScenarioConfig::from_toml(QUIET).unwrap()).unwrap();
    let (report, signals) = end_to_end_denoise(&s, &[16.0; 4], 1.0, 3).unwrap();
    // crest 6 makes clipping negligible; 16 bits leave a relative error near 1e-5
    assert!(report.distortion <= 1e-4, "distortion {}", report.distortion);
    let len = signals.desired.len();
    assert_eq!(signals.output.len(), len);
    let err: f64 = signals.output.iter().zip(&signals.desired).map(|(a, b)| (a - b).powi(2)).sum();
    let pow: f64 = signals.desired.iter().map(|b| b * b).sum();
    assert!((err / pow).sqrt() <= 1e-4);
}

#[test]
fn measured_output_noise_tracks_model() {
    let mut cfg = ScenarioConfig::preset("small24").unwrap();
    cfg.alpha = vec![0.8];
    cfg.duration = 4.0;
    let report = run_scenario(&cfg, Methods { rd: true, md: false, threshold: false }).unwrap();
    let rates = report.records[0].rd.as_ref().unwrap().as_ref().unwrap().rates.clone();
    let (dr, _) = end_to_end_denoise(&report.scenario, &rates, 0.8, 9).unwrap();
    let bin = report.scenario.representative_bin();
    let b = &dr.bins[bin];
    assert!(b.output_noise_model <= b.bound * (1.0 + 1e-6));
    let rel = (b.output_noise_measured / b.output_noise_model - 1.0).abs();
    assert!(rel < 0.3, "measured {} model {}", b.output_noise_measured, b.output_noise_model);
}

#[test]
fn aggregate_mode_meets_every_bin_bound() {
    let mut cfg = ScenarioConfig::preset("small24").unwrap();
    cfg.alpha = vec![0.7];
    cfg.mode = Mode::Aggregate;
    cfg.bins = Some([10, 30]);
    cfg.duration = 1.0;
    let report = run_scenario(&cfg, Methods { rd: true, md: false, threshold: false }).unwrap();
    let rates = report.records[0].rd.as_ref().unwrap().as_ref().unwrap().rates.clone();
    let (dr, _) = end_to_end_denoise(&report.scenario, &rates, 0.7, 1).unwrap();
    let (mut model, mut bound) = (0.0, 0.0);
    for b in &dr.bins[10..=30] {
        assert!(b.output_noise_model <= b.bound * (1.0 + 1e-6), "bin {}", b.bin);
        model += b.output_noise_model;
        bound += b.bound;
    }
    assert!(model <= bound);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn relaxed_energy_shrinks_with_alpha(lo in 0.4f64..0.95, gap in 0.01f64..0.5) {
        let hi = (lo + gap).min(1.0);
        let s = Scenario::new(ScenarioConfig::preset("small24").unwrap()).unwrap();
        let model = s.bin_model(s.representative_bin()).unwrap();
        let energy = |a| solve_rd_lcmv(&s.problem(&model, a).unwrap(), &SdpOptions::default()).unwrap().energy;
        let (e_lo, e_hi) = (energy(lo), energy(hi));
        prop_assert!(e_lo <= e_hi + 1e-6 * e_hi.abs().max(1.0), "{lo}: {e_lo} vs {hi}: {e_hi}");
    }
}
