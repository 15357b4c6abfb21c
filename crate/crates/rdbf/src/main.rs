use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rdbf::config::{Mode, ScenarioConfig};
use rdbf::denoise::{end_to_end_denoise, write_denoise};
use rdbf::experiment::{describe, run_scenario, write_report, Methods, Scenario};
use rdbf::rdbf_core::allocation::{build_rd_lcmv_sdp, exhaustive_oracle, randomized_round, solve_rd_lcmv};
use rdbf::rdbf_core::sdp::SdpOptions;
use rdbf::sdp_file::save_sdp;
use rdbf::{Error, Result};

/// Rate-distributed LCMV beamforming experiments.
#[derive(Parser)]
#[command(name = "rdbf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rate allocation (relaxation + randomized rounding) for each alpha.
    Allocate(Common),
    /// Sensor selection, both from the Boolean relaxation and by
    /// thresholding the rate allocation.
    Select(Common),
    /// Allocation and both selections over the alpha sweep.
    Sweep(Common),
    /// Synthesize recordings, quantize at the allocated rates and beamform.
    Denoise(Common),
    /// Exhaustive search over every integer allocation (small scenes only).
    Oracle(Common),
}

#[derive(Args)]
struct Common {
    /// Preset name (small24, grid49, grid169) or TOML scenario file.
    #[arg(long, default_value = "small24")]
    scenario: String,
    /// Comma-separated alpha values, overriding the scenario.
    #[arg(long, value_delimiter = ',')]
    alpha: Option<Vec<f64>>,
    /// Maximum rate in bits per sample.
    #[arg(long)]
    b0: Option<u32>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Seed for rounding draws and synthesized recordings.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write each rate allocation program in sparse text form.
    #[arg(long)]
    dump_sdp: bool,
    /// Allow scenes with more than 100 sensors (slow).
    #[arg(long)]
    large: bool,
}

const LARGE_SCENE: usize = 100;

impl Common {
    fn config(&self) -> Result<ScenarioConfig> {
        let mut c = ScenarioConfig::load(&self.scenario)?;
        if let Some(a) = &self.alpha {
            c.alpha = a.clone();
        }
        if let Some(b) = self.b0 {
            c.b0 = b;
        }
        if let Some(m) = self.mode {
            c.mode = m;
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(o) = &self.out {
            c.output_dir = o.clone();
        }
        c.validate()?;
        let m = c.scene()?.num_sensors();
        if m > LARGE_SCENE && !self.large {
            return Err(Error::Config(format!("{m} sensors; pass --large to run scenes above {LARGE_SCENE}")));
        }
        Ok(c)
    }
}

/// Ok(true) when some alpha turned out infeasible.
fn run(cli: Cli) -> Result<bool> {
    let (common, methods) = match &cli.command {
        Command::Allocate(c) => (c, Methods { rd: true, md: false, threshold: false }),
        Command::Select(c) => (c, Methods { rd: false, md: true, threshold: true }),
        Command::Sweep(c) => (c, Methods::ALL),
        Command::Denoise(c) => return denoise(c),
        Command::Oracle(c) => return oracle(c),
    };
    let config = common.config()?;
    let report = run_scenario(&config, methods)?;
    write_report(&report, &config.output_dir)?;
    if common.dump_sdp {
        let s = &report.scenario;
        for &alpha in &config.alpha {
            for &bin in &report.bins {
                let p = s.problem(&s.bin_model(bin)?, alpha)?;
                save_sdp(&config.output_dir.join(format!("rd_alpha_{alpha}_bin_{bin}.sdp")), &build_rd_lcmv_sdp(&p)?)?;
            }
        }
    }
    print!("{}", describe(&report));
    Ok(report.any_infeasible())
}

fn denoise(common: &Common) -> Result<bool> {
    let config = common.config()?;
    let alpha = config.alpha[0];
    let report = run_scenario(&ScenarioConfig { alpha: vec![alpha], ..config.clone() }, Methods { rd: true, md: false, threshold: false })?;
    let rd = match report.records[0].rd.as_ref().expect("rate allocation requested") {
        Ok(r) => r,
        Err(f) if f.infeasible => return Err(Error::Infeasible(f.reason.clone())),
        Err(f) => return Err(Error::Config(f.reason.clone())),
    };
    let (dr, signals) = end_to_end_denoise(&report.scenario, &rd.rates, alpha, config.seed)?;
    write_denoise(&config.output_dir, &dr, &signals, report.scenario.scene.sample_rate)?;
    println!(
        "alpha {alpha}: {} of {} sensors active, broadband noise {:.3} dB in, {:.3} dB out (model {:.3} dB, bound {:.3} dB)",
        rd.rates.iter().filter(|b| **b > 0.0).count(),
        rd.rates.len(),
        10.0 * dr.broadband_input().log10(),
        10.0 * dr.broadband_output_measured().log10(),
        10.0 * dr.broadband_output_model().log10(),
        10.0 * dr.broadband_bound().log10(),
    );
    Ok(false)
}

fn oracle(common: &Common) -> Result<bool> {
    let config = common.config()?;
    let s = Scenario::new(config.clone())?;
    let model = s.bin_model(s.representative_bin())?;
    std::fs::create_dir_all(&config.output_dir)?;
    let mut w = csv::Writer::from_path(config.output_dir.join("oracle.csv"))?;
    w.write_record(["alpha", "status", "oracle_energy", "relaxed_energy", "rounded_energy", "evaluated", "rates"])?;
    let mut infeasible = false;
    for &alpha in &config.alpha {
        let p = s.problem(&model, alpha)?;
        let o = exhaustive_oracle(&p)?;
        let Some(best) = o.best_rates else {
            infeasible = true;
            w.write_record([alpha.to_string(), "infeasible".into(), String::new(), String::new(), String::new(), o.evaluated.to_string(), String::new()])?;
            continue;
        };
        let rd = solve_rd_lcmv(&p, &SdpOptions::default())?;
        let rounded = randomized_round(&rd.rates, &p, config.draws, config.seed)?;
        let rates: Vec<String> = best.bits.iter().map(|b| b.to_string()).collect();
        w.write_record([
            alpha.to_string(),
            "ok".into(),
            o.best_energy.unwrap_or(f64::NAN).to_string(),
            rd.energy.to_string(),
            p.energy(&rounded.bits).to_string(),
            o.evaluated.to_string(),
            rates.join(" "),
        ])?;
        println!("alpha {alpha}: oracle energy {:.6e} over {} allocations", o.best_energy.unwrap_or(f64::NAN), o.evaluated);
    }
    w.flush()?;
    Ok(infeasible)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("rdbf: at least one alpha is infeasible");
            ExitCode::from(2)
        }
        Err(e) if e.is_infeasible() => {
            eprintln!("rdbf: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("rdbf: {e}");
            ExitCode::FAILURE
        }
    }
}
