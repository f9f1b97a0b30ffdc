use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use radcom_core::harness::{
    self, clutter_for, default_filter_problem, design_beams, linspace, load_codebook, load_config, pulse_train,
    save_codebook, Modulation, ScenarioConfig, Which,
};
use radcom_core::robust::{design_robust_filter_with, wiener_filter};
use radcom_core::Codebook;

#[derive(Parser)]
#[command(name = "radcom", version, about = "Spatial-modulation beam design and robust Doppler filtering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Design the constant-modulus beam codebook.
    DesignBeams(Common),
    /// Build the clutter covariance seen through the pulse train.
    BuildClutter(Staged),
    /// Design the Wiener and robust Doppler filters.
    DesignFilter(Staged),
    /// Sample the SINR of both filters over the interval of interest.
    SweepSinr(Staged),
    /// Reproduce the figure data sets.
    RunExperiment {
        #[command(flatten)]
        common: Common,
        /// fig2, fig3, fig4, fig5, fig6 or all.
        #[arg(long, default_value = "all")]
        which: String,
    },
}

#[derive(Args)]
struct Common {
    /// Scenario file; the reference scenario is used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct Staged {
    #[command(flatten)]
    common: Common,
    /// Use a saved codebook instead of designing one.
    #[arg(long)]
    codebook: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "modulated")]
    modulation: ModulationArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModulationArg {
    Modulated,
    Unmodulated,
}

impl From<ModulationArg> for Modulation {
    fn from(m: ModulationArg) -> Self {
        match m {
            ModulationArg::Modulated => Modulation::Modulated,
            ModulationArg::Unmodulated => Modulation::Unmodulated,
        }
    }
}

fn prepare(common: &Common) -> Result<ScenarioConfig> {
    let mut config = match &common.config {
        Some(path) => load_config(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    config.validate()?;
    std::fs::create_dir_all(&common.out).with_context(|| format!("creating {}", common.out.display()))?;
    Ok(config)
}

fn codebook(config: &ScenarioConfig, staged: &Staged) -> Result<Codebook> {
    match &staged.codebook {
        Some(path) => Ok(load_codebook(path)?),
        None => Ok(design_beams(config)?.0),
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn design_beams_cmd(common: &Common) -> Result<()> {
    let config = prepare(common)?;
    let (codebook, _) = design_beams(&config)?;
    save_codebook(&codebook, &common.out.join("codebook.toml"))?;
    for (k, d) in codebook.diagnostics.iter().enumerate() {
        println!(
            "h{}: PSL {:.2} dB, comm level {:.2} dB, {} iterations{}",
            k + 1,
            d.psl_db,
            d.comm_level_db,
            d.iterations,
            if d.converged { "" } else { " (not converged)" }
        );
    }
    println!("wrote {}", common.out.join("codebook.toml").display());
    Ok(())
}

fn build_clutter_cmd(staged: &Staged) -> Result<()> {
    let config = prepare(&staged.common)?;
    let codebook = codebook(&config, staged)?;
    let (train, _) = pulse_train(&config, &codebook, config.pulses, staged.modulation.into())?;
    let rc = clutter_for(&config, &codebook, &train)?;
    let path = staged.common.out.join("clutter_covariance.csv");
    rc.write_csv(&path)?;
    println!(
        "N = {}, trace {:.6e}, min eigenvalue {:.3e}; wrote {}",
        rc.dim(),
        rc.trace(),
        rc.min_eigenvalue(),
        path.display()
    );
    Ok(())
}

fn design_filter_cmd(staged: &Staged) -> Result<()> {
    let config = prepare(&staged.common)?;
    let codebook = codebook(&config, staged)?;
    let (_, problem) = default_filter_problem(&config, &codebook, staged.modulation.into())?;
    let wiener = wiener_filter(&problem)?;
    let robust = design_robust_filter_with(&problem, &radcom_conic::InteriorPoint::default(), &config.robust_options())?;
    let mut csv = String::from("element,wiener_re,wiener_im,robust_re,robust_im\n");
    for (n, (a, b)) in wiener.w.iter().zip(robust.w.iter()).enumerate() {
        let _ = writeln!(csv, "{},{},{},{},{}", n + 1, a.re, a.im, b.re, b.im);
    }
    let path = staged.common.out.join("filters.csv");
    write(&path, &csv)?;
    let m = &robust.metadata;
    println!("wiener worst-case SINR {:.3} dB", wiener.worst_case_sinr_db);
    println!(
        "robust worst-case SINR {:.3} dB (relaxation bound {:.3} dB, synthesis {}, ||w - w0||^2 = {:.4})",
        robust.worst_case_sinr_db,
        m.relaxation_bound.map(radcom_core::scalar::db_from_power).unwrap_or(f64::NAN),
        m.path.as_str(),
        m.similarity.unwrap_or(0.0)
    );
    println!("wrote {}", path.display());
    Ok(())
}

fn sweep_sinr_cmd(staged: &Staged) -> Result<()> {
    let config = prepare(&staged.common)?;
    let codebook = codebook(&config, staged)?;
    let modulation: Modulation = staged.modulation.into();
    let (_, problem) = default_filter_problem(&config, &codebook, modulation)?;
    let wiener = wiener_filter(&problem)?;
    let robust = design_robust_filter_with(&problem, &radcom_conic::InteriorPoint::default(), &config.robust_options())?;
    let model = problem.sinr_model()?;
    let iv = config.doppler.interval;
    let grid = linspace(iv[0], iv[1], config.doppler.curve_points);
    let mut csv = String::from("psi,sinr_db,filter_id\n");
    for f in [&wiener, &robust] {
        let curve = model.curve(&f.w, &grid, &format!("{}-{}", f.kind.as_str(), modulation.as_str()))?;
        println!(
            "{}: min {:.3} dB, peak-to-trough {:.3} dB",
            curve.filter_id,
            curve.min(),
            curve.peak_to_trough()
        );
        csv.push_str(&curve.csv_rows());
    }
    let path = staged.common.out.join("sinr.csv");
    write(&path, &csv)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn run_experiment_cmd(common: &Common, which: &str) -> Result<bool> {
    let config = prepare(common)?;
    let which: Which = which.parse()?;
    let report = harness::run_experiment(&config, which, &common.out)?;
    for f in &report.figures {
        if f.failures.is_empty() {
            println!("{}: ok ({})", f.figure.as_str(), f.dir.display());
        } else {
            println!("{}: {} failure(s) ({})", f.figure.as_str(), f.failures.len(), f.dir.display());
            for msg in &f.failures {
                println!("  {msg}");
            }
        }
    }
    Ok(report.all_ok())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::DesignBeams(c) => design_beams_cmd(c).map(|_| true),
        Command::BuildClutter(s) => build_clutter_cmd(s).map(|_| true),
        Command::DesignFilter(s) => design_filter_cmd(s).map(|_| true),
        Command::SweepSinr(s) => sweep_sinr_cmd(s).map(|_| true),
        Command::RunExperiment { common, which } => run_experiment_cmd(common, which),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
