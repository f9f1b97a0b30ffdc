//! Figure experiments: each writes CSV data, a manifest and a plotting script into its
//! own directory under the output root.
//!
//! | figure | content |
//! |--------|---------|
//! | fig2 | beampattern of every codebook vector |
//! | fig3 | per-element modulus of every codebook vector |
//! | fig4 | SINR over Ω for each pulse count |
//! | fig5 | SINR for each interval of interest |
//! | fig6 | SINR for each similarity budget |
//!
//! Filter curves are labelled `{wiener|robust}-{modulated|unmodulated}`. The
//! unmodulated baseline sends the first codebook vector on every pulse.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::admm::{BeamDesign, Codebook};
use crate::error::{Error, Result};
use crate::eval::SinrCurve;
use crate::robust::{design_robust_filter_with, wiener_filter, DopplerFilter};
use crate::scalar::{db_from_power, deg_to_u};
use crate::steering::beampattern_gain;

use super::codebook_io::save_codebook;
use super::config::{linspace, ScenarioConfig};
use super::scenario::{clutter_for, design_beams, filter_problem, pulse_train, Modulation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
}

impl Figure {
    pub const ALL: [Figure; 5] = [Figure::Fig2, Figure::Fig3, Figure::Fig4, Figure::Fig5, Figure::Fig6];

    pub fn as_str(self) -> &'static str {
        match self {
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
            Figure::Fig6 => "fig6",
        }
    }
}

/// Selection of figures for [`run_experiment`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    One(Figure),
    All,
}

impl Which {
    pub fn figures(self) -> Vec<Figure> {
        match self {
            Which::One(f) => vec![f],
            Which::All => Figure::ALL.to_vec(),
        }
    }
}

impl FromStr for Which {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "all" {
            return Ok(Which::All);
        }
        Figure::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .map(Which::One)
            .ok_or_else(|| Error::Domain(format!("unknown experiment `{s}`; expected fig2..fig6 or all")))
    }
}

/// Per-vector record in a fig2/fig3 manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamRecord {
    pub vector: usize,
    pub delta_magnitude: f64,
    pub delta_phase_deg: f64,
    pub psl_db: f64,
    pub psl_db_pre_projection: f64,
    pub comm_level_db: f64,
    pub mainlobe_residual: f64,
    pub modulus_error_pre_projection: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Per-design record in a fig4..fig6 manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobRecord {
    pub job: String,
    pub modulation: String,
    pub pulses: usize,
    pub interval: [f64; 2],
    pub xi: f64,
    pub wiener_worst_db: Option<f64>,
    pub robust_worst_db: Option<f64>,
    pub relaxation_bound_db: Option<f64>,
    pub synthesis: Option<String>,
    pub rank: Option<usize>,
    pub similarity: Option<f64>,
    pub identity_error: Option<f64>,
    pub solver_iterations: Option<usize>,
    pub solver_status: Option<String>,
    pub error: Option<String>,
}

/// Written as `manifest.toml` in every figure directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub figure: String,
    /// `ok` or `failed`.
    pub status: String,
    pub seed: u64,
    pub unmodulated_baseline: String,
    pub files: Vec<String>,
    pub failures: Vec<String>,
    #[serde(default)]
    pub beams: Vec<BeamRecord>,
    #[serde(default)]
    pub jobs: Vec<JobRecord>,
    pub config: ScenarioConfig,
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    toml::from_str(&text).map_err(|e| Error::Parse {
        file: path.to_path_buf(),
        message: e.to_string(),
    })
}

#[derive(Debug, Clone)]
pub struct FigureReport {
    pub figure: Figure,
    pub dir: PathBuf,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub root: PathBuf,
    pub figures: Vec<FigureReport>,
}

impl ExperimentReport {
    pub fn all_ok(&self) -> bool {
        self.figures.iter().all(|f| f.failures.is_empty())
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Runs the selected figures. Design failures of individual filters are recorded in
/// the manifests and the report rather than aborting the run.
pub fn run_experiment(config: &ScenarioConfig, which: Which, out: &Path) -> Result<ExperimentReport> {
    config.validate()?;
    create_dir(out)?;
    let (codebook, designs) = design_beams(config)?;
    save_codebook(&codebook, &out.join("codebook.toml"))?;

    let mut figures = Vec::new();
    for figure in which.figures() {
        let dir = out.join(figure.as_str());
        create_dir(&dir)?;
        let (files, beams, jobs, failures) = match figure {
            Figure::Fig2 => {
                let (files, beams) = beampattern_figure(config, &codebook, &dir)?;
                (files, beams, Vec::new(), Vec::new())
            }
            Figure::Fig3 => {
                let (files, beams) = modulus_figure(&codebook, &designs, &dir)?;
                (files, beams, Vec::new(), Vec::new())
            }
            Figure::Fig4 | Figure::Fig5 | Figure::Fig6 => {
                let (files, jobs, failures) = filter_figure(config, &codebook, figure, &dir)?;
                (files, Vec::new(), jobs, failures)
            }
        };
        let manifest = Manifest {
            figure: figure.as_str().into(),
            status: if failures.is_empty() { "ok" } else { "failed" }.into(),
            seed: config.seed,
            unmodulated_baseline: "every pulse uses the first codebook vector".into(),
            files,
            failures: failures.clone(),
            beams,
            jobs,
            config: config.clone(),
        };
        let text = toml::to_string(&manifest).map_err(|e| Error::Parse {
            file: dir.join("manifest.toml"),
            message: e.to_string(),
        })?;
        write(&dir.join("manifest.toml"), &text)?;
        write(&dir.join("plot.py"), plot_script(figure))?;
        figures.push(FigureReport { figure, dir, failures });
    }
    Ok(ExperimentReport {
        root: out.to_path_buf(),
        figures,
    })
}

fn beam_records(codebook: &Codebook<f64>) -> Vec<BeamRecord> {
    codebook
        .diagnostics
        .iter()
        .zip(&codebook.deltas)
        .enumerate()
        .map(|(k, (d, delta))| BeamRecord {
            vector: k + 1,
            delta_magnitude: delta.norm(),
            delta_phase_deg: delta.arg().to_degrees(),
            psl_db: d.psl_db,
            psl_db_pre_projection: d.psl_db_pre_projection,
            comm_level_db: d.comm_level_db,
            mainlobe_residual: d.mainlobe_residual,
            modulus_error_pre_projection: d.modulus_error_pre_projection,
            iterations: d.iterations,
            converged: d.converged,
        })
        .collect()
}

/// Beampattern `20·log10|h^H a(θ)| - 20·log10 g` over [-90°, 90°], one file per vector.
fn beampattern_figure(
    config: &ScenarioConfig,
    codebook: &Codebook<f64>,
    dir: &Path,
) -> Result<(Vec<String>, Vec<BeamRecord>)> {
    let step = config.experiment.beampattern_step_deg;
    let count = (180.0 / step).round() as usize + 1;
    let angles = linspace(-90.0, 90.0, count);
    let g = config.beams.mainlobe_gain;
    let mut files = Vec::new();
    for (k, h) in codebook.vectors.iter().enumerate() {
        let mut csv = String::from("angle_deg,power_db\n");
        for &theta in &angles {
            let gain = beampattern_gain(h, &codebook.geometry, deg_to_u(theta))?;
            let _ = writeln!(csv, "{theta},{}", db_from_power(gain.norm_sqr() / (g * g)));
        }
        let name = format!("beampattern_h{}.csv", k + 1);
        write(&dir.join(&name), &csv)?;
        files.push(name);
    }
    let records = beam_records(codebook);
    let mut summary = String::from("vector,delta_magnitude,psl_db,psl_db_pre_projection,comm_level_db,mainlobe_residual,iterations,converged\n");
    for r in &records {
        let _ = writeln!(
            summary,
            "{},{},{},{},{},{},{},{}",
            r.vector,
            r.delta_magnitude,
            r.psl_db,
            r.psl_db_pre_projection,
            r.comm_level_db,
            r.mainlobe_residual,
            r.iterations,
            r.converged
        );
    }
    write(&dir.join("summary.csv"), &summary)?;
    files.push("summary.csv".into());
    Ok((files, records))
}

fn modulus_figure(
    codebook: &Codebook<f64>,
    designs: &[BeamDesign<f64>],
    dir: &Path,
) -> Result<(Vec<String>, Vec<BeamRecord>)> {
    let mut csv = String::from("vector,element,modulus,modulus_pre_projection\n");
    for (k, d) in designs.iter().enumerate() {
        for (m, (h, raw)) in d.h.iter().zip(d.h_raw.iter()).enumerate() {
            let _ = writeln!(csv, "{},{},{},{}", k + 1, m + 1, h.norm(), raw.norm());
        }
    }
    write(&dir.join("modulus.csv"), &csv)?;
    Ok((vec!["modulus.csv".into()], beam_records(codebook)))
}

struct FilterJob {
    label: String,
    pulses: usize,
    interval: [f64; 2],
    xi: f64,
}

fn jobs_for(config: &ScenarioConfig, figure: Figure) -> Vec<FilterJob> {
    let e = &config.experiment;
    match figure {
        Figure::Fig4 => e
            .pulse_counts
            .iter()
            .map(|&n| FilterJob {
                label: format!("n{n}"),
                pulses: n,
                interval: config.doppler.interval,
                xi: config.filter.xi,
            })
            .collect(),
        Figure::Fig5 => e
            .intervals
            .iter()
            .enumerate()
            .map(|(i, &iv)| FilterJob {
                label: format!("interval{}", i + 1),
                pulses: config.pulses,
                interval: iv,
                xi: config.filter.xi,
            })
            .collect(),
        Figure::Fig6 => e
            .xis
            .iter()
            .enumerate()
            .map(|(i, &xi)| FilterJob {
                label: format!("xi{}", i + 1),
                pulses: config.pulses,
                interval: config.doppler.interval,
                xi,
            })
            .collect(),
        Figure::Fig2 | Figure::Fig3 => Vec::new(),
    }
}

struct JobOutcome {
    record: JobRecord,
    curves: Vec<SinrCurve<f64>>,
}

fn run_job(config: &ScenarioConfig, codebook: &Codebook<f64>, job: &FilterJob, modulation: Modulation) -> JobOutcome {
    let mut record = JobRecord {
        job: job.label.clone(),
        modulation: modulation.as_str().into(),
        pulses: job.pulses,
        interval: job.interval,
        xi: job.xi,
        wiener_worst_db: None,
        robust_worst_db: None,
        relaxation_bound_db: None,
        synthesis: None,
        rank: None,
        similarity: None,
        identity_error: None,
        solver_iterations: None,
        solver_status: None,
        error: None,
    };
    let mut curves = Vec::new();
    let result = (|| -> Result<()> {
        let (train, s) = pulse_train(config, codebook, job.pulses, modulation)?;
        let clutter = clutter_for(config, codebook, &train)?;
        let problem = filter_problem(config, s, clutter, job.interval, job.xi);
        let model = problem.sinr_model()?;
        let grid = linspace(job.interval[0], job.interval[1], config.doppler.curve_points);
        let curve = |f: &DopplerFilter<f64>| model.curve(&f.w, &grid, &format!("{}-{}", f.kind.as_str(), modulation.as_str()));

        let wiener = wiener_filter(&problem)?;
        record.wiener_worst_db = Some(wiener.worst_case_sinr_db);
        curves.push(curve(&wiener)?);

        let robust = design_robust_filter_with(&problem, &radcom_conic::InteriorPoint::default(), &config.robust_options())?;
        let m = &robust.metadata;
        record.robust_worst_db = Some(robust.worst_case_sinr_db);
        record.relaxation_bound_db = m.relaxation_bound.map(db_from_power);
        record.synthesis = Some(m.path.as_str().into());
        record.rank = m.rank;
        record.similarity = m.similarity;
        record.identity_error = m.identity_error;
        record.solver_iterations = m.solver_iterations;
        record.solver_status = m.solver_status.clone();
        curves.push(curve(&robust)?);
        Ok(())
    })();
    if let Err(e) = result {
        record.error = Some(e.to_string());
    }
    JobOutcome { record, curves }
}

fn filter_figure(
    config: &ScenarioConfig,
    codebook: &Codebook<f64>,
    figure: Figure,
    dir: &Path,
) -> Result<(Vec<String>, Vec<JobRecord>, Vec<String>)> {
    let jobs = jobs_for(config, figure);
    let tasks: Vec<(&FilterJob, Modulation)> = jobs
        .iter()
        .flat_map(|j| Modulation::BOTH.into_iter().map(move |m| (j, m)))
        .collect();
    let outcomes: Vec<JobOutcome> = tasks
        .par_iter()
        .map(|&(job, modulation)| run_job(config, codebook, job, modulation))
        .collect();

    let mut files = Vec::new();
    for job in &jobs {
        let mut csv = String::from("psi,sinr_db,filter_id\n");
        for o in outcomes.iter().filter(|o| o.record.job == job.label) {
            for c in &o.curves {
                csv.push_str(&c.csv_rows());
            }
        }
        let name = format!("sinr_{}.csv", job.label);
        write(&dir.join(&name), &csv)?;
        files.push(name);
    }

    let mut summary = String::from(
        "job,modulation,pulses,interval_lo,interval_hi,xi,filter,worst_case_db,curve_min_db,peak_to_trough_db,relaxation_bound_db,synthesis\n",
    );
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    for o in &outcomes {
        let r = &o.record;
        for c in &o.curves {
            let robust = c.filter_id.starts_with("robust");
            let worst = if robust { r.robust_worst_db } else { r.wiener_worst_db };
            let _ = writeln!(
                summary,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                r.job,
                r.modulation,
                r.pulses,
                r.interval[0],
                r.interval[1],
                r.xi,
                c.filter_id,
                opt(worst),
                c.min(),
                c.peak_to_trough(),
                if robust { opt(r.relaxation_bound_db) } else { String::new() },
                if robust { r.synthesis.clone().unwrap_or_default() } else { "reference".into() },
            );
        }
    }
    write(&dir.join("summary.csv"), &summary)?;
    files.push("summary.csv".into());

    let records: Vec<JobRecord> = outcomes.into_iter().map(|o| o.record).collect();
    let failures = records
        .iter()
        .filter_map(|r| r.error.as_ref().map(|e| format!("{} ({}): {e}", r.job, r.modulation)))
        .collect();
    Ok((files, records, failures))
}

const PLOT_BEAMPATTERN: &str = r#"import csv, glob, os
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
for path in sorted(glob.glob(os.path.join(here, "beampattern_h*.csv"))):
    with open(path) as f:
        rows = list(csv.DictReader(f))
    name = os.path.basename(path)[len("beampattern_"):-4]
    plt.plot([float(r["angle_deg"]) for r in rows], [float(r["power_db"]) for r in rows], label=name)
plt.ylim(-50, 5)
plt.xlabel("angle (deg)")
plt.ylabel("beampattern (dB)")
plt.legend()
plt.grid(True)
plt.savefig(os.path.join(here, "beampattern.png"), dpi=150)
"#;

const PLOT_MODULUS: &str = r#"import csv, os
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
with open(os.path.join(here, "modulus.csv")) as f:
    rows = list(csv.DictReader(f))
for v in sorted({r["vector"] for r in rows}):
    sel = [r for r in rows if r["vector"] == v]
    plt.plot([int(r["element"]) for r in sel], [float(r["modulus"]) for r in sel], "o-", label=f"h{v}")
    plt.plot([int(r["element"]) for r in sel], [float(r["modulus_pre_projection"]) for r in sel], "x--", label=f"h{v} before projection")
plt.ylim(0, 1.5)
plt.xlabel("element")
plt.ylabel("modulus")
plt.legend()
plt.grid(True)
plt.savefig(os.path.join(here, "modulus.png"), dpi=150)
"#;

const PLOT_SINR: &str = r#"import csv, glob, os
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
paths = sorted(glob.glob(os.path.join(here, "sinr_*.csv")))
fig, axes = plt.subplots(1, len(paths), figsize=(5 * len(paths), 4), squeeze=False)
for ax, path in zip(axes[0], paths):
    with open(path) as f:
        rows = list(csv.DictReader(f))
    for fid in dict.fromkeys(r["filter_id"] for r in rows):
        sel = [r for r in rows if r["filter_id"] == fid]
        ax.plot([float(r["psi"]) for r in sel], [float(r["sinr_db"]) for r in sel], label=fid)
    ax.set_title(os.path.basename(path)[5:-4])
    ax.set_xlabel("normalized Doppler")
    ax.set_ylabel("SINR (dB)")
    ax.grid(True)
    ax.legend(fontsize="small")
fig.tight_layout()
fig.savefig(os.path.join(here, "sinr.png"), dpi=150)
"#;

fn plot_script(figure: Figure) -> &'static str {
    match figure {
        Figure::Fig2 => PLOT_BEAMPATTERN,
        Figure::Fig3 => PLOT_MODULUS,
        Figure::Fig4 | Figure::Fig5 | Figure::Fig6 => PLOT_SINR,
    }
}
