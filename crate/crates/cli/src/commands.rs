//! The four subcommands. Each returns the process exit code on success and
//! a [`CliError`] when nothing useful could be written.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use wavetrace::analysis::{
    compare_station, drift_summary, envelope_errors, first_gathering, DriftSummary, Gathering, GatheringKind,
    StationComparison,
};
use wavetrace::oracle::envelope::MAX_PARAXIAL_EPSILON;
use wavetrace::oracle::{density_histogram, paraxial_propagate, Density};
use wavetrace::{run, Crossing, LaunchProfile, Medium, Retirement, RunStatus, SimConfig, TrajectorySet};

use crate::artifacts::{self, Outputs};
use crate::config::{with_epsilon, Figure, PlotKind, RunFile};
use crate::error::CliError;
use crate::figures;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_COLLAPSE: i32 = 3;
pub const EXIT_TOLERANCE: i32 = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub status: RunStatus,
    pub steps: usize,
    pub n_rays: usize,
    pub alive_at_end: usize,
    pub zeta_extent: f64,
    pub crossings: usize,
    pub crossing_events: Vec<Crossing>,
    pub retirements: Vec<Retirement>,
    pub drift: DriftSummary,
    pub first_gathering: Option<Gathering>,
    pub density_stations: Vec<f64>,
    /// Requested stations fewer than two rays reached.
    pub skipped_stations: Vec<f64>,
}

impl RunReport {
    pub fn new(traj: &TrajectorySet, density_stations: Vec<f64>, skipped_stations: Vec<f64>) -> Self {
        let alive_at_end = traj.samples.len() - traj.retirements.len();
        Self {
            status: traj.status,
            steps: traj.steps,
            n_rays: traj.samples.len(),
            alive_at_end,
            zeta_extent: traj.zeta_extent(),
            crossings: traj.crossings.len(),
            crossing_events: traj.crossings.clone(),
            retirements: traj.retirements.clone(),
            drift: drift_summary(traj),
            first_gathering: first_gathering(traj),
            density_stations,
            skipped_stations,
        }
    }
}

/// Densities at every requested station the run reached.
fn densities(traj: &TrajectorySet, file: &RunFile) -> Result<(Vec<Density>, Vec<f64>), CliError> {
    let extent = traj.zeta_extent();
    let mut done = Vec::new();
    let mut skipped = Vec::new();
    for &z in &file.outputs.density_stations {
        if !(z >= 0.0 && z <= extent) {
            skipped.push(z);
            continue;
        }
        match density_histogram(traj, z, file.outputs.density_bins, file.outputs.density_weighting, None) {
            Ok(d) => done.push(d),
            Err(wavetrace::Error::Range { .. }) => skipped.push(z),
            Err(e) => return Err(e.into()),
        }
    }
    Ok((done, skipped))
}

/// Write the artifacts of one run into `out`, without the manifest.
fn write_run(traj: &TrajectorySet, file: &RunFile, cfg: &SimConfig, out: &mut Outputs) -> Result<RunReport, CliError> {
    out.text("trajectories.csv", "trajectories", &artifacts::trajectories_csv(traj))?;
    let (dens, skipped) = densities(traj, file)?;
    if !dens.is_empty() {
        out.text("density.csv", "density", &artifacts::density_csv(&dens))?;
    }
    for kind in &file.outputs.figures {
        let svg = match kind {
            PlotKind::Trajectories => figures::trajectories(traj, "Trajectory pattern"),
            PlotKind::Density => {
                let station =
                    file.figure.as_ref().and_then(|f| f.station).unwrap_or(cfg.zeta_max).min(traj.zeta_extent());
                match density_histogram(traj, station, file.outputs.density_bins, file.outputs.density_weighting, None)
                {
                    Ok(d) => figures::density(&d),
                    // A collapsed run may leave a single ray at its far end.
                    Err(e @ wavetrace::Error::Range { .. }) => {
                        eprintln!("wavetrace: density figure skipped: {e}");
                        continue;
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            PlotKind::Profiles | PlotKind::LaunchG => {
                let fig = figure_or_default(file, *kind)?;
                figures::curves_chart(&fig, &figures::curves(&fig, cfg.r_floor)?).1
            }
        };
        out.text(&format!("{}.svg", kind.name()), "figure", &svg)?;
    }
    let report = RunReport::new(traj, dens.iter().map(|d| d.zeta).collect(), skipped);
    out.json("report.json", "report", &report)?;
    Ok(report)
}

fn status_code(status: RunStatus) -> i32 {
    match status {
        RunStatus::FrontCollapse => EXIT_COLLAPSE,
        RunStatus::Completed | RunStatus::TauLimit => EXIT_OK,
    }
}

pub fn simulate(file: &RunFile, out_dir: &Path) -> Result<i32, CliError> {
    let cfg = file.sim_config()?;
    let start = Instant::now();
    let traj = run(&cfg)?;
    let mut out = Outputs::new(out_dir);
    let report = write_run(&traj, file, &cfg, &mut out)?;
    out.finish("simulate", Some(file.hash()), start.elapsed().as_secs_f64())?;
    eprintln!(
        "simulate: {:?}, {} steps, {} crossings, max H drift {:e}",
        report.status, report.steps, report.crossings, report.drift.max_h_drift
    );
    Ok(status_code(report.status))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeCheck {
    pub max_xi0: f64,
    pub tolerance: f64,
    /// Largest relative error per station.
    pub stations: Vec<(f64, f64)>,
    pub max_error: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StraightCheck {
    pub tolerance: f64,
    pub max_deviation: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub status: RunStatus,
    pub first_gathering: Option<Gathering>,
    pub stations: Vec<StationComparison>,
    /// Requested stations fewer than two rays reached. each counts as a failure.
    pub missing_stations: Vec<f64>,
    pub peaks_pass: bool,
    pub envelope: Option<EnvelopeCheck>,
    pub straight: Option<StraightCheck>,
    pub pass: bool,
}

fn is_uniform(profile: &LaunchProfile) -> bool {
    match profile {
        LaunchProfile::Tabulated(t) => {
            let mut ys = t.knots().map(|k| k.1);
            let first = ys.next();
            ys.all(|y| Some(y) == first)
        }
        _ => false,
    }
}

pub fn compare(file: &RunFile, out_dir: &Path) -> Result<i32, CliError> {
    let cfg = file.sim_config()?;
    let start = Instant::now();
    let traj = run(&cfg)?;
    let extent = traj.zeta_extent();
    let (reached, missing): (Vec<f64>, Vec<f64>) =
        file.oracle.stations.iter().partition(|z| **z >= 0.0 && **z <= extent);

    let grid = file.paraxial_grid(&cfg);
    let slices = paraxial_propagate(&cfg.profile, grid, &reached, file.oracle.d_zeta)?;
    let stations =
        slices.iter().map(|s| compare_station(&traj, s, file.oracle.bins)).collect::<wavetrace::Result<Vec<_>>>()?;
    let peaks_pass = missing.is_empty() && stations.iter().all(|s| s.agree);

    let envelope = match (cfg.profile.clone(), &cfg.medium) {
        (LaunchProfile::Gaussian { epsilon }, Medium::Vacuum) if epsilon <= MAX_PARAXIAL_EPSILON => {
            let mut at: Vec<f64> = reached.clone();
            if cfg.zeta_max <= extent && !at.contains(&cfg.zeta_max) {
                at.push(cfg.zeta_max);
            }
            let mut per = Vec::new();
            for z in at {
                let errs = envelope_errors(&traj, z, epsilon, file.oracle.envelope_max_xi0)?;
                per.push((z, errs.iter().map(|e| e.1).fold(0.0, f64::max)));
            }
            let max_error = per.iter().map(|p| p.1).fold(0.0, f64::max);
            Some(EnvelopeCheck {
                max_xi0: file.oracle.envelope_max_xi0,
                tolerance: file.oracle.envelope_tolerance,
                stations: per,
                max_error,
                pass: max_error <= file.oracle.envelope_tolerance,
            })
        }
        _ => None,
    };
    let straight = is_uniform(&cfg.profile).then(|| {
        let max_deviation = traj.samples.iter().flatten().map(|r| (r.xi - r.xi0).abs()).fold(0.0, f64::max);
        StraightCheck {
            tolerance: file.oracle.straight_tolerance,
            max_deviation,
            pass: max_deviation <= file.oracle.straight_tolerance,
        }
    });
    let pass = peaks_pass && envelope.as_ref().is_none_or(|e| e.pass) && straight.as_ref().is_none_or(|s| s.pass);
    let report = CompareReport {
        status: traj.status,
        first_gathering: first_gathering(&traj),
        stations,
        missing_stations: missing,
        peaks_pass,
        envelope,
        straight,
        pass,
    };

    let mut out = Outputs::new(out_dir);
    out.text("slices.csv", "slices", &artifacts::slices_csv(&slices))?;
    out.json("compare.json", "report", &report)?;
    out.finish("compare", Some(file.hash()), start.elapsed().as_secs_f64())?;
    eprintln!("compare: {}", if pass { "PASS" } else { "FAIL" });
    Ok(if pass { EXIT_OK } else { EXIT_TOLERANCE })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub epsilon: f64,
    pub dir: String,
    pub status: Option<RunStatus>,
    pub steps: usize,
    pub crossings: usize,
    pub first_gathering_zeta: Option<f64>,
    pub first_gathering_kind: Option<GatheringKind>,
    pub max_h_drift: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub points: Vec<SweepPoint>,
    /// First-gathering ζ strictly decreasing in ε; `None` when some point
    /// did not gather.
    pub gathering_decreasing_in_epsilon: Option<bool>,
}

pub fn point_dir(eps: f64) -> String {
    format!("eps_{}", artifacts::num(eps))
}

fn sweep_point(file: &RunFile, eps: f64, out_dir: &Path) -> SweepPoint {
    let dir = point_dir(eps);
    let mut point = SweepPoint {
        epsilon: eps,
        dir: dir.clone(),
        status: None,
        steps: 0,
        crossings: 0,
        first_gathering_zeta: None,
        first_gathering_kind: None,
        max_h_drift: None,
        error: None,
    };
    let result = (|| -> Result<RunReport, CliError> {
        let mut f = file.clone();
        f.profile = Some(with_epsilon(file.profile()?, eps)?);
        f.sweep = None;
        let cfg = f.sim_config()?;
        let start = Instant::now();
        let traj = run(&cfg)?;
        let mut out = Outputs::new(&out_dir.join(&dir));
        let report = write_run(&traj, &f, &cfg, &mut out)?;
        out.finish("simulate", Some(f.hash()), start.elapsed().as_secs_f64())?;
        Ok(report)
    })();
    match result {
        Ok(r) => {
            point.status = Some(r.status);
            point.steps = r.steps;
            point.crossings = r.crossings;
            point.first_gathering_zeta = r.first_gathering.map(|g| g.zeta);
            point.first_gathering_kind = r.first_gathering.map(|g| g.kind);
            point.max_h_drift = Some(r.drift.max_h_drift);
        }
        Err(e) => point.error = Some(e.to_string()),
    }
    point
}

fn opt(x: Option<f64>) -> String {
    x.map(artifacts::num).unwrap_or_default()
}

pub fn summary_csv(points: &[SweepPoint]) -> String {
    let mut s =
        String::from("epsilon,status,steps,crossings,first_gathering_zeta,first_gathering_kind,max_h_drift,error\n");
    for p in points {
        let status = p.status.map(|s| format!("{s:?}")).unwrap_or_default();
        let kind = p.first_gathering_kind.map(|k| format!("{k:?}")).unwrap_or_default();
        let error = p.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
        s.push_str(&format!(
            "{},{status},{},{},{},{kind},{},{error}\n",
            artifacts::num(p.epsilon),
            p.steps,
            p.crossings,
            opt(p.first_gathering_zeta),
            opt(p.max_h_drift)
        ));
    }
    s
}

/// Strictly decreasing first-gathering ζ over points sorted by ε.
pub fn decreasing(points: &[SweepPoint]) -> Option<bool> {
    let z: Option<Vec<f64>> = points.iter().map(|p| p.first_gathering_zeta).collect();
    z.map(|z| z.windows(2).all(|w| w[1] < w[0]))
}

pub fn sweep(file: &RunFile, out_dir: &Path, jobs: Option<usize>) -> Result<i32, CliError> {
    let section = file.sweep.as_ref().ok_or_else(|| CliError::Config("sweep needs a [sweep] section".into()))?;
    let mut eps = section.epsilon.clone();
    eps.sort_by(f64::total_cmp);
    eps.dedup();
    for &e in &eps {
        with_epsilon(file.profile()?, e)?;
    }
    let start = Instant::now();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
    let points: Vec<SweepPoint> = pool.install(|| eps.par_iter().map(|&e| sweep_point(file, e, out_dir)).collect());

    let report = SweepReport { gathering_decreasing_in_epsilon: decreasing(&points), points };
    let mut out = Outputs::new(out_dir);
    for p in report.points.iter().filter(|p| p.error.is_none()) {
        out.record(&format!("{}/manifest.json", p.dir), "point");
    }
    out.text("summary.csv", "summary", &summary_csv(&report.points))?;
    out.json("report.json", "report", &report)?;
    out.finish("sweep", Some(file.hash()), start.elapsed().as_secs_f64())?;
    match report.gathering_decreasing_in_epsilon {
        Some(true) => eprintln!("sweep: first-gathering zeta strictly decreasing in epsilon"),
        Some(false) => eprintln!("sweep: first-gathering zeta NOT strictly decreasing in epsilon"),
        None => eprintln!("sweep: some points did not gather; monotonicity undetermined"),
    }
    let failed = report.points.iter().filter(|p| p.error.is_some()).count();
    if failed > 0 {
        eprintln!("sweep: {failed} of {} points failed", report.points.len());
        return Ok(1);
    }
    Ok(EXIT_OK)
}

/// The figure section, or one of `kind` built from the run's profile.
fn figure_or_default(file: &RunFile, kind: PlotKind) -> Result<Figure, CliError> {
    match &file.figure {
        Some(f) if f.kind == kind => Ok(f.clone()),
        _ => Ok(Figure {
            kind,
            name: None,
            profiles: vec![file.profile()?.clone()],
            xi_range: (-30.0, 30.0),
            samples: 601,
            station: None,
        }),
    }
}

/// `plot --config`: the figure described by the config's `[figure]`.
pub fn plot_config(file: &RunFile, out_dir: &Path) -> Result<i32, CliError> {
    let fig = file.figure.clone().ok_or_else(|| CliError::Config("plot --config needs a [figure] section".into()))?;
    let name = fig.name.clone().unwrap_or_else(|| fig.kind.name().to_string());
    let start = Instant::now();
    let mut out = Outputs::new(out_dir);
    let mut code = EXIT_OK;
    match fig.kind {
        PlotKind::Profiles | PlotKind::LaunchG => {
            let r_floor = file.numerics.r_floor;
            let curves = figures::curves(&fig, r_floor)?;
            let (csv, svg) = figures::curves_chart(&fig, &curves);
            out.text(&format!("{name}.csv"), "figure-data", &csv)?;
            out.text(&format!("{name}.svg"), "figure", &svg)?;
        }
        PlotKind::Trajectories | PlotKind::Density => {
            let cfg = file.sim_config()?;
            let traj = run(&cfg)?;
            code = status_code(traj.status);
            let svg = if fig.kind == PlotKind::Trajectories {
                figures::trajectories(&traj, "Trajectory pattern")
            } else {
                let station = fig.station.unwrap_or(cfg.zeta_max).min(traj.zeta_extent());
                figures::density(&density_histogram(
                    &traj,
                    station,
                    file.outputs.density_bins,
                    file.outputs.density_weighting,
                    None,
                )?)
            };
            out.text(&format!("{name}.svg"), "figure", &svg)?;
        }
    }
    out.finish("plot", Some(file.hash()), start.elapsed().as_secs_f64())?;
    Ok(code)
}

/// `plot --input`: a figure of an existing artifact.
pub fn plot_artifact(input: &Path, kind: PlotKind, station: Option<f64>, out_dir: &Path) -> Result<i32, CliError> {
    let start = Instant::now();
    let svg = match kind {
        PlotKind::Trajectories => figures::trajectories(&artifacts::read_trajectories(input)?, "Trajectory pattern"),
        PlotKind::Density => figures::density(&artifacts::read_density(input, station)?),
        PlotKind::Profiles | PlotKind::LaunchG => {
            return Err(CliError::Config(format!("plot kind {} is drawn from a config, not an artifact", kind.name())))
        }
    };
    let mut out = Outputs::new(out_dir);
    out.text(&format!("{}.svg", kind.name()), "figure", &svg)?;
    out.finish("plot", None, start.elapsed().as_secs_f64())?;
    Ok(EXIT_OK)
}
