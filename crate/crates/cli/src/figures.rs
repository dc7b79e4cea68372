//! Chart builders for the four plot kinds.

use std::fmt::Write as _;

use wavetrace::oracle::Density;
use wavetrace::{LaunchProfile, TrajectorySet};

use crate::artifacts::num;
use crate::config::{Figure, PlotKind};
use crate::error::CliError;
use crate::svg::{render, Chart, Series};

/// One sampled launch curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub label: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

pub fn label(p: &LaunchProfile) -> String {
    match p {
        LaunchProfile::Gaussian { epsilon } => format!("Gaussian ε={epsilon}"),
        LaunchProfile::Algebraic { epsilon, n_exp } => format!("algebraic ε={epsilon}, N={n_exp}"),
        LaunchProfile::DualBeam { offset, base } => format!("dual ±{offset}, {}", label(base)),
        LaunchProfile::Tabulated(_) => "tabulated".to_string(),
    }
}

/// Sample positions `lo + (hi − lo)·k/(n − 1)`.
pub fn sample_positions(range: (f64, f64), n: usize) -> Vec<f64> {
    (0..n).map(|k| range.0 + (range.1 - range.0) * k as f64 / (n - 1) as f64).collect()
}

/// R or launch G of every profile of a `profiles`/`launchG` figure.
pub fn curves(fig: &Figure, r_floor: f64) -> Result<Vec<Curve>, CliError> {
    let xs = sample_positions(fig.xi_range, fig.samples);
    fig.profiles
        .iter()
        .map(|p| {
            let ys = xs
                .iter()
                .map(|&x| match fig.kind {
                    PlotKind::LaunchG => p.eval_g0(x, r_floor).map(|g| g.value),
                    _ => p.eval_r(x),
                })
                .collect::<wavetrace::Result<Vec<f64>>>()?;
            Ok(Curve { label: label(p), xs: xs.clone(), ys })
        })
        .collect()
}

/// Data table and chart for sampled curves.
pub fn curves_chart(fig: &Figure, curves: &[Curve]) -> (String, String) {
    let mut csv = String::from("curve,xi,value\n");
    for (k, c) in curves.iter().enumerate() {
        for (x, y) in c.xs.iter().zip(&c.ys) {
            let _ = writeln!(csv, "{k},{},{}", num(*x), num(*y));
        }
    }
    let (title, y_label) = match fig.kind {
        PlotKind::LaunchG => ("Launch wave potential G", "G(ξ, 0)"),
        _ => ("Launch amplitude", "R(ξ, 0)"),
    };
    let chart = Chart {
        title: title.to_string(),
        x_label: "ξ".to_string(),
        y_label: y_label.to_string(),
        series: curves
            .iter()
            .map(|c| Series {
                label: c.label.clone(),
                points: c.xs.iter().copied().zip(c.ys.iter().copied()).collect(),
            })
            .collect(),
        fan: false,
    };
    (csv, render(&chart))
}

/// One polyline per ray on the (ζ, ξ) plane.
pub fn trajectories(traj: &TrajectorySet, title: &str) -> String {
    let series = traj
        .samples
        .iter()
        .filter(|s| !s.is_empty())
        .map(|s| Series { label: String::new(), points: s.iter().map(|r| (r.zeta, r.xi)).collect() })
        .collect();
    render(&Chart { title: title.to_string(), x_label: "ζ".into(), y_label: "ξ".into(), series, fan: true })
}

pub fn density(d: &Density) -> String {
    let points = d.centers.iter().copied().zip(d.values.iter().copied()).collect();
    render(&Chart {
        title: format!("Ray density at ζ = {}", d.zeta),
        x_label: "ξ".into(),
        y_label: "density".into(),
        series: vec![Series { label: String::new(), points }],
        fan: false,
    })
}
