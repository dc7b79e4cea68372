//! Files written by the commands: CSV tables, JSON reports and the run
//! manifest. Every file goes through [`write_atomic`].

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use wavetrace::oracle::{Density, FieldSlice};
use wavetrace::{RayState, RunStatus, TrajectorySet};

use crate::error::CliError;

pub const TRAJECTORY_HEADER: &str = "ray_id,tau,xi,zeta,rho_x,rho_z,amp_R,g_val,phase,clamped";
pub const DENSITY_HEADER: &str = "zeta,bin,xi_center,density";
pub const SLICE_HEADER: &str = "zeta,xi,intensity,re_psi,im_psi";

/// Write through a temporary file in the same directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("report serialises");
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Shortest decimal form that reads back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn trajectories_csv(traj: &TrajectorySet) -> String {
    let mut out = String::from(TRAJECTORY_HEADER);
    out.push('\n');
    for s in &traj.samples {
        for r in s {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                r.ray_id,
                num(r.tau),
                num(r.xi),
                num(r.zeta),
                num(r.rho_x),
                num(r.rho_z),
                num(r.amp_r),
                num(r.g_val),
                num(r.phase),
                r.clamped
            );
        }
    }
    out
}

pub fn density_csv(densities: &[Density]) -> String {
    let mut out = String::from(DENSITY_HEADER);
    out.push('\n');
    for d in densities {
        for (k, (x, v)) in d.centers.iter().zip(&d.values).enumerate() {
            let _ = writeln!(out, "{},{k},{},{}", num(d.zeta), num(*x), num(*v));
        }
    }
    out
}

pub fn slices_csv(slices: &[FieldSlice]) -> String {
    let mut out = String::from(SLICE_HEADER);
    out.push('\n');
    for s in slices {
        for ((x, i), p) in s.xi_grid.iter().zip(&s.intensity).zip(&s.psi) {
            let _ = writeln!(out, "{},{},{},{},{}", num(s.zeta), num(*x), num(*i), num(p.re), num(p.im));
        }
    }
    out
}

fn header_matches(text: &str, header: &str, path: &Path) -> Result<(), CliError> {
    match text.lines().next() {
        Some(h) if h.trim_end() == header => Ok(()),
        _ => Err(CliError::Config(format!("{} is not a file with header `{header}`", path.display()))),
    }
}

fn field<T: std::str::FromStr>(cols: &[&str], k: usize, line: usize, path: &Path) -> Result<T, CliError> {
    cols.get(k)
        .and_then(|c| c.parse().ok())
        .ok_or_else(|| CliError::Config(format!("{}:{line}: bad value in column {}", path.display(), k + 1)))
}

/// Read back a trajectories.csv. Only the samples are restored; run-level
/// records (drift, crossings) are left empty.
pub fn read_trajectories(path: &Path) -> Result<TrajectorySet, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    header_matches(&text, TRAJECTORY_HEADER, path)?;
    let mut samples: Vec<Vec<RayState>> = Vec::new();
    for (n, line) in text.lines().enumerate().skip(1) {
        if line.is_empty() {
            continue;
        }
        let c: Vec<&str> = line.split(',').collect();
        let id: usize = field(&c, 0, n + 1, path)?;
        if samples.len() <= id {
            samples.resize(id + 1, Vec::new());
        }
        let xi: f64 = field(&c, 2, n + 1, path)?;
        let (rho_x, rho_z): (f64, f64) = (field(&c, 4, n + 1, path)?, field(&c, 5, n + 1, path)?);
        let xi0 = samples[id].first().map_or(xi, |r| r.xi0);
        samples[id].push(RayState {
            ray_id: id,
            tau: field(&c, 1, n + 1, path)?,
            xi0,
            xi,
            zeta: field(&c, 3, n + 1, path)?,
            rho_x,
            rho_z,
            theta: rho_x.atan2(rho_z),
            amp_r: field(&c, 6, n + 1, path)?,
            g_val: field(&c, 7, n + 1, path)?,
            phase: field(&c, 8, n + 1, path)?,
            clamped: field(&c, 9, n + 1, path)?,
        });
    }
    Ok(TrajectorySet {
        samples,
        drift: Vec::new(),
        crossings: Vec::new(),
        retirements: Vec::new(),
        status: RunStatus::Completed,
        steps: 0,
    })
}

/// Read back one station of a density.csv; the last station when `station`
/// is `None`.
pub fn read_density(path: &Path, station: Option<f64>) -> Result<Density, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    header_matches(&text, DENSITY_HEADER, path)?;
    let mut rows: Vec<(f64, f64, f64)> = Vec::new();
    for (n, line) in text.lines().enumerate().skip(1) {
        if line.is_empty() {
            continue;
        }
        let c: Vec<&str> = line.split(',').collect();
        rows.push((field(&c, 0, n + 1, path)?, field(&c, 2, n + 1, path)?, field(&c, 3, n + 1, path)?));
    }
    let zeta = match station {
        Some(z) => z,
        None => rows.last().map(|r| r.0).ok_or_else(|| CliError::Config(format!("{} is empty", path.display())))?,
    };
    let (centers, values): (Vec<f64>, Vec<f64>) = rows.iter().filter(|r| r.0 == zeta).map(|r| (r.1, r.2)).unzip();
    if centers.len() < 2 {
        return Err(CliError::Config(format!("{} has no station at zeta = {zeta}", path.display())));
    }
    let w = centers[1] - centers[0];
    Ok(Density { zeta, lo: centers[0] - 0.5 * w, hi: centers[centers.len() - 1] + 0.5 * w, centers, values })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputEntry {
    pub path: String,
    pub role: String,
}

/// Written last by every command. The only artifact with timestamps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub config_hash: Option<String>,
    pub outputs: Vec<OutputEntry>,
    pub created_unix_s: u64,
    pub wall_time_s: f64,
}

/// Collects written files for the manifest.
#[derive(Debug, Default)]
pub struct Outputs {
    dir: PathBuf,
    entries: Vec<OutputEntry>,
}

impl Outputs {
    pub fn new(dir: &Path) -> Self {
        Self { dir: dir.to_path_buf(), entries: Vec::new() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn text(&mut self, name: &str, role: &str, text: &str) -> Result<(), CliError> {
        write_atomic(&self.dir.join(name), text.as_bytes())?;
        self.record(name, role);
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, role: &str, value: &T) -> Result<(), CliError> {
        write_json(&self.dir.join(name), value)?;
        self.record(name, role);
        Ok(())
    }

    pub fn record(&mut self, name: &str, role: &str) {
        self.entries.push(OutputEntry { path: name.to_string(), role: role.to_string() });
    }

    pub fn entries(&self) -> &[OutputEntry] {
        &self.entries
    }

    pub fn finish(self, command: &str, config_hash: Option<String>, wall_time_s: f64) -> Result<(), CliError> {
        let created_unix_s = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        let manifest = RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config_hash,
            outputs: self.entries,
            created_unix_s,
            wall_time_s,
        };
        write_json(&self.dir.join("manifest.json"), &manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use wavetrace::{run, LaunchProfile, SimConfig};

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, -0.0, 1e-300, 123456.789, 1.0 / 3.0, f64::MAX] {
            assert_eq!(num(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn trajectories_round_trip_through_csv() {
        let mut cfg = SimConfig::new(LaunchProfile::Gaussian { epsilon: 0.1 });
        cfg.n_rays = 11;
        cfg.zeta_max = 30.0;
        let t = run(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trajectories.csv");
        write_atomic(&path, trajectories_csv(&t).as_bytes()).unwrap();
        let back = read_trajectories(&path).unwrap();
        assert_eq!(back.samples.len(), t.samples.len());
        for (a, b) in t.samples.iter().zip(&back.samples) {
            for (p, q) in a.iter().zip(b) {
                assert_eq!(
                    (p.xi, p.zeta, p.rho_x, p.rho_z, p.amp_r, p.xi0),
                    (q.xi, q.zeta, q.rho_x, q.rho_z, q.amp_r, q.xi0)
                );
            }
        }
        assert_eq!(trajectories_csv(&back), trajectories_csv(&t));
    }

    #[test]
    fn wrong_header_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        write_atomic(&path, b"a,b\n1,2\n").unwrap();
        assert!(matches!(read_trajectories(&path), Err(CliError::Config(_))));
        assert!(matches!(read_density(&path, None), Err(CliError::Config(_))));
    }

    #[test]
    fn atomic_write_leaves_no_temporaries() {
        let dir = tempfile::tempdir().unwrap();
        write_atomic(&dir.path().join("sub/a.txt"), b"x").unwrap();
        let names: Vec<_> = fs::read_dir(dir.path().join("sub")).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names, vec![std::ffi::OsString::from("a.txt")]);
    }
}
