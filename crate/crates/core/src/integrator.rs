//! Fixed-step RK4 integration of the whole front.
//!
//! Per step the loop is: front geometry, G reconstruction, dG/dσ, then one
//! RK4 step per ray with the wave force held at its pre-step value. The
//! classical force and the energy relation are evaluated at every substep.
//! |ρ| is never integrated: it follows from
//! `|ρ|² = 1 − 2 (U(ξ, ζ) − U(ξ₀, 0))`, so a vacuum run keeps |ρ| = 1 exactly.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::medium::Medium;
use crate::model::{
    BeamFront, Crossing, FieldMode, ForceMode, RayState, RetireReason, Retirement, RunStatus, SimConfig, TrajectorySet,
};
use crate::wavefront::{estimate_g, front_geometry, FrontGeometry, GField};
use crate::WAVE_COUPLING;

/// Invariant monitors after one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub step: usize,
    pub tau: f64,
    /// Max over rays of `|H − H_launch| / E`.
    pub max_h_drift: f64,
    /// Max `| |ρ| − 1 |`; only meaningful in vacuum without a frozen field.
    pub max_norm_drift: Option<f64>,
    /// Max relative change of `R̄² Δσ |ρ|` over launch-neighbour pairs.
    pub max_flux_drift: f64,
    /// Max over launch-neighbour pairs of launch gap over current gap.
    pub max_compression: f64,
    pub compression_xi: f64,
    pub compression_zeta: f64,
    pub retired: usize,
    pub crossed: usize,
}

/// Per-ray launch quantities the drift monitors compare against.
#[derive(Debug, Clone, PartialEq)]
pub struct LaunchReference {
    /// Potential energy at launch, indexed by `ray_id`.
    pub u0: Vec<f64>,
    /// Launch H, indexed by `ray_id`.
    pub h0: Vec<f64>,
    /// Launch flux of the pair `(id, id + 1)`, indexed by `id`.
    pub flux0: Vec<f64>,
    pub launch_spacing: f64,
}

impl LaunchReference {
    pub fn new(front: &BeamFront, field: &GField, cfg: &SimConfig) -> Result<Self> {
        let n = front.rays.iter().map(|r| r.ray_id + 1).max().unwrap_or(0);
        let mut u0 = vec![0.0; n];
        let mut h0 = vec![0.0; n];
        for (r, g) in front.rays.iter().zip(&field.g) {
            u0[r.ray_id] = potential(cfg, r.xi, r.zeta)?;
            h0[r.ray_id] = hamiltonian(cfg, r, *g)?;
        }
        let mut flux0 = vec![0.0; n];
        for w in front.rays.windows(2) {
            flux0[w[0].ray_id] = pair_flux(&w[0], &w[1], w[1].xi - w[0].xi);
        }
        Ok(Self { u0, h0, flux0, launch_spacing: cfg.launch_spacing() })
    }
}

/// `−∇` of the classical potential at (ξ, ζ).
pub fn classical_force(medium: &Medium, xi: f64, zeta: f64) -> Result<[f64; 2]> {
    medium.force(xi, zeta)
}

/// Potential entering the energy relation: the medium's, plus the launch
/// wave potential when it is frozen.
fn potential(cfg: &SimConfig, xi: f64, zeta: f64) -> Result<f64> {
    let mut u = cfg.medium.potential(xi, zeta)?;
    if cfg.field_mode == FieldMode::FrozenLaunch {
        u -= WAVE_COUPLING * cfg.profile.eval_g0(xi, cfg.r_floor)?.value;
    }
    Ok(u)
}

fn static_force(cfg: &SimConfig, xi: f64, zeta: f64) -> Result<[f64; 2]> {
    let mut f = cfg.medium.force(xi, zeta)?;
    if cfg.field_mode == FieldMode::FrozenLaunch {
        f[0] += WAVE_COUPLING * cfg.profile.eval_dg0(xi, cfg.r_floor)?;
    }
    Ok(f)
}

/// `ρ²/2 + V/2E − G/8π²` for one ray. In frozen mode `g` is ignored and the
/// launch G at the ray's position is used.
fn hamiltonian(cfg: &SimConfig, ray: &RayState, g: f64) -> Result<f64> {
    let kinetic = 0.5 * (ray.rho_x * ray.rho_x + ray.rho_z * ray.rho_z);
    let wave = match cfg.field_mode {
        FieldMode::SelfConsistent => -WAVE_COUPLING * g,
        FieldMode::FrozenLaunch | FieldMode::Disabled => 0.0,
    };
    Ok(kinetic + potential(cfg, ray.xi, ray.zeta)? + wave)
}

fn pair_flux(a: &RayState, b: &RayState, gap: f64) -> f64 {
    let r = 0.5 * (a.amp_r + b.amp_r);
    r * r * gap * 0.5 * (a.rho_norm() + b.rho_norm())
}

/// Why one ray could not be advanced.
#[derive(Debug)]
enum Halt {
    TurnedBack,
    Outside,
}

impl From<Error> for Halt {
    fn from(_: Error) -> Self {
        Halt::Outside
    }
}

/// Advance every ray of `front` by one step of `cfg.d_tau`.
///
/// `geom` and `field` must belong to `front`. The returned report carries
/// the geometric monitors and retirement count; the energy drift needs G on
/// the new front and is filled in by [`energy_drift`].
pub fn step(
    front: &BeamFront,
    geom: &FrontGeometry,
    field: &GField,
    cfg: &SimConfig,
    reference: &LaunchReference,
    step_index: usize,
) -> (BeamFront, StepReport, Vec<(RayState, RetireReason)>) {
    let n = front.len();
    let dt = cfg.d_tau;
    let kappa = cfg.viscosity_rate();
    let tau = (step_index + 1) as f64 * dt;

    let mut rays = Vec::with_capacity(n);
    let mut retired = Vec::new();
    for (i, ray) in front.rays.iter().enumerate() {
        let wave = match cfg.field_mode {
            FieldMode::SelfConsistent => {
                let c = WAVE_COUPLING * field.dg_dsigma[i];
                [c * geom.tangent[i][0], c * geom.tangent[i][1]]
            }
            _ => [0.0, 0.0],
        };
        let visc = if kappa > 0.0 && i > 0 && i + 1 < n {
            kappa * (front.rays[i - 1].theta - 2.0 * ray.theta + front.rays[i + 1].theta)
        } else {
            0.0
        };
        let u0 = reference.u0[ray.ray_id];
        let advanced = match cfg.force_mode {
            ForceMode::TransverseRotation => advance_rotation(cfg, ray, u0, wave, visc, dt),
            ForceMode::Cartesian => advance_cartesian(cfg, ray, u0, wave, visc, dt),
        };
        match advanced {
            Ok(mut next) => {
                next.tau = tau;
                next.g_val = field.g[i];
                next.clamped = ray.clamped || field.clamped[i];
                if [next.xi, next.zeta, next.rho_x, next.rho_z, next.theta, next.phase].iter().all(|v| v.is_finite()) {
                    rays.push(next);
                } else {
                    retired.push((*ray, RetireReason::NonFinite));
                }
            }
            Err(Halt::TurnedBack) => retired.push((*ray, RetireReason::TurnedBack)),
            Err(Halt::Outside) => retired.push((*ray, RetireReason::OutsideMedium)),
        }
    }
    let next = BeamFront { tau, rays, sigma: Vec::new() };
    let mut report = geometric_monitors(&next, cfg, reference);
    report.step = step_index + 1;
    report.retired = retired.len();
    (next, report, retired)
}

/// RK4 on (ξ, ζ, θ, phase).
fn advance_rotation(
    cfg: &SimConfig,
    ray: &RayState,
    u0: f64,
    wave: [f64; 2],
    visc: f64,
    dt: f64,
) -> std::result::Result<RayState, Halt> {
    let rhs = |x: f64, z: f64, th: f64| -> std::result::Result<[f64; 4], Halt> {
        let r2 = 1.0 - 2.0 * (potential(cfg, x, z)? - u0);
        if r2 <= 0.0 {
            return Err(Halt::TurnedBack);
        }
        let r = r2.sqrt();
        let f = static_force(cfg, x, z)?;
        let (s, c) = th.sin_cos();
        let fn_ = (f[0] + wave[0]) * c - (f[1] + wave[1]) * s;
        Ok([r * s, r * c, fn_ / r + visc, 2.0 * PI * r2])
    };
    let y = [ray.xi, ray.zeta, ray.theta, ray.phase];
    let y = rk4(y, dt, |y| rhs(y[0], y[1], y[2]))?;
    let r2 = 1.0 - 2.0 * (potential(cfg, y[0], y[1])? - u0);
    if r2 <= 0.0 || y[2].cos() <= 0.0 {
        return Err(Halt::TurnedBack);
    }
    let r = r2.sqrt();
    let (s, c) = y[2].sin_cos();
    Ok(RayState { xi: y[0], zeta: y[1], theta: y[2], phase: y[3], rho_x: r * s, rho_z: r * c, ..*ray })
}

/// RK4 on (ξ, ζ, ρ_x, phase), with ρ_z rebuilt from the energy relation at
/// every substep. The front viscosity enters as a turning rate, `ρ_z·visc`.
fn advance_cartesian(
    cfg: &SimConfig,
    ray: &RayState,
    u0: f64,
    wave: [f64; 2],
    visc: f64,
    dt: f64,
) -> std::result::Result<RayState, Halt> {
    let rho_z = |x: f64, z: f64, px: f64| -> std::result::Result<(f64, f64), Halt> {
        let r2 = 1.0 - 2.0 * (potential(cfg, x, z)? - u0);
        let pz2 = r2 - px * px;
        if pz2 <= 0.0 {
            return Err(Halt::TurnedBack);
        }
        Ok((pz2.sqrt(), r2))
    };
    let rhs = |y: &[f64; 4]| -> std::result::Result<[f64; 4], Halt> {
        let (pz, r2) = rho_z(y[0], y[1], y[2])?;
        let f = static_force(cfg, y[0], y[1])?;
        Ok([y[2], pz, f[0] + wave[0] + visc * pz, 2.0 * PI * r2])
    };
    let y = rk4([ray.xi, ray.zeta, ray.rho_x, ray.phase], dt, rhs)?;
    let (pz, _) = rho_z(y[0], y[1], y[2])?;
    Ok(RayState { xi: y[0], zeta: y[1], rho_x: y[2], rho_z: pz, theta: y[2].atan2(pz), phase: y[3], ..*ray })
}

fn rk4<E>(
    y: [f64; 4],
    dt: f64,
    f: impl Fn(&[f64; 4]) -> std::result::Result<[f64; 4], E>,
) -> std::result::Result<[f64; 4], E> {
    let add = |a: &[f64; 4], k: &[f64; 4], s: f64| [a[0] + s * k[0], a[1] + s * k[1], a[2] + s * k[2], a[3] + s * k[3]];
    let k1 = f(&y)?;
    let k2 = f(&add(&y, &k1, 0.5 * dt))?;
    let k3 = f(&add(&y, &k2, 0.5 * dt))?;
    let k4 = f(&add(&y, &k3, dt))?;
    let mut out = y;
    for j in 0..4 {
        out[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    }
    Ok(out)
}

fn geometric_monitors(front: &BeamFront, cfg: &SimConfig, reference: &LaunchReference) -> StepReport {
    let track_norm = cfg.medium.is_vacuum() && cfg.field_mode != FieldMode::FrozenLaunch;
    let max_norm_drift = track_norm.then(|| front.rays.iter().map(|r| (r.rho_norm() - 1.0).abs()).fold(0.0, f64::max));
    let mut report = StepReport {
        step: 0,
        tau: front.tau,
        max_h_drift: 0.0,
        max_norm_drift,
        max_flux_drift: 0.0,
        max_compression: 0.0,
        compression_xi: 0.0,
        compression_zeta: 0.0,
        retired: 0,
        crossed: 0,
    };
    for w in front.rays.windows(2) {
        if w[1].ray_id != w[0].ray_id + 1 {
            continue;
        }
        let gap = (w[1].xi - w[0].xi).hypot(w[1].zeta - w[0].zeta);
        let f0 = reference.flux0[w[0].ray_id];
        if f0 > 0.0 {
            let drift = (pair_flux(&w[0], &w[1], gap) / f0 - 1.0).abs();
            report.max_flux_drift = report.max_flux_drift.max(drift);
        }
        let compression = reference.launch_spacing / gap;
        if compression > report.max_compression {
            report.max_compression = compression;
            report.compression_xi = 0.5 * (w[0].xi + w[1].xi);
            report.compression_zeta = 0.5 * (w[0].zeta + w[1].zeta);
        }
    }
    report
}

/// Max `|H − H_launch| / E` over the front, with G from `field`.
pub fn energy_drift(front: &BeamFront, field: &GField, cfg: &SimConfig, reference: &LaunchReference) -> f64 {
    front
        .rays
        .iter()
        .zip(&field.g)
        .filter_map(|(r, g)| hamiltonian(cfg, r, *g).ok().map(|h| (h - reference.h0[r.ray_id]).abs() / 0.5))
        .fold(0.0, f64::max)
}

/// G for the current front according to the field mode.
fn field_for(front: &BeamFront, geom: &FrontGeometry, prev: Option<&GField>, cfg: &SimConfig) -> Result<GField> {
    match cfg.field_mode {
        FieldMode::SelfConsistent => Ok(estimate_g(front, geom, prev, cfg.r_floor, cfg.g_blend)),
        FieldMode::Disabled => Ok(GField::zero(front)),
        FieldMode::FrozenLaunch => {
            let mut f = GField::zero(front);
            for (i, r) in front.rays.iter().enumerate() {
                let g = cfg.profile.eval_g0(r.xi, cfg.r_floor)?;
                f.g[i] = g.value;
                f.clamped[i] = g.clamped;
                f.dg_dsigma[i] = cfg.profile.eval_dg0(r.xi, cfg.r_floor)?;
            }
            Ok(f)
        }
    }
}

struct Recorder {
    samples: Vec<Vec<RayState>>,
    crossings: Vec<Crossing>,
    retirements: Vec<Retirement>,
    /// Launch-neighbour pairs `(id, id + 1)` currently out of order, when
    /// crossings do not retire rays.
    crossed_pairs: Vec<bool>,
}

impl Recorder {
    fn retire(&mut self, ray: RayState, step: usize, tau: f64, reason: RetireReason) {
        self.samples[ray.ray_id].push(ray);
        self.retirements.push(Retirement { step, tau, ray_id: ray.ray_id, reason });
    }
}

/// With a self-consistent field, remove crossed neighbour pairs until the
/// front is ordered; otherwise only record new crossings. Then build the
/// field. Returns the geometry and field of the surviving front, or `None`
/// when fewer than three rays remain.
fn settle(
    front: &mut BeamFront,
    prev: Option<&GField>,
    cfg: &SimConfig,
    rec: &mut Recorder,
    step: usize,
    crossed_count: &mut usize,
) -> Result<Option<(FrontGeometry, GField)>> {
    let h = cfg.launch_spacing();
    loop {
        if front.len() < 3 {
            return Ok(None);
        }
        let geom = front_geometry(front, h)?;
        if cfg.field_mode != FieldMode::SelfConsistent {
            // Rays are independent here: record each new crossing and keep going.
            let mut now = vec![false; rec.crossed_pairs.len()];
            for &i in &geom.crossed {
                let (a, b) = (&front.rays[i], &front.rays[i + 1]);
                now[a.ray_id] = true;
                if !rec.crossed_pairs[a.ray_id] {
                    rec.crossings.push(Crossing {
                        step,
                        tau: front.tau,
                        ray_a: a.ray_id,
                        ray_b: b.ray_id,
                        zeta: 0.5 * (a.zeta + b.zeta),
                    });
                    *crossed_count += 1;
                }
            }
            rec.crossed_pairs = now;
        } else if !geom.crossed.is_empty() {
            let mut drop = vec![false; front.len()];
            for &i in &geom.crossed {
                let (a, b) = (&front.rays[i], &front.rays[i + 1]);
                rec.crossings.push(Crossing {
                    step,
                    tau: front.tau,
                    ray_a: a.ray_id,
                    ray_b: b.ray_id,
                    zeta: 0.5 * (a.zeta + b.zeta),
                });
                drop[i] = true;
                drop[i + 1] = true;
            }
            *crossed_count += geom.crossed.len();
            retain(front, &drop, rec, step, RetireReason::Crossed);
            continue;
        }
        let field = field_for(front, &geom, prev, cfg)?;
        if !field.invalid.is_empty() {
            let mut drop = vec![false; front.len()];
            for &i in &field.invalid {
                drop[i] = true;
            }
            retain(front, &drop, rec, step, RetireReason::NonFinite);
            continue;
        }
        for (r, (g, c)) in front.rays.iter_mut().zip(field.g.iter().zip(&field.clamped)) {
            r.g_val = *g;
            r.clamped |= *c;
        }
        front.sigma = geom.sigma.clone();
        return Ok(Some((geom, field)));
    }
}

fn retain(front: &mut BeamFront, drop: &[bool], rec: &mut Recorder, step: usize, reason: RetireReason) {
    let tau = front.tau;
    let mut kept = Vec::with_capacity(front.len());
    for (r, d) in front.rays.drain(..).zip(drop) {
        if *d {
            rec.retire(r, step, tau, reason);
        } else {
            kept.push(r);
        }
    }
    front.rays = kept;
}

/// Integrate a whole run.
///
/// Stops once every alive ray has reached `zeta_max`, when fewer than three
/// rays remain, or at the τ limit. Identical configurations give identical
/// output.
pub fn run(cfg: &SimConfig) -> Result<TrajectorySet> {
    cfg.validate()?;
    let mut front = cfg.profile.make_front(cfg.n_rays, cfg.span)?;
    let mut rec = Recorder {
        samples: vec![Vec::new(); cfg.n_rays],
        crossings: Vec::new(),
        retirements: Vec::new(),
        crossed_pairs: vec![false; cfg.n_rays],
    };
    let mut crossed = 0;
    let (mut geom, mut field) = settle(&mut front, None, cfg, &mut rec, 0, &mut crossed)?
        .ok_or(Error::FrontCollapse { step: 0, alive: front.len() })?;
    let reference = LaunchReference::new(&front, &field, cfg)?;
    for r in &front.rays {
        rec.samples[r.ray_id].push(*r);
    }

    let mut drift = Vec::new();
    let mut status = RunStatus::Completed;
    let tau_limit = cfg.tau_limit();
    let mut k = 0;
    while front.min_zeta() < cfg.zeta_max {
        if k as f64 * cfg.d_tau >= tau_limit {
            status = RunStatus::TauLimit;
            break;
        }
        let (mut next, mut report, retired) = step(&front, &geom, &field, cfg, &reference, k);
        k += 1;
        for (ray, reason) in retired {
            rec.retire(ray, k, next.tau, reason);
        }
        crossed = 0;
        match settle(&mut next, Some(&field), cfg, &mut rec, k, &mut crossed)? {
            Some((g, f)) => {
                geom = g;
                field = f;
            }
            None => {
                report.crossed = crossed;
                drift.push(report);
                for r in next.rays.drain(..) {
                    rec.samples[r.ray_id].push(r);
                }
                status = RunStatus::FrontCollapse;
                front = next;
                break;
            }
        }
        report.crossed = crossed;
        report.max_h_drift = energy_drift(&next, &field, cfg, &reference);
        drift.push(report);
        front = next;
        if k % cfg.output_stride == 0 {
            for r in &front.rays {
                rec.samples[r.ray_id].push(*r);
            }
        }
    }
    for r in &front.rays {
        let s = &mut rec.samples[r.ray_id];
        if s.last() != Some(r) {
            s.push(*r);
        }
    }
    Ok(TrajectorySet {
        samples: rec.samples,
        drift,
        crossings: rec.crossings,
        retirements: rec.retirements,
        status,
        steps: k,
    })
}
