//! Dynamic checks: integration of the consensus protocol, unicycle tracking
//! and initial-position perturbation studies.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::{initial_positions, recompute_from_positions, AgentTrochoid, Beta, DesignSpec, Eigenstructure, ModalState};
use crate::error::{Error, Result};
use crate::geometry::{wrap_angle, Point2};
use crate::region::ConstraintTag;
use crate::trajectory::{pairwise_extremal_distances, physical_speed, sampled_extrema};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    #[default]
    Rk4,
    Euler,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Controller {
    /// `omega = K_P e + K_I int(e) + d gamma_ref / dt`.
    #[default]
    PiFeedForward,
    /// `omega = K_P e`.
    Proportional,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub dt: f64,
    pub duration: f64,
    pub k_p: f64,
    pub k_i: f64,
    pub v_max: Option<f64>,
    pub omega_max: Option<f64>,
    pub integrator: Integrator,
    /// Factor applied to the gain matrix; time runs `scale` times faster.
    pub scale: f64,
    pub controller: Controller,
    /// Keep every `record_every`-th step in the output series.
    pub record_every: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            duration: 1.0,
            k_p: 4.0,
            k_i: 0.5,
            v_max: None,
            omega_max: None,
            integrator: Integrator::Rk4,
            scale: 1.0,
            controller: Controller::PiFeedForward,
            record_every: 1,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be positive");
        }
        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            return bad("duration must be non-negative");
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return bad("scale must be positive");
        }
        if self.v_max.is_some_and(|v| !(v > 0.0)) {
            return bad("v_max must be positive");
        }
        if self.omega_max.is_some_and(|w| !(w >= 0.0)) {
            return bad("omega_max must be non-negative");
        }
        if !(self.k_p >= 0.0 && self.k_i >= 0.0) {
            return bad("gains must be non-negative");
        }
        if self.record_every == 0 {
            return bad("record_every must be at least 1");
        }
        Ok(())
    }

    fn steps(&self) -> (usize, f64) {
        if self.duration == 0.0 {
            return (0, 0.0);
        }
        let n = (self.duration / self.dt - 1e-9).ceil().max(1.0) as usize;
        (n, self.duration / n as f64)
    }
}

fn step<const N: usize>(
    integrator: Integrator,
    f: &impl Fn(f64, &[f64; N]) -> [f64; N],
    t: f64,
    y: &[f64; N],
    h: f64,
) -> [f64; N] {
    let axpy = |a: &[f64; N], s: f64, b: &[f64; N]| std::array::from_fn(|i| a[i] + s * b[i]);
    match integrator {
        Integrator::Euler => axpy(y, h, &f(t, y)),
        Integrator::Rk4 => {
            let k1 = f(t, y);
            let k2 = f(t + 0.5 * h, &axpy(y, 0.5 * h, &k1));
            let k3 = f(t + 0.5 * h, &axpy(y, 0.5 * h, &k2));
            let k4 = f(t + h, &axpy(y, h, &k3));
            std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        }
    }
}

/// Positions over time.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CpRun {
    pub times: Vec<f64>,
    pub positions: Vec<[Point2; 3]>,
}

fn cp_rhs(m: &[[f64; 3]; 3], y: &[f64; 6]) -> [f64; 6] {
    // u_i = S sum_j M_ij x_j with S the quarter-turn rotation
    let mut out = [0.0; 6];
    for i in 0..3 {
        let (mut ux, mut uy) = (0.0, 0.0);
        for j in 0..3 {
            ux += m[i][j] * y[2 * j];
            uy += m[i][j] * y[2 * j + 1];
        }
        out[2 * i] = -uy;
        out[2 * i + 1] = ux;
    }
    out
}

/// Integrates `x' = ((B L) ⊗ S) x` from `x0`.
pub fn integrate_cp(beta: &Beta, x0: &[Point2; 3], config: &SimConfig) -> Result<CpRun> {
    config.validate()?;
    let m = beta.scaled(config.scale).protocol_matrix();
    let (n, h) = config.steps();
    let mut run = CpRun::default();
    if n == 0 {
        return Ok(run);
    }
    let mut y = [x0[0].x, x0[0].y, x0[1].x, x0[1].y, x0[2].x, x0[2].y];
    let unpack = |y: &[f64; 6]| std::array::from_fn(|i| Point2::new(y[2 * i], y[2 * i + 1]));
    run.times.push(0.0);
    run.positions.push(unpack(&y));
    let f = |_t: f64, y: &[f64; 6]| cp_rhs(&m, y);
    for s in 1..=n {
        y = step(config.integrator, &f, (s - 1) as f64 * h, &y, h);
        let t = s as f64 * h;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { t });
        }
        if s % config.record_every == 0 || s == n {
            run.times.push(t);
            run.positions.push(unpack(&y));
        }
    }
    Ok(run)
}

/// Speed and reference heading extracted from a protocol output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentCommand {
    pub speed: f64,
    pub heading: Option<f64>,
}

impl AgentCommand {
    pub fn heading(&self) -> Result<f64> {
        self.heading.ok_or(Error::HeadingUndefined)
    }
}

/// Protocol output `u_i` for each agent.
pub fn cp_velocities(beta: &Beta, x: &[Point2; 3]) -> [Point2; 3] {
    let y = [x[0].x, x[0].y, x[1].x, x[1].y, x[2].x, x[2].y];
    let u = cp_rhs(&beta.protocol_matrix(), &y);
    std::array::from_fn(|i| Point2::new(u[2 * i], u[2 * i + 1]))
}

/// `V_i = |u_i|` and `gamma_ref = atan2(u_yi, u_xi)`.
pub fn cp_control_outputs(beta: &Beta, x: &[Point2; 3]) -> [AgentCommand; 3] {
    cp_velocities(beta, x).map(|u| {
        let speed = u.norm();
        AgentCommand { speed, heading: (speed > 0.0).then(|| u.y.atan2(u.x)) }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnicycleState {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub gamma: f64,
    /// Integral of the heading error.
    pub integral: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingReport {
    pub states: Vec<UnicycleState>,
    /// Position error at each recorded state.
    pub errors: Vec<f64>,
    pub max_error: f64,
    pub rms_error: f64,
    pub speed_saturated: bool,
    pub turn_rate_saturated: bool,
}

struct Command {
    v: f64,
    gamma_ref: Option<f64>,
    feed_forward: f64,
}

fn saturate(v: f64, limit: Option<f64>) -> (f64, bool) {
    match limit {
        Some(l) if v.abs() > l => (l.copysign(v), true),
        _ => (v, false),
    }
}

/// Turn rate and integral rate for one agent.
fn heading_law(cfg: &SimConfig, cmd: &Command, gamma: f64, integral: f64) -> (f64, f64, bool) {
    let e = cmd.gamma_ref.map_or(0.0, |g| wrap_angle(g - gamma));
    let raw = match cfg.controller {
        Controller::PiFeedForward => cfg.k_p * e + cfg.k_i * integral + cmd.feed_forward,
        Controller::Proportional => cfg.k_p * e,
    };
    let (omega, sat) = saturate(raw, cfg.omega_max);
    let windup = sat && e * raw > 0.0;
    (omega, if windup || cfg.controller == Controller::Proportional { 0.0 } else { e }, sat)
}

fn reference_command(tr: &AgentTrochoid, scale: f64, t: f64) -> Command {
    let ts = scale * t;
    let v = tr.velocity(ts);
    match physical_speed(tr, ts) {
        Ok(s) => Command { v: scale * s.v, gamma_ref: Some(v.y.atan2(v.x)), feed_forward: scale * s.omega },
        Err(_) => Command { v: 0.0, gamma_ref: None, feed_forward: 0.0 },
    }
}

/// Drives one unicycle along `reference` (evaluated at `scale * t`), starting
/// on the path with the reference heading. Speed is the reference speed; the
/// heading follows the selected controller.
pub fn unicycle_track(reference: &AgentTrochoid, config: &SimConfig) -> Result<TrackingReport> {
    config.validate()?;
    let p0 = reference.position(0.0);
    let v0 = reference.velocity(0.0);
    let gamma0 = if v0.norm() > 0.0 { v0.y.atan2(v0.x) } else { 0.0 };
    let mut y = [p0.x, p0.y, gamma0, 0.0];
    let (n, h) = config.steps();
    let (mut v_sat, mut w_sat) = (false, false);
    let rhs = |t: f64, y: &[f64; 4]| {
        let cmd = reference_command(reference, config.scale, t);
        let (v, _) = saturate(cmd.v, config.v_max);
        let (omega, di, _) = heading_law(config, &cmd, y[2], y[3]);
        [v * y[2].cos(), v * y[2].sin(), omega, di]
    };
    let mut states = Vec::new();
    let mut errors = Vec::new();
    let mut record = |t: f64, y: &[f64; 4], states: &mut Vec<UnicycleState>| {
        let r = reference.position(config.scale * t);
        errors.push(Point2::new(y[0], y[1]).distance(r));
        states.push(UnicycleState { t, x: y[0], y: y[1], gamma: y[2], integral: y[3] });
    };
    if n > 0 {
        record(0.0, &y, &mut states);
    }
    for s in 1..=n {
        let t0 = (s - 1) as f64 * h;
        let cmd = reference_command(reference, config.scale, t0);
        v_sat |= saturate(cmd.v, config.v_max).1;
        w_sat |= heading_law(config, &cmd, y[2], y[3]).2;
        y = step(config.integrator, &rhs, t0, &y, h);
        y[2] = wrap_angle(y[2]);
        let t = s as f64 * h;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { t });
        }
        if s % config.record_every == 0 || s == n {
            record(t, &y, &mut states);
        }
    }
    Ok(summarize(states, errors, v_sat, w_sat))
}

fn summarize(states: Vec<UnicycleState>, errors: Vec<f64>, v_sat: bool, w_sat: bool) -> TrackingReport {
    let max_error = errors.iter().copied().fold(0.0, f64::max);
    let rms_error = if errors.is_empty() {
        0.0
    } else {
        (errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64).sqrt()
    };
    TrackingReport { states, errors, max_error, rms_error, speed_saturated: v_sat, turn_rate_saturated: w_sat }
}

/// Three unicycles running the protocol on their measured positions, as on
/// hardware. Errors are measured against the closed-form trochoids through
/// the same initial positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwarmTrackingReport {
    pub agents: Vec<TrackingReport>,
}

pub fn unicycle_swarm(eig: &Eigenstructure, x0: &[Point2; 3], config: &SimConfig) -> Result<SwarmTrackingReport> {
    config.validate()?;
    let reference = recompute_from_positions(eig, x0)?.trochoids(eig);
    let beta = eig.beta.scaled(config.scale);
    let m = beta.protocol_matrix();
    let cmds = |y: &[f64; 12]| {
        let pos: [Point2; 3] = std::array::from_fn(|i| Point2::new(y[4 * i], y[4 * i + 1]));
        let u = cp_velocities(&beta, &pos);
        let speeds: [f64; 3] = std::array::from_fn(|i| saturate(u[i].norm(), config.v_max).0);
        // derivative of u from the actual velocities
        let xd: [Point2; 3] = std::array::from_fn(|i| {
            Point2::new(speeds[i] * y[4 * i + 2].cos(), speeds[i] * y[4 * i + 2].sin())
        });
        std::array::from_fn::<Command, 3, _>(|i| {
            let (mut ax, mut ay) = (0.0, 0.0);
            for j in 0..3 {
                ax += m[i][j] * xd[j].x;
                ay += m[i][j] * xd[j].y;
            }
            let (dux, duy) = (-ay, ax);
            let n2 = u[i].x * u[i].x + u[i].y * u[i].y;
            if n2 > 0.0 {
                Command {
                    v: speeds[i],
                    gamma_ref: Some(u[i].y.atan2(u[i].x)),
                    feed_forward: (u[i].x * duy - u[i].y * dux) / n2,
                }
            } else {
                Command { v: 0.0, gamma_ref: None, feed_forward: 0.0 }
            }
        })
    };
    let mut y = [0.0; 12];
    let c0 = cmds(&{
        let mut z = [0.0; 12];
        for i in 0..3 {
            z[4 * i] = x0[i].x;
            z[4 * i + 1] = x0[i].y;
        }
        z
    });
    for i in 0..3 {
        y[4 * i] = x0[i].x;
        y[4 * i + 1] = x0[i].y;
        y[4 * i + 2] = c0[i].gamma_ref.unwrap_or(0.0);
    }
    let rhs = |_t: f64, y: &[f64; 12]| {
        let c = cmds(y);
        let mut out = [0.0; 12];
        for i in 0..3 {
            let (omega, di, _) = heading_law(config, &c[i], y[4 * i + 2], y[4 * i + 3]);
            out[4 * i] = c[i].v * y[4 * i + 2].cos();
            out[4 * i + 1] = c[i].v * y[4 * i + 2].sin();
            out[4 * i + 2] = omega;
            out[4 * i + 3] = di;
        }
        out
    };
    let (n, h) = config.steps();
    let mut states: [Vec<UnicycleState>; 3] = Default::default();
    let mut errors: [Vec<f64>; 3] = Default::default();
    let (mut v_sat, mut w_sat) = ([false; 3], [false; 3]);
    let record = |t: f64, y: &[f64; 12], states: &mut [Vec<UnicycleState>; 3], errors: &mut [Vec<f64>; 3]| {
        for i in 0..3 {
            let r = reference[i].position(config.scale * t);
            errors[i].push(Point2::new(y[4 * i], y[4 * i + 1]).distance(r));
            states[i].push(UnicycleState { t, x: y[4 * i], y: y[4 * i + 1], gamma: y[4 * i + 2], integral: y[4 * i + 3] });
        }
    };
    if n > 0 {
        record(0.0, &y, &mut states, &mut errors);
    }
    for s in 1..=n {
        let t0 = (s - 1) as f64 * h;
        let c = cmds(&y);
        let pos: [Point2; 3] = std::array::from_fn(|i| Point2::new(y[4 * i], y[4 * i + 1]));
        let u = cp_velocities(&beta, &pos);
        for i in 0..3 {
            v_sat[i] |= saturate(u[i].norm(), config.v_max).1;
            w_sat[i] |= heading_law(config, &c[i], y[4 * i + 2], y[4 * i + 3]).2;
        }
        y = step(config.integrator, &rhs, t0, &y, h);
        for i in 0..3 {
            y[4 * i + 2] = wrap_angle(y[4 * i + 2]);
        }
        let t = s as f64 * h;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { t });
        }
        if s % config.record_every == 0 || s == n {
            record(t, &y, &mut states, &mut errors);
        }
    }
    let [s1, s2, s3] = states;
    let [e1, e2, e3] = errors;
    let agents = [(s1, e1), (s2, e2), (s3, e3)]
        .into_iter()
        .enumerate()
        .map(|(i, (s, e))| summarize(s, e, v_sat[i], w_sat[i]))
        .collect();
    Ok(SwarmTrackingReport { agents })
}

/// Extremes of one agent's distance from the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OriginCheck {
    pub agent: usize,
    pub d_min: f64,
    pub d_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairCheck {
    pub i: usize,
    pub j: usize,
    /// Sampled extremes of the separation.
    pub d_min: f64,
    pub d_max: f64,
    /// Separation extremes predicted from the recovered `(R_c, d_c)`.
    pub predicted_min: f64,
    pub predicted_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub tag: ConstraintTag,
    pub value: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationReport {
    pub epsilon: [f64; 3],
    pub psi: [f64; 3],
    pub positions: [Point2; 3],
    pub modal: ModalState,
    pub origin: [OriginCheck; 3],
    pub pairs: [PairCheck; 3],
    pub violations: Vec<Violation>,
    /// Largest change of an origin-distance extreme relative to the
    /// unperturbed design.
    pub max_origin_shift: f64,
    /// Largest gap between sampled and predicted pair extremes.
    pub max_pair_formula_error: f64,
}

const SAMPLES: usize = 4096;
const TOL: f64 = 1e-9;

/// Perturbs the initial positions of a normalised design and checks every
/// distance constraint on the resulting trochoids.
pub fn perturb_and_assess(
    eig: &Eigenstructure,
    spec: &DesignSpec,
    r_c: f64,
    d_c: f64,
    epsilon: [f64; 3],
    psi: [f64; 3],
) -> Result<PerturbationReport> {
    let base = initial_positions(eig, r_c, d_c)?.positions;
    let positions: [Point2; 3] =
        std::array::from_fn(|i| base[i] + Point2::new(epsilon[i] * psi[i].cos(), epsilon[i] * psi[i].sin()));
    let modal = recompute_from_positions(eig, &positions)?;
    let tr = modal.trochoids(eig);
    let base_tr = ModalState { r_c, d_c, ..Default::default() }.trochoids(eig);

    let origin_of = |t: &AgentTrochoid| sampled_extrema(SAMPLES, |th| t.z_at_phase(th).norm());
    let mut violations = Vec::new();
    let mut max_origin_shift: f64 = 0.0;
    let origin: [OriginCheck; 3] = std::array::from_fn(|i| {
        let (lo, hi) = origin_of(&tr[i]);
        let (blo, bhi) = origin_of(&base_tr[i]);
        max_origin_shift = max_origin_shift.max((lo - blo).abs()).max((hi - bhi).abs());
        OriginCheck { agent: i + 1, d_min: lo, d_max: hi }
    });
    for o in &origin {
        if o.d_min < spec.d0_min - TOL {
            violations.push(Violation { tag: ConstraintTag::OriginMin { agent: o.agent }, value: o.d_min, bound: spec.d0_min });
        }
        if o.d_max > spec.d0_max + TOL {
            violations.push(Violation { tag: ConstraintTag::OriginMax { agent: o.agent }, value: o.d_max, bound: spec.d0_max });
        }
    }

    let mut max_pair_formula_error: f64 = 0.0;
    let pairs: [PairCheck; 3] = std::array::from_fn(|p| {
        let (i, j) = [(0, 1), (1, 2), (0, 2)][p];
        let (lo, hi) = sampled_extrema(SAMPLES, |th| (tr[i].z_at_phase(th) - tr[j].z_at_phase(th)).norm());
        let ar = (eig.alpha.r[i] - eig.alpha.r[j]).abs() * modal.r_c;
        let ad = (eig.alpha.d[i] - eig.alpha.d[j]).abs() * modal.d_c;
        let (pmin, pmax) = ((ar - ad).abs(), ar + ad);
        max_pair_formula_error = max_pair_formula_error.max((lo - pmin).abs()).max((hi - pmax).abs());
        PairCheck { i: i + 1, j: j + 1, d_min: lo, d_max: hi, predicted_min: pmin, predicted_max: pmax }
    });
    for p in &pairs {
        let (lo, hi) = pairwise_extremal_distances(&tr[p.i - 1], &tr[p.j - 1]);
        if lo.min(p.d_min) < spec.d_ct - TOL {
            violations.push(Violation { tag: ConstraintTag::PairMin { i: p.i, j: p.j }, value: lo.min(p.d_min), bound: spec.d_ct });
        }
        if hi.max(p.d_max) > spec.d_cr + TOL {
            violations.push(Violation { tag: ConstraintTag::PairMax { i: p.i, j: p.j }, value: hi.max(p.d_max), bound: spec.d_cr });
        }
    }

    Ok(PerturbationReport {
        epsilon,
        psi,
        positions,
        modal,
        origin,
        pairs,
        violations,
        max_origin_shift,
        max_pair_formula_error,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub seed: u64,
    pub trials: usize,
    pub delta: f64,
    pub violating_trials: usize,
    pub violations: Vec<(usize, Violation)>,
    pub max_origin_shift: f64,
    pub max_pair_formula_error: f64,
}

/// `trials` perturbations with `epsilon_i` uniform in `[0, delta]` and
/// `psi_i` uniform in `[0, 2 pi)`. Trial `n` draws from stream `n` of a
/// ChaCha generator seeded with `seed`, so results do not depend on thread
/// scheduling.
pub fn perturbation_monte_carlo(
    eig: &Eigenstructure,
    spec: &DesignSpec,
    r_c: f64,
    d_c: f64,
    delta: f64,
    trials: usize,
    seed: u64,
) -> Result<MonteCarloSummary> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::InvalidConfig("delta must be non-negative".into()));
    }
    let reports = (0..trials)
        .into_par_iter()
        .map(|n| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(n as u64);
            let eps = std::array::from_fn(|_| rng.gen_range(0.0..=delta));
            let psi = std::array::from_fn(|_| rng.gen_range(0.0..std::f64::consts::TAU));
            perturb_and_assess(eig, spec, r_c, d_c, eps, psi)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut summary = MonteCarloSummary {
        seed,
        trials,
        delta,
        violating_trials: 0,
        violations: Vec::new(),
        max_origin_shift: 0.0,
        max_pair_formula_error: 0.0,
    };
    for (n, r) in reports.iter().enumerate() {
        if !r.violations.is_empty() {
            summary.violating_trials += 1;
        }
        summary.violations.extend(r.violations.iter().map(|v| (n, *v)));
        summary.max_origin_shift = summary.max_origin_shift.max(r.max_origin_shift);
        summary.max_pair_formula_error = summary.max_pair_formula_error.max(r.max_pair_formula_error);
    }
    Ok(summary)
}

/// Largest deviation between a protocol run and the closed-form trochoids.
pub fn closed_form_deviation(run: &CpRun, trochoids: &[AgentTrochoid; 3], scale: f64) -> f64 {
    run.times
        .iter()
        .zip(&run.positions)
        .flat_map(|(t, p)| (0..3).map(move |i| p[i].distance(trochoids[i].position(scale * t))))
        .fold(0.0, f64::max)
}

/// Modal amplitudes of a state, for conservation checks.
pub fn modal_amplitudes(eig: &Eigenstructure, x: &[Point2; 3]) -> (f64, f64) {
    let z = x.map(Point2::to_complex);
    let dot = |g: &[f64; 3]| g.iter().zip(&z).map(|(g, z)| z * g).sum::<Complex64>().norm();
    (dot(&eig.gamma.r), dot(&eig.gamma.d))
}
