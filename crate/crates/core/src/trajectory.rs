//! Closed-form trajectory evaluation, distance extrema, speed and turn rate,
//! and sensing coverage.
//!
//! Speeds and turn rates are first computed per unit phase
//! `theta = lambda_min t`; the physical values follow from
//! `V = |lambda_min| V_theta` and `omega = lambda_min omega_theta`.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::design::AgentTrochoid;
use crate::error::{Error, Result};
use crate::geometry::{brent_minimize, Point2};
use crate::quadrature::adaptive_simpson;

pub fn evaluate(trochoids: &[AgentTrochoid; 3], t: f64) -> [Point2; 3] {
    trochoids.each_ref().map(|tr| tr.position(t))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OriginExtrema {
    pub d_min: f64,
    pub d_max: f64,
    /// First time in `[0, T_rel)` at which the minimum is reached.
    pub t_min: f64,
    pub t_max: f64,
}

/// Closest and farthest distance from the centre of rotation, and when they
/// occur.
///
/// `|z - cor|^2 = c_r^2 + c_d^2 + 2 c_r c_d cos((m-1) theta + phi_d - phi_r)`,
/// so the closest approach is where the cosine equals `-sign(c_r c_d)`.
pub fn extremal_origin_distances(tr: &AgentTrochoid) -> OriginExtrema {
    let (ar, ad) = (tr.c_r.abs(), tr.c_d.abs());
    let d_min = (ar - ad).abs();
    let d_max = ar + ad;
    if ar == 0.0 || ad == 0.0 || tr.lambda_min == 0.0 {
        return OriginExtrema { d_min, d_max, t_min: 0.0, t_max: 0.0 };
    }
    let beat = (tr.harmonic() - 1) as f64;
    let rate = beat * tr.lambda_min;
    let period = TAU / rate.abs();
    let same_sign = tr.c_r * tr.c_d > 0.0;
    let psi_min = if same_sign { PI } else { 0.0 };
    let psi_max = if same_sign { 0.0 } else { PI };
    let delta = tr.phi_d - tr.phi_r;
    let time = |psi: f64| ((psi - delta) / rate).rem_euclid(period);
    OriginExtrema { d_min, d_max, t_min: time(psi_min), t_max: time(psi_max) }
}

/// Minimum and maximum separation of two agents of the same design. Their
/// difference is itself a trochoid.
pub fn pairwise_extremal_distances(a: &AgentTrochoid, b: &AgentTrochoid) -> (f64, f64) {
    let r = (Complex64::from_polar(a.c_r, a.phi_r) - Complex64::from_polar(b.c_r, b.phi_r)).norm();
    let d = (Complex64::from_polar(a.c_d, a.phi_d) - Complex64::from_polar(b.c_d, b.phi_d)).norm();
    ((r - d).abs(), r + d)
}

/// Minimum and maximum of a `2 pi`-periodic `f`, by sampling `n` phases and
/// polishing the best samples with Brent's method.
pub fn sampled_extrema(n: usize, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let n = n.max(8);
    let h = TAU / n as f64;
    let values: Vec<f64> = (0..n).map(|i| f(i as f64 * h)).collect();
    let argmin = (0..n).min_by(|&i, &j| values[i].total_cmp(&values[j])).unwrap();
    let argmax = (0..n).max_by(|&i, &j| values[i].total_cmp(&values[j])).unwrap();
    let c = argmin as f64 * h;
    let (_, lo) = brent_minimize(&f, c - h, c + h, 1e-12);
    let c = argmax as f64 * h;
    let (_, hi) = brent_minimize(|x| -f(x), c - h, c + h, 1e-12);
    (lo.min(values[argmin]), (-hi).max(values[argmax]))
}

/// Speed and turn rate per unit phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedSample {
    pub v: f64,
    pub omega: f64,
}

fn cusp_tolerance(tr: &AgentTrochoid) -> f64 {
    1e-12 * (tr.c_r.abs() + tr.harmonic().unsigned_abs() as f64 * tr.c_d.abs()).max(f64::MIN_POSITIVE)
}

/// Speed and turn rate at phase `theta`, differentiating with respect to
/// `theta`.
pub fn speed_profile(tr: &AgentTrochoid, theta: f64) -> Result<SpeedSample> {
    let dz = tr.dz_at_phase(theta);
    let v = dz.norm();
    if v <= cusp_tolerance(tr) {
        return Err(Error::CuspSingularity);
    }
    let d2z = tr.d2z_at_phase(theta);
    let omega = (dz.conj() * d2z).im / (v * v);
    Ok(SpeedSample { v, omega })
}

/// Speed and turn rate in physical time.
pub fn physical_speed(tr: &AgentTrochoid, t: f64) -> Result<SpeedSample> {
    let s = speed_profile(tr, tr.lambda_min * t)?;
    Ok(SpeedSample { v: tr.lambda_min.abs() * s.v, omega: tr.lambda_min * s.omega })
}

/// Peak speed and the turn rate at the peak-speed point, per unit phase.
///
/// In `(r, d)` form for an epitrochoid these are `(k+1)(r+d)` and
/// `1 + k u / (1 + u)` with `u = d / r`.
pub fn peak_speed_and_turn_rate(tr: &AgentTrochoid) -> SpeedSample {
    let m = tr.harmonic() as f64;
    let (ar, ad) = (tr.c_r.abs(), tr.c_d.abs());
    let v = ar + m.abs() * ad;
    SpeedSample { v, omega: (ar + m * m.abs() * ad) / v }
}

/// `1 + k u / (1 + u)`.
pub fn turn_rate_at_peak(k: u32, u: f64) -> f64 {
    1.0 + k as f64 * u / (1.0 + u)
}

/// True when the rolling radius equals the pen distance within `rel_tol`.
pub fn has_cusp(tr: &AgentTrochoid, rel_tol: f64) -> bool {
    tr.d_param > 0.0 && (tr.r_param - tr.d_param).abs() <= rel_tol * tr.r_param.max(tr.d_param)
}

/// Largest speed and largest absolute turn rate per unit phase, found by a
/// grid scan with Brent refinement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileExtrema {
    pub v_max: f64,
    pub v_min: f64,
    pub omega_abs_max: f64,
    pub theta_omega_abs_max: f64,
}

pub fn profile_extrema(tr: &AgentTrochoid, n: usize) -> Result<ProfileExtrema> {
    let n = n.max(16);
    let h = TAU / n as f64;
    let samples = (0..n)
        .map(|i| speed_profile(tr, i as f64 * h))
        .collect::<Result<Vec<_>>>()?;
    let best = |key: &dyn Fn(&SpeedSample) -> f64| {
        (0..n).max_by(|&i, &j| key(&samples[i]).total_cmp(&key(&samples[j]))).unwrap()
    };
    let refine = |i: usize, g: &dyn Fn(f64) -> f64| {
        let c = i as f64 * h;
        let (x, fx) = brent_minimize(|x| -g(x), c - h, c + h, 1e-12);
        if -fx >= g(c) {
            (x, -fx)
        } else {
            (c, g(c))
        }
    };
    let speed = |x: f64| tr.dz_at_phase(x).norm();
    let omega = |x: f64| speed_profile(tr, x).map_or(f64::INFINITY, |s| s.omega.abs());
    let (_, v_max) = refine(best(&|s| s.v), &speed);
    let (_, neg_vmin) = refine(best(&|s| -s.v), &|x| -speed(x));
    let (theta, omega_abs_max) = refine(best(&|s| s.omega.abs()), &omega);
    Ok(ProfileExtrema { v_max, v_min: -neg_vmin, omega_abs_max, theta_omega_abs_max: theta })
}

/// Length of one closed path.
pub fn arc_length(tr: &AgentTrochoid) -> f64 {
    let scale = tr.c_r.abs() + tr.harmonic().unsigned_abs() as f64 * tr.c_d.abs();
    if scale == 0.0 {
        return 0.0;
    }
    adaptive_simpson(|x| tr.dz_at_phase(x).norm(), 0.0, TAU, 1e-10 * TAU * scale, 1_000_000).value
}

/// Swept sensing area `2 R_sense L` of one agent.
pub fn sensing_area(tr: &AgentTrochoid, r_sense: f64) -> f64 {
    2.0 * r_sense * arc_length(tr)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub r_sense: f64,
    pub arc_lengths: [f64; 3],
    pub areas: [f64; 3],
    pub total: f64,
}

pub fn coverage(trochoids: &[AgentTrochoid; 3], r_sense: f64) -> Result<CoverageReport> {
    if !(r_sense > 0.0 && r_sense.is_finite()) {
        return Err(Error::InvalidSpec("R_sense must be positive".into()));
    }
    let arc_lengths = trochoids.each_ref().map(arc_length);
    let areas = arc_lengths.map(|l| 2.0 * r_sense * l);
    Ok(CoverageReport { r_sense, arc_lengths, areas, total: areas.iter().sum() })
}

/// One row of a trajectory table. Turn rates at cusps are `NaN`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub positions: [Point2; 3],
    pub speeds: [f64; 3],
    pub turn_rates: [f64; 3],
}

/// `n` evenly spaced samples over `[0, duration]` (both ends included).
pub fn sample_trajectory(trochoids: &[AgentTrochoid; 3], duration: f64, n: usize) -> Vec<TrajectorySample> {
    if n == 0 {
        return Vec::new();
    }
    let step = if n > 1 { duration / (n - 1) as f64 } else { 0.0 };
    (0..n)
        .map(|i| {
            let t = i as f64 * step;
            let mut speeds = [0.0; 3];
            let mut turn_rates = [f64::NAN; 3];
            for (a, tr) in trochoids.iter().enumerate() {
                speeds[a] = tr.velocity(t).norm();
                if let Ok(s) = physical_speed(tr, t) {
                    turn_rates[a] = s.omega;
                }
            }
            TrajectorySample { t, positions: evaluate(trochoids, t), speeds, turn_rates }
        })
        .collect()
}

pub const CSV_HEADER: &str = "t,x1,y1,x2,y2,x3,y3,V1,omega1,V2,omega2,V3,omega3";

/// Writes samples as CSV with nine significant digits.
pub fn write_csv<W: Write>(samples: &[TrajectorySample], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for s in samples {
        let mut row = vec![s.t];
        row.extend(s.positions.iter().flat_map(|p| [p.x, p.y]));
        row.extend((0..3).flat_map(|a| [s.speeds[a], s.turn_rates[a]]));
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.8e}")).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{trochoid_coefficients, Eigenstructure, PythagoreanTriple, TrochoidType};

    fn fig2(r_c: f64, d_c: f64) -> [AgentTrochoid; 3] {
        let t = PythagoreanTriple::new(5, 12, 13).unwrap();
        let eig = Eigenstructure::from_design(t, 2, TrochoidType::Epitrochoid).unwrap();
        trochoid_coefficients(&eig, r_c, d_c)
    }

    #[test]
    fn right_design_start_and_closure() {
        let tr = fig2(2000.0, 1200.0);
        let p = evaluate(&tr, 0.0);
        for (p, want) in p.iter().zip([-3.004, -1.821, 9.225]) {
            assert!((p.x - want).abs() < 2e-3 && p.y == 0.0);
        }
        let q = evaluate(&tr, tr[0].period());
        for (p, q) in p.iter().zip(&q) {
            assert!(p.distance(*q) < 1e-9);
        }
    }

    #[test]
    fn circle_has_constant_radius() {
        let tr = fig2(2500.0, 0.0);
        for t in [0.0, 0.1, 0.37, 2.0] {
            for a in &tr {
                assert!((a.position(t).norm() - a.c_r.abs()).abs() < 1e-12);
            }
        }
        let e = extremal_origin_distances(&tr[0]);
        assert_eq!(e.d_min, e.d_max);
    }

    #[test]
    fn agent2_closest_approach() {
        let tr = fig2(2000.0, 1200.0);
        let e = extremal_origin_distances(&tr[1]);
        assert!((e.d_min - 1.8206).abs() < 1e-4);
        let at = tr[1].position(e.t_min).norm();
        assert!((at - e.d_min).abs() < 1e-9);
        let far = tr[1].position(e.t_max).norm();
        assert!((far - e.d_max).abs() < 1e-9);
    }

    #[test]
    fn identical_pair() {
        let tr = fig2(2000.0, 1200.0);
        assert_eq!(pairwise_extremal_distances(&tr[0], &tr[0]), (0.0, 0.0));
    }

    #[test]
    fn peak_speed_formula() {
        let tr = fig2(2000.0, 1200.0);
        for a in &tr {
            let grid = profile_extrema(a, 100_000).unwrap();
            let eq = peak_speed_and_turn_rate(a);
            assert!((grid.v_max - eq.v).abs() < 1e-9 * eq.v);
            let u = a.d_param / a.r_param;
            assert!((eq.omega - turn_rate_at_peak(2, u)).abs() < 1e-12);
        }
    }

    #[test]
    fn cusp_is_reported() {
        let mut tr = fig2(1000.0, 750.0)[0];
        assert!(has_cusp(&tr, 1e-9));
        // place the cusp at theta = 0
        tr.phi_d = if tr.c_r * tr.c_d > 0.0 { PI } else { 0.0 };
        assert_eq!(speed_profile(&tr, 0.0).unwrap_err(), Error::CuspSingularity);
    }

    #[test]
    fn circle_speed_is_constant() {
        let tr = fig2(2500.0, 0.0)[0];
        let a = speed_profile(&tr, 0.2).unwrap();
        let b = speed_profile(&tr, 1.7).unwrap();
        assert!((a.v - b.v).abs() < 1e-12 && (a.omega - b.omega).abs() < 1e-12);
        assert!((a.omega - 1.0).abs() < 1e-12);
    }

    #[test]
    fn circle_arc_length() {
        let tr = fig2(2500.0, 0.0);
        let c = coverage(&tr, 0.3).unwrap();
        for (a, l) in tr.iter().zip(c.arc_lengths) {
            assert!((l - TAU * a.c_r.abs()).abs() < 1e-8 * l);
        }
        assert!((c.total - c.areas.iter().sum::<f64>()).abs() < 1e-12);
    }

    #[test]
    fn csv_layout() {
        let tr = fig2(2000.0, 1200.0);
        let s = sample_trajectory(&tr, 1.0, 3);
        let mut buf = Vec::new();
        write_csv(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[1].split(',').count(), 13);
        assert!(sample_trajectory(&tr, 0.0, 0).is_empty());
    }
}
