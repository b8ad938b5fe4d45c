//! Extra agents on existing epitrochoidal paths.
//!
//! An agent injected on path `i` at offset `phi` runs `z_i(theta + phi)`. Its
//! separation from agent `j` is `|A e^{i theta} + D e^{i m theta}|` with
//! `A = c_ir e^{i phi} - c_jr` and `D = c_id e^{i m phi} - c_jd`, whose
//! minimum over `theta` is `||A| - |D||`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::design::{AgentTrochoid, Eigenstructure, TrochoidType};
use crate::error::{Error, Result};
use crate::geometry::{brent_minimize, Point2};
use crate::region::{Constraint, ConstraintTag};

/// Phase offsets at which extra agents may be placed on a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InjectionOffset {
    Quarter,
    Half,
    ThreeQuarter,
}

impl InjectionOffset {
    pub const ALL: [InjectionOffset; 3] = [Self::Quarter, Self::Half, Self::ThreeQuarter];

    pub fn radians(self) -> f64 {
        use std::f64::consts::PI;
        match self {
            Self::Quarter => PI / 2.0,
            Self::Half => PI,
            Self::ThreeQuarter => 1.5 * PI,
        }
    }
}

fn require_epi(tr: &AgentTrochoid) -> Result<()> {
    match tr.trochoid_type {
        TrochoidType::Epitrochoid => Ok(()),
        TrochoidType::Hypotrochoid => Err(Error::UnsupportedType),
    }
}

/// Position of an agent offset by `phi` along path `tr`, at phase `theta`.
pub fn injected_position(tr: &AgentTrochoid, phi: f64, theta: f64) -> Result<Point2> {
    require_epi(tr)?;
    Ok(tr.position_at_phase(theta + phi))
}

fn mode_differences(ti: &AgentTrochoid, tj: &AgentTrochoid, phi: f64) -> (Complex64, Complex64) {
    let m = ti.harmonic() as f64;
    let a = Complex64::from_polar(ti.c_r, phi + ti.phi_r) - Complex64::from_polar(tj.c_r, tj.phi_r);
    let d = Complex64::from_polar(ti.c_d, m * phi + ti.phi_d) - Complex64::from_polar(tj.c_d, tj.phi_d);
    (a, d)
}

/// Minimum over time of `|z_i(theta + phi) - z_j(theta)|^2 - d_CT^2` for two
/// agents sharing a centre of rotation.
pub fn min_separation(ti: &AgentTrochoid, tj: &AgentTrochoid, phi: f64, d_ct: f64) -> Result<f64> {
    require_epi(ti)?;
    require_epi(tj)?;
    let (a, d) = mode_differences(ti, tj, phi);
    Ok((a.norm() - d.norm()).powi(2) - d_ct * d_ct)
}

/// `delta^2_min` at the quarter offset. For a normalised design the value is
/// the same at three quarters. For even `k` this is
/// `((k+1) sqrt(r_i^2 + r_j^2) - sqrt(d_i^2 + d_j^2))^2 - d_CT^2`.
pub fn min_separation_phase_quadrature(ti: &AgentTrochoid, tj: &AgentTrochoid, d_ct: f64) -> Result<f64> {
    min_separation(ti, tj, InjectionOffset::Quarter.radians(), d_ct)
}

/// `delta^2_min` at the half offset from the four sign cases, in the signed
/// parametric form `x = (k+1) r cos(theta) - d cos((k+1) theta)`.
pub fn min_separation_phase_pi(ti: &AgentTrochoid, tj: &AgentTrochoid, d_ct: f64) -> Result<f64> {
    require_epi(ti)?;
    require_epi(tj)?;
    let k1 = (ti.k + 1) as f64;
    let (ri, di) = ti.signed_parametric();
    let (rj, dj) = tj.signed_parametric();
    let rs = k1 * (ri + rj);
    let (dsum, product) = if ti.k.is_multiple_of(2) {
        (di + dj, (ri + rj) * (di + dj))
    } else {
        (dj - di, (ri + rj) * (dj - di))
    };
    let below = (rs - dsum).powi(2) - d_ct * d_ct;
    let above = (rs + dsum).powi(2) - d_ct * d_ct;
    let scale = (ri.abs() + rj.abs()) * (di.abs() + dj.abs());
    if product.abs() <= 1e-12 * scale || scale == 0.0 {
        // Either factor vanishes, so both branches agree unless rounding
        // says otherwise.
        return if (below - above).abs() <= 1e-9 * below.abs().max(above.abs()).max(1.0) {
            Ok(below.min(above))
        } else {
            Err(Error::SignDegenerate)
        };
    }
    Ok(if product > 0.0 { below } else { above })
}

/// Grid oracle for separations: `n` equally spaced phases with a
/// precomputed table of `e^{i theta_n}`, so that `e^{i m theta_n}` is a
/// table lookup.
#[derive(Debug, Clone)]
pub struct SeparationOracle {
    table: Vec<Complex64>,
}

impl SeparationOracle {
    pub fn new(grid_n: usize) -> Self {
        let n = grid_n.max(16);
        let table = (0..n).map(|i| Complex64::from_polar(1.0, TAU * i as f64 / n as f64)).collect();
        Self { table }
    }

    pub fn grid_n(&self) -> usize {
        self.table.len()
    }

    /// Minimum over `theta` of `|z_i(theta + phi) - z_j(theta)|^2`.
    pub fn min_sq_distance(&self, ti: &AgentTrochoid, tj: &AgentTrochoid, phi: f64) -> f64 {
        let n = self.table.len();
        let m = ti.harmonic();
        // position terms at theta = 0 of each mode, and the constant offset
        let p = Complex64::from_polar(ti.c_r, phi + ti.phi_r) - Complex64::from_polar(tj.c_r, tj.phi_r);
        let q = Complex64::from_polar(ti.c_d, m as f64 * phi + ti.phi_d)
            - Complex64::from_polar(tj.c_d, tj.phi_d);
        let c = (ti.cor - tj.cor).to_complex();
        let step = m.rem_euclid(n as i64) as usize;
        let (mut best, mut arg) = (f64::INFINITY, 0usize);
        let mut idx = 0usize;
        for (i, e) in self.table.iter().enumerate() {
            let v = (p * e + q * self.table[idx] + c).norm_sqr();
            if v < best {
                best = v;
                arg = i;
            }
            idx += step;
            if idx >= n {
                idx -= n;
            }
        }
        let h = TAU / n as f64;
        let exact = |theta: f64| {
            (ti.z_at_phase(theta + phi) - tj.z_at_phase(theta)).norm_sqr()
        };
        let c = arg as f64 * h;
        let (_, refined) = brent_minimize(exact, c - h, c + h, 1e-14);
        refined.min(best)
    }
}

/// Brute-force `delta^2_min` over a `grid_n`-point phase grid with local
/// refinement.
pub fn brute_force_min_separation(
    ti: &AgentTrochoid,
    tj: &AgentTrochoid,
    phi: f64,
    grid_n: usize,
    d_ct: f64,
) -> f64 {
    SeparationOracle::new(grid_n).min_sq_distance(ti, tj, phi) - d_ct * d_ct
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    BruteForce,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InjectionEntry {
    /// Path carrying the injected agent (1-based).
    pub path: usize,
    /// The other path's original agent (1-based).
    pub other: usize,
    pub offset: InjectionOffset,
    pub delta_sq: f64,
    pub method: Method,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathPlan {
    pub path: usize,
    pub feasible_offsets: Vec<InjectionOffset>,
    /// Longest time between visits of a fixed point on the path.
    pub refresh_period: f64,
    /// Smallest separation between agents sharing this path, minus `d_CT`;
    /// `None` when the path carries a single agent.
    pub same_path_margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectionPlan {
    pub d_ct: f64,
    pub period: f64,
    pub entries: Vec<InjectionEntry>,
    pub paths: Vec<PathPlan>,
    pub agent_count: usize,
    /// True when every pair of agents placed on different paths, including
    /// the injected ones, stays at least `d_CT` apart.
    pub mutually_compatible: bool,
}

impl InjectionPlan {
    pub fn all_feasible(&self) -> bool {
        self.paths.iter().all(|p| p.feasible_offsets.len() == InjectionOffset::ALL.len())
    }
}

/// Refresh period of a path carrying agents at the given phase offsets.
pub fn refresh_period(period: f64, offsets: &[f64]) -> f64 {
    let mut phases: Vec<f64> = offsets.iter().map(|p| p.rem_euclid(TAU)).collect();
    phases.sort_by(f64::total_cmp);
    phases.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    if phases.is_empty() {
        return period;
    }
    let gaps = phases.windows(2).map(|w| w[1] - w[0]);
    let wrap = phases[0] + TAU - phases[phases.len() - 1];
    period * gaps.fold(wrap, f64::max) / TAU
}

/// Evaluates the eighteen added constraints and reports which offsets each
/// path can take.
pub fn injection_feasible(trochoids: &[AgentTrochoid; 3], d_ct: f64) -> Result<InjectionPlan> {
    for tr in trochoids {
        require_epi(tr)?;
    }
    let mut entries = Vec::with_capacity(18);
    let oracle = std::cell::OnceCell::new();
    for i in 0..3 {
        for offset in InjectionOffset::ALL {
            for j in (0..3).filter(|&j| j != i) {
                let (ti, tj) = (&trochoids[i], &trochoids[j]);
                let closed = match offset {
                    InjectionOffset::Half => min_separation_phase_pi(ti, tj, d_ct),
                    _ => min_separation(ti, tj, offset.radians(), d_ct),
                };
                let (delta_sq, method) = match closed {
                    Ok(v) => (v, Method::ClosedForm),
                    Err(Error::SignDegenerate) => {
                        let o = oracle.get_or_init(|| SeparationOracle::new(100_000));
                        (o.min_sq_distance(ti, tj, offset.radians()) - d_ct * d_ct, Method::BruteForce)
                    }
                    Err(e) => return Err(e),
                };
                entries.push(InjectionEntry { path: i + 1, other: j + 1, offset, delta_sq, method });
            }
        }
    }

    let period = trochoids[0].period();
    let mut paths = Vec::with_capacity(3);
    for i in 0..3 {
        let feasible_offsets: Vec<_> = InjectionOffset::ALL
            .into_iter()
            .filter(|o| {
                entries
                    .iter()
                    .filter(|e| e.path == i + 1 && e.offset == *o)
                    .all(|e| e.delta_sq >= 0.0)
            })
            .collect();
        let phases: Vec<f64> =
            std::iter::once(0.0).chain(feasible_offsets.iter().map(|o| o.radians())).collect();
        let tr = &trochoids[i];
        let mut same_path_margin: Option<f64> = None;
        for (a, pa) in phases.iter().enumerate() {
            for pb in &phases[a + 1..] {
                let o = oracle.get_or_init(|| SeparationOracle::new(100_000));
                let d = o.min_sq_distance(tr, tr, pa - pb).max(0.0).sqrt() - d_ct;
                same_path_margin = Some(same_path_margin.map_or(d, |m| m.min(d)));
            }
        }
        paths.push(PathPlan {
            path: i + 1,
            refresh_period: refresh_period(period, &phases),
            same_path_margin,
            feasible_offsets,
        });
    }

    let mut mutually_compatible = true;
    for i in 0..3 {
        for j in i + 1..3 {
            let pi = std::iter::once(0.0).chain(paths[i].feasible_offsets.iter().map(|o| o.radians()));
            for a in pi {
                let pj = std::iter::once(0.0).chain(paths[j].feasible_offsets.iter().map(|o| o.radians()));
                for b in pj {
                    if min_separation(&trochoids[i], &trochoids[j], a - b, d_ct)? < 0.0 {
                        mutually_compatible = false;
                    }
                }
            }
        }
    }

    let agent_count = 3 + paths.iter().map(|p| p.feasible_offsets.len()).sum::<usize>();
    Ok(InjectionPlan { d_ct, period, entries, paths, agent_count, mutually_compatible })
}

/// The added constraints as linear disjunctions in `(R_c, d_c)`:
/// `|a R_c - b d_c| >= d_CT` with `a = |alpha_ir e^{i phi} - alpha_jr|` and
/// `b = |alpha_id e^{i m phi} - alpha_jd|`.
pub fn injection_constraints(eig: &Eigenstructure, d_ct: f64) -> Result<Vec<Constraint>> {
    if eig.trochoid_type != TrochoidType::Epitrochoid {
        return Err(Error::UnsupportedType);
    }
    let m = eig.harmonic() as f64;
    let (r, d) = (eig.alpha.r, eig.alpha.d);
    let mut out = Vec::with_capacity(18);
    for i in 0..3 {
        for offset in InjectionOffset::ALL {
            let phi = offset.radians();
            for j in (0..3).filter(|&j| j != i) {
                let a = (Complex64::from_polar(r[i], phi) - r[j]).norm();
                let b = (Complex64::from_polar(d[i], m * phi) - d[j]).norm();
                let tag = ConstraintTag::Injection { path: i + 1, other: j + 1, offset };
                out.push(Constraint::abs_difference_at_least(a, b, d_ct, tag));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{trochoid_coefficients, PythagoreanTriple};
    use std::f64::consts::PI;

    fn fig3() -> [AgentTrochoid; 3] {
        let t = PythagoreanTriple::new(5, 12, 13).unwrap();
        let eig = Eigenstructure::from_design(t, 2, TrochoidType::Epitrochoid).unwrap();
        trochoid_coefficients(&eig, 2400.0, 1525.0)
    }

    fn close(p: Point2, x: f64, y: f64) -> bool {
        (p.x - x).abs() <= 2e-3 && (p.y - y).abs() <= 2e-3
    }

    #[test]
    fn fig3_markers() {
        let tr = fig3();
        assert!(close(injected_position(&tr[0], PI / 2.0, 0.0).unwrap(), 0.0, -6.304));
        assert!(close(injected_position(&tr[0], PI, 0.0).unwrap(), 3.528, 0.0));
        assert!(close(injected_position(&tr[1], PI / 2.0, 0.0).unwrap(), 0.0, 6.813));
    }

    #[test]
    fn quadrature_matches_even_k_formula() {
        let tr = fig3();
        let d_ct = 0.5;
        for i in 0..3 {
            for j in 0..3 {
                if i == j {
                    continue;
                }
                let (ri, rj) = (tr[i].r_param, tr[j].r_param);
                let (di, dj) = (tr[i].d_param, tr[j].d_param);
                let want = (3.0 * ri.hypot(rj) - di.hypot(dj)).powi(2) - d_ct * d_ct;
                let got = min_separation_phase_quadrature(&tr[i], &tr[j], d_ct).unwrap();
                assert!((got - want).abs() < 1e-9 * want.abs().max(1.0));
                let three = min_separation(&tr[i], &tr[j], 1.5 * PI, d_ct).unwrap();
                assert!((got - three).abs() < 1e-9 * got.abs().max(1.0));
            }
        }
    }

    #[test]
    fn half_offset_matches_general_form() {
        let tr = fig3();
        for i in 0..3 {
            for j in (0..3).filter(|&j| j != i) {
                let a = min_separation_phase_pi(&tr[i], &tr[j], 0.5).unwrap();
                let b = min_separation(&tr[i], &tr[j], PI, 0.5).unwrap();
                assert!((a - b).abs() < 1e-9 * b.abs().max(1.0));
            }
        }
    }

    #[test]
    fn concentric_circles() {
        let t = PythagoreanTriple::new(5, 12, 13).unwrap();
        let eig = Eigenstructure::from_design(t, 2, TrochoidType::Epitrochoid).unwrap();
        let tr = trochoid_coefficients(&eig, 2500.0, 0.0);
        let (ri, rj) = (tr[0].r_param, tr[1].r_param);
        let q = min_separation_phase_quadrature(&tr[0], &tr[1], 0.5).unwrap();
        assert!((q - (3.0 * ri.hypot(rj)).powi(2) + 0.25).abs() < 1e-9);
        let p = min_separation_phase_pi(&tr[0], &tr[1], 0.5).unwrap();
        // opposite-sign c_r: the agents sit on the same side after a half turn
        let want = (tr[0].c_r.abs() - tr[1].c_r.abs()).powi(2) - 0.25;
        assert!((p - want).abs() < 1e-9);
    }

    #[test]
    fn brute_force_self_and_agreement() {
        let tr = fig3();
        let v = brute_force_min_separation(&tr[0], &tr[0], 0.0, 1000, 0.5);
        assert!((v + 0.25).abs() < 1e-12);
        let closed = min_separation_phase_quadrature(&tr[0], &tr[1], 0.5).unwrap();
        let a = brute_force_min_separation(&tr[0], &tr[1], PI / 2.0, 10_000, 0.5);
        let b = brute_force_min_separation(&tr[0], &tr[1], PI / 2.0, 20_000, 0.5);
        assert!((a - closed).abs() < 1e-6 * closed.abs().max(1.0));
        assert!((a - b).abs() < 1e-8);
    }

    #[test]
    fn fig3_plan() {
        let plan = injection_feasible(&fig3(), 0.5).unwrap();
        assert_eq!(plan.entries.len(), 18);
        assert!(plan.all_feasible());
        assert_eq!(plan.agent_count, 12);
        assert!(plan.mutually_compatible);
        for p in &plan.paths {
            assert!((p.refresh_period - plan.period / 4.0).abs() < 1e-12);
            assert!(p.same_path_margin.unwrap() >= 0.0);
        }
    }

    #[test]
    fn circle_design_plan() {
        let t = PythagoreanTriple::new(5, 12, 13).unwrap();
        let eig = Eigenstructure::from_design(t, 2, TrochoidType::Epitrochoid).unwrap();
        let plan = injection_feasible(&trochoid_coefficients(&eig, 2500.0, 0.0), 0.5).unwrap();
        assert!(plan.all_feasible());
    }

    #[test]
    fn hypotrochoid_rejected() {
        let t = PythagoreanTriple::new(5, 12, 13).unwrap();
        let eig = Eigenstructure::from_design(t, 2, TrochoidType::Hypotrochoid).unwrap();
        let tr = trochoid_coefficients(&eig, 100.0, 50.0);
        assert_eq!(injected_position(&tr[0], PI, 0.0).unwrap_err(), Error::UnsupportedType);
        assert_eq!(injection_feasible(&tr, 0.5).unwrap_err(), Error::UnsupportedType);
        assert_eq!(injection_constraints(&eig, 0.5).unwrap_err(), Error::UnsupportedType);
    }

    #[test]
    fn refresh_periods() {
        assert!((refresh_period(8.0, &[0.0]) - 8.0).abs() < 1e-15);
        assert!((refresh_period(8.0, &[0.0, PI]) - 4.0).abs() < 1e-12);
        assert!((refresh_period(8.0, &[0.0, PI / 2.0]) - 6.0).abs() < 1e-12);
    }
}
