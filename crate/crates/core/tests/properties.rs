use std::f64::consts::TAU;

use nalgebra::Matrix3;
use proptest::prelude::*;
use trochoid_core::design::{
    build_line_laplacian, initial_positions, recompute_from_positions, trochoid_coefficients, AgentTrochoid,
    DesignSpec, Eigenstructure, PythagoreanTriple, TrochoidType,
};
use trochoid_core::geometry::Point2;
use trochoid_core::injection::{min_separation, SeparationOracle};
use trochoid_core::quadrature::adaptive_simpson;
use trochoid_core::region::{
    apply_perturbation_margin, classify_point, constraint_halfplanes, enumerate_regions, Constraint, ConstraintTag,
};
use trochoid_core::sim::{integrate_cp, SimConfig};
use trochoid_core::trajectory::{
    extremal_origin_distances, pairwise_extremal_distances, peak_speed_and_turn_rate, profile_extrema,
    sampled_extrema, speed_profile, turn_rate_at_peak,
};

fn arb_triple() -> impl Strategy<Value = PythagoreanTriple> {
    (2u32..=7, 1u32..7, 1u32..=3, any::<bool>()).prop_filter_map("n < m", |(m, n, s, swap)| {
        (n < m).then(|| {
            let (a, b, c) = (s * (m * m - n * n), s * 2 * m * n, s * (m * m + n * n));
            let (a, b) = if swap { (b, a) } else { (a, b) };
            PythagoreanTriple::new(a, b, c).unwrap()
        })
    })
}

fn arb_type() -> impl Strategy<Value = TrochoidType> {
    prop_oneof![Just(TrochoidType::Epitrochoid), Just(TrochoidType::Hypotrochoid)]
}

fn arb_design(types: impl Strategy<Value = TrochoidType>) -> impl Strategy<Value = Eigenstructure> {
    (arb_triple(), 2u32..=8, types)
        .prop_filter_map("degenerate gains", |(t, k, ty)| Eigenstructure::from_design(t, k, ty).ok())
}

fn arb_point() -> impl Strategy<Value = (f64, f64)> {
    (1.0f64..4000.0, 0.0f64..4000.0)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn scale_of(tr: &AgentTrochoid) -> f64 {
    tr.c_r.abs() + tr.c_d.abs() + tr.c_0.abs()
}

/// A design together with the Fig. 2 distance bounds.
fn arb_spec_design() -> impl Strategy<Value = (Eigenstructure, DesignSpec)> {
    (arb_triple(), 2u32..=8, arb_type()).prop_filter_map("degenerate gains", |(t, k, ty)| {
        let eig = Eigenstructure::from_design(t, k, ty).ok()?;
        Some((eig, DesignSpec::new(k, t, ty, 1.5, 15.0, 0.5, 15.0)))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigenvalues_match_dense_solver(eig in arb_design(arb_type())) {
        let l = build_line_laplacian();
        let bl = Matrix3::from_fn(|i, j| eig.beta.0[i] * l[i][j]);
        let mut ev: Vec<f64> = bl.complex_eigenvalues().iter().map(|c| {
            assert!(c.im.abs() <= 1e-9 * c.re.abs().max(1.0));
            c.re
        }).collect();
        ev.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap());
        let scale = ev[2].abs();
        prop_assert!(ev[0].abs() <= 1e-9 * scale);
        let (small, large) = (ev[1], ev[2]);
        let h = eig.harmonic() as f64;
        if h.abs() > 1.0 {
            prop_assert!(rel(large / small, h) <= 1e-9);
            prop_assert!(rel(small, eig.lambda_min) <= 1e-9);
            prop_assert!(rel(large, eig.lambda_max) <= 1e-9);
        } else {
            prop_assert!(rel(large / small, h) <= 1e-9);
            prop_assert!(rel(eig.lambda_max, h * eig.lambda_min) <= 1e-12);
        }
    }

    #[test]
    fn third_agent_alphas_agree(eig in arb_design(arb_type())) {
        prop_assert!(rel(eig.alpha.r[2], eig.alpha.d[2]) <= 1e-12);
    }

    #[test]
    fn modal_round_trip_from_any_positions(
        eig in arb_design(arb_type()),
        xs in prop::array::uniform3((-10.0f64..10.0, -10.0f64..10.0)),
    ) {
        let x0 = xs.map(|(x, y)| Point2::new(x, y));
        let modal = recompute_from_positions(&eig, &x0).unwrap();
        let tr = modal.trochoids(&eig);
        for i in 0..3 {
            prop_assert!(tr[i].position(0.0).distance(x0[i]) <= 1e-9 * 10.0);
            prop_assert!(tr[i].cor.distance(tr[0].cor) <= 1e-12);
        }
    }

    #[test]
    fn normalised_placement_recovers_design((r_c, d_c) in arb_point(), eig in arb_design(arb_type())) {
        let x0 = initial_positions(&eig, r_c, d_c).unwrap().positions;
        let m = recompute_from_positions(&eig, &x0).unwrap();
        prop_assert!(rel(m.r_c, r_c) <= 1e-9);
        prop_assert!((m.d_c - d_c).abs() <= 1e-9 * r_c.max(d_c));
        let sc = x0.iter().map(|p| p.norm()).fold(0.0, f64::max);
        prop_assert!(m.c_0 <= 1e-12 * sc.max(1.0));
    }

    #[test]
    fn paths_close_after_one_period((r_c, d_c) in arb_point(), eig in arb_design(arb_type()), t in 0.0f64..1.0) {
        let tr = trochoid_coefficients(&eig, r_c, d_c);
        let period = eig.period();
        for a in &tr {
            let t = t * period;
            prop_assert!(a.position(t).distance(a.position(t + period)) <= 1e-9 * scale_of(a).max(1e-12));
        }
    }

    #[test]
    fn derivatives_match_finite_differences(
        (r_c, d_c) in arb_point(),
        eig in arb_design(arb_type()),
        theta in 0.0f64..TAU,
    ) {
        let tr = trochoid_coefficients(&eig, r_c, d_c);
        let h = 1e-5;
        for a in &tr {
            let s = scale_of(a);
            let fd = (a.z_at_phase(theta + h) - a.z_at_phase(theta - h)) / (2.0 * h);
            prop_assert!((fd - a.dz_at_phase(theta)).norm() <= 1e-6 * s.max(1e-12) * 81.0);
            let Ok(sp) = speed_profile(a, theta) else { continue };
            if sp.v < 1e-3 * s {
                continue;
            }
            let heading = |x: f64| {
                let d = a.dz_at_phase(x);
                d.im.atan2(d.re)
            };
            let mut dh = heading(theta + h) - heading(theta - h);
            dh = (dh + std::f64::consts::PI).rem_euclid(TAU) - std::f64::consts::PI;
            let fd_omega = dh / (2.0 * h);
            prop_assert!((fd_omega - sp.omega).abs() <= 1e-4 * sp.omega.abs().max(1.0), "{} vs {}", fd_omega, sp.omega);
        }
    }

    #[test]
    fn peak_speed_and_turn_rate_identity((r_c, d_c) in arb_point(), eig in arb_design(Just(TrochoidType::Epitrochoid))) {
        let tr = trochoid_coefficients(&eig, r_c, d_c);
        for a in &tr {
            let peak = peak_speed_and_turn_rate(a);
            if a.c_r != 0.0 {
                let u = a.d_param / a.r_param;
                prop_assert!(rel(peak.omega, turn_rate_at_peak(eig.k, u)) <= 1e-12);
            }
            if let Ok(e) = profile_extrema(a, 2048) {
                prop_assert!(rel(e.v_max, peak.v) <= 1e-9);
            }
        }
    }

    #[test]
    fn extremal_distances_match_sampling((r_c, d_c) in arb_point(), eig in arb_design(arb_type())) {
        let tr = trochoid_coefficients(&eig, r_c, d_c);
        for a in &tr {
            let e = extremal_origin_distances(a);
            let (lo, hi) = sampled_extrema(4096, |th| a.z_at_phase(th).norm());
            let s = scale_of(a).max(1e-12);
            prop_assert!((e.d_min - lo).abs() <= 1e-8 * s);
            prop_assert!((e.d_max - hi).abs() <= 1e-8 * s);
            prop_assert!(a.position(e.t_min).norm() <= e.d_min + 1e-8 * s);
        }
        for (i, j) in [(0, 1), (1, 2), (0, 2)] {
            let (lo, hi) = pairwise_extremal_distances(&tr[i], &tr[j]);
            let (slo, shi) = sampled_extrema(4096, |th| (tr[i].z_at_phase(th) - tr[j].z_at_phase(th)).norm());
            let s = (scale_of(&tr[i]) + scale_of(&tr[j])).max(1e-12);
            prop_assert!((lo - slo).abs() <= 1e-8 * s && (hi - shi).abs() <= 1e-8 * s);
        }
    }

    #[test]
    fn injection_closed_form_matches_grid_at_any_offset(
        (r_c, d_c) in arb_point(),
        eig in arb_design(Just(TrochoidType::Epitrochoid)),
        phi in 0.0f64..TAU,
    ) {
        let tr = trochoid_coefficients(&eig, r_c, d_c);
        let oracle = SeparationOracle::new(20_000);
        for i in 0..3 {
            for j in 0..3 {
                let closed = min_separation(&tr[i], &tr[j], phi, 0.0).unwrap();
                let grid = oracle.min_sq_distance(&tr[i], &tr[j], phi);
                let s = (scale_of(&tr[i]) + scale_of(&tr[j])).powi(2).max(1e-300);
                prop_assert!((closed - grid).abs() <= 1e-10 * s, "{} vs {}", closed, grid);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn region_agrees_with_pointwise_classification((eig, spec) in arb_spec_design(), seed in any::<u64>()) {
        let set = constraint_halfplanes(&eig.alpha, &spec);
        let Ok((r_max, d_max)) = set.bounds() else { return Ok(()) };
        let region = enumerate_regions(&set);
        let mut state = seed | 1;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let tol = 1e-7 * r_max.hypot(d_max);
        for _ in 0..10_000 {
            let (r, d) = (next() * r_max, next() * d_max);
            let pointwise = classify_point(&set, r, d).is_feasible();
            match &region {
                Ok(reg) => {
                    if reg.boundary_distance(r, d) > tol {
                        prop_assert_eq!(reg.contains(r, d), pointwise, "({}, {})", r, d);
                    }
                }
                Err(_) => {
                    // An empty region leaves at most slivers below the area cut.
                    prop_assert!(!pointwise || set.constraints.iter().any(|c| near_boundary(c, r, d, tol)));
                }
            }
        }
    }

    #[test]
    fn raising_origin_min_only_shrinks((eig, spec) in arb_spec_design(), extra in 0.01f64..2.0) {
        let loose = constraint_halfplanes(&eig.alpha, &spec);
        let tight = apply_perturbation_margin(&loose, extra).unwrap();
        let area = |s| enumerate_regions(s).map_or(0.0, |r| r.total_area());
        prop_assert!(area(&tight) <= area(&loose) * (1.0 + 1e-9) + 1e-9);
        let Ok((r_max, d_max)) = loose.bounds() else { return Ok(()) };
        for a in 0..60 {
            for b in 0..60 {
                let (r, d) = (r_max * a as f64 / 59.0, d_max * b as f64 / 59.0);
                if classify_point(&tight, r, d).is_feasible() {
                    prop_assert!(classify_point(&loose, r, d).is_feasible());
                }
            }
        }
    }

    #[test]
    fn constraints_mean_what_they_say((r_c, d_c) in arb_point(), (eig, spec) in arb_spec_design()) {
        let set = constraint_halfplanes(&eig.alpha, &spec);
        let tr = trochoid_coefficients(&eig, r_c, d_c);
        let origin = tr.map(|a| sampled_extrema(4096, |th| a.z_at_phase(th).norm()));
        let pair = |i: usize, j: usize| {
            sampled_extrema(4096, |th| (tr[i - 1].z_at_phase(th) - tr[j - 1].z_at_phase(th)).norm())
        };
        for c in &set.constraints {
            let (value, bound, lower) = match c.tag() {
                ConstraintTag::OriginMin { agent } => (origin[agent - 1].0, spec.d0_min, true),
                ConstraintTag::OriginMax { agent } => (origin[agent - 1].1, spec.d0_max, false),
                ConstraintTag::PairMin { i, j } => (pair(i, j).0, spec.d_ct, true),
                ConstraintTag::PairMax { i, j } => (pair(i, j).1, spec.d_cr, false),
                ConstraintTag::NonNegativeRc => (r_c, 0.0, true),
                ConstraintTag::NonNegativeDc => (d_c, 0.0, true),
                _ => continue,
            };
            if (value - bound).abs() <= 1e-7 * value.abs().max(bound).max(1.0) {
                continue;
            }
            let truth = if lower { value >= bound } else { value <= bound };
            prop_assert_eq!(c.holds(r_c, d_c), truth, "{:?}: value {} bound {}", c.tag(), value, bound);
        }
    }

    #[test]
    fn gain_scaling_is_time_scaling(eig in arb_design(arb_type()), (r_c, d_c) in arb_point(), s in 0.1f64..5.0) {
        let x0 = initial_positions(&eig, r_c, d_c).unwrap().positions;
        let period = eig.period();
        let base = SimConfig { dt: period / 4000.0, duration: period / 4.0, ..SimConfig::default() };
        let fast = SimConfig { dt: base.dt / s, duration: base.duration / s, scale: s, ..SimConfig::default() };
        let a = integrate_cp(&eig.beta, &x0, &base).unwrap();
        let b = integrate_cp(&eig.beta, &x0, &fast).unwrap();
        prop_assert_eq!(a.positions.len(), b.positions.len());
        let sc = x0.iter().map(|p| p.norm()).fold(0.0, f64::max);
        for (pa, pb) in a.positions.iter().zip(&b.positions) {
            for i in 0..3 {
                prop_assert!(pa[i].distance(pb[i]) <= 1e-9 * sc.max(1.0));
            }
        }
    }
}

fn near_boundary(c: &Constraint, r: f64, d: f64, tol: f64) -> bool {
    let hs = match c {
        Constraint::Single(h) => vec![*h],
        Constraint::Either(pair) => pair.to_vec(),
    };
    hs.iter().any(|h| h.slack(r, d).abs() <= tol * h.a.hypot(h.b))
}

#[test]
fn simpson_integrates_known_functions() {
    let q = adaptive_simpson(|x| x.powi(3) - 2.0 * x, 0.0, 2.0, 1e-12, 10_000);
    assert!(q.converged && (q.value - 0.0).abs() < 1e-12);
    let q = adaptive_simpson(f64::sin, 0.0, std::f64::consts::PI, 1e-12, 100_000);
    assert!(q.converged && (q.value - 2.0).abs() < 1e-10);
    // circumference of an ellipse with semi-axes 2 and 1
    let q = adaptive_simpson(|t| (4.0 * t.sin().powi(2) + t.cos().powi(2)).sqrt(), 0.0, TAU, 1e-12, 1_000_000);
    assert!((q.value - 9.688448220547675).abs() < 1e-9, "{}", q.value);
}
