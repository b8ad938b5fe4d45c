use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use log::{info, warn};
use serde::Serialize;
use trochoid_core::design::{initial_positions, trochoid_coefficients, DesignSpec, Eigenstructure};
use trochoid_core::geometry::Point2;
use trochoid_core::injection::{injected_position, injection_constraints, injection_feasible, InjectionOffset, InjectionPlan};
use trochoid_core::region::{
    apply_perturbation_margin, classify_point, constraint_halfplanes, cusp_exclusion_bands, cusp_ray_slopes,
    enumerate_regions, Classification, ConstraintSet, FeasibleRegion,
};
use trochoid_core::sim::{
    closed_form_deviation, cp_velocities, integrate_cp, modal_amplitudes, perturbation_monte_carlo, unicycle_swarm,
    MonteCarloSummary, SimConfig,
};
use trochoid_core::trajectory::{
    coverage, has_cusp, peak_speed_and_turn_rate, physical_speed, profile_extrema, write_csv, CoverageReport,
    ProfileExtrema, TrajectorySample,
};
use trochoid_core::Error;

use crate::config::{DesignConfig, PointChoice, SimulationConfig};
use crate::document::{DesignDocument, DesignPoint, Provenance, RegionOptions, SCHEMA_VERSION};
use crate::svg::{render, Figure, AGENT_COLORS};

#[derive(Debug, Parser)]
#[command(name = "trochoid", version, about = "Design and check trochoidal paths for a three-agent swarm")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Directory for output files.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    /// Design config (design) or simulation config (simulate).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Gain scaling factor for simulate.
    #[arg(long, global = true)]
    pub scale: Option<f64>,
    /// Perturbation margin.
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    #[arg(long, global = true)]
    pub epsilon_cusp: Option<f64>,
    /// Ignore the configured point and use the deepest point of the largest
    /// feasible polygon.
    #[arg(long, global = true)]
    pub auto_point: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Feasible region, design point and initial positions.
    Design,
    /// Integrate the protocol and track it with unicycles.
    Simulate {
        #[arg(long)]
        design: PathBuf,
    },
    /// Check where extra agents can join each path.
    Inject {
        #[arg(long)]
        design: PathBuf,
    },
    /// Swept sensing area, speeds and turn rates.
    Coverage {
        #[arg(long)]
        design: PathBuf,
        #[arg(long)]
        r_sense: Option<f64>,
    },
    /// Seeded Monte Carlo over perturbed initial positions.
    Perturb {
        #[arg(long)]
        design: PathBuf,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
    /// Write an SVG of the regions, paths or speeds.
    Plot {
        #[arg(long)]
        design: PathBuf,
        #[arg(long, default_value = "regions")]
        what: String,
    },
}

/// 2 for an empty feasible region, 1 for anything else.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    if err.chain().any(|e| e.downcast_ref::<Error>() == Some(&Error::EmptyRegion)) {
        2
    } else {
        1
    }
}

pub fn run(cli: &Cli) -> anyhow::Result<()> {
    fs::create_dir_all(&cli.out_dir).with_context(|| format!("creating {}", cli.out_dir.display()))?;
    match &cli.command {
        Command::Design => design(cli),
        Command::Simulate { design } => simulate(cli, design),
        Command::Inject { design } => inject(cli, design),
        Command::Coverage { design, r_sense } => coverage_cmd(cli, design, *r_sense),
        Command::Perturb { design, trials } => perturb(cli, design, *trials),
        Command::Plot { design, what } => plot(cli, design, what),
    }
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    info!("wrote {}", path.display());
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serialisable");
    s.push('\n');
    s
}

pub fn constraint_set(spec: &DesignSpec, eig: &Eigenstructure, opts: &RegionOptions) -> anyhow::Result<ConstraintSet> {
    let mut set = constraint_halfplanes(&eig.alpha, spec);
    if opts.delta > 0.0 {
        set = apply_perturbation_margin(&set, opts.delta)?;
    }
    if opts.subtract_cusp_bands {
        set = set.extended(cusp_exclusion_bands(&eig.alpha, spec.trochoid_type, spec.k, spec.epsilon_cusp));
    }
    Ok(set)
}

fn design(cli: &Cli) -> anyhow::Result<()> {
    let Some(path) = &cli.config else { bail!("design needs --config <file>") };
    let text = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let mut cfg = DesignConfig::parse(std::str::from_utf8(&text)?).with_context(|| format!("parsing {}", path.display()))?;
    if let Some(d) = cli.delta {
        cfg.delta = d;
    }
    if let Some(e) = cli.epsilon_cusp {
        cfg.epsilon_cusp = e;
    }
    if cli.auto_point {
        cfg.point = PointChoice::default();
    }
    let spec = cfg.spec();
    spec.validate()?;
    let eig = Eigenstructure::from_design(spec.triple, spec.k, spec.trochoid_type)?;
    let opts = RegionOptions { delta: cfg.delta, subtract_cusp_bands: cfg.subtract_cusp_bands };
    let set = constraint_set(&spec, &eig, &opts)?;
    let slopes = cusp_ray_slopes(&eig.alpha, spec.trochoid_type, spec.k);

    let region = match enumerate_regions(&set) {
        Ok(r) => r,
        Err(Error::EmptyRegion) => {
            let (r_max, d_max) = set.bounds()?;
            let svg = regions_svg(None, (r_max, d_max), &slopes, None);
            write(&cli.out_dir.join("regions.svg"), &svg)?;
            return Err(Error::EmptyRegion.into());
        }
        Err(e) => return Err(e.into()),
    };
    info!("{} feasible polygon(s)", region.polygons.len());

    let (r_c, d_c, auto) = match cfg.point {
        PointChoice::Explicit { r_c, d_c } => (r_c, d_c, false),
        PointChoice::Auto(_) => {
            let p = region.auto_point().ok_or(Error::EmptyRegion)?;
            (p.x, p.y, true)
        }
    };
    if !(r_c >= 0.0 && d_c >= 0.0 && r_c.is_finite() && d_c.is_finite()) {
        bail!("point: R_c and d_c must be finite and non-negative");
    }
    let violated = match classify_point(&set, r_c, d_c) {
        Classification::Feasible => Vec::new(),
        Classification::Infeasible(tags) => {
            warn!("design point ({r_c}, {d_c}) violates {} constraint(s)", tags.len());
            tags
        }
    };
    let placement = initial_positions(&eig, r_c, d_c)?;
    let doc = DesignDocument {
        schema_version: SCHEMA_VERSION,
        spec,
        eigenstructure: eig,
        region_options: opts,
        region,
        cusp_slopes: slopes,
        point: DesignPoint { r_c, d_c, auto, feasible: violated.is_empty(), violated },
        placement,
        trochoids: trochoid_coefficients(&eig, r_c, d_c),
        injection: None,
        provenance: Provenance::for_input(&text),
    };
    doc.save(&cli.out_dir.join("design.json"))?;
    let bounds = (doc.region.r_max, doc.region.d_max);
    write(&cli.out_dir.join("regions.svg"), &regions_svg(Some(&doc.region), bounds, &slopes, Some(Point2::new(r_c, d_c))))?;
    write(&cli.out_dir.join("regions.csv"), &regions_csv(&doc.region))?;
    Ok(())
}

fn regions_csv(region: &FeasibleRegion) -> String {
    let mut s = String::from("polygon,vertex,r_c,d_c\n");
    for (i, p) in region.polygons.iter().enumerate() {
        for (j, v) in p.vertices.iter().enumerate() {
            s.push_str(&format!("{},{},{:.8e},{:.8e}\n", i + 1, j + 1, v.x, v.y));
        }
    }
    s
}

pub fn regions_svg(
    region: Option<&FeasibleRegion>,
    (r_max, d_max): (f64, f64),
    slopes: &[Option<f64>; 3],
    point: Option<Point2>,
) -> String {
    let corners = [Point2::ORIGIN, Point2::new(r_max, d_max)];
    let mut f = Figure::new("Feasible (R_c, d_c)", "R_c", "d_c", &corners);
    match region {
        Some(r) => {
            for p in &r.polygons {
                f.polygon(&p.vertices, "#6b8fd6");
            }
        }
        None => f.note("no feasible region"),
    }
    for (i, s) in slopes.iter().enumerate() {
        if let Some(s) = s {
            let far = 2.0 * r_max.max(d_max / s.max(f64::MIN_POSITIVE));
            f.polyline(&[Point2::ORIGIN, Point2::new(far, s * far)], AGENT_COLORS[i], true);
        }
    }
    if let Some(p) = point {
        f.marker(p, "#000000", false);
    }
    render(&[f])
}

fn paths_svg(doc: &DesignDocument) -> anyhow::Result<String> {
    let n = 1441;
    let curves: Vec<Vec<Point2>> = doc
        .trochoids
        .iter()
        .map(|tr| (0..n).map(|i| tr.position_at_phase(std::f64::consts::TAU * i as f64 / (n - 1) as f64)).collect())
        .collect();
    let mut f = Figure::new("Agent paths", "x", "y", curves.iter().flatten()).equal_aspect();
    for (i, c) in curves.iter().enumerate() {
        f.polyline(c, AGENT_COLORS[i], false);
    }
    for (i, tr) in doc.trochoids.iter().enumerate() {
        f.marker(tr.position(0.0), AGENT_COLORS[i], false);
        if let Some(plan) = &doc.injection {
            for o in &plan.paths[i].feasible_offsets {
                f.marker(injected_position(tr, o.radians(), 0.0)?, AGENT_COLORS[i], true);
            }
        }
    }
    f.cross(doc.trochoids[0].cor, "#000000");
    Ok(render(&[f]))
}

fn speeds_svg(doc: &DesignDocument) -> String {
    let n = 1441;
    let period = doc.eigenstructure.period();
    let mut v_pts: Vec<Vec<Point2>> = Vec::new();
    let mut w_pts: Vec<Vec<Point2>> = Vec::new();
    for tr in &doc.trochoids {
        let (mut v, mut w) = (Vec::with_capacity(n), Vec::with_capacity(n));
        for i in 0..n {
            let t = period * i as f64 / (n - 1) as f64;
            let s = physical_speed(tr, t);
            v.push(Point2::new(t, tr.velocity(t).norm()));
            w.push(Point2::new(t, s.map_or(f64::NAN, |s| s.omega)));
        }
        v_pts.push(v);
        w_pts.push(w);
    }
    let mut fv = Figure::new("Speed", "t", "V", v_pts.iter().flatten());
    let mut fw = Figure::new("Turn rate", "t", "omega", w_pts.iter().flatten());
    for i in 0..3 {
        fv.polyline(&v_pts[i], AGENT_COLORS[i], false);
        fw.polyline(&w_pts[i], AGENT_COLORS[i], false);
    }
    render(&[fv, fw])
}

fn plot(cli: &Cli, design: &Path, what: &str) -> anyhow::Result<()> {
    let doc = DesignDocument::load(design)?;
    let svg = match what {
        "regions" => regions_svg(
            Some(&doc.region),
            (doc.region.r_max, doc.region.d_max),
            &doc.cusp_slopes,
            Some(Point2::new(doc.point.r_c, doc.point.d_c)),
        ),
        "paths" => paths_svg(&doc)?,
        "speeds" => speeds_svg(&doc),
        other => bail!("unknown plot kind {other:?}; expected regions, paths or speeds"),
    };
    write(&cli.out_dir.join(format!("plot_{what}.svg")), &svg)
}

#[derive(Debug, Serialize)]
struct TrackingSummary {
    agent: usize,
    max_error: f64,
    rms_error: f64,
    speed_saturated: bool,
    turn_rate_saturated: bool,
}

#[derive(Debug, Serialize)]
struct SimulationReport {
    schema_version: u32,
    design_sha256: String,
    config: SimConfig,
    samples: usize,
    max_closed_form_deviation: f64,
    max_modal_drift: f64,
    tracking: Option<Vec<TrackingSummary>>,
    provenance: Provenance,
}

fn simulate(cli: &Cli, design: &Path) -> anyhow::Result<()> {
    let design_bytes = fs::read(design).with_context(|| format!("reading {}", design.display()))?;
    let doc = DesignDocument::from_json(std::str::from_utf8(&design_bytes)?)
        .with_context(|| format!("parsing {}", design.display()))?;
    let mut sim = match &cli.config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            SimulationConfig::parse(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => SimulationConfig::default(),
    };
    if let Some(s) = cli.scale {
        sim.scale = s;
    }
    let eig = &doc.eigenstructure;
    let cfg = sim.resolve(eig.period());
    let x0 = doc.placement.positions;
    let run = integrate_cp(&eig.beta, &x0, &cfg)?;
    let beta = eig.beta.scaled(cfg.scale);
    let m = beta.protocol_matrix();
    let samples: Vec<TrajectorySample> = run
        .times
        .iter()
        .zip(&run.positions)
        .map(|(&t, pos)| {
            let u = cp_velocities(&beta, pos);
            let mut turn_rates = [f64::NAN; 3];
            for i in 0..3 {
                // u' = S M u
                let (mut ax, mut ay) = (0.0, 0.0);
                for j in 0..3 {
                    ax += m[i][j] * u[j].x;
                    ay += m[i][j] * u[j].y;
                }
                let n2 = u[i].x * u[i].x + u[i].y * u[i].y;
                if n2 > 0.0 {
                    turn_rates[i] = (u[i].x * ax + u[i].y * ay) / n2;
                }
            }
            TrajectorySample { t, positions: *pos, speeds: u.map(|u| u.norm()), turn_rates }
        })
        .collect();
    let mut csv = Vec::new();
    write_csv(&samples, &mut csv)?;
    write(&cli.out_dir.join("trajectory.csv"), std::str::from_utf8(&csv)?)?;

    let (r0, d0) = (doc.point.r_c, doc.point.d_c);
    let max_modal_drift = run
        .positions
        .iter()
        .map(|p| {
            let (r, d) = modal_amplitudes(eig, p);
            (r - r0).abs().max((d - d0).abs())
        })
        .fold(0.0, f64::max);
    let tracking = if sim.track && cfg.duration > 0.0 {
        let rep = unicycle_swarm(eig, &x0, &cfg)?;
        Some(
            rep.agents
                .iter()
                .enumerate()
                .map(|(i, a)| TrackingSummary {
                    agent: i + 1,
                    max_error: a.max_error,
                    rms_error: a.rms_error,
                    speed_saturated: a.speed_saturated,
                    turn_rate_saturated: a.turn_rate_saturated,
                })
                .collect(),
        )
    } else {
        None
    };
    let report = SimulationReport {
        schema_version: SCHEMA_VERSION,
        design_sha256: Provenance::for_input(&design_bytes).input_sha256,
        config: cfg,
        samples: samples.len(),
        max_closed_form_deviation: closed_form_deviation(&run, &doc.trochoids, cfg.scale),
        max_modal_drift,
        tracking,
        provenance: Provenance::for_input(&design_bytes),
    };
    write(&cli.out_dir.join("simulation.json"), &to_json(&report))
}

#[derive(Debug, Serialize)]
struct StartPoint {
    path: usize,
    offset: Option<InjectionOffset>,
    x: f64,
    y: f64,
}

#[derive(Debug, Serialize)]
struct InjectionReport {
    schema_version: u32,
    plan: InjectionPlan,
    start_points: Vec<StartPoint>,
    /// Feasible set once the added constraints are imposed.
    shrunken_region: Option<FeasibleRegion>,
    point_in_shrunken_region: bool,
}

fn inject(cli: &Cli, design: &Path) -> anyhow::Result<()> {
    let mut doc = DesignDocument::load(design)?;
    let plan = injection_feasible(&doc.trochoids, doc.spec.d_ct)?;
    let mut start_points = Vec::new();
    for (i, tr) in doc.trochoids.iter().enumerate() {
        let p = tr.position(0.0);
        start_points.push(StartPoint { path: i + 1, offset: None, x: p.x, y: p.y });
        for o in &plan.paths[i].feasible_offsets {
            let p = injected_position(tr, o.radians(), 0.0)?;
            start_points.push(StartPoint { path: i + 1, offset: Some(*o), x: p.x, y: p.y });
        }
    }
    let set = constraint_set(&doc.spec, &doc.eigenstructure, &doc.region_options)?
        .extended(injection_constraints(&doc.eigenstructure, doc.spec.d_ct)?);
    let shrunken_region = match enumerate_regions(&set) {
        Ok(r) => Some(r),
        Err(Error::EmptyRegion) => None,
        Err(e) => return Err(e.into()),
    };
    let report = InjectionReport {
        schema_version: SCHEMA_VERSION,
        point_in_shrunken_region: classify_point(&set, doc.point.r_c, doc.point.d_c).is_feasible(),
        plan: plan.clone(),
        start_points,
        shrunken_region,
    };
    info!("{} agents after injection", plan.agent_count);
    write(&cli.out_dir.join("injection.json"), &to_json(&report))?;
    doc.injection = Some(plan);
    doc.save(&cli.out_dir.join("design.json"))
}

#[derive(Debug, Serialize)]
struct AgentProfile {
    agent: usize,
    r_param: f64,
    d_param: f64,
    cusp: bool,
    /// Peak speed and the turn rate there, in physical time.
    peak_speed: f64,
    turn_rate_at_peak_speed: f64,
    /// Grid-refined extremes in physical time; absent at a cusp.
    extrema: Option<ProfileExtrema>,
}

#[derive(Debug, Serialize)]
struct CoverageOutput {
    schema_version: u32,
    coverage: CoverageReport,
    agents: Vec<AgentProfile>,
}

fn coverage_cmd(cli: &Cli, design: &Path, r_sense: Option<f64>) -> anyhow::Result<()> {
    let doc = DesignDocument::load(design)?;
    let r_sense = match r_sense.or(doc.spec.r_sense) {
        Some(r) => r,
        None => {
            warn!("R_sense not given; using 1");
            1.0
        }
    };
    let report = coverage(&doc.trochoids, r_sense)?;
    let agents = doc
        .trochoids
        .iter()
        .map(|tr| {
            let lam = tr.lambda_min;
            let peak = peak_speed_and_turn_rate(tr);
            AgentProfile {
                agent: tr.agent,
                r_param: tr.r_param,
                d_param: tr.d_param,
                cusp: has_cusp(tr, 1e-9),
                peak_speed: lam.abs() * peak.v,
                turn_rate_at_peak_speed: lam * peak.omega,
                extrema: profile_extrema(tr, 20_000).ok().map(|e| ProfileExtrema {
                    v_max: lam.abs() * e.v_max,
                    v_min: lam.abs() * e.v_min,
                    omega_abs_max: lam.abs() * e.omega_abs_max,
                    theta_omega_abs_max: e.theta_omega_abs_max,
                }),
            }
        })
        .collect();
    let out = CoverageOutput { schema_version: SCHEMA_VERSION, coverage: report, agents };
    write(&cli.out_dir.join("coverage.json"), &to_json(&out))
}

#[derive(Debug, Serialize)]
struct PerturbationOutput {
    schema_version: u32,
    /// Whether the design point lies in the region hardened by `delta`.
    hardened_feasible: bool,
    summary: MonteCarloSummary,
}

fn perturb(cli: &Cli, design: &Path, trials: usize) -> anyhow::Result<()> {
    let doc = DesignDocument::load(design)?;
    let delta = cli.delta.unwrap_or(0.1);
    let eig = &doc.eigenstructure;
    let base = constraint_halfplanes(&eig.alpha, &doc.spec);
    let hardened = apply_perturbation_margin(&base, delta)?;
    let hardened_feasible = classify_point(&hardened, doc.point.r_c, doc.point.d_c).is_feasible();
    if !hardened_feasible {
        warn!("design point is outside the region hardened by delta = {delta}");
    }
    let summary = perturbation_monte_carlo(eig, &doc.spec, doc.point.r_c, doc.point.d_c, delta, trials, cli.seed)?;
    info!("{} of {} trials violated a constraint", summary.violating_trials, summary.trials);
    let out = PerturbationOutput { schema_version: SCHEMA_VERSION, hardened_feasible, summary };
    write(&cli.out_dir.join("perturbation.json"), &to_json(&out))
}
