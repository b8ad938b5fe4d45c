//! Protocol design: the gain matrix from a Pythagorean triple, the
//! eigenstructure of `B L`, the per-agent trochoid coefficients and the
//! mapping between `(R_c, d_c)` and collinear initial positions.
//!
//! The swarm is the three-node path graph `A1 - A2 - A3`. Its protocol
//! `u = ((B L) ⊗ S) x` has one zero eigenvalue and two non-zero eigenvalues
//! `lambda_min < lambda_max`; every agent moves on
//!
//! ```text
//! z_i(t) = c_ir e^{i(lambda_min t + phi_r)} + c_id e^{i(lambda_max t + phi_d)} + c_0 e^{i phi_0}
//! ```
//!
//! with `c_ir = alpha_ir R_c` and `c_id = alpha_id d_c`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{Num, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point2;

type Exact = Ratio<i128>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrochoidType {
    Epitrochoid,
    Hypotrochoid,
}

impl TrochoidType {
    /// Integer ratio `lambda_max / lambda_min`: `k + 1` for epitrochoids and
    /// `-(k - 1)` for hypotrochoids.
    pub fn harmonic(self, k: u32) -> i64 {
        match self {
            TrochoidType::Epitrochoid => i64::from(k) + 1,
            TrochoidType::Hypotrochoid => -(i64::from(k) - 1),
        }
    }
}

impl std::fmt::Display for TrochoidType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TrochoidType::Epitrochoid => f.write_str("epitrochoid"),
            TrochoidType::Hypotrochoid => f.write_str("hypotrochoid"),
        }
    }
}

/// Positive integers with `s1^2 + s2^2 = s3^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[u32; 3]", into = "[u32; 3]")]
pub struct PythagoreanTriple {
    s1: u32,
    s2: u32,
    s3: u32,
}

impl PythagoreanTriple {
    pub fn new(s1: u32, s2: u32, s3: u32) -> Result<Self> {
        let sq = |v: u32| u64::from(v) * u64::from(v);
        if s1 == 0 || s2 == 0 || s3 == 0 || sq(s1) + sq(s2) != sq(s3) {
            return Err(Error::NotPythagorean(s1, s2, s3));
        }
        Ok(Self { s1, s2, s3 })
    }

    pub fn values(&self) -> [u32; 3] {
        [self.s1, self.s2, self.s3]
    }
}

impl TryFrom<[u32; 3]> for PythagoreanTriple {
    type Error = Error;
    fn try_from(v: [u32; 3]) -> Result<Self> {
        PythagoreanTriple::new(v[0], v[1], v[2])
    }
}

impl From<PythagoreanTriple> for [u32; 3] {
    fn from(t: PythagoreanTriple) -> Self {
        t.values()
    }
}

/// User-facing design inputs. All lengths share one unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSpec {
    pub k: u32,
    pub triple: PythagoreanTriple,
    pub trochoid_type: TrochoidType,
    pub d0_min: f64,
    pub d0_max: f64,
    pub d_ct: f64,
    pub d_cr: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_rob: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_sense: Option<f64>,
    #[serde(default)]
    pub epsilon_cusp: f64,
}

impl DesignSpec {
    /// A spec with the distance bounds set and the optional fields empty.
    pub fn new(
        k: u32,
        triple: PythagoreanTriple,
        trochoid_type: TrochoidType,
        d0_min: f64,
        d0_max: f64,
        d_ct: f64,
        d_cr: f64,
    ) -> Self {
        Self {
            k,
            triple,
            trochoid_type,
            d0_min,
            d0_max,
            d_ct,
            d_cr,
            r_rob: None,
            r_sense: None,
            epsilon_cusp: 0.0,
        }
    }

    /// Checks the structural invariants. The ordering of `d0_min` and
    /// `d0_max` is left to the region computation, which reports an empty
    /// region when the bounds conflict.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidSpec(msg.to_string()));
        if self.k < 2 {
            return bad("k must be at least 2");
        }
        let lengths = [self.d0_min, self.d0_max, self.d_ct, self.d_cr];
        if lengths.iter().any(|v| !v.is_finite()) {
            return bad("distance thresholds must be finite");
        }
        if self.d0_min < 0.0 {
            return bad("d0_min must be non-negative");
        }
        if self.d0_max <= 0.0 {
            return bad("d0_max must be positive");
        }
        if self.d_ct <= 0.0 || self.d_cr <= self.d_ct {
            return bad("require 0 < d_CT < d_CR");
        }
        if let Some(r) = self.r_rob {
            if !(r > 0.0) {
                return bad("R_rob must be positive");
            }
            if self.d_ct <= 2.0 * r {
                return bad("d_CT must exceed 2 R_rob");
            }
        }
        if let Some(r) = self.r_sense {
            if !(r > 0.0) {
                return bad("R_sense must be positive");
            }
        }
        if !(0.0..1.0).contains(&self.epsilon_cusp) {
            return bad("epsilon_cusp must lie in [0, 1)");
        }
        Ok(())
    }
}

/// Graph Laplacian of the path `A1 - A2 - A3`.
pub fn build_line_laplacian() -> [[f64; 3]; 3] {
    [[1.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 1.0]]
}

/// Diagonal of the gain matrix `B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Beta(pub [f64; 3]);

impl Beta {
    pub fn scaled(self, s: f64) -> Beta {
        Beta(self.0.map(|b| b * s))
    }

    /// The product `B L` as a dense matrix.
    pub fn protocol_matrix(&self) -> [[f64; 3]; 3] {
        let l = build_line_laplacian();
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = self.0[i] * l[i][j];
            }
        }
        m
    }
}

/// Gains kept as exact rationals (denominators divide `2k`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactBeta {
    values: [Exact; 3],
    /// `s3 / 2`, the exact value of the square-root term of the eigenvalues.
    half_s3: Exact,
}

impl ExactBeta {
    pub fn values(&self) -> [Ratio<i128>; 3] {
        self.values
    }

    pub fn to_beta(&self) -> Beta {
        Beta(self.values.map(ratio_to_f64))
    }
}

fn ratio_to_f64(r: Exact) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Gains from a Pythagorean triple and cusp count, exact.
pub fn design_beta_exact(
    triple: PythagoreanTriple,
    k: u32,
    trochoid_type: TrochoidType,
) -> Result<ExactBeta> {
    if k < 2 {
        return Err(Error::InvalidSpec("k must be at least 2".into()));
    }
    let [s1, s2, s3] = triple.values().map(i128::from);
    let k = i128::from(k);
    let lead = match trochoid_type {
        TrochoidType::Epitrochoid => 2 * s3,
        TrochoidType::Hypotrochoid => -2 * s3,
    };
    let b1 = Exact::new(lead - k * (s2 + s1 - s3), 2 * k);
    let b2 = Exact::new(s2, 2);
    let b3 = b1 + Exact::from_integer(s1);
    if b1.is_zero() {
        return Err(Error::DegenerateBeta { index: 1 });
    }
    if b3.is_zero() {
        return Err(Error::DegenerateBeta { index: 3 });
    }
    Ok(ExactBeta {
        values: [b1, b2, b3],
        half_s3: Exact::new(s3, 2),
    })
}

/// Gains from a Pythagorean triple and cusp count.
pub fn design_beta(triple: PythagoreanTriple, k: u32, trochoid_type: TrochoidType) -> Result<Beta> {
    design_beta_exact(triple, k, trochoid_type).map(|b| b.to_beta())
}

/// Mode-amplitude coefficients `alpha_ir`, `alpha_id`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Alpha {
    pub r: [f64; 3],
    pub d: [f64; 3],
}

/// Coefficient vectors mapping initial positions to `(R_c, d_c, phi_r, phi_d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaVectors {
    pub r: [f64; 3],
    pub d: [f64; 3],
    pub phi_r: [f64; 3],
    pub phi_d: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenstructure {
    pub beta: Beta,
    pub k: u32,
    pub trochoid_type: TrochoidType,
    pub a: f64,
    pub b: f64,
    pub beta_d: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub alpha: Alpha,
    pub gamma: GammaVectors,
}

struct Modal<T> {
    a: T,
    lambda_min: T,
    lambda_max: T,
    beta_d: T,
    alpha_r: [T; 3],
    alpha_d: [T; 3],
}

fn two<T: Num>() -> T {
    T::one() + T::one()
}

fn modal<T: Num + Copy>(beta: [T; 3], b: T) -> Option<Modal<T>> {
    let [b1, b2, b3] = beta;
    let a = b1 / two() + b2 + b3 / two();
    let lambda_min = a - b;
    let lambda_max = a + b;
    let beta_d = two::<T>() * two::<T>() * b * (b1 * b2 + b2 * b3 + b1 * b3);
    if beta_d.is_zero() || b2.is_zero() {
        return None;
    }
    let alpha_r = [
        b1 / b2 * (lambda_min - b2 - b3) / beta_d,
        (b3 - lambda_min) / beta_d,
        b3 / beta_d,
    ];
    let alpha_d = [
        b1 / b2 * (lambda_max - b2 - b3) / beta_d,
        (b3 - lambda_max) / beta_d,
        b3 / beta_d,
    ];
    Some(Modal {
        a,
        lambda_min,
        lambda_max,
        beta_d,
        alpha_r,
        alpha_d,
    })
}

fn gamma<T: Num + Copy + std::ops::Neg<Output = T>>(beta: [T; 3], b: T) -> [[T; 3]; 4] {
    let [b1, b2, b3] = beta;
    let t = two::<T>();
    let tail = b1 * b1 + t * b2 * b2 - b1 * b3 - b2 * b3 + b1 * b2;
    let r = [
        b2 * (b1 + t * b2 + b3 + t * b),
        b1 * (b1 - b3 + t * b) - t * b2 * b3,
        -(tail + t * b * b1 + t * b * b2),
    ];
    let d = [
        b2 * (b1 + t * b2 + b3 - t * b),
        b1 * (b1 - b3 - t * b) - t * b2 * b3,
        -(tail - t * b * b1 - t * b * b2),
    ];
    let phi_r = [
        -b2 * (b1 + b3 + t * b2 + t * b),
        -b1 * (b1 - b3 + t * b) + t * b2 * b3,
        tail + t * b * b1 + t * b * b2,
    ];
    let phi_d = [
        b2 * (b1 + b3 + t * b2 - t * b),
        b1 * (b1 - b3 - t * b) - t * b2 * b3,
        -(tail - t * b * b1 - t * b * b2),
    ];
    [r, d, phi_r, phi_d]
}

fn half_root(beta: &Beta) -> f64 {
    let [b1, b2, b3] = beta.0;
    0.5 * ((b1 - b3).powi(2) + (2.0 * b2).powi(2)).sqrt()
}

/// All four coefficient vectors for the given gains.
pub fn gamma_vectors(beta: &Beta) -> GammaVectors {
    let [r, d, phi_r, phi_d] = gamma(beta.0, half_root(beta));
    GammaVectors { r, d, phi_r, phi_d }
}

fn check_ratio(lambda_min: f64, lambda_max: f64, k: u32, ty: TrochoidType) -> Result<()> {
    let expected = ty.harmonic(k) as f64;
    let ratio = lambda_max / lambda_min;
    if !ratio.is_finite() || (ratio - expected).abs() > 1e-9 * expected.abs() {
        return Err(Error::RatioMismatch { ratio, expected });
    }
    Ok(())
}

/// Eigenvalues, alpha and gamma coefficients of `B L` for arbitrary gains.
/// Fails when the eigenvalue ratio is not the integer implied by `k` and
/// the trochoid type.
pub fn eigenstructure(beta: &Beta, k: u32, trochoid_type: TrochoidType) -> Result<Eigenstructure> {
    let b = half_root(beta);
    let m = modal(beta.0, b).ok_or(Error::SingularBetaD)?;
    if m.beta_d.abs() < f64::MIN_POSITIVE {
        return Err(Error::SingularBetaD);
    }
    check_ratio(m.lambda_min, m.lambda_max, k, trochoid_type)?;
    Ok(Eigenstructure {
        beta: *beta,
        k,
        trochoid_type,
        a: m.a,
        b,
        beta_d: m.beta_d,
        lambda_min: m.lambda_min,
        lambda_max: m.lambda_max,
        alpha: Alpha {
            r: m.alpha_r,
            d: m.alpha_d,
        },
        gamma: gamma_vectors(beta),
    })
}

impl Eigenstructure {
    /// Exact-arithmetic construction from a triple: every quantity is a
    /// rational number until the final conversion.
    pub fn from_design(triple: PythagoreanTriple, k: u32, trochoid_type: TrochoidType) -> Result<Self> {
        let exact = design_beta_exact(triple, k, trochoid_type)?;
        let m = modal(exact.values, exact.half_s3).ok_or(Error::SingularBetaD)?;
        let [r, d, phi_r, phi_d] = gamma(exact.values, exact.half_s3);
        let f = |v: [Exact; 3]| v.map(ratio_to_f64);
        let (lambda_min, lambda_max) = (ratio_to_f64(m.lambda_min), ratio_to_f64(m.lambda_max));
        let exact_ratio = m.lambda_max / m.lambda_min;
        if exact_ratio != Exact::from_integer(i128::from(trochoid_type.harmonic(k))) {
            return Err(Error::RatioMismatch {
                ratio: ratio_to_f64(exact_ratio),
                expected: trochoid_type.harmonic(k) as f64,
            });
        }
        Ok(Eigenstructure {
            beta: exact.to_beta(),
            k,
            trochoid_type,
            a: ratio_to_f64(m.a),
            b: ratio_to_f64(exact.half_s3),
            beta_d: ratio_to_f64(m.beta_d),
            lambda_min,
            lambda_max,
            alpha: Alpha {
                r: f(m.alpha_r),
                d: f(m.alpha_d),
            },
            gamma: GammaVectors {
                r: f(r),
                d: f(d),
                phi_r: f(phi_r),
                phi_d: f(phi_d),
            },
        })
    }

    pub fn harmonic(&self) -> i64 {
        self.trochoid_type.harmonic(self.k)
    }

    /// Time for one closed revolution, `2 pi / |lambda_min|`.
    pub fn period(&self) -> f64 {
        TAU / self.lambda_min.abs()
    }

    /// Same design with every gain multiplied by `s > 0`.
    pub fn scaled(&self, s: f64) -> Result<Eigenstructure> {
        eigenstructure(&self.beta.scaled(s), self.k, self.trochoid_type)
    }

    /// Normalised left zero-eigenvector of `B L`, proportional to `1 / beta_i`.
    pub fn cor_weights(&self) -> Result<[f64; 3]> {
        let inv = self.beta.0.map(|b| 1.0 / b);
        let sum: f64 = inv.iter().sum();
        let scale = inv.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if !sum.is_finite() || sum.abs() <= 1e-12 * scale {
            return Err(Error::SingularCoR);
        }
        Ok(inv.map(|v| v / sum))
    }
}

/// One agent's closed-form trochoid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentTrochoid {
    /// 1-based agent index.
    pub agent: usize,
    pub trochoid_type: TrochoidType,
    pub k: u32,
    pub lambda_min: f64,
    pub c_r: f64,
    pub c_d: f64,
    pub phi_r: f64,
    pub phi_d: f64,
    pub c_0: f64,
    pub phi_0: f64,
    /// Rolling-circle radius `|c_r| / |lambda_max / lambda_min|`.
    pub r_param: f64,
    /// Pen distance `|c_d|`.
    pub d_param: f64,
    pub cor: Point2,
}

impl AgentTrochoid {
    fn new(agent: usize, eig: &Eigenstructure, c_r: f64, c_d: f64, modal: &ModalState) -> Self {
        let cor = Complex64::from_polar(modal.c_0, modal.phi_0);
        Self {
            agent,
            trochoid_type: eig.trochoid_type,
            k: eig.k,
            lambda_min: eig.lambda_min,
            c_r,
            c_d,
            phi_r: modal.phi_r,
            phi_d: modal.phi_d,
            c_0: modal.c_0,
            phi_0: modal.phi_0,
            r_param: c_r.abs() / eig.harmonic().unsigned_abs() as f64,
            d_param: c_d.abs(),
            cor: cor.into(),
        }
    }

    pub fn harmonic(&self) -> i64 {
        self.trochoid_type.harmonic(self.k)
    }

    pub fn lambda_max(&self) -> f64 {
        self.harmonic() as f64 * self.lambda_min
    }

    pub fn period(&self) -> f64 {
        TAU / self.lambda_min.abs()
    }

    /// Complex position at phase `theta = lambda_min t`.
    pub fn z_at_phase(&self, theta: f64) -> Complex64 {
        let m = self.harmonic() as f64;
        Complex64::from_polar(self.c_r, theta + self.phi_r)
            + Complex64::from_polar(self.c_d, m * theta + self.phi_d)
            + Complex64::from_polar(self.c_0, self.phi_0)
    }

    /// `dz / dtheta` at phase `theta`.
    pub fn dz_at_phase(&self, theta: f64) -> Complex64 {
        let m = self.harmonic() as f64;
        Complex64::i()
            * (Complex64::from_polar(self.c_r, theta + self.phi_r)
                + Complex64::from_polar(m * self.c_d, m * theta + self.phi_d))
    }

    /// `d^2 z / dtheta^2` at phase `theta`.
    pub fn d2z_at_phase(&self, theta: f64) -> Complex64 {
        let m = self.harmonic() as f64;
        -(Complex64::from_polar(self.c_r, theta + self.phi_r)
            + Complex64::from_polar(m * m * self.c_d, m * theta + self.phi_d))
    }

    pub fn position_at_phase(&self, theta: f64) -> Point2 {
        self.z_at_phase(theta).into()
    }

    pub fn position(&self, t: f64) -> Point2 {
        self.position_at_phase(self.lambda_min * t)
    }

    pub fn velocity(&self, t: f64) -> Point2 {
        (self.dz_at_phase(self.lambda_min * t) * self.lambda_min).into()
    }

    /// Signed `(r, d)` of the parametric form
    /// `x = (k+1) r cos(theta) - d cos((k+1) theta)`.
    pub fn signed_parametric(&self) -> (f64, f64) {
        let m = self.harmonic().unsigned_abs() as f64;
        (self.c_r / m, -self.c_d)
    }
}

/// Per-agent trochoids of a normalised design (zero phases, CoR at origin).
pub fn trochoid_coefficients(eig: &Eigenstructure, r_c: f64, d_c: f64) -> [AgentTrochoid; 3] {
    let modal = ModalState {
        r_c,
        d_c,
        ..ModalState::default()
    };
    modal.trochoids(eig)
}

/// Initial positions on the X axis for a normalised design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialPlacement {
    /// x-coordinates with agent 3 at the origin, before the CoR shift.
    pub raw_x: [f64; 3],
    /// x-coordinate of the centre of rotation before the shift.
    pub cor_x: f64,
    /// Positions after shifting the centre of rotation to the origin.
    pub positions: [Point2; 3],
}

/// Collinear initial positions realising `(R_c, d_c)` with zero phases,
/// shifted so the trochoids revolve about the origin.
pub fn initial_positions(eig: &Eigenstructure, r_c: f64, d_c: f64) -> Result<InitialPlacement> {
    let g = &eig.gamma;
    let det = g.r[0] * g.d[1] - g.r[1] * g.d[0];
    let scale = g.r[..2].iter().chain(&g.d[..2]).map(|v| v.abs()).fold(0.0, f64::max);
    if !det.is_finite() || det.abs() <= 1e-12 * scale * scale {
        return Err(Error::SingularSystem);
    }
    // Gamma_R . x = -R_c and Gamma_d . x = d_c give phi_r = phi_d = 0.
    let (rhs_r, rhs_d) = (-r_c, d_c);
    let x1 = (rhs_r * g.d[1] - g.r[1] * rhs_d) / det;
    let x2 = (g.r[0] * rhs_d - rhs_r * g.d[0]) / det;
    let raw_x = [x1, x2, 0.0];
    let w = eig.cor_weights()?;
    let cor_x: f64 = raw_x.iter().zip(&w).map(|(x, w)| x * w).sum();
    Ok(InitialPlacement {
        raw_x,
        cor_x,
        positions: raw_x.map(|x| Point2::new(x - cor_x, 0.0)),
    })
}

/// Modal amplitudes and phases of a swarm state.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ModalState {
    pub r_c: f64,
    pub d_c: f64,
    pub phi_r: f64,
    pub phi_d: f64,
    pub c_0: f64,
    pub phi_0: f64,
}

impl ModalState {
    /// The three trochoids generated from this modal state.
    pub fn trochoids(&self, eig: &Eigenstructure) -> [AgentTrochoid; 3] {
        std::array::from_fn(|i| {
            AgentTrochoid::new(i + 1, eig, eig.alpha.r[i] * self.r_c, eig.alpha.d[i] * self.d_c, self)
        })
    }

    pub fn cor(&self) -> Point2 {
        Complex64::from_polar(self.c_0, self.phi_0).into()
    }
}

fn dot(g: &[f64; 3], z: &[Complex64; 3]) -> Complex64 {
    g.iter().zip(z).map(|(g, z)| z * g).sum()
}

/// Recovers `(R_c, d_c, phi_r, phi_d, c_0, phi_0)` from arbitrary initial
/// positions.
pub fn recompute_from_positions(eig: &Eigenstructure, x0: &[Point2; 3]) -> Result<ModalState> {
    let z = x0.map(Point2::to_complex);
    let g = &eig.gamma;
    let pr = dot(&g.phi_r, &z);
    let pd = dot(&g.phi_d, &z);
    let p0 = dot(&eig.cor_weights()?, &z);
    Ok(ModalState {
        r_c: dot(&g.r, &z).norm(),
        d_c: dot(&g.d, &z).norm(),
        phi_r: pr.im.atan2(pr.re),
        phi_d: pd.im.atan2(pd.re),
        c_0: p0.norm(),
        phi_0: p0.arg(),
    })
}

/// Per-agent zero-mode component `x_i0 - c_ir e^{i phi_r} - c_id e^{i phi_d}`,
/// which is the same point for every agent.
pub fn zero_mode_components(eig: &Eigenstructure, x0: &[Point2; 3]) -> Result<[Complex64; 3]> {
    let m = recompute_from_positions(eig, x0)?;
    let pr = Complex64::from_polar(m.r_c, m.phi_r);
    let pd = Complex64::from_polar(m.d_c, m.phi_d);
    Ok(std::array::from_fn(|i| {
        x0[i].to_complex() - pr * eig.alpha.r[i] - pd * eig.alpha.d[i]
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn triple(a: u32, b: u32, c: u32) -> PythagoreanTriple {
        PythagoreanTriple::new(a, b, c).unwrap()
    }

    fn fig2() -> Eigenstructure {
        Eigenstructure::from_design(triple(5, 12, 13), 2, TrochoidType::Epitrochoid).unwrap()
    }

    #[test]
    fn laplacian_rows_sum_to_zero_and_symmetric() {
        let l = build_line_laplacian();
        for i in 0..3 {
            assert_eq!(l[i].iter().sum::<f64>(), 0.0);
            for j in 0..3 {
                assert_eq!(l[i][j], l[j][i]);
            }
        }
    }

    #[test]
    fn rejects_non_triples() {
        assert_eq!(PythagoreanTriple::new(3, 4, 6), Err(Error::NotPythagorean(3, 4, 6)));
        assert!(PythagoreanTriple::new(0, 4, 4).is_err());
    }

    #[test]
    fn beta_from_triple() {
        let b = design_beta(triple(5, 12, 13), 2, TrochoidType::Epitrochoid).unwrap();
        assert_eq!(b.0, [4.5, 6.0, 9.5]);
        let h = design_beta(triple(5, 12, 13), 2, TrochoidType::Hypotrochoid).unwrap();
        assert_eq!(h.0, [-8.5, 6.0, -3.5]);
    }

    #[test]
    fn degenerate_beta_rejected() {
        assert_eq!(
            design_beta(triple(3, 4, 5), 5, TrochoidType::Epitrochoid),
            Err(Error::DegenerateBeta { index: 1 })
        );
        // multiples of the triple are degenerate too
        assert_eq!(
            design_beta(triple(6, 8, 10), 5, TrochoidType::Epitrochoid),
            Err(Error::DegenerateBeta { index: 1 })
        );
    }

    #[test]
    fn eigenvalues_and_alpha() {
        let e = fig2();
        assert_eq!(e.lambda_min, 6.5);
        assert_eq!(e.lambda_max, 19.5);
        assert_eq!(e.beta_d, 3295.5);
        let expect_r = [-6.75, 3.0, 9.5].map(|v| v / 3295.5);
        let expect_d = [3.0, -10.0, 9.5].map(|v| v / 3295.5);
        for i in 0..3 {
            assert_relative_eq!(e.alpha.r[i], expect_r[i], max_relative = 1e-15);
            assert_relative_eq!(e.alpha.d[i], expect_d[i], max_relative = 1e-15);
        }
        let f = eigenstructure(&e.beta, 2, TrochoidType::Epitrochoid).unwrap();
        assert_relative_eq!(f.lambda_min, 6.5, max_relative = 1e-15);
        assert_relative_eq!(f.alpha.r[0], e.alpha.r[0], max_relative = 1e-14);
    }

    #[test]
    fn hypotrochoid_eigenvalues() {
        let e = Eigenstructure::from_design(triple(5, 12, 13), 2, TrochoidType::Hypotrochoid).unwrap();
        assert_eq!(e.a, 0.0);
        assert_eq!(e.lambda_min, -6.5);
        assert_eq!(e.lambda_max, 6.5);
    }

    #[test]
    fn second_triple_eigenvalues() {
        let e = Eigenstructure::from_design(triple(7, 24, 25), 2, TrochoidType::Epitrochoid).unwrap();
        assert_eq!(e.beta.0, [9.5, 12.0, 16.5]);
        assert_eq!((e.lambda_min, e.lambda_max), (12.5, 37.5));
    }

    #[test]
    fn wrong_ratio_is_reported() {
        let err = eigenstructure(&Beta([4.5, 6.0, 9.5]), 3, TrochoidType::Epitrochoid).unwrap_err();
        assert!(matches!(err, Error::RatioMismatch { .. }));
    }

    #[test]
    fn gamma_values() {
        let g = gamma_vectors(&Beta([4.5, 6.0, 9.5]));
        assert_eq!(g.r, [234.0, -78.0, -156.0]);
        assert_eq!(g.d, [78.0, -195.0, 117.0]);
        for i in 0..3 {
            assert_eq!(g.phi_r[i], -g.r[i]);
            assert_eq!(g.phi_d[i], g.d[i]);
        }
    }

    #[test]
    fn gamma_alpha_biorthogonal() {
        let e = fig2();
        let d = |g: &[f64; 3], a: &[f64; 3]| g.iter().zip(a).map(|(g, a)| g * a).sum::<f64>();
        assert_relative_eq!(d(&e.gamma.phi_r, &e.alpha.r), 1.0, max_relative = 1e-14);
        assert_relative_eq!(d(&e.gamma.phi_d, &e.alpha.d), 1.0, max_relative = 1e-14);
        assert!(d(&e.gamma.phi_r, &e.alpha.d).abs() < 1e-14);
        assert!(d(&e.gamma.phi_d, &e.alpha.r).abs() < 1e-14);
        assert_eq!(e.gamma.r.iter().sum::<f64>(), 0.0);
    }

    #[test]
    fn raw_and_shifted_positions() {
        let e = fig2();
        let p = initial_positions(&e, 2500.0, 0.0).unwrap();
        assert!((p.raw_x[0] + 12.327).abs() < 5e-4);
        assert!((p.raw_x[1] + 4.931).abs() < 5e-4);
        assert!((p.cor_x + 7.207).abs() < 5e-4);
        let xs = p.positions.map(|q| q.x);
        for (x, want) in xs.iter().zip([-5.121, 2.276, 7.207]) {
            assert!((x - want).abs() < 1e-3, "{x} vs {want}");
        }
        let p = initial_positions(&e, 500.0, 0.0).unwrap();
        for (q, want) in p.positions.iter().zip([-1.024, 0.455, 1.441]) {
            assert!((q.x - want).abs() < 1e-3);
            assert_eq!(q.y, 0.0);
        }
    }

    #[test]
    fn coefficients_match_positions_at_t0() {
        let e = fig2();
        let tr = trochoid_coefficients(&e, 2500.0, 0.0);
        let c: Vec<f64> = tr.iter().map(|t| t.c_r).collect();
        for (c, want) in c.iter().zip([-5.1207, 2.2759, 7.2069]) {
            assert!((c - want).abs() < 2e-4, "{c} vs {want}");
        }
        assert!(tr.iter().all(|t| t.c_d == 0.0));
        let tr = trochoid_coefficients(&e, 2000.0, 1200.0);
        for (t, want) in tr.iter().zip([-3.004, -1.821, 9.225]) {
            assert!((t.c_r + t.c_d - want).abs() < 1e-3);
            assert_relative_eq!(t.r_param * 3.0, t.c_r.abs());
        }
    }

    #[test]
    fn round_trip_positions() {
        let e = fig2();
        let p = initial_positions(&e, 2000.0, 1200.0).unwrap();
        let m = recompute_from_positions(&e, &p.positions).unwrap();
        assert_relative_eq!(m.r_c, 2000.0, max_relative = 1e-9);
        assert_relative_eq!(m.d_c, 1200.0, max_relative = 1e-9);
        assert!(m.phi_r.abs() < 1e-12 && m.phi_d.abs() < 1e-12);
        assert!(m.c_0 < 1e-12);
    }

    #[test]
    fn common_point_is_a_fixed_point() {
        let e = fig2();
        let p = Point2::new(3.0, -4.0);
        let m = recompute_from_positions(&e, &[p; 3]).unwrap();
        assert!(m.r_c < 1e-12 && m.d_c < 1e-12);
        assert_relative_eq!(m.c_0, 5.0, max_relative = 1e-12);
    }

    #[test]
    fn cor_weights_sum_to_one() {
        let w = fig2().cor_weights().unwrap();
        assert_relative_eq!(w.iter().sum::<f64>(), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn spec_validation() {
        let mut s = DesignSpec::new(2, triple(5, 12, 13), TrochoidType::Epitrochoid, 1.5, 15.0, 0.5, 15.0);
        assert!(s.validate().is_ok());
        s.r_rob = Some(0.3);
        assert!(s.validate().is_err());
        s.r_rob = Some(0.2);
        s.k = 1;
        assert!(s.validate().is_err());
    }
}
