//! Medium models: Lamé parameters λ, μ and density ρ as closed-form scalar
//! fields with hand-coded first and second derivatives.
//!
//! Wavespeeds follow from the fields, c_P = √((λ+2μ)/ρ), c_S = √(μ/ρ); the
//! positivity conditions μ > 0, 3λ + 2μ > 0, ρ > 0 force c_P > c_S > 0.
//! Every field is a globally smooth closed form, so evaluation is defined on
//! all of ℝ³; the [`Domain`] (a closed ball) gates only the public
//! point-query API. That matters for the geometry module, which integrates
//! auxiliary rays slightly past the boundary.

use crate::linalg::{self, Mat3, Vec3, ZERO_MAT, ZERO_VEC};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum MediumError {
    #[error("point [{0}, {1}, {2}] lies outside the closed domain")]
    OutsideDomain(f64, f64, f64),
    #[error("density must be positive, got rho = {0}")]
    NonPositiveDensity(f64),
    #[error("unknown model kind `{0}` (expected constant, gaussian-bump-sum, radial-polynomial, exponential, or log-gaussian-bumps)")]
    UnknownKind(String),
    #[error("invalid model parameters: {0}")]
    BadParams(String),
}

/// Closed ball {x : |x − center| ≤ radius}.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct Domain {
    pub center: Vec3,
    pub radius: f64,
}

impl Domain {
    pub fn unit_ball() -> Self {
        Domain {
            center: ZERO_VEC,
            radius: 1.0,
        }
    }

    /// Closed membership with a small absolute slack so that boundary points
    /// produced by root-finding (accurate to ~1e-10) still count as inside.
    pub fn contains(&self, x: Vec3) -> bool {
        linalg::dist(x, self.center) <= self.radius + 1e-9
    }

    /// Signed boundary residual |x − center| − radius (negative inside).
    pub fn boundary_defect(&self, x: Vec3) -> f64 {
        linalg::dist(x, self.center) - self.radius
    }

    /// Axis-aligned bounding box (lo, hi) of the ball.
    pub fn bounding_box(&self) -> (Vec3, Vec3) {
        let r = [self.radius; 3];
        (linalg::sub(self.center, r), linalg::add(self.center, r))
    }
}

/// One Gaussian bump `amplitude · exp(−|x − center|²/(2σ²))`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GaussianBump {
    pub amplitude: f64,
    pub center: Vec3,
    pub sigma: f64,
}

/// Scalar field families with exact gradient and Hessian.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ScalarField {
    Constant { value: f64 },
    /// base + Σ_k bump_k(x)
    GaussianBumpSum { base: f64, bumps: Vec<GaussianBump> },
    /// c0 + c2 r² + c4 r⁴ with r = |x − center|
    RadialPolynomial { center: Vec3, c0: f64, c2: f64, c4: f64 },
    /// amplitude · exp(2 rate · x)
    Exponential { amplitude: f64, rate: Vec3 },
    /// base · exp(2 Σ_k bump_k(x)); log√ of such a field is ½ log base + Σ bumps
    LogGaussianBumps { base: f64, bumps: Vec<GaussianBump> },
}

/// Value, gradient, and Hessian of q(x) = Σ_k bump_k(x).
fn bump_sum_derivatives(bumps: &[GaussianBump], x: Vec3) -> (f64, Vec3, Mat3) {
    let mut q = 0.0;
    let mut g = ZERO_VEC;
    let mut h = ZERO_MAT;
    for b in bumps {
        let y = linalg::sub(x, b.center);
        let s2 = b.sigma * b.sigma;
        let v = b.amplitude * (-linalg::norm_sq(y) / (2.0 * s2)).exp();
        q += v;
        g = linalg::axpy(g, -v / s2, y);
        // ∇²bump = v (y⊗y/σ⁴ − I/σ²)
        for i in 0..3 {
            for j in 0..3 {
                h[i][j] += v * (y[i] * y[j] / (s2 * s2) - if i == j { 1.0 / s2 } else { 0.0 });
            }
        }
    }
    (q, g, h)
}

impl ScalarField {
    pub fn constant(value: f64) -> Self {
        ScalarField::Constant { value }
    }

    /// Structurally constant: the gradient vanishes identically.
    pub fn is_constant(&self) -> bool {
        match self {
            ScalarField::Constant { .. } => true,
            ScalarField::GaussianBumpSum { bumps, .. }
            | ScalarField::LogGaussianBumps { bumps, .. } => bumps.is_empty(),
            ScalarField::RadialPolynomial { c2, c4, .. } => *c2 == 0.0 && *c4 == 0.0,
            ScalarField::Exponential { rate, .. } => *rate == ZERO_VEC,
        }
    }

    pub fn value(&self, x: Vec3) -> f64 {
        match self {
            ScalarField::Constant { value } => *value,
            ScalarField::GaussianBumpSum { base, bumps } => {
                base + bump_sum_derivatives(bumps, x).0
            }
            ScalarField::RadialPolynomial { center, c0, c2, c4 } => {
                let u = linalg::norm_sq(linalg::sub(x, *center));
                c0 + c2 * u + c4 * u * u
            }
            ScalarField::Exponential { amplitude, rate } => {
                amplitude * (2.0 * linalg::dot(*rate, x)).exp()
            }
            ScalarField::LogGaussianBumps { base, bumps } => {
                base * (2.0 * bump_sum_derivatives(bumps, x).0).exp()
            }
        }
    }

    pub fn gradient(&self, x: Vec3) -> Vec3 {
        match self {
            ScalarField::Constant { .. } => ZERO_VEC,
            ScalarField::GaussianBumpSum { bumps, .. } => bump_sum_derivatives(bumps, x).1,
            ScalarField::RadialPolynomial { center, c2, c4, .. } => {
                let y = linalg::sub(x, *center);
                let u = linalg::norm_sq(y);
                // d/dy P(u) = P'(u) · 2y with P'(u) = c2 + 2 c4 u
                linalg::scale(y, 2.0 * (c2 + 2.0 * c4 * u))
            }
            ScalarField::Exponential { amplitude, rate } => {
                let v = amplitude * (2.0 * linalg::dot(*rate, x)).exp();
                linalg::scale(*rate, 2.0 * v)
            }
            ScalarField::LogGaussianBumps { base, bumps } => {
                let (q, dq, _) = bump_sum_derivatives(bumps, x);
                linalg::scale(dq, 2.0 * base * (2.0 * q).exp())
            }
        }
    }

    pub fn hessian(&self, x: Vec3) -> Mat3 {
        match self {
            ScalarField::Constant { .. } => ZERO_MAT,
            ScalarField::GaussianBumpSum { bumps, .. } => bump_sum_derivatives(bumps, x).2,
            ScalarField::RadialPolynomial { center, c2, c4, .. } => {
                let y = linalg::sub(x, *center);
                let u = linalg::norm_sq(y);
                // ∇²P(u) = 2P'(u) I + 4P''(u) y⊗y, P'' = 2 c4
                let mut h = linalg::mat_scale(linalg::identity(), 2.0 * (c2 + 2.0 * c4 * u));
                for i in 0..3 {
                    for j in 0..3 {
                        h[i][j] += 8.0 * c4 * y[i] * y[j];
                    }
                }
                h
            }
            ScalarField::Exponential { amplitude, rate } => {
                let v = amplitude * (2.0 * linalg::dot(*rate, x)).exp();
                linalg::mat_scale(linalg::outer(*rate, *rate), 4.0 * v)
            }
            ScalarField::LogGaussianBumps { base, bumps } => {
                let (q, dq, hq) = bump_sum_derivatives(bumps, x);
                let v = base * (2.0 * q).exp();
                // ∇²(be^{2q}) = v (2∇²q + 4∇q⊗∇q)
                let mut h = linalg::mat_scale(hq, 2.0 * v);
                for i in 0..3 {
                    for j in 0..3 {
                        h[i][j] += 4.0 * v * dq[i] * dq[j];
                    }
                }
                h
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WaveMode {
    P,
    S,
}

impl std::fmt::Display for WaveMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WaveMode::P => write!(f, "P"),
            WaveMode::S => write!(f, "S"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WavespeedPair {
    pub c_p: f64,
    pub c_s: f64,
}

/// Value, gradient, Hessian, and Laplacian of log√ρ at a point.
#[derive(Clone, Copy, Debug)]
pub struct LogSqrtRho {
    pub value: f64,
    pub gradient: Vec3,
    pub hessian: Mat3,
    pub laplacian: f64,
}

/// An isotropic elastic medium on a closed ball.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MediumModel {
    pub kind: String,
    pub domain: Domain,
    pub lambda: ScalarField,
    pub mu: ScalarField,
    pub rho: ScalarField,
}

impl MediumModel {
    pub fn with_fields(
        kind: &str,
        domain: Domain,
        lambda: ScalarField,
        mu: ScalarField,
        rho: ScalarField,
    ) -> Self {
        MediumModel {
            kind: kind.to_string(),
            domain,
            lambda,
            mu,
            rho,
        }
    }

    pub fn constant(lambda: f64, mu: f64, rho: f64, domain: Domain) -> Self {
        Self::with_fields(
            "constant",
            domain,
            ScalarField::constant(lambda),
            ScalarField::constant(mu),
            ScalarField::constant(rho),
        )
    }

    /// λ = λ₀E, μ = μ₀E, ρ = ρ₀E with E = e^{2a·x}: wavespeeds are constant
    /// while ρ varies, and ∇log√ρ = a exactly.
    pub fn exponential(lambda0: f64, mu0: f64, rho0: f64, rate: Vec3, domain: Domain) -> Self {
        Self::with_fields(
            "exponential",
            domain,
            ScalarField::Exponential { amplitude: lambda0, rate },
            ScalarField::Exponential { amplitude: mu0, rate },
            ScalarField::Exponential { amplitude: rho0, rate },
        )
    }

    // ----- wavespeeds -----

    /// (c_P, c_S) at a point of the closed domain.
    pub fn wavespeeds(&self, x: Vec3) -> Result<WavespeedPair, MediumError> {
        if !self.domain.contains(x) {
            return Err(MediumError::OutsideDomain(x[0], x[1], x[2]));
        }
        Ok(WavespeedPair {
            c_p: self.wavespeed_sq(WaveMode::P, x).sqrt(),
            c_s: self.wavespeed_sq(WaveMode::S, x).sqrt(),
        })
    }

    /// Squared mode speed; no domain check (fields are globally defined).
    pub fn wavespeed_sq(&self, mode: WaveMode, x: Vec3) -> f64 {
        let rho = self.rho.value(x);
        match mode {
            WaveMode::P => (self.lambda.value(x) + 2.0 * self.mu.value(x)) / rho,
            WaveMode::S => self.mu.value(x) / rho,
        }
    }

    pub fn wavespeed(&self, mode: WaveMode, x: Vec3) -> f64 {
        self.wavespeed_sq(mode, x).sqrt()
    }

    /// ∇(c²) for one mode. With c_S² = μ/ρ: ∇c_S² = (∇μ − c_S²∇ρ)/ρ, and
    /// with c_P² = (λ+2μ)/ρ: ∇c_P² = (∇λ + 2∇μ − c_P²∇ρ)/ρ.
    pub fn wavespeed_sq_gradient(&self, mode: WaveMode, x: Vec3) -> Vec3 {
        let rho = self.rho.value(x);
        let grad_rho = self.rho.gradient(x);
        let c2 = self.wavespeed_sq(mode, x);
        let num = match mode {
            WaveMode::P => linalg::axpy(self.lambda.gradient(x), 2.0, self.mu.gradient(x)),
            WaveMode::S => self.mu.gradient(x),
        };
        linalg::scale(linalg::axpy(num, -c2, grad_rho), 1.0 / rho)
    }

    // ----- density derivatives -----

    /// Derivatives of log√ρ = ½ log ρ by the chain rule:
    /// ∇ = ∇ρ/(2ρ), ∇² = ∇²ρ/(2ρ) − (∇ρ⊗∇ρ)/(2ρ²).
    pub fn log_sqrt_rho_derivatives(&self, x: Vec3) -> Result<LogSqrtRho, MediumError> {
        let rho = self.rho.value(x);
        if rho <= 0.0 {
            return Err(MediumError::NonPositiveDensity(rho));
        }
        let g = self.rho.gradient(x);
        let h = self.rho.hessian(x);
        let gradient = linalg::scale(g, 0.5 / rho);
        let mut hessian = linalg::mat_scale(h, 0.5 / rho);
        let k = 0.5 / (rho * rho);
        for i in 0..3 {
            for j in 0..3 {
                hessian[i][j] -= k * g[i] * g[j];
            }
        }
        Ok(LogSqrtRho {
            value: 0.5 * rho.ln(),
            gradient,
            hessian,
            laplacian: linalg::trace(hessian),
        })
    }

    // ----- validation -----

    /// Minima of μ, 3λ+2μ, ρ over an n³ lattice restricted to the ball.
    pub fn check_positivity(&self, n: usize) -> PositivityReport {
        assert!(n >= 2, "positivity lattice needs n >= 2");
        let (lo, hi) = self.domain.bounding_box();
        let mut min_mu = f64::INFINITY;
        let mut min_bulk = f64::INFINITY;
        let mut min_rho = f64::INFINITY;
        let mut samples = 0usize;
        for ix in 0..n {
            for iy in 0..n {
                for iz in 0..n {
                    let t = |i: usize, a: f64, b: f64| a + (b - a) * (i as f64) / ((n - 1) as f64);
                    let x = [t(ix, lo[0], hi[0]), t(iy, lo[1], hi[1]), t(iz, lo[2], hi[2])];
                    if self.domain.boundary_defect(x) > 0.0 {
                        continue;
                    }
                    samples += 1;
                    let l = self.lambda.value(x);
                    let m = self.mu.value(x);
                    min_mu = min_mu.min(m);
                    min_bulk = min_bulk.min(3.0 * l + 2.0 * m);
                    min_rho = min_rho.min(self.rho.value(x));
                }
            }
        }
        PositivityReport {
            min_mu,
            min_3lambda_2mu: min_bulk,
            min_rho,
            samples,
            pass: min_mu > 0.0 && min_bulk > 0.0 && min_rho > 0.0,
        }
    }

    // ----- JSON model documents -----

    pub fn from_json(text: &str) -> Result<Self, MediumError> {
        let spec: ModelSpec =
            serde_json::from_str(text).map_err(|e| MediumError::BadParams(e.to_string()))?;
        Self::from_spec(&spec)
    }

    pub fn from_spec(spec: &ModelSpec) -> Result<Self, MediumError> {
        fn params<T: serde::de::DeserializeOwned>(v: &serde_json::Value) -> Result<T, MediumError> {
            serde_json::from_value(v.clone()).map_err(|e| MediumError::BadParams(e.to_string()))
        }
        let domain = spec.domain;
        let model = match spec.kind.as_str() {
            "constant" => {
                #[derive(Deserialize)]
                struct P {
                    lambda: f64,
                    mu: f64,
                    rho: f64,
                }
                let p: P = params(&spec.params)?;
                MediumModel::constant(p.lambda, p.mu, p.rho, domain)
            }
            "gaussian-bump-sum" => {
                #[derive(Deserialize)]
                struct FieldP {
                    base: f64,
                    #[serde(default)]
                    bumps: Vec<GaussianBump>,
                }
                #[derive(Deserialize)]
                struct P {
                    lambda: FieldP,
                    mu: FieldP,
                    rho: FieldP,
                }
                let p: P = params(&spec.params)?;
                let f = |fp: FieldP| ScalarField::GaussianBumpSum {
                    base: fp.base,
                    bumps: fp.bumps,
                };
                MediumModel::with_fields(
                    "gaussian-bump-sum",
                    domain,
                    f(p.lambda),
                    f(p.mu),
                    f(p.rho),
                )
            }
            "radial-polynomial" => {
                #[derive(Deserialize)]
                struct FieldP {
                    c0: f64,
                    #[serde(default)]
                    c2: f64,
                    #[serde(default)]
                    c4: f64,
                }
                #[derive(Deserialize)]
                struct P {
                    lambda: FieldP,
                    mu: FieldP,
                    rho: FieldP,
                }
                let p: P = params(&spec.params)?;
                let f = |fp: FieldP| ScalarField::RadialPolynomial {
                    center: domain.center,
                    c0: fp.c0,
                    c2: fp.c2,
                    c4: fp.c4,
                };
                MediumModel::with_fields(
                    "radial-polynomial",
                    domain,
                    f(p.lambda),
                    f(p.mu),
                    f(p.rho),
                )
            }
            "exponential" => {
                #[derive(Deserialize)]
                struct P {
                    lambda0: f64,
                    mu0: f64,
                    rho0: f64,
                    rate: Vec3,
                }
                let p: P = params(&spec.params)?;
                MediumModel::exponential(p.lambda0, p.mu0, p.rho0, p.rate, domain)
            }
            "log-gaussian-bumps" => {
                // λ, μ are ordinary bump sums; ρ = base·e^{2Σ bumps} so that
                // log√ρ is itself a bump sum plus a constant.
                #[derive(Deserialize)]
                struct FieldP {
                    base: f64,
                    #[serde(default)]
                    bumps: Vec<GaussianBump>,
                }
                #[derive(Deserialize)]
                struct P {
                    lambda: FieldP,
                    mu: FieldP,
                    rho: FieldP,
                }
                let p: P = params(&spec.params)?;
                let sum = |fp: FieldP| ScalarField::GaussianBumpSum {
                    base: fp.base,
                    bumps: fp.bumps,
                };
                MediumModel::with_fields(
                    "log-gaussian-bumps",
                    domain,
                    sum(p.lambda),
                    sum(p.mu),
                    ScalarField::LogGaussianBumps {
                        base: p.rho.base,
                        bumps: p.rho.bumps,
                    },
                )
            }
            other => return Err(MediumError::UnknownKind(other.to_string())),
        };
        Ok(model)
    }
}

/// On-disk model document: {"kind": ..., "params": {...}, "domain": {...}}.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: String,
    pub params: serde_json::Value,
    pub domain: Domain,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PositivityReport {
    pub min_mu: f64,
    pub min_3lambda_2mu: f64,
    pub min_rho: f64,
    pub samples: usize,
    pub pass: bool,
}
