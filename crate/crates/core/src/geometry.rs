//! Conformal metrics g = c⁻² g_E and their geodesics.
//!
//! For g = c⁻² g_E the Christoffel symbols are, with b = ∇log c,
//!
//! Γ^k_ij = −(δ_ik b_j + δ_jk b_i − δ_ij b_k),
//!
//! so the geodesic equation reads v̇ = 2(b·v)v − |v|² b. Arc length in g is
//! travel time; unit g-speed means |v|_E = c(x). Two vectors are
//! g-orthogonal iff they are Euclidean-orthogonal.
//!
//! Paths are integrated by classical fixed-step RK4 and terminated at the
//! domain boundary by bisection on the last step. Everything downstream
//! (parallel transport, spreading, quadrature) reuses the sample grid
//! produced here: uniform spacing `step` followed by one shorter final
//! interval ending on the boundary sphere.

use crate::linalg::{self, Mat3, Vec3, ZERO_VEC};
use crate::medium::{Domain, MediumModel, WaveMode};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const GOLDEN_ANGLE: f64 = 2.399963229728653; // π(3 − √5)

#[derive(Debug, thiserror::Error)]
pub enum GeometryError {
    #[error("geodesic exceeded the maximum length {max_length} (trapped ray guard)")]
    Trapped { max_length: f64 },
    #[error("invalid ray start: {0}")]
    BadStart(String),
}

/// The metric c⁻² g_E with c the P- or S-wavespeed of a medium.
#[derive(Clone, Copy)]
pub struct ConformalMetric<'a> {
    pub model: &'a MediumModel,
    pub mode: WaveMode,
}

impl<'a> ConformalMetric<'a> {
    pub fn new(model: &'a MediumModel, mode: WaveMode) -> Self {
        ConformalMetric { model, mode }
    }

    pub fn domain(&self) -> Domain {
        self.model.domain
    }

    pub fn speed(&self, x: Vec3) -> f64 {
        self.model.wavespeed(self.mode, x)
    }

    pub fn speed_sq(&self, x: Vec3) -> f64 {
        self.model.wavespeed_sq(self.mode, x)
    }

    /// b = ∇log c = ∇(c²) / (2c²)
    pub fn grad_log_speed(&self, x: Vec3) -> Vec3 {
        let c2 = self.model.wavespeed_sq(self.mode, x);
        linalg::scale(self.model.wavespeed_sq_gradient(self.mode, x), 0.5 / c2)
    }

    /// Metric tensor g(x) = c(x)⁻² I.
    pub fn tensor(&self, x: Vec3) -> Mat3 {
        linalg::mat_scale(linalg::identity(), 1.0 / self.speed_sq(x))
    }

    /// g_x(u, w) = u·w / c(x)²
    pub fn inner(&self, x: Vec3, u: Vec3, w: Vec3) -> f64 {
        linalg::dot(u, w) / self.speed_sq(x)
    }

    pub fn g_norm(&self, x: Vec3, u: Vec3) -> f64 {
        self.inner(x, u, u).sqrt()
    }

    /// Scale a direction to unit g-length (Euclidean length c(x)).
    pub fn g_unit(&self, x: Vec3, dir: Vec3) -> Vec3 {
        linalg::scale(dir, self.speed(x) / linalg::norm(dir))
    }

    /// Γ^k_ij at x; symmetric in (i, j).
    pub fn christoffels(&self, x: Vec3) -> [[[f64; 3]; 3]; 3] {
        let b = self.grad_log_speed(x);
        let mut gamma = [[[0.0; 3]; 3]; 3];
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    let mut v = 0.0;
                    if i == k {
                        v += b[j];
                    }
                    if j == k {
                        v += b[i];
                    }
                    if i == j {
                        v -= b[k];
                    }
                    gamma[k][i][j] = -v;
                }
            }
        }
        gamma
    }

    /// Covariant derivative term −Γ(u, w) in closed form.
    pub(crate) fn minus_gamma(&self, b: Vec3, u: Vec3, w: Vec3) -> Vec3 {
        // −Γ^k_ij u^i w^j = u^k (b·w) + w^k (b·u) − b^k (u·w)
        let bu = linalg::dot(b, u);
        let bw = linalg::dot(b, w);
        let uw = linalg::dot(u, w);
        [
            u[0] * bw + w[0] * bu - b[0] * uw,
            u[1] * bw + w[1] * bu - b[1] * uw,
            u[2] * bw + w[2] * bu - b[2] * uw,
        ]
    }

    fn rhs(&self, st: &AugState) -> AugState {
        let b = self.grad_log_speed(st.x);
        AugState {
            x: st.v,
            v: self.minus_gamma(b, st.v, st.v),
            eta: self.minus_gamma(b, st.v, st.eta),
        }
    }

    fn rk4_step(&self, st: &AugState, h: f64) -> AugState {
        let k1 = self.rhs(st);
        let k2 = self.rhs(&st.shifted(&k1, 0.5 * h));
        let k3 = self.rhs(&st.shifted(&k2, 0.5 * h));
        let k4 = self.rhs(&st.shifted(&k3, h));
        let mut out = *st;
        for i in 0..3 {
            out.x[i] += h / 6.0 * (k1.x[i] + 2.0 * k2.x[i] + 2.0 * k3.x[i] + k4.x[i]);
            out.v[i] += h / 6.0 * (k1.v[i] + 2.0 * k2.v[i] + 2.0 * k3.v[i] + k4.v[i]);
            out.eta[i] += h / 6.0 * (k1.eta[i] + 2.0 * k2.eta[i] + 2.0 * k3.eta[i] + k4.eta[i]);
        }
        out
    }

    /// Trace the unit-speed geodesic from a boundary point into the domain
    /// until it exits, with fixed RK4 step `step` (g-arc length = travel
    /// time). The boundary crossing is located by bisection on the final
    /// step; `max_length` guards against trapped rays.
    ///
    /// `v0` is renormalized to exact unit g-speed; it must be a nonzero
    /// direction (pointing inward for a nondegenerate path).
    pub fn trace_geodesic(
        &self,
        x0: Vec3,
        v0: Vec3,
        step: f64,
        max_length: f64,
    ) -> Result<GeodesicPath, GeometryError> {
        let domain = self.domain();
        if linalg::norm(v0) == 0.0 {
            return Err(GeometryError::BadStart("zero initial direction".into()));
        }
        if step <= 0.0 || !step.is_finite() {
            return Err(GeometryError::BadStart(format!("invalid step {step}")));
        }
        if domain.boundary_defect(x0).abs() > 1e-6 {
            return Err(GeometryError::BadStart(format!(
                "start point is {:.3e} away from the boundary sphere",
                domain.boundary_defect(x0)
            )));
        }
        let v0 = self.g_unit(x0, v0);
        let mut st = AugState { x: x0, v: v0, eta: ZERO_VEC };
        let mut s = 0.0;
        let mut samples = vec![PathSample { s, x: st.x, v: st.v }];

        loop {
            let next = self.rk4_step(&st, step);
            if domain.boundary_defect(next.x) >= 0.0 {
                // Crossed (or grazed) the boundary within this step: bisect.
                let (t_exit, exit) = self.bisect_exit(&st, step, &domain, samples.len() == 1);
                if t_exit > 1e-12 {
                    s += t_exit;
                    samples.push(PathSample { s, x: exit.x, v: exit.v });
                }
                return Ok(GeodesicPath {
                    mode: self.mode,
                    step,
                    travel_time: s,
                    samples,
                });
            }
            st = next;
            s += step;
            samples.push(PathSample { s, x: st.x, v: st.v });
            if s > max_length {
                return Err(GeometryError::Trapped { max_length });
            }
        }
    }

    /// Bisect t ∈ (0, step] for the boundary crossing of one RK4 step from
    /// `st`. When `st` itself sits on the boundary (the first step of a
    /// grazing ray) the sign change is seeded by subsampling.
    fn bisect_exit(&self, st: &AugState, step: f64, domain: &Domain, first: bool) -> (f64, AugState) {
        let defect = |t: f64| domain.boundary_defect(self.rk4_step(st, t).x);
        let mut lo = 0.0;
        if first && defect(0.0) >= -1e-15 {
            // Start sample lies on the sphere; look for an interior foothold.
            let mut found = false;
            for k in 1..16 {
                let t = step * (k as f64) / 16.0;
                if defect(t) < 0.0 {
                    lo = t;
                    found = true;
                } else if found {
                    break;
                }
            }
            if !found {
                // Degenerate grazing chord shorter than the subsample grid.
                return (0.0, *st);
            }
        }
        let mut hi = step;
        for _ in 0..90 {
            if hi - lo <= 1e-13 {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if defect(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (hi, self.rk4_step(st, hi))
    }

    /// Parallel transport dη/ds = −Γ(v, η) along a traced path, integrating
    /// the augmented state (x, v, η) with the same RK4 stepper so the
    /// carried (x, v) reproduces the stored samples exactly. Returns η at
    /// every path sample.
    pub(crate) fn transport_along(&self, path: &GeodesicPath, eta0: Vec3) -> Vec<Vec3> {
        let mut out = Vec::with_capacity(path.samples.len());
        out.push(eta0);
        let mut st = AugState {
            x: path.samples[0].x,
            v: path.samples[0].v,
            eta: eta0,
        };
        for k in 1..path.samples.len() {
            let h = path.samples[k].s - path.samples[k - 1].s;
            st = self.rk4_step(&st, h);
            out.push(st.eta);
        }
        out
    }

    /// Integrate a ray on a prescribed travel-time grid with no boundary
    /// handling (auxiliary rays of the spreading computation may leave the
    /// domain; the medium's closed forms extend smoothly).
    fn integrate_on_grid(&self, x0: Vec3, v0: Vec3, s_grid: &[f64]) -> Vec<Vec3> {
        let mut out = Vec::with_capacity(s_grid.len());
        let mut st = AugState { x: x0, v: v0, eta: ZERO_VEC };
        out.push(st.x);
        for k in 1..s_grid.len() {
            st = self.rk4_step(&st, s_grid[k] - s_grid[k - 1]);
            out.push(st.x);
        }
        out
    }

    /// Geodesic-spreading profile J along a path from central-difference ray
    /// perturbation: four auxiliary rays offset by ±δ in the two transverse
    /// directions are integrated on the base grid, and J(s) is the
    /// determinant of the 2×2 transverse deviation matrix in a parallel
    /// frame. The plane-wave family is normalized so J(0) = 1; the
    /// point-source family has J(0) = 0 and only ratios are meaningful.
    pub fn spreading_jacobian(
        &self,
        path: &GeodesicPath,
        family: RayFamily,
        delta: f64,
    ) -> SpreadingProfile {
        assert!(delta > 0.0, "perturbation size must be positive");
        let x0 = path.samples[0].x;
        let v0 = path.samples[0].v;
        let c0 = self.speed(x0);
        // g-orthonormal transverse frame at the start, transported along.
        let (e1, e2) = transverse_frame(v0, c0);
        let frames = [self.transport_along(path, e1), self.transport_along(path, e2)];
        let s_grid: Vec<f64> = path.samples.iter().map(|p| p.s).collect();

        // Auxiliary rays: [dir +e1, dir −e1, dir +e2, dir −e2].
        let mut aux = Vec::with_capacity(4);
        for (sign, e) in [(1.0, e1), (-1.0, e1), (1.0, e2), (-1.0, e2)] {
            let (xa, va) = match family {
                RayFamily::PlaneWave => {
                    // Shift the foot point; keep the direction, rescaled to
                    // unit g-speed at the shifted point.
                    let u = linalg::normalize(e);
                    let xa = linalg::axpy(x0, sign * delta, u);
                    (xa, self.g_unit(xa, v0))
                }
                RayFamily::PointSource => {
                    // Rotate the direction by ±δ in the (v, e) plane; the
                    // combination of g-orthonormal vectors stays g-unit.
                    let va = linalg::axpy(linalg::scale(v0, delta.cos()), sign * delta.sin(), e);
                    (x0, va)
                }
            };
            aux.push(self.integrate_on_grid(xa, va, &s_grid));
        }

        let mut dets = Vec::with_capacity(s_grid.len());
        for k in 0..s_grid.len() {
            let x = path.samples[k].x;
            let c2 = self.speed_sq(x);
            let d1 = linalg::scale(linalg::sub(aux[0][k], aux[1][k]), 0.5 / delta);
            let d2 = linalg::scale(linalg::sub(aux[2][k], aux[3][k]), 0.5 / delta);
            let mut d = [[0.0f64; 2]; 2];
            for (j, dj) in [d1, d2].iter().enumerate() {
                for i in 0..2 {
                    d[i][j] = linalg::dot(*dj, frames[i][k]) / c2;
                }
            }
            dets.push(d[0][0] * d[1][1] - d[0][1] * d[1][0]);
        }

        let values: Vec<f64> = match family {
            RayFamily::PlaneWave => {
                let d0 = dets[0];
                dets.iter().map(|d| d / d0).collect()
            }
            RayFamily::PointSource => dets,
        };
        let caustic_samples = values
            .iter()
            .enumerate()
            .filter(|(k, j)| **j <= 0.0 && !(family == RayFamily::PointSource && *k == 0))
            .map(|(k, _)| k)
            .collect();
        SpreadingProfile {
            family,
            delta,
            values,
            caustic_samples,
        }
    }
}

/// Augmented integration state: position, velocity, and one transported
/// vector (zero when unused).
#[derive(Clone, Copy)]
struct AugState {
    x: Vec3,
    v: Vec3,
    eta: Vec3,
}

impl AugState {
    fn shifted(&self, d: &AugState, h: f64) -> AugState {
        AugState {
            x: linalg::axpy(self.x, h, d.x),
            v: linalg::axpy(self.v, h, d.v),
            eta: linalg::axpy(self.eta, h, d.eta),
        }
    }
}

/// A g-orthonormal pair (e1, e2) Euclidean-orthogonal to v with |e_i|_E = c.
/// Deterministic in v: the auxiliary axis is the coordinate axis least
/// aligned with v.
pub(crate) fn transverse_frame(v: Vec3, c: f64) -> (Vec3, Vec3) {
    let vhat = linalg::normalize(v);
    let mut axis = ZERO_VEC;
    let a = [vhat[0].abs(), vhat[1].abs(), vhat[2].abs()];
    let i_min = if a[0] <= a[1] && a[0] <= a[2] {
        0
    } else if a[1] <= a[2] {
        1
    } else {
        2
    };
    axis[i_min] = 1.0;
    let e1 = linalg::normalize(linalg::cross(vhat, axis));
    let e2 = linalg::cross(vhat, e1); // unit, orthogonal to both
    (linalg::scale(e1, c), linalg::scale(e2, c))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RayFamily {
    PlaneWave,
    PointSource,
}

#[derive(Clone, Copy, Debug)]
pub struct PathSample {
    /// g-arc length (travel time) from the start.
    pub s: f64,
    pub x: Vec3,
    /// Velocity dx/ds; |v|_E = c(x) at unit g-speed.
    pub v: Vec3,
}

/// A sampled unit-speed geodesic from boundary to boundary.
#[derive(Clone, Debug)]
pub struct GeodesicPath {
    pub mode: WaveMode,
    /// Uniform sample spacing; the final interval is shorter (boundary hit).
    pub step: f64,
    pub samples: Vec<PathSample>,
    /// Total g-arc length = travel time = final s.
    pub travel_time: f64,
}

impl GeodesicPath {
    pub fn start(&self) -> &PathSample {
        &self.samples[0]
    }

    pub fn end(&self) -> &PathSample {
        self.samples.last().expect("path has at least one sample")
    }

    pub fn s_grid(&self) -> Vec<f64> {
        self.samples.iter().map(|p| p.s).collect()
    }
}

/// A ray start: boundary point and inward Euclidean-unit direction.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Chord {
    pub x0: Vec3,
    pub dir: Vec3,
}

/// Deterministic quasi-uniform chord set: a seeded-rotation Fibonacci sphere
/// of boundary points, each carrying an inward golden-spiral cone fan of
/// directions with half-angle `theta_max` about the inward normal.
pub fn generate_chords(
    domain: Domain,
    n_points: usize,
    n_dirs: usize,
    theta_max: f64,
    seed: u64,
) -> Vec<Chord> {
    assert!(n_points >= 1 && n_dirs >= 1, "need at least one point and direction");
    assert!(theta_max > 0.0 && theta_max < std::f64::consts::FRAC_PI_2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rot = random_rotation(&mut rng);
    let mut chords = Vec::with_capacity(n_points * n_dirs);
    for i in 0..n_points {
        let z = 1.0 - 2.0 * (i as f64 + 0.5) / (n_points as f64);
        let r = (1.0 - z * z).max(0.0).sqrt();
        let phi = GOLDEN_ANGLE * (i as f64);
        let p = linalg::mat_vec(rot, [r * phi.cos(), r * phi.sin(), z]);
        let x0 = linalg::axpy(domain.center, domain.radius, p);
        let normal_in = linalg::scale(p, -1.0); // unit inward normal
        let (t1, t2) = tangent_basis(normal_in);
        let psi0: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
        for j in 0..n_dirs {
            let theta = theta_max * (((j as f64) + 0.5) / (n_dirs as f64)).sqrt();
            let psi = psi0 + GOLDEN_ANGLE * (j as f64);
            let dir = linalg::axpy(
                linalg::axpy(
                    linalg::scale(normal_in, theta.cos()),
                    theta.sin() * psi.cos(),
                    t1,
                ),
                theta.sin() * psi.sin(),
                t2,
            );
            chords.push(Chord { x0, dir });
        }
    }
    chords
}

/// Euclidean-orthonormal basis of the plane orthogonal to unit `n`.
fn tangent_basis(n: Vec3) -> (Vec3, Vec3) {
    let a = [n[0].abs(), n[1].abs(), n[2].abs()];
    let mut axis = ZERO_VEC;
    let i_min = if a[0] <= a[1] && a[0] <= a[2] {
        0
    } else if a[1] <= a[2] {
        1
    } else {
        2
    };
    axis[i_min] = 1.0;
    let t1 = linalg::normalize(linalg::cross(n, axis));
    let t2 = linalg::cross(n, t1);
    (t1, t2)
}

/// Uniform random rotation (Shoemake quaternion method).
fn random_rotation(rng: &mut ChaCha8Rng) -> Mat3 {
    let u1: f64 = rng.gen();
    let u2: f64 = rng.gen();
    let u3: f64 = rng.gen();
    let tau = std::f64::consts::TAU;
    let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
    let q = [
        a * (tau * u2).sin(),
        a * (tau * u2).cos(),
        b * (tau * u3).sin(),
        b * (tau * u3).cos(),
    ];
    let (x, y, z, w) = (q[0], q[1], q[2], q[3]);
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - z * w), 2.0 * (x * z + y * w)],
        [2.0 * (x * y + z * w), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - x * w)],
        [2.0 * (x * z - y * w), 2.0 * (y * z + x * w), 1.0 - 2.0 * (x * x + y * y)],
    ]
}

/// Spreading determinant J sampled on a path's grid.
#[derive(Clone, Debug)]
pub struct SpreadingProfile {
    pub family: RayFamily,
    pub delta: f64,
    pub values: Vec<f64>,
    /// Sample indices with J ≤ 0 (caustics); flagged, never fatal here.
    pub caustic_samples: Vec<usize>,
}

impl SpreadingProfile {
    pub fn is_caustic_free(&self) -> bool {
        self.caustic_samples.is_empty()
    }
}

/// Minimum of the boundary sphere's second fundamental form w.r.t. g over a
/// boundary lattice and Euclidean-unit tangent directions.
///
/// With outward g-unit normal N = c ν̂, the value at (x, X) is
/// II(X, X) = g(∇^g_X N, X). Strict convexity holds iff the minimum is
/// positive; for constant c on the unit sphere the minimum is 1/c.
pub fn check_strict_convexity(
    metric: &ConformalMetric,
    n_points: usize,
    n_dirs: usize,
) -> ConvexityReport {
    let domain = metric.domain();
    let r = domain.radius;
    let mut min_value = f64::INFINITY;
    let mut argmin = ZERO_VEC;
    for i in 0..n_points {
        let z = 1.0 - 2.0 * (i as f64 + 0.5) / (n_points as f64);
        let rr = (1.0 - z * z).max(0.0).sqrt();
        let phi = GOLDEN_ANGLE * (i as f64);
        let nu = [rr * phi.cos(), rr * phi.sin(), z]; // outward unit normal
        let x = linalg::axpy(domain.center, r, nu);
        let c = metric.speed(x);
        let c2 = c * c;
        let grad_c = linalg::scale(metric.model.wavespeed_sq_gradient(metric.mode, x), 0.5 / c);
        let b = metric.grad_log_speed(x);
        let (t1, t2) = tangent_basis(nu);
        for j in 0..n_dirs {
            let ang = std::f64::consts::PI * (j as f64) / (n_dirs as f64);
            let xdir = linalg::axpy(linalg::scale(t1, ang.cos()), ang.sin(), t2);
            // ∇^g_X N with N = c ν̂, ∂ν̂ = (I − ν̂⊗ν̂)/r on the sphere:
            let xn = linalg::dot(xdir, nu);
            let dn = linalg::axpy(
                linalg::scale(nu, linalg::dot(xdir, grad_c)),
                c / r,
                linalg::axpy(xdir, -xn, nu),
            );
            let n_vec = linalg::scale(nu, c);
            let cov = linalg::add(dn, metric.minus_gamma(linalg::scale(b, -1.0), xdir, n_vec));
            let ii = linalg::dot(cov, xdir) / c2;
            if ii < min_value {
                min_value = ii;
                argmin = x;
            }
        }
    }
    ConvexityReport {
        min_value,
        argmin,
        pass: min_value > 0.0,
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub min_value: f64,
    pub argmin: Vec3,
    pub pass: bool,
}

/// Minimum eigenvalue of the metric Hessian ∇²_g φ, φ = |x − center|², over
/// an n³ interior lattice. φ is a strictly convex foliation function for g
/// iff the minimum is positive (constant c gives ∇²_g φ = 2I).
pub fn check_convex_foliation(metric: &ConformalMetric, n: usize) -> FoliationReport {
    assert!(n >= 2);
    let domain = metric.domain();
    let (lo, hi) = domain.bounding_box();
    let mut min_eigenvalue = f64::INFINITY;
    let mut argmin = ZERO_VEC;
    for ix in 0..n {
        for iy in 0..n {
            for iz in 0..n {
                let t = |i: usize, a: f64, b: f64| a + (b - a) * (i as f64) / ((n - 1) as f64);
                let x = [t(ix, lo[0], hi[0]), t(iy, lo[1], hi[1]), t(iz, lo[2], hi[2])];
                if domain.boundary_defect(x) >= 0.0 {
                    continue;
                }
                let y = linalg::sub(x, domain.center);
                let b = metric.grad_log_speed(x);
                // (∇²_g φ)_ij = 2δ_ij − 2Γ^k_ij y_k
                //            = 2δ_ij + 2(y_i b_j + y_j b_i − δ_ij b·y)
                let by = linalg::dot(b, y);
                let mut h = [[0.0f64; 3]; 3];
                for i in 0..3 {
                    for j in 0..3 {
                        h[i][j] = 2.0 * (y[i] * b[j] + y[j] * b[i]);
                        if i == j {
                            h[i][j] += 2.0 * (1.0 - by);
                        }
                    }
                }
                let e = linalg::min_eigenvalue(h);
                if e < min_eigenvalue {
                    min_eigenvalue = e;
                    argmin = x;
                }
            }
        }
    }
    FoliationReport {
        min_eigenvalue,
        argmin,
        pass: min_eigenvalue > 0.0,
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FoliationReport {
    pub min_eigenvalue: f64,
    pub argmin: Vec3,
    pub pass: bool,
}

/// Maximum travel time over a traced chord set; validates a recording span
/// T against the longest geodesic. Propagates the trapped-ray error.
pub fn max_geodesic_length(
    metric: &ConformalMetric,
    chords: &[Chord],
    step: f64,
    max_length: f64,
) -> Result<f64, GeometryError> {
    assert!(!chords.is_empty(), "chord set must be nonempty");
    let mut longest = 0.0f64;
    for ch in chords {
        let path = metric.trace_geodesic(ch.x0, ch.dir, step, max_length)?;
        longest = longest.max(path.travel_time);
    }
    Ok(longest)
}
