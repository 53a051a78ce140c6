//! Recover the density perturbation f = log√ρ − log√ρ₀ from transverse
//! ray-transform data.
//!
//! f is discretized on an n×n×n node lattice over the domain's bounding
//! box, with every node outside Ω or within one cell of ∂Ω pinned to 0
//! (boundary values of ρ are taken as known). Each measurement becomes a
//! sparse row: central finite differences of f on the lattice, trilinearly
//! interpolated at quadrature nodes along the ray and contracted with the
//! transverse linearization functional. Stencil reads that would leave the
//! lattice or land on pinned nodes are dropped — those values are
//! identically zero, so the stencils never read outside the lattice.
//!
//! The regularized normal equations (AᵀA + αLᵀL)f = Aᵀd, L the Dirichlet
//! lattice Laplacian, are solved by the conjugate-residual iteration: the
//! conjugate-gradient variant whose residual 2-norm — exactly the
//! normal-equation residual — is nonincreasing by construction.

use crate::geometry::Chord;
use crate::linalg::{self, Vec3};
use crate::medium::{Domain, MediumModel, WaveMode};
use crate::tensors;
use crate::transforms::{quadrature_weights, Measurement};
use crate::transport;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum InversionError {
    #[error("lattice of {n} nodes per axis is too coarse for FD stencils (need n ≥ 5)")]
    LatticeTooCoarse { n: usize },
    #[error("background density must be structurally constant")]
    NonConstantBackground,
    #[error("operator has {rows} rows but the data vector has {data}")]
    DataMismatch { rows: usize, data: usize },
    #[error("invalid solver config: {0}")]
    BadConfig(String),
    #[error("no ray produced a usable row (all trapped or grazing)")]
    NoRaysSurvived,
    #[error("dataset has no value for ray {ray_id} polarization {pol}")]
    MissingMeasurement { ray_id: usize, pol: u8 },
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub domain: Domain,
}

/// Scalar field on an n³ node lattice over the domain bounding box.
/// Pinned nodes (outside Ω or within one cell of ∂Ω) hold exactly 0.
#[derive(Clone, Debug)]
pub struct GridField {
    pub n: usize,
    pub h: f64,
    pub origin: Vec3,
    pub domain: Domain,
    pub values: Vec<f64>,
    pub pinned: Vec<bool>,
}

impl GridField {
    pub fn zeros(spec: &GridSpec) -> Result<Self, InversionError> {
        let n = spec.n;
        if n < 5 {
            return Err(InversionError::LatticeTooCoarse { n });
        }
        let r = spec.domain.radius;
        let h = 2.0 * r / (n - 1) as f64;
        let origin = linalg::axpy(spec.domain.center, -r, [1.0, 1.0, 1.0]);
        let mut pinned = vec![false; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let x = [
                        origin[0] + i as f64 * h,
                        origin[1] + j as f64 * h,
                        origin[2] + k as f64 * h,
                    ];
                    let d = linalg::dist(x, spec.domain.center);
                    pinned[(i * n + j) * n + k] = d > r - h - 1e-12;
                }
            }
        }
        Ok(GridField {
            n,
            h,
            origin,
            domain: spec.domain,
            values: vec![0.0; n * n * n],
            pinned,
        })
    }

    /// Sample a function at the unpinned nodes (pinned stay 0).
    pub fn discretize(
        spec: &GridSpec,
        f: impl Fn(Vec3) -> f64,
    ) -> Result<Self, InversionError> {
        let mut grid = Self::zeros(spec)?;
        for idx in 0..grid.values.len() {
            if !grid.pinned[idx] {
                grid.values[idx] = f(grid.position_of(idx));
            }
        }
        Ok(grid)
    }

    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    pub fn position(&self, i: usize, j: usize, k: usize) -> Vec3 {
        [
            self.origin[0] + i as f64 * self.h,
            self.origin[1] + j as f64 * self.h,
            self.origin[2] + k as f64 * self.h,
        ]
    }

    pub fn position_of(&self, idx: usize) -> Vec3 {
        let k = idx % self.n;
        let j = (idx / self.n) % self.n;
        let i = idx / (self.n * self.n);
        self.position(i, j, k)
    }

    /// Trilinear interpolation; zero outside the lattice.
    pub fn interp(&self, x: Vec3) -> f64 {
        let n = self.n;
        let t = [
            (x[0] - self.origin[0]) / self.h,
            (x[1] - self.origin[1]) / self.h,
            (x[2] - self.origin[2]) / self.h,
        ];
        if t.iter().any(|&ti| ti < 0.0 || ti > (n - 1) as f64) {
            return 0.0;
        }
        let base = t.map(|ti| (ti.floor() as usize).min(n - 2));
        let u = [t[0] - base[0] as f64, t[1] - base[1] as f64, t[2] - base[2] as f64];
        let mut out = 0.0;
        for c in 0..8usize {
            let (di, dj, dk) = (c >> 2 & 1, c >> 1 & 1, c & 1);
            let w = (if di == 1 { u[0] } else { 1.0 - u[0] })
                * (if dj == 1 { u[1] } else { 1.0 - u[1] })
                * (if dk == 1 { u[2] } else { 1.0 - u[2] });
            out += w * self.values[self.idx(base[0] + di, base[1] + dj, base[2] + dk)];
        }
        out
    }

    pub fn active_count(&self) -> usize {
        self.pinned.iter().filter(|p| !**p).count()
    }
}

/// Relative L2 distance between two lattices over the unpinned nodes.
pub fn relative_interior_error(a: &GridField, truth: &GridField) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for idx in 0..truth.values.len() {
        if !truth.pinned[idx] {
            num += (a.values[idx] - truth.values[idx]).powi(2);
            den += truth.values[idx].powi(2);
        }
    }
    (num / den).sqrt()
}

#[derive(Clone, Copy, Debug)]
pub struct RowMeta {
    pub ray_id: usize,
    pub pol: u8,
}

/// Sparse linearized forward map: one CSR row per (kept ray, polarization).
#[derive(Clone, Debug)]
pub struct ForwardOperator {
    pub grid: GridSpec,
    pub rows: Vec<RowMeta>,
    /// Chord indices that produced no rows (trapped or grazing), in order.
    pub skipped: Vec<usize>,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    data: Vec<f64>,
    ncols: usize,
}

impl ForwardOperator {
    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.nrows()];
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for e in self.indptr[r]..self.indptr[r + 1] {
                acc += self.data[e] * x[self.indices[e] as usize];
            }
            *o = acc;
        }
        out
    }

    pub fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ncols];
        for (r, yr) in y.iter().enumerate() {
            for e in self.indptr[r]..self.indptr[r + 1] {
                out[self.indices[e] as usize] += self.data[e] * yr;
            }
        }
        out
    }

    /// Explicit CSR transpose (used by the adjoint check).
    pub fn transpose_entries(&self) -> (Vec<usize>, Vec<u32>, Vec<f64>) {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.indices {
            counts[c as usize + 1] += 1;
        }
        for c in 0..self.ncols {
            counts[c + 1] += counts[c];
        }
        let mut indices = vec![0u32; self.nnz()];
        let mut data = vec![0.0; self.nnz()];
        let mut cursor = counts.clone();
        for r in 0..self.nrows() {
            for e in self.indptr[r]..self.indptr[r + 1] {
                let c = self.indices[e] as usize;
                indices[cursor[c]] = r as u32;
                data[cursor[c]] = self.data[e];
                cursor[c] += 1;
            }
        }
        (counts, indices, data)
    }

    /// Pull the data vector for this operator's rows out of a measurement
    /// list, matching on (ray_id, polarization).
    pub fn align_data(&self, ms: &[Measurement]) -> Result<Vec<f64>, InversionError> {
        let mut out = Vec::with_capacity(self.nrows());
        for meta in &self.rows {
            let m = ms
                .iter()
                .find(|m| m.ray_id == meta.ray_id && m.pol == meta.pol)
                .ok_or(InversionError::MissingMeasurement {
                    ray_id: meta.ray_id,
                    pol: meta.pol,
                })?;
            out.push(m.value);
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct BuildOptions {
    /// RK4 trace step (g_S arc length).
    pub trace_step: f64,
    /// Trapped-ray guard.
    pub max_length: f64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            trace_step: 5e-3,
            max_length: 20.0,
        }
    }
}

/// Assemble the sparse forward operator for a chord family over a lattice.
/// Quadrature nodes are the ray samples subsampled to ≈ h/2 spacing; rays
/// shorter than 4 quadrature steps are discarded and logged.
pub fn build_forward(
    spec: &GridSpec,
    chords: &[Chord],
    background: &MediumModel,
    opts: &BuildOptions,
) -> Result<ForwardOperator, InversionError> {
    if !background.rho.is_constant() {
        return Err(InversionError::NonConstantBackground);
    }
    let grid = GridField::zeros(spec)?;
    let (n, h) = (grid.n, grid.h);
    let ncols = n * n * n;
    let metric = crate::geometry::ConformalMetric::new(background, WaveMode::S);

    let stride = ((0.5 * h / opts.trace_step).round() as usize).max(1);
    let quad_step = stride as f64 * opts.trace_step;

    let mut op = ForwardOperator {
        grid: *spec,
        rows: Vec::new(),
        skipped: Vec::new(),
        indptr: vec![0],
        indices: Vec::new(),
        data: Vec::new(),
        ncols,
    };
    let mut scratch = vec![0.0f64; ncols];
    let mut stamp = vec![u32::MAX; ncols];
    let mut touched: Vec<u32> = Vec::new();
    let mut row_marker = 0u32;

    for (ray_id, chord) in chords.iter().enumerate() {
        let path = match metric.trace_geodesic(chord.x0, chord.dir, opts.trace_step, opts.max_length)
        {
            Ok(p) => p,
            Err(_) => {
                op.skipped.push(ray_id);
                continue;
            }
        };
        if path.travel_time < 4.0 * quad_step {
            op.skipped.push(ray_id);
            continue;
        }
        let frame = transport::make_frame(&metric, &path);
        // Subsample the trace to quadrature nodes, always keeping the exit.
        let mut node_idx: Vec<usize> = (0..path.samples.len()).step_by(stride).collect();
        if *node_idx.last().unwrap() != path.samples.len() - 1 {
            node_idx.push(path.samples.len() - 1);
        }
        let sub_s: Vec<f64> = node_idx.iter().map(|&k| path.samples[k].s).collect();
        let w = quadrature_weights(&sub_s);

        for (pol, eta) in [&frame.eta1, &frame.eta2].into_iter().enumerate() {
            row_marker += 1;
            touched.clear();
            for (&k, &wk) in node_idx.iter().zip(&w) {
                let x = path.samples[k].x;
                let lin = tensors::transverse_linearization(background, x, eta[k]);
                accumulate_node(
                    &grid,
                    x,
                    wk,
                    &lin,
                    eta[k],
                    &mut scratch,
                    &mut stamp,
                    &mut touched,
                    row_marker,
                );
            }
            touched.sort_unstable();
            for &t in &touched {
                op.indices.push(t);
                op.data.push(scratch[t as usize]);
                scratch[t as usize] = 0.0;
            }
            op.indptr.push(op.indices.len());
            op.rows.push(RowMeta {
                ray_id,
                pol: pol as u8 + 1,
            });
        }
    }
    if op.rows.is_empty() {
        return Err(InversionError::NoRaysSurvived);
    }
    Ok(op)
}

/// Scatter one quadrature node's functional into the dense scratch row:
/// trilinear corner weights composed with lattice central FD stencils for
/// the gradient and Hessian entering the transverse linearization.
#[allow(clippy::too_many_arguments)]
fn accumulate_node(
    grid: &GridField,
    x: Vec3,
    w: f64,
    lin: &tensors::TransverseLin,
    eta: Vec3,
    scratch: &mut [f64],
    stamp: &mut [u32],
    touched: &mut Vec<u32>,
    marker: u32,
) {
    let n = grid.n as isize;
    let h = grid.h;
    let t = [
        (x[0] - grid.origin[0]) / h,
        (x[1] - grid.origin[1]) / h,
        (x[2] - grid.origin[2]) / h,
    ];
    let base = t.map(|ti| (ti.floor() as isize).clamp(0, n - 2));
    let u = [
        t[0] - base[0] as f64,
        t[1] - base[1] as f64,
        t[2] - base[2] as f64,
    ];
    // Per-axis second-difference and gradient coefficients; cross terms
    // carry 4η_iη_j per unordered pair (2·ηᵀHη expanded).
    let d2 = [
        lin.eta_sq + 2.0 * eta[0] * eta[0],
        lin.eta_sq + 2.0 * eta[1] * eta[1],
        lin.eta_sq + 2.0 * eta[2] * eta[2],
    ];
    let inv2h = 1.0 / (2.0 * h);
    let invh2 = 1.0 / (h * h);

    let mut add = |i: isize, j: isize, k: isize, v: f64| {
        if i < 0 || j < 0 || k < 0 || i >= n || j >= n || k >= n {
            return; // outside the lattice: implicit zero
        }
        let idx = ((i * n + j) * n + k) as usize;
        if grid.pinned[idx] {
            return; // pinned: identically zero
        }
        if stamp[idx] != marker {
            stamp[idx] = marker;
            touched.push(idx as u32);
            scratch[idx] = 0.0;
        }
        scratch[idx] += v;
    };

    const E: [[isize; 3]; 3] = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
    for c in 0..8usize {
        let d = [(c >> 2 & 1) as isize, (c >> 1 & 1) as isize, (c & 1) as isize];
        let wc = (if d[0] == 1 { u[0] } else { 1.0 - u[0] })
            * (if d[1] == 1 { u[1] } else { 1.0 - u[1] })
            * (if d[2] == 1 { u[2] } else { 1.0 - u[2] });
        if wc == 0.0 {
            continue;
        }
        let (ci, cj, ck) = (base[0] + d[0], base[1] + d[1], base[2] + d[2]);
        let s = w * wc;
        for a in 0..3 {
            let e = E[a];
            // gradient: (f[c+e] − f[c−e])/2h
            let gc = s * lin.g[a] * inv2h;
            add(ci + e[0], cj + e[1], ck + e[2], gc);
            add(ci - e[0], cj - e[1], ck - e[2], -gc);
            // ∂²aa: (f[c+e] − 2f[c] + f[c−e])/h²
            let dc = s * d2[a] * invh2;
            add(ci + e[0], cj + e[1], ck + e[2], dc);
            add(ci - e[0], cj - e[1], ck - e[2], dc);
            add(ci, cj, ck, -2.0 * dc);
        }
        for a in 0..3 {
            for b in (a + 1)..3 {
                // ∂²ab: 4-point cross stencil /4h²
                let cross = s * 4.0 * eta[a] * eta[b] * invh2 * 0.25;
                if cross == 0.0 {
                    continue;
                }
                let (ea, eb) = (E[a], E[b]);
                add(ci + ea[0] + eb[0], cj + ea[1] + eb[1], ck + ea[2] + eb[2], cross);
                add(ci + ea[0] - eb[0], cj + ea[1] - eb[1], ck + ea[2] - eb[2], -cross);
                add(ci - ea[0] + eb[0], cj - ea[1] + eb[1], ck - ea[2] + eb[2], -cross);
                add(ci - ea[0] - eb[0], cj - ea[1] - eb[1], ck - ea[2] - eb[2], cross);
            }
        }
    }
}

/// Max relative adjoint defect |⟨Ax,y⟩ − ⟨x,Aᵀy⟩| / (‖Ax‖·‖y‖) over ten
/// seeded random probes, with Aᵀ taken from the explicit transpose.
pub fn adjoint_check(op: &ForwardOperator) -> f64 {
    use rand::{Rng, SeedableRng};
    let (tptr, tind, tdat) = op.transpose_entries();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xad01);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let x: Vec<f64> = (0..op.ncols).map(|_| rng.gen::<f64>() - 0.5).collect();
        let y: Vec<f64> = (0..op.nrows()).map(|_| rng.gen::<f64>() - 0.5).collect();
        let ax = op.apply(&x);
        // Aᵀy via the explicit transpose rows.
        let mut aty = vec![0.0; op.ncols];
        for (c, at) in aty.iter_mut().enumerate() {
            let mut acc = 0.0;
            for e in tptr[c]..tptr[c + 1] {
                acc += tdat[e] * y[tind[e] as usize];
            }
            *at = acc;
        }
        let lhs: f64 = ax.iter().zip(&y).map(|(a, b)| a * b).sum();
        let rhs: f64 = x.iter().zip(&aty).map(|(a, b)| a * b).sum();
        let ax_norm = ax.iter().map(|v| v * v).sum::<f64>().sqrt();
        let y_norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let denom = ax_norm * y_norm;
        if denom > 0.0 {
            worst = worst.max((lhs - rhs).abs() / denom);
        }
    }
    worst
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SolverConfig {
    pub alpha: f64,
    pub max_iter: usize,
    /// Stop when ‖r‖ ≤ tol·‖Aᵀd‖.
    pub tol: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            alpha: 1e-8,
            max_iter: 600,
            tol: 1e-10,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub f_hat: GridField,
    /// ‖Aᵀ(Af−d) + αLᵀLf‖ after each iteration (index 0: initial guess).
    pub residual_history: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

/// Dirichlet lattice Laplacian on the unpinned nodes (pinned and
/// out-of-lattice neighbors read as 0); output is 0 on pinned nodes.
fn laplacian_apply(grid: &GridField, x: &[f64], out: &mut [f64]) {
    let n = grid.n as isize;
    let invh2 = 1.0 / (grid.h * grid.h);
    let at = |i: isize, j: isize, k: isize| -> f64 {
        if i < 0 || j < 0 || k < 0 || i >= n || j >= n || k >= n {
            return 0.0;
        }
        let idx = ((i * n + j) * n + k) as usize;
        if grid.pinned[idx] {
            0.0
        } else {
            x[idx]
        }
    };
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let idx = ((i * n + j) * n + k) as usize;
                if grid.pinned[idx] {
                    out[idx] = 0.0;
                    continue;
                }
                out[idx] = (at(i + 1, j, k)
                    + at(i - 1, j, k)
                    + at(i, j + 1, k)
                    + at(i, j - 1, k)
                    + at(i, j, k + 1)
                    + at(i, j, k - 1)
                    - 6.0 * x[idx])
                    * invh2;
            }
        }
    }
}

/// Conjugate-residual solve of (AᵀA + αLᵀL)f = Aᵀd. Deterministic: all
/// reductions are sequential fixed-order sums.
pub fn solve(
    op: &ForwardOperator,
    data: &[f64],
    config: &SolverConfig,
) -> Result<SolveOutcome, InversionError> {
    if data.len() != op.nrows() {
        return Err(InversionError::DataMismatch {
            rows: op.nrows(),
            data: data.len(),
        });
    }
    if config.alpha < 0.0 {
        return Err(InversionError::BadConfig(format!(
            "alpha = {} < 0",
            config.alpha
        )));
    }
    if config.max_iter < 1 {
        return Err(InversionError::BadConfig("max_iter = 0".into()));
    }
    let grid = GridField::zeros(&op.grid)?;
    let ncols = grid.values.len();
    let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };

    let mut lap = vec![0.0; ncols];
    let mut lap2 = vec![0.0; ncols];
    let mut normal_apply = |x: &[f64], out: &mut Vec<f64>| {
        let ax = op.apply(x);
        *out = op.apply_transpose(&ax);
        if config.alpha > 0.0 {
            laplacian_apply(&grid, x, &mut lap);
            laplacian_apply(&grid, &lap, &mut lap2);
            for (o, l) in out.iter_mut().zip(&lap2) {
                *o += config.alpha * *l;
            }
        }
    };

    let b = op.apply_transpose(data);
    let b_norm = dot(&b, &b).sqrt();
    let mut x = vec![0.0; ncols];
    let mut r = b.clone();
    let mut history = vec![b_norm];
    let mut converged = b_norm == 0.0;
    let mut iterations = 0;

    if !converged {
        let mut p = r.clone();
        let mut mr = vec![0.0; ncols];
        normal_apply(&r, &mut mr);
        let mut mp = mr.clone();
        let mut r_mr = dot(&r, &mr);
        for it in 1..=config.max_iter {
            iterations = it;
            let mp_mp = dot(&mp, &mp);
            if mp_mp == 0.0 || r_mr == 0.0 {
                converged = true;
                break;
            }
            let alpha = r_mr / mp_mp;
            for (xi, pi) in x.iter_mut().zip(&p) {
                *xi += alpha * pi;
            }
            for (ri, mpi) in r.iter_mut().zip(&mp) {
                *ri -= alpha * mpi;
            }
            let r_norm = dot(&r, &r).sqrt();
            history.push(r_norm);
            if r_norm <= config.tol * b_norm {
                converged = true;
                break;
            }
            normal_apply(&r, &mut mr);
            let r_mr_new = dot(&r, &mr);
            let beta = r_mr_new / r_mr;
            r_mr = r_mr_new;
            for (pi, ri) in p.iter_mut().zip(&r) {
                *pi = ri + beta * *pi;
            }
            for (mpi, mri) in mp.iter_mut().zip(&mr) {
                *mpi = mri + beta * *mpi;
            }
        }
    }

    let mut f_hat = grid;
    f_hat.values = x;
    // Pinning is structural: A has no entries there and L projects, so the
    // iterates never moved off 0 — but make it explicit.
    for (v, p) in f_hat.values.iter_mut().zip(&f_hat.pinned) {
        if *p {
            *v = 0.0;
        }
    }
    Ok(SolveOutcome {
        f_hat,
        residual_history: history,
        converged,
        iterations,
    })
}

/// ρ = ρ₀·e^{2f̂} nodewise (pinned nodes recover exactly ρ₀).
pub fn recover_density(f_hat: &GridField, rho0: f64) -> Vec<f64> {
    f_hat.values.iter().map(|f| rho0 * (2.0 * f).exp()).collect()
}
