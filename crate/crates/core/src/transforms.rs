//! Longitudinal and transverse geodesic ray transforms.
//!
//! Longitudinal: ∫ γ̇ᵀ·T(γ(s))·γ̇ ds with γ̇ in Euclidean components
//! (|γ̇|_E = c at unit g-speed). Transverse: ∫ ηᵀ·T(γ(s))·η ds with η a
//! parallel-transported vector, plain contraction throughout.
//!
//! Quadrature reuses the tracer's sample grid: composite Simpson on the
//! uniform part (a 3/8 closure absorbs an odd interval count without losing
//! order), trapezoid on the boundary-bisected final partial interval. Every
//! consumer integrates through `quadrature_weights`/`integrate_path`, so
//! cross-module identities hold bitwise, not just to tolerance.

use crate::geometry::{Chord, ConformalMetric, GeodesicPath, GeometryError};
use crate::linalg::{self, Vec3};
use crate::medium::{MediumModel, ScalarField, WaveMode};
use crate::tensors::{self, SymTensorField, TensorError};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum TransformError {
    #[error("transported vector has {got} samples but the path has {expected}")]
    FrameMisaligned { expected: usize, got: usize },
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// Quadrature weights for a sample grid `s` as produced by the tracer:
/// uniform spacing with at most one shorter final interval. Simpson 1/3 on
/// an even number of uniform intervals; an odd count ≥ 3 closes with one
/// Simpson 3/8 panel (also exact through cubics); a single interval falls
/// back to the trapezoid, as does the partial tail.
pub fn quadrature_weights(s: &[f64]) -> Vec<f64> {
    let n = s.len();
    let mut w = vec![0.0; n];
    if n < 2 {
        return w;
    }
    let h = s[1] - s[0];
    let last = s[n - 1] - s[n - 2];
    let partial = n >= 3 && (last - h).abs() > 1e-9 * h;
    let m = if partial { n - 1 } else { n }; // samples in the uniform part
    let k = m - 1; // uniform intervals
    if k == 1 {
        w[0] += 0.5 * h;
        w[1] += 0.5 * h;
    } else if k % 2 == 0 {
        simpson_13(&mut w[..m], h);
    } else if k == 3 {
        simpson_38(&mut w[..4], h);
    } else {
        simpson_13(&mut w[..m - 3], h);
        simpson_38(&mut w[m - 4..m], h);
    }
    if partial {
        w[n - 2] += 0.5 * last;
        w[n - 1] += 0.5 * last;
    }
    w
}

/// Composite Simpson 1/3 over an even number of intervals (w.len() odd).
fn simpson_13(w: &mut [f64], h: f64) {
    let k = w.len() - 1;
    debug_assert!(k >= 2 && k % 2 == 0);
    w[0] += h / 3.0;
    w[k] += h / 3.0;
    for (i, wi) in w.iter_mut().enumerate().take(k).skip(1) {
        *wi += if i % 2 == 1 { 4.0 * h / 3.0 } else { 2.0 * h / 3.0 };
    }
}

/// Simpson 3/8 over exactly three intervals (w.len() == 4).
fn simpson_38(w: &mut [f64], h: f64) {
    debug_assert_eq!(w.len(), 4);
    let c = 3.0 * h / 8.0;
    w[0] += c;
    w[1] += 3.0 * c;
    w[2] += 3.0 * c;
    w[3] += c;
}

/// ∑_k w_k·v_k in sample order, for scalar or complex samples.
pub fn integrate_path<T>(s: &[f64], values: &[T]) -> T
where
    T: Copy + Default + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
{
    assert_eq!(s.len(), values.len(), "grid/value length mismatch");
    let w = quadrature_weights(s);
    let mut out = T::default();
    for (v, wk) in values.iter().zip(&w) {
        out = out + *v * *wk;
    }
    out
}

/// ∫ γ̇ᵀ·field·γ̇ ds along the path.
pub fn longitudinal_transform(field: &SymTensorField, path: &GeodesicPath) -> f64 {
    let s = path.s_grid();
    let values: Vec<f64> = path
        .samples
        .iter()
        .map(|p| linalg::quad_form(field.eval(p.x), p.v))
        .collect();
    integrate_path(&s, &values)
}

/// ∫ ηᵀ·field·η ds along the path, η given per sample (parallel transported).
pub fn transverse_transform(
    field: &SymTensorField,
    path: &GeodesicPath,
    eta: &[Vec3],
) -> Result<f64, TransformError> {
    if eta.len() != path.samples.len() {
        return Err(TransformError::FrameMisaligned {
            expected: path.samples.len(),
            got: eta.len(),
        });
    }
    let s = path.s_grid();
    let values: Vec<f64> = path
        .samples
        .iter()
        .zip(eta)
        .map(|(p, e)| linalg::quad_form(field.eval(p.x), *e))
        .collect();
    Ok(integrate_path(&s, &values))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransformKind {
    Longitudinal,
    Transverse,
}

/// One ray-transform value, self-describing enough to reproduce the ray.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Measurement {
    pub ray_id: usize,
    pub kind: TransformKind,
    /// Polarization index (1|2) for transverse measurements, 0 otherwise.
    pub pol: u8,
    pub x0: Vec3,
    pub dir: Vec3,
    pub value: f64,
    pub quad_step: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct ForwardOptions {
    /// RK4 / quadrature step (g-arc length).
    pub step: f64,
    /// Trapped-ray guard.
    pub max_length: f64,
}

impl Default for ForwardOptions {
    fn default() -> Self {
        ForwardOptions {
            step: 5e-3,
            max_length: 20.0,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct ForwardData {
    pub measurements: Vec<Measurement>,
    /// Chord indices skipped because tracing failed (trapped/degenerate).
    pub skipped: Vec<usize>,
}

/// Transverse dataset of the linearized S-wave tensor L[f]: for every chord
/// (traced in the background's g_S) and both transverse polarizations, the
/// transverse transform of linearize_n(background, f). Rays that fail to
/// trace are skipped and logged, in input order.
pub fn forward_dataset(
    background: &MediumModel,
    chords: &[Chord],
    f: &ScalarField,
    opts: &ForwardOptions,
) -> Result<ForwardData, TransformError> {
    let field = tensors::linearize_n(background, f)?;
    let metric = ConformalMetric::new(background, WaveMode::S);
    let mut out = ForwardData::default();
    for (ray_id, chord) in chords.iter().enumerate() {
        match trace_with_frames(&metric, chord, opts) {
            Ok((path, frames)) => {
                let s = path.s_grid();
                for (pol, frame) in frames.iter().enumerate() {
                    let values: Vec<f64> = path
                        .samples
                        .iter()
                        .zip(frame)
                        .map(|(p, e)| linalg::quad_form(field.eval(p.x), *e))
                        .collect();
                    out.measurements.push(Measurement {
                        ray_id,
                        kind: TransformKind::Transverse,
                        pol: pol as u8 + 1,
                        x0: chord.x0,
                        dir: chord.dir,
                        value: integrate_path(&s, &values),
                        quad_step: opts.step,
                    });
                }
            }
            Err(_) => out.skipped.push(ray_id),
        }
    }
    Ok(out)
}

/// Trace a chord and parallel-transport its deterministic entry frame:
/// the two g_S-orthonormal transverse polarizations.
pub fn trace_with_frames(
    metric: &ConformalMetric,
    chord: &Chord,
    opts: &ForwardOptions,
) -> Result<(GeodesicPath, [Vec<Vec3>; 2]), GeometryError> {
    let path = metric.trace_geodesic(chord.x0, chord.dir, opts.step, opts.max_length)?;
    let v0 = path.start().v;
    let (e1, e2) = crate::geometry::transverse_frame(v0, metric.speed(path.start().x));
    let f1 = metric.transport_along(&path, e1);
    let f2 = metric.transport_along(&path, e2);
    Ok((path, [f1, f2]))
}
