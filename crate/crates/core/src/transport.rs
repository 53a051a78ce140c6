//! Parallel transport of polarization vectors and the amplitude/transport
//! laws along geodesics.
//!
//! Amplitudes follow A = c_amp·J^{-1/2}·c^{-1/2}·ρ^{-1/2} pointwise. The
//! subleading scalars obey 2i dB/ds = M_ij γ̇^i γ̇^j + C on P-rays and
//! D_τ⟨ξ,η⟩ = (i/2)(N_ij η^i η^j + C) on S-rays; both are integrated with
//! the same quadrature as the ray transforms, so the cross-module
//! identities hold bitwise. The offset C does not depend on ρ and is never
//! reconstructed — callers inject it (default 0) and ρ-sensitive
//! comparisons are phrased so it cancels.

use crate::geometry::{ConformalMetric, GeodesicPath, SpreadingProfile};
use crate::linalg::{self, Vec3};
use crate::medium::{MediumModel, WaveMode};
use crate::tensors::SymTensorField;
use crate::transforms::integrate_path;
use num_complex::Complex64;

#[derive(Debug, thiserror::Error)]
pub enum TransportError {
    #[error("eta0 must be g-unit and g-orthogonal to the ray: {0}")]
    BadPolarization(String),
    #[error("spreading profile has {got} samples but the path has {expected}")]
    Misaligned { expected: usize, got: usize },
    #[error("nonpositive spreading J = {value} at sample {index}: caustic")]
    Caustic { index: usize, value: f64 },
}

/// Solve Dη/ds = 0 along the path, one vector per sample. Requires eta0
/// g-orthogonal to the initial tangent and g-unit.
pub fn parallel_transport(
    metric: &ConformalMetric,
    path: &GeodesicPath,
    eta0: Vec3,
) -> Result<Vec<Vec3>, TransportError> {
    let start = path.start();
    let ip = metric.inner(start.x, eta0, start.v);
    if ip.abs() > 1e-8 {
        return Err(TransportError::BadPolarization(format!(
            "g(eta0, v0) = {ip:e}"
        )));
    }
    let nrm = metric.inner(start.x, eta0, eta0);
    if (nrm - 1.0).abs() > 1e-8 {
        return Err(TransportError::BadPolarization(format!(
            "g(eta0, eta0) = {nrm}"
        )));
    }
    Ok(metric.transport_along(path, eta0))
}

/// Both transverse polarizations, parallel transported from the
/// deterministic entry frame.
#[derive(Clone, Debug)]
pub struct ParallelFrame {
    pub eta1: Vec<Vec3>,
    pub eta2: Vec<Vec3>,
}

impl ParallelFrame {
    pub fn leg(&self, pol: usize) -> &[Vec3] {
        match pol {
            1 => &self.eta1,
            2 => &self.eta2,
            _ => panic!("polarization index must be 1 or 2, got {pol}"),
        }
    }
}

pub fn make_frame(metric: &ConformalMetric, path: &GeodesicPath) -> ParallelFrame {
    let start = path.start();
    let (e1, e2) = crate::geometry::transverse_frame(start.v, metric.speed(start.x));
    ParallelFrame {
        eta1: metric.transport_along(path, e1),
        eta2: metric.transport_along(path, e2),
    }
}

#[derive(Clone, Debug)]
pub struct AmplitudeProfile {
    pub mode: WaveMode,
    pub c_amp: f64,
    /// A at each path sample.
    pub values: Vec<f64>,
}

/// Pointwise amplitude law A = c_amp·J^{-1/2}·c_mode^{-1/2}·ρ^{-1/2}.
/// Any J ≤ 0 in the spreading profile is a caustic and an error.
pub fn amplitude(
    model: &MediumModel,
    path: &GeodesicPath,
    spreading: &SpreadingProfile,
    mode: WaveMode,
    c_amp: f64,
) -> Result<AmplitudeProfile, TransportError> {
    if spreading.values.len() != path.samples.len() {
        return Err(TransportError::Misaligned {
            expected: path.samples.len(),
            got: spreading.values.len(),
        });
    }
    let mut values = Vec::with_capacity(path.samples.len());
    for (index, (p, &j)) in path.samples.iter().zip(&spreading.values).enumerate() {
        if j <= 0.0 {
            return Err(TransportError::Caustic { index, value: j });
        }
        let c = model.wavespeed(mode, p.x);
        let rho = model.rho.value(p.x);
        values.push(c_amp / (j * c * rho).sqrt());
    }
    Ok(AmplitudeProfile {
        mode,
        c_amp,
        values,
    })
}

/// Cumulative subleading scalar along a path. `values[k]` is the scalar at
/// sample k relative to sample 0, so any prefix difference reproduces the
/// quadrature of the contraction over that sub-grid.
#[derive(Clone, Debug)]
pub struct TransportScalar {
    pub values: Vec<Complex64>,
    pub c_offset: f64,
}

impl TransportScalar {
    /// Scalar increment over the whole path.
    pub fn increment(&self) -> Complex64 {
        *self.values.last().unwrap() - self.values[0]
    }
}

fn cumulative(s: &[f64], integrand: &[f64], factor: Complex64, c_offset: f64) -> TransportScalar {
    let values = (0..s.len())
        .map(|k| {
            if k == 0 {
                Complex64::default()
            } else {
                factor * integrate_path(&s[..=k], &integrand[..=k])
            }
        })
        .collect();
    TransportScalar { values, c_offset }
}

/// B along a P-ray: B(b) − B(a) = (1/2i)∫(M_ij γ̇^iγ̇^j + C) ds.
pub fn transport_scalar_p(path: &GeodesicPath, m_field: &SymTensorField, c: f64) -> TransportScalar {
    let s = path.s_grid();
    let integrand: Vec<f64> = path
        .samples
        .iter()
        .map(|p| linalg::quad_form(m_field.eval(p.x), p.v) + c)
        .collect();
    // 1/(2i) = −i/2.
    cumulative(&s, &integrand, Complex64::new(0.0, -0.5), c)
}

/// ⟨ξ,η⟩ along an S-ray for both frame legs:
/// ⟨ξ,η⟩|_a^b = (i/2)∫(N_ij η^iη^j + C) ds.
pub fn transport_scalar_s(
    path: &GeodesicPath,
    n_field: &SymTensorField,
    frame: &ParallelFrame,
    c: f64,
) -> [TransportScalar; 2] {
    let s = path.s_grid();
    let scalar_for = |eta: &[Vec3]| {
        let integrand: Vec<f64> = path
            .samples
            .iter()
            .zip(eta)
            .map(|(p, e)| linalg::quad_form(n_field.eval(p.x), *e) + c)
            .collect();
        cumulative(&s, &integrand, Complex64::new(0.0, 0.5), c)
    };
    [scalar_for(&frame.eta1), scalar_for(&frame.eta2)]
}
