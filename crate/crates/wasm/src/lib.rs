//! Browser bindings: a ray-fan tracer, field-slice sampler, and a small
//! end-to-end inversion demo, each taking and returning JSON strings so the
//! page needs no custom marshalling. The crate also compiles natively, which
//! is how its tests run.

use elastic_rays::geometry::generate_chords;
use elastic_rays::inversion::{
    build_forward, relative_interior_error, solve, BuildOptions, GridField, GridSpec, SolverConfig,
};
use elastic_rays::medium::{GaussianBump, MediumModel, ScalarField};
use elastic_rays::tensors::{assemble_sym_n, linearize_n};
use elastic_rays::transforms::{forward_dataset, ForwardOptions};
use elastic_rays::{ConformalMetric, WaveMode};
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn err(msg: impl std::fmt::Display) -> String {
    msg.to_string()
}

fn parse_model(model_json: &str) -> Result<MediumModel, String> {
    MediumModel::from_json(model_json).map_err(err)
}

fn parse_mode(mode: &str) -> Result<WaveMode, String> {
    match mode {
        "P" => Ok(WaveMode::P),
        "S" => Ok(WaveMode::S),
        _ => Err(err(format!("mode must be P or S, got {mode:?}"))),
    }
}

#[derive(Serialize)]
struct FanPath {
    id: usize,
    travel_time: f64,
    xyz: Vec<[f64; 3]>,
}

#[derive(Serialize)]
struct FanResult {
    paths: Vec<FanPath>,
    trapped: Vec<usize>,
    max_travel_time: f64,
}

/// Trace a deterministic chord fan; each path is downsampled to at most
/// ~120 points for plotting.
#[wasm_bindgen]
pub fn trace_fan(
    model_json: &str,
    mode: &str,
    n_points: usize,
    n_dirs: usize,
    theta_max: f64,
    seed: u64,
    step: f64,
) -> Result<String, String> {
    let model = parse_model(model_json)?;
    let mode = parse_mode(mode)?;
    if !(step > 0.0 && theta_max > 0.0 && theta_max < 1.57) {
        return Err(err("need step > 0 and 0 < theta_max < pi/2"));
    }
    let n_points = n_points.clamp(1, 512);
    let n_dirs = n_dirs.clamp(1, 64);
    let metric = ConformalMetric::new(&model, mode);
    let chords = generate_chords(model.domain, n_points, n_dirs, theta_max, seed);
    let mut out = FanResult {
        paths: Vec::new(),
        trapped: Vec::new(),
        max_travel_time: 0.0,
    };
    for (id, ch) in chords.iter().enumerate() {
        match metric.trace_geodesic(ch.x0, ch.dir, step, 20.0) {
            Ok(path) => {
                let stride = (path.samples.len() / 120).max(1);
                let mut xyz: Vec<[f64; 3]> =
                    path.samples.iter().step_by(stride).map(|p| p.x).collect();
                let last = path.end().x;
                if xyz.last() != Some(&last) {
                    xyz.push(last);
                }
                out.max_travel_time = out.max_travel_time.max(path.travel_time);
                out.paths.push(FanPath {
                    id,
                    travel_time: path.travel_time,
                    xyz,
                });
            }
            Err(_) => out.trapped.push(id),
        }
    }
    serde_json::to_string(&out).map_err(err)
}

#[derive(Serialize)]
struct SliceResult {
    n: usize,
    z: f64,
    /// Row-major y-then-x values; NaN-free, see mask.
    values: Vec<f64>,
    /// 1 inside the domain, 0 outside (values there are 0).
    mask: Vec<u8>,
    min: f64,
    max: f64,
}

/// Sample a scalar diagnostic on the z-slice of the bounding box:
/// `what` is one of cp, cs, rho, or nij (i,j in 1..3) for Sym(N)_ij.
#[wasm_bindgen]
pub fn field_slice(model_json: &str, what: &str, z: f64, n: usize) -> Result<String, String> {
    let model = parse_model(model_json)?;
    let n = n.clamp(8, 256);
    let sym_n = if what.starts_with('n') {
        Some(assemble_sym_n(&model).map_err(err)?)
    } else {
        None
    };
    let component = |w: &str| -> Result<(usize, usize), String> {
        let b = w.as_bytes();
        if b.len() == 3 && b[1].is_ascii_digit() && b[2].is_ascii_digit() {
            let i = (b[1] - b'0') as usize;
            let j = (b[2] - b'0') as usize;
            if (1..=3).contains(&i) && (1..=3).contains(&j) {
                return Ok((i - 1, j - 1));
            }
        }
        Err(err(format!("unknown field {w:?}")))
    };
    let (lo, hi) = model.domain.bounding_box();
    let mut values = Vec::with_capacity(n * n);
    let mut mask = Vec::with_capacity(n * n);
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for iy in 0..n {
        for ix in 0..n {
            let t = |i: usize, a: f64, b: f64| a + (b - a) * (i as f64) / ((n - 1) as f64);
            let x = [t(ix, lo[0], hi[0]), t(iy, lo[1], hi[1]), z];
            if !model.domain.contains(x) {
                values.push(0.0);
                mask.push(0);
                continue;
            }
            let v = match what {
                "cp" => model.wavespeed(WaveMode::P, x),
                "cs" => model.wavespeed(WaveMode::S, x),
                "rho" => model.rho.value(x),
                w => {
                    let (i, j) = component(w)?;
                    sym_n.as_ref().expect("assembled above").eval(x)[i][j]
                }
            };
            min = min.min(v);
            max = max.max(v);
            values.push(v);
            mask.push(1);
        }
    }
    if !min.is_finite() {
        (min, max) = (0.0, 0.0);
    }
    serde_json::to_string(&SliceResult {
        n,
        z,
        values,
        mask,
        min,
        max,
    })
    .map_err(err)
}

#[derive(Serialize)]
struct InvertResult {
    n: usize,
    rows: usize,
    iterations: usize,
    converged: bool,
    rel_error_f: f64,
    /// Central z-slice of the recovered and true fields, row-major.
    recovered: Vec<f64>,
    truth: Vec<f64>,
    slice_min: f64,
    slice_max: f64,
}

/// Small end-to-end density inversion: synthesize the transverse dataset for
/// a single Gaussian bump, assemble the discrete operator, solve, and return
/// the central slice of recovered vs true f. Sizes are clamped so a click
/// stays interactive.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn invert_demo(
    model_json: &str,
    amplitude: f64,
    sigma: f64,
    cx: f64,
    cy: f64,
    cz: f64,
    lattice_n: usize,
    n_points: usize,
    n_dirs: usize,
    seed: u64,
    alpha: f64,
    max_iter: usize,
) -> Result<String, String> {
    let model = parse_model(model_json)?;
    if !(sigma > 0.0 && alpha >= 0.0) {
        return Err(err("need sigma > 0 and alpha >= 0"));
    }
    let lattice_n = lattice_n.clamp(6, 16);
    let n_points = n_points.clamp(4, 120);
    let n_dirs = n_dirs.clamp(1, 24);
    let max_iter = max_iter.clamp(1, 2000);
    let center = [cx, cy, cz];
    let f = ScalarField::GaussianBumpSum {
        base: 0.0,
        bumps: vec![GaussianBump {
            amplitude,
            center,
            sigma,
        }],
    };
    // Fail early with a readable message if the background is unsuitable.
    linearize_n(&model, &f).map_err(err)?;

    let chords = generate_chords(model.domain, n_points, n_dirs, 0.9, seed);
    let step = 1e-2;
    let data = forward_dataset(
        &model,
        &chords,
        &f,
        &ForwardOptions {
            step,
            max_length: 20.0,
        },
    )
    .map_err(err)?;
    let spec = GridSpec {
        n: lattice_n,
        domain: model.domain,
    };
    let op = build_forward(
        &spec,
        &chords,
        &model,
        &BuildOptions {
            trace_step: step,
            max_length: 20.0,
        },
    )
    .map_err(err)?;
    let d = op.align_data(&data.measurements).map_err(err)?;
    let out = solve(
        &op,
        &d,
        &SolverConfig {
            alpha,
            max_iter,
            tol: 1e-10,
            seed: 0,
        },
    )
    .map_err(err)?;
    let truth = GridField::discretize(&spec, |x| {
        amplitude
            * (-elastic_rays::linalg::norm_sq(elastic_rays::linalg::sub(x, center))
                / (2.0 * sigma * sigma))
                .exp()
    })
    .map_err(err)?;
    let rel_error_f = relative_interior_error(&out.f_hat, &truth);

    let k = lattice_n / 2;
    let mut recovered = Vec::with_capacity(lattice_n * lattice_n);
    let mut truth_slice = Vec::with_capacity(lattice_n * lattice_n);
    let mut slice_min = f64::INFINITY;
    let mut slice_max = f64::NEG_INFINITY;
    for j in 0..lattice_n {
        for i in 0..lattice_n {
            let idx = out.f_hat.idx(i, j, k);
            for v in [out.f_hat.values[idx], truth.values[idx]] {
                slice_min = slice_min.min(v);
                slice_max = slice_max.max(v);
            }
            recovered.push(out.f_hat.values[idx]);
            truth_slice.push(truth.values[idx]);
        }
    }
    serde_json::to_string(&InvertResult {
        n: lattice_n,
        rows: op.nrows(),
        iterations: out.iterations,
        converged: out.converged,
        rel_error_f,
        recovered,
        truth: truth_slice,
        slice_min,
        slice_max,
    })
    .map_err(err)
}
