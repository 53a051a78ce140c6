//! The five subcommands. Each validates everything it can before touching
//! the output directory, then writes deterministic artifacts: identical
//! config and seed reproduce byte-identical files.

use std::path::{Path, PathBuf};

use elastic_rays::geometry::{
    check_convex_foliation, check_strict_convexity, generate_chords, max_geodesic_length, Chord,
};
use elastic_rays::inversion::{
    build_forward, recover_density, relative_interior_error, solve, BuildOptions, GridField,
    GridSpec, SolverConfig,
};
use elastic_rays::transforms::{forward_dataset, ForwardOptions, Measurement};
use elastic_rays::ConformalMetric;
use serde::{Deserialize, Serialize};

use crate::config::{
    config_err, validation_err, ChordConfig, Experiment, Failure,
};
use crate::io::{
    dataset_row, float_row, parse_dataset_row, read_json, write_json, CsvWriter, DATASET_HEADER,
};

fn ensure_out_dir(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir)
        .map_err(|e| config_err(format!("cannot create {}: {e}", dir.display())))
}

fn chord_set(exp: &Experiment) -> Vec<Chord> {
    let c = &exp.cfg.chords;
    generate_chords(exp.model.domain, c.n_points, c.n_dirs, c.theta_max, c.seed)
}

// ----- check -----

#[derive(Serialize)]
struct LengthReport {
    max_travel_time: Option<f64>,
    budget: f64,
    trapped: bool,
    pass: bool,
}

#[derive(Serialize)]
struct CheckReport {
    model_kind: String,
    model_hash: String,
    mode: String,
    positivity: elastic_rays::medium::PositivityReport,
    strict_convexity: elastic_rays::geometry::ConvexityReport,
    convex_foliation: elastic_rays::geometry::FoliationReport,
    max_geodesic_length: LengthReport,
    pass: bool,
}

/// Hypothesis checks for the loaded model: Lamé positivity, strict boundary
/// convexity, convex foliation, and a trapped-ray length scan over the
/// configured chord fan. Exit 0 iff every check passes.
pub fn cmd_check(exp: &Experiment) -> Result<bool, Failure> {
    let metric = ConformalMetric::new(&exp.model, exp.mode);
    let positivity = exp.model.check_positivity(24);
    let strict_convexity = check_strict_convexity(&metric, 512, 16);
    let convex_foliation = check_convex_foliation(&metric, 24);

    let chords = chord_set(exp);
    let length = max_geodesic_length(&metric, &chords, exp.cfg.step, exp.cfg.max_length);
    let max_geodesic_length = match length {
        Ok(v) => LengthReport {
            max_travel_time: Some(v),
            budget: exp.cfg.max_length,
            trapped: false,
            pass: true,
        },
        Err(_) => LengthReport {
            max_travel_time: None,
            budget: exp.cfg.max_length,
            trapped: true,
            pass: false,
        },
    };

    let pass = positivity.pass
        && strict_convexity.pass
        && convex_foliation.pass
        && max_geodesic_length.pass;
    let report = CheckReport {
        model_kind: exp.model.kind.clone(),
        model_hash: exp.model_hash.clone(),
        mode: exp.cfg.mode.clone(),
        positivity,
        strict_convexity,
        convex_foliation,
        max_geodesic_length,
        pass,
    };
    ensure_out_dir(&exp.out_dir)?;
    let path = exp.out_dir.join("check_report.json");
    write_json(&path, &report)?;
    println!(
        "check: positivity {} convexity {} foliation {} length {} -> {}",
        positivity.pass,
        report.strict_convexity.pass,
        report.convex_foliation.pass,
        report.max_geodesic_length.pass,
        if pass { "pass" } else { "FAIL" }
    );
    println!("wrote {}", path.display());
    Ok(pass)
}

// ----- trace -----

#[derive(Serialize)]
struct TraceSummary {
    mode: String,
    chords: usize,
    traced: usize,
    trapped: usize,
    trapped_ray_ids: Vec<usize>,
    max_travel_time: Option<f64>,
}

/// Trace the configured chord fan and dump every sample. Trapped chords are
/// skipped and counted; the batch never aborts.
pub fn cmd_trace(exp: &Experiment) -> Result<(), Failure> {
    let metric = ConformalMetric::new(&exp.model, exp.mode);
    let chords = chord_set(exp);
    ensure_out_dir(&exp.out_dir)?;
    let csv_path = exp.out_dir.join("paths.csv");
    let mut csv = CsvWriter::create(&csv_path, "ray_id,s,x1,x2,x3,v1,v2,v3")?;

    let mut trapped_ray_ids = Vec::new();
    let mut max_travel_time: Option<f64> = None;
    for (ray_id, ch) in chords.iter().enumerate() {
        match metric.trace_geodesic(ch.x0, ch.dir, exp.cfg.step, exp.cfg.max_length) {
            Ok(path) => {
                for p in &path.samples {
                    csv.line(&format!(
                        "{ray_id},{}",
                        float_row(&[p.s, p.x[0], p.x[1], p.x[2], p.v[0], p.v[1], p.v[2]])
                    ))?;
                }
                max_travel_time =
                    Some(max_travel_time.map_or(path.travel_time, |m| m.max(path.travel_time)));
            }
            Err(_) => trapped_ray_ids.push(ray_id),
        }
    }
    csv.finish()?;

    let summary = TraceSummary {
        mode: exp.cfg.mode.clone(),
        chords: chords.len(),
        traced: chords.len() - trapped_ray_ids.len(),
        trapped: trapped_ray_ids.len(),
        trapped_ray_ids,
        max_travel_time,
    };
    let sum_path = exp.out_dir.join("trace_summary.json");
    write_json(&sum_path, &summary)?;
    println!(
        "trace: {} chords, {} traced, {} trapped, max travel time {:?}",
        summary.chords, summary.traced, summary.trapped, summary.max_travel_time
    );
    println!("wrote {} and {}", csv_path.display(), sum_path.display());
    Ok(())
}

// ----- forward -----

#[derive(Serialize, Deserialize)]
pub struct DatasetMetadata {
    pub model_hash: String,
    pub chords: ChordConfig,
    pub step: f64,
    pub max_length: f64,
    pub rows: usize,
    pub skipped: Vec<usize>,
    pub perturbation: elastic_rays::medium::ScalarField,
}

/// Synthesize the transverse S-wave dataset of the linearized tensor for the
/// configured perturbation and write it with its metadata.
pub fn cmd_forward(exp: &Experiment) -> Result<(), Failure> {
    let f = exp
        .cfg
        .perturbation
        .as_ref()
        .ok_or_else(|| config_err("forward requires a perturbation field in the config"))?;
    let chords = chord_set(exp);
    let opts = ForwardOptions {
        step: exp.cfg.step,
        max_length: exp.cfg.max_length,
    };
    let data = forward_dataset(&exp.model, &chords, f, &opts)
        .map_err(|e| validation_err(format!("forward model rejected: {e}")))?;

    ensure_out_dir(&exp.out_dir)?;
    let csv_path = exp.out_dir.join("dataset.csv");
    let mut csv = CsvWriter::create(&csv_path, DATASET_HEADER)?;
    for m in &data.measurements {
        csv.line(&dataset_row(m))?;
    }
    csv.finish()?;

    let meta = DatasetMetadata {
        model_hash: exp.model_hash.clone(),
        chords: exp.cfg.chords,
        step: exp.cfg.step,
        max_length: exp.cfg.max_length,
        rows: data.measurements.len(),
        skipped: data.skipped.clone(),
        perturbation: f.clone(),
    };
    let meta_path = exp.out_dir.join("metadata.json");
    write_json(&meta_path, &meta)?;
    println!(
        "forward: {} rows ({} chords skipped)",
        meta.rows,
        meta.skipped.len()
    );
    println!("wrote {} and {}", csv_path.display(), meta_path.display());
    Ok(())
}

// ----- invert -----

#[derive(Serialize)]
struct InvertSummary {
    lattice_n: usize,
    rays: usize,
    rows: usize,
    skipped: usize,
    inverse_crime: bool,
    alpha: f64,
    iterations: usize,
    converged: bool,
    data_residual_rel: f64,
    recovered_f_max: f64,
    rho0: f64,
    rel_error_f: Option<f64>,
    rel_error_rho: Option<f64>,
    true_f_max: Option<f64>,
}

fn write_lattice_csv(path: &Path, grid: &GridField, values: &[f64]) -> Result<(), Failure> {
    let mut csv = CsvWriter::create(path, "x,y,z,value")?;
    for idx in 0..values.len() {
        let p = grid.position_of(idx);
        csv.line(&float_row(&[p[0], p[1], p[2], values[idx]]))?;
    }
    csv.finish()
}

/// Rebuild the discrete forward operator for the dataset in the output
/// directory, solve the regularized normal equations, and write the
/// recovered f and ρ lattices, the residual history, and a summary.
pub fn cmd_invert(exp: &Experiment) -> Result<(), Failure> {
    let meta_path = exp.out_dir.join("metadata.json");
    let meta: DatasetMetadata = serde_json::from_value(read_json(&meta_path)?)
        .map_err(|e| config_err(format!("bad metadata {}: {e}", meta_path.display())))?;
    if meta.model_hash != exp.model_hash {
        return Err(validation_err(format!(
            "dataset was produced by model {} but the config references model {}",
            meta.model_hash, exp.model_hash
        )));
    }
    if meta.chords != exp.cfg.chords {
        return Err(validation_err(
            "dataset chord fan differs from the config chord fan".to_string(),
        ));
    }

    let csv_path = exp.out_dir.join("dataset.csv");
    let text = std::fs::read_to_string(&csv_path)
        .map_err(|e| config_err(format!("cannot read {}: {e}", csv_path.display())))?;
    let mut measurements: Vec<Measurement> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            if line != DATASET_HEADER {
                return Err(config_err(format!(
                    "unexpected dataset header {line:?} in {}",
                    csv_path.display()
                )));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        measurements.push(parse_dataset_row(line, meta.step, i + 1)?);
    }

    let chords = chord_set(exp);
    let spec = GridSpec {
        n: exp.cfg.lattice_n,
        domain: exp.model.domain,
    };
    let op = build_forward(
        &spec,
        &chords,
        &exp.model,
        &BuildOptions {
            trace_step: exp.cfg.step,
            max_length: exp.cfg.max_length,
        },
    )
    .map_err(|e| validation_err(format!("cannot assemble forward operator: {e}")))?;

    let truth = match &exp.cfg.perturbation {
        Some(f) => Some(
            GridField::discretize(&spec, |x| f.value(x))
                .map_err(|e| validation_err(format!("cannot discretize truth: {e}")))?,
        ),
        None => None,
    };

    let data = if exp.cfg.inverse_crime {
        let t = truth.as_ref().expect("validated: inverse_crime requires perturbation");
        op.apply(&t.values)
    } else {
        op.align_data(&measurements)
            .map_err(|e| validation_err(format!("dataset does not match operator rows: {e}")))?
    };

    let solver = SolverConfig {
        alpha: exp.cfg.solver.alpha,
        max_iter: exp.cfg.solver.max_iter,
        tol: exp.cfg.solver.tol,
        seed: exp.cfg.solver.seed,
    };
    let out = solve(&op, &data, &solver)
        .map_err(|e| validation_err(format!("solver rejected the problem: {e}")))?;

    let rho0 = exp.model.rho.value(exp.model.domain.center);
    let rho_hat = recover_density(&out.f_hat, rho0);

    let data_residual_rel = {
        let pred = op.apply(&out.f_hat.values);
        let num: f64 = pred
            .iter()
            .zip(&data)
            .map(|(p, d)| (p - d) * (p - d))
            .sum::<f64>()
            .sqrt();
        let den: f64 = data.iter().map(|d| d * d).sum::<f64>().sqrt();
        if den == 0.0 {
            0.0
        } else {
            num / den
        }
    };
    let recovered_f_max = out.f_hat.values.iter().cloned().fold(0.0f64, f64::max);

    let (rel_error_f, rel_error_rho, true_f_max) = match &truth {
        Some(t) => {
            // A zero truth field has no relative f-scale; report only ρ.
            let truth_norm: f64 = t.values.iter().map(|v| v * v).sum::<f64>().sqrt();
            let rel_f = (truth_norm > 0.0).then(|| relative_interior_error(&out.f_hat, t));
            // Compare densities on the same lattice via grid clones.
            let mut rho_hat_grid = out.f_hat.clone();
            rho_hat_grid.values = rho_hat.clone();
            let mut rho_true_grid = t.clone();
            rho_true_grid.values = recover_density(t, rho0);
            let rel_rho = relative_interior_error(&rho_hat_grid, &rho_true_grid);
            let tmax = t.values.iter().cloned().fold(0.0f64, f64::max);
            (rel_f, Some(rel_rho), Some(tmax))
        }
        None => (None, None, None),
    };

    let f_path = exp.out_dir.join("f_hat.csv");
    write_lattice_csv(&f_path, &out.f_hat, &out.f_hat.values)?;
    let rho_path = exp.out_dir.join("rho.csv");
    write_lattice_csv(&rho_path, &out.f_hat, &rho_hat)?;
    let res_path = exp.out_dir.join("residual.csv");
    let mut res = CsvWriter::create(&res_path, "iter,residual")?;
    for (i, r) in out.residual_history.iter().enumerate() {
        res.line(&format!("{i},{r}"))?;
    }
    res.finish()?;

    let summary = InvertSummary {
        lattice_n: exp.cfg.lattice_n,
        rays: chords.len(),
        rows: op.nrows(),
        skipped: op.skipped.len(),
        inverse_crime: exp.cfg.inverse_crime,
        alpha: solver.alpha,
        iterations: out.iterations,
        converged: out.converged,
        data_residual_rel,
        recovered_f_max,
        rho0,
        rel_error_f,
        rel_error_rho,
        true_f_max,
    };
    let sum_path = exp.out_dir.join("invert_summary.json");
    write_json(&sum_path, &summary)?;
    println!(
        "invert: {} rows, {} iterations, converged {}, data residual {:.3e}",
        summary.rows, summary.iterations, summary.converged, summary.data_residual_rel
    );
    if let (Some(ef), Some(er)) = (rel_error_f, rel_error_rho) {
        println!("invert: interior errors f {ef:.3e} rho {er:.3e}");
    }
    println!("wrote {}", sum_path.display());
    Ok(())
}

// ----- report -----

/// Aggregate invert summaries into one CSV table (error vs rays / lattice).
pub fn cmd_report(out: &Path, summaries: &[PathBuf]) -> Result<(), Failure> {
    let mut csv = CsvWriter::create(
        out,
        "file,lattice_n,rays,rows,alpha,iterations,converged,data_residual_rel,rel_error_f,rel_error_rho",
    )?;
    for path in summaries {
        let v = read_json(path)?;
        let cell = |key: &str| -> String {
            match v.get(key) {
                Some(serde_json::Value::Number(n)) => format!("{n}"),
                Some(serde_json::Value::Bool(b)) => format!("{b}"),
                _ => String::new(),
            }
        };
        csv.line(&format!(
            "{},{},{},{},{},{},{},{},{},{}",
            path.display(),
            cell("lattice_n"),
            cell("rays"),
            cell("rows"),
            cell("alpha"),
            cell("iterations"),
            cell("converged"),
            cell("data_residual_rel"),
            cell("rel_error_f"),
            cell("rel_error_rho")
        ))?;
    }
    csv.finish()?;
    println!("wrote {}", out.display());
    Ok(())
}
