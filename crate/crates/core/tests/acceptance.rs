//! Acceptance suite: the six release criteria, one pass/fail line each.
//!
//! Every criterion runs inside its stated wall-clock budget with pinned
//! tolerances; failures are collected so a run always reports the status of
//! all six before panicking.

use std::time::Instant;

use elastic_rays::geometry::{
    check_convex_foliation, check_strict_convexity, generate_chords, RayFamily,
};
use elastic_rays::inversion::{
    adjoint_check, build_forward, recover_density, relative_interior_error, solve, BuildOptions,
    GridField, GridSpec, SolverConfig,
};
use elastic_rays::linalg::{self, Vec3};
use elastic_rays::medium::{GaussianBump, ScalarField};
use elastic_rays::tensors::{
    assemble_m, assemble_sym_n, double_divergence, linearize_n, MVariant,
};
use elastic_rays::transforms::{
    forward_dataset, longitudinal_transform, transverse_transform, ForwardOptions,
};
use elastic_rays::transport::{amplitude, make_frame, transport_scalar_p, transport_scalar_s};
use elastic_rays::{ConformalMetric, Domain, MediumModel, SymTensorField, WaveMode};

macro_rules! ensure {
    ($cond:expr, $($arg:tt)+) => {
        if !($cond) {
            return Err(format!($($arg)+));
        }
    };
}

/// 20%-contrast shear bump on a constant background.
fn bump_medium() -> MediumModel {
    MediumModel::with_fields(
        "gaussian-bump-sum",
        Domain::unit_ball(),
        ScalarField::constant(2.0),
        ScalarField::GaussianBumpSum {
            base: 1.0,
            bumps: vec![GaussianBump {
                amplitude: 0.2,
                center: [0.15, -0.1, 0.05],
                sigma: 0.45,
            }],
        },
        ScalarField::constant(1.0),
    )
}

fn trace(
    metric: &ConformalMetric,
    x0: Vec3,
    dir: Vec3,
    step: f64,
) -> Result<elastic_rays::GeodesicPath, String> {
    metric
        .trace_geodesic(x0, dir, step, 10.0)
        .map_err(|e| format!("trace failed: {e}"))
}

// ----- criterion 1: geometry -----

fn criterion_geometry() -> Result<(), String> {
    // Constant-speed diameters have exact travel time 2r/c.
    for (mu, expect) in [(1.0, 2.0), (4.0, 1.0)] {
        let m = MediumModel::constant(2.0, mu, 1.0, Domain::unit_ball());
        let metric = ConformalMetric::new(&m, WaveMode::S);
        for dir in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] {
            let path = trace(&metric, linalg::scale(dir, -1.0), dir, 1e-3)?;
            ensure!(
                (path.travel_time - expect).abs() < 1e-10,
                "constant-c chord: travel time {} vs {expect} (defect {:.2e})",
                path.travel_time,
                (path.travel_time - expect).abs()
            );
        }
    }

    // RK4 step-halving order against a fine reference.
    let m = bump_medium();
    let metric = ConformalMetric::new(&m, WaveMode::S);
    let x0 = [-1.0, 0.0, 0.0];
    let v0 = linalg::normalize([0.85, 0.45, 0.2]);
    let reference = trace(&metric, x0, v0, 2.5e-4)?;
    let mut errs = Vec::new();
    for h in [0.04, 0.02, 0.01, 0.005] {
        let p = trace(&metric, x0, v0, h)?;
        errs.push(linalg::dist(p.end().x, reference.end().x));
    }
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let mean = orders.iter().sum::<f64>() / orders.len() as f64;
    ensure!(mean >= 3.8, "RK4 observed order {mean:.3} < 3.8 (errors {errs:?})");

    // Unit g-speed along a curved ray.
    let path = trace(&metric, x0, linalg::normalize([0.95, 0.3, 0.05]), 1e-3)?;
    let mut speed_defect = 0.0f64;
    for p in &path.samples {
        speed_defect = speed_defect.max((metric.inner(p.x, p.v, p.v) - 1.0).abs());
    }
    ensure!(speed_defect < 1e-8, "unit-speed defect {speed_defect:.2e} >= 1e-8");

    // Time reversal returns to the start.
    let fwd = trace(&metric, x0, linalg::normalize([0.9, 0.4, 0.1]), 1e-3)?;
    let end = *fwd.end();
    let rev = trace(&metric, end.x, linalg::scale(end.v, -1.0), 1e-3)?;
    let defect = linalg::dist(rev.end().x, x0).max((rev.travel_time - fwd.travel_time).abs());
    ensure!(defect < 1e-7, "time-reversal defect {defect:.2e} >= 1e-7");
    Ok(())
}

// ----- criterion 2: transport -----

fn criterion_transport() -> Result<(), String> {
    let m = bump_medium();

    // Parallel transport preserves the Gram matrix of (γ̇, η₁, η₂).
    let metric = ConformalMetric::new(&m, WaveMode::S);
    let path = trace(&metric, [-1.0, 0.0, 0.0], linalg::normalize([0.8, 0.5, 0.2]), 1e-3)?;
    let frame = make_frame(&metric, &path);
    let mut gram_defect = 0.0f64;
    for (k, p) in path.samples.iter().enumerate().step_by(10) {
        let vecs = [p.v, frame.eta1[k], frame.eta2[k]];
        for i in 0..3 {
            for j in 0..3 {
                let g = metric.inner(p.x, vecs[i], vecs[j]);
                let want = if i == j { 1.0 } else { 0.0 };
                gram_defect = gram_defect.max((g - want).abs());
            }
        }
    }
    ensure!(gram_defect < 1e-8, "Gram defect {gram_defect:.2e} >= 1e-8");

    // P-mode conserved product A·J^{1/2}·c_P^{-1/2}·(λ+2μ)^{1/2} = c_amp.
    let metric_p = ConformalMetric::new(&m, WaveMode::P);
    let path_p = trace(&metric_p, [-1.0, 0.0, 0.0], linalg::normalize([0.9, 0.35, 0.15]), 1e-3)?;
    let spreading = metric_p.spreading_jacobian(&path_p, RayFamily::PlaneWave, 1e-3);
    let c_amp = 1.7;
    let amp = amplitude(&m, &path_p, &spreading, WaveMode::P, c_amp)
        .map_err(|e| format!("amplitude failed: {e}"))?;
    let mut product_defect = 0.0f64;
    for (k, p) in path_p.samples.iter().enumerate() {
        let product = amp.values[k] * spreading.values[k].sqrt()
            / m.wavespeed(WaveMode::P, p.x).sqrt()
            * (m.lambda.value(p.x) + 2.0 * m.mu.value(p.x)).sqrt();
        product_defect = product_defect.max((product - c_amp).abs());
    }
    ensure!(
        product_defect < 1e-6,
        "conserved-product defect {product_defect:.2e} >= 1e-6"
    );
    Ok(())
}

// ----- criterion 3: tensors -----

fn criterion_tensors() -> Result<(), String> {
    let points = [
        [0.0, 0.0, 0.0],
        [0.3, -0.2, 0.1],
        [-0.15, 0.25, 0.2],
        [0.1, 0.1, -0.35],
    ];

    // Constant density: both tensors vanish identically.
    let varying = MediumModel::with_fields(
        "radial-polynomial",
        Domain::unit_ball(),
        ScalarField::constant(2.0),
        ScalarField::RadialPolynomial {
            center: [0.0, 0.0, 0.0],
            c0: 1.0,
            c2: 0.3,
            c4: 0.03,
        },
        ScalarField::constant(1.3),
    );
    let m_t = assemble_m(&varying, MVariant::FinalDisplay).map_err(|e| e.to_string())?;
    let n_t = assemble_sym_n(&varying).map_err(|e| e.to_string())?;
    for x in points {
        ensure!(
            linalg::frobenius(m_t.eval(x)) == 0.0 && linalg::frobenius(n_t.eval(x)) == 0.0,
            "tensors of a constant-density medium are not exactly zero at {x:?}"
        );
    }

    // Exponential density: hand-substituted closed forms.
    let a = [0.3, -0.2, 0.5];
    let model = MediumModel::exponential(2.0, 1.0, 1.0, a, Domain::unit_ball());
    let a_sq = linalg::norm_sq(a);
    let g_p = linalg::mat_scale(linalg::identity(), 0.25);
    let expected_m = linalg::mat_add(
        linalg::mat_scale(g_p, 4.0 / 3.0 * a_sq),
        linalg::mat_scale(linalg::outer(a, a), 1.0 / 6.0),
    );
    let expected_n = linalg::mat_add(
        linalg::mat_scale(linalg::identity(), a_sq),
        linalg::mat_scale(linalg::outer(a, a), 8.0 / 3.0),
    );
    let m_exp = assemble_m(&model, MVariant::FinalDisplay).map_err(|e| e.to_string())?;
    let n_exp = assemble_sym_n(&model).map_err(|e| e.to_string())?;
    for x in points {
        let dm = linalg::frobenius(linalg::mat_add(m_exp.eval(x), linalg::mat_scale(expected_m, -1.0)));
        let dn = linalg::frobenius(linalg::mat_add(n_exp.eval(x), linalg::mat_scale(expected_n, -1.0)));
        ensure!(dm < 1e-12, "M closed-form defect {dm:.2e} at {x:?}");
        ensure!(dn < 1e-12, "Sym(N) closed-form defect {dn:.2e} at {x:?}");
    }

    // Richardson order of the linearization.
    let bump = GaussianBump {
        amplitude: 1.0,
        center: [0.1, -0.05, 0.1],
        sigma: 0.35,
    };
    let f = ScalarField::GaussianBumpSum {
        base: 0.0,
        bumps: vec![bump.clone()],
    };
    let lf = linearize_n(&varying, &f).map_err(|e| e.to_string())?;
    let defect = |eps: f64| -> f64 {
        let perturbed = MediumModel::with_fields(
            "log-gaussian-bumps",
            varying.domain,
            varying.lambda.clone(),
            varying.mu.clone(),
            ScalarField::LogGaussianBumps {
                base: 1.3,
                bumps: vec![GaussianBump {
                    amplitude: eps * bump.amplitude,
                    center: bump.center,
                    sigma: bump.sigma,
                }],
            },
        );
        let sym = assemble_sym_n(&perturbed).unwrap();
        let mut worst = 0.0f64;
        for x in points {
            let d = linalg::mat_add(sym.eval(x), linalg::mat_scale(lf.eval(x), -eps));
            worst = worst.max(linalg::frobenius(d));
        }
        worst
    };
    let mut eps = 0.2;
    let mut prev = defect(eps);
    for _ in 0..3 {
        eps *= 0.5;
        let cur = defect(eps);
        let order = (prev / cur).log2();
        ensure!(order >= 1.9, "Richardson order {order:.3} < 1.9 at eps {eps}");
        prev = cur;
    }

    // Constant wavespeeds: double divergence of L[f] is 3Δ²f.
    let bg = MediumModel::constant(2.0, 1.0, 1.0, Domain::unit_ball());
    let sigma = 0.3f64;
    let f0 = ScalarField::GaussianBumpSum {
        base: 0.0,
        bumps: vec![GaussianBump {
            amplitude: 1.0,
            center: [0.0, 0.0, 0.0],
            sigma,
        }],
    };
    let lf0 = linearize_n(&bg, &f0).map_err(|e| e.to_string())?;
    let s2 = sigma * sigma;
    for x in [[0.0, 0.0, 0.0], [0.2, 0.1, -0.1], [0.3, 0.0, 0.2]] {
        let r2 = linalg::norm_sq(x);
        let biharmonic =
            (r2 * r2 - 10.0 * s2 * r2 + 15.0 * s2 * s2) / (s2 * s2 * s2 * s2) * (-r2 / (2.0 * s2)).exp();
        let dd = double_divergence(&lf0, x, 1e-2);
        let tol = 1e-3 * (1.0 + (3.0 * biharmonic).abs());
        ensure!(
            (dd - 3.0 * biharmonic).abs() < tol,
            "double divergence {dd} vs 3Δ²f {} at {x:?}",
            3.0 * biharmonic
        );
    }
    Ok(())
}

// ----- criterion 4: transforms -----

fn criterion_transforms() -> Result<(), String> {
    let m = bump_medium();

    // The transform of the metric tensor is the travel time.
    let metric_p = ConformalMetric::new(&m, WaveMode::P);
    let path_p = trace(&metric_p, [-1.0, 0.0, 0.0], linalg::normalize([0.85, 0.4, 0.25]), 2e-3)?;
    let mp = m.clone();
    let g_p = SymTensorField::new("custom", move |x| {
        linalg::mat_scale(linalg::identity(), 1.0 / mp.wavespeed_sq(WaveMode::P, x))
    });
    let long = longitudinal_transform(&g_p, &path_p);
    ensure!(
        (long - path_p.travel_time).abs() < 1e-8,
        "longitudinal metric transform {long} vs length {} (defect {:.2e})",
        path_p.travel_time,
        (long - path_p.travel_time).abs()
    );

    let metric_s = ConformalMetric::new(&m, WaveMode::S);
    let path_s = trace(&metric_s, [-1.0, 0.0, 0.0], linalg::normalize([0.85, 0.4, 0.25]), 2e-3)?;
    let frame = make_frame(&metric_s, &path_s);
    let ms = m.clone();
    let g_s = SymTensorField::new("custom", move |x| {
        linalg::mat_scale(linalg::identity(), 1.0 / ms.wavespeed_sq(WaveMode::S, x))
    });
    for pol in [1usize, 2] {
        let tv = transverse_transform(&g_s, &path_s, frame.leg(pol)).map_err(|e| e.to_string())?;
        ensure!(
            (tv - path_s.travel_time).abs() < 1e-8,
            "transverse metric transform {tv} vs length {} (pol {pol})",
            path_s.travel_time
        );
    }

    // Quadrature refinement order on an analytic straight-line oracle.
    let cm = MediumModel::constant(2.0, 1.0, 1.0, Domain::unit_ball());
    let cmetric = ConformalMetric::new(&cm, WaveMode::S);
    let field = SymTensorField::new("custom", |x| {
        linalg::mat_scale(linalg::identity(), (0.8 * x[0]).exp())
    });
    let exact = ((0.8f64).exp() - (-0.8f64).exp()) / 0.8;
    let mut errs = Vec::new();
    for h in [0.04, 0.02, 0.01, 0.005] {
        let path = trace(&cmetric, [-1.0, 0.0, 0.0], [1.0, 0.0, 0.0], h)?;
        errs.push((longitudinal_transform(&field, &path) - exact).abs());
    }
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let mean = orders.iter().sum::<f64>() / orders.len() as f64;
    ensure!(mean >= 3.5, "quadrature order {mean:.3} < 3.5 (errors {errs:?})");

    // Cross-module identity: transport scalars integrate the same numbers.
    let probe = SymTensorField::new("custom", |x| {
        linalg::mat_scale(linalg::identity(), (0.8 * x[0]).exp())
    });
    let inc_p = transport_scalar_p(&path_p, &probe, 0.0).increment();
    let long_probe = longitudinal_transform(&probe, &path_p);
    ensure!(
        -2.0 * inc_p.im == long_probe && inc_p.re == 0.0,
        "P transport increment {inc_p} is not exactly (1/2i)·{long_probe}"
    );
    let incs = transport_scalar_s(&path_s, &probe, &frame, 0.0);
    for pol in [1usize, 2] {
        let tv = transverse_transform(&probe, &path_s, frame.leg(pol)).map_err(|e| e.to_string())?;
        let inc = incs[pol - 1].increment();
        ensure!(
            2.0 * inc.im == tv && inc.re == 0.0,
            "S transport increment {inc} is not exactly (i/2)·{tv} (pol {pol})"
        );
    }
    Ok(())
}

// ----- criterion 5: inversion -----

fn criterion_inversion() -> Result<(), String> {
    let bg = MediumModel::constant(2.0, 1.0, 1.3, Domain::unit_ball());
    let spec = GridSpec {
        n: 32,
        domain: bg.domain,
    };
    let chords = generate_chords(bg.domain, 200, 80, 0.9, 17);
    ensure!(chords.len() >= 4000, "need at least 4k rays, have {}", chords.len());

    let t_build = Instant::now();
    let op = build_forward(
        &spec,
        &chords,
        &bg,
        &BuildOptions {
            trace_step: 5e-3,
            max_length: 20.0,
        },
    )
    .map_err(|e| format!("operator assembly failed: {e}"))?;
    let build_s = t_build.elapsed().as_secs_f64();

    let adj = adjoint_check(&op);
    ensure!(adj < 1e-12, "adjoint defect {adj:.2e} >= 1e-12");

    let center = [0.1, -0.05, 0.08];
    let sigma = 0.25f64;
    let f = ScalarField::GaussianBumpSum {
        base: 0.0,
        bumps: vec![GaussianBump {
            amplitude: 0.1,
            center,
            sigma,
        }],
    };
    let f_true = GridField::discretize(&spec, |x| {
        0.1 * (-linalg::norm_sq(linalg::sub(x, center)) / (2.0 * sigma * sigma)).exp()
    })
    .map_err(|e| e.to_string())?;

    // Inverse crime: data generated by the discrete operator itself.
    let t_ic = Instant::now();
    let d_ic = op.apply(&f_true.values);
    let out_ic = solve(
        &op,
        &d_ic,
        &SolverConfig {
            alpha: 1e-8,
            max_iter: 3000,
            tol: 1e-12,
            seed: 0,
        },
    )
    .map_err(|e| format!("inverse-crime solve failed: {e}"))?;
    let err_ic = relative_interior_error(&out_ic.f_hat, &f_true);
    let ic_s = t_ic.elapsed().as_secs_f64();
    ensure!(err_ic < 1e-3, "inverse-crime interior error {err_ic:.2e} >= 1e-3");
    ensure!(
        build_s + ic_s <= 120.0,
        "inverse-crime path took {:.1}s > 120s",
        build_s + ic_s
    );

    // End to end: continuous data from the geodesic quadrature pipeline.
    let t_e2e = Instant::now();
    let data = forward_dataset(
        &bg,
        &chords,
        &f,
        &ForwardOptions {
            step: 5e-3,
            max_length: 20.0,
        },
    )
    .map_err(|e| format!("dataset synthesis failed: {e}"))?;
    let d = op
        .align_data(&data.measurements)
        .map_err(|e| format!("alignment failed: {e}"))?;
    let out = solve(
        &op,
        &d,
        &SolverConfig {
            alpha: 1e-3,
            max_iter: 3000,
            tol: 1e-10,
            seed: 0,
        },
    )
    .map_err(|e| format!("end-to-end solve failed: {e}"))?;
    let err = relative_interior_error(&out.f_hat, &f_true);
    let e2e_s = t_e2e.elapsed().as_secs_f64();
    ensure!(err < 0.10, "end-to-end interior error {err:.4} >= 10%");

    // Recovered vs true ρ bump amplitude (peak above the background).
    let rho0 = 1.3;
    let rho_amp = |values: &[f64]| -> f64 {
        recover_density_peak(values, rho0) - rho0
    };
    let amp_hat = rho_amp(&recover_density(&out.f_hat, rho0));
    let amp_true = rho_amp(&recover_density(&f_true, rho0));
    let amp_ratio = amp_hat / amp_true;
    ensure!(
        (amp_ratio - 1.0).abs() < 0.10,
        "recovered ρ bump amplitude off by {:.1}% (ratio {amp_ratio:.4})",
        (amp_ratio - 1.0).abs() * 100.0
    );
    ensure!(
        build_s + e2e_s <= 600.0,
        "end-to-end path took {:.1}s > 600s",
        build_s + e2e_s
    );

    println!(
        "  inversion detail: {} rows, assembly {build_s:.1}s; inverse crime err {err_ic:.2e} \
         ({} iters, {ic_s:.1}s); end-to-end err {err:.4} ({} iters, {e2e_s:.1}s), ρ-amplitude ratio {amp_ratio:.4}",
        op.nrows(),
        out_ic.iterations,
        out.iterations
    );
    Ok(())
}

fn recover_density_peak(values: &[f64], floor: f64) -> f64 {
    values.iter().cloned().fold(floor, f64::max)
}

// ----- criterion 6: hypothesis checkers -----

fn criterion_checkers() -> Result<(), String> {
    let good = MediumModel::constant(2.0, 1.0, 1.0, Domain::unit_ball());
    // c_S = 1 + 2r²: the boundary second fundamental form is negative.
    let steep = MediumModel::with_fields(
        "radial-polynomial",
        Domain::unit_ball(),
        ScalarField::constant(2.0),
        ScalarField::RadialPolynomial {
            center: [0.0, 0.0, 0.0],
            c0: 1.0,
            c2: 4.0,
            c4: 4.0,
        },
        ScalarField::constant(1.0),
    );
    let good_metric = ConformalMetric::new(&good, WaveMode::S);
    let steep_metric = ConformalMetric::new(&steep, WaveMode::S);

    for (n_points, n_dirs, n_vol) in [(128, 8, 12), (256, 12, 20), (512, 16, 28)] {
        let conv = check_strict_convexity(&good_metric, n_points, n_dirs);
        ensure!(
            conv.pass && conv.min_value > 0.0,
            "constant medium fails strict convexity at resolution {n_points}x{n_dirs}"
        );
        let fol = check_convex_foliation(&good_metric, n_vol);
        ensure!(
            fol.pass && (fol.min_eigenvalue - 2.0).abs() < 1e-9,
            "constant medium foliation minimum {} at n {n_vol}",
            fol.min_eigenvalue
        );

        let bad = check_strict_convexity(&steep_metric, n_points, n_dirs);
        ensure!(
            !bad.pass && bad.min_value < 0.0,
            "steep medium convexity minimum {} not negative at {n_points}x{n_dirs}",
            bad.min_value
        );
    }
    Ok(())
}

// ----- driver -----

#[test]
fn acceptance() {
    type Criterion = (&'static str, Option<f64>, fn() -> Result<(), String>);
    let criteria: [Criterion; 6] = [
        ("1 geometry", Some(10.0), criterion_geometry),
        ("2 transport", Some(10.0), criterion_transport),
        ("3 tensors", Some(30.0), criterion_tensors),
        ("4 transforms", Some(30.0), criterion_transforms),
        ("5 inversion", None, criterion_inversion), // budgets enforced inside
        ("6 hypothesis checkers", None, criterion_checkers),
    ];
    let mut failures = Vec::new();
    for (name, budget, body) in criteria {
        let t0 = Instant::now();
        let mut result = body();
        let dt = t0.elapsed().as_secs_f64();
        if result.is_ok() {
            if let Some(b) = budget {
                if dt > b {
                    result = Err(format!("runtime {dt:.1}s exceeds the {b:.0}s budget"));
                }
            }
        }
        match &result {
            Ok(()) => println!("criterion {name}: PASS ({dt:.1}s)"),
            Err(e) => {
                println!("criterion {name}: FAIL ({dt:.1}s) — {e}");
                failures.push(format!("criterion {name}: {e}"));
            }
        }
    }
    assert!(
        failures.is_empty(),
        "acceptance failures:\n{}",
        failures.join("\n")
    );
}
