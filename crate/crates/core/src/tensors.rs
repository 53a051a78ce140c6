//! Amplitude-transport tensors M (P-wave) and Sym(N) (S-wave).
//!
//! Writing l = log√ρ, g_P = c_P⁻²I, and treating Δ, ∇², ∇, |·|, "·" as
//! Euclidean operators in Cartesian coordinates:
//!
//! M = −(c_P²−4c_S²)Δl·g_P + ((2c_P²−4c_S²)/c_P²)∇²l
//!     + (c_P²−4c_S² + 4c_S⁴/(c_P²−c_S²))|∇l|²·g_P
//!     + (c_S²/c_P²)((c_P²−2c_S²)/(c_P²−c_S²))∇l⊗∇l
//!     + (∇l·(−∇c_P² + (8c_S²/(c_P²−c_S²))∇c_S²))·g_P
//!     + c_P⁻²∇l⊗(2∇c_P² − (8c_S²/(c_P²−c_S²))∇c_S²)
//!
//! Sym(N) = Δl·I + 2∇²l + |∇l|²·I + 4((c_P²−2c_S²)/(c_P²−c_S²))∇l⊗∇l
//!          + c_S⁻²(∇l·∇c_S²)·I + ∇l ⊗ˢ V,
//! V = 2((c_P²−c_S²)/c_S⁴)∇c_S² + c_S⁻²∇c_P² − (12/(c_P²−c_S²))∇c_S².
//!
//! M is kept exactly in the displayed form, un-symmetrized ⊗ included; the
//! longitudinal contraction γ̇ᵀMγ̇ is insensitive to the asymmetry, and
//! consumers needing a symmetric M apply `linalg::symmetrize`. The ⊗ˢ in
//! Sym(N) is (u⊗v + v⊗u)/2.
//!
//! `linearize_n` is the first-order expansion of Sym(N) around a
//! constant-density background in f = log√ρ − log√ρ₀ (terms quadratic in ∇f
//! dropped): L[f] = Δf·I + 2∇²f + c_S⁻²(∇f·∇c_S²)·I + ∇f ⊗ˢ V. L[f] is what
//! the inversion module discretizes.

use crate::linalg::{self, Mat3, Vec3};
use crate::medium::{MediumModel, ScalarField, WaveMode};

#[derive(Debug, thiserror::Error)]
pub enum TensorError {
    #[error("degenerate medium: {0}")]
    DegenerateMedium(String),
    #[error("linearization background must have constant density")]
    NonConstantBackground,
}

/// Which form of the ∇l⊗∇l coefficient in M to use. The final display
/// carries (c_S²/c_P²)(c_P²−2c_S²)/(c_P²−c_S²); the displayed calculation
/// it condenses carries an additional factor 4 on that term. The two forms
/// are selectable so the discrepancy stays visible; the final display is
/// the default everywhere.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MVariant {
    #[default]
    FinalDisplay,
    PrefactorFour,
}

/// A smooth matrix-valued field x ↦ 3×3 matrix with a provenance tag.
pub struct SymTensorField {
    pub tag: String,
    eval: Box<dyn Fn(Vec3) -> Mat3 + Send + Sync>,
}

impl SymTensorField {
    pub fn new(
        tag: impl Into<String>,
        eval: impl Fn(Vec3) -> Mat3 + Send + Sync + 'static,
    ) -> Self {
        SymTensorField {
            tag: tag.into(),
            eval: Box::new(eval),
        }
    }

    pub fn eval(&self, x: Vec3) -> Mat3 {
        (self.eval)(x)
    }
}

impl std::fmt::Debug for SymTensorField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SymTensorField").field("tag", &self.tag).finish()
    }
}

struct SpeedData {
    cp2: f64,
    cs2: f64,
    grad_cp2: Vec3,
    grad_cs2: Vec3,
}

fn speed_data(model: &MediumModel, x: Vec3) -> SpeedData {
    SpeedData {
        cp2: model.wavespeed_sq(WaveMode::P, x),
        cs2: model.wavespeed_sq(WaveMode::S, x),
        grad_cp2: model.wavespeed_sq_gradient(WaveMode::P, x),
        grad_cs2: model.wavespeed_sq_gradient(WaveMode::S, x),
    }
}

/// Coarse nondegeneracy guard shared by the assembly constructors: positive
/// moduli imply c_P > c_S > 0 pointwise, which keeps every denominator
/// (c_P², c_S², c_P²−c_S²) away from zero.
fn validate(model: &MediumModel) -> Result<(), TensorError> {
    let report = model.check_positivity(6);
    if !report.pass {
        return Err(TensorError::DegenerateMedium(format!(
            "positivity violated on a coarse lattice (min μ = {:.3e}, min 3λ+2μ = {:.3e}, min ρ = {:.3e})",
            report.min_mu, report.min_3lambda_2mu, report.min_rho
        )));
    }
    Ok(())
}

/// The vector V in the ∇l ⊗ˢ V term of Sym(N) and of the linearization.
pub fn v_vector(model: &MediumModel, x: Vec3) -> Vec3 {
    let s = speed_data(model, x);
    let d = s.cp2 - s.cs2;
    let mut v = linalg::scale(s.grad_cs2, 2.0 * d / (s.cs2 * s.cs2));
    v = linalg::axpy(v, 1.0 / s.cs2, s.grad_cp2);
    linalg::axpy(v, -12.0 / d, s.grad_cs2)
}

/// Assemble the P-wave transport tensor M of the medium.
pub fn assemble_m(model: &MediumModel, variant: MVariant) -> Result<SymTensorField, TensorError> {
    validate(model)?;
    let m = model.clone();
    let tag = match variant {
        MVariant::FinalDisplay => "M",
        MVariant::PrefactorFour => "M[prefactor-four]",
    };
    Ok(SymTensorField::new(tag, move |x| {
        let l = m
            .log_sqrt_rho_derivatives(x)
            .expect("tensor evaluated outside the model domain");
        let s = speed_data(&m, x);
        let (cp2, cs2) = (s.cp2, s.cs2);
        let d = cp2 - cs2;
        let g_p = linalg::mat_scale(linalg::identity(), 1.0 / cp2);
        let dl = l.gradient;

        let t4 = cs2 / cp2 * (cp2 - 2.0 * cs2) / d
            * match variant {
                MVariant::FinalDisplay => 1.0,
                MVariant::PrefactorFour => 4.0,
            };
        // ∇l·(−∇c_P² + (8c_S²/(c_P²−c_S²))∇c_S²)
        let w5 = linalg::axpy(linalg::scale(s.grad_cp2, -1.0), 8.0 * cs2 / d, s.grad_cs2);
        // 2∇c_P² − (8c_S²/(c_P²−c_S²))∇c_S²
        let w6 = linalg::axpy(linalg::scale(s.grad_cp2, 2.0), -8.0 * cs2 / d, s.grad_cs2);

        let mut out = linalg::mat_scale(g_p, -(cp2 - 4.0 * cs2) * l.laplacian);
        out = linalg::mat_add(out, linalg::mat_scale(l.hessian, (2.0 * cp2 - 4.0 * cs2) / cp2));
        out = linalg::mat_add(
            out,
            linalg::mat_scale(
                g_p,
                (cp2 - 4.0 * cs2 + 4.0 * cs2 * cs2 / d) * linalg::norm_sq(dl),
            ),
        );
        out = linalg::mat_add(out, linalg::mat_scale(linalg::outer(dl, dl), t4));
        out = linalg::mat_add(out, linalg::mat_scale(g_p, linalg::dot(dl, w5)));
        linalg::mat_add(out, linalg::mat_scale(linalg::outer(dl, w6), 1.0 / cp2))
    }))
}

/// Assemble the S-wave transport cotensor N in its coordinate-free form,
/// with g_S = c_S⁻²I entering as an explicit weight. Not symmetric in
/// general; `assemble_sym_n` is its symmetrization.
pub fn assemble_n(model: &MediumModel) -> Result<SymTensorField, TensorError> {
    validate(model)?;
    let m = model.clone();
    Ok(SymTensorField::new("N", move |x| {
        let l = m
            .log_sqrt_rho_derivatives(x)
            .expect("tensor evaluated outside the model domain");
        let s = speed_data(&m, x);
        let (cp2, cs2) = (s.cp2, s.cs2);
        let g_s = linalg::mat_scale(linalg::identity(), 1.0 / cs2);
        let dl = l.gradient;
        let kappa = (cp2 - 2.0 * cs2) / (cp2 - cs2);
        let v = v_vector(&m, x);

        let mut out = linalg::mat_scale(g_s, cs2 * l.laplacian);
        out = linalg::mat_add(out, linalg::mat_scale(l.hessian, 2.0));
        out = linalg::mat_add(out, linalg::mat_scale(g_s, cs2 * linalg::norm_sq(dl)));
        out = linalg::mat_add(out, linalg::mat_scale(linalg::outer(dl, dl), 4.0 * kappa));
        out = linalg::mat_add(out, linalg::mat_scale(g_s, linalg::dot(dl, s.grad_cs2)));
        linalg::mat_add(out, linalg::outer(dl, v))
    }))
}

/// Assemble Sym(N) in its Cartesian display.
pub fn assemble_sym_n(model: &MediumModel) -> Result<SymTensorField, TensorError> {
    validate(model)?;
    let m = model.clone();
    Ok(SymTensorField::new("SymN", move |x| {
        let l = m
            .log_sqrt_rho_derivatives(x)
            .expect("tensor evaluated outside the model domain");
        let s = speed_data(&m, x);
        let (cp2, cs2) = (s.cp2, s.cs2);
        let dl = l.gradient;
        let kappa = (cp2 - 2.0 * cs2) / (cp2 - cs2);
        let v = v_vector(&m, x);

        let mut out = linalg::mat_scale(linalg::identity(), l.laplacian);
        out = linalg::mat_add(out, linalg::mat_scale(l.hessian, 2.0));
        out = linalg::mat_add(out, linalg::mat_scale(linalg::identity(), linalg::norm_sq(dl)));
        out = linalg::mat_add(out, linalg::mat_scale(linalg::outer(dl, dl), 4.0 * kappa));
        out = linalg::mat_add(
            out,
            linalg::mat_scale(linalg::identity(), linalg::dot(dl, s.grad_cs2) / cs2),
        );
        linalg::mat_add(out, linalg::sym_outer(dl, v))
    }))
}

/// First-order expansion of Sym(N) around a constant-density background:
/// L[f] = Δf·I + 2∇²f + c_S⁻²(∇f·∇c_S²)·I + ∇f ⊗ˢ V. Linear in f; the
/// wavespeed data is the background's.
pub fn linearize_n(model: &MediumModel, f: &ScalarField) -> Result<SymTensorField, TensorError> {
    validate(model)?;
    if !model.rho.is_constant() {
        return Err(TensorError::NonConstantBackground);
    }
    let m = model.clone();
    let f = f.clone();
    Ok(SymTensorField::new("linearized", move |x| {
        let s = speed_data(&m, x);
        let grad = f.gradient(x);
        let hess = f.hessian(x);
        let lap = linalg::trace(hess);
        let v = v_vector(&m, x);

        let mut out = linalg::mat_scale(linalg::identity(), lap);
        out = linalg::mat_add(out, linalg::mat_scale(hess, 2.0));
        out = linalg::mat_add(
            out,
            linalg::mat_scale(linalg::identity(), linalg::dot(grad, s.grad_cs2) / s.cs2),
        );
        linalg::mat_add(out, linalg::sym_outer(grad, v))
    }))
}

/// The transverse contraction of L[f] with a fixed vector η as a linear
/// functional of f's derivatives at a point:
///
/// ⟨L[f], η⊗η⟩ = |η|²Δf + 2ηᵀ(∇²f)η + g·∇f,  g = c_S⁻²|η|²∇c_S² + (V·η)η.
///
/// The inversion module applies this functional to finite-difference
/// stencils; keeping it here ties the discrete rows to the same medium
/// coefficients the smooth operators use.
#[derive(Clone, Copy, Debug)]
pub struct TransverseLin {
    pub eta_sq: f64,
    pub g: Vec3,
}

impl TransverseLin {
    pub fn apply(&self, grad: Vec3, hess: Mat3, eta: Vec3) -> f64 {
        self.eta_sq * linalg::trace(hess) + 2.0 * linalg::quad_form(hess, eta)
            + linalg::dot(self.g, grad)
    }
}

pub fn transverse_linearization(model: &MediumModel, x: Vec3, eta: Vec3) -> TransverseLin {
    let s = speed_data(model, x);
    let eta_sq = linalg::norm_sq(eta);
    let v = v_vector(model, x);
    let g = linalg::axpy(
        linalg::scale(s.grad_cs2, eta_sq / s.cs2),
        linalg::dot(v, eta),
        eta,
    );
    TransverseLin { eta_sq, g }
}

/// ∑_{ij} ∂_i∂_j T_ij(x) by central finite differences: a 19-point stencil
/// (center, 6 axis neighbors, 12 edge-diagonal neighbors), O(h²) accurate
/// and exact for entries quadratic in x.
pub fn double_divergence(field: &SymTensorField, x: Vec3, h: f64) -> f64 {
    assert!(h > 0.0);
    let shift = |i: usize, a: f64, j: usize, b: f64| {
        let mut p = x;
        p[i] += a * h;
        p[j] += b * h;
        field.eval(p)
    };
    let center = field.eval(x);
    let mut out = 0.0;
    for i in 0..3 {
        let plus = shift(i, 1.0, i, 0.0);
        let minus = shift(i, -1.0, i, 0.0);
        out += (plus[i][i] - 2.0 * center[i][i] + minus[i][i]) / (h * h);
    }
    for (i, j) in [(0usize, 1usize), (0, 2), (1, 2)] {
        let pp = shift(i, 1.0, j, 1.0);
        let pm = shift(i, 1.0, j, -1.0);
        let mp = shift(i, -1.0, j, 1.0);
        let mm = shift(i, -1.0, j, -1.0);
        // ∂_i∂_j (T_ij + T_ji)
        let num = (pp[i][j] + pp[j][i]) - (pm[i][j] + pm[j][i]) - (mp[i][j] + mp[j][i])
            + (mm[i][j] + mm[j][i]);
        out += num / (4.0 * h * h);
    }
    out
}
