//! Small fixed-size vector/matrix helpers used throughout the crate.
//!
//! Everything is plain `[f64; 3]` / `[[f64; 3]; 3]`; no general linear
//! algebra is needed beyond 3×3 symmetric eigenvalues.

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn scale(a: Vec3, k: f64) -> Vec3 {
    [a[0] * k, a[1] * k, a[2] * k]
}

/// a + k·b
pub fn axpy(a: Vec3, k: f64, b: Vec3) -> Vec3 {
    [a[0] + k * b[0], a[1] + k * b[1], a[2] + k * b[2]]
}

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm_sq(a: Vec3) -> f64 {
    dot(a, a)
}

pub fn norm(a: Vec3) -> f64 {
    norm_sq(a).sqrt()
}

pub fn dist(a: Vec3, b: Vec3) -> f64 {
    norm(sub(a, b))
}

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Unit vector along `a`. Panics on the zero vector.
pub fn normalize(a: Vec3) -> Vec3 {
    let n = norm(a);
    assert!(n > 0.0, "cannot normalize the zero vector");
    scale(a, 1.0 / n)
}

pub const ZERO_VEC: Vec3 = [0.0; 3];
pub const ZERO_MAT: Mat3 = [[0.0; 3]; 3];

pub fn identity() -> Mat3 {
    [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
}

pub fn mat_add(a: Mat3, b: Mat3) -> Mat3 {
    let mut m = ZERO_MAT;
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = a[i][j] + b[i][j];
        }
    }
    m
}

pub fn mat_scale(a: Mat3, k: f64) -> Mat3 {
    let mut m = ZERO_MAT;
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = a[i][j] * k;
        }
    }
    m
}

pub fn mat_vec(m: Mat3, v: Vec3) -> Vec3 {
    [dot(m[0], v), dot(m[1], v), dot(m[2], v)]
}

pub fn transpose(m: Mat3) -> Mat3 {
    let mut t = ZERO_MAT;
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = m[j][i];
        }
    }
    t
}

pub fn trace(m: Mat3) -> f64 {
    m[0][0] + m[1][1] + m[2][2]
}

/// vᵀ M w
pub fn bilinear(m: Mat3, v: Vec3, w: Vec3) -> f64 {
    dot(v, mat_vec(m, w))
}

/// vᵀ M v
pub fn quad_form(m: Mat3, v: Vec3) -> f64 {
    bilinear(m, v, v)
}

/// a ⊗ b
pub fn outer(a: Vec3, b: Vec3) -> Mat3 {
    let mut m = ZERO_MAT;
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = a[i] * b[j];
        }
    }
    m
}

/// a ⊗ˢ b = (a⊗b + b⊗a)/2
pub fn sym_outer(a: Vec3, b: Vec3) -> Mat3 {
    let mut m = ZERO_MAT;
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = 0.5 * (a[i] * b[j] + a[j] * b[i]);
        }
    }
    m
}

/// (M + Mᵀ)/2
pub fn symmetrize(m: Mat3) -> Mat3 {
    mat_scale(mat_add(m, transpose(m)), 0.5)
}

pub fn frobenius(m: Mat3) -> f64 {
    let mut s = 0.0;
    for row in m {
        for e in row {
            s += e * e;
        }
    }
    s.sqrt()
}

/// Eigenvalues of a symmetric 3×3 matrix, ascending.
///
/// Closed-form trigonometric method: exact for diagonal input, otherwise
/// accurate to a few ulps of the spectral radius.
pub fn sym_eigenvalues(m: Mat3) -> [f64; 3] {
    let p1 = m[0][1] * m[0][1] + m[0][2] * m[0][2] + m[1][2] * m[1][2];
    if p1 == 0.0 {
        let mut d = [m[0][0], m[1][1], m[2][2]];
        d.sort_by(|a, b| a.partial_cmp(b).expect("NaN eigenvalue"));
        return d;
    }
    let q = trace(m) / 3.0;
    let p2 = (m[0][0] - q).powi(2) + (m[1][1] - q).powi(2) + (m[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let mut b = ZERO_MAT;
    for i in 0..3 {
        for j in 0..3 {
            b[i][j] = (m[i][j] - if i == j { q } else { 0.0 }) / p;
        }
    }
    let det_b = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1])
        - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
        + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    let r = (det_b / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let e1 = q + 2.0 * p * phi.cos();
    let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    let e2 = 3.0 * q - e1 - e3;
    [e3, e2, e1]
}

pub fn min_eigenvalue(m: Mat3) -> f64 {
    sym_eigenvalues(m)[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cross_is_orthogonal() {
        let a = [1.0, 2.0, 3.0];
        let b = [-0.5, 4.0, 1.5];
        let c = cross(a, b);
        assert!(dot(c, a).abs() < 1e-12);
        assert!(dot(c, b).abs() < 1e-12);
    }

    #[test]
    fn eigenvalues_of_known_matrices() {
        let d = [[3.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 2.0]];
        assert_eq!(sym_eigenvalues(d), [-1.0, 2.0, 3.0]);

        // [[2,1,0],[1,2,0],[0,0,5]] has eigenvalues 1, 3, 5.
        let m = [[2.0, 1.0, 0.0], [1.0, 2.0, 0.0], [0.0, 0.0, 5.0]];
        let e = sym_eigenvalues(m);
        assert!((e[0] - 1.0).abs() < 1e-12, "e = {:?}", e);
        assert!((e[1] - 3.0).abs() < 1e-12);
        assert!((e[2] - 5.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn eigenvalues_match_characteristic_polynomial(
            a in -5.0f64..5.0, b in -5.0f64..5.0, c in -5.0f64..5.0,
            d in -5.0f64..5.0, e in -5.0f64..5.0, f in -5.0f64..5.0,
        ) {
            let m = [[a, d, e], [d, b, f], [e, f, c]];
            for lam in sym_eigenvalues(m) {
                // det(M - λI) should vanish relative to the matrix scale.
                let s = [[a - lam, d, e], [d, b - lam, f], [e, f, c - lam]];
                let det = s[0][0] * (s[1][1] * s[2][2] - s[1][2] * s[2][1])
                    - s[0][1] * (s[1][0] * s[2][2] - s[1][2] * s[2][0])
                    + s[0][2] * (s[1][0] * s[2][1] - s[1][1] * s[2][0]);
                let scale = frobenius(m).max(1.0).powi(3);
                prop_assert!(det.abs() <= 1e-10 * scale, "det = {det}, λ = {lam}");
            }
        }

        #[test]
        fn sym_outer_contracts_like_product(
            ax in -2.0f64..2.0, ay in -2.0f64..2.0, az in -2.0f64..2.0,
            bx in -2.0f64..2.0, by in -2.0f64..2.0, bz in -2.0f64..2.0,
            vx in -2.0f64..2.0, vy in -2.0f64..2.0, vz in -2.0f64..2.0,
        ) {
            let a = [ax, ay, az];
            let b = [bx, by, bz];
            let v = [vx, vy, vz];
            let lhs = quad_form(sym_outer(a, b), v);
            let rhs = dot(a, v) * dot(b, v);
            prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + rhs.abs()));
        }
    }
}
