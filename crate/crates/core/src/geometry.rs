//! Spherical points and frame changes.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spherical {
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
}

impl Spherical {
    pub const fn new(r: f64, theta: f64, phi: f64) -> Self {
        Self { r, theta, phi }
    }

    pub fn to_cartesian(self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [self.r * st * cp, self.r * st * sp, self.r * ct]
    }

    /// Inverse of [`Spherical::to_cartesian`] with `φ ∈ [0, 2π)`.
    pub fn from_cartesian(x: [f64; 3]) -> Self {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let theta = if r == 0.0 { 0.0 } else { (x[2] / r).clamp(-1.0, 1.0).acos() };
        let mut phi = x[1].atan2(x[0]);
        if phi < 0.0 {
            phi += std::f64::consts::TAU;
        }
        Self { r, theta, phi }
    }
}

/// Rows are `ê_r`, `ê_θ`, `ê_φ` in Cartesian components.
pub fn local_frame(theta: f64, phi: f64) -> [[f64; 3]; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [
        [st * cp, st * sp, ct],
        [ct * cp, ct * sp, -st],
        [-sp, cp, 0.0],
    ]
}

/// `(v_r, v_θ, v_φ)` to Cartesian components.
pub fn to_cartesian_components(theta: f64, phi: f64, v: [f64; 3]) -> [f64; 3] {
    let e = local_frame(theta, phi);
    let mut out = [0.0; 3];
    for (row, vi) in e.iter().zip(v) {
        for c in 0..3 {
            out[c] += vi * row[c];
        }
    }
    out
}

/// Cartesian components to `(v_r, v_θ, v_φ)`.
pub fn to_spherical_components(theta: f64, phi: f64, v: [f64; 3]) -> [f64; 3] {
    let e = local_frame(theta, phi);
    e.map(|row| row[0] * v[0] + row[1] * v[1] + row[2] * v[2])
}

pub fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
