//! Closed-form test fields used by the verification suites.

use serde::{Deserialize, Serialize};

use crate::geometry::{to_spherical_components, Spherical};

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// `exp(−c / (1 − |x − x₀|²/a²))` inside the ball of radius `a` about `x₀`, zero outside.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompactBump {
    pub center: [f64; 3],
    pub support: f64,
    pub sharpness: f64,
}

impl CompactBump {
    pub fn value(&self, x: [f64; 3]) -> f64 {
        let d = sub(x, self.center);
        let s2 = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) / (self.support * self.support);
        if s2 >= 1.0 {
            0.0
        } else {
            (-self.sharpness / (1.0 - s2)).exp()
        }
    }

    /// Cartesian gradient.
    pub fn gradient(&self, x: [f64; 3]) -> [f64; 3] {
        let d = sub(x, self.center);
        let a2 = self.support * self.support;
        let s2 = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) / a2;
        if s2 >= 1.0 {
            return [0.0; 3];
        }
        let g = -self.value(x) * 2.0 * self.sharpness / ((1.0 - s2).powi(2) * a2);
        [g * d[0], g * d[1], g * d[2]]
    }
}

/// `exp(−|x − x₀|² / (2w²))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianBump {
    pub center: [f64; 3],
    pub width: f64,
}

impl GaussianBump {
    pub fn value(&self, x: [f64; 3]) -> f64 {
        let d = sub(x, self.center);
        (-(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) / (2.0 * self.width * self.width)).exp()
    }

    pub fn gradient(&self, x: [f64; 3]) -> [f64; 3] {
        let d = sub(x, self.center);
        let g = -self.value(x) / (self.width * self.width);
        [g * d[0], g * d[1], g * d[2]]
    }
}

/// `f = ∇p + ∇s × e` with narrow Gaussians `p`, `s` and a fixed axis `e`.
/// The first term is a gradient and the second is divergence-free; both
/// are below `1e−6` of their peak on the sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HelmholtzField {
    pub potential: GaussianBump,
    pub stream: GaussianBump,
    pub axis: [f64; 3],
    /// Length scale; both bumps are given on the unit ball and stretched by it.
    pub radius: f64,
}

impl Default for HelmholtzField {
    fn default() -> Self {
        Self {
            potential: GaussianBump {
                center: [0.08, -0.04, 0.05],
                width: 0.17,
            },
            stream: GaussianBump {
                center: [-0.05, 0.07, -0.03],
                width: 0.17,
            },
            axis: [0.3, -0.5, 0.8],
            radius: 1.0,
        }
    }
}

impl HelmholtzField {
    pub fn with_radius(radius: f64) -> Self {
        Self {
            radius,
            ..Self::default()
        }
    }

    fn unit(&self, p: Spherical) -> [f64; 3] {
        p.to_cartesian().map(|c| c / self.radius)
    }

    /// `∇p` in spherical components.
    pub fn potential_part(&self, p: Spherical) -> [f64; 3] {
        let g = self.potential.gradient(self.unit(p)).map(|c| c / self.radius);
        to_spherical_components(p.theta, p.phi, g)
    }

    /// `∇s × e` in spherical components.
    pub fn solenoidal_part(&self, p: Spherical) -> [f64; 3] {
        let g = self.stream.gradient(self.unit(p)).map(|c| c / self.radius);
        to_spherical_components(p.theta, p.phi, cross(g, self.axis))
    }

    pub fn eval(&self, p: Spherical) -> [f64; 3] {
        let a = self.potential_part(p);
        let b = self.solenoidal_part(p);
        [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
    }
}
