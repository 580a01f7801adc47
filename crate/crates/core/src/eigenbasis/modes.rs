//! Pointwise evaluation of the eigenfields.

use crate::geometry::Spherical;
use crate::quadrature::composite_gauss;
use crate::specialfn::{psi_pair, NormalizedLegendre};
use crate::specialfn::harmonics::{azimuthal, azimuthal_derivative_factor};

/// `Y`, `∂_θY`, `sin⁻¹θ ∂_φY` of one harmonic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Angular {
    pub y: f64,
    pub h_theta: f64,
    pub h_phi: f64,
}

impl Angular {
    pub fn at(n: usize, k: i64, theta: f64, phi: f64) -> Self {
        let leg = NormalizedLegendre::new(n, theta);
        Self::from_legendre(&leg, n, k, phi)
    }

    pub fn from_legendre(leg: &NormalizedLegendre, n: usize, k: i64, phi: f64) -> Self {
        let m = k.unsigned_abs() as usize;
        let t = azimuthal(k, phi);
        let h_phi = if k == 0 {
            0.0
        } else {
            leg.p_over_sin(n, m) * azimuthal_derivative_factor(k) * azimuthal(-k, phi)
        };
        Self {
            y: leg.p(n, m) * t,
            h_theta: leg.dp(n, m) * t,
            h_phi,
        }
    }
}

/// Radial factors of the unnormalized gradient field `∇(ψₙ(νr) Y)`:
/// `(ν ψₙ′(νr), ψₙ(νr)/r)`.
#[inline]
pub fn potential_radial(n: usize, nu: f64, r: f64) -> (f64, f64) {
    let (f, df) = psi_pair(n, nu * r);
    (nu * df, f / r)
}

/// Radial factors of the unnormalized poloidal/toroidal pair built from
/// `ψₙ(λr) Y`: `(n(n+1) f/(λr), (f + λr f′)/(λr), f)`.
#[inline]
pub fn solenoidal_radial(n: usize, lambda: f64, r: f64) -> (f64, f64, f64) {
    let z = lambda * r;
    let (f, df) = psi_pair(n, z);
    let nn = (n * (n + 1)) as f64;
    (nn * f / z, (f + z * df) / z, f)
}

/// Potential eigenfield with normalization `c`.
pub fn potential_field(n: usize, k: i64, nu: f64, c: f64, p: Spherical) -> [f64; 3] {
    let a = Angular::at(n, k, p.theta, p.phi);
    let (radial, tangential) = potential_radial(n, nu, p.r);
    [
        c * radial * a.y,
        c * tangential * a.h_theta,
        c * tangential * a.h_phi,
    ]
}

/// Curl eigenfield `c (P ± T)` with `sign = ±1`.
pub fn solenoidal_field(n: usize, k: i64, lambda: f64, sign: f64, c: f64, p: Spherical) -> [f64; 3] {
    let a = Angular::at(n, k, p.theta, p.phi);
    let (pr, h, f) = solenoidal_radial(n, lambda, p.r);
    [
        c * pr * a.y,
        c * (h * a.h_theta + sign * f * a.h_phi),
        c * (h * a.h_phi - sign * f * a.h_theta),
    ]
}

/// `∫₀^1 ψₙ(z t)² t² dt` by composite Gauss quadrature.
pub fn radial_square_integral(n: usize, z: f64) -> f64 {
    let panels = (z / 2.0).ceil() as usize + 2;
    let (t, w) = composite_gauss(panels, 16, 0.0, 1.0);
    t.iter()
        .zip(&w)
        .map(|(&t, &w)| {
            let (f, _) = psi_pair(n, z * t);
            w * f * f * t * t
        })
        .sum()
}
