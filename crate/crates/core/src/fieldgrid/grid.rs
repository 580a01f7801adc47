use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Spherical;
use crate::quadrature::{gauss_legendre, gauss_legendre_on};

pub const DEFAULT_NR: usize = 48;
pub const DEFAULT_NTHETA: usize = 48;
pub const DEFAULT_NPHI: usize = 96;

/// Grid parameters as written in field files.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    #[serde(rename = "R")]
    pub radius: f64,
    pub nr: usize,
    #[serde(rename = "nθ")]
    pub ntheta: usize,
    #[serde(rename = "nφ")]
    pub nphi: usize,
}

/// Tensor quadrature over the ball: Gauss–Legendre in `r` and in `cos θ`,
/// uniform in `φ`. Node `(i, j, l)` has flat index `i + nr (j + nθ l)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BallGrid {
    pub radius: f64,
    pub nr: usize,
    pub ntheta: usize,
    pub nphi: usize,
    pub r: Vec<f64>,
    /// Gauss weights on `[0, R]`, without the `r²` factor.
    pub wr: Vec<f64>,
    pub theta: Vec<f64>,
    pub cos_theta: Vec<f64>,
    pub sin_theta: Vec<f64>,
    /// Gauss weights in `cos θ`; these already include `sin θ dθ`.
    pub wtheta: Vec<f64>,
    pub phi: Vec<f64>,
}

impl BallGrid {
    pub fn new(radius: f64, nr: usize, ntheta: usize, nphi: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Invalid(format!("radius {radius} must be positive")));
        }
        if nr == 0 || ntheta == 0 || nphi == 0 {
            return Err(Error::Invalid("grid sizes must be positive".into()));
        }
        let (r, wr) = gauss_legendre_on(nr, 0.0, radius);
        let (theta, cos_theta, sin_theta, wtheta) = polar_rule(ntheta);
        Ok(Self {
            radius,
            nr,
            ntheta,
            nphi,
            r,
            wr,
            theta,
            cos_theta,
            sin_theta,
            wtheta,
            phi: azimuths(nphi),
        })
    }

    pub fn with_defaults(radius: f64) -> Result<Self> {
        Self::new(radius, DEFAULT_NR, DEFAULT_NTHETA, DEFAULT_NPHI)
    }

    pub fn from_spec(spec: GridSpec) -> Result<Self> {
        Self::new(spec.radius, spec.nr, spec.ntheta, spec.nphi)
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            radius: self.radius,
            nr: self.nr,
            ntheta: self.ntheta,
            nphi: self.nphi,
        }
    }

    pub fn len(&self) -> usize {
        self.nr * self.ntheta * self.nphi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, l: usize) -> usize {
        i + self.nr * (j + self.ntheta * l)
    }

    #[inline]
    pub fn split(&self, idx: usize) -> (usize, usize, usize) {
        let i = idx % self.nr;
        let rest = idx / self.nr;
        (i, rest % self.ntheta, rest / self.ntheta)
    }

    pub fn node(&self, idx: usize) -> Spherical {
        let (i, j, l) = self.split(idx);
        Spherical::new(self.r[i], self.theta[j], self.phi[l])
    }

    #[inline]
    pub fn dphi(&self) -> f64 {
        2.0 * PI / self.nphi as f64
    }

    /// `w_i^r r_i² w_j^θ (2π/nφ)`.
    pub fn weight(&self, idx: usize) -> f64 {
        let (i, j, _) = self.split(idx);
        self.wr[i] * self.r[i] * self.r[i] * self.wtheta[j] * self.dphi()
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.len()).map(|idx| self.weight(idx)).collect()
    }

    /// Quadrature grid on the bounding sphere with the same angular rule.
    pub fn surface(&self) -> SurfaceGrid {
        SurfaceGrid::new(self.radius, self.ntheta, self.nphi)
    }

    /// `index,r,theta,phi,weight` rows in node order.
    pub fn nodes_csv(&self) -> String {
        let mut out = String::from("index,r,theta,phi,weight\n");
        for idx in 0..self.len() {
            let p = self.node(idx);
            let _ = writeln!(
                out,
                "{idx},{:.16e},{:.16e},{:.16e},{:.16e}",
                p.r,
                p.theta,
                p.phi,
                self.weight(idx)
            );
        }
        out
    }

    /// Largest harmonic degree the angular rule integrates exactly in products.
    pub fn max_degree(&self) -> usize {
        (self.ntheta - 1).min(self.nphi.saturating_sub(1) / 2)
    }
}

fn polar_rule(ntheta: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
    // descending cos θ gives ascending θ
    let (x, w) = gauss_legendre(ntheta);
    let cos_theta: Vec<f64> = x.iter().rev().copied().collect();
    let wtheta: Vec<f64> = w.iter().rev().copied().collect();
    let theta = cos_theta.iter().map(|c| c.acos()).collect();
    let sin_theta = cos_theta.iter().map(|c| (1.0 - c * c).sqrt()).collect();
    (theta, cos_theta, sin_theta, wtheta)
}

fn azimuths(nphi: usize) -> Vec<f64> {
    (0..nphi).map(|l| 2.0 * PI * l as f64 / nphi as f64).collect()
}

/// Angular quadrature on the sphere `r = R`.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceGrid {
    pub radius: f64,
    pub ntheta: usize,
    pub nphi: usize,
    pub theta: Vec<f64>,
    pub wtheta: Vec<f64>,
    pub phi: Vec<f64>,
}

impl SurfaceGrid {
    pub fn new(radius: f64, ntheta: usize, nphi: usize) -> Self {
        let (theta, _, _, wtheta) = polar_rule(ntheta);
        Self {
            radius,
            ntheta,
            nphi,
            theta,
            wtheta,
            phi: azimuths(nphi),
        }
    }

    pub fn len(&self) -> usize {
        self.ntheta * self.nphi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn node(&self, idx: usize) -> Spherical {
        Spherical::new(self.radius, self.theta[idx % self.ntheta], self.phi[idx / self.ntheta])
    }

    /// Area element weight `R² w_j^θ (2π/nφ)`.
    pub fn weight(&self, idx: usize) -> f64 {
        self.radius * self.radius * self.wtheta[idx % self.ntheta] * 2.0 * PI / self.nphi as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = Spherical> + '_ {
        (0..self.len()).map(|i| self.node(i))
    }

    /// Nodes with `θ` inside `[margin, π − margin]`.
    pub fn interior_nodes(&self, margin: f64) -> Vec<Spherical> {
        self.nodes()
            .filter(|p| p.theta >= margin && p.theta <= PI - margin)
            .collect()
    }

    pub fn max_abs(&self, f: impl Fn(Spherical) -> f64) -> f64 {
        self.nodes().map(|p| f(p).abs()).fold(0.0, f64::max)
    }

    /// Root-mean-square over the sphere, area weighted.
    pub fn rms(&self, f: impl Fn(Spherical) -> f64) -> f64 {
        let area = 4.0 * PI * self.radius * self.radius;
        let s: f64 = (0..self.len())
            .map(|i| {
                let v = f(self.node(i));
                self.weight(i) * v * v
            })
            .sum();
        (s / area).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_volume() {
        for radius in [1.0, 0.3, 4.0] {
            let g = BallGrid::new(radius, 12, 10, 16).unwrap();
            let total: f64 = g.weights().iter().sum();
            let vol = 4.0 / 3.0 * PI * radius.powi(3);
            assert!((total - vol).abs() <= 1e-12 * vol);
        }
    }

    #[test]
    fn nodes_are_interior_and_ordered() {
        let g = BallGrid::new(2.0, 5, 4, 6).unwrap();
        assert!(g.r.iter().all(|&r| r > 0.0 && r < 2.0));
        assert!(g.theta.iter().all(|&t| t > 0.0 && t < PI));
        assert!(g.theta.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(g.node(1).r, g.r[1]);
        assert_eq!(g.node(5).theta, g.theta[1]);
        assert_eq!(g.node(5 * 4).phi, g.phi[1]);
        for idx in 0..g.len() {
            let (i, j, l) = g.split(idx);
            assert_eq!(g.index(i, j, l), idx);
        }
    }

    #[test]
    fn radial_moments_are_exact() {
        let nr = 8;
        let g = BallGrid::new(1.5, nr, 4, 4).unwrap();
        for p in 0..=(2 * nr - 3) {
            let q: f64 = (0..g.len()).map(|i| g.weight(i) * g.node(i).r.powi(p as i32)).sum();
            let exact = 4.0 * PI * 1.5f64.powi(p as i32 + 3) / (p as f64 + 3.0);
            assert!((q - exact).abs() <= 1e-12 * exact, "p={p}");
        }
    }

    #[test]
    fn surface_area() {
        let s = SurfaceGrid::new(2.0, 6, 8);
        let a: f64 = (0..s.len()).map(|i| s.weight(i)).sum();
        assert!((a - 16.0 * PI).abs() < 1e-12);
        assert!((s.rms(|_| 3.0) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn spec_keys() {
        let g = BallGrid::new(1.0, 2, 3, 4).unwrap();
        let v = serde_json::to_value(g.spec()).unwrap();
        assert_eq!(v["R"], 1.0);
        assert_eq!(v["nθ"], 3);
        assert_eq!(v["nφ"], 4);
        assert!(g.nodes_csv().lines().count() == 25);
    }
}
