//! Finite-difference differential operators in spherical coordinates.
//!
//! These evaluate the function being differentiated at stencil points around
//! each probe and share no code with the analytic derivatives in `eigenbasis`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{to_cartesian_components, to_spherical_components, Spherical};

pub trait ScalarFn: Sync {
    fn eval(&self, p: Spherical) -> f64;
}

pub trait VectorFn: Sync {
    fn eval(&self, p: Spherical) -> [f64; 3];
}

impl<F: Fn(Spherical) -> f64 + Sync> ScalarFn for F {
    fn eval(&self, p: Spherical) -> f64 {
        self(p)
    }
}

impl<F: Fn(Spherical) -> [f64; 3] + Sync> VectorFn for F {
    fn eval(&self, p: Spherical) -> [f64; 3] {
        self(p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StencilOrder {
    Four,
    Eight,
}

impl StencilOrder {
    fn first(self) -> &'static [f64] {
        match self {
            StencilOrder::Four => &[1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0],
            StencilOrder::Eight => &[
                1.0 / 280.0,
                -4.0 / 105.0,
                1.0 / 5.0,
                -4.0 / 5.0,
                0.0,
                4.0 / 5.0,
                -1.0 / 5.0,
                4.0 / 105.0,
                -1.0 / 280.0,
            ],
        }
    }

    fn second(self) -> &'static [f64] {
        match self {
            StencilOrder::Four => &[-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0],
            StencilOrder::Eight => &[
                -1.0 / 560.0,
                8.0 / 315.0,
                -1.0 / 5.0,
                8.0 / 5.0,
                -205.0 / 72.0,
                8.0 / 5.0,
                -1.0 / 5.0,
                8.0 / 315.0,
                -1.0 / 560.0,
            ],
        }
    }

    /// Stencil half-width in steps.
    pub fn half_width(self) -> usize {
        match self {
            StencilOrder::Four => 2,
            StencilOrder::Eight => 4,
        }
    }
}

/// Central-difference oracle with step `h` (length in `r`, radians in `θ`, `φ`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FdOracle {
    pub order: StencilOrder,
    pub h: f64,
}

/// Field samples along the three coordinate lines through a point.
struct AxisSamples {
    r: Vec<[f64; 3]>,
    theta: Vec<[f64; 3]>,
    phi: Vec<[f64; 3]>,
    r_nodes: Vec<f64>,
    sin_nodes: Vec<f64>,
    dr: f64,
    dtheta: f64,
    dphi: f64,
}

impl FdOracle {
    pub const fn new(order: StencilOrder, h: f64) -> Self {
        Self { order, h }
    }

    fn steps(&self, p: Spherical) -> (f64, f64, f64) {
        let span = (self.order.half_width() + 1) as f64;
        let dr = self.h.min(p.r / span);
        let dtheta = self.h.min(p.theta / span).min((PI - p.theta) / span);
        (dr, dtheta, self.h)
    }

    /// Whether stencils nested `depth` deep around `p` stay clear of `r = 0`
    /// and the polar axis without shrinking the step.
    pub fn has_support(&self, p: Spherical, depth: usize) -> bool {
        let reach = (depth * self.order.half_width()) as f64 * self.h;
        p.r - reach > 0.0 && p.theta - reach > 0.0 && p.theta + reach < PI
    }

    fn offsets(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = self.order.first();
        let hw = self.order.half_width() as isize;
        c.iter()
            .enumerate()
            .filter(|(_, &w)| w != 0.0)
            .map(move |(i, &w)| ((i as isize - hw) as f64, w))
    }

    fn sample_axes<V: VectorFn + ?Sized>(&self, v: &V, p: Spherical) -> AxisSamples {
        let (dr, dtheta, dphi) = self.steps(p);
        let mut s = AxisSamples {
            r: Vec::new(),
            theta: Vec::new(),
            phi: Vec::new(),
            r_nodes: Vec::new(),
            sin_nodes: Vec::new(),
            dr,
            dtheta,
            dphi,
        };
        for (o, _) in self.offsets() {
            let r = p.r + o * dr;
            let t = p.theta + o * dtheta;
            s.r.push(v.eval(Spherical::new(r, p.theta, p.phi)));
            s.r_nodes.push(r);
            s.theta.push(v.eval(Spherical::new(p.r, t, p.phi)));
            s.sin_nodes.push(t.sin());
            s.phi.push(v.eval(Spherical::new(p.r, p.theta, p.phi + o * dphi)));
        }
        s
    }

    fn weights(&self) -> Vec<f64> {
        self.offsets().map(|(_, w)| w).collect()
    }

    fn combine(w: &[f64], step: f64, f: impl Fn(usize) -> f64) -> f64 {
        w.iter().enumerate().map(|(i, wi)| wi * f(i)).sum::<f64>() / step
    }

    pub fn derivative(&self, f: impl Fn(f64) -> f64, x: f64, step: f64) -> f64 {
        self.offsets().map(|(o, w)| w * f(x + o * step)).sum::<f64>() / step
    }

    pub fn second_derivative(&self, f: impl Fn(f64) -> f64, x: f64, step: f64) -> f64 {
        let c = self.order.second();
        let hw = self.order.half_width() as isize;
        c.iter()
            .enumerate()
            .map(|(i, w)| w * f(x + (i as isize - hw) as f64 * step))
            .sum::<f64>()
            / (step * step)
    }

    /// `∂_r f` alone.
    pub fn radial_derivative<S: ScalarFn + ?Sized>(&self, f: &S, p: Spherical) -> f64 {
        let (dr, _, _) = self.steps(p);
        self.derivative(|x| f.eval(Spherical::new(x, p.theta, p.phi)), p.r, dr)
    }

    pub fn gradient<S: ScalarFn + ?Sized>(&self, f: &S, p: Spherical) -> [f64; 3] {
        let (dr, dtheta, dphi) = self.steps(p);
        let Spherical { r, theta, phi } = p;
        let g_r = self.derivative(|x| f.eval(Spherical::new(x, theta, phi)), r, dr);
        let g_t = self.derivative(|x| f.eval(Spherical::new(r, x, phi)), theta, dtheta);
        let g_p = self.derivative(|x| f.eval(Spherical::new(r, theta, x)), phi, dphi);
        [g_r, g_t / r, g_p / (r * theta.sin())]
    }

    pub fn divergence<V: VectorFn + ?Sized>(&self, v: &V, p: Spherical) -> f64 {
        let s = self.sample_axes(v, p);
        let w = self.weights();
        let st = p.theta.sin();
        let d_r = Self::combine(&w, s.dr, |i| s.r_nodes[i].powi(2) * s.r[i][0]);
        let d_t = Self::combine(&w, s.dtheta, |i| s.sin_nodes[i] * s.theta[i][1]);
        let d_p = Self::combine(&w, s.dphi, |i| s.phi[i][2]);
        d_r / (p.r * p.r) + (d_t + d_p) / (p.r * st)
    }

    pub fn curl<V: VectorFn + ?Sized>(&self, v: &V, p: Spherical) -> [f64; 3] {
        let s = self.sample_axes(v, p);
        let w = self.weights();
        let st = p.theta.sin();
        let t_sin_vp = Self::combine(&w, s.dtheta, |i| s.sin_nodes[i] * s.theta[i][2]);
        let t_vr = Self::combine(&w, s.dtheta, |i| s.theta[i][0]);
        let p_vt = Self::combine(&w, s.dphi, |i| s.phi[i][1]);
        let p_vr = Self::combine(&w, s.dphi, |i| s.phi[i][0]);
        let r_rvp = Self::combine(&w, s.dr, |i| s.r_nodes[i] * s.r[i][2]);
        let r_rvt = Self::combine(&w, s.dr, |i| s.r_nodes[i] * s.r[i][1]);
        [
            (t_sin_vp - p_vt) / (p.r * st),
            (p_vr / st - r_rvp) / p.r,
            (r_rvt - t_vr) / p.r,
        ]
    }

    pub fn laplacian<S: ScalarFn + ?Sized>(&self, f: &S, p: Spherical) -> f64 {
        let (dr, dtheta, dphi) = self.steps(p);
        let Spherical { r, theta, phi } = p;
        let along_r = |x: f64| f.eval(Spherical::new(x, theta, phi));
        let along_t = |x: f64| f.eval(Spherical::new(r, x, phi));
        let along_p = |x: f64| f.eval(Spherical::new(r, theta, x));
        let st = theta.sin();
        self.second_derivative(along_r, r, dr)
            + 2.0 / r * self.derivative(along_r, r, dr)
            + (self.second_derivative(along_t, theta, dtheta)
                + theta.cos() / st * self.derivative(along_t, theta, dtheta))
                / (r * r)
            + self.second_derivative(along_p, phi, dphi) / (r * r * st * st)
    }

    /// Componentwise Laplacian of the Cartesian components.
    pub fn vector_laplacian<V: VectorFn + ?Sized>(&self, v: &V, p: Spherical) -> [f64; 3] {
        let mut cart = [0.0; 3];
        for (c, slot) in cart.iter_mut().enumerate() {
            let comp = |q: Spherical| to_cartesian_components(q.theta, q.phi, v.eval(q))[c];
            *slot = self.laplacian(&comp, p);
        }
        to_spherical_components(p.theta, p.phi, cart)
    }

    /// `∇div v` as a gradient of a finite-difference divergence.
    pub fn grad_div<V: VectorFn + ?Sized>(&self, v: &V, p: Spherical) -> [f64; 3] {
        let div = |q: Spherical| self.divergence(v, q);
        self.gradient(&div, p)
    }

    pub fn curl_curl<V: VectorFn + ?Sized>(&self, v: &V, p: Spherical) -> [f64; 3] {
        let c = |q: Spherical| self.curl(v, q);
        self.curl(&c, p)
    }
}

/// Uniform interior probe points with volume weights `r² sin θ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeLattice {
    pub radius: f64,
    pub points: Vec<Spherical>,
    pub weights: Vec<f64>,
}

impl ProbeLattice {
    /// Cell-centred lattice on `[r_lo, r_hi]·R × [θ_margin, π − θ_margin] × [0, 2π)`.
    pub fn uniform(
        radius: f64,
        counts: (usize, usize, usize),
        r_range: (f64, f64),
        theta_margin: f64,
    ) -> Self {
        let (nr, nt, np) = counts;
        let mut points = Vec::with_capacity(nr * nt * np);
        let mut weights = Vec::with_capacity(nr * nt * np);
        let (lo, hi) = (r_range.0 * radius, r_range.1 * radius);
        for l in 0..np {
            let phi = 2.0 * PI * (l as f64 + 0.25) / np as f64;
            for j in 0..nt {
                let theta = theta_margin + (j as f64 + 0.5) * (PI - 2.0 * theta_margin) / nt as f64;
                for i in 0..nr {
                    let r = lo + (i as f64 + 0.5) * (hi - lo) / nr as f64;
                    points.push(Spherical::new(r, theta, phi));
                    weights.push(r * r * theta.sin());
                }
            }
        }
        Self {
            radius,
            points,
            weights,
        }
    }

    /// About 300 probes covering `r ∈ [0.1R, R]`, `θ ∈ [0.2, π − 0.2]`.
    pub fn standard(radius: f64) -> Self {
        Self::uniform(radius, (6, 6, 8), (0.1, 1.0), 0.2)
    }

    /// A reduced set for expensive (interpolated or deeply nested) operators.
    pub fn coarse(radius: f64) -> Self {
        Self::uniform(radius, (3, 4, 4), (0.2, 0.9), 0.35)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Fails when stencils nested `depth` deep would have to shrink near a
    /// coordinate singularity.
    pub fn check_support(&self, oracle: &FdOracle, depth: usize) -> Result<()> {
        match self.points.iter().find(|p| !oracle.has_support(**p, depth)) {
            Some(p) => Err(Error::Resolution(format!(
                "stencil of depth {depth} with h = {} reaches a coordinate singularity at {p:?}",
                oracle.h
            ))),
            None => Ok(()),
        }
    }

    /// `√(Σ w |f|²)`, evaluated in parallel and summed in lattice order.
    pub fn norm(&self, f: impl Fn(Spherical) -> [f64; 3] + Sync) -> f64 {
        let vals: Vec<f64> = self
            .points
            .par_iter()
            .map(|&p| {
                let v = f(p);
                v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
            })
            .collect();
        vals.iter().zip(&self.weights).map(|(v, w)| v * w).sum::<f64>().sqrt()
    }

    pub fn scalar_norm(&self, f: impl Fn(Spherical) -> f64 + Sync) -> f64 {
        self.norm(|p| [f(p), 0.0, 0.0])
    }

    /// Maximum of `|f|` over the probes.
    pub fn max_abs(&self, f: impl Fn(Spherical) -> [f64; 3] + Sync) -> f64 {
        let vals: Vec<f64> = self
            .points
            .par_iter()
            .map(|&p| {
                let v = f(p);
                (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
            })
            .collect();
        vals.into_iter().fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z_coord(p: Spherical) -> f64 {
        p.r * p.theta.cos()
    }

    #[test]
    fn gradient_of_z_is_unit_vertical() {
        let fd = FdOracle::new(StencilOrder::Four, 1e-3);
        let lattice = ProbeLattice::standard(1.0);
        for &p in &lattice.points {
            let g = fd.gradient(&z_coord, p);
            let ez = to_spherical_components(p.theta, p.phi, [0.0, 0.0, 1.0]);
            for c in 0..3 {
                assert!((g[c] - ez[c]).abs() < 1e-8, "{p:?}");
            }
        }
    }

    #[test]
    fn curl_of_gradient_vanishes() {
        let fd = FdOracle::new(StencilOrder::Four, 2e-3);
        let h = |p: Spherical| {
            let [x, y, z] = p.to_cartesian();
            (x * y).sin() + z.exp() * x
        };
        let grad = |p: Spherical| fd.gradient(&h, p);
        let lattice = ProbeLattice::standard(1.0);
        assert!(lattice.max_abs(|p| fd.curl(&grad, p)) < 1e-6);
    }

    #[test]
    fn divergence_of_curl_vanishes() {
        let fd = FdOracle::new(StencilOrder::Four, 2e-3);
        let v = |p: Spherical| {
            let [x, y, z] = p.to_cartesian();
            to_spherical_components(p.theta, p.phi, [y * z * z, (x + z).cos(), x * x * y])
        };
        let c = |p: Spherical| fd.curl(&v, p);
        let lattice = ProbeLattice::standard(1.0);
        assert!(lattice.scalar_norm(|p| fd.divergence(&c, p)) < 1e-5);
    }

    #[test]
    fn operators_on_polynomials() {
        // v = (x², xy, z³): div = 3x + 3z², curl = (0, 0, y)
        let fd = FdOracle::new(StencilOrder::Eight, 1e-2);
        let v = |p: Spherical| {
            let [x, y, z] = p.to_cartesian();
            to_spherical_components(p.theta, p.phi, [x * x, x * y, z * z * z])
        };
        for &p in &ProbeLattice::coarse(1.0).points {
            let [x, y, z] = p.to_cartesian();
            assert!((fd.divergence(&v, p) - (3.0 * x + 3.0 * z * z)).abs() < 1e-9);
            let c = fd.curl(&v, p);
            let expect = to_spherical_components(p.theta, p.phi, [0.0, 0.0, y]);
            for k in 0..3 {
                assert!((c[k] - expect[k]).abs() < 1e-9);
            }
            let lap = fd.laplacian(&|q: Spherical| q.to_cartesian()[0].powi(2) * q.to_cartesian()[2], p);
            assert!((lap - 2.0 * z).abs() < 1e-7);
        }
    }

    #[test]
    fn vector_identity_on_polynomial_field() {
        // −Δv = rot rot v − ∇div v
        let fd = FdOracle::new(StencilOrder::Four, 5e-3);
        let v = |p: Spherical| {
            let [x, y, z] = p.to_cartesian();
            to_spherical_components(
                p.theta,
                p.phi,
                [x * y * z + z * z, x * x * x - y, y * y * z + x * z * z],
            )
        };
        let lattice = ProbeLattice::coarse(1.0);
        let residual = lattice.norm(|p| {
            let lap = fd.vector_laplacian(&v, p);
            let cc = fd.curl_curl(&v, p);
            let gd = fd.grad_div(&v, p);
            [lap[0] + cc[0] - gd[0], lap[1] + cc[1] - gd[1], lap[2] + cc[2] - gd[2]]
        });
        let scale = lattice.norm(|p| fd.vector_laplacian(&v, p));
        assert!(residual / scale <= 1e-5, "{}", residual / scale);
    }

    #[test]
    fn support_checks() {
        let lattice = ProbeLattice::standard(1.0);
        assert!(lattice.check_support(&FdOracle::new(StencilOrder::Four, 0.003), 2).is_ok());
        assert!(lattice.check_support(&FdOracle::new(StencilOrder::Eight, 0.05), 2).is_err());
    }
}
