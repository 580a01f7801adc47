//! Continuous interpolants of sampled fields, so the finite-difference oracle
//! can act on data that has no analytic form.
//!
//! On every radial shell the Cartesian components are expanded in spherical
//! harmonics up to the degree the angular rule resolves; the shells are then
//! joined by polynomial interpolation through the radial Gauss nodes.

use rayon::prelude::*;

use super::fd::{ScalarFn, VectorFn};
use super::field::{ScalarField, VectorField};
use super::grid::BallGrid;
use crate::geometry::{to_cartesian_components, to_spherical_components, Spherical};
use crate::specialfn::{harmonic_index, HarmonicSet, NormalizedLegendre};

#[derive(Clone, Debug)]
struct ShellExpansion {
    degree: usize,
    ncomp: usize,
    nr: usize,
    r_nodes: Vec<f64>,
    bary: Vec<f64>,
    /// `coeffs[(i * ncomp + c) * (L+1)² + harmonic_index(n, k)]`
    coeffs: Vec<f64>,
}

impl ShellExpansion {
    fn new(grid: &BallGrid, ncomp: usize, value: impl Fn(usize, usize) -> f64 + Sync) -> Self {
        let degree = grid.max_degree();
        let nh = (degree + 1) * (degree + 1);
        let legendre: Vec<NormalizedLegendre> =
            grid.theta.iter().map(|&t| NormalizedLegendre::new(degree, t)).collect();
        let dphi = grid.dphi();
        let trig: Vec<Vec<(f64, f64)>> = grid
            .phi
            .iter()
            .map(|&p| (0..=degree).map(|m| (m as f64 * p).sin_cos()).collect())
            .collect();
        let shells: Vec<Vec<f64>> = (0..grid.nr)
            .into_par_iter()
            .map(|i| {
                let mut out = vec![0.0; ncomp * nh];
                for c in 0..ncomp {
                    let block = &mut out[c * nh..(c + 1) * nh];
                    for j in 0..grid.ntheta {
                        // azimuthal projections of this ring
                        let mut cos_part = vec![0.0; degree + 1];
                        let mut sin_part = vec![0.0; degree + 1];
                        for l in 0..grid.nphi {
                            let f = value(grid.index(i, j, l), c);
                            for m in 0..=degree {
                                let (s, co) = trig[l][m];
                                cos_part[m] += f * co;
                                sin_part[m] += f * s;
                            }
                        }
                        let w = grid.wtheta[j] * dphi;
                        let leg = &legendre[j];
                        for n in 0..=degree {
                            block[harmonic_index(n, 0)] += w * leg.p(n, 0) * cos_part[0];
                            for m in 1..=n {
                                let p = w * leg.p(n, m) * std::f64::consts::SQRT_2;
                                block[harmonic_index(n, m as i64)] += p * cos_part[m];
                                block[harmonic_index(n, -(m as i64))] += p * sin_part[m];
                            }
                        }
                    }
                }
                out
            })
            .collect();

        let scaled: Vec<f64> = grid.r.iter().map(|r| 2.0 * r / grid.radius - 1.0).collect();
        let bary = scaled
            .iter()
            .enumerate()
            .map(|(i, xi)| {
                let prod: f64 = scaled
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != i)
                    .map(|(_, xk)| xi - xk)
                    .product();
                1.0 / prod
            })
            .collect();
        Self {
            degree,
            ncomp,
            nr: grid.nr,
            r_nodes: grid.r.clone(),
            bary,
            coeffs: shells.concat(),
        }
    }

    fn eval(&self, p: Spherical, out: &mut [f64]) {
        let set = HarmonicSet::new(self.degree, p.theta, p.phi);
        let nh = set.y.len();
        let mut exact = None;
        let mut terms = Vec::with_capacity(self.nr);
        let mut denom = 0.0;
        for (i, &ri) in self.r_nodes.iter().enumerate() {
            let d = p.r - ri;
            if d == 0.0 {
                exact = Some(i);
                break;
            }
            // weights were built on the scaled variable; the common factor cancels
            let t = self.bary[i] / d;
            terms.push(t);
            denom += t;
        }
        for (c, slot) in out.iter_mut().enumerate().take(self.ncomp) {
            let shell = |i: usize| -> f64 {
                let base = (i * self.ncomp + c) * nh;
                self.coeffs[base..base + nh].iter().zip(&set.y).map(|(a, y)| a * y).sum()
            };
            *slot = match exact {
                Some(i) => shell(i),
                None => terms.iter().enumerate().map(|(i, t)| t * shell(i)).sum::<f64>() / denom,
            };
        }
    }
}

/// Interpolant of a sampled vector field, returning spherical components.
#[derive(Clone, Debug)]
pub struct VectorInterpolant(ShellExpansion);

impl VectorInterpolant {
    pub fn new(field: &VectorField) -> Self {
        let grid = &field.grid;
        let cart: Vec<[f64; 3]> = (0..grid.len())
            .map(|idx| {
                let p = grid.node(idx);
                to_cartesian_components(p.theta, p.phi, field.at(idx))
            })
            .collect();
        Self(ShellExpansion::new(grid, 3, |idx, c| cart[idx][c]))
    }

    pub fn degree(&self) -> usize {
        self.0.degree
    }
}

impl VectorFn for VectorInterpolant {
    fn eval(&self, p: Spherical) -> [f64; 3] {
        let mut c = [0.0; 3];
        self.0.eval(p, &mut c);
        to_spherical_components(p.theta, p.phi, c)
    }
}

#[derive(Clone, Debug)]
pub struct ScalarInterpolant(ShellExpansion);

impl ScalarInterpolant {
    pub fn new(field: &ScalarField) -> Self {
        Self(ShellExpansion::new(&field.grid, 1, |idx, _| field.values[idx]))
    }
}

impl ScalarFn for ScalarInterpolant {
    fn eval(&self, p: Spherical) -> f64 {
        let mut v = [0.0];
        self.0.eval(p, &mut v);
        v[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_smooth_vector_field() {
        let grid = BallGrid::new(1.0, 16, 16, 32).unwrap();
        let f = |p: Spherical| {
            let [x, y, z] = p.to_cartesian();
            to_spherical_components(p.theta, p.phi, [(x + 2.0 * y).sin(), x * z * z, (0.5 * z).exp() * y])
        };
        let field = VectorField::from_fn(&grid, f);
        let interp = VectorInterpolant::new(&field);
        for &p in &[
            Spherical::new(0.33, 0.7, 1.9),
            Spherical::new(0.91, 2.2, 4.4),
            Spherical::new(1.0, 1.4, 0.3),
        ] {
            let a = interp.eval(p);
            let b = f(p);
            for c in 0..3 {
                assert!((a[c] - b[c]).abs() < 1e-9, "{p:?} {a:?} {b:?}");
            }
        }
        // grid nodes are reproduced
        let q = grid.node(777);
        let a = interp.eval(q);
        assert!((a[1] - field.vt[777]).abs() < 1e-12);
    }

    #[test]
    fn scalar_polynomial_is_exact() {
        let grid = BallGrid::new(2.0, 6, 6, 12).unwrap();
        let h = |p: Spherical| {
            let [x, y, z] = p.to_cartesian();
            x * x * y - 3.0 * z + 0.5
        };
        let interp = ScalarInterpolant::new(&ScalarField::from_fn(&grid, h));
        let p = Spherical::new(1.3, 0.4, 5.5);
        assert!((interp.eval(p) - h(p)).abs() < 1e-12);
    }
}
