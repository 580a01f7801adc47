use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{BallGrid, GridSpec};
use crate::error::{Error, Result};
use crate::geometry::Spherical;

/// Spherical components `(v_r, v_θ, v_φ)` at every grid node.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub grid: BallGrid,
    pub vr: Vec<f64>,
    pub vt: Vec<f64>,
    pub vp: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    pub grid: BallGrid,
    pub values: Vec<f64>,
}

/// Deterministic weighted sum `Σ w_idx term(idx)`: parallel over φ-slices,
/// sequential inside each slice and across slices.
pub(crate) fn weighted_sum(grid: &BallGrid, term: impl Fn(usize) -> f64 + Sync) -> f64 {
    let slice = grid.nr * grid.ntheta;
    let parts: Vec<f64> = (0..grid.nphi)
        .into_par_iter()
        .map(|l| {
            let mut s = 0.0;
            for local in 0..slice {
                let idx = l * slice + local;
                s += grid.weight(idx) * term(idx);
            }
            s
        })
        .collect();
    parts.iter().sum()
}

impl VectorField {
    pub fn zeros(grid: &BallGrid) -> Self {
        let n = grid.len();
        Self {
            grid: grid.clone(),
            vr: vec![0.0; n],
            vt: vec![0.0; n],
            vp: vec![0.0; n],
        }
    }

    pub fn from_fn(grid: &BallGrid, f: impl Fn(Spherical) -> [f64; 3] + Sync) -> Self {
        let values: Vec<[f64; 3]> = (0..grid.len()).into_par_iter().map(|i| f(grid.node(i))).collect();
        let mut out = Self::zeros(grid);
        for (i, v) in values.into_iter().enumerate() {
            out.vr[i] = v[0];
            out.vt[i] = v[1];
            out.vp[i] = v[2];
        }
        out
    }

    pub fn from_components(grid: &BallGrid, vr: Vec<f64>, vt: Vec<f64>, vp: Vec<f64>) -> Result<Self> {
        let n = grid.len();
        if vr.len() != n || vt.len() != n || vp.len() != n {
            return Err(Error::Format(format!(
                "component lengths ({}, {}, {}) do not match {n} grid nodes",
                vr.len(),
                vt.len(),
                vp.len()
            )));
        }
        Ok(Self {
            grid: grid.clone(),
            vr,
            vt,
            vp,
        })
    }

    #[inline]
    pub fn at(&self, idx: usize) -> [f64; 3] {
        [self.vr[idx], self.vt[idx], self.vp[idx]]
    }

    fn check_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    pub fn inner_product(&self, other: &Self) -> Result<f64> {
        self.check_grid(other)?;
        Ok(weighted_sum(&self.grid, |i| {
            self.vr[i] * other.vr[i] + self.vt[i] * other.vt[i] + self.vp[i] * other.vp[i]
        }))
    }

    pub fn norm_squared(&self) -> f64 {
        weighted_sum(&self.grid, |i| {
            self.vr[i] * self.vr[i] + self.vt[i] * self.vt[i] + self.vp[i] * self.vp[i]
        })
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Result<Self> {
        self.check_grid(other)?;
        let zip = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x + s * y).collect();
        Ok(Self {
            grid: self.grid.clone(),
            vr: zip(&self.vr, &other.vr),
            vt: zip(&self.vt, &other.vt),
            vp: zip(&self.vp, &other.vp),
        })
    }

    pub fn scaled(&self, s: f64) -> Self {
        let sc = |a: &[f64]| a.iter().map(|x| s * x).collect();
        Self {
            grid: self.grid.clone(),
            vr: sc(&self.vr),
            vt: sc(&self.vt),
            vp: sc(&self.vp),
        }
    }

    /// `‖self − other‖ / ‖other‖`.
    pub fn relative_error(&self, reference: &Self) -> Result<f64> {
        let diff = self.axpy(-1.0, reference)?;
        Ok(diff.norm() / reference.norm())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&VectorFieldJson {
            grid: self.grid.spec(),
            components: Components {
                v_r: self.vr.clone(),
                v_theta: self.vt.clone(),
                v_phi: self.vp.clone(),
            },
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: VectorFieldJson = serde_json::from_str(text)?;
        let grid = BallGrid::from_spec(raw.grid).map_err(|e| Error::Format(e.to_string()))?;
        let c = raw.components;
        if [&c.v_r, &c.v_theta, &c.v_phi].iter().any(|v| v.iter().any(|x| !x.is_finite())) {
            return Err(Error::Format("non-finite field value".into()));
        }
        Self::from_components(&grid, c.v_r, c.v_theta, c.v_phi)
    }
}

impl ScalarField {
    pub fn from_fn(grid: &BallGrid, f: impl Fn(Spherical) -> f64 + Sync) -> Self {
        Self {
            grid: grid.clone(),
            values: (0..grid.len()).into_par_iter().map(|i| f(grid.node(i))).collect(),
        }
    }

    pub fn inner_product(&self, other: &Self) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(weighted_sum(&self.grid, |i| self.values[i] * other.values[i]))
    }

    pub fn norm(&self) -> f64 {
        weighted_sum(&self.grid, |i| self.values[i] * self.values[i]).sqrt()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&ScalarFieldJson {
            grid: self.grid.spec(),
            values: self.values.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ScalarFieldJson = serde_json::from_str(text)?;
        let grid = BallGrid::from_spec(raw.grid).map_err(|e| Error::Format(e.to_string()))?;
        if raw.values.len() != grid.len() {
            return Err(Error::Format("value count does not match grid".into()));
        }
        Ok(Self {
            grid,
            values: raw.values,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct Components {
    v_r: Vec<f64>,
    #[serde(rename = "v_θ")]
    v_theta: Vec<f64>,
    #[serde(rename = "v_φ")]
    v_phi: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct VectorFieldJson {
    grid: GridSpec,
    components: Components,
}

#[derive(Serialize, Deserialize)]
struct ScalarFieldJson {
    grid: GridSpec,
    values: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_field_volume() {
        let g = BallGrid::new(1.7, 10, 8, 12).unwrap();
        let f = VectorField::from_fn(&g, |_| [1.0, 0.0, 0.0]);
        let vol = 4.0 / 3.0 * PI * 1.7f64.powi(3);
        assert!((f.inner_product(&f).unwrap() - vol).abs() <= 1e-12 * vol);
    }

    #[test]
    fn polynomial_inner_product() {
        // ∫ z² dV over the unit ball = 4π/15
        let g = BallGrid::new(1.0, 6, 6, 8).unwrap();
        let z = ScalarField::from_fn(&g, |p| p.r * p.theta.cos());
        assert!((z.inner_product(&z).unwrap() - 4.0 * PI / 15.0).abs() < 1e-14);
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let a = VectorField::zeros(&BallGrid::new(1.0, 4, 4, 4).unwrap());
        let b = VectorField::zeros(&BallGrid::new(1.0, 5, 4, 4).unwrap());
        assert!(matches!(a.inner_product(&b), Err(Error::GridMismatch)));
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let g = BallGrid::new(1.0, 3, 2, 4).unwrap();
        let f = VectorField::from_fn(&g, |p| [p.r.sin() / 3.0, p.theta.exp(), -p.phi / 7.0]);
        let text = f.to_json().unwrap();
        assert!(text.contains("\"v_θ\""));
        let back = VectorField::from_json(&text).unwrap();
        assert_eq!(back, f);
        assert!(VectorField::from_json("{\"grid\":1}").is_err());
        let short = text.replacen("\"v_r\":[", "\"v_r\":[1.0,", 1);
        assert!(matches!(VectorField::from_json(&short), Err(Error::Format(_))));
    }
}
