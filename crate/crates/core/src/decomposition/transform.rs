//! Separable angular transforms on a `BallGrid`.
//!
//! For each radial shell the three angular projections
//! `A_r = ∫ f_r Y`, `A_t = ∫ (f_θ ∂_θY + f_φ sin⁻¹θ ∂_φY)`,
//! `A_c = ∫ (f_θ sin⁻¹θ ∂_φY − f_φ ∂_θY)` are computed with an azimuthal
//! Fourier pass followed by Legendre sums; synthesis runs the same steps in
//! reverse.

use std::f64::consts::SQRT_2;

use rayon::prelude::*;

use crate::fieldgrid::{BallGrid, VectorField};
use crate::specialfn::harmonics::azimuthal_derivative_factor;
use crate::specialfn::{harmonic_index, NormalizedLegendre};

/// Per-shell angular data, each vector indexed by `harmonic_index`.
#[derive(Clone, Debug, Default)]
pub struct ShellSpectrum {
    pub radial: Vec<f64>,
    pub tangential: Vec<f64>,
    pub circulation: Vec<f64>,
}

impl ShellSpectrum {
    pub fn zeros(degree: usize) -> Self {
        let nh = (degree + 1) * (degree + 1);
        Self {
            radial: vec![0.0; nh],
            tangential: vec![0.0; nh],
            circulation: vec![0.0; nh],
        }
    }
}

pub(crate) struct AngularTables {
    pub degree: usize,
    legendre: Vec<NormalizedLegendre>,
    /// `trig[l][m] = (sin mφ_l, cos mφ_l)`
    trig: Vec<Vec<(f64, f64)>>,
}

impl AngularTables {
    pub fn new(grid: &BallGrid, degree: usize) -> Self {
        Self {
            degree,
            legendre: grid.theta.iter().map(|&t| NormalizedLegendre::new(degree, t)).collect(),
            trig: grid
                .phi
                .iter()
                .map(|&p| (0..=degree).map(|m| (m as f64 * p).sin_cos()).collect())
                .collect(),
        }
    }
}

#[inline]
fn pick(cos: &[f64], sin: &[f64], k: i64) -> f64 {
    match k.signum() {
        0 => cos[0],
        1 => SQRT_2 * cos[k as usize],
        _ => SQRT_2 * sin[(-k) as usize],
    }
}

/// Angular projections of every shell of `field` up to `degree`.
pub(crate) fn analyze_shells(field: &VectorField, tables: &AngularTables) -> Vec<ShellSpectrum> {
    let grid = &field.grid;
    let degree = tables.degree;
    let dphi = grid.dphi();
    (0..grid.nr)
        .into_par_iter()
        .map(|i| {
            let mut out = ShellSpectrum::zeros(degree);
            let mut cos = [vec![0.0; degree + 1], vec![0.0; degree + 1], vec![0.0; degree + 1]];
            let mut sin = cos.clone();
            for j in 0..grid.ntheta {
                for x in 0..3 {
                    cos[x].iter_mut().for_each(|v| *v = 0.0);
                    sin[x].iter_mut().for_each(|v| *v = 0.0);
                }
                for l in 0..grid.nphi {
                    let idx = grid.index(i, j, l);
                    let f = field.at(idx);
                    for (m, &(s, c)) in tables.trig[l].iter().enumerate() {
                        for x in 0..3 {
                            cos[x][m] += f[x] * c;
                            sin[x][m] += f[x] * s;
                        }
                    }
                }
                let w = grid.wtheta[j] * dphi;
                let leg = &tables.legendre[j];
                for n in 0..=degree {
                    for k in -(n as i64)..=n as i64 {
                        let m = k.unsigned_abs() as usize;
                        let h = harmonic_index(n, k);
                        let (p, d) = (leg.p(n, m), leg.dp(n, m));
                        out.radial[h] += w * p * pick(&cos[0], &sin[0], k);
                        let mut t = d * pick(&cos[1], &sin[1], k);
                        let mut c = -d * pick(&cos[2], &sin[2], k);
                        if k != 0 {
                            let q = leg.p_over_sin(n, m) * azimuthal_derivative_factor(k);
                            t += q * pick(&cos[2], &sin[2], -k);
                            c += q * pick(&cos[1], &sin[1], -k);
                        }
                        out.tangential[h] += w * t;
                        out.circulation[h] += w * c;
                    }
                }
            }
            out
        })
        .collect()
}

/// Inverse of [`analyze_shells`] for a field of the form
/// `v = Σ S_r Y ê_r + S_t (∂_θY ê_θ + sin⁻¹θ ∂_φY ê_φ) + S_c (sin⁻¹θ ∂_φY ê_θ − ∂_θY ê_φ)`.
pub(crate) fn synthesize_shells(
    grid: &BallGrid,
    tables: &AngularTables,
    shells: &[ShellSpectrum],
) -> VectorField {
    let degree = tables.degree;
    let per_shell: Vec<Vec<[f64; 3]>> = (0..grid.nr)
        .into_par_iter()
        .map(|i| {
            let s = &shells[i];
            let mut values = vec![[0.0; 3]; grid.ntheta * grid.nphi];
            let mut gc = [vec![0.0; degree + 1], vec![0.0; degree + 1], vec![0.0; degree + 1]];
            let mut gs = gc.clone();
            for j in 0..grid.ntheta {
                for x in 0..3 {
                    gc[x].iter_mut().for_each(|v| *v = 0.0);
                    gs[x].iter_mut().for_each(|v| *v = 0.0);
                }
                let leg = &tables.legendre[j];
                for n in 0..=degree {
                    for k in -(n as i64)..=n as i64 {
                        let m = k.unsigned_abs() as usize;
                        let h = harmonic_index(n, k);
                        let (sr, st, sc) = (s.radial[h], s.tangential[h], s.circulation[h]);
                        if sr == 0.0 && st == 0.0 && sc == 0.0 {
                            continue;
                        }
                        let (p, d) = (leg.p(n, m), leg.dp(n, m));
                        let mut add = |x: usize, key: i64, val: f64| match key.signum() {
                            0 => gc[x][0] += val,
                            1 => gc[x][key as usize] += SQRT_2 * val,
                            _ => gs[x][(-key) as usize] += SQRT_2 * val,
                        };
                        add(0, k, sr * p);
                        add(1, k, st * d);
                        add(2, k, -sc * d);
                        if k != 0 {
                            let q = leg.p_over_sin(n, m) * azimuthal_derivative_factor(k);
                            add(1, -k, sc * q);
                            add(2, -k, st * q);
                        }
                    }
                }
                for l in 0..grid.nphi {
                    let v = &mut values[j + grid.ntheta * l];
                    for (m, &(sn, cs)) in tables.trig[l].iter().enumerate() {
                        for x in 0..3 {
                            v[x] += gc[x][m] * cs + gs[x][m] * sn;
                        }
                    }
                }
            }
            values
        })
        .collect();
    let mut out = VectorField::zeros(grid);
    for (i, shell) in per_shell.iter().enumerate() {
        for j in 0..grid.ntheta {
            for l in 0..grid.nphi {
                let v = shell[j + grid.ntheta * l];
                let idx = grid.index(i, j, l);
                out.vr[idx] = v[0];
                out.vt[idx] = v[1];
                out.vp[idx] = v[2];
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigenbasis::Angular;

    #[test]
    fn analysis_matches_direct_quadrature() {
        let grid = BallGrid::new(1.0, 2, 10, 20).unwrap();
        let f = VectorField::from_fn(&grid, |p| {
            [
                (p.theta * 2.0).cos() * p.phi.sin() + p.r,
                p.theta.sin() * (3.0 * p.phi).cos(),
                (p.phi).cos() * p.theta.cos().powi(2),
            ]
        });
        let degree = 4;
        let tables = AngularTables::new(&grid, degree);
        let shells = analyze_shells(&f, &tables);
        for n in 0..=degree {
            for k in -(n as i64)..=n as i64 {
                let h = harmonic_index(n, k);
                let (mut ar, mut at, mut ac) = (0.0, 0.0, 0.0);
                for j in 0..grid.ntheta {
                    for l in 0..grid.nphi {
                        let idx = grid.index(1, j, l);
                        let a = Angular::at(n, k, grid.theta[j], grid.phi[l]);
                        let w = grid.wtheta[j] * grid.dphi();
                        let v = f.at(idx);
                        ar += w * v[0] * a.y;
                        at += w * (v[1] * a.h_theta + v[2] * a.h_phi);
                        ac += w * (v[1] * a.h_phi - v[2] * a.h_theta);
                    }
                }
                assert!((shells[1].radial[h] - ar).abs() < 1e-13);
                assert!((shells[1].tangential[h] - at).abs() < 1e-13);
                assert!((shells[1].circulation[h] - ac).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn synthesis_matches_direct_sum() {
        let grid = BallGrid::new(1.0, 1, 6, 12).unwrap();
        let degree = 3;
        let tables = AngularTables::new(&grid, degree);
        let mut s = ShellSpectrum::zeros(degree);
        for h in 0..s.radial.len() {
            s.radial[h] = (h as f64 * 0.37).sin();
            s.tangential[h] = (h as f64 * 0.11).cos();
            s.circulation[h] = 0.2 * h as f64 - 1.0;
        }
        let v = synthesize_shells(&grid, &tables, std::slice::from_ref(&s));
        for idx in 0..grid.len() {
            let p = grid.node(idx);
            let mut expect = [0.0; 3];
            for n in 0..=degree {
                for k in -(n as i64)..=n as i64 {
                    let h = harmonic_index(n, k);
                    let a = Angular::at(n, k, p.theta, p.phi);
                    expect[0] += s.radial[h] * a.y;
                    expect[1] += s.tangential[h] * a.h_theta + s.circulation[h] * a.h_phi;
                    expect[2] += s.tangential[h] * a.h_phi - s.circulation[h] * a.h_theta;
                }
            }
            let got = v.at(idx);
            for x in 0..3 {
                assert!((got[x] - expect[x]).abs() < 1e-12, "{idx} {x}");
            }
        }
    }
}
