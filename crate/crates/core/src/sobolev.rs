//! Sobolev-type diagnostics read off the expansion coefficients, checked
//! against boundary traces computed by the finite-difference oracle.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decomposition::SpectralCoeffs;
use crate::eigenbasis::Family;
use crate::error::{Error, Result};
use crate::fieldgrid::{BallGrid, FdOracle, ProbeLattice, StencilOrder, SurfaceGrid, VectorField, VectorFn};
use crate::geometry::Spherical;

/// `Σ ν^{2s} a²` (potential) or `Σ λ^{2s} (b⁺² + b⁻²)` (curl).
pub fn weighted_norm(c: &SpectralCoeffs, s: u32, family: Family) -> f64 {
    match family {
        Family::GradDiv => c.potential_terms().map(|(e, a)| e.eigenvalue.powi(s as i32) * a * a).sum(),
        Family::Curl => c
            .solenoidal_terms()
            .map(|(e, b)| e.eigenvalue.abs().powi(2 * s as i32) * b * b)
            .sum(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembershipOptions {
    /// Relative tolerance on boundary traces.
    pub trace_tol: f64,
    /// Largest admissible last-octave increment as a fraction of the sum.
    pub stop_fraction: f64,
    pub oracle: FdOracle,
    /// Finite-difference traces use surface nodes with `θ ∈ [margin, π − margin]`.
    pub theta_margin: f64,
    /// Polar and azimuthal node counts of the surface set for differentiated traces.
    pub surface_nodes: (usize, usize),
    /// Set when `f` is an interpolant of sampled data rather than an analytic handle.
    pub interpolated: bool,
}

impl Default for MembershipOptions {
    fn default() -> Self {
        Self {
            trace_tol: 1e-6,
            stop_fraction: 0.01,
            oracle: FdOracle::new(StencilOrder::Eight, 0.02),
            theta_margin: 0.3,
            surface_nodes: (8, 12),
            interpolated: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceResidual {
    pub family: Family,
    /// `n·(∇div)^j f` for the potential family, `n·rot^j f` for the curl family
    pub operator: String,
    pub power: u32,
    pub max_abs: f64,
    pub rms: f64,
    pub scale: f64,
    pub relative: f64,
    pub passed: bool,
    /// False when the trace came from nested stencils on interpolated data.
    pub reliable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoppingRule {
    pub description: String,
    pub cutoff: f64,
    pub half_cutoff: f64,
    pub sum_at_cutoff: f64,
    pub sum_at_half_cutoff: f64,
    pub increment_fraction: f64,
    pub threshold: f64,
    pub stable: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub potential: bool,
    pub solenoidal: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SobolevReport {
    pub s: u32,
    pub weighted_sum_potential: f64,
    pub weighted_sum_solenoidal: f64,
    pub trace_residuals: Vec<TraceResidual>,
    pub stopping_potential: StoppingRule,
    pub stopping_solenoidal: StoppingRule,
    pub verdict: Verdict,
    pub trace_tol: f64,
    /// Raised when some trace could not be computed reliably.
    pub resolution_insufficient: bool,
}

fn stopping_rule(c: &SpectralCoeffs, s: u32, family: Family, fraction: f64) -> StoppingRule {
    let half = 0.5 * c.cutoff();
    let full = weighted_norm(c, s, family);
    let lower = weighted_norm(&c.restrict(half), s, family);
    let increment = full - lower;
    let increment_fraction = if full > 0.0 { increment / full } else { 0.0 };
    // sums that are zero to rounding count as settled
    let negligible = full <= 1e-24 * c.energy().max(1e-300);
    StoppingRule {
        description: format!("W(N) − W(N/2) ≤ {fraction} · W(N)"),
        cutoff: c.cutoff(),
        half_cutoff: half,
        sum_at_cutoff: full,
        sum_at_half_cutoff: lower,
        increment_fraction,
        threshold: fraction,
        stable: negligible || increment <= fraction * full,
    }
}

type ScalarBox<'a> = Box<dyn Fn(Spherical) -> f64 + Sync + 'a>;
type VectorBox<'a> = Box<dyn Fn(Spherical) -> [f64; 3] + Sync + 'a>;

/// `n·(∇div)^j f = ∂_r Δ^{j−1} div f` for `j ≥ 1`, `f_r` for `j = 0`.
pub fn potential_trace_fn<'a>(oracle: &'a FdOracle, f: &'a dyn VectorFn, j: u32) -> ScalarBox<'a> {
    if j == 0 {
        return Box::new(move |p| f.eval(p)[0]);
    }
    let mut g: ScalarBox<'a> = Box::new(move |p| oracle.divergence(f, p));
    for _ in 1..j {
        let prev = g;
        g = Box::new(move |p| oracle.laplacian(&prev, p));
    }
    Box::new(move |p| oracle.radial_derivative(&g, p))
}

/// `rot^j f` by nested stencils.
pub fn curl_power_fn<'a>(oracle: &'a FdOracle, f: &'a dyn VectorFn, j: u32) -> VectorBox<'a> {
    let mut g: VectorBox<'a> = Box::new(move |p| f.eval(p));
    for _ in 0..j {
        let prev = g;
        g = Box::new(move |p| oracle.curl(&prev, p));
    }
    g
}

fn rms_over(points: &[Spherical], weights: &[f64], f: &(dyn Fn(Spherical) -> f64 + Sync)) -> (f64, f64) {
    let vals: Vec<f64> = points.par_iter().map(|&p| f(p)).collect();
    let wsum: f64 = weights.iter().sum();
    let ms: f64 = vals.iter().zip(weights).map(|(v, w)| w * v * v).sum::<f64>() / wsum;
    (ms.sqrt(), vals.iter().fold(0.0, |m, v| m.max(v.abs())))
}

/// Evaluates the trace conditions and coefficient sums for order `s`.
///
/// `f` is evaluated pointwise for traces; `coeffs` are its expansion
/// coefficients up to some cutoff `N`.
pub fn membership_test(
    f: &dyn VectorFn,
    coeffs: &SpectralCoeffs,
    s: u32,
    opts: &MembershipOptions,
) -> Result<SobolevReport> {
    let radius = coeffs.radius();
    let full_surface = SurfaceGrid::new(radius, 24, 32);
    let fd_surface = SurfaceGrid::new(radius, opts.surface_nodes.0, opts.surface_nodes.1)
        .interior_nodes(opts.theta_margin);
    if fd_surface.is_empty() {
        return Err(Error::Invalid("no surface nodes inside the polar margin".into()));
    }
    let lattice = ProbeLattice::uniform(radius, (3, 4, 6), (0.3, 0.9), opts.theta_margin);
    let interior_weights = &lattice.weights;
    let fd_weights: Vec<f64> = fd_surface.iter().map(|p| p.theta.sin()).collect();
    let field_rms = {
        let (rms, _) = rms_over(&lattice.points, interior_weights, &|p| {
            let v = f.eval(p);
            (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
        });
        rms
    };

    let mut traces = Vec::new();
    let mut unreliable = false;
    let mut push = |family: Family, operator: String, power: u32, order: u32, max_abs: f64, rms: f64, interior: f64, reliable: bool| {
        let scale = interior.max(field_rms / radius.powi(order as i32)).max(f64::MIN_POSITIVE);
        let relative = rms / scale;
        unreliable |= !reliable;
        traces.push(TraceResidual {
            family,
            operator,
            power,
            max_abs,
            rms,
            scale,
            relative,
            passed: relative <= opts.trace_tol,
            reliable,
        });
    };

    let sigma = s / 2;
    for j in 0..=sigma {
        let g = potential_trace_fn(&opts.oracle, f, j);
        let (rms, max_abs) = if j == 0 {
            let pts: Vec<Spherical> = full_surface.nodes().collect();
            let w: Vec<f64> = (0..full_surface.len()).map(|i| full_surface.weight(i)).collect();
            rms_over(&pts, &w, &*g)
        } else {
            rms_over(&fd_surface, &fd_weights, &*g)
        };
        let (interior, _) = rms_over(&lattice.points, interior_weights, &*g);
        let label = if j == 0 { "n·f".to_string() } else { format!("n·(∇div)^{j} f") };
        let reliable = !(opts.interpolated && j >= 1);
        push(Family::GradDiv, label, j, 2 * j, max_abs, rms, interior, reliable);
    }
    for j in 1..s {
        let g = curl_power_fn(&opts.oracle, f, j);
        let radial = |p: Spherical| g(p)[0];
        let (rms, max_abs) = rms_over(&fd_surface, &fd_weights, &radial);
        let (interior, _) = rms_over(&lattice.points, interior_weights, &|p| {
            let v = g(p);
            (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
        });
        let reliable = !(opts.interpolated && j >= 2);
        push(Family::Curl, format!("n·rot^{j} f"), j, j, max_abs, rms, interior, reliable);
    }

    let stopping_potential = stopping_rule(coeffs, s, Family::GradDiv, opts.stop_fraction);
    let stopping_solenoidal = stopping_rule(coeffs, s, Family::Curl, opts.stop_fraction);
    let pass = |fam: Family| traces.iter().filter(|t| t.family == fam).all(|t| t.passed);
    Ok(SobolevReport {
        s,
        weighted_sum_potential: stopping_potential.sum_at_cutoff,
        weighted_sum_solenoidal: stopping_solenoidal.sum_at_cutoff,
        verdict: Verdict {
            potential: pass(Family::GradDiv) && stopping_potential.stable,
            solenoidal: pass(Family::Curl) && stopping_solenoidal.stable,
        },
        trace_residuals: traces,
        stopping_potential,
        stopping_solenoidal,
        trace_tol: opts.trace_tol,
        resolution_insufficient: unreliable,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EfsNorms {
    #[serde(rename = "E0_norm")]
    pub e0_norm: f64,
    #[serde(rename = "F0_norm")]
    pub f0_norm: f64,
    /// RMS of `n·f` over the sphere.
    pub boundary_trace: f64,
    /// `‖div f_A‖` from coefficients.
    pub div_norm: f64,
    /// `‖rot² f_B‖` from coefficients.
    pub rot2_norm: f64,
}

/// `‖f‖²_{E⁰} = ‖f‖² + Σ ν² a²`, `‖f‖²_{F⁰} = ‖f‖² + Σ λ⁴ (b⁺² + b⁻²)`.
pub fn efs_norms(f: &VectorField, c: &SpectralCoeffs, trace: &dyn VectorFn) -> EfsNorms {
    let norm2 = f.norm_squared();
    let div2 = weighted_norm(c, 1, Family::GradDiv);
    let rot2 = weighted_norm(c, 2, Family::Curl);
    let surface = f.grid.surface();
    EfsNorms {
        e0_norm: (norm2 + div2).sqrt(),
        f0_norm: (norm2 + rot2).sqrt(),
        boundary_trace: surface.rms(|p| trace.eval(p)[0]),
        div_norm: div2.sqrt(),
        rot2_norm: rot2.sqrt(),
    }
}

/// `Σ_{|α| ≤ s} ‖∂^α f‖²` with Cartesian central differences of step `h`,
/// integrated with `grid`. Supports `s ≤ 2`.
pub fn fd_sobolev_norm_squared(f: &dyn VectorFn, grid: &BallGrid, s: u32, h: f64) -> Result<f64> {
    if s > 2 {
        return Err(Error::Invalid(format!("finite-difference H^s norm supports s ≤ 2, got {s}")));
    }
    let cart = |x: [f64; 3]| -> [f64; 3] {
        let p = Spherical::from_cartesian(x);
        crate::geometry::to_cartesian_components(p.theta, p.phi, f.eval(p))
    };
    let d1 = [-1.0 / 12.0, 2.0 / 3.0, 0.0, -2.0 / 3.0, 1.0 / 12.0];
    let shift = |x: [f64; 3], axis: usize, t: f64| {
        let mut y = x;
        y[axis] += t;
        y
    };
    let node_value = |idx: usize| -> f64 {
        let x = grid.node(idx).to_cartesian();
        let v = cart(x);
        let mut total = v.iter().map(|c| c * c).sum::<f64>();
        if s >= 1 {
            let grad = |y: [f64; 3], axis: usize| -> [f64; 3] {
                let mut g = [0.0; 3];
                for (o, w) in d1.iter().enumerate() {
                    if *w == 0.0 {
                        continue;
                    }
                    // d1 is listed from +2h down to −2h
                    let val = cart(shift(y, axis, (2.0 - o as f64) * h));
                    for c in 0..3 {
                        g[c] += w * val[c] / h;
                    }
                }
                g
            };
            for a in 0..3 {
                let g = grad(x, a);
                total += g.iter().map(|c| c * c).sum::<f64>();
                if s == 2 {
                    for b in a..3 {
                        let mut second = [0.0; 3];
                        for (o, w) in d1.iter().enumerate() {
                            if *w == 0.0 {
                                continue;
                            }
                            let gb = grad(shift(x, a, (2.0 - o as f64) * h), b);
                            for c in 0..3 {
                                second[c] += w * gb[c] / h;
                            }
                        }
                        let mult = if a == b { 1.0 } else { 2.0 };
                        total += mult * second.iter().map(|c| c * c).sum::<f64>();
                    }
                }
            }
        }
        total
    };
    let slice = grid.nr * grid.ntheta;
    let parts: Vec<f64> = (0..grid.nphi)
        .into_par_iter()
        .map(|l| (0..slice).map(|k| grid.weight(l * slice + k) * node_value(l * slice + k)).sum())
        .collect();
    Ok(parts.iter().sum())
}

/// Volume of the ball, for normalizing root-mean-square values.
pub fn ball_volume(radius: f64) -> f64 {
    4.0 / 3.0 * PI * radius.powi(3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::analyze;
    use crate::eigenbasis::{Basis, MultiIndex};

    #[test]
    fn weighted_norm_of_single_modes() {
        let basis = Basis::new(1.0, 9.0).unwrap();
        let mut c = SpectralCoeffs::zeros(&basis);
        c.a[2] = 1.0;
        let nu2 = basis.potential.entries[2].eigenvalue;
        assert_eq!(weighted_norm(&c, 1, Family::GradDiv), nu2);
        assert_eq!(weighted_norm(&c, 0, Family::GradDiv), c.potential_energy());
        c.b[1] = 2.0;
        let lam = basis.solenoidal.entries[1].eigenvalue;
        assert!((weighted_norm(&c, 2, Family::Curl) - 4.0 * lam.powi(4)).abs() < 1e-9);
    }

    #[test]
    fn eigenfield_is_a_member() {
        let basis = Basis::new(1.0, 10.0).unwrap();
        let e = *basis.potential.get(MultiIndex::new(2, 1, 1).unwrap(), None).unwrap();
        let mut c = SpectralCoeffs::zeros(&basis);
        c.set_a(e.index, 1.0).unwrap();
        let f = move |p: Spherical| e.field(p);
        for s in 1..=3 {
            let r = membership_test(&f, &c, s, &MembershipOptions::default()).unwrap();
            assert!(r.verdict.potential && r.verdict.solenoidal, "s={s}: {r:#?}");
        }
    }

    #[test]
    fn radial_field_fails_first_order() {
        let basis = Basis::new(1.0, 20.0).unwrap();
        let grid = BallGrid::new(1.0, 32, 24, 48).unwrap();
        let f = |p: Spherical| [2.0 * p.r, 0.0, 0.0];
        let c = analyze(&VectorField::from_fn(&grid, f), &basis).unwrap();
        let r = membership_test(&f, &c, 1, &MembershipOptions::default()).unwrap();
        assert!(!r.verdict.potential);
        let t = &r.trace_residuals[0];
        assert!((t.max_abs - 2.0).abs() < 1e-12);
        assert!(!r.stopping_potential.stable);
    }

    #[test]
    fn fd_norms_of_polynomial() {
        // f = (x, 0, 0): ‖f‖² = 4π/15, ‖∇f‖² = 4π/3, no second derivatives
        let grid = BallGrid::new(1.0, 8, 8, 16).unwrap();
        let f = |p: Spherical| {
            let [x, _, _] = p.to_cartesian();
            crate::geometry::to_spherical_components(p.theta, p.phi, [x, 0.0, 0.0])
        };
        let h0 = fd_sobolev_norm_squared(&f, &grid, 0, 1e-3).unwrap();
        let h2 = fd_sobolev_norm_squared(&f, &grid, 2, 1e-3).unwrap();
        assert!((h0 - 4.0 * PI / 15.0).abs() < 1e-12);
        assert!((h2 - (4.0 * PI / 15.0 + 4.0 * PI / 3.0)).abs() < 1e-7);
        assert!(fd_sobolev_norm_squared(&f, &grid, 3, 1e-3).is_err());
    }
}
