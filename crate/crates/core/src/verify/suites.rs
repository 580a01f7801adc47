use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bvp::{
    apply_forward, coefficient_residual, fd_residual, homeomorphism_ratios, kernel_position, remove_resonant_components,
    solve, stability_report, ResonanceKind,
};
use crate::decomposition::{analyze, parseval_report, synthesize, Expansion, Part, SpectralCoeffs};
use crate::eigenbasis::{Basis, EigenEntry, Family, MultiIndex};
use crate::error::{Error, Result};
use crate::fieldgrid::{BallGrid, FdOracle, ProbeLattice, StencilOrder, VectorField, VectorFn};
use crate::geometry::{to_spherical_components, Spherical};
use crate::sobolev::{efs_norms, fd_sobolev_norm_squared, membership_test, weighted_norm, MembershipOptions};
use crate::specialfn::{find_zeros, psi_pair, ZeroKind, ZeroRequest};

use super::fields::{CompactBump, HelmholtzField};
use super::Check;

/// Fourth-order stencil step for the eigen-equation residuals; the
/// refinement check halves it.
const EIGEN_STEP: f64 = 0.004;
/// Cutoff used by the field-level suites.
const FIELD_CUTOFF: f64 = 30.0;

fn basis(cfg: &VerifyConfigRef) -> Result<Basis> {
    Ok(Basis::new(cfg.radius, cfg.cutoff)?.restrict_degree(cfg.n_max))
}

type VerifyConfigRef = super::VerifyConfig;

/// Root of `sin z − z cos z` in `(π, 3π/2)` by plain bisection.
fn tan_root() -> f64 {
    let g = |z: f64| z.sin() - z * z.cos();
    let (mut lo, mut hi) = (PI, 1.5 * PI - 1e-9);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(lo).signum() == g(mid).signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub(super) fn zeros(cfg: &VerifyConfigRef) -> Result<Vec<Check>> {
    let psi0 = find_zeros(ZeroKind::Psi, 0, ZeroRequest::Count(20))?;
    let err = psi0
        .entries
        .iter()
        .map(|e| (e.zero - e.m as f64 * PI).abs())
        .fold(0.0, f64::max);
    let prime = find_zeros(ZeroKind::PsiPrime, 0, ZeroRequest::Count(1))?;
    let first = prime.entries[0].zero;
    let mut residual: f64 = 0.0;
    for n in 0..=cfg.n_max.max(1) {
        for kind in [ZeroKind::Psi, ZeroKind::PsiPrime] {
            if kind == ZeroKind::Psi && n == 0 {
                continue;
            }
            for e in find_zeros(kind, n, ZeroRequest::Count(10))?.entries {
                let (v, d) = psi_pair(n, e.zero);
                residual = residual.max(if kind == ZeroKind::Psi { v } else { d }.abs());
            }
        }
    }
    Ok(vec![
        Check::holds("psi0_zero_count", psi0.entries.len() == 20),
        Check::at_most("psi0_zeros_vs_m_pi", err, 1e-12),
        Check::at_most("psi0_prime_first_zero_vs_bisection", (first - tan_root()).abs(), 1e-11),
        Check::info("psi0_prime_first_zero", first),
        Check::at_most("zero_residual_max", residual, 1e-12),
    ])
}

/// Quadrature Gram matrix of `entries`, accumulated shell by shell.
fn gram(entries: &[EigenEntry], grid: &BallGrid) -> Vec<f64> {
    let m = entries.len();
    let per_shell = grid.ntheta * grid.nphi;
    let shells: Vec<Vec<f64>> = (0..grid.nr)
        .into_par_iter()
        .map(|i| {
            let nodes: Vec<(Spherical, f64)> = (0..per_shell)
                .map(|s| {
                    let (j, l) = (s % grid.ntheta, s / grid.ntheta);
                    let idx = grid.index(i, j, l);
                    (grid.node(idx), grid.weight(idx))
                })
                .collect();
            let samples: Vec<Vec<[f64; 3]>> =
                entries.iter().map(|e| nodes.iter().map(|(p, _)| e.field(*p)).collect()).collect();
            let mut g = vec![0.0; m * m];
            for a in 0..m {
                for b in a..m {
                    let s: f64 = nodes
                        .iter()
                        .zip(samples[a].iter().zip(&samples[b]))
                        .map(|((_, w), (x, y))| w * (x[0] * y[0] + x[1] * y[1] + x[2] * y[2]))
                        .sum();
                    g[a * m + b] = s;
                }
            }
            g
        })
        .collect();
    let mut g = vec![0.0; m * m];
    for s in &shells {
        for (x, y) in g.iter_mut().zip(s) {
            *x += y;
        }
    }
    for a in 0..m {
        for b in 0..a {
            g[a * m + b] = g[b * m + a];
        }
    }
    g
}

pub(super) fn orthonormality(cfg: &VerifyConfigRef) -> Result<Vec<Check>> {
    let basis = basis(cfg)?;
    let grid = BallGrid::with_defaults(cfg.radius)?;
    let entries: Vec<EigenEntry> = basis.entries().copied().collect();
    let g = gram(&entries, &grid);
    let m = entries.len();
    let mut diag: f64 = 0.0;
    let mut off: f64 = 0.0;
    for a in 0..m {
        for b in 0..m {
            let x = g[a * m + b];
            if a == b {
                diag = diag.max((x - 1.0).abs());
            } else {
                off = off.max(x.abs());
            }
        }
    }
    Ok(vec![
        Check::info("basis_size", m as f64),
        Check::at_most("gram_max_deviation", diag.max(off), 1e-8),
        Check::info("gram_diagonal_deviation", diag),
        Check::info("gram_offdiagonal_max", off),
    ])
}

struct EigenResiduals {
    grad_div: Vec<f64>,
    curl_of_potential: Vec<f64>,
    curl_eigen: Vec<f64>,
    div_of_curl: Vec<f64>,
}

fn eigen_residuals(basis: &Basis, lattice: &ProbeLattice, oracle: &FdOracle) -> EigenResiduals {
    let mut out = EigenResiduals {
        grad_div: Vec::new(),
        curl_of_potential: Vec::new(),
        curl_eigen: Vec::new(),
        div_of_curl: Vec::new(),
    };
    for e in &basis.potential.entries {
        let f = |p: Spherical| e.field(p);
        let scale = lattice.norm(f);
        let nu2 = e.eigenvalue;
        out.grad_div.push(
            lattice.norm(|p| {
                let g = oracle.grad_div(&f, p);
                let q = f(p);
                [g[0] + nu2 * q[0], g[1] + nu2 * q[1], g[2] + nu2 * q[2]]
            }) / (nu2 * scale),
        );
        out.curl_of_potential.push(lattice.norm(|p| oracle.curl(&f, p)) / scale);
    }
    for e in &basis.solenoidal.entries {
        let f = |p: Spherical| e.field(p);
        let scale = lattice.norm(f);
        let lam = e.eigenvalue;
        out.curl_eigen.push(
            lattice.norm(|p| {
                let c = oracle.curl(&f, p);
                let u = f(p);
                [c[0] - lam * u[0], c[1] - lam * u[1], c[2] - lam * u[2]]
            }) / (lam.abs() * scale),
        );
        out.div_of_curl.push(lattice.scalar_norm(|p| oracle.divergence(&f, p)) / scale);
    }
    out
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

fn aggregate(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(super) fn eigen(cfg: &VerifyConfigRef) -> Result<Vec<Check>> {
    let basis = basis(cfg)?;
    let lattice = ProbeLattice::standard(cfg.radius);
    let fine = FdOracle::new(StencilOrder::Four, EIGEN_STEP * cfg.radius / 2.0);
    let coarse = FdOracle::new(StencilOrder::Four, EIGEN_STEP * cfg.radius);
    lattice.check_support(&coarse, 2)?;
    let c = eigen_residuals(&basis, &lattice, &coarse);
    let f = eigen_residuals(&basis, &lattice, &fine);
    let ratio_gd = aggregate(&c.grad_div) / aggregate(&f.grad_div);
    let ratio_curl = aggregate(&c.curl_eigen) / aggregate(&f.curl_eigen);
    Ok(vec![
        Check::info("potential_entries", basis.potential.len() as f64),
        Check::info("solenoidal_entries", basis.solenoidal.len() as f64),
        Check::at_most("grad_div_residual_max", max_of(&f.grad_div), 1e-6),
        Check::at_most("curl_eigen_residual_max", max_of(&f.curl_eigen), 1e-6),
        Check::at_most("curl_of_potential_max", max_of(&f.curl_of_potential), 1e-6),
        Check::at_most("div_of_curl_field_max", max_of(&f.div_of_curl), 1e-6),
        Check::within("grad_div_refinement_ratio", ratio_gd, 12.0, 20.0),
        Check::within("curl_eigen_refinement_ratio", ratio_curl, 12.0, 20.0),
    ])
}

pub(super) fn boundary(cfg: &VerifyConfigRef) -> Result<Vec<Check>> {
    let basis = Basis::new(cfg.radius, cfg.cutoff)?;
    let surface = BallGrid::with_defaults(cfg.radius)?.surface();
    let nodes: Vec<Spherical> = surface.nodes().collect();
    let worst = |entries: &[EigenEntry]| -> f64 {
        let per: Vec<f64> = entries
            .par_iter()
            .map(|e| nodes.iter().map(|p| e.field(*p)[0].abs()).fold(0.0, f64::max))
            .collect();
        max_of(&per)
    };
    Ok(vec![
        Check::info("entries", basis.len() as f64),
        Check::at_most("potential_normal_trace_max", worst(&basis.potential.entries), 1e-10),
        Check::at_most("solenoidal_normal_trace_max", worst(&basis.solenoidal.entries), 1e-10),
    ])
}

struct HelmholtzRun {
    field: VectorField,
    potential: VectorField,
    solenoidal: VectorField,
    coeffs: SpectralCoeffs,
}

fn helmholtz_run(cfg: &VerifyConfigRef) -> Result<HelmholtzRun> {
    let hf = HelmholtzField::with_radius(cfg.radius);
    let grid = BallGrid::with_defaults(cfg.radius)?;
    let field = VectorField::from_fn(&grid, |p| hf.eval(p));
    let basis = Basis::new(cfg.radius, FIELD_CUTOFF)?;
    Ok(HelmholtzRun {
        coeffs: analyze(&field, &basis)?,
        potential: VectorField::from_fn(&grid, |p| hf.potential_part(p)),
        solenoidal: VectorField::from_fn(&grid, |p| hf.solenoidal_part(p)),
        field,
    })
}

const PARSEVAL_CUTOFFS: [f64; 4] = [5.0, 10.0, 20.0, 30.0];

pub(super) fn helmholtz(cfg: &VerifyConfigRef) -> Result<Vec<Check>> {
    let run = helmholtz_run(cfg)?;
    let grid = &run.field.grid;
    let pa = synthesize(&run.coeffs, grid, Part::Potential)?;
    let pb = synthesize(&run.coeffs, grid, Part::Solenoidal)?;
    let ea = pa.relative_error(&run.potential)?;
    let eb = pb.relative_error(&run.solenoidal)?;
    let cross = pa.inner_product(&pb)? / (pa.norm() * pb.norm());
    let mut checks = vec![
        Check::at_most("potential_relative_error", ea, 1e-4),
        Check::at_most("solenoidal_relative_error", eb, 1e-4),
        Check::at_most("parts_cross_correlation", cross.abs(), 1e-8),
    ];
    checks.extend(parseval_checks(&run)?);
    Ok(checks)
}

fn parseval_checks(run: &HelmholtzRun) -> Result<Vec<Check>> {
    let reports: Vec<_> = PARSEVAL_CUTOFFS
        .iter()
        .map(|&n| parseval_report(&run.field, &run.coeffs.restrict(n)))
        .collect();
    let mut checks = Vec::new();
    let total = reports[0].total;
    for (n, r) in PARSEVAL_CUTOFFS.iter().zip(&reports) {
        checks.push(Check::info(format!("parseval_defect_N{n}"), r.defect / total));
    }
    let monotone = reports.windows(2).all(|w| w[1].defect <= w[0].defect);
    checks.push(Check::holds("parseval_defect_monotone", monotone));
    let last = reports.last().expect("cutoff list is nonempty");
    checks.push(Check::at_least("parseval_defect_nonnegative", last.defect / total, -1e-12));
    Ok(checks)
}

pub(super) fn parseval(cfg: &VerifyConfigRef) -> Result<Vec<Check>> {
    let run = helmholtz_run(cfg)?;
    let mut checks = parseval_checks(&run)?;
    let last = parseval_report(&run.field, &run.coeffs);
    checks.push(Check::at_most("parseval_relative_defect", last.defect / last.total, 1e-8));
    let shares = (last.potential_share - run.potential.norm_squared()).abs() / last.total;
    checks.push(Check::at_most("potential_share_vs_part_norm", shares, 1e-6));
    Ok(checks)
}

/// Coefficients with `count` random unit-range entries on modes of degree at most `n_max`.
fn random_modes(basis: &Basis, count: usize, n_max: usize, rng: &mut ChaCha8Rng) -> SpectralCoeffs {
    let mut slots: Vec<(bool, usize)> = basis
        .potential
        .entries
        .iter()
        .enumerate()
        .filter(|(_, e)| e.index.n <= n_max)
        .map(|(i, _)| (true, i))
        .chain(
            basis
                .solenoidal
                .entries
                .iter()
                .enumerate()
                .filter(|(_, e)| e.index.n <= n_max)
                .map(|(i, _)| (false, i)),
        )
        .collect();
    slots.shuffle(rng);
    let mut c = SpectralCoeffs::zeros(basis);
    for (potential, i) in slots.into_iter().take(count) {
        let x = rng.gen_range(-1.0..1.0);
        if potential {
            c.a[i] = x;
        } else {
            c.b[i] = x;
        }
    }
    c
}

pub(super) fn bvp(cfg: &VerifyConfigRef) -> Result<Vec<Check>> {
    let basis = Basis::new(cfg.radius, cfg.cutoff)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let f = random_modes(&basis, 10, 4, &mut rng);
    let lambda = 3.7 / (cfg.radius * cfg.radius);
    let sol = solve(&f, lambda)?;
    let fd = fd_residual(
        &sol.v,
        &f,
        lambda,
        &FdOracle::new(StencilOrder::Eight, 0.005 * cfg.radius),
        &ProbeLattice::standard(cfg.radius),
    )?;
    let v1 = sol.v.potential_energy().sqrt();
    let v2 = sol.v.solenoidal_energy().sqrt();
    let fa = f.potential_energy().sqrt();
    let fb = f.solenoidal_energy().sqrt();
    let surface = BallGrid::with_defaults(cfg.radius)?.surface();
    let ve = Expansion::new(&sol.v, Part::Both);
    let trace = surface.max_abs(|p| ve.eval(p)[0]);
    let h = homeomorphism_ratios(&f, &sol.v);

    let lowest = basis.potential.entries[0].eigenvalue;
    let negative = stability_report(-1.0, &basis.potential)?;
    let coef = coefficient_residual(&sol.v, &f, lambda)?;
    Ok(vec![
        Check::holds("resonance_free", sol.resonance.kind == ResonanceKind::None),
        Check::holds("table_sufficient", sol.table_sufficient),
        Check::at_most("fd_relative_residual", fd, 1e-5),
        Check::at_most("coefficient_residual", coef, 1e-12),
        Check::info("Lambda", sol.bounds.lambda_bound),
        Check::info("Pi", sol.bounds.pi_bound),
        Check::at_most("potential_amplification_over_Lambda", v1 / fa / sol.bounds.lambda_bound, 1.0),
        Check::at_most("solenoidal_norm_identity", (v2 - fb / lambda.abs()).abs() / (fb / lambda.abs()), 1e-14),
        Check::at_most("solution_normal_trace_max", trace, 1e-8),
        Check::info("forward_constant", h.forward_constant),
        Check::info("inverse_constant", h.inverse_constant),
        Check::at_most(
            "negative_lambda_bound",
            (negative.lambda_bound - 1.0 / (1.0 + lowest)).abs(),
            1e-14,
        ),
    ])
}

pub(super) fn fredholm(cfg: &VerifyConfigRef) -> Result<Vec<Check>> {
    let basis = Basis::new(cfg.radius, cfg.cutoff)?;
    let target = MultiIndex::new(1, 1, 0)?;
    let lambda = basis.potential.get(target, None)?.eigenvalue;
    let mut f = SpectralCoeffs::zeros(&basis);
    f.set_a(target, 1.0)?;

    let mut checks = Vec::new();
    let report = match solve(&f, lambda) {
        Err(Error::Unsolvable(r)) => r,
        Err(e) => return Err(e),
        Ok(_) => {
            checks.push(Check::holds("reported_unsolvable", false));
            return Ok(checks);
        }
    };
    checks.push(Check::holds("reported_unsolvable", true));
    checks.push(Check::holds("resonance_kind_eigen_hit", report.resonance.kind == ResonanceKind::EigenHit));
    checks.push(Check::within("kernel_dim", report.resonance.kernel_dim as f64, 3.0, 3.0));
    checks.push(Check::at_most("fredholm_defect_error", (report.fredholm_defect - 1.0).abs(), 1e-12));

    // a right-hand side mixing the offending mode with random admissible ones
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
    let mixed = random_modes(&basis, 8, 4, &mut rng).axpy(1.0, &f)?;
    let mut worst: f64 = 0.0;
    let mut solved = true;
    for rhs in [&f, &mixed] {
        let reduced = remove_resonant_components(rhs, &report.resonance);
        let sol = match solve(&reduced, lambda) {
            Ok(s) => s,
            Err(Error::Unsolvable(_)) => {
                solved = false;
                continue;
            }
            Err(e) => return Err(e),
        };
        let base = coefficient_residual(&sol.v, &reduced, lambda)?;
        worst = worst.max(base);
        for _ in 0..5 {
            let mut w = sol.v.clone();
            for k in &sol.kernel {
                let (potential, i) = kernel_position(&w, k)?;
                let x: f64 = rng.gen_range(-1.0..1.0);
                if potential {
                    w.a[i] += x;
                } else {
                    w.b[i] += x;
                }
            }
            let r = coefficient_residual(&w, &reduced, lambda)?;
            worst = worst.max((r - base).abs());
            // the kernel itself is annihilated
            let diff = w.axpy(-1.0, &sol.v)?;
            worst = worst.max(apply_forward(&diff, lambda).energy().sqrt());
        }
    }
    checks.push(Check::holds("reduced_problem_solvable", solved));
    checks.push(Check::at_most("kernel_invariance", worst, 1e-12));

    // dichotomy over every eigenspace in the table
    let mut dichotomy = true;
    for space in basis.potential.eigenspaces().iter().filter(|s| s.n <= cfg.n_max) {
        let mut g = mixed.clone();
        for i in space.range.clone() {
            g.a[i] = 0.0;
        }
        let clean = solve(&g, space.eigenvalue).is_ok();
        let dirty = matches!(solve(&mixed, space.eigenvalue), Err(Error::Unsolvable(_)))
            == (space.range.clone().any(|i| mixed.a[i].abs() > crate::bvp::DEFAULT_SOLVABILITY_TOL));
        dichotomy &= clean && dirty;
    }
    checks.push(Check::holds("fredholm_dichotomy", dichotomy));
    Ok(checks)
}

fn compact_potential(radius: f64) -> impl Fn(Spherical) -> [f64; 3] + Sync + Copy {
    let bump = CompactBump {
        center: [0.02, -0.01, 0.03],
        support: 0.9,
        sharpness: 10.0,
    };
    move |p: Spherical| {
        let x = p.to_cartesian().map(|c| c / radius);
        let g = bump.gradient(x).map(|c| c / radius);
        to_spherical_components(p.theta, p.phi, g)
    }
}

pub(super) fn sobolev(cfg: &VerifyConfigRef) -> Result<Vec<Check>> {
    let r = cfg.radius;
    let opts = MembershipOptions::default();
    let mut checks = Vec::new();

    let small = Basis::new(r, cfg.cutoff)?;
    for index in [MultiIndex::new(1, 1, 0)?, MultiIndex::new(2, 1, 1)?] {
        let e = *small.potential.get(index, None)?;
        let mut c = SpectralCoeffs::zeros(&small);
        c.set_a(index, 1.0)?;
        let f = move |p: Spherical| e.field(p);
        let mut member = true;
        let mut worst: f64 = 0.0;
        for s in 1..=4 {
            let rep = membership_test(&f, &c, s, &opts)?;
            member &= rep.verdict.potential && rep.verdict.solenoidal && !rep.resolution_insufficient;
            worst = rep.trace_residuals.iter().map(|t| t.relative).fold(worst, f64::max);
        }
        checks.push(Check::holds(format!("q{index}_member_s1_to_s4"), member));
        checks.push(Check::info(format!("q{index}_worst_relative_trace"), worst));
        let efs = efs_norms(&VectorField::from_fn(&BallGrid::new(r, 24, 16, 32)?, f), &c, &f);
        checks.push(Check::at_most(
            format!("q{index}_E0_identity"),
            (efs.e0_norm.powi(2) - (1.0 + e.eigenvalue)).abs() / (1.0 + e.eigenvalue),
            1e-8,
        ));
    }
    let plus = *small.solenoidal.entries.first().ok_or_else(|| Error::Invalid("empty curl table".into()))?;
    let mut c = SpectralCoeffs::zeros(&small);
    c.b[0] = 1.0;
    let f = move |p: Spherical| plus.field(p);
    let efs = efs_norms(&VectorField::from_fn(&BallGrid::new(r, 24, 16, 32)?, f), &c, &f);
    let l4 = 1.0 + plus.eigenvalue.powi(4);
    checks.push(Check::at_most("u_F0_identity", (efs.f0_norm.powi(2) - l4).abs() / l4, 1e-8));

    let grid = BallGrid::with_defaults(r)?;
    let wide = Basis::new(r, FIELD_CUTOFF)?;

    // f = ∇(r²): normal trace 2R, weighted sums grow with the cutoff
    let radial = |p: Spherical| [2.0 * p.r, 0.0, 0.0];
    let c = analyze(&VectorField::from_fn(&grid, radial), &wide)?;
    let rep = membership_test(&radial, &c, 1, &opts)?;
    let trace = &rep.trace_residuals[0];
    checks.push(Check::holds("radial_field_not_member", !rep.verdict.potential));
    checks.push(Check::at_most("radial_field_trace_error", (trace.max_abs - 2.0 * r).abs(), 1e-8));
    let sums: Vec<f64> = [10.0, 20.0, 30.0]
        .iter()
        .map(|&n| weighted_norm(&c.restrict(n), 1, Family::GradDiv))
        .collect();
    checks.push(Check::holds("radial_field_sums_grow", sums.windows(2).all(|w| w[1] > w[0] * 1.01)));

    // compactly supported potential field
    let bump = compact_potential(r);
    let c = analyze(&VectorField::from_fn(&grid, bump), &wide)?;
    let rep = membership_test(&bump, &c, 1, &opts)?;
    checks.push(Check::holds("compact_field_member_s1", rep.verdict.potential && rep.verdict.solenoidal));
    checks.push(Check::at_most(
        "compact_field_increment_s1",
        rep.stopping_potential.increment_fraction,
        opts.stop_fraction,
    ));
    for s in 2..=4 {
        let rep = membership_test(&bump, &c, s, &opts)?;
        checks.push(
            Check::at_most(
                format!("compact_field_increment_s{s}"),
                rep.stopping_potential.increment_fraction,
                opts.stop_fraction,
            )
            .optional(),
        );
        checks.push(
            Check::at_most(
                format!("compact_field_trace_max_s{s}"),
                rep.trace_residuals.iter().map(|t| t.relative).fold(0.0, f64::max),
                opts.trace_tol,
            )
            .optional(),
        );
    }
    let probes = ProbeLattice::coarse(r);
    let e20 = Expansion::new(&c.restrict(20.0), Part::Potential);
    let e30 = Expansion::new(&c.restrict(30.0), Part::Potential);
    let sup = probes.max_abs(|p| {
        let a = e20.eval(p);
        let b = e30.eval(p);
        [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
    }) / probes.max_abs(bump);
    checks.push(Check::at_most("compact_field_sup_cauchy_20_30", sup, 1e-4).optional());

    // coefficient ‖div f_A‖ against a finite-difference divergence
    let hf = HelmholtzField::with_radius(r);
    let hfn = move |p: Spherical| hf.eval(p);
    let field = VectorField::from_fn(&grid, hfn);
    let c = analyze(&field, &wide)?;
    let oracle = FdOracle::new(StencilOrder::Eight, 0.01 * r);
    let div = crate::fieldgrid::fd_divergence(&oracle, &hfn, &grid).norm();
    let efs = efs_norms(&field, &c, &hfn);
    checks.push(Check::at_most("div_norm_vs_fd", (efs.div_norm - div).abs() / div, 1e-4));

    // ratio of coefficient and finite-difference H² norms across cutoffs
    let pot = move |p: Spherical| hf.potential_part(p);
    let small_grid = BallGrid::new(r, 24, 24, 48)?;
    let h2 = fd_sobolev_norm_squared(&pot, &small_grid, 2, 1e-3 * r)?;
    let ratios: Vec<f64> = [10.0, 20.0, 30.0]
        .iter()
        .map(|&n| weighted_norm(&c.restrict(n), 2, Family::GradDiv) / h2)
        .collect();
    for (n, q) in [10, 20, 30].iter().zip(&ratios) {
        checks.push(Check::info(format!("h2_ratio_N{n}"), *q));
    }
    checks.push(Check::info("h2_ratio_max", max_of(&ratios)));
    checks.push(Check::at_most("h2_ratio_settled", (ratios[2] - ratios[1]).abs() / ratios[2], 0.05));
    Ok(checks)
}

pub(super) fn selfadjoint(cfg: &VerifyConfigRef) -> Result<Vec<Check>> {
    let basis = Basis::new(cfg.radius, cfg.cutoff)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(7));
    let random = |rng: &mut ChaCha8Rng| {
        let mut c = SpectralCoeffs::zeros(&basis);
        c.a.iter_mut().chain(c.b.iter_mut()).for_each(|x| *x = rng.gen_range(-1.0..1.0));
        c
    };
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let lambda = rng.gen_range(-5.0..20.0);
        let (u, v) = (random(&mut rng), random(&mut rng));
        let lu = apply_forward(&u, lambda);
        let lv = apply_forward(&v, lambda);
        let scale = lu.energy().sqrt() * v.energy().sqrt() + u.energy().sqrt() * lv.energy().sqrt();
        worst = worst.max((lu.dot(&v)? - u.dot(&lv)?).abs() / scale);
    }

    // quadrature form with finite-difference ∇div on smooth zero-trace fields
    let grid = BallGrid::new(cfg.radius, 16, 12, 24)?;
    let oracle = FdOracle::new(StencilOrder::Eight, 0.01 * cfg.radius);
    let u = random_modes(&basis, 6, 3, &mut rng);
    let v = random_modes(&basis, 6, 3, &mut rng);
    let (ue, ve) = (Expansion::new(&u, Part::Both), Expansion::new(&v, Part::Both));
    let lambda = 2.5 / (cfg.radius * cfg.radius);
    let us = VectorField::from_fn(&grid, |p| ue.eval(p));
    let vs = VectorField::from_fn(&grid, |p| ve.eval(p));
    let gu = crate::fieldgrid::grad_div_apply(&oracle, &ue, &grid);
    let gv = crate::fieldgrid::grad_div_apply(&oracle, &ve, &grid);
    let left = gu.axpy(lambda, &us)?.inner_product(&vs)?;
    let right = us.inner_product(&gv.axpy(lambda, &vs)?)?;
    let scale = gu.norm() * vs.norm() + us.norm() * gv.norm();
    let green_lhs = gu.inner_product(&vs)?;
    let du = crate::fieldgrid::fd_divergence(&oracle, &ue, &grid);
    let dv = crate::fieldgrid::fd_divergence(&oracle, &ve, &grid);
    let green = (green_lhs + du.inner_product(&dv)?).abs() / scale;
    Ok(vec![
        Check::at_most("coefficient_symmetry_max", worst, 1e-12),
        Check::at_most("quadrature_symmetry", (left - right).abs() / scale, 1e-6),
        Check::at_most("green_identity", green, 1e-6),
    ])
}
