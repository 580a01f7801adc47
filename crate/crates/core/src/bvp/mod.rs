//! `∇div v + λv = f` in the ball with `n·v = 0` on the sphere, solved
//! diagonally in the eigenbasis for any real `λ`.

use serde::{Deserialize, Serialize};

use crate::decomposition::{Expansion, Part, SpectralCoeffs};
use crate::eigenbasis::{EigenTable, EntryFamily, MultiIndex, Sign};
use crate::error::{Error, Result};
use crate::fieldgrid::{FdOracle, ProbeLattice, VectorFn};

/// Default solvability tolerance on resonant coefficients.
pub const DEFAULT_SOLVABILITY_TOL: f64 = 1e-8;

pub fn default_tol_res(lambda: f64) -> f64 {
    1e-9 * lambda.abs().max(1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResonanceKind {
    None,
    LambdaZero,
    EigenHit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resonance {
    pub kind: ResonanceKind,
    /// `(n, m)` with `|λ − ν²_{n,m}| ≤ tol_res`
    pub hit_pairs: Vec<(usize, usize)>,
    pub kernel_dim: usize,
    pub tol_res: f64,
    /// Set when the kernel is infinite-dimensional and only its part inside
    /// the table is counted.
    pub kernel_truncated: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    /// `max 1/|λ − ν²|` over non-resonant table entries
    #[serde(rename = "Lambda")]
    pub lambda_bound: f64,
    /// `max ν²/|λ − ν²|` over non-resonant table entries
    #[serde(rename = "Pi")]
    pub pi_bound: f64,
}

/// One field spanning the kernel of `∇div + λ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelField {
    pub family: EntryFamily,
    pub n: usize,
    pub m: usize,
    pub k: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub family: EntryFamily,
    pub n: usize,
    pub m: usize,
    pub k: i64,
    pub coefficient: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnsolvableReport {
    pub lambda: f64,
    pub resonance: Resonance,
    pub fredholm_defect: f64,
    pub solvability_tol: f64,
    pub violating: Vec<Violation>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BvpSolution {
    pub lambda: f64,
    pub v: SpectralCoeffs,
    pub resonance: Resonance,
    /// Norm of the right-hand side's components in the kernel directions.
    pub fredholm_defect: f64,
    pub bounds: Bounds,
    /// Whether `(N/R)² > 2λ`, so the bounds are attained inside the table.
    pub table_sufficient: bool,
    pub kernel: Vec<KernelField>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    pub tol_res: Option<f64>,
    pub solvability_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol_res: None,
            solvability_tol: DEFAULT_SOLVABILITY_TOL,
        }
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !lambda.is_finite() {
        return Err(Error::Invalid(format!("λ = {lambda} must be a finite real number")));
    }
    Ok(())
}

/// Classifies `λ` against the potential spectrum in `table`.
pub fn detect_resonance(table: &EigenTable, solenoidal_len: usize, lambda: f64, tol_res: f64) -> Resonance {
    if lambda.abs() <= tol_res {
        return Resonance {
            kind: ResonanceKind::LambdaZero,
            hit_pairs: Vec::new(),
            kernel_dim: solenoidal_len,
            tol_res,
            kernel_truncated: true,
        };
    }
    let mut hit_pairs = Vec::new();
    let mut kernel_dim = 0;
    for space in table.eigenspaces() {
        if (lambda - space.eigenvalue).abs() <= tol_res {
            hit_pairs.push((space.n, space.m));
            kernel_dim += 2 * space.n + 1;
        }
    }
    Resonance {
        kind: if hit_pairs.is_empty() {
            ResonanceKind::None
        } else {
            ResonanceKind::EigenHit
        },
        hit_pairs,
        kernel_dim,
        tol_res,
        kernel_truncated: false,
    }
}

fn bounds_over(table: &EigenTable, lambda: f64, skip: &[(usize, usize)]) -> Bounds {
    let mut b = Bounds {
        lambda_bound: 0.0,
        pi_bound: 0.0,
    };
    for e in table.entries.iter().filter(|e| !skip.contains(&(e.index.n, e.index.m))) {
        let d = (lambda - e.eigenvalue).abs();
        b.lambda_bound = b.lambda_bound.max(1.0 / d);
        b.pi_bound = b.pi_bound.max(e.eigenvalue / d);
    }
    b
}

fn table_sufficient(table: &EigenTable, lambda: f64) -> bool {
    (table.cutoff / table.radius).powi(2) > 2.0 * lambda
}

pub fn solve(f: &SpectralCoeffs, lambda: f64) -> Result<BvpSolution> {
    solve_with(f, lambda, SolveOptions::default())
}

pub fn solve_with(f: &SpectralCoeffs, lambda: f64, opts: SolveOptions) -> Result<BvpSolution> {
    check_lambda(lambda)?;
    let tol_res = opts.tol_res.unwrap_or_else(|| default_tol_res(lambda));
    let table = &f.basis.potential;
    let resonance = detect_resonance(table, f.basis.solenoidal.len(), lambda, tol_res);
    let hit = |n: usize, m: usize| resonance.hit_pairs.contains(&(n, m));

    let mut v = SpectralCoeffs::zeros(&f.basis);
    let mut violating = Vec::new();
    let mut kernel = Vec::new();
    let mut defect_sq = 0.0;

    for (i, (e, a)) in f.potential_terms().enumerate() {
        if hit(e.index.n, e.index.m) {
            kernel.push(kernel_field(e.family, e.index));
            defect_sq += a * a;
            if a.abs() > opts.solvability_tol {
                violating.push(violation(e.family, e.index, a));
            }
        } else {
            v.a[i] = a / (lambda - e.eigenvalue);
        }
    }
    for (i, (e, b)) in f.solenoidal_terms().enumerate() {
        if resonance.kind == ResonanceKind::LambdaZero {
            kernel.push(kernel_field(e.family, e.index));
            defect_sq += b * b;
            if b.abs() > opts.solvability_tol {
                violating.push(violation(e.family, e.index, b));
            }
        } else {
            v.b[i] = b / lambda;
        }
    }
    let fredholm_defect = defect_sq.sqrt();
    if !violating.is_empty() {
        return Err(Error::Unsolvable(Box::new(UnsolvableReport {
            lambda,
            resonance,
            fredholm_defect,
            solvability_tol: opts.solvability_tol,
            violating,
        })));
    }
    Ok(BvpSolution {
        lambda,
        v,
        bounds: bounds_over(table, lambda, &resonance.hit_pairs),
        table_sufficient: table_sufficient(table, lambda),
        resonance,
        fredholm_defect,
        kernel,
    })
}

fn kernel_field(family: EntryFamily, index: MultiIndex) -> KernelField {
    KernelField {
        family,
        n: index.n,
        m: index.m,
        k: index.k,
    }
}

fn violation(family: EntryFamily, index: MultiIndex, coefficient: f64) -> Violation {
    Violation {
        family,
        n: index.n,
        m: index.m,
        k: index.k,
        coefficient,
    }
}

/// Zeroes the components of `f` along the kernel of `∇div + λ`.
pub fn remove_resonant_components(f: &SpectralCoeffs, resonance: &Resonance) -> SpectralCoeffs {
    let mut out = f.clone();
    for (i, e) in f.basis.potential.entries.iter().enumerate() {
        if resonance.hit_pairs.contains(&(e.index.n, e.index.m)) {
            out.a[i] = 0.0;
        }
    }
    if resonance.kind == ResonanceKind::LambdaZero {
        out.b.iter_mut().for_each(|b| *b = 0.0);
    }
    out
}

/// Coefficients of `∇div v + λv`.
pub fn apply_forward(v: &SpectralCoeffs, lambda: f64) -> SpectralCoeffs {
    let mut out = v.clone();
    for (x, e) in out.a.iter_mut().zip(&v.basis.potential.entries) {
        *x *= lambda - e.eigenvalue;
    }
    out.b.iter_mut().for_each(|x| *x *= lambda);
    out
}

/// Tolerance on the solenoidal energy accepted by [`operator_power`].
pub const SOLENOIDAL_REJECT_TOL: f64 = 1e-12;

/// `(∇div)^p` on the potential subspace: multiplies `a_κ` by `(−ν²)^p`.
pub fn operator_power(c: &SpectralCoeffs, p: i32) -> Result<SpectralCoeffs> {
    if p == 0 {
        return Err(Error::Invalid("operator power must be nonzero".into()));
    }
    let sol = c.solenoidal_energy().sqrt();
    if sol > SOLENOIDAL_REJECT_TOL * c.energy().sqrt().max(1.0) {
        return Err(Error::Invalid(format!(
            "operator powers act on potential fields only; solenoidal norm is {sol:e}"
        )));
    }
    let mut out = c.clone();
    for (x, e) in out.a.iter_mut().zip(&c.basis.potential.entries) {
        *x *= (-e.eigenvalue).powi(p);
    }
    out.b.iter_mut().for_each(|x| *x = 0.0);
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub lambda: f64,
    #[serde(rename = "Lambda")]
    pub lambda_bound: f64,
    #[serde(rename = "Pi")]
    pub pi_bound: f64,
    pub nearest_eigenvalue: f64,
    pub distance: f64,
    pub table_sufficient: bool,
}

pub fn stability_report(lambda: f64, table: &EigenTable) -> Result<StabilityReport> {
    check_lambda(lambda)?;
    let nearest = table
        .entries
        .iter()
        .map(|e| e.eigenvalue)
        .min_by(|x, y| (lambda - x).abs().total_cmp(&(lambda - y).abs()))
        .ok_or_else(|| Error::Invalid("empty eigenvalue table".into()))?;
    let b = bounds_over(table, lambda, &[]);
    Ok(StabilityReport {
        lambda,
        lambda_bound: b.lambda_bound,
        pi_bound: b.pi_bound,
        nearest_eigenvalue: nearest,
        distance: (lambda - nearest).abs(),
        table_sufficient: table_sufficient(table, lambda),
    })
}

/// Empirical constants of the two-sided estimate between the data norm
/// `‖f‖²_{F⁰} = ‖f‖² + ‖rot² f_B‖²` and the solution graph norm
/// `‖v‖² + ‖∇div v‖² + ‖rot² v_B‖²`, both in coefficient space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomeomorphismRatios {
    pub data_norm: f64,
    pub solution_norm: f64,
    /// `‖f‖_{F⁰} / ‖v‖`
    pub forward_constant: f64,
    /// `‖v‖ / ‖f‖_{F⁰}`
    pub inverse_constant: f64,
}

pub fn f0_norm_squared(c: &SpectralCoeffs) -> f64 {
    let rot2: f64 = c.solenoidal_terms().map(|(e, b)| e.eigenvalue.powi(4) * b * b).sum();
    c.energy() + rot2
}

pub fn graph_norm_squared(c: &SpectralCoeffs) -> f64 {
    let gd: f64 = c.potential_terms().map(|(e, a)| e.eigenvalue.powi(2) * a * a).sum();
    f0_norm_squared(c) + gd
}

pub fn homeomorphism_ratios(f: &SpectralCoeffs, v: &SpectralCoeffs) -> HomeomorphismRatios {
    let data_norm = f0_norm_squared(f).sqrt();
    let solution_norm = graph_norm_squared(v).sqrt();
    HomeomorphismRatios {
        data_norm,
        solution_norm,
        forward_constant: data_norm / solution_norm,
        inverse_constant: solution_norm / data_norm,
    }
}

/// Coefficient-space check that `v` solves the problem for `f` up to the kernel.
pub fn coefficient_residual(v: &SpectralCoeffs, f: &SpectralCoeffs, lambda: f64) -> Result<f64> {
    Ok(apply_forward(v, lambda).axpy(-1.0, f)?.energy().sqrt())
}

/// `‖∇div v + λv − f‖ / ‖f‖` over `lattice`, with `∇div` from `oracle` and
/// both fields evaluated pointwise from their expansions.
pub fn fd_residual(
    v: &SpectralCoeffs,
    f: &SpectralCoeffs,
    lambda: f64,
    oracle: &FdOracle,
    lattice: &ProbeLattice,
) -> Result<f64> {
    lattice.check_support(oracle, 2)?;
    let ve = Expansion::new(v, Part::Both);
    let fe = Expansion::new(f, Part::Both);
    let res = lattice.norm(|p| {
        let g = oracle.grad_div(&ve, p);
        let x = ve.eval(p);
        let y = fe.eval(p);
        [g[0] + lambda * x[0] - y[0], g[1] + lambda * x[1] - y[1], g[2] + lambda * x[2] - y[2]]
    });
    Ok(res / lattice.norm(|p| fe.eval(p)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveReport {
    pub lambda: f64,
    pub resonance: Resonance,
    pub fredholm_defect: f64,
    pub bounds: Bounds,
    pub table_sufficient: bool,
    pub kernel: Vec<KernelField>,
    pub solution: serde_json::Value,
    pub residual: ResidualDiagnostics,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualDiagnostics {
    /// `‖(∇div + λ) v − (f − kernel part)‖` in coefficient space
    pub coefficient: f64,
    /// `‖v_A‖`, `‖f_A‖`, `‖v_B‖`, `‖f_B‖`
    pub norms: [f64; 4],
    /// Relative finite-difference residual, when computed.
    pub fd: Option<f64>,
}

impl BvpSolution {
    pub fn report(&self, f: &SpectralCoeffs, fd: Option<f64>) -> Result<SolveReport> {
        let reduced = remove_resonant_components(f, &self.resonance);
        let solution: serde_json::Value = serde_json::from_str(&self.v.to_json()?)?;
        Ok(SolveReport {
            lambda: self.lambda,
            resonance: self.resonance.clone(),
            fredholm_defect: self.fredholm_defect,
            bounds: self.bounds,
            table_sufficient: self.table_sufficient,
            kernel: self.kernel.clone(),
            solution,
            residual: ResidualDiagnostics {
                coefficient: coefficient_residual(&self.v, &reduced, self.lambda)?,
                norms: [
                    self.v.potential_energy().sqrt(),
                    f.potential_energy().sqrt(),
                    self.v.solenoidal_energy().sqrt(),
                    f.solenoidal_energy().sqrt(),
                ],
                fd,
            },
        })
    }
}

/// Looks up a kernel field's coefficient slot.
pub fn kernel_position(c: &SpectralCoeffs, k: &KernelField) -> Result<(bool, usize)> {
    let index = MultiIndex::new(k.n, k.m, k.k)?;
    match k.family {
        EntryFamily::GradDiv => Ok((true, c.basis.potential.position(index, None)?)),
        EntryFamily::CurlPlus => Ok((false, c.basis.solenoidal.position(index, Some(Sign::Plus))?)),
        EntryFamily::CurlMinus => Ok((false, c.basis.solenoidal.position(index, Some(Sign::Minus))?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigenbasis::Basis;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn basis() -> Basis {
        Basis::new(1.0, 12.0).unwrap()
    }

    fn random(basis: &Basis, seed: u64) -> SpectralCoeffs {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = SpectralCoeffs::zeros(basis);
        c.a.iter_mut().for_each(|x| *x = rng.gen_range(-1.0..1.0));
        c.b.iter_mut().for_each(|x| *x = rng.gen_range(-1.0..1.0));
        c
    }

    #[test]
    fn single_mode_with_unit_denominator() {
        let b = basis();
        let mut f = SpectralCoeffs::zeros(&b);
        f.a[4] = 1.0;
        let nu2 = b.potential.entries[4].eigenvalue;
        let s = solve(&f, nu2 + 1.0).unwrap();
        assert_eq!(s.resonance.kind, ResonanceKind::None);
        assert_eq!(s.fredholm_defect, 0.0);
        assert!((s.v.a[4] - 1.0).abs() < 1e-15);
        assert!(s.v.a.iter().enumerate().all(|(i, x)| i == 4 || *x == 0.0));
    }

    #[test]
    fn solenoidal_data_is_divided_by_lambda() {
        let b = basis();
        let mut f = SpectralCoeffs::zeros(&b);
        f.b[0] = 1.0;
        let s = solve(&f, 2.0).unwrap();
        assert_eq!(s.v.b[0], 0.5);
    }

    #[test]
    fn eigen_hit_is_unsolvable() {
        let b = basis();
        let k = MultiIndex::new(1, 1, 0).unwrap();
        let mut f = SpectralCoeffs::zeros(&b);
        f.set_a(k, 1.0).unwrap();
        let nu2 = b.potential.get(k, None).unwrap().eigenvalue;
        match solve(&f, nu2) {
            Err(Error::Unsolvable(r)) => {
                assert_eq!(r.resonance.kind, ResonanceKind::EigenHit);
                assert_eq!(r.resonance.kernel_dim, 3);
                assert!((r.fredholm_defect - 1.0).abs() < 1e-15);
                assert_eq!(r.violating.len(), 1);
            }
            other => panic!("expected unsolvable, got {other:?}"),
        }
    }

    #[test]
    fn zero_lambda_with_solenoidal_data() {
        let b = basis();
        let mut f = SpectralCoeffs::zeros(&b);
        f.b[2] = -0.75;
        f.a[0] = 1.0;
        match solve(&f, 0.0) {
            Err(Error::Unsolvable(r)) => {
                assert_eq!(r.resonance.kind, ResonanceKind::LambdaZero);
                assert!((r.fredholm_defect - 0.75).abs() < 1e-15);
                assert!(r.resonance.kernel_truncated);
            }
            other => panic!("expected unsolvable, got {other:?}"),
        }
        f.b[2] = 0.0;
        let s = solve(&f, 0.0).unwrap();
        assert!((s.v.a[0] + 1.0 / b.potential.entries[0].eigenvalue).abs() < 1e-15);
        assert!(s.v.b.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn forward_inverts_solve() {
        let b = basis();
        let f = random(&b, 7);
        let s = solve(&f, 3.7).unwrap();
        let back = apply_forward(&s.v, 3.7);
        for (x, y) in back.a.iter().zip(&f.a).chain(back.b.iter().zip(&f.b)) {
            assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0));
        }
    }

    #[test]
    fn forward_annihilates_resonant_mode() {
        let b = basis();
        let mut v = SpectralCoeffs::zeros(&b);
        v.a[6] = 1.0;
        let out = apply_forward(&v, b.potential.entries[6].eigenvalue);
        assert_eq!(out.energy(), 0.0);
    }

    #[test]
    fn powers() {
        let b = basis();
        let mut c = random(&b, 3);
        assert!(operator_power(&c, 1).is_err());
        c.b.iter_mut().for_each(|x| *x = 0.0);
        let up = operator_power(&c, 1).unwrap();
        for ((x, y), e) in up.a.iter().zip(&c.a).zip(&b.potential.entries) {
            assert_eq!(*x, -e.eigenvalue * y);
        }
        let round = operator_power(&operator_power(&c, -1).unwrap(), 1).unwrap();
        for (x, y) in round.a.iter().zip(&c.a) {
            assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0));
        }
        assert!(operator_power(&c, 0).is_err());
    }

    #[test]
    fn stability_for_negative_lambda() {
        let b = basis();
        let r = stability_report(-1.0, &b.potential).unwrap();
        let nu2_min = b.potential.entries[0].eigenvalue;
        assert!((r.lambda_bound - 1.0 / (1.0 + nu2_min)).abs() < 1e-15);
        assert!(r.table_sufficient);
    }

    #[test]
    fn stability_midway() {
        let b = basis();
        let spaces = b.potential.eigenspaces();
        let (lo, hi) = (spaces[2].eigenvalue, spaces[3].eigenvalue);
        let r = stability_report(0.5 * (lo + hi), &b.potential).unwrap();
        assert!((r.distance - 0.5 * (hi - lo)).abs() < 1e-12);
        assert!(!stability_report(1e4, &b.potential).unwrap().table_sufficient);
    }

    #[test]
    fn solution_norm_bounds() {
        let b = basis();
        for seed in 0..20 {
            let f = random(&b, seed);
            let lambda = 5.0 + seed as f64 * 1.3;
            let s = solve(&f, lambda).unwrap();
            let v1 = s.v.potential_energy().sqrt();
            let f_a = f.potential_energy().sqrt();
            assert!(v1 <= s.bounds.lambda_bound * f_a + 1e-10);
            let v2 = s.v.solenoidal_energy().sqrt();
            assert!((v2 - f.solenoidal_energy().sqrt() / lambda).abs() < 1e-12);
        }
    }

    proptest::proptest! {
        #[test]
        fn forward_operator_is_symmetric(seed in 0u64..1000, lambda in -50.0f64..50.0) {
            let b = Basis::new(1.0, 8.0).unwrap();
            let u = random(&b, seed);
            let v = random(&b, seed + 1);
            let lhs = apply_forward(&u, lambda).dot(&v).unwrap();
            let rhs = u.dot(&apply_forward(&v, lambda)).unwrap();
            proptest::prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
        }
    }
}
