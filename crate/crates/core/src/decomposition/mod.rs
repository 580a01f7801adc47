//! Expansion in the combined eigenbasis and the split `f = f_A + f_B` into
//! potential and solenoidal parts.

mod transform;

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigenbasis::{
    potential_radial, solenoidal_radial, Angular, Basis, EigenEntry, EntryFamily, MultiIndex, Sign,
};
use crate::error::{Error, Result};
use crate::fieldgrid::{BallGrid, ScalarField, ScalarFn, VectorField, VectorFn};
use crate::geometry::Spherical;
use crate::specialfn::{harmonic_index, psi_pair, NormalizedLegendre};
use transform::{analyze_shells, synthesize_shells, AngularTables, ShellSpectrum};

/// Coefficients `a_κ = (f, q_κ)` and `b_κ^± = (f, u_κ^±)`, stored in the
/// order of the basis tables.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralCoeffs {
    pub basis: Basis,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Part {
    Potential,
    Solenoidal,
    Both,
}

impl SpectralCoeffs {
    pub fn zeros(basis: &Basis) -> Self {
        Self {
            basis: basis.clone(),
            a: vec![0.0; basis.potential.len()],
            b: vec![0.0; basis.solenoidal.len()],
        }
    }

    pub fn radius(&self) -> f64 {
        self.basis.radius
    }

    pub fn cutoff(&self) -> f64 {
        self.basis.cutoff
    }

    /// `Σ a²`
    pub fn potential_energy(&self) -> f64 {
        self.a.iter().map(|x| x * x).sum()
    }

    /// `Σ (b⁺² + b⁻²)`
    pub fn solenoidal_energy(&self) -> f64 {
        self.b.iter().map(|x| x * x).sum()
    }

    pub fn energy(&self) -> f64 {
        self.potential_energy() + self.solenoidal_energy()
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.basis.potential.entries != other.basis.potential.entries
            || self.basis.solenoidal.entries != other.basis.solenoidal.entries
        {
            return Err(Error::Invalid("coefficients refer to different bases".into()));
        }
        Ok(())
    }

    /// Coefficient-space inner product.
    pub fn dot(&self, other: &Self) -> Result<f64> {
        self.check_same(other)?;
        let pa: f64 = self.a.iter().zip(&other.a).map(|(x, y)| x * y).sum();
        let pb: f64 = self.b.iter().zip(&other.b).map(|(x, y)| x * y).sum();
        Ok(pa + pb)
    }

    /// `self + s·other`
    pub fn axpy(&self, s: f64, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            basis: self.basis.clone(),
            a: self.a.iter().zip(&other.a).map(|(x, y)| x + s * y).collect(),
            b: self.b.iter().zip(&other.b).map(|(x, y)| x + s * y).collect(),
        })
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            basis: self.basis.clone(),
            a: self.a.iter().map(|x| s * x).collect(),
            b: self.b.iter().map(|x| s * x).collect(),
        }
    }

    /// Only the potential (`a`) or solenoidal (`b`) coefficients.
    pub fn part(&self, part: Part) -> Self {
        let mut out = self.clone();
        match part {
            Part::Potential => out.b.iter_mut().for_each(|x| *x = 0.0),
            Part::Solenoidal => out.a.iter_mut().for_each(|x| *x = 0.0),
            Part::Both => {}
        }
        out
    }

    pub fn get_a(&self, index: MultiIndex) -> Result<f64> {
        Ok(self.a[self.basis.potential.position(index, None)?])
    }

    pub fn get_b(&self, index: MultiIndex, sign: Sign) -> Result<f64> {
        Ok(self.b[self.basis.solenoidal.position(index, Some(sign))?])
    }

    pub fn set_a(&mut self, index: MultiIndex, value: f64) -> Result<()> {
        let i = self.basis.potential.position(index, None)?;
        self.a[i] = value;
        Ok(())
    }

    pub fn set_b(&mut self, index: MultiIndex, sign: Sign, value: f64) -> Result<()> {
        let i = self.basis.solenoidal.position(index, Some(sign))?;
        self.b[i] = value;
        Ok(())
    }

    /// Truncation to entries whose zero lies below `cutoff`.
    pub fn restrict(&self, cutoff: f64) -> Self {
        let keep_a = self.basis.potential.entries.iter().map(|e| e.zero < cutoff);
        let keep_b = self.basis.solenoidal.entries.iter().map(|e| e.zero < cutoff);
        Self {
            basis: self.basis.restrict_cutoff(cutoff),
            a: self.a.iter().zip(keep_a).filter(|(_, k)| *k).map(|(x, _)| *x).collect(),
            b: self.b.iter().zip(keep_b).filter(|(_, k)| *k).map(|(x, _)| *x).collect(),
        }
    }

    /// Potential entries paired with their coefficients.
    pub fn potential_terms(&self) -> impl Iterator<Item = (&EigenEntry, f64)> {
        self.basis.potential.entries.iter().zip(self.a.iter().copied())
    }

    pub fn solenoidal_terms(&self) -> impl Iterator<Item = (&EigenEntry, f64)> {
        self.basis.solenoidal.entries.iter().zip(self.b.iter().copied())
    }

    /// `(index, b⁺, b⁻)` for each solenoidal multi-index, in table order of the `+` entries.
    pub fn solenoidal_pairs(&self) -> Vec<(MultiIndex, f64, f64)> {
        let mut minus: HashMap<MultiIndex, f64> = HashMap::new();
        for (e, b) in self.solenoidal_terms() {
            if e.family == EntryFamily::CurlMinus {
                minus.insert(e.index, b);
            }
        }
        self.solenoidal_terms()
            .filter(|(e, _)| e.family == EntryFamily::CurlPlus)
            .map(|(e, b)| (e.index, b, minus.get(&e.index).copied().unwrap_or(0.0)))
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_json_value())?)
    }

    fn to_json_value(&self) -> CoeffsJson {
        CoeffsJson {
            radius: self.radius(),
            cutoff: self.cutoff(),
            potential: self
                .potential_terms()
                .map(|(e, a)| PotentialJson {
                    n: e.index.n,
                    m: e.index.m,
                    k: e.index.k,
                    a,
                })
                .collect(),
            solenoidal: self
                .solenoidal_pairs()
                .into_iter()
                .map(|(i, p, m)| SolenoidalJson {
                    n: i.n,
                    m: i.m,
                    k: i.k,
                    b_plus: p,
                    b_minus: m,
                })
                .collect(),
        }
    }

    /// Rebuilds the basis from `radius` and `cutoff`; absent entries are zero.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: CoeffsJson = serde_json::from_str(text)?;
        let basis = Basis::new(raw.radius, raw.cutoff).map_err(|e| Error::Format(e.to_string()))?;
        let mut out = Self::zeros(&basis);
        let fmt = |e: Error| Error::Format(e.to_string());
        for p in raw.potential {
            let index = MultiIndex::new(p.n, p.m, p.k).map_err(fmt)?;
            out.set_a(index, p.a).map_err(fmt)?;
        }
        for s in raw.solenoidal {
            let index = MultiIndex::new(s.n, s.m, s.k).map_err(fmt)?;
            out.set_b(index, Sign::Plus, s.b_plus).map_err(fmt)?;
            out.set_b(index, Sign::Minus, s.b_minus).map_err(fmt)?;
        }
        Ok(out)
    }
}

#[derive(Serialize, Deserialize)]
struct PotentialJson {
    n: usize,
    m: usize,
    k: i64,
    a: f64,
}

#[derive(Serialize, Deserialize)]
struct SolenoidalJson {
    n: usize,
    m: usize,
    k: i64,
    b_plus: f64,
    b_minus: f64,
}

#[derive(Serialize, Deserialize)]
struct CoeffsJson {
    radius: f64,
    cutoff: f64,
    potential: Vec<PotentialJson>,
    solenoidal: Vec<SolenoidalJson>,
}

fn check_grid(grid: &BallGrid, basis: &Basis) -> Result<()> {
    if (grid.radius - basis.radius).abs() > 1e-14 * basis.radius {
        return Err(Error::GridMismatch);
    }
    if basis.n_max() > grid.max_degree() {
        return Err(Error::Resolution(format!(
            "basis degree {} exceeds the degree {} resolved by a {}×{} angular grid",
            basis.n_max(),
            grid.max_degree(),
            grid.ntheta,
            grid.nphi
        )));
    }
    Ok(())
}

/// Projects `f` onto every basis field by grid quadrature.
pub fn analyze(f: &VectorField, basis: &Basis) -> Result<SpectralCoeffs> {
    let grid = &f.grid;
    check_grid(grid, basis)?;
    let tables = AngularTables::new(grid, basis.n_max());
    let shells = analyze_shells(f, &tables);
    let radial_weight: Vec<f64> = grid.r.iter().zip(&grid.wr).map(|(r, w)| w * r * r).collect();

    let a = basis
        .potential
        .entries
        .par_iter()
        .map(|e| {
            let h = harmonic_index(e.index.n, e.index.k);
            let s: f64 = (0..grid.nr)
                .map(|i| {
                    let (dr, tang) = potential_radial(e.index.n, e.wavenumber, grid.r[i]);
                    radial_weight[i] * (dr * shells[i].radial[h] + tang * shells[i].tangential[h])
                })
                .sum();
            e.norm_const * s
        })
        .collect();
    let b = basis
        .solenoidal
        .entries
        .par_iter()
        .map(|e| {
            let h = harmonic_index(e.index.n, e.index.k);
            let sign = e.sign().map_or(1.0, Sign::factor);
            let s: f64 = (0..grid.nr)
                .map(|i| {
                    let (pr, ht, f) = solenoidal_radial(e.index.n, e.wavenumber, grid.r[i]);
                    let sh = &shells[i];
                    radial_weight[i]
                        * (pr * sh.radial[h] + ht * sh.tangential[h] + sign * f * sh.circulation[h])
                })
                .sum();
            e.norm_const * s
        })
        .collect();
    Ok(SpectralCoeffs {
        basis: basis.clone(),
        a,
        b,
    })
}

fn shell_sums(c: &SpectralCoeffs, grid: &BallGrid, part: Part) -> Vec<ShellSpectrum> {
    let degree = c.basis.n_max();
    (0..grid.nr)
        .into_par_iter()
        .map(|i| {
            let r = grid.r[i];
            let mut s = ShellSpectrum::zeros(degree);
            if part != Part::Solenoidal {
                for (e, a) in c.potential_terms().filter(|(_, a)| *a != 0.0) {
                    let h = harmonic_index(e.index.n, e.index.k);
                    let (dr, tang) = potential_radial(e.index.n, e.wavenumber, r);
                    s.radial[h] += a * e.norm_const * dr;
                    s.tangential[h] += a * e.norm_const * tang;
                }
            }
            if part != Part::Potential {
                for (e, b) in c.solenoidal_terms().filter(|(_, b)| *b != 0.0) {
                    let h = harmonic_index(e.index.n, e.index.k);
                    let sign = e.sign().map_or(1.0, Sign::factor);
                    let (pr, ht, f) = solenoidal_radial(e.index.n, e.wavenumber, r);
                    let w = b * e.norm_const;
                    s.radial[h] += w * pr;
                    s.tangential[h] += w * ht;
                    s.circulation[h] += w * sign * f;
                }
            }
            s
        })
        .collect()
}

/// Partial sum of the selected families, sampled on `grid`.
pub fn synthesize(c: &SpectralCoeffs, grid: &BallGrid, part: Part) -> Result<VectorField> {
    check_grid(grid, &c.basis)?;
    let tables = AngularTables::new(grid, c.basis.n_max());
    Ok(synthesize_shells(grid, &tables, &shell_sums(c, grid, part)))
}

/// `S⁰_N = Σ a_κ q_κ`
pub fn synthesize_potential(c: &SpectralCoeffs, grid: &BallGrid) -> Result<VectorField> {
    synthesize(c, grid, Part::Potential)
}

/// `S¹_N = Σ (b⁺ u⁺ + b⁻ u⁻)`
pub fn synthesize_solenoidal(c: &SpectralCoeffs, grid: &BallGrid) -> Result<VectorField> {
    synthesize(c, grid, Part::Solenoidal)
}

/// Scalar `h = Σ (a_κ/ν_κ) g_κ` with `∇h = S⁰_N`, sampled on `grid`.
pub fn neumann_potential(c: &SpectralCoeffs, grid: &BallGrid) -> Result<ScalarField> {
    check_grid(grid, &c.basis)?;
    let tables = AngularTables::new(grid, c.basis.n_max());
    let degree = c.basis.n_max();
    let shells: Vec<ShellSpectrum> = grid
        .r
        .par_iter()
        .map(|&r| {
            let mut s = ShellSpectrum::zeros(degree);
            for (e, a) in c.potential_terms().filter(|(_, a)| *a != 0.0) {
                let (f, _) = psi_pair(e.index.n, e.wavenumber * r);
                s.radial[harmonic_index(e.index.n, e.index.k)] += a * e.norm_const * f;
            }
            s
        })
        .collect();
    let v = synthesize_shells(grid, &tables, &shells);
    Ok(ScalarField {
        grid: grid.clone(),
        values: v.vr,
    })
}

/// A truncated expansion evaluated pointwise, for use with the
/// finite-difference oracle and at arbitrary points.
#[derive(Clone, Debug)]
pub struct Expansion {
    n_max: usize,
    terms: Vec<(EigenEntry, f64)>,
}

impl Expansion {
    pub fn new(c: &SpectralCoeffs, part: Part) -> Self {
        let mut terms = Vec::new();
        if part != Part::Solenoidal {
            terms.extend(c.potential_terms().filter(|(_, a)| *a != 0.0).map(|(e, a)| (*e, a)));
        }
        if part != Part::Potential {
            terms.extend(c.solenoidal_terms().filter(|(_, b)| *b != 0.0).map(|(e, b)| (*e, b)));
        }
        Self {
            n_max: terms.iter().map(|(e, _)| e.index.n).max().unwrap_or(0),
            terms,
        }
    }

    pub fn from_terms(terms: Vec<(EigenEntry, f64)>) -> Self {
        Self {
            n_max: terms.iter().map(|(e, _)| e.index.n).max().unwrap_or(0),
            terms,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

impl VectorFn for Expansion {
    fn eval(&self, p: Spherical) -> [f64; 3] {
        let leg = NormalizedLegendre::new(self.n_max, p.theta);
        let mut out = [0.0; 3];
        let mut cache: Option<(usize, f64, [f64; 3])> = None;
        for (e, coef) in &self.terms {
            let n = e.index.n;
            let a = Angular::from_legendre(&leg, n, e.index.k, p.phi);
            let w = coef * e.norm_const;
            let radial = match cache {
                Some((cn, ck, v)) if cn == n && ck == e.wavenumber => v,
                _ => {
                    let v = if e.family == EntryFamily::GradDiv {
                        let (dr, t) = potential_radial(n, e.wavenumber, p.r);
                        [dr, t, 0.0]
                    } else {
                        let (pr, h, f) = solenoidal_radial(n, e.wavenumber, p.r);
                        [pr, h, f]
                    };
                    cache = Some((n, e.wavenumber, v));
                    v
                }
            };
            let sign = e.sign().map_or(0.0, Sign::factor);
            out[0] += w * radial[0] * a.y;
            out[1] += w * (radial[1] * a.h_theta + sign * radial[2] * a.h_phi);
            out[2] += w * (radial[1] * a.h_phi - sign * radial[2] * a.h_theta);
        }
        out
    }
}

/// Pointwise `h = Σ (a_κ/ν_κ) g_κ`.
#[derive(Clone, Debug)]
pub struct NeumannPotential {
    n_max: usize,
    terms: Vec<(EigenEntry, f64)>,
}

impl NeumannPotential {
    pub fn new(c: &SpectralCoeffs) -> Self {
        let terms: Vec<_> = c.potential_terms().filter(|(_, a)| *a != 0.0).map(|(e, a)| (*e, a)).collect();
        Self {
            n_max: terms.iter().map(|(e, _)| e.index.n).max().unwrap_or(0),
            terms,
        }
    }
}

impl ScalarFn for NeumannPotential {
    fn eval(&self, p: Spherical) -> f64 {
        let leg = NormalizedLegendre::new(self.n_max, p.theta);
        self.terms
            .iter()
            .map(|(e, a)| {
                let (f, _) = psi_pair(e.index.n, e.wavenumber * p.r);
                a * e.norm_const * f * Angular::from_legendre(&leg, e.index.n, e.index.k, p.phi).y
            })
            .sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParsevalReport {
    pub total: f64,
    pub potential_share: f64,
    pub solenoidal_share: f64,
    pub defect: f64,
}

/// `‖f‖²`, `Σa²`, `Σ(b⁺² + b⁻²)` and the remainder.
pub fn parseval_report(f: &VectorField, c: &SpectralCoeffs) -> ParsevalReport {
    let total = f.norm_squared();
    let potential_share = c.potential_energy();
    let solenoidal_share = c.solenoidal_energy();
    ParsevalReport {
        total,
        potential_share,
        solenoidal_share,
        defect: total - potential_share - solenoidal_share,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> (Basis, BallGrid) {
        (Basis::new(1.0, 9.0).unwrap(), BallGrid::new(1.0, 24, 16, 32).unwrap())
    }

    #[test]
    fn single_mode_coefficients() {
        let (basis, grid) = small();
        let e = basis.potential.entries[5];
        let f = VectorField::from_fn(&grid, |p| e.field(p));
        let c = analyze(&f, &basis).unwrap();
        for (i, a) in c.a.iter().enumerate() {
            let expect = if i == 5 { 1.0 } else { 0.0 };
            assert!((a - expect).abs() < 1e-10, "{i}: {a}");
        }
        assert!(c.b.iter().all(|b| b.abs() < 1e-10));
    }

    #[test]
    fn synthesis_reproduces_pointwise_fields() {
        let (basis, grid) = small();
        let mut c = SpectralCoeffs::zeros(&basis);
        for (i, a) in c.a.iter_mut().enumerate() {
            *a = (i as f64 * 0.7).sin();
        }
        for (i, b) in c.b.iter_mut().enumerate() {
            *b = (i as f64 * 0.3).cos();
        }
        let v = synthesize(&c, &grid, Part::Both).unwrap();
        let exp = Expansion::new(&c, Part::Both);
        for idx in (0..grid.len()).step_by(97) {
            let p = grid.node(idx);
            let mut direct = [0.0; 3];
            for (e, w) in c.potential_terms().chain(c.solenoidal_terms()) {
                let q = e.field(p);
                for x in 0..3 {
                    direct[x] += w * q[x];
                }
            }
            let e = exp.eval(p);
            for x in 0..3 {
                assert!((v.at(idx)[x] - direct[x]).abs() < 1e-11);
                assert!((e[x] - direct[x]).abs() < 1e-11);
            }
        }
        let back = analyze(&v, &basis).unwrap();
        assert!(back.axpy(-1.0, &c).unwrap().energy().sqrt() < 1e-10);
    }

    #[test]
    fn neumann_potential_matches_scalar_eigenfunctions() {
        let (basis, grid) = small();
        let mut c = SpectralCoeffs::zeros(&basis);
        c.a[3] = 2.0;
        let h = neumann_potential(&c, &grid).unwrap();
        let e = basis.potential.entries[3];
        let pointwise = NeumannPotential::new(&c);
        for idx in (0..grid.len()).step_by(211) {
            let p = grid.node(idx);
            let g = e.scalar(p).unwrap();
            assert!((h.values[idx] - 2.0 * g / e.wavenumber).abs() < 1e-12);
            assert!((pointwise.eval(p) - h.values[idx]).abs() < 1e-12);
        }
    }

    #[test]
    fn restriction_and_json() {
        let (basis, _) = small();
        let mut c = SpectralCoeffs::zeros(&basis);
        for (i, a) in c.a.iter_mut().enumerate() {
            *a = i as f64 / 7.0;
        }
        for (i, b) in c.b.iter_mut().enumerate() {
            *b = -(i as f64) / 3.0;
        }
        let r = c.restrict(6.0);
        assert!(r.a.len() < c.a.len());
        assert!(r.basis.potential.entries.iter().all(|e| e.zero < 6.0));
        for (e, a) in r.potential_terms() {
            assert_eq!(a, c.get_a(e.index).unwrap());
        }
        let text = c.to_json().unwrap();
        let back = SpectralCoeffs::from_json(&text).unwrap();
        assert_eq!(back.a, c.a);
        assert_eq!(back.b, c.b);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(v["solenoidal"][0]["b_plus"].is_number());
        assert_eq!(v["solenoidal"].as_array().unwrap().len() * 2, c.b.len());
    }

    #[test]
    fn resolution_and_radius_checks() {
        let basis = Basis::new(1.0, 20.0).unwrap();
        let coarse = BallGrid::new(1.0, 8, 6, 12).unwrap();
        let f = VectorField::zeros(&coarse);
        assert!(matches!(analyze(&f, &basis), Err(Error::Resolution(_))));
        let other = BallGrid::new(2.0, 8, 40, 80).unwrap();
        assert!(matches!(analyze(&VectorField::zeros(&other), &basis), Err(Error::GridMismatch)));
    }
}
