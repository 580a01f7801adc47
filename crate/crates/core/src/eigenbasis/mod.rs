//! Eigenvalues and normalized eigenfields of `−∇div` (potential family) and
//! `rot` (solenoidal family) in the ball `|x| < R`.

pub mod modes;

use std::cmp::Ordering;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Spherical;
use crate::specialfn::{psi_pair, PsiConfig, ZeroKind, ZeroRequest};
pub use modes::{
    potential_field, potential_radial, radial_square_integral, solenoidal_field, solenoidal_radial,
    Angular,
};

/// `κ = (n, m, k)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex {
    pub n: usize,
    pub m: usize,
    pub k: i64,
}

impl MultiIndex {
    pub fn new(n: usize, m: usize, k: i64) -> Result<Self> {
        if m == 0 || k.unsigned_abs() as usize > n {
            return Err(Error::Domain(format!("invalid multi-index ({n}, {m}, {k})")));
        }
        Ok(Self { n, m, k })
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.n, self.m, self.k)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    GradDiv,
    Curl,
}

impl Family {
    fn zero_kind(self) -> ZeroKind {
        match self {
            Family::GradDiv => ZeroKind::PsiPrime,
            Family::Curl => ZeroKind::Psi,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryFamily {
    GradDiv,
    CurlPlus,
    CurlMinus,
}

/// One eigenfield. `zero` is `α_{n,m}` or `ρ_{n,m}`, `wavenumber` is
/// `zero / R`, and `eigenvalue` is `ν²` or `±λ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenEntry {
    pub index: MultiIndex,
    pub family: EntryFamily,
    pub zero: f64,
    pub wavenumber: f64,
    pub eigenvalue: f64,
    pub norm_const: f64,
}

impl EigenEntry {
    /// Field value at `p`.
    pub fn field(&self, p: Spherical) -> [f64; 3] {
        let MultiIndex { n, k, .. } = self.index;
        match self.family {
            EntryFamily::GradDiv => potential_field(n, k, self.wavenumber, self.norm_const, p),
            EntryFamily::CurlPlus => {
                solenoidal_field(n, k, self.wavenumber, 1.0, self.norm_const, p)
            }
            EntryFamily::CurlMinus => {
                solenoidal_field(n, k, self.wavenumber, -1.0, self.norm_const, p)
            }
        }
    }

    /// The unit-norm Neumann eigenfunction `g` with `∇g = ν q`; potential entries only.
    pub fn scalar(&self, p: Spherical) -> Option<f64> {
        (self.family == EntryFamily::GradDiv).then(|| {
            let MultiIndex { n, k, .. } = self.index;
            let (f, _) = psi_pair(n, self.wavenumber * p.r);
            self.wavenumber * self.norm_const * f * Angular::at(n, k, p.theta, p.phi).y
        })
    }

    pub fn sign(&self) -> Option<Sign> {
        match self.family {
            EntryFamily::GradDiv => None,
            EntryFamily::CurlPlus => Some(Sign::Plus),
            EntryFamily::CurlMinus => Some(Sign::Minus),
        }
    }
}

/// Entries sharing `(n, m)` and eigenvalue, as a contiguous range of the table.
#[derive(Clone, Debug, PartialEq)]
pub struct Eigenspace {
    pub n: usize,
    pub m: usize,
    pub eigenvalue: f64,
    pub range: std::ops::Range<usize>,
}

impl Eigenspace {
    pub fn dim(&self) -> usize {
        self.range.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenTable {
    pub radius: f64,
    pub cutoff: f64,
    pub family: Family,
    pub entries: Vec<EigenEntry>,
}

/// Radial data shared by the `2n+1` members of an eigenspace.
#[derive(Clone, Copy, Debug, PartialEq)]
struct RadialMode {
    n: usize,
    m: usize,
    zero: f64,
    norm_const: f64,
}

pub fn build_eigentable(family: Family, radius: f64, cutoff: f64) -> Result<EigenTable> {
    EigenTable::build(family, radius, cutoff)
}

impl EigenTable {
    pub fn build(family: Family, radius: f64, cutoff: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Domain(format!("radius {radius} must be positive")));
        }
        let config = PsiConfig::default();
        if !(cutoff > 0.0) || cutoff > config.z_max {
            return Err(Error::Domain(format!("cutoff {cutoff} outside (0, {}]", config.z_max)));
        }
        // The first zero of ψₙ and of ψₙ′ exceeds n, so orders n ≥ cutoff contribute nothing.
        let first_order = if family == Family::Curl { 1 } else { 0 };
        let last_order = cutoff.ceil() as usize;
        if last_order > config.n_max + 1 {
            return Err(Error::Domain(format!(
                "cutoff {cutoff} needs orders beyond n_max = {}",
                config.n_max
            )));
        }
        let orders: Vec<usize> = (first_order..last_order.min(config.n_max + 1)).collect();
        let radial: Vec<Vec<RadialMode>> = orders
            .par_iter()
            .map(|&n| radial_modes(&config, family, n, cutoff))
            .collect::<Result<_>>()?;

        let mut entries = Vec::new();
        for mode in radial.into_iter().flatten() {
            let wavenumber = mode.zero / radius;
            // both constants carry R^{-3/2}, dimensionless part computed on the unit ball
            let norm_const = mode.norm_const / radius.powf(1.5);
            for k in -(mode.n as i64)..=mode.n as i64 {
                let index = MultiIndex { n: mode.n, m: mode.m, k };
                match family {
                    Family::GradDiv => entries.push(EigenEntry {
                        index,
                        family: EntryFamily::GradDiv,
                        zero: mode.zero,
                        wavenumber,
                        eigenvalue: wavenumber * wavenumber,
                        norm_const: norm_const * radius,
                    }),
                    Family::Curl => {
                        for (fam, s) in [(EntryFamily::CurlPlus, 1.0), (EntryFamily::CurlMinus, -1.0)] {
                            entries.push(EigenEntry {
                                index,
                                family: fam,
                                zero: mode.zero,
                                wavenumber,
                                eigenvalue: s * wavenumber,
                                norm_const,
                            });
                        }
                    }
                }
            }
        }
        entries.sort_by(entry_order);
        Ok(Self {
            radius,
            cutoff,
            family,
            entries,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Keeps entries with `n ≤ n_max`.
    pub fn restrict_degree(&self, n_max: usize) -> Self {
        Self {
            entries: self.entries.iter().filter(|e| e.index.n <= n_max).copied().collect(),
            ..self.clone()
        }
    }

    /// Keeps entries whose zero is below `cutoff`.
    pub fn restrict_cutoff(&self, cutoff: f64) -> Self {
        Self {
            cutoff: cutoff.min(self.cutoff),
            entries: self.entries.iter().filter(|e| e.zero < cutoff).copied().collect(),
            ..self.clone()
        }
    }

    pub fn position(&self, index: MultiIndex, sign: Option<Sign>) -> Result<usize> {
        self.entries
            .iter()
            .position(|e| e.index == index && e.sign() == sign)
            .ok_or(Error::NotInTable(index))
    }

    pub fn get(&self, index: MultiIndex, sign: Option<Sign>) -> Result<&EigenEntry> {
        Ok(&self.entries[self.position(index, sign)?])
    }

    /// Contiguous eigenspaces, in table order.
    pub fn eigenspaces(&self) -> Vec<Eigenspace> {
        let mut out: Vec<Eigenspace> = Vec::new();
        for (i, e) in self.entries.iter().enumerate() {
            match out.last_mut() {
                Some(s) if s.n == e.index.n && s.m == e.index.m && s.eigenvalue == e.eigenvalue => {
                    s.range.end = i + 1
                }
                _ => out.push(Eigenspace {
                    n: e.index.n,
                    m: e.index.m,
                    eigenvalue: e.eigenvalue,
                    range: i..i + 1,
                }),
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&EigenTableJson::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: EigenTableJson = serde_json::from_str(text)?;
        raw.try_into()
    }
}

fn entry_order(a: &EigenEntry, b: &EigenEntry) -> Ordering {
    let key = |e: &EigenEntry| (e.index.n, e.index.m, e.eigenvalue < 0.0, e.index.k);
    a.eigenvalue
        .abs()
        .total_cmp(&b.eigenvalue.abs())
        .then_with(|| key(a).cmp(&key(b)))
}

fn radial_modes(config: &PsiConfig, family: Family, n: usize, cutoff: f64) -> Result<Vec<RadialMode>> {
    let zeros = config.find_zeros(family.zero_kind(), n, ZeroRequest::Below(cutoff))?;
    Ok(zeros
        .entries
        .iter()
        .map(|z| {
            let integral = radial_square_integral(n, z.zero);
            let norm_const = match family {
                // c_q = 1 / (ν ‖ψₙ(νr)Y‖) on the unit ball
                Family::GradDiv => 1.0 / (z.zero * integral.sqrt()),
                // c_u = 1 / √(2 n(n+1) ∫ψₙ²r²dr)
                Family::Curl => 1.0 / (2.0 * (n * (n + 1)) as f64 * integral).sqrt(),
            };
            RadialMode {
                n,
                m: z.m,
                zero: z.zero,
                norm_const,
            }
        })
        .collect())
}

#[derive(Serialize, Deserialize)]
struct EntryJson {
    n: usize,
    m: usize,
    k: i64,
    eigenvalue: f64,
    norm_const: f64,
}

#[derive(Serialize, Deserialize)]
struct EigenTableJson {
    radius: f64,
    cutoff: f64,
    family: Family,
    entries: Vec<EntryJson>,
}

impl From<&EigenTable> for EigenTableJson {
    fn from(t: &EigenTable) -> Self {
        Self {
            radius: t.radius,
            cutoff: t.cutoff,
            family: t.family,
            entries: t
                .entries
                .iter()
                .map(|e| EntryJson {
                    n: e.index.n,
                    m: e.index.m,
                    k: e.index.k,
                    eigenvalue: e.eigenvalue,
                    norm_const: e.norm_const,
                })
                .collect(),
        }
    }
}

impl TryFrom<EigenTableJson> for EigenTable {
    type Error = Error;

    fn try_from(raw: EigenTableJson) -> Result<Self> {
        if !(raw.radius > 0.0) {
            return Err(Error::Format("radius must be positive".into()));
        }
        let entries = raw
            .entries
            .into_iter()
            .map(|e| {
                let index =
                    MultiIndex::new(e.n, e.m, e.k).map_err(|err| Error::Format(err.to_string()))?;
                let (family, wavenumber) = match raw.family {
                    Family::GradDiv if e.eigenvalue > 0.0 => {
                        (EntryFamily::GradDiv, e.eigenvalue.sqrt())
                    }
                    Family::Curl if e.eigenvalue > 0.0 => (EntryFamily::CurlPlus, e.eigenvalue),
                    Family::Curl if e.eigenvalue < 0.0 => (EntryFamily::CurlMinus, -e.eigenvalue),
                    _ => return Err(Error::Format(format!("bad eigenvalue {}", e.eigenvalue))),
                };
                Ok(EigenEntry {
                    index,
                    family,
                    zero: wavenumber * raw.radius,
                    wavenumber,
                    eigenvalue: e.eigenvalue,
                    norm_const: e.norm_const,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            radius: raw.radius,
            cutoff: raw.cutoff,
            family: raw.family,
            entries,
        })
    }
}

/// The combined basis: potential fields `q_κ` and curl fields `u_κ^±`.
#[derive(Clone, Debug, PartialEq)]
pub struct Basis {
    pub radius: f64,
    pub cutoff: f64,
    pub potential: EigenTable,
    pub solenoidal: EigenTable,
}

impl Basis {
    pub fn new(radius: f64, cutoff: f64) -> Result<Self> {
        Ok(Self {
            radius,
            cutoff,
            potential: EigenTable::build(Family::GradDiv, radius, cutoff)?,
            solenoidal: EigenTable::build(Family::Curl, radius, cutoff)?,
        })
    }

    pub fn restrict_degree(&self, n_max: usize) -> Self {
        Self {
            potential: self.potential.restrict_degree(n_max),
            solenoidal: self.solenoidal.restrict_degree(n_max),
            ..self.clone()
        }
    }

    pub fn restrict_cutoff(&self, cutoff: f64) -> Self {
        Self {
            cutoff: cutoff.min(self.cutoff),
            potential: self.potential.restrict_cutoff(cutoff),
            solenoidal: self.solenoidal.restrict_cutoff(cutoff),
            ..self.clone()
        }
    }

    /// Highest degree present in either table.
    pub fn n_max(&self) -> usize {
        self.potential
            .entries
            .iter()
            .chain(&self.solenoidal.entries)
            .map(|e| e.index.n)
            .max()
            .unwrap_or(0)
    }

    pub fn entries(&self) -> impl Iterator<Item = &EigenEntry> {
        self.potential.entries.iter().chain(&self.solenoidal.entries)
    }

    pub fn len(&self) -> usize {
        self.potential.len() + self.solenoidal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn check_point(radius: f64, p: Spherical) -> Result<()> {
    if !(p.r > 0.0 && p.r <= radius * (1.0 + 1e-12)) {
        return Err(Error::Domain(format!("radius {} outside (0, {radius}]", p.r)));
    }
    Ok(())
}

/// `g_κ` at `p`.
pub fn neumann_scalar_eigenfunction(table: &EigenTable, index: MultiIndex, p: Spherical) -> Result<f64> {
    check_point(table.radius, p)?;
    let e = table.get(index, None)?;
    Ok(e.scalar(p).expect("potential entry"))
}

/// `q_κ = ∇g_κ / ν_κ` at `p`.
pub fn grad_div_eigenfunction(table: &EigenTable, index: MultiIndex, p: Spherical) -> Result<[f64; 3]> {
    check_point(table.radius, p)?;
    Ok(table.get(index, None)?.field(p))
}

/// `u_κ^±` at `p`.
pub fn curl_eigenfunction(
    table: &EigenTable,
    index: MultiIndex,
    sign: Sign,
    p: Spherical,
) -> Result<[f64; 3]> {
    if index.n == 0 {
        return Err(Error::Domain("curl eigenfields with n = 0 vanish identically".into()));
    }
    check_point(table.radius, p)?;
    Ok(table.get(index, Some(sign))?.field(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specialfn::psi;

    /// Bisection on a centered-difference derivative of ψₙ (no Newton, no table).
    fn alpha_oracle(n: usize, lo: f64, hi: f64) -> f64 {
        let d = |z: f64| {
            let h = 1e-6;
            (psi(n, z + h).unwrap().value - psi(n, z - h).unwrap().value) / (2.0 * h)
        };
        let (mut lo, mut hi) = (lo, hi);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if d(lo) * d(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn grad_div_table_below_five() {
        let t = EigenTable::build(Family::GradDiv, 1.0, 5.0).unwrap();
        assert_eq!(t.len(), 16);
        let spaces = t.eigenspaces();
        let pairs: Vec<(usize, usize)> = spaces.iter().map(|s| (s.n, s.m)).collect();
        assert_eq!(pairs, vec![(1, 1), (2, 1), (0, 1), (3, 1)]);
        let expected = [
            alpha_oracle(1, 1.5, 2.5),
            alpha_oracle(2, 3.0, 3.6),
            alpha_oracle(0, 4.0, 4.6),
            alpha_oracle(3, 4.3, 4.8),
        ];
        for (s, a) in spaces.iter().zip(expected) {
            assert!((s.eigenvalue.sqrt() - a).abs() < 1e-7, "{s:?} vs {a}");
            assert_eq!(s.dim(), 2 * s.n + 1);
        }
        assert!((spaces[0].eigenvalue.sqrt() - 2.08157598).abs() < 1e-8);
        assert!((spaces[2].eigenvalue.sqrt() - 4.49340946).abs() < 1e-8);
        assert!(t.entries.windows(2).all(|w| w[0].eigenvalue <= w[1].eigenvalue));
    }

    #[test]
    fn curl_tables() {
        // ρ₁₁ ≈ 4.4934 is the smallest zero of any ψₙ with n ≥ 1
        assert!(EigenTable::build(Family::Curl, 1.0, 4.0).unwrap().is_empty());
        let t = EigenTable::build(Family::Curl, 1.0, 5.0).unwrap();
        assert_eq!(t.len(), 6);
        for e in &t.entries {
            assert_eq!((e.index.n, e.index.m), (1, 1));
            assert!((e.eigenvalue.abs() - 4.493409457909064).abs() < 1e-12);
        }
        let spaces = t.eigenspaces();
        assert_eq!(spaces.len(), 2);
        assert_eq!(spaces[0].eigenvalue, -spaces[1].eigenvalue);
    }

    #[test]
    fn eigenvalues_scale_with_radius() {
        let a = EigenTable::build(Family::GradDiv, 1.0, 12.0).unwrap();
        let b = EigenTable::build(Family::GradDiv, 2.0, 12.0).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.entries.iter().zip(&b.entries) {
            assert!((y.eigenvalue - x.eigenvalue / 4.0).abs() <= 1e-15 * x.eigenvalue);
        }
        let c = EigenTable::build(Family::Curl, 2.0, 12.0).unwrap();
        let d = EigenTable::build(Family::Curl, 1.0, 12.0).unwrap();
        for (x, y) in c.entries.iter().zip(&d.entries) {
            assert!((x.eigenvalue - y.eigenvalue / 2.0).abs() <= 1e-15 * y.eigenvalue.abs());
        }
    }

    #[test]
    fn norm_constants_match_closed_forms() {
        for radius in [1.0, 0.6, 2.5] {
            let basis = Basis::new(radius, 20.0).unwrap();
            for e in &basis.potential.entries {
                let n = e.index.n as f64;
                let f = psi(e.index.n, e.zero).unwrap().value;
                let integral = 0.5 * radius.powi(3) * (1.0 - n * (n + 1.0) / (e.zero * e.zero)) * f * f;
                let expect = 1.0 / (e.wavenumber * integral.sqrt());
                assert!((e.norm_const - expect).abs() < 1e-11 * expect, "{:?}", e.index);
            }
            for e in &basis.solenoidal.entries {
                let n = e.index.n as f64;
                let d = psi(e.index.n, e.zero).unwrap().derivative;
                let integral = 0.5 * radius.powi(3) * d * d;
                let expect = 1.0 / (2.0 * n * (n + 1.0) * integral).sqrt();
                assert!((e.norm_const - expect).abs() < 1e-11 * expect, "{:?}", e.index);
            }
        }
    }

    #[test]
    fn completeness_against_sign_changes() {
        use crate::specialfn::zeros::count_sign_changes;
        let cutoff = 30.0;
        let t = EigenTable::build(Family::GradDiv, 1.0, cutoff).unwrap();
        let s = EigenTable::build(Family::Curl, 1.0, cutoff).unwrap();
        for n in 0..=32usize {
            let pot = t.entries.iter().filter(|e| e.index.n == n && e.index.k == 0).count();
            let fine = count_sign_changes(ZeroKind::PsiPrime, n, cutoff, 0.01);
            assert_eq!(pot, fine, "grad_div n={n}");
            if n >= 1 {
                let sol = s
                    .entries
                    .iter()
                    .filter(|e| e.index.n == n && e.index.k == 0 && e.eigenvalue > 0.0)
                    .count();
                assert_eq!(sol, count_sign_changes(ZeroKind::Psi, n, cutoff, 0.01), "curl n={n}");
            }
        }
    }

    #[test]
    fn boundary_normal_components_vanish() {
        let basis = Basis::new(1.3, 12.0).unwrap();
        for e in basis.entries() {
            for &(t, p) in &[(0.2, 0.1), (1.5, 2.0), (2.8, 5.0)] {
                let v = e.field(Spherical::new(1.3, t, p));
                assert!(v[0].abs() <= 1e-10, "{:?} {:?}: {}", e.family, e.index, v[0]);
            }
        }
    }

    #[test]
    fn degenerate_potential_modes_are_radial() {
        let t = EigenTable::build(Family::GradDiv, 1.0, 20.0).unwrap();
        for e in t.entries.iter().filter(|e| e.index.n == 0) {
            let v = e.field(Spherical::new(0.4, 1.0, 2.0));
            assert_eq!((v[1], v[2]), (0.0, 0.0));
            assert!(v[0] != 0.0);
        }
    }

    #[test]
    fn lookups_and_errors() {
        let basis = Basis::new(1.0, 6.0).unwrap();
        let p = Spherical::new(0.5, 1.0, 1.0);
        let k = MultiIndex::new(1, 1, 0).unwrap();
        assert!(grad_div_eigenfunction(&basis.potential, k, p).is_ok());
        assert!(curl_eigenfunction(&basis.solenoidal, k, Sign::Minus, p).is_ok());
        let missing = MultiIndex::new(5, 3, 0).unwrap();
        assert!(matches!(
            grad_div_eigenfunction(&basis.potential, missing, p),
            Err(Error::NotInTable(_))
        ));
        let zero = MultiIndex::new(0, 1, 0).unwrap();
        assert!(curl_eigenfunction(&basis.solenoidal, zero, Sign::Plus, p).is_err());
        assert!(neumann_scalar_eigenfunction(&basis.potential, k, Spherical::new(1.5, 1.0, 1.0)).is_err());
        assert!(MultiIndex::new(1, 0, 0).is_err());
        assert!(MultiIndex::new(1, 1, 2).is_err());
    }

    #[test]
    fn json_round_trip() {
        let t = EigenTable::build(Family::Curl, 1.5, 9.0).unwrap();
        let text = t.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["family"], "curl");
        let keys: Vec<&String> = v["entries"][0].as_object().unwrap().keys().collect();
        assert_eq!(keys.len(), 5);
        let back = EigenTable::from_json(&text).unwrap();
        assert_eq!(back.len(), t.len());
        for (a, b) in back.entries.iter().zip(&t.entries) {
            assert_eq!(a.index, b.index);
            assert_eq!(a.family, b.family);
            assert_eq!(a.norm_const, b.norm_const);
            assert!((a.zero - b.zero).abs() < 1e-14);
        }
    }
}
