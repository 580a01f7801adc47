use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::psi::{psi_pair, psi_second_derivative, PsiConfig};
use crate::error::{Error, Result};

/// Which function's zeros are tabulated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroKind {
    /// zeros `ρ_{n,m}` of `ψₙ`
    Psi,
    /// zeros `α_{n,m}` of `ψₙ′`
    PsiPrime,
}

impl ZeroKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ZeroKind::Psi => "psi",
            ZeroKind::PsiPrime => "psi_prime",
        }
    }

    /// Function value and its derivative at `z`.
    fn eval(self, n: usize, z: f64) -> (f64, f64) {
        let (v, d) = psi_pair(n, z);
        match self {
            ZeroKind::Psi => (v, d),
            ZeroKind::PsiPrime => (d, psi_second_derivative(n, z, v, d)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroEntry {
    pub n: usize,
    pub m: usize,
    pub zero: f64,
}

/// How many zeros to look for.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ZeroRequest {
    /// the first `count` positive zeros
    Count(usize),
    /// every zero strictly below the cutoff
    Below(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroTable {
    pub kind: ZeroKind,
    pub entries: Vec<ZeroEntry>,
    pub bracket_width: f64,
}

pub const SCAN_STEP: f64 = PI / 8.0;
const SCAN_START: f64 = PI / 16.0;
const BISECT_WIDTH: f64 = 1e-13;
const MAX_BISECTIONS: usize = 200;
pub const ZERO_RESIDUAL: f64 = 1e-12;

pub fn find_zeros(kind: ZeroKind, n: usize, request: ZeroRequest) -> Result<ZeroTable> {
    PsiConfig::default().find_zeros(kind, n, request)
}

impl PsiConfig {
    pub fn find_zeros(&self, kind: ZeroKind, n: usize, request: ZeroRequest) -> Result<ZeroTable> {
        if n > self.n_max {
            return Err(Error::Domain(format!("order {n} exceeds n_max = {}", self.n_max)));
        }
        let limit = match request {
            ZeroRequest::Count(0) => {
                return Err(Error::Domain("zero count must be at least 1".into()))
            }
            ZeroRequest::Count(_) => self.z_max,
            ZeroRequest::Below(c) if !(c > 0.0) => {
                return Err(Error::Domain(format!("cutoff {c} must be positive")))
            }
            ZeroRequest::Below(c) if c > self.z_max => {
                return Err(Error::Domain(format!("cutoff {c} exceeds z_max = {}", self.z_max)))
            }
            ZeroRequest::Below(c) => c,
        };
        let wanted = match request {
            ZeroRequest::Count(c) => c,
            ZeroRequest::Below(_) => usize::MAX,
        };

        let mut entries = Vec::new();
        let mut a = SCAN_START;
        let (mut fa, _) = kind.eval(n, a);
        while entries.len() < wanted && a < limit {
            let b = (a + SCAN_STEP).min(limit);
            let (fb, _) = kind.eval(n, b);
            let root = if fb == 0.0 {
                Some(b)
            } else if fa * fb < 0.0 {
                Some(refine(kind, n, a, b)?)
            } else {
                None
            };
            if let Some(z) = root {
                if z < limit {
                    entries.push(ZeroEntry {
                        n,
                        m: entries.len() + 1,
                        zero: z,
                    });
                }
            }
            a = b;
            fa = fb;
        }
        if entries.len() < wanted && matches!(request, ZeroRequest::Count(_)) {
            return Err(Error::Domain(format!(
                "only {} zeros of {} with n = {n} below z_max = {}",
                entries.len(),
                kind.as_str(),
                self.z_max
            )));
        }
        Ok(ZeroTable {
            kind,
            entries,
            bracket_width: SCAN_STEP,
        })
    }
}

/// Bisection to `BISECT_WIDTH`, then one Newton step kept only if it stays in
/// the bracket and lowers the residual.
fn refine(kind: ZeroKind, n: usize, mut lo: f64, mut hi: f64) -> Result<f64> {
    let (lo0, hi0) = (lo, hi);
    let (mut flo, _) = kind.eval(n, lo);
    let mut iterations = 0;
    while hi - lo > BISECT_WIDTH {
        if iterations == MAX_BISECTIONS {
            return Err(Error::Convergence {
                lo: lo0,
                hi: hi0,
                iterations,
            });
        }
        let mid = 0.5 * (lo + hi);
        let (fm, _) = kind.eval(n, mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if flo * fm < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
        iterations += 1;
    }
    let mid = 0.5 * (lo + hi);
    let (f, df) = kind.eval(n, mid);
    let mut best = (mid, f.abs());
    if df != 0.0 {
        let polished = mid - f / df;
        if polished >= lo - BISECT_WIDTH && polished <= hi + BISECT_WIDTH {
            let (fp, _) = kind.eval(n, polished);
            if fp.abs() < best.1 {
                best = (polished, fp.abs());
            }
        }
    }
    if best.1 > ZERO_RESIDUAL {
        return Err(Error::Convergence {
            lo: lo0,
            hi: hi0,
            iterations,
        });
    }
    Ok(best.0)
}

/// Number of sign changes of the function on `(0, upper)` sampled with `step`.
pub fn count_sign_changes(kind: ZeroKind, n: usize, upper: f64, step: f64) -> usize {
    let mut count = 0;
    let mut z = SCAN_START.min(step);
    let (mut prev, _) = kind.eval(n, z);
    while z < upper {
        z = (z + step).min(upper);
        let (f, _) = kind.eval(n, z);
        if prev * f < 0.0 || (f == 0.0 && z < upper) {
            count += 1;
        }
        if f != 0.0 {
            prev = f;
        }
    }
    count
}

impl ZeroTable {
    pub fn zeros(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.zero)
    }

    /// `kind,n,m,zero` rows, zeros at 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,n,m,zero\n");
        for e in &self.entries {
            let _ = writeln!(out, "{},{},{},{:.16e}", self.kind.as_str(), e.n, e.m, e.zero);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// tan z = z on (π, 3π/2), written as sin z − z cos z = 0.
    fn tan_root_by_bisection() -> f64 {
        let f = |z: f64| z.sin() - z * z.cos();
        let (mut lo, mut hi) = (PI + 1e-9, 1.5 * PI - 1e-9);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(lo) * f(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// ψ₁′ from its closed form, bisected on (0.5, π).
    fn psi1_prime_root() -> f64 {
        let f = |z: f64| {
            let (s, c) = z.sin_cos();
            s / z - 2.0 * s / z.powi(3) + 2.0 * c / (z * z)
        };
        let (mut lo, mut hi) = (0.5, PI);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(lo) * f(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn psi0_zeros_are_multiples_of_pi() {
        let t = find_zeros(ZeroKind::Psi, 0, ZeroRequest::Count(50)).unwrap();
        for e in &t.entries {
            assert!((e.zero - e.m as f64 * PI).abs() <= 1e-12, "{e:?}");
        }
        let first3: Vec<f64> = t.zeros().take(3).collect();
        assert!((first3[2] - 3.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn first_stationary_points() {
        let a01 = find_zeros(ZeroKind::PsiPrime, 0, ZeroRequest::Count(1)).unwrap().entries[0].zero;
        assert!((a01 - tan_root_by_bisection()).abs() < 1e-11);
        assert!((a01 - 4.49340946).abs() < 1e-8);
        let a11 = find_zeros(ZeroKind::PsiPrime, 1, ZeroRequest::Count(1)).unwrap().entries[0].zero;
        assert!((a11 - psi1_prime_root()).abs() < 1e-11);
        assert!((a11 - 2.08157598).abs() < 1e-8);
    }

    #[test]
    fn residuals_and_ordering() {
        for kind in [ZeroKind::Psi, ZeroKind::PsiPrime] {
            for n in [0, 1, 2, 7, 16, 32] {
                let t = find_zeros(kind, n, ZeroRequest::Below(60.0)).unwrap();
                assert!(t.entries.windows(2).all(|w| w[0].zero < w[1].zero));
                for e in &t.entries {
                    let (f, _) = kind.eval(n, e.zero);
                    assert!(f.abs() <= ZERO_RESIDUAL, "{kind:?} {e:?} residual {f}");
                    assert!(e.zero > 0.0);
                }
                // a finer scan finds no extra sign changes
                assert_eq!(t.entries.len(), count_sign_changes(kind, n, 60.0, PI / 64.0));
            }
        }
    }

    #[test]
    fn zeros_interlace() {
        for n in 0..12 {
            let rho = find_zeros(ZeroKind::Psi, n, ZeroRequest::Below(80.0)).unwrap();
            let alpha = find_zeros(ZeroKind::PsiPrime, n, ZeroRequest::Below(80.0)).unwrap();
            for w in rho.entries.windows(2) {
                let inside = alpha
                    .zeros()
                    .filter(|&a| a > w[0].zero && a < w[1].zero)
                    .count();
                assert_eq!(inside, 1, "n={n} between {} and {}", w[0].zero, w[1].zero);
            }
        }
    }

    #[test]
    fn request_errors() {
        assert!(find_zeros(ZeroKind::Psi, 0, ZeroRequest::Count(0)).is_err());
        assert!(find_zeros(ZeroKind::Psi, 0, ZeroRequest::Below(-1.0)).is_err());
        assert!(find_zeros(ZeroKind::Psi, 40, ZeroRequest::Count(1)).is_err());
        assert!(find_zeros(ZeroKind::Psi, 0, ZeroRequest::Count(100)).is_err());
    }

    #[test]
    fn csv_layout() {
        let t = find_zeros(ZeroKind::Psi, 0, ZeroRequest::Count(2)).unwrap();
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "kind,n,m,zero");
        assert!(lines[1].starts_with("psi,0,1,3.14159265358979"));
        let back: f64 = lines[2].rsplit(',').next().unwrap().parse().unwrap();
        assert_eq!(back, t.entries[1].zero);
    }
}
