use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Evaluation limits for `ψₙ(z)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsiConfig {
    pub n_max: usize,
    pub z_max: f64,
}

impl Default for PsiConfig {
    fn default() -> Self {
        Self {
            n_max: 32,
            z_max: 200.0,
        }
    }
}

/// `ψₙ(z)` together with its derivative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsiEval {
    pub n: usize,
    pub z: f64,
    pub value: f64,
    pub derivative: f64,
}

/// `ψₙ(z) = (-z)ⁿ (d/(z dz))ⁿ (sin z / z)` and `ψₙ′(z)` with the default limits.
pub fn psi(n: usize, z: f64) -> Result<PsiEval> {
    PsiConfig::default().psi(n, z)
}

impl PsiConfig {
    pub fn check(&self, n: usize, z: f64) -> Result<()> {
        if n > self.n_max {
            return Err(Error::Domain(format!(
                "order {n} exceeds n_max = {}",
                self.n_max
            )));
        }
        if !(z > 0.0 && z <= self.z_max) {
            return Err(Error::Domain(format!(
                "argument {z} outside (0, {}]",
                self.z_max
            )));
        }
        Ok(())
    }

    pub fn psi(&self, n: usize, z: f64) -> Result<PsiEval> {
        self.check(n, z)?;
        let (value, derivative) = psi_pair(n, z);
        Ok(PsiEval {
            n,
            z,
            value,
            derivative,
        })
    }
}

/// Unchecked `(ψₙ(z), ψₙ′(z))` for `z > 0`.
pub fn psi_pair(n: usize, z: f64) -> (f64, f64) {
    let mut seq = [0.0f64; 72];
    let top = n.max(1);
    if top < seq.len() {
        psi_sequence(top, z, &mut seq[..=top]);
        derivative_from(n, z, &seq)
    } else {
        let mut v = vec![0.0; top + 1];
        psi_sequence(top, z, &mut v);
        derivative_from(n, z, &v)
    }
}

fn derivative_from(n: usize, z: f64, seq: &[f64]) -> (f64, f64) {
    if n == 0 {
        // ψ₀′ = (z cos z − sin z)/z² = −ψ₁
        (seq[0], -seq[1])
    } else {
        (seq[n], seq[n - 1] - (n as f64 + 1.0) * seq[n] / z)
    }
}

/// Second derivative from the defining ODE
/// `ψ″ + (2/z)ψ′ + (1 − n(n+1)/z²)ψ = 0`.
pub fn psi_second_derivative(n: usize, z: f64, value: f64, derivative: f64) -> f64 {
    let nn = (n * (n + 1)) as f64;
    -2.0 / z * derivative - (1.0 - nn / (z * z)) * value
}

const SERIES_BELOW: f64 = 1e-8;
const RESCALE_AT: f64 = 1e200;

/// Fills `out[k] = ψ_k(z)` for `k = 0..out.len()`.
///
/// Upward recurrence when `z ≥ n_top`, Miller's downward recurrence otherwise.
pub fn psi_sequence(n_top: usize, z: f64, out: &mut [f64]) {
    debug_assert_eq!(out.len(), n_top + 1);
    debug_assert!(z > 0.0);
    if z < SERIES_BELOW {
        // two-term series; remaining terms are below 1e-32 relative
        let mut lead = 1.0;
        for (k, slot) in out.iter_mut().enumerate() {
            if k > 0 {
                lead *= z / (2 * k + 1) as f64;
            }
            *slot = lead * (1.0 - z * z / (2.0 * (2 * k + 3) as f64));
        }
        return;
    }
    let (s, c) = z.sin_cos();
    let j0 = s / z;
    out[0] = j0;
    if n_top == 0 {
        return;
    }
    if z >= n_top as f64 {
        out[1] = (j0 - c) / z;
        for k in 1..n_top {
            out[k + 1] = (2 * k + 1) as f64 / z * out[k] - out[k - 1];
        }
        return;
    }

    let start = n_top + 50 + z as usize;
    let mut next = 0.0;
    let mut cur = 1.0;
    for k in (1..=start).rev() {
        let prev = (2 * k + 1) as f64 / z * cur - next;
        next = cur;
        cur = prev;
        if k - 1 <= n_top {
            out[k - 1] = cur;
        }
        if cur.abs() > RESCALE_AT {
            cur /= RESCALE_AT;
            next /= RESCALE_AT;
            if k - 1 <= n_top {
                for v in &mut out[k - 1..] {
                    *v /= RESCALE_AT;
                }
            }
        }
    }
    // Normalize against whichever of ψ₀, ψ₁ is far from a zero.
    let scale = if j0.abs() >= 0.1 {
        j0 / out[0]
    } else {
        ((j0 - c) / z) / out[1]
    };
    for v in out.iter_mut() {
        *v *= scale;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Power series oracle, adequate for z ≲ 4.
    fn series(n: usize, z: f64) -> f64 {
        let mut dfact = 1.0;
        for k in 0..=n {
            dfact *= (2 * k + 1) as f64;
        }
        let mut term = z.powi(n as i32) / dfact;
        let mut sum = term;
        for k in 1..60 {
            term *= -z * z / (2.0 * k as f64 * (2 * n + 2 * k + 1) as f64);
            sum += term;
        }
        sum
    }

    fn closed_form(n: usize, z: f64) -> f64 {
        let (s, c) = z.sin_cos();
        match n {
            0 => s / z,
            1 => s / (z * z) - c / z,
            2 => (3.0 / (z * z) - 1.0) * s / z - 3.0 * c / (z * z),
            3 => (15.0 / z.powi(3) - 6.0 / z) * s / z - (15.0 / (z * z) - 1.0) * c / z,
            _ => unreachable!(),
        }
    }

    #[test]
    fn zero_order_at_pi() {
        let e = psi(0, PI).unwrap();
        assert!(e.value.abs() < 1e-15);
        assert!((e.derivative + 1.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn first_order_at_one() {
        let e = psi(1, 1.0).unwrap();
        let expected = 1f64.sin() - 1f64.cos();
        assert!((e.value - expected).abs() < 1e-15);
        assert!((e.value - 0.30116868).abs() < 1e-8);
    }

    #[test]
    fn small_argument_taylor() {
        let z = 1e-4;
        let e = psi(0, z).unwrap();
        assert!((e.value - (1.0 - z * z / 6.0)).abs() < 1e-15);
        let tiny = psi(3, 1e-12).unwrap();
        assert!((tiny.value - 1e-36 / 105.0).abs() < 1e-50);
    }

    #[test]
    fn matches_closed_forms() {
        for n in 0..=3 {
            for &z in &[0.7, 1.0, 2.5, 3.9, 7.3, 15.0, 42.0, 120.0] {
                let v = psi(n, z).unwrap().value;
                let c = closed_form(n, z);
                assert!(
                    (v - c).abs() <= 1e-12 * c.abs().max(1e-3),
                    "n={n} z={z}: {v} vs {c}"
                );
            }
        }
    }

    #[test]
    fn matches_series_for_high_orders() {
        for n in [4, 8, 15, 24, 32] {
            for &z in &[0.01, 0.3, 1.0, 2.0, 3.5] {
                let v = psi(n, z).unwrap().value;
                let s = series(n, z);
                assert!((v - s).abs() <= 1e-12 * s.abs(), "n={n} z={z}: {v} vs {s}");
            }
        }
    }

    #[test]
    fn derivative_matches_central_difference() {
        for n in [0, 1, 5, 20] {
            for &z in &[0.5, 3.0, 18.0, 33.0] {
                let h = 1e-5;
                let fd = (psi(n, z + h).unwrap().value - psi(n, z - h).unwrap().value) / (2.0 * h);
                let d = psi(n, z).unwrap().derivative;
                assert!((d - fd).abs() < 1e-9 * (1.0 + d.abs()), "n={n} z={z}");
            }
        }
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(psi(0, 0.0).is_err());
        assert!(psi(0, -1.0).is_err());
        assert!(psi(33, 1.0).is_err());
        assert!(psi(2, 250.0).is_err());
    }

    #[test]
    fn continuous_across_recurrence_switch() {
        for n in [3, 10, 25] {
            let z = n as f64;
            let dz = z * 1e-12;
            let below = psi(n, z - dz).unwrap().value;
            let above = psi(n, z).unwrap();
            let predicted = above.value - dz * above.derivative;
            assert!((below - predicted).abs() < 1e-13 * above.value.abs());
        }
    }

    proptest::proptest! {
        #[test]
        fn three_term_recurrence(n in 1usize..31, z in 0.05f64..150.0) {
            let a = psi(n - 1, z).unwrap().value;
            let b = psi(n, z).unwrap().value;
            let c = psi(n + 1, z).unwrap().value;
            let lhs = a + c;
            let rhs = (2 * n + 1) as f64 * b / z;
            let scale = a.abs().max(c.abs()).max(rhs.abs());
            proptest::prop_assert!((lhs - rhs).abs() <= 1e-10 * scale);
        }
    }
}
