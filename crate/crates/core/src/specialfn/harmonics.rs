//! Real orthonormal spherical harmonics `Y_n^k = P̄_n^{|k|}(cos θ) T_k(φ)`.
//!
//! `P̄` is normalized so that `∫ P̄² sin θ dθ = 1/(2π)` and carries no
//! Condon–Shortley phase; `T_0 = 1`, `T_k = √2 cos kφ` for `k > 0` and
//! `T_k = √2 sin |k|φ` for `k < 0`.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};

/// Position of `(n, m)`, `0 ≤ m ≤ n`, in triangular storage.
#[inline]
pub fn tri_index(n: usize, m: usize) -> usize {
    n * (n + 1) / 2 + m
}

/// Position of `Y_n^k` in a degree-major list: `n² + n + k`.
#[inline]
pub fn harmonic_index(n: usize, k: i64) -> usize {
    ((n * n + n) as i64 + k) as usize
}

/// Normalized associated Legendre functions, their θ-derivatives and their
/// quotients by `sin θ`, all at one colatitude.
#[derive(Clone, Debug)]
pub struct NormalizedLegendre {
    n_max: usize,
    p: Vec<f64>,
    dp: Vec<f64>,
    p_over_sin: Vec<f64>,
}

impl NormalizedLegendre {
    pub fn new(n_max: usize, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        let len = tri_index(n_max + 1, 0);
        let mut p = vec![0.0; len];
        let mut q = vec![0.0; len];
        fill_columns(n_max, c, &mut p, 1.0 / (4.0 * PI).sqrt(), s);
        // P̄_m^m / sin θ = √((2m+1)/2m) P̄_{m−1}^{m−1}, then the same n-recurrence.
        for m in 1..=n_max {
            let seed = ((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * p[tri_index(m - 1, m - 1)];
            column(n_max, m, c, seed, &mut q);
        }
        let mut dp = vec![0.0; len];
        for n in 0..=n_max {
            for m in 0..=n {
                let upper = if m < n {
                    (((n - m) * (n + m + 1)) as f64).sqrt() * p[tri_index(n, m + 1)]
                } else {
                    0.0
                };
                dp[tri_index(n, m)] = if m == 0 {
                    -upper
                } else {
                    0.5 * ((((n + m) * (n - m + 1)) as f64).sqrt() * p[tri_index(n, m - 1)] - upper)
                };
            }
        }
        Self {
            n_max,
            p,
            dp,
            p_over_sin: q,
        }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    #[inline]
    pub fn p(&self, n: usize, m: usize) -> f64 {
        self.p[tri_index(n, m)]
    }

    #[inline]
    pub fn dp(&self, n: usize, m: usize) -> f64 {
        self.dp[tri_index(n, m)]
    }

    /// `P̄_n^m / sin θ`; zero for `m = 0`, where it is never needed.
    #[inline]
    pub fn p_over_sin(&self, n: usize, m: usize) -> f64 {
        self.p_over_sin[tri_index(n, m)]
    }
}

fn fill_columns(n_max: usize, c: f64, out: &mut [f64], p00: f64, s: f64) {
    let mut diag = p00;
    for m in 0..=n_max {
        if m > 0 {
            diag *= ((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * s;
        }
        column(n_max, m, c, diag, out);
    }
}

/// Runs the fixed-order recurrence in `n` from `P̄_m^m = seed`.
fn column(n_max: usize, m: usize, c: f64, seed: f64, out: &mut [f64]) {
    out[tri_index(m, m)] = seed;
    if m < n_max {
        out[tri_index(m + 1, m)] = ((2 * m + 3) as f64).sqrt() * c * seed;
    }
    let mf = (m * m) as f64;
    for n in m + 2..=n_max {
        let nf = n as f64;
        let a = ((4.0 * nf * nf - 1.0) / (nf * nf - mf)).sqrt();
        let n1 = nf - 1.0;
        let b = ((n1 * n1 - mf) / (4.0 * n1 * n1 - 1.0)).sqrt();
        out[tri_index(n, m)] = a * (c * out[tri_index(n - 1, m)] - b * out[tri_index(n - 2, m)]);
    }
}

/// Azimuthal factor `T_k(φ)`.
#[inline]
pub fn azimuthal(k: i64, phi: f64) -> f64 {
    match k.cmp(&0) {
        std::cmp::Ordering::Equal => 1.0,
        std::cmp::Ordering::Greater => SQRT_2 * (k as f64 * phi).cos(),
        std::cmp::Ordering::Less => SQRT_2 * ((-k) as f64 * phi).sin(),
    }
}

/// `∂_φ T_k = s_k T_{−k}`; returns `s_k`.
#[inline]
pub fn azimuthal_derivative_factor(k: i64) -> f64 {
    if k > 0 {
        -(k as f64)
    } else {
        (-k) as f64
    }
}

fn check_order(n: usize, k: i64) -> Result<()> {
    if k.unsigned_abs() as usize > n {
        return Err(Error::Domain(format!("|k| = {} exceeds degree n = {n}", k.abs())));
    }
    Ok(())
}

pub fn sph_harm(n: usize, k: i64, theta: f64, phi: f64) -> Result<f64> {
    check_order(n, k)?;
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::Domain(format!("colatitude {theta} outside [0, π]")));
    }
    let leg = NormalizedLegendre::new(n, theta);
    Ok(leg.p(n, k.unsigned_abs() as usize) * azimuthal(k, phi))
}

/// `(sin⁻¹θ ∂_φ Y, ∂_θ Y)`, the pair feeding the φ and θ components.
pub fn sph_harm_h(n: usize, k: i64, theta: f64, phi: f64) -> Result<(f64, f64)> {
    check_order(n, k)?;
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::Domain(format!("angular operator undefined at θ = {theta}")));
    }
    let leg = NormalizedLegendre::new(n, theta);
    let m = k.unsigned_abs() as usize;
    let h_phi = if k == 0 {
        0.0
    } else {
        leg.p_over_sin(n, m) * azimuthal_derivative_factor(k) * azimuthal(-k, phi)
    };
    Ok((h_phi, leg.dp(n, m) * azimuthal(k, phi)))
}

/// Every `Y_n^k`, `∂_θY_n^k` and `sin⁻¹θ ∂_φ Y_n^k` for `n ≤ n_max` at one point,
/// stored by [`harmonic_index`].
#[derive(Clone, Debug)]
pub struct HarmonicSet {
    pub n_max: usize,
    pub y: Vec<f64>,
    pub h_theta: Vec<f64>,
    pub h_phi: Vec<f64>,
}

impl HarmonicSet {
    pub fn new(n_max: usize, theta: f64, phi: f64) -> Self {
        let leg = NormalizedLegendre::new(n_max, theta);
        let len = (n_max + 1) * (n_max + 1);
        let mut y = vec![0.0; len];
        let mut h_theta = vec![0.0; len];
        let mut h_phi = vec![0.0; len];
        let cs: Vec<(f64, f64)> = (0..=n_max).map(|m| (m as f64 * phi).sin_cos()).collect();
        for n in 0..=n_max {
            for k in -(n as i64)..=n as i64 {
                let m = k.unsigned_abs() as usize;
                let (sin_m, cos_m) = cs[m];
                let (t, t_neg) = match k.cmp(&0) {
                    std::cmp::Ordering::Equal => (1.0, 0.0),
                    std::cmp::Ordering::Greater => (SQRT_2 * cos_m, SQRT_2 * sin_m),
                    std::cmp::Ordering::Less => (SQRT_2 * sin_m, SQRT_2 * cos_m),
                };
                let i = harmonic_index(n, k);
                y[i] = leg.p(n, m) * t;
                h_theta[i] = leg.dp(n, m) * t;
                if k != 0 {
                    h_phi[i] = leg.p_over_sin(n, m) * azimuthal_derivative_factor(k) * t_neg;
                }
            }
        }
        Self {
            n_max,
            y,
            h_theta,
            h_phi,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_legendre;

    #[test]
    fn low_degree_closed_forms() {
        for &(t, p) in &[(0.3, 1.1), (1.7, 4.0), (2.9, 0.2)] {
            let y00 = sph_harm(0, 0, t, p).unwrap();
            assert!((y00 - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-15);
            let y10 = sph_harm(1, 0, t, p).unwrap();
            assert!((y10 - (3.0 / (4.0 * PI)).sqrt() * t.cos()).abs() < 1e-15);
            let y21 = sph_harm(2, 1, t, p).unwrap();
            let expect = (15.0 / (4.0 * PI)).sqrt() * t.sin() * t.cos() * p.cos();
            assert!((y21 - expect).abs() < 1e-14);
            let y2m2 = sph_harm(2, -2, t, p).unwrap();
            let expect = (15.0 / (16.0 * PI)).sqrt() * t.sin().powi(2) * (2.0 * p).sin();
            assert!((y2m2 - expect).abs() < 1e-14);

            assert_eq!(sph_harm_h(0, 0, t, p).unwrap(), (0.0, 0.0));
            let (hp, ht) = sph_harm_h(1, 0, t, p).unwrap();
            assert_eq!(hp, 0.0);
            assert!((ht + (3.0 / (4.0 * PI)).sqrt() * t.sin()).abs() < 1e-15);
        }
    }

    #[test]
    fn angular_operator_matches_central_differences() {
        let h = 1e-5;
        for (n, k) in [(1, 1), (1, -1), (3, 2), (6, -4), (8, 0)] {
            for &(t, p) in &[(0.4, 0.9), (1.3, 3.3), (2.6, 5.8)] {
                let (hp, ht) = sph_harm_h(n, k, t, p).unwrap();
                let y = |t, p| sph_harm(n, k, t, p).unwrap();
                let dt = (y(t + h, p) - y(t - h, p)) / (2.0 * h);
                let dp = (y(t, p + h) - y(t, p - h)) / (2.0 * h) / t.sin();
                assert!((ht - dt).abs() < 1e-6, "n={n} k={k}");
                assert!((hp - dp).abs() < 1e-6, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn orthonormal_up_to_degree_eight() {
        let n_max = 8;
        let (x, w) = gauss_legendre(12);
        let nphi = 20;
        let size = (n_max + 1) * (n_max + 1);
        let mut gram = vec![0.0; size * size];
        for (xj, wj) in x.iter().zip(&w) {
            let theta = xj.acos();
            for l in 0..nphi {
                let phi = 2.0 * PI * l as f64 / nphi as f64;
                let set = HarmonicSet::new(n_max, theta, phi);
                let wt = wj * 2.0 * PI / nphi as f64;
                for a in 0..size {
                    for b in 0..size {
                        gram[a * size + b] += wt * set.y[a] * set.y[b];
                    }
                }
            }
        }
        for a in 0..size {
            for b in 0..size {
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((gram[a * size + b] - expect).abs() < 1e-10, "{a},{b}");
            }
        }
    }

    #[test]
    fn y21_quadrature_norm() {
        let (x, w) = gauss_legendre(8);
        let nphi = 8;
        let mut sum = 0.0;
        for (xj, wj) in x.iter().zip(&w) {
            for l in 0..nphi {
                let phi = 2.0 * PI * l as f64 / nphi as f64;
                sum += wj * 2.0 * PI / nphi as f64 * sph_harm(2, 1, xj.acos(), phi).unwrap().powi(2);
            }
        }
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn set_agrees_with_single_evaluations() {
        let set = HarmonicSet::new(10, 0.77, 2.2);
        for n in 0..=10 {
            for k in -(n as i64)..=n as i64 {
                let i = harmonic_index(n, k);
                assert!((set.y[i] - sph_harm(n, k, 0.77, 2.2).unwrap()).abs() < 1e-14);
                let (hp, ht) = sph_harm_h(n, k, 0.77, 2.2).unwrap();
                assert!((set.h_phi[i] - hp).abs() < 1e-13);
                assert!((set.h_theta[i] - ht).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert!(sph_harm(1, 2, 0.5, 0.0).is_err());
        assert!(sph_harm_h(2, -3, 0.5, 0.0).is_err());
        assert!(sph_harm_h(2, 1, 0.0, 0.0).is_err());
        assert!(sph_harm_h(2, 1, PI, 0.0).is_err());
    }

    proptest::proptest! {
        #[test]
        fn quotient_by_sine_is_consistent(n in 1usize..32, m in 1usize..32, theta in 0.05f64..3.09) {
            proptest::prop_assume!(m <= n);
            let leg = NormalizedLegendre::new(n, theta);
            let direct = leg.p(n, m) / theta.sin();
            let scale = leg.p_over_sin(n, m).abs().max(1e-3);
            proptest::prop_assert!((leg.p_over_sin(n, m) - direct).abs() <= 1e-11 * scale);
        }
    }
}
