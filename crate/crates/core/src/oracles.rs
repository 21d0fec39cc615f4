//! Reference computations that share no code path with the fast
//! implementations they are used to check.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::expsum::CoefficientVector;

/// `Σ_n a_n exp(2πi(n·x + |n|² t))` term by term.
pub fn direct_expsum(coeffs: &CoefficientVector, x: &[f64], t: f64) -> Complex64 {
    assert_eq!(x.len(), coeffs.dim, "dimension mismatch");
    let mut total = Complex64::new(0.0, 0.0);
    for (idx, a) in coeffs.a.iter().enumerate() {
        let n = coeffs.frequency(idx);
        let dot: f64 = n.iter().zip(x).map(|(&k, &xi)| k as f64 * xi).sum();
        let sq: f64 = n.iter().map(|&k| (k * k) as f64).sum();
        total += a * Complex64::from_polar(1.0, 2.0 * PI * (dot + sq * t));
    }
    total
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `∫_ℝ sinc(u)^n du` for `n ≥ 2`, with `sinc(u) = sin(πu)/(πu)`.
///
/// `sinc^n` is the Fourier transform of the `n`-fold convolution of
/// `1_{[-1/2,1/2]}`, the cardinal B-spline, so its integral is that spline's
/// value at 0: `(1/(n-1)!) Σ_{k < n/2} (-1)^k C(n,k) (n/2 - k)^{n-1}`.
pub fn sinc_power_integral(n: u32) -> f64 {
    assert!(n >= 2, "sinc^n is integrable only for n >= 2");
    let half = n as f64 / 2.0;
    let fact: f64 = (1..n).map(|i| i as f64).product();
    let mut s = 0.0;
    let mut k = 0;
    while (k as f64) < half {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        s += sign * binomial(n, k) * (half - k as f64).powi(n as i32 - 1);
        k += 1;
    }
    s / fact
}

/// `‖φ‖₂²` for `φ(t) = c · sinc(t/2m)^{2m}`: `c² · 2m · ∫ sinc^{4m}`.
pub fn phi_l2_squared(m: u32, norm_const: f64) -> f64 {
    norm_const * norm_const * 2.0 * m as f64 * sinc_power_integral(4 * m)
}

/// `‖f‖²_{L²(ℝ^{d+1})}` of a single wavepacket with envelope
/// `φ(2dδ²t') ∏ φ(δx'_i)`: the shear has unit determinant, so the integral
/// factorizes into `(2dδ²)⁻¹ δ^{-d} ‖φ‖₂^{2(d+1)}`.
pub fn wavepacket_energy(delta: f64, dim: usize, m: u32, norm_const: f64) -> f64 {
    let one = phi_l2_squared(m, norm_const);
    one.powi(dim as i32 + 1) / (2.0 * dim as f64 * delta * delta) / delta.powi(dim as i32)
}

/// `|∫ g(t) e^{-2πiξt} dt|` by the rectangle rule on `[-L, L]` with step `h`.
pub fn fourier_modulus<F: Fn(f64) -> f64>(g: F, half_width: f64, h: f64, xi: f64) -> f64 {
    let n = (half_width / h).round() as i64;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in -n..=n {
        let t = j as f64 * h;
        acc += g(t) * Complex64::from_polar(1.0, -2.0 * PI * xi * t);
    }
    (acc * h).norm()
}
