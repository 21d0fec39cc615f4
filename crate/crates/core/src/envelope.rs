//! The Schwartz majorant `φ`, tube envelopes and modulated wavepackets.
//!
//! `φ(t) = c_m · sinc(t / 2m)^{2m}` with `sinc(u) = sin(πu)/(πu)`. Its Fourier
//! transform is the `2m`-fold self convolution of the indicator of
//! `[-1/(4m), 1/(4m)]`, so it is supported in `[-1/2, 1/2]`. The constant
//! `c_m = sinc(1/2m)^{-2m}` makes `φ(±1) = 1`, and since `sinc` decreases on
//! `[0, 1]` we get `φ ≥ 1` on `[-1, 1]`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{LabError, Result};
use crate::geometry::FreqPoint;

/// Below this `|πu|` the sinc is evaluated by its Taylor series.
const SERIES_CUTOFF: f64 = 1e-4;

/// Rotation recurrences are resynchronised with a direct `sin_cos` this often.
const RESYNC: usize = 32;

pub fn sinc(u: f64) -> f64 {
    let x = PI * u;
    sinc_of_arg(x)
}

#[inline]
fn sinc_of_arg(x: f64) -> f64 {
    if x.abs() < SERIES_CUTOFF {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// `e(s) = exp(2πi s)`, with the argument reduced mod 1 first.
#[inline]
pub fn e(s: f64) -> Complex64 {
    let f = s - s.round();
    let (sin, cos) = (2.0 * PI * f).sin_cos();
    Complex64::new(cos, sin)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeParams {
    /// Half the decay order: `φ(t) ≲ (1 + |t|)^{-2m}`.
    pub m: u32,
    pub norm_const: f64,
}

impl EnvelopeParams {
    pub fn new(m: u32) -> Result<Self> {
        if m == 0 {
            return Err(LabError::InvalidParameter("envelope order m must be >= 1".into()));
        }
        let norm_const = sinc(1.0 / (2.0 * m as f64)).powi(-2 * m as i32);
        Ok(EnvelopeParams { m, norm_const })
    }

    /// `2m`, the polynomial decay exponent.
    pub fn decay(&self) -> i32 {
        2 * self.m as i32
    }

    /// Largest `|u|` with `φ(u) > level`, from `φ(u) ≤ c_m (2m / π|u|)^{2m}`.
    /// Returns 0 if `level ≥ c_m`.
    pub fn support_radius(&self, level: f64) -> f64 {
        if level >= self.norm_const {
            return 0.0;
        }
        if level <= 0.0 {
            return f64::INFINITY;
        }
        let two_m = 2.0 * self.m as f64;
        (two_m / PI) * (self.norm_const / level).powf(1.0 / two_m)
    }

    /// `(1 + 2m/π)^{2m}`: a bound for `sup_u (1 + |u|)^{2m} φ(u) / c_m`.
    pub fn decay_constant(&self) -> f64 {
        (1.0 + 2.0 * self.m as f64 / PI).powi(self.decay())
    }
}

impl Default for EnvelopeParams {
    fn default() -> Self {
        EnvelopeParams::new(4).expect("m = 4 is valid")
    }
}

pub fn phi(t: f64, params: &EnvelopeParams) -> f64 {
    let two_m = 2.0 * params.m as f64;
    params.norm_const * sinc(t / two_m).powi(params.decay())
}

/// Fill `out[j] = φ(u0 + j·du)`.
///
/// `sin` is advanced by complex rotation and resynchronised every
/// [`RESYNC`] steps; the absolute error stays at the level of a few ulps,
/// which is what matters since `φ` is only small where `sin` is.
pub fn phi_row(u0: f64, du: f64, out: &mut [f64], params: &EnvelopeParams) {
    let a = PI / (2.0 * params.m as f64);
    let pow = params.decay();
    let c = params.norm_const;
    let step = a * du;
    let (s_step, c_step) = step.sin_cos();
    let mut j = 0;
    while j < out.len() {
        let end = (j + RESYNC).min(out.len());
        let x0 = a * (u0 + j as f64 * du);
        let (mut s, mut co) = x0.sin_cos();
        for (k, o) in out[j..end].iter_mut().enumerate() {
            // the same angle the rotation tracks, so s / x stays consistent near 0
            let x = x0 + k as f64 * step;
            let sc = if x.abs() < SERIES_CUTOFF { sinc_of_arg(x) } else { s / x };
            *o = c * sc.powi(pow);
            let ns = s * c_step + co * s_step;
            co = co * c_step - s * s_step;
            s = ns;
        }
        j = end;
    }
}

/// `(ξ, |φ̂(ξ)|)` from a discrete Fourier transform of `φ` sampled with step
/// `h` on `[-half_width, half_width)`, frequencies in `[-1/(2h), 1/(2h))`.
pub fn phi_spectrum(params: &EnvelopeParams, half_width: f64, h: f64) -> Vec<(f64, f64)> {
    let n = (2.0 * half_width / h).round() as usize;
    let mut buf: Vec<Complex64> = (0..n).map(|j| Complex64::new(phi(-half_width + j as f64 * h, params), 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let df = 1.0 / (n as f64 * h);
    let mut out: Vec<(f64, f64)> = buf
        .iter()
        .enumerate()
        .map(|(k, z)| {
            let k = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
            (k * df, z.norm() * h)
        })
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// A wavepacket `e((ω, |ω|²)·(p - s)) · φ_{T_ω⁰}(p - s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WavepacketSpec {
    pub omega: FreqPoint,
    pub delta: f64,
    pub shift: Vec<f64>,
    pub params: EnvelopeParams,
}

impl WavepacketSpec {
    pub fn new(omega: FreqPoint, delta: f64, shift: Vec<f64>, params: EnvelopeParams) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(LabError::InvalidDelta(delta));
        }
        if shift.len() != omega.dim() + 1 {
            return Err(LabError::InvalidParameter("wavepacket shift must have d + 1 coordinates".into()));
        }
        Ok(WavepacketSpec { omega, delta, shift, params })
    }

    pub fn dim(&self) -> usize {
        self.omega.dim()
    }

    /// Temporal factor `φ(2dδ² τ)` at time offset `τ = t - s_t`.
    #[inline]
    pub fn time_factor(&self, tau: f64) -> f64 {
        let d = self.dim() as f64;
        phi(2.0 * d * self.delta * self.delta * tau, &self.params)
    }

    /// `φ(2dδ² t') ∏ φ(δ x'_i)` with `(x', t') = M_ωᵀ(p - s)`.
    pub fn envelope_value(&self, point: &[f64]) -> f64 {
        let d = self.dim();
        assert_eq!(point.len(), d + 1, "dimension mismatch");
        let tau = point[d] - self.shift[d];
        let mut v = self.time_factor(tau);
        for (i, w) in self.omega.coords().iter().enumerate() {
            let xp = point[i] - self.shift[i] + 2.0 * w * tau;
            v *= phi(self.delta * xp, &self.params);
        }
        v
    }

    /// Phase `(ω, |ω|²)·(p - s)` in turns.
    pub fn phase(&self, point: &[f64]) -> f64 {
        let d = self.dim();
        let w = self.omega.coords();
        let mut s = self.omega.norm_sq() * (point[d] - self.shift[d]);
        for i in 0..d {
            s += w[i] * (point[i] - self.shift[i]);
        }
        s
    }

    pub fn wavepacket_value(&self, point: &[f64]) -> Complex64 {
        e(self.phase(point)) * self.envelope_value(point)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Tube;

    #[test]
    fn spectrum_is_band_limited() {
        let p = EnvelopeParams::default();
        let spec = phi_spectrum(&p, 256.0, 1.0 / 64.0);
        let peak = spec.iter().map(|s| s.1).fold(0.0, f64::max);
        // φ̂(0) = ∫φ = c · 2m · ∫sinc^{2m}
        let integral = p.norm_const * 8.0 * crate::oracles::sinc_power_integral(8);
        assert!((peak - integral).abs() < 1e-9 * integral);
        let outside = spec.iter().filter(|s| s.0.abs() > 0.5 + 1e-9).map(|s| s.1).fold(0.0, f64::max);
        assert!(outside < 1e-9 * peak, "{outside}");
    }

    #[test]
    fn phi_examples() {
        let p = EnvelopeParams::default();
        assert_eq!(phi(0.0, &p), p.norm_const);
        assert!((phi(1.0, &p) - 1.0).abs() < 1e-14);
        assert!(phi(1.0, &p) >= 1.0 - 1e-15);
        let bound = p.norm_const * (8.0 / (PI * 100.0)).powi(8);
        assert!(phi(100.0, &p) <= bound);
        assert!(p.norm_const >= 1.0);
        assert!(EnvelopeParams::new(0).is_err());
    }

    #[test]
    fn phi_even_and_vanishes_at_sinc_zeros() {
        let p = EnvelopeParams::new(3).unwrap();
        for k in 0..200 {
            let t = k as f64 * 0.37;
            assert_eq!(phi(t, &p), phi(-t, &p));
        }
        assert!(phi(6.0, &p) < 1e-60);
    }

    #[test]
    fn series_branch_is_continuous() {
        let p = EnvelopeParams::default();
        for t in [1e-4 * 8.0 / PI * 0.999, 1e-4 * 8.0 / PI * 1.001] {
            let x = PI * t / 8.0;
            let direct = p.norm_const * (x.sin() / x).powi(8);
            assert!((phi(t, &p) - direct).abs() < 1e-15);
        }
    }

    #[test]
    fn row_matches_pointwise() {
        let p = EnvelopeParams::default();
        let mut out = vec![0.0; 1000];
        phi_row(-37.3, 0.0731, &mut out, &p);
        for (j, v) in out.iter().enumerate() {
            let exact = phi(-37.3 + j as f64 * 0.0731, &p);
            assert!((v - exact).abs() <= 1e-12 * p.norm_const, "{j}: {v} vs {exact}");
        }
    }

    #[test]
    fn support_radius_bounds_phi() {
        let p = EnvelopeParams::default();
        for level in [1e-8, 1e-4, 0.1, 1.0] {
            let r = p.support_radius(level);
            for k in 0..100 {
                let u = r * (1.0 + k as f64 * 0.1);
                assert!(phi(u, &p) <= level * (1.0 + 1e-12));
            }
        }
        assert_eq!(p.support_radius(2.0), 0.0);
    }

    #[test]
    fn envelope_examples() {
        let p = EnvelopeParams::default();
        let delta = 0.25;
        let pk = WavepacketSpec::new(FreqPoint::zero(1), delta, vec![0.0, 0.0], p).unwrap();
        assert_eq!(pk.envelope_value(&[0.0, 0.0]), p.norm_const * p.norm_const);
        let edge = pk.envelope_value(&[1.0 / delta, 0.0]);
        assert!((edge - p.norm_const * phi(1.0, &p)).abs() < 1e-14);
        assert!(edge >= 1.0);
    }

    #[test]
    fn envelope_at_least_one_on_tube() {
        let p = EnvelopeParams::default();
        let omega = FreqPoint::new(vec![0.6, -0.9]).unwrap();
        let delta = 0.2;
        let shift = vec![3.0, 1.0, -4.0];
        let pk = WavepacketSpec::new(omega.clone(), delta, shift.clone(), p).unwrap();
        let tube = Tube::new(omega, delta, 1.0, shift).unwrap();
        let mut seen = 0;
        for i in 0..=10 {
            for j in 0..=10 {
                for k in 0..=10 {
                    let t = -4.0 + tube.time_half_width() * (k as f64 / 5.0 - 1.0);
                    let tau = t + 4.0;
                    let x0 = 3.0 - 2.0 * 0.6 * tau + tube.space_half_width() * (i as f64 / 5.0 - 1.0);
                    let x1 = 1.0 + 2.0 * 0.9 * tau + tube.space_half_width() * (j as f64 / 5.0 - 1.0);
                    let pt = [x0, x1, t];
                    if tube.contains(&pt) {
                        seen += 1;
                        assert!(pk.envelope_value(&pt) >= 1.0 - 1e-12);
                    }
                }
            }
        }
        assert!(seen > 1000);
    }

    #[test]
    fn wavepacket_phase_example() {
        let p = EnvelopeParams::default();
        let pk = WavepacketSpec::new(FreqPoint::new(vec![0.5]).unwrap(), 0.25, vec![0.0, 0.0], p).unwrap();
        let v = pk.wavepacket_value(&[1.0, 0.0]);
        let env = pk.envelope_value(&[1.0, 0.0]);
        assert!((v.re + env).abs() < 1e-14 && v.im.abs() < 1e-14);
    }

    #[test]
    fn zero_frequency_packet_is_real_positive() {
        let pk = WavepacketSpec::new(FreqPoint::zero(1), 0.25, vec![1.0, 2.0], EnvelopeParams::default()).unwrap();
        for k in 0..50 {
            let pt = [k as f64 * 1.3 - 20.0, k as f64 * 0.7 - 10.0];
            let v = pk.wavepacket_value(&pt);
            assert_eq!(v.im, 0.0);
            assert_eq!(v.re, pk.envelope_value(&pt));
        }
    }
}
