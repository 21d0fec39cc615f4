//! Mixed Lebesgue norms `L^q_t L^r_x` of sampled space-time fields.
//!
//! The inner norm of each time slice is `(Σ |f|^r h_x^d)^{1/r}`, the outer
//! norm is `(Σ inner^q h_t)^{1/q}`; `∞` exponents take maxima instead. Sums
//! are pairwise in a fixed order, so per-slice work may run on any number of
//! threads without changing a bit of the result.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{LabError, Result};
use crate::reduce::pairwise_sum_by;

/// A Lebesgue exponent `p ∈ [1, ∞]`, stored exactly through its reciprocal
/// (`1/∞ = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Exponent {
    recip: Rational64,
}

impl Exponent {
    pub const INFINITY: Exponent = Exponent { recip: Rational64::new_raw(0, 1) };

    /// `p = num / den`.
    pub fn ratio(num: i64, den: i64) -> Result<Self> {
        if den == 0 || num == 0 {
            return Err(LabError::InvalidExponent(format!("{num}/{den}")));
        }
        Self::from_recip(Rational64::new(den, num))
    }

    pub fn integer(p: i64) -> Result<Self> {
        Self::ratio(p, 1)
    }

    /// Exponent with the given reciprocal `1/p ∈ [0, 1]`.
    pub fn from_recip(recip: Rational64) -> Result<Self> {
        if recip < Rational64::zero() || recip > Rational64::from_integer(1) {
            return Err(LabError::InvalidExponent(format!("1/p = {recip} outside [0, 1]")));
        }
        Ok(Exponent { recip })
    }

    /// Nearest representable exponent to a float; exact for values like
    /// 2.5 or 10 but not for e.g. 10/3 (use [`Exponent::ratio`]).
    pub fn from_f64(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            return Ok(Self::INFINITY);
        }
        if !(p >= 1.0) || !p.is_finite() {
            return Err(LabError::InvalidExponent(p.to_string()));
        }
        let r = Rational64::approximate_float(1.0 / p)
            .ok_or_else(|| LabError::InvalidExponent(p.to_string()))?;
        Self::from_recip(r)
    }

    pub fn is_infinite(&self) -> bool {
        self.recip.is_zero()
    }

    pub fn recip(&self) -> Rational64 {
        self.recip
    }

    pub fn recip_f64(&self) -> f64 {
        self.recip.to_f64().expect("finite rational")
    }

    /// `p` as a float (`f64::INFINITY` for `∞`).
    pub fn value(&self) -> f64 {
        if self.is_infinite() {
            f64::INFINITY
        } else {
            (self.recip.recip()).to_f64().expect("finite rational")
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else {
            let p = self.recip.recip();
            if p.is_integer() {
                write!(f, "{}", p.numer())
            } else {
                write!(f, "{}/{}", p.numer(), p.denom())
            }
        }
    }
}

/// Parse a rational literal: `"6"`, `"10/3"`, `"2.5"`.
pub fn parse_rational(s: &str) -> Option<Rational64> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().ok()?;
        let d: i64 = d.trim().parse().ok()?;
        if d == 0 {
            return None;
        }
        return Some(Rational64::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) || frac.len() > 15 {
            return None;
        }
        let neg = int.starts_with('-');
        let int_part: i64 = if int.is_empty() || int == "-" { 0 } else { int.parse().ok()? };
        let scale = 10i64.pow(frac.len() as u32);
        let frac_part: i64 = frac.parse().ok()?;
        let mag = int_part.abs().checked_mul(scale)?.checked_add(frac_part)?;
        return Some(Rational64::new(if neg { -mag } else { mag }, scale));
    }
    s.parse::<i64>().ok().map(Rational64::from_integer)
}

impl FromStr for Exponent {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        if t == "inf" || t == "infinity" || t == "∞" {
            return Ok(Self::INFINITY);
        }
        let p = parse_rational(&t).ok_or_else(|| LabError::InvalidExponent(s.to_string()))?;
        if p < Rational64::from_integer(1) {
            return Err(LabError::InvalidExponent(format!("{s} < 1")));
        }
        Self::from_recip(p.recip())
    }
}

/// A rectangular space-time grid.
///
/// Non-periodic axes are sampled at cell midpoints; periodic spatial axes
/// (the torus `T^d = [0, 1)^d`) at left endpoints `x_min + j·h_x`, where the
/// rectangle rule is spectrally accurate. Time is always sampled at
/// midpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub x_min: Vec<f64>,
    pub x_max: Vec<f64>,
    pub t_min: f64,
    pub t_max: f64,
    pub h_x: f64,
    pub h_t: f64,
    pub periodic: bool,
}

impl GridSpec {
    pub fn new(x_min: Vec<f64>, x_max: Vec<f64>, t_min: f64, t_max: f64, h_x: f64, h_t: f64, periodic: bool) -> Result<Self> {
        let g = GridSpec { x_min, x_max, t_min, t_max, h_x, h_t, periodic };
        g.validate()?;
        Ok(g)
    }

    /// Unit torus `[0,1)^d × [0,1]` with `x_points` per axis and `t_slices` slices.
    pub fn torus(dim: usize, x_points: usize, t_slices: usize) -> Result<Self> {
        if x_points == 0 || t_slices == 0 {
            return Err(LabError::InvalidParameter("torus grid needs at least one point per axis".into()));
        }
        Self::new(vec![0.0; dim], vec![1.0; dim], 0.0, 1.0, 1.0 / x_points as f64, 1.0 / t_slices as f64, true)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(LabError::InvalidParameter(m));
        if self.x_min.is_empty() || self.x_min.len() != self.x_max.len() {
            return bad("grid needs matching x_min / x_max of length d >= 1".into());
        }
        if !(self.h_x > 0.0 && self.h_t > 0.0) {
            return bad("grid spacings must be positive".into());
        }
        if !(self.t_max > self.t_min) || self.x_min.iter().zip(&self.x_max).any(|(a, b)| !(b > a)) {
            return bad("grid extents must be positive".into());
        }
        if self.periodic && self.x_min.iter().zip(&self.x_max).any(|(a, b)| (b - a - 1.0).abs() > 1e-12) {
            return bad("periodic grids must have unit spatial period".into());
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.x_min.len()
    }

    /// Cells along a spatial axis.
    pub fn n_x(&self, axis: usize) -> usize {
        cells(self.x_max[axis] - self.x_min[axis], self.h_x)
    }

    pub fn n_t(&self) -> usize {
        cells(self.t_max - self.t_min, self.h_t)
    }

    pub fn shape(&self) -> Vec<usize> {
        (0..self.dim()).map(|a| self.n_x(a)).collect()
    }

    /// Samples per time slice.
    pub fn slice_len(&self) -> usize {
        self.shape().iter().product()
    }

    /// Total sample count, computed without overflow.
    pub fn sample_count(&self) -> u128 {
        self.shape().iter().fold(self.n_t() as u128, |acc, &n| acc * n as u128)
    }

    #[inline]
    pub fn x_coord(&self, axis: usize, j: usize) -> f64 {
        if self.periodic {
            self.x_min[axis] + j as f64 * self.h_x
        } else {
            self.x_min[axis] + (j as f64 + 0.5) * self.h_x
        }
    }

    #[inline]
    pub fn t_coord(&self, i: usize) -> f64 {
        self.t_min + (i as f64 + 0.5) * self.h_t
    }

    /// Spatial volume element `h_x^d`.
    pub fn cell_volume(&self) -> f64 {
        self.h_x.powi(self.dim() as i32)
    }
}

fn cells(extent: f64, h: f64) -> usize {
    ((extent / h).round() as usize).max(1)
}

/// Complex samples on a grid, slice-major then row-major in space (last
/// axis fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    pub grid: GridSpec,
    pub samples: Vec<Complex64>,
}

impl SampledField {
    pub fn zeros(grid: GridSpec) -> Self {
        let n = grid.slice_len() * grid.n_t();
        SampledField { grid, samples: vec![Complex64::new(0.0, 0.0); n] }
    }

    pub fn new(grid: GridSpec, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.slice_len() * grid.n_t() {
            return Err(LabError::InvalidParameter(format!(
                "sample count {} does not match grid {}",
                samples.len(),
                grid.slice_len() * grid.n_t()
            )));
        }
        Ok(SampledField { grid, samples })
    }

    /// Sample `f(x, t)` at every grid point.
    pub fn from_fn<F: Fn(&[f64], f64) -> Complex64 + Sync>(grid: GridSpec, f: F) -> Self {
        let shape = grid.shape();
        let slice_len = grid.slice_len();
        let mut samples = vec![Complex64::new(0.0, 0.0); slice_len * grid.n_t()];
        samples.par_chunks_mut(slice_len).enumerate().for_each(|(i, slice)| {
            let t = grid.t_coord(i);
            let mut x = vec![0.0; shape.len()];
            for (flat, s) in slice.iter_mut().enumerate() {
                let mut rem = flat;
                for a in (0..shape.len()).rev() {
                    x[a] = grid.x_coord(a, rem % shape[a]);
                    rem /= shape[a];
                }
                *s = f(&x, t);
            }
        });
        SampledField { grid, samples }
    }

    pub fn slice(&self, i: usize) -> &[Complex64] {
        let n = self.grid.slice_len();
        &self.samples[i * n..(i + 1) * n]
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        SampledField { grid: self.grid.clone(), samples: self.samples.iter().map(|z| z * c).collect() }
    }
}

/// `|z|^r` computed from `|z|²` with integer fast paths.
#[inline]
fn abs_pow(z: Complex64, r: Exponent) -> f64 {
    let s = z.norm_sqr();
    if s == 0.0 {
        return 0.0;
    }
    let p = r.recip().recip();
    if p.is_integer() {
        let n = *p.numer();
        if n == 2 {
            return s;
        }
        if n % 2 == 0 {
            return s.powi((n / 2) as i32);
        }
        if n == 1 {
            return s.sqrt();
        }
        return s.sqrt().powi(n as i32);
    }
    s.powf(0.5 * r.value())
}

/// Per-slice statistic: `Σ |f|^r h_x^d` for finite `r`, `max |f|` for `r = ∞`.
pub fn slice_stat(values: &[Complex64], r: Exponent, cell_volume: f64) -> f64 {
    if r.is_infinite() {
        values.iter().fold(0.0, |m, z| m.max(z.norm()))
    } else {
        pairwise_sum_by(values.len(), |i| abs_pow(values[i], r)) * cell_volume
    }
}

/// Combine per-slice statistics (from [`slice_stat`]) into `‖f‖_{L^q_t L^r_x}`.
pub fn combine_slice_stats(stats: &[f64], q: Exponent, r: Exponent, h_t: f64) -> f64 {
    // inner norm of slice i = stat^{1/r}; outer term = inner^q = stat^{q/r}
    let outer_term = |s: f64| -> f64 {
        if s == 0.0 {
            return 0.0;
        }
        if r.is_infinite() {
            s.powf(q.value())
        } else {
            let ratio = (q.recip().recip() * r.recip()).to_f64().unwrap();
            if ratio == 1.0 {
                s
            } else {
                s.powf(ratio)
            }
        }
    };
    if q.is_infinite() {
        stats
            .iter()
            .map(|&s| if r.is_infinite() { s } else { s.powf(r.recip_f64()) })
            .fold(0.0, f64::max)
    } else {
        let total = pairwise_sum_by(stats.len(), |i| outer_term(stats[i])) * h_t;
        total.powf(q.recip_f64())
    }
}

/// `‖f‖_{L^q_t L^r_x}` by the composite rectangle rule on the field's grid.
pub fn mixed_norm(field: &SampledField, q: Exponent, r: Exponent) -> f64 {
    let vol = field.grid.cell_volume();
    let n = field.grid.slice_len();
    let stats: Vec<f64> = field.samples.par_chunks(n).map(|s| slice_stat(s, r, vol)).collect();
    combine_slice_stats(&stats, q, r, field.grid.h_t)
}

/// `(Σ x_i²)^{1/2}`.
pub fn l2_aggregate(norms: &[f64]) -> f64 {
    debug_assert!(norms.iter().all(|x| *x >= 0.0));
    pairwise_sum_by(norms.len(), |i| norms[i] * norms[i]).sqrt()
}

/// `(‖c·f‖, |c|·‖f‖)`.
pub fn homogeneity_check(field: &SampledField, q: Exponent, r: Exponent, c: Complex64) -> (f64, f64) {
    (mixed_norm(&field.scaled(c), q, r), c.norm() * mixed_norm(field, q, r))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex(s: &str) -> Exponent {
        s.parse().unwrap()
    }

    #[test]
    fn exponent_parsing() {
        assert!(ex("inf").is_infinite());
        assert_eq!(ex("10/3").recip(), Rational64::new(3, 10));
        assert_eq!(ex("2.5").recip(), Rational64::new(2, 5));
        assert_eq!(ex("6").value(), 6.0);
        assert_eq!(ex("10/3").to_string(), "10/3");
        assert!("0.5".parse::<Exponent>().is_err());
        assert!("0".parse::<Exponent>().is_err());
        assert!("-2".parse::<Exponent>().is_err());
        assert!("abc".parse::<Exponent>().is_err());
        assert!(Exponent::from_f64(0.9).is_err());
        assert_eq!(Exponent::from_f64(4.0).unwrap(), ex("4"));
    }

    fn line_grid(x: (f64, f64), t: (f64, f64), h: f64) -> GridSpec {
        GridSpec::new(vec![x.0], vec![x.1], t.0, t.1, h, h, false).unwrap()
    }

    #[test]
    fn box_indicator() {
        let g = line_grid((-1.0, 3.0), (-1.0, 4.0), 1.0 / 16.0);
        let f = SampledField::from_fn(g, |x, t| {
            let inside = (0.0..=1.0).contains(&x[0]) && (0.0..=2.0).contains(&t);
            Complex64::new(if inside { 1.0 } else { 0.0 }, 0.0)
        });
        let v = mixed_norm(&f, ex("4"), ex("2"));
        assert!((v - 2f64.powf(0.25)).abs() < 1e-12);
    }

    #[test]
    fn constant_sup_norm() {
        let g = line_grid((0.0, 2.0), (0.0, 3.0), 0.25);
        let f = SampledField::from_fn(g, |_, _| Complex64::new(1.0, 0.0));
        assert_eq!(mixed_norm(&f, Exponent::INFINITY, Exponent::INFINITY), 1.0);
    }

    #[test]
    fn gaussian_l2() {
        let g = line_grid((-8.0, 8.0), (-8.0, 8.0), 1.0 / 16.0);
        let f = SampledField::from_fn(g, |x, t| {
            Complex64::new((-std::f64::consts::PI * (x[0] * x[0] + t * t)).exp(), 0.0)
        });
        let v = mixed_norm(&f, ex("2"), ex("2"));
        assert!((v / 0.5f64.sqrt() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn zero_field_and_aggregate() {
        let g = line_grid((0.0, 1.0), (0.0, 1.0), 0.1);
        let f = SampledField::zeros(g);
        assert_eq!(mixed_norm(&f, ex("3"), ex("inf")), 0.0);
        assert_eq!(l2_aggregate(&[3.0, 4.0]), 5.0);
        assert_eq!(l2_aggregate(&[1.5]), 1.5);
        assert_eq!(l2_aggregate(&[1.0; 4]), 2.0);
    }

    #[test]
    fn homogeneity_examples() {
        let g = line_grid((0.0, 1.0), (0.0, 1.0), 0.05);
        let f = SampledField::from_fn(g, |x, t| Complex64::new(x[0] - t, x[0] * t + 0.3));
        let (a, b) = homogeneity_check(&f, ex("3"), ex("5/2"), Complex64::new(0.0, 0.0));
        assert_eq!((a, b), (0.0, 0.0));
        for c in [Complex64::new(2.0, 0.0), Complex64::new(0.0, 1.0)] {
            let (a, b) = homogeneity_check(&f, ex("3"), ex("5/2"), c);
            assert!((a - b).abs() <= 1e-12 * b);
        }
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(vec![0.0], vec![0.0], 0.0, 1.0, 0.1, 0.1, false).is_err());
        assert!(GridSpec::new(vec![0.0], vec![2.0], 0.0, 1.0, 0.1, 0.1, true).is_err());
        assert!(GridSpec::new(vec![0.0], vec![1.0], 0.0, 1.0, 0.0, 0.1, false).is_err());
        let t = GridSpec::torus(2, 8, 16).unwrap();
        assert_eq!(t.shape(), vec![8, 8]);
        assert_eq!(t.n_t(), 16);
        assert_eq!(t.x_coord(0, 3), 3.0 / 8.0);
        assert!(SampledField::new(t, vec![Complex64::new(0.0, 0.0); 3]).is_err());
    }
}
