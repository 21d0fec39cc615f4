//! Caps on the paraboloid, the shear maps relating them to the axis box,
//! their dual space-time tubes, and the frequency nets and tuned lattices the
//! extremizer families are built from.
//!
//! Points of frequency space are `(ξ, η)` and points of space-time are
//! `(x, t)`; both are stored as slices of length `d + 1` with the last entry
//! being `η` (resp. `t`). All comparisons are non-strict, so boundary points
//! count as inside.

use crate::error::{LabError, Result};

/// Radius of the balls `C_k` around tuned lattice centers.
pub const BALL_RADIUS: f64 = 1e-10;

/// Slack used when flooring/ceiling quantities like `2/δ` that are meant to be
/// integers but arrive through floating point division.
const INT_SLACK: f64 = 1e-9;

/// A frequency `ω ∈ [-1, 1]^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqPoint(Vec<f64>);

impl FreqPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(LabError::InvalidParameter("frequency must have d >= 1 coordinates".into()));
        }
        if let Some(c) = coords.iter().find(|c| !(-1.0..=1.0).contains(*c)) {
            return Err(LabError::InvalidParameter(format!("frequency coordinate {c} outside [-1, 1]")));
        }
        Ok(FreqPoint(coords))
    }

    pub fn zero(dim: usize) -> Self {
        FreqPoint(vec![0.0; dim])
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|ω|²`
    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|w| w * w).sum()
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta <= 1.0 && delta.is_finite() {
        Ok(())
    } else {
        Err(LabError::InvalidDelta(delta))
    }
}

/// The parallelepiped `θ_{ω,δ}` over the `δ`-box at `ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cap {
    pub omega: FreqPoint,
    pub delta: f64,
}

impl Cap {
    pub fn new(omega: FreqPoint, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(LabError::InvalidDelta(delta));
        }
        Ok(Cap { omega, delta })
    }

    /// `|ξ_i - ω_i| ≤ δ` for all `i` and `|η - 2ω·(ξ-ω) - |ω|²| ≤ 2dδ²`.
    pub fn contains(&self, xi: &[f64], eta: f64) -> bool {
        let w = self.omega.coords();
        assert_eq!(xi.len(), w.len(), "dimension mismatch");
        let d = w.len() as f64;
        let in_box = xi.iter().zip(w).all(|(x, o)| (x - o).abs() <= self.delta);
        let lin: f64 = xi.iter().zip(w).map(|(x, o)| 2.0 * o * (x - o)).sum();
        in_box && (eta - lin - self.omega.norm_sq()).abs() <= 2.0 * d * self.delta * self.delta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShearMode {
    Forward,
    Inverse,
    Transpose,
    InverseTranspose,
}

/// The unimodular matrix `M_ω = [[I, 0], [2ω, 1]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShearMap {
    pub omega: FreqPoint,
}

impl ShearMap {
    pub fn new(omega: FreqPoint) -> Self {
        ShearMap { omega }
    }

    /// Apply `M_ω`, `M_ω⁻¹`, `M_ωᵀ` or `M_ω⁻ᵀ` to a point of length `d + 1`.
    ///
    /// `M_ω (ξ, η) = (ξ, 2ω·ξ + η)` and `M_ωᵀ (x, t) = (x + 2ωt, t)`.
    pub fn apply(&self, point: &[f64], mode: ShearMode) -> Vec<f64> {
        let w = self.omega.coords();
        let d = w.len();
        assert_eq!(point.len(), d + 1, "dimension mismatch");
        let mut out = point.to_vec();
        match mode {
            ShearMode::Forward | ShearMode::Inverse => {
                let sign = if mode == ShearMode::Forward { 1.0 } else { -1.0 };
                let dot: f64 = w.iter().zip(point).map(|(o, p)| 2.0 * o * p).sum();
                out[d] += sign * dot;
            }
            ShearMode::Transpose | ShearMode::InverseTranspose => {
                let sign = if mode == ShearMode::Transpose { 1.0 } else { -1.0 };
                let t = point[d];
                for (o, x) in w.iter().zip(out.iter_mut()) {
                    *x += sign * 2.0 * o * t;
                }
            }
        }
        out
    }

    /// Always 1: the matrix is unit lower triangular.
    pub fn determinant(&self) -> f64 {
        1.0
    }
}

/// `M · T_ω⁰ + shift`, where `T_ω⁰ = M_ω⁻ᵀ T_δ` is the tube dual to `θ_ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tube {
    pub omega: FreqPoint,
    pub delta: f64,
    pub dilation: f64,
    pub shift: Vec<f64>,
}

impl Tube {
    pub fn new(omega: FreqPoint, delta: f64, dilation: f64, shift: Vec<f64>) -> Result<Self> {
        check_delta(delta)?;
        if !(dilation >= 1.0) {
            return Err(LabError::InvalidParameter(format!("tube dilation must be >= 1, got {dilation}")));
        }
        if shift.len() != omega.dim() + 1 {
            return Err(LabError::InvalidParameter("tube shift must have d + 1 coordinates".into()));
        }
        Ok(Tube { omega, delta, dilation, shift })
    }

    /// Half-width `M δ⁻¹` of the spatial slabs.
    pub fn space_half_width(&self) -> f64 {
        self.dilation / self.delta
    }

    /// Half-length `M (2d)⁻¹ δ⁻²` in time.
    pub fn time_half_width(&self) -> f64 {
        self.dilation / (2.0 * self.omega.dim() as f64 * self.delta * self.delta)
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        let d = self.omega.dim();
        assert_eq!(point.len(), d + 1, "dimension mismatch");
        let t = point[d] - self.shift[d];
        let xw = self.space_half_width();
        t.abs() <= self.time_half_width()
            && self
                .omega
                .coords()
                .iter()
                .enumerate()
                .all(|(i, o)| (point[i] - self.shift[i] + 2.0 * o * t).abs() <= xw)
    }
}

/// Whether `M·T_ω⁰ + a` and `M·T_ω⁰ + b` are disjoint.
///
/// The two translates meet iff `M_ωᵀ(a - b)` lies in the difference body
/// `2·(M·T_δ)`, which is again an axis box.
pub fn tubes_disjoint(omega: &FreqPoint, delta: f64, dilation: f64, shift_a: &[f64], shift_b: &[f64]) -> bool {
    let d = omega.dim();
    assert!(shift_a.len() == d + 1 && shift_b.len() == d + 1, "dimension mismatch");
    let dt = shift_a[d] - shift_b[d];
    let x_reach = 2.0 * dilation / delta;
    let t_reach = 2.0 * dilation / (2.0 * d as f64 * delta * delta);
    if dt.abs() > t_reach {
        return true;
    }
    omega
        .coords()
        .iter()
        .enumerate()
        .any(|(i, o)| (shift_a[i] - shift_b[i] + 2.0 * o * dt).abs() > x_reach)
}

/// Whether the closed Euclidean ball `B(center, radius)` lies inside
/// `M·T_ω⁰ + tube_shift`.
///
/// Each defining constraint is a slab `|n·(p - s)| ≤ w`; a ball fits in it iff
/// `|n·(c - s)| + radius·|n| ≤ w`.
pub fn ball_in_tube(
    omega: &FreqPoint,
    delta: f64,
    dilation: f64,
    tube_shift: &[f64],
    center: &[f64],
    radius: f64,
) -> bool {
    let d = omega.dim();
    assert!(tube_shift.len() == d + 1 && center.len() == d + 1, "dimension mismatch");
    assert!(radius >= 0.0, "radius must be non-negative");
    let dt = center[d] - tube_shift[d];
    let x_half = dilation / delta;
    let t_half = dilation / (2.0 * d as f64 * delta * delta);
    if dt.abs() + radius > t_half {
        return false;
    }
    omega.coords().iter().enumerate().all(|(i, o)| {
        let normal_len = (1.0 + 4.0 * o * o).sqrt();
        (center[i] - tube_shift[i] + 2.0 * o * dt).abs() + radius * normal_len <= x_half
    })
}

/// A `δ`-separated set of frequencies in `[-1, 1]^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyNet {
    pub delta: f64,
    pub dim: usize,
    pub points: Vec<FreqPoint>,
}

impl FrequencyNet {
    /// A net consisting of one frequency; used for degenerate experiments.
    pub fn single(omega: FreqPoint, delta: f64) -> Self {
        FrequencyNet { delta, dim: omega.dim(), points: vec![omega] }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Number of lattice points `-1 + kδ` in `[-1, 1]`, i.e. `⌊2/δ⌋ + 1`.
pub fn net_points_per_axis(delta: f64) -> usize {
    (2.0 / delta + INT_SLACK).floor() as usize + 1
}

/// The lattice `(-1 + δZ)^d ∩ [-1, 1]^d`, enumerated in row-major order
/// (last axis fastest).
pub fn build_net(delta: f64, dim: usize) -> Result<FrequencyNet> {
    check_delta(delta)?;
    if dim == 0 {
        return Err(LabError::InvalidParameter("dimension must be >= 1".into()));
    }
    let per_axis = net_points_per_axis(delta);
    let axis: Vec<f64> = (0..per_axis).map(|k| (-1.0 + k as f64 * delta).min(1.0)).collect();
    let total = per_axis.pow(dim as u32);
    let mut points = Vec::with_capacity(total);
    let mut idx = vec![0usize; dim];
    for _ in 0..total {
        points.push(FreqPoint(idx.iter().map(|&k| axis[k]).collect()));
        for a in (0..dim).rev() {
            idx[a] += 1;
            if idx[a] < per_axis {
                break;
            }
            idx[a] = 0;
        }
    }
    Ok(FrequencyNet { delta, dim, points })
}

/// Smallest integer `n` with `n ≥ x`, forgiving floating point noise above
/// an integer.
pub(crate) fn ceil_count(x: f64) -> usize {
    (x - INT_SLACK).ceil().max(0.0) as usize
}

/// Centers `c_k = (k δ^{-1-ε₀}, k₁)` with `0 ≤ k₁ < δ⁻²` and
/// `0 ≤ k_i < δ⁻¹` for `i ≥ 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct TunedLattice {
    pub delta: f64,
    pub eps0: f64,
    pub dim: usize,
    /// Integer labels `k`, row-major with `k₁` slowest.
    pub labels: Vec<Vec<i64>>,
    /// Space-time centers `(k δ^{-1-ε₀}, k₁)`.
    pub centers: Vec<Vec<f64>>,
    pub ball_radius: f64,
}

impl TunedLattice {
    pub fn new(delta: f64, dim: usize, eps0: f64) -> Result<Self> {
        check_delta(delta)?;
        if dim == 0 {
            return Err(LabError::InvalidParameter("dimension must be >= 1".into()));
        }
        if !(eps0 > 0.0 && eps0 < 1.0) {
            return Err(LabError::InvalidParameter(format!("eps0 must lie in (0, 1), got {eps0}")));
        }
        let counts = Self::counts(delta, dim);
        let spacing = delta.powf(-1.0 - eps0);
        let total: usize = counts.iter().product();
        let mut labels = Vec::with_capacity(total);
        let mut centers = Vec::with_capacity(total);
        let mut k = vec![0i64; dim];
        for _ in 0..total {
            let mut c: Vec<f64> = k.iter().map(|&ki| ki as f64 * spacing).collect();
            c.push(k[0] as f64);
            labels.push(k.clone());
            centers.push(c);
            for a in (0..dim).rev() {
                k[a] += 1;
                if (k[a] as usize) < counts[a] {
                    break;
                }
                k[a] = 0;
            }
        }
        Ok(TunedLattice { delta, eps0, dim, labels, centers, ball_radius: BALL_RADIUS })
    }

    /// Label ranges per axis: `⌈δ⁻²⌉` for `k₁`, `⌈δ⁻¹⌉` for the rest.
    pub fn counts(delta: f64, dim: usize) -> Vec<usize> {
        let mut c = vec![ceil_count(1.0 / delta); dim];
        c[0] = ceil_count(1.0 / (delta * delta));
        c
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Horizontal spacing `δ^{-1-ε₀}` between consecutive labels.
    pub fn spacing(&self) -> f64 {
        self.delta.powf(-1.0 - self.eps0)
    }

    /// Every nonzero label difference `k - k'` realised by some pair of
    /// lattice points. The tube predicates are translation invariant, so
    /// checking these is the same as checking all ordered pairs.
    pub fn label_differences(&self) -> Vec<Vec<i64>> {
        let counts = Self::counts(self.delta, self.dim);
        let spans: Vec<i64> = counts.iter().map(|&c| 2 * c as i64 - 1).collect();
        let total: i64 = spans.iter().product();
        let mut out = Vec::with_capacity(total as usize);
        let mut k: Vec<i64> = counts.iter().map(|&c| -(c as i64 - 1)).collect();
        for _ in 0..total {
            if k.iter().any(|&v| v != 0) {
                out.push(k.clone());
            }
            for a in (0..self.dim).rev() {
                k[a] += 1;
                if k[a] <= counts[a] as i64 - 1 {
                    break;
                }
                k[a] = -(counts[a] as i64 - 1);
            }
        }
        out
    }

    /// Space-time displacement `c_k - c_{k'}` for a label difference.
    pub fn displacement(&self, label_diff: &[i64]) -> Vec<f64> {
        let s = self.spacing();
        let mut v: Vec<f64> = label_diff.iter().map(|&k| k as f64 * s).collect();
        v.push(label_diff[0] as f64);
        v
    }
}

/// Outcome of an exhaustive lemma check.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaCheck {
    pub checked: usize,
    pub violations: usize,
    /// One offending `(ω, label or label difference)` if any.
    pub example: Option<(Vec<f64>, Vec<i64>)>,
}

impl LemmaCheck {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    fn record(&mut self, ok: bool, omega: &FreqPoint, label: &[i64]) {
        self.checked += 1;
        if !ok {
            self.violations += 1;
            if self.example.is_none() {
                self.example = Some((omega.coords().to_vec(), label.to_vec()));
            }
        }
    }
}

/// `C_k ⊂ M·T_ω⁰ + c_k` for every center and every net frequency.
pub fn check_ball_containment(lattice: &TunedLattice, net: &FrequencyNet, dilation: f64) -> LemmaCheck {
    let mut res = LemmaCheck { checked: 0, violations: 0, example: None };
    for omega in &net.points {
        for (label, c) in lattice.labels.iter().zip(&lattice.centers) {
            let ok = ball_in_tube(omega, lattice.delta, dilation, c, c, lattice.ball_radius);
            res.record(ok, omega, label);
        }
    }
    res
}

/// Distinct centers give disjoint `M`-dilated tubes, for every net frequency.
pub fn check_pairwise_disjoint(lattice: &TunedLattice, net: &FrequencyNet, dilation: f64) -> LemmaCheck {
    let diffs = lattice.label_differences();
    let zero = vec![0.0; lattice.dim + 1];
    let mut res = LemmaCheck { checked: 0, violations: 0, example: None };
    for omega in &net.points {
        for k in &diffs {
            let disp = lattice.displacement(k);
            res.record(tubes_disjoint(omega, lattice.delta, dilation, &disp, &zero), omega, k);
        }
    }
    res
}

/// `C_{k'} ⊂ M·T_ω⁰ + c_k` holds exactly when `k = k'`.
pub fn check_ball_exclusivity(lattice: &TunedLattice, net: &FrequencyNet, dilation: f64) -> LemmaCheck {
    let mut diffs = lattice.label_differences();
    diffs.push(vec![0; lattice.dim]);
    let zero = vec![0.0; lattice.dim + 1];
    let mut res = LemmaCheck { checked: 0, violations: 0, example: None };
    for omega in &net.points {
        for k in &diffs {
            let disp = lattice.displacement(k);
            let inside = ball_in_tube(omega, lattice.delta, dilation, &zero, &disp, lattice.ball_radius);
            let same = k.iter().all(|&v| v == 0);
            res.record(inside == same, omega, k);
        }
    }
    res
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fp(v: &[f64]) -> FreqPoint {
        FreqPoint::new(v.to_vec()).unwrap()
    }

    #[test]
    fn net_examples() {
        let n = build_net(1.0, 1).unwrap();
        let pts: Vec<f64> = n.points.iter().map(|p| p.coords()[0]).collect();
        assert_eq!(pts, vec![-1.0, 0.0, 1.0]);
        assert_eq!(build_net(0.5, 1).unwrap().len(), 5);
        assert_eq!(build_net(0.5, 2).unwrap().len(), 25);
        assert_eq!(build_net(0.4, 1).unwrap().len(), 6);
        assert_eq!(build_net(1.0 / 3.0, 1).unwrap().len(), 7);
    }

    #[test]
    fn net_rejects_bad_delta() {
        assert!(build_net(0.0, 1).is_err());
        assert!(build_net(-0.1, 1).is_err());
        assert!(build_net(1.5, 1).is_err());
        assert!(build_net(0.5, 0).is_err());
    }

    #[test]
    fn net_separation_exhaustive() {
        for &delta in &[1.0, 0.5, 0.25, 0.125, 1.0 / 16.0, 0.3] {
            for dim in 1..=2 {
                let net = build_net(delta, dim).unwrap();
                let expected = net_points_per_axis(delta).pow(dim as u32);
                assert_eq!(net.len(), expected);
                for (i, a) in net.points.iter().enumerate() {
                    assert!(a.coords().iter().all(|c| (-1.0..=1.0).contains(c)));
                    for b in &net.points[i + 1..] {
                        let dist: f64 =
                            a.coords().iter().zip(b.coords()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
                        assert!(dist >= delta * (1.0 - 1e-12), "{dist} < {delta}");
                    }
                }
                if delta <= 0.5 {
                    let lo = delta.powi(-(dim as i32));
                    assert!(net.len() as f64 >= lo && net.len() as f64 <= 3f64.powi(dim as i32) * lo);
                }
            }
        }
    }

    #[test]
    fn cap_examples() {
        let cap = Cap::new(FreqPoint::zero(1), 0.1).unwrap();
        assert!(cap.contains(&[0.0], 0.0));
        assert!(cap.contains(&[0.1], 2.0 * 0.1 * 0.1));
        assert!(!cap.contains(&[0.2], 0.0));
        assert!(Cap::new(FreqPoint::zero(1), 1.0).is_err());
    }

    #[test]
    fn shear_examples() {
        let id = ShearMap::new(FreqPoint::zero(2));
        let p = [0.3, -1.2, 4.0];
        for mode in [ShearMode::Forward, ShearMode::Inverse, ShearMode::Transpose, ShearMode::InverseTranspose] {
            assert_eq!(id.apply(&p, mode), p.to_vec());
        }
        let m = ShearMap::new(fp(&[1.0]));
        assert_eq!(m.apply(&[1.0, 0.0], ShearMode::Forward), vec![1.0, 2.0]);
        assert_eq!(m.apply(&[0.0, 1.0], ShearMode::Transpose), vec![2.0, 1.0]);
        assert_eq!(m.determinant(), 1.0);
    }

    #[test]
    fn tube_examples() {
        let t = Tube::new(FreqPoint::zero(1), 0.1, 1.0, vec![0.0, 0.0]).unwrap();
        assert!(t.contains(&[10.0, 0.0]));
        assert!(!t.contains(&[10.0 + 1e-9, 0.0]));
        let tilted = Tube::new(fp(&[1.0]), 0.1, 1.0, vec![0.0, 0.0]).unwrap();
        assert!(!tilted.contains(&[0.0, 50.0]));
        assert!(tilted.contains(&[-98.0, 49.0]));
        assert!(!tilted.contains(&[-98.0, 0.0]));
        let shifted = Tube::new(fp(&[0.3, -0.7]), 0.25, 3.0, vec![5.0, -2.0, 7.0]).unwrap();
        assert!(shifted.contains(&[5.0, -2.0, 7.0]));
        assert!(Tube::new(FreqPoint::zero(1), 0.1, 0.5, vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn disjoint_examples() {
        let z = FreqPoint::zero(1);
        assert!(!tubes_disjoint(&z, 0.25, 1.0, &[3.0, 1.0], &[3.0, 1.0]));
        assert!(tubes_disjoint(&z, 0.25, 1.0, &[0.0, 0.0], &[100.0, 0.0]));
        // reach is exactly 2δ⁻¹ = 8: touching tubes are not disjoint
        assert!(!tubes_disjoint(&z, 0.25, 1.0, &[0.0, 0.0], &[8.0, 0.0]));
    }

    #[test]
    fn disjointness_agrees_with_point_witness() {
        // When the predicate says the tubes meet, the midpoint of the shifts
        // lies in both (the body is symmetric and convex).
        let omega = fp(&[-0.5]);
        let (delta, m) = (0.25, 1.5);
        for dx in [-40.0, -20.0, -5.0, 0.0, 7.0, 13.0, 30.0] {
            for dt in [-30.0, -12.0, 0.0, 4.0, 11.0, 25.0] {
                let a = vec![0.0, 0.0];
                let b = vec![dx, dt];
                let mid = vec![dx / 2.0, dt / 2.0];
                let ta = Tube::new(omega.clone(), delta, m, a.clone()).unwrap();
                let tb = Tube::new(omega.clone(), delta, m, b.clone()).unwrap();
                let meet = ta.contains(&mid) && tb.contains(&mid);
                assert_eq!(!tubes_disjoint(&omega, delta, m, &a, &b), meet, "dx={dx} dt={dt}");
            }
        }
    }

    #[test]
    fn ball_examples() {
        for &delta in &[0.125, 1.0 / 16.0] {
            for omega in &build_net(delta, 2).unwrap().points {
                let s = [3.0, -1.0, 2.0];
                assert!(ball_in_tube(omega, delta, 1.0, &s, &s, BALL_RADIUS));
            }
        }
        let z = FreqPoint::zero(1);
        assert!(ball_in_tube(&z, 0.1, 1.0, &[0.0, 0.0], &[9.9, 0.0], 0.0));
        assert!(!ball_in_tube(&z, 0.1, 1.0, &[0.0, 0.0], &[0.0, 0.0], 20.0));
    }

    #[test]
    fn tuned_lattice_counts() {
        let l = TunedLattice::new(0.5, 1, 0.5).unwrap();
        assert_eq!(l.len(), 4);
        let l = TunedLattice::new(0.125, 2, 0.5).unwrap();
        assert_eq!(l.len(), 64 * 8);
        assert_eq!(l.centers[9], vec![1.0 * l.spacing(), 1.0 * l.spacing(), 1.0]);
        assert_eq!(l.label_differences().len(), 127 * 15 - 1);
    }

    #[test]
    fn disjointness_difference_route_matches_pairs() {
        let delta = 0.125;
        let lattice = TunedLattice::new(delta, 1, 0.5).unwrap();
        let net = build_net(delta, 1).unwrap();
        for &m in &[1.0, delta.powf(-0.25), 3.0] {
            for omega in &net.points {
                let mut pair_viol = 0;
                for (i, a) in lattice.centers.iter().enumerate() {
                    for b in &lattice.centers[i + 1..] {
                        if !tubes_disjoint(omega, delta, m, a, b) {
                            pair_viol += 1;
                        }
                    }
                }
                let single = FrequencyNet::single(omega.clone(), delta);
                let diff = check_pairwise_disjoint(&lattice, &single, m);
                assert_eq!(pair_viol == 0, diff.passed());
            }
        }
    }

    #[test]
    fn tuned_lemmas_hold_at_small_delta() {
        // δ = 1/32 is past the threshold where δ^{-1-ε₀} - 2 > 2δ^{-1-ε₀²}.
        let delta = 1.0 / 32.0;
        let lattice = TunedLattice::new(delta, 1, 0.5).unwrap();
        let net = build_net(delta, 1).unwrap();
        let m = delta.powf(-0.25);
        assert!(check_ball_containment(&lattice, &net, 1.0).passed());
        assert!(check_pairwise_disjoint(&lattice, &net, m).passed());
        assert!(check_ball_exclusivity(&lattice, &net, m).passed());
    }

    #[test]
    fn pairwise_disjointness_fails_at_coarse_delta() {
        // Neighbouring labels at ω = -1: |δ^{-3/2} + 2ω| = 8^{3/2} - 2 ≈ 20.6
        // while the reach 2Mδ⁻¹ = 2·8^{1/4}·8 ≈ 26.9.
        let delta = 0.125;
        let lattice = TunedLattice::new(delta, 1, 0.5).unwrap();
        let net = build_net(delta, 1).unwrap();
        let res = check_pairwise_disjoint(&lattice, &net, delta.powf(-0.25));
        assert!(!res.passed());
        let (w, k) = res.example.unwrap();
        assert_eq!(w, vec![-1.0]);
        assert_eq!(k[0].abs(), 1);
    }
}
