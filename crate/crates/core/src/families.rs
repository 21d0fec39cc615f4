//! The four lower-bound extremizer families, their synthesis on space-time
//! grids, and the decoupling ratios they certify.
//!
//! Each family assigns to every frequency `ω` of the net one or more
//! wavepacket shifts:
//!
//! * [`FamilyKind::Bush`]: every packet centred at the origin, so all of them
//!   interfere constructively near `0`.
//! * [`FamilyKind::SpaceSeparated`]: packet `i` centred at `(i·δ^{-s}, 0)`.
//! * [`FamilyKind::TimeSeparated`]: packet `i` centred at `(0, i·δ^{-s})`.
//! * [`FamilyKind::TunedBush`]: every frequency carries a packet at every
//!   tuned lattice center `c_k`, so the bush repeats on many temporally
//!   separated balls.
//!
//! Fields are never materialized during ratio computation: each time slice
//! is synthesized into a per-worker buffer, reduced to the per-slice
//! statistics of [`crate::mixed_norm`], and dropped.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::envelope::{e, phi_row, EnvelopeParams, WavepacketSpec};
use crate::error::{LabError, Result};
use crate::fit::{fit_line, FitResult};
use crate::geometry::{build_net, FreqPoint, FrequencyNet, TunedLattice};
use crate::mixed_norm::{combine_slice_stats, l2_aggregate, slice_stat, Exponent, GridSpec, SampledField};

pub const DEFAULT_TAIL_CUTOFF: f64 = 1e-8;
pub const DEFAULT_TRUNC: f64 = 8.0;
pub const DEFAULT_SEP_EXPONENT: f64 = 4.0;
pub const DEFAULT_EPS0: f64 = 0.5;
pub const DEFAULT_BUDGET: u64 = 1 << 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum FamilyKind {
    Bush,
    SpaceSeparated,
    TimeSeparated,
    TunedBush,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 4] =
        [FamilyKind::Bush, FamilyKind::SpaceSeparated, FamilyKind::TimeSeparated, FamilyKind::TunedBush];

    /// Index into [`crate::exponents::lower_bound_terms`] of the exponent this
    /// family is built to exhibit.
    pub fn term_index(&self) -> usize {
        match self {
            FamilyKind::Bush => 0,
            FamilyKind::SpaceSeparated => 1,
            FamilyKind::TimeSeparated => 2,
            FamilyKind::TunedBush => 3,
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FamilyKind::Bush => "bush",
            FamilyKind::SpaceSeparated => "space",
            FamilyKind::TimeSeparated => "time",
            FamilyKind::TunedBush => "tunedbush",
        })
    }
}

impl FromStr for FamilyKind {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bush" => Ok(FamilyKind::Bush),
            "space" | "spaceseparated" => Ok(FamilyKind::SpaceSeparated),
            "time" | "timeseparated" => Ok(FamilyKind::TimeSeparated),
            "tunedbush" | "tuned" => Ok(FamilyKind::TunedBush),
            other => Err(LabError::InvalidParameter(format!("unknown family '{other}'"))),
        }
    }
}

/// Family construction and discretization parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyParams {
    pub delta: f64,
    pub dim: usize,
    /// Shift spacing `δ^{-sep_exponent}` for the separated families.
    pub sep_exponent: f64,
    pub eps0: f64,
    pub envelope: EnvelopeParams,
    /// Tubes are covered up to this dilate by [`auto_grid`].
    pub trunc: f64,
    pub h_x: f64,
    pub h_t: f64,
    /// Packets are evaluated only where their envelope exceeds this.
    pub tail_cutoff: f64,
    /// Maximum number of grid samples.
    pub budget: u64,
}

impl FamilyParams {
    /// Defaults: `m = 4`, `h_x = 1/8`, `h_t = 1/(8d)`, `trunc = 8`,
    /// cutoff `1e-8`, separation exponent 4, `ε₀ = 1/2`.
    pub fn new(delta: f64, dim: usize) -> Self {
        FamilyParams {
            delta,
            dim,
            sep_exponent: DEFAULT_SEP_EXPONENT,
            eps0: DEFAULT_EPS0,
            envelope: EnvelopeParams::default(),
            trunc: DEFAULT_TRUNC,
            h_x: 1.0 / 8.0,
            h_t: 1.0 / (8.0 * dim.max(1) as f64),
            tail_cutoff: DEFAULT_TAIL_CUTOFF,
            budget: DEFAULT_BUDGET,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(LabError::InvalidParameter(m));
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(LabError::InvalidDelta(self.delta));
        }
        if self.dim == 0 {
            return bad("dimension must be >= 1".into());
        }
        if !(self.sep_exponent >= 3.0) {
            return bad(format!("sep_exponent must be >= 3, got {}", self.sep_exponent));
        }
        if !(self.eps0 > 0.0 && self.eps0 < 1.0) {
            return bad(format!("eps0 must lie in (0, 1), got {}", self.eps0));
        }
        if !(self.trunc >= 2.0) {
            return bad(format!("trunc must be >= 2, got {}", self.trunc));
        }
        if !(self.h_x > 0.0 && self.h_t > 0.0) {
            return bad("grid spacings must be positive".into());
        }
        if !(self.tail_cutoff >= 0.0) {
            return bad("tail cutoff must be non-negative".into());
        }
        Ok(())
    }
}

/// All wavepackets sharing one frequency: together they form `f_{θ_ω}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketGroup {
    pub omega: FreqPoint,
    pub packets: Vec<WavepacketSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilySpec {
    pub kind: FamilyKind,
    pub params: FamilyParams,
    pub groups: Vec<PacketGroup>,
    /// Common amplitude multiplying every packet.
    pub amplitude: Complex64,
}

impl FamilySpec {
    pub fn packet_count(&self) -> usize {
        self.groups.iter().map(|g| g.packets.len()).sum()
    }

    pub fn packets(&self) -> impl Iterator<Item = &WavepacketSpec> {
        self.groups.iter().flat_map(|g| g.packets.iter())
    }

    /// `Σ_ω f_{θ_ω}(p)` by direct evaluation of every packet (no cutoff).
    pub fn value_at(&self, point: &[f64]) -> Complex64 {
        self.amplitude * self.packets().map(|p| p.wavepacket_value(point)).sum::<Complex64>()
    }

    pub fn with_amplitude(mut self, amplitude: Complex64) -> Self {
        self.amplitude = amplitude;
        self
    }
}

/// Build a family on the lattice net `build_net(δ, d)`, refusing it if its
/// [`auto_grid`] would exceed the sample budget.
pub fn build_family(kind: FamilyKind, params: &FamilyParams) -> Result<FamilySpec> {
    params.validate()?;
    let net = build_net(params.delta, params.dim)?;
    let spec = build_family_on_net(kind, params, &net)?;
    auto_grid(&spec, params.trunc)?;
    Ok(spec)
}

/// Build a family on an arbitrary `δ`-separated net (no budget check).
pub fn build_family_on_net(kind: FamilyKind, params: &FamilyParams, net: &FrequencyNet) -> Result<FamilySpec> {
    params.validate()?;
    if net.dim != params.dim {
        return Err(LabError::InvalidParameter("net dimension differs from family dimension".into()));
    }
    let d = params.dim;
    let spacing = params.delta.powf(-params.sep_exponent);
    let tuned = if kind == FamilyKind::TunedBush {
        Some(TunedLattice::new(params.delta, d, params.eps0)?)
    } else {
        None
    };
    let mut groups = Vec::with_capacity(net.len());
    for (idx, omega) in net.points.iter().enumerate() {
        let mut origin = vec![0.0; d + 1];
        let shifts: Vec<Vec<f64>> = match kind {
            FamilyKind::Bush => vec![origin],
            FamilyKind::SpaceSeparated => {
                origin[0] = idx as f64 * spacing;
                vec![origin]
            }
            FamilyKind::TimeSeparated => {
                origin[d] = idx as f64 * spacing;
                vec![origin]
            }
            FamilyKind::TunedBush => tuned.as_ref().expect("lattice built").centers.clone(),
        };
        let packets = shifts
            .into_iter()
            .map(|s| WavepacketSpec::new(omega.clone(), params.delta, s, params.envelope))
            .collect::<Result<Vec<_>>>()?;
        groups.push(PacketGroup { omega: omega.clone(), packets });
    }
    Ok(FamilySpec { kind, params: params.clone(), groups, amplitude: Complex64::new(1.0, 0.0) })
}

/// The smallest axis-aligned grid (with the family's spacings) containing
/// the `trunc`-dilate of every shifted tube.
pub fn auto_grid(spec: &FamilySpec, trunc: f64) -> Result<GridSpec> {
    let p = &spec.params;
    if !(trunc >= 2.0) {
        return Err(LabError::InvalidParameter(format!("trunc must be >= 2, got {trunc}")));
    }
    let d = p.dim;
    let t_half = trunc / (2.0 * d as f64 * p.delta * p.delta);
    let x_half = trunc / p.delta;
    let mut lo = vec![f64::INFINITY; d + 1];
    let mut hi = vec![f64::NEG_INFINITY; d + 1];
    for pk in spec.packets() {
        for a in 0..d {
            let reach = x_half + 2.0 * pk.omega.coords()[a].abs() * t_half;
            lo[a] = lo[a].min(pk.shift[a] - reach);
            hi[a] = hi[a].max(pk.shift[a] + reach);
        }
        lo[d] = lo[d].min(pk.shift[d] - t_half);
        hi[d] = hi[d].max(pk.shift[d] + t_half);
    }
    if spec.packet_count() == 0 {
        return Err(LabError::InvalidParameter("cannot size a grid for an empty family".into()));
    }
    let snap = |lo: f64, hi: f64, h: f64| -> (f64, f64) {
        let n = ((hi - lo) / h - 1e-9).ceil().max(1.0);
        let mid = 0.5 * (lo + hi);
        (mid - 0.5 * n * h, mid + 0.5 * n * h)
    };
    let mut x_min = Vec::with_capacity(d);
    let mut x_max = Vec::with_capacity(d);
    for a in 0..d {
        let (l, h) = snap(lo[a], hi[a], p.h_x);
        x_min.push(l);
        x_max.push(h);
    }
    let (t_min, t_max) = snap(lo[d], hi[d], p.h_t);
    let grid = GridSpec::new(x_min, x_max, t_min, t_max, p.h_x, p.h_t, false)?;
    let samples = grid.sample_count();
    if samples > p.budget as u128 {
        return Err(LabError::BudgetExceeded { delta: p.delta, samples, budget: p.budget });
    }
    Ok(grid)
}

/// Index box `[lo_a, hi_a)` per spatial axis.
type IndexBox = Vec<(usize, usize)>;

fn box_len(b: &IndexBox) -> usize {
    b.iter().map(|(l, h)| h - l).product()
}

/// Precomputed per-grid data shared by all slices.
struct Synthesizer<'a> {
    spec: &'a FamilySpec,
    grid: &'a GridSpec,
    shape: Vec<usize>,
    /// `e(ω_a x_j)` per group, axis and column.
    phase_tables: Vec<Vec<Vec<Complex64>>>,
}

/// One packet's support in the current slice.
struct ActivePacket {
    time_factor: f64,
    tau: f64,
    bx: IndexBox,
}

#[derive(Default)]
struct Scratch {
    group: Vec<Complex64>,
    moduli: Vec<Vec<f64>>,
    factors: Vec<Vec<Complex64>>,
    active: Vec<ActivePacket>,
}

impl<'a> Synthesizer<'a> {
    fn new(spec: &'a FamilySpec, grid: &'a GridSpec) -> Result<Self> {
        if grid.dim() != spec.params.dim {
            return Err(LabError::InvalidParameter("grid dimension differs from family dimension".into()));
        }
        let shape = grid.shape();
        let phase_tables = spec
            .groups
            .iter()
            .map(|g| {
                (0..shape.len())
                    .map(|a| {
                        let w = g.omega.coords()[a];
                        (0..shape[a]).map(|j| e(w * grid.x_coord(a, j))).collect()
                    })
                    .collect()
            })
            .collect();
        Ok(Synthesizer { spec, grid, shape, phase_tables })
    }

    /// Columns `j` whose coordinate lies in `[lo, hi]`, as a half-open range.
    fn column_range(&self, axis: usize, lo: f64, hi: f64) -> (usize, usize) {
        let g = self.grid;
        let n = self.shape[axis] as f64;
        let a = ((lo - g.x_min[axis]) / g.h_x - 0.5).ceil().max(0.0);
        let b = ((hi - g.x_min[axis]) / g.h_x - 0.5).floor().min(n - 1.0);
        if b < a {
            (0, 0)
        } else {
            (a as usize, b as usize + 1)
        }
    }

    /// Support box of a packet in the slice at time `t`, or `None` when its
    /// envelope is below the cutoff everywhere in the slice.
    fn packet_support(&self, pk: &WavepacketSpec, t: f64) -> Option<ActivePacket> {
        let p = &self.spec.params;
        let d = p.dim;
        let env = &p.envelope;
        let tau = t - pk.shift[d];
        let time_factor = pk.time_factor(tau);
        let rest = env.norm_const.powi(d as i32 - 1);
        if time_factor * rest * env.norm_const <= p.tail_cutoff {
            return None;
        }
        let u_max = env.support_radius(p.tail_cutoff / (time_factor * rest));
        let x_reach = u_max / p.delta;
        let mut bx = Vec::with_capacity(d);
        for a in 0..d {
            let center = pk.shift[a] - 2.0 * pk.omega.coords()[a] * tau;
            let r = self.column_range(a, center - x_reach, center + x_reach);
            if r.0 == r.1 {
                return None;
            }
            bx.push(r);
        }
        Some(ActivePacket { time_factor, tau, bx })
    }

    /// Synthesize group `g` at time `t` into `scratch.group` (row-major over
    /// the returned box). Returns `None` if the group vanishes in this slice.
    fn group_slice(&self, g: usize, t: f64, s: &mut Scratch) -> Option<IndexBox> {
        let p = &self.spec.params;
        let d = p.dim;
        let group = &self.spec.groups[g];
        s.active.clear();
        for pk in &group.packets {
            if let Some(a) = self.packet_support(pk, t) {
                s.active.push(a);
            }
        }
        if s.active.is_empty() {
            return None;
        }
        let gbox: IndexBox = (0..d)
            .map(|a| {
                let lo = s.active.iter().map(|ap| ap.bx[a].0).min().unwrap();
                let hi = s.active.iter().map(|ap| ap.bx[a].1).max().unwrap();
                (lo, hi)
            })
            .collect();
        let glen = box_len(&gbox);
        s.group.clear();
        s.group.resize(glen, Complex64::new(0.0, 0.0));
        s.moduli.resize_with(d, Vec::new);
        s.factors.resize_with(d, Vec::new);

        let omega = group.omega.coords();
        let w2 = group.omega.norm_sq();
        let cutoff = p.tail_cutoff;
        let gstrides = strides(&gbox);
        let active = std::mem::take(&mut s.active);
        for (ap, pk) in active.iter().zip(group.packets.iter().filter(|pk| self.packet_support_nonempty(pk, t))) {
            // per-axis moduli φ(δ x'_a) and complex factors e(ω_a x_j)·φ(δ x'_a)
            for a in 0..d {
                let (lo, hi) = ap.bx[a];
                let len = hi - lo;
                let m = &mut s.moduli[a];
                m.resize(len, 0.0);
                let u0 = p.delta * (self.grid.x_coord(a, lo) - pk.shift[a] + 2.0 * omega[a] * ap.tau);
                phi_row(u0, p.delta * self.grid.h_x, m, &p.envelope);
                let f = &mut s.factors[a];
                f.clear();
                let table = &self.phase_tables[g][a][lo..hi];
                f.extend(table.iter().zip(m.iter()).map(|(z, &v)| z * v));
            }
            let shift_phase: f64 = (0..d).map(|a| omega[a] * pk.shift[a]).sum::<f64>();
            let constant = self.spec.amplitude * e(w2 * ap.tau - shift_phase) * ap.time_factor;
            accumulate_box(&ap.bx, &gbox, &gstrides, &s.moduli, &s.factors, ap.time_factor, constant, cutoff, &mut s.group);
        }
        s.active = active;
        Some(gbox)
    }

    fn packet_support_nonempty(&self, pk: &WavepacketSpec, t: f64) -> bool {
        self.packet_support(pk, t).is_some()
    }
}

/// Row-major strides of a box.
fn strides(bx: &IndexBox) -> Vec<usize> {
    let mut st = vec![1; bx.len()];
    for a in (0..bx.len().saturating_sub(1)).rev() {
        st[a] = st[a + 1] * (bx[a + 1].1 - bx[a + 1].0);
    }
    st
}

/// Add `constant · ∏_a factors[a][j_a]` into `out` over `pbox` wherever the
/// envelope `time_factor · ∏ moduli` exceeds `cutoff`.
#[allow(clippy::too_many_arguments)]
fn accumulate_box(
    pbox: &IndexBox,
    gbox: &IndexBox,
    gstrides: &[usize],
    moduli: &[Vec<f64>],
    factors: &[Vec<Complex64>],
    time_factor: f64,
    constant: Complex64,
    cutoff: f64,
    out: &mut [Complex64],
) {
    let d = pbox.len();
    let last = d - 1;
    let outer: usize = pbox[..last].iter().map(|(l, h)| h - l).product();
    let mut idx = vec![0usize; last];
    let (llo, lhi) = pbox[last];
    for _ in 0..outer {
        let mut env = time_factor;
        let mut val = constant;
        let mut base = 0;
        for a in 0..last {
            env *= moduli[a][idx[a]];
            val *= factors[a][idx[a]];
            base += (pbox[a].0 + idx[a] - gbox[a].0) * gstrides[a];
        }
        if env * 2.0 > cutoff {
            let row = &mut out[base + llo - gbox[last].0..base + lhi - gbox[last].0];
            for ((o, m), f) in row.iter_mut().zip(&moduli[last]).zip(&factors[last]) {
                if env * m > cutoff {
                    *o += val * f;
                }
            }
        }
        for a in (0..last).rev() {
            idx[a] += 1;
            if idx[a] < pbox[a].1 - pbox[a].0 {
                break;
            }
            idx[a] = 0;
        }
    }
}

/// Add a group box into a full slice buffer.
fn add_box(gbox: &IndexBox, values: &[Complex64], shape: &[usize], slice: &mut [Complex64]) {
    let d = shape.len();
    let last = d - 1;
    let gst = strides(gbox);
    let full: IndexBox = shape.iter().map(|&n| (0, n)).collect();
    let fst = strides(&full);
    let outer: usize = gbox[..last].iter().map(|(l, h)| h - l).product();
    let mut idx = vec![0usize; last];
    let row_len = gbox[last].1 - gbox[last].0;
    for _ in 0..outer {
        let mut gbase = 0;
        let mut fbase = gbox[last].0;
        for a in 0..last {
            gbase += idx[a] * gst[a];
            fbase += (gbox[a].0 + idx[a]) * fst[a];
        }
        for (o, v) in slice[fbase..fbase + row_len].iter_mut().zip(&values[gbase..gbase + row_len]) {
            *o += v;
        }
        for a in (0..last).rev() {
            idx[a] += 1;
            if idx[a] < gbox[a].1 - gbox[a].0 {
                break;
            }
            idx[a] = 0;
        }
    }
}

/// Sample `Σ_ω f_{θ_ω}` on `grid`. Each packet is evaluated only where its
/// envelope exceeds the family's tail cutoff.
pub fn synthesize_field(spec: &FamilySpec, grid: &GridSpec) -> Result<SampledField> {
    let synth = Synthesizer::new(spec, grid)?;
    let mut field = SampledField::zeros(grid.clone());
    let n = grid.slice_len();
    field.samples.par_chunks_mut(n).enumerate().for_each_init(Scratch::default, |s, (i, slice)| {
        let t = grid.t_coord(i);
        for g in 0..spec.groups.len() {
            if let Some(gbox) = synth.group_slice(g, t, s) {
                add_box(&gbox, &s.group, &synth.shape, slice);
            }
        }
    });
    Ok(field)
}

/// Sample the single-frequency field `f_{θ_ω}` of group `g`.
pub fn synthesize_group(spec: &FamilySpec, g: usize, grid: &GridSpec) -> Result<SampledField> {
    let sub = FamilySpec {
        kind: spec.kind,
        params: spec.params.clone(),
        groups: vec![spec.groups[g].clone()],
        amplitude: spec.amplitude,
    };
    synthesize_field(&sub, grid)
}

/// A certified lower bound for `D_{q,r}(δ, Ξ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecouplingSample {
    pub delta: f64,
    #[serde(serialize_with = "ser_exponent")]
    pub q: Exponent,
    #[serde(serialize_with = "ser_exponent")]
    pub r: Exponent,
    /// `‖Σ_ω f_ω‖`
    pub numerator: f64,
    /// `(Σ_ω ‖f_ω‖²)^{1/2}`
    pub denominator: f64,
    pub ratio: f64,
}

fn ser_exponent<S: serde::Serializer>(e: &Exponent, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&e.to_string())
}

/// Decoupling ratios of a family on a given grid for several exponent pairs
/// at once, streaming over time slices.
pub fn decoupling_for_spec(spec: &FamilySpec, grid: &GridSpec, pairs: &[(Exponent, Exponent)]) -> Result<Vec<DecouplingSample>> {
    let synth = Synthesizer::new(spec, grid)?;
    let mut rs: Vec<Exponent> = pairs.iter().map(|p| p.1).collect();
    rs.sort_by_key(|r| r.recip());
    rs.dedup();
    let nr = rs.len();
    let ng = spec.groups.len();
    let vol = grid.cell_volume();
    let n = grid.slice_len();
    // per slice: nr total stats followed by ng * nr group stats
    let stats: Vec<Vec<f64>> = (0..grid.n_t())
        .into_par_iter()
        .map_init(
            || (Scratch::default(), vec![Complex64::new(0.0, 0.0); n]),
            |(s, slice), i| {
                let t = grid.t_coord(i);
                slice.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
                let mut out = vec![0.0; nr * (ng + 1)];
                for g in 0..ng {
                    if let Some(gbox) = synth.group_slice(g, t, s) {
                        for (k, &r) in rs.iter().enumerate() {
                            out[nr * (g + 1) + k] = slice_stat(&s.group, r, vol);
                        }
                        add_box(&gbox, &s.group, &synth.shape, slice);
                    }
                }
                for (k, &r) in rs.iter().enumerate() {
                    out[k] = slice_stat(slice, r, vol);
                }
                out
            },
        )
        .collect();
    let column = |col: usize| -> Vec<f64> { stats.iter().map(|row| row[col]).collect() };
    pairs
        .iter()
        .map(|&(q, r)| {
            let k = rs.iter().position(|&x| x == r).expect("r collected");
            let numerator = combine_slice_stats(&column(k), q, r, grid.h_t);
            let group_norms: Vec<f64> =
                (0..ng).map(|g| combine_slice_stats(&column(nr * (g + 1) + k), q, r, grid.h_t)).collect();
            let denominator = l2_aggregate(&group_norms);
            if !(denominator > 0.0) {
                return Err(LabError::InvalidParameter("family has vanishing denominator on this grid".into()));
            }
            Ok(DecouplingSample { delta: spec.params.delta, q, r, numerator, denominator, ratio: numerator / denominator })
        })
        .collect()
}

/// [`decoupling_ratio`] for several exponent pairs sharing one synthesis pass.
pub fn decoupling_ratios(kind: FamilyKind, params: &FamilyParams, pairs: &[(Exponent, Exponent)]) -> Result<Vec<DecouplingSample>> {
    let spec = build_family(kind, params)?;
    let grid = auto_grid(&spec, params.trunc)?;
    decoupling_for_spec(&spec, &grid, pairs)
}

/// `‖Σ_ω f_ω‖ / (Σ_ω ‖f_ω‖²)^{1/2}` for the family on its automatic grid.
pub fn decoupling_ratio(kind: FamilyKind, params: &FamilyParams, q: Exponent, r: Exponent) -> Result<DecouplingSample> {
    Ok(decoupling_ratios(kind, params, &[(q, r)])?.remove(0))
}

/// Least-squares slope of `log ratio` against `log(1/δ)`.
pub fn fit_exponent(samples: &[DecouplingSample]) -> Result<FitResult> {
    let pts = samples.iter().map(|s| ((1.0 / s.delta).ln(), s.ratio.ln())).collect();
    fit_line(pts, 2)
}

/// Number of grid samples where two or more distinct packets have envelope
/// above the tail cutoff.
pub fn overlapping_samples(spec: &FamilySpec, grid: &GridSpec) -> Result<u64> {
    let synth = Synthesizer::new(spec, grid)?;
    let d = spec.params.dim;
    let n = grid.slice_len();
    let full: IndexBox = synth.shape.iter().map(|&k| (0, k)).collect();
    let fst = strides(&full);
    let counts: Vec<u64> = (0..grid.n_t())
        .into_par_iter()
        .map_init(
            || vec![0u16; n],
            |occ, i| {
                let t = grid.t_coord(i);
                occ.iter_mut().for_each(|c| *c = 0);
                let mut m = vec![Vec::new(); d];
                for pk in spec.packets() {
                    let Some(ap) = synth.packet_support(pk, t) else { continue };
                    for a in 0..d {
                        let (lo, hi) = ap.bx[a];
                        m[a].resize(hi - lo, 0.0);
                        let u0 = pk.delta * (grid.x_coord(a, lo) - pk.shift[a] + 2.0 * pk.omega.coords()[a] * ap.tau);
                        phi_row(u0, pk.delta * grid.h_x, &mut m[a], &pk.params);
                    }
                    let len = box_len(&ap.bx);
                    let pst = strides(&ap.bx);
                    for flat in 0..len {
                        let mut env = ap.time_factor;
                        let mut pos = 0;
                        for a in 0..d {
                            let j = (flat / pst[a]) % (ap.bx[a].1 - ap.bx[a].0);
                            env *= m[a][j];
                            pos += (ap.bx[a].0 + j) * fst[a];
                        }
                        if env > spec.params.tail_cutoff {
                            occ[pos] = occ[pos].saturating_add(1);
                        }
                    }
                }
                occ.iter().filter(|&&c| c >= 2).count() as u64
            },
        )
        .collect();
    Ok(counts.iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex(s: &str) -> Exponent {
        s.parse().unwrap()
    }

    #[test]
    fn family_sizes() {
        let p = FamilyParams::new(0.5, 1);
        let bush = build_family(FamilyKind::Bush, &p).unwrap();
        assert_eq!(bush.packet_count(), 5);
        assert!(bush.packets().all(|pk| pk.shift.iter().all(|&s| s == 0.0)));
        let tuned = build_family(FamilyKind::TunedBush, &p).unwrap();
        assert_eq!(tuned.packet_count(), 20);
        assert!(tuned.groups.iter().all(|g| g.packets.len() == 4));
        let time = build_family(FamilyKind::TimeSeparated, &p).unwrap();
        let ts: Vec<f64> = time.packets().map(|pk| pk.shift[1]).collect();
        assert_eq!(ts, vec![0.0, 16.0, 32.0, 48.0, 64.0]);
        let space = build_family(FamilyKind::SpaceSeparated, &p).unwrap();
        let xs: Vec<f64> = space.packets().map(|pk| pk.shift[0]).collect();
        assert_eq!(xs, vec![0.0, 16.0, 32.0, 48.0, 64.0]);
    }

    #[test]
    fn params_validation() {
        let mut p = FamilyParams::new(0.25, 1);
        p.sep_exponent = 2.0;
        assert!(build_family(FamilyKind::SpaceSeparated, &p).is_err());
        let mut p = FamilyParams::new(0.25, 1);
        p.eps0 = 1.0;
        assert!(build_family(FamilyKind::TunedBush, &p).is_err());
        assert!(build_family(FamilyKind::Bush, &FamilyParams::new(1.0, 1)).is_err());
    }

    #[test]
    fn budget_refusal_names_delta() {
        let mut p = FamilyParams::new(1.0 / 16.0, 1);
        p.budget = 1000;
        match build_family(FamilyKind::Bush, &p) {
            Err(LabError::BudgetExceeded { delta, .. }) => assert_eq!(delta, 1.0 / 16.0),
            other => panic!("expected budget refusal, got {other:?}"),
        }
    }

    #[test]
    fn auto_grid_bush_extents() {
        let p = FamilyParams::new(0.25, 1);
        let spec = build_family(FamilyKind::Bush, &p).unwrap();
        let g = auto_grid(&spec, 8.0).unwrap();
        // t half-width 8·(2d)⁻¹δ⁻² = 64
        assert!((g.t_max - g.t_min - 128.0).abs() < 1e-9);
        let x_ext = g.x_max[0] - g.x_min[0];
        assert!(x_ext >= 2.0 * (8.0 * 4.0 + 2.0 * 64.0) - 1e-9);
        assert!(x_ext < 2.0 * (8.0 * 4.0 + 2.0 * 64.0) + p.h_x + 1e-9);
        let g2 = auto_grid(&spec, 16.0).unwrap();
        assert!(g2.t_max - g2.t_min >= g.t_max - g.t_min);
        assert!(g2.x_max[0] - g2.x_min[0] >= x_ext);
        assert!(auto_grid(&spec, 1.0).is_err());
    }

    #[test]
    fn auto_grid_centered_on_single_shift() {
        let p = FamilyParams::new(0.25, 2);
        let omega = FreqPoint::new(vec![0.5, -0.25]).unwrap();
        let pk = WavepacketSpec::new(omega.clone(), 0.25, vec![10.0, -3.0, 7.0], p.envelope).unwrap();
        let spec = FamilySpec {
            kind: FamilyKind::Bush,
            params: p.clone(),
            groups: vec![PacketGroup { omega, packets: vec![pk] }],
            amplitude: Complex64::new(1.0, 0.0),
        };
        let g = auto_grid(&spec, 4.0).unwrap();
        assert!((0.5 * (g.x_min[0] + g.x_max[0]) - 10.0).abs() < 1e-9);
        assert!((0.5 * (g.x_min[1] + g.x_max[1]) + 3.0).abs() < 1e-9);
        assert!((0.5 * (g.t_min + g.t_max) - 7.0).abs() < 1e-9);
    }

    #[test]
    fn synthesis_matches_direct_evaluation() {
        let mut p = FamilyParams::new(0.25, 1);
        p.tail_cutoff = 0.0;
        p.trunc = 2.0;
        for kind in FamilyKind::ALL {
            let spec = build_family_on_net(kind, &p, &build_net(0.5, 1).unwrap()).unwrap();
            let grid = auto_grid(&spec, 2.0).unwrap();
            let grid = GridSpec { h_x: 0.5, h_t: 0.5, ..grid };
            let field = synthesize_field(&spec, &grid).unwrap();
            let shape = grid.shape();
            for i in (0..grid.n_t()).step_by(7) {
                for j in (0..shape[0]).step_by(5) {
                    let pt = [grid.x_coord(0, j), grid.t_coord(i)];
                    let direct = spec.value_at(&pt);
                    let got = field.slice(i)[j];
                    assert!((got - direct).norm() <= 1e-11 * (1.0 + direct.norm()), "{kind}: {got} vs {direct}");
                }
            }
        }
    }

    #[test]
    fn synthesis_matches_direct_evaluation_2d() {
        let mut p = FamilyParams::new(0.5, 2);
        p.tail_cutoff = 1e-12;
        let spec = build_family(FamilyKind::TunedBush, &p).unwrap();
        let grid = auto_grid(&spec, 2.0).unwrap();
        let grid = GridSpec { h_x: 0.5, h_t: 0.5, ..grid };
        let field = synthesize_field(&spec, &grid).unwrap();
        let shape = grid.shape();
        let mut checked = 0;
        for i in (0..grid.n_t()).step_by(3) {
            for j0 in (0..shape[0]).step_by(3) {
                for j1 in (0..shape[1]).step_by(4) {
                    let pt = [grid.x_coord(0, j0), grid.x_coord(1, j1), grid.t_coord(i)];
                    let direct = spec.value_at(&pt);
                    let got = field.slice(i)[j0 * shape[1] + j1];
                    assert!((got - direct).norm() <= 1e-9, "{got} vs {direct}");
                    checked += 1;
                }
            }
        }
        assert!(checked > 100);
    }

    #[test]
    fn empty_family_gives_zero_field() {
        let p = FamilyParams::new(0.25, 1);
        let spec = FamilySpec { kind: FamilyKind::Bush, params: p, groups: vec![], amplitude: Complex64::new(1.0, 0.0) };
        let grid = GridSpec::new(vec![-4.0], vec![4.0], -2.0, 2.0, 0.5, 0.5, false).unwrap();
        let f = synthesize_field(&spec, &grid).unwrap();
        assert!(f.samples.iter().all(|z| *z == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn streaming_matches_materialized() {
        let p = FamilyParams::new(0.25, 1);
        let spec = build_family(FamilyKind::Bush, &p).unwrap();
        let grid = auto_grid(&spec, 2.0).unwrap();
        let pairs = [(ex("10"), ex("10")), (ex("2"), ex("2")), (ex("inf"), ex("3"))];
        let samples = decoupling_for_spec(&spec, &grid, &pairs).unwrap();
        let field = synthesize_field(&spec, &grid).unwrap();
        for (s, &(q, r)) in samples.iter().zip(&pairs) {
            let num = crate::mixed_norm::mixed_norm(&field, q, r);
            assert!((num - s.numerator).abs() <= 1e-12 * num);
            let per: Vec<f64> = (0..spec.groups.len())
                .map(|g| crate::mixed_norm::mixed_norm(&synthesize_group(&spec, g, &grid).unwrap(), q, r))
                .collect();
            let den = l2_aggregate(&per);
            assert!((den - s.denominator).abs() <= 1e-12 * den);
        }
    }

    #[test]
    fn single_frequency_ratio_is_one() {
        let p = FamilyParams::new(0.25, 1);
        let net = FrequencyNet::single(FreqPoint::new(vec![0.25]).unwrap(), 0.25);
        let spec = build_family_on_net(FamilyKind::Bush, &p, &net).unwrap();
        let grid = auto_grid(&spec, 4.0).unwrap();
        for s in decoupling_for_spec(&spec, &grid, &[(ex("3"), ex("7")), (ex("2"), ex("inf"))]).unwrap() {
            assert_eq!(s.ratio, 1.0);
        }
    }

    #[test]
    fn bush_constructive_interference_at_origin() {
        let p = FamilyParams::new(0.25, 1);
        let spec = build_family(FamilyKind::Bush, &p).unwrap();
        let n = spec.groups.len() as f64;
        assert_eq!(n, 9.0);
        let v = spec.value_at(&[0.0, 0.0]).norm();
        assert!((v - n * p.envelope.norm_const.powi(2)).abs() < 1e-12);
        let grid = auto_grid(&spec, 2.0).unwrap();
        let field = synthesize_field(&spec, &grid).unwrap();
        let i = ((0.0 - grid.t_min) / grid.h_t) as usize;
        let j = ((0.0 - grid.x_min[0]) / grid.h_x) as usize;
        assert!(field.slice(i)[j].norm() >= 0.5 * n);
    }

    #[test]
    fn fit_examples() {
        let mk = |delta: f64, ratio: f64| DecouplingSample {
            delta,
            q: ex("2"),
            r: ex("2"),
            numerator: ratio,
            denominator: 1.0,
            ratio,
        };
        let f = fit_exponent(&[mk(0.25, 2.0), mk(0.125, 4.0), mk(0.0625, 8.0)]).unwrap();
        assert!((f.slope - 1.0).abs() < 1e-12);
        let f = fit_exponent(&[mk(0.25, 3.0), mk(0.125, 3.0)]).unwrap();
        assert!(f.slope.abs() < 1e-12);
        assert!(fit_exponent(&[mk(0.25, 3.0)]).is_err());
    }

    #[test]
    fn family_kind_parsing() {
        for k in FamilyKind::ALL {
            assert_eq!(k.to_string().parse::<FamilyKind>().unwrap(), k);
        }
        assert!("nope".parse::<FamilyKind>().is_err());
    }
}
