//! Invariant suites for every module. Each check is a pure function of the
//! configuration, so a run is reproducible from its flags.

use std::f64::consts::PI;

use decoupling_lab::envelope::{phi, phi_spectrum, EnvelopeParams, WavepacketSpec};
use decoupling_lab::exponents::{classify, discres_bounds, in_region, lower_bound_terms_exact, ExponentTriple, RegionCase};
use decoupling_lab::expsum::{
    expsum_grid, expsum_ratios, growth_fit, synthesize_expsum, CoeffRule, CoefficientVector,
};
use decoupling_lab::families::{
    auto_grid, build_family, build_family_on_net, decoupling_for_spec, overlapping_samples, synthesize_field, FamilyKind, FamilySpec,
    PacketGroup,
};
use decoupling_lab::geometry::{
    build_net, check_ball_containment, check_ball_exclusivity, check_pairwise_disjoint, net_points_per_axis, Cap, FreqPoint,
    FrequencyNet, LemmaCheck, ShearMap, ShearMode, TunedLattice,
};
use decoupling_lab::mixed_norm::{homogeneity_check, l2_aggregate, mixed_norm, GridSpec, SampledField};
use decoupling_lab::oracles::{direct_expsum, wavepacket_energy};
use decoupling_lab::Exponent;
use num_complex::Complex64;
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::commands::family_params;
use crate::config::RunConfig;
use crate::error::CliError;

pub const SUITES: [&str; 7] = ["geometry", "envelope", "mixed-norm", "exponents", "expsum", "parseval", "families"];

/// Interference floor constant: `|Σ f_ω| ≥ κ · #Ξ` on the bush balls.
pub const KAPPA: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub suite: &'static str,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn outcome(suite: &'static str, name: impl Into<String>, passed: bool, detail: impl Into<String>) -> CheckOutcome {
    CheckOutcome { suite, name: name.into(), passed, detail: detail.into() }
}

fn ex(s: &str) -> Exponent {
    s.parse().expect("literal exponent")
}

fn rng(cfg: &RunConfig, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ salt)
}

pub fn run_selftest(cfg: &RunConfig) -> Result<Vec<CheckOutcome>, CliError> {
    let mut out = Vec::new();
    for suite in SUITES {
        if cfg.suite.as_deref().is_some_and(|s| s != suite) {
            continue;
        }
        out.extend(run_suite(suite, cfg)?);
    }
    Ok(out)
}

pub fn run_suite(suite: &str, cfg: &RunConfig) -> Result<Vec<CheckOutcome>, CliError> {
    match suite {
        "geometry" => Ok(geometry_suite(cfg)),
        "envelope" => envelope_suite(cfg),
        "mixed-norm" => mixed_norm_suite(cfg),
        "exponents" => Ok(exponents_suite(cfg)),
        "expsum" => expsum_suite(cfg),
        "parseval" => parseval_suite(cfg),
        "families" => families_suite(cfg),
        other => Err(CliError::Usage(format!("unknown suite '{other}'"))),
    }
}

/// Per-suite counts followed by one line per failed check.
pub fn summary(outcomes: &[CheckOutcome]) -> String {
    let mut s = String::new();
    for suite in SUITES {
        let mine: Vec<&CheckOutcome> = outcomes.iter().filter(|o| o.suite == suite).collect();
        if mine.is_empty() {
            continue;
        }
        let passed = mine.iter().filter(|o| o.passed).count();
        s.push_str(&format!("{suite}: {passed}/{} passed\n", mine.len()));
        for o in mine.iter().filter(|o| !o.passed) {
            s.push_str(&format!("  FAIL {}: {}\n", o.name, o.detail));
        }
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    s.push_str(if failed == 0 { "all suites passed\n" } else { "selftest FAILED\n" });
    s
}

// ---------------------------------------------------------------- geometry

fn lemma_outcome(name: String, c: &LemmaCheck) -> CheckOutcome {
    let detail = match &c.example {
        Some((w, k)) => format!("{} of {} violated, e.g. omega = {w:?}, k = {k:?}", c.violations, c.checked),
        None => format!("{} cases", c.checked),
    };
    outcome("geometry", name, c.passed() && c.checked > 0, detail)
}

/// `M = δ^{-ε₀²}` for the tube lemmas.
pub fn lemma_dilation(delta: f64, eps0: f64) -> f64 {
    delta.powf(-eps0 * eps0)
}

pub fn ball_containment_check(delta: f64, dim: usize, eps0: f64) -> CheckOutcome {
    let lat = TunedLattice::new(delta, dim, eps0).expect("valid lattice");
    let net = build_net(delta, dim).expect("valid net");
    lemma_outcome(format!("balls inside their tubes, delta = {delta}, d = {dim}"), &check_ball_containment(&lat, &net, 1.0))
}

pub fn disjointness_check(delta: f64, dim: usize, eps0: f64) -> CheckOutcome {
    let lat = TunedLattice::new(delta, dim, eps0).expect("valid lattice");
    let net = build_net(delta, dim).expect("valid net");
    let m = lemma_dilation(delta, eps0);
    lemma_outcome(format!("dilated tubes of distinct centers disjoint, delta = {delta}, d = {dim}"), &check_pairwise_disjoint(&lat, &net, m))
}

pub fn exclusivity_check(delta: f64, dim: usize, eps0: f64) -> CheckOutcome {
    let lat = TunedLattice::new(delta, dim, eps0).expect("valid lattice");
    let net = build_net(delta, dim).expect("valid net");
    let m = lemma_dilation(delta, eps0);
    lemma_outcome(format!("ball in dilated tube iff same center, delta = {delta}, d = {dim}"), &check_ball_exclusivity(&lat, &net, m))
}

fn net_check(delta: f64, dim: usize) -> CheckOutcome {
    let net = build_net(delta, dim).expect("valid net");
    let want = net_points_per_axis(delta).pow(dim as u32);
    let mut min_gap = f64::INFINITY;
    for (i, a) in net.points.iter().enumerate() {
        for b in &net.points[i + 1..] {
            let dist: f64 = a.coords().iter().zip(b.coords()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
            min_gap = min_gap.min(dist);
        }
    }
    let ok = net.len() == want && (net.len() < 2 || min_gap >= delta * (1.0 - 1e-12));
    outcome("geometry", format!("net separation, delta = {delta}, d = {dim}"), ok, format!("{} points, min gap {min_gap}", net.len()))
}

fn random_freq(r: &mut ChaCha8Rng, dim: usize) -> FreqPoint {
    FreqPoint::new((0..dim).map(|_| r.gen_range(-1.0..=1.0)).collect()).expect("in range")
}

fn shear_group_law(cfg: &RunConfig) -> CheckOutcome {
    let mut r = rng(cfg, 1);
    let mut worst: f64 = 0.0;
    for k in 0..1000 {
        let dim = 1 + k % 3;
        let map = ShearMap::new(random_freq(&mut r, dim));
        let p: Vec<f64> = (0..=dim).map(|_| r.gen_range(-100.0..100.0)).collect();
        for (a, b) in [
            (ShearMode::Forward, ShearMode::Inverse),
            (ShearMode::Inverse, ShearMode::Forward),
            (ShearMode::Transpose, ShearMode::InverseTranspose),
            (ShearMode::InverseTranspose, ShearMode::Transpose),
        ] {
            let back = map.apply(&map.apply(&p, a), b);
            worst = worst.max(back.iter().zip(&p).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max));
        }
    }
    outcome("geometry", "shear group law", worst <= 1e-12, format!("max deviation {worst:e} over 1000 samples"))
}

fn cap_neighbourhood(cfg: &RunConfig) -> CheckOutcome {
    let mut r = rng(cfg, 2);
    let mut bad = 0;
    for k in 0..1000 {
        let dim = 1 + k % 2;
        let delta = [0.5, 0.25, 0.125][k % 3];
        let net = build_net(delta, dim).expect("valid net");
        let omega = net.points[r.gen_range(0..net.len())].clone();
        let xi: Vec<f64> = omega.coords().iter().map(|w| w + r.gen_range(0.0..delta)).collect();
        let xi_sq: f64 = xi.iter().map(|x| x * x).sum();
        let eta = xi_sq + r.gen_range(-1.0..=1.0) * delta * delta;
        if !Cap::new(omega, delta).expect("valid cap").contains(&xi, eta) {
            bad += 1;
        }
    }
    outcome("geometry", "paraboloid neighbourhood inside caps", bad == 0, format!("{bad} of 1000 outside"))
}

fn geometry_suite(cfg: &RunConfig) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    for dim in 1..=2 {
        for delta in [0.5, 0.25, 0.125, 0.0625] {
            out.push(net_check(delta, dim));
        }
    }
    out.push(shear_group_law(cfg));
    out.push(cap_neighbourhood(cfg));
    for dim in 1..=2 {
        for delta in [0.125, 0.0625] {
            out.push(ball_containment_check(delta, dim, cfg.eps0));
            out.push(exclusivity_check(delta, dim, cfg.eps0));
        }
        // the disjointness lemma needs δ small; it first holds on the dyadic ladder at 1/32
        out.push(disjointness_check(1.0 / 32.0, dim, cfg.eps0));
    }
    out
}

// ---------------------------------------------------------------- envelope

pub fn majorant_check(params: &EnvelopeParams) -> CheckOutcome {
    let n = 10_000;
    let min = (0..n).map(|k| phi(-1.0 + 2.0 * k as f64 / (n - 1) as f64, params)).fold(f64::INFINITY, f64::min);
    outcome("envelope", "phi >= 1 on [-1, 1]", min >= 1.0 - 1e-12, format!("min {min} over {n} samples"))
}

/// Largest `|φ̂(ξ)|/|φ̂(0)|` for `|ξ| > 1`, from samples at step 1/64 on [-256, 256].
pub fn spectrum_leakage(params: &EnvelopeParams) -> f64 {
    let spec = phi_spectrum(params, 256.0, 1.0 / 64.0);
    let peak = spec.iter().map(|s| s.1).fold(0.0, f64::max);
    spec.iter().filter(|s| s.0.abs() > 1.0).map(|s| s.1).fold(0.0, f64::max) / peak
}

pub fn spectrum_check(params: &EnvelopeParams) -> CheckOutcome {
    let leak = spectrum_leakage(params);
    outcome("envelope", "Fourier transform of phi inside [-1, 1]", leak < 1e-6, format!("relative magnitude outside {leak:e}"))
}

/// Largest ratio of `envelope_value` to `c^{d+1} K_m (1+2^n)^{-2m}` over
/// random points in the shells `2^{n+1}T ∖ 2^n T`, `n ≤ 6`.
pub fn shell_decay_ratio(params: &EnvelopeParams, seed: u64) -> f64 {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for dim in 1..=2 {
        let delta = 0.25;
        let net = build_net(delta, dim).expect("valid net");
        for n in 0..=6 {
            let bound = params.norm_const.powi(dim as i32 + 1) * params.decay_constant() * (1.0 + 2f64.powi(n)).powi(-params.decay());
            for _ in 0..500 {
                let omega = net.points[r.gen_range(0..net.len())].clone();
                let shift: Vec<f64> = (0..=dim).map(|_| r.gen_range(-50.0..50.0)).collect();
                // normalized sheared coordinates with sup norm in [2^n, 2^{n+1}]
                let lo = 2f64.powi(n);
                let mut u: Vec<f64> = (0..=dim).map(|_| r.gen_range(-2.0 * lo..=2.0 * lo)).collect();
                let pick = r.gen_range(0..=dim);
                let mag = r.gen_range(lo..=2.0 * lo);
                u[pick] = if r.gen_bool(0.5) { mag } else { -mag };
                let tp = u[dim] / (2.0 * dim as f64 * delta * delta);
                let mut p: Vec<f64> = (0..dim).map(|i| u[i] / delta - 2.0 * omega.coords()[i] * tp + shift[i]).collect();
                p.push(tp + shift[dim]);
                let pk = WavepacketSpec::new(omega, delta, shift, *params).expect("valid packet");
                worst = worst.max(pk.envelope_value(&p) / bound);
            }
        }
    }
    worst
}

pub fn shell_decay_check(params: &EnvelopeParams, seed: u64) -> CheckOutcome {
    let w = shell_decay_ratio(params, seed);
    outcome("envelope", "shell decay c^{d+1} K_m (1+2^n)^{-2m}, n <= 6", w <= 1.0 + 1e-12, format!("max ratio to bound {w}"))
}

fn envelope_suite(cfg: &RunConfig) -> Result<Vec<CheckOutcome>, CliError> {
    let params = EnvelopeParams::new(cfg.m)?;
    let mut out = vec![majorant_check(&params), spectrum_check(&params), shell_decay_check(&params, cfg.seed)];
    let mut r = rng(cfg, 3);
    let odd = (0..1000).filter(|_| {
        let t = r.gen_range(-200.0..200.0);
        phi(t, &params) != phi(-t, &params)
    });
    let odd = odd.count();
    out.push(outcome("envelope", "phi even", odd == 0, format!("{odd} asymmetric samples")));
    let mut worst: f64 = 0.0;
    let mut shift_err: f64 = 0.0;
    for k in 0..1000 {
        let dim = 1 + k % 2;
        let omega = random_freq(&mut r, dim);
        let shift: Vec<f64> = (0..=dim).map(|_| r.gen_range(-20.0..20.0)).collect();
        let p: Vec<f64> = (0..=dim).map(|_| r.gen_range(-40.0..40.0)).collect();
        let pk = WavepacketSpec::new(omega.clone(), 0.25, shift.clone(), params)?;
        let env = pk.envelope_value(&p);
        worst = worst.max((pk.wavepacket_value(&p).norm() - env).abs() / env);
        if k < 100 {
            let centred = WavepacketSpec::new(omega, 0.25, vec![0.0; dim + 1], params)?;
            let moved: Vec<f64> = p.iter().zip(&shift).map(|(a, b)| a - b).collect();
            shift_err = shift_err.max((centred.envelope_value(&moved) - env).abs() / env);
        }
    }
    out.push(outcome("envelope", "|wavepacket| = envelope", worst <= 1e-12, format!("max relative gap {worst:e}")));
    out.push(outcome("envelope", "translation covariance", shift_err <= 1e-12, format!("max relative gap {shift_err:e}")));
    Ok(out)
}

// ---------------------------------------------------------------- mixed norm

/// `‖1_{[0,1]×[0,2]}‖_{L^4_t L^2_x}` at `h = 1/16` (expected `2^{1/4}`).
pub fn box_indicator_norm() -> f64 {
    let grid = GridSpec::new(vec![-1.0], vec![3.0], -1.0, 3.0, 1.0 / 16.0, 1.0 / 16.0, false).expect("valid grid");
    let f = SampledField::from_fn(grid, |x, t| {
        let inside = (0.0..=1.0).contains(&x[0]) && (0.0..=2.0).contains(&t);
        Complex64::new(if inside { 1.0 } else { 0.0 }, 0.0)
    });
    mixed_norm(&f, ex("4"), ex("2"))
}

/// `‖e^{-π(x²+t²)}‖_{L²}` on `[-8, 8]²` at `h = 1/16` (expected `2^{-1/2}`).
pub fn gaussian_norm() -> f64 {
    let grid = GridSpec::new(vec![-8.0], vec![8.0], -8.0, 8.0, 1.0 / 16.0, 1.0 / 16.0, false).expect("valid grid");
    let f = SampledField::from_fn(grid, |x, t| Complex64::new((-PI * (x[0] * x[0] + t * t)).exp(), 0.0));
    mixed_norm(&f, ex("2"), ex("2"))
}

fn random_field(r: &mut ChaCha8Rng, dim: usize) -> SampledField {
    let grid = GridSpec::new(vec![0.0; dim], vec![2.0; dim], 0.0, 1.0, 0.25, 0.125, false).expect("valid grid");
    let n = grid.sample_count() as usize;
    let samples = (0..n).map(|_| Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).collect();
    SampledField::new(grid, samples).expect("matching length")
}

const SAMPLE_EXPONENTS: [&str; 7] = ["1", "3/2", "2", "3", "10/3", "6", "inf"];

fn mixed_norm_suite(cfg: &RunConfig) -> Result<Vec<CheckOutcome>, CliError> {
    let s = "mixed-norm";
    let mut out = Vec::new();
    let b = box_indicator_norm();
    let want = 2f64.powf(0.25);
    out.push(outcome(s, "box indicator", ((b - want) / want).abs() <= 1e-3, format!("{b} vs {want}")));
    let g = gaussian_norm();
    let want = 0.5f64.sqrt();
    out.push(outcome(s, "gaussian", ((g - want) / want).abs() <= 1e-3, format!("{g} vs {want}")));
    let one = SampledField::from_fn(GridSpec::new(vec![0.0], vec![1.0], 0.0, 1.0, 0.1, 0.1, false)?, |_, _| Complex64::new(1.0, 0.0));
    let v = mixed_norm(&one, Exponent::INFINITY, Exponent::INFINITY);
    out.push(outcome(s, "constant field at (inf, inf)", v == 1.0, format!("{v}")));
    let l2 = [l2_aggregate(&[3.0, 4.0]), l2_aggregate(&[7.5]), l2_aggregate(&[1.0; 4])];
    out.push(outcome(s, "l2 aggregate", l2 == [5.0, 7.5, 2.0], format!("{l2:?}")));

    let mut r = rng(cfg, 4);
    let mut hom: f64 = 0.0;
    let mut holder_bad = 0;
    let mut tri_bad = 0;
    for k in 0..40 {
        let dim = 1 + k % 2;
        let f = random_field(&mut r, dim);
        let g = random_field(&mut r, dim);
        let rr = ex(SAMPLE_EXPONENTS[k % SAMPLE_EXPONENTS.len()]);
        let q = ex(SAMPLE_EXPONENTS[(k / 3) % SAMPLE_EXPONENTS.len()]);
        for c in [Complex64::new(2.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(-0.3, 1.7)] {
            let (a, b) = homogeneity_check(&f, q, rr, c);
            hom = hom.max((a - b).abs() / b);
        }
        let (z0, z1) = homogeneity_check(&f, q, rr, Complex64::new(0.0, 0.0));
        if z0 != 0.0 || z1 != 0.0 {
            hom = f64::INFINITY;
        }
        let norms: Vec<f64> = SAMPLE_EXPONENTS.iter().map(|qq| mixed_norm(&f, ex(qq), rr)).collect();
        if norms.windows(2).any(|w| w[0] > w[1] * (1.0 + 1e-12)) {
            holder_bad += 1;
        }
        let sum = SampledField::new(f.grid.clone(), f.samples.iter().zip(&g.samples).map(|(a, b)| a + b).collect())?;
        if mixed_norm(&sum, q, rr) > (mixed_norm(&f, q, rr) + mixed_norm(&g, q, rr)) * (1.0 + 1e-12) {
            tri_bad += 1;
        }
    }
    out.push(outcome(s, "positive homogeneity", hom <= 1e-12, format!("max relative gap {hom:e}")));
    out.push(outcome(s, "monotone in q on unit time window", holder_bad == 0, format!("{holder_bad} violations")));
    out.push(outcome(s, "triangle inequality", tri_bad == 0, format!("{tri_bad} violations")));

    // g(x) h(t) with grid-aligned steps: exact product of discrete norms
    let grid = GridSpec::new(vec![0.0], vec![4.0], 0.0, 2.0, 0.5, 0.25, false)?;
    let gx = |x: f64| [1.0, -2.0, 0.5, 3.0][(x / 1.0) as usize];
    let ht = |t: f64| [2.0, 0.25][(t / 1.0) as usize];
    let f = SampledField::from_fn(grid, |x, t| Complex64::new(gx(x[0]) * ht(t), 0.0));
    let mut worst: f64 = 0.0;
    for qs in SAMPLE_EXPONENTS {
        for rs in SAMPLE_EXPONENTS {
            let (q, rr) = (ex(qs), ex(rs));
            let lp = |vals: &[f64], p: Exponent, w: f64| -> f64 {
                if p.is_infinite() {
                    vals.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
                } else {
                    vals.iter().map(|v| v.abs().powf(p.value()) * w).sum::<f64>().powf(1.0 / p.value())
                }
            };
            let want = lp(&[1.0, -2.0, 0.5, 3.0], rr, 1.0) * lp(&[2.0, 0.25], q, 1.0);
            let got = mixed_norm(&f, q, rr);
            worst = worst.max((got - want).abs() / want);
        }
    }
    out.push(outcome(s, "separable step functions exact", worst <= 1e-12, format!("max relative error {worst:e}")));
    Ok(out)
}

// ---------------------------------------------------------------- exponents

fn exp_from_recip(num: i64, den: i64) -> Exponent {
    Exponent::from_recip(Rational64::new(num, den)).expect("reciprocal in [0, 1]")
}

/// Every labelled corner `(1/r, 1/q)` of the sharp region is in the region
/// with sharp exponent 0.
pub fn figure_corners() -> CheckOutcome {
    let mut corners: Vec<(u32, Exponent, Exponent)> = vec![
        (1, exp_from_recip(1, 6), exp_from_recip(1, 6)),
        (1, exp_from_recip(1, 2), exp_from_recip(1, 6)),
        (1, exp_from_recip(1, 2), exp_from_recip(1, 2)),
        (2, exp_from_recip(1, 4), exp_from_recip(1, 4)),
    ];
    for d in 3..=8i64 {
        corners.push((d as u32, exp_from_recip(1, 2), exp_from_recip(d, 2 * (d + 2))));
    }
    let mut bad = Vec::new();
    for (d, q, r) in &corners {
        let t = ExponentTriple::new(*q, *r, *d).expect("d >= 1");
        let rep = classify(&t);
        if !(rep.in_region && rep.sharp == Some(0.0) && rep.case == Some(RegionCase::InRegion)) {
            bad.push(format!("d = {d}, q = {q}, r = {r}"));
        }
    }
    outcome("exponents", "labelled corners of the sharp region", bad.is_empty(), format!("{} corners; failing: {bad:?}", corners.len()))
}

/// Random `(q, r, d)` with `q, r ≥ 2`: one case fires in tie order, the
/// formulas of every applicable case agree, and the lower bound meets the
/// sharp exponent exactly outside the region.
pub fn exponent_sweep(samples: usize, seed: u64) -> CheckOutcome {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let half = Rational64::new(1, 2);
    let two = Rational64::from_integer(2);
    let mut problems = Vec::new();
    for k in 0..samples {
        let d = r.gen_range(1..=5u32);
        // half the draws on a fine rational lattice so boundaries are hit exactly
        let (kq, kr) = if k % 2 == 0 {
            (Rational64::new(r.gen_range(0..=60), 120), Rational64::new(r.gen_range(0..=60), 120))
        } else {
            let (da, db) = (r.gen_range(1..=997i64), r.gen_range(1..=997i64));
            (Rational64::new(r.gen_range(0..=da / 2), da), Rational64::new(r.gen_range(0..=db / 2), db))
        };
        let (q, rr) = (Exponent::from_recip(kq).expect("in range"), Exponent::from_recip(kr).expect("in range"));
        let t = ExponentTriple::new(q, rr, d).expect("d >= 1");
        let rep = classify(&t);
        let dd = Rational64::from_integer(d as i64);
        let terms = lower_bound_terms_exact(&t);
        let region = in_region(&t);
        let qle = kq >= kr && kr <= dd / (two * (dd + two));
        let qge = kq <= kr && two * kq + dd * kr <= dd * half;
        let applicable: Vec<(RegionCase, Rational64)> = [
            (region, RegionCase::InRegion, Rational64::from_integer(0)),
            (qle, RegionCase::CaseQleR, terms[3]),
            (qge, RegionCase::CaseQgeR, terms[0]),
        ]
        .into_iter()
        .filter(|a| a.0)
        .map(|a| (a.1, a.2))
        .collect();
        let Some(&(first, value)) = applicable.first() else {
            problems.push(format!("no case for q = {q}, r = {rr}, d = {d}"));
            continue;
        };
        let sharp = rep.sharp.unwrap_or(f64::NAN);
        let value = *value.numer() as f64 / *value.denom() as f64;
        if rep.case != Some(first) {
            problems.push(format!("case {:?} != {first:?} at q = {q}, r = {rr}, d = {d}", rep.case));
        }
        if applicable.iter().any(|(_, v)| ((*v.numer() as f64 / *v.denom() as f64) - value).abs() > 1e-12) {
            problems.push(format!("boundary disagreement at q = {q}, r = {rr}, d = {d}"));
        }
        if (sharp - value).abs() > 1e-12 || rep.lower_bound > sharp + 1e-12 {
            problems.push(format!("lower bound {} vs sharp {sharp} at q = {q}, r = {rr}, d = {d}", rep.lower_bound));
        }
        if first != RegionCase::InRegion && (rep.lower_bound - sharp).abs() > 1e-12 {
            problems.push(format!("outer case without equality at q = {q}, r = {rr}, d = {d}"));
        }
    }
    outcome(
        "exponents",
        "case sweep",
        problems.is_empty(),
        format!("{samples} samples, {} problems{}", problems.len(), problems.first().map(|p| format!(", first: {p}")).unwrap_or_default()),
    )
}

fn exponents_suite(cfg: &RunConfig) -> Vec<CheckOutcome> {
    let s = "exponents";
    let tr = |q: &str, r: &str, d: u32| ExponentTriple::new(ex(q), ex(r), d).expect("d >= 1");
    let mut out = vec![figure_corners(), exponent_sweep(10_000, cfg.seed)];
    let lb = |q, r, d| classify(&tr(q, r, d)).lower_bound;
    let ok = (1..6).all(|d| lb("2", "2", d) == 0.0) && lb("inf", "inf", 1) == 0.5 && lb("2", "10", 1) == 0.2 && lb("1", "2", 1) == 0.5;
    out.push(outcome(s, "lower bound examples", ok, ""));
    let rep = classify(&tr("1", "2", 1));
    out.push(outcome(s, "sharp exponent absent below q = 2", rep.sharp.is_none(), format!("{rep:?}")));
    let ok = discres_bounds(&tr("6", "6", 1)) == Some(0.0)
        && discres_bounds(&tr("2", "10/3", 5)) == Some(0.4)
        && discres_bounds(&tr("10", "10", 1)).is_none();
    out.push(outcome(s, "discrete restriction bounds", ok, ""));
    out
}

// ---------------------------------------------------------------- expsum

fn expsum_suite(cfg: &RunConfig) -> Result<Vec<CheckOutcome>, CliError> {
    let s = "expsum";
    let mut out = Vec::new();
    let mut r = rng(cfg, 5);
    let mut worst: f64 = 0.0;
    for (n, d) in [(1, 1), (2, 1), (5, 1), (8, 1), (2, 2), (5, 2), (8, 2)] {
        let c = CoefficientVector::new(CoeffRule::RandomUnimodular { seed: cfg.seed }, n, d)?;
        let grid = expsum_grid(&c, 1)?;
        let f = synthesize_expsum(&c, &grid)?;
        let shape = grid.shape();
        for _ in 0..100 {
            let i = r.gen_range(0..grid.n_t());
            let js: Vec<usize> = shape.iter().map(|&k| r.gen_range(0..k)).collect();
            let x: Vec<f64> = js.iter().enumerate().map(|(a, &j)| grid.x_coord(a, j)).collect();
            let flat = js.iter().zip(&shape).fold(0, |acc, (&j, &k)| acc * k + j);
            let want = direct_expsum(&c, &x, grid.t_coord(i));
            worst = worst.max((f.slice(i)[flat] - want).norm() / want.norm().max(1.0));
        }
    }
    out.push(outcome(s, "synthesis matches direct summation", worst <= 1e-10, format!("max relative error {worst:e}")));

    let mut a = vec![Complex64::new(0.0, 0.0); 16];
    a[6] = Complex64::new(0.6, 0.8);
    let c = CoefficientVector::from_values(4, 2, a)?;
    let f = synthesize_expsum(&c, &expsum_grid(&c, 1)?)?;
    let dev = f.samples.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max);
    out.push(outcome(s, "lone coefficient has constant modulus", dev <= 1e-12, format!("max deviation {dev:e}")));

    let pairs = [(ex("10"), ex("10")), (ex("6"), ex("6")), (ex("4"), ex("3"))];
    let mut gap: f64 = 0.0;
    for (n, d) in [(16, 1), (4, 2)] {
        let c = CoefficientVector::new(CoeffRule::Ones, n, d)?;
        let coarse = expsum_ratios(&c, &pairs, 1)?;
        let fine = expsum_ratios(&c, &pairs, 2)?;
        for (a, b) in coarse.iter().zip(&fine) {
            gap = gap.max((a.ratio - b.ratio).abs() / b.ratio);
        }
    }
    out.push(outcome(s, "oversampling refinement", gap < 1e-3, format!("max relative change {gap:e}")));

    let (_, fit) = growth_fit(CoeffRule::Ones, &[4, 8, 16], 1, ex("2"), ex("2"), 1)?;
    out.push(outcome(s, "flat growth at (2, 2)", fit.slope.abs() <= 1e-6, format!("slope {}", fit.slope)));

    let under = synthesize_expsum(&CoefficientVector::new(CoeffRule::Ones, 8, 1)?, &GridSpec::torus(1, 16, 512)?);
    out.push(outcome(s, "undersampled grid refused", under.is_err(), ""));
    Ok(out)
}

// ---------------------------------------------------------------- parseval

/// `‖f‖₂²` of one synthesized packet divided by its closed form.
pub fn packet_energy_ratio(cfg: &RunConfig, delta: f64, omega: FreqPoint) -> Result<f64, CliError> {
    let dim = omega.dim();
    let mut cfg = cfg.clone();
    cfg.d = dim;
    cfg.h_t = cfg.h_x / dim as f64;
    let params = family_params(&cfg, delta)?;
    let pk = WavepacketSpec::new(omega.clone(), delta, vec![0.0; dim + 1], params.envelope)?;
    let spec = FamilySpec {
        kind: FamilyKind::Bush,
        params: params.clone(),
        groups: vec![PacketGroup { omega, packets: vec![pk] }],
        amplitude: Complex64::new(1.0, 0.0),
    };
    let grid = auto_grid(&spec, params.trunc)?;
    let norm = mixed_norm(&synthesize_field(&spec, &grid)?, ex("2"), ex("2"));
    Ok(norm * norm / wavepacket_energy(delta, dim, params.envelope.m, params.envelope.norm_const))
}

fn parseval_suite(cfg: &RunConfig) -> Result<Vec<CheckOutcome>, CliError> {
    let s = "parseval";
    let mut out = Vec::new();
    let pairs = [(ex("2"), ex("2")), (Exponent::INFINITY, ex("2"))];
    let mut worst: f64 = 0.0;
    for (n, d) in [(8, 1), (16, 1), (32, 1), (64, 1), (4, 2), (8, 2)] {
        let c = CoefficientVector::new(CoeffRule::RandomUnimodular { seed: cfg.seed }, n, d)?;
        for g in expsum_ratios(&c, &pairs, 1)? {
            worst = worst.max((g.ratio - 1.0).abs());
        }
    }
    out.push(outcome(s, "exponential sums at (2, 2) and (inf, 2)", worst <= 1e-9, format!("max |ratio - 1| {worst:e}")));

    for (delta, omega) in [(0.25, vec![0.5]), (0.5, vec![-0.5, 1.0])] {
        let e = packet_energy_ratio(cfg, delta, FreqPoint::new(omega.clone())?)?;
        out.push(outcome(
            s,
            format!("single packet energy, delta = {delta}, omega = {omega:?}"),
            (e - 1.0).abs() <= 1e-6,
            format!("synthesized / closed form = {e}"),
        ));
    }

    let params = family_params(cfg, 0.25)?;
    let spec = build_family(FamilyKind::Bush, &params)?;
    let grid = auto_grid(&spec, params.trunc)?;
    let ratio = decoupling_for_spec(&spec, &grid, &[(ex("2"), ex("2"))])?[0].ratio;
    out.push(outcome(s, "bush orthogonality at (2, 2), delta = 1/4", (ratio - 1.0).abs() <= 1e-6, format!("ratio {ratio}")));
    Ok(out)
}

// ---------------------------------------------------------------- families

fn families_suite(cfg: &RunConfig) -> Result<Vec<CheckOutcome>, CliError> {
    let s = "families";
    let mut out = Vec::new();
    let p_half = family_params(cfg, 0.5)?;
    let sizes = [
        build_family(FamilyKind::Bush, &p_half)?.packet_count(),
        build_family(FamilyKind::TunedBush, &p_half)?.packet_count(),
    ];
    out.push(outcome(s, "family sizes at delta = 1/2", sizes == [5, 20], format!("{sizes:?}")));

    let mut p = family_params(cfg, 0.25)?;
    p.sep_exponent = 3.0;
    let mut dens = Vec::new();
    for kind in FamilyKind::ALL {
        let spec = build_family(kind, &p)?;
        let grid = auto_grid(&spec, p.trunc)?;
        dens.push(decoupling_for_spec(&spec, &grid, &[(ex("2"), ex("2"))])?[0].denominator);
    }
    out.push(outcome(s, "positive denominators", dens.iter().all(|&d| d > 0.0), format!("{dens:?}")));

    let spec = build_family(FamilyKind::Bush, &p)?;
    let grid = auto_grid(&spec, p.trunc)?;
    let pair = [(ex("10"), ex("10"))];
    let a = decoupling_for_spec(&spec, &grid, &pair)?[0].ratio;
    let b = decoupling_for_spec(&spec.clone().with_amplitude(Complex64::new(2.5, -1.5)), &grid, &pair)?[0].ratio;
    out.push(outcome(s, "ratio scale invariance", ((a - b) / a).abs() <= 1e-10, format!("{a} vs {b}")));

    let mut r = rng(cfg, 6);
    for delta in [0.25, 0.125] {
        let p = family_params(cfg, delta)?;
        let bush = build_family(FamilyKind::Bush, &p)?;
        let n = bush.groups.len() as f64;
        let floor = (0..100)
            .map(|_| {
                let pt: Vec<f64> = (0..=cfg.d).map(|_| r.gen_range(-1e-10..1e-10)).collect();
                bush.value_at(&pt).norm() / n
            })
            .fold(f64::INFINITY, f64::min);
        out.push(outcome(s, format!("bush interference floor, delta = {delta}"), floor >= KAPPA, format!("min |sum| / #net = {floor}")));
        let tuned = build_family(FamilyKind::TunedBush, &p)?;
        let lat = TunedLattice::new(delta, cfg.d, p.eps0)?;
        let floor = lat.centers.iter().map(|c| tuned.value_at(c).norm() / n).fold(f64::INFINITY, f64::min);
        out.push(outcome(
            s,
            format!("tuned bush interference floor at every center, delta = {delta}"),
            floor >= KAPPA,
            format!("min |sum| / #net = {floor} over {} centers", lat.len()),
        ));
    }

    let mut p4 = family_params(cfg, 0.25)?;
    p4.sep_exponent = 4.0;
    for kind in [FamilyKind::SpaceSeparated, FamilyKind::TimeSeparated] {
        let spec = build_family(kind, &p4)?;
        let grid = auto_grid(&spec, p4.trunc)?;
        let overlap = overlapping_samples(&spec, &grid)?;
        out.push(outcome(s, format!("{kind} packets disjoint at separation exponent 4"), overlap == 0, format!("{overlap} shared samples")));
    }

    let single = FrequencyNet::single(FreqPoint::new(vec![0.25; cfg.d])?, 0.25);
    let spec = build_family_on_net(FamilyKind::Bush, &p, &single)?;
    let grid = auto_grid(&spec, p.trunc)?;
    let ratio = decoupling_for_spec(&spec, &grid, &[(ex("3"), ex("7"))])?[0].ratio;
    out.push(outcome(s, "single frequency ratio is 1", ratio == 1.0, format!("{ratio}")));

    let p8 = family_params(cfg, 0.125)?;
    let spec = build_family(FamilyKind::Bush, &p8)?;
    let grid = auto_grid(&spec, p8.trunc)?;
    let ratio = decoupling_for_spec(&spec, &grid, &[(ex("2"), ex("2"))])?[0].ratio;
    out.push(outcome(s, "bush ratio at (2, 2), delta = 1/8, within [0.3, 3]", (0.3..=3.0).contains(&ratio), format!("{ratio}")));
    Ok(out)
}
