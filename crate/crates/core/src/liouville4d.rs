//! Liouville forms on `R x M` built from a pair: the exponential form
//! `e^{-s} a- + e^{s} a+`, the linear form `(1-t) a- + (1+t) a+`, and the
//! interpolation between a smoothed linear form and the exponential one.
//!
//! For `lambda = P(s) a- + Q(s) a+` one has
//! `d lambda ^ d lambda = 2 D ds ^ dvol` with
//! `D = -P'P f- + P'Q g+ + Q'P g- + Q'Q f+`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criteria::{classify_pair, pair_invariants, ContactFormPair, PairInvariants, Tolerances};
use crate::error::{AlvError, Result};
use crate::grid::{GridLocation, ScalarField};

/// Largest admissible smoothing width by default.
pub const EPSILON_BOUND: f64 = 0.01;

/// `D` for constant coefficients `P, P', Q, Q'` at every grid point.
pub fn profile_density(inv: &PairInvariants, p: f64, dp: f64, q: f64, dq: f64) -> ScalarField {
    let mut out = inv.f_minus.scale(-dp * p);
    out = &out + &inv.g_plus.scale(dp * q);
    out = &out + &inv.g_minus.scale(dq * p);
    &out + &inv.f_plus.scale(dq * q)
}

/// `e^{2s} f+ + f0 + e^{-2s} f-`.
pub fn exp_liouville_density(inv: &PairInvariants, s: f64) -> ScalarField {
    let (a, b) = ((2.0 * s).exp(), (-2.0 * s).exp());
    &(&inv.f_plus.scale(a) + &inv.f_zero) + &inv.f_minus.scale(b)
}

/// `f+ + f- + g- - g+ + t (f+ - f- - g- - g+)`.
pub fn lin_liouville_density(inv: &PairInvariants, t: f64) -> ScalarField {
    profile_density(inv, 1.0 - t, -1.0, 1.0 + t, 1.0)
}

/// Closed-form margins of the exponential form over all `s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpMargins {
    /// `min (f0 + 2 sqrt(f- f+))`.
    pub liouville_margin: f64,
    /// Same for `(-a-, a+)` combined: `min (2 sqrt(f- f+) - |f0|)`.
    pub al_margin: f64,
    /// Pointwise minimizer `s* = ln(f- / f+) / 4`, extreme values over the grid.
    pub s_star_range: (f64, f64),
}

pub fn exp_liouville_margin(inv: &PairInvariants) -> Result<ExpMargins> {
    let worst = inv.f_minus.min().min(inv.f_plus.min());
    if !(worst > 0.0) {
        return Err(AlvError::NonContact(format!("min(f_-, f_+) = {worst:e}")));
    }
    let root = inv.f_minus.zip_with(&inv.f_plus, |a, b| 2.0 * (a * b).sqrt());
    let s_star = inv.f_minus.zip_with(&inv.f_plus, |a, b| 0.25 * (a / b).ln());
    Ok(ExpMargins {
        liouville_margin: (&root + &inv.f_zero).min(),
        al_margin: (&root - &inv.f_zero.abs()).min(),
        s_star_range: (s_star.min(), s_star.max()),
    })
}

/// Half-width of an `s` window containing every pointwise minimizer of the
/// exponential density, padded by one.
pub fn auto_s_range(inv: &PairInvariants) -> f64 {
    let s_star = inv.f_minus.zip_with(&inv.f_plus, |a, b| 0.25 * (a / b).ln());
    1.0 + s_star.sup_norm()
}

/// Convex non-decreasing `phi` with `phi = 0` for `s <= -1-eps` and
/// `phi = 1+s` for `s >= -1+eps`; on the transition zone `phi'` is the
/// quintic smoothstep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpProfile {
    pub epsilon: f64,
}

pub fn build_bump(epsilon: f64) -> Result<BumpProfile> {
    build_bump_with_bound(epsilon, EPSILON_BOUND)
}

pub fn build_bump_with_bound(epsilon: f64, bound: f64) -> Result<BumpProfile> {
    if !(epsilon > 0.0 && epsilon <= bound) {
        return Err(AlvError::EpsilonTooLarge { epsilon, bound });
    }
    Ok(BumpProfile { epsilon })
}

impl BumpProfile {
    fn zone(&self, s: f64) -> Option<f64> {
        let e = self.epsilon;
        if s <= -1.0 - e || s >= -1.0 + e {
            None
        } else {
            Some((s + 1.0 + e) / (2.0 * e))
        }
    }

    pub fn phi(&self, s: f64) -> f64 {
        match self.zone(s) {
            Some(u) => 2.0 * self.epsilon * u.powi(4) * (u * u - 3.0 * u + 2.5),
            None if s <= -1.0 => 0.0,
            None => 1.0 + s,
        }
    }

    pub fn dphi(&self, s: f64) -> f64 {
        match self.zone(s) {
            Some(u) => u.powi(3) * (6.0 * u * u - 15.0 * u + 10.0),
            None if s <= -1.0 => 0.0,
            None => 1.0,
        }
    }

    pub fn ddphi(&self, s: f64) -> f64 {
        match self.zone(s) {
            Some(u) => 30.0 * u * u * (1.0 - u) * (1.0 - u) / (2.0 * self.epsilon),
            None => 0.0,
        }
    }
}

/// `psi_tau = tau e^s + (1 - tau) phi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterpolationFamily {
    pub tau: f64,
    pub profile: BumpProfile,
}

impl InterpolationFamily {
    pub fn new(tau: f64, profile: BumpProfile) -> Self {
        Self { tau, profile }
    }

    pub fn psi(&self, s: f64) -> f64 {
        self.tau * s.exp() + (1.0 - self.tau) * self.profile.phi(s)
    }

    pub fn dpsi(&self, s: f64) -> f64 {
        self.tau * s.exp() + (1.0 - self.tau) * self.profile.dphi(s)
    }

    /// `psi(-s) / psi(s)`.
    pub fn a(&self, s: f64) -> f64 {
        self.psi(-s) / self.psi(s)
    }

    /// `psi'(-s) / psi'(s)`.
    pub fn b(&self, s: f64) -> f64 {
        self.dpsi(-s) / self.dpsi(s)
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
        .collect()
}

/// Sampled check of the profile on `[-1 - 2 eps, 0]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpCheck {
    pub samples: usize,
    pub min_phi: f64,
    pub min_dphi: f64,
    pub max_dphi: f64,
    pub min_ddphi: f64,
    /// `max |phi - 1 - s|` over samples with `s >= -1 + eps`.
    pub linear_part_error: f64,
    /// `max |phi|` over samples with `s <= -1 - eps`.
    pub flat_part_error: f64,
    pub pass: bool,
}

impl BumpProfile {
    pub fn sampled_check(&self, samples: usize) -> BumpCheck {
        let e = self.epsilon;
        let s_values = linspace(-1.0 - 2.0 * e, 0.0, samples.max(2));
        let mut c = BumpCheck {
            samples: s_values.len(),
            min_phi: f64::INFINITY,
            min_dphi: f64::INFINITY,
            max_dphi: f64::NEG_INFINITY,
            min_ddphi: f64::INFINITY,
            linear_part_error: 0.0,
            flat_part_error: 0.0,
            pass: false,
        };
        for &s in &s_values {
            let (p, dp) = (self.phi(s), self.dphi(s));
            c.min_phi = c.min_phi.min(p);
            c.min_dphi = c.min_dphi.min(dp);
            c.max_dphi = c.max_dphi.max(dp);
            c.min_ddphi = c.min_ddphi.min(self.ddphi(s));
            if s >= -1.0 + e {
                c.linear_part_error = c.linear_part_error.max((p - 1.0 - s).abs());
            }
            if s <= -1.0 - e {
                c.flat_part_error = c.flat_part_error.max(p.abs());
            }
        }
        c.pass = c.min_phi >= 0.0
            && c.min_dphi >= 0.0
            && c.max_dphi <= 1.0
            && c.min_ddphi >= 0.0
            && c.linear_part_error <= 1e-15
            && c.flat_part_error == 0.0;
        c
    }
}

/// Minimum of the step-1 density over `s` in `[-s_max, s_max]` and the grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Step1Report {
    pub min_density: f64,
    pub s: f64,
    pub point: GridLocation,
}

pub fn step1_sweep(inv: &PairInvariants, profile: &BumpProfile, s_max: f64, samples: usize) -> Step1Report {
    let mut best = (f64::INFINITY, 0.0, 0);
    for s in linspace(-s_max, s_max, samples.max(2)) {
        let (v, loc) = step1_density(inv, profile, s).min_with_location();
        if v < best.0 {
            best = (v, s, loc.index);
        }
    }
    Step1Report {
        min_density: best.0,
        s: best.1,
        point: GridLocation::new(inv.f_plus.grid(), best.2),
    }
}

/// Density of `phi(-s) a- + phi(s) a+`.
pub fn step1_density(inv: &PairInvariants, profile: &BumpProfile, s: f64) -> ScalarField {
    profile_density(
        inv,
        profile.phi(-s),
        -profile.dphi(-s),
        profile.phi(s),
        profile.dphi(s),
    )
}

/// Density of `psi_tau(-s) a- + psi_tau(s) a+`.
pub fn interpolation_density(inv: &PairInvariants, family: &InterpolationFamily, s: f64) -> ScalarField {
    profile_density(inv, family.psi(-s), -family.dpsi(-s), family.psi(s), family.dpsi(s))
}

/// `f+ + a g- - b g+ + a b f-` at one point.
fn normalized(fp: f64, gp: f64, fm: f64, gm: f64, a: f64, b: f64) -> f64 {
    fp + a * gm - b * gp + a * b * fm
}

/// Sweep parameters for the interpolation check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HomotopyOptions {
    pub epsilon: f64,
    pub epsilon_bound: f64,
    pub tau_steps: usize,
    pub s_min: f64,
    pub s_max: f64,
    pub s_samples: usize,
}

impl Default for HomotopyOptions {
    fn default() -> Self {
        Self {
            epsilon: EPSILON_BOUND,
            epsilon_bound: EPSILON_BOUND,
            tau_steps: 64,
            s_min: 0.0,
            s_max: 5.0,
            s_samples: 512,
        }
    }
}

/// Where a sweep minimum was attained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepLocation {
    pub tau: f64,
    pub s: f64,
    pub point: GridLocation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomotopyReport {
    pub epsilon: f64,
    pub tau_steps: usize,
    pub s_min: f64,
    pub s_max: f64,
    pub s_samples: usize,
    /// Minimum of `f+ + a g- - b g+ + a b f-` over `s >= 0` and its mirror.
    pub min_normalized: f64,
    pub normalized_argmin: SweepLocation,
    /// Minimum of the undivided density `D` over `s` in `[-s_max, s_max]`.
    pub min_density: f64,
    pub density_argmin: SweepLocation,
    pub a_range: (f64, f64),
    pub b_range: (f64, f64),
    /// `min (b_tau - a_tau)` over the sampled `(tau, s >= 0)`.
    pub min_b_minus_a: f64,
    pub ab_in_unit_interval: bool,
    pub b_minus_a_bounded: bool,
    pub pass: bool,
}

struct TauSweep {
    min_normalized: (f64, f64, usize),
    min_density: (f64, f64, usize),
    a_range: (f64, f64),
    b_range: (f64, f64),
    min_b_minus_a: f64,
}

fn sweep_tau(inv: &PairInvariants, family: &InterpolationFamily, s_values: &[f64]) -> TauSweep {
    let (fp, fm) = (inv.f_plus.values(), inv.f_minus.values());
    let (gp, gm) = (inv.g_plus.values(), inv.g_minus.values());
    let mut out = TauSweep {
        min_normalized: (f64::INFINITY, 0.0, 0),
        min_density: (f64::INFINITY, 0.0, 0),
        a_range: (f64::INFINITY, f64::NEG_INFINITY),
        b_range: (f64::INFINITY, f64::NEG_INFINITY),
        min_b_minus_a: f64::INFINITY,
    };
    for &s in s_values {
        let (a, b) = (family.a(s), family.b(s));
        out.a_range = (out.a_range.0.min(a), out.a_range.1.max(a));
        out.b_range = (out.b_range.0.min(b), out.b_range.1.max(b));
        out.min_b_minus_a = out.min_b_minus_a.min(b - a);
        let (p, dp) = (family.psi(-s), -family.dpsi(-s));
        let (q, dq) = (family.psi(s), family.dpsi(s));
        for i in 0..fp.len() {
            let upper = normalized(fp[i], gp[i], fm[i], gm[i], a, b);
            // s <= 0 mirror: (f+, g+) <-> (f-, -g-)
            let lower = normalized(fm[i], -gm[i], fp[i], -gp[i], a, b);
            let value = upper.min(lower);
            if value < out.min_normalized.0 {
                out.min_normalized = (value, if upper <= lower { s } else { -s }, i);
            }
            for (sign, pp, dpp, qq, dqq) in [(1.0, p, dp, q, dq), (-1.0, q, -dq, p, -dp)] {
                let d = -dpp * pp * fm[i] + dpp * qq * gp[i] + dqq * pp * gm[i] + dqq * qq * fp[i];
                if d < out.min_density.0 {
                    out.min_density = (d, sign * s, i);
                }
            }
        }
    }
    out
}

/// Positivity of the interpolation between the smoothed linear form and the
/// exponential form, sampled over `tau_j = j / tau_steps` and `s` in `[s_min, s_max]`.
pub fn homotopy_positivity_check(
    pair: &ContactFormPair,
    options: &HomotopyOptions,
    tol: &Tolerances,
) -> Result<HomotopyReport> {
    let profile = build_bump_with_bound(options.epsilon, options.epsilon_bound)?;
    if options.tau_steps == 0
        || options.s_samples < 2
        || !(options.s_min >= 0.0 && options.s_max > options.s_min)
    {
        return Err(AlvError::InvalidParameter(
            "homotopy sweep needs tau_steps >= 1, s_samples >= 2 and 0 <= s_min < s_max".into(),
        ));
    }
    let inv = pair_invariants(pair)?;
    let report = classify_pair(&inv, tol);
    if !report.liouville.holds {
        return Err(AlvError::NotLiouville(report.liouville.margin));
    }
    if !report.lin_liouville.holds {
        return Err(AlvError::NotLinearLiouville(report.lin_liouville.margin));
    }
    let n = options.s_samples;
    let s_values = linspace(options.s_min, options.s_max, n);
    let sweeps: Vec<TauSweep> = (0..=options.tau_steps)
        .into_par_iter()
        .map(|j| {
            let tau = j as f64 / options.tau_steps as f64;
            sweep_tau(&inv, &InterpolationFamily::new(tau, profile), &s_values)
        })
        .collect();
    let grid = inv.f_plus.grid();
    let tau_of = |j: usize| j as f64 / options.tau_steps as f64;
    let mut best_norm = (f64::INFINITY, 0usize);
    let mut best_density = (f64::INFINITY, 0usize);
    let mut a_range = (f64::INFINITY, f64::NEG_INFINITY);
    let mut b_range = (f64::INFINITY, f64::NEG_INFINITY);
    let mut min_b_minus_a = f64::INFINITY;
    for (j, sw) in sweeps.iter().enumerate() {
        if sw.min_normalized.0 < best_norm.0 {
            best_norm = (sw.min_normalized.0, j);
        }
        if sw.min_density.0 < best_density.0 {
            best_density = (sw.min_density.0, j);
        }
        a_range = (a_range.0.min(sw.a_range.0), a_range.1.max(sw.a_range.1));
        b_range = (b_range.0.min(sw.b_range.0), b_range.1.max(sw.b_range.1));
        min_b_minus_a = min_b_minus_a.min(sw.min_b_minus_a);
    }
    let location = |j: usize, (_, s, i): (f64, f64, usize)| SweepLocation {
        tau: tau_of(j),
        s,
        point: GridLocation::new(grid, i),
    };
    let ab_in_unit_interval =
        a_range.0 >= 0.0 && a_range.1 <= 1.0 && b_range.0 >= 0.0 && b_range.1 <= 1.0;
    let b_minus_a_bounded = min_b_minus_a >= -options.epsilon;
    let pass = best_norm.0 > tol.tau_pos
        && best_density.0 > tol.tau_pos
        && ab_in_unit_interval
        && b_minus_a_bounded;
    Ok(HomotopyReport {
        epsilon: options.epsilon,
        tau_steps: options.tau_steps,
        s_min: options.s_min,
        s_max: options.s_max,
        s_samples: options.s_samples,
        min_normalized: best_norm.0,
        normalized_argmin: location(best_norm.1, sweeps[best_norm.1].min_normalized),
        min_density: best_density.0,
        density_argmin: location(best_density.1, sweeps[best_density.1].min_density),
        a_range,
        b_range,
        min_b_minus_a,
        ab_in_unit_interval,
        b_minus_a_bounded,
        pass,
    })
}
