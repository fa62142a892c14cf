//! Acceptance criteria AC1-AC10, one PASS/FAIL line each.
//!
//! Criteria listed in `KNOWN_FAILURES` are reported like every other one but do
//! not fail the test run.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;

use alv_core::calculus::{exterior_d, wedge_1_2};
use alv_core::constructions::{
    balance, conformal_action, counterexample_pair, extract_defining_pair, extract_sigma, gauge_action,
    invariants_from_sigma, Retraction,
};
use alv_core::criteria::{classify_pair, frame_determinant, pair_invariants, reeb_criteria, ContactFormPair, Tolerances};
use alv_core::dynamics::{birkhoff_average, integrate_orbit, lyapunov_cocycle, volume_preservation_test};
use alv_core::grid::{DerivativeScheme, ScalarField};
use alv_core::liouville4d::{
    build_bump, exp_liouville_margin, homotopy_positivity_check, lin_liouville_density, step1_sweep, HomotopyOptions,
};
use alv_core::registry::model_defining_pair;
use alv_core::selftest::run_selftest;
use common::*;

const KNOWN_FAILURES: [&str; 1] = ["AC10"];
const GRID: usize = 256;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, what: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn tol() -> Tolerances {
    Tolerances::default()
}

fn sup_diff(a: &ScalarField, b: &ScalarField) -> f64 {
    (a - b).sup_norm()
}

fn ac1() -> Outcome {
    let kappa = catmap_kappa_oracle();
    let expected = 4.0 * ((3.0 + 5f64.sqrt()) / 2.0).ln();
    let pair = standard(&catmap(GRID));
    let inv = pair_invariants(&pair).map_err(|e| e.to_string())?;
    let m = classify_pair(&inv, &tol());
    ensure((m.al.margin - expected).abs() <= 1e-9, || format!("AL margin {} vs {expected}", m.al.margin))?;
    ensure((expected - 4.0 * kappa).abs() <= 1e-12, || "eigenvalue oracle disagrees".into())?;
    ensure(m.balanced.holds && m.closed.holds, || "balanced/closed flags".into())?;
    let f0 = inv.f_zero.sup_norm();
    ensure(f0 <= 1e-12, || format!("sup |f0| = {f0:e}"))?;
    Ok(format!("AL margin {:.10} (expected {expected:.10}), sup|f0| {f0:.1e}", m.al.margin))
}

fn ac2() -> Outcome {
    let model = sl2();
    let pair = standard(&model);
    let inv = pair_invariants(&pair).map_err(|e| e.to_string())?;
    let m = classify_pair(&inv, &tol());
    let exact = |v: f64, want: f64| (v - want).abs() <= 1e-12;
    ensure(exact(inv.f_plus.at(0), 2.0) && exact(inv.f_minus.at(0), 2.0), || "f+- != 2".into())?;
    ensure(exact(m.al.margin, 4.0), || format!("AL margin {}", m.al.margin))?;
    ensure(exact(m.lin_al.margin, 2.0), || format!("lin_AL margin {}", m.lin_al.margin))?;
    // By hand: d(theta_u -+ theta_s) = theta0^theta_u +- theta0^theta_s gives
    // R_+ = (0, -1/2, 1/2) and R_- = (0, 1/2, 1/2).
    let rc = reeb_criteria(&pair, &tol()).map_err(|e| e.to_string())?;
    let dp = model_defining_pair(&model).map_err(|e| e.to_string())?;
    let (s_minus, s_plus) = rc.data.pairings(&dp.alpha_s);
    let (u_minus, u_plus) = rc.data.pairings(&dp.alpha_u);
    let got = [s_minus.at(0), s_plus.at(0), u_minus.at(0), u_plus.at(0)];
    let want = [0.5, -0.5, 0.5, 0.5];
    ensure(got.iter().zip(want).all(|(g, w)| exact(*g, w)), || format!("pairings {got:?} vs {want:?}"))?;
    let cross = [rc.data.minus_on_plus.at(0), rc.data.plus_on_minus.at(0)];
    ensure(cross.iter().all(|v| exact(*v, 0.0)), || format!("cross pairings {cross:?}"))?;
    let det = frame_determinant(&rc.data).at(0);
    ensure(exact(det, 0.5), || format!("determinant {det}"))?;
    Ok(format!(
        "f+- = 2, AL 4, lin_AL 2, (alpha_s, alpha_u)(R-) = (1/2, 1/2), (R+) = (-1/2, 1/2), det {det}"
    ))
}

fn ac3() -> Outcome {
    let kappa = catmap_kappa_oracle();
    let model = catmap(GRID);
    let dp = model_defining_pair(&model).map_err(|e| e.to_string())?;
    let pair = counterexample_pair(1.0, &dp).map_err(|e| e.to_string())?;
    let m = classify_pair(&pair_invariants(&pair).map_err(|e| e.to_string())?, &tol());
    let lin_expected = 2.0 * kappa * (1.0 - 2f64.sinh());
    ensure((m.al.margin - 4.0 * kappa).abs() <= 1e-9, || format!("AL margin {}", m.al.margin))?;
    ensure((m.lin_al.margin - lin_expected).abs() <= 1e-9, || {
        format!("lin_AL margin {} vs {lin_expected}", m.lin_al.margin)
    })?;
    let sig = extract_sigma(&pair, &dp).map_err(|e| e.to_string())?;
    let es = sup_diff(&sig.sigma_s, &model.constant(-1.0));
    let eu = sup_diff(&sig.sigma_u, &model.constant(1.0));
    ensure(es.max(eu) <= 1e-10, || format!("sigma error {:e}", es.max(eu)))?;
    let extracted = extract_defining_pair(&pair, &sig).map_err(|e| e.to_string())?;
    let direct = pair_invariants(&pair.with_volume(extracted.dvol()).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let closed = invariants_from_sigma(&sig, &extracted);
    let err = sup_diff(&closed.f_plus, &direct.f_plus)
        .max(sup_diff(&closed.f_minus, &direct.f_minus))
        .max(sup_diff(&closed.f_zero, &direct.f_zero));
    ensure(err <= 1e-9, || format!("invariants_from_sigma error {err:e}"))?;
    Ok(format!(
        "AL {:.10}, lin_AL {:.10} (expected {lin_expected:.10}), sigma error {:.1e}, invariants error {err:.1e}",
        m.al.margin,
        m.lin_al.margin,
        es.max(eu)
    ))
}

fn ac4() -> Outcome {
    let suite = identity_suite(GRID);
    let t = tol();
    let mut balanced_checked = 0;
    let mut non_al = 0;
    let mut worst_identity = 0f64;
    let mut worst_gauge = 0f64;
    for (i, (label, pair)) in suite.iter().enumerate() {
        let inv = pair_invariants(pair).map_err(|e| format!("{label}: {e}"))?;
        let scale = inv.fields().iter().fold(1f64, |m, (_, f)| m.max(f.sup_norm()));
        worst_identity = worst_identity.max(inv.identity_residual() / scale);
        let m = classify_pair(&inv, &t);
        if !m.al.holds {
            non_al += 1;
        }

        let model = &pair.model;
        let g = wave(model, 0.4, 1.0 + (i % 3) as f64, 0.1 * i as f64, 0.2);
        let moved = pair_invariants(&gauge_action(&g, pair).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        worst_gauge = worst_gauge
            .max(sup_diff(&moved.f_zero, &inv.f_zero))
            .max(sup_diff(&(&moved.f_minus * &moved.f_plus), &(&inv.f_minus * &inv.f_plus)));

        let h = wave(model, 0.7, 1.0, 0.3, 0.0).exp();
        let rescaled = pair.with_volume(pair.dvol.times(&h)).map_err(|e| e.to_string())?;
        let m2 = classify_pair(&pair_invariants(&rescaled).map_err(|e| e.to_string())?, &t);
        for ((name, a), (_, b)) in m.entries().into_iter().zip(m2.entries()) {
            ensure(a.holds == b.holds, || format!("{label}: flag {name} depends on dvol"))?;
        }

        let flipped = classify_pair(&pair_invariants(&pair.sign_flipped()).map_err(|e| e.to_string())?, &t);
        ensure(m.al.holds == (m.liouville.holds && flipped.liouville.holds), || {
            format!("{label}: AL vs both-sign Liouville")
        })?;

        if m.contact_minus.holds && m.contact_plus.holds {
            let (_, balanced) = balance(pair).map_err(|e| e.to_string())?;
            let mb = classify_pair(&pair_invariants(&balanced).map_err(|e| e.to_string())?, &t);
            let rc = reeb_criteria(&balanced, &t).map_err(|e| e.to_string())?;
            ensure(mb.balanced.holds, || format!("{label}: balance"))?;
            ensure(mb.al.holds == rc.sum.holds, || {
                format!("{label}: AL {} vs Reeb {}", mb.al.margin, rc.sum.margin)
            })?;
            balanced_checked += 1;
        }
    }
    ensure(worst_identity <= 1e-12, || format!("relative identity residual {worst_identity:e}"))?;
    ensure(worst_gauge <= 1e-10, || format!("gauge invariance {worst_gauge:e}"))?;
    Ok(format!(
        "{} pairs ({non_al} not AL), relative identity {worst_identity:.1e}, gauge {worst_gauge:.1e}, Reeb equivalence on {balanced_checked} balanced pairs",
        suite.len()
    ))
}

/// Minimum over a grid of 10^4 values of `s` of the 4-form density of
/// `e^{-s} alpha_- + e^{s} alpha_+`, computed from the wedge products of the forms.
fn exp_margin_oracle(pair: &ContactFormPair) -> f64 {
    let m = &pair.model;
    let (am, ap) = (&pair.alpha_minus, &pair.alpha_plus);
    let (dm, dp) = (exterior_d(m, am), exterior_d(m, ap));
    let vol = &pair.dvol.c;
    let a = wedge_1_2(ap, &dp).c.div(vol);
    let b = (&wedge_1_2(ap, &dm).c - &wedge_1_2(am, &dp).c).div(vol);
    let c = wedge_1_2(am, &dm).c.div(vol).scale(-1.0);
    let s_star = c.zip_with(&a, |c, a| 0.25 * (c / a).ln());
    let (lo, hi) = (s_star.min() - 0.5, s_star.max() + 0.5);
    let n = 10_000;
    let mut best = f64::INFINITY;
    for k in 0..n {
        let s = lo + (hi - lo) * k as f64 / (n - 1) as f64;
        let (ep, em) = ((2.0 * s).exp(), (-2.0 * s).exp());
        for i in 0..a.len() {
            best = best.min(ep * a.at(i) + b.at(i) + em * c.at(i));
        }
    }
    best
}

fn ac5() -> Outcome {
    let suite = identity_suite(GRID);
    let mut worst = 0f64;
    let mut compared = 0;
    for (label, pair) in &suite {
        let inv = pair_invariants(pair).map_err(|e| e.to_string())?;
        if let Ok(em) = exp_liouville_margin(&inv) {
            let oracle = exp_margin_oracle(pair);
            let flipped = exp_margin_oracle(&pair.sign_flipped());
            let err = (em.liouville_margin - oracle).abs().max((em.al_margin - oracle.min(flipped)).abs());
            ensure(err <= 1e-6, || format!("{label}: closed form vs s-grid {err:e}"))?;
            worst = worst.max(err);
            compared += 1;
        }
        let f = |x: &ScalarField| x.scale(2.0);
        let end_plus = lin_liouville_density(&inv, 1.0);
        let end_minus = lin_liouville_density(&inv, -1.0);
        ensure(end_plus == f(&(&inv.f_plus - &inv.g_plus)), || format!("{label}: t = 1 endpoint"))?;
        ensure(end_minus == f(&(&inv.f_minus + &inv.g_minus)), || format!("{label}: t = -1 endpoint"))?;
        let fl = pair_invariants(&pair.sign_flipped()).map_err(|e| e.to_string())?;
        let endpoints_positive = [&end_plus, &end_minus, &lin_liouville_density(&fl, 1.0), &lin_liouville_density(&fl, -1.0)]
            .iter()
            .all(|d| d.min() > 0.0);
        let lemma = (0..inv.f_plus.len()).all(|i| {
            inv.g_minus.at(i).abs() < inv.f_minus.at(i) && inv.g_plus.at(i).abs() < inv.f_plus.at(i)
        });
        ensure(endpoints_positive == lemma, || format!("{label}: endpoint positivity vs |g| < f"))?;
    }
    Ok(format!("{compared} pairs, max |closed form - s-grid| {worst:.1e}, endpoint identities exact"))
}

fn ac6() -> Outcome {
    let suite = identity_suite(GRID);
    let t = tol();
    let mut checked = 0;
    let (mut worst_start, mut worst_end) = (0f64, 0f64);
    for (label, pair) in &suite {
        let inv = pair_invariants(pair).map_err(|e| e.to_string())?;
        if !classify_pair(&inv, &t).al.holds {
            continue;
        }
        let dp = model_defining_pair(&pair.model).map_err(|e| e.to_string())?;
        let r = Retraction::new(pair, &dp).map_err(|e| format!("{label}: {e}"))?;
        let start = r.at(0.0).map_err(|e| e.to_string())?;
        let e0 = start.alpha_minus.sup_distance(&pair.alpha_minus).max(start.alpha_plus.sup_distance(&pair.alpha_plus));
        let end = r.at(1.0).map_err(|e| e.to_string())?;
        let std = alv_core::constructions::standard_pair(&r.defining_pair).map_err(|e| e.to_string())?;
        let e1 = end.alpha_minus.sup_distance(&std.alpha_minus).max(end.alpha_plus.sup_distance(&std.alpha_plus));
        worst_start = worst_start.max(e0);
        worst_end = worst_end.max(e1);
        let mut prev = f64::NEG_INFINITY;
        for k in 0..33 {
            let p = r.at(k as f64 / 32.0).map_err(|e| e.to_string())?;
            let margin = classify_pair(&pair_invariants(&p).map_err(|e| e.to_string())?, &t).al.margin;
            ensure(margin > t.tau_pos, || format!("{label}: leaves AL at step {k}"))?;
            ensure(margin >= prev - 1e-12 * margin.abs().max(1.0), || {
                format!("{label}: AL margin decreases at step {k}: {prev} -> {margin}")
            })?;
            prev = margin;
        }
        checked += 1;
    }
    ensure(worst_start <= 1e-12, || format!("start error {worst_start:e}"))?;
    ensure(worst_end <= 1e-9, || format!("end error {worst_end:e}"))?;
    for model in [catmap(GRID), sl2()] {
        let pair = standard(&model);
        let dp = model_defining_pair(&model).map_err(|e| e.to_string())?;
        let r = Retraction::new(&pair, &dp).map_err(|e| e.to_string())?;
        for k in 0..33 {
            let p = r.at(k as f64 / 32.0).map_err(|e| e.to_string())?;
            let d = p.alpha_minus.sup_distance(&pair.alpha_minus).max(p.alpha_plus.sup_distance(&pair.alpha_plus));
            ensure(d <= 1e-12, || format!("{}: standard path moves by {d:e}", model.name()))?;
        }
    }
    Ok(format!("{checked} AL pairs, start {worst_start:.1e}, end {worst_end:.1e}, margins monotone, standard paths constant"))
}

fn ac7() -> Outcome {
    let epsilon = 0.01;
    let profile = build_bump(epsilon).map_err(|e| e.to_string())?;
    let bump = profile.sampled_check(10_000);
    ensure(bump.pass, || format!("bump check {bump:?}"))?;
    // Centered differences of the profile against its stated derivatives.
    let h = 1e-6;
    let mut fd_err = 0f64;
    for k in 0..=2000 {
        let s = -1.0 - 2.0 * epsilon + 4.0 * epsilon * k as f64 / 2000.0;
        fd_err = fd_err
            .max(((profile.phi(s + h) - profile.phi(s - h)) / (2.0 * h) - profile.dphi(s)).abs())
            .max(((profile.dphi(s + h) - profile.dphi(s - h)) / (2.0 * h) - profile.ddphi(s)).abs() * epsilon);
    }
    ensure(fd_err <= 1e-6, || format!("profile derivatives {fd_err:e}"))?;
    let opts = HomotopyOptions { epsilon, ..HomotopyOptions::default() };
    let mut details = Vec::new();
    for (model, kappa) in [(catmap(GRID), catmap_kappa_oracle()), (sl2(), 1.0)] {
        let pair = standard(&model);
        let inv = pair_invariants(&pair).map_err(|e| e.to_string())?;
        let step1 = step1_sweep(&inv, &profile, 5.0, 1024);
        ensure(step1.min_density > 0.0, || format!("{}: step1 min {}", model.name(), step1.min_density))?;
        let rep = homotopy_positivity_check(&pair, &opts, &tol()).map_err(|e| e.to_string())?;
        ensure(rep.pass && rep.min_normalized > 0.0 && rep.min_density > 0.0, || format!("{}: sweep {rep:?}", model.name()))?;
        ensure(rep.min_b_minus_a >= -epsilon - 1e-9, || format!("{}: b - a = {}", model.name(), rep.min_b_minus_a))?;
        ensure(rep.min_density >= 4.0 * kappa * (1.0 - epsilon / 2.0) - 1e-9, || {
            format!("{}: raw density {} below 4 kappa (1 - eps/2)", model.name(), rep.min_density)
        })?;
        details.push(format!(
            "{}: step1 {:.4}, normalized {:.4}, raw {:.4}, min b-a {:.2e}",
            model.name(),
            step1.min_density,
            rep.min_normalized,
            rep.min_density,
            rep.min_b_minus_a
        ));
    }
    Ok(details.join("; "))
}

fn ac8() -> Outcome {
    let kappa = catmap_kappa_oracle();
    let model = catmap(GRID);
    let dp = model_defining_pair(&model).map_err(|e| e.to_string())?;
    let l = lyapunov_cocycle(&model, &dp, &[0.3], 50.0, 1e-3).map_err(|e| e.to_string())?;
    let err = (l.lambda_u - kappa).abs().max((l.lambda_s + kappa).abs());
    ensure(err <= 1e-6, || format!("Lyapunov {l:?}"))?;
    let vol = volume_preservation_test(&model, &dp, 4, 50.0, 1e-3).map_err(|e| e.to_string())?;
    ensure(vol.max_abs_average <= 1e-10, || format!("volume average {:e}", vol.max_abs_average))?;
    let h = model.field_from_fn(|p| (2.0 * PI * p[0]).sin() + 0.3 * (4.0 * PI * p[0] + 0.5).cos());
    let xh = model.flow_derivative(&h);
    let mut cobound = 0f64;
    for horizon in [1.0, 2.0, 5.0, 10.0] {
        let orbit = integrate_orbit(&model, &[0.17], horizon, 1e-3).map_err(|e| e.to_string())?;
        cobound = cobound.max(birkhoff_average(&xh, &orbit).abs());
    }
    ensure(cobound <= 1e-8, || format!("coboundary average {cobound:e}"))?;
    Ok(format!(
        "lambda_u {:.9}, lambda_s {:.9} (kappa {kappa:.9}), volume {:.1e}, coboundary {cobound:.1e}",
        l.lambda_u, l.lambda_s, vol.max_abs_average
    ))
}

fn ac9() -> Outcome {
    let rep = run_selftest(GRID, DerivativeScheme::Spectral).map_err(|e| e.to_string())?;
    let limit = |name: &str| match name {
        "jacobi" | "sl2_lie_exact" => 0.0,
        "cartan_pullback" => 1e-6,
        _ => 1e-8,
    };
    let mut lines = Vec::new();
    for c in &rep.checks {
        ensure(c.value <= limit(&c.name), || format!("{} on {}: {:e}", c.name, c.model, c.value))?;
        lines.push(format!("{}@{} {:.1e}", c.name, c.model, c.value));
    }
    Ok(lines.join(", "))
}

/// Largest amplitude of `eps sin(2 pi t)` keeping the conformally moved
/// standard pair AL, to `1e-6`.
fn conformal_threshold() -> Result<f64, String> {
    let model = catmap(GRID);
    let pair = standard(&model);
    let is_al = |eps: f64| -> Result<bool, String> {
        let sigma = model.field_from_fn(|p| eps * (2.0 * PI * p[0]).sin());
        let moved = conformal_action(&sigma, &pair).map_err(|e| e.to_string())?;
        Ok(classify_pair(&pair_invariants(&moved).map_err(|e| e.to_string())?, &tol()).al.holds)
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    ensure(is_al(lo)? && !is_al(hi)?, || "bracket".into())?;
    while hi - lo > 1e-7 {
        let mid = 0.5 * (lo + hi);
        if is_al(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn ac10() -> Outcome {
    let kappa = catmap_kappa_oracle();
    let found = conformal_threshold()?;
    let stated = kappa / PI;
    let intrinsic = kappa / (2.0 * PI);
    let detail = format!(
        "bisection threshold {found:.7}; stated kappa/pi = {stated:.7}; |2 X.sigma| < 4 kappa fails to match, |X.sigma| < kappa (kappa/(2 pi) = {intrinsic:.7}) matches to {:.1e}",
        (found - intrinsic).abs()
    );
    ensure((found - intrinsic).abs() <= 1e-6, || format!("unexpected threshold: {detail}"))?;
    if (found - stated).abs() <= 1e-6 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("AC1", ac1),
        ("AC2", ac2),
        ("AC3", ac3),
        ("AC4", ac4),
        ("AC5", ac5),
        ("AC6", ac6),
        ("AC7", ac7),
        ("AC8", ac8),
        ("AC9", ac9),
        ("AC10", ac10),
    ];
    let mut unexpected = Vec::new();
    for (name, check) in criteria {
        let start = std::time::Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("{name} PASS ({secs:.2}s) {detail}"),
            Err(detail) => {
                let known = KNOWN_FAILURES.contains(&name);
                let tag = if known { " [known]" } else { "" };
                println!("{name} FAIL{tag} ({secs:.2}s) {detail}");
                if !known {
                    unexpected.push(name);
                }
            }
        }
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {}", unexpected.join(", "));
        ExitCode::FAILURE
    }
}
