#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use alv_core::constructions::{conformal_action, gauge_action, reconstruct, standard_pair, SigmaPair};
use alv_core::criteria::ContactFormPair;
use alv_core::frame::{make_sl2_frame, make_sol_suspension, FrameManifold};
use alv_core::grid::ScalarField;
use alv_core::registry::model_defining_pair;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SUITE_SEED: u64 = 0x5eed_a1f0;

/// Expansion exponent of the cat map `[[2,1],[1,1]]` from its characteristic
/// polynomial `x^2 - 3x + 1`.
pub fn catmap_kappa_oracle() -> f64 {
    let (trace, det): (f64, f64) = (3.0, 1.0);
    let lambda = 0.5 * (trace + (trace * trace - 4.0 * det).sqrt());
    lambda.ln()
}

pub fn catmap(samples: usize) -> Arc<FrameManifold> {
    Arc::new(make_sol_suspension(catmap_kappa_oracle(), samples).unwrap())
}

pub fn sl2() -> Arc<FrameManifold> {
    Arc::new(make_sl2_frame())
}

pub fn standard(model: &Arc<FrameManifold>) -> ContactFormPair {
    standard_pair(&model_defining_pair(model).unwrap()).unwrap()
}

/// `a sin(2 pi (k t + phase)) + c`, constant on models without axes.
pub fn wave(model: &FrameManifold, a: f64, k: f64, phase: f64, c: f64) -> ScalarField {
    if model.grid().ndim() == 0 {
        return model.constant(a * (2.0 * PI * phase).sin() + c);
    }
    model.field_from_fn(|p| a * (2.0 * PI * (k * p[0] + phase)).sin() + c)
}

pub fn random_wave(model: &FrameManifold, rng: &mut ChaCha8Rng, amplitude: f64) -> ScalarField {
    let a = rng.random_range(-amplitude..amplitude);
    let k = rng.random_range(1..=3) as f64;
    let phase = rng.random_range(0.0..1.0);
    let c = rng.random_range(-0.5..0.5);
    wave(model, a, k, phase, c)
}

/// Standard pairs moved by random gauge, conformal and sigma perturbations.
pub fn random_pair(model: &Arc<FrameManifold>, rng: &mut ChaCha8Rng) -> (String, ContactFormPair) {
    let dp = model_defining_pair(model).unwrap();
    match rng.random_range(0..3) {
        0 => {
            let g = random_wave(model, rng, 1.0);
            let b = rng.random_range(0.0..0.3);
            let phase = rng.random_range(0.0..1.0);
            let pair = gauge_action(&g, &standard_pair(&dp).unwrap()).unwrap();
            let pair = conformal_action(&wave(model, b, 1.0, phase, 0.0), &pair).unwrap();
            (format!("gauge+conformal(b={b:.3})"), pair)
        }
        1 => {
            let b = rng.random_range(0.0..0.3);
            let k = rng.random_range(1..=2) as f64;
            let phase = rng.random_range(0.0..1.0);
            let pair = conformal_action(&wave(model, b, k, phase, 0.1), &standard_pair(&dp).unwrap()).unwrap();
            (format!("conformal(b={b:.3},k={k})"), pair)
        }
        _ => {
            let sig = SigmaPair {
                sigma_s: random_wave(model, rng, 0.07),
                sigma_u: random_wave(model, rng, 0.07),
            };
            let pair = reconstruct(&dp, &sig).unwrap();
            let g = random_wave(model, rng, 0.5);
            ("sigma+gauge".to_string(), gauge_action(&g, &pair).unwrap())
        }
    }
}

/// 50 pairs on the cat-map model followed by 50 on the sl2 frame.
pub fn identity_suite(samples: usize) -> Vec<(String, ContactFormPair)> {
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED);
    let sol = catmap(samples);
    let sl = sl2();
    let mut out = Vec::new();
    for m in [&sol, &sl] {
        for i in 0..50 {
            let (label, pair) = random_pair(m, &mut rng);
            out.push((format!("{} #{i} {label}", m.name()), pair));
        }
    }
    out
}
