//! Consistency checks of the calculus on the registered models.

use std::f64::consts::PI;

use serde::Serialize;

use crate::calculus::{exterior_d, exterior_d2, lie_x, wedge_1_1, OneForm};
use crate::error::Result;
use crate::frame::{
    cat_map_kappa, make_abelian_test_frame, make_sl2_frame, make_sol_suspension, FrameManifold,
    STABLE, UNSTABLE,
};
use crate::grid::DerivativeScheme;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelfCheck {
    pub name: String,
    pub model: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl SelfCheck {
    fn new(name: &str, model: &FrameManifold, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            model: model.name().to_string(),
            value,
            tolerance,
            pass: value <= tolerance,
        }
    }
}

fn wave(model: &FrameManifold, phase: f64) -> crate::grid::ScalarField {
    model.field_from_fn(|p| {
        let mut v = 0.3 + phase;
        for (a, x) in p.iter().enumerate() {
            v += (0.4 / (a + 1) as f64) * (2.0 * PI * (x + phase * (a + 1) as f64)).sin();
        }
        v + 0.1 * p.iter().map(|x| (4.0 * PI * x).cos()).product::<f64>()
    })
}

fn test_form(model: &FrameManifold) -> OneForm {
    OneForm::new(wave(model, 0.1), wave(model, 0.27), wave(model, 0.61))
}

/// `max(sup |d d f|, sup |d d omega|)` for smooth test data.
pub fn d_squared_residual(model: &FrameManifold) -> f64 {
    let ddf = exterior_d(model, &OneForm::differential(model, &wave(model, 0.4)));
    let ddw = exterior_d2(model, &exterior_d(model, &test_form(model)));
    ddf.sup_norm().max(ddw.c.sup_norm())
}

/// `sup |d(f omega) - df ^ omega - f d omega|`.
pub fn leibniz_residual(model: &FrameManifold) -> f64 {
    let f = wave(model, 0.33);
    let w = test_form(model);
    let lhs = exterior_d(model, &w.times(&f));
    let rhs = wedge_1_1(&OneForm::differential(model, &f), &w).add(&exterior_d(model, &w).times(&f));
    lhs.sub(&rhs).sup_norm()
}

/// Compares `L_X omega` with the centered difference of the explicit pullback
/// `(phi^h)^* omega = (a0, e^{-kappa h} a_s, e^{kappa h} a_u)(t + h)` on a sol model.
pub fn cartan_pullback_residual(kappa: f64, samples: usize, h: f64) -> Result<f64> {
    let m = make_sol_suspension(kappa, samples)?;
    let w = test_form(&m);
    let pull = |dt: f64| {
        let scale = [1.0, (-kappa * dt).exp(), (kappa * dt).exp()];
        OneForm {
            c: [0, 1, 2].map(|k| w.c[k].shifted(0, dt).scale(scale[k])),
        }
    };
    let fd = pull(h).sub(&pull(-h)).scale(0.5 / h);
    Ok(lie_x(&m, &w).sup_distance(&fd))
}

/// Lie derivative of the coframe on the sl2 frame against the bracket table.
pub fn sl2_exactness() -> f64 {
    let m = make_sl2_frame();
    let ls = lie_x(&m, &OneForm::coframe(&m, STABLE));
    let lu = lie_x(&m, &OneForm::coframe(&m, UNSTABLE));
    let want_s = OneForm::coframe(&m, STABLE).scale(-1.0);
    let want_u = OneForm::coframe(&m, UNSTABLE);
    ls.sup_distance(&want_s).max(lu.sup_distance(&want_u))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelftestReport {
    pub checks: Vec<SelfCheck>,
    pub pass: bool,
}

pub fn run_selftest(samples: usize, scheme: DerivativeScheme) -> Result<SelftestReport> {
    let sol = make_sol_suspension(cat_map_kappa(), samples.max(16))?;
    let sl2 = make_sl2_frame();
    let abelian = make_abelian_test_frame([samples.clamp(8, 24); 3], scheme)?;
    let mut checks = Vec::new();
    for m in [&sol, &sl2, &abelian] {
        checks.push(SelfCheck::new("jacobi", m, m.jacobi_residual(), 1e-10));
        checks.push(SelfCheck::new("d_squared", m, d_squared_residual(m), 1e-8));
        checks.push(SelfCheck::new("leibniz", m, leibniz_residual(m), 1e-8));
    }
    checks.push(SelfCheck::new(
        "cartan_pullback",
        &sol,
        cartan_pullback_residual(cat_map_kappa(), samples.max(16), 1e-4)?,
        1e-6,
    ));
    checks.push(SelfCheck::new("sl2_lie_exact", &sl2, sl2_exactness(), 0.0));
    let pass = checks.iter().all(|c| c.pass);
    Ok(SelftestReport { checks, pass })
}
