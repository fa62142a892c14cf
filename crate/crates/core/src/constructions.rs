//! Constructions producing and transforming pairs: defining pairs, standard
//! pairs, gauge and conformal actions, balancing, the sigma description of a
//! pair and the retraction onto standard pairs, closed pairs, and the family of
//! AL pairs that are not linear-AL.

use std::sync::Arc;

use serde::Serialize;

use crate::calculus::{lie_x, lie_x_2, wedge_1_1, OneForm, ThreeForm, TwoForm};
use crate::criteria::{pair_invariants, ContactFormPair};
use crate::error::{AlvError, Result};
use crate::frame::{FrameManifold, STABLE, UNSTABLE};
use crate::grid::ScalarField;

/// Residual gate for the eigenform equations.
pub const EIGEN_TOLERANCE: f64 = 1e-9;
/// Bound on `|iota_X alpha|` for forms said to annihilate the flow.
pub const SUPPORT_TOLERANCE: f64 = 1e-12;
/// Components smaller than this are skipped when fitting eigenvalues.
const COMPONENT_FLOOR: f64 = 1e-8;

/// Forms `alpha_s, alpha_u` with `L_X alpha_s = r_s alpha_s`, `L_X alpha_u = r_u alpha_u`,
/// both vanishing on `X`.
#[derive(Clone, Debug)]
pub struct DefiningPair {
    pub model: Arc<FrameManifold>,
    pub alpha_s: OneForm,
    pub alpha_u: OneForm,
    pub r_s: ScalarField,
    pub r_u: ScalarField,
    /// Pointwise eigenform residual.
    pub residual: ScalarField,
}

/// Classification of a defining pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DefiningPairKind {
    /// `min(min(-r_s), min(r_u))`; positive for Anosov.
    pub anosov_margin: f64,
    /// `min(r_u - r_s)`; positive for projectively Anosov.
    pub projective_margin: f64,
    /// `max |r_u + r_s|`.
    pub divergence: f64,
    pub anosov: bool,
    pub projectively_anosov: bool,
    pub volume_preserving: bool,
}

impl DefiningPair {
    /// `r_u + r_s`, the divergence of `X` for the induced volume.
    pub fn divergence(&self) -> ScalarField {
        &self.r_u + &self.r_s
    }

    /// `r_u - r_s`.
    pub fn expansion_gap(&self) -> ScalarField {
        &self.r_u - &self.r_s
    }

    /// Volume with `iota_X dvol = alpha_s ^ alpha_u`.
    pub fn dvol(&self) -> ThreeForm {
        ThreeForm::new(wedge_1_1(&self.alpha_s, &self.alpha_u).c[2].clone())
    }

    pub fn kind(&self) -> DefiningPairKind {
        let anosov_margin = self.r_s.scale(-1.0).min().min(self.r_u.min());
        let projective_margin = self.expansion_gap().min();
        let divergence = self.divergence().sup_norm();
        DefiningPairKind {
            anosov_margin,
            projective_margin,
            divergence,
            anosov: anosov_margin > 0.0,
            projectively_anosov: projective_margin > 0.0,
            volume_preserving: divergence <= EIGEN_TOLERANCE,
        }
    }

    /// Vector fields `v_s, v_u` tangent to `ker alpha_u` and `ker alpha_s`, with
    /// zero `X` component, normalized by `alpha_s(v_s) = alpha_u(v_u) = 1`.
    pub fn directions(&self) -> (crate::calculus::VectorField, crate::calculus::VectorField) {
        use crate::calculus::VectorField;
        let (p, q) = (&self.alpha_s.c[1], &self.alpha_s.c[2]);
        let (m, n) = (&self.alpha_u.c[1], &self.alpha_u.c[2]);
        let det = &(p * n) - &(q * m);
        let zero = p.scale(0.0);
        let v_s = VectorField::new(zero.clone(), n.div(&det), (-m).div(&det));
        let v_u = VectorField::new(zero, (-q).div(&det), p.div(&det));
        (v_s, v_u)
    }

    fn require_anosov(&self) -> Result<()> {
        let kind = self.kind();
        if kind.anosov {
            Ok(())
        } else {
            Err(AlvError::NotAnosov(format!(
                "min(-r_s, r_u) = {:e}",
                kind.anosov_margin
            )))
        }
    }
}

fn max_abs_flow_component(forms: &[&OneForm]) -> f64 {
    forms.iter().map(|a| a.c[0].sup_norm()).fold(0.0, f64::max)
}

/// Fits `L_X alpha = r alpha` pointwise by least squares over the significant
/// components of `alpha`; returns `(r, residual)`.
fn fit_eigenvalue(model: &FrameManifold, alpha: &OneForm) -> (ScalarField, ScalarField) {
    let lie = lie_x(model, alpha);
    let n = model.grid().len();
    let mut r = vec![0.0; n];
    let mut res = vec![0.0; n];
    for i in 0..n {
        let (mut num, mut den) = (0.0, 0.0);
        for k in 0..3 {
            let a = alpha.c[k].at(i);
            if a.abs() > COMPONENT_FLOOR {
                num += a * lie.c[k].at(i);
                den += a * a;
            }
        }
        r[i] = if den > 0.0 { num / den } else { 0.0 };
        res[i] = (0..3)
            .map(|k| (lie.c[k].at(i) - r[i] * alpha.c[k].at(i)).abs())
            .fold(0.0, f64::max);
    }
    let grid = model.grid();
    (
        ScalarField::from_values(grid, r).expect("finite fit"),
        ScalarField::from_values(grid, res).expect("finite residual"),
    )
}

pub fn verify_defining_pair(
    model: Arc<FrameManifold>,
    alpha_s: OneForm,
    alpha_u: OneForm,
) -> Result<DefiningPair> {
    let support = max_abs_flow_component(&[&alpha_s, &alpha_u]);
    if support > SUPPORT_TOLERANCE {
        return Err(AlvError::NotSupporting(support));
    }
    let orientation = wedge_1_1(&alpha_s, &alpha_u).c[2].clone();
    if !(orientation.min() > 0.0) {
        return Err(AlvError::NotOriented(format!(
            "min (alpha_s ^ alpha_u)(e_s, e_u) = {:e}",
            orientation.min()
        )));
    }
    let (r_s, res_s) = fit_eigenvalue(&model, &alpha_s);
    let (r_u, res_u) = fit_eigenvalue(&model, &alpha_u);
    let residual = res_s.zip_with(&res_u, f64::max);
    let scale = 1f64
        .max(r_s.sup_norm() * alpha_s.c.iter().map(|c| c.sup_norm()).fold(0.0, f64::max))
        .max(r_u.sup_norm() * alpha_u.c.iter().map(|c| c.sup_norm()).fold(0.0, f64::max));
    let worst = residual.max();
    if worst > EIGEN_TOLERANCE * scale {
        return Err(AlvError::NotEigen {
            residual: worst,
            tolerance: EIGEN_TOLERANCE * scale,
        });
    }
    Ok(DefiningPair {
        model,
        alpha_s,
        alpha_u,
        r_s,
        r_u,
        residual,
    })
}

/// The coframe defining pair `(theta_s, theta_u)` of a model.
pub fn reference_defining_pair(model: Arc<FrameManifold>) -> Result<DefiningPair> {
    let s = OneForm::coframe(&model, STABLE);
    let u = OneForm::coframe(&model, UNSTABLE);
    verify_defining_pair(model, s, u)
}

/// `alpha_- = alpha_u + alpha_s`, `alpha_+ = alpha_u - alpha_s`, against the
/// volume induced by the defining pair.
pub fn standard_pair(dp: &DefiningPair) -> Result<ContactFormPair> {
    dp.require_anosov()?;
    ContactFormPair::with_dvol(
        dp.model.clone(),
        dp.alpha_u.add(&dp.alpha_s),
        dp.alpha_u.sub(&dp.alpha_s),
        dp.dvol(),
    )
}

/// `(e^{-sigma} alpha_-, e^{sigma} alpha_+)`.
pub fn gauge_action(sigma: &ScalarField, pair: &ContactFormPair) -> Result<ContactFormPair> {
    ContactFormPair::with_dvol(
        pair.model.clone(),
        pair.alpha_minus.times(&sigma.scale(-1.0).exp()),
        pair.alpha_plus.times(&sigma.exp()),
        pair.dvol.clone(),
    )
}

/// `(e^{sigma} alpha_-, e^{sigma} alpha_+)`, with the volume rescaled by `e^{2 sigma}`.
pub fn conformal_action(sigma: &ScalarField, pair: &ContactFormPair) -> Result<ContactFormPair> {
    let w = sigma.exp();
    ContactFormPair::with_dvol(
        pair.model.clone(),
        pair.alpha_minus.times(&w),
        pair.alpha_plus.times(&w),
        pair.dvol.times(&(&w * &w)),
    )
}

/// Gauge making `f_+ = f_-`: `sigma = ln(f_- / f_+) / 4`.
pub fn balance(pair: &ContactFormPair) -> Result<(ScalarField, ContactFormPair)> {
    let inv = pair_invariants(pair)?;
    let worst = inv.f_minus.min().min(inv.f_plus.min());
    if !(worst > 0.0) {
        return Err(AlvError::NonContact(format!(
            "min(f_-, f_+) = {worst:e}"
        )));
    }
    let sigma = inv.f_minus.zip_with(&inv.f_plus, |fm, fp| 0.25 * (fm / fp).ln());
    let balanced = gauge_action(&sigma, pair)?;
    Ok((sigma, balanced))
}

/// Coefficients placing a pair relative to a defining pair.
#[derive(Clone, Debug, PartialEq)]
pub struct SigmaPair {
    pub sigma_s: ScalarField,
    pub sigma_u: ScalarField,
}

impl SigmaPair {
    pub fn zero(model: &FrameManifold) -> Self {
        Self {
            sigma_s: model.constant(0.0),
            sigma_u: model.constant(0.0),
        }
    }

    /// `sigma_u - sigma_s`.
    pub fn sigma(&self) -> ScalarField {
        &self.sigma_u - &self.sigma_s
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            sigma_s: self.sigma_s.scale(s),
            sigma_u: self.sigma_u.scale(s),
        }
    }

    /// `r_u - r_s - |X.sigma|`, positive when the pair is AL.
    pub fn flow_slack(&self, dp: &DefiningPair) -> ScalarField {
        let xs = dp.model.flow_derivative(&self.sigma());
        &dp.expansion_gap() - &xs.abs()
    }
}

fn require_support(pair: &ContactFormPair) -> Result<()> {
    let support = max_abs_flow_component(&[&pair.alpha_minus, &pair.alpha_plus]);
    if support > SUPPORT_TOLERANCE {
        return Err(AlvError::NotSupporting(support));
    }
    Ok(())
}

fn half_log_ratio(num: &ScalarField, den: &ScalarField, what: &str) -> Result<ScalarField> {
    let ratio = num.div(den);
    let min = ratio.min();
    if !(min > 0.0) || !ratio.is_finite() {
        return Err(AlvError::OrientationMismatch(format!(
            "{what} ratio reaches {min:e}"
        )));
    }
    Ok(ratio.map(|v| 0.5 * v.ln()))
}

/// Solves `(e^{-sigma_u} alpha_- + e^{sigma_u} alpha_+)(v_s) = 0` and
/// `(e^{-sigma_s} alpha_- - e^{sigma_s} alpha_+)(v_u) = 0` along the stable and
/// unstable directions of `directions`.
pub fn extract_sigma(pair: &ContactFormPair, directions: &DefiningPair) -> Result<SigmaPair> {
    require_support(pair)?;
    let (v_s, v_u) = directions.directions();
    let (am, ap) = (&pair.alpha_minus, &pair.alpha_plus);
    let sigma_u = half_log_ratio(&(-&am.eval(&v_s)), &ap.eval(&v_s), "-alpha_-(e_s)/alpha_+(e_s)")?;
    let sigma_s = half_log_ratio(&am.eval(&v_u), &ap.eval(&v_u), "alpha_-(e_u)/alpha_+(e_u)")?;
    Ok(SigmaPair { sigma_s, sigma_u })
}

/// `alpha_u = (e^{-sigma_u} alpha_- + e^{sigma_u} alpha_+) / (2 sqrt(cosh sigma))` and
/// `alpha_s = (e^{-sigma_s} alpha_- - e^{sigma_s} alpha_+) / (2 sqrt(cosh sigma))`.
pub fn extract_defining_pair(pair: &ContactFormPair, sig: &SigmaPair) -> Result<DefiningPair> {
    let norm = sig.sigma().map(|s| 1.0 / (2.0 * s.cosh().sqrt()));
    let (am, ap) = (&pair.alpha_minus, &pair.alpha_plus);
    let e = |f: &ScalarField, s: f64| f.scale(s).exp();
    let alpha_u = am
        .times(&e(&sig.sigma_u, -1.0))
        .add(&ap.times(&e(&sig.sigma_u, 1.0)))
        .times(&norm);
    let alpha_s = am
        .times(&e(&sig.sigma_s, -1.0))
        .sub(&ap.times(&e(&sig.sigma_s, 1.0)))
        .times(&norm);
    verify_defining_pair(pair.model.clone(), alpha_s, alpha_u)
}

/// `alpha_- = (e^{sigma_s} alpha_u + e^{sigma_u} alpha_s) / sqrt(cosh sigma)` and
/// `alpha_+ = (e^{-sigma_s} alpha_u - e^{-sigma_u} alpha_s) / sqrt(cosh sigma)`,
/// against the volume induced by `dp`.
pub fn reconstruct(dp: &DefiningPair, sig: &SigmaPair) -> Result<ContactFormPair> {
    let norm = sig.sigma().map(|s| 1.0 / s.cosh().sqrt());
    let e = |f: &ScalarField, s: f64| f.scale(s).exp();
    let alpha_minus = dp
        .alpha_u
        .times(&e(&sig.sigma_s, 1.0))
        .add(&dp.alpha_s.times(&e(&sig.sigma_u, 1.0)))
        .times(&norm);
    let alpha_plus = dp
        .alpha_u
        .times(&e(&sig.sigma_s, -1.0))
        .sub(&dp.alpha_s.times(&e(&sig.sigma_u, -1.0)))
        .times(&norm);
    ContactFormPair::with_dvol(dp.model.clone(), alpha_minus, alpha_plus, dp.dvol())
}

/// Invariants of `reconstruct(dp, sig)` in closed form.
#[derive(Clone, Debug, PartialEq)]
pub struct SigmaInvariants {
    pub f_plus: ScalarField,
    pub f_minus: ScalarField,
    pub f_zero: ScalarField,
}

pub fn invariants_from_sigma(sig: &SigmaPair, dp: &DefiningPair) -> SigmaInvariants {
    let sigma = sig.sigma();
    let xs = dp.model.flow_derivative(&sigma);
    let gap = dp.expansion_gap();
    let total = &sig.sigma_s + &sig.sigma_u;
    let cosh = sigma.map(f64::cosh);
    let f_plus = (&total.scale(-1.0).exp() * &(&xs + &gap)).div(&cosh);
    let f_minus = (&total.exp() * &(&gap - &xs)).div(&cosh);
    SigmaInvariants {
        f_plus,
        f_minus,
        f_zero: dp.divergence().scale(2.0),
    }
}

/// The path from an AL pair to the standard pair of its extracted defining pair.
#[derive(Clone, Debug)]
pub struct Retraction {
    pub defining_pair: DefiningPair,
    pub sigma: SigmaPair,
}

impl Retraction {
    pub fn new(pair: &ContactFormPair, directions: &DefiningPair) -> Result<Self> {
        let sigma = extract_sigma(pair, directions)?;
        let defining_pair = extract_defining_pair(pair, &sigma)?;
        Ok(Self {
            defining_pair,
            sigma,
        })
    }

    /// The pair at time `t` in `[0, 1]`.
    pub fn at(&self, t: f64) -> Result<ContactFormPair> {
        if !(0.0..=1.0).contains(&t) {
            return Err(AlvError::InvalidParameter(format!(
                "retraction time {t} outside [0, 1]"
            )));
        }
        reconstruct(&self.defining_pair, &self.sigma.scaled(1.0 - t))
    }
}

pub fn retraction(pair: &ContactFormPair, directions: &DefiningPair, t: f64) -> Result<ContactFormPair> {
    Retraction::new(pair, directions)?.at(t)
}

/// `alpha_- = e^{-A} alpha_u + e^{A} alpha_s`, `alpha_+ = e^{A} alpha_u - e^{-A} alpha_s`.
pub fn counterexample_pair(a: f64, dp: &DefiningPair) -> Result<ContactFormPair> {
    if !a.is_finite() {
        return Err(AlvError::InvalidParameter(format!("A = {a}")));
    }
    let divergence = dp.divergence().sup_norm();
    if divergence > EIGEN_TOLERANCE {
        return Err(AlvError::NotVolumePreserving(divergence));
    }
    if a < 1.0 {
        log::warn!("counterexample parameter A = {a} is below 1");
    }
    let (ep, em) = (a.exp(), (-a).exp());
    ContactFormPair::with_dvol(
        dp.model.clone(),
        dp.alpha_u.scale(em).add(&dp.alpha_s.scale(ep)),
        dp.alpha_u.scale(ep).sub(&dp.alpha_s.scale(em)),
        dp.dvol(),
    )
}

/// `(alpha_-, alpha_+ / k)` where `alpha_- ^ alpha_+ = k tau` and `tau` is a flow
/// invariant area form annihilating `X`.
pub fn closed_pair_from_volume(pair: &ContactFormPair, tau: &TwoForm) -> Result<ContactFormPair> {
    let m = &pair.model;
    let invariance = lie_x_2(m, tau).sup_norm();
    if invariance > EIGEN_TOLERANCE {
        return Err(AlvError::NotInvariant(invariance));
    }
    let transverse = tau.c[0].sup_norm().max(tau.c[1].sup_norm());
    if transverse > EIGEN_TOLERANCE {
        return Err(AlvError::InvalidParameter(format!(
            "tau does not annihilate X: max component {transverse:e}"
        )));
    }
    let w = wedge_1_1(&pair.alpha_minus, &pair.alpha_plus);
    let kappa = w.c[2].div(&tau.c[2]);
    let min = kappa.min();
    if !(min > 0.0) || !kappa.is_finite() {
        return Err(AlvError::NonPositiveKappa(min));
    }
    ContactFormPair::with_dvol(
        m.clone(),
        pair.alpha_minus.clone(),
        pair.alpha_plus.times(&kappa.map(|k| 1.0 / k)),
        ThreeForm::new(tau.c[2].clone()),
    )
}

/// `sup |X.h + r_u + r_s|`.
pub fn divergence_cobound_residual(h: &ScalarField, dp: &DefiningPair) -> f64 {
    (&dp.model.flow_derivative(h) + &dp.divergence()).sup_norm()
}
