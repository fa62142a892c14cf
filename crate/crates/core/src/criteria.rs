//! Pair invariants, classification margins and Reeb fields.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::calculus::{
    exterior_d, exterior_d2, volume_ratio, wedge_1_1, wedge_1_2, OneForm, ThreeForm, VectorField,
};
use crate::error::{AlvError, Result};
use crate::frame::FrameManifold;
use crate::grid::{GridLocation, ScalarField};

/// Residual bound for solved Reeb fields.
pub const REEB_TOLERANCE: f64 = 1e-9;

/// Two contact form candidates `(alpha_minus, alpha_plus)` and the volume
/// form the invariants are measured against.
#[derive(Clone, Debug)]
pub struct ContactFormPair {
    pub model: Arc<FrameManifold>,
    pub alpha_minus: OneForm,
    pub alpha_plus: OneForm,
    pub dvol: ThreeForm,
}

impl ContactFormPair {
    /// Pair measured against the coframe volume.
    pub fn new(model: Arc<FrameManifold>, alpha_minus: OneForm, alpha_plus: OneForm) -> Result<Self> {
        let dvol = ThreeForm::coframe_volume(&model);
        Self::with_dvol(model, alpha_minus, alpha_plus, dvol)
    }

    pub fn with_dvol(
        model: Arc<FrameManifold>,
        alpha_minus: OneForm,
        alpha_plus: OneForm,
        dvol: ThreeForm,
    ) -> Result<Self> {
        let n = model.grid().len();
        let fields = alpha_minus
            .c
            .iter()
            .chain(alpha_plus.c.iter())
            .chain(std::iter::once(&dvol.c));
        for f in fields {
            if f.len() != n || f.grid().shape() != model.grid().shape() {
                return Err(AlvError::ShapeMismatch(format!(
                    "form coefficient has {} samples, model grid has {n}",
                    f.len()
                )));
            }
            if !f.is_finite() {
                return Err(AlvError::NonFinite("pair coefficient".into()));
            }
        }
        Ok(Self {
            model,
            alpha_minus,
            alpha_plus,
            dvol,
        })
    }

    /// The pair `(-alpha_minus, alpha_plus)`.
    pub fn sign_flipped(&self) -> Self {
        Self {
            model: self.model.clone(),
            alpha_minus: self.alpha_minus.scale(-1.0),
            alpha_plus: self.alpha_plus.clone(),
            dvol: self.dvol.clone(),
        }
    }

    /// Same forms measured against another volume.
    pub fn with_volume(&self, dvol: ThreeForm) -> Result<Self> {
        Self::with_dvol(
            self.model.clone(),
            self.alpha_minus.clone(),
            self.alpha_plus.clone(),
            dvol,
        )
    }
}

/// The five invariants of a pair relative to its volume form:
///
/// ```text
/// a+ ^ d a+ = f+ dvol     a- ^ d a- = -f- dvol     d(a- ^ a+) = f0 dvol
/// a- ^ d a+ = g+ dvol     a+ ^ d a- = g- dvol
/// ```
#[derive(Clone, Debug, PartialEq)]
pub struct PairInvariants {
    pub f_plus: ScalarField,
    pub f_minus: ScalarField,
    pub f_zero: ScalarField,
    pub g_plus: ScalarField,
    pub g_minus: ScalarField,
}

impl PairInvariants {
    /// `sup |f0 - (g- - g+)|`.
    pub fn identity_residual(&self) -> f64 {
        (&self.f_zero - &(&self.g_minus - &self.g_plus)).sup_norm()
    }

    pub fn fields(&self) -> [(&'static str, &ScalarField); 5] {
        [
            ("f_plus", &self.f_plus),
            ("f_minus", &self.f_minus),
            ("f_zero", &self.f_zero),
            ("g_plus", &self.g_plus),
            ("g_minus", &self.g_minus),
        ]
    }
}

pub fn pair_invariants(pair: &ContactFormPair) -> Result<PairInvariants> {
    let m = &pair.model;
    let (am, ap) = (&pair.alpha_minus, &pair.alpha_plus);
    let dam = exterior_d(m, am);
    let dap = exterior_d(m, ap);
    let ratio = |w: ThreeForm| volume_ratio(&w, &pair.dvol);
    Ok(PairInvariants {
        f_plus: ratio(wedge_1_2(ap, &dap))?,
        f_minus: ratio(wedge_1_2(am, &dam))?.scale(-1.0),
        f_zero: ratio(exterior_d2(m, &wedge_1_1(am, ap)))?,
        g_plus: ratio(wedge_1_2(am, &dap))?,
        g_minus: ratio(wedge_1_2(ap, &dam))?,
    })
}

/// Positivity and equality tolerances used by the classifier.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// A strict inequality holds iff its margin exceeds this.
    pub tau_pos: f64,
    /// Relative tolerance for the equalities `f+ = f-` and `f0 = 0`.
    pub tau_eq: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tau_pos: 1e-9,
            tau_eq: 1e-9,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
    Undecided,
}

/// Outcome of one condition: its minimum slack over the grid and where it occurs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub holds: bool,
    pub verdict: Verdict,
    pub margin: f64,
    pub argmin: Option<GridLocation>,
}

impl Check {
    /// Strict condition `margin > 0` judged with the band `|margin| <= tau`.
    pub fn strict(margin: f64, argmin: Option<GridLocation>, tau: f64) -> Self {
        let verdict = if margin > tau {
            Verdict::Holds
        } else if margin >= -tau {
            Verdict::Undecided
        } else {
            Verdict::Fails
        };
        Self {
            holds: verdict == Verdict::Holds,
            verdict,
            margin,
            argmin,
        }
    }

    fn from_field(field: &ScalarField, tau: f64) -> Self {
        let (margin, loc) = field.min_with_location();
        Self::strict(margin, Some(loc), tau)
    }

    /// Equality condition reported as `-deviation`, holding within `bound`.
    fn equality(deviation: &ScalarField, bound: f64) -> Self {
        let neg = deviation.abs().scale(-1.0);
        let (margin, loc) = neg.min_with_location();
        let holds = -margin <= bound;
        Self {
            holds,
            verdict: if holds { Verdict::Holds } else { Verdict::Fails },
            margin,
            argmin: Some(loc),
        }
    }
}

/// Classification flags with their margins.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginReport {
    pub contact_minus: Check,
    pub contact_plus: Check,
    pub liouville: Check,
    #[serde(rename = "AL")]
    pub al: Check,
    pub lin_liouville: Check,
    #[serde(rename = "lin_AL")]
    pub lin_al: Check,
    pub balanced: Check,
    pub closed: Check,
}

impl MarginReport {
    pub fn entries(&self) -> [(&'static str, &Check); 8] {
        [
            ("contact_minus", &self.contact_minus),
            ("contact_plus", &self.contact_plus),
            ("liouville", &self.liouville),
            ("AL", &self.al),
            ("lin_liouville", &self.lin_liouville),
            ("lin_AL", &self.lin_al),
            ("balanced", &self.balanced),
            ("closed", &self.closed),
        ]
    }
}

/// Pointwise `2 sqrt(f- f+)`, or `None` at the first point where `f+` or `f-`
/// is not positive.
fn root_product(inv: &PairInvariants) -> std::result::Result<ScalarField, usize> {
    let (fm, fp) = (inv.f_minus.values(), inv.f_plus.values());
    if let Some(i) = (0..fm.len()).find(|&i| !(fm[i] > 0.0 && fp[i] > 0.0)) {
        return Err(i);
    }
    Ok(inv.f_minus.zip_with(&inv.f_plus, |a, b| 2.0 * (a * b).sqrt()))
}

pub fn classify_pair(inv: &PairInvariants, tol: &Tolerances) -> MarginReport {
    let tau = tol.tau_pos;
    let grid = inv.f_plus.grid().clone();
    let (liouville, al) = match root_product(inv) {
        Ok(root) => (
            Check::from_field(&(&inv.f_zero + &root), tau),
            Check::from_field(&(&root - &inv.f_zero.abs()), tau),
        ),
        Err(i) => {
            let loc = Some(GridLocation::new(&grid, i));
            (
                Check::strict(f64::NEG_INFINITY, loc.clone(), tau),
                Check::strict(f64::NEG_INFINITY, loc, tau),
            )
        }
    };
    let lin_liouville = (&inv.f_plus - &inv.g_plus).zip_with(&(&inv.f_minus + &inv.g_minus), f64::min);
    let lin_al = (&inv.f_plus - &inv.g_plus.abs()).zip_with(&(&inv.f_minus - &inv.g_minus.abs()), f64::min);
    let scale = 1f64.max(inv.f_plus.max()).max(inv.f_minus.max());
    MarginReport {
        contact_minus: Check::from_field(&inv.f_minus, tau),
        contact_plus: Check::from_field(&inv.f_plus, tau),
        liouville,
        al,
        lin_liouville: Check::from_field(&lin_liouville, tau),
        lin_al: Check::from_field(&lin_al, tau),
        balanced: Check::equality(&(&inv.f_plus - &inv.f_minus), tol.tau_eq * scale),
        closed: Check::equality(&inv.f_zero, tol.tau_eq * scale),
    }
}

/// Sign of a contact form relative to the reference orientation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContactSign {
    Positive,
    Negative,
}

impl ContactSign {
    pub fn factor(self) -> f64 {
        match self {
            ContactSign::Positive => 1.0,
            ContactSign::Negative => -1.0,
        }
    }
}

/// Reeb field of a contact form of the given sign relative to the coframe volume.
pub fn reeb_field(model: &FrameManifold, alpha: &OneForm, sign: ContactSign) -> Result<VectorField> {
    reeb_field_with(model, alpha, sign, &ThreeForm::coframe_volume(model), REEB_TOLERANCE)
}

/// Reeb field with the sign of `alpha ^ d alpha` judged against `dvol`.
pub fn reeb_field_with(
    model: &FrameManifold,
    alpha: &OneForm,
    sign: ContactSign,
    dvol: &ThreeForm,
    tau_pos: f64,
) -> Result<VectorField> {
    let da = exterior_d(model, alpha);
    let density = volume_ratio(&wedge_1_2(alpha, &da), dvol)?.scale(sign.factor());
    let (min, _) = density.min_with_location();
    if !(min > tau_pos) {
        return Err(AlvError::NonContact(format!(
            "signed contact density reaches {min:e}"
        )));
    }
    // Kernel of [[0, b0s, b0u], [-b0s, 0, bsu], [-b0u, -bsu, 0]] is (bsu, -b0u, b0s);
    // pairing it with alpha gives the coefficient of alpha ^ d alpha.
    let [b0s, b0u, bsu] = &da.c;
    let pairing = wedge_1_2(alpha, &da).c;
    let r = VectorField::new(bsu.div(&pairing), (-b0u).div(&pairing), b0s.div(&pairing));
    let contracted = da.contract(&r);
    let residual = contracted.c.iter().map(|c| c.sup_norm()).fold(0.0, f64::max);
    let normalization = (&alpha.eval(&r) - &model.constant(1.0)).sup_norm();
    let scale = 1f64.max(da.sup_norm());
    if residual > REEB_TOLERANCE * scale || normalization > REEB_TOLERANCE {
        return Err(AlvError::DegenerateKernel(format!(
            "residual {residual:e}, normalization error {normalization:e}"
        )));
    }
    Ok(r)
}

/// Reeb fields of a pair and their cross pairings.
#[derive(Clone, Debug)]
pub struct ReebData {
    pub r_minus: VectorField,
    pub r_plus: VectorField,
    /// `alpha_minus(R_plus)`.
    pub minus_on_plus: ScalarField,
    /// `alpha_plus(R_minus)`.
    pub plus_on_minus: ScalarField,
}

impl ReebData {
    /// `(form(R_minus), form(R_plus))`.
    pub fn pairings(&self, form: &OneForm) -> (ScalarField, ScalarField) {
        (form.eval(&self.r_minus), form.eval(&self.r_plus))
    }
}

pub fn reeb_data(pair: &ContactFormPair, tau_pos: f64) -> Result<ReebData> {
    let m = &pair.model;
    let r_minus = reeb_field_with(m, &pair.alpha_minus, ContactSign::Negative, &pair.dvol, tau_pos)?;
    let r_plus = reeb_field_with(m, &pair.alpha_plus, ContactSign::Positive, &pair.dvol, tau_pos)?;
    Ok(ReebData {
        minus_on_plus: pair.alpha_minus.eval(&r_plus),
        plus_on_minus: pair.alpha_plus.eval(&r_minus),
        r_minus,
        r_plus,
    })
}

/// Reeb pairing criteria: `|a-(R+) + a+(R-)| < 2` and `|a-(R+)|, |a+(R-)| < 1`.
#[derive(Clone, Debug)]
pub struct ReebCriteria {
    pub data: ReebData,
    pub sum_pairing: ScalarField,
    pub sum: Check,
    pub individual: Check,
    pub determinant: ScalarField,
    pub determinant_check: Check,
}

pub fn reeb_criteria(pair: &ContactFormPair, tol: &Tolerances) -> Result<ReebCriteria> {
    let data = reeb_data(pair, tol.tau_pos)?;
    let sum_pairing = &data.minus_on_plus + &data.plus_on_minus;
    let sum_slack = sum_pairing.map(|v| 2.0 - v.abs());
    let individual_slack = data
        .minus_on_plus
        .zip_with(&data.plus_on_minus, |a, b| 1.0 - a.abs().max(b.abs()));
    let determinant = frame_determinant(&data);
    let det_slack = determinant.abs();
    Ok(ReebCriteria {
        sum: Check::from_field(&sum_slack, tol.tau_pos),
        individual: Check::from_field(&individual_slack, tol.tau_pos),
        determinant_check: Check::from_field(&det_slack, tol.tau_pos),
        sum_pairing,
        determinant,
        data,
    })
}

/// `det(X, R_minus, R_plus)` in frame components.
pub fn frame_determinant(data: &ReebData) -> ScalarField {
    let (rm, rp) = (&data.r_minus.c, &data.r_plus.c);
    &(&rm[1] * &rp[2]) - &(&rm[2] * &rp[1])
}
