//! Exterior calculus in the coframe `(theta0, theta_s, theta_u)` dual to the
//! model frame `(X, e_s, e_u)`.
//!
//! Forms are stored by their coframe coefficients; every operation reduces to
//! coefficient algebra, frame derivatives of coefficients, and the structure
//! functions of the model.

use crate::error::{AlvError, Result};
use crate::frame::{pair_slot, FrameManifold, FLOW, PAIRS, STABLE, UNSTABLE};
use crate::grid::ScalarField;

/// Minimum |coefficient| of a volume form accepted as a divisor.
pub const VOLUME_FLOOR: f64 = 1e-12;

/// `a0 theta0 + a_s theta_s + a_u theta_u`.
#[derive(Clone, Debug, PartialEq)]
pub struct OneForm {
    pub c: [ScalarField; 3],
}

/// `b_0s theta0^theta_s + b_0u theta0^theta_u + b_su theta_s^theta_u`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoForm {
    pub c: [ScalarField; 3],
}

/// `c theta0^theta_s^theta_u`.
#[derive(Clone, Debug, PartialEq)]
pub struct ThreeForm {
    pub c: ScalarField,
}

/// A vector field by its frame components.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub c: [ScalarField; 3],
}

impl OneForm {
    pub fn new(a0: ScalarField, a_s: ScalarField, a_u: ScalarField) -> Self {
        Self { c: [a0, a_s, a_u] }
    }

    pub fn zero(model: &FrameManifold) -> Self {
        let z = model.constant(0.0);
        Self::new(z.clone(), z.clone(), z)
    }

    /// Coframe element `theta^k`.
    pub fn coframe(model: &FrameManifold, k: usize) -> Self {
        let mut c = [model.constant(0.0), model.constant(0.0), model.constant(0.0)];
        c[k] = model.constant(1.0);
        Self { c }
    }

    /// Constant-coefficient combination of the coframe.
    pub fn from_constants(model: &FrameManifold, coeffs: [f64; 3]) -> Self {
        Self {
            c: coeffs.map(|v| model.constant(v)),
        }
    }

    /// `df = (X.f) theta0 + (e_s.f) theta_s + (e_u.f) theta_u`.
    pub fn differential(model: &FrameManifold, f: &ScalarField) -> Self {
        Self {
            c: [0, 1, 2].map(|i| model.frame_derivative(i, f)),
        }
    }

    /// `iota_X alpha`.
    pub fn on_flow(&self) -> &ScalarField {
        &self.c[FLOW]
    }

    /// `alpha(v)` for a frame-component vector field.
    pub fn eval(&self, v: &VectorField) -> ScalarField {
        let mut out = &self.c[0] * &v.c[0];
        for k in 1..3 {
            out = &out + &(&self.c[k] * &v.c[k]);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            c: [0, 1, 2].map(|k| &self.c[k] + &other.c[k]),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            c: [0, 1, 2].map(|k| &self.c[k] - &other.c[k]),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            c: [0, 1, 2].map(|k| self.c[k].scale(s)),
        }
    }

    /// Pointwise product `f alpha`.
    pub fn times(&self, f: &ScalarField) -> Self {
        Self {
            c: [0, 1, 2].map(|k| &self.c[k] * f),
        }
    }

    pub fn sup_distance(&self, other: &Self) -> f64 {
        (0..3)
            .map(|k| (&self.c[k] - &other.c[k]).sup_norm())
            .fold(0.0, f64::max)
    }
}

impl TwoForm {
    pub fn new(b0s: ScalarField, b0u: ScalarField, bsu: ScalarField) -> Self {
        Self { c: [b0s, b0u, bsu] }
    }

    pub fn zero(model: &FrameManifold) -> Self {
        let z = model.constant(0.0);
        Self::new(z.clone(), z.clone(), z)
    }

    /// `B(e_i, e_j)`, with antisymmetry.
    pub fn entry(&self, i: usize, j: usize) -> Option<ScalarField> {
        pair_slot(i, j).map(|(p, sign)| self.c[p].scale(sign))
    }

    /// `iota_X B = B(X, .)`.
    pub fn contract_flow(&self) -> OneForm {
        let z = self.c[0].scale(0.0);
        OneForm::new(z, self.c[0].clone(), self.c[1].clone())
    }

    /// `B(v, e_i)` for `i = 0, 1, 2`.
    pub fn contract(&self, v: &VectorField) -> OneForm {
        let c = [0, 1, 2].map(|i| {
            let mut acc = v.c[0].scale(0.0);
            for j in 0..3 {
                if let Some(b) = self.entry(j, i) {
                    acc = &acc + &(&v.c[j] * &b);
                }
            }
            acc
        });
        OneForm { c }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            c: [0, 1, 2].map(|k| &self.c[k] + &other.c[k]),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            c: [0, 1, 2].map(|k| &self.c[k] - &other.c[k]),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            c: [0, 1, 2].map(|k| self.c[k].scale(s)),
        }
    }

    pub fn times(&self, f: &ScalarField) -> Self {
        Self {
            c: [0, 1, 2].map(|k| &self.c[k] * f),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.c.iter().map(|c| c.sup_norm()).fold(0.0, f64::max)
    }
}

impl ThreeForm {
    pub fn new(c: ScalarField) -> Self {
        Self { c }
    }

    /// The reference volume `theta0^theta_s^theta_u`.
    pub fn coframe_volume(model: &FrameManifold) -> Self {
        Self {
            c: model.constant(1.0),
        }
    }

    /// `iota_X (c vol) = c theta_s^theta_u`.
    pub fn contract_flow(&self) -> TwoForm {
        let z = self.c.scale(0.0);
        TwoForm::new(z.clone(), z, self.c.clone())
    }

    pub fn times(&self, f: &ScalarField) -> Self {
        Self { c: &self.c * f }
    }
}

impl VectorField {
    pub fn new(x: ScalarField, s: ScalarField, u: ScalarField) -> Self {
        Self { c: [x, s, u] }
    }

    pub fn frame(model: &FrameManifold, i: usize) -> Self {
        let mut c = [model.constant(0.0), model.constant(0.0), model.constant(0.0)];
        c[i] = model.constant(1.0);
        Self { c }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            c: [0, 1, 2].map(|k| self.c[k].scale(s)),
        }
    }
}

/// `d omega` via `d omega(e_i, e_j) = e_i.omega(e_j) - e_j.omega(e_i) - omega([e_i, e_j])`.
pub fn exterior_d(model: &FrameManifold, omega: &OneForm) -> TwoForm {
    let c = PAIRS.map(|(i, j)| {
        let mut b = &model.frame_derivative(i, &omega.c[j]) - &model.frame_derivative(j, &omega.c[i]);
        for k in 0..3 {
            b = &b - &(&model.structure(i, j, k) * &omega.c[k]);
        }
        b
    });
    TwoForm { c }
}

/// `d B` evaluated on `(X, e_s, e_u)` by the invariant formula for 2-forms.
pub fn exterior_d2(model: &FrameManifold, b: &TwoForm) -> ThreeForm {
    let (x, s, u) = (FLOW, STABLE, UNSTABLE);
    let entry = |i: usize, j: usize| b.entry(i, j).unwrap_or_else(|| model.constant(0.0));
    // B([e_i, e_j], e_k) = sum_m c^m_ij B(e_m, e_k)
    let bracket_term = |i: usize, j: usize, k: usize| {
        let mut acc = model.constant(0.0);
        for m in 0..3 {
            if m != k {
                acc = &acc + &(&model.structure(i, j, m) * &entry(m, k));
            }
        }
        acc
    };
    let mut out = model.frame_derivative(x, &entry(s, u));
    out = &out - &model.frame_derivative(s, &entry(x, u));
    out = &out + &model.frame_derivative(u, &entry(x, s));
    out = &out - &bracket_term(x, s, u);
    out = &out + &bracket_term(x, u, s);
    out = &out - &bracket_term(s, u, x);
    ThreeForm { c: out }
}

/// `alpha ^ beta`.
pub fn wedge_1_1(alpha: &OneForm, beta: &OneForm) -> TwoForm {
    let c = PAIRS.map(|(i, j)| &(&alpha.c[i] * &beta.c[j]) - &(&alpha.c[j] * &beta.c[i]));
    TwoForm { c }
}

/// `alpha ^ B`: coefficient `a0 b_su - a_s b_0u + a_u b_0s`.
pub fn wedge_1_2(alpha: &OneForm, b: &TwoForm) -> ThreeForm {
    let t0 = &alpha.c[0] * &b.c[2];
    let t1 = &alpha.c[1] * &b.c[1];
    let t2 = &alpha.c[2] * &b.c[0];
    ThreeForm {
        c: &(&t0 - &t1) + &t2,
    }
}

/// `L_X omega = iota_X d omega + d(iota_X omega)`.
pub fn lie_x(model: &FrameManifold, omega: &OneForm) -> OneForm {
    let contracted = exterior_d(model, omega).contract_flow();
    let exact = OneForm::differential(model, omega.on_flow());
    contracted.add(&exact)
}

/// `L_X B = iota_X d B + d(iota_X B)`.
pub fn lie_x_2(model: &FrameManifold, b: &TwoForm) -> TwoForm {
    let db = exterior_d2(model, b);
    db.contract_flow().add(&exterior_d(model, &b.contract_flow()))
}

/// Pointwise quotient `omega / dvol` of top-degree forms.
pub fn volume_ratio(omega: &ThreeForm, dvol: &ThreeForm) -> Result<ScalarField> {
    let min_abs = dvol.c.values().iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if min_abs.is_nan() || min_abs <= VOLUME_FLOOR {
        return Err(AlvError::NearDegenerateVolume { min_abs });
    }
    Ok(omega.c.div(&dvol.c))
}
