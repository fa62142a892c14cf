//! Framed 3-manifold models.
//!
//! A model is a global frame `(X, e_s, e_u)` with structure functions
//! `[e_i, e_j] = sum_k c^k_ij e_k` and, for each frame vector, its action on
//! grid fields as a combination of coordinate derivatives. `X` generates the
//! flow; `e_s` and `e_u` span its stable and unstable directions.

use std::sync::Arc;

use crate::error::{AlvError, Result};
use crate::grid::{Axis, DerivativeScheme, Grid, ScalarField};

/// Index of the flow vector `X` in the frame.
pub const FLOW: usize = 0;
/// Index of `e_s`.
pub const STABLE: usize = 1;
/// Index of `e_u`.
pub const UNSTABLE: usize = 2;

pub const FRAME_LABELS: [&str; 3] = ["X", "e_s", "e_u"];
pub const COFRAME_LABELS: [&str; 3] = ["theta0", "theta_s", "theta_u"];

/// Ordered index pairs `(0,s)`, `(0,u)`, `(s,u)` used for 2-form storage.
pub const PAIRS: [(usize, usize); 3] = [(FLOW, STABLE), (FLOW, UNSTABLE), (STABLE, UNSTABLE)];

/// Storage slot and sign of `(i, j)` among [`PAIRS`]; `None` on the diagonal.
pub fn pair_slot(i: usize, j: usize) -> Option<(usize, f64)> {
    match (i, j) {
        (0, 1) => Some((0, 1.0)),
        (1, 0) => Some((0, -1.0)),
        (0, 2) => Some((1, 1.0)),
        (2, 0) => Some((1, -1.0)),
        (1, 2) => Some((2, 1.0)),
        (2, 1) => Some((2, -1.0)),
        _ => None,
    }
}

pub const JACOBI_TOLERANCE: f64 = 1e-10;

/// A frame vector acting on fields: `sum_a coeff_a * d/dx_a`.
#[derive(Clone, Debug, Default)]
pub struct Derivation {
    terms: Vec<(usize, ScalarField)>,
}

impl Derivation {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn new(terms: Vec<(usize, ScalarField)>) -> Self {
        Self { terms }
    }

    pub fn terms(&self) -> &[(usize, ScalarField)] {
        &self.terms
    }

    pub fn apply(&self, f: &ScalarField) -> ScalarField {
        let mut out = ScalarField::zeros(f.grid());
        for (axis, coeff) in &self.terms {
            out = &out + &(coeff * &f.axis_derivative(*axis));
        }
        out
    }

    fn scaled(&self, c: f64) -> Self {
        Self {
            terms: self.terms.iter().map(|(a, f)| (*a, f.scale(c))).collect(),
        }
    }
}

/// A 3-manifold presented by a global frame and its bracket table.
#[derive(Clone, Debug)]
pub struct FrameManifold {
    name: String,
    grid: Arc<Grid>,
    /// `brackets[p][k] = c^k` of the pair `PAIRS[p]`.
    brackets: [[ScalarField; 3]; 3],
    derivations: [Derivation; 3],
}

impl FrameManifold {
    /// Assembles a model and checks the Jacobi identity on the grid.
    pub fn new(
        name: impl Into<String>,
        grid: Arc<Grid>,
        brackets: [[ScalarField; 3]; 3],
        derivations: [Derivation; 3],
    ) -> Result<Self> {
        for row in &brackets {
            for c in row {
                if c.len() != grid.len() {
                    return Err(AlvError::ShapeMismatch("structure function grid".into()));
                }
                if !c.is_finite() {
                    return Err(AlvError::NonFinite("structure function".into()));
                }
            }
        }
        let model = Self {
            name: name.into(),
            grid,
            brackets,
            derivations,
        };
        let residual = model.jacobi_residual();
        if residual > JACOBI_TOLERANCE {
            return Err(AlvError::InvalidParameter(format!(
                "bracket table violates the Jacobi identity (residual {residual:e})"
            )));
        }
        Ok(model)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn derivation(&self, i: usize) -> &Derivation {
        &self.derivations[i]
    }

    /// Structure function `c^k_ij`, antisymmetric in `(i, j)`.
    pub fn structure(&self, i: usize, j: usize, k: usize) -> ScalarField {
        match pair_slot(i, j) {
            Some((p, sign)) => self.brackets[p][k].scale(sign),
            None => ScalarField::zeros(&self.grid),
        }
    }

    /// `e_i . f`.
    pub fn frame_derivative(&self, i: usize, f: &ScalarField) -> ScalarField {
        self.derivations[i].apply(f)
    }

    /// `X . f`.
    pub fn flow_derivative(&self, f: &ScalarField) -> ScalarField {
        self.frame_derivative(FLOW, f)
    }

    pub fn constant(&self, value: f64) -> ScalarField {
        ScalarField::constant(&self.grid, value)
    }

    pub fn field_from_fn(&self, f: impl Fn(&[f64]) -> f64) -> ScalarField {
        ScalarField::from_fn(&self.grid, f)
    }

    pub fn has_constant_structure(&self) -> bool {
        self.brackets
            .iter()
            .flatten()
            .all(|c| c.values().iter().all(|&v| v == c.at(0)))
    }

    /// Sup norm over the grid of the components of
    /// `[e_0,[e_1,e_2]] + [e_1,[e_2,e_0]] + [e_2,[e_0,e_1]]`.
    pub fn jacobi_residual(&self) -> f64 {
        let cyc = [(0, 1, 2), (1, 2, 0), (2, 0, 1)];
        let mut worst: f64 = 0.0;
        for l in 0..3 {
            let mut acc = ScalarField::zeros(&self.grid);
            for &(i, j, k) in &cyc {
                // [e_i, c^m_jk e_m] = e_i(c^m_jk) e_m + c^m_jk c^l_im e_l
                acc = &acc + &self.frame_derivative(i, &self.structure(j, k, l));
                for m in 0..3 {
                    acc = &acc + &(&self.structure(j, k, m) * &self.structure(i, m, l));
                }
            }
            worst = worst.max(acc.sup_norm());
        }
        worst
    }

    /// Same manifold with the flow vector replaced by `c X` (constant `c > 0`).
    pub fn reparametrized(&self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(AlvError::InvalidParameter(format!(
                "time rescaling must be positive, got {c}"
            )));
        }
        // [s_i e_i, s_j e_j] = s_i s_j c^k_ij / s_k (s_k e_k), s = (c, 1, 1)
        let s = [c, 1.0, 1.0];
        let mut brackets = self.brackets.clone();
        for (p, &(i, j)) in PAIRS.iter().enumerate() {
            for (k, entry) in brackets[p].iter_mut().enumerate() {
                *entry = entry.scale(s[i] * s[j] / s[k]);
            }
        }
        let derivations = [
            self.derivations[0].scaled(c),
            self.derivations[1].clone(),
            self.derivations[2].clone(),
        ];
        Self::new(
            format!("{}*{}", self.name, c),
            self.grid.clone(),
            brackets,
            derivations,
        )
    }
}

fn constant_brackets(grid: &Arc<Grid>, table: [[f64; 3]; 3]) -> [[ScalarField; 3]; 3] {
    table.map(|row| row.map(|c| ScalarField::constant(grid, c)))
}

/// Diagonal hyperbolic frame with `[X, e_s] = -rate_s e_s`, `[X, e_u] = -rate_u e_u`,
/// `[e_s, e_u] = 0`, so that the coframe duals satisfy
/// `L_X theta^s = rate_s theta^s` and `L_X theta^u = rate_u theta^u`.
///
/// Fields depend on the period-1 suspension coordinate `t` only, and `X = d/dt`.
pub fn make_diagonal_frame(
    rate_s: f64,
    rate_u: f64,
    grid_t: usize,
    scheme: DerivativeScheme,
) -> Result<FrameManifold> {
    if !(rate_s.is_finite() && rate_u.is_finite()) {
        return Err(AlvError::InvalidParameter("rates must be finite".into()));
    }
    let grid = Arc::new(Grid::new(vec![Axis::new("t", grid_t, 1.0)], scheme)?);
    let brackets = constant_brackets(
        &grid,
        [
            [0.0, -rate_s, 0.0], // [X, e_s]
            [0.0, 0.0, -rate_u], // [X, e_u]
            [0.0, 0.0, 0.0],     // [e_s, e_u]
        ],
    );
    let derivations = [
        Derivation::new(vec![(0, ScalarField::constant(&grid, 1.0))]),
        Derivation::zero(),
        Derivation::zero(),
    ];
    FrameManifold::new(
        format!("diag(r_s={rate_s},r_u={rate_u})"),
        grid,
        brackets,
        derivations,
    )
}

/// Suspension of a hyperbolic toral automorphism with expansion exponent `kappa`:
/// `[X, e_s] = kappa e_s`, `[X, e_u] = -kappa e_u`, `[e_s, e_u] = 0`.
pub fn make_sol_suspension(kappa: f64, grid_t: usize) -> Result<FrameManifold> {
    make_sol_suspension_with(kappa, grid_t, DerivativeScheme::Spectral)
}

pub fn make_sol_suspension_with(
    kappa: f64,
    grid_t: usize,
    scheme: DerivativeScheme,
) -> Result<FrameManifold> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(AlvError::InvalidParameter(format!(
            "kappa must be positive, got {kappa}"
        )));
    }
    let mut m = make_diagonal_frame(-kappa, kappa, grid_t, scheme)?;
    m.name = format!("sol(kappa={kappa})");
    Ok(m)
}

/// Expansion exponent of the cat map `[[2,1],[1,1]]`: `ln((3 + sqrt 5) / 2)`.
pub fn cat_map_kappa() -> f64 {
    ((3.0 + 5f64.sqrt()) / 2.0).ln()
}

/// Unit tangent bundle frame of a hyperbolic surface:
/// `[X, e_s] = e_s`, `[X, e_u] = -e_u`, `[e_s, e_u] = 2X`, constant fields only.
pub fn make_sl2_frame() -> FrameManifold {
    let grid = Arc::new(Grid::point());
    let brackets = constant_brackets(
        &grid,
        [[0.0, 1.0, 0.0], [0.0, 0.0, -1.0], [2.0, 0.0, 0.0]],
    );
    FrameManifold::new(
        "sl2",
        grid,
        brackets,
        [Derivation::zero(), Derivation::zero(), Derivation::zero()],
    )
    .expect("sl(2,R) satisfies the Jacobi identity")
}

/// Commuting frame `(d/dx, d/dy, d/dz)` on a periodic 3-axis grid, used to
/// exercise the calculus on genuinely 3-dimensional fields.
pub fn make_abelian_test_frame(samples: [usize; 3], scheme: DerivativeScheme) -> Result<FrameManifold> {
    if samples.iter().any(|&n| n < 8) {
        return Err(AlvError::DegenerateGrid(
            "abelian test frame needs at least 8 samples per axis".into(),
        ));
    }
    let axes = vec![
        Axis::new("x", samples[0], 1.0),
        Axis::new("y", samples[1], 1.0),
        Axis::new("z", samples[2], 1.0),
    ];
    let grid = Arc::new(Grid::new(axes, scheme)?);
    let brackets = constant_brackets(&grid, [[0.0; 3]; 3]);
    let one = ScalarField::constant(&grid, 1.0);
    let derivations = [
        Derivation::new(vec![(0, one.clone())]),
        Derivation::new(vec![(1, one.clone())]),
        Derivation::new(vec![(2, one)]),
    ];
    FrameManifold::new("abelian", grid, brackets, derivations)
}
