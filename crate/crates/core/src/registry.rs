//! Named models and pair recipes, as used on the command line and in configs.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use crate::calculus::wedge_1_1;
use crate::constructions::{
    closed_pair_from_volume, conformal_action, counterexample_pair, gauge_action,
    reference_defining_pair, standard_pair, DefiningPair,
};
use crate::criteria::ContactFormPair;
use crate::error::{AlvError, Result};
use crate::expr::Expr;
use crate::frame::{
    cat_map_kappa, make_abelian_test_frame, make_sl2_frame, make_sol_suspension_with, FrameManifold,
};
use crate::grid::DerivativeScheme;
use crate::pairfile;

#[derive(Clone, Debug, PartialEq)]
pub enum ModelSpec {
    SolCatMap,
    Sol { kappa: f64 },
    Sl2,
    Abelian,
}

pub const MODEL_HELP: [(&str, &str); 4] = [
    ("sol:catmap", "suspension of the cat map [[2,1],[1,1]], fields depend on t"),
    ("sol:kappa=K", "suspension with expansion exponent K > 0, fields depend on t"),
    ("sl2", "geodesic-flow frame [X,e_s]=e_s, [X,e_u]=-e_u, [e_s,e_u]=2X, constant fields"),
    ("abelian", "commuting frame on a 3-axis grid, calculus self-test only"),
];

impl ModelSpec {
    pub fn kappa(&self) -> Option<f64> {
        match self {
            ModelSpec::SolCatMap => Some(cat_map_kappa()),
            ModelSpec::Sol { kappa } => Some(*kappa),
            _ => None,
        }
    }

    /// Builds the model; `grid` is the sample count per axis where applicable.
    pub fn build(&self, grid: usize, scheme: DerivativeScheme) -> Result<Arc<FrameManifold>> {
        Ok(Arc::new(match self {
            ModelSpec::SolCatMap => make_sol_suspension_with(cat_map_kappa(), grid, scheme)?,
            ModelSpec::Sol { kappa } => make_sol_suspension_with(*kappa, grid, scheme)?,
            ModelSpec::Sl2 => make_sl2_frame(),
            ModelSpec::Abelian => make_abelian_test_frame([grid.clamp(8, 32); 3], scheme)?,
        }))
    }
}

impl FromStr for ModelSpec {
    type Err = AlvError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "sol:catmap" => Ok(ModelSpec::SolCatMap),
            "sl2" => Ok(ModelSpec::Sl2),
            "abelian" => Ok(ModelSpec::Abelian),
            _ => {
                let kappa = s
                    .strip_prefix("sol:kappa=")
                    .ok_or_else(|| AlvError::Config(format!("unknown model '{s}'")))?;
                let kappa: f64 = kappa
                    .parse()
                    .map_err(|_| AlvError::Config(format!("bad kappa in model '{s}'")))?;
                Ok(ModelSpec::Sol { kappa })
            }
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSpec::SolCatMap => write!(f, "sol:catmap"),
            ModelSpec::Sol { kappa } => write!(f, "sol:kappa={kappa}"),
            ModelSpec::Sl2 => write!(f, "sl2"),
            ModelSpec::Abelian => write!(f, "abelian"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PairBase {
    Standard,
    Counterexample { a: f64 },
    Closed,
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub enum PairAction {
    Gauge(Expr),
    Conformal(Expr),
}

/// A base pair followed by gauge and conformal actions, written
/// `standard+gauge:0.1*sin(2*pi*t)+conformal:0.05`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairSpec {
    pub base: PairBase,
    pub actions: Vec<PairAction>,
}

const ACTION_MARKERS: [&str; 2] = ["+gauge:", "+conformal:"];

impl FromStr for PairSpec {
    type Err = AlvError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut cuts: Vec<usize> = ACTION_MARKERS
            .iter()
            .flat_map(|m| s.match_indices(m).map(|(i, _)| i))
            .collect();
        cuts.sort_unstable();
        let base_end = cuts.first().copied().unwrap_or(s.len());
        let base = parse_base(&s[..base_end])?;
        let mut actions = Vec::new();
        for (k, &start) in cuts.iter().enumerate() {
            let end = cuts.get(k + 1).copied().unwrap_or(s.len());
            let part = &s[start + 1..end];
            let (kind, body) = part.split_once(':').expect("marker contains ':'");
            let expr = Expr::parse(body)
                .map_err(|e| AlvError::Config(format!("in pair action '{part}': {e}")))?;
            actions.push(match kind {
                "gauge" => PairAction::Gauge(expr),
                _ => PairAction::Conformal(expr),
            });
        }
        Ok(PairSpec { base, actions })
    }
}

fn parse_base(s: &str) -> Result<PairBase> {
    match s {
        "standard" => Ok(PairBase::Standard),
        "closed" => Ok(PairBase::Closed),
        "counterexample" => Ok(PairBase::Counterexample { a: 1.0 }),
        _ => {
            if let Some(path) = s.strip_prefix("file:") {
                return Ok(PairBase::File(PathBuf::from(path)));
            }
            let a = s
                .strip_prefix("counterexample:A=")
                .ok_or_else(|| AlvError::Config(format!("unknown pair '{s}'")))?;
            let a: f64 = a
                .parse()
                .map_err(|_| AlvError::Config(format!("bad A in pair '{s}'")))?;
            Ok(PairBase::Counterexample { a })
        }
    }
}

impl fmt::Display for PairSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.base {
            PairBase::Standard => write!(f, "standard")?,
            PairBase::Closed => write!(f, "closed")?,
            PairBase::Counterexample { a } => write!(f, "counterexample:A={a}")?,
            PairBase::File(p) => write!(f, "file:{}", p.display())?,
        }
        for a in &self.actions {
            match a {
                PairAction::Gauge(e) => write!(f, "+gauge:{e}")?,
                PairAction::Conformal(e) => write!(f, "+conformal:{e}")?,
            }
        }
        Ok(())
    }
}

impl PairSpec {
    pub fn standard() -> Self {
        Self {
            base: PairBase::Standard,
            actions: Vec::new(),
        }
    }

    /// Builds the pair on `model`, whose coframe defining pair supplies
    /// `alpha_s, alpha_u`.
    pub fn build(&self, model: &Arc<FrameManifold>) -> Result<ContactFormPair> {
        let mut pair = match &self.base {
            PairBase::Standard => standard_pair(&model_defining_pair(model)?)?,
            PairBase::Counterexample { a } => counterexample_pair(*a, &model_defining_pair(model)?)?,
            PairBase::Closed => {
                let dp = model_defining_pair(model)?;
                let tau = wedge_1_1(&dp.alpha_s, &dp.alpha_u);
                closed_pair_from_volume(&standard_pair(&dp)?, &tau)?
            }
            PairBase::File(path) => pairfile::load(path, model)?,
        };
        for action in &self.actions {
            pair = match action {
                PairAction::Gauge(e) => gauge_action(&e.to_field(model)?, &pair)?,
                PairAction::Conformal(e) => conformal_action(&e.to_field(model)?, &pair)?,
            };
        }
        Ok(pair)
    }
}

/// The coframe defining pair of a model, or a config error when the model has none.
pub fn model_defining_pair(model: &Arc<FrameManifold>) -> Result<DefiningPair> {
    reference_defining_pair(model.clone())
}
