//! Plain-text coefficient tables for pairs of 1-forms.
//!
//! ```text
//! # alv-pair/1
//! model sol:catmap
//! grid 8
//! form alpha_minus
//! coeff theta0
//! 0 0 0 0 0 0 0 0
//! coeff theta_s
//! ...
//! form alpha_plus
//! ...
//! ```
//!
//! `grid` lists the sample count of every axis (nothing for constant models).
//! Values of a block may wrap over several lines; `#` starts a comment.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use crate::calculus::OneForm;
use crate::criteria::ContactFormPair;
use crate::error::{AlvError, Result};
use crate::frame::{FrameManifold, COFRAME_LABELS};
use crate::grid::ScalarField;
use crate::registry::ModelSpec;

pub const HEADER: &str = "# alv-pair/1";
pub const FORM_NAMES: [&str; 2] = ["alpha_minus", "alpha_plus"];

#[derive(Clone, Debug, PartialEq)]
pub struct PairTable {
    pub model: ModelSpec,
    pub shape: Vec<usize>,
    /// `forms[f][k]`: samples of coefficient `k` of form `f`.
    pub forms: [[Vec<f64>; 3]; 2],
}

fn err(line: usize, message: impl Into<String>) -> AlvError {
    AlvError::PairFile {
        line,
        message: message.into(),
    }
}

pub fn parse(text: &str) -> Result<PairTable> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, l)) if l.trim() == HEADER => {}
        _ => return Err(err(1, format!("expected header '{HEADER}'"))),
    }
    let mut model = None;
    let mut shape: Option<Vec<usize>> = None;
    let mut forms: [[Option<Vec<f64>>; 3]; 2] = Default::default();
    let mut form: Option<usize> = None;
    let mut current: Option<(usize, usize, usize)> = None; // (form, coeff, line)
    let mut last_line = 1;
    for (n, raw) in lines {
        last_line = n;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (word, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        match word {
            "model" => {
                model = Some(rest.parse::<ModelSpec>().map_err(|e| err(n, e.to_string()))?);
            }
            "grid" => {
                let dims = rest
                    .split_whitespace()
                    .map(|w| w.parse::<usize>().map_err(|_| err(n, format!("bad sample count '{w}'"))))
                    .collect::<Result<Vec<_>>>()?;
                shape = Some(dims);
            }
            "form" => {
                let idx = FORM_NAMES
                    .iter()
                    .position(|f| *f == rest)
                    .ok_or_else(|| err(n, format!("unknown form '{rest}'")))?;
                form = Some(idx);
                current = None;
            }
            "coeff" => {
                let f = form.ok_or_else(|| err(n, "coeff before any form"))?;
                let k = COFRAME_LABELS
                    .iter()
                    .position(|c| *c == rest)
                    .ok_or_else(|| err(n, format!("unknown coefficient '{rest}'")))?;
                if forms[f][k].is_some() {
                    return Err(err(n, format!("duplicate block {} {}", FORM_NAMES[f], rest)));
                }
                forms[f][k] = Some(Vec::new());
                current = Some((f, k, n));
            }
            _ => {
                let (f, k, _) = current.ok_or_else(|| err(n, format!("unexpected '{word}'")))?;
                let block = forms[f][k].as_mut().expect("open block");
                for w in line.split_whitespace() {
                    let v: f64 = w.parse().map_err(|_| err(n, format!("bad number '{w}'")))?;
                    if !v.is_finite() {
                        return Err(err(n, format!("non-finite value '{w}'")));
                    }
                    block.push(v);
                }
            }
        }
    }
    let model = model.ok_or_else(|| err(last_line, "missing 'model' line"))?;
    let shape = shape.ok_or_else(|| err(last_line, "missing 'grid' line"))?;
    let len: usize = shape.iter().product();
    let mut out: [[Vec<f64>; 3]; 2] = Default::default();
    for f in 0..2 {
        for k in 0..3 {
            let values = forms[f][k].take().ok_or_else(|| {
                err(last_line, format!("missing block {} {}", FORM_NAMES[f], COFRAME_LABELS[k]))
            })?;
            if values.len() != len {
                return Err(err(
                    last_line,
                    format!(
                        "block {} {} has {} values, grid needs {len}",
                        FORM_NAMES[f],
                        COFRAME_LABELS[k],
                        values.len()
                    ),
                ));
            }
            out[f][k] = values;
        }
    }
    Ok(PairTable {
        model,
        shape,
        forms: out,
    })
}

impl PairTable {
    /// Builds the pair on `model`, which must match the table's model and grid.
    pub fn to_pair(&self, model: &Arc<FrameManifold>) -> Result<ContactFormPair> {
        if model.grid().shape() != self.shape {
            return Err(err(
                0,
                format!(
                    "table grid {:?} does not match model grid {:?}",
                    self.shape,
                    model.grid().shape()
                ),
            ));
        }
        let reference = self
            .model
            .build(self.shape.first().copied().unwrap_or(8), model.grid().scheme())?;
        if reference.name() != model.name() {
            return Err(err(
                0,
                format!("table model {} does not match {}", reference.name(), model.name()),
            ));
        }
        let form = |f: usize| -> Result<OneForm> {
            let c = [0, 1, 2].map(|k| ScalarField::from_values(model.grid(), self.forms[f][k].clone()));
            let [a, b, c] = c;
            Ok(OneForm::new(a?, b?, c?))
        };
        ContactFormPair::new(model.clone(), form(0)?, form(1)?)
    }
}

pub fn load(path: &Path, model: &Arc<FrameManifold>) -> Result<ContactFormPair> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AlvError::Io(format!("{}: {e}", path.display())))?;
    parse(&text)?.to_pair(model)
}

/// Serializes the forms of `pair`; values use the shortest exact representation.
pub fn write(pair: &ContactFormPair, model: &ModelSpec) -> String {
    let mut out = String::new();
    writeln!(out, "{HEADER}").unwrap();
    writeln!(out, "model {model}").unwrap();
    let shape = pair.model.grid().shape();
    let dims: Vec<String> = shape.iter().map(|d| d.to_string()).collect();
    writeln!(out, "grid {}", dims.join(" ")).unwrap();
    let row = shape.last().copied().unwrap_or(1);
    for (name, form) in FORM_NAMES.iter().zip([&pair.alpha_minus, &pair.alpha_plus]) {
        writeln!(out, "form {name}").unwrap();
        for (label, c) in COFRAME_LABELS.iter().zip(&form.c) {
            writeln!(out, "coeff {label}").unwrap();
            for chunk in c.values().chunks(row) {
                let cells: Vec<String> = chunk.iter().map(|v| format!("{v:?}")).collect();
                writeln!(out, "{}", cells.join(" ")).unwrap();
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::DerivativeScheme;
    use crate::registry::PairSpec;

    fn sol_pair() -> (ModelSpec, ContactFormPair) {
        let spec = ModelSpec::SolCatMap;
        let m = spec.build(8, DerivativeScheme::Spectral).unwrap();
        let pair: PairSpec = "counterexample:A=0.3+gauge:0.1*sin(2*pi*t)".parse().unwrap();
        (spec, pair.build(&m).unwrap())
    }

    #[test]
    fn write_then_parse_is_exact() {
        let (spec, pair) = sol_pair();
        let text = write(&pair, &spec);
        let back = parse(&text).unwrap().to_pair(&pair.model).unwrap();
        assert_eq!(back.alpha_minus, pair.alpha_minus);
        assert_eq!(back.alpha_plus, pair.alpha_plus);
    }

    #[test]
    fn diagnostics_name_lines() {
        let (spec, pair) = sol_pair();
        let text = write(&pair, &spec);
        let broken = text.replacen("coeff theta_s\n", "coeff theta_s\n1 2 oops\n", 1);
        match parse(&broken) {
            Err(AlvError::PairFile { line, message }) => {
                assert_eq!(line, 8);
                assert!(message.contains("oops"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("model sl2\n"), Err(AlvError::PairFile { line: 1, .. })));
        let short = text.replacen("grid 8", "grid 9", 1);
        assert!(parse(&short).is_err());
    }

    #[test]
    fn mismatched_model_is_rejected() {
        let (spec, pair) = sol_pair();
        let text = write(&pair, &spec);
        let other = ModelSpec::Sol { kappa: 0.5 }.build(8, DerivativeScheme::Spectral).unwrap();
        assert!(parse(&text).unwrap().to_pair(&other).is_err());
    }
}
