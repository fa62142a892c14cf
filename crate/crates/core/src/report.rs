//! Report documents and the commands that fill them.

use std::collections::BTreeMap;
use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use crate::config::RunConfig;
use crate::constructions::{
    extract_defining_pair, invariants_from_sigma, reconstruct, standard_pair, DefiningPair,
    DefiningPairKind, Retraction,
};
use crate::criteria::{
    classify_pair, pair_invariants, reeb_criteria, Check, ContactFormPair, MarginReport,
    PairInvariants,
};
use crate::dynamics::{lyapunov_cocycle, volume_preservation_test, LyapunovEstimate, VolumeReport};
use crate::error::{AlvError, Result};
use crate::frame::{FrameManifold, COFRAME_LABELS};
use crate::grid::{GridLocation, ScalarField};
use crate::liouville4d::{
    build_bump_with_bound, exp_liouville_margin, homotopy_positivity_check, step1_sweep, BumpCheck,
    ExpMargins, HomotopyReport, Step1Report,
};
use crate::registry::model_defining_pair;
use crate::selftest::{run_selftest, SelftestReport};

pub const SCHEMA: &str = "alv-report/1";
/// Sample count for the sampled profile check.
pub const BUMP_SAMPLES: usize = 10_000;
/// Tolerance of the extraction roundtrip.
pub const ROUNDTRIP_TOLERANCE: f64 = 1e-10;
/// Tolerance for agreement of the closed-form invariants with direct ones.
pub const SIGMA_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FieldSummary {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub argmin: GridLocation,
}

impl FieldSummary {
    pub fn of(name: &str, f: &ScalarField) -> Self {
        let (min, argmin) = f.min_with_location();
        Self {
            name: name.to_string(),
            min,
            max: f.max(),
            argmin,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModelSummary {
    pub spec: String,
    pub name: String,
    pub grid_shape: Vec<usize>,
    pub jacobi_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReebSection {
    /// `alpha_-(R_+)`, `alpha_+(R_-)` and their sum.
    pub pairings: Vec<FieldSummary>,
    /// Pairings of the model defining forms with `R_-` and `R_+`.
    pub defining_pairings: Vec<FieldSummary>,
    pub sum: Check,
    pub individual: Check,
    pub determinant: FieldSummary,
    pub determinant_check: Check,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RetractionSection {
    pub times: Vec<f64>,
    pub al_margins: Vec<f64>,
    pub all_al: bool,
    pub monotone: bool,
    /// `sup |r(P, 0) - P|`.
    pub start_error: f64,
    /// `sup |r(P, 1) - standard pair of the extracted defining pair|`.
    pub end_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SigmaSection {
    pub sigma_s: FieldSummary,
    pub sigma_u: FieldSummary,
    pub extracted_kind: DefiningPairKind,
    pub r_s: FieldSummary,
    pub r_u: FieldSummary,
    /// `sup |reconstruct(extract(P)) - P|` over both forms.
    pub roundtrip_error: f64,
    /// `sup |closed-form invariants - direct invariants|` against the extracted volume.
    pub invariants_error: f64,
    pub retraction: RetractionSection,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifySection {
    pub invariants: Vec<FieldSummary>,
    /// `sup |f0 - (g- - g+)|`.
    pub identity_residual: f64,
    pub margins: MarginReport,
    /// Margins of `(-alpha_-, alpha_+)`.
    pub sign_flipped: MarginReport,
    pub exp_margins: Option<ExpMargins>,
    pub reeb: Option<ReebSection>,
    pub reeb_error: Option<String>,
    pub sigma: Option<SigmaSection>,
    pub sigma_error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HomotopySection {
    pub bump: BumpCheck,
    pub step1: Step1Report,
    pub sweep: HomotopyReport,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DynamicsSection {
    pub x0: Vec<f64>,
    pub lyapunov: LyapunovEstimate,
    pub reparametrization: f64,
    pub reparametrized: LyapunovEstimate,
    pub volume_preserving_model: bool,
    pub volume: VolumeReport,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportDocument {
    pub schema: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: RunConfig,
    pub model: Option<ModelSummary>,
    pub pair: Option<String>,
    pub verify: Option<VerifySection>,
    pub homotopy: Option<HomotopySection>,
    pub dynamics: Option<DynamicsSection>,
    pub selftest: Option<SelftestReport>,
    pub timings: BTreeMap<String, f64>,
    pub failures: Vec<String>,
    pub status: Status,
}

impl ReportDocument {
    fn new(command: &str, config: &RunConfig) -> Self {
        Self {
            schema: SCHEMA,
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config: config.clone(),
            model: None,
            pair: None,
            verify: None,
            homotopy: None,
            dynamics: None,
            selftest: None,
            timings: BTreeMap::new(),
            failures: Vec::new(),
            status: Status::Pass,
        }
    }

    fn finish(mut self) -> Self {
        self.status = if self.failures.is_empty() {
            Status::Pass
        } else {
            Status::Fail
        };
        self
    }

    /// 0 when every check passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Pass => 0,
            Status::Fail => 1,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

struct Timer {
    enabled: bool,
    start: Instant,
}

impl Timer {
    fn new(config: &RunConfig) -> Self {
        Self {
            enabled: !config.deterministic,
            start: Instant::now(),
        }
    }

    fn lap(&mut self, doc: &mut ReportDocument, name: &str) {
        if self.enabled {
            doc.timings.insert(name.to_string(), self.start.elapsed().as_secs_f64());
        }
        self.start = Instant::now();
    }
}

/// Model and pair named by the config.
pub fn build_inputs(config: &RunConfig) -> Result<(Arc<FrameManifold>, ContactFormPair)> {
    config.validate()?;
    let model = config.model_spec()?.build(config.grid, config.scheme)?;
    let pair = config.pair_spec()?.build(&model)?;
    Ok((model, pair))
}

fn summarize_model(config: &RunConfig, model: &FrameManifold) -> ModelSummary {
    ModelSummary {
        spec: config.model.clone(),
        name: model.name().to_string(),
        grid_shape: model.grid().shape(),
        jacobi_residual: model.jacobi_residual(),
    }
}

fn record_flags(doc: &mut ReportDocument, prefix: &str, margins: &MarginReport) {
    for (name, check) in margins.entries() {
        if !check.holds {
            doc.failures.push(format!("{prefix}{name} (margin {:e})", check.margin));
        }
    }
}

fn reeb_section(pair: &ContactFormPair, dp: Option<&DefiningPair>, config: &RunConfig) -> Result<ReebSection> {
    let rc = reeb_criteria(pair, &config.tolerances)?;
    let mut defining_pairings = Vec::new();
    if let Some(dp) = dp {
        for (name, form) in [("alpha_s", &dp.alpha_s), ("alpha_u", &dp.alpha_u)] {
            let (on_minus, on_plus) = rc.data.pairings(form);
            defining_pairings.push(FieldSummary::of(&format!("{name}(R_minus)"), &on_minus));
            defining_pairings.push(FieldSummary::of(&format!("{name}(R_plus)"), &on_plus));
        }
    }
    Ok(ReebSection {
        pairings: vec![
            FieldSummary::of("alpha_minus(R_plus)", &rc.data.minus_on_plus),
            FieldSummary::of("alpha_plus(R_minus)", &rc.data.plus_on_minus),
            FieldSummary::of("sum", &rc.sum_pairing),
        ],
        defining_pairings,
        sum: rc.sum,
        individual: rc.individual,
        determinant: FieldSummary::of("det(X, R_minus, R_plus)", &rc.determinant),
        determinant_check: rc.determinant_check,
    })
}

fn pair_distance(a: &ContactFormPair, b: &ContactFormPair) -> f64 {
    a.alpha_minus
        .sup_distance(&b.alpha_minus)
        .max(a.alpha_plus.sup_distance(&b.alpha_plus))
}

/// AL margin of a pair against its own volume.
pub fn al_margin(pair: &ContactFormPair, config: &RunConfig) -> Result<f64> {
    Ok(classify_pair(&pair_invariants(pair)?, &config.tolerances).al.margin)
}

pub fn retraction_section(
    pair: &ContactFormPair,
    retraction: &Retraction,
    config: &RunConfig,
) -> Result<RetractionSection> {
    let n = config.retraction_samples;
    let times: Vec<f64> = (0..n).map(|k| k as f64 / (n - 1) as f64).collect();
    let mut al_margins = Vec::with_capacity(n);
    for &t in &times {
        al_margins.push(al_margin(&retraction.at(t)?, config)?);
    }
    let scale = al_margins.iter().fold(1f64, |m, v| m.max(v.abs()));
    let monotone = al_margins.windows(2).all(|w| w[1] >= w[0] - 1e-12 * scale);
    let all_al = al_margins.iter().all(|&m| m > config.tolerances.tau_pos);
    let start_error = pair_distance(&retraction.at(0.0)?, pair);
    let end_error = pair_distance(&retraction.at(1.0)?, &standard_pair(&retraction.defining_pair)?);
    Ok(RetractionSection {
        times,
        al_margins,
        all_al,
        monotone,
        start_error,
        end_error,
    })
}

fn sigma_section(pair: &ContactFormPair, dp: &DefiningPair, config: &RunConfig) -> Result<SigmaSection> {
    let retraction = Retraction::new(pair, dp)?;
    let sig = &retraction.sigma;
    let extracted = extract_defining_pair(pair, sig)?;
    let rebuilt = reconstruct(&extracted, sig)?;
    let roundtrip_error = pair_distance(&rebuilt, pair);
    let closed_form = invariants_from_sigma(sig, &extracted);
    let direct = pair_invariants(&rebuilt)?;
    let invariants_error = (&closed_form.f_plus - &direct.f_plus)
        .sup_norm()
        .max((&closed_form.f_minus - &direct.f_minus).sup_norm())
        .max((&closed_form.f_zero - &direct.f_zero).sup_norm());
    Ok(SigmaSection {
        sigma_s: FieldSummary::of("sigma_s", &sig.sigma_s),
        sigma_u: FieldSummary::of("sigma_u", &sig.sigma_u),
        extracted_kind: extracted.kind(),
        r_s: FieldSummary::of("r_s", &extracted.r_s),
        r_u: FieldSummary::of("r_u", &extracted.r_u),
        roundtrip_error,
        invariants_error,
        retraction: retraction_section(pair, &retraction, config)?,
    })
}

pub fn invariant_summaries(inv: &PairInvariants) -> Vec<FieldSummary> {
    inv.fields().iter().map(|(n, f)| FieldSummary::of(n, f)).collect()
}

pub fn cmd_verify(config: &RunConfig) -> Result<ReportDocument> {
    let mut doc = ReportDocument::new("verify", config);
    let mut timer = Timer::new(config);
    let (model, pair) = build_inputs(config)?;
    doc.model = Some(summarize_model(config, &model));
    doc.pair = Some(config.pair.clone());
    timer.lap(&mut doc, "build");

    let inv = pair_invariants(&pair)?;
    let margins = classify_pair(&inv, &config.tolerances);
    let sign_flipped = classify_pair(&pair_invariants(&pair.sign_flipped())?, &config.tolerances);
    record_flags(&mut doc, "", &margins);
    timer.lap(&mut doc, "classify");

    let dp = model_defining_pair(&model).ok();
    let (reeb, reeb_error) = match reeb_section(&pair, dp.as_ref(), config) {
        Ok(r) => {
            for (name, c) in [("reeb_sum", &r.sum), ("reeb_individual", &r.individual)] {
                if !c.holds {
                    doc.failures.push(format!("{name} (margin {:e})", c.margin));
                }
            }
            (Some(r), None)
        }
        Err(e) => (None, Some(e.to_string())),
    };
    timer.lap(&mut doc, "reeb");

    let (sigma, sigma_error) = match &dp {
        Some(dp) if margins.al.holds => match sigma_section(&pair, dp, config) {
            Ok(s) => {
                if s.roundtrip_error > ROUNDTRIP_TOLERANCE {
                    doc.failures.push(format!("sigma roundtrip error {:e}", s.roundtrip_error));
                }
                if s.invariants_error > SIGMA_TOLERANCE {
                    doc.failures.push(format!("sigma invariants error {:e}", s.invariants_error));
                }
                if !(s.retraction.monotone && s.retraction.all_al) {
                    doc.failures.push("retraction leaves the AL pairs or is not monotone".into());
                }
                (Some(s), None)
            }
            Err(e) => (None, Some(e.to_string())),
        },
        Some(_) => (None, Some("pair is not AL".into())),
        None => (None, Some("model has no coframe defining pair".into())),
    };
    timer.lap(&mut doc, "sigma");

    doc.verify = Some(VerifySection {
        invariants: invariant_summaries(&inv),
        identity_residual: inv.identity_residual(),
        margins,
        sign_flipped,
        exp_margins: exp_liouville_margin(&inv).ok(),
        reeb,
        reeb_error,
        sigma,
        sigma_error,
    });
    Ok(doc.finish())
}

pub fn cmd_homotopy(config: &RunConfig) -> Result<ReportDocument> {
    let mut doc = ReportDocument::new("homotopy", config);
    let mut timer = Timer::new(config);
    let (model, pair) = build_inputs(config)?;
    doc.model = Some(summarize_model(config, &model));
    doc.pair = Some(config.pair.clone());
    let h = &config.homotopy;
    let profile = build_bump_with_bound(h.epsilon, h.epsilon_bound)?;
    let sweep = homotopy_positivity_check(&pair, h, &config.tolerances)?;
    timer.lap(&mut doc, "sweep");
    let inv = pair_invariants(&pair)?;
    let step1 = step1_sweep(&inv, &profile, h.s_max.max(2.0), 2 * h.s_samples);
    let bump = profile.sampled_check(BUMP_SAMPLES);
    timer.lap(&mut doc, "step1");
    if !bump.pass {
        doc.failures.push("bump profile invariants".into());
    }
    if !(step1.min_density > config.tolerances.tau_pos) {
        doc.failures.push(format!("step1 density minimum {:e}", step1.min_density));
    }
    if !sweep.pass {
        doc.failures.push(format!(
            "interpolation sweep (normalized min {:e}, density min {:e}, min b-a {:e})",
            sweep.min_normalized, sweep.min_density, sweep.min_b_minus_a
        ));
    }
    doc.homotopy = Some(HomotopySection { bump, step1, sweep });
    Ok(doc.finish())
}

pub fn cmd_dynamics(config: &RunConfig) -> Result<ReportDocument> {
    let mut doc = ReportDocument::new("dynamics", config);
    let mut timer = Timer::new(config);
    config.validate()?;
    let model = config.model_spec()?.build(config.grid, config.scheme)?;
    doc.model = Some(summarize_model(config, &model));
    let dp = model_defining_pair(&model)?;
    let d = &config.dynamics;
    let x0 = d.x0.clone().unwrap_or_else(|| vec![0.0; model.grid().ndim()]);
    let lyapunov = lyapunov_cocycle(&model, &dp, &x0, d.horizon, d.dt)?;
    let c = d.reparametrization;
    let scaled = Arc::new(model.reparametrized(c)?);
    let scaled_dp = model_defining_pair(&scaled)?;
    let reparametrized = lyapunov_cocycle(&scaled, &scaled_dp, &x0, d.horizon, d.dt)?;
    timer.lap(&mut doc, "lyapunov");
    let volume = volume_preservation_test(&model, &dp, d.orbits, d.horizon, d.dt)?;
    timer.lap(&mut doc, "volume");
    let consistency = (lyapunov.lambda_u - lyapunov.birkhoff_u)
        .abs()
        .max((lyapunov.lambda_s - lyapunov.birkhoff_s).abs());
    if consistency > 1e-6 {
        doc.failures.push(format!("lyapunov vs birkhoff {consistency:e}"));
    }
    let covariance = (reparametrized.lambda_u - c * lyapunov.lambda_u)
        .abs()
        .max((reparametrized.lambda_s - c * lyapunov.lambda_s).abs());
    if covariance > 1e-6 * c.max(1.0) {
        doc.failures.push(format!("reparametrization covariance {covariance:e}"));
    }
    let volume_preserving_model = dp.kind().volume_preserving;
    if volume_preserving_model && volume.max_abs_average > 1e-10 {
        doc.failures.push(format!("volume average {:e}", volume.max_abs_average));
    }
    doc.dynamics = Some(DynamicsSection {
        x0,
        lyapunov,
        reparametrization: c,
        reparametrized,
        volume_preserving_model,
        volume,
    });
    Ok(doc.finish())
}

pub fn cmd_selftest(config: &RunConfig) -> Result<ReportDocument> {
    let mut doc = ReportDocument::new("selftest", config);
    let mut timer = Timer::new(config);
    let rep = run_selftest(config.grid.min(64), config.scheme)?;
    timer.lap(&mut doc, "selftest");
    for c in rep.checks.iter().filter(|c| !c.pass) {
        doc.failures.push(format!("{} on {}: {:e}", c.name, c.model, c.value));
    }
    doc.selftest = Some(rep);
    Ok(doc.finish())
}

/// Named fields of a pair: form coefficients followed by the invariants.
pub fn pair_fields(pair: &ContactFormPair) -> Result<Vec<(String, ScalarField)>> {
    let mut out = Vec::new();
    for (name, form) in [("alpha_minus", &pair.alpha_minus), ("alpha_plus", &pair.alpha_plus)] {
        for (label, c) in COFRAME_LABELS.iter().zip(&form.c) {
            out.push((format!("{name}.{label}"), c.clone()));
        }
    }
    out.push(("dvol".into(), pair.dvol.c.clone()));
    let inv = pair_invariants(pair)?;
    for (name, f) in inv.fields() {
        out.push((name.to_string(), f.clone()));
    }
    Ok(out)
}

/// CSV with header `<axis names>, coefficient, value`, one row per field and grid point.
pub fn write_fields_csv<W: Write>(out: W, fields: &[(String, ScalarField)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| AlvError::Io(e.to_string());
    let Some((_, first)) = fields.first() else {
        return Ok(());
    };
    let grid = first.grid().clone();
    let mut header: Vec<String> = grid.axes().iter().map(|a| a.name.clone()).collect();
    header.push("coefficient".into());
    header.push("value".into());
    w.write_record(&header).map_err(io)?;
    for (name, f) in fields {
        for i in 0..grid.len() {
            let mut row: Vec<String> = grid.coords(i).iter().map(|c| format!("{c:?}")).collect();
            row.push(name.clone());
            row.push(format!("{:?}", f.at(i)));
            w.write_record(&row).map_err(io)?;
        }
    }
    w.flush()?;
    Ok(())
}
