use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use voi_core::analysis::{affine_rank, confident_bounds_with_pitch, for_each_grid_point, grid_subdivisions};
use voi_core::insurance::{action_boundary_table, insurance_action_set, value_curve_table};
use voi_core::model::{fmt_float, load_problem, to_json_string, write_csv, CsvTable, ProblemFile};
use voi_core::{
    classification_grid, classify_prior_with, flexible_bounds, revealed_beliefs,
    undecided_bounds, voi, Action, ActionSet, Belief, BeliefPolytope, BoundCertificate,
    ConvexBody, Error, GridConfig, InformationStructure, InsuranceBody, Prior,
    QuadraticScoringBody, Quadrature, Regime, Result,
};

use crate::config::{BodyKind, Format, RunConfig};

/// Output destination plus the header shared by every artifact.
pub struct Emitter<'a> {
    pub command: &'static str,
    pub config: &'a RunConfig,
}

impl Emitter<'_> {
    fn metadata(&self) -> Value {
        json!({
            "tool": "voi",
            "version": voi_core::VERSION,
            "command": self.command,
            "config": self.config,
            "tolerances": {
                "feasibility": voi_core::tol::FEAS,
                "bayes": voi_core::tol::BAYES,
                "support": voi_core::tol::EPS_SUPPORT,
                "certificate": "1e-7 * (1 + |voi|)",
            },
        })
    }

    fn json<T: Serialize>(&self, result: &T) -> Result<String> {
        let mut text = to_json_string(&json!({ "metadata": self.metadata(), "result": result }))?;
        text.push('\n');
        Ok(text)
    }

    fn csv(&self, table: &mut CsvTable) -> Result<String> {
        let own = std::mem::take(&mut table.metadata);
        table
            .meta("tool", "voi")
            .meta("version", voi_core::VERSION)
            .meta("command", self.command)
            .meta("config", serde_json::to_string(self.config).map_err(io_error)?)
            .meta("tol_feasibility", fmt_float(voi_core::tol::FEAS))
            .meta("tol_bayes", fmt_float(voi_core::tol::BAYES));
        table.metadata.extend(own);
        let mut buf = Vec::new();
        write_csv(&mut buf, table)?;
        String::from_utf8(buf).map_err(io_error)
    }

    fn write(&self, path: Option<&Path>, text: &str) -> Result<()> {
        match path {
            Some(p) => fs::write(p, text).map_err(Error::from),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    fn emit<T: Serialize>(&self, default: Format, result: &T, table: Option<CsvTable>) -> Result<()> {
        let text = match (self.config.format.unwrap_or(default), table) {
            (Format::Csv, Some(mut t)) => self.csv(&mut t)?,
            (Format::Csv, None) => {
                return Err(Error::InvalidInput(format!(
                    "{} has no CSV form; use --format json",
                    self.command
                )))
            }
            (Format::Json, _) => self.json(result)?,
        };
        self.write(self.config.output.as_deref(), &text)
    }
}

fn io_error(e: impl std::fmt::Display) -> Error {
    Error::Io(e.to_string())
}

enum AnalysisBody {
    Polytope(ActionSet),
    Quadratic(QuadraticScoringBody),
    Insurance(InsuranceBody),
}

impl AnalysisBody {
    fn inner(&self) -> &dyn ConvexBody {
        match self {
            Self::Polytope(b) => b,
            Self::Quadratic(b) => b,
            Self::Insurance(b) => b,
        }
    }
}

impl ConvexBody for AnalysisBody {
    fn dim(&self) -> usize {
        self.inner().dim()
    }

    fn value(&self, p: &Belief) -> f64 {
        self.inner().value(p)
    }

    fn optimal_face(&self, p: &Belief) -> Vec<Action> {
        self.inner().optimal_face(p)
    }

    fn ball_in_confidence_set(&self, p: &Belief, radius: f64) -> Result<bool> {
        self.inner().ball_in_confidence_set(p, radius)
    }

    fn confidence_set(&self, p: &Belief) -> Option<BeliefPolytope> {
        self.inner().confidence_set(p)
    }
}

/// The body under analysis together with what was loaded alongside it.
struct Loaded {
    body: AnalysisBody,
    file: Option<ProblemFile>,
}

fn load(config: &RunConfig) -> Result<Loaded> {
    let params = config.insurance;
    let (body, file) = match config.body {
        BodyKind::Problem => {
            let path = config.input.as_ref().ok_or_else(|| {
                Error::InvalidInput("--input is required for --body problem".into())
            })?;
            let file = load_problem(path)?;
            (AnalysisBody::Polytope(file.problem.to_action_set()?), Some(file))
        }
        BodyKind::Quadratic => (
            AnalysisBody::Quadratic(QuadraticScoringBody::new(config.states)?),
            None,
        ),
        BodyKind::InsuranceGrid => (
            AnalysisBody::Polytope(insurance_action_set(&params, &params.default_indemnity_grid())?),
            None,
        ),
        BodyKind::Insurance => (AnalysisBody::Insurance(InsuranceBody::new(params)?), None),
    };
    Ok(Loaded { body, file })
}

fn prior_of(config: &RunConfig, loaded: &Loaded) -> Result<Prior> {
    let prior = match (&config.prior, &loaded.file) {
        (Some(p), _) => Prior::from_probs(p.clone())?,
        (None, Some(f)) => f.prior.clone(),
        (None, None) => {
            return Err(Error::InvalidInput("a prior is required (--prior)".into()));
        }
    };
    if prior.dim() != loaded.body.dim() {
        return Err(Error::DimensionMismatch {
            expected: loaded.body.dim(),
            found: prior.dim(),
        });
    }
    Ok(prior)
}

fn information_of(config: &RunConfig, loaded: &Loaded, prior: &Prior) -> Result<InformationStructure> {
    if let Some(step) = config.split {
        return InformationStructure::symmetric_split(prior, step);
    }
    match loaded.file.as_ref().and_then(|f| f.information.clone()) {
        Some(info) => Ok(info),
        None => Err(Error::InvalidInput(
            "no information structure: add one to the input or pass --split".into(),
        )),
    }
}

/// Beliefs where the optimal face of a two-state polytope changes.
fn two_state_kinks(set: &ActionSet) -> Result<Vec<f64>> {
    let mut kinks = Vec::new();
    for a in set.vertices() {
        if let Some((lo, hi)) = revealed_beliefs(set, a)?.interval()? {
            for x in [lo, hi] {
                if x > 0.0 && x < 1.0 {
                    kinks.push(x);
                }
            }
        }
    }
    kinks.sort_by(f64::total_cmp);
    kinks.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
    Ok(kinks)
}

#[derive(Serialize)]
struct ValueRow {
    p: Vec<f64>,
    value: f64,
    face_dim: usize,
}

#[derive(Serialize)]
struct ValueReport {
    rows: Vec<ValueRow>,
    kinks: Vec<Vec<f64>>,
}

pub fn value(e: &Emitter) -> Result<()> {
    let loaded = load(e.config)?;
    let body = &loaded.body;
    let k = body.dim();
    let pitch = e.config.grid_pitch.unwrap_or(if k == 2 { 5e-4 } else { 0.02 });
    let n = grid_subdivisions(pitch)?;
    let mut points: Vec<Vec<f64>> = Vec::new();
    for_each_grid_point(k, n, |p| points.push(p.to_vec()));

    let exact_kinks = match body {
        AnalysisBody::Polytope(set) if k == 2 => Some(two_state_kinks(set)?),
        _ => None,
    };
    if let Some(kinks) = &exact_kinks {
        points.extend(kinks.iter().map(|x| vec![1.0 - x, *x]));
    }
    if k == 2 {
        points.sort_by(|a, b| a[1].total_cmp(&b[1]));
        points.dedup_by(|a, b| (a[1] - b[1]).abs() <= 1e-12);
    }

    let mut rows = Vec::with_capacity(points.len());
    for p in points {
        let belief = Belief::new(p)?;
        let face = body.optimal_face(&belief);
        rows.push(ValueRow {
            value: body.value(&belief),
            face_dim: affine_rank(&face),
            p: belief.probs().to_vec(),
        });
    }
    let kinks: Vec<Vec<f64>> = match exact_kinks {
        Some(ks) => ks.into_iter().map(|x| vec![1.0 - x, x]).collect(),
        None => rows.iter().filter(|r| r.face_dim >= 1).map(|r| r.p.clone()).collect(),
    };

    let names: Vec<String> = (1..=k).map(|i| format!("p_{i}")).collect();
    let mut header: Vec<&str> = names.iter().map(String::as_str).collect();
    header.extend(["value", "face_dim"]);
    let mut table = CsvTable::new(&header);
    let kink_text: Vec<String> = kinks
        .iter()
        .map(|p| p.iter().map(|x| fmt_float(*x)).collect::<Vec<_>>().join(" "))
        .collect();
    table.meta("kinks", kink_text.join(";"));
    for r in &rows {
        let mut cells: Vec<String> = r.p.iter().map(|x| fmt_float(*x)).collect();
        cells.push(fmt_float(r.value));
        cells.push(r.face_dim.to_string());
        table.push(cells);
    }
    e.emit(Format::Csv, &ValueReport { rows, kinks }, Some(table))
}

#[derive(Serialize)]
struct VoiReport {
    prior: Vec<f64>,
    voi: f64,
    regime: Regime,
    #[serde(skip_serializing_if = "Option::is_none")]
    certificates: Option<Vec<BoundCertificate>>,
    warnings: Vec<String>,
}

fn certificates(
    e: &Emitter,
    body: &AnalysisBody,
    prior: &Prior,
    info: &InformationStructure,
    warnings: &mut Vec<String>,
) -> Result<Vec<BoundCertificate>> {
    let mut out = Vec::new();
    let mut keep = |r: Result<BoundCertificate>| -> Result<()> {
        match r {
            Ok(c) => {
                if !c.holds() {
                    warnings.push(format!("{:?} certificate does not hold", c.kind));
                }
                out.push(c);
                Ok(())
            }
            Err(err @ (Error::NotUndecided | Error::NotFlexible(_))) => {
                warnings.push(format!("regime mismatch: {err}"));
                Ok(())
            }
            Err(err) => Err(err),
        }
    };
    match body {
        AnalysisBody::Polytope(set) => {
            keep(confident_bounds_with_pitch(
                set,
                prior,
                info,
                e.config.epsilon,
                e.config.grid_pitch,
            ))?;
            keep(undecided_bounds(set, prior, info))?;
        }
        smooth => keep(flexible_bounds(smooth, prior, info, e.config.grid_pitch))?,
    }
    Ok(out)
}

fn voi_report(e: &Emitter, with_bounds: bool) -> Result<()> {
    let loaded = load(e.config)?;
    let prior = prior_of(e.config, &loaded)?;
    let info = information_of(e.config, &loaded, &prior)?;
    let body = &loaded.body;
    let value = voi(body, &prior, &info)?;
    let regime = classify_prior_with(body, &prior, &e.config.regime)?.regime;
    let mut warnings = Vec::new();
    let certificates = if with_bounds {
        Some(certificates(e, body, &prior, &info, &mut warnings)?)
    } else {
        None
    };
    let report = VoiReport {
        prior: prior.probs().to_vec(),
        voi: value,
        regime,
        certificates,
        warnings,
    };
    let mut table = CsvTable::new(&["kind", "lower", "voi", "upper", "holds"]);
    match &report.certificates {
        Some(cs) => {
            for c in cs {
                table.push(vec![
                    format!("{:?}", c.kind),
                    fmt_float(c.lower),
                    fmt_float(c.voi),
                    fmt_float(c.upper),
                    c.holds().to_string(),
                ]);
            }
        }
        None => table.push(vec!["none".into(), String::new(), fmt_float(value), String::new(), String::new()]),
    }
    table.meta("regime", format!("{regime:?}"));
    e.emit(Format::Json, &report, Some(table))
}

pub fn voi_cmd(e: &Emitter) -> Result<()> {
    voi_report(e, false)
}

pub fn bounds(e: &Emitter) -> Result<()> {
    voi_report(e, true)
}

#[derive(Serialize)]
struct ConfidenceReport {
    prior: Vec<f64>,
    halfspaces: Vec<Value>,
    interval: Option<(f64, f64)>,
}

pub fn confidence(e: &Emitter) -> Result<()> {
    let loaded = load(e.config)?;
    let prior = prior_of(e.config, &loaded)?;
    let poly = loaded.body.confidence_set(prior.belief()).ok_or_else(|| {
        Error::InvalidInput("the body has no polyhedral confidence set at this prior".into())
    })?;
    let interval = if poly.dim() == 2 { poly.interval()? } else { None };
    let halfspaces = poly
        .halfspaces()
        .iter()
        .map(|h| json!({ "normal": h.normal.coords(), "offset": h.offset }))
        .collect();
    let k = poly.dim();
    let names: Vec<String> = (1..=k).map(|i| format!("n_{i}")).collect();
    let mut header: Vec<&str> = names.iter().map(String::as_str).collect();
    header.push("offset");
    let mut table = CsvTable::new(&header);
    if let Some((lo, hi)) = interval {
        table.meta("interval", format!("{} {}", fmt_float(lo), fmt_float(hi)));
    }
    for h in poly.halfspaces() {
        let mut row = h.normal.coords().to_vec();
        row.push(h.offset);
        table.push_floats(&row);
    }
    let report = ConfidenceReport {
        prior: prior.probs().to_vec(),
        halfspaces,
        interval,
    };
    e.emit(Format::Json, &report, Some(table))
}

pub fn classify(e: &Emitter) -> Result<()> {
    let loaded = load(e.config)?;
    let prior = prior_of(e.config, &loaded)?;
    let report = classify_prior_with(&loaded.body, &prior, &e.config.regime)?;
    e.emit(Format::Json, &report, None)
}

/// Slope of `ln VoI(eps)` over `eps = 1e-2 .. 1e-5` at `q`, keeping only
/// steps that fit inside the unit interval.
fn slope_at(params: &voi_core::InsuranceParams, q: f64, warnings: &mut Vec<String>) -> Option<f64> {
    let eps: Vec<f64> = [1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 3e-5, 1e-5]
        .into_iter()
        .filter(|e| *e < q.min(1.0 - q))
        .collect();
    if eps.len() < 2 {
        warnings.push(format!("no admissible epsilon at q = {q:e}"));
        return None;
    }
    match params.voi_slope(q, &eps) {
        Ok(s) => s,
        Err(err) => {
            warnings.push(format!("slope at q = {q:e}: {err}"));
            None
        }
    }
}

#[derive(Serialize)]
struct InsuranceReport {
    params: voi_core::InsuranceParams,
    threshold_log_odds: f64,
    threshold: f64,
    hat_log_odds: f64,
    slope_at_threshold: Option<f64>,
    slope_above: Option<f64>,
    voi_below: Option<f64>,
    files: Vec<String>,
    warnings: Vec<String>,
}

pub fn insurance(e: &Emitter) -> Result<()> {
    let params = e.config.insurance;
    let t = params.threshold()?;
    let mut warnings = Vec::new();
    let slope_at_threshold = slope_at(&params, t.prob, &mut warnings);
    let slope_above = slope_at(&params, t.prob + 0.1, &mut warnings);
    let below = t.prob - 0.05;
    let voi_below = if below > 1e-3 {
        Some(params.voi_epsilon(below, 1e-3)?)
    } else {
        warnings.push(format!("threshold {:e} leaves no room below it", t.prob));
        None
    };

    let mut files = Vec::new();
    if let Some(dir) = &e.config.output {
        fs::create_dir_all(dir)?;
        let pitch = e.config.grid_pitch.unwrap_or(5e-4);
        let points = grid_subdivisions(pitch)? + 1;
        let mut curve = value_curve_table(&params, points)?;
        let mut boundary = action_boundary_table(&params, &params.default_indemnity_grid())?;
        for (name, table) in [("value_curve.csv", &mut curve), ("action_boundary.csv", &mut boundary)] {
            e.write(Some(&dir.join(name)), &e.csv(table)?)?;
            files.push(name.to_string());
        }
    }
    let report = InsuranceReport {
        params,
        threshold_log_odds: t.log_odds,
        threshold: t.prob,
        hat_log_odds: params.hat_log_odds(),
        slope_at_threshold,
        slope_above,
        voi_below,
        files,
        warnings,
    };
    let text = e.json(&report)?;
    match &e.config.output {
        Some(dir) => e.write(Some(&dir.join("summary.json")), &text),
        None => e.write(None, &text),
    }
}

#[derive(Serialize)]
struct GridReport {
    grid: voi_core::ClassificationGrid,
    refined: Vec<Vec<&'static str>>,
    stable: bool,
}

pub fn marginal_grid(e: &Emitter) -> Result<()> {
    let quadrature = Quadrature {
        nodes: e.config.nodes,
        n_max: e.config.n_max,
    };
    let config = GridConfig {
        quadrature,
        band: e.config.band,
        ..GridConfig::default()
    };
    let grid = classification_grid(&config)?;
    let refined_config = GridConfig {
        quadrature: Quadrature {
            nodes: 2 * quadrature.nodes,
            n_max: quadrature.n_max + 1,
        },
        ..config
    };
    let refined: Vec<Vec<&'static str>> = classification_grid(&refined_config)?
        .rows
        .iter()
        .map(|r| r.symbols())
        .collect();
    let stable = grid.rows.iter().zip(&refined).all(|(r, s)| &r.symbols() == s);
    let mut table = grid.to_table();
    table.meta("stable_under_refinement", stable);
    e.emit(Format::Csv, &GridReport { grid, refined, stable }, Some(table))
}
