//! Batch command surface: JSON input, configuration merging, dispatch and
//! report assembly.
//!
//! Reports are pretty-printed JSON with sorted keys. They embed the effective
//! configuration without the worker count or output path, so the same input
//! and parameters always produce the same bytes.

use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::egcheck::{eg_report, EgError, Verdict};
use crate::exact::{format_rat, parse_rat, ParseRatError, Rat, RatInput, Scale};
use crate::geometry::{covering_radius, defect_profile, DefectSampler, FiniteMetricSpace, GeometryError, SpaceSpec};
use crate::homology::{betti_numbers, Field, DEFAULT_MAX_DIM};
use crate::morse::{morse_levels, verify_descent, DescentVerdict, MorseError, DEFAULT_COMPLEX_BUDGET};
use crate::rips::{enumerate_rips_vertices, order_complex_bounded, rips_flag_complex, MorseValue, RipsError};
use crate::symmetry::{GroupAction, PermutationGroup, SymmetryError, DEFAULT_GROUP_CAP};
use crate::zeta::{link_criterion_sweep, threshold_min, SigmaModel, SweepOptions, ThresholdInput, ZetaError};

/// Vertex lists longer than this are summarized by counts only.
const LISTING_LIMIT: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    Metric,
    SigmaProfile,
    Threshold,
    Rips,
    MorseDescent,
    LinkCriterion,
    EgCheck,
    Sweep,
}

impl CommandName {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandName::Metric => "metric",
            CommandName::SigmaProfile => "sigma-profile",
            CommandName::Threshold => "threshold",
            CommandName::Rips => "rips",
            CommandName::MorseDescent => "morse-descent",
            CommandName::LinkCriterion => "link-criterion",
            CommandName::EgCheck => "eg-check",
            CommandName::Sweep => "sweep",
        }
    }
}

/// Command-line configuration. Flags override the `params` block of the input.
#[derive(Debug, Clone, Parser)]
#[command(name = "vrmorse", version, about = "Morse-theoretic checks on Vietoris-Rips posets")]
pub struct RunConfig {
    pub command: CommandName,
    #[arg(long)]
    pub input: PathBuf,
    /// Scale as an integer, `p/q` or `inf`.
    #[arg(long)]
    pub t: Option<Scale>,
    #[arg(long = "t-max")]
    pub t_max: Option<Scale>,
    #[arg(long = "card-cap")]
    pub card_cap: Option<usize>,
    #[arg(long = "max-dim")]
    pub max_dim: Option<usize>,
    #[arg(long)]
    pub field: Option<Field>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Constant hyperbolicity defect for the `threshold` command.
    #[arg(long, value_parser = parse_rat_arg)]
    pub delta: Option<Rat>,
    /// Exit 1 when a link-criterion sweep finds failures.
    #[arg(long)]
    pub assert: bool,
}

fn parse_rat_arg(s: &str) -> Result<Rat, ParseRatError> {
    parse_rat(s)
}

impl RunConfig {
    pub fn new(command: CommandName, input: impl Into<PathBuf>) -> Self {
        RunConfig {
            command,
            input: input.into(),
            t: None,
            t_max: None,
            card_cap: None,
            max_dim: None,
            field: None,
            seed: None,
            jobs: 1,
            out: None,
            delta: None,
            assert: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("command `{command}` requires `{field}`")]
    MissingField { command: &'static str, field: &'static str },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
    #[error(transparent)]
    Rips(#[from] RipsError),
    #[error(transparent)]
    Morse(#[from] MorseError),
    #[error(transparent)]
    Zeta(#[from] ZetaError),
    #[error(transparent)]
    Eg(#[from] EgError),
    #[error("homology: {0}")]
    Homology(#[from] crate::homology::HomologyError),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineInput {
    pub space: SpaceSpec,
    #[serde(default)]
    pub orbit: Option<Vec<usize>>,
    #[serde(default)]
    pub action: Option<ActionSpec>,
    #[serde(default)]
    pub params: Params,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionSpec {
    pub generators: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub t: Option<Scale>,
    pub t_max: Option<Scale>,
    pub card_cap: Option<usize>,
    pub max_dim: Option<usize>,
    pub field: Option<Field>,
    pub seed: Option<u64>,
    pub delta: Option<RatInput>,
}

/// Parameters after merging flags over the input's `params`.
#[derive(Debug, Clone, Serialize)]
pub struct EffectiveConfig {
    pub command: CommandName,
    pub t: Option<Scale>,
    pub t_max: Option<Scale>,
    pub card_cap: Option<usize>,
    pub max_dim: usize,
    pub field: Field,
    pub seed: u64,
    #[serde(serialize_with = "serialize_opt_rat")]
    pub delta: Option<Rat>,
    pub assert: bool,
}

fn serialize_opt_rat<S: serde::Serializer>(r: &Option<Rat>, s: S) -> Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&format_rat(r)),
        None => s.serialize_none(),
    }
}

impl EffectiveConfig {
    fn merge(config: &RunConfig, params: &Params) -> Self {
        EffectiveConfig {
            command: config.command,
            t: config.t.or(params.t),
            t_max: config.t_max.or(params.t_max),
            card_cap: config.card_cap.or(params.card_cap),
            max_dim: config.max_dim.or(params.max_dim).unwrap_or(DEFAULT_MAX_DIM),
            field: config.field.or(params.field).unwrap_or_default(),
            seed: config.seed.or(params.seed).unwrap_or(0),
            delta: config.delta.or(params.delta.map(|d| d.0)),
            assert: config.assert,
        }
    }

    fn require_t(&self) -> Result<Scale, CliError> {
        self.t.ok_or(CliError::MissingField { command: self.command.as_str(), field: "t" })
    }

    fn require_t_max(&self) -> Result<Scale, CliError> {
        self.t_max.ok_or(CliError::MissingField { command: self.command.as_str(), field: "t_max" })
    }
}

/// A finished run: the report and the process exit code.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: Value,
    pub exit_code: i32,
}

impl RunOutcome {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.report).expect("reports serialize");
        s.push('\n');
        s
    }
}

struct Loaded {
    space: FiniteMetricSpace,
    action: Option<GroupAction>,
    params: Params,
}

fn load(text: &str) -> Result<Loaded, CliError> {
    let input: EngineInput = serde_json::from_str(text).map_err(|e| CliError::Schema(e.to_string()))?;
    let mut space = FiniteMetricSpace::from_spec(&input.space)?;
    if let Some(orbit) = input.orbit {
        space = space.with_orbit(orbit)?;
    }
    let action = match input.action {
        None => None,
        Some(spec) => {
            let group = PermutationGroup::close(space.n(), &spec.generators, DEFAULT_GROUP_CAP)?;
            Some(GroupAction::new(group, &space)?)
        }
    };
    Ok(Loaded { space, action, params: input.params })
}

/// Reads the input file named in `config` and runs the command.
pub fn run(config: &RunConfig) -> Result<RunOutcome, CliError> {
    let text = std::fs::read_to_string(&config.input)
        .map_err(|e| CliError::Io { path: config.input.display().to_string(), message: e.to_string() })?;
    run_on_input(&text, config)
}

/// Runs the command on input JSON given as text.
pub fn run_on_input(text: &str, config: &RunConfig) -> Result<RunOutcome, CliError> {
    let loaded = load(text)?;
    let effective = EffectiveConfig::merge(config, &loaded.params);
    crate::with_jobs(config.jobs, || dispatch(&loaded, &effective))
}

struct CommandResult {
    passed: bool,
    exit_code: i32,
    approximations: Value,
    result: Value,
}

fn dispatch(loaded: &Loaded, cfg: &EffectiveConfig) -> Result<RunOutcome, CliError> {
    let out = match cfg.command {
        CommandName::Metric => cmd_metric(loaded)?,
        CommandName::SigmaProfile => cmd_sigma_profile(loaded, cfg)?,
        CommandName::Threshold => cmd_threshold(loaded, cfg)?,
        CommandName::Rips => cmd_rips(loaded, cfg)?,
        CommandName::MorseDescent => cmd_morse_descent(loaded, cfg)?,
        CommandName::LinkCriterion => cmd_link_criterion(loaded, cfg)?,
        CommandName::EgCheck => cmd_eg_check(loaded, cfg)?,
        CommandName::Sweep => cmd_sweep(loaded, cfg)?,
    };
    let report = json!({
        "engine": { "name": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION") },
        "command": cfg.command.as_str(),
        "config": cfg,
        "model": {
            "sublevels": "full subcomplexes spanned by the vertices at or below a Morse value",
            "midpoints": "set-valued: the union of all near-midpoint geodesic vertices of every diameter pair",
            "fixed_points": "order complexes of fixed subposets",
        },
        "approximations": out.approximations,
        "passed": out.passed,
        "result": out.result,
    });
    Ok(RunOutcome { report, exit_code: out.exit_code })
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn exact(space: &FiniteMetricSpace, units: i64) -> String {
    format_rat(&space.to_rat(units))
}

fn orbit_or_all(space: &FiniteMetricSpace) -> Vec<usize> {
    space.orbit().map(<[usize]>::to_vec).unwrap_or_else(|| (0..space.n()).collect())
}

fn cmd_metric(loaded: &Loaded) -> Result<CommandResult, CliError> {
    let space = &loaded.space;
    let n = space.n();
    let matrix: Vec<Vec<String>> = (0..n).map(|i| (0..n).map(|j| exact(space, space.dist(i, j))).collect()).collect();
    let r = covering_radius(space, &orbit_or_all(space))?;
    let result = json!({
        "n": n,
        "source": if space.is_graph() { "graph" } else { "matrix" },
        "diameter": exact(space, space.diameter()),
        "realized_distances": space.realized_distances().iter().map(|&d| exact(space, d)).collect::<Vec<_>>(),
        "distances": matrix,
        "orbit": space.orbit(),
        "covering_radius": format_rat(&r),
        "group_order": loaded.action.as_ref().map(|a| a.group().order()),
        "isometric": loaded.action.as_ref().map(|_| true),
    });
    Ok(CommandResult { passed: true, exit_code: 0, approximations: json!({}), result })
}

fn cmd_sigma_profile(loaded: &Loaded, cfg: &EffectiveConfig) -> Result<CommandResult, CliError> {
    let space = &loaded.space;
    let sampler = DefectSampler { seed: cfg.seed, ..Default::default() };
    let profile = defect_profile(space, &sampler)?;
    let r = covering_radius(space, &orbit_or_all(space))?;
    let threshold = threshold_min(&ThresholdInput { r: rat_f64(&r), sigma: SigmaModel::from_profile(&profile) });
    let result = json!({
        "label": profile.label,
        "max_defect": profile.max_defect(),
        "triangles_examined": profile.triangles_examined,
        "max_by_scale": profile.max_by_scale,
        "envelope": profile.envelope(),
        "samples": profile.samples,
        "covering_radius": format_rat(&r),
        "threshold": match threshold {
            Ok(t) => to_value(&t),
            Err(e) => json!({ "error": e.to_string() }),
        },
    });
    Ok(CommandResult {
        passed: true,
        exit_code: 0,
        approximations: json!({
            "triangle_sampling_capped": profile.triangle_sampling_capped,
            "geodesic_cap_hit": profile.geodesic_cap_hit,
            "max_triangles": sampler.max_triangles,
            "geodesics_per_side": sampler.geodesics_per_side,
        }),
        result,
    })
}

fn rat_f64(r: &Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn cmd_threshold(loaded: &Loaded, cfg: &EffectiveConfig) -> Result<CommandResult, CliError> {
    let space = &loaded.space;
    let r = covering_radius(space, &orbit_or_all(space))?;
    let (sigma, approximations) = match cfg.delta {
        Some(d) => (SigmaModel::Constant(rat_f64(&d)), json!({})),
        None => {
            let sampler = DefectSampler { seed: cfg.seed, ..Default::default() };
            let profile = defect_profile(space, &sampler)?;
            let approx = json!({
                "sigma": "empirical envelope",
                "triangle_sampling_capped": profile.triangle_sampling_capped,
                "geodesic_cap_hit": profile.geodesic_cap_hit,
            });
            (SigmaModel::from_profile(&profile), approx)
        }
    };
    let res = threshold_min(&ThresholdInput { r: rat_f64(&r), sigma })?;
    let result = json!({
        "covering_radius": format_rat(&r),
        "delta": cfg.delta.map(|d| format_rat(&d)),
        "threshold": res,
        "slope_per_delta": 2.0 / (2.0 - 3f64.sqrt()),
    });
    Ok(CommandResult { passed: true, exit_code: 0, approximations, result })
}

fn cmd_rips(loaded: &Loaded, cfg: &EffectiveConfig) -> Result<CommandResult, CliError> {
    let space = &loaded.space;
    let t = cfg.require_t()?;
    let poset = enumerate_rips_vertices(space, t, cfg.card_cap)?;
    let levels = morse_levels(&poset.vertices);
    let mut by_card = std::collections::BTreeMap::<usize, usize>::new();
    for v in &poset.vertices {
        *by_card.entry(v.card).or_default() += 1;
    }
    let order_betti = match order_complex_bounded(&poset.sets(), DEFAULT_COMPLEX_BUDGET) {
        Some(oc) if !poset.is_capped() => Some(betti_numbers(&oc.complex, cfg.field, cfg.max_dim)?),
        _ => None,
    };
    let flag_betti = match rips_flag_complex(space, t) {
        Ok(c) => Some(betti_numbers(&c, cfg.field, cfg.max_dim)?),
        Err(RipsError::TooLarge(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let agree = match (&order_betti, &flag_betti) {
        (Some(a), Some(b)) => Some(a.same_numbers(b)),
        _ => None,
    };
    let listing = (poset.len() <= LISTING_LIMIT).then(|| poset.sets());
    let result = json!({
        "t": t,
        "vertices": poset.len(),
        "by_cardinality": by_card,
        "levels": levels.levels.iter().map(|l| l.label(space)).collect::<Vec<_>>(),
        "order_complex_betti": order_betti,
        "flag_complex_betti": flag_betti,
        "models_agree": agree,
        "listing": listing,
    });
    Ok(CommandResult {
        passed: agree != Some(false),
        exit_code: if agree == Some(false) { 1 } else { 0 },
        approximations: json!({ "card_cap": poset.card_cap, "listing_truncated": poset.len() > LISTING_LIMIT }),
        result,
    })
}

fn level_for(space: &FiniteMetricSpace, t: &Scale) -> MorseValue {
    match t.numerator_bound(space.denom()) {
        None => MorseValue::ceiling_of_diam(space.diameter()),
        Some(b) if b < 0 => MorseValue::new(-1, 1),
        Some(b) => MorseValue::ceiling_of_diam(b.min(space.diameter())),
    }
}

fn cmd_morse_descent(loaded: &Loaded, cfg: &EffectiveConfig) -> Result<CommandResult, CliError> {
    let space = &loaded.space;
    let (t, t_max) = (cfg.require_t()?, cfg.require_t_max()?);
    let ambient = enumerate_rips_vertices(space, t_max, cfg.card_cap)?;
    ambient.require_uncapped()?;
    let (from, to) = (level_for(space, &t), level_for(space, &t_max));
    let report = if from < to {
        Some(verify_descent(space, loaded.action.as_ref(), &ambient, from, to, cfg.max_dim, cfg.field)?)
    } else {
        None
    };
    let failed = report.as_ref().is_some_and(|r| !r.passed());
    let result = json!({
        "window": { "from": from.label(space), "to": to.label(space) },
        "descent": report,
        "verdict": report.as_ref().map_or(DescentVerdict::Verified, |r| r.verdict),
    });
    Ok(CommandResult {
        passed: !failed,
        exit_code: i32::from(failed),
        approximations: json!({ "card_cap": null }),
        result,
    })
}

fn cmd_link_criterion(loaded: &Loaded, cfg: &EffectiveConfig) -> Result<CommandResult, CliError> {
    let t = cfg.require_t()?;
    if let Some(cap) = cfg.card_cap {
        return Err(RipsError::CapViolation { cap }.into());
    }
    let report =
        link_criterion_sweep(&loaded.space, loaded.action.as_ref(), &t, &SweepOptions { region: None, certify: true })?;
    let failed = cfg.assert && !report.all_pass;
    Ok(CommandResult {
        passed: report.all_pass,
        exit_code: i32::from(failed),
        approximations: json!({ "card_cap": null, "region_restricted": report.region_restricted }),
        result: to_value(&report),
    })
}

fn trivial_action(space: &FiniteMetricSpace) -> GroupAction {
    GroupAction::trivial(space.n())
}

fn cmd_eg_check(loaded: &Loaded, cfg: &EffectiveConfig) -> Result<CommandResult, CliError> {
    let space = &loaded.space;
    let t = cfg.require_t()?;
    if let Some(cap) = cfg.card_cap {
        return Err(RipsError::CapViolation { cap }.into());
    }
    let action = loaded.action.clone().unwrap_or_else(|| trivial_action(space));
    let report = eg_report(space, &action, &t, cfg.max_dim, cfg.field)?;
    let passed = report.passed();
    Ok(CommandResult {
        passed,
        exit_code: i32::from(!passed),
        approximations: json!({ "card_cap": null, "trivial_action_assumed": loaded.action.is_none() }),
        result: to_value(&report),
    })
}

fn cmd_sweep(loaded: &Loaded, cfg: &EffectiveConfig) -> Result<CommandResult, CliError> {
    let space = &loaded.space;
    let t_max = cfg.require_t_max()?;
    if let Some(cap) = cfg.card_cap {
        return Err(RipsError::CapViolation { cap }.into());
    }
    let bound = t_max.numerator_bound(space.denom());
    let mut scales: Vec<i64> = vec![0];
    scales.extend(space.realized_distances());
    scales.retain(|&d| bound.is_none_or(|b| d <= b));
    let action = loaded.action.clone().unwrap_or_else(|| trivial_action(space));
    let mut rows = Vec::new();
    let mut all_pass = true;
    for &d in &scales {
        let t = Scale::Finite(space.to_rat(d));
        let link =
            link_criterion_sweep(space, loaded.action.as_ref(), &t, &SweepOptions { region: None, certify: true })?;
        let eg = eg_report(space, &action, &t, cfg.max_dim, cfg.field)?;
        all_pass &= link.all_pass && eg.passed();
        rows.push(json!({
            "t": t,
            "link_criterion": {
                "examined": link.examined,
                "passed": link.passed,
                "all_pass": link.all_pass,
                "certified": link.certificates.as_ref().map(|c| c.verified),
                "first_failure": link.failures.first(),
            },
            "eg_verdict": eg.verdict,
            "eg_failing_classes": eg.classes.iter().filter(|c| c.verdict == Verdict::Fail).map(|c| c.class_id).collect::<Vec<_>>(),
        }));
    }
    let result = json!({ "scales": scales.iter().map(|&d| exact(space, d)).collect::<Vec<_>>(), "rows": rows });
    Ok(CommandResult {
        passed: all_pass,
        exit_code: i32::from(cfg.assert && !all_pass),
        approximations: json!({ "card_cap": null, "trivial_action_assumed": loaded.action.is_none() }),
        result,
    })
}

/// Writes the report to `out`, or stdout when absent.
pub fn emit(outcome: &RunOutcome, out: Option<&Path>) -> std::io::Result<()> {
    let text = outcome.to_json();
    match out {
        Some(p) => std::fs::write(p, text),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes())
        }
    }
}

/// Entry point shared by the binary: returns the process exit code.
pub fn main_with(config: RunConfig) -> i32 {
    match run(&config) {
        Ok(outcome) => match emit(&outcome, config.out.as_deref()) {
            Ok(()) => outcome.exit_code,
            Err(e) => {
                eprintln!("error: cannot write report: {e}");
                2
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEXAGON_C6: &str = r#"{
        "space": {"graph": {"n": 6, "edges": [[0,1],[1,2],[2,3],[3,4],[4,5],[5,0]]}},
        "action": {"generators": [[1,2,3,4,5,0]]},
        "params": {"t": "3", "max_dim": 3, "field": "gf2", "seed": 1}
    }"#;

    fn cfg(command: CommandName) -> RunConfig {
        RunConfig::new(command, "unused.json")
    }

    #[test]
    fn eg_check_on_hexagon() {
        let out = run_on_input(HEXAGON_C6, &cfg(CommandName::EgCheck)).unwrap();
        assert_eq!(out.exit_code, 0);
        assert_eq!(out.report["result"]["class_count"], 4);
        let mut c = cfg(CommandName::EgCheck);
        c.t = Some(Scale::finite(2));
        assert_eq!(run_on_input(HEXAGON_C6, &c).unwrap().exit_code, 1);
    }

    #[test]
    fn threshold_with_delta() {
        let mut c = cfg(CommandName::Threshold);
        c.delta = Some(Rat::from_integer(1));
        let out = run_on_input(HEXAGON_C6, &c).unwrap();
        let t = out.report["result"]["threshold"]["t_min"].as_f64().unwrap();
        assert!((t - 11.1962).abs() < 1e-3);
    }

    #[test]
    fn malformed_input_is_a_schema_error() {
        assert!(matches!(run_on_input("{ not json", &cfg(CommandName::Metric)), Err(CliError::Schema(_))));
        assert!(matches!(
            run_on_input(r#"{"space": {"blob": 1}}"#, &cfg(CommandName::Metric)),
            Err(CliError::Schema(_))
        ));
    }

    #[test]
    fn missing_scale_is_reported() {
        let text = r#"{"space": {"graph": {"n": 2, "edges": [[0,1]]}}}"#;
        assert!(matches!(run_on_input(text, &cfg(CommandName::Rips)), Err(CliError::MissingField { field: "t", .. })));
    }

    #[test]
    fn flags_parse() {
        let c = RunConfig::try_parse_from([
            "vrmorse", "eg-check", "--input", "x.json", "--t", "5/2", "--field", "q", "--jobs", "4",
        ])
        .unwrap();
        assert_eq!(c.command, CommandName::EgCheck);
        assert_eq!(c.t, Some(Scale::Finite(Rat::new(5, 2))));
        assert_eq!(c.field, Some(Field::Rational));
        assert_eq!(c.jobs, 4);
    }

    #[test]
    fn reports_do_not_depend_on_jobs() {
        let mut one = cfg(CommandName::LinkCriterion);
        one.t = Some(Scale::finite(2));
        let mut four = one.clone();
        four.jobs = 4;
        assert_eq!(
            run_on_input(HEXAGON_C6, &one).unwrap().to_json(),
            run_on_input(HEXAGON_C6, &four).unwrap().to_json()
        );
    }
}
