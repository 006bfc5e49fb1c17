//! Experiment configuration: parsing, overrides and validation.
//!
//! A config is a flat JSON object with a `"scenario"` tag, an optional
//! `"out"` directory, and the scenario's own keys:
//!
//! ```json
//! {"scenario": "lemma-scaling", "p": 1, "q": 2, "tol": 1e-7}
//! ```

use std::path::{Path, PathBuf};

use lplab_core::gaussian::MIN_SAMPLES;
use lplab_core::group::FiniteGroup;
use lplab_core::transfer::ProfileSpec;
use lplab_core::LabError;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{CliError, Result};
use crate::instance::{InstanceDoc, InstanceKind, InstanceSpec, MAX_ATOMS};

/// Where a transfer scenario gets its instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum InstanceSource {
    Random(InstanceSpec),
    Inline(Box<InstanceDoc>),
    /// Path to an [`InstanceDoc`], relative to the config file.
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferScenario {
    pub p: f64,
    pub q: f64,
    #[serde(default)]
    pub profile: ProfileSpec,
    #[serde(default = "default_transfer_tol")]
    pub tol: f64,
    #[serde(default)]
    pub normalize: bool,
    #[serde(default = "default_spot_checks")]
    pub spot_checks: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    pub instance: InstanceSource,
    /// Number of random instances; instance `i` uses seed `seed + i`.
    #[serde(default = "one")]
    pub count: usize,
    #[serde(default = "yes")]
    pub plots: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaScalingScenario {
    pub p: f64,
    pub q: f64,
    #[serde(default)]
    pub profile: ProfileSpec,
    /// Absolute quadrature tolerance per integral.
    #[serde(default = "default_lemma_tol")]
    pub tol: f64,
    #[serde(default = "default_magnitudes")]
    pub magnitudes: Vec<f64>,
    /// Number of equally spaced arguments per magnitude.
    #[serde(default = "three")]
    pub phases: usize,
    #[serde(default = "default_max_rel_err")]
    pub max_rel_err: f64,
    #[serde(default = "yes")]
    pub plots: bool,
}

/// A number or a list of numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    pub fn values(&self) -> Vec<f64> {
        match self {
            OneOrMany::One(x) => vec![*x],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianScenario {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_gaussian_p")]
    pub p: OneOrMany,
    #[serde(default = "default_pairs")]
    pub pairs: usize,
    #[serde(default = "default_groups")]
    pub groups: Vec<String>,
    #[serde(default = "default_max_dim")]
    pub max_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CndScenario {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_pairs")]
    pub pairs: usize,
    #[serde(default = "default_groups")]
    pub groups: Vec<String>,
    #[serde(default = "default_max_dim")]
    pub max_dim: usize,
    #[serde(default = "default_powers")]
    pub powers: Vec<f64>,
    #[serde(default = "default_cnd_trials")]
    pub trials: usize,
    #[serde(default = "default_cnd_tol")]
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MazurSuiteScenario {
    pub p: f64,
    pub q: f64,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_roundtrip")]
    pub roundtrip_trials: usize,
    #[serde(default = "default_constant_trials")]
    pub constant_trials: usize,
    #[serde(default = "default_lamperti_maps")]
    pub lamperti_maps: usize,
    #[serde(default = "default_mean_zero_trials")]
    pub mean_zero_trials: usize,
    #[serde(default = "default_max_atoms")]
    pub max_atoms: usize,
    #[serde(default = "default_grid")]
    pub grid: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "scenario", rename_all = "kebab-case")]
pub enum Scenario {
    Transfer(TransferScenario),
    LemmaScaling(LemmaScalingScenario),
    Gaussian(GaussianScenario),
    MazurSuite(MazurSuiteScenario),
    Cnd(CndScenario),
}

pub const SCENARIOS: [&str; 5] = ["transfer", "lemma-scaling", "gaussian", "mazur-suite", "cnd"];

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Transfer(_) => "transfer",
            Scenario::LemmaScaling(_) => "lemma-scaling",
            Scenario::Gaussian(_) => "gaussian",
            Scenario::MazurSuite(_) => "mazur-suite",
            Scenario::Cnd(_) => "cnd",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub out: Option<PathBuf>,
    /// Directory relative paths inside the config resolve against.
    pub base_dir: PathBuf,
}

/// Command-line overrides applied before validation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
}

fn one() -> usize {
    1
}
fn three() -> usize {
    3
}
fn yes() -> bool {
    true
}
fn default_transfer_tol() -> f64 {
    1e-6
}
fn default_spot_checks() -> usize {
    1000
}
fn default_lemma_tol() -> f64 {
    1e-7
}
fn default_magnitudes() -> Vec<f64> {
    vec![0.25, 0.5, 1.0, 2.0, 4.0]
}
fn default_max_rel_err() -> f64 {
    1e-5
}
fn default_samples() -> usize {
    lplab_core::gaussian::DEFAULT_SAMPLES
}
fn default_gaussian_p() -> OneOrMany {
    OneOrMany::Many(vec![1.0, 2.0, 3.0])
}
fn default_pairs() -> usize {
    5
}
fn default_groups() -> Vec<String> {
    ["Z2", "Z3", "Z4", "S3"].iter().map(|s| s.to_string()).collect()
}
fn default_max_dim() -> usize {
    6
}
fn default_powers() -> Vec<f64> {
    vec![0.5, 2.0 / 3.0]
}
fn default_cnd_trials() -> usize {
    10_000
}
fn default_cnd_tol() -> f64 {
    1e-9
}
fn default_roundtrip() -> usize {
    10_000
}
fn default_constant_trials() -> usize {
    100_000
}
fn default_lamperti_maps() -> usize {
    1000
}
fn default_mean_zero_trials() -> usize {
    2000
}
fn default_max_atoms() -> usize {
    8
}
fn default_grid() -> usize {
    21
}

/// Turn a serde path (`instance.random.atoms`) into a JSON pointer.
fn pointer_of(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    out
}

fn parse_section<T: DeserializeOwned>(value: Value) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let pointer = pointer_of(e.path());
        CliError::config(pointer, e.into_inner().to_string())
    })
}

/// Keys a scenario accepts among the overridable ones.
fn accepts(scenario: &str, key: &str) -> bool {
    match key {
        "seed" => scenario != "lemma-scaling",
        "tol" => matches!(scenario, "transfer" | "lemma-scaling" | "cnd"),
        _ => false,
    }
}

/// Parse and validate a config document.
pub fn parse_config(text: &str, base_dir: &Path, overrides: Overrides) -> Result<ExperimentConfig> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| CliError::config("", format!("invalid JSON at line {}, column {}: {e}", e.line(), e.column())))?;
    let Value::Object(mut obj) = value else {
        return Err(CliError::config("", "config must be a JSON object"));
    };
    let scenario = match obj.remove("scenario") {
        Some(Value::String(s)) => s,
        Some(_) => return Err(CliError::config("/scenario", "scenario must be a string")),
        None => return Err(CliError::config("/scenario", "missing scenario kind")),
    };
    let out = match obj.remove("out") {
        Some(Value::String(s)) => Some(PathBuf::from(s)),
        Some(_) => return Err(CliError::config("/out", "out must be a path string")),
        None => None,
    };
    apply_overrides(&scenario, &mut obj, overrides)?;
    let rest = Value::Object(obj);
    let scenario = match scenario.as_str() {
        "transfer" => Scenario::Transfer(parse_section(rest)?),
        "lemma-scaling" => Scenario::LemmaScaling(parse_section(rest)?),
        "gaussian" => Scenario::Gaussian(parse_section(rest)?),
        "mazur-suite" => Scenario::MazurSuite(parse_section(rest)?),
        "cnd" => Scenario::Cnd(parse_section(rest)?),
        other => {
            return Err(CliError::config(
                "/scenario",
                format!("unknown scenario {other:?}, expected one of {}", SCENARIOS.join(", ")),
            ))
        }
    };
    let config = ExperimentConfig {
        scenario,
        out,
        base_dir: base_dir.to_path_buf(),
    };
    validate(&config)?;
    Ok(config)
}

fn apply_overrides(scenario: &str, obj: &mut Map<String, Value>, o: Overrides) -> Result<()> {
    if let Some(seed) = o.seed {
        if accepts(scenario, "seed") {
            obj.insert("seed".into(), Value::from(seed));
        } else {
            log::warn!("--seed ignored: scenario {scenario} is deterministic");
        }
    }
    if let Some(tol) = o.tol {
        if accepts(scenario, "tol") {
            obj.insert("tol".into(), Value::from(tol));
        } else {
            log::warn!("--tol ignored: scenario {scenario} has no tolerance key");
        }
    }
    Ok(())
}

/// Read a config file; relative paths inside resolve against its directory.
pub fn load_config(path: &Path, overrides: Overrides) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_config(&text, &base, overrides)
}

impl ExperimentConfig {
    /// The effective config, defaults filled in; `out` is left out so that
    /// reports do not depend on where they are written.
    pub fn echo(&self) -> Value {
        serde_json::to_value(&self.scenario).expect("config serializes")
    }

    pub fn seed(&self) -> Option<u64> {
        match &self.scenario {
            Scenario::Transfer(s) => s.seed,
            Scenario::LemmaScaling(_) => None,
            Scenario::Gaussian(s) => s.seed,
            Scenario::MazurSuite(s) => s.seed,
            Scenario::Cnd(s) => s.seed,
        }
    }
}

fn positive(pointer: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(CliError::config(pointer, format!("must be a finite number > 0, got {x}")))
    }
}

fn at_least(pointer: &str, n: usize, min: usize) -> Result<()> {
    if n >= min {
        Ok(())
    } else {
        Err(CliError::config(pointer, format!("must be at least {min}, got {n}")))
    }
}

fn exponent_order(p: f64, q: f64) -> Result<()> {
    positive("/p", p)?;
    if !q.is_finite() {
        return Err(CliError::config("/q", format!("must be finite, got {q}")));
    }
    if p >= q {
        return Err(CliError::config("/q", LabError::ExponentOrder { p, q }.to_string()));
    }
    Ok(())
}

fn require_seed(seed: Option<u64>) -> Result<()> {
    match seed {
        Some(_) => Ok(()),
        None => Err(CliError::config("/seed", "a seed is required for stochastic scenarios")),
    }
}

fn groups(list: &[String]) -> Result<()> {
    if list.is_empty() {
        return Err(CliError::config("/groups", "must name at least one group"));
    }
    for (i, name) in list.iter().enumerate() {
        FiniteGroup::by_name(name).map_err(|e| CliError::config(format!("/groups/{i}"), e.to_string()))?;
    }
    Ok(())
}

fn profile(spec: &ProfileSpec) -> Result<()> {
    spec.build().map(|_| ()).map_err(|e| CliError::config("/profile", e.to_string()))
}

fn instance_spec(spec: &InstanceSpec) -> Result<()> {
    let at = "/instance/random";
    FiniteGroup::by_name(&spec.group).map_err(|e| CliError::config(format!("{at}/group"), e.to_string()))?;
    let n = spec.atom_count();
    if n == 0 || n > MAX_ATOMS {
        return Err(CliError::config(
            format!("{at}/atoms"),
            format!("atom count must lie in 1..={MAX_ATOMS}, got {n}"),
        ));
    }
    if let Some(w) = &spec.weights {
        if spec.kind == InstanceKind::MeasurePreserving {
            return Err(CliError::config(
                format!("{at}/weights"),
                "fixed weights are only accepted for nonsingular instances",
            ));
        }
        if let Some(a) = spec.atoms.filter(|&a| a != w.len()) {
            return Err(CliError::config(
                format!("{at}/atoms"),
                format!("atoms = {a} disagrees with {} weights", w.len()),
            ));
        }
        for (i, &x) in w.iter().enumerate() {
            positive(&format!("{at}/weights/{i}"), x)?;
        }
    }
    if spec.phases == Some(0) {
        return Err(CliError::config(format!("{at}/phases"), "phase grid size must be at least 1"));
    }
    Ok(())
}

/// Semantic checks beyond the schema.
pub fn validate(config: &ExperimentConfig) -> Result<()> {
    match &config.scenario {
        Scenario::Transfer(s) => {
            exponent_order(s.p, s.q)?;
            positive("/tol", s.tol)?;
            at_least("/spot_checks", s.spot_checks, 1)?;
            at_least("/count", s.count, 1)?;
            profile(&s.profile)?;
            match &s.instance {
                InstanceSource::Random(spec) => {
                    require_seed(s.seed)?;
                    instance_spec(spec)?;
                }
                _ if s.count != 1 => {
                    return Err(CliError::config("/count", "count > 1 needs a random instance source"));
                }
                InstanceSource::Inline(doc) => {
                    if doc.action.p != s.p {
                        return Err(CliError::config(
                            "/instance/inline/action/p",
                            format!("instance exponent {} differs from p = {}", doc.action.p, s.p),
                        ));
                    }
                }
                InstanceSource::File(_) => {}
            }
        }
        Scenario::LemmaScaling(s) => {
            exponent_order(s.p, s.q)?;
            positive("/tol", s.tol)?;
            positive("/max_rel_err", s.max_rel_err)?;
            at_least("/phases", s.phases, 1)?;
            profile(&s.profile)?;
            if s.magnitudes.is_empty() {
                return Err(CliError::config("/magnitudes", "must list at least one magnitude"));
            }
            for (i, &m) in s.magnitudes.iter().enumerate() {
                positive(&format!("/magnitudes/{i}"), m)?;
            }
        }
        Scenario::Gaussian(s) => {
            require_seed(s.seed)?;
            at_least("/samples", s.samples, MIN_SAMPLES)?;
            at_least("/pairs", s.pairs, 1)?;
            at_least("/max_dim", s.max_dim, 1)?;
            groups(&s.groups)?;
            let ps = s.p.values();
            if ps.is_empty() {
                return Err(CliError::config("/p", "must list at least one exponent"));
            }
            for (i, &p) in ps.iter().enumerate() {
                let at = if matches!(s.p, OneOrMany::One(_)) { "/p".to_string() } else { format!("/p/{i}") };
                positive(&at, p)?;
            }
        }
        Scenario::Cnd(s) => {
            require_seed(s.seed)?;
            at_least("/pairs", s.pairs, 1)?;
            at_least("/max_dim", s.max_dim, 1)?;
            groups(&s.groups)?;
            positive("/tol", s.tol)?;
            for (i, &a) in s.powers.iter().enumerate() {
                if !(a > 0.0 && a <= 1.0) {
                    return Err(CliError::config(format!("/powers/{i}"), format!("power must lie in (0, 1], got {a}")));
                }
            }
        }
        Scenario::MazurSuite(s) => {
            require_seed(s.seed)?;
            if !(s.p >= 1.0 && s.p.is_finite()) {
                return Err(CliError::config("/p", format!("the Mazur suite needs p ≥ 1, got {}", s.p)));
            }
            if !(s.q >= s.p && s.q.is_finite()) {
                return Err(CliError::config("/q", format!("the Mazur suite needs p ≤ q, got p = {}, q = {}", s.p, s.q)));
            }
            at_least("/roundtrip_trials", s.roundtrip_trials, 1)?;
            at_least("/constant_trials", s.constant_trials, 1)?;
            at_least("/lamperti_maps", s.lamperti_maps, 1)?;
            at_least("/mean_zero_trials", s.mean_zero_trials, 1)?;
            at_least("/max_atoms", s.max_atoms, 2)?;
            at_least("/grid", s.grid, 2)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig> {
        parse_config(text, Path::new("."), Overrides::default())
    }

    fn pointer(r: Result<ExperimentConfig>) -> String {
        match r {
            Err(CliError::Config { pointer, .. }) => pointer,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn defaults_fill_in() {
        let c = parse(r#"{"scenario": "lemma-scaling", "p": 1, "q": 2}"#).unwrap();
        let Scenario::LemmaScaling(s) = &c.scenario else { panic!() };
        assert_eq!(s.magnitudes, vec![0.25, 0.5, 1.0, 2.0, 4.0]);
        assert_eq!(s.tol, 1e-7);
        assert_eq!(c.echo()["scenario"], "lemma-scaling");
    }

    #[test]
    fn exponent_order_points_at_q() {
        let r = parse(r#"{"scenario": "lemma-scaling", "p": 2, "q": 2}"#);
        match r {
            Err(CliError::Config { pointer, message }) => {
                assert_eq!(pointer, "/q");
                assert!(message.contains("exponent order violation"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn schema_errors_carry_pointers() {
        assert_eq!(pointer(parse("[1]")), "");
        assert_eq!(pointer(parse("{")), "");
        assert_eq!(pointer(parse(r#"{"p": 1}"#)), "/scenario");
        assert_eq!(pointer(parse(r#"{"scenario": "nope"}"#)), "/scenario");
        assert_eq!(pointer(parse(r#"{"scenario": "lemma-scaling", "p": "x", "q": 2}"#)), "/p");
        assert_eq!(
            pointer(parse(r#"{"scenario": "lemma-scaling", "p": 1, "q": 2, "magnitudes": [1, -1]}"#)),
            "/magnitudes/1"
        );
        let t = r#"{"scenario": "transfer", "p": 1, "q": 2, "seed": 1,
                    "instance": {"random": {"group": "Z2", "kind": "nonsingular", "atoms": "many"}}}"#;
        assert_eq!(pointer(parse(t)), "/instance/random/atoms");
        let t = r#"{"scenario": "transfer", "p": 1, "q": 2, "seed": 1,
                    "instance": {"random": {"group": "Q8", "kind": "nonsingular"}}}"#;
        assert_eq!(pointer(parse(t)), "/instance/random/group");
    }

    #[test]
    fn stochastic_scenarios_need_a_seed() {
        assert_eq!(pointer(parse(r#"{"scenario": "gaussian"}"#)), "/seed");
        let c = parse_config(
            r#"{"scenario": "gaussian"}"#,
            Path::new("."),
            Overrides {
                seed: Some(4),
                tol: None,
            },
        )
        .unwrap();
        assert_eq!(c.seed(), Some(4));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert_eq!(pointer(parse(r#"{"scenario": "cnd", "seed": 1, "bogus": 1}"#)), "/bogus");
    }
}
