//! Scenario execution and report assembly.

use std::f64::consts::TAU;
use std::path::Path;

use lplab_core::gaussian::{bernstein_power, cnd_check, gaussian_lift_check, moment_constant, KernelTable, OrthogonalCocyclePair, Z_BAND};
use lplab_core::group::FiniteGroup;
use lplab_core::lp::{absorb_phase, LampertiIsometry};
use lplab_core::mazur::{
    check_hoelder_ineq, check_lipschitz_ineq, formal_coboundary_transfer_check, intertwining_check, mazur_map,
    mean_zero_lower_bound, ConstantReport, STABILITY,
};
use lplab_core::random::{random_complex, random_permutation, random_weights};
use lplab_core::rng::{splitmix64, Substreams};
use lplab_core::transfer::{cq_constant, profile_integral, transfer_action, TransferOptions};
use lplab_core::{lp_power_sum, Complex64, FiniteMeasureSpace, LabError};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{
    CndScenario, ExperimentConfig, GaussianScenario, InstanceSource, LemmaScalingScenario, MazurSuiteScenario, Scenario,
    TransferScenario,
};
use crate::error::{CliError, Result};
use crate::instance::{generate_random_instance, Instance, InstanceDoc, InstanceKind, InstanceSpec, INSTANCE_TOL};
use crate::output::{num, Plot, Series, Table};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    /// The statistic compared against `threshold`.
    pub value: f64,
    pub threshold: f64,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub detail: Value,
}

impl CheckResult {
    fn below(name: impl Into<String>, value: f64, threshold: f64, detail: Value) -> Self {
        Self {
            name: name.into(),
            pass: value <= threshold,
            value,
            threshold,
            detail,
        }
    }
}

/// Contents of `report.json`. Carries no timing or host data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub scenario: String,
    pub seed: Option<u64>,
    pub config: Value,
    pub checks: Vec<CheckResult>,
    pub pass: bool,
    pub first_failure: Option<String>,
    pub artifacts: Vec<String>,
}

/// Everything a scenario produces before anything touches the disk.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub checks: Vec<CheckResult>,
    pub table: Table,
    pub plots: Vec<(String, Plot)>,
}

/// Seed for a labelled sub-computation, e.g. `(instance i, exponent j)`.
pub fn sub_seed(seed: u64, labels: &[u64]) -> u64 {
    labels
        .iter()
        .fold(splitmix64(seed), |acc, &l| splitmix64(acc ^ splitmix64(l.wrapping_add(1))))
}

/// Run the scenario without writing anything.
pub fn execute(config: &ExperimentConfig) -> Result<Outcome> {
    match &config.scenario {
        Scenario::Transfer(s) => transfer(s, &config.base_dir),
        Scenario::LemmaScaling(s) => lemma_scaling(s),
        Scenario::Gaussian(s) => gaussian(s),
        Scenario::Cnd(s) => cnd(s),
        Scenario::MazurSuite(s) => mazur_suite(s),
    }
}

/// Run the scenario and write `report.json`, `certificate.csv` and
/// `plots/*.svg` under `out`.
pub fn run(config: &ExperimentConfig, out: &Path) -> Result<RunReport> {
    let outcome = execute(config)?;
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let mut artifacts = vec!["certificate.csv".to_string()];
    outcome.table.write(&out.join("certificate.csv"))?;
    if !outcome.plots.is_empty() {
        let dir = out.join("plots");
        std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        for (name, plot) in &outcome.plots {
            plot.write(&dir.join(name))?;
            artifacts.push(format!("plots/{name}"));
        }
    }
    let report = assemble(config, outcome.checks, artifacts);
    let path = out.join("report.json");
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    Ok(report)
}

fn assemble(config: &ExperimentConfig, checks: Vec<CheckResult>, artifacts: Vec<String>) -> RunReport {
    let first_failure = checks.iter().find(|c| !c.pass).map(|c| c.name.clone());
    RunReport {
        tool: "lplab".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        scenario: config.scenario.name().into(),
        seed: config.seed(),
        config: config.echo(),
        pass: !checks.is_empty() && first_failure.is_none(),
        first_failure,
        checks,
        artifacts,
    }
}

fn load_instance(s: &TransferScenario, base_dir: &Path, i: usize) -> Result<Instance> {
    let inst = match &s.instance {
        InstanceSource::Random(spec) => {
            generate_random_instance(spec, s.p, s.seed.expect("validated").wrapping_add(i as u64))?
        }
        InstanceSource::Inline(doc) => Instance::from_doc((**doc).clone())?,
        InstanceSource::File(rel) => {
            let path = base_dir.join(rel);
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            let doc: InstanceDoc = serde_json::from_str(&text)
                .map_err(|e| CliError::config("/instance/file", format!("{}: {e}", path.display())))?;
            if doc.action.p != s.p {
                return Err(CliError::config(
                    "/instance/file",
                    format!("instance exponent {} differs from p = {}", doc.action.p, s.p),
                ));
            }
            Instance::from_doc(doc)?
        }
    };
    Ok(inst)
}

fn transfer(s: &TransferScenario, base_dir: &Path) -> Result<Outcome> {
    let phi = s.profile.build()?;
    let mut table = Table::new(&["instance", "group_order", "atoms", "element", "psi", "lhs", "rhs", "rel_err"]);
    let mut checks = Vec::new();
    let mut ratios = Vec::new();
    let mut c_q = f64::NAN;
    for i in 0..s.count {
        let inst = load_instance(s, base_dir, i)?;
        let alpha = if inst.alpha.has_zero_phase(0.0) {
            inst.alpha.clone()
        } else {
            let n = inst.phases.ok_or_else(|| {
                LabError::Precondition("nonzero phases need the grid size `phases` to be absorbed".into())
            })?;
            absorb_phase(&inst.alpha, n, INSTANCE_TOL)?
        };
        let opts = TransferOptions {
            tol: s.tol,
            normalize: s.normalize,
            spot_checks: s.spot_checks,
            seed: sub_seed(s.seed.unwrap_or(0), &[i as u64]),
        };
        let cert = transfer_action(&alpha, s.q, &phi, &opts)?;
        c_q = cert.c_q;
        let group = alpha.group().order();
        let atoms = alpha.space().len();
        for e in &cert.elements {
            table.push(vec![
                i.to_string(),
                group.to_string(),
                atoms.to_string(),
                e.element.clone(),
                num(e.psi),
                num(e.lhs),
                num(e.rhs),
                num(e.rel_err),
            ]);
        }
        for a in cert.atoms.iter().filter(|a| a.shift > 0.0) {
            ratios.push((a.shift, a.integral / a.shift.powf(s.p)));
        }
        let mut detail = serde_json::to_value(&cert)?;
        if let Value::Object(m) = &mut detail {
            m.remove("atoms");
        }
        let mut check = CheckResult::below(
            format!("transfer[{i}]"),
            cert.max_rel_err,
            s.tol,
            json!({
                "group_order": group,
                "atoms": atoms,
                "instance_seed": inst.seed,
                "certificate": detail,
            }),
        );
        check.pass = cert.pass;
        checks.push(check);
    }
    let mut plots = Vec::new();
    if s.plots && !ratios.is_empty() {
        ratios.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (lo, hi) = (ratios[0].0, ratios[ratios.len() - 1].0);
        plots.push((
            "transfer-ratio.svg".to_string(),
            Plot {
                title: format!("I(w)/|w|^p per atom, p = {}, q = {}", s.p, s.q),
                x_label: "|w|".into(),
                y_label: "I(w) / |w|^p".into(),
                log_x: true,
                series: vec![
                    Series {
                        name: "atoms".into(),
                        points: ratios,
                        markers: true,
                    },
                    Series {
                        name: "C(q)".into(),
                        points: vec![(lo, c_q), (hi, c_q)],
                        markers: false,
                    },
                ],
            },
        ));
    }
    Ok(Outcome { checks, table, plots })
}

fn lemma_scaling(s: &LemmaScalingScenario) -> Result<Outcome> {
    let phi = s.profile.build()?;
    let c = cq_constant(&phi, s.p, s.q, s.tol)?;
    let grid: Vec<(f64, usize)> = s
        .magnitudes
        .iter()
        .flat_map(|&m| (0..s.phases).map(move |k| (m, k)))
        .collect();
    let values = grid
        .par_iter()
        .map(|&(m, k)| {
            let w = Complex64::from_polar(m, TAU * k as f64 / s.phases as f64);
            profile_integral(&phi, s.p, s.q, w, s.tol)
        })
        .collect::<lplab_core::Result<Vec<f64>>>()?;
    let mut table = Table::new(&["abs_w", "arg_w", "integral", "ratio", "rel_err"]);
    let mut series: Vec<Series> = (0..s.phases)
        .map(|k| Series {
            name: format!("arg = {:.3}", TAU * k as f64 / s.phases as f64),
            points: Vec::new(),
            markers: false,
        })
        .collect();
    let mut worst = 0.0f64;
    for (&(m, k), &v) in grid.iter().zip(&values) {
        let ratio = v / (c * m.powf(s.p));
        let err = (ratio - 1.0).abs();
        worst = worst.max(err);
        table.push(vec![
            num(m),
            num(TAU * k as f64 / s.phases as f64),
            num(v),
            num(ratio),
            num(err),
        ]);
        series[k].points.push((m, ratio));
    }
    let checks = vec![CheckResult::below(
        "scaling-law",
        worst,
        s.max_rel_err,
        json!({"c_q": c, "p": s.p, "q": s.q, "integrals": values.len()}),
    )];
    let mut plots = Vec::new();
    if s.plots {
        plots.push((
            "lemma-ratio.svg".to_string(),
            Plot {
                title: format!("I(w) / (C(q)|w|^p), p = {}, q = {}", s.p, s.q),
                x_label: "|w|".into(),
                y_label: "ratio".into(),
                log_x: true,
                series,
            },
        ));
    }
    Ok(Outcome { checks, table, plots })
}

const PAIR_LABEL: u64 = 0x5041_4952;

/// The seeded pairs shared by the Gaussian and CND scenarios: pair `i`
/// lives on group `groups[i mod len]`.
pub fn random_pairs(seed: u64, pairs: usize, groups: &[String], max_dim: usize) -> Result<Vec<OrthogonalCocyclePair>> {
    let streams = Substreams::new(seed).child(PAIR_LABEL);
    (0..pairs)
        .map(|i| {
            let g = FiniteGroup::by_name(&groups[i % groups.len()])?;
            let mut rng = streams.stream(i as u64);
            Ok(OrthogonalCocyclePair::random(g, max_dim, &mut rng)?)
        })
        .collect()
}

fn gaussian(s: &GaussianScenario) -> Result<Outcome> {
    let seed = s.seed.expect("validated");
    let pairs = random_pairs(seed, s.pairs, &s.groups, s.max_dim)?;
    let mut checks = Vec::new();
    let m2 = moment_constant(2.0)?;
    let m4 = moment_constant(4.0)?;
    checks.push(CheckResult::below(
        "moment-constants",
        (m2 - 1.0).abs().max((m4 - 3.0).abs()),
        1e-9,
        json!({"c2": m2, "c4": m4}),
    ));
    let mut table = Table::new(&["pair", "dim", "p", "element", "estimate", "target", "stderr", "z_score"]);
    let mut zs = Vec::new();
    for (i, pair) in pairs.iter().enumerate() {
        for (j, &p) in s.p.values().iter().enumerate() {
            let rep = gaussian_lift_check(pair, p, s.samples, sub_seed(seed, &[i as u64, j as u64]))?;
            let worst = rep
                .elements
                .iter()
                .map(|e| e.z_score.abs())
                .chain(rep.equivariance.iter().map(|e| e.z_score.abs()))
                .fold(0.0, f64::max);
            for e in &rep.elements {
                table.push(vec![
                    i.to_string(),
                    pair.dim().to_string(),
                    num(p),
                    e.element.clone(),
                    num(e.estimate),
                    num(e.target),
                    num(e.stderr),
                    num(e.z_score),
                ]);
                zs.push(((zs.len() + 1) as f64, e.z_score));
            }
            let mut check = CheckResult::below(
                format!("lift[{i}, p={p}]"),
                worst,
                Z_BAND,
                json!({"group_order": pair.group().order(), "dim": pair.dim(), "report": rep}),
            );
            check.pass = rep.pass;
            checks.push(check);
        }
    }
    let plots = vec![(
        "gaussian-z.svg".to_string(),
        Plot {
            title: "Gaussian lift z-scores".into(),
            x_label: "entry".into(),
            y_label: "z".into(),
            log_x: false,
            series: vec![Series {
                name: "z".into(),
                points: zs,
                markers: true,
            }],
        },
    )];
    Ok(Outcome { checks, table, plots })
}

fn cnd(s: &CndScenario) -> Result<Outcome> {
    let seed = s.seed.expect("validated");
    let pairs = random_pairs(seed, s.pairs, &s.groups, s.max_dim)?;
    let mut checks = Vec::new();
    let mut table = Table::new(&["pair", "group_order", "power", "max_form", "max_random_form", "pass"]);
    for (i, pair) in pairs.iter().enumerate() {
        let k = KernelTable::from_pair(pair)?;
        let mut kernels = vec![(1.0, k.clone())];
        for &a in &s.powers {
            kernels.push((a, bernstein_power(&k, a)?));
        }
        for (j, (a, kern)) in kernels.iter().enumerate() {
            let r = cnd_check(kern, s.trials, sub_seed(seed, &[i as u64, j as u64]), s.tol);
            table.push(vec![
                i.to_string(),
                pair.group().order().to_string(),
                num(*a),
                num(r.max_form),
                num(r.max_random_form),
                r.pass.to_string(),
            ]);
            let name = if *a == 1.0 { format!("cnd[{i}]") } else { format!("cnd[{i}]^{a}") };
            let mut check = CheckResult::below(name, r.max_form.max(r.max_random_form), s.tol, serde_json::to_value(&r)?);
            check.pass = r.pass;
            checks.push(check);
        }
    }
    Ok(Outcome {
        checks,
        table,
        plots: Vec::new(),
    })
}

/// Random vector with entries spread over six decades.
fn spread_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Complex64> {
    random_complex(n, rng)
        .into_iter()
        .map(|z| z * 10f64.powf(rng.random_range(-3.0..3.0)))
        .collect()
}

fn constant_check(name: &str, r: ConstantReport) -> Result<CheckResult> {
    let drift = (r.doubled - r.statistic).abs() / r.statistic.abs().max(f64::MIN_POSITIVE);
    let mut c = CheckResult::below(name, drift, STABILITY, serde_json::to_value(&r)?);
    c.pass = r.stable && r.statistic.is_finite() && r.statistic > 0.0;
    Ok(c)
}

fn mazur_suite(s: &MazurSuiteScenario) -> Result<Outcome> {
    let seed = s.seed.expect("validated");
    let (p, q) = (s.p, s.q);
    let streams = Substreams::new(seed);
    let mut checks = Vec::new();

    let mut rng = streams.stream(0);
    let (mut round, mut norm) = (0.0f64, 0.0f64);
    for _ in 0..s.roundtrip_trials {
        let n = rng.random_range(1..=s.max_atoms);
        let f = spread_vector(n, &mut rng);
        let back = mazur_map(&mazur_map(&f, p, q)?, q, p)?;
        let scale = f.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let r = f.iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        round = round.max(r / scale);
        let space = FiniteMeasureSpace::from_weights(random_weights(n, 0.2, 5.0, &mut rng))?.normalize();
        let lhs = lp_power_sum(&mazur_map(&f, p, q)?, &space, q)?;
        let rhs = lp_power_sum(&f, &space, p)?;
        norm = norm.max((lhs - rhs).abs() / rhs);
    }
    checks.push(CheckResult::below("round-trip", round, 1e-12, json!({"trials": s.roundtrip_trials})));
    checks.push(CheckResult::below("norm-transport", norm, 1e-12, json!({"trials": s.roundtrip_trials})));

    checks.push(constant_check(
        "lipschitz-constant",
        check_lipschitz_ineq(p, q, s.constant_trials, sub_seed(seed, &[1]))?,
    )?);
    checks.push(constant_check(
        "hoelder-constant",
        check_hoelder_ineq(p, q, s.constant_trials, sub_seed(seed, &[2]))?,
    )?);

    let mut rng = streams.stream(3);
    let mut inter = 0.0f64;
    for _ in 0..s.lamperti_maps {
        let n = rng.random_range(2..=s.max_atoms);
        let space = FiniteMeasureSpace::from_weights(random_weights(n, 0.2, 5.0, &mut rng))?;
        let theta = random_permutation(n, &mut rng);
        let phase: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..TAU)).collect();
        let tp = LampertiIsometry::new(theta, phase, p, space)?;
        let tq = tp.with_exponent(q)?;
        let f = random_complex(n, &mut rng);
        inter = inter.max(intertwining_check(&tp, &tq, &f)?);
    }
    checks.push(CheckResult::below("intertwining", inter, 1e-10, json!({"maps": s.lamperti_maps})));

    checks.push(constant_check(
        "mean-zero-constant",
        mean_zero_lower_bound(p, q, s.max_atoms, s.mean_zero_trials, sub_seed(seed, &[4]))?,
    )?);

    let mut worst_gap = f64::NEG_INFINITY;
    let mut all = true;
    let mut details = Vec::new();
    for (k, group) in ["Z2", "Z3", "S3"].iter().enumerate() {
        let spec = InstanceSpec::new(group, InstanceKind::MeasurePreserving, s.max_atoms);
        let inst = generate_random_instance(&spec, p, sub_seed(seed, &[5, k as u64]))?;
        let f = random_complex(s.max_atoms, &mut streams.stream(6 + k as u64));
        let r = formal_coboundary_transfer_check(inst.alpha.action(), &f, p, q, s.grid)?;
        all &= r.pass;
        worst_gap = worst_gap.max(r.constant - r.min_ratio);
        details.push(serde_json::to_value(&r)?);
    }
    checks.push(CheckResult {
        name: "formal-coboundary".into(),
        pass: all,
        value: worst_gap,
        threshold: 0.0,
        detail: Value::Array(details),
    });

    let mut table = Table::new(&["check", "value", "threshold", "pass"]);
    for c in &checks {
        table.push(vec![c.name.clone(), num(c.value), num(c.threshold), c.pass.to_string()]);
    }
    Ok(Outcome {
        checks,
        table,
        plots: Vec::new(),
    })
}
