//! Command-line front end.
//!
//! Every command writes its artifacts plus a `run_meta.json` recording the
//! resolved configuration and the SHA-256 of each artifact. Files are
//! written to a temporary name and renamed into place.
//!
//! Configuration precedence is flag > `--set key=value` > `--config` file >
//! built-in default (`--set` counts as a flag). Keys may be dotted paths
//! (`scenarios.delay_probability`) or bare field names when unambiguous.
//!
//! Exit codes: 0 success, 1 a model was infeasible (diagnostics are still
//! written), 2 bad input or usage.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use chrono::{DateTime, Utc};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::analysis::{
    compare_models, comparison_csv, fmt_sig, pareto_csv, pareto_frontier, run_scenario_comparison,
    scenario_outcomes_csv, sweep_beta, sweep_csv, sweep_tau, ScenarioOutcome,
};
use crate::domain::{validate_instance, AdaptiveParams, Instance, Scenario};
use crate::ingest::{log_to_profile, read_sensor_csv};
use crate::models::{solve_model, ModelKind};
use crate::scenarios::{
    generate_full_instance, generate_instance, generate_scenarios, SyntheticConfig,
    UncertaintyConfig,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "freshroute",
    version,
    about = "Perishable-produce routing under uncertainty"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Directory for artifacts; created if missing.
    #[arg(long, default_value = "out")]
    pub output_dir: PathBuf,
    /// JSON file overriding configuration defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override one configuration field, e.g. `--set scenarios.ambient_std=1.5`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one model on an instance.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value = "deterministic")]
        model: ModelKind,
        /// Scenario the adaptive model runs on (index into the instance's
        /// scenarios; nominal when the instance has none).
        #[arg(long, default_value_t = 0)]
        scenario_index: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Generate a synthetic instance with uncertainty blocks.
    Generate {
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Draw a scenario batch for an instance.
    Scenarios {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Model comparison table and deterministic-versus-adaptive study.
    Compare {
        #[arg(long)]
        instance: PathBuf,
        /// Redraw the scenario batch with this seed instead of using the
        /// instance's scenarios.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Pareto frontier of adaptive outcomes across scenarios.
    Pareto {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Sensitivity sweep over the correction factor or ambient noise.
    Sweep {
        #[arg(long, value_enum)]
        param: SweepParam,
        /// `start:stop:step` or a comma-separated list.
        #[arg(long)]
        grid: Option<String>,
        #[arg(long, default_value_t = 200)]
        reps: usize,
        #[arg(long)]
        seed: u64,
        /// Instance to sweep on; a synthetic one is generated from the seed
        /// when absent.
        #[arg(long)]
        instance: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Convert a temperature-logger CSV into a profile.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        /// RFC 3339 UTC trip start; defaults to the first reading.
        #[arg(long)]
        trip_start: Option<String>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Beta,
    Tau,
}

/// Everything tunable, resolved from defaults, `--config` and `--set`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub synthetic: SyntheticConfig,
    pub uncertainty: UncertaintyConfig,
    pub adaptive: AdaptiveParams,
    /// Correction factor held fixed during an ambient-noise sweep.
    pub sweep_beta: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            synthetic: SyntheticConfig::default(),
            uncertainty: UncertaintyConfig::default(),
            adaptive: AdaptiveParams::default(),
            sweep_beta: 0.5,
        }
    }
}

/// Resolved configuration and whether the adaptive block was set
/// explicitly (it then replaces the instance's own parameters).
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: ExperimentConfig,
    pub adaptive_overridden: bool,
}

fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn leaf_paths(value: &Value, prefix: &str, out: &mut Vec<String>) {
    if let Value::Object(map) = value {
        for (k, v) in map {
            let path = if prefix.is_empty() {
                k.clone()
            } else {
                format!("{prefix}.{k}")
            };
            if v.is_object() {
                leaf_paths(v, &path, out);
            } else {
                out.push(path);
            }
        }
    }
}

fn set_path(root: &mut Value, key: &str, raw: &str) -> anyhow::Result<()> {
    let mut leaves = Vec::new();
    leaf_paths(root, "", &mut leaves);
    let path = if leaves.iter().any(|l| l == key) {
        key.to_string()
    } else {
        let hits: Vec<&String> = leaves
            .iter()
            .filter(|l| l.rsplit('.').next() == Some(key) || l.ends_with(&format!(".{key}")))
            .collect();
        match hits.as_slice() {
            [one] => (*one).clone(),
            [] => bail!("unknown configuration key '{key}'"),
            many => bail!(
                "ambiguous key '{key}', use one of: {}",
                many.iter()
                    .map(|s| s.as_str())
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
        }
    };
    let value: Value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut slot = root;
    for part in path.split('.') {
        slot = slot
            .get_mut(part)
            .ok_or_else(|| anyhow!("unknown configuration key '{key}'"))?;
    }
    *slot = value;
    Ok(())
}

/// Applies `--config` then `--set` over the defaults.
pub fn resolve_config(common: &Common) -> anyhow::Result<Resolved> {
    let mut tree = serde_json::to_value(ExperimentConfig::default())?;
    let mut adaptive_overridden = false;
    if let Some(path) = &common.config {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let patch: Value = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        if !patch.is_object() {
            bail!("config file must hold a JSON object");
        }
        adaptive_overridden |= patch.get("adaptive").is_some();
        merge(&mut tree, patch);
    }
    for item in &common.overrides {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| anyhow!("--set expects KEY=VALUE, got '{item}'"))?;
        set_path(&mut tree, key.trim(), raw.trim())?;
        let mut leaves = Vec::new();
        leaf_paths(&tree, "", &mut leaves);
        adaptive_overridden |= key.trim().starts_with("adaptive.")
            || (!key.contains('.')
                && leaves
                    .iter()
                    .any(|l| l == &format!("adaptive.{}", key.trim())));
    }
    let config: ExperimentConfig = serde_json::from_value(tree).context("invalid configuration")?;
    Ok(Resolved {
        config,
        adaptive_overridden,
    })
}

/// Parses `start:stop:step` (inclusive) or `a,b,c`.
pub fn parse_grid(text: &str) -> anyhow::Result<Vec<f64>> {
    let num = |s: &str| -> anyhow::Result<f64> {
        s.trim()
            .parse::<f64>()
            .with_context(|| format!("bad grid value '{s}'"))
    };
    if let Some((start, rest)) = text.split_once(':') {
        let (stop, step) = rest
            .split_once(':')
            .ok_or_else(|| anyhow!("grid '{text}' must be start:stop:step"))?;
        let (a, b, h) = (num(start)?, num(stop)?, num(step)?);
        if !(h > 0.0) || b < a {
            bail!("grid '{text}' needs step > 0 and stop >= start");
        }
        let count = ((b - a) / h + 1e-9).floor() as usize;
        Ok((0..=count)
            .map(|i| ((a + i as f64 * h) * 1e12).round() / 1e12)
            .collect())
    } else {
        text.split(',').map(num).collect()
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| anyhow!("bad output path"))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    {
        let mut f =
            fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// Collects artifacts and writes them together with `run_meta.json`.
struct Artifacts {
    dir: PathBuf,
    files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    fn new(dir: &Path) -> Self {
        Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        }
    }

    fn add(&mut self, name: &str, content: impl Into<Vec<u8>>) {
        self.files.push((name.to_string(), content.into()));
    }

    fn add_json<T: Serialize>(&mut self, name: &str, value: &T) -> anyhow::Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.add(name, text);
        Ok(())
    }

    fn finish(self, mut meta: Map<String, Value>) -> anyhow::Result<()> {
        fs::create_dir_all(&self.dir)
            .with_context(|| format!("creating {}", self.dir.display()))?;
        let mut checksums = Map::new();
        for (name, bytes) in &self.files {
            write_atomic(&self.dir.join(name), bytes)?;
            checksums.insert(name.clone(), Value::String(sha256_hex(bytes)));
        }
        meta.insert("artifacts".into(), Value::Object(checksums));
        let mut text = serde_json::to_string_pretty(&Value::Object(meta))?;
        text.push('\n');
        write_atomic(&self.dir.join("run_meta.json"), text.as_bytes())
    }
}

fn load_instance(path: &Path) -> anyhow::Result<(Instance, String)> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading instance {}", path.display()))?;
    let instance = Instance::from_json(&text)
        .with_context(|| format!("parsing instance {}", path.display()))?;
    let report = validate_instance(&instance);
    if !report.is_empty() {
        let lines: Vec<String> = report
            .issues
            .iter()
            .map(|i| format!("  {}: {}", i.path, i.message))
            .collect();
        bail!(
            "instance {} is invalid:\n{}",
            path.display(),
            lines.join("\n")
        );
    }
    Ok((instance, sha256_hex(text.as_bytes())))
}

fn base_meta(command: &str, resolved: &Resolved, extra: Value) -> Map<String, Value> {
    let mut meta = Map::new();
    meta.insert("command".into(), Value::String(command.into()));
    meta.insert(
        "version".into(),
        Value::String(env!("CARGO_PKG_VERSION").into()),
    );
    if let Value::Object(extra) = extra {
        meta.extend(extra);
    }
    meta.insert(
        "config".into(),
        serde_json::to_value(&resolved.config).expect("configuration serializes"),
    );
    meta.insert(
        "adaptive_overridden".into(),
        Value::Bool(resolved.adaptive_overridden),
    );
    meta
}

fn apply_adaptive(instance: &mut Instance, resolved: &Resolved) {
    if resolved.adaptive_overridden {
        instance.adaptive_params = resolved.config.adaptive;
    }
}

fn scenario_batch(
    instance: &Instance,
    resolved: &Resolved,
    seed: Option<u64>,
) -> anyhow::Result<Vec<Scenario>> {
    match seed {
        Some(seed) => {
            let mut cfg = resolved.config.uncertainty.scenarios.clone();
            cfg.seed = seed;
            Ok(generate_scenarios(&cfg, instance)?)
        }
        None => instance
            .scenarios
            .clone()
            .filter(|s| !s.is_empty())
            .ok_or_else(|| anyhow!("instance has no scenarios; pass --seed to draw a batch")),
    }
}

fn outcome_ids(pairs: &[crate::analysis::ScenarioPair]) -> Vec<ScenarioOutcome> {
    pairs.iter().map(|p| p.adaptive.clone()).collect()
}

/// Runs one parsed command; returns the exit code.
pub fn execute(command: Command) -> anyhow::Result<i32> {
    match command {
        Command::Solve {
            instance,
            model,
            scenario_index,
            common,
        } => {
            let resolved = resolve_config(&common)?;
            let (mut inst, digest) = load_instance(&instance)?;
            apply_adaptive(&mut inst, &resolved);
            let scenario = inst
                .scenarios
                .as_ref()
                .and_then(|s| s.get(scenario_index))
                .cloned();
            if model == ModelKind::Adaptive
                && scenario.is_none()
                && inst.scenarios.as_ref().is_some_and(|s| !s.is_empty())
            {
                bail!("scenario index {scenario_index} out of range");
            }
            let result = solve_model(model, &inst, scenario.as_ref())?;
            let mut out = Artifacts::new(&common.output_dir);
            out.add_json("solution.json", &result)?;
            out.finish(base_meta(
                "solve",
                &resolved,
                json!({"instance": instance.display().to_string(), "instance_sha256": digest,
                       "model": model, "scenario_index": scenario_index}),
            ))?;
            if result.is_feasible() {
                println!(
                    "{model}: route {} objective {} hours {}",
                    result
                        .route
                        .as_ref()
                        .map(|r| r.to_string())
                        .unwrap_or_default(),
                    result.objective.map(fmt_sig).unwrap_or_default(),
                    result.total_travel_hours.map(fmt_sig).unwrap_or_default()
                );
                Ok(EXIT_OK)
            } else {
                eprintln!("{model}: infeasible");
                for d in &result.diagnostics {
                    eprintln!(
                        "  {}: best load {} vs bound {} (slack {})",
                        d.product_id,
                        fmt_sig(d.load),
                        fmt_sig(d.bound),
                        fmt_sig(d.slack)
                    );
                }
                Ok(EXIT_INFEASIBLE)
            }
        }
        Command::Generate { seed, common } => {
            let mut resolved = resolve_config(&common)?;
            resolved.config.synthetic.seed = seed;
            resolved.config.uncertainty.scenarios.seed = seed;
            let mut inst =
                generate_full_instance(&resolved.config.synthetic, &resolved.config.uncertainty)?;
            inst.adaptive_params = resolved.config.adaptive;
            let mut out = Artifacts::new(&common.output_dir);
            let mut text = inst.to_json();
            text.push('\n');
            out.add("instance.json", text);
            out.finish(base_meta("generate", &resolved, json!({"seed": seed})))?;
            println!(
                "instance with {} stops, {} products",
                inst.node_count() - 1,
                inst.products.len()
            );
            Ok(EXIT_OK)
        }
        Command::Scenarios {
            instance,
            seed,
            common,
        } => {
            let mut resolved = resolve_config(&common)?;
            resolved.config.uncertainty.scenarios.seed = seed;
            let (inst, digest) = load_instance(&instance)?;
            let batch = scenario_batch(&inst, &resolved, Some(seed))?;
            let mut out = Artifacts::new(&common.output_dir);
            out.add_json("scenarios.json", &batch)?;
            out.finish(base_meta(
                "scenarios",
                &resolved,
                json!({"instance": instance.display().to_string(), "instance_sha256": digest, "seed": seed}),
            ))?;
            println!("{} scenarios", batch.len());
            Ok(EXIT_OK)
        }
        Command::Compare {
            instance,
            seed,
            common,
        } => {
            let mut resolved = resolve_config(&common)?;
            if let Some(seed) = seed {
                resolved.config.uncertainty.scenarios.seed = seed;
            }
            let (mut inst, digest) = load_instance(&instance)?;
            apply_adaptive(&mut inst, &resolved);
            let batch = scenario_batch(&inst, &resolved, seed)?;
            let rows = compare_models(&inst, batch.first())?;
            let mut out = Artifacts::new(&common.output_dir);
            out.add("comparison.csv", comparison_csv(&rows));
            let infeasible: Vec<String> = rows
                .iter()
                .filter(|r| r.total_hours.is_none())
                .map(|r| r.model.to_string())
                .collect();
            let mut summary = Value::Null;
            if !infeasible.iter().any(|m| m == "deterministic") {
                let study = run_scenario_comparison(&inst, &batch)?;
                let ids: Vec<String> = inst.products.iter().map(|p| p.id.clone()).collect();
                out.add(
                    "scenario_outcomes.csv",
                    scenario_outcomes_csv(&study.pairs, &ids),
                );
                summary = serde_json::to_value(&study.summary)?;
            }
            out.add_json(
                "comparison_summary.json",
                &json!({"models": rows, "scenarios": summary}),
            )?;
            out.finish(base_meta(
                "compare",
                &resolved,
                json!({"instance": instance.display().to_string(), "instance_sha256": digest, "seed": seed}),
            ))?;
            for r in &rows {
                println!(
                    "{:<13} {}",
                    r.model.as_str(),
                    r.total_hours
                        .map(fmt_sig)
                        .unwrap_or_else(|| "infeasible".into())
                );
            }
            if infeasible.is_empty() {
                Ok(EXIT_OK)
            } else {
                eprintln!("infeasible: {}", infeasible.join(", "));
                Ok(EXIT_INFEASIBLE)
            }
        }
        Command::Pareto {
            instance,
            seed,
            common,
        } => {
            let mut resolved = resolve_config(&common)?;
            if let Some(seed) = seed {
                resolved.config.uncertainty.scenarios.seed = seed;
            }
            let (mut inst, digest) = load_instance(&instance)?;
            apply_adaptive(&mut inst, &resolved);
            let batch = scenario_batch(&inst, &resolved, seed)?;
            let study = match run_scenario_comparison(&inst, &batch) {
                Ok(s) => s,
                Err(crate::analysis::AnalysisError::NoReferenceRoute) => {
                    eprintln!("deterministic model is infeasible");
                    return Ok(EXIT_INFEASIBLE);
                }
                Err(e) => return Err(e.into()),
            };
            let frontier = pareto_frontier(&outcome_ids(&study.pairs));
            let ids: Vec<String> = inst.products.iter().map(|p| p.id.clone()).collect();
            let mut out = Artifacts::new(&common.output_dir);
            out.add("pareto.csv", pareto_csv(&frontier));
            out.add(
                "scenario_outcomes.csv",
                scenario_outcomes_csv(&study.pairs, &ids),
            );
            out.finish(base_meta(
                "pareto",
                &resolved,
                json!({"instance": instance.display().to_string(), "instance_sha256": digest, "seed": seed}),
            ))?;
            println!(
                "{} of {} outcomes on the frontier",
                frontier.len(),
                batch.len()
            );
            Ok(EXIT_OK)
        }
        Command::Sweep {
            param,
            grid,
            reps,
            seed,
            instance,
            common,
        } => {
            let mut resolved = resolve_config(&common)?;
            resolved.config.synthetic.seed = seed;
            resolved.config.uncertainty.scenarios.seed = seed;
            let grid_text = grid.unwrap_or_else(|| match param {
                SweepParam::Beta => "0:1:0.1".into(),
                SweepParam::Tau => "0.25,0.5,1,1.5,2".into(),
            });
            let values = parse_grid(&grid_text)?;
            let (mut inst, digest) = match &instance {
                Some(path) => {
                    let (i, d) = load_instance(path)?;
                    (i, Some(d))
                }
                None => (generate_instance(&resolved.config.synthetic)?, None),
            };
            apply_adaptive(&mut inst, &resolved);
            let scen = resolved.config.uncertainty.scenarios.clone();
            let (result, name) = match param {
                SweepParam::Beta => (sweep_beta(&inst, &values, reps, &scen)?, "sweep_beta.csv"),
                SweepParam::Tau => (
                    sweep_tau(&inst, &values, reps, &scen, resolved.config.sweep_beta)?,
                    "sweep_tau.csv",
                ),
            };
            let mut out = Artifacts::new(&common.output_dir);
            out.add(name, sweep_csv(&result));
            out.finish(base_meta(
                "sweep",
                &resolved,
                json!({"param": param, "grid": values, "reps": reps, "seed": seed,
                       "instance": instance.map(|p| p.display().to_string()), "instance_sha256": digest}),
            ))?;
            for i in 0..result.grid.len() {
                println!(
                    "{} {}: deviation {} shelf life {} d",
                    result.parameter_name,
                    fmt_sig(result.grid[i]),
                    fmt_sig(result.mean_deviation[i]),
                    fmt_sig(result.mean_final_shelf_life[i])
                );
            }
            Ok(EXIT_OK)
        }
        Command::Ingest {
            input,
            trip_start,
            common,
        } => {
            let resolved = resolve_config(&common)?;
            let log = read_sensor_csv(&input)?;
            let start = match &trip_start {
                Some(s) => DateTime::parse_from_rfc3339(s)
                    .with_context(|| format!("bad --trip-start '{s}'"))?
                    .with_timezone(&Utc),
                None => log.records[0].timestamp,
            };
            let profile = log_to_profile(&log, start)?;
            let mut csv = String::from("hours,temperature_c\n");
            for (t, c) in profile.samples() {
                csv.push_str(&format!("{},{}\n", fmt_sig(*t), fmt_sig(*c)));
            }
            let summary = json!({
                "tag_id": log.tag_id,
                "records": profile.len(),
                "duration_hours": profile.duration(),
                "mean_temperature_c": profile.mean_temperature(),
            });
            let digest = sha256_hex(&fs::read(&input)?);
            let mut out = Artifacts::new(&common.output_dir);
            out.add("profile.csv", csv);
            out.add_json("ingest_summary.json", &summary)?;
            out.finish(base_meta(
                "ingest",
                &resolved,
                json!({"input": input.display().to_string(), "input_sha256": digest,
                       "trip_start": start.to_rfc3339_opts(chrono::SecondsFormat::AutoSi, true)}),
            ))?;
            println!(
                "{}: {} records over {} h, mean {} °C",
                log.tag_id,
                profile.len(),
                fmt_sig(profile.duration()),
                fmt_sig(profile.mean_temperature())
            );
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_INPUT
        }
    }
}
