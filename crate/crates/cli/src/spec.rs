//! Resolution of command line and config file into an `ExperimentSpec`, and
//! its validation against the preconditions of the core modules.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sos_core::analysis::{
    matched_sides, DEFAULT_BOOTSTRAP_REPLICATES, DEFAULT_CRITICAL_BAND, DEFAULT_EPSILON,
};
use sos_core::lattice::{repulsion_fraction, SimConfig};
use sos_core::sampler::{state_space_size, ENUMERATION_LIMIT};
use sos_core::wulff::SurfaceTension;

use crate::args::{AnalysisArgs, Cli, Command, SimArgs};
use crate::error::CliError;
use crate::params::Params;

pub const OUTPUT_ROOT_ENV: &str = "SOS_OUTPUT_ROOT";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub tension: String,
    pub directions: usize,
    pub xi: f64,
    pub epsilon: f64,
    pub critical_band: f64,
    pub bootstrap: usize,
    pub allow_next_view: bool,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            tension: "numeric-sos".into(),
            directions: 256,
            xi: 0.5,
            epsilon: DEFAULT_EPSILON,
            critical_band: DEFAULT_CRITICAL_BAND,
            bootstrap: DEFAULT_BOOTSTRAP_REPLICATES,
            allow_next_view: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleTask {
    pub config: SimConfig,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeTask {
    pub input: PathBuf,
    pub options: AnalysisOptions,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WulffTask {
    pub tension: String,
    pub beta: Option<f64>,
    pub directions: usize,
    pub radii: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTask {
    /// Template for every cell; side, seed and default cap are filled per cell.
    pub base: SimConfig,
    pub cap_override: Option<u32>,
    pub sides: Vec<usize>,
    pub seeds: Vec<u64>,
    pub samples: usize,
    pub save_fields: bool,
    pub options: AnalysisOptions,
}

impl SweepTask {
    pub fn cell_config(&self, side: usize, seed: u64) -> SimConfig {
        let mut c = SimConfig::new(side, self.base.beta).with_seed(seed);
        if let Some(cap) = self.cap_override {
            c.height_cap = cap;
        }
        c.sweeps = self.base.sweeps;
        c.burn_in = self.base.burn_in;
        c.e_h_threshold = self.base.e_h_threshold;
        c.start_level = self.base.start_level;
        c.alpha_c = self.base.alpha_c;
        c
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleTask {
    pub side: usize,
    pub cap: u32,
    pub beta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Task {
    Sample(SampleTask),
    Analyze(AnalyzeTask),
    Wulff(WulffTask),
    Sweep(SweepTask),
    Oracle(OracleTask),
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Sample(_) => "sample",
            Task::Analyze(_) => "analyze",
            Task::Wulff(_) => "wulff",
            Task::Sweep(_) => "sweep",
            Task::Oracle(_) => "oracle",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    /// Not recorded in artifacts, so that runs in different places compare equal.
    #[serde(skip)]
    pub out_dir: PathBuf,
    pub svg: bool,
    pub task: Task,
}

fn required<T>(v: Option<T>, key: &str, owner: &str, missing: &mut Vec<String>) -> Option<T> {
    if v.is_none() {
        missing.push(format!("{owner}: '{key}' is required"));
    }
    v
}

fn sim_config(
    p: &Params,
    a: &SimArgs,
    side: usize,
    beta: f64,
) -> Result<SimConfig, CliError> {
    let mut c = SimConfig::new(side, beta);
    if let Some(cap) = p.get("cap", a.cap)? {
        c.height_cap = cap;
    }
    c.sweeps = p.get("sweeps", a.sweeps)?.unwrap_or(10);
    c.burn_in = p.get("burn_in", a.burn_in)?.unwrap_or(1000);
    c.seed = p.get("seed", a.seed)?.unwrap_or(0);
    if let Some(t) = p.get("e_h_threshold", a.e_h_threshold)? {
        c.e_h_threshold = t;
    }
    c.start_level = p.get("start_level", a.start_level)?;
    c.alpha_c = p.get("alpha_c", a.alpha_c)?;
    Ok(c)
}

fn analysis_options(p: &Params, a: &AnalysisArgs) -> Result<AnalysisOptions, CliError> {
    let d = AnalysisOptions::default();
    Ok(AnalysisOptions {
        tension: p.get("tension", a.tension.clone())?.unwrap_or(d.tension),
        directions: p.get("directions", a.directions)?.unwrap_or(d.directions),
        xi: p.get("xi", a.xi)?.unwrap_or(d.xi),
        epsilon: p.get("epsilon", a.epsilon)?.unwrap_or(d.epsilon),
        critical_band: p.get("critical_band", a.critical_band)?.unwrap_or(d.critical_band),
        bootstrap: p.get("bootstrap", a.bootstrap)?.unwrap_or(d.bootstrap),
        allow_next_view: p.get("allow_next_view", a.allow_next_view)?.unwrap_or(d.allow_next_view),
    })
}

/// Output directory: the flag, else `$SOS_OUTPUT_ROOT/<command>`, else `sos-output/<command>`.
pub fn output_dir(flag: Option<&Path>, env_root: Option<&str>, command: &str) -> PathBuf {
    match (flag, env_root) {
        (Some(dir), _) => dir.to_path_buf(),
        (None, Some(root)) if !root.is_empty() => Path::new(root).join(command),
        _ => Path::new("sos-output").join(command),
    }
}

/// Merges flags over the config file. Missing required keys and unknown
/// config keys come back as a validation error.
pub fn resolve(cli: &Cli, params: &Params, env_root: Option<&str>) -> Result<ExperimentSpec, CliError> {
    let mut missing = Vec::new();
    let task = match &cli.command {
        Command::Sample(a) => {
            let side = required(params.get("side", a.sim.side)?, "side", "SimConfig", &mut missing);
            let beta = required(params.get("beta", a.sim.beta)?, "beta", "SimConfig", &mut missing);
            let samples = params.get("samples", a.samples)?.unwrap_or(10);
            let config = sim_config(params, &a.sim, side.unwrap_or(1), beta.unwrap_or(1.0))?;
            Task::Sample(SampleTask { config, samples })
        }
        Command::Analyze(a) => {
            let input = required(params.get("input", a.input.clone())?, "input", "cli", &mut missing);
            Task::Analyze(AnalyzeTask {
                input: input.unwrap_or_default(),
                options: analysis_options(params, &a.analysis)?,
            })
        }
        Command::Wulff(a) => {
            let radii = params.list("radii", a.radii.clone())?;
            Task::Wulff(WulffTask {
                tension: params.get("tension", a.tension.clone())?.unwrap_or_else(|| "constant".into()),
                beta: params.get("beta", a.beta)?,
                directions: params.get("directions", a.directions)?.unwrap_or(512),
                radii: if radii.is_empty() { vec![0.25] } else { radii },
            })
        }
        Command::Sweep(a) => {
            if params.get("side", a.sim.side)?.is_some() {
                missing.push("cli: sweep takes 'sides' (or 'target_alpha'), not 'side'".into());
            }
            let beta = required(params.get("beta", a.sim.beta)?, "beta", "SimConfig", &mut missing);
            let beta_v = beta.unwrap_or(1.0);
            let mut sides = params.list("sides", a.sides.clone())?;
            let target = params.get("target_alpha", a.target_alpha)?;
            let min_side = params.get("min_side", a.min_side)?.unwrap_or(1);
            let max_side = params.get("max_side", a.max_side)?;
            match (sides.is_empty(), target) {
                (false, Some(_)) => missing.push("cli: give either 'sides' or 'target_alpha', not both".into()),
                (true, Some(t)) => match max_side {
                    Some(max) if t >= 0.0 && t < 1.0 => sides = matched_sides(beta_v, t, min_side, max),
                    Some(_) => missing.push(format!("analysis: target_alpha must be in [0, 1), got {t}")),
                    None => missing.push("cli: 'target_alpha' needs 'max_side'".into()),
                },
                (true, None) => missing.push("cli: 'sides' or 'target_alpha' is required".into()),
                (false, None) => {}
            }
            let seeds = params.list("seeds", a.seeds.clone())?;
            let base = sim_config(params, &a.sim, 1, beta_v)?;
            Task::Sweep(SweepTask {
                cap_override: params.get("cap", a.sim.cap)?,
                base,
                sides,
                seeds: if seeds.is_empty() { vec![0] } else { seeds },
                samples: params.get("samples", a.samples)?.unwrap_or(10),
                save_fields: params.get("save_fields", a.save_fields)?.unwrap_or(false),
                options: analysis_options(params, &a.analysis)?,
            })
        }
        Command::Oracle(a) => {
            let side = required(params.get("side", a.side)?, "side", "sampler", &mut missing);
            let cap = required(params.get("cap", a.cap)?, "cap", "sampler", &mut missing);
            let beta = required(params.get("beta", a.beta)?, "beta", "sampler", &mut missing);
            Task::Oracle(OracleTask {
                side: side.unwrap_or(1),
                cap: cap.unwrap_or(1),
                beta: beta.unwrap_or(1.0),
            })
        }
    };
    for key in params.unused() {
        missing.push(format!("cli: unknown config key '{key}' for {}", task.name()));
    }
    if !missing.is_empty() {
        return Err(CliError::Validation(missing));
    }
    let out_dir = output_dir(cli.out.as_deref(), env_root, task.name());
    Ok(ExperimentSpec { out_dir, svg: !cli.no_svg, task })
}

fn validate_options(o: &AnalysisOptions, beta: f64, out: &mut Vec<String>) {
    if let Err(e) = SurfaceTension::named(&o.tension, Some(beta)) {
        out.push(format!("wulff: {e}"));
    }
    if o.directions < 8 {
        out.push(format!("wulff: directions must be >= 8, got {}", o.directions));
    }
    if !(o.xi > 0.0 && o.xi < 1.0) {
        out.push(format!("analysis: xi must be in (0, 1), got {}", o.xi));
    }
    if !(o.epsilon >= 0.0 && o.epsilon.is_finite()) {
        out.push(format!("analysis: epsilon must be >= 0, got {}", o.epsilon));
    }
    if !(o.critical_band >= 0.0 && o.critical_band < 1.0) {
        out.push(format!("analysis: critical_band must be in [0, 1), got {}", o.critical_band));
    }
    if o.bootstrap < 1 {
        out.push("analysis: bootstrap must be >= 1".into());
    }
}

/// Every precondition the spec violates, each prefixed with its owning module.
pub fn validate(spec: &ExperimentSpec) -> Vec<String> {
    let mut out = Vec::new();
    match &spec.task {
        Task::Sample(t) => {
            out.extend(t.config.violations());
            if t.samples < 1 {
                out.push("sampler: samples must be >= 1".into());
            }
        }
        Task::Analyze(t) => {
            let manifest = t.input.join(crate::artifacts::MANIFEST);
            if !manifest.is_file() {
                out.push(format!("cli: input {} has no manifest", t.input.display()));
            }
            // beta is only known once the run is read; check the rest now
            validate_options(&t.options, 1.0, &mut out);
        }
        Task::Wulff(t) => {
            match SurfaceTension::named(&t.tension, t.beta) {
                Err(e) => out.push(format!("wulff: {e}")),
                Ok(tension) if t.directions >= 8 => {
                    if let Ok(body) = sos_core::wulff::wulff_body(&tension, t.directions) {
                        let fit = body.max_fitting_dilation();
                        for r in t.radii.iter().filter(|r| **r > fit && **r < 1.0) {
                            out.push(format!(
                                "wulff: dilated body does not fit in the box for radius {r} (max {fit:.4})"
                            ));
                        }
                    }
                }
                Ok(_) => {}
            }
            if t.directions < 8 {
                out.push(format!("wulff: directions must be >= 8, got {}", t.directions));
            }
            if t.radii.is_empty() {
                out.push("wulff: at least one radius is required".into());
            }
            for r in &t.radii {
                if !(*r > 0.0 && *r < 1.0) {
                    out.push(format!("wulff: radius {r} outside (0, 1)"));
                }
            }
            for (k, a) in t.radii.iter().enumerate() {
                if t.radii[k + 1..].iter().any(|b| (a - b).abs() < 1e-12) {
                    out.push(format!("wulff: radius {a} repeated"));
                }
            }
        }
        Task::Sweep(t) => {
            let mut distinct = t.sides.clone();
            distinct.sort_unstable();
            distinct.dedup();
            if distinct.len() < 3 {
                out.push(format!(
                    "analysis: exponent fit needs >= 3 distinct box sizes, got {}",
                    distinct.len()
                ));
            }
            if t.samples < 1 {
                out.push("sampler: samples must be >= 1".into());
            }
            let mut seeds = t.seeds.clone();
            seeds.sort_unstable();
            seeds.dedup();
            if seeds.len() != t.seeds.len() {
                out.push("cli: seeds repeat".into());
            }
            for &side in &distinct {
                let c = t.cell_config(side, 0);
                out.extend(c.violations().into_iter().map(|v| format!("{v} (L = {side})")));
                let alpha = repulsion_fraction(side, c.beta);
                if !t.options.allow_next_view && alpha <= c.alpha_c() {
                    out.push(format!(
                        "analysis: L = {side} has alpha {alpha:.4} <= alpha_c {:.4}; fluctuation fit needs the supercritical branch",
                        c.alpha_c()
                    ));
                }
            }
            validate_options(&t.options, t.base.beta, &mut out);
        }
        Task::Oracle(t) => {
            let probe = SimConfig::new(t.side, t.beta).with_cap(t.cap);
            out.extend(probe.violations());
            match state_space_size(t.side, t.cap) {
                Some(n) if n <= ENUMERATION_LIMIT => {}
                Some(n) => out.push(format!(
                    "sampler: enumeration guard: (M+1)^(L^2) = {n} exceeds {ENUMERATION_LIMIT}"
                )),
                None => out.push(format!(
                    "sampler: enumeration guard: (M+1)^(L^2) overflows for L = {}, M = {}",
                    t.side, t.cap
                )),
            }
        }
    }
    out
}
