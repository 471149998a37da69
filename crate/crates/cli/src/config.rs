//! Run settings from `key = value` files merged under command-line flags.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use conservo::harness::{find, Experiment, VORTEX_COUNT, VORTEX_SEED};
use conservo::steppers::{BaseScheme, Method, StepperConfig};

/// Settings shared by `run`, `table` and `convergence`. Every field is
/// optional; unset fields fall back to the config file, then to the
/// experiment's defaults.
#[derive(clap::Args, Debug, Clone, Default)]
pub struct Overrides {
    /// Registered experiment name (see `conservo list`).
    #[arg(long)]
    pub experiment: Option<String>,
    /// Integration method.
    #[arg(long)]
    pub method: Option<String>,
    /// Comma-separated methods for `table`.
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<String>>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub t_final: Option<f64>,
    /// Tolerance on the conserved-quantity defect.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Tolerance on successive fixed-point iterates.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// Keep every k-th state in the trajectory output.
    #[arg(long)]
    pub decimate: Option<usize>,
    /// Seed of the random vortex configuration.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of vortices.
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub base_scheme: Option<String>,
    /// Use the closed-form corrections when there are at most two invariants.
    #[arg(long)]
    pub fast_path: bool,
    /// Number of step halvings for `convergence`.
    #[arg(long)]
    pub halvings: Option<usize>,
    /// `key = value` settings file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Fully resolved settings.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub methods: Vec<Method>,
    pub stepper: StepperConfig,
    pub t_final: f64,
    pub output_dir: PathBuf,
    pub decimate: usize,
    pub seed: u64,
    pub count: usize,
    pub halvings: usize,
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| format!("{key}: cannot parse '{value}': {e}"))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, String> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("{key}: expected true or false, got '{value}'")),
    }
}

/// Parses a settings file: one `key = value` per line, `#` starts a comment,
/// `-` and `_` are interchangeable in keys.
pub fn parse_config(text: &str) -> Result<Overrides, String> {
    let mut o = Overrides::default();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!("line {}: expected 'key = value', got '{line}'", n + 1));
        };
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        let k = key.as_str();
        match k {
            "experiment" => o.experiment = Some(value.to_string()),
            "method" => o.method = Some(value.to_string()),
            "methods" => o.methods = Some(value.split(',').map(|s| s.trim().to_string()).collect()),
            "tau" => o.tau = Some(parse(k, value)?),
            "t_final" => o.t_final = Some(parse(k, value)?),
            "delta" => o.delta = Some(parse(k, value)?),
            "epsilon" => o.epsilon = Some(parse(k, value)?),
            "max_iters" => o.max_iters = Some(parse(k, value)?),
            "output_dir" => o.output_dir = Some(PathBuf::from(value)),
            "decimate" => o.decimate = Some(parse(k, value)?),
            "seed" => o.seed = Some(parse(k, value)?),
            "count" => o.count = Some(parse(k, value)?),
            "base_scheme" => o.base_scheme = Some(value.to_string()),
            "fast_path" => o.fast_path = parse_bool(k, value)?,
            "halvings" => o.halvings = Some(parse(k, value)?),
            _ => return Err(format!("line {}: unknown key '{k}'", n + 1)),
        }
    }
    Ok(o)
}

pub fn load_config(path: &Path) -> Result<Overrides, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("config {}: {e}", path.display()))?;
    parse_config(&text).map_err(|e| format!("config {}: {e}", path.display()))
}

impl Overrides {
    /// Fields set here win over `base`.
    pub fn over(self, base: Overrides) -> Overrides {
        Overrides {
            experiment: self.experiment.or(base.experiment),
            method: self.method.or(base.method),
            methods: self.methods.or(base.methods),
            tau: self.tau.or(base.tau),
            t_final: self.t_final.or(base.t_final),
            delta: self.delta.or(base.delta),
            epsilon: self.epsilon.or(base.epsilon),
            max_iters: self.max_iters.or(base.max_iters),
            output_dir: self.output_dir.or(base.output_dir),
            decimate: self.decimate.or(base.decimate),
            seed: self.seed.or(base.seed),
            count: self.count.or(base.count),
            base_scheme: self.base_scheme.or(base.base_scheme),
            fast_path: self.fast_path || base.fast_path,
            halvings: self.halvings.or(base.halvings),
            config: self.config.or(base.config),
        }
    }

    /// Merges in the config file (if any) and resolves names and defaults.
    /// `need_method` asks for a single `method`; otherwise `methods` (or the
    /// default table set) is used.
    pub fn resolve(self, need_method: bool) -> Result<RunConfig, String> {
        let o = match &self.config {
            Some(path) => {
                let file = load_config(path)?;
                self.over(file)
            }
            None => self,
        };
        let name = o.experiment.ok_or("experiment: missing (use --experiment or the config file)")?;
        let experiment = find(&name).map_err(|e| format!("experiment: {e}"))?;
        let methods: Vec<Method> = if need_method {
            let m = o.method.ok_or("method: missing (use --method or the config file)")?;
            vec![Method::from_str(&m).map_err(|e| format!("method: {e}"))?]
        } else {
            match (o.methods, o.method) {
                (Some(list), _) => list
                    .iter()
                    .map(|m| Method::from_str(m).map_err(|e| format!("methods: {e}")))
                    .collect::<Result<_, _>>()?,
                (None, Some(m)) => vec![Method::from_str(&m).map_err(|e| format!("method: {e}"))?],
                (None, None) => Method::TABLE.to_vec(),
            }
        };
        let base_scheme = match o.base_scheme {
            Some(s) => BaseScheme::from_str(&s).map_err(|e| format!("base_scheme: {e}"))?,
            None => BaseScheme::default(),
        };
        let stepper = StepperConfig {
            tau: o.tau.unwrap_or(experiment.tau),
            delta: o.delta.unwrap_or(experiment.delta),
            epsilon: o.epsilon.unwrap_or(experiment.epsilon),
            max_iters: o.max_iters.unwrap_or(experiment.max_iters),
            method: methods[0],
            base_scheme,
            fast_path: o.fast_path,
            ..StepperConfig::default()
        };
        stepper.validate().map_err(|e| e.to_string())?;
        let t_final = o.t_final.unwrap_or(experiment.t_final);
        if t_final <= experiment.t0 || !t_final.is_finite() {
            return Err(format!("t_final: must be finite and greater than {}, got {t_final}", experiment.t0));
        }
        let decimate = o.decimate.unwrap_or(1);
        if decimate == 0 {
            return Err("decimate: must be at least 1".into());
        }
        let count = o.count.unwrap_or(VORTEX_COUNT);
        if count < 2 {
            return Err(format!("count: need at least 2 vortices, got {count}"));
        }
        let halvings = o.halvings.unwrap_or(3);
        if halvings < 2 {
            return Err(format!("halvings: need at least 2, got {halvings}"));
        }
        Ok(RunConfig {
            experiment,
            methods,
            stepper,
            t_final,
            output_dir: o.output_dir.unwrap_or_else(|| PathBuf::from(".")),
            decimate,
            seed: o.seed.unwrap_or(VORTEX_SEED),
            count,
            halvings,
        })
    }
}
