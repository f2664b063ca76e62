//! Flat `key = value` experiment configuration.
//!
//! One key per line, `#` starts a comment, blank lines are ignored. Unknown
//! keys are rejected and missing keys take the defaults below.
//!
//! | key                      | default      | meaning                                   |
//! |--------------------------|--------------|-------------------------------------------|
//! | `sampler`                | `srs`        | `srs`, `epoch` or `replacement`           |
//! | `classes`                | `10`         | number of blob classes                    |
//! | `ipc_train`              | `50`         | training samples per class                |
//! | `ipc_test`               | `20`         | test samples per class                    |
//! | `dim`                    | `16`         | feature dimension                         |
//! | `sigma_means`            | `1`          | scale of the class-mean distribution      |
//! | `sigma_noise`            | `1`          | within-class noise scale                  |
//! | `hidden`                 | `64`         | hidden-layer width                        |
//! | `learning_rate`          | `0.1`        | initial learning rate                     |
//! | `momentum`               | `0.9`        | momentum coefficient, in `[0, 1)`         |
//! | `weight_decay`           | `0.0005`     | coupled L2 decay on weight matrices       |
//! | `lr_milestones`          | `60,75,87`   | effective epochs where the rate decays    |
//! | `lr_decay`               | `0.1`        | factor applied at each milestone          |
//! | `total_effective_epochs` | `100`        | training length                           |
//! | `batch_size`             | `64`         | mini-batch size                           |
//! | `seed`                   | `0`          | single source of all randomness           |
//! | `compare_samplers`       | `sampler`    | `compare` grid: sampler kinds             |
//! | `compare_schedules`      | the schedule | `compare` grid: `m1/m2/...:decay` entries |
//! | `compare_seeds`          | `seed`       | `compare` grid: seeds                     |
//! | `compare_cells`          | (unset)      | explicit `sampler@m1/m2:decay` cells      |
//!
//! When `compare_cells` is set it replaces the sampler x schedule cross
//! product, which lets a grid pair different samplers with different
//! schedules.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::sampling::SamplerKind;
use crate::training::{LrSchedule, TrainConfig};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config file not found: {0}")]
    MissingFile(PathBuf),
    #[error("cannot read config file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Malformed { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: cannot parse `{value}` for `{key}`: {reason}")]
    InvalidValue {
        line: usize,
        key: String,
        value: String,
        reason: String,
    },
    #[error("`{key}` out of range: {reason}")]
    OutOfRange { key: String, reason: String },
}

/// A learning-rate schedule as written in a grid: `60/75/87:0.1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleSpec {
    pub milestones: Vec<f64>,
    pub decay: f64,
}

impl ScheduleSpec {
    pub fn milestones_string(&self) -> String {
        join(&self.milestones, "/")
    }
}

impl fmt::Display for ScheduleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.milestones_string(), self.decay)
    }
}

impl FromStr for ScheduleSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (ms, decay) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| format!("schedule `{s}` is not `m1/m2/...:decay`"))?;
        let milestones = if ms.trim().is_empty() {
            Vec::new()
        } else {
            ms.split('/').map(parse_num::<f64>).collect::<Result<_, _>>()?
        };
        Ok(Self {
            milestones,
            decay: parse_num(decay)?,
        })
    }
}

/// The `compare` grid. Empty lists fall back to the base config.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CompareGrid {
    pub samplers: Vec<SamplerKind>,
    pub schedules: Vec<ScheduleSpec>,
    pub seeds: Vec<u64>,
    pub cells: Vec<(SamplerKind, ScheduleSpec)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentConfig {
    pub train: TrainConfig,
    pub compare: CompareGrid,
}

impl ExperimentConfig {
    pub fn base_schedule(&self) -> ScheduleSpec {
        ScheduleSpec {
            milestones: self.train.lr_milestones.clone(),
            decay: self.train.lr_decay,
        }
    }

    /// Grid cells in output order.
    pub fn cells(&self) -> Vec<(SamplerKind, ScheduleSpec)> {
        if !self.compare.cells.is_empty() {
            return self.compare.cells.clone();
        }
        let samplers = if self.compare.samplers.is_empty() {
            vec![self.train.sampler]
        } else {
            self.compare.samplers.clone()
        };
        let schedules = if self.compare.schedules.is_empty() {
            vec![self.base_schedule()]
        } else {
            self.compare.schedules.clone()
        };
        samplers
            .iter()
            .flat_map(|&k| schedules.iter().map(move |s| (k, s.clone())))
            .collect()
    }

    pub fn seeds(&self) -> Vec<u64> {
        if self.compare.seeds.is_empty() {
            vec![self.train.seed]
        } else {
            self.compare.seeds.clone()
        }
    }

    /// The base config with one grid cell applied.
    pub fn cell_config(&self, sampler: SamplerKind, schedule: &ScheduleSpec, seed: u64) -> TrainConfig {
        TrainConfig {
            sampler,
            lr_milestones: schedule.milestones.clone(),
            lr_decay: schedule.decay,
            seed,
            ..self.train.clone()
        }
    }

    pub fn parse_str(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ExperimentConfig::default();
        let mut seen: Vec<&str> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Malformed {
                line,
                text: raw.trim().to_string(),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(ConfigError::Malformed {
                    line,
                    text: raw.trim().to_string(),
                });
            }
            let Some(&known) = KEYS.iter().find(|&&k| k == key) else {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                });
            };
            if seen.contains(&known) {
                return Err(ConfigError::DuplicateKey {
                    line,
                    key: key.to_string(),
                });
            }
            seen.push(known);
            cfg.set(known, value).map_err(|reason| ConfigError::InvalidValue {
                line,
                key: key.to_string(),
                value: value.to_string(),
                reason,
            })?;
        }
        cfg.check_ranges()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, v: &str) -> Result<(), String> {
        let t = &mut self.train;
        match key {
            "sampler" => t.sampler = v.parse().map_err(|e| format!("{e}"))?,
            "classes" => t.data.classes = parse_num(v)?,
            "ipc_train" => t.data.ipc_train = parse_num(v)?,
            "ipc_test" => t.data.ipc_test = parse_num(v)?,
            "dim" => t.data.dim = parse_num(v)?,
            "sigma_means" => t.data.sigma_means = parse_num(v)?,
            "sigma_noise" => t.data.sigma_noise = parse_num(v)?,
            "hidden" => t.hidden = parse_num(v)?,
            "learning_rate" => t.learning_rate = parse_num(v)?,
            "momentum" => t.momentum = parse_num(v)?,
            "weight_decay" => t.weight_decay = parse_num(v)?,
            "lr_milestones" => t.lr_milestones = parse_list(v, parse_num)?,
            "lr_decay" => t.lr_decay = parse_num(v)?,
            "total_effective_epochs" => t.total_effective_epochs = parse_num(v)?,
            "batch_size" => t.batch_size = parse_num(v)?,
            "seed" => t.seed = parse_num(v)?,
            "compare_samplers" => {
                self.compare.samplers = parse_list(v, |s| s.parse().map_err(|e| format!("{e}")))?
            }
            "compare_schedules" => self.compare.schedules = parse_list(v, str::parse)?,
            "compare_seeds" => self.compare.seeds = parse_list(v, parse_num)?,
            "compare_cells" => self.compare.cells = parse_list(v, parse_cell)?,
            _ => unreachable!("key list and setter disagree on `{key}`"),
        }
        Ok(())
    }

    fn check_ranges(&self) -> Result<(), ConfigError> {
        let t = &self.train;
        let bad = |key: &str, reason: String| {
            Err(ConfigError::OutOfRange {
                key: key.to_string(),
                reason,
            })
        };
        for (key, v) in [
            ("classes", t.data.classes),
            ("ipc_train", t.data.ipc_train),
            ("ipc_test", t.data.ipc_test),
            ("dim", t.data.dim),
            ("hidden", t.hidden),
            ("batch_size", t.batch_size),
        ] {
            if v == 0 {
                return bad(key, "must be at least 1".into());
            }
        }
        if t.total_effective_epochs == 0 {
            return bad("total_effective_epochs", "must be at least 1".into());
        }
        for (key, v) in [
            ("sigma_means", t.data.sigma_means),
            ("sigma_noise", t.data.sigma_noise),
            ("learning_rate", t.learning_rate),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(key, format!("must be positive, got {v}"));
            }
        }
        if !(0.0..1.0).contains(&t.momentum) {
            return bad("momentum", format!("must lie in [0, 1), got {}", t.momentum));
        }
        if !(t.weight_decay >= 0.0 && t.weight_decay.is_finite()) {
            return bad("weight_decay", format!("must be nonnegative, got {}", t.weight_decay));
        }
        if let Err(e) = LrSchedule::new(t.learning_rate, t.lr_milestones.clone(), t.lr_decay) {
            return bad("lr_milestones/lr_decay", e.to_string());
        }
        if t.batch_size > t.train_size() {
            return bad(
                "batch_size",
                format!(
                    "{} exceeds the training set size classes * ipc_train = {}",
                    t.batch_size,
                    t.train_size()
                ),
            );
        }
        let grid_schedules = self
            .compare
            .schedules
            .iter()
            .chain(self.compare.cells.iter().map(|(_, s)| s));
        for s in grid_schedules {
            if let Err(e) = LrSchedule::new(t.learning_rate, s.milestones.clone(), s.decay) {
                return bad("compare schedule", format!("`{s}`: {e}"));
            }
        }
        Ok(())
    }

    /// Normal form: every training key in table order, then any grid keys
    /// that are set.
    pub fn to_config_string(&self) -> String {
        let t = &self.train;
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        put("sampler", t.sampler.to_string());
        put("classes", t.data.classes.to_string());
        put("ipc_train", t.data.ipc_train.to_string());
        put("ipc_test", t.data.ipc_test.to_string());
        put("dim", t.data.dim.to_string());
        put("sigma_means", t.data.sigma_means.to_string());
        put("sigma_noise", t.data.sigma_noise.to_string());
        put("hidden", t.hidden.to_string());
        put("learning_rate", t.learning_rate.to_string());
        put("momentum", t.momentum.to_string());
        put("weight_decay", t.weight_decay.to_string());
        put("lr_milestones", join(&t.lr_milestones, ","));
        put("lr_decay", t.lr_decay.to_string());
        put("total_effective_epochs", t.total_effective_epochs.to_string());
        put("batch_size", t.batch_size.to_string());
        put("seed", t.seed.to_string());
        let c = &self.compare;
        if !c.samplers.is_empty() {
            put("compare_samplers", join(&c.samplers, ","));
        }
        if !c.schedules.is_empty() {
            put("compare_schedules", join(&c.schedules, ","));
        }
        if !c.seeds.is_empty() {
            put("compare_seeds", join(&c.seeds, ","));
        }
        if !c.cells.is_empty() {
            let cells: Vec<String> = c.cells.iter().map(|(k, s)| format!("{k}@{s}")).collect();
            put("compare_cells", cells.join(","));
        }
        out
    }
}

pub const KEYS: [&str; 20] = [
    "sampler",
    "classes",
    "ipc_train",
    "ipc_test",
    "dim",
    "sigma_means",
    "sigma_noise",
    "hidden",
    "learning_rate",
    "momentum",
    "weight_decay",
    "lr_milestones",
    "lr_decay",
    "total_effective_epochs",
    "batch_size",
    "seed",
    "compare_samplers",
    "compare_schedules",
    "compare_seeds",
    "compare_cells",
];

pub fn parse_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            ConfigError::MissingFile(path.to_path_buf())
        } else {
            ConfigError::Io {
                path: path.to_path_buf(),
                source: e,
            }
        }
    })?;
    ExperimentConfig::parse_str(&text)
}

fn parse_num<T: FromStr>(s: &str) -> Result<T, String>
where
    T::Err: fmt::Display,
{
    s.trim().parse::<T>().map_err(|e| e.to_string())
}

fn parse_list<T>(s: &str, item: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|p| item(p.trim())).collect()
}

fn parse_cell(s: &str) -> Result<(SamplerKind, ScheduleSpec), String> {
    let (kind, sched) = s
        .split_once('@')
        .ok_or_else(|| format!("cell `{s}` is not `sampler@m1/m2/...:decay`"))?;
    let kind = kind.parse::<SamplerKind>().map_err(|e| e.to_string())?;
    Ok((kind, sched.parse()?))
}

fn join<T: fmt::Display>(items: &[T], sep: &str) -> String {
    items.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep)
}
