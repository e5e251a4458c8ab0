use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use scrl::product::{RewardConfig, RewardMode, DEFAULT_KAPPA};
use scrl::qlearn::{LearningRate, TrainConfig};
use scrl::system::{
    lipschitz_linear_gaussian, make_bmw, make_room, make_traffic, Dynamics, Labeler,
    LinearGaussian, Scenario, StateBox, SystemModel,
};

use crate::error::CliError;

/// Keys accepted in configuration files; flags use the same names with
/// dashes.
pub const KEYS: &[&str] = &[
    "system",
    "formula",
    "props",
    "horizon",
    "delta",
    "epsilon",
    "deltas",
    "lipschitz",
    "lebesgue",
    "episodes",
    "seed",
    "kappa",
    "reward",
    "out",
    "x0",
    "uniform_restarts",
    "alpha_exponent",
    "policy",
    "rollouts",
    "sims",
];

/// Raw `key=value` settings; later sources override earlier ones.
#[derive(Clone, Debug, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    /// Parses a flat `key=value` file. Blank lines and `#` lines are skipped.
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut s = Settings::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key=value", n + 1)))?;
            s.set(k.trim(), v.trim())?;
        }
        Ok(s)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let key = key.replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Config(format!("unknown setting `{key}`")));
        }
        self.values.insert(key, value.to_string());
        Ok(())
    }

    pub fn remove(&mut self, key: &str) {
        self.values.remove(key);
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| CliError::Config(format!("invalid value `{v}` for `{key}`")))
            })
            .transpose()
    }

    fn positive(&self, key: &str) -> Result<Option<f64>, CliError> {
        match self.parsed::<f64>(key)? {
            Some(v) if !(v > 0.0 && v.is_finite()) => Err(CliError::Config(format!(
                "`{key}` must be positive, got {v}"
            ))),
            other => Ok(other),
        }
    }
}

fn parse_list(key: &str, text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| CliError::Config(format!("invalid number `{s}` in `{key}`")))
        })
        .collect()
}

/// One-dimensional affine system described in a settings-style file with
/// keys `name`, `lo`, `hi`, `inputs`, `coeff`, `offset`, `noise`.
pub fn load_custom_system(path: &Path) -> Result<SystemModel, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Config(format!("cannot read system file {}: {e}", path.display()))
    })?;
    let mut kv = BTreeMap::new();
    for line in text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
    {
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("{}: expected key=value", path.display())))?;
        kv.insert(k.trim().to_string(), v.trim().to_string());
    }
    let get = |k: &str| {
        kv.get(k)
            .ok_or_else(|| CliError::Config(format!("{}: missing `{k}`", path.display())))
    };
    let one = |k: &str| -> Result<f64, CliError> {
        let v = parse_list(k, get(k)?)?;
        match v.as_slice() {
            [x] => Ok(*x),
            _ => Err(CliError::Config(format!("`{k}` must be a single number"))),
        }
    };
    let inputs = parse_list("inputs", get("inputs")?)?;
    let coeff = parse_list("coeff", get("coeff")?)?;
    let offset = parse_list("offset", get("offset")?)?;
    let noise = one("noise")?;
    let a_upper = coeff.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let name = kv.get("name").cloned().unwrap_or_else(|| "custom".into());
    Ok(SystemModel::new(
        name,
        StateBox::new(vec![one("lo")?], vec![one("hi")?])?,
        inputs.into_iter().map(|u| vec![u]).collect(),
        vec![noise],
        scrl::scltl::Props::new(["safe"])?,
        Dynamics::ScalarAffine { coeff, offset },
        Labeler::Safety,
        Some(LinearGaussian {
            a_upper: vec![vec![a_upper]],
            sigma: vec![noise],
        }),
    )?)
}

/// Which benchmark a run uses.
#[derive(Clone, Debug, PartialEq)]
pub enum SystemId {
    Room,
    Traffic,
    Bmw,
    Custom(PathBuf),
}

impl SystemId {
    pub fn parse(s: &str) -> Self {
        match s {
            "room" => SystemId::Room,
            "traffic" => SystemId::Traffic,
            "bmw" => SystemId::Bmw,
            path => SystemId::Custom(PathBuf::from(path)),
        }
    }

    pub fn load(&self) -> Result<SystemModel, CliError> {
        match self {
            SystemId::Room => Ok(make_room()),
            SystemId::Traffic => Ok(make_traffic()),
            SystemId::Bmw => Ok(make_bmw(Scenario::default())?),
            SystemId::Custom(p) => load_custom_system(p),
        }
    }

    fn default_x0(&self, model: &SystemModel) -> Vec<f64> {
        match self {
            SystemId::Bmw => vec![5.0, 1.5, 0.0, 17.0, 0.0, 0.0, 0.0],
            _ => {
                let b = model.state_box();
                b.lo()
                    .iter()
                    .zip(b.hi())
                    .map(|(l, h)| (l + h) / 2.0)
                    .collect()
            }
        }
    }
}

/// How the grid resolution was specified.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Resolution {
    Delta(f64),
    Epsilon(f64),
}

/// Validated settings of one run.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub system_id: SystemId,
    pub model: SystemModel,
    pub formula: String,
    pub props: Option<Vec<String>>,
    pub horizon: usize,
    pub resolution: Option<Resolution>,
    pub deltas: Vec<f64>,
    pub lipschitz: Option<f64>,
    pub lebesgue: f64,
    pub episodes: Option<u64>,
    pub seed: u64,
    pub reward: RewardConfig,
    pub out: PathBuf,
    pub x0: Vec<f64>,
    pub uniform_restarts: bool,
    pub alpha_exponent: f64,
    pub policy: Option<PathBuf>,
    pub rollouts: u64,
    pub sims: u64,
}

pub const DEFAULT_DELTAS: &[f64] = &[0.01, 0.02, 0.05, 0.1, 0.2];

impl RunConfig {
    pub fn from_settings(s: &Settings) -> Result<Self, CliError> {
        let system_id = SystemId::parse(s.get("system").unwrap_or("room"));
        let model = system_id.load()?;
        let horizon = s.parsed::<usize>("horizon")?.unwrap_or(10);
        let formula = match s.get("formula") {
            Some(f) => f.to_string(),
            None if system_id == SystemId::Bmw => "!hit U goal".to_string(),
            None => format!("G[0,{horizon}] safe"),
        };
        let props = s.get("props").map(|p| {
            p.split(',')
                .map(|n| n.trim().to_string())
                .filter(|n| !n.is_empty())
                .collect()
        });
        let resolution = match (s.positive("delta")?, s.positive("epsilon")?) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "give either `delta` or `epsilon`, not both".into(),
                ))
            }
            (Some(d), None) => Some(Resolution::Delta(d)),
            (None, Some(e)) => Some(Resolution::Epsilon(e)),
            (None, None) => None,
        };
        let deltas = match s.get("deltas") {
            Some(text) => parse_list("deltas", text)?,
            None => DEFAULT_DELTAS.to_vec(),
        };
        if let Some(bad) = deltas.iter().find(|d| !(**d > 0.0 && d.is_finite())) {
            return Err(CliError::Config(format!(
                "`deltas` entries must be positive, got {bad}"
            )));
        }
        let lipschitz = match s.positive("lipschitz")? {
            Some(h) => Some(h),
            None => match model.linear_gaussian() {
                Some(lg) => Some(lipschitz_linear_gaussian(&lg.a_upper, &lg.sigma)?),
                None => None,
            },
        };
        let lebesgue = s.positive("lebesgue")?.unwrap_or(1.0);
        let episodes = s.parsed::<u64>("episodes")?;
        if episodes == Some(0) {
            return Err(CliError::Config("`episodes` must be at least 1".into()));
        }
        let seed = s.parsed::<u64>("seed")?.unwrap_or(0);
        let mode = match s.get("reward") {
            Some(m) => m.parse::<RewardMode>()?,
            None => RewardMode::Sparse,
        };
        let kappa = s.positive("kappa")?.unwrap_or(DEFAULT_KAPPA);
        let reward = RewardConfig::new(mode, kappa)?;
        let out = PathBuf::from(s.get("out").unwrap_or("out"));
        let x0 = match s.get("x0") {
            Some(text) => parse_list("x0", text)?,
            None => system_id.default_x0(&model),
        };
        if x0.len() != model.dim() {
            return Err(CliError::Config(format!(
                "`x0` needs {} coordinates, got {}",
                model.dim(),
                x0.len()
            )));
        }
        if !model.state_box().contains(&x0) {
            return Err(CliError::Config("`x0` lies outside the state box".into()));
        }
        let uniform_restarts = s.parsed::<bool>("uniform_restarts")?.unwrap_or(false);
        let alpha_exponent = match s.parsed::<f64>("alpha_exponent")? {
            Some(w) => w,
            None => match LearningRate::default() {
                LearningRate::Polynomial { exponent } => exponent,
                LearningRate::Constant(_) => unreachable!("default rate is polynomial"),
            },
        };
        let rollouts = s.parsed::<u64>("rollouts")?.unwrap_or(10_000);
        let sims = s.parsed::<u64>("sims")?.unwrap_or(100);
        if rollouts == 0 {
            return Err(CliError::Config("`rollouts` must be at least 1".into()));
        }
        Ok(RunConfig {
            system_id,
            model,
            formula,
            props,
            horizon,
            resolution,
            deltas,
            lipschitz,
            lebesgue,
            episodes,
            seed,
            reward,
            out,
            x0,
            uniform_restarts,
            alpha_exponent,
            policy: s.get("policy").map(PathBuf::from),
            rollouts,
            sims,
        })
    }

    /// Target δ, converting from ε when needed.
    pub fn delta(&self) -> Result<f64, CliError> {
        match self.resolution {
            Some(Resolution::Delta(d)) => Ok(d),
            Some(Resolution::Epsilon(e)) => {
                let h = self.lipschitz.ok_or_else(|| {
                    CliError::Config("`epsilon` needs `lipschitz` for this system".into())
                })?;
                let d = scrl::quantize::delta_for_epsilon(e, self.horizon, h, self.lebesgue);
                if d.is_finite() && d > 0.0 {
                    Ok(d)
                } else {
                    Err(CliError::Numeric(format!("no finite δ for ε = {e}")))
                }
            }
            None => Err(CliError::Config(
                "one of `delta` or `epsilon` is required".into(),
            )),
        }
    }

    /// ε for a target δ, when a Lipschitz constant is known.
    pub fn epsilon_for(&self, delta: f64) -> Option<f64> {
        self.lipschitz
            .map(|h| scrl::quantize::epsilon_bound(self.horizon, delta, h, self.lebesgue))
    }

    /// Episodes for training; the vehicle model has no default.
    pub fn training_episodes(&self) -> Result<u64, CliError> {
        match (self.episodes, &self.system_id) {
            (Some(n), _) => Ok(n),
            (None, SystemId::Bmw) => Err(CliError::Config(
                "the bmw system requires an explicit `--episodes`".into(),
            )),
            (None, _) => Ok(1_000_000),
        }
    }

    pub fn train_config(&self) -> Result<TrainConfig, CliError> {
        let mut cfg = TrainConfig::new(self.training_episodes()?, self.seed, self.reward);
        cfg.learning_rate = LearningRate::Polynomial {
            exponent: self.alpha_exponent,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
