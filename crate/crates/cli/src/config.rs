//! Run configuration: command-line flags over a JSON config file over defaults.

use std::path::{Path, PathBuf};

use matsp_core::{ConstructionSpec, MatRing, MatSet, Order, Universe, Variant};
use serde::Deserialize;

use crate::report::Format;
use crate::CliError;

/// Every field is optional so the same type serves flags and file.
#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub q: Option<String>,
    pub set_a: Option<String>,
    pub set_b: Option<String>,
    pub set_c: Option<String>,
    pub set_d: Option<String>,
    pub set_e: Option<String>,
    pub set_f: Option<String>,
    pub trials: Option<usize>,
    pub variant: Option<String>,
    pub seed: Option<u64>,
    pub size: Option<usize>,
    pub m: Option<f64>,
    pub x: Option<Vec<u32>>,
    pub g: Option<u32>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Config, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::ConfigInvalid(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::ConfigInvalid(format!("{}: {e}", path.display())))
    }

    /// Fields set in `self` win over `base`.
    pub fn over(self, base: Config) -> Config {
        Config {
            q: self.q.or(base.q),
            set_a: self.set_a.or(base.set_a),
            set_b: self.set_b.or(base.set_b),
            set_c: self.set_c.or(base.set_c),
            set_d: self.set_d.or(base.set_d),
            set_e: self.set_e.or(base.set_e),
            set_f: self.set_f.or(base.set_f),
            trials: self.trials.or(base.trials),
            variant: self.variant.or(base.variant),
            seed: self.seed.or(base.seed),
            size: self.size.or(base.size),
            m: self.m.or(base.m),
            x: self.x.or(base.x),
            g: self.g.or(base.g),
            out: self.out.or(base.out),
            format: self.format.or(base.format),
        }
    }
}

/// A validated configuration with the field and ring built.
#[derive(Clone, Debug)]
pub struct Ctx {
    pub order: Order,
    pub ring: MatRing,
    pub trials: Option<usize>,
    pub variant: Variant,
    pub seed: u64,
    pub size: Option<usize>,
    pub m: Option<f64>,
    pub x: Option<Vec<u32>>,
    pub g: Option<u32>,
    sources: [Option<String>; 6],
}

impl Ctx {
    pub fn new(cfg: &Config) -> Result<Ctx, CliError> {
        let q = cfg.q.as_deref().ok_or_else(|| CliError::ConfigInvalid("--q is required".into()))?;
        let order: Order = q.parse().map_err(|e| CliError::FieldUnsupported(format!("{q}: {e}")))?;
        let field = order.field().map_err(|e| CliError::FieldUnsupported(format!("{q}: {e}")))?;
        let variant = match cfg.variant.as_deref() {
            Some(v) => v.parse().map_err(|e: matsp_core::Error| CliError::ConfigInvalid(e.to_string()))?,
            None => Variant::Left,
        };
        if cfg.trials == Some(0) {
            return Err(CliError::ConfigInvalid("--trials must be at least 1".into()));
        }
        Ok(Ctx {
            order,
            ring: MatRing::new(&field),
            trials: cfg.trials,
            variant,
            seed: cfg.seed.unwrap_or(0),
            size: cfg.size,
            m: cfg.m,
            x: cfg.x.clone(),
            g: cfg.g,
            sources: [&cfg.set_a, &cfg.set_b, &cfg.set_c, &cfg.set_d, &cfg.set_e, &cfg.set_f].map(|s| s.clone()),
        })
    }

    pub fn q(&self) -> u32 {
        self.order.q()
    }

    pub fn trials_or(&self, default: usize) -> usize {
        self.trials.unwrap_or(default)
    }

    /// Seed used for role `role` (0 = A, ..., 5 = F) in trial `trial`.
    pub fn derived_seed(&self, role: usize, trial: usize) -> u64 {
        self.seed.wrapping_mul(1_000_003).wrapping_add(role as u64 * 10_007 + trial as u64)
    }

    /// Builds set `role` for a trial. Sources: a file path,
    /// `construction:<spec>`, or `random:<size>[:<seed>]` (sampled from
    /// `universe`; the seed is offset by the trial index).
    pub fn set(&self, role: usize, trial: usize, universe: Universe, default: &str) -> Result<MatSet, CliError> {
        let src = self.sources[role].as_deref().unwrap_or(default);
        let core = |e: matsp_core::Error| CliError::ConfigInvalid(format!("set {}: {e}", role_name(role)));
        if let Some(rest) = src.strip_prefix("random:") {
            let parts: Vec<&str> = rest.split(':').collect();
            let size: usize = parts[0].parse().map_err(|_| CliError::ConfigInvalid(format!("bad random size in {src:?}")))?;
            let seed = match parts.get(1) {
                Some(s) => s.parse::<u64>().map_err(|_| CliError::ConfigInvalid(format!("bad seed in {src:?}")))?.wrapping_add(trial as u64),
                None => self.derived_seed(role, trial),
            };
            if parts.len() > 2 {
                return Err(CliError::ConfigInvalid(format!("bad random source {src:?}")));
            }
            matsp_core::constructions::random_subset(&self.ring, universe, size, seed).map_err(core)
        } else if let Some(spec) = src.strip_prefix("construction:") {
            let mut spec: ConstructionSpec = spec.parse().map_err(core)?;
            if let ConstructionSpec::RandomGL2 { seed, .. } | ConstructionSpec::RandomM2 { seed, .. } = &mut spec {
                *seed = seed.wrapping_add(trial as u64);
            }
            spec.build(&self.ring).map_err(core)
        } else {
            let file = std::fs::File::open(src).map_err(|e| CliError::Io(format!("{src}: {e}")))?;
            MatSet::read_into(&self.ring, std::io::BufReader::new(file)).map_err(core)
        }
    }
}

pub fn role_name(role: usize) -> char {
    (b'a' + role as u8) as char
}
