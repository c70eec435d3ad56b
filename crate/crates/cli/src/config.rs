//! Run configuration: defaults, an optional JSON file, then command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "HEISENBERG_OUT";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("invalid value for `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("cannot read config file {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot parse config file {path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
}

/// Per-suite tolerance overrides; `None` keeps each check's own tolerance.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub basis: Option<f64>,
    pub representation: Option<f64>,
    pub twisted: Option<f64>,
    pub weyl: Option<f64>,
    pub fourier: Option<f64>,
    pub factorizer: Option<f64>,
}

impl Tolerances {
    pub fn get(&self, suite: Suite) -> Option<f64> {
        match suite {
            Suite::Basis => self.basis,
            Suite::Representation => self.representation,
            Suite::Twisted => self.twisted,
            Suite::Weyl => self.weyl,
            Suite::Fourier => self.fourier,
            Suite::Factorizer => self.factorizer,
        }
    }

    fn entries(&self) -> [(&'static str, Option<f64>); 6] {
        [
            ("tol-basis", self.basis),
            ("tol-representation", self.representation),
            ("tol-twisted", self.twisted),
            ("tol-weyl", self.weyl),
            ("tol-fourier", self.fourier),
            ("tol-factorizer", self.factorizer),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Basis,
    Representation,
    Twisted,
    Weyl,
    Fourier,
    Factorizer,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Basis,
        Suite::Representation,
        Suite::Twisted,
        Suite::Weyl,
        Suite::Fourier,
        Suite::Factorizer,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Basis => "basis",
            Suite::Representation => "representation",
            Suite::Twisted => "twisted",
            Suite::Weyl => "weyl",
            Suite::Fourier => "fourier",
            Suite::Factorizer => "factorizer",
        }
    }
}

/// Everything a run depends on. Echoed verbatim into reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n: usize,
    pub lambdas: Vec<f64>,
    pub max_degree: i64,
    /// Gauss–Hermite nodes and phase-space box nodes per axis.
    pub quad_points: usize,
    /// Half-width `L` of the oracle box `[−L, L]^{2n}`.
    pub box_half_width: f64,
    pub tolerances: Tolerances,
    pub seed: u64,
    /// Includes the slow Plancherel check.
    pub slow: bool,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 1,
            lambdas: vec![1.0, -1.0, 2.0],
            max_degree: 6,
            quad_points: 60,
            box_half_width: 10.0,
            tolerances: Tolerances::default(),
            seed: 42,
            slow: false,
            out: None,
        }
    }
}

/// Values given on the command line; each `Some` overrides the file and defaults.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub n: Option<usize>,
    pub lambdas: Option<Vec<f64>>,
    pub max_degree: Option<i64>,
    pub quad_points: Option<usize>,
    pub box_half_width: Option<f64>,
    pub tolerances: Tolerances,
    pub seed: Option<u64>,
    pub slow: bool,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Flag > file > default.
    pub fn resolve(file: Option<&Path>, flags: &Overrides) -> Result<Self, ConfigError> {
        let mut cfg = match file {
            Some(p) => Self::from_file(p)?,
            None => Self::default(),
        };
        cfg.apply(flags);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, flags: &Overrides) {
        if let Some(v) = flags.n {
            self.n = v;
        }
        if let Some(v) = &flags.lambdas {
            self.lambdas = v.clone();
        }
        if let Some(v) = flags.max_degree {
            self.max_degree = v;
        }
        if let Some(v) = flags.quad_points {
            self.quad_points = v;
        }
        if let Some(v) = flags.box_half_width {
            self.box_half_width = v;
        }
        let t = &flags.tolerances;
        let mine = &mut self.tolerances;
        for (slot, v) in [
            (&mut mine.basis, t.basis),
            (&mut mine.representation, t.representation),
            (&mut mine.twisted, t.twisted),
            (&mut mine.weyl, t.weyl),
            (&mut mine.fourier, t.fourier),
            (&mut mine.factorizer, t.factorizer),
        ] {
            if v.is_some() {
                *slot = v;
            }
        }
        if let Some(v) = flags.seed {
            self.seed = v;
        }
        self.slow |= flags.slow;
        if flags.out.is_some() {
            self.out = flags.out.clone();
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |field, reason: &str| ConfigError::Invalid {
            field,
            reason: reason.to_string(),
        };
        if self.n == 0 {
            return Err(invalid("n", "must be at least 1"));
        }
        if self.max_degree < 0 {
            return Err(invalid("max-degree", "must be nonnegative"));
        }
        if self.lambdas.is_empty() {
            return Err(invalid("lambda", "at least one value is required"));
        }
        if self.lambdas.iter().any(|l| !l.is_finite() || *l == 0.0) {
            return Err(invalid("lambda", "entries must be finite and nonzero"));
        }
        if self.quad_points < 2 {
            return Err(invalid("quad-points", "must be at least 2"));
        }
        if !(self.box_half_width.is_finite() && self.box_half_width > 0.0) {
            return Err(invalid("box", "must be positive"));
        }
        for (field, v) in self.tolerances.entries() {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(invalid(field, "tolerances must be positive"));
                }
            }
        }
        Ok(())
    }

    pub fn degree(&self) -> usize {
        self.max_degree.max(0) as usize
    }

    /// `--out`, else `$HEISENBERG_OUT`, else the working directory.
    pub fn output_dir(&self) -> PathBuf {
        self.out
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."))
    }
}
