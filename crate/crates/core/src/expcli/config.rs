use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::asymptotics::MIN_NORMALIZER_N;
use crate::constructions::BlueprintKind;
use crate::error::{CapError, Result};
use crate::rng::stream_id;

/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "CAPWALK_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    IdentitySuite,
    LimsupSweep,
    StrassenCloud,
    LiminfCloud,
    PhaseM2,
}

impl Suite {
    pub const ALL: [Suite; 5] =
        [Suite::IdentitySuite, Suite::LimsupSweep, Suite::StrassenCloud, Suite::LiminfCloud, Suite::PhaseM2];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::IdentitySuite => "identity-suite",
            Suite::LimsupSweep => "limsup-sweep",
            Suite::StrassenCloud => "strassen-cloud",
            Suite::LiminfCloud => "liminf-cloud",
            Suite::PhaseM2 => "phase-m2",
        }
    }

    fn default_n_grid(&self) -> Vec<u64> {
        match self {
            Suite::IdentitySuite => vec![],
            Suite::PhaseM2 => vec![1_000_000],
            _ => vec![10_000],
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = CapError;

    fn from_str(s: &str) -> Result<Suite> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| CapError::config(format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Jsonl,
    Csv,
}

impl Format {
    /// From a file extension; anything but `.csv` is JSONL.
    pub fn from_path(p: &Path) -> Format {
        match p.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Jsonl,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Realization {
    Deterministic,
    Bridges,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorConfig {
    pub kill_radius_factor: f64,
    pub samples_per_point: u32,
    /// Fraction of range points sampled once the range exceeds `exact_max_points`.
    pub subsample_fraction: f64,
    pub exact_max_points: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig { kill_radius_factor: 50.0, samples_per_point: 200, subsample_fraction: 0.05, exact_max_points: 2000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstructionConfig {
    pub k_grid: Vec<f64>,
    pub kind: BlueprintKind,
    pub kappa: f64,
    /// Cube level tolerance.
    pub delta: f64,
    /// Polygon order of the sphere cross-sections.
    pub m: u32,
    /// Sphere height margin.
    pub epsilon: f64,
    /// Slow functions t(n), g(n); absent means max(2, log⁽⁴⁾n).
    pub t_fn: Option<f64>,
    pub g_fn: Option<f64>,
    pub realization: Realization,
    /// Bridge target ball radius as a fraction of the edge scale.
    pub ball_frac: f64,
    /// Rescale the schedule so the path has exactly n steps.
    pub matched_budget: bool,
    /// Also run the FE/TE/BE/GF/GL/SG checkers (costly for large n).
    pub check_events: bool,
}

impl Default for ConstructionConfig {
    fn default() -> Self {
        ConstructionConfig {
            k_grid: vec![0.2, 1.0, 5.0],
            kind: BlueprintKind::Sphere,
            kappa: 0.1,
            delta: 0.1,
            m: 8,
            epsilon: 0.1,
            t_fn: None,
            g_fn: None,
            realization: Realization::Bridges,
            ball_frac: 0.1,
            matched_budget: true,
            check_events: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EventConfig {
    /// ε of the regime events A¹, A², B.
    pub epsilon: f64,
    /// δ of the Hölder modulus check.
    pub holder_delta: f64,
    /// ε of the Strassen-set membership test.
    pub membership_epsilon: f64,
}

impl Default for EventConfig {
    fn default() -> Self {
        EventConfig { epsilon: 0.1, holder_delta: 0.5, membership_epsilon: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdentityConfig {
    /// Random cases per seed.
    pub cases: usize,
    /// Points are drawn from the lattice ball of this radius.
    pub ball_radius: f64,
    /// Largest size of each random set.
    pub max_set: usize,
}

impl Default for IdentityConfig {
    fn default() -> Self {
        IdentityConfig { cases: 500, ball_radius: 10.0, max_set: 30 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrajectoryConfig {
    /// Uniform grid on [0, 1] with this many cells.
    pub grid_cells: usize,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        TrajectoryConfig { grid_cells: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub suite: Suite,
    /// Absent: the suite default.
    #[serde(default)]
    pub n_grid: Option<Vec<u64>>,
    /// Explicit seeds; when absent `seed_count` seeds are derived from `master_seed`.
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "one")]
    pub seed_count: usize,
    #[serde(default)]
    pub estimator: EstimatorConfig,
    #[serde(default)]
    pub construction: ConstructionConfig,
    #[serde(default)]
    pub events: EventConfig,
    #[serde(default)]
    pub identity: IdentityConfig,
    #[serde(default)]
    pub trajectory: TrajectoryConfig,
    /// Output file; not part of the config hash.
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Output format; inferred from `output` when absent. Not hashed.
    #[serde(default)]
    pub format: Option<Format>,
    /// Worker threads; not hashed.
    #[serde(default)]
    pub threads: Option<usize>,
}

fn one() -> usize {
    1
}

impl ExperimentConfig {
    /// Defaults for `suite`.
    pub fn new(suite: Suite) -> ExperimentConfig {
        ExperimentConfig {
            suite,
            n_grid: None,
            seeds: None,
            master_seed: 0,
            seed_count: 1,
            estimator: EstimatorConfig::default(),
            construction: ConstructionConfig::default(),
            events: EventConfig::default(),
            identity: IdentityConfig::default(),
            trajectory: TrajectoryConfig::default(),
            output: None,
            format: None,
            threads: None,
        }
    }

    pub fn n_values(&self) -> Vec<u64> {
        self.n_grid.clone().unwrap_or_else(|| self.suite.default_n_grid())
    }

    pub fn seed_values(&self) -> Vec<u64> {
        match &self.seeds {
            Some(s) => s.clone(),
            None => (0..self.seed_count as u64).map(|i| stream_id(&[self.master_seed, i])).collect(),
        }
    }

    pub fn output_format(&self) -> Format {
        self.format.unwrap_or_else(|| self.output.as_deref().map_or(Format::Jsonl, Format::from_path))
    }

    /// Threads from the config, else from [`THREADS_ENV`]; None leaves the choice to rayon.
    pub fn thread_budget(&self) -> Result<Option<usize>> {
        if let Some(t) = self.threads {
            return Ok(Some(t));
        }
        match std::env::var(THREADS_ENV) {
            Ok(v) => v
                .trim()
                .parse::<usize>()
                .ok()
                .filter(|&t| t > 0)
                .map(Some)
                .ok_or_else(|| CapError::config(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
            Err(_) => Ok(None),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: String| Err(CapError::config(format!("{field}: {msg}")));
        if let Some(&n) = self.n_values().iter().find(|&&n| n < MIN_NORMALIZER_N) {
            return bad("n_grid", format!("every n must be ≥ {MIN_NORMALIZER_N}, got {n}"));
        }
        let e = &self.estimator;
        if !(e.kill_radius_factor > 1.0 && e.kill_radius_factor.is_finite()) {
            return bad("estimator.kill_radius_factor", format!("must exceed 1, got {}", e.kill_radius_factor));
        }
        if e.samples_per_point == 0 {
            return bad("estimator.samples_per_point", "must be positive".into());
        }
        if !(e.subsample_fraction > 0.0 && e.subsample_fraction <= 1.0) {
            return bad("estimator.subsample_fraction", format!("must lie in (0, 1], got {}", e.subsample_fraction));
        }
        let c = &self.construction;
        if let Some(k) = c.k_grid.iter().find(|k| !(**k > 0.0 && k.is_finite())) {
            return bad("construction.k_grid", format!("entries must be positive, got {k}"));
        }
        if !(c.kappa > 0.0 && c.kappa < 1.0) {
            return bad("construction.kappa", format!("must lie in (0, 1), got {}", c.kappa));
        }
        if !(c.delta > 0.0 && c.delta < 1.0) {
            return bad("construction.delta", format!("must lie in (0, 1), got {}", c.delta));
        }
        if !(c.epsilon > 0.0 && c.epsilon < 1.0) {
            return bad("construction.epsilon", format!("must lie in (0, 1), got {}", c.epsilon));
        }
        if c.m < 3 {
            return bad("construction.m", format!("must be at least 3, got {}", c.m));
        }
        for (name, v) in [("construction.t_fn", c.t_fn), ("construction.g_fn", c.g_fn)] {
            if let Some(v) = v {
                if !(v >= 2.0 && v.is_finite()) {
                    return bad(name, format!("must be at least 2, got {v}"));
                }
            }
        }
        if !(c.ball_frac >= 0.0 && c.ball_frac < 1.0) {
            return bad("construction.ball_frac", format!("must lie in [0, 1), got {}", c.ball_frac));
        }
        let ev = &self.events;
        for (name, v) in [
            ("events.epsilon", ev.epsilon),
            ("events.holder_delta", ev.holder_delta),
            ("events.membership_epsilon", ev.membership_epsilon),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(name, format!("must be a nonnegative number, got {v}"));
            }
        }
        let id = &self.identity;
        if id.cases == 0 || id.max_set == 0 {
            return bad("identity", "cases and max_set must be positive".into());
        }
        if !(id.ball_radius >= 1.0 && id.ball_radius <= 20.0) {
            return bad("identity.ball_radius", format!("must lie in [1, 20], got {}", id.ball_radius));
        }
        if self.trajectory.grid_cells == 0 {
            return bad("trajectory.grid_cells", "must be positive".into());
        }
        if self.threads == Some(0) {
            return bad("threads", "must be positive".into());
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON of the config without output, format and threads.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = None;
        c.format = None;
        c.threads = None;
        let json = serde_json::to_string(&c).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| CapError::config(format!("cannot serialize config: {e}")))
    }

    pub fn from_toml(text: &str) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| CapError::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Reads and validates a TOML config. Parse errors carry the line, column and field.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CapError::config(format!("{}: cannot read config: {e}", path.display())))?;
    ExperimentConfig::from_toml(&text).map_err(|e| match e {
        CapError::Config(m) => CapError::config(format!("{}: {m}", path.display())),
        other => other,
    })
}
