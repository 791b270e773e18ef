use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::PartitionMode;
use crate::solvers::Algorithm;

/// Which experiment family a config describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Compare,
    Speedup,
    NetworkIndependence,
    CertifySweep,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Compare => "compare",
            ExperimentKind::Speedup => "speedup",
            ExperimentKind::NetworkIndependence => "network_independence",
            ExperimentKind::CertifySweep => "certify_sweep",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphGenerator {
    Exponential,
    Cycle,
    Geometric,
    /// Read from a graph text file.
    File,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GraphSpec {
    pub generator: GraphGenerator,
    pub n: usize,
    /// Extra random edges for the `cycle` generator.
    pub extra: usize,
    pub radius: f64,
    pub one_way_probability: f64,
    pub seed: u64,
    pub path: Option<PathBuf>,
}

impl Default for GraphSpec {
    fn default() -> Self {
        Self {
            generator: GraphGenerator::Exponential,
            n: 16,
            extra: 0,
            radius: 0.5,
            one_way_probability: crate::digraph::DEFAULT_ONE_WAY_PROBABILITY,
            seed: 0,
            path: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Logistic,
    Quadratic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    /// Total sample count `N` for synthetic logistic data.
    pub samples: usize,
    pub dim: usize,
    pub separation: f64,
    pub reg: f64,
    pub partition: PartitionMode,
    /// Components per node for quadratics.
    pub m: usize,
    pub kappa: f64,
    pub seed: u64,
    /// Optional CSV dataset replacing the synthetic logistic data.
    pub csv: Option<PathBuf>,
    /// Scale CSV features to `[0, 1]`.
    pub scale: bool,
}

impl Default for ProblemSpec {
    fn default() -> Self {
        Self {
            kind: ProblemKind::Logistic,
            samples: 1200,
            dim: 10,
            separation: 1.0,
            reg: 1e-2,
            partition: PartitionMode::Equal,
            m: 100,
            kappa: 2.0,
            seed: 1,
            csv: None,
            scale: false,
        }
    }
}

/// Stepsize policy of one algorithm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AlphaPolicy {
    /// `alpha_bar` of the run's network and problem.
    Theory,
    /// Best final gap over the tuning grid.
    Tuned,
    Fixed(f64),
    /// `c / L`.
    OverSmoothness(f64),
}

impl AlphaPolicy {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "theory" => return Ok(AlphaPolicy::Theory),
            "tuned" => return Ok(AlphaPolicy::Tuned),
            _ => {}
        }
        let bad = || Error::InvalidConfiguration(format!("alpha: expected 'theory', 'tuned', a number or 'c/L', got '{s}'"));
        let (num, over_l) = match s.strip_suffix("/L") {
            Some(c) => (c.trim(), true),
            None => (s, false),
        };
        let v: f64 = num.parse().map_err(|_| bad())?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(bad());
        }
        Ok(if over_l { AlphaPolicy::OverSmoothness(v) } else { AlphaPolicy::Fixed(v) })
    }

    pub fn label(&self) -> String {
        match self {
            AlphaPolicy::Theory => "theory".into(),
            AlphaPolicy::Tuned => "tuned".into(),
            AlphaPolicy::Fixed(v) => format!("{v:?}"),
            AlphaPolicy::OverSmoothness(c) => format!("{c:?}/L"),
        }
    }
}

impl Serialize for AlphaPolicy {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            AlphaPolicy::Fixed(v) => s.serialize_f64(*v),
            other => s.serialize_str(&other.label()),
        }
    }
}

impl<'de> Deserialize<'de> for AlphaPolicy {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Int(i64),
            Text(String),
        }
        let parsed = match Raw::deserialize(d)? {
            Raw::Num(v) => AlphaPolicy::parse(&v.to_string()),
            Raw::Int(v) => AlphaPolicy::parse(&v.to_string()),
            Raw::Text(t) => AlphaPolicy::parse(&t),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSpec {
    pub name: Algorithm,
    #[serde(default = "default_alpha")]
    pub alpha: AlphaPolicy,
}

fn default_alpha() -> AlphaPolicy {
    AlphaPolicy::Tuned
}

/// Base value the tuning multipliers scale.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TuneBase {
    AlphaBar,
    InverseSmoothness,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TuningSpec {
    pub base: TuneBase,
    pub multipliers: Vec<f64>,
}

impl Default for TuningSpec {
    fn default() -> Self {
        Self {
            base: TuneBase::AlphaBar,
            multipliers: vec![1.0, 2.0, 4.0, 8.0, 16.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpeedupSpec {
    pub nodes: Vec<usize>,
    /// Pooled sample count, split evenly over each node count.
    pub total_samples: usize,
    /// Target gap for the SAGA pair.
    pub saga_target: f64,
    /// Target gap for the SGD / SGP / SADDOPT pairs.
    pub sgd_target: f64,
}

impl Default for SpeedupSpec {
    fn default() -> Self {
        Self {
            nodes: vec![2, 4, 8],
            total_samples: 8000,
            saga_target: 1e-12,
            sgd_target: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkSpec {
    /// `extra` edge counts of the cycle-plus-edges family.
    pub extras: Vec<usize>,
    pub target: f64,
    /// A level is in the network-independent regime when
    /// `m (1 - lambda)^2 / psi >= regime_factor`.
    pub regime_factor: f64,
}

impl Default for NetworkSpec {
    fn default() -> Self {
        Self {
            extras: vec![0, 28, 32, 40, 44],
            target: 1e-8,
            regime_factor: 10.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSpec {
    pub tuples: usize,
    /// Each tuple is certified at `alpha_bar` times every multiplier.
    pub alpha_multipliers: Vec<f64>,
    pub max_nodes: usize,
    pub max_count: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            tuples: 100,
            alpha_multipliers: vec![1.0, 2.0],
            max_nodes: 64,
            max_count: 64,
        }
    }
}

/// A complete campaign description, usually read from TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_epochs")]
    pub epochs: f64,
    /// Trace stride; defaults to one row per epoch.
    #[serde(default)]
    pub record_every: Option<usize>,
    #[serde(default)]
    pub graph: GraphSpec,
    #[serde(default)]
    pub problem: ProblemSpec,
    #[serde(default)]
    pub algorithms: Vec<AlgorithmSpec>,
    #[serde(default)]
    pub tuning: TuningSpec,
    #[serde(default)]
    pub speedup: SpeedupSpec,
    #[serde(default)]
    pub network: NetworkSpec,
    #[serde(default)]
    pub sweep: SweepSpec,
}

fn default_output() -> PathBuf {
    PathBuf::from("results")
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_epochs() -> f64 {
    50.0
}

impl ExperimentConfig {
    /// A config of the given kind with every other key at its default.
    pub fn new(kind: ExperimentKind) -> Self {
        Self {
            kind,
            output_dir: default_output(),
            seeds: default_seeds(),
            epochs: default_epochs(),
            record_every: None,
            graph: GraphSpec::default(),
            problem: ProblemSpec::default(),
            algorithms: Vec::new(),
            tuning: TuningSpec::default(),
            speedup: SpeedupSpec::default(),
            network: NetworkSpec::default(),
            sweep: SweepSpec::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
            let msg = e.message().to_string();
            match line {
                Some(l) => Error::InvalidConfiguration(format!("line {l}: {msg}")),
                None => Error::InvalidConfiguration(msg),
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    /// Hash of every key except `output_dir`, so the same campaign written to
    /// two places is recognizably the same.
    pub fn content_hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        super::output::param_hash(&c)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).unwrap_or_else(|e| panic!("config always serializes: {e}"))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, why: String| Err(Error::InvalidConfiguration(format!("{key}: {why}")));
        if self.seeds.is_empty() {
            return bad("seeds", "at least one seed is required".into());
        }
        if self.seeds.iter().collect::<BTreeSet<_>>().len() != self.seeds.len() {
            return bad("seeds", "seeds must be distinct".into());
        }
        if !(self.epochs >= 1.0 && self.epochs.is_finite()) {
            return bad("epochs", format!("must be at least 1, got {}", self.epochs));
        }
        if self.record_every == Some(0) {
            return bad("record_every", "must be at least 1".into());
        }
        if self.kind != ExperimentKind::CertifySweep && self.algorithms.is_empty() {
            return bad("algorithms", "at least one algorithm is required".into());
        }
        if self.graph.n < 2 && self.kind != ExperimentKind::Speedup && self.kind != ExperimentKind::CertifySweep {
            return bad("graph.n", "need at least 2 nodes".into());
        }
        if self.graph.generator == GraphGenerator::File && self.graph.path.is_none() {
            return bad("graph.path", "required when generator = \"file\"".into());
        }
        let p = &self.problem;
        if p.dim == 0 || p.m == 0 || p.samples == 0 {
            return bad("problem", "dim, m and samples must be positive".into());
        }
        if !(p.reg > 0.0) {
            return bad("problem.reg", format!("must be positive, got {}", p.reg));
        }
        if !(p.kappa >= 1.0) {
            return bad("problem.kappa", format!("must be at least 1, got {}", p.kappa));
        }
        if self.tuning.multipliers.is_empty() || self.tuning.multipliers.iter().any(|&x| !(x > 0.0)) {
            return bad("tuning.multipliers", "need at least one positive multiplier".into());
        }
        match self.kind {
            ExperimentKind::Compare => {}
            ExperimentKind::Speedup => {
                let s = &self.speedup;
                if s.nodes.is_empty() || s.nodes.iter().any(|&n| n == 0 || s.total_samples % n != 0) {
                    return bad("speedup.nodes", "node counts must be positive and divide total_samples".into());
                }
                if !(s.saga_target > 0.0 && s.sgd_target > 0.0) {
                    return bad("speedup", "targets must be positive".into());
                }
                for a in &self.algorithms {
                    if !matches!(a.name, Algorithm::PushSaga | Algorithm::Sgp | Algorithm::Saddopt) {
                        return bad("algorithms", format!("speedup pairs push_saga, sgp or saddopt with a central method, got {}", a.name));
                    }
                    if a.alpha == AlphaPolicy::Tuned {
                        return bad("algorithms.alpha", "speedup needs an explicit or theory stepsize".into());
                    }
                }
            }
            ExperimentKind::NetworkIndependence => {
                if self.network.extras.is_empty() {
                    return bad("network.extras", "at least one connectivity level is required".into());
                }
                if !(self.network.target > 0.0) {
                    return bad("network.target", "must be positive".into());
                }
                if self.algorithms.iter().any(|a| a.alpha == AlphaPolicy::Tuned) {
                    return bad("algorithms.alpha", "network independence uses one stepsize for every level".into());
                }
            }
            ExperimentKind::CertifySweep => {
                let s = &self.sweep;
                if s.tuples == 0 || s.alpha_multipliers.is_empty() || s.max_nodes < 2 || s.max_count == 0 {
                    return bad("sweep", "need tuples >= 1, a multiplier, max_nodes >= 2, max_count >= 1".into());
                }
            }
        }
        Ok(())
    }
}
