//! JSON configuration.
//!
//! ```json
//! {
//!   "map": { "kind": "example1", "b0": 0.25, "k": 4, "N": 24 },
//!   "measures": [ { "name": "muK", "kind": "mu_K", "skeleton_label": "K", "depth": 16 } ],
//!   "experiment": { "n_points": 10000 },
//!   "rng": { "seed": 42 },
//!   "workers": 4,
//!   "output": { "dir": "out", "format": "both" }
//! }
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::LabError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabConfig {
    pub map: MapSpec,
    /// Factor specs when `map.kind` is `torus`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub torus: Option<TorusSpec>,
    #[serde(default)]
    pub measures: Vec<MeasureSpec>,
    #[serde(default)]
    pub experiment: ExperimentSpec,
    #[serde(default)]
    pub rng: RngSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    /// doubling, affine3, example1, example2 or torus.
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k2: Option<f64>,
    #[serde(default, rename = "N2", skip_serializing_if = "Option::is_none")]
    pub n2: Option<usize>,
}

impl MapSpec {
    pub fn kind(kind: &str) -> Self {
        MapSpec { kind: kind.into(), b0: None, k: None, n: None, c1: None, b1: None, k2: None, n2: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusSpec {
    pub left: MapSpec,
    pub right: MapSpec,
}

/// A coordinate on the circle or a pair on the torus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Point {
    Circle(f64),
    Torus([f64; 2]),
}

impl Point {
    pub fn coords(&self) -> Vec<f64> {
        match self {
            Point::Circle(x) => vec![*x],
            Point::Torus(p) => p.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    /// lebesgue, dirac, mu_K, empirical or product.
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// dirac
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<Point>,
    /// mu_K
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skeleton_label: Option<String>,
    /// mu_K and product-by-label resolution depth
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    /// empirical
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Point>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jitter: Option<f64>,
    /// product: a product carrier label, or explicit factors
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left: Option<Box<MeasureSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right: Option<Box<MeasureSpec>>,
}

impl MeasureSpec {
    pub fn kind(kind: &str) -> Self {
        MeasureSpec {
            kind: kind.into(),
            name: None,
            point: None,
            skeleton_label: None,
            depth: None,
            x0: None,
            n: None,
            jitter: None,
            label: None,
            left: None,
            right: None,
        }
    }

    pub fn named(mut self, name: &str) -> Self {
        self.name = Some(name.into());
        self
    }

    /// Name used in reports: the explicit name, else a description.
    pub fn display_name(&self) -> String {
        if let Some(n) = &self.name {
            return n.clone();
        }
        match self.kind.as_str() {
            "dirac" => match &self.point {
                Some(Point::Circle(x)) => format!("dirac({x:?})"),
                Some(Point::Torus([x, y])) => format!("dirac({x:?};{y:?})"),
                None => "dirac".into(),
            },
            "mu_K" => format!("mu_{}", self.skeleton_label.as_deref().unwrap_or("?")),
            "product" => match (&self.label, &self.left, &self.right) {
                (Some(l), _, _) => format!("mu_{l}"),
                (None, Some(a), Some(b)) => format!("{}x{}", a.display_name(), b.display_name()),
                _ => "product".into(),
            },
            other => other.into(),
        }
    }
}

/// Experiment parameters; each subcommand reads the keys it needs and
/// applies its own defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    /// Monte Carlo sample size M.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_points: Option<usize>,
    /// basin-scan times schedule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilons: Option<Vec<f64>>,
    /// Measure names for basin-scan.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidates: Option<Vec<String>>,
    /// decay-rate target and optional control measure names.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_star: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_schedule: Option<Vec<usize>>,
    /// distortion generations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generations: Option<Vec<usize>>,
    /// pesin-check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orbit_len: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_orbits: Option<usize>,
    /// Pseudo-orbit kick size for every orbit-based experiment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jitter: Option<f64>,
    /// validate: deepest generation for the gap image check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_gen: Option<usize>,
    /// Number of weak* family terms.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_terms: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RngSpec {
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    #[default]
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default)]
    pub format: Format,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: default_dir(), format: Format::Both }
    }
}

impl LabConfig {
    pub fn from_json(text: &str) -> Result<Self, LabError> {
        let cfg: LabConfig = serde_json::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Minimal config for a map kind with default parameters.
    pub fn for_map(kind: &str) -> Self {
        LabConfig {
            map: MapSpec::kind(kind),
            torus: None,
            measures: Vec::new(),
            experiment: ExperimentSpec::default(),
            rng: RngSpec::default(),
            workers: None,
            output: OutputSpec::default(),
        }
    }

    /// Structural checks that do not need the built system.
    pub fn check(&self) -> Result<(), LabError> {
        if self.workers == Some(0) {
            return Err(LabError::Config("workers must be a positive integer".into()));
        }
        if self.map.kind == "torus" && self.torus.is_none() {
            return Err(LabError::Config("map.kind = torus needs a torus block with left and right".into()));
        }
        let mut names: Vec<String> = self.measures.iter().map(MeasureSpec::display_name).collect();
        names.sort();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(LabError::Config(format!("duplicate measure name {:?}", w[0])));
        }
        Ok(())
    }

    pub fn measure(&self, name: &str) -> Option<&MeasureSpec> {
        self.measures.iter().find(|m| m.display_name() == name)
    }
}
