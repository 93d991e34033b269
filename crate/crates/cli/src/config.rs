//! Run configuration: JSON file merged with command-line overrides.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use dq_core::multipliers::{parse_preset, Tau};
use dq_core::products::Route;
use dq_core::transforms::GridSpec;
use dq_core::{Complex64, GridFunction, SpaceParams};

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GridConfig {
    Points(usize),
    Box { points: usize, min: f64, max: f64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSpec {
    pub center: Vec<f64>,
    pub width: f64,
    #[serde(default = "unit")]
    pub amplitude: [f64; 2],
}

fn unit() -> [f64; 2] {
    [1.0, 0.0]
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n: Option<usize>,
    pub theta: Option<f64>,
    pub theta_sweep: Option<Vec<f64>>,
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub functions: Vec<FunctionSpec>,
    pub multiplier: Option<String>,
    pub suites: Option<Vec<String>>,
    pub route: Option<String>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub boundary_tol: Option<f64>,
    pub order: Option<usize>,
    pub samples: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    pub fn n(&self) -> usize {
        self.n.unwrap_or(0)
    }

    pub fn params(&self) -> SpaceParams {
        SpaceParams::new(self.n())
    }

    pub fn theta(&self) -> Result<f64> {
        let t = self.theta.unwrap_or(0.5);
        if !(t.is_finite() && t != 0.0) {
            bail!("theta must be finite and nonzero");
        }
        Ok(t)
    }

    pub fn route(&self) -> Result<Route> {
        Ok(self.route.as_deref().unwrap_or("pipeline").parse()?)
    }

    pub fn tau(&self) -> Result<Tau> {
        Ok(parse_preset(self.multiplier.as_deref().unwrap_or("one"), self.params())?)
    }

    pub fn grid_points(&self) -> usize {
        match self.grid {
            Some(GridConfig::Points(p)) | Some(GridConfig::Box { points: p, .. }) => p,
            None => 128,
        }
    }

    /// Cube grid; defaults to `[-6, 6]` per axis.
    pub fn grid_spec(&self) -> Result<GridSpec> {
        let (points, min, max) = match self.grid {
            Some(GridConfig::Points(p)) => (p, -6.0, 6.0),
            Some(GridConfig::Box { points, min, max }) => (points, min, max),
            None => (128, -6.0, 6.0),
        };
        Ok(GridSpec::cube(self.n(), min, max, points)?)
    }

    pub fn functions(&self, spec: &GridSpec) -> Result<Vec<GridFunction>> {
        self.functions
            .iter()
            .map(|f| Ok(GridFunction::gaussian(spec, &f.center, f.width, Complex64::new(f.amplitude[0], f.amplitude[1]))?))
            .collect()
    }

    /// Parses `--theta` values: one number or a comma-separated sweep.
    pub fn apply_theta_flag(&mut self, s: &str) -> Result<()> {
        let vals: Vec<f64> = s.split(',').map(|x| x.trim().parse::<f64>().with_context(|| format!("bad theta {x:?}"))).collect::<Result<_>>()?;
        match vals.len() {
            0 => bail!("empty theta"),
            1 => self.theta = Some(vals[0]),
            _ => {
                self.theta = Some(vals[0]);
                self.theta_sweep = Some(vals);
            }
        }
        Ok(())
    }
}
