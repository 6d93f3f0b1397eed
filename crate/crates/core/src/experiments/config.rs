//! Scenario configuration, as read from JSON.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridField, TorusGrid};
use crate::sequences::{periodic_gaussian, Phase};

/// Names of the built-in scenarios, in the order `microcc list` prints them.
pub const SCENARIOS: &[&str] = &[
    "divcurl3",
    "counterexample",
    "tartar-const",
    "variable-q",
    "variable-symbol",
    "manifold-minkowski",
    "garding",
    "pushforward-law",
    "two-chart",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub n: usize,
}

/// Closed vocabulary of scalar fields usable in configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldSpec {
    Constant { value: f64 },
    /// `offset + amplitude · cos(x_axis)`.
    Cosine { offset: f64, amplitude: f64, axis: usize },
    /// `offset + amplitude · sin(x_axis)`.
    Sine { offset: f64, amplitude: f64, axis: usize },
    /// Periodized Gaussian.
    Bump { center: Vec<f64>, sigma: f64 },
}

impl FieldSpec {
    pub fn one() -> Self {
        FieldSpec::Constant { value: 1.0 }
    }

    pub fn build(&self, grid: &TorusGrid) -> Result<GridField> {
        let axis_ok = |axis: usize| {
            if axis < grid.dim() {
                Ok(axis)
            } else {
                Err(Error::Config(format!("field axis {axis} outside dimension {}", grid.dim())))
            }
        };
        match self {
            FieldSpec::Constant { value } => GridField::real_scalar_from_fn(*grid, |_| *value),
            FieldSpec::Cosine { offset, amplitude, axis } => {
                let d = axis_ok(*axis)?;
                GridField::real_scalar_from_fn(*grid, |x| offset + amplitude * x[d].cos())
            }
            FieldSpec::Sine { offset, amplitude, axis } => {
                let d = axis_ok(*axis)?;
                GridField::real_scalar_from_fn(*grid, |x| offset + amplitude * x[d].sin())
            }
            FieldSpec::Bump { center, sigma } => {
                periodic_gaussian(grid, center, *sigma).map_err(|e| Error::Config(e.to_string()))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub lambda: Vec<f64>,
    pub xi0: Vec<i64>,
    #[serde(default = "FieldSpec::one")]
    pub envelope: FieldSpec,
    #[serde(default = "default_phase")]
    pub phase: Phase,
    #[serde(default)]
    pub decay: f64,
}

fn default_phase() -> Phase {
    Phase::Sin
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    /// One scalar field per fiber component; empty means `ū = 0`.
    #[serde(default)]
    pub ubar: Vec<FieldSpec>,
    pub modes: Vec<ModeSpec>,
    pub k_list: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartSpec {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// Knobs used by some scenarios; unset entries take documented defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Frequency cutoffs for the precompactness proxy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_cut: Option<Vec<f64>>,
    /// Covector sphere samples per point for cones (default 200).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sphere_samples: Option<usize>,
    /// Seeded probe vectors per cone sample (default 8).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_count: Option<usize>,
    /// Base points for cone and Gårding samples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_points: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector_samples: Option<usize>,
    /// Oscillation threshold for coefficient freezing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub charts: Option<Vec<ChartSpec>>,
    /// Names such as `scale:2`, `rotation:0.7`, `shear`, `sine:0.1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diffeomorphisms: Option<Vec<String>>,
    /// Symbol whose kernel dimension is compared under pushforward.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel_symbol: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_points: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: String,
    pub grid: GridSpec,
    pub symbol: String,
    pub quadform: String,
    #[serde(default = "default_metric")]
    pub metric: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bundle_metric: Option<String>,
    pub family: FamilySpec,
    #[serde(default = "FieldSpec::one")]
    pub test_function: FieldSpec,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_metric() -> String {
    "euclidean".into()
}

fn sin_mode(lambda: Vec<f64>, xi0: Vec<i64>) -> ModeSpec {
    ModeSpec {
        lambda,
        xi0,
        envelope: FieldSpec::one(),
        phase: Phase::Sin,
        decay: 0.0,
    }
}

fn cos_mode(lambda: Vec<f64>, xi0: Vec<i64>) -> ModeSpec {
    ModeSpec {
        phase: Phase::Cos,
        ..sin_mode(lambda, xi0)
    }
}

fn tol(entries: &[(&str, f64)]) -> BTreeMap<String, f64> {
    entries.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// `v = e₂ cos(k x₁)` in the first block, `w = e₂ cos(k x₂)` in the second.
fn divcurl_family(k_list: Vec<i64>) -> FamilySpec {
    FamilySpec {
        ubar: Vec::new(),
        modes: vec![
            cos_mode(vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0], vec![1, 0, 0]),
            cos_mode(vec![0.0, 0.0, 0.0, 0.0, 1.0, 0.0], vec![0, 1, 0]),
        ],
        k_list,
    }
}

impl ScenarioConfig {
    /// The shipped configuration of a built-in scenario.
    pub fn builtin(name: &str) -> Result<Self> {
        let origin3 = FieldSpec::Bump { center: vec![0.0; 3], sigma: 0.5 };
        let cfg = match name {
            "divcurl3" => Self {
                scenario: name.into(),
                grid: GridSpec { dim: 3, n: 32 },
                symbol: "divcurl6".into(),
                quadform: "dot3".into(),
                metric: default_metric(),
                bundle_metric: None,
                family: divcurl_family(vec![2, 3, 4, 6, 8]),
                test_function: origin3,
                tolerances: tol(&[("cone_residual", 1e-10), ("final_gap_ratio", 1e-3), ("constant_test_pairing", 1e-12), ("weak_gap", 1e-2)]),
                params: Params {
                    n_cut: Some(vec![1.0, 2.0, 4.0, 8.0]),
                    sphere_samples: Some(500),
                    ..Params::default()
                },
                output: OutputSpec::default(),
            },
            "counterexample" => Self {
                scenario: name.into(),
                grid: GridSpec { dim: 1, n: 64 },
                symbol: "zero".into(),
                quadform: "square".into(),
                metric: default_metric(),
                bundle_metric: None,
                family: FamilySpec {
                    ubar: Vec::new(),
                    modes: vec![sin_mode(vec![1.0], vec![1])],
                    k_list: (2..=8).collect(),
                },
                test_function: FieldSpec::one(),
                tolerances: tol(&[("cone_residual", 1e-10), ("pairing_exactness", 1e-12), ("weak_gap", 1e-2)]),
                params: Params {
                    n_cut: Some(vec![1.0, 2.0, 4.0]),
                    ..Params::default()
                },
                output: OutputSpec::default(),
            },
            "tartar-const" => Self {
                scenario: name.into(),
                grid: GridSpec { dim: 2, n: 32 },
                symbol: "proj_first".into(),
                quadform: "tartar".into(),
                metric: default_metric(),
                bundle_metric: None,
                family: FamilySpec {
                    ubar: vec![FieldSpec::Constant { value: 1.0 }, FieldSpec::Constant { value: 0.5 }],
                    modes: vec![sin_mode(vec![0.0, 1.0], vec![1, 1])],
                    k_list: vec![2, 4, 6, 8, 10, 12],
                },
                test_function: FieldSpec::one(),
                tolerances: tol(&[("cone_residual", 1e-10), ("final_gap", 1e-6), ("weak_gap", 1e-2)]),
                params: Params {
                    n_cut: Some(vec![1.0, 2.0, 4.0, 8.0]),
                    deltas: Some(vec![0.1]),
                    ..Params::default()
                },
                output: OutputSpec::default(),
            },
            "variable-q" => Self {
                scenario: name.into(),
                grid: GridSpec { dim: 3, n: 16 },
                symbol: "divcurl6".into(),
                quadform: "scaled:dot3".into(),
                metric: default_metric(),
                bundle_metric: None,
                family: divcurl_family(vec![2, 3, 4, 5, 6, 7]),
                test_function: FieldSpec::Bump { center: vec![0.0; 3], sigma: 0.5 },
                tolerances: tol(&[("cone_residual", 1e-10), ("final_gap_ratio", 1e-2), ("freeze_slack", 1e-10), ("weak_gap", 1e-2)]),
                params: Params {
                    n_cut: Some(vec![1.0, 2.0, 4.0]),
                    sphere_samples: Some(100),
                    x_points: Some(vec![vec![0.0; 3], vec![PI / 2.0, 0.0, 0.0], vec![PI, 1.0, 2.0]]),
                    gamma: Some(1.0),
                    seed_radius: Some(1.2),
                    ..Params::default()
                },
                output: OutputSpec::default(),
            },
            "variable-symbol" => Self {
                scenario: name.into(),
                grid: GridSpec { dim: 3, n: 16 },
                symbol: "scaled:divcurl6".into(),
                quadform: "dot3".into(),
                metric: default_metric(),
                bundle_metric: None,
                family: divcurl_family(vec![2, 3, 4, 5, 6, 7]),
                test_function: FieldSpec::Bump { center: vec![0.0; 3], sigma: 0.5 },
                tolerances: tol(&[("cone_residual", 1e-10), ("final_gap_ratio", 1e-2), ("commutator_slope_max", -0.5), ("weak_gap", 1e-2)]),
                params: Params {
                    n_cut: Some(vec![1.0, 2.0, 4.0]),
                    sphere_samples: Some(100),
                    x_points: Some(vec![vec![0.0; 3], vec![PI / 2.0, 0.0, 0.0], vec![PI, 1.0, 2.0]]),
                    charts: Some(
                        [0.0, PI]
                            .iter()
                            .flat_map(|&a| [0.0, PI].into_iter().flat_map(move |b| [0.0, PI].into_iter().map(move |c| vec![a, b, c])))
                            .map(|center| ChartSpec { center, radius: 3.0 })
                            .collect(),
                    ),
                    ..Params::default()
                },
                output: OutputSpec::default(),
            },
            "manifold-minkowski" => Self {
                scenario: name.into(),
                grid: GridSpec { dim: 2, n: 32 },
                symbol: "proj_first".into(),
                quadform: "tartar".into(),
                metric: "conformal-minkowski:0.2".into(),
                bundle_metric: Some("diag:-1,1".into()),
                family: FamilySpec {
                    ubar: vec![
                        FieldSpec::Cosine { offset: 1.0, amplitude: 0.5, axis: 0 },
                        FieldSpec::Constant { value: 0.0 },
                    ],
                    modes: vec![ModeSpec {
                        envelope: FieldSpec::Sine { offset: 1.0, amplitude: 0.3, axis: 1 },
                        ..sin_mode(vec![0.0, 1.0], vec![1, 1])
                    }],
                    k_list: vec![2, 4, 6, 8, 10, 12],
                },
                test_function: FieldSpec::Bump { center: vec![0.0, 0.0], sigma: 0.5 },
                tolerances: tol(&[("cone_residual", 1e-10), ("final_gap_ratio", 1e-4), ("final_cross_ratio", 1e-4), ("weak_gap", 1e-2)]),
                params: Params {
                    n_cut: Some(vec![1.0, 2.0, 4.0, 8.0]),
                    x_points: Some(vec![vec![0.0, 0.0], vec![1.0, 2.0], vec![PI, PI]]),
                    ..Params::default()
                },
                output: OutputSpec::default(),
            },
            "garding" => Self {
                scenario: name.into(),
                grid: GridSpec { dim: 2, n: 16 },
                symbol: "proj_first".into(),
                quadform: "proj_garding".into(),
                metric: default_metric(),
                bundle_metric: None,
                family: FamilySpec {
                    ubar: Vec::new(),
                    modes: Vec::new(),
                    k_list: Vec::new(),
                },
                test_function: FieldSpec::one(),
                tolerances: tol(&[("relative_error", 0.05), ("resample_slack", -1e-8)]),
                params: Params {
                    deltas: Some(vec![0.1, 0.3, 0.5]),
                    sphere_samples: Some(64),
                    vector_samples: Some(400),
                    x_points: Some(vec![vec![0.0, 0.0], vec![1.0, 2.0]]),
                    ..Params::default()
                },
                output: OutputSpec::default(),
            },
            "pushforward-law" => Self {
                scenario: name.into(),
                grid: GridSpec { dim: 2, n: 32 },
                symbol: "laplace".into(),
                quadform: "square".into(),
                metric: default_metric(),
                bundle_metric: None,
                family: FamilySpec {
                    ubar: Vec::new(),
                    modes: Vec::new(),
                    k_list: Vec::new(),
                },
                test_function: FieldSpec::one(),
                tolerances: tol(&[("linear_defect", 1e-12), ("nonlinear_defect", 1e-10), ("operator_defect", 1e-10)]),
                params: Params {
                    diffeomorphisms: Some(vec!["scale:2".into(), "rotation:0.7".into(), "shear".into(), "sine:0.1".into()]),
                    kernel_symbol: Some("divcurl6".into()),
                    sample_points: Some(100),
                    ..Params::default()
                },
                output: OutputSpec::default(),
            },
            "two-chart" => Self {
                scenario: name.into(),
                grid: GridSpec { dim: 2, n: 32 },
                symbol: "proj_first".into(),
                quadform: "scaled:tartar".into(),
                metric: default_metric(),
                bundle_metric: None,
                family: FamilySpec {
                    ubar: vec![
                        FieldSpec::Cosine { offset: 1.0, amplitude: 0.5, axis: 0 },
                        FieldSpec::Constant { value: 0.5 },
                    ],
                    modes: vec![sin_mode(vec![0.0, 1.0], vec![1, 1])],
                    k_list: vec![2, 4, 6, 8, 10, 12],
                },
                test_function: FieldSpec::Bump { center: vec![0.0, 0.0], sigma: 0.5 },
                tolerances: tol(&[("cone_residual", 1e-10), ("localization", 1e-10), ("freeze_slack", 1e-10), ("weak_gap", 1e-2)]),
                params: Params {
                    x_points: Some(vec![vec![0.0, 0.0], vec![PI, PI]]),
                    charts: Some(vec![
                        ChartSpec { center: vec![0.0, 0.0], radius: 3.6 },
                        ChartSpec { center: vec![PI, PI], radius: 3.6 },
                    ]),
                    ..Params::default()
                },
                output: OutputSpec::default(),
            },
            _ => return Err(Error::Config(format!("unknown scenario {name:?}"))),
        };
        Ok(cfg)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs serialize")
    }

    pub fn tolerance(&self, key: &str) -> Result<f64> {
        self.tolerances
            .get(key)
            .copied()
            .ok_or_else(|| Error::Config(format!("scenario {} needs tolerance {key:?}", self.scenario)))
    }

    /// Structural checks that do not need the registries.
    pub fn validate(&self) -> Result<()> {
        if !SCENARIOS.contains(&self.scenario.as_str()) {
            return Err(Error::Config(format!("unknown scenario {:?}", self.scenario)));
        }
        TorusGrid::new(self.grid.dim, self.grid.n).map_err(|e| Error::Config(e.to_string()))?;
        let ks = &self.family.k_list;
        if ks.iter().any(|&k| k <= 0) || ks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("k_list must be positive and strictly increasing".into()));
        }
        for m in &self.family.modes {
            if m.xi0.len() != self.grid.dim {
                return Err(Error::Config(format!("xi0 {:?} does not match dimension {}", m.xi0, self.grid.dim)));
            }
        }
        if self.tolerances.values().any(|v| !v.is_finite()) {
            return Err(Error::Config("tolerances must be finite".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_round_trip_through_json() {
        for name in SCENARIOS {
            let cfg = ScenarioConfig::builtin(name).unwrap();
            cfg.validate().unwrap();
            let back = ScenarioConfig::from_json_str(&cfg.to_json_pretty()).unwrap();
            assert_eq!(back, cfg);
        }
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ScenarioConfig::builtin("nope").is_err());
        let mut cfg = ScenarioConfig::builtin("divcurl3").unwrap();
        cfg.family.k_list = vec![3, 2];
        assert!(cfg.validate().is_err());
        assert!(ScenarioConfig::from_json_str("{\"scenario\": \"divcurl3\"}").is_err());
        let text = ScenarioConfig::builtin("counterexample").unwrap().to_json_pretty().replace("\"symbol\"", "\"sym\"");
        assert!(matches!(ScenarioConfig::from_json_str(&text), Err(Error::Config(_))));
    }

    #[test]
    fn field_specs_build() {
        let g = TorusGrid::new(2, 8).unwrap();
        let f = FieldSpec::Cosine { offset: 1.0, amplitude: 0.5, axis: 1 }.build(&g).unwrap();
        for j in 0..g.len() {
            let want = 1.0 + 0.5 * g.point(j)[1].cos();
            assert!((f.component(0)[j].re - want).abs() < 1e-15);
        }
        assert!(FieldSpec::Sine { offset: 0.0, amplitude: 1.0, axis: 2 }.build(&g).is_err());
    }
}
