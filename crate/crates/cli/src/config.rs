//! TOML run configuration.
//!
//! ```toml
//! [model]
//! kind = "boson"                  # or "spin"
//! sizes = [36]
//! first_neighbor = { plus = [0.9], minus = [0.3] }   # spin: { jx = [...], jy = [...] }
//!
//! [model.sweep]
//! units = "critical"              # values are multiples of lambda_c (B_c); or "absolute"
//! log_from = -3.0                 # 10^x + offset; or from/to/steps, or values = [...]
//! log_to = 0.6
//! offset = 1.0
//! steps = 40
//!
//! [selectors]
//! list = ["single_site", "even_comb", "block:18"]
//!
//! [methods]
//! list = ["gaussian", "asymptotic"]
//!
//! [output]
//! dir = "out/fig2_1d"
//! log_base = "e"
//! figure_preset = "fig2_1d"
//! ```

use std::fmt;
use std::path::Path;

use evenodd_core::{Couplings, Lattice, LogBase, Selector, SpinModel};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Parse(String),
    #[error("invalid config field `{field}`: {reason}")]
    Field { field: String, reason: String },
}

fn field_err(field: &str, reason: impl fmt::Display) -> ConfigError {
    ConfigError::Field {
        field: field.to_string(),
        reason: reason.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Boson,
    Spin,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FirstNeighbor {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plus: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minus: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jx: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jy: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingEntry {
    pub displacement: Vec<usize>,
    #[serde(default)]
    pub plus: f64,
    #[serde(default)]
    pub minus: f64,
    #[serde(default)]
    pub jx: f64,
    #[serde(default)]
    pub jy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    #[default]
    Critical,
    Absolute,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub units: Units,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_from: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_to: Option<f64>,
    #[serde(default)]
    pub steps: usize,
    #[serde(default)]
    pub offset: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    /// Spin models only: extra points `B_s (1 + eps)` around the factorizing field.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub factorizing_offsets: Vec<f64>,
}

impl SweepConfig {
    /// Sweep values in configured units, in order.
    pub fn grid(&self) -> Result<Vec<f64>, ConfigError> {
        let linspace = |a: f64, b: f64, n: usize| -> Vec<f64> {
            match n {
                0 => vec![],
                1 => vec![a],
                _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
            }
        };
        let raw = match (&self.values, self.from, self.to, self.log_from, self.log_to) {
            (Some(v), None, None, None, None) => v.clone(),
            (None, Some(a), Some(b), None, None) => linspace(a, b, self.steps),
            (None, None, None, Some(a), Some(b)) => linspace(a, b, self.steps).into_iter().map(|x| 10f64.powf(x)).collect(),
            _ => {
                return Err(field_err(
                    "model.sweep",
                    "give exactly one of `values`, `from`/`to`/`steps` or `log_from`/`log_to`/`steps`",
                ))
            }
        };
        let grid: Vec<f64> = raw.into_iter().map(|x| x + self.offset).collect();
        if let Some(x) = grid.iter().find(|x| !x.is_finite()) {
            return Err(field_err("model.sweep", format!("non-finite sweep value {x}")));
        }
        Ok(grid)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sizes: Vec<usize>,
    /// Runs the same sweep on several lattices, instead of `sizes`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub scan_sizes: Vec<Vec<usize>>,
    /// Spin quantum number (spin models only).
    #[serde(default = "default_spin")]
    pub spin: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_neighbor: Option<FirstNeighbor>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub couplings: Vec<CouplingEntry>,
    pub sweep: SweepConfig,
}

fn default_spin() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectorsConfig {
    pub list: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Gaussian,
    Asymptotic,
    FockOracle,
    Rpa,
    Ed,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Gaussian => "gaussian",
            Method::Asymptotic => "asymptotic",
            Method::FockOracle => "fock_oracle",
            Method::Rpa => "rpa",
            Method::Ed => "ed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodsConfig {
    pub list: Vec<Method>,
    #[serde(default = "default_overlap_threshold")]
    pub overlap_threshold: f64,
    #[serde(default = "default_fock_cutoff")]
    pub fock_cutoff: usize,
    #[serde(default = "default_alpha_resolution")]
    pub alpha_resolution: usize,
}

fn default_overlap_threshold() -> f64 {
    evenodd_core::spin_rpa::DEFAULT_OVERLAP_THRESHOLD
}

fn default_fock_cutoff() -> usize {
    30
}

fn default_alpha_resolution() -> usize {
    evenodd_core::asymptotics::DEFAULT_ALPHA_RESOLUTION
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FigurePreset {
    #[default]
    None,
    Fig2_1d,
    Fig2_2d,
    Fig3,
    Fig4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LogBaseName {
    #[default]
    #[serde(rename = "e")]
    E,
    #[serde(rename = "2")]
    Two,
}

impl From<LogBaseName> for LogBase {
    fn from(b: LogBaseName) -> Self {
        match b {
            LogBaseName::E => LogBase::Natural,
            LogBaseName::Two => LogBase::Two,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: String,
    #[serde(default)]
    pub log_base: LogBaseName,
    #[serde(default)]
    pub figure_preset: FigurePreset,
}

fn default_dir() -> String {
    "out".to_string()
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            log_base: LogBaseName::E,
            figure_preset: FigurePreset::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub model: ModelConfig,
    pub selectors: SelectorsConfig,
    pub methods: MethodsConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// A model on one lattice, ready to run.
#[derive(Debug, Clone)]
pub enum ResolvedModel {
    Boson(Couplings),
    Spin(SpinModel),
}

impl ResolvedModel {
    pub fn lattice(&self) -> &Lattice {
        match self {
            ResolvedModel::Boson(c) => c.lattice(),
            ResolvedModel::Spin(s) => s.lattice(),
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: Config = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    /// The resolved configuration, defaults included.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn log_base(&self) -> LogBase {
        self.output.log_base.into()
    }

    pub fn lattices(&self) -> Vec<Vec<usize>> {
        if self.model.scan_sizes.is_empty() {
            vec![self.model.sizes.clone()]
        } else {
            self.model.scan_sizes.clone()
        }
    }

    pub fn two_s(&self) -> Result<u32, ConfigError> {
        let two_s = 2.0 * self.model.spin;
        if !(two_s >= 1.0 && (two_s - two_s.round()).abs() < 1e-12) {
            return Err(field_err("model.spin", format!("{} is not a positive half-integer", self.model.spin)));
        }
        Ok(two_s.round() as u32)
    }

    pub fn selectors(&self, lattice: &Lattice) -> Result<Vec<Selector>, ConfigError> {
        self.selectors
            .list
            .iter()
            .map(|s| {
                let sel: Selector = s.parse().map_err(|e| field_err("selectors.list", e))?;
                let sel = sel.resolve(lattice);
                sel.sites(lattice).map_err(|e| field_err("selectors.list", e))?;
                Ok(sel)
            })
            .collect()
    }

    pub fn resolve_model(&self, sizes: &[usize]) -> Result<ResolvedModel, ConfigError> {
        let lattice = Lattice::new(sizes.to_vec()).map_err(|e| field_err("model.sizes", e))?;
        let m = &self.model;
        let (a_name, b_name) = match m.kind {
            ModelKind::Boson => ("plus", "minus"),
            ModelKind::Spin => ("jx", "jy"),
        };
        let mut a_entries: Vec<(Vec<usize>, f64)> = Vec::new();
        let mut b_entries: Vec<(Vec<usize>, f64)> = Vec::new();
        if let Some(fnb) = &m.first_neighbor {
            let (a, b, wrong) = match m.kind {
                ModelKind::Boson => (&fnb.plus, &fnb.minus, fnb.jx.is_some() || fnb.jy.is_some()),
                ModelKind::Spin => (&fnb.jx, &fnb.jy, fnb.plus.is_some() || fnb.minus.is_some()),
            };
            if wrong {
                return Err(field_err(
                    "model.first_neighbor",
                    format!("{:?} models take `{a_name}` and `{b_name}`", m.kind),
                ));
            }
            let d = lattice.dims();
            let a = a.clone().unwrap_or_else(|| vec![0.0; d]);
            let b = b.clone().unwrap_or_else(|| vec![0.0; d]);
            let c = Couplings::first_neighbor(lattice.clone(), &a, &b).map_err(|e| field_err("model.first_neighbor", e))?;
            a_entries.extend(c.plus_entries().map(|(l, v)| (lattice.coords(l), v)));
            b_entries.extend(c.minus_entries().map(|(l, v)| (lattice.coords(l), v)));
        }
        for (i, e) in m.couplings.iter().enumerate() {
            let (a, b, wrong) = match m.kind {
                ModelKind::Boson => (e.plus, e.minus, e.jx != 0.0 || e.jy != 0.0),
                ModelKind::Spin => (e.jx, e.jy, e.plus != 0.0 || e.minus != 0.0),
            };
            if wrong {
                return Err(field_err(
                    &format!("model.couplings[{i}]"),
                    format!("{:?} models take `{a_name}` and `{b_name}`", m.kind),
                ));
            }
            if e.displacement.len() != lattice.dims() {
                return Err(field_err(
                    &format!("model.couplings[{i}].displacement"),
                    format!("needs {} components", lattice.dims()),
                ));
            }
            a_entries.push((e.displacement.clone(), a));
            b_entries.push((e.displacement.clone(), b));
        }
        match m.kind {
            ModelKind::Boson => Couplings::from_entries(lattice, a_entries, b_entries)
                .map(ResolvedModel::Boson)
                .map_err(|e| field_err("model.couplings", e)),
            ModelKind::Spin => SpinModel::new(lattice, self.two_s()?, 0.0, a_entries, b_entries)
                .map(ResolvedModel::Spin)
                .map_err(|e| field_err("model.couplings", e)),
        }
    }

    /// Per-axis first-neighbor pairing, when the model is pure first-neighbor.
    pub fn first_neighbor_pairing(&self, dims: usize) -> Option<Vec<f64>> {
        if !self.model.couplings.is_empty() {
            return None;
        }
        let f = self.model.first_neighbor.as_ref()?;
        Some(f.minus.clone().unwrap_or_else(|| vec![0.0; dims]))
    }

    /// Reference scale, unit checks and method size limits on one lattice.
    fn check_scale(&self, model: &ResolvedModel) -> Result<(), ConfigError> {
        let n = model.lattice().num_sites();
        match model {
            ResolvedModel::Boson(c) => {
                let cp = c.critical_lambda().map_err(|e| field_err("model.couplings", e))?;
                if self.model.sweep.units == Units::Critical && !(cp.lambda_c > 0.0) {
                    return Err(field_err("model.sweep.units", "lambda_c vanishes; use absolute units"));
                }
                if self.methods.list.contains(&Method::FockOracle) {
                    if n > evenodd_core::fock_oracle::MAX_MODES {
                        return Err(field_err(
                            "methods.list",
                            format!("fock_oracle handles at most {} modes, lattice has {n}", evenodd_core::fock_oracle::MAX_MODES),
                        ));
                    }
                    let range = evenodd_core::fock_oracle::MIN_CUTOFF..=evenodd_core::fock_oracle::MAX_CUTOFF;
                    if !range.contains(&self.methods.fock_cutoff) {
                        return Err(field_err("methods.fock_cutoff", format!("must lie in {range:?}")));
                    }
                }
            }
            ResolvedModel::Spin(s) => {
                if self.model.sweep.units == Units::Critical && !(s.critical_field() > 0.0) {
                    return Err(field_err("model.sweep.units", "B_c = sum Jx must be positive for critical units"));
                }
                if !self.model.sweep.factorizing_offsets.is_empty() && s.factorizing_field().is_none() {
                    return Err(field_err("model.sweep.factorizing_offsets", "model has no factorizing field"));
                }
                if self.methods.list.contains(&Method::Ed) {
                    let local = s.two_s() as f64 + 1.0;
                    let cap = evenodd_core::exact_spin::DEFAULT_DIMENSION_CAP;
                    if local.powi(n as i32) > cap as f64 {
                        return Err(field_err(
                            "methods.list",
                            format!("ed needs dimension {local}^{n}, above the cap {cap}"),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), ConfigError> {
        self.model.sweep.grid()?;
        if !self.model.sizes.is_empty() && !self.model.scan_sizes.is_empty() {
            return Err(field_err("model.scan_sizes", "give either `sizes` or `scan_sizes`"));
        }
        if self.lattices().iter().any(|s| s.is_empty()) {
            return Err(field_err("model.sizes", "lattice needs at least one axis"));
        }
        if self.model.first_neighbor.is_none() && self.model.couplings.is_empty() {
            return Err(field_err("model", "give `first_neighbor` and/or `couplings`"));
        }
        if self.methods.list.is_empty() {
            return Err(field_err("methods.list", "no method requested"));
        }
        if self.selectors.list.is_empty() {
            return Err(field_err("selectors.list", "no selector requested"));
        }
        if !(self.methods.overlap_threshold > 0.0 && self.methods.overlap_threshold <= 1.0) {
            return Err(field_err("methods.overlap_threshold", "must lie in (0, 1]"));
        }
        for &method in &self.methods.list {
            let ok = match self.model.kind {
                ModelKind::Boson => matches!(method, Method::Gaussian | Method::Asymptotic | Method::FockOracle),
                ModelKind::Spin => matches!(method, Method::Rpa | Method::Ed),
            };
            if !ok {
                return Err(field_err(
                    "methods.list",
                    format!("method `{}` does not apply to {:?} models", method.label(), self.model.kind),
                ));
            }
        }
        if self.model.kind == ModelKind::Spin {
            self.two_s()?;
        } else if !self.model.sweep.factorizing_offsets.is_empty() {
            return Err(field_err("model.sweep.factorizing_offsets", "only spin models have a factorizing field"));
        }
        for sizes in self.lattices() {
            let model = self.resolve_model(&sizes)?;
            self.selectors(model.lattice())?;
            self.check_scale(&model)?;
        }
        match self.output.figure_preset {
            FigurePreset::Fig4 => {
                if self.model.kind != ModelKind::Spin || !self.methods.list.contains(&Method::Ed) {
                    return Err(field_err("output.figure_preset", "fig4 needs a spin model with the `ed` method"));
                }
                if !self.selectors.list.iter().any(|s| s.trim() == "even_comb") {
                    return Err(field_err("output.figure_preset", "fig4 needs the `even_comb` selector"));
                }
            }
            FigurePreset::Fig3 if self.model.kind != ModelKind::Spin => {
                return Err(field_err("output.figure_preset", "fig3 needs a spin model"));
            }
            FigurePreset::Fig2_1d | FigurePreset::Fig2_2d => {
                let has = |name: &str| self.selectors.list.iter().any(|s| s.trim() == name);
                if self.model.kind != ModelKind::Boson || !self.methods.list.contains(&Method::Gaussian) {
                    return Err(field_err("output.figure_preset", "fig2 presets need a boson model with the `gaussian` method"));
                }
                if !has("single_site") || !has("even_comb") {
                    return Err(field_err("output.figure_preset", "fig2 presets need the `single_site` and `even_comb` selectors"));
                }
            }
            _ => {}
        }
        Ok(())
    }
}
