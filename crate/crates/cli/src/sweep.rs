//! Runs a configured sweep: one row per (lattice, sweep point, selector, method).

use std::time::Instant;

use evenodd_core::asymptotics::weak_coupling_predictions_dd;
use evenodd_core::exact_spin::DEFAULT_DIMENSION_CAP;
use evenodd_core::fock_oracle::truncated_ground_state_entropies;
use evenodd_core::spin_rpa::{rpa_entropy_with, side_limits_from_overlaps, RpaOptions};
use evenodd_core::{
    build_spin_hamiltonian, even_odd_entropy_folded, ground_state_definite_parity, mode_contractions,
    reduced_entropy_exact, subsystem_entropy, CouplingModel, Couplings, Error, Lattice, LogBase, Selector, SpinModel,
};
use rayon::prelude::*;

use crate::config::{Config, ConfigError, Method, ResolvedModel, Units};

/// Cutoff-doubling difference above which a Fock row is flagged.
pub const FOCK_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// Degenerate parity sectors; the other sector is reported in an `ed_alt` row.
    Crossing,
    /// Point at or past the instability, or inside the critical window.
    Refused,
    /// Method does not apply to this selector or model.
    Unsupported,
    Unconverged,
    Failed,
}

impl Status {
    pub fn label(&self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Crossing => "crossing",
            Status::Refused => "refused",
            Status::Unsupported => "unsupported",
            Status::Unconverged => "unconverged",
            Status::Failed => "error",
        }
    }

    fn of_error(e: &Error) -> Self {
        match e {
            Error::Unstable { .. } | Error::CriticalField { .. } => Status::Refused,
            Error::Unsupported(_) | Error::DimensionCap { .. } | Error::OddLatticeSize(_) | Error::Domain(_) => {
                Status::Unsupported
            }
            Error::CutoffNotConverged { .. } | Error::NotConverged { .. } => Status::Unconverged,
            _ => Status::Failed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub lattice: String,
    pub n: usize,
    /// In the configured units.
    pub sweep_value: f64,
    /// Absolute `lambda` or `B`.
    pub parameter: f64,
    pub method: String,
    pub selector: String,
    pub entropy_raw: Option<f64>,
    pub entropy_shifted: Option<f64>,
    pub shift_applied: bool,
    pub regime: String,
    pub spectrum_head: Vec<f64>,
    pub side_limit_minus: Option<f64>,
    pub side_limit_plus: Option<f64>,
    pub status: Status,
    pub note: String,
    key: (usize, usize, usize, usize, bool),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Timing {
    pub lattice: String,
    pub sweep_value: f64,
    pub method: String,
    pub runtime_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeInfo {
    pub label: String,
    pub n: usize,
    /// `lambda_c` or `B_c`.
    pub critical: f64,
    pub factorizing: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub rows: Vec<Row>,
    pub timings: Vec<Timing>,
    pub lattices: Vec<LatticeInfo>,
    pub base: LogBase,
}

impl SweepOutput {
    /// 0 clean, 2 numerical failure, 3 some points refused.
    pub fn exit_code(&self) -> i32 {
        let has = |f: fn(&Status) -> bool| self.rows.iter().any(|r| f(&r.status));
        if has(|s| matches!(s, Status::Failed | Status::Unconverged)) {
            2
        } else if has(|s| *s == Status::Refused) {
            3
        } else {
            0
        }
    }
}

pub fn lattice_label(lattice: &Lattice) -> String {
    lattice.sizes().iter().map(|s| s.to_string()).collect::<Vec<_>>().join("x")
}

struct Context {
    index: usize,
    info: LatticeInfo,
    model: ResolvedModel,
    selectors: Vec<Selector>,
    labels: Vec<String>,
    grid: Vec<f64>,
    scale: f64,
}

struct Emitter<'a> {
    ctx: &'a Context,
    point: usize,
    value: f64,
    parameter: f64,
    rows: Vec<Row>,
}

impl Emitter<'_> {
    fn row(&mut self, method_pos: usize, method: &str, sel: usize) -> &mut Row {
        self.rows.push(Row {
            lattice: self.ctx.info.label.clone(),
            n: self.ctx.info.n,
            sweep_value: self.value,
            parameter: self.parameter,
            method: method.to_string(),
            selector: self.ctx.labels[sel].clone(),
            entropy_raw: None,
            entropy_shifted: None,
            shift_applied: false,
            regime: String::new(),
            spectrum_head: Vec::new(),
            side_limit_minus: None,
            side_limit_plus: None,
            status: Status::Ok,
            note: String::new(),
            key: (self.ctx.index, self.point, sel, method_pos, method.ends_with("_alt")),
        });
        self.rows.last_mut().unwrap()
    }

    fn failed(&mut self, method_pos: usize, method: &str, sel: usize, e: &Error) {
        let r = self.row(method_pos, method, sel);
        r.status = Status::of_error(e);
        r.note = e.to_string();
    }

    fn entropy(&mut self, method_pos: usize, method: &str, sel: usize, raw: f64, shift: f64) -> &mut Row {
        let r = self.row(method_pos, method, sel);
        r.entropy_raw = Some(raw);
        r.entropy_shifted = Some(raw + shift);
        r.shift_applied = shift != 0.0;
        r
    }
}

fn head(spectrum: &[f64]) -> Vec<f64> {
    spectrum.iter().take(3).copied().collect()
}

pub fn run_sweep(config: &Config) -> Result<SweepOutput, ConfigError> {
    let base = config.log_base();
    let mut contexts = Vec::new();
    for (index, sizes) in config.lattices().iter().enumerate() {
        let model = config.resolve_model(sizes)?;
        let selectors = config.selectors(model.lattice())?;
        let labels = selectors.iter().map(|s| s.to_string()).collect();
        let lattice = model.lattice().clone();
        let (critical, factorizing) = match &model {
            ResolvedModel::Boson(c) => (
                c.critical_lambda().map_err(|e| ConfigError::Parse(e.to_string()))?.lambda_c,
                None,
            ),
            ResolvedModel::Spin(s) => (s.critical_field(), s.factorizing_field()),
        };
        let scale = match config.model.sweep.units {
            Units::Critical => critical,
            Units::Absolute => 1.0,
        };
        let mut grid = config.model.sweep.grid()?;
        if let Some(bs) = factorizing {
            grid.extend(config.model.sweep.factorizing_offsets.iter().map(|e| bs * (1.0 + e) / scale));
            if !config.model.sweep.factorizing_offsets.is_empty() {
                grid.sort_by(f64::total_cmp);
                grid.dedup();
            }
        }
        contexts.push(Context {
            index,
            info: LatticeInfo {
                label: lattice_label(&lattice),
                n: lattice.num_sites(),
                critical,
                factorizing,
            },
            model,
            selectors,
            labels,
            grid,
            scale,
        });
    }
    let tasks: Vec<(usize, usize)> = contexts
        .iter()
        .enumerate()
        .flat_map(|(c, ctx)| (0..ctx.grid.len()).map(move |p| (c, p)))
        .collect();
    let results: Vec<(Vec<Row>, Vec<Timing>)> = tasks
        .par_iter()
        .map(|&(c, p)| run_point(config, &contexts[c], p, base))
        .collect();
    let mut rows = Vec::new();
    let mut timings = Vec::new();
    for (r, t) in results {
        rows.extend(r);
        timings.extend(t);
    }
    rows.sort_by_key(|r| r.key);
    Ok(SweepOutput {
        rows,
        timings,
        lattices: contexts.into_iter().map(|c| c.info).collect(),
        base,
    })
}

fn run_point(config: &Config, ctx: &Context, point: usize, base: LogBase) -> (Vec<Row>, Vec<Timing>) {
    let value = ctx.grid[point];
    let mut em = Emitter {
        ctx,
        point,
        value,
        parameter: value * ctx.scale,
        rows: Vec::new(),
    };
    let mut timings = Vec::new();
    for (pos, &method) in config.methods.list.iter().enumerate() {
        let start = Instant::now();
        match &ctx.model {
            ResolvedModel::Boson(c) => boson_method(config, c, method, pos, &mut em, base),
            ResolvedModel::Spin(s) => spin_method(config, s, method, pos, &mut em, base),
        }
        timings.push(Timing {
            lattice: ctx.info.label.clone(),
            sweep_value: value,
            method: method.label().to_string(),
            runtime_ms: start.elapsed().as_secs_f64() * 1e3,
        });
    }
    (em.rows, timings)
}

fn boson_method(config: &Config, couplings: &Couplings, method: Method, pos: usize, em: &mut Emitter, base: LogBase) {
    let name = method.label();
    let ctx = em.ctx;
    let lambda = em.parameter;
    let all_failed = |em: &mut Emitter, e: &Error| {
        for sel in 0..ctx.selectors.len() {
            em.failed(pos, name, sel, e);
        }
    };
    let model = match CouplingModel::new(couplings.clone(), lambda).and_then(|m| m.dispersion().map(|_| m)) {
        Ok(m) => m,
        Err(e) => return all_failed(em, &e),
    };
    match method {
        Method::Gaussian => {
            let mc = match mode_contractions(&model) {
                Ok(mc) => mc,
                Err(e) => return all_failed(em, &e),
            };
            for (sel, selector) in ctx.selectors.iter().enumerate() {
                let result = match selector {
                    Selector::EvenComb | Selector::OddComb => even_odd_entropy_folded(&mc, base),
                    _ => subsystem_entropy(&mc, selector, base),
                };
                match result {
                    Ok(r) => em.entropy(pos, name, sel, r.raw(), r.shift).spectrum_head = head(&r.spectrum),
                    Err(e) => em.failed(pos, name, sel, &e),
                }
            }
        }
        Method::Asymptotic => {
            let lattice = couplings.lattice();
            let Some(pairing) = config.first_neighbor_pairing(lattice.dims()) else {
                return all_failed(
                    em,
                    &Error::Unsupported("weak-coupling predictions need pure first-neighbor couplings".into()),
                );
            };
            let prediction =
                match weak_coupling_predictions_dd(&pairing, lambda, lattice, config.methods.alpha_resolution) {
                    Ok(p) => p.in_base(base),
                    Err(e) => return all_failed(em, &e),
                };
            for (sel, selector) in ctx.selectors.iter().enumerate() {
                let value = match asymptotic_kind(selector, lattice) {
                    Some(AsymptoticKind::Single) => Some(prediction.single_site),
                    Some(AsymptoticKind::Comb) => Some(prediction.even_comb),
                    Some(AsymptoticKind::Block) => prediction.block,
                    None => None,
                };
                match value {
                    Some(v) => {
                        em.entropy(pos, name, sel, v, 0.0).regime = "weak_coupling".into();
                    }
                    None => em.failed(
                        pos,
                        name,
                        sel,
                        &Error::Unsupported(format!("no weak-coupling formula for {}", ctx.labels[sel])),
                    ),
                }
            }
        }
        Method::FockOracle => {
            let mut valid = Vec::new();
            for (sel, selector) in ctx.selectors.iter().enumerate() {
                match selector.sites(model.lattice()) {
                    Ok(_) => valid.push(sel),
                    Err(e) => em.failed(pos, name, sel, &e),
                }
            }
            let chosen: Vec<Selector> = valid.iter().map(|&i| ctx.selectors[i].clone()).collect();
            match truncated_ground_state_entropies(&model, config.methods.fock_cutoff, &chosen, base) {
                Ok(results) => {
                    for (&sel, r) in valid.iter().zip(results) {
                        let difference = r.cutoff_difference();
                        let row = em.entropy(pos, name, sel, r.entropy, 0.0);
                        row.note = format!("cutoff {} difference {:e}", r.cutoff, difference);
                        if difference > FOCK_TOLERANCE {
                            row.status = Status::Unconverged;
                        }
                    }
                }
                Err(e) => {
                    for &sel in &valid {
                        em.failed(pos, name, sel, &e);
                    }
                }
            }
        }
        Method::Rpa | Method::Ed => unreachable!("spin methods rejected for boson models at validation"),
    }
}

enum AsymptoticKind {
    Single,
    Comb,
    Block,
}

fn asymptotic_kind(selector: &Selector, lattice: &Lattice) -> Option<AsymptoticKind> {
    let sizes = lattice.sizes();
    match selector {
        Selector::SingleSite(_) => Some(AsymptoticKind::Single),
        Selector::EvenComb | Selector::OddComb => Some(AsymptoticKind::Comb),
        Selector::Block(ranges) => match (sizes, ranges.as_slice()) {
            ([_], [(_, 1)]) => Some(AsymptoticKind::Single),
            ([n], [(_, len)]) if *len >= 2 && *len + 2 <= *n => Some(AsymptoticKind::Block),
            ([nx, ny], [(_, lx), (_, ly)]) if lx == nx && 2 * ly == *ny => Some(AsymptoticKind::Block),
            _ => None,
        },
        Selector::Explicit(_) => None,
    }
}

fn spin_method(config: &Config, spin: &SpinModel, method: Method, pos: usize, em: &mut Emitter, base: LogBase) {
    let name = method.label();
    let ctx = em.ctx;
    let model = spin.with_field(em.parameter);
    match method {
        Method::Rpa => {
            let options = RpaOptions {
                overlap_threshold: config.methods.overlap_threshold,
            };
            for (sel, selector) in ctx.selectors.iter().enumerate() {
                match rpa_entropy_with(&model, selector, base, &options) {
                    Ok(r) => {
                        let row = em.entropy(pos, name, sel, r.result.raw(), r.result.shift);
                        row.regime = r.regime.label().to_string();
                        row.spectrum_head = head(&r.result.spectrum);
                        if let Some((a, b)) = r.overlaps {
                            let limits = side_limits_from_overlaps(a, b, base);
                            row.side_limit_minus = Some(limits.minus);
                            row.side_limit_plus = Some(limits.plus);
                        }
                    }
                    Err(e) => em.failed(pos, name, sel, &e),
                }
            }
        }
        Method::Ed => {
            let ground = build_spin_hamiltonian(&model, DEFAULT_DIMENSION_CAP)
                .and_then(|h| ground_state_definite_parity(&h).map(|g| (h, g)));
            let (h, g) = match ground {
                Ok(x) => x,
                Err(e) => {
                    for sel in 0..ctx.selectors.len() {
                        em.failed(pos, name, sel, &e);
                    }
                    return;
                }
            };
            let alt_name = format!("{name}_alt");
            for (sel, selector) in ctx.selectors.iter().enumerate() {
                let mut sectors = vec![(name, g.ground())];
                if g.crossing {
                    sectors.push((alt_name.as_str(), g.sector(-g.ground_parity)));
                }
                for (label, sector) in sectors {
                    match reduced_entropy_exact(&h.basis, &sector.vector, selector, base) {
                        Ok(s) => {
                            let row = em.entropy(pos, label, sel, s, 0.0);
                            row.regime = format!("parity{:+}", sector.parity);
                            if g.crossing {
                                row.status = Status::Crossing;
                                row.note = format!("gap {:e}", g.gap);
                            }
                        }
                        Err(e) => em.failed(pos, label, sel, &e),
                    }
                }
            }
        }
        _ => unreachable!("boson methods rejected for spin models at validation"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn boson(extra: &str) -> Config {
        let text = format!(
            r#"
            [model]
            kind = "boson"
            sizes = [12]
            first_neighbor = {{ plus = [0.9], minus = [0.3] }}
            [model.sweep]
            values = [0.5, 1.0, 2.0, 10.0]
            [selectors]
            list = ["single_site", "block:4", "even_comb", "explicit:[0;5]"]
            [methods]
            list = ["gaussian", "asymptotic"]
            {extra}
            "#
        );
        Config::from_toml(&text).unwrap()
    }

    #[test]
    fn rows_are_ordered_point_major() {
        let out = run_sweep(&boson("")).unwrap();
        assert_eq!(out.rows.len(), 4 * 4 * 2);
        let keys: Vec<_> = out.rows.iter().map(|r| r.key).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert_eq!(out.rows[0].method, "gaussian");
        assert_eq!(out.rows[1].method, "asymptotic");
        assert_eq!(out.rows[2].selector, "block:4");
    }

    #[test]
    fn unstable_points_are_refused() {
        let out = run_sweep(&boson("")).unwrap();
        for r in &out.rows {
            if r.sweep_value <= 1.0 && r.method == "gaussian" {
                assert_eq!(r.status, Status::Refused, "{r:?}");
            }
        }
        assert_eq!(out.exit_code(), 3);
        let weak = out
            .rows
            .iter()
            .find(|r| r.sweep_value == 10.0 && r.method == "asymptotic" && r.selector == "explicit:[0;5]")
            .unwrap();
        assert_eq!(weak.status, Status::Unsupported);
    }

    #[test]
    fn asymptotic_tracks_gaussian_at_weak_coupling() {
        let out = run_sweep(&boson("")).unwrap();
        let at = |m: &str, s: &str| {
            out.rows
                .iter()
                .find(|r| r.sweep_value == 10.0 && r.method == m && r.selector == s)
                .unwrap()
                .entropy_raw
                .unwrap()
        };
        for s in ["single_site:0", "block:4", "even_comb"] {
            let (g, a) = (at("gaussian", s), at("asymptotic", s));
            assert!((g - a).abs() / g < 0.05, "{s}: {g} vs {a}");
        }
    }

    #[test]
    fn shifted_is_raw_plus_shift() {
        let text = r#"
            [model]
            kind = "spin"
            sizes = [6]
            first_neighbor = { jx = [1.0], jy = [0.5] }
            [model.sweep]
            from = 0.15
            to = 1.95
            steps = 7
            factorizing_offsets = [0.0]
            [selectors]
            list = ["even_comb", "block:3"]
            [methods]
            list = ["rpa", "ed"]
            overlap_threshold = 0.2
            [output]
            log_base = "2"
        "#;
        let out = run_sweep(&Config::from_toml(text).unwrap()).unwrap();
        assert_eq!(out.exit_code(), 0);
        for r in &out.rows {
            let (raw, shifted) = (r.entropy_raw.unwrap(), r.entropy_shifted.unwrap());
            let shift = if r.shift_applied { 1.0 } else { 0.0 };
            assert_eq!(shifted, raw + shift);
        }
        // factorizing field: both parities reported
        let bs = 0.5f64.sqrt();
        let alt: Vec<_> = out.rows.iter().filter(|r| r.method == "ed_alt").collect();
        assert_eq!(alt.len(), 2);
        assert!(alt.iter().all(|r| (r.parameter - bs).abs() < 1e-12 && r.status == Status::Crossing));
        let fact = out
            .rows
            .iter()
            .find(|r| r.method == "rpa" && r.regime == "factorized")
            .unwrap();
        assert!(fact.shift_applied && fact.side_limit_minus.is_some());
    }
}
