//! CSV tables, gnuplot scripts and the run metadata file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::{Config, FigurePreset, ModelKind, Units};
use crate::sweep::{Row, SweepOutput};

#[derive(Debug, thiserror::Error)]
#[error("cannot write {path}: {source}")]
pub struct OutputError {
    pub path: PathBuf,
    #[source]
    pub source: std::io::Error,
}

pub const RESULT_COLUMNS: [&str; 15] = [
    "lattice",
    "n",
    "sweep_value",
    "parameter",
    "method",
    "selector",
    "entropy_raw",
    "entropy_shifted",
    "shift_applied",
    "regime",
    "spectrum_head",
    "side_limit_minus",
    "side_limit_plus",
    "status",
    "note",
];

/// Shortest round-trip representation; identical bits give identical text.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn csv_bytes<I, R>(header: &[&str], records: I) -> Vec<u8>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in records {
        w.write_record(r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

fn row_record(r: &Row) -> Vec<String> {
    vec![
        r.lattice.clone(),
        r.n.to_string(),
        fmt_f64(r.sweep_value),
        fmt_f64(r.parameter),
        r.method.clone(),
        r.selector.clone(),
        fmt_opt(r.entropy_raw),
        fmt_opt(r.entropy_shifted),
        r.shift_applied.to_string(),
        r.regime.clone(),
        r.spectrum_head.iter().map(|&x| fmt_f64(x)).collect::<Vec<_>>().join(";"),
        fmt_opt(r.side_limit_minus),
        fmt_opt(r.side_limit_plus),
        r.status.label().to_string(),
        r.note.clone(),
    ]
}

pub fn results_csv<'a>(rows: impl IntoIterator<Item = &'a Row>) -> Vec<u8> {
    csv_bytes(&RESULT_COLUMNS, rows.into_iter().map(row_record))
}

/// Entropies of the gaussian single-site, even-comb and first block selectors
/// side by side, with their ratios.
pub fn ratios_csv(out: &SweepOutput) -> Vec<u8> {
    let mut points: BTreeMap<(usize, usize), [Option<f64>; 3]> = BTreeMap::new();
    let mut values: BTreeMap<(usize, usize), (String, f64)> = BTreeMap::new();
    let mut order = BTreeMap::new();
    let mut block_label: BTreeMap<&str, &str> = BTreeMap::new();
    for r in &out.rows {
        if r.method != "gaussian" {
            continue;
        }
        let lattice = out.lattices.iter().position(|l| l.label == r.lattice).unwrap_or(0);
        let next = order.len();
        let point = *order.entry((lattice, r.sweep_value.to_bits())).or_insert(next);
        let slot = if r.selector.starts_with("single_site") {
            0
        } else if r.selector == "even_comb" {
            1
        } else if r.selector.starts_with("block:") && *block_label.entry(&r.lattice).or_insert(&r.selector) == r.selector {
            2
        } else {
            continue;
        };
        let entry = points.entry((lattice, point)).or_default();
        if entry[slot].is_none() {
            entry[slot] = r.entropy_raw;
        }
        values.insert((lattice, point), (r.lattice.clone(), r.sweep_value));
    }
    let ratio = |a: Option<f64>, b: Option<f64>| match (a, b) {
        (Some(a), Some(b)) if b > 0.0 => Some(a / b),
        _ => None,
    };
    let header = ["lattice", "sweep_value", "S_i", "S_E", "S_L", "S_E_over_S_i", "S_L_over_S_i"];
    let records = points.iter().map(|(key, [si, se, sl])| {
        let (label, x) = &values[key];
        vec![
            label.clone(),
            fmt_f64(*x),
            fmt_opt(*si),
            fmt_opt(*se),
            fmt_opt(*sl),
            fmt_opt(ratio(*se, *si)),
            fmt_opt(ratio(*sl, *si)),
        ]
    });
    csv_bytes(&header, records)
}

/// One record of the intensive even-comb table.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensivePoint {
    pub field: f64,
    pub n: usize,
    pub per_site: f64,
    pub shifted_per_site: f64,
}

/// `S(E) / (n/2)` of the exact ground state, and the same after removing
/// the parity shift below the factorizing field.
pub fn intensive_points(out: &SweepOutput) -> Vec<IntensivePoint> {
    let delta = out.base.ln2();
    out.rows
        .iter()
        .filter(|r| r.method == "ed" && r.selector == "even_comb")
        .filter_map(|r| {
            let s = r.entropy_raw?;
            let info = out.lattices.iter().find(|l| l.label == r.lattice)?;
            let below = info.factorizing.is_some_and(|bs| r.parameter.abs() < bs);
            let half = r.n as f64 / 2.0;
            Some(IntensivePoint {
                field: r.parameter,
                n: r.n,
                per_site: s / half,
                shifted_per_site: (s - if below { delta } else { 0.0 }) / half,
            })
        })
        .collect()
}

pub fn intensive_csv(out: &SweepOutput) -> Vec<u8> {
    let header = ["B", "n", "S_E_per_site", "S_E_shifted_per_site"];
    let records = intensive_points(out)
        .into_iter()
        .map(|p| vec![fmt_f64(p.field), p.n.to_string(), fmt_f64(p.per_site), fmt_f64(p.shifted_per_site)]);
    csv_bytes(&header, records)
}

pub fn timings_csv(out: &SweepOutput) -> Vec<u8> {
    let header = ["lattice", "sweep_value", "method", "runtime_ms"];
    let records = out
        .timings
        .iter()
        .map(|t| vec![t.lattice.clone(), fmt_f64(t.sweep_value), t.method.clone(), format!("{:.3}", t.runtime_ms)]);
    csv_bytes(&header, records)
}

pub fn run_meta(config: &Config) -> String {
    format!(
        "# evenodd {} resolved configuration (defaults included)\n{}",
        env!("CARGO_PKG_VERSION"),
        config.to_toml()
    )
}

fn curves(out: &SweepOutput) -> Vec<(String, String, String)> {
    let mut seen = Vec::new();
    for r in &out.rows {
        let c = (r.lattice.clone(), r.method.clone(), r.selector.clone());
        if r.entropy_raw.is_some() && !seen.contains(&c) {
            seen.push(c);
        }
    }
    seen
}

fn x_label(config: &Config) -> &'static str {
    match (config.model.kind, config.model.sweep.units) {
        (ModelKind::Boson, Units::Critical) => "lambda / lambda_c",
        (ModelKind::Boson, Units::Absolute) => "lambda",
        (ModelKind::Spin, Units::Critical) => "B / B_c",
        (ModelKind::Spin, Units::Absolute) => "B",
    }
}

fn results_plot(out: &SweepOutput, file: &str, filter: impl Fn(&(String, String, String)) -> bool) -> String {
    let parts: Vec<String> = curves(out)
        .into_iter()
        .filter(|c| filter(c))
        .map(|(lattice, method, selector)| {
            format!(
                "'{file}' every ::1 using 3:(strcol(1) eq '{lattice}' && strcol(5) eq '{method}' && strcol(6) eq '{selector}' ? $8 : NaN) with linespoints title '{method} {selector} ({lattice})'"
            )
        })
        .collect();
    if parts.is_empty() {
        "print 'no data'\n".to_string()
    } else {
        format!("plot {}\n", parts.join(", \\\n     "))
    }
}

pub fn plot_script(config: &Config, out: &SweepOutput) -> String {
    let unit = match out.base {
        evenodd_core::LogBase::Natural => "nats",
        evenodd_core::LogBase::Two => "bits",
    };
    let mut s = String::new();
    s.push_str("set datafile separator ','\nset datafile missing ''\nset key outside right\n");
    let _ = writeln!(s, "set xlabel '{}'", x_label(config));
    let _ = writeln!(s, "set ylabel 'entropy ({unit})'");
    match config.output.figure_preset {
        FigurePreset::None => s.push_str(&results_plot(out, "results.csv", |_| true)),
        FigurePreset::Fig2_1d | FigurePreset::Fig2_2d => {
            s.push_str("set multiplot layout 2,1\nset logscale x\n");
            s.push_str(&results_plot(out, "results.csv", |_| true));
            s.push_str("set ylabel 'ratio to single-site entropy'\nset yrange [0:*]\n");
            s.push_str(
                "plot 'ratios.csv' every ::1 using 2:6 with linespoints title 'S_E / S_i', \\\n     \
                 'ratios.csv' every ::1 using 2:7 with linespoints title 'S_L / S_i'\n",
            );
            s.push_str("unset multiplot\n");
        }
        FigurePreset::Fig3 => {
            s.push_str("set multiplot layout 1,2\n");
            s.push_str(&results_plot(out, "results.csv", |c| c.2 == "even_comb"));
            s.push_str(&results_plot(out, "results.csv", |c| c.2.starts_with("block:")));
            s.push_str("unset multiplot\n");
        }
        FigurePreset::Fig4 => {
            let ns: Vec<usize> = {
                let mut v: Vec<usize> = out.lattices.iter().map(|l| l.n).collect();
                v.dedup();
                v
            };
            s.push_str("set multiplot layout 2,1\n");
            let top: Vec<String> = ns
                .iter()
                .map(|n| {
                    format!(
                        "'results_n{n}.csv' every ::1 using 4:(strcol(5) eq 'ed' && strcol(6) eq 'even_comb' ? $7 : NaN) with lines title 'n = {n}'"
                    )
                })
                .collect();
            let _ = writeln!(s, "set xlabel 'B'\nplot {}", top.join(", \\\n     "));
            let bottom: Vec<String> = ns
                .iter()
                .map(|n| format!("'intensive.csv' every ::1 using 1:($2 == {n} ? $3 : NaN) with lines title 'n = {n}'"))
                .collect();
            let _ = writeln!(s, "set ylabel 'S_E / (n/2)'\nplot {}", bottom.join(", \\\n     "));
            let inset: Vec<String> = ns
                .iter()
                .map(|n| format!("'intensive.csv' every ::1 using 1:($2 == {n} ? $4 : NaN) with lines notitle"))
                .collect();
            let _ = writeln!(
                s,
                "set origin 0.55,0.1\nset size 0.3,0.25\nset ylabel '(S_E - delta) / (n/2)'\nplot {}",
                inset.join(", \\\n     ")
            );
            s.push_str("unset multiplot\n");
        }
    }
    s
}

/// Every file of a run, by name, in writing order.
pub fn render(config: &Config, out: &SweepOutput) -> Vec<(String, Vec<u8>)> {
    let mut files = vec![
        ("results.csv".to_string(), results_csv(&out.rows)),
        ("plot.gp".to_string(), plot_script(config, out).into_bytes()),
        ("run_meta.toml".to_string(), run_meta(config).into_bytes()),
    ];
    match config.output.figure_preset {
        FigurePreset::Fig2_1d | FigurePreset::Fig2_2d => files.push(("ratios.csv".into(), ratios_csv(out))),
        FigurePreset::Fig4 => {
            let mut ns: Vec<usize> = out.lattices.iter().map(|l| l.n).collect();
            ns.sort();
            ns.dedup();
            for n in ns {
                files.push((format!("results_n{n}.csv"), results_csv(out.rows.iter().filter(|r| r.n == n))));
            }
            files.push(("intensive.csv".into(), intensive_csv(out)));
        }
        _ => {}
    }
    files
}

/// Writes all outputs into `dir`; `timings.csv` is the only file that
/// differs between reruns.
pub fn emit_outputs(config: &Config, out: &SweepOutput, dir: &Path) -> Result<Vec<PathBuf>, OutputError> {
    let err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| OutputError { path, source }
    };
    fs::create_dir_all(dir).map_err(err(dir))?;
    let mut written = Vec::new();
    for (name, bytes) in render(config, out).into_iter().chain([("timings.csv".to_string(), timings_csv(out))]) {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(err(&path))?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::run_sweep;

    #[test]
    fn empty_grid_gives_header_only() {
        let text = r#"
            [model]
            kind = "boson"
            sizes = [8]
            first_neighbor = { plus = [0.9], minus = [0.3] }
            [model.sweep]
            values = []
            [selectors]
            list = ["even_comb"]
            [methods]
            list = ["gaussian"]
        "#;
        let config = Config::from_toml(text).unwrap();
        let out = run_sweep(&config).unwrap();
        let csv = String::from_utf8(results_csv(&out.rows)).unwrap();
        assert_eq!(csv, format!("{}\n", RESULT_COLUMNS.join(",")));
        assert_eq!(out.exit_code(), 0);
    }

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, 1e-300, 12345.678, -0.0] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn run_meta_parses_back() {
        let text = r#"
            [model]
            kind = "spin"
            sizes = [4]
            first_neighbor = { jx = [1.0], jy = [0.5] }
            [model.sweep]
            values = [2.0]
            [selectors]
            list = ["even_comb"]
            [methods]
            list = ["rpa"]
        "#;
        let config = Config::from_toml(text).unwrap();
        assert_eq!(Config::from_toml(&run_meta(&config)).unwrap(), config);
    }
}
