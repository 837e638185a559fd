//! Acceptance criteria 1 to 10. Each criterion is a list of named checks;
//! a criterion passes when all of its checks do.

use std::fmt;
use std::time::{Duration, Instant};

use evenodd_core::asymptotics::weak_coupling_predictions_dd;
use evenodd_core::elliptic::complete_k;
use evenodd_core::exact_spin::{fidelity, parity_projected_tilted_states, DEFAULT_DIMENSION_CAP};
use evenodd_core::fock_oracle::truncated_ground_state_entropies;
use evenodd_core::{
    build_spin_hamiltonian, critical_divergence_law, even_odd_entropy_folded, factorized_side_limits, geometric_alpha,
    ground_state_definite_parity, mode_contractions, reduced_entropy_exact, rpa_entropy, subsystem_entropy,
    symplectic_spectrum, weak_coupling_predictions_1d, xy_block_entropy_infinite, ContractionMatrix, CouplingModel,
    Couplings, Lattice, LogBase, ModeContractions, Selector, SpinModel,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::Config;
use crate::output::{intensive_points, render};
use crate::sweep::run_sweep;

/// Configurations shipped in `configs/`, by name.
pub const SHIPPED_CONFIGS: [(&str, &str); 4] = [
    ("fig2_1d", include_str!("../../../configs/fig2_1d.toml")),
    ("fig2_2d", include_str!("../../../configs/fig2_2d.toml")),
    ("fig3", include_str!("../../../configs/fig3.toml")),
    ("fig4", include_str!("../../../configs/fig4.toml")),
];

pub fn shipped_config(name: &str) -> Config {
    let (_, text) = SHIPPED_CONFIGS.iter().find(|(n, _)| *n == name).expect("known config");
    Config::from_toml(text).expect("shipped configs are valid")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn check(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Check {
    Check {
        name: name.into(),
        pass,
        detail: detail.into(),
    }
}

/// `value <= bound`, with both in the detail.
fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Check {
    check(name, value <= bound, format!("{value:.3e} (bound {bound:.0e})"))
}

#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub id: u8,
    pub title: &'static str,
    pub checks: Vec<Check>,
    pub elapsed: Duration,
}

impl CriterionReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        writeln!(
            f,
            "criterion {:>2} {verdict}  {} ({:.1} s)",
            self.id,
            self.title,
            self.elapsed.as_secs_f64()
        )?;
        for c in &self.checks {
            writeln!(f, "    [{}] {}: {}", if c.pass { "ok" } else { "!!" }, c.name, c.detail)?;
        }
        Ok(())
    }
}

pub const TITLES: [&str; 10] = [
    "purity and bipartition symmetry",
    "Fock-space oracle equivalence",
    "geometric factors",
    "weak-coupling asymptotics",
    "critical scaling",
    "thermodynamic XY block entropy",
    "factorizing field",
    "strong-field RPA exactness",
    "parity-shift extensivity",
    "determinism",
];

pub fn run_criterion(id: u8) -> CriterionReport {
    let start = Instant::now();
    let result = match id {
        1 => purity_and_symmetry(),
        2 => fock_equivalence(),
        3 => geometric_factors(),
        4 => weak_coupling(),
        5 => critical_scaling(),
        6 => thermodynamic_block(),
        7 => factorizing_field(),
        8 => strong_field(),
        9 => extensivity(),
        10 => determinism(),
        _ => Err(format!("no criterion {id}")),
    };
    let mut checks = result.unwrap_or_else(|e| vec![check("evaluation", false, e)]);
    let elapsed = start.elapsed();
    let limit = match id {
        1 | 2 => Some(60.0),
        3 => Some(10.0),
        7 => Some(120.0),
        9 => Some(300.0),
        _ => None,
    };
    if let Some(limit) = limit {
        let t = elapsed.as_secs_f64();
        checks.push(check("runtime", t < limit, format!("{t:.1} s (limit {limit} s)")));
    }
    CriterionReport {
        id,
        title: TITLES.get(id as usize - 1).copied().unwrap_or("unknown"),
        checks,
        elapsed,
    }
}

pub fn run_all() -> Vec<CriterionReport> {
    (1..=10).map(run_criterion).collect()
}

type Outcome = Result<Vec<Check>, String>;

fn fail<E: fmt::Display>(e: E) -> String {
    e.to_string()
}

fn stable_model(couplings: Couplings, ratio: f64) -> Result<CouplingModel, String> {
    let lc = couplings.critical_lambda().map_err(fail)?.lambda_c;
    CouplingModel::new(couplings, ratio * lc).map_err(fail)
}

fn contractions(couplings: Couplings, ratio: f64) -> Result<ModeContractions, String> {
    mode_contractions(&stable_model(couplings, ratio)?).map_err(fail)
}

fn entropy(mc: &ModeContractions, selector: &Selector, base: LogBase) -> Result<f64, String> {
    let r = match selector {
        Selector::EvenComb => even_odd_entropy_folded(mc, base),
        _ => subsystem_entropy(mc, selector, base),
    };
    r.map(|r| r.entropy).map_err(fail)
}

fn chain_pair(n: usize, l: usize) -> [Vec<usize>; 2] {
    [vec![l], vec![n - l]]
}

fn random_couplings(rng: &mut ChaCha8Rng, sizes: &[usize]) -> Result<Couplings, String> {
    let lattice = Lattice::new(sizes.to_vec()).map_err(fail)?;
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    let mut add = |a: Vec<usize>, b: Vec<usize>, p: f64, m: f64| {
        plus.push((a.clone(), p / 2.0));
        plus.push((b.clone(), p / 2.0));
        minus.push((a, m / 2.0));
        minus.push((b, m / 2.0));
    };
    if let [n] = sizes {
        let range = rng.random_range(1..=3usize).min(n / 2);
        for l in 1..=range {
            let [a, b] = chain_pair(*n, l);
            add(a, b, rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
    } else {
        for axis in 0..sizes.len() {
            let mut a = vec![0; sizes.len()];
            a[axis] = 1;
            let b: Vec<usize> = a.iter().zip(sizes).map(|(&x, &n)| (n - x) % n).collect();
            add(a, b, rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
        let diag = vec![1; sizes.len()];
        let anti: Vec<usize> = sizes.iter().map(|n| n - 1).collect();
        add(diag, anti, rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
    }
    Couplings::from_entries(lattice, plus, minus).map_err(fail)
}

fn purity_and_symmetry() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let mut shapes: Vec<Vec<usize>> = Vec::new();
    for i in 0..14 {
        shapes.push(vec![[4, 8, 12, 36][i % 4]]);
    }
    shapes.extend([vec![4, 4], vec![4, 6], vec![6, 4], vec![6, 6], vec![2, 6], vec![6, 6]]);
    let (mut purity, mut symmetry, mut folded) = (0.0f64, 0.0f64, 0.0f64);
    let mut selectors_checked = 0;
    for sizes in &shapes {
        let couplings = random_couplings(&mut rng, sizes)?;
        let lc = couplings.critical_lambda().map_err(fail)?.lambda_c.max(0.0);
        let lambda = lc + rng.random_range(0.05..2.0) * (1.0 + lc);
        let mc = mode_contractions(&CouplingModel::new(couplings, lambda).map_err(fail)?).map_err(fail)?;
        let lattice = mc.lattice().clone();
        let all: Vec<usize> = (0..lattice.num_sites()).collect();
        for f in symplectic_spectrum(&ContractionMatrix::for_sites(&mc, &all)).map_err(fail)? {
            purity = purity.max(f.abs());
        }
        let mut selectors = vec![Selector::SingleSite(vec![0; sizes.len()]), Selector::EvenComb];
        if let [n] = sizes.as_slice() {
            selectors.extend([Selector::chain_block(2), Selector::chain_block(n / 2), Selector::chain_block(n - 1)]);
        } else {
            selectors.push(Selector::Block(vec![(0, sizes[0] / 2), (1, sizes[1] / 2)]));
            selectors.push(Selector::Block(vec![(0, sizes[0]), (0, 1)]));
        }
        for sel in &selectors {
            let a = subsystem_entropy(&mc, sel, LogBase::Natural).map_err(fail)?.entropy;
            let complement = sel.complement(&lattice).map_err(fail)?;
            let b = subsystem_entropy(&mc, &complement, LogBase::Natural).map_err(fail)?.entropy;
            symmetry = symmetry.max((a - b).abs());
            selectors_checked += 1;
        }
        let generic = subsystem_entropy(&mc, &Selector::EvenComb, LogBase::Natural).map_err(fail)?.entropy;
        let odd = subsystem_entropy(&mc, &Selector::OddComb, LogBase::Natural).map_err(fail)?.entropy;
        let fast = even_odd_entropy_folded(&mc, LogBase::Natural).map_err(fail)?.entropy;
        symmetry = symmetry.max((generic - odd).abs());
        folded = folded.max((fast - generic).abs());
    }
    Ok(vec![
        at_most(format!("full-lattice spectrum, {} models", shapes.len()), purity, 1e-9),
        at_most(format!("S(A) = S(complement), {selectors_checked} selectors plus even/odd"), symmetry, 1e-8),
        at_most("folded even-odd path = generic path", folded, 1e-8),
    ])
}

fn fock_equivalence() -> Outcome {
    let chain = |n: usize| Lattice::chain(n).map_err(fail);
    let cases: Vec<(&str, CouplingModel)> = vec![
        (
            "2 modes, lambda 2, D-(1) 0.5",
            CouplingModel::new(Couplings::from_entries(chain(2)?, vec![], vec![(vec![1], 0.5)]).map_err(fail)?, 2.0)
                .map_err(fail)?,
        ),
        (
            "2 modes, lambda 2, D+(1) 0.3, D-(1) 0.6",
            CouplingModel::new(
                Couplings::from_entries(chain(2)?, vec![(vec![1], 0.3)], vec![(vec![1], 0.6)]).map_err(fail)?,
                2.0,
            )
            .map_err(fail)?,
        ),
        (
            "3 modes, lambda 3, D+ = D- = 0.5",
            CouplingModel::new(Couplings::first_neighbor(chain(3)?, &[0.5], &[0.5]).map_err(fail)?, 3.0).map_err(fail)?,
        ),
        (
            "3 modes, lambda 2, D+ 0.3, D- -0.4",
            CouplingModel::new(Couplings::first_neighbor(chain(3)?, &[0.3], &[-0.4]).map_err(fail)?, 2.0)
                .map_err(fail)?,
        ),
    ];
    let mut checks = Vec::new();
    for (name, model) in cases {
        let n = model.lattice().num_sites();
        let mut selectors = vec![Selector::SingleSite(vec![0])];
        if n == 3 {
            selectors.push(Selector::chain_block(2));
        }
        let mc = mode_contractions(&model).map_err(fail)?;
        let fock = truncated_ground_state_entropies(&model, 30, &selectors, LogBase::Natural).map_err(fail)?;
        let (mut diff, mut conv) = (0.0f64, 0.0f64);
        for (sel, r) in selectors.iter().zip(&fock) {
            diff = diff.max((r.entropy - entropy(&mc, sel, LogBase::Natural)?).abs());
            conv = conv.max(r.cutoff_difference());
        }
        let zero_point = 0.5 * model.dispersion().map_err(fail)?.omega.iter().sum::<f64>();
        checks.push(at_most(format!("{name}: |S_fock - S_gauss|, {} selectors", selectors.len()), diff, 1e-6));
        checks.push(at_most(format!("{name}: |S(30) - S(15)|"), conv, 1e-6));
        checks.push(at_most(format!("{name}: |E_0 - sum omega / 2|"), (fock[0].ground_energy - zero_point).abs(), 1e-6));
    }
    Ok(checks)
}

fn geometric_factors() -> Outcome {
    let alpha = |d: usize| geometric_alpha(&vec![1.0; d], 1024).map(|a| a.alpha).map_err(fail);
    let (a1, a2, a3) = (alpha(1)?, alpha(2)?, alpha(3)?);
    let reference = 1.0 - std::f64::consts::LN_2;
    Ok(vec![
        at_most(format!("alpha_1 = {a1:.9} vs 1 - ln 2"), (a1 - reference).abs(), 1e-6),
        at_most(format!("alpha_2 = {a2:.9} vs 2 alpha_1"), (a2 - 2.0 * a1).abs(), 1e-6),
        at_most(format!("alpha_3 = {a3:.5} vs 0.636"), (a3 - 0.636).abs(), 1e-2),
    ])
}

fn weak_coupling() -> Outcome {
    let mut checks = Vec::new();
    let mut single = Vec::new();
    for (label, sizes, block) in [
        ("1-d n=36", vec![36], Selector::chain_block(18)),
        ("2-d 6x6", vec![6, 6], Selector::Block(vec![(0, 6), (0, 3)])),
    ] {
        let d = sizes.len();
        let lattice = Lattice::new(sizes.clone()).map_err(fail)?;
        let couplings = Couplings::first_neighbor(lattice.clone(), &vec![0.9; d], &vec![0.3; d]).map_err(fail)?;
        let lc = couplings.critical_lambda().map_err(fail)?.lambda_c;
        let mut devs = [[0.0; 3]; 3];
        let mut fs = Vec::new();
        for (i, r) in [10.0, 100.0, 1000.0].into_iter().enumerate() {
            let mc = contractions(couplings.clone(), r)?;
            let p = weak_coupling_predictions_dd(&vec![0.3; d], r * lc, &lattice, 1024).map_err(fail)?;
            let site = subsystem_entropy(&mc, &Selector::SingleSite(vec![0; d]), LogBase::Natural).map_err(fail)?;
            fs.push(site.spectrum[0]);
            let exact = [site.entropy, entropy(&mc, &Selector::EvenComb, LogBase::Natural)?, entropy(&mc, &block, LogBase::Natural)?];
            let predicted = [p.single_site, p.even_comb, p.block.ok_or("no block prediction")?];
            for q in 0..3 {
                devs[q][i] = ((predicted[q] - exact[q]) / exact[q]).abs();
            }
        }
        for (q, name) in ["single_site", "even_comb", "block"].iter().enumerate() {
            let [d10, d100, d1000] = devs[q];
            checks.push(at_most(format!("{label} {name}: relative deviation at 10 lambda_c"), d10, 0.1));
            let (s1, s2) = (d10 / d100, d100 / d1000);
            checks.push(check(
                format!("{label} {name}: shrinks >= 5x per decade"),
                s1 >= 5.0 && s2 >= 5.0,
                format!("deviations {d10:.2e}, {d100:.2e}, {d1000:.2e}; factors {s1:.2}, {s2:.2}"),
            ));
        }
        single.push(fs);
    }
    let ratios: Vec<f64> = single[1].iter().zip(&single[0]).map(|(b, a)| b / a).collect();
    let worst = ratios.iter().map(|r| (r / 0.5 - 1.0).abs()).fold(0.0, f64::max);
    checks.push(check(
        "2-d single-site f is half the 1-d value",
        worst <= 0.05,
        format!("ratios {:.4}, {:.4}, {:.4} at 10, 100, 1000 lambda_c", ratios[0], ratios[1], ratios[2]),
    ));
    Ok(checks)
}

fn critical_scaling() -> Outcome {
    let couplings = Couplings::first_neighbor(Lattice::chain(36).map_err(fail)?, &[0.9], &[0.3]).map_err(fail)?;
    let selectors = [
        ("S_E", Selector::EvenComb),
        ("S_i", Selector::SingleSite(vec![0])),
        ("S_L", Selector::chain_block(18)),
    ];
    let eval = |r: f64| -> Result<Vec<f64>, String> {
        let mc = contractions(couplings.clone(), r)?;
        selectors.iter().map(|(_, s)| entropy(&mc, s, LogBase::Natural)).collect()
    };
    let grid: Vec<f64> = (0..9).map(|i| 1.0 + 10f64.powf(-6.0 + 0.25 * i as f64)).collect();
    let values = grid.iter().map(|&r| eval(r)).collect::<Result<Vec<_>, _>>()?;
    let mut checks = Vec::new();
    for (q, (name, _)) in selectors.iter().enumerate() {
        let s: Vec<f64> = values.iter().map(|v| v[q]).collect();
        let fit = critical_divergence_law(&grid, &s).map_err(fail)?;
        checks.push(check(
            format!("{name} slope vs ln(lambda/lambda_c - 1)"),
            (fit.slope + 0.25).abs() <= 0.02,
            format!("{:.4} (target -0.25 +- 0.02)", fit.slope),
        ));
    }
    let near = eval(1.0 + 1e-8)?;
    for (name, q) in [("S_E / S_i", 0), ("S_L / S_i", 2)] {
        let ratio = near[q] / near[1];
        checks.push(check(
            format!("{name} at lambda/lambda_c - 1 = 1e-8"),
            (ratio - 1.0).abs() <= 0.1,
            format!("{ratio:.4} (target 1 +- 0.1)"),
        ));
    }
    Ok(checks)
}

fn thermodynamic_block() -> Outcome {
    let (dp, dm) = (0.9, 0.3);
    let lambda = 100.0 * (dp + dm);
    let exact = xy_block_entropy_infinite(lambda, dp, dm, LogBase::Natural).map_err(fail)?;
    let weak = weak_coupling_predictions_1d(dm, lambda, 36).map_err(fail)?.block.ok_or("no block prediction")?;
    let mut worst = 0.0f64;
    for k in [0.1, 0.5, 0.9, 0.99] {
        // trapezoid rule on a smooth periodic integrand converges geometrically
        let m = 4000;
        let h = std::f64::consts::FRAC_PI_2 / m as f64;
        let quad: f64 = (0..m)
            .map(|i| {
                let t = (i as f64 + 0.5) * h;
                h / (1.0 - (k * t.sin()).powi(2)).sqrt()
            })
            .sum();
        worst = worst.max(((complete_k(k) - quad) / quad).abs());
    }
    Ok(vec![
        at_most(
            format!("exact {exact:.6e} vs weak-coupling {weak:.6e}, relative"),
            ((exact - weak) / weak).abs(),
            1e-2,
        ),
        at_most("AGM K(k) vs quadrature, k up to 0.99", worst, 1e-9),
    ])
}

fn spin_chain(n: usize, two_s: u32, field: f64) -> Result<SpinModel, String> {
    SpinModel::first_neighbor(Lattice::chain(n).map_err(fail)?, two_s, field, &[1.0], &[0.5]).map_err(fail)
}

fn factorizing_field() -> Outcome {
    let base_model = spin_chain(8, 1, 0.0)?;
    let bs = base_model.factorizing_field().ok_or("no factorizing field")?;
    let at_bs = base_model.with_field(bs);
    let h = build_spin_hamiltonian(&at_bs, DEFAULT_DIMENSION_CAP).map_err(fail)?;
    let g = ground_state_definite_parity(&h).map_err(fail)?;
    let mut checks = vec![check("parity crossing at B_s", g.crossing, format!("gap {:.2e}", g.gap))];
    let selectors = [Selector::EvenComb, Selector::chain_block(4)];
    let (mut worst, mut lo, mut hi) = (0.0f64, f64::INFINITY, 0.0f64);
    for sel in &selectors {
        let limits = factorized_side_limits(&at_bs, sel, LogBase::Two).map_err(fail)?;
        for (parity, predicted) in [(1i8, limits.plus), (-1, limits.minus)] {
            let s = reduced_entropy_exact(&h.basis, &g.sector(parity).vector, sel, LogBase::Two).map_err(fail)?;
            worst = worst.max((s - predicted).abs());
            lo = lo.min(s);
            hi = hi.max(s);
        }
    }
    checks.push(at_most("sector entropies at B_s vs side-limit formula (even comb, half block)", worst, 1e-6));
    checks.push(check(
        "side-limit entropies near 1 bit",
        lo >= 0.8 && hi <= 1.0 + 1e-9,
        format!("range [{lo:.6}, {hi:.6}] bits"),
    ));
    for (side, eps) in [("below", -1e-3), ("above", 1e-3)] {
        let model = base_model.with_field(bs * (1.0 + eps));
        let h = build_spin_hamiltonian(&model, DEFAULT_DIMENSION_CAP).map_err(fail)?;
        let g = ground_state_definite_parity(&h).map_err(fail)?;
        let (plus, minus) = parity_projected_tilted_states(&h.basis, model.theta());
        let reference = if g.ground_parity > 0 { plus } else { minus };
        let fid = fidelity(&g.ground().vector, &reference);
        checks.push(check(
            format!("fidelity {side} B_s (parity {:+})", g.ground_parity),
            fid > 0.999,
            format!("{fid:.8}"),
        ));
        let s = reduced_entropy_exact(&h.basis, &g.ground().vector, &Selector::EvenComb, LogBase::Two).map_err(fail)?;
        let limits = factorized_side_limits(&at_bs, &Selector::EvenComb, LogBase::Two).map_err(fail)?;
        if eps < 0.0 {
            checks.push(at_most(format!("even-comb entropy {s:.6} bits {side} B_s vs 1"), (s - 1.0).abs(), 1e-3));
        } else {
            // the positive-parity limit is below 1; the approach is linear in eps
            let (own, other) = ((s - limits.plus).abs(), (s - limits.minus).abs());
            checks.push(check(
                format!("even-comb entropy {s:.6} bits {side} B_s tends to {:.6}, not {:.6}", limits.plus, limits.minus),
                own < other,
                format!("distances {own:.2e} vs {other:.2e}"),
            ));
        }
    }
    Ok(checks)
}

fn ed_vs_rpa(n: usize, two_s: u32, ratio: f64) -> Result<f64, String> {
    let base_model = spin_chain(n, two_s, 0.0)?;
    let model = base_model.with_field(ratio * base_model.critical_field());
    let h = build_spin_hamiltonian(&model, DEFAULT_DIMENSION_CAP).map_err(fail)?;
    let g = ground_state_definite_parity(&h).map_err(fail)?;
    let ed = reduced_entropy_exact(&h.basis, &g.ground().vector, &Selector::EvenComb, LogBase::Two).map_err(fail)?;
    let rpa = rpa_entropy(&model, &Selector::EvenComb, LogBase::Two).map_err(fail)?.result.entropy;
    Ok(((ed - rpa) / rpa).abs())
}

fn strong_field() -> Outcome {
    let d: Vec<f64> = [10.0, 20.0, 40.0].iter().map(|&r| ed_vs_rpa(8, 1, r)).collect::<Result<_, _>>()?;
    let (half, one) = (ed_vs_rpa(6, 1, 2.0)?, ed_vs_rpa(6, 2, 2.0)?);
    Ok(vec![
        at_most("n=8 s=1/2 relative deviation at 10 B_c", d[0], 0.05),
        check(
            "deviation shrinks at 20 and 40 B_c",
            d[1] < d[0] && d[2] < d[1],
            format!("{:.3e}, {:.3e}, {:.3e}", d[0], d[1], d[2]),
        ),
        check(
            "n=6 at 2 B_c: deviation decreases from s=1/2 to s=1",
            one < half,
            format!("{half:.4} -> {one:.4}"),
        ),
    ])
}

fn extensivity() -> Outcome {
    let config = shipped_config("fig4");
    let out = run_sweep(&config).map_err(fail)?;
    let points = intensive_points(&out);
    let info = out.lattices.first().ok_or("no lattice")?;
    let (bc, bs) = (info.critical, info.factorizing.ok_or("no factorizing field")?);
    let model = spin_chain(4, 1, 0.0)?;
    // D+ = sum_l (Jx(l) + Jy(l)) / 2
    let delta_plus: f64 = model.support().iter().map(|&l| 0.5 * (model.jx_at(l) + model.jy_at(l))).sum();
    let mut fields: Vec<f64> = points.iter().map(|p| p.field).collect();
    fields.sort_by(f64::total_cmp);
    fields.dedup();
    let (mut spread, mut spread_at, mut settles) = (0.0f64, 0.0, None);
    for &b in fields.iter().filter(|&&b| b >= delta_plus - 1e-12) {
        let v: Vec<f64> = points.iter().filter(|p| p.field == b).map(|p| p.per_site).collect();
        let s = v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min);
        if s > spread {
            spread = s;
            spread_at = b;
        }
        if s > 0.02 {
            settles = None;
        } else if settles.is_none() {
            settles = Some(b);
        }
    }
    let mut shifted = 0.0f64;
    for &b in fields.iter().filter(|&&b| b < 0.8 * bs) {
        let get = |n: usize| points.iter().find(|p| p.field == b && p.n == n).map(|p| p.shifted_per_site);
        if let (Some(a), Some(c)) = (get(8), get(10)) {
            shifted = shifted.max((a - c).abs());
        }
    }
    let settle = settles.map(|b| format!("{:.3} B_c", b / bc)).unwrap_or_else(|| "never".into());
    Ok(vec![
        check(
            format!("intensive S_E spread over n = 4..10 for B >= D+ = {:.2} B_c", delta_plus / bc),
            spread <= 0.02,
            format!("{spread:.4} at {:.3} B_c (bound 0.02); within bound from {settle}", spread_at / bc),
        ),
        at_most("shifted intensive S_E, n = 8 vs 10, B < 0.8 B_s", shifted, 0.05),
    ])
}

fn determinism() -> Outcome {
    let mut checks = Vec::new();
    let dirs = [tempfile::tempdir().map_err(fail)?, tempfile::tempdir().map_err(fail)?];
    for (name, _) in SHIPPED_CONFIGS {
        let config = shipped_config(name);
        let mut rendered = Vec::new();
        for dir in &dirs {
            let out = run_sweep(&config).map_err(fail)?;
            let target = dir.path().join(name);
            crate::emit_outputs(&config, &out, &target).map_err(fail)?;
            let files = render(&config, &out);
            let mut on_disk = Vec::new();
            for (file, _) in &files {
                on_disk.push(std::fs::read(target.join(file)).map_err(fail)?);
            }
            rendered.push((files, on_disk));
        }
        let same = rendered[0] == rendered[1];
        let count = rendered[0].0.len();
        checks.push(check(
            format!("{name}: {count} output files byte-identical across reruns"),
            same,
            if same { "identical".to_string() } else { "differs".to_string() },
        ));
    }
    Ok(checks)
}
