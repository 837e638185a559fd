use evenodd_core::gaussian::metric_product_eigenvalues;
use evenodd_core::*;
use proptest::prelude::*;

/// Symmetric couplings on a chain of `n` sites over displacements 1..=range.
fn chain_couplings(n: usize, plus: &[f64], minus: &[f64]) -> Couplings {
    let mut p = Vec::new();
    let mut m = Vec::new();
    for (d, (&a, &b)) in plus.iter().zip(minus).enumerate() {
        let l = d + 1;
        if l >= n {
            break;
        }
        p.push((vec![l], a / 2.0));
        p.push((vec![n - l], a / 2.0));
        m.push((vec![l], b / 2.0));
        m.push((vec![n - l], b / 2.0));
    }
    Couplings::from_entries(Lattice::chain(n).unwrap(), p, m).unwrap()
}

fn stable(c: Couplings, excess: f64) -> ModeContractions {
    let lc = c.critical_lambda().unwrap().lambda_c.max(0.0);
    let lambda = lc + excess * (1.0 + lc);
    mode_contractions(&CouplingModel::new(c, lambda).unwrap()).unwrap()
}

fn model_strategy() -> impl Strategy<Value = (usize, Vec<f64>, Vec<f64>, f64)> {
    (
        prop::sample::select(vec![4usize, 6, 8, 10, 12]),
        prop::collection::vec(-1.0..1.0f64, 1..=3),
        prop::collection::vec(-1.0..1.0f64, 3),
        0.05..2.0f64,
    )
        .prop_map(|(n, plus, minus, excess)| {
            let minus = minus[..plus.len()].to_vec();
            (n, plus, minus, excess)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mode_contractions_are_pure((n, plus, minus, excess) in model_strategy()) {
        let mc = stable(chain_couplings(n, &plus, &minus), excess);
        for (&p, &m) in mc.plus_k.iter().zip(&mc.minus_k) {
            prop_assert!(p >= 0.0);
            prop_assert!(((0.5 + p).powi(2) - m * m - 0.25).abs() < 1e-10 * (1.0 + p * p));
        }
        let all: Vec<usize> = (0..n).collect();
        let d = ContractionMatrix::for_sites(&mc, &all);
        for f in symplectic_spectrum(&d).unwrap() {
            prop_assert!(f.abs() < 1e-9);
        }
    }

    #[test]
    fn complement_has_same_entropy(
        (n, plus, minus, excess) in model_strategy(),
        mask in prop::collection::vec(any::<bool>(), 12),
    ) {
        let mc = stable(chain_couplings(n, &plus, &minus), excess);
        let lattice = mc.lattice().clone();
        let chosen: Vec<Vec<usize>> = (0..n).filter(|&i| mask[i]).map(|i| vec![i]).collect();
        prop_assume!(!chosen.is_empty() && chosen.len() < n);
        let sel = Selector::Explicit(chosen);
        let a = subsystem_entropy(&mc, &sel, LogBase::Natural).unwrap().entropy;
        let b = subsystem_entropy(&mc, &sel.complement(&lattice).unwrap(), LogBase::Natural).unwrap().entropy;
        prop_assert!(a >= 0.0);
        prop_assert!((a - b).abs() < 1e-8 * (1.0 + a), "{} vs {}", a, b);
    }

    #[test]
    fn folded_matches_generic((n, plus, minus, excess) in model_strategy()) {
        let mc = stable(chain_couplings(n, &plus, &minus), excess);
        let folded = even_odd_entropy_folded(&mc, LogBase::Natural).unwrap().entropy;
        let generic = subsystem_entropy(&mc, &Selector::EvenComb, LogBase::Natural).unwrap().entropy;
        let odd = subsystem_entropy(&mc, &Selector::OddComb, LogBase::Natural).unwrap().entropy;
        prop_assert!((folded - generic).abs() < 1e-8 * (1.0 + folded));
        prop_assert!((odd - generic).abs() < 1e-8 * (1.0 + folded));
    }

    #[test]
    fn metric_product_eigenvalues_pair((n, plus, minus, excess) in model_strategy(), len in 1usize..4) {
        let mc = stable(chain_couplings(n, &plus, &minus), excess);
        let d = subsystem_contraction_matrix(&mc, &Selector::chain_block(len.min(n - 1))).unwrap();
        let mut all = metric_product_eigenvalues(&d).unwrap();
        all.sort_by(|a, b| a.total_cmp(b));
        let m = all.len() / 2;
        for i in 0..m {
            // ascending: -1-f_max ... -1-f_min, f_min ... f_max
            prop_assert!((all[i] + 1.0 + all[all.len() - 1 - i]).abs() < 1e-8);
        }
    }

    #[test]
    fn odd_site_gauge_preserves_entropies(
        n in prop::sample::select(vec![4usize, 6, 8, 12]),
        dp in -1.0..1.0f64,
        dm in -1.0..1.0f64,
        excess in 0.05..2.0f64,
    ) {
        let c = Couplings::first_neighbor(Lattice::chain(n).unwrap(), &[dp], &[dm]).unwrap();
        let g = c.odd_site_gauge().unwrap();
        let a = stable(c, excess);
        let b = stable(g, excess);
        for sel in [Selector::EvenComb, Selector::chain_block(n / 2), Selector::SingleSite(vec![1])] {
            let sa = subsystem_entropy(&a, &sel, LogBase::Natural).unwrap().entropy;
            let sb = subsystem_entropy(&b, &sel, LogBase::Natural).unwrap().entropy;
            prop_assert!((sa - sb).abs() < 1e-10 * (1.0 + sa));
        }
    }

    #[test]
    fn entropy_h_is_increasing(a in 0.0..50.0f64, b in 0.0..50.0f64) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assume!(hi - lo > 1e-9);
        prop_assert!(entropy_h(lo, LogBase::Natural).unwrap() < entropy_h(hi, LogBase::Natural).unwrap());
    }

    #[test]
    fn lattice_arithmetic_round_trips(
        sizes in prop::collection::vec(2usize..7, 1..=3),
        i in 0usize..1000,
        j in 0usize..1000,
    ) {
        let l = Lattice::new(sizes).unwrap();
        let (i, j) = (i % l.num_sites(), j % l.num_sites());
        let d = l.difference(i, j);
        prop_assert_eq!(l.sum(j, d), i);
        prop_assert_eq!(l.negate(l.negate(d)), d);
        prop_assert_eq!(l.index(&l.coords(i)), i);
    }

    #[test]
    fn fourier_couplings_are_even_in_k((n, plus, minus, _excess) in model_strategy()) {
        let c = chain_couplings(n, &plus, &minus);
        let kc = c.fourier_couplings().unwrap();
        let lattice = c.lattice().clone();
        for k in 0..n {
            let mk = lattice.negate(k);
            prop_assert!((kc.plus[k] - kc.plus[mk]).abs() < 1e-12);
            prop_assert!((kc.minus[k] - kc.minus[mk]).abs() < 1e-12);
        }
    }
}

#[test]
fn two_dimensional_folded_matches_generic() {
    let c = Couplings::first_neighbor(Lattice::new(vec![6, 6]).unwrap(), &[0.9, 0.9], &[0.3, 0.3]).unwrap();
    let mc = stable(c, 0.3);
    let folded = even_odd_entropy_folded(&mc, LogBase::Natural).unwrap().entropy;
    let generic = subsystem_entropy(&mc, &Selector::EvenComb, LogBase::Natural).unwrap().entropy;
    assert!((folded - generic).abs() < 1e-8);
}

#[test]
fn entropy_grows_toward_criticality() {
    let c = Couplings::first_neighbor(Lattice::chain(36).unwrap(), &[0.9], &[0.3]).unwrap();
    let lc = c.critical_lambda().unwrap().lambda_c;
    let mut prev = 0.0;
    for r in [5.0, 2.0, 1.5, 1.1, 1.01, 1.001, 1.0001] {
        let mc = mode_contractions(&CouplingModel::new(c.clone(), r * lc).unwrap()).unwrap();
        let s = even_odd_entropy_folded(&mc, LogBase::Natural).unwrap().entropy;
        assert!(s > prev);
        prev = s;
    }
}

#[test]
fn block_entropy_saturates_at_weak_coupling() {
    let c = Couplings::first_neighbor(Lattice::chain(36).unwrap(), &[0.9], &[0.3]).unwrap();
    let lc = c.critical_lambda().unwrap().lambda_c;
    let mc = mode_contractions(&CouplingModel::new(c, 20.0 * lc).unwrap()).unwrap();
    let f = 0.09 / (8.0 * (20.0 * lc).powi(2));
    let s: Vec<f64> = (2..=34)
        .map(|l| subsystem_entropy(&mc, &Selector::chain_block(l), LogBase::Natural).unwrap().entropy)
        .collect();
    let (lo, hi) = s.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    assert!((hi - lo) / lo < 0.01);
    let spectrum = subsystem_entropy(&mc, &Selector::chain_block(10), LogBase::Natural).unwrap().spectrum;
    let big: Vec<f64> = spectrum.into_iter().filter(|&x| x > 1e-3 * f).collect();
    assert_eq!(big.len(), 2);
    for x in big {
        assert!((x - f / 2.0).abs() < 0.2 * f / 2.0);
    }
}

#[test]
fn spin_rpa_strong_field_matches_exact() {
    let base = SpinModel::first_neighbor(Lattice::chain(6).unwrap(), 1, 0.0, &[1.0], &[0.5]).unwrap();
    let m = base.with_field(10.0 * base.critical_field());
    let h = build_spin_hamiltonian(&m, 1 << 20).unwrap();
    let g = ground_state_definite_parity(&h).unwrap();
    let ed = reduced_entropy_exact(&h.basis, &g.ground().vector, &Selector::EvenComb, LogBase::Two).unwrap();
    let rpa = rpa_entropy(&m, &Selector::EvenComb, LogBase::Two).unwrap().result.entropy;
    assert!((ed - rpa).abs() / rpa < 0.05);
}
