use iceberg_lab::correlation::{
    correlation_at, cyclic_correlation, decay_profile, lift, recursion_rhs, simplicity_diagnostic, LabelMap,
    LevelFunction,
};
use iceberg_lab::words::{build_word, cat_schedule, morse_schedule, random_schedule, DEFAULT_MAX_SYMBOLS};
use num_complex::Complex64;
use proptest::prelude::*;

fn values(max: usize) -> impl Strategy<Value = Vec<Complex64>> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..max)
        .prop_map(|v| v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
}

fn direct(f: &[Complex64], t: usize) -> Complex64 {
    let h = f.len();
    (0..h).map(|j| f[j] * f[(j + h - t) % h].conj()).sum::<Complex64>() / h as f64
}

fn dft(v: &[Complex64]) -> Vec<Complex64> {
    let h = v.len();
    (0..h)
        .map(|k| {
            (0..h)
                .map(|j| {
                    let ang = -std::f64::consts::TAU * ((j * k) % h) as f64 / h as f64;
                    v[j] * Complex64::from_polar(1.0, ang)
                })
                .sum()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fast_matches_direct(v in values(300)) {
        let f = LevelFunction::new(0, v.clone());
        let c = cyclic_correlation(&f, &f).unwrap();
        let scale = c.c[0].norm().max(1e-300);
        for t in 0..v.len() {
            let d = direct(&v, t);
            prop_assert!((c.c[t] - d).norm() <= 1e-10 * scale);
            prop_assert!((correlation_at(&f, &f, t as i64).unwrap() - d).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn autocorrelation_is_hermitian(v in values(300)) {
        let f = LevelFunction::new(0, v.clone());
        let c = cyclic_correlation(&f, &f).unwrap();
        for t in 0..v.len() as i64 {
            prop_assert!((c.at(-t) - c.at(t).conj()).norm() <= 1e-12 * c.c[0].norm().max(1e-300));
        }
    }

    #[test]
    fn spectrum_of_correlation_is_power(v in values(120)) {
        let h = v.len() as f64;
        let f = LevelFunction::new(0, v.clone());
        let c = cyclic_correlation(&f, &f).unwrap();
        let lhs = dft(&c.c);
        let rhs = dft(&v);
        for (a, b) in lhs.iter().zip(&rhs) {
            prop_assert!((a - b.norm_sqr() / h).norm() <= 1e-9 * (1.0 + b.norm_sqr()));
        }
    }

    #[test]
    fn recursion_is_exact_for_every_shift(
        seed in any::<u64>(),
        w in "[abc]{0,6}",
        q0 in 2usize..6,
        q1 in 2usize..40,
    ) {
        let s = random_schedule(seed, &[q0, q1], &format!("ab{w}")).unwrap();
        let labels = LabelMap::parse("a=1,b=-0.5+0.25i,c=root:1/3").unwrap();
        let hier = build_word(&s, 2).unwrap();
        let hs = s.heights();
        prop_assume!(hs[2] <= 10_000);
        for n in 0..2 {
            let cn = cyclic_correlation(
                &lift(&labels, &s.alphabet, &hier.words[n], n, false).unwrap(),
                &lift(&labels, &s.alphabet, &hier.words[n], n, false).unwrap(),
            ).unwrap();
            let up: Vec<Complex64> = lift(&labels, &s.alphabet, &hier.words[n + 1], n + 1, false).unwrap().values;
            for sh in 1..s.stages[n].q {
                let lhs = direct(&up, sh * hs[n] as usize);
                let rhs = recursion_rhs(&cn, &s.stages[n], sh).unwrap();
                prop_assert!((lhs - rhs).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn one_level_up_balances(seed in any::<u64>(), q in 2usize..400) {
        let s = random_schedule(seed, &[3, q], "CAT").unwrap();
        let labels = LabelMap::parse("C=1,A=root:1/3,T=root:2/3").unwrap();
        let r = simplicity_diagnostic(&s, &labels, 1, 2, DEFAULT_MAX_SYMBOLS).unwrap();
        prop_assert!(r.identity_residual < 1e-12);
        prop_assert!((r.u_norm2 - r.v_norm2).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&r.e_fraction));
    }
}

#[test]
fn cat_shift_three_matches_direct_value() {
    let s = cat_schedule();
    let labels = LabelMap::parse("C=1,A=0,T=0").unwrap();
    let hier = build_word(&s, 1).unwrap();
    let f0 = lift(&labels, &s.alphabet, &hier.words[0], 0, false).unwrap();
    let c0 = cyclic_correlation(&f0, &f0).unwrap();
    let f1 = lift(&labels, &s.alphabet, &hier.words[1], 1, false).unwrap();
    let lhs = direct(&f1.values, 9);
    let rhs = recursion_rhs(&c0, &s.stages[0], 3).unwrap();
    assert!((lhs - rhs).norm() < 1e-15);
    // differences α_y − α_{y−3} = (−2, 1, 1, 2, −1, −1)
    let expect = (c0.at(1) + c0.at(2)) / 2.0;
    assert!((rhs - expect).norm() < 1e-15);
    let constant = iceberg_lab::words::Stage::pure(vec![2; 6]);
    assert!((recursion_rhs(&c0, &constant, 3).unwrap() - c0.at(0)).norm() < 1e-15);
}

#[test]
fn zero_labels_give_zero_statistics() {
    let s = random_schedule(5, &[16, 16, 16], "01").unwrap();
    let labels = LabelMap::parse("0=0,1=0").unwrap();
    let p = decay_profile(&s, &labels, 1, 3, DEFAULT_MAX_SYMBOLS).unwrap();
    for st in &p.stages {
        assert_eq!((st.max, st.median, st.rms, st.variance), (0.0, 0.0, 0.0, 0.0));
    }
    assert!(p.median_slope.is_none());
}

#[test]
fn morse_correlations_do_not_decay() {
    let s = morse_schedule(2, 14, "01").unwrap();
    let labels = LabelMap::parse("0=1,1=-1").unwrap();
    let p = decay_profile(&s, &labels, 8, 14, DEFAULT_MAX_SYMBOLS).unwrap();
    let slope = p.max_slope.unwrap();
    assert!(slope.abs() < 0.05, "{slope}");
    assert!(p.stages.iter().all(|st| st.max > 0.1));
}

#[test]
fn random_correlations_decay() {
    let labels = LabelMap::parse("0=1,1=-1").unwrap();
    let mut slopes: Vec<f64> = (0..20)
        .filter_map(|seed| {
            let s = random_schedule(seed, &[8, 256, 1024], "01").unwrap();
            decay_profile(&s, &labels, 1, 3, DEFAULT_MAX_SYMBOLS).unwrap().median_slope
        })
        .collect();
    assert!(slopes.len() >= 5);
    slopes.sort_by(f64::total_cmp);
    let m = slopes[slopes.len() / 2];
    assert!((-0.65..=-0.35).contains(&m), "{slopes:?}");
}

#[test]
fn vanishing_medians_leave_the_fit_undefined() {
    let labels = LabelMap::parse("0=1,1=-1").unwrap();
    let s = random_schedule(0, &[8, 16, 16], "01").unwrap();
    let p = decay_profile(&s, &labels, 1, 3, DEFAULT_MAX_SYMBOLS).unwrap();
    assert!(p.stages[0].median < 1e-12);
    assert!(p.median_slope.is_none());
}

#[test]
fn unlabelled_symbol_is_an_error() {
    let s = cat_schedule();
    let labels = LabelMap::parse("C=1,A=0").unwrap();
    assert!(lift(&labels, &s.alphabet, &s.seed_word, 0, false).is_err());
}
