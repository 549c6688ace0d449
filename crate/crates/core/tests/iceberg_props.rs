use iceberg_lab::iceberg::{body_report, poincare_permutation, Iceberg, JumpMatrix, Permutation};
use iceberg_lab::words::{build_word, cat_schedule, morse_schedule, random_rotations, random_schedule, Schedule, Stage};
use proptest::prelude::*;
use std::collections::BTreeMap;

/// Fraction of stage-`n` thin-column instances whose positions in `W_{n+r}` are contiguous.
fn contiguity_oracle(s: &Schedule, n: usize, r: usize) -> (u64, u64) {
    let hs = s.heights();
    let top = n + r;
    let mut spans: BTreeMap<Vec<usize>, (u64, u64)> = BTreeMap::new();
    for p in 0..hs[top] {
        let mut x = p;
        let mut key = Vec::with_capacity(r);
        for m in (n..top).rev() {
            let (y, t) = (x / hs[m], x % hs[m]);
            key.push(y as usize);
            x = (t + s.stages[m].rotations[y as usize]) % hs[m];
        }
        let e = spans.entry(key).or_insert((p, p));
        e.0 = e.0.min(p);
        e.1 = e.1.max(p);
    }
    let intact = spans.values().filter(|(lo, hi)| hi - lo + 1 == hs[n]).count() as u64;
    (intact, spans.len() as u64)
}

proptest! {
    #[test]
    fn jump_rows_reproduce_the_histogram(h in 2u64..40, rot in proptest::collection::vec(0u64..1000, 1..200)) {
        let rot: Vec<u64> = rot.into_iter().map(|a| a % h).collect();
        let ib = Iceberg::from_rotations(h, &rot, true);
        let jm = JumpMatrix::from_rotations(h, &rot);
        let rows: BTreeMap<u64, usize> = jm.row_sums();
        prop_assert_eq!(rows, ib.counts.clone());
        let d = ib.uniformity_deviation();
        prop_assert!((0.0..=2.0).contains(&d));
        let jd = jm.uniformity_deviation();
        prop_assert!((0.0..=2.0).contains(&jd));
    }

    #[test]
    fn poincare_maps_are_bijections(q in 1usize..300) {
        let p = poincare_permutation(&Stage::pure(vec![0; q]));
        prop_assert!(Permutation::new((0..q).map(|i| p.apply(i)).collect()).is_ok());
        prop_assert!(p.compose(&p.inverse()).is_identity());
        prop_assert_eq!(p.cycles().len(), 1);
    }

    #[test]
    fn body_bound_holds_and_matches_contiguity(
        seed in any::<u64>(),
        qs in proptest::collection::vec(2usize..7, 2..4),
        w in "[ab]{1,5}",
    ) {
        let s = random_schedule(seed, &qs, &format!("ab{w}")).unwrap();
        for n in 0..s.depth() {
            for r in 1..=s.depth() - n {
                let b = body_report(&s, n, r).unwrap();
                prop_assert!(b.exact_fraction >= b.lower_bound, "{:?}", b);
                prop_assert_eq!((b.intact, b.total), contiguity_oracle(&s, n, r));
            }
        }
    }
}

#[test]
fn cat_body_matches_printed_word() {
    let s = cat_schedule();
    let w3 = s.alphabet.render(build_word(&s, 2).unwrap().top());
    assert_eq!(w3.len(), 54);
    let b = body_report(&s, 1, 1).unwrap();
    assert_eq!(b.exact_fraction, 1.0);
    let b = body_report(&s, 0, 2).unwrap();
    assert_eq!((b.intact, b.total), contiguity_oracle(&s, 0, 2));
    assert_eq!((b.intact, b.total), (15, 18));
}

#[test]
fn morse_bodies_are_full() {
    for r in 2..5 {
        let w: String = "0123".chars().take(r).collect();
        let s = morse_schedule(r, 4, &w).unwrap();
        for look in 1..=3 {
            assert_eq!(body_report(&s, 1, look).unwrap().exact_fraction, 1.0);
        }
    }
}

#[test]
fn random_histogram_is_close_to_uniform() {
    let h = 64;
    let ib = Iceberg::from_rotations(h, &random_rotations(7, 0, h, 4096), true);
    assert!(ib.uniformity_deviation() <= 0.25, "{}", ib.uniformity_deviation());
}

#[test]
fn deterministic_cycle_has_maximal_jump_deviation() {
    for h in [4u64, 9, 16] {
        let rot: Vec<u64> = (0..h).collect();
        let jm = JumpMatrix::from_rotations(h, &rot);
        let expect = 2.0 * (1.0 - 1.0 / h as f64);
        assert!((jm.uniformity_deviation() - expect).abs() < 1e-12);
    }
}

#[test]
fn jump_deviation_shrinks_with_q() {
    let h = 16u64;
    let mut prev = f64::INFINITY;
    for q in [256usize, 1024, 4096, 16384] {
        let mut devs: Vec<f64> = (0..9)
            .map(|seed| JumpMatrix::from_rotations(h, &random_rotations(seed, 0, h, q)).uniformity_deviation())
            .collect();
        devs.sort_by(f64::total_cmp);
        assert!(devs[4] < prev);
        prev = devs[4];
    }
}

#[test]
fn large_q_body_stays_high() {
    let s = random_schedule(3, &[64, 64, 64], "01").unwrap();
    let b = body_report(&s, 0, 3).unwrap();
    assert!(b.lower_bound >= 0.96);
    assert!(b.exact_fraction >= 0.9);
}
