//! Statistical and measure-theoretic checks on the orbit layer.

use ergotrim::dynamics::{
    cylinder_measure, gauss_digits, gauss_measure, MeasureValue, RealInput, SystemModel,
};
use ergotrim::mainterm::gauss_digit_probability;
use num_rational::BigRational;
use num_traits::ToPrimitive;

#[test]
fn digit_frequencies_approach_gauss_kuzmin() {
    // module-scale check at 1e5 digits; the acceptance suite runs 1e6
    let mut x = RealInput::seeded(7);
    let orbit = gauss_digits(&mut x, 100_000, None).unwrap();
    let total = orbit.symbols.len() as f64;
    for (digit, tolerance) in [(1u64, 0.01), (2, 0.01), (3, 0.01)] {
        let freq = orbit.symbols.iter().filter(|&&d| d == digit).count() as f64 / total;
        let law = gauss_digit_probability(digit);
        assert!(
            (freq - law).abs() < tolerance,
            "digit {digit}: frequency {freq} vs law {law}"
        );
    }
}

#[test]
fn doubling_cylinder_additivity_is_exact() {
    let sys = SystemModel::doubling_indicator();
    for word in [vec![0u64], vec![1], vec![0, 1], vec![1, 1, 0]] {
        let whole = match cylinder_measure(&sys, &word).unwrap() {
            MeasureValue::Exact(r) => r,
            _ => unreachable!(),
        };
        let mut parts = BigRational::new(0.into(), 1.into());
        for s in 0..2u64 {
            let mut extended = word.clone();
            extended.push(s);
            match cylinder_measure(&sys, &extended).unwrap() {
                MeasureValue::Exact(r) => parts += r,
                _ => unreachable!(),
            }
        }
        assert_eq!(whole, parts, "word {word:?}");
    }
}

#[test]
fn markov_cylinder_additivity_is_exact() {
    let rat = |n: i64, d: i64| BigRational::new(n.into(), d.into());
    let matrix = vec![vec![rat(2, 3), rat(1, 3)], vec![rat(1, 4), rat(3, 4)]];
    let sys = SystemModel::markov(matrix, vec![1.0, 2.0]).unwrap();
    for word in [vec![0u64], vec![1], vec![0, 0], vec![1, 0, 1]] {
        let whole = cylinder_measure(&sys, &word).unwrap();
        let mut parts = BigRational::new(0.into(), 1.into());
        for s in 0..2u64 {
            let mut extended = word.clone();
            extended.push(s);
            if let MeasureValue::Exact(r) = cylinder_measure(&sys, &extended).unwrap() {
                parts += r;
            }
        }
        match whole {
            MeasureValue::Exact(r) => assert_eq!(r, parts, "word {word:?}"),
            _ => unreachable!(),
        }
    }
}

#[test]
fn gauss_cylinder_additivity_with_tracked_tail() {
    // sum the one-digit extensions up to a cutoff and close the gap with the
    // exact measure of the residual interval near the cylinder endpoint
    let sys = SystemModel::gauss();
    for word in [vec![1u64], vec![2], vec![1, 2]] {
        let whole = cylinder_measure(&sys, &word).unwrap().to_f64();
        let cutoff = 100_000u64;
        let mut parts = 0.0;
        for s in 1..=cutoff {
            let mut extended = word.clone();
            extended.push(s);
            parts += cylinder_measure(&sys, &extended).unwrap().to_f64();
        }
        // the cells with next digit > cutoff fill the interval between the
        // cylinder endpoint [0; word] and [0; word, cutoff + 1]
        let (a, b) = residual_interval(&word, cutoff);
        let tail = gauss_measure(a, b).unwrap();
        assert!(
            (whole - (parts + tail)).abs() < 1e-10,
            "word {word:?}: {whole} vs {} + {tail}",
            parts
        );
    }
}

fn residual_interval(word: &[u64], cutoff: u64) -> (f64, f64) {
    // the extensions with next digit > cutoff tile the interval between
    // [0; word, cutoff + 1] and the cylinder endpoint [0; word]
    let end = ergotrim::dynamics::convergent(word).to_f64().unwrap();
    let mut deepest = word.to_vec();
    deepest.push(cutoff + 1);
    let edge = ergotrim::dynamics::convergent(&deepest).to_f64().unwrap();
    (end.min(edge), end.max(edge))
}

#[test]
fn measure_table_tail_closes_the_books() {
    let sys = SystemModel::gauss();
    for i_max in [100usize, 10_000] {
        let table = sys.measure_table(i_max);
        assert!((table.total_with_tail() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn sampled_reals_replay_and_stay_bracketed() {
    let mut a = ergotrim::dynamics::sample_real(42);
    let mut b = ergotrim::dynamics::sample_real(42);
    let (lo_a, hi_a) = a.rational_bounds(128);
    let (lo_b, hi_b) = b.rational_bounds(128);
    assert_eq!((lo_a.clone(), hi_a.clone()), (lo_b, hi_b));
    // refining only tightens the bracket
    let (lo2, hi2) = a.rational_bounds(256);
    assert!(lo_a <= lo2 && hi2 <= hi_a && lo2 < hi2);
}

#[test]
fn quadratic_and_rational_hooks_share_the_format() {
    // external hook formats: "p/q" decimal strings and (p + r sqrt(d))/q tuples
    let mut golden = RealInput::quadratic(-1, 1, 5, 2).unwrap();
    let digits = gauss_digits(&mut golden, 5, None).unwrap();
    assert_eq!(digits.symbols, vec![1; 5]);

    let mut rational = RealInput::rational_str("415/93").unwrap();
    let digits = gauss_digits(&mut rational, 3, None).unwrap();
    assert_eq!(digits.symbols, vec![2, 6, 7]);
}
