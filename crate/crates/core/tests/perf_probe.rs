use ergotrim::dynamics::{gauss_digits, RealInput};
use std::time::Instant;

#[test]
#[ignore]
fn orbit_timing_probe() {
    let t0 = Instant::now();
    let mut x = RealInput::seeded(7);
    let orbit = gauss_digits(&mut x, 100_000, None).unwrap();
    println!("1e5 digits: {:?}, head: {:?}", t0.elapsed(), &orbit.symbols[..8]);

    let t1 = Instant::now();
    let mut x = RealInput::seeded(12345);
    let orbit = gauss_digits(&mut x, 1_000_000, None).unwrap();
    let ones = orbit.symbols.iter().filter(|&&d| d == 1).count();
    println!("1e6 digits: {:?}, digit-1 freq: {}", t1.elapsed(), ones as f64 / 1e6);
}
