//! Fixtures shared by the benchmarks.

use quaketail::sim::simulate_pairs;
use quaketail::{AftershockLaw, CensoredPairs, ParametricModel, RngStream, TruncExp};

/// Mainshock rate, gap slope and gap scale of a typical regional fit.
pub const ALPHA: f64 = 2.0;
pub const BETA: f64 = 2.0;
pub const GAP_C: f64 = 0.08;

pub fn law() -> AftershockLaw {
    AftershockLaw::from_gompertz(BETA, GAP_C, 1.0, 2.0).expect("valid law")
}

pub fn model() -> ParametricModel {
    ParametricModel {
        margin_x: TruncExp::new(ALPHA, 4.95).expect("valid margin"),
        gap: law().gap_law(),
    }
}

/// `n` simulated pairs censored at 4.0, magnitudes on the 0.1 grid.
pub fn pairs(n: usize, seed: u64) -> CensoredPairs {
    let mut rng = RngStream::new(seed, 0);
    let mut p = simulate_pairs(&law(), &model().margin_x, n, 4.0, &mut rng);
    for pair in &mut p.pairs {
        pair.x = (pair.x * 10.0).round() / 10.0;
        pair.y = pair.y.map(|y| (y * 10.0).round() / 10.0);
    }
    p
}
