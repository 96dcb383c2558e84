//! Single-generation aftershock simulator.
//!
//! Given a mainshock of magnitude `m0`, aftershocks form a Poisson process on
//! days `t = 1, 2, ...` and magnitudes `0 <= m <= m0` with intensity
//! `10^{a + b (m0 - m)} / (t + c)^p`. Omori's constant `K` is absorbed into
//! `10^a`. There is no secondary triggering.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{Catalog, ShockRecord};
use crate::decluster::{CensoredPairs, Pair};
use crate::dist::{open_unit, Gompertz, RngStream, TruncExp};

/// Terms summed explicitly before the Euler–Maclaurin tail takes over.
pub const DIRECT_TERMS: u64 = 1000;
const TIME_TABLE: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("Omori exponent p = {0} must exceed 1, otherwise the expected aftershock count diverges")]
    Divergent(f64),
    #[error("invalid law parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("magnitude {m} outside [0, m0 = {m0}]")]
    MagnitudeOutOfRange { m: f64, m0: f64 },
}

/// Intensity law parameters with the derived Gompertz constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AftershockLaw {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub p: f64,
    /// `Σ_{t>=1} (t + c)^{-p}`.
    omori_sum: f64,
    /// Number of explicitly summed terms; the remainder is an asymptotic tail.
    truncation_day: u64,
}

impl AftershockLaw {
    pub fn new(a: f64, b: f64, c: f64, p: f64) -> Result<Self, SimError> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(SimError::Divergent(p));
        }
        if !(b > 0.0 && b.is_finite()) {
            return Err(SimError::InvalidParameter { name: "b", value: b });
        }
        if !(c > -1.0 && c.is_finite()) {
            return Err(SimError::InvalidParameter { name: "c", value: c });
        }
        if !a.is_finite() {
            return Err(SimError::InvalidParameter { name: "a", value: a });
        }
        Ok(Self {
            a,
            b,
            c,
            p,
            omori_sum: omori_series(c, p),
            truncation_day: DIRECT_TERMS,
        })
    }

    /// The law whose gap distribution is `Gompertz(beta, gompertz_c)`, for
    /// the given Omori `c` and `p`.
    pub fn from_gompertz(beta: f64, gompertz_c: f64, c: f64, p: f64) -> Result<Self, SimError> {
        if !(beta > 0.0 && gompertz_c > 0.0) {
            return Err(SimError::InvalidParameter {
                name: "beta/C",
                value: beta.min(gompertz_c),
            });
        }
        let b = beta / std::f64::consts::LN_10;
        let s = omori_series(c, p);
        let a = (gompertz_c * beta / s).log10();
        Self::new(a, b, c, p)
    }

    /// `beta = b ln 10`.
    pub fn beta(&self) -> f64 {
        self.b * std::f64::consts::LN_10
    }

    /// `C = 10^a Σ (t + c)^{-p} / beta`.
    pub fn gompertz_c(&self) -> f64 {
        10f64.powf(self.a) * self.omori_sum / self.beta()
    }

    pub fn omori_sum(&self) -> f64 {
        self.omori_sum
    }

    pub fn truncation_day(&self) -> u64 {
        self.truncation_day
    }

    /// Limiting gap law.
    pub fn gap_law(&self) -> Gompertz {
        Gompertz::new(self.beta(), self.gompertz_c()).expect("law constants are positive")
    }
}

/// `Σ_{t>=1} (t + c)^{-p}`: the first `DIRECT_TERMS - 1` terms explicitly, the
/// rest by Euler–Maclaurin through the fifth derivative. The remainder is
/// below `p^7 (N + c)^{-p-7}` at `N = 1000`, far under 1e-12.
pub fn omori_series(c: f64, p: f64) -> f64 {
    let f = |t: f64| (t + c).powf(-p);
    let n = DIRECT_TERMS as f64;
    let head: f64 = (1..DIRECT_TERMS).map(|t| f(t as f64)).sum();
    let x = n + c;
    let integral = x.powf(1.0 - p) / (p - 1.0);
    let d1 = -p * x.powf(-p - 1.0);
    let d3 = -p * (p + 1.0) * (p + 2.0) * x.powf(-p - 3.0);
    let d5 = -p * (p + 1.0) * (p + 2.0) * (p + 3.0) * (p + 4.0) * x.powf(-p - 5.0);
    let tail = integral + f(n) / 2.0 - d1 / 12.0 + d3 / 720.0 - d5 / 30240.0;
    head + tail
}

/// Aftershock rate per day per unit magnitude; zero above the mainshock magnitude.
pub fn intensity(law: &AftershockLaw, t: f64, m: f64, m0: f64) -> f64 {
    if m > m0 {
        return 0.0;
    }
    10f64.powf(law.a + law.b * (m0 - m)) / (t + law.c).powf(law.p)
}

/// `E[N | X = m0] = C e^{beta m0} (1 - e^{-beta m0})`.
pub fn expected_count(law: &AftershockLaw, m0: f64) -> f64 {
    law.gompertz_c() * (law.beta() * m0).exp_m1()
}

/// `P(X_A > m | X = m0)` for a single aftershock magnitude.
pub fn conditional_magnitude_sf(law: &AftershockLaw, m: f64, m0: f64) -> Result<f64, SimError> {
    if !(0.0..=m0).contains(&m) {
        return Err(SimError::MagnitudeOutOfRange { m, m0 });
    }
    let beta = law.beta();
    Ok(((-beta * m).exp() - (-beta * m0).exp()) / -(-beta * m0).exp_m1())
}

/// Inverse of [`conditional_magnitude_sf`] for `s` in [0, 1].
fn magnitude_from_sf(beta: f64, m0: f64, s: f64) -> f64 {
    let floor = (-beta * m0).exp();
    (-(floor + s * (1.0 - floor)).ln() / beta).clamp(0.0, m0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aftershock {
    /// Day index, starting at 1.
    pub t: u64,
    pub m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatedEvent {
    pub m0: f64,
    pub aftershocks: Vec<Aftershock>,
    pub largest: Option<f64>,
}

/// Samples the day index from weights proportional to `(t + c)^{-p}`: a
/// table for the first days and exact rejection from a continuous envelope
/// beyond it.
#[derive(Debug, Clone)]
pub struct OmoriTimes {
    c: f64,
    p: f64,
    cumulative: Vec<f64>,
}

impl OmoriTimes {
    pub fn new(law: &AftershockLaw) -> Self {
        let mut acc = 0.0;
        let cumulative = (1..=TIME_TABLE)
            .map(|t| {
                acc += (t as f64 + law.c).powf(-law.p) / law.omori_sum;
                acc
            })
            .collect();
        Self {
            c: law.c,
            p: law.p,
            cumulative,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u = rng.random::<f64>();
        let idx = self.cumulative.partition_point(|&c| c <= u);
        if idx < self.cumulative.len() {
            return idx as u64 + 1;
        }
        // Tail t > TIME_TABLE: propose x on [TIME_TABLE, inf) with density
        // proportional to (x + c)^{-p}, round up, accept with (t+c)^{-p}/(x+c)^{-p}.
        let start = TIME_TABLE as f64 + self.c;
        loop {
            let v = open_unit(rng);
            let x = start * v.powf(1.0 / (1.0 - self.p)) - self.c;
            let t = x.floor() + 1.0;
            let accept = ((x + self.c) / (t + self.c)).powf(self.p);
            if rng.random::<f64>() < accept {
                return t as u64;
            }
        }
    }
}

/// One mainshock's full aftershock sequence.
pub fn simulate_event<R: Rng + ?Sized>(law: &AftershockLaw, m0: f64, rng: &mut R) -> SimulatedEvent {
    let times = OmoriTimes::new(law);
    simulate_event_with(law, &times, m0, rng)
}

fn draw_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("finite positive mean").sample(rng) as u64
}

fn simulate_event_with<R: Rng + ?Sized>(
    law: &AftershockLaw,
    times: &OmoriTimes,
    m0: f64,
    rng: &mut R,
) -> SimulatedEvent {
    let n = draw_count(expected_count(law, m0), rng);
    let beta = law.beta();
    let mut aftershocks = Vec::with_capacity(n as usize);
    let mut largest: Option<f64> = None;
    for _ in 0..n {
        let m = magnitude_from_sf(beta, m0, rng.random::<f64>());
        let t = times.sample(rng);
        largest = Some(largest.map_or(m, |l: f64| l.max(m)));
        aftershocks.push(Aftershock { t, m });
    }
    SimulatedEvent {
        m0,
        aftershocks,
        largest,
    }
}

/// Largest aftershock only: given `N`, the maximum of `N` i.i.d. magnitudes is
/// drawn directly by inverting `F(m)^N`. Same law as the maximum of
/// [`simulate_event`], without materializing the sequence.
pub fn simulate_largest<R: Rng + ?Sized>(law: &AftershockLaw, m0: f64, rng: &mut R) -> Option<f64> {
    let n = draw_count(expected_count(law, m0), rng);
    if n == 0 {
        return None;
    }
    let u = open_unit(rng);
    let sf = -(u.ln() / n as f64).exp_m1();
    Some(magnitude_from_sf(law.beta(), m0, sf))
}

/// Count and largest magnitude of one simulated event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventSummary {
    pub count: usize,
    pub largest: Option<f64>,
}

/// Simulates `n_events` full sequences at a fixed `m0`, in chunks of
/// `chunk` events; chunk `i` uses stream `first_stream + i` of `seed`, so the
/// result does not depend on the thread count.
pub fn simulate_batch(
    law: &AftershockLaw,
    m0: f64,
    n_events: usize,
    seed: u64,
    first_stream: u64,
    chunk: usize,
) -> Vec<EventSummary> {
    let chunk = chunk.max(1);
    let times = OmoriTimes::new(law);
    let n_chunks = n_events.div_ceil(chunk);
    (0..n_chunks)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut rng = RngStream::new(seed, first_stream + i as u64);
            let len = chunk.min(n_events - i * chunk);
            (0..len)
                .map(|_| {
                    let e = simulate_event_with(law, &times, m0, &mut rng);
                    EventSummary {
                        count: e.aftershocks.len(),
                        largest: e.largest,
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

/// `n` independent pairs: `x` from the mainshock margin, `y` the largest
/// aftershock, censored below `censor_threshold`.
pub fn simulate_pairs<R: Rng + ?Sized>(
    law: &AftershockLaw,
    margin_x: &TruncExp,
    n: usize,
    censor_threshold: f64,
    rng: &mut R,
) -> CensoredPairs {
    let pairs = (0..n)
        .map(|_| {
            let x = margin_x.sample(rng);
            let y = simulate_largest(law, x, rng).filter(|&y| y >= censor_threshold);
            Pair { x, y }
        })
        .collect();
    CensoredPairs {
        pairs,
        censor_threshold,
    }
}

/// Days from the epoch to 2000-01-01.
const SYNTHETIC_START_DAY: f64 = 10_957.0;
const SYNTHETIC_SPACING_DEG: f64 = 2.0;
const SYNTHETIC_EPOCH_DAYS: f64 = 1000.0;

/// Lays simulated pairs out as a catalog the declustering step maps back onto
/// the same pairs: each mainshock gets its own cell of a 2-degree grid
/// between 60°S and 60°N (farther apart than any window radius), and the
/// observed largest aftershock follows one day later at the same epicenter.
/// Once all cells are used the layout repeats 1000 days later, past the
/// longest window. Magnitudes are rounded to the 0.1 grid.
pub fn synthetic_catalog(pairs: &CensoredPairs) -> Catalog {
    let lats: Vec<f64> = (0..=60).map(|i| -60.0 + SYNTHETIC_SPACING_DEG * i as f64).collect();
    let lons: Vec<f64> = (0..180).map(|i| -178.0 + SYNTHETIC_SPACING_DEG * i as f64).collect();
    let cells = lats.len() * lons.len();
    let round = |m: f64| (m * 10.0).round() / 10.0;

    let mut shocks = Vec::with_capacity(2 * pairs.n());
    let mut id = 1;
    for (i, p) in pairs.pairs.iter().enumerate() {
        let cell = i % cells;
        let lat = lats[cell / lons.len()];
        let lon = lons[cell % lons.len()];
        let day = SYNTHETIC_START_DAY + SYNTHETIC_EPOCH_DAYS * (i / cells) as f64;
        shocks.push(ShockRecord {
            id,
            time: day,
            latitude: lat,
            longitude: lon,
            depth: None,
            magnitude: round(p.x),
        });
        id += 1;
        if let Some(y) = p.y {
            shocks.push(ShockRecord {
                id,
                time: day + 1.0,
                latitude: lat,
                longitude: lon,
                depth: None,
                magnitude: round(y),
            });
            id += 1;
        }
    }
    Catalog::new(shocks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::ks_test;

    fn reference_law() -> AftershockLaw {
        AftershockLaw::new(0.0, 1.0, 1.0, 2.0).unwrap()
    }

    #[test]
    fn omori_series_matches_zeta() {
        // ζ(2) - 1
        let s = omori_series(1.0, 2.0);
        assert!((s - (std::f64::consts::PI.powi(2) / 6.0 - 1.0)).abs() < 1e-13, "{s}");
        // ζ(3) - 1 with c = 1; ζ(3) = 1.2020569031595942
        assert!((omori_series(1.0, 3.0) - 0.202_056_903_159_594_2).abs() < 1e-13);
    }

    #[test]
    fn intensity_examples() {
        let law = reference_law();
        assert!((intensity(&law, 1.0, 3.0, 3.0) - 0.25).abs() < 1e-15);
        let r1 = intensity(&law, 1.0, 2.0, 3.0);
        let r2 = intensity(&law, 3.0, 2.0, 3.0);
        assert!((r1 / r2 - 4.0).abs() < 1e-12);
        assert!(intensity(&law, 1.0, 3.0, 3.0) < intensity(&law, 1.0, 2.9, 3.0));
        assert_eq!(intensity(&law, 1.0, 3.1, 3.0), 0.0);
    }

    #[test]
    fn expected_count_hand_value() {
        let law = reference_law();
        assert!((law.gompertz_c() - 0.280_091_306_4).abs() < 1e-9);
        assert!((expected_count(&law, 1.0) - 2.520_821_758).abs() < 1e-8);
        assert_eq!(expected_count(&law, 0.0), 0.0);
    }

    #[test]
    fn expected_count_matches_brute_force() {
        for &(a, b, c, p, m0) in &[(0.3, 1.1, 0.5, 3.0, 2.5), (-0.5, 0.9, 0.05, 2.5, 4.0), (0.0, 1.0, 1.0, 3.5, 1.0)] {
            let law = AftershockLaw::new(a, b, c, p).unwrap();
            // Σ_t (t+c)^{-p} ∫_0^{m0} 10^{a+b(m0-u)} du, Simpson in u
            let k = 2000;
            let h = m0 / k as f64;
            let g = |u: f64| 10f64.powf(a + b * (m0 - u));
            let mut mag_integral = g(0.0) + g(m0);
            for i in 1..k {
                mag_integral += if i % 2 == 1 { 4.0 } else { 2.0 } * g(i as f64 * h);
            }
            mag_integral *= h / 3.0;
            let mut time_sum = 0.0;
            for t in (1..=4_000_000u64).rev() {
                time_sum += (t as f64 + c).powf(-p);
            }
            let brute = time_sum * mag_integral;
            let closed = expected_count(&law, m0);
            assert!((brute - closed).abs() < 1e-9 * closed.max(1.0), "{brute} vs {closed}");
        }
    }

    #[test]
    fn divergent_law_rejected() {
        assert_eq!(AftershockLaw::new(0.0, 1.0, 1.0, 1.0), Err(SimError::Divergent(1.0)));
        assert!(AftershockLaw::new(0.0, 1.0, -1.0, 2.0).is_err());
        assert!(AftershockLaw::new(0.0, 0.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn conditional_sf_examples() {
        let law = reference_law();
        assert!((conditional_magnitude_sf(&law, 0.0, 2.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(conditional_magnitude_sf(&law, 2.0, 2.0).unwrap().abs() < 1e-15);
        let v = conditional_magnitude_sf(&law, 1.0, 2.0).unwrap();
        assert!((v - 0.09 / 0.99).abs() < 1e-12);
        assert!(conditional_magnitude_sf(&law, 2.5, 2.0).is_err());
    }

    #[test]
    fn from_gompertz_round_trips() {
        let law = AftershockLaw::from_gompertz(2.3, 1.0, 1.0, 2.0).unwrap();
        assert!((law.beta() - 2.3).abs() < 1e-12);
        assert!((law.gompertz_c() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn event_count_and_zero_class() {
        let law = reference_law();
        let m0 = 1.0;
        let mean = expected_count(&law, m0);
        let mut rng = RngStream::new(5, 0);
        let n = 100_000;
        let mut total = 0usize;
        let mut zeros = 0usize;
        for _ in 0..n {
            let e = simulate_event(&law, m0, &mut rng);
            assert!(e.aftershocks.iter().all(|a| a.m <= m0 && a.t >= 1));
            assert_eq!(e.largest.is_none(), e.aftershocks.is_empty());
            total += e.aftershocks.len();
            zeros += e.aftershocks.is_empty() as usize;
        }
        let emp = total as f64 / n as f64;
        assert!((emp - mean).abs() < 3.0 * (mean / n as f64).sqrt(), "{emp} vs {mean}");
        let p0 = (-mean).exp();
        let f0 = zeros as f64 / n as f64;
        assert!((f0 - p0).abs() < 3.0 * (p0 * (1.0 - p0) / n as f64).sqrt());
    }

    #[test]
    fn largest_matches_closed_form() {
        let law = reference_law();
        let m0 = 2.0;
        let mut rng = RngStream::new(6, 0);
        let n = 100_000;
        let largest: Vec<Option<f64>> = (0..n).map(|_| simulate_event(&law, m0, &mut rng).largest).collect();
        let (beta, c) = (law.beta(), law.gompertz_c());
        for &m in &[m0 - 2.0 + 1e-9, m0 - 1.0, m0 - 0.5] {
            let expected = (-c * ((-beta * (m - m0)).exp() - 1.0)).exp();
            let below = largest.iter().filter(|y| y.is_none_or(|y| y <= m)).count() as f64 / n as f64;
            let sigma = (expected * (1.0 - expected) / n as f64).sqrt();
            assert!((below - expected).abs() < 3.0 * sigma.max(1e-6), "m={m}: {below} vs {expected}");
        }
    }

    #[test]
    fn magnitudes_pass_ks_against_sf() {
        let law = reference_law();
        let m0 = 3.0;
        let mut pass = 0;
        for seed in 0..100 {
            let mut rng = RngStream::new(seed, 9);
            let mut mags = Vec::new();
            while mags.len() < 2000 {
                mags.extend(simulate_event(&law, m0, &mut rng).aftershocks.iter().map(|a| a.m));
            }
            let ks = ks_test(&mags, |m| 1.0 - conditional_magnitude_sf(&law, m.clamp(0.0, m0), m0).unwrap()).unwrap();
            pass += (ks.p_value > 0.01) as usize;
        }
        assert!(pass >= 98, "{pass}");
    }

    #[test]
    fn omori_times_follow_weights() {
        let law = AftershockLaw::new(0.0, 1.0, 0.5, 1.5).unwrap();
        let sampler = OmoriTimes::new(&law);
        let mut rng = RngStream::new(8, 0);
        let n = 400_000;
        let mut counts = [0usize; 4];
        let mut beyond = 0usize;
        for _ in 0..n {
            let t = sampler.sample(&mut rng);
            assert!(t >= 1);
            if t <= 4 {
                counts[t as usize - 1] += 1;
            }
            if t > 100 {
                beyond += 1;
            }
        }
        for (i, &k) in counts.iter().enumerate() {
            let p = ((i + 1) as f64 + 0.5).powf(-1.5) / law.omori_sum();
            let f = k as f64 / n as f64;
            assert!((f - p).abs() < 4.0 * (p * (1.0 - p) / n as f64).sqrt(), "t={} {f} {p}", i + 1);
        }
        let head: f64 = (1..=100).map(|t| (t as f64 + 0.5).powf(-1.5)).sum::<f64>() / law.omori_sum();
        let p = 1.0 - head;
        let f = beyond as f64 / n as f64;
        assert!((f - p).abs() < 4.0 * (p * (1.0 - p) / n as f64).sqrt(), "{f} {p}");
    }

    #[test]
    fn simulate_largest_matches_full_simulation_law() {
        let law = reference_law();
        let m0 = 2.0;
        let (beta, c) = (law.beta(), law.gompertz_c());
        let mut rng = RngStream::new(21, 0);
        let n = 200_000;
        let draws: Vec<Option<f64>> = (0..n).map(|_| simulate_largest(&law, m0, &mut rng)).collect();
        for &m in &[0.5, 1.0, 1.5, 1.9] {
            let expected = (-c * ((-beta * (m - m0)).exp() - 1.0)).exp();
            let below = draws.iter().filter(|y| y.is_none_or(|y| y <= m)).count() as f64 / n as f64;
            let sigma = (expected * (1.0 - expected) / n as f64).sqrt();
            assert!((below - expected).abs() < 3.0 * sigma, "m={m}: {below} vs {expected}");
        }
    }

    #[test]
    fn batch_is_thread_count_independent() {
        let law = reference_law();
        let a = simulate_batch(&law, 1.5, 2500, 77, 100, 300);
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| simulate_batch(&law, 1.5, 2500, 77, 100, 300));
        assert_eq!(a, b);
        assert_eq!(a.len(), 2500);
    }

    #[test]
    fn pairs_support_and_reproducibility() {
        let law = AftershockLaw::from_gompertz(2.3, 1.0, 1.0, 2.0).unwrap();
        let margin = TruncExp::new(2.3, 4.95).unwrap();
        let a = simulate_pairs(&law, &margin, 2000, 4.0, &mut RngStream::new(1, 4));
        let b = simulate_pairs(&law, &margin, 2000, 4.0, &mut RngStream::new(1, 4));
        assert_eq!(a, b);
        for p in &a.pairs {
            assert!(p.x >= 4.95);
            if let Some(y) = p.y {
                assert!(y >= 4.0 && y <= p.x);
            }
        }
    }

    #[test]
    fn censoring_fraction_matches_quadrature() {
        let law = AftershockLaw::from_gompertz(2.0, 0.08, 1.0, 2.0).unwrap();
        let margin = TruncExp::new(2.0, 4.95).unwrap();
        let n = 10_000;
        let pairs = simulate_pairs(&law, &margin, n, 4.0, &mut RngStream::new(3, 4));
        let observed = 1.0 - pairs.n_observed() as f64 / n as f64;
        // E[P(Y < 4 | X)] with P(Y < 4 | X = x) = sf_gap(x - 4), midpoint rule on X
        let gap = law.gap_law();
        let upper = margin.upper_quantile(1e-15).unwrap();
        let k = 200_000;
        let h = (upper - 4.95) / k as f64;
        let expected: f64 = (0..k)
            .map(|i| {
                let x = 4.95 + (i as f64 + 0.5) * h;
                margin.pdf(x) * gap.sf(x - 4.0)
            })
            .sum::<f64>()
            * h;
        let sigma = (expected * (1.0 - expected) / n as f64).sqrt();
        assert!((observed - expected).abs() < 3.0 * sigma, "{observed} vs {expected}");
    }

    #[test]
    fn synthetic_catalog_layout() {
        let pairs = CensoredPairs {
            pairs: vec![Pair { x: 6.04, y: Some(4.96) }, Pair { x: 5.0, y: None }],
            censor_threshold: 4.0,
        };
        let c = synthetic_catalog(&pairs);
        assert_eq!(c.len(), 3);
        assert!(c.is_sorted());
        let mags: Vec<f64> = c.shocks.iter().map(|s| s.magnitude).collect();
        assert!(mags.contains(&6.0) && mags.contains(&5.0));
    }
}
