//! Rank-based bivariate tail route.
//!
//! Joint exceedance probabilities are extrapolated as
//! `P(X > s, Y > t) ≈ p2 R(p1 / p2, 1)` with `p1 = P(X > s)`, `p2 = P(Y > t)`
//! and `R` the tail dependence function, estimated from the ranks of the
//! `k` largest observations.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decluster::CensoredPairs;
use crate::dist::{fit_truncexp, ks_test, DistError, KsResult, RngStream, StreamId, TruncExp};
use crate::level::{bisect_decreasing, LevelPoint, Root};

/// Range of `x` over which `R(x, 1)` is treated as estimated.
pub const RATIO_MIN: f64 = 0.02;
pub const RATIO_MAX: f64 = 5.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvtError {
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error("k = {k} must satisfy 1 <= k < n_observed = {n_observed} so censored ranks stay out of the estimate")]
    InvalidK { k: usize, n_observed: usize },
    #[error("threshold scale k*y = {ky} reaches the censored ranks (n_observed = {n_observed})")]
    CensoredReach { ky: f64, n_observed: usize },
    #[error("{name} = {value} is below its margin truncation {truncation}")]
    BelowTruncation { name: &'static str, value: f64, truncation: f64 },
    #[error("invalid argument {name} = {value}")]
    InvalidArgument { name: &'static str, value: f64 },
    #[error("no pairs")]
    Empty,
}

/// Joint ranks of the pairs. Censored `y` take ranks `1..=n - n_observed`
/// in input order; every other tie group gets a random permutation of its
/// rank slots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedSample {
    pub n: usize,
    pub n_observed: usize,
    pub ranks_x: Vec<usize>,
    pub ranks_y: Vec<usize>,
    /// Stream state the tie-breaking started from.
    pub tie_stream: StreamId,
}

/// Assigns 1-based ranks `offset + 1 ..` to `idx` ordered by `values`,
/// shuffling the slots inside each group of equal values.
fn rank_into(values: &[f64], mut idx: Vec<usize>, offset: usize, out: &mut [usize], rng: &mut RngStream) {
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && values[idx[end]] == values[idx[start]] {
            end += 1;
        }
        let mut slots: Vec<usize> = (offset + start + 1..=offset + end).collect();
        if slots.len() > 1 {
            slots.shuffle(rng);
        }
        for (&i, r) in idx[start..end].iter().zip(slots) {
            out[i] = r;
        }
        start = end;
    }
}

pub fn rank_with_random_ties(pairs: &CensoredPairs, rng: &mut RngStream) -> RankedSample {
    let tie_stream = rng.id();
    let n = pairs.n();
    let xs = pairs.xs();
    let mut ranks_x = vec![0; n];
    rank_into(&xs, (0..n).collect(), 0, &mut ranks_x, rng);

    let mut ranks_y = vec![0; n];
    let ys: Vec<f64> = pairs.pairs.iter().map(|p| p.y.unwrap_or(f64::NEG_INFINITY)).collect();
    let (observed, censored): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| pairs.pairs[i].y.is_some());
    for (r, &i) in censored.iter().enumerate() {
        ranks_y[i] = r + 1;
    }
    rank_into(&ys, observed, censored.len(), &mut ranks_y, rng);

    RankedSample {
        n,
        n_observed: n - censored.len(),
        ranks_x,
        ranks_y,
        tie_stream,
    }
}

impl RankedSample {
    fn check_k(&self, k: usize) -> Result<(), EvtError> {
        if k == 0 || k >= self.n_observed {
            return Err(EvtError::InvalidK {
                k,
                n_observed: self.n_observed,
            });
        }
        Ok(())
    }

    /// `R̂(x, y) = (1/k) #{i : R_i^X > n + 1/2 - kx, R_i^Y > n + 1/2 - ky}`.
    pub fn r_hat_xy(&self, x: f64, y: f64, k: usize) -> Result<f64, EvtError> {
        self.check_k(k)?;
        if !(x >= 0.0) {
            return Err(EvtError::InvalidArgument { name: "x", value: x });
        }
        if !(y >= 0.0) {
            return Err(EvtError::InvalidArgument { name: "y", value: y });
        }
        let kf = k as f64;
        if kf * y >= self.n_observed as f64 + 0.5 {
            return Err(EvtError::CensoredReach {
                ky: kf * y,
                n_observed: self.n_observed,
            });
        }
        let top = self.n as f64 + 0.5;
        let (tx, ty) = (top - kf * x, top - kf * y);
        let count = self
            .ranks_x
            .iter()
            .zip(&self.ranks_y)
            .filter(|(&rx, &ry)| rx as f64 > tx && ry as f64 > ty)
            .count();
        Ok(count as f64 / kf)
    }

    /// `R̂(x, 1)`.
    pub fn r_hat(&self, x: f64, k: usize) -> Result<f64, EvtError> {
        self.r_hat_xy(x, 1.0, k)
    }

    /// Beta-smoothed `R̂_b(x, 1) = (1/k) Σ B(R_i^X, kx) B(R_i^Y, k)` with
    /// `B(r, m) = P[Binomial(n, 1 - m/n) <= r - 1]`.
    pub fn r_hat_smoothed(&self, x: f64, k: usize) -> Result<f64, EvtError> {
        Smoother::new(self, k)?.eval(x)
    }
}

/// `ln j!` for `j = 0..=n`.
fn log_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for j in 1..=n {
        acc += (j as f64).ln();
        out.push(acc);
    }
    out
}

/// `cdf[j] = P[Binomial(n, q) <= j]` for `j = 0..n`.
fn binomial_cdf(n: usize, q: f64, lf: &[f64]) -> Vec<f64> {
    if q <= 0.0 {
        return vec![1.0; n + 1];
    }
    if q >= 1.0 {
        let mut v = vec![0.0; n + 1];
        v[n] = 1.0;
        return v;
    }
    let (lq, lp) = (q.ln(), (-q).ln_1p());
    let mut acc = 0.0;
    (0..=n)
        .map(|j| {
            acc += (lf[n] - lf[j] - lf[n - j] + j as f64 * lq + (n - j) as f64 * lp).exp();
            acc.min(1.0)
        })
        .collect()
}

/// Evaluates `R̂_b(·, 1)` repeatedly; the `Y` factors are computed once.
pub struct Smoother<'a> {
    ranks: &'a RankedSample,
    k: usize,
    lf: Vec<f64>,
    weight_y: Vec<f64>,
}

impl<'a> Smoother<'a> {
    pub fn new(ranks: &'a RankedSample, k: usize) -> Result<Self, EvtError> {
        ranks.check_k(k)?;
        let lf = log_factorials(ranks.n);
        let cdf = binomial_cdf(ranks.n, 1.0 - k as f64 / ranks.n as f64, &lf);
        let weight_y = ranks.ranks_y.iter().map(|&r| cdf[r - 1]).collect();
        Ok(Self {
            ranks,
            k,
            lf,
            weight_y,
        })
    }

    pub fn eval(&self, x: f64) -> Result<f64, EvtError> {
        if !(x >= 0.0) {
            return Err(EvtError::InvalidArgument { name: "x", value: x });
        }
        let n = self.ranks.n;
        let m = (self.k as f64 * x / n as f64).clamp(0.0, 1.0);
        let cdf = binomial_cdf(n, 1.0 - m, &self.lf);
        let s: f64 = self
            .ranks
            .ranks_x
            .iter()
            .zip(&self.weight_y)
            .map(|(&r, w)| cdf[r - 1] * w)
            .sum();
        Ok(s / self.k as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KRow {
    pub x: f64,
    pub k: usize,
    pub r_hat: f64,
}

/// `R̂(x, 1)` over every `(x, k)` combination, `x` outer.
pub fn k_diagnostic(ranks: &RankedSample, xs: &[f64], ks: &[usize]) -> Result<Vec<KRow>, EvtError> {
    let mut rows = Vec::with_capacity(xs.len() * ks.len());
    for &x in xs {
        for &k in ks {
            rows.push(KRow {
                x,
                k,
                r_hat: ranks.r_hat(x, k)?,
            });
        }
    }
    Ok(rows)
}

/// `L(x, y) = x + y - R(x, y)`.
pub fn stable_tail_l(x: f64, y: f64, r: f64) -> f64 {
    x + y - r
}

/// `A(w) = 1 - R(1 - w, w)`, clamped to `[max(w, 1 - w), 1]`; `A(0) = A(1) = 1`.
pub fn pickands_from_r(w: f64, r: f64) -> Result<f64, EvtError> {
    if !(0.0..=1.0).contains(&w) {
        return Err(EvtError::InvalidArgument { name: "w", value: w });
    }
    if w == 0.0 || w == 1.0 {
        return Ok(1.0);
    }
    Ok((1.0 - r).clamp(w.max(1.0 - w), 1.0))
}

/// Pickands dependence function from the rank estimator.
pub fn pickands_a(ranks: &RankedSample, k: usize, w: f64) -> Result<f64, EvtError> {
    if !(0.0..=1.0).contains(&w) {
        return Err(EvtError::InvalidArgument { name: "w", value: w });
    }
    let r = if w == 0.0 || w == 1.0 { 0.0 } else { ranks.r_hat_xy(1.0 - w, w, k)? };
    pickands_from_r(w, r)
}

/// `Y` margin: truncated exponential fitted on observed `y >= truncation`,
/// scaled by the fraction of all pairs in that range so `sf` is unconditional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExceedanceMargin {
    pub law: TruncExp,
    pub n_used: usize,
    pub n_total: usize,
}

impl ExceedanceMargin {
    pub fn fit(observed_ys: &[f64], truncation: f64, n_total: usize) -> Result<Self, EvtError> {
        let used: Vec<f64> = observed_ys.iter().copied().filter(|&y| y >= truncation).collect();
        let law = fit_truncexp(&used, truncation)?;
        Ok(Self {
            law,
            n_used: used.len(),
            n_total: n_total.max(used.len()),
        })
    }

    pub fn fraction(&self) -> f64 {
        self.n_used as f64 / self.n_total as f64
    }

    /// `P(Y > t)` for `t` at or above the truncation point.
    pub fn sf(&self, t: f64) -> f64 {
        self.fraction() * self.law.sf(t)
    }

    /// KS test of the `y >= truncation` part of `ys` against the fitted law.
    pub fn ks(&self, ys: &[f64]) -> Result<KsResult, EvtError> {
        let t0 = self.law.truncation();
        let used: Vec<f64> = ys.iter().copied().filter(|&y| y >= t0).collect();
        Ok(ks_test(&used, |y| self.law.cdf(y))?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvtFit {
    pub k: usize,
    pub margin_x: TruncExp,
    pub margin_y: ExceedanceMargin,
    pub ranked: RankedSample,
}

impl EvtFit {
    pub fn new(k: usize, margin_x: TruncExp, margin_y: ExceedanceMargin, ranked: RankedSample) -> Result<Self, EvtError> {
        ranked.check_k(k)?;
        Ok(Self {
            k,
            margin_x,
            margin_y,
            ranked,
        })
    }

    /// Margins fitted on the recorded values, ranks from `tie_rng`.
    pub fn from_pairs(
        pairs: &CensoredPairs,
        k: usize,
        truncation_x: f64,
        truncation_y: f64,
        tie_rng: &mut RngStream,
    ) -> Result<Self, EvtError> {
        if pairs.is_empty() {
            return Err(EvtError::Empty);
        }
        let margin_x = fit_truncexp(&pairs.xs(), truncation_x)?;
        let margin_y = ExceedanceMargin::fit(&pairs.observed_ys(), truncation_y, pairs.n())?;
        Self::new(k, margin_x, margin_y, rank_with_random_ties(pairs, tie_rng))
    }

    fn marginals(&self, s: f64, t: f64) -> Result<(f64, f64), EvtError> {
        let tx = self.margin_x.truncation();
        if !(s >= tx) {
            return Err(EvtError::BelowTruncation {
                name: "s",
                value: s,
                truncation: tx,
            });
        }
        let ty = self.margin_y.law.truncation();
        if !(t >= ty) {
            return Err(EvtError::BelowTruncation {
                name: "t",
                value: t,
                truncation: ty,
            });
        }
        Ok((self.margin_x.sf(s), self.margin_y.sf(t)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub s: f64,
    pub t: f64,
    pub p1: f64,
    pub p2: f64,
    /// `p1 / p2` as evaluated, after clamping to the estimated range.
    pub ratio: f64,
    pub r_hat: f64,
    pub probability: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// `P(X > s, Y > t) ≈ p2 R̂(p1 / p2, 1)` with the unsmoothed estimator.
/// Ratios outside `[0.02, 5]` are clamped to the nearer endpoint with a warning.
pub fn tail_prob_evt(fit: &EvtFit, s: f64, t: f64) -> Result<TailEstimate, EvtError> {
    let (p1, p2) = fit.marginals(s, t)?;
    let raw = p1 / p2;
    let ratio = raw.clamp(RATIO_MIN, RATIO_MAX);
    let warning = (ratio != raw).then(|| {
        format!("p1/p2 = {raw:.4} outside the estimated range [{RATIO_MIN}, {RATIO_MAX}]; clamped to {ratio}")
    });
    let r_hat = fit.ranked.r_hat(ratio, fit.k)?;
    Ok(TailEstimate {
        s,
        t,
        p1,
        p2,
        ratio,
        r_hat,
        probability: (p2 * r_hat).clamp(0.0, p1.min(p2)),
        warning,
    })
}

/// For each `x`, the `t` in `[truncation_y, x]` with `p2(t) R̂_b(p1 / p2(t), 1) = p`,
/// then a pool-adjacent-violators pass so `y` is non-increasing in `x`.
/// Points moved by that pass are flagged `adjusted`.
pub fn level_curve_evt(fit: &EvtFit, p: f64, xs: &[f64]) -> Result<Vec<LevelPoint>, EvtError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(EvtError::InvalidArgument { name: "p", value: p });
    }
    let smoother = Smoother::new(&fit.ranked, fit.k)?;
    let ty = fit.margin_y.law.truncation();
    let mut points = Vec::with_capacity(xs.len());
    for &x in xs {
        fit.marginals(x, ty).map_err(|_| EvtError::BelowTruncation {
            name: "x",
            value: x,
            truncation: fit.margin_x.truncation(),
        })?;
        let p1 = fit.margin_x.sf(x);
        let g = |t: f64| {
            let p2 = fit.margin_y.sf(t);
            p2 * smoother.eval(p1 / p2).expect("ratio is non-negative")
        };
        points.push(match bisect_decreasing(g, p, ty, x) {
            Root::Found(t) => LevelPoint::solved(x, t),
            Root::BelowRange => LevelPoint::missing(x, format!("level exceeds the estimate at y = {ty}")),
            Root::AboveRange => LevelPoint::missing(x, "level requires y above the diagonal y = x"),
        });
    }
    isotonic_non_increasing(&mut points);
    Ok(points)
}

/// Pool-adjacent-violators for a non-increasing fit over the solved points.
fn isotonic_non_increasing(points: &mut [LevelPoint]) {
    let solved: Vec<usize> = (0..points.len()).filter(|&i| points[i].y.is_some()).collect();
    // blocks of (sum, count)
    let mut blocks: Vec<(f64, usize)> = Vec::new();
    for &i in &solved {
        blocks.push((points[i].y.unwrap(), 1));
        while blocks.len() > 1 {
            let (s1, c1) = blocks[blocks.len() - 1];
            let (s0, c0) = blocks[blocks.len() - 2];
            if s0 / c0 as f64 >= s1 / c1 as f64 {
                break;
            }
            blocks.pop();
            *blocks.last_mut().unwrap() = (s0 + s1, c0 + c1);
        }
    }
    let mut it = solved.iter();
    for (sum, count) in blocks {
        let level = sum / count as f64;
        for _ in 0..count {
            let pt = &mut points[*it.next().unwrap()];
            if pt.y != Some(level) {
                pt.y = Some(level);
                pt.adjusted = true;
            }
        }
    }
}
