//! Parametric route: truncated exponential mainshock margin plus a Gompertz
//! gap law fitted by censored maximum likelihood.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decluster::CensoredPairs;
use crate::dist::{fit_truncexp, jitter, ks_test, DistError, FitSummary, Gompertz, KsResult, TruncExp};
use crate::level::{bisect_decreasing, LevelPoint, Root};
use crate::optim::NelderMead;
use crate::quad::adaptive_simpson;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParametricError {
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error("no pairs to fit")]
    NoPairs,
    #[error("every pair is censored; the gap law is not identifiable")]
    NoObservedPairs,
    #[error("probability {0} outside (0, 1)")]
    InvalidProbability(f64),
    #[error("mainshock magnitude {x} below its truncation point {truncation}")]
    BelowTruncation { x: f64, truncation: f64 },
}

/// Censored Gompertz log-likelihood: `ln pdf(x - y)` for each observed pair
/// and `ln sf(x - threshold)` for each censored one. Returns `-inf` outside
/// `beta > 0, C > 0`.
pub fn censored_loglik(beta: f64, c: f64, pairs: &CensoredPairs) -> f64 {
    let Ok(g) = Gompertz::new(beta, c) else {
        return f64::NEG_INFINITY;
    };
    let t = pairs.censor_threshold;
    pairs
        .pairs
        .iter()
        .map(|p| match p.y {
            Some(y) => g.ln_pdf(p.x - y),
            None => g.ln_sf(p.x - t),
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensoredGompertzFit {
    pub beta: f64,
    pub c: f64,
    pub loglik: f64,
    pub n: usize,
    pub n_observed: usize,
    pub censor_threshold: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Fewer than two uncensored gaps: the estimate exists but is unreliable.
    pub degenerate: bool,
}

impl CensoredGompertzFit {
    pub fn law(&self) -> Gompertz {
        Gompertz::new(self.beta, self.c).expect("fitted parameters are positive")
    }
}

/// Maximizes [`censored_loglik`] over `(ln beta, ln C)` with Nelder–Mead from
/// five starts around `beta0 = 0.596 / mean(observed gaps)`, `C0 = 1` (the
/// mean gap at `C = 1` is `0.596 / beta`), then restarts once from the best.
pub fn fit_censored_gompertz(pairs: &CensoredPairs) -> Result<CensoredGompertzFit, ParametricError> {
    if pairs.is_empty() {
        return Err(ParametricError::NoPairs);
    }
    let gaps: Vec<f64> = pairs.pairs.iter().filter_map(|p| p.y.map(|y| p.x - y)).collect();
    if gaps.is_empty() {
        return Err(ParametricError::NoObservedPairs);
    }
    let mean_gap = gaps.iter().sum::<f64>() / gaps.len() as f64;
    let beta0 = if mean_gap > 0.0 { 0.596 / mean_gap } else { 1.0 };

    let objective = |v: &[f64]| -censored_loglik(v[0].exp(), v[1].exp(), pairs);
    let nm = NelderMead::default();
    let starts: [(f64, f64); 5] = [
        (beta0, 1.0),
        (beta0 / 2.0, 1.0),
        (2.0 * beta0, 1.0),
        (beta0, 0.25),
        (beta0, 4.0),
    ];
    let mut best = starts
        .iter()
        .map(|&(b, c)| nm.minimize(objective, &[b.ln(), c.ln()]))
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .expect("five starts");
    let polish = nm.minimize(objective, &best.x);
    let iterations = best.iterations + polish.iterations;
    if polish.value <= best.value {
        best = polish;
    }

    Ok(CensoredGompertzFit {
        beta: best.x[0].exp(),
        c: best.x[1].exp(),
        loglik: -best.value,
        n: pairs.n(),
        n_observed: gaps.len(),
        censor_threshold: pairs.censor_threshold,
        iterations,
        converged: best.converged,
        degenerate: gaps.len() < 2,
    })
}

/// Joint model for (mainshock, largest aftershock).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParametricModel {
    pub margin_x: TruncExp,
    pub gap: Gompertz,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParametricFit {
    pub model: ParametricModel,
    pub gap_fit: CensoredGompertzFit,
}

/// Fits the mainshock margin above `truncation_x` and the gap law on all pairs.
pub fn fit_parametric(pairs: &CensoredPairs, truncation_x: f64) -> Result<ParametricFit, ParametricError> {
    let margin_x = fit_truncexp(&pairs.xs(), truncation_x)?;
    let gap_fit = fit_censored_gompertz(pairs)?;
    Ok(ParametricFit {
        model: ParametricModel {
            margin_x,
            gap: gap_fit.law(),
        },
        gap_fit,
    })
}

impl ParametricModel {
    /// `P(Y > y | X = x) = P(Z < x - y)`.
    pub fn conditional_sf(&self, y: f64, x: f64) -> f64 {
        self.gap.cdf(x - y)
    }

    /// `P(X > s, Y > t) = ∫_{max(s,t)}^∞ f_X(u) P(Z < u - t) du`, integrated up
    /// to the 1e-15 upper quantile of `X` with relative tolerance 1e-9.
    pub fn joint_tail(&self, s: f64, t: f64) -> Result<f64, ParametricError> {
        let t0 = self.margin_x.truncation();
        if !(s >= t0) {
            return Err(ParametricError::BelowTruncation { x: s, truncation: t0 });
        }
        Ok(self.joint_tail_unchecked(s, t))
    }

    fn joint_tail_unchecked(&self, s: f64, t: f64) -> f64 {
        let lower = s.max(t);
        let upper = self
            .margin_x
            .upper_quantile(1e-15)
            .expect("1e-15 is a valid probability");
        if lower >= upper {
            return 0.0;
        }
        adaptive_simpson(
            |u| self.margin_x.pdf(u) * self.gap.cdf(u - t),
            lower,
            upper,
            1e-9,
            1e-300,
        )
        .value
        .clamp(0.0, self.margin_x.sf(lower))
    }

    /// `P(Y > t)`: the joint tail with `s` at the truncation point.
    pub fn y_sf(&self, t: f64) -> f64 {
        self.joint_tail_unchecked(self.margin_x.truncation(), t)
    }

    /// For each `x`, the `y` in `[0, x]` with `joint_tail(x, y) = p`. Points
    /// where the level is unattainable carry `y = None` and a note.
    pub fn level_curve(&self, p: f64, xs: &[f64]) -> Result<Vec<LevelPoint>, ParametricError> {
        let t0 = self.margin_x.truncation();
        if let Some(&x) = xs.iter().find(|&&x| !(x >= t0)) {
            return Err(ParametricError::BelowTruncation { x, truncation: t0 });
        }
        let x_min = xs.iter().copied().fold(f64::INFINITY, f64::min);
        if !(p > 0.0 && p < 1.0) || (!xs.is_empty() && !(p < self.margin_x.sf(x_min))) {
            return Err(ParametricError::InvalidProbability(p));
        }
        Ok(xs
            .iter()
            .map(|&x| match bisect_decreasing(|y| self.joint_tail_unchecked(x, y), p, 0.0, x) {
                Root::Found(y) => LevelPoint::solved(x, y),
                Root::BelowRange => LevelPoint::missing(x, "level exceeds P(X > x, Y > 0)"),
                Root::AboveRange => LevelPoint::missing(x, "level requires y above the diagonal y = x"),
            })
            .collect())
    }
}

/// `E[X - Y]` under the gap law.
pub fn mean_gap(gap: &Gompertz) -> f64 {
    gap.mean()
}

/// Completes every pair: observed `y` are kept, censored ones are drawn as
/// `x - z` with `z` from the gap law conditioned on `z >= x - threshold`.
/// One conditional draw per censored pair, in pair order.
pub fn impute_censored<R: Rng + ?Sized>(
    gap: &Gompertz,
    pairs: &CensoredPairs,
    rng: &mut R,
) -> Result<Vec<f64>, ParametricError> {
    let t = pairs.censor_threshold;
    pairs
        .pairs
        .iter()
        .map(|p| match p.y {
            Some(y) => Ok(y),
            None => Ok(p.x - gap.sample_conditional((p.x - t).max(0.0), rng)?),
        })
        .collect()
}

/// Parametric fit with goodness-of-fit diagnostics on jittered data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub margin_x: FitSummary,
    pub gap: FitSummary,
    pub iterations: usize,
    pub converged: bool,
    pub degenerate: bool,
    pub mean_gap: f64,
    pub jitter_half_width: f64,
    /// Jittered `x` against the fitted truncated exponential.
    pub ks_x: KsResult,
    /// Observed gaps (jittered) pooled with imputed censored gaps, against
    /// the fitted Gompertz law.
    pub ks_gap: Option<KsResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ks_gap_note: Option<String>,
}

/// Jitters `x`, fits the margin on the jittered values and KS-tests it; fits
/// the gap law on the pairs as recorded; imputes censored gaps and KS-tests
/// the pooled gaps. Draw order on `jitter_rng`: one per pair for `x`, then
/// one per observed gap.
pub fn fit_with_report<R1, R2>(
    pairs: &CensoredPairs,
    truncation_x: f64,
    jitter_half_width: f64,
    jitter_rng: &mut R1,
    impute_rng: &mut R2,
) -> Result<(ParametricFit, FitReport), ParametricError>
where
    R1: Rng + ?Sized,
    R2: Rng + ?Sized,
{
    let xs = jitter(&pairs.xs(), jitter_half_width, jitter_rng);
    let margin_x = fit_truncexp(&xs, truncation_x)?;
    let ks_x = ks_test(&xs, |x| margin_x.cdf(x))?;
    let gap_fit = fit_censored_gompertz(pairs)?;
    let gap = gap_fit.law();

    let observed: Vec<f64> = pairs.pairs.iter().filter_map(|p| p.y.map(|y| p.x - y)).collect();
    let mut pooled = jitter(&observed, jitter_half_width, jitter_rng);
    let (ks_gap, ks_gap_note) = match impute_censored(&gap, pairs, impute_rng) {
        Ok(ys) => {
            pooled.extend(pairs.pairs.iter().zip(&ys).filter(|(p, _)| p.y.is_none()).map(|(p, y)| p.x - y));
            (Some(ks_test(&pooled, |z| gap.cdf(z))?), None)
        }
        Err(e) => (None, Some(format!("imputation failed: {e}"))),
    };

    let model = ParametricModel { margin_x, gap };
    let report = FitReport {
        margin_x: margin_x.summary(&xs),
        gap: gap.summary(gap_fit.n, gap_fit.loglik),
        iterations: gap_fit.iterations,
        converged: gap_fit.converged,
        degenerate: gap_fit.degenerate,
        mean_gap: mean_gap(&gap),
        jitter_half_width,
        ks_x,
        ks_gap,
        ks_gap_note,
    };
    Ok((ParametricFit { model, gap_fit }, report))
}
