//! Sampling and estimation utilities shared by the simulators.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};

/// Draws the set of positions that fail independently with probability `p`
/// by geometric skipping, which costs O(expected failures) rather than O(len).
#[derive(Clone, Copy, Debug)]
pub struct BernoulliSampler {
    p: f64,
    ln_keep: f64,
}

impl BernoulliSampler {
    pub fn new(p: f64) -> Self {
        let p = p.clamp(0.0, 1.0);
        Self {
            p,
            ln_keep: (1.0 - p).ln(),
        }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Calls `hit` with each failing index in `0..len`, in increasing order.
    pub fn for_each<R: Rng + ?Sized>(&self, len: usize, rng: &mut R, mut hit: impl FnMut(usize)) {
        if self.p <= 0.0 || len == 0 {
            return;
        }
        if self.p >= 1.0 {
            (0..len).for_each(hit);
            return;
        }
        let mut pos: usize = 0;
        loop {
            let u: f64 = rng.random();
            let skip = ((1.0 - u).ln() / self.ln_keep).floor();
            if !skip.is_finite() || skip >= (len - pos) as f64 {
                return;
            }
            pos += skip as usize;
            hit(pos);
            pos += 1;
            if pos >= len {
                return;
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, len: usize, rng: &mut R) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each(len, rng, |i| out.push(i));
        out
    }
}

/// `P(W = w)` for `W ~ Binomial(n, p)`.
pub fn binomial_pmf(n: u64, w: u64, p: f64) -> f64 {
    if w > n {
        return 0.0;
    }
    if p <= 0.0 {
        return if w == 0 { 1.0 } else { 0.0 };
    }
    if p >= 1.0 {
        return if w == n { 1.0 } else { 0.0 };
    }
    (ln_binomial(n, w) + w as f64 * p.ln() + (n - w) as f64 * (-p).ln_1p()).exp()
}

/// Point estimate and one-sigma standard error of a failure probability.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub sigma: f64,
}

impl Estimate {
    /// Binomial proportion `failures / trials`.
    pub fn proportion(failures: u64, trials: u64) -> Self {
        if trials == 0 {
            return Self { value: 0.0, sigma: 0.0 };
        }
        let v = failures as f64 / trials as f64;
        Self {
            value: v,
            sigma: (v * (1.0 - v) / trials as f64).sqrt(),
        }
    }

    /// Number of combined standard deviations separating two estimates.
    pub fn separation(&self, other: &Estimate) -> f64 {
        let s = (self.sigma.powi(2) + other.sigma.powi(2)).sqrt();
        if s == 0.0 {
            if self.value == other.value {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.value - other.value).abs() / s
        }
    }
}

/// Result of fitting `P_L = A · p^D`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub amplitude: f64,
    pub exponent: f64,
    /// Root-mean-square residual in natural-log space.
    pub residual: f64,
}

impl FitResult {
    pub fn predict(&self, p: f64) -> f64 {
        self.amplitude * p.powf(self.exponent)
    }
}

/// Least-squares line through `(ln p, ln P_L)`. Points with zero failure rate
/// carry no information in log space and are skipped.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<FitResult> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(p, pl)| p > 0.0 && pl > 0.0)
        .map(|&(p, pl)| (p.ln(), pl.ln()))
        .collect();
    if logs.len() < 2 {
        return Err(Error::DegenerateFit);
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|l| l.0).sum::<f64>() / n;
    let my = logs.iter().map(|l| l.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|l| (l.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit);
    }
    let sxy: f64 = logs.iter().map(|l| (l.0 - mx) * (l.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = logs
        .iter()
        .map(|l| (l.1 - (intercept + slope * l.0)).powi(2))
        .sum();
    Ok(FitResult {
        amplitude: intercept.exp(),
        exponent: slope,
        residual: (sse / n).sqrt(),
    })
}

/// Finds where the piecewise log-log interpolation of `curve` meets
/// `reference(p)`, by bisection on the first bracketing segment.
/// `curve` must be sorted by `p`; points with zero rate are ignored.
pub fn log_log_crossing(curve: &[(f64, f64)], reference: impl Fn(f64) -> f64) -> Result<f64> {
    let pts: Vec<(f64, f64)> = curve
        .iter()
        .copied()
        .filter(|&(p, r)| p > 0.0 && r > 0.0)
        .collect();
    let gap = |p: f64, r: f64| r.ln() - reference(p).ln();
    for w in pts.windows(2) {
        let (p0, r0) = w[0];
        let (p1, r1) = w[1];
        let (g0, g1) = (gap(p0, r0), gap(p1, r1));
        if g0 == 0.0 {
            return Ok(p0);
        }
        if g0.signum() == g1.signum() && g1 != 0.0 {
            continue;
        }
        let (lp0, lp1) = (p0.ln(), p1.ln());
        let (lr0, lr1) = (r0.ln(), r1.ln());
        let interp = |lp: f64| {
            let t = (lp - lp0) / (lp1 - lp0);
            let r = (lr0 + t * (lr1 - lr0)).exp();
            gap(lp.exp(), r)
        };
        let (mut lo, mut hi) = (lp0, lp1);
        let sign_lo = interp(lo).signum();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if interp(mid).signum() == sign_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return Ok((0.5 * (lo + hi)).exp());
    }
    Err(Error::NoCrossing)
}
