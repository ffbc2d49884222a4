//! Poincaré series and critical-exponent estimation.

use crate::error::{Error, Result};
use crate::group::{orbit_ball, GroupScenario, OrbitBall, DEFAULT_ELEMENT_BUDGET};

/// Slope fits over orbit counts need at least this many radii.
const MIN_FIT_POINTS: usize = 4;
/// Tail-slope diagnostics need at least this many non-empty shells.
const TAIL_MIN_SHELLS: usize = 3;
/// Bisection refinements for the divergence bracket.
const BRACKET_ITERS: usize = 60;
/// Doublings allowed when searching for a convergent series parameter.
const BRACKET_DOUBLINGS: u32 = 8;

/// Least-squares slope of `ys` on `xs` with its standard error (0 when the
/// fit is exact or has no residual degrees of freedom).
pub fn slope_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "slope fit needs >= 2 matched points, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx <= 0.0 {
        return Err(Error::InsufficientData(
            "slope fit abscissa has zero spread".into(),
        ));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let stderr = if xs.len() > 2 {
        (ssr / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok((slope, stderr))
}

/// Partial Poincaré sum over an orbit ball with a unit-width shell profile.
#[derive(Debug, Clone)]
pub struct PoincareSeries {
    pub s: f64,
    /// `Σ e^{-s·d(o, γo)}` over the ball, summed in enumeration order.
    pub partial_sum: f64,
    /// Shell `k` collects elements with distance in `[k, k+1)`.
    pub shell_sums: Vec<f64>,
    /// Element count per shell.
    pub shell_counts: Vec<usize>,
    /// Least-squares slope of `ln(shell sum)` over the upper half of the
    /// non-empty shells; negative means the tail is converging. NaN when
    /// fewer than [`TAIL_MIN_SHELLS`] shells are usable.
    pub tail_log_slope: f64,
    /// Standard error of the tail slope (NaN alongside the slope).
    pub tail_slope_stderr: f64,
}

/// Evaluates the Poincaré series of the ball at parameter `s >= 0`.
pub fn poincare_series(ball: &OrbitBall, s: f64) -> Result<PoincareSeries> {
    if !s.is_finite() || s < 0.0 {
        return Err(Error::Config(format!(
            "series parameter must be finite and non-negative, got {s}"
        )));
    }
    let n_shells = ball.radius.floor() as usize + 1;
    let mut shell_sums = vec![0.0f64; n_shells];
    let mut shell_counts = vec![0usize; n_shells];
    let mut partial_sum = 0.0;
    for e in &ball.elements {
        let w = (-s * e.distance).exp();
        let k = (e.distance.floor() as usize).min(n_shells - 1);
        shell_sums[k] += w;
        shell_counts[k] += 1;
        partial_sum += w;
    }
    let (tail_log_slope, tail_slope_stderr) = tail_slope(&shell_sums, &shell_counts);
    Ok(PoincareSeries {
        s,
        partial_sum,
        shell_sums,
        shell_counts,
        tail_log_slope,
        tail_slope_stderr,
    })
}

fn tail_slope(sums: &[f64], counts: &[usize]) -> (f64, f64) {
    let last = match counts.iter().rposition(|&c| c > 0) {
        Some(k) => k,
        None => return (f64::NAN, f64::NAN),
    };
    let lo = last.div_ceil(2);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for k in lo..=last {
        if counts[k] > 0 && sums[k] > 0.0 {
            xs.push(k as f64);
            ys.push(sums[k].ln());
        }
    }
    if xs.len() < TAIL_MIN_SHELLS {
        return (f64::NAN, f64::NAN);
    }
    match slope_fit(&xs, &ys) {
        Ok((s, e)) => (s, e),
        Err(_) => (f64::NAN, f64::NAN),
    }
}

/// How a critical-exponent estimate was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExponentMethod {
    /// Least-squares slope of `ln N(r)` over the upper radius window.
    LogCountSlope,
    /// Bisection on the sign of the Poincaré tail slope.
    PoincareBracket,
}

/// A critical-exponent estimate with its fit diagnostics.
#[derive(Debug, Clone)]
pub struct CriticalExponentEstimate {
    pub delta_hat: f64,
    pub fit_stderr: f64,
    /// Radii (or shell indices) entering the fit.
    pub radii_used: Vec<f64>,
    /// Orbit counts (or shell cardinalities) at those radii.
    pub counts_used: Vec<usize>,
    pub method: ExponentMethod,
}

/// Growth-rate estimate from an already-enumerated ball: least-squares slope
/// of `ln N(r)` over integer radii in the upper half window `[ceil(R/2), R]`.
pub fn exponent_from_ball(ball: &OrbitBall) -> Result<CriticalExponentEstimate> {
    let r_max = ball.radius.floor() as usize;
    let lo = r_max.div_ceil(2).max(1);
    let mut radii = Vec::new();
    let mut counts = Vec::new();
    for r in lo..=r_max {
        let n = ball.count_within(r as f64);
        if n > 0 {
            radii.push(r as f64);
            counts.push(n);
        }
    }
    if radii.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData(format!(
            "exponent fit needs >= {MIN_FIT_POINTS} usable radii, got {} in window [{lo}, {r_max}]",
            radii.len()
        )));
    }
    let ys: Vec<f64> = counts.iter().map(|&n| (n as f64).ln()).collect();
    let (slope, stderr) = slope_fit(&radii, &ys)?;
    Ok(CriticalExponentEstimate {
        delta_hat: slope.max(0.0),
        fit_stderr: stderr,
        radii_used: radii,
        counts_used: counts,
        method: ExponentMethod::LogCountSlope,
    })
}

/// Estimates the critical exponent by enumerating a ball of `radius` and
/// fitting the log-count slope.
pub fn critical_exponent_at(
    s: &GroupScenario,
    radius: f64,
    budget: usize,
) -> Result<CriticalExponentEstimate> {
    let ball = orbit_ball(s, radius, budget)?;
    exponent_from_ball(&ball)
}

/// [`critical_exponent_at`] at the scenario's radius limit and default budget.
pub fn critical_exponent(s: &GroupScenario) -> Result<CriticalExponentEstimate> {
    critical_exponent_at(s, s.max_radius, DEFAULT_ELEMENT_BUDGET)
}

/// Brackets the critical exponent as the parameter where the Poincaré tail
/// slope changes sign: divergent (slope >= 0) below, convergent above.
///
/// Reported stderr combines the shell-fit uncertainty at the crossing with
/// the final bisection width.
pub fn poincare_bracket(ball: &OrbitBall) -> Result<CriticalExponentEstimate> {
    let slope_at = |s: f64| -> Result<PoincareSeries> { poincare_series(ball, s) };
    let base = slope_at(0.0)?;
    if base.tail_log_slope.is_nan() {
        return Err(Error::InsufficientData(
            "too few populated shells for a tail-slope bracket".into(),
        ));
    }
    let report = |mid: f64, width: f64, series: PoincareSeries| CriticalExponentEstimate {
        delta_hat: mid.max(0.0),
        fit_stderr: series.tail_slope_stderr.max(width),
        radii_used: series
            .shell_counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(k, _)| k as f64)
            .collect(),
        counts_used: series
            .shell_counts
            .iter()
            .copied()
            .filter(|&c| c > 0)
            .collect(),
        method: ExponentMethod::PoincareBracket,
    };
    if base.tail_log_slope < 0.0 {
        // already convergent at s = 0: the exponent is 0 at ball scale
        return Ok(report(0.0, 0.0, base));
    }
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    let mut hi_ok = false;
    for _ in 0..=BRACKET_DOUBLINGS {
        if slope_at(hi)?.tail_log_slope < 0.0 {
            hi_ok = true;
            break;
        }
        lo = hi;
        hi *= 2.0;
    }
    if !hi_ok {
        return Err(Error::NumericalFailure(format!(
            "Poincaré tail still divergent at s = {hi}"
        )));
    }
    for _ in 0..BRACKET_ITERS {
        let mid = 0.5 * (lo + hi);
        if slope_at(mid)?.tail_log_slope < 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mid = 0.5 * (lo + hi);
    let series = slope_at(mid)?;
    Ok(report(mid, hi - lo, series))
}
