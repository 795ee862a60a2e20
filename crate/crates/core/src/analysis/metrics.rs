//! Step-response metrics on a uniformly sampled signal.
//!
//! All thresholds are evaluated on the normalised step
//! `(y − initial) / (target − initial)` with linear interpolation between
//! samples. Time is measured from the first sample.

use crate::error::{Error, Result};

pub const DEFAULT_SETTLING_BAND: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseMetrics {
    /// 10 % → 90 % of the step; `None` when either level is never reached.
    pub rise_time: Option<f64>,
    /// Entry into the settling band with no later exit; `None` if the
    /// record ends outside the band.
    pub settling_time: Option<f64>,
    /// Peak excursion beyond the target, percent of the step.
    pub overshoot: f64,
    /// `|mean(y) − target|` over the final 10 % of the record.
    pub steady_state_error: f64,
}

fn first_crossing(y: &[f64], level: f64, dt: f64) -> Option<f64> {
    let k = y.iter().position(|&v| v >= level)?;
    if k == 0 {
        return Some(0.0);
    }
    let (a, b) = (y[k - 1], y[k]);
    Some(((k - 1) as f64 + (level - a) / (b - a)) * dt)
}

pub fn response_metrics(samples: &[f64], dt: f64, initial: f64, target: f64) -> Result<ResponseMetrics> {
    response_metrics_with_band(samples, dt, initial, target, DEFAULT_SETTLING_BAND)
}

pub fn response_metrics_with_band(
    samples: &[f64],
    dt: f64,
    initial: f64,
    target: f64,
    band: f64,
) -> Result<ResponseMetrics> {
    if samples.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 samples, got {}",
            samples.len()
        )));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(format!(
            "sample interval must be positive, got {dt}"
        )));
    }
    let step = target - initial;
    if step == 0.0 || !step.is_finite() {
        return Err(Error::InvalidInput("target must differ from the initial value".into()));
    }
    if !(band > 0.0) {
        return Err(Error::InvalidInput(format!(
            "settling band must be positive, got {band}"
        )));
    }
    let y: Vec<f64> = samples.iter().map(|v| (v - initial) / step).collect();

    let rise_time = match (first_crossing(&y, 0.1, dt), first_crossing(&y, 0.9, dt)) {
        (Some(t10), Some(t90)) => Some(t90 - t10),
        _ => None,
    };

    let outside = |v: f64| (v - 1.0).abs() > band;
    let settling_time = match y.iter().rposition(|&v| outside(v)) {
        None => Some(0.0),
        Some(k) if k + 1 == y.len() => None,
        Some(k) => {
            let (a, b) = (y[k], y[k + 1]);
            let level = if a > 1.0 { 1.0 + band } else { 1.0 - band };
            Some((k as f64 + (level - a) / (b - a)) * dt)
        }
    };

    let peak = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let overshoot = ((peak - 1.0) * 100.0).max(0.0);

    let tail = (samples.len() as f64 * 0.1).ceil().max(1.0) as usize;
    let mean = samples[samples.len() - tail..].iter().sum::<f64>() / tail as f64;

    Ok(ResponseMetrics {
        rise_time,
        settling_time,
        overshoot,
        steady_state_error: (mean - target).abs(),
    })
}

/// A step found in a setpoint channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectedStep {
    /// Sample index at which the new setpoint takes effect.
    pub start: usize,
    pub initial: f64,
    pub target: f64,
}

/// Finds a single step in `setpoint` relative to the measured `signal`.
/// Either the setpoint is constant and differs from the signal's first
/// value (step at t = 0), or it changes value exactly once.
pub fn detect_step(signal: &[f64], setpoint: &[f64]) -> Option<DetectedStep> {
    if signal.len() < 2 || setpoint.len() != signal.len() {
        return None;
    }
    let scale = setpoint.iter().chain(signal).fold(1.0_f64, |m, v| m.max(v.abs()));
    let tol = 1e-9 * scale;
    let changes: Vec<usize> = (1..setpoint.len())
        .filter(|&k| (setpoint[k] - setpoint[k - 1]).abs() > tol)
        .collect();
    match changes.as_slice() {
        [] => {
            let target = setpoint[0];
            ((target - signal[0]).abs() > 1e-6 * scale).then_some(DetectedStep {
                start: 0,
                initial: signal[0],
                target,
            })
        }
        [k] => Some(DetectedStep {
            start: *k,
            initial: signal[*k],
            target: setpoint[*k],
        }),
        _ => None,
    }
}
