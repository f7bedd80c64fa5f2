//! Two-timescale stochastic approximation for the single-period joint
//! price/stock problem: likelihood-ratio price gradients, pathwise stock
//! gradients, projected iterates, and tracking diagnostics.

use serde::{Deserialize, Serialize};

use crate::analytic::{optimal_price_given_x, SinglePeriodParams};
use crate::error::{Error, Result};
use crate::rng;

/// Power step-size family `scale / (k + offset)^exponent`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StepSchedule {
    pub scale: f64,
    pub offset: f64,
    pub exponent: f64,
}

impl StepSchedule {
    pub fn at(&self, k: usize) -> f64 {
        self.scale / (k as f64 + self.offset).powf(self.exponent)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SAConfig {
    /// Fast (price) steps; must decay strictly slower than `slow`.
    pub fast: StepSchedule,
    /// Slow (stock) steps.
    pub slow: StepSchedule,
    pub iterations: usize,
    /// Independent demand draws averaged into each gradient estimate.
    pub samples_per_step: usize,
    pub p0: f64,
    pub x0: f64,
    pub seed: u64,
    /// Iterates are recorded every this many iterations (and at the end).
    pub record_every: usize,
}

impl SAConfig {
    /// Steps 2/(k+10)^0.6 and 1/(k+10)^0.9, started mid-domain.
    pub fn default_for(params: &SinglePeriodParams, seed: u64) -> SAConfig {
        SAConfig {
            fast: StepSchedule { scale: 2.0, offset: 10.0, exponent: 0.6 },
            slow: StepSchedule { scale: 1.0, offset: 10.0, exponent: 0.9 },
            iterations: 200_000,
            samples_per_step: 1,
            p0: (params.price_domain.0 + params.price_domain.1) / 2.0,
            x0: (params.stock_domain.0 + params.stock_domain.1) / 2.0,
            seed,
            record_every: 100,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, s) in [("fast", &self.fast), ("slow", &self.slow)] {
            if !(s.scale > 0.0) || !(s.offset > 0.0) {
                return Err(Error::Config(format!("{name} schedule needs positive scale and offset")));
            }
        }
        let (u, v) = (self.fast.exponent, self.slow.exponent);
        if !(0.5 < u && u < v && v <= 1.0) {
            return Err(Error::Config(format!(
                "step exponents must satisfy 0.5 < u < v <= 1, got u={u}, v={v}"
            )));
        }
        if self.iterations == 0 || self.samples_per_step == 0 || self.record_every == 0 {
            return Err(Error::Config("iterations, samples_per_step and record_every must be positive".into()));
        }
        Ok(())
    }
}

/// Recorded iterates plus the tracking error `p_k - p*(x_k)`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SATrace {
    pub k: Vec<usize>,
    pub p: Vec<f64>,
    pub x: Vec<f64>,
    pub g_hat: Vec<f64>,
    pub h_hat: Vec<f64>,
    pub tracking: Vec<f64>,
}

impl SATrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,p,x,g_hat,h_hat,tracking\n");
        for i in 0..self.k.len() {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                self.k[i], self.p[i], self.x[i], self.g_hat[i], self.h_hat[i], self.tracking[i]
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SAResult {
    pub p: f64,
    pub x: f64,
    /// Rounded reporting value for the continuous stock iterate.
    pub x_rounded: i64,
    pub trace: SATrace,
}

fn realized_profit(params: &SinglePeriodParams, p: f64, x: f64, d: f64) -> f64 {
    let c = &params.costs;
    p * d.min(x) - (c.h + c.b) * (x - d).max(0.0) - c.b * d + c.b * x
        - c.c * (x - params.x0 as f64)
}

/// Single-draw likelihood-ratio estimate of dF/dp:
/// the pathwise term `min(d, x)` plus the score term
/// `profit_sample * (d/lambda - 1) * lambda'`.
pub fn estimate_grad_p(params: &SinglePeriodParams, p: f64, x: f64, d: f64) -> f64 {
    let lambda = params.lambda(p);
    let score = (d / lambda - 1.0) * params.lambda_slope();
    d.min(x) + realized_profit(params, p, x, d) * score
}

/// Single-draw pathwise estimate of the right derivative dF/dx:
/// `b - c + p - (h + b + p) * 1{d <= x}`.
pub fn estimate_grad_x(params: &SinglePeriodParams, p: f64, x: f64, d: f64) -> f64 {
    let c = &params.costs;
    c.b - c.c + p - (c.h + c.b + p) * if d <= x.floor() { 1.0 } else { 0.0 }
}

fn clamp(v: f64, lo: f64, hi: f64) -> f64 {
    v.max(lo).min(hi)
}

/// Run the coupled recursion: price on the fast timescale, stock on the
/// slow one, both gradient estimates built from the same demand draws.
pub fn run_two_timescale(params: &SinglePeriodParams, config: &SAConfig) -> Result<SAResult> {
    params.validate()?;
    config.validate()?;
    let mut rng = rng::stream(config.seed, "sa-two-timescale");
    let (p_lo, p_hi) = params.price_domain;
    let (x_lo, x_hi) = params.stock_domain;
    let mut p = clamp(config.p0, p_lo, p_hi);
    let mut x = clamp(config.x0, x_lo, x_hi);
    let mut trace = SATrace::default();
    let record = |k: usize, p: f64, x: f64, g: f64, h: f64, trace: &mut SATrace| {
        trace.k.push(k);
        trace.p.push(p);
        trace.x.push(x);
        trace.g_hat.push(g);
        trace.h_hat.push(h);
        trace.tracking.push(p - optimal_price_given_x(params, x));
    };
    for k in 0..config.iterations {
        let lambda = params.lambda(p);
        let (mut g, mut h) = (0.0, 0.0);
        for _ in 0..config.samples_per_step {
            let d = rng::poisson(lambda, &mut rng) as f64;
            g += estimate_grad_p(params, p, x, d);
            h += estimate_grad_x(params, p, x, d);
        }
        g /= config.samples_per_step as f64;
        h /= config.samples_per_step as f64;
        if !g.is_finite() || !h.is_finite() {
            return Err(Error::Numeric(format!("non-finite gradient estimate at iteration {k}")));
        }
        if k % config.record_every == 0 {
            record(k, p, x, g, h, &mut trace);
        }
        p = clamp(p + config.fast.at(k) * g, p_lo, p_hi);
        x = clamp(x + config.slow.at(k) * h, x_lo, x_hi);
    }
    let lambda = params.lambda(p);
    let d = rng::poisson(lambda, &mut rng) as f64;
    record(
        config.iterations,
        p,
        x,
        estimate_grad_p(params, p, x, d),
        estimate_grad_x(params, p, x, d),
        &mut trace,
    );
    Ok(SAResult { p, x, x_rounded: x.round() as i64, trace })
}

/// Summary statistics of the recorded tracking error over the last
/// `tail_fraction` of the trace.
pub fn tracking_diagnostics(trace: &SATrace, tail_fraction: f64) -> (f64, f64) {
    let n = trace.tracking.len();
    let start = ((1.0 - tail_fraction.clamp(0.0, 1.0)) * n as f64) as usize;
    let tail = &trace.tracking[start.min(n.saturating_sub(1))..];
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    let max_abs = tail.iter().fold(0.0f64, |m, &t| m.max(t.abs()));
    (mean, max_abs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{grad_p, grad_x, single_period_default};
    use approx::assert_relative_eq;

    #[test]
    fn schedule_defaults_validate_and_decay() {
        let params = single_period_default();
        let cfg = SAConfig::default_for(&params, 1);
        cfg.validate().unwrap();
        assert!(cfg.fast.at(10) > cfg.fast.at(1000));
        assert!(cfg.slow.at(100) / cfg.fast.at(100) > cfg.slow.at(10_000) / cfg.fast.at(10_000));
    }

    #[test]
    fn bad_exponents_rejected() {
        let params = single_period_default();
        let mut cfg = SAConfig::default_for(&params, 1);
        cfg.fast.exponent = 0.4;
        assert!(cfg.validate().is_err());
        cfg.fast.exponent = 0.95;
        assert!(cfg.validate().is_err()); // u >= v
        cfg.fast.exponent = 0.6;
        cfg.slow.exponent = 1.1;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn grad_p_estimator_is_unbiased() {
        let params = single_period_default();
        let (p, x) = (40.0, 7.0);
        let lambda = params.lambda(p);
        let mut rng = crate::rng::stream(11, "sa-unbiased-p");
        let n = 400_000usize;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let d = crate::rng::poisson(lambda, &mut rng) as f64;
            let g = estimate_grad_p(&params, p, x, d);
            s += g;
            s2 += g * g;
        }
        let mean = s / n as f64;
        let se = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
        let truth = grad_p(&params, p, x);
        assert!(
            (mean - truth).abs() < 4.0 * se,
            "mean {mean} vs {truth} (se {se})"
        );
    }

    #[test]
    fn grad_x_estimator_is_exact_in_expectation() {
        let params = single_period_default();
        let (p, x) = (55.0, 5.0);
        let lambda = params.lambda(p);
        // expectation reduces to the CDF, computable by direct sum
        let table = crate::analytic::poisson_pmf_table(lambda);
        let mut expect = 0.0;
        for (k, &pk) in table.iter().enumerate() {
            expect += pk * estimate_grad_x(&params, p, x, k as f64);
        }
        assert_relative_eq!(expect, grad_x(&params, p, x), epsilon = 1e-9);
    }

    #[test]
    fn run_is_deterministic_per_seed() {
        let params = single_period_default();
        let mut cfg = SAConfig::default_for(&params, 42);
        cfg.iterations = 2000;
        let a = run_two_timescale(&params, &cfg).unwrap();
        let b = run_two_timescale(&params, &cfg).unwrap();
        assert_eq!(a.p, b.p);
        assert_eq!(a.x, b.x);
        assert_eq!(a.trace.p, b.trace.p);
        cfg.seed = 43;
        let c = run_two_timescale(&params, &cfg).unwrap();
        assert_ne!(a.p, c.p);
    }

    #[test]
    fn iterates_stay_in_domain() {
        let params = single_period_default();
        let mut cfg = SAConfig::default_for(&params, 5);
        cfg.iterations = 5000;
        cfg.fast.scale = 50.0; // aggressive steps stress the projection
        let r = run_two_timescale(&params, &cfg).unwrap();
        for (&p, &x) in r.trace.p.iter().zip(&r.trace.x) {
            assert!((0.0..=80.0).contains(&p));
            assert!((0.0..=20.0).contains(&x));
        }
    }

    #[test]
    fn converges_near_the_known_optimum() {
        let params = single_period_default();
        let mut cfg = SAConfig::default_for(&params, 3);
        cfg.iterations = 60_000;
        let r = run_two_timescale(&params, &cfg).unwrap();
        assert!((r.p - 55.0).abs() < 5.0, "p = {}", r.p);
        assert_eq!(r.x_rounded, 5, "x = {}", r.x);
    }

    #[test]
    fn tracking_error_shrinks() {
        let params = single_period_default();
        let mut cfg = SAConfig::default_for(&params, 9);
        cfg.iterations = 40_000;
        let r = run_two_timescale(&params, &cfg).unwrap();
        let n = r.trace.tracking.len();
        let head: f64 =
            r.trace.tracking[..n / 4].iter().map(|t| t.abs()).sum::<f64>() / (n / 4) as f64;
        let tail: f64 = r.trace.tracking[3 * n / 4..].iter().map(|t| t.abs()).sum::<f64>()
            / (n - 3 * n / 4) as f64;
        assert!(tail < head.max(1.0), "tail {tail} vs head {head}");
        let (_, tail_max) = tracking_diagnostics(&r.trace, 0.25);
        assert!(tail_max < 6.0, "tracking error stayed large: {tail_max}");
    }

    #[test]
    fn trace_csv_shape() {
        let params = single_period_default();
        let mut cfg = SAConfig::default_for(&params, 1);
        cfg.iterations = 500;
        cfg.record_every = 100;
        let r = run_two_timescale(&params, &cfg).unwrap();
        let csv = r.trace.to_csv();
        let lines: Vec<&str> = csv.trim_end().lines().collect();
        assert_eq!(lines[0], "k,p,x,g_hat,h_hat,tracking");
        assert_eq!(lines.len(), 1 + r.trace.k.len());
        assert_eq!(*r.trace.k.last().unwrap(), 500);
    }
}
