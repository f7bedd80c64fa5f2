//! Demand-rate models, competitor and reference-price dynamics, Poisson
//! sampling, and demand-model fitting.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// The six sales regressors: intercept, price rank, price gap, competitor
/// count, average price level, reference-price effect.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressorVector {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    pub k5: f64,
    pub k6: f64,
}

impl RegressorVector {
    pub fn as_array(&self) -> [f64; 6] {
        [self.k1, self.k2, self.k3, self.k4, self.k5, self.k6]
    }
}

/// Own price, competitor price, and reference price for one period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketContext {
    pub own_price: f64,
    pub competitor_price: f64,
    pub reference_price: f64,
}

/// Logistic-Poisson demand: rate = eta * delta * sigmoid(kappa' beta).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogisticDemandParams {
    pub eta: f64,
    pub delta: f64,
    pub beta: [f64; 6],
}

impl LogisticDemandParams {
    pub fn new(eta: f64, delta: f64, beta: [f64; 6]) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::Config(format!("eta must be positive, got {eta}")));
        }
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::Config(format!("delta must lie in (0,1], got {delta}")));
        }
        Ok(Self { eta, delta, beta })
    }

    /// Synthetic default coefficients. Lower price levels increase sales and
    /// the price rank is the dominant feature, so the rank coefficient is
    /// strongly negative and the average-price coefficient negative. These
    /// are configuration values, not calibrated estimates.
    pub fn synthetic_default(eta: f64, delta: f64) -> Self {
        Self {
            eta,
            delta,
            beta: [1.0, -2.0, 0.08, -0.2, -0.05, -0.05],
        }
    }
}

/// Linearized demand: rate = eta * delta * e^a * (1 + l*p), l < 0.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearizedDemandParams {
    pub eta: f64,
    pub delta: f64,
    pub a: f64,
    pub l: f64,
}

impl LinearizedDemandParams {
    /// Builds the parameters, validating `1 + l*p > 0` over the given price
    /// domain.
    pub fn new(eta: f64, delta: f64, a: f64, l: f64, price_domain: (f64, f64)) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::Config(format!("eta must be positive, got {eta}")));
        }
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::Config(format!("delta must lie in (0,1], got {delta}")));
        }
        if !(l < 0.0) {
            return Err(Error::Config(format!("l must be negative, got {l}")));
        }
        let (lo, hi) = price_domain;
        if 1.0 + l * lo <= 0.0 || 1.0 + l * hi <= 0.0 {
            return Err(Error::Config(format!(
                "1 + l*p must stay positive on [{lo}, {hi}]"
            )));
        }
        Ok(Self { eta, delta, a, l })
    }

    /// d(rate)/dp = eta * delta * e^a * l (constant, negative).
    pub fn rate_slope(&self) -> f64 {
        self.eta * self.delta * self.a.exp() * self.l
    }
}

/// Competitor pricing behaviour.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CompetitorStrategy {
    /// Undercut the cheaper of the two current prices by `decrement`,
    /// jumping back to `p_max` once the floor is reached.
    UndercutCycle { decrement: f64, p_min: f64, p_max: f64 },
    /// Uniform draw on `[p_min, p_max]`.
    UniformRandom { p_min: f64, p_max: f64 },
    /// Hold the current price.
    Fixed,
}

impl CompetitorStrategy {
    pub fn validate(&self) -> Result<()> {
        match self {
            CompetitorStrategy::UndercutCycle { decrement, p_min, p_max } => {
                if p_min >= p_max {
                    return Err(Error::Config("p_min must be below p_max".into()));
                }
                if *decrement <= 0.0 {
                    return Err(Error::Config("decrement must be positive".into()));
                }
            }
            CompetitorStrategy::UniformRandom { p_min, p_max } => {
                if p_min >= p_max {
                    return Err(Error::Config("p_min must be below p_max".into()));
                }
            }
            CompetitorStrategy::Fixed => {}
        }
        Ok(())
    }
}

/// Demand model choice for the simulator.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DemandModel {
    Logistic(LogisticDemandParams),
    Linearized(LinearizedDemandParams),
    /// Table-driven rate over own price, linearly interpolated between
    /// knots and clamped at the ends. Competitor and reference prices are
    /// ignored.
    Empirical { knots: Vec<(f64, f64)> },
}

impl DemandModel {
    /// The demand rate at the given market context.
    pub fn rate(&self, ctx: &MarketContext) -> Result<f64> {
        match self {
            DemandModel::Logistic(p) => Ok(demand_rate_logistic(p, ctx)),
            DemandModel::Linearized(p) => lambda_linearized(p, ctx.own_price),
            DemandModel::Empirical { knots } => empirical_rate(knots, ctx.own_price),
        }
    }
}

fn empirical_rate(knots: &[(f64, f64)], p: f64) -> Result<f64> {
    if knots.is_empty() {
        return Err(Error::Config("empirical demand table is empty".into()));
    }
    if p <= knots[0].0 {
        return Ok(knots[0].1);
    }
    for w in knots.windows(2) {
        let (p0, r0) = w[0];
        let (p1, r1) = w[1];
        if p <= p1 {
            let t = (p - p0) / (p1 - p0);
            return Ok(r0 + t * (r1 - r0));
        }
    }
    Ok(knots[knots.len() - 1].1)
}

/// The six regressors evaluated at a market context. Rank ties use exact
/// floating equality, so callers on a discrete price grid get deterministic
/// ties.
pub fn regressors(ctx: &MarketContext) -> RegressorVector {
    let p = ctx.own_price;
    let o = ctx.competitor_price;
    let j = ctx.reference_price;
    let rank = 1.0 + f64::from(o < p) + f64::from(o == p) / 2.0;
    RegressorVector {
        k1: 1.0,
        k2: rank,
        k3: o - p,
        k4: 1.0,
        k5: (p + o) / 2.0,
        k6: p - j,
    }
}

/// Numerically stable sigmoid.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Demand rate eta * delta * sigmoid(kappa' beta); lies in (0, eta*delta).
pub fn demand_rate_logistic(params: &LogisticDemandParams, ctx: &MarketContext) -> f64 {
    let k = regressors(ctx).as_array();
    let logit: f64 = k.iter().zip(params.beta.iter()).map(|(a, b)| a * b).sum();
    params.eta * params.delta * sigmoid(logit)
}

/// Linearized demand rate eta * delta * e^a * (1 + l*p).
pub fn lambda_linearized(params: &LinearizedDemandParams, p: f64) -> Result<f64> {
    let affine = 1.0 + params.l * p;
    if affine <= 0.0 {
        return Err(Error::Domain(format!(
            "1 + l*p = {affine} not positive at p = {p}"
        )));
    }
    Ok(params.eta * params.delta * params.a.exp() * affine)
}

/// One Poisson draw at the given rate.
pub fn sample_demand(rate: f64, rng_: &mut impl Rng) -> u64 {
    rng::poisson(rate, rng_)
}

/// The competitor's next price.
pub fn competitor_next_price(
    strategy: &CompetitorStrategy,
    our_price: f64,
    current: f64,
    rng_: &mut impl Rng,
) -> f64 {
    match strategy {
        CompetitorStrategy::UndercutCycle { decrement, p_min, p_max } => {
            let next = our_price.min(current) - decrement;
            if next < *p_min {
                *p_max
            } else {
                next
            }
        }
        CompetitorStrategy::UniformRandom { p_min, p_max } => rng_.gen_range(*p_min..=*p_max),
        CompetitorStrategy::Fixed => current,
    }
}

/// Exponential smoothing of the average market price:
/// `(1 - s) * j + s * (p + o) / 2`.
pub fn update_reference_price(j: f64, p: f64, o: f64, smoothing: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&smoothing));
    (1.0 - smoothing) * j + smoothing * (p + o) / 2.0
}

/// Demand-curve families fitted by `fit_demand_model`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitKind {
    Linear,
    Exponential,
    IsoElasticity,
    Logit,
}

impl FitKind {
    pub const ALL: [FitKind; 4] = [
        FitKind::Linear,
        FitKind::Exponential,
        FitKind::IsoElasticity,
        FitKind::Logit,
    ];
}

/// A fitted demand curve with its native-scale R-squared.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult {
    pub kind: FitKind,
    /// Linear/exponential/iso-elasticity: `[intercept, slope]` on the
    /// regression scale. Logit: `[scale, intercept, slope]` for
    /// `d = scale * sigmoid(intercept + slope * p)`.
    pub coefficients: Vec<f64>,
    pub r_squared: f64,
    pub n: usize,
}

impl FitResult {
    /// Predicted demand at price `p` on the native response scale.
    pub fn predict(&self, p: f64) -> f64 {
        match self.kind {
            FitKind::Linear => self.coefficients[0] + self.coefficients[1] * p,
            FitKind::Exponential => (self.coefficients[0] + self.coefficients[1] * p).exp(),
            FitKind::IsoElasticity => {
                (self.coefficients[0] + self.coefficients[1] * p.ln()).exp()
            }
            FitKind::Logit => {
                self.coefficients[0] * sigmoid(self.coefficients[1] + self.coefficients[2] * p)
            }
        }
    }
}

fn ols2(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= f64::EPSILON * n * mx.abs().max(1.0) {
        return Err(Error::Singular("all regressor values are equal".into()));
    }
    let slope = sxy / sxx;
    Ok((my - slope * mx, slope))
}

fn native_r2(data: &[(f64, f64)], predict: impl Fn(f64) -> f64) -> f64 {
    let n = data.len() as f64;
    let my = data.iter().map(|&(_, d)| d).sum::<f64>() / n;
    let ss_tot: f64 = data.iter().map(|&(_, d)| (d - my) * (d - my)).sum();
    let ss_res: f64 = data
        .iter()
        .map(|&(p, d)| {
            let e = d - predict(p);
            e * e
        })
        .sum();
    if ss_tot <= 1e-300 {
        0.0
    } else {
        1.0 - ss_res / ss_tot
    }
}

/// Fit one demand-curve family to `(price, demand)` pairs. Linear via OLS
/// on `(p, d)`; exponential via OLS on `(p, ln d)`; iso-elasticity via OLS
/// on `(ln p, ln d)`; logit via golden-section over the scale parameter
/// with an inner OLS on the logit transform. `r_squared` is computed on the
/// native response scale.
pub fn fit_demand_model(kind: FitKind, data: &[(f64, f64)]) -> Result<FitResult> {
    if data.len() < 3 {
        return Err(Error::Config(format!(
            "need at least 3 data points, got {}",
            data.len()
        )));
    }
    let prices: Vec<f64> = data.iter().map(|&(p, _)| p).collect();
    let demands: Vec<f64> = data.iter().map(|&(_, d)| d).collect();
    let needs_log = matches!(
        kind,
        FitKind::Exponential | FitKind::IsoElasticity | FitKind::Logit
    );
    if needs_log && demands.iter().any(|&d| d <= 0.0) {
        return Err(Error::Domain(
            "demands must be strictly positive for log-transform fits".into(),
        ));
    }
    let result = match kind {
        FitKind::Linear => {
            let (b0, b1) = ols2(&prices, &demands)?;
            FitResult {
                kind,
                coefficients: vec![b0, b1],
                r_squared: native_r2(data, |p| b0 + b1 * p),
                n: data.len(),
            }
        }
        FitKind::Exponential => {
            let log_d: Vec<f64> = demands.iter().map(|d| d.ln()).collect();
            let (b0, b1) = ols2(&prices, &log_d)?;
            FitResult {
                kind,
                coefficients: vec![b0, b1],
                r_squared: native_r2(data, |p| (b0 + b1 * p).exp()),
                n: data.len(),
            }
        }
        FitKind::IsoElasticity => {
            if prices.iter().any(|&p| p <= 0.0) {
                return Err(Error::Domain(
                    "prices must be positive for the iso-elasticity fit".into(),
                ));
            }
            let log_p: Vec<f64> = prices.iter().map(|p| p.ln()).collect();
            let log_d: Vec<f64> = demands.iter().map(|d| d.ln()).collect();
            let (b0, b1) = ols2(&log_p, &log_d)?;
            FitResult {
                kind,
                coefficients: vec![b0, b1],
                r_squared: native_r2(data, |p| (b0 + b1 * p.ln()).exp()),
                n: data.len(),
            }
        }
        FitKind::Logit => fit_logit(data, &prices, &demands)?,
    };
    Ok(result)
}

/// d = A * sigmoid(b0 + b1 p). For a fixed scale A the transform
/// logit(d/A) = b0 + b1 p is linear, so A is the single nonlinear
/// parameter, searched by golden section.
fn fit_logit(data: &[(f64, f64)], prices: &[f64], demands: &[f64]) -> Result<FitResult> {
    let d_max = demands.iter().cloned().fold(f64::MIN, f64::max);
    let inner = |scale: f64| -> Result<(f64, f64, f64)> {
        let logits: Vec<f64> = demands
            .iter()
            .map(|&d| {
                let q = (d / scale).clamp(1e-12, 1.0 - 1e-12);
                (q / (1.0 - q)).ln()
            })
            .collect();
        let (b0, b1) = ols2(prices, &logits)?;
        let ss_res: f64 = data
            .iter()
            .map(|&(p, d)| {
                let e = d - scale * sigmoid(b0 + b1 * p);
                e * e
            })
            .sum();
        Ok((b0, b1, ss_res))
    };
    let (mut lo, mut hi) = (d_max * (1.0 + 1e-6), d_max * 20.0);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - phi * (hi - lo);
    let mut b = lo + phi * (hi - lo);
    let mut fa = inner(a)?.2;
    let mut fb = inner(b)?.2;
    for _ in 0..200 {
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - phi * (hi - lo);
            fa = inner(a)?.2;
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + phi * (hi - lo);
            fb = inner(b)?.2;
        }
        if hi - lo < 1e-10 * d_max.max(1.0) {
            break;
        }
    }
    let scale = (lo + hi) / 2.0;
    let (b0, b1, _) = inner(scale)?;
    Ok(FitResult {
        kind: FitKind::Logit,
        coefficients: vec![scale, b0, b1],
        r_squared: native_r2(data, |p| scale * sigmoid(b0 + b1 * p)),
        n: data.len(),
    })
}

/// Read `(price, demand)` pairs from CSV text with header `price,demand`.
pub fn read_pairs_csv(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 0,
        msg: "empty file".into(),
    })?;
    let header = header.trim().to_lowercase();
    if header != "price,demand" {
        return Err(Error::Parse {
            line: 1,
            msg: format!("expected header 'price,demand', got '{header}'"),
        });
    }
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let p = parts
            .next()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .ok_or(Error::Parse {
                line: i + 1,
                msg: "bad price field".into(),
            })?;
        let d = parts
            .next()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .ok_or(Error::Parse {
                line: i + 1,
                msg: "bad demand field".into(),
            })?;
        out.push((p, d));
    }
    Ok(out)
}
