//! Multi-period market and inventory simulator: a finite-horizon MDP (or
//! Markov game, for several products) with lead-time pipelines, lost-sales
//! or backlog accounting, competitor pricing, and reference-price drift.

use serde::{Deserialize, Serialize};

use crate::demand::{
    self, CompetitorStrategy, DemandModel, LogisticDemandParams, MarketContext,
};
use crate::error::{Error, Result};
use crate::rng::Stream;

/// Cost structure: holding `h`, shortage `b`, ordering `c`, fixed ordering
/// `f` (0 to disable), and lead time `z` in periods.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CostParams {
    pub h: f64,
    pub b: f64,
    pub c: f64,
    pub f: f64,
    pub z: usize,
}

impl CostParams {
    pub fn validate(&self) -> Result<()> {
        if self.h < 0.0 || self.b < 0.0 || self.c < 0.0 || self.f < 0.0 {
            return Err(Error::Config("costs must be non-negative".into()));
        }
        Ok(())
    }
}

/// Whether unmet demand is lost or carried as backlog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InventoryMode {
    LostSales,
    Backlog,
}

/// Uniform value grid over `[lo, hi]` with `n` points.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < 1 || lo > hi || (n > 1 && lo == hi) {
            return Err(Error::Config(format!("bad grid [{lo}, {hi}] x {n}")));
        }
        Ok(Self { lo, hi, n })
    }

    pub fn value(&self, i: usize) -> f64 {
        if self.n == 1 {
            self.lo
        } else {
            self.lo + (self.hi - self.lo) * i as f64 / (self.n - 1) as f64
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.value(i)).collect()
    }

    pub fn midpoint(&self) -> f64 {
        (self.lo + self.hi) / 2.0
    }

    pub fn step(&self) -> f64 {
        if self.n <= 1 {
            0.0
        } else {
            (self.hi - self.lo) / (self.n - 1) as f64
        }
    }

    /// Index of the grid point nearest to `v`.
    pub fn nearest(&self, v: f64) -> usize {
        if self.n == 1 {
            return 0;
        }
        let t = (v - self.lo) / self.step();
        (t.round().max(0.0) as usize).min(self.n - 1)
    }
}

/// Scenario definition shared by the simulator, the baselines, and the
/// trainers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub mode: InventoryMode,
    pub fixed_cost: bool,
    pub horizon: usize,
    pub gamma: f64,
    pub price_grid: Grid,
    pub quantity_grid: Grid,
    pub costs: CostParams,
    pub demand: DemandModel,
    pub competitor: CompetitorStrategy,
    /// Initial on-hand inventory.
    pub x0: i64,
    /// Reference-price exponential smoothing weight.
    pub reference_smoothing: f64,
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.horizon < 1 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::Config("gamma must lie in (0,1]".into()));
        }
        if !(0.0..=1.0).contains(&self.reference_smoothing) {
            return Err(Error::Config("smoothing must lie in [0,1]".into()));
        }
        self.costs.validate()?;
        self.competitor.validate()?;
        if self.quantity_grid.lo < 0.0 {
            return Err(Error::Config("quantity grid must be non-negative".into()));
        }
        Ok(())
    }

    /// Upper bound on the per-period demand rate, used for feature scaling.
    pub fn demand_rate_bound(&self) -> f64 {
        match &self.demand {
            DemandModel::Logistic(p) => p.eta * p.delta,
            DemandModel::Linearized(p) => {
                p.eta * p.delta * p.a.exp() * (1.0 + p.l * self.price_grid.lo)
            }
            DemandModel::Empirical { knots } => {
                knots.iter().map(|&(_, r)| r).fold(1.0, f64::max)
            }
        }
    }

    /// Scaling bound for inventory-like features.
    pub fn inventory_bound(&self) -> f64 {
        let q_max = self.quantity_grid.hi;
        (self.x0 as f64 + q_max * (self.costs.z as f64 + 3.0)).max(1.0)
    }

    /// Length of the encoded state vector.
    pub fn state_dim(&self) -> usize {
        7 + self.costs.z
    }
}

/// Full market state observed at the start of a period.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketState {
    /// On-hand inventory; non-negative in lost-sales mode, may be negative
    /// (backlog) in backlog mode.
    pub inventory: i64,
    /// Outstanding orders, oldest first; length is exactly `z`.
    pub pipeline: Vec<u64>,
    pub last_demand: u64,
    pub last_price: f64,
    pub competitor_price: f64,
    pub reference_price: f64,
    pub last_lost: u64,
    pub period: usize,
}

/// Price and quantity chosen for one period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Action {
    pub price: f64,
    pub quantity: u64,
}

/// Everything produced by one simulator step.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub demand: u64,
    pub sales: u64,
    pub lost: u64,
    pub ending_inventory: i64,
    pub reward: f64,
    pub next_state: MarketState,
}

/// Initial state for a scenario: `x0` on hand, empty pipeline, prices at
/// grid midpoints, period 0.
pub fn reset(config: &ScenarioConfig) -> Result<MarketState> {
    config.validate()?;
    let mid = config.price_grid.midpoint();
    Ok(MarketState {
        inventory: config.x0,
        pipeline: vec![0; config.costs.z],
        last_demand: 0,
        last_price: mid,
        competitor_price: mid,
        reference_price: mid,
        last_lost: 0,
        period: 0,
    })
}

/// Advance one period: receive the pipeline head, sample demand at the
/// chosen price, settle sales/lost/backlog, charge costs, and roll the
/// competitor and reference prices forward.
pub fn step(
    config: &ScenarioConfig,
    state: &MarketState,
    action: &Action,
    rng: &mut Stream,
) -> Result<StepOutcome> {
    let ctx = MarketContext {
        own_price: action.price,
        competitor_price: state.competitor_price,
        reference_price: state.reference_price,
    };
    let rate = config.demand.rate(&ctx)?;
    let d = demand::sample_demand(rate, rng);
    step_with_demand(config, state, action, d, rng)
}

/// The deterministic part of `step`, with the demand draw supplied. The DP
/// oracle and tests use this to take exact expectations.
pub fn step_with_demand(
    config: &ScenarioConfig,
    state: &MarketState,
    action: &Action,
    d: u64,
    rng: &mut Stream,
) -> Result<StepOutcome> {
    let q = action.quantity;
    let p = action.price;
    let costs = &config.costs;
    let arriving = if costs.z == 0 {
        q
    } else {
        state.pipeline[0]
    };

    let (ending, sales, lost) = match config.mode {
        InventoryMode::LostSales => {
            let on_hand = state.inventory.max(0) as u64 + arriving;
            let sales = d.min(on_hand);
            let ending = (on_hand - sales) as i64;
            (ending, sales, d - sales)
        }
        InventoryMode::Backlog => {
            // Demand (plus carried backlog) served FIFO against physical
            // stock; unmet units stay owed and are charged b per period.
            let owed = (-state.inventory).max(0) as u64 + d;
            let available = state.inventory.max(0) as u64 + arriving;
            let sales = owed.min(available);
            let ending = state.inventory + arriving as i64 - d as i64;
            let lost = (-ending).max(0) as u64;
            (ending, sales, lost)
        }
    };

    let fixed = if config.fixed_cost && q > 0 { costs.f } else { 0.0 };
    let reward = p * sales as f64
        - costs.h * ending.max(0) as f64
        - costs.b * lost as f64
        - costs.c * q as f64
        - fixed;

    let mut pipeline = state.pipeline.clone();
    if costs.z > 0 {
        pipeline.rotate_left(1);
        *pipeline.last_mut().unwrap() = q;
    }
    let next_competitor =
        demand::competitor_next_price(&config.competitor, p, state.competitor_price, rng);
    let next_reference = demand::update_reference_price(
        state.reference_price,
        p,
        state.competitor_price,
        config.reference_smoothing,
    );

    let next_state = MarketState {
        inventory: ending,
        pipeline,
        last_demand: d,
        last_price: p,
        competitor_price: next_competitor,
        reference_price: next_reference,
        last_lost: lost,
        period: state.period + 1,
    };
    Ok(StepOutcome {
        demand: d,
        sales,
        lost,
        ending_inventory: ending,
        reward,
        next_state,
    })
}

/// Recorded episode with per-step detail and return accounting.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub steps: Vec<(MarketState, Action, StepOutcome)>,
    pub total_reward: f64,
    pub discounted_return: f64,
}

/// Roll a policy for the configured horizon.
pub fn run_episode<F>(config: &ScenarioConfig, mut policy: F, rng: &mut Stream) -> Result<Trajectory>
where
    F: FnMut(&MarketState) -> Action,
{
    let mut state = reset(config)?;
    let mut steps = Vec::with_capacity(config.horizon);
    let mut total = 0.0;
    let mut disc = 0.0;
    let mut gamma_pow = 1.0;
    for _ in 0..config.horizon {
        let action = policy(&state);
        let outcome = step(config, &state, &action, rng)?;
        total += outcome.reward;
        disc += gamma_pow * outcome.reward;
        gamma_pow *= config.gamma;
        let next = outcome.next_state.clone();
        steps.push((state, action, outcome));
        state = next;
    }
    Ok(Trajectory {
        steps,
        total_reward: total,
        discounted_return: disc,
    })
}

/// Fixed-length observation vector
/// `[I, L, d, p, o, j, pipeline (z entries), t/T]`, each feature scaled to
/// `[0,1]` by its configured bound. Note that rescaling bounds changes the
/// numeric features a trained policy sees; policies are only meaningful
/// under the bounds they were trained with.
pub fn encode_state(state: &MarketState, config: &ScenarioConfig) -> Vec<f64> {
    let inv_bound = config.inventory_bound();
    let d_bound = config.demand_rate_bound().max(1.0) * 4.0;
    let p_bound = config.price_grid.hi.max(1e-9);
    let q_bound = config.quantity_grid.hi.max(1.0);
    let mut v = Vec::with_capacity(config.state_dim());
    v.push(state.inventory.max(0) as f64 / inv_bound);
    v.push(state.last_lost as f64 / d_bound);
    v.push(state.last_demand as f64 / d_bound);
    v.push(state.last_price / p_bound);
    v.push(state.competitor_price / p_bound);
    v.push(state.reference_price / p_bound);
    for &q in &state.pipeline {
        v.push(q as f64 / q_bound);
    }
    v.push(state.period as f64 / config.horizon as f64);
    v
}

/// Cross-price demand coupling for the multi-product market: product `i`'s
/// logit is its own-context regression plus `sum_j coeff[i][j] * p_j` over
/// the other products.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrossDemandModel {
    pub base: Vec<LogisticDemandParams>,
    /// `coeff[i][j]` weights product j's price in product i's logit;
    /// diagonal entries are ignored.
    pub coeff: Vec<Vec<f64>>,
}

impl CrossDemandModel {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.base.len() != n || self.coeff.len() != n {
            return Err(Error::Config("cross-demand model size mismatch".into()));
        }
        if self.coeff.iter().any(|row| row.len() != n) {
            return Err(Error::Config("cross-demand coefficient row mismatch".into()));
        }
        Ok(())
    }

    pub fn rate(&self, i: usize, ctxs: &[MarketContext]) -> f64 {
        let params = &self.base[i];
        let k = demand::regressors(&ctxs[i]).as_array();
        let mut logit: f64 = k.iter().zip(params.beta.iter()).map(|(a, b)| a * b).sum();
        for (j, ctx) in ctxs.iter().enumerate() {
            if j != i {
                logit += self.coeff[i][j] * ctx.own_price;
            }
        }
        params.eta * params.delta * demand::sigmoid(logit)
    }
}

/// One joint step of the multi-product Markov game. Each product follows
/// the single-product dynamics; demand rates couple through prices; the
/// joint reward is the sum of per-product sales profits.
pub fn multi_product_step(
    configs: &[ScenarioConfig],
    states: &[MarketState],
    actions: &[Action],
    cross: &CrossDemandModel,
    rng: &mut Stream,
) -> Result<(Vec<StepOutcome>, f64)> {
    let n = states.len();
    if configs.len() != n || actions.len() != n {
        return Err(Error::Config("product count mismatch".into()));
    }
    cross.validate(n)?;
    let ctxs: Vec<MarketContext> = (0..n)
        .map(|i| MarketContext {
            own_price: actions[i].price,
            competitor_price: states[i].competitor_price,
            reference_price: states[i].reference_price,
        })
        .collect();
    let mut outcomes = Vec::with_capacity(n);
    let mut joint = 0.0;
    for i in 0..n {
        let rate = cross.rate(i, &ctxs);
        let d = demand::sample_demand(rate, rng);
        let out = step_with_demand(&configs[i], &states[i], &actions[i], d, rng)?;
        joint += out.reward;
        outcomes.push(out);
    }
    Ok((outcomes, joint))
}

/// Serialize a trajectory as CSV with columns
/// `t,price,qty,demand,sales,lost,inventory,reward`.
pub fn trajectory_to_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,price,qty,demand,sales,lost,inventory,reward\n");
    for (state, action, outcome) in &traj.steps {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            state.period,
            action.price,
            action.quantity,
            outcome.demand,
            outcome.sales,
            outcome.lost,
            outcome.ending_inventory,
            outcome.reward
        ));
    }
    out
}
