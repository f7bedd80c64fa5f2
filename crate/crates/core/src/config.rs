//! Experiment configuration: one TOML or JSON file drives every command.
//! Named presets pin the parameter sets used throughout the experiments.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analytic::{single_period_default, SinglePeriodParams};
use crate::baselines::{BSLPParams, MyopicParams, SSPParams, SearchConfig};
use crate::demand::{CompetitorStrategy, DemandModel, LinearizedDemandParams, LogisticDemandParams};
use crate::dp::DPInstance;
use crate::error::{Error, Result};
use crate::fsda::FSDAConfig;
use crate::market::{CostParams, Grid, InventoryMode, ScenarioConfig};
use crate::sa::SAConfig;

/// Offset separating held-out evaluation seeds from training/search
/// seeds; the two ranges never collide for seed lists below the offset.
pub const HELD_OUT_SEED_OFFSET: u64 = 1_000_000;

/// A concrete policy usable by `simulate` and `benchmark`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PolicySpec {
    /// Uniform random draws over both grids.
    Random,
    /// Constant action.
    Fixed { price: f64, quantity: u64 },
    Bslp(BSLPParams),
    Ssp(SSPParams),
    Myopic(MyopicParams),
}

impl PolicySpec {
    pub fn name(&self) -> String {
        match self {
            PolicySpec::Random => "random".into(),
            PolicySpec::Fixed { price, quantity } => format!("fixed-p{price}-q{quantity}"),
            PolicySpec::Bslp(_) => "bslp".into(),
            PolicySpec::Ssp(_) => "ssp".into(),
            PolicySpec::Myopic(_) => "myopic".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub single_period: Option<SinglePeriodParams>,
    #[serde(default)]
    pub sa: Option<SAConfig>,
    #[serde(default)]
    pub fsda: Option<FSDAConfig>,
    #[serde(default)]
    pub search: Option<SearchConfig>,
    #[serde(default)]
    pub dp: Option<DPInstance>,
    #[serde(default)]
    pub policies: Vec<PolicySpec>,
    pub seeds: Vec<u64>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Config("seed list must be non-empty".into()));
        }
        self.scenario.validate()?;
        if let Some(sp) = &self.single_period {
            sp.validate()?;
        }
        if let Some(sa) = &self.sa {
            sa.validate()?;
        }
        if let Some(f) = &self.fsda {
            f.validate()?;
        }
        if let Some(dp) = &self.dp {
            dp.validate()?;
        }
        Ok(())
    }

    /// Evaluation seeds disjoint from the configured seed list.
    pub fn held_out_seeds(&self) -> Vec<u64> {
        self.seeds.iter().map(|s| s + HELD_OUT_SEED_OFFSET).collect()
    }

    /// Override the root of every seed in the config.
    pub fn reseed(&mut self, root: u64) {
        self.seeds = (0..self.seeds.len() as u64).map(|i| root + i).collect();
        self.scenario.seed = root;
        if let Some(sa) = self.sa.as_mut() {
            sa.seed = root;
        }
        if let Some(f) = self.fsda.as_mut() {
            f.seed = root;
        }
        if let Some(s) = self.search.as_mut() {
            s.seed = root;
        }
    }
}

/// Parse a TOML (`.toml`) or JSON (anything else) experiment file.
pub fn load(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    let config: ExperimentConfig = if path.extension().and_then(|e| e.to_str()) == Some("toml") {
        toml::from_str(&text).map_err(|e| Error::Parse {
            line: e.span().map(|s| text[..s.start].lines().count()).unwrap_or(0),
            msg: e.message().to_string(),
        })?
    } else {
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            line: e.line(),
            msg: e.to_string(),
        })?
    };
    config.validate()?;
    Ok(config)
}

/// Canonical serialized form (TOML), used for round-trip checks.
pub fn to_toml(config: &ExperimentConfig) -> Result<String> {
    toml::to_string_pretty(config).map_err(|e| Error::Config(format!("serialize: {e}")))
}

fn appendix_c_scenario() -> ScenarioConfig {
    ScenarioConfig {
        mode: InventoryMode::LostSales,
        fixed_cost: false,
        horizon: 1,
        gamma: 1.0,
        price_grid: Grid::new(0.0, 80.0, 33).unwrap(),
        quantity_grid: Grid::new(0.0, 20.0, 21).unwrap(),
        costs: CostParams { h: 4.0, b: 10.0, c: 5.0, f: 0.0, z: 0 },
        demand: DemandModel::Linearized(LinearizedDemandParams {
            eta: 800.0,
            delta: 0.5,
            a: -4.0,
            l: -0.01,
        }),
        competitor: CompetitorStrategy::Fixed,
        x0: 0,
        reference_smoothing: 0.5,
        seed: 0,
    }
}

fn benchmark_scenario(mode: InventoryMode, fixed_cost: bool) -> ScenarioConfig {
    ScenarioConfig {
        mode,
        fixed_cost,
        horizon: 20,
        gamma: 0.99,
        price_grid: Grid::new(5.0, 45.0, 9).unwrap(),
        quantity_grid: Grid::new(0.0, 12.0, 7).unwrap(),
        costs: CostParams { h: 1.0, b: 4.0, c: 6.0, f: if fixed_cost { 10.0 } else { 0.0 }, z: 3 },
        demand: DemandModel::Logistic(LogisticDemandParams::synthetic_default(16.0, 0.5)),
        competitor: CompetitorStrategy::UndercutCycle { decrement: 2.0, p_min: 10.0, p_max: 40.0 },
        x0: 4,
        reference_smoothing: 0.3,
        seed: 0,
    }
}

fn tiny_dp_instance() -> DPInstance {
    DPInstance {
        horizon: 2,
        price_grid: vec![10.0, 20.0, 30.0],
        quantity_grid: vec![0, 1, 2],
        costs: CostParams { h: 1.0, b: 2.0, c: 5.0, f: 0.0, z: 0 },
        gamma: 1.0,
        x0: 0,
        demand: LinearizedDemandParams { eta: 4.0, delta: 0.5, a: 0.0, l: -0.025 },
        tail_tol: 1e-12,
        fixed_support: Some(8),
        budget: 100_000_000,
    }
}

/// Named presets: `appendix-c`, `scenario-a` … `scenario-d`, `tiny-dp`.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let seeds: Vec<u64> = (1..=20).collect();
    let config = match name {
        "appendix-c" => {
            let sp = single_period_default();
            ExperimentConfig {
                scenario: appendix_c_scenario(),
                sa: Some(SAConfig::default_for(&sp, 1)),
                single_period: Some(sp),
                fsda: None,
                search: Some(SearchConfig::defaults(1)),
                dp: Some(DPInstance {
                    horizon: 1,
                    price_grid: Grid::new(0.0, 80.0, 33).unwrap().values(),
                    quantity_grid: (0..=20).collect(),
                    costs: CostParams { h: 4.0, b: 10.0, c: 5.0, f: 0.0, z: 0 },
                    gamma: 1.0,
                    x0: 0,
                    demand: LinearizedDemandParams { eta: 800.0, delta: 0.5, a: -4.0, l: -0.01 },
                    tail_tol: 1e-12,
                    fixed_support: None,
                    budget: 100_000_000,
                }),
                policies: vec![PolicySpec::Random, PolicySpec::Fixed { price: 55.0, quantity: 5 }],
                seeds,
            }
        }
        "scenario-a" | "scenario-b" | "scenario-c" | "scenario-d" => {
            let (mode, fixed) = match name {
                "scenario-a" => (InventoryMode::LostSales, false),
                "scenario-b" => (InventoryMode::LostSales, true),
                "scenario-c" => (InventoryMode::Backlog, false),
                _ => (InventoryMode::Backlog, true),
            };
            let scenario = benchmark_scenario(mode, fixed);
            ExperimentConfig {
                scenario,
                single_period: None,
                sa: None,
                fsda: Some(FSDAConfig::defaults(1)),
                search: Some(SearchConfig::defaults(1)),
                dp: None,
                policies: vec![
                    PolicySpec::Random,
                    PolicySpec::Bslp(BSLPParams { base_stock: 6, list_price: 25.0, markdown_rate: 1.0 }),
                    PolicySpec::Ssp(SSPParams { s: 3, cap_s: 9, price_intercept: 30.0, price_slope: 1.0 }),
                    PolicySpec::Myopic(MyopicParams {
                        base_stock: 6,
                        pipeline_weight: 0.5,
                        price_intercept: 30.0,
                        price_slope: -1.0,
                    }),
                ],
                seeds,
            }
        }
        "tiny-dp" => ExperimentConfig {
            scenario: appendix_c_scenario(),
            single_period: Some(single_period_default()),
            sa: None,
            fsda: None,
            search: None,
            dp: Some(tiny_dp_instance()),
            policies: vec![],
            seeds,
        },
        other => {
            return Err(Error::Config(format!(
                "unknown preset '{other}' (expected appendix-c, scenario-a..d, tiny-dp)"
            )))
        }
    };
    config.validate()?;
    Ok(config)
}
