//! Exact finite-horizon oracle: backward induction over discretized
//! price/quantity grids for tiny lost-sales instances, plus a naive
//! (memoization-free) recursion whose visit count reproduces the
//! Σ_t (PQD)^t cost model.

use serde::{Deserialize, Serialize};

use crate::demand::LinearizedDemandParams;
use crate::error::{Error, Result};
use crate::market::CostParams;

/// A fully discretized finite-horizon instance. States are on-hand
/// inventory crossed with pipeline contents (orders still in transit).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DPInstance {
    pub horizon: usize,
    pub price_grid: Vec<f64>,
    pub quantity_grid: Vec<u64>,
    pub costs: CostParams,
    pub gamma: f64,
    pub x0: i64,
    pub demand: LinearizedDemandParams,
    /// Demand tail mass dropped when truncating the Poisson support.
    pub tail_tol: f64,
    /// When set, every price uses exactly this many demand support points.
    pub fixed_support: Option<usize>,
    /// Maximum number of value updates backward induction may perform.
    pub budget: u64,
}

impl DPInstance {
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 || self.price_grid.is_empty() || self.quantity_grid.is_empty() {
            return Err(Error::Config("horizon and grids must be non-empty".into()));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::Config("gamma must lie in [0, 1]".into()));
        }
        if self.x0 < 0 {
            return Err(Error::Config("initial stock must be non-negative".into()));
        }
        self.costs.validate()?;
        if self.costs.z > 2 {
            return Err(Error::Size(format!(
                "pipeline enumeration is limited to z <= 2, got z = {}",
                self.costs.z
            )));
        }
        if self.costs.z > 0 {
            if self.quantity_grid.len() > 5 {
                return Err(Error::Size(
                    "with z > 0 the quantity grid is limited to 5 values".into(),
                ));
            }
            if !self.quantity_grid.contains(&0) {
                return Err(Error::Config(
                    "with z > 0 the quantity grid must contain 0 (empty pipeline slots)".into(),
                ));
            }
        }
        if !(self.tail_tol > 0.0 && self.tail_tol < 1.0) {
            return Err(Error::Config("tail_tol must lie in (0, 1)".into()));
        }
        let (lo, hi) = price_range(&self.price_grid);
        LinearizedDemandParams::new(self.demand.eta, self.demand.delta, self.demand.a, self.demand.l, (lo, hi))?;
        Ok(())
    }

    pub fn lambda(&self, p: f64) -> f64 {
        self.demand.eta * self.demand.delta * self.demand.a.exp() * (1.0 + self.demand.l * p)
    }

    /// Truncated, renormalized demand pmf for each price-grid value.
    pub fn demand_pmfs(&self) -> Vec<Vec<f64>> {
        self.price_grid
            .iter()
            .map(|&p| {
                let lambda = self.lambda(p);
                let mut pmf = if let Some(n) = self.fixed_support {
                    let mut v = vec![0.0; n.max(1)];
                    let mut pk = (-lambda).exp();
                    v[0] = pk;
                    for (k, slot) in v.iter_mut().enumerate().skip(1) {
                        pk *= lambda / k as f64;
                        *slot = pk;
                    }
                    v
                } else {
                    let mut v = vec![(-lambda).exp()];
                    let mut cum = v[0];
                    let mut k = 0u64;
                    while 1.0 - cum > self.tail_tol || (k as f64) < lambda {
                        k += 1;
                        let next = v[k as usize - 1] * lambda / k as f64;
                        v.push(next);
                        cum += next;
                    }
                    v
                };
                let total: f64 = pmf.iter().sum();
                for q in pmf.iter_mut() {
                    *q /= total;
                }
                pmf
            })
            .collect()
    }

    fn q_max(&self) -> u64 {
        *self.quantity_grid.iter().max().unwrap()
    }

    /// Largest on-hand level reachable within the horizon.
    pub fn inventory_cap(&self) -> i64 {
        self.x0 + (self.horizon as u64 * self.q_max()) as i64
    }

    /// Number of enumerated states.
    pub fn state_count(&self) -> usize {
        let levels = (self.inventory_cap() + 1) as usize;
        levels * self.quantity_grid.len().pow(self.costs.z as u32)
    }

    /// Planned value updates for backward induction: T * S * P * Q * D.
    pub fn update_count(&self) -> u128 {
        let d_max = self.demand_pmfs().iter().map(Vec::len).max().unwrap_or(0);
        self.horizon as u128
            * self.state_count() as u128
            * self.price_grid.len() as u128
            * self.quantity_grid.len() as u128
            * d_max as u128
    }
}

fn price_range(grid: &[f64]) -> (f64, f64) {
    let lo = grid.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = grid.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (lo.min(hi - 1e-9), hi)
}

/// Naive-recursion cost of solving the instance without memoization:
/// Σ_{t=1}^{T} (P·Q·D)^t branch expansions.
pub fn naive_cost(p: usize, q: usize, d: usize, horizon: usize) -> f64 {
    let pqd = (p * q * d) as f64;
    (1..=horizon).map(|t| pqd.powi(t as i32)).sum()
}

/// State index; pipeline entries are quantity-grid indices, oldest first.
fn state_index(instance: &DPInstance, inv: i64, pipeline: &[usize]) -> usize {
    let q_n = instance.quantity_grid.len();
    let mut idx = inv as usize;
    for &slot in pipeline {
        idx = idx * q_n + slot;
    }
    idx
}

fn decode_state(instance: &DPInstance, mut idx: usize) -> (i64, Vec<usize>) {
    let q_n = instance.quantity_grid.len();
    let z = instance.costs.z;
    let mut pipeline = vec![0usize; z];
    for slot in pipeline.iter_mut().rev() {
        *slot = idx % q_n;
        idx /= q_n;
    }
    (idx as i64, pipeline)
}

/// One-step lost-sales transition: immediate reward and successor state.
fn transition(
    instance: &DPInstance,
    inv: i64,
    pipeline: &[usize],
    p: f64,
    q_idx: usize,
    d: u64,
) -> (f64, i64, Vec<usize>) {
    let c = &instance.costs;
    let q = instance.quantity_grid[q_idx];
    let arriving = if c.z == 0 { q } else { instance.quantity_grid[pipeline[0]] };
    let on_hand = inv + arriving as i64;
    let sales = (d as i64).min(on_hand);
    let lost = d as i64 - sales;
    // The cap only binds for states unreachable from the start state
    // (reachable inventory at period t is at most x0 + t * q_max).
    let next_inv = (on_hand - sales).min(instance.inventory_cap());
    let mut reward = p * sales as f64 - c.h * next_inv as f64 - c.b * lost as f64
        - c.c * q as f64;
    if q > 0 {
        reward -= c.f;
    }
    let mut next_pipe = Vec::with_capacity(c.z);
    if c.z > 0 {
        next_pipe.extend_from_slice(&pipeline[1..]);
        next_pipe.push(q_idx);
    }
    (reward, next_inv, next_pipe)
}

/// Value and greedy-policy tables, indexed `[t][state]`. `t` runs from 0
/// (first period) to `horizon - 1`; the terminal value is identically 0.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DPSolution {
    pub value: Vec<Vec<f64>>,
    /// (price index, quantity index) argmax, lowest indices on ties.
    pub policy: Vec<Vec<(usize, usize)>>,
    /// Value updates actually performed.
    pub updates: u128,
}

impl DPSolution {
    /// Optimal value from the conventional start state
    /// (on-hand = x0, empty pipeline).
    pub fn start_value(&self, instance: &DPInstance) -> f64 {
        let zero_slot = if instance.costs.z > 0 {
            instance.quantity_grid.iter().position(|&q| q == 0).unwrap()
        } else {
            0
        };
        let pipeline = vec![zero_slot; instance.costs.z];
        self.value[0][state_index(instance, instance.x0, &pipeline)]
    }
}

/// Solve the Bellman recursion backward from the zero terminal value.
pub fn backward_induction(instance: &DPInstance) -> Result<DPSolution> {
    instance.validate()?;
    let planned = instance.update_count();
    if planned > instance.budget as u128 {
        return Err(Error::Size(format!(
            "instance needs {planned} value updates, budget {} (naive recursion would need {:.3e})",
            instance.budget,
            naive_cost(
                instance.price_grid.len(),
                instance.quantity_grid.len(),
                instance.demand_pmfs().iter().map(Vec::len).max().unwrap_or(0),
                instance.horizon
            )
        )));
    }
    let pmfs = instance.demand_pmfs();
    let n_states = instance.state_count();
    let t_max = instance.horizon;
    let mut value = vec![vec![0.0; n_states]; t_max + 1];
    let mut policy = vec![vec![(0usize, 0usize); n_states]; t_max];
    let mut updates: u128 = 0;
    for t in (0..t_max).rev() {
        for s in 0..n_states {
            let (inv, pipeline) = decode_state(instance, s);
            let mut best = f64::NEG_INFINITY;
            let mut best_action = (0usize, 0usize);
            for (pi, &p) in instance.price_grid.iter().enumerate() {
                for qi in 0..instance.quantity_grid.len() {
                    let mut expect = 0.0;
                    for (d, &w) in pmfs[pi].iter().enumerate() {
                        let (r, next_inv, next_pipe) =
                            transition(instance, inv, &pipeline, p, qi, d as u64);
                        let v_next = value[t + 1][state_index(instance, next_inv, &next_pipe)];
                        expect += w * (r + instance.gamma * v_next);
                        updates += 1;
                    }
                    if expect > best {
                        best = expect;
                        best_action = (pi, qi);
                    }
                }
            }
            value[t][s] = best;
            policy[t][s] = best_action;
        }
    }
    value.truncate(t_max);
    Ok(DPSolution { value, policy, updates })
}

/// Exact expected discounted value of an arbitrary policy table from the
/// conventional start state, by backward recursion under that policy.
pub fn evaluate_policy(instance: &DPInstance, policy: &[Vec<(usize, usize)>]) -> Result<f64> {
    instance.validate()?;
    let n_states = instance.state_count();
    if policy.len() != instance.horizon || policy.iter().any(|row| row.len() != n_states) {
        return Err(Error::Shape("policy table must cover every period and state".into()));
    }
    let pmfs = instance.demand_pmfs();
    let mut next = vec![0.0; n_states];
    for t in (0..instance.horizon).rev() {
        let mut cur = vec![0.0; n_states];
        for (s, slot) in cur.iter_mut().enumerate() {
            let (inv, pipeline) = decode_state(instance, s);
            let (pi, qi) = policy[t][s];
            let p = instance.price_grid[pi];
            let mut expect = 0.0;
            for (d, &w) in pmfs[pi].iter().enumerate() {
                let (r, next_inv, next_pipe) =
                    transition(instance, inv, &pipeline, p, qi, d as u64);
                expect += w * (r + instance.gamma * next[state_index(instance, next_inv, &next_pipe)]);
            }
            *slot = expect;
        }
        next = cur;
    }
    let zero_slot = if instance.costs.z > 0 {
        instance.quantity_grid.iter().position(|&q| q == 0).unwrap()
    } else {
        0
    };
    let pipeline = vec![zero_slot; instance.costs.z];
    Ok(next[state_index(instance, instance.x0, &pipeline)])
}

/// Naive depth-first recursion with no memoization; returns the start
/// value and the number of (price, quantity, demand) branch expansions,
/// which equals Σ_t (PQD)^t when the support size D is uniform.
pub fn naive_recursion_value(instance: &DPInstance) -> Result<(f64, u128)> {
    instance.validate()?;
    let pmfs = instance.demand_pmfs();
    let d_sizes: Vec<usize> = pmfs.iter().map(Vec::len).collect();
    let uniform = d_sizes.windows(2).all(|w| w[0] == w[1]);
    if !uniform {
        return Err(Error::Config(
            "naive cost accounting requires a uniform demand support; set fixed_support".into(),
        ));
    }
    let worst = naive_cost(
        instance.price_grid.len(),
        instance.quantity_grid.len(),
        d_sizes[0],
        instance.horizon,
    );
    if worst > instance.budget as f64 {
        return Err(Error::Size(format!(
            "naive recursion needs {worst:.3e} expansions, budget {}",
            instance.budget
        )));
    }
    let mut count: u128 = 0;
    fn recurse(
        instance: &DPInstance,
        pmfs: &[Vec<f64>],
        inv: i64,
        pipeline: &[usize],
        t: usize,
        count: &mut u128,
    ) -> f64 {
        if t == instance.horizon {
            return 0.0;
        }
        let mut best = f64::NEG_INFINITY;
        for (pi, &p) in instance.price_grid.iter().enumerate() {
            for qi in 0..instance.quantity_grid.len() {
                let mut expect = 0.0;
                for (d, &w) in pmfs[pi].iter().enumerate() {
                    *count += 1;
                    let (r, next_inv, next_pipe) =
                        transition(instance, inv, pipeline, p, qi, d as u64);
                    expect += w
                        * (r + instance.gamma
                            * recurse(instance, pmfs, next_inv, &next_pipe, t + 1, count));
                }
                best = best.max(expect);
            }
        }
        best
    }
    let zero_slot = if instance.costs.z > 0 {
        instance.quantity_grid.iter().position(|&q| q == 0).unwrap()
    } else {
        0
    };
    let pipeline = vec![zero_slot; instance.costs.z];
    let v = recurse(instance, &pmfs, instance.x0, &pipeline, 0, &mut count);
    Ok((v, count))
}

/// Value table as CSV `t,inventory,pipeline,value`; pipeline slots are
/// quantities joined by `|`.
pub fn value_table_csv(instance: &DPInstance, solution: &DPSolution) -> String {
    let mut out = String::from("t,inventory,pipeline,value\n");
    for (t, row) in solution.value.iter().enumerate() {
        for (s, v) in row.iter().enumerate() {
            let (inv, pipe) = decode_state(instance, s);
            out.push_str(&format!("{},{},{},{}\n", t, inv, pipe_str(instance, &pipe), v));
        }
    }
    out
}

/// Policy table as CSV `t,inventory,pipeline,price,quantity`.
pub fn policy_table_csv(instance: &DPInstance, solution: &DPSolution) -> String {
    let mut out = String::from("t,inventory,pipeline,price,quantity\n");
    for (t, row) in solution.policy.iter().enumerate() {
        for (s, &(pi, qi)) in row.iter().enumerate() {
            let (inv, pipe) = decode_state(instance, s);
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                t,
                inv,
                pipe_str(instance, &pipe),
                instance.price_grid[pi],
                instance.quantity_grid[qi]
            ));
        }
    }
    out
}

fn pipe_str(instance: &DPInstance, pipeline: &[usize]) -> String {
    if pipeline.is_empty() {
        return "-".into();
    }
    pipeline
        .iter()
        .map(|&i| instance.quantity_grid[i].to_string())
        .collect::<Vec<_>>()
        .join("|")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{enumerate_optimum, single_period_default, SinglePeriodParams};
    use approx::assert_relative_eq;
    use rand::Rng;

    fn tiny_demand() -> LinearizedDemandParams {
        // lambda(p) = 2 * (1 - p/40), small enough for short supports
        LinearizedDemandParams { eta: 4.0, delta: 0.5, a: 0.0, l: -0.025 }
    }

    fn tiny_instance() -> DPInstance {
        DPInstance {
            horizon: 2,
            price_grid: vec![10.0, 20.0, 30.0],
            quantity_grid: vec![0, 1, 2],
            costs: CostParams { h: 1.0, b: 2.0, c: 5.0, f: 0.0, z: 0 },
            gamma: 1.0,
            x0: 0,
            demand: tiny_demand(),
            tail_tol: 1e-12,
            fixed_support: Some(8),
            budget: 100_000_000,
        }
    }

    #[test]
    fn validation_gates() {
        let mut inst = tiny_instance();
        inst.costs.z = 3;
        assert!(matches!(inst.validate(), Err(Error::Size(_))));
        let mut inst = tiny_instance();
        inst.costs.z = 1;
        inst.quantity_grid = vec![1, 2, 3, 4, 5, 6];
        assert!(inst.validate().is_err());
        let mut inst = tiny_instance();
        inst.costs.z = 1;
        inst.quantity_grid = vec![1, 2]; // missing 0
        assert!(inst.validate().is_err());
        let mut inst = tiny_instance();
        inst.gamma = 1.5;
        assert!(inst.validate().is_err());
    }

    #[test]
    fn budget_exhaustion_is_a_size_error() {
        let mut inst = tiny_instance();
        inst.budget = 10;
        match backward_induction(&inst) {
            Err(Error::Size(msg)) => assert!(msg.contains("budget")),
            other => panic!("expected size error, got {other:?}"),
        }
    }

    #[test]
    fn pmfs_are_normalized() {
        let inst = tiny_instance();
        for pmf in inst.demand_pmfs() {
            assert_relative_eq!(pmf.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
        }
        let mut inst = tiny_instance();
        inst.fixed_support = None;
        for pmf in inst.demand_pmfs() {
            assert_relative_eq!(pmf.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn single_period_matches_analytic_enumeration() {
        let params = SinglePeriodParams {
            price_grid_n: 17,
            ..single_period_default()
        };
        let n = params.price_grid_n;
        let (p_lo, p_hi) = params.price_domain;
        let price_grid: Vec<f64> = (0..n)
            .map(|i| p_lo + (p_hi - p_lo) * i as f64 / (n - 1) as f64)
            .collect();
        let inst = DPInstance {
            horizon: 1,
            price_grid,
            quantity_grid: (0..=20).collect(),
            costs: params.costs.clone(),
            gamma: 1.0,
            x0: 0,
            demand: params.demand.clone(),
            tail_tol: 1e-12,
            fixed_support: None,
            budget: 100_000_000,
        };
        let sol = backward_induction(&inst).unwrap();
        let (p_star, x_star, f_star) = enumerate_optimum(&params);
        let (pi, qi) = sol.policy[0][0];
        assert_relative_eq!(inst.price_grid[pi], p_star, epsilon = 1e-12);
        assert_eq!(inst.quantity_grid[qi] as i64, x_star);
        assert_relative_eq!(sol.start_value(&inst), f_star, epsilon = 1e-9);
    }

    #[test]
    fn gamma_zero_decouples_periods() {
        let mut inst = tiny_instance();
        inst.horizon = 4;
        inst.gamma = 0.0;
        let sol = backward_induction(&inst).unwrap();
        for t in 1..inst.horizon {
            assert_eq!(sol.policy[t], sol.policy[0]);
            assert_eq!(sol.value[t], sol.value[0]);
        }
    }

    #[test]
    fn brute_force_policy_enumeration_agrees() {
        let inst = tiny_instance();
        let sol = backward_induction(&inst).unwrap();
        let n_states = inst.state_count();
        let n_actions = inst.price_grid.len() * inst.quantity_grid.len();
        // reachable second-period states: inventory 0..=2 (q_max = 2, x0 = 0)
        let decision_states = [0usize, 1, 2];
        let mut best = f64::NEG_INFINITY;
        let total = n_actions * n_actions.pow(decision_states.len() as u32);
        for code in 0..total {
            let mut c = code;
            let a1 = c % n_actions;
            c /= n_actions;
            let mut policy = vec![vec![(0usize, 0usize); n_states]; 2];
            policy[0][0] = (a1 % inst.price_grid.len(), a1 / inst.price_grid.len());
            for &s in &decision_states {
                let a = c % n_actions;
                c /= n_actions;
                policy[1][s] = (a % inst.price_grid.len(), a / inst.price_grid.len());
            }
            let v = evaluate_policy(&inst, &policy).unwrap();
            best = best.max(v);
        }
        assert_relative_eq!(best, sol.start_value(&inst), epsilon = 1e-10);
    }

    #[test]
    fn optimal_policy_reproduces_its_own_value() {
        let mut inst = tiny_instance();
        inst.horizon = 3;
        inst.gamma = 0.9;
        inst.costs.z = 1;
        let sol = backward_induction(&inst).unwrap();
        let v = evaluate_policy(&inst, &sol.policy).unwrap();
        assert_relative_eq!(v, sol.start_value(&inst), epsilon = 1e-12);
    }

    #[test]
    fn random_policies_never_beat_the_optimum() {
        let inst = tiny_instance();
        let sol = backward_induction(&inst).unwrap();
        let v_star = sol.start_value(&inst);
        let n_states = inst.state_count();
        let mut rng = crate::rng::stream(17, "dp-dominance");
        for _ in 0..100 {
            let policy: Vec<Vec<(usize, usize)>> = (0..inst.horizon)
                .map(|_| {
                    (0..n_states)
                        .map(|_| {
                            (
                                rng.gen_range(0..inst.price_grid.len()),
                                rng.gen_range(0..inst.quantity_grid.len()),
                            )
                        })
                        .collect()
                })
                .collect();
            let v = evaluate_policy(&inst, &policy).unwrap();
            assert!(v <= v_star + 1e-10, "random policy beat the optimum: {v} > {v_star}");
        }
    }

    #[test]
    fn fixed_price_no_order_value_by_hand() {
        // T=1, x0=0, never order: reward = -b*E[d] at the chosen price.
        let mut inst = tiny_instance();
        inst.horizon = 1;
        let n_states = inst.state_count();
        let policy = vec![vec![(1usize, 0usize); n_states]];
        let v = evaluate_policy(&inst, &policy).unwrap();
        let pmf = &inst.demand_pmfs()[1];
        let mean: f64 = pmf.iter().enumerate().map(|(d, &w)| d as f64 * w).sum();
        assert_relative_eq!(v, -inst.costs.b * mean, epsilon = 1e-12);
    }

    #[test]
    fn truncation_doubling_barely_moves_the_value() {
        let mut coarse = tiny_instance();
        coarse.fixed_support = Some(12);
        let mut fine = tiny_instance();
        fine.fixed_support = Some(24);
        let v_coarse = backward_induction(&coarse).unwrap().start_value(&coarse);
        let v_fine = backward_induction(&fine).unwrap().start_value(&fine);
        assert!((v_coarse - v_fine).abs() < 1e-9, "{v_coarse} vs {v_fine}");
    }

    #[test]
    fn naive_recursion_count_matches_cost_formula() {
        let mut inst = tiny_instance();
        inst.fixed_support = Some(4);
        inst.horizon = 3;
        let (v_naive, count) = naive_recursion_value(&inst).unwrap();
        let expect = naive_cost(3, 3, 4, 3);
        assert_eq!(count as f64, expect);
        let sol = backward_induction(&inst).unwrap();
        assert_relative_eq!(v_naive, sol.start_value(&inst), epsilon = 1e-10);
    }

    #[test]
    fn tie_break_takes_lowest_indices() {
        // zero demand, zero costs except ordering: all (p, q=0) actions tie
        let inst = DPInstance {
            horizon: 1,
            price_grid: vec![5.0, 6.0],
            quantity_grid: vec![0, 1],
            costs: CostParams { h: 0.0, b: 0.0, c: 1.0, f: 0.0, z: 0 },
            gamma: 1.0,
            x0: 0,
            demand: LinearizedDemandParams { eta: 1.0, delta: 1.0, a: -30.0, l: -0.001 },
            tail_tol: 1e-12,
            fixed_support: Some(1),
            budget: 1_000_000,
        };
        let sol = backward_induction(&inst).unwrap();
        assert_eq!(sol.policy[0][0], (0, 0));
    }

    #[test]
    fn pipeline_instance_round_trips_state_indexing() {
        let mut inst = tiny_instance();
        inst.costs.z = 2;
        for s in 0..inst.state_count() {
            let (inv, pipe) = decode_state(&inst, s);
            assert_eq!(state_index(&inst, inv, &pipe), s);
        }
    }

    #[test]
    fn csv_exports_have_expected_shape() {
        let mut inst = tiny_instance();
        inst.horizon = 1;
        let sol = backward_induction(&inst).unwrap();
        let v = value_table_csv(&inst, &sol);
        let p = policy_table_csv(&inst, &sol);
        assert_eq!(v.lines().count(), 1 + inst.state_count());
        assert_eq!(p.lines().count(), 1 + inst.state_count());
        assert!(v.starts_with("t,inventory,pipeline,value\n"));
        assert!(p.starts_with("t,inventory,pipeline,price,quantity\n"));
        assert!(v.lines().nth(1).unwrap().contains(",-,")); // z = 0 pipeline marker
    }

    #[test]
    fn updates_counter_matches_plan() {
        let inst = tiny_instance();
        let sol = backward_induction(&inst).unwrap();
        assert_eq!(sol.updates, inst.update_count());
    }
}
