//! Fast-slow dual-agent training: a pricing actor and a replenishment
//! actor per product share one global critic (centralized training,
//! decentralized execution). Actors optimize a clipped surrogate with
//! sequential update factors and an entropy bonus; the slow actor updates
//! every k(m) episodes at a proportionally smaller learning rate.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{
    self, Action, CrossDemandModel, MarketState, ScenarioConfig,
};
use crate::neural::{self, HiddenState, NetworkSpec, ParamSet};
use crate::rng::{self, Stream};

/// Which of the two roles updates on the slow timescale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SlowAgent {
    Pricing,
    Replenishment,
}

/// Critic regression target: discounted GAE value targets (default) or
/// the literal per-period reward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriticTarget {
    GaeReturn,
    LiteralReward,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FSDAConfig {
    /// Total training episodes M.
    pub episodes: usize,
    /// Episodes collected per update round (full-batch updates).
    pub episodes_per_round: usize,
    pub gamma: f64,
    pub clip: f64,
    pub entropy_coeff: f64,
    pub gae_lambda: f64,
    pub lr_fast: f64,
    pub lr_critic: f64,
    /// Cap on the timescale ratio k(m) = max(1, m/2).
    pub k_cap: usize,
    pub slow_agent: SlowAgent,
    pub critic_target: CriticTarget,
    pub reward_scaling: bool,
    /// Hidden width of every network.
    pub width: usize,
    /// Greedy rollouts per learning-curve point.
    pub eval_rollouts: usize,
    pub seed: u64,
}

impl FSDAConfig {
    pub fn defaults(seed: u64) -> FSDAConfig {
        FSDAConfig {
            episodes: 2000,
            episodes_per_round: 8,
            gamma: 0.99,
            clip: 0.2,
            entropy_coeff: 0.01,
            gae_lambda: 0.95,
            lr_fast: 3e-4,
            lr_critic: 3e-4,
            k_cap: 64,
            slow_agent: SlowAgent::Replenishment,
            critic_target: CriticTarget::GaeReturn,
            reward_scaling: true,
            width: 32,
            eval_rollouts: 4,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.clip > 0.0 && self.clip < 1.0) {
            return Err(Error::Config("clip parameter must lie in (0,1)".into()));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::Config("gamma must lie in (0,1]".into()));
        }
        if !(0.0..=1.0).contains(&self.gae_lambda) {
            return Err(Error::Config("GAE lambda must lie in [0,1]".into()));
        }
        if self.episodes_per_round == 0 || self.width == 0 || self.k_cap == 0 {
            return Err(Error::Config("round size, width and k cap must be positive".into()));
        }
        if self.lr_fast <= 0.0 || self.lr_critic <= 0.0 {
            return Err(Error::Config("learning rates must be positive".into()));
        }
        Ok(())
    }

    /// Timescale ratio: max(1, floor(m/2)), capped.
    pub fn k_of(&self, m: usize) -> usize {
        (m / 2).max(1).min(self.k_cap)
    }
}

/// 2N actors (pricing then replenishment per product) plus one critic
/// over the concatenated product states.
#[derive(Debug, Clone)]
pub struct AgentBundle {
    pub actors: Vec<ParamSet>,
    pub critic: ParamSet,
    pub slow_agent: SlowAgent,
}

impl AgentBundle {
    pub fn products(&self) -> usize {
        self.actors.len() / 2
    }

    /// Actor index for product `i`: 2i prices, 2i+1 replenishes.
    pub fn is_slow(&self, actor_idx: usize) -> bool {
        let pricing = actor_idx % 2 == 0;
        match self.slow_agent {
            SlowAgent::Pricing => pricing,
            SlowAgent::Replenishment => !pricing,
        }
    }
}

/// Single- or multi-product environment used for rollouts.
pub struct Env<'a> {
    pub configs: &'a [ScenarioConfig],
    /// Required for more than one product.
    pub cross: Option<&'a CrossDemandModel>,
}

impl<'a> Env<'a> {
    pub fn single(config: &'a ScenarioConfig) -> Env<'a> {
        Env { configs: std::slice::from_ref(config), cross: None }
    }

    fn validate(&self) -> Result<()> {
        if self.configs.is_empty() {
            return Err(Error::Config("at least one product required".into()));
        }
        for c in self.configs {
            c.validate()?;
        }
        if self.configs.len() > 1 {
            match self.cross {
                Some(cross) => cross.validate(self.configs.len())?,
                None => {
                    return Err(Error::Config(
                        "multi-product environments need a cross-demand model".into(),
                    ))
                }
            }
        }
        Ok(())
    }
}

/// One collected episode: per-agent observations, sampled action indices,
/// collection-time log-probabilities and the joint per-period reward.
#[derive(Debug, Clone)]
pub struct Episode {
    /// `[t][agent]` observation (pricing/replenishment agents of a product
    /// share their product's observation).
    pub states: Vec<Vec<Vec<f64>>>,
    /// Concatenated product observations, the critic input.
    pub global_states: Vec<Vec<f64>>,
    /// `[t][agent]` chosen grid index.
    pub actions: Vec<Vec<usize>>,
    /// `[t][agent]` log pi(a|s) at collection time.
    pub log_probs: Vec<Vec<f64>>,
    pub rewards: Vec<f64>,
    /// Undiscounted return (pre reward-scaling).
    pub total_reward: f64,
}

pub fn init_bundle(env: &Env, config: &FSDAConfig) -> Result<AgentBundle> {
    env.validate()?;
    config.validate()?;
    let mut rng = rng::stream(config.seed, "fsda-init");
    let mut actors = Vec::new();
    let mut global_dim = 0;
    for c in env.configs {
        let dim = c.state_dim();
        global_dim += dim;
        let price_spec = NetworkSpec::actor(dim, config.width, c.price_grid.n);
        let qty_spec = NetworkSpec::actor(dim, config.width, c.quantity_grid.n);
        actors.push(neural::orthogonal_init(&price_spec, &mut rng, 0.01));
        actors.push(neural::orthogonal_init(&qty_spec, &mut rng, 0.01));
    }
    let critic_spec = NetworkSpec::critic(global_dim, config.width);
    let critic = neural::orthogonal_init(&critic_spec, &mut rng, 1.0);
    Ok(AgentBundle { actors, critic, slow_agent: config.slow_agent })
}

fn sample_categorical(probs: &[f64], rng: &mut Stream) -> usize {
    let u: f64 = rng.gen_range(0.0..1.0);
    let mut cum = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        cum += p;
        if u < cum {
            return i;
        }
    }
    probs.len() - 1
}

/// Roll out `count` episodes under the current joint policy. Hidden
/// states are threaded within an episode and reset between episodes;
/// `greedy` switches sampling to argmax decoding.
pub fn collect_trajectories(
    env: &Env,
    bundle: &AgentBundle,
    count: usize,
    rng: &mut Stream,
    greedy: bool,
) -> Result<Vec<Episode>> {
    env.validate()?;
    let n = env.configs.len();
    if bundle.actors.len() != 2 * n {
        return Err(Error::Shape("bundle does not match the product count".into()));
    }
    let horizon = env.configs[0].horizon;
    let mut episodes = Vec::with_capacity(count);
    for _ in 0..count {
        let mut states: Vec<MarketState> =
            env.configs.iter().map(market::reset).collect::<Result<_>>()?;
        let mut hidden: Vec<HiddenState> =
            bundle.actors.iter().map(|a| HiddenState::zeros(&a.spec)).collect();
        let mut ep = Episode {
            states: Vec::with_capacity(horizon),
            global_states: Vec::with_capacity(horizon),
            actions: Vec::with_capacity(horizon),
            log_probs: Vec::with_capacity(horizon),
            rewards: Vec::with_capacity(horizon),
            total_reward: 0.0,
        };
        for _ in 0..horizon {
            let obs: Vec<Vec<f64>> = (0..n)
                .map(|i| market::encode_state(&states[i], &env.configs[i]))
                .collect();
            let mut per_agent_states = Vec::with_capacity(2 * n);
            let mut actions_idx = Vec::with_capacity(2 * n);
            let mut log_probs = Vec::with_capacity(2 * n);
            let mut actions = Vec::with_capacity(n);
            for i in 0..n {
                let mut pair = [0usize; 2];
                for role in 0..2 {
                    let a = 2 * i + role;
                    let (probs, h_new, _) =
                        neural::forward(&bundle.actors[a], &obs[i], &hidden[a])?;
                    hidden[a] = h_new;
                    let idx = if greedy {
                        probs
                            .iter()
                            .enumerate()
                            .max_by(|x, y| x.1.total_cmp(y.1))
                            .unwrap()
                            .0
                    } else {
                        sample_categorical(&probs, rng)
                    };
                    pair[role] = idx;
                    per_agent_states.push(obs[i].clone());
                    actions_idx.push(idx);
                    log_probs.push(probs[idx].ln());
                }
                actions.push(Action {
                    price: env.configs[i].price_grid.value(pair[0]),
                    quantity: env.configs[i].quantity_grid.value(pair[1]).round() as u64,
                });
            }
            let reward = if n == 1 {
                let out = market::step(&env.configs[0], &states[0], &actions[0], rng)?;
                states[0] = out.next_state.clone();
                out.reward
            } else {
                let (outs, joint) = market::multi_product_step(
                    env.configs,
                    &states,
                    &actions,
                    env.cross.unwrap(),
                    rng,
                )?;
                for (s, o) in states.iter_mut().zip(&outs) {
                    *s = o.next_state.clone();
                }
                joint
            };
            ep.global_states.push(obs.concat());
            ep.states.push(per_agent_states);
            ep.actions.push(actions_idx);
            ep.log_probs.push(log_probs);
            ep.rewards.push(reward);
            ep.total_reward += reward;
        }
        episodes.push(ep);
    }
    Ok(episodes)
}

/// Advantages, value targets and sequential update factors, `[episode][t]`.
#[derive(Debug, Clone)]
pub struct GAEBuffer {
    pub advantages: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
    /// F_t, initialized to 1 for the first updated actor.
    pub factors: Vec<Vec<f64>>,
}

/// Critic values per episode, hidden state threaded within the episode.
fn critic_values(critic: &ParamSet, episodes: &[Episode]) -> Result<Vec<Vec<f64>>> {
    episodes
        .iter()
        .map(|ep| {
            let mut h = HiddenState::zeros(&critic.spec);
            ep.global_states
                .iter()
                .map(|s| {
                    let (out, h_new, _) = neural::forward(critic, s, &h)?;
                    h = h_new;
                    Ok(out[0])
                })
                .collect()
        })
        .collect()
}

/// Generalized advantage estimation with episode-boundary masking
/// (terminal bootstrap 0). Batch advantage normalization is applied when
/// `normalize` is set.
pub fn compute_gae(
    episodes: &[Episode],
    critic: &ParamSet,
    gamma: f64,
    lambda: f64,
    normalize: bool,
) -> Result<GAEBuffer> {
    let values = critic_values(critic, episodes)?;
    let mut advantages = Vec::with_capacity(episodes.len());
    let mut targets = Vec::with_capacity(episodes.len());
    for (ep, v) in episodes.iter().zip(&values) {
        let t_max = ep.rewards.len();
        let mut adv = vec![0.0; t_max];
        let mut acc = 0.0;
        for t in (0..t_max).rev() {
            let v_next = if t + 1 < t_max { v[t + 1] } else { 0.0 };
            let delta = ep.rewards[t] + gamma * v_next - v[t];
            acc = delta + gamma * lambda * acc;
            adv[t] = acc;
        }
        let tgt: Vec<f64> = adv.iter().zip(v).map(|(a, b)| a + b).collect();
        advantages.push(adv);
        targets.push(tgt);
    }
    if normalize {
        let flat: Vec<f64> = advantages.iter().flatten().cloned().collect();
        let n = flat.len() as f64;
        let mean = flat.iter().sum::<f64>() / n;
        let var = flat.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
        let std = var.sqrt().max(1e-8);
        for row in advantages.iter_mut() {
            for a in row.iter_mut() {
                *a = (*a - mean) / std;
            }
        }
    }
    let factors = episodes
        .iter()
        .map(|ep| vec![1.0; ep.rewards.len()])
        .collect();
    Ok(GAEBuffer { advantages, targets, factors })
}

/// Clipped surrogate for one actor:
/// −(1/BT)·Σ min(ratio·F·A, clip(ratio, 1−ε, 1+ε)·F·A), with gradients
/// flowing through the new policy only. Accumulates into `actor.grad`.
pub fn policy_loss(
    actor: &mut ParamSet,
    episodes: &[Episode],
    agent_idx: usize,
    buffer: &GAEBuffer,
    clip: f64,
) -> Result<f64> {
    let bt: f64 = episodes.iter().map(|e| e.rewards.len() as f64).sum();
    let mut loss = 0.0;
    for (e, ep) in episodes.iter().enumerate() {
        let mut h = HiddenState::zeros(&actor.spec);
        let mut caches = Vec::with_capacity(ep.rewards.len());
        let mut d_probs: Vec<Vec<f64>> = Vec::with_capacity(ep.rewards.len());
        for t in 0..ep.rewards.len() {
            let (probs, h_new, cache) = neural::forward(actor, &ep.states[t][agent_idx], &h)?;
            h = h_new;
            let a = ep.actions[t][agent_idx];
            let old_lp = ep.log_probs[t][agent_idx];
            if !old_lp.is_finite() {
                return Err(Error::Domain(
                    "zero collection-time probability; cannot form the ratio".into(),
                ));
            }
            let p_new = probs[a];
            let ratio = (p_new.ln() - old_lp).exp();
            let fa = buffer.factors[e][t] * buffer.advantages[e][t];
            let unclipped = ratio * fa;
            let clipped = ratio.clamp(1.0 - clip, 1.0 + clip) * fa;
            loss -= unclipped.min(clipped) / bt;
            let mut d = vec![0.0; probs.len()];
            if unclipped <= clipped {
                // d(-ratio*F*A)/d p_new = -F*A / p_old
                d[a] = -fa / old_lp.exp() / bt;
            }
            d_probs.push(d);
            caches.push(cache);
        }
        let mut d_h1 = vec![0.0; actor.spec.gru_width];
        let mut d_h2 = vec![0.0; actor.spec.gru_width];
        for t in (0..caches.len()).rev() {
            let (_, nh1, nh2) = neural::backward(actor, &caches[t], &d_probs[t], &d_h1, &d_h2)?;
            d_h1 = nh1;
            d_h2 = nh2;
        }
    }
    Ok(loss)
}

/// Entropy regularizer, averaged per period:
/// β_E · mean_t Σ_a π(a|s_t) log π(a|s_t). Minimizing it raises entropy.
pub fn entropy_loss(
    actor: &mut ParamSet,
    episodes: &[Episode],
    agent_idx: usize,
    beta_e: f64,
) -> Result<f64> {
    let bt: f64 = episodes.iter().map(|e| e.rewards.len() as f64).sum();
    let mut loss = 0.0;
    for ep in episodes {
        let mut h = HiddenState::zeros(&actor.spec);
        let mut caches = Vec::new();
        let mut d_probs = Vec::new();
        for t in 0..ep.rewards.len() {
            let (probs, h_new, cache) = neural::forward(actor, &ep.states[t][agent_idx], &h)?;
            h = h_new;
            let mut d = vec![0.0; probs.len()];
            for (a, &p) in probs.iter().enumerate() {
                if p > 0.0 {
                    loss += beta_e * p * p.ln() / bt;
                    d[a] = beta_e * (p.ln() + 1.0) / bt;
                }
            }
            caches.push(cache);
            d_probs.push(d);
        }
        let mut d_h1 = vec![0.0; actor.spec.gru_width];
        let mut d_h2 = vec![0.0; actor.spec.gru_width];
        for t in (0..caches.len()).rev() {
            let (_, nh1, nh2) = neural::backward(actor, &caches[t], &d_probs[t], &d_h1, &d_h2)?;
            d_h1 = nh1;
            d_h2 = nh2;
        }
    }
    Ok(loss)
}

/// Log pi(a_t | s_t) of the recorded actions under the current parameters.
pub fn recompute_log_probs(
    actor: &ParamSet,
    episodes: &[Episode],
    agent_idx: usize,
) -> Result<Vec<Vec<f64>>> {
    episodes
        .iter()
        .map(|ep| {
            let mut h = HiddenState::zeros(&actor.spec);
            (0..ep.rewards.len())
                .map(|t| {
                    let (probs, h_new, _) = neural::forward(actor, &ep.states[t][agent_idx], &h)?;
                    h = h_new;
                    Ok(probs[ep.actions[t][agent_idx]].ln())
                })
                .collect()
        })
        .collect()
}

/// Chain the sequential update factor through one updated actor:
/// F'_t = F_t · π_new(a_t|s_t) / π_old(a_t|s_t).
pub fn sequential_factor_update(
    factors: &[Vec<f64>],
    old_log_probs: &[Vec<f64>],
    new_log_probs: &[Vec<f64>],
) -> Vec<Vec<f64>> {
    factors
        .iter()
        .zip(old_log_probs)
        .zip(new_log_probs)
        .map(|((f, o), n)| {
            f.iter()
                .zip(o)
                .zip(n)
                .map(|((&fv, &ov), &nv)| fv * (nv - ov).exp())
                .collect()
        })
        .collect()
}

/// Critic MSE against the selected regression target; accumulates into
/// `critic.grad`.
pub fn critic_loss(
    critic: &mut ParamSet,
    episodes: &[Episode],
    buffer: &GAEBuffer,
    target: CriticTarget,
) -> Result<f64> {
    let bt: f64 = episodes.iter().map(|e| e.rewards.len() as f64).sum();
    let mut loss = 0.0;
    for (e, ep) in episodes.iter().enumerate() {
        let mut h = HiddenState::zeros(&critic.spec);
        let mut caches = Vec::new();
        let mut d_outs = Vec::new();
        for t in 0..ep.rewards.len() {
            let (out, h_new, cache) = neural::forward(critic, &ep.global_states[t], &h)?;
            h = h_new;
            let y = match target {
                CriticTarget::GaeReturn => buffer.targets[e][t],
                CriticTarget::LiteralReward => ep.rewards[t],
            };
            let err = out[0] - y;
            loss += err * err / bt;
            caches.push(cache);
            d_outs.push(vec![2.0 * err / bt]);
        }
        let mut d_h1 = vec![0.0; critic.spec.gru_width];
        let mut d_h2 = vec![0.0; critic.spec.gru_width];
        for t in (0..caches.len()).rev() {
            let (_, nh1, nh2) = neural::backward(critic, &caches[t], &d_outs[t], &d_h1, &d_h2)?;
            d_h1 = nh1;
            d_h2 = nh2;
        }
    }
    Ok(loss)
}

/// One learning-curve sample.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurvePoint {
    pub episode: usize,
    pub mean_return: f64,
    pub std_return: f64,
}

pub fn curve_to_csv(curve: &[CurvePoint]) -> String {
    let mut out = String::from("episode,mean_return,std_return\n");
    for p in curve {
        out.push_str(&format!("{},{},{}\n", p.episode, p.mean_return, p.std_return));
    }
    out
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub bundle: AgentBundle,
    pub curve: Vec<CurvePoint>,
    /// Update rounds in which each actor stepped.
    pub actor_update_counts: Vec<usize>,
}

struct RunningStd {
    n: f64,
    mean: f64,
    m2: f64,
}

impl RunningStd {
    fn new() -> RunningStd {
        RunningStd { n: 0.0, mean: 0.0, m2: 0.0 }
    }

    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    fn std(&self) -> f64 {
        if self.n < 2.0 {
            1.0
        } else {
            (self.m2 / self.n).sqrt().max(1e-4)
        }
    }
}

/// Train on a single-product scenario.
pub fn train(config: &FSDAConfig, scenario: &ScenarioConfig) -> Result<TrainReport> {
    train_env(config, &Env::single(scenario))
}

/// Train 2N actors on a multi-product environment; sequential update
/// factors chain across the actor ordering within each round.
pub fn train_multi_product(
    config: &FSDAConfig,
    configs: &[ScenarioConfig],
    cross: &CrossDemandModel,
) -> Result<TrainReport> {
    train_env(config, &Env { configs, cross: Some(cross) })
}

fn train_env(config: &FSDAConfig, env: &Env) -> Result<TrainReport> {
    config.validate()?;
    let mut bundle = init_bundle(env, config)?;
    let n_actors = bundle.actors.len();
    let mut curve = Vec::new();
    let mut counts = vec![0usize; n_actors];
    let rounds = config.episodes / config.episodes_per_round;
    let mut reward_std = RunningStd::new();
    let mut since_slow = usize::MAX;
    for m in 0..rounds {
        let mut collect_rng = rng::substream(config.seed, "fsda-collect", m as u64);
        let mut episodes =
            collect_trajectories(env, &bundle, config.episodes_per_round, &mut collect_rng, false)?;
        if config.reward_scaling {
            for ep in &episodes {
                for &r in &ep.rewards {
                    reward_std.push(r);
                }
            }
            let s = reward_std.std();
            for ep in episodes.iter_mut() {
                for r in ep.rewards.iter_mut() {
                    *r /= s;
                }
            }
        }
        let mut buffer =
            compute_gae(&episodes, &bundle.critic, config.gamma, config.gae_lambda, true)?;
        let k = config.k_of(m);
        // Slow actors step once every k(m) rounds; the gap counter (rather
        // than `m % k`) keeps the slow update count sublinear as k grows.
        let slow_round = since_slow >= k;
        if slow_round {
            since_slow = 0;
        }
        since_slow += 1;
        // slow actors first (when gated in), then fast actors; factors
        // chain through every actor that actually updated.
        let order: Vec<usize> = (0..n_actors)
            .filter(|&a| bundle.is_slow(a))
            .chain((0..n_actors).filter(|&a| !bundle.is_slow(a)))
            .collect();
        for &a in &order {
            let slow = bundle.is_slow(a);
            if slow && !slow_round {
                continue;
            }
            let lr = if slow { config.lr_fast / k as f64 } else { config.lr_fast };
            let actor = &mut bundle.actors[a];
            actor.zero_grad();
            let lp = policy_loss(actor, &episodes, a, &buffer, config.clip)?;
            let le = entropy_loss(actor, &episodes, a, config.entropy_coeff)?;
            if !lp.is_finite() || !le.is_finite() {
                return Err(Error::Numeric(format!(
                    "non-finite actor loss at round {m}, actor {a}: policy {lp}, entropy {le}"
                )));
            }
            let old_lp = recompute_log_probs(actor, &episodes, a)?;
            neural::adam_step(actor, lr, 0.9, 0.999, 1e-8)?;
            counts[a] += 1;
            let new_lp = recompute_log_probs(&bundle.actors[a], &episodes, a)?;
            buffer.factors = sequential_factor_update(&buffer.factors, &old_lp, &new_lp);
        }
        bundle.critic.zero_grad();
        let lc = critic_loss(&mut bundle.critic, &episodes, &buffer, config.critic_target)?;
        if !lc.is_finite() {
            return Err(Error::Numeric(format!("non-finite critic loss at round {m}: {lc}")));
        }
        neural::adam_step(&mut bundle.critic, config.lr_critic, 0.9, 0.999, 1e-8)?;
        // held-out greedy evaluation
        let mut eval_rng = rng::substream(config.seed, "fsda-eval", m as u64);
        let evals =
            collect_trajectories(env, &bundle, config.eval_rollouts.max(1), &mut eval_rng, true)?;
        let returns: Vec<f64> = evals.iter().map(|e| e.total_reward).collect();
        let mean = returns.iter().sum::<f64>() / returns.len() as f64;
        let var =
            returns.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / returns.len() as f64;
        curve.push(CurvePoint {
            episode: (m + 1) * config.episodes_per_round,
            mean_return: mean,
            std_return: var.sqrt(),
        });
    }
    Ok(TrainReport { bundle, curve, actor_update_counts: counts })
}
