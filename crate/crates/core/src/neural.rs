//! Minimal reverse-mode building blocks for the policy/value network
//! shape used here: a two-layer tanh MLP, two stacked GRU cells, and a
//! linear head with either a softmax (actor) or scalar (critic) output.
//! No autodiff graph: one hand-written backward pass per forward, with
//! through-time accumulation when called in reverse step order.

use std::io::{Read as _, Write as _};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SAVE_VERSION: u32 = 1;

/// Output head: categorical distribution or scalar value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Head {
    Softmax,
    Scalar,
}

/// Shape of the network: input D_I -> two tanh layers of width W1 ->
/// GRU(W2) -> GRU(W2) -> linear head of width D_A.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub input: usize,
    pub mlp_width: usize,
    pub gru_width: usize,
    pub output: usize,
    pub head: Head,
}

impl NetworkSpec {
    pub fn actor(input: usize, width: usize, actions: usize) -> NetworkSpec {
        NetworkSpec { input, mlp_width: width, gru_width: width, output: actions, head: Head::Softmax }
    }

    pub fn critic(input: usize, width: usize) -> NetworkSpec {
        NetworkSpec { input, mlp_width: width, gru_width: width, output: 1, head: Head::Scalar }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input == 0 || self.mlp_width == 0 || self.gru_width == 0 || self.output == 0 {
            return Err(Error::Shape("all network widths must be >= 1".into()));
        }
        if self.head == Head::Scalar && self.output != 1 {
            return Err(Error::Shape("scalar head requires output width 1".into()));
        }
        Ok(())
    }

    /// Named weight slices: (name, rows, cols); biases have cols = 0.
    pub fn layout(&self) -> Vec<(&'static str, usize, usize)> {
        let (i, w1, w2, o) = (self.input, self.mlp_width, self.gru_width, self.output);
        vec![
            ("mlp1.w1", w1, i),
            ("mlp1.b1", w1, 0),
            ("mlp1.w2", w1, w1),
            ("mlp1.b2", w1, 0),
            ("gru1.wz", w2, w1),
            ("gru1.uz", w2, w2),
            ("gru1.bz", w2, 0),
            ("gru1.wr", w2, w1),
            ("gru1.ur", w2, w2),
            ("gru1.br", w2, 0),
            ("gru1.wn", w2, w1),
            ("gru1.un", w2, w2),
            ("gru1.bn", w2, 0),
            ("gru2.wz", w2, w2),
            ("gru2.uz", w2, w2),
            ("gru2.bz", w2, 0),
            ("gru2.wr", w2, w2),
            ("gru2.ur", w2, w2),
            ("gru2.br", w2, 0),
            ("gru2.wn", w2, w2),
            ("gru2.un", w2, w2),
            ("gru2.bn", w2, 0),
            ("head.w", o, w2),
            ("head.b", o, 0),
        ]
    }

    pub fn param_count(&self) -> usize {
        self.layout().iter().map(|&(_, r, c)| r * c.max(1)).sum()
    }

    fn offset(&self, name: &str) -> (usize, usize, usize) {
        let mut off = 0;
        for (n, r, c) in self.layout() {
            let len = r * c.max(1);
            if n == name {
                return (off, r, c);
            }
            off += len;
        }
        panic!("unknown slice {name}");
    }
}

/// Flat parameters with a paired gradient buffer and Adam moments.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamSet {
    pub spec: NetworkSpec,
    pub data: Vec<f64>,
    pub grad: Vec<f64>,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
}

impl ParamSet {
    pub fn zeros(spec: &NetworkSpec) -> ParamSet {
        let n = spec.param_count();
        ParamSet {
            spec: spec.clone(),
            data: vec![0.0; n],
            grad: vec![0.0; n],
            m: vec![0.0; n],
            v: vec![0.0; n],
            step: 0,
        }
    }

    pub fn slice(&self, name: &str) -> &[f64] {
        let (off, r, c) = self.spec.offset(name);
        &self.data[off..off + r * c.max(1)]
    }

    pub fn slice_mut(&mut self, name: &str) -> &mut [f64] {
        let (off, r, c) = self.spec.offset(name);
        &mut self.data[off..off + r * c.max(1)]
    }

    pub fn grad_slice_mut(&mut self, name: &str) -> &mut [f64] {
        let (off, r, c) = self.spec.offset(name);
        &mut self.grad[off..off + r * c.max(1)]
    }

    pub fn zero_grad(&mut self) {
        self.grad.iter_mut().for_each(|g| *g = 0.0);
    }
}

/// GRU hidden states, one vector per stacked cell; zero at episode start.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenState {
    pub h1: Vec<f64>,
    pub h2: Vec<f64>,
}

impl HiddenState {
    pub fn zeros(spec: &NetworkSpec) -> HiddenState {
        HiddenState { h1: vec![0.0; spec.gru_width], h2: vec![0.0; spec.gru_width] }
    }
}

fn matvec(w: &[f64], rows: usize, cols: usize, x: &[f64], out: &mut [f64]) {
    for r in 0..rows {
        let row = &w[r * cols..(r + 1) * cols];
        out[r] = row.iter().zip(x).map(|(a, b)| a * b).sum();
    }
}

/// out += W^T * g
fn matvec_t_acc(w: &[f64], rows: usize, cols: usize, g: &[f64], out: &mut [f64]) {
    for r in 0..rows {
        let row = &w[r * cols..(r + 1) * cols];
        for (o, &wv) in out.iter_mut().zip(row) {
            *o += wv * g[r];
        }
    }
}

/// grad(W) += g * x^T
fn outer_acc(gw: &mut [f64], rows: usize, cols: usize, g: &[f64], x: &[f64]) {
    for r in 0..rows {
        let row = &mut gw[r * cols..(r + 1) * cols];
        for (slot, &xv) in row.iter_mut().zip(x) {
            *slot += g[r] * xv;
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone)]
struct GruCache {
    x: Vec<f64>,
    h_in: Vec<f64>,
    z: Vec<f64>,
    r: Vec<f64>,
    n: Vec<f64>,
    rh: Vec<f64>,
}

/// Everything the backward pass needs from one forward step.
#[derive(Debug, Clone)]
pub struct Cache {
    x: Vec<f64>,
    a1: Vec<f64>,
    a2: Vec<f64>,
    g1: GruCache,
    g2: GruCache,
    /// Raw head pre-activations (kept for diagnostics).
    pub logits: Vec<f64>,
    /// Softmax output (empty for scalar heads).
    pub probs: Vec<f64>,
}

/// Candidate state uses the reset-gate-inside-matmul convention:
/// n = tanh(Wn x + Un (r ⊙ h) + bn), h' = (1 − z) ⊙ n + z ⊙ h.
fn gru_forward(
    params: &ParamSet,
    prefix: &str,
    in_w: usize,
    x: &[f64],
    h: &[f64],
) -> (Vec<f64>, GruCache) {
    let w2 = params.spec.gru_width;
    let mut pre_z = vec![0.0; w2];
    let mut pre_r = vec![0.0; w2];
    let mut pre_n = vec![0.0; w2];
    let mut tmp = vec![0.0; w2];
    matvec(params.slice(&format!("{prefix}.wz")), w2, in_w, x, &mut pre_z);
    matvec(params.slice(&format!("{prefix}.uz")), w2, w2, h, &mut tmp);
    for i in 0..w2 {
        pre_z[i] += tmp[i] + params.slice(&format!("{prefix}.bz"))[i];
    }
    matvec(params.slice(&format!("{prefix}.wr")), w2, in_w, x, &mut pre_r);
    matvec(params.slice(&format!("{prefix}.ur")), w2, w2, h, &mut tmp);
    for i in 0..w2 {
        pre_r[i] += tmp[i] + params.slice(&format!("{prefix}.br"))[i];
    }
    let z: Vec<f64> = pre_z.iter().map(|&v| sigmoid(v)).collect();
    let r: Vec<f64> = pre_r.iter().map(|&v| sigmoid(v)).collect();
    let rh: Vec<f64> = r.iter().zip(h).map(|(a, b)| a * b).collect();
    matvec(params.slice(&format!("{prefix}.wn")), w2, in_w, x, &mut pre_n);
    matvec(params.slice(&format!("{prefix}.un")), w2, w2, &rh, &mut tmp);
    for i in 0..w2 {
        pre_n[i] += tmp[i] + params.slice(&format!("{prefix}.bn"))[i];
    }
    let n: Vec<f64> = pre_n.iter().map(|&v| v.tanh()).collect();
    let h_out: Vec<f64> = (0..w2).map(|i| (1.0 - z[i]) * n[i] + z[i] * h[i]).collect();
    (
        h_out,
        GruCache { x: x.to_vec(), h_in: h.to_vec(), z, r, n, rh },
    )
}

/// Backward through one GRU cell. `d_h_out` is the gradient at the cell
/// output; returns (d_x, d_h_in) and accumulates parameter gradients.
fn gru_backward(
    params: &mut ParamSet,
    prefix: &str,
    in_w: usize,
    cache: &GruCache,
    d_h_out: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let w2 = params.spec.gru_width;
    let mut d_h_in = vec![0.0; w2];
    let mut d_x = vec![0.0; in_w];
    let mut dz_pre = vec![0.0; w2];
    let mut dn_pre = vec![0.0; w2];
    for i in 0..w2 {
        let dz = d_h_out[i] * (cache.h_in[i] - cache.n[i]);
        let dn = d_h_out[i] * (1.0 - cache.z[i]);
        d_h_in[i] += d_h_out[i] * cache.z[i];
        dz_pre[i] = dz * cache.z[i] * (1.0 - cache.z[i]);
        dn_pre[i] = dn * (1.0 - cache.n[i] * cache.n[i]);
    }
    // through n: Wn x + Un (r ⊙ h) + bn
    let mut d_rh = vec![0.0; w2];
    matvec_t_acc(params.slice(&format!("{prefix}.un")), w2, w2, &dn_pre, &mut d_rh);
    let mut dr_pre = vec![0.0; w2];
    for i in 0..w2 {
        let dr = d_rh[i] * cache.h_in[i];
        d_h_in[i] += d_rh[i] * cache.r[i];
        dr_pre[i] = dr * cache.r[i] * (1.0 - cache.r[i]);
    }
    for (gate, pre) in [("z", &dz_pre), ("r", &dr_pre), ("n", &dn_pre)] {
        let x_in = if gate == "n" { &cache.rh } else { &cache.h_in };
        outer_acc(
            params.grad_slice_mut(&format!("{prefix}.w{gate}")),
            w2,
            in_w,
            pre,
            &cache.x,
        );
        if gate != "n" {
            outer_acc(
                params.grad_slice_mut(&format!("{prefix}.u{gate}")),
                w2,
                w2,
                pre,
                x_in,
            );
        } else {
            outer_acc(
                params.grad_slice_mut(&format!("{prefix}.u{gate}")),
                w2,
                w2,
                pre,
                &cache.rh,
            );
        }
        for (b, &g) in params
            .grad_slice_mut(&format!("{prefix}.b{gate}"))
            .iter_mut()
            .zip(pre.iter())
        {
            *b += g;
        }
        matvec_t_acc(params.slice(&format!("{prefix}.w{gate}")), w2, in_w, pre, &mut d_x);
        if gate != "n" {
            matvec_t_acc(params.slice(&format!("{prefix}.u{gate}")), w2, w2, pre, &mut d_h_in);
        }
    }
    (d_x, d_h_in)
}

/// One forward step. Actor heads return the softmax distribution; critic
/// heads return a single scalar in `output[0]`.
pub fn forward(params: &ParamSet, x: &[f64], hidden: &HiddenState) -> Result<(Vec<f64>, HiddenState, Cache)> {
    let spec = &params.spec;
    spec.validate()?;
    if x.len() != spec.input {
        return Err(Error::Shape(format!(
            "input length {} does not match D_I = {}",
            x.len(),
            spec.input
        )));
    }
    let (w1, w2, o) = (spec.mlp_width, spec.gru_width, spec.output);
    let mut pre1 = vec![0.0; w1];
    matvec(params.slice("mlp1.w1"), w1, spec.input, x, &mut pre1);
    let a1: Vec<f64> = pre1
        .iter()
        .zip(params.slice("mlp1.b1"))
        .map(|(&p, &b)| (p + b).tanh())
        .collect();
    let mut pre2 = vec![0.0; w1];
    matvec(params.slice("mlp1.w2"), w1, w1, &a1, &mut pre2);
    let a2: Vec<f64> = pre2
        .iter()
        .zip(params.slice("mlp1.b2"))
        .map(|(&p, &b)| (p + b).tanh())
        .collect();
    let (h1, g1) = gru_forward(params, "gru1", w1, &a2, &hidden.h1);
    let (h2, g2) = gru_forward(params, "gru2", w2, &h1, &hidden.h2);
    let mut logits = vec![0.0; o];
    matvec(params.slice("head.w"), o, w2, &h2, &mut logits);
    for (l, &b) in logits.iter_mut().zip(params.slice("head.b")) {
        *l += b;
    }
    let probs = match spec.head {
        Head::Softmax => {
            let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let exps: Vec<f64> = logits.iter().map(|&l| (l - max).exp()).collect();
            let total: f64 = exps.iter().sum();
            exps.into_iter().map(|e| e / total).collect()
        }
        Head::Scalar => Vec::new(),
    };
    let output = if spec.head == Head::Softmax { probs.clone() } else { logits.clone() };
    let cache = Cache {
        x: x.to_vec(),
        a1,
        a2,
        g1,
        g2,
        logits,
        probs,
    };
    let new_hidden = HiddenState { h1, h2 };
    Ok((output, new_hidden, cache))
}

/// Reverse-mode step. `d_output` is the loss gradient with respect to the
/// forward output (probabilities or scalar); `d_h1_next`/`d_h2_next` carry
/// hidden-state gradients from the following time step (zeros at the last
/// step). Parameter gradients accumulate into `params.grad`; the returned
/// hidden gradients feed the previous step's call.
pub fn backward(
    params: &mut ParamSet,
    cache: &Cache,
    d_output: &[f64],
    d_h1_next: &[f64],
    d_h2_next: &[f64],
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let spec = params.spec.clone();
    let (w1, w2, o) = (spec.mlp_width, spec.gru_width, spec.output);
    if d_output.len() != o || d_h1_next.len() != w2 || d_h2_next.len() != w2 {
        return Err(Error::Shape("upstream gradient widths do not match the network".into()));
    }
    // head
    let d_logits: Vec<f64> = match spec.head {
        Head::Softmax => {
            let p = &cache.probs;
            let dot: f64 = p.iter().zip(d_output).map(|(a, b)| a * b).sum();
            p.iter().zip(d_output).map(|(&pi, &di)| pi * (di - dot)).collect()
        }
        Head::Scalar => d_output.to_vec(),
    };
    let mut d_h2 = d_h2_next.to_vec();
    matvec_t_acc(params.slice("head.w"), o, w2, &d_logits, &mut d_h2);
    // gru2's output (the head input), reconstructed from its cache
    let h2_out: Vec<f64> = (0..w2)
        .map(|i| (1.0 - cache.g2.z[i]) * cache.g2.n[i] + cache.g2.z[i] * cache.g2.h_in[i])
        .collect();
    outer_acc(params.grad_slice_mut("head.w"), o, w2, &d_logits, &h2_out);
    for (b, &g) in params.grad_slice_mut("head.b").iter_mut().zip(&d_logits) {
        *b += g;
    }
    let (d_h1_from_g2, d_h2_prev) = gru_backward(params, "gru2", w2, &cache.g2, &d_h2);
    let mut d_h1 = d_h1_next.to_vec();
    for (a, b) in d_h1.iter_mut().zip(&d_h1_from_g2) {
        *a += b;
    }
    let (d_a2, d_h1_prev) = gru_backward(params, "gru1", w1, &cache.g1, &d_h1);
    // mlp layer 2
    let d_pre2: Vec<f64> = d_a2
        .iter()
        .zip(&cache.a2)
        .map(|(&d, &a)| d * (1.0 - a * a))
        .collect();
    outer_acc(params.grad_slice_mut("mlp1.w2"), w1, w1, &d_pre2, &cache.a1);
    for (b, &g) in params.grad_slice_mut("mlp1.b2").iter_mut().zip(&d_pre2) {
        *b += g;
    }
    let mut d_a1 = vec![0.0; w1];
    matvec_t_acc(params.slice("mlp1.w2"), w1, w1, &d_pre2, &mut d_a1);
    // mlp layer 1
    let d_pre1: Vec<f64> = d_a1
        .iter()
        .zip(&cache.a1)
        .map(|(&d, &a)| d * (1.0 - a * a))
        .collect();
    outer_acc(params.grad_slice_mut("mlp1.w1"), w1, spec.input, &d_pre1, &cache.x);
    for (b, &g) in params.grad_slice_mut("mlp1.b1").iter_mut().zip(&d_pre1) {
        *b += g;
    }
    let mut d_x = vec![0.0; spec.input];
    matvec_t_acc(params.slice("mlp1.w1"), w1, spec.input, &d_pre1, &mut d_x);
    Ok((d_x, d_h1_prev, d_h2_prev))
}

/// Bias-corrected Adam update using `params.grad`; rejects non-finite
/// gradients before touching any state.
pub fn adam_step(params: &mut ParamSet, lr: f64, beta1: f64, beta2: f64, eps: f64) -> Result<()> {
    if params.grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::Numeric("non-finite gradient; update rejected".into()));
    }
    params.step += 1;
    let t = params.step as f64;
    let bc1 = 1.0 - beta1.powf(t);
    let bc2 = 1.0 - beta2.powf(t);
    for i in 0..params.data.len() {
        let g = params.grad[i];
        params.m[i] = beta1 * params.m[i] + (1.0 - beta1) * g;
        params.v[i] = beta2 * params.v[i] + (1.0 - beta2) * g * g;
        let m_hat = params.m[i] / bc1;
        let v_hat = params.v[i] / bc2;
        params.data[i] -= lr * m_hat / (v_hat.sqrt() + eps);
    }
    Ok(())
}

/// Fill a rows x cols matrix with orthonormal rows (or columns when
/// rows > cols) by Gram-Schmidt on Gaussian draws.
fn orthogonal_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> Vec<f64> {
    let (n, m, transpose) = if rows <= cols { (rows, cols, false) } else { (cols, rows, true) };
    // n orthonormal vectors of length m
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
    while basis.len() < n {
        let mut v: Vec<f64> = (0..m)
            .map(|_| {
                // Box-Muller
                let u1: f64 = rng.gen_range(1e-12..1.0);
                let u2: f64 = rng.gen_range(0.0..1.0);
                (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
            })
            .collect();
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(a, c)| a * c).sum();
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= dot * bi;
            }
        }
        let norm: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-8 {
            v.iter_mut().for_each(|a| *a /= norm);
            basis.push(v);
        }
    }
    let mut w = vec![0.0; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            w[r * cols + c] = if transpose { basis[c][r] } else { basis[r][c] };
        }
    }
    w
}

/// Orthogonal weight matrices, zero biases; the head weights get `gain`
/// (0.01 is the usual choice for actor heads).
pub fn orthogonal_init(spec: &NetworkSpec, rng: &mut impl Rng, head_gain: f64) -> ParamSet {
    let mut params = ParamSet::zeros(spec);
    for (name, rows, cols) in spec.layout() {
        if cols == 0 {
            continue; // bias
        }
        let mut w = orthogonal_matrix(rows, cols, rng);
        if name == "head.w" {
            w.iter_mut().for_each(|v| *v *= head_gain);
        }
        params.slice_mut(name).copy_from_slice(&w);
    }
    params
}

/// Write parameters as little-endian f64s plus a version-tagged JSON
/// sidecar (`<path>.json`) holding the spec.
pub fn save_params(params: &ParamSet, path: &Path) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    let mut bytes = Vec::with_capacity(params.data.len() * 8);
    for v in &params.data {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    file.write_all(&bytes)?;
    let sidecar = serde_json::json!({
        "version": SAVE_VERSION,
        "spec": params.spec,
        "params": params.data.len(),
    });
    let mut side_path = path.as_os_str().to_owned();
    side_path.push(".json");
    std::fs::write(side_path, serde_json::to_string_pretty(&sidecar).unwrap())?;
    Ok(())
}

pub fn load_params(path: &Path) -> Result<ParamSet> {
    let mut side_path = path.as_os_str().to_owned();
    side_path.push(".json");
    let sidecar: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(side_path)?)
        .map_err(|e| Error::Parse { line: 0, msg: format!("sidecar: {e}") })?;
    if sidecar["version"].as_u64() != Some(SAVE_VERSION as u64) {
        return Err(Error::Config(format!("unsupported checkpoint version {}", sidecar["version"])));
    }
    let spec: NetworkSpec = serde_json::from_value(sidecar["spec"].clone())
        .map_err(|e| Error::Parse { line: 0, msg: format!("sidecar spec: {e}") })?;
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() != spec.param_count() * 8 {
        return Err(Error::Shape(format!(
            "checkpoint holds {} bytes, spec needs {}",
            bytes.len(),
            spec.param_count() * 8
        )));
    }
    let mut params = ParamSet::zeros(&spec);
    for (i, chunk) in bytes.chunks_exact(8).enumerate() {
        params.data[i] = f64::from_le_bytes(chunk.try_into().unwrap());
    }
    Ok(params)
}
