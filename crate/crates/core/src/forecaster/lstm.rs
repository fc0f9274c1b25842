//! Single-layer LSTM with scalar input and a sigmoid regression head, plus
//! full backpropagation through time.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    Forget,
    Input,
    /// Candidate cell input, `a_t`.
    Candidate,
    Output,
}

impl Gate {
    pub const ALL: [Gate; 4] = [Gate::Forget, Gate::Input, Gate::Candidate, Gate::Output];

    fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Gate::Forget => "forget",
            Gate::Input => "input",
            Gate::Candidate => "candidate",
            Gate::Output => "output",
        }
    }
}

/// All parameters in one flat vector:
/// `[W (4H x H, row-major) | U (4H) | b (4H) | head W (H) | head b]`,
/// with the gate blocks ordered forget, input, candidate, output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmParams {
    hidden: usize,
    data: Vec<f64>,
}

impl LstmParams {
    pub fn n_params(hidden: usize) -> usize {
        4 * hidden * hidden + 9 * hidden + 1
    }

    pub fn zeros(hidden: usize) -> Self {
        Self {
            hidden,
            data: vec![0.0; Self::n_params(hidden)],
        }
    }

    /// Uniform in `[-1/sqrt(H), 1/sqrt(H)]`.
    pub fn init<R: Rng>(hidden: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (hidden as f64).sqrt();
        let data = (0..Self::n_params(hidden))
            .map(|_| rng.gen_range(-bound..=bound))
            .collect();
        Self { hidden, data }
    }

    pub fn from_flat(hidden: usize, data: Vec<f64>) -> Result<Self> {
        if hidden == 0 {
            return Err(Error::Invalid("hidden size must be at least 1".into()));
        }
        if data.len() != Self::n_params(hidden) {
            return Err(Error::Invalid(format!(
                "{} parameters given, hidden size {hidden} needs {}",
                data.len(),
                Self::n_params(hidden)
            )));
        }
        if let Some(index) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { hidden, data })
    }

    pub fn hidden_size(&self) -> usize {
        self.hidden
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn as_flat_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    fn offsets(&self) -> (usize, usize, usize, usize) {
        let h = self.hidden;
        let u = 4 * h * h;
        let b = u + 4 * h;
        let head = b + 4 * h;
        (u, b, head, head + h)
    }

    /// Recurrent weights of one gate, `H x H` row-major.
    pub fn w(&self, gate: Gate) -> &[f64] {
        let hh = self.hidden * self.hidden;
        &self.data[gate.index() * hh..(gate.index() + 1) * hh]
    }

    pub fn w_mut(&mut self, gate: Gate) -> &mut [f64] {
        let hh = self.hidden * self.hidden;
        &mut self.data[gate.index() * hh..(gate.index() + 1) * hh]
    }

    /// Input weights of one gate (input dimension 1).
    pub fn u(&self, gate: Gate) -> &[f64] {
        let (u, ..) = self.offsets();
        let h = self.hidden;
        &self.data[u + gate.index() * h..u + (gate.index() + 1) * h]
    }

    pub fn u_mut(&mut self, gate: Gate) -> &mut [f64] {
        let (u, ..) = self.offsets();
        let h = self.hidden;
        &mut self.data[u + gate.index() * h..u + (gate.index() + 1) * h]
    }

    pub fn b(&self, gate: Gate) -> &[f64] {
        let (_, b, ..) = self.offsets();
        let h = self.hidden;
        &self.data[b + gate.index() * h..b + (gate.index() + 1) * h]
    }

    pub fn b_mut(&mut self, gate: Gate) -> &mut [f64] {
        let (_, b, ..) = self.offsets();
        let h = self.hidden;
        &mut self.data[b + gate.index() * h..b + (gate.index() + 1) * h]
    }

    pub fn head_w(&self) -> &[f64] {
        let (_, _, head, hb) = self.offsets();
        &self.data[head..hb]
    }

    pub fn head_w_mut(&mut self) -> &mut [f64] {
        let (_, _, head, hb) = self.offsets();
        &mut self.data[head..hb]
    }

    pub fn head_b(&self) -> f64 {
        self.data[self.data.len() - 1]
    }

    pub fn set_head_b(&mut self, value: f64) {
        let last = self.data.len() - 1;
        self.data[last] = value;
    }

    fn stacked_w(&self) -> &[f64] {
        &self.data[..4 * self.hidden * self.hidden]
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Dot product with a fixed summation order (16 strided partial sums), so
/// every instruction set below gives bit-identical results.
#[inline(always)]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 16];
    let ca = a.chunks_exact(16);
    let cb = b.chunks_exact(16);
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..16 {
            acc[k] += x[k] * y[k];
        }
    }
    acc.iter().sum::<f64>() + tail
}

/// `out[k] = W[k, :] . x` for row-major `W` with `x.len()` columns.
#[inline(always)]
fn matvec_generic(w: &[f64], x: &[f64], out: &mut [f64]) {
    let n = x.len();
    for (k, o) in out.iter_mut().enumerate() {
        *o = dot(&w[k * n..(k + 1) * n], x);
    }
}

/// `out += sum_k c[k] W[k, :]`, accumulated in row order.
#[inline(always)]
fn matvec_t_generic(w: &[f64], c: &[f64], out: &mut [f64]) {
    let n = out.len();
    for (k, &ck) in c.iter().enumerate() {
        if ck != 0.0 {
            for (o, wv) in out.iter_mut().zip(&w[k * n..(k + 1) * n]) {
                *o += ck * wv;
            }
        }
    }
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn matvec_avx2(w: &[f64], x: &[f64], out: &mut [f64]) {
    matvec_generic(w, x, out)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn matvec_t_avx2(w: &[f64], c: &[f64], out: &mut [f64]) {
    matvec_t_generic(w, c, out)
}

// Same operations in the same order either way; rustc never contracts
// separate multiplies and adds into FMA, so wider registers change speed only.
fn matvec(w: &[f64], x: &[f64], out: &mut [f64]) {
    #[cfg(target_arch = "x86_64")]
    if std::arch::is_x86_feature_detected!("avx2") {
        // SAFETY: the feature was detected at runtime.
        return unsafe { matvec_avx2(w, x, out) };
    }
    matvec_generic(w, x, out)
}

fn matvec_t(w: &[f64], c: &[f64], out: &mut [f64]) {
    #[cfg(target_arch = "x86_64")]
    if std::arch::is_x86_feature_detected!("avx2") {
        // SAFETY: the feature was detected at runtime.
        return unsafe { matvec_t_avx2(w, c, out) };
    }
    matvec_t_generic(w, c, out)
}

/// Post-activation gates `[f | i | a | o]` for one step, each of length H.
fn gates(p: &LstmParams, x: f64, h_prev: &[f64], out: &mut [f64]) {
    let h = p.hidden;
    let (u, b, ..) = p.offsets();
    matvec(p.stacked_w(), h_prev, out);
    for (k, z) in out.iter_mut().enumerate() {
        let pre = *z + p.data[u + k] * x + p.data[b + k];
        *z = if k / h == Gate::Candidate.index() {
            pre.tanh()
        } else {
            sigmoid(pre)
        };
    }
}

fn check_gates(g: &[f64], hidden: usize) -> Result<()> {
    for gate in Gate::ALL {
        let block = &g[gate.index() * hidden..(gate.index() + 1) * hidden];
        if block.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteGate { gate: gate.name() });
        }
    }
    Ok(())
}

/// Gate activations of one step.
#[derive(Debug, Clone, PartialEq)]
pub struct GateValues {
    pub forget: Vec<f64>,
    pub input: Vec<f64>,
    pub candidate: Vec<f64>,
    pub output: Vec<f64>,
}

pub fn gate_values(p: &LstmParams, x: f64, h_prev: &[f64]) -> Result<GateValues> {
    let hsz = p.hidden;
    if h_prev.len() != hsz {
        return Err(Error::Invalid(format!("state length {} does not match hidden size {hsz}", h_prev.len())));
    }
    let mut g = vec![0.0; 4 * hsz];
    gates(p, x, h_prev, &mut g);
    check_gates(&g, hsz)?;
    let block = |gate: Gate| g[gate.index() * hsz..(gate.index() + 1) * hsz].to_vec();
    Ok(GateValues {
        forget: block(Gate::Forget),
        input: block(Gate::Input),
        candidate: block(Gate::Candidate),
        output: block(Gate::Output),
    })
}

/// One recurrence step; returns `(h_t, C_t)`.
pub fn lstm_step(p: &LstmParams, x: f64, h_prev: &[f64], c_prev: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let hsz = p.hidden;
    if h_prev.len() != hsz || c_prev.len() != hsz {
        return Err(Error::Invalid(format!(
            "state lengths {}/{} do not match hidden size {hsz}",
            h_prev.len(),
            c_prev.len()
        )));
    }
    let mut g = vec![0.0; 4 * hsz];
    gates(p, x, h_prev, &mut g);
    check_gates(&g, hsz)?;
    let (f, rest) = g.split_at(hsz);
    let (i, rest) = rest.split_at(hsz);
    let (a, o) = rest.split_at(hsz);
    let c: Vec<f64> = (0..hsz).map(|k| c_prev[k] * f[k] + a[k] * i[k]).collect();
    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteGate { gate: "cell" });
    }
    let h = (0..hsz).map(|k| o[k] * c[k].tanh()).collect();
    Ok((h, c))
}

/// `sigma(W h + b)`.
pub fn forecast_head(p: &LstmParams, h: &[f64]) -> f64 {
    sigmoid(dot(p.head_w(), h) + p.head_b())
}

/// Runs `inputs` from a zero state and returns the head output after each step.
pub fn run_sequence(p: &LstmParams, inputs: &[f64]) -> Result<Vec<f64>> {
    let hsz = p.hidden;
    let mut h = vec![0.0; hsz];
    let mut c = vec![0.0; hsz];
    let mut out = Vec::with_capacity(inputs.len());
    for &x in inputs {
        let (h2, c2) = lstm_step(p, x, &h, &c)?;
        h = h2;
        c = c2;
        out.push(forecast_head(p, &h));
    }
    Ok(out)
}

/// Mean squared error of the head outputs against `targets`.
pub fn sequence_loss(p: &LstmParams, inputs: &[f64], targets: &[f64]) -> Result<f64> {
    let pred = run_sequence(p, inputs)?;
    Ok(pred.iter().zip(targets).map(|(y, t)| (y - t) * (y - t)).sum::<f64>() / targets.len() as f64)
}

/// Loss and its gradient (same flat layout as the parameters) by full
/// backpropagation through time, starting from a zero state.
pub fn loss_and_gradient(p: &LstmParams, inputs: &[f64], targets: &[f64]) -> Result<(f64, Vec<f64>)> {
    assert_eq!(inputs.len(), targets.len(), "inputs and targets differ in length");
    let hsz = p.hidden;
    let g4 = 4 * hsz;
    let steps = inputs.len();
    if steps == 0 {
        return Err(Error::TooShort {
            what: "training steps",
            needed: 1,
            got: 0,
        });
    }

    // Forward, caching everything the backward pass needs. Row t of `hs`
    // holds h_{t-1} (row 0 is the zero state), likewise for `cs`.
    let mut gs = vec![0.0; steps * g4];
    let mut hs = vec![0.0; (steps + 1) * hsz];
    let mut cs = vec![0.0; (steps + 1) * hsz];
    let mut yhat = vec![0.0; steps];
    for t in 0..steps {
        let (prev, next) = hs.split_at_mut((t + 1) * hsz);
        let h_prev = &prev[t * hsz..];
        let g = &mut gs[t * g4..(t + 1) * g4];
        gates(p, inputs[t], h_prev, g);
        check_gates(g, hsz)?;
        let h_next = &mut next[..hsz];
        for k in 0..hsz {
            let c = cs[t * hsz + k] * g[k] + g[2 * hsz + k] * g[hsz + k];
            cs[(t + 1) * hsz + k] = c;
            h_next[k] = g[3 * hsz + k] * c.tanh();
        }
        yhat[t] = forecast_head(p, h_next);
    }
    let loss = yhat.iter().zip(targets).map(|(y, t)| (y - t) * (y - t)).sum::<f64>() / steps as f64;
    if !loss.is_finite() {
        return Err(Error::NonFinite { index: 0 });
    }

    let mut grad = vec![0.0; p.data.len()];
    let (u_off, b_off, head_off, hb_off) = p.offsets();
    let w = p.stacked_w();
    let head_w = p.head_w();
    // dZ holds the pre-activation gradients per step; dW = dZ^T H_prev at the end.
    let mut dz_all = vec![0.0; steps * g4];
    let mut dh_next = vec![0.0; hsz];
    let mut dc_next = vec![0.0; hsz];
    let mut dh = vec![0.0; hsz];
    for t in (0..steps).rev() {
        let h_t = &hs[(t + 1) * hsz..(t + 2) * hsz];
        let c_prev = &cs[t * hsz..(t + 1) * hsz];
        let c_t = &cs[(t + 1) * hsz..(t + 2) * hsz];
        let g = &gs[t * g4..(t + 1) * g4];

        let dy = 2.0 * (yhat[t] - targets[t]) / steps as f64;
        let dzh = dy * yhat[t] * (1.0 - yhat[t]);
        for k in 0..hsz {
            grad[head_off + k] += dzh * h_t[k];
            dh[k] = dh_next[k] + dzh * head_w[k];
        }
        grad[hb_off] += dzh;

        let dz = &mut dz_all[t * g4..(t + 1) * g4];
        for k in 0..hsz {
            let (f, i, a, o) = (g[k], g[hsz + k], g[2 * hsz + k], g[3 * hsz + k]);
            let tc = c_t[k].tanh();
            let dc = dh[k] * o * (1.0 - tc * tc) + dc_next[k];
            dz[k] = dc * c_prev[k] * f * (1.0 - f);
            dz[hsz + k] = dc * a * i * (1.0 - i);
            dz[2 * hsz + k] = dc * i * (1.0 - a * a);
            dz[3 * hsz + k] = dh[k] * tc * o * (1.0 - o);
            dc_next[k] = dc * f;
        }
        dh_next.iter_mut().for_each(|v| *v = 0.0);
        matvec_t(w, dz, &mut dh_next);
        for (k, &dzk) in dz.iter().enumerate() {
            grad[u_off + k] += dzk * inputs[t];
            grad[b_off + k] += dzk;
        }
    }

    // dW (4H x H) = dZ^T (4H x T) * H_prev (T x H)
    unsafe {
        matrixmultiply::dgemm(
            g4,
            steps,
            hsz,
            1.0,
            dz_all.as_ptr(),
            1,
            g4 as isize,
            hs.as_ptr(),
            hsz as isize,
            1,
            0.0,
            grad.as_mut_ptr(),
            hsz as isize,
            1,
        );
    }
    Ok((loss, grad))
}

/// Maximum relative error between the analytic gradient and central finite
/// differences (step `1e-5`) over every parameter. Relative error is
/// `|a - n| / max(|a|, |n|, 1e-6)`.
pub fn gradient_check(p: &LstmParams, inputs: &[f64], targets: &[f64]) -> Result<f64> {
    const STEP: f64 = 1e-5;
    let (_, analytic) = loss_and_gradient(p, inputs, targets)?;
    let mut probe = p.clone();
    let mut worst = 0.0_f64;
    for (k, &a) in analytic.iter().enumerate() {
        let orig = probe.data[k];
        probe.data[k] = orig + STEP;
        let up = sequence_loss(&probe, inputs, targets)?;
        probe.data[k] = orig - STEP;
        let down = sequence_loss(&probe, inputs, targets)?;
        probe.data[k] = orig;
        let numeric = (up - down) / (2.0 * STEP);
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
        worst = worst.max(rel);
    }
    Ok(worst)
}
