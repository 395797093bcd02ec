//! LSTM layers with explicit backpropagation through time.
//!
//! Gate pre-activations are stacked as `[input, forget, candidate, output]`:
//!
//! ```text
//! z = W x_t + U h_{t-1} + b
//! i = σ(z_i)  f = σ(z_f)  g = tanh(z_g)  o = σ(z_o)
//! c_t = f ⊙ c_{t-1} + i ⊙ g
//! h_t = o ⊙ tanh(c_t)
//! ```
//!
//! A masked timestep carries `h` and `c` forward unchanged.

use rand::Rng;

use super::dropout::dropout_mask_with;
use super::params::{prefixed, prefixed_mut, Parameterized};
use super::tensor::{sigmoid, Matrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LstmLayer {
    /// `4h × input`
    pub w: Matrix,
    /// `4h × h`
    pub u: Matrix,
    /// `4h × 1`
    pub b: Matrix,
}

#[derive(Debug, Clone)]
pub struct LstmTrace {
    /// Output states `S_1..S_n`.
    pub h: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
    /// Post-activation gates `[i, f, g, o]` per step; `None` where masked.
    gates: Vec<Option<Vec<f64>>>,
    tanh_c: Vec<Vec<f64>>,
    h0: Vec<f64>,
    c0: Vec<f64>,
}

impl LstmTrace {
    pub fn final_h(&self) -> &[f64] {
        self.h.last().unwrap_or(&self.h0)
    }

    pub fn final_c(&self) -> &[f64] {
        self.c.last().unwrap_or(&self.c0)
    }
}

pub struct LstmGrads {
    pub d_inputs: Vec<Vec<f64>>,
    pub d_h0: Vec<f64>,
    pub d_c0: Vec<f64>,
}

impl LstmLayer {
    /// Glorot-uniform weights, zero bias except +1 on the forget gate.
    pub fn new<R: Rng + ?Sized>(input: usize, hidden: usize, scale: f64, rng: &mut R) -> Self {
        let mut b = Matrix::zeros(4 * hidden, 1);
        b.data[hidden..2 * hidden].iter_mut().for_each(|x| *x = 1.0);
        LstmLayer {
            w: Matrix::glorot(4 * hidden, input, scale, rng),
            u: Matrix::glorot(4 * hidden, hidden, scale, rng),
            b,
        }
    }

    pub fn input_size(&self) -> usize {
        self.w.cols
    }

    pub fn hidden_size(&self) -> usize {
        self.u.cols
    }

    pub fn forward(
        &self,
        inputs: &[Vec<f64>],
        mask: &[bool],
        init: Option<(&[f64], &[f64])>,
    ) -> Result<LstmTrace> {
        let h = self.hidden_size();
        let (h0, c0) = match init {
            Some((h0, c0)) => (h0.to_vec(), c0.to_vec()),
            None => (vec![0.0; h], vec![0.0; h]),
        };
        let n = inputs.len();
        let mut trace = LstmTrace {
            h: Vec::with_capacity(n),
            c: Vec::with_capacity(n),
            gates: Vec::with_capacity(n),
            tanh_c: Vec::with_capacity(n),
            h0,
            c0,
        };
        for (t, x) in inputs.iter().enumerate() {
            let h_prev = trace.h.last().unwrap_or(&trace.h0).clone();
            let c_prev = trace.c.last().unwrap_or(&trace.c0).clone();
            if !mask[t] {
                trace.tanh_c.push(c_prev.iter().map(|v| v.tanh()).collect());
                trace.h.push(h_prev);
                trace.c.push(c_prev);
                trace.gates.push(None);
                continue;
            }
            let (z, c, tc, hs) = self.cell(x, &h_prev, &c_prev);
            if !hs.iter().chain(&c).all(|v| v.is_finite()) {
                return Err(Error::NonFinite(format!("LSTM state at timestep {t}")));
            }
            trace.gates.push(Some(z));
            trace.tanh_c.push(tc);
            trace.h.push(hs);
            trace.c.push(c);
        }
        Ok(trace)
    }

    /// Gate activations, new cell, `tanh` of the cell and new output.
    fn cell(
        &self,
        x: &[f64],
        h_prev: &[f64],
        c_prev: &[f64],
    ) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
        let h = self.hidden_size();
        let mut z = self.b.data.clone();
        self.w.matvec_add(x, &mut z);
        self.u.matvec_add(h_prev, &mut z);
        for (k, v) in z.iter_mut().enumerate() {
            *v = if (2 * h..3 * h).contains(&k) {
                v.tanh()
            } else {
                sigmoid(*v)
            };
        }
        let (i, rest) = z.split_at(h);
        let (f, rest) = rest.split_at(h);
        let (g, o) = rest.split_at(h);
        let c: Vec<f64> = (0..h).map(|k| f[k] * c_prev[k] + i[k] * g[k]).collect();
        let tc: Vec<f64> = c.iter().map(|v| v.tanh()).collect();
        let hs: Vec<f64> = (0..h).map(|k| o[k] * tc[k]).collect();
        (z, c, tc, hs)
    }

    /// One unmasked inference step; returns the new `(h, c)`.
    pub fn step(&self, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (_, c, _, h) = self.cell(x, h_prev, c_prev);
        (h, c)
    }

    /// Backpropagation through time.
    ///
    /// `d_h[t]` is the loss gradient flowing into `S_t` from above;
    /// `d_c_final` is an extra gradient on the last cell state (used when the
    /// final state initializes another network).
    pub fn backward(
        &self,
        inputs: &[Vec<f64>],
        trace: &LstmTrace,
        d_h: &[Vec<f64>],
        d_c_final: Option<&[f64]>,
        grad: &mut LstmLayer,
    ) -> LstmGrads {
        let h = self.hidden_size();
        let n = inputs.len();
        let mut d_inputs = vec![vec![0.0; self.input_size()]; n];
        let mut dh_next = vec![0.0; h];
        let mut dc_next = d_c_final.map_or_else(|| vec![0.0; h], <[f64]>::to_vec);
        let mut dz = vec![0.0; 4 * h];
        for t in (0..n).rev() {
            for k in 0..h {
                dh_next[k] += d_h[t][k];
            }
            let Some(gates) = &trace.gates[t] else {
                // masked: state was copied, gradient passes straight through
                continue;
            };
            let c_prev = if t == 0 { &trace.c0 } else { &trace.c[t - 1] };
            let h_prev = if t == 0 { &trace.h0 } else { &trace.h[t - 1] };
            let tc = &trace.tanh_c[t];
            let (i, rest) = gates.split_at(h);
            let (f, rest) = rest.split_at(h);
            let (g, o) = rest.split_at(h);
            for k in 0..h {
                let dh = dh_next[k];
                let dc = dc_next[k] + dh * o[k] * (1.0 - tc[k] * tc[k]);
                dz[k] = dc * g[k] * i[k] * (1.0 - i[k]);
                dz[h + k] = dc * c_prev[k] * f[k] * (1.0 - f[k]);
                dz[2 * h + k] = dc * i[k] * (1.0 - g[k] * g[k]);
                dz[3 * h + k] = dh * tc[k] * o[k] * (1.0 - o[k]);
                dc_next[k] = dc * f[k];
            }
            grad.w.outer_add(&dz, &inputs[t]);
            grad.u.outer_add(&dz, h_prev);
            for (gb, d) in grad.b.data.iter_mut().zip(&dz) {
                *gb += d;
            }
            self.w.matvec_t_add(&dz, &mut d_inputs[t]);
            let mut dh_prev = vec![0.0; h];
            self.u.matvec_t_add(&dz, &mut dh_prev);
            dh_next = dh_prev;
        }
        LstmGrads {
            d_inputs,
            d_h0: dh_next,
            d_c0: dc_next,
        }
    }
}

impl Parameterized for LstmLayer {
    fn blocks(&self) -> Vec<(String, &Matrix)> {
        vec![
            ("w".into(), &self.w),
            ("u".into(), &self.u),
            ("b".into(), &self.b),
        ]
    }

    fn blocks_mut(&mut self) -> Vec<(String, &mut Matrix)> {
        vec![
            ("w".into(), &mut self.w),
            ("u".into(), &mut self.u),
            ("b".into(), &mut self.b),
        ]
    }
}

/// Stacked LSTM layers with optional dropout on every layer input.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmStack {
    pub layers: Vec<LstmLayer>,
}

#[derive(Debug, Clone)]
pub struct StackTrace {
    /// Input actually fed to each layer (after dropout).
    layer_inputs: Vec<Vec<Vec<f64>>>,
    dropout: Vec<Option<Vec<Vec<f64>>>>,
    pub layers: Vec<LstmTrace>,
}

impl StackTrace {
    pub fn outputs(&self) -> &[Vec<f64>] {
        &self.layers.last().expect("non-empty stack").h
    }

    pub fn top(&self) -> &LstmTrace {
        self.layers.last().expect("non-empty stack")
    }
}

/// Dropout applied during a training forward pass.
pub struct DropoutCtx<'r, R: Rng + ?Sized> {
    pub rate: f64,
    pub rng: &'r mut R,
}

impl LstmStack {
    pub fn new<R: Rng + ?Sized>(input: usize, sizes: &[usize], scale: f64, rng: &mut R) -> Self {
        let mut layers = Vec::with_capacity(sizes.len());
        let mut prev = input;
        for &s in sizes {
            layers.push(LstmLayer::new(prev, s, scale, rng));
            prev = s;
        }
        LstmStack { layers }
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.layers.iter().map(LstmLayer::hidden_size).collect()
    }

    pub fn output_size(&self) -> usize {
        self.layers.last().map_or(0, LstmLayer::hidden_size)
    }

    /// `init` seeds the bottom layer's state; upper layers start at zero.
    pub fn forward<R: Rng + ?Sized>(
        &self,
        inputs: Vec<Vec<f64>>,
        mask: &[bool],
        init: Option<(&[f64], &[f64])>,
        mut dropout: Option<&mut DropoutCtx<'_, R>>,
    ) -> Result<StackTrace> {
        let mut layer_inputs = Vec::with_capacity(self.layers.len());
        let mut masks = Vec::with_capacity(self.layers.len());
        let mut traces: Vec<LstmTrace> = Vec::with_capacity(self.layers.len());
        let mut current = inputs;
        for (l, layer) in self.layers.iter().enumerate() {
            let m = match dropout.as_deref_mut() {
                Some(ctx) if ctx.rate > 0.0 => {
                    let m: Vec<Vec<f64>> = current
                        .iter()
                        .map(|x| dropout_mask_with(x.len(), ctx.rate, ctx.rng))
                        .collect();
                    for (x, mk) in current.iter_mut().zip(&m) {
                        x.iter_mut().zip(mk).for_each(|(v, k)| *v *= k);
                    }
                    Some(m)
                }
                _ => None,
            };
            let trace = layer.forward(&current, mask, if l == 0 { init } else { None })?;
            let next = trace.h.clone();
            layer_inputs.push(current);
            masks.push(m);
            traces.push(trace);
            current = next;
        }
        Ok(StackTrace {
            layer_inputs,
            dropout: masks,
            layers: traces,
        })
    }

    /// Returns gradients w.r.t. the stack input (before dropout) and the
    /// bottom layer's initial state.
    pub fn backward(
        &self,
        trace: &StackTrace,
        d_top: Vec<Vec<f64>>,
        d_c_top_final: Option<&[f64]>,
        grad: &mut LstmStack,
    ) -> LstmGrads {
        let mut d_out = d_top;
        let mut last = None;
        for l in (0..self.layers.len()).rev() {
            let mut g = self.layers[l].backward(
                &trace.layer_inputs[l],
                &trace.layers[l],
                &d_out,
                if l + 1 == self.layers.len() {
                    d_c_top_final
                } else {
                    None
                },
                &mut grad.layers[l],
            );
            if let Some(m) = &trace.dropout[l] {
                for (d, mk) in g.d_inputs.iter_mut().zip(m) {
                    d.iter_mut().zip(mk).for_each(|(v, k)| *v *= k);
                }
            }
            d_out = std::mem::take(&mut g.d_inputs);
            last = Some(g);
        }
        let mut g = last.expect("non-empty stack");
        g.d_inputs = d_out;
        g
    }
}

/// Per-layer `(h, c)` of a stack, for step-by-step inference.
pub type StackState = Vec<(Vec<f64>, Vec<f64>)>;

impl LstmStack {
    /// Zero state everywhere except the bottom layer, which takes `init`.
    pub fn initial_state(&self, init: Option<(&[f64], &[f64])>) -> StackState {
        self.layers
            .iter()
            .enumerate()
            .map(|(l, layer)| match init {
                Some((h, c)) if l == 0 => (h.to_vec(), c.to_vec()),
                _ => (
                    vec![0.0; layer.hidden_size()],
                    vec![0.0; layer.hidden_size()],
                ),
            })
            .collect()
    }

    /// Advances every layer by one input and returns the top output.
    pub fn step(&self, x: &[f64], state: &mut StackState) -> Vec<f64> {
        let mut input = x.to_vec();
        for (layer, (h, c)) in self.layers.iter().zip(state.iter_mut()) {
            let (nh, nc) = layer.step(&input, h, c);
            *h = nh;
            *c = nc;
            input = h.clone();
        }
        input
    }
}

impl Parameterized for LstmStack {
    fn blocks(&self) -> Vec<(String, &Matrix)> {
        self.layers
            .iter()
            .enumerate()
            .flat_map(|(i, l)| prefixed(&i.to_string(), l.blocks()))
            .collect()
    }

    fn blocks_mut(&mut self) -> Vec<(String, &mut Matrix)> {
        self.layers
            .iter_mut()
            .enumerate()
            .flat_map(|(i, l)| prefixed_mut(&i.to_string(), l.blocks_mut()))
            .collect()
    }
}
