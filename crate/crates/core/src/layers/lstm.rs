use crate::error::{Error, Result};
use crate::numcore::{affine_backward_accumulate, affine_forward, glorot_init, sigmoid, Param, ParamSet};

/// LSTM cell with a single fused transform over `[x_t; h_{t-1}]`.
///
/// Rows of `t` and `bias` are laid out in gate order input, forget, output,
/// candidate, each `hidden` rows tall.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmCell {
    pub t: Param,
    pub bias: Param,
    input: usize,
    hidden: usize,
}

/// Everything one step needs for its reverse pass.
#[derive(Clone, Debug)]
pub struct LstmCache {
    z: Vec<f64>,
    i: Vec<f64>,
    f: Vec<f64>,
    o: Vec<f64>,
    g: Vec<f64>,
    c_prev: Vec<f64>,
    tanh_c: Vec<f64>,
}

/// Gradients flowing out of one reverse step.
#[derive(Clone, Debug)]
pub struct LstmStepGrads {
    pub dx: Vec<f64>,
    pub dh_prev: Vec<f64>,
    pub dc_prev: Vec<f64>,
}

impl LstmCell {
    pub fn new(prefix: &str, input: usize, hidden: usize, seed: u64) -> Self {
        let mut bias = Param::zeros(format!("{prefix}.bias"), 4 * hidden, 1);
        bias.value.as_mut_slice()[hidden..2 * hidden].fill(1.0);
        LstmCell {
            t: Param::new(
                format!("{prefix}.t"),
                glorot_init(4 * hidden, input + hidden, seed),
            ),
            bias,
            input,
            hidden,
        }
    }

    pub fn input_size(&self) -> usize {
        self.input
    }

    pub fn hidden_size(&self) -> usize {
        self.hidden
    }

    pub fn zero_state(&self) -> (Vec<f64>, Vec<f64>) {
        (vec![0.0; self.hidden], vec![0.0; self.hidden])
    }

    /// One transition; returns `(h_t, c_t, cache)`.
    pub fn step(
        &self,
        x: &[f64],
        h_prev: &[f64],
        c_prev: &[f64],
    ) -> Result<(Vec<f64>, Vec<f64>, LstmCache)> {
        let h = self.hidden;
        if x.len() != self.input {
            return Err(Error::dim("lstm_step input", self.input, x.len()));
        }
        if h_prev.len() != h || c_prev.len() != h {
            return Err(Error::dim(
                "lstm_step state",
                h,
                format!("h {} / c {}", h_prev.len(), c_prev.len()),
            ));
        }
        let mut z = Vec::with_capacity(self.input + h);
        z.extend_from_slice(x);
        z.extend_from_slice(h_prev);
        let pre = affine_forward(&z, &self.t.value, self.bias.value.as_slice())?;
        let i: Vec<f64> = pre[..h].iter().map(|&v| sigmoid(v)).collect();
        let f: Vec<f64> = pre[h..2 * h].iter().map(|&v| sigmoid(v)).collect();
        let o: Vec<f64> = pre[2 * h..3 * h].iter().map(|&v| sigmoid(v)).collect();
        let g: Vec<f64> = pre[3 * h..].iter().map(|v| v.tanh()).collect();
        let c: Vec<f64> = (0..h).map(|k| f[k] * c_prev[k] + i[k] * g[k]).collect();
        let tanh_c: Vec<f64> = c.iter().map(|v| v.tanh()).collect();
        let h_t: Vec<f64> = (0..h).map(|k| o[k] * tanh_c[k]).collect();
        let cache = LstmCache {
            z,
            i,
            f,
            o,
            g,
            c_prev: c_prev.to_vec(),
            tanh_c,
        };
        Ok((h_t, c, cache))
    }

    /// Runs the cell over a whole sequence from a zero state.
    pub fn forward_sequence(&self, xs: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, Vec<LstmCache>)> {
        let (mut h, mut c) = self.zero_state();
        let mut hs = Vec::with_capacity(xs.len());
        let mut caches = Vec::with_capacity(xs.len());
        for x in xs {
            let (h_t, c_t, cache) = self.step(x, &h, &c)?;
            hs.push(h_t.clone());
            caches.push(cache);
            h = h_t;
            c = c_t;
        }
        Ok((hs, caches))
    }

    /// Reverse pass of a single step given gradients on `h_t` and `c_t`.
    pub fn step_backward(
        &mut self,
        cache: &LstmCache,
        dh: &[f64],
        dc_next: &[f64],
    ) -> Result<LstmStepGrads> {
        let h = self.hidden;
        if dh.len() != h || dc_next.len() != h {
            return Err(Error::dim("lstm_step_backward", h, dh.len()));
        }
        let mut dpre = vec![0.0; 4 * h];
        let mut dc_prev = vec![0.0; h];
        for k in 0..h {
            let (i, f, o, g, tc) = (cache.i[k], cache.f[k], cache.o[k], cache.g[k], cache.tanh_c[k]);
            let dc = dc_next[k] + dh[k] * o * (1.0 - tc * tc);
            dpre[k] = dc * g * i * (1.0 - i);
            dpre[h + k] = dc * cache.c_prev[k] * f * (1.0 - f);
            dpre[2 * h + k] = dh[k] * tc * o * (1.0 - o);
            dpre[3 * h + k] = dc * i * (1.0 - g * g);
            dc_prev[k] = dc * f;
        }
        let mut dz = affine_backward_accumulate(
            &cache.z,
            &self.t.value,
            &dpre,
            &mut self.t.grad,
            self.bias.grad.as_mut_slice(),
        )?;
        let dh_prev = dz.split_off(self.input);
        Ok(LstmStepGrads {
            dx: dz,
            dh_prev,
            dc_prev,
        })
    }

    /// Backpropagation through time. `dh_out[t]` is the loss gradient on
    /// `h_t` from outside the recurrence; returns `dL/dx_t` for every step.
    pub fn backward_through_time(
        &mut self,
        caches: &[LstmCache],
        dh_out: &[Vec<f64>],
    ) -> Result<Vec<Vec<f64>>> {
        if caches.len() != dh_out.len() {
            return Err(Error::dim(
                "lstm_backward_through_time",
                format!("{} caches", caches.len()),
                format!("{} upstream", dh_out.len()),
            ));
        }
        let (mut dh_next, mut dc_next) = self.zero_state();
        let mut dxs = vec![Vec::new(); caches.len()];
        for t in (0..caches.len()).rev() {
            if dh_out[t].len() != self.hidden {
                return Err(Error::dim("lstm_backward_through_time", self.hidden, dh_out[t].len()));
            }
            let dh: Vec<f64> = dh_out[t].iter().zip(&dh_next).map(|(a, b)| a + b).collect();
            let step = self.step_backward(&caches[t], &dh, &dc_next)?;
            dxs[t] = step.dx;
            dh_next = step.dh_prev;
            dc_next = step.dc_prev;
        }
        Ok(dxs)
    }
}

impl ParamSet for LstmCell {
    fn params(&self) -> Vec<&Param> {
        vec![&self.t, &self.bias]
    }

    fn params_mut(&mut self) -> Vec<&mut Param> {
        vec![&mut self.t, &mut self.bias]
    }
}
