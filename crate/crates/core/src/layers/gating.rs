use crate::error::{Error, Result};
use crate::numcore::{
    affine_backward_accumulate, affine_forward, glorot_init, sigmoid_map, Param, ParamSet,
};

/// Multiplicative self-gate `y = σ(W x + b) ⊙ x` over a `d`-dim feature.
#[derive(Clone, Debug, PartialEq)]
pub struct ContextGating {
    pub w: Param,
    pub b: Param,
}

/// Activations kept from [`ContextGating::forward`] for the backward pass.
#[derive(Clone, Debug)]
pub struct GateCache {
    x: Vec<f64>,
    gate: Vec<f64>,
}

impl ContextGating {
    pub fn new(prefix: &str, dim: usize, seed: u64) -> Self {
        ContextGating {
            w: Param::new(format!("{prefix}.w"), glorot_init(dim, dim, seed)),
            b: Param::zeros(format!("{prefix}.b"), dim, 1),
        }
    }

    pub fn dim(&self) -> usize {
        self.w.value.rows()
    }

    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, GateCache)> {
        if x.len() != self.dim() {
            return Err(Error::dim("context_gate", self.dim(), x.len()));
        }
        let pre = affine_forward(x, &self.w.value, self.b.value.as_slice())?;
        let gate = sigmoid_map(&pre);
        let y = gate.iter().zip(x).map(|(g, v)| g * v).collect();
        Ok((
            y,
            GateCache {
                x: x.to_vec(),
                gate,
            },
        ))
    }

    /// Accumulates parameter gradients and returns `dL/dx`.
    pub fn backward(&mut self, cache: &GateCache, dy: &[f64]) -> Result<Vec<f64>> {
        if dy.len() != self.dim() || cache.x.len() != self.dim() {
            return Err(Error::dim("context_gate_backward", self.dim(), dy.len()));
        }
        // y_i = s_i x_i, s = σ(a): direct path plus the path through the gate
        let dpre: Vec<f64> = dy
            .iter()
            .zip(&cache.gate)
            .zip(&cache.x)
            .map(|((d, s), x)| d * x * s * (1.0 - s))
            .collect();
        let mut dx = affine_backward_accumulate(
            &cache.x,
            &self.w.value,
            &dpre,
            &mut self.w.grad,
            self.b.grad.as_mut_slice(),
        )?;
        for ((g, d), s) in dx.iter_mut().zip(dy).zip(&cache.gate) {
            *g += d * s;
        }
        Ok(dx)
    }
}

impl ParamSet for ContextGating {
    fn params(&self) -> Vec<&Param> {
        vec![&self.w, &self.b]
    }

    fn params_mut(&mut self) -> Vec<&mut Param> {
        vec![&mut self.w, &mut self.b]
    }
}
