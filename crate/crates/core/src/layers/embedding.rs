use crate::error::{Error, Result};
use crate::numcore::{affine_backward_accumulate, affine_forward, glorot_init, Param, ParamSet};

/// Nonlinear projection `tanh(W x + b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    pub w: Param,
    pub b: Param,
}

#[derive(Clone, Debug)]
pub struct EmbedCache {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Embedding {
    pub fn new(prefix: &str, input: usize, output: usize, seed: u64) -> Self {
        Embedding {
            w: Param::new(format!("{prefix}.w"), glorot_init(output, input, seed)),
            b: Param::zeros(format!("{prefix}.b"), output, 1),
        }
    }

    pub fn input_size(&self) -> usize {
        self.w.value.cols()
    }

    pub fn output_size(&self) -> usize {
        self.w.value.rows()
    }

    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, EmbedCache)> {
        if x.len() != self.input_size() {
            return Err(Error::dim("embed", self.input_size(), x.len()));
        }
        let y: Vec<f64> = affine_forward(x, &self.w.value, self.b.value.as_slice())?
            .into_iter()
            .map(f64::tanh)
            .collect();
        Ok((
            y.clone(),
            EmbedCache { x: x.to_vec(), y },
        ))
    }

    pub fn backward(&mut self, cache: &EmbedCache, dy: &[f64]) -> Result<Vec<f64>> {
        if dy.len() != self.output_size() {
            return Err(Error::dim("embed_backward", self.output_size(), dy.len()));
        }
        let dpre: Vec<f64> = dy.iter().zip(&cache.y).map(|(d, y)| d * (1.0 - y * y)).collect();
        affine_backward_accumulate(
            &cache.x,
            &self.w.value,
            &dpre,
            &mut self.w.grad,
            self.b.grad.as_mut_slice(),
        )
    }
}

impl ParamSet for Embedding {
    fn params(&self) -> Vec<&Param> {
        vec![&self.w, &self.b]
    }

    fn params_mut(&mut self) -> Vec<&mut Param> {
        vec![&mut self.w, &mut self.b]
    }
}

/// Plain affine map, bias optional. Used for the fusion projection and
/// the regression head.
#[derive(Clone, Debug, PartialEq)]
pub struct Linear {
    pub w: Param,
    pub b: Option<Param>,
}

impl Linear {
    pub fn new(prefix: &str, input: usize, output: usize, bias: bool, seed: u64) -> Self {
        Linear {
            w: Param::new(format!("{prefix}.w"), glorot_init(output, input, seed)),
            b: bias.then(|| Param::zeros(format!("{prefix}.b"), output, 1)),
        }
    }

    pub fn input_size(&self) -> usize {
        self.w.value.cols()
    }

    pub fn output_size(&self) -> usize {
        self.w.value.rows()
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        match &self.b {
            Some(b) => affine_forward(x, &self.w.value, b.value.as_slice()),
            None => self.w.value.matvec(x),
        }
    }

    /// Input `x` is the same vector passed to `forward`.
    pub fn backward(&mut self, x: &[f64], dy: &[f64]) -> Result<Vec<f64>> {
        let mut scratch;
        let db: &mut [f64] = match &mut self.b {
            Some(b) => b.grad.as_mut_slice(),
            None => {
                scratch = vec![0.0; dy.len()];
                &mut scratch
            }
        };
        affine_backward_accumulate(x, &self.w.value, dy, &mut self.w.grad, db)
    }
}

impl ParamSet for Linear {
    fn params(&self) -> Vec<&Param> {
        let mut v = vec![&self.w];
        v.extend(self.b.as_ref());
        v
    }

    fn params_mut(&mut self) -> Vec<&mut Param> {
        let mut v = vec![&mut self.w];
        v.extend(self.b.as_mut());
        v
    }
}
