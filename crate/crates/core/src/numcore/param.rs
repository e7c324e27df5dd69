use super::matrix::Matrix;
use super::rng::SplitRng;

/// A named trainable tensor and its gradient accumulator.
#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    pub name: String,
    pub value: Matrix,
    pub grad: Matrix,
}

impl Param {
    pub fn new(name: impl Into<String>, value: Matrix) -> Self {
        let grad = Matrix::zeros(value.rows(), value.cols());
        Param {
            name: name.into(),
            value,
            grad,
        }
    }

    pub fn zeros(name: impl Into<String>, rows: usize, cols: usize) -> Self {
        Param::new(name, Matrix::zeros(rows, cols))
    }

    pub fn zero_grad(&mut self) {
        self.grad.fill(0.0);
    }

    pub fn len(&self) -> usize {
        self.value.len()
    }

    pub fn is_empty(&self) -> bool {
        self.value.is_empty()
    }
}

/// Anything that owns trainable parameters, in a fixed visiting order.
pub trait ParamSet {
    fn params(&self) -> Vec<&Param>;
    fn params_mut(&mut self) -> Vec<&mut Param>;

    fn zero_grads(&mut self) {
        for p in self.params_mut() {
            p.zero_grad();
        }
    }

    fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }

    fn grad_norm(&self) -> f64 {
        self.params()
            .iter()
            .map(|p| p.grad.sum_squares())
            .sum::<f64>()
            .sqrt()
    }
}

impl ParamSet for Vec<Param> {
    fn params(&self) -> Vec<&Param> {
        self.iter().collect()
    }

    fn params_mut(&mut self) -> Vec<&mut Param> {
        self.iter_mut().collect()
    }
}

/// Glorot/Xavier uniform initialisation on `±sqrt(6 / (rows + cols))`.
pub fn glorot_init(rows: usize, cols: usize, seed: u64) -> Matrix {
    assert!(rows >= 1 && cols >= 1, "glorot_init needs a non-empty shape");
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    SplitRng::new(seed).uniform_matrix(rows, cols, limit)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn glorot_is_deterministic_and_bounded() {
        assert_eq!(glorot_init(5, 7, 3), glorot_init(5, 7, 3));
        assert_ne!(glorot_init(5, 7, 3), glorot_init(5, 7, 4));
        let big = glorot_init(512, 512, 7);
        let limit = (6.0f64 / 1024.0).sqrt();
        assert!(big.as_slice().iter().all(|v| v.abs() <= limit));
        let one = glorot_init(1, 1, 0);
        assert!(one.get(0, 0).abs() <= 3f64.sqrt());
    }

    #[test]
    fn param_grad_tracks_value_shape() {
        let p = Param::new("w", Matrix::zeros(3, 2));
        assert_eq!(p.grad.shape(), (3, 2));
        let set = vec![p.clone(), Param::zeros("b", 3, 1)];
        assert_eq!(set.param_count(), 9);
    }
}
