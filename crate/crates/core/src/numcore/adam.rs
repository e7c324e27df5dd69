use super::matrix::Matrix;
use super::param::{Param, ParamSet};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 5e-4,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First/second moment estimates for one parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub m: Matrix,
    pub v: Matrix,
    pub step: u64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn for_param(p: &Param, cfg: AdamConfig) -> Self {
        AdamState {
            m: Matrix::zeros(p.value.rows(), p.value.cols()),
            v: Matrix::zeros(p.value.rows(), p.value.cols()),
            step: 0,
            lr: cfg.lr,
            beta1: cfg.beta1,
            beta2: cfg.beta2,
            eps: cfg.eps,
        }
    }
}

/// One bias-corrected Adam update. The gradient is left in place.
pub fn adam_step(p: &mut Param, s: &mut AdamState) {
    assert_eq!(p.value.shape(), s.m.shape(), "adam state does not match {}", p.name);
    s.step += 1;
    let t = s.step as i32;
    let c1 = 1.0 - s.beta1.powi(t);
    let c2 = 1.0 - s.beta2.powi(t);
    let value = p.value.as_mut_slice();
    let grad = p.grad.as_slice();
    let m = s.m.as_mut_slice();
    let v = s.v.as_mut_slice();
    for i in 0..value.len() {
        let g = grad[i];
        m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g;
        v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * g * g;
        let m_hat = m[i] / c1;
        let v_hat = v[i] / c2;
        value[i] -= s.lr * m_hat / (v_hat.sqrt() + s.eps);
    }
    assert!(p.value.is_finite(), "adam produced non-finite values in {}", p.name);
}

/// Adam over a whole [`ParamSet`], one state per parameter in visiting order.
#[derive(Clone, Debug)]
pub struct Adam {
    pub config: AdamConfig,
    states: Vec<AdamState>,
}

impl Adam {
    pub fn new<P: ParamSet + ?Sized>(params: &P, config: AdamConfig) -> Self {
        let states = params
            .params()
            .into_iter()
            .map(|p| AdamState::for_param(p, config))
            .collect();
        Adam { config, states }
    }

    pub fn step<P: ParamSet + ?Sized>(&mut self, params: &mut P) {
        for (p, s) in params.params_mut().into_iter().zip(self.states.iter_mut()) {
            adam_step(p, s);
        }
    }

    pub fn states(&self) -> &[AdamState] {
        &self.states
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(v: f64) -> Param {
        Param::new("w", Matrix::from_vec(1, 1, vec![v]).unwrap())
    }

    #[test]
    fn zero_gradient_leaves_value() {
        let mut p = Param::new("w", Matrix::from_vec(1, 3, vec![0.3, -1.0, 2.0]).unwrap());
        let before = p.value.clone();
        let mut s = AdamState::for_param(&p, AdamConfig::default());
        for _ in 0..5 {
            adam_step(&mut p, &mut s);
        }
        assert_eq!(p.value, before);
        assert_eq!(s.step, 5);
    }

    #[test]
    fn first_step_moves_about_lr() {
        let cfg = AdamConfig { lr: 0.01, ..Default::default() };
        for g in [1e-3, 0.5, -3.0, 200.0] {
            let mut p = scalar(1.0);
            p.grad.set(0, 0, g);
            let mut s = AdamState::for_param(&p, cfg);
            adam_step(&mut p, &mut s);
            let delta = (p.value.get(0, 0) - 1.0).abs();
            let lower = 0.999 * cfg.lr * g.abs() / (g.abs() + cfg.eps);
            assert!(delta >= lower && delta <= cfg.lr, "g={g} delta={delta}");
            assert_eq!(p.grad.get(0, 0), g);
        }
    }

    #[test]
    fn minimises_square() {
        let mut p = scalar(1.0);
        let mut s = AdamState::for_param(&p, AdamConfig { lr: 0.1, ..Default::default() });
        for _ in 0..100 {
            let w = p.value.get(0, 0);
            p.grad.set(0, 0, 2.0 * w);
            adam_step(&mut p, &mut s);
        }
        assert!(p.value.get(0, 0).abs() < 0.1);
    }
}
