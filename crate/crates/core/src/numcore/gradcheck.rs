use super::param::ParamSet;
use crate::error::{Error, Result};

/// Per-coordinate comparison between analytic and central-difference gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    /// `(param name, flat index)` of the worst coordinate.
    pub worst: Option<(String, usize)>,
    /// Analytic and central-difference values at the worst coordinate.
    pub worst_values: (f64, f64),
    pub coordinates: usize,
}

/// Compares the analytic gradient produced by `loss` with central differences.
///
/// `loss` must compute the scalar objective and accumulate its gradient into
/// the parameters of `target`; the harness zeroes gradients before each call.
/// Returns the max over coordinates of
/// `|analytic - cd| / max(|analytic|, |cd|, 1e-8)`.
pub fn grad_check<T, F>(target: &mut T, h: f64, mut loss: F) -> Result<GradCheckReport>
where
    T: ParamSet + ?Sized,
    F: FnMut(&mut T) -> Result<f64>,
{
    target.zero_grads();
    let base = loss(target)?;
    if !base.is_finite() {
        return Err(Error::NonFinite(format!("grad_check base loss {base}")));
    }
    let analytic: Vec<Vec<f64>> = target
        .params()
        .iter()
        .map(|p| p.grad.as_slice().to_vec())
        .collect();

    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst: None,
        worst_values: (0.0, 0.0),
        coordinates: 0,
    };
    for (pi, grads) in analytic.iter().enumerate() {
        for (k, &a) in grads.iter().enumerate() {
            let orig = target.params()[pi].value.as_slice()[k];
            let mut eval = |target: &mut T, v: f64| -> Result<f64> {
                target.params_mut()[pi].value.as_mut_slice()[k] = v;
                target.zero_grads();
                let f = loss(target)?;
                if !f.is_finite() {
                    return Err(Error::NonFinite(format!("grad_check loss {f}")));
                }
                Ok(f)
            };
            let plus = eval(target, orig + h)?;
            let minus = eval(target, orig - h)?;
            target.params_mut()[pi].value.as_mut_slice()[k] = orig;
            let cd = (plus - minus) / (2.0 * h);
            let rel = (a - cd).abs() / a.abs().max(cd.abs()).max(1e-8);
            report.coordinates += 1;
            if rel > report.max_rel_error {
                report.max_rel_error = rel;
                report.worst = Some((target.params()[pi].name.clone(), k));
                report.worst_values = (a, cd);
            }
        }
    }
    // leave the analytic gradient in place for the caller
    for (p, g) in target.params_mut().into_iter().zip(&analytic) {
        p.grad.as_mut_slice().copy_from_slice(g);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numcore::{Matrix, Param};

    #[test]
    fn half_squared_norm() {
        let mut ps = vec![Param::new(
            "x",
            Matrix::from_vec(1, 4, vec![0.3, -1.2, 2.5, 0.0]).unwrap(),
        )];
        let report = grad_check(&mut ps, 1e-5, |ps| {
            let p = &mut ps[0];
            let f = 0.5 * p.value.sum_squares();
            let v = p.value.clone();
            p.grad.add_scaled(&v, 1.0)?;
            Ok(f)
        })
        .unwrap();
        assert!(report.max_rel_error < 1e-9, "{report:?}");
        assert_eq!(report.coordinates, 4);
    }

    #[test]
    fn detects_wrong_gradient() {
        let mut ps = vec![Param::new("x", Matrix::from_vec(1, 1, vec![2.0]).unwrap())];
        let report = grad_check(&mut ps, 1e-5, |ps| {
            let w = ps[0].value.get(0, 0);
            ps[0].grad.set(0, 0, 3.0 * w);
            Ok(w * w)
        })
        .unwrap();
        assert!(report.max_rel_error > 0.3);
    }

    #[test]
    fn non_finite_loss_is_an_error() {
        let mut ps = vec![Param::zeros("x", 1, 1)];
        assert!(grad_check(&mut ps, 1e-5, |_| Ok(f64::NAN)).is_err());
    }
}
