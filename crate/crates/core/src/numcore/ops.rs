//! Vector kernels shared by every layer. Vectors are plain slices; weights
//! are [`Matrix`] values and biases are `m x 1` matrices or slices.

use super::matrix::{shape_str, Matrix};
use crate::error::{Error, Result};

/// `W x + b`.
pub fn affine_forward(x: &[f64], w: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != w.rows() {
        return Err(Error::dim(
            "affine_forward",
            shape_str(w.shape()),
            format!("bias {}", b.len()),
        ));
    }
    let mut y = w.matvec(x)?;
    for (yi, bi) in y.iter_mut().zip(b) {
        *yi += bi;
    }
    Ok(y)
}

/// Gradients of an affine map given the upstream gradient `dy`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineGrads {
    pub dx: Vec<f64>,
    pub dw: Matrix,
    pub db: Vec<f64>,
}

pub fn affine_backward(x: &[f64], w: &Matrix, dy: &[f64]) -> Result<AffineGrads> {
    let mut dw = Matrix::zeros(w.rows(), w.cols());
    let mut db = vec![0.0; w.rows()];
    let dx = affine_backward_accumulate(x, w, dy, &mut dw, &mut db)?;
    Ok(AffineGrads { dx, dw, db })
}

/// Like [`affine_backward`] but adds into existing gradient buffers.
pub fn affine_backward_accumulate(
    x: &[f64],
    w: &Matrix,
    dy: &[f64],
    dw: &mut Matrix,
    db: &mut [f64],
) -> Result<Vec<f64>> {
    if x.len() != w.cols() || dy.len() != w.rows() {
        return Err(Error::dim(
            "affine_backward",
            shape_str(w.shape()),
            format!("x {} / dy {}", x.len(), dy.len()),
        ));
    }
    if dw.shape() != w.shape() || db.len() != w.rows() {
        return Err(Error::dim(
            "affine_backward",
            shape_str(w.shape()),
            format!("grad {} / bias {}", shape_str(dw.shape()), db.len()),
        ));
    }
    dw.add_outer(dy, x)?;
    for (g, d) in db.iter_mut().zip(dy) {
        *g += d;
    }
    w.matvec_t(dy)
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn sigmoid_map(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| sigmoid(v)).collect()
}

pub fn tanh_map(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| v.tanh()).collect()
}

pub fn hadamard(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::dim("hadamard", a.len(), b.len()));
    }
    Ok(a.iter().zip(b).map(|(x, y)| x * y).collect())
}

pub fn concat(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    out.extend_from_slice(a);
    out.extend_from_slice(b);
    out
}

/// Splits `v` into `v[..n1]` and `v[n1..]`; `n1` must be strictly inside `v`.
pub fn split(v: &[f64], n1: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n1 >= v.len() {
        return Err(Error::OutOfRange {
            op: "split",
            index: n1,
            len: v.len(),
        });
    }
    Ok((v[..n1].to_vec(), v[n1..].to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numcore::rng::SplitRng;

    fn naive_affine(x: &[f64], w: &Matrix, b: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; w.rows()];
        for i in 0..w.rows() {
            let mut acc = 0.0;
            for j in 0..w.cols() {
                acc += w.get(i, j) * x[j];
            }
            y[i] = acc + b[i];
        }
        y
    }

    #[test]
    fn affine_identity_and_hand_cases() {
        let y = affine_forward(&[3.0, -1.0], &Matrix::identity(2), &[0.0, 0.0]).unwrap();
        assert_eq!(y, vec![3.0, -1.0]);
        let w = Matrix::from_rows(&[vec![1.0, 1.0]]).unwrap();
        assert_eq!(affine_forward(&[2.0, 3.0], &w, &[0.5]).unwrap(), vec![5.5]);
    }

    #[test]
    fn affine_matches_triple_loop_on_random_shapes() {
        let mut rng = SplitRng::new(11);
        for _ in 0..200 {
            let m = rng.below(32) + 1;
            let n = rng.below(32) + 1;
            let w = rng.uniform_matrix(m, n, 2.0);
            let x = rng.uniform_vec(n, 2.0);
            let b = rng.uniform_vec(m, 2.0);
            let got = affine_forward(&x, &w, &b).unwrap();
            for (g, e) in got.iter().zip(naive_affine(&x, &w, &b)) {
                assert!((g - e).abs() < 1e-12);
            }
        }
        let mut rng = SplitRng::new(3);
        let w = rng.uniform_matrix(4, 3, 1.0);
        let x = rng.uniform_vec(3, 1.0);
        let b = rng.uniform_vec(4, 1.0);
        let got = affine_forward(&x, &w, &b).unwrap();
        for (g, e) in got.iter().zip(naive_affine(&x, &w, &b)) {
            assert!((g - e).abs() < 1e-12);
        }
    }

    #[test]
    fn affine_shape_errors_name_both_shapes() {
        let err = affine_forward(&[1.0], &Matrix::zeros(2, 3), &[0.0, 0.0]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("2x3") && msg.contains("vector 1"), "{msg}");
        assert!(affine_forward(&[1.0; 3], &Matrix::zeros(2, 3), &[0.0]).is_err());
    }

    #[test]
    fn affine_backward_hand_case() {
        let w = Matrix::from_rows(&[vec![2.0, 3.0]]).unwrap();
        let g = affine_backward(&[5.0, 7.0], &w, &[1.0]).unwrap();
        assert_eq!(g.dx, vec![2.0, 3.0]);
        assert_eq!(g.dw.as_slice(), &[5.0, 7.0]);
        assert_eq!(g.db, vec![1.0]);

        let z = affine_backward(&[5.0, 7.0], &w, &[0.0]).unwrap();
        assert!(z.dx.iter().chain(z.dw.as_slice()).chain(&z.db).all(|&v| v == 0.0));
    }

    #[test]
    fn affine_backward_matches_central_differences() {
        let mut rng = SplitRng::new(5);
        let (m, n) = (4, 3);
        let w = rng.uniform_matrix(m, n, 1.0);
        let x = rng.uniform_vec(n, 1.0);
        let b = rng.uniform_vec(m, 1.0);
        let c = rng.uniform_vec(m, 1.0);
        // L = c . (Wx + b)
        let loss = |x: &[f64], w: &Matrix, b: &[f64]| -> f64 {
            affine_forward(x, w, b)
                .unwrap()
                .iter()
                .zip(&c)
                .map(|(y, c)| y * c)
                .sum()
        };
        let g = affine_backward(&x, &w, &c).unwrap();
        let h = 1e-5;
        let rel = |a: f64, d: f64| (a - d).abs() / a.abs().max(d.abs()).max(1e-8);
        for j in 0..n {
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[j] += h;
            xm[j] -= h;
            let cd = (loss(&xp, &w, &b) - loss(&xm, &w, &b)) / (2.0 * h);
            assert!(rel(g.dx[j], cd) < 1e-6);
        }
        for i in 0..m {
            for j in 0..n {
                let (mut wp, mut wm) = (w.clone(), w.clone());
                wp.set(i, j, w.get(i, j) + h);
                wm.set(i, j, w.get(i, j) - h);
                let cd = (loss(&x, &wp, &b) - loss(&x, &wm, &b)) / (2.0 * h);
                assert!(rel(g.dw.get(i, j), cd) < 1e-6);
            }
            let (mut bp, mut bm) = (b.clone(), b.clone());
            bp[i] += h;
            bm[i] -= h;
            let cd = (loss(&x, &w, &bp) - loss(&x, &w, &bm)) / (2.0 * h);
            assert!(rel(g.db[i], cd) < 1e-6);
        }
    }

    #[test]
    fn elementwise_maps() {
        assert_eq!(sigmoid_map(&[0.0]), vec![0.5]);
        assert!((sigmoid(-800.0)).is_finite() && sigmoid(800.0) == 1.0);
        assert_eq!(hadamard(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), vec![3.0, 8.0]);
        assert!(hadamard(&[1.0], &[1.0, 2.0]).is_err());
        assert_eq!(tanh_map(&[0.0]), vec![0.0]);
    }

    #[test]
    fn split_rejects_out_of_range() {
        assert!(split(&[1.0, 2.0], 2).is_err());
        assert_eq!(split(&[1.0, 2.0], 0).unwrap(), (vec![], vec![1.0, 2.0]));
    }

    proptest::proptest! {
        #[test]
        fn split_inverts_concat(
            a in proptest::collection::vec(-1e6f64..1e6, 0..20),
            b in proptest::collection::vec(-1e6f64..1e6, 1..20),
        ) {
            let (l, r) = split(&concat(&a, &b), a.len()).unwrap();
            proptest::prop_assert_eq!(l, a);
            proptest::prop_assert_eq!(r, b);
        }
    }
}
