use super::*;
use crate::error::Error;
use crate::layers::{ContextGating, Embedding, Linear, LstmCell};
use crate::numcore::{concat, grad_check, Matrix, ParamSet, SplitRng};

fn small_spec(kind: ModelKind, dv: usize, da: usize) -> ModelSpec {
    ModelSpec::new(kind, dv, da).with_widths(4, 3)
}

fn inputs(rng: &mut SplitRng, t: usize, dv: usize, da: usize) -> (Matrix, Matrix) {
    (rng.uniform_matrix(t, dv, 1.5), rng.uniform_matrix(t, da, 1.5))
}

/// MSE loss of a full model against fixed targets; accumulates gradients.
fn model_loss(m: &mut ModelState, v: &Matrix, a: &Matrix, y: &[f64]) -> crate::Result<f64> {
    let (pred, cache) = m.forward(ModalInputs::new(Some(v), Some(a)))?;
    let grads: Vec<f64> = pred.iter().zip(y).map(|(p, t)| 2.0 * (p - t)).collect();
    m.backward(&cache, &grads)?;
    Ok(pred.iter().zip(y).map(|(p, t)| (p - t).powi(2)).sum())
}

#[test]
fn build_is_deterministic() {
    for kind in ModelKind::ALL {
        let spec = small_spec(kind, 5, 4);
        assert_eq!(ModelState::build(spec, 3).unwrap(), ModelState::build(spec, 3).unwrap());
        assert_ne!(ModelState::build(spec, 3).unwrap(), ModelState::build(spec, 4).unwrap());
    }
    assert!(ModelState::build(ModelSpec::new(ModelKind::LowFusion, 5, 0), 0).is_err());
}

#[test]
fn low_fusion_embedding_takes_concatenated_width() {
    let m = ModelState::build(ModelSpec::new(ModelKind::LowFusion, 1536, 26).with_widths(8, 4), 0).unwrap();
    assert_eq!(m.param("embed.w").unwrap().value.shape(), (8, 1562));
}

#[test]
fn mid_fusion_lstm_sees_three_embeddings() {
    let m = ModelState::build(ModelSpec::new(ModelKind::MidFusion, 10, 6), 0).unwrap();
    assert_eq!(m.fusion_width(), 1536);
}

#[test]
fn high_fusion_has_more_parameters_than_low() {
    for (dv, da) in [(5, 4), (32, 26), (1536, 26)] {
        let low = ModelState::build(ModelSpec::new(ModelKind::LowFusion, dv, da).with_widths(16, 16), 0).unwrap();
        let high = ModelState::build(ModelSpec::new(ModelKind::HighFusion, dv, da).with_widths(16, 16), 0).unwrap();
        assert!(high.param_count() > low.param_count());
    }
}

#[test]
fn param_names_are_unique() {
    for kind in ModelKind::ALL {
        let mut spec = small_spec(kind, 5, 4);
        spec.head_bias = true;
        let m = ModelState::build(spec, 0).unwrap();
        let mut names: Vec<&str> = m.params().iter().map(|p| p.name.as_str()).collect();
        let n = names.len();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), n, "{kind}");
    }
}

#[test]
fn empty_sequence_gives_empty_series() {
    let m = ModelState::build(small_spec(ModelKind::HighFusion, 3, 2), 0).unwrap();
    let (v, a) = (Matrix::zeros(0, 3), Matrix::zeros(0, 2));
    let p = m.predict("x", ModalInputs::new(Some(&v), Some(&a))).unwrap();
    assert!(p.is_empty());
}

#[test]
fn zero_parameters_predict_zero() {
    let mut rng = SplitRng::new(1);
    let (v, a) = inputs(&mut rng, 6, 4, 3);
    for kind in ModelKind::ALL {
        let mut m = ModelState::build(small_spec(kind, 4, 3), 2).unwrap();
        for p in m.params_mut() {
            p.value.fill(0.0);
        }
        let (pred, _) = m.forward(ModalInputs::new(Some(&v), Some(&a))).unwrap();
        assert_eq!(pred, vec![0.0; 6], "{kind}");
    }
}

#[test]
fn missing_modality_and_length_mismatch() {
    let mut rng = SplitRng::new(2);
    let (v, a) = inputs(&mut rng, 5, 4, 3);
    let low = ModelState::build(small_spec(ModelKind::LowFusion, 4, 3), 0).unwrap();
    assert!(matches!(
        low.forward(ModalInputs::new(None, Some(&a))),
        Err(Error::MissingModality(_))
    ));
    let short = a.slice_rows(0, 4).unwrap();
    assert!(matches!(
        low.forward(ModalInputs::new(Some(&v), Some(&short))),
        Err(Error::Dimension { .. })
    ));
    let wrong = Matrix::zeros(5, 7);
    assert!(low.forward(ModalInputs::new(Some(&v), Some(&wrong))).is_err());
    // unimodal models ignore the other modality entirely
    let vis = ModelState::build(small_spec(ModelKind::UnimodalVisual, 4, 0), 0).unwrap();
    let (p1, _) = vis.forward(ModalInputs::new(Some(&v), None)).unwrap();
    let (p2, _) = vis.forward(ModalInputs::new(Some(&v), Some(&short))).unwrap();
    assert_eq!(p1, p2);
}

#[test]
fn mid_fusion_matches_step_by_step_composition() {
    let (dv, da, t_len) = (6, 3, 4);
    let m = ModelState::build(small_spec(ModelKind::MidFusion, dv, da), 17).unwrap();
    let mut rng = SplitRng::new(18);
    let (v, a) = inputs(&mut rng, t_len, dv, da);
    let (pred, _) = m.forward(ModalInputs::new(Some(&v), Some(&a))).unwrap();

    let p = |n: &str| m.param(n).unwrap().clone();
    let gate_v = ContextGating { w: p("gate_visual.w"), b: p("gate_visual.b") };
    let gate_a = ContextGating { w: p("gate_audio.w"), b: p("gate_audio.b") };
    let ev = Embedding { w: p("embed_visual.w"), b: p("embed_visual.b") };
    let ea = Embedding { w: p("embed_audio.w"), b: p("embed_audio.b") };
    let ej = Embedding { w: p("embed_joint.w"), b: p("embed_joint.b") };
    let mut cell = LstmCell::new("lstm", 12, 3, 0);
    cell.t = p("lstm.t");
    cell.bias = p("lstm.bias");
    let head = Linear { w: p("head.w"), b: None };

    let (mut h, mut c) = cell.zero_state();
    for t in 0..t_len {
        let (gv, _) = gate_v.forward(v.row(t)).unwrap();
        let (ga, _) = gate_a.forward(a.row(t)).unwrap();
        let (xv, _) = ev.forward(&gv).unwrap();
        let (xa, _) = ea.forward(&ga).unwrap();
        let (xj, _) = ej.forward(&concat(&gv, &ga)).unwrap();
        let x = concat(&concat(&xv, &xa), &xj);
        let (h2, c2, _) = cell.step(&x, &h, &c).unwrap();
        h = h2;
        c = c2;
        let y = head.forward(&h).unwrap()[0];
        assert!((y - pred[t]).abs() < 1e-14, "t={t}: {y} vs {}", pred[t]);
    }
}

#[test]
fn forward_is_causal() {
    let mut rng = SplitRng::new(5);
    let (v, a) = inputs(&mut rng, 8, 4, 3);
    for kind in ModelKind::ALL {
        let m = ModelState::build(small_spec(kind, 4, 3), 6).unwrap();
        let (base, _) = m.forward(ModalInputs::new(Some(&v), Some(&a))).unwrap();
        for cut in 1..8 {
            let (mut v2, mut a2) = (v.clone(), a.clone());
            for t in cut..8 {
                v2.row_mut(t).iter_mut().for_each(|x| *x += 3.0);
                a2.row_mut(t).iter_mut().for_each(|x| *x -= 2.0);
            }
            let (pert, _) = m.forward(ModalInputs::new(Some(&v2), Some(&a2))).unwrap();
            assert_eq!(&pert[..cut], &base[..cut], "{kind} cut {cut}");
            assert_ne!(pert[cut..], base[cut..]);
        }
    }
}

#[test]
fn zero_loss_gradient_gives_zero_param_gradients() {
    let mut rng = SplitRng::new(7);
    let (v, a) = inputs(&mut rng, 3, 4, 3);
    for kind in ModelKind::ALL {
        let mut m = ModelState::build(small_spec(kind, 4, 3), 1).unwrap();
        let (_, cache) = m.forward(ModalInputs::new(Some(&v), Some(&a))).unwrap();
        m.backward(&cache, &[0.0; 3]).unwrap();
        assert_eq!(m.grad_norm(), 0.0, "{kind}");
        assert!(m.backward(&cache, &[0.0; 2]).is_err());
    }
}

#[test]
fn backward_rejects_foreign_cache() {
    let mut rng = SplitRng::new(7);
    let (v, a) = inputs(&mut rng, 3, 4, 3);
    let low = ModelState::build(small_spec(ModelKind::LowFusion, 4, 3), 1).unwrap();
    let mut high = ModelState::build(small_spec(ModelKind::HighFusion, 4, 3), 1).unwrap();
    let (_, cache) = low.forward(ModalInputs::new(Some(&v), Some(&a))).unwrap();
    assert!(high.backward(&cache, &[1.0; 3]).is_err());
}

/// Targets sit a small random offset from the current prediction. With O(1)
/// residuals the loss itself is O(1) and its rounding noise swamps
/// coordinates whose gradient is below ~1e-7.
fn near_targets(m: &ModelState, v: &Matrix, a: &Matrix, rng: &mut SplitRng) -> Vec<f64> {
    let (p, _) = m.forward(ModalInputs::new(Some(v), Some(a))).unwrap();
    p.iter().map(|x| x + rng.symmetric(0.05)).collect()
}

#[test]
fn full_model_gradient_checks() {
    for kind in ModelKind::ALL {
        for seed in 0..5u64 {
            let mut rng = SplitRng::new(40 + seed);
            let (dv, da) = (1 + rng.below(5), 1 + rng.below(4));
            let mut spec = small_spec(kind, dv, da);
            spec.head_bias = seed % 2 == 1;
            let mut m = ModelState::build(spec, seed).unwrap();
            let (v, a) = inputs(&mut rng, 3, dv, da);
            let y = near_targets(&m, &v, &a, &mut rng);
            let report = grad_check(&mut m, 1e-5, |m| model_loss(m, &v, &a, &y)).unwrap();
            assert!(report.max_rel_error < 1e-4, "{kind} seed {seed}: {report:?}");
        }
    }
}

#[test]
fn ensemble_of_copies_equals_member() {
    let mut rng = SplitRng::new(9);
    let (v, a) = inputs(&mut rng, 10, 4, 3);
    let m = ModelState::build(small_spec(ModelKind::MidFusion, 4, 3), 3).unwrap();
    let inp = ModalInputs::new(Some(&v), Some(&a));
    let single = m.predict("ep", inp).unwrap();
    for k in 1..5 {
        let members: Vec<_> = (0..k).map(|_| (&m, inp)).collect();
        assert_eq!(ensemble_predict("ep", &members).unwrap(), single);
    }
}

#[test]
fn ensemble_of_three_models_is_elementwise_mean() {
    let mut rng = SplitRng::new(10);
    let (v, a) = inputs(&mut rng, 10, 4, 3);
    let inp = ModalInputs::new(Some(&v), Some(&a));
    let models: Vec<ModelState> = [ModelKind::HighFusion, ModelKind::MidFusion, ModelKind::LowFusion]
        .iter()
        .enumerate()
        .map(|(i, &k)| ModelState::build(small_spec(k, 4, 3), i as u64).unwrap())
        .collect();
    let members: Vec<_> = models.iter().map(|m| (m, inp)).collect();
    let ens = ensemble_predict("ep", &members).unwrap();
    let preds: Vec<Vec<f64>> = models.iter().map(|m| m.predict("ep", inp).unwrap().values).collect();
    for t in 0..10 {
        let mean = (preds[0][t] + preds[1][t] + preds[2][t]) / 3.0;
        assert!((ens.values[t] - mean).abs() < 1e-15);
    }
}
