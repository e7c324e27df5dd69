use super::spec::{ModelKind, ModelSpec};
use crate::error::{Error, Result};
use crate::layers::{
    ContextGating, EmbedCache, Embedding, GateCache, Linear, LstmCache, LstmCell,
};
use crate::numcore::{concat, derive_seed, Matrix, Param, ParamSet};

/// Per-second modality matrices (`T x D`) fed to a model. Modalities the
/// model does not use are ignored.
#[derive(Clone, Copy, Debug, Default)]
pub struct ModalInputs<'a> {
    pub visual: Option<&'a Matrix>,
    pub audio: Option<&'a Matrix>,
}

impl<'a> ModalInputs<'a> {
    pub fn new(visual: Option<&'a Matrix>, audio: Option<&'a Matrix>) -> Self {
        ModalInputs { visual, audio }
    }
}

/// Per-second predictions for one episode.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictionSeries {
    pub episode_id: String,
    pub values: Vec<f64>,
}

impl PredictionSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Fusion {
    Unimodal {
        gate: ContextGating,
        embed: Embedding,
    },
    Low {
        gate_visual: ContextGating,
        gate_audio: ContextGating,
        embed: Embedding,
    },
    Mid {
        gate_visual: ContextGating,
        gate_audio: ContextGating,
        embed_visual: Embedding,
        embed_audio: Embedding,
        embed_joint: Embedding,
    },
    High {
        gate_visual: ContextGating,
        gate_audio: ContextGating,
        enc_visual: LstmCell,
        enc_audio: LstmCell,
        proj: Linear,
    },
}

/// A built model: spec plus every trainable parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelState {
    spec: ModelSpec,
    fusion: Fusion,
    lstm: LstmCell,
    head: Linear,
}

/// Activations recorded by [`ModelState::forward`].
#[derive(Clone, Debug)]
pub struct ForwardCache {
    steps: usize,
    fusion: FusionCache,
    lstm: Vec<LstmCache>,
    hidden: Vec<Vec<f64>>,
}

#[derive(Clone, Debug)]
enum FusionCache {
    Unimodal {
        gate: Vec<GateCache>,
        embed: Vec<EmbedCache>,
    },
    Low {
        gate_visual: Vec<GateCache>,
        gate_audio: Vec<GateCache>,
        embed: Vec<EmbedCache>,
    },
    Mid {
        gate_visual: Vec<GateCache>,
        gate_audio: Vec<GateCache>,
        embed_visual: Vec<EmbedCache>,
        embed_audio: Vec<EmbedCache>,
        embed_joint: Vec<EmbedCache>,
    },
    High {
        gate_visual: Vec<GateCache>,
        gate_audio: Vec<GateCache>,
        enc_visual: Vec<LstmCache>,
        enc_audio: Vec<LstmCache>,
        proj_inputs: Vec<Vec<f64>>,
    },
}

impl ForwardCache {
    pub fn len(&self) -> usize {
        self.steps
    }

    pub fn is_empty(&self) -> bool {
        self.steps == 0
    }
}

fn gate_all(gate: &ContextGating, xs: &Matrix) -> Result<(Vec<Vec<f64>>, Vec<GateCache>)> {
    (0..xs.rows()).map(|t| gate.forward(xs.row(t))).collect::<Result<Vec<_>>>().map(|v| v.into_iter().unzip())
}

fn embed_all(embed: &Embedding, xs: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, Vec<EmbedCache>)> {
    xs.iter().map(|x| embed.forward(x)).collect::<Result<Vec<_>>>().map(|v| v.into_iter().unzip())
}

fn gate_backward(gate: &mut ContextGating, caches: &[GateCache], dys: &[Vec<f64>]) -> Result<()> {
    for (c, dy) in caches.iter().zip(dys) {
        gate.backward(c, dy)?;
    }
    Ok(())
}

fn embed_backward(embed: &mut Embedding, caches: &[EmbedCache], dys: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    caches.iter().zip(dys).map(|(c, dy)| embed.backward(c, dy)).collect()
}

fn split_at_all(vs: Vec<Vec<f64>>, n: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    vs.into_iter()
        .map(|mut v| {
            let tail = v.split_off(n);
            (v, tail)
        })
        .unzip()
}

fn add_into(acc: &mut [Vec<f64>], extra: &[Vec<f64>]) {
    for (a, e) in acc.iter_mut().zip(extra) {
        for (x, y) in a.iter_mut().zip(e) {
            *x += y;
        }
    }
}

impl ModelState {
    /// Builds the architecture for `spec`, initialising parameters from `seed`.
    pub fn build(spec: ModelSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let s = |tag: u64| derive_seed(seed, tag);
        let (dv, da, e, h) = (spec.visual_dim, spec.audio_dim, spec.embed_dim, spec.hidden);
        let (fusion, lstm_input) = match spec.kind {
            ModelKind::UnimodalVisual | ModelKind::UnimodalAudio => {
                let (name, d) = if spec.kind == ModelKind::UnimodalVisual {
                    ("visual", dv)
                } else {
                    ("audio", da)
                };
                (
                    Fusion::Unimodal {
                        gate: ContextGating::new(&format!("gate_{name}"), d, s(1)),
                        embed: Embedding::new("embed", d, e, s(3)),
                    },
                    e,
                )
            }
            ModelKind::LowFusion => (
                Fusion::Low {
                    gate_visual: ContextGating::new("gate_visual", dv, s(1)),
                    gate_audio: ContextGating::new("gate_audio", da, s(2)),
                    embed: Embedding::new("embed", dv + da, e, s(3)),
                },
                e,
            ),
            ModelKind::MidFusion => (
                Fusion::Mid {
                    gate_visual: ContextGating::new("gate_visual", dv, s(1)),
                    gate_audio: ContextGating::new("gate_audio", da, s(2)),
                    embed_visual: Embedding::new("embed_visual", dv, e, s(4)),
                    embed_audio: Embedding::new("embed_audio", da, e, s(5)),
                    embed_joint: Embedding::new("embed_joint", dv + da, e, s(6)),
                },
                3 * e,
            ),
            ModelKind::HighFusion => (
                Fusion::High {
                    gate_visual: ContextGating::new("gate_visual", dv, s(1)),
                    gate_audio: ContextGating::new("gate_audio", da, s(2)),
                    enc_visual: LstmCell::new("enc_visual", dv, h, s(7)),
                    enc_audio: LstmCell::new("enc_audio", da, h, s(8)),
                    proj: Linear::new("proj", 2 * h, e, true, s(9)),
                },
                e,
            ),
        };
        Ok(ModelState {
            spec,
            fusion,
            lstm: LstmCell::new("lstm", lstm_input, h, s(10)),
            head: Linear::new("head", h, 1, spec.head_bias, s(11)),
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    /// Width of the vector the prediction LSTM consumes each step.
    pub fn fusion_width(&self) -> usize {
        self.lstm.input_size()
    }

    /// Looks a parameter up by its checkpoint name.
    pub fn param(&self, name: &str) -> Option<&Param> {
        self.params().into_iter().find(|p| p.name == name)
    }

    fn check_inputs<'a>(&self, inputs: ModalInputs<'a>) -> Result<(Option<&'a Matrix>, Option<&'a Matrix>, usize)> {
        let kind = self.spec.kind;
        let pick = |m: Option<&'a Matrix>, used: bool, dim: usize, name: &str| -> Result<Option<&'a Matrix>> {
            if !used {
                return Ok(None);
            }
            let m = m.ok_or_else(|| Error::MissingModality(format!("{kind} needs {name} features")))?;
            if m.cols() != dim {
                return Err(Error::dim("forward_sequence", format!("{name} dim {dim}"), format!("{} columns", m.cols())));
            }
            Ok(Some(m))
        };
        let v = pick(inputs.visual, kind.uses_visual(), self.spec.visual_dim, "visual")?;
        let a = pick(inputs.audio, kind.uses_audio(), self.spec.audio_dim, "audio")?;
        let steps = match (v, a) {
            (Some(v), Some(a)) if v.rows() != a.rows() => {
                return Err(Error::dim(
                    "forward_sequence lengths",
                    format!("visual T={}", v.rows()),
                    format!("audio T={}", a.rows()),
                ))
            }
            (Some(v), _) => v.rows(),
            (None, Some(a)) => a.rows(),
            (None, None) => unreachable!("every kind uses a modality"),
        };
        Ok((v, a, steps))
    }

    /// Runs the whole sequence from zero recurrent state.
    pub fn forward(&self, inputs: ModalInputs<'_>) -> Result<(Vec<f64>, ForwardCache)> {
        let (v, a, steps) = self.check_inputs(inputs)?;
        let (fused, fusion) = match &self.fusion {
            Fusion::Unimodal { gate, embed } => {
                let xs = v.or(a).expect("checked");
                let (gated, gate_c) = gate_all(gate, xs)?;
                let (emb, embed_c) = embed_all(embed, &gated)?;
                (emb, FusionCache::Unimodal { gate: gate_c, embed: embed_c })
            }
            Fusion::Low { gate_visual, gate_audio, embed } => {
                let (gv, gv_c) = gate_all(gate_visual, v.expect("checked"))?;
                let (ga, ga_c) = gate_all(gate_audio, a.expect("checked"))?;
                let joint: Vec<Vec<f64>> = gv.iter().zip(&ga).map(|(x, y)| concat(x, y)).collect();
                let (emb, embed_c) = embed_all(embed, &joint)?;
                (
                    emb,
                    FusionCache::Low { gate_visual: gv_c, gate_audio: ga_c, embed: embed_c },
                )
            }
            Fusion::Mid { gate_visual, gate_audio, embed_visual, embed_audio, embed_joint } => {
                let (gv, gv_c) = gate_all(gate_visual, v.expect("checked"))?;
                let (ga, ga_c) = gate_all(gate_audio, a.expect("checked"))?;
                let joint: Vec<Vec<f64>> = gv.iter().zip(&ga).map(|(x, y)| concat(x, y)).collect();
                let (ev, ev_c) = embed_all(embed_visual, &gv)?;
                let (ea, ea_c) = embed_all(embed_audio, &ga)?;
                let (ej, ej_c) = embed_all(embed_joint, &joint)?;
                let fused = (0..steps)
                    .map(|t| {
                        let mut x = Vec::with_capacity(3 * self.spec.embed_dim);
                        x.extend_from_slice(&ev[t]);
                        x.extend_from_slice(&ea[t]);
                        x.extend_from_slice(&ej[t]);
                        x
                    })
                    .collect();
                (
                    fused,
                    FusionCache::Mid {
                        gate_visual: gv_c,
                        gate_audio: ga_c,
                        embed_visual: ev_c,
                        embed_audio: ea_c,
                        embed_joint: ej_c,
                    },
                )
            }
            Fusion::High { gate_visual, gate_audio, enc_visual, enc_audio, proj } => {
                let (gv, gv_c) = gate_all(gate_visual, v.expect("checked"))?;
                let (ga, ga_c) = gate_all(gate_audio, a.expect("checked"))?;
                let (hv, hv_c) = enc_visual.forward_sequence(&gv)?;
                let (ha, ha_c) = enc_audio.forward_sequence(&ga)?;
                let proj_inputs: Vec<Vec<f64>> = hv.iter().zip(&ha).map(|(x, y)| concat(x, y)).collect();
                let fused = proj_inputs.iter().map(|z| proj.forward(z)).collect::<Result<Vec<_>>>()?;
                (
                    fused,
                    FusionCache::High {
                        gate_visual: gv_c,
                        gate_audio: ga_c,
                        enc_visual: hv_c,
                        enc_audio: ha_c,
                        proj_inputs,
                    },
                )
            }
        };
        let (hidden, lstm) = self.lstm.forward_sequence(&fused)?;
        let preds = hidden
            .iter()
            .map(|h| self.head.forward(h).map(|y| y[0]))
            .collect::<Result<Vec<_>>>()?;
        Ok((preds, ForwardCache { steps, fusion, lstm, hidden }))
    }

    /// Prediction only, labelled with `episode_id`.
    pub fn predict(&self, episode_id: &str, inputs: ModalInputs<'_>) -> Result<PredictionSeries> {
        let (values, _) = self.forward(inputs)?;
        Ok(PredictionSeries {
            episode_id: episode_id.to_string(),
            values,
        })
    }

    /// Reverse pass for the whole model; `dpred[t]` is `dL/dy'_t`.
    /// Gradients accumulate into the parameters.
    pub fn backward(&mut self, cache: &ForwardCache, dpred: &[f64]) -> Result<()> {
        if dpred.len() != cache.steps {
            return Err(Error::dim(
                "backward_sequence",
                format!("{} cached steps", cache.steps),
                format!("{} loss grads", dpred.len()),
            ));
        }
        let mut dh = Vec::with_capacity(cache.steps);
        for (h, &d) in cache.hidden.iter().zip(dpred) {
            dh.push(self.head.backward(h, &[d])?);
        }
        let dfused = self.lstm.backward_through_time(&cache.lstm, &dh)?;
        let e = self.spec.embed_dim;
        match (&mut self.fusion, &cache.fusion) {
            (Fusion::Unimodal { gate, embed }, FusionCache::Unimodal { gate: gc, embed: ec }) => {
                let dg = embed_backward(embed, ec, &dfused)?;
                gate_backward(gate, gc, &dg)?;
            }
            (
                Fusion::Low { gate_visual, gate_audio, embed },
                FusionCache::Low { gate_visual: gvc, gate_audio: gac, embed: ec },
            ) => {
                let djoint = embed_backward(embed, ec, &dfused)?;
                let (dgv, dga) = split_at_all(djoint, self.spec.visual_dim);
                gate_backward(gate_visual, gvc, &dgv)?;
                gate_backward(gate_audio, gac, &dga)?;
            }
            (
                Fusion::Mid { gate_visual, gate_audio, embed_visual, embed_audio, embed_joint },
                FusionCache::Mid {
                    gate_visual: gvc,
                    gate_audio: gac,
                    embed_visual: evc,
                    embed_audio: eac,
                    embed_joint: ejc,
                },
            ) => {
                let (dev, rest) = split_at_all(dfused, e);
                let (dea, dej) = split_at_all(rest, e);
                let mut dgv = embed_backward(embed_visual, evc, &dev)?;
                let mut dga = embed_backward(embed_audio, eac, &dea)?;
                let djoint = embed_backward(embed_joint, ejc, &dej)?;
                let (jv, ja) = split_at_all(djoint, self.spec.visual_dim);
                add_into(&mut dgv, &jv);
                add_into(&mut dga, &ja);
                gate_backward(gate_visual, gvc, &dgv)?;
                gate_backward(gate_audio, gac, &dga)?;
            }
            (
                Fusion::High { gate_visual, gate_audio, enc_visual, enc_audio, proj },
                FusionCache::High {
                    gate_visual: gvc,
                    gate_audio: gac,
                    enc_visual: hvc,
                    enc_audio: hac,
                    proj_inputs,
                },
            ) => {
                let dz = proj_inputs
                    .iter()
                    .zip(&dfused)
                    .map(|(z, d)| proj.backward(z, d))
                    .collect::<Result<Vec<_>>>()?;
                let (dhv, dha) = split_at_all(dz, self.spec.hidden);
                let dgv = enc_visual.backward_through_time(hvc, &dhv)?;
                let dga = enc_audio.backward_through_time(hac, &dha)?;
                gate_backward(gate_visual, gvc, &dgv)?;
                gate_backward(gate_audio, gac, &dga)?;
            }
            _ => {
                return Err(Error::InvalidArgument(
                    "forward cache was produced by a different architecture".into(),
                ))
            }
        }
        Ok(())
    }
}

impl ParamSet for ModelState {
    fn params(&self) -> Vec<&Param> {
        let mut out = Vec::new();
        match &self.fusion {
            Fusion::Unimodal { gate, embed } => {
                out.extend(gate.params());
                out.extend(embed.params());
            }
            Fusion::Low { gate_visual, gate_audio, embed } => {
                out.extend(gate_visual.params());
                out.extend(gate_audio.params());
                out.extend(embed.params());
            }
            Fusion::Mid { gate_visual, gate_audio, embed_visual, embed_audio, embed_joint } => {
                out.extend(gate_visual.params());
                out.extend(gate_audio.params());
                out.extend(embed_visual.params());
                out.extend(embed_audio.params());
                out.extend(embed_joint.params());
            }
            Fusion::High { gate_visual, gate_audio, enc_visual, enc_audio, proj } => {
                out.extend(gate_visual.params());
                out.extend(gate_audio.params());
                out.extend(enc_visual.params());
                out.extend(enc_audio.params());
                out.extend(proj.params());
            }
        }
        out.extend(self.lstm.params());
        out.extend(self.head.params());
        out
    }

    fn params_mut(&mut self) -> Vec<&mut Param> {
        let mut out = Vec::new();
        match &mut self.fusion {
            Fusion::Unimodal { gate, embed } => {
                out.extend(gate.params_mut());
                out.extend(embed.params_mut());
            }
            Fusion::Low { gate_visual, gate_audio, embed } => {
                out.extend(gate_visual.params_mut());
                out.extend(gate_audio.params_mut());
                out.extend(embed.params_mut());
            }
            Fusion::Mid { gate_visual, gate_audio, embed_visual, embed_audio, embed_joint } => {
                out.extend(gate_visual.params_mut());
                out.extend(gate_audio.params_mut());
                out.extend(embed_visual.params_mut());
                out.extend(embed_audio.params_mut());
                out.extend(embed_joint.params_mut());
            }
            Fusion::High { gate_visual, gate_audio, enc_visual, enc_audio, proj } => {
                out.extend(gate_visual.params_mut());
                out.extend(gate_audio.params_mut());
                out.extend(enc_visual.params_mut());
                out.extend(enc_audio.params_mut());
                out.extend(proj.params_mut());
            }
        }
        out.extend(self.lstm.params_mut());
        out.extend(self.head.params_mut());
        out
    }
}
