use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::dense::{Mlp, MlpTrace};
use crate::nn::input::NetworkInput;
use crate::nn::Parameters;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QNetConfig {
    pub n: usize,
    pub m: usize,
    /// Hidden widths of the shared row encoder (ReLU after every layer).
    pub encoder_widths: Vec<usize>,
    /// Hidden widths of both heads; each head ends in a single linear output.
    pub head_widths: Vec<usize>,
}

impl QNetConfig {
    pub fn new(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            encoder_widths: vec![64, 64],
            head_widths: vec![32],
        }
    }

    fn encoder_layout(&self) -> Vec<usize> {
        let mut w = vec![2 * self.n];
        w.extend(&self.encoder_widths);
        w
    }

    fn head_layout(&self) -> Vec<usize> {
        let mut w = vec![*self.encoder_layout().last().expect("non-empty")];
        w.extend(&self.head_widths);
        w.push(1);
        w
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QNetwork {
    pub config: QNetConfig,
    pub encoder: Mlp,
    pub advantage: Mlp,
    pub value: Mlp,
}

/// Everything the backward pass needs from one forward pass.
#[derive(Debug, Clone)]
pub struct QTrace {
    pub encoder: Vec<MlpTrace>,
    pub advantage: Vec<MlpTrace>,
    pub value: MlpTrace,
    pub v: f64,
    pub a: Vec<f64>,
    pub q: Vec<f64>,
}

impl QNetwork {
    pub fn new<R: Rng + ?Sized>(config: QNetConfig, rng: &mut R) -> Result<Self> {
        if config.n == 0 || config.m == 0 || config.encoder_widths.is_empty() {
            return Err(Error::Config(
                "Q-network needs n, m >= 1 and at least one encoder layer".into(),
            ));
        }
        if config.encoder_widths.iter().chain(&config.head_widths).any(|&w| w == 0) {
            return Err(Error::Config("layer widths must be positive".into()));
        }
        let encoder = Mlp::new(&config.encoder_layout(), true, rng);
        let advantage = Mlp::new(&config.head_layout(), false, rng);
        let value = Mlp::new(&config.head_layout(), false, rng);
        Ok(Self {
            config,
            encoder,
            advantage,
            value,
        })
    }

    /// Structural check of a (possibly deserialised) network against its config.
    pub fn validate(&self) -> Result<()> {
        let enc = self.config.encoder_layout();
        let head = self.config.head_layout();
        let widths = |mlp: &Mlp| -> Vec<usize> {
            let mut w = vec![mlp.input_width()];
            w.extend(mlp.layers.iter().map(|l| l.outputs));
            w
        };
        for (name, mlp, expected) in [
            ("encoder", &self.encoder, &enc),
            ("advantage head", &self.advantage, &head),
            ("value head", &self.value, &head),
        ] {
            if mlp.layers.is_empty() {
                return Err(Error::Config(format!("{name} has no layers")));
            }
            mlp.check_chain(name)?;
            if &widths(mlp) != expected {
                return Err(Error::Config(format!(
                    "{name} widths {:?} do not match config {:?}",
                    widths(mlp),
                    expected
                )));
            }
        }
        if !self.all_finite() {
            return Err(Error::Config("non-finite Q-network parameter".into()));
        }
        Ok(())
    }

    fn check_input(&self, input: &NetworkInput) -> Result<()> {
        if input.width() != 2 * self.config.n || input.rows() != self.config.m {
            return Err(Error::Config(format!(
                "input is {}x{} but the Q-network expects {}x{}",
                input.rows(),
                input.width(),
                self.config.m,
                2 * self.config.n
            )));
        }
        Ok(())
    }

    pub fn forward_trace(&self, input: &NetworkInput) -> Result<QTrace> {
        self.check_input(input)?;
        let m = input.rows();
        let encoder: Vec<MlpTrace> = (0..m)
            .map(|e| self.encoder.forward_trace(input.row(e)))
            .collect();
        let advantage: Vec<MlpTrace> = encoder
            .iter()
            .map(|t| self.advantage.forward_trace(t.output()))
            .collect();
        let a: Vec<f64> = advantage.iter().map(|t| t.output()[0]).collect();
        let hidden = encoder[0].output().len();
        let mut pooled = vec![0.0; hidden];
        for t in &encoder {
            for (p, h) in pooled.iter_mut().zip(t.output()) {
                *p += h;
            }
        }
        pooled.iter_mut().for_each(|p| *p /= m as f64);
        let value = self.value.forward_trace(&pooled);
        let v = value.output()[0];
        let mean_a = a.iter().sum::<f64>() / m as f64;
        let q = a.iter().map(|ai| v + ai - mean_a).collect();
        Ok(QTrace {
            encoder,
            advantage,
            value,
            v,
            a,
            q,
        })
    }

    /// `Q(s, e)` for every row of the input.
    pub fn forward(&self, input: &NetworkInput) -> Result<Vec<f64>> {
        Ok(self.forward_trace(input)?.q)
    }

    /// Accumulates into `grad` the parameter gradient of a loss whose gradient w.r.t. the
    /// Q-values is `dq`.
    pub fn backward(&self, trace: &QTrace, dq: &[f64], grad: &mut QNetwork) {
        let m = trace.q.len();
        let dv: f64 = dq.iter().sum();
        let mean_dq = dv / m as f64;
        let hidden = trace.encoder[0].output().len();

        let d_pooled = self
            .value
            .backward(&trace.value, &[dv], &mut grad.value, true)
            .expect("input gradient requested");
        for e in 0..m {
            let da = dq[e] - mean_dq;
            let mut dh = self
                .advantage
                .backward(&trace.advantage[e], &[da], &mut grad.advantage, true)
                .expect("input gradient requested");
            debug_assert_eq!(dh.len(), hidden);
            for (d, p) in dh.iter_mut().zip(&d_pooled) {
                *d += p / m as f64;
            }
            self.encoder
                .backward(&trace.encoder[e], &dh, &mut grad.encoder, false);
        }
    }
}

impl Parameters for QNetwork {
    fn slices(&self) -> Vec<&[f64]> {
        let mut s = self.encoder.slices();
        s.extend(self.advantage.slices());
        s.extend(self.value.slices());
        s
    }

    fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut s = self.encoder.slices_mut();
        s.extend(self.advantage.slices_mut());
        s.extend(self.value.slices_mut());
        s
    }
}

impl Parameters for Mlp {
    fn slices(&self) -> Vec<&[f64]> {
        Mlp::slices(self)
    }

    fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        Mlp::slices_mut(self)
    }
}
