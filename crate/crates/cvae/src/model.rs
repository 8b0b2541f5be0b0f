//! Network definition, initialization, forward pass and backpropagation.
//!
//! Encoder: `len(channels)` stride-2 3×3 convolutions with leaky-ReLU, then
//! two dense heads for `μ` and `log σ²`. Decoder: a dense layer back to the
//! deepest feature map followed by the mirrored transposed convolutions;
//! the last one has a single channel and a sigmoid.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ops::{col2im, gemm, im2col, ConvGeom};
use crate::{CvaeError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CvaeConfig {
    /// `[height, width]` of input images.
    pub input: [usize; 2],
    pub channels: Vec<usize>,
    pub kernel: usize,
    pub latent: usize,
    pub leaky_slope: f64,
    /// Weight of the KL term.
    pub beta_kl: f64,
}

impl Default for CvaeConfig {
    fn default() -> Self {
        Self {
            input: [128, 128],
            channels: vec![8, 16, 32],
            kernel: 3,
            latent: 16,
            leaky_slope: 0.01,
            beta_kl: 1.0,
        }
    }
}

const STRIDE: usize = 2;

impl CvaeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.latent < 2 {
            return Err(CvaeError::Config(format!("latent dimension {} < 2", self.latent)));
        }
        if self.channels.is_empty() || self.channels.contains(&0) {
            return Err(CvaeError::Config("channel widths must be non-empty and positive".into()));
        }
        if self.kernel != 3 {
            return Err(CvaeError::Config(format!("kernel {} unsupported (3 only)", self.kernel)));
        }
        let div = 1usize << self.channels.len();
        for &n in &self.input {
            if n == 0 || n % div != 0 {
                return Err(CvaeError::Config(format!(
                    "input size {n} must be a positive multiple of {div} for {} stride-2 layers",
                    self.channels.len()
                )));
            }
        }
        if !(self.leaky_slope >= 0.0 && self.leaky_slope < 1.0) || !(self.beta_kl >= 0.0) {
            return Err(CvaeError::Config("leaky slope must be in [0, 1) and beta_kl ≥ 0".into()));
        }
        Ok(())
    }

    pub fn pixels(&self) -> usize {
        self.input[0] * self.input[1]
    }

    /// Convolution geometries, input side first.
    pub fn geometries(&self) -> Vec<ConvGeom> {
        let (mut c, mut h, mut w) = (1, self.input[0], self.input[1]);
        self.channels
            .iter()
            .map(|&out| {
                let g = ConvGeom::new(c, h, w, out, self.kernel, STRIDE, self.kernel / 2);
                (c, h, w) = (out, g.small_h, g.small_w);
                g
            })
            .collect()
    }

    /// Length of the flattened deepest feature map.
    pub fn flat(&self) -> usize {
        let g = *self.geometries().last().expect("validated non-empty");
        g.small_c * g.small_len()
    }
}

/// Offsets of each tensor inside the flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub enc_w: Vec<usize>,
    pub enc_b: Vec<usize>,
    pub mu_w: usize,
    pub mu_b: usize,
    pub lv_w: usize,
    pub lv_b: usize,
    pub dec_w: usize,
    pub dec_b: usize,
    /// Transposed convolutions, indexed like the encoder geometry they
    /// mirror (executed deepest first).
    pub tc_w: Vec<usize>,
    pub tc_b: Vec<usize>,
    pub len: usize,
}

impl Layout {
    fn new(cfg: &CvaeConfig) -> Self {
        let mut off = 0;
        let mut take = |n: usize| {
            let o = off;
            off += n;
            o
        };
        let geoms = cfg.geometries();
        let mut enc_w = vec![];
        let mut enc_b = vec![];
        for g in &geoms {
            enc_w.push(take(g.small_c * g.patch()));
            enc_b.push(take(g.small_c));
        }
        let (flat, p) = (cfg.flat(), cfg.latent);
        let mu_w = take(p * flat);
        let mu_b = take(p);
        let lv_w = take(p * flat);
        let lv_b = take(p);
        let dec_w = take(flat * p);
        let dec_b = take(flat);
        let mut tc_w = vec![];
        let mut tc_b = vec![];
        for g in &geoms {
            tc_w.push(take(g.small_c * g.patch()));
            tc_b.push(take(g.big_c));
        }
        Self {
            enc_w,
            enc_b,
            mu_w,
            mu_b,
            lv_w,
            lv_b,
            dec_w,
            dec_b,
            tc_w,
            tc_b,
            len: off,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvaeModel {
    pub config: CvaeConfig,
    pub layout: Layout,
    pub params: Vec<f64>,
    pub seed: u64,
}

/// Latent sampling for a forward pass.
#[derive(Debug, Clone, Copy)]
pub enum Sampling<'a> {
    /// `y = μ`.
    Mean,
    /// `y = μ + σ ⊙ ε` with the given noise.
    Noise(&'a [f64]),
}

/// Intermediate values kept for backpropagation.
#[derive(Debug, Clone)]
pub struct Forward {
    cols: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
    h: Vec<f64>,
    pub mu: Vec<f64>,
    pub log_var: Vec<f64>,
    eps: Vec<f64>,
    y: Vec<f64>,
    dec_pre: Vec<f64>,
    /// Inputs of the transposed convolutions, keyed by geometry index.
    tc_in: Vec<Vec<f64>>,
    /// Pre-activations of the transposed convolutions.
    tc_pre: Vec<Vec<f64>>,
    pub output: Vec<f64>,
}

impl Forward {
    pub fn sigma(&self) -> Vec<f64> {
        self.log_var.iter().map(|l| (0.5 * l).exp()).collect()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Largest accepted `|log σ²|`; keeps `exp` finite early in training.
const LOG_VAR_CLAMP: f64 = 30.0;

impl CvaeModel {
    /// He-uniform weights `U(±√(6/fan_in))`, zero biases.
    pub fn new(config: CvaeConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let layout = Layout::new(&config);
        let mut params = vec![0.0; layout.len];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut fill = |params: &mut [f64], off: usize, n: usize, fan_in: usize| {
            let bound = (6.0 / fan_in as f64).sqrt();
            for p in &mut params[off..off + n] {
                *p = rng.random_range(-bound..bound);
            }
        };
        let geoms = config.geometries();
        let (flat, p) = (config.flat(), config.latent);
        for (i, g) in geoms.iter().enumerate() {
            fill(&mut params, layout.enc_w[i], g.small_c * g.patch(), g.patch());
        }
        fill(&mut params, layout.mu_w, p * flat, flat);
        fill(&mut params, layout.lv_w, p * flat, flat);
        fill(&mut params, layout.dec_w, flat * p, p);
        for (i, g) in geoms.iter().enumerate() {
            // Each output pixel of a stride-2 transposed conv sees about
            // small_c·k²/4 inputs.
            let fan_in = (g.small_c * g.k * g.k / (STRIDE * STRIDE)).max(1);
            fill(&mut params, layout.tc_w[i], g.small_c * g.patch(), fan_in);
        }
        Ok(Self {
            config,
            layout,
            params,
            seed,
        })
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    fn lrelu(&self, x: f64) -> f64 {
        if x > 0.0 {
            x
        } else {
            self.config.leaky_slope * x
        }
    }

    fn lrelu_grad(&self, x: f64) -> f64 {
        if x > 0.0 {
            1.0
        } else {
            self.config.leaky_slope
        }
    }

    pub fn check_input(&self, image: &[f64]) -> Result<()> {
        if image.len() != self.config.pixels() {
            return Err(CvaeError::Domain(format!(
                "image has {} pixels, model expects {}×{}",
                image.len(),
                self.config.input[0],
                self.config.input[1]
            )));
        }
        Ok(())
    }

    pub fn forward(&self, image: &[f64], sampling: Sampling<'_>) -> Result<Forward> {
        self.check_input(image)?;
        let geoms = self.config.geometries();
        let l = &self.layout;
        let w = &self.params;

        let mut cols = Vec::with_capacity(geoms.len());
        let mut pre = Vec::with_capacity(geoms.len());
        let mut act = image.to_vec();
        for (i, g) in geoms.iter().enumerate() {
            let mut col = vec![0.0; g.patch() * g.small_len()];
            im2col(&act, g, &mut col);
            let mut z = vec![0.0; g.small_c * g.small_len()];
            for (c, row) in z.chunks_mut(g.small_len()).enumerate() {
                row.fill(w[l.enc_b[i] + c]);
            }
            let wm = &w[l.enc_w[i]..l.enc_w[i] + g.small_c * g.patch()];
            gemm(g.small_c, g.patch(), g.small_len(), 1.0, wm, false, &col, false, 1.0, &mut z);
            act = z.iter().map(|&v| self.lrelu(v)).collect();
            cols.push(col);
            pre.push(z);
        }
        let h = act;
        let (flat, p) = (self.config.flat(), self.config.latent);

        let mut mu = w[l.mu_b..l.mu_b + p].to_vec();
        gemm(p, flat, 1, 1.0, &w[l.mu_w..l.mu_w + p * flat], false, &h, false, 1.0, &mut mu);
        let mut log_var = w[l.lv_b..l.lv_b + p].to_vec();
        gemm(p, flat, 1, 1.0, &w[l.lv_w..l.lv_w + p * flat], false, &h, false, 1.0, &mut log_var);
        for v in &mut log_var {
            *v = v.clamp(-LOG_VAR_CLAMP, LOG_VAR_CLAMP);
        }

        let eps = match sampling {
            Sampling::Mean => vec![0.0; p],
            Sampling::Noise(e) => {
                if e.len() != p {
                    return Err(CvaeError::Domain(format!("noise has {} entries, latent is {p}", e.len())));
                }
                e.to_vec()
            }
        };
        let y: Vec<f64> = (0..p).map(|i| mu[i] + (0.5 * log_var[i]).exp() * eps[i]).collect();

        let mut dec_pre = w[l.dec_b..l.dec_b + flat].to_vec();
        gemm(flat, p, 1, 1.0, &w[l.dec_w..l.dec_w + flat * p], false, &y, false, 1.0, &mut dec_pre);
        let mut g_act: Vec<f64> = dec_pre.iter().map(|&v| self.lrelu(v)).collect();

        let n = geoms.len();
        let mut tc_in = vec![Vec::new(); n];
        let mut tc_pre = vec![Vec::new(); n];
        let mut output = Vec::new();
        for i in (0..n).rev() {
            let g = &geoms[i];
            let wm = &w[l.tc_w[i]..l.tc_w[i] + g.small_c * g.patch()];
            let mut col = vec![0.0; g.patch() * g.small_len()];
            gemm(g.patch(), g.small_c, g.small_len(), 1.0, wm, true, &g_act, false, 0.0, &mut col);
            let mut u = vec![0.0; g.big_c * g.big_len()];
            for (c, row) in u.chunks_mut(g.big_len()).enumerate() {
                row.fill(w[l.tc_b[i] + c]);
            }
            col2im(&col, g, &mut u);
            tc_in[i] = std::mem::take(&mut g_act);
            if i > 0 {
                g_act = u.iter().map(|&v| self.lrelu(v)).collect();
            } else {
                output = u.iter().map(|&v| sigmoid(v)).collect();
            }
            tc_pre[i] = u;
        }

        Ok(Forward {
            cols,
            pre,
            h,
            mu,
            log_var,
            eps,
            y,
            dec_pre,
            tc_in,
            tc_pre,
            output,
        })
    }

    /// Accumulates `∂loss/∂params` into `grad` for one image, where
    /// `d_output` is `∂loss/∂x′` and the KL term is weighted by `kl_weight`.
    pub fn backward(&self, fwd: &Forward, d_output: &[f64], kl_weight: f64, grad: &mut [f64]) {
        let geoms = self.config.geometries();
        let l = &self.layout;
        let w = &self.params;
        let n = geoms.len();
        let (flat, p) = (self.config.flat(), self.config.latent);

        // Sigmoid output.
        let mut du: Vec<f64> = d_output.iter().zip(&fwd.output).map(|(d, s)| d * s * (1.0 - s)).collect();
        let mut d_in = Vec::new();
        for i in 0..n {
            let g = &geoms[i];
            let mut col = vec![0.0; g.patch() * g.small_len()];
            im2col(&du, g, &mut col);
            for (c, row) in du.chunks(g.big_len()).enumerate() {
                grad[l.tc_b[i] + c] += row.iter().sum::<f64>();
            }
            let gw = &mut grad[l.tc_w[i]..l.tc_w[i] + g.small_c * g.patch()];
            gemm(g.small_c, g.small_len(), g.patch(), 1.0, &fwd.tc_in[i], false, &col, true, 1.0, gw);
            let wm = &w[l.tc_w[i]..l.tc_w[i] + g.small_c * g.patch()];
            let mut dg = vec![0.0; g.small_c * g.small_len()];
            gemm(g.small_c, g.patch(), g.small_len(), 1.0, wm, false, &col, false, 0.0, &mut dg);
            if i + 1 < n {
                du = dg.iter().zip(&fwd.tc_pre[i + 1]).map(|(d, &u)| d * self.lrelu_grad(u)).collect();
            } else {
                d_in = dg;
            }
        }

        // Dense decoder input.
        let dd: Vec<f64> = d_in.iter().zip(&fwd.dec_pre).map(|(d, &u)| d * self.lrelu_grad(u)).collect();
        for (gb, d) in grad[l.dec_b..l.dec_b + flat].iter_mut().zip(&dd) {
            *gb += d;
        }
        gemm(flat, 1, p, 1.0, &dd, false, &fwd.y, false, 1.0, &mut grad[l.dec_w..l.dec_w + flat * p]);
        let mut dy = vec![0.0; p];
        gemm(p, flat, 1, 1.0, &w[l.dec_w..l.dec_w + flat * p], true, &dd, false, 0.0, &mut dy);

        // Reparametrization and KL.
        let mut dmu = vec![0.0; p];
        let mut dlv = vec![0.0; p];
        for i in 0..p {
            let var = fwd.log_var[i].exp();
            let sigma = var.sqrt();
            dmu[i] = dy[i] + kl_weight * fwd.mu[i];
            let clamped = fwd.log_var[i].abs() >= LOG_VAR_CLAMP;
            dlv[i] = if clamped {
                0.0
            } else {
                dy[i] * fwd.eps[i] * 0.5 * sigma + kl_weight * 0.5 * (var - 1.0)
            };
        }
        for i in 0..p {
            grad[l.mu_b + i] += dmu[i];
            grad[l.lv_b + i] += dlv[i];
        }
        gemm(p, 1, flat, 1.0, &dmu, false, &fwd.h, false, 1.0, &mut grad[l.mu_w..l.mu_w + p * flat]);
        gemm(p, 1, flat, 1.0, &dlv, false, &fwd.h, false, 1.0, &mut grad[l.lv_w..l.lv_w + p * flat]);
        let mut dh = vec![0.0; flat];
        gemm(flat, p, 1, 1.0, &w[l.mu_w..l.mu_w + p * flat], true, &dmu, false, 0.0, &mut dh);
        gemm(flat, p, 1, 1.0, &w[l.lv_w..l.lv_w + p * flat], true, &dlv, false, 1.0, &mut dh);

        // Encoder.
        let mut da = dh;
        for i in (0..n).rev() {
            let g = &geoms[i];
            let dz: Vec<f64> = da.iter().zip(&fwd.pre[i]).map(|(d, &z)| d * self.lrelu_grad(z)).collect();
            for (c, row) in dz.chunks(g.small_len()).enumerate() {
                grad[l.enc_b[i] + c] += row.iter().sum::<f64>();
            }
            let gw = &mut grad[l.enc_w[i]..l.enc_w[i] + g.small_c * g.patch()];
            gemm(g.small_c, g.small_len(), g.patch(), 1.0, &dz, false, &fwd.cols[i], true, 1.0, gw);
            if i > 0 {
                let wm = &w[l.enc_w[i]..l.enc_w[i] + g.small_c * g.patch()];
                let mut col = vec![0.0; g.patch() * g.small_len()];
                gemm(g.patch(), g.small_c, g.small_len(), 1.0, wm, true, &dz, false, 0.0, &mut col);
                let mut prev = vec![0.0; g.big_c * g.big_len()];
                col2im(&col, g, &mut prev);
                da = prev;
            }
        }
    }
}
