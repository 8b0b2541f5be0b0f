use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sehs_cvae::{elbo_loss, CvaeConfig, CvaeModel, Sampling};

fn miniature(seed: u64) -> CvaeModel {
    let cfg = CvaeConfig {
        input: [8, 8],
        channels: vec![2, 3],
        latent: 2,
        beta_kl: 1.0,
        ..Default::default()
    };
    let mut m = CvaeModel::new(cfg, seed).unwrap();
    // Nonzero biases so every parameter carries gradient.
    let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
    for p in &mut m.params {
        *p += rng.random_range(-0.1..0.1);
    }
    m
}

fn loss(m: &CvaeModel, x: &[f64], eps: &[f64]) -> f64 {
    let f = m.forward(x, Sampling::Noise(eps)).unwrap();
    elbo_loss(x, &f.output, &f.mu, &f.sigma(), m.config.beta_kl).unwrap().total
}

fn analytic(m: &CvaeModel, x: &[f64], eps: &[f64]) -> Vec<f64> {
    let f = m.forward(x, Sampling::Noise(eps)).unwrap();
    let n = x.len() as f64;
    let d: Vec<f64> = f.output.iter().zip(x).map(|(o, t)| 2.0 * (o - t) / n).collect();
    let mut g = vec![0.0; m.n_params()];
    m.backward(&f, &d, m.config.beta_kl, &mut g);
    g
}

#[test]
fn gradients_match_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst: f64 = 0.0;
    for trial in 0..3 {
        let mut m = miniature(trial);
        let x: Vec<f64> = (0..64).map(|_| rng.random_range(0.0..1.0)).collect();
        let eps = [0.7, -1.3];
        let g = analytic(&m, &x, &eps);
        let h = 1e-5;
        for _ in 0..20 {
            let i = rng.random_range(0..m.n_params());
            let p0 = m.params[i];
            m.params[i] = p0 + h;
            let lp = loss(&m, &x, &eps);
            m.params[i] = p0 - h;
            let lm = loss(&m, &x, &eps);
            m.params[i] = p0;
            let fd = (lp - lm) / (2.0 * h);
            let scale = g[i].abs().max(fd.abs());
            if scale < 1e-9 {
                // Both vanish (dead unit); nothing to compare.
                continue;
            }
            let rel = (g[i] - fd).abs() / scale;
            worst = worst.max(rel);
            assert!(rel < 1e-3, "param {i}: analytic {} vs fd {fd} (rel {rel})", g[i]);
        }
    }
    println!("max relative gradient error {worst:.2e}");
}

#[test]
fn kl_gradient_alone_matches_closed_form() {
    let m = miniature(9);
    let x = vec![0.5; 64];
    let f = m.forward(&x, Sampling::Mean).unwrap();
    let mut g = vec![0.0; m.n_params()];
    m.backward(&f, &vec![0.0; 64], 1.0, &mut g);
    // ∂KL/∂b_μ = μ and ∂KL/∂b_logvar = (σ² − 1)/2.
    let l = &m.layout;
    for k in 0..2 {
        assert!((g[l.mu_b + k] - f.mu[k]).abs() < 1e-12);
        let var = f.log_var[k].exp();
        assert!((g[l.lv_b + k] - 0.5 * (var - 1.0)).abs() < 1e-12);
    }
}
