use rand::Rng;

use super::models::Network;
use super::tensor::Tensor2;
use crate::error::Result;
use crate::rng;

pub const FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheck {
    pub max_rel: f64,
    pub max_abs: f64,
    pub checked: usize,
}

/// Compares analytic gradients with central differences. Dropout, when
/// `dropout_seed` is set, uses the same mask for every evaluation.
/// `sample` limits the check to that many randomly chosen parameters.
pub fn gradient_check<N: Network>(
    model: &N,
    x: &Tensor2,
    y: &Tensor2,
    dropout_seed: Option<u64>,
    sample: Option<(usize, u64)>,
) -> Result<GradCheck> {
    let loss = |m: &N, grads: Option<&mut [Tensor2]>| {
        let mut r = dropout_seed.map(|s| rng::stream(s, 0));
        m.loss_grad(x, y, r.as_mut(), grads)
    };
    let mut grads = model.zero_grads();
    loss(model, Some(&mut grads))?;
    let sizes: Vec<usize> = grads.iter().map(Tensor2::len).collect();
    let mut targets: Vec<(usize, usize)> = Vec::new();
    match sample {
        None => {
            for (g, &n) in sizes.iter().enumerate() {
                targets.extend((0..n).map(|i| (g, i)));
            }
        }
        Some((count, seed)) => {
            let total: usize = sizes.iter().sum();
            let mut r = rng::stream(seed, 7);
            for _ in 0..count {
                let mut k = r.random_range(0..total);
                let mut g = 0;
                while k >= sizes[g] {
                    k -= sizes[g];
                    g += 1;
                }
                targets.push((g, k));
            }
        }
    }
    let mut probe = model.clone();
    let mut out = GradCheck { max_rel: 0.0, max_abs: 0.0, checked: targets.len() };
    for (g, i) in targets {
        let orig = probe.params()[g].data()[i];
        probe.params_mut()[g].data_mut()[i] = orig + FD_STEP;
        let up = loss(&probe, None)?;
        probe.params_mut()[g].data_mut()[i] = orig - FD_STEP;
        let down = loss(&probe, None)?;
        probe.params_mut()[g].data_mut()[i] = orig;
        let numeric = (up - down) / (2.0 * FD_STEP);
        let analytic = grads[g].data()[i];
        let abs = (numeric - analytic).abs();
        out.max_abs = out.max_abs.max(abs);
        out.max_rel = out.max_rel.max(abs / numeric.abs().max(analytic.abs()).max(1e-6));
    }
    Ok(out)
}
