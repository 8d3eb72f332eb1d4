//! Model confidence set with the range-type `T_max` statistic and a
//! moving-block bootstrap.

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::SimRng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McsConfig {
    pub alpha: f64,
    pub reps: usize,
    /// Defaults to `ceil(n^(1/3))`.
    pub block_length: Option<usize>,
    pub seed: u64,
}

impl Default for McsConfig {
    fn default() -> Self {
        Self {
            alpha: 0.10,
            reps: 5000,
            block_length: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McsResult {
    /// MCS p-value per model (input order).
    pub p_values: Vec<f64>,
    /// Indices of models with p-value >= alpha.
    pub survivors: Vec<usize>,
    /// Models in elimination order; the last entry is never eliminated.
    pub elimination_order: Vec<usize>,
}

impl McsResult {
    pub fn contains(&self, model: usize) -> bool {
        self.survivors.contains(&model)
    }
}

pub fn default_block_length(n: usize) -> usize {
    ((n as f64).cbrt().ceil() as usize).max(1)
}

fn block_means<R: Rng + ?Sized>(rng: &mut R, losses: &[Vec<f64>], prefix: &[Vec<f64>], block: usize) -> Vec<f64> {
    let n = losses[0].len();
    let mut sums = vec![0.0; losses.len()];
    let mut filled = 0;
    while filled < n {
        let start = rng.random_range(0..=n - block);
        let len = block.min(n - filled);
        for (s, p) in sums.iter_mut().zip(prefix) {
            *s += p[start + len] - p[start];
        }
        filled += len;
    }
    sums.iter().map(|s| s / n as f64).collect()
}

pub fn model_confidence_set(losses: &[Vec<f64>], config: &McsConfig) -> Result<McsResult> {
    let m = losses.len();
    if m < 2 {
        return Err(Error::InvalidParameter("the model confidence set needs at least two models".into()));
    }
    let n = losses[0].len();
    if losses.iter().any(|l| l.len() != n) {
        return Err(Error::Dimension("loss series differ in length".into()));
    }
    if n < 2 || losses.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("need at least two finite losses per model".into()));
    }
    if !(config.alpha > 0.0 && config.alpha < 1.0) || config.reps == 0 {
        return Err(Error::InvalidParameter("alpha must lie in (0, 1) and reps >= 1".into()));
    }
    let block = config.block_length.unwrap_or_else(|| default_block_length(n)).clamp(1, n);

    let means: Vec<f64> = losses.iter().map(|l| l.iter().sum::<f64>() / n as f64).collect();
    let prefix: Vec<Vec<f64>> = losses
        .iter()
        .map(|l| {
            let mut p = Vec::with_capacity(n + 1);
            p.push(0.0);
            for v in l {
                p.push(p.last().unwrap() + v);
            }
            p
        })
        .collect();
    // boot[(b, i)]: bootstrap mean loss of model i in replication b
    let rows: Vec<Vec<f64>> = (0..config.reps)
        .into_par_iter()
        .map(|b| block_means(&mut SimRng::stream(config.seed, b as u64), losses, &prefix, block))
        .collect();
    let boot = DMatrix::from_fn(config.reps, m, |b, i| rows[b][i]);

    let mut alive: Vec<usize> = (0..m).collect();
    let mut order = Vec::with_capacity(m);
    let mut p_values = vec![1.0; m];
    let mut running = 0.0f64;
    while alive.len() > 1 {
        let k = alive.len() as f64;
        let centre = alive.iter().map(|&i| means[i]).sum::<f64>() / k;
        let d: Vec<f64> = alive.iter().map(|&i| means[i] - centre).collect();
        let boot_d = DMatrix::from_fn(config.reps, alive.len(), |b, a| {
            let bc = alive.iter().map(|&i| boot[(b, i)]).sum::<f64>() / k;
            boot[(b, alive[a])] - bc - d[a]
        });
        let sd: Vec<f64> = (0..alive.len())
            .map(|a| (boot_d.column(a).iter().map(|v| v * v).sum::<f64>() / config.reps as f64).sqrt())
            .collect();
        if sd.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::Degenerate("bootstrap variance of a loss differential is zero".into()));
        }
        let t: Vec<f64> = d.iter().zip(&sd).map(|(x, s)| x / s).collect();
        let (worst, t_max) = t
            .iter()
            .copied()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty");
        let exceed = (0..config.reps)
            .filter(|&b| {
                let stat = (0..alive.len()).map(|a| boot_d[(b, a)] / sd[a]).fold(f64::NEG_INFINITY, f64::max);
                stat >= t_max
            })
            .count();
        let p = exceed as f64 / config.reps as f64;
        running = running.max(p);
        let removed = alive.remove(worst);
        p_values[removed] = running;
        order.push(removed);
    }
    order.push(alive[0]);
    let survivors = (0..m).filter(|&i| p_values[i] >= config.alpha).collect();
    Ok(McsResult {
        p_values,
        survivors,
        elimination_order: order,
    })
}
