use serde::{Deserialize, Serialize};

/// Normal mixture approximating the `log(chi^2_1)` distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureTable {
    pub probabilities: Vec<f64>,
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
}

impl MixtureTable {
    /// Ten-component table of Omori, Chib, Shephard and Nakajima (2007).
    pub fn ten_component() -> Self {
        let probabilities = vec![
            0.00609, 0.04775, 0.13057, 0.20674, 0.22715, 0.18842, 0.12047, 0.05591, 0.01575, 0.00115,
        ];
        let total: f64 = probabilities.iter().sum();
        Self {
            probabilities: probabilities.into_iter().map(|p| p / total).collect(),
            means: vec![
                1.92677, 1.34744, 0.73504, 0.02266, -0.85173, -1.97278, -3.46788, -5.55246, -8.68384, -14.65000,
            ],
            variances: vec![
                0.11265, 0.17788, 0.26768, 0.40611, 0.62699, 0.98583, 1.57469, 2.54498, 4.16591, 7.33342,
            ],
        }
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.probabilities.iter().zip(&self.means).map(|(p, m)| p * m).sum()
    }

    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        self.probabilities
            .iter()
            .zip(&self.means)
            .zip(&self.variances)
            .map(|((p, m), v)| p * (v + (m - mu).powi(2)))
            .sum()
    }
}

impl Default for MixtureTable {
    fn default() -> Self {
        Self::ten_component()
    }
}
