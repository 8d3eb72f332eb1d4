use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// Lags of the target panel only.
    Var,
    /// Lags plus exogenous predictors at lag one.
    Varx,
    /// One univariate autoregression per series.
    Ar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Volatility {
    Constant,
    Stochastic,
    Garch,
    StudentSv,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Var => "VAR",
            Family::Varx => "VARX",
            Family::Ar => "AR",
        })
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "VAR" => Ok(Family::Var),
            "VARX" => Ok(Family::Varx),
            "AR" => Ok(Family::Ar),
            _ => Err(Error::InvalidParameter(format!("unknown family `{s}`"))),
        }
    }
}

impl fmt::Display for Volatility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Volatility::Constant => "CONST",
            Volatility::Stochastic => "SV",
            Volatility::Garch => "GARCH",
            Volatility::StudentSv => "SVT",
        })
    }
}

impl FromStr for Volatility {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "CONST" => Ok(Volatility::Constant),
            "SV" => Ok(Volatility::Stochastic),
            "GARCH" => Ok(Volatility::Garch),
            "SVT" => Ok(Volatility::StudentSv),
            _ => Err(Error::InvalidParameter(format!("unknown volatility scheme `{s}`"))),
        }
    }
}

/// Minnesota-style shrinkage hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MinnesotaHyper {
    /// Overall tightness (prior std of the own first lag).
    pub overall: f64,
    /// Relative tightness of other series' lags.
    pub cross: f64,
    /// Lag-decay exponent.
    pub decay: f64,
    /// Relative tightness of exogenous predictors.
    pub exogenous: f64,
    /// Prior mean of the own first-lag coefficient.
    pub own_lag_mean: f64,
}

impl Default for MinnesotaHyper {
    fn default() -> Self {
        Self {
            overall: 0.2,
            cross: 0.5,
            decay: 2.0,
            exogenous: 0.5,
            own_lag_mean: 0.0,
        }
    }
}

impl MinnesotaHyper {
    pub fn validate(&self) -> Result<()> {
        let tight = [self.overall, self.cross, self.exogenous];
        if tight.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParameter("Minnesota tightness values must be > 0".into()));
        }
        if !(self.decay >= 0.0) {
            return Err(Error::InvalidParameter("lag decay must be >= 0".into()));
        }
        Ok(())
    }
}

/// What to estimate and how long to run the chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: Family,
    pub volatility: Volatility,
    pub lags: usize,
    pub n_iter: usize,
    pub n_burn: usize,
    pub prior: MinnesotaHyper,
    pub seed: u64,
    /// Retain full latent volatility paths per draw (memory heavy).
    #[serde(default)]
    pub keep_paths: bool,
}

impl ModelSpec {
    pub fn new(family: Family, volatility: Volatility) -> Self {
        Self {
            family,
            volatility,
            lags: 3,
            n_iter: 6000,
            n_burn: 1000,
            prior: MinnesotaHyper::default(),
            seed: 0,
            keep_paths: false,
        }
    }

    pub fn with_budget(mut self, n_iter: usize, n_burn: usize) -> Self {
        self.n_iter = n_iter;
        self.n_burn = n_burn;
        self
    }

    pub fn with_lags(mut self, lags: usize) -> Self {
        self.lags = lags;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn retained(&self) -> usize {
        self.n_iter - self.n_burn
    }

    pub fn validate(&self) -> Result<()> {
        if self.lags == 0 {
            return Err(Error::InvalidParameter("lag order must be >= 1".into()));
        }
        if self.n_burn >= self.n_iter {
            return Err(Error::InvalidParameter(format!(
                "burn-in {} must be smaller than iterations {}",
                self.n_burn, self.n_iter
            )));
        }
        if self.family == Family::Ar && self.volatility != Volatility::Constant {
            return Err(Error::InvalidParameter("univariate AR benchmarks use constant volatility".into()));
        }
        self.prior.validate()
    }

    /// Display label, e.g. `BVARX-SVt` or `BAR(1)`.
    pub fn label(&self) -> String {
        if self.family == Family::Ar {
            return format!("BAR({})", self.lags);
        }
        let base = match self.family {
            Family::Varx => "BVARX",
            _ => "BVAR",
        };
        match self.volatility {
            Volatility::Constant => base.to_string(),
            Volatility::Stochastic => format!("{base}-SV"),
            Volatility::Garch => format!("{base}-GARCH"),
            Volatility::StudentSv => format!("{base}-SVt"),
        }
    }

    /// Parses labels like `BVAR`, `BVARX-GARCH`, `BVAR-SVt`, `AR1`, `BAR(3)`.
    pub fn from_label(label: &str) -> Result<Self> {
        let norm = label.trim().to_ascii_uppercase().replace(['(', ')'], "");
        if let Some(p) = norm.strip_prefix("BAR").or_else(|| norm.strip_prefix("AR")) {
            let lags: usize = p
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("unknown model `{label}`")))?;
            return Ok(Self::new(Family::Ar, Volatility::Constant).with_lags(lags));
        }
        let (base, vol) = match norm.split_once('-') {
            Some((b, v)) => (b, v),
            None => (norm.as_str(), "CONST"),
        };
        let family = match base {
            "BVAR" | "VAR" => Family::Var,
            "BVARX" | "VARX" => Family::Varx,
            _ => return Err(Error::InvalidParameter(format!("unknown model `{label}`"))),
        };
        let volatility = Volatility::from_str(vol)?;
        Ok(Self::new(family, volatility))
    }
}
