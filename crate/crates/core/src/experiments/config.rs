//! Experiment configuration, parameter rules and the configuration hash.

use crate::distance::Method;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Verify,
    Rate,
    Tail,
    LinearPart,
    Lambda,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Verify => "verify",
            ExperimentKind::Rate => "rate",
            ExperimentKind::Tail => "tail",
            ExperimentKind::LinearPart => "linear-part",
            ExperimentKind::Lambda => "lambda",
        }
    }
}

/// A parameter rule such as `4*sqrt(log n)`, `4*n`, `T0*n` or a constant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Rule {
    Constant(f64),
    SqrtLogN(f64),
    LinearN(f64),
    T0TimesN(f64),
}

impl Rule {
    pub fn parse(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_ascii_lowercase();
        if let Ok(v) = compact.parse::<f64>() {
            return Ok(Rule::Constant(v));
        }
        let (coef, rest) = match compact.split_once('*') {
            Some((c, r)) if c.parse::<f64>().is_ok() => (c.parse::<f64>().expect("checked"), r.to_string()),
            _ => (1.0, compact.clone()),
        };
        match rest.as_str() {
            "sqrt(logn)" | "sqrt(ln(n))" | "sqrt(log(n))" | "sqrt(lnn)" => Ok(Rule::SqrtLogN(coef)),
            "n" => Ok(Rule::LinearN(coef)),
            "t0*n" => Ok(Rule::T0TimesN(coef)),
            _ => Err(Error::InvalidInput(format!("cannot parse rule `{s}`"))),
        }
    }

    pub fn eval(self, n: usize, t0: f64) -> f64 {
        let nf = n as f64;
        match self {
            Rule::Constant(v) => v,
            Rule::SqrtLogN(c) => c * nf.ln().sqrt(),
            Rule::LinearN(c) => c * nf,
            Rule::T0TimesN(c) => c * t0 * nf,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model_name: String,
    pub n_list: Vec<usize>,
    pub directions_per_n: usize,
    pub distance_method: Method,
    pub samples: usize,
    pub seed: u64,
    #[serde(rename = "T0_rule")]
    pub t0_rule: String,
    #[serde(rename = "T_rule")]
    pub t_rule: String,
    /// Target accuracy of the inversion method.
    pub accuracy: f64,
    /// Use the single direction (1/√n, …, 1/√n) instead of random directions.
    pub equal_coefficients: bool,
    #[serde(skip_serializing, default)]
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    /// Defaults for one experiment kind.
    pub fn default_for(kind: ExperimentKind) -> Self {
        let base = Self {
            model_name: "uniform_product".into(),
            n_list: vec![16, 32, 64],
            directions_per_n: 100,
            distance_method: Method::Inversion,
            samples: 100_000,
            seed: 1,
            t0_rule: "4*sqrt(log n)".into(),
            t_rule: "4*n".into(),
            accuracy: 1e-7,
            equal_coefficients: false,
            output_dir: PathBuf::from("out"),
        };
        match kind {
            ExperimentKind::Rate => base,
            ExperimentKind::Tail => Self { n_list: vec![64], directions_per_n: 2000, t_rule: "T0*n".into(), ..base },
            ExperimentKind::LinearPart => Self { model_name: "centered_exp".into(), n_list: vec![16, 32, 64, 128], ..base },
            ExperimentKind::Verify => Self { model_name: "all".into(), n_list: vec![32], directions_per_n: 500, samples: 1_000_000, ..base },
            ExperimentKind::Lambda => Self { model_name: "all".into(), n_list: vec![6], samples: 1_000_000, ..base },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() {
            return Err(Error::InvalidInput("n_list must not be empty".into()));
        }
        if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("n_list must be strictly ascending".into()));
        }
        if let Some(&n) = self.n_list.iter().find(|&&n| n < 3) {
            return Err(Error::InvalidDimension { n, min: 3 });
        }
        if self.directions_per_n < 10 && !self.equal_coefficients {
            return Err(Error::InvalidInput(format!("directions_per_n must be >= 10, got {}", self.directions_per_n)));
        }
        if self.samples == 0 {
            return Err(Error::InvalidInput("samples must be positive".into()));
        }
        Rule::parse(&self.t0_rule)?;
        Rule::parse(&self.t_rule)?;
        Ok(())
    }

    pub fn t0(&self, n: usize) -> Result<f64> {
        Ok(Rule::parse(&self.t0_rule)?.eval(n, 0.0))
    }

    pub fn t(&self, n: usize) -> Result<f64> {
        let t0 = self.t0(n)?;
        Ok(Rule::parse(&self.t_rule)?.eval(n, t0))
    }

    /// Hex SHA-256 (first 16 digits) of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}
