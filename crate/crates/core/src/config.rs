//! Serde-friendly descriptions of domains and switch runs, used by the CLI
//! to read TOML configuration files.

use serde::{Deserialize, Serialize};

use crate::domain::{RingDomain, Segment};
use crate::error::{Result, RingError};
use crate::transport::SwitchSpec;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SegmentConfig {
    pub start: f64,
    pub end: f64,
    pub q: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DomainConfig {
    pub circumference: f64,
    /// Omitted segments mean a uniform potential (`q`, default 0).
    #[serde(default)]
    pub segments: Vec<SegmentConfig>,
    /// Uniform potential shortcut, ignored when `segments` is given.
    #[serde(default)]
    pub q: f64,
    pub attachments: Vec<f64>,
}

impl DomainConfig {
    pub fn build(&self) -> Result<RingDomain> {
        if self.segments.is_empty() {
            RingDomain::uniform(self.circumference, self.q, self.attachments.clone())
        } else {
            let segments = self
                .segments
                .iter()
                .map(|s| Segment {
                    start: s.start,
                    end: s.end,
                    q: s.q,
                })
                .collect();
            RingDomain::new(self.circumference, segments, self.attachments.clone())
        }
    }

    pub fn from_domain(domain: &RingDomain) -> Self {
        DomainConfig {
            circumference: domain.circumference(),
            segments: domain
                .segments()
                .iter()
                .map(|s| SegmentConfig {
                    start: s.start,
                    end: s.end,
                    q: s.q,
                })
                .collect(),
            q: 0.0,
            attachments: domain.attachments().to_vec(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SwitchConfig {
    pub open: DomainConfig,
    pub closed: DomainConfig,
    pub beta: f64,
    pub mu: f64,
    pub tau: f64,
    #[serde(default)]
    pub source: usize,
    #[serde(default = "default_drain")]
    pub drain: usize,
}

fn default_drain() -> usize {
    1
}

impl SwitchConfig {
    pub fn build(&self) -> Result<SwitchSpec> {
        let spec = SwitchSpec {
            open_domain: self.open.build()?,
            closed_domain: self.closed.build()?,
            beta: self.beta,
            mu: self.mu,
            tau: self.tau,
            source: self.source,
            drain: self.drain,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_spec(spec: &SwitchSpec) -> Self {
        SwitchConfig {
            open: DomainConfig::from_domain(&spec.open_domain),
            closed: DomainConfig::from_domain(&spec.closed_domain),
            beta: spec.beta,
            mu: spec.mu,
            tau: spec.tau,
            source: spec.source,
            drain: spec.drain,
        }
    }
}

impl std::str::FromStr for DomainConfig {
    type Err = RingError;

    fn from_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| RingError::InvalidArgument(format!("config parse: {e}")))
    }
}

impl std::str::FromStr for SwitchConfig {
    type Err = RingError;

    fn from_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| RingError::InvalidArgument(format!("config parse: {e}")))
    }
}
