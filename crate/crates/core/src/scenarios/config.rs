//! Plain-text scenario configuration: `[section]` headers with `key = value`
//! pairs, widely parsable and diff-friendly.

use std::collections::BTreeMap;

use crate::error::ConfigError;
use crate::ring::{Ctx, EpsGrid, Gauge, GaugeKind, RingParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeavisideVariant {
    Mollifier,
    Smoothstep,
}

/// Parsed configuration: sections of key-value pairs.
#[derive(Clone, Debug, Default)]
pub struct ScenarioConfig {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut out = ScenarioConfig::default();
        let mut current = String::from("");
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') {
                if !line.ends_with(']') {
                    return Err(ConfigError {
                        key: format!("line {}", lineno + 1),
                        reason: "unterminated section header".into(),
                    });
                }
                current = line[1..line.len() - 1].trim().to_string();
                out.sections.entry(current.clone()).or_default();
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(ConfigError {
                    key: format!("line {}", lineno + 1),
                    reason: format!("expected key = value, got `{line}`"),
                });
            };
            out.sections
                .entry(current.clone())
                .or_default()
                .insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(out)
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections
            .get(section)
            .and_then(|m| m.get(key))
            .map(|s| s.as_str())
    }

    pub fn f64_or(&self, section: &str, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.get(section, key) {
            None => Ok(default),
            Some(s) => s.parse().map_err(|_| ConfigError {
                key: format!("{section}.{key}"),
                reason: format!("not a number: `{s}`"),
            }),
        }
    }

    pub fn usize_or(&self, section: &str, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.get(section, key) {
            None => Ok(default),
            Some(s) => s.parse().map_err(|_| ConfigError {
                key: format!("{section}.{key}"),
                reason: format!("not an integer: `{s}`"),
            }),
        }
    }

    pub fn heaviside_or(
        &self,
        section: &str,
        default: HeavisideVariant,
    ) -> Result<HeavisideVariant, ConfigError> {
        match self.get(section, "heaviside") {
            None => Ok(default),
            Some("mollifier") => Ok(HeavisideVariant::Mollifier),
            Some("smoothstep") => Ok(HeavisideVariant::Smoothstep),
            Some(other) => Err(ConfigError {
                key: format!("{section}.heaviside"),
                reason: format!("expected mollifier|smoothstep, got `{other}`"),
            }),
        }
    }

    /// Build the evaluation context from the `[grid]` section (defaults:
    /// identity gauge, its default grid).
    pub fn build_ctx(&self) -> Result<Ctx, ConfigError> {
        let gauge = match self.get("grid", "gauge") {
            None | Some("identity") => Gauge::identity(),
            Some("exp_inv") => Gauge::exp_inv(),
            Some(other) => {
                return Err(ConfigError {
                    key: "grid.gauge".into(),
                    reason: format!("expected identity|exp_inv, got `{other}`"),
                })
            }
        };
        let kind = gauge.kind();
        let defaults = match kind {
            GaugeKind::ExpInv => (0.5, 0.82, 24usize),
            _ => (0.5, 0.5, 24usize),
        };
        let eps0 = self.f64_or("grid", "eps0", defaults.0)?;
        let ratio = self.f64_or("grid", "ratio", defaults.1)?;
        let n = self.usize_or("grid", "n", defaults.2)?;
        let grid = EpsGrid::geometric(eps0, ratio, n).map_err(|e| ConfigError {
            key: "grid".into(),
            reason: e.to_string(),
        })?;
        Ctx::new(gauge, grid, RingParams::default()).map_err(|e| ConfigError {
            key: "grid".into(),
            reason: e.to_string(),
        })
    }
}
