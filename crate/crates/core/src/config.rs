//! Layered run configuration: command-line values over a JSON config file
//! over built-in defaults.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::double::QuasiTriple;
use crate::error::{Error, Result};
use crate::lie::{GroupKind, Involution, LieContext};
use crate::sampling::DEFAULT_SEED;

/// Environment variable naming the JSON config file.
pub const CONFIG_ENV: &str = "QPLAB_CONFIG";

pub const DEFAULT_ABS_TOL: f64 = 1e-10;
pub const DEFAULT_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SigmaChoice {
    #[serde(rename = "id")]
    Identity,
    #[serde(rename = "adH")]
    AdH,
}

impl SigmaChoice {
    pub fn involution(self, ctx: &LieContext) -> Involution {
        match self {
            SigmaChoice::Identity => Involution::Identity,
            SigmaChoice::AdH => Involution::standard(ctx),
        }
    }

    pub fn quasi_triple(self, ctx: LieContext) -> Result<QuasiTriple> {
        let sigma = self.involution(&ctx);
        QuasiTriple::new(ctx, sigma)
    }
}

impl fmt::Display for SigmaChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SigmaChoice::Identity => "id",
            SigmaChoice::AdH => "adH",
        })
    }
}

impl FromStr for SigmaChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "id" => Ok(SigmaChoice::Identity),
            "adH" | "adh" => Ok(SigmaChoice::AdH),
            other => Err(Error::InvalidArgument(format!("unknown sigma '{other}' (expected id or adH)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::InvalidArgument(format!("unknown format '{other}' (expected csv or json)"))),
        }
    }
}

/// Default absolute and relative tolerances plus an optional value that
/// replaces every numeric tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub abs: f64,
    pub rel: f64,
    #[serde(rename = "override", skip_serializing_if = "Option::is_none", default)]
    pub override_all: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { abs: DEFAULT_ABS_TOL, rel: DEFAULT_REL_TOL, override_all: None }
    }
}

/// Partial tolerances as they appear in a config file or on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceLayer {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub abs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rel: Option<f64>,
    #[serde(rename = "override", skip_serializing_if = "Option::is_none", default)]
    pub override_all: Option<f64>,
}

/// One layer of configuration; unset fields fall through to the next layer.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub group: Option<GroupKind>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sigma: Option<SigmaChoice>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub form_scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tolerances: Option<ToleranceLayer>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub format: Option<OutputFormat>,
}

impl ConfigLayer {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("config file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Loads the file named by `QPLAB_CONFIG`. Unset or not-yet-created files give an empty layer.
    pub fn from_env() -> Result<Self> {
        match std::env::var_os(CONFIG_ENV) {
            Some(p) if !p.is_empty() && Path::new(&p).exists() => Self::load(Path::new(&p)),
            _ => Ok(Self::default()),
        }
    }

    /// `self` where set, otherwise `lower`.
    pub fn over(&self, lower: &ConfigLayer) -> ConfigLayer {
        let tolerances = match (self.tolerances, lower.tolerances) {
            (Some(a), Some(b)) => Some(ToleranceLayer {
                abs: a.abs.or(b.abs),
                rel: a.rel.or(b.rel),
                override_all: a.override_all.or(b.override_all),
            }),
            (a, b) => a.or(b),
        };
        ConfigLayer {
            group: self.group.or(lower.group),
            sigma: self.sigma.or(lower.sigma),
            form_scale: self.form_scale.or(lower.form_scale),
            seed: self.seed.or(lower.seed),
            tolerances,
            format: self.format.or(lower.format),
        }
    }
}

/// Fully resolved configuration.
///
/// `group` and `sigma` stay optional: unset means "every family the command
/// covers".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub group: Option<GroupKind>,
    pub sigma: Option<SigmaChoice>,
    pub form_scale: f64,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            group: None,
            sigma: None,
            form_scale: 1.0,
            seed: DEFAULT_SEED,
            tolerances: Tolerances::default(),
            format: OutputFormat::Csv,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    /// Resolves a layer over the built-in defaults and validates it.
    pub fn from_layer(layer: &ConfigLayer) -> Result<Self> {
        let d = RunConfig::default();
        let t = layer.tolerances.unwrap_or_default();
        let tolerances = Tolerances {
            abs: positive("tolerances.abs", t.abs.unwrap_or(d.tolerances.abs))?,
            rel: positive("tolerances.rel", t.rel.unwrap_or(d.tolerances.rel))?,
            override_all: t.override_all.map(|v| positive("tolerance override", v)).transpose()?,
        };
        Ok(RunConfig {
            group: layer.group,
            sigma: layer.sigma,
            form_scale: positive("form_scale", layer.form_scale.unwrap_or(d.form_scale))?,
            seed: layer.seed.unwrap_or(d.seed),
            tolerances,
            format: layer.format.unwrap_or(d.format),
        })
    }

    /// Command-line layer over file layer over defaults.
    pub fn resolve(flags: &ConfigLayer, file: &ConfigLayer) -> Result<Self> {
        Self::from_layer(&flags.over(file))
    }

    /// The same configuration as a fully populated layer.
    pub fn to_layer(&self) -> ConfigLayer {
        ConfigLayer {
            group: self.group,
            sigma: self.sigma,
            form_scale: Some(self.form_scale),
            seed: Some(self.seed),
            tolerances: Some(ToleranceLayer {
                abs: Some(self.tolerances.abs),
                rel: Some(self.tolerances.rel),
                override_all: self.tolerances.override_all,
            }),
            format: Some(self.format),
        }
    }

    /// The context for `group`, or `fallback` when no group is set.
    pub fn context(&self, fallback: GroupKind) -> Result<LieContext> {
        LieContext::new(self.group.unwrap_or(fallback), self.form_scale)
    }
}

/// Sets `form_scale` in the JSON config at `path`, keeping its other keys.
pub fn persist_form_scale(path: &Path, form_scale: f64) -> Result<()> {
    positive("form_scale", form_scale)?;
    let mut layer = if path.exists() { ConfigLayer::load(path)? } else { ConfigLayer::default() };
    layer.form_scale = Some(form_scale);
    let mut text = serde_json::to_string_pretty(&layer)
        .map_err(|e| Error::InvalidArgument(format!("cannot encode config: {e}")))?;
    text.push('\n');
    std::fs::write(path, text)
        .map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let file = ConfigLayer::from_json(r#"{"form_scale": 2.0, "seed": 7, "group": "sl3r"}"#).unwrap();
        let flags = ConfigLayer { seed: Some(9), ..ConfigLayer::default() };
        let cfg = RunConfig::resolve(&flags, &file).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.form_scale, 2.0);
        assert_eq!(cfg.group, Some(GroupKind::SL3R));
        assert_eq!(cfg.format, OutputFormat::Csv);
        assert_eq!(RunConfig::resolve(&ConfigLayer::default(), &ConfigLayer::default()).unwrap(), RunConfig::default());
    }

    #[test]
    fn tolerance_layers_merge_fieldwise() {
        let file = ConfigLayer::from_json(r#"{"tolerances": {"abs": 1e-8}}"#).unwrap();
        let flags = ConfigLayer::from_json(r#"{"tolerances": {"override": 1e-3}}"#).unwrap();
        let cfg = RunConfig::resolve(&flags, &file).unwrap();
        assert_eq!(cfg.tolerances.abs, 1e-8);
        assert_eq!(cfg.tolerances.rel, DEFAULT_REL_TOL);
        assert_eq!(cfg.tolerances.override_all, Some(1e-3));
    }

    #[test]
    fn rejects_bad_values() {
        assert!(ConfigLayer::from_json(r#"{"colour": 1}"#).is_err());
        assert!(ConfigLayer::from_json(r#"{"group": "sl9r"}"#).is_err());
        assert!(ConfigLayer::from_json(r#"{"sigma": "twist"}"#).is_err());
        let bad = ConfigLayer { form_scale: Some(-1.0), ..ConfigLayer::default() };
        assert!(RunConfig::from_layer(&bad).is_err());
    }

    #[test]
    fn layer_roundtrip() {
        let cfg = RunConfig {
            group: Some(GroupKind::Su2),
            sigma: Some(SigmaChoice::AdH),
            form_scale: 0.5,
            seed: 3,
            tolerances: Tolerances { abs: 1e-9, rel: 1e-8, override_all: Some(1e-4) },
            format: OutputFormat::Json,
        };
        let json = serde_json::to_string(&cfg.to_layer()).unwrap();
        let back = RunConfig::from_layer(&ConfigLayer::from_json(&json).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn persist_keeps_other_keys() {
        let dir = std::env::temp_dir().join(format!("qplab-config-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("cfg.json");
        std::fs::write(&path, r#"{"seed": 11}"#).unwrap();
        persist_form_scale(&path, 0.25).unwrap();
        let layer = ConfigLayer::load(&path).unwrap();
        assert_eq!(layer.seed, Some(11));
        assert_eq!(layer.form_scale, Some(0.25));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
