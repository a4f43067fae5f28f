//! Run manifests.
//!
//! ```toml
//! inputs = ["seq/a.txt", "seq/b.txt"]
//! output_dir = "out"
//! shuffle = true
//! seed = 7
//! preset = "a"
//! float_format = "hex"
//! overtime = true
//!
//! [config.som]
//! activation_threshold = 0.97
//!
//! [config.semmap]
//! summation_limit = 6
//! ```
//!
//! Relative paths are resolved against the manifest's directory. Values under
//! `[config]` are applied on top of the preset.

use std::path::{Path, PathBuf};

use semmap_core::olarfdssom::{FloatFormat, OlarfdssomConfig};
use semmap_core::pipeline::PipelineConfig;
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    #[default]
    A,
    B,
}

impl Preset {
    pub fn som(self) -> OlarfdssomConfig {
        match self {
            Preset::A => OlarfdssomConfig::preset_a(),
            Preset::B => OlarfdssomConfig::preset_b(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunManifest {
    pub inputs: Vec<PathBuf>,
    pub output_dir: PathBuf,
    pub config: PipelineConfig,
    /// Train in a seeded random order instead of file order.
    pub shuffle: bool,
    pub seed: u64,
    pub float_format: FloatFormat,
    /// Also write the per-sequence two-checkpoint table.
    pub overtime: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestFile {
    inputs: Vec<PathBuf>,
    output_dir: PathBuf,
    #[serde(default)]
    shuffle: bool,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    preset: Preset,
    #[serde(default)]
    float_format: Option<String>,
    #[serde(default)]
    overtime: bool,
    #[serde(default)]
    config: Option<toml::Table>,
}

impl RunManifest {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read manifest {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    pub fn parse(text: &str, base: &Path) -> CliResult<Self> {
        let file: ManifestFile =
            toml::from_str(text).map_err(|e| CliError::Validation(format!("manifest: {e}")))?;
        let config = merge_config(file.preset, file.config)?;
        let float_format = match file.float_format {
            Some(s) => s.parse()?,
            None => FloatFormat::Decimal,
        };
        let resolve = |p: PathBuf| if p.is_absolute() { p } else { base.join(p) };
        let manifest = Self {
            inputs: file.inputs.into_iter().map(resolve).collect(),
            output_dir: resolve(file.output_dir),
            config,
            shuffle: file.shuffle,
            seed: file.seed,
            float_format,
            overtime: file.overtime,
        };
        Ok(manifest)
    }

    pub fn check_inputs(&self) -> CliResult<()> {
        if self.inputs.is_empty() {
            return Err(CliError::Validation("no input sequences".into()));
        }
        if let Some(missing) = self.inputs.iter().find(|p| !p.is_file()) {
            return Err(CliError::Validation(format!("input {} does not exist", missing.display())));
        }
        self.config.validate()?;
        Ok(())
    }
}

fn merge_config(preset: Preset, overrides: Option<toml::Table>) -> CliResult<PipelineConfig> {
    let mut table = toml::Table::try_from(PipelineConfig {
        som: preset.som(),
        ..PipelineConfig::default()
    })
    .map_err(|e| CliError::Runtime(e.to_string()))?;
    if let Some(over) = overrides {
        for (section, value) in over {
            let (Some(dst), toml::Value::Table(src)) = (table.get_mut(&section).and_then(|v| v.as_table_mut()), value)
            else {
                return Err(CliError::Validation(format!("manifest: unknown config section {section:?}")));
            };
            for (k, v) in src {
                if !dst.contains_key(&k) {
                    return Err(CliError::Validation(format!("manifest: unknown key {section}.{k}")));
                }
                let v = match (&dst[&k], v) {
                    (toml::Value::Float(_), toml::Value::Integer(i)) => toml::Value::Float(i as f64),
                    (_, v) => v,
                };
                dst.insert(k, v);
            }
        }
    }
    table
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Validation(format!("manifest config: {e}")))
}
