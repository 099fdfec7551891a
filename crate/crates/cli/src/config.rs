//! Run configuration: built-in defaults, an optional TOML file, and flag
//! overrides, merged in that order.  The merged configuration is embedded in
//! every output payload so results are self-describing.

use std::path::Path;

use serde::{Deserialize, Serialize};

use k3sw::{BaseOptions, DegreeOptions, EnumOptions, Error, FamilyOptions, Result, SwOptions};

/// Output format of the result payload.  `csv` is available for the tabular
/// commands (`roots`, `sw-matrix`, `scan`); everything supports `json`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Every knob of a run.  A TOML file with these field names overrides the
/// defaults, and command-line flags override the file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Radius of the root enumeration.
    pub enumeration_bound: f64,
    /// Starting family parameter; certification halves it as needed.
    pub epsilon: f64,
    /// Sphere-grid refinement level the degree engine starts from (also the
    /// level of the wall-certification sweep).
    pub grid_level_start: u32,
    /// Finest refinement level the degree engine may escalate to.
    pub grid_level_cap: u32,
    /// Frame orthonormalization tolerance.
    pub tolerance: f64,
    /// Seed behind every pseudo-random draw of the run.
    pub seed: u64,
    /// Where the result payload is written; `-` selects standard output.
    pub output_path: String,
    /// Payload format.
    pub format: Format,
    /// Cap on how many vectors the enumeration may materialize.
    pub max_vectors: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            enumeration_bound: 1.5,
            epsilon: 0.1,
            grid_level_start: 4,
            grid_level_cap: 8,
            tolerance: 1e-9,
            seed: 0,
            output_path: "out.json".to_string(),
            format: Format::Json,
            max_vectors: 1_000_000,
        }
    }
}

impl RunConfig {
    /// Defaults, or the parsed TOML file when one is given.  Unreadable or
    /// malformed files are input errors.
    pub fn load(path: Option<&Path>) -> Result<RunConfig> {
        match path {
            None => Ok(RunConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::Input(format!("config {}: {e}", p.display())))?;
                toml::from_str(&text)
                    .map_err(|e| Error::Input(format!("config {}: {e}", p.display())))
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.enumeration_bound.is_finite() || self.enumeration_bound < 0.0 {
            return Err(Error::Input(format!(
                "enumeration_bound must be non-negative and finite, got {}",
                self.enumeration_bound
            )));
        }
        if !self.epsilon.is_finite() || self.epsilon <= 0.0 {
            return Err(Error::Input(format!(
                "epsilon must be positive and finite, got {}",
                self.epsilon
            )));
        }
        if self.grid_level_start == 0 {
            return Err(Error::Input("grid_level_start must be positive".into()));
        }
        if self.grid_level_start > self.grid_level_cap {
            return Err(Error::Input(format!(
                "grid_level_start ({}) must not exceed grid_level_cap ({})",
                self.grid_level_start, self.grid_level_cap
            )));
        }
        if !self.tolerance.is_finite() || self.tolerance <= 0.0 {
            return Err(Error::Input(format!(
                "tolerance must be positive and finite, got {}",
                self.tolerance
            )));
        }
        if self.max_vectors == 0 {
            return Err(Error::Input("max_vectors must be positive".into()));
        }
        if self.output_path.is_empty() {
            return Err(Error::Input("output_path must not be empty".into()));
        }
        Ok(())
    }

    pub fn enum_options(&self) -> EnumOptions {
        EnumOptions {
            bound: self.enumeration_bound,
            max_vectors: self.max_vectors,
            blocks: None,
        }
    }

    pub fn base_options(&self) -> BaseOptions {
        BaseOptions {
            tolerance: self.tolerance,
            ..BaseOptions::default()
        }
    }

    pub fn family_options(&self) -> FamilyOptions {
        FamilyOptions {
            epsilon_start: self.epsilon,
            grid_level: self.grid_level_start,
            ..FamilyOptions::default()
        }
    }

    pub fn degree_options(&self) -> DegreeOptions {
        DegreeOptions {
            level_start: self.grid_level_start,
            level_cap: self.grid_level_cap,
            seed: self.seed,
            ..DegreeOptions::default()
        }
    }

    pub fn sw_options(&self) -> SwOptions {
        SwOptions {
            family: self.family_options(),
            degree: self.degree_options(),
        }
    }
}
