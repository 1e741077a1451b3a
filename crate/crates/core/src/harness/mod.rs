//! Configuration, output files and the command-line front end.

mod cli;
mod image;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nash::{run, IterationParams, IterationState, RunReport};

pub use cli::{cli_main, Cli, Command, EXIT_CHECK, EXIT_CONFIG, EXIT_IO, EXIT_OK};
pub use image::{emit_image, image_samples, write_pgm};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub dump_fields: bool,
    pub emit_images: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("nsforge-out"), dump_fields: false, emit_images: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeConfig {
    pub hl_sweep: Vec<u64>,
    pub hhl_sweep: Vec<u64>,
    pub hhl_eps: crate::nash::Frac,
    pub mikado_sweep: Vec<u64>,
    pub mikado_eps: crate::nash::Frac,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            hl_sweep: vec![2, 4, 8, 16],
            hhl_sweep: vec![4, 16, 64],
            hhl_eps: crate::nash::Frac::new(1, 2),
            mikado_sweep: vec![16, 64],
            mikado_eps: crate::nash::Frac::new(1, 2),
        }
    }
}

/// Everything a run reads: iteration parameters, outputs and probe sweeps.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub iteration: IterationParams,
    pub output: OutputConfig,
    pub probes: ProbeConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: RunConfig = toml::from_str(text).map_err(|e| Error::Parameter(format!("config: {e}")))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.iteration.validate()?;
        for (name, s) in [("hl_sweep", &self.probes.hl_sweep), ("hhl_sweep", &self.probes.hhl_sweep), ("mikado_sweep", &self.probes.mikado_sweep)] {
            if s.iter().any(|&l| l < 2) {
                return Err(Error::Parameter(format!("{name}: frequencies must be >= 2")));
            }
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// Report JSON exactly as written to `report.json`.
pub fn report_json(report: &RunReport) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(report)?;
    v.push(b'\n');
    Ok(v)
}

/// Run the iteration and write `report.json`, `norms.csv`,
/// `paraproduct.csv` and, if asked, field dumps and images.
pub fn execute_run(cfg: &RunConfig) -> Result<(Vec<IterationState>, RunReport)> {
    cfg.validate()?;
    let (states, report) = run(&cfg.iteration)?;
    write_outputs(cfg, &states, &report)?;
    Ok((states, report))
}

pub fn write_outputs(cfg: &RunConfig, states: &[IterationState], report: &RunReport) -> Result<()> {
    let dir = &cfg.output.dir;
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("report.json"), report_json(report)?)?;
    report.norms.write(&dir.join("norms.csv"))?;
    if let Some(t) = report.diagnostics.paraproduct.last() {
        t.write(&dir.join("paraproduct.csv"))?;
    }
    for s in states {
        if cfg.output.dump_fields {
            s.dump(&dir.join(format!("state_{}", s.q)))?;
        }
        if cfg.output.emit_images {
            emit_image(&s.u, &dir.join(format!("u_{}_vorticity.pgm", s.q)))?;
            emit_image(&s.r, &dir.join(format!("R_{}_magnitude.pgm", s.q)))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip_and_defaults() {
        let c = RunConfig::default();
        let back = RunConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(back, c);
        let partial = RunConfig::from_toml("[iteration]\nbeta = 4\neps_gamma = \"1/2\"\n[output]\ndump_fields = true\n").unwrap();
        assert_eq!(partial.iteration.beta, 4);
        assert_eq!(partial.iteration.eps_gamma, crate::nash::Frac::new(1, 2));
        assert!(partial.output.dump_fields);
        assert_eq!(partial.probes, ProbeConfig::default());
    }

    #[test]
    fn config_rejects_unknown_and_invalid() {
        assert!(RunConfig::from_toml("[iteration]\nbogus = 1\n").is_err());
        assert!(RunConfig::from_toml("[iteration]\nbeta = 2\n").is_err());
        assert!(RunConfig::from_toml("[probes]\nhl_sweep = [1]\n").is_err());
    }
}
