//! Command-line driver: configuration, experiment runners and artifact output.

mod appendix_c;
pub mod config;
pub mod error;
mod experiments;
mod inputs;
pub mod output;
pub mod report;

use std::path::{Path, PathBuf};

pub use config::{ExperimentConfig, ExperimentKind};
pub use error::CliError;
pub use report::{read_report, Check, RunReport};

/// Command-line overrides applied on top of the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub experiment: Option<ExperimentKind>,
}

/// Reads the config, applies overrides and resolves the experiment.
pub fn resolve(kind: ExperimentKind, config_path: &Path, overrides: &Overrides) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(config_path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", config_path.display())))?;
    let mut cfg = ExperimentConfig::from_json(&text)?;
    for named in [cfg.experiment, overrides.experiment].into_iter().flatten() {
        if named != kind {
            return Err(CliError::Usage(format!(
                "config names experiment `{}` but the subcommand is `{}`",
                named.name(),
                kind.name()
            )));
        }
    }
    cfg.experiment = Some(kind);
    if let Some(seed) = overrides.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &overrides.out {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

/// Failure of a run; carries the report when it reached disk.
pub type RunFailure = (Option<Box<RunReport>>, CliError);

/// Runs one experiment. The report is written even when checks fail; the
/// error then carries it.
pub fn run(cfg: &ExperimentConfig) -> Result<RunReport, RunFailure> {
    let kind = cfg.experiment.ok_or_else(|| (None, CliError::Usage("no experiment selected".into())))?;
    let mut run = report::Run::new(cfg, kind.name()).map_err(|e| (None, e))?;
    let body = match kind {
        ExperimentKind::AppendixC => appendix_c::appendix_c(cfg, &mut run),
        ExperimentKind::Spectrum => experiments::spectrum(cfg, &mut run),
        ExperimentKind::Reconstruct => experiments::reconstruct(cfg, &mut run),
        ExperimentKind::Admissibility => experiments::admissibility_table(cfg, &mut run),
        ExperimentKind::Decompose => experiments::decompose(cfg, &mut run),
        ExperimentKind::EncodeSeries => experiments::encode_series_run(cfg, &mut run),
        ExperimentKind::FiniteModel => experiments::finite_model(cfg, &mut run),
        ExperimentKind::Lazy => experiments::lazy(cfg, &mut run),
        ExperimentKind::Bound => experiments::bound(cfg, &mut run),
    };
    body.map_err(|e| (None, e))?;
    run.finish().map_err(|(r, e)| (Some(r), e))
}
