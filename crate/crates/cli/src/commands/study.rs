use serde::{Deserialize, Serialize};
use sfharris::simstudy::{run_process_study, run_sv_study, ProcessFamily, StudyConfig};

use super::in_run_dir;
use crate::cli::{StudyArgs, StudyKindArg};
use crate::error::CliError;
use crate::manifest::load_config;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    #[default]
    ProcessUniform,
    ProcessGig,
    Sv,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct StudyFile {
    pub kind: StudyKind,
    #[serde(flatten)]
    pub study: StudyConfig,
}

pub fn run(a: StudyArgs) -> Result<(), CliError> {
    let (mut cfg, replay_seed) = load_config::<StudyFile>(a.common.config.as_deref())?;
    if let Some(k) = a.kind {
        cfg.kind = match k {
            StudyKindArg::ProcessUniform => StudyKind::ProcessUniform,
            StudyKindArg::ProcessGig => StudyKind::ProcessGig,
            StudyKindArg::Sv => StudyKind::Sv,
        };
    }
    let s = &mut cfg.study;
    if a.full {
        s.replications = 100;
    }
    s.replications = a.replications.unwrap_or(s.replications);
    if let Some(n) = &a.sample_sizes {
        s.sample_sizes = n.clone();
    }
    if let Some(m) = &a.methods {
        s.methods = m.clone();
    }
    if let Some(seed) = a.common.seed.or(replay_seed) {
        s.seed = seed;
    }
    s.validate().map_err(CliError::Invalid)?;
    let seed = s.seed;

    in_run_dir(&a.common, "study", seed, &cfg, |dir| {
        let report = match cfg.kind {
            StudyKind::ProcessUniform => run_process_study(&cfg.study, ProcessFamily::Uniform5),
            StudyKind::ProcessGig => run_process_study(&cfg.study, ProcessFamily::Gig),
            StudyKind::Sv => run_sv_study(&cfg.study),
        }
        .map_err(CliError::Invalid)?;
        let failures = report.raw.iter().filter(|r| r.failure.is_some()).count();
        dir.write_text("report.csv", &report.to_csv())?;
        let md = report.to_markdown();
        dir.write_text("report.md", &md)?;
        dir.write_json("raw.json", &report.raw)?;
        dir.set_audit(serde_json::json!({ "records": report.raw.len(), "failed_fits": failures }));
        print!("{md}");
        Ok(())
    })
}
