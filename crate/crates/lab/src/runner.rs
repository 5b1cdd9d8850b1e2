//! Runs a scenario: builds it, executes the tasks in parallel and writes
//! tables plus a `summary.json` in task order.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::build::Built;
use crate::error::{exit, LabError, Result};
use crate::scenario::Scenario;
use crate::tasks::{run_task, Perturbed, TaskOutput, TaskSummary};

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    /// Uncertified rows turn the exit code to 3.
    pub strict: bool,
}

#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub scenario: String,
    pub seed: u64,
    pub strict: bool,
    pub exit_code: u8,
    pub tasks: Vec<TaskSummary>,
    pub perturbed_radii: Vec<Perturbed>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub summary: RunSummary,
    pub outputs: Vec<TaskOutput>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> u8 {
        self.summary.exit_code
    }
}

/// Input errors beat numerical aborts, which beat failed assertions.
pub fn exit_code(outputs: &[TaskOutput], strict: bool) -> u8 {
    if outputs.iter().any(|o| o.failure == exit::INPUT) {
        return exit::INPUT;
    }
    if outputs.iter().any(|o| o.failure == exit::UNCERTIFIED || (strict && !o.fully_certified())) {
        return exit::UNCERTIFIED;
    }
    if outputs.iter().any(|o| !o.assertions_passed()) {
        return exit::ASSERTION;
    }
    exit::OK
}

fn default_out(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "scenario".into());
    PathBuf::from("nevlab-out").join(stem)
}

pub fn run_path(path: &Path, opts: &RunOptions) -> Result<RunOutcome> {
    let s = Scenario::from_path(path)?;
    let out = opts
        .out
        .clone()
        .or_else(|| s.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| default_out(path));
    let name = match &s.name {
        Some(n) => n.clone(),
        None => path.file_stem().map(|x| x.to_string_lossy().into_owned()).unwrap_or_else(|| s.display_name()),
    };
    run(&s, &name, &out, opts)
}

pub fn run(s: &Scenario, name: &str, out: &Path, opts: &RunOptions) -> Result<RunOutcome> {
    s.validate()?;
    let built = Built::new(s)?;
    let work = || -> Vec<TaskOutput> { s.tasks.par_iter().map(|&t| run_task(t, s, &built)).collect() };
    let outputs = match opts.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| LabError::input("--threads", e.to_string()))?
            .install(work),
        None => work(),
    };
    fs::create_dir_all(out).map_err(|e| LabError::io(out, e))?;
    for o in &outputs {
        for (file, table) in &o.tables {
            let p = out.join(file);
            fs::write(&p, table.to_csv()).map_err(|e| LabError::io(&p, e))?;
        }
    }
    let summary = RunSummary {
        scenario: name.to_string(),
        seed: s.seed,
        strict: opts.strict,
        exit_code: exit_code(&outputs, opts.strict),
        tasks: outputs.iter().map(|o| o.summary.clone()).collect(),
        perturbed_radii: outputs.iter().flat_map(|o| o.perturbed.iter().cloned()).collect(),
    };
    let p = out.join("summary.json");
    let mut text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    text.push('\n');
    fs::write(&p, text).map_err(|e| LabError::io(&p, e))?;
    Ok(RunOutcome { out_dir: out.to_path_buf(), summary, outputs })
}
