//! Benchmark harness over a directory of `.loop` programs.
//!
//! Each file declares its analysis degree in a `# degree: N` header line.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::frontend::parse;
use crate::oracle::{check_families, OracleConfig, Verdict};
use crate::report::{analyze, Config};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(600);

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: String,
    pub path: PathBuf,
    pub source: String,
    pub degree: u32,
}

/// Value of the `# degree: N` header, if present.
pub fn declared_degree(source: &str) -> Option<u32> {
    source.lines().find_map(|l| {
        let rest = l.trim().strip_prefix('#')?.trim().strip_prefix("degree:")?;
        rest.trim().parse().ok()
    })
}

/// All `*.loop` files of `dir`, sorted by name.
pub fn load_corpus(dir: &Path) -> Result<Vec<CorpusEntry>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "loop"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|path| {
            let source = fs::read_to_string(&path)
                .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            let degree = declared_degree(&source).ok_or_else(|| {
                Error::InvalidArgument(format!("{}: missing `# degree:` header", path.display()))
            })?;
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            Ok(CorpusEntry {
                name,
                path,
                source,
                degree,
            })
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub repetitions: usize,
    pub timeout: Duration,
    pub oracle: OracleConfig,
    pub analysis: Config,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            repetitions: 5,
            timeout: DEFAULT_TIMEOUT,
            oracle: OracleConfig::default(),
            analysis: Config::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Outcome {
    Done {
        median: Duration,
        invariants: usize,
        evident: usize,
        sound: bool,
        verdict: Verdict,
    },
    /// Did not finish within the timeout.
    OutOfTime,
    Failed(String),
}

#[derive(Clone, Debug)]
pub struct BenchRow {
    pub name: String,
    pub vars: usize,
    pub degree: u32,
    pub outcome: Outcome,
}

impl BenchRow {
    pub fn passed(&self) -> bool {
        matches!(&self.outcome, Outcome::Done { sound: true, verdict, invariants, .. }
            if verdict.passed && *invariants > 0)
    }
}

#[derive(Clone, Debug, Default)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub wall: Duration,
}

impl BenchReport {
    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(BenchRow::passed)
    }

    pub fn render_table(&self) -> String {
        let mut out = format!(
            "{:<12} {:>4} {:>7} {:>12} {:>11} {:>7}\n",
            "Name", "Var", "Degree", "Time (ms)", "Invariants", "Oracle"
        );
        for r in &self.rows {
            let (time, invs, verdict) = match &r.outcome {
                Outcome::Done {
                    median,
                    invariants,
                    evident,
                    sound,
                    verdict,
                } => (
                    format!("{:.3}", median.as_secs_f64() * 1000.0),
                    format!("{invariants} ({evident} ev.)"),
                    if *sound && verdict.passed { "pass" } else { "FAIL" }.to_string(),
                ),
                Outcome::OutOfTime => ("O.O.T.".into(), "-".into(), "-".into()),
                Outcome::Failed(e) => ("error".into(), "-".into(), e.clone()),
            };
            out.push_str(&format!(
                "{:<12} {:>4} {:>7} {:>12} {:>11} {:>7}\n",
                r.name, r.vars, r.degree, time, invs, verdict
            ));
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut v = json!({"name": r.name, "vars": r.vars, "degree": r.degree});
                match &r.outcome {
                    Outcome::Done {
                        median,
                        invariants,
                        evident,
                        sound,
                        verdict,
                    } => {
                        v["time_ms"] = json!(median.as_secs_f64() * 1000.0);
                        v["invariants"] = json!(invariants);
                        v["evident"] = json!(evident);
                        v["oracle"] = json!(if *sound && verdict.passed { "pass" } else { "fail" });
                        v["failure"] = json!(verdict.failure);
                    }
                    Outcome::OutOfTime => v["time_ms"] = json!("O.O.T."),
                    Outcome::Failed(e) => v["error"] = json!(e),
                }
                v
            })
            .collect();
        json!({"programs": rows, "wall_ms": self.wall.as_secs_f64() * 1000.0})
    }
}

fn median(mut times: Vec<Duration>) -> Duration {
    times.sort();
    times.get(times.len() / 2).copied().unwrap_or_default()
}

/// Analyzes one program `repetitions` times and checks the result with the
/// trace oracle.
pub fn run_entry(entry: &CorpusEntry, cfg: &BenchConfig) -> Result<(usize, Outcome)> {
    let p = parse(&entry.source)?;
    let mut acfg = cfg.analysis.clone();
    acfg.degree = entry.degree;
    acfg.init = None;
    let mut times = Vec::with_capacity(cfg.repetitions.max(1));
    let mut last = None;
    for _ in 0..cfg.repetitions.max(1) {
        let t = Instant::now();
        let a = analyze(&p, &acfg)?;
        times.push(t.elapsed());
        last = Some(a);
    }
    let a = last.expect("at least one repetition");
    let sound = a.family.is_sound_for(&a.loops)
        && a.elevated.iter().all(|(_, l, f)| f.is_sound_for(l));
    let verdict = check_families(&a.bodies, &a.families(), &a.variables, &cfg.oracle);
    Ok((
        p.nvars(),
        Outcome::Done {
            median: median(times),
            invariants: a.invariants.len(),
            evident: a.invariants.iter().filter(|i| i.evident).count(),
            sound,
            verdict,
        },
    ))
}

/// Runs every program of the corpus, each under its own timeout; a program
/// that runs out of time is recorded as such and the run continues.
pub fn bench(entries: &[CorpusEntry], cfg: &BenchConfig) -> BenchReport {
    let start = Instant::now();
    let rows = entries
        .iter()
        .map(|entry| {
            let (tx, rx) = mpsc::channel();
            let job = entry.clone();
            let jcfg = cfg.clone();
            thread::spawn(move || {
                let _ = tx.send(run_entry(&job, &jcfg));
            });
            let vars_guess = parse(&entry.source).map(|p| p.nvars()).unwrap_or(0);
            let (vars, outcome) = match rx.recv_timeout(cfg.timeout) {
                Ok(Ok(r)) => r,
                Ok(Err(e)) => (vars_guess, Outcome::Failed(e.to_string())),
                Err(_) => (vars_guess, Outcome::OutOfTime),
            };
            BenchRow {
                name: entry.name.clone(),
                vars,
                degree: entry.degree,
                outcome,
            }
        })
        .collect();
    BenchReport {
        rows,
        wall: start.elapsed(),
    }
}

pub fn bench_dir(dir: &Path, cfg: &BenchConfig) -> Result<BenchReport> {
    Ok(bench(&load_corpus(dir)?, cfg))
}
