use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, ValueEnum};

use loopinv::bench::{bench_dir, declared_degree, BenchConfig};
use loopinv::frontend::{parse_with_info, State};
use loopinv::oracle::{check_families, check_run, OracleConfig};
use loopinv::report::{analyze, render_annotated, render_text, to_json, Config, Elevation, Extras};
use loopinv::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Annotated,
}

/// Polynomial invariants of `while (*)` loops with solvable polynomial
/// bodies.
#[derive(Parser, Debug)]
#[command(name = "loopinv", version)]
struct Cli {
    /// Program file (`-` for standard input).
    #[arg(required_unless_present = "bench")]
    input: Option<PathBuf>,

    /// Maximal degree of the invariants (defaults to the `# degree:` header,
    /// then 2).
    #[arg(long, short)]
    degree: Option<u32>,

    #[arg(long, short, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Initial state, e.g. "x=0,y=1/2"; every variable must be bound.
    #[arg(long)]
    init: Option<String>,

    /// Check the invariants on random runs of this many iterations.
    #[arg(long, default_value_t = 0)]
    oracle_iters: usize,

    /// Seed for the oracle's random states and body choices.
    #[arg(long, default_value_t = 0x5eed)]
    seed: u64,

    /// Elevate the linearized loop when irrational eigenvalues show up,
    /// optionally bounding the elevation degree.
    #[arg(long, value_name = "E", num_args = 0..=1, default_missing_value = "0")]
    elevate_on_irrational: Option<u32>,

    /// Largest elevated basis to attempt.
    #[arg(long, default_value_t = loopinv::algext::DEFAULT_SIZE_CAP)]
    size_cap: usize,

    /// Cap on eigenvalue combinations when intersecting several bodies.
    #[arg(long, default_value_t = loopinv::invgen::DEFAULT_MAX_COMBOS)]
    max_combos: usize,

    /// Per-program timeout in seconds for --bench.
    #[arg(long, default_value_t = 600)]
    timeout: u64,

    /// Benchmark every `.loop` file of a directory.
    #[arg(long, value_name = "DIR")]
    bench: Option<PathBuf>,

    /// Repetitions per program for --bench (median reported).
    #[arg(long, default_value_t = 5)]
    repetitions: usize,

    /// Print the solvable block partition of each body.
    #[arg(long)]
    explain_solvability: bool,

    /// Print the linearized transition of each body.
    #[arg(long)]
    dump_linearized: bool,

    /// Report wall-clock timings (output is no longer deterministic).
    #[arg(long)]
    timing: bool,
}

fn read_source(path: &Path) -> Result<String, Error> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }
}

fn config(cli: &Cli, degree: u32) -> Result<Config, Error> {
    Ok(Config {
        degree,
        init: cli.init.as_deref().map(State::parse).transpose()?,
        elevation: match cli.elevate_on_irrational {
            None => Elevation::Off,
            Some(0) => Elevation::Auto,
            Some(e) => Elevation::UpTo(e),
        },
        max_combos: cli.max_combos,
        size_cap: cli.size_cap,
        timing: cli.timing,
    })
}

fn run_bench(cli: &Cli, dir: &Path) -> Result<bool, Error> {
    let cfg = BenchConfig {
        repetitions: cli.repetitions,
        timeout: Duration::from_secs(cli.timeout),
        oracle: OracleConfig {
            iterations: if cli.oracle_iters == 0 { 100 } else { cli.oracle_iters },
            seed: cli.seed,
            ..OracleConfig::default()
        },
        analysis: config(cli, 2)?,
    };
    let report = bench_dir(dir, &cfg)?;
    match cli.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&report.to_json()).unwrap()),
        _ => {
            print!("{}", report.render_table());
            println!("total: {:.1} ms", report.wall.as_secs_f64() * 1000.0);
        }
    }
    Ok(report.all_passed())
}

fn run_single(cli: &Cli, path: &Path) -> Result<bool, Error> {
    let source = read_source(path)?;
    let (program, info) = parse_with_info(&source)?;
    let degree = cli.degree.or_else(|| declared_degree(&source)).unwrap_or(2);
    let cfg = config(cli, degree)?;
    let analysis = analyze(&program, &cfg)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "-".into());
    let extras = Extras {
        solvability: cli.explain_solvability,
        linearized: cli.dump_linearized,
    };
    match cli.format {
        Format::Text => print!("{}", render_text(&analysis, &name, extras)),
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&to_json(&analysis, &name, extras)).unwrap()
        ),
        Format::Annotated => print!("{}", render_annotated(&analysis, &source, info.loop_line)),
    }
    if cli.oracle_iters == 0 {
        return Ok(true);
    }
    let ocfg = OracleConfig {
        iterations: cli.oracle_iters,
        seed: cli.seed,
        ..OracleConfig::default()
    };
    let mut verdict = check_families(
        &analysis.bodies,
        &analysis.families(),
        &analysis.variables,
        &ocfg,
    );
    if verdict.passed {
        if let Some(init) = &cfg.init {
            let init = init.to_vector(&analysis.variables)?;
            let invs: Vec<_> = analysis
                .families()
                .into_iter()
                .flat_map(|f| loopinv::invgen::instantiate(f, &init))
                .collect();
            let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(cli.seed);
            verdict = check_run(
                &analysis.bodies,
                &invs,
                &init,
                cli.oracle_iters,
                &mut rng,
                &analysis.variables,
            );
        }
    }
    match &verdict.failure {
        None => eprintln!("oracle: pass ({} checks)", verdict.checks),
        Some(f) => eprintln!("oracle: FAIL: {f}"),
    }
    Ok(verdict.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match (&cli.bench, &cli.input) {
        (Some(dir), _) => run_bench(&cli, dir),
        (None, Some(path)) => run_single(&cli, path),
        (None, None) => unreachable!("clap requires an input without --bench"),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
