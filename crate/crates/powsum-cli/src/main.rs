//! Command-line front end: evaluate the separable expansions against the
//! direct oracle, emit convergence tables, tabulate the radial basis, and
//! run the verification suite.
//!
//! With the default single worker thread, every emitted artifact is
//! byte-identical across runs at the same seed (convergence tables excepted:
//! their wall-clock column varies by nature).

use std::fs;
use std::io::Read;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use powsum::error::Error;
use powsum::expand::{
    direct_eval, ortho_series, rational_series, ExpansionParams, MVector, SeriesEval, Truncation,
};
use powsum::numerics::{McSpec, QuadSpec};
use powsum::radial::{eta, xi, RadialIndex};
use powsum::verify::{render_reports, run_suite, SuiteConfig};

#[derive(Parser)]
#[command(
    name = "powsum",
    version,
    about = "Separable series for inverse-power norms of vector sums"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for library internals; 1 keeps artifacts byte-stable
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Write the artifact here instead of stdout
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the rational separable series and compare with the oracle
    ExpandDirect(ExpandArgs),
    /// Evaluate the orthogonal-basis series and compare with the oracle
    ExpandOrtho(ExpandArgs),
    /// Print the direct oracle evaluation only
    Oracle(InputArgs),
    /// Emit a truncation-sweep table in comma-separated form
    Converge(ConvergeArgs),
    /// Tabulate the radial basis functions on a grid
    Bases(BasesArgs),
    /// Run the verification suite and print one report line per check
    Verify(VerifyArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Input document: a path, '-' for stdin, or inline JSON starting with '{'
    #[arg(long)]
    input: String,
}

#[derive(Args)]
struct TruncArgs {
    #[arg(long, default_value_t = 12)]
    l_max: usize,
    #[arg(long, default_value_t = 12)]
    mu_max: usize,
    #[arg(long, default_value_t = 20)]
    n_max: usize,
}

#[derive(Args)]
struct McArgs {
    /// Monte-Carlo samples per angular coupling
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct ExpandArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    trunc: TruncArgs,
    #[command(flatten)]
    mc: McArgs,
}

#[derive(Args)]
struct ConvergeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    trunc: TruncArgs,
    #[command(flatten)]
    mc: McArgs,
    /// Which series the sweep exercises
    #[arg(long, value_parser = ["direct", "ortho"], default_value = "direct")]
    series: String,
    /// Truncation increment between rows
    #[arg(long, default_value_t = 2)]
    step: usize,
}

#[derive(Args)]
struct BasesArgs {
    #[arg(long, default_value_t = 3)]
    m: usize,
    #[arg(long, default_value_t = 1.0)]
    nu: f64,
    #[arg(long, default_value_t = 0)]
    l: usize,
    #[arg(long, default_value_t = 4)]
    n_max: usize,
    /// Comma-separated grid points (radii for the direct-space basis,
    /// transform arguments for its conjugate)
    #[arg(long, default_value = "0.25,0.5,1,2,4")]
    points: String,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    mc: McArgs,
    /// Term budget for the Legendre-ratio pair series check
    #[arg(long, default_value_t = 20_000)]
    qcc_terms: usize,
}

/// One parsed invocation: the subcommand with its arguments plus the
/// globals that apply to every command.
struct JobConfig {
    command: Command,
    threads: usize,
    output: Option<PathBuf>,
}

#[derive(Deserialize)]
struct InputDocument {
    #[serde(rename = "M")]
    m: usize,
    nu: f64,
    vectors: Vec<Vec<f64>>,
}

fn read_input(arg: &str) -> anyhow::Result<String> {
    if arg == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .context("reading input document from stdin")?;
        Ok(buf)
    } else if arg.trim_start().starts_with('{') {
        Ok(arg.to_string())
    } else {
        fs::read_to_string(arg).with_context(|| format!("reading input document {arg}"))
    }
}

fn parse_input(raw: &str) -> Result<(ExpansionParams, Vec<MVector>), Error> {
    let doc: InputDocument =
        serde_json::from_str(raw).map_err(|e| Error::ParseError(format!("input document: {e}")))?;
    let params = ExpansionParams::new(doc.m, doc.vectors.len(), doc.nu)?;
    let mut vectors = Vec::with_capacity(doc.vectors.len());
    for (i, comps) in doc.vectors.into_iter().enumerate() {
        if comps.len() != params.m {
            return Err(Error::ValidationError(format!(
                "vector {i} has {} components, expected M = {}",
                comps.len(),
                params.m
            )));
        }
        vectors.push(MVector::new(comps)?);
    }
    Ok((params, vectors))
}

fn check_ortho_domain(params: &ExpansionParams) -> Result<(), Error> {
    if !(params.nu > 0.0 && params.nu < params.m as f64) {
        return Err(Error::ValidationError(format!(
            "the orthogonal-basis series needs 0 < nu < M, got nu = {}, M = {}",
            params.nu, params.m
        )));
    }
    Ok(())
}

fn format_eval(eval: &SeriesEval, oracle: f64) -> String {
    let stderr = match eval.mc_stderr {
        Some(s) => format!("{s:.12e}"),
        None => "none".to_string(),
    };
    format!(
        "value={:.12e} terms_used={} tail_estimate={:.12e} mc_stderr={} oracle={:.12e} abs_err={:.12e}\n",
        eval.value,
        eval.terms_used,
        eval.tail_estimate,
        stderr,
        oracle,
        (eval.value - oracle).abs()
    )
}

fn emit(output: &Option<PathBuf>, content: &str) -> anyhow::Result<()> {
    match output {
        Some(path) => fs::write(path, content)
            .with_context(|| format!("writing artifact to {}", path.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn run(job: JobConfig) -> anyhow::Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(job.threads)
        .build_global()
        .context("initializing the worker pool")?;
    let quad = QuadSpec::default();
    match &job.command {
        Command::ExpandDirect(args) => {
            let (params, vectors) = parse_input(&read_input(&args.input.input)?)?;
            let trunc = Truncation {
                l_max: args.trunc.l_max,
                mu_max: args.trunc.mu_max,
                n_max: args.trunc.n_max,
            };
            let mc = McSpec {
                samples: args.mc.samples,
                seed: args.mc.seed,
                batches: 64,
            };
            let eval = rational_series(&vectors, &params, &trunc, &mc)?;
            let oracle = direct_eval(&vectors, params.nu)?;
            emit(&job.output, &format_eval(&eval, oracle))
        }
        Command::ExpandOrtho(args) => {
            let (params, vectors) = parse_input(&read_input(&args.input.input)?)?;
            check_ortho_domain(&params)?;
            let trunc = Truncation {
                l_max: args.trunc.l_max,
                mu_max: args.trunc.mu_max,
                n_max: args.trunc.n_max,
            };
            let mc = McSpec {
                samples: args.mc.samples,
                seed: args.mc.seed,
                batches: 64,
            };
            let eval = ortho_series(&vectors, &params, &trunc, &quad, &mc)?;
            let oracle = direct_eval(&vectors, params.nu)?;
            emit(&job.output, &format_eval(&eval, oracle))
        }
        Command::Oracle(args) => {
            let (params, vectors) = parse_input(&read_input(&args.input)?)?;
            let value = direct_eval(&vectors, params.nu)?;
            emit(&job.output, &format!("value={value:.12e}\n"))
        }
        Command::Converge(args) => {
            let (params, vectors) = parse_input(&read_input(&args.input.input)?)?;
            let ortho = args.series == "ortho";
            if ortho {
                check_ortho_domain(&params)?;
            }
            let mc = McSpec {
                samples: args.mc.samples,
                seed: args.mc.seed,
                batches: 64,
            };
            let oracle = direct_eval(&vectors, params.nu)?;
            let step = args.step.max(1);
            let mut table =
                String::from("l_max,n_or_mu_max,value,abs_err_vs_oracle,tail_estimate,mc_stderr,elapsed_seconds\n");
            let mut k = step;
            while k <= args.trunc.l_max {
                let trunc = Truncation {
                    l_max: k,
                    mu_max: k,
                    n_max: k,
                };
                let started = Instant::now();
                let eval = if ortho {
                    ortho_series(&vectors, &params, &trunc, &quad, &mc)?
                } else {
                    rational_series(&vectors, &params, &trunc, &mc)?
                };
                let elapsed = started.elapsed().as_secs_f64();
                let stderr = eval
                    .mc_stderr
                    .map(|s| format!("{s:.6e}"))
                    .unwrap_or_default();
                table.push_str(&format!(
                    "{k},{k},{:.12e},{:.6e},{:.6e},{stderr},{elapsed:.3}\n",
                    eval.value,
                    (eval.value - oracle).abs(),
                    eval.tail_estimate,
                ));
                k += step;
            }
            emit(&job.output, &table)
        }
        Command::Bases(args) => {
            let points: Vec<f64> = args
                .points
                .split(',')
                .map(|p| {
                    p.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::ParseError(format!("grid point {p:?}: {e}")))
                })
                .collect::<Result<_, _>>()?;
            let mut table = String::from("kind,n,l,point,value\n");
            for n in 0..=args.n_max {
                let idx = RadialIndex::new(n, args.l, args.m, args.nu)?;
                for &p in &points {
                    let v = eta(&idx, p)?;
                    table.push_str(&format!("eta,{n},{},{p},{v:.12e}\n", args.l));
                }
                for &p in &points {
                    let v = xi(&idx, p, &quad)?;
                    table.push_str(&format!("xi,{n},{},{p},{v:.12e}\n", args.l));
                }
            }
            emit(&job.output, &table)
        }
        Command::Verify(args) => {
            let config = SuiteConfig {
                samples: args.mc.samples,
                seed: args.mc.seed,
                qcc_terms: args.qcc_terms,
                ..Default::default()
            };
            let reports = run_suite(&config)?;
            emit(&job.output, &render_reports(&reports))?;
            let failed = reports.iter().filter(|r| !r.passed).count();
            if failed > 0 {
                bail!("{failed} of {} checks failed", reports.len());
            }
            Ok(())
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let job = JobConfig {
        command: cli.command,
        threads: cli.threads,
        output: cli.output,
    };
    if let Err(e) = run(job) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
