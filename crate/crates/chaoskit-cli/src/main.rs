//! `chaoskit`: enumeration, sampling, operator application, norms,
//! verification suites, and the worked examples, as reproducible
//! commands over JSON artifacts.

mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::json;

use chaoskit::chaos::{duality_pairing, ChaosError, ChaosExpansion, TruncationBox, WeightSystem};
use chaoskit::examples::{one_d_example, white_noise_example};
use chaoskit::hermite;
use chaoskit::multiindex::enumerate_box;
use chaoskit::operators::{OperatorKind, OperatorRequest};
use chaoskit::verify::suites::{run_suite, SuiteName};
use chaoskit::verify::VerifyError;

use manifest::{write_artifact, RunManifest};

const EXIT_USAGE: u8 = 1;
const EXIT_SHAPE: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Parser)]
#[command(
    name = "chaoskit",
    version,
    about = "Sparse Wiener-chaos algebra: operators, weighted norms, and verifiers",
    after_help = "All randomness flows from --seed. Commands that write an artifact \
                  also write <artifact>.manifest.json with everything needed to \
                  reproduce the output byte for byte."
)]
struct Cli {
    /// Master seed for randomized commands (required by `verify`,
    /// `mc-sample`, and `eval`).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for parallel batches; results are identical for
    /// any thread count.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Write the primary JSON output to FILE; with no value, print JSON
    /// to stdout.
    #[arg(long, global = true, value_name = "FILE", num_args = 0..=1, default_missing_value = "-")]
    json: Option<PathBuf>,

    /// Suppress the human-readable summary.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List a truncation box in canonical order, one index per line as
    /// [[position, value], ...].
    Enumerate {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        n: u32,
    },

    /// Draw standard Gaussian samples as JSON lines, one array of
    /// `--dims` reals per line.
    McSample {
        #[arg(long)]
        dims: u32,
        #[arg(long)]
        n: u64,
        /// Substream index for parallel workers.
        #[arg(long, default_value_t = 0)]
        stream: u64,
        /// Output file (JSON lines); stdout when omitted.
        #[arg(long)]
        o: Option<PathBuf>,
    },

    /// Evaluate an expansion pathwise on seeded samples, one coefficient
    /// array per line.
    Eval {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        stream: u64,
        #[arg(long)]
        o: Option<PathBuf>,
    },

    /// Apply an operator: d (derivative, coefficients
    /// sum_b sqrt(C(a+b,b)) v_{a+b} (x) u_b), delta (divergence,
    /// sum_{b<=a} sqrt(C(a,b)) (f_b, u_{a-b})), ou (their composition),
    /// or wick (sum_{b<=a} sqrt(C(a,b)) f_{a-b} eta_b).
    Apply {
        /// d | delta | ou | wick
        #[arg(long)]
        op: String,
        /// Driver (integrator) expansion file.
        #[arg(long)]
        u: PathBuf,
        /// Operand expansion file.
        #[arg(long = "in")]
        input: PathBuf,
        /// Output truncation box as K,N; indices outside it are not
        /// computed.
        #[arg(long, value_name = "K,N")]
        out_box: String,
        /// Output expansion file.
        #[arg(long)]
        o: PathBuf,
    },

    /// Wick product f <> eta of an X-valued expansion with a real-valued
    /// one: coefficients sum_{b<=a} sqrt(C(a,b)) f_{a-b} eta_b.
    Wick {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        eta: PathBuf,
        #[arg(long, value_name = "K,N")]
        out_box: String,
        #[arg(long)]
        o: PathBuf,
    },

    /// Weighted norm sqrt(sum_a r_a^2 |v_a|^2) of an expansion.
    Norm {
        #[arg(long = "in")]
        input: PathBuf,
        /// unit | kondratiev:RHO,ELL | seq:P:Q1,Q2,...
        #[arg(long, default_value = "unit")]
        weight: String,
    },

    /// Duality pairing sum_a (u_a, v_a) of two equal-shape expansions.
    Pairing {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },

    /// Run a verification suite; exits 0 iff every check passes.
    Verify {
        /// series | md-sufficient | ps | ks | ps1 | ou | duality | mc | pk
        #[arg(long)]
        suite: String,
    },

    /// White-noise driver applied to itself: divergence coefficients,
    /// the fixed point of the number operator, and the divergence trace
    /// of the derivative's zero-index coefficient.
    ExampleWhiteNoise {
        #[arg(long)]
        k: u32,
    },

    /// One-dimensional operator calculus with scalar squared-weight
    /// parameters (p, q, r).
    Example1d {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        r: f64,
        #[arg(long, default_value_t = 40)]
        n_max: usize,
    },
}

struct Failure {
    code: u8,
    kind: &'static str,
    detail: String,
}

impl Failure {
    fn usage(detail: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            kind: "usage",
            detail: detail.into(),
        }
    }
}

impl From<ChaosError> for Failure {
    fn from(err: ChaosError) -> Self {
        let code = match &err {
            ChaosError::ShapeMismatch(_) => EXIT_SHAPE,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            kind: match &err {
                ChaosError::ShapeMismatch(_) => "shape-mismatch",
                _ => "invalid-input",
            },
            detail: err.to_string(),
        }
    }
}

impl From<VerifyError> for Failure {
    fn from(err: VerifyError) -> Self {
        match err {
            VerifyError::Chaos(inner) => inner.into(),
            VerifyError::RelationViolated(_) | VerifyError::WeightViolation(_) => Failure {
                code: EXIT_SHAPE,
                kind: "relation-violated",
                detail: err.to_string(),
            },
            VerifyError::InvalidP(_) => Failure {
                code: EXIT_SHAPE,
                kind: "relation-violated",
                detail: err.to_string(),
            },
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(err: std::io::Error) -> Self {
        Failure::usage(format!("io: {err}"))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version are successful exits.
            if err.use_stderr() {
                eprintln!("{err}");
                return ExitCode::from(EXIT_USAGE);
            }
            print!("{err}");
            return ExitCode::SUCCESS;
        }
    };
    if let Some(threads) = cli.threads {
        // Later commands fall back to the default pool if a global pool
        // already exists (e.g. under test harnesses).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!(
                "{}",
                json!({ "error": failure.kind, "detail": failure.detail })
            );
            ExitCode::from(failure.code)
        }
    }
}

fn read_expansion(path: &Path) -> Result<ChaosExpansion, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    Ok(ChaosExpansion::from_json(&text)?)
}

fn parse_box(text: &str) -> Result<TruncationBox, Failure> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(Failure::usage(format!(
            "--out-box expects K,N, got '{text}'"
        )));
    }
    let k = parts[0]
        .trim()
        .parse::<u32>()
        .map_err(|e| Failure::usage(format!("bad K in --out-box: {e}")))?;
    let n = parts[1]
        .trim()
        .parse::<u32>()
        .map_err(|e| Failure::usage(format!("bad N in --out-box: {e}")))?;
    Ok(TruncationBox::new(k, n))
}

/// unit | kondratiev:RHO,ELL | seq:P:Q1,Q2,...
fn parse_weight(text: &str) -> Result<WeightSystem, Failure> {
    if text == "unit" {
        return Ok(WeightSystem::unit());
    }
    if let Some(rest) = text.strip_prefix("kondratiev:") {
        let parts: Vec<&str> = rest.split(',').collect();
        if parts.len() != 2 {
            return Err(Failure::usage("kondratiev weight expects RHO,ELL".to_string()));
        }
        let rho = parts[0].trim().parse::<f64>().map_err(|e| Failure::usage(e.to_string()))?;
        let ell = parts[1].trim().parse::<f64>().map_err(|e| Failure::usage(e.to_string()))?;
        return Ok(WeightSystem::kondratiev(rho, ell)?);
    }
    if let Some(rest) = text.strip_prefix("seq:") {
        let Some((p_text, q_text)) = rest.split_once(':') else {
            return Err(Failure::usage("sequence weight expects seq:P:Q1,Q2,...".to_string()));
        };
        let p = p_text.trim().parse::<f64>().map_err(|e| Failure::usage(e.to_string()))?;
        let q = q_text
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| Failure::usage(e.to_string()))?;
        return Ok(WeightSystem::sequence_power(q, p)?);
    }
    Err(Failure::usage(format!(
        "unknown weight spec '{text}' (unit | kondratiev:RHO,ELL | seq:P:Q1,Q2,...)"
    )))
}

fn require_seed(cli: &Cli, command: &str) -> Result<u64, Failure> {
    cli.seed.ok_or_else(|| {
        Failure::usage(format!(
            "{command} requires an explicit --seed; randomized outputs must be reproducible"
        ))
    })
}

/// Routes the primary JSON output: to a file (with manifest) when the
/// global --json FILE is set, to stdout when --json has no value, and to
/// a quiet-aware summary otherwise.
fn emit_report(
    cli: &Cli,
    body: &serde_json::Value,
    summary: &str,
    config: serde_json::Value,
    started: Instant,
) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(body).expect("reports serialize");
    match &cli.json {
        Some(path) if path.as_os_str() != "-" => {
            let manifest = RunManifest::capture(config, cli.seed, started);
            write_artifact(path, &text, &manifest)?;
            if !cli.quiet {
                println!("{summary}");
                println!("wrote {}", path.display());
            }
        }
        Some(_) => println!("{text}"),
        None => {
            if cli.quiet {
                println!("{text}");
            } else {
                println!("{summary}");
                println!("{text}");
            }
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let started = Instant::now();
    match &cli.command {
        Command::Enumerate { k, n } => {
            for a in enumerate_box(*k, *n) {
                println!("{}", serde_json::to_string(&a).expect("index serializes"));
            }
            Ok(())
        }

        Command::McSample { dims, n, stream, o } => {
            let seed = require_seed(cli, "mc-sample")?;
            let mut lines = String::new();
            for s in hermite::sample_stream(*dims, *n, seed, *stream) {
                lines.push_str(&serde_json::to_string(&s.coords).expect("sample serializes"));
                lines.push('\n');
            }
            match o {
                Some(path) => {
                    let manifest = RunManifest::capture(
                        json!({ "dims": dims, "n": n, "stream": stream }),
                        Some(seed),
                        started,
                    );
                    write_artifact(path, &lines, &manifest)?;
                    if !cli.quiet {
                        println!("wrote {n} samples to {}", path.display());
                    }
                }
                None => print!("{lines}"),
            }
            Ok(())
        }

        Command::Eval { input, n, stream, o } => {
            let seed = require_seed(cli, "eval")?;
            let v = read_expansion(input)?;
            let dims = v.bounds().k;
            let du = v.shape().du();
            let mut lines = String::new();
            for s in hermite::sample_stream(dims, *n, seed, *stream) {
                let value = v.evaluate(&s)?;
                let line = match du {
                    None => serde_json::to_string(&value),
                    Some(width) => {
                        let rows: Vec<&[f64]> = value.chunks(width).collect();
                        serde_json::to_string(&rows)
                    }
                }
                .expect("evaluation serializes");
                lines.push_str(&line);
                lines.push('\n');
            }
            match o {
                Some(path) => {
                    let manifest = RunManifest::capture(
                        json!({ "in": input.display().to_string(), "n": n, "stream": stream }),
                        Some(seed),
                        started,
                    );
                    write_artifact(path, &lines, &manifest)?;
                    if !cli.quiet {
                        println!("wrote {n} evaluations to {}", path.display());
                    }
                }
                None => print!("{lines}"),
            }
            Ok(())
        }

        Command::Apply { op, u, input, out_box, o } => {
            let kind = match op.as_str() {
                "d" => OperatorKind::Derivative,
                "delta" => OperatorKind::Skorokhod,
                "ou" => OperatorKind::OrnsteinUhlenbeck,
                "wick" => OperatorKind::Wick,
                other => {
                    return Err(Failure::usage(format!(
                        "unknown --op '{other}' (d | delta | ou | wick)"
                    )))
                }
            };
            let request = OperatorRequest {
                kind,
                driver: read_expansion(u)?,
                operand: read_expansion(input)?,
                output_box: parse_box(out_box)?,
            };
            let result = request.apply()?;
            let manifest = RunManifest::capture(
                json!({
                    "op": op,
                    "u": u.display().to_string(),
                    "in": input.display().to_string(),
                    "out_box": out_box,
                }),
                cli.seed,
                started,
            );
            write_artifact(o, &result.to_json()?, &manifest)?;
            if !cli.quiet {
                println!(
                    "{} applied: {} output terms in box {}; wrote {}",
                    kind.name(),
                    result.num_terms(),
                    result.bounds(),
                    o.display()
                );
            }
            Ok(())
        }

        Command::Wick { f, eta, out_box, o } => {
            let request = OperatorRequest {
                kind: OperatorKind::Wick,
                driver: read_expansion(eta)?,
                operand: read_expansion(f)?,
                output_box: parse_box(out_box)?,
            };
            let result = request.apply()?;
            let manifest = RunManifest::capture(
                json!({
                    "f": f.display().to_string(),
                    "eta": eta.display().to_string(),
                    "out_box": out_box,
                }),
                cli.seed,
                started,
            );
            write_artifact(o, &result.to_json()?, &manifest)?;
            if !cli.quiet {
                println!(
                    "wick product: {} output terms in box {}; wrote {}",
                    result.num_terms(),
                    result.bounds(),
                    o.display()
                );
            }
            Ok(())
        }

        Command::Norm { input, weight } => {
            let v = read_expansion(input)?;
            let w = parse_weight(weight)?;
            let value = v.weighted_norm(&w)?;
            let body = json!({ "norm": value, "weight": weight, "terms": v.num_terms() });
            emit_report(
                cli,
                &body,
                &format!("norm = {value}"),
                json!({ "in": input.display().to_string(), "weight": weight }),
                started,
            )
        }

        Command::Pairing { a, b } => {
            let left = read_expansion(a)?;
            let right = read_expansion(b)?;
            let value = duality_pairing(&left, &right)?;
            let body = json!({ "pairing": value });
            emit_report(
                cli,
                &body,
                &format!("pairing = {value}"),
                json!({ "a": a.display().to_string(), "b": b.display().to_string() }),
                started,
            )
        }

        Command::Verify { suite } => {
            let seed = require_seed(cli, "verify")?;
            let name = SuiteName::from_str(suite).map_err(Failure::usage)?;
            let outcome = run_suite(name, seed)?;
            let body = serde_json::to_value(&outcome).expect("outcome serializes");
            let summary = format!(
                "suite {}: {}/{} checks passed (seed {seed})",
                outcome.suite,
                outcome.total - outcome.failed,
                outcome.total
            );
            emit_report(cli, &body, &summary, json!({ "suite": suite }), started)?;
            if outcome.pass {
                Ok(())
            } else {
                Err(Failure {
                    code: EXIT_VERIFY,
                    kind: "verification-failed",
                    detail: format!(
                        "{} of {} checks failed in suite {}",
                        outcome.failed, outcome.total, outcome.suite
                    ),
                })
            }
        }

        Command::ExampleWhiteNoise { k } => {
            if *k < 1 {
                return Err(Failure::usage("--k must be at least 1".to_string()));
            }
            let report = white_noise_example(*k)?;
            let body = serde_json::to_value(&report).expect("report serializes");
            let mut summary = String::new();
            summary.push_str(&format!(
                "divergence of the white-noise driver against itself (K = {k}):\n"
            ));
            for (a, value) in &report.delta_coefficients {
                summary.push_str(&format!("  coefficient at {a} = {value}\n"));
            }
            summary.push_str(&format!(
                "number operator fixes the driver: {} (max |error| = {})\n",
                report.ou_fixed_point, report.ou_max_abs_error
            ));
            summary.push_str("derivative zero-index trace by dimension:");
            for (dims, trace) in &report.derivative_zero_trace {
                summary.push_str(&format!(" {dims}->{trace}"));
            }
            summary.push_str(&format!(
                "\n{}",
                if report.divergent {
                    "trace grows without bound: divergent"
                } else {
                    "trace bounded"
                }
            ));
            emit_report(cli, &body, &summary, json!({ "k": k }), started)
        }

        Command::Example1d { p, q, r, n_max } => {
            let seed = cli.seed.unwrap_or(0);
            let report = one_d_example(*p, *q, *r, *n_max, seed)?;
            let body = serde_json::to_value(&report).expect("report serializes");
            let mut summary = format!(
                "one-dimensional weights (p, q, r) = ({p}, {q}, {r}): relation {}\n",
                report.relation
            );
            for demo in &report.demos {
                summary.push_str(&format!(
                    "  {}: weighted sum {} (rel gap {:.2e}) -> {}\n",
                    demo.operator,
                    demo.weighted_sum_full,
                    demo.rel_gap,
                    if demo.converged { "finite" } else { "not converged" }
                ));
            }
            summary.push_str(&format!(
                "closed forms with the bare coordinate driver: max |error| = {}",
                report.xi_driver_max_abs_error
            ));
            emit_report(
                cli,
                &body,
                &summary,
                json!({ "p": p, "q": q, "r": r, "n_max": n_max }),
                started,
            )
        }
    }
}
