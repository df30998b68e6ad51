//! cutnorm-lab: construct or load matrices and step graphons, compute cut,
//! (∞,1), and operator norms, and run the growth/verification experiments.
//!
//! Exit codes: 0 when everything passed, 1 when a check failed, 2 on usage
//! errors (bad flags, unreadable files, violated preconditions) with a
//! one-line diagnostic on stderr.

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use cutnorm_core::approx::{self, RelaxationConfig};
use cutnorm_core::exact::{self, SignWitness};
use cutnorm_core::experiments::{run_growth, run_verify, GrowthConfig, GrowthKind};
use cutnorm_core::graphon::{BandParams, StepGraphon};
use cutnorm_core::io;
use cutnorm_core::matrix::{kronecker, make_an, triangular_mask, Matrix};
use cutnorm_core::report::{Cell, ExperimentReport, ReportFormat, ReportMetadata};
use cutnorm_core::CutWitness;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

const THREADS_ENV: &str = "CUTNORM_LAB_THREADS";

#[derive(Parser)]
#[command(
    name = "cutnorm-lab",
    version,
    about = "Cut norms, Schur-multiplier cuts, and step graphons"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Enumeration cap: exact backends run while the nonzero-row count fits
    #[arg(long, global = true, default_value_t = exact::DEFAULT_ENUM_CAP)]
    cap: usize,
    /// Seed for every randomized heuristic and sampler
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Relaxation rank (default: ceil(sqrt(2n)))
    #[arg(long, global = true)]
    rank: Option<usize>,
    /// Relaxation ascent sweeps
    #[arg(long, global = true, default_value_t = 200)]
    sweeps: usize,
    /// Hyperplane rounding rounds
    #[arg(long, global = true, default_value_t = 1000)]
    rounds: usize,
    /// Band parameter as a fraction P/Q in (0,1)
    #[arg(long, global = true, default_value = "1/2")]
    lambda: String,
    /// Report format: json or csv
    #[arg(long, global = true, default_value = "json")]
    out: String,
    /// Write the report (for `graphon`: the graphon JSON) here instead of stdout
    #[arg(long, global = true)]
    dest: Option<PathBuf>,
    /// Worker threads (fallback: CUTNORM_LAB_THREADS, then machine parallelism)
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Cut, (∞,1), and operator norms of one matrix or step graphon
    Norms {
        /// Construction spec: an:N, an-tensor:N, jn:N, or mask:N
        #[arg(long)]
        construct: Option<String>,
        /// Matrix file (JSON {"n","rows"}, headerless CSV, or graphon JSON)
        #[arg(long = "in", value_name = "PATH")]
        input: Option<PathBuf>,
        /// Demand exact enumeration; infeasible sizes become a usage error
        #[arg(long)]
        exact: bool,
    },
    /// Growth tables over the reciprocal-difference family
    Growth {
        /// tri-cut-box, tri-sym-box, tri-sym-opr, or banded-box
        #[arg(long)]
        kind: String,
        /// Inclusive range A..B or a single value
        #[arg(long, value_name = "A..B")]
        n: String,
    },
    /// Norm-inequality and identity battery
    Verify,
    /// Banded-cut ratios at fixed lambda (same table as growth --kind banded-box)
    Banded {
        /// Inclusive range A..B or a single value
        #[arg(long, value_name = "A..B")]
        n: String,
    },
    /// Construct, transform, and normalize step graphons
    Graphon {
        /// Construction spec: an:N, an-tensor:N, jn:N, or mask:N
        #[arg(long)]
        construct: Option<String>,
        /// Graphon file (JSON {"m","values"} or an edge list)
        #[arg(long = "in", value_name = "PATH")]
        input: Option<PathBuf>,
        /// Double diagonal cells at construction
        #[arg(long)]
        double_diagonal: bool,
        /// Apply the triangular cut w·χ
        #[arg(long)]
        tri: bool,
        /// Apply the banded cut w·χ_λ
        #[arg(long)]
        band: bool,
        /// Embed into the top-right λ-corner
        #[arg(long)]
        embed: bool,
        /// Embedded corner copy plus its reflection
        #[arg(long)]
        embed_sum: bool,
        /// Subdivide each cell K×K
        #[arg(long, value_name = "K")]
        refine: Option<usize>,
        /// Scale to unit L¹ norm (applied after any transform)
        #[arg(long)]
        normalize: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let line = e.to_string();
            eprintln!("{}", line.lines().next().unwrap_or("usage error"));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    if cli.cap == 0 {
        return Err("--cap must be at least 1".into());
    }
    let threads = match cli.threads {
        Some(t) => Some(t),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(
                v.parse::<usize>()
                    .map_err(|_| format!("{THREADS_ENV}={v:?} is not a thread count"))?,
            ),
            Err(_) => None,
        },
    };
    if threads == Some(0) {
        return Err("--threads must be at least 1".into());
    }
    match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| e.to_string())?
            .install(|| dispatch(&cli)),
        None => dispatch(&cli),
    }
}

fn dispatch(cli: &Cli) -> Result<ExitCode, String> {
    let format: ReportFormat = cli.out.parse()?;
    let lambda: BandParams = cli.lambda.parse().map_err(|e: cutnorm_core::graphon::GraphonError| e.to_string())?;
    let relax = RelaxationConfig {
        rank: cli.rank,
        sweeps: cli.sweeps,
        rounding_rounds: cli.rounds,
        seed: cli.seed,
        ..RelaxationConfig::default()
    };
    let started = Instant::now();
    let mut report = match &cli.cmd {
        Cmd::Norms { construct, input, exact } => {
            let a = load_matrix(construct.as_deref(), input.as_deref())?;
            norms_report(&a, cli.cap, &relax, *exact)?
        }
        Cmd::Growth { kind, n } => {
            let kind: GrowthKind = kind.parse()?;
            let ns = parse_ns(n)?;
            let cfg = GrowthConfig { cap: cli.cap, relax: relax.clone(), lambda };
            run_growth(kind, &ns, &cfg).map_err(|e| e.to_string())?
        }
        Cmd::Verify => run_verify(cli.seed).map_err(|e| e.to_string())?,
        Cmd::Banded { n } => {
            let ns = parse_ns(n)?;
            let cfg = GrowthConfig { cap: cli.cap, relax: relax.clone(), lambda };
            run_growth(GrowthKind::BandedBox, &ns, &cfg).map_err(|e| e.to_string())?
        }
        Cmd::Graphon {
            construct,
            input,
            double_diagonal,
            tri,
            band,
            embed,
            embed_sum,
            refine,
            normalize,
        } => {
            let w = load_graphon(construct.as_deref(), input.as_deref(), *double_diagonal)?;
            let w = transform_graphon(
                w, *tri, *band, *embed, *embed_sum, *refine, *normalize, lambda,
            )?;
            if let Some(dest) = &cli.dest {
                io::write_graphon(dest, &w).map_err(|e| e.to_string())?;
            }
            let report = graphon_report(&w, cli.cap, &relax, cli.seed)?;
            print_report(&report, format)?;
            return Ok(ExitCode::SUCCESS);
        }
    };
    report.metadata.wall_clock_ms = Some(started.elapsed().as_millis());
    let all_pass = report.all_pass();
    match &cli.dest {
        Some(dest) => {
            std::fs::write(dest, report.render(format))
                .map_err(|e| format!("{}: {e}", dest.display()))?;
        }
        None => print_report(&report, format)?,
    }
    Ok(if all_pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn print_report(report: &ExperimentReport, format: ReportFormat) -> Result<(), String> {
    print!("{}", report.render(format));
    Ok(())
}

fn construct_matrix(spec: &str) -> Result<Matrix, String> {
    let (kind, size) = spec
        .split_once(':')
        .ok_or_else(|| format!("bad construction {spec:?}: expected kind:N with kind one of an, an-tensor, jn, mask"))?;
    let n: usize = size
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| format!("bad construction size {size:?} in {spec:?}"))?;
    match kind {
        "an" => Ok(make_an(n)),
        "an-tensor" => {
            let a = make_an(n);
            Ok(kronecker(&a, &a))
        }
        "jn" => Ok(Matrix::from_fn(n, |_, _| 1.0)),
        "mask" => Ok(triangular_mask(n)),
        other => Err(format!("unknown construction {other:?}; expected an, an-tensor, jn, or mask")),
    }
}

fn load_matrix(construct: Option<&str>, input: Option<&std::path::Path>) -> Result<Matrix, String> {
    match (construct, input) {
        (Some(spec), None) => construct_matrix(spec),
        // A graphon file is accepted too; its norms are those of the value matrix.
        (None, Some(path)) => match io::read_matrix(path) {
            Ok(a) => Ok(a),
            Err(primary) => match io::read_graphon(path) {
                Ok(w) => Ok(w.values().clone()),
                Err(_) => Err(primary.to_string()),
            },
        },
        (Some(_), Some(_)) => Err("give either --construct or --in, not both".into()),
        (None, None) => Err("an input is required: --construct SPEC or --in PATH".into()),
    }
}

fn load_graphon(
    construct: Option<&str>,
    input: Option<&std::path::Path>,
    double_diagonal: bool,
) -> Result<StepGraphon, String> {
    match (construct, input) {
        (Some(spec), None) => Ok(StepGraphon::from_matrix(&construct_matrix(spec)?, double_diagonal)),
        (None, Some(path)) => {
            let w = io::read_graphon(path).map_err(|e| e.to_string())?;
            Ok(StepGraphon::from_matrix(w.values(), double_diagonal))
        }
        (Some(_), Some(_)) => Err("give either --construct or --in, not both".into()),
        (None, None) => Err("an input is required: --construct SPEC or --in PATH".into()),
    }
}

#[allow(clippy::too_many_arguments)]
fn transform_graphon(
    w: StepGraphon,
    tri: bool,
    band: bool,
    embed: bool,
    embed_sum: bool,
    refine: Option<usize>,
    normalize: bool,
    lambda: BandParams,
) -> Result<StepGraphon, String> {
    let picked = [tri, band, embed, embed_sum, refine.is_some()].iter().filter(|&&b| b).count();
    if picked > 1 {
        return Err("pick at most one transform: --tri, --band, --embed, --embed-sum, or --refine".into());
    }
    let w = if tri {
        w.triangular_cut().map_err(|e| e.to_string())?
    } else if band {
        w.banded_cut(lambda).map_err(|e| e.to_string())?
    } else if embed {
        w.corner_embed(lambda).map_err(|e| e.to_string())?
    } else if embed_sum {
        w.corner_embed_sum(lambda).map_err(|e| e.to_string())?
    } else if let Some(k) = refine {
        if k == 0 {
            return Err("--refine needs K >= 1".into());
        }
        w.refine(k)
    } else {
        w
    };
    if normalize {
        w.l1_normalize().map_err(|e| e.to_string())
    } else {
        Ok(w)
    }
}

fn parse_ns(s: &str) -> Result<Vec<usize>, String> {
    let bad = || format!("bad range {s:?}: expected A..B (inclusive) or a single value");
    if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        Ok((a..=b).collect())
    } else {
        Ok(vec![s.trim().parse().map_err(|_| bad())?])
    }
}

fn base_metadata(cap: usize, seed: u64) -> ReportMetadata {
    ReportMetadata {
        seed: Some(seed),
        enum_cap: cap,
        generator: approx::GENERATOR_TAG.to_string(),
        tolerances: Default::default(),
        wall_clock_ms: None,
    }
}

fn cut_witness_text(w: Option<&CutWitness>) -> String {
    match w {
        None => String::new(),
        Some(w) => {
            let fmt = |v: &[usize]| {
                v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ")
            };
            format!("S={{{}}} T={{{}}}", fmt(&w.s), fmt(&w.t))
        }
    }
}

fn sign_witness_text(w: &SignWitness) -> String {
    let fmt = |v: &[i8]| v.iter().map(|&s| if s < 0 { '-' } else { '+' }).collect::<String>();
    format!("x={} y={}", fmt(&w.x), fmt(&w.y))
}

fn norms_report(
    a: &Matrix,
    cap: usize,
    relax: &RelaxationConfig,
    force_exact: bool,
) -> Result<ExperimentReport, String> {
    let n = a.n();
    let nn = (n * n) as f64;
    let meta = base_metadata(cap, relax.seed);
    let mut report =
        ExperimentReport::new("norms", &["quantity", "lower", "upper", "method", "witness"], meta);
    let push = |report: &mut ExperimentReport,
                name: &str,
                lo: f64,
                hi: f64,
                method: &str,
                witness: String| {
        report.push_row(vec![
            Cell::text(name),
            Cell::Float(lo),
            Cell::Float(hi),
            Cell::text(method),
            Cell::Text(witness),
        ]);
    };

    if force_exact {
        let (cut, cw) = exact::cut_norm_exact_capped(a, cap).map_err(|e| e.to_string())?;
        let (inf, sw) = exact::inf_one_norm_exact_capped(a, cap).map_err(|e| e.to_string())?;
        push(&mut report, "cut-norm", cut, cut, "enumeration-exact", cut_witness_text(Some(&cw)));
        push(&mut report, "inf-one-norm", inf, inf, "enumeration-exact", sign_witness_text(&sw));
    } else {
        let bracket = exact::cut_norm_bracket(a, cap, relax);
        push(
            &mut report,
            "cut-norm",
            bracket.lower,
            bracket.upper,
            bracket.method.as_str(),
            cut_witness_text(bracket.lower_witness.as_ref()),
        );
        match exact::inf_one_norm_exact_capped(a, cap) {
            Ok((inf, sw)) => {
                push(&mut report, "inf-one-norm", inf, inf, "enumeration-exact", sign_witness_text(&sw));
            }
            Err(exact::ExactError::CapExceeded { .. }) | Err(exact::ExactError::SideTooLarge { .. }) => {
                let state = approx::relax_inf_one(a, relax);
                let (lo, sw) = approx::round_to_signs(a, &state, relax);
                let hi = (4.0 * nn * bracket.upper).min(a.abs_sum());
                push(&mut report, "inf-one-norm", lo, hi, "relaxation-bracket", sign_witness_text(&sw));
            }
        }
    }
    match exact::operator_norm(a) {
        Ok(v) => push(&mut report, "operator-norm", v, v, "power-iteration", String::new()),
        Err(e) => push(
            &mut report,
            "operator-norm",
            e.lower,
            e.upper,
            "power-iteration-nonconverged",
            String::new(),
        ),
    }
    Ok(report)
}

fn graphon_report(
    w: &StepGraphon,
    cap: usize,
    relax: &RelaxationConfig,
    seed: u64,
) -> Result<ExperimentReport, String> {
    let meta = base_metadata(cap, seed);
    let mut report = ExperimentReport::new("graphon", &["property", "value"], meta);
    report.push_row(vec![Cell::text("resolution"), Cell::Int(w.m() as i64)]);
    report.push_row(vec![Cell::text("symmetric"), Cell::Bool(w.is_symmetric())]);
    report.push_row(vec![Cell::text("l1_norm"), Cell::Float(w.l1_norm())]);
    let bracket = exact::cut_norm_bracket(w.values(), cap, relax);
    report.push_row(vec![Cell::text("cut_norm_lo"), Cell::Float(bracket.lower)]);
    report.push_row(vec![Cell::text("cut_norm_hi"), Cell::Float(bracket.upper)]);
    report.push_row(vec![Cell::text("cut_norm_method"), Cell::text(bracket.method.as_str())]);
    Ok(report)
}
