mod config;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use config::{RunConfig, Settings};
use flagcert::certify::{
    certify_solution, l_column_check, round_solution, verify_certificate, Certificate,
    CertifyOutcome, RoundingOptions, SlackReport,
};
use flagcert::densities::{DensityCache, TableTarget};
use flagcert::flags::{aut_group, complement_type, enumerate_types, format_type, parse_type};
use flagcert::graphs::{enumerate_graphs, format_graph_line, published_graphs};
use flagcert::rational::{format_rational, to_f64};
use flagcert::sdp::sdpa::{
    export_sdpa, export_sdpa_file, import_solution, write_solution, write_solution_file,
};
use flagcert::sdp::{build_problem, solve, SdpError, SdpProblem, Solution};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

const EXIT_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "flagcert",
    version,
    about = "Flag-algebra bounds on monochromatic clique densities"
)]
struct Cli {
    #[command(flatten)]
    run: RunArgs,
    #[command(subcommand)]
    command: Command,
}

/// Pipeline settings; each can also come from `--config`.
#[derive(Args, Debug, Default)]
struct RunArgs {
    /// `key = value` file read before these flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base problem: `m4` or `goodman`.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Clique order.
    #[arg(short = 't', long = "clique", global = true)]
    t: Option<usize>,
    /// Host graph order.
    #[arg(long, global = true)]
    ell: Option<usize>,
    /// `all:<k>` or `;`-separated type descriptors such as `4: {1, 2}`.
    #[arg(long, global = true)]
    types: Option<String>,
    /// `+`, `-` or `+-`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    parity: Option<String>,
    #[arg(long, global = true)]
    complement_sharing: Option<bool>,
    /// Solver tolerance on gap and infeasibilities.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Comma-separated rounding denominators, tried in order (`10^8` allowed).
    #[arg(long, global = true)]
    denominators: Option<String>,
    /// Target bound, e.g. `1/35` or `1/34.7858`.
    #[arg(long, global = true)]
    bound: Option<String>,
    /// How far the numerical optimum may fall short of the target.
    #[arg(long, global = true)]
    snap: Option<String>,
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Recompute every density table.
    #[arg(long, global = true)]
    no_cache: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Print the unlabelled graphs of one order, one per line.
    Enumerate {
        #[arg(short = 'n')]
        n: usize,
        /// Use the published row order (six vertices only).
        #[arg(long)]
        published: bool,
    },
    /// Print the types of one order with automorphism counts and complements.
    Types {
        #[arg(short = 'k')]
        k: usize,
    },
    /// Print a pair-density table.
    Densities {
        /// Type descriptor, e.g. `1:` or `4: {1, 2}`.
        #[arg(long = "type")]
        sigma: String,
        #[arg(long)]
        l1: usize,
        #[arg(long)]
        l2: usize,
        /// Order of the target flags or graphs.
        #[arg(long)]
        order: usize,
        /// Target unlabelled graphs instead of flags.
        #[arg(long)]
        graphs: bool,
    },
    /// Assemble the SDP and print its shape.
    Build {
        /// Also write the problem in SDPA sparse format.
        #[arg(long)]
        sdpa: Option<PathBuf>,
    },
    /// Solve the SDP numerically.
    Solve {
        /// Write the SDPA file instead of solving.
        #[arg(long)]
        sdpa: Option<PathBuf>,
        /// Solution file (stdout when omitted).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Round a solution to a rational certificate at the first denominator.
    Round {
        /// Solution to round (native or CSDP format); solves when omitted.
        #[arg(long)]
        solution: Option<PathBuf>,
        /// Certificate JSON (stdout when omitted).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Verify a certificate exactly.
    Verify {
        certificate: PathBuf,
        /// Write the per-graph slack table here.
        #[arg(long)]
        tsv: Option<PathBuf>,
    },
    /// Per-graph slack table followed by the published L-column comparison.
    Report {
        #[arg(long)]
        certificate: Option<PathBuf>,
        #[arg(long)]
        solution: Option<PathBuf>,
    },
    /// Triangle pipeline on three vertices.
    Goodman(PipelineArgs),
    /// K4 pipeline on six vertices.
    M4(PipelineArgs),
}

#[derive(Args)]
struct PipelineArgs {
    /// Use this solution instead of solving.
    #[arg(long)]
    solution: Option<PathBuf>,
    #[arg(long)]
    certificate_out: Option<PathBuf>,
    #[arg(long)]
    report_out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let preset = match &cli.command {
        Command::Goodman(_) => Some("goodman"),
        Command::M4(_) => Some("m4"),
        _ => None,
    };
    let cfg = match load_config(&cli.run, preset) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    if let Some(n) = cfg.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("warning: thread pool: {e}");
        }
    }
    match run(cli.command, &cfg) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let not_converged = e.chain().any(|c| {
                matches!(
                    c.downcast_ref::<SdpError>(),
                    Some(SdpError::NotConverged { .. } | SdpError::Numerical(_))
                )
            });
            ExitCode::from(if not_converged {
                EXIT_NOT_CONVERGED
            } else {
                EXIT_FAILED
            })
        }
    }
}

fn load_config(a: &RunArgs, preset: Option<&str>) -> Result<RunConfig> {
    let file = match &a.config {
        Some(p) => Settings::load(p)?,
        None => Settings::default(),
    };
    let mut flags = Settings::default();
    flags.set("preset", preset.or(a.preset.as_deref()));
    flags.set("t", a.t);
    flags.set("ell", a.ell);
    flags.set("types", a.types.as_deref());
    flags.set("parity", a.parity.as_deref());
    flags.set("complement_sharing", a.complement_sharing);
    flags.set("tol", a.tol);
    flags.set("denominators", a.denominators.as_deref());
    flags.set("bound", a.bound.as_deref());
    flags.set("snap", a.snap.as_deref());
    flags.set("cache_dir", a.cache_dir.as_ref().map(|p| p.display()));
    if a.no_cache {
        flags.set("no_cache", Some(true));
    }
    RunConfig::resolve(&flags.over(&file))
}

fn cache(cfg: &RunConfig) -> DensityCache {
    match &cfg.cache_dir {
        Some(d) => DensityCache::new(d),
        None => DensityCache::disabled(),
    }
}

fn run(command: Command, cfg: &RunConfig) -> Result<ExitCode> {
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let code = match command {
        Command::Enumerate { n, published } => {
            let graphs = if published {
                if n != 6 {
                    bail!("the published order exists only for six vertices");
                }
                published_graphs()
            } else {
                enumerate_graphs(n)?.to_vec()
            };
            for g in &graphs {
                writeln!(out, "{}", format_graph_line(g))?;
            }
            ExitCode::SUCCESS
        }
        Command::Types { k } => {
            let types = enumerate_types(k)?;
            writeln!(out, "i\ttype\tautomorphisms\tcomplement")?;
            for (i, s) in types.iter().enumerate() {
                let comp = complement_type(s);
                let j = types
                    .iter()
                    .position(|t| t.is_isomorphic(&comp))
                    .unwrap_or(i);
                writeln!(out, "{i}\t{}\t{}\t{j}", format_type(s), aut_group(s).len())?;
            }
            ExitCode::SUCCESS
        }
        Command::Densities {
            sigma,
            l1,
            l2,
            order,
            graphs,
        } => {
            let sigma = parse_type(&sigma)?;
            let target = if graphs {
                TableTarget::Graphs
            } else {
                TableTarget::Flags
            };
            let table = cache(cfg).load_or_compute(&sigma, l1, l2, order, target)?;
            out.write_all(table.to_text().as_bytes())?;
            ExitCode::SUCCESS
        }
        Command::Build { sdpa } => {
            let p = build(cfg)?;
            writeln!(out, "constraints\t{}", p.constraint_count())?;
            writeln!(out, "blocks\t{}", p.blocks.len())?;
            for b in &p.blocks {
                writeln!(out, "{}\t{}", b.label(), b.dim())?;
            }
            if let Some(path) = sdpa {
                export_sdpa_file(&p, &path)?;
            }
            ExitCode::SUCCESS
        }
        Command::Solve { sdpa, output } => {
            let p = build(cfg)?;
            if let Some(path) = sdpa {
                if path.as_os_str() == "-" {
                    export_sdpa(&p, &mut out)?;
                } else {
                    export_sdpa_file(&p, &path)?;
                    eprintln!("wrote {}", path.display());
                }
                return Ok(ExitCode::SUCCESS);
            }
            let s = solve_logged(&p, cfg)?;
            match output {
                Some(path) => write_solution_file(&s, &path)?,
                None => write_solution(&s, &mut out)?,
            }
            ExitCode::SUCCESS
        }
        Command::Round { solution, output } => {
            let p = build(cfg)?;
            let s = obtain_solution(&p, cfg, solution.as_deref())?;
            let opts = RoundingOptions {
                denominator: cfg.denominators[0].clone(),
                shrink: -cfg.snap.clone(),
                candidates: vec![cfg.bound.clone()],
            };
            let (c, report) = round_solution(&p, &s, &opts)?;
            eprintln!(
                "bound {}; numerical slack {:.3e}; perturbation ≤ {:.3e}; repaired blocks {:?}",
                format_rational(&c.bound),
                report.numerical_slack,
                report.perturbation,
                report.repaired_blocks
            );
            write_text(output.as_deref(), &c.to_json(), &mut out)?;
            ExitCode::SUCCESS
        }
        Command::Verify { certificate, tsv } => {
            let c = read_certificate(&certificate)?;
            let report = verify_certificate(&c)?;
            summarize(&report, &mut out)?;
            if let Some(path) = tsv {
                write_text(Some(&path), &report.to_tsv(), &mut out)?;
            }
            verdict(&report, &mut out)?
        }
        Command::Report {
            certificate,
            solution,
        } => {
            let report = match certificate {
                Some(path) => verify_certificate(&read_certificate(&path)?)?,
                None => {
                    let p = build(cfg)?;
                    let s = obtain_solution(&p, cfg, solution.as_deref())?;
                    certify(&p, &s, cfg)?.report
                }
            };
            report.write_tsv(&mut out)?;
            let mut ok = report.passes();
            if report.ell == 6 {
                let check = l_column_check()?;
                writeln!(out)?;
                check.write_tsv(&mut out)?;
                writeln!(
                    out,
                    "# L column: max deviation {:.3e} over {} rows, {}",
                    check.max_deviation,
                    check.rows.len(),
                    if check.passes() {
                        "agrees"
                    } else {
                        "DISAGREES"
                    }
                )?;
                ok &= check.passes();
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FAILED)
            }
        }
        Command::Goodman(args) | Command::M4(args) => {
            let p = build(cfg)?;
            let s = obtain_solution(&p, cfg, args.solution.as_deref())?;
            writeln!(out, "numerical lambda: {:.10}", s.lambda)?;
            let outcome = certify(&p, &s, cfg)?;
            if let Some(path) = &args.certificate_out {
                std::fs::write(path, outcome.certificate.to_json())
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            if let Some(path) = &args.report_out {
                std::fs::write(path, outcome.report.to_tsv())
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            writeln!(out, "denominator: {}", outcome.denominator)?;
            summarize(&outcome.report, &mut out)?;
            if outcome.verified() && outcome.certificate.bound >= cfg.bound {
                writeln!(
                    out,
                    "certified bound: {}",
                    format_rational(&outcome.certificate.bound)
                )?;
                ExitCode::SUCCESS
            } else {
                writeln!(
                    out,
                    "verification failed: target {}, best attempt at bound {}",
                    format_rational(&cfg.bound),
                    format_rational(&outcome.certificate.bound)
                )?;
                ExitCode::from(EXIT_FAILED)
            }
        }
    };
    out.flush()?;
    Ok(code)
}

fn build(cfg: &RunConfig) -> Result<SdpProblem> {
    let start = Instant::now();
    let p = build_problem(&cfg.spec, &cache(cfg)).context("building the SDP")?;
    eprintln!(
        "built {} constraints, block sizes {:?} in {:.2?}",
        p.constraint_count(),
        p.block_dims(),
        start.elapsed()
    );
    Ok(p)
}

fn solve_logged(p: &SdpProblem, cfg: &RunConfig) -> Result<Solution> {
    let start = Instant::now();
    let s = solve(p, cfg.tol).context("solving the SDP")?;
    eprintln!(
        "solved: lambda {:.10} after {} iterations (gap {:.1e}) in {:.2?}",
        s.lambda,
        s.iterations,
        s.gap,
        start.elapsed()
    );
    Ok(s)
}

fn obtain_solution(p: &SdpProblem, cfg: &RunConfig, path: Option<&Path>) -> Result<Solution> {
    match path {
        Some(path) => {
            import_solution(p, path).with_context(|| format!("importing {}", path.display()))
        }
        None => solve_logged(p, cfg),
    }
}

fn certify(p: &SdpProblem, s: &Solution, cfg: &RunConfig) -> Result<CertifyOutcome> {
    let start = Instant::now();
    let outcome = certify_solution(p, s, &cfg.bound, &cfg.snap, &cfg.denominators)?;
    eprintln!(
        "rounded at 1/{} (numerical slack {:.3e}, perturbation ≤ {:.3e}) and verified in {:.2?}",
        outcome.denominator,
        outcome.rounding.numerical_slack,
        outcome.rounding.perturbation,
        start.elapsed()
    );
    Ok(outcome)
}

fn read_certificate(path: &Path) -> Result<Certificate> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Certificate::from_json(&text)?)
}

fn write_text(path: Option<&Path>, text: &str, out: &mut impl Write) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn summarize(report: &SlackReport, out: &mut impl Write) -> Result<()> {
    for b in &report.blocks {
        writeln!(
            out,
            "block {}: {}",
            b.label,
            if b.verdict.is_psd { "PSD" } else { "NOT PSD" }
        )?;
    }
    let failing = report.failing_rows();
    writeln!(
        out,
        "graphs: {} checked, {} with negative slack",
        report.rows.len(),
        failing.len()
    )?;
    if let Some(row) = report.min_slack() {
        writeln!(
            out,
            "min slack: {:.6e} (row {})",
            to_f64(&row.diff()),
            row.index
        )?;
    }
    Ok(())
}

fn verdict(report: &SlackReport, out: &mut impl Write) -> Result<ExitCode> {
    if report.passes() {
        writeln!(out, "verified bound: {}", format_rational(&report.bound))?;
        Ok(ExitCode::SUCCESS)
    } else {
        writeln!(
            out,
            "verification failed at bound {}",
            format_rational(&report.bound)
        )?;
        Ok(ExitCode::from(EXIT_FAILED))
    }
}
