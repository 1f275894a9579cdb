//! Command-line front end: argument parsing, dispatch, output rendering and
//! checkpoint files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use num_traits::Zero;
use serde_json::json;

use crate::cycles::catalog::{read_catalog, CatalogEntry, Checkpoint, KNOWN_CYCLES};
use crate::cycles::search::{SearchJob, SearchReport, DEFAULT_CHUNK_SIZE, DEFAULT_LAMBDA_MAX};
use crate::cycles::{
    coefficient_bounds, cycle_congruence_solve, divisor_condition, search_trivial_cycles,
    second_periodicity_check, verify_collatz,
};
use crate::error::Error;
use crate::maps::{conjugate, t_map, CqInt, Multiplier};
use crate::parity::{seed_from_parity, seed_parity_vector, ParityVector, DEFAULT_ENUMERATION_BUDGET};
use crate::stats::{chebyshev_divergence_bound, density_estimate, mu_distribution, Scope};
use crate::trajectory::{absorption_index, check_growth_bounds, iterate, DEFAULT_SIZE_CAP_BITS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PARTIAL: i32 = 3;

/// Size cap used by `cycles-search` unless overridden.
pub const SEARCH_SIZE_CAP_BITS: u64 = 1024;

#[derive(Debug, Parser)]
#[command(name = "qcollatz", version, about = "Explore the generalized Collatz qn+1 maps")]
pub struct Cli {
    /// Worker threads; defaults to the machine's parallelism.
    #[arg(long, global = true, env = "QCOLLATZ_THREADS", value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Plain)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Plain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Space {
    N,
    X,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Orbit,
    Parity,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print an orbit of T_q (n-space) or F_q (x-space).
    Orbit(OrbitArgs),
    /// Print the parity vector of a seed.
    Parity(ParityArgs),
    /// Find the seed n0 in [1, 2^k] with a given parity vector.
    SeedOf(SeedOfArgs),
    /// Search for cycles by orbit scanning or parity-vector enumeration.
    CyclesSearch(CyclesSearchArgs),
    /// Recompute and check every field of a cycle catalog.
    CyclesVerify(CyclesVerifyArgs),
    /// Solve the trivial-cycle equation for a fixed total parity.
    TrivialSearch(TrivialSearchArgs),
    /// Histogram of the total parity P_k over seeds.
    StatsHist(StatsHistArgs),
    /// Fraction of seeds whose parity coefficient exceeds ln 2 / ln q.
    StatsDensity(StatsDensityArgs),
    /// Check the exponential growth bounds along orbits.
    BoundsCheck(BoundsCheckArgs),
    /// Check that every n up to a bound reaches 1 under T_3.
    VerifyCollatz(VerifyCollatzArgs),
}

fn parse_q(s: &str) -> Result<Multiplier, String> {
    let v: u64 = s.trim().parse().map_err(|_| format!("q must be odd ≥ 3 (got {s:?})"))?;
    Multiplier::new(v).map_err(|e| e.to_string())
}

fn parse_positive(s: &str) -> Result<BigUint, String> {
    let n = BigUint::parse_bytes(s.trim().as_bytes(), 10).ok_or_else(|| format!("not a non-negative integer: {s:?}"))?;
    if n.is_zero() {
        return Err("must be ≥ 1".into());
    }
    Ok(n)
}

fn parse_parity(s: &str) -> Result<ParityVector, String> {
    s.parse::<ParityVector>().map_err(|e| e.to_string())
}

#[derive(Debug, Args)]
pub struct OrbitArgs {
    #[arg(long, value_parser = parse_q)]
    pub q: Multiplier,
    /// Seed in n-space.
    #[arg(long, value_parser = parse_positive, required_unless_present = "x", conflicts_with = "x")]
    pub n: Option<BigUint>,
    /// Seed in x-space (an element of Z_cq).
    #[arg(long, value_parser = parse_positive)]
    pub x: Option<BigUint>,
    /// Number of values to print.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub steps: u64,
    #[arg(long, value_enum, default_value_t = Space::N)]
    pub space: Space,
    #[arg(long, default_value_t = DEFAULT_SIZE_CAP_BITS, value_parser = clap::value_parser!(u64).range(2..))]
    pub size_cap_bits: u64,
}

#[derive(Debug, Args)]
pub struct ParityArgs {
    #[arg(long, value_parser = parse_q)]
    pub q: Multiplier,
    #[arg(long, value_parser = parse_positive, required_unless_present = "x", conflicts_with = "x")]
    pub n: Option<BigUint>,
    #[arg(long, value_parser = parse_positive)]
    pub x: Option<BigUint>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=1_000_000))]
    pub k: u64,
}

#[derive(Debug, Args)]
pub struct SeedOfArgs {
    #[arg(long, value_parser = parse_q)]
    pub q: Multiplier,
    /// Parity vector as a bit string, first step first.
    #[arg(long, value_parser = parse_parity)]
    pub parity: ParityVector,
}

#[derive(Debug, Args)]
pub struct CyclesSearchArgs {
    #[arg(long, value_parser = parse_q)]
    pub q: Multiplier,
    #[arg(long, value_enum, default_value_t = MethodArg::Orbit)]
    pub method: MethodArg,
    /// Orbit method: scan seeds 1..=n-max.
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub n_max: u64,
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub step_cap: u64,
    #[arg(long, default_value_t = SEARCH_SIZE_CAP_BITS, value_parser = clap::value_parser!(u64).range(2..))]
    pub size_cap_bits: u64,
    /// Orbit method: scan only the seeds h + λq, 0 ≤ λ ≤ lambda-max.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub class_h: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_LAMBDA_MAX)]
    pub lambda_max: u64,
    /// Parity method: longest period enumerated.
    #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u64).range(2..=126))]
    pub p_max: u64,
    /// Parity method: most vectors enumerated before stopping.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_BUDGET as u64)]
    pub budget: u64,
    #[arg(long, default_value_t = DEFAULT_CHUNK_SIZE, value_parser = clap::value_parser!(u64).range(1..))]
    pub chunk_size: u64,
    /// Write the search state to this file as chunks complete.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u64).range(1..))]
    pub checkpoint_every: u64,
    /// Continue from a checkpoint file written with the same parameters.
    #[arg(long)]
    pub resume: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CyclesVerifyArgs {
    /// Only entries with this q.
    #[arg(long, value_parser = parse_q)]
    pub q: Option<Multiplier>,
    /// Catalog file; the shipped catalog when omitted.
    #[arg(long)]
    pub catalog: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrivialSearchArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=126))]
    pub total_parity: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(3..))]
    pub q_max: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..=126))]
    pub p_max: u64,
}

#[derive(Debug, Args)]
pub struct StatsHistArgs {
    #[arg(long, value_parser = parse_q)]
    pub q: Multiplier,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=100_000))]
    pub k: u64,
    /// Draw this many random seeds instead of all 2^k.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: Option<u64>,
    /// Generator seed for sampling.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_BUDGET as u64)]
    pub budget: u64,
}

#[derive(Debug, Args)]
pub struct StatsDensityArgs {
    #[arg(long, value_parser = parse_q)]
    pub q: Multiplier,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=100_000))]
    pub k: u64,
    /// Scan seeds 1..=t.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub t: u64,
}

#[derive(Debug, Args)]
pub struct BoundsCheckArgs {
    #[arg(long, value_parser = parse_q)]
    pub q: Multiplier,
    /// Check seeds 1..=n-max.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n_max: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub steps: u64,
    #[arg(long, default_value_t = DEFAULT_SIZE_CAP_BITS, value_parser = clap::value_parser!(u64).range(2..))]
    pub size_cap_bits: u64,
}

#[derive(Debug, Args)]
pub struct VerifyCollatzArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub max: u64,
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub step_cap: u64,
}

/// Exit status and rendered output of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub status: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome {
            status: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }

    fn domain(e: impl std::fmt::Display) -> Self {
        Outcome {
            status: EXIT_DOMAIN,
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        }
    }
}

pub fn parse<I, T>(args: I) -> Result<Cli, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    Cli::try_parse_from(args)
}

/// Parses and executes; usage errors become exit status 2.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match parse(args) {
        Ok(cli) => execute(&cli),
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                Outcome {
                    status: EXIT_USAGE,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome::ok(text)
            }
        }
    }
}

pub fn execute(cli: &Cli) -> Outcome {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        builder = builder.num_threads(t as usize);
    }
    match builder.build() {
        Ok(pool) => pool.install(|| dispatch(cli)),
        Err(e) => Outcome::domain(format!("cannot start worker pool: {e}")),
    }
}

fn dispatch(cli: &Cli) -> Outcome {
    let f = cli.format;
    let result = match &cli.command {
        Command::Orbit(a) => orbit(a, f),
        Command::Parity(a) => parity(a, f),
        Command::SeedOf(a) => seed_of(a, f),
        Command::CyclesSearch(a) => cycles_search(a, f),
        Command::CyclesVerify(a) => cycles_verify(a, f),
        Command::TrivialSearch(a) => trivial_search(a, f),
        Command::StatsHist(a) => stats_hist(a, f),
        Command::StatsDensity(a) => stats_density(a, f),
        Command::BoundsCheck(a) => bounds_check(a, f),
        Command::VerifyCollatz(a) => collatz(a, f),
    };
    result.unwrap_or_else(Outcome::domain)
}

type CmdResult = Result<Outcome, Error>;

fn seed_x(q: Multiplier, n: &Option<BigUint>, x: &Option<BigUint>) -> Result<CqInt, Error> {
    match (n, x) {
        (Some(n), _) => conjugate(q, n),
        (None, Some(x)) => CqInt::new(q, x.clone()),
        (None, None) => Err(Error::ZeroSeed),
    }
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn orbit(a: &OrbitArgs, f: Format) -> CmdResult {
    let q = a.q;
    let x0 = seed_x(q, &a.n, &a.x)?;
    let traj = iterate(q, &x0, a.steps as usize, a.size_cap_bits)?;
    let values: Vec<BigUint> = match a.space {
        Space::X => traj.iterates().iter().map(|v| v.value().clone()).collect(),
        Space::N => {
            // T_q directly, so both spaces stay independently computed
            let mut n = crate::maps::unconjugate(q, &x0)?;
            let mut out = Vec::with_capacity(traj.len());
            for _ in 0..traj.len() {
                let next = t_map(q, &n);
                out.push(n);
                n = next;
            }
            out
        }
    };
    let bits: Vec<u8> = traj.parity().bits().map(|b| b.as_u8()).collect();
    let space = if a.space == Space::N { "n" } else { "x" };
    let stdout = match f {
        Format::Plain => join(&values) + "\n",
        Format::Csv => {
            let mut s = String::from("step,value,parity\n");
            for (i, (v, b)) in values.iter().zip(&bits).enumerate() {
                writeln!(s, "{i},{v},{b}").unwrap();
            }
            s
        }
        Format::Json => pretty(&json!({
            "q": q.get(),
            "space": space,
            "steps": a.steps,
            "values": values.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            "parity": traj.parity().to_string(),
            "capped": traj.capped(),
        })),
    };
    Ok(Outcome {
        status: if traj.capped() { EXIT_PARTIAL } else { EXIT_OK },
        stdout,
        stderr: if traj.capped() {
            format!("orbit stopped after {} values at the {}-bit size cap\n", traj.len(), a.size_cap_bits)
        } else {
            String::new()
        },
    })
}

fn join(values: &[BigUint]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

fn parity(a: &ParityArgs, f: Format) -> CmdResult {
    let q = a.q;
    let x0 = seed_x(q, &a.n, &a.x)?;
    let n0 = crate::maps::unconjugate(q, &x0)?;
    let v = seed_parity_vector(q, &n0, a.k as usize)?;
    let mu = v.parity_coefficient();
    let stdout = match f {
        Format::Plain => format!("{v} {} {}\n", v.total_parity(), mu),
        Format::Csv => format!("parity,total_parity,mu\n{v},{},{}\n", v.total_parity(), mu),
        Format::Json => pretty(&json!({
            "q": q.get(),
            "n0": n0.to_string(),
            "x0": x0.to_string(),
            "parity": v.to_string(),
            "total_parity": v.total_parity(),
            "mu": mu.to_string(),
        })),
    };
    Ok(Outcome::ok(stdout))
}

fn seed_of(a: &SeedOfArgs, f: Format) -> CmdResult {
    let q = a.q;
    let n0 = seed_from_parity(q, &a.parity);
    let x0 = conjugate(q, &n0)?;
    let stdout = match f {
        Format::Plain => format!("{n0} {x0}\n"),
        Format::Csv => format!("n0,x0\n{n0},{x0}\n"),
        Format::Json => pretty(&json!({
            "q": q.get(),
            "parity": a.parity.to_string(),
            "n0": n0.to_string(),
            "x0": x0.to_string(),
        })),
    };
    Ok(Outcome::ok(stdout))
}

fn write_atomic(path: &Path, text: &str) -> Result<(), Error> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, text)
        .and_then(|_| std::fs::rename(&tmp, path))
        .map_err(|e| Error::Catalog(format!("cannot write {}: {e}", path.display())))
}

fn read_file(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Catalog(format!("cannot read {}: {e}", path.display())))
}

fn cycles_search(a: &CyclesSearchArgs, f: Format) -> CmdResult {
    let q = a.q;
    let job = match (a.method, a.class_h) {
        (MethodArg::Orbit, None) => SearchJob::orbit(q, a.n_max, a.step_cap, a.size_cap_bits)?,
        (MethodArg::Orbit, Some(h)) => SearchJob::class_scan(q, h, a.lambda_max, a.step_cap, a.size_cap_bits)?,
        (MethodArg::Parity, _) => SearchJob::parity_enum(q, a.p_max as usize, a.budget)?,
    }
    .with_chunk_size(a.chunk_size);
    let resume = match &a.resume {
        Some(p) => Some(Checkpoint::from_json(&read_file(p)?)?),
        None => None,
    };
    let report = job.run(resume, a.checkpoint_every, |cp| match &a.checkpoint {
        Some(path) => write_atomic(path, &cp.to_json()),
        None => Ok(()),
    })?;
    let stdout = render_report(&report, f);
    let partial = report.partial;
    Ok(Outcome {
        status: if partial { EXIT_PARTIAL } else { EXIT_OK },
        stdout,
        stderr: if partial {
            format!(
                "enumeration budget reached after {} of {} periods\n",
                report.chunks_done, report.total_chunks
            )
        } else {
            String::new()
        },
    })
}

fn render_report(r: &SearchReport, f: Format) -> String {
    match f {
        Format::Json => pretty(&serde_json::to_value(r).expect("report serializes")),
        Format::Csv => {
            let mut s = String::from("q,n0,x0,p,P_p,s,h,lambda,parity\n");
            for c in &r.cycles {
                let e = CatalogEntry::from(c);
                writeln!(s, "{},{},{},{},{},{},{},{},{}", e.q, e.n0, e.x0, e.p, e.total_parity, e.s, e.h, e.lambda, e.parity).unwrap();
            }
            s
        }
        Format::Plain => {
            let mut s = String::from("n0 x0 p P_p s h lambda parity\n");
            for c in &r.cycles {
                let e = CatalogEntry::from(c);
                writeln!(s, "{} {} {} {} {} {} {} {}", e.n0, e.x0, e.p, e.total_parity, e.s, e.h, e.lambda, e.parity).unwrap();
            }
            let k = &r.counts;
            writeln!(s, "pi_count {}", r.pi_count).unwrap();
            match r.method {
                crate::cycles::Method::Orbit => writeln!(
                    s,
                    "seeds {} merged {} closed {} undetermined {} (step cap {}, size cap {})",
                    k.seeds,
                    k.merged,
                    k.closed,
                    k.undetermined(),
                    k.undetermined_steps,
                    k.undetermined_size
                )
                .unwrap(),
                crate::cycles::Method::ParityEnum => writeln!(
                    s,
                    "vectors {} solutions {} periods {}/{}",
                    k.vectors, k.solutions, r.chunks_done, r.total_chunks
                )
                .unwrap(),
            }
            s
        }
    }
}

fn cycles_verify(a: &CyclesVerifyArgs, f: Format) -> CmdResult {
    let text = match &a.catalog {
        Some(p) => read_file(p)?,
        None => KNOWN_CYCLES.to_string(),
    };
    let entries: Vec<CatalogEntry> = read_catalog(&text)?
        .into_iter()
        .filter(|e| a.q.is_none_or(|q| q.get() == e.q))
        .collect();
    let mut rows = Vec::new();
    let mut all_ok = true;
    for e in &entries {
        let problems: Vec<String> = match e.verify() {
            Err(err) => vec![err.to_string()],
            Ok(c) => {
                let mut p: Vec<String> = c.checks().failures().into_iter().map(String::from).collect();
                if !second_periodicity_check(c.q, &c.min_seed_n, &c.parity) {
                    p.push("second_periodicity".into());
                }
                if !divisor_condition(c.q, &c) {
                    p.push("divisor_condition".into());
                }
                if !coefficient_bounds(c.q, &c).all() {
                    p.push("coefficient_bounds".into());
                }
                match cycle_congruence_solve(c.q, c.period, c.s) {
                    Ok(sol) if sol.h == c.class_h => {}
                    _ => p.push("congruence_class".into()),
                }
                p
            }
        };
        all_ok &= problems.is_empty();
        rows.push((e, problems));
    }
    let stdout = match f {
        Format::Plain => {
            let mut s = String::new();
            for (e, p) in &rows {
                let verdict = if p.is_empty() { "confirmed".to_string() } else { format!("FAILED {}", p.join(",")) };
                writeln!(s, "q={} n0={} x0={} p={} P_p={} {verdict}", e.q, e.n0, e.x0, e.p, e.total_parity).unwrap();
            }
            writeln!(s, "{} of {} entries confirmed", rows.iter().filter(|r| r.1.is_empty()).count(), rows.len()).unwrap();
            s
        }
        Format::Csv => {
            let mut s = String::from("q,n0,x0,p,P_p,confirmed,problems\n");
            for (e, p) in &rows {
                writeln!(s, "{},{},{},{},{},{},{}", e.q, e.n0, e.x0, e.p, e.total_parity, p.is_empty(), p.join(";")).unwrap();
            }
            s
        }
        Format::Json => pretty(&json!(rows
            .iter()
            .map(|(e, p)| json!({"entry": e, "confirmed": p.is_empty(), "problems": p}))
            .collect::<Vec<_>>())),
    };
    Ok(Outcome {
        status: if all_ok { EXIT_OK } else { EXIT_DOMAIN },
        stdout,
        stderr: String::new(),
    })
}

fn trivial_search(a: &TrivialSearchArgs, f: Format) -> CmdResult {
    let sols = search_trivial_cycles(a.total_parity as usize, a.q_max, a.p_max as usize)?;
    let g_str = |g: &[usize]| g.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
    let stdout = match f {
        Format::Plain => {
            let mut s = String::from("q p g\n");
            for t in &sols {
                writeln!(s, "{} {} {}", t.q, t.p, g_str(&t.g)).unwrap();
            }
            s
        }
        Format::Csv => {
            let mut s = String::from("q,p,g\n");
            for t in &sols {
                writeln!(s, "{},{},{}", t.q, t.p, g_str(&t.g)).unwrap();
            }
            s
        }
        Format::Json => pretty(&serde_json::to_value(&sols).expect("serializes")),
    };
    Ok(Outcome::ok(stdout))
}

fn stats_hist(a: &StatsHistArgs, f: Format) -> CmdResult {
    let scope = match a.samples {
        Some(count) => Scope::Sampled { count, seed: a.seed },
        None => Scope::Exhaustive,
    };
    let h = mu_distribution(a.q, a.k as usize, scope, a.budget)?;
    let stdout = match f {
        Format::Csv => h.to_csv(),
        Format::Json => pretty(&serde_json::to_value(&h).expect("serializes")),
        Format::Plain => {
            let mut s = String::new();
            for (m, c) in h.counts.iter().enumerate() {
                writeln!(s, "{m} {c}").unwrap();
            }
            writeln!(s, "total {}", h.total).unwrap();
            if h.q.get() >= 5 {
                writeln!(s, "above_threshold {:.6}", h.fraction_above_divergence_threshold()).unwrap();
            }
            s
        }
    };
    Ok(Outcome::ok(stdout))
}

fn stats_density(a: &StatsDensityArgs, f: Format) -> CmdResult {
    let d = density_estimate(a.q, a.k as usize, a.t)?;
    let bound = chebyshev_divergence_bound(a.q, a.k as usize)?;
    let stdout = match f {
        Format::Plain => format!(
            "q {} k {} t {} above {} fraction {:.6} chebyshev_bound {:.6}\n",
            d.q.get(),
            d.k,
            d.t,
            d.above,
            d.fraction,
            bound
        ),
        Format::Csv => format!(
            "q,k,t,above,fraction,chebyshev_bound\n{},{},{},{},{},{}\n",
            d.q.get(),
            d.k,
            d.t,
            d.above,
            d.fraction,
            bound
        ),
        Format::Json => {
            let mut v = serde_json::to_value(&d).expect("serializes");
            v["chebyshev_bound"] = json!(bound);
            pretty(&v)
        }
    };
    Ok(Outcome::ok(stdout))
}

fn bounds_check(a: &BoundsCheckArgs, f: Format) -> CmdResult {
    use rayon::prelude::*;
    let q = a.q;
    let rows: Vec<(u64, usize, usize, usize, Option<usize>, bool)> = (1..=a.n_max)
        .into_par_iter()
        .map(|n| {
            let x0 = conjugate(q, &BigUint::from(n)).expect("positive");
            let t = iterate(q, &x0, a.steps as usize, a.size_cap_bits).expect("valid bounds");
            let r = check_growth_bounds(q, &t);
            let absorbed = absorption_index(q, &t);
            let late = match absorbed {
                Some(ab) => r.upper_violations.iter().filter(|&&j| j > ab).count(),
                None => 0,
            };
            (n, r.lower_violations.len(), r.upper_violations.len(), late, absorbed, r.upper_checked)
        })
        .collect();
    let lower: usize = rows.iter().map(|r| r.1).sum();
    let upper: usize = rows.iter().map(|r| r.2).sum();
    let late: usize = rows.iter().map(|r| r.3).sum();
    let checked = rows.iter().filter(|r| r.5).count();
    let stdout = match f {
        Format::Plain => format!(
            "seeds {} steps {} lower_violations {lower} upper_checked {checked} upper_violations {upper} upper_violations_after_absorption {late}\n",
            a.n_max, a.steps
        ),
        Format::Csv => {
            let mut s = String::from("n0,lower_violations,upper_violations,after_absorption,absorbed_at\n");
            for r in &rows {
                let ab = r.4.map(|v| v.to_string()).unwrap_or_default();
                writeln!(s, "{},{},{},{},{ab}", r.0, r.1, r.2, r.3).unwrap();
            }
            s
        }
        Format::Json => pretty(&json!({
            "q": q.get(),
            "seeds": a.n_max,
            "steps": a.steps,
            "lower_violations": lower,
            "upper_checked": checked,
            "upper_violations": upper,
            "upper_violations_after_absorption": late,
        })),
    };
    Ok(Outcome {
        status: if lower == 0 { EXIT_OK } else { EXIT_DOMAIN },
        stdout,
        stderr: String::new(),
    })
}

fn collatz(a: &VerifyCollatzArgs, f: Format) -> CmdResult {
    let s = verify_collatz(a.max, a.step_cap)?;
    let ok = s.all_reached_one();
    let stdout = match f {
        Format::Plain => {
            if ok {
                format!(
                    "all reached 1 (n ≤ {}; longest stopping time {} at n = {})\n",
                    s.max, s.longest_stopping_time, s.longest_stopping_seed
                )
            } else {
                format!("{} seeds undetermined within the step cap\n", s.undetermined.len())
            }
        }
        Format::Csv => format!(
            "max,all_reached_one,longest_stopping_time,longest_stopping_seed,undetermined\n{},{},{},{},{}\n",
            s.max,
            ok,
            s.longest_stopping_time,
            s.longest_stopping_seed,
            s.undetermined.len()
        ),
        Format::Json => {
            let mut v = serde_json::to_value(&s).expect("serializes");
            v["all_reached_one"] = json!(ok);
            pretty(&v)
        }
    };
    Ok(Outcome {
        status: if ok { EXIT_OK } else { EXIT_PARTIAL },
        stdout,
        stderr: String::new(),
    })
}
