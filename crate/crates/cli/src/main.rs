//! `clashfree` command-line front end. Orchestration and I/O only; every
//! answer comes from the `clashfree` library.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use clashfree::construct::construct_thm31;
use clashfree::jumper::{
    canonical_jumper, enumerate_jumpers, jumper_to_perm, perm_to_jumper, validate, JumperRecord,
    Verdict,
};
use clashfree::render::{render_ascii, render_svg, SvgOptions};
use clashfree::search::{
    brute_force_exists, count_clockwise_fixed0, count_fixed0, Existence, SearchConfig, MASK_LIMIT,
};
use clashfree::sigma::{sigma_case, table, table_tsv, SigmaCase};
use clashfree::threads::{build_threads, divisibility_certificate, orientation, Orientation};
use clashfree::verify::{build_packing, find_clashes, MAX_GRID_SIDE};
use clashfree::{Error, Params, Permutation};
use serde_json::json;

const BUDGET_ENV: &str = "CLASHFREE_BUDGET_SECS";

#[derive(Parser)]
#[command(
    name = "clashfree",
    version,
    about = "Clash-free permutations of Z_n and torus rectangle packings"
)]
struct Cli {
    /// Machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct Dims {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    k: u64,
}

#[derive(Subcommand)]
enum Command {
    /// σ(n,k), the largest s admitting an (s,k)-clash-free permutation.
    Sigma {
        #[command(flatten)]
        dims: Dims,
    },
    /// σ(n,k) for every 1 ≤ k < n ≤ max-n, as TSV.
    Table {
        #[arg(long)]
        max_n: u64,
    },
    /// Build an (s,k)-clash-free permutation with s = ⌊(n−1)/k⌋.
    Construct {
        #[command(flatten)]
        dims: Dims,
        #[arg(long, value_enum, default_value_t = Method::Lattice)]
        method: Method,
        /// Factor r_a of r/(d_s·d_k) for the jumper method.
        #[arg(long, default_value_t = 1)]
        ra: u64,
    },
    /// Check a permutation for clashes (exit 1 when any are found).
    Verify {
        /// Permutation file; stdin when omitted or `-`.
        file: Option<PathBuf>,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        s: Option<u64>,
    },
    /// Thread structure, gaps and divisibility certificate of an extremal
    /// clash-free permutation.
    Analyze {
        file: Option<PathBuf>,
        #[command(flatten)]
        dims: Dims,
    },
    /// Enumerate, validate or convert jumpers.
    Jumpers {
        #[command(flatten)]
        dims: Dims,
        #[command(flatten)]
        action: JumperAction,
    },
    /// Exhaustive search with π(0) = 0 (n ≤ 64).
    Search {
        #[command(flatten)]
        dims: Dims,
        #[arg(long)]
        s: Option<u64>,
        /// Count all solutions instead of finding one.
        #[arg(long, conflicts_with = "count_clockwise")]
        count: bool,
        /// Count clockwise solutions (extremal s only).
        #[arg(long)]
        count_clockwise: bool,
        /// Time limit in seconds; overrides CLASHFREE_BUDGET_SECS.
        #[arg(long)]
        budget: Option<f64>,
    },
    /// Draw the rectangle packing.
    Render {
        file: PathBuf,
        #[command(flatten)]
        dims: Dims,
        #[arg(long)]
        s: Option<u64>,
        #[arg(long, value_enum, default_value_t = Format::Ascii)]
        format: Format,
        /// Colour rectangles by thread and draw the gaps (SVG only).
        #[arg(long)]
        highlight_blocks: bool,
        #[arg(long, default_value_t = 10)]
        cell: u32,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// A uniformly random permutation of Z_n, for oracle cross-checks.
    Random {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        seed: u64,
    },
}

#[derive(Args)]
#[group(multiple = false)]
struct JumperAction {
    /// List every jumper (the default).
    #[arg(long)]
    enumerate: bool,
    /// Check a jumper record against the five conditions.
    #[arg(long, value_name = "FILE")]
    validate: Option<PathBuf>,
    /// Turn a jumper record into its permutation.
    #[arg(long, value_name = "FILE")]
    to_perm: Option<PathBuf>,
    /// Read the jumper off a clockwise permutation with π(0) = 0.
    #[arg(long, value_name = "FILE")]
    from_perm: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy)]
enum Method {
    /// Closed-form lattice construction.
    Lattice,
    /// Canonical jumper, then the jumper bijection.
    Jumper,
    /// Lexicographically first witness of exhaustive search.
    Search,
}

#[derive(ValueEnum, Clone, Copy)]
enum Format {
    Ascii,
    Svg,
}

/// A failed command: input/usage problems exit 2, negative answers exit 1.
enum Failure {
    Input(String),
    Negative,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = std::result::Result<(), Failure>;

/// Writes to stdout; a closed pipe (`… | head`) is not an error.
fn emit(args: std::fmt::Arguments) -> Outcome {
    let mut out = io::stdout().lock();
    match out.write_fmt(args).and_then(|()| out.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

macro_rules! out {
    ($($arg:tt)*) => { emit(format_args!($($arg)*))? };
}

macro_rules! outln {
    ($($arg:tt)*) => { emit(format_args!("{}\n", format_args!($($arg)*)))? };
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Negative) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    let json = cli.json;
    match cli.command {
        Command::Sigma { dims } => sigma_cmd(dims, json),
        Command::Table { max_n } => table_cmd(max_n, json),
        Command::Construct { dims, method, ra } => construct_cmd(dims, method, ra, json),
        Command::Verify { file, n, k, s } => verify_cmd(file.as_deref(), n, k, s, json),
        Command::Analyze { file, dims } => analyze_cmd(file.as_deref(), dims, json),
        Command::Jumpers { dims, action } => jumpers_cmd(dims, action, json),
        Command::Search {
            dims,
            s,
            count,
            count_clockwise,
            budget,
        } => search_cmd(dims, s, count, count_clockwise, budget, json),
        Command::Render {
            file,
            dims,
            s,
            format,
            highlight_blocks,
            cell,
            output,
        } => render_cmd(
            &file,
            dims,
            s,
            format,
            highlight_blocks,
            cell,
            output.as_deref(),
        ),
        Command::Random { n, seed } => random_cmd(n, seed, json),
    }
}

fn params(dims: Dims) -> Result<Params, Failure> {
    Ok(Params::derive(dims.n, dims.k)?)
}

fn read_input(file: Option<&Path>) -> Result<String, Failure> {
    match file {
        Some(path) if path != Path::new("-") => {
            fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
        }
        _ => {
            let mut text = String::new();
            io::stdin().read_to_string(&mut text)?;
            Ok(text)
        }
    }
}

fn read_perm(file: Option<&Path>, n: Option<u64>) -> Result<Permutation, Failure> {
    let p = Permutation::parse(&read_input(file)?)?;
    match n {
        Some(n) if n != p.n() => Err(Failure::Input(format!(
            "--n {n} does not match the permutation length {}",
            p.n()
        ))),
        _ => Ok(p),
    }
}

fn print_perm(p: &Permutation, json: bool) -> Outcome {
    if json {
        outln!("{}", p.to_json());
    } else {
        outln!("{p}");
    }
    Ok(())
}

fn case_detail(case: &SigmaCase) -> String {
    match case {
        SigmaCase::Divisible { d_s, d_k, residue }
        | SigmaCase::NotDivisible { d_s, d_k, residue } => {
            format!(" (d_s={d_s}, d_k={d_k}, n mod d_s*d_k = {residue})")
        }
        _ => String::new(),
    }
}

fn sigma_cmd(dims: Dims, json: bool) -> Outcome {
    let p = params(dims)?;
    let case = sigma_case(dims.n, dims.k)?;
    let value = if case.attains_bound() { p.s } else { p.s - 1 };
    if json {
        outln!(
            "{}",
            json!({ "n": p.n, "k": p.k, "floor": p.s, "sigma": value, "case": case })
        );
    } else {
        outln!("{value}");
        outln!("case: {}{}", case.name(), case_detail(&case));
    }
    Ok(())
}

fn table_cmd(max_n: u64, json: bool) -> Outcome {
    if json {
        outln!(
            "{}",
            serde_json::to_string(&table(max_n)).expect("plain data")
        );
    } else {
        out!("{}", table_tsv(max_n));
    }
    Ok(())
}

fn search_config(budget: Option<f64>) -> Result<SearchConfig, Failure> {
    let secs = match budget {
        Some(b) => Some(b),
        None => match std::env::var(BUDGET_ENV) {
            Ok(v) => Some(
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Failure::Input(format!("{BUDGET_ENV}={v:?} is not a number")))?,
            ),
            Err(_) => None,
        },
    };
    let time_limit = match secs {
        Some(t) if !(t.is_finite() && t > 0.0) => {
            return Err(Failure::Input(format!("budget must be positive, got {t}")))
        }
        Some(t) => Some(Duration::from_secs_f64(t)),
        None => None,
    };
    Ok(SearchConfig {
        max_n: MASK_LIMIT,
        time_limit,
    })
}

fn construct_cmd(dims: Dims, method: Method, ra: u64, json: bool) -> Outcome {
    let p = params(dims)?;
    let perm = match method {
        Method::Lattice => construct_thm31(&p)?,
        Method::Jumper => {
            let blocks = p.r / p.block_size().max(1);
            if ra == 0 || blocks % ra != 0 {
                return Err(Failure::Input(format!(
                    "--ra {ra} must divide r/(d_s*d_k) = {blocks}"
                )));
            }
            jumper_to_perm(&canonical_jumper(&p, ra, blocks / ra)?, &p)?
        }
        Method::Search => match brute_force_exists(p.n, p.k, p.s, &search_config(None)?)? {
            Existence::Witness { permutation } => permutation,
            Existence::Exhausted { nodes } => {
                eprintln!(
                    "no ({},{})-clash-free permutation of Z_{} ({nodes} nodes)",
                    p.s, p.k, p.n
                );
                return Err(Failure::Negative);
            }
        },
    };
    print_perm(&perm, json)
}

fn verify_cmd(file: Option<&Path>, n: Option<u64>, k: u64, s: Option<u64>, json: bool) -> Outcome {
    let p = read_perm(file, n)?;
    let s = match s {
        Some(s) => s,
        None => Params::derive(p.n(), k)?.s,
    };
    let clashes = find_clashes(&p, s, k)?;
    // the grid is an independent second opinion where it fits in memory
    if p.n() <= MAX_GRID_SIDE && build_packing(&p, s, k).is_ok() != clashes.is_empty() {
        return Err(Failure::Input("pair scan and packing grid disagree".into()));
    }
    if json {
        outln!(
            "{}",
            json!({ "n": p.n(), "s": s, "k": k, "clash_free": clashes.is_empty(), "clashes": clashes })
        );
    } else if clashes.is_empty() {
        outln!("clash-free");
    } else {
        outln!("{} clashes", clashes.len());
        for c in &clashes {
            outln!("{} {}", c.i, c.j);
        }
    }
    if clashes.is_empty() {
        Ok(())
    } else {
        Err(Failure::Negative)
    }
}

fn analyze_cmd(file: Option<&Path>, dims: Dims, json: bool) -> Outcome {
    let p = read_perm(file, Some(dims.n))?;
    let params = params(dims)?;
    let td = match build_threads(&p, &params) {
        Ok(td) => td,
        Err(e @ (Error::Structure { .. } | Error::Orientation)) => {
            eprintln!("{e}");
            return Err(Failure::Negative);
        }
        Err(e) => return Err(e.into()),
    };
    let cert = divisibility_certificate(&p, &params)?;
    // the jumper is defined for the clockwise translate with π(0) = 0
    let mut normal = p.shift_images(params.n - p.image(0));
    if orientation(&normal, &params)? == Orientation::Anticlockwise {
        normal = normal.negate();
    }
    let jumper = match params.require_lattice_regime() {
        Ok(()) => Some(perm_to_jumper(&normal, &params)?),
        Err(_) => None,
    };
    if json {
        outln!(
            "{}",
            json!({
                "params": params,
                "orientation": td.orientation,
                "warp_count": td.warps.len(),
                "warp_size": td.warps[0].len(),
                "weft_count": td.wefts.len(),
                "weft_size": td.wefts[0].len(),
                "warp_gap_width": td.warp_gap_width,
                "weft_gap_height": td.weft_gap_height,
                "tau": td.tau,
                "rho": td.rho,
                "divisibility": cert,
                "jumper": jumper.as_ref().map(|j| JumperRecord::new(&params, j)),
            })
        );
        return Ok(());
    }
    let mut out = String::new();
    let Params {
        n,
        k,
        s,
        r,
        d_s,
        d_k,
    } = params;
    writeln!(out, "n={n} k={k} s={s} r={r} d_s={d_s} d_k={d_k}").unwrap();
    writeln!(out, "orientation: {}", td.orientation).unwrap();
    writeln!(
        out,
        "warp threads: {} of size {}",
        td.warps.len(),
        td.warps[0].len()
    )
    .unwrap();
    writeln!(
        out,
        "weft threads: {} of size {}",
        td.wefts.len(),
        td.wefts[0].len()
    )
    .unwrap();
    writeln!(out, "tau: {:?}", td.tau).unwrap();
    writeln!(out, "rho: {:?}", td.rho).unwrap();
    writeln!(out, "warp\tgap width").unwrap();
    for (i, w) in td.warp_gap_width.iter().enumerate() {
        writeln!(out, "{i}\t{w}").unwrap();
    }
    writeln!(out, "weft\tgap height").unwrap();
    for (i, h) in td.weft_gap_height.iter().enumerate() {
        writeln!(out, "{i}\t{h}").unwrap();
    }
    writeln!(
        out,
        "divisibility: d_s*d_k = {} {} n = {n} (weft climb of length {} has warp period {})",
        d_s * d_k,
        if cert.holds {
            "divides"
        } else {
            "does not divide"
        },
        cert.weft_length,
        cert.period
    )
    .unwrap();
    if let Some(j) = jumper {
        writeln!(out, "jumper: {j}").unwrap();
    }
    out!("{out}");
    Ok(())
}

fn read_record(path: &Path, params: &Params) -> Result<JumperRecord, Failure> {
    let record = JumperRecord::parse(&read_input(Some(path))?)?;
    if (record.n, record.k) != (params.n, params.k) {
        return Err(Failure::Input(format!(
            "record is for n={} k={}, flags say n={} k={}",
            record.n, record.k, params.n, params.k
        )));
    }
    Ok(record)
}

fn jumpers_cmd(dims: Dims, action: JumperAction, json: bool) -> Outcome {
    let params = params(dims)?;
    if let Some(path) = &action.validate {
        let record = read_record(path, &params)?;
        let verdict = validate(&record.a, &record.b, &params)?;
        if json {
            outln!("{}", serde_json::to_string(&verdict).expect("plain data"));
        } else {
            match &verdict {
                Verdict::Valid => outln!("valid"),
                Verdict::Invalid { condition, detail } => {
                    outln!("invalid: condition {condition}: {detail}")
                }
            }
        }
        return if verdict.is_valid() {
            Ok(())
        } else {
            Err(Failure::Negative)
        };
    }
    if let Some(path) = &action.to_perm {
        let record = read_record(path, &params)?;
        return print_perm(&jumper_to_perm(&record.jumper(), &params)?, json);
    }
    if let Some(path) = &action.from_perm {
        let p = read_perm(Some(path), Some(params.n))?;
        let record = JumperRecord::new(&params, &perm_to_jumper(&p, &params)?);
        if json {
            outln!("{}", record.to_json());
        } else {
            outln!("{}", record.jumper());
        }
        return Ok(());
    }
    let all = enumerate_jumpers(&params)?;
    if json {
        let records: Vec<_> = all.iter().map(|j| JumperRecord::new(&params, j)).collect();
        outln!("{}", serde_json::to_string(&records).expect("plain data"));
    } else {
        for j in &all {
            outln!("{j}");
        }
        eprintln!("{} jumpers", all.len());
    }
    Ok(())
}

fn search_cmd(
    dims: Dims,
    s: Option<u64>,
    count: bool,
    count_clockwise: bool,
    budget: Option<f64>,
    json: bool,
) -> Outcome {
    let params = params(dims)?;
    let s = s.unwrap_or(params.s);
    let config = search_config(budget)?;
    let (n, k) = (dims.n, dims.k);
    if count || count_clockwise {
        let total = if count {
            count_fixed0(n, k, s, &config)?
        } else {
            count_clockwise_fixed0(n, k, s, &config)?
        };
        if json {
            let what = if count { "fixed0" } else { "clockwise_fixed0" };
            outln!("{}", json!({ "n": n, "k": k, "s": s, what: total }));
        } else {
            outln!("{total}");
        }
        return Ok(());
    }
    let found = brute_force_exists(n, k, s, &config)?;
    if json {
        outln!("{}", serde_json::to_string(&found).expect("plain data"));
    } else {
        match &found {
            Existence::Witness { permutation } => outln!("{permutation}"),
            Existence::Exhausted { nodes } => outln!("none ({nodes} nodes searched)"),
        }
    }
    match found {
        Existence::Witness { .. } => Ok(()),
        Existence::Exhausted { .. } => Err(Failure::Negative),
    }
}

fn render_cmd(
    file: &Path,
    dims: Dims,
    s: Option<u64>,
    format: Format,
    highlight_blocks: bool,
    cell: u32,
    output: Option<&Path>,
) -> Outcome {
    let p = read_perm(Some(file), Some(dims.n))?;
    let s = s.unwrap_or(params(dims)?.s);
    let text = match format {
        Format::Ascii => render_ascii(&p, s, dims.k)?,
        Format::Svg => render_svg(
            &p,
            s,
            dims.k,
            &SvgOptions {
                cell,
                highlight_blocks,
            },
        )?,
    };
    match output {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?
        }
        None => out!("{text}"),
    }
    Ok(())
}

fn random_cmd(n: u64, seed: u64, json: bool) -> Outcome {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    if n == 0 {
        return Err(Failure::Input("n must be at least 1".into()));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut images: Vec<u64> = (0..n).collect();
    images.shuffle(&mut rng);
    print_perm(&Permutation::from_images(images)?, json)
}
