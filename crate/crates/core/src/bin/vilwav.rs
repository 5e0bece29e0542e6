//! Command-line front end: build, verify, transform, and inspect tree-generated systems.
//!
//! Exit codes: 0 success, 1 mathematical-validation failure, 2 input or format failure.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use vilwav::io::{self, LoadError};
use vilwav::mask::random_phases;
use vilwav::refinable::StepFunction;
use vilwav::transform::{parseval_deviations, project, reconstruct, CoeffGrid, FilterBank};
use vilwav::verify::{verify_all_trees, verify_system};
use vilwav::wavelet::BetaMethod;
use vilwav::{EdgePhases, Limits, VerifyLevel, WaveletSystem};

#[derive(Parser)]
#[command(name = "vilwav", version, about = "Orthogonal wavelets on p-adic Vilenkin groups from rooted trees")]
struct Cli {
    /// Tolerance for every numerical check.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tree files.
    #[command(subcommand)]
    Tree(TreeCmd),
    /// Build a wavelet system from a tree file.
    Build(BuildArgs),
    /// Verify a system file, or every tree for a given p.
    Verify(VerifyArgs),
    /// Multi-level analysis and synthesis.
    #[command(subcommand)]
    Transform(TransformCmd),
    /// Mask tables.
    #[command(subcommand)]
    Mask(MaskCmd),
    /// Print a table from a system file.
    Show(ShowArgs),
}

#[derive(Subcommand)]
enum TreeCmd {
    /// Check a tree file and print its height, M, and first-level vertices.
    Validate { path: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum PhaseSource {
    /// Phases listed in the tree file.
    Tree,
    /// All edge phases zero.
    Zero,
    /// Uniform random phases from --seed.
    Random,
}

#[derive(Args)]
struct BuildArgs {
    tree: PathBuf,
    #[arg(short, long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = PhaseSource::Tree)]
    phases: PhaseSource,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Solve for β with a dense LU factorization instead of the closed form.
    #[arg(long)]
    dense_beta: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Level {
    Spectral,
    Full,
}

impl From<Level> for VerifyLevel {
    fn from(l: Level) -> Self {
        match l {
            Level::Spectral => VerifyLevel::Spectral,
            Level::Full => VerifyLevel::Full,
        }
    }
}

#[derive(Args)]
struct VerifyArgs {
    /// System file (omit with --all-trees).
    system: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Level::Spectral)]
    level: Level,
    /// Verify every rooted tree on --p vertices.
    #[arg(long, requires = "p")]
    all_trees: bool,
    #[arg(long)]
    p: Option<usize>,
    /// Random phase draws per tree in batch mode, in addition to zero phases.
    #[arg(long, default_value_t = 5)]
    draws: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Append wall-clock time to each line (makes output non-reproducible).
    #[arg(long)]
    timings: bool,
}

#[derive(Subcommand)]
enum TransformCmd {
    /// Project a signal (or ingest coefficients) and decompose it.
    Analyze(AnalyzeArgs),
    /// Rebuild coefficients or a signal from a pyramid.
    Synthesize(SynthesizeArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    system: PathBuf,
    /// Signal file, projected onto V_J.
    #[arg(long, conflicts_with = "coeffs", required_unless_present = "coeffs")]
    signal: Option<PathBuf>,
    /// Coefficient grid file {"p", "level", "entries"}, used as-is.
    #[arg(long)]
    coeffs: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    levels: usize,
    /// Projection level J; defaults to the finest level the signal resolves.
    #[arg(long, allow_negative_numbers = true)]
    scale: Option<i32>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthOutput {
    /// Step function on the group.
    Signal,
    /// Coefficients at the finest level.
    Coeffs,
}

#[derive(Args)]
struct SynthesizeArgs {
    #[arg(long)]
    system: PathBuf,
    #[arg(long)]
    pyramid: PathBuf,
    #[arg(long, value_enum, default_value_t = SynthOutput::Signal)]
    format: SynthOutput,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum MaskCmd {
    /// Recover the generating tree and edge phases from a mask or system file.
    ToTree {
        path: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Table {
    Phi,
    Psi,
    Beta,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct ShowArgs {
    #[arg(value_enum)]
    table: Table,
    #[arg(long)]
    system: PathBuf,
    /// Wavelet index for psi/beta; psi defaults to all, beta to l = 0 (β itself).
    #[arg(long)]
    l: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        Failure { code: e.exit_code() as u8, message: e.to_string() }
    }
}

impl From<vilwav::Error> for Failure {
    fn from(e: vilwav::Error) -> Self {
        Failure { code: 1, message: e.to_string() }
    }
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

type CmdResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let limits = Limits::from_env();
    let result = match cli.command {
        Command::Tree(TreeCmd::Validate { path }) => tree_validate(&path),
        Command::Build(args) => build(args, &limits),
        Command::Verify(args) => verify(args, cli.tol, &limits),
        Command::Transform(TransformCmd::Analyze(args)) => analyze(args, cli.tol, &limits),
        Command::Transform(TransformCmd::Synthesize(args)) => synthesize(args, &limits),
        Command::Mask(MaskCmd::ToTree { path, out }) => mask_to_tree(&path, out.as_deref()),
        Command::Show(args) => show(args, &limits),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| input_error(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| input_error(e.to_string()))
        }
    }
}

fn load_system(path: &Path, limits: &Limits) -> Result<WaveletSystem, Failure> {
    Ok(io::parse_system(&io::read_file(path)?, limits)?)
}

/// The tree construction is stated for odd p; p = 2 only has the star (Haar) and is checked anyway.
fn note_binary(p: usize) {
    if p == 2 {
        eprintln!("note: p = 2 admits only the star tree (Haar); the construction is stated for p >= 3, checks run regardless");
    }
}

fn tree_validate(path: &Path) -> CmdResult {
    let (tree, _) = io::parse_tree(&io::read_file(path)?)?;
    println!(
        "valid, height={}, M={}, first level: {:?}",
        tree.height(),
        tree.support_exponent(),
        tree.first_level()
    );
    Ok(0)
}

fn build(args: BuildArgs, limits: &Limits) -> CmdResult {
    let (tree, file_phases) = io::parse_tree(&io::read_file(&args.tree)?)?;
    let phases = match args.phases {
        PhaseSource::Tree => file_phases,
        PhaseSource::Zero => EdgePhases::new(),
        PhaseSource::Random => random_phases(&tree, &mut ChaCha8Rng::seed_from_u64(args.seed)),
    };
    let method = if args.dense_beta { BetaMethod::DenseSolve } else { BetaMethod::Adjoint };
    note_binary(tree.p());
    let system = WaveletSystem::build_with(&tree, &phases, limits, method)?;
    write_output(args.out.as_deref(), &io::system_to_json(&system))?;
    Ok(0)
}

fn verify(args: VerifyArgs, tol: f64, limits: &Limits) -> CmdResult {
    let level = args.level.into();
    if args.all_trees {
        if args.system.is_some() {
            return Err(input_error("--all-trees takes no system file"));
        }
        let p = args.p.expect("clap enforces --p");
        note_binary(p);
        let outcomes = verify_all_trees(p, args.draws, args.seed, level, tol, limits)?;
        let mut all = true;
        for t in &outcomes {
            let status = if t.passed() { "PASS" } else { "FAIL" };
            let mut line = format!("{status} parent={:?} systems={} max_dev={:.3e}", t.tree.parent(), t.reports.len(), t.max_deviation());
            if let Some(e) = &t.build_error {
                line.push_str(&format!("  build error: {e}"));
            }
            for r in &t.reports {
                for c in r.failures() {
                    line.push_str(&format!("  {}: {}", c.name, c.detail));
                }
            }
            println!("{line}");
            all &= t.passed();
        }
        println!("overall: {} ({} trees, p = {p})", if all { "PASS" } else { "FAIL" }, outcomes.len());
        return Ok(if all { 0 } else { 1 });
    }
    let path = args.system.ok_or_else(|| input_error("a system file or --all-trees is required"))?;
    let system = load_system(&path, limits)?;
    note_binary(system.p.as_usize());
    let report = verify_system(&system, level, tol, limits);
    print!("{}", report.render(args.timings));
    Ok(if report.passed() { 0 } else { 1 })
}

/// Coefficient grid file for direct ingestion.
#[derive(serde::Deserialize)]
struct CoeffFile {
    p: u64,
    #[serde(flatten)]
    grid: io::GridFile,
}

fn analyze(args: AnalyzeArgs, tol: f64, limits: &Limits) -> CmdResult {
    let system = load_system(&args.system, limits)?;
    let bank = FilterBank::from_system(&system);
    let grid = if let Some(path) = &args.coeffs {
        let raw: CoeffFile = serde_json::from_str(&io::read_file(path)?).map_err(LoadError::from)?;
        if raw.p != system.p.get() as u64 {
            return Err(input_error(format!("coefficients have p = {}, system has p = {}", raw.p, system.p.get())));
        }
        raw.grid.to_grid(system.p)?
    } else {
        let path = args.signal.as_ref().expect("clap enforces --signal or --coeffs");
        let signal = io::parse_signal(&io::read_file(path)?, limits)?;
        if signal.modulus() != system.p {
            return Err(input_error(format!(
                "signal has p = {}, system has p = {}",
                signal.modulus().get(),
                system.p.get()
            )));
        }
        let level = args.scale.unwrap_or(signal.resolution_level() - system.m as i32);
        project(&system.phi, &signal, level, limits)?
    };
    let pyramid = bank.analyze(&grid, args.levels)?;
    let back = bank.synthesize(&pyramid)?;
    let err = back.max_abs_diff(&grid);
    let parseval = parseval_deviations(&bank, &grid, args.levels)?.into_iter().fold(0.0, f64::max);
    write_output(args.out.as_deref(), &io::pyramid_to_json(&pyramid))?;
    let ok = err < tol && parseval < tol;
    eprintln!(
        "{} levels={} top_level={} roundtrip_max_err={err:.3e} parseval_max_dev={parseval:.3e}",
        if ok { "PASS" } else { "FAIL" },
        args.levels,
        grid.level
    );
    Ok(if ok { 0 } else { 1 })
}

fn synthesize(args: SynthesizeArgs, limits: &Limits) -> CmdResult {
    let system = load_system(&args.system, limits)?;
    let pyramid = io::parse_pyramid(&io::read_file(&args.pyramid)?)?;
    if pyramid.approx.p != system.p {
        return Err(input_error(format!("pyramid has p = {}, system has p = {}", pyramid.approx.p.get(), system.p.get())));
    }
    let grid = FilterBank::from_system(&system).synthesize(&pyramid)?;
    let text = match args.format {
        SynthOutput::Signal => io::signal_to_json(&reconstruct(&system.phi, &grid)?),
        SynthOutput::Coeffs => coeffs_json(&grid),
    };
    write_output(args.out.as_deref(), &text)?;
    Ok(0)
}

fn coeffs_json(grid: &CoeffGrid) -> String {
    #[derive(serde::Serialize)]
    struct Out {
        p: u64,
        #[serde(flatten)]
        grid: io::GridFile,
    }
    io::to_json(&Out { p: grid.p.get() as u64, grid: io::GridFile::new(grid) })
}

fn mask_to_tree(path: &Path, out: Option<&Path>) -> CmdResult {
    let mask = io::parse_mask(&io::read_file(path)?)?;
    let (tree, phases) = mask.to_tree().map_err(|e| Failure { code: 1, message: format!("mask is not tree-generated: {e}") })?;
    write_output(out, &io::tree_to_json(&tree, &phases))?;
    Ok(0)
}

fn show(args: ShowArgs, limits: &Limits) -> CmdResult {
    let system = load_system(&args.system, limits)?;
    let p = system.p.as_usize();
    let check_l = |l: usize, min: usize| {
        if l < min || l >= p {
            Err(input_error(format!("--l must be in {min}..={}", p - 1)))
        } else {
            Ok(l)
        }
    };
    let text = match args.table {
        Table::Phi => table_text(args.format, &[("phi".into(), &system.phi)]),
        Table::Psi => {
            let ls: Vec<usize> = match args.l {
                Some(l) => vec![check_l(l, 1)?],
                None => (1..p).collect(),
            };
            let named: Vec<(String, &StepFunction)> = ls.iter().map(|&l| (format!("psi_{l}"), &system.psi[l - 1])).collect();
            table_text(args.format, &named)
        }
        Table::Beta => {
            let l = check_l(args.l.unwrap_or(0), 0)?;
            let beta = if l == 0 { &system.beta } else { &system.beta_l[l - 1] };
            beta_text(args.format, p, beta)
        }
    };
    write_output(None, &text)?;
    Ok(0)
}

fn table_text(format: Format, tables: &[(String, &StepFunction)]) -> String {
    match format {
        Format::Json => {
            #[derive(serde::Serialize)]
            struct Named {
                name: String,
                window: [i32; 2],
                values: Vec<[f64; 2]>,
            }
            let out: Vec<Named> = tables
                .iter()
                .map(|(name, f)| Named {
                    name: name.clone(),
                    window: [f.support_level(), f.resolution_level()],
                    values: f.values().iter().map(|c| [c.re, c.im]).collect(),
                })
                .collect();
            io::to_json(&out)
        }
        Format::Csv => {
            let mut s = String::new();
            for (name, f) in tables {
                let w = f.window();
                s.push_str("table,index");
                for pos in w.lo..w.hi {
                    s.push_str(&format!(",a{pos}"));
                }
                s.push_str(",re,im\n");
                for (idx, v) in f.values().iter().enumerate() {
                    s.push_str(&format!("{name},{idx}"));
                    for d in w.digits(idx) {
                        s.push_str(&format!(",{d}"));
                    }
                    s.push_str(&format!(",{},{}\n", v.re, v.im));
                }
            }
            s
        }
    }
}

fn beta_text(format: Format, p: usize, beta: &[Complex64]) -> String {
    match format {
        Format::Json => io::to_json(&beta.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>()),
        Format::Csv => {
            let mut s = String::from("j,a-1,a-2,re,im\n");
            for (j, b) in beta.iter().enumerate() {
                s.push_str(&format!("{j},{},{},{},{}\n", j % p, j / p, b.re, b.im));
            }
            s
        }
    }
}
