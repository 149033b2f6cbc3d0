use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use tscgen::evolve::{run_with_observer, Budget, IslandConfig, RunConfig};
use tscgen::io::{
    export_dot, parse_blif, parse_config, parse_pla, read_native, write_blif, write_native,
    RunRecord, RunReport,
};
use tscgen::netlist::{build_duplication_baseline, duplication_overhead};
use tscgen::verify::{codespace_report, Verifier};
use tscgen::{Circuit, GenomeLayout, SeedMode, TargetSpec};

/// Evolve, verify, and compare totally self-checking circuits.
#[derive(Parser)]
#[command(name = "tscgen", version)]
struct Cli {
    /// key = value file supplying defaults for any long flag of the chosen
    /// subcommand. Flags on the command line win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a circuit with concurrent error detection.
    Evolve(EvolveArgs),
    /// Exhaustively check a circuit for the TSC property.
    Verify(VerifyArgs),
    /// Build the duplication-with-comparison design for a seed.
    Baseline(BaselineArgs),
    /// Convert a circuit to Graphviz or BLIF.
    Export(ExportArgs),
    /// Summarise finished runs.
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Unconstrained,
    #[value(alias = "non-intrusive", alias = "non_intrusive")]
    Nonintrusive,
}

#[derive(Args)]
struct EvolveArgs {
    /// Target truth table (PLA). Defaults to the seed's own function.
    #[arg(long)]
    target: Option<PathBuf>,
    /// Seed netlist (BLIF, two-input gates).
    #[arg(long)]
    seed: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "unconstrained")]
    mode: Mode,
    /// Address width. Defaults to the smallest that fits a duplication
    /// design.
    #[arg(long)]
    b: Option<usize>,
    #[arg(long, default_value_t = 1)]
    islands: usize,
    #[arg(long)]
    budget_evals: Option<u64>,
    #[arg(long)]
    budget_secs: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed_rng: u64,
    #[arg(long, default_value_t = 0.1)]
    migration_rate: f64,
    /// Reseed an island after this many generations without improvement.
    #[arg(long)]
    restart_after: Option<u64>,
    /// Stop once a TSC champion has at most this many live gates.
    #[arg(long)]
    goal_size: Option<usize>,
    #[arg(long, default_value_t = 100)]
    checkpoint_every: u64,
    /// Evaluate on all cores. Results do not depend on this flag.
    #[arg(long)]
    parallel: bool,
    /// Benchmark name for reports. Defaults to the seed's model name.
    #[arg(long)]
    name: Option<String>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    quiet: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Circuit in native JSON.
    #[arg(long)]
    circuit: PathBuf,
    /// Also require the outputs to match this truth table, up to inversion.
    #[arg(long)]
    target: Option<PathBuf>,
    /// Counterexamples to print per category.
    #[arg(long, default_value_t = 10)]
    show: usize,
}

#[derive(Args)]
struct BaselineArgs {
    #[arg(long)]
    seed: PathBuf,
    /// Where to write the baseline circuit as native JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    circuit: PathBuf,
    #[arg(long)]
    dot: Option<PathBuf>,
    #[arg(long)]
    blif: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Run directories written by `evolve`.
    #[arg(long, required = true, num_args = 1..)]
    run: Vec<PathBuf>,
    /// Gate count of the champion's function core, when known.
    #[arg(long)]
    function_gates: Option<usize>,
    /// Where to write the reports as JSON. Printed when absent.
    #[arg(long)]
    json: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_blif(path: &Path) -> Result<tscgen::io::BlifModel> {
    let text = read(path)?;
    parse_blif(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load_pla(path: &Path) -> Result<TargetSpec> {
    let text = read(path)?;
    parse_pla(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load_native(path: &Path) -> Result<Circuit> {
    let text = read(path)?;
    read_native(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

const SUBCOMMANDS: [&str; 5] = ["evolve", "verify", "baseline", "export", "report"];

/// Inserts `--key value` pairs from the config file for flags absent from
/// the command line.
fn merge_config(argv: Vec<String>) -> Result<Vec<String>> {
    let Some(pos) = argv
        .iter()
        .position(|a| a == "--config" || a.starts_with("--config="))
    else {
        return Ok(argv);
    };
    let path = match argv[pos].strip_prefix("--config=") {
        Some(p) => p.to_string(),
        None => match argv.get(pos + 1) {
            Some(p) => p.clone(),
            None => return Ok(argv),
        },
    };
    let text = read(Path::new(&path))?;
    let map = parse_config(&text)?;
    let Some(sub) = argv.iter().position(|a| SUBCOMMANDS.contains(&a.as_str())) else {
        return Ok(argv);
    };
    let mut extra = Vec::new();
    for (key, value) in map {
        let flag = format!("--{key}");
        let given = argv
            .iter()
            .any(|a| a == &flag || a.starts_with(&format!("{flag}=")));
        if given {
            continue;
        }
        match value.as_str() {
            "true" => extra.push(flag),
            "false" => {}
            _ => {
                extra.push(flag);
                extra.push(value);
            }
        }
    }
    let mut out = argv[..=sub].to_vec();
    out.extend(extra);
    out.extend_from_slice(&argv[sub + 1..]);
    Ok(out)
}

fn evolve(a: EvolveArgs) -> Result<ExitCode> {
    let seed = a.seed.as_deref().map(load_blif).transpose()?;
    let target = match (&a.target, &seed) {
        (Some(p), _) => load_pla(p)?,
        (None, Some(s)) => TargetSpec::from_circuit(&s.circuit),
        (None, None) => bail!("give --target, --seed, or both"),
    };
    if let Some(s) = &seed {
        if s.circuit.inputs != target.inputs || s.circuit.outputs.len() != target.num_outputs() {
            bail!(
                "seed has {} inputs and {} outputs, target {} and {}",
                s.circuit.inputs,
                s.circuit.outputs.len(),
                target.inputs,
                target.num_outputs()
            );
        }
    }
    let mode = match a.mode {
        Mode::Unconstrained => SeedMode::Unconstrained,
        Mode::Nonintrusive => SeedMode::NonIntrusive,
    };
    if mode == SeedMode::NonIntrusive && seed.is_none() {
        bail!("non-intrusive mode needs --seed");
    }
    let g = seed.as_ref().map_or(0, |s| s.circuit.gates.len());
    let (r, q) = (target.inputs, target.num_outputs());
    let layout = match a.b {
        Some(b) => GenomeLayout::new(r, q, b)?,
        None => GenomeLayout::for_duplication(r, q, g)?,
    };

    let mut island = IslandConfig::new(layout);
    island.mode = mode;
    island.rng_seed = a.seed_rng;
    island.migration_rate = a.migration_rate;
    island.budget = Budget {
        max_evaluations: a.budget_evals,
        wall_clock: a.budget_secs.map(Duration::from_secs_f64),
    };
    if island.budget == Budget::default() {
        bail!("give --budget-evals or --budget-secs; runs are otherwise unbounded");
    }
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let mut config = RunConfig::new(island);
    config.islands = a.islands;
    config.goal_size = a.goal_size;
    config.checkpoint = Some(a.out.join("checkpoints.jsonl"));
    config.checkpoint_every = a.checkpoint_every;
    config.parallel = a.parallel;
    config.restart_after = a.restart_after;

    let quiet = a.quiet;
    let mut last = None;
    let result = run_with_observer(
        config,
        target.clone(),
        seed.as_ref().map(|s| &s.circuit),
        |p| {
            let f = p.champion;
            let key = (f.objectives().map(f64::to_bits), f.size);
            if !quiet && last != Some(key) {
                last = Some(key);
                eprintln!(
                    "gen {:>8} evals {:>10}  f_f {:.4} f_ST {:.4} f_FS {:.6} size {}",
                    p.generation, p.evaluations, f.function, f.self_testing, f.fault_secure, f.size
                );
            }
        },
    )?;

    let name = a
        .name
        .or_else(|| {
            seed.as_ref()
                .map(|s| s.name.clone())
                .filter(|n| !n.is_empty())
        })
        .unwrap_or_else(|| "circuit".into());
    let record = RunRecord {
        benchmark: name,
        mode,
        inputs: r,
        outputs: q,
        seed_gates: g,
        addr_bits: layout.addr_bits,
        rng_seed: a.seed_rng,
        islands: a.islands,
        evaluations: result.evaluations,
        generations: result.generations,
        elapsed_secs: result.elapsed.as_secs_f64(),
        stop: result.stop,
        champion: result.champion.genotype.to_hex(),
        fitness: result.champion.fitness,
        target: RunRecord::target_rows(&target),
        history: result.history.clone(),
    };
    write(
        &a.out.join("run.json"),
        &serde_json::to_string_pretty(&record)?,
    )?;
    let champion = record.champion_circuit()?;
    write(&a.out.join("champion.json"), &write_native(&champion))?;
    write(&a.out.join("champion.dot"), &export_dot(&champion))?;
    let report = RunReport::from_record(&record, None)?;
    println!(
        "stopped: {:?} after {} evaluations, {} generations, {:.1}s",
        result.stop,
        result.evaluations,
        result.generations,
        result.elapsed.as_secs_f64()
    );
    let f = &result.champion.fitness;
    println!(
        "champion: f_f {} f_ST {} f_FS {} f_p {:.4} size {}",
        f.function, f.self_testing, f.fault_secure, f.parsimony, f.size
    );
    println!("{}", report.verdict);
    if seed.is_some() {
        println!(
            "overhead {} gates; duplication needs {}",
            report.overhead, report.dup_overhead
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn verify(a: VerifyArgs) -> Result<ExitCode> {
    let circuit = load_native(&a.circuit)?;
    let target = a.target.as_deref().map(load_pla).transpose()?;
    let verifier = match &target {
        Some(t) => {
            if t.inputs != circuit.inputs || t.num_outputs() != circuit.outputs.len() {
                bail!("circuit and target shapes differ");
            }
            Verifier::for_target(&circuit, t)
        }
        None => Verifier::new(&circuit),
    };
    let report = verifier.tsc();
    println!("{}", report.summary());
    if !report.has_rails {
        println!("circuit has no error rails");
    }
    for w in report.false_alarm_words.iter().take(a.show) {
        println!("false alarm on input word {w}");
    }
    for f in report.st.undetected.iter().take(a.show) {
        println!("undetected: {f}");
    }
    for (f, w) in report.fs.violations.iter().take(a.show) {
        println!("unsignalled: {f} on input word {w}");
    }
    let mut ok = report.is_tsc;
    if let Some(t) = &target {
        let polarity = verifier.output_polarity(t);
        for (j, p) in polarity.iter().enumerate() {
            match p {
                None => {
                    println!("output y{j} does not match its target");
                    ok = false;
                }
                Some(true) => println!("output y{j} is the complement of its target"),
                Some(false) => {}
            }
        }
    }
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn baseline(a: BaselineArgs) -> Result<ExitCode> {
    let seed = load_blif(&a.seed)?;
    let c = &seed.circuit;
    let base = build_duplication_baseline(c)?;
    let (g, q) = (c.gates.len(), c.outputs.len());
    println!("seed: {g} gates, {} inputs, {q} outputs", c.inputs);
    println!("dup overhead: {}", duplication_overhead(g, q));
    let cs = codespace_report(c, &base);
    println!(
        "checker codespace: {} of {} output codewords occur",
        cs.codewords, cs.possible_codewords
    );
    println!("self-testing: {}", if cs.is_st { "yes" } else { "no" });
    for f in &cs.checker_faults {
        println!("undetected checker fault: {f}");
    }
    for f in &cs.other_faults {
        println!("undetected fault: {f}");
    }
    if let Some(out) = &a.out {
        write(out, &write_native(&base.circuit))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn export(a: ExportArgs) -> Result<ExitCode> {
    let circuit = load_native(&a.circuit)?;
    if a.dot.is_none() && a.blif.is_none() {
        print!("{}", export_dot(&circuit));
    }
    if let Some(p) = &a.dot {
        write(p, &export_dot(&circuit))?;
    }
    if let Some(p) = &a.blif {
        let model = a
            .circuit
            .file_stem()
            .map_or("circuit".into(), |s| s.to_string_lossy().into_owned());
        write(p, &write_blif(&circuit, &model))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn report(a: ReportArgs) -> Result<ExitCode> {
    let mut reports = Vec::new();
    for dir in &a.run {
        let text = read(&dir.join("run.json"))?;
        let record: RunRecord = serde_json::from_str(&text)
            .with_context(|| format!("parsing {}/run.json", dir.display()))?;
        reports.push(RunReport::from_record(&record, a.function_gates)?);
    }
    let json = serde_json::to_string_pretty(&reports)?;
    match &a.json {
        Some(p) => write(p, &json)?,
        None => println!("{json}"),
    }
    print!("{}", RunReport::table(&reports));
    Ok(ExitCode::SUCCESS)
}

fn run(argv: Vec<String>) -> Result<ExitCode> {
    let argv = merge_config(argv)?;
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return Ok(ExitCode::from(code));
        }
    };
    match cli.command {
        Command::Evolve(a) => evolve(a),
        Command::Verify(a) => verify(a),
        Command::Baseline(a) => baseline(a),
        Command::Export(a) => export(a),
        Command::Report(a) => report(a),
    }
}

/// Exit codes: 0 success, 1 verification failure, 2 usage, parse, or I/O
/// error.
fn main() -> ExitCode {
    match run(std::env::args().collect()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
