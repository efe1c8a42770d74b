use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use fccfold::conformation::parse_dump;
use fccfold::energy::{ContactMatrix, EnergyModelId};
use fccfold::metrics::{format_percent, relative_improvement, rmsd, summarize, NativeStructure, RunRecord, RunSetSummary};
use fccfold::oracle::{count_saws, exact_optimum};
use fccfold::search::{derive_seed, run, GaConfig, RunResult, TraceRow};
use fccfold::sequence::{benchmark, benchmark_ids, parse_sequence, Sequence};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "fccfold", version, about = "Protein structure prediction on the FCC lattice")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Seeded GA runs on one sequence.
    Run(RunArgs),
    /// All three variants over a list of sequences, as a comparison table.
    Bench(BenchArgs),
    /// Exhaustive optimum for a short chain.
    Oracle(OracleArgs),
    /// Distance-matrix RMSD of a dump against a native trace.
    Rmsd(RmsdArgs),
    /// Relative improvement of a target energy over a reference.
    Ri(RiArgs),
}

/// Search settings shared by `run` and `bench`. Unset flags fall back to
/// the config file, then to the defaults.
#[derive(Args, Clone, Default)]
struct GaFlags {
    /// TOML file with engine settings.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    pop_size: Option<usize>,
    /// Generation budget per run.
    #[arg(long)]
    generations: Option<u64>,
    /// Wall-clock budget per run in seconds. Without --generations this
    /// lifts the generation cap.
    #[arg(long)]
    time: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    mm_repeat: Option<usize>,
    #[arg(long)]
    p_polar: Option<f64>,
    #[arg(long)]
    stagnation_window: Option<usize>,
    /// Six comma-separated weights: crossover,rotation,diagonal,pull,tilt,macro.
    #[arg(long)]
    op_weights: Option<String>,
}

impl GaFlags {
    fn resolve(&self) -> Result<GaConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
            }
            None => GaConfig::default(),
        };
        if let Some(v) = self.pop_size {
            cfg.pop_size = v;
        }
        if let Some(t) = self.time {
            cfg.max_seconds = Some(t);
            cfg.max_generations = None;
        }
        if let Some(g) = self.generations {
            cfg.max_generations = Some(g);
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.mm_repeat {
            cfg.mm_repeat = v;
        }
        if let Some(v) = self.p_polar {
            cfg.p_polar = v;
        }
        if let Some(v) = self.stagnation_window {
            cfg.stagnation_window = v;
        }
        if let Some(w) = &self.op_weights {
            let parsed: Vec<f64> = w
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .with_context(|| format!("bad --op-weights '{w}'"))?;
            cfg.operator_weights = parsed.try_into().map_err(|v: Vec<f64>| anyhow::anyhow!("--op-weights needs 6 values, got {}", v.len()))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct RunArgs {
    /// Bundled benchmark id or path to a FASTA/plain sequence file.
    #[arg(long)]
    seq: String,
    #[arg(long, default_value = "mh")]
    model: EnergyModelId,
    #[arg(long, default_value_t = 1)]
    runs: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Native Cα trace for RMSD columns.
    #[arg(long)]
    native: Option<PathBuf>,
    #[command(flatten)]
    ga: GaFlags,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated benchmark ids or sequence files. Defaults to the
    /// bundled set.
    #[arg(long)]
    seqs: Option<String>,
    #[arg(long, default_value_t = 3)]
    runs: usize,
    /// Directory for bench.csv and the timing log.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[command(flatten)]
    ga: GaFlags,
}

#[derive(Args)]
struct OracleArgs {
    /// Chain length. Required unless --seq is given.
    #[arg(long)]
    n: Option<usize>,
    /// Sequence to score; defaults to a glycine homopolymer of length n.
    #[arg(long)]
    seq: Option<String>,
    /// Energy matrix, hp or mj.
    #[arg(long, default_value = "hp")]
    model: EnergyModelId,
    /// Count rotation classes instead of all walks.
    #[arg(long)]
    reduce: bool,
}

#[derive(Args)]
struct RmsdArgs {
    /// Conformation dump.
    pred: PathBuf,
    /// Native trace (`id n` then `x y z` lines) or another dump.
    native: PathBuf,
}

#[derive(Args)]
struct RiArgs {
    #[arg(short = 't', long, allow_negative_numbers = true)]
    target: f64,
    #[arg(short = 'r', long = "reference", allow_negative_numbers = true)]
    reference: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Rmsd(a) => cmd_rmsd(a),
        Command::Ri(a) => cmd_ri(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn load_sequence(spec: &str) -> Result<Sequence> {
    if benchmark_ids().any(|id| id.eq_ignore_ascii_case(spec)) {
        return Ok(benchmark(spec)?);
    }
    let path = Path::new(spec);
    if !path.exists() {
        bail!("'{spec}' is neither a bundled benchmark id nor a file");
    }
    let text = fs::read_to_string(path).with_context(|| format!("reading {spec}"))?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("seq");
    parse_sequence(&text, stem).with_context(|| format!("parsing {spec}"))
}

fn run_batch(seq: &Sequence, cfg: &GaConfig, model: EnergyModelId, runs: usize) -> Result<Vec<RunResult>> {
    (0..runs)
        .into_par_iter()
        .map(|i| {
            let cfg = GaConfig { seed: derive_seed(cfg.seed, i), ..cfg.clone() };
            Ok(run(seq, &cfg, model)?)
        })
        .collect()
}

#[derive(Serialize)]
struct ManifestRecord<'a> {
    sequence_id: &'a str,
    model: EnergyModelId,
    run: usize,
    master_seed: u64,
    seed: u64,
    config: &'a GaConfig,
    generations: u64,
    random_walks: u64,
    best_energy: f64,
    reported_energy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    rmsd: Option<f64>,
    conformation: String,
    trace: String,
    dump: String,
}

#[derive(Serialize)]
struct SummaryRecord<'a> {
    sequence_id: &'a str,
    model: EnergyModelId,
    /// Over the search objective.
    objective: RunSetSummary,
    /// Over MJ energies, the figure compared across variants.
    reported: RunSetSummary,
}

fn cmd_run(a: RunArgs) -> Result<()> {
    if a.runs == 0 {
        bail!("--runs must be positive");
    }
    let seq = load_sequence(&a.seq)?;
    let cfg = a.ga.resolve()?;
    let native = a.native.as_deref().map(load_native).transpose()?;
    if let Some(n) = &native {
        if n.len() != seq.len() {
            bail!("native has {} residues, sequence has {}", n.len(), seq.len());
        }
    }
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let results = run_batch(&seq, &cfg, a.model, a.runs)?;

    let tag = format!("{}_{}", seq.id(), a.model);
    let mut manifest = String::new();
    let mut timing = String::new();
    for (i, r) in results.iter().enumerate() {
        let trace_name = format!("{tag}_run{i:03}.trace.csv");
        let dump_name = format!("{tag}_run{i:03}.dump");
        let mut trace = format!("{}\n", TraceRow::CSV_HEADER);
        for row in &r.trace {
            trace.push_str(&row.to_csv());
            trace.push('\n');
        }
        write(&a.out.join(&trace_name), &trace)?;
        write(&a.out.join(&dump_name), &r.best.to_dump(&seq, r.best_energy, a.model.objective_name()))?;
        let record = ManifestRecord {
            sequence_id: seq.id(),
            model: a.model,
            run: i,
            master_seed: cfg.seed,
            seed: r.seed,
            config: &cfg,
            generations: r.generations,
            random_walks: r.random_walks,
            best_energy: r.best_energy,
            reported_energy: r.reported_energy,
            rmsd: native.as_ref().map(|n| rmsd(&r.best, n)).transpose()?,
            conformation: r.best.direction_string(),
            trace: trace_name,
            dump: dump_name,
        };
        manifest.push_str(&serde_json::to_string(&record)?);
        manifest.push('\n');
        timing.push_str(&format!("{tag} run {i} seed {} generations {} elapsed_ms {}\n", r.seed, r.generations, r.elapsed.as_millis()));
    }
    write(&a.out.join("manifest.jsonl"), &manifest)?;
    append(&a.out.join("timing.log"), &timing)?;

    let objective: Vec<RunRecord> = results.iter().map(|r| RunRecord { best_energy: r.best_energy, best: Some(&r.best) }).collect();
    let reported: Vec<RunRecord> = results.iter().map(|r| RunRecord { best_energy: r.reported_energy, best: Some(&r.best) }).collect();
    let summary = SummaryRecord {
        sequence_id: seq.id(),
        model: a.model,
        objective: summarize(&objective, native.as_ref())?,
        reported: summarize(&reported, native.as_ref())?,
    };
    write(&a.out.join("summary.jsonl"), &format!("{}\n", serde_json::to_string(&summary)?))?;
    println!(
        "{} {} runs={} best={:.2} mean={:.2} (MJ best={:.2} mean={:.2})",
        seq.id(),
        a.model,
        a.runs,
        summary.objective.best_energy,
        summary.objective.mean_energy,
        summary.reported.best_energy,
        summary.reported.mean_energy
    );
    Ok(())
}

pub const BENCH_HEADER: &str = "protein,length,hp_best,hp_avg,mj_best,mj_avg,mh_best,mh_avg,ri_hp_mh,ri_mj_mh";

fn cmd_bench(a: BenchArgs) -> Result<()> {
    if a.runs == 0 {
        bail!("--runs must be positive");
    }
    let specs: Vec<String> = match &a.seqs {
        Some(s) => s.split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect(),
        None => benchmark_ids().map(String::from).collect(),
    };
    let seqs: Vec<Sequence> = specs.iter().map(|s| load_sequence(s)).collect::<Result<_>>()?;
    let cfg = a.ga.resolve()?;
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let mut csv = format!("{BENCH_HEADER}\n");
    let mut timing = String::new();
    for seq in &seqs {
        let mut cells = vec![seq.id().to_string(), seq.len().to_string()];
        let mut avgs = Vec::new();
        for model in EnergyModelId::ALL {
            let results = run_batch(seq, &cfg, model, a.runs)?;
            let records: Vec<RunRecord> = results.iter().map(|r| RunRecord { best_energy: r.reported_energy, best: None }).collect();
            let s = summarize(&records, None)?;
            cells.push(format!("{:.2}", s.best_energy));
            let avg = format!("{:.2}", s.mean_energy);
            // RI is taken from the rounded averages so the table is self-consistent
            avgs.push(avg.parse::<f64>()?);
            cells.push(avg);
            for r in &results {
                timing.push_str(&format!("bench {} {} seed {} generations {} elapsed_ms {}\n", seq.id(), model, r.seed, r.generations, r.elapsed.as_millis()));
            }
        }
        for reference in [avgs[0], avgs[1]] {
            cells.push(match relative_improvement(avgs[2], reference) {
                Ok(ri) => format!("{ri:.2}"),
                Err(_) => "nan".into(),
            });
        }
        csv.push_str(&cells.join(","));
        csv.push('\n');
    }
    let path = a.out.join("bench.csv");
    write(&path, &csv)?;
    append(&a.out.join("timing.log"), &timing)?;
    print!("{csv}");
    Ok(())
}

fn cmd_oracle(a: OracleArgs) -> Result<()> {
    let seq = match (&a.seq, a.n) {
        (Some(s), n) => {
            let seq = load_sequence(s).or_else(|_| parse_sequence(s, "seq").map_err(anyhow::Error::from))?;
            if n.is_some_and(|n| n != seq.len()) {
                bail!("--n {} does not match sequence length {}", n.unwrap(), seq.len());
            }
            seq
        }
        (None, Some(n)) => Sequence::from_codes(format!("G{n}"), &"G".repeat(n))?,
        (None, None) => bail!("give --n or --seq"),
    };
    let matrix = match a.model {
        EnergyModelId::Hp => ContactMatrix::hp(),
        _ => ContactMatrix::mj(),
    };
    let n = seq.len();
    let count = count_saws(n, a.reduce)?;
    let result = exact_optimum(&seq, &matrix)?;
    println!("n count optimum argmin");
    println!("{n} {count} {} {}", result.optimum, result.argmin_string());
    Ok(())
}

fn load_native(path: &Path) -> Result<NativeStructure> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    match NativeStructure::parse(&text) {
        Ok(n) => Ok(n),
        Err(native_err) => {
            let id = path.file_stem().and_then(|s| s.to_str()).unwrap_or("native");
            match parse_dump(&text, id) {
                Ok(d) => Ok(NativeStructure::from_conformation(id, &d.conformation)),
                Err(_) => Err(native_err).with_context(|| format!("parsing {}", path.display())),
            }
        }
    }
}

fn cmd_rmsd(a: RmsdArgs) -> Result<()> {
    let text = fs::read_to_string(&a.pred).with_context(|| format!("reading {}", a.pred.display()))?;
    let pred = parse_dump(&text, "pred").with_context(|| format!("parsing {}", a.pred.display()))?;
    let native = load_native(&a.native)?;
    println!("{:.2}", rmsd(&pred.conformation, &native)?);
    Ok(())
}

fn cmd_ri(a: RiArgs) -> Result<()> {
    println!("{}", format_percent(relative_improvement(a.target, a.reference)?));
    Ok(())
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn append(path: &Path, text: &str) -> Result<()> {
    let mut f = fs::OpenOptions::new().create(true).append(true).open(path).with_context(|| format!("opening {}", path.display()))?;
    f.write_all(text.as_bytes()).with_context(|| format!("writing {}", path.display()))
}
