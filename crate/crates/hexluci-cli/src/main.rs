use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hexluci::analysis::distance_pair;
use hexluci::circuit_ir::{parse_compact, serialize, validate, Circuit, Format};
use hexluci::decode::{benchmark, Passes, CSV_HEADER};
use hexluci::fixtures::Case;
use hexluci::layout::{build_hex_lattice, classify_defects, DefectMap, HexLattice};
use hexluci::noise_sim::{apply_si1000, sample_frames, NoiseParams};
use hexluci::pauli::Basis;
use hexluci::schedule::{build_board, emit_circuit};
use hexluci::subsystem::{build_midcycle_code, verify_code};

#[derive(Parser, Debug)]
#[command(name = "hexluci", version, about = "Defect-aware hex-grid surface code circuits")]
struct Cli {
    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Emit a memory-experiment circuit.
    Generate {
        #[command(flatten)]
        src: Source,
        #[arg(long, value_enum, default_value = "compact")]
        format: TextFormat,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Parse a compact circuit string, validate it and check the round trip.
    Parse {
        /// Circuit text, or `@path` to read it from a file.
        text: String,
        #[arg(long, value_enum, default_value = "compact")]
        format: TextFormat,
    },
    /// Noiseless determinism and code verification report.
    Check {
        #[command(flatten)]
        src: Source,
        #[arg(long, default_value_t = 1000)]
        shots: usize,
    },
    /// Graphlike circuit distance in both memory bases.
    Distance {
        #[arg(long, default_value_t = 5)]
        d: usize,
        #[arg(long, default_value = "none")]
        defect: String,
        #[arg(long, default_value_t = 5)]
        cycles: usize,
    },
    /// Sample detector and observable bits under SI1000 noise.
    Sample {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        noise: Noise,
        #[arg(long, value_enum, default_value = "01")]
        format: BitFormat,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Logical error rate of one configuration, as CSV.
    Benchmark {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        noise: Noise,
        #[arg(long, default_value_t = 2)]
        passes: u8,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Logical error rates over cases, bases and noise strengths, as CSV.
    Sweep {
        #[arg(long, default_value_t = 5)]
        d: usize,
        #[arg(long, value_delimiter = ',', default_value = "none,caseA,caseB,caseC,caseD")]
        cases: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "X,Z")]
        bases: Vec<BasisArg>,
        #[arg(long, value_delimiter = ',', default_value = "0.002,0.001,0.0005")]
        p: Vec<f64>,
        #[arg(long, default_value_t = 20)]
        cycles: usize,
        #[arg(long, default_value_t = 10_000)]
        shots: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        passes: u8,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

/// Where a circuit comes from: a shipped fixture or the generator.
#[derive(Args, Debug)]
struct Source {
    /// Shipped reference circuit (X-basis memory); overrides the generator flags.
    #[arg(long)]
    fixture: Option<String>,
    #[arg(long, default_value_t = 5)]
    d: usize,
    /// `none`, a case name (`caseA`..`caseD`) or a defect file.
    #[arg(long, default_value = "none")]
    defect: String,
    #[arg(long, value_enum, default_value = "X")]
    basis: BasisArg,
    #[arg(long, default_value_t = 10)]
    cycles: usize,
}

#[derive(Args, Debug)]
struct Noise {
    #[arg(long, default_value_t = 1e-3)]
    p: f64,
    #[arg(long, default_value_t = 10_000)]
    shots: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BasisArg {
    #[value(name = "X", alias = "x")]
    X,
    #[value(name = "Z", alias = "z")]
    Z,
}

impl From<BasisArg> for Basis {
    fn from(b: BasisArg) -> Basis {
        match b {
            BasisArg::X => Basis::X,
            BasisArg::Z => Basis::Z,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TextFormat {
    Compact,
    Stim,
}

impl From<TextFormat> for Format {
    fn from(f: TextFormat) -> Format {
        match f {
            TextFormat::Compact => Format::Compact,
            TextFormat::Stim => Format::StimText,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BitFormat {
    #[value(name = "01")]
    Zeros,
    B8,
}

/// Flag combinations clap cannot rule out; reported with exit code 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn defects(lattice: &HexLattice, spec: &str) -> Result<DefectMap> {
    if spec == "none" {
        return Ok(DefectMap::default());
    }
    if let Some(case) = Case::from_name(spec) {
        return case.defects(lattice).with_context(|| format!("{spec} needs a larger patch"));
    }
    let text = fs::read_to_string(spec).with_context(|| format!("reading defect file {spec}"))?;
    Ok(DefectMap::parse(lattice, &text)?)
}

fn generate(d: usize, defect: &str, basis: Basis, cycles: usize) -> Result<Circuit> {
    let lattice = build_hex_lattice(d)?;
    let dm = defects(&lattice, defect)?;
    let code = build_midcycle_code(&lattice, &dm)?;
    Ok(emit_circuit(&build_board(&code)?, cycles, basis)?)
}

impl Source {
    fn circuit(&self) -> Result<Circuit> {
        match &self.fixture {
            Some(name) => {
                let case = Case::from_name(name).with_context(|| format!("unknown fixture {name}"))?;
                if matches!(self.basis, BasisArg::Z) {
                    let msg = format!("fixtures are X-basis memory experiments; use --defect {} for Z", case.name());
                    return Err(Usage(msg).into());
                }
                Ok(case.circuit())
            }
            None => generate(self.d, &self.defect, self.basis.into(), self.cycles),
        }
    }

    fn label(&self) -> String {
        self.fixture.clone().unwrap_or_else(|| self.defect.clone())
    }
}

fn emit(output: &Option<PathBuf>, bytes: &[u8]) -> Result<()> {
    match output {
        Some(path) => fs::write(path, bytes).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { src, format, output } => {
            let mut text = serialize(&src.circuit()?, format.into());
            if !text.ends_with('\n') {
                text.push('\n');
            }
            emit(&output, text.as_bytes())
        }
        Command::Parse { text, format } => {
            let text = match text.strip_prefix('@') {
                Some(path) => fs::read_to_string(path).with_context(|| format!("reading {path}"))?,
                None => text,
            };
            let text = text.trim_end();
            let c = parse_compact(text)?;
            let problems = validate(&c);
            for p in &problems {
                eprintln!("{p}");
            }
            let again = serialize(&c, Format::Compact);
            println!(
                "{} instructions, {} qubits, {} measurements, {} detectors, {} observables",
                c.instructions.len(),
                c.num_qubits(),
                c.num_measurements(),
                c.num_detectors(),
                c.num_observables()
            );
            if matches!(format, TextFormat::Stim) {
                print!("{}", serialize(&c, Format::StimText));
            }
            if !problems.is_empty() {
                bail!("{} validation problems", problems.len());
            }
            if again != text {
                bail!("round trip differs from the input");
            }
            println!("round trip ok");
            Ok(())
        }
        Command::Check { src, shots } => {
            let c = src.circuit()?;
            let mut failed = false;
            let problems = validate(&c);
            failed |= !problems.is_empty();
            for p in &problems {
                println!("invalid: {p}");
            }
            let s = sample_frames(&c, shots, 0)?;
            let bad = (0..shots).filter(|&k| !s.fired(k).is_empty() || s.observables(k) != 0).count();
            if bad == 0 {
                println!("all detectors deterministic ({} detectors, {shots} shots)", c.num_detectors());
            } else {
                println!("{bad} of {shots} noiseless shots fired a detector or observable");
                failed = true;
            }
            let lattice = build_hex_lattice(src.d)?;
            let dm = match &src.fixture {
                Some(name) => Case::from_name(name).context("unknown fixture")?.defects(&lattice)?,
                None => defects(&lattice, &src.defect)?,
            };
            for (defect, label) in classify_defects(&lattice, &dm) {
                println!("defect {defect:?}: {label}");
            }
            let code = build_midcycle_code(&lattice, &dm)?;
            let issues = verify_code(&code);
            if issues.is_empty() {
                println!("code verified: {} checks, {} super-stabilizers", code.checks.len(), code.super_stabilizers.len());
            } else {
                for i in &issues {
                    println!("code: {i}");
                }
                failed = true;
            }
            if failed {
                bail!("check failed");
            }
            Ok(())
        }
        Command::Distance { d, defect, cycles } => {
            let lattice = build_hex_lattice(d)?;
            let dm = defects(&lattice, &defect)?;
            let pair = distance_pair(&lattice, &dm, cycles)?;
            let show = |v: Option<usize>| v.map_or("none".to_string(), |v| v.to_string());
            println!("basis,distance");
            println!("X,{}", show(pair.x));
            println!("Z,{}", show(pair.z));
            Ok(())
        }
        Command::Sample { src, noise, format, output } => {
            let noisy = apply_si1000(&src.circuit()?, NoiseParams::new(noise.p)?);
            let s = sample_frames(&noisy, noise.shots, noise.seed)?;
            match format {
                BitFormat::Zeros => emit(&output, s.to_01().as_bytes()),
                BitFormat::B8 => emit(&output, &s.to_b8()),
            }
        }
        Command::Benchmark { src, noise, passes, output } => {
            let c = src.circuit()?;
            let r = benchmark(&c, NoiseParams::new(noise.p)?, noise.shots, noise.seed, Passes::try_from(passes)?)?;
            let basis = if src.fixture.is_some() { "X".to_string() } else { Basis::from(src.basis).to_string() };
            let text = format!("{CSV_HEADER}\n{}\n", r.csv_row(&src.label(), &basis, noise.p));
            emit(&output, text.as_bytes())
        }
        Command::Sweep { d, cases, bases, p, cycles, shots, seed, passes, output } => {
            let passes = Passes::try_from(passes)?;
            let mut text = format!("{CSV_HEADER}\n");
            for case in &cases {
                for &basis in &bases {
                    let c = generate(d, case, basis.into(), cycles)?;
                    for &p in &p {
                        let r = benchmark(&c, NoiseParams::new(p)?, shots, seed, passes)?;
                        let row = r.csv_row(case, &Basis::from(basis).to_string(), p);
                        eprintln!("{row}");
                        text.push_str(&row);
                        text.push('\n');
                    }
                }
            }
            emit(&output, text.as_bytes())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        #[cfg(feature = "parallel")]
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
        #[cfg(not(feature = "parallel"))]
        let _ = n;
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if e.is::<Usage>() { 2 } else { 1 })
        }
    }
}
