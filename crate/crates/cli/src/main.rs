use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use amrdual::io::{read_amr, write_amr, write_dual_mesh, write_obj, write_ply};
use amrdual::synth::{gen_blocks, gen_octree, gen_uniform, BlockSpec, FieldSpec};
use amrdual::{
    extract_dual_mesh, extract_isosurface, AmrDataset, AmrError, CellIndex, IntBox, IsoParams,
    Threads,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

const EXIT_USAGE: u8 = 1;
const EXIT_LOAD: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

/// Iso-surfaces from cell-centered AMR data via dual cells.
#[derive(Parser, Debug)]
#[command(name = "amrdual", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Extract an iso-surface mesh.
    Extract(ExtractArgs),
    /// Write the dual mesh as a text listing.
    Dual {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Generate a synthetic dataset.
    #[command(subcommand)]
    Synth(SynthCommand),
    /// Check alignment, duplicates and overlaps.
    Validate {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Args, Debug)]
struct ExtractArgs {
    /// Cell list (binary, or text when the name ends in .txt).
    #[arg(long)]
    input: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    iso: f64,
    #[arg(long)]
    output: PathBuf,
    /// Defaults to ply for a .ply output name, obj otherwise.
    #[arg(long, value_enum)]
    format: Option<MeshFormat>,
    /// Worker count, or `auto`.
    #[arg(long, env = "AMRDUAL_THREADS", default_value = "auto")]
    threads: ThreadsArg,
    /// Print counters and phase timings to stderr.
    #[arg(long)]
    stats: bool,
    /// Refuse inputs with overlapping or duplicate cells.
    #[arg(long)]
    validate: bool,
    /// Also write the dual mesh here.
    #[arg(long)]
    dual_output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MeshFormat {
    Obj,
    Ply,
}

#[derive(Clone, Copy, Debug)]
struct ThreadsArg(Threads);

impl FromStr for ThreadsArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(ThreadsArg(Threads::Auto));
        }
        s.parse::<usize>()
            .map(|n| ThreadsArg(Threads::count(n)))
            .map_err(|_| format!("'{s}' is neither a number nor 'auto'"))
    }
}

#[derive(Subcommand, Debug)]
enum SynthCommand {
    /// n^3 level-0 cells.
    Uniform {
        #[arg(long)]
        n: u32,
        #[command(flatten)]
        common: SynthCommon,
    },
    /// Octree refined where the field varies.
    Octree {
        #[arg(long)]
        depth: u8,
        /// Split a cell when the field spread over its corners exceeds this.
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
        #[command(flatten)]
        common: SynthCommon,
    },
    /// Uniform blocks at chosen levels, with optional holes.
    Blocks {
        /// `i,j,k:nx,ny,nz:level`, anchor in finest units, size in cells.
        #[arg(long = "block", required = true)]
        blocks: Vec<BlockArg>,
        /// `x0,y0,z0:x1,y1,z1`, half-open, finest units.
        #[arg(long = "hole")]
        holes: Vec<HoleArg>,
        #[command(flatten)]
        common: SynthCommon,
    },
}

#[derive(Args, Debug)]
struct SynthCommon {
    /// `sphere:cx,cy,cz,r`, `linear:gx,gy,gz,offset` or `sine:cx,cy,cz,freq`.
    #[arg(long, allow_hyphen_values = true)]
    field: FieldSpec,
    #[arg(long)]
    output: PathBuf,
}

fn triple<T: FromStr>(s: &str) -> Option<[T; 3]> {
    let v: Vec<T> = s
        .split(',')
        .map(|x| x.trim().parse().ok())
        .collect::<Option<_>>()?;
    v.try_into().ok()
}

#[derive(Clone, Copy, Debug)]
struct BlockArg(BlockSpec);

impl FromStr for BlockArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("block '{s}': expected i,j,k:nx,ny,nz:level");
        let parts: Vec<&str> = s.split(':').collect();
        let [a, n, l] = parts[..] else {
            return Err(bad());
        };
        let anchor = triple::<i32>(a).ok_or_else(bad)?;
        let size = triple::<u32>(n).ok_or_else(bad)?;
        let level = l.trim().parse::<u8>().map_err(|_| bad())?;
        Ok(BlockArg(BlockSpec::new(anchor, size, level)))
    }
}

#[derive(Clone, Copy, Debug)]
struct HoleArg(IntBox);

impl FromStr for HoleArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("hole '{s}': expected x0,y0,z0:x1,y1,z1");
        let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
        Ok(HoleArg(IntBox {
            min: triple(lo).ok_or_else(bad)?,
            max: triple(hi).ok_or_else(bad)?,
        }))
    }
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

fn load_failure(e: AmrError) -> Failure {
    let code = match e {
        AmrError::Overflow(_) | AmrError::Internal(_) => EXIT_RUNTIME,
        _ => EXIT_LOAD,
    };
    Failure {
        code,
        message: e.to_string(),
    }
}

fn runtime_failure(e: AmrError) -> Failure {
    Failure {
        code: EXIT_RUNTIME,
        message: e.to_string(),
    }
}

fn synth_failure(e: AmrError) -> Failure {
    match e {
        AmrError::Contract(_) | AmrError::Format(_) => Failure::usage(e.to_string()),
        other => runtime_failure(other),
    }
}

fn load(path: &Path) -> Result<(AmrDataset, f64), Failure> {
    let t = Instant::now();
    let ds = read_amr(path).map_err(|e| match e {
        AmrError::Io(io) => Failure {
            code: EXIT_LOAD,
            message: format!("{}: {io}", path.display()),
        },
        other => load_failure(other),
    })?;
    Ok((ds, t.elapsed().as_secs_f64()))
}

fn check_valid(ds: &AmrDataset) -> Result<(), Failure> {
    let report = CellIndex::new(ds).validate();
    if report.is_clean() {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_LOAD,
            message: format!("invalid dataset\n{}", report.describe(ds).trim_end()),
        })
    }
}

fn run_extract(a: ExtractArgs) -> Result<(), Failure> {
    if !a.iso.is_finite() {
        return Err(Failure::usage(format!("iso value {} is not finite", a.iso)));
    }
    let format = a.format.unwrap_or_else(|| {
        let ply = a
            .output
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("ply"));
        if ply {
            MeshFormat::Ply
        } else {
            MeshFormat::Obj
        }
    });
    let (ds, load_seconds) = load(&a.input)?;
    if a.validate {
        check_valid(&ds)?;
    }
    let mut params = IsoParams::new(a.iso).with_threads(a.threads.0);
    params.emit_dual_mesh = a.dual_output.is_some();
    let mut ex = extract_isosurface(&ds, &params).map_err(runtime_failure)?;
    ex.stats.timings.sort = load_seconds;
    match format {
        MeshFormat::Obj => write_obj(&ex.mesh, &a.output),
        MeshFormat::Ply => write_ply(&ex.mesh, &a.output),
    }
    .map_err(runtime_failure)?;
    if let (Some(path), Some(duals)) = (&a.dual_output, &ex.duals) {
        write_dual_mesh(duals, &ds, path).map_err(runtime_failure)?;
    }
    if a.stats {
        for (k, v) in ex.stats.key_values() {
            eprintln!("{k}={v}");
        }
    }
    Ok(())
}

fn run_synth(cmd: SynthCommand) -> Result<(), Failure> {
    let (ds, output) = match cmd {
        SynthCommand::Uniform { n, common } => (gen_uniform(n, &common.field), common.output),
        SynthCommand::Octree {
            depth,
            threshold,
            common,
        } => {
            if threshold.is_nan() {
                return Err(Failure::usage("threshold is NaN"));
            }
            (gen_octree(depth, &common.field, threshold), common.output)
        }
        SynthCommand::Blocks {
            blocks,
            holes,
            common,
        } => {
            let blocks: Vec<BlockSpec> = blocks.into_iter().map(|b| b.0).collect();
            let holes: Vec<IntBox> = holes.into_iter().map(|h| h.0).collect();
            (gen_blocks(&blocks, &common.field, &holes), common.output)
        }
    };
    let ds = ds.map_err(synth_failure)?;
    write_amr(&ds, &output).map_err(runtime_failure)?;
    eprintln!("wrote {} cells to {}", ds.len(), output.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Extract(a) => run_extract(a),
        Command::Dual { input, output } => {
            let (ds, _) = load(&input)?;
            let duals = extract_dual_mesh(&ds).map_err(runtime_failure)?;
            write_dual_mesh(&duals, &ds, &output).map_err(runtime_failure)
        }
        Command::Synth(cmd) => run_synth(cmd),
        Command::Validate { input } => {
            let (ds, _) = load(&input)?;
            check_valid(&ds)?;
            println!("ok: {} cells, levels {:?}", ds.len(), ds.level_set());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("amrdual: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
