use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use skewdet::instance::{Instance, InstanceFile, NamedMatrix, Overrides};
use skewdet::linalg::{dieudonne_det, SkewMatrix};
use skewdet::norm::{dimension_reduce, monic_norm_check, nr_det_compat, reduced_norm_center};
use skewdet::random::Sampler;
use skewdet::selftest::{self, Level};
use skewdet::{make_algebra, make_tower, Error, SkewRing};

#[derive(Parser)]
#[command(name = "skewdet", version, about = "Dieudonné determinants and reduced norms over skew power series rings")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args)]
struct Source {
    /// Instance file (JSON)
    #[arg(long)]
    instance: PathBuf,
    /// Lower the p-adic precision N
    #[arg(long)]
    prec_p: Option<u32>,
    /// Lower the X-precision M
    #[arg(long)]
    prec_x: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Quick,
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// Dieudonné determinant normal form with the reduced-norm cross-check
    Det {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        matrix: String,
    },
    /// Reduced norm over the centre
    Norm {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        matrix: String,
    },
    /// Reduced norm of a monic series and its monicity verdict
    Monic {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        series: String,
    },
    /// Dimension reduction of an mn × mn matrix to n × n
    Reduce {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        matrix: String,
        #[arg(long)]
        block_size: usize,
    },
    /// Seeded property suites
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, default_value = "quick")]
        level: LevelArg,
    },
    /// Writes a random instance file
    Fixture {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        f_k: usize,
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long, default_value_t = 1)]
        s: usize,
        #[arg(long, default_value_t = 1)]
        r: usize,
        #[arg(long, default_value_t = 8)]
        prec_p: u32,
        #[arg(long, default_value_t = 8)]
        prec_x: usize,
        /// Matrix size
        #[arg(long, default_value_t = 2)]
        size: usize,
        /// Number of random matrices of each kind (A: plain, B: with π-content)
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Polynomial degree bound of the entries
        #[arg(long, default_value_t = 3)]
        degree: usize,
    },
}

fn load(src: &Source) -> Result<Instance, Error> {
    let text = std::fs::read_to_string(&src.instance)
        .map_err(|e| Error::Parse(format!("{}: {e}", src.instance.display())))?;
    Instance::from_json(&text, Overrides { prec_p: src.prec_p, prec_x: src.prec_x })
}

/// Writes a line to stdout; a closed pipe is not an error.
fn out(line: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{line}");
}

fn emit<T: Serialize>(v: &T) {
    out(&serde_json::to_string_pretty(v).expect("reports serialise"));
}

#[derive(Serialize)]
struct DetOutput {
    normal_form: skewdet::linalg::DetNormalFormRecord,
    compat: skewdet::norm::CompatReport,
}

#[derive(Serialize)]
struct ReduceOutput {
    #[serde(rename = "C")]
    c: skewdet::linalg::SkewMatrixRecord,
    report: skewdet::norm::DimensionReport,
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.cmd {
        Command::Det { src, matrix } => {
            let inst = load(&src)?;
            let a = inst.matrix(&matrix)?;
            let nf = dieudonne_det(a)?;
            let compat = nr_det_compat(a)?;
            let agree = compat.agree;
            emit(&DetOutput { normal_form: nf.to_record(), compat });
            if !agree {
                return Err(Error::Inconsistent("nr(A) differs from nr(det A)".into()));
            }
        }
        Command::Norm { src, matrix } => {
            let inst = load(&src)?;
            emit(&reduced_norm_center(inst.matrix(&matrix)?)?);
        }
        Command::Monic { src, series } => {
            let inst = load(&src)?;
            emit(&monic_norm_check(inst.series(&series)?)?);
        }
        Command::Reduce { src, matrix, block_size } => {
            let inst = load(&src)?;
            let (c, report) = dimension_reduce(inst.matrix(&matrix)?, block_size)?;
            emit(&ReduceOutput { c: c.to_record(), report });
        }
        Command::Selftest { seed, level } => {
            let level = match level {
                LevelArg::Quick => Level::Quick,
                LevelArg::Full => Level::Full,
            };
            let rep = selftest::run(seed, level)?;
            out(&format!("selftest seed {} level {:?}", rep.seed, rep.level));
            for s in &rep.suites {
                out(&s.to_string());
            }
            let failed: usize = rep.suites.iter().map(|s| s.failed).sum();
            out(&if failed == 0 { "all suites passed".to_string() } else { format!("{failed} failures") });
            if failed > 0 {
                return Err(Error::Inconsistent(format!("{failed} property failures")));
            }
        }
        Command::Fixture { seed, p, f_k, d, s, r, prec_p, prec_x, size, count, degree } => {
            let t = make_tower(p, f_k, d, s, prec_p)?;
            let ring = SkewRing::new(&make_algebra(&t, r)?, prec_x)?;
            let mut smp = Sampler::new(seed);
            let mut matrices = vec![NamedMatrix { name: "I".into(), matrix: SkewMatrix::identity(&ring, size).to_record() }];
            if size >= 2 {
                let mut perm = SkewMatrix::identity(&ring, size);
                perm.entries.swap(0, 1);
                matrices.push(NamedMatrix { name: "P".into(), matrix: perm.to_record() });
            }
            for i in 0..count {
                let a = smp.matrix(&ring, size, degree);
                matrices.push(NamedMatrix { name: format!("A{i}"), matrix: a.to_record() });
            }
            for i in 0..count {
                let b = smp.matrix_deep(&ring, size, degree);
                matrices.push(NamedMatrix { name: format!("B{i}"), matrix: b.to_record() });
            }
            let g = smp.distinguished(&ring, 1);
            let file = InstanceFile {
                descriptor: ring.algebra().descriptor().clone(),
                prec_x,
                matrices,
                series: vec![skewdet::instance::NamedSeries { name: "G".into(), series: g.to_record() }],
            };
            out(&file.to_json());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
