use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use rqrcp_cli::experiment::{self, Algorithm, ExperimentSpec};
use rqrcp_cli::io;
use rqrcp_cli::synth::{parse_seed, SynthSpec};
use rqrcp_core::{DenseMatrix, SketchConfig};

#[derive(Parser)]
#[command(
    name = "rqrcp",
    version,
    about = "Randomized QRCP quality and communication experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Factor one matrix and report error and counters.
    Factor(RunArgs),
    /// Error-vs-rank curves over the grid {b, 2b, …} up to --rank.
    Quality(RunArgs),
    /// Communication counters at --rank.
    Counters(RunArgs),
    /// Table of the latent-scaling CDF.
    Cdf(CdfArgs),
    /// Rank-k reconstructions of a grayscale PGM image.
    Image(ImageArgs),
    /// Write a synthetic matrix in Matrix Market format.
    Synth(SynthArgs),
}

#[derive(Args, Clone)]
struct Source {
    /// Matrix Market (.mtx) or PGM (.pgm) file.
    #[arg(long, conflicts_with = "synth", required_unless_present = "synth")]
    matrix: Option<PathBuf>,
    /// Synthetic descriptor, e.g. decay:128x128,ratio=0.8 or kahan:96,c=0.285.
    #[arg(long)]
    synth: Option<SynthSpec>,
    /// Seed of the synthetic matrix.
    #[arg(long, default_value = "0", value_parser = parse_seed)]
    matrix_seed: u64,
}

impl Source {
    fn load(&self) -> Result<DenseMatrix> {
        match (&self.matrix, &self.synth) {
            (Some(path), _) => load_file(path),
            (None, Some(spec)) => spec.build(self.matrix_seed),
            (None, None) => bail!("either --matrix or --synth is required"),
        }
    }

    fn describe(&self) -> String {
        match (&self.matrix, &self.synth) {
            (Some(path), _) => path.display().to_string(),
            (None, Some(spec)) => format!("{spec} seed={}", self.matrix_seed),
            (None, None) => String::new(),
        }
    }
}

fn load_file(path: &Path) -> Result<DenseMatrix> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("pgm") => io::read_pgm(path),
        _ => io::read_matrix_market(path),
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "rqrcp")]
    algo: Vec<Algorithm>,
    #[arg(long)]
    rank: usize,
    #[arg(long, default_value_t = 32)]
    block: usize,
    #[arg(long, default_value_t = 8)]
    pad: usize,
    #[arg(long, default_value = "0", value_parser = parse_seed)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    reps: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn spec(&self, algorithm: Algorithm) -> ExperimentSpec {
        ExperimentSpec {
            algorithm,
            rank: self.rank,
            block: self.block,
            pad: self.pad,
            seed: self.seed,
            reps: self.reps,
        }
    }

    fn header(&self, command: &str) -> String {
        let algos: Vec<&str> = self.algo.iter().map(|a| a.name()).collect();
        experiment::spec_header(
            command,
            &[
                ("algo", algos.join(",")),
                ("matrix", self.source.describe()),
                ("rank", self.rank.to_string()),
                ("block", self.block.to_string()),
                ("pad", self.pad.to_string()),
                ("seed", self.seed.to_string()),
                ("reps", self.reps.to_string()),
            ],
        )
    }
}

#[derive(Args)]
struct CdfArgs {
    #[arg(long = "ell", value_delimiter = ',', default_value = "4,8,16,32")]
    ells: Vec<usize>,
    #[arg(
        long = "tau",
        value_delimiter = ',',
        default_value = "0.0625,0.125,0.25,0.5,1,2"
    )]
    taus: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ImageArgs {
    /// PGM image (P2 or P5).
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long, default_value_t = 80)]
    rank: usize,
    #[arg(long, default_value_t = 32)]
    block: usize,
    #[arg(long, default_value_t = 8)]
    pad: usize,
    #[arg(long, default_value = "0", value_parser = parse_seed)]
    seed: u64,
    /// CSV report.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for the reconstructed images.
    #[arg(long)]
    save_dir: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    synth: SynthSpec,
    #[arg(long, default_value = "0", value_parser = parse_seed)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => Ok(fs::write(path, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Factor(args) => {
            let a = args.source.load()?;
            let mut text = args.header("factor");
            text.push_str("algorithm,rows,cols,rank,achieved_rank,rel_frob_error,trailing_passes,blas2_volume,blas3_volume\n");
            for &alg in &args.algo {
                let out =
                    experiment::run_once(&a, alg, args.rank, args.block, args.pad, args.seed)?;
                let err = experiment::rel_frob_error(&a, &out.approx)?;
                let c = out.counters;
                text.push_str(&format!(
                    "{},{},{},{},{},{:.9e},{},{},{}\n",
                    alg.name(),
                    a.rows(),
                    a.cols(),
                    args.rank,
                    out.achieved_rank,
                    err,
                    c.trailing_passes,
                    c.blas2_volume,
                    c.blas3_volume
                ));
            }
            emit(&args.out, &text)
        }
        Command::Quality(args) => {
            let a = args.source.load()?;
            let ranks = experiment::rank_grid(args.block, args.rank);
            let mut records = Vec::new();
            for &alg in &args.algo {
                records.extend(experiment::run_quality(&a, &args.spec(alg), &ranks)?);
            }
            emit(
                &args.out,
                &experiment::quality_csv(&args.header("quality"), &records),
            )
        }
        Command::Counters(args) => {
            let a = args.source.load()?;
            let rows = args
                .algo
                .iter()
                .map(|&alg| Ok((alg, experiment::run_counters(&a, &args.spec(alg))?)))
                .collect::<Result<Vec<_>>>()?;
            emit(
                &args.out,
                &experiment::counters_csv(&args.header("counters"), &rows),
            )
        }
        Command::Cdf(args) => {
            let ells: Vec<String> = args.ells.iter().map(ToString::to_string).collect();
            let taus: Vec<String> = args.taus.iter().map(ToString::to_string).collect();
            let header =
                experiment::spec_header("cdf", &[("ell", ells.join(",")), ("tau", taus.join(","))]);
            emit(
                &args.out,
                &experiment::emit_cdf_table(&header, &args.ells, &args.taus)?,
            )
        }
        Command::Image(args) => {
            let img = io::read_pgm(&args.matrix)?;
            let cfg = SketchConfig::new(args.block, args.pad, args.seed);
            let report = experiment::run_image(&img, args.rank, &cfg)?;
            if let Some(dir) = &args.save_dir {
                fs::create_dir_all(dir)?;
                io::write_pgm(&report.tuxv.approx, &dir.join("tuxv.pgm"), 255)?;
                io::write_pgm(&report.presorted.approx, &dir.join("presorted.pgm"), 255)?;
            }
            let mut text = experiment::spec_header(
                "image",
                &[
                    ("matrix", args.matrix.display().to_string()),
                    ("rank", args.rank.to_string()),
                    ("block", args.block.to_string()),
                    ("pad", args.pad.to_string()),
                    ("seed", args.seed.to_string()),
                ],
            );
            text.push_str("algorithm,rank,rel_frob_error\n");
            text.push_str(&format!("tuxv,{},{:.9e}\n", args.rank, report.tuxv_error));
            text.push_str(&format!(
                "presorted,{},{:.9e}\n",
                args.rank, report.presorted_error
            ));
            emit(&args.out, &text)
        }
        Command::Synth(args) => io::write_matrix_market(&args.synth.build(args.seed)?, &args.out),
    }
}
