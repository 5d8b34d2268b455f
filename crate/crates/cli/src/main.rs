//! `spherelut`: build, apply and check spherical sampling LUTs.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or format error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

#[derive(Parser, Debug)]
#[command(name = "spherelut", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a sampling LUT and write it as an SLUT file.
    GenLut(GenLutArgs),
    /// Apply a LUT to an image (PGM/PPM or TEN1).
    Resample(ResampleArgs),
    /// Run the built-in equivalence, round-trip and equivariance checks.
    Verify(VerifyArgs),
    /// Fuse coarse scores with per-channel attention masks.
    Fuse(FuseArgs),
    /// Cascade spherical downsampling and dump each stage as PGM.
    DiffusionDemo(DemoArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SpacingArg {
    Uniform,
    AzimuthMatched,
}

impl From<SpacingArg> for spherelut::SpacingMode {
    fn from(s: SpacingArg) -> Self {
        match s {
            SpacingArg::Uniform => Self::Uniform,
            SpacingArg::AzimuthMatched => Self::AzimuthMatched,
        }
    }
}

#[derive(Args, Debug)]
pub struct GenLutArgs {
    #[arg(long)]
    pub width: usize,
    /// Defaults to half the width.
    #[arg(long)]
    pub height: Option<usize>,
    #[arg(long)]
    pub kernel: usize,
    #[arg(long, value_enum, default_value = "azimuth-matched")]
    pub spacing_mode: SpacingArg,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ResampleArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub lut: PathBuf,
    /// `.pgm`/`.ppm` writes an image, anything else TEN1.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 64)]
    pub width: usize,
    #[arg(long)]
    pub height: Option<usize>,
    /// Check a single kernel size; all of 2, 4 and 7 by default.
    #[arg(long)]
    pub kernel: Option<usize>,
    #[arg(long, value_enum, default_value = "azimuth-matched")]
    pub spacing_mode: SpacingArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random image/weight pairs per kernel for the oracle comparison.
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    /// Also compare this SLUT file bit-for-bit against a fresh build.
    #[arg(long)]
    pub lut: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FuseArgs {
    /// Coarse per-channel scores (TEN1 or PGM/PPM).
    #[arg(long)]
    pub input: PathBuf,
    /// Per-channel attention masks with the same dimensions.
    #[arg(long)]
    pub masks: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Optional PGM label map (argmax of the fused scores).
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DemoArgs {
    /// Input panorama; a synthetic polar cap is used when omitted.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 512)]
    pub width: usize,
    #[arg(long)]
    pub height: Option<usize>,
    #[arg(long, value_enum, default_value = "azimuth-matched")]
    pub spacing_mode: SpacingArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory for stage1.pgm .. stage4.pgm.
    #[arg(long)]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenLut(a) => commands::gen_lut(&a),
        Command::Resample(a) => commands::resample(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::Fuse(a) => commands::fuse(&a),
        Command::DiffusionDemo(a) => commands::diffusion_demo(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
