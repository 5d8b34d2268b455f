use std::fmt;
use std::path::Path;

use sha2::{Digest, Sha256};
use spherelut::diffusion::{self, polar_disc, run_demo, top_row_support};
use spherelut::verify::{check_lut_file, run_suites, VerifyOptions};
use spherelut::{
    argmax_labels, build_lut, fuse as fuse_scores, pnm, FusionInput, KernelSize, KernelSpec,
    ProjectionConfig, SamplingLut, UnitVec,
};

use crate::{DemoArgs, FuseArgs, GenLutArgs, ResampleArgs, VerifyArgs};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable or malformed files.
    Usage(String),
    /// One or more checks exceeded their tolerance.
    VerificationFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => 2,
            Self::VerificationFailed(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(m) => f.write_str(m),
            Self::VerificationFailed(n) => write!(f, "{n} check(s) failed"),
        }
    }
}

impl From<spherelut::Error> for CliError {
    fn from(e: spherelut::Error) -> Self {
        Self::Usage(e.to_string())
    }
}

type CliResult = Result<(), CliError>;

fn projection(width: usize, height: Option<usize>) -> Result<ProjectionConfig, CliError> {
    Ok(ProjectionConfig::new(width, height.unwrap_or(width / 2))?)
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, bytes: &[u8]) -> CliResult {
    std::fs::write(path, bytes).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn load_tensor(path: &Path) -> Result<spherelut::Tensor, CliError> {
    pnm::load_tensor(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn gen_lut(args: &GenLutArgs) -> CliResult {
    let cfg = projection(args.width, args.height)?;
    let spec = KernelSpec::new(args.kernel, args.spacing_mode.into())?;
    let lut = build_lut(&cfg, &spec)?;
    let bytes = lut.to_bytes();
    write(&args.out, &bytes)?;
    println!(
        "{}: {}x{} k={} stride={} grid={}x{} taps={} spacing={} bytes={} sha256={}",
        args.out.display(),
        cfg.width(),
        cfg.height(),
        spec.k(),
        spec.input_stride(),
        lut.out_h(),
        lut.out_w(),
        lut.coords().len(),
        spec.spacing,
        bytes.len(),
        hex::encode(Sha256::digest(&bytes)),
    );
    Ok(())
}

pub fn resample(args: &ResampleArgs) -> CliResult {
    let lut = SamplingLut::from_bytes(&read(&args.lut)?)
        .map_err(|e| CliError::Usage(format!("{}: {e}", args.lut.display())))?;
    let img = load_tensor(&args.input)?;
    let out = spherelut::resample(&img, &lut)?;
    pnm::save_tensor(&args.out, &out)?;
    println!(
        "{}: {}x{}x{} -> {}x{}x{} (k={})",
        args.out.display(),
        img.channels(),
        img.height(),
        img.width(),
        out.channels(),
        out.height(),
        out.width(),
        lut.k()
    );
    Ok(())
}

pub fn verify(args: &VerifyArgs) -> CliResult {
    let cfg = projection(args.width, args.height)?;
    let kernels = match args.kernel {
        Some(k) => vec![KernelSize::from_k(k)?],
        None => vec![KernelSize::Two, KernelSize::Four, KernelSize::Seven],
    };
    let lut_bytes = args.lut.as_deref().map(read).transpose()?;

    let mut results = run_suites(&VerifyOptions {
        cfg,
        kernels,
        spacing: args.spacing_mode.into(),
        seed: args.seed,
        trials: args.trials,
    });
    if let Some(bytes) = lut_bytes {
        results.push(check_lut_file(&bytes));
    }

    for r in &results {
        println!("{r}");
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    if failed > 0 {
        return Err(CliError::VerificationFailed(failed));
    }
    Ok(())
}

pub fn fuse(args: &FuseArgs) -> CliResult {
    let sem = load_tensor(&args.input)?;
    let masks = load_tensor(&args.masks)?;
    let fused = fuse_scores(&FusionInput::new(sem, masks)?);
    pnm::save_tensor(&args.out, &fused)?;
    println!(
        "{}: fused {}x{}x{}",
        args.out.display(),
        fused.channels(),
        fused.height(),
        fused.width()
    );
    if let Some(path) = &args.labels {
        let labels = argmax_labels(&fused)?;
        write(path, &labels.to_pgm()?)?;
        println!("{}: label map", path.display());
    }
    Ok(())
}

/// Cap used when no input is given: centered 0.2 rad from the north pole
/// with radius 0.15 rad, so it never touches the top row of the input.
pub const DEMO_CAP_COLATITUDE: f64 = 0.2;
pub const DEMO_CAP_RADIUS: f64 = 0.15;

pub fn diffusion_demo(args: &DemoArgs) -> CliResult {
    let img = match &args.input {
        Some(path) => load_tensor(path)?,
        None => {
            let cfg = projection(args.width, args.height)?;
            let center = UnitVec::from_angles(DEMO_CAP_COLATITUDE, std::f64::consts::PI);
            polar_disc(&cfg, &center, DEMO_CAP_RADIUS)
        }
    };
    let stages = run_demo(&img, args.seed, args.spacing_mode.into())?;
    std::fs::create_dir_all(&args.out)
        .map_err(|e| CliError::Usage(format!("{}: {e}", args.out.display())))?;

    println!(
        "input {}x{} top-row support {:.4}",
        img.height(),
        img.width(),
        top_row_support(&img, 0)
    );
    for (s, t) in stages.iter().enumerate() {
        let path = args.out.join(format!("stage{}.pgm", s + 1));
        let gray = diffusion::normalized_gray(t, 0);
        write(&path, &pnm::encode_gray_u8(t.width(), t.height(), &gray)?)?;
        println!(
            "stage {} {}x{} top-row support {:.4} -> {}",
            s + 1,
            t.height(),
            t.width(),
            top_row_support(t, 0),
            path.display()
        );
    }
    Ok(())
}
