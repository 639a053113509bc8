//! Binary entry point: argument parsing, dispatch, and exit codes.
//!
//! Exit codes: 0 on success, 1 for fatal configuration or I/O errors
//! (including usage errors), 2 when a batch run finished but some rows
//! failed.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dustclear::batch::{run_batch, BatchError, BatchOptions};
use dustclear::io::{read_image, write_image, IoError};
use dustclear::opts::{parse_airlight, parse_tiles, Airlight, Tiles};
use dustclear::report::{batch_report, row_from_report, write_report, ReportRow};
use dustclear_core::contrast::ClaheParams;
use dustclear_core::dehaze::DehazeParams;
use dustclear_core::iqa::{assess, StageTimings};
use dustclear_core::pipeline::{
    enhance_with_intermediates, synth_degrade, DegradationParams, PipelineConfig,
};

#[derive(Parser)]
#[command(
    name = "dustclear",
    version,
    about = "Restores sand-dust-degraded images: chroma-cast correction, dehazing, adaptive contrast"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Restore a single image
    Enhance {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// Write a quality report here (.csv for CSV, otherwise JSON)
        #[arg(long, value_name = "FILE")]
        report: Option<PathBuf>,
        /// Write per-stage snapshots into this directory
        #[arg(long, value_name = "DIR")]
        emit_intermediates: Option<PathBuf>,
    },
    /// Restore every image in a directory using a worker pool
    Batch {
        input_dir: PathBuf,
        output_dir: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// Report path (.csv for CSV, otherwise JSON);
        /// defaults to <OUTPUT_DIR>/report.json
        #[arg(long, value_name = "FILE")]
        report: Option<PathBuf>,
        /// Write per-stage snapshots into this directory
        #[arg(long, value_name = "DIR")]
        emit_intermediates: Option<PathBuf>,
        /// Worker threads; 0 picks one per available core
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Score a restored image against its original without processing
    Assess {
        original: PathBuf,
        restored: PathBuf,
        /// Write the report here (.csv for CSV, otherwise JSON)
        #[arg(long, value_name = "FILE")]
        report: Option<PathBuf>,
    },
    /// Synthesize a dust-degraded image from a clean one
    Degrade {
        input: PathBuf,
        output: PathBuf,
        /// Scalar transmission in [0, 1]; lower means heavier dust
        #[arg(long)]
        t: f32,
        /// Airlight color as R,G,B with channels in (0, 1]
        #[arg(long, value_parser = parse_airlight)]
        airlight: Airlight,
        /// Flat offset added to the U chroma plane
        #[arg(long, default_value_t = 0.0)]
        u_shift: f32,
        /// Flat offset added to the V chroma plane
        #[arg(long, default_value_t = 0.0)]
        v_shift: f32,
        /// Reserved for optional noise; output is deterministic per seed
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Dump per-channel 256-bin histograms as CSV
    Histogram {
        input: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct PipelineArgs {
    /// Skip the chroma-cast correction stage
    #[arg(long)]
    skip_cast: bool,
    /// Skip the dehazing stage
    #[arg(long)]
    skip_dehaze: bool,
    /// Skip the contrast-enhancement stage
    #[arg(long)]
    skip_clahe: bool,
    /// Dark-channel window edge in pixels (odd)
    #[arg(long, default_value_t = 15)]
    patch: usize,
    /// Fraction of haze to remove, in [0, 1]
    #[arg(long, default_value_t = 0.95)]
    omega: f32,
    /// Transmission lower bound, in (0, 1]
    #[arg(long, default_value_t = 0.1)]
    t_floor: f32,
    /// Guided-filter window radius in pixels
    #[arg(long, default_value_t = 60)]
    gf_radius: usize,
    /// Guided-filter regularization
    #[arg(long, default_value_t = 1e-3)]
    gf_eps: f32,
    /// Contrast tile grid as COLSxROWS
    #[arg(long, value_parser = parse_tiles, default_value = "8x8")]
    tiles: Tiles,
    /// Contrast clip limit (>= 1); "inf" disables clipping
    #[arg(long, default_value_t = 2.0)]
    clip: f64,
}

impl PipelineArgs {
    fn to_config(&self, emit_intermediates: bool) -> PipelineConfig {
        PipelineConfig {
            dehaze: DehazeParams {
                patch: self.patch,
                omega: self.omega,
                t_floor: self.t_floor,
                gf_radius: self.gf_radius,
                gf_eps: self.gf_eps,
            },
            clahe: ClaheParams {
                tiles_x: self.tiles.x,
                tiles_y: self.tiles.y,
                clip_limit: self.clip,
                bins: 256,
            },
            skip_cast: self.skip_cast,
            skip_dehaze: self.skip_dehaze,
            skip_clahe: self.skip_clahe,
            emit_intermediates,
        }
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Image(#[from] IoError),
    #[error(transparent)]
    Batch(#[from] BatchError),
    #[error("invalid configuration: {0}")]
    Config(#[from] dustclear_core::CoreError),
    #[error("i/o failure: {0}")]
    File(#[from] std::io::Error),
    #[error("{0}")]
    Message(String),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // help and version requests are successes, usage errors are not
            let code = u8::from(err.use_stderr());
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Enhance {
            input,
            output,
            pipeline,
            report,
            emit_intermediates,
        } => {
            let cfg = pipeline.to_config(emit_intermediates.is_some());
            cfg.validate()?;
            let img = read_image(&input)?;
            let (out, quality, snapshots) = enhance_with_intermediates(&img, &cfg);
            write_image(&output, &out)?;
            if let Some(dir) = emit_intermediates {
                fs::create_dir_all(&dir)?;
                let stem = output
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "stage".to_string());
                for (label, snap) in &snapshots {
                    write_image(&dir.join(format!("{stem}.{label}.ppm")), snap)?;
                }
            }
            let row = row_from_report(display_name(&input), &quality);
            if let Some(path) = report {
                write_report(&path, &batch_report(vec![row.clone()]))?;
            }
            println!(
                "{} -> {}: {}",
                input.display(),
                output.display(),
                summary(&row)
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Batch {
            input_dir,
            output_dir,
            pipeline,
            report,
            emit_intermediates,
            jobs,
        } => {
            let opts = BatchOptions {
                cfg: pipeline.to_config(false),
                jobs,
                report_path: report,
                intermediates_dir: emit_intermediates,
            };
            let outcome = run_batch(&input_dir, &output_dir, &opts)?;
            println!(
                "processed {} images ({} failed); report at {}",
                outcome.report.images.len(),
                outcome.failures,
                outcome.report_path.display()
            );
            Ok(if outcome.failures > 0 {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Assess {
            original,
            restored,
            report,
        } => {
            let orig = read_image(&original)?;
            let rest = read_image(&restored)?;
            if (orig.width(), orig.height()) != (rest.width(), rest.height()) {
                return Err(CliError::Message(format!(
                    "image sizes differ: {}x{} vs {}x{}",
                    orig.width(),
                    orig.height(),
                    rest.width(),
                    rest.height()
                )));
            }
            let quality = assess(
                &orig.to_planes(),
                &rest.to_planes(),
                StageTimings::default(),
            );
            let row = row_from_report(display_name(&restored), &quality);
            if let Some(path) = report {
                write_report(&path, &batch_report(vec![row.clone()]))?;
            }
            println!("{}", summary(&row));
            Ok(ExitCode::SUCCESS)
        }
        Command::Degrade {
            input,
            output,
            t,
            airlight,
            u_shift,
            v_shift,
            seed,
        } => {
            let params = DegradationParams {
                t,
                airlight: airlight.0,
                u_shift,
                v_shift,
            };
            params.validate()?;
            let img = read_image(&input)?;
            write_image(&output, &synth_degrade(&img, &params, seed))?;
            println!("degraded {} -> {}", input.display(), output.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Histogram { input, out } => {
            let img = read_image(&input)?;
            let mut hist = [[0u64; 256]; 3];
            for px in img.data().chunks_exact(3) {
                for (channel, v) in px.iter().enumerate() {
                    hist[channel][*v as usize] += 1;
                }
            }
            let mut csv = String::from("bin,r,g,b\n");
            for (bin, ((r, g), b)) in hist[0].iter().zip(&hist[1]).zip(&hist[2]).enumerate() {
                csv.push_str(&format!("{bin},{r},{g},{b}\n"));
            }
            fs::write(&out, csv)?;
            println!("wrote {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn display_name(path: &Path) -> String {
    path.file_name()
        .unwrap_or(path.as_os_str())
        .to_string_lossy()
        .into_owned()
}

fn summary(row: &ReportRow) -> String {
    let opt = |v: Option<f64>| v.map(|v| format!("{v:.4}")).unwrap_or_else(|| "n/a".into());
    format!(
        "e={} r_bar={} sigma={} (n_o={} n_r={} n_s={}, total {} ms)",
        opt(row.e),
        opt(row.r_bar),
        opt(row.sigma),
        row.n_o.unwrap_or(0),
        row.n_r.unwrap_or(0),
        row.n_s.unwrap_or(0),
        opt(row.timings_ms.map(|t| t.total)),
    )
}
