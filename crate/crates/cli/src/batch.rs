//! Directory batch processing over a bounded worker pool.
//!
//! Workers pull file indices from a shared cursor and drop finished
//! rows into their own slot, so the emitted report is ordered by
//! filename no matter how the scheduler interleaves them. Images are
//! processed independently; nothing about the output depends on the
//! worker count except the wall-clock timings inside the rows.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use dustclear_core::pipeline::{enhance_with_intermediates, PipelineConfig};
use thiserror::Error;

use crate::io::{read_image, supported_extension, write_image};
use crate::report::{batch_report, failed_row, row_from_report, BatchReport, ReportRow};

#[derive(Debug, Error)]
pub enum BatchError {
    #[error("no input images in {0} (looked for *.ppm)")]
    NoInputImages(PathBuf),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid configuration: {0}")]
    Config(#[from] dustclear_core::CoreError),
}

#[derive(Debug, Clone, Default)]
pub struct BatchOptions {
    pub cfg: PipelineConfig,
    /// Worker thread count; 0 means one per available core.
    pub jobs: usize,
    /// Report destination; defaults to `<output_dir>/report.json`.
    pub report_path: Option<PathBuf>,
    /// When set, per-stage snapshots land here as `<stem>.<stage>.ppm`.
    pub intermediates_dir: Option<PathBuf>,
}

#[derive(Debug)]
pub struct BatchOutcome {
    pub report: BatchReport,
    pub report_path: PathBuf,
    /// Rows that failed to process at all (unreadable or unwritable
    /// images). Rows with undefined metrics are not failures.
    pub failures: usize,
}

pub fn run_batch(
    input_dir: &Path,
    output_dir: &Path,
    opts: &BatchOptions,
) -> Result<BatchOutcome, BatchError> {
    opts.cfg.validate()?;
    let mut files: Vec<PathBuf> = fs::read_dir(input_dir)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && supported_extension(p))
        .collect();
    files.sort_by_key(|p| p.file_name().map(|n| n.to_os_string()));
    if files.is_empty() {
        return Err(BatchError::NoInputImages(input_dir.to_path_buf()));
    }
    fs::create_dir_all(output_dir)?;
    if let Some(dir) = &opts.intermediates_dir {
        fs::create_dir_all(dir)?;
    }

    let mut cfg = opts.cfg.clone();
    cfg.emit_intermediates = opts.intermediates_dir.is_some();

    let workers = effective_jobs(opts.jobs).min(files.len());
    let cursor = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<ReportRow>>> = Mutex::new(vec![None; files.len()]);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = cursor.fetch_add(1, Ordering::Relaxed);
                let Some(path) = files.get(i) else { break };
                let row = process_one(path, output_dir, &cfg, opts.intermediates_dir.as_deref());
                slots
                    .lock()
                    .expect("no worker panics while holding the lock")[i] = Some(row);
            });
        }
    });

    let rows: Vec<ReportRow> = slots
        .into_inner()
        .expect("workers have exited")
        .into_iter()
        .map(|slot| slot.expect("every index was claimed by some worker"))
        .collect();
    let failures = rows.iter().filter(|r| r.timings_ms.is_none()).count();
    let report = batch_report(rows);
    let report_path = opts
        .report_path
        .clone()
        .unwrap_or_else(|| output_dir.join("report.json"));
    crate::report::write_report(&report_path, &report)?;
    Ok(BatchOutcome {
        report,
        report_path,
        failures,
    })
}

fn effective_jobs(requested: usize) -> usize {
    if requested > 0 {
        requested
    } else {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    }
}

fn process_one(
    path: &Path,
    output_dir: &Path,
    cfg: &PipelineConfig,
    intermediates_dir: Option<&Path>,
) -> ReportRow {
    let name = path
        .file_name()
        .unwrap_or(path.as_os_str())
        .to_string_lossy()
        .into_owned();
    match try_process(path, output_dir, cfg, intermediates_dir) {
        Ok(report) => row_from_report(name, &report),
        Err(message) => failed_row(name, message),
    }
}

fn try_process(
    path: &Path,
    output_dir: &Path,
    cfg: &PipelineConfig,
    intermediates_dir: Option<&Path>,
) -> Result<dustclear_core::iqa::QualityReport, String> {
    let img = read_image(path).map_err(|e| format!("read {}: {e}", path.display()))?;
    let (out, report, snapshots) = enhance_with_intermediates(&img, cfg);
    let file_name = path
        .file_name()
        .expect("directory listing yields file names");
    let out_path = output_dir.join(file_name);
    write_image(&out_path, &out).map_err(|e| format!("write {}: {e}", out_path.display()))?;
    if let Some(dir) = intermediates_dir {
        let stem = path
            .file_stem()
            .expect("file names have stems")
            .to_string_lossy();
        for (label, snap) in &snapshots {
            let snap_path = dir.join(format!("{stem}.{label}.ppm"));
            write_image(&snap_path, snap)
                .map_err(|e| format!("write {}: {e}", snap_path.display()))?;
        }
    }
    Ok(report)
}
