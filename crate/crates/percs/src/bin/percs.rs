//! Command-line front end for the percs library: acquisition, reconstruction,
//! quality evaluation, experiment sweeps, and CSF weight export.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use percs::imageio::{load_image, save_image};
use percs::perceptual::{build_csf_weights, CsfWeights, ViewingGeometry, DEFAULT_R_VD};
use percs::pipeline::{reconstruct, sweep_with, ReconstructionJob, SweepPlan, SweepRow};
use percs::sensing::{sense_image, MeasurementSet};
use percs::solvers::{Method, SolverConfig};
use percs::{metrics, Error};

#[derive(Parser)]
#[command(name = "percs", about = "Block-based compressive sensing with CSF weighting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Acquire per-block Gaussian measurements of a PGM image.
    Sense {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        ratio: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 16)]
        block: usize,
        #[arg(long, default_value_t = DEFAULT_R_VD)]
        rvd: f64,
        /// Picture height in pixels for the viewing geometry
        /// (defaults to the input image height).
        #[arg(long)]
        pic_h: Option<u32>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reconstruct an image from a measurement file.
    Reconstruct {
        #[arg(long)]
        measurements: PathBuf,
        #[arg(long)]
        method: Method,
        /// Inverse-weight matrix as BxB CSV, overriding the CSF weights.
        #[arg(long)]
        weights_file: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print PSNR and SSIM of a test image against a reference.
    Evaluate {
        #[arg(long)]
        reference: PathBuf,
        #[arg(long)]
        test: PathBuf,
    },
    /// Run a ratio/method/seed grid and write a CSV of results.
    Sweep {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        ratios: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        methods: Vec<Method>,
        #[arg(long, value_delimiter = ',', required = true)]
        seeds: Vec<u64>,
        #[arg(long, default_value_t = 16)]
        block: usize,
        #[arg(long, default_value_t = DEFAULT_R_VD)]
        rvd: f64,
        #[arg(long)]
        pic_h: Option<u32>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the CSF matrix H for a block size and viewing geometry as CSV.
    Weights {
        #[arg(long, default_value_t = 16)]
        block: usize,
        #[arg(long, default_value_t = DEFAULT_R_VD)]
        rvd: f64,
        #[arg(long)]
        pic_h: u32,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}

fn geometry(rvd: f64, pic_h: u32) -> Result<ViewingGeometry, Error> {
    let geom = ViewingGeometry::new(rvd, pic_h)?;
    if !geom.within_itu_range() {
        eprintln!(
            "warning: viewing-distance ratio {rvd} is outside the ITU-R 3..6 range"
        );
    }
    Ok(geom)
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Sense {
            input,
            ratio,
            seed,
            block,
            rvd,
            pic_h,
            out,
        } => {
            let img = load_image(&input)?;
            let geom = geometry(rvd, pic_h.unwrap_or(img.height as u32))?;
            let ms = sense_image(&img, block, ratio, seed, geom)?;
            ms.save(&out)?;
            eprintln!(
                "sensed {}x{} image: {} blocks, M={} of N={} (ratio {ratio})",
                img.width,
                img.height,
                ms.tile_count(),
                ms.m,
                ms.n
            );
            Ok(())
        }
        Command::Reconstruct {
            measurements,
            method,
            weights_file,
            out,
        } => {
            let ms = MeasurementSet::load(&measurements)?;
            let weights = match (&weights_file, method) {
                (Some(path), _) => {
                    let file = File::open(path).map_err(|source| Error::Read {
                        path: path.clone(),
                        source,
                    })?;
                    Some(CsfWeights::read_csv(BufReader::new(file))?)
                }
                (None, Method::WeightedL1) => {
                    Some(build_csf_weights(ms.block_size, &ms.geometry)?)
                }
                (None, _) => None,
            };
            let job = ReconstructionJob {
                measurements: ms,
                solver: SolverConfig::with_method(method),
                weights,
            };
            let recon = reconstruct(&job)?;
            save_image(&recon.image, &out)?;
            if recon.failed_blocks > 0 {
                eprintln!(
                    "warning: {} block(s) missed the feasibility tolerance",
                    recon.failed_blocks
                );
            }
            Ok(())
        }
        Command::Evaluate { reference, test } => {
            let reference = load_image(&reference)?;
            let test = load_image(&test)?;
            let report = metrics::evaluate(&reference, &test)?;
            println!("psnr_db,{}", report.psnr_db);
            println!("ssim,{}", report.ssim);
            Ok(())
        }
        Command::Sweep {
            input,
            ratios,
            methods,
            seeds,
            block,
            rvd,
            pic_h,
            out,
        } => {
            let img = load_image(&input)?;
            let geom = geometry(rvd, pic_h.unwrap_or(img.height as u32))?;
            let image_id = input
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "image".into());
            let plan = SweepPlan::new(image_id, ratios, methods, seeds, block, geom);
            let file = File::create(&out).map_err(|source| Error::Write {
                path: out.clone(),
                source,
            })?;
            let mut writer = BufWriter::new(file);
            let io_err = |source: std::io::Error| Error::Write {
                path: out.clone(),
                source,
            };
            writeln!(writer, "{}", SweepRow::CSV_HEADER).map_err(io_err)?;
            sweep_with(&img, &plan, |row| {
                writeln!(writer, "{}", row.to_csv()).map_err(io_err)?;
                writer.flush().map_err(io_err)?;
                eprintln!("{}", row.to_csv());
                Ok(())
            })?;
            Ok(())
        }
        Command::Weights {
            block,
            rvd,
            pic_h,
            out,
        } => {
            let geom = geometry(rvd, pic_h)?;
            let weights = build_csf_weights(block, &geom)?;
            let file = File::create(&out).map_err(|source| Error::Write {
                path: out.clone(),
                source,
            })?;
            weights
                .write_csv(BufWriter::new(file))
                .map_err(|source| Error::Write {
                    path: out.clone(),
                    source,
                })?;
            Ok(())
        }
    }
}
