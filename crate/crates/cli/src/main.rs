use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use skelfmm::bench::{run_benchmark, BenchConfig, Distribution};
use skelfmm::KernelFamily;

/// Run one fast-summation benchmark and report timings, ranks and accuracy.
#[derive(Parser, Debug)]
#[command(name = "skelfmm", version)]
struct Args {
    /// laplace2d, laplace3d, helmholtz2d or helmholtz3d
    #[arg(long, default_value = "laplace2d")]
    kernel: KernelFamily,
    /// Wavenumber (Helmholtz only)
    #[arg(long)]
    kappa: Option<f64>,
    /// Number of points
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    /// square, cube, annulus or sphere (defaults to square in 2D, cube in 3D)
    #[arg(long)]
    dist: Option<Distribution>,
    /// Compression tolerance
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Leaf size (defaults to 100, 320 or 200 depending on the distribution)
    #[arg(long)]
    leaf: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of targets checked against direct summation (0 disables)
    #[arg(long, default_value_t = 1000)]
    check: usize,
    /// Proxy nodes per edge (2D) or per face direction (3D)
    #[arg(long)]
    proxy: Option<usize>,
    /// CSV file of coordinates, replacing the generated points
    #[arg(long)]
    points: Option<PathBuf>,
    /// Write the JSON report here
    #[arg(long)]
    out: Option<PathBuf>,
    /// Timed applies; the fastest is reported
    #[arg(long, default_value_t = 1)]
    repeats: usize,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let dist = args.dist.unwrap_or(if args.kernel.dim() == 2 {
        Distribution::Square
    } else {
        Distribution::Cube
    });
    let mut cfg = BenchConfig::new(args.kernel, dist, args.n, args.tol);
    cfg.kappa = args.kappa;
    if let Some(b) = args.leaf {
        cfg.leaf_size = b;
    }
    cfg.seed = args.seed;
    cfg.n_check = args.check;
    cfg.proxy = args.proxy;
    cfg.points_file = args.points;
    cfg.out = args.out;
    cfg.repeats = args.repeats;

    match run_benchmark(&cfg) {
        Ok(report) => {
            println!("{}", report.summary());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
