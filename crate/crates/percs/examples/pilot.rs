//! Scratch pilot runs (temporary).

use std::time::Instant;

use percs::perceptual::ViewingGeometry;
use percs::pipeline::{sweep, SweepPlan};
use percs::solvers::Method;
use percs::synth::natural_image;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let mode = args.get(1).map(String::as_str).unwrap_or("sweep");
    match mode {
        "sweep" => pilot_sweep(&args[2..]),
        "rwl1" => pilot_rwl1(),
        "ratio1" => pilot_ratio1(),
        "speed" => pilot_speed(),
        _ => eprintln!("unknown mode"),
    }
}

fn pilot_rwl1() {
    use nalgebra::{DMatrix, DVector};
    use percs::solvers::{solve_l1, solve_rwl1, SolverConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    let n = 64;
    let k = 8;
    let trials = 100;
    let cfg = SolverConfig::default();
    let start = Instant::now();
    for m in (16..=44).step_by(4) {
        let mut ok_l1 = 0;
        let mut ok_rw = 0;
        for trial in 0..trials {
            let mut rng = ChaCha8Rng::seed_from_u64(900_000 + trial);
            let theta = DMatrix::from_fn(m, n, |_, _| {
                rng.sample::<f64, _>(rand_distr::StandardNormal) / (m as f64).sqrt()
            });
            let mut s = DVector::zeros(n);
            let mut picked = vec![];
            while picked.len() < k {
                let idx = rng.gen_range(0..n);
                if !picked.contains(&idx) {
                    picked.push(idx);
                }
            }
            for &idx in &picked {
                let mag = rng.gen_range(0.5..1.5);
                s[idx] = if rng.gen_bool(0.5) { mag } else { -mag };
            }
            let y = &theta * &s;
            let rl1 = solve_l1(&theta, &y, &cfg).unwrap();
            let rrw = solve_rwl1(&theta, &y, &cfg).unwrap();
            if (rl1.coefficients - &s).norm() / s.norm() < 1e-4 {
                ok_l1 += 1;
            }
            if (rrw.coefficients - &s).norm() / s.norm() < 1e-4 {
                ok_rw += 1;
            }
        }
        println!("M={m}: l1 {ok_l1}/100  rwl1 {ok_rw}/100");
    }
    println!("elapsed {:.1}s", start.elapsed().as_secs_f64());
}

fn pilot_ratio1() {
    use percs::pipeline::{reconstruct, ReconstructionJob};
    use percs::sensing::sense_image;
    use percs::solvers::SolverConfig;

    let img = natural_image(256, 256, 42);
    let geom = ViewingGeometry::new(4.0, 256).unwrap();
    let start = Instant::now();
    let ms = sense_image(&img, 16, 1.0, 7, geom).unwrap();
    let job = ReconstructionJob {
        measurements: ms,
        solver: SolverConfig::default(),
        weights: None,
    };
    let recon = reconstruct(&job).unwrap();
    let psnr = percs::metrics::psnr(&img, &recon.image).unwrap();
    println!(
        "ratio=1 256x256: {:.1}s, psnr {psnr}, failed {}",
        start.elapsed().as_secs_f64(),
        recon.failed_blocks
    );
}

fn pilot_speed() {
    let img = natural_image(256, 256, 42);
    let geom = ViewingGeometry::new(6.0, 1024).unwrap();
    let plan = SweepPlan::new(
        "synth256",
        vec![0.2],
        vec![Method::L1, Method::WeightedL1, Method::Rwl1],
        vec![1],
        16,
        geom,
    );
    let start = Instant::now();
    let result = sweep(&img, &plan).unwrap();
    println!("total {:.1}s", start.elapsed().as_secs_f64());
    for row in &result.rows {
        println!(
            "{} ratio {}: {:.3} dB ssim {:.4} wall {:.2}s failed {}",
            row.method, row.ratio, row.psnr_db, row.ssim, row.wall_time_s, row.failed_blocks
        );
    }
}

fn pilot_sweep(args: &[String]) {
    let rvd: f64 = args.first().and_then(|s| s.parse().ok()).unwrap_or(4.0);
    let pic_h: u32 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(512);
    let size: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(128);
    let img = natural_image(size, size, 42);
    let geom = ViewingGeometry::new(rvd, pic_h).unwrap();
    let plan = SweepPlan::new(
        "synth",
        vec![0.1, 0.2],
        vec![Method::L1, Method::WeightedL1],
        vec![1, 2, 3],
        16,
        geom,
    );
    let start = Instant::now();
    let result = sweep(&img, &plan).unwrap();
    println!("total {:.1}s  rvd={rvd} pic_h={pic_h} size={size}", start.elapsed().as_secs_f64());
    for ratio in [0.1, 0.2] {
        let l1 = result.mean_psnr(Method::L1, ratio).unwrap();
        let w = result.mean_psnr(Method::WeightedL1, ratio).unwrap();
        let l1s = result.mean_ssim(Method::L1, ratio).unwrap();
        let ws = result.mean_ssim(Method::WeightedL1, ratio).unwrap();
        println!(
            "ratio {ratio}: l1 {l1:.3} dB / {l1s:.4}  weighted {w:.3} dB / {ws:.4}  (gain {:+.3} dB, {:+.4} ssim)",
            w - l1,
            ws - l1s
        );
    }
}
