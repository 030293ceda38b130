use percs::perceptual::ViewingGeometry;
use percs::pipeline::{reconstruct, ReconstructionJob};
use percs::sensing::sense_image;
use percs::solvers::{Method, SolverConfig};
use percs::synth::natural_image;

fn main() {
    let img = natural_image(256, 256, 42);
    let geom = ViewingGeometry::new(6.0, 1024).unwrap();
    let ms = sense_image(&img, 16, 0.2, 1, geom).unwrap();
    for cap in [100usize, 200, 400] {
        let job = ReconstructionJob {
            measurements: ms.clone(),
            solver: SolverConfig {
                method: Method::Rwl1,
                max_inner_iterations: cap,
                ..SolverConfig::default()
            },
            weights: None,
        };
        let t = std::time::Instant::now();
        let recon = reconstruct(&job).unwrap();
        println!(
            "cap {cap}: failed {} wall {:.2}s psnr {:.2}",
            recon.failed_blocks,
            t.elapsed().as_secs_f64(),
            percs::metrics::psnr(&img, &recon.image).unwrap()
        );
    }
}
