use critlab_core::catalog::parse_metric_key;
use critlab_core::curvature::scalar_invariants;
use rayon::prelude::*;
use std::time::Instant;

fn main() {
    let rec = parse_metric_key("product_s2s2:a=1,b=1").unwrap();
    let patch = rec.primary();
    let pts: Vec<[f64; 4]> = (0..8000)
        .map(|i| {
            let t = 0.3 + 2.5 * (i as f64 / 8000.0);
            [t, 1.0 + 0.1 * t, 2.8 - 0.5 * t, 3.0]
        })
        .collect();
    let t0 = Instant::now();
    let s: f64 = pts.iter().map(|x| scalar_invariants(patch, x).unwrap().scal).sum();
    let dt = t0.elapsed().as_secs_f64();
    println!("serial: {:.1} us/node (sum {s:.3})", dt / 8000.0 * 1e6);
    let t0 = Instant::now();
    let s: f64 = pts.par_iter().map(|x| scalar_invariants(patch, x).unwrap().scal).sum();
    let dt = t0.elapsed().as_secs_f64();
    println!("parallel: {:.1} us/node wall (sum {s:.3})", dt / 8000.0 * 1e6);
    println!("threads: {}", rayon::current_num_threads());
}
