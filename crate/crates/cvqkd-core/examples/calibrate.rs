//! Quick decoder-speed and code-efficiency probe used to size MC budgets.
//! Run: cargo run --release -p cvqkd-core --example calibrate

use std::sync::Arc;
use std::time::Instant;

use cvqkd_core::ldpc::{default_protograph, extend_to_rate, lift, LiftOptions};
use cvqkd_core::sim::{run_fer_point, LadderPolicy, SimConfig};

fn main() {
    let z = 1000;
    let t0 = Instant::now();
    let code = Arc::new(lift(&default_protograph(), z, 42, &LiftOptions::default()).unwrap());
    println!("lift z={z}: {:?}", t0.elapsed());

    for &rate in &[0.2f64, 0.1, 0.05, 0.02, 0.01] {
        let t0 = Instant::now();
        let view = extend_to_rate(&code, rate).unwrap();
        println!("rate {rate}: n={} total_vars={} built in {:?}", view.n(), view.total_vars(), t0.elapsed());
        // Probe FER at a few implied betas.
        for &beta in &[0.95f64, 0.90, 0.85, 0.80, 0.75, 0.70, 0.65, 0.60] {
            let s = LadderPolicy::shannon_snr(rate, beta);
            let mut cfg = SimConfig::new(991);
            cfg.target_errors = 8;
            cfg.max_frames = 60;
            cfg.max_iterations = 60;
            let t0 = Instant::now();
            let sample = run_fer_point(&view, s, &cfg).unwrap();
            println!(
                "  beta={beta:.2} s={s:.4} -> fer={:.3} ({} frames, {} errors) in {:?}",
                sample.fer, sample.frames, sample.frame_errors, t0.elapsed()
            );
            if sample.fer == 0.0 { break; }
        }
    }
}
