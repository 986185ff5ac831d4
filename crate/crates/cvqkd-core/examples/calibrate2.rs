//! Extension-degree comparison probe.
use std::sync::Arc;
use std::time::Instant;
use cvqkd_core::ldpc::{default_protograph, extend_to_rate, lift, LiftOptions};
use cvqkd_core::sim::{run_fer_point, LadderPolicy, SimConfig};

fn main() {
    for ext_degree in [2usize] {
        println!("=== ext_degree {ext_degree} ===");
        let opts = LiftOptions { ext_degree, max_extension: None };
        let code = Arc::new(lift(&default_protograph(), 1000, 42, &opts).unwrap());
        for &rate in &[0.1f64, 0.05, 0.01] {
            let view = extend_to_rate(&code, rate).unwrap();
            println!("rate {rate} (n={}):", view.n());
            for &beta in &[0.90f64, 0.85, 0.80, 0.75, 0.70, 0.65, 0.60, 0.55] {
                let s = LadderPolicy::shannon_snr(rate, beta);
                let mut cfg = SimConfig::new(991);
                cfg.target_errors = 6;
                cfg.max_frames = 40;
                cfg.max_iterations = 150;
                let t0 = Instant::now();
                let sm = run_fer_point(&view, s, &cfg).unwrap();
                println!("  beta={beta:.2} s={s:.4} -> fer={:.3} ({}/{} frames) {:?}",
                    sm.fer, sm.frame_errors, sm.frames, t0.elapsed());
                if sm.fer < 0.05 { break; }
            }
        }
    }
}
