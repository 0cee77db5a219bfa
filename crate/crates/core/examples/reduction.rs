//! Concentrating signal-reference correlations onto two reference modes with
//! phase shifts and beam splitters, then replaying the log on a covariance matrix.

use num_complex::Complex64;
use twqkd::gaussian::MomentBuilder;
use twqkd::reduction::{reduce_correlations, replay_log, CorrelationProfile};

fn main() -> twqkd::Result<()> {
    let c = Complex64::new;
    let profile = CorrelationProfile::new(
        vec![c(0.02, 0.01), c(0.0, -0.03), c(0.015, 0.0), c(0.0, 0.0)],
        vec![c(0.12, 0.05), c(-0.04, 0.09), c(0.0, 0.0), c(0.03, -0.02)],
    )?;
    let (reduced, log) = reduce_correlations(&profile);
    for op in &log.ops {
        println!("{op:?}");
    }
    println!("phase-insensitive {:?}", reduced.phase_insensitive);
    println!("phase-sensitive   {:?}", reduced.phase_sensitive);
    println!("sums before {:?}, after {:?}", profile.correlation_sums(), reduced.correlation_sums());

    let mut b = MomentBuilder::new(5).mode(0, 1.0, c(0.0, 0.0));
    for k in 0..4 {
        b = b.mode(k + 1, 0.3, c(0.0, 0.0)).cross(0, k + 1, profile.phase_sensitive[k], profile.phase_insensitive[k]);
    }
    let out = replay_log(&b.build(), &log)?;
    println!("replayed: {:?}", CorrelationProfile::from_covariance(&out)?.phase_insensitive);
    Ok(())
}
