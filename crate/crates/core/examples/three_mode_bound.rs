//! The permutation-invariant three-mode bound chi'_E reduces to the two-mode chi_E.

use twqkd::bounds::{chi_e, chi_e_prime};
use twqkd::channels::{ChannelModel, EncodingSpec};
use twqkd::gaussian::SourceSpec;

fn main() -> twqkd::Result<()> {
    let enc = EncodingSpec::new(0.0, 1)?;
    for (ch, n, ks, kf) in [
        (ChannelModel::amplifier(1.5)?, 0.1, 0.6, 0.5),
        (ChannelModel::loss(0.2)?, 0.5, 0.9, 0.4),
        (ChannelModel::contra_amplifier(2.0)?, 0.05, 1.1, 0.8),
    ] {
        let src = SourceSpec::new(n)?;
        let three = chi_e_prime(&src, &enc, ks, kf, &ch)?;
        let two = chi_e(&src, &enc, ks, kf, &ch)?;
        println!(
            "{:?} N_S={n} kS={ks} K_f={kf}: chi'={:.12} chi={two:.12} |b1|^2/(K_f C_S^2)={:.1e}",
            ch.kind(),
            three.chi,
            three.argmax.b1.powi(2) / (kf * src.c_s().powi(2))
        );
    }
    Ok(())
}
