//! Minimum entropy gain E* and the Holevo bound chi_E for the three Bob channels,
//! checked against the beam-splitter attack.

use twqkd::attacks::{optimal_attack_point, red_line};
use twqkd::bounds::{chi_e_with, entropy_gain, SearchOptions};
use twqkd::channels::{ChannelModel, EncodingSpec};
use twqkd::gaussian::SourceSpec;

fn main() -> twqkd::Result<()> {
    let src = SourceSpec::new(0.1)?;
    let enc = EncodingSpec::new(0.0, 1)?;
    let opts = SearchOptions::default();
    let channels = [
        ("amplifier G=1.5", ChannelModel::amplifier(1.5)?),
        ("loss eta=0.2", ChannelModel::loss(0.2)?),
        ("contra-amplifier G=1.5", ChannelModel::contra_amplifier(1.5)?),
    ];
    println!("{:<24} {:>7} {:>7} {:>14} {:>14} {:>10} {:>8} {:>8}", "channel", "kS", "kf", "E*", "E(bs)", "chi_E", "zeta", "delta");
    for (name, ch) in &channels {
        for (ks, frac) in [(0.3, 0.5), (0.7, 0.9), (1.0, 0.99)] {
            let kf = frac * red_line(ks, &src).min(ks);
            let r = chi_e_with(&src, &enc, ks, kf, ch, &opts)?;
            let bs = optimal_attack_point(&src, ks, kf, ch)?;
            let closed = entropy_gain(&bs.lambda_sw, ch)?.e;
            let m = r.minimization;
            println!(
                "{name:<24} {ks:>7.3} {kf:>7.4} {:>14.10} {closed:>14.10} {:>10.6} {:>8.5} {:>8.5}",
                m.e_star,
                r.chi,
                m.argmin.zeta(),
                m.argmin.delta()
            );
        }
    }
    Ok(())
}
