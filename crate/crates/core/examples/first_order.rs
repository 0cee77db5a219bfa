//! Small-intrusion expansion: the entropy-gain slope in f_E = 1 - kappa_f/kappa_S
//! is steepest at the beam-splitter angles.

use twqkd::bounds::first_order_check;
use twqkd::channels::ChannelModel;
use twqkd::gaussian::SourceSpec;

fn main() -> twqkd::Result<()> {
    let src = SourceSpec::new(0.1)?;
    for ch in [ChannelModel::amplifier(1.5)?, ChannelModel::loss(0.2)?, ChannelModel::contra_amplifier(1.5)?] {
        for ks in [0.3, 0.7, 1.0] {
            let r = first_order_check(&src, ks, &ch, 33, 1e-5)?;
            println!(
                "{:?} kS={ks}: argmin (zeta, delta, xi) = ({:.4}, {:.4}, {:.4}), slope {:.6}, spread {:.1e}",
                ch.kind(),
                r.argmin.0,
                r.argmin.1,
                r.argmin.2,
                r.derivative_min,
                r.zeroth_order_spread
            );
        }
    }
    Ok(())
}
