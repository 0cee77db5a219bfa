//! Writes a floodlight I_AB table (L_km, I_AB, N_S) from the correlation-receiver model,
//! with N_S chosen per length to maximize the key efficiency.
//!
//!     cargo run --release --example iab_table -- [M_E] [gain] > table.csv

use twqkd::protocols::{ske_curve, CorrelationReceiver, IabModel, ProtocolConfig};

fn main() -> twqkd::Result<()> {
    let mut args = std::env::args().skip(1);
    let m_e: u32 = args.next().map_or(200, |s| s.parse().expect("M_E must be an integer"));
    let gain: f64 = args.next().map_or(1e6, |s| s.parse().expect("gain must be a number"));

    let cfg = ProtocolConfig::flqkd(gain, m_e, IabModel::Receiver(CorrelationReceiver))?;
    let lengths: Vec<f64> = (0..=20).map(|i| 5.0 * i as f64).collect();
    let rows = ske_curve(&cfg, &lengths)?;

    println!("# Shannon information of a floodlight BPSK link, correlation-receiver model:");
    println!("#   SNR = 4 M kappa^2 G N_S / (2 kappa G (1 + 2 kappa N_S) + 1), BER = erfc(sqrt(SNR/2))/2, I = 1 - h2(BER)");
    println!("# gain={gain} M_E={m_e} loss=0.2 dB/km; N_S maximizes beta*I_AB - M_E*chi_E at each length.");
    println!("# Model output, not measured data.");
    println!("L_km,I_AB_bits_per_symbol,N_S");
    for r in rows {
        println!("{},{:.12},{:.12}", r.length_km, r.i_ab, r.n_s);
    }
    Ok(())
}
