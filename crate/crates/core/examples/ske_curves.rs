//! Secret-key efficiency against length for the TMSV and floodlight protocols,
//! with the repeaterless bound for reference.

use twqkd::protocols::{ske_curve, CorrelationReceiver, IabModel, ProtocolConfig};

fn main() -> twqkd::Result<()> {
    let tmsv = ProtocolConfig::tmsv(1e4, 1e4)?;
    let lengths: Vec<f64> = (0..=16).map(|i| 0.5 * i as f64).collect();
    println!("TMSV, N_S = E_X = 1e4");
    println!("{:>6} {:>10} {:>10} {:>10}", "L_km", "I_AB", "chi_E", "SKE");
    for r in ske_curve(&tmsv, &lengths)? {
        println!("{:>6.1} {:>10.5} {:>10.5} {:>10.5}", r.length_km, r.i_ab, r.chi_e, r.ske);
    }

    let lengths: Vec<f64> = (0..=10).map(|i| 10.0 * i as f64).collect();
    for m_e in [1, 200] {
        let mut cfg = ProtocolConfig::flqkd(1e6, m_e, IabModel::Receiver(CorrelationReceiver))?;
        cfg.rate = 1e10;
        println!("\nfloodlight, G = 1e6, M_E = {m_e}");
        println!("{:>6} {:>9} {:>9} {:>11} {:>11} {:>10}", "L_km", "N_S", "I_AB", "SKE", "PLOB", "SKR");
        for r in ske_curve(&cfg, &lengths)? {
            println!(
                "{:>6.0} {:>9.5} {:>9.5} {:>11.3e} {:>11.3e} {:>10.3e}",
                r.length_km, r.n_s, r.i_ab, r.ske, r.plob, r.skr
            );
        }
    }
    Ok(())
}
