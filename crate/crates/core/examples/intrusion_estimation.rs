//! Heterodyne records from a beam-splitter attack, a JSON-lines round trip,
//! and the intrusion-parameter estimates.

use twqkd::attacks::AttackParameters;
use twqkd::estimation::{estimate_intrusion, read_jsonl, simulate_attack_records, write_jsonl, AttackModel, SpdcTap};
use twqkd::gaussian::SourceSpec;

fn main() -> twqkd::Result<()> {
    let src = SourceSpec::new(0.1)?;
    let attack = AttackModel::Parameters(AttackParameters::beam_splitter(&src, 0.5, 0.45)?);
    let records = simulate_attack_records(&src, &attack, 200_000, 42)?;

    let mut buf = Vec::new();
    write_jsonl(&records, &mut buf)?;
    println!("{}", std::str::from_utf8(&buf[..buf.iter().position(|&b| b == b'\n').unwrap()]).unwrap());
    let back = read_jsonl(&buf[..])?;
    assert_eq!(back, records);

    let e = estimate_intrusion(&back, &src, SpdcTap::full())?;
    println!("n = {}", e.n_samples);
    println!("kappa_S_bar   = {:.5} +- {:.5}  (truth 0.5)", e.kappa_s_bar, e.std_errors.kappa_s);
    println!("kappa_f_lower = {:.5} +- {:.5}  (truth 0.45)", e.kappa_f_lower, e.std_errors.kappa_f);
    Ok(())
}
