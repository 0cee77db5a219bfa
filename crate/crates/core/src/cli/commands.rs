//! One function per subcommand; each returns the files to write.

use std::f64::consts::FRAC_PI_2;
use std::io::BufReader;

use rayon::prelude::*;

use super::config::{Config, IabModelName, VariantName};
use super::output::{col, extension, render, Cell, Format, Provenance, Table};
use crate::attacks::{kappa_f_range, AttackParameters};
use crate::bounds::{chi_e_prime_with, chi_e_with, convexity_scan, first_order_check, monotonicity_scan, ScanGrid};
use crate::channels::EncodingSpec;
use crate::error::{Error, Result};
use crate::estimation::{
    estimate_intrusion_with_lags, read_jsonl, simulate_tapped_records, write_jsonl, AttackModel, SpdcTap,
};
use crate::gaussian::SourceSpec;
use crate::protocols::{ske_curve, CorrelationReceiver, IabModel, IabTable, ProtocolConfig, Variant};
use crate::reduction::{reduce_correlations, CorrelationProfile};

pub type Files = Vec<(String, String)>;

fn table_file(stem: &str, table: &Table, prov: &Provenance, format: Format) -> Result<(String, String)> {
    Ok((format!("{stem}.{}", extension(format)), render(table, prov, format)?))
}

fn feasible_nodes(src: &SourceSpec, ks: &[f64], kf: &[f64]) -> Vec<(f64, f64)> {
    ks.iter()
        .flat_map(|&a| kf.iter().map(move |&b| (a, b)))
        .filter(|&(a, b)| b <= kappa_f_range(a, src).1)
        .collect()
}

pub fn chi_e(cfg: &Config, prov: &Provenance, format: Format) -> Result<Files> {
    let (src, ch, enc, opts) = (cfg.source()?, cfg.channel()?, cfg.encoding()?, cfg.search()?);
    let (ks, kf) = cfg.grid()?;
    let nodes = feasible_nodes(&src, &ks, &kf);
    if nodes.is_empty() {
        return Err(Error::argument("no feasible (kappa_S, kappa_f) node on the grid"));
    }
    let rows = nodes
        .par_iter()
        .map(|&(a, b)| {
            let r = chi_e_with(&src, &enc, a, b, &ch, &opts)?;
            let m = r.minimization;
            Ok(vec![Cell::F(a), Cell::F(b), Cell::F(m.e_star), Cell::F(r.chi), Cell::F(m.argmin.zeta()), Cell::F(m.argmin.delta())])
        })
        .collect::<Result<Vec<_>>>()?;
    let table = Table {
        columns: vec![
            col("kappa_S", "signal transmissivity intrusion parameter"),
            col("kappa_f", "cross-correlation intrusion parameter"),
            col("E_star", "minimum entropy gain [bits]"),
            col("chi_E", "Holevo bound g(N_B)-E_star [bits/mode]"),
            col("zeta_opt", "argmin zeta [rad]"),
            col("delta_opt", "argmin delta [rad]"),
        ],
        rows,
    };
    Ok(vec![table_file("chi_e", &table, prov, format)?])
}

pub fn convexity(cfg: &Config, prov: &Provenance, format: Format) -> Result<Files> {
    let (src, ch, opts) = (cfg.source()?, cfg.channel()?, cfg.search()?);
    let (ks, kf) = cfg.grid()?;
    let sec = cfg.convexity.clone().unwrap_or(super::config::ConvexitySection { slack: 1e-9, monotonicity_slack: 1e-8 });
    let grid = ScanGrid { kappa_s: ks.clone(), kappa_f: kf.clone() };
    let report = convexity_scan(&src, &ch, &grid, &opts, sec.slack)?;
    let mono = monotonicity_scan(&src, &ch, &grid, &opts, sec.monotonicity_slack)?;
    let mut surface = Vec::new();
    for (i, &a) in ks.iter().enumerate() {
        for (j, &b) in kf.iter().enumerate() {
            if let Some(e) = report.e_star[i * kf.len() + j] {
                surface.push(vec![Cell::F(a), Cell::F(b), Cell::F(e)]);
            }
        }
    }
    let surface = Table {
        columns: vec![
            col("kappa_S", "signal transmissivity intrusion parameter"),
            col("kappa_f", "cross-correlation intrusion parameter"),
            col("E_star", "minimum entropy gain [bits]"),
        ],
        rows: surface,
    };
    let mut rows: Vec<Vec<Cell>> = report
        .violations
        .iter()
        .map(|v| {
            vec![
                Cell::S("convexity".into()),
                Cell::F(v.a.0),
                Cell::F(v.a.1),
                Cell::F(v.mid.0),
                Cell::F(v.mid.1),
                Cell::F(v.b.0),
                Cell::F(v.b.1),
                Cell::F(v.excess),
            ]
        })
        .collect();
    rows.extend(mono.iter().map(|(p, q)| {
        vec![Cell::S("monotonicity".into()), Cell::F(p.0), Cell::F(p.1), Cell::F(f64::NAN), Cell::F(f64::NAN), Cell::F(q.0), Cell::F(q.1), Cell::F(f64::NAN)]
    }));
    let violations = Table {
        columns: vec![
            col("kind", "convexity or monotonicity"),
            col("a_kappa_S", "first point"),
            col("a_kappa_f", "first point"),
            col("mid_kappa_S", "midpoint (convexity only)"),
            col("mid_kappa_f", "midpoint (convexity only)"),
            col("b_kappa_S", "last point"),
            col("b_kappa_f", "last point"),
            col("excess", "E_star(mid)-mean(E_star(a),E_star(b)) [bits]"),
        ],
        rows,
    };
    let summary = Table {
        columns: vec![
            col("triples_checked", "midpoint triples tested"),
            col("convexity_violations", "count above slack"),
            col("monotonicity_violations", "count above slack"),
            col("slack", "convexity slack [bits]"),
        ],
        rows: vec![vec![
            Cell::U(report.triples_checked as u64),
            Cell::U(report.violations.len() as u64),
            Cell::U(mono.len() as u64),
            Cell::F(sec.slack),
        ]],
    };
    Ok(vec![
        table_file("convexity_surface", &surface, prov, format)?,
        table_file("convexity_violations", &violations, prov, format)?,
        table_file("convexity_summary", &summary, prov, format)?,
    ])
}

pub fn theorem2(cfg: &Config, prov: &Provenance, format: Format) -> Result<Files> {
    let (src, ch, enc, opts, t2) = (cfg.source()?, cfg.channel()?, cfg.encoding()?, cfg.search()?, cfg.theorem2_options()?);
    let (ks, kf) = cfg.grid()?;
    let nodes = feasible_nodes(&src, &ks, &kf);
    if nodes.is_empty() {
        return Err(Error::argument("no feasible (kappa_S, K_f) node on the grid"));
    }
    let rows = nodes
        .par_iter()
        .map(|&(a, b)| {
            let p = chi_e_prime_with(&src, &enc, a, b, &ch, &t2)?;
            let two = chi_e_with(&src, &enc, a, b, &ch, &opts)?;
            let b1_sq = p.argmax.b1.powi(2);
            let scale = b * src.c_s().powi(2);
            Ok(vec![
                Cell::F(a),
                Cell::F(b),
                Cell::F(p.chi),
                Cell::F(two.chi),
                Cell::F(b1_sq),
                Cell::F(if scale > 0.0 { b1_sq / scale } else { 0.0 }),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    let table = Table {
        columns: vec![
            col("kappa_S", "signal transmissivity intrusion parameter"),
            col("K_f", "permutation-invariant correlation parameter"),
            col("chi_E_prime", "three-mode maximum [bits/mode]"),
            col("chi_E", "two-mode value at kappa_f=K_f [bits/mode]"),
            col("b1_sq", "argmax |<a_S^dag a_W1>|^2"),
            col("b1_sq_ratio", "b1_sq/(K_f C_S^2)"),
        ],
        rows,
    };
    Ok(vec![table_file("theorem2", &table, prov, format)?])
}

pub fn protocol_config(cfg: &Config) -> Result<(ProtocolConfig, Vec<f64>)> {
    let p = cfg.protocol.as_ref().ok_or_else(|| Error::argument("config is missing the [protocol] section"))?;
    let lengths = p.lengths_km.values()?;
    let mut pc = match p.variant {
        VariantName::Tmsv => {
            let n = p.n_s.ok_or_else(|| Error::argument("[protocol] tmsv needs n_s"))?;
            ProtocolConfig::tmsv(n, p.e_x.ok_or_else(|| Error::argument("[protocol] tmsv needs e_x"))?)?
        }
        VariantName::Flqkd => {
            let model = match (&p.i_ab_table, p.i_ab_model) {
                (Some(path), None) => IabModel::Table(IabTable::from_path(&cfg.resolve(path))?),
                (None, Some(IabModelName::CorrelationReceiver)) => IabModel::Receiver(CorrelationReceiver),
                _ => return Err(Error::argument("[protocol] flqkd needs exactly one of i_ab_table, i_ab_model")),
            };
            let gain = p.gain.ok_or_else(|| Error::argument("[protocol] flqkd needs gain"))?;
            let mut pc = ProtocolConfig::flqkd(gain, p.m_e.unwrap_or(1), model)?;
            pc.optimize_n_s = p.optimize_log10_n_s.map(|[a, b]| (a, b));
            let table_n_s = matches!(&pc.i_ab, Some(IabModel::Table(t)) if t.n_s.is_some());
            match (p.n_s, pc.optimize_n_s) {
                (Some(n), _) => pc.src = SourceSpec::new(n)?,
                (None, None) if !table_n_s => {
                    return Err(Error::argument("[protocol] flqkd needs n_s, optimize_log10_n_s or an N_S table column"))
                }
                _ => {}
            }
            pc
        }
    };
    if p.variant == VariantName::Tmsv && p.m_e.is_some_and(|m| m != 1) {
        return Err(Error::argument("[protocol] tmsv encodes one mode per symbol"));
    }
    if pc.variant == Variant::Flqkd {
        if let Some(e) = p.e_x {
            pc.enc = EncodingSpec::new(e, pc.enc.m_e())?;
        }
    }
    pc.beta = p.beta;
    pc.rate = p.rate_baud;
    pc.loss_db_per_km = p.loss_db_per_km;
    pc.search = cfg.search()?;
    Ok((pc, lengths))
}

pub fn ske(cfg: &Config, prov: &Provenance, format: Format) -> Result<Files> {
    let (pc, lengths) = protocol_config(cfg)?;
    let reports = ske_curve(&pc, &lengths)?;
    let rows = reports
        .iter()
        .map(|r| {
            vec![
                Cell::F(r.length_km),
                Cell::F(r.kappa_s),
                Cell::F(r.i_ab),
                Cell::F(r.chi_e),
                Cell::F(r.ske),
                Cell::F(r.skr),
                Cell::F(r.plob),
                Cell::F(r.n_s),
            ]
        })
        .collect();
    let table = Table {
        columns: vec![
            col("L_km", "one-way length [km]"),
            col("kappa_S", "link transmissivity"),
            col("I_AB", "Shannon information [bits/symbol]"),
            col("chi_E", "Holevo bound [bits/mode]"),
            col("SKE", "max(beta I_AB - M_E chi_E, 0) [bits/symbol]"),
            col("SKR_bps", "R SKE [bits/s]"),
            col("plob", "-log2(1-kappa_S) [bits/mode]"),
            col("N_S", "source brightness used"),
        ],
        rows,
    };
    Ok(vec![table_file("ske_curve", &table, prov, format)?])
}

pub fn reduce(cfg: &Config) -> Result<Files> {
    let sec = cfg.reduce.as_ref().ok_or_else(|| Error::argument("config is missing the [reduce] section"))?;
    let path = cfg.resolve(&sec.profile);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::argument(format!("cannot read profile {}: {e}", path.display())))?;
    let raw: CorrelationProfile = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("profile: {e}")))?;
    let profile = CorrelationProfile::new(raw.phase_insensitive, raw.phase_sensitive)?;
    let (reduced, log) = reduce_correlations(&profile);
    let (s_in, i_in) = profile.correlation_sums();
    let (s_out, i_out) = reduced.correlation_sums();
    let doc = serde_json::json!({
        "tool": format!("twqkd {}", env!("CARGO_PKG_VERSION")),
        "input": profile,
        "reduced": reduced,
        "log": log,
        "phase_sensitive_sum": [s_in, s_out],
        "phase_insensitive_sum": [i_in, i_out],
    });
    let mut s = serde_json::to_string_pretty(&doc).map_err(|e| Error::Parse(e.to_string()))?;
    s.push('\n');
    Ok(vec![("reduced.json".into(), s)])
}

pub fn simulate(cfg: &Config, seed: u64) -> Result<Files> {
    let src = cfg.source()?;
    let sec = cfg.simulate.as_ref().ok_or_else(|| Error::argument("config is missing the [simulate] section"))?;
    if sec.n_pairs == 0 {
        return Err(Error::argument("simulate.n_pairs must be at least 1"));
    }
    let params = match (sec.zeta, sec.delta, sec.xi) {
        (None, None, None) => AttackParameters::beam_splitter(&src, sec.kappa_s, sec.kappa_f)?,
        (z, d, x) => AttackParameters::new(
            &src,
            sec.kappa_s,
            sec.kappa_f,
            z.unwrap_or(FRAC_PI_2),
            d.unwrap_or(FRAC_PI_2),
            x.unwrap_or(0.0),
        )?,
    };
    let recs = simulate_tapped_records(&src, &AttackModel::Parameters(params), SpdcTap::new(sec.tau)?, sec.n_pairs, seed)?;
    let mut buf = Vec::new();
    write_jsonl(&recs, &mut buf)?;
    Ok(vec![("records.jsonl".into(), String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))?)])
}

pub fn estimate(cfg: &Config, prov: &Provenance, format: Format) -> Result<Files> {
    let src = cfg.source()?;
    let sec = cfg.estimate.as_ref().ok_or_else(|| Error::argument("config is missing the [estimate] section"))?;
    let path = cfg.resolve(&sec.records);
    let file = std::fs::File::open(&path).map_err(|e| Error::argument(format!("cannot open records {}: {e}", path.display())))?;
    let recs = read_jsonl(BufReader::new(file))?;
    let e = estimate_intrusion_with_lags(&recs, &src, SpdcTap::new(sec.tau)?, sec.max_lag)?;
    let table = Table {
        columns: vec![
            col("n_samples", "records used"),
            col("kappa_S_bar", "mean signal photons / N_S"),
            col("kappa_S_se", "batch-means standard error"),
            col("kappa_f_lower", "lower bound from averaged cross moments"),
            col("kappa_f_se", "batch-means standard error"),
            col("K_f_lower", "lower bound including lagged cross-pair moments"),
            col("K_f_se", "batch-means standard error"),
        ],
        rows: vec![vec![
            Cell::U(e.n_samples as u64),
            Cell::F(e.kappa_s_bar),
            Cell::F(e.std_errors.kappa_s),
            Cell::F(e.kappa_f_lower),
            Cell::F(e.std_errors.kappa_f),
            Cell::F(e.k_f_lower),
            Cell::F(e.std_errors.k_f),
        ]],
    };
    Ok(vec![table_file("estimate", &table, prov, format)?])
}

pub fn first_order(cfg: &Config, prov: &Provenance, format: Format) -> Result<Files> {
    let (src, ch) = (cfg.source()?, cfg.channel()?);
    let sec = cfg.first_order.as_ref().ok_or_else(|| Error::argument("config is missing the [first_order] section"))?;
    if sec.kappa_s.is_empty() {
        return Err(Error::argument("first_order.kappa_s is empty"));
    }
    let rows = sec
        .kappa_s
        .par_iter()
        .map(|&k| {
            let r = first_order_check(&src, k, &ch, sec.grid, sec.step)?;
            Ok(vec![
                Cell::F(k),
                Cell::F(r.argmin.0),
                Cell::F(r.argmin.1),
                Cell::F(r.argmin.2),
                Cell::F(r.derivative_min),
                Cell::F(r.reduced_argmin.0),
                Cell::F(r.reduced_argmin.1),
                Cell::F(r.reduced_min),
                Cell::F(r.zeroth_order_spread),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    let table = Table {
        columns: vec![
            col("kappa_S", "signal transmissivity"),
            col("zeta_opt", "argmin of the f_E derivative [rad]"),
            col("delta_opt", "[rad]"),
            col("xi_opt", "[rad]"),
            col("dE_dfE_min", "minimum derivative [bits]"),
            col("reduced_zeta_opt", "argmin of the reduced objective [rad]"),
            col("reduced_delta_opt", "[rad]"),
            col("reduced_min", "minimum reduced derivative"),
            col("zeroth_order_spread", "max-min entropy gain at f_E=0 [bits]"),
        ],
        rows,
    };
    Ok(vec![table_file("first_order", &table, prov, format)?])
}
