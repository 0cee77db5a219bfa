//! Secret-key efficiencies for the TMSV and floodlight protocols.

use std::io::Read;
use std::path::Path;

use argmin::core::{CostFunction, Executor, State};
use argmin::solver::goldensectionsearch::GoldenSectionSearch;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::bounds::{chi_e_with, SearchOptions};
use crate::channels::{ChannelModel, EncodingSpec};
use crate::error::{Error, Result};
use crate::gaussian::SourceSpec;

/// Fiber link with loss in dB/km.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkModel {
    pub length_km: f64,
    pub loss_db_per_km: f64,
}

impl LinkModel {
    pub fn new(length_km: f64, loss_db_per_km: f64) -> Result<Self> {
        if !(length_km >= 0.0) || !(loss_db_per_km >= 0.0) || !length_km.is_finite() || !loss_db_per_km.is_finite() {
            return Err(Error::domain(format!("need finite L >= 0 and loss >= 0, got {length_km} km, {loss_db_per_km} dB/km")));
        }
        Ok(Self { length_km, loss_db_per_km })
    }

    /// 0.2 dB/km fiber.
    pub fn fiber(length_km: f64) -> Result<Self> {
        Self::new(length_km, 0.2)
    }

    /// `κ_S = 10^(-α L / 10)`
    pub fn kappa_s(&self) -> f64 {
        10f64.powf(-self.loss_db_per_km * self.length_km / 10.0)
    }
}

/// Repeaterless capacity `-log₂(1 - κ_S)` in bits per mode; infinite at `κ_S = 1`.
pub fn plob(kappa_s: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&kappa_s) {
        return Err(Error::domain(format!("transmissivity must lie in [0, 1], got {kappa_s}")));
    }
    Ok(if kappa_s == 1.0 { f64::INFINITY } else { -(-kappa_s).ln_1p() / std::f64::consts::LN_2 })
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
    }
}

/// Which quantity the second table column holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableKind {
    /// `I_AB` in bits per symbol.
    Information,
    /// Bit error probability of a binary symmetric channel.
    ErrorProbability,
}

/// `I_AB` (or error probability) versus length, linearly interpolated; an optional
/// `N_S` column pins the source brightness used at each row.
#[derive(Debug, Clone, PartialEq)]
pub struct IabTable {
    pub kind: TableKind,
    pub length_km: Vec<f64>,
    pub values: Vec<f64>,
    pub n_s: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
struct Row {
    #[serde(rename = "L_km")]
    l_km: f64,
    #[serde(rename = "I_AB_bits_per_symbol")]
    info: Option<f64>,
    error_prob: Option<f64>,
    #[serde(rename = "N_S")]
    n_s: Option<f64>,
}

impl IabTable {
    pub fn from_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)
            .map_err(|e| Error::argument(format!("cannot open I_AB table {}: {e}", path.display())))?;
        Self::from_reader(file)
    }

    /// Reads `L_km,I_AB_bits_per_symbol[,N_S]` or `L_km,error_prob[,N_S]`; `#` lines are comments.
    pub fn from_reader<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(input);
        let headers = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
        let has = |h: &str| headers.iter().any(|x| x == h);
        let kind = match (has("I_AB_bits_per_symbol"), has("error_prob")) {
            (true, false) => TableKind::Information,
            (false, true) => TableKind::ErrorProbability,
            _ => {
                return Err(Error::Parse(format!(
                    "I_AB table needs L_km and exactly one of I_AB_bits_per_symbol, error_prob; got {headers:?}"
                )))
            }
        };
        if !has("L_km") {
            return Err(Error::Parse("I_AB table has no L_km column".into()));
        }
        if let Some(bad) = headers.iter().find(|h| !["L_km", "I_AB_bits_per_symbol", "error_prob", "N_S"].contains(h)) {
            return Err(Error::Parse(format!("unknown I_AB table column {bad:?}")));
        }
        let (mut length_km, mut values, mut n_s) = (Vec::new(), Vec::new(), Vec::new());
        for (i, row) in rdr.deserialize::<Row>().enumerate() {
            let row = row.map_err(|e| Error::Parse(format!("I_AB table row {}: {e}", i + 1)))?;
            let v = row.info.or(row.error_prob).ok_or_else(|| Error::Parse(format!("row {} has no value", i + 1)))?;
            let ok = match kind {
                TableKind::Information => v >= 0.0 && v.is_finite(),
                TableKind::ErrorProbability => (0.0..=0.5).contains(&v),
            };
            if !ok || !(row.l_km >= 0.0) {
                return Err(Error::Parse(format!("row {}: value {v} or length {} out of range", i + 1, row.l_km)));
            }
            length_km.push(row.l_km);
            values.push(v);
            n_s.push(row.n_s);
        }
        if length_km.is_empty() {
            return Err(Error::Parse("I_AB table is empty".into()));
        }
        if length_km.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parse("I_AB table lengths must be strictly increasing".into()));
        }
        let n_s = if n_s.iter().all(Option::is_some) {
            Some(n_s.into_iter().flatten().collect())
        } else if n_s.iter().all(Option::is_none) {
            None
        } else {
            return Err(Error::Parse("N_S column must be filled on every row or absent".into()));
        };
        Ok(Self { kind, length_km, values, n_s })
    }

    fn interpolate(&self, column: &[f64], l: f64) -> Result<f64> {
        let xs = &self.length_km;
        let (first, last) = (xs[0], xs[xs.len() - 1]);
        let tol = 1e-9 * last.abs().max(1.0);
        if l < first - tol || l > last + tol {
            return Err(Error::argument(format!("no I_AB data for L = {l} km (table covers {first}..{last} km)")));
        }
        let j = xs.partition_point(|&x| x < l).min(xs.len() - 1);
        if (xs[j] - l).abs() <= tol || j == 0 {
            return Ok(column[j]);
        }
        let t = (l - xs[j - 1]) / (xs[j] - xs[j - 1]);
        Ok(column[j - 1] + t * (column[j] - column[j - 1]))
    }

    /// `I_AB` at length `l` in bits per symbol.
    pub fn information(&self, l: f64) -> Result<f64> {
        let v = self.interpolate(&self.values, l)?;
        Ok(match self.kind {
            TableKind::Information => v,
            TableKind::ErrorProbability => 1.0 - binary_entropy(v),
        })
    }

    pub fn source_photons(&self, l: f64) -> Result<Option<f64>> {
        self.n_s.as_ref().map(|c| self.interpolate(c, l)).transpose()
    }
}

/// Idealized BPSK cross-correlation receiver. Per mode, the returned light carries
/// `κ² G N_S` of signal-reference correlation against `κ G (1 + 2κ N_S) + 1/2`
/// noise; `M_E` modes add coherently:
/// `SNR = 4 M_E κ² G N_S / (2 κ G (1 + 2 κ N_S) + 1)`, `BER = erfc(sqrt(SNR/2))/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationReceiver;

impl CorrelationReceiver {
    pub fn error_probability(&self, kappa: f64, gain: f64, n_s: f64, m_e: u32) -> f64 {
        let snr = 4.0 * m_e as f64 * kappa * kappa * gain * n_s / (2.0 * kappa * gain * (1.0 + 2.0 * kappa * n_s) + 1.0);
        0.5 * erfc((0.5 * snr).sqrt())
    }

    pub fn information(&self, kappa: f64, gain: f64, n_s: f64, m_e: u32) -> f64 {
        1.0 - binary_entropy(self.error_probability(kappa, gain, n_s, m_e))
    }
}

/// Source of the floodlight protocol's Shannon information.
#[derive(Debug, Clone, PartialEq)]
pub enum IabModel {
    Table(IabTable),
    Receiver(CorrelationReceiver),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Tmsv,
    Flqkd,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig {
    pub variant: Variant,
    /// Source brightness; for the floodlight protocol, the fallback when `N_S` is not optimized.
    pub src: SourceSpec,
    pub enc: EncodingSpec,
    /// Bob's amplifier gain (floodlight only).
    pub gain: f64,
    pub beta: f64,
    /// Symbol rate in symbols per second.
    pub rate: f64,
    pub i_ab: Option<IabModel>,
    /// Golden-section search over `log10 N_S` in this range; `None` uses `src`.
    pub optimize_n_s: Option<(f64, f64)>,
    pub loss_db_per_km: f64,
    pub search: SearchOptions,
}

impl ProtocolConfig {
    /// TMSV protocol with displacement energy `e_x` and the identity channel.
    pub fn tmsv(n_s: f64, e_x: f64) -> Result<Self> {
        Ok(Self {
            variant: Variant::Tmsv,
            src: SourceSpec::new(n_s)?,
            enc: EncodingSpec::new(e_x, 1)?,
            gain: 1.0,
            beta: 1.0,
            rate: 1.0,
            i_ab: None,
            optimize_n_s: None,
            loss_db_per_km: 0.2,
            search: SearchOptions::default(),
        })
    }

    /// Floodlight protocol: BPSK encoding (`E_X = 0`) over `m_e` modes, amplifier gain `gain`,
    /// `N_S` optimized over `log10 N_S ∈ [-4, 0]`.
    pub fn flqkd(gain: f64, m_e: u32, i_ab: IabModel) -> Result<Self> {
        Ok(Self {
            variant: Variant::Flqkd,
            src: SourceSpec::new(0.01)?,
            enc: EncodingSpec::new(0.0, m_e)?,
            gain,
            beta: 1.0,
            rate: 1.0,
            i_ab: Some(i_ab),
            optimize_n_s: Some((-4.0, 0.0)),
            loss_db_per_km: 0.2,
            search: SearchOptions::default(),
        })
    }

    fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::domain(format!("reconciliation efficiency must lie in (0, 1], got {}", self.beta)));
        }
        if !(self.rate >= 0.0) || !self.rate.is_finite() {
            return Err(Error::domain(format!("symbol rate must be finite and >= 0, got {}", self.rate)));
        }
        if let Some((lo, hi)) = self.optimize_n_s {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::argument(format!("bad log10 N_S bracket [{lo}, {hi}]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkeReport {
    pub length_km: f64,
    pub kappa_s: f64,
    pub kappa_s_bar: f64,
    /// `κ̄_f` (TMSV) or `K̄_f` (floodlight).
    pub kappa_f_used: f64,
    pub n_s: f64,
    pub i_ab: f64,
    pub chi_e: f64,
    pub ske: f64,
    pub skr: f64,
    pub plob: f64,
    /// `log10 N_S` bracket searched, when `N_S` was optimized.
    pub n_s_bracket: Option<(f64, f64)>,
}

fn report(cfg: &ProtocolConfig, link: &LinkModel, kappa_s_bar: f64, kappa_f: f64, n_s: f64, i_ab: f64, chi: f64, bracket: Option<(f64, f64)>) -> Result<SkeReport> {
    let ske = (cfg.beta * i_ab - cfg.enc.m_e() as f64 * chi).max(0.0);
    Ok(SkeReport {
        length_km: link.length_km,
        kappa_s: link.kappa_s(),
        kappa_s_bar,
        kappa_f_used: kappa_f,
        n_s,
        i_ab,
        chi_e: chi,
        ske,
        skr: cfg.rate * ske,
        plob: plob(link.kappa_s())?,
        n_s_bracket: bracket,
    })
}

/// TMSV protocol: `I_AB = log₂(κ_S E_X + κ_S² N_S + 1)` at the link transmissivity,
/// `χ_E(κ̄_S, κ̄_f)` with the identity channel.
pub fn tmsv_ske(cfg: &ProtocolConfig, link: &LinkModel, kappa_s_bar: f64, kappa_f_bar: f64) -> Result<SkeReport> {
    if cfg.variant != Variant::Tmsv {
        return Err(Error::argument("tmsv_ske needs a TMSV configuration"));
    }
    cfg.validate()?;
    if cfg.enc.m_e() != 1 {
        return Err(Error::argument("the TMSV protocol encodes one mode per symbol"));
    }
    let k = link.kappa_s();
    let n = cfg.src.n_s();
    let i_ab = (k * cfg.enc.e_x() + k * k * n + 1.0).log2();
    let chi = chi_e_with(&cfg.src, &cfg.enc, kappa_s_bar, kappa_f_bar, &ChannelModel::identity(), &cfg.search)?.chi;
    report(cfg, link, kappa_s_bar, kappa_f_bar, n, i_ab, chi, None)
}

/// Information and `χ_E` at a given brightness.
fn flqkd_terms(cfg: &ProtocolConfig, link: &LinkModel, kappa_s_bar: f64, k_f_bar: f64, n_s: f64) -> Result<(f64, f64)> {
    let src = SourceSpec::new(n_s)?;
    let channel = ChannelModel::amplifier(cfg.gain)?;
    let i_ab = match cfg.i_ab.as_ref().ok_or_else(|| Error::argument("floodlight protocol needs an I_AB model"))? {
        IabModel::Table(t) => t.information(link.length_km)?,
        IabModel::Receiver(r) => r.information(link.kappa_s(), cfg.gain, n_s, cfg.enc.m_e()),
    };
    let chi = chi_e_with(&src, &cfg.enc, kappa_s_bar, k_f_bar, &channel, &cfg.search)?.chi;
    Ok((i_ab, chi))
}

struct NegSke<'a> {
    cfg: &'a ProtocolConfig,
    link: &'a LinkModel,
    kappa_s_bar: f64,
    k_f_bar: f64,
}

impl CostFunction for NegSke<'_> {
    type Param = f64;
    type Output = f64;

    fn cost(&self, log_n: &f64) -> std::result::Result<f64, argmin::core::Error> {
        let (i, chi) = flqkd_terms(self.cfg, self.link, self.kappa_s_bar, self.k_f_bar, 10f64.powf(*log_n))?;
        Ok(-(self.cfg.beta * i - self.cfg.enc.m_e() as f64 * chi))
    }
}

/// Floodlight protocol: `SKE = max(β I_AB - M_E χ_E(κ̄_S, K̄_f), 0)` with Bob's amplifier.
///
/// When the configuration asks for it, `N_S` maximizes the unclamped key efficiency by
/// golden-section search over `log10 N_S`; a table `N_S` column takes precedence.
pub fn flqkd_ske(cfg: &ProtocolConfig, link: &LinkModel, kappa_s_bar: f64, k_f_bar: f64) -> Result<SkeReport> {
    if cfg.variant != Variant::Flqkd {
        return Err(Error::argument("flqkd_ske needs a floodlight configuration"));
    }
    cfg.validate()?;
    let pinned = match &cfg.i_ab {
        Some(IabModel::Table(t)) => t.source_photons(link.length_km)?,
        Some(IabModel::Receiver(_)) => None,
        None => return Err(Error::argument("floodlight protocol needs an I_AB model")),
    };
    let (n_s, bracket) = match (pinned, cfg.optimize_n_s) {
        (Some(n), _) => (n, None),
        (None, None) => (cfg.src.n_s(), None),
        (None, Some((lo, hi))) => {
            let cost = NegSke { cfg, link, kappa_s_bar, k_f_bar };
            let solver = GoldenSectionSearch::new(lo, hi)
                .and_then(|s| s.with_tolerance(1e-4))
                .map_err(|e| Error::numerical(format!("golden-section setup failed: {e}")))?;
            let res = Executor::new(cost, solver)
                .configure(|s| s.param(0.5 * (lo + hi)).max_iters(200))
                .run()
                .map_err(|e| match e.downcast::<Error>() {
                    Ok(inner) => inner,
                    Err(e) => Error::numerical(format!("golden-section search failed: {e}")),
                })?;
            let state = res.state();
            let mut best = (state.get_best_cost(), *state.get_best_param().unwrap_or(&lo));
            // the search assumes unimodality; the bracket ends are checked explicitly
            let cost = NegSke { cfg, link, kappa_s_bar, k_f_bar };
            for end in [lo, hi] {
                let c = cost.cost(&end).map_err(|e| Error::numerical(e.to_string()))?;
                if c < best.0 {
                    best = (c, end);
                }
            }
            (10f64.powf(best.1), Some((lo, hi)))
        }
    };
    let (i_ab, chi) = flqkd_terms(cfg, link, kappa_s_bar, k_f_bar, n_s)?;
    report(cfg, link, kappa_s_bar, k_f_bar, n_s, i_ab, chi, bracket)
}

/// SKE along a list of lengths with `κ̄_S = κ̄_f = κ_S` (attacks that leave the covariance unchanged).
/// Lengths are evaluated in parallel and reported in input order.
pub fn ske_curve(cfg: &ProtocolConfig, lengths_km: &[f64]) -> Result<Vec<SkeReport>> {
    lengths_km
        .par_iter()
        .map(|&l| {
            let link = LinkModel::new(l, cfg.loss_db_per_km)?;
            let k = link.kappa_s();
            match cfg.variant {
                Variant::Tmsv => tmsv_ske(cfg, &link, k, k),
                Variant::Flqkd => flqkd_ske(cfg, &link, k, k),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::g_entropy;

    #[test]
    fn link_and_plob() {
        let link = LinkModel::fiber(10.0).unwrap();
        assert!((link.kappa_s() - 0.630957344480193).abs() < 1e-15);
        assert_eq!(plob(0.0).unwrap(), 0.0);
        assert!((plob(0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!((plob(0.1).unwrap() + 0.9f64.log2()).abs() < 1e-15);
        assert!(plob(1.0).unwrap().is_infinite());
        assert!(plob(1.5).is_err());
        assert!((LinkModel::fiber(50.0).unwrap().kappa_s() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn tmsv_at_zero_length() {
        let cfg = ProtocolConfig::tmsv(0.5, 3.0).unwrap();
        let r = tmsv_ske(&cfg, &LinkModel::fiber(0.0).unwrap(), 1.0, 1.0).unwrap();
        let chi = g_entropy(3.5).unwrap() - g_entropy(0.5).unwrap();
        assert!((r.chi_e - chi).abs() < 1e-9);
        assert!((r.i_ab - 4.5f64.log2()).abs() < 1e-15);
        assert!((r.ske - (r.i_ab - chi)).abs() < 1e-9);
    }

    #[test]
    fn tmsv_vanishes_with_transmission() {
        let cfg = ProtocolConfig::tmsv(1.0, 1.0).unwrap();
        let link = LinkModel::fiber(500.0).unwrap();
        let k = link.kappa_s();
        let r = tmsv_ske(&cfg, &link, k, k).unwrap();
        assert!(r.i_ab < 1e-9 && r.ske == 0.0);
    }

    #[test]
    fn clamp_and_rate() {
        let table = IabTable::from_reader("L_km,I_AB_bits_per_symbol\n0,0.01\n100,0.01\n".as_bytes()).unwrap();
        let mut cfg = ProtocolConfig::flqkd(100.0, 1000, IabModel::Table(table)).unwrap();
        cfg.optimize_n_s = None;
        cfg.src = SourceSpec::new(0.5).unwrap();
        cfg.rate = 1e9;
        let link = LinkModel::fiber(20.0).unwrap();
        let r = flqkd_ske(&cfg, &link, link.kappa_s(), link.kappa_s()).unwrap();
        assert!(1000.0 * r.chi_e >= r.i_ab);
        assert_eq!(r.ske, 0.0);
        assert_eq!(r.skr, 0.0);
    }

    #[test]
    fn table_parsing_and_lookup() {
        let t = IabTable::from_reader("# model output\nL_km,error_prob\n0,0.0\n10,0.1\n20,0.5\n".as_bytes()).unwrap();
        assert_eq!(t.kind, TableKind::ErrorProbability);
        assert!((t.information(10.0).unwrap() - (1.0 - binary_entropy(0.1))).abs() < 1e-15);
        assert!((t.information(5.0).unwrap() - (1.0 - binary_entropy(0.05))).abs() < 1e-15);
        assert!(t.information(0.0).unwrap() == 1.0 && t.information(20.0).unwrap() == 0.0);
        assert!(matches!(t.information(25.0), Err(Error::Argument(_))));
        assert!(IabTable::from_reader("L_km,error_prob\n0,0.6\n".as_bytes()).is_err());
        assert!(IabTable::from_reader("L_km,I_AB_bits_per_symbol\n0,-1\n".as_bytes()).is_err());
        assert!(IabTable::from_reader("L_km,bits\n0,1\n".as_bytes()).is_err());
        assert!(IabTable::from_reader("L_km,I_AB_bits_per_symbol\n5,1\n2,1\n".as_bytes()).is_err());
        let with_n = IabTable::from_reader("L_km,I_AB_bits_per_symbol,N_S\n0,1,0.01\n10,0.5,0.03\n".as_bytes()).unwrap();
        assert!((with_n.source_photons(5.0).unwrap().unwrap() - 0.02).abs() < 1e-15);
    }

    #[test]
    fn receiver_model_limits() {
        let r = CorrelationReceiver;
        assert!((r.error_probability(0.1, 1e6, 0.0, 200) - 0.5).abs() < 1e-15);
        assert!(r.information(1.0, 1e6, 1.0, 200) > 0.999);
        let small = r.information(0.1, 1e6, 0.01, 1);
        let large = r.information(0.1, 1e6, 0.01, 200);
        assert!(small < large);
    }

    #[test]
    fn flqkd_single_mode_below_plob() {
        let cfg = ProtocolConfig::flqkd(1e6, 1, IabModel::Receiver(CorrelationReceiver)).unwrap();
        for l in [10.0, 50.0, 100.0] {
            let link = LinkModel::fiber(l).unwrap();
            let r = flqkd_ske(&cfg, &link, link.kappa_s(), link.kappa_s()).unwrap();
            assert!(r.ske < r.plob, "{r:?}");
        }
    }

    #[test]
    fn curve_preserves_order() {
        let cfg = ProtocolConfig::tmsv(2.0, 2.0).unwrap();
        let r = ske_curve(&cfg, &[5.0, 0.0, 2.0]).unwrap();
        assert_eq!(r.iter().map(|x| x.length_km).collect::<Vec<_>>(), vec![5.0, 0.0, 2.0]);
        assert!(r[1].ske >= r[2].ske && r[2].ske >= r[0].ske);
    }

    #[test]
    fn variant_mismatch_rejected() {
        let cfg = ProtocolConfig::tmsv(1.0, 1.0).unwrap();
        let link = LinkModel::fiber(1.0).unwrap();
        assert!(matches!(flqkd_ske(&cfg, &link, 0.9, 0.9), Err(Error::Argument(_))));
    }
}
