//! Grid scans over `(κ_S, κ_f)` and the low-intrusion expansion check.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;

use super::{gain4, min_entropy_gain_with, MinimizationResult, SearchOptions};
use crate::attacks::{attack_matrix4, kappa_f_range};
use crate::channels::{complementary_output4, ChannelKind, ChannelModel};
use crate::error::{Error, Result};
use crate::gaussian::{two_mode_nu_robust, SourceSpec};
use crate::optimize::linspace;

/// Rectangular `(κ_S, κ_f)` grid with uniform spacing on each axis; infeasible nodes are skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanGrid {
    pub kappa_s: Vec<f64>,
    pub kappa_f: Vec<f64>,
}

impl ScanGrid {
    pub fn uniform(kappa_s: (f64, f64), kappa_f: (f64, f64), n_s: usize, n_f: usize) -> Self {
        Self { kappa_s: linspace(kappa_s.0, kappa_s.1, n_s), kappa_f: linspace(kappa_f.0, kappa_f.1, n_f) }
    }

    fn validate(&self) -> Result<()> {
        if self.kappa_s.is_empty() || self.kappa_f.is_empty() {
            return Err(Error::argument("scan grid is empty"));
        }
        for (name, axis) in [("kappa_S", &self.kappa_s), ("kappa_f", &self.kappa_f)] {
            if axis.iter().any(|v| !v.is_finite()) {
                return Err(Error::argument(format!("{name} axis has non-finite values")));
            }
            if axis.len() > 2 {
                let h = axis[1] - axis[0];
                let uniform = axis.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs().max(1e-300));
                if !uniform || h <= 0.0 {
                    return Err(Error::argument(format!("{name} axis must be increasing and evenly spaced")));
                }
            }
        }
        Ok(())
    }
}

/// `E*` at every grid node, `None` where the pair is infeasible. Row-major in `(κ_S, κ_f)`.
pub(crate) fn surface(
    src: &SourceSpec,
    channel: &ChannelModel,
    grid: &ScanGrid,
    opts: &SearchOptions,
) -> Result<Vec<Option<MinimizationResult>>> {
    let nodes: Vec<(f64, f64)> = grid
        .kappa_s
        .iter()
        .flat_map(|&ks| grid.kappa_f.iter().map(move |&kf| (ks, kf)))
        .collect();
    nodes
        .par_iter()
        .map(|&(ks, kf)| {
            if ks < 0.0 || kf < 0.0 || kf > kappa_f_range(ks, src).1 {
                return Ok(None);
            }
            match min_entropy_gain_with(src, ks, kf, channel, opts) {
                Ok(r) => Ok(Some(r)),
                Err(Error::Domain(_)) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexityViolation {
    /// `(κ_S, κ_f)` of the two ends and the midpoint.
    pub a: (f64, f64),
    pub mid: (f64, f64),
    pub b: (f64, f64),
    /// `E*(mid) - (E*(a) + E*(b))/2`
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityReport {
    pub triples_checked: usize,
    pub violations: Vec<ConvexityViolation>,
    /// `E*` per node, row-major, `None` off the feasible region.
    pub e_star: Vec<Option<f64>>,
}

/// Midpoint convexity of `E*` along axis-aligned and diagonal lines of the grid, all step sizes.
pub fn convexity_scan(
    src: &SourceSpec,
    channel: &ChannelModel,
    grid: &ScanGrid,
    opts: &SearchOptions,
    slack: f64,
) -> Result<ConvexityReport> {
    grid.validate()?;
    let e: Vec<Option<f64>> = surface(src, channel, grid, opts)?.iter().map(|r| r.map(|m| m.e_star)).collect();
    let (ns, nf) = (grid.kappa_s.len() as i64, grid.kappa_f.len() as i64);
    let at = |i: i64, j: i64| -> Option<f64> {
        if i < 0 || j < 0 || i >= ns || j >= nf {
            None
        } else {
            e[(i * nf + j) as usize]
        }
    };
    let coord = |i: i64, j: i64| (grid.kappa_s[i as usize], grid.kappa_f[j as usize]);
    let mut violations = Vec::new();
    let mut triples = 0;
    for i in 0..ns {
        for j in 0..nf {
            let Some(ea) = at(i, j) else { continue };
            for (di, dj) in [(1, 0), (0, 1), (1, 1), (1, -1)] {
                for s in 1.. {
                    let (mi, mj, bi, bj) = (i + s * di, j + s * dj, i + 2 * s * di, j + 2 * s * dj);
                    if bi < 0 || bj < 0 || bi >= ns || bj >= nf {
                        break;
                    }
                    let (Some(em), Some(eb)) = (at(mi, mj), at(bi, bj)) else { continue };
                    triples += 1;
                    let excess = em - 0.5 * (ea + eb);
                    if excess > slack {
                        violations.push(ConvexityViolation { a: coord(i, j), mid: coord(mi, mj), b: coord(bi, bj), excess });
                    }
                }
            }
        }
    }
    Ok(ConvexityReport { triples_checked: triples, violations, e_star: e })
}

/// Pairs `(κ_S, κ_f1 < κ_f2)` on the grid where `E*` decreases by more than `slack`,
/// i.e. where `χ_E` would increase with `κ_f`.
pub fn monotonicity_scan(
    src: &SourceSpec,
    channel: &ChannelModel,
    grid: &ScanGrid,
    opts: &SearchOptions,
    slack: f64,
) -> Result<Vec<((f64, f64), (f64, f64))>> {
    grid.validate()?;
    let e = surface(src, channel, grid, opts)?;
    let nf = grid.kappa_f.len();
    let mut bad = Vec::new();
    for (i, &ks) in grid.kappa_s.iter().enumerate() {
        for j in 0..nf {
            for k in j + 1..nf {
                if let (Some(a), Some(b)) = (e[i * nf + j], e[i * nf + k]) {
                    if b.e_star < a.e_star - slack {
                        bad.push(((ks, grid.kappa_f[j]), (ks, grid.kappa_f[k])));
                    }
                }
            }
        }
    }
    Ok(bad)
}

/// Result of the first-order expansion in `f_E`, where `κ_f = (1 - f_E) κ_S`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstOrderReport {
    /// `(ζ, δ, ξ)` minimizing the `f_E` derivative of the entropy gain.
    pub argmin: (f64, f64, f64),
    pub derivative_min: f64,
    /// `(ζ, δ, ξ)` minimizing the reduced objective: `∂(ν₋ - μ₋)` for loss, `∂(-μ₋)` for amplifiers.
    pub reduced_argmin: (f64, f64, f64),
    pub reduced_min: f64,
    /// Max minus min of the entropy gain over the grid at `f_E = 0`.
    pub zeroth_order_spread: f64,
    pub step: f64,
}

/// Scan `(ζ, δ, ξ)` on a `grid³` lattice for the minimizer of `∂_{f_E} E` at `f_E = 0`.
///
/// `κ_f > κ_S` is infeasible, so the derivative uses the one-sided second-order
/// difference `(-3E(0) + 4E(h) - E(2h)) / 2h`.
pub fn first_order_check(src: &SourceSpec, kappa_s: f64, channel: &ChannelModel, grid: usize, step: f64) -> Result<FirstOrderReport> {
    channel.require_quantum_limited()?;
    if grid < 2 {
        return Err(Error::argument("first-order grid needs at least 2 points per axis"));
    }
    let h = step;
    if !(h > 0.0) || !(kappa_s > 0.0) || (1.0 - 2.0 * h) * kappa_s == kappa_s {
        return Err(Error::numerical(format!("finite-difference step {h} underflows at kappa_S = {kappa_s}")));
    }
    let bound = 1.0 / (1.0 - (1.0 + 2.0 * src.n_s()) * 2.0 * h);
    if kappa_s > bound {
        return Err(Error::domain(format!("kappa_S = {kappa_s} exceeds {bound} for step {h}")));
    }
    let n = src.n_s();
    // (E, ν₋, μ₋) at offset f_E for fixed angles
    let probe = |fe: f64, zeta: f64, delta: f64, xi: f64| -> (f64, f64, f64) {
        let kf = (1.0 - fe) * kappa_s;
        let r = if kf > 0.0 { ((kappa_s - kf) * n / kf).max(0.0) } else { 0.0 };
        let c = (r * zeta.cos().powi(2)).min(1.0).sqrt();
        let m = attack_matrix4(src, kappa_s, kf, c, delta.cos(), xi);
        let (_, mu_m) = two_mode_nu_robust(&m);
        let (_, nu_m) = two_mode_nu_robust(&complementary_output4(&m, channel));
        (gain4(src, channel, kappa_s, kf, c, delta.cos(), xi), nu_m, mu_m)
    };
    let d1 = |a: f64, b: f64, c: f64| (-3.0 * a + 4.0 * b - c) / (2.0 * h);
    let loss = matches!(channel.kind(), ChannelKind::Loss(_));

    let zetas = linspace(0.0, FRAC_PI_2, grid);
    let deltas = linspace(0.0, FRAC_PI_2, grid);
    let xis = linspace(-PI, PI, grid);
    let mut best = (f64::INFINITY, (0.0, 0.0, 0.0));
    let mut best_reduced = (f64::INFINITY, (0.0, 0.0, 0.0));
    let (mut lo0, mut hi0) = (f64::INFINITY, f64::NEG_INFINITY);
    // ties resolve toward the later grid node, i.e. toward ζ = δ = π/2
    for &zeta in &zetas {
        for &delta in &deltas {
            for &xi in &xis {
                let p0 = probe(0.0, zeta, delta, xi);
                let p1 = probe(h, zeta, delta, xi);
                let p2 = probe(2.0 * h, zeta, delta, xi);
                lo0 = lo0.min(p0.0);
                hi0 = hi0.max(p0.0);
                let de = d1(p0.0, p1.0, p2.0);
                let reduced = if loss {
                    d1(p0.1 - p0.2, p1.1 - p1.2, p2.1 - p2.2)
                } else {
                    -d1(p0.2, p1.2, p2.2)
                };
                if de <= best.0 {
                    best = (de, (zeta, delta, xi));
                }
                if reduced <= best_reduced.0 {
                    best_reduced = (reduced, (zeta, delta, xi));
                }
            }
        }
    }
    if !best.0.is_finite() {
        return Err(Error::numerical("first-order derivative is not finite on the grid"));
    }
    Ok(FirstOrderReport {
        argmin: best.1,
        derivative_min: best.0,
        reduced_argmin: best_reduced.1,
        reduced_min: best_reduced.0,
        zeroth_order_spread: hi0 - lo0,
        step: h,
    })
}
