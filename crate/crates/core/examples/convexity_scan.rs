//! Midpoint convexity and kappa_f monotonicity of E* over a coarse grid.

use twqkd::bounds::{convexity_scan, monotonicity_scan, ScanGrid, SearchOptions};
use twqkd::channels::ChannelModel;
use twqkd::gaussian::SourceSpec;

fn main() -> twqkd::Result<()> {
    let src = SourceSpec::new(0.1)?;
    let opts = SearchOptions { grid: 17, ..SearchOptions::default() };
    for (name, ch, top) in [
        ("amplifier G=2", ChannelModel::amplifier(2.0)?, 1.5),
        ("loss eta=0.5", ChannelModel::loss(0.5)?, 1.0),
    ] {
        let grid = ScanGrid::uniform((0.05, top), (0.0, top), 11, 11);
        let conv = convexity_scan(&src, &ch, &grid, &opts, 1e-9)?;
        let mono = monotonicity_scan(&src, &ch, &grid, &opts, 1e-8)?;
        let feasible = conv.e_star.iter().flatten().count();
        println!(
            "{name}: {feasible} feasible nodes, {} triples, {} convexity violations, {} monotonicity violations",
            conv.triples_checked,
            conv.violations.len(),
            mono.len()
        );
    }
    Ok(())
}
