//! Curves through (0, c) that stay off the axis.
//!
//! With H increasing away from 0 and c > 1/H(0), or H decreasing away from 0 and
//! c < 1/H(0), the normalized curve never reaches y = 0.

use pmcurve::asymptotics::check_positivity;
use pmcurve::cli::positivity_configs;
use pmcurve::SolverConfig;

fn main() -> pmcurve::Result<()> {
    let cfg = SolverConfig::default();
    for (h, c, n) in positivity_configs() {
        let r = check_positivity(&h, c, n, (-4.0, 4.0), &cfg)?;
        println!(
            "n = {n}, c = {c}: min y = {}, predicted {}, pass = {}",
            r.observed["min_y"], r.bound_or_expected["hypothesis"], r.pass
        );
    }
    Ok(())
}
