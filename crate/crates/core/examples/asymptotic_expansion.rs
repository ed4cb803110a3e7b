//! Large-c behaviour of the curves through (0, c).
//!
//! (F_c, G_c) = (y y', y x') / c converges to the limit pair built from eta, and the
//! first-order correction improves the error from O(1/c) to O(1/c^2).

use pmcurve::asymptotics::{check_convergence_bound, check_expansion_scaling, tangent_deviation};
use pmcurve::cli::run_family;
use pmcurve::{EtaAccumulator, HField};

fn main() -> pmcurve::Result<()> {
    let h = HField::constant(1.0);
    let range = (-2.0, 2.0);
    let step = 0.05;

    let acc3 = EtaAccumulator::new(h.clone(), 3);
    let family = run_family(&h, 3, &[4.0, 8.0, 16.0], range, step)?;
    let bound = check_convergence_bound(&family, &acc3, range, step)?;
    println!("n = 3 bound check: max ratio {} (pass = {})", bound.observed["max_ratio"], bound.pass);
    for (c, curve) in &family {
        println!("  c = {c:>4}: sup |tangent - limit tangent| = {:.3e}", tangent_deviation(curve, &acc3, range, step)?);
    }

    let acc4 = EtaAccumulator::new(h.clone(), 4);
    let ladder = run_family(&h, 4, &[8.0, 16.0, 32.0, 64.0], range, step)?;
    for k in [0, 1, 2] {
        let r = check_expansion_scaling(&ladder, &acc4, k, range, step)?;
        println!("n = 4, K = {k}: fitted slope {:.3} (needs {})", r.observed["slope"].as_f64().unwrap(), r.bound_or_expected["min_slope"]);
    }

    let c2 = acc3.expansion_coeff(2, 1.3)?;
    println!("n = 3 second-order coefficient at s = 1.3: ({}, {})", c2.f, c2.g);
    Ok(())
}
