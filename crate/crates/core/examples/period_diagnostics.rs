//! Closedness integrals of the limit curve. For H = 1, n = 3 the limit curve is the
//! circle of radius 1/2, so one period is L = pi.

use std::f64::consts::PI;

use pmcurve::asymptotics::period_diagnostics;
use pmcurve::{EtaAccumulator, HField};

fn main() {
    let acc = EtaAccumulator::new(HField::constant(1.0), 3);
    for l in [PI / 2.0, PI, 2.0 * PI] {
        let d = period_diagnostics(&acc, l);
        println!(
            "L = {l:.6}: int cos = {:+.3e}, int sin = {:+.3e}, double = {:.12}, area = {:.12}",
            d.int_cos, d.int_sin, d.double_int, d.signed_area
        );
    }
    println!("circle of radius 1/2 has area {:.12}", PI / 4.0);

    // H with period 2: eta picks up a drift, so the curve need not close
    let h = HField::Fourier { a0: 1.0, cos_coeffs: vec![0.3], sin_coeffs: vec![], frequency: PI };
    let d = period_diagnostics(&EtaAccumulator::new(h, 3), 2.0);
    println!("Fourier H over L = 2: {}", serde_json::to_string(&d).unwrap());
}
