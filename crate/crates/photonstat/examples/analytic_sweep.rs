//! Closed-form sweep of the post-selected correlations.
//!
//! Prints g_00, g_10, g_20, g_11 and the reference g2(0) = 1 + mu over a
//! small (nbar, mu) grid, plus the two landmark values: the g_10 minimum
//! 27/32 at (nbar=0.5, mu=1) and the crossover above 2 past nbar = 6.

use photonstat::analytic::{self, ThermalParams};

fn main() -> photonstat::Result<()> {
    println!(
        "{:>5} {:>5} {:>9} {:>9} {:>9} {:>9} {:>7}",
        "nbar", "mu", "g00", "g10", "g20", "g11", "1+mu"
    );
    for &nbar in &[0.1, 0.5, 0.66, 1.0, 1.98, 5.0] {
        for &mu in &[0.0, 0.5, 1.0] {
            let p = ThermalParams::new(nbar, mu)?;
            println!(
                "{:>5} {:>5} {:>9.5} {:>9.5} {:>9.5} {:>9.5} {:>7.2}",
                nbar,
                mu,
                analytic::g_m0(p, 0)?,
                analytic::g_m0(p, 1)?,
                analytic::g_m0(p, 2)?,
                analytic::g11(p)?,
                analytic::reference_g2(mu)?,
            );
        }
    }

    let minimum = analytic::g_m0(ThermalParams::new(0.5, 1.0)?, 1)?;
    println!("\ng_10 minimum at (nbar=0.5, mu=1): {minimum} (= 27/32)");

    let mut crossover = None;
    for i in 1..=1000 {
        let nbar = i as f64 / 100.0;
        if analytic::g_m0(ThermalParams::new(nbar, 1.0)?, 1)? > 2.0 {
            crossover = Some(nbar);
            break;
        }
    }
    println!("g_10 exceeds 2 (stronger than thermal bunching) past nbar = {crossover:?}");
    Ok(())
}
