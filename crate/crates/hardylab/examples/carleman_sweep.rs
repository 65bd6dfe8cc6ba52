//! Carleman inequalities on seeded families of smooth bumps, the commutator
//! expansion cross-check, and the admissible parameter window.

use hardylab::carleman::{
    commutator_expansion_check, inequality_sweep, parameter_window, random_bumps, CarlemanConfig,
};
use hardylab::weight::CarlemanOperator;

fn main() -> hardylab::Result<()> {
    for operator in [CarlemanOperator::Schrodinger, CarlemanOperator::Parabolic] {
        let rows = inequality_sweep(
            42,
            operator,
            &[0.5, 1.0, 2.0],
            &[0.1, 0.5, 1.0],
            &[1.0, 5.0, 10.0],
            10,
            256,
        )?;
        let worst = rows
            .iter()
            .map(|r| r.margin / r.rhs)
            .fold(f64::INFINITY, f64::min);
        println!(
            "{operator:?}: {} checks, all pass = {}, worst margin/rhs = {worst:.4}",
            rows.len(),
            rows.iter().all(|r| r.pass)
        );
    }

    // Termwise completed squares vs the direct operator, both analytic.
    let bump = random_bumps(7, 1, 20.0)[0];
    for operator in [CarlemanOperator::Schrodinger, CarlemanOperator::Parabolic] {
        let cfg = CarlemanConfig::new(1.0, 0.5, 5.0, operator)?;
        let report = commutator_expansion_check(&bump, &cfg, 256)?;
        println!(
            "{operator:?} expansion: termwise = {:.6e}, direct = {:.6e}, gap = {:.3e}, slack = {:.3e}",
            report.termwise, report.direct, report.relative_gap, report.slack
        );
    }

    // The (mu, epsilon) window for uniqueness-style runs shrinks to
    // (1/2, gamma] as epsilon -> 0: nonempty only for gamma > 1/2.
    println!("\nadmissible mu window:");
    for (gamma, eps) in [(1.0, 0.1), (1.0, 1e-6), (0.51, 1e-4), (0.5, 1e-4), (0.4, 0.1)] {
        match parameter_window(gamma, eps)? {
            Some((lo, hi)) => println!("  gamma={gamma}, eps={eps}: ({lo:.6}, {hi:.6}]"),
            None => println!("  gamma={gamma}, eps={eps}: empty"),
        }
    }
    Ok(())
}
