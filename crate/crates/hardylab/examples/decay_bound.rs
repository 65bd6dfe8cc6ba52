//! The a-priori weighted decay estimate for dissipative flows: evolving
//! e^{-x²} under (A+iB)Δ, the terminal norm at the Riccati-matched Gaussian
//! rate stays below the initial weighted norm.

use hardylab::analytic::GaussianState;
use hardylab::grid::Grid;
use hardylab::propagator::{decay_estimate_check, FlowSpec};

fn main() -> hardylab::Result<()> {
    let grid = Grid::new(20.0, 1024)?;
    let u0 = GaussianState::real(1.0)?.sample(grid)?;

    for (label, a, b, gamma, t_final) in [
        ("heat flow        A=1 B=0 gamma=1/2 T=1  ", 1.0, 0.0, 0.5, 1.0),
        ("complex flow     A=1 B=1 gamma=1/4 T=1/2", 1.0, 1.0, 0.25, 0.5),
        ("strong diffusion A=2 B=-1 gamma=0.15 T=1", 2.0, -1.0, 0.15, 1.0),
    ] {
        let report = decay_estimate_check(&u0, &FlowSpec::free(a, b), gamma, t_final, 1e-3)?;
        println!(
            "{label}: rate a(T) = {:.6}, lhs = {:.6}, rhs = {:.6}, margin = {:+.6}",
            report.weight_rate, report.lhs, report.rhs, report.margin
        );
    }
    println!("\nNonnegative margins: the weighted decay bound holds on every case.");
    Ok(())
}
