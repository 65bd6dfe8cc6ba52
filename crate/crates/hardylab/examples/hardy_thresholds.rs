//! Two-time Gaussian decay products for the free Schrödinger flow and the
//! heat-flow finiteness boundary: the forbidden region is an unreachable
//! boundary, touched exactly by the extremal data.

use hardylab::analytic::{hardy_extremal_pair, GaussianState};
use hardylab::grid::Grid;
use hardylab::hardy::{fit_decay, hardy_product, heat_boundary_scan};
use hardylab::propagator::free_flow;

fn main() -> hardylab::Result<()> {
    let grid = Grid::new(20.0, 1024)?;

    // The extremal pair sits exactly on the product boundary.
    let (extremal, terminal_rate) = hardy_extremal_pair(2.0, 1.0)?;
    let u0 = extremal.sample(grid)?;
    let u1 = free_flow(&u0, 0.0, 1.0, 1.0)?;
    let product = hardy_product(&u0, &u1, 1.0)?;
    println!(
        "extremal data (beta=2, T=1): terminal rate {:.6}, product alpha*beta/(4T) = {:.9}",
        terminal_rate, product.normalized_product
    );

    // Generic Gaussians land strictly above 1.
    println!("\nc        product");
    for c in [0.25, 0.5, 1.0, 2.0] {
        let g0 = GaussianState::real(c)?.sample(grid)?;
        let g1 = free_flow(&g0, 0.0, 1.0, 1.0)?;
        let p = hardy_product(&g0, &g1, 1.0)?;
        println!("{c:<7}  {:.6}", p.normalized_product);
    }

    // Decay fits flag non-Gaussian tails.
    let lorentzian = hardylab::grid::ComplexField::from_fn(grid, |x| {
        num_complex::Complex64::new(1.0 / (1.0 + x * x), 0.0)
    })?;
    let fit = fit_decay(&lorentzian)?;
    println!(
        "\nlorentzian tail: fitted rate {:.4}, residual {:.3}, gaussian-like = {}",
        fit.rate, fit.residual, fit.gaussian_like
    );

    // Heat boundary: delta*(c) = 1/sqrt(c/(1+4c)) > 2 always.
    println!("\nheat-flow finiteness boundary:");
    for c in [0.25, 1.0, 4.0, 100.0] {
        let located = heat_boundary_scan(&GaussianState::real(c)?, 1e-9)?;
        println!("  c = {c:<6} delta* = {located:.6}");
    }
    Ok(())
}
