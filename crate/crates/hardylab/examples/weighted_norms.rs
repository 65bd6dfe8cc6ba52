//! Quadratic-exponential weights: phases, the tail-dominance diagnostic,
//! the Gaussian averaging identity, and the mollified-weight bilaplacian
//! scaling.

use hardylab::analytic::GaussianState;
use hardylab::grid::Grid;
use hardylab::weight::{
    evaluate_phase, gaussian_average_identity_check, mollified_bilaplacian_bound,
    weighted_l2_norm, CarlemanOperator, WeightProfile,
};

fn main() -> hardylab::Result<()> {
    let grid = Grid::new(20.0, 1024)?;
    let u = GaussianState::real(1.0)?.sample(grid)?;

    // Weighted norms of e^{-x^2}: gamma = 1/4 converges, gamma = 2 cannot.
    for gamma in [0.25, 2.0] {
        let profile = WeightProfile::static_gaussian(gamma)?;
        let report = weighted_l2_norm(&u, &profile, 0.0)?;
        println!(
            "gamma = {gamma}: value = {:.6}, tail ratio = {:.3e}, converged = {}",
            report.value, report.tail_ratio, report.converged
        );
    }

    // The moving Carleman weight phase at a few points.
    let carleman = WeightProfile::moving_carleman(1.0, 4.0, 0.5, CarlemanOperator::Schrodinger)?;
    println!(
        "\nmoving weight phase at (x=0, t=1/2): {}",
        evaluate_phase(&carleman, 0.0, 0.5)?
    );

    // Gaussian averaging identity: ∫ e^{2 sqrt(γ) λx - λ²/2} dλ = sqrt(2π) e^{2γx²}.
    let worst = gaussian_average_identity_check(0.25, &[0.0, 0.5, 1.0, 2.0])?;
    println!("gaussian averaging identity, worst relative error: {worst:.3e}");

    // The mollified convex weight: sup |Δ² φ_{a,ρ}| scales linearly in a.
    println!("\nsup |four th derivative| of the mollified convex weight, rho = 0.5:");
    for a in [0.5, 0.25, 0.125, 0.0625] {
        let sup = mollified_bilaplacian_bound(a, 0.5)?;
        println!("  a = {a:<7} sup = {sup:.6}  (sup/a = {:.4})", sup / a);
    }
    Ok(())
}
