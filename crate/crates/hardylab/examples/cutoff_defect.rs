//! Compactly supported truncation of an evolution: the smooth space/time
//! cutoffs, the equation defect they create, and its decay as the spatial
//! cutoff widens.

use hardylab::analytic::GaussianState;
use hardylab::carleman::cutoff_apply;
use hardylab::grid::{l2_norm, uniform_times, Grid, SpaceTimeField};
use hardylab::propagator::free_flow;

fn main() -> hardylab::Result<()> {
    let grid = Grid::new(20.0, 1024)?;
    let u0 = GaussianState::real(1.0)?.sample(grid)?;
    let times = uniform_times(0.0, 1.0, 41);
    let slices = times
        .iter()
        .map(|&t| free_flow(&u0, 0.0, 1.0, t))
        .collect::<hardylab::Result<Vec<_>>>()?;
    let u = SpaceTimeField::new(grid, times, slices)?;

    println!("defect norm at the temporal plateau (t = 1/2), Gaussian tails:");
    let mut previous: Option<f64> = None;
    for m in [2.0, 3.0, 4.0, 6.0] {
        let result = cutoff_apply(&u, m, 8.0)?;
        let defect = l2_norm(result.defect.slice(20));
        let note = match previous {
            Some(p) => format!("  (decay factor {:.1})", p / defect),
            None => String::new(),
        };
        println!("  M = {m:<4} defect = {defect:.3e}{note}");
        previous = Some(defect);
    }
    println!("\nInside |x| <= M and the time plateau the product equals the field");
    println!("and the defect vanishes; the defect lives on the annulus and the");
    println!("time edges, and dies off with the Gaussian tails as M grows.");
    Ok(())
}
