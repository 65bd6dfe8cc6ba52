//! Where the formal convexity argument fails: the weight rate a(t) solving
//! 32a³ + a'' - 2a'²/a = 0 makes the commutator calculus formally positive,
//! yet the truncated weighted integral of an explicit free solution at t = 0
//! grows without bound while the endpoint integrals settle — the
//! interpolation inequality the formal argument promises is false.

use hardylab::counterexample::{divergence_demonstration, solve_weight_ode};

fn main() -> hardylab::Result<()> {
    let traj = solve_weight_ode(50.0, 1e-3)?;
    println!(
        "rate ODE on [0, 50]: first-integral residual {:.3e}, equation residual {:.3e}",
        traj.first_integral_residual(),
        traj.rate_equation_residual()
    );
    println!("\nR a(R) (must decay to 0):");
    for r in [1.0, 5.0, 10.0, 20.0, 50.0] {
        let idx = traj.node_index(r)?;
        println!("  R = {r:<5} R a(R) = {:.6}", r * traj.a_at(idx));
    }

    let table = divergence_demonstration(&traj, 1.0, &[5.0, 10.0, 20.0, 40.0])?;
    println!(
        "\nR = 1 (center integrand e^{{(2R - 1/2) x²}} diverges), endpoint rate {:.4}:",
        table.endpoint_rate
    );
    println!("L      ln H(0)          H(-1)        H(+1)      endpoints settled");
    for row in &table.rows {
        println!(
            "{:<5}  {:<12.3}  {:.9}  {:.9}  {}",
            row.half_width, row.log_h0, row.h_minus1, row.h_plus1, row.endpoints_converged
        );
    }
    println!("\nH(0) truncated to [-L, L] explodes with L while H(±1) converge:");
    println!("no inequality H(0)² <= H(-1) H(+1) can hold.");
    Ok(())
}
