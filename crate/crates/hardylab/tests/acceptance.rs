//! The acceptance suite: runs every criterion at its pinned tolerance and
//! prints one pass/fail line per criterion (`--nocapture` to see them on
//! success).

use hardylab::acceptance::run_all;

const SEED: u64 = 20260810;

#[test]
fn acceptance_suite() {
    let results = run_all(SEED).expect("suite executes");
    assert_eq!(results.len(), 12);
    let mut failures = Vec::new();
    for r in &results {
        println!(
            "acceptance {:2} [{}] {} ({} ms)",
            r.id,
            if r.pass { "PASS" } else { "FAIL" },
            r.name,
            r.runtime_ms
        );
        for c in &r.checks {
            println!(
                "    {} {}: observed {:.3e} <= bound {:.3e}",
                if c.pass { "ok  " } else { "FAIL" },
                c.name,
                c.observed,
                c.bound
            );
            if !c.pass {
                failures.push(format!("criterion {} ({}): {}", r.id, r.name, c.name));
            }
        }
    }
    assert!(failures.is_empty(), "failed checks:\n{}", failures.join("\n"));
}
