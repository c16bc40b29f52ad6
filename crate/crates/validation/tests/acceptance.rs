//! Acceptance criteria, one line each.

use dgoim::conformance::{run_all, Config};

#[test]
fn acceptance() {
    println!();
    let results = run_all(&Config::default(), |r| println!("{r}"));
    let failed: Vec<_> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
