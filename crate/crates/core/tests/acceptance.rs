//! Runs the nine acceptance criteria at full size and prints one line each.
//!
//! Criterion 8 cannot pass as stated: its continuity part asks for a gap
//! below 1e-3 at eps = 0.005, but with offsets moved by eps * xi the gap is
//! first order in eps (for SQ2 with a = 1 it is 4 eps |xi_1 + xi_2|). It is
//! run unchanged and its line reports the failure; the test asserts every
//! other criterion and that the implied-concavity half of criterion 8 passes.

use wmink::density::{check_implied_concavity, WeightedDensity};
use wmink::linalg::unit;
use wmink::suite::{run_all, SuiteConfig, IMPLIED_CONCAVITY_SAMPLES};

const SEED: u64 = 1;
const UNATTAINABLE: &[u8] = &[8];

#[test]
fn acceptance() {
    let cfg = SuiteConfig::full(SEED);
    let results = run_all(&cfg);
    for r in &results {
        let note = if !r.passed && UNATTAINABLE.contains(&r.id) {
            " (known: continuity gap is first order in eps)"
        } else {
            ""
        };
        println!("{}{note}", r.line());
    }
    assert_eq!(results.len(), 9);
    let unexpected: Vec<u8> =
        results.iter().filter(|r| !r.passed && !UNATTAINABLE.contains(&r.id)).map(|r| r.id).collect();
    assert!(unexpected.is_empty(), "failing criteria: {unexpected:?}");
}

#[test]
fn implied_concavity_half_of_criterion_8() {
    for n in [2, 3] {
        for d in [WeightedDensity::x1(n), WeightedDensity::power_cone(unit(n, 0), 2.0).unwrap()] {
            let r = check_implied_concavity(&d, n, IMPLIED_CONCAVITY_SAMPLES, SEED).unwrap();
            assert!(r.passed, "{} n={n}: worst {}", d.label(), r.worst);
        }
    }
}
