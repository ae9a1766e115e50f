mod common;

use std::time::{Duration, Instant};

use common::invariants;

const LIMIT: Duration = Duration::from_secs(5);

fn timed(name: &str, f: impl FnOnce()) {
    let t = Instant::now();
    f();
    let e = t.elapsed();
    eprintln!("{name}: {e:?}");
    assert!(e < LIMIT, "{name} took {e:?}");
}

#[test]
fn counters_stay_two_bit() {
    timed("counters", invariants::counters_stay_two_bit);
}

#[test]
fn physical_registers_are_conserved() {
    timed("rename", invariants::physical_registers_are_conserved);
}

#[test]
fn ras_matches_bounded_stack() {
    timed("ras", invariants::ras_matches_bounded_stack);
}

#[test]
fn ooo_occupancy_bounds_hold_on_random_mix() {
    let w = invariants::random_mix_workload();
    timed("rob", || invariants::ooo_occupancy_bounds_hold(&w));
}
