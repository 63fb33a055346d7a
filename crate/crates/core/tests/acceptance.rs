//! One line per acceptance criterion: the verification outcome plus the
//! wall-clock budget where one applies.

use std::time::{Duration, Instant};

use ratiokit::haar_mc::{seed_from_env, DEFAULT_SEED};
use ratiokit::verify::{run_criterion, CRITERIA};

fn budget(id: u8) -> Option<Duration> {
    match id {
        1 => Some(Duration::from_millis(1)),
        2 | 5 => Some(Duration::from_secs(1)),
        3 => Some(Duration::from_secs(300)),
        4 | 10 => Some(Duration::from_secs(120)),
        9 => Some(Duration::from_secs(60)),
        _ => None,
    }
}

fn main() {
    let seed = seed_from_env().expect("seed variable parses").unwrap_or(DEFAULT_SEED);
    // warm the thread pool so it is not charged to the first criterion
    rayon::broadcast(|_| ());
    let mut failed = Vec::new();
    for id in 1..=CRITERIA.len() as u8 {
        let start = Instant::now();
        let outcome = run_criterion(id, seed);
        let elapsed = start.elapsed();
        let in_time = budget(id).is_none_or(|b| elapsed < b);
        let passed = outcome.passed && in_time;
        let limit = budget(id).map_or(String::new(), |b| format!(" (budget {b:?})"));
        println!(
            "{} criterion {:>2} {}: {}; {elapsed:.2?}{limit}",
            if passed { "PASS" } else { "FAIL" },
            id,
            outcome.name,
            outcome.detail
        );
        if !passed {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
