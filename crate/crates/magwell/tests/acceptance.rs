//! Acceptance suite: runs every criterion at its stated tolerance and prints
//! one pass/fail line per criterion. Runs serially (no test harness) so the
//! per-criterion runtime budgets are measured without contention.

fn main() {
    let started = std::time::Instant::now();
    let results = magwell::acceptance::run_all();
    let mut failures = 0;
    for r in &results {
        println!("{}", r.line());
        if !r.passed {
            failures += 1;
        }
    }
    println!(
        "acceptance: {}/{} criteria passed in {:.1}s",
        results.len() - failures,
        results.len(),
        started.elapsed().as_secs_f64()
    );
    if failures > 0 {
        std::process::exit(101);
    }
}
