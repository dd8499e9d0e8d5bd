//! Runs every acceptance criterion and prints one line per criterion.
//! Built without the libtest harness so the lines show up in plain `cargo test`.

use std::process::ExitCode;

use mds_core::numeric::Tolerances;
use mds_core::selftest::run_all;

fn main() -> ExitCode {
    let results = run_all(&Tolerances::default());
    for r in &results {
        println!("{r}");
    }
    let failed: Vec<usize> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    if failed.is_empty() {
        println!("acceptance: {} of {} criteria passed", results.len(), results.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
