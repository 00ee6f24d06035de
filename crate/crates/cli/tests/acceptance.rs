//! Full acceptance battery, one line per criterion. Set
//! `BBSPECTRA_ACCEPTANCE_QUICK=1` for the reduced grids.

use bbspectra_cli::battery::{run_battery, BatteryOptions};

fn main() {
    let quick = std::env::var("BBSPECTRA_ACCEPTANCE_QUICK").is_ok_and(|v| v == "1");
    let opts = BatteryOptions {
        quick,
        ..BatteryOptions::default()
    };
    let report = run_battery(&opts, |r| {
        println!("{}", r.line());
        for n in &r.notes {
            println!("    note: {n}");
        }
    });
    println!(
        "acceptance: {} passed, {} inconclusive, {} failed",
        report.passed, report.inconclusive, report.failed
    );
    if !report.ok(false) {
        std::process::exit(1);
    }
}
