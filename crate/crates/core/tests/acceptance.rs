//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::process::ExitCode;

use funcoord::experiments;
use funcoord::tolerances::{Tolerances, CRITERIA};

const SEED: u64 = 20_240_601;

fn main() -> ExitCode {
    let report = match experiments::repro(SEED, &Tolerances::new()) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("acceptance suite aborted: {e}");
            return ExitCode::FAILURE;
        }
    };
    let mut failed = 0;
    for id in 1..=CRITERIA.len() as u8 {
        match report.criteria.iter().find(|c| c.id == Some(id)) {
            Some(c) => {
                println!("{}", c.line());
                failed += usize::from(!c.passed);
            }
            None => {
                println!("criterion {id:>2} FAIL {}  [not evaluated]", CRITERIA[id as usize - 1]);
                failed += 1;
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", CRITERIA.len() - failed, CRITERIA.len());
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
