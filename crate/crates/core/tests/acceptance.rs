//! Acceptance suite: one verdict line per criterion, non-zero exit on failure.

use std::process::ExitCode;

use rabi_core::checks::{faulty_energy_explicit, CheckSuite, Evaluators};

fn main() -> ExitCode {
    let outcomes = match CheckSuite::default().run_all() {
        Ok(o) => o,
        Err(e) => {
            eprintln!("acceptance suite could not evaluate: {e}");
            return ExitCode::FAILURE;
        }
    };
    for o in &outcomes {
        println!("{o}");
    }
    let passed = outcomes.iter().filter(|o| o.passed()).count();
    println!("acceptance: {passed}/{} criteria passed", outcomes.len());

    // the suite must notice a detuned closed-form energy
    let faulty = CheckSuite::with_evaluators(Evaluators { energy_explicit: faulty_energy_explicit });
    let caught = faulty.run_quick().map(|o| o.iter().any(|c| !c.passed())).unwrap_or(false);
    println!("acceptance: detuned closed form detected: {caught}");

    if passed == outcomes.len() && outcomes.len() == 11 && caught {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
