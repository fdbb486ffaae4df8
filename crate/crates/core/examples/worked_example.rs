//! The seven-by-six, three-component example taken through every reduction step.
//!
//! Usage: cargo run --example worked_example [seed]

fn main() -> dyadic_bellman::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let checks = dyadic_bellman::walkthrough::run(3, seed)?;
    for c in &checks {
        println!("{:<38} {:<6} {}", c.name, if c.passed { "ok" } else { "FAILED" }, c.detail);
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!("{} checks, {failed} failed", checks.len());
    Ok(())
}
