//! Symbolic first-order differences of averaging terms.
//!
//! Usage: cargo run --example expand_terms ['avg[y](avg[x](F(x,y))^3)' ...]

use dyadic_bellman::term::{box_difference, box_difference_raw, parse_term};

fn main() -> dyadic_bellman::Result<()> {
    let mut terms: Vec<String> = std::env::args().skip(1).collect();
    if terms.is_empty() {
        terms = vec![
            "avg[y](avg[x](F(x,y))^3)".into(),
            "avg[x,y](F(x,y))^2".into(),
            "avg[x,x'](avg[y](F(x,y)*G(x',y))^2)".into(),
        ];
    }
    for s in &terms {
        let b = parse_term(s)?;
        let raw = box_difference_raw(&b)?.len();
        println!("B     = {}", b.pretty());
        println!("Box B = {}", box_difference(&b)?.pretty());
        println!("        ({raw} summands before merging)\n");
    }
    Ok(())
}
