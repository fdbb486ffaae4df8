//! Hand-computed values, frozen before the implementation was run against them.

use dyadic_bellman::dyadic::{DyadicSquare, Grid2D};
use dyadic_bellman::estimates::{sharpness_closed_form, sharpness_probe};
use dyadic_bellman::partition::{enumerate_omega, integer_partition_count, PartitionTypes};
use dyadic_bellman::term::{box_difference, evaluate, numeric_box, parse_term, Bundle};

/// `F` on the unit square at resolution 1: cells (x,y) = (0,0):1, (1,0):2, (0,1):3, (1,1):4.
fn staircase() -> Bundle {
    let g = Grid2D::new(DyadicSquare::unit(), 1, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
    Bundle::new().with("F", g).unwrap()
}

#[test]
fn cube_row_by_hand() {
    // Row means 1.5 and 3.5: B = (1.5³ + 3.5³)/2 = 23.125; cells give (1+8+27+64)/4 = 25.
    let f = staircase();
    let q = DyadicSquare::unit();
    let b = parse_term("avg[y](avg[x](F(x,y))^3)").unwrap();
    assert_eq!(evaluate(&b, &q, &f).unwrap(), 23.125);
    let kids: f64 = q.children().iter().map(|c| evaluate(&b, c, &f).unwrap()).sum();
    assert_eq!(kids / 4.0, 25.0);
    assert_eq!(numeric_box(&b, &q, &f).unwrap(), 1.875);
    // 3 ⟨⟨F⟩_x [F]_x²⟩_y = 3 · (1.5·0.25 + 3.5·0.25)/2 = 1.875.
    assert_eq!(box_difference(&b).unwrap().evaluate(&q, &f).unwrap(), 1.875);
}

#[test]
fn square_row_by_hand() {
    // ⟨F⟩² = 6.25, mean of F² over cells = 7.5; the three terms are 0.25, 1 and 0.
    let f = staircase();
    let q = DyadicSquare::unit();
    let b = parse_term("avg[x,y](F(x,y))^2").unwrap();
    assert_eq!(evaluate(&b, &q, &f).unwrap(), 6.25);
    assert_eq!(numeric_box(&b, &q, &f).unwrap(), 1.25);
    let parts = [
        ("avg[y](dif[x](F(x,y)))^2", 0.25),
        ("dif[y](avg[x](F(x,y)))^2", 1.0),
        ("dif[x,y](F(x,y))^2", 0.0),
    ];
    for (t, v) in parts {
        assert_eq!(evaluate(&parse_term(t).unwrap(), &q, &f).unwrap(), v, "{t}");
    }
}

#[test]
fn partition_counts() {
    let want = [1, 2, 3, 5, 7, 11, 15];
    for (n, w) in (1..=7).zip(want) {
        assert_eq!(integer_partition_count(n), w);
    }
    assert_eq!(PartitionTypes::new(2, 3).len(), 6);
    assert_eq!(PartitionTypes::new(2, 4).len(), 10);
    // Ω_{1,1}: one copy per side, so even selections are empty and none is allowed.
    assert!(enumerate_omega(1, 1).is_empty());
    // Ω_{2,1}: a ∈ {(2,0),(1,1),(0,2)}, b = (1), β = 0, α = a.
    assert_eq!(enumerate_omega(2, 1).len(), 3);
}

#[test]
fn sharpness_by_hand() {
    // m = n = 2, f = g = 1_{[0,2^-k)}: ⟨f²⟩²⟨g²⟩² = 2^{-4k}; (⟨f^d⟩^{1/d})^4 (⟨g^d⟩^{1/d})^4 = 2^{-8k/d}.
    let v = sharpness_probe(2, 2, 1.0, 4).unwrap();
    assert_eq!(v, vec![16.0, 256.0, 4096.0, 65536.0]);
    let v = sharpness_probe(2, 2, 2.0, 4).unwrap();
    assert!(v.iter().all(|&x| (x - 1.0).abs() < 1e-12));
    assert_eq!(sharpness_closed_form(2, 3, 2.0, 2), 2f64.powi(2));
}
