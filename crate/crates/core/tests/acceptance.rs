//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use dyadic_bellman::cli::{
    box_identity_check, even_subset_checks, operand_scale, table_checks, telescope_check, term_count_check,
};
use dyadic_bellman::dyadic::{active_squares, DyadicSquare};
use dyadic_bellman::estimates::{global_ratio, sharpness_probe, stopping_decomposition, ExponentTuple};
use dyadic_bellman::gen::{self, bundle_for, complete_bundle, GenKind};
use dyadic_bellman::graph::{lambda_sum, local_terms, BipartiteSpec};
use dyadic_bellman::partition::{
    binomial, box_expansion, box_expansion_check, case1_check, case1_choices, compositions, dominate_general_term,
    enumerate_omega, omega_q, reduction_graph, term_of_partition, PartitionTypes,
};
use dyadic_bellman::term::{box_difference, evaluate, Axis, Bundle};
use rand::Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let took = start.elapsed();
    if let Some(limit) = limit {
        if took > limit {
            o.passed = false;
        }
        o.detail = format!("{} ({:.2}s, limit {}s)", o.detail, took.as_secs_f64(), limit.as_secs());
    }
    o
}

fn unit() -> DyadicSquare {
    DyadicSquare::unit()
}

fn c1_box_identity() -> Outcome {
    let c = box_identity_check(GenKind::Random, 4, 101, 200).unwrap();
    outcome(c.passed, c.detail)
}

fn c2_table() -> Outcome {
    let cs = table_checks().unwrap();
    outcome(cs.iter().all(|c| c.passed), format!("{} rows", cs.iter().filter(|c| c.passed).count()))
}

fn c3_term_count() -> Outcome {
    let c = term_count_check(6).unwrap();
    outcome(c.passed, c.detail)
}

fn c4_even_subset() -> Outcome {
    let cs = even_subset_checks(GenKind::Random, 4, 202, 100).unwrap();
    let detail: Vec<String> = cs.iter().map(|c| format!("{}: {}", c.name, c.detail)).collect();
    outcome(cs.iter().all(|c| c.passed), detail.join("; "))
}

fn c5_telescope() -> Outcome {
    let c = telescope_check(GenKind::Random, 5, 303, 100).unwrap();
    outcome(c.passed, c.detail)
}

fn c6_partitions() -> Outcome {
    let types = PartitionTypes::new(2, 3);
    let got: Vec<String> = types.types().iter().map(|t| format!("{}:{}", t.rank, t)).collect();
    let want = [
        "1:(2,0; 3,0,0)",
        "2:(2,0; 2,1,0)",
        "3:(2,0; 1,1,1)",
        "4:(1,1; 3,0,0)",
        "5:(1,1; 2,1,0)",
        "6:(1,1; 1,1,1)",
    ];
    let chain = got == want;
    let t24 = PartitionTypes::new(2, 4);
    let count = t24.len() == 10;
    let g = reduction_graph(2, 4);
    let graph = g.types.len() == 10 && g.every_node_descends() && g.inv_delta_decreases() && g.inv_delta_acyclic();
    outcome(
        chain && count && graph,
        format!("chain {chain}, |types(2,4)| = {}, reduction graph ok {graph}", t24.len()),
    )
}

fn c7_multiplicities() -> Outcome {
    let mut ok = true;
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for (m, n) in [(2, 2), (2, 3)] {
        for q in compositions(m, n) {
            ok &= box_difference(&dyadic_bellman::partition::composition_term(&q)).unwrap() == box_expansion(&q);
            for p in omega_q(&q) {
                let prod: u64 = p.a.iter().zip(&p.alpha).map(|(&a, &al)| binomial(a, al)).product::<u64>()
                    * p.b.iter().zip(&p.beta).map(|(&b, &be)| binomial(b, be)).product::<u64>();
                ok &= prod == p.multiplicity();
            }
            for seed in 0..5 {
                let fns = complete_bundle(m, n, GenKind::Random, unit(), 4, 700 + seed).unwrap();
                let mut rng = gen::rng(seed);
                let depth = rng.gen_range(0..=2);
                let sq = unit().descendants_at(depth)[rng.gen_range(0..1usize << (2 * depth))];
                let (lhs, rhs) = box_expansion_check(&q, &sq, &fns).unwrap();
                let b = dyadic_bellman::partition::composition_term(&q);
                let floor = operand_scale(&b, &sq, &fns).unwrap();
                let err = (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(floor);
                worst = worst.max(err);
                ok &= err <= 1e-10;
                cases += 1;
            }
        }
    }
    outcome(ok, format!("{cases} numeric cases, worst relative error {worst:.2e}"))
}

fn c8_reductions() -> Outcome {
    let mut ok = true;
    let mut checks = 0;
    let mut worst = f64::NEG_INFINITY;
    for (m, n) in [(2, 2), (2, 3)] {
        let omega = enumerate_omega(m, n);
        let xs: Vec<usize> = (1..=m).collect();
        let mut general = BipartiteSpec::new(m, n, &[], &[1, 2], &[]);
        general.edges = xs.iter().flat_map(|&i| (1..=n).map(move |j| (i, j))).collect();
        for seed in 0..50u64 {
            let fns: Bundle = complete_bundle(m, n, GenKind::Random, unit(), 3, 8000 + seed).unwrap();
            let mut rng = gen::rng(seed);
            let depth = rng.gen_range(0..=2);
            let sq = unit().descendants_at(depth)[rng.gen_range(0..1usize << (2 * depth))];
            for delta in [0.25, 0.5] {
                for p in &omega {
                    for (axis, i1, i2) in case1_choices(p) {
                        let r = case1_check(p, axis, i1, i2, delta, &sq, &fns).unwrap();
                        ok &= r.holds();
                        worst = worst.max(r.lhs - r.rhs);
                        checks += 1;
                    }
                }
            }
            for (i1, i2) in [(1, 2), (2, 1)] {
                let r = dominate_general_term(&general, Axis::X, i1, i2).unwrap();
                let a = evaluate(&general.term(), &sq, &fns).unwrap().abs();
                let t = evaluate(&term_of_partition(&r.tilde), &sq, &fns).unwrap();
                let b = evaluate(&term_of_partition(&r.bar), &sq, &fns).unwrap();
                ok &= a <= 0.5 * t + 0.5 * b + 1e-12;
                worst = worst.max(a - 0.5 * t - 0.5 * b);
                checks += 1;
            }
        }
    }
    outcome(ok, format!("{checks} inequalities, worst lhs - rhs {worst:.3e}"))
}

fn c9_dilation() -> Outcome {
    let spec = BipartiteSpec::twisted_paraproduct();
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for seed in 0..5 {
        let b = bundle_for(&spec, unit(), 4, 900 + seed).unwrap();
        let grids: Vec<_> = b.iter().map(|(_, g)| g).collect();
        let sq = active_squares(&grids, 2).unwrap();
        for l in [1, 2] {
            let bd = b.dilate(l);
            let gd: Vec<_> = bd.iter().map(|(_, g)| g).collect();
            let sqd = active_squares(&gd, 2).unwrap();
            for absolute in [false, true] {
                let base = lambda_sum(&spec, &b, &sq, absolute).unwrap();
                let dil = lambda_sum(&spec, &bd, &sqd, absolute).unwrap();
                let want = base * 4f64.powi(l);
                let err = (dil - want).abs() / want.abs().max(f64::MIN_POSITIVE);
                worst = worst.max(err);
                ok &= err <= 1e-12;
            }
        }
    }
    outcome(ok, format!("worst relative error {worst:.2e}"))
}

fn c10_isolated() -> Outcome {
    let spec = BipartiteSpec::new(3, 2, &[(1, 1), (1, 2), (2, 1)], &[1, 2, 3], &[]);
    let mut ok = true;
    for seed in 0..10 {
        let b = bundle_for(&spec, unit(), 4, 1000 + seed).unwrap();
        let grids: Vec<_> = b.iter().map(|(_, g)| g).collect();
        let sq = active_squares(&grids, 2).unwrap();
        ok &= lambda_sum(&spec, &b, &sq, false).unwrap().to_bits() == 0;
        ok &= lambda_sum(&spec, &b, &sq, true).unwrap().to_bits() == 0;
        ok &= local_terms(&spec, &b, &sq).unwrap().iter().all(|v| *v == 0.0);
    }
    outcome(ok, "x3 selected and isolated, 10 seeds")
}

fn c11_stopping() -> Outcome {
    let spec = BipartiteSpec::twisted_paraproduct();
    let exps = ExponentTuple::new(&spec, &[3.0, 3.0, 3.0]).unwrap();
    let mut ok = true;
    let mut trees = 0;
    for seed in 0..3 {
        let b = bundle_for(&spec, unit(), 4, 1100 + seed).unwrap();
        let dec = stopping_decomposition(&spec, &b, &exps, 2).unwrap();
        for name in ["covers_nonzero_terms", "trees_convex", "maximal_squares_disjoint", "size_bound", "stratum_sum_matches"] {
            ok &= dec.checks.iter().any(|c| c.name == name && c.passed);
        }
        ok &= dec.passed();
        trees += dec.tree_count();
    }
    outcome(ok, format!("3 seeds, {trees} trees"))
}

fn c12_global_ratio() -> Outcome {
    let raw = include_str!("data/global_ratio_baseline.json");
    let v: serde_json::Value = serde_json::from_str(raw).unwrap();
    let base = v["mean_ratio"].as_f64().unwrap();
    let spec = BipartiteSpec::twisted_paraproduct();
    let exps = ExponentTuple::new(&spec, &[3.0, 3.0, 3.0]).unwrap();
    let mut ok = true;
    let (mut lo, mut hi) = (f64::INFINITY, 0f64);
    for res in 3..=5 {
        for seed in 0..10 {
            let b = bundle_for(&spec, unit(), res, seed).unwrap();
            let r = global_ratio(&spec, &b, &exps, 0).unwrap();
            ok &= r.is_finite() && r >= base / 2.0 && r <= base * 2.0;
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    outcome(ok, format!("baseline {base:.6}, observed [{lo:.6}, {hi:.6}]"))
}

fn c13_sharpness() -> Outcome {
    let grow = sharpness_probe(2, 2, 1.0, 8).unwrap();
    let flat = sharpness_probe(2, 2, 2.0, 8).unwrap();
    let increasing = grow.windows(2).all(|w| w[1] > w[0]);
    let factor = grow[7] / grow[0];
    let bounded = flat.iter().all(|&v| v <= flat[0] * 1.01 && v >= flat[0] / 1.01);
    outcome(
        increasing && factor >= 4.0 && bounded,
        format!("d=1 growth x{factor:.3e}, d=2 range [{:.6}, {:.6}]", flat.iter().cloned().fold(f64::INFINITY, f64::min), flat.iter().cloned().fold(0.0, f64::max)),
    )
}

fn c14_walkthrough() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_dyadic-bellman");
    let mut ok = true;
    let mut lines = 0;
    for seed in [1, 2, 3] {
        let out = Command::new(exe)
            .args(["example-s5", "--res", "3", "--seed", &seed.to_string()])
            .output()
            .expect("binary runs");
        ok &= out.status.success();
        let text = String::from_utf8_lossy(&out.stdout);
        lines += text.lines().count();
        ok &= text.lines().all(|l| l.contains("\"passed\":true"));
    }
    outcome(ok, format!("3 seeds, {lines} checks"))
}

fn main() -> ExitCode {
    let criteria: Vec<(u32, Option<u64>, fn() -> Outcome)> = vec![
        (1, Some(30), c1_box_identity),
        (2, None, c2_table),
        (3, None, c3_term_count),
        (4, None, c4_even_subset),
        (5, None, c5_telescope),
        (6, None, c6_partitions),
        (7, None, c7_multiplicities),
        (8, None, c8_reductions),
        (9, None, c9_dilation),
        (10, None, c10_isolated),
        (11, Some(60), c11_stopping),
        (12, None, c12_global_ratio),
        (13, None, c13_sharpness),
        (14, Some(120), c14_walkthrough),
    ];
    let mut failed = 0;
    for (id, limit, f) in criteria {
        let o = timed(limit.map(Duration::from_secs), f);
        println!("criterion {id}: {} - {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        if !o.passed {
            failed += 1;
        }
    }
    if failed == 0 {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
