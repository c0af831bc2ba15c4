//! Independent oracles for the embedded solver: brute-force vertex
//! enumeration for LPs, exhaustive binary enumeration for mixed-integer
//! instances, and random sampling for cut validity.

use ies_solver::{
    branch_and_bound, separate_cone, solve_lp, AffineExpr, ConicProgram, RowSense, SocRow,
    SolveStatus, SolverOptions,
};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------------------
// vertex enumeration oracle for small LPs
// ---------------------------------------------------------------------------

/// Solves an n x n dense system by Gaussian elimination; None if singular.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let mut piv = k;
        for i in (k + 1)..n {
            if a[i][k].abs() > a[piv][k].abs() {
                piv = i;
            }
        }
        if a[piv][k].abs() < 1e-10 {
            return None;
        }
        a.swap(k, piv);
        b.swap(k, piv);
        for i in (k + 1)..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let mut s = b[k];
        for j in (k + 1)..n {
            s -= a[k][j] * x[j];
        }
        x[k] = s / a[k][k];
    }
    Some(x)
}

/// Enumerates every vertex of { l <= x <= u, rows } (finite box assumed) and
/// returns the minimum objective over feasible vertices, or None when no
/// vertex is feasible.
fn vertex_enumeration_min(p: &ConicProgram) -> Option<f64> {
    let n = p.num_cols();
    // each hyperplane as (normal, rhs)
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for row in &p.rows {
        let mut normal = vec![0.0; n];
        for &(c, a) in &row.terms {
            normal[c] += a;
        }
        planes.push((normal, row.rhs));
    }
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), p.lower[j]));
        planes.push((e, p.upper[j]));
    }
    let feasible = |x: &[f64]| -> bool {
        for j in 0..n {
            if x[j] < p.lower[j] - 1e-7 || x[j] > p.upper[j] + 1e-7 {
                return false;
            }
        }
        for row in &p.rows {
            let lhs: f64 = row.terms.iter().map(|&(c, a)| a * x[c]).sum();
            let ok = match row.sense {
                RowSense::Le => lhs <= row.rhs + 1e-7,
                RowSense::Ge => lhs >= row.rhs - 1e-7,
                RowSense::Eq => (lhs - row.rhs).abs() <= 1e-7,
            };
            if !ok {
                return false;
            }
        }
        true
    };
    let k = planes.len();
    let mut best: Option<f64> = None;
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let a: Vec<Vec<f64>> = idx.iter().map(|&i| planes[i].0.clone()).collect();
        let b: Vec<f64> = idx.iter().map(|&i| planes[i].1).collect();
        if let Some(x) = solve_dense(a, b) {
            if feasible(&x) {
                let obj = p.objective_value(&x);
                best = Some(best.map_or(obj, |o: f64| o.min(obj)));
            }
        }
        // next combination
        let mut pos = n;
        loop {
            if pos == 0 {
                return best;
            }
            pos -= 1;
            if idx[pos] + (n - pos) < k {
                idx[pos] += 1;
                for q in (pos + 1)..n {
                    idx[q] = idx[q - 1] + 1;
                }
                break;
            }
        }
    }
}

fn random_lp(rng: &mut ChaCha8Rng) -> ConicProgram {
    let n = rng.gen_range(2..=4);
    let m = rng.gen_range(1..=5);
    let mut p = ConicProgram::new();
    for _ in 0..n {
        let lo = rng.gen_range(-4.0..0.0);
        let hi = lo + rng.gen_range(0.5..6.0);
        let obj = rng.gen_range(-2.0..2.0);
        p.add_col(lo, hi, false, obj);
    }
    // build rows around a random box point so many instances are feasible
    let x0: Vec<f64> = (0..n)
        .map(|j| rng.gen_range(p.lower[j]..p.upper[j]))
        .collect();
    for _ in 0..m {
        let mut terms = Vec::new();
        for j in 0..n {
            if rng.gen_bool(0.7) {
                terms.push((j, rng.gen_range(-3.0..3.0)));
            }
        }
        if terms.is_empty() {
            terms.push((0, 1.0));
        }
        let at_x0: f64 = terms.iter().map(|&(c, a)| a * x0[c]).sum();
        let (sense, rhs) = match rng.gen_range(0..3) {
            0 => (RowSense::Le, at_x0 + rng.gen_range(-1.0..2.0)),
            1 => (RowSense::Ge, at_x0 - rng.gen_range(-1.0..2.0)),
            _ => (RowSense::Eq, at_x0),
        };
        p.add_row(terms, sense, rhs);
    }
    p
}

#[test]
fn lp_matches_vertex_enumeration_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut feasible_count = 0;
    for case in 0..150 {
        let p = random_lp(&mut rng);
        let oracle = vertex_enumeration_min(&p);
        let got = solve_lp(&p).unwrap();
        match oracle {
            None => assert_eq!(
                got.status,
                SolveStatus::Infeasible,
                "case {case}: oracle says infeasible"
            ),
            Some(best) => {
                feasible_count += 1;
                assert_eq!(got.status, SolveStatus::Optimal, "case {case}");
                assert!(
                    (got.objective - best).abs() <= 1e-6 * (1.0 + best.abs()),
                    "case {case}: simplex {} vs enumeration {}",
                    got.objective,
                    best
                );
            }
        }
    }
    assert!(feasible_count > 60, "want a healthy feasible share");
}

// ---------------------------------------------------------------------------
// exhaustive binary enumeration for MIPs
// ---------------------------------------------------------------------------

fn enumerate_binaries(p: &ConicProgram, opts: &SolverOptions) -> Option<f64> {
    let bins: Vec<usize> = (0..p.num_cols()).filter(|&j| p.integer[j]).collect();
    assert!(bins.len() <= 14, "enumeration oracle capped");
    let mut best: Option<f64> = None;
    'mask: for mask in 0u32..(1 << bins.len()) {
        let mut q = p.clone();
        for (k, &j) in bins.iter().enumerate() {
            let v = if mask & (1 << k) != 0 { 1.0 } else { 0.0 };
            if v < q.lower[j] - 1e-9 || v > q.upper[j] + 1e-9 {
                continue 'mask;
            }
            q.lower[j] = v;
            q.upper[j] = v;
            q.integer[j] = false;
        }
        if let Ok(r) = branch_and_bound(&q, opts) {
            if r.status == SolveStatus::Optimal {
                best = Some(best.map_or(r.objective, |b: f64| b.min(r.objective)));
            }
        }
    }
    best
}

#[test]
fn knapsack_8_binaries_matches_enumeration() {
    let mut p = ConicProgram::new();
    let values = [12.0, 7.0, 11.0, 8.0, 9.0, 6.0, 5.0, 3.0];
    let weights = [4.0, 2.0, 5.0, 3.0, 4.0, 2.0, 1.0, 1.0];
    let cols: Vec<usize> = values.iter().map(|&v| p.add_col(0.0, 1.0, true, -v)).collect();
    p.add_row(
        cols.iter().zip(weights.iter()).map(|(&j, &w)| (j, w)).collect(),
        RowSense::Le,
        10.0,
    );
    let opts = SolverOptions::default();
    let bb = branch_and_bound(&p, &opts).unwrap();
    let oracle = enumerate_binaries(&p, &opts).unwrap();
    assert_eq!(bb.status, SolveStatus::Optimal);
    assert!((bb.objective - oracle).abs() < 1e-6);
}

/// Miniature commitment-shaped program: two units over six periods, binary
/// on/off with min/max output, ramping, and a shared demand balance with
/// expensive shedding.
fn two_unit_commitment_program() -> ConicProgram {
    let horizon = 6;
    let p_min = [0.2, 0.3];
    let p_max = [1.0, 0.9];
    let cost = [0.02, 0.028];
    let ramp = [0.5, 0.4];
    let demand = [0.4, 0.9, 1.4, 1.6, 1.1, 0.5];
    let shed_cost = 5.0;

    let mut p = ConicProgram::new();
    let mut commit = vec![vec![0usize; horizon]; 2];
    let mut above = vec![vec![0usize; horizon]; 2];
    let mut shed = vec![0usize; horizon];
    for i in 0..2 {
        for t in 0..horizon {
            commit[i][t] =
                p.add_named_col(format!("c{i}_{t}"), 0.0, 1.0, true, cost[i] * p_min[i]);
            above[i][t] = p.add_named_col(
                format!("pdf{i}_{t}"),
                0.0,
                p_max[i] - p_min[i],
                false,
                cost[i],
            );
        }
    }
    for t in 0..horizon {
        shed[t] = p.add_named_col(format!("np{t}"), 0.0, f64::INFINITY, false, shed_cost);
    }
    for i in 0..2 {
        for t in 0..horizon {
            // output above minimum only while committed
            p.add_row(
                vec![(above[i][t], 1.0), (commit[i][t], -(p_max[i] - p_min[i]))],
                RowSense::Le,
                0.0,
            );
            // ramping on recovered output c*p_min + above
            if t > 0 {
                let terms = vec![
                    (commit[i][t], p_min[i]),
                    (above[i][t], 1.0),
                    (commit[i][t - 1], -p_min[i]),
                    (above[i][t - 1], -1.0),
                ];
                p.add_row(terms.clone(), RowSense::Le, ramp[i]);
                p.add_row(
                    terms.into_iter().map(|(c, a)| (c, -a)).collect(),
                    RowSense::Le,
                    ramp[i],
                );
            }
        }
    }
    for t in 0..horizon {
        p.add_row(
            vec![
                (commit[0][t], p_min[0]),
                (above[0][t], 1.0),
                (commit[1][t], p_min[1]),
                (above[1][t], 1.0),
                (shed[t], 1.0),
            ],
            RowSense::Eq,
            demand[t],
        );
    }
    p
}

#[test]
fn unit_commitment_fixture_matches_enumeration() {
    let p = two_unit_commitment_program();
    let opts = SolverOptions {
        mip_gap: 1e-9,
        ..SolverOptions::default()
    };
    let bb = branch_and_bound(&p, &opts).unwrap();
    let oracle = enumerate_binaries(&p, &opts).unwrap();
    assert_eq!(bb.status, SolveStatus::Optimal);
    assert!(
        (bb.objective - oracle).abs() < 1e-6,
        "bb {} vs enumeration {}",
        bb.objective,
        oracle
    );
}

// ---------------------------------------------------------------------------
// random mixed-integer conic instances
// ---------------------------------------------------------------------------

fn random_mip_with_cones(rng: &mut ChaCha8Rng, with_cone: bool) -> ConicProgram {
    let nb = rng.gen_range(3..=8);
    let nc = rng.gen_range(1..=4);
    let mut p = ConicProgram::new();
    for _ in 0..nb {
        p.add_col(0.0, 1.0, true, rng.gen_range(-3.0..3.0));
    }
    for _ in 0..nc {
        p.add_col(0.0, rng.gen_range(1.0..5.0), false, rng.gen_range(-2.0..2.0));
    }
    let n = p.num_cols();
    let x0: Vec<f64> = (0..n)
        .map(|j| {
            if p.integer[j] {
                if rng.gen_bool(0.5) {
                    1.0
                } else {
                    0.0
                }
            } else {
                rng.gen_range(p.lower[j]..p.upper[j])
            }
        })
        .collect();
    for _ in 0..rng.gen_range(1..=4) {
        let mut terms = Vec::new();
        for j in 0..n {
            if rng.gen_bool(0.6) {
                terms.push((j, rng.gen_range(-2.0..2.0)));
            }
        }
        if terms.is_empty() {
            continue;
        }
        let at_x0: f64 = terms.iter().map(|&(c, a)| a * x0[c]).sum();
        if rng.gen_bool(0.5) {
            p.add_row(terms, RowSense::Le, at_x0 + rng.gen_range(0.0..1.5));
        } else {
            p.add_row(terms, RowSense::Ge, at_x0 - rng.gen_range(0.0..1.5));
        }
    }
    if with_cone {
        // 3-dimensional cone ||(a x_i + s, b x_j + t)|| <= x_k with the bound
        // column generous enough to stay feasible
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        let k = nb + rng.gen_range(0..nc);
        let a = rng.gen_range(0.3..1.2);
        let b = rng.gen_range(0.3..1.2);
        p.add_soc(
            vec![
                AffineExpr::new(vec![(i, a)], rng.gen_range(-0.5..0.5)),
                AffineExpr::new(vec![(j, b)], rng.gen_range(-0.5..0.5)),
            ],
            AffineExpr::var(k, 1.0),
        );
    }
    p
}

#[test]
fn random_conic_mips_match_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let opts = SolverOptions {
        mip_gap: 1e-9,
        ..SolverOptions::default()
    };
    let mut solved = 0;
    for case in 0..25 {
        let p = random_mip_with_cones(&mut rng, case % 2 == 0);
        let bb = branch_and_bound(&p, &opts).unwrap();
        let oracle = enumerate_binaries(&p, &opts);
        match oracle {
            None => assert_eq!(bb.status, SolveStatus::Infeasible, "case {case}"),
            Some(best) => {
                solved += 1;
                assert_eq!(bb.status, SolveStatus::Optimal, "case {case}");
                assert!(
                    (bb.objective - best).abs() <= 1e-6 * (1.0 + best.abs()),
                    "case {case}: bb {} vs enum {}",
                    bb.objective,
                    best
                );
            }
        }
    }
    assert!(solved >= 15);
}

// ---------------------------------------------------------------------------
// cut validity by sampling
// ---------------------------------------------------------------------------

#[test]
fn generated_cuts_never_exclude_cone_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _case in 0..40 {
        let dim = rng.gen_range(2..=3);
        let members: Vec<AffineExpr> = (0..dim)
            .map(|k| AffineExpr::new(vec![(k, rng.gen_range(0.2..2.0))], rng.gen_range(-1.0..1.0)))
            .collect();
        let bound = AffineExpr::new(vec![(dim, rng.gen_range(0.5..2.0))], rng.gen_range(0.0..0.5));
        let cone = SocRow {
            members: members.clone(),
            bound: bound.clone(),
        };
        // random point, often violated
        let x: Vec<f64> = (0..=dim).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let Some(cuts) = separate_cone(&x, &cone, 1e-9) else {
            continue;
        };
        // sample cone-feasible points: pick member values freely, then set
        // the bound column large enough
        for _ in 0..1000 {
            let mut pt: Vec<f64> = (0..=dim).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let norm: f64 = members
                .iter()
                .map(|m| {
                    let u = m.eval(&pt);
                    u * u
                })
                .sum::<f64>()
                .sqrt();
            // bound expr: coef * x_dim + const >= norm
            let coef = bound.terms[0].1;
            pt[dim] = (norm * (1.0 + 1e-9) - bound.constant) / coef + 1e-9;
            debug_assert!(cone.violation(&pt) <= 1e-6);
            for cut in &cuts {
                let lhs: f64 = cut.terms.iter().map(|&(c, a)| a * pt[c]).sum();
                assert!(
                    lhs <= cut.rhs + 1e-7,
                    "cut excluded a cone-feasible point"
                );
            }
        }
    }
}
