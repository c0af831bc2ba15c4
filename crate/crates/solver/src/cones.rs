//! Outer-approximation cuts for second-order cone rows.

use crate::program::{AffineExpr, LinearRow, RowSense, SocRow};

/// Builds the supporting-hyperplane cut for `||u(x)|| <= v(x)` at a violated
/// point, or `None` when the point satisfies the cone within `tol`.
///
/// At a point with `||u0|| > 0` the cut is `(u0/||u0||) . u(x) <= v(x)`,
/// which every cone-feasible point satisfies (Cauchy-Schwarz) and the
/// violated point does not. A zero-norm violated point (possible only when
/// `v(x) < 0`) gets componentwise box cuts `+-u_i(x) <= v(x)` instead.
pub fn separate_cone(point: &[f64], cone: &SocRow, tol: f64) -> Option<Vec<LinearRow>> {
    let u0: Vec<f64> = cone.members.iter().map(|m| m.eval(point)).collect();
    let v0 = cone.bound.eval(point);
    let norm = u0.iter().map(|u| u * u).sum::<f64>().sqrt();
    if norm - v0 <= tol {
        return None;
    }
    if norm <= tol {
        // v(x) < -tol here; box cuts |u_i| <= v cover the violation
        let mut cuts = Vec::new();
        for member in &cone.members {
            cuts.push(affine_le(member, &cone.bound, 1.0));
            cuts.push(affine_le(member, &cone.bound, -1.0));
        }
        return Some(cuts);
    }
    // gradient g = u0 / ||u0||; cut: sum_i g_i u_i(x) - v(x) <= 0
    let mut terms: Vec<(usize, f64)> = Vec::new();
    let mut constant = 0.0;
    for (g_raw, member) in u0.iter().zip(&cone.members) {
        let g = g_raw / norm;
        constant += g * member.constant;
        for &(col, coef) in &member.terms {
            terms.push((col, g * coef));
        }
    }
    constant -= cone.bound.constant;
    for &(col, coef) in &cone.bound.terms {
        terms.push((col, -coef));
    }
    Some(vec![LinearRow {
        terms: merge_terms(terms),
        sense: RowSense::Le,
        rhs: -constant,
    }])
}

/// `sign * member(x) <= bound(x)` as a linear row.
fn affine_le(member: &AffineExpr, bound: &AffineExpr, sign: f64) -> LinearRow {
    let mut terms: Vec<(usize, f64)> = Vec::new();
    for &(col, coef) in &member.terms {
        terms.push((col, sign * coef));
    }
    for &(col, coef) in &bound.terms {
        terms.push((col, -coef));
    }
    LinearRow {
        terms: merge_terms(terms),
        sense: RowSense::Le,
        rhs: bound.constant - sign * member.constant,
    }
}

fn merge_terms(mut terms: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    terms.sort_by_key(|&(col, _)| col);
    let mut merged: Vec<(usize, f64)> = Vec::with_capacity(terms.len());
    for (col, coef) in terms {
        match merged.last_mut() {
            Some((last_col, last_coef)) if *last_col == col => *last_coef += coef,
            _ => merged.push((col, coef)),
        }
    }
    merged.retain(|&(_, coef)| coef != 0.0);
    merged
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::AffineExpr;

    fn cone3(u1: usize, u2: usize, v: usize, scale: f64) -> SocRow {
        SocRow {
            members: vec![AffineExpr::var(u1, scale), AffineExpr::var(u2, scale)],
            bound: AffineExpr::var(v, 1.0),
        }
    }

    fn eval_row(row: &LinearRow, x: &[f64]) -> f64 {
        row.terms.iter().map(|&(c, a)| a * x[c]).sum::<f64>() - row.rhs
    }

    #[test]
    fn violated_point_gets_cut_that_separates() {
        // point u=(3,4), v=4: violated since 5 > 4
        let cone = cone3(0, 1, 2, 1.0);
        let x = [3.0, 4.0, 4.0];
        let cuts = separate_cone(&x, &cone, 1e-9).expect("violated");
        assert_eq!(cuts.len(), 1);
        // the violated point fails the cut
        assert!(eval_row(&cuts[0], &x) > 1e-9);
        // expected cut 0.6 u1 + 0.8 u2 <= v
        let coefs: Vec<f64> = cuts[0].terms.iter().map(|&(_, a)| a).collect();
        assert!((coefs[0] - 0.6).abs() < 1e-12);
        assert!((coefs[1] - 0.8).abs() < 1e-12);
        assert!((coefs[2] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn interior_point_no_cut() {
        let cone = cone3(0, 1, 2, 1.0);
        assert!(separate_cone(&[0.0, 0.0, 1.0], &cone, 1e-9).is_none());
    }

    #[test]
    fn boundary_point_no_cut() {
        let cone = cone3(0, 1, 2, 1.0);
        assert!(separate_cone(&[3.0, 4.0, 5.0], &cone, 1e-9).is_none());
    }

    #[test]
    fn zero_norm_violation_box_cuts() {
        let cone = cone3(0, 1, 2, 1.0);
        let x = [0.0, 0.0, -1.0];
        let cuts = separate_cone(&x, &cone, 1e-9).expect("violated");
        assert_eq!(cuts.len(), 4);
        assert!(cuts.iter().any(|c| eval_row(c, &x) > 1e-9));
    }

    #[test]
    fn cuts_valid_for_sampled_cone_points() {
        // sample cone-feasible points on a grid and check the cut never
        // excludes them
        let cone = cone3(0, 1, 2, 1.0);
        let x = [3.0, 4.0, 4.0];
        let cuts = separate_cone(&x, &cone, 1e-9).unwrap();
        let mut n = 0;
        for i in -10..=10 {
            for j in -10..=10 {
                let (u1, u2) = (i as f64 * 0.7, j as f64 * 0.7);
                let v = (u1 * u1 + u2 * u2).sqrt() * 1.001 + 1e-9;
                let p = [u1, u2, v];
                for c in &cuts {
                    assert!(
                        eval_row(c, &p) <= 1e-7,
                        "cut excludes cone point {p:?}"
                    );
                }
                n += 1;
            }
        }
        assert!(n > 400);
    }
}
