//! Problem container for the embedded solver: linear rows, second-order cone
//! rows, bounds, integrality and a linear minimization objective.

use crate::SolverError;

/// Affine expression `sum(coef_j * x_j) + constant`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AffineExpr {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl AffineExpr {
    pub fn new(terms: Vec<(usize, f64)>, constant: f64) -> Self {
        Self { terms, constant }
    }

    pub fn var(col: usize, coef: f64) -> Self {
        Self {
            terms: vec![(col, coef)],
            constant: 0.0,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut v = self.constant;
        for &(col, coef) in &self.terms {
            v += coef * x[col];
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Ge,
    Eq,
}

/// Sparse linear constraint `terms <sense> rhs`.
#[derive(Debug, Clone)]
pub struct LinearRow {
    pub terms: Vec<(usize, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

/// Second-order cone constraint `||members|| <= bound`, all entries affine.
#[derive(Debug, Clone)]
pub struct SocRow {
    pub members: Vec<AffineExpr>,
    pub bound: AffineExpr,
}

impl SocRow {
    /// Signed violation at a point: `||u(x)|| - v(x)`; positive means violated.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let norm = self
            .members
            .iter()
            .map(|m| {
                let u = m.eval(x);
                u * u
            })
            .sum::<f64>()
            .sqrt();
        norm - self.bound.eval(x)
    }
}

/// A mixed-integer program with linear and second-order cone constraints,
/// always minimization. The objective is purely linear plus a constant.
#[derive(Debug, Clone, Default)]
pub struct ConicProgram {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub integer: Vec<bool>,
    pub objective: Vec<f64>,
    pub objective_constant: f64,
    pub rows: Vec<LinearRow>,
    pub soc_rows: Vec<SocRow>,
    /// Optional column names used by the exchange format and debug dumps.
    pub names: Vec<String>,
}

impl ConicProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_cols(&self) -> usize {
        self.lower.len()
    }

    /// Adds a column and returns its index.
    pub fn add_col(&mut self, lower: f64, upper: f64, integer: bool, obj: f64) -> usize {
        let idx = self.lower.len();
        self.lower.push(lower);
        self.upper.push(upper);
        self.integer.push(integer);
        self.objective.push(obj);
        self.names.push(format!("x{idx}"));
        idx
    }

    pub fn add_named_col(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
        integer: bool,
        obj: f64,
    ) -> usize {
        let idx = self.add_col(lower, upper, integer, obj);
        self.names[idx] = name.into();
        idx
    }

    pub fn add_row(&mut self, terms: Vec<(usize, f64)>, sense: RowSense, rhs: f64) -> usize {
        self.rows.push(LinearRow { terms, sense, rhs });
        self.rows.len() - 1
    }

    pub fn add_soc(&mut self, members: Vec<AffineExpr>, bound: AffineExpr) -> usize {
        self.soc_rows.push(SocRow { members, bound });
        self.soc_rows.len() - 1
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective_constant
            + self
                .objective
                .iter()
                .zip(x)
                .map(|(c, v)| c * v)
                .sum::<f64>()
    }

    /// Structural well-formedness: bound ordering, finite integer bounds,
    /// in-range column references, cones with at least two participants.
    pub fn validate(&self) -> Result<(), SolverError> {
        let n = self.num_cols();
        for j in 0..n {
            if self.lower[j] > self.upper[j] {
                return Err(SolverError::InvalidProgram(format!(
                    "column {j} has lower bound {} above upper bound {}",
                    self.lower[j], self.upper[j]
                )));
            }
            if self.integer[j] && !(self.lower[j].is_finite() && self.upper[j].is_finite()) {
                return Err(SolverError::InvalidProgram(format!(
                    "integer column {j} must have finite bounds"
                )));
            }
        }
        let check_terms = |terms: &[(usize, f64)], what: &str| -> Result<(), SolverError> {
            for &(col, coef) in terms {
                if col >= n {
                    return Err(SolverError::InvalidProgram(format!(
                        "{what} references column {col} out of {n}"
                    )));
                }
                if !coef.is_finite() {
                    return Err(SolverError::InvalidProgram(format!(
                        "{what} has non-finite coefficient on column {col}"
                    )));
                }
            }
            Ok(())
        };
        for (i, row) in self.rows.iter().enumerate() {
            check_terms(&row.terms, &format!("row {i}"))?;
            if !row.rhs.is_finite() {
                return Err(SolverError::InvalidProgram(format!(
                    "row {i} has non-finite rhs"
                )));
            }
        }
        for (i, soc) in self.soc_rows.iter().enumerate() {
            // bound + members together form the cone; require >= 2 entries total
            if soc.members.is_empty() {
                return Err(SolverError::InvalidProgram(format!(
                    "cone {i} has no members"
                )));
            }
            for m in soc.members.iter().chain(std::iter::once(&soc.bound)) {
                check_terms(&m.terms, &format!("cone {i}"))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_eval() {
        let e = AffineExpr::new(vec![(0, 2.0), (2, -1.0)], 0.5);
        assert_eq!(e.eval(&[1.0, 9.0, 3.0]), 2.0 - 3.0 + 0.5);
    }

    #[test]
    fn validate_rejects_unbounded_integer() {
        let mut p = ConicProgram::new();
        p.add_col(0.0, f64::INFINITY, true, 1.0);
        assert!(p.validate().is_err());
    }

    #[test]
    fn validate_rejects_dangling_column() {
        let mut p = ConicProgram::new();
        p.add_col(0.0, 1.0, false, 1.0);
        p.add_row(vec![(3, 1.0)], RowSense::Le, 0.0);
        assert!(p.validate().is_err());
    }

    #[test]
    fn soc_violation_sign() {
        let mut p = ConicProgram::new();
        let a = p.add_col(0.0, 10.0, false, 0.0);
        let b = p.add_col(0.0, 10.0, false, 0.0);
        let t = p.add_col(0.0, 10.0, false, 0.0);
        let soc = SocRow {
            members: vec![AffineExpr::var(a, 1.0), AffineExpr::var(b, 1.0)],
            bound: AffineExpr::var(t, 1.0),
        };
        let mut x = vec![0.0; p.num_cols()];
        x[a] = 3.0;
        x[b] = 4.0;
        x[t] = 4.0;
        assert!((soc.violation(&x) - 1.0).abs() < 1e-12);
        x[t] = 5.0;
        assert!(soc.violation(&x).abs() < 1e-12);
    }
}
