//! Backend dispatch and the file exchange format for external adapters.
//!
//! `solve` routes a program to a registered backend by id. The embedded
//! backend runs the in-process branch-and-bound; external solvers are
//! attached by reading/writing the exchange files (`write_program` /
//! `read_program` / `write_solution` / `read_solution`) so no in-process
//! linkage is needed.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use crate::branch_bound::{branch_and_bound, SolveResult, SolveStatus, SolverOptions};
use crate::program::{AffineExpr, ConicProgram, RowSense};
use crate::SolverError;

pub trait Backend: Send + Sync {
    fn solve(&self, program: &ConicProgram, opts: &SolverOptions)
        -> Result<SolveResult, SolverError>;
}

struct Embedded;

impl Backend for Embedded {
    fn solve(
        &self,
        program: &ConicProgram,
        opts: &SolverOptions,
    ) -> Result<SolveResult, SolverError> {
        branch_and_bound(program, opts)
    }
}

pub struct BackendRegistry {
    backends: BTreeMap<String, Box<dyn Backend>>,
}

impl Default for BackendRegistry {
    fn default() -> Self {
        let mut backends: BTreeMap<String, Box<dyn Backend>> = BTreeMap::new();
        backends.insert("embedded".into(), Box::new(Embedded));
        Self { backends }
    }
}

impl BackendRegistry {
    pub fn register(&mut self, id: impl Into<String>, backend: Box<dyn Backend>) {
        self.backends.insert(id.into(), backend);
    }

    pub fn solve(
        &self,
        program: &ConicProgram,
        opts: &SolverOptions,
        backend_id: &str,
    ) -> Result<SolveResult, SolverError> {
        match self.backends.get(backend_id) {
            Some(b) => b.solve(program, opts),
            None => Err(SolverError::UnknownBackend {
                requested: backend_id.into(),
                available: self.backends.keys().cloned().collect::<Vec<_>>().join(", "),
            }),
        }
    }
}

/// One-shot convenience over a default registry.
pub fn solve(
    program: &ConicProgram,
    opts: &SolverOptions,
    backend_id: &str,
) -> Result<SolveResult, SolverError> {
    BackendRegistry::default().solve(program, opts, backend_id)
}

// ---------------------------------------------------------------------------
// exchange format
// ---------------------------------------------------------------------------
//
// Line-oriented, whitespace separated, floats printed shortest-roundtrip:
//
//   program <ncols>
//   const <objective constant>
//   v <idx> <name> <bin|int|cont> <lower> <upper> <objcoef>
//   r <sense:le|ge|eq> <rhs> <nterms> (<col> <coef>)*
//   s <nmembers> ; <affine> ( ; <affine> )*     -- bound first, then members
//   end
//
// where <affine> = <constant> <nterms> (<col> <coef>)*. Infinite bounds are
// written as `inf` / `-inf`.

fn fmt_f(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

fn parse_f(tok: &str) -> Result<f64, SolverError> {
    match tok {
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => tok
            .parse::<f64>()
            .map_err(|_| SolverError::Exchange(format!("bad float {tok:?}"))),
    }
}

pub fn write_program(program: &ConicProgram, mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "program {}", program.num_cols())?;
    writeln!(out, "const {}", fmt_f(program.objective_constant))?;
    for j in 0..program.num_cols() {
        writeln!(
            out,
            "v {} {} {} {} {} {}",
            j,
            program.names[j],
            if program.integer[j] { "int" } else { "cont" },
            fmt_f(program.lower[j]),
            fmt_f(program.upper[j]),
            fmt_f(program.objective[j]),
        )?;
    }
    for row in &program.rows {
        let sense = match row.sense {
            RowSense::Le => "le",
            RowSense::Ge => "ge",
            RowSense::Eq => "eq",
        };
        let mut line = format!("r {} {} {}", sense, fmt_f(row.rhs), row.terms.len());
        for &(col, coef) in &row.terms {
            line.push_str(&format!(" {} {}", col, fmt_f(coef)));
        }
        writeln!(out, "{line}")?;
    }
    for soc in &program.soc_rows {
        let mut line = format!("s {}", soc.members.len());
        let push_affine = |line: &mut String, e: &AffineExpr| {
            line.push_str(&format!(" ; {} {}", fmt_f(e.constant), e.terms.len()));
            for &(col, coef) in &e.terms {
                line.push_str(&format!(" {} {}", col, fmt_f(coef)));
            }
        };
        push_affine(&mut line, &soc.bound);
        for m in &soc.members {
            push_affine(&mut line, m);
        }
        writeln!(out, "{line}")?;
    }
    writeln!(out, "end")
}

pub fn read_program(input: impl BufRead) -> Result<ConicProgram, SolverError> {
    let mut program = ConicProgram::new();
    let mut saw_end = false;
    for line in input.lines() {
        let line = line.map_err(|e| SolverError::Exchange(e.to_string()))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks[0] {
            "program" => {}
            "const" => {
                program.objective_constant = parse_f(require(&toks, 1)?)?;
            }
            "v" => {
                let name = require(&toks, 2)?.to_string();
                let integer = matches!(*require(&toks, 3)?, "int" | "bin");
                let lower = parse_f(require(&toks, 4)?)?;
                let upper = parse_f(require(&toks, 5)?)?;
                let obj = parse_f(require(&toks, 6)?)?;
                program.add_named_col(name, lower, upper, integer, obj);
            }
            "r" => {
                let sense = match *require(&toks, 1)? {
                    "le" => RowSense::Le,
                    "ge" => RowSense::Ge,
                    "eq" => RowSense::Eq,
                    other => {
                        return Err(SolverError::Exchange(format!("bad sense {other:?}")))
                    }
                };
                let rhs = parse_f(require(&toks, 2)?)?;
                let k: usize = require(&toks, 3)?
                    .parse()
                    .map_err(|_| SolverError::Exchange("bad term count".into()))?;
                let mut terms = Vec::with_capacity(k);
                for t in 0..k {
                    let col: usize = require(&toks, 4 + 2 * t)?
                        .parse()
                        .map_err(|_| SolverError::Exchange("bad column index".into()))?;
                    let coef = parse_f(require(&toks, 5 + 2 * t)?)?;
                    terms.push((col, coef));
                }
                program.add_row(terms, sense, rhs);
            }
            "s" => {
                let parts: Vec<&str> = line.split(" ; ").collect();
                if parts.len() < 3 {
                    return Err(SolverError::Exchange("cone needs bound + members".into()));
                }
                let parse_affine = |part: &str| -> Result<AffineExpr, SolverError> {
                    let t: Vec<&str> = part.split_whitespace().collect();
                    let constant = parse_f(require(&t, 0)?)?;
                    let k: usize = require(&t, 1)?
                        .parse()
                        .map_err(|_| SolverError::Exchange("bad affine term count".into()))?;
                    let mut terms = Vec::with_capacity(k);
                    for i in 0..k {
                        let col: usize = require(&t, 2 + 2 * i)?
                            .parse()
                            .map_err(|_| SolverError::Exchange("bad column index".into()))?;
                        let coef = parse_f(require(&t, 3 + 2 * i)?)?;
                        terms.push((col, coef));
                    }
                    Ok(AffineExpr::new(terms, constant))
                };
                let bound = parse_affine(parts[1])?;
                let members = parts[2..]
                    .iter()
                    .map(|p| parse_affine(p))
                    .collect::<Result<Vec<_>, _>>()?;
                program.add_soc(members, bound);
            }
            "end" => {
                saw_end = true;
                break;
            }
            other => return Err(SolverError::Exchange(format!("unknown record {other:?}"))),
        }
    }
    if !saw_end {
        return Err(SolverError::Exchange("missing end record".into()));
    }
    program.validate()?;
    Ok(program)
}

pub fn write_solution(result: &SolveResult, mut out: impl Write) -> std::io::Result<()> {
    let status = match result.status {
        SolveStatus::Optimal => "optimal",
        SolveStatus::Infeasible => "infeasible",
        SolveStatus::Unbounded => "unbounded",
        SolveStatus::Limit => "limit",
    };
    writeln!(out, "solution {status}")?;
    writeln!(out, "objective {}", fmt_f(result.objective))?;
    writeln!(out, "bound {}", fmt_f(result.best_bound))?;
    writeln!(out, "gap {}", fmt_f(result.gap))?;
    for (j, v) in result.values.iter().enumerate() {
        writeln!(out, "x {} {}", j, fmt_f(*v))?;
    }
    writeln!(out, "end")
}

pub fn read_solution(input: impl BufRead) -> Result<SolveResult, SolverError> {
    let mut status = None;
    let mut objective = f64::INFINITY;
    let mut bound = f64::NEG_INFINITY;
    let mut gap = f64::INFINITY;
    let mut values: Vec<(usize, f64)> = Vec::new();
    for line in input.lines() {
        let line = line.map_err(|e| SolverError::Exchange(e.to_string()))?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        match toks[0] {
            "solution" => {
                status = Some(match *require(&toks, 1)? {
                    "optimal" => SolveStatus::Optimal,
                    "infeasible" => SolveStatus::Infeasible,
                    "unbounded" => SolveStatus::Unbounded,
                    "limit" => SolveStatus::Limit,
                    other => {
                        return Err(SolverError::Exchange(format!("bad status {other:?}")))
                    }
                });
            }
            "objective" => objective = parse_f(require(&toks, 1)?)?,
            "bound" => bound = parse_f(require(&toks, 1)?)?,
            "gap" => gap = parse_f(require(&toks, 1)?)?,
            "x" => {
                let col: usize = require(&toks, 1)?
                    .parse()
                    .map_err(|_| SolverError::Exchange("bad column index".into()))?;
                values.push((col, parse_f(require(&toks, 2)?)?));
            }
            "end" => break,
            other => return Err(SolverError::Exchange(format!("unknown record {other:?}"))),
        }
    }
    let status = status.ok_or_else(|| SolverError::Exchange("missing status".into()))?;
    let n = values.iter().map(|&(c, _)| c + 1).max().unwrap_or(0);
    let mut x = vec![0.0; n];
    for (c, v) in values {
        x[c] = v;
    }
    Ok(SolveResult {
        status,
        values: x,
        objective,
        best_bound: bound,
        gap,
        node_events: Vec::new(),
    })
}

fn require<'a>(toks: &'a [&'a str], idx: usize) -> Result<&'a &'a str, SolverError> {
    toks.get(idx)
        .ok_or_else(|| SolverError::Exchange(format!("truncated record: {}", toks.join(" "))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::BufReader;

    fn sample_program() -> ConicProgram {
        let mut p = ConicProgram::new();
        let x = p.add_named_col("x", 0.0, 1.0, true, 2.5);
        let y = p.add_named_col("y", -1.0, f64::INFINITY, false, -1.0);
        p.add_row(vec![(x, 1.0), (y, 2.0)], RowSense::Le, 3.0);
        p.add_soc(
            vec![AffineExpr::var(y, 1.0)],
            AffineExpr::new(vec![(x, 1.0)], 2.0),
        );
        p.objective_constant = 0.25;
        p
    }

    #[test]
    fn program_roundtrip() {
        let p = sample_program();
        let mut buf = Vec::new();
        write_program(&p, &mut buf).unwrap();
        let q = read_program(BufReader::new(&buf[..])).unwrap();
        assert_eq!(p.num_cols(), q.num_cols());
        assert_eq!(p.lower, q.lower);
        assert_eq!(p.upper, q.upper);
        assert_eq!(p.integer, q.integer);
        assert_eq!(p.objective, q.objective);
        assert_eq!(p.objective_constant, q.objective_constant);
        assert_eq!(p.rows.len(), q.rows.len());
        assert_eq!(p.soc_rows.len(), q.soc_rows.len());
        assert_eq!(p.soc_rows[0].bound, q.soc_rows[0].bound);
    }

    #[test]
    fn unknown_backend_lists_available() {
        let p = sample_program();
        let err = solve(&p, &SolverOptions::default(), "cplex").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("cplex"));
        assert!(msg.contains("embedded"));
    }

    #[test]
    fn embedded_backend_matches_direct_call() {
        let mut p = ConicProgram::new();
        let x = p.add_col(0.0, f64::INFINITY, false, 1.0);
        p.add_row(vec![(x, 1.0)], RowSense::Ge, 0.5);
        let opts = SolverOptions::default();
        let a = solve(&p, &opts, "embedded").unwrap();
        let b = solve(&p, &opts, "embedded").unwrap();
        assert_eq!(a.objective.to_bits(), b.objective.to_bits());
        assert_eq!(a.values[0].to_bits(), b.values[0].to_bits());
    }

    #[test]
    fn solution_roundtrip_through_files() {
        // emulate an external adapter: export the program, solve the
        // re-imported copy, ship the solution back through the text format
        let mut p = ConicProgram::new();
        let x = p.add_col(0.0, 10.0, true, 1.0);
        p.add_row(vec![(x, 1.0)], RowSense::Ge, 2.5);
        let mut prog_file = Vec::new();
        write_program(&p, &mut prog_file).unwrap();
        let imported = read_program(BufReader::new(&prog_file[..])).unwrap();
        let solved = solve(&imported, &SolverOptions::default(), "embedded").unwrap();
        let mut sol_file = Vec::new();
        write_solution(&solved, &mut sol_file).unwrap();
        let back = read_solution(BufReader::new(&sol_file[..])).unwrap();
        assert_eq!(back.status, SolveStatus::Optimal);
        assert_eq!(back.objective.to_bits(), solved.objective.to_bits());
        assert!((back.values[0] - 3.0).abs() < 1e-6);
    }
}
