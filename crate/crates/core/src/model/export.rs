//! Sparse text dump of a built model, one tagged line per row.
//!
//! Format, whitespace separated, floats shortest-roundtrip:
//!
//!   model <ncols> <nrows> <ncones>
//!   v <idx> <name> <bin|cont> <lower> <upper> <objcoef>
//!   r <tag> <le|ge|eq> <rhs> <nterms> (<col> <coef>)*
//!   s <tag> <nmembers> ; <bound affine> ( ; <member affine> )*
//!   end
//!
//! The solver exchange format (without tags) is the adapter-facing contract;
//! this dump adds the provenance tag of every row for debugging.

use std::io::Write;

use ies_solver::{AffineExpr, RowSense};

use super::ModelInstance;

fn fmt_f(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

fn push_affine(line: &mut String, e: &AffineExpr) {
    line.push_str(&format!(" ; {} {}", fmt_f(e.constant), e.terms.len()));
    for &(col, coef) in &e.terms {
        line.push_str(&format!(" {} {}", col, fmt_f(coef)));
    }
}

pub fn export_model(model: &ModelInstance, mut out: impl Write) -> std::io::Result<()> {
    let p = &model.program;
    writeln!(
        out,
        "model {} {} {}",
        p.num_cols(),
        p.rows.len(),
        p.soc_rows.len()
    )?;
    for j in 0..p.num_cols() {
        writeln!(
            out,
            "v {} {} {} {} {} {}",
            j,
            p.names[j],
            if p.integer[j] { "bin" } else { "cont" },
            fmt_f(p.lower[j]),
            fmt_f(p.upper[j]),
            fmt_f(p.objective[j]),
        )?;
    }
    for (row, tag) in p.rows.iter().zip(&model.row_tags) {
        let sense = match row.sense {
            RowSense::Le => "le",
            RowSense::Ge => "ge",
            RowSense::Eq => "eq",
        };
        let mut line = format!("r {} {} {} {}", tag, sense, fmt_f(row.rhs), row.terms.len());
        for &(col, coef) in &row.terms {
            line.push_str(&format!(" {} {}", col, fmt_f(coef)));
        }
        writeln!(out, "{line}")?;
    }
    for (soc, tag) in p.soc_rows.iter().zip(&model.soc_tags) {
        let mut line = format!("s {} {}", tag, soc.members.len());
        push_affine(&mut line, &soc.bound);
        for m in &soc.members {
            push_affine(&mut line, m);
        }
        writeln!(out, "{line}")?;
    }
    writeln!(out, "end")
}
