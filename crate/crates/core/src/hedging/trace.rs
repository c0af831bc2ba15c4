//! Convergence trace in columnar text, one line per iteration: iteration,
//! inconsistency count, per-scenario objective, then the averaged
//! commitment snapshot. Wall time stays out of the file so reruns are
//! byte-identical.

use std::io::Write;

use super::PhIterationRecord;
use crate::model::DecisionCatalog;

pub fn write_trace(
    trace: &[PhIterationRecord],
    catalog: &DecisionCatalog,
    mut out: impl Write,
) -> std::io::Result<()> {
    let n_sc = trace.first().map_or(0, |r| r.scenario_objectives.len());
    let mut header = String::from("iter\tind");
    for sc in 0..n_sc {
        header.push_str(&format!("\tobj_sc{sc}"));
    }
    for unit in 0..catalog.n_units {
        for t in 0..catalog.horizon {
            header.push_str(&format!("\tcbar_u{unit}_t{t}"));
        }
    }
    writeln!(out, "{header}")?;
    for rec in trace {
        let mut line = format!("{}\t{}", rec.iteration, rec.inconsistency);
        for obj in &rec.scenario_objectives {
            line.push_str(&format!("\t{obj}"));
        }
        for v in &rec.avg_commitment {
            line.push_str(&format!("\t{v}"));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}
