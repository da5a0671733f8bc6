//! CSV output for solver traces.
//!
//! One header line, one row per iteration, then `# status=<status>`. Floats
//! use the shortest decimal form that round-trips; missing values (no
//! schedule, no reference solution) are empty cells.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::solvers::SolverTrace;

pub const HEADER: &str =
    "iter,lambda,alpha,beta,err_norm,residual,step_norm,iterate_norm,dist_to_reference";

/// Shortest round-trip decimal representation.
pub fn format_float(v: f64) -> String {
    ryu::Buffer::new().format(v).to_owned()
}

fn opt(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

pub fn write_csv<W: Write>(trace: &SolverTrace, mut out: W) -> io::Result<()> {
    writeln!(out, "{HEADER}")?;
    for r in &trace.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.iter,
            format_float(r.lambda),
            opt(r.alpha),
            opt(r.beta),
            opt(r.err_norm),
            format_float(r.residual),
            format_float(r.step_norm),
            format_float(r.iterate_norm),
            opt(r.dist_to_reference),
        )?;
    }
    writeln!(out, "# status={}", trace.status)?;
    out.flush()
}

pub fn write_csv_file(trace: &SolverTrace, path: &Path) -> io::Result<()> {
    write_csv(trace, BufWriter::new(File::create(path)?))
}
