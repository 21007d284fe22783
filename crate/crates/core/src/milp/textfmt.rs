//! Plain-text dump of a problem in LP-style format for external cross-checks.

use std::fmt::Write as _;

use super::{MilpProblem, Rel, Sense};

pub fn write_lp_format(problem: &MilpProblem) -> String {
    let mut s = String::new();
    let head = match problem.sense {
        Sense::Maximize => "Maximize",
        Sense::Minimize => "Minimize",
    };
    let _ = writeln!(s, "{head}");
    let mut line = String::from(" obj:");
    for (j, v) in problem.vars.iter().enumerate() {
        if v.obj != 0.0 {
            let _ = write!(line, " {:+} x{}", v.obj, j);
        }
    }
    let _ = writeln!(s, "{line}");
    let _ = writeln!(s, "Subject To");
    for (i, c) in problem.cons.iter().enumerate() {
        let mut line = format!(" c{i}:");
        for &(j, a) in &c.terms {
            let _ = write!(line, " {a:+} x{j}");
        }
        let rel = match c.rel {
            Rel::Le => "<=",
            Rel::Eq => "=",
            Rel::Ge => ">=",
        };
        let _ = writeln!(s, "{line} {rel} {}", c.rhs);
    }
    let _ = writeln!(s, "Bounds");
    for (j, v) in problem.vars.iter().enumerate() {
        let _ = writeln!(s, " {} <= x{} <= {}", v.lo, j, v.hi);
    }
    let bins: Vec<String> = problem
        .vars
        .iter()
        .enumerate()
        .filter(|(_, v)| v.binary)
        .map(|(j, _)| format!("x{j}"))
        .collect();
    if !bins.is_empty() {
        let _ = writeln!(s, "Binaries\n {}", bins.join(" "));
    }
    let _ = writeln!(s, "End");
    s
}
