//! CPLEX LP text output, for inspecting a program with external solvers.

use std::fmt::Write;

use super::BinaryProgram;

/// LP names may not contain spaces or most punctuation.
fn sanitize(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "_.[]".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect();
    if s.starts_with(|c: char| c.is_ascii_digit() || c == '.') {
        format!("_{s}")
    } else {
        s
    }
}

fn write_terms(out: &mut String, terms: impl Iterator<Item = (String, f64)>) {
    let mut first = true;
    for (name, a) in terms {
        if a == 0.0 {
            continue;
        }
        let sign = if a < 0.0 {
            "- "
        } else if first {
            ""
        } else {
            "+ "
        };
        let _ = write!(out, " {sign}{} {name}", a.abs());
        first = false;
    }
    if first {
        out.push_str(" 0");
    }
}

pub(super) fn write(program: &BinaryProgram) -> String {
    let names: Vec<String> = program
        .variables
        .iter()
        .enumerate()
        .map(|(i, v)| format!("x{i}_{}", sanitize(&v.name)))
        .collect();
    let mut out = String::from("\\ 0-1 program\nMaximize\n obj:");
    write_terms(
        &mut out,
        program
            .variables
            .iter()
            .zip(&names)
            .map(|(v, n)| (n.clone(), v.objective)),
    );
    out.push_str("\nSubject To\n");
    for (ci, c) in program.constraints.iter().enumerate() {
        let _ = write!(out, " c{ci}_{}:", sanitize(&c.label));
        write_terms(
            &mut out,
            c.merged_terms()
                .into_iter()
                .map(|(v, a)| (names[v].clone(), a)),
        );
        let _ = writeln!(out, " {} {}", c.relation.symbol(), c.bound);
    }
    out.push_str("Bounds\n");
    for (v, &x) in &program.forced {
        let _ = writeln!(out, " {} = {}", names[v.0], u8::from(x));
    }
    out.push_str("Binary\n");
    for n in &names {
        let _ = writeln!(out, " {n}");
    }
    out.push_str("End\n");
    out
}

#[cfg(test)]
mod tests {
    use crate::ilp::{BinaryProgram, Relation};

    #[test]
    fn writes_sections() {
        let mut p = BinaryProgram::new();
        let a = p.add_variable("choice 0", 2.0);
        let b = p.add_variable("choice 1", -1.5);
        p.add_constraint("one choice", vec![(a, 1.0), (b, 1.0)], Relation::Eq, 1.0);
        p.force(b, false);
        let lp = p.to_lp_format();
        assert!(lp.contains("Maximize\n obj: 2 x0_choice_0 - 1.5 x1_choice_1\n"));
        assert!(lp.contains(" c0_one_choice: 1 x0_choice_0 + 1 x1_choice_1 = 1\n"));
        assert!(lp.contains("Bounds\n x1_choice_1 = 0\n"));
        assert!(lp.ends_with("Binary\n x0_choice_0\n x1_choice_1\nEnd\n"));
    }
}
