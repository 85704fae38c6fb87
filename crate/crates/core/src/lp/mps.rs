//! Fixed-format MPS writer.
//!
//! Columns are named `x<id>` and rows `c<id>` so output depends only on model
//! structure, never on builder-side names. Binaries use `BV` bounds; general
//! integers are wrapped in `MARKER INTORG/INTEND` blocks.

use std::fmt::Write;

use super::{ModelIR, RowSense, VarKind};

pub fn export_mps(model: &ModelIR) -> String {
    let mut out = String::new();
    let name = if model.name.is_empty() { "MODEL" } else { model.name.as_str() };
    let name: String = name.chars().filter(|c| !c.is_whitespace()).take(8).collect();
    writeln!(out, "NAME          {name}").unwrap();

    out.push_str("ROWS\n N  obj\n");
    for (i, c) in model.constraints().iter().enumerate() {
        let tag = match c.sense {
            RowSense::Le => "L",
            RowSense::Ge => "G",
            RowSense::Eq => "E",
        };
        writeln!(out, " {tag}  c{i}").unwrap();
    }

    // Column-major view of the rows.
    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); model.num_vars()];
    for (i, c) in model.constraints().iter().enumerate() {
        for &(v, a) in &c.terms {
            columns[v.0].push((i, a));
        }
    }

    out.push_str("COLUMNS\n");
    let mut in_int_block = false;
    for (j, var) in model.vars().iter().enumerate() {
        let general_int = var.kind == VarKind::Integer;
        if general_int != in_int_block {
            let kind = if general_int { "'INTORG'" } else { "'INTEND'" };
            writeln!(out, "    MARKER                 'MARKER'                 {kind}").unwrap();
            in_int_block = general_int;
        }
        let col = format!("x{j}");
        let obj = model.objective()[j];
        let entries = &columns[j];
        if obj != 0.0 || entries.is_empty() {
            entry(&mut out, "", &col, "obj", obj);
        }
        let mut merged = entries.clone();
        merged.sort_by_key(|&(i, _)| i);
        // Rows listing the same column twice are summed.
        let mut k = 0;
        while k < merged.len() {
            let (row, mut a) = merged[k];
            k += 1;
            while k < merged.len() && merged[k].0 == row {
                a += merged[k].1;
                k += 1;
            }
            entry(&mut out, "", &col, &format!("c{row}"), a);
        }
    }
    if in_int_block {
        writeln!(out, "    MARKER                 'MARKER'                 'INTEND'").unwrap();
    }

    out.push_str("RHS\n");
    if model.objective_constant() != 0.0 {
        entry(&mut out, "", "RHS", "obj", -model.objective_constant());
    }
    for (i, c) in model.constraints().iter().enumerate() {
        if c.rhs != 0.0 {
            entry(&mut out, "", "RHS", &format!("c{i}"), c.rhs);
        }
    }

    out.push_str("BOUNDS\n");
    for (j, v) in model.vars().iter().enumerate() {
        let col = format!("x{j}");
        if v.kind == VarKind::Binary && v.lower == 0.0 && v.upper == 1.0 {
            bound_line(&mut out, "BV", &col, None);
            continue;
        }
        if v.lower == v.upper {
            bound_line(&mut out, "FX", &col, Some(v.lower));
            continue;
        }
        match (v.lower.is_finite(), v.upper.is_finite()) {
            (false, false) => bound_line(&mut out, "FR", &col, None),
            (false, true) => {
                bound_line(&mut out, "MI", &col, None);
                bound_line(&mut out, "UP", &col, Some(v.upper));
            }
            (true, up) => {
                if v.lower != 0.0 || v.kind == VarKind::Integer {
                    bound_line(&mut out, "LO", &col, Some(v.lower));
                }
                if up {
                    bound_line(&mut out, "UP", &col, Some(v.upper));
                }
            }
        }
    }
    out.push_str("ENDATA\n");
    out
}

fn entry(out: &mut String, tag: &str, name: &str, row: &str, value: f64) {
    writeln!(out, " {tag:<2} {name:<8}  {row:<8}  {:>12}", num12(value)).unwrap();
}

fn bound_line(out: &mut String, tag: &str, col: &str, value: Option<f64>) {
    match value {
        Some(v) => writeln!(out, " {tag:<2} BND       {col:<8}  {:>12}", num12(v)).unwrap(),
        None => writeln!(out, " {tag:<2} BND       {col}").unwrap(),
    }
}

/// Most precise rendering of `v` that fits the 12-character MPS number field.
fn num12(v: f64) -> String {
    let plain = format!("{v}");
    if plain.len() <= 12 {
        return plain;
    }
    let fixed = (0..=11).map(|p| format!("{v:.p$}"));
    let sci = (0..=11).map(|p| format!("{v:.p$e}"));
    fixed
        .chain(sci)
        .filter(|s| s.len() <= 12)
        .filter_map(|s| s.parse::<f64>().ok().map(|x| ((x - v).abs(), s)))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, s)| s)
        .unwrap_or_else(|| format!("{v:.0e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_model_skeleton() {
        let text = export_mps(&ModelIR::new("empty"));
        let sections: Vec<&str> = text.lines().filter(|l| !l.starts_with(' ')).collect();
        assert_eq!(sections, ["NAME          empty", "ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA"]);
    }

    #[test]
    fn binary_gets_bv_marker() {
        let mut m = ModelIR::new("b");
        m.add_binary("flag");
        let text = export_mps(&m);
        assert!(text.contains(" BV BND       x0"), "{text}");
    }

    #[test]
    fn numbers_fit_the_field() {
        for v in [1.0 / 3.0, -123456.789012345, 1e-17, 0.0, 2.5e300] {
            let s = num12(v);
            assert!(s.len() <= 12, "{s}");
            let back: f64 = s.parse().unwrap();
            assert!((back - v).abs() <= 1e-7 * v.abs().max(1e-300), "{v} -> {s}");
        }
    }

    #[test]
    fn fixed_field_positions() {
        let mut m = ModelIR::new("p");
        let x = m.add_continuous("x", 1.0, 4.0);
        m.add_objective_term(x, 2.0);
        m.add_constraint("r", vec![(x, 1.5)], RowSense::Le, 3.0);
        let text = export_mps(&m);
        let line = text.lines().find(|l| l.contains("c0") && l.contains("x0")).unwrap();
        assert_eq!(&line[4..12].trim_end(), &"x0");
        assert_eq!(&line[14..22].trim_end(), &"c0");
        assert_eq!(line[24..36].trim_start(), "1.5");
        assert!(text.contains(" LO BND       x0"));
        assert!(text.contains(" UP BND       x0"));
    }
}
