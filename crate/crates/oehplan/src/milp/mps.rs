//! MPS export and import.
//!
//! The writer emits the classic section order NAME / ROWS / COLUMNS / RHS /
//! RANGES / BOUNDS / ENDATA with the traditional column layout (fields
//! starting at columns 2, 5, 15, 25, 40 and 50). Names longer than a field
//! simply push the following fields right, separated by two spaces, which
//! every free-format MPS reader accepts. Output is byte-deterministic for a
//! given instance.
//!
//! Name mangling is total and deterministic: characters outside
//! `[A-Za-z0-9_.-]` become `_`, an empty or digit-leading name gains an `n`
//! prefix, names are truncated to 60 characters, and collisions get a
//! `~<k>` suffix in first-seen order.
//!
//! The objective constant is carried as an RHS entry on the objective row
//! with flipped sign, mirroring what the big commercial solvers emit.

use super::{InstanceBuilder, MilpInstance, Sense, VarId};
use std::collections::HashMap;
use std::fmt::Write as _;
use thiserror::Error;

const OBJ_ROW: &str = "OBJ";
const MAX_NAME: usize = 60;

/// Deterministically maps arbitrary names to MPS-legal, unique names.
struct Mangler {
    used: HashMap<String, usize>,
}

impl Mangler {
    fn new() -> Mangler {
        Mangler {
            used: HashMap::new(),
        }
    }

    fn mangle(&mut self, raw: &str) -> String {
        let mut s: String = raw
            .chars()
            .map(|c| {
                if c.is_ascii_alphanumeric() || c == '_' || c == '.' || c == '-' {
                    c
                } else {
                    '_'
                }
            })
            .collect();
        if s.is_empty() || s.chars().next().unwrap().is_ascii_digit() {
            s.insert(0, 'n');
        }
        s.truncate(MAX_NAME);
        let n = self.used.entry(s.clone()).or_insert(0);
        *n += 1;
        if *n > 1 {
            let suffixed = format!("{s}~{}", *n - 1);
            // A suffixed name could itself collide with a raw name; retry.
            return self.mangle(&suffixed);
        }
        s
    }
}

fn fmt_num(v: f64) -> String {
    // Shortest round-trip formatting keeps the file byte-deterministic and
    // exact under re-parsing.
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{v:.1}")
    } else {
        format!("{v}")
    }
}

/// Writes one data line with the classic MPS field offsets.
fn push_line(out: &mut String, fields: &[&str]) {
    const STARTS: [usize; 6] = [1, 4, 14, 24, 39, 49];
    let mut line = String::new();
    for (k, f) in fields.iter().enumerate() {
        if f.is_empty() {
            continue;
        }
        let want = STARTS.get(k).copied().unwrap_or(line.len() + 2);
        while line.len() < want {
            line.push(' ');
        }
        if line.len() > want {
            line.push_str("  ");
        }
        line.push_str(f);
    }
    out.push_str(&line);
    out.push('\n');
}

/// Serialises `instance` to MPS text.
pub fn write_mps(instance: &MilpInstance) -> String {
    let mut mangler = Mangler::new();
    let obj_row = mangler.mangle(OBJ_ROW);
    let row_names: Vec<String> = instance
        .constraints()
        .iter()
        .map(|c| mangler.mangle(&c.name))
        .collect();
    let col_names: Vec<String> = instance
        .variables()
        .iter()
        .map(|v| mangler.mangle(&v.name))
        .collect();

    let mut out = String::new();
    let name = if instance.name().is_empty() {
        "PROBLEM"
    } else {
        instance.name()
    };
    let _ = writeln!(out, "NAME          {name}");

    out.push_str("ROWS\n");
    push_line(&mut out, &["N", &obj_row]);
    for (c, rname) in instance.constraints().iter().zip(&row_names) {
        let tag = match c.sense {
            Sense::Le => "L",
            Sense::Ge => "G",
            Sense::Eq => "E",
        };
        push_line(&mut out, &[tag, rname]);
    }

    // Column-major view of the rows.
    let mut col_entries: Vec<Vec<(usize, f64)>> = vec![Vec::new(); instance.num_vars()];
    for (i, c) in instance.constraints().iter().enumerate() {
        for &(v, coeff) in &c.terms {
            col_entries[v.0].push((i, coeff));
        }
    }
    let obj_coeff = instance.dense_objective();

    out.push_str("COLUMNS\n");
    let mut in_int_block = false;
    let mut marker_count = 0usize;
    for v in instance.variables() {
        let j = v.id.0;
        if v.integral != in_int_block {
            let tag = if v.integral { "'INTORG'" } else { "'INTEND'" };
            push_line(
                &mut out,
                &["", &format!("M{marker_count}"), "'MARKER'", "", tag],
            );
            marker_count += 1;
            in_int_block = v.integral;
        }
        let mut pairs: Vec<(String, f64)> = Vec::new();
        if obj_coeff[j] != 0.0 {
            pairs.push((obj_row.clone(), obj_coeff[j]));
        }
        for &(row, coeff) in &col_entries[j] {
            pairs.push((row_names[row].clone(), coeff));
        }
        if pairs.is_empty() {
            // Columns must still appear so the parser learns about them.
            pairs.push((obj_row.clone(), 0.0));
        }
        for chunk in pairs.chunks(2) {
            let mut fields: Vec<String> = vec![String::new(), col_names[j].clone()];
            for (rname, coeff) in chunk {
                fields.push(rname.clone());
                fields.push(fmt_num(*coeff));
            }
            let refs: Vec<&str> = fields.iter().map(|s| s.as_str()).collect();
            push_line(&mut out, &refs);
        }
    }
    if in_int_block {
        push_line(
            &mut out,
            &["", &format!("M{marker_count}"), "'MARKER'", "", "'INTEND'"],
        );
    }

    out.push_str("RHS\n");
    if instance.objective_offset() != 0.0 {
        push_line(
            &mut out,
            &["", "RHS", &obj_row, &fmt_num(-instance.objective_offset())],
        );
    }
    for (c, rname) in instance.constraints().iter().zip(&row_names) {
        if c.rhs != 0.0 {
            push_line(&mut out, &["", "RHS", rname, &fmt_num(c.rhs)]);
        }
    }

    out.push_str("RANGES\n");

    out.push_str("BOUNDS\n");
    for v in instance.variables() {
        let name = &col_names[v.id.0];
        let (l, u) = (v.lower, v.upper);
        if v.integral || l != 0.0 || u.is_finite() {
            if l == u {
                push_line(&mut out, &["FX", "BND", name, &fmt_num(l)]);
                continue;
            }
            if !l.is_finite() && !u.is_finite() {
                push_line(&mut out, &["FR", "BND", name]);
                continue;
            }
            if l.is_finite() {
                if l != 0.0 || v.integral {
                    push_line(&mut out, &["LO", "BND", name, &fmt_num(l)]);
                }
            } else {
                push_line(&mut out, &["MI", "BND", name]);
            }
            if u.is_finite() {
                push_line(&mut out, &["UP", "BND", name, &fmt_num(u)]);
            }
        }
    }

    out.push_str("ENDATA\n");
    out
}

/// A parse failure with its position in the input.
#[derive(Debug, Error)]
#[error("MPS parse error at line {line}: {message}")]
pub struct MpsParseError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> MpsParseError {
    MpsParseError {
        line,
        message: message.into(),
    }
}

#[derive(PartialEq, Clone, Copy)]
enum Section {
    Start,
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
    Done,
}

struct RowInfo {
    sense: Sense,
    rhs: f64,
    range: Option<f64>,
    terms: Vec<(VarId, f64)>,
}

/// Parses MPS text into an instance. Inverse of [`write_mps`] up to name
/// mangling; also accepts free-format files from external tools.
pub fn read_mps(text: &str) -> Result<MilpInstance, MpsParseError> {
    let mut section = Section::Start;
    let mut problem_name = String::from("PROBLEM");
    let mut obj_row: Option<String> = None;
    let mut rows: Vec<(String, RowInfo)> = Vec::new();
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut obj_terms: HashMap<String, f64> = HashMap::new();
    let mut obj_offset = 0.0f64;
    // name -> (order, integral, lower, upper, explicit lower, explicit upper)
    struct ColInfo {
        order: usize,
        integral: bool,
        lower: f64,
        upper: f64,
        lower_set: bool,
        upper_set: bool,
    }
    let mut cols: HashMap<String, ColInfo> = HashMap::new();
    let mut col_order: Vec<String> = Vec::new();
    let mut in_int_block = false;
    let mut saw_rows = false;
    let mut saw_columns = false;

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim_end();
        if line.is_empty() || line.starts_with('*') {
            continue;
        }
        let is_header = !line.starts_with(' ') && !line.starts_with('\t');
        if is_header {
            let mut it = line.split_whitespace();
            let word = it.next().unwrap_or("");
            section = match word {
                "NAME" => {
                    if let Some(n) = it.next() {
                        problem_name = n.to_string();
                    }
                    Section::Start
                }
                "ROWS" => {
                    saw_rows = true;
                    Section::Rows
                }
                "COLUMNS" => {
                    if !saw_rows {
                        return Err(err(lineno, "COLUMNS before ROWS section"));
                    }
                    saw_columns = true;
                    Section::Columns
                }
                "RHS" => Section::Rhs,
                "RANGES" => Section::Ranges,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => break,
                "OBJSENSE" | "OBJSENSE:" => Section::Start, // tolerated, minimise assumed
                other => return Err(err(lineno, format!("unknown section `{other}`"))),
            };
            continue;
        }

        let fields: Vec<&str> = line.split_whitespace().collect();
        match section {
            Section::Start => {
                if fields == ["MIN"] || fields == ["MINIMIZE"] {
                    continue;
                }
                if fields == ["MAX"] || fields == ["MAXIMIZE"] {
                    return Err(err(lineno, "maximisation problems are not supported"));
                }
                return Err(err(lineno, "data line outside any section"));
            }
            Section::Rows => {
                if fields.len() != 2 {
                    return Err(err(lineno, "ROWS line needs a type and a name"));
                }
                let name = fields[1].to_string();
                match fields[0] {
                    "N" => {
                        if obj_row.is_none() {
                            obj_row = Some(name);
                        }
                        // Additional N rows are ignored free rows.
                    }
                    tag @ ("L" | "G" | "E") => {
                        let sense = match tag {
                            "L" => Sense::Le,
                            "G" => Sense::Ge,
                            _ => Sense::Eq,
                        };
                        if row_index.contains_key(&name) {
                            return Err(err(lineno, format!("duplicate row `{name}`")));
                        }
                        row_index.insert(name.clone(), rows.len());
                        rows.push((
                            name,
                            RowInfo {
                                sense,
                                rhs: 0.0,
                                range: None,
                                terms: Vec::new(),
                            },
                        ));
                    }
                    other => return Err(err(lineno, format!("unknown row type `{other}`"))),
                }
            }
            Section::Columns => {
                if fields.len() >= 3 && fields[1] == "'MARKER'" {
                    match *fields.last().unwrap() {
                        "'INTORG'" => in_int_block = true,
                        "'INTEND'" => in_int_block = false,
                        other => return Err(err(lineno, format!("unknown marker `{other}`"))),
                    }
                    continue;
                }
                if fields.len() < 3 || fields.len() % 2 == 0 {
                    return Err(err(lineno, "COLUMNS line needs name and row/value pairs"));
                }
                let cname = fields[0].to_string();
                let next = cols.len();
                let integral = in_int_block;
                let info = cols.entry(cname.clone()).or_insert_with(|| {
                    col_order.push(cname.clone());
                    ColInfo {
                        order: next,
                        integral,
                        lower: 0.0,
                        upper: f64::INFINITY,
                        lower_set: false,
                        upper_set: false,
                    }
                });
                let _ = info.order;
                for pair in fields[1..].chunks(2) {
                    let rname = pair[0];
                    let value: f64 = pair[1]
                        .parse()
                        .map_err(|_| err(lineno, format!("bad number `{}`", pair[1])))?;
                    if Some(rname) == obj_row.as_deref() {
                        if obj_terms.insert(cname.clone(), value).is_some() {
                            return Err(err(
                                lineno,
                                format!("duplicate objective entry for column `{cname}`"),
                            ));
                        }
                    } else if let Some(&ri) = row_index.get(rname) {
                        let terms = &mut rows[ri].1.terms;
                        if terms.iter().any(|(v, _)| {
                            col_order
                                .get(v.0)
                                .map(|n| n == &cname)
                                .unwrap_or(false)
                        }) {
                            return Err(err(
                                lineno,
                                format!("duplicate entry for column `{cname}` in row `{rname}`"),
                            ));
                        }
                        // VarId is provisional: the order index of the column.
                        let id = cols[&cname].order;
                        rows[ri].1.terms.push((VarId(id), value));
                    } else {
                        return Err(err(lineno, format!("unknown row `{rname}`")));
                    }
                }
            }
            Section::Rhs => {
                if fields.len() < 3 || fields.len() % 2 == 0 {
                    return Err(err(lineno, "RHS line needs a set name and row/value pairs"));
                }
                for pair in fields[1..].chunks(2) {
                    let rname = pair[0];
                    let value: f64 = pair[1]
                        .parse()
                        .map_err(|_| err(lineno, format!("bad number `{}`", pair[1])))?;
                    if Some(rname) == obj_row.as_deref() {
                        obj_offset = -value;
                    } else if let Some(&ri) = row_index.get(rname) {
                        rows[ri].1.rhs = value;
                    } else {
                        return Err(err(lineno, format!("unknown row `{rname}`")));
                    }
                }
            }
            Section::Ranges => {
                if fields.len() < 3 || fields.len() % 2 == 0 {
                    return Err(err(lineno, "RANGES line needs a set name and row/value pairs"));
                }
                for pair in fields[1..].chunks(2) {
                    let rname = pair[0];
                    let value: f64 = pair[1]
                        .parse()
                        .map_err(|_| err(lineno, format!("bad number `{}`", pair[1])))?;
                    let Some(&ri) = row_index.get(rname) else {
                        return Err(err(lineno, format!("unknown row `{rname}`")));
                    };
                    rows[ri].1.range = Some(value);
                }
            }
            Section::Bounds => {
                if fields.len() < 3 {
                    return Err(err(lineno, "BOUNDS line needs type, set and column"));
                }
                let btype = fields[0];
                let cname = fields[2];
                let Some(info) = cols.get_mut(cname) else {
                    return Err(err(lineno, format!("bound on unknown column `{cname}`")));
                };
                let numeric = |idx: usize| -> Result<f64, MpsParseError> {
                    fields
                        .get(idx)
                        .ok_or_else(|| err(lineno, "missing bound value"))?
                        .parse()
                        .map_err(|_| err(lineno, format!("bad number `{}`", fields[idx])))
                };
                match btype {
                    "LO" => {
                        info.lower = numeric(3)?;
                        info.lower_set = true;
                    }
                    "UP" => {
                        let v = numeric(3)?;
                        info.upper = v;
                        info.upper_set = true;
                        // Classic quirk: a negative upper bound with no
                        // explicit lower implies a free lower bound.
                        if v < 0.0 && !info.lower_set {
                            info.lower = f64::NEG_INFINITY;
                        }
                    }
                    "FX" => {
                        let v = numeric(3)?;
                        info.lower = v;
                        info.upper = v;
                        info.lower_set = true;
                        info.upper_set = true;
                    }
                    "FR" => {
                        info.lower = f64::NEG_INFINITY;
                        info.upper = f64::INFINITY;
                    }
                    "MI" => {
                        info.lower = f64::NEG_INFINITY;
                        info.lower_set = true;
                    }
                    "PL" => {
                        info.upper = f64::INFINITY;
                        info.upper_set = true;
                    }
                    "BV" => {
                        info.integral = true;
                        info.lower = 0.0;
                        info.upper = 1.0;
                        info.lower_set = true;
                        info.upper_set = true;
                    }
                    "UI" => {
                        info.integral = true;
                        info.upper = numeric(3)?;
                        info.upper_set = true;
                    }
                    "LI" => {
                        info.integral = true;
                        info.lower = numeric(3)?;
                        info.lower_set = true;
                    }
                    other => return Err(err(lineno, format!("unknown bound type `{other}`"))),
                }
            }
            Section::Done => unreachable!(),
        }
    }

    if !saw_rows {
        return Err(err(0, "missing ROWS section"));
    }
    if !saw_columns {
        return Err(err(0, "missing COLUMNS section"));
    }
    let obj_row = obj_row.ok_or_else(|| err(0, "missing objective (N) row"))?;
    let _ = obj_row;

    let mut builder = InstanceBuilder::new(problem_name);
    for cname in &col_order {
        let info = &cols[cname];
        if info.integral && !(info.lower.is_finite() && info.upper.is_finite()) {
            return Err(err(
                0,
                format!("integral column `{cname}` lacks finite bounds"),
            ));
        }
        builder.add_variable(cname.clone(), info.lower, info.upper, info.integral);
    }
    for (i, cname) in col_order.iter().enumerate() {
        if let Some(&c) = obj_terms.get(cname) {
            if c != 0.0 {
                builder.add_objective_term(VarId(i), c);
            }
        }
    }
    builder.add_objective_offset(obj_offset);
    for (name, info) in rows {
        match info.range {
            None => builder.add_constraint(name, info.terms, info.sense, info.rhs),
            Some(r) => {
                // A ranged row becomes a pair of one-sided constraints.
                let (lo, hi) = match info.sense {
                    Sense::Le => (info.rhs - r.abs(), info.rhs),
                    Sense::Ge => (info.rhs, info.rhs + r.abs()),
                    Sense::Eq => {
                        if r >= 0.0 {
                            (info.rhs, info.rhs + r)
                        } else {
                            (info.rhs + r, info.rhs)
                        }
                    }
                };
                builder.add_constraint(
                    format!("{name}.lo"),
                    info.terms.clone(),
                    Sense::Ge,
                    lo,
                );
                builder.add_constraint(format!("{name}.hi"), info.terms, Sense::Le, hi);
            }
        }
    }

    builder
        .build()
        .map_err(|e| err(0, format!("inconsistent MPS data: {e}")))
}

#[cfg(test)]
mod tests {
    use super::super::{solve_lp, solve_milp, InstanceBuilder, Sense, SolverConfig};
    use super::*;

    #[test]
    fn empty_instance_canonical_sections() {
        let inst = InstanceBuilder::new("empty").build().unwrap();
        let text = write_mps(&inst);
        assert_eq!(
            text,
            "NAME          empty\nROWS\n N  OBJ\nCOLUMNS\nRHS\nRANGES\nBOUNDS\nENDATA\n"
        );
    }

    #[test]
    fn one_var_one_row_fixture() {
        let mut b = InstanceBuilder::new("tiny");
        let x = b.continuous("x", 0.0, 4.0);
        b.add_constraint("cap", vec![(x, 2.0)], Sense::Le, 6.0);
        b.add_objective_term(x, 3.0);
        let inst = b.build().unwrap();
        let text = write_mps(&inst);
        let expected = "\
NAME          tiny
ROWS
 N  OBJ
 L  cap
COLUMNS
    x         OBJ       3.0            cap       2.0
RHS
    RHS       cap       6.0
RANGES
BOUNDS
 UP BND       x         4.0
ENDATA
";
        assert_eq!(text, expected);
    }

    #[test]
    fn reject_missing_rows_section() {
        let text = "NAME t\nCOLUMNS\n    x  OBJ  1.0\nENDATA\n";
        let e = read_mps(text).unwrap_err();
        assert!(e.message.contains("ROWS"), "{e}");
    }

    #[test]
    fn roundtrip_preserves_optimum() {
        let mut b = InstanceBuilder::new("rt");
        let x = b.continuous("x one", -2.0, 5.0);
        let y = b.integer("y#2", 0.0, 3.0);
        let z = b.continuous("z", f64::NEG_INFINITY, f64::INFINITY);
        b.add_constraint("r1", vec![(x, 1.0), (y, 2.0)], Sense::Le, 4.5);
        b.add_constraint("r2", vec![(x, -1.0), (z, 1.0)], Sense::Ge, -1.25);
        b.add_constraint("r3", vec![(y, 1.0), (z, 1.0)], Sense::Eq, 2.0);
        b.add_objective_term(x, 1.0);
        b.add_objective_term(y, -2.0);
        b.add_objective_term(z, 0.5);
        b.add_objective_offset(7.25);
        let inst = b.build().unwrap();

        let text = write_mps(&inst);
        let back = read_mps(&text).unwrap();
        assert_eq!(back.num_vars(), inst.num_vars());
        assert_eq!(back.num_constraints(), inst.num_constraints());

        let cfg = SolverConfig {
            optimality_gap: 1e-9,
            ..SolverConfig::default()
        };
        let a = solve_milp(&inst, &cfg).unwrap();
        let b2 = solve_milp(&back, &cfg).unwrap();
        assert_eq!(a.status, b2.status);
        assert!(
            (a.objective - b2.objective).abs() <= 1e-6,
            "{} vs {}",
            a.objective,
            b2.objective
        );

        // Write of the reparse is byte-identical (names already mangled).
        assert_eq!(write_mps(&back), text);
    }

    #[test]
    fn ranges_split_into_pairs() {
        let text = "\
NAME t
ROWS
 N  OBJ
 L  cap
COLUMNS
    x  OBJ  -1.0  cap  1.0
RHS
    RHS  cap  5.0
RANGES
    RNG  cap  2.0
BOUNDS
ENDATA
";
        let inst = read_mps(text).unwrap();
        assert_eq!(inst.num_constraints(), 2);
        let s = solve_lp(&inst, &SolverConfig::default()).unwrap();
        // min -x with 3 <= x <= 5.
        assert!((s.objective + 5.0).abs() < 1e-9);
    }

    #[test]
    fn mangles_hostile_names_deterministically() {
        let mut b = InstanceBuilder::new("m");
        let a = b.continuous("p G [z1,t=0]", 0.0, 1.0);
        let c = b.continuous("p G (z1;t=0)", 0.0, 1.0);
        b.add_objective_term(a, 1.0);
        b.add_objective_term(c, 2.0);
        let inst = b.build().unwrap();
        let t1 = write_mps(&inst);
        let t2 = write_mps(&inst);
        assert_eq!(t1, t2);
        let back = read_mps(&t1).unwrap();
        assert_eq!(back.num_vars(), 2);
        // Same mangled stem, deterministic collision suffix.
        assert!(back.variables()[0].name.starts_with("p_G_"));
        assert_ne!(back.variables()[0].name, back.variables()[1].name);
    }
}
