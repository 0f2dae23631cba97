//! Problem documents (JSON) and field output (CSV, gnuplot).
//!
//! Document schema:
//!
//! ```json
//! {
//!   "comment": "optional free text",
//!   "l": 3.141592653589793,
//!   "T": 6.283185307179586,
//!   "time_partition": [0.0, 3.141592653589793, 6.283185307179586],
//!   "space_partition": [-3.141592653589793, 3.141592653589793],
//!   "order": 2,
//!   "coefficients": [[[0.0, 0.0, 1.0]], [[0.0, 0.0, 0.5]]],
//!   "initial": { "half_c0": 0.0075, "modes": [{ "k": 1, "c": 0.0, "d": 5.0 }] },
//!   "settings": { "truncation": 4, "grid_nt": 21, "grid_nx": 21 }
//! }
//! ```
//!
//! `coefficients` is indexed `[i][j][n]`; omitted modes are zero. The
//! truncation is the larger of `settings.truncation` and the highest listed
//! `k`.

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Diagnostic, Error, Location, Result};
use crate::solver::{Field, StepProblem};
use crate::spectral::{FourierState, DEFAULT_MODE_CAP};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Settings {
    pub truncation: Option<usize>,
    pub grid_nt: Option<usize>,
    pub grid_nx: Option<usize>,
}

impl Settings {
    fn is_empty(&self) -> bool {
        self.truncation.is_none() && self.grid_nt.is_none() && self.grid_nx.is_none()
    }
}

/// A parsed problem document.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemDocument {
    pub problem: StepProblem,
    pub settings: Settings,
    pub comment: Option<String>,
}

const TOP_KEYS: &[&str] = &[
    "comment",
    "l",
    "T",
    "time_partition",
    "space_partition",
    "order",
    "coefficients",
    "initial",
    "settings",
];

struct Reader {
    diags: Vec<Diagnostic>,
}

impl Reader {
    fn fail(&mut self, path: &str, msg: impl Into<String>) {
        self.diags.push(Diagnostic::at_path(path, msg));
    }

    fn unknown_keys(&mut self, obj: &Map<String, Value>, known: &[&str], path: &str) {
        for key in obj.keys().filter(|k| !known.contains(&k.as_str())) {
            self.fail(&format!("{path}/{key}"), format!("unknown field `{key}`"));
        }
    }

    fn number(&mut self, v: &Value, path: &str) -> Option<f64> {
        match v.as_f64() {
            Some(x) if x.is_finite() => Some(x),
            Some(_) => {
                self.fail(path, "number is not finite");
                None
            }
            None => {
                self.fail(path, format!("expected a number, found {}", kind(v)));
                None
            }
        }
    }

    fn integer(&mut self, v: &Value, path: &str) -> Option<usize> {
        match v.as_u64() {
            Some(n) => Some(n as usize),
            None => {
                self.fail(path, format!("expected a non-negative integer, found {}", kind(v)));
                None
            }
        }
    }

    fn required<'v>(&mut self, obj: &'v Map<String, Value>, key: &str, path: &str) -> Option<&'v Value> {
        let v = obj.get(key);
        if v.is_none() {
            self.fail(path, format!("missing field `{key}`"));
        }
        v
    }

    fn numbers(&mut self, v: &Value, path: &str) -> Option<Vec<f64>> {
        let Some(items) = v.as_array() else {
            self.fail(path, format!("expected an array, found {}", kind(v)));
            return None;
        };
        let out: Vec<Option<f64>> = items
            .iter()
            .enumerate()
            .map(|(i, x)| self.number(x, &format!("{path}/{i}")))
            .collect();
        out.into_iter().collect()
    }

    fn array<'v>(&mut self, v: &'v Value, path: &str) -> Option<&'v Vec<Value>> {
        let a = v.as_array();
        if a.is_none() {
            self.fail(path, format!("expected an array, found {}", kind(v)));
        }
        a
    }

    fn object<'v>(&mut self, v: &'v Value, path: &str) -> Option<&'v Map<String, Value>> {
        let o = v.as_object();
        if o.is_none() {
            self.fail(path, format!("expected an object, found {}", kind(v)));
        }
        o
    }
}

fn kind(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(_) => "a number",
        Value::String(_) => "a string",
        Value::Array(_) => "an array",
        Value::Object(_) => "an object",
    }
}

fn read_coefficients(r: &mut Reader, v: &Value) -> Option<Vec<Vec<Vec<f64>>>> {
    let rows = r.array(v, "/coefficients")?;
    let mut out = Vec::with_capacity(rows.len());
    let mut ok = true;
    for (i, row) in rows.iter().enumerate() {
        let path = format!("/coefficients/{i}");
        let Some(cells) = r.array(row, &path) else {
            ok = false;
            continue;
        };
        let mut row_out = Vec::with_capacity(cells.len());
        for (j, cell) in cells.iter().enumerate() {
            match r.numbers(cell, &format!("{path}/{j}")) {
                Some(a) => row_out.push(a),
                None => ok = false,
            }
        }
        out.push(row_out);
    }
    ok.then_some(out)
}

/// Returns `(half_c0, listed modes as (k, c, d))`.
fn read_initial(r: &mut Reader, v: &Value) -> Option<(f64, Vec<(usize, f64, f64)>)> {
    let obj = r.object(v, "/initial")?;
    r.unknown_keys(obj, &["half_c0", "modes"], "/initial");
    let half_c0 = r
        .required(obj, "half_c0", "/initial")
        .and_then(|h| r.number(h, "/initial/half_c0"));
    let mut modes = Vec::new();
    let mut ok = half_c0.is_some();
    if let Some(list) = obj.get("modes").and_then(|m| r.array(m, "/initial/modes")) {
        let mut last_k = 0;
        for (idx, m) in list.iter().enumerate() {
            let path = format!("/initial/modes/{idx}");
            let Some(mo) = r.object(m, &path) else {
                ok = false;
                continue;
            };
            r.unknown_keys(mo, &["k", "c", "d"], &path);
            let k = r.required(mo, "k", &path).and_then(|k| r.integer(k, &format!("{path}/k")));
            let c = r.required(mo, "c", &path).and_then(|c| r.number(c, &format!("{path}/c")));
            let d = r.required(mo, "d", &path).and_then(|d| r.number(d, &format!("{path}/d")));
            match (k, c, d) {
                (Some(k), Some(c), Some(d)) => {
                    if k == 0 {
                        r.fail(&format!("{path}/k"), "mode index must be >= 1 (use half_c0 for the constant)");
                        ok = false;
                    } else if k > DEFAULT_MODE_CAP {
                        r.fail(&format!("{path}/k"), format!("mode index exceeds the cap {DEFAULT_MODE_CAP}"));
                        ok = false;
                    } else if k <= last_k {
                        r.fail(&format!("{path}/k"), format!("mode indices not strictly increasing at index {idx}"));
                        ok = false;
                    } else {
                        last_k = k;
                        modes.push((k, c, d));
                    }
                }
                _ => ok = false,
            }
        }
    } else if obj.contains_key("modes") {
        ok = false;
    }
    if ok {
        Some((half_c0?, modes))
    } else {
        None
    }
}

fn read_settings(r: &mut Reader, v: &Value) -> Settings {
    let mut s = Settings::default();
    let Some(obj) = r.object(v, "/settings") else {
        return s;
    };
    r.unknown_keys(obj, &["truncation", "grid_nt", "grid_nx"], "/settings");
    if let Some(t) = obj.get("truncation") {
        s.truncation = r.integer(t, "/settings/truncation");
        match s.truncation {
            Some(0) => r.fail("/settings/truncation", "truncation must be >= 1"),
            Some(t) if t > DEFAULT_MODE_CAP => {
                r.fail("/settings/truncation", format!("truncation exceeds the cap {DEFAULT_MODE_CAP}"));
                s.truncation = None;
            }
            _ => {}
        }
    }
    for (key, slot) in [("grid_nt", &mut s.grid_nt), ("grid_nx", &mut s.grid_nx)] {
        if let Some(g) = obj.get(key) {
            let path = format!("/settings/{key}");
            *slot = r.integer(g, &path);
            if matches!(*slot, Some(n) if n < 2) {
                r.fail(&path, "grid size must be >= 2");
            }
        }
    }
    s
}

fn syntax_error(e: &serde_json::Error) -> Error {
    let msg = e.to_string();
    let message = match msg.find(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg,
    };
    // Out-of-range literals such as 1e999 are well-formed JSON but not finite.
    if message.contains("number out of range") {
        return Error::Validation(vec![Diagnostic {
            location: Location::Text {
                line: e.line(),
                column: e.column(),
            },
            message: "number is not finite".into(),
        }]);
    }
    Error::Syntax {
        line: e.line(),
        column: e.column(),
        message,
    }
}

/// Parses and validates a problem document, reporting every violation.
pub fn parse_document(text: &str) -> Result<ProblemDocument> {
    if text.trim().is_empty() {
        return Err(Error::Syntax {
            line: 1,
            column: 1,
            message: "empty document".into(),
        });
    }
    let root: Value = serde_json::from_str(text).map_err(|e| syntax_error(&e))?;
    let mut r = Reader { diags: Vec::new() };
    let Some(obj) = root.as_object() else {
        return Err(Error::Validation(vec![Diagnostic::at_path(
            "",
            format!("expected a top-level object, found {}", kind(&root)),
        )]));
    };
    r.unknown_keys(obj, TOP_KEYS, "");

    let comment = match obj.get("comment") {
        Some(Value::String(s)) => Some(s.clone()),
        Some(other) => {
            r.fail("/comment", format!("expected a string, found {}", kind(other)));
            None
        }
        None => None,
    };
    let l = r.required(obj, "l", "").and_then(|v| r.number(v, "/l"));
    let horizon = r.required(obj, "T", "").and_then(|v| r.number(v, "/T"));
    let tp = r
        .required(obj, "time_partition", "")
        .and_then(|v| r.numbers(v, "/time_partition"));
    let sp = r
        .required(obj, "space_partition", "")
        .and_then(|v| r.numbers(v, "/space_partition"));
    let order = r.required(obj, "order", "").and_then(|v| r.integer(v, "/order"));
    let coeffs = r
        .required(obj, "coefficients", "")
        .and_then(|v| read_coefficients(&mut r, v));
    let initial = r
        .required(obj, "initial", "")
        .and_then(|v| read_initial(&mut r, v));
    let settings = obj
        .get("settings")
        .map(|v| read_settings(&mut r, v))
        .unwrap_or_default();

    let state = initial.and_then(|(half_c0, listed)| {
        let highest = listed.last().map_or(0, |m| m.0);
        let k = settings.truncation.unwrap_or(0).max(highest).max(1);
        if let Some(t) = settings.truncation {
            if t < highest {
                r.fail(
                    "/settings/truncation",
                    format!("truncation {t} is below the highest listed mode {highest}"),
                );
                return None;
            }
        }
        let mut modes = vec![(0.0, 0.0); k];
        for (k, c, d) in listed {
            modes[k - 1] = (c, d);
        }
        match FourierState::new(half_c0, modes) {
            Ok(s) => Some(s),
            Err(e) => {
                r.fail("/initial", e.to_string());
                None
            }
        }
    });

    let mut diags = r.diags;
    match (l, horizon, tp, sp, order, coeffs, state) {
        (Some(l), Some(h), Some(tp), Some(sp), Some(order), Some(coeffs), Some(state)) => {
            match StepProblem::new(l, h, tp, sp, order, coeffs, state) {
                Ok(problem) if diags.is_empty() => Ok(ProblemDocument {
                    problem,
                    settings,
                    comment,
                }),
                Ok(_) => Err(Error::Validation(diags)),
                Err(Error::Validation(more)) => {
                    diags.extend(more);
                    Err(Error::Validation(diags))
                }
                Err(e) => Err(e),
            }
        }
        _ => Err(Error::Validation(diags)),
    }
}

/// Parses a document and returns only the problem.
pub fn parse_problem(text: &str) -> Result<StepProblem> {
    parse_document(text).map(|d| d.problem)
}

#[derive(Serialize)]
struct ModeOut {
    k: usize,
    c: f64,
    d: f64,
}

#[derive(Serialize)]
struct InitialOut {
    half_c0: f64,
    modes: Vec<ModeOut>,
}

#[derive(Serialize)]
struct SettingsOut {
    #[serde(skip_serializing_if = "Option::is_none")]
    truncation: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid_nt: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid_nx: Option<usize>,
}

#[derive(Serialize)]
struct DocumentOut<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    comment: Option<&'a str>,
    l: f64,
    #[serde(rename = "T")]
    horizon: f64,
    time_partition: &'a [f64],
    space_partition: &'a [f64],
    order: usize,
    coefficients: &'a [Vec<Vec<f64>>],
    initial: InitialOut,
    #[serde(skip_serializing_if = "Option::is_none")]
    settings: Option<SettingsOut>,
}

/// Renders a document. Zero modes are omitted except mode K, which pins
/// the truncation.
pub fn serialize_document(doc: &ProblemDocument) -> String {
    let p = &doc.problem;
    let k_max = p.truncation();
    let modes = p
        .initial()
        .modes()
        .iter()
        .enumerate()
        .filter(|&(i, &(c, d))| i + 1 == k_max || c != 0.0 || d != 0.0)
        .map(|(i, &(c, d))| ModeOut { k: i + 1, c, d })
        .collect();
    let s = &doc.settings;
    let out = DocumentOut {
        comment: doc.comment.as_deref(),
        l: p.l(),
        horizon: p.horizon(),
        time_partition: p.time_partition(),
        space_partition: p.space_partition(),
        order: p.order(),
        coefficients: p.coefficients(),
        initial: InitialOut {
            half_c0: p.initial().half_c0(),
            modes,
        },
        settings: (!s.is_empty()).then(|| SettingsOut {
            truncation: s.truncation,
            grid_nt: s.grid_nt,
            grid_nx: s.grid_nx,
        }),
    };
    let mut text = serde_json::to_string_pretty(&out).expect("document serializes");
    text.push('\n');
    text
}

/// Renders a bare problem with no settings.
pub fn serialize_problem(problem: &StepProblem) -> String {
    serialize_document(&ProblemDocument {
        problem: problem.clone(),
        settings: Settings::default(),
        comment: None,
    })
}

/// Shortest decimal that parses back to the same double.
pub fn format_number(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// CSV with header `t,x,psi`, one row per sample, `NA` for absent values.
pub fn emit_csv(field: &Field) -> String {
    let mut out = String::from("t,x,psi\n");
    for (it, &t) in field.t_values.iter().enumerate() {
        for (ix, &x) in field.x_values.iter().enumerate() {
            let psi = field
                .get(it, ix)
                .map_or_else(|| "NA".to_string(), format_number);
            out.push_str(&format_number(t));
            out.push(',');
            out.push_str(&format_number(x));
            out.push(',');
            out.push_str(&psi);
            out.push('\n');
        }
    }
    out
}

/// A gnuplot script drawing the CSV at `csv_path` as a surface.
pub fn emit_gnuplot(field: &Field, csv_path: &str) -> Result<String> {
    if field.is_empty() {
        return Err(Error::InvalidInput("cannot plot an empty grid".into()));
    }
    if csv_path.is_empty()
        || csv_path.starts_with('<')
        || csv_path.starts_with('|')
        || csv_path.contains(['"', '`', '\n', '\r'])
    {
        return Err(Error::InvalidInput(format!(
            "csv path {csv_path:?} is not a plain file name"
        )));
    }
    let prov = &field.provenance;
    let tp = &prov.time_partition;
    let mut s = String::new();
    s.push_str("# stepwave surface\n");
    s.push_str(&format!(
        "# problem {} truncation K = {}\n",
        prov.problem_digest, prov.truncation
    ));
    for (i, pair) in tp.windows(2).enumerate() {
        let mut growing: Vec<String> = field
            .notes
            .iter()
            .filter(|n| n.cell.0 == i)
            .map(|n| n.k.to_string())
            .collect();
        growing.dedup();
        let behaviour = if growing.is_empty() {
            "no growing modes".to_string()
        } else {
            format!("growing modes k = {}", growing.join(" "))
        };
        s.push_str(&format!(
            "# time row {i}: [{}, {}[ {behaviour}\n",
            format_number(pair[0]),
            format_number(pair[1])
        ));
    }
    s.push_str("set datafile separator \",\"\n");
    s.push_str("set datafile missing \"NA\"\n");
    s.push_str(&format!(
        "set title \"Psi(t, x): problem {}, K = {}\"\n",
        prov.problem_digest, prov.truncation
    ));
    s.push_str("set xlabel \"t\"\n");
    s.push_str("set ylabel \"x\"\n");
    s.push_str("set zlabel \"Ψ\"\n");
    s.push_str("set key off\n");
    s.push_str("set hidden3d\n");
    s.push_str(&format!(
        "set dgrid3d {},{} qnorm 4\n",
        field.t_values.len(),
        field.x_values.len()
    ));
    if tp.len() > 2 {
        let tics: Vec<String> = tp[1..tp.len() - 1]
            .iter()
            .enumerate()
            .map(|(i, t)| format!("\"t{}\" {}", i + 1, format_number(*t)))
            .collect();
        s.push_str(&format!("set xtics add ({})\n", tics.join(", ")));
    }
    s.push_str(&format!(
        "splot \"{csv_path}\" using 1:2:3 skip 1 with lines\n"
    ));
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEAT: &str = r#"{
        "l": 3.141592653589793,
        "T": 1.0,
        "time_partition": [0, 1.0],
        "space_partition": [-3.141592653589793, 3.141592653589793],
        "order": 2,
        "coefficients": [[[0, 0, 1]]],
        "initial": {"half_c0": 0, "modes": [{"k": 1, "c": 0, "d": 1}]}
    }"#;

    fn messages(e: Error) -> Vec<String> {
        match e {
            Error::Validation(d) => d.iter().map(|d| d.to_string()).collect(),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn parses_minimal_document() {
        let p = parse_problem(HEAT).unwrap();
        assert_eq!(p.order(), 2);
        assert_eq!(p.initial().modes(), &[(0.0, 1.0)]);
    }

    #[test]
    fn empty_is_syntax_error() {
        assert!(matches!(parse_problem(""), Err(Error::Syntax { .. })));
        assert!(matches!(parse_problem("  \n"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_problem("{\"l\": 1,"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn non_monotone_partition() {
        let text = HEAT.replace("[0, 1.0]", "[0, 2, 1]");
        let msgs = messages(parse_problem(&text).unwrap_err());
        assert!(msgs
            .iter()
            .any(|m| m.contains("time_partition not strictly increasing at index 2")));
    }

    #[test]
    fn collects_all_diagnostics() {
        let text = HEAT
            .replace("\"order\": 2", "\"order\": 3")
            .replace("\"T\": 1.0", "\"T\": 1.0, \"bogus\": true")
            .replace("{\"k\": 1,", "{\"k\": 1, \"e\": 2,");
        let msgs = messages(parse_problem(&text).unwrap_err());
        assert!(msgs.iter().any(|m| m.contains("unknown field `bogus`")));
        assert!(msgs.iter().any(|m| m.contains("unknown field `e`")));
        assert!(msgs.iter().any(|m| m.starts_with("/order")));
        assert!(msgs.iter().any(|m| m.contains("/coefficients/0/0")));
    }

    #[test]
    fn out_of_range_number_has_position() {
        let text = HEAT.replace("\"T\": 1.0", "\"T\": 1e999");
        match parse_problem(&text).unwrap_err() {
            Error::Validation(d) => {
                assert!(matches!(d[0].location, Location::Text { line: 3, .. }))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn mode_order_and_truncation() {
        let text = HEAT.replace(
            r#"[{"k": 1, "c": 0, "d": 1}]"#,
            r#"[{"k": 2, "c": 0, "d": 1}, {"k": 2, "c": 1, "d": 0}]"#,
        );
        assert!(messages(parse_problem(&text).unwrap_err())
            .iter()
            .any(|m| m.contains("not strictly increasing")));

        let text = HEAT.replace("\"order\": 2,", "\"order\": 2, \"settings\": {\"truncation\": 6},");
        let doc = parse_document(&text).unwrap();
        assert_eq!(doc.problem.truncation(), 6);
        assert_eq!(doc.problem.initial().highest_nonzero_mode(), 1);
    }

    #[test]
    fn serialize_round_trip() {
        let text = HEAT.replace("\"order\": 2,", "\"order\": 2, \"settings\": {\"truncation\": 3, \"grid_nt\": 5},");
        let doc = parse_document(&text).unwrap();
        let again = parse_document(&serialize_document(&doc)).unwrap();
        assert_eq!(doc, again);
    }

    #[test]
    fn number_format_round_trips() {
        for v in [0.0, -0.0, 5.0075, 1e-300, 123456789.125, -2.5e20, f64::MIN_POSITIVE, 0.1 + 0.2] {
            let s = format_number(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(5.0075), "5.0075");
    }

    fn tiny_field(value: Option<f64>) -> Field {
        Field {
            t_values: vec![0.0],
            x_values: vec![0.0],
            values: vec![value],
            notes: vec![],
            provenance: crate::solver::Provenance {
                problem_digest: "abc".into(),
                truncation: 1,
                time_partition: vec![0.0, 1.0],
            },
        }
    }

    #[test]
    fn csv_basics() {
        assert_eq!(emit_csv(&tiny_field(Some(0.0))), "t,x,psi\n0,0,0\n");
        assert_eq!(emit_csv(&tiny_field(None)), "t,x,psi\n0,0,NA\n");
    }

    #[test]
    fn gnuplot_script_shape() {
        let s = emit_gnuplot(&tiny_field(Some(1.0)), "out.csv").unwrap();
        assert_eq!(s.matches("splot").count(), 1);
        assert!(s.contains("splot \"out.csv\""));
        let mut empty = tiny_field(None);
        empty.t_values.clear();
        empty.values.clear();
        assert!(emit_gnuplot(&empty, "out.csv").is_err());
        assert!(emit_gnuplot(&tiny_field(None), "< rm -rf x").is_err());
        assert!(emit_gnuplot(&tiny_field(None), "a\"b").is_err());
    }
}
