//! Line-oriented derivation traces.
//!
//! ```text
//! -- optional comments and defs
//! def posCounter = l <- alloc 0; ret {..}
//! start posCounter
//! rule rep-indep at root dir ltr iso (\x : Int. neg x) (\x : Int. neg x)
//! rule arith-fold at 0.0
//! rule sub-def at 1.0.0.1.1 dir rtl
//! end negCounter
//! ```
//!
//! Paths are `root` or dot-separated child indices. `bind ?m=<term>`
//! supplies a metavariable the matcher cannot infer; terms on a rule line
//! must be single atoms or parenthesized.

use super::normalize::IsoWitness;
use super::{apply_rule, Direction};
use crate::syntax::{alpha_eq, parse_term, subst, Path, Term};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone)]
pub struct TraceStep {
    pub rule: String,
    pub path: Path,
    pub dir: Direction,
    pub bindings: BTreeMap<String, Term>,
    pub iso: Option<IsoWitness>,
    pub line: usize,
}

#[derive(Debug, Clone)]
pub struct DerivationTrace {
    pub start: Term,
    pub steps: Vec<TraceStep>,
    pub end: Term,
}

#[derive(Debug, Error, PartialEq)]
pub enum TraceParseError {
    #[error("line {0}: {1}")]
    Syntax(usize, String),
    #[error("trace needs a start line, at least at the top")]
    MissingStart,
    #[error("trace needs an end line")]
    MissingEnd,
}

/// Per-step outcome of checking a trace.
#[derive(Debug, Clone)]
pub struct StepReport {
    pub index: usize,
    pub rule: String,
    pub line: usize,
    pub result: Result<Term, String>,
}

#[derive(Debug, Clone)]
pub struct TraceReport {
    pub steps: Vec<StepReport>,
    pub final_term: Option<Term>,
    /// true iff every step applied and the final term is alpha-equal to
    /// the trace's stated conclusion.
    pub valid: bool,
}

/// Split a rule line into top-level fields, keeping parenthesized and
/// braced terms intact.
fn split_fields(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut depth = 0i32;
    for ch in line.chars() {
        match ch {
            '(' | '{' => {
                depth += 1;
                cur.push(ch);
            }
            ')' | '}' => {
                depth -= 1;
                cur.push(ch);
            }
            c if c.is_whitespace() && depth == 0 => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn parse_path(s: &str, line: usize) -> Result<Path, TraceParseError> {
    if s == "root" {
        return Ok(Vec::new());
    }
    s.split('.')
        .map(|p| {
            p.parse::<usize>()
                .map_err(|_| TraceParseError::Syntax(line, format!("bad path component '{p}'")))
        })
        .collect()
}

fn parse_linked(src: &str, defs: &[(String, Term)], line: usize) -> Result<Term, TraceParseError> {
    let mut t = parse_term(src)
        .map_err(|e| TraceParseError::Syntax(line, e.to_string()))?;
    for (name, body) in defs.iter().rev() {
        t = subst(&t, name, body);
    }
    Ok(t)
}

pub fn parse_trace(src: &str) -> Result<DerivationTrace, TraceParseError> {
    let mut defs: Vec<(String, Term)> = Vec::new();
    let mut start: Option<Term> = None;
    let mut end: Option<Term> = None;
    let mut steps = Vec::new();
    for (i, raw) in src.lines().enumerate() {
        let lineno = i + 1;
        let line = match raw.find("--") {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("def ") {
            let (name, body) = rest.split_once('=').ok_or_else(|| {
                TraceParseError::Syntax(lineno, "def needs 'name = term'".into())
            })?;
            let body = parse_linked(body.trim(), &defs, lineno)?;
            defs.push((name.trim().to_string(), body));
        } else if let Some(rest) = line.strip_prefix("start ") {
            start = Some(parse_linked(rest, &defs, lineno)?);
        } else if let Some(rest) = line.strip_prefix("end ") {
            end = Some(parse_linked(rest, &defs, lineno)?);
        } else if let Some(rest) = line.strip_prefix("rule ") {
            steps.push(parse_rule_line(rest, &defs, lineno)?);
        } else {
            return Err(TraceParseError::Syntax(
                lineno,
                format!("unrecognized line '{line}'"),
            ));
        }
    }
    Ok(DerivationTrace {
        start: start.ok_or(TraceParseError::MissingStart)?,
        steps,
        end: end.ok_or(TraceParseError::MissingEnd)?,
    })
}

fn parse_rule_line(
    rest: &str,
    defs: &[(String, Term)],
    lineno: usize,
) -> Result<TraceStep, TraceParseError> {
    let err = |msg: String| TraceParseError::Syntax(lineno, msg);
    let fields = split_fields(rest);
    let mut it = fields.into_iter();
    let rule = it.next().ok_or_else(|| err("missing rule name".into()))?;
    if it.next().as_deref() != Some("at") {
        return Err(err("expected 'at <path>' after the rule name".into()));
    }
    let path = parse_path(
        &it.next().ok_or_else(|| err("missing path".into()))?,
        lineno,
    )?;
    let mut dir = Direction::Ltr;
    let mut bindings = BTreeMap::new();
    let mut iso = None;
    while let Some(field) = it.next() {
        match field.as_str() {
            "dir" => {
                dir = match it.next().as_deref() {
                    Some("ltr") => Direction::Ltr,
                    Some("rtl") => Direction::Rtl,
                    other => return Err(err(format!("bad direction {other:?}"))),
                }
            }
            "bind" => {
                let kv = it.next().ok_or_else(|| err("bind needs '?m=<term>'".into()))?;
                let (k, v) = kv
                    .split_once('=')
                    .ok_or_else(|| err("bind needs '?m=<term>'".into()))?;
                let key = if k.starts_with('?') {
                    k.to_string()
                } else {
                    format!("?{k}")
                };
                bindings.insert(key, parse_linked(v, defs, lineno)?);
            }
            "iso" => {
                let fplus = it.next().ok_or_else(|| err("iso needs two terms".into()))?;
                let fminus = it.next().ok_or_else(|| err("iso needs two terms".into()))?;
                iso = Some(IsoWitness::new(
                    parse_linked(&fplus, defs, lineno)?,
                    parse_linked(&fminus, defs, lineno)?,
                ));
            }
            other => return Err(err(format!("unrecognized field '{other}'"))),
        }
    }
    Ok(TraceStep {
        rule,
        path,
        dir,
        bindings,
        iso,
        line: lineno,
    })
}

/// Replay a trace step by step, reporting per-step success, and validate
/// the final term against the stated conclusion.
pub fn check_trace(tr: &DerivationTrace) -> TraceReport {
    let mut cur = tr.start.clone();
    let mut steps = Vec::new();
    for (index, step) in tr.steps.iter().enumerate() {
        match apply_rule(
            &cur,
            &step.rule,
            &step.path,
            step.dir,
            &step.bindings,
            step.iso.as_ref(),
        ) {
            Ok(next) => {
                steps.push(StepReport {
                    index,
                    rule: step.rule.clone(),
                    line: step.line,
                    result: Ok(next.clone()),
                });
                cur = next;
            }
            Err(e) => {
                let at = path_str(&step.path);
                steps.push(StepReport {
                    index,
                    rule: step.rule.clone(),
                    line: step.line,
                    result: Err(format!("at {at}: {e}")),
                });
                return TraceReport {
                    steps,
                    final_term: None,
                    valid: false,
                };
            }
        }
    }
    let valid = alpha_eq(&cur, &tr.end);
    TraceReport {
        steps,
        final_term: Some(cur),
        valid,
    }
}

pub fn path_str(p: &Path) -> String {
    if p.is_empty() {
        "root".to_string()
    } else {
        p.iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(".")
    }
}

/// Re-render a trace's steps as trace-file lines (without defs), used to
/// round-trip generated derivations through the parser and checker.
pub fn format_trace(tr: &DerivationTrace) -> String {
    let mut out = format!("start {}\n", tr.start);
    for s in &tr.steps {
        out.push_str(&format!("rule {} at {}", s.rule, path_str(&s.path)));
        if s.dir == Direction::Rtl {
            out.push_str(" dir rtl");
        }
        for (k, v) in &s.bindings {
            out.push_str(&format!(" bind {k}=({v})"));
        }
        if let Some(w) = &s.iso {
            out.push_str(&format!(" iso ({}) ({})", w.fplus, w.fminus));
        }
        out.push('\n');
    }
    out.push_str(&format!("end {}\n", tr.end));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const COUNTER_TRACE: &str = "\
-- positive to negative counter
def posCounter = l <- alloc 0; ret {incr -> i <- get l; set l (i + 1), read -> get l}
def negCounter = l <- alloc 0; ret {incr -> i <- get l; set l (i - 1), read -> map neg (get l)}
start posCounter
rule rep-indep at root iso (\\x : Int. neg x) (\\x : Int. neg x)
rule arith-fold at 0.0
rule bind-assoc at 1.0.0
rule bind-unit-left at 1.0.0.1
rule neg-add at 1.0.0.1.1
rule neg-neg at 1.0.0.1.1.0
rule sub-def at 1.0.0.1.1 dir rtl
end negCounter
";

    #[test]
    fn counter_trace_replays() {
        let tr = parse_trace(COUNTER_TRACE).unwrap();
        let report = check_trace(&tr);
        for s in &report.steps {
            assert!(s.result.is_ok(), "step {} ({}): {:?}", s.index, s.rule, s.result);
        }
        assert!(report.valid);
    }

    #[test]
    fn corrupted_binding_invalidates_the_step() {
        let corrupted = COUNTER_TRACE.replace(
            "rule sub-def at 1.0.0.1.1 dir rtl",
            "rule sub-def at 1.0.0.1.1 dir rtl bind ?b=(2)",
        );
        let report = check_trace(&parse_trace(&corrupted).unwrap());
        assert!(!report.valid);
        let last = report.steps.last().unwrap();
        assert!(last.result.is_err(), "{:?}", last.result);
    }

    #[test]
    fn wrong_conclusion_is_invalid() {
        let wrong = COUNTER_TRACE.replace("end negCounter", "end posCounter");
        let report = check_trace(&parse_trace(&wrong).unwrap());
        assert!(report.final_term.is_some());
        assert!(!report.valid);
    }

    #[test]
    fn traces_round_trip_through_the_formatter() {
        let tr = parse_trace(COUNTER_TRACE).unwrap();
        let reparsed = parse_trace(&format_trace(&tr)).unwrap();
        assert!(alpha_eq(&tr.start, &reparsed.start));
        assert!(alpha_eq(&tr.end, &reparsed.end));
        assert!(check_trace(&reparsed).valid);
    }
}
