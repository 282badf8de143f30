//! Equational rewriting: a fixed catalogue of named rules (the store laws,
//! the monad laws, beta/eta, step centrality, allocation permutation and
//! representation independence), single-step application at a path, and
//! derivation-trace checking.
//!
//! Matching is first-order and syntactic modulo alpha-equivalence: schema
//! binders are freshened against the subject, subject binder names inside a
//! matched metavariable are renamed to their schema counterparts, and
//! instantiation rejects bindings that would escape a binder's scope.

pub mod normalize;
pub mod trace;

use crate::syntax::{
    alpha_eq, all_names, free_vars, fresh_name, replace_at, subst, subterm_at, Path, Term, Type,
};
use crate::typecheck::{self, Context};
use normalize::{check_iso, IsoError, IsoWitness};
use num_bigint::BigInt;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Ltr,
    Rtl,
}

/// How a rule rewrites. Most rules are schemas (a pair of patterns over
/// metavariables, applicable in both directions); the rest need computation
/// that patterns cannot express.
#[derive(Debug, Clone)]
pub enum RuleKind {
    Schema { lhs: Term, rhs: Term },
    /// `(rec f x. e) a` to `step; e[rec f x. e / f, a / x]`.
    RecUnfold,
    /// `(\x. e) a` to `e[a/x]`.
    Beta,
    /// `x <- ret v; e` to `e[v/x]`.
    BindUnitLeft,
    /// `{.., l -> e, ..}.l` to `e`.
    RecordBeta,
    /// Fold a closed integer expression to its literal value.
    ArithFold,
    /// Conjugate a freshly allocated cell's interface by an isomorphism.
    RepIndep,
}

#[derive(Debug, Clone)]
pub struct Rule {
    pub name: &'static str,
    pub kind: RuleKind,
    /// One-line statement of the equation for reports and docs.
    pub about: &'static str,
}

#[derive(Debug, Error, PartialEq)]
pub enum RuleError {
    #[error("unknown rule '{0}'")]
    UnknownRule(String),
    #[error("path does not address a subterm")]
    BadPath,
    #[error("no match: {0}")]
    NoMatch(String),
    #[error("rule '{0}' cannot be applied right-to-left")]
    DirectionUnsupported(&'static str),
    #[error("rewrite changed the term's type: {0}")]
    TypeRegression(String),
    #[error("isomorphism obligation not discharged: {0}")]
    UndischargedObligation(String),
    #[error("rule needs an isomorphism witness")]
    MissingWitness,
}

fn schema(name: &'static str, lhs: &str, rhs: &str, about: &'static str) -> Rule {
    Rule {
        name,
        kind: RuleKind::Schema {
            lhs: crate::syntax::parse_term(lhs).expect("schema parses"),
            rhs: crate::syntax::parse_term(rhs).expect("schema parses"),
        },
        about,
    }
}

/// The complete fixed rule catalogue.
pub fn rule_set() -> Vec<Rule> {
    vec![
        // store laws
        schema(
            "set-get",
            "set ?e ?v; get ?e",
            "step; set ?e ?v; ret ?v",
            "reading back a written value costs one step and yields that value",
        ),
        schema(
            "alloc-set",
            "x <- alloc ?e; set x ?e; ret x",
            "alloc ?e",
            "writing the initial value to a fresh cell is redundant",
        ),
        schema(
            "set-set",
            "set ?e ?v; set ?e ?w",
            "set ?e ?w",
            "consecutive writes to one cell keep only the last",
        ),
        schema(
            "get-get-commute",
            "x <- get ?e; y <- get ?f; ret (x, y)",
            "y <- get ?f; x <- get ?e; ret (x, y)",
            "reads of two cells commute",
        ),
        schema(
            "get-set",
            "x <- get ?e; set ?e x; ret x",
            "get ?e",
            "writing back what was just read is redundant",
        ),
        schema(
            "get-discard",
            "get ?e; ?k",
            "step; ?k",
            "a discarded read is just its step",
        ),
        // guarded recursion
        Rule {
            name: "rec-unfold",
            kind: RuleKind::RecUnfold,
            about: "applying a recursive function costs one step and unfolds its body",
        },
        // monad laws
        Rule {
            name: "bind-unit-left",
            kind: RuleKind::BindUnitLeft,
            about: "binding a returned value substitutes it",
        },
        schema(
            "bind-unit-right",
            "x <- ?c; ret x",
            "?c",
            "returning the bound result is the computation itself",
        ),
        schema(
            "bind-assoc",
            "x <- (y <- ?a; ?b); ?c",
            "y <- ?a; x <- ?b; ?c",
            "sequencing is associative",
        ),
        // step centrality
        schema(
            "step-central",
            "step; x <- ?c; ?k",
            "x <- ?c; step; ?k",
            "step commutes with every monadic operation",
        ),
        // beta/eta for functions, pairs, records
        Rule {
            name: "beta",
            kind: RuleKind::Beta,
            about: "applying a literal function substitutes its argument",
        },
        schema("eta", "\\x. ?f x", "?f", "a function is its own eta-expansion"),
        schema("pair-fst", "fst (?a, ?b)", "?a", "first projection of a literal pair"),
        schema("pair-snd", "snd (?a, ?b)", "?b", "second projection of a literal pair"),
        Rule {
            name: "record-beta",
            kind: RuleKind::RecordBeta,
            about: "projecting a field from a literal record",
        },
        // arithmetic
        schema("neg-neg", "neg (neg ?a)", "?a", "negation is an involution"),
        schema(
            "neg-add",
            "neg (?a + ?b)",
            "neg ?a + neg ?b",
            "negation distributes over addition",
        ),
        schema(
            "sub-def",
            "?a - ?b",
            "?a + neg ?b",
            "subtraction is addition of the negation",
        ),
        Rule {
            name: "arith-fold",
            kind: RuleKind::ArithFold,
            about: "fold a closed integer expression to its value",
        },
        // univalent laws
        schema(
            "alloc-permute",
            "l <- alloc ?e; k <- alloc ?f; ret (l, k)",
            "k <- alloc ?f; l <- alloc ?e; ret (l, k)",
            "allocation order of independent cells is unobservable",
        ),
        Rule {
            name: "rep-indep",
            kind: RuleKind::RepIndep,
            about: "a cell's representation may be changed across an isomorphism \
                    provided its whole interface is conjugated",
        },
    ]
}

pub fn find_rule(name: &str) -> Result<Rule, RuleError> {
    rule_set()
        .into_iter()
        .find(|r| r.name == name)
        .ok_or_else(|| RuleError::UnknownRule(name.to_string()))
}

// ---------------------------------------------------------------------------
// schema matching

struct MatchState {
    bindings: BTreeMap<String, Term>,
    /// Stack of (schema binder, subject binder), innermost last.
    corr: Vec<(String, String)>,
}

fn strip_ann(t: &Term) -> &Term {
    match t {
        Term::Ann(e, _) => strip_ann(e),
        _ => t,
    }
}

/// Rename the subject binder names visible in `content` to their schema
/// counterparts; fails when content refers to a binder matched by a `_`
/// hole, which nothing may reference.
fn rename_to_schema(content: &Term, corr: &[(String, String)]) -> Result<Term, String> {
    let mut out = content.clone();
    let mut done: BTreeSet<&str> = BTreeSet::new();
    for (pat_name, subj_name) in corr.iter().rev() {
        if !done.insert(subj_name) {
            continue; // shadowed by an inner binder, already handled
        }
        if !free_vars(&out).contains(subj_name) {
            continue;
        }
        if pat_name == "_" {
            return Err(format!(
                "matched subterm refers to '{subj_name}', which the pattern discards"
            ));
        }
        out = subst(&out, subj_name, &Term::Var(pat_name.clone()));
    }
    Ok(out)
}

fn match_pat(pat: &Term, subj: &Term, st: &mut MatchState) -> Result<(), String> {
    let subj = strip_ann(subj);
    match (pat, subj) {
        (Term::Var(m), _) if m.starts_with('?') => {
            let content = rename_to_schema(subj, &st.corr)?;
            match st.bindings.get(m) {
                Some(prev) if alpha_eq(prev, &content) => Ok(()),
                Some(prev) => Err(format!(
                    "metavariable {m} matched both '{prev}' and '{content}'"
                )),
                None => {
                    st.bindings.insert(m.clone(), content);
                    Ok(())
                }
            }
        }
        (Term::Var(x), Term::Var(y)) => {
            let pi = st.corr.iter().rev().position(|(p, _)| p == x);
            let si = st.corr.iter().rev().position(|(_, s)| s == y);
            match (pi, si) {
                (Some(a), Some(b)) if a == b => Ok(()),
                (None, None) if x == y => Ok(()),
                _ => Err(format!("variable mismatch: pattern {x} vs subject {y}")),
            }
        }
        (Term::Int(a), Term::Int(b)) if a == b => Ok(()),
        (Term::Unit, Term::Unit) | (Term::Step, Term::Step) => Ok(()),
        (
            Term::Bind { var: vp, rhs: rp, body: bp },
            Term::Bind { var: vs, rhs: rs, body: bs },
        ) => {
            match_pat(rp, rs, st)?;
            st.corr.push((vp.clone(), vs.clone()));
            let r = match_pat(bp, bs, st);
            st.corr.pop();
            r
        }
        (Term::Lam { param: pp, body: bp, .. }, Term::Lam { param: ps, body: bs, .. }) => {
            st.corr.push((pp.clone(), ps.clone()));
            let r = match_pat(bp, bs, st);
            st.corr.pop();
            r
        }
        (
            Term::Rec { fname: fp, param: pp, body: bp, .. },
            Term::Rec { fname: fs, param: ps, body: bs, .. },
        ) => {
            st.corr.push((fp.clone(), fs.clone()));
            st.corr.push((pp.clone(), ps.clone()));
            let r = match_pat(bp, bs, st);
            st.corr.pop();
            st.corr.pop();
            r
        }
        (Term::App(a1, a2), Term::App(b1, b2))
        | (Term::Pair(a1, a2), Term::Pair(b1, b2))
        | (Term::Add(a1, a2), Term::Add(b1, b2))
        | (Term::Sub(a1, a2), Term::Sub(b1, b2))
        | (Term::Set(a1, a2), Term::Set(b1, b2)) => {
            match_pat(a1, b1, st)?;
            match_pat(a2, b2, st)
        }
        (Term::Fst(a), Term::Fst(b))
        | (Term::Snd(a), Term::Snd(b))
        | (Term::Neg(a), Term::Neg(b))
        | (Term::Ret(a), Term::Ret(b))
        | (Term::Get(a), Term::Get(b)) => match_pat(a, b, st),
        (Term::Alloc { init: a, .. }, Term::Alloc { init: b, .. }) => match_pat(a, b, st),
        (Term::Proj(a, la), Term::Proj(b, lb)) if la == lb => match_pat(a, b, st),
        (Term::Record(fa), Term::Record(fb)) if fa.len() == fb.len() => {
            for ((la, ea), (lb, eb)) in fa.iter().zip(fb) {
                if la != lb {
                    return Err(format!("record labels differ: {la} vs {lb}"));
                }
                match_pat(ea, eb, st)?;
            }
            Ok(())
        }
        _ => Err(format!("shape mismatch: pattern '{pat}' vs subject '{subj}'")),
    }
}

/// Consistently rename every (non-hole) binder in a schema pair so no name
/// collides with the subject or the user bindings. Schema binders are
/// distinct by construction, so a global rename is capture-safe.
fn freshen_schema(lhs: &Term, rhs: &Term, avoid: &BTreeSet<String>) -> (Term, Term, BTreeSet<String>) {
    let mut binders = BTreeSet::new();
    collect_binders(lhs, &mut binders);
    collect_binders(rhs, &mut binders);
    let mut avoid = avoid.clone();
    avoid.extend(all_names(lhs));
    avoid.extend(all_names(rhs));
    let mut map = BTreeMap::new();
    let mut fresh = BTreeSet::new();
    for b in &binders {
        if b == "_" {
            continue;
        }
        let nb = fresh_name(b, &avoid);
        avoid.insert(nb.clone());
        fresh.insert(nb.clone());
        map.insert(b.clone(), nb);
    }
    (rename_all(lhs, &map), rename_all(rhs, &map), fresh)
}

fn collect_binders(t: &Term, out: &mut BTreeSet<String>) {
    match t {
        Term::Lam { param, body, .. } => {
            out.insert(param.clone());
            collect_binders(body, out);
        }
        Term::Rec { fname, param, body, .. } => {
            out.insert(fname.clone());
            out.insert(param.clone());
            collect_binders(body, out);
        }
        Term::Bind { var, rhs, body } => {
            out.insert(var.clone());
            collect_binders(rhs, out);
            collect_binders(body, out);
        }
        _ => {
            for c in t.children() {
                collect_binders(c, out);
            }
        }
    }
}

/// Uniform renaming of names (binders and variables alike); sound only for
/// schemas, whose binders never shadow one another.
fn rename_all(t: &Term, map: &BTreeMap<String, String>) -> Term {
    let get = |x: &String| map.get(x).cloned().unwrap_or_else(|| x.clone());
    match t {
        Term::Var(x) => Term::Var(get(x)),
        Term::Lam { param, ann, body } => Term::Lam {
            param: get(param),
            ann: ann.clone(),
            body: Box::new(rename_all(body, map)),
        },
        Term::Rec { fname, param, ann, body } => Term::Rec {
            fname: get(fname),
            param: get(param),
            ann: ann.clone(),
            body: Box::new(rename_all(body, map)),
        },
        Term::Bind { var, rhs, body } => Term::Bind {
            var: get(var),
            rhs: Box::new(rename_all(rhs, map)),
            body: Box::new(rename_all(body, map)),
        },
        _ => t.map_children(|c| rename_all(c, map)),
    }
}

/// Substitute metavariable bindings into an instantiated schema side.
/// Capture of schema binders by the schema's own binders is intended; a
/// binding that mentions a schema binder not in scope at the occurrence is
/// a scope violation.
fn instantiate(
    rhs: &Term,
    bindings: &BTreeMap<String, Term>,
    schema_binders: &BTreeSet<String>,
    scope: &mut Vec<String>,
) -> Result<Term, String> {
    match rhs {
        Term::Var(m) if m.starts_with('?') => {
            let b = bindings
                .get(m)
                .ok_or_else(|| format!("metavariable {m} is unbound; supply it explicitly"))?;
            for v in free_vars(b) {
                if schema_binders.contains(&v) && !scope.contains(&v) {
                    return Err(format!(
                        "binding for {m} mentions '{v}', which is out of scope here"
                    ));
                }
            }
            Ok(b.clone())
        }
        Term::Lam { param, ann, body } => {
            scope.push(param.clone());
            let b = instantiate(body, bindings, schema_binders, scope);
            scope.pop();
            Ok(Term::Lam {
                param: param.clone(),
                ann: ann.clone(),
                body: Box::new(b?),
            })
        }
        Term::Rec { fname, param, ann, body } => {
            scope.push(fname.clone());
            scope.push(param.clone());
            let b = instantiate(body, bindings, schema_binders, scope);
            scope.pop();
            scope.pop();
            Ok(Term::Rec {
                fname: fname.clone(),
                param: param.clone(),
                ann: ann.clone(),
                body: Box::new(b?),
            })
        }
        Term::Bind { var, rhs: r, body } => {
            let r2 = instantiate(r, bindings, schema_binders, scope)?;
            scope.push(var.clone());
            let b = instantiate(body, bindings, schema_binders, scope);
            scope.pop();
            Ok(Term::Bind {
                var: var.clone(),
                rhs: Box::new(r2),
                body: Box::new(b?),
            })
        }
        _ => rhs.try_map_children(|c| instantiate(c, bindings, schema_binders, scope)),
    }
}

// ---------------------------------------------------------------------------
// special rule kinds

fn apply_rec_unfold(subj: &Term) -> Result<Term, String> {
    match strip_ann(subj) {
        Term::App(f, a) => match strip_ann(f) {
            rec @ Term::Rec { fname, param, body, .. } => {
                let unfolded = subst(&subst(body, fname, rec), param, strip_ann(a));
                Ok(Term::seq(Term::Step, unfolded))
            }
            _ => Err("expected a recursive function applied to an argument".into()),
        },
        _ => Err("expected an application".into()),
    }
}

fn apply_beta(subj: &Term) -> Result<Term, String> {
    match strip_ann(subj) {
        Term::App(f, a) => match strip_ann(f) {
            Term::Lam { param, body, .. } => Ok(subst(body, param, strip_ann(a))),
            _ => Err("expected a literal function applied to an argument".into()),
        },
        _ => Err("expected an application".into()),
    }
}

fn apply_bind_unit_left(subj: &Term) -> Result<Term, String> {
    match strip_ann(subj) {
        Term::Bind { var, rhs, body } => match strip_ann(rhs) {
            Term::Ret(v) => Ok(if var == "_" {
                (**body).clone()
            } else {
                subst(body, var, v)
            }),
            _ => Err("bind right-hand side is not a ret".into()),
        },
        _ => Err("expected a bind".into()),
    }
}

fn apply_record_beta(subj: &Term) -> Result<Term, String> {
    match strip_ann(subj) {
        Term::Proj(e, l) => match strip_ann(e) {
            Term::Record(fields) => fields
                .iter()
                .find(|(n, _)| n == l)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| format!("record has no field '{l}'")),
            _ => Err("projection from a non-literal record".into()),
        },
        _ => Err("expected a record projection".into()),
    }
}

fn fold_arith(t: &Term) -> Option<BigInt> {
    match strip_ann(t) {
        Term::Int(n) => Some(n.clone()),
        Term::Add(a, b) => Some(fold_arith(a)? + fold_arith(b)?),
        Term::Sub(a, b) => Some(fold_arith(a)? - fold_arith(b)?),
        Term::Neg(a) => Some(-fold_arith(a)?),
        _ => None,
    }
}

fn apply_arith_fold(subj: &Term) -> Result<Term, String> {
    if matches!(strip_ann(subj), Term::Int(_)) {
        return Err("already a literal".into());
    }
    match fold_arith(subj) {
        Some(n) => Ok(Term::Int(n)),
        None => Err("not a closed integer expression".into()),
    }
}

/// Replace every use of cell `l` in `body` by its image across the
/// isomorphism: reads post-compose the inverse, writes pre-compose the
/// forward map. Any other use of `l` (storing it, returning it, comparing
/// it) would leak the representation and blocks the rule.
fn conjugate(body: &Term, l: &str, fplus: &Term, fminus: &Term) -> Result<Term, String> {
    match body {
        Term::Get(e) if matches!(strip_ann(e), Term::Var(x) if x == l) => {
            let mut avoid = all_names(body);
            avoid.extend(all_names(fminus));
            avoid.insert(l.to_string());
            let x = fresh_name("x", &avoid);
            Ok(Term::bind(
                &x,
                Term::get(Term::var(l)),
                Term::ret(Term::app_contract(fminus, Term::var(&x))),
            ))
        }
        Term::Set(e, a) if matches!(strip_ann(e), Term::Var(x) if x == l) => {
            let a2 = conjugate(a, l, fplus, fminus)?;
            Ok(Term::set(Term::var(l), Term::app_contract(fplus, a2)))
        }
        Term::Var(x) if x == l => Err(format!(
            "cell '{l}' is used other than through get/set; representation would leak"
        )),
        Term::Lam { param, .. } if param == l => Ok(body.clone()),
        Term::Rec { fname, param, .. } if fname == l || param == l => Ok(body.clone()),
        Term::Bind { var, rhs, body: b } => {
            let rhs2 = conjugate(rhs, l, fplus, fminus)?;
            // an inner binder shadowing the cell ends its scope
            let b2 = if var == l {
                (**b).clone()
            } else {
                conjugate(b, l, fplus, fminus)?
            };
            Ok(Term::Bind {
                var: var.clone(),
                rhs: Box::new(rhs2),
                body: Box::new(b2),
            })
        }
        _ => body.try_map_children(|c| conjugate(c, l, fplus, fminus)),
    }
}

fn apply_rep_indep(subj: &Term, witness: &IsoWitness) -> Result<Term, RuleError> {
    // determine sigma and tau from the witness itself
    let (fplus_ty, _) = typecheck::infer(&Context::new(), &witness.fplus)
        .map_err(|e| RuleError::NoMatch(format!("forward map does not typecheck: {e}")))?;
    let (sigma, tau) = match fplus_ty {
        Type::Fn(s, t) => (*s, *t),
        other => {
            return Err(RuleError::NoMatch(format!(
                "forward map has non-function type {other}"
            )))
        }
    };
    let mut w = witness.clone();
    check_iso(&mut w, &sigma, &tau).map_err(|e| match e {
        IsoError::ObligationFailed(msg) => RuleError::UndischargedObligation(msg),
        IsoError::Type(te) => RuleError::NoMatch(format!("witness does not typecheck: {te}")),
        IsoError::Undecidable(msg) => RuleError::UndischargedObligation(msg),
    })?;
    match strip_ann(subj) {
        Term::Bind { var, rhs, body } => match strip_ann(rhs) {
            Term::Alloc { init, .. } => {
                if var == "_" {
                    return Err(RuleError::NoMatch(
                        "the allocated cell must be bound to a name".into(),
                    ));
                }
                // the initial value may not mention the cell being rebuilt
                let init2 = Term::app_contract(&w.fplus, (**init).clone());
                let body2 = conjugate(body, var, &w.fplus, &w.fminus)
                    .map_err(RuleError::NoMatch)?;
                Ok(Term::Bind {
                    var: var.clone(),
                    rhs: Box::new(Term::Alloc {
                        tag: None,
                        init: Box::new(init2),
                    }),
                    body: Box::new(body2),
                })
            }
            _ => Err(RuleError::NoMatch(
                "expected the cell to be bound by an allocation".into(),
            )),
        },
        _ => Err(RuleError::NoMatch(
            "expected an allocation binding a cell".into(),
        )),
    }
}

// ---------------------------------------------------------------------------
// rule application

pub fn apply_rule(
    t: &Term,
    rule_name: &str,
    path: &Path,
    dir: Direction,
    user_bindings: &BTreeMap<String, Term>,
    witness: Option<&IsoWitness>,
) -> Result<Term, RuleError> {
    let rule = find_rule(rule_name)?;
    let subj = subterm_at(t, path).ok_or(RuleError::BadPath)?;
    let replacement = match (&rule.kind, dir) {
        (RuleKind::Schema { lhs, rhs }, _) => {
            let (from, to) = match dir {
                Direction::Ltr => (lhs, rhs),
                Direction::Rtl => (rhs, lhs),
            };
            let mut avoid = all_names(t);
            for b in user_bindings.values() {
                avoid.extend(all_names(b));
            }
            let (from, to, fresh) = freshen_schema(from, to, &avoid);
            let mut st = MatchState {
                bindings: user_bindings.clone(),
                corr: Vec::new(),
            };
            match_pat(&from, subj, &mut st).map_err(RuleError::NoMatch)?;
            instantiate(&to, &st.bindings, &fresh, &mut Vec::new())
                .map_err(RuleError::NoMatch)?
        }
        (RuleKind::RecUnfold, Direction::Ltr) => {
            apply_rec_unfold(subj).map_err(RuleError::NoMatch)?
        }
        (RuleKind::Beta, Direction::Ltr) => apply_beta(subj).map_err(RuleError::NoMatch)?,
        (RuleKind::BindUnitLeft, Direction::Ltr) => {
            apply_bind_unit_left(subj).map_err(RuleError::NoMatch)?
        }
        (RuleKind::RecordBeta, Direction::Ltr) => {
            apply_record_beta(subj).map_err(RuleError::NoMatch)?
        }
        (RuleKind::ArithFold, Direction::Ltr) => {
            apply_arith_fold(subj).map_err(RuleError::NoMatch)?
        }
        (RuleKind::RepIndep, Direction::Ltr) => {
            let w = witness.ok_or(RuleError::MissingWitness)?;
            apply_rep_indep(subj, w)?
        }
        (_, Direction::Rtl) => return Err(RuleError::DirectionUnsupported(rule.name)),
    };
    let result = replace_at(t, path, replacement).ok_or(RuleError::BadPath)?;
    // type preservation, checked on whole closed terms
    if let Ok((ty_before, _)) = typecheck::infer(&Context::new(), t) {
        match typecheck::infer(&Context::new(), &result) {
            Ok((ty_after, _)) if ty_after == ty_before => {}
            Ok((ty_after, _)) => {
                return Err(RuleError::TypeRegression(format!(
                    "{ty_before} became {ty_after}"
                )))
            }
            Err(e) => {
                return Err(RuleError::TypeRegression(format!(
                    "result no longer typechecks: {e}"
                )))
            }
        }
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;

    fn apply(src: &str, rule: &str, path: &[usize], dir: Direction) -> Result<Term, RuleError> {
        apply_rule(
            &parse_term(src).unwrap(),
            rule,
            &path.to_vec(),
            dir,
            &BTreeMap::new(),
            None,
        )
    }

    fn assert_rewrites(src: &str, rule: &str, path: &[usize], expect: &str) {
        let got = apply(src, rule, path, Direction::Ltr).unwrap();
        let want = parse_term(expect).unwrap();
        assert!(alpha_eq(&got, &want), "got {got}, want {want}");
    }

    #[test]
    fn catalogue_contains_the_documented_rules() {
        let names: Vec<_> = rule_set().iter().map(|r| r.name).collect();
        for n in [
            "set-get",
            "alloc-set",
            "set-set",
            "get-get-commute",
            "get-set",
            "get-discard",
            "rec-unfold",
            "step-central",
            "alloc-permute",
            "rep-indep",
        ] {
            assert!(names.contains(&n), "missing {n}");
        }
        assert_eq!(names.len(), 22);
    }

    #[test]
    fn catalogue_matches_readme_table() {
        let readme = std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../README.md"
        ))
        .unwrap();
        let rules = rule_set();
        let documented: Vec<&str> = readme
            .lines()
            .filter_map(|l| l.strip_prefix("| ")?.split_once(" |").map(|(n, _)| n))
            .filter(|n| *n != "rule")
            .collect();
        assert_eq!(documented.len(), rules.len());
        for r in &rules {
            assert!(documented.contains(&r.name), "{} not documented", r.name);
        }
    }

    #[test]
    fn set_get_rewrites_to_its_right_side() {
        assert_rewrites(
            "l <- alloc 0; set l 5; get l",
            "set-get",
            &[1],
            "l <- alloc 0; step; set l 5; ret 5",
        );
    }

    #[test]
    fn set_set_drops_the_first_write() {
        assert_rewrites(
            "l <- alloc 0; set l 1; set l 2",
            "set-set",
            &[1],
            "l <- alloc 0; set l 2",
        );
    }

    #[test]
    fn bind_assoc_reassociates() {
        assert_rewrites(
            "x <- (y <- get l; ret (y + 1)); set l x",
            "bind-assoc",
            &[],
            "y <- get l; x <- ret (y + 1); set l x",
        );
    }

    #[test]
    fn bind_unit_left_substitutes() {
        assert_rewrites(
            "x <- ret 3; set l x",
            "bind-unit-left",
            &[],
            "set l 3",
        );
    }

    #[test]
    fn rec_unfold_inserts_step_and_substitutes() {
        assert_rewrites(
            "(rec f x : Int -> T Int. ret x) 9",
            "rec-unfold",
            &[],
            "step; ret 9",
        );
    }

    #[test]
    fn non_matching_path_is_rejected() {
        match apply("l <- alloc 0; get l", "set-set", &[1], Direction::Ltr) {
            Err(RuleError::NoMatch(_)) => {}
            other => panic!("expected NoMatch, got {other:?}"),
        }
    }

    #[test]
    fn schema_rules_apply_right_to_left() {
        assert!(matches!(
            apply("x + neg 1", "sub-def", &[], Direction::Rtl),
            Ok(t) if alpha_eq(&t, &parse_term("x - 1").unwrap())
        ));
    }

    #[test]
    fn get_discard_needs_binding_when_reversed() {
        // reversed, the read target cannot be inferred from the right side
        let whole = parse_term("l <- alloc 5; step; ret 0").unwrap();
        let err = apply_rule(
            &whole,
            "get-discard",
            &vec![1],
            Direction::Rtl,
            &BTreeMap::new(),
            None,
        );
        assert!(matches!(err, Err(RuleError::NoMatch(_))));
        let mut binds = BTreeMap::new();
        binds.insert("?e".to_string(), Term::var("l"));
        let got = apply_rule(&whole, "get-discard", &vec![1], Direction::Rtl, &binds, None)
            .unwrap();
        assert!(alpha_eq(
            &got,
            &parse_term("l <- alloc 5; get l; ret 0").unwrap()
        ));
    }

    #[test]
    fn escaping_binder_blocks_eta() {
        // \x. (f x) x would need ?f to mention x out of scope
        let err = apply("\\x : Int. f x x", "eta", &[], Direction::Ltr);
        assert!(matches!(err, Err(RuleError::NoMatch(_))));
    }

    #[test]
    fn hole_pattern_rejects_dependent_continuation() {
        // get-discard's left side discards the read value; a continuation
        // using it must not match
        let t = parse_term("l <- alloc 0; x <- get l; ret x").unwrap();
        let err = apply_rule(
            &t,
            "get-discard",
            &vec![1],
            Direction::Ltr,
            &BTreeMap::new(),
            None,
        );
        assert!(matches!(err, Err(RuleError::NoMatch(_))));
    }

    #[test]
    fn type_preservation_guards_results() {
        // well-typed closed input stays well-typed at the same type under
        // every successful application
        let t = "l <- alloc 0; set l 1; set l 2";
        let before = typecheck::infer(&Context::new(), &parse_term(t).unwrap())
            .unwrap()
            .0;
        let after = apply(t, "set-set", &[1], Direction::Ltr).unwrap();
        let ty = typecheck::infer(&Context::new(), &after).unwrap().0;
        assert_eq!(ty, before);
    }

    #[test]
    fn rep_indep_conjugates_the_counter() {
        let pos = parse_term(
            "l <- alloc 0; ret {incr -> i <- get l; set l (i + 1), read -> get l}",
        )
        .unwrap();
        let neg_lam = parse_term("\\x : Int. neg x").unwrap();
        let w = IsoWitness::new(neg_lam.clone(), neg_lam);
        let got = apply_rule(
            &pos,
            "rep-indep",
            &Vec::new(),
            Direction::Ltr,
            &BTreeMap::new(),
            Some(&w),
        )
        .unwrap();
        let want = parse_term(
            "l <- alloc (neg 0); ret {incr -> i <- (x <- get l; ret (neg x)); set l (neg (i + 1)), read -> x <- get l; ret (neg x)}",
        )
        .unwrap();
        assert!(alpha_eq(&got, &want), "got {got}");
    }

    #[test]
    fn rep_indep_requires_a_real_isomorphism() {
        let pos = parse_term("l <- alloc 0; ret {read -> get l}").unwrap();
        let inc = parse_term("\\x : Int. x + 1").unwrap();
        let w = IsoWitness::new(inc.clone(), inc);
        let err = apply_rule(
            &pos,
            "rep-indep",
            &Vec::new(),
            Direction::Ltr,
            &BTreeMap::new(),
            Some(&w),
        );
        assert!(matches!(err, Err(RuleError::UndischargedObligation(_))));
    }

    #[test]
    fn rep_indep_blocks_leaking_the_location() {
        let t = parse_term("l <- alloc 0; ret l").unwrap();
        let neg_lam = parse_term("\\x : Int. neg x").unwrap();
        let w = IsoWitness::new(neg_lam.clone(), neg_lam);
        let err = apply_rule(
            &t,
            "rep-indep",
            &Vec::new(),
            Direction::Ltr,
            &BTreeMap::new(),
            Some(&w),
        );
        assert!(matches!(err, Err(RuleError::NoMatch(_))));
    }
}
