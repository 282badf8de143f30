//! Normalization of first-order straight-line computations (no recursion,
//! no lambdas): monad-law flattening oriented left-to-right plus a linear
//! normal form for integer arithmetic. Also the isomorphism checker that
//! discharges representation-independence obligations, by normalization
//! when the round-trips land in this fragment and by exhaustive testing
//! over a value pool otherwise.

use crate::equiv::arg_pool;
use crate::interp::{eval_pure, Env};
use crate::syntax::{alpha_eq, all_names, fresh_name, free_vars, subst, Term, Type};
use crate::typecheck::{self, Context, TypeError};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum NormalizeError {
    #[error("outside the straight-line fragment: {0}")]
    OutOfFragment(String),
}

/// Reject terms containing functions or recursion anywhere.
fn check_fragment(t: &Term) -> Result<(), NormalizeError> {
    match t {
        Term::Lam { .. } | Term::Rec { .. } | Term::App(..) => Err(
            NormalizeError::OutOfFragment(format!("contains '{t}'")),
        ),
        _ => {
            for c in t.children() {
                check_fragment(c)?;
            }
            Ok(())
        }
    }
}

/// Normalize a straight-line term: a computation built from bind, ret,
/// alloc, get, set and step over pure first-order data, or such a pure
/// term itself.
pub fn normalize_straightline(t: &Term) -> Result<Term, NormalizeError> {
    check_fragment(t)?;
    Ok(norm_comp(t))
}

fn is_comp(t: &Term) -> bool {
    matches!(
        t,
        Term::Bind { .. }
            | Term::Ret(_)
            | Term::Alloc { .. }
            | Term::Get(_)
            | Term::Set(..)
            | Term::Step
    )
}

fn norm_comp(t: &Term) -> Term {
    match t {
        Term::Ret(e) => Term::ret(norm_pure(e)),
        Term::Bind { var, rhs, body } => {
            let rhs_n = norm_comp(rhs);
            match rhs_n {
                // left unit
                Term::Ret(v) => {
                    if var == "_" {
                        norm_comp(body)
                    } else {
                        norm_comp(&subst(body, var, &v))
                    }
                }
                // associativity, hoisting the inner bind
                Term::Bind {
                    var: y,
                    rhs: a,
                    body: b,
                } => {
                    let mut avoid = free_vars(body);
                    avoid.extend(all_names(body));
                    avoid.insert(var.clone());
                    let (y2, b2) = if y != "_" && avoid.contains(&y) {
                        let fresh = fresh_name(&y, &avoid);
                        (fresh.clone(), subst(&b, &y, &Term::Var(fresh)))
                    } else {
                        (y.clone(), (*b).clone())
                    };
                    norm_comp(&Term::Bind {
                        var: y2,
                        rhs: a,
                        body: Box::new(Term::Bind {
                            var: var.clone(),
                            rhs: Box::new(b2),
                            body: body.clone(),
                        }),
                    })
                }
                atomic => {
                    let body_n = norm_comp(body);
                    // right unit
                    if let Term::Ret(v) = &body_n {
                        if matches!(&**v, Term::Var(x) if x == var) {
                            return atomic;
                        }
                    }
                    Term::Bind {
                        var: var.clone(),
                        rhs: Box::new(atomic),
                        body: Box::new(body_n),
                    }
                }
            }
        }
        Term::Alloc { tag, init } => Term::Alloc {
            tag: tag.clone(),
            init: Box::new(norm_pure(init)),
        },
        Term::Get(e) => Term::get(norm_pure(e)),
        Term::Set(a, b) => Term::set(norm_pure(a), norm_pure(b)),
        Term::Step => Term::Step,
        Term::Ann(e, _) => norm_comp(e),
        _ => norm_pure(t),
    }
}

/// A linear polynomial: integer coefficients over non-arithmetic atoms,
/// keyed by printed form, plus a constant.
struct Poly {
    atoms: BTreeMap<String, (Term, BigInt)>,
    constant: BigInt,
}

impl Poly {
    fn constant(n: BigInt) -> Poly {
        Poly {
            atoms: BTreeMap::new(),
            constant: n,
        }
    }
    fn atom(t: Term) -> Poly {
        let mut atoms = BTreeMap::new();
        atoms.insert(t.to_string(), (t, BigInt::from(1)));
        Poly {
            atoms,
            constant: BigInt::zero(),
        }
    }
    fn add(mut self, other: Poly) -> Poly {
        for (k, (t, c)) in other.atoms {
            let e = self
                .atoms
                .entry(k)
                .or_insert_with(|| (t, BigInt::zero()));
            e.1 += c;
        }
        self.atoms.retain(|_, (_, c)| !c.is_zero());
        self.constant += other.constant;
        self
    }
    fn neg(mut self) -> Poly {
        for (_, c) in self.atoms.values_mut() {
            *c = -std::mem::take(c);
        }
        self.constant = -self.constant;
        self
    }

    /// Render as a canonical term: atoms in key order, repeated for their
    /// coefficient magnitude via `+`/`-` chains, constant last.
    fn render(self) -> Term {
        let mut acc: Option<Term> = None;
        for (_, (t, c)) in self.atoms {
            let n: u64 = c.abs().try_into().expect("coefficient fits u64");
            for _ in 0..n {
                acc = Some(match acc {
                    None if c.is_negative() => Term::Neg(Box::new(t.clone())),
                    None => t.clone(),
                    Some(a) if c.is_negative() => {
                        Term::Sub(Box::new(a), Box::new(t.clone()))
                    }
                    Some(a) => Term::Add(Box::new(a), Box::new(t.clone())),
                });
            }
        }
        match acc {
            None => Term::Int(self.constant),
            Some(a) if self.constant.is_zero() => a,
            Some(a) if self.constant.is_negative() => {
                Term::Sub(Box::new(a), Box::new(Term::Int(-self.constant)))
            }
            Some(a) => Term::Add(Box::new(a), Box::new(Term::Int(self.constant))),
        }
    }
}

fn to_poly(t: &Term) -> Poly {
    match t {
        Term::Int(n) => Poly::constant(n.clone()),
        Term::Add(a, b) => to_poly(a).add(to_poly(b)),
        Term::Sub(a, b) => to_poly(a).add(to_poly(b).neg()),
        Term::Neg(a) => to_poly(a).neg(),
        Term::Ann(e, _) => to_poly(e),
        _ => Poly::atom(norm_pure_nonarith(t)),
    }
}

fn norm_pure(t: &Term) -> Term {
    match t {
        Term::Int(_) | Term::Add(..) | Term::Sub(..) | Term::Neg(_) => to_poly(t).render(),
        _ => norm_pure_nonarith(t),
    }
}

fn norm_pure_nonarith(t: &Term) -> Term {
    match t {
        Term::Fst(e) => match norm_pure(e) {
            Term::Pair(a, _) => *a,
            e2 => Term::Fst(Box::new(e2)),
        },
        Term::Snd(e) => match norm_pure(e) {
            Term::Pair(_, b) => *b,
            e2 => Term::Snd(Box::new(e2)),
        },
        Term::Proj(e, l) => match norm_pure(e) {
            Term::Record(fields) => fields
                .iter()
                .find(|(n, _)| n == l)
                .map(|(_, v)| v.clone())
                .unwrap_or_else(|| Term::Proj(Box::new(Term::Record(fields)), l.clone())),
            e2 => Term::Proj(Box::new(e2), l.clone()),
        },
        Term::Ann(e, _) => norm_pure(e),
        _ if is_comp(t) => norm_comp(t),
        _ => t.map_children(norm_pure),
    }
}

// ---------------------------------------------------------------------------
// isomorphism witnesses

/// A candidate isomorphism between two representations: forward and
/// inverse maps, with the status of the two round-trip obligations.
#[derive(Debug, Clone, PartialEq)]
pub struct IsoWitness {
    pub fplus: Term,
    pub fminus: Term,
    pub status: ObligationStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObligationStatus {
    Unchecked,
    ByNormalization,
    ByPoolTesting,
}

impl IsoWitness {
    pub fn new(fplus: Term, fminus: Term) -> IsoWitness {
        IsoWitness {
            fplus,
            fminus,
            status: ObligationStatus::Unchecked,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum IsoError {
    #[error("round-trip is not the identity: {0}")]
    ObligationFailed(String),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("cannot decide the obligation: {0}")]
    Undecidable(String),
}

/// Discharge both round-trip obligations of a witness between `sigma` and
/// `tau`, recording how they were discharged.
pub fn check_iso(w: &mut IsoWitness, sigma: &Type, tau: &Type) -> Result<(), IsoError> {
    typecheck::check(&Context::new(), &w.fplus, &Type::fun(sigma.clone(), tau.clone()))?;
    typecheck::check(&Context::new(), &w.fminus, &Type::fun(tau.clone(), sigma.clone()))?;
    let m1 = check_round_trip(&w.fminus, &w.fplus, sigma)?;
    let m2 = check_round_trip(&w.fplus, &w.fminus, tau)?;
    w.status = if m1 == ObligationStatus::ByNormalization && m2 == m1 {
        ObligationStatus::ByNormalization
    } else {
        ObligationStatus::ByPoolTesting
    };
    Ok(())
}

/// Check `x : ty |- outer (inner x) = x`.
fn check_round_trip(outer: &Term, inner: &Term, ty: &Type) -> Result<ObligationStatus, IsoError> {
    let mut avoid = all_names(outer);
    avoid.extend(all_names(inner));
    let x = fresh_name("x", &avoid);
    let round = Term::app_contract(outer, Term::app_contract(inner, Term::var(&x)));
    if check_fragment(&round).is_ok() {
        let normal = norm_pure(&round);
        if alpha_eq(&normal, &Term::var(&x)) {
            return Ok(ObligationStatus::ByNormalization);
        }
        // not syntactically the identity; hunt for a concrete counterexample
        if let Some(pool) = arg_pool(ty) {
            for v in &pool {
                let got = subst(&round, &x, v);
                let got_n = norm_pure(&got);
                if !alpha_eq(&got_n, v) {
                    return Err(IsoError::ObligationFailed(format!(
                        "at {v} the round-trip gives {got_n}"
                    )));
                }
            }
        }
        return Err(IsoError::ObligationFailed(format!(
            "normal form is {normal}, not the variable itself"
        )));
    }
    // out of fragment: exhaustive testing over the value pool
    let pool = arg_pool(ty).ok_or_else(|| {
        Undecidable(format!("no value pool for type {ty}"))
    })?;
    for v in &pool {
        let vv = eval_pure(&Env::new(), v)
            .map_err(|e| Undecidable(format!("pool value does not evaluate: {e}")))?;
        let got = eval_pure(&Env::new(), &subst(&round, &x, v))
            .map_err(|e| Undecidable(format!("round-trip does not evaluate: {e}")))?;
        if got != vv {
            return Err(IsoError::ObligationFailed(format!(
                "at {v} the round-trip gives {got}"
            )));
        }
    }
    Ok(ObligationStatus::ByPoolTesting)
}

use IsoError::Undecidable;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;

    fn norm(src: &str) -> Term {
        normalize_straightline(&parse_term(src).unwrap()).unwrap()
    }

    #[test]
    fn left_unit_collapses() {
        assert!(alpha_eq(&norm("x <- ret 0; ret x"), &parse_term("ret 0").unwrap()));
    }

    #[test]
    fn ring_simplification() {
        assert_eq!(norm("neg (neg i + 1)").to_string(), "i - 1");
        assert_eq!(norm("neg 0").to_string(), "0");
        assert_eq!(norm("neg 1").to_string(), "-1");
        assert_eq!(norm("(i + 2) - (i + 1) + i").to_string(), "i + 1");
        assert_eq!(norm("i + i + i - i").to_string(), "i + i");
    }

    #[test]
    fn associativity_flattens() {
        let got = norm("x <- (y <- get l; ret (y + 1)); set l x");
        assert!(alpha_eq(
            &got,
            &parse_term("y <- get l; set l (y + 1)").unwrap()
        ));
    }

    #[test]
    fn right_unit_collapses() {
        assert!(alpha_eq(&norm("x <- get l; ret x"), &parse_term("get l").unwrap()));
    }

    #[test]
    fn hoisting_avoids_capture() {
        // the inner binder y collides with the free y in the outer body
        let got = norm("x <- (y <- get l; ret y); set y x");
        assert!(alpha_eq(
            &got,
            &parse_term("z <- get l; set y z").unwrap()
        ));
    }

    #[test]
    fn normalization_is_idempotent() {
        for src in [
            "x <- (y <- get l; ret (y + 1)); set l x",
            "neg (neg i + 1)",
            "l <- alloc 0; step; x <- get l; set l (x + 1 - 1)",
        ] {
            let once = norm(src);
            let twice = normalize_straightline(&once).unwrap();
            assert!(alpha_eq(&once, &twice), "{src}: {once} vs {twice}");
        }
    }

    #[test]
    fn recursion_is_out_of_fragment() {
        let t = parse_term("(rec f x : Int -> T Int. f x) 0").unwrap();
        assert!(matches!(
            normalize_straightline(&t),
            Err(NormalizeError::OutOfFragment(_))
        ));
    }

    #[test]
    fn neg_neg_is_valid_iso() {
        let neg_lam = parse_term("\\x : Int. neg x").unwrap();
        let mut w = IsoWitness::new(neg_lam.clone(), neg_lam);
        check_iso(&mut w, &Type::Int, &Type::Int).unwrap();
        assert_eq!(w.status, ObligationStatus::ByNormalization);
    }

    #[test]
    fn successor_pair_is_not_an_iso() {
        let inc = parse_term("\\x : Int. x + 1").unwrap();
        let mut w = IsoWitness::new(inc.clone(), inc);
        let err = check_iso(&mut w, &Type::Int, &Type::Int).unwrap_err();
        match err {
            IsoError::ObligationFailed(msg) => assert!(msg.contains("at -2"), "{msg}"),
            e => panic!("expected failure, got {e:?}"),
        }
    }

    #[test]
    fn successor_predecessor_is_valid_iso() {
        let inc = parse_term("\\x : Int. x + 1").unwrap();
        let dec = parse_term("\\x : Int. x - 1").unwrap();
        let mut w = IsoWitness::new(inc, dec);
        check_iso(&mut w, &Type::Int, &Type::Int).unwrap();
        assert_eq!(w.status, ObligationStatus::ByNormalization);
    }
}
