//! Bidirectional typechecker. Inference succeeds on all terms whose
//! lambdas and recursive functions carry annotations; checking mode
//! propagates expected types into unannotated binders. The checker also
//! elaborates terms, filling in the cell type on every allocation.

use crate::syntax::{Path, Term, Type};
use std::fmt;
use thiserror::Error;

/// Ordered typing context; names shadow to the right.
#[derive(Debug, Clone, Default)]
pub struct Context {
    entries: Vec<(String, Type)>,
}

impl Context {
    pub fn new() -> Self {
        Context::default()
    }
    pub fn lookup(&self, x: &str) -> Option<&Type> {
        self.entries.iter().rev().find(|(n, _)| n == x).map(|(_, t)| t)
    }
    pub fn extended(&self, x: &str, t: Type) -> Context {
        let mut c = self.clone();
        c.entries.push((x.to_string(), t));
        c
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub struct TypeError {
    pub path: Path,
    pub msg: String,
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = if self.path.is_empty() {
            "root".to_string()
        } else {
            self.path
                .iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join(".")
        };
        write!(f, "type error at {p}: {}", self.msg)
    }
}

fn err<T>(path: &[usize], msg: impl Into<String>) -> Result<T, TypeError> {
    Err(TypeError {
        path: path.to_vec(),
        msg: msg.into(),
    })
}

fn child(path: &[usize], i: usize) -> Path {
    let mut p = path.to_vec();
    p.push(i);
    p
}

/// Infer the type of `t`, returning the elaborated term alongside.
pub fn infer(ctx: &Context, t: &Term) -> Result<(Type, Term), TypeError> {
    infer_at(ctx, t, &[])
}

/// Check `t` against `ty`, returning the elaborated term.
pub fn check(ctx: &Context, t: &Term, ty: &Type) -> Result<Term, TypeError> {
    check_at(ctx, t, ty, &[])
}

fn infer_at(ctx: &Context, t: &Term, path: &[usize]) -> Result<(Type, Term), TypeError> {
    match t {
        Term::Var(x) => match ctx.lookup(x) {
            Some(ty) => Ok((ty.clone(), t.clone())),
            None => err(path, format!("unbound variable '{x}'")),
        },
        Term::Int(_) => Ok((Type::Int, t.clone())),
        Term::Unit => Ok((Type::Unit, t.clone())),
        Term::Step => Ok((Type::comp(Type::Unit), t.clone())),
        Term::Lam { param, ann, body } => match ann {
            Some(dom) => {
                let (cod, body2) = infer_at(&ctx.extended(param, dom.clone()), body, &child(path, 0))?;
                Ok((
                    Type::fun(dom.clone(), cod),
                    Term::Lam {
                        param: param.clone(),
                        ann: ann.clone(),
                        body: Box::new(body2),
                    },
                ))
            }
            None => err(path, "cannot infer the type of an unannotated lambda"),
        },
        Term::Rec {
            fname,
            param,
            ann,
            body,
        } => match ann {
            Some(fty @ Type::Fn(dom, cod)) => {
                if !matches!(**cod, Type::T(_)) {
                    return err(path, "a recursive function must return a computation type");
                }
                let ctx2 = ctx
                    .extended(fname, fty.clone())
                    .extended(param, (**dom).clone());
                let body2 = check_at(&ctx2, body, cod, &child(path, 0))?;
                Ok((
                    fty.clone(),
                    Term::Rec {
                        fname: fname.clone(),
                        param: param.clone(),
                        ann: ann.clone(),
                        body: Box::new(body2),
                    },
                ))
            }
            Some(_) => err(path, "a rec annotation must be a function type"),
            None => err(path, "cannot infer the type of an unannotated rec"),
        },
        Term::App(f, a) => {
            let (fty, f2) = infer_at(ctx, f, &child(path, 0))?;
            match fty {
                Type::Fn(dom, cod) => {
                    let a2 = check_at(ctx, a, &dom, &child(path, 1))?;
                    Ok((*cod, Term::App(Box::new(f2), Box::new(a2))))
                }
                other => err(path, format!("applied a non-function of type {other}")),
            }
        }
        Term::Pair(a, b) => {
            let (ta, a2) = infer_at(ctx, a, &child(path, 0))?;
            let (tb, b2) = infer_at(ctx, b, &child(path, 1))?;
            Ok((Type::prod(ta, tb), Term::Pair(Box::new(a2), Box::new(b2))))
        }
        Term::Fst(e) => {
            let (te, e2) = infer_at(ctx, e, &child(path, 0))?;
            match te {
                Type::Prod(a, _) => Ok((*a, Term::Fst(Box::new(e2)))),
                other => err(path, format!("fst applied to non-product of type {other}")),
            }
        }
        Term::Snd(e) => {
            let (te, e2) = infer_at(ctx, e, &child(path, 0))?;
            match te {
                Type::Prod(_, b) => Ok((*b, Term::Snd(Box::new(e2)))),
                other => err(path, format!("snd applied to non-product of type {other}")),
            }
        }
        Term::Record(fields) => {
            let mut tys = Vec::new();
            let mut elab = Vec::new();
            for (i, (l, e)) in fields.iter().enumerate() {
                let (te, e2) = infer_at(ctx, e, &child(path, i))?;
                tys.push((l.clone(), te));
                elab.push((l.clone(), e2));
            }
            Ok((Type::Record(tys), Term::Record(elab)))
        }
        Term::Proj(e, l) => {
            let (te, e2) = infer_at(ctx, e, &child(path, 0))?;
            match te {
                Type::Record(fields) => match fields.iter().find(|(n, _)| n == l) {
                    Some((_, ty)) => Ok((ty.clone(), Term::Proj(Box::new(e2), l.clone()))),
                    None => err(path, format!("record has no label '{l}'")),
                },
                other => err(path, format!("projection from non-record of type {other}")),
            }
        }
        Term::Add(a, b) | Term::Sub(a, b) => {
            let a2 = check_at(ctx, a, &Type::Int, &child(path, 0))?;
            let b2 = check_at(ctx, b, &Type::Int, &child(path, 1))?;
            let mk = |a, b| match t {
                Term::Add(..) => Term::Add(a, b),
                _ => Term::Sub(a, b),
            };
            Ok((Type::Int, mk(Box::new(a2), Box::new(b2))))
        }
        Term::Neg(e) => {
            let e2 = check_at(ctx, e, &Type::Int, &child(path, 0))?;
            Ok((Type::Int, Term::Neg(Box::new(e2))))
        }
        Term::Ret(e) => {
            let (te, e2) = infer_at(ctx, e, &child(path, 0))?;
            Ok((Type::comp(te), Term::Ret(Box::new(e2))))
        }
        Term::Bind { var, rhs, body } => {
            let (trhs, rhs2) = infer_at(ctx, rhs, &child(path, 0))?;
            match trhs {
                Type::T(sigma) => {
                    let ctx2 = ctx.extended(var, (*sigma).clone());
                    let (tbody, body2) = infer_at(&ctx2, body, &child(path, 1))?;
                    match tbody {
                        Type::T(_) => Ok((
                            tbody,
                            Term::Bind {
                                var: var.clone(),
                                rhs: Box::new(rhs2),
                                body: Box::new(body2),
                            },
                        )),
                        other => err(
                            &child(path, 1),
                            format!("bind body must be a computation, found {other}"),
                        ),
                    }
                }
                other => err(
                    &child(path, 0),
                    format!("bind right-hand side must be a computation, found {other}"),
                ),
            }
        }
        Term::Alloc { init, .. } => {
            let (sigma, init2) = infer_at(ctx, init, &child(path, 0))?;
            Ok((
                Type::comp(Type::reference(sigma.clone())),
                Term::Alloc {
                    tag: Some(sigma),
                    init: Box::new(init2),
                },
            ))
        }
        Term::Get(e) => {
            let (te, e2) = infer_at(ctx, e, &child(path, 0))?;
            match te {
                Type::Ref(sigma) => Ok((Type::comp(*sigma), Term::Get(Box::new(e2)))),
                other => err(path, format!("get applied to non-reference of type {other}")),
            }
        }
        Term::Set(e1, e2) => {
            let (t1, a) = infer_at(ctx, e1, &child(path, 0))?;
            match t1 {
                Type::Ref(sigma) => {
                    let b = check_at(ctx, e2, &sigma, &child(path, 1))?;
                    Ok((
                        Type::comp(Type::Unit),
                        Term::Set(Box::new(a), Box::new(b)),
                    ))
                }
                other => err(path, format!("set applied to non-reference of type {other}")),
            }
        }
        Term::Ann(e, ty) => {
            let e2 = check_at(ctx, e, ty, &child(path, 0))?;
            Ok((ty.clone(), Term::Ann(Box::new(e2), ty.clone())))
        }
    }
}

fn check_at(ctx: &Context, t: &Term, ty: &Type, path: &[usize]) -> Result<Term, TypeError> {
    match (t, ty) {
        (Term::Lam { param, ann: None, body }, Type::Fn(dom, cod)) => {
            let body2 = check_at(&ctx.extended(param, (**dom).clone()), body, cod, &child(path, 0))?;
            Ok(Term::Lam {
                param: param.clone(),
                ann: None,
                body: Box::new(body2),
            })
        }
        (
            Term::Rec {
                fname,
                param,
                ann: None,
                body,
            },
            Type::Fn(dom, cod),
        ) => {
            if !matches!(**cod, Type::T(_)) {
                return err(path, "a recursive function must return a computation type");
            }
            let ctx2 = ctx
                .extended(fname, ty.clone())
                .extended(param, (**dom).clone());
            let body2 = check_at(&ctx2, body, cod, &child(path, 0))?;
            Ok(Term::Rec {
                fname: fname.clone(),
                param: param.clone(),
                ann: None,
                body: Box::new(body2),
            })
        }
        (Term::Pair(a, b), Type::Prod(ta, tb)) => {
            let a2 = check_at(ctx, a, ta, &child(path, 0))?;
            let b2 = check_at(ctx, b, tb, &child(path, 1))?;
            Ok(Term::Pair(Box::new(a2), Box::new(b2)))
        }
        (Term::Record(fields), Type::Record(ftys)) if fields.len() == ftys.len() => {
            let mut elab = Vec::new();
            for (i, ((l, e), (lt, et))) in fields.iter().zip(ftys).enumerate() {
                if l != lt {
                    return err(
                        &child(path, i),
                        format!("record label mismatch: expected '{lt}', found '{l}'"),
                    );
                }
                elab.push((l.clone(), check_at(ctx, e, et, &child(path, i))?));
            }
            Ok(Term::Record(elab))
        }
        (Term::Ret(e), Type::T(sigma)) => {
            let e2 = check_at(ctx, e, sigma, &child(path, 0))?;
            Ok(Term::Ret(Box::new(e2)))
        }
        (Term::Bind { var, rhs, body }, Type::T(_)) => {
            let (trhs, rhs2) = infer_at(ctx, rhs, &child(path, 0))?;
            match trhs {
                Type::T(sigma) => {
                    let ctx2 = ctx.extended(var, (*sigma).clone());
                    let body2 = check_at(&ctx2, body, ty, &child(path, 1))?;
                    Ok(Term::Bind {
                        var: var.clone(),
                        rhs: Box::new(rhs2),
                        body: Box::new(body2),
                    })
                }
                other => err(
                    &child(path, 0),
                    format!("bind right-hand side must be a computation, found {other}"),
                ),
            }
        }
        (Term::Alloc { init, .. }, Type::T(inner)) => match &**inner {
            Type::Ref(sigma) => {
                let init2 = check_at(ctx, init, sigma, &child(path, 0))?;
                Ok(Term::Alloc {
                    tag: Some((**sigma).clone()),
                    init: Box::new(init2),
                })
            }
            other => err(path, format!("alloc produces T (Ref _), expected T {other}")),
        },
        _ => {
            let (found, t2) = infer_at(ctx, t, path)?;
            if &found == ty {
                Ok(t2)
            } else {
                err(path, format!("expected {ty}, found {found}"))
            }
        }
    }
}

/// Typing context for the subterm addressed by `path` inside `t`, assuming
/// `t` typechecks in `ctx`. Fails where inference cannot see binder types.
pub fn context_at_path(ctx: &Context, t: &Term, path: &[usize]) -> Result<Context, TypeError> {
    if path.is_empty() {
        return Ok(ctx.clone());
    }
    let (i, rest) = (path[0], &path[1..]);
    match t {
        Term::Bind { var, rhs, body } => {
            if i == 0 {
                context_at_path(ctx, rhs, rest)
            } else if i == 1 {
                let (trhs, _) = infer_at(ctx, rhs, &[])?;
                match trhs {
                    Type::T(sigma) => context_at_path(&ctx.extended(var, *sigma), body, rest),
                    _ => err(&[], "bind right-hand side must be a computation"),
                }
            } else {
                err(&[], "invalid path")
            }
        }
        Term::Lam { param, ann, body } if i == 0 => match ann {
            Some(dom) => context_at_path(&ctx.extended(param, dom.clone()), body, rest),
            None => err(&[], "cannot determine context under an unannotated lambda"),
        },
        Term::Rec {
            fname,
            param,
            ann,
            body,
        } if i == 0 => match ann {
            Some(fty @ Type::Fn(dom, _)) => context_at_path(
                &ctx.extended(fname, fty.clone()).extended(param, (**dom).clone()),
                body,
                rest,
            ),
            _ => err(&[], "cannot determine context under an unannotated rec"),
        },
        _ => match t.children().get(i) {
            Some(c) => context_at_path(ctx, c, rest),
            None => err(&[], "invalid path"),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_term, parse_type};

    fn ty_of(src: &str) -> Result<Type, TypeError> {
        infer(&Context::new(), &parse_term(src).unwrap()).map(|(t, _)| t)
    }

    #[test]
    fn step_has_type_t_unit() {
        assert_eq!(ty_of("step").unwrap(), parse_type("T Unit").unwrap());
    }

    #[test]
    fn alloc_int_has_type_t_ref_int() {
        assert_eq!(ty_of("alloc 0").unwrap(), parse_type("T (Ref Int)").unwrap());
    }

    #[test]
    fn pos_counter_type() {
        let src = "l <- alloc 0; ret {incr -> i <- get l; set l (i + 1), read -> get l}";
        assert_eq!(
            ty_of(src).unwrap(),
            parse_type("T {incr : T Unit, read : T Int}").unwrap()
        );
    }

    #[test]
    fn check_ret_unit() {
        let t = parse_term("ret ()").unwrap();
        assert!(check(&Context::new(), &t, &parse_type("T Unit").unwrap()).is_ok());
    }

    #[test]
    fn check_step_against_t_int_fails() {
        let t = parse_term("step").unwrap();
        assert!(check(&Context::new(), &t, &parse_type("T Int").unwrap()).is_err());
    }

    #[test]
    fn rec_rule() {
        assert_eq!(
            ty_of("rec f x : Int -> T Int. ret x").unwrap(),
            parse_type("Int -> T Int").unwrap()
        );
    }

    #[test]
    fn elaboration_fills_alloc_tags() {
        let t = parse_term("alloc (1, ())").unwrap();
        let (_, elab) = infer(&Context::new(), &t).unwrap();
        match elab {
            Term::Alloc { tag: Some(tag), .. } => {
                assert_eq!(tag, parse_type("Int * Unit").unwrap())
            }
            _ => panic!(),
        }
    }

    #[test]
    fn error_carries_path() {
        let t = parse_term("l <- alloc 0; set l ()").unwrap();
        let e = infer(&Context::new(), &t).unwrap_err();
        assert!(!e.path.is_empty());
    }

    #[test]
    fn context_at_path_sees_binders() {
        let t = parse_term("l <- alloc 0; get l").unwrap();
        let ctx = context_at_path(&Context::new(), &t, &[1, 0]).unwrap();
        assert_eq!(ctx.lookup("l"), Some(&parse_type("Ref Int").unwrap()));
    }
}
