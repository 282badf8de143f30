//! Abstract syntax of the object language: types, terms, paths into terms,
//! capture-avoiding substitution and alpha-equivalence.

mod parse;
mod print;

pub use parse::{parse_defs, parse_term, parse_type, Def, ParseError};

use num_bigint::BigInt;
use std::collections::BTreeSet;

/// Object-language types. `Cell s` is an abbreviation, expanded by
/// [`Type::cell`] rather than carried as a constructor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Type {
    Unit,
    Int,
    Fn(Box<Type>, Box<Type>),
    Prod(Box<Type>, Box<Type>),
    /// Record labels are pairwise distinct; order is significant.
    Record(Vec<(String, Type)>),
    T(Box<Type>),
    Ref(Box<Type>),
}

impl Type {
    pub fn fun(dom: Type, cod: Type) -> Type {
        Type::Fn(Box::new(dom), Box::new(cod))
    }
    pub fn prod(a: Type, b: Type) -> Type {
        Type::Prod(Box::new(a), Box::new(b))
    }
    pub fn comp(body: Type) -> Type {
        Type::T(Box::new(body))
    }
    pub fn reference(body: Type) -> Type {
        Type::Ref(Box::new(body))
    }

    /// `Cell s = T s * (s -> T Unit)`, the abstract interface of a cell.
    pub fn cell(s: Type) -> Type {
        Type::prod(
            Type::comp(s.clone()),
            Type::fun(s, Type::comp(Type::Unit)),
        )
    }

    /// Ground types are those whose values can be observed directly:
    /// built from Int, Unit, products and references.
    pub fn is_ground(&self) -> bool {
        match self {
            Type::Unit | Type::Int => true,
            Type::Prod(a, b) => a.is_ground() && b.is_ground(),
            Type::Ref(_) => true,
            _ => false,
        }
    }
}

/// Object-language terms. Binders carry optional type annotations so that
/// the bidirectional typechecker can run in inference mode when asked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Var(String),
    Lam {
        param: String,
        ann: Option<Type>,
        body: Box<Term>,
    },
    App(Box<Term>, Box<Term>),
    Pair(Box<Term>, Box<Term>),
    Fst(Box<Term>),
    Snd(Box<Term>),
    Record(Vec<(String, Term)>),
    Proj(Box<Term>, String),
    Int(BigInt),
    Add(Box<Term>, Box<Term>),
    Sub(Box<Term>, Box<Term>),
    Neg(Box<Term>),
    Unit,
    Ret(Box<Term>),
    Bind {
        var: String,
        rhs: Box<Term>,
        body: Box<Term>,
    },
    /// The tag records the cell type filled in by the typechecker's
    /// elaboration pass; the parser leaves it empty.
    Alloc {
        tag: Option<Type>,
        init: Box<Term>,
    },
    Get(Box<Term>),
    Set(Box<Term>, Box<Term>),
    Step,
    Rec {
        fname: String,
        param: String,
        ann: Option<Type>,
        body: Box<Term>,
    },
    Ann(Box<Term>, Type),
}

impl Term {
    pub fn var(n: &str) -> Term {
        Term::Var(n.to_string())
    }
    pub fn int(n: i64) -> Term {
        Term::Int(BigInt::from(n))
    }
    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Box::new(f), Box::new(a))
    }
    pub fn ret(e: Term) -> Term {
        Term::Ret(Box::new(e))
    }
    pub fn bind(var: &str, rhs: Term, body: Term) -> Term {
        Term::Bind {
            var: var.to_string(),
            rhs: Box::new(rhs),
            body: Box::new(body),
        }
    }
    pub fn seq(first: Term, rest: Term) -> Term {
        Term::bind("_", first, rest)
    }
    pub fn alloc(init: Term) -> Term {
        Term::Alloc {
            tag: None,
            init: Box::new(init),
        }
    }
    pub fn get(e: Term) -> Term {
        Term::Get(Box::new(e))
    }
    pub fn set(e1: Term, e2: Term) -> Term {
        Term::Set(Box::new(e1), Box::new(e2))
    }
    pub fn lam(param: &str, ann: Option<Type>, body: Term) -> Term {
        Term::Lam {
            param: param.to_string(),
            ann,
            body: Box::new(body),
        }
    }

    /// Application that contracts the administrative redex when `f` is a
    /// literal lambda, used when instantiating isomorphism witnesses.
    pub fn app_contract(f: &Term, a: Term) -> Term {
        match f {
            Term::Lam { param, body, .. } => subst(body, param, &a),
            _ => Term::app(f.clone(), a),
        }
    }

    /// Child subterms in path order.
    pub fn children(&self) -> Vec<&Term> {
        match self {
            Term::Var(_) | Term::Int(_) | Term::Unit | Term::Step => vec![],
            Term::Lam { body, .. } | Term::Rec { body, .. } => vec![body],
            Term::App(a, b)
            | Term::Pair(a, b)
            | Term::Add(a, b)
            | Term::Sub(a, b)
            | Term::Set(a, b) => vec![a, b],
            Term::Fst(e)
            | Term::Snd(e)
            | Term::Neg(e)
            | Term::Ret(e)
            | Term::Get(e)
            | Term::Alloc { init: e, .. }
            | Term::Proj(e, _)
            | Term::Ann(e, _) => vec![e],
            Term::Record(fields) => fields.iter().map(|(_, t)| t).collect(),
            Term::Bind { rhs, body, .. } => vec![rhs, body],
        }
    }

    /// Rebuild this node with `f` applied to every immediate child.
    pub fn map_children(&self, mut f: impl FnMut(&Term) -> Term) -> Term {
        self.try_map_children(|c| Ok::<_, std::convert::Infallible>(f(c)))
            .unwrap_or_else(|e| match e {})
    }

    /// Rebuild this node with a fallible `f` applied to every immediate
    /// child.
    pub fn try_map_children<E>(
        &self,
        mut f: impl FnMut(&Term) -> Result<Term, E>,
    ) -> Result<Term, E> {
        Ok(match self {
            Term::Var(_) | Term::Int(_) | Term::Unit | Term::Step => self.clone(),
            Term::Lam { param, ann, body } => Term::Lam {
                param: param.clone(),
                ann: ann.clone(),
                body: Box::new(f(body)?),
            },
            Term::Rec { fname, param, ann, body } => Term::Rec {
                fname: fname.clone(),
                param: param.clone(),
                ann: ann.clone(),
                body: Box::new(f(body)?),
            },
            Term::Bind { var, rhs, body } => Term::Bind {
                var: var.clone(),
                rhs: Box::new(f(rhs)?),
                body: Box::new(f(body)?),
            },
            Term::App(a, b) => Term::App(Box::new(f(a)?), Box::new(f(b)?)),
            Term::Pair(a, b) => Term::Pair(Box::new(f(a)?), Box::new(f(b)?)),
            Term::Add(a, b) => Term::Add(Box::new(f(a)?), Box::new(f(b)?)),
            Term::Sub(a, b) => Term::Sub(Box::new(f(a)?), Box::new(f(b)?)),
            Term::Set(a, b) => Term::Set(Box::new(f(a)?), Box::new(f(b)?)),
            Term::Fst(e) => Term::Fst(Box::new(f(e)?)),
            Term::Snd(e) => Term::Snd(Box::new(f(e)?)),
            Term::Neg(e) => Term::Neg(Box::new(f(e)?)),
            Term::Ret(e) => Term::Ret(Box::new(f(e)?)),
            Term::Get(e) => Term::Get(Box::new(f(e)?)),
            Term::Alloc { tag, init } => Term::Alloc {
                tag: tag.clone(),
                init: Box::new(f(init)?),
            },
            Term::Proj(e, l) => Term::Proj(Box::new(f(e)?), l.clone()),
            Term::Ann(e, ty) => Term::Ann(Box::new(f(e)?), ty.clone()),
            Term::Record(fields) => Term::Record(
                fields
                    .iter()
                    .map(|(l, e)| Ok((l.clone(), f(e)?)))
                    .collect::<Result<_, E>>()?,
            ),
        })
    }
}

/// A path addresses a subterm by a sequence of child indices.
pub type Path = Vec<usize>;

pub fn subterm_at<'a>(t: &'a Term, path: &[usize]) -> Option<&'a Term> {
    let mut cur = t;
    for &i in path {
        cur = *cur.children().get(i)?;
    }
    Some(cur)
}

/// Replace the subterm at `path`, returning the rebuilt term.
pub fn replace_at(t: &Term, path: &[usize], new: Term) -> Option<Term> {
    if path.is_empty() {
        return Some(new);
    }
    let i = path[0];
    let rest = &path[1..];
    let mut out = t.clone();
    {
        let child: &mut Term = match &mut out {
            Term::Lam { body, .. } | Term::Rec { body, .. } if i == 0 => body,
            Term::App(a, b)
            | Term::Pair(a, b)
            | Term::Add(a, b)
            | Term::Sub(a, b)
            | Term::Set(a, b) => match i {
                0 => a,
                1 => b,
                _ => return None,
            },
            Term::Fst(e)
            | Term::Snd(e)
            | Term::Neg(e)
            | Term::Ret(e)
            | Term::Get(e)
            | Term::Alloc { init: e, .. }
            | Term::Proj(e, _)
            | Term::Ann(e, _)
                if i == 0 =>
            {
                e
            }
            Term::Record(fields) => &mut fields.get_mut(i)?.1,
            Term::Bind { rhs, body, .. } => match i {
                0 => rhs,
                1 => body,
                _ => return None,
            },
            _ => return None,
        };
        *child = replace_at(child, rest, new)?;
    }
    Some(out)
}

/// Free variables of a term.
pub fn free_vars(t: &Term) -> BTreeSet<String> {
    fn go(t: &Term, bound: &mut Vec<String>, acc: &mut BTreeSet<String>) {
        match t {
            Term::Var(x) => {
                if !bound.iter().any(|b| b == x) {
                    acc.insert(x.clone());
                }
            }
            Term::Lam { param, body, .. } => {
                bound.push(param.clone());
                go(body, bound, acc);
                bound.pop();
            }
            Term::Rec {
                fname,
                param,
                body,
                ..
            } => {
                bound.push(fname.clone());
                bound.push(param.clone());
                go(body, bound, acc);
                bound.pop();
                bound.pop();
            }
            Term::Bind { var, rhs, body } => {
                go(rhs, bound, acc);
                bound.push(var.clone());
                go(body, bound, acc);
                bound.pop();
            }
            _ => {
                for c in t.children() {
                    go(c, bound, acc);
                }
            }
        }
    }
    let mut acc = BTreeSet::new();
    go(t, &mut Vec::new(), &mut acc);
    acc
}

/// Pick a name based on `base` that avoids everything in `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { "x" } else { stem };
    if base != "_" && !avoid.contains(base) {
        return base.to_string();
    }
    let mut n = 1u64;
    loop {
        let cand = format!("{stem}{n}");
        if !avoid.contains(&cand) {
            return cand;
        }
        n += 1;
    }
}

/// Capture-avoiding substitution of `s` for the free variable `x` in `t`.
pub fn subst(t: &Term, x: &str, s: &Term) -> Term {
    match t {
        Term::Var(y) => {
            if y == x {
                s.clone()
            } else {
                t.clone()
            }
        }
        Term::Lam { param, ann, body } => {
            if param == x {
                t.clone()
            } else if free_vars(s).contains(param) {
                let mut avoid = free_vars(s);
                avoid.extend(free_vars(body));
                avoid.insert(x.to_string());
                let p2 = fresh_name(param, &avoid);
                let body2 = subst(body, param, &Term::Var(p2.clone()));
                Term::Lam {
                    param: p2,
                    ann: ann.clone(),
                    body: Box::new(subst(&body2, x, s)),
                }
            } else {
                Term::Lam {
                    param: param.clone(),
                    ann: ann.clone(),
                    body: Box::new(subst(body, x, s)),
                }
            }
        }
        Term::Rec {
            fname,
            param,
            ann,
            body,
        } => {
            if fname == x || param == x {
                return t.clone();
            }
            let sfv = free_vars(s);
            let mut fname = fname.clone();
            let mut param = param.clone();
            let mut body = (**body).clone();
            if sfv.contains(&fname) {
                let mut avoid = sfv.clone();
                avoid.extend(free_vars(&body));
                avoid.insert(x.to_string());
                avoid.insert(param.clone());
                let f2 = fresh_name(&fname, &avoid);
                body = subst(&body, &fname, &Term::Var(f2.clone()));
                fname = f2;
            }
            if sfv.contains(&param) {
                let mut avoid = sfv.clone();
                avoid.extend(free_vars(&body));
                avoid.insert(x.to_string());
                avoid.insert(fname.clone());
                let p2 = fresh_name(&param, &avoid);
                body = subst(&body, &param, &Term::Var(p2.clone()));
                param = p2;
            }
            Term::Rec {
                fname,
                param,
                ann: ann.clone(),
                body: Box::new(subst(&body, x, s)),
            }
        }
        Term::Bind { var, rhs, body } => {
            let rhs2 = subst(rhs, x, s);
            if var == x {
                Term::Bind {
                    var: var.clone(),
                    rhs: Box::new(rhs2),
                    body: body.clone(),
                }
            } else if var != "_" && free_vars(s).contains(var) {
                let mut avoid = free_vars(s);
                avoid.extend(free_vars(body));
                avoid.insert(x.to_string());
                let v2 = fresh_name(var, &avoid);
                let body2 = subst(body, var, &Term::Var(v2.clone()));
                Term::Bind {
                    var: v2,
                    rhs: Box::new(rhs2),
                    body: Box::new(subst(&body2, x, s)),
                }
            } else {
                Term::Bind {
                    var: var.clone(),
                    rhs: Box::new(rhs2),
                    body: Box::new(subst(body, x, s)),
                }
            }
        }
        Term::App(a, b) => Term::App(Box::new(subst(a, x, s)), Box::new(subst(b, x, s))),
        Term::Pair(a, b) => Term::Pair(Box::new(subst(a, x, s)), Box::new(subst(b, x, s))),
        Term::Add(a, b) => Term::Add(Box::new(subst(a, x, s)), Box::new(subst(b, x, s))),
        Term::Sub(a, b) => Term::Sub(Box::new(subst(a, x, s)), Box::new(subst(b, x, s))),
        Term::Set(a, b) => Term::Set(Box::new(subst(a, x, s)), Box::new(subst(b, x, s))),
        Term::Fst(e) => Term::Fst(Box::new(subst(e, x, s))),
        Term::Snd(e) => Term::Snd(Box::new(subst(e, x, s))),
        Term::Neg(e) => Term::Neg(Box::new(subst(e, x, s))),
        Term::Ret(e) => Term::Ret(Box::new(subst(e, x, s))),
        Term::Get(e) => Term::Get(Box::new(subst(e, x, s))),
        Term::Alloc { tag, init } => Term::Alloc {
            tag: tag.clone(),
            init: Box::new(subst(init, x, s)),
        },
        Term::Proj(e, l) => Term::Proj(Box::new(subst(e, x, s)), l.clone()),
        Term::Ann(e, ty) => Term::Ann(Box::new(subst(e, x, s)), ty.clone()),
        Term::Record(fields) => Term::Record(
            fields
                .iter()
                .map(|(l, e)| (l.clone(), subst(e, x, s)))
                .collect(),
        ),
        Term::Int(_) | Term::Unit | Term::Step => t.clone(),
    }
}

/// Equality up to renaming of bound variables. Alloc tags and binder
/// annotations are ignored.
pub fn alpha_eq(a: &Term, b: &Term) -> bool {
    fn lookup(env: &[(String, String)], x: &str) -> Option<usize> {
        env.iter().rposition(|(l, _)| l == x)
    }
    fn lookup_r(env: &[(String, String)], y: &str) -> Option<usize> {
        env.iter().rposition(|(_, r)| r == y)
    }
    fn go(a: &Term, b: &Term, env: &mut Vec<(String, String)>) -> bool {
        match (a, b) {
            (Term::Var(x), Term::Var(y)) => match (lookup(env, x), lookup_r(env, y)) {
                (Some(i), Some(j)) => i == j,
                (None, None) => x == y,
                _ => false,
            },
            (
                Term::Lam { param: p1, body: b1, .. },
                Term::Lam { param: p2, body: b2, .. },
            ) => {
                env.push((p1.clone(), p2.clone()));
                let r = go(b1, b2, env);
                env.pop();
                r
            }
            (
                Term::Rec { fname: f1, param: p1, body: b1, .. },
                Term::Rec { fname: f2, param: p2, body: b2, .. },
            ) => {
                env.push((f1.clone(), f2.clone()));
                env.push((p1.clone(), p2.clone()));
                let r = go(b1, b2, env);
                env.pop();
                env.pop();
                r
            }
            (
                Term::Bind { var: v1, rhs: r1, body: b1 },
                Term::Bind { var: v2, rhs: r2, body: b2 },
            ) => {
                if !go(r1, r2, env) {
                    return false;
                }
                env.push((v1.clone(), v2.clone()));
                let r = go(b1, b2, env);
                env.pop();
                r
            }
            (Term::App(a1, a2), Term::App(b1, b2))
            | (Term::Pair(a1, a2), Term::Pair(b1, b2))
            | (Term::Add(a1, a2), Term::Add(b1, b2))
            | (Term::Sub(a1, a2), Term::Sub(b1, b2))
            | (Term::Set(a1, a2), Term::Set(b1, b2)) => {
                std::mem::discriminant(a) == std::mem::discriminant(b)
                    && go(a1, b1, env)
                    && go(a2, b2, env)
            }
            (Term::Fst(x), Term::Fst(y))
            | (Term::Snd(x), Term::Snd(y))
            | (Term::Neg(x), Term::Neg(y))
            | (Term::Ret(x), Term::Ret(y))
            | (Term::Get(x), Term::Get(y)) => go(x, y, env),
            (Term::Alloc { init: x, .. }, Term::Alloc { init: y, .. }) => go(x, y, env),
            (Term::Ann(x, _), Term::Ann(y, _)) => go(x, y, env),
            (Term::Proj(x, l1), Term::Proj(y, l2)) => l1 == l2 && go(x, y, env),
            (Term::Record(f1), Term::Record(f2)) => {
                f1.len() == f2.len()
                    && f1
                        .iter()
                        .zip(f2)
                        .all(|((l1, t1), (l2, t2))| l1 == l2 && go(t1, t2, env))
            }
            (Term::Int(m), Term::Int(n)) => m == n,
            (Term::Unit, Term::Unit) | (Term::Step, Term::Step) => true,
            _ => false,
        }
    }
    go(a, b, &mut Vec::new())
}

/// All variable names occurring anywhere in a term, bound or free.
pub fn all_names(t: &Term) -> BTreeSet<String> {
    let mut acc = BTreeSet::new();
    fn go(t: &Term, acc: &mut BTreeSet<String>) {
        match t {
            Term::Var(x) => {
                acc.insert(x.clone());
            }
            Term::Lam { param, .. } => {
                acc.insert(param.clone());
            }
            Term::Rec { fname, param, .. } => {
                acc.insert(fname.clone());
                acc.insert(param.clone());
            }
            Term::Bind { var, .. } => {
                acc.insert(var.clone());
            }
            _ => {}
        }
        for c in t.children() {
            go(c, acc);
        }
    }
    go(t, &mut acc);
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn subst_free_var() {
        assert_eq!(subst(&Term::var("x"), "x", &Term::int(3)), Term::int(3));
    }

    #[test]
    fn subst_shadowed() {
        let t = Term::lam("x", None, Term::var("x"));
        assert_eq!(subst(&t, "x", &Term::int(3)), t);
    }

    #[test]
    fn subst_capture_avoided() {
        // (\y. x) [y/x]  must not capture
        let t = Term::lam("y", None, Term::var("x"));
        let r = subst(&t, "x", &Term::var("y"));
        match r {
            Term::Lam { param, body, .. } => {
                assert_ne!(param, "y");
                assert_eq!(*body, Term::var("y"));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn alpha_eq_rename() {
        assert!(alpha_eq(
            &Term::lam("x", None, Term::var("x")),
            &Term::lam("y", None, Term::var("y"))
        ));
        assert!(!alpha_eq(
            &Term::lam("x", None, Term::var("x")),
            &Term::lam("x", None, Term::int(0))
        ));
    }

    #[test]
    fn alpha_eq_mixed_binding() {
        // \x.\y.x  vs  \y.\x.y
        assert!(alpha_eq(
            &p("\\x. \\y. x"),
            &p("\\y. \\x. y")
        ));
        assert!(!alpha_eq(&p("\\x. \\y. x"), &p("\\x. \\y. y")));
    }

    #[test]
    fn rec_unfolding_substitution_matches_hand_expansion() {
        // ((rec f x. f <- get r; set r (x + 1)) substituted per the
        // recursion rule reproduces the hand-expanded right-hand side.
        let rec = p("rec f x. g <- get r; f (g + x)");
        let (fname, param, body) = match &rec {
            Term::Rec { fname, param, body, .. } => (fname.clone(), param.clone(), (**body).clone()),
            _ => panic!(),
        };
        let unfolded = subst(&subst(&body, &fname, &rec), &param, &Term::int(7));
        let expected = p("g <- get r; (rec f x. g <- get r; f (g + x)) (g + 7)");
        assert!(alpha_eq(&unfolded, &expected));
    }

    #[test]
    fn paths_address_subterms() {
        let t = p("l <- alloc 0; get l");
        assert_eq!(subterm_at(&t, &[0, 0]), Some(&Term::int(0)));
        let r = replace_at(&t, &[0, 0], Term::int(5)).unwrap();
        assert_eq!(subterm_at(&r, &[0, 0]), Some(&Term::int(5)));
        assert!(subterm_at(&t, &[3]).is_none());
    }
}
