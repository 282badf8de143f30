//! Pretty-printer. `parse(print(t))` is alpha-equal to `t` for all
//! well-formed terms; the printer never emits the `map` sugar.

use super::{Term, Type};
use std::fmt;

// precedence levels: 0 term, 1 additive, 2 unary, 3 application, 4 atom
fn prec(t: &Term) -> u8 {
    match t {
        Term::Lam { .. } | Term::Rec { .. } | Term::Bind { .. } => 0,
        Term::Add(..) | Term::Sub(..) => 1,
        Term::Ret(_)
        | Term::Alloc { .. }
        | Term::Get(_)
        | Term::Set(..)
        | Term::Neg(_)
        | Term::Fst(_)
        | Term::Snd(_)
        | Term::Step => 2,
        Term::App(..) | Term::Proj(..) => 3,
        Term::Int(_) | Term::Var(_) | Term::Unit | Term::Pair(..) | Term::Record(_)
        | Term::Ann(..) => 4,
    }
}

fn write_at(f: &mut fmt::Formatter<'_>, t: &Term, min: u8) -> fmt::Result {
    if prec(t) < min {
        write!(f, "(")?;
        write_at(f, t, 0)?;
        return write!(f, ")");
    }
    match t {
        Term::Var(x) => write!(f, "{x}"),
        Term::Int(n) => write!(f, "{n}"),
        Term::Unit => write!(f, "()"),
        Term::Step => write!(f, "step"),
        Term::Lam { param, ann, body } => {
            write!(f, "\\{param}")?;
            if let Some(ty) = ann {
                write!(f, " : {ty}")?;
            }
            write!(f, ". ")?;
            write_at(f, body, 0)
        }
        Term::Rec {
            fname,
            param,
            ann,
            body,
        } => {
            write!(f, "rec {fname} {param}")?;
            if let Some(ty) = ann {
                write!(f, " : {ty}")?;
            }
            write!(f, ". ")?;
            write_at(f, body, 0)
        }
        Term::Bind { var, rhs, body } => {
            if var == "_" {
                write_at(f, rhs, 1)?;
                write!(f, "; ")?;
            } else {
                write!(f, "{var} <- ")?;
                write_at(f, rhs, 1)?;
                write!(f, "; ")?;
            }
            write_at(f, body, 0)
        }
        Term::Add(a, b) => {
            write_at(f, a, 1)?;
            write!(f, " + ")?;
            write_at(f, b, 2)
        }
        Term::Sub(a, b) => {
            write_at(f, a, 1)?;
            write!(f, " - ")?;
            write_at(f, b, 2)
        }
        Term::Ret(e) => {
            write!(f, "ret ")?;
            write_at(f, e, 2)
        }
        Term::Alloc { init, .. } => {
            write!(f, "alloc ")?;
            write_at(f, init, 2)
        }
        Term::Get(e) => {
            write!(f, "get ")?;
            write_at(f, e, 2)
        }
        Term::Neg(e) => {
            write!(f, "neg ")?;
            write_at(f, e, 2)
        }
        Term::Fst(e) => {
            write!(f, "fst ")?;
            write_at(f, e, 2)
        }
        Term::Snd(e) => {
            write!(f, "snd ")?;
            write_at(f, e, 2)
        }
        Term::Set(a, b) => {
            write!(f, "set ")?;
            write_at(f, a, 4)?;
            write!(f, " ")?;
            write_at(f, b, 4)
        }
        Term::App(a, b) => {
            write_at(f, a, 3)?;
            write!(f, " ")?;
            write_at(f, b, 4)
        }
        Term::Proj(e, l) => {
            write_at(f, e, 4)?;
            write!(f, ".{l}")
        }
        Term::Pair(a, b) => {
            write!(f, "(")?;
            write_at(f, a, 0)?;
            write!(f, ", ")?;
            write_at(f, b, 0)?;
            write!(f, ")")
        }
        Term::Record(fields) => {
            write!(f, "{{")?;
            for (i, (l, e)) in fields.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{l} -> ")?;
                write_at(f, e, 0)?;
            }
            write!(f, "}}")
        }
        Term::Ann(e, ty) => {
            write!(f, "(")?;
            write_at(f, e, 0)?;
            write!(f, " : {ty})")
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_at(f, self, 0)
    }
}

// type precedence: 0 arrow, 1 product, 2 application, 3 atom
fn ty_prec(t: &Type) -> u8 {
    match t {
        Type::Fn(..) => 0,
        Type::Prod(..) => 1,
        Type::T(_) | Type::Ref(_) => 2,
        Type::Unit | Type::Int | Type::Record(_) => 3,
    }
}

fn write_ty(f: &mut fmt::Formatter<'_>, t: &Type, min: u8) -> fmt::Result {
    if ty_prec(t) < min {
        write!(f, "(")?;
        write_ty(f, t, 0)?;
        return write!(f, ")");
    }
    match t {
        Type::Unit => write!(f, "Unit"),
        Type::Int => write!(f, "Int"),
        Type::Fn(a, b) => {
            write_ty(f, a, 1)?;
            write!(f, " -> ")?;
            write_ty(f, b, 0)
        }
        Type::Prod(a, b) => {
            write_ty(f, a, 2)?;
            write!(f, " * ")?;
            write_ty(f, b, 2)
        }
        Type::T(a) => {
            write!(f, "T ")?;
            write_ty(f, a, 3)
        }
        Type::Ref(a) => {
            write!(f, "Ref ")?;
            write_ty(f, a, 3)
        }
        Type::Record(fields) => {
            write!(f, "{{")?;
            for (i, (l, ty)) in fields.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{l} : ")?;
                write_ty(f, ty, 0)?;
            }
            write!(f, "}}")
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_ty(f, self, 0)
    }
}

#[cfg(test)]
mod tests {
    use crate::syntax::{alpha_eq, parse_term, parse_type, Term};

    #[test]
    fn print_ret_and_step() {
        assert_eq!(Term::ret(Term::int(5)).to_string(), "ret 5");
        assert_eq!(Term::Step.to_string(), "step");
    }

    #[test]
    fn roundtrip_counter_source() {
        let src = "l <- alloc 0; ret {incr -> i <- get l; set l (i + 1), read -> get l}";
        let t = parse_term(src).unwrap();
        let reparsed = parse_term(&t.to_string()).unwrap();
        assert!(alpha_eq(&t, &reparsed));
    }

    #[test]
    fn roundtrip_negative_literal() {
        let t = parse_term("ret (2 + -3)").unwrap();
        let r = parse_term(&t.to_string()).unwrap();
        assert!(alpha_eq(&t, &r));
    }

    #[test]
    fn type_display_roundtrip() {
        for s in ["Int -> T Int", "Cell Int", "{incr : T Unit, read : T Int}", "Ref (Int * Unit)"] {
            let ty = parse_type(s).unwrap();
            assert_eq!(parse_type(&ty.to_string()).unwrap(), ty);
        }
    }
}
