//! Call-by-value definitional interpreter. The pure fragment evaluates to
//! values directly; computation-typed terms evaluate to suspended
//! heap-passing computations, run as fuel-indexed delayed trees with the
//! exact step costs: get and step cost one, ret/alloc/set cost zero, and
//! applying a recursive function costs one step before the unfolded body.

use crate::guarded::{Delayed, Outcome};
use crate::store::{Config, Heap, Location, StoreError};
use crate::syntax::{free_vars, Term, Type};
use crate::typecheck::{self, Context, TypeError};
use num_bigint::BigInt;
use std::collections::BTreeMap;
use std::fmt;
use std::rc::Rc;
use thiserror::Error;

/// Runtime values. Suspended computations and closures keep their source
/// term plus a captured environment restricted to its free variables, so
/// values (including heap contents) stay comparable and printable.
#[derive(Debug, Clone)]
pub enum Value {
    Int(BigInt),
    Unit,
    Pair(Box<Value>, Box<Value>),
    Record(Vec<(String, Value)>),
    Loc(Location, Type),
    Closure {
        env: Env,
        param: String,
        body: Term,
    },
    RecClosure {
        env: Env,
        fname: String,
        param: String,
        body: Term,
    },
    Comp {
        env: Env,
        body: Term,
    },
}

/// Value equality: structural, with terms compared up to alpha.
impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        use Value::*;
        match (self, other) {
            (Int(a), Int(b)) => a == b,
            (Unit, Unit) => true,
            (Pair(a1, a2), Pair(b1, b2)) => a1 == b1 && a2 == b2,
            (Record(a), Record(b)) => {
                a.len() == b.len()
                    && a.iter()
                        .zip(b)
                        .all(|((l1, v1), (l2, v2))| l1 == l2 && v1 == v2)
            }
            (Loc(l1, t1), Loc(l2, t2)) => l1 == l2 && t1 == t2,
            (
                Closure { env: e1, param: p1, body: b1 },
                Closure { env: e2, param: p2, body: b2 },
            ) => {
                e1 == e2
                    && crate::syntax::alpha_eq(
                        &Term::lam(p1, None, b1.clone()),
                        &Term::lam(p2, None, b2.clone()),
                    )
            }
            (
                RecClosure { env: e1, fname: f1, param: p1, body: b1 },
                RecClosure { env: e2, fname: f2, param: p2, body: b2 },
            ) => {
                e1 == e2
                    && crate::syntax::alpha_eq(
                        &Term::Rec {
                            fname: f1.clone(),
                            param: p1.clone(),
                            ann: None,
                            body: Box::new(b1.clone()),
                        },
                        &Term::Rec {
                            fname: f2.clone(),
                            param: p2.clone(),
                            ann: None,
                            body: Box::new(b2.clone()),
                        },
                    )
            }
            (Comp { env: e1, body: b1 }, Comp { env: e2, body: b2 }) => {
                e1 == e2 && crate::syntax::alpha_eq(b1, b2)
            }
            _ => false,
        }
    }
}

impl Value {
    pub fn int(n: i64) -> Value {
        Value::Int(BigInt::from(n))
    }

    pub fn rename_locations(
        &self,
        map: &BTreeMap<Location, Location>,
    ) -> Value {
        match self {
            Value::Loc(l, t) => Value::Loc(*map.get(l).unwrap_or(l), t.clone()),
            Value::Pair(a, b) => Value::Pair(
                Box::new(a.rename_locations(map)),
                Box::new(b.rename_locations(map)),
            ),
            Value::Record(fields) => Value::Record(
                fields
                    .iter()
                    .map(|(l, v)| (l.clone(), v.rename_locations(map)))
                    .collect(),
            ),
            Value::Closure { env, param, body } => Value::Closure {
                env: env.rename_locations(map),
                param: param.clone(),
                body: body.clone(),
            },
            Value::RecClosure { env, fname, param, body } => Value::RecClosure {
                env: env.rename_locations(map),
                fname: fname.clone(),
                param: param.clone(),
                body: body.clone(),
            },
            Value::Comp { env, body } => Value::Comp {
                env: env.rename_locations(map),
                body: body.clone(),
            },
            Value::Int(_) | Value::Unit => self.clone(),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Unit => write!(f, "()"),
            Value::Pair(a, b) => write!(f, "({a}, {b})"),
            Value::Record(fields) => {
                write!(f, "{{")?;
                for (i, (l, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{l} = {v}")?;
                }
                write!(f, "}}")
            }
            Value::Loc(l, _) => write!(f, "{l}"),
            Value::Closure { env, param, body } => {
                write!(f, "<closure \\{param}. {body}{env}>")
            }
            Value::RecClosure { env, fname, param, body } => {
                write!(f, "<rec {fname} {param}. {body}{env}>")
            }
            Value::Comp { env, body } => write!(f, "<comp {body}{env}>"),
        }
    }
}

/// Runtime environment: finite map from names to values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Env(BTreeMap<String, Value>);

impl Env {
    pub fn new() -> Env {
        Env::default()
    }
    pub fn get(&self, x: &str) -> Option<&Value> {
        self.0.get(x)
    }
    pub fn extended(&self, x: &str, v: Value) -> Env {
        let mut m = self.0.clone();
        m.insert(x.to_string(), v);
        Env(m)
    }
    pub fn iter(&self) -> impl Iterator<Item = (&String, &Value)> {
        self.0.iter()
    }
    /// Restriction to the free variables of `t`.
    fn restrict(&self, t: &Term) -> Env {
        let fv = free_vars(t);
        Env(self
            .0
            .iter()
            .filter(|(k, _)| fv.contains(*k))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect())
    }
    fn rename_locations(&self, map: &BTreeMap<Location, Location>) -> Env {
        Env(self
            .0
            .iter()
            .map(|(k, v)| (k.clone(), v.rename_locations(map)))
            .collect())
    }
}

impl fmt::Display for Env {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return Ok(());
        }
        write!(f, " where {{")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k} = {v}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("unbound variable '{0}'")]
    Unbound(String),
    #[error("applied a non-function value")]
    NotAFunction,
    #[error("ran a non-computation value")]
    NotAComputation,
    #[error("expected {0}")]
    Shape(&'static str),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("allocation without a cell type; run the elaborating typechecker first")]
    MissingTag,
    #[error("object has no method '{0}'")]
    UnknownLabel(String),
    #[error("method '{0}' expects an argument")]
    MissingArgument(String),
    #[error("method '{0}' takes no argument")]
    UnexpectedArgument(String),
    #[error("term is not an object returning a record of methods")]
    NotAnObject,
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("observations require a computation of ground type, found {0}")]
    NotGround(Type),
}

/// Evaluate a pure term to a value. Computation-typed syntax suspends to a
/// `Comp` value without touching any heap.
pub fn eval_pure(env: &Env, t: &Term) -> Result<Value, EvalError> {
    match t {
        Term::Var(x) => env
            .get(x)
            .cloned()
            .ok_or_else(|| EvalError::Unbound(x.clone())),
        Term::Int(n) => Ok(Value::Int(n.clone())),
        Term::Unit => Ok(Value::Unit),
        Term::Lam { param, body, .. } => Ok(Value::Closure {
            env: env.restrict(t),
            param: param.clone(),
            body: (**body).clone(),
        }),
        Term::Rec {
            fname,
            param,
            body,
            ..
        } => Ok(Value::RecClosure {
            env: env.restrict(t),
            fname: fname.clone(),
            param: param.clone(),
            body: (**body).clone(),
        }),
        Term::App(fe, ae) => {
            let vf = eval_pure(env, fe)?;
            let va = eval_pure(env, ae)?;
            apply_value(&vf, va)
        }
        Term::Pair(a, b) => Ok(Value::Pair(
            Box::new(eval_pure(env, a)?),
            Box::new(eval_pure(env, b)?),
        )),
        Term::Fst(e) => match eval_pure(env, e)? {
            Value::Pair(a, _) => Ok(*a),
            _ => Err(EvalError::Shape("a pair")),
        },
        Term::Snd(e) => match eval_pure(env, e)? {
            Value::Pair(_, b) => Ok(*b),
            _ => Err(EvalError::Shape("a pair")),
        },
        Term::Record(fields) => {
            let mut vs = Vec::new();
            for (l, e) in fields {
                vs.push((l.clone(), eval_pure(env, e)?));
            }
            Ok(Value::Record(vs))
        }
        Term::Proj(e, l) => match eval_pure(env, e)? {
            Value::Record(fields) => fields
                .into_iter()
                .find(|(n, _)| n == l)
                .map(|(_, v)| v)
                .ok_or_else(|| EvalError::UnknownLabel(l.clone())),
            _ => Err(EvalError::Shape("a record")),
        },
        Term::Add(a, b) => match (eval_pure(env, a)?, eval_pure(env, b)?) {
            (Value::Int(x), Value::Int(y)) => Ok(Value::Int(x + y)),
            _ => Err(EvalError::Shape("integers")),
        },
        Term::Sub(a, b) => match (eval_pure(env, a)?, eval_pure(env, b)?) {
            (Value::Int(x), Value::Int(y)) => Ok(Value::Int(x - y)),
            _ => Err(EvalError::Shape("integers")),
        },
        Term::Neg(e) => match eval_pure(env, e)? {
            Value::Int(x) => Ok(Value::Int(-x)),
            _ => Err(EvalError::Shape("an integer")),
        },
        Term::Ann(e, _) => eval_pure(env, e),
        Term::Ret(_)
        | Term::Bind { .. }
        | Term::Alloc { .. }
        | Term::Get(_)
        | Term::Set(..)
        | Term::Step => Ok(Value::Comp {
            env: env.restrict(t),
            body: t.clone(),
        }),
    }
}

/// Apply a function value. Applying a recursive closure suspends: the
/// resulting computation pays one step before the unfolded body runs.
pub fn apply_value(vf: &Value, va: Value) -> Result<Value, EvalError> {
    match vf {
        Value::Closure { env, param, body } => eval_pure(&env.extended(param, va), body),
        Value::RecClosure { .. } => {
            let env = Env::new()
                .extended("f", vf.clone())
                .extended("x", va);
            Ok(Value::Comp {
                env,
                body: Term::app(Term::var("f"), Term::var("x")),
            })
        }
        _ => Err(EvalError::NotAFunction),
    }
}

pub type CompOut = Result<(Heap, Value), EvalError>;

fn now_err(e: EvalError) -> Delayed<CompOut> {
    Delayed::now(Err(e))
}

/// Run a suspended computation value against a heap.
pub fn exec_value(v: &Value, heap: Heap) -> Delayed<CompOut> {
    match v {
        Value::Comp { env, body } => exec(env, body, heap),
        _ => now_err(EvalError::NotAComputation),
    }
}

/// Heap-passing execution of a computation-typed term.
pub fn exec(env: &Env, t: &Term, heap: Heap) -> Delayed<CompOut> {
    match t {
        Term::Ret(e) => match eval_pure(env, e) {
            Ok(v) => Delayed::now(Ok((heap, v))),
            Err(e) => now_err(e),
        },
        Term::Bind { var, rhs, body } => {
            let env2 = env.clone();
            let var = var.clone();
            let body = (**body).clone();
            exec(env, rhs, heap).bind(Rc::new(move |out: CompOut| match out {
                Ok((h, v)) => exec(&env2.extended(&var, v), &body, h),
                Err(e) => now_err(e),
            }))
        }
        Term::Alloc { tag, init } => {
            let v = match eval_pure(env, init) {
                Ok(v) => v,
                Err(e) => return now_err(e),
            };
            let tag = match tag {
                Some(t) => t.clone(),
                None => match value_tag(&v) {
                    Some(t) => t,
                    None => return now_err(EvalError::MissingTag),
                },
            };
            let (h2, l) = heap.alloc(tag.clone(), v);
            Delayed::now(Ok((h2, Value::Loc(l, tag))))
        }
        Term::Get(e) => {
            let l = match eval_pure(env, e) {
                Ok(Value::Loc(l, _)) => l,
                Ok(_) => return now_err(EvalError::Shape("a location")),
                Err(e) => return now_err(e),
            };
            // one observable step, heap untouched
            Delayed::now(()).delay().bind(Rc::new(move |_| {
                match heap.read(l) {
                    Ok(v) => Delayed::now(Ok((heap.clone(), v))),
                    Err(e) => now_err(e.into()),
                }
            }))
        }
        Term::Set(e1, e2) => {
            let l = match eval_pure(env, e1) {
                Ok(Value::Loc(l, _)) => l,
                Ok(_) => return now_err(EvalError::Shape("a location")),
                Err(e) => return now_err(e),
            };
            let v = match eval_pure(env, e2) {
                Ok(v) => v,
                Err(e) => return now_err(e),
            };
            match heap.write(l, v) {
                Ok(h2) => Delayed::now(Ok((h2, Value::Unit))),
                Err(e) => now_err(e.into()),
            }
        }
        Term::Step => Delayed::now(Ok((heap, Value::Unit))).delay(),
        Term::App(fe, ae) => {
            let vf = match eval_pure(env, fe) {
                Ok(v) => v,
                Err(e) => return now_err(e),
            };
            let va = match eval_pure(env, ae) {
                Ok(v) => v,
                Err(e) => return now_err(e),
            };
            exec_apply(vf, va, heap)
        }
        Term::Ann(e, _) => exec(env, e, heap),
        _ => match eval_pure(env, t) {
            Ok(v) => exec_value(&v, heap),
            Err(e) => now_err(e),
        },
    }
}

/// Apply a function value in computation position and run the result.
fn exec_apply(vf: Value, va: Value, heap: Heap) -> Delayed<CompOut> {
    match vf {
        Value::Closure { ref env, ref param, ref body } => {
            match eval_pure(&env.extended(param, va), body) {
                Ok(v) => exec_value(&v, heap),
                Err(e) => now_err(e),
            }
        }
        Value::RecClosure { ref env, ref fname, ref param, ref body } => {
            // one step, then the unfolded body
            let env2 = env.extended(fname, vf.clone()).extended(param, va);
            let body = body.clone();
            Delayed::Later(Rc::new(move || exec(&env2, &body, heap.clone())))
        }
        _ => now_err(EvalError::NotAFunction),
    }
}

/// Best-effort cell type for values allocated without elaboration.
fn value_tag(v: &Value) -> Option<Type> {
    match v {
        Value::Int(_) => Some(Type::Int),
        Value::Unit => Some(Type::Unit),
        Value::Pair(a, b) => Some(Type::prod(value_tag(a)?, value_tag(b)?)),
        Value::Record(fields) => {
            let mut tys = Vec::new();
            for (l, w) in fields {
                tys.push((l.clone(), value_tag(w)?));
            }
            Some(Type::Record(tys))
        }
        Value::Loc(_, t) => Some(Type::reference(t.clone())),
        _ => None,
    }
}

/// Run a suspended computation with a fuel budget.
pub fn run_comp(comp: &Value, heap: Heap, fuel: u64) -> Result<Outcome<Config>, EvalError> {
    match exec_value(comp, heap).run(fuel) {
        Outcome::Converged { value: Ok((h, v)), steps } => Ok(Outcome::Converged {
            value: Config {
                heap: h,
                result: v,
                steps,
            },
            steps,
        }),
        Outcome::Converged { value: Err(e), .. } => Err(e),
        Outcome::Timeout => Ok(Outcome::Timeout),
    }
}

/// Typecheck, elaborate and run a closed ground computation, returning the
/// canonicalized configuration.
pub fn observe(t: &Term, fuel: u64) -> Result<Outcome<Config>, EvalError> {
    let (ty, elab) = typecheck::infer(&Context::new(), t)?;
    match &ty {
        Type::T(g) if g.is_ground() => {}
        _ => return Err(EvalError::NotGround(ty)),
    }
    observe_elaborated(&elab, fuel)
}

/// As [`observe`], for a term already elaborated by the typechecker.
pub fn observe_elaborated(t: &Term, fuel: u64) -> Result<Outcome<Config>, EvalError> {
    let comp = eval_pure(&Env::new(), t)?;
    Ok(match run_comp(&comp, Heap::empty(), fuel)? {
        Outcome::Converged { value, steps } => Outcome::Converged {
            value: crate::store::canonicalize(&value),
            steps,
        },
        Outcome::Timeout => Outcome::Timeout,
    })
}

/// One entry of a method script: a label, with an argument for methods of
/// function type.
#[derive(Debug, Clone, PartialEq)]
pub struct Call {
    pub label: String,
    pub arg: Option<Term>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CallResult {
    Converged { value: Value, steps: u64 },
    Timeout,
}

/// What a script observes: step cost of building the object, then each
/// call's ground result and step count. The final heap is deliberately not
/// part of the observation.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeTrace {
    pub creation: CallResult,
    pub calls: Vec<(String, CallResult)>,
}

impl ProbeTrace {
    pub fn timed_out(&self) -> bool {
        self.creation == CallResult::Timeout
            || self.calls.iter().any(|(_, r)| *r == CallResult::Timeout)
    }
}

/// Run an object-producing computation, then thread the heap through the
/// script's method calls in order. `fuel` is a per-call budget.
pub fn probe(t: &Term, script: &[Call], fuel: u64) -> Result<ProbeTrace, EvalError> {
    let (ty, elab) = typecheck::infer(&Context::new(), t)?;
    match &ty {
        Type::T(inner) if matches!(**inner, Type::Record(_)) => {}
        _ => return Err(EvalError::NotAnObject),
    }
    probe_elaborated(&elab, script, fuel)
}

/// As [`probe`], for an already elaborated term.
pub fn probe_elaborated(t: &Term, script: &[Call], fuel: u64) -> Result<ProbeTrace, EvalError> {
    let comp = eval_pure(&Env::new(), t)?;
    let (mut heap, obj, steps0) = match run_comp(&comp, Heap::empty(), fuel)? {
        Outcome::Converged { value, .. } => (value.heap, value.result, value.steps),
        Outcome::Timeout => {
            return Ok(ProbeTrace {
                creation: CallResult::Timeout,
                calls: Vec::new(),
            })
        }
    };
    let methods = match &obj {
        Value::Record(fields) => fields.clone(),
        _ => return Err(EvalError::NotAnObject),
    };
    let mut trace = ProbeTrace {
        creation: CallResult::Converged {
            value: Value::Unit,
            steps: steps0,
        },
        calls: Vec::new(),
    };
    for call in script {
        let method = methods
            .iter()
            .find(|(l, _)| *l == call.label)
            .map(|(_, v)| v.clone())
            .ok_or_else(|| EvalError::UnknownLabel(call.label.clone()))?;
        let comp = match (&method, &call.arg) {
            (Value::Comp { .. }, None) => method.clone(),
            (Value::Comp { .. }, Some(_)) => {
                return Err(EvalError::UnexpectedArgument(call.label.clone()))
            }
            (Value::Closure { .. } | Value::RecClosure { .. }, Some(arg)) => {
                let va = eval_pure(&Env::new(), arg)?;
                apply_value(&method, va)?
            }
            (Value::Closure { .. } | Value::RecClosure { .. }, None) => {
                return Err(EvalError::MissingArgument(call.label.clone()))
            }
            _ => return Err(EvalError::NotAComputation),
        };
        match run_comp(&comp, heap.clone(), fuel)? {
            Outcome::Converged { value, .. } => {
                trace.calls.push((
                    call.label.clone(),
                    CallResult::Converged {
                        value: value.result,
                        steps: value.steps,
                    },
                ));
                heap = value.heap;
            }
            Outcome::Timeout => {
                trace.calls.push((call.label.clone(), CallResult::Timeout));
                break;
            }
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;

    fn observe_ok(src: &str, fuel: u64) -> Config {
        match observe(&parse_term(src).unwrap(), fuel).unwrap() {
            Outcome::Converged { value, .. } => value,
            Outcome::Timeout => panic!("unexpected timeout"),
        }
    }

    #[test]
    fn beta_reduction() {
        let t = parse_term("(\\x : Int. x) 5").unwrap();
        assert_eq!(eval_pure(&Env::new(), &t).unwrap(), Value::int(5));
    }

    #[test]
    fn double_negation() {
        let t = parse_term("neg (neg 4)").unwrap();
        assert_eq!(eval_pure(&Env::new(), &t).unwrap(), Value::int(4));
    }

    #[test]
    fn t_typed_terms_suspend() {
        let src = "l <- alloc 0; ret {incr -> i <- get l; set l (i + 1), read -> get l}";
        let v = eval_pure(&Env::new(), &parse_term(src).unwrap()).unwrap();
        assert!(matches!(v, Value::Comp { .. }));
    }

    #[test]
    fn alloc_then_get_is_one_step() {
        let c = observe_ok("l <- alloc 0; get l", 10);
        assert_eq!(c.steps, 1);
        assert_eq!(c.result, Value::int(0));
        assert_eq!(c.heap.len(), 1);
    }

    #[test]
    fn step_costs_one() {
        let c = observe_ok("step", 10);
        assert_eq!(c.steps, 1);
        assert_eq!(c.result, Value::Unit);
        assert!(c.heap.is_empty());
    }

    #[test]
    fn alloc_costs_zero() {
        let c = observe_ok("alloc 0", 10);
        assert_eq!(c.steps, 0);
    }

    #[test]
    fn set_then_get_returns_set_value() {
        let c = observe_ok("l <- alloc 0; set l 5; get l", 10);
        assert_eq!(c.result, Value::int(5));
        assert_eq!(c.steps, 1);
    }

    #[test]
    fn rec_application_costs_one_step() {
        let c = observe_ok("(rec f x : Int -> T Int. ret x) 9", 10);
        assert_eq!(c.result, Value::int(9));
        assert_eq!(c.steps, 1);
    }

    #[test]
    fn observe_distinguishes_unused_allocation() {
        let a = observe(&parse_term("l <- alloc 7; ret 10").unwrap(), 10).unwrap();
        let b = observe(&parse_term("ret 10").unwrap(), 10).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn timeout_is_an_outcome() {
        let t = parse_term("(rec f x : Int -> T Int. y <- f x; ret y) 0").unwrap();
        assert_eq!(observe(&t, 50).unwrap(), Outcome::Timeout);
    }

    #[test]
    fn probe_counters() {
        let pos = parse_term(
            "l <- alloc 0; ret {incr -> i <- get l; set l (i + 1), read -> get l}",
        )
        .unwrap();
        let script: Vec<Call> = ["incr", "incr", "read"]
            .iter()
            .map(|l| Call {
                label: l.to_string(),
                arg: None,
            })
            .collect();
        let trace = probe(&pos, &script, 100).unwrap();
        match &trace.calls[2] {
            (_, CallResult::Converged { value, .. }) => assert_eq!(*value, Value::int(2)),
            _ => panic!(),
        }

        let neg = parse_term(
            "l <- alloc 0; ret {incr -> i <- get l; set l (i - 1), read -> map neg (get l)}",
        )
        .unwrap();
        let trace2 = probe(&neg, &script, 100).unwrap();
        assert_eq!(trace, trace2);

        let read_only = probe(&pos, &script[2..3], 100).unwrap();
        match &read_only.calls[0] {
            (_, CallResult::Converged { value, .. }) => assert_eq!(*value, Value::int(0)),
            _ => panic!(),
        }
    }

    #[test]
    fn monad_laws_hold_exactly() {
        let left = observe_ok("x <- ret 2; set_up <- alloc x; get set_up", 10);
        let right = observe_ok("set_up <- alloc 2; get set_up", 10);
        assert_eq!(left, right);
    }

    #[test]
    fn higher_order_store_runs() {
        // store a function in the heap, fetch and call it
        let c = observe_ok(
            "r <- alloc (\\n : Int. ret (n + 1)); f <- get r; f 41",
            10,
        );
        assert_eq!(c.result, Value::int(42));
        assert_eq!(c.steps, 1);
    }
}
