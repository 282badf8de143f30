//! Observational-equivalence testing. Two modes:
//!
//! * strict: run both closed ground computations and compare canonical
//!   configurations (result, step count, heap up to location renaming);
//! * probe: for object-producing computations, enumerate bounded method
//!   scripts and compare what each script observes (per-call ground results
//!   and step counts, final heap hidden).
//!
//! Both modes climb a fuel ladder so that a pair that only diverges at one
//! budget is reported as distinguished rather than silently timing out.

use crate::guarded::Outcome;
use crate::interp::{self, Call, EvalError, ProbeTrace};
use crate::store::{bijection_equiv, Config};
use crate::syntax::{Term, Type};
use crate::typecheck::{self, Context};
use num_bigint::BigInt;

pub const DEFAULT_FUEL_LADDER: [u64; 4] = [4, 16, 64, 256];

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    /// Agreed at every probe/fuel tried; no witness of inequivalence.
    NoDifferenceFound,
    /// A concrete observation told the two programs apart.
    Distinguished(Witness),
    /// Every fuel on the ladder timed out on both sides, so nothing was
    /// observed at all.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    /// The distinguishing script; empty for strict comparison.
    pub script: Vec<Call>,
    pub fuel: u64,
    pub detail: String,
}

impl Verdict {
    pub fn distinguished(&self) -> bool {
        matches!(self, Verdict::Distinguished(_))
    }
}

fn drop_steps(mut c: Config) -> Config {
    c.steps = 0;
    c
}

/// Compare two closed ground computations configuration-by-configuration
/// along the fuel ladder.
pub fn strict_equiv(
    a: &Term,
    b: &Term,
    ladder: &[u64],
    ignore_steps: bool,
) -> Result<Verdict, EvalError> {
    let (_, ea) = check_ground(a)?;
    let (_, eb) = check_ground(b)?;
    for &fuel in ladder {
        let ra = interp::observe_elaborated(&ea, fuel)?;
        let rb = interp::observe_elaborated(&eb, fuel)?;
        match (ra, rb) {
            (Outcome::Timeout, Outcome::Timeout) => continue,
            (Outcome::Timeout, Outcome::Converged { .. }) => {
                return Ok(Verdict::Distinguished(Witness {
                    script: Vec::new(),
                    fuel,
                    detail: format!("left times out at fuel {fuel}, right converges"),
                }))
            }
            (Outcome::Converged { .. }, Outcome::Timeout) => {
                return Ok(Verdict::Distinguished(Witness {
                    script: Vec::new(),
                    fuel,
                    detail: format!("right times out at fuel {fuel}, left converges"),
                }))
            }
            (
                Outcome::Converged { value: ca, .. },
                Outcome::Converged { value: cb, .. },
            ) => {
                let (ca, cb) = if ignore_steps {
                    (drop_steps(ca), drop_steps(cb))
                } else {
                    (ca, cb)
                };
                if ca != cb {
                    debug_assert_ne!(bijection_equiv(&ca, &cb), Ok(true));
                    return Ok(Verdict::Distinguished(Witness {
                        script: Vec::new(),
                        fuel,
                        detail: format!(
                            "configs differ at fuel {fuel}: {} vs {}",
                            ca.dump(),
                            cb.dump()
                        ),
                    }));
                }
                // converged configs are fuel-monotone; no larger budget can
                // change them
                return Ok(Verdict::NoDifferenceFound);
            }
        }
    }
    // every fuel timed out on both sides
    Ok(Verdict::Inconclusive)
}

fn check_ground(t: &Term) -> Result<(Type, Term), EvalError> {
    let (ty, elab) = typecheck::infer(&Context::new(), t)?;
    match &ty {
        Type::T(g) if g.is_ground() => Ok((ty, elab)),
        _ => Err(EvalError::NotGround(ty)),
    }
}

/// Argument pool for a method parameter type; `None` when the type has no
/// finite pool (the script enumerator skips such methods).
pub fn arg_pool(ty: &Type) -> Option<Vec<Term>> {
    match ty {
        Type::Int => Some(
            [-2i64, -1, 0, 1, 2]
                .iter()
                .map(|n| Term::Int(BigInt::from(*n)))
                .collect(),
        ),
        Type::Unit => Some(vec![Term::Unit]),
        Type::Prod(a, b) => {
            let (pa, pb) = (arg_pool(a)?, arg_pool(b)?);
            Some(
                pa.iter()
                    .flat_map(|x| {
                        pb.iter()
                            .map(move |y| Term::Pair(Box::new(x.clone()), Box::new(y.clone())))
                    })
                    .collect(),
            )
        }
        _ => None,
    }
}

/// The single calls available on an object interface: one per nullary
/// method, one per (unary method, pool argument) pair. Methods must return
/// ground results to be observable.
pub fn single_calls(iface: &[(String, Type)]) -> Vec<Call> {
    let mut calls = Vec::new();
    for (label, ty) in iface {
        match ty {
            Type::T(g) if g.is_ground() => calls.push(Call {
                label: label.clone(),
                arg: None,
            }),
            Type::Fn(dom, cod) => {
                if let Type::T(g) = &**cod {
                    if g.is_ground() {
                        if let Some(pool) = arg_pool(dom) {
                            for arg in pool {
                                calls.push(Call {
                                    label: label.clone(),
                                    arg: Some(arg),
                                });
                            }
                        }
                    }
                }
            }
            _ => {}
        }
    }
    calls
}

/// All scripts of exactly length `len` over an interface.
pub fn gen_scripts(iface: &[(String, Type)], len: usize) -> Vec<Vec<Call>> {
    let singles = single_calls(iface);
    let mut layer: Vec<Vec<Call>> = vec![Vec::new()];
    for _ in 0..len {
        let mut next = Vec::new();
        for prefix in &layer {
            for call in &singles {
                let mut s = prefix.clone();
                s.push(call.clone());
                next.push(s);
            }
        }
        layer = next;
    }
    layer
}

/// All scripts of length 1 through `max_len`, shortest first.
pub fn gen_scripts_upto(iface: &[(String, Type)], max_len: usize) -> Vec<Vec<Call>> {
    (1..=max_len)
        .flat_map(|n| gen_scripts(iface, n))
        .collect()
}

fn object_interface(ty: &Type) -> Option<Vec<(String, Type)>> {
    match ty {
        Type::T(inner) => match &**inner {
            Type::Record(fields) => Some(fields.clone()),
            _ => None,
        },
        _ => None,
    }
}

fn traces_agree(a: &ProbeTrace, b: &ProbeTrace, ignore_steps: bool) -> bool {
    if ignore_steps {
        strip(a) == strip(b)
    } else {
        a == b
    }
}

fn strip(t: &ProbeTrace) -> ProbeTrace {
    use crate::interp::CallResult;
    let zero = |r: &CallResult| match r {
        CallResult::Converged { value, .. } => CallResult::Converged {
            value: value.clone(),
            steps: 0,
        },
        CallResult::Timeout => CallResult::Timeout,
    };
    ProbeTrace {
        creation: zero(&t.creation),
        calls: t.calls.iter().map(|(l, r)| (l.clone(), zero(r))).collect(),
    }
}

/// Probe two object-producing computations with every script up to
/// `max_len`, at each fuel on the ladder, and report the first
/// distinguishing observation.
pub fn probe_equiv(
    a: &Term,
    b: &Term,
    max_len: usize,
    ladder: &[u64],
    ignore_steps: bool,
) -> Result<Verdict, EvalError> {
    let (ty_a, ea) = typecheck::infer(&Context::new(), a)?;
    let (ty_b, eb) = typecheck::infer(&Context::new(), b)?;
    let iface_a = object_interface(&ty_a).ok_or(EvalError::NotAnObject)?;
    let iface_b = object_interface(&ty_b).ok_or(EvalError::NotAnObject)?;
    if iface_a != iface_b {
        return Ok(Verdict::Distinguished(Witness {
            script: Vec::new(),
            fuel: 0,
            detail: format!("interfaces differ: {ty_a} vs {ty_b}"),
        }));
    }
    let scripts = gen_scripts_upto(&iface_a, max_len);
    let mut observed_any = false;
    for script in &scripts {
        for &fuel in ladder {
            let ta = interp::probe_elaborated(&ea, script, fuel)?;
            let tb = interp::probe_elaborated(&eb, script, fuel)?;
            if !traces_agree(&ta, &tb, ignore_steps) {
                return Ok(Verdict::Distinguished(Witness {
                    script: script.clone(),
                    fuel,
                    detail: format!("traces differ: {ta:?} vs {tb:?}"),
                }));
            }
            if !ta.timed_out() {
                observed_any = true;
                // both sides fully converged and agreed; larger fuels are
                // identical by monotonicity
                break;
            }
        }
    }
    Ok(if observed_any || scripts.is_empty() {
        Verdict::NoDifferenceFound
    } else {
        Verdict::Inconclusive
    })
}

pub fn format_script(script: &[Call]) -> String {
    if script.is_empty() {
        return "<creation only>".to_string();
    }
    script
        .iter()
        .map(|c| match &c.arg {
            Some(a) => format!("{} {}", c.label, a),
            None => c.label.clone(),
        })
        .collect::<Vec<_>>()
        .join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_term, parse_type};

    const POS: &str = "l <- alloc 0; ret {incr -> i <- get l; set l (i + 1), read -> get l}";
    const NEG: &str =
        "l <- alloc 0; ret {incr -> i <- get l; set l (i - 1), read -> map neg (get l)}";

    fn counter_iface() -> Vec<(String, Type)> {
        match parse_type("{incr : T Unit, read : T Int}").unwrap() {
            Type::Record(fs) => fs,
            _ => unreachable!(),
        }
    }

    #[test]
    fn script_counts_for_counter_interface() {
        let iface = counter_iface();
        assert_eq!(gen_scripts(&iface, 1).len(), 2);
        assert_eq!(gen_scripts(&iface, 2).len(), 4);
        assert_eq!(gen_scripts_upto(&iface, 6).len(), 126);
    }

    #[test]
    fn unary_methods_draw_from_pools() {
        let iface = match parse_type("{put : Int -> T Unit}").unwrap() {
            Type::Record(fs) => fs,
            _ => unreachable!(),
        };
        assert_eq!(single_calls(&iface).len(), 5);
    }

    #[test]
    fn counters_probe_equal() {
        let a = parse_term(POS).unwrap();
        let b = parse_term(NEG).unwrap();
        let v = probe_equiv(&a, &b, 4, &DEFAULT_FUEL_LADDER, false).unwrap();
        assert_eq!(v, Verdict::NoDifferenceFound);
    }

    #[test]
    fn stuck_at_zero_counter_distinguished() {
        let a = parse_term(POS).unwrap();
        let b = parse_term(
            "l <- alloc 0; ret {incr -> i <- get l; set l (i + 1), read -> i <- get l; ret 0}",
        )
        .unwrap();
        match probe_equiv(&a, &b, 4, &DEFAULT_FUEL_LADDER, false).unwrap() {
            Verdict::Distinguished(w) => {
                assert_eq!(format_script(&w.script), "incr, read");
            }
            v => panic!("expected a witness, got {v:?}"),
        }
    }

    #[test]
    fn strict_equiv_on_monad_law() {
        let a = parse_term("x <- ret 2; l <- alloc x; get l").unwrap();
        let b = parse_term("l <- alloc 2; get l").unwrap();
        assert_eq!(
            strict_equiv(&a, &b, &DEFAULT_FUEL_LADDER, false).unwrap(),
            Verdict::NoDifferenceFound
        );
    }

    #[test]
    fn strict_equiv_counts_steps() {
        let a = parse_term("step; ret 1").unwrap();
        let b = parse_term("ret 1").unwrap();
        assert!(strict_equiv(&a, &b, &DEFAULT_FUEL_LADDER, false)
            .unwrap()
            .distinguished());
        assert_eq!(
            strict_equiv(&a, &b, &DEFAULT_FUEL_LADDER, true).unwrap(),
            Verdict::NoDifferenceFound
        );
    }

    #[test]
    fn strict_equiv_diverging_pair_inconclusive() {
        let loop_src = "(rec f x : Unit -> T Unit. f x) ()";
        let a = parse_term(loop_src).unwrap();
        assert_eq!(
            strict_equiv(&a, &a, &[4, 16], false).unwrap(),
            Verdict::Inconclusive
        );
    }

    #[test]
    fn strict_equiv_converge_vs_diverge() {
        let a = parse_term("ret ()").unwrap();
        let b = parse_term("(rec f x : Unit -> T Unit. f x) ()").unwrap();
        assert!(strict_equiv(&a, &b, &DEFAULT_FUEL_LADDER, false)
            .unwrap()
            .distinguished());
    }
}
