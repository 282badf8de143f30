//! Seeded random generators for property suites: ground types and values,
//! closed straight-line programs, law instances (a program containing a
//! rule's left-hand side at a known path), and configurations for the
//! canonicalization oracle.

use crate::interp::Value;
use crate::store::{Config, Heap, Location};
use crate::syntax::{Path, Term, Type};
use num_bigint::BigInt;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub struct Gen {
    rng: ChaCha8Rng,
}

impl Gen {
    pub fn new(seed: u64) -> Gen {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn small_int(&mut self) -> i64 {
        self.rng.gen_range(-9..=9)
    }

    /// A first-order ground type (no references).
    pub fn ground_type(&mut self, depth: usize) -> Type {
        match if depth == 0 {
            self.rng.gen_range(0..2)
        } else {
            self.rng.gen_range(0..3)
        } {
            0 => Type::Int,
            1 => Type::Unit,
            _ => Type::prod(self.ground_type(depth - 1), self.ground_type(depth - 1)),
        }
    }

    /// A closed pure term of the given ground type, possibly using the
    /// typed variables in scope.
    pub fn pure_term(&mut self, ty: &Type, scope: &[(String, Type)]) -> Term {
        let candidates: Vec<&String> = scope
            .iter()
            .filter(|(_, t)| t == ty)
            .map(|(x, _)| x)
            .collect();
        if !candidates.is_empty() && self.rng.gen_bool(0.5) {
            let x = candidates[self.rng.gen_range(0..candidates.len())];
            return self.wrap_arith(Term::var(x), ty, scope);
        }
        match ty {
            Type::Int => {
                let lit = Term::Int(BigInt::from(self.small_int()));
                self.wrap_arith(lit, ty, scope)
            }
            Type::Unit => Term::Unit,
            Type::Prod(a, b) => Term::Pair(
                Box::new(self.pure_term(a, scope)),
                Box::new(self.pure_term(b, scope)),
            ),
            _ => panic!("pure_term expects a first-order ground type, got {ty}"),
        }
    }

    /// Occasionally dress an integer expression in arithmetic.
    fn wrap_arith(&mut self, e: Term, ty: &Type, scope: &[(String, Type)]) -> Term {
        if *ty != Type::Int || self.rng.gen_bool(0.6) {
            return e;
        }
        match self.rng.gen_range(0..3) {
            0 => Term::Neg(Box::new(e)),
            1 => Term::Add(Box::new(e), Box::new(self.pure_term(ty, scope))),
            _ => Term::Sub(Box::new(e), Box::new(self.pure_term(ty, scope))),
        }
    }

    /// A closed straight-line computation of ground observation type:
    /// a chain of allocations, reads, writes and steps ending in a return.
    pub fn straightline(&mut self, len: usize) -> Term {
        let mut scope: Vec<(String, Type)> = Vec::new();
        let mut cells: Vec<(String, Type)> = Vec::new();
        let mut prefix: Vec<(String, Term)> = Vec::new();
        for i in 0..len {
            match self.rng.gen_range(0..4) {
                0 => {
                    let ty = self.ground_type(1);
                    let init = self.pure_term(&ty, &scope);
                    let name = format!("c{i}");
                    prefix.push((name.clone(), Term::alloc(init)));
                    cells.push((name, ty));
                }
                1 if !cells.is_empty() => {
                    let (c, ty) = cells[self.rng.gen_range(0..cells.len())].clone();
                    let name = format!("v{i}");
                    prefix.push((name.clone(), Term::get(Term::var(&c))));
                    scope.push((name, ty));
                }
                2 if !cells.is_empty() => {
                    let (c, ty) = cells[self.rng.gen_range(0..cells.len())].clone();
                    let v = self.pure_term(&ty, &scope);
                    prefix.push(("_".to_string(), Term::set(Term::var(&c), v)));
                }
                _ => prefix.push(("_".to_string(), Term::Step)),
            }
        }
        let result_ty = self.ground_type(1);
        let result = self.pure_term(&result_ty, &scope);
        let mut t = Term::ret(result);
        for (name, rhs) in prefix.into_iter().rev() {
            t = Term::bind(&name, rhs, t);
        }
        t
    }

    /// A program containing the named rule's left-hand side as a redex, and
    /// the path to it. The program is closed and of ground observation type,
    /// so both the redex and its rewrite can be run and compared.
    pub fn law_instance(&mut self, rule: &str) -> (Term, Path) {
        // a prelude allocating two cells of the same random ground type
        let ty = self.ground_type(1);
        let v1 = self.pure_term(&ty, &[]);
        let v2 = self.pure_term(&ty, &[]);
        let w1 = self.pure_term(&ty, &[]);
        let w2 = self.pure_term(&ty, &[]);
        let in_prelude = |redex: Term, v1: Term, v2: Term| -> (Term, Path) {
            (
                Term::bind(
                    "a",
                    Term::alloc(v1),
                    Term::bind("b", Term::alloc(v2), redex),
                ),
                vec![1, 1],
            )
        };
        match rule {
            "set-get" => in_prelude(
                Term::seq(Term::set(Term::var("a"), w1), Term::get(Term::var("a"))),
                v1,
                v2,
            ),
            "alloc-set" => (
                Term::bind(
                    "x",
                    Term::alloc(v1.clone()),
                    Term::seq(
                        Term::set(Term::var("x"), v1),
                        Term::ret(Term::var("x")),
                    ),
                ),
                vec![],
            ),
            "set-set" => in_prelude(
                Term::seq(
                    Term::set(Term::var("a"), w1),
                    Term::set(Term::var("a"), w2),
                ),
                v1,
                v2,
            ),
            "get-get-commute" => in_prelude(
                Term::bind(
                    "x",
                    Term::get(Term::var("a")),
                    Term::bind(
                        "y",
                        Term::get(Term::var("b")),
                        Term::ret(Term::Pair(
                            Box::new(Term::var("x")),
                            Box::new(Term::var("y")),
                        )),
                    ),
                ),
                v1,
                v2,
            ),
            "get-set" => in_prelude(
                Term::bind(
                    "x",
                    Term::get(Term::var("a")),
                    Term::seq(
                        Term::set(Term::var("a"), Term::var("x")),
                        Term::ret(Term::var("x")),
                    ),
                ),
                v1,
                v2,
            ),
            "get-discard" => {
                let cont = self.straightline(2);
                in_prelude(Term::seq(Term::get(Term::var("a")), cont), v1, v2)
            }
            "step-central" => {
                let rhs = Term::get(Term::var("a"));
                in_prelude(
                    Term::seq(
                        Term::Step,
                        Term::bind("x", rhs, Term::ret(Term::var("x"))),
                    ),
                    v1,
                    v2,
                )
            }
            "bind-unit-left" => {
                let pure = self.pure_term(&ty, &[]);
                in_prelude(
                    Term::bind(
                        "x",
                        Term::ret(pure),
                        Term::seq(
                            Term::set(Term::var("a"), Term::var("x")),
                            Term::get(Term::var("a")),
                        ),
                    ),
                    v1,
                    v2,
                )
            }
            "bind-unit-right" => in_prelude(
                Term::bind("x", Term::get(Term::var("a")), Term::ret(Term::var("x"))),
                v1,
                v2,
            ),
            "bind-assoc" => in_prelude(
                Term::bind(
                    "x",
                    Term::bind(
                        "y",
                        Term::get(Term::var("a")),
                        Term::seq(Term::set(Term::var("b"), Term::var("y")), Term::get(Term::var("b"))),
                    ),
                    Term::ret(Term::var("x")),
                ),
                v1,
                v2,
            ),
            "rec-unfold" => {
                // a non-self-calling recursive function, so both sides converge
                let body = Term::seq(
                    Term::set(Term::var("a"), Term::var("x")),
                    Term::get(Term::var("a")),
                );
                let redex = Term::app(
                    Term::Rec {
                        fname: "f".into(),
                        param: "x".into(),
                        ann: Some(Type::fun(ty.clone(), Type::comp(ty.clone()))),
                        body: Box::new(body),
                    },
                    w1,
                );
                in_prelude(redex, v1, v2)
            }
            "alloc-permute" => {
                let ty2 = self.ground_type(1);
                let e2 = self.pure_term(&ty2, &[]);
                (
                    Term::bind(
                        "l",
                        Term::alloc(v1),
                        Term::bind(
                            "k",
                            Term::alloc(e2),
                            Term::ret(Term::Pair(
                                Box::new(Term::var("l")),
                                Box::new(Term::var("k")),
                            )),
                        ),
                    ),
                    vec![],
                )
            }
            other => panic!("no instance generator for rule '{other}'"),
        }
    }

    /// A random value conforming to a ground type, with locations drawn
    /// from `locs` when the type asks for a reference.
    fn value_of(&mut self, ty: &Type, locs: &[(Location, Type)]) -> Value {
        match ty {
            Type::Int => Value::int(self.small_int()),
            Type::Unit => Value::Unit,
            Type::Prod(a, b) => Value::Pair(
                Box::new(self.value_of(a, locs)),
                Box::new(self.value_of(b, locs)),
            ),
            Type::Ref(inner) => {
                let matching: Vec<_> = locs
                    .iter()
                    .filter(|(_, t)| t == &**inner)
                    .collect();
                let (l, t) = matching[self.rng.gen_range(0..matching.len())];
                Value::Loc(*l, Type::reference(t.clone()))
            }
            _ => panic!("value_of expects a ground type"),
        }
    }

    /// A random configuration with at most `max_locs` locations; cells may
    /// point at one another and the result may or may not reach them.
    pub fn config(&mut self, max_locs: usize) -> Config {
        let n = self.rng.gen_range(0..=max_locs);
        // choose base tags first so reference cells have targets
        let mut tags: Vec<Type> = (0..n).map(|_| self.ground_type(1)).collect();
        for i in 0..n {
            if i > 0 && self.rng.gen_bool(0.3) {
                let j = self.rng.gen_range(0..i);
                tags[i] = Type::reference(tags[j].clone());
            }
        }
        let mut heap = Heap::empty();
        let mut locs: Vec<(Location, Type)> = Vec::new();
        for (i, tag) in tags.iter().enumerate() {
            // cells may reference any earlier location
            let v = self.value_of(tag, &locs[..i.min(locs.len())]);
            let (h2, l) = heap.alloc(tag.clone(), v);
            heap = h2;
            locs.push((l, tag.clone()));
        }
        let result_ty = if !locs.is_empty() && self.rng.gen_bool(0.5) {
            let (_, t) = &locs[self.rng.gen_range(0..locs.len())];
            Type::reference(t.clone())
        } else {
            self.ground_type(1)
        };
        let result = self.value_of(&result_ty, &locs);
        Config {
            heap,
            result,
            steps: self.rng.gen_range(0..4),
        }
    }

    /// The same configuration with its locations renamed by a random
    /// permutation (realized by re-allocating in a shuffled order).
    pub fn permuted(&mut self, c: &Config) -> Config {
        let cells: Vec<(Location, Type, Value)> = c
            .heap
            .iter()
            .map(|(l, t, v)| (l, t.clone(), v.clone()))
            .collect();
        let mut order: Vec<usize> = (0..cells.len()).collect();
        order.shuffle(&mut self.rng);
        // position of each original cell in the new allocation order
        let mut map = std::collections::BTreeMap::new();
        for (new_pos, &orig_idx) in order.iter().enumerate() {
            map.insert(cells[orig_idx].0, Location(new_pos as u64));
        }
        let mut heap = Heap::empty();
        for &i in &order {
            let (_, tag, v) = &cells[i];
            let (h2, _) = heap.alloc(tag.clone(), v.rename_locations(&map));
            heap = h2;
        }
        Config {
            heap,
            result: c.result.rename_locations(&map),
            steps: c.steps,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::typecheck::{infer, Context};

    #[test]
    fn straightline_programs_typecheck_at_ground_type() {
        let mut g = Gen::new(7);
        for _ in 0..50 {
            let t = g.straightline(6);
            let (ty, _) = infer(&Context::new(), &t).unwrap_or_else(|e| panic!("{t}: {e}"));
            match ty {
                Type::T(inner) => assert!(inner.is_ground(), "{t} : T {inner}"),
                other => panic!("{t} : {other}"),
            }
        }
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let a = Gen::new(42).straightline(8);
        let b = Gen::new(42).straightline(8);
        assert_eq!(a.to_string(), b.to_string());
    }

    #[test]
    fn law_instances_contain_the_redex() {
        use crate::rewrite::{apply_rule, Direction};
        let mut g = Gen::new(3);
        for rule in [
            "set-get",
            "alloc-set",
            "set-set",
            "get-get-commute",
            "get-set",
            "get-discard",
            "step-central",
            "bind-unit-left",
            "bind-unit-right",
            "bind-assoc",
            "rec-unfold",
            "alloc-permute",
        ] {
            for _ in 0..10 {
                let (t, path) = g.law_instance(rule);
                apply_rule(&t, rule, &path, Direction::Ltr, &Default::default(), None)
                    .unwrap_or_else(|e| panic!("{rule} on {t}: {e}"));
            }
        }
    }

    #[test]
    fn permuted_configs_are_bijection_equivalent() {
        use crate::store::bijection_equiv;
        let mut g = Gen::new(11);
        for _ in 0..100 {
            let c = g.config(4);
            let p = g.permuted(&c);
            assert_eq!(bijection_equiv(&c, &p), Ok(true), "{}\nvs\n{}", c.dump(), p.dump());
        }
    }
}
