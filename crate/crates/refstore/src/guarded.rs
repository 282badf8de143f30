//! Fuel-indexed delayed computations: the desk-scale realization of the
//! later modality and the lifting monad. A `Delayed` value is a suspended
//! tree of delay layers over a result; running it with a fuel budget either
//! converges with an exact count of the layers forced, or times out.
//!
//! Fuel monotonicity holds by construction: a run that converges at fuel n
//! returns the identical value and step count at every larger fuel.

use std::rc::Rc;

#[derive(Clone)]
pub enum Delayed<A> {
    Now(A),
    Later(Rc<dyn Fn() -> Delayed<A>>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome<A> {
    Converged { value: A, steps: u64 },
    Timeout,
}

impl<A> Outcome<A> {
    pub fn converged(self) -> Option<(A, u64)> {
        match self {
            Outcome::Converged { value, steps } => Some((value, steps)),
            Outcome::Timeout => None,
        }
    }
}

impl<A: Clone + 'static> Delayed<A> {
    pub fn now(value: A) -> Self {
        Delayed::Now(value)
    }

    /// One unit of later-modality structure: consumes one fuel, adds one
    /// observed step.
    pub fn delay(self) -> Self {
        Delayed::Later(Rc::new(move || self.clone()))
    }

    /// Kleisli extension; step counts add when both sides converge.
    pub fn bind<B: Clone + 'static>(self, f: Rc<dyn Fn(A) -> Delayed<B>>) -> Delayed<B> {
        match self {
            Delayed::Now(v) => f(v),
            Delayed::Later(t) => Delayed::Later(Rc::new(move || t().bind(f.clone()))),
        }
    }

    pub fn map<B: Clone + 'static>(self, f: impl Fn(A) -> B + 'static) -> Delayed<B> {
        self.bind(Rc::new(move |v| Delayed::now(f(v))))
    }

    /// Force up to `fuel` delay layers.
    pub fn run(&self, fuel: u64) -> Outcome<A> {
        let mut cur = self.clone();
        let mut steps = 0u64;
        loop {
            match cur {
                Delayed::Now(value) => return Outcome::Converged { value, steps },
                Delayed::Later(t) => {
                    if steps == fuel {
                        return Outcome::Timeout;
                    }
                    steps += 1;
                    cur = t();
                }
            }
        }
    }
}

/// Guarded fixed point for computation-valued functions. Every unfolding
/// is guarded by one delay, so `rec h a` and `step; h (rec h) a` run
/// identically at every fuel.
pub fn lob_fix<A, B>(
    h: Rc<dyn Fn(Rc<dyn Fn(A) -> Delayed<B>>, A) -> Delayed<B>>,
) -> Rc<dyn Fn(A) -> Delayed<B>>
where
    A: Clone + 'static,
    B: Clone + 'static,
{
    Rc::new(move |a: A| {
        let h = h.clone();
        Delayed::Later(Rc::new(move || {
            let self_again = lob_fix(h.clone());
            h(self_again, a.clone())
        }))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn converged<A: Clone + PartialEq + std::fmt::Debug>(o: Outcome<A>, v: A, s: u64) {
        assert_eq!(o, Outcome::Converged { value: v, steps: s });
    }

    #[test]
    fn now_converges_immediately_at_any_fuel() {
        converged(Delayed::now(5).run(0), 5, 0);
        converged(Delayed::now(5).run(100), 5, 0);
    }

    #[test]
    fn delay_costs_one_fuel() {
        converged(Delayed::now(7).delay().run(1), 7, 1);
        assert_eq!(Delayed::now(7).delay().run(0), Outcome::Timeout);
    }

    #[test]
    fn bind_of_now_is_application() {
        // bind(now v, f) = f v, observed at all small fuels
        let f: Rc<dyn Fn(i64) -> Delayed<i64>> = Rc::new(|v| Delayed::now(v + 1));
        for fuel in 0..=20 {
            assert_eq!(
                Delayed::now(1).bind(f.clone()).run(fuel),
                f(1).run(fuel)
            );
        }
    }

    #[test]
    fn bind_steps_add() {
        let d = Delayed::now(1)
            .delay()
            .bind(Rc::new(|v: i64| Delayed::now(v).delay()));
        converged(d.run(2), 1, 2);
        assert_eq!(d.run(1), Outcome::Timeout);
    }

    #[test]
    fn lob_fix_single_unfold() {
        let f = lob_fix::<i64, i64>(Rc::new(|_, x| Delayed::now(x)));
        converged(f(3).run(5), 3, 1);
    }

    #[test]
    fn lob_fix_countdown() {
        let countdown = lob_fix::<i64, ()>(Rc::new(|self_, n| {
            if n == 0 {
                Delayed::now(())
            } else {
                self_(n - 1)
            }
        }));
        converged(countdown(3).run(10), (), 4);
        assert_eq!(countdown(3).run(2), Outcome::Timeout);
    }

    #[test]
    fn unfolding_law() {
        // rec h a runs identically to step; h (rec h) a at every fuel
        let h: Rc<dyn Fn(Rc<dyn Fn(i64) -> Delayed<i64>>, i64) -> Delayed<i64>> =
            Rc::new(|self_, n| {
                if n <= 0 {
                    Delayed::now(0)
                } else {
                    self_(n - 1).map(|v| v + 1)
                }
            });
        let rec = lob_fix(h.clone());
        for a in [0i64, 1, 3] {
            for fuel in 0..8 {
                let lhs = rec(a).run(fuel);
                let rhs = h(rec.clone(), a).delay().run(fuel);
                assert_eq!(lhs, rhs, "a={a} fuel={fuel}");
            }
        }
    }
}
