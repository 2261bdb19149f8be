//! The world-indexed state monad.
//!
//! A computation takes the current world and heap and produces, after some
//! number of abstract steps, an extended world, a heap over it and a result.
//! Reads cost one step because stored values live one tick in the future;
//! writes and allocation are free.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::kernel::{Delay, Guarded, Next, Payload};
use crate::lang::Ty;

use super::value::{value_has_type, SemVal};
use super::world::{fresh, world_leq, Heap, Loc, World};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("unbound type variable `{0}`")]
    UnboundType(String),
    #[error("expected {expected}, found {found}")]
    Stuck {
        expected: &'static str,
        found: String,
    },
    #[error("location {0} is not allocated")]
    DanglingLocation(Loc),
    #[error("location {index} holds `{stored}` but is used at `{used}`")]
    LocationType { index: Loc, stored: Ty, used: Ty },
}

pub fn stuck<T>(expected: &'static str, found: &SemVal) -> Result<T, EvalError> {
    Err(EvalError::Stuck {
        expected,
        found: found.tag().to_string(),
    })
}

/// World, heap and result at the end of a computation.
#[derive(Clone, Debug)]
pub struct State<A> {
    pub world: World,
    pub heap: Heap,
    pub value: A,
}

pub type Run<A> = Delay<Result<State<A>, EvalError>>;

type CompFn<A> = dyn Fn(&World, &Heap) -> Run<A> + Send + Sync;

pub struct Comp<A>(Arc<CompFn<A>>);

impl<A> Clone for Comp<A> {
    fn clone(&self) -> Self {
        Comp(Arc::clone(&self.0))
    }
}

impl<A> fmt::Debug for Comp<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<comp>")
    }
}

impl<A: Payload> Comp<A> {
    pub fn new(f: impl Fn(&World, &Heap) -> Run<A> + Send + Sync + 'static) -> Self {
        Comp(Arc::new(f))
    }

    pub fn run(&self, w: &World, h: &Heap) -> Run<A> {
        (self.0)(w, h)
    }
}

impl<A: Payload> Guarded for Comp<A> {
    /// `theta m w h = Later(force m w h)`.
    fn theta(rest: Next<Self>) -> Self {
        Comp::new(move |w, h| {
            let (rest, w, h) = (rest.clone(), w.clone(), h.clone());
            Delay::later(move || rest.force().run(&w, &h))
        })
    }
}

pub fn comp_ret<A: Payload>(a: A) -> Comp<A> {
    Comp::new(move |w, h| {
        Delay::Now(Ok(State {
            world: w.clone(),
            heap: h.clone(),
            value: a.clone(),
        }))
    })
}

/// Threads world and heap left to right; step counts add. In debug builds
/// every intermediate world is checked to extend its predecessor.
pub fn comp_bind<A: Payload, B: Payload>(
    m: Comp<A>,
    k: impl Fn(A) -> Comp<B> + Send + Sync + 'static,
) -> Comp<B> {
    let k = Arc::new(k);
    Comp::new(move |w, h| {
        let k = Arc::clone(&k);
        let w_in = w.clone();
        m.run(w, h).bind(move |r| match r {
            Ok(st) => {
                debug_assert!(world_leq(&w_in, &st.world), "world shrank across bind");
                debug_assert!(st.heap.matches(&st.world), "heap and world domains differ");
                k(st.value).run(&st.world, &st.heap)
            }
            Err(e) => Delay::Now(Err(e)),
        })
    })
}

pub fn comp_map<A: Payload, B: Payload>(
    m: Comp<A>,
    f: impl Fn(A) -> B + Send + Sync + 'static,
) -> Comp<B> {
    let f = Arc::new(f);
    comp_bind(m, move |a| comp_ret(f(a)))
}

pub fn comp_theta<A: Payload>(rest: Next<Comp<A>>) -> Comp<A> {
    <Comp<A> as Guarded>::theta(rest)
}

pub fn comp_delta<A: Payload>(m: Comp<A>) -> Comp<A> {
    m.delta()
}

fn check_cell(w: &World, h: &Heap, i: Loc, used: &Ty) -> Result<(), EvalError> {
    match (w.get(i), h.get(i)) {
        (Some(stored), Some(_)) if stored.alpha_eq(used) => Ok(()),
        (Some(stored), Some(_)) => Err(EvalError::LocationType {
            index: i,
            stored: stored.clone(),
            used: used.clone(),
        }),
        _ => Err(EvalError::DanglingLocation(i)),
    }
}

/// Read a cell: one abstract step, world and heap unchanged.
pub fn comp_get(i: Loc, ty: Ty) -> Comp<SemVal> {
    Comp::new(move |w, h| {
        if let Err(e) = check_cell(w, h, i, &ty) {
            return Delay::Now(Err(e));
        }
        let st = State {
            world: w.clone(),
            heap: h.clone(),
            value: h.get(i).expect("checked").clone(),
        };
        Delay::later(move || Delay::Now(Ok(st.clone())))
    })
}

/// Overwrite a cell. Free.
pub fn comp_set(i: Loc, ty: Ty, v: SemVal) -> Comp<SemVal> {
    Comp::new(move |w, h| {
        if let Err(e) = check_cell(w, h, i, &ty) {
            return Delay::Now(Err(e));
        }
        debug_assert!(
            value_has_type(&v, &ty, w),
            "ill-typed store into location {i}"
        );
        Delay::Now(Ok(State {
            world: w.clone(),
            heap: h.insert(i, v.clone()),
            value: SemVal::Unit,
        }))
    })
}

/// Allocate at the smallest unused location. Free.
pub fn comp_new(ty: Ty, v: SemVal) -> Comp<SemVal> {
    Comp::new(move |w, h| {
        let i = fresh(w);
        let world = w.extend(i, ty.clone());
        debug_assert!(value_has_type(&v, &ty, &world), "ill-typed initial value");
        Delay::Now(Ok(State {
            heap: h.insert(i, v.clone()),
            world,
            value: SemVal::Loc(i, ty.clone()),
        }))
    })
}

/// One abstract step and nothing else.
pub fn comp_step() -> Comp<SemVal> {
    comp_delta(comp_ret(SemVal::Unit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Outcome;

    fn observe(
        m: &Comp<SemVal>,
        w: &World,
        h: &Heap,
    ) -> (Vec<Loc>, Vec<(Loc, String)>, String, u64) {
        match m.run(w, h).run(100) {
            Outcome::Value {
                value: Ok(st),
                steps,
            } => (
                st.world.domain(),
                st.heap.iter().map(|(i, v)| (i, v.to_string())).collect(),
                st.value.to_string(),
                steps,
            ),
            other => panic!("unexpected {other:?}"),
        }
    }

    fn one_cell(v: i64) -> (World, Heap) {
        (
            World::from_entries([(0, Ty::Int)]),
            Heap::from_entries([(0, SemVal::Int(v))]),
        )
    }

    #[test]
    fn ret_and_step() {
        let (w, h) = (World::empty(), Heap::empty());
        assert_eq!(
            observe(&comp_ret(SemVal::Int(5)), &w, &h),
            (vec![], vec![], "5".into(), 0)
        );
        assert_eq!(
            observe(&comp_step(), &w, &h),
            (vec![], vec![], "()".into(), 1)
        );
        let two = comp_bind(comp_step(), |_| comp_step());
        assert_eq!(observe(&two, &w, &h).3, 2);
        let then5 = comp_bind(comp_step(), |_| comp_ret(SemVal::Int(5)));
        assert_eq!(observe(&then5, &w, &h), (vec![], vec![], "5".into(), 1));
    }

    #[test]
    fn get_costs_one_step() {
        let (w, h) = one_cell(7);
        assert_eq!(
            observe(&comp_get(0, Ty::Int), &w, &h),
            (vec![0], vec![(0, "7".into())], "7".into(), 1)
        );
    }

    #[test]
    fn set_is_free() {
        let (w, h) = one_cell(7);
        assert_eq!(
            observe(&comp_set(0, Ty::Int, SemVal::Int(9)), &w, &h),
            (vec![0], vec![(0, "9".into())], "()".into(), 0)
        );
    }

    #[test]
    fn new_allocates_in_order() {
        let m = comp_bind(comp_new(Ty::Int, SemVal::Int(0)), |_| {
            comp_new(Ty::Unit, SemVal::Unit)
        });
        let (dom, heap, v, steps) = observe(&m, &World::empty(), &Heap::empty());
        assert_eq!(dom, vec![0, 1]);
        assert_eq!(heap, vec![(0, "0".into()), (1, "()".into())]);
        assert_eq!((v.as_str(), steps), ("loc 1", 0));

        let m = comp_bind(comp_new(Ty::Int, SemVal::Int(0)), |l| {
            let SemVal::Loc(i, t) = l else { unreachable!() };
            comp_get(i, t)
        });
        assert_eq!(observe(&m, &World::empty(), &Heap::empty()).2, "0");
        assert_eq!(observe(&m, &World::empty(), &Heap::empty()).3, 1);
    }

    #[test]
    fn dangling_and_mistyped_locations() {
        let (w, h) = one_cell(1);
        let r = comp_get(3, Ty::Int).run(&w, &h).run(5);
        assert!(matches!(
            r,
            Outcome::Value {
                value: Err(EvalError::DanglingLocation(3)),
                ..
            }
        ));
        let r = comp_get(0, Ty::Unit).run(&w, &h).run(5);
        assert!(matches!(
            r,
            Outcome::Value {
                value: Err(EvalError::LocationType { .. }),
                ..
            }
        ));
    }

    #[test]
    fn theta_adds_a_step_in_every_position() {
        let (w, h) = one_cell(3);
        let m = comp_get(0, Ty::Int);
        let k = |v: SemVal| comp_set(0, Ty::Int, v);
        let a = comp_delta(comp_bind(m.clone(), k));
        let b = comp_bind(comp_delta(m.clone()), k);
        let c = comp_bind(m, move |v| comp_delta(k(v)));
        let oa = observe(&a, &w, &h);
        assert_eq!(oa.3, 2);
        assert_eq!(oa, observe(&b, &w, &h));
        assert_eq!(oa, observe(&c, &w, &h));
    }
}
