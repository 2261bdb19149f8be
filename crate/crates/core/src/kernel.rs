//! Guarded-domain primitives in their step-counted reading.
//!
//! A `Next<A>` is an `A` that becomes available one tick later, and
//! `Delay<A>` is the free guarded domain on `A`: either a value now, or a
//! suspended `Delay<A>` behind one tick. Everything is observed through
//! [`Delay::run`], which forces at most a given number of ticks, so
//! divergent computations are ordinary values that simply never report.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Bound shared by everything stored inside suspensions.
pub trait Payload: Clone + Send + Sync + 'static {}
impl<T: Clone + Send + Sync + 'static> Payload for T {}

/// A suspended value. Forcing is pure recomputation: no caching, no effects.
pub struct Next<A>(Arc<dyn Fn() -> A + Send + Sync>);

impl<A> Clone for Next<A> {
    fn clone(&self) -> Self {
        Next(Arc::clone(&self.0))
    }
}

impl<A> fmt::Debug for Next<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<next>")
    }
}

impl<A: 'static> Next<A> {
    pub fn new(body: impl Fn() -> A + Send + Sync + 'static) -> Self {
        Next(Arc::new(body))
    }

    /// `next a`.
    pub fn pure(a: A) -> Self
    where
        A: Payload,
    {
        Next::new(move || a.clone())
    }

    pub fn force(&self) -> A {
        (self.0)()
    }

    pub fn map<B: 'static>(self, f: impl Fn(A) -> B + Send + Sync + 'static) -> Next<B> {
        Next::new(move || f(self.force()))
    }

    /// Applicative combination: both suspensions are forced together under a
    /// single shared tick.
    pub fn ap<B: 'static>(f: Next<Arc<dyn Fn(A) -> B + Send + Sync>>, a: Next<A>) -> Next<B> {
        Next::new(move || (f.force())(a.force()))
    }

    pub fn zip<B: 'static>(self, other: Next<B>) -> Next<(A, B)> {
        Next::new(move || (self.force(), other.force()))
    }
}

/// Step-counted, possibly non-terminating computation of an `A`.
pub enum Delay<A> {
    Now(A),
    Later(Next<Delay<A>>),
}

impl<A: Clone> Clone for Delay<A> {
    fn clone(&self) -> Self {
        match self {
            Delay::Now(a) => Delay::Now(a.clone()),
            Delay::Later(t) => Delay::Later(t.clone()),
        }
    }
}

impl<A: fmt::Debug> fmt::Debug for Delay<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Delay::Now(a) => f.debug_tuple("Now").field(a).finish(),
            Delay::Later(_) => f.write_str("Later(..)"),
        }
    }
}

/// Result of observing a [`Delay`] with a finite budget.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome<A> {
    Value { value: A, steps: u64 },
    Timeout { budget: u64 },
}

impl<A> Outcome<A> {
    pub fn value(&self) -> Option<&A> {
        match self {
            Outcome::Value { value, .. } => Some(value),
            Outcome::Timeout { .. } => None,
        }
    }

    pub fn steps(&self) -> Option<u64> {
        match self {
            Outcome::Value { steps, .. } => Some(*steps),
            Outcome::Timeout { .. } => None,
        }
    }

    pub fn is_timeout(&self) -> bool {
        matches!(self, Outcome::Timeout { .. })
    }

    pub fn map<B>(self, f: impl FnOnce(A) -> B) -> Outcome<B> {
        match self {
            Outcome::Value { value, steps } => Outcome::Value {
                value: f(value),
                steps,
            },
            Outcome::Timeout { budget } => Outcome::Timeout { budget },
        }
    }
}

pub fn now<A>(a: A) -> Delay<A> {
    Delay::Now(a)
}

/// The delay map: one extra tick in front of `d`.
pub fn delta<A: Payload>(d: Delay<A>) -> Delay<A> {
    Delay::theta(Next::pure(d))
}

/// `delta` applied `n` times.
pub fn delta_n<A: Payload>(n: u64, d: Delay<A>) -> Delay<A> {
    (0..n).fold(d, |acc, _| delta(acc))
}

/// The divergent element, `μx. x`.
pub fn diverge<A: Payload>() -> Delay<A> {
    Delay::Later(Next::new(diverge::<A>))
}

impl<A: Payload> Delay<A> {
    /// The later-algebra of the lift monad: a suspended computation becomes a
    /// computation that first takes a tick.
    pub fn theta(rest: Next<Delay<A>>) -> Delay<A> {
        Delay::Later(rest)
    }

    pub fn later(rest: impl Fn() -> Delay<A> + Send + Sync + 'static) -> Delay<A> {
        Delay::Later(Next::new(rest))
    }

    pub fn bind<B: Payload>(self, f: impl Fn(A) -> Delay<B> + Send + Sync + 'static) -> Delay<B> {
        bind_shared(self, Arc::new(f))
    }

    pub fn map<B: Payload>(self, f: impl Fn(A) -> B + Send + Sync + 'static) -> Delay<B> {
        self.bind(move |a| Delay::Now(f(a)))
    }

    /// Force at most `budget` ticks.
    pub fn run(&self, budget: u64) -> Outcome<A> {
        let mut cur = self.clone();
        let mut steps = 0;
        loop {
            match cur {
                Delay::Now(value) => return Outcome::Value { value, steps },
                Delay::Later(rest) => {
                    if steps == budget {
                        return Outcome::Timeout { budget };
                    }
                    cur = rest.force();
                    steps += 1;
                }
            }
        }
    }

    /// Peel exactly one layer, if there is one.
    pub fn step(&self) -> Result<A, Delay<A>> {
        match self {
            Delay::Now(a) => Ok(a.clone()),
            Delay::Later(rest) => Err(rest.force()),
        }
    }
}

fn bind_shared<A: Payload, B: Payload>(
    d: Delay<A>,
    f: Arc<dyn Fn(A) -> Delay<B> + Send + Sync>,
) -> Delay<B> {
    match d {
        Delay::Now(a) => f(a),
        Delay::Later(rest) => Delay::later(move || bind_shared(rest.force(), Arc::clone(&f))),
    }
}

/// A type carrying a later-algebra. Every guarded domain gets a delay map and
/// a fixed-point combinator for free.
pub trait Guarded: Payload {
    fn theta(rest: Next<Self>) -> Self;

    fn delta(self) -> Self {
        Self::theta(Next::pure(self))
    }
}

impl<A: Payload> Guarded for Delay<A> {
    fn theta(rest: Next<Self>) -> Self {
        Delay::Later(rest)
    }
}

/// Guarded fixed point on a guarded domain: `fix f = theta(next(f(fix f)))`.
pub fn fix<D: Guarded>(f: impl Fn(D) -> D + Send + Sync + 'static) -> D {
    fix_shared(Arc::new(f))
}

fn fix_shared<D: Guarded>(f: Arc<dyn Fn(D) -> D + Send + Sync>) -> D {
    D::theta(Next::new(move || f(fix_shared(Arc::clone(&f)))))
}

/// Kleisli arrow of the lift monad.
pub type Kleisli<A, B> = Arc<dyn Fn(A) -> Delay<B> + Send + Sync>;

/// Guarded recursion on Kleisli arrows: `loop f = a ↦ delta(f(loop f)(a))`.
/// Each unfolding costs exactly one tick.
pub fn gfix<A: Payload, B: Payload>(
    f: impl Fn(Kleisli<A, B>) -> Kleisli<A, B> + Send + Sync + 'static,
) -> Kleisli<A, B> {
    gfix_shared(Arc::new(f))
}

type Functional<A, B> = Arc<dyn Fn(Kleisli<A, B>) -> Kleisli<A, B> + Send + Sync>;

fn gfix_shared<A: Payload, B: Payload>(f: Functional<A, B>) -> Kleisli<A, B> {
    Arc::new(move |a: A| {
        let f = Arc::clone(&f);
        Delay::later(move || {
            let this = gfix_shared(Arc::clone(&f));
            f(this)(a.clone())
        })
    })
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KernelError {
    #[error("operation `{0}` is not part of the container")]
    UnknownOperation(String),
}

/// An effect signature: operation names with the arity of their boundary.
/// Boundary of an operation with arity `n` is `{0, .., n - 1}`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Container {
    ops: BTreeMap<String, usize>,
}

impl Container {
    pub fn new<S: Into<String>>(ops: impl IntoIterator<Item = (S, usize)>) -> Self {
        Container {
            ops: ops.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        }
    }

    /// One operation with a singleton boundary: trees over it are exactly
    /// the lift monad.
    pub fn step() -> Self {
        Container::new([("step", 1)])
    }

    /// One operation with an empty boundary.
    pub fn fail() -> Self {
        Container::new([("fail", 0)])
    }

    pub fn arity(&self, op: &str) -> Option<usize> {
        self.ops.get(op).copied()
    }

    pub fn ops(&self) -> impl Iterator<Item = (&str, usize)> {
        self.ops.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

type Cont<A> = Arc<dyn Fn(usize) -> Next<ITree<A>> + Send + Sync>;

/// Guarded interaction tree: every continuation branch sits behind a tick.
pub enum ITree<A> {
    Ret(A),
    Do {
        op: Arc<str>,
        arity: usize,
        cont: Cont<A>,
    },
}

impl<A: Clone> Clone for ITree<A> {
    fn clone(&self) -> Self {
        match self {
            ITree::Ret(a) => ITree::Ret(a.clone()),
            ITree::Do { op, arity, cont } => ITree::Do {
                op: Arc::clone(op),
                arity: *arity,
                cont: Arc::clone(cont),
            },
        }
    }
}

impl<A: fmt::Debug> fmt::Debug for ITree<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ITree::Ret(a) => f.debug_tuple("Ret").field(a).finish(),
            ITree::Do { op, arity, .. } => write!(f, "Do({op}/{arity}, ..)"),
        }
    }
}

/// Implementation of each operation as a lift-monad computation that picks a
/// boundary position.
pub type Handler = Arc<dyn Fn(&str) -> Delay<usize> + Send + Sync>;

impl<A: Payload> ITree<A> {
    pub fn ret(a: A) -> Self {
        ITree::Ret(a)
    }

    pub fn perform(
        sig: &Container,
        op: &str,
        cont: impl Fn(usize) -> Next<ITree<A>> + Send + Sync + 'static,
    ) -> Result<Self, KernelError> {
        let arity = sig
            .arity(op)
            .ok_or_else(|| KernelError::UnknownOperation(op.to_string()))?;
        Ok(ITree::Do {
            op: Arc::from(op),
            arity,
            cont: Arc::new(cont),
        })
    }

    pub fn bind<B: Payload>(self, f: impl Fn(A) -> ITree<B> + Send + Sync + 'static) -> ITree<B> {
        itree_bind_shared(self, Arc::new(f))
    }

    /// The algebra map out of the free algebra: `ret a ↦ now a`,
    /// `do e k ↦ delta(handler e >>= p ↦ interp(k p))`.
    pub fn interp(&self, handler: &Handler) -> Delay<A> {
        match self {
            ITree::Ret(a) => Delay::Now(a.clone()),
            ITree::Do { op, cont, .. } => {
                let (op, cont, handler) = (Arc::clone(op), Arc::clone(cont), Arc::clone(handler));
                Delay::later(move || {
                    let cont = Arc::clone(&cont);
                    let h = Arc::clone(&handler);
                    handler(&op).bind(move |pos| cont(pos).force().interp(&h))
                })
            }
        }
    }

    /// Embed a lift-monad computation as a tree over [`Container::step`].
    pub fn from_delay(d: Delay<A>) -> Self {
        match d {
            Delay::Now(a) => ITree::Ret(a),
            Delay::Later(rest) => ITree::Do {
                op: Arc::from("step"),
                arity: 1,
                cont: Arc::new(move |_| rest.clone().map(ITree::from_delay)),
            },
        }
    }

    /// Inverse of [`ITree::from_delay`] for trees over the step container.
    pub fn to_delay(&self) -> Delay<A> {
        self.interp(&step_handler())
    }
}

fn itree_bind_shared<A: Payload, B: Payload>(
    t: ITree<A>,
    f: Arc<dyn Fn(A) -> ITree<B> + Send + Sync>,
) -> ITree<B> {
    match t {
        ITree::Ret(a) => f(a),
        ITree::Do { op, arity, cont } => ITree::Do {
            op,
            arity,
            cont: Arc::new(move |pos| {
                let f = Arc::clone(&f);
                cont(pos).map(move |k| itree_bind_shared(k, Arc::clone(&f)))
            }),
        },
    }
}

/// Handler for the step container: the only position, immediately.
pub fn step_handler() -> Handler {
    Arc::new(|_| Delay::Now(0))
}
