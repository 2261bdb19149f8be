//! Call-by-value evaluation of terms into semantic values.
//!
//! Pure evaluation never touches a heap: monadic forms evaluate to
//! [`SemVal::Comp`] and only run when handed a world and heap. Evaluation
//! itself lives in the delay monad because `unfold` costs one step, which
//! keeps recursion through μ-types productive.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::kernel::{Delay, Outcome};
use crate::lang::{Tm, TmKind, Ty};
use crate::typer::{typecheck_closed, CheckError};

use super::comp::{
    comp_bind, comp_get, comp_new, comp_ret, comp_set, comp_step, stuck, Comp, EvalError, Run,
};
use super::value::{Closure, Env, SemVal, TClosure};
use super::world::{Heap, World};

/// A pure evaluation: usually `Now`, one tick per `unfold`.
pub type Eval = Delay<Result<SemVal, EvalError>>;

fn ok(v: SemVal) -> Eval {
    Delay::Now(Ok(v))
}

fn fail(e: EvalError) -> Eval {
    Delay::Now(Err(e))
}

fn and_then(d: Eval, f: impl Fn(SemVal) -> Eval + Send + Sync + 'static) -> Eval {
    match d {
        Delay::Now(Ok(v)) => f(v),
        Delay::Now(Err(e)) => fail(e),
        later => later.bind(move |r| match r {
            Ok(v) => f(v),
            Err(e) => fail(e),
        }),
    }
}

fn both(
    a: Eval,
    b: impl Fn() -> Eval + Send + Sync + 'static,
    f: impl Fn(SemVal, SemVal) -> Eval + Send + Sync + 'static,
) -> Eval {
    let (b, f) = (Arc::new(b), Arc::new(f));
    and_then(a, move |x| {
        let f = Arc::clone(&f);
        and_then(b(), move |y| f(x.clone(), y))
    })
}

fn int(v: &SemVal) -> Result<i64, EvalError> {
    v.as_int().map_or_else(|| stuck("integer", v), Ok)
}

fn lift(r: Result<SemVal, EvalError>) -> Eval {
    Delay::Now(r)
}

fn comp_val(c: Comp<SemVal>) -> Eval {
    ok(SemVal::Comp(c))
}

/// Evaluate `e` under `env`.
pub fn eval(env: &Env, e: &Tm) -> Eval {
    match &e.kind {
        TmKind::Var(x) => match env.lookup(x) {
            Some(v) => ok(v.clone()),
            None => fail(EvalError::Unbound(x.to_string())),
        },
        TmKind::Unit => ok(SemVal::Unit),
        TmKind::Int(n) => ok(SemVal::Int(*n)),
        TmKind::Bin(op, a, b) => {
            let (op, env2, b) = (*op, env.clone(), Arc::clone(b));
            both(
                eval(env, a),
                move || eval(&env2, &b),
                move |x, y| lift(int(&x).and_then(|x| Ok(SemVal::Int(op.apply(x, int(&y)?))))),
            )
        }
        TmKind::Neg(a) => and_then(eval(env, a), |v| {
            lift(int(&v).map(|n| SemVal::Int(n.wrapping_neg())))
        }),
        TmKind::Ifz(c, a, b) => {
            let (env, a, b) = (env.clone(), Arc::clone(a), Arc::clone(b));
            and_then(eval(&env, c), move |v| match int(&v) {
                Ok(0) => eval(&env, &a),
                Ok(_) => eval(&env, &b),
                Err(e) => fail(e),
            })
        }
        TmKind::Lam(x, ty, body) => ok(SemVal::Fun(Arc::new(Closure {
            param: x.clone(),
            param_ty: env.close_ty(ty),
            body: Arc::clone(body),
            env: env.clone(),
        }))),
        TmKind::App(f, a) => {
            let (env2, a) = (env.clone(), Arc::clone(a));
            both(
                eval(env, f),
                move || eval(&env2, &a),
                |fv, av| apply(&fv, av),
            )
        }
        TmKind::Pair(a, b) => {
            let (env2, b) = (env.clone(), Arc::clone(b));
            both(
                eval(env, a),
                move || eval(&env2, &b),
                |x, y| ok(SemVal::pair(x, y)),
            )
        }
        TmKind::Fst(p) => and_then(eval(env, p), |v| match v {
            SemVal::Pair(a, _) => ok((*a).clone()),
            other => lift(stuck("pair", &other)),
        }),
        TmKind::Snd(p) => and_then(eval(env, p), |v| match v {
            SemVal::Pair(_, b) => ok((*b).clone()),
            other => lift(stuck("pair", &other)),
        }),
        TmKind::TLam(a, body) => ok(SemVal::TFun(Arc::new(TClosure {
            binder: a.clone(),
            body: Arc::clone(body),
            env: env.clone(),
        }))),
        TmKind::TApp(f, ty) => {
            let ty = env.close_ty(ty);
            and_then(eval(env, f), move |v| inst(&v, ty.clone()))
        }
        TmKind::Pack { witness, body, .. } => {
            let witness = env.close_ty(witness);
            and_then(eval(env, body), move |v| {
                ok(SemVal::Pack(witness.clone(), Arc::new(v)))
            })
        }
        TmKind::Unpack {
            package,
            ty_var,
            var,
            body,
        } => {
            let (env, a, x, body) = (env.clone(), ty_var.clone(), var.clone(), Arc::clone(body));
            and_then(eval(&env, package), move |v| match v {
                SemVal::Pack(t, inner) => {
                    let env = env.bind_ty(a.clone(), t).bind(x.clone(), (*inner).clone());
                    eval(&env, &body)
                }
                other => lift(stuck("package", &other)),
            })
        }
        TmKind::Fold(_, inner) => and_then(eval(env, inner), |v| ok(SemVal::Fold(Arc::new(v)))),
        TmKind::Unfold(inner) => and_then(eval(env, inner), |v| match v {
            SemVal::Fold(inner) => {
                let inner = (*inner).clone();
                Delay::later(move || ok(inner.clone()))
            }
            other => lift(stuck("folded value", &other)),
        }),
        TmKind::Ret(inner) => and_then(eval(env, inner), |v| comp_val(comp_ret(v))),
        TmKind::Bind(x, e1, e2) => {
            let (env, x, e2) = (env.clone(), x.clone(), Arc::clone(e2));
            and_then(eval(&env, e1), move |v| {
                let SemVal::Comp(c1) = v else {
                    return lift(stuck("computation", &v));
                };
                let (env, x, e2) = (env.clone(), x.clone(), Arc::clone(&e2));
                comp_val(comp_bind(c1, move |v| {
                    comp_of(eval(&env.bind(x.clone(), v), &e2))
                }))
            })
        }
        TmKind::Get(ty, l) => {
            let ty = env.close_ty(ty);
            and_then(eval(env, l), move |v| match v {
                SemVal::Loc(i, _) => comp_val(comp_get(i, ty.clone())),
                other => lift(stuck("location", &other)),
            })
        }
        TmKind::Set(ty, l, u) => {
            let (ty, env2, u) = (env.close_ty(ty), env.clone(), Arc::clone(u));
            both(
                eval(env, l),
                move || eval(&env2, &u),
                move |lv, uv| match lv {
                    SemVal::Loc(i, _) => comp_val(comp_set(i, ty.clone(), uv)),
                    other => lift(stuck("location", &other)),
                },
            )
        }
        TmKind::New(ty, u) => {
            let ty = env.close_ty(ty);
            and_then(eval(env, u), move |v| comp_val(comp_new(ty.clone(), v)))
        }
        TmKind::Step => comp_val(comp_step()),
    }
}

/// Apply a function value.
pub fn apply(f: &SemVal, arg: SemVal) -> Eval {
    match f {
        SemVal::Fun(c) => eval(&c.env.bind(c.param.clone(), arg), &c.body),
        other => lift(stuck("function", other)),
    }
}

/// Instantiate a type abstraction at a closed type.
pub fn inst(f: &SemVal, ty: Ty) -> Eval {
    match f {
        SemVal::TFun(c) => eval(&c.env.bind_ty(c.binder.clone(), ty), &c.body),
        other => lift(stuck("type abstraction", other)),
    }
}

/// The computation denoted by a pure evaluation that should yield a
/// computation value. Evaluation ticks are charged to the computation.
pub fn comp_of(d: Eval) -> Comp<SemVal> {
    match d {
        Delay::Now(Ok(SemVal::Comp(c))) => c,
        d => Comp::new(move |w, h| {
            let (w, h) = (w.clone(), h.clone());
            d.clone().bind(move |r| match r {
                Ok(SemVal::Comp(c)) => c.run(&w, &h),
                Ok(other) => Delay::Now(stuck("computation", &other)),
                Err(e) => Delay::Now(Err(e)),
            })
        }),
    }
}

/// Evaluate `e` and run the resulting computation from `(w, h)`.
pub fn exec(env: &Env, e: &Tm, w: &World, h: &Heap) -> Run<SemVal> {
    comp_of(eval(env, e)).run(w, h)
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error("program has type `{0}`, expected a computation type `T _`")]
    NotComputation(Ty),
    #[error("evaluation went wrong: {0}")]
    Eval(#[from] EvalError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Value,
    Timeout,
}

/// Result of running a closed program from the empty world.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub status: Status,
    pub ty: Ty,
    pub value: Option<SemVal>,
    /// Steps taken, or the exhausted budget on timeout.
    pub steps: u64,
    pub world: World,
    pub heap: Heap,
}

impl RunReport {
    pub fn to_json(&self) -> Value {
        let world: BTreeMap<String, Value> = self
            .world
            .iter()
            .map(|(i, t)| (i.to_string(), json!(t.to_string())))
            .collect();
        let heap: BTreeMap<String, Value> = self
            .heap
            .iter()
            .map(|(i, v)| {
                let ty = self.world.get(i).map(|t| t.to_string());
                (i.to_string(), json!({ "type": ty, "value": v.to_string() }))
            })
            .collect();
        json!({
            "status": self.status,
            "value": self.value.as_ref().map(|v| v.to_string()),
            "steps": self.steps,
            "heap": heap,
            "world": world,
        })
    }
}

/// Typecheck `e` at some `T τ`, evaluate it and run it on the empty world,
/// forcing at most `budget` steps.
pub fn run_program(e: &Tm, budget: u64) -> Result<RunReport, RunError> {
    let ty = typecheck_closed(e)?;
    let Ty::T(inner) = &ty else {
        return Err(RunError::NotComputation(ty));
    };
    let inner = (**inner).clone();
    match exec(&Env::empty(), e, &World::empty(), &Heap::empty()).run(budget) {
        Outcome::Value {
            value: Ok(st),
            steps,
        } => Ok(RunReport {
            status: Status::Value,
            ty: inner,
            value: Some(st.value),
            steps,
            world: st.world,
            heap: st.heap,
        }),
        Outcome::Value { value: Err(e), .. } => Err(e.into()),
        Outcome::Timeout { budget } => Ok(RunReport {
            status: Status::Timeout,
            ty: inner,
            value: None,
            steps: budget,
            world: World::empty(),
            heap: Heap::empty(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse;

    fn pure(src: &str) -> SemVal {
        match eval(&Env::empty(), &parse(src).unwrap()).run(100) {
            Outcome::Value { value: Ok(v), .. } => v,
            other => panic!("{src}: {other:?}"),
        }
    }

    fn run(src: &str, budget: u64) -> RunReport {
        run_program(&parse(src).unwrap(), budget).unwrap()
    }

    #[test]
    fn pure_evaluation() {
        assert_eq!(pure("2 + 3").to_string(), "5");
        assert_eq!(pure("(tfun a. fun x : a. x) [Int] 7").to_string(), "7");
        assert_eq!(pure("2 * 3 - -4").to_string(), "10");
        assert_eq!(pure("ifz 0 then 1 else 2").to_string(), "1");
        assert_eq!(pure("snd (1, 2, 3)").to_string(), "(2, 3)");
        assert_eq!(
            pure("unpack (pack[Int, 4] as exists a. a) as [b, x] in x").to_string(),
            "4"
        );
        assert!(matches!(pure("ret ()"), SemVal::Comp(_)));
        // Monadic forms do not run during pure evaluation.
        assert!(matches!(pure("bind x <- step; ret x"), SemVal::Comp(_)));
    }

    #[test]
    fn read_after_alloc() {
        let r = run("bind r <- new[Int] 5; bind x <- get[Int] r; ret x", 10);
        assert_eq!(r.status, Status::Value);
        assert_eq!(r.value.as_ref().unwrap().to_string(), "5");
        assert_eq!(r.steps, 1);
        assert_eq!(
            r.to_json()["heap"],
            json!({"0": {"type": "Int", "value": "5"}})
        );
        assert_eq!(r.to_json()["world"], json!({"0": "Int"}));
    }

    #[test]
    fn step_program() {
        let r = run("step", 10);
        assert_eq!(
            (r.value.unwrap().to_string(), r.steps),
            ("()".to_string(), 1)
        );
    }

    #[test]
    fn timeout_reports_budget() {
        let src = "bind r <- new[Unit -> T Unit] (fun u : Unit. ret u); \
                   set[Unit -> T Unit] r (fun u : Unit. bind f <- get[Unit -> T Unit] r; f u); \
                   bind f <- get[Unit -> T Unit] r; f ()";
        let r = run(src, 1000);
        assert_eq!(r.status, Status::Timeout);
        assert_eq!(r.steps, 1000);
        assert_eq!(r.to_json()["status"], json!("timeout"));
    }

    #[test]
    fn two_increments_on_a_given_cell() {
        let ml = parse(
            "bind x <- get[Int] r; set[Int] r (x + 1); bind y <- get[Int] r; set[Int] r (y + 1); ret ()",
        )
        .unwrap();
        let env = Env::empty().bind("r".into(), SemVal::Loc(0, Ty::Int));
        let w = World::from_entries([(0, Ty::Int)]);
        let h = Heap::from_entries([(0, SemVal::Int(40))]);
        match exec(&env, &ml, &w, &h).run(10) {
            Outcome::Value {
                value: Ok(st),
                steps,
            } => {
                assert_eq!(steps, 2);
                assert_eq!(st.heap.get(0).unwrap().to_string(), "42");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn polymorphic_annotations_are_closed_before_allocation() {
        let r = run(
            "(tfun a. fun x : a. bind r <- new[a] x; get[a] r) [Int * Int] (1, 2)",
            10,
        );
        assert_eq!(r.value.unwrap().to_string(), "(1, 2)");
        assert_eq!(r.world.get(0), Some(&Ty::prod(Ty::Int, Ty::Int)));
    }

    #[test]
    fn unfold_ticks() {
        let r = run("ret (unfold (fold[mu a. Int] 3))", 10);
        assert_eq!(
            (r.value.unwrap().to_string(), r.steps),
            ("3".to_string(), 1)
        );
    }

    #[test]
    fn non_computation_rejected() {
        assert!(matches!(
            run_program(&parse("3").unwrap(), 10),
            Err(RunError::NotComputation(Ty::Int))
        ));
    }
}
