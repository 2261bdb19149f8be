//! Exact comparison of two open computations under a concrete instantiation
//! of their free variables and starting store.

use std::fmt;

use crate::kernel::Outcome;
use crate::lang::{Name, Tm, Ty};
use crate::typer::{typecheck, KCtx, TCtx};

use super::comp::EvalError;
use super::eval::{apply, exec, RunError};
use super::value::{Env, SemVal};
use super::world::{Heap, Loc, World};

/// Starting world and heap plus a value (and its type) for each free
/// variable of the equation.
#[derive(Clone, Debug, Default)]
pub struct Instantiation {
    pub world: World,
    pub heap: Heap,
    pub bindings: Vec<(Name, Ty, SemVal)>,
}

impl Instantiation {
    pub fn new(world: World, heap: Heap) -> Self {
        Instantiation {
            world,
            heap,
            bindings: Vec::new(),
        }
    }

    pub fn bind(mut self, x: &str, ty: Ty, v: SemVal) -> Self {
        self.bindings.push((x.into(), ty, v));
        self
    }

    fn env(&self) -> Env {
        self.bindings.iter().fold(Env::empty(), |env, (x, _, v)| {
            env.bind(x.clone(), v.clone())
        })
    }

    fn gamma(&self) -> TCtx {
        self.bindings
            .iter()
            .fold(TCtx::new(), |g, (x, t, _)| g.with(x, t.clone()))
    }
}

/// Final state of one side.
#[derive(Clone, Debug)]
pub struct Observation {
    pub world: World,
    pub heap: Heap,
    pub value: SemVal,
    pub steps: u64,
}

impl fmt::Display for Observation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "value {} after {} steps, heap {{",
            self.value, self.steps
        )?;
        for (n, (i, v)) in self.heap.iter().enumerate() {
            let sep = if n == 0 { "" } else { ", " };
            let ty = self.world.get(i).map(|t| t.to_string()).unwrap_or_default();
            write!(f, "{sep}{i} : {ty} = {v}")?;
        }
        f.write_str("}")
    }
}

/// One way in which the two sides differ.
#[derive(Clone, Debug, PartialEq)]
pub enum Mismatch {
    WorldDomain {
        left: Vec<Loc>,
        right: Vec<Loc>,
    },
    WorldEntry {
        index: Loc,
        left: Ty,
        right: Ty,
    },
    Heap {
        index: Loc,
        left: String,
        right: String,
    },
    Value {
        left: String,
        right: String,
    },
    Steps {
        left: u64,
        right: u64,
    },
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mismatch::WorldDomain { left, right } => {
                write!(f, "world domains differ: {left:?} vs {right:?}")
            }
            Mismatch::WorldEntry { index, left, right } => {
                write!(f, "location {index} stores {left} vs {right}")
            }
            Mismatch::Heap { index, left, right } => {
                write!(f, "location {index} holds {left} vs {right}")
            }
            Mismatch::Value { left, right } => write!(f, "values differ: {left} vs {right}"),
            Mismatch::Steps { left, right } => write!(f, "step counts differ: {left} vs {right}"),
        }
    }
}

#[derive(Clone, Debug)]
pub enum EqReport {
    Equal(Observation),
    NotEqual {
        left: Observation,
        right: Observation,
        mismatches: Vec<Mismatch>,
    },
    /// A side timed out, or values could not be compared.
    Inconclusive(String),
}

impl EqReport {
    pub fn is_equal(&self) -> bool {
        matches!(self, EqReport::Equal(_))
    }

    pub fn is_not_equal(&self) -> bool {
        matches!(self, EqReport::NotEqual { .. })
    }
}

/// Run both sides from the instantiated store and compare final world,
/// heap, value and step count exactly.
pub fn check_equation(
    lhs: &Tm,
    rhs: &Tm,
    inst: &Instantiation,
    budget: u64,
) -> Result<EqReport, RunError> {
    let gamma = inst.gamma();
    let lt = typecheck(&KCtx::new(), &gamma, lhs)?;
    let rt = typecheck(&KCtx::new(), &gamma, rhs)?;
    if !lt.alpha_eq(&rt) || !matches!(lt, Ty::T(_)) {
        return Err(RunError::NotComputation(if matches!(lt, Ty::T(_)) {
            rt
        } else {
            lt
        }));
    }
    let env = inst.env();
    let (left, right) = match (
        observe(&env, lhs, &inst.world, &inst.heap, budget)?,
        observe(&env, rhs, &inst.world, &inst.heap, budget)?,
    ) {
        (Some(l), Some(r)) => (l, r),
        _ => {
            return Ok(EqReport::Inconclusive(format!(
                "timed out after {budget} steps"
            )))
        }
    };
    match compare(&left, &right, budget, VALUE_DEPTH)? {
        Cmp::Same => Ok(EqReport::Equal(left)),
        Cmp::Unknown(why) => Ok(EqReport::Inconclusive(why)),
        Cmp::Differ(mismatches) => Ok(EqReport::NotEqual {
            left,
            right,
            mismatches,
        }),
    }
}

/// How deep function- and computation-valued results are explored.
const VALUE_DEPTH: u32 = 2;

/// Ground arguments used to probe functions of Int or Unit argument.
const PROBES: [i64; 3] = [0, 1, -1];

fn observe(
    env: &Env,
    e: &Tm,
    w: &World,
    h: &Heap,
    budget: u64,
) -> Result<Option<Observation>, EvalError> {
    match exec(env, e, w, h).run(budget) {
        Outcome::Value {
            value: Ok(st),
            steps,
        } => Ok(Some(Observation {
            world: st.world,
            heap: st.heap,
            value: st.value,
            steps,
        })),
        Outcome::Value { value: Err(e), .. } => Err(e),
        Outcome::Timeout { .. } => Ok(None),
    }
}

enum Cmp {
    Same,
    Differ(Vec<Mismatch>),
    Unknown(String),
}

fn compare(l: &Observation, r: &Observation, budget: u64, depth: u32) -> Result<Cmp, EvalError> {
    let mut out = Vec::new();
    let (ld, rd) = (l.world.domain(), r.world.domain());
    if ld != rd {
        out.push(Mismatch::WorldDomain {
            left: ld,
            right: rd,
        });
    }
    for (i, lt) in l.world.iter() {
        if let Some(rt) = r.world.get(i) {
            if !lt.alpha_eq(rt) {
                out.push(Mismatch::WorldEntry {
                    index: i,
                    left: lt.clone(),
                    right: rt.clone(),
                });
            }
        }
    }
    let mut unknown = None;
    for (i, lv) in l.heap.iter() {
        let Some(rv) = r.heap.get(i) else { continue };
        match lv.first_order_eq(rv) {
            Some(true) => {}
            Some(false) => out.push(Mismatch::Heap {
                index: i,
                left: lv.to_string(),
                right: rv.to_string(),
            }),
            None => unknown = Some(format!("location {i} holds code")),
        }
    }
    match value_eq(l, r, &l.value, &r.value, budget, depth)? {
        Some(true) => {}
        Some(false) => out.push(Mismatch::Value {
            left: l.value.to_string(),
            right: r.value.to_string(),
        }),
        None => unknown = Some(format!("cannot compare {} with {}", l.value, r.value)),
    }
    if l.steps != r.steps {
        out.push(Mismatch::Steps {
            left: l.steps,
            right: r.steps,
        });
    }
    Ok(match (out.is_empty(), unknown) {
        (false, _) => Cmp::Differ(out),
        (true, Some(why)) => Cmp::Unknown(why),
        (true, None) => Cmp::Same,
    })
}

/// Compare result values. First-order values are compared structurally;
/// functions on ground arguments are probed, and computations are run from
/// the final stores of their respective sides, down to `depth` levels.
fn value_eq(
    l: &Observation,
    r: &Observation,
    lv: &SemVal,
    rv: &SemVal,
    budget: u64,
    depth: u32,
) -> Result<Option<bool>, EvalError> {
    if let Some(b) = lv.first_order_eq(rv) {
        return Ok(Some(b));
    }
    if depth == 0 {
        return Ok(None);
    }
    match (lv, rv) {
        (SemVal::Fun(fl), SemVal::Fun(_)) => {
            let args: Vec<SemVal> = match fl.param_ty {
                Ty::Int => PROBES.iter().map(|n| SemVal::Int(*n)).collect(),
                Ty::Unit => vec![SemVal::Unit],
                _ => return Ok(None),
            };
            for a in args {
                let (Some(x), Some(y)) = (
                    apply(lv, a.clone())
                        .run(budget)
                        .value()
                        .cloned()
                        .transpose()?,
                    apply(rv, a).run(budget).value().cloned().transpose()?,
                ) else {
                    return Ok(None);
                };
                match value_eq(l, r, &x, &y, budget, depth - 1)? {
                    Some(true) => {}
                    other => return Ok(other),
                }
            }
            Ok(Some(true))
        }
        (SemVal::Comp(cl), SemVal::Comp(cr)) => {
            let run = |c: &super::comp::Comp<SemVal>,
                       o: &Observation|
             -> Result<Option<Observation>, EvalError> {
                match c.run(&o.world, &o.heap).run(budget) {
                    Outcome::Value {
                        value: Ok(st),
                        steps,
                    } => Ok(Some(Observation {
                        world: st.world,
                        heap: st.heap,
                        value: st.value,
                        steps,
                    })),
                    Outcome::Value { value: Err(e), .. } => Err(e),
                    Outcome::Timeout { .. } => Ok(None),
                }
            };
            let (Some(x), Some(y)) = (run(cl, l)?, run(cr, r)?) else {
                return Ok(None);
            };
            Ok(match compare(&x, &y, budget, depth - 1)? {
                Cmp::Same => Some(true),
                Cmp::Differ(_) => Some(false),
                Cmp::Unknown(_) => None,
            })
        }
        (SemVal::Pair(a1, b1), SemVal::Pair(a2, b2)) => {
            match value_eq(l, r, a1, a2, budget, depth)? {
                Some(true) => value_eq(l, r, b1, b2, budget, depth),
                other => Ok(other),
            }
        }
        _ => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse;

    fn cell(v: i64) -> Instantiation {
        Instantiation::new(
            World::from_entries([(0, Ty::Int)]),
            Heap::from_entries([(0, SemVal::Int(v))]),
        )
        .bind("l", Ty::reference(Ty::Int), SemVal::Loc(0, Ty::Int))
    }

    fn check(l: &str, r: &str, inst: &Instantiation) -> EqReport {
        check_equation(&parse(l).unwrap(), &parse(r).unwrap(), inst, 100).unwrap()
    }

    #[test]
    fn set_then_get() {
        let inst = cell(3).bind("u", Ty::Int, SemVal::Int(7));
        let rep = check(
            "set[Int] l u; get[Int] l",
            "step; set[Int] l u; ret u",
            &inst,
        );
        let EqReport::Equal(obs) = rep else {
            panic!("{rep:?}")
        };
        assert_eq!((obs.value.to_string(), obs.steps), ("7".to_string(), 1));
        assert_eq!(obs.heap.get(0).unwrap().to_string(), "7");
    }

    #[test]
    fn get_then_set_back() {
        let rep = check("bind x <- get[Int] l; set[Int] l x", "step", &cell(3));
        let EqReport::Equal(obs) = rep else {
            panic!("{rep:?}")
        };
        assert_eq!((obs.value.to_string(), obs.steps), ("()".to_string(), 1));
        assert_eq!(obs.heap.get(0).unwrap().to_string(), "3");
    }

    #[test]
    fn dropping_the_step_is_caught() {
        let inst = cell(3).bind("u", Ty::Int, SemVal::Int(7));
        let rep = check("set[Int] l u; get[Int] l", "set[Int] l u; ret u", &inst);
        let EqReport::NotEqual { mismatches, .. } = rep else {
            panic!("{rep:?}")
        };
        assert_eq!(mismatches, vec![Mismatch::Steps { left: 1, right: 0 }]);
    }

    #[test]
    fn allocation_is_observable() {
        let inst = Instantiation::default();
        let rep = check("bind r <- new[Int] 5; ret ()", "ret ()", &inst);
        let EqReport::NotEqual { mismatches, .. } = rep else {
            panic!("{rep:?}")
        };
        assert!(matches!(mismatches[0], Mismatch::WorldDomain { .. }));
    }

    #[test]
    fn functions_compared_by_probing() {
        let inst = Instantiation::default();
        let same = check(
            "ret (fun x : Int. x + x)",
            "ret (fun y : Int. 2 * y)",
            &inst,
        );
        assert!(same.is_equal(), "{same:?}");
        let diff = check("ret (fun x : Int. x)", "ret (fun y : Int. 0)", &inst);
        assert!(diff.is_not_equal(), "{diff:?}");
        let opaque = check(
            "ret (fun f : Int -> Int. f)",
            "ret (fun g : Int -> Int. g)",
            &inst,
        );
        assert!(matches!(opaque, EqReport::Inconclusive(_)), "{opaque:?}");
    }

    #[test]
    fn computations_compared_by_running() {
        let inst = cell(0);
        let rep = check("ret (get[Int] l)", "ret (step; get[Int] l)", &inst);
        assert!(rep.is_not_equal(), "{rep:?}");
        let rep = check("ret (set[Int] l 1)", "ret (set[Int] l 1)", &inst);
        assert!(rep.is_equal(), "{rep:?}");
    }
}
