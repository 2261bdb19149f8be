//! Worlds, heaps, the state monad and the evaluator.

mod comp;
mod equation;
mod eval;
mod value;
mod world;

pub use comp::{
    comp_bind, comp_delta, comp_get, comp_map, comp_new, comp_ret, comp_set, comp_step, comp_theta,
    Comp, EvalError, Run, State,
};
pub use equation::{check_equation, EqReport, Instantiation, Mismatch, Observation};
pub use eval::{apply, comp_of, eval, exec, inst, run_program, Eval, RunError, RunReport, Status};
pub use value::{value_has_type, Closure, Env, SemVal, TClosure};
pub use world::{fresh, world_leq, Heap, Loc, World};
