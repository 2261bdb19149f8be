//! Depth-bounded weak bisimulation on step-counted observations.
//!
//! Delay values are linear, so a bisimulation proof between two of them is
//! a run of lockstep ticks followed by one closing move: both sides stop
//! together, or one side waits `n` extra ticks for the other.

use std::fmt;

use serde_json::{json, Value};

use crate::kernel::{Delay, Payload};
use crate::lang::{Tm, Ty};
use crate::semantics::{exec, Env, EvalError, Heap, RunError, World};
use crate::typer::typecheck_closed;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Atom<A> {
    StepBoth,
    WaitL(u64),
    WaitR(u64),
    Stop(A),
}

impl<A: fmt::Display> fmt::Display for Atom<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::StepBoth => f.write_str("step"),
            Atom::WaitL(n) => write!(f, "waitL {n}"),
            Atom::WaitR(n) => write!(f, "waitR {n}"),
            Atom::Stop(v) => write!(f, "stop {v}"),
        }
    }
}

pub type BisimTrace<A> = Vec<Atom<A>>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict<A> {
    Strong {
        steps: u64,
        value: A,
    },
    Weak {
        left_steps: u64,
        right_steps: u64,
        value: A,
    },
    Distinct {
        left: A,
        right: A,
        left_steps: u64,
        right_steps: u64,
    },
    Unknown {
        depth: u64,
    },
}

impl<A> Verdict<A> {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Strong { .. } => "strong",
            Verdict::Weak { .. } => "weak",
            Verdict::Distinct { .. } => "distinct",
            Verdict::Unknown { .. } => "unknown",
        }
    }

    /// Strong and weak verdicts both witness weak bisimilarity.
    pub fn is_bisimilar(&self) -> bool {
        matches!(self, Verdict::Strong { .. } | Verdict::Weak { .. })
    }

    pub fn swap(self) -> Verdict<A> {
        match self {
            Verdict::Weak {
                left_steps,
                right_steps,
                value,
            } => Verdict::Weak {
                left_steps: right_steps,
                right_steps: left_steps,
                value,
            },
            Verdict::Distinct {
                left,
                right,
                left_steps,
                right_steps,
            } => Verdict::Distinct {
                left: right,
                right: left,
                left_steps: right_steps,
                right_steps: left_steps,
            },
            v => v,
        }
    }
}

pub fn swap_trace<A>(t: BisimTrace<A>) -> BisimTrace<A> {
    t.into_iter()
        .map(|a| match a {
            Atom::WaitL(n) => Atom::WaitR(n),
            Atom::WaitR(n) => Atom::WaitL(n),
            a => a,
        })
        .collect()
}

/// Count the ticks `d` needs to converge, giving up after `budget`.
fn settle<A: Payload>(mut d: Delay<A>, budget: u64) -> Option<(u64, A)> {
    let mut n = 0;
    loop {
        match d {
            Delay::Now(a) => return Some((n, a)),
            Delay::Later(rest) if n < budget => {
                d = rest.force();
                n += 1;
            }
            Delay::Later(_) => return None,
        }
    }
}

/// Compare two observations, forcing each at most `depth` times.
pub fn weakly_bisimilar<A: Payload + PartialEq>(
    left: Delay<A>,
    right: Delay<A>,
    depth: u64,
) -> (Verdict<A>, Option<BisimTrace<A>>) {
    let (mut l, mut r) = (left, right);
    let mut trace = Vec::new();
    let mut k = 0;
    loop {
        match (l, r) {
            (Delay::Now(a), Delay::Now(b)) => {
                return if a == b {
                    trace.push(Atom::Stop(a.clone()));
                    (Verdict::Strong { steps: k, value: a }, Some(trace))
                } else {
                    (
                        Verdict::Distinct {
                            left: a,
                            right: b,
                            left_steps: k,
                            right_steps: k,
                        },
                        None,
                    )
                };
            }
            (Delay::Later(dl), Delay::Later(dr)) => {
                if k == depth {
                    return (Verdict::Unknown { depth }, None);
                }
                trace.push(Atom::StepBoth);
                k += 1;
                l = dl.force();
                r = dr.force();
            }
            (slow @ Delay::Later(_), Delay::Now(b)) => {
                let Some((n, a)) = settle(slow, depth - k) else {
                    return (Verdict::Unknown { depth }, None);
                };
                return if a == b {
                    trace.push(Atom::WaitL(n));
                    (
                        Verdict::Weak {
                            left_steps: k + n,
                            right_steps: k,
                            value: a,
                        },
                        Some(trace),
                    )
                } else {
                    (
                        Verdict::Distinct {
                            left: a,
                            right: b,
                            left_steps: k + n,
                            right_steps: k,
                        },
                        None,
                    )
                };
            }
            (Delay::Now(a), slow @ Delay::Later(_)) => {
                let Some((n, b)) = settle(slow, depth - k) else {
                    return (Verdict::Unknown { depth }, None);
                };
                return if a == b {
                    trace.push(Atom::WaitR(n));
                    (
                        Verdict::Weak {
                            left_steps: k,
                            right_steps: k + n,
                            value: a,
                        },
                        Some(trace),
                    )
                } else {
                    (
                        Verdict::Distinct {
                            left: a,
                            right: b,
                            left_steps: k,
                            right_steps: k + n,
                        },
                        None,
                    )
                };
            }
        }
    }
}

/// Run a closed `T Int` program from `(w, h)` and keep only the integer.
pub fn run_to_obs(e: &Tm, w: &World, h: &Heap) -> Delay<Result<i64, EvalError>> {
    exec(&Env::empty(), e, w, h).map(|r| {
        r.and_then(|st| {
            st.value.as_int().ok_or_else(|| EvalError::Stuck {
                expected: "integer",
                found: st.value.tag().to_string(),
            })
        })
    })
}

pub type ProgramVerdict = (Verdict<i64>, Option<BisimTrace<i64>>);

/// Typecheck both programs at `T Int`, then compare their observations from
/// the empty world.
pub fn bisim_programs(left: &Tm, right: &Tm, depth: u64) -> Result<ProgramVerdict, RunError> {
    for e in [left, right] {
        let ty = typecheck_closed(e)?;
        if ty != Ty::comp(Ty::Int) {
            return Err(RunError::NotComputation(ty));
        }
    }
    let (w, h) = (World::empty(), Heap::empty());
    let (v, t) = weakly_bisimilar(run_to_obs(left, &w, &h), run_to_obs(right, &w, &h), depth);
    let v = match v {
        Verdict::Strong { steps, value } => Verdict::Strong {
            steps,
            value: value?,
        },
        Verdict::Weak {
            left_steps,
            right_steps,
            value,
        } => Verdict::Weak {
            left_steps,
            right_steps,
            value: value?,
        },
        Verdict::Distinct {
            left,
            right,
            left_steps,
            right_steps,
        } => Verdict::Distinct {
            left: left?,
            right: right?,
            left_steps,
            right_steps,
        },
        Verdict::Unknown { depth } => Verdict::Unknown { depth },
    };
    let t = t.map(|t| {
        t.into_iter()
            .map(|a| match a {
                Atom::StepBoth => Atom::StepBoth,
                Atom::WaitL(n) => Atom::WaitL(n),
                Atom::WaitR(n) => Atom::WaitR(n),
                Atom::Stop(v) => Atom::Stop(v.expect("checked above")),
            })
            .collect()
    });
    Ok((v, t))
}

pub fn verdict_json(v: &Verdict<i64>, trace: Option<&BisimTrace<i64>>) -> Value {
    let trace: Option<Vec<String>> = trace.map(|t| {
        t.iter()
            .filter(|a| !matches!(a, Atom::Stop(_)))
            .map(|a| a.to_string())
            .collect()
    });
    match v {
        Verdict::Strong { steps, value } => json!({
            "verdict": "strong", "left_steps": steps, "right_steps": steps,
            "value": value, "trace": trace,
        }),
        Verdict::Weak {
            left_steps,
            right_steps,
            value,
        } => json!({
            "verdict": "weak", "left_steps": left_steps, "right_steps": right_steps,
            "value": value, "trace": trace,
        }),
        Verdict::Distinct {
            left,
            right,
            left_steps,
            right_steps,
        } => json!({
            "verdict": "distinct", "left_steps": left_steps, "right_steps": right_steps,
            "value": null, "left_value": left, "right_value": right, "trace": trace,
        }),
        Verdict::Unknown { depth } => json!({
            "verdict": "unknown", "left_steps": depth, "right_steps": depth,
            "value": null, "depth": depth, "trace": trace,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{delta, delta_n, diverge, now};
    use crate::lang::parse;

    #[test]
    fn both_immediate() {
        let (v, t) = weakly_bisimilar(now(2), now(2), 5);
        assert_eq!(v, Verdict::Strong { steps: 0, value: 2 });
        assert_eq!(t, Some(vec![Atom::Stop(2)]));
    }

    #[test]
    fn left_waits() {
        let (v, t) = weakly_bisimilar(delta(now(2)), now(2), 5);
        assert_eq!(
            v,
            Verdict::Weak {
                left_steps: 1,
                right_steps: 0,
                value: 2
            }
        );
        assert_eq!(t, Some(vec![Atom::WaitL(1)]));
    }

    #[test]
    fn divergence_is_unknown() {
        let (v, t) = weakly_bisimilar(diverge(), now(2), 50);
        assert_eq!(v, Verdict::Unknown { depth: 50 });
        assert!(t.is_none());
        let (v, _) = weakly_bisimilar(diverge::<i64>(), diverge(), 50);
        assert_eq!(v, Verdict::Unknown { depth: 50 });
    }

    #[test]
    fn lockstep_then_wait() {
        let (v, t) = weakly_bisimilar(delta_n(2, now(1)), delta_n(5, now(1)), 10);
        assert_eq!(
            v,
            Verdict::Weak {
                left_steps: 2,
                right_steps: 5,
                value: 1
            }
        );
        assert_eq!(
            t,
            Some(vec![Atom::StepBoth, Atom::StepBoth, Atom::WaitR(3)])
        );
        let (v, _) = weakly_bisimilar(delta_n(2, now(1)), delta_n(5, now(1)), 4);
        assert_eq!(v, Verdict::Unknown { depth: 4 });
    }

    #[test]
    fn different_values() {
        let (v, _) = weakly_bisimilar(delta(now(1)), now(2), 5);
        assert!(matches!(
            v,
            Verdict::Distinct {
                left: 1,
                right: 2,
                ..
            }
        ));
    }

    #[test]
    fn programs() {
        let l = parse("step; ret 3").unwrap();
        let r = parse("ret 3").unwrap();
        let (v, t) = bisim_programs(&l, &r, 10).unwrap();
        assert_eq!(
            v,
            Verdict::Weak {
                left_steps: 1,
                right_steps: 0,
                value: 3
            }
        );
        let j = verdict_json(&v, t.as_ref());
        assert_eq!(j["trace"], json!(["waitL 1"]));
        assert!(bisim_programs(&parse("ret ()").unwrap(), &r, 10).is_err());
    }

    #[test]
    fn observation_keeps_step_structure() {
        let e = parse("step; ret 3").unwrap();
        let d = run_to_obs(&e, &World::empty(), &Heap::empty());
        assert_eq!(d.run(5).steps(), Some(1));
    }
}
