//! Randomized checks of the store equations, step commutation and the monad
//! laws for computations.
//!
//! Every law is checked by [`check_equation`] on freshly drawn stores and
//! programs, so agreement is exact: same final world, heap, value and step
//! count. Each law also has a perturbed twin that must be refuted, which
//! guards against a checker that accepts everything.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::lang::{parse, BinOp, Tm, TmKind, Ty};
use crate::semantics::{check_equation, EqReport, Heap, Instantiation, SemVal, World};

/// Fuel for each side of every comparison.
pub const BUDGET: u64 = 10_000;

/// Stored values and ground arguments are drawn from this range.
pub const VALUES: std::ops::RangeInclusive<i64> = -100..=100;

/// Largest pre-populated heap.
pub const MAX_HEAP: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Expect {
    /// Every instance must compare equal.
    Holds,
    /// At least one instance must compare unequal.
    Fails,
}

#[derive(Clone, Debug, Serialize)]
pub struct LawResult {
    pub name: String,
    pub expect: Expect,
    pub equal: usize,
    pub not_equal: usize,
    pub inconclusive: usize,
    /// First instance that went against expectation, or the first refuting
    /// instance of a law expected to fail.
    pub witness: Option<String>,
}

impl LawResult {
    pub fn ok(&self) -> bool {
        match self.expect {
            Expect::Holds => self.not_equal == 0 && self.inconclusive == 0,
            Expect::Fails => self.not_equal > 0,
        }
    }

    pub fn total(&self) -> usize {
        self.equal + self.not_equal + self.inconclusive
    }
}

impl fmt::Display for LawResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = if self.ok() { "PASS" } else { "FAIL" };
        let tally = match self.expect {
            Expect::Holds => format!("{}/{} equal", self.equal, self.total()),
            Expect::Fails => format!("{}/{} refuted", self.not_equal, self.total()),
        };
        write!(f, "{mark} {} ({tally})", self.name)?;
        if let (false, Some(w)) = (self.ok(), &self.witness) {
            write!(f, ": {w}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LawsReport {
    pub seed: u64,
    pub iterations: usize,
    pub laws: Vec<LawResult>,
}

impl LawsReport {
    pub fn all_ok(&self) -> bool {
        self.laws.iter().all(LawResult::ok)
    }

    pub fn passed(&self) -> usize {
        self.laws.iter().filter(|l| l.ok()).count()
    }

    pub fn to_json(&self) -> Value {
        let laws: Vec<Value> = self
            .laws
            .iter()
            .map(|l| {
                let mut v = serde_json::to_value(l).expect("plain data");
                v["ok"] = json!(l.ok());
                v
            })
            .collect();
        json!({
            "seed": self.seed,
            "iterations": self.iterations,
            "passed": self.passed(),
            "failed": self.laws.len() - self.passed(),
            "ok": self.all_ok(),
            "laws": laws,
        })
    }
}

impl fmt::Display for LawsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.laws {
            writeln!(f, "{l}")?;
        }
        write!(
            f,
            "{} passed, {} failed (seed {}, {} iterations)",
            self.passed(),
            self.laws.len() - self.passed(),
            self.seed,
            self.iterations
        )
    }
}

/// The whole suite.
pub fn run_laws(seed: u64, iterations: usize) -> LawsReport {
    let mut laws = state_equations(seed, iterations);
    laws.extend(step_commutation(seed, iterations));
    laws.extend(monad_laws(seed, iterations));
    laws.push(allocation_is_observable());
    LawsReport {
        seed,
        iterations,
        laws,
    }
}

fn rng_for(seed: u64, law: &str) -> ChaCha8Rng {
    // FNV-1a of the law name keeps streams independent across laws.
    let h = law.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x100_0000_01b3)
    });
    ChaCha8Rng::seed_from_u64(seed ^ h)
}

struct Tally {
    result: LawResult,
}

impl Tally {
    fn new(name: &str, expect: Expect) -> Self {
        Tally {
            result: LawResult {
                name: name.to_string(),
                expect,
                equal: 0,
                not_equal: 0,
                inconclusive: 0,
                witness: None,
            },
        }
    }

    fn record(&mut self, report: &EqReport, describe: impl FnOnce() -> String) {
        let r = &mut self.result;
        let notable = match report {
            EqReport::Equal(_) => {
                r.equal += 1;
                false
            }
            EqReport::NotEqual { .. } => {
                r.not_equal += 1;
                true
            }
            EqReport::Inconclusive(_) => {
                r.inconclusive += 1;
                r.expect == Expect::Holds
            }
        };
        if notable && r.witness.is_none() {
            r.witness = Some(format!("{} => {}", describe(), summarize(report)));
        }
    }
}

fn summarize(report: &EqReport) -> String {
    match report {
        EqReport::Equal(o) => format!("equal: {o}"),
        EqReport::NotEqual { mismatches, .. } => mismatches
            .iter()
            .map(|m| m.to_string())
            .collect::<Vec<_>>()
            .join("; "),
        EqReport::Inconclusive(why) => format!("inconclusive: {why}"),
    }
}

fn describe_inst(inst: &Instantiation) -> String {
    let heap: Vec<String> = inst.heap.iter().map(|(i, v)| format!("{i}={v}")).collect();
    let vars: Vec<String> = inst
        .bindings
        .iter()
        .map(|(x, _, v)| format!("{x}={v}"))
        .collect();
    format!("heap {{{}}} with {}", heap.join(", "), vars.join(", "))
}

fn ground(rng: &mut ChaCha8Rng) -> (Ty, SemVal) {
    let n = |rng: &mut ChaCha8Rng| SemVal::Int(rng.gen_range(VALUES));
    match rng.gen_range(0..4) {
        0 => (Ty::Unit, SemVal::Unit),
        1 => {
            let (a, b) = (n(rng), n(rng));
            (Ty::prod(Ty::Int, Ty::Int), SemVal::pair(a, b))
        }
        _ => (Ty::Int, n(rng)),
    }
}

/// A heap of 1 to [`MAX_HEAP`] ground cells, at least one holding an Int,
/// with `l` bound to a random Int cell and `u`, `v` to random Ints.
fn store_instance(rng: &mut ChaCha8Rng) -> Instantiation {
    let size = rng.gen_range(1..=MAX_HEAP);
    let mut cells: Vec<(Ty, SemVal)> = (0..size).map(|_| ground(rng)).collect();
    if !cells.iter().any(|(t, _)| *t == Ty::Int) {
        let i = rng.gen_range(0..size);
        cells[i] = (Ty::Int, SemVal::Int(rng.gen_range(VALUES)));
    }
    let ints: Vec<usize> = (0..size).filter(|i| cells[*i].0 == Ty::Int).collect();
    let l = *ints.choose(rng).expect("at least one Int cell");
    let world = World::from_entries(cells.iter().enumerate().map(|(i, (t, _))| (i, t.clone())));
    let heap = Heap::from_entries(cells.into_iter().enumerate().map(|(i, (_, v))| (i, v)));
    Instantiation::new(world, heap)
        .bind("l", Ty::reference(Ty::Int), SemVal::Loc(l, Ty::Int))
        .bind("u", Ty::Int, SemVal::Int(rng.gen_range(VALUES)))
        .bind("v", Ty::Int, SemVal::Int(rng.gen_range(VALUES)))
}

/// The four store equations, each followed by a perturbed variant.
pub const STATE_EQUATIONS: [(&str, &str, &str, Expect); 8] = [
    (
        "set-get",
        "set[Int] l u; get[Int] l",
        "step; set[Int] l u; ret u",
        Expect::Holds,
    ),
    (
        "set-get without step",
        "set[Int] l u; get[Int] l",
        "set[Int] l u; ret u",
        Expect::Fails,
    ),
    (
        "get-set",
        "bind x <- get[Int] l; set[Int] l x",
        "step",
        Expect::Holds,
    ),
    (
        "get-set without step",
        "bind x <- get[Int] l; set[Int] l x",
        "ret ()",
        Expect::Fails,
    ),
    (
        "new-set",
        "bind x <- new[Int] u; set[Int] x v; ret x",
        "new[Int] v",
        Expect::Holds,
    ),
    (
        "new-set keeping first value",
        "bind x <- new[Int] u; set[Int] x v; ret x",
        "new[Int] u",
        Expect::Fails,
    ),
    (
        "set-set",
        "set[Int] l u; set[Int] l v",
        "set[Int] l v",
        Expect::Holds,
    ),
    (
        "set-set keeping first write",
        "set[Int] l u; set[Int] l v",
        "set[Int] l u",
        Expect::Fails,
    ),
];

pub fn state_equations(seed: u64, iterations: usize) -> Vec<LawResult> {
    STATE_EQUATIONS
        .iter()
        .map(|(law, lhs, rhs, expect)| {
            let (l, r) = (
                parse(lhs).expect("law source"),
                parse(rhs).expect("law source"),
            );
            let mut rng = rng_for(seed, law);
            let mut tally = Tally::new(&format!("{law}: {lhs} = {rhs}"), *expect);
            for _ in 0..iterations {
                let inst = store_instance(&mut rng);
                let report = check_equation(&l, &r, &inst, BUDGET).expect("law is well typed");
                tally.record(&report, || describe_inst(&inst));
            }
            tally.result
        })
        .collect()
}

/// Random closed-over-locations programs of type `T Int`.
pub struct ProgramGen {
    rng: ChaCha8Rng,
    fresh: usize,
}

/// A generated program together with the store it expects.
pub struct Sample {
    pub inst: Instantiation,
    pub locs: Vec<String>,
}

impl ProgramGen {
    pub fn new(rng: ChaCha8Rng) -> Self {
        ProgramGen { rng, fresh: 0 }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    fn var(&mut self, base: &str) -> String {
        self.fresh += 1;
        format!("{base}{}", self.fresh)
    }

    /// A store of 1 to [`MAX_HEAP`] Int cells bound to `l0`, `l1`, ...
    pub fn store(&mut self) -> Sample {
        let size = self.rng.gen_range(1..=MAX_HEAP);
        let world = World::from_entries((0..size).map(|i| (i, Ty::Int)));
        let heap =
            Heap::from_entries((0..size).map(|i| (i, SemVal::Int(self.rng.gen_range(VALUES)))));
        let mut inst = Instantiation::new(world, heap);
        let mut locs = Vec::new();
        for i in 0..size {
            let l = format!("l{i}");
            inst = inst.bind(&l, Ty::reference(Ty::Int), SemVal::Loc(i, Ty::Int));
            locs.push(l);
        }
        Sample { inst, locs }
    }

    pub fn int_expr(&mut self, ints: &[String], depth: u32) -> Tm {
        let leaf = depth == 0 || self.rng.gen_bool(0.4);
        if leaf {
            return match ints.choose(&mut self.rng) {
                Some(x) if self.rng.gen_bool(0.6) => Tm::var(x),
                _ => Tm::int(self.rng.gen_range(VALUES)),
            };
        }
        match self.rng.gen_range(0..4) {
            0 => Tm::new(TmKind::Neg(self.int_expr(ints, depth - 1).into())),
            k => {
                let op = [BinOp::Add, BinOp::Sub, BinOp::Mul][k - 1];
                let a = self.int_expr(ints, depth - 1);
                Tm::bin(op, a, self.int_expr(ints, depth - 1))
            }
        }
    }

    /// A computation of type `T Int` reading and writing `locs`, with the
    /// Int variables `ints` in scope.
    pub fn comp(&mut self, ints: &[String], locs: &[String], depth: u32) -> Tm {
        let int_ty = Ty::Int;
        if depth == 0 {
            return match locs.choose(&mut self.rng) {
                Some(l) if self.rng.gen_bool(0.5) => Tm::get(int_ty, Tm::var(l)),
                _ => Tm::ret(self.int_expr(ints, 1)),
            };
        }
        match self.rng.gen_range(0..8) {
            0 => Tm::ret(self.int_expr(ints, 2)),
            1 if !locs.is_empty() => Tm::get(int_ty, Tm::var(locs.choose(&mut self.rng).unwrap())),
            2 => Tm::seq(Tm::step(), self.comp(ints, locs, depth - 1)),
            3 if !locs.is_empty() => {
                let l = Tm::var(locs.choose(&mut self.rng).unwrap());
                let e = self.int_expr(ints, 2);
                Tm::seq(Tm::set(int_ty, l, e), self.comp(ints, locs, depth - 1))
            }
            4 => {
                let r = self.var("r");
                let init = self.int_expr(ints, 1);
                let mut locs2 = locs.to_vec();
                locs2.push(r.clone());
                Tm::bind(
                    &r,
                    Tm::new_ref(int_ty, init),
                    self.comp(ints, &locs2, depth - 1),
                )
            }
            5 => {
                let c = self.int_expr(ints, 1);
                let a = self.comp(ints, locs, depth - 1);
                let b = self.comp(ints, locs, depth - 1);
                Tm::new(TmKind::Ifz(c.into(), a.into(), b.into()))
            }
            _ => {
                let x = self.var("x");
                let first = self.comp(ints, locs, depth - 1);
                let mut ints2 = ints.to_vec();
                ints2.push(x.clone());
                Tm::bind(&x, first, self.comp(&ints2, locs, depth - 1))
            }
        }
    }

    /// A continuation `fun y : Int. c` of type `Int -> T Int`.
    pub fn cont(&mut self, locs: &[String], depth: u32) -> Tm {
        let y = self.var("y");
        let body = self.comp(std::slice::from_ref(&y), locs, depth);
        Tm::lam(&y, Ty::Int, body)
    }
}

fn app(k: &Tm, x: &str) -> Tm {
    Tm::app(k.clone(), Tm::var(x))
}

/// Run one generated law `iterations` times. `build` returns both sides.
fn generated_law(
    seed: u64,
    iterations: usize,
    law: &str,
    expect: Expect,
    build: impl Fn(&mut ProgramGen, &[String]) -> (Tm, Tm),
) -> LawResult {
    let mut gen = ProgramGen::new(rng_for(seed, law));
    let mut tally = Tally::new(law, expect);
    for _ in 0..iterations {
        let sample = gen.store();
        let (lhs, rhs) = build(&mut gen, &sample.locs);
        let report = check_equation(&lhs, &rhs, &sample.inst, BUDGET)
            .expect("generated terms are well typed");
        tally.record(&report, || {
            format!("{lhs}  vs  {rhs} on {}", describe_inst(&sample.inst))
        });
    }
    tally.result
}

/// `step; (bind x <- m; k x)` against the two forms that move the step
/// inside, plus a control that drops it.
pub fn step_commutation(seed: u64, iterations: usize) -> Vec<LawResult> {
    let outer = |m: &Tm, k: &Tm| Tm::seq(Tm::step(), Tm::bind("res", m.clone(), app(k, "res")));
    let draw = |g: &mut ProgramGen, locs: &[String]| (g.comp(&[], locs, 3), g.cont(locs, 3));
    vec![
        generated_law(
            seed,
            iterations,
            "step commutes into the bound computation: step; (bind x <- m; k x) = bind x <- (step; m); k x",
            Expect::Holds,
            |g, locs| {
                let (m, k) = draw(g, locs);
                let inner = Tm::bind("res", Tm::seq(Tm::step(), m.clone()), app(&k, "res"));
                (outer(&m, &k), inner)
            },
        ),
        generated_law(
            seed,
            iterations,
            "step commutes into the continuation: step; (bind x <- m; k x) = bind x <- m; step; k x",
            Expect::Holds,
            |g, locs| {
                let (m, k) = draw(g, locs);
                let inner = Tm::bind("res", m.clone(), Tm::seq(Tm::step(), app(&k, "res")));
                (outer(&m, &k), inner)
            },
        ),
        generated_law(
            seed,
            iterations,
            "dropping the step: step; (bind x <- m; k x) = bind x <- m; k x",
            Expect::Fails,
            |g, locs| {
                let (m, k) = draw(g, locs);
                (outer(&m, &k), Tm::bind("res", m, app(&k, "res")))
            },
        ),
    ]
}

/// Left unit, right unit and associativity on generated programs.
pub fn monad_laws(seed: u64, iterations: usize) -> Vec<LawResult> {
    vec![
        generated_law(
            seed,
            iterations,
            "left unit: bind x <- ret u; k x = k u",
            Expect::Holds,
            |g, locs| {
                let u = g.int_expr(&[], 2);
                let k = g.cont(locs, 3);
                let lhs = Tm::bind("res", Tm::ret(u.clone()), app(&k, "res"));
                (lhs, Tm::app(k, u))
            },
        ),
        generated_law(
            seed,
            iterations,
            "right unit: bind x <- m; ret x = m",
            Expect::Holds,
            |g, locs| {
                let m = g.comp(&[], locs, 3);
                (Tm::bind("res", m.clone(), Tm::ret(Tm::var("res"))), m)
            },
        ),
        generated_law(
            seed,
            iterations,
            "associativity: bind y <- (bind x <- m; k x); j y = bind x <- m; bind y <- k x; j y",
            Expect::Holds,
            |g, locs| {
                let m = g.comp(&[], locs, 2);
                let (k, j) = (g.cont(locs, 2), g.cont(locs, 2));
                let lhs = Tm::bind(
                    "r2",
                    Tm::bind("r1", m.clone(), app(&k, "r1")),
                    app(&j, "r2"),
                );
                let rhs = Tm::bind("r1", m, Tm::bind("r2", app(&k, "r1"), app(&j, "r2")));
                (lhs, rhs)
            },
        ),
        generated_law(
            seed,
            iterations,
            "continuation applied twice: bind x <- m; k x = bind x <- m; bind y <- k x; k y",
            Expect::Fails,
            |g, locs| {
                let m = Tm::seq(Tm::step(), g.comp(&[], locs, 2));
                let k = Tm::lam("y0", Ty::Int, Tm::seq(Tm::step(), Tm::ret(Tm::var("y0"))));
                let lhs = Tm::bind("r1", m.clone(), app(&k, "r1"));
                let rhs = Tm::bind("r1", m, Tm::bind("r2", app(&k, "r1"), app(&k, "r2")));
                (lhs, rhs)
            },
        ),
    ]
}

/// Allocations are never collected: a dead `new` still changes the world.
pub fn allocation_is_observable() -> LawResult {
    let (lhs, rhs) = ("bind r <- new[Int] 5; ret ()", "ret ()");
    let report = check_equation(
        &parse(lhs).expect("law source"),
        &parse(rhs).expect("law source"),
        &Instantiation::default(),
        BUDGET,
    )
    .expect("law is well typed");
    let mut tally = Tally::new(&format!("dead allocation: {lhs} = {rhs}"), Expect::Fails);
    tally.record(&report, String::new);
    tally.result
}
