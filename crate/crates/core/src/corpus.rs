//! Built-in example programs.
//!
//! Sources are assembled from a shared prelude of `let` definitions, so every
//! entry is a single closed term that checks on its own.

use crate::lang::{parse, Tm};

/// One corpus entry.
#[derive(Clone, Debug)]
pub struct Example {
    pub name: String,
    pub about: String,
    /// Expected type, in surface syntax.
    pub ty: String,
    pub source: String,
}

impl Example {
    pub fn parse(&self) -> Tm {
        parse(&self.source).unwrap_or_else(|e| panic!("corpus entry {}: {e}", self.name))
    }

    pub fn file_name(&self) -> String {
        format!("{}.fmr", self.name)
    }
}

/// Tick counts with dedicated counter clients.
pub const TICKS: [u32; 5] = [0, 1, 2, 5, 10];

const KNOT: &str = "\
-- A function that never returns, used as the dummy contents of the knot.
let bottom : forall a. Unit -> T a =
  tfun a. fun u : Unit.
    (fun w : mu b. b -> T a. (unfold w) w)
      (fold[mu b. b -> T a] (fun w : mu b. b -> T a. (unfold w) w))
in
-- Allocate a cell for the recursive function and backpatch it with phi
-- applied to a function that reads the cell.
let patch : forall a. ((a -> T a) -> a -> T a) -> T (Ref (a -> T a)) =
  tfun a. fun phi : (a -> T a) -> a -> T a.
    bind r <- new[a -> T a] (fun x : a. bottom [a] ());
    set[a -> T a] r (phi (fun x : a. bind f <- get[a -> T a] r; f x));
    ret r
in
let knot : forall a. ((a -> T a) -> a -> T a) -> a -> T a =
  tfun a. fun phi : (a -> T a) -> a -> T a. fun x : a.
    bind r <- patch [a] phi;
    phi (fun z : a. bind f <- get[a -> T a] r; f z) x
in
";

const FACT: &str = "\
let fact_step : (Int -> T Int) -> Int -> T Int =
  fun f : Int -> T Int. fun n : Int.
    ifz n then ret 1 else bind m <- f (n - 1); ret (n * m)
in
let fact : Int -> T Int = knot [Int] fact_step in
";

const TWO_INCR: &str = "\
-- Two reads and two writes.
let incr_twice : Ref Int -> T Unit =
  fun r : Ref Int.
    bind x <- get[Int] r; set[Int] r (x + 1);
    bind y <- get[Int] r; set[Int] r (y + 1);
    ret ()
in
-- One read, one write.
let add_two : Ref Int -> T Unit =
  fun r : Ref Int. bind x <- get[Int] r; set[Int] r (x + 2); ret ()
in
";

const COUNTERS: &str = "\
let incr : Ref Int -> T Unit =
  fun r : Ref Int. bind x <- get[Int] r; set[Int] r (x + 1)
in
let decr : Ref Int -> T Unit =
  fun r : Ref Int. bind x <- get[Int] r; set[Int] r (x - 1)
in
-- Counts up.
let counter_up : T (T Unit * T Int) =
  bind r <- new[Int] 0; ret (incr r, get[Int] r)
in
-- Counts down and negates on read.
let counter_down : T (T Unit * T Int) =
  bind r <- new[Int] 0; ret (decr r, bind x <- get[Int] r; ret (-x))
in
let adt_up : exists a. T a * (a -> T Unit) * (a -> T Int) =
  pack[Ref Int, (new[Int] 0, incr, fun r : Ref Int. get[Int] r)]
    as exists a. T a * (a -> T Unit) * (a -> T Int)
in
let adt_down : exists a. T a * (a -> T Unit) * (a -> T Int) =
  pack[Ref Int, (new[Int] 0, decr, fun r : Ref Int. bind x <- get[Int] r; ret (-x))]
    as exists a. T a * (a -> T Unit) * (a -> T Int)
in
";

const COUNTER_TY: &str = "exists a. T a * (a -> T Unit) * (a -> T Int)";

fn entry(name: &str, about: &str, ty: &str, source: String) -> Example {
    Example {
        name: name.to_string(),
        about: about.to_string(),
        ty: ty.to_string(),
        source,
    }
}

fn module_client(counter: &str, k: u32) -> String {
    let ticks = "fst c; ".repeat(k as usize);
    format!("bind c <- {counter}; {ticks}snd c\n")
}

fn adt_client(counter: &str, k: u32) -> String {
    let ticks = "(fst (snd c)) s; ".repeat(k as usize);
    format!("unpack {counter} as [a, c] in\n  bind s <- fst c; {ticks}(snd (snd c)) s\n")
}

/// Every built-in example, in a fixed order.
pub fn corpus() -> Vec<Example> {
    let fact_prelude = format!("{KNOT}{FACT}");
    let mut out = vec![
        entry(
            "patch",
            "backpatch a reference cell with a functional",
            "forall a. ((a -> T a) -> a -> T a) -> T (Ref (a -> T a))",
            format!("{KNOT}patch\n"),
        ),
        entry(
            "knot",
            "recursion through the store",
            "forall a. ((a -> T a) -> a -> T a) -> a -> T a",
            format!("{KNOT}knot\n"),
        ),
        entry(
            "fact_step",
            "one layer of factorial",
            "(Int -> T Int) -> Int -> T Int",
            format!("{fact_prelude}fact_step\n"),
        ),
        entry(
            "fact",
            "factorial tied with the knot",
            "Int -> T Int",
            format!("{fact_prelude}fact\n"),
        ),
    ];
    for n in 0..=10 {
        out.push(entry(
            &format!("fact{n}"),
            &format!("factorial of {n}; takes {n} steps"),
            "T Int",
            format!("{fact_prelude}fact {n}\n"),
        ));
    }
    out.extend([
        entry(
            "two_incr_L",
            "increment a fresh cell twice by one, then read it",
            "T Int",
            format!("{TWO_INCR}bind r <- new[Int] 0; incr_twice r; get[Int] r\n"),
        ),
        entry(
            "two_incr_R",
            "increment a fresh cell once by two, then read it",
            "T Int",
            format!("{TWO_INCR}bind r <- new[Int] 0; add_two r; get[Int] r\n"),
        ),
        entry(
            "counter_L",
            "counter module over a local reference, counting up",
            "T (T Unit * T Int)",
            format!("{COUNTERS}counter_up\n"),
        ),
        entry(
            "counter_R",
            "counter module over a local reference, counting down",
            "T (T Unit * T Int)",
            format!("{COUNTERS}counter_down\n"),
        ),
        entry(
            "counter_client_L",
            "tick the up-counter twice, then read",
            "T Int",
            format!("{COUNTERS}{}", module_client("counter_up", 2)),
        ),
        entry(
            "counter_client_R",
            "tick the down-counter twice, then read",
            "T Int",
            format!("{COUNTERS}{}", module_client("counter_down", 2)),
        ),
        entry(
            "counter_adt_L",
            "counter package, counting up",
            COUNTER_TY,
            format!("{COUNTERS}adt_up\n"),
        ),
        entry(
            "counter_adt_R",
            "counter package, counting down",
            COUNTER_TY,
            format!("{COUNTERS}adt_down\n"),
        ),
        entry(
            "counter_adt_client_L",
            "open the up-counter package, tick twice, read",
            "T Int",
            format!("{COUNTERS}{}", adt_client("adt_up", 2)),
        ),
        entry(
            "counter_adt_client_R",
            "open the down-counter package, tick twice, read",
            "T Int",
            format!("{COUNTERS}{}", adt_client("adt_down", 2)),
        ),
    ]);
    for k in TICKS {
        for (side, m, a) in [
            ("L", "counter_up", "adt_up"),
            ("R", "counter_down", "adt_down"),
        ] {
            out.push(entry(
                &format!("counter_client_{side}_k{k}"),
                &format!("tick {k} times, then read"),
                "T Int",
                format!("{COUNTERS}{}", module_client(m, k)),
            ));
            out.push(entry(
                &format!("counter_adt_client_{side}_k{k}"),
                &format!("open the package, tick {k} times, then read"),
                "T Int",
                format!("{COUNTERS}{}", adt_client(a, k)),
            ));
        }
    }
    out.extend([
        entry(
            "diverge",
            "a knot whose functional never makes progress",
            "T Unit",
            format!("{KNOT}knot [Unit] (fun f : Unit -> T Unit. f) ()\n"),
        ),
        entry(
            "diverge_int",
            "the same divergence at an integer type",
            "T Int",
            format!("{KNOT}knot [Int] (fun f : Int -> T Int. f) 0\n"),
        ),
        entry(
            "diverge_mu",
            "self-application through a recursive type",
            "T Unit",
            "-- Each unfold takes a step, so this runs forever without blowing the stack.\n\
             (fun w : mu b. b -> T Unit. (unfold w) w)\n  \
             (fold[mu b. b -> T Unit] (fun w : mu b. b -> T Unit. (unfold w) w))\n"
                .to_string(),
        ),
    ]);
    out
}

pub fn lookup(name: &str) -> Option<Example> {
    corpus().into_iter().find(|e| e.name == name)
}
