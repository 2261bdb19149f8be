//! Generators shared by the integration tests.

#![allow(dead_code)]

use std::sync::Arc;

use fmuref::kernel::{delta_n, now, Delay};
use fmuref::lang::{BinOp, Tm, TmKind, Ty};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A finite delay: `steps` ticks, then `value`.
pub fn finite(steps: u64, value: i64) -> Delay<i64> {
    delta_n(steps, now(value))
}

/// A Kleisli arrow described by three numbers, so that proptest can shrink
/// and print it: `x` maps to `x * mul + add` after `(|x| + lag) % 4` ticks.
#[derive(Clone, Copy, Debug)]
pub struct Arrow {
    pub lag: u64,
    pub mul: i64,
    pub add: i64,
}

impl Arrow {
    pub fn apply(self, x: i64) -> Delay<i64> {
        finite(
            (x.unsigned_abs() + self.lag) % 4,
            x.wrapping_mul(self.mul).wrapping_add(self.add),
        )
    }

    pub fn boxed(self) -> impl Fn(i64) -> Delay<i64> + Send + Sync + Clone + 'static {
        move |x| self.apply(x)
    }
}

const VARS: [&str; 6] = ["x", "y", "z", "f", "g", "k"];
const TVARS: [&str; 3] = ["a", "b", "c"];

/// Random well-scoped types.
pub fn gen_ty(r: &mut ChaCha8Rng, tvars: &[String], depth: u32) -> Ty {
    if depth == 0 || r.gen_bool(0.3) {
        return match r.gen_range(0..3) {
            0 if !tvars.is_empty() => Ty::Var(tvars.choose(r).unwrap().as_str().into()),
            1 => Ty::Unit,
            _ => Ty::Int,
        };
    }
    let d = depth - 1;
    match r.gen_range(0..8) {
        0 => Ty::prod(gen_ty(r, tvars, d), gen_ty(r, tvars, d)),
        1 => Ty::arrow(gen_ty(r, tvars, d), gen_ty(r, tvars, d)),
        2..=4 => {
            let a = *TVARS.choose(r).unwrap();
            let mut inner = tvars.to_vec();
            inner.push(a.to_string());
            let body = gen_ty(r, &inner, d);
            match r.gen_range(0..3) {
                0 => Ty::forall(a, body),
                1 => Ty::exists(a, body),
                _ => Ty::mu(a, body),
            }
        }
        5 => Ty::reference(gen_ty(r, tvars, d)),
        _ => Ty::comp(gen_ty(r, tvars, d)),
    }
}

/// Random well-scoped (not necessarily well-typed) terms covering every
/// syntactic form.
pub fn gen_tm(r: &mut ChaCha8Rng, vars: &[String], tvars: &[String], depth: u32) -> Tm {
    if depth == 0 || r.gen_bool(0.2) {
        return match r.gen_range(0..4) {
            0 if !vars.is_empty() => Tm::var(vars.choose(r).unwrap()),
            1 => Tm::unit(),
            2 => Tm::step(),
            _ => Tm::int(r.gen_range(-50..=50)),
        };
    }
    let d = depth - 1;
    let sub = |r: &mut ChaCha8Rng| gen_tm(r, vars, tvars, d);
    let p = |t: Tm| Arc::new(t);
    let with_var = |r: &mut ChaCha8Rng| {
        let x = VARS.choose(r).unwrap().to_string();
        let mut v = vars.to_vec();
        v.push(x.clone());
        (x, v)
    };
    let with_tvar = |r: &mut ChaCha8Rng| {
        let a = TVARS.choose(r).unwrap().to_string();
        let mut v = tvars.to_vec();
        v.push(a.clone());
        (a, v)
    };
    let kind = match r.gen_range(0..20) {
        0 => {
            let op = *[BinOp::Add, BinOp::Sub, BinOp::Mul].choose(r).unwrap();
            TmKind::Bin(op, p(sub(r)), p(sub(r)))
        }
        1 => TmKind::Neg(p(sub(r))),
        2 => TmKind::Ifz(p(sub(r)), p(sub(r)), p(sub(r))),
        3 => {
            let (x, vs) = with_var(r);
            let ty = gen_ty(r, tvars, 2);
            TmKind::Lam(x.into(), ty, p(gen_tm(r, &vs, tvars, d)))
        }
        4 | 5 => TmKind::App(p(sub(r)), p(sub(r))),
        6 => TmKind::Pair(p(sub(r)), p(sub(r))),
        7 => TmKind::Fst(p(sub(r))),
        8 => TmKind::Snd(p(sub(r))),
        9 => {
            let (a, ts) = with_tvar(r);
            TmKind::TLam(a.into(), p(gen_tm(r, vars, &ts, d)))
        }
        10 => TmKind::TApp(p(sub(r)), gen_ty(r, tvars, 2)),
        11 => {
            let (a, ts) = with_tvar(r);
            TmKind::Pack {
                witness: gen_ty(r, tvars, 2),
                body: p(sub(r)),
                as_ty: Ty::Exists(a.into(), Box::new(gen_ty(r, &ts, 2))),
            }
        }
        12 => {
            let (a, ts) = with_tvar(r);
            let (x, vs) = with_var(r);
            TmKind::Unpack {
                package: p(sub(r)),
                ty_var: a.into(),
                var: x.into(),
                body: p(gen_tm(r, &vs, &ts, d)),
            }
        }
        13 => {
            let (a, ts) = with_tvar(r);
            TmKind::Fold(Ty::Mu(a.into(), Box::new(gen_ty(r, &ts, 2))), p(sub(r)))
        }
        14 => TmKind::Unfold(p(sub(r))),
        15 => TmKind::Ret(p(sub(r))),
        16 => {
            let first = sub(r);
            if r.gen_bool(0.3) {
                TmKind::Bind("_".into(), p(first), p(sub(r)))
            } else {
                let (x, vs) = with_var(r);
                TmKind::Bind(x.into(), p(first), p(gen_tm(r, &vs, tvars, d)))
            }
        }
        17 => TmKind::Get(gen_ty(r, tvars, 2), p(sub(r))),
        18 => TmKind::Set(gen_ty(r, tvars, 2), p(sub(r)), p(sub(r))),
        _ => TmKind::New(gen_ty(r, tvars, 2), p(sub(r))),
    };
    Tm::new(kind)
}
