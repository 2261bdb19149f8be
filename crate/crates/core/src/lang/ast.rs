use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

pub type Name = Arc<str>;

/// Byte offsets plus 1-based line/column of the start.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub line: u32,
    pub col: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Ty {
    Var(Name),
    Unit,
    Int,
    Prod(Box<Ty>, Box<Ty>),
    Arrow(Box<Ty>, Box<Ty>),
    Forall(Name, Box<Ty>),
    Exists(Name, Box<Ty>),
    Mu(Name, Box<Ty>),
    Ref(Box<Ty>),
    T(Box<Ty>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
        }
    }

    /// Wrapping 64-bit arithmetic keeps evaluation total.
    pub fn apply(self, a: i64, b: i64) -> i64 {
        match self {
            BinOp::Add => a.wrapping_add(b),
            BinOp::Sub => a.wrapping_sub(b),
            BinOp::Mul => a.wrapping_mul(b),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tm {
    pub kind: TmKind,
    pub span: Span,
}

pub type P<T> = Arc<T>;

#[derive(Clone, Debug, PartialEq)]
pub enum TmKind {
    Var(Name),
    Unit,
    Int(i64),
    Bin(BinOp, P<Tm>, P<Tm>),
    Neg(P<Tm>),
    /// `ifz c then a else b`: `a` when `c` is zero.
    Ifz(P<Tm>, P<Tm>, P<Tm>),
    Lam(Name, Ty, P<Tm>),
    App(P<Tm>, P<Tm>),
    Pair(P<Tm>, P<Tm>),
    Fst(P<Tm>),
    Snd(P<Tm>),
    TLam(Name, P<Tm>),
    TApp(P<Tm>, Ty),
    Pack {
        witness: Ty,
        body: P<Tm>,
        as_ty: Ty,
    },
    Unpack {
        package: P<Tm>,
        ty_var: Name,
        var: Name,
        body: P<Tm>,
    },
    Fold(Ty, P<Tm>),
    Unfold(P<Tm>),
    Ret(P<Tm>),
    Bind(Name, P<Tm>, P<Tm>),
    Get(Ty, P<Tm>),
    Set(Ty, P<Tm>, P<Tm>),
    New(Ty, P<Tm>),
    Step,
}

pub fn name(s: &str) -> Name {
    Arc::from(s)
}

/// Binder name that cannot be referenced.
pub const WILDCARD: &str = "_";

impl Tm {
    pub fn new(kind: TmKind) -> Tm {
        Tm {
            kind,
            span: Span::default(),
        }
    }

    pub fn spanned(kind: TmKind, span: Span) -> Tm {
        Tm { kind, span }
    }

    pub fn var(x: &str) -> Tm {
        Tm::new(TmKind::Var(name(x)))
    }

    pub fn int(n: i64) -> Tm {
        Tm::new(TmKind::Int(n))
    }

    pub fn unit() -> Tm {
        Tm::new(TmKind::Unit)
    }

    pub fn app(f: Tm, a: Tm) -> Tm {
        Tm::new(TmKind::App(Arc::new(f), Arc::new(a)))
    }

    pub fn lam(x: &str, ty: Ty, body: Tm) -> Tm {
        Tm::new(TmKind::Lam(name(x), ty, Arc::new(body)))
    }

    pub fn ret(e: Tm) -> Tm {
        Tm::new(TmKind::Ret(Arc::new(e)))
    }

    pub fn bind(x: &str, e1: Tm, e2: Tm) -> Tm {
        Tm::new(TmKind::Bind(name(x), Arc::new(e1), Arc::new(e2)))
    }

    pub fn seq(e1: Tm, e2: Tm) -> Tm {
        Tm::bind(WILDCARD, e1, e2)
    }

    pub fn get(ty: Ty, l: Tm) -> Tm {
        Tm::new(TmKind::Get(ty, Arc::new(l)))
    }

    pub fn set(ty: Ty, l: Tm, u: Tm) -> Tm {
        Tm::new(TmKind::Set(ty, Arc::new(l), Arc::new(u)))
    }

    pub fn new_ref(ty: Ty, u: Tm) -> Tm {
        Tm::new(TmKind::New(ty, Arc::new(u)))
    }

    pub fn step() -> Tm {
        Tm::new(TmKind::Step)
    }

    pub fn bin(op: BinOp, a: Tm, b: Tm) -> Tm {
        Tm::new(TmKind::Bin(op, Arc::new(a), Arc::new(b)))
    }

    /// Free term variables.
    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        free_tm_vars(self, &mut Vec::new(), &mut out);
        out
    }
}

fn free_tm_vars(t: &Tm, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    use TmKind::*;
    let under = |x: &Name, body: &Tm, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>| {
        bound.push(x.clone());
        free_tm_vars(body, bound, out);
        bound.pop();
    };
    match &t.kind {
        Var(x) => {
            if !bound.contains(x) {
                out.insert(x.clone());
            }
        }
        Unit | Int(_) | Step => {}
        Bin(_, a, b) | App(a, b) | Pair(a, b) | Set(_, a, b) => {
            free_tm_vars(a, bound, out);
            free_tm_vars(b, bound, out);
        }
        Ifz(c, a, b) => {
            free_tm_vars(c, bound, out);
            free_tm_vars(a, bound, out);
            free_tm_vars(b, bound, out);
        }
        Neg(a)
        | Fst(a)
        | Snd(a)
        | TLam(_, a)
        | TApp(a, _)
        | Fold(_, a)
        | Unfold(a)
        | Ret(a)
        | Get(_, a)
        | New(_, a) => free_tm_vars(a, bound, out),
        Pack { body, .. } => free_tm_vars(body, bound, out),
        Lam(x, _, body) => under(x, body, bound, out),
        Unpack {
            package, var, body, ..
        } => {
            free_tm_vars(package, bound, out);
            under(var, body, bound, out);
        }
        Bind(x, e1, e2) => {
            free_tm_vars(e1, bound, out);
            under(x, e2, bound, out);
        }
    }
}

impl Ty {
    pub fn var(a: &str) -> Ty {
        Ty::Var(name(a))
    }
    pub fn prod(a: Ty, b: Ty) -> Ty {
        Ty::Prod(Box::new(a), Box::new(b))
    }
    pub fn arrow(a: Ty, b: Ty) -> Ty {
        Ty::Arrow(Box::new(a), Box::new(b))
    }
    pub fn forall(a: &str, body: Ty) -> Ty {
        Ty::Forall(name(a), Box::new(body))
    }
    pub fn exists(a: &str, body: Ty) -> Ty {
        Ty::Exists(name(a), Box::new(body))
    }
    pub fn mu(a: &str, body: Ty) -> Ty {
        Ty::Mu(name(a), Box::new(body))
    }
    pub fn reference(a: Ty) -> Ty {
        Ty::Ref(Box::new(a))
    }
    pub fn comp(a: Ty) -> Ty {
        Ty::T(Box::new(a))
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match self {
            Ty::Var(a) => {
                if !bound.contains(a) {
                    out.insert(a.clone());
                }
            }
            Ty::Unit | Ty::Int => {}
            Ty::Prod(a, b) | Ty::Arrow(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Ty::Forall(a, body) | Ty::Exists(a, body) | Ty::Mu(a, body) => {
                bound.push(a.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
            Ty::Ref(a) | Ty::T(a) => a.collect_free(bound, out),
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Capture-avoiding substitution of `with` for free occurrences of `var`.
    pub fn subst(&self, var: &str, with: &Ty) -> Ty {
        let fv = with.free_vars();
        self.subst_inner(var, with, &fv)
    }

    fn subst_inner(&self, var: &str, with: &Ty, fv: &BTreeSet<Name>) -> Ty {
        match self {
            Ty::Var(a) if &**a == var => with.clone(),
            Ty::Var(_) | Ty::Unit | Ty::Int => self.clone(),
            Ty::Prod(a, b) => Ty::prod(a.subst_inner(var, with, fv), b.subst_inner(var, with, fv)),
            Ty::Arrow(a, b) => {
                Ty::arrow(a.subst_inner(var, with, fv), b.subst_inner(var, with, fv))
            }
            Ty::Ref(a) => Ty::reference(a.subst_inner(var, with, fv)),
            Ty::T(a) => Ty::comp(a.subst_inner(var, with, fv)),
            Ty::Forall(a, body) | Ty::Exists(a, body) | Ty::Mu(a, body) => {
                let rebuild = |a: Name, body: Ty| match self {
                    Ty::Forall(..) => Ty::Forall(a, Box::new(body)),
                    Ty::Exists(..) => Ty::Exists(a, Box::new(body)),
                    _ => Ty::Mu(a, Box::new(body)),
                };
                if &**a == var || !body.free_vars().contains(var) {
                    return self.clone();
                }
                if fv.contains(a) {
                    let mut avoid = fv.clone();
                    avoid.extend(body.free_vars());
                    avoid.insert(name(var));
                    let fresh = fresh_name(a, &avoid);
                    let renamed = body.subst(a, &Ty::Var(fresh.clone()));
                    rebuild(fresh, renamed.subst_inner(var, with, fv))
                } else {
                    rebuild(a.clone(), body.subst_inner(var, with, fv))
                }
            }
        }
    }

    /// `τ[μα.τ/α]` for `self = μα.τ`.
    pub fn unroll(&self) -> Option<Ty> {
        match self {
            Ty::Mu(a, body) => Some(body.subst(a, self)),
            _ => None,
        }
    }

    pub fn alpha_eq(&self, other: &Ty) -> bool {
        ty_alpha(self, other, &mut Vec::new())
    }
}

fn ty_alpha(a: &Ty, b: &Ty, env: &mut Vec<(Name, Name)>) -> bool {
    match (a, b) {
        (Ty::Var(x), Ty::Var(y)) => {
            for (l, r) in env.iter().rev() {
                if l == x || r == y {
                    return l == x && r == y;
                }
            }
            x == y
        }
        (Ty::Unit, Ty::Unit) | (Ty::Int, Ty::Int) => true,
        (Ty::Prod(a1, a2), Ty::Prod(b1, b2)) | (Ty::Arrow(a1, a2), Ty::Arrow(b1, b2)) => {
            ty_alpha(a1, b1, env) && ty_alpha(a2, b2, env)
        }
        (Ty::Ref(x), Ty::Ref(y)) | (Ty::T(x), Ty::T(y)) => ty_alpha(x, y, env),
        (Ty::Forall(x, s), Ty::Forall(y, t))
        | (Ty::Exists(x, s), Ty::Exists(y, t))
        | (Ty::Mu(x, s), Ty::Mu(y, t)) => {
            env.push((x.clone(), y.clone()));
            let r = ty_alpha(s, t, env);
            env.pop();
            r
        }
        _ => false,
    }
}

/// First of `base`, `base1`, `base2`, ... not in `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<Name>) -> Name {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { "a" } else { stem };
    (1..)
        .map(|i| name(&format!("{stem}{i}")))
        .find(|n| !avoid.contains(n))
        .expect("unbounded supply")
}

/// Alpha-equivalence of terms: binders of both term and type variables are
/// compared up to renaming, type annotations up to alpha-equivalence.
pub fn tm_alpha_eq(a: &Tm, b: &Tm) -> bool {
    TmAlpha::default().eq(a, b)
}

#[derive(Default)]
struct TmAlpha {
    vars: Vec<(Name, Name)>,
    tvars: Vec<(Name, Name)>,
}

fn lookup_pair(env: &[(Name, Name)], x: &Name, y: &Name) -> bool {
    for (l, r) in env.iter().rev() {
        if l == x || r == y {
            return l == x && r == y;
        }
    }
    x == y
}

impl TmAlpha {
    fn ty(&mut self, a: &Ty, b: &Ty) -> bool {
        ty_alpha(a, b, &mut self.tvars)
    }

    fn under_var(&mut self, x: &Name, y: &Name, a: &Tm, b: &Tm) -> bool {
        self.vars.push((x.clone(), y.clone()));
        let r = self.eq(a, b);
        self.vars.pop();
        r
    }

    fn eq(&mut self, a: &Tm, b: &Tm) -> bool {
        use TmKind::*;
        match (&a.kind, &b.kind) {
            (Var(x), Var(y)) => lookup_pair(&self.vars, x, y),
            (Unit, Unit) | (Step, Step) => true,
            (Int(m), Int(n)) => m == n,
            (Bin(o1, a1, a2), Bin(o2, b1, b2)) => o1 == o2 && self.eq(a1, b1) && self.eq(a2, b2),
            (Neg(x), Neg(y))
            | (Fst(x), Fst(y))
            | (Snd(x), Snd(y))
            | (Unfold(x), Unfold(y))
            | (Ret(x), Ret(y)) => self.eq(x, y),
            (Ifz(c1, a1, b1), Ifz(c2, a2, b2)) => {
                self.eq(c1, c2) && self.eq(a1, a2) && self.eq(b1, b2)
            }
            (Lam(x, s, e1), Lam(y, t, e2)) => self.ty(s, t) && self.under_var(x, y, e1, e2),
            (App(a1, a2), App(b1, b2)) | (Pair(a1, a2), Pair(b1, b2)) => {
                self.eq(a1, b1) && self.eq(a2, b2)
            }
            (TLam(x, e1), TLam(y, e2)) => {
                self.tvars.push((x.clone(), y.clone()));
                let r = self.eq(e1, e2);
                self.tvars.pop();
                r
            }
            (TApp(e1, s), TApp(e2, t))
            | (Fold(s, e1), Fold(t, e2))
            | (Get(s, e1), Get(t, e2))
            | (New(s, e1), New(t, e2)) => self.ty(s, t) && self.eq(e1, e2),
            (
                Pack {
                    witness: w1,
                    body: e1,
                    as_ty: t1,
                },
                Pack {
                    witness: w2,
                    body: e2,
                    as_ty: t2,
                },
            ) => self.ty(w1, w2) && self.ty(t1, t2) && self.eq(e1, e2),
            (
                Unpack {
                    package: p1,
                    ty_var: a1,
                    var: x1,
                    body: e1,
                },
                Unpack {
                    package: p2,
                    ty_var: a2,
                    var: x2,
                    body: e2,
                },
            ) => {
                if !self.eq(p1, p2) {
                    return false;
                }
                self.tvars.push((a1.clone(), a2.clone()));
                let r = self.under_var(x1, x2, e1, e2);
                self.tvars.pop();
                r
            }
            (Bind(x, a1, a2), Bind(y, b1, b2)) => self.eq(a1, b1) && self.under_var(x, y, a2, b2),
            (Set(s, a1, a2), Set(t, b1, b2)) => self.ty(s, t) && self.eq(a1, b1) && self.eq(a2, b2),
            _ => false,
        }
    }
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::print::print_ty(self))
    }
}

impl fmt::Display for Tm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::print::print(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_equivalence_of_binders() {
        let a = Ty::forall("a", Ty::arrow(Ty::var("a"), Ty::var("a")));
        let b = Ty::forall("b", Ty::arrow(Ty::var("b"), Ty::var("b")));
        assert!(a.alpha_eq(&b));
        let c = Ty::forall("b", Ty::arrow(Ty::var("b"), Ty::var("a")));
        assert!(!a.alpha_eq(&c));
        // free variable that coincides with a binder on the other side
        let d = Ty::forall("a", Ty::var("b"));
        let e = Ty::forall("b", Ty::var("b"));
        assert!(!d.alpha_eq(&e));
    }

    #[test]
    fn substitution_avoids_capture() {
        // (forall b. a -> b)[b/a] = forall b1. b -> b1
        let t = Ty::forall("b", Ty::arrow(Ty::var("a"), Ty::var("b")));
        let s = t.subst("a", &Ty::var("b"));
        let expected = Ty::forall("c", Ty::arrow(Ty::var("b"), Ty::var("c")));
        assert!(s.alpha_eq(&expected), "{s}");
    }

    #[test]
    fn substitution_stops_at_shadowing() {
        let t = Ty::forall("a", Ty::var("a"));
        assert_eq!(t.subst("a", &Ty::Int), t);
    }

    #[test]
    fn unroll_mu() {
        let t = Ty::mu("a", Ty::arrow(Ty::var("a"), Ty::comp(Ty::Unit)));
        let u = t.unroll().unwrap();
        assert_eq!(u, Ty::arrow(t.clone(), Ty::comp(Ty::Unit)));
    }

    #[test]
    fn term_alpha() {
        let a = Tm::lam("x", Ty::Int, Tm::var("x"));
        let b = Tm::lam("y", Ty::Int, Tm::var("y"));
        assert!(tm_alpha_eq(&a, &b));
        let c = Tm::lam("y", Ty::Int, Tm::var("x"));
        assert!(!tm_alpha_eq(&a, &c));
    }

    #[test]
    fn free_vars_respect_bind() {
        let t = Tm::bind("x", Tm::var("l"), Tm::app(Tm::var("x"), Tm::var("u")));
        let fv: Vec<_> = t.free_vars().into_iter().map(|n| n.to_string()).collect();
        assert_eq!(fv, vec!["l", "u"]);
    }
}
