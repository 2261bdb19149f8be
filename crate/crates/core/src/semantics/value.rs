use std::fmt;
use std::sync::Arc;

use crate::lang::{Name, Tm, Ty};

use super::comp::Comp;
use super::world::{Loc, World};

/// Runtime values.
#[derive(Clone)]
pub enum SemVal {
    Unit,
    Int(i64),
    Pair(Arc<SemVal>, Arc<SemVal>),
    Fun(Arc<Closure>),
    TFun(Arc<TClosure>),
    /// Witness type and packaged value.
    Pack(Ty, Arc<SemVal>),
    Fold(Arc<SemVal>),
    /// Location together with the type the world assigns it.
    Loc(Loc, Ty),
    Comp(Comp<SemVal>),
}

pub struct Closure {
    pub param: Name,
    /// Closed parameter type.
    pub param_ty: Ty,
    pub body: Arc<Tm>,
    pub env: Env,
}

pub struct TClosure {
    pub binder: Name,
    pub body: Arc<Tm>,
    pub env: Env,
}

impl SemVal {
    pub fn pair(a: SemVal, b: SemVal) -> SemVal {
        SemVal::Pair(Arc::new(a), Arc::new(b))
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            SemVal::Int(n) => Some(*n),
            _ => None,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            SemVal::Unit => "unit",
            SemVal::Int(_) => "integer",
            SemVal::Pair(..) => "pair",
            SemVal::Fun(_) => "function",
            SemVal::TFun(_) => "type abstraction",
            SemVal::Pack(..) => "package",
            SemVal::Fold(_) => "folded value",
            SemVal::Loc(..) => "location",
            SemVal::Comp(_) => "computation",
        }
    }

    /// Structural equality on first-order values; `None` when either side
    /// holds code (functions, computations) that cannot be compared directly.
    pub fn first_order_eq(&self, other: &SemVal) -> Option<bool> {
        use SemVal::*;
        match (self, other) {
            (Unit, Unit) => Some(true),
            (Int(a), Int(b)) => Some(a == b),
            (Pair(a1, a2), Pair(b1, b2)) => {
                match (a1.first_order_eq(b1)?, a2.first_order_eq(b2)?) {
                    (true, true) => Some(true),
                    _ => Some(false),
                }
            }
            (Loc(i, s), Loc(j, t)) => Some(i == j && s.alpha_eq(t)),
            (Fold(a), Fold(b)) => a.first_order_eq(b),
            (Pack(s, a), Pack(t, b)) => {
                if !s.alpha_eq(t) {
                    Some(false)
                } else {
                    a.first_order_eq(b)
                }
            }
            (Fun(_) | TFun(_) | Comp(_), _) | (_, Fun(_) | TFun(_) | Comp(_)) => {
                if self.tag() == other.tag() {
                    None
                } else {
                    Some(false)
                }
            }
            _ => Some(false),
        }
    }
}

impl fmt::Display for SemVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemVal::Unit => f.write_str("()"),
            SemVal::Int(n) => write!(f, "{n}"),
            SemVal::Pair(a, b) => write!(f, "({a}, {b})"),
            SemVal::Fun(c) => write!(f, "<fun {} : {}>", c.param, c.param_ty),
            SemVal::TFun(c) => write!(f, "<tfun {}>", c.binder),
            SemVal::Pack(t, v) => write!(f, "pack[{t}, {v}]"),
            SemVal::Fold(v) => write!(f, "fold {v}"),
            SemVal::Loc(i, _) => write!(f, "loc {i}"),
            SemVal::Comp(_) => f.write_str("<comp>"),
        }
    }
}

impl fmt::Debug for SemVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Structural check that `v` inhabits the closed type `ty` in world `w`.
/// Functions, type abstractions and computations are checked by tag only.
pub fn value_has_type(v: &SemVal, ty: &Ty, w: &World) -> bool {
    match (v, ty) {
        (SemVal::Unit, Ty::Unit) | (SemVal::Int(_), Ty::Int) => true,
        (SemVal::Pair(a, b), Ty::Prod(s, t)) => value_has_type(a, s, w) && value_has_type(b, t, w),
        (SemVal::Fun(_), Ty::Arrow(..))
        | (SemVal::TFun(_), Ty::Forall(..))
        | (SemVal::Comp(_), Ty::T(_)) => true,
        (SemVal::Fold(inner), Ty::Mu(..)) => {
            value_has_type(inner, &ty.unroll().expect("mu type unrolls"), w)
        }
        (SemVal::Pack(witness, inner), Ty::Exists(a, body)) => {
            value_has_type(inner, &body.subst(a, witness), w)
        }
        (SemVal::Loc(i, tag), Ty::Ref(stored)) => {
            tag.alpha_eq(stored) && w.get(*i).is_some_and(|t| t.alpha_eq(tag))
        }
        _ => false,
    }
}

/// Persistent association list.
struct Node<V> {
    name: Name,
    value: V,
    next: Option<Arc<Node<V>>>,
}

fn lookup<'a, V>(mut cur: &'a Option<Arc<Node<V>>>, x: &str) -> Option<&'a V> {
    while let Some(node) = cur {
        if &*node.name == x {
            return Some(&node.value);
        }
        cur = &node.next;
    }
    None
}

/// Term and type bindings in scope during evaluation. Type bindings are
/// always closed types.
#[derive(Clone, Default)]
pub struct Env {
    vars: Option<Arc<Node<SemVal>>>,
    tys: Option<Arc<Node<Ty>>>,
}

impl Env {
    pub fn empty() -> Self {
        Env::default()
    }

    pub fn bind(&self, x: Name, v: SemVal) -> Env {
        Env {
            vars: Some(Arc::new(Node {
                name: x,
                value: v,
                next: self.vars.clone(),
            })),
            tys: self.tys.clone(),
        }
    }

    pub fn bind_ty(&self, a: Name, ty: Ty) -> Env {
        Env {
            vars: self.vars.clone(),
            tys: Some(Arc::new(Node {
                name: a,
                value: ty,
                next: self.tys.clone(),
            })),
        }
    }

    pub fn lookup(&self, x: &str) -> Option<&SemVal> {
        lookup(&self.vars, x)
    }

    pub fn lookup_ty(&self, a: &str) -> Option<&Ty> {
        lookup(&self.tys, a)
    }

    /// Substitute the bound type variables of this environment into `ty`.
    pub fn close_ty(&self, ty: &Ty) -> Ty {
        let mut out = ty.clone();
        for a in ty.free_vars() {
            if let Some(t) = self.lookup_ty(&a) {
                out = out.subst(&a, t);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::name;

    #[test]
    fn value_type_tags() {
        let w0 = World::empty();
        assert!(value_has_type(&SemVal::Int(3), &Ty::Int, &w0));
        let w = World::from_entries([(0, Ty::Int)]);
        let l = SemVal::Loc(0, Ty::Int);
        assert!(value_has_type(&l, &Ty::reference(Ty::Int), &w));
        let bad = World::from_entries([(0, Ty::Unit)]);
        assert!(!value_has_type(&l, &Ty::reference(Ty::Int), &bad));
        assert!(!value_has_type(&SemVal::Unit, &Ty::Int, &w0));
        let p = SemVal::Pack(Ty::Int, Arc::new(SemVal::Int(1)));
        assert!(value_has_type(&p, &Ty::exists("a", Ty::var("a")), &w0));
    }

    #[test]
    fn env_shadowing_and_closing() {
        let env = Env::empty()
            .bind(name("x"), SemVal::Int(1))
            .bind(name("x"), SemVal::Int(2))
            .bind_ty(name("a"), Ty::Int);
        assert_eq!(env.lookup("x").and_then(SemVal::as_int), Some(2));
        let closed = env.close_ty(&Ty::arrow(Ty::var("a"), Ty::forall("a", Ty::var("a"))));
        assert_eq!(closed, Ty::arrow(Ty::Int, Ty::forall("a", Ty::var("a"))));
    }
}
