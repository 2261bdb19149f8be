//! Kind checking and syntax-directed type checking.
//!
//! Type equality is alpha-equivalence; recursive types are iso-recursive, so
//! `fold`/`unfold` are the only way across a `mu`.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::lang::ast::{fresh_name, Name, Span, Tm, TmKind, Ty};

/// Type-variable context, in binding order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KCtx(Vec<Name>);

impl KCtx {
    pub fn new() -> Self {
        KCtx::default()
    }

    pub fn with(mut self, a: &str) -> Self {
        let n: Name = a.into();
        if !self.0.contains(&n) {
            self.0.push(n);
        }
        self
    }

    pub fn contains(&self, a: &str) -> bool {
        self.0.iter().any(|x| &**x == a)
    }
}

/// Term-variable context. Later entries shadow earlier ones.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TCtx(Vec<(Name, Ty)>);

impl TCtx {
    pub fn new() -> Self {
        TCtx::default()
    }

    pub fn with(mut self, x: &str, ty: Ty) -> Self {
        self.0.retain(|(y, _)| &**y != x);
        self.0.push((x.into(), ty));
        self
    }

    pub fn lookup(&self, x: &str) -> Option<&Ty> {
        self.0.iter().rev().find(|(y, _)| &**y == x).map(|(_, t)| t)
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq, Serialize)]
#[error("unbound type variable `{var}`")]
pub struct KindError {
    pub var: String,
}

#[derive(Clone, Debug, Error, PartialEq, Eq, Serialize)]
#[error("{rule}: {message}")]
pub struct TypeError {
    pub rule: &'static str,
    pub message: String,
    pub span: Span,
    pub expected: Option<String>,
    pub actual: Option<String>,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum CheckError {
    #[error("kind error at {}:{}: {err}", span.line, span.col)]
    Kind { err: KindError, span: Span },
    #[error("type error at {}:{}: {}", .0.span.line, .0.span.col, .0)]
    Type(TypeError),
}

impl CheckError {
    pub fn span(&self) -> Span {
        match self {
            CheckError::Kind { span, .. } => *span,
            CheckError::Type(e) => e.span,
        }
    }

    /// `{kind, message, span, expected, actual}`.
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            CheckError::Kind { err, span } => serde_json::json!({
                "kind": "KindError",
                "message": err.to_string(),
                "span": span,
                "expected": null,
                "actual": null,
            }),
            CheckError::Type(e) => serde_json::json!({
                "kind": "TypeError",
                "rule": e.rule,
                "message": e.message,
                "span": e.span,
                "expected": e.expected,
                "actual": e.actual,
            }),
        }
    }
}

pub fn kindcheck(xi: &KCtx, ty: &Ty) -> Result<(), KindError> {
    match ty.free_vars().into_iter().find(|a| !xi.contains(a)) {
        Some(a) => Err(KindError { var: a.to_string() }),
        None => Ok(()),
    }
}

pub fn typecheck(xi: &KCtx, gamma: &TCtx, e: &Tm) -> Result<Ty, CheckError> {
    let mut c = Checker {
        xi: xi.0.clone(),
        gamma: gamma.0.clone(),
    };
    c.check(e)
}

pub fn typecheck_closed(e: &Tm) -> Result<Ty, CheckError> {
    typecheck(&KCtx::new(), &TCtx::new(), e)
}

struct Checker {
    xi: Vec<Name>,
    gamma: Vec<(Name, Ty)>,
}

/// Outer type variable renamed while a shadowing binder is in scope.
struct Shadow {
    outer: Name,
    hidden: Name,
}

impl Shadow {
    fn hide(&self, ty: &Ty) -> Ty {
        ty.subst(&self.outer, &Ty::Var(self.hidden.clone()))
    }

    fn restore(&self, ty: &Ty) -> Ty {
        ty.subst(&self.hidden, &Ty::Var(self.outer.clone()))
    }
}

fn mismatch(rule: &'static str, span: Span, what: &str, expected: &Ty, actual: &Ty) -> CheckError {
    CheckError::Type(TypeError {
        rule,
        message: format!("{what}: expected `{expected}`, found `{actual}`"),
        span,
        expected: Some(expected.to_string()),
        actual: Some(actual.to_string()),
    })
}

fn shape(rule: &'static str, span: Span, expected: &str, actual: &Ty) -> CheckError {
    CheckError::Type(TypeError {
        rule,
        message: format!("expected {expected}, found `{actual}`"),
        span,
        expected: Some(expected.to_string()),
        actual: Some(actual.to_string()),
    })
}

impl Checker {
    fn kind(&self, ty: &Ty, span: Span) -> Result<(), CheckError> {
        match ty.free_vars().into_iter().find(|a| !self.xi.contains(a)) {
            Some(a) => Err(CheckError::Kind {
                err: KindError { var: a.to_string() },
                span,
            }),
            None => Ok(()),
        }
    }

    /// Bring `a` into scope, renaming an outer `a` out of the way.
    fn enter_tvar(&mut self, a: &Name) -> Option<Shadow> {
        if !self.xi.contains(a) {
            self.xi.push(a.clone());
            return None;
        }
        let mut avoid: BTreeSet<Name> = self.xi.iter().cloned().collect();
        for (_, t) in &self.gamma {
            avoid.extend(t.free_vars());
        }
        let hidden = fresh_name(a, &avoid);
        let sh = Shadow {
            outer: a.clone(),
            hidden: hidden.clone(),
        };
        for slot in self.xi.iter_mut() {
            if slot == a {
                *slot = hidden.clone();
            }
        }
        for (_, t) in self.gamma.iter_mut() {
            *t = sh.hide(t);
        }
        self.xi.push(a.clone());
        Some(sh)
    }

    fn leave_tvar(&mut self, shadow: Option<Shadow>) {
        self.xi.pop();
        if let Some(sh) = shadow {
            for slot in self.xi.iter_mut() {
                if *slot == sh.hidden {
                    *slot = sh.outer.clone();
                }
            }
            for (_, t) in self.gamma.iter_mut() {
                *t = sh.restore(t);
            }
        }
    }

    fn with_var<R>(&mut self, x: &Name, ty: Ty, f: impl FnOnce(&mut Self) -> R) -> R {
        self.gamma.push((x.clone(), ty));
        let r = f(self);
        self.gamma.pop();
        r
    }

    fn expect(
        &mut self,
        e: &Tm,
        rule: &'static str,
        what: &str,
        want: &Ty,
    ) -> Result<(), CheckError> {
        let got = self.check(e)?;
        if got.alpha_eq(want) {
            Ok(())
        } else {
            Err(mismatch(rule, e.span, what, want, &got))
        }
    }

    fn expect_comp(&mut self, e: &Tm, rule: &'static str) -> Result<Ty, CheckError> {
        match self.check(e)? {
            Ty::T(inner) => Ok(*inner),
            other => Err(shape(rule, e.span, "a computation type `T _`", &other)),
        }
    }

    fn check(&mut self, e: &Tm) -> Result<Ty, CheckError> {
        use TmKind::*;
        let sp = e.span;
        match &e.kind {
            Var(x) => self
                .gamma
                .iter()
                .rev()
                .find(|(y, _)| y == x)
                .map(|(_, t)| t.clone())
                .ok_or_else(|| {
                    CheckError::Type(TypeError {
                        rule: "var",
                        message: format!("unbound variable `{x}`"),
                        span: sp,
                        expected: None,
                        actual: None,
                    })
                }),
            Unit => Ok(Ty::Unit),
            Int(_) => Ok(Ty::Int),
            Bin(op, a, b) => {
                let what = format!("operand of `{}`", op.symbol());
                self.expect(a, "arith", &what, &Ty::Int)?;
                self.expect(b, "arith", &what, &Ty::Int)?;
                Ok(Ty::Int)
            }
            Neg(a) => {
                self.expect(a, "arith", "operand of negation", &Ty::Int)?;
                Ok(Ty::Int)
            }
            Ifz(c, a, b) => {
                self.expect(c, "ifz", "condition", &Ty::Int)?;
                let ta = self.check(a)?;
                self.expect(b, "ifz", "else branch", &ta)?;
                Ok(ta)
            }
            Lam(x, ty, body) => {
                self.kind(ty, sp)?;
                let tb = self.with_var(x, ty.clone(), |c| c.check(body))?;
                Ok(Ty::arrow(ty.clone(), tb))
            }
            App(f, a) => match self.check(f)? {
                Ty::Arrow(dom, cod) => {
                    self.expect(a, "app", "argument", &dom)?;
                    Ok(*cod)
                }
                other => Err(shape("app", f.span, "a function type", &other)),
            },
            Pair(a, b) => Ok(Ty::prod(self.check(a)?, self.check(b)?)),
            Fst(p) | Snd(p) => match self.check(p)? {
                Ty::Prod(l, r) => Ok(if matches!(e.kind, Fst(_)) { *l } else { *r }),
                other => Err(shape("proj", p.span, "a product type", &other)),
            },
            TLam(a, body) => {
                let sh = self.enter_tvar(a);
                let r = self.check(body);
                let r = r.map(|tb| {
                    let t = Ty::Forall(a.clone(), Box::new(tb));
                    match &sh {
                        Some(sh) => sh.restore(&t),
                        None => t,
                    }
                });
                self.leave_tvar(sh);
                r
            }
            TApp(f, ty) => {
                self.kind(ty, sp)?;
                match self.check(f)? {
                    Ty::Forall(a, body) => Ok(body.subst(&a, ty)),
                    other => Err(shape("tapp", f.span, "a universal type", &other)),
                }
            }
            Pack {
                witness,
                body,
                as_ty,
            } => {
                self.kind(witness, sp)?;
                self.kind(as_ty, sp)?;
                match as_ty {
                    Ty::Exists(a, inner) => {
                        let want = inner.subst(a, witness);
                        self.expect(body, "pack", "package body", &want)?;
                        Ok(as_ty.clone())
                    }
                    other => Err(shape("pack", sp, "an existential type", other)),
                }
            }
            Unpack {
                package,
                ty_var,
                var,
                body,
            } => {
                let (b, inner) = match self.check(package)? {
                    Ty::Exists(b, inner) => (b, *inner),
                    other => {
                        return Err(shape("unpack", package.span, "an existential type", &other))
                    }
                };
                let sh = self.enter_tvar(ty_var);
                let packed = Ty::Exists(b, Box::new(inner));
                let inner = match &sh {
                    Some(sh) => sh.hide(&packed),
                    None => packed,
                };
                let Ty::Exists(b, inner) = inner else {
                    unreachable!("substitution preserves the head")
                };
                let opened = inner.subst(&b, &Ty::Var(ty_var.clone()));
                let r = self.with_var(var, opened, |c| c.check(body));
                let r = r.and_then(|tb| {
                    if tb.free_vars().contains(ty_var) {
                        Err(CheckError::Type(TypeError {
                            rule: "unpack",
                            message: format!(
                                "type variable `{ty_var}` escapes its scope in `{tb}`"
                            ),
                            span: sp,
                            expected: None,
                            actual: Some(tb.to_string()),
                        }))
                    } else {
                        Ok(match &sh {
                            Some(sh) => sh.restore(&tb),
                            None => tb,
                        })
                    }
                });
                self.leave_tvar(sh);
                r
            }
            Fold(ty, body) => {
                self.kind(ty, sp)?;
                let unrolled = ty
                    .unroll()
                    .ok_or_else(|| shape("fold", sp, "a recursive type `mu _. _`", ty))?;
                self.expect(body, "fold", "folded body", &unrolled)?;
                Ok(ty.clone())
            }
            Unfold(body) => {
                let t = self.check(body)?;
                t.unroll()
                    .ok_or_else(|| shape("unfold", body.span, "a recursive type `mu _. _`", &t))
            }
            Ret(a) => Ok(Ty::comp(self.check(a)?)),
            Bind(x, e1, e2) => {
                let t1 = self.expect_comp(e1, "bind")?;
                let t2 = self.with_var(x, t1, |c| c.expect_comp(e2, "bind"))?;
                Ok(Ty::comp(t2))
            }
            Get(ty, l) => {
                self.kind(ty, sp)?;
                self.expect(l, "get", "location", &Ty::reference(ty.clone()))?;
                Ok(Ty::comp(ty.clone()))
            }
            Set(ty, l, u) => {
                self.kind(ty, sp)?;
                self.expect(l, "set", "location", &Ty::reference(ty.clone()))?;
                self.expect(u, "set", "stored value", ty)?;
                Ok(Ty::comp(Ty::Unit))
            }
            New(ty, u) => {
                self.kind(ty, sp)?;
                self.expect(u, "new", "initial value", ty)?;
                Ok(Ty::comp(Ty::reference(ty.clone())))
            }
            Step => Ok(Ty::comp(Ty::Unit)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse, parse_ty};

    fn ty_of(src: &str) -> Result<Ty, CheckError> {
        typecheck_closed(&parse(src).unwrap())
    }

    fn assert_ty(src: &str, want: &str) {
        let got = ty_of(src).unwrap_or_else(|e| panic!("{src}: {e}"));
        assert!(
            got.alpha_eq(&parse_ty(want).unwrap()),
            "{src}: got {got}, want {want}"
        );
    }

    #[test]
    fn kindcheck_examples() {
        let xi = KCtx::new().with("a");
        assert!(kindcheck(&xi, &Ty::reference(Ty::var("a"))).is_ok());
        let t = parse_ty("T (forall a. a -> T a)").unwrap();
        assert!(kindcheck(&KCtx::new(), &t).is_ok());
        assert_eq!(
            kindcheck(&KCtx::new(), &Ty::var("b")),
            Err(KindError { var: "b".into() })
        );
    }

    #[test]
    fn monadic_rules() {
        assert_ty("ret ()", "T Unit");
        assert_ty("step", "T Unit");
        assert_ty("bind r <- new[Int] 0; ret r", "T (Ref Int)");
        assert_ty("bind r <- new[Int] 0; get[Int] r", "T Int");
        assert_ty("bind r <- new[Int] 0; set[Int] r 3", "T Unit");
    }

    #[test]
    fn set_at_wrong_reference_type() {
        let err = ty_of("bind r <- new[Unit] (); set[Int] r 3").unwrap_err();
        let CheckError::Type(e) = err else {
            panic!("{err}")
        };
        assert_eq!(e.rule, "set");
        assert_eq!(e.expected.as_deref(), Some("Ref Int"));
        assert_eq!(e.actual.as_deref(), Some("Ref Unit"));
    }

    #[test]
    fn polymorphism() {
        assert_ty("tfun a. fun x : a. x", "forall b. b -> b");
        assert_ty("(tfun a. fun x : a. x) [Int] 7", "Int");
        assert_ty(
            "(tfun a. fun x : a. ret x) [forall b. b -> T b]",
            "(forall b. b -> T b) -> T (forall b. b -> T b)",
        );
    }

    #[test]
    fn shadowed_type_variables_do_not_capture() {
        // inner `a` is a different variable from the outer one
        assert_ty(
            "tfun a. fun x : a. tfun a. fun y : a. x",
            "forall a. a -> forall b. b -> a",
        );
    }

    #[test]
    fn existentials() {
        assert_ty("pack[Int, 3] as exists a. a", "exists a. a");
        assert_ty("unpack (pack[Int, (3, fun x : Int. x + 1)] as exists a. a * (a -> Int)) as [b, p] in (snd p) (fst p)", "Int");
        let escape = ty_of("unpack (pack[Int, 3] as exists a. a) as [b, p] in p").unwrap_err();
        assert!(matches!(
            escape,
            CheckError::Type(TypeError { rule: "unpack", .. })
        ));
    }

    #[test]
    fn recursive_types() {
        assert_ty(
            "fun w : mu b. b -> T Unit. (unfold w) w",
            "(mu b. b -> T Unit) -> T Unit",
        );
        assert_ty(
            "fun s : mu b. Int * (Unit -> b). fst (unfold ((snd (unfold s)) ()))",
            "(mu b. Int * (Unit -> b)) -> Int",
        );
        assert!(ty_of("unfold 3").is_err());
        assert!(ty_of("fold[Int] 3").is_err());
    }

    #[test]
    fn kind_errors_in_annotations() {
        let err = ty_of("fun x : b. x").unwrap_err();
        assert!(matches!(err, CheckError::Kind { .. }));
        assert_eq!(err.to_json()["kind"], "KindError");
    }

    #[test]
    fn error_json_shape() {
        let err = ty_of("1 + ()").unwrap_err();
        let j = err.to_json();
        assert_eq!(j["kind"], "TypeError");
        assert_eq!(j["expected"], "Int");
        assert_eq!(j["actual"], "Unit");
        assert_eq!(j["span"]["col"], 5);
    }
}
