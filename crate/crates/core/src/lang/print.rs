//! Pretty-printer producing text that re-parses to an alpha-equivalent term.

use super::ast::{BinOp, Tm, TmKind, Ty, WILDCARD};

const TERM: u8 = 0;
const ADD: u8 = 1;
const MUL: u8 = 2;
const UNARY: u8 = 3;
const APP: u8 = 4;
const ATOM: u8 = 5;

fn level(t: &Tm) -> u8 {
    use TmKind::*;
    match &t.kind {
        Lam(..) | TLam(..) | Bind(..) | Unpack { .. } | Ifz(..) | Pack { .. } => TERM,
        Bin(BinOp::Add | BinOp::Sub, ..) => ADD,
        Bin(BinOp::Mul, ..) => MUL,
        Neg(_) => UNARY,
        Int(n) if *n < 0 => UNARY,
        App(..) | TApp(..) | Ret(_) | Fst(_) | Snd(_) | Unfold(_) | Fold(..) | Get(..)
        | New(..) | Set(..) => APP,
        Var(_) | Int(_) | Unit | Step | Pair(..) => ATOM,
    }
}

/// Whether the printed form of `t` begins with an integer literal.
fn starts_with_digit(t: &Tm) -> bool {
    match &t.kind {
        TmKind::Int(_) => true,
        TmKind::App(f, _) | TmKind::TApp(f, _) => level(f) >= APP && starts_with_digit(f),
        _ => false,
    }
}

pub fn print(t: &Tm) -> String {
    let mut out = String::new();
    term_at(t, TERM, &mut out);
    out
}

pub fn print_ty(t: &Ty) -> String {
    let mut out = String::new();
    ty_at(t, 0, &mut out);
    out
}

fn term_at(t: &Tm, min: u8, out: &mut String) {
    if level(t) < min {
        out.push('(');
        term(t, out);
        out.push(')');
    } else {
        term(t, out);
    }
}

fn term(t: &Tm, out: &mut String) {
    use TmKind::*;
    match &t.kind {
        Var(x) => out.push_str(x),
        Unit => out.push_str("()"),
        Int(n) => out.push_str(&n.to_string()),
        Step => out.push_str("step"),
        Bin(op, a, b) => {
            let (l, r) = match op {
                BinOp::Add | BinOp::Sub => (ADD, MUL),
                BinOp::Mul => (MUL, UNARY),
            };
            term_at(a, l, out);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            term_at(b, r, out);
        }
        Neg(e) => {
            out.push('-');
            if starts_with_digit(e) {
                // keep `-(3)` and `-(3 [Int])` distinct from the literal `-3`
                out.push('(');
                term(e, out);
                out.push(')');
            } else {
                term_at(e, APP, out);
            }
        }
        Ifz(c, a, b) => {
            out.push_str("ifz ");
            term_at(c, TERM, out);
            out.push_str(" then ");
            term_at(a, TERM, out);
            out.push_str(" else ");
            term_at(b, TERM, out);
        }
        Lam(x, ty, body) => {
            out.push_str("fun ");
            out.push_str(x);
            out.push_str(" : ");
            ty_at(ty, 0, out);
            out.push_str(". ");
            term_at(body, TERM, out);
        }
        TLam(a, body) => {
            out.push_str("tfun ");
            out.push_str(a);
            out.push_str(". ");
            term_at(body, TERM, out);
        }
        App(f, a) => {
            term_at(f, APP, out);
            out.push(' ');
            term_at(a, ATOM, out);
        }
        TApp(f, ty) => {
            term_at(f, APP, out);
            out.push_str(" [");
            ty_at(ty, 0, out);
            out.push(']');
        }
        Pair(a, b) => {
            out.push('(');
            term_at(a, TERM, out);
            let mut rest = b;
            while let Pair(x, y) = &rest.kind {
                out.push_str(", ");
                term_at(x, TERM, out);
                rest = y;
            }
            out.push_str(", ");
            term_at(rest, TERM, out);
            out.push(')');
        }
        Fst(e) => prefix("fst", None, &[e], out),
        Snd(e) => prefix("snd", None, &[e], out),
        Unfold(e) => prefix("unfold", None, &[e], out),
        Ret(e) => prefix("ret", None, &[e], out),
        Fold(ty, e) => prefix("fold", Some(ty), &[e], out),
        Get(ty, e) => prefix("get", Some(ty), &[e], out),
        New(ty, e) => prefix("new", Some(ty), &[e], out),
        Set(ty, l, u) => prefix("set", Some(ty), &[l, u], out),
        Pack {
            witness,
            body,
            as_ty,
        } => {
            out.push_str("pack[");
            ty_at(witness, 0, out);
            out.push_str(", ");
            term_at(body, TERM, out);
            out.push_str("] as ");
            ty_at(as_ty, 0, out);
        }
        Unpack {
            package,
            ty_var,
            var,
            body,
        } => {
            out.push_str("unpack ");
            term_at(package, ADD, out);
            out.push_str(" as [");
            out.push_str(ty_var);
            out.push_str(", ");
            out.push_str(var);
            out.push_str("] in ");
            term_at(body, TERM, out);
        }
        Bind(x, e1, e2) => {
            if &**x != WILDCARD {
                out.push_str("bind ");
                out.push_str(x);
                out.push_str(" <- ");
            }
            term_at(e1, ADD, out);
            out.push_str("; ");
            term_at(e2, TERM, out);
        }
    }
}

fn prefix(kw: &str, ty: Option<&Ty>, args: &[&std::sync::Arc<Tm>], out: &mut String) {
    out.push_str(kw);
    if let Some(ty) = ty {
        out.push('[');
        ty_at(ty, 0, out);
        out.push(']');
    }
    for a in args {
        out.push(' ');
        term_at(a, ATOM, out);
    }
}

fn ty_level(t: &Ty) -> u8 {
    match t {
        Ty::Forall(..) | Ty::Exists(..) | Ty::Mu(..) => 0,
        Ty::Arrow(..) => 1,
        Ty::Prod(..) => 2,
        Ty::Ref(_) | Ty::T(_) => 3,
        Ty::Var(_) | Ty::Unit | Ty::Int => 4,
    }
}

fn ty_at(t: &Ty, min: u8, out: &mut String) {
    if ty_level(t) < min {
        out.push('(');
        ty(t, out);
        out.push(')');
    } else {
        ty(t, out);
    }
}

fn ty(t: &Ty, out: &mut String) {
    match t {
        Ty::Var(a) => out.push_str(a),
        Ty::Unit => out.push_str("Unit"),
        Ty::Int => out.push_str("Int"),
        Ty::Prod(a, b) => {
            ty_at(a, 3, out);
            out.push_str(" * ");
            ty_at(b, 2, out);
        }
        Ty::Arrow(a, b) => {
            ty_at(a, 2, out);
            out.push_str(" -> ");
            ty_at(b, 0, out);
        }
        Ty::Ref(a) => {
            out.push_str("Ref ");
            ty_at(a, 3, out);
        }
        Ty::T(a) => {
            out.push_str("T ");
            ty_at(a, 3, out);
        }
        Ty::Forall(a, body) | Ty::Exists(a, body) | Ty::Mu(a, body) => {
            out.push_str(match t {
                Ty::Forall(..) => "forall ",
                Ty::Exists(..) => "exists ",
                _ => "mu ",
            });
            out.push_str(a);
            out.push_str(". ");
            ty_at(body, 0, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::ast::tm_alpha_eq;
    use crate::lang::parse::{parse, parse_ty};

    #[test]
    fn ret_unit() {
        assert_eq!(print(&Tm::ret(Tm::unit())), "ret ()");
    }

    #[test]
    fn negation_corner_cases() {
        for src in [
            "-(3)",
            "-(-3)",
            "-(-x)",
            "a - -3",
            "a - -x",
            "-(f x)",
            "(-3) y",
            "-3 * 2",
            "-(3 [Unit])",
            "-(3 x y)",
        ] {
            let t = parse(src).unwrap();
            let back = parse(&print(&t)).unwrap();
            assert!(tm_alpha_eq(&t, &back), "{src} -> {}", print(&t));
        }
    }

    #[test]
    fn binder_forms_get_parenthesised() {
        for src in [
            "(fun x : Int. x) 3",
            "(bind x <- step; ret x) + 1",
            "(fun x : Int. ret x); step",
            "ifz 0 then 1 else 2 + 3",
            "f (pack[Int, 3] as exists a. a)",
            "(unpack p as [a, x] in x) y",
            "ret x [Int]",
            "set[Int] l u y",
        ] {
            let t = parse(src).unwrap();
            let back = parse(&print(&t)).unwrap();
            assert!(tm_alpha_eq(&t, &back), "{src} -> {}", print(&t));
        }
    }

    #[test]
    fn types_round_trip() {
        for src in [
            "forall a. ((a -> T a) -> a -> T a) -> a -> T a",
            "exists a. T a * (a -> T Unit) * (a -> T Int)",
            "(Int * Int) * Int",
            "Ref (Int -> T Int)",
            "(forall a. a) -> mu b. b -> T Unit",
            "T T Int",
        ] {
            let t = parse_ty(src).unwrap();
            assert_eq!(parse_ty(&print_ty(&t)).unwrap(), t, "{src}");
        }
    }
}
