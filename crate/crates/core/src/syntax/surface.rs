//! Surface expressions before name resolution, and their printer.

use std::fmt;

use crate::kernel::Name;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Expr {
    Ident(Name),
    Num(u64),
    Nil,
    /// `_`
    Wild,
    /// `?x`
    PatVar(Name),
    /// Head applied to at least one argument.
    App(Name, Vec<Expr>),
    Cons(Box<Expr>, Box<Expr>),
    Append(Box<Expr>, Box<Expr>),
    Eq(Box<Expr>, Box<Expr>),
    Arrow(Box<Expr>, Box<Expr>),
    Forall(Vec<Binder>, Box<Expr>),
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Binder {
    pub name: Name,
    pub ty: Option<Name>,
}

// Binding strength, loosest first.
const FORALL: u8 = 0;
const ARROW: u8 = 1;
const EQ: u8 = 2;
const LIST: u8 = 3;
const APP: u8 = 4;
const ATOM: u8 = 5;

impl Expr {
    fn level(&self) -> u8 {
        match self {
            Expr::Forall(..) => FORALL,
            Expr::Arrow(..) => ARROW,
            Expr::Eq(..) => EQ,
            Expr::Cons(..) | Expr::Append(..) => LIST,
            Expr::App(..) => APP,
            _ => ATOM,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, ctx: u8) -> fmt::Result {
        if self.level() < ctx {
            write!(f, "(")?;
            self.write_at(f, FORALL)?;
            return write!(f, ")");
        }
        match self {
            Expr::Ident(x) => write!(f, "{x}"),
            Expr::Num(n) => write!(f, "{n}"),
            Expr::Nil => write!(f, "[]"),
            Expr::Wild => write!(f, "_"),
            Expr::PatVar(x) => write!(f, "?{x}"),
            Expr::App(h, args) => {
                write!(f, "{h}")?;
                for a in args {
                    write!(f, " ")?;
                    a.write_at(f, ATOM)?;
                }
                Ok(())
            }
            Expr::Cons(a, b) | Expr::Append(a, b) => {
                a.write_at(f, APP)?;
                write!(f, "{}", if matches!(self, Expr::Cons(..)) { " :: " } else { " ++ " })?;
                b.write_at(f, LIST)
            }
            Expr::Eq(a, b) => {
                a.write_at(f, LIST)?;
                write!(f, " = ")?;
                b.write_at(f, LIST)
            }
            Expr::Arrow(a, b) => {
                a.write_at(f, EQ)?;
                write!(f, " -> ")?;
                b.write_at(f, FORALL)
            }
            Expr::Forall(binders, body) => {
                write!(f, "forall")?;
                for b in binders {
                    match &b.ty {
                        Some(ty) => write!(f, " ({} : {ty})", b.name)?,
                        None => write!(f, " {}", b.name)?,
                    }
                }
                write!(f, ", ")?;
                body.write_at(f, FORALL)
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, FORALL)
    }
}

/// Printing inside an argument position of a larger phrase (`apply (f x)`).
pub struct Atomic<'a>(pub &'a Expr);

impl fmt::Display for Atomic<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.write_at(f, ATOM)
    }
}
