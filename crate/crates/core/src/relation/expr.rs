//! Relation expressions and identity statements.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};

/// An expression over named relation variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RelExpr {
    Var(String),
    Diag,
    /// Left-to-right composition.
    Comp(Vec<RelExpr>),
    /// `k` alternating factors starting with the left one.
    Alt(Box<RelExpr>, Box<RelExpr>, usize),
    Pow(Box<RelExpr>, usize),
    Meet(Vec<RelExpr>),
    Conv(Box<RelExpr>),
    Tc(Box<RelExpr>),
    /// Least admissible relation containing the union.
    Adm(Box<RelExpr>, Box<RelExpr>),
}

impl RelExpr {
    pub fn var(name: &str) -> RelExpr {
        RelExpr::Var(name.to_string())
    }

    pub fn alt(a: RelExpr, b: RelExpr, k: usize) -> RelExpr {
        RelExpr::Alt(Box::new(a), Box::new(b), k)
    }

    pub fn pow(a: RelExpr, k: usize) -> RelExpr {
        RelExpr::Pow(Box::new(a), k)
    }

    pub fn meet2(a: RelExpr, b: RelExpr) -> RelExpr {
        RelExpr::Meet(vec![a, b])
    }

    pub fn adm(a: RelExpr, b: RelExpr) -> RelExpr {
        RelExpr::Adm(Box::new(a), Box::new(b))
    }

    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            RelExpr::Var(v) => {
                out.insert(v.clone());
            }
            RelExpr::Diag => {}
            RelExpr::Comp(xs) | RelExpr::Meet(xs) => xs.iter().for_each(|x| x.collect_vars(out)),
            RelExpr::Alt(a, b, _) | RelExpr::Adm(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            RelExpr::Pow(a, _) | RelExpr::Conv(a) | RelExpr::Tc(a) => a.collect_vars(out),
        }
    }

    /// Whether the expression uses `adm` (and therefore needs an algebra).
    pub fn uses_adm(&self) -> bool {
        match self {
            RelExpr::Adm(..) => true,
            RelExpr::Var(_) | RelExpr::Diag => false,
            RelExpr::Comp(xs) | RelExpr::Meet(xs) => xs.iter().any(RelExpr::uses_adm),
            RelExpr::Alt(a, b, _) => a.uses_adm() || b.uses_adm(),
            RelExpr::Pow(a, _) | RelExpr::Conv(a) | RelExpr::Tc(a) => a.uses_adm(),
        }
    }
}

impl fmt::Display for RelExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn list(f: &mut fmt::Formatter<'_>, head: &str, xs: &[RelExpr]) -> fmt::Result {
            write!(f, "{head}(")?;
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, ")")
        }
        match self {
            RelExpr::Var(v) => write!(f, "{v}"),
            RelExpr::Diag => write!(f, "diag"),
            RelExpr::Comp(xs) => list(f, "comp", xs),
            RelExpr::Meet(xs) => list(f, "meet", xs),
            RelExpr::Alt(a, b, k) => write!(f, "alt({a},{b},{k})"),
            RelExpr::Pow(a, k) => write!(f, "pow({a},{k})"),
            RelExpr::Conv(a) => write!(f, "conv({a})"),
            RelExpr::Tc(a) => write!(f, "tc({a})"),
            RelExpr::Adm(a, b) => write!(f, "adm({a},{b})"),
        }
    }
}

/// What kind of relation a variable ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Congruence,
    Tolerance,
    Admissible,
}

impl Role {
    pub fn short(self) -> &'static str {
        match self {
            Role::Congruence => "cong",
            Role::Tolerance => "tol",
            Role::Admissible => "adm",
        }
    }

    pub fn parse(s: &str) -> Option<Role> {
        match s {
            "cong" | "congruence" => Some(Role::Congruence),
            "tol" | "tolerance" => Some(Role::Tolerance),
            "adm" | "admissible" => Some(Role::Admissible),
            _ => None,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Congruence => "congruence",
            Role::Tolerance => "tolerance",
            Role::Admissible => "admissible relation",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Inclusion,
    Equality,
}

/// `lhs <= rhs` or `lhs == rhs`, with a role for every variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityStatement {
    pub lhs: RelExpr,
    pub rhs: RelExpr,
    pub mode: Mode,
    pub roles: BTreeMap<String, Role>,
}

impl IdentityStatement {
    pub fn new(lhs: RelExpr, rhs: RelExpr, mode: Mode, roles: BTreeMap<String, Role>) -> Result<Self> {
        let st = IdentityStatement { lhs, rhs, mode, roles };
        for v in st.variables() {
            if !st.roles.contains_key(&v) {
                return Err(Error::MissingRole(v));
            }
        }
        Ok(st)
    }

    /// Parses a statement and a roles string.
    pub fn parse(stmt: &str, roles: &str) -> Result<Self> {
        let (lhs, rhs, mode) = crate::relation::parse::parse_statement(stmt)?;
        let roles = crate::relation::parse::parse_roles(roles)?;
        IdentityStatement::new(lhs, rhs, mode, roles)
    }

    pub fn variables(&self) -> BTreeSet<String> {
        let mut v = self.lhs.variables();
        v.extend(self.rhs.variables());
        v
    }
}

impl fmt::Display for IdentityStatement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.mode {
            Mode::Inclusion => "<=",
            Mode::Equality => "==",
        };
        write!(f, "{} {op} {}", self.lhs, self.rhs)
    }
}
