//! Parser for the relation-expression language.
//!
//! ```text
//! expr := IDENT | "diag" | comp(expr, expr, ..) | alt(expr, expr, INT)
//!       | pow(expr, INT) | meet(expr, expr, ..) | conv(expr) | tc(expr)
//!       | adm(expr, expr)
//! stmt := expr "<=" expr | expr "==" expr
//! ```
//!
//! Errors carry the byte offset of the offending input.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::relation::expr::{Mode, RelExpr, Role};

const MAX_DEPTH: usize = 200;
/// Largest exponent accepted in `alt` and `pow`.
pub const MAX_EXPONENT: usize = 4096;

struct Parser<'s> {
    src: &'s [u8],
    pos: usize,
    depth: usize,
}

fn err<T>(offset: usize, message: impl Into<String>) -> Result<T> {
    Err(Error::Parse { offset, message: message.into() })
}

impl<'s> Parser<'s> {
    fn new(src: &'s str) -> Self {
        Parser { src: src.as_bytes(), pos: 0, depth: 0 }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        match self.peek() {
            Some(x) if x == c => {
                self.pos += 1;
                Ok(())
            }
            Some(x) => err(self.pos, format!("expected `{}`, found `{}`", c as char, x as char)),
            None => err(self.pos, format!("expected `{}`, found end of input", c as char)),
        }
    }

    fn ident(&mut self) -> Result<(usize, &'s str)> {
        self.skip_ws();
        let start = self.pos;
        match self.src.get(self.pos) {
            Some(c) if c.is_ascii_alphabetic() || *c == b'_' => {}
            Some(c) => return err(start, format!("expected a name, found `{}`", *c as char)),
            None => return err(start, "expected a name, found end of input"),
        }
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        // identifiers are ASCII so this slice is valid UTF-8
        let s = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii identifier");
        Ok((start, s))
    }

    fn int(&mut self) -> Result<usize> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return err(start, "expected a non-negative integer");
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        match text.parse::<usize>() {
            Ok(v) if v <= MAX_EXPONENT => Ok(v),
            _ => err(start, format!("integer {text} exceeds {MAX_EXPONENT}")),
        }
    }

    fn args(&mut self, min: usize) -> Result<Vec<RelExpr>> {
        let open = self.pos;
        self.expect(b'(')?;
        let mut xs = vec![self.expr()?];
        while self.peek() == Some(b',') {
            self.pos += 1;
            xs.push(self.expr()?);
        }
        self.expect(b')')?;
        if xs.len() < min {
            return err(open, format!("expected at least {min} arguments, found {}", xs.len()));
        }
        Ok(xs)
    }

    fn expr_int(&mut self) -> Result<(RelExpr, usize)> {
        self.expect(b'(')?;
        let e = self.expr()?;
        self.expect(b',')?;
        let k = self.int()?;
        self.expect(b')')?;
        Ok((e, k))
    }

    fn unary(&mut self) -> Result<RelExpr> {
        self.expect(b'(')?;
        let e = self.expr()?;
        self.expect(b')')?;
        Ok(e)
    }

    fn expr(&mut self) -> Result<RelExpr> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return err(self.pos, "expression nested too deeply");
        }
        let (start, name) = self.ident()?;
        let call = self.peek() == Some(b'(');
        let e = match (name, call) {
            ("diag", false) => RelExpr::Diag,
            ("diag", true) => return err(start, "`diag` takes no arguments"),
            ("comp", true) => RelExpr::Comp(self.args(2)?),
            ("meet", true) => RelExpr::Meet(self.args(2)?),
            ("alt", true) => {
                self.expect(b'(')?;
                let a = self.expr()?;
                self.expect(b',')?;
                let b = self.expr()?;
                self.expect(b',')?;
                let k = self.int()?;
                self.expect(b')')?;
                RelExpr::alt(a, b, k)
            }
            ("pow", true) => {
                let (e, k) = self.expr_int()?;
                RelExpr::pow(e, k)
            }
            ("conv", true) => RelExpr::Conv(Box::new(self.unary()?)),
            ("tc", true) => RelExpr::Tc(Box::new(self.unary()?)),
            ("adm", true) => {
                let xs = self.args(2)?;
                if xs.len() != 2 {
                    return err(start, "`adm` takes exactly two arguments");
                }
                let mut it = xs.into_iter();
                RelExpr::adm(it.next().expect("two"), it.next().expect("two"))
            }
            (other, true) => return err(start, format!("unknown function `{other}`")),
            (v, false) => RelExpr::Var(v.to_string()),
        };
        self.depth -= 1;
        Ok(e)
    }

    fn finish(&mut self) -> Result<()> {
        match self.peek() {
            None => Ok(()),
            Some(c) => err(self.pos, format!("unexpected `{}` after expression", c as char)),
        }
    }
}

pub fn parse_expr(src: &str) -> Result<RelExpr> {
    let mut p = Parser::new(src);
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

pub fn parse_statement(src: &str) -> Result<(RelExpr, RelExpr, Mode)> {
    let mut p = Parser::new(src);
    let lhs = p.expr()?;
    p.skip_ws();
    let at = p.pos;
    let mode = match p.src.get(at..at + 2) {
        Some(b"<=") => Mode::Inclusion,
        Some(b"==") => Mode::Equality,
        _ => return err(at, "expected `<=` or `==`"),
    };
    p.pos += 2;
    let rhs = p.expr()?;
    p.finish()?;
    Ok((lhs, rhs, mode))
}

/// Parses `"name:role,name:role"`; roles are `cong`, `tol` or `adm`.
pub fn parse_roles(src: &str) -> Result<BTreeMap<String, Role>> {
    let mut out = BTreeMap::new();
    let mut offset = 0;
    for item in src.split(',') {
        let here = offset;
        offset += item.len() + 1;
        if item.trim().is_empty() {
            if src.trim().is_empty() {
                continue;
            }
            return err(here, "empty role entry");
        }
        let Some((name, role)) = item.split_once(':') else {
            return err(here, "expected `name:role`");
        };
        let name = name.trim();
        let valid = name.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_')
            && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !valid {
            return err(here, format!("invalid variable name `{name}`"));
        }
        let role_at = here + item.find(':').expect("split") + 1;
        let Some(r) = Role::parse(role.trim()) else {
            return err(role_at, format!("unknown role `{}` (use cong, tol or adm)", role.trim()));
        };
        if let Some(prev) = out.insert(name.to_string(), r) {
            if prev != r {
                return err(here, format!("conflicting roles for `{name}`"));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_nested_expression() {
        let e = parse_expr(" meet( al , alt(be, ga, 2) ) ").unwrap();
        assert_eq!(
            e,
            RelExpr::Meet(vec![
                RelExpr::var("al"),
                RelExpr::alt(RelExpr::var("be"), RelExpr::var("ga"), 2)
            ])
        );
        assert_eq!(e.to_string(), "meet(al,alt(be,ga,2))");
        assert_eq!(parse_expr("diag").unwrap(), RelExpr::Diag);
        assert_eq!(
            parse_expr("adm(conv(R),tc(S))").unwrap().to_string(),
            "adm(conv(R),tc(S))"
        );
    }

    #[test]
    fn errors_cite_offsets() {
        let e = parse_expr("meet(al,)").unwrap_err();
        assert_eq!(e, Error::Parse { offset: 8, message: "expected a name, found `)`".into() });
        assert!(matches!(parse_expr("comp(a)"), Err(Error::Parse { offset: 4, .. })));
        assert!(matches!(parse_expr("alt(a,b,x)"), Err(Error::Parse { offset: 8, .. })));
        assert!(matches!(parse_expr("foo(a)"), Err(Error::Parse { offset: 0, .. })));
        assert!(matches!(parse_expr("a b"), Err(Error::Parse { offset: 2, .. })));
        assert!(matches!(parse_expr("pow(a,99999)"), Err(Error::Parse { offset: 6, .. })));
        assert!(parse_expr("").is_err());
    }

    #[test]
    fn statements_and_roles() {
        let (l, r, m) = parse_statement("R <= comp(R,R)").unwrap();
        assert_eq!((l, m), (RelExpr::var("R"), Mode::Inclusion));
        assert_eq!(r.to_string(), "comp(R,R)");
        assert_eq!(parse_statement("R == R").unwrap().2, Mode::Equality);
        assert!(matches!(parse_statement("R < R"), Err(Error::Parse { offset: 2, .. })));
        let roles = parse_roles("al:cong, th:tol,R:adm").unwrap();
        assert_eq!(roles["th"], Role::Tolerance);
        assert_eq!(roles.len(), 3);
        assert!(parse_roles("").unwrap().is_empty());
        assert!(matches!(parse_roles("al:cong,be:foo"), Err(Error::Parse { offset: 11, .. })));
        assert!(parse_roles("al:cong,al:tol").is_err());
        assert!(parse_roles("al").is_err());
    }

    #[test]
    fn deep_nesting_is_rejected_not_overflowing() {
        let src = format!("{}R{}", "conv(".repeat(5000), ")".repeat(5000));
        assert!(matches!(parse_expr(&src), Err(Error::Parse { .. })));
    }

    fn arb_expr() -> impl Strategy<Value = RelExpr> {
        let leaf = prop_oneof![
            "[a-z][a-z0-9_]{0,3}"
                .prop_filter("reserved", |s| s != "diag")
                .prop_map(RelExpr::Var),
            Just(RelExpr::Diag),
        ];
        leaf.prop_recursive(4, 24, 3, |inner| {
            prop_oneof![
                proptest::collection::vec(inner.clone(), 2..4).prop_map(RelExpr::Comp),
                proptest::collection::vec(inner.clone(), 2..4).prop_map(RelExpr::Meet),
                (inner.clone(), inner.clone(), 0usize..7).prop_map(|(a, b, k)| RelExpr::alt(a, b, k)),
                (inner.clone(), 0usize..7).prop_map(|(a, k)| RelExpr::pow(a, k)),
                inner.clone().prop_map(|a| RelExpr::Conv(Box::new(a))),
                inner.clone().prop_map(|a| RelExpr::Tc(Box::new(a))),
                (inner.clone(), inner).prop_map(|(a, b)| RelExpr::adm(a, b)),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(e in arb_expr()) {
            prop_assert_eq!(parse_expr(&e.to_string()).unwrap(), e);
        }

        #[test]
        fn parser_never_panics(s in "\\PC{0,40}") {
            let _ = parse_expr(&s);
            let _ = parse_statement(&s);
            let _ = parse_roles(&s);
        }
    }
}
