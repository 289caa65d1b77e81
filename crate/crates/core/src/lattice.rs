//! Chains, lattice terms and polynomial reducts of lattices.

use std::fmt;

use crate::algebra::{Algebra, Operation, Subalgebra, Term};
use crate::error::{Error, Result};

/// A lattice term over variables `x0, x1, ..`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LatticeTerm {
    Var(usize),
    Meet(Box<LatticeTerm>, Box<LatticeTerm>),
    Join(Box<LatticeTerm>, Box<LatticeTerm>),
}

impl LatticeTerm {
    pub fn var(i: usize) -> Self {
        LatticeTerm::Var(i)
    }

    pub fn meet(a: LatticeTerm, b: LatticeTerm) -> Self {
        LatticeTerm::Meet(Box::new(a), Box::new(b))
    }

    pub fn join(a: LatticeTerm, b: LatticeTerm) -> Self {
        LatticeTerm::Join(Box::new(a), Box::new(b))
    }

    /// Meet of a nonempty list.
    pub fn meet_all(items: impl IntoIterator<Item = LatticeTerm>) -> Self {
        items.into_iter().reduce(LatticeTerm::meet).expect("nonempty meet")
    }

    /// Join of a nonempty list.
    pub fn join_all(items: impl IntoIterator<Item = LatticeTerm>) -> Self {
        items.into_iter().reduce(LatticeTerm::join).expect("nonempty join")
    }

    /// One more than the largest variable index.
    pub fn var_bound(&self) -> usize {
        match self {
            LatticeTerm::Var(i) => i + 1,
            LatticeTerm::Meet(a, b) | LatticeTerm::Join(a, b) => a.var_bound().max(b.var_bound()),
        }
    }

    pub fn eval(&self, meet: &impl Fn(u32, u32) -> u32, join: &impl Fn(u32, u32) -> u32, args: &[u32]) -> u32 {
        match self {
            LatticeTerm::Var(i) => args[*i],
            LatticeTerm::Meet(a, b) => meet(a.eval(meet, join, args), b.eval(meet, join, args)),
            LatticeTerm::Join(a, b) => join(a.eval(meet, join, args), b.eval(meet, join, args)),
        }
    }

    /// Replaces variable `i` by `subst[i]`.
    pub fn substitute(&self, subst: &[LatticeTerm]) -> LatticeTerm {
        match self {
            LatticeTerm::Var(i) => subst[*i].clone(),
            LatticeTerm::Meet(a, b) => LatticeTerm::meet(a.substitute(subst), b.substitute(subst)),
            LatticeTerm::Join(a, b) => LatticeTerm::join(a.substitute(subst), b.substitute(subst)),
        }
    }

    /// `x0(x1 + x2)`
    pub fn baker() -> Self {
        let v = LatticeTerm::var;
        LatticeTerm::meet(v(0), LatticeTerm::join(v(1), v(2)))
    }

    /// Meet of `xi + xj` over all pairs `i < j` of four variables.
    pub fn nu4() -> Self {
        let mut factors = Vec::new();
        for i in 0..4 {
            for j in i + 1..4 {
                factors.push(LatticeTerm::join(LatticeTerm::var(i), LatticeTerm::var(j)));
            }
        }
        LatticeTerm::meet_all(factors)
    }

    /// `x0x1 + x0x2 + x1x2`
    pub fn median() -> Self {
        let v = LatticeTerm::var;
        LatticeTerm::join_all([
            LatticeTerm::meet(v(0), v(1)),
            LatticeTerm::meet(v(0), v(2)),
            LatticeTerm::meet(v(1), v(2)),
        ])
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, in_meet: bool) -> fmt::Result {
        match self {
            LatticeTerm::Var(i) => write!(f, "{}", crate::algebra::var_name(*i)),
            LatticeTerm::Meet(a, b) => {
                a.fmt_prec(f, true)?;
                b.fmt_prec(f, true)
            }
            LatticeTerm::Join(a, b) => {
                if in_meet {
                    write!(f, "(")?;
                }
                a.fmt_prec(f, false)?;
                write!(f, "+")?;
                b.fmt_prec(f, false)?;
                if in_meet {
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

/// Meet is juxtaposition and join is `+`, so `x(y+z)`.
impl fmt::Display for LatticeTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, false)
    }
}

/// One operation of a polynomial reduct.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductOp {
    pub name: String,
    pub arity: usize,
    pub term: LatticeTerm,
}

/// The terms kept in a polynomial reduct.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ReductSpec {
    pub ops: Vec<ReductOp>,
}

impl ReductSpec {
    pub fn new(ops: Vec<(&str, usize, LatticeTerm)>) -> Result<Self> {
        let mut out = Vec::new();
        for (name, arity, term) in ops {
            if term.var_bound() > arity {
                return Err(Error::InvalidParameter(format!(
                    "term for `{name}` uses a variable beyond arity {arity}"
                )));
            }
            if out.iter().any(|o: &ReductOp| o.name == name) {
                return Err(Error::DuplicateOperation(name.to_string()));
            }
            out.push(ReductOp { name: name.to_string(), arity, term });
        }
        Ok(ReductSpec { ops: out })
    }

    pub fn baker() -> Self {
        ReductSpec::new(vec![("b", 3, LatticeTerm::baker())]).expect("valid spec")
    }

    pub fn nu4() -> Self {
        ReductSpec::new(vec![("u", 4, LatticeTerm::nu4())]).expect("valid spec")
    }

    pub fn median() -> Self {
        ReductSpec::new(vec![("median", 3, LatticeTerm::median())]).expect("valid spec")
    }

    pub fn lattice() -> Self {
        let v = LatticeTerm::var;
        ReductSpec::new(vec![
            ("meet", 2, LatticeTerm::meet(v(0), v(1))),
            ("join", 2, LatticeTerm::join(v(0), v(1))),
        ])
        .expect("valid spec")
    }

    pub fn meet_only() -> Self {
        let v = LatticeTerm::var;
        ReductSpec::new(vec![("meet", 2, LatticeTerm::meet(v(0), v(1)))]).expect("valid spec")
    }

    /// Expands a term over the reduct's operations into a lattice term.
    pub fn expand(&self, t: &Term) -> Result<LatticeTerm> {
        match t {
            Term::Var(i) => Ok(LatticeTerm::Var(*i)),
            Term::Apply(name, args) => {
                let op = self
                    .ops
                    .iter()
                    .find(|o| &o.name == name)
                    .ok_or_else(|| Error::UnknownOperation(name.clone()))?;
                let subst = args.iter().map(|a| self.expand(a)).collect::<Result<Vec<_>>>()?;
                if subst.len() != op.arity {
                    return Err(Error::Arity { op: name.clone(), expected: op.arity, got: subst.len() });
                }
                Ok(op.term.substitute(&subst))
            }
        }
    }
}

/// The chain `0 < 1 < .. < h` with `meet = min` and `join = max`.
pub fn chain(h: usize) -> Result<Algebra> {
    if h < 1 {
        return Err(Error::InvalidParameter("a chain needs h >= 1".into()));
    }
    let n = h + 1;
    let meet = Operation::from_fn("meet", n, 2, |a| a[0].min(a[1]))?;
    let join = Operation::from_fn("join", n, 2, |a| a[0].max(a[1]))?;
    Algebra::new(format!("C{n}"), n, vec![meet, join])
}

fn lattice_ops(lattice: &Algebra) -> Result<(&Operation, &Operation)> {
    let get = |name: &str| -> Result<&Operation> {
        let op = lattice
            .op(name)
            .ok_or_else(|| Error::SignatureMismatch(format!("lattice has no `{name}` operation")))?;
        if op.arity != 2 {
            return Err(Error::SignatureMismatch(format!("`{name}` is not binary")));
        }
        Ok(op)
    };
    Ok((get("meet")?, get("join")?))
}

/// The algebra on the lattice's universe whose operations are the terms of `spec`.
pub fn reduct(lattice: &Algebra, spec: &ReductSpec) -> Result<Algebra> {
    let (m, j) = lattice_ops(lattice)?;
    let n = lattice.size;
    let meet = |a: u32, b: u32| m.table[a as usize * n + b as usize];
    let join = |a: u32, b: u32| j.table[a as usize * n + b as usize];
    let ops = spec
        .ops
        .iter()
        .map(|o| Operation::from_fn(o.name.clone(), n, o.arity, |args| o.term.eval(&meet, &join, args)))
        .collect::<Result<Vec<_>>>()?;
    let names: Vec<&str> = spec.ops.iter().map(|o| o.name.as_str()).collect();
    Algebra::new(format!("{}[{}]", lattice.name, names.join(",")), n, ops)
}

/// The reduct restricted to `elements`, which must be closed under the
/// terms of `spec`. Avoids tabulating the reduct on the whole lattice.
pub fn reduct_on(lattice: &Algebra, spec: &ReductSpec, elements: &[u32]) -> Result<Subalgebra> {
    let (m, j) = lattice_ops(lattice)?;
    let n = lattice.size;
    let meet = |a: u32, b: u32| m.table[a as usize * n + b as usize];
    let join = |a: u32, b: u32| j.table[a as usize * n + b as usize];
    let mut elements = elements.to_vec();
    elements.sort_unstable();
    elements.dedup();
    let mut position = vec![u32::MAX; n];
    for (i, &e) in elements.iter().enumerate() {
        if e as usize >= n {
            return Err(Error::OutOfRange { value: e as usize, size: n });
        }
        position[e as usize] = i as u32;
    }
    let size = elements.len();
    let mut ops = Vec::new();
    for o in &spec.ops {
        let mut escape = None;
        let op = Operation::from_fn(o.name.clone(), size, o.arity, |args| {
            let outer: Vec<u32> = args.iter().map(|&a| elements[a as usize]).collect();
            let v = o.term.eval(&meet, &join, &outer);
            if position[v as usize] == u32::MAX && escape.is_none() {
                escape = Some((outer, v));
            }
            position[v as usize].min(size as u32 - 1)
        })?;
        if let Some((args, v)) = escape {
            return Err(Error::Internal(format!(
                "subset not closed under `{}`: {:?} -> {v}",
                o.name, args
            )));
        }
        ops.push(op);
    }
    let algebra = Algebra::new(format!("{}|sub", lattice.name), size, ops)?;
    Ok(Subalgebra { elements, algebra })
}

/// `(C2)_P` for a set of lattice terms `P`.
pub fn two_element_reduct(spec: &ReductSpec) -> Result<Algebra> {
    let mut a = reduct(&chain(1)?, spec)?;
    let names: Vec<&str> = spec.ops.iter().map(|o| o.name.as_str()).collect();
    a.name = format!("C2[{}]", names.join(","));
    Ok(a)
}

/// `(C2, b)`
pub fn c2b() -> Algebra {
    let mut a = two_element_reduct(&ReductSpec::baker()).expect("fixed spec");
    a.name = "c2b".into();
    a
}

/// `(C2, u)`
pub fn c2u() -> Algebra {
    let mut a = two_element_reduct(&ReductSpec::nu4()).expect("fixed spec");
    a.name = "c2u".into();
    a
}

/// `(C2, meet, join)`
pub fn c2lat() -> Algebra {
    let mut a = chain(1).expect("fixed");
    a.name = "c2lat".into();
    a
}

/// `(C2, median)`
pub fn c2median() -> Algebra {
    let mut a = two_element_reduct(&ReductSpec::median()).expect("fixed spec");
    a.name = "c2median".into();
    a
}

/// The named two-element generators used throughout.
pub fn named_generators() -> Vec<(&'static str, Algebra)> {
    vec![("c2b", c2b()), ("c2u", c2u()), ("c2lat", c2lat()), ("c2median", c2median())]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn chains() {
        let c2 = chain(1).unwrap();
        assert_eq!(c2.op("meet").unwrap().table, vec![0, 0, 0, 1]);
        assert_eq!(chain(2).unwrap().apply("join", &[1, 2]).unwrap(), 2);
        assert!(chain(0).is_err());
    }

    #[test]
    fn reducts_of_c2() {
        let b = c2b();
        assert_eq!(b.op("b").unwrap().table, vec![0, 0, 0, 0, 0, 1, 1, 1]);
        let u = c2u();
        // u is a near-unanimity operation
        for x in 0..2 {
            for y in 0..2 {
                for pos in 0..4 {
                    let mut args = [x; 4];
                    args[pos] = y;
                    assert_eq!(u.apply("u", &args).unwrap(), x);
                }
            }
        }
        let l = chain(3).unwrap();
        let same = reduct(&l, &ReductSpec::lattice()).unwrap();
        assert_eq!(same.operations, l.operations);
        let bad = Algebra::new("x", 2, vec![]).unwrap();
        assert!(reduct(&bad, &ReductSpec::baker()).is_err());
    }

    #[test]
    fn u_with_repeated_first_argument_is_b() {
        let l = chain(3).unwrap();
        let u = reduct(&l, &ReductSpec::nu4()).unwrap();
        let b = reduct(&l, &ReductSpec::baker()).unwrap();
        for x in 0..4 {
            for y in 0..4 {
                for z in 0..4 {
                    assert_eq!(u.apply("u", &[x, x, y, z]).unwrap(), b.apply("b", &[x, y, z]).unwrap());
                }
            }
        }
    }

    #[test]
    fn printing() {
        assert_eq!(LatticeTerm::baker().to_string(), "x(y+z)");
        assert_eq!(LatticeTerm::median().to_string(), "xy+xz+yz");
        let t = Term::apply("b", vec![Term::var(0), Term::var(1), Term::apply("b", vec![Term::var(2), Term::var(0), Term::var(1)])]);
        assert_eq!(ReductSpec::baker().expand(&t).unwrap().to_string(), "x(y+z(x+y))");
    }

    #[test]
    fn restricted_reduct_detects_escape() {
        let l = chain(2).unwrap();
        assert!(reduct_on(&l, &ReductSpec::baker(), &[0, 2]).is_ok());
        let spec = ReductSpec::new(vec![("c", 1, LatticeTerm::var(0))]).unwrap();
        assert!(reduct_on(&l, &spec, &[1]).is_ok());
        let lat = ReductSpec::lattice();
        assert!(reduct_on(&l, &lat, &[0, 1]).is_ok());
        assert!(ReductSpec::new(vec![("b", 2, LatticeTerm::baker())]).is_err());
    }

    proptest! {
        // tables built from lattice terms agree with direct evaluation
        #[test]
        fn reduct_tables_match_terms(h in 1usize..4, args in proptest::collection::vec(0u32..4, 4)) {
            let l = chain(h).unwrap();
            let args: Vec<u32> = args.iter().map(|&a| a % (h as u32 + 1)).collect();
            let u = reduct(&l, &ReductSpec::nu4()).unwrap();
            let direct = LatticeTerm::nu4().eval(&|a, b| a.min(b), &|a, b| a.max(b), &args);
            prop_assert_eq!(u.apply("u", &args).unwrap(), direct);
            let m = reduct(&l, &ReductSpec::median()).unwrap();
            let mut s = args[..3].to_vec();
            s.sort();
            prop_assert_eq!(m.apply("median", &args[..3]).unwrap(), s[1]);
        }
    }
}
