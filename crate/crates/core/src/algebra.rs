//! Finite algebras given by operation tables.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limits::{check_table_len, Limits};
use crate::subpower::{compile, Subpower};

/// A named finitary operation. `table` is row-major with the first argument
/// most significant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Operation {
    pub name: String,
    pub arity: usize,
    pub table: Vec<u32>,
}

impl Operation {
    pub fn new(name: impl Into<String>, arity: usize, table: Vec<u32>) -> Self {
        Operation { name: name.into(), arity, table }
    }

    /// Tabulates `f` over all argument tuples of `size^arity`.
    pub fn from_fn(
        name: impl Into<String>,
        size: usize,
        arity: usize,
        mut f: impl FnMut(&[u32]) -> u32,
    ) -> Result<Self> {
        let len = check_table_len(size, arity)?;
        let mut args = vec![0u32; arity];
        let mut table = Vec::with_capacity(len);
        for _ in 0..len {
            table.push(f(&args));
            for a in args.iter_mut().rev() {
                *a += 1;
                if (*a as usize) < size {
                    break;
                }
                *a = 0;
            }
        }
        Ok(Operation::new(name, arity, table))
    }

    pub fn index_of(&self, size: usize, args: &[u32]) -> usize {
        args.iter().fold(0usize, |acc, &a| acc * size + a as usize)
    }

    fn validate(&self, size: usize) -> Result<()> {
        let expected = check_table_len(size, self.arity)?;
        if self.table.len() != expected {
            return Err(Error::TableLength {
                op: self.name.clone(),
                got: self.table.len(),
                expected,
            });
        }
        if let Some((index, &value)) =
            self.table.iter().enumerate().find(|(_, &v)| v as usize >= size)
        {
            return Err(Error::TableEntry { op: self.name.clone(), index, value, size });
        }
        Ok(())
    }
}

/// A finite algebra on `{0, .., size-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Algebra {
    pub name: String,
    pub size: usize,
    pub operations: Vec<Operation>,
}

#[derive(Deserialize)]
struct AlgebraFile {
    #[serde(default)]
    name: String,
    size: usize,
    operations: Vec<Operation>,
}

impl Algebra {
    pub fn new(name: impl Into<String>, size: usize, operations: Vec<Operation>) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidParameter("algebra size must be at least 1".into()));
        }
        if size > u32::MAX as usize {
            return Err(Error::Resource("universe too large".into()));
        }
        let mut names = BTreeSet::new();
        for op in &operations {
            if !names.insert(op.name.as_str()) {
                return Err(Error::DuplicateOperation(op.name.clone()));
            }
            op.validate(size)?;
        }
        Ok(Algebra { name: name.into(), size, operations })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: AlgebraFile = serde_json::from_str(text)?;
        Algebra::new(f.name, f.size, f.operations)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("algebra serializes")
    }

    pub fn op(&self, name: &str) -> Option<&Operation> {
        self.operations.iter().find(|o| o.name == name)
    }

    pub fn op_index(&self, name: &str) -> Result<usize> {
        self.operations
            .iter()
            .position(|o| o.name == name)
            .ok_or_else(|| Error::UnknownOperation(name.to_string()))
    }

    /// Names and arities in declaration order.
    pub fn signature(&self) -> Vec<(String, usize)> {
        self.operations.iter().map(|o| (o.name.clone(), o.arity)).collect()
    }

    fn check_element(&self, x: u32) -> Result<()> {
        if (x as usize) < self.size {
            Ok(())
        } else {
            Err(Error::OutOfRange { value: x as usize, size: self.size })
        }
    }

    pub fn apply(&self, op: &str, args: &[u32]) -> Result<u32> {
        let o = self.op(op).ok_or_else(|| Error::UnknownOperation(op.to_string()))?;
        if args.len() != o.arity {
            return Err(Error::Arity { op: op.to_string(), expected: o.arity, got: args.len() });
        }
        for &a in args {
            self.check_element(a)?;
        }
        Ok(o.table[o.index_of(self.size, args)])
    }

    pub(crate) fn apply_index(&self, op: usize, args: &[u32]) -> u32 {
        let o = &self.operations[op];
        o.table[o.index_of(self.size, args)]
    }

    pub fn eval_term(&self, t: &Term, assignment: &[u32]) -> Result<u32> {
        match t {
            Term::Var(i) => {
                let v = *assignment.get(*i).ok_or_else(|| {
                    Error::InvalidParameter(format!("assignment does not cover variable {i}"))
                })?;
                self.check_element(v)?;
                Ok(v)
            }
            Term::Apply(name, children) => {
                let args = children
                    .iter()
                    .map(|c| self.eval_term(c, assignment))
                    .collect::<Result<Vec<_>>>()?;
                self.apply(name, &args)
            }
        }
    }

    /// The set of elements reachable from `seed`, with its induced subalgebra.
    pub fn subuniverse_closure(&self, seed: &[u32]) -> Result<Subalgebra> {
        for &s in seed {
            self.check_element(s)?;
        }
        let diagrams = compile(self);
        let gens: Vec<Vec<u32>> = seed.iter().map(|&s| vec![s]).collect();
        let sp = Subpower::generate(&diagrams, 1, &gens, Limits::unlimited())?;
        let mut elements: Vec<u32> = (0..sp.len() as u32).map(|i| sp.element(i)[0]).collect();
        elements.sort_unstable();
        self.induced(&elements)
    }

    /// The subalgebra on a set assumed to be closed. Fails if it is not.
    pub fn induced(&self, elements: &[u32]) -> Result<Subalgebra> {
        let mut elements = elements.to_vec();
        elements.sort_unstable();
        elements.dedup();
        if elements.is_empty() {
            return Err(Error::InvalidParameter("the empty subuniverse carries no algebra".into()));
        }
        let mut position = vec![u32::MAX; self.size];
        for (i, &e) in elements.iter().enumerate() {
            self.check_element(e)?;
            position[e as usize] = i as u32;
        }
        let m = elements.len();
        let mut ops = Vec::with_capacity(self.operations.len());
        for (oi, op) in self.operations.iter().enumerate() {
            let mut escaped = None;
            let sub = Operation::from_fn(op.name.clone(), m, op.arity, |args| {
                let outer: Vec<u32> = args.iter().map(|&a| elements[a as usize]).collect();
                let v = self.apply_index(oi, &outer);
                let p = position[v as usize];
                if p == u32::MAX && escaped.is_none() {
                    escaped = Some((outer, v));
                }
                p.min(m as u32 - 1)
            })?;
            if let Some((args, v)) = escaped {
                return Err(Error::Internal(format!(
                    "set is not closed: {}({:?}) = {v}",
                    op.name, args
                )));
            }
            ops.push(sub);
        }
        let algebra = Algebra::new(format!("{}|sub", self.name), m, ops)?;
        Ok(Subalgebra { elements, algebra })
    }
}

/// A subuniverse together with its re-indexed algebra. Element `i` of
/// `algebra` is `elements[i]` of the parent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subalgebra {
    pub elements: Vec<u32>,
    pub algebra: Algebra,
}

impl Subalgebra {
    pub fn index_of(&self, parent: u32) -> Option<u32> {
        self.elements.binary_search(&parent).ok().map(|i| i as u32)
    }
}

/// Coordinatewise product; element encoding is mixed radix with the first
/// factor most significant.
pub fn direct_product(algs: &[Algebra]) -> Result<Algebra> {
    let first = algs
        .first()
        .ok_or_else(|| Error::InvalidParameter("empty list of factors".into()))?;
    let sig = first.signature();
    for a in &algs[1..] {
        if a.signature() != sig {
            return Err(Error::SignatureMismatch(format!(
                "{} and {} have different operations",
                first.name, a.name
            )));
        }
    }
    let sizes: Vec<usize> = algs.iter().map(|a| a.size).collect();
    let size = sizes
        .iter()
        .try_fold(1usize, |acc, &s| acc.checked_mul(s).filter(|&v| v <= u32::MAX as usize))
        .ok_or_else(|| Error::Resource("product universe too large".into()))?;
    let decode = |mut x: u32| -> Vec<u32> {
        let mut out = vec![0; sizes.len()];
        for (i, &s) in sizes.iter().enumerate().rev() {
            out[i] = x % s as u32;
            x /= s as u32;
        }
        out
    };
    let mut ops = Vec::new();
    for (oi, (name, arity)) in sig.iter().enumerate() {
        let op = Operation::from_fn(name.clone(), size, *arity, |args| {
            let coords: Vec<Vec<u32>> = args.iter().map(|&a| decode(a)).collect();
            let mut v = 0u32;
            for (f, a) in algs.iter().enumerate() {
                let fa: Vec<u32> = coords.iter().map(|c| c[f]).collect();
                v = v * a.size as u32 + a.apply_index(oi, &fa);
            }
            v
        })?;
        ops.push(op);
    }
    let name = algs.iter().map(|a| a.name.as_str()).collect::<Vec<_>>().join("x");
    Algebra::new(name, size, ops)
}

/// Decodes a mixed-radix product element into its coordinates.
pub fn product_coords(sizes: &[usize], mut x: u32) -> Vec<u32> {
    let mut out = vec![0; sizes.len()];
    for (i, &s) in sizes.iter().enumerate().rev() {
        out[i] = x % s as u32;
        x /= s as u32;
    }
    out
}

/// Encodes coordinates into a mixed-radix product element.
pub fn product_encode(sizes: &[usize], coords: &[u32]) -> u32 {
    sizes.iter().zip(coords).fold(0u32, |acc, (&s, &c)| acc * s as u32 + c)
}

/// A term: a variable or an operation symbol applied to subterms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(usize),
    Apply(String, Vec<Term>),
}

impl Term {
    pub fn var(i: usize) -> Term {
        Term::Var(i)
    }

    pub fn apply(name: impl Into<String>, args: Vec<Term>) -> Term {
        Term::Apply(name.into(), args)
    }

    /// Checks arities against `alg` and variable indices against `vars`.
    pub fn validate(&self, alg: &Algebra, vars: usize) -> Result<()> {
        match self {
            Term::Var(i) if *i < vars => Ok(()),
            Term::Var(i) => Err(Error::InvalidParameter(format!(
                "variable {i} exceeds declared count {vars}"
            ))),
            Term::Apply(name, args) => {
                let op = alg.op(name).ok_or_else(|| Error::UnknownOperation(name.clone()))?;
                if op.arity != args.len() {
                    return Err(Error::Arity {
                        op: name.clone(),
                        expected: op.arity,
                        got: args.len(),
                    });
                }
                args.iter().try_for_each(|a| a.validate(alg, vars))
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::Apply(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }
}

/// Conventional variable names: x, y, z, w, then x4, x5, ...
pub fn var_name(i: usize) -> String {
    match i {
        0 => "x".into(),
        1 => "y".into(),
        2 => "z".into(),
        3 => "w".into(),
        _ => format!("x{i}"),
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(i) => write!(f, "{}", var_name(*i)),
            Term::Apply(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meet2() -> Algebra {
        Algebra::new("sl", 2, vec![Operation::new("meet", 2, vec![0, 0, 0, 1])]).unwrap()
    }

    fn c2b() -> Algebra {
        let b = Operation::from_fn("b", 2, 3, |a| a[0] & (a[1] | a[2])).unwrap();
        Algebra::new("c2b", 2, vec![b]).unwrap()
    }

    fn c2u() -> Algebra {
        let u = Operation::from_fn("u", 2, 4, |a| {
            let mut v = 1;
            for i in 0..4 {
                for j in i + 1..4 {
                    v &= a[i] | a[j];
                }
            }
            v
        })
        .unwrap();
        Algebra::new("c2u", 2, vec![u]).unwrap()
    }

    #[test]
    fn make_algebra_validates() {
        assert_eq!(meet2().size, 2);
        let short = Operation::new("b", 3, vec![0; 7]);
        assert!(matches!(Algebra::new("x", 2, vec![short]), Err(Error::TableLength { .. })));
        let bad = Operation::new("m", 2, vec![0, 0, 0, 2]);
        assert!(matches!(Algebra::new("x", 2, vec![bad]), Err(Error::TableEntry { .. })));
        let dup = vec![Operation::new("m", 1, vec![0, 1]), Operation::new("m", 1, vec![1, 0])];
        assert!(matches!(Algebra::new("x", 2, dup), Err(Error::DuplicateOperation(_))));
        assert!(Algebra::new("x", 0, vec![]).is_err());
    }

    #[test]
    fn apply_examples() {
        let b = c2b();
        assert_eq!(b.apply("b", &[1, 0, 1]).unwrap(), 1);
        assert_eq!(b.apply("b", &[0, 1, 1]).unwrap(), 0);
        assert_eq!(c2u().apply("u", &[1, 1, 0, 0]).unwrap(), 0);
        assert!(matches!(b.apply("c", &[0]), Err(Error::UnknownOperation(_))));
        assert!(matches!(b.apply("b", &[0, 1]), Err(Error::Arity { .. })));
        assert!(matches!(b.apply("b", &[0, 1, 2]), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn eval_term_examples() {
        let b = c2b();
        let x = |i| Term::Var(i);
        assert_eq!(b.eval_term(&x(0), &[1, 0]).unwrap(), 1);
        let t = Term::apply("b", vec![x(0), x(1), x(2)]);
        assert_eq!(b.eval_term(&t, &[1, 1, 0]).unwrap(), 1);
        let inner = Term::apply("b", vec![x(0), x(2), x(1)]);
        let t = Term::apply("b", vec![inner, x(2), x(2)]);
        assert_eq!(b.eval_term(&t, &[1, 0, 1]).unwrap(), 1);
        assert_eq!(t.to_string(), "b(b(x,z,y),z,z)");
    }

    #[test]
    fn product_sizes_and_mismatch() {
        let m = meet2();
        let p = direct_product(&[m.clone(), m.clone(), m.clone()]).unwrap();
        assert_eq!(p.size, 8);
        let one = direct_product(&[m.clone()]).unwrap();
        assert_eq!(one.operations, m.operations);
        assert!(matches!(direct_product(&[c2b(), c2u()]), Err(Error::SignatureMismatch(_))));
        assert!(direct_product(&[]).is_err());
    }

    #[test]
    fn closure_in_power_of_b() {
        // (C2,b)^4 realised as a product; x = (0,0,1,1), y = (0,1,0,1)
        let b = c2b();
        let p = direct_product(&[b.clone(), b.clone(), b.clone(), b.clone()]).unwrap();
        let x = product_encode(&[2; 4], &[0, 0, 1, 1]);
        let y = product_encode(&[2; 4], &[0, 1, 0, 1]);
        let sub = p.subuniverse_closure(&[x, y]).unwrap();
        assert_eq!(sub.elements.len(), 3);
        let xy = product_encode(&[2; 4], &[0, 0, 0, 1]);
        assert!(sub.index_of(xy).is_some());
        assert_eq!(sub.algebra.size, 3);
    }

    #[test]
    fn json_round_trip() {
        let a = c2u();
        let back = Algebra::from_json(&a.to_json()).unwrap();
        assert_eq!(a, back);
        assert!(Algebra::from_json("{\"size\":2,\"operations\":[{\"name\":\"b\",\"arity\":3,\"table\":[0]}]}").is_err());
    }
}
