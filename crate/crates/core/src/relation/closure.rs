//! Closures of relations under the operations of an algebra, and the
//! matching predicates.

use std::fmt;

use crate::algebra::Algebra;
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::relation::binrel::BinRel;
use crate::relation::expr::Role;
use crate::subpower::{compile, Subpower};

/// An operation applied to two tuples of related elements whose images are
/// not related.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub op: String,
    pub left: Vec<u32>,
    pub right: Vec<u32>,
    pub image: (u32, u32),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |v: &[u32]| v.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
        write!(
            f,
            "{op}({}) = {} but {op}({}) = {} and the pair ({}, {}) is missing",
            show(&self.left),
            self.image.0,
            show(&self.right),
            self.image.1,
            self.image.0,
            self.image.1,
            op = self.op
        )
    }
}

/// Why a relation fails a predicate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Counterexample {
    NotReflexive(u32),
    NotSymmetric(u32, u32),
    NotTransitive(u32, u32, u32),
    NotCompatible(Violation),
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Counterexample::NotReflexive(x) => write!(f, "({x}, {x}) is missing"),
            Counterexample::NotSymmetric(a, b) => write!(f, "({a}, {b}) present but ({b}, {a}) missing"),
            Counterexample::NotTransitive(a, b, c) => {
                write!(f, "({a}, {b}) and ({b}, {c}) present but ({a}, {c}) missing")
            }
            Counterexample::NotCompatible(v) => write!(f, "{v}"),
        }
    }
}

/// Outcome of a predicate test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub counterexample: Option<Counterexample>,
}

impl Check {
    pub fn holds(&self) -> bool {
        self.counterexample.is_none()
    }

    fn ok() -> Self {
        Check { counterexample: None }
    }

    fn fail(c: Counterexample) -> Self {
        Check { counterexample: Some(c) }
    }
}

/// Anything relations can be closed over: a finite algebra, or a free
/// algebra handled through its embedding in a power.
pub trait Structure {
    fn size(&self) -> usize;

    /// Least reflexive compatible relation containing `seed`.
    fn admissible_closure(&self, seed: &BinRel) -> Result<BinRel>;

    /// Least congruence containing `seed`.
    fn congruence_closure(&self, seed: &BinRel) -> Result<BinRel>;

    /// A tuple of related pairs whose image escapes `r`, if any.
    fn compatibility_violation(&self, r: &BinRel) -> Result<Option<Violation>>;

    /// Same as [`Structure::compatibility_violation`] for an `r` already known
    /// to be an equivalence relation.
    fn equivalence_violation(&self, r: &BinRel) -> Result<Option<Violation>> {
        self.compatibility_violation(r)
    }

    /// Least tolerance containing `seed`. Swapping coordinates is an
    /// automorphism of the square, so the admissible closure of a symmetric
    /// set is symmetric.
    fn tolerance_closure(&self, seed: &BinRel) -> Result<BinRel> {
        self.admissible_closure(&seed.union_raw(&seed.converse())?)
    }

    fn closure(&self, role: Role, seed: &BinRel) -> Result<BinRel> {
        match role {
            Role::Congruence => self.congruence_closure(seed),
            Role::Tolerance => self.tolerance_closure(seed),
            Role::Admissible => self.admissible_closure(seed),
        }
    }
}

fn check_size(s: &impl Structure, r: &BinRel) -> Result<()> {
    if s.size() == r.size() {
        Ok(())
    } else {
        Err(Error::SizeMismatch(s.size(), r.size()))
    }
}

fn reflexivity(r: &BinRel) -> Option<Counterexample> {
    (0..r.size()).find(|&i| !r.contains(i, i)).map(|i| Counterexample::NotReflexive(i as u32))
}

fn symmetry(r: &BinRel) -> Option<Counterexample> {
    r.pairs()
        .find(|&(a, b)| !r.contains(b, a))
        .map(|(a, b)| Counterexample::NotSymmetric(a as u32, b as u32))
}

fn transitivity(r: &BinRel) -> Option<Counterexample> {
    for (a, b) in r.pairs() {
        if let Some(c) = r.successors(b).find(|&c| !r.contains(a, c)) {
            return Some(Counterexample::NotTransitive(a as u32, b as u32, c as u32));
        }
    }
    None
}

pub fn is_admissible(s: &impl Structure, r: &BinRel) -> Result<Check> {
    check_size(s, r)?;
    if let Some(c) = reflexivity(r) {
        return Ok(Check::fail(c));
    }
    Ok(match s.compatibility_violation(r)? {
        Some(v) => Check::fail(Counterexample::NotCompatible(v)),
        None => Check::ok(),
    })
}

pub fn is_tolerance(s: &impl Structure, r: &BinRel) -> Result<Check> {
    check_size(s, r)?;
    if let Some(c) = reflexivity(r).or_else(|| symmetry(r)) {
        return Ok(Check::fail(c));
    }
    is_admissible(s, r)
}

pub fn is_congruence(s: &impl Structure, r: &BinRel) -> Result<Check> {
    check_size(s, r)?;
    if let Some(c) = reflexivity(r).or_else(|| symmetry(r)).or_else(|| transitivity(r)) {
        return Ok(Check::fail(c));
    }
    Ok(match s.equivalence_violation(r)? {
        Some(v) => Check::fail(Counterexample::NotCompatible(v)),
        None => Check::ok(),
    })
}

pub fn check_role(s: &impl Structure, r: &BinRel, role: Role) -> Result<Check> {
    match role {
        Role::Congruence => is_congruence(s, r),
        Role::Tolerance => is_tolerance(s, r),
        Role::Admissible => is_admissible(s, r),
    }
}

pub fn admissible_closure(s: &impl Structure, seed: &BinRel) -> Result<BinRel> {
    check_size(s, seed)?;
    s.admissible_closure(seed)
}

pub fn tolerance_closure(s: &impl Structure, seed: &BinRel) -> Result<BinRel> {
    check_size(s, seed)?;
    s.tolerance_closure(seed)
}

pub fn congruence_closure(s: &impl Structure, seed: &BinRel) -> Result<BinRel> {
    check_size(s, seed)?;
    s.congruence_closure(seed)
}

/// Disjoint-set forest with path halving.
#[derive(Debug, Clone)]
pub(crate) struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n as u32).collect() }
    }

    pub fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    pub fn union(&mut self, a: u32, b: u32) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi as usize] = lo;
        true
    }

    pub fn relation(&mut self) -> BinRel {
        let n = self.parent.len();
        let roots: Vec<u32> = (0..n as u32).map(|x| self.find(x)).collect();
        BinRel::kernel(n, |i| roots[i])
    }
}

impl Structure for Algebra {
    fn size(&self) -> usize {
        self.size
    }

    fn admissible_closure(&self, seed: &BinRel) -> Result<BinRel> {
        check_size(self, seed)?;
        let diagrams = compile(self);
        let mut gens: Vec<Vec<u32>> = (0..self.size as u32).map(|x| vec![x, x]).collect();
        gens.extend(seed.pairs().map(|(a, b)| vec![a as u32, b as u32]));
        let sp = Subpower::generate(&diagrams, 2, &gens, Limits::unlimited())?;
        let mut out = BinRel::empty(self.size);
        for i in 0..sp.len() as u32 {
            let p = sp.element(i);
            out.insert(p[0] as usize, p[1] as usize);
        }
        Ok(out)
    }

    /// Union-find over the universe; every merged pair is pushed through all
    /// unary translations until nothing new merges.
    fn congruence_closure(&self, seed: &BinRel) -> Result<BinRel> {
        check_size(self, seed)?;
        let n = self.size;
        let mut uf = UnionFind::new(n);
        let mut queue: Vec<(u32, u32)> = Vec::new();
        for (a, b) in seed.pairs() {
            if uf.union(a as u32, b as u32) {
                queue.push((a as u32, b as u32));
            }
        }
        while let Some((a, b)) = queue.pop() {
            for op in &self.operations {
                let r = op.arity;
                for i in 0..r {
                    let stride = n.pow((r - 1 - i) as u32);
                    let blocks = n.pow(i as u32);
                    for hi in 0..blocks {
                        for lo in 0..stride {
                            let base = hi * n * stride + lo;
                            let va = op.table[base + a as usize * stride];
                            let vb = op.table[base + b as usize * stride];
                            if va != vb && uf.union(va, vb) {
                                queue.push((va, vb));
                            }
                        }
                    }
                }
            }
        }
        Ok(uf.relation())
    }

    /// An equivalence is compatible iff it is compatible in each argument
    /// with the others fixed, so every entry is compared with the entry at
    /// its class representative, one position at a time.
    fn equivalence_violation(&self, r: &BinRel) -> Result<Option<Violation>> {
        check_size(self, r)?;
        let n = self.size;
        let rep: Vec<usize> = (0..n).map(|x| r.successors(x).next().unwrap_or(x)).collect();
        for op in &self.operations {
            let k = op.arity;
            for i in 0..k {
                let stride = n.pow((k - 1 - i) as u32);
                for (idx, &v) in op.table.iter().enumerate() {
                    let a = (idx / stride) % n;
                    if rep[a] == a {
                        continue;
                    }
                    let j = idx - (a - rep[a]) * stride;
                    let w = op.table[j];
                    if !r.contains(w as usize, v as usize) {
                        let args = |mut x: usize| {
                            let mut out = vec![0u32; k];
                            for slot in out.iter_mut().rev() {
                                *slot = (x % n) as u32;
                                x /= n;
                            }
                            out
                        };
                        return Ok(Some(Violation {
                            op: op.name.clone(),
                            left: args(j),
                            right: args(idx),
                            image: (w, v),
                        }));
                    }
                }
            }
        }
        Ok(None)
    }

    fn compatibility_violation(&self, r: &BinRel) -> Result<Option<Violation>> {
        check_size(self, r)?;
        let diagrams = compile(self);
        let members: Vec<Vec<u32>> = r.pairs().map(|(a, b)| vec![a as u32, b as u32]).collect();
        let esc = Subpower::image_escape(&diagrams, 2, &members, Limits::unlimited())?;
        Ok(esc.map(|e| Violation {
            op: self.operations[e.op].name.clone(),
            left: e.args.iter().map(|&i| members[i as usize][0]).collect(),
            right: e.args.iter().map(|&i| members[i as usize][1]).collect(),
            image: (e.image[0], e.image[1]),
        }))
    }
}

/// Admissible closure by repeated passes over all tuples of pairs. Slow; kept
/// as the reference the fast path is tested against.
pub fn admissible_closure_naive(alg: &Algebra, seed: &BinRel) -> Result<BinRel> {
    check_size(alg, seed)?;
    let mut rel = seed.union_raw(&BinRel::diagonal(alg.size))?;
    loop {
        let pairs: Vec<(usize, usize)> = rel.pairs().collect();
        let mut next = rel.clone();
        for (oi, op) in alg.operations.iter().enumerate() {
            let mut idx = vec![0usize; op.arity];
            if op.arity == 0 {
                let c = op.table[0] as usize;
                next.insert(c, c);
                continue;
            }
            'tuples: loop {
                let left: Vec<u32> = idx.iter().map(|&k| pairs[k].0 as u32).collect();
                let right: Vec<u32> = idx.iter().map(|&k| pairs[k].1 as u32).collect();
                next.insert(
                    alg.apply_index(oi, &left) as usize,
                    alg.apply_index(oi, &right) as usize,
                );
                for d in (0..op.arity).rev() {
                    idx[d] += 1;
                    if idx[d] < pairs.len() {
                        continue 'tuples;
                    }
                    idx[d] = 0;
                }
                break;
            }
        }
        if next == rel {
            return Ok(rel);
        }
        rel = next;
    }
}

/// Every congruence of a small algebra, ordered by the restricted growth
/// string of its partition.
pub fn all_congruences(alg: &Algebra) -> Result<Vec<BinRel>> {
    const MAX: usize = 6;
    if alg.size > MAX {
        return Err(Error::Resource(format!(
            "all_congruences is limited to algebras with at most {MAX} elements"
        )));
    }
    let n = alg.size;
    let mut out = Vec::new();
    let mut rgs = vec![0usize; n];
    loop {
        let theta = BinRel::kernel(n, |i| rgs[i]);
        if alg.congruence_closure(&theta)? == theta {
            out.push(theta);
        }
        // next restricted growth string
        let mut i = n;
        loop {
            if i <= 1 {
                return Ok(out);
            }
            i -= 1;
            let max_prefix = rgs[..i].iter().copied().max().unwrap_or(0);
            if rgs[i] <= max_prefix {
                rgs[i] += 1;
                for r in rgs.iter_mut().skip(i + 1) {
                    *r = 0;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Operation;
    use proptest::prelude::*;

    fn c2b() -> Algebra {
        let b = Operation::from_fn("b", 2, 3, |a| a[0] & (a[1] | a[2])).unwrap();
        Algebra::new("c2b", 2, vec![b]).unwrap()
    }

    fn chain3() -> Algebra {
        let meet = Operation::from_fn("meet", 3, 2, |a| a[0].min(a[1])).unwrap();
        let join = Operation::from_fn("join", 3, 2, |a| a[0].max(a[1])).unwrap();
        Algebra::new("c3", 3, vec![meet, join]).unwrap()
    }

    #[test]
    fn admissible_closure_of_order_pair() {
        let a = c2b();
        let seed = BinRel::from_pairs(2, [(0, 1)]).unwrap();
        let r = admissible_closure(&a, &seed).unwrap();
        assert_eq!(r.pair_list(), vec![[0, 0], [0, 1], [1, 1]]);
        assert_eq!(admissible_closure(&a, &BinRel::diagonal(2)).unwrap(), BinRel::diagonal(2));
        assert!(is_admissible(&a, &r).unwrap().holds());
        assert!(!is_tolerance(&a, &r).unwrap().holds());
    }

    #[test]
    fn two_element_congruences() {
        let a = c2b();
        let seed = BinRel::from_pairs(2, [(0, 1)]).unwrap();
        assert_eq!(congruence_closure(&a, &seed).unwrap(), BinRel::full(2));
        assert_eq!(all_congruences(&a).unwrap(), vec![BinRel::full(2), BinRel::diagonal(2)]);
        assert_eq!(tolerance_closure(&a, &BinRel::diagonal(2)).unwrap(), BinRel::diagonal(2));
    }

    #[test]
    fn three_chain_has_four_congruences() {
        let c = chain3();
        let cons = all_congruences(&c).unwrap();
        assert_eq!(cons.len(), 4);
        // {0,2} alone is not a congruence of a chain
        let bad = BinRel::kernel(3, |i| i == 1);
        let check = is_congruence(&c, &bad).unwrap();
        assert!(matches!(check.counterexample, Some(Counterexample::NotCompatible(_))));
        assert!(!cons.contains(&bad));
    }

    #[test]
    fn predicate_counterexamples() {
        let a = c2b();
        let r = BinRel::from_pairs(2, [(0, 0), (0, 1)]).unwrap();
        assert_eq!(is_admissible(&a, &r).unwrap().counterexample, Some(Counterexample::NotReflexive(1)));
        let r = BinRel::from_pairs(2, [(0, 0), (1, 1), (0, 1)]).unwrap();
        assert_eq!(is_tolerance(&a, &r).unwrap().counterexample, Some(Counterexample::NotSymmetric(0, 1)));
        for s in [is_admissible, is_tolerance, is_congruence] {
            assert!(s(&a, &BinRel::diagonal(2)).unwrap().holds());
        }
        assert!(is_admissible(&a, &BinRel::diagonal(3)).is_err());
    }

    fn arb_algebra() -> impl Strategy<Value = Algebra> {
        (1usize..=3).prop_flat_map(|n| {
            (
                proptest::collection::vec(0..n as u32, n * n),
                proptest::collection::vec(0..n as u32, n * n * n),
            )
                .prop_map(move |(f, g)| {
                    Algebra::new(
                        "rand",
                        n,
                        vec![Operation::new("f", 2, f), Operation::new("g", 3, g)],
                    )
                    .unwrap()
                })
        })
    }

    fn arb_seed(n: usize) -> impl Strategy<Value = BinRel> {
        proptest::collection::vec((0..n, 0..n), 0..4)
            .prop_map(move |ps| BinRel::from_pairs(n, ps).unwrap())
    }

    proptest! {
        #[test]
        fn equivalence_shortcut_matches_full_sweep((a, labels) in arb_algebra().prop_flat_map(|a| {
            let n = a.size;
            (Just(a), proptest::collection::vec(0..n, n))
        })) {
            let r = BinRel::kernel(a.size, |x| labels[x]);
            let fast = a.equivalence_violation(&r).unwrap();
            let slow = a.compatibility_violation(&r).unwrap();
            prop_assert_eq!(fast.is_some(), slow.is_some());
            if let Some(v) = fast {
                prop_assert!(v.left.iter().zip(&v.right).all(|(&x, &y)| r.contains(x as usize, y as usize)));
                prop_assert_eq!(a.apply(&v.op, &v.left).unwrap(), v.image.0);
                prop_assert_eq!(a.apply(&v.op, &v.right).unwrap(), v.image.1);
                prop_assert!(!r.contains(v.image.0 as usize, v.image.1 as usize));
            }
        }

        #[test]
        fn semi_naive_equals_naive((a, seed) in arb_algebra().prop_flat_map(|a| {
            let n = a.size;
            (Just(a), arb_seed(n))
        })) {
            let fast = admissible_closure(&a, &seed).unwrap();
            prop_assert_eq!(&fast, &admissible_closure_naive(&a, &seed).unwrap());
            prop_assert!(is_admissible(&a, &fast).unwrap().holds());
            prop_assert_eq!(admissible_closure(&a, &fast).unwrap(), fast);
        }

        #[test]
        fn congruence_closure_is_least_congruence((a, seed) in arb_algebra().prop_flat_map(|a| {
            let n = a.size;
            (Just(a), arb_seed(n))
        })) {
            let c = congruence_closure(&a, &seed).unwrap();
            prop_assert!(is_congruence(&a, &c).unwrap().holds());
            let least = all_congruences(&a).unwrap()
                .into_iter()
                .filter(|t| seed.is_subset(t))
                .min_by_key(|t| t.len())
                .unwrap();
            prop_assert_eq!(c, least);
        }

        #[test]
        fn tolerance_closure_is_tolerance((a, seed) in arb_algebra().prop_flat_map(|a| {
            let n = a.size;
            (Just(a), arb_seed(n))
        })) {
            let t = tolerance_closure(&a, &seed).unwrap();
            prop_assert!(is_tolerance(&a, &t).unwrap().holds());
            prop_assert!(seed.is_subset(&t));
            prop_assert!(t.is_subset(&congruence_closure(&a, &seed).unwrap()));
        }

        #[test]
        fn closures_are_monotone((a, s1, s2) in arb_algebra().prop_flat_map(|a| {
            let n = a.size;
            (Just(a), arb_seed(n), arb_seed(n))
        })) {
            let big = s1.union_raw(&s2).unwrap();
            for role in [Role::Admissible, Role::Tolerance, Role::Congruence] {
                let small = a.closure(role, &s1).unwrap();
                let large = a.closure(role, &big).unwrap();
                prop_assert!(small.is_subset(&large));
                prop_assert_eq!(a.closure(role, &small).unwrap(), small);
            }
        }
    }
}
