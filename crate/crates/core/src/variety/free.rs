//! Free algebras of the variety generated by a finite algebra, realized as
//! the subalgebra of `A^(A^k)` generated by the projections.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::algebra::{Algebra, Operation, Term};
use crate::error::{Error, Result};
use crate::limits::{check_table_len, Limits, MAX_RELATION_UNIVERSE};
use crate::relation::closure::{Structure, UnionFind, Violation};
use crate::relation::BinRel;
use crate::subpower::{compile, Diagram, Interner, Origin, Subpower};

/// `F(k)` for the variety generated by `base`. Element `i` is the term
/// operation `A^k -> A` stored as its value vector, points in mixed radix
/// with the first variable most significant.
pub struct FreeAlgebra {
    pub base: Algebra,
    pub arity: usize,
    points: usize,
    elems: Interner,
    origin: Vec<Origin>,
    generators: Vec<u32>,
    diagrams: Vec<Diagram>,
    limits: Limits,
    /// Arity minus one of a near-unanimity basic operation of the base.
    nu_width: Option<usize>,
    view: OnceLock<Option<Algebra>>,
}

impl std::fmt::Debug for FreeAlgebra {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FreeAlgebra")
            .field("base", &self.base.name)
            .field("arity", &self.arity)
            .field("size", &self.len())
            .finish()
    }
}

/// Value vector of the `i`-th of `k` projections on `A^k`.
pub fn projection(size: usize, k: usize, i: usize) -> Vec<u32> {
    let stride = size.pow((k - 1 - i) as u32);
    (0..size.pow(k as u32)).map(|p| ((p / stride) % size) as u32).collect()
}

type CacheKey = (String, usize, Limits);

fn cache() -> &'static Mutex<HashMap<CacheKey, Arc<FreeAlgebra>>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, Arc<FreeAlgebra>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// `F(k)` under the environment limits. Results are shared for the life of
/// the process, keyed by the base tables.
pub fn free_algebra(base: &Algebra, k: usize) -> Result<Arc<FreeAlgebra>> {
    let limits = Limits::from_env();
    let key = (base.to_json(), k, limits);
    if let Some(f) = cache().lock().expect("cache lock").get(&key) {
        return Ok(f.clone());
    }
    let f = Arc::new(FreeAlgebra::with_limits(base, k, limits)?);
    cache().lock().expect("cache lock").entry(key).or_insert(f.clone());
    Ok(f)
}

/// Drops every cached free algebra.
pub fn clear_free_algebra_cache() {
    cache().lock().expect("cache lock").clear();
}

impl FreeAlgebra {
    pub fn with_limits(base: &Algebra, k: usize, limits: Limits) -> Result<FreeAlgebra> {
        if k == 0 {
            return Err(Error::InvalidParameter("a free algebra needs at least one generator".into()));
        }
        let points = vector_len(base.size, k)?;
        let diagrams = compile(base);
        let gens: Vec<Vec<u32>> = (0..k).map(|i| projection(base.size, k, i)).collect();
        let sp = Subpower::generate(&diagrams, points, &gens, limits)?;
        let generators = gens.iter().map(|g| sp.find(g).expect("generator present")).collect();
        let (elems, origin, _) = sp.into_parts();
        Ok(FreeAlgebra {
            base: base.clone(),
            arity: k,
            points,
            elems,
            origin,
            generators,
            diagrams,
            limits,
            nu_width: near_unanimity_width(base),
            view: OnceLock::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of points of `A^k`, the length of every value vector.
    pub fn points(&self) -> usize {
        self.points
    }

    pub fn element(&self, i: u32) -> &[u32] {
        self.elems.get(i)
    }

    pub fn elements(&self) -> impl Iterator<Item = &[u32]> + '_ {
        (0..self.len() as u32).map(|i| self.elems.get(i))
    }

    pub fn index_of(&self, vector: &[u32]) -> Option<u32> {
        self.elems.find(vector)
    }

    /// Element of the `i`-th generator.
    pub fn generator(&self, i: usize) -> u32 {
        self.generators[i]
    }

    pub fn generators(&self) -> &[u32] {
        &self.generators
    }

    /// A term over `x0 .. x(k-1)` whose term operation is element `i`.
    pub fn witness(&self, i: u32) -> Term {
        match &self.origin[i as usize] {
            Origin::Generator(g) => Term::Var(*g),
            Origin::Apply { op, args } => Term::Apply(
                self.base.operations[*op].name.clone(),
                args.iter().map(|&a| self.witness(a)).collect(),
            ),
        }
    }

    /// Element represented by a term, evaluated pointwise.
    pub fn element_of_term(&self, t: &Term) -> Result<u32> {
        t.validate(&self.base, self.arity)?;
        let v = self.term_vector(t);
        self.index_of(&v)
            .ok_or_else(|| Error::Internal(format!("term {t} evaluates outside the free algebra")))
    }

    fn term_vector(&self, t: &Term) -> Vec<u32> {
        match t {
            Term::Var(i) => self.element(self.generators[*i]).to_vec(),
            Term::Apply(name, args) => {
                let op = self.base.op_index(name).expect("validated");
                let vs: Vec<Vec<u32>> = args.iter().map(|a| self.term_vector(a)).collect();
                let mut buf = vec![0; args.len()];
                (0..self.points)
                    .map(|p| {
                        for (b, v) in buf.iter_mut().zip(&vs) {
                            *b = v[p];
                        }
                        self.base.apply_index(op, &buf)
                    })
                    .collect()
            }
        }
    }

    /// Applies a basic operation pointwise to elements.
    pub fn apply(&self, op: &str, args: &[u32]) -> Result<u32> {
        let oi = self.base.op_index(op)?;
        let arity = self.base.operations[oi].arity;
        if arity != args.len() {
            return Err(Error::Arity { op: op.into(), expected: arity, got: args.len() });
        }
        if let Some(&bad) = args.iter().find(|&&a| a as usize >= self.len()) {
            return Err(Error::OutOfRange { value: bad as usize, size: self.len() });
        }
        Ok(self.apply_index(oi, args))
    }

    fn apply_index(&self, oi: usize, args: &[u32]) -> u32 {
        let mut buf = vec![0; args.len()];
        let image: Vec<u32> = (0..self.points)
            .map(|p| {
                for (b, &a) in buf.iter_mut().zip(args) {
                    *b = self.element(a)[p];
                }
                self.base.apply_index(oi, &buf)
            })
            .collect();
        self.index_of(&image).expect("free algebra is closed")
    }

    /// The free algebra as an ordinary finite algebra, when its tables fit.
    pub fn algebra_view(&self) -> Result<Algebra> {
        let m = self.len();
        let mut ops = Vec::new();
        for (oi, op) in self.base.operations.iter().enumerate() {
            check_table_len(m, op.arity)?;
            ops.push(Operation::from_fn(op.name.clone(), m, op.arity, |args| self.apply_index(oi, args))?);
        }
        Algebra::new(format!("F{}({})", self.arity, self.base.name), m, ops)
    }

    /// For every element, the class label of its image under the
    /// substitution sending variable `i` to variable `map[i]` of a
    /// `target`-generated free algebra. The kernel of this labelling is the
    /// congruence generated by identifying the merged variables.
    pub fn substitution_labels(&self, map: &[usize], target: usize) -> Result<Vec<u32>> {
        if map.len() != self.arity || map.iter().any(|&v| v >= target) {
            return Err(Error::InvalidParameter("substitution does not fit the generators".into()));
        }
        let n = self.base.size;
        let tpoints = vector_len(n, target)?;
        // point of A^k read off a point of A^target
        let pull: Vec<usize> = (0..tpoints)
            .map(|q| {
                let digit = |v: usize| (q / n.pow((target - 1 - v) as u32)) % n;
                map.iter().fold(0, |acc, &v| acc * n + digit(v))
            })
            .collect();
        let mut images = Interner::new(tpoints);
        let mut buf = vec![0u32; tpoints];
        Ok((0..self.len() as u32)
            .map(|i| {
                let e = self.element(i);
                for (b, &p) in buf.iter_mut().zip(&pull) {
                    *b = e[p];
                }
                images.intern(&buf).0
            })
            .collect())
    }

    /// Labels of the congruence generated by identifying generators along
    /// the given pairs of variable indices.
    pub fn merge_labels(&self, pairs: &[(usize, usize)]) -> Result<Vec<u32>> {
        let mut uf = UnionFind::new(self.arity);
        for &(a, b) in pairs {
            if a >= self.arity || b >= self.arity {
                return Err(Error::InvalidParameter(format!("no generator x{}", a.max(b))));
            }
            uf.union(a as u32, b as u32);
        }
        let mut reps: Vec<u32> = (0..self.arity as u32).map(|v| uf.find(v)).collect();
        let mut distinct = reps.clone();
        distinct.sort_unstable();
        distinct.dedup();
        for r in reps.iter_mut() {
            *r = distinct.binary_search(r).expect("present") as u32;
        }
        let map: Vec<usize> = reps.iter().map(|&r| r as usize).collect();
        self.substitution_labels(&map, distinct.len())
    }

    /// Congruence generated by identifying variables, as a relation.
    pub fn merge_congruence(&self, pairs: &[(usize, usize)]) -> Result<BinRel> {
        let labels = self.merge_labels(pairs)?;
        self.relation_guard()?;
        Ok(BinRel::kernel(self.len(), |i| labels[i]))
    }

    /// Tabulated view kept for closures, when the tables are small.
    fn cached_view(&self) -> Option<&Algebra> {
        self.view
            .get_or_init(|| {
                let m = self.len();
                let cells: usize = self.base.operations.iter().map(|o| m.saturating_pow(o.arity as u32)).sum();
                if cells <= VIEW_TABLE_CELLS {
                    self.algebra_view().ok()
                } else {
                    None
                }
            })
            .as_ref()
    }

    /// Closure of `gens` inside `F^2` through `width`-fold projections. Valid
    /// when the base has a `(width+1)`-ary near-unanimity operation, since a
    /// subalgebra of a power is then fixed by its `width`-fold projections.
    fn projected_closure(&self, width: usize, gens: &[Vec<u32>]) -> Result<BinRel> {
        let n = self.base.size;
        let coords = 2 * self.points;
        let m = self.len();
        let mut cand: Vec<(u32, u32)> = (0..m as u32).flat_map(|p| (0..m as u32).map(move |q| (p, q))).collect();
        let value = |p: u32, q: u32, c: usize| {
            if c < self.points {
                self.element(p)[c]
            } else {
                self.element(q)[c - self.points]
            }
        };
        let code = |get: &dyn Fn(usize) -> u32, cs: &[usize]| cs.iter().fold(0usize, |acc, &c| acc * n + get(c) as usize);
        let mut memo: HashMap<u64, u64> = HashMap::new();
        let mut work: u64 = 0;
        let mut cs: Vec<usize> = (0..width).collect();
        loop {
            let mask = gens.iter().fold(0u64, |acc, g| acc | 1 << code(&|c| g[c], &cs));
            let allowed = *memo.entry(mask).or_insert_with(|| small_closure(&self.base, width, mask));
            work += cand.len() as u64;
            if work > self.limits.max_work {
                return Err(Error::Resource(format!("closure work exceeds {} steps", self.limits.max_work)));
            }
            cand.retain(|&(p, q)| allowed >> code(&|c| value(p, q, c), &cs) & 1 == 1);
            // next combination in lexicographic order
            let Some(i) = (0..width).rev().find(|&i| cs[i] < coords - width + i) else { break };
            cs[i] += 1;
            for j in i + 1..width {
                cs[j] = cs[j - 1] + 1;
            }
        }
        BinRel::from_pairs(m, cand.into_iter().map(|(p, q)| (p as usize, q as usize)))
    }

    /// Closure of `gens` by the generic subpower engine on `A^(2 points)`.
    fn engine_closure(&self, gens: &[Vec<u32>]) -> Result<BinRel> {
        let sp = Subpower::generate(&self.diagrams, 2 * self.points, gens, self.limits)?;
        let mut out = BinRel::empty(self.len());
        for i in 0..sp.len() as u32 {
            let (a, b) = self.split(sp.element(i))?;
            out.insert(a, b);
        }
        Ok(out)
    }

    fn relation_guard(&self) -> Result<()> {
        if self.len() > MAX_RELATION_UNIVERSE {
            return Err(Error::Resource(format!(
                "free algebra has {} elements; relations are limited to {MAX_RELATION_UNIVERSE}",
                self.len()
            )));
        }
        Ok(())
    }

    fn variable_of(&self, e: usize) -> Option<usize> {
        self.generators.iter().position(|&g| g as usize == e)
    }

    fn pair_vector(&self, a: usize, b: usize) -> Vec<u32> {
        let mut v = Vec::with_capacity(2 * self.points);
        v.extend_from_slice(self.element(a as u32));
        v.extend_from_slice(self.element(b as u32));
        v
    }

    fn split(&self, v: &[u32]) -> Result<(usize, usize)> {
        let (l, r) = v.split_at(self.points);
        match (self.index_of(l), self.index_of(r)) {
            (Some(a), Some(b)) => Ok((a as usize, b as usize)),
            _ => Err(Error::Internal("pair left the free algebra".into())),
        }
    }
}

/// Free algebras whose operation tables total at most this many cells keep
/// a tabulated copy for relation closures.
const VIEW_TABLE_CELLS: usize = 1 << 24;

fn small_power_fits(size: usize, width: usize) -> bool {
    size.checked_pow(width as u32).is_some_and(|p| p <= 16)
}

fn near_unanimity_width(base: &Algebra) -> Option<usize> {
    let n = base.size as u32;
    base.operations
        .iter()
        .enumerate()
        .filter(|(_, o)| o.arity >= 3)
        .filter(|&(oi, o)| {
            (0..n).all(|x| {
                (0..n).all(|y| {
                    (0..o.arity).all(|pos| {
                        let mut args = vec![x; o.arity];
                        args[pos] = y;
                        base.apply_index(oi, &args) == x
                    })
                })
            })
        })
        .map(|(_, o)| o.arity - 1)
        .min()
}

/// Subuniverse of `base^width` generated by the tuples in `gens`, both as
/// bit masks over tuples in mixed radix.
fn small_closure(base: &Algebra, width: usize, gens: u64) -> u64 {
    let n = base.size;
    let decode = |t: usize| -> Vec<u32> {
        let mut out = vec![0u32; width];
        let mut t = t;
        for slot in out.iter_mut().rev() {
            *slot = (t % n) as u32;
            t /= n;
        }
        out
    };
    let mut set = gens;
    loop {
        let members: Vec<Vec<u32>> = (0..64).filter(|&t| set >> t & 1 == 1).map(decode).collect();
        let mut next = set;
        for (oi, op) in base.operations.iter().enumerate() {
            let r = op.arity;
            let total = members.len().pow(r as u32);
            let mut args = vec![0u32; r];
            for combo in 0..total {
                let mut code = 0usize;
                for j in 0..width {
                    let mut c = combo;
                    for slot in args.iter_mut().rev() {
                        *slot = members[c % members.len()][j];
                        c /= members.len();
                    }
                    code = code * n + base.apply_index(oi, &args) as usize;
                }
                next |= 1 << code;
            }
        }
        if next == set {
            return set;
        }
        set = next;
    }
}

fn vector_len(size: usize, k: usize) -> Result<usize> {
    let mut len: usize = 1;
    for _ in 0..k {
        len = len
            .checked_mul(size)
            .filter(|&l| l <= crate::limits::MAX_TABLE_LEN)
            .ok_or_else(|| Error::Resource(format!("{size}^{k} points exceed 2^26")))?;
    }
    Ok(len)
}

impl Structure for FreeAlgebra {
    fn size(&self) -> usize {
        self.len()
    }

    fn admissible_closure(&self, seed: &BinRel) -> Result<BinRel> {
        self.relation_guard()?;
        let mut gens: Vec<Vec<u32>> =
            self.generators.iter().map(|&g| self.pair_vector(g as usize, g as usize)).collect();
        gens.extend(seed.pairs().map(|(a, b)| self.pair_vector(a, b)));
        if let Some(w) = self.nu_width.filter(|&w| small_power_fits(self.base.size, w) && 2 * self.points >= w) {
            return self.projected_closure(w, &gens);
        }
        if let Some(view) = self.cached_view() {
            return view.admissible_closure(seed);
        }
        self.engine_closure(&gens)
    }

    /// Seeds made of generator pairs go through the substitution kernel;
    /// anything else through the transitive closure of the generated
    /// tolerance, which is compatible because each power of it is.
    fn congruence_closure(&self, seed: &BinRel) -> Result<BinRel> {
        self.relation_guard()?;
        let merged: Option<Vec<(usize, usize)>> = seed
            .pairs()
            .filter(|(a, b)| a != b)
            .map(|(a, b)| Some((self.variable_of(a)?, self.variable_of(b)?)))
            .collect();
        match merged {
            Some(pairs) => self.merge_congruence(&pairs),
            None => Ok(self.tolerance_closure(seed)?.transitive_closure()),
        }
    }

    fn compatibility_violation(&self, r: &BinRel) -> Result<Option<Violation>> {
        self.relation_guard()?;
        let members: Vec<Vec<u32>> = r.pairs().map(|(a, b)| self.pair_vector(a, b)).collect();
        let esc = Subpower::image_escape(&self.diagrams, 2 * self.points, &members, self.limits)?;
        let Some(e) = esc else { return Ok(None) };
        let pairs: Vec<(usize, usize)> = r.pairs().collect();
        let (l, rr) = e.image.split_at(self.points);
        let find = |v: &[u32]| {
            self.index_of(v).ok_or_else(|| Error::Internal("image left the free algebra".into()))
        };
        Ok(Some(Violation {
            op: self.base.operations[e.op].name.clone(),
            left: e.args.iter().map(|&i| pairs[i as usize].0 as u32).collect(),
            right: e.args.iter().map(|&i| pairs[i as usize].1 as u32).collect(),
            image: (find(l)?, find(rr)?),
        }))
    }
}
