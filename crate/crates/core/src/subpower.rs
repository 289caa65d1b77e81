//! Generation of subalgebras of finite powers `A^P`.
//!
//! Every closure in the crate (subuniverses, admissible relations, free
//! algebras) is a subalgebra of some power of a base algebra, so they all run
//! through this engine. Each basic operation is compiled into a reduced
//! decision diagram over its argument positions; partially applied operations
//! are then vectors of diagram nodes, one per coordinate, and equal partial
//! applications are shared. Generation is semi-naive: a (partial state,
//! element) combination is expanded exactly once.

use hashbrown::HashTable;
use rustc_hash::FxBuildHasher;
use std::hash::BuildHasher;

use crate::algebra::{Algebra, Operation};
use crate::error::{Error, Result};
use crate::limits::Limits;

/// Arena of fixed-width `u32` vectors with hash-consing.
#[derive(Clone, Default)]
pub(crate) struct Interner {
    width: usize,
    data: Vec<u32>,
    table: HashTable<u32>,
    hasher: FxBuildHasher,
}

impl Interner {
    pub fn new(width: usize) -> Self {
        Interner { width, data: Vec::new(), table: HashTable::new(), hasher: FxBuildHasher }
    }

    pub fn len(&self) -> usize {
        if self.width == 0 {
            self.table.len()
        } else {
            self.data.len() / self.width
        }
    }

    pub fn get(&self, i: u32) -> &[u32] {
        let w = self.width;
        &self.data[i as usize * w..(i as usize + 1) * w]
    }

    pub fn find(&self, v: &[u32]) -> Option<u32> {
        let h = self.hasher.hash_one(v);
        let (w, data) = (self.width, &self.data);
        self.table
            .find(h, |&i| &data[i as usize * w..(i as usize + 1) * w] == v)
            .copied()
    }

    /// Returns the index of `v` and whether it was newly added.
    pub fn intern(&mut self, v: &[u32]) -> (u32, bool) {
        debug_assert_eq!(v.len(), self.width);
        let h = self.hasher.hash_one(v);
        let Interner { width, data, table, hasher } = self;
        let w = *width;
        if let Some(&i) = table.find(h, |&i| &data[i as usize * w..(i as usize + 1) * w] == v) {
            return (i, false);
        }
        let idx = (data.len() / w.max(1)) as u32;
        let idx = if w == 0 { table.len() as u32 } else { idx };
        data.extend_from_slice(v);
        table.insert_unique(h, idx, |&i| {
            hasher.hash_one(&data[i as usize * w..(i as usize + 1) * w])
        });
        (idx, true)
    }
}

/// An operation table compiled into a reduced decision diagram.
///
/// `levels[j]` holds, for every node at depth `j`, its `n` children; the
/// children of the last level are result values.
#[derive(Clone, Debug)]
pub(crate) struct Diagram {
    pub arity: usize,
    pub n: usize,
    pub levels: Vec<Vec<u32>>,
    pub constant: u32,
}

impl Diagram {
    pub fn build(op: &Operation, n: usize) -> Diagram {
        let arity = op.arity;
        if arity == 0 {
            return Diagram { arity, n, levels: Vec::new(), constant: op.table[0] };
        }
        let mut levels = vec![Vec::new(); arity];
        let mut child: Vec<u32> = op.table.clone();
        for j in (0..arity).rev() {
            let prefixes = child.len() / n;
            let mut seen = Interner::new(n);
            let mut ids = Vec::with_capacity(prefixes);
            for p in 0..prefixes {
                let (id, _) = seen.intern(&child[p * n..(p + 1) * n]);
                ids.push(id);
            }
            levels[j] = seen.data;
            child = ids;
        }
        Diagram { arity, n, levels, constant: 0 }
    }

    #[cfg(test)]
    fn nodes(&self, level: usize) -> usize {
        self.levels[level].len() / self.n
    }
}

pub(crate) fn compile(alg: &Algebra) -> Vec<Diagram> {
    alg.operations.iter().map(|op| Diagram::build(op, alg.size)).collect()
}

/// How an element of a generated subpower first appeared.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Origin {
    Generator(usize),
    Apply { op: usize, args: Vec<u32> },
}

struct Level {
    states: Interner,
    parent: Vec<u32>,
    via: Vec<u32>,
    old: usize,
}

/// A subalgebra of `A^points` generated by a list of vectors.
pub(crate) struct Subpower<'a> {
    diagrams: &'a [Diagram],
    points: usize,
    elems: Interner,
    origin: Vec<Origin>,
    levels: Vec<Vec<Level>>,
    limits: Limits,
    work: u64,
    stored: usize,
}

/// A compatibility failure found by [`Subpower::image_escape`].
pub(crate) struct Escape {
    pub op: usize,
    pub args: Vec<u32>,
    pub image: Vec<u32>,
}

impl<'a> Subpower<'a> {
    pub fn new(diagrams: &'a [Diagram], points: usize, limits: Limits) -> Self {
        let levels = diagrams
            .iter()
            .map(|d| {
                (0..d.arity)
                    .map(|j| {
                        let mut states = Interner::new(points);
                        let mut parent = Vec::new();
                        let mut via = Vec::new();
                        if j == 0 {
                            states.intern(&vec![0; points]);
                            parent.push(u32::MAX);
                            via.push(u32::MAX);
                        }
                        Level { states, parent, via, old: 0 }
                    })
                    .collect()
            })
            .collect();
        Subpower {
            diagrams,
            points,
            elems: Interner::new(points),
            origin: Vec::new(),
            levels,
            limits,
            work: 0,
            stored: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn element(&self, i: u32) -> &[u32] {
        self.elems.get(i)
    }

    pub fn find(&self, v: &[u32]) -> Option<u32> {
        self.elems.find(v)
    }

    /// Element arena and provenance, dropping the partial-application state.
    pub fn into_parts(self) -> (Interner, Vec<Origin>, u64) {
        (self.elems, self.origin, self.work)
    }

    fn push_element(&mut self, v: &[u32], origin: Origin) -> Result<bool> {
        let (_, fresh) = self.elems.intern(v);
        if fresh {
            self.stored += 4 * v.len();
            self.origin.push(origin);
            if self.elems.len() > self.limits.max_elements {
                return Err(Error::Resource(format!(
                    "generated subalgebra exceeds {} elements",
                    self.limits.max_elements
                )));
            }
        }
        Ok(fresh)
    }

    /// Generates the subalgebra from `gens` (each of length `points`).
    pub fn generate(
        diagrams: &'a [Diagram],
        points: usize,
        gens: &[Vec<u32>],
        limits: Limits,
    ) -> Result<Self> {
        let mut sp = Subpower::new(diagrams, points, limits);
        for (i, g) in gens.iter().enumerate() {
            sp.push_element(g, Origin::Generator(i))?;
        }
        for (o, d) in diagrams.iter().enumerate() {
            if d.arity == 0 {
                sp.push_element(&vec![d.constant; points], Origin::Apply { op: o, args: vec![] })?;
            }
        }
        let mut d0 = 0;
        while d0 < sp.len() {
            let d1 = sp.len();
            sp.round(d0, d1, None)?;
            d0 = d1;
        }
        Ok(sp)
    }

    /// Treats the current elements as a candidate subuniverse and returns the
    /// first basic-operation image that falls outside it, if any.
    pub fn image_escape(
        diagrams: &'a [Diagram],
        points: usize,
        members: &[Vec<u32>],
        limits: Limits,
    ) -> Result<Option<Escape>> {
        let mut sp = Subpower::new(diagrams, points, limits);
        for (i, g) in members.iter().enumerate() {
            sp.push_element(g, Origin::Generator(i))?;
        }
        let mut escape = None;
        for (o, d) in diagrams.iter().enumerate() {
            if d.arity == 0 && sp.find(&vec![d.constant; points]).is_none() {
                return Ok(Some(Escape { op: o, args: vec![], image: vec![d.constant; points] }));
            }
        }
        let n = sp.len();
        sp.round(0, n, Some(&mut escape))?;
        Ok(escape)
    }

    fn args_of(&self, op: usize, level: usize, mut s: u32) -> Vec<u32> {
        let mut args = Vec::with_capacity(level + 1);
        let mut j = level;
        while j > 0 {
            let l = &self.levels[op][j];
            args.push(l.via[s as usize]);
            s = l.parent[s as usize];
            j -= 1;
        }
        args.reverse();
        args
    }

    fn charge(&mut self, amount: u64) -> Result<()> {
        self.work += amount;
        if self.stored > self.limits.max_memory {
            return Err(Error::Resource(format!(
                "generation stores more than {} bytes (set {} to raise)",
                self.limits.max_memory,
                crate::limits::ENV_MAX_MEMORY
            )));
        }
        if self.work > self.limits.max_work {
            return Err(Error::Resource(format!(
                "generation work exceeds {} steps (set {} to raise)",
                self.limits.max_work,
                crate::limits::ENV_MAX_WORK
            )));
        }
        Ok(())
    }

    /// One semi-naive round over the new elements `[d0, d1)`. With `check`
    /// set, images are tested for membership instead of being added.
    fn round(&mut self, d0: usize, d1: usize, mut check: Option<&mut Option<Escape>>) -> Result<()> {
        let points = self.points;
        let mut buf = vec![0u32; points];
        let diagrams = self.diagrams;
        for (o, d) in diagrams.iter().enumerate() {
            let arity = d.arity;
            if arity == 0 {
                continue;
            }
            for j in 0..arity {
                let table = &d.levels[j];
                let n = d.n;
                let old = self.levels[o][j].old;
                let cur = self.levels[o][j].states.len();
                let last = j + 1 == arity;
                let mut work = 0u64;
                for s in 0..cur {
                    let (lo, hi) = if s < old { (d0, d1) } else { (0, d1) };
                    if lo >= hi {
                        continue;
                    }
                    for e in lo..hi {
                        {
                            let st = self.levels[o][j].states.get(s as u32);
                            let el = self.elems.get(e as u32);
                            for p in 0..points {
                                buf[p] = table[st[p] as usize * n + el[p] as usize];
                            }
                        }
                        work += points as u64;
                        if work > 1 << 22 {
                            self.charge(work)?;
                            work = 0;
                        }
                        if last {
                            if let Some(esc) = check.as_deref_mut() {
                                if self.elems.find(&buf).is_none() {
                                    let mut args = self.args_of(o, j, s as u32);
                                    args.push(e as u32);
                                    *esc = Some(Escape { op: o, args, image: buf.clone() });
                                    return Ok(());
                                }
                            } else if self.elems.find(&buf).is_none() {
                                let mut args = self.args_of(o, j, s as u32);
                                args.push(e as u32);
                                self.push_element(&buf, Origin::Apply { op: o, args })?;
                            }
                        } else {
                            let next = &mut self.levels[o][j + 1];
                            let (_, fresh) = next.states.intern(&buf);
                            if fresh {
                                next.parent.push(s as u32);
                                next.via.push(e as u32);
                                self.stored += 4 * points + 8;
                            }
                        }
                    }
                }
                self.charge(work)?;
            }
            for l in self.levels[o].iter_mut() {
                l.old = l.states.len();
            }
        }
        Ok(())
    }
}
