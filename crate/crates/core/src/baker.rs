//! The Baker-family algebras on downsets of `C(n+1) x C(n+1) x C2` and their
//! canonical congruences and tolerances.
//!
//! Elements of the lattice are triples `(i1, i2, i3)` with `i3 = 1` for the
//! upper and `0` for the lower element of the last factor.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::algebra::{direct_product, product_coords, product_encode, Algebra};
use crate::error::{Error, Result};
use crate::lattice::{chain, reduct_on, ReductSpec};
use crate::relation::{is_congruence, BinRel};

/// Which basic operation the instance carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Signature {
    #[serde(rename = "b")]
    B,
    #[serde(rename = "u")]
    U,
}

impl Signature {
    pub fn spec(self) -> ReductSpec {
        match self {
            Signature::B => ReductSpec::baker(),
            Signature::U => ReductSpec::nu4(),
        }
    }

    /// The two-element generator of the corresponding variety.
    pub fn generator(self) -> Algebra {
        match self {
            Signature::B => crate::lattice::c2b(),
            Signature::U => crate::lattice::c2u(),
        }
    }

    pub fn all() -> [Signature; 2] {
        [Signature::B, Signature::U]
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Signature::B => "b",
            Signature::U => "u",
        })
    }
}

impl FromStr for Signature {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "b" => Ok(Signature::B),
            "u" => Ok(Signature::U),
            _ => Err(Error::InvalidParameter(format!("unknown signature `{s}` (use b or u)"))),
        }
    }
}

pub const UP: u32 = 1;
pub const DOWN: u32 = 0;

/// One member of the family, with its distinguished elements.
#[derive(Debug, Clone)]
pub struct BakerInstance {
    pub n: usize,
    pub signature: Signature,
    pub minus: bool,
    pub algebra: Algebra,
    pub c: Vec<u32>,
    pub e: Vec<u32>,
    pub f: Vec<u32>,
    /// Elements with last coordinate up, sorted.
    pub up: Vec<u32>,
    pub alpha: BinRel,
    pub beta: BinRel,
    pub gamma: BinRel,
    pub index_map: Vec<[u32; 3]>,
}

fn lattice_sizes(n: usize) -> [usize; 3] {
    [n + 1, n + 1, 2]
}

fn parity_clause(i: u32, j: u32, ok: impl Fn(u32) -> bool) -> bool {
    i.abs_diff(j) <= 1 && (i == j || ok(i.max(j)))
}

/// Builds the instance for `n >= 2`, re-verifying closedness and that the
/// canonical relations are congruences.
pub fn baker_instance(n: usize, signature: Signature, minus: bool) -> Result<BakerInstance> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n must be at least 2, got {n}")));
    }
    let lattice = direct_product(&[chain(n)?, chain(n)?, chain(1)?])?;
    let sizes = lattice_sizes(n);
    let nn = n as u32;
    let c_triples: Vec<[u32; 3]> = (0..=nn)
        .map(|i| {
            let third = if i == 0 || i == nn { UP } else { DOWN };
            [nn - i, i, third]
        })
        .collect();
    let below = |x: &[u32], y: &[u32; 3]| x.iter().zip(y).all(|(a, b)| a <= b);
    let removed = [[nn, 0, DOWN], [0, nn, DOWN]];
    let members: Vec<u32> = (0..lattice.size as u32)
        .filter(|&x| {
            let t = product_coords(&sizes, x);
            c_triples.iter().any(|c| below(&t, c)) && !(minus && removed.iter().any(|r| r[..] == t[..]))
        })
        .collect();
    let sub = reduct_on(&lattice, &signature.spec(), &members)?;
    let index_map: Vec<[u32; 3]> = sub
        .elements
        .iter()
        .map(|&x| {
            let t = product_coords(&sizes, x);
            [t[0], t[1], t[2]]
        })
        .collect();
    let find = |t: [u32; 3]| -> Result<u32> {
        sub.index_of(product_encode(&sizes, &t))
            .ok_or_else(|| Error::Internal(format!("element {t:?} missing from the universe")))
    };
    let c = c_triples.iter().map(|&t| find(t)).collect::<Result<Vec<_>>>()?;
    let e = (0..=nn).map(|i| find([nn - i, 0, UP])).collect::<Result<Vec<_>>>()?;
    let f = (0..=nn).map(|i| find([0, i, UP])).collect::<Result<Vec<_>>>()?;
    let up: Vec<u32> = (0..index_map.len() as u32).filter(|&x| index_map[x as usize][2] == UP).collect();

    let size = index_map.len();
    let im = &index_map;
    let alpha = BinRel::kernel(size, |x| im[x][2]);
    let beta = BinRel::from_fn(size, |x, y| {
        let (s, t) = (im[x], im[y]);
        parity_clause(s[0], t[0], |m| m % 2 == nn % 2) && parity_clause(s[1], t[1], |m| m % 2 == 1)
    });
    let gamma = BinRel::from_fn(size, |x, y| {
        let (s, t) = (im[x], im[y]);
        parity_clause(s[0], t[0], |m| m % 2 != nn % 2) && parity_clause(s[1], t[1], |m| m % 2 == 0)
    });
    let algebra = Algebra { name: instance_name(n, signature, minus), ..sub.algebra };
    let inst = BakerInstance { n, signature, minus, algebra, c, e, f, up, alpha, beta, gamma, index_map };
    for (name, rel) in [("alpha", &inst.alpha), ("beta", &inst.beta), ("gamma", &inst.gamma)] {
        if let Some(cx) = is_congruence(&inst.algebra, rel)?.counterexample {
            return Err(Error::Internal(format!("{name} is not a congruence: {cx}")));
        }
    }
    Ok(inst)
}

fn instance_name(n: usize, sig: Signature, minus: bool) -> String {
    format!("baker{n}{sig}{}", if minus { "-" } else { "" })
}

impl BakerInstance {
    pub fn size(&self) -> usize {
        self.algebra.size
    }

    /// Element with the given coordinates, if present.
    pub fn element(&self, t: [u32; 3]) -> Option<u32> {
        self.index_map.iter().position(|&x| x == t).map(|i| i as u32)
    }

    pub fn triple(&self, x: u32) -> [u32; 3] {
        self.index_map[x as usize]
    }

    /// Human-readable triple, with arrows for the last coordinate.
    pub fn show(&self, x: u32) -> String {
        let t = self.triple(x);
        format!("({},{},{})", t[0], t[1], if t[2] == UP { "up" } else { "down" })
    }

    pub fn is_up(&self, x: u32) -> bool {
        self.triple(x)[2] == UP
    }

    /// The same relation built as the meet of the pullbacks of two
    /// partitions of the chain factors.
    pub fn beta_from_projections(&self) -> BinRel {
        let n = self.n as u32;
        // blocks {n, n-1}, {n-2, n-3}, .. on the first factor
        let first = |i: u32| (n - i) / 2;
        // blocks {0, 1}, {2, 3}, .. on the second factor
        let second = |i: u32| i / 2;
        let im = &self.index_map;
        let b1 = BinRel::kernel(self.size(), |x| first(im[x][0]));
        let b2 = BinRel::kernel(self.size(), |x| second(im[x][1]));
        b1.meet(&b2).expect("same size")
    }

    fn lambda_unchecked(&self) -> BinRel {
        let in_e = |x: usize| self.e.contains(&(x as u32));
        let in_f = |x: usize| self.f.contains(&(x as u32));
        let down = |x: usize| !self.is_up(x as u32);
        BinRel::from_fn(self.size(), |x, y| (in_e(x) && in_e(y)) || (in_f(x) && in_f(y)) || down(x) || down(y))
    }

    /// The relation of the E/F example; only offered for signature `b`.
    pub fn lambda_tolerance(&self) -> Result<BinRel> {
        if self.signature != Signature::B {
            return Err(Error::InvalidParameter(
                "the E/F relation is only a tolerance for signature b".into(),
            ));
        }
        Ok(self.lambda_unchecked())
    }

    /// The same pair set regardless of signature; used to exhibit its
    /// failure under `u`.
    pub fn lambda_relation(&self) -> BinRel {
        self.lambda_unchecked()
    }

    /// Pairs whose first two coordinates each differ by at most one.
    pub fn psi_tolerance(&self) -> BinRel {
        let im = &self.index_map;
        BinRel::from_fn(self.size(), |x, y| {
            im[x][0].abs_diff(im[y][0]) <= 1 && im[x][1].abs_diff(im[y][1]) <= 1
        })
    }

    pub fn alpha_beta(&self) -> BinRel {
        self.alpha.meet(&self.beta).expect("same size")
    }

    pub fn alpha_gamma(&self) -> BinRel {
        self.alpha.meet(&self.gamma).expect("same size")
    }

    /// The companion description written next to the algebra file.
    pub fn companion(&self) -> Companion {
        Companion {
            n: self.n,
            signature: self.signature,
            minus: self.minus,
            c: self.c.clone(),
            e: self.e.clone(),
            f: self.f.clone(),
            up: self.up.clone(),
            alpha: self.alpha.pair_list(),
            beta: self.beta.pair_list(),
            gamma: self.gamma.pair_list(),
            psi: self.psi_tolerance().pair_list(),
            lambda: (self.signature == Signature::B).then(|| self.lambda_unchecked().pair_list()),
            index_map: self.index_map.clone(),
        }
    }
}

/// Distinguished elements and canonical relations of an instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Companion {
    pub n: usize,
    pub signature: Signature,
    pub minus: bool,
    pub c: Vec<u32>,
    pub e: Vec<u32>,
    pub f: Vec<u32>,
    pub up: Vec<u32>,
    pub alpha: Vec<[u32; 2]>,
    pub beta: Vec<[u32; 2]>,
    pub gamma: Vec<[u32; 2]>,
    pub psi: Vec<[u32; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<[u32; 2]>>,
    pub index_map: Vec<[u32; 3]>,
}
