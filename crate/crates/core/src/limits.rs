//! Resource caps shared by the generation engines.

use crate::error::{Error, Result};

/// Environment variable overriding [`Limits::max_work`].
pub const ENV_MAX_WORK: &str = "UNIALG_MAX_WORK";
/// Environment variable overriding [`Limits::max_elements`].
pub const ENV_MAX_ELEMENTS: &str = "UNIALG_MAX_ELEMENTS";
/// Environment variable overriding [`Limits::max_memory`] (bytes).
pub const ENV_MAX_MEMORY: &str = "UNIALG_MAX_MEMORY";

/// Largest universe a [`crate::BinRel`] may live on.
pub const MAX_RELATION_UNIVERSE: usize = 4096;
/// Largest operation arity.
pub const MAX_ARITY: usize = 6;
/// Largest `size^arity` for an operation table or value vector.
pub const MAX_TABLE_LEN: usize = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Limits {
    /// Budget of pointwise evaluation steps for one generation run.
    pub max_work: u64,
    /// Largest number of elements one generated subpower may reach.
    pub max_elements: usize,
    /// Bytes of vectors one generation run may store, elements and partial
    /// applications together.
    pub max_memory: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_work: 40_000_000_000, max_elements: 200_000, max_memory: 1 << 30 }
    }
}

impl Limits {
    /// Defaults, overridden by `UNIALG_MAX_WORK` / `UNIALG_MAX_ELEMENTS` when set.
    pub fn from_env() -> Self {
        let mut l = Limits::default();
        if let Some(v) = std::env::var(ENV_MAX_WORK).ok().and_then(|s| s.trim().parse().ok()) {
            l.max_work = v;
        }
        if let Some(v) = std::env::var(ENV_MAX_ELEMENTS).ok().and_then(|s| s.trim().parse().ok()) {
            l.max_elements = v;
        }
        if let Some(v) = std::env::var(ENV_MAX_MEMORY).ok().and_then(|s| s.trim().parse().ok()) {
            l.max_memory = v;
        }
        l
    }

    pub fn unlimited() -> Self {
        Limits { max_work: u64::MAX, max_elements: usize::MAX, max_memory: usize::MAX }
    }
}

pub(crate) fn check_table_len(size: usize, arity: usize) -> Result<usize> {
    if arity > MAX_ARITY {
        return Err(Error::Resource(format!("arity {arity} exceeds {MAX_ARITY}")));
    }
    let mut len: usize = 1;
    for _ in 0..arity {
        len = len
            .checked_mul(size)
            .filter(|&l| l <= MAX_TABLE_LEN)
            .ok_or_else(|| Error::Resource(format!("{size}^{arity} exceeds 2^26")))?;
    }
    Ok(len)
}
