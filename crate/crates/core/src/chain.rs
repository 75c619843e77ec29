//! Chain generation by local symmetry dynamics.
//!
//! A chain grows by repeatedly reflecting its last `k` sites and appending
//! the mirror image. With the incremental schedule `2, 3, 4, ...` applied to
//! the seed `AB`, the result is the scaled chain whose run lengths read
//! `1A, 2B, 2A, 4B, 4A, ..., 2lB, 2lA`.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

/// Site species.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    A,
    B,
}

impl Symbol {
    pub fn as_char(self) -> char {
        match self {
            Symbol::A => 'A',
            Symbol::B => 'B',
        }
    }

    pub fn other(self) -> Symbol {
        match self {
            Symbol::A => Symbol::B,
            Symbol::B => Symbol::A,
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

impl TryFrom<char> for Symbol {
    type Error = Error;

    fn try_from(c: char) -> Result<Self> {
        match c {
            'A' => Ok(Symbol::A),
            'B' => Ok(Symbol::B),
            other => Err(invalid(format!("unknown site symbol {other:?}"))),
        }
    }
}

/// A nonempty, dense sequence of site symbols.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymbolChain {
    sites: Vec<Symbol>,
}

impl SymbolChain {
    pub fn new(sites: Vec<Symbol>) -> Result<Self> {
        if sites.is_empty() {
            return Err(invalid("a chain needs at least one site"));
        }
        Ok(Self { sites })
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[Symbol] {
        &self.sites
    }

    pub fn count(&self, symbol: Symbol) -> usize {
        self.sites.iter().filter(|&&s| s == symbol).count()
    }

    /// First `len` sites as a new chain.
    pub fn prefix(&self, len: usize) -> Result<SymbolChain> {
        if len == 0 || len > self.len() {
            return Err(invalid(format!(
                "prefix length {len} outside 1..={}",
                self.len()
            )));
        }
        Ok(Self {
            sites: self.sites[..len].to_vec(),
        })
    }
}

impl fmt::Display for SymbolChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.sites {
            write!(f, "{}", s.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for SymbolChain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let sites = s
            .trim()
            .chars()
            .map(Symbol::try_from)
            .collect::<Result<Vec<_>>>()?;
        SymbolChain::new(sites)
    }
}

/// Domain sizes of successive reflections.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ReflectionSchedule {
    sizes: Vec<usize>,
}

impl ReflectionSchedule {
    pub fn new(sizes: Vec<usize>) -> Self {
        Self { sizes }
    }

    /// `start, start + 1, ..., end` (inclusive); empty when `end < start`.
    pub fn incremental(start: usize, end: usize) -> Self {
        Self {
            sizes: (start..=end).collect(),
        }
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Chain length after applying the schedule to a seed of `seed_len` sites.
    pub fn final_length(&self, seed_len: usize) -> usize {
        seed_len + self.sizes.iter().sum::<usize>()
    }
}

/// A maximal run of equal symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Run {
    pub symbol: Symbol,
    pub len: usize,
}

/// Appends the mirror image of the last `k` sites.
pub fn apply_reflection(chain: &SymbolChain, k: usize) -> Result<SymbolChain> {
    let mut sites = chain.sites.clone();
    reflect_in_place(&mut sites, k)?;
    Ok(SymbolChain { sites })
}

fn reflect_in_place(sites: &mut Vec<Symbol>, k: usize) -> Result<()> {
    if k == 0 {
        return Err(invalid("reflection domain size must be positive"));
    }
    let len = sites.len();
    if k > len {
        return Err(Error::DomainSize { k, len });
    }
    sites.reserve(k);
    for i in (len - k..len).rev() {
        let s = sites[i];
        sites.push(s);
    }
    Ok(())
}

/// Folds `apply_reflection` over the schedule.
pub fn lsd_generate(seed: &SymbolChain, schedule: &ReflectionSchedule) -> Result<SymbolChain> {
    let mut sites = Vec::with_capacity(schedule.final_length(seed.len()));
    sites.extend_from_slice(&seed.sites);
    for &k in &schedule.sizes {
        reflect_in_place(&mut sites, k)?;
    }
    Ok(SymbolChain { sites })
}

/// Number of sites of the scaled chain of order `l`: `1 + 2l(l+1)`.
pub fn scaled_chain_length(l: usize) -> usize {
    1 + 2 * l * (l + 1)
}

/// The seed `AB` used by the incremental rule.
pub fn scaled_chain_seed() -> SymbolChain {
    SymbolChain {
        sites: vec![Symbol::A, Symbol::B],
    }
}

/// Reflection schedule `2, 3, ..., 2l+1` whose output starts with the scaled
/// chain of order `l`.
///
/// The last reflection overshoots: the generated chain has
/// `1 + (2l+1)(l+1)` sites, i.e. the scaled chain followed by a partial
/// `B` run of `l + 1` sites that the next reflection would complete.
pub fn scaled_chain_schedule(l: usize) -> ReflectionSchedule {
    ReflectionSchedule::incremental(2, 2 * l + 1)
}

/// Scaled chain from its closed run-length form `1A, 2B, 2A, ..., 2lB, 2lA`.
pub fn scaled_chain(l: usize) -> Result<SymbolChain> {
    if l == 0 {
        return Err(invalid("scaled chain order must be at least 1"));
    }
    let mut sites = Vec::with_capacity(scaled_chain_length(l));
    sites.push(Symbol::A);
    for k in 1..=l {
        sites.extend(std::iter::repeat_n(Symbol::B, 2 * k));
        sites.extend(std::iter::repeat_n(Symbol::A, 2 * k));
    }
    Ok(SymbolChain { sites })
}

/// Scaled chain grown by the reflection dynamics and cut at `1 + 2l(l+1)`
/// sites.
pub fn lsd_scaled_chain(l: usize) -> Result<SymbolChain> {
    if l == 0 {
        return Err(invalid("scaled chain order must be at least 1"));
    }
    lsd_generate(&scaled_chain_seed(), &scaled_chain_schedule(l))?.prefix(scaled_chain_length(l))
}

pub fn run_length_decomposition(chain: &SymbolChain) -> Vec<Run> {
    let mut runs: Vec<Run> = Vec::new();
    for &s in &chain.sites {
        match runs.last_mut() {
            Some(run) if run.symbol == s => run.len += 1,
            _ => runs.push(Run { symbol: s, len: 1 }),
        }
    }
    runs
}

/// Inverse of [`run_length_decomposition`].
pub fn expand_runs(runs: &[Run]) -> Result<SymbolChain> {
    let sites = runs
        .iter()
        .flat_map(|r| std::iter::repeat_n(r.symbol, r.len))
        .collect();
    SymbolChain::new(sites)
}

/// Order `l` of a scaled chain, if `chain` is one.
pub fn scaled_chain_order(chain: &SymbolChain) -> Option<usize> {
    let runs = run_length_decomposition(chain);
    if runs.len().is_multiple_of(2) {
        return None;
    }
    let l = runs.len() / 2;
    let expected = std::iter::once(Run {
        symbol: Symbol::A,
        len: 1,
    })
    .chain((1..=l).flat_map(|k| {
        [
            Run {
                symbol: Symbol::B,
                len: 2 * k,
            },
            Run {
                symbol: Symbol::A,
                len: 2 * k,
            },
        ]
    }));
    if l >= 1 && runs.iter().copied().eq(expected) {
        Some(l)
    } else {
        None
    }
}
