//! Finite collections of disjoint atom sets, and exhaustive enumeration of
//! them.
//!
//! A [`Grouping`] is a list of pairwise disjoint, nonempty blocks of atom
//! indices. Blocks are kept sorted and ordered by their smallest element, so
//! two groupings describing the same collection compare equal.

use std::cmp::Ordering;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::AtomPartition;

/// Largest atom count for enumerating arbitrary set partitions: Bell(12) = 4,213,597.
pub const ALL_GROUPINGS_CAP: usize = 12;
/// Largest atom count for enumerating interval groupings: 2^19 coverings.
pub const CONTIGUOUS_GROUPINGS_CAP: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Grouping {
    blocks: Vec<Vec<usize>>,
    covering: bool,
}

impl Grouping {
    /// Validates and normalizes `blocks` over `atoms` atoms.
    pub fn new(mut blocks: Vec<Vec<usize>>, atoms: usize) -> Result<Self> {
        let mut seen = vec![false; atoms];
        for block in &mut blocks {
            if block.is_empty() {
                return Err(Error::Shape("grouping blocks must be nonempty".into()));
            }
            block.sort_unstable();
            for &n in block.iter() {
                if n >= atoms {
                    return Err(Error::IndexOutOfRange { index: n, atoms });
                }
                if seen[n] {
                    return Err(Error::Shape(format!("atom {n} appears in more than one block")));
                }
                seen[n] = true;
            }
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        let covering = seen.iter().all(|&s| s);
        Ok(Self { blocks, covering })
    }

    /// Every atom in its own block.
    pub fn finest(atoms: usize) -> Self {
        Self {
            blocks: (0..atoms).map(|n| vec![n]).collect(),
            covering: true,
        }
    }

    /// All atoms in one block.
    pub fn coarsest(atoms: usize) -> Self {
        Self {
            blocks: vec![(0..atoms).collect()],
            covering: true,
        }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn is_covering(&self) -> bool {
        self.covering
    }

    /// μ of each block.
    pub fn block_weights(&self, partition: &AtomPartition) -> Vec<f64> {
        self.blocks.iter().map(|b| partition.mass(b)).collect()
    }

    /// Merge blocks `a` and `b` (indices into `blocks()`).
    pub fn merged(&self, a: usize, b: usize) -> Self {
        let mut blocks = self.blocks.clone();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let moved = blocks.remove(hi);
        blocks[lo].extend(moved);
        blocks[lo].sort_unstable();
        blocks.sort_unstable_by_key(|b| b[0]);
        Self {
            blocks,
            covering: self.covering,
        }
    }

    /// Tie-breaking order for searches: fewer blocks first, then the
    /// lexicographically smallest block structure.
    pub fn tie_order(&self, other: &Self) -> Ordering {
        self.blocks
            .len()
            .cmp(&other.blocks.len())
            .then_with(|| self.blocks.cmp(&other.blocks))
    }
}

impl Serialize for Grouping {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.blocks.serialize(s)
    }
}

/// Which family of groupings to enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupingKind {
    /// Arbitrary disjoint collections (set partitions when covering).
    All,
    /// Blocks are runs of consecutive atoms.
    Contiguous,
}

/// Bell numbers via the Bell triangle. Exact for `n ≤ 25`.
pub fn bell(n: usize) -> u64 {
    let mut row = vec![1u64];
    for _ in 0..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().unwrap());
        for &v in &row {
            let last = *next.last().unwrap();
            next.push(last + v);
        }
        row = next;
    }
    row[0]
}

/// Number of groupings `enumerate_groupings` yields.
pub fn grouping_count(atoms: usize, kind: GroupingKind, covering_only: bool) -> u64 {
    match (kind, covering_only) {
        (GroupingKind::All, true) => bell(atoms),
        (GroupingKind::All, false) => bell(atoms + 1) - 1,
        (GroupingKind::Contiguous, true) => 1u64 << (atoms - 1),
        (GroupingKind::Contiguous, false) => {
            // runs ending in a dropped atom / a kept atom
            let (mut dropped, mut kept) = (1u64, 0u64);
            for _ in 0..atoms {
                let d = dropped + kept;
                let k = dropped + 2 * kept;
                dropped = d;
                kept = k;
            }
            dropped + kept - 1
        }
    }
}

/// Streams every grouping of `atoms` atoms of the requested kind exactly once.
pub fn enumerate_groupings(atoms: usize, kind: GroupingKind, covering_only: bool) -> Result<Groupings> {
    if atoms == 0 {
        return Err(Error::Shape("cannot group zero atoms".into()));
    }
    let state = match kind {
        GroupingKind::All => {
            if atoms > ALL_GROUPINGS_CAP {
                return Err(Error::SizeLimit {
                    what: "exhaustive grouping enumeration",
                    cap: ALL_GROUPINGS_CAP,
                    detail: "Bell(12) = 4,213,597 set partitions",
                    got: atoms,
                });
            }
            let len = if covering_only { atoms } else { atoms + 1 };
            State::Partitions {
                labels: vec![0; len],
                prefix_max: vec![0; len],
                started: false,
            }
        }
        GroupingKind::Contiguous => {
            if atoms > CONTIGUOUS_GROUPINGS_CAP {
                return Err(Error::SizeLimit {
                    what: "contiguous grouping enumeration",
                    cap: CONTIGUOUS_GROUPINGS_CAP,
                    detail: "2^19 interval partitions",
                    got: atoms,
                });
            }
            if covering_only {
                State::Cuts {
                    mask: 0,
                    end: 1u64 << (atoms - 1),
                }
            } else {
                State::Runs {
                    states: vec![0; atoms],
                    done: false,
                }
            }
        }
    };
    Ok(Groupings {
        atoms,
        covering_only,
        state,
    })
}

pub struct Groupings {
    atoms: usize,
    covering_only: bool,
    state: State,
}

enum State {
    /// Restricted growth strings. In the non-covering case there is one extra
    /// element whose block is discarded.
    Partitions {
        labels: Vec<usize>,
        prefix_max: Vec<usize>,
        started: bool,
    },
    /// Bit `i` set means a cut between atoms `i` and `i + 1`.
    Cuts { mask: u64, end: u64 },
    /// Per atom: 0 dropped, 1 starts a block, 2 continues the previous block.
    Runs { states: Vec<u8>, done: bool },
}

impl Iterator for Groupings {
    type Item = Grouping;

    fn next(&mut self) -> Option<Grouping> {
        let atoms = self.atoms;
        match &mut self.state {
            State::Partitions {
                labels,
                prefix_max,
                started,
            } => loop {
                if *started && !next_rgs(labels, prefix_max) {
                    return None;
                }
                *started = true;
                if let Some(g) = rgs_grouping(labels, atoms, self.covering_only) {
                    return Some(g);
                }
            },
            State::Cuts { mask, end } => {
                if *mask == *end {
                    return None;
                }
                let mut blocks = vec![vec![0]];
                for n in 1..atoms {
                    if *mask >> (n - 1) & 1 == 1 {
                        blocks.push(vec![n]);
                    } else {
                        blocks.last_mut().unwrap().push(n);
                    }
                }
                *mask += 1;
                Some(Grouping { blocks, covering: true })
            }
            State::Runs { states, done } => loop {
                if *done || !next_runs(states) {
                    *done = true;
                    return None;
                }
                let mut blocks: Vec<Vec<usize>> = Vec::new();
                for (n, &s) in states.iter().enumerate() {
                    match s {
                        1 => blocks.push(vec![n]),
                        2 => blocks.last_mut().unwrap().push(n),
                        _ => {}
                    }
                }
                if blocks.is_empty() {
                    continue;
                }
                let covering = states.iter().all(|&s| s != 0);
                return Some(Grouping { blocks, covering });
            },
        }
    }
}

fn next_rgs(labels: &mut [usize], prefix_max: &mut [usize]) -> bool {
    let len = labels.len();
    let mut i = len;
    while i > 1 {
        i -= 1;
        if labels[i] <= prefix_max[i - 1] {
            labels[i] += 1;
            prefix_max[i] = prefix_max[i - 1].max(labels[i]);
            for j in i + 1..len {
                labels[j] = 0;
                prefix_max[j] = prefix_max[i];
            }
            return true;
        }
    }
    false
}

fn rgs_grouping(labels: &[usize], atoms: usize, covering_only: bool) -> Option<Grouping> {
    let block_count = labels.iter().max().unwrap() + 1;
    let mut blocks = vec![Vec::new(); block_count];
    for (n, &l) in labels.iter().enumerate().take(atoms) {
        blocks[l].push(n);
    }
    if covering_only {
        return Some(Grouping { blocks, covering: true });
    }
    let dropped = labels[atoms];
    let covering = blocks[dropped].is_empty();
    blocks.remove(dropped);
    if blocks.is_empty() {
        return None;
    }
    Some(Grouping { blocks, covering })
}

fn next_runs(states: &mut [u8]) -> bool {
    let mut i = states.len();
    while i > 0 {
        i -= 1;
        states[i] += 1;
        let invalid_continue = states[i] == 2 && (i == 0 || states[i - 1] == 0);
        if states[i] == 3 || invalid_continue {
            states[i] = 0;
            continue;
        }
        return true;
    }
    false
}
