use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};

/// A named group of variables (positions, momenta, a formal parameter...).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Block {
    pub name: String,
    pub dim: usize,
    /// One flag per variable; `true` marks an odd (anticommuting) variable.
    pub odd: Vec<bool>,
}

impl Block {
    pub fn even(name: &str, dim: usize) -> Self {
        Block { name: name.to_string(), dim, odd: vec![false; dim] }
    }

    pub fn with_parities(name: &str, odd: &[bool]) -> Self {
        Block { name: name.to_string(), dim: odd.len(), odd: odd.to_vec() }
    }
}

/// A variable: block index and position inside the block.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub block: usize,
    pub index: usize,
}

/// Variable blocks together with per-block truncation bounds.
///
/// Monomials are stored as keys laid out block by block: for each block the
/// total degree comes first, then the exponents. Lexicographic order on such
/// keys is the block-major, graded-lex monomial order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct JetSpace {
    blocks: Vec<Block>,
    trunc: Vec<u32>,
    offsets: Vec<usize>,
    key_len: usize,
    odd_slots: Vec<usize>,
}

impl JetSpace {
    pub fn new(blocks: Vec<(Block, u32)>) -> Result<Arc<Self>> {
        let mut names = std::collections::HashSet::new();
        let mut offsets = Vec::with_capacity(blocks.len());
        let mut odd_slots = Vec::new();
        let mut key_len = 0;
        for (b, _) in &blocks {
            if !names.insert(b.name.clone()) {
                bail!(Shape, "duplicate block name `{}`", b.name);
            }
            if b.odd.len() != b.dim {
                bail!(Shape, "block `{}`: {} parity flags for dimension {}", b.name, b.odd.len(), b.dim);
            }
            offsets.push(key_len);
            for (i, &o) in b.odd.iter().enumerate() {
                if o {
                    odd_slots.push(key_len + 1 + i);
                }
            }
            key_len += 1 + b.dim;
        }
        let (blocks, trunc) = blocks.into_iter().unzip();
        Ok(Arc::new(JetSpace { blocks, trunc, offsets, key_len, odd_slots }))
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn trunc(&self) -> &[u32] {
        &self.trunc
    }

    pub fn block_index(&self, name: &str) -> Option<usize> {
        self.blocks.iter().position(|b| b.name == name)
    }

    pub fn block(&self, name: &str) -> Option<&Block> {
        self.blocks.iter().find(|b| b.name == name)
    }

    pub fn trunc_of(&self, name: &str) -> Option<u32> {
        self.block_index(name).map(|i| self.trunc[i])
    }

    pub fn var(&self, block: &str, index: usize) -> Result<Var> {
        match self.block_index(block) {
            Some(b) if index < self.blocks[b].dim => Ok(Var { block: b, index }),
            Some(_) => bail!(Shape, "variable {block}[{index}] out of range"),
            None => bail!(Shape, "unknown block `{block}`"),
        }
    }

    pub fn vars(&self, block: &str) -> Result<Vec<Var>> {
        let b = match self.block_index(block) {
            Some(b) => b,
            None => bail!(Shape, "unknown block `{block}`"),
        };
        Ok((0..self.blocks[b].dim).map(|index| Var { block: b, index }).collect())
    }

    pub fn all_vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.blocks
            .iter()
            .enumerate()
            .flat_map(|(b, blk)| (0..blk.dim).map(move |index| Var { block: b, index }))
    }

    pub fn is_odd(&self, v: Var) -> bool {
        self.blocks[v.block].odd[v.index]
    }

    pub fn var_name(&self, v: Var) -> String {
        let b = &self.blocks[v.block];
        if b.dim == 1 {
            b.name.clone()
        } else {
            format!("{}{}", b.name, v.index + 1)
        }
    }

    /// Same blocks, new truncation for one block.
    pub fn with_trunc(&self, block: &str, t: u32) -> Result<Arc<Self>> {
        let Some(b) = self.block_index(block) else { bail!(Shape, "unknown block `{block}`") };
        let mut s = self.clone();
        s.trunc[b] = t;
        Ok(Arc::new(s))
    }

    /// Append a block (error if the name is taken).
    pub fn with_block(&self, block: Block, t: u32) -> Result<Arc<Self>> {
        let mut v: Vec<(Block, u32)> = self.blocks.iter().cloned().zip(self.trunc.iter().copied()).collect();
        v.push((block, t));
        JetSpace::new(v)
    }

    /// Drop the named block.
    pub fn without_block(&self, block: &str) -> Result<Arc<Self>> {
        if self.block_index(block).is_none() {
            bail!(Shape, "unknown block `{block}`");
        }
        JetSpace::new(
            self.blocks
                .iter()
                .cloned()
                .zip(self.trunc.iter().copied())
                .filter(|(b, _)| b.name != block)
                .collect(),
        )
    }

    /// Rename a block, keeping its position, dimension, parities and bound.
    pub fn renamed(&self, from: &str, to: &str) -> Result<Arc<Self>> {
        let Some(b) = self.block_index(from) else { bail!(Shape, "unknown block `{from}`") };
        let mut v: Vec<(Block, u32)> = self.blocks.iter().cloned().zip(self.trunc.iter().copied()).collect();
        v[b].0.name = to.to_string();
        JetSpace::new(v)
    }

    /// Append the blocks of `other` whose names are absent here and not in `skip`.
    pub fn union_with(&self, other: &JetSpace, skip: &[&str]) -> Result<Arc<Self>> {
        let mut v: Vec<(Block, u32)> = self.blocks.iter().cloned().zip(self.trunc.iter().copied()).collect();
        for (b, t) in other.blocks.iter().zip(&other.trunc) {
            if skip.contains(&b.name.as_str()) {
                continue;
            }
            match self.block(&b.name) {
                None => v.push((b.clone(), *t)),
                Some(mine) if mine.odd == b.odd => {}
                Some(_) => bail!(Shape, "block `{}` has different shapes in the two spaces", b.name),
            }
        }
        JetSpace::new(v)
    }

    /// Like [`JetSpace::union_with`], but shared blocks keep the larger bound.
    pub fn union_widened(&self, other: &JetSpace) -> Result<Arc<Self>> {
        let mut u = (*self.union_with(other, &[])?).clone();
        for (b, &t) in other.blocks.iter().zip(&other.trunc) {
            let i = u.block_index(&b.name).expect("block added by the union");
            u.trunc[i] = u.trunc[i].max(t);
        }
        Ok(Arc::new(u))
    }

    /// Blocks other than the named ones, with their bounds.
    pub fn other_blocks(&self, names: &[&str]) -> Vec<(Block, u32)> {
        self.blocks
            .iter()
            .cloned()
            .zip(self.trunc.iter().copied())
            .filter(|(b, _)| !names.contains(&b.name.as_str()))
            .collect()
    }

    pub(crate) fn key_len(&self) -> usize {
        self.key_len
    }

    pub(crate) fn slot(&self, v: Var) -> usize {
        self.offsets[v.block] + 1 + v.index
    }

    pub(crate) fn degree_slot(&self, block: usize) -> usize {
        self.offsets[block]
    }

    pub(crate) fn odd_slots(&self) -> &[usize] {
        &self.odd_slots
    }

    /// Whether a key respects every truncation bound.
    pub(crate) fn admits(&self, key: &[u16]) -> bool {
        self.offsets.iter().zip(&self.trunc).all(|(&o, &t)| u32::from(key[o]) <= t)
            && self.odd_slots.iter().all(|&s| key[s] <= 1)
    }
}

impl fmt::Display for JetSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .blocks
            .iter()
            .zip(&self.trunc)
            .map(|(b, t)| {
                let odd = b.odd.iter().filter(|&&o| o).count();
                format!("{}({}|{})≤{}", b.name, b.dim - odd, odd, t)
            })
            .collect();
        write!(f, "[{}]", parts.join(", "))
    }
}
