//! Hierarchical menu structure, item labels and target-path taxonomy.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seed;

pub const MIN_BREADTH: usize = 2;
pub const MAX_BREADTH: usize = 12;
/// Upper bound on `breadth^depth`, keeps label tables bounded.
pub const MAX_LEAVES: usize = 1_000_000;
pub const BACK_LABEL: &str = "Back";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MenuError {
    #[error("breadth {0} outside [{MIN_BREADTH}, {MAX_BREADTH}]")]
    BreadthOutOfRange(usize),
    #[error("depth {depth} invalid for breadth {breadth}")]
    DepthOutOfRange { breadth: usize, depth: usize },
    #[error("invalid path {indices:?}: {reason}")]
    InvalidPath { indices: Vec<usize>, reason: String },
    #[error("cannot draw {requested} paths of class {class}; available pool sizes {available:?}")]
    PoolExhausted { class: usize, requested: usize, available: BTreeMap<usize, usize> },
}

/// Number of positions where consecutive item directions differ.
pub fn classify_bends(indices: &[usize]) -> usize {
    indices.windows(2).filter(|w| w[0] != w[1]).count()
}

/// The item pointing back toward the previous submenu center after entering
/// through `entry`.
pub fn back_index(entry: usize, breadth: usize) -> usize {
    (entry + breadth / 2) % breadth
}

/// Whether `next` points 180° away from `prev`.
pub fn is_reversal(prev: usize, next: usize, breadth: usize) -> bool {
    breadth % 2 == 0 && back_index(prev, breadth) == next
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ItemPath {
    pub indices: Vec<usize>,
    pub bent_class: usize,
}

impl ItemPath {
    pub fn new(indices: Vec<usize>) -> Self {
        let bent_class = classify_bends(&indices);
        Self { indices, bent_class }
    }

    pub fn depth(&self) -> usize {
        self.indices.len()
    }

    pub fn has_reversal(&self, breadth: usize) -> bool {
        self.indices.windows(2).any(|w| is_reversal(w[0], w[1], breadth))
    }
}

impl From<Vec<usize>> for ItemPath {
    fn from(indices: Vec<usize>) -> Self {
        Self::new(indices)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MenuSpec {
    pub breadth: usize,
    pub depth: usize,
    pub back_reserved: bool,
    pub label_seed: u64,
    /// `labels[level][node]`, where `node` is the mixed-radix value of the
    /// path prefix ending at that level.
    pub labels: Vec<Vec<String>>,
}

/// Label for the `n`-th slot of the cycling sequence A..Z, A1..Z1, A2..
fn cycled_label(n: usize) -> String {
    let letter = char::from(b'A' + (n % 26) as u8);
    match n / 26 {
        0 => letter.to_string(),
        round => format!("{letter}{round}"),
    }
}

fn check_shape(breadth: usize, depth: usize) -> Result<(), MenuError> {
    if !(MIN_BREADTH..=MAX_BREADTH).contains(&breadth) {
        return Err(MenuError::BreadthOutOfRange(breadth));
    }
    let leaves = u32::try_from(depth).ok().and_then(|d| breadth.checked_pow(d));
    match leaves {
        Some(n) if depth >= 1 && n <= MAX_LEAVES => Ok(()),
        _ => Err(MenuError::DepthOutOfRange { breadth, depth }),
    }
}

impl MenuSpec {
    /// Builds a fully labelled menu. Each level's labels are a seeded
    /// permutation of the cycling letter sequence, so the arrangement changes
    /// with `label_seed` while the structure does not.
    pub fn build(breadth: usize, depth: usize, label_seed: u64, back_reserved: bool) -> Result<Self, MenuError> {
        check_shape(breadth, depth)?;
        let mut labels = Vec::with_capacity(depth);
        let mut nodes = 1usize;
        for level in 0..depth {
            nodes *= breadth;
            let mut pool: Vec<String> = (0..nodes).map(cycled_label).collect();
            let mut rng = seed::rng(seed::derive(label_seed, &[seed::domain::LABELS, level as u64]));
            pool.shuffle(&mut rng);
            if back_reserved && level > 0 {
                for (node, label) in pool.iter_mut().enumerate() {
                    let entry = (node / breadth) % breadth;
                    if node % breadth == back_index(entry, breadth) {
                        *label = BACK_LABEL.to_string();
                    }
                }
            }
            labels.push(pool);
        }
        Ok(Self { breadth, depth, back_reserved, label_seed, labels })
    }

    /// Number of selectable leaf commands.
    pub fn leaf_count(&self) -> usize {
        let b = self.breadth;
        if self.back_reserved {
            b * (b - 1).pow(self.depth as u32 - 1)
        } else {
            b.pow(self.depth as u32)
        }
    }

    /// Whether `index` is the reserved Back item at `level` (0-based) after
    /// entering through `prefix`.
    pub fn is_back_item(&self, prefix: &[usize], index: usize) -> bool {
        match prefix.last() {
            Some(&entry) if self.back_reserved => index == back_index(entry, self.breadth),
            _ => false,
        }
    }

    fn node_index(&self, prefix: &[usize]) -> usize {
        prefix.iter().fold(0, |acc, &i| acc * self.breadth + i)
    }

    /// Label of the item reached by `prefix` (non-empty, at most `depth` long).
    pub fn label(&self, prefix: &[usize]) -> Option<&str> {
        let level = prefix.len().checked_sub(1)?;
        if level >= self.depth || prefix.iter().any(|&i| i >= self.breadth) {
            return None;
        }
        self.labels[level].get(self.node_index(prefix)).map(String::as_str)
    }

    /// Labels of the items of the submenu opened by `prefix`.
    pub fn submenu_labels(&self, prefix: &[usize]) -> Vec<&str> {
        let mut p = prefix.to_vec();
        (0..self.breadth)
            .filter_map(|i| {
                p.push(i);
                let l = self.label(&p);
                p.pop();
                l
            })
            .collect()
    }

    pub fn path_labels(&self, path: &ItemPath) -> Vec<String> {
        (1..=path.indices.len())
            .filter_map(|k| self.label(&path.indices[..k]).map(str::to_owned))
            .collect()
    }

    pub fn validate_path(&self, path: &ItemPath) -> Result<(), MenuError> {
        let fail = |reason: &str| MenuError::InvalidPath { indices: path.indices.clone(), reason: reason.into() };
        if path.indices.len() != self.depth {
            return Err(fail("length differs from menu depth"));
        }
        if path.indices.iter().any(|&i| i >= self.breadth) {
            return Err(fail("index out of range"));
        }
        if path.bent_class != classify_bends(&path.indices) {
            return Err(fail("bent class inconsistent with indices"));
        }
        for k in 1..path.indices.len() {
            if self.is_back_item(&path.indices[..k], path.indices[k]) {
                return Err(fail("path selects a reserved Back item"));
            }
        }
        Ok(())
    }

    /// All index sequences of full depth in lexicographic order, Back items
    /// included.
    pub fn enumerate_paths(&self) -> impl Iterator<Item = ItemPath> + '_ {
        let total = self.breadth.pow(self.depth as u32);
        (0..total).map(move |mut n| {
            let mut indices = vec![0; self.depth];
            for slot in indices.iter_mut().rev() {
                *slot = n % self.breadth;
                n /= self.breadth;
            }
            ItemPath::new(indices)
        })
    }

    /// Selectable target paths grouped by bent class.
    pub fn path_pools(&self, exclude_reversals: bool) -> BTreeMap<usize, Vec<ItemPath>> {
        let mut pools: BTreeMap<usize, Vec<ItemPath>> = BTreeMap::new();
        for path in self.enumerate_paths() {
            if exclude_reversals && path.has_reversal(self.breadth) {
                continue;
            }
            if self.validate_path(&path).is_err() {
                continue;
            }
            pools.entry(path.bent_class).or_default().push(path);
        }
        pools
    }

    /// Draws distinct target paths with the requested number per bent class.
    /// Output is ordered by class, then draw order.
    pub fn sample_target_paths(
        &self,
        counts: &BTreeMap<usize, usize>,
        seed: u64,
        exclude_reversals: bool,
    ) -> Result<Vec<ItemPath>, MenuError> {
        let pools = self.path_pools(exclude_reversals);
        let sizes: BTreeMap<usize, usize> = (0..self.depth).map(|c| (c, pools.get(&c).map_or(0, Vec::len))).collect();
        let mut out = Vec::new();
        for (&class, &requested) in counts {
            let available = sizes.get(&class).copied().unwrap_or(0);
            if requested > available {
                return Err(MenuError::PoolExhausted { class, requested, available: sizes });
            }
            if requested == 0 {
                continue;
            }
            let mut pool = pools[&class].clone();
            let mut rng = seed::rng(seed::derive(seed, &[seed::domain::PATHS, class as u64]));
            pool.partial_shuffle(&mut rng, requested);
            out.extend(pool.into_iter().take(requested));
        }
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("menu serialises")
    }
}
