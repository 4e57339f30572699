//! Truncated rotational Hilbert space `|j, m⟩, j ≤ j_max` and its invariant
//! block structure under linearly polarized driving.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Which interaction drives the rotor. Orientation couples `Δj = ±1` through
/// `cos θ`; alignment couples `Δj ∈ {0, ±2}` through `cos² θ` and therefore
/// also conserves the parity of `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProcessKind {
    Orientation,
    Alignment,
}

impl fmt::Display for ProcessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProcessKind::Orientation => "orientation",
            ProcessKind::Alignment => "alignment",
        })
    }
}

impl std::str::FromStr for ProcessKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "orientation" | "o" => Ok(ProcessKind::Orientation),
            "alignment" | "a" => Ok(ProcessKind::Alignment),
            other => Err(format!("unknown process `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BasisIndex {
    pub j: u32,
    pub m: i32,
}

impl BasisIndex {
    pub fn energy(&self) -> u64 {
        let j = self.j as u64;
        j * (j + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Basis {
    j_max: u32,
    states: Vec<BasisIndex>,
}

/// Enumerates `|j, m⟩` with `|m| ≤ j ≤ j_max`, ordered by ascending `m` and
/// then ascending `j`, so every `m`-block is a contiguous index range.
pub fn build_basis(j_max: u32) -> Basis {
    let jm = j_max as i32;
    let mut states = Vec::with_capacity(((j_max + 1) * (j_max + 1)) as usize);
    for m in -jm..=jm {
        for j in m.unsigned_abs()..=j_max {
            states.push(BasisIndex { j, m });
        }
    }
    Basis { j_max, states }
}

impl Basis {
    pub fn j_max(&self) -> u32 {
        self.j_max
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[BasisIndex] {
        &self.states
    }

    pub fn state(&self, k: usize) -> BasisIndex {
        self.states[k]
    }

    /// Flattened index of `(j, m)`, if it belongs to the basis.
    pub fn index_of(&self, j: u32, m: i32) -> Option<usize> {
        if j > self.j_max || m.unsigned_abs() > j {
            return None;
        }
        // Offset of block m: sum over m' < m of (j_max - |m'| + 1).
        let jm = self.j_max as i64;
        let offset: i64 = (-jm..m as i64).map(|mm| jm - mm.abs() + 1).sum();
        Some(offset as usize + (j - m.unsigned_abs()) as usize)
    }

    /// Index map from this basis into a larger one (`other.j_max ≥ self.j_max`).
    pub fn embedding_into(&self, other: &Basis) -> Vec<usize> {
        assert!(other.j_max >= self.j_max, "target basis must be at least as large");
        self.states
            .iter()
            .map(|s| other.index_of(s.j, s.m).expect("state present in larger basis"))
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let states: Vec<[i64; 2]> = self.states.iter().map(|s| [s.j as i64, s.m as i64]).collect();
        serde_json::json!({ "j_max": self.j_max, "states": states })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(j: u32) -> Self {
        if j.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub m: i32,
    pub parity: Option<Parity>,
    /// Flattened basis indices, ascending.
    pub members: Vec<usize>,
}

impl Block {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockDecomposition {
    pub kind: ProcessKind,
    pub blocks: Vec<Block>,
}

/// Splits the basis into dynamically invariant blocks: one per `m` for
/// orientation, one per `(m, parity of j)` for alignment. Empty sub-blocks
/// are dropped.
pub fn block_decomposition(basis: &Basis, kind: ProcessKind) -> BlockDecomposition {
    let jm = basis.j_max as i32;
    let mut blocks = Vec::new();
    for m in -jm..=jm {
        let in_m = || {
            basis
                .states
                .iter()
                .enumerate()
                .filter(move |(_, s)| s.m == m)
        };
        match kind {
            ProcessKind::Orientation => blocks.push(Block {
                m,
                parity: None,
                members: in_m().map(|(k, _)| k).collect(),
            }),
            ProcessKind::Alignment => {
                for parity in [Parity::Even, Parity::Odd] {
                    let members: Vec<usize> = in_m()
                        .filter(|(_, s)| Parity::of(s.j) == parity)
                        .map(|(k, _)| k)
                        .collect();
                    if !members.is_empty() {
                        blocks.push(Block {
                            m,
                            parity: Some(parity),
                            members,
                        });
                    }
                }
            }
        }
    }
    BlockDecomposition { kind, blocks }
}

impl BlockDecomposition {
    /// Block label for each flattened basis index.
    pub fn block_of(&self, dim: usize) -> Vec<usize> {
        let mut label = vec![usize::MAX; dim];
        for (b, block) in self.blocks.iter().enumerate() {
            for &k in &block.members {
                label[k] = b;
            }
        }
        label
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Block::len).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_is_square() {
        assert_eq!(build_basis(0).dim(), 1);
        assert_eq!(build_basis(0).states(), &[BasisIndex { j: 0, m: 0 }]);
        assert_eq!(build_basis(3).dim(), 16);
        assert_eq!(build_basis(8).dim(), 81);
    }

    #[test]
    fn ordering_m_then_j() {
        let b = build_basis(1);
        let got: Vec<(u32, i32)> = b.states().iter().map(|s| (s.j, s.m)).collect();
        assert_eq!(got, vec![(1, -1), (0, 0), (1, 0), (1, 1)]);
        for (k, s) in b.states().iter().enumerate() {
            assert_eq!(b.index_of(s.j, s.m), Some(k));
        }
        assert_eq!(b.index_of(2, 0), None);
        assert_eq!(b.index_of(0, 1), None);
    }

    #[test]
    fn orientation_blocks_small() {
        let d = block_decomposition(&build_basis(1), ProcessKind::Orientation);
        assert_eq!(d.sizes(), vec![1, 2, 1]);
        assert_eq!(d.blocks.iter().map(|b| b.m).collect::<Vec<_>>(), vec![-1, 0, 1]);
    }

    #[test]
    fn orientation_blocks_jmax8() {
        let d = block_decomposition(&build_basis(8), ProcessKind::Orientation);
        assert_eq!(d.blocks.len(), 17);
        let want: Vec<usize> = (-8i32..=8).map(|m| (8 - m.abs() + 1) as usize).collect();
        assert_eq!(d.sizes(), want);
    }

    #[test]
    fn alignment_m0_split_by_parity() {
        let b = build_basis(2);
        let d = block_decomposition(&b, ProcessKind::Alignment);
        let m0: Vec<&Block> = d.blocks.iter().filter(|bl| bl.m == 0).collect();
        assert_eq!(m0.len(), 2);
        assert_eq!(m0[0].parity, Some(Parity::Even));
        let js: Vec<u32> = m0[0].members.iter().map(|&k| b.state(k).j).collect();
        assert_eq!(js, vec![0, 2]);
        assert_eq!(m0[1].parity, Some(Parity::Odd));
        assert_eq!(m0[1].len(), 1);
        // m = ±2 has only j = 2, so no odd sub-block.
        assert_eq!(d.blocks.iter().filter(|bl| bl.m == 2).count(), 1);
    }

    #[test]
    fn blocks_partition_basis() {
        for j_max in 0..=12 {
            let b = build_basis(j_max);
            for kind in [ProcessKind::Orientation, ProcessKind::Alignment] {
                let d = block_decomposition(&b, kind);
                assert_eq!(d.sizes().iter().sum::<usize>(), b.dim());
                let labels = d.block_of(b.dim());
                assert!(labels.iter().all(|&l| l != usize::MAX));
                if kind == ProcessKind::Alignment {
                    for bl in &d.blocks {
                        let p = Parity::of(b.state(bl.members[0]).j);
                        assert!(bl.members.iter().all(|&k| Parity::of(b.state(k).j) == p));
                    }
                }
            }
        }
    }

    #[test]
    fn json_is_stable() {
        let a = serde_json::to_string(&build_basis(2).to_json()).unwrap();
        let b = serde_json::to_string(&build_basis(2).to_json()).unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with("{\"j_max\":2,\"states\":[[2,-2],[1,-1],[2,-1],"));
    }
}
