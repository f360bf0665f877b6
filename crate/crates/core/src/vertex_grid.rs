use std::collections::HashMap;

use crate::error::{FifError, Result};
use crate::gasket::{address_dyadic, canonicalize, enumerate_vertices, Address, Bary, Corner, DyadicBary, Word};

/// The depth-`m` vertex set of one gasket with exact dyadic keys and the
/// corner indices of every depth-`m` cell.
///
/// Purely combinatorial: the same table serves any corner geometry.
#[derive(Debug, Clone)]
pub struct VertexGrid {
    depth: usize,
    vertices: Vec<Address>,
    nums: Vec<[u64; 3]>,
    index: HashMap<[u64; 3], usize>,
    cells: Vec<[usize; 3]>,
}

impl VertexGrid {
    pub fn new(depth: usize) -> Result<Self> {
        let vertices = enumerate_vertices(depth)?;
        let level = depth as u32;
        let nums: Vec<[u64; 3]> = vertices
            .iter()
            .map(|a| address_dyadic(a).lifted(level).nums)
            .collect();
        let index: HashMap<[u64; 3], usize> =
            nums.iter().enumerate().map(|(i, &k)| (k, i)).collect();
        let mut cells = Vec::with_capacity(3usize.pow(level));
        for w in Word::all(depth) {
            let mut corners = [0; 3];
            for c in Corner::ALL {
                let key = address_dyadic(&Address::new(w.clone(), c)).nums;
                corners[c.index()] = index[&key];
            }
            cells.push(corners);
        }
        Ok(VertexGrid {
            depth,
            vertices,
            nums,
            index,
            cells,
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Canonical addresses, sorted.
    pub fn vertices(&self) -> &[Address] {
        &self.vertices
    }

    /// Numerators at level `depth`.
    pub fn nums(&self, i: usize) -> [u64; 3] {
        self.nums[i]
    }

    pub fn bary(&self, i: usize) -> Bary {
        let d = (self.depth as f64).exp2();
        self.nums[i].map(|n| n as f64 / d)
    }

    /// Index of the vertex with these numerators at level `depth`.
    pub fn lookup(&self, nums: &[u64; 3]) -> Option<usize> {
        self.index.get(nums).copied()
    }

    /// Index of an arbitrary address, if it names a vertex of this grid.
    pub fn index_of(&self, a: &Address) -> Option<usize> {
        let c = canonicalize(a);
        if c.word.len() > self.depth {
            return None;
        }
        self.lookup(&address_dyadic(&c).lifted(self.depth as u32).nums)
    }

    pub fn index_of_dyadic(&self, d: &DyadicBary) -> Option<usize> {
        let r = d.reduced();
        if r.level as usize > self.depth {
            return None;
        }
        self.lookup(&r.lifted(self.depth as u32).nums)
    }

    /// Vertex indices of the three corners of the depth-`depth` cell with this word index.
    pub fn cell_corners(&self, cell: usize) -> [usize; 3] {
        self.cells[cell]
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }
}

/// Peels `steps` letters off a vertex given by level-`level` numerators.
///
/// Chooses the smallest admissible child at each step and returns the letters
/// with the preimage numerators at level `level - steps`.
pub fn peel_exact(mut nums: [u64; 3], level: usize, steps: usize) -> Result<(Vec<Corner>, [u64; 3])> {
    if steps > level {
        return Err(FifError::Precondition(format!(
            "cannot peel {steps} letters from a level-{level} vertex"
        )));
    }
    let mut letters = Vec::with_capacity(steps);
    for k in 0..steps {
        let half = 1u64 << (level - k - 1);
        let c = (0..3)
            .find(|&i| nums[i] >= half)
            .ok_or_else(|| FifError::Internal(format!("{nums:?} is not a gasket vertex")))?;
        nums[c] -= half;
        letters.push(Corner::from_index(c));
    }
    Ok((letters, nums))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gasket::vertex_count;

    #[test]
    fn grid_sizes() {
        for m in 0..5 {
            let g = VertexGrid::new(m).unwrap();
            assert_eq!(g.len(), vertex_count(m));
            assert_eq!(g.cell_count(), 3usize.pow(m as u32));
        }
    }

    #[test]
    fn lookup_non_canonical() {
        let g = VertexGrid::new(2).unwrap();
        let a: Address = "2@1".parse().unwrap();
        let b: Address = "12@2".parse().unwrap();
        assert_eq!(g.index_of(&a), g.index_of(&b));
        assert!(g.index_of(&"123@1".parse().unwrap()).is_none());
    }

    #[test]
    fn peel_picks_smallest_cell() {
        // Midpoint of p1 p2 at level 1: both cells 1 and 2 contain it.
        let (letters, pre) = peel_exact([1, 1, 0], 1, 1).unwrap();
        assert_eq!(letters, vec![Corner::from_index(0)]);
        assert_eq!(pre, [0, 1, 0]);
    }
}
