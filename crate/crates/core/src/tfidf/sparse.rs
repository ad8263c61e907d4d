use serde::{Deserialize, Serialize};

/// Sparse vector over term ids. Entries are sorted by id and never zero;
/// `norm` caches the L2 norm of the stored weights.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SparseVector {
    entries: Vec<(u32, f64)>,
    norm: f64,
}

impl SparseVector {
    /// Builds a vector from arbitrary (id, weight) pairs. Duplicate ids are summed
    /// and zero weights dropped.
    pub fn new(mut entries: Vec<(u32, f64)>) -> Self {
        entries.sort_unstable_by_key(|e| e.0);
        let mut merged: Vec<(u32, f64)> = Vec::with_capacity(entries.len());
        for (id, w) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == id => last.1 += w,
                _ => merged.push((id, w)),
            }
        }
        merged.retain(|e| e.1 != 0.0);
        let norm = l2(&merged);
        Self {
            entries: merged,
            norm,
        }
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Unit-length copy; the zero vector stays zero.
    pub fn normalized(&self) -> Self {
        if self.is_zero() {
            return Self::default();
        }
        let entries: Vec<(u32, f64)> = self
            .entries
            .iter()
            .map(|&(id, w)| (id, w / self.norm))
            .collect();
        let norm = l2(&entries);
        Self { entries, norm }
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    /// Cosine similarity; 0 when either side is the zero vector.
    pub fn cosine(&self, other: &SparseVector) -> f64 {
        if self.is_zero() || other.is_zero() {
            return 0.0;
        }
        self.dot(other) / (self.norm * other.norm)
    }

    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for &(id, w) in &self.entries {
            out[id as usize] = w;
        }
        out
    }
}

fn l2(entries: &[(u32, f64)]) -> f64 {
    entries.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt()
}
