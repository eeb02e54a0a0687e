//! Finite pieces `V_n` of the Cayley tree and the Potts-SOS Hamiltonian.
//!
//! Vertices are numbered breadth first, so the sphere `W_j` occupies a
//! contiguous index range and `V_{n-1}` is a prefix of `V_n`. Group words
//! are never built: the level of a vertex is the length of its word, and
//! its parity is the coset of the even-length subgroup.

use std::ops::Range;

use crate::error::{Error, Result};

/// Upper bound on `|V_n|` accepted by [`FiniteTree::new`].
pub const MAX_VERTICES: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteTree {
    k: usize,
    depth: usize,
    level: Vec<usize>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    level_start: Vec<usize>,
}

impl FiniteTree {
    /// Builds `V_n` of the Cayley tree of order `k`: the root has `k + 1`
    /// children and every other vertex above level `n` has `k`.
    pub fn new(k: usize, n: usize) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidParameter("tree order k must be at least 1".into()));
        }
        let total = vertex_count(k, n)
            .filter(|&c| c <= MAX_VERTICES as u128)
            .ok_or_else(|| {
                Error::InvalidParameter(format!("tree with k={k}, n={n} exceeds {MAX_VERTICES} vertices"))
            })? as usize;

        let mut level = Vec::with_capacity(total);
        let mut parent = Vec::with_capacity(total);
        let mut children = vec![Vec::new(); total];
        let mut level_start = Vec::with_capacity(n + 2);

        level.push(0);
        parent.push(None);
        level_start.push(0);
        let mut frontier = 0..1;
        for depth in 1..=n {
            level_start.push(level.len());
            let start = level.len();
            for v in frontier.clone() {
                let fan_out = if v == 0 { k + 1 } else { k };
                for _ in 0..fan_out {
                    let child = level.len();
                    level.push(depth);
                    parent.push(Some(v));
                    children[v].push(child);
                }
            }
            frontier = start..level.len();
        }
        level_start.push(level.len());
        debug_assert_eq!(level.len(), total);

        Ok(Self { k, depth: n, level, parent, children, level_start })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Radius `n` of the ball `V_n`.
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.level.len()
    }

    pub fn is_empty(&self) -> bool {
        self.level.is_empty()
    }

    pub fn level(&self, v: usize) -> usize {
        self.level[v]
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    /// Direct successors `S(x)`.
    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    /// 0 for even word length, 1 for odd.
    pub fn parity(&self, v: usize) -> usize {
        self.level[v] % 2
    }

    /// Index range of the sphere `W_j`.
    pub fn sphere(&self, j: usize) -> Range<usize> {
        assert!(j <= self.depth, "sphere {j} outside V_{}", self.depth);
        self.level_start[j]..self.level_start[j + 1]
    }

    /// Index range of the ball `V_j`; a prefix of the full vertex range.
    pub fn ball(&self, j: usize) -> Range<usize> {
        assert!(j <= self.depth, "ball {j} outside V_{}", self.depth);
        0..self.level_start[j + 1]
    }

    /// Edges of `L_n` as `(parent, child)` pairs.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.parent.iter().enumerate().filter_map(|(v, p)| p.map(|p| (p, v)))
    }

    /// Number of configurations `(m + 1)^|V_n|`, or `None` on overflow.
    pub fn config_count(&self, m: usize) -> Option<u128> {
        (m as u128 + 1).checked_pow(u32::try_from(self.len()).ok()?)
    }
}

/// `|V_n| = 1 + (k+1)(k^n - 1)/(k - 1)` (and `1 + 2n` for `k = 1`).
pub fn vertex_count(k: usize, n: usize) -> Option<u128> {
    let k = k as u128;
    let mut total: u128 = 1;
    let mut sphere: u128 = 1;
    for depth in 1..=n {
        sphere = sphere.checked_mul(if depth == 1 { k + 1 } else { k })?;
        total = total.checked_add(sphere)?;
    }
    Some(total)
}

/// A spin assignment on every vertex of a [`FiniteTree`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiniteConfig {
    spins: Vec<usize>,
}

impl FiniteConfig {
    pub fn new(tree: &FiniteTree, m: usize, spins: Vec<usize>) -> Result<Self> {
        if spins.len() != tree.len() {
            return Err(Error::MalformedConfig(format!(
                "{} spins for {} vertices",
                spins.len(),
                tree.len()
            )));
        }
        if let Some((v, s)) = spins.iter().enumerate().find(|(_, &s)| s > m) {
            return Err(Error::MalformedConfig(format!("spin {s} at vertex {v} exceeds m = {m}")));
        }
        Ok(Self { spins })
    }

    pub fn spins(&self) -> &[usize] {
        &self.spins
    }

    pub fn spin(&self, v: usize) -> usize {
        self.spins[v]
    }

    /// Global reflection `sigma -> m - sigma`.
    pub fn reflected(&self, m: usize) -> Self {
        Self { spins: self.spins.iter().map(|&s| m - s).collect() }
    }
}

/// Energy of one bond: `-J |s - t| - J_p delta(s, t)`.
pub fn bond_energy(s: usize, t: usize, j: f64, j_p: f64) -> f64 {
    let diff = s.abs_diff(t);
    let same = if diff == 0 { 1.0 } else { 0.0 };
    -j * diff as f64 - j_p * same
}

/// Potts-SOS Hamiltonian summed over all edges of the finite tree.
pub fn energy(tree: &FiniteTree, config: &FiniteConfig, j: f64, j_p: f64) -> Result<f64> {
    if config.spins.len() != tree.len() {
        return Err(Error::MalformedConfig(format!(
            "{} spins for {} vertices",
            config.spins.len(),
            tree.len()
        )));
    }
    Ok(tree
        .edges()
        .map(|(x, y)| bond_energy(config.spins[x], config.spins[y], j, j_p))
        .sum())
}
