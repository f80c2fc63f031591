//! Deterministic graph generators used by the CLI and the test suites.

use rand::Rng;

use crate::graph::LabelledGraph;

/// Directed cycle `0 → 1 → … → n-1 → 0` with all-zero labels of dimension `dim`.
pub fn cycle(n: usize, dim: usize) -> LabelledGraph {
    let edges = (0..n).map(|i| (i, (i + 1) % n)).filter(|&(u, v)| u != v || n == 1);
    LabelledGraph::new(vec![vec![0.0; dim]; n], edges).expect("cycle is a valid graph")
}

/// Star with centre `0` pointing at `leaves` leaves; all-zero labels.
pub fn star(leaves: usize, dim: usize) -> LabelledGraph {
    LabelledGraph::new(vec![vec![0.0; dim]; leaves + 1], (1..=leaves).map(|v| (0, v)))
        .expect("star is a valid graph")
}

/// Directed Erdős–Rényi `G(n, p)` without self-loops; every label bit is an
/// independent fair coin.
pub fn erdos_renyi<R: Rng + ?Sized>(n: usize, p: f64, dim: usize, rng: &mut R) -> LabelledGraph {
    let labels = (0..n)
        .map(|_| (0..dim).map(|_| f64::from(u8::from(rng.gen_bool(0.5)))).collect())
        .collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    LabelledGraph::new(labels, edges).expect("generated graph is valid")
}

/// A uniformly random permutation of `0..n`.
pub fn random_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    perm
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cycle_shape() {
        let g = cycle(6, 1);
        assert_eq!(g.edge_count(), 6);
        assert!(g.has_edge(5, 0));
    }

    #[test]
    fn seeded_generation_is_reproducible() {
        let a = erdos_renyi(7, 0.3, 2, &mut ChaCha8Rng::seed_from_u64(9));
        let b = erdos_renyi(7, 0.3, 2, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
        assert!(a.is_boolean());
        assert!((0..7).all(|v| !a.has_edge(v, v)));
    }
}
