//! The ten-variable cyclic adjacent landscape used throughout the tests and
//! the `replicate-paper` command, with its hyperplane windows and the
//! chordal completion that yields an exact order-5 factorization.

use crate::adf::{AdfInstance, Subfunction, Wgb};

/// Codomain vectors, one per subfunction. Subfunction `i` acts on
/// `(x_i, x_{i+1}, x_{i+2})` with indices taken mod 10.
pub const CODOMAINS: [[u8; 8]; 10] = [
    [1, 1, 0, 0, 1, 0, 0, 1],
    [0, 1, 0, 1, 1, 0, 0, 1],
    [0, 1, 1, 0, 0, 1, 0, 1],
    [0, 0, 0, 1, 1, 0, 1, 1],
    [0, 1, 0, 0, 1, 0, 1, 1],
    [1, 0, 1, 0, 1, 0, 0, 1],
    [0, 1, 1, 0, 0, 1, 0, 1],
    [1, 1, 0, 0, 1, 0, 0, 1],
    [1, 0, 1, 1, 0, 0, 0, 1],
    [1, 0, 0, 0, 0, 1, 1, 1],
];

pub const N: usize = 10;

pub fn instance() -> AdfInstance {
    let subfunctions = CODOMAINS
        .iter()
        .enumerate()
        .map(|(i, cod)| {
            let scope = (0..3).map(|j| (i + j) % N).collect();
            Subfunction::new(scope, cod.iter().map(|&v| v as f64).collect()).expect("fixed fixture is valid")
        })
        .collect();
    AdfInstance::with_metadata(N, subfunctions, Wgb::default(), "cyclic-adjacent-n10-k3".into())
        .expect("fixed fixture is valid")
}

/// Contiguous cyclic windows of `order` variables in the reference table
/// layout: window `c` (zero-based) starts at variable `(c + n - 1) mod n`,
/// so the first window is `(x_{n-1}, x_0, …)`.
pub fn hyperplane_windows(n: usize, order: usize) -> Vec<Vec<usize>> {
    (0..n)
        .map(|c| (0..order).map(|t| (c + n - 1 + t) % n).collect())
        .collect()
}

/// Elimination order whose fill-in produces the reference chordal completion.
pub fn elimination_order() -> Vec<usize> {
    (0..N).collect()
}

/// Edges added to the interaction graph by [`elimination_order`].
pub const FILL_EDGES: [(usize, usize); 10] = [
    (1, 8),
    (2, 8),
    (3, 8),
    (4, 8),
    (5, 8),
    (2, 9),
    (3, 9),
    (4, 9),
    (5, 9),
    (6, 9),
];

/// Maximal cliques of the completed graph, in factorization order.
pub const CLIQUES: [[usize; 5]; 6] = [
    [0, 1, 2, 8, 9],
    [1, 2, 3, 8, 9],
    [2, 3, 4, 8, 9],
    [3, 4, 5, 8, 9],
    [4, 5, 6, 8, 9],
    [5, 6, 7, 8, 9],
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adf::Solution;

    #[test]
    fn known_evaluations() {
        let inst = instance();
        assert_eq!(inst.evaluate(&Solution::ones(N)).unwrap(), 10.0);
        assert_eq!(inst.evaluate(&Solution::zeros(N)).unwrap(), 5.0);
    }

    #[test]
    fn windows_layout() {
        let w = hyperplane_windows(10, 3);
        assert_eq!(w[0], vec![9, 0, 1]);
        assert_eq!(w[1], vec![0, 1, 2]);
        assert_eq!(w[9], vec![8, 9, 0]);
        assert_eq!(hyperplane_windows(10, 5)[8], vec![7, 8, 9, 0, 1]);
    }
}
