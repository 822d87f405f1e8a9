//! Small reference DAGs with known closures, transforms and filters.

use crate::dag::WeightedDag;

fn labeled(edges: &[(&str, &str, f64)]) -> WeightedDag {
    let nodes = ["a", "b", "c", "d", "e", "f"].map(String::from);
    let edges: Vec<_> = edges
        .iter()
        .map(|&(s, d, w)| (s.to_string(), d.to_string(), w))
        .collect();
    WeightedDag::from_labeled_edges(&nodes, &edges).expect("fixture is a DAG")
}

/// Six-node DAG `a..f` with pollution fractions as weights.
///
/// Its `(+, *)` closure is
/// ```text
/// 1    0    0 0   0 0
/// 0    1    0 0   0 0
/// 0.3  0.2  1 0   0 0
/// 0.7  0.7  0 1   0 0
/// 0.65 0.55 1 0.5 1 0
/// 0.35 0.45 0 0.5 0 1
/// ```
pub fn example_dag() -> WeightedDag {
    labeled(&[
        ("a", "c", 0.3),
        ("b", "c", 0.2),
        ("a", "d", 0.7),
        ("b", "d", 0.7),
        ("c", "e", 1.0),
        ("d", "e", 0.5),
        ("b", "f", 0.1),
        ("d", "f", 0.5),
    ])
}

/// The same DAG with distances as weights. The direct edge `b -> f` (4.5)
/// is longer than the path `b -> d -> f` (1.5 + 1.7).
pub fn distance_example_dag() -> WeightedDag {
    labeled(&[
        ("a", "c", 1.0),
        ("b", "c", 2.0),
        ("a", "d", 0.8),
        ("b", "d", 1.5),
        ("c", "e", 0.6),
        ("d", "e", 1.2),
        ("b", "f", 4.5),
        ("d", "f", 1.7),
    ])
}

/// Exact closure matrix `W` of [`example_dag`], row-major in `a..f` order.
pub const EXAMPLE_W: [[f64; 6]; 6] = [
    [1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
    [0.3, 0.2, 1.0, 0.0, 0.0, 0.0],
    [0.7, 0.7, 0.0, 1.0, 0.0, 0.0],
    [0.65, 0.55, 1.0, 0.5, 1.0, 0.0],
    [0.35, 0.45, 0.0, 0.5, 0.0, 1.0],
];

/// Fourier transform matrix `F = W^-1` of [`example_dag`].
pub const EXAMPLE_F: [[f64; 6]; 6] = [
    [1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
    [-0.3, -0.2, 1.0, 0.0, 0.0, 0.0],
    [-0.7, -0.7, 0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, -1.0, -0.5, 1.0, 0.0],
    [0.0, -0.1, 0.0, -0.5, 0.0, 1.0],
];

/// Shift matrix `T_e` of [`example_dag`].
pub const EXAMPLE_SHIFT_E: [[f64; 6]; 6] = [
    [1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
    [0.0, 0.1, 0.0, 0.5, 0.0, 0.0],
];

/// Low-pass filter `h = (1, 1, 1, 0, 2, 2) / 6` on [`example_dag`].
pub const EXAMPLE_LOWPASS: [f64; 6] = [1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0, 0.0, 2.0 / 6.0, 2.0 / 6.0];

/// Matrix of [`EXAMPLE_LOWPASS`], times 6.
pub const EXAMPLE_LOWPASS_MATRIX_X6: [[f64; 6]; 6] = [
    [6.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 6.0, 0.0, 0.0, 0.0, 0.0],
    [0.9, 0.6, 3.0, 0.0, 0.0, 0.0],
    [1.4, 1.4, 0.0, 4.0, 0.0, 0.0],
    [1.6, 1.3, 1.0, 1.0, 2.0, 0.0],
    [0.7, 1.1, 0.0, 1.0, 0.0, 2.0],
];

/// Frequency response of [`EXAMPLE_LOWPASS`].
pub const EXAMPLE_LOWPASS_RESPONSE: [f64; 6] = [1.0, 1.0, 0.5, 2.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0];
