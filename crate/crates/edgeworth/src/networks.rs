//! Probability-induced trade networks, simplex grids, and the barycentric
//! color map used to label grid points.
//!
//! A network here is nothing more than a probability vector `p` on the
//! `(n−1)`-simplex: at every instant agent `i` is picked with probability
//! `p_i` and matched uniformly with one of the other `n−1` agents, so the
//! pair `(i,j)` meets with probability `(p_i + p_j)/(n−1)`. Because the
//! randomness is confined to instants of continuous time, the matching
//! frequencies act as deterministic edge weights and the simulator never
//! draws a random match.
//!
//! The family interpolates between stars (a vertex of the simplex: the
//! picked-with-certainty agent is the hub, every edge weighing `1/(n−1)`)
//! and the uniformly weighted complete graph (the barycenter). Any `p` with
//! a positive entry yields a connected graph.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on probability sums.
pub const PROBABILITY_SUM_TOL: f64 = 1e-12;

/// A matching-probability vector together with its induced edge weights
/// `w_ij = (p_i + p_j)/(n−1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    probabilities: Vec<f64>,
    weights: DMatrix<f64>,
}

impl NetworkSpec {
    /// Validates `p` and derives the weight matrix.
    pub fn from_probabilities(p: &[f64]) -> Result<Self> {
        let n = p.len();
        if n < 2 {
            return Err(Error::Dimension {
                context: "network probabilities".into(),
                expected: 2,
                actual: n,
            });
        }
        let mut sum = 0.0;
        for (i, &q) in p.iter().enumerate() {
            if !q.is_finite() || q < 0.0 {
                return Err(Error::Probability(format!(
                    "probabilities[{i}] must be finite and nonnegative, got {q}"
                )));
            }
            sum += q;
        }
        if (sum - 1.0).abs() > PROBABILITY_SUM_TOL {
            return Err(Error::Probability(format!(
                "probabilities must sum to 1 within {PROBABILITY_SUM_TOL:e}, got {sum}"
            )));
        }
        let denom = (n - 1) as f64;
        let weights = DMatrix::from_fn(
            n,
            n,
            |i, j| {
                if i == j {
                    0.0
                } else {
                    (p[i] + p[j]) / denom
                }
            },
        );
        Ok(Self {
            probabilities: p.to_vec(),
            weights,
        })
    }

    pub fn agents(&self) -> usize {
        self.probabilities.len()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[(i, j)]
    }

    /// Sum of all edge weights; equals 1 for any valid `p` because each
    /// `p_i` appears in `n−1` edges divided by `n−1`.
    pub fn total_edge_weight(&self) -> f64 {
        let n = self.agents();
        let mut total = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                total += self.weights[(i, j)];
            }
        }
        total
    }
}

/// Builds the [`NetworkSpec`] induced by `p`.
pub fn weights_from_probabilities(p: &[f64]) -> Result<NetworkSpec> {
    NetworkSpec::from_probabilities(p)
}

/// Probability vector of the star centered at `center`: the unit vector.
/// The induced weights put `1/(n−1)` on every spoke and zero on every
/// peripheral pair.
pub fn star(center: usize, n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::Dimension {
            context: "star size".into(),
            expected: 2,
            actual: n,
        });
    }
    if center >= n {
        return Err(Error::Index(format!(
            "star center {center} out of range for {n} agents"
        )));
    }
    let mut p = vec![0.0; n];
    p[center] = 1.0;
    Ok(p)
}

/// All probability vectors `(k_1/r, …, k_n/r)` with nonnegative integers
/// `k` summing to `r`, in ascending lexicographic order of `(k_1,…,k_n)`.
///
/// The count is `C(r+n−1, n−1)`; the deterministic order makes sweep
/// outputs reproducible byte-for-byte across runs and worker counts.
pub fn simplex_grid(n: usize, resolution: u32) -> Result<Vec<Vec<f64>>> {
    if n < 2 {
        return Err(Error::Dimension {
            context: "simplex grid dimensions".into(),
            expected: 2,
            actual: n,
        });
    }
    if resolution < 1 {
        return Err(Error::Range(
            "simplex grid resolution must be at least 1".into(),
        ));
    }
    let r = resolution as f64;
    let mut out = Vec::new();
    let mut counts = vec![0u32; n];
    compositions(resolution, 0, &mut counts, &mut |k| {
        out.push(k.iter().map(|&c| c as f64 / r).collect());
    });
    Ok(out)
}

/// Integer compositions of `remaining` into slots `slot..n`, ascending in
/// the leading coordinate.
fn compositions(remaining: u32, slot: usize, counts: &mut Vec<u32>, emit: &mut impl FnMut(&[u32])) {
    let n = counts.len();
    if slot == n - 1 {
        counts[slot] = remaining;
        emit(counts);
        return;
    }
    for take in 0..=remaining {
        counts[slot] = take;
        compositions(remaining - take, slot + 1, counts, emit);
    }
}

/// Color label for a three-agent probability vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rgb {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

/// Maps a point of the 2-simplex to a color: pure red at `(1,0,0)`, pure
/// blue at `(0,1,0)`, pure green at `(0,0,1)`, each channel proportional to
/// the matching vertex coordinate. Note the channel assignment: the second
/// agent drives blue and the third drives green.
pub fn barycentric_color(p: &[f64]) -> Result<Rgb> {
    if p.len() != 3 {
        return Err(Error::Dimension {
            context: "barycentric color".into(),
            expected: 3,
            actual: p.len(),
        });
    }
    let sum: f64 = p.iter().sum();
    if p.iter().any(|&q| q < 0.0) || (sum - 1.0).abs() > PROBABILITY_SUM_TOL {
        return Err(Error::Probability(format!(
            "color map needs a valid probability vector, got {p:?}"
        )));
    }
    let channel = |q: f64| (255.0 * q).round() as u8;
    Ok(Rgb {
        r: channel(p[0]),
        g: channel(p[2]),
        b: channel(p[1]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn star_weights_for_three_agents() {
        let net = weights_from_probabilities(&[1.0, 0.0, 0.0]).unwrap();
        assert_relative_eq!(net.weight(0, 1), 0.5);
        assert_relative_eq!(net.weight(0, 2), 0.5);
        assert_eq!(net.weight(1, 2), 0.0);
        assert_eq!(net.weight(0, 0), 0.0);
    }

    #[test]
    fn uniform_probabilities_give_uniform_triangle() {
        let third = 1.0 / 3.0;
        let net = weights_from_probabilities(&[third, third, third]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_relative_eq!(net.weight(i, j), third, max_relative = 1e-14);
                }
            }
        }
    }

    #[test]
    fn two_hub_weights() {
        let net = weights_from_probabilities(&[0.5, 0.5, 0.0]).unwrap();
        assert_relative_eq!(net.weight(0, 1), 0.5);
        assert_relative_eq!(net.weight(0, 2), 0.25);
        assert_relative_eq!(net.weight(1, 2), 0.25);
    }

    #[test]
    fn total_edge_weight_is_one() {
        for p in [
            vec![1.0, 0.0, 0.0],
            vec![0.2, 0.3, 0.5],
            vec![0.25, 0.25, 0.25, 0.25],
            vec![0.9, 0.1],
        ] {
            let net = weights_from_probabilities(&p).unwrap();
            assert_relative_eq!(net.total_edge_weight(), 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn invalid_probabilities_rejected() {
        assert!(matches!(
            weights_from_probabilities(&[0.5, 0.4]),
            Err(Error::Probability(_))
        ));
        assert!(matches!(
            weights_from_probabilities(&[-0.1, 1.1]),
            Err(Error::Probability(_))
        ));
    }

    #[test]
    fn star_vectors() {
        assert_eq!(star(0, 3).unwrap(), vec![1.0, 0.0, 0.0]);
        assert_eq!(star(2, 3).unwrap(), vec![0.0, 0.0, 1.0]);
        assert!(matches!(star(3, 3), Err(Error::Index(_))));
    }

    #[test]
    fn star_has_no_peripheral_edges() {
        let net = weights_from_probabilities(&star(1, 4).unwrap()).unwrap();
        assert_eq!(net.weight(0, 2), 0.0);
        assert_eq!(net.weight(0, 3), 0.0);
        assert_eq!(net.weight(2, 3), 0.0);
        let third = 1.0 / 3.0;
        assert_relative_eq!(net.weight(1, 0), third);
        assert_relative_eq!(net.weight(1, 2), third);
        assert_relative_eq!(net.weight(1, 3), third);
    }

    #[test]
    fn every_agent_keeps_a_positive_edge() {
        for p in [
            vec![1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.6, 0.4],
        ] {
            let net = weights_from_probabilities(&p).unwrap();
            let n = net.agents();
            for i in 0..n {
                assert!((0..n).any(|j| j != i && net.weight(i, j) > 0.0));
            }
        }
    }

    #[test]
    fn grid_counts() {
        // C(r+n−1, n−1) points.
        assert_eq!(simplex_grid(3, 1).unwrap().len(), 3);
        assert_eq!(simplex_grid(3, 2).unwrap().len(), 6);
        assert_eq!(simplex_grid(2, 4).unwrap().len(), 5);
        assert_eq!(simplex_grid(3, 12).unwrap().len(), 91);
        assert_eq!(simplex_grid(4, 3).unwrap().len(), 20);
    }

    #[test]
    fn grid_points_are_valid_and_distinct() {
        let grid = simplex_grid(3, 7).unwrap();
        for p in &grid {
            assert!(NetworkSpec::from_probabilities(p).is_ok());
        }
        for (a, pa) in grid.iter().enumerate() {
            for pb in grid.iter().skip(a + 1) {
                assert_ne!(pa, pb);
            }
        }
    }

    #[test]
    fn grid_is_lexicographic() {
        let grid = simplex_grid(3, 2).unwrap();
        let expected: Vec<Vec<f64>> = vec![
            vec![0.0, 0.0, 1.0],
            vec![0.0, 0.5, 0.5],
            vec![0.0, 1.0, 0.0],
            vec![0.5, 0.0, 0.5],
            vec![0.5, 0.5, 0.0],
            vec![1.0, 0.0, 0.0],
        ];
        assert_eq!(grid, expected);
    }

    #[test]
    fn zero_resolution_rejected() {
        assert!(matches!(simplex_grid(3, 0), Err(Error::Range(_))));
    }

    #[test]
    fn vertex_colors() {
        assert_eq!(
            barycentric_color(&[1.0, 0.0, 0.0]).unwrap(),
            Rgb { r: 255, g: 0, b: 0 }
        );
        assert_eq!(
            barycentric_color(&[0.0, 1.0, 0.0]).unwrap(),
            Rgb { r: 0, g: 0, b: 255 }
        );
        assert_eq!(
            barycentric_color(&[0.0, 0.0, 1.0]).unwrap(),
            Rgb { r: 0, g: 255, b: 0 }
        );
    }

    #[test]
    fn barycenter_color_rounds() {
        let third = 1.0 / 3.0;
        assert_eq!(
            barycentric_color(&[third, third, third]).unwrap(),
            Rgb {
                r: 85,
                g: 85,
                b: 85
            }
        );
    }

    #[test]
    fn color_needs_three_coordinates() {
        assert!(matches!(
            barycentric_color(&[0.5, 0.5]),
            Err(Error::Dimension { .. })
        ));
    }
}
