use nalgebra::{DMatrix, SymmetricEigen};

/// Gauss–Hermite rule for expectations under a standard normal:
/// `E[f(Z)] ≈ Σ wᵢ f(xᵢ)`, exact for polynomials of degree `< 2n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    /// Golub–Welsch: nodes are the eigenvalues of the Jacobi matrix of the
    /// probabilists' Hermite polynomials, weights the squared first
    /// components of the normalised eigenvectors.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "at least one quadrature node");
        let mut jacobi = DMatrix::<f64>::zeros(n, n);
        for k in 1..n {
            let b = (k as f64).sqrt();
            jacobi[(k - 1, k)] = b;
            jacobi[(k, k - 1)] = b;
        }
        let eig = SymmetricEigen::new(jacobi);
        let mut pairs: Vec<(f64, f64)> = (0..n)
            .map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2)))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        // symmetric rule: pin the pairing exactly
        for i in 0..n / 2 {
            let j = n - 1 - i;
            let x = 0.5 * (pairs[j].0 - pairs[i].0);
            let w = 0.5 * (pairs[i].1 + pairs[j].1);
            pairs[i] = (-x, w);
            pairs[j] = (x, w);
        }
        if n % 2 == 1 {
            pairs[n / 2].0 = 0.0;
        }
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        Self {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1 / total).collect(),
        }
    }

    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(*x))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn normal_moments() {
        let q = GaussHermite::new(7);
        assert_relative_eq!(q.expect(|_| 1.0), 1.0, epsilon = 1e-14);
        assert!(q.expect(|x| x).abs() < 1e-14);
        assert_relative_eq!(q.expect(|x| x * x), 1.0, epsilon = 1e-12);
        assert_relative_eq!(q.expect(|x| x.powi(4)), 3.0, epsilon = 1e-11);
        assert_relative_eq!(q.expect(|x| x.powi(12)), 10395.0, max_relative = 1e-10);
    }

    #[test]
    fn single_node_is_the_mean() {
        let q = GaussHermite::new(1);
        assert_eq!(q.nodes, [0.0]);
        assert_eq!(q.weights, [1.0]);
    }

    #[test]
    fn two_nodes_are_plus_minus_one() {
        let q = GaussHermite::new(2);
        assert_relative_eq!(q.nodes[1], 1.0, epsilon = 1e-14);
        assert_relative_eq!(q.weights[0], 0.5, epsilon = 1e-14);
    }
}
