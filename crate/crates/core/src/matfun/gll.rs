use crate::error::{Error, Result};

/// Gauss–Legendre–Lobatto nodes and weights on `[0, 1]`.
///
/// Nodes are ascending with `nodes[0] == 0` and `nodes[q-1] == 1`; the rule is
/// exact for polynomials of degree up to `2q - 3`.
#[derive(Clone, Debug, PartialEq)]
pub struct GllRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Node count used when none is requested.
pub const DEFAULT_GLL_NODES: usize = 12;

impl GllRule {
    pub fn new(q: usize) -> Result<Self> {
        if q < 2 {
            return Err(Error::Validation(format!(
                "a Lobatto rule needs at least 2 nodes, got {q}"
            )));
        }
        let n = q - 1;
        // Newton iteration on (1 - x²) P'_n(x) = 0 from Chebyshev–Lobatto guesses.
        let mut x: Vec<f64> = (0..q)
            .map(|i| (std::f64::consts::PI * i as f64 / n as f64).cos())
            .collect();
        let mut p_n = vec![0.0; q];
        for _ in 0..100 {
            let mut delta: f64 = 0.0;
            for (xi, pn) in x.iter_mut().zip(p_n.iter_mut()) {
                let (pm1, p) = legendre_pair(n, *xi);
                *pn = p;
                let step = (*xi * p - pm1) / (q as f64 * p);
                *xi -= step;
                delta = delta.max(step.abs());
            }
            if delta < 1e-16 {
                break;
            }
        }
        for (xi, pn) in x.iter().zip(p_n.iter_mut()) {
            *pn = legendre_pair(n, *xi).1;
        }
        // x runs from +1 down to -1; θ = (1 - x) / 2 is ascending.
        let mut nodes: Vec<f64> = x.iter().map(|&xi| 0.5 * (1.0 - xi)).collect();
        let mut weights: Vec<f64> = p_n
            .iter()
            .map(|&p| 1.0 / ((n * q) as f64 * p * p))
            .collect();
        nodes[0] = 0.0;
        nodes[n] = 1.0;
        // Symmetrize against roundoff.
        for i in 0..q / 2 {
            let j = n - i;
            let t = 0.5 * (nodes[i] + (1.0 - nodes[j]));
            nodes[i] = t;
            nodes[j] = 1.0 - t;
            let w = 0.5 * (weights[i] + weights[j]);
            weights[i] = w;
            weights[j] = w;
        }
        if q % 2 == 1 {
            nodes[q / 2] = 0.5;
        }
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Σ w_i f(θ_i)`.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(t))
            .sum()
    }
}

impl Default for GllRule {
    fn default() -> Self {
        Self::new(DEFAULT_GLL_NODES).expect("default node count is valid")
    }
}

/// `(P_{n-1}(x), P_n(x))` by the three-term recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let (mut prev, mut cur) = (1.0, x);
    if n == 0 {
        return (0.0, 1.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let next = ((2.0 * k - 1.0) * x * cur - (k - 1.0) * prev) / k;
        prev = cur;
        cur = next;
    }
    (prev, cur)
}
