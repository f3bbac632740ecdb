//! Tensor-product Gauss–Legendre rules on `[-1,1]^n`.

use std::f64::consts::PI;

/// 1D Gauss–Legendre nodes and weights, computed by Newton iteration on `P_q`.
pub fn gauss_legendre_1d(q: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(q >= 1, "need at least one quadrature point");
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    for i in 0..q.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, _, d) = legendre(q, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, prev, _) = legendre(q, x);
        let w = 2.0 * (1.0 - x) * (1.0 + x) / (q as f64 * prev).powi(2);
        nodes[i] = -x;
        nodes[q - 1 - i] = x;
        weights[i] = w;
        weights[q - 1 - i] = w;
    }
    if q % 2 == 1 {
        nodes[q / 2] = 0.0;
    }
    (nodes, weights)
}

/// `(P_q(x), P_{q-1}(x), P_q'(x))`.
fn legendre(q: usize, x: f64) -> (f64, f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=q {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = q as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, p0, d)
}

#[derive(Clone, Debug)]
pub struct QuadratureRule {
    dim: usize,
    points_per_axis: usize,
    /// Flattened, `dim` coordinates per point; axis 0 varies fastest.
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// Tensor product of the `q`-point Gauss–Legendre rule in `n` dimensions.
    pub fn gauss(q: usize, n: usize) -> Self {
        assert!(n >= 1);
        let (x1, w1) = gauss_legendre_1d(q);
        let count = q.pow(n as u32);
        let mut points = Vec::with_capacity(count * n);
        let mut weights = Vec::with_capacity(count);
        for flat in 0..count {
            let mut rem = flat;
            let mut w = 1.0;
            for _ in 0..n {
                let i = rem % q;
                rem /= q;
                points.push(x1[i]);
                w *= w1[i];
            }
            weights.push(w);
        }
        QuadratureRule { dim: n, points_per_axis: q, points, weights }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    /// Highest per-variable polynomial degree integrated exactly.
    pub fn exactness_degree(&self) -> usize {
        2 * self.points_per_axis - 1
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.dim)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Σ w_p g(ξ_p)`.
    pub fn integrate(&self, mut g: impl FnMut(&[f64]) -> f64) -> f64 {
        self.points().zip(&self.weights).map(|(p, w)| w * g(p)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_rule() {
        let r = QuadratureRule::gauss(1, 2);
        assert_eq!(r.len(), 1);
        assert_eq!(r.point(0), &[0.0, 0.0]);
        assert!((r.weights()[0] - 4.0).abs() < 1e-15);
    }

    #[test]
    fn weights_sum_to_cube_measure() {
        let r = QuadratureRule::gauss(3, 3);
        assert_eq!(r.len(), 27);
        assert!((r.weights().iter().sum::<f64>() - 8.0).abs() < 1e-14);
    }

    #[test]
    fn six_points_integrate_degree_eleven() {
        let r = QuadratureRule::gauss(6, 1);
        assert!(r.integrate(|x| x[0].powi(11)).abs() < 1e-14);
        // ∫ ξ¹⁰ = 2/11
        assert!((r.integrate(|x| x[0].powi(10)) - 2.0 / 11.0).abs() < 1e-14);
    }

    #[test]
    fn nodes_are_symmetric_and_sorted() {
        for q in 1..=12 {
            let (x, w) = gauss_legendre_1d(q);
            for i in 0..q {
                assert!((x[i] + x[q - 1 - i]).abs() < 1e-15);
                assert!(w[i] > 0.0);
                if i > 0 {
                    assert!(x[i] > x[i - 1]);
                }
            }
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        }
    }
}
