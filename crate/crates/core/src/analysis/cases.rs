//! Manufactured solutions with closed-form partial derivatives up to order 3.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::{lshape_mesh, uniform_mesh, BoxDomain, StructuredMesh};
use crate::polynomial::{MultiIndex, Polynomial, PolynomialF64};

/// A function with every partial derivative of order `<= 3` available.
pub trait ExactSolution: Send + Sync {
    fn dim(&self) -> usize;

    /// `∂^α u(x)` for `|α| <= 3`.
    fn derivative(&self, alpha: &MultiIndex, x: &[f64]) -> f64;

    /// `(−Δ)³ u`.
    fn source(&self, x: &[f64]) -> f64;

    fn value(&self, x: &[f64]) -> f64 {
        self.derivative(&MultiIndex::zero(self.dim()), x)
    }
}

/// `Π_i cos(k_i x_i + φ_i)`.
#[derive(Clone, Debug)]
pub struct SeparableTrig {
    pub wavenumbers: Vec<f64>,
    pub phases: Vec<f64>,
}

impl ExactSolution for SeparableTrig {
    fn dim(&self) -> usize {
        self.wavenumbers.len()
    }

    fn derivative(&self, alpha: &MultiIndex, x: &[f64]) -> f64 {
        self.wavenumbers
            .iter()
            .zip(&self.phases)
            .enumerate()
            .map(|(i, (&k, &phi))| {
                let a = alpha.get(i);
                let arg = k * x[i] + phi;
                // ∂^a cos(kx+φ) = k^a cos(kx + φ + aπ/2)
                let trig = match a % 4 {
                    0 => arg.cos(),
                    1 => -arg.sin(),
                    2 => -arg.cos(),
                    _ => arg.sin(),
                };
                k.powi(a as i32) * trig
            })
            .product()
    }

    fn source(&self, x: &[f64]) -> f64 {
        let lambda: f64 = self.wavenumbers.iter().map(|k| k * k).sum();
        lambda.powi(3) * self.value(x)
    }
}

/// `Im z^{5/2} = r^{5/2} sin(5θ/2)` with `θ ∈ [0, 2π)` measured from the positive x-axis.
#[derive(Clone, Copy, Debug, Default)]
pub struct CornerSingularity;

impl CornerSingularity {
    pub const EXPONENT: f64 = 2.5;

    pub fn angle(x: f64, y: f64) -> f64 {
        let t = y.atan2(x);
        if t < 0.0 {
            t + 2.0 * PI
        } else {
            t
        }
    }
}

impl ExactSolution for CornerSingularity {
    fn dim(&self) -> usize {
        2
    }

    fn derivative(&self, alpha: &MultiIndex, x: &[f64]) -> f64 {
        let (a, b) = (alpha.get(0), alpha.get(1));
        let m = a + b;
        let r = x[0].hypot(x[1]);
        if r == 0.0 {
            // Finite for m <= 2; third derivatives blow up like r^{-1/2}.
            return if m <= 2 { 0.0 } else { f64::INFINITY };
        }
        let theta = Self::angle(x[0], x[1]);
        // ∂x^a ∂y^b z^c = c(c−1)···(c−m+1) i^b z^{c−m}
        let c = Self::EXPONENT;
        let falling: f64 = (0..m).map(|k| c - k as f64).product();
        let p = c - m as f64;
        let phase = p * theta + b as f64 * FRAC_PI_2;
        falling * r.powf(p) * phase.sin()
    }

    fn source(&self, _x: &[f64]) -> f64 {
        0.0
    }
}

/// Exact polynomial solution; derivatives are differentiated symbolically.
#[derive(Clone, Debug)]
pub struct PolynomialSolution {
    dim: usize,
    derivatives: Vec<(MultiIndex, PolynomialF64)>,
    source: PolynomialF64,
}

impl PolynomialSolution {
    pub fn new(p: &Polynomial) -> Self {
        let dim = p.dim();
        let derivatives =
            MultiIndex::all_up_to_order(dim as usize, 3).into_iter().map(|a| (a.clone(), p.derivative(&a).to_f64())).collect();
        let lap = |q: &Polynomial| (0..dim).fold(Polynomial::zero(dim), |acc, i| &acc + &q.differentiate(i, 2));
        let tri = lap(&lap(&lap(p)));
        PolynomialSolution { dim, derivatives, source: (-tri).to_f64() }
    }
}

impl ExactSolution for PolynomialSolution {
    fn dim(&self) -> usize {
        self.dim
    }

    fn derivative(&self, alpha: &MultiIndex, x: &[f64]) -> f64 {
        self.derivatives
            .iter()
            .find(|(a, _)| a == alpha)
            .map(|(_, p)| p.eval(x))
            .expect("derivative order <= 3")
    }

    fn source(&self, x: &[f64]) -> f64 {
        self.source.eval(x)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CaseDomain {
    Box(BoxDomain),
    /// `(−1,1)² \ [0,1)×(−1,0]`.
    LShape,
}

/// Exact solution together with the domain it is posed on.
#[derive(Clone)]
pub struct ManufacturedCase {
    pub name: String,
    pub domain: CaseDomain,
    /// Expected regularity `H^{3+s}`.
    pub regularity: f64,
    pub solution: Arc<dyn ExactSolution>,
}

impl fmt::Debug for ManufacturedCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ManufacturedCase")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("regularity", &self.regularity)
            .finish()
    }
}

impl ManufacturedCase {
    pub fn dim(&self) -> usize {
        self.solution.dim()
    }

    /// Uniform mesh with `N` cells per unit length.
    pub fn mesh(&self, n: usize) -> Result<StructuredMesh> {
        if n == 0 {
            return Err(Error::Config("N must be positive".into()));
        }
        match &self.domain {
            CaseDomain::Box(b) => {
                let div: Vec<usize> =
                    b.lo.iter().zip(&b.hi).map(|(l, h)| ((h - l) * n as f64).round().max(1.0) as usize).collect();
                uniform_mesh(b, &div)
            }
            CaseDomain::LShape => lshape_mesh(n),
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "smooth2d" => Ok(case_smooth2d()),
            "smooth3d" => Ok(case_smooth3d()),
            "lshape2d" | "lshape" => Ok(case_lshape2d()),
            _ => Err(Error::Config(format!("unknown case '{name}' (expected smooth2d, lshape2d or smooth3d)"))),
        }
    }

    pub fn polynomial(name: &str, p: &Polynomial, domain: BoxDomain) -> Self {
        ManufacturedCase {
            name: name.to_string(),
            domain: CaseDomain::Box(domain),
            regularity: 1.0,
            solution: Arc::new(PolynomialSolution::new(p)),
        }
    }
}

/// `u = cos(2πx) cos(2πy)` on the unit square.
pub fn case_smooth2d() -> ManufacturedCase {
    ManufacturedCase {
        name: "smooth2d".into(),
        domain: CaseDomain::Box(BoxDomain::unit(2)),
        regularity: 1.0,
        solution: Arc::new(SeparableTrig { wavenumbers: vec![2.0 * PI; 2], phases: vec![0.0; 2] }),
    }
}

/// `u = r^{5/2} sin(5θ/2)` on the L-shaped domain, `f = 0`.
pub fn case_lshape2d() -> ManufacturedCase {
    ManufacturedCase {
        name: "lshape2d".into(),
        domain: CaseDomain::LShape,
        regularity: 0.5,
        solution: Arc::new(CornerSingularity),
    }
}

/// `u = sin(2πx) cos(πy) cos(πz)` on the unit cube.
pub fn case_smooth3d() -> ManufacturedCase {
    ManufacturedCase {
        name: "smooth3d".into(),
        domain: CaseDomain::Box(BoxDomain::unit(3)),
        regularity: 1.0,
        solution: Arc::new(SeparableTrig { wavenumbers: vec![2.0 * PI, PI, PI], phases: vec![-FRAC_PI_2, 0.0, 0.0] }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polynomial::int;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mi(e: &[u32]) -> MultiIndex {
        MultiIndex::new(e.to_vec())
    }

    /// Central difference of `∂^β u` along `axis`, compared with `∂^{β+e_axis} u`.
    fn check_derivatives(u: &dyn ExactSolution, points: &[Vec<f64>], step: f64, tol: f64) {
        let n = u.dim();
        for x in points {
            for beta in MultiIndex::all_up_to_order(n, 2) {
                for axis in 0..n {
                    let mut e = beta.exponents().to_vec();
                    e[axis] += 1;
                    let alpha = MultiIndex::new(e);
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[axis] += step;
                    xm[axis] -= step;
                    let fd = (u.derivative(&beta, &xp) - u.derivative(&beta, &xm)) / (2.0 * step);
                    let exact = u.derivative(&alpha, x);
                    let scale = exact.abs().max(1.0);
                    assert!((fd - exact).abs() <= tol * scale, "{alpha} at {x:?}: fd {fd} vs {exact}");
                }
            }
        }
    }

    fn random_points(rng: &mut ChaCha8Rng, count: usize, sample: impl Fn(&mut ChaCha8Rng) -> Vec<f64>) -> Vec<Vec<f64>> {
        (0..count).map(|_| sample(rng)).collect()
    }

    #[test]
    fn smooth2d_values() {
        let c = case_smooth2d();
        let u = &c.solution;
        assert_eq!(u.value(&[0.0, 0.0]), 1.0);
        let x = [0.13, 0.71];
        let k = 2.0 * PI;
        let d3 = k.powi(3) * (k * x[0]).sin() * (k * x[1]).cos();
        assert!((u.derivative(&mi(&[3, 0]), &x) - d3).abs() < 1e-10);
        let f = (8.0 * PI * PI).powi(3) * u.value(&x);
        assert!((u.source(&x) - f).abs() < 1e-9 * f.abs());
    }

    #[test]
    fn smooth3d_values() {
        let c = case_smooth3d();
        let u = &c.solution;
        assert!((u.value(&[0.25, 0.0, 0.0]) - 1.0).abs() < 1e-15);
        let x = [0.3, 0.4, 0.9];
        let want = 2.0 * PI.powi(3) * (2.0 * PI * x[0]).cos() * (PI * x[1]).sin() * (PI * x[2]).sin();
        assert!((u.derivative(&mi(&[1, 1, 1]), &x) - want).abs() < 1e-12);
        assert!((u.source(&x) - 216.0 * PI.powi(6) * u.value(&x)).abs() < 1e-8);
    }

    #[test]
    fn trig_partials_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for c in [case_smooth2d(), case_smooth3d()] {
            let n = c.dim();
            let pts = random_points(&mut rng, 20, |r| (0..n).map(|_| r.gen_range(0.05..0.95)).collect());
            check_derivatives(c.solution.as_ref(), &pts, 1e-5, 1e-6);
        }
    }

    #[test]
    fn lshape_partials_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pts = random_points(&mut rng, 100, |r| loop {
            let p: Vec<f64> = vec![r.gen_range(-0.95..0.95), r.gen_range(-0.95..0.95)];
            let inside = !(p[0] >= 0.0 && p[1] <= 0.0);
            if inside && p[0].hypot(p[1]) > 0.1 && p[1].abs() > 0.01 {
                break p;
            }
        });
        check_derivatives(&CornerSingularity, &pts, 1e-5, 1e-6);
    }

    #[test]
    fn lshape_boundary_and_harmonicity() {
        let u = CornerSingularity;
        assert_eq!(u.value(&[0.5, 0.0]), 0.0);
        // θ = 3π/2 on the negative y-axis: sin(15π/4) ≠ 0, so only θ = 0 is a zero line.
        assert!((u.value(&[0.0, -0.5]) - 0.5f64.powf(2.5) * (3.75 * PI).sin()).abs() < 1e-14);
        let x = [-0.3, 0.4];
        let lap = u.derivative(&mi(&[2, 0]), &x) + u.derivative(&mi(&[0, 2]), &x);
        assert!(lap.abs() < 1e-12);
        assert_eq!(u.source(&x), 0.0);
        assert_eq!(u.derivative(&mi(&[1, 1]), &[0.0, 0.0]), 0.0);
    }

    #[test]
    fn source_matches_finite_difference_tri_laplacian() {
        // Apply the 5-point Laplacian three times on a stencil of radius 3.
        let c = case_smooth2d();
        let u = &c.solution;
        let h = 1e-2;
        let x = [0.37, 0.61];
        let lap = |g: &dyn Fn(f64, f64) -> f64, a: f64, b: f64| {
            (g(a + h, b) + g(a - h, b) + g(a, b + h) + g(a, b - h) - 4.0 * g(a, b)) / (h * h)
        };
        let g0 = |a: f64, b: f64| u.value(&[a, b]);
        let g1 = |a: f64, b: f64| lap(&g0, a, b);
        let g2 = |a: f64, b: f64| lap(&g1, a, b);
        let tri = -lap(&g2, x[0], x[1]);
        let f = u.source(&x);
        assert!((tri - f).abs() < 1e-2 * f.abs().max(1.0), "{tri} vs {f}");
    }

    #[test]
    fn polynomial_case() {
        // u = x³ y² → (−Δ)³u = 0 but ∂³ₓ u = 6y².
        let p = Polynomial::monomial(mi(&[3, 2]), int(1));
        let s = PolynomialSolution::new(&p);
        assert_eq!(s.derivative(&mi(&[3, 0]), &[0.4, 0.5]), 6.0 * 0.25);
        assert_eq!(s.source(&[0.1, 0.1]), 0.0);
        // u = x⁶ → −720
        let s = PolynomialSolution::new(&Polynomial::monomial(mi(&[6, 0]), int(1)));
        assert_eq!(s.source(&[0.2, 0.3]), -720.0);
    }

    #[test]
    fn case_meshes() {
        assert_eq!(case_smooth2d().mesh(4).unwrap().num_cells(), 16);
        assert_eq!(case_smooth3d().mesh(2).unwrap().num_cells(), 8);
        assert_eq!(case_lshape2d().mesh(2).unwrap().num_cells(), 12);
        assert!(case_smooth2d().mesh(0).is_err());
        assert!(ManufacturedCase::by_name("nope").is_err());
    }
}
