//! Canonical and projection-averaging interpolation into a finite element space.

use faer::prelude::*;
use faer::{Mat, Side};
use rayon::prelude::*;

use super::cases::ExactSolution;
use crate::error::{Error, Result};
use crate::fespace::FeSpace;
use crate::polynomial::MultiIndex;
use crate::quadrature::QuadratureRule;

/// Sets every global DoF to its functional applied to `u`.
pub fn canonical_interpolate(space: &FeSpace, u: &dyn ExactSolution) -> Result<Vec<f64>> {
    if u.dim() != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), found: u.dim() });
    }
    Ok(space.interpolate_with(|alpha, x| u.derivative(alpha, x)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum BoundaryTreatment {
    /// Boundary DoFs are averaged like interior ones (`V_h`).
    #[default]
    Keep,
    /// Boundary DoFs are set to zero (`V_h0`).
    Zero,
}

/// Local `L²` projection onto the shape space of each cell, followed by
/// averaging each global DoF uniformly over the cells that carry it.
pub fn quasi_interpolate(
    space: &FeSpace,
    u: &(dyn Fn(&[f64]) -> f64 + Sync),
    quadrature: usize,
    boundary: BoundaryTreatment,
) -> Result<Vec<f64>> {
    let element = space.element();
    let n = space.dim();
    let nd = element.num_dofs();
    let rule = QuadratureRule::gauss(quadrature, n);
    let tab = element.tabulate(&rule);
    let phi = tab.matrix(&MultiIndex::zero(n));
    let w = rule.weights();

    // Reference mass matrix; the Jacobian cancels in the projection.
    let mass = Mat::<f64>::from_fn(nd, nd, |a, b| (0..w.len()).map(|p| w[p] * phi[p * nd + a] * phi[p * nd + b]).sum());
    let llt = mass.llt(Side::Lower).map_err(|_| Error::SingularMassMatrix(0))?;

    let mesh = space.mesh();
    let local: Vec<Vec<f64>> = (0..mesh.num_cells())
        .into_par_iter()
        .map(|c| {
            let cell = &mesh.cells()[c];
            let mut x = vec![0.0; n];
            let mut rhs = Mat::<f64>::zeros(nd, 1);
            for (p, xi) in rule.points().enumerate() {
                cell.map_point(xi, &mut x);
                let fw = w[p] * u(&x);
                for a in 0..nd {
                    rhs[(a, 0)] += fw * phi[p * nd + a];
                }
            }
            llt.solve_in_place(rhs.as_mut());
            (0..nd).map(|a| rhs[(a, 0)]).collect()
        })
        .collect();

    let mut sum = vec![0.0; space.num_dofs()];
    let mut count = vec![0usize; space.num_dofs()];
    for (c, coeffs) in local.iter().enumerate() {
        if coeffs.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularMassMatrix(c));
        }
        for (d, &v) in space.cell_dofs(c).iter().zip(coeffs) {
            sum[d.index] += v / d.scaling;
            count[d.index] += 1;
        }
    }
    Ok(sum
        .iter()
        .zip(&count)
        .enumerate()
        .map(|(i, (&s, &k))| {
            if boundary == BoundaryTreatment::Zero && space.is_boundary_dof(i) {
                0.0
            } else {
                s / k as f64
            }
        })
        .collect())
}
