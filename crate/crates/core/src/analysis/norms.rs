//! Broken Sobolev norms of the error `u − u_h`.

use rayon::prelude::*;

use super::cases::ExactSolution;
use crate::fespace::FeSpace;
use crate::mesh::Cell;
use crate::polynomial::MultiIndex;
use crate::quadrature::QuadratureRule;

/// `(‖e‖₀, |e|_{1,h}, |e|_{2,h}, |e|_{3,h})` for `e = u − u_h`, with mixed
/// partials weighted by `m!/α!`.
pub fn broken_norms(space: &FeSpace, coeffs: &[f64], u: &dyn ExactSolution, quadrature: usize) -> [f64; 4] {
    let sq = broken_squares(space, coeffs, &|a, x| u.derivative(a, x), quadrature, None);
    sq.map(f64::sqrt)
}

/// Geometric refinement of the error quadrature towards a point singularity.
#[derive(Clone, Debug, PartialEq)]
pub struct CornerRefinement {
    pub point: Vec<f64>,
    /// Number of times the sub-box touching `point` is halved.
    pub levels: usize,
}

/// [`broken_norms`] with cells that have `refine.point` as a vertex
/// integrated on a geometrically graded set of sub-boxes.
pub fn broken_norms_refined(
    space: &FeSpace,
    coeffs: &[f64],
    u: &dyn ExactSolution,
    quadrature: usize,
    refine: &CornerRefinement,
) -> [f64; 4] {
    broken_squares(space, coeffs, &|a, x| u.derivative(a, x), quadrature, Some(refine)).map(f64::sqrt)
}

/// Same as [`broken_norms`] for a discrete function alone (`u = 0`).
pub fn discrete_norms(space: &FeSpace, coeffs: &[f64], quadrature: usize) -> [f64; 4] {
    broken_squares(space, coeffs, &|_, _| 0.0, quadrature, None).map(f64::sqrt)
}

fn broken_squares(
    space: &FeSpace,
    coeffs: &[f64],
    u: &(dyn Fn(&MultiIndex, &[f64]) -> f64 + Sync),
    quadrature: usize,
    refine: Option<&CornerRefinement>,
) -> [f64; 4] {
    let n = space.dim();
    let element = space.element();
    let nd = element.num_dofs();
    let rule = QuadratureRule::gauss(quadrature, n);
    let tab = element.tabulate(&rule);
    let alphas: Vec<(MultiIndex, usize, f64)> = MultiIndex::all_up_to_order(n, 3)
        .into_iter()
        .map(|a| {
            let m = a.order() as usize;
            let w = a.multinomial() as f64;
            (a, m, w)
        })
        .collect();
    let mesh = space.mesh();
    let per_cell: Vec<[f64; 4]> = (0..mesh.num_cells())
        .into_par_iter()
        .map(|c| {
            let cell = &mesh.cells()[c];
            let local = space.local_coefficients(c, coeffs);
            let jac = cell.jacobian();
            let mut x = vec![0.0; n];
            let mut acc = [0.0; 4];
            if let Some(corner) = refine.and_then(|r| corner_of(cell, r).map(|k| (r.levels, k))) {
                refined_cell(space, c, &local, u, &rule, &alphas, corner, &mut acc);
                return acc;
            }
            for (p, (xi, &wp)) in rule.points().zip(rule.weights()).enumerate() {
                cell.map_point(xi, &mut x);
                for (alpha, m, mult) in &alphas {
                    let scale: f64 = (0..n).map(|i| cell.half_lengths[i].powi(-(alpha.get(i) as i32))).product();
                    let row = &tab.matrix(alpha)[p * nd..(p + 1) * nd];
                    let uh: f64 = scale * row.iter().zip(&local).map(|(r, c)| r * c).sum::<f64>();
                    let e = u(alpha, &x) - uh;
                    acc[*m] += mult * wp * jac * e * e;
                }
            }
            acc
        })
        .collect();
    per_cell.iter().fold([0.0; 4], |mut s, c| {
        for k in 0..4 {
            s[k] += c[k];
        }
        s
    })
}

/// Reference vertex of `cell` that coincides with the refinement point.
fn corner_of(cell: &Cell, r: &CornerRefinement) -> Option<Vec<f64>> {
    let n = cell.center.len();
    let mut xi = vec![0.0; n];
    for i in 0..n {
        let t = (r.point[i] - cell.center[i]) / cell.half_lengths[i];
        if (t.abs() - 1.0).abs() > 1e-12 {
            return None;
        }
        xi[i] = t.signum();
    }
    Some(xi)
}

/// Integrates over `[−1,1]ⁿ` split into sub-boxes graded towards `corner`:
/// at each level the box is halved along every axis and only the half
/// touching the corner is split again.
#[allow(clippy::too_many_arguments)]
fn refined_cell(
    space: &FeSpace,
    c: usize,
    local: &[f64],
    u: &(dyn Fn(&MultiIndex, &[f64]) -> f64 + Sync),
    rule: &QuadratureRule,
    alphas: &[(MultiIndex, usize, f64)],
    (levels, corner): (usize, Vec<f64>),
    acc: &mut [f64; 4],
) {
    let n = corner.len();
    let cell = &space.mesh().cells()[c];
    let jac = cell.jacobian();
    let bases: Vec<_> = alphas
        .iter()
        .map(|(a, _, _)| space.element().derivative_basis(a).expect("order <= 3"))
        .collect();
    let scales: Vec<f64> = alphas
        .iter()
        .map(|(a, _, _)| (0..n).map(|i| cell.half_lengths[i].powi(-(a.get(i) as i32))).product())
        .collect();
    let mut boxes = Vec::new();
    let (mut lo, mut hi) = (vec![-1.0; n], vec![1.0; n]);
    for _ in 0..levels {
        let mut next = (lo.clone(), hi.clone());
        for sub in 0..1usize << n {
            let mut slo = vec![0.0; n];
            let mut shi = vec![0.0; n];
            let mut at_corner = true;
            for i in 0..n {
                let mid = 0.5 * (lo[i] + hi[i]);
                let upper = sub >> i & 1 == 1;
                (slo[i], shi[i]) = if upper { (mid, hi[i]) } else { (lo[i], mid) };
                at_corner &= upper == (corner[i] > 0.0);
            }
            if at_corner {
                next = (slo, shi);
            } else {
                boxes.push((slo, shi));
            }
        }
        (lo, hi) = next;
    }
    boxes.push((lo, hi));
    let mut xi = vec![0.0; n];
    let mut x = vec![0.0; n];
    for (blo, bhi) in &boxes {
        let sub_jac: f64 = (0..n).map(|i| 0.5 * (bhi[i] - blo[i])).product();
        for (t, &wp) in rule.points().zip(rule.weights()) {
            for i in 0..n {
                xi[i] = 0.5 * (blo[i] + bhi[i]) + 0.5 * (bhi[i] - blo[i]) * t[i];
            }
            cell.map_point(&xi, &mut x);
            for (k, (alpha, m, mult)) in alphas.iter().enumerate() {
                let uh: f64 = scales[k] * bases[k].iter().zip(local).map(|(p, c)| p.eval(&xi) * c).sum::<f64>();
                let e = u(alpha, &x) - uh;
                acc[*m] += mult * wp * sub_jac * jac * e * e;
            }
        }
    }
}
