//! Element kernels for the broken tri-harmonic form and global assembly.
//!
//! `a_h(w, v) = Σ_T ∫_T Σ_{i,j,k} ∂_ijk w ∂_ijk v`. The ordered triple sum is
//! folded into distinct multi-indices `|α| = 3` weighted by `3!/α!`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::element::ReferenceElement;
use crate::error::{Error, Result};
use crate::fespace::FeSpace;
use crate::mesh::Cell;
use crate::polynomial::MultiIndex;
use crate::quadrature::QuadratureRule;

/// Reference-cell integrals `∫ ∂^α φ_a ∂^α φ_b dξ` for each `|α| = 3`.
///
/// The physical element matrix is a weighted sum of these, which makes the
/// per-cell cost independent of the quadrature size.
#[derive(Debug, Clone)]
pub struct StiffnessKernel {
    num_dofs: usize,
    terms: Vec<(MultiIndex, f64, Vec<f64>)>,
}

impl StiffnessKernel {
    pub fn new(element: &ReferenceElement, rule: &QuadratureRule) -> Result<Self> {
        let required = element.required_quadrature();
        if rule.points_per_axis() < required {
            return Err(Error::InsufficientQuadrature { given: rule.points_per_axis(), required });
        }
        let nd = element.num_dofs();
        let tab = element.tabulate(rule);
        let w = rule.weights();
        let terms = MultiIndex::all_of_order(element.dim(), 3)
            .into_iter()
            .map(|alpha| {
                let d = tab.matrix(&alpha);
                let mut m = vec![0.0; nd * nd];
                for (p, &wp) in w.iter().enumerate() {
                    let row = &d[p * nd..(p + 1) * nd];
                    for a in 0..nd {
                        let wa = wp * row[a];
                        if wa == 0.0 {
                            continue;
                        }
                        for b in a..nd {
                            m[a * nd + b] += wa * row[b];
                        }
                    }
                }
                for a in 0..nd {
                    for b in 0..a {
                        m[a * nd + b] = m[b * nd + a];
                    }
                }
                let weight = alpha.multinomial() as f64;
                (alpha, weight, m)
            })
            .collect();
        Ok(StiffnessKernel { num_dofs: nd, terms })
    }

    pub fn num_dofs(&self) -> usize {
        self.num_dofs
    }

    /// Element matrix in reference DoF coefficients for half-lengths `h`:
    /// `Σ_α (3!/α!) Π_i h_i^{1-2α_i} · S_α`.
    pub fn element_matrix(&self, h: &[f64]) -> Vec<f64> {
        let nd = self.num_dofs;
        let mut k = vec![0.0; nd * nd];
        for (alpha, weight, m) in &self.terms {
            let s: f64 = h.iter().enumerate().map(|(i, &hi)| hi.powi(1 - 2 * alpha.get(i) as i32)).product();
            let c = weight * s;
            for (kv, mv) in k.iter_mut().zip(m) {
                *kv += c * mv;
            }
        }
        k
    }
}

/// Dense element stiffness (reference DoF coefficients), row-major.
pub fn element_stiffness(cell: &Cell, element: &ReferenceElement, rule: &QuadratureRule) -> Result<Vec<f64>> {
    Ok(StiffnessKernel::new(element, rule)?.element_matrix(&cell.half_lengths))
}

/// `F_a = Σ_p w_p f(x_p) φ_a(ξ_p) Π h_i`.
pub fn element_load(
    cell: &Cell,
    element: &ReferenceElement,
    rule: &QuadratureRule,
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
) -> Vec<f64> {
    let nd = element.num_dofs();
    let tab = element.tabulate(rule);
    let vals = tab.matrix(&MultiIndex::zero(element.dim()));
    let jac = cell.jacobian();
    let mut x = vec![0.0; element.dim()];
    let mut out = vec![0.0; nd];
    for (p, (xi, &w)) in rule.points().zip(rule.weights()).enumerate() {
        cell.map_point(xi, &mut x);
        let fw = f(&x) * w * jac;
        if fw == 0.0 {
            continue;
        }
        for (o, v) in out.iter_mut().zip(&vals[p * nd..(p + 1) * nd]) {
            *o += fw * v;
        }
    }
    out
}

/// Compressed sparse row matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Sorts by `(row, col)` keeping insertion order among duplicates, then sums them.
    pub fn from_triplets(nrows: usize, ncols: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|&(i, j, _)| (i, j));
        let mut indptr = vec![0; nrows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            assert!(i < nrows && j < ncols, "triplet ({i}, {j}) outside {nrows}x{ncols}");
            if last == Some((i, j)) {
                *values.last_mut().expect("duplicate follows an entry") += v;
            } else {
                indices.push(j);
                values.push(v);
                indptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..nrows {
            indptr[i + 1] += indptr[i];
        }
        CsrMatrix { nrows, ncols, indptr, indices, values }
    }

    fn from_pattern(n: usize, rows: Vec<Vec<usize>>) -> Self {
        let mut indptr = Vec::with_capacity(n + 1);
        indptr.push(0);
        let mut indices = Vec::new();
        for r in rows {
            indices.extend(r);
            indptr.push(indices.len());
        }
        let nnz = indices.len();
        CsrMatrix { nrows: n, ncols: n, indptr, indices, values: vec![0.0; nnz] }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `(column, value)` pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.indptr[i]..self.indptr[i + 1];
        match self.indices[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        let r = self.indptr[i]..self.indptr[i + 1];
        r.start + self.indices[r].binary_search(&j).expect("entry in sparsity pattern")
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.nrows) {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.matvec(x, &mut y);
        y
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |A_ij − A_ji|`.
    pub fn max_asymmetry(&self) -> f64 {
        (0..self.nrows)
            .flat_map(|i| self.row(i).map(move |(j, v)| (i, j, v)))
            .map(|(i, j, v)| (v - self.get(j, i)).abs())
            .fold(0.0, f64::max)
    }

    /// Lower-triangle `(row, col, value)` entries, `col <= row`.
    pub fn lower_triplets(&self) -> Vec<(usize, usize, f64)> {
        (0..self.nrows)
            .flat_map(|i| self.row(i).filter(move |&(j, _)| j <= i).map(move |(j, v)| (i, j, v)))
            .collect()
    }

    /// Coordinate text dump, `row col value` per line.
    pub fn dump_coo(&self) -> String {
        let mut s = String::new();
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                let _ = writeln!(s, "{i} {j} {v:.17e}");
            }
        }
        s
    }

    /// Symmetric permutation `P A Pᵀ` with `new = perm[old]`.
    pub fn permute_symmetric(&self, perm: &[usize]) -> CsrMatrix {
        let t = (0..self.nrows)
            .flat_map(|i| self.row(i).map(move |(j, v)| (perm[i], perm[j], v)))
            .collect();
        CsrMatrix::from_triplets(self.nrows, self.ncols, t)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AssemblyOptions {
    /// Gauss points per axis for the stiffness kernel.
    pub stiffness_q: usize,
    /// Gauss points per axis for the load vector.
    pub load_q: usize,
    /// Compute element contributions on the rayon pool.
    pub parallel: bool,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        AssemblyOptions { stiffness_q: 6, load_q: 8, parallel: true }
    }
}

/// Assembled global system over all DoFs (boundary rows included).
#[derive(Clone, Debug)]
pub struct SparseSymSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
}

/// Scatter-adds every element matrix and load through the cell maps.
///
/// Contributions are added in cell order, so the serial and parallel paths
/// produce identical bits.
pub fn assemble(space: &FeSpace, f: &(dyn Fn(&[f64]) -> f64 + Sync), opts: &AssemblyOptions) -> Result<SparseSymSystem> {
    let element = space.element();
    let n = space.dim();
    let kernel = StiffnessKernel::new(element, &QuadratureRule::gauss(opts.stiffness_q, n))?;
    let load_rule = QuadratureRule::gauss(opts.load_q, n);
    let mesh = space.mesh();
    let ndofs = space.num_dofs();

    // Sparsity pattern from DoF adjacency through shared cells.
    let mut dof_cells: Vec<Vec<usize>> = vec![Vec::new(); ndofs];
    for c in 0..mesh.num_cells() {
        for d in space.cell_dofs(c) {
            let list = &mut dof_cells[d.index];
            if list.last() != Some(&c) {
                list.push(c);
            }
        }
    }
    let rows: Vec<Vec<usize>> = dof_cells
        .iter()
        .map(|cells| {
            let mut cols: Vec<usize> =
                cells.iter().flat_map(|&c| space.cell_dofs(c).iter().map(|d| d.index)).collect();
            cols.sort_unstable();
            cols.dedup();
            cols
        })
        .collect();
    drop(dof_cells);
    let mut matrix = CsrMatrix::from_pattern(ndofs, rows);

    let local = |c: usize| {
        let cell = &mesh.cells()[c];
        let ke = kernel.element_matrix(&cell.half_lengths);
        let fe = element_load(cell, element, &load_rule, f);
        (ke, fe)
    };
    let contributions: Vec<(Vec<f64>, Vec<f64>)> = if opts.parallel {
        (0..mesh.num_cells()).into_par_iter().map(local).collect()
    } else {
        (0..mesh.num_cells()).map(local).collect()
    };

    let nd = element.num_dofs();
    let mut rhs = vec![0.0; ndofs];
    for (c, (ke, fe)) in contributions.iter().enumerate() {
        let map = space.cell_dofs(c);
        for a in 0..nd {
            let (ga, sa) = (map[a].index, map[a].scaling);
            rhs[ga] += sa * fe[a];
            for b in 0..nd {
                let (gb, sb) = (map[b].index, map[b].scaling);
                let k = matrix.slot(ga, gb);
                matrix.values[k] += sa * sb * ke[a * nd + b];
            }
        }
    }
    Ok(SparseSymSystem { matrix, rhs })
}

/// System restricted to the free DoFs after symmetric elimination.
#[derive(Clone, Debug)]
pub struct ReducedSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Global index of each free unknown.
    pub free: Vec<usize>,
    full_len: usize,
    boundary_values: Vec<(usize, f64)>,
}

impl ReducedSystem {
    pub fn len(&self) -> usize {
        self.free.len()
    }

    pub fn is_empty(&self) -> bool {
        self.free.is_empty()
    }

    /// Full coefficient vector from the free solution and the imposed values.
    pub fn reconstruct(&self, x: &[f64]) -> Vec<f64> {
        let mut u = vec![0.0; self.full_len];
        for (&g, &v) in self.free.iter().zip(x) {
            u[g] = v;
        }
        for &(g, v) in &self.boundary_values {
            u[g] = v;
        }
        u
    }
}

/// Removes `boundary` rows/columns and moves `K[:, bd] g_bd` to the right-hand side.
pub fn apply_dirichlet(system: &SparseSymSystem, boundary: &[usize], values: &BTreeMap<usize, f64>) -> Result<ReducedSystem> {
    let n = system.matrix.nrows();
    let mut g = vec![None; n];
    for &b in boundary {
        let v = *values.get(&b).ok_or(Error::MissingBoundaryValue(b))?;
        g[b] = Some(v);
    }
    let free: Vec<usize> = (0..n).filter(|&i| g[i].is_none()).collect();
    let mut new_index = vec![usize::MAX; n];
    for (k, &i) in free.iter().enumerate() {
        new_index[i] = k;
    }
    let mut triplets = Vec::new();
    let mut rhs = Vec::with_capacity(free.len());
    for &i in &free {
        let mut r = system.rhs[i];
        for (j, v) in system.matrix.row(i) {
            match g[j] {
                Some(gj) => r -= v * gj,
                None => triplets.push((new_index[i], new_index[j], v)),
            }
        }
        rhs.push(r);
    }
    let m = free.len();
    let boundary_values = boundary.iter().map(|&b| (b, g[b].expect("boundary value set"))).collect();
    Ok(ReducedSystem {
        matrix: CsrMatrix::from_triplets(m, m, triplets),
        rhs,
        free,
        full_len: n,
        boundary_values,
    })
}
