//! Structured axis-aligned n-rectangle meshes (tensor grid plus an
//! active-cell mask).
//!
//! Grid multi-indices are linearized with axis 0 fastest; cell, vertex and
//! face ids follow that order (faces grouped by normal axis first).

use std::fmt::Write as _;

use crate::element::vertex_signs;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct BoxDomain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::InvalidMesh(format!(
                "box bounds of lengths {} and {}",
                lo.len(),
                hi.len()
            )));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(Error::InvalidMesh("box requires lo < hi on every axis".into()));
        }
        Ok(BoxDomain { lo, hi })
    }

    pub fn unit(n: usize) -> Self {
        BoxDomain { lo: vec![0.0; n], hi: vec![1.0; n] }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }
}

#[derive(Clone, Debug)]
pub struct Cell {
    pub center: Vec<f64>,
    pub half_lengths: Vec<f64>,
    pub grid: Vec<usize>,
    /// Global vertex ids in reference vertex order.
    pub vertices: Vec<usize>,
    /// Global face ids ordered `(axis 0 −, axis 0 +, axis 1 −, …)`.
    pub faces: Vec<usize>,
}

impl Cell {
    pub fn volume(&self) -> f64 {
        self.half_lengths.iter().map(|h| 2.0 * h).product()
    }

    /// `x = c + h ∘ ξ`.
    pub fn map_point(&self, xi: &[f64], out: &mut [f64]) {
        for i in 0..xi.len() {
            out[i] = self.center[i] + self.half_lengths[i] * xi[i];
        }
    }

    pub fn jacobian(&self) -> f64 {
        self.half_lengths.iter().product()
    }
}

#[derive(Clone, Debug)]
pub struct Face {
    pub axis: usize,
    /// `[cell below, cell above]` along `axis`; the lower cell sees this
    /// face as its `F_axis^+`.
    pub cells: [Option<usize>; 2],
    pub barycenter: Vec<f64>,
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.cells.iter().flatten().count() == 1
    }

    pub fn incident_cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.cells.iter().flatten().copied()
    }
}

#[derive(Clone, Debug)]
pub struct Vertex {
    pub coords: Vec<f64>,
    pub grid: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct StructuredMesh {
    dim: usize,
    divisions: Vec<usize>,
    nodes: Vec<Vec<f64>>,
    active: Vec<bool>,
    cells: Vec<Cell>,
    faces: Vec<Face>,
    vertices: Vec<Vertex>,
    vertex_cells: Vec<Vec<usize>>,
    boundary_vertex: Vec<bool>,
}

fn linear(index: &[usize], dims: &[usize]) -> usize {
    index.iter().zip(dims).rev().fold(0, |acc, (&i, &d)| acc * d + i)
}

fn unlinear(mut flat: usize, dims: &[usize]) -> Vec<usize> {
    dims.iter()
        .map(|&d| {
            let i = flat % d;
            flat /= d;
            i
        })
        .collect()
}

impl StructuredMesh {
    /// Builds a mesh from per-axis node coordinates and an activity
    /// predicate on grid cells.
    pub fn from_grid(nodes: Vec<Vec<f64>>, active: impl Fn(&[usize]) -> bool) -> Result<Self> {
        let n = nodes.len();
        if n == 0 {
            return Err(Error::InvalidMesh("dimension must be at least 1".into()));
        }
        if nodes.iter().any(|ax| ax.len() < 2 || ax.windows(2).any(|w| !(w[0] < w[1]))) {
            return Err(Error::InvalidMesh("node coordinates must be strictly increasing".into()));
        }
        let divisions: Vec<usize> = nodes.iter().map(|ax| ax.len() - 1).collect();
        let vdims: Vec<usize> = divisions.iter().map(|d| d + 1).collect();
        let ncell_grid: usize = divisions.iter().product();
        let active_mask: Vec<bool> = (0..ncell_grid).map(|c| active(&unlinear(c, &divisions))).collect();

        let cell_active = |g: &[isize]| -> bool {
            if g.iter().zip(&divisions).any(|(&i, &d)| i < 0 || i as usize >= d) {
                return false;
            }
            let gi: Vec<usize> = g.iter().map(|&i| i as usize).collect();
            active_mask[linear(&gi, &divisions)]
        };

        // Vertices touching at least one active cell.
        let nvert_grid: usize = vdims.iter().product();
        let mut vertex_id = vec![usize::MAX; nvert_grid];
        let mut vertices = Vec::new();
        let mut boundary_vertex = Vec::new();
        for flat in 0..nvert_grid {
            let g = unlinear(flat, &vdims);
            let mut any = false;
            let mut all = true;
            for corner in 0..1usize << n {
                let cg: Vec<isize> =
                    (0..n).map(|j| g[j] as isize - if (corner >> j) & 1 == 1 { 0 } else { 1 }).collect();
                let a = cell_active(&cg);
                any |= a;
                all &= a;
            }
            if any {
                vertex_id[flat] = vertices.len();
                vertices.push(Vertex { coords: (0..n).map(|j| nodes[j][g[j]]).collect(), grid: g });
                boundary_vertex.push(!all);
            }
        }

        // Faces, grouped by axis.
        let mut face_id: Vec<Vec<usize>> = Vec::with_capacity(n);
        let mut faces = Vec::new();
        for axis in 0..n {
            let fdims: Vec<usize> =
                (0..n).map(|j| if j == axis { divisions[j] + 1 } else { divisions[j] }).collect();
            let count: usize = fdims.iter().product();
            let mut ids = vec![usize::MAX; count];
            for (flat, slot) in ids.iter_mut().enumerate() {
                let g = unlinear(flat, &fdims);
                let mut below: Vec<isize> = g.iter().map(|&i| i as isize).collect();
                below[axis] -= 1;
                let above: Vec<isize> = g.iter().map(|&i| i as isize).collect();
                if cell_active(&below) || cell_active(&above) {
                    *slot = faces.len();
                    let barycenter = (0..n)
                        .map(|j| if j == axis { nodes[j][g[j]] } else { 0.5 * (nodes[j][g[j]] + nodes[j][g[j] + 1]) })
                        .collect();
                    faces.push(Face { axis, cells: [None, None], barycenter });
                }
            }
            face_id.push(ids);
        }

        let mut cells = Vec::new();
        for flat in 0..ncell_grid {
            if !active_mask[flat] {
                continue;
            }
            let g = unlinear(flat, &divisions);
            let id = cells.len();
            let center: Vec<f64> = (0..n).map(|j| 0.5 * (nodes[j][g[j]] + nodes[j][g[j] + 1])).collect();
            let half_lengths: Vec<f64> = (0..n).map(|j| 0.5 * (nodes[j][g[j] + 1] - nodes[j][g[j]])).collect();
            let cverts = (0..1usize << n)
                .map(|v| {
                    let s = vertex_signs(n, v);
                    let vg: Vec<usize> = (0..n).map(|j| g[j] + usize::from(s[j] > 0)).collect();
                    vertex_id[linear(&vg, &vdims)]
                })
                .collect();
            let mut cfaces = Vec::with_capacity(2 * n);
            for (axis, ids) in face_id.iter().enumerate() {
                let fdims: Vec<usize> =
                    (0..n).map(|j| if j == axis { divisions[j] + 1 } else { divisions[j] }).collect();
                for plus in [false, true] {
                    let mut fg = g.clone();
                    fg[axis] += usize::from(plus);
                    let fid = ids[linear(&fg, &fdims)];
                    faces[fid].cells[usize::from(!plus)] = Some(id);
                    cfaces.push(fid);
                }
            }
            cells.push(Cell { center, half_lengths, grid: g, vertices: cverts, faces: cfaces });
        }

        let mut vertex_cells = vec![Vec::new(); vertices.len()];
        for (c, cell) in cells.iter().enumerate() {
            for &v in &cell.vertices {
                vertex_cells[v].push(c);
            }
        }

        Ok(StructuredMesh {
            dim: n,
            divisions,
            nodes,
            active: active_mask,
            cells,
            faces,
            vertices,
            vertex_cells,
            boundary_vertex,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn divisions(&self) -> &[usize] {
        &self.divisions
    }

    pub fn nodes(&self, axis: usize) -> &[f64] {
        &self.nodes[axis]
    }

    pub fn is_grid_cell_active(&self, grid: &[usize]) -> bool {
        self.active[linear(grid, &self.divisions)]
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Cells sharing vertex `v`.
    pub fn vertex_cells(&self, v: usize) -> &[usize] {
        &self.vertex_cells[v]
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    /// Boundary vertex ids and boundary face ids.
    pub fn classify_boundary(&self) -> (Vec<usize>, Vec<usize>) {
        let bv = (0..self.vertices.len()).filter(|&v| self.boundary_vertex[v]).collect();
        let bf = (0..self.faces.len()).filter(|&f| self.faces[f].is_boundary()).collect();
        (bv, bf)
    }

    pub fn volume(&self) -> f64 {
        self.cells.iter().map(Cell::volume).sum()
    }

    /// Largest half-length over all cells.
    pub fn max_half_length(&self) -> f64 {
        self.cells.iter().flat_map(|c| c.half_lengths.iter().copied()).fold(0.0, f64::max)
    }

    /// `max_i h_i / min_i h_i` over the whole mesh.
    pub fn aspect_bound(&self) -> f64 {
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for h in self.cells.iter().flat_map(|c| c.half_lengths.iter()) {
            lo = lo.min(*h);
            hi = hi.max(*h);
        }
        hi / lo
    }

    /// Plain-text dump: one `vertex`, `cell` or `face` record per line.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# dim {} vertices {} cells {} faces {}", self.dim, self.num_vertices(), self.num_cells(), self.num_faces());
        for (i, v) in self.vertices.iter().enumerate() {
            let coords: Vec<String> = v.coords.iter().map(|x| format!("{x:.17e}")).collect();
            let _ = writeln!(s, "vertex {i} {} {}", coords.join(" "), u8::from(self.boundary_vertex[i]));
        }
        for (i, c) in self.cells.iter().enumerate() {
            let ids: Vec<String> = c.vertices.iter().map(usize::to_string).collect();
            let _ = writeln!(s, "cell {i} {}", ids.join(" "));
        }
        for (i, f) in self.faces.iter().enumerate() {
            let id = |c: Option<usize>| c.map_or("-1".to_string(), |c| c.to_string());
            let _ = writeln!(s, "face {i} {} {} {}", f.axis, id(f.cells[0]), id(f.cells[1]));
        }
        s
    }
}

/// Uniform tensor mesh of `domain` with `subdivisions[i]` cells along axis `i`.
pub fn uniform_mesh(domain: &BoxDomain, subdivisions: &[usize]) -> Result<StructuredMesh> {
    if subdivisions.len() != domain.dim() {
        return Err(Error::DimensionMismatch { expected: domain.dim(), found: subdivisions.len() });
    }
    if subdivisions.iter().any(|&s| s == 0) {
        return Err(Error::InvalidMesh("zero subdivisions".into()));
    }
    let nodes = (0..domain.dim())
        .map(|i| {
            let (a, b, m) = (domain.lo[i], domain.hi[i], subdivisions[i]);
            (0..=m).map(|k| if k == m { b } else { a + (b - a) * k as f64 / m as f64 }).collect()
        })
        .collect();
    StructuredMesh::from_grid(nodes, |_| true)
}

/// `(-1,1)² \ [0,1)×(-1,0]` with `n` cells per unit length (`3n²` cells).
pub fn lshape_mesh(n: usize) -> Result<StructuredMesh> {
    if n == 0 {
        return Err(Error::InvalidMesh("zero subdivisions".into()));
    }
    let axis: Vec<f64> = (0..=2 * n).map(|k| -1.0 + k as f64 / n as f64).collect();
    StructuredMesh::from_grid(vec![axis.clone(), axis], |g| !(g[0] >= n && g[1] < n))
}
