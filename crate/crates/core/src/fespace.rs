//! Global DoF tables for a `(mesh, family)` pair.
//!
//! Global DoFs hold physical values (`u`, `∂u/∂x_j`, `∂²u/∂x_j²`,
//! `∂²u/∂ν²`). The local reference coefficient of a cell is the global value
//! times `h_axis^order`, the chain-rule factor `∂/∂ξ_j = h_j ∂/∂x_j`.

use std::sync::Arc;

use crate::element::{DofKind, ElementFamily, ReferenceElement};
use crate::error::{Error, Result};
use crate::mesh::StructuredMesh;
use crate::polynomial::MultiIndex;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DofEntity {
    Vertex(usize),
    Face(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GlobalDofKind {
    Value,
    Gradient(usize),
    PureSecond(usize),
    FaceSecondNormal(usize),
}

impl GlobalDofKind {
    pub fn order(&self) -> u32 {
        match self {
            GlobalDofKind::Value => 0,
            GlobalDofKind::Gradient(_) => 1,
            GlobalDofKind::PureSecond(_) | GlobalDofKind::FaceSecondNormal(_) => 2,
        }
    }

    pub fn derivative(&self, n: usize) -> MultiIndex {
        match *self {
            GlobalDofKind::Value => MultiIndex::zero(n),
            GlobalDofKind::Gradient(a) => MultiIndex::unit(n, a, 1),
            GlobalDofKind::PureSecond(a) | GlobalDofKind::FaceSecondNormal(a) => MultiIndex::unit(n, a, 2),
        }
    }

    fn of_local(kind: &DofKind) -> Self {
        match *kind {
            DofKind::PointValue { .. } => GlobalDofKind::Value,
            DofKind::PointGradient { axis, .. } => GlobalDofKind::Gradient(axis),
            DofKind::PointPureSecond { axis, .. } => GlobalDofKind::PureSecond(axis),
            DofKind::FaceCenterSecondNormal { axis, .. } => GlobalDofKind::FaceSecondNormal(axis),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GlobalDof {
    pub entity: DofEntity,
    pub kind: GlobalDofKind,
    pub index: usize,
}

/// Local-to-global entry of a cell: `local = scaling · global[index]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellDof {
    pub index: usize,
    pub scaling: f64,
}

#[derive(Debug)]
pub struct FeSpace {
    mesh: Arc<StructuredMesh>,
    element: Arc<ReferenceElement>,
    dofs: Vec<GlobalDof>,
    cell_maps: Vec<Vec<CellDof>>,
    boundary: Vec<bool>,
}

impl FeSpace {
    pub fn new(mesh: Arc<StructuredMesh>, family: ElementFamily) -> Result<Self> {
        let element = ReferenceElement::shared(family, mesh.dim())?;
        FeSpace::with_element(mesh, element)
    }

    pub fn with_element(mesh: Arc<StructuredMesh>, element: Arc<ReferenceElement>) -> Result<Self> {
        let n = mesh.dim();
        if element.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: element.dim() });
        }
        // Per-entity templates taken from the reference vertex 0 and face (0, −).
        let vertex_template: Vec<GlobalDofKind> = element
            .dofs()
            .iter()
            .filter(|d| d.vertex() == Some(0))
            .map(|d| GlobalDofKind::of_local(&d.kind))
            .collect();
        let face_template: Vec<GlobalDofKind> = element
            .dofs()
            .iter()
            .filter(|d| matches!(d.kind, DofKind::FaceCenterSecondNormal { axis: 0, side: crate::element::Side::Minus }))
            .map(|d| GlobalDofKind::of_local(&d.kind))
            .collect();
        let kpv = vertex_template.len();
        let kpf = face_template.len();

        let mut dofs = Vec::with_capacity(mesh.num_vertices() * kpv + mesh.num_faces() * kpf);
        for v in 0..mesh.num_vertices() {
            for &kind in &vertex_template {
                dofs.push(GlobalDof { entity: DofEntity::Vertex(v), kind, index: dofs.len() });
            }
        }
        let face_base = dofs.len();
        for (f, face) in mesh.faces().iter().enumerate() {
            for _ in &face_template {
                let kind = GlobalDofKind::FaceSecondNormal(face.axis);
                dofs.push(GlobalDof { entity: DofEntity::Face(f), kind, index: dofs.len() });
            }
        }

        let slot = |kind: GlobalDofKind| {
            vertex_template.iter().position(|&k| k == kind).expect("vertex DoF kind in template")
        };
        let cell_maps = mesh
            .cells()
            .iter()
            .map(|cell| {
                element
                    .dofs()
                    .iter()
                    .map(|d| {
                        let kind = GlobalDofKind::of_local(&d.kind);
                        let index = match d.kind {
                            DofKind::FaceCenterSecondNormal { axis, side } => {
                                face_base + cell.faces[2 * axis + side.index()] * kpf
                            }
                            _ => cell.vertices[d.vertex().expect("vertex DoF")] * kpv + slot(kind),
                        };
                        let scaling = d.axis().map_or(1.0, |a| cell.half_lengths[a].powi(d.order() as i32));
                        CellDof { index, scaling }
                    })
                    .collect()
            })
            .collect();

        let boundary = dofs
            .iter()
            .map(|d| match d.entity {
                DofEntity::Vertex(v) => mesh.is_boundary_vertex(v),
                DofEntity::Face(f) => mesh.faces()[f].is_boundary(),
            })
            .collect();

        Ok(FeSpace { mesh, element, dofs, cell_maps, boundary })
    }

    pub fn mesh(&self) -> &StructuredMesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> &Arc<StructuredMesh> {
        &self.mesh
    }

    pub fn element(&self) -> &ReferenceElement {
        &self.element
    }

    pub fn family(&self) -> ElementFamily {
        self.element.family()
    }

    pub fn dim(&self) -> usize {
        self.mesh.dim()
    }

    pub fn num_dofs(&self) -> usize {
        self.dofs.len()
    }

    pub fn dofs(&self) -> &[GlobalDof] {
        &self.dofs
    }

    /// Local-to-global map of `cell` in reference DoF order.
    pub fn cell_dofs(&self, cell: usize) -> &[CellDof] {
        &self.cell_maps[cell]
    }

    pub fn is_boundary_dof(&self, i: usize) -> bool {
        self.boundary[i]
    }

    /// DoFs fixed by the essential boundary conditions of `V_h0`.
    pub fn boundary_dofs(&self) -> Vec<usize> {
        (0..self.dofs.len()).filter(|&i| self.boundary[i]).collect()
    }

    pub fn free_dofs(&self) -> Vec<usize> {
        (0..self.dofs.len()).filter(|&i| !self.boundary[i]).collect()
    }

    /// Physical sampling point of a global DoF.
    pub fn dof_point(&self, i: usize) -> &[f64] {
        match self.dofs[i].entity {
            DofEntity::Vertex(v) => &self.mesh.vertices()[v].coords,
            DofEntity::Face(f) => &self.mesh.faces()[f].barycenter,
        }
    }

    /// Applies every global functional to `f(α, x) = ∂^α u(x)`.
    pub fn interpolate_with(&self, f: impl Fn(&MultiIndex, &[f64]) -> f64) -> Vec<f64> {
        let n = self.dim();
        (0..self.dofs.len()).map(|i| f(&self.dofs[i].kind.derivative(n), self.dof_point(i))).collect()
    }

    /// Reference coefficients of `cell` for the global vector `coeffs`.
    pub fn local_coefficients(&self, cell: usize, coeffs: &[f64]) -> Vec<f64> {
        self.cell_maps[cell].iter().map(|d| d.scaling * coeffs[d.index]).collect()
    }

    /// `∂^α u_h` (physical derivative) at reference point `xi` of `cell`.
    pub fn eval_in_cell(&self, cell: usize, coeffs: &[f64], alpha: &MultiIndex, xi: &[f64]) -> Result<f64> {
        let polys = self.element.derivative_basis(alpha)?;
        let local = self.local_coefficients(cell, coeffs);
        let h = &self.mesh.cells()[cell].half_lengths;
        let scale: f64 = (0..self.dim()).map(|i| h[i].powi(-(alpha.get(i) as i32))).product();
        Ok(scale * local.iter().zip(polys).map(|(c, p)| c * p.eval(xi)).sum::<f64>())
    }
}
