//! Verification suites: unisolvence, weak continuity across faces, local
//! interpolation identities and the cubic patch test.

use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cases::ManufacturedCase;
use super::study::{solve_on_mesh, StudyOptions};
use crate::element::{morley_closed_form, shape_space, unisolvence_determinant, DofKind, ElementFamily, ReferenceElement, Side};
use crate::error::{Error, Result};
use crate::fespace::FeSpace;
use crate::mesh::{uniform_mesh, BoxDomain, StructuredMesh};
use crate::polynomial::{int, MultiIndex, Polynomial};
use crate::quadrature::QuadratureRule;

/// Relative tolerance for floating-point jump checks.
pub const JUMP_TOLERANCE: f64 = 1e-11;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckItem {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerificationReport {
    pub items: Vec<CheckItem>,
}

impl VerificationReport {
    pub fn push(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.items.push(CheckItem { name: name.into(), passed, detail: detail.into() });
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.items.extend(other.items);
    }

    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckItem> {
        self.items.iter().filter(|i| !i.passed)
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in &self.items {
            let tag = if i.passed { "PASS" } else { "FAIL" };
            if i.detail.is_empty() {
                writeln!(f, "{tag} {}", i.name)?;
            } else {
                writeln!(f, "{tag} {}: {}", i.name, i.detail)?;
            }
        }
        Ok(())
    }
}

/// The five families, with the partial Adini element along the first axis.
pub const ALL_FAMILIES: [ElementFamily; 5] = [
    ElementFamily::Q1,
    ElementFamily::AdiniClassic,
    ElementFamily::PartialAdini(0),
    ElementFamily::MorleyType,
    ElementFamily::AdiniType,
];

/// Exact DoF–monomial determinants. Morley-type is checked from `n = 2`.
pub fn verify_unisolvence(families: &[ElementFamily], dims: &[usize]) -> VerificationReport {
    let mut r = VerificationReport::default();
    for &n in dims {
        for &fam in families {
            if fam == ElementFamily::MorleyType && n < 2 {
                continue;
            }
            let name = format!("unisolvence {fam} n={n}");
            match unisolvence_determinant(fam, n) {
                Ok(d) => r.push(name, !d.is_zero(), if d.is_zero() { "zero determinant".into() } else { String::new() }),
                Err(e) => r.push(name, false, e.to_string()),
            }
        }
    }
    r
}

/// Exact Kronecker duality `N_i(φ_j) = δ_ij`, and for Morley-type at
/// `n ∈ {2, 3}` equality with the closed-form basis.
pub fn verify_dual_basis(family: ElementFamily, n: usize) -> VerificationReport {
    let mut r = VerificationReport::default();
    let name = format!("duality {family} n={n}");
    let e = match ReferenceElement::shared(family, n) {
        Ok(e) => e,
        Err(err) => {
            r.push(name, false, err.to_string());
            return r;
        }
    };
    let mut bad = None;
    'outer: for (i, d) in e.dofs().iter().enumerate() {
        for (j, phi) in e.basis().iter().enumerate() {
            let v = d.apply(phi);
            let want = if i == j { BigRational::one() } else { BigRational::zero() };
            if v != want {
                bad = Some(format!("{d} applied to basis {j} gives {v}"));
                break 'outer;
            }
        }
    }
    r.push(name, bad.is_none(), bad.unwrap_or_default());
    if family == ElementFamily::MorleyType && (2..=3).contains(&n) {
        let name = format!("closed-form basis MorleyType n={n}");
        match morley_closed_form(n) {
            Ok(closed) => {
                let wrong = closed.iter().zip(e.basis()).position(|(a, b)| a != b);
                r.push(name, wrong.is_none() && closed.len() == e.num_dofs(), wrong.map(|i| format!("basis {i} differs")).unwrap_or_default());
            }
            Err(err) => r.push(name, false, err.to_string()),
        }
    }
    r
}

/// Unisolvence for all families plus duality at every `n` in `dims`.
pub fn unisolvence_suite(dims: &[usize]) -> VerificationReport {
    let mut r = verify_unisolvence(&ALL_FAMILIES, dims);
    for &n in dims {
        for fam in ALL_FAMILIES {
            if fam == ElementFamily::MorleyType && n < 2 {
                continue;
            }
            r.extend(verify_dual_basis(fam, n));
        }
    }
    r
}

/// Left-cell DoF index to the matching right-cell index for two unit cells
/// sharing the face normal to `axis`.
fn matching_across(element: &ReferenceElement, axis: usize) -> Vec<Option<usize>> {
    let dofs = element.dofs();
    let find = |kind: DofKind| dofs.iter().position(|d| d.kind == kind);
    let bit = 1usize << axis;
    dofs.iter()
        .map(|d| {
            let moved = |v: usize| if v & bit != 0 { Some(v ^ bit) } else { None };
            match d.kind {
                DofKind::PointValue { vertex } => moved(vertex).map(|v| DofKind::PointValue { vertex: v }),
                DofKind::PointGradient { vertex, axis: a } => {
                    moved(vertex).map(|v| DofKind::PointGradient { vertex: v, axis: a })
                }
                DofKind::PointPureSecond { vertex, axis: a } => {
                    moved(vertex).map(|v| DofKind::PointPureSecond { vertex: v, axis: a })
                }
                DofKind::FaceCenterSecondNormal { axis: a, side } => (a == axis && side == Side::Plus)
                    .then_some(DofKind::FaceCenterSecondNormal { axis: a, side: Side::Minus }),
            }
            .and_then(find)
        })
        .collect()
}

/// Derivatives whose face traces are tested on a face normal to `axis`:
/// every tangential pair and the pure normal second derivative.
fn face_derivatives(family: ElementFamily, n: usize, axis: usize) -> Vec<(String, MultiIndex)> {
    let mut out = Vec::new();
    if family == ElementFamily::MorleyType {
        for i in (0..n).filter(|&i| i != axis) {
            for j in (i..n).filter(|&j| j != axis) {
                let mut e = vec![0; n];
                e[i] += 1;
                e[j] += 1;
                out.push((format!("tt({},{})", i + 1, j + 1), MultiIndex::new(e)));
            }
        }
    }
    out.push(("nn".into(), MultiIndex::unit(n, axis, 2)));
    out
}

/// Exact per-basis checks on two unit cells glued along each axis.
///
/// Morley-type: the face integral of every tested derivative of the global
/// basis function jumps by zero. Adini-type: the normal second derivative
/// has identical traces. DoFs not located on the shared face give zero
/// traces, which is the boundary statement.
pub fn verify_exact_face_traces(family: ElementFamily, n: usize) -> Result<VerificationReport> {
    let e = ReferenceElement::shared(family, n)?;
    let mut r = VerificationReport::default();
    for axis in 0..n {
        let matching = matching_across(&e, axis);
        let mut right_used = vec![false; e.num_dofs()];
        for m in matching.iter().flatten() {
            right_used[*m] = true;
        }
        for (label, alpha) in face_derivatives(family, n, axis) {
            let trace = |i: usize, side: i64| e.basis()[i].derivative(&alpha).restrict_to_face(axis, side);
            let mut interior_bad = None;
            let mut boundary_bad = None;
            let check = |p: &Polynomial| match family {
                ElementFamily::MorleyType => p.integrate_reference().is_zero(),
                _ => p.is_zero(),
            };
            for a in 0..e.num_dofs() {
                let left = trace(a, 1);
                match matching[a] {
                    Some(b) => {
                        let jump = &left - &trace(b, -1);
                        if !check(&jump) && interior_bad.is_none() {
                            interior_bad = Some(format!("basis {} ({})", a, e.dofs()[a]));
                        }
                    }
                    None => {
                        if !check(&left) && boundary_bad.is_none() {
                            boundary_bad = Some(format!("basis {} ({})", a, e.dofs()[a]));
                        }
                    }
                }
            }
            for b in (0..e.num_dofs()).filter(|&b| !right_used[b]) {
                if !check(&trace(b, -1)) && boundary_bad.is_none() {
                    boundary_bad = Some(format!("basis {} ({})", b, e.dofs()[b]));
                }
            }
            let what = if family == ElementFamily::MorleyType { "mean" } else { "trace" };
            r.push(
                format!("exact {what} jump {label} {family} n={n} axis {}", axis + 1),
                interior_bad.is_none(),
                interior_bad.unwrap_or_default(),
            );
            r.push(
                format!("exact off-face {what} {label} {family} n={n} axis {}", axis + 1),
                boundary_bad.is_none(),
                boundary_bad.unwrap_or_default(),
            );
        }
    }
    Ok(r)
}

/// Two cells along the first axis and an anisotropic `3ⁿ` grid.
fn continuity_meshes(n: usize) -> Result<Vec<(String, StructuredMesh)>> {
    let two = uniform_mesh(&BoxDomain::new(vec![0.0; n], (0..n).map(|i| 1.0 + 0.25 * i as f64).collect())?, &{
        let mut d = vec![1; n];
        d[0] = 2;
        d
    })?;
    let nodes: Vec<Vec<f64>> = (0..n).map(|i| vec![0.0, 0.3 + 0.05 * i as f64, 0.5 + 0.1 * i as f64, 1.2]).collect();
    let grid = StructuredMesh::from_grid(nodes, |_| true)?;
    Ok(vec![("2-cell".into(), two), (format!("3^{n}"), grid)])
}

struct FaceSample {
    /// Physical derivative values at the face quadrature points.
    values: Vec<f64>,
    weights: Vec<f64>,
}

fn face_sample(space: &FeSpace, coeffs: &[f64], cell: usize, axis: usize, side: i64, alpha: &MultiIndex, rule: &QuadratureRule) -> Result<FaceSample> {
    let n = space.dim();
    let h = &space.mesh().cells()[cell].half_lengths;
    let area: f64 = (0..n).filter(|&i| i != axis).map(|i| h[i]).product();
    let mut xi = vec![0.0; n];
    let mut values = Vec::with_capacity(rule.len());
    for t in rule.points() {
        let mut k = 0;
        for (i, x) in xi.iter_mut().enumerate() {
            if i == axis {
                *x = side as f64;
            } else {
                *x = t[k];
                k += 1;
            }
        }
        values.push(space.eval_in_cell(cell, coeffs, alpha, &xi)?);
    }
    Ok(FaceSample { values, weights: rule.weights().iter().map(|w| w * area).collect() })
}

/// Floating-point jump tests for random coefficient vectors in `V_h` and `V_h0`.
pub fn verify_weak_continuity(family: ElementFamily, n: usize, trials: usize, seed: u64) -> Result<VerificationReport> {
    if !(2..=3).contains(&n) {
        return Err(Error::Config(format!("continuity checks need n in {{2, 3}}, got {n}")));
    }
    if !matches!(family, ElementFamily::MorleyType | ElementFamily::AdiniType) {
        return Err(Error::Config(format!("continuity checks apply to MorleyType and AdiniType, not {family}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rule = QuadratureRule::gauss(6, n - 1);
    let mut r = VerificationReport::default();
    let pointwise = family == ElementFamily::AdiniType;
    for (mesh_name, mesh) in continuity_meshes(n)? {
        let space = FeSpace::new(Arc::new(mesh), family)?;
        let mesh = space.mesh();
        for zero_boundary in [false, true] {
            let mut worst: f64 = 0.0;
            let mut worst_boundary: f64 = 0.0;
            let mut where_ = String::new();
            for _ in 0..trials {
                let coeffs: Vec<f64> = (0..space.num_dofs())
                    .map(|i| if zero_boundary && space.is_boundary_dof(i) { 0.0 } else { rng.gen_range(-1.0..1.0) })
                    .collect();
                for face in mesh.faces() {
                    if face.is_boundary() && !zero_boundary {
                        continue;
                    }
                    for (label, alpha) in face_derivatives(family, n, face.axis) {
                        let sides: Vec<(FaceSample, f64)> = face
                            .cells
                            .iter()
                            .zip([1i64, -1])
                            .filter_map(|(c, side)| c.map(|c| (c, side)))
                            .map(|(c, side)| {
                                face_sample(&space, &coeffs, c, face.axis, side, &alpha, &rule).map(|s| (s, side as f64))
                            })
                            .collect::<Result<_>>()?;
                        // Jump = below − above; a boundary face compares against zero.
                        let np = rule.len();
                        let diff: Vec<f64> = (0..np).map(|p| sides.iter().map(|(s, sg)| sg * s.values[p]).sum()).collect();
                        let scale: f64 = sides.iter().flat_map(|(s, _)| s.values.iter().map(|v| v.abs())).fold(1.0, f64::max);
                        let err = if pointwise {
                            diff.iter().fold(0.0f64, |m, d| m.max(d.abs())) / scale
                        } else {
                            let w = &sides[0].0.weights;
                            let area: f64 = w.iter().sum();
                            (0..np).map(|p| w[p] * diff[p]).sum::<f64>().abs() / (scale * area)
                        };
                        let slot = if face.is_boundary() { &mut worst_boundary } else { &mut worst };
                        if err > *slot {
                            *slot = err;
                            if err > JUMP_TOLERANCE {
                                where_ = format!("{label} on face at {:?}", face.barycenter);
                            }
                        }
                    }
                }
            }
            let kind = if pointwise { "pointwise nn" } else { "mean" };
            let space_name = if zero_boundary { "V_h0" } else { "V_h" };
            r.push(
                format!("{kind} jumps {family} n={n} {mesh_name} {space_name}"),
                worst <= JUMP_TOLERANCE,
                if worst <= JUMP_TOLERANCE { format!("max {worst:.1e}") } else { format!("{worst:.3e} at {where_}") },
            );
            if zero_boundary {
                r.push(
                    format!("{kind} boundary traces {family} n={n} {mesh_name}"),
                    worst_boundary <= JUMP_TOLERANCE,
                    format!("max {worst_boundary:.1e}"),
                );
            }
        }
    }
    r.extend(verify_exact_face_traces(family, n)?);
    Ok(r)
}

/// Exact face integrals of the local interpolation identities.
///
/// Morley-type: `∫_{F_j^±} ∂_i(∂_i Π¹v − Π⁰ ∂_i Π¹v) = 0`.
/// Adini-type: `∫_{F_j^±} ∂_i(∂_i v − Π^{e_i} ∂_i v) = 0`.
/// Here `Π⁰`, `Π¹`, `Π^{e_i}` interpolate into `Q_1`, the classical Adini
/// space and the partial Adini space along `i`.
pub fn verify_local_interpolation_identities(family: ElementFamily, n: usize) -> Result<VerificationReport> {
    if !(2..=3).contains(&n) {
        return Err(Error::Config(format!("interpolation identities need n in {{2, 3}}, got {n}")));
    }
    let monomials = shape_space(family, n)?;
    let q1 = ReferenceElement::shared(ElementFamily::Q1, n)?;
    let adini = ReferenceElement::shared(ElementFamily::AdiniClassic, n)?;
    let mut r = VerificationReport::default();
    for i in 0..n {
        let partial = ReferenceElement::shared(ElementFamily::PartialAdini(i), n)?;
        let mut bad = None;
        for m in &monomials {
            let v = Polynomial::monomial(m.clone(), int(1));
            let integrand = match family {
                ElementFamily::MorleyType => {
                    let g = adini.interpolate(&v).differentiate(i, 1);
                    (&g - &q1.interpolate(&g)).differentiate(i, 1)
                }
                ElementFamily::AdiniType => {
                    let g = v.differentiate(i, 1);
                    (&g - &partial.interpolate(&g)).differentiate(i, 1)
                }
                _ => return Err(Error::Config(format!("no interpolation identity for {family}"))),
            };
            for j in (0..n).filter(|&j| j != i) {
                for side in Side::both() {
                    let val = integrand.restrict_to_face(j, side.sign()).integrate_reference();
                    if !val.is_zero() && bad.is_none() {
                        bad = Some(format!("v = ξ^{m}, j={}, side {side}: {val}", j + 1));
                    }
                }
            }
        }
        r.push(format!("local interpolation identity {family} n={n} i={}", i + 1), bad.is_none(), bad.unwrap_or_default());
    }
    Ok(r)
}

/// Cubic test functions: `x₁³`, `x₁²x₂`, `x₁x₂x₃` (3D) and a seeded random cubic.
pub fn patch_polynomials(n: usize, seed: u64) -> Vec<(String, Polynomial)> {
    let x = |i: usize| Polynomial::variable(n, i);
    let mut out = vec![("x1^3".to_string(), x(0).pow(3))];
    if n >= 2 {
        out.push(("x1^2 x2".into(), &x(0).pow(2) * &x(1)));
    }
    if n >= 3 {
        out.push(("x1 x2 x3".into(), &(&x(0) * &x(1)) * &x(2)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms = MultiIndex::all_up_to_order(n, 3).into_iter().map(|a| (a, int(rng.gen_range(-5..=5))));
    out.push(("random cubic".into(), Polynomial::from_terms(n, terms).expect("matching dimensions")));
    out
}

/// Meshes of 2, 4 and 8 cells on an anisotropic box.
pub fn patch_meshes(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for cells in [2usize, 4, 8] {
        let mut d = vec![1; n];
        let mut left = cells;
        let mut axis = 0;
        while left > 1 {
            d[axis % n] *= 2;
            left /= 2;
            axis += 1;
        }
        out.push(d);
    }
    out
}

/// Solves with exact boundary DoFs and `f = (−Δ)³u = 0`; the discrete
/// solution must reproduce the cubic in `|·|_{3,h}`.
pub fn verify_patch_test(family: ElementFamily, n: usize, tol: f64) -> Result<VerificationReport> {
    let mut r = VerificationReport::default();
    let domain = BoxDomain::new(vec![0.0; n], (0..n).map(|i| [1.0, 0.75, 1.25][i % 3]).collect())?;
    let opts = StudyOptions { error_q: 6, ..Default::default() };
    for (name, p) in patch_polynomials(n, 7 + n as u64) {
        let case = ManufacturedCase::polynomial(&name, &p, domain.clone());
        let scale = {
            let mesh = Arc::new(uniform_mesh(&domain, &vec![1; n])?);
            let s = FeSpace::new(mesh, family)?;
            super::norms::broken_norms(&s, &vec![0.0; s.num_dofs()], case.solution.as_ref(), 6)[3].max(1.0)
        };
        for div in patch_meshes(n) {
            let mesh = Arc::new(uniform_mesh(&domain, &div)?);
            let cells = mesh.num_cells();
            let err = solve_on_mesh(&case, family, mesh, 0, &opts)?.result.errors[3];
            r.push(
                format!("patch {name} {family} n={n} {cells} cells"),
                err <= tol * scale,
                format!("|u-u_h|_3,h = {err:.2e}"),
            );
        }
    }
    Ok(r)
}

/// Named suites for the command-line driver.
pub fn run_suite(name: &str, dims: &[usize]) -> Result<VerificationReport> {
    let mut r = VerificationReport::default();
    let fams = [ElementFamily::MorleyType, ElementFamily::AdiniType];
    let suite_dims = || dims.iter().copied().filter(|n| (2..=3).contains(n));
    match name {
        "unisolvence" => r.extend(unisolvence_suite(dims)),
        "continuity" => {
            for n in suite_dims() {
                for f in fams {
                    r.extend(verify_weak_continuity(f, n, 100, 42 + n as u64)?);
                }
            }
        }
        "local-interp" => {
            for n in suite_dims() {
                for f in fams {
                    r.extend(verify_local_interpolation_identities(f, n)?);
                }
            }
        }
        "patch" => {
            for n in suite_dims() {
                for f in fams {
                    r.extend(verify_patch_test(f, n, 1e-7)?);
                }
            }
        }
        "all" => {
            for s in ["unisolvence", "continuity", "local-interp", "patch"] {
                r.extend(run_suite(s, dims)?);
            }
        }
        _ => return Err(Error::Config(format!("unknown suite '{name}' (expected unisolvence, continuity, local-interp, patch or all)"))),
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_formatting() {
        let mut r = VerificationReport::default();
        r.push("a", true, "");
        r.push("b", false, "why");
        assert!(!r.passed());
        assert_eq!(r.to_string(), "PASS a\nFAIL b: why\n");
        assert_eq!(r.failures().count(), 1);
    }

    #[test]
    fn unisolvence_small() {
        let r = verify_unisolvence(&ALL_FAMILIES, &[1, 2]);
        assert!(r.passed());
        assert_eq!(r.items.len(), 9);
    }

    #[test]
    fn matching_pairs_vertices_and_face() {
        let e = ReferenceElement::shared(ElementFamily::MorleyType, 2).unwrap();
        let m = matching_across(&e, 0);
        // Two shared vertices with 3 DoFs each, plus the face DoF.
        assert_eq!(m.iter().flatten().count(), 7);
    }

    #[test]
    fn exact_traces_2d() {
        for f in [ElementFamily::MorleyType, ElementFamily::AdiniType] {
            let r = verify_exact_face_traces(f, 2).unwrap();
            assert!(r.passed(), "{r}");
        }
    }

    #[test]
    fn weak_continuity_2d() {
        for f in [ElementFamily::MorleyType, ElementFamily::AdiniType] {
            let r = verify_weak_continuity(f, 2, 5, 3).unwrap();
            assert!(r.passed(), "{r}");
        }
    }

    #[test]
    fn broken_element_fails_continuity() {
        // Q1 has no face-trace structure for second derivatives.
        assert!(verify_weak_continuity(ElementFamily::Q1, 2, 1, 0).is_err());
        assert!(verify_weak_continuity(ElementFamily::AdiniType, 4, 1, 0).is_err());
    }

    #[test]
    fn interpolation_identities_2d() {
        for f in [ElementFamily::MorleyType, ElementFamily::AdiniType] {
            let r = verify_local_interpolation_identities(f, 2).unwrap();
            assert!(r.passed(), "{r}");
        }
    }

    #[test]
    fn patch_mesh_shapes() {
        assert_eq!(patch_meshes(2), vec![vec![2, 1], vec![2, 2], vec![4, 2]]);
        assert_eq!(patch_meshes(3), vec![vec![2, 1, 1], vec![2, 2, 1], vec![2, 2, 2]]);
    }

    #[test]
    fn patch_test_2d() {
        for f in [ElementFamily::MorleyType, ElementFamily::AdiniType] {
            let r = verify_patch_test(f, 2, 1e-7).unwrap();
            assert!(r.passed(), "{r}");
        }
    }

    #[test]
    fn unknown_suite() {
        assert!(matches!(run_suite("bogus", &[2]), Err(Error::Config(_))));
    }
}
