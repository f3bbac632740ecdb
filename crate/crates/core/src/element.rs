//! Reference elements on `[-1,1]^n`: shape spaces, DoF functionals and
//! the nodal (dual) basis.
//!
//! Reference DoFs are ξ-derivatives. A DoF of derivative order `k` along
//! axis `j` relates to its physical counterpart by the factor `h_j^k`;
//! [`crate::fespace`] applies that factor.
//!
//! Local ordering: vertices in lexicographic sign order with axis 0 fastest
//! (vertex `v` has sign `+` on axis `j` iff bit `j` of `v` is set). Each
//! vertex contributes `[value, ∂_1..∂_n, (∂_11..∂_nn)]`; face DoFs follow,
//! ordered `(axis 0 −, axis 0 +, axis 1 −, …)`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact;
use crate::polynomial::{int, rational, MultiIndex, Polynomial, PolynomialF64};
use crate::quadrature::QuadratureRule;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Minus,
    Plus,
}

impl Side {
    pub fn sign(self) -> i64 {
        match self {
            Side::Minus => -1,
            Side::Plus => 1,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Side::Minus => 0,
            Side::Plus => 1,
        }
    }

    pub fn both() -> [Side; 2] {
        [Side::Minus, Side::Plus]
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Minus => "-",
            Side::Plus => "+",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ElementFamily {
    /// `Q_1` with vertex values.
    Q1,
    /// n-rectangle Adini: `Q_1·span{1, ξ_i²}` with vertex values and gradients.
    AdiniClassic,
    /// Partial Adini along one axis: `Q_1·span{1, ξ_i²}` with values and `∂_i`.
    PartialAdini(usize),
    /// `H³`-nonconforming Morley-type element.
    MorleyType,
    /// `H³`-nonconforming Adini-type element.
    AdiniType,
}

impl ElementFamily {
    pub fn name(&self) -> String {
        match self {
            ElementFamily::Q1 => "Q1".into(),
            ElementFamily::AdiniClassic => "AdiniClassic".into(),
            ElementFamily::PartialAdini(i) => format!("PartialAdini({})", i + 1),
            ElementFamily::MorleyType => "MorleyType".into(),
            ElementFamily::AdiniType => "AdiniType".into(),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let ok = n >= 1
            && match self {
                ElementFamily::PartialAdini(i) => *i < n,
                _ => true,
            };
        if ok {
            Ok(())
        } else {
            Err(Error::UnsupportedElement { family: self.name(), dim: n })
        }
    }

    /// Per-vertex DoF count.
    pub fn vertex_dofs(&self, n: usize) -> usize {
        match self {
            ElementFamily::Q1 => 1,
            ElementFamily::AdiniClassic | ElementFamily::MorleyType => 1 + n,
            ElementFamily::PartialAdini(_) => 2,
            ElementFamily::AdiniType => 1 + 2 * n,
        }
    }

    /// Per-face DoF count.
    pub fn face_dofs(&self) -> usize {
        match self {
            ElementFamily::MorleyType => 1,
            _ => 0,
        }
    }
}

impl fmt::Display for ElementFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DofKind {
    PointValue { vertex: usize },
    PointGradient { vertex: usize, axis: usize },
    PointPureSecond { vertex: usize, axis: usize },
    FaceCenterSecondNormal { axis: usize, side: Side },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DofFunctional {
    pub kind: DofKind,
}

impl DofFunctional {
    pub fn new(kind: DofKind) -> Self {
        DofFunctional { kind }
    }

    /// Derivative order; also the power of `h` relating reference and physical values.
    pub fn order(&self) -> u32 {
        match self.kind {
            DofKind::PointValue { .. } => 0,
            DofKind::PointGradient { .. } => 1,
            DofKind::PointPureSecond { .. } | DofKind::FaceCenterSecondNormal { .. } => 2,
        }
    }

    /// Axis the derivative is taken along, if any.
    pub fn axis(&self) -> Option<usize> {
        match self.kind {
            DofKind::PointValue { .. } => None,
            DofKind::PointGradient { axis, .. }
            | DofKind::PointPureSecond { axis, .. }
            | DofKind::FaceCenterSecondNormal { axis, .. } => Some(axis),
        }
    }

    pub fn vertex(&self) -> Option<usize> {
        match self.kind {
            DofKind::PointValue { vertex }
            | DofKind::PointGradient { vertex, .. }
            | DofKind::PointPureSecond { vertex, .. } => Some(vertex),
            DofKind::FaceCenterSecondNormal { .. } => None,
        }
    }

    /// Derivative multi-index of the functional.
    pub fn derivative(&self, n: usize) -> MultiIndex {
        match self.axis() {
            None => MultiIndex::zero(n),
            Some(axis) => MultiIndex::unit(n, axis, self.order()),
        }
    }

    /// Reference point the functional samples at, in integer coordinates.
    pub fn point(&self, n: usize) -> Vec<i64> {
        match self.kind {
            DofKind::FaceCenterSecondNormal { axis, side } => {
                let mut p = vec![0; n];
                p[axis] = side.sign();
                p
            }
            _ => vertex_signs(n, self.vertex().expect("vertex DoF")),
        }
    }

    /// Exact application to a reference polynomial.
    pub fn apply(&self, p: &Polynomial) -> BigRational {
        let n = p.dim();
        p.derivative(&self.derivative(n))
            .evaluate_int(&self.point(n))
            .expect("DoF point has polynomial dimension")
    }
}

impl fmt::Display for DofFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            DofKind::PointValue { vertex } => write!(f, "v(a{})", vertex + 1),
            DofKind::PointGradient { vertex, axis } => write!(f, "d{}v(a{})", axis + 1, vertex + 1),
            DofKind::PointPureSecond { vertex, axis } => {
                write!(f, "d{0}{0}v(a{1})", axis + 1, vertex + 1)
            }
            DofKind::FaceCenterSecondNormal { axis, side } => {
                write!(f, "d{0}{0}v(b{0}{1})", axis + 1, side)
            }
        }
    }
}

/// Sign pattern `(±1, …, ±1)` of reference vertex `v`.
pub fn vertex_signs(n: usize, v: usize) -> Vec<i64> {
    (0..n).map(|j| if (v >> j) & 1 == 1 { 1 } else { -1 }).collect()
}

fn q1_exponents(n: usize) -> Vec<Vec<u32>> {
    (0..1usize << n).map(|v| (0..n).map(|j| ((v >> j) & 1) as u32).collect()).collect()
}

/// Monomial basis of the shape space, duplicate-free and sorted.
pub fn shape_space(family: ElementFamily, n: usize) -> Result<Vec<MultiIndex>> {
    family.validate(n)?;
    let q1 = q1_exponents(n);
    let mut set: BTreeSet<MultiIndex> = q1.iter().cloned().map(MultiIndex::new).collect();
    let enrich = |axis: usize, power: u32, set: &mut BTreeSet<MultiIndex>| {
        for e in &q1 {
            let mut e = e.clone();
            e[axis] += power;
            set.insert(MultiIndex::new(e));
        }
    };
    match family {
        ElementFamily::Q1 => {}
        ElementFamily::PartialAdini(i) => enrich(i, 2, &mut set),
        ElementFamily::AdiniClassic => (0..n).for_each(|i| enrich(i, 2, &mut set)),
        ElementFamily::MorleyType => {
            (0..n).for_each(|i| enrich(i, 2, &mut set));
            for i in 0..n {
                set.insert(MultiIndex::unit(n, i, 4));
                set.insert(MultiIndex::unit(n, i, 5));
            }
        }
        ElementFamily::AdiniType => {
            for i in 0..n {
                enrich(i, 2, &mut set);
                enrich(i, 4, &mut set);
            }
        }
    }
    Ok(set.into_iter().collect())
}

/// Ordered DoF list of the family.
pub fn dof_set(family: ElementFamily, n: usize) -> Result<Vec<DofFunctional>> {
    family.validate(n)?;
    let mut dofs = Vec::new();
    for vertex in 0..1usize << n {
        dofs.push(DofFunctional::new(DofKind::PointValue { vertex }));
        match family {
            ElementFamily::Q1 => {}
            ElementFamily::PartialAdini(axis) => {
                dofs.push(DofFunctional::new(DofKind::PointGradient { vertex, axis }));
            }
            ElementFamily::AdiniClassic | ElementFamily::MorleyType => {
                dofs.extend((0..n).map(|axis| DofFunctional::new(DofKind::PointGradient { vertex, axis })));
            }
            ElementFamily::AdiniType => {
                dofs.extend((0..n).map(|axis| DofFunctional::new(DofKind::PointGradient { vertex, axis })));
                dofs.extend((0..n).map(|axis| DofFunctional::new(DofKind::PointPureSecond { vertex, axis })));
            }
        }
    }
    if family == ElementFamily::MorleyType {
        for axis in 0..n {
            for side in Side::both() {
                dofs.push(DofFunctional::new(DofKind::FaceCenterSecondNormal { axis, side }));
            }
        }
    }
    Ok(dofs)
}

/// Generalized Vandermonde matrix `V[j][m] = dof_j(ξ^{α_m})`.
pub fn dof_matrix(monomials: &[MultiIndex], dofs: &[DofFunctional]) -> Vec<Vec<BigRational>> {
    let polys: Vec<Polynomial> =
        monomials.iter().map(|a| Polynomial::monomial(a.clone(), BigRational::one())).collect();
    dofs.iter().map(|d| polys.iter().map(|p| d.apply(p)).collect()).collect()
}

/// Exact determinant of the DoF–monomial matrix.
pub fn unisolvence_determinant(family: ElementFamily, n: usize) -> Result<BigRational> {
    let monomials = shape_space(family, n)?;
    let dofs = dof_set(family, n)?;
    if monomials.len() != dofs.len() {
        return Ok(BigRational::zero());
    }
    Ok(exact::determinant(&dof_matrix(&monomials, &dofs)))
}

/// Tabulated derivatives of the nodal basis at the points of a rule.
#[derive(Debug)]
pub struct Tabulation {
    num_dofs: usize,
    num_points: usize,
    index: HashMap<MultiIndex, usize>,
    /// Per derivative: `[point][dof]`, row-major.
    values: Vec<Vec<f64>>,
}

impl Tabulation {
    pub fn num_points(&self) -> usize {
        self.num_points
    }

    pub fn num_dofs(&self) -> usize {
        self.num_dofs
    }

    /// Row of `∂^α φ_a(ξ_p)` over all `a`.
    pub fn row(&self, alpha: &MultiIndex, point: usize) -> &[f64] {
        let k = self.index[alpha];
        &self.values[k][point * self.num_dofs..(point + 1) * self.num_dofs]
    }

    pub fn matrix(&self, alpha: &MultiIndex) -> &[f64] {
        &self.values[self.index[alpha]]
    }
}

/// A finite element on the reference cube with its exact nodal basis.
#[derive(Debug)]
pub struct ReferenceElement {
    dim: usize,
    family: ElementFamily,
    monomials: Vec<MultiIndex>,
    dofs: Vec<DofFunctional>,
    basis: Vec<Polynomial>,
    deriv_index: HashMap<MultiIndex, usize>,
    derivs: Vec<(MultiIndex, Vec<PolynomialF64>)>,
    tabulations: Mutex<HashMap<usize, Arc<Tabulation>>>,
}

impl ReferenceElement {
    /// Inverts the DoF matrix exactly and stores the dual basis.
    pub fn build(family: ElementFamily, n: usize) -> Result<Self> {
        let monomials = shape_space(family, n)?;
        let dofs = dof_set(family, n)?;
        let singular = || Error::SingularDofMatrix { family: family.name(), dim: n };
        if monomials.len() != dofs.len() {
            return Err(singular());
        }
        let v = dof_matrix(&monomials, &dofs);
        let inv = exact::inverse(&v).ok_or_else(singular)?;
        let basis: Vec<Polynomial> = (0..dofs.len())
            .map(|i| {
                Polynomial::from_terms(
                    n,
                    monomials.iter().enumerate().map(|(m, a)| (a.clone(), inv[m][i].clone())),
                )
                .expect("monomials have element dimension")
            })
            .collect();
        let mut deriv_index = HashMap::new();
        let mut derivs = Vec::new();
        for alpha in MultiIndex::all_up_to_order(n, 3) {
            let polys = basis.iter().map(|p| p.derivative(&alpha).to_f64()).collect();
            deriv_index.insert(alpha.clone(), derivs.len());
            derivs.push((alpha, polys));
        }
        Ok(ReferenceElement {
            dim: n,
            family,
            monomials,
            dofs,
            basis,
            deriv_index,
            derivs,
            tabulations: Mutex::new(HashMap::new()),
        })
    }

    /// Process-wide shared instance; each `(family, n)` is built once.
    pub fn shared(family: ElementFamily, n: usize) -> Result<Arc<Self>> {
        static CACHE: OnceLock<Mutex<HashMap<(ElementFamily, usize), Arc<ReferenceElement>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(e) = cache.lock().expect("element cache").get(&(family, n)) {
            return Ok(Arc::clone(e));
        }
        let e = Arc::new(ReferenceElement::build(family, n)?);
        cache.lock().expect("element cache").insert((family, n), Arc::clone(&e));
        Ok(e)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn family(&self) -> ElementFamily {
        self.family
    }

    pub fn monomials(&self) -> &[MultiIndex] {
        &self.monomials
    }

    pub fn dofs(&self) -> &[DofFunctional] {
        &self.dofs
    }

    pub fn basis(&self) -> &[Polynomial] {
        &self.basis
    }

    pub fn num_dofs(&self) -> usize {
        self.dofs.len()
    }

    /// Largest per-variable exponent in the shape space.
    pub fn max_partial_degree(&self) -> u32 {
        self.monomials.iter().map(MultiIndex::max_exponent).max().unwrap_or(0)
    }

    /// Points per axis a Gauss rule needs to integrate products of two
    /// shape functions exactly.
    pub fn required_quadrature(&self) -> usize {
        self.max_partial_degree() as usize + 1
    }

    /// Whether `p` lies in the span of the shape-space monomials.
    pub fn contains(&self, p: &Polynomial) -> bool {
        let span: BTreeSet<&MultiIndex> = self.monomials.iter().collect();
        p.terms().all(|(a, _)| span.contains(a))
    }

    /// Exact canonical interpolation `Σ_i dof_i(p) φ_i` on the reference cell.
    pub fn interpolate(&self, p: &Polynomial) -> Polynomial {
        self.dofs
            .iter()
            .zip(&self.basis)
            .fold(Polynomial::zero(self.dim), |acc, (d, phi)| &acc + &phi.scale(&d.apply(p)))
    }

    /// Floating `∂^α φ_i` evaluators for `|α| <= 3`.
    pub fn derivative_basis(&self, alpha: &MultiIndex) -> Result<&[PolynomialF64]> {
        if alpha.order() > 3 {
            return Err(Error::DerivativeOrder(alpha.order()));
        }
        let k = self.deriv_index.get(alpha).ok_or(Error::DimensionMismatch {
            expected: self.dim,
            found: alpha.dim(),
        })?;
        Ok(&self.derivs[*k].1)
    }

    /// `[points × dofs]` matrix of `∂^α φ_i` at reference points.
    pub fn eval_shape(&self, alpha: &MultiIndex, points: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let polys = self.derivative_basis(alpha)?;
        points
            .iter()
            .map(|p| {
                if p.len() != self.dim {
                    return Err(Error::DimensionMismatch { expected: self.dim, found: p.len() });
                }
                Ok(polys.iter().map(|f| f.eval(p)).collect())
            })
            .collect()
    }

    /// Every derivative of order `<= 3` tabulated at the points of `rule`,
    /// cached per points-per-axis.
    pub fn tabulate(&self, rule: &QuadratureRule) -> Arc<Tabulation> {
        assert_eq!(rule.dim(), self.dim);
        let key = rule.points_per_axis();
        if let Some(t) = self.tabulations.lock().expect("tabulation cache").get(&key) {
            return Arc::clone(t);
        }
        let nd = self.num_dofs();
        let values = self
            .derivs
            .iter()
            .map(|(_, polys)| {
                let mut m = Vec::with_capacity(rule.len() * nd);
                for p in rule.points() {
                    m.extend(polys.iter().map(|f| f.eval(p)));
                }
                m
            })
            .collect();
        let tab = Arc::new(Tabulation {
            num_dofs: nd,
            num_points: rule.len(),
            index: self.deriv_index.clone(),
            values,
        });
        self.tabulations.lock().expect("tabulation cache").insert(key, Arc::clone(&tab));
        tab
    }
}

/// Closed-form Morley-type basis with unit half-lengths, ordered like
/// [`dof_set`]: per vertex `[p_0i, p_1i..p_ni]`, then `r_k^∓`.
pub fn morley_closed_form(n: usize) -> Result<Vec<Polynomial>> {
    if n < 2 {
        return Err(Error::UnsupportedElement { family: ElementFamily::MorleyType.name(), dim: n });
    }
    let one = Polynomial::one(n);
    let xi = |k: usize| Polynomial::variable(n, k);
    let bump = |k: usize| &xi(k).pow(2) - &one; // ξ_k² − 1
    let two_n = 1i64 << n;
    let mut out = Vec::new();
    for v in 0..1usize << n {
        let s = vertex_signs(n, v);
        let lin = |k: usize| &one + &xi(k).scale(&int(s[k])); // 1 + ξ_ik ξ_k
        let prod = (0..n).fold(one.clone(), |acc, k| &acc * &lin(k));

        let mut bracket = Polynomial::constant(n, int(2));
        for k in 0..n {
            bracket = &bracket + &(&xi(k).scale(&int(s[k])) - &xi(k).pow(2));
        }
        let mut p0 = (&bracket * &prod).scale(&rational(1, 2 * two_n));
        for k in 0..n {
            let t = (&xi(k).scale(&int(s[k])) * &bump(k).pow(2)).scale(&rational(3, 8 * two_n));
            p0 = &p0 + &t;
        }
        out.push(p0);

        for j in 0..n {
            let a = (&bump(j) * &prod).scale(&rational(s[j], 2 * two_n));
            let b = &(&Polynomial::constant(n, int(s[j])) + &xi(j).scale(&int(3))) * &bump(j).pow(2);
            out.push(&a - &b.scale(&rational(1, 8 * two_n)));
        }
    }
    for k in 0..n {
        for side in Side::both() {
            let s = side.sign();
            // ±(1/16)(ξ_k+1)²(ξ_k−1)²(ξ_k ± 1)
            let p = &bump(k).pow(2) * &(&xi(k) + &Polynomial::constant(n, int(s)));
            out.push(p.scale(&rational(s, 16)));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FAMILIES: [ElementFamily; 4] = [
        ElementFamily::Q1,
        ElementFamily::AdiniClassic,
        ElementFamily::MorleyType,
        ElementFamily::AdiniType,
    ];

    #[test]
    fn shape_space_sizes() {
        for n in 1..=4 {
            assert_eq!(shape_space(ElementFamily::AdiniType, n).unwrap().len(), (1 << n) * (2 * n + 1));
            assert_eq!(shape_space(ElementFamily::MorleyType, n).unwrap().len(), (n + 1) * (1 << n) + 2 * n);
            assert_eq!(shape_space(ElementFamily::AdiniClassic, n).unwrap().len(), (n + 1) << n);
            assert_eq!(shape_space(ElementFamily::PartialAdini(0), n).unwrap().len(), 2 << n);
        }
        let q1 = shape_space(ElementFamily::Q1, 3).unwrap();
        assert_eq!(q1.len(), 8);
        assert!(q1.iter().all(|a| a.max_exponent() <= 1));
        assert!(shape_space(ElementFamily::PartialAdini(2), 2).is_err());
        assert!(shape_space(ElementFamily::Q1, 0).is_err());
    }

    #[test]
    fn dof_counts() {
        let m2 = dof_set(ElementFamily::MorleyType, 2).unwrap();
        assert_eq!(m2.len(), 16);
        assert_eq!(m2.iter().filter(|d| matches!(d.kind, DofKind::FaceCenterSecondNormal { .. })).count(), 4);
        assert_eq!(dof_set(ElementFamily::AdiniType, 3).unwrap().len(), 56);
        assert_eq!(dof_set(ElementFamily::Q1, 2).unwrap().len(), 4);
        for d in &m2 {
            assert_eq!(d.order(), d.derivative(2).order());
        }
    }

    #[test]
    fn dual_basis_is_kronecker() {
        for n in 1..=3 {
            for fam in FAMILIES.iter().copied().chain((0..n).map(ElementFamily::PartialAdini)) {
                let e = ReferenceElement::build(fam, n).unwrap();
                for (i, phi) in e.basis().iter().enumerate() {
                    for (j, d) in e.dofs().iter().enumerate() {
                        let expect = if i == j { int(1) } else { int(0) };
                        assert_eq!(d.apply(phi), expect, "{fam} n={n} dof {d} basis {i}");
                    }
                }
            }
        }
    }

    #[test]
    fn q1_dual_basis_matches_product_formula() {
        for n in 2..=3 {
            let e = ReferenceElement::build(ElementFamily::Q1, n).unwrap();
            for v in 0..1usize << n {
                let s = vertex_signs(n, v);
                let mut p = Polynomial::constant(n, rational(1, 1 << n));
                for (j, &sj) in s.iter().enumerate() {
                    p = &p * &(&Polynomial::one(n) + &Polynomial::variable(n, j).scale(&int(sj)));
                }
                assert_eq!(e.basis()[v], p);
            }
        }
    }

    #[test]
    fn morley_closed_form_equals_dual_basis() {
        for n in 2..=3 {
            let e = ReferenceElement::build(ElementFamily::MorleyType, n).unwrap();
            let closed = morley_closed_form(n).unwrap();
            assert_eq!(closed.len(), e.num_dofs());
            for (i, (a, b)) in closed.iter().zip(e.basis()).enumerate() {
                assert_eq!(a, b, "n={n} basis {i} ({})", e.dofs()[i]);
            }
            let value_sum = (0..1usize << n)
                .map(|v| &closed[v * (n + 1)])
                .fold(Polynomial::zero(n), |acc, p| &acc + p);
            assert_eq!(value_sum, Polynomial::one(n));
        }
        assert!(morley_closed_form(1).is_err());
    }

    #[test]
    fn p3_reproduction() {
        for n in 1..=3 {
            for fam in [ElementFamily::MorleyType, ElementFamily::AdiniType] {
                let e = ReferenceElement::build(fam, n).unwrap();
                for alpha in MultiIndex::all_up_to_order(n, 3) {
                    let m = Polynomial::monomial(alpha, BigRational::one());
                    assert!(e.contains(&m));
                    assert_eq!(e.interpolate(&m), m);
                }
            }
        }
    }

    #[test]
    fn morley_minus_adini_interpolant_is_face_bubbles() {
        for n in 2..=3 {
            let morley = ReferenceElement::build(ElementFamily::MorleyType, n).unwrap();
            let adini = ReferenceElement::build(ElementFamily::AdiniClassic, n).unwrap();
            let closed = morley_closed_form(n).unwrap();
            let bubbles = &closed[(n + 1) << n..];
            for v in morley.basis() {
                let residual = v - &adini.interpolate(v);
                // Coefficients against r_k^± come from the face DoFs of the residual.
                let face_dofs = &morley.dofs()[(n + 1) << n..];
                let recon = face_dofs
                    .iter()
                    .zip(bubbles)
                    .fold(Polynomial::zero(n), |acc, (d, r)| &acc + &r.scale(&d.apply(&residual)));
                assert_eq!(residual, recon);
            }
        }
    }

    #[test]
    fn adini_type_traces_depend_only_on_face_dofs() {
        for n in 2..=3 {
            let e = ReferenceElement::build(ElementFamily::AdiniType, n).unwrap();
            for axis in 0..n {
                for side in Side::both() {
                    for (phi, d) in e.basis().iter().zip(e.dofs()) {
                        let v = d.vertex().unwrap();
                        if vertex_signs(n, v)[axis] != side.sign() {
                            assert!(phi.restrict_to_face(axis, side.sign()).is_zero());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn eval_shape_checks() {
        let e = ReferenceElement::build(ElementFamily::MorleyType, 2).unwrap();
        let verts: Vec<Vec<f64>> =
            (0..4).map(|v| vertex_signs(2, v).iter().map(|&s| s as f64).collect()).collect();
        let vals = e.eval_shape(&MultiIndex::zero(2), &verts).unwrap();
        for (v, row) in vals.iter().enumerate() {
            for (a, &x) in row.iter().enumerate() {
                if matches!(e.dofs()[a].kind, DofKind::PointValue { .. }) {
                    let expect = if e.dofs()[a].vertex() == Some(v) { 1.0 } else { 0.0 };
                    assert!((x - expect).abs() < 1e-14);
                }
            }
        }
        // ∂³/∂ξ₁³ of r₁⁺ at ξ₁ = 0 is −3/4.
        let r1p = e.dofs().iter().position(|d| {
            d.kind == DofKind::FaceCenterSecondNormal { axis: 0, side: Side::Plus }
        });
        let d3 = e.eval_shape(&MultiIndex::new(vec![3, 0]), &[vec![0.0, 0.3]]).unwrap();
        assert!((d3[0][r1p.unwrap()] + 0.75).abs() < 1e-14);
        assert!(matches!(e.eval_shape(&MultiIndex::new(vec![4, 0]), &verts), Err(Error::DerivativeOrder(4))));

        let q1 = ReferenceElement::build(ElementFamily::Q1, 2).unwrap();
        let z = q1.eval_shape(&MultiIndex::new(vec![3, 0]), &verts).unwrap();
        assert!(z.iter().flatten().all(|&x| x == 0.0));
    }
}
