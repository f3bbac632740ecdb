//! Single solves and convergence studies over a sequence of meshes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use super::cases::{CaseDomain, ManufacturedCase};
use super::interpolation::canonical_interpolate;
use super::norms::{broken_norms, broken_norms_refined, CornerRefinement};
use crate::assembly::{apply_dirichlet, assemble, AssemblyOptions};
use crate::element::ElementFamily;
use crate::error::{Error, Result};
use crate::fespace::FeSpace;
use crate::mesh::StructuredMesh;
use crate::solver::{solve, SolveReport, SolverOptions};

#[derive(Clone, Debug, PartialEq)]
pub struct StudyOptions {
    pub assembly: AssemblyOptions,
    pub solver: SolverOptions,
    /// Gauss points per axis for the error norms.
    pub error_q: usize,
    /// Graded error quadrature on cells touching the L-shape re-entrant corner.
    pub corner_levels: usize,
}

impl Default for StudyOptions {
    fn default() -> Self {
        StudyOptions { assembly: AssemblyOptions::default(), solver: SolverOptions::default(), error_q: 8, corner_levels: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct LevelResult {
    pub n: usize,
    pub h: f64,
    pub num_dofs: usize,
    pub num_free: usize,
    /// `‖e‖₀, |e|_{1,h}, |e|_{2,h}, |e|_{3,h}`.
    pub errors: [f64; 4],
    pub solve: SolveReport,
}

/// Discrete solution of one level together with its errors.
pub struct LevelSolution {
    pub space: FeSpace,
    pub coefficients: Vec<f64>,
    pub result: LevelResult,
}

/// Assembles, imposes the exact boundary DoFs, solves and measures the error.
pub fn solve_level(case: &ManufacturedCase, family: ElementFamily, n: usize, opts: &StudyOptions) -> Result<LevelSolution> {
    solve_on_mesh(case, family, Arc::new(case.mesh(n)?), n, opts)
}

/// [`solve_level`] on a given mesh; `n` is only recorded in the result.
pub fn solve_on_mesh(
    case: &ManufacturedCase,
    family: ElementFamily,
    mesh: Arc<StructuredMesh>,
    n: usize,
    opts: &StudyOptions,
) -> Result<LevelSolution> {
    let h = 2.0 * mesh.max_half_length();
    let space = FeSpace::new(mesh, family)?;
    let u = case.solution.as_ref();
    let system = assemble(&space, &|x| u.source(x), &opts.assembly)?;
    let exact = canonical_interpolate(&space, u)?;
    let boundary = space.boundary_dofs();
    let values: BTreeMap<usize, f64> = boundary.iter().map(|&b| (b, exact[b])).collect();
    let reduced = apply_dirichlet(&system, &boundary, &values)?;
    let (x, report) = solve(&reduced.matrix, &reduced.rhs, &opts.solver)?;
    let coefficients = reduced.reconstruct(&x);
    let errors = match (&case.domain, opts.corner_levels) {
        (CaseDomain::LShape, levels) if levels > 0 => {
            let refine = CornerRefinement { point: vec![0.0, 0.0], levels };
            broken_norms_refined(&space, &coefficients, u, opts.error_q, &refine)
        }
        _ => broken_norms(&space, &coefficients, u, opts.error_q),
    };
    let result = LevelResult {
        n,
        h,
        num_dofs: space.num_dofs(),
        num_free: reduced.len(),
        errors,
        solve: report,
    };
    Ok(LevelSolution { space, coefficients, result })
}

#[derive(Clone, Debug)]
pub struct ErrorReport {
    pub case: String,
    pub family: ElementFamily,
    pub levels: Vec<LevelResult>,
}

impl ErrorReport {
    /// `log₂(e(N)/e(2N))` per norm, `None` on the first level.
    pub fn orders(&self) -> Vec<Option<[f64; 4]>> {
        let mut out = vec![None];
        for w in self.levels.windows(2) {
            let ratio = w[0].h / w[1].h;
            let mut o = [0.0; 4];
            for k in 0..4 {
                o[k] = (w[0].errors[k] / w[1].errors[k]).ln() / ratio.ln();
            }
            out.push(Some(o));
        }
        out.truncate(self.levels.len());
        out
    }

    /// Orders between the last two levels.
    pub fn final_orders(&self) -> Option<[f64; 4]> {
        self.orders().last().copied().flatten()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("N,h,e0,order0,e1,order1,e2,order2,e3,order3\n");
        for (lvl, ord) in self.levels.iter().zip(self.orders()) {
            let _ = write!(s, "{},{}", lvl.n, sci(lvl.h));
            for k in 0..4 {
                let o = ord.map(|o| format!("{:.2}", o[k])).unwrap_or_default();
                let _ = write!(s, ",{},{}", sci(lvl.errors[k]), o);
            }
            s.push('\n');
        }
        s
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "| N | ‖u−u_h‖₀ | order | \\|u−u_h\\|₁,h | order | \\|u−u_h\\|₂,h | order | \\|u−u_h\\|₃,h | order |");
        s.push_str("|---|---|---|---|---|---|---|---|---|\n");
        for (lvl, ord) in self.levels.iter().zip(self.orders()) {
            let _ = write!(s, "| {} ", lvl.n);
            for k in 0..4 {
                let o = ord.map(|o| format!("{:.2}", o[k])).unwrap_or_else(|| "-".into());
                let _ = write!(s, "| {} | {} ", sci(lvl.errors[k]), o);
            }
            s.push_str("|\n");
        }
        s
    }
}

/// C-style `%.6e`: six fractional digits and a signed two-digit exponent.
pub fn sci(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let s = format!("{v:.6e}");
    let (mant, exp) = s.split_once('e').expect("exponent present");
    let e: i32 = exp.parse().expect("integer exponent");
    format!("{mant}e{}{:02}", if e < 0 { '-' } else { '+' }, e.abs())
}

/// Levels must number at least two and double each time.
pub fn validate_levels(levels: &[usize]) -> Result<()> {
    if levels.len() < 2 {
        return Err(Error::Config("a convergence study needs at least two levels".into()));
    }
    if levels[0] == 0 {
        return Err(Error::Config("levels must be positive".into()));
    }
    for w in levels.windows(2) {
        if w[1] != 2 * w[0] {
            return Err(Error::Config(format!("levels must double: {} is followed by {}", w[0], w[1])));
        }
    }
    Ok(())
}

pub fn convergence_study(
    case: &ManufacturedCase,
    family: ElementFamily,
    levels: &[usize],
    opts: &StudyOptions,
) -> Result<ErrorReport> {
    convergence_study_with(case, family, levels, opts, |_| {})
}

/// Like [`convergence_study`], calling `progress` after each level.
pub fn convergence_study_with(
    case: &ManufacturedCase,
    family: ElementFamily,
    levels: &[usize],
    opts: &StudyOptions,
    mut progress: impl FnMut(&LevelResult),
) -> Result<ErrorReport> {
    validate_levels(levels)?;
    family.validate(case.dim())?;
    let mut out = Vec::with_capacity(levels.len());
    for &n in levels {
        let lvl = solve_level(case, family, n, opts).map_err(|e| Error::Level { level: n, source: Box::new(e) })?;
        progress(&lvl.result);
        out.push(lvl.result);
    }
    Ok(ErrorReport { case: case.name.clone(), family, levels: out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::cases::case_smooth2d;

    #[test]
    fn c_style_scientific() {
        assert_eq!(sci(0.1142), "1.142000e-01");
        assert_eq!(sci(143.6), "1.436000e+02");
        assert_eq!(sci(0.0), "0.000000e+00");
        assert_eq!(sci(-2.5e-10), "-2.500000e-10");
    }

    #[test]
    fn level_validation() {
        assert!(validate_levels(&[4]).is_err());
        assert!(validate_levels(&[4, 12]).is_err());
        assert!(validate_levels(&[0, 0]).is_err());
        assert!(validate_levels(&[2, 4, 8]).is_ok());
    }

    #[test]
    fn small_study_layout() {
        let r = convergence_study(&case_smooth2d(), ElementFamily::AdiniType, &[4, 8], &StudyOptions::default()).unwrap();
        let csv = r.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1].split(',').count(), 10);
        assert!(lines[1].ends_with(','));
        assert!(r.to_markdown().lines().count() == 4);
        assert!(r.final_orders().is_some());
        assert!(r.levels[1].errors[3] < r.levels[0].errors[3]);
    }
}
