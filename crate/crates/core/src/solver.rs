//! Linear solvers for the reduced symmetric positive definite system.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};

use crate::assembly::CsrMatrix;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverKind {
    /// Sparse Cholesky with a fill-reducing ordering and iterative refinement.
    Direct,
    /// Jacobi-preconditioned conjugate gradients.
    Cg,
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverKind::Direct => "direct",
            SolverKind::Cg => "cg",
        })
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" | "cholesky" => Ok(SolverKind::Direct),
            "cg" | "iterative" => Ok(SolverKind::Cg),
            _ => Err(Error::Config(format!("unknown solver '{s}' (expected direct or cg)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    pub kind: SolverKind,
    /// Relative residual target for CG, and the refinement stopping point.
    pub tol: f64,
    pub max_iter: usize,
    pub refinement_steps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { kind: SolverKind::Direct, tol: 1e-12, max_iter: 20_000, refinement_steps: 3 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub method: SolverKind,
    /// CG iterations, or refinement steps for the direct solver.
    pub iterations: usize,
    /// `‖b − A x‖ / ‖b‖`.
    pub relative_residual: f64,
    pub seconds: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    let ax = a.mul_vec(x);
    b.iter().zip(ax).map(|(bi, ai)| bi - ai).collect()
}

fn relative(r: &[f64], b: &[f64]) -> f64 {
    let nb = norm(b);
    if nb == 0.0 {
        norm(r)
    } else {
        norm(r) / nb
    }
}

pub fn solve(a: &CsrMatrix, b: &[f64], opts: &SolverOptions) -> Result<(Vec<f64>, SolveReport)> {
    match opts.kind {
        SolverKind::Direct => solve_direct(a, b, opts),
        SolverKind::Cg => solve_cg(a, b, opts),
    }
}

/// Sparse Cholesky on the lower triangle, followed by iterative refinement.
pub fn solve_direct(a: &CsrMatrix, b: &[f64], opts: &SolverOptions) -> Result<(Vec<f64>, SolveReport)> {
    let start = Instant::now();
    let n = a.nrows();
    if n == 0 {
        let report = SolveReport { method: SolverKind::Direct, iterations: 0, relative_residual: 0.0, seconds: 0.0 };
        return Ok((Vec::new(), report));
    }
    let triplets: Vec<Triplet<usize, usize, f64>> =
        a.lower_triplets().into_iter().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
    let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| Error::Factorization(format!("{e:?}")))?;
    let llt = mat.sp_cholesky(Side::Lower).map_err(|e| Error::Factorization(format!("{e:?}")))?;

    let solve_rhs = |r: &[f64]| -> Vec<f64> {
        let mut m = Mat::<f64>::from_fn(n, 1, |i, _| r[i]);
        llt.solve_in_place(m.as_mut());
        (0..n).map(|i| m[(i, 0)]).collect()
    };

    let mut x = solve_rhs(b);
    let mut r = residual(a, &x, b);
    let mut rel = relative(&r, b);
    let mut steps = 0;
    while steps < opts.refinement_steps && rel > opts.tol.min(1e-14) {
        let dx = solve_rhs(&r);
        let trial: Vec<f64> = x.iter().zip(&dx).map(|(xi, di)| xi + di).collect();
        let rt = residual(a, &trial, b);
        let relt = relative(&rt, b);
        steps += 1;
        if !(relt < rel) {
            break;
        }
        x = trial;
        r = rt;
        rel = relt;
    }
    if !rel.is_finite() {
        return Err(Error::Factorization("non-finite residual".into()));
    }
    let report = SolveReport {
        method: SolverKind::Direct,
        iterations: steps,
        relative_residual: rel,
        seconds: start.elapsed().as_secs_f64(),
    };
    Ok((x, report))
}

/// Jacobi-preconditioned conjugate gradients from a zero initial guess.
pub fn solve_cg(a: &CsrMatrix, b: &[f64], opts: &SolverOptions) -> Result<(Vec<f64>, SolveReport)> {
    let start = Instant::now();
    let n = a.nrows();
    let inv_diag: Vec<f64> = a.diagonal().iter().map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 }).collect();
    let nb = norm(b);
    let mut x = vec![0.0; n];
    let done = |it: usize, rel: f64, x: Vec<f64>| {
        let report =
            SolveReport { method: SolverKind::Cg, iterations: it, relative_residual: rel, seconds: start.elapsed().as_secs_f64() };
        Ok((x, report))
    };
    if nb == 0.0 {
        return done(0, 0.0, x);
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];
    let mut rel = 1.0;
    for it in 1..=opts.max_iter {
        a.matvec(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 || !pap.is_finite() {
            return Err(Error::NotConverged { iterations: it, residual: rel });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rel = norm(&r) / nb;
        if rel <= opts.tol {
            let true_rel = relative(&residual(a, &x, b), b);
            return done(it, true_rel, x);
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NotConverged { iterations: opts.max_iter, residual: rel })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, n, t)
    }

    #[test]
    fn direct_and_cg_agree() {
        let a = laplacian_1d(50);
        let b: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).sin()).collect();
        let (x1, r1) = solve_direct(&a, &b, &SolverOptions::default()).unwrap();
        let (x2, r2) = solve_cg(&a, &b, &SolverOptions { kind: SolverKind::Cg, ..Default::default() }).unwrap();
        assert!(r1.relative_residual < 1e-13);
        assert!(r2.relative_residual < 1e-11);
        assert!(r2.iterations <= 50);
        for (a, b) in x1.iter().zip(&x2) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn indefinite_matrix_fails_cholesky() {
        let a = CsrMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)]);
        assert!(matches!(solve_direct(&a, &[1.0, 0.0], &SolverOptions::default()), Err(Error::Factorization(_))));
    }

    #[test]
    fn cg_reports_non_convergence() {
        let a = laplacian_1d(200);
        let b = vec![1.0; 200];
        let opts = SolverOptions { kind: SolverKind::Cg, max_iter: 3, ..Default::default() };
        assert!(matches!(solve_cg(&a, &b, &opts), Err(Error::NotConverged { iterations: 3, .. })));
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let a = laplacian_1d(5);
        let (x, _) = solve(&a, &[0.0; 5], &SolverOptions::default()).unwrap();
        assert!(x.iter().all(|&v| v == 0.0));
        assert_eq!("cg".parse::<SolverKind>().unwrap(), SolverKind::Cg);
        assert!("lu".parse::<SolverKind>().is_err());
    }
}
