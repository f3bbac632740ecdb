use h3rect::assembly::CsrMatrix;
use h3rect::solver::{solve, solve_cg, solve_direct, SolverKind, SolverOptions};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_spd(n: usize, seed: u64) -> CsrMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Sparse B with A = B Bᵀ + I.
    let mut b = vec![vec![0.0; n]; n];
    for row in b.iter_mut() {
        for _ in 0..3 {
            row[rng.gen_range(0..n)] = rng.gen_range(-1.0..1.0);
        }
    }
    let mut t = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let mut v: f64 = (0..n).map(|k| b[i][k] * b[j][k]).sum();
            if i == j {
                v += 1.0;
            }
            if v != 0.0 {
                t.push((i, j, v));
            }
        }
    }
    CsrMatrix::from_triplets(n, n, t)
}

#[test]
fn one_by_one() {
    let a = CsrMatrix::from_triplets(1, 1, vec![(0, 0, 4.0)]);
    for kind in [SolverKind::Direct, SolverKind::Cg] {
        let (x, _) = solve(&a, &[2.0], &SolverOptions { kind, ..Default::default() }).unwrap();
        assert!((x[0] - 0.5).abs() < 1e-15);
    }
}

#[test]
fn identity_takes_one_cg_iteration() {
    let a = CsrMatrix::from_triplets(10, 10, (0..10).map(|i| (i, i, 1.0)).collect());
    let b: Vec<f64> = (0..10).map(|i| i as f64 - 3.0).collect();
    let (x, rep) = solve_cg(&a, &b, &SolverOptions { kind: SolverKind::Cg, ..Default::default() }).unwrap();
    assert_eq!(rep.iterations, 1);
    assert_eq!(x, b);
}

#[test]
fn empty_system() {
    let a = CsrMatrix::from_triplets(0, 0, vec![]);
    let (x, _) = solve_direct(&a, &[], &SolverOptions::default()).unwrap();
    assert!(x.is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn random_spd_50(seed in any::<u64>()) {
        let n = 50;
        let a = random_spd(n, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 7);
        let x_true: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b = a.mul_vec(&x_true);
        let (xd, rd) = solve_direct(&a, &b, &SolverOptions::default()).unwrap();
        prop_assert!(rd.relative_residual < 1e-12);
        let (xc, _) = solve_cg(&a, &b, &SolverOptions { kind: SolverKind::Cg, tol: 1e-13, ..Default::default() }).unwrap();
        for i in 0..n {
            prop_assert!((xd[i] - x_true[i]).abs() < 1e-9);
            prop_assert!((xc[i] - x_true[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn permutation_invariance(seed in any::<u64>()) {
        let n = 30;
        let a = random_spd(n, seed);
        let mut perm: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..n).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let b: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
        let pa = a.permute_symmetric(&perm);
        let mut pb = vec![0.0; n];
        for (i, &p) in perm.iter().enumerate() {
            pb[p] = b[i];
        }
        let (x, _) = solve_direct(&a, &b, &SolverOptions::default()).unwrap();
        let (px, _) = solve_direct(&pa, &pb, &SolverOptions::default()).unwrap();
        for (i, &p) in perm.iter().enumerate() {
            prop_assert!((px[p] - x[i]).abs() < 1e-10 * (1.0 + x[i].abs()));
        }
    }
}
