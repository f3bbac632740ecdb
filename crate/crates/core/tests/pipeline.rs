use std::sync::Arc;

use h3rect::analysis::{case_smooth2d, solve_level, StudyOptions};
use h3rect::assembly::{assemble, AssemblyOptions};
use h3rect::element::ElementFamily;
use h3rect::fespace::FeSpace;
use h3rect::mesh::{lshape_mesh, uniform_mesh, BoxDomain};

#[test]
fn parallel_and_serial_assembly_are_bitwise_equal() {
    let mesh = Arc::new(uniform_mesh(&BoxDomain::unit(3), &[2, 3, 2]).unwrap());
    for family in [ElementFamily::MorleyType, ElementFamily::AdiniType] {
        let space = FeSpace::new(mesh.clone(), family).unwrap();
        let f = |x: &[f64]| x[0].sin() + x[1] * x[2];
        let par = assemble(&space, &f, &AssemblyOptions::default()).unwrap();
        let ser = assemble(&space, &f, &AssemblyOptions { parallel: false, ..Default::default() }).unwrap();
        assert_eq!(par.matrix.dump_coo(), ser.matrix.dump_coo());
        assert_eq!(par.rhs, ser.rhs);
        assert!(par.matrix.max_asymmetry() <= 1e-14 * par.matrix.max_abs());
    }
}

#[test]
fn lshape_space_sizes() {
    let mesh = Arc::new(lshape_mesh(2).unwrap());
    assert_eq!(mesh.num_cells(), 12);
    assert!((mesh.volume() - 3.0).abs() < 1e-14);
    let space = FeSpace::new(mesh, ElementFamily::AdiniType).unwrap();
    // 21 grid vertices, 5 DoFs each.
    assert_eq!(space.num_dofs(), 5 * 21);
    assert_eq!(space.free_dofs().len() + space.boundary_dofs().len(), space.num_dofs());
}

#[test]
fn boundary_values_are_kept_exactly() {
    let case = case_smooth2d();
    let sol = solve_level(&case, ElementFamily::MorleyType, 4, &StudyOptions::default()).unwrap();
    let space = &sol.space;
    let exact = space.interpolate_with(|alpha, x| case.solution.derivative(alpha, x));
    for b in space.boundary_dofs() {
        assert_eq!(sol.coefficients[b], exact[b]);
    }
    assert!(sol.result.solve.relative_residual < 1e-12);
}
