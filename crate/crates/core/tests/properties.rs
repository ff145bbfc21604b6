use proptest::prelude::*;
use spectral_bounds::covering::{greedy_packing, min_separation, overlap_bound};
use spectral_bounds::eigen::{count_below, solve_lowest};
use spectral_bounds::fem::rayleigh_quotient;
use spectral_bounds::oracle::{disk_spectrum, rectangle_spectrum};
use spectral_bounds::{
    assemble, generate_domain, invariants, refine, triangulate, BoundaryCondition, DomainSpec,
    TriMesh,
};

const TOL: f64 = 1e-9;

fn shape() -> impl Strategy<Value = DomainSpec> {
    prop_oneof![
        (0.5..2.0f64, 0.5..2.0f64).prop_map(|(a, b)| DomainSpec::rectangle(a, b)),
        (3usize..9, 0.5..1.2f64).prop_map(|(n, r)| DomainSpec::regular_polygon(n, r)),
        (0.4..1.0f64).prop_map(DomainSpec::disk),
    ]
}

fn lowest(mesh: &TriMesh, bc: BoundaryCondition, k: usize) -> Vec<f64> {
    solve_lowest(&assemble(mesh, bc).unwrap(), k, TOL)
        .unwrap()
        .eigenvalues
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn galerkin_values_scale_as_inverse_square(spec in shape(), t in 0.3..4.0f64) {
        let d = generate_domain(&spec).unwrap();
        let m = triangulate(&d, 0.15).unwrap();
        for bc in [BoundaryCondition::Neumann, BoundaryCondition::Dirichlet] {
            let a = lowest(&m, bc, 6);
            let b = lowest(&m.scaled(t), bc, 6);
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((y * t * t - x).abs() <= 1e-7 * x.abs().max(1.0), "{x} vs {y}");
            }
        }
    }

    #[test]
    fn neumann_below_dirichlet_on_one_mesh(spec in shape()) {
        let d = generate_domain(&spec).unwrap();
        let m = triangulate(&d, 0.12).unwrap();
        let n = lowest(&m, BoundaryCondition::Neumann, 8);
        let di = lowest(&m, BoundaryCondition::Dirichlet, 8);
        prop_assert!(n[0].abs() < 1e-8);
        for k in 0..8 {
            prop_assert!(n[k] <= di[k] * (1.0 + 1e-9));
        }
    }

    #[test]
    fn refinement_lowers_galerkin_values(spec in shape()) {
        let d = generate_domain(&spec).unwrap();
        let m = triangulate(&d, 0.2).unwrap();
        let coarse = lowest(&m, BoundaryCondition::Dirichlet, 5);
        let fine = lowest(&refine(&m), BoundaryCondition::Dirichlet, 5);
        for (c, f) in coarse.iter().zip(&fine) {
            prop_assert!(f <= &(c * (1.0 + 1e-9)));
        }
    }

    #[test]
    fn rayleigh_quotient_dominates_first_value(seed in any::<u64>()) {
        let d = generate_domain(&DomainSpec::rectangle(1.3, 0.8)).unwrap();
        let m = triangulate(&d, 0.15).unwrap();
        let p = assemble(&m, BoundaryCondition::Dirichlet).unwrap();
        let first = solve_lowest(&p, 1, TOL).unwrap().eigenvalues[0];
        let mut x = seed | 1;
        let u: Vec<f64> = (0..p.dim())
            .map(|_| {
                x ^= x << 13;
                x ^= x >> 7;
                x ^= x << 17;
                (x % 2001) as f64 / 1000.0 - 1.0
            })
            .collect();
        prop_assert!(rayleigh_quotient(&p, &u).unwrap() >= first * (1.0 - 1e-9));
    }

    #[test]
    fn dirichlet_oracle_decreases_under_inclusion(
        a in 0.3..2.0f64, b in 0.3..2.0f64, da in 0.0..1.0f64, db in 0.0..1.0f64,
    ) {
        let small = rectangle_spectrum(a, b, BoundaryCondition::Dirichlet, 15);
        let large = rectangle_spectrum(a + da, b + db, BoundaryCondition::Dirichlet, 15);
        for (s, l) in small.iter().zip(&large) {
            prop_assert!(l <= s);
        }
        let inner = disk_spectrum(a.min(b) / 2.0, BoundaryCondition::Dirichlet, 6);
        let outer = rectangle_spectrum(a, b, BoundaryCondition::Dirichlet, 6);
        for (i, o) in inner.iter().zip(&outer) {
            prop_assert!(o <= &(i * (1.0 + 1e-9)));
        }
    }

    #[test]
    fn counting_function_is_monotone(a in 0.5..2.0f64, l1 in 0.0..400.0f64, dl in 0.0..400.0f64) {
        let v = rectangle_spectrum(a, 1.0, BoundaryCondition::Neumann, 60);
        prop_assert!(count_below(&v, l1) <= count_below(&v, l1 + dl));
    }

    #[test]
    fn packing_is_separated_covering_and_bounded(spec in shape(), rho in 0.08..0.5f64) {
        let d = generate_domain(&spec).unwrap();
        let p = greedy_packing(&d, rho).unwrap();
        prop_assert_eq!(p.cardinality, p.centers.len());
        prop_assert!(p.centers.iter().all(|&c| d.contains(c) || d.signed_distance(c).abs() < 1e-9));
        prop_assert!(min_separation(&p.centers) >= rho * (1.0 - 1e-12));
        prop_assert!(p.covering_distance <= rho * (1.0 + 1e-12));
        prop_assert!(p.overlap_max as f64 <= overlap_bound(2, 0.0, rho));
    }

    #[test]
    fn mesh_invariants(spec in shape(), h in 0.05..0.3f64) {
        let d = generate_domain(&spec).unwrap();
        let m = triangulate(&d, h).unwrap();
        m.validate().unwrap();
        prop_assert!((m.area() - d.area()).abs() <= 0.02 * d.area());
        let r = refine(&m);
        r.validate().unwrap();
        prop_assert_eq!(r.triangles.len(), 4 * m.triangles.len());
        let back = TriMesh::from_text(&m.to_text()).unwrap();
        prop_assert_eq!(&back.triangles, &m.triangles);
        prop_assert!(back.vertices.iter().zip(&m.vertices).all(|(a, b)| a.dist(*b) < 1e-12));
    }

    #[test]
    fn invariant_chain(spec in shape()) {
        let d = generate_domain(&spec).unwrap();
        let inv = invariants(&d, 0.02).unwrap();
        prop_assert!(inv.chain_holds(0.03));
        prop_assert!(inv.convex);
        prop_assert!((inv.vol - d.area()).abs() < 1e-9 * d.area());
    }
}
