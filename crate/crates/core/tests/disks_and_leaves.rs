use num_complex::Complex64;
use proptest::prelude::*;

use jleg::acs::builtin;
use jleg::contact::lift_vector;
use jleg::foliation::{Foliation, FoliationConfig, LeafParams};
use jleg::lift::tangent_plane;
use jleg::psi::{psi, psi_invert};
use jleg::solver::picard_solve;
use jleg::{ACSField, Coeffs, HVec, PlaneChart, Point5, SolverConfig, Vec5};

fn small_cfg() -> SolverConfig {
    SolverConfig { n: 17, ..SolverConfig::default() }
}

fn horizontal(v: [f64; 4]) -> Vec5 {
    Vec5::new(v[0], v[1], v[2], v[3], 0.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn constant_fields_give_flat_disks(
        sigma in -0.5f64..0.5, beta in -0.5f64..0.5, gamma in 0.7f64..1.5, delta in -0.5f64..0.5,
        w in prop::array::uniform2(-0.4f64..0.4), p in prop::array::uniform5(-0.3f64..0.3),
    ) {
        let acs = ACSField::constant(Coeffs { sigma, beta, gamma, delta });
        let p = Point5::new(p[0], p[1], p[2], p[3], p[4]);
        let sol = picard_solve(&p, &PlaneChart::new(Complex64::new(w[0], w[1])), &acs, &small_cfg()).unwrap();
        prop_assert!(sol.f.sup() <= 1e-12);
        prop_assert!(sol.iterations <= 2);
    }

    // The crossing sign depends only on the oriented complex lines and the
    // co-orientation of the leaf parameter, not on the bases chosen.
    #[test]
    fn crossing_sign_is_basis_independent(
        e in prop::array::uniform4(-1.0f64..1.0), f in prop::array::uniform4(-1.0f64..1.0),
        ds in prop::array::uniform5(-1.0f64..1.0), phi in 0.0f64..6.28, psi_ in 0.0f64..6.28,
        scale in prop_oneof![-3.0f64..-0.1, 0.1f64..3.0], mix in prop::array::uniform2(-1.0f64..1.0),
    ) {
        let fol = Foliation::new(builtin::perturbed(0.05, 2, Coeffs::STANDARD), FoliationConfig::default()).unwrap();
        let point = Point5::new(0.1, -0.05, 0.2, 0.1, 0.05);
        let params = fol.cfg.solver.params();
        let j = fol.acs.j_matrix(&point).unwrap().0;
        let (e, f) = (HVec::from(e), HVec::from(f));
        let ds = Vec5::from_column_slice(&ds);
        prop_assume!(ds[4].abs() > 0.1);
        let (s0, c0) = fol.crossing_sign(&point, &horizontal(e.into()), &ds, &horizontal(f.into())).unwrap();
        prop_assume!(s0 != 0 && c0 > 2.0 * fol.cfg.condition_min);

        let rot = |v: HVec, a: f64| v * a.cos() + (j * v) * a.sin();
        let q4 = point.q4();
        let ds2 = ds * scale
            + lift_vector(&q4, point.t, &(e * mix[0] + (j * e) * mix[1]), &params);
        let (s1, _) = fol
            .crossing_sign(&point, &horizontal(rot(e, phi).into()), &ds2, &horizontal(rot(f, psi_).into()))
            .unwrap();
        prop_assert_eq!(s0, s1);
        let (s2, _) = fol.crossing_sign(&point, &horizontal(f.into()), &ds, &horizontal(e.into())).unwrap();
        prop_assert_eq!(s0, s2);
    }
}

// The disk for (P, X) misses P by an amount linear in the size of the
// perturbation; the center tangent plane stays close to X.
#[test]
fn disk_center_offset_scales_with_eps() {
    let p = Point5::new(0.0, 0.1, 0.1, 0.0, 0.0);
    let x = PlaneChart::new(Complex64::new(0.3, 0.2));
    let cfg = SolverConfig { n: 33, ..SolverConfig::default() };
    let c = cfg.n / 2;
    let offsets: Vec<f64> = [0.04, 0.02, 0.01]
        .iter()
        .map(|&eps| {
            let acs = builtin::sigma_linear(eps);
            let sol = picard_solve(&p, &x, &acs, &cfg).unwrap();
            let y = tangent_plane(&sol.patch, (c, c), &acs).unwrap();
            assert!((y.w - x.w).norm() < 20.0 * eps, "eps {eps}: {:?} vs {:?}", y.w, x.w);
            sol.patch.point(c, c).dist(&p)
        })
        .collect();
    for w in offsets.windows(2) {
        assert!((w[0] / w[1] - 2.0).abs() < 0.1, "{offsets:?}");
    }
}

#[test]
fn psi_inverse_round_trip() {
    let acs = builtin::sigma_linear(0.01);
    let cfg = SolverConfig { n: 33, ..SolverConfig::default() };
    let q = Point5::new(0.0, 0.1, 0.05, 0.0, 0.02);
    let y = PlaneChart::new(Complex64::new(0.1, -0.1));
    let inv = psi_invert(&q, &y, &acs, &cfg).unwrap();
    let back = psi(&inv.p, &inv.x, &acs, &cfg).unwrap();
    assert!(back.q.dist(&q) < 1e-6 && (back.y.w - y.w).norm() < 1e-6);
}

#[test]
fn leaves_of_a_flat_structure() {
    let cfg = FoliationConfig { t_nodes: 9, solver: small_cfg(), ..FoliationConfig::default() };
    let fol = Foliation::new(ACSField::standard(), cfg).unwrap();
    let leaf = fol.build_leaf(LeafParams::polar(PlaneChart::new(Complex64::new(0.0, 0.0)))).unwrap();
    assert_eq!(leaf.disks.len(), 9);
    assert!(fol.tangent_spread(&leaf) < 1e-10);
    // every lookup in the flat case lands on a leaf containing q
    for (zeta, z, t) in [(0.1, 0.3, 0.1), (-0.2, 0.25, -0.3)] {
        let q = fol.point_from_coords(Complex64::new(zeta, 0.05), Complex64::new(0.1, z), t);
        let l = fol.leaf_through_polar(&q).unwrap();
        assert!(fol.leaf_gap(&l.params, &q).unwrap() < 1e-8);
    }
}
