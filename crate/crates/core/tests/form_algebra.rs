use nalgebra::{Matrix4, Vector4};
use proptest::prelude::*;

use jleg::contact::standard_i_matrix;
use jleg::forms::{comass, j_theta, omega_from_j, sd_split, star, verify_semicalibration, wedge_coeff, Form2H};

fn form() -> impl Strategy<Value = Form2H> {
    prop::array::uniform6(-3.0f64..3.0).prop_map(Form2H::from_array)
}

fn close(a: &Form2H, b: &Form2H, tol: f64) -> bool {
    a.to_array().iter().zip(b.to_array()).all(|(x, y)| (x - y).abs() <= tol)
}

/// Gram-Schmidt of four generic vectors, with det fixed to +1.
fn rotation(cols: [[f64; 4]; 4]) -> Option<Matrix4<f64>> {
    let mut q: Vec<Vector4<f64>> = Vec::new();
    for c in cols {
        let mut v = Vector4::from(c);
        for u in &q {
            v -= *u * u.dot(&v);
        }
        if v.norm() < 1e-3 {
            return None;
        }
        q.push(v.normalize());
    }
    let mut m = Matrix4::from_columns(&q);
    if m.determinant() < 0.0 {
        m.set_column(0, &(-q[0]));
    }
    Some(m)
}

proptest! {
    #[test]
    fn star_is_an_involution(w in form()) {
        prop_assert!(close(&star(&star(&w)), &w, 0.0));
    }

    #[test]
    fn self_dual_split(w in form()) {
        let (p, m) = sd_split(&w);
        prop_assert!(close(&p.add(&m), &w, 1e-14));
        prop_assert!(close(&star(&p), &p, 1e-14));
        prop_assert!(close(&star(&m), &m.scale(-1.0), 1e-14));
        prop_assert!(p.inner(&m).abs() <= 1e-12);
    }

    #[test]
    fn comass_between_norm_bounds(w in form()) {
        let c = comass(&w);
        prop_assert!(c <= w.norm() * (1.0 + 1e-12));
        prop_assert!(c >= w.norm() / 2f64.sqrt() * (1.0 - 1e-12));
    }

    #[test]
    fn comass_is_homogeneous(w in form(), s in -5.0f64..5.0) {
        prop_assert!((comass(&w.scale(s)) - s.abs() * comass(&w)).abs() <= 1e-12 * (1.0 + comass(&w) * s.abs()));
    }

    #[test]
    fn comass_bounds_every_unit_plane(w in form(), u in prop::array::uniform4(-1.0f64..1.0), v in prop::array::uniform4(-1.0f64..1.0)) {
        let u = Vector4::from(u);
        let mut v = Vector4::from(v);
        prop_assume!(u.norm() > 1e-2);
        let u = u.normalize();
        v -= u * u.dot(&v);
        prop_assume!(v.norm() > 1e-2);
        let v = v.normalize();
        prop_assert!(w.eval(&u, &v).abs() <= comass(&w) + 1e-12);
    }

    #[test]
    fn comass_and_wedge_invariant_under_rotation(w in form(), cols in prop::array::uniform4(prop::array::uniform4(-1.0f64..1.0))) {
        let Some(r) = rotation(cols) else { return Ok(()) };
        let rw = Form2H::from_matrix(&(r.transpose() * w.to_matrix() * r));
        prop_assert!((comass(&rw) - comass(&w)).abs() <= 1e-11);
        prop_assert!((wedge_coeff(&rw, &rw) - wedge_coeff(&w, &w)).abs() <= 1e-10);
    }

    #[test]
    fn theta_family_is_accepted(theta in 0.0f64..std::f64::consts::TAU) {
        let w = Form2H::new(0.0, theta.cos(), theta.sin(), 0.0, 0.0, 0.0);
        let rep = verify_semicalibration(&w);
        prop_assert!(rep.pass, "{:?}", rep.failed());
        let j = rep.j.unwrap();
        prop_assert!(j.square_defect() <= 1e-10 && j.lagrangian_defect() <= 1e-10);
    }

    #[test]
    fn perturbed_theta_family_is_rejected(theta in 0.0f64..std::f64::consts::TAU, d in prop::array::uniform3(-1.0f64..1.0), size in 1e-3f64..1.0) {
        let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        prop_assume!(n > 1e-2);
        let w = Form2H::new(0.0, theta.cos(), theta.sin(), size * d[0] / n, size * d[1] / n, size * d[2] / n);
        prop_assert!(!verify_semicalibration(&w).pass);
    }

    // an orthogonal J anticommutes with I: {Id, I, J, IJ} is quaternionic
    #[test]
    fn orthogonal_j_anticommutes_with_i(theta in 0.0f64..std::f64::consts::TAU) {
        let j = *j_theta(theta).matrix();
        let i = standard_i_matrix();
        prop_assert!((j.transpose() * j - Matrix4::identity()).abs().max() <= 1e-15);
        prop_assert!((i * j + j * i).abs().max() <= 1e-15);
        prop_assert!((i * j * i * j + Matrix4::identity()).abs().max() <= 1e-15);
    }

    #[test]
    fn omega_of_j_theta_is_semicalibrating(theta in 0.0f64..std::f64::consts::TAU) {
        let om = omega_from_j(&j_theta(theta)).unwrap();
        prop_assert!((comass(&om) - 1.0).abs() <= 1e-12);
        prop_assert!(wedge_coeff(&om, &Form2H::dalpha()).abs() <= 1e-12);
    }
}

#[test]
fn dalpha_normalization() {
    let da = Form2H::dalpha();
    assert_eq!(comass(&da), 1.0);
    assert!((da.norm() - 2f64.sqrt()).abs() < 1e-15);
    assert!(close(&star(&da), &da, 0.0));
    // dalpha itself fails only the wedge hypothesis
    let rep = verify_semicalibration(&da);
    assert_eq!(rep.failed(), vec!["w ^ dalpha == 0"]);
}
