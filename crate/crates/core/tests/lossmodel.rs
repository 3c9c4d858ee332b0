use std::f64::consts::PI;

use nanotrap::fieldsolver::{Potential, Vec3};
use nanotrap::lossmodel::*;
use nanotrap::physcore::consts::{HBAR, KB};
use nanotrap::physcore::Species;
use nanotrap::Matrix3;
use proptest::prelude::*;

const RHO: f64 = 2.2e-8;

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs()
}

fn nanowire() -> NoiseBody {
    NoiseBody::segment(Vec3::new(-1e-6, 0.0, 25e-9), Vec3::new(1e-6, 0.0, 25e-9), 50e-9, 50e-9, RHO).unwrap()
}

fn assert_matrix(got: &Matrix3<f64>, want: &Matrix3<f64>, rel: f64) {
    let scale = want.abs().max();
    assert!((got - want).abs().max() <= rel * scale, "{got} vs {want}");
}

#[test]
fn geometric_factor_frozen_values() {
    // independent cubature (scipy nquad), evaluated in micrometres
    let x1 = Vec3::new(0.0, 0.0, 0.55e-6);
    let x2 = Vec3::new(0.3e-6, 0.0, 0.55e-6);
    let same = geometric_factor(&x1, &x1, &nanowire()).unwrap();
    let want = Matrix3::from_diagonal(&Vec3::new(0.0028646259914511195, 7.691704004907555e-06, 0.010122196408389843)) * 1e6;
    assert_matrix(&same, &want, 1e-6);
    let pair = geometric_factor(&x1, &x2, &nanowire()).unwrap();
    #[rustfmt::skip]
    let want = Matrix3::new(
        0.0019998180150035804, 0.0, -0.00238940132015813,
        0.0, 6.60875959825846e-06, 0.0,
        0.0025961168390582208, 0.0, 0.008699902719591082,
    ) * 1e6;
    assert_matrix(&pair, &want, 1e-6);
}

#[test]
fn thin_long_wire_limit() {
    // X = (pi A / 16 d^3) diag(1, 0, 3) for a filament along x at distance d
    let (w, d) = (20e-9, 1e-6);
    let body = NoiseBody::segment(Vec3::new(-0.5e-3, 0.0, 0.0), Vec3::new(0.5e-3, 0.0, 0.0), w, w, RHO).unwrap();
    let x = geometric_factor(&Vec3::new(0.0, 0.0, d), &Vec3::new(0.0, 0.0, d), &body).unwrap();
    let pre = PI * w * w / (16.0 * d.powi(3));
    assert!(close(x[(0, 0)], pre, 1e-3) && close(x[(2, 2)], 3.0 * pre, 1e-3), "{x}");
    assert!(x[(1, 1)].abs() < 1e-3 * pre);
}

#[test]
fn subdivision_is_converged() {
    let x1 = Vec3::new(0.1e-6, 0.05e-6, 0.3e-6);
    let x2 = Vec3::new(-0.4e-6, 0.0, 0.5e-6);
    let a = geometric_factor(&x1, &x2, &nanowire()).unwrap();
    let b = geometric_factor_with(&x1, &x2, &nanowire(), 0.1).unwrap();
    assert_matrix(&a, &b, 1e-7);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn small_body_acts_as_a_point(theta in 0.0f64..PI, phi in 0.0f64..2.0 * PI, r in 1e-6f64..1e-5) {
        let s = 10e-9;
        let body = NoiseBody::segment(Vec3::new(-s / 2.0, 0.0, 0.0), Vec3::new(s / 2.0, 0.0, 0.0), s, s, RHO).unwrap();
        let n = Vec3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos());
        let x = geometric_factor(&(n * r), &(n * r), &body).unwrap();
        let want = n * n.transpose() * (body.volume() / (2.0 * r.powi(4)));
        prop_assert!((x - want).abs().max() < 1e-4 * want.abs().max());
    }

    #[test]
    fn noise_scales_with_temperature_and_conductivity(t in 1.0f64..600.0, k in 0.1f64..10.0) {
        let x = Vec3::new(0.0, 0.0, 0.6e-6);
        let sp = Species::rb87();
        let base = NoiseGeometry { bodies: vec![nanowire()], temperature: 300.0 };
        let g0 = thermal_spinflip_rate(&x, &base, &sp, &Vec3::x()).unwrap().rate;
        let mut body = nanowire();
        body.resistivity *= k;
        let g = thermal_spinflip_rate(&x, &NoiseGeometry { bodies: vec![body], temperature: t }, &sp, &Vec3::x()).unwrap().rate;
        prop_assert!(close(g, g0 * t / 300.0 / k, 1e-10));
    }
}

#[test]
fn correlation_tensor_is_positive_on_the_diagonal() {
    let geom = NoiseGeometry { bodies: vec![nanowire()], temperature: 300.0 };
    let s = noise_correlation(&Vec3::new(0.0, 0.0, 0.5e-6), &Vec3::new(0.0, 0.0, 0.5e-6), &geom).unwrap();
    let eig = s.symmetric_eigen();
    assert!(eig.eigenvalues.iter().all(|&v| v >= 0.0));
    assert!(noise_correlation(&Vec3::zeros(), &Vec3::zeros(), &NoiseGeometry { temperature: -1.0, ..geom.clone() }).is_err());
    assert!(noise_correlation(&Vec3::new(0.0, 0.0, 25e-9), &Vec3::new(0.0, 0.0, 1e-6), &geom).is_err());
}

#[test]
fn rate_grows_with_conductor_volume() {
    let x = Vec3::new(0.0, 0.0, 0.6e-6);
    let sp = Species::rb87();
    let mut prev = 0.0;
    for len in [0.5e-6, 1e-6, 2e-6, 8e-6] {
        let g = NoiseGeometry::straight_wire(len, 50e-9, 50e-9, RHO, 300.0).unwrap();
        let r = thermal_spinflip_rate(&x, &g, &sp, &Vec3::x()).unwrap().rate;
        assert!(r > prev);
        prev = r;
    }
}

#[test]
fn spin_flip_bookkeeping() {
    assert_eq!(lowering_element_sq(2, 2), 4.0);
    assert_eq!(lowering_element_sq(2, 1), 6.0);
    assert_eq!(lowering_element_sq(2, -2), 0.0);
    let geom = NoiseGeometry { bodies: vec![nanowire()], temperature: 300.0 };
    let x = Vec3::new(0.0, 0.0, 0.6e-6);
    let sp = Species { m_f: -2, ..Species::rb87() };
    let r = thermal_spinflip_rate(&x, &geom, &sp, &Vec3::x()).unwrap();
    assert!(r.no_lower_state && r.rate == 0.0);
    assert!(thermal_spinflip_rate(&x, &geom, &Species::rb87(), &Vec3::zeros()).is_err());
    // reversing the quantisation axis changes nothing
    let a = thermal_spinflip_rate(&x, &geom, &Species::rb87(), &Vec3::x()).unwrap().rate;
    let b = thermal_spinflip_rate(&x, &geom, &Species::rb87(), &-Vec3::x()).unwrap().rate;
    assert!(close(a, b, 1e-12));
}

#[test]
fn decoherence_vanishes_at_zero_separation_and_saturates() {
    let geom = NoiseGeometry { bodies: vec![nanowire()], temperature: 300.0 };
    let sp = Species::rb87();
    let x1 = Vec3::new(0.0, 0.0, 0.6e-6);
    assert_eq!(decoherence_rate(&x1, &x1, &geom, &sp, &Vec3::x()).unwrap(), 0.0);
    let at = |dx: f64| decoherence_rate(&x1, &(x1 + Vec3::new(dx, 0.0, 0.0)), &geom, &sp, &Vec3::x()).unwrap();
    let (near, mid) = (at(0.05e-6), at(0.5e-6));
    assert!(near > 0.0 && mid > near);
    assert!(close(at(0.3e-6), decoherence_rate(&(x1 + Vec3::new(0.3e-6, 0.0, 0.0)), &x1, &geom, &sp, &Vec3::x()).unwrap(), 1e-12));
    assert!(decoherence_rate(&Vec3::new(0.0, 0.0, 25e-9), &Vec3::new(0.0, 0.0, 25e-9), &geom, &sp, &Vec3::x()).is_err());
}

#[test]
fn majorana_formula_and_inverse() {
    let sp = Species::rb87();
    let w = 2.0 * PI * 10e3;
    let b0 = 1e-5;
    let g = majorana_rate(w, b0, &sp).unwrap();
    let hw = HBAR * w;
    assert!(close(g, PI * w / 2.0 * (-(2.0 * sp.moment() * b0 + hw) / (2.0 * hw)).exp(), 1e-14));
    let b = ioffe_for_lifetime(1.0 / g, w, &sp).unwrap();
    assert!(close(b, b0, 1e-10));
    assert!(majorana_valid(w, b0, &sp));
    assert!(!majorana_valid(w, 1e-9, &sp));
    assert!(ioffe_for_lifetime(1e-9, w, &sp).is_err());
    assert!(majorana_rate(0.0, b0, &sp).is_err());
    // doubling the field from 0 reduces the rate
    assert!(majorana_rate(w, 2.0 * b0, &sp).unwrap() < g);
}

#[test]
fn skin_depth_of_gold_at_one_megahertz() {
    let d = skin_depth(2.2e-8, 2.0 * PI * 1e6);
    assert!(close(d, 74.6e-6, 2e-3), "{d:e}");
}

#[test]
fn loss_budget_excludes_decoherence() {
    let b = LossBudget::new(0.1, 0.2, 0.3, 10.0).unwrap();
    assert!(close(b.lifetime, 1.0 / 0.6, 1e-15));
    assert!(LossBudget::new(-0.1, 0.0, 0.0, 0.0).is_err());
    assert!(LossBudget::new(0.0, 0.0, 0.0, 0.0).unwrap().lifetime.is_infinite());
}

/// Piecewise-linear column: U = z below z = a, then falls to the well at 2a and rises again.
struct Tent {
    a: f64,
    e: f64,
}

impl Potential for Tent {
    fn energy(&self, r: &Vec3) -> nanotrap::Result<f64> {
        if r.z <= 0.0 {
            return Err(nanotrap::Error::InsideSurface([r.x, r.y, r.z]));
        }
        let u = r.z / self.a;
        Ok(self.e * if u < 1.0 { u } else { (u - 2.0).abs() })
    }
}

#[test]
fn column_barrier_matches_closed_form() {
    let m = Species::rb87().mass;
    let tent = Tent { a: 1e-7, e: KB * 1e-7 };
    let mu = 0.5 * tent.e;
    let c = column_barrier(&tent, 0.0, 0.0, 2.0 * tent.a, mu, m).unwrap().unwrap();
    assert!(!c.open);
    assert!(close(c.well.0, 2.5 * tent.a, 1e-9) && close(c.well.1, 1.5 * tent.a, 1e-9), "{:?}", c.well);
    // int over the two linear flanks of sqrt(2 m (U - mu))
    let q = 2.0 * (2.0 * m * tent.e / tent.a).sqrt() * (2.0 / 3.0) * (0.5 * tent.a).powf(1.5);
    let want = (-2.0 * q / HBAR).exp();
    assert!(close(c.transmission, want, 1e-6), "{} vs {want}", c.transmission);

    // above the tent top the column is open
    let open = column_barrier(&tent, 0.0, 0.0, 2.0 * tent.a, 1.2 * tent.e, m).unwrap().unwrap();
    assert!(open.open && open.transmission == 1.0);
    // seeded where U >= mu
    assert!(column_barrier(&tent, 0.0, 0.0, tent.a, mu, m).unwrap().is_none());
}
