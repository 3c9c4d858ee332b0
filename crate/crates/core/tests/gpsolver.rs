use std::f64::consts::PI;

use nanotrap::fieldsolver::{PotentialGrid, Vec3};
use nanotrap::gpsolver::*;
use nanotrap::physcore::consts::HBAR;
use nanotrap::physcore::Species;

const OMEGA: f64 = 2.0 * PI * 1000.0;

fn harmonic(sp: &Species, omega: Vec3) -> impl Fn(&Vec3) -> nanotrap::Result<f64> {
    let m = sp.mass;
    move |r: &Vec3| Ok(0.5 * m * (omega.x.powi(2) * r.x * r.x + omega.y.powi(2) * r.y * r.y + omega.z.powi(2) * r.z * r.z))
}

fn a_ho(sp: &Species, omega: f64) -> f64 {
    (HBAR / (sp.mass * omega)).sqrt()
}

fn solve_harmonic(sp: &Species, n: f64, lim: f64, pts: usize) -> GroundState {
    let a = a_ho(sp, OMEGA);
    let v = harmonic(sp, Vec3::repeat(OMEGA));
    let p = GpProblem::sample(&v, Vec3::zeros(), Vec3::repeat(lim * a), [pts; 3], n, sp.clone()).unwrap();
    solve_ground_state(&p, &GpOptions { tol: 1e-6, ..Default::default() }).unwrap()
}

#[test]
fn noninteracting_oscillator_ground_state() {
    let sp = Species { scattering_length: 0.0, ..Species::rb87() };
    let s = solve_harmonic(&sp, 1.0, 6.0, 32);
    let e0 = 1.5 * HBAR * OMEGA;
    assert!((s.mu / e0 - 1.0).abs() < 1e-2, "mu = {} hbar w", s.mu / (HBAR * OMEGA));
    assert!((s.energy / e0 - 1.0).abs() < 1e-2);
    assert!(s.residual < 1e-6);
    // Gaussian width
    let a = a_ho(&sp, OMEGA);
    let x2: f64 = (0..32)
        .flat_map(|i| (0..32).flat_map(move |j| (0..32).map(move |k| (i, j, k))))
        .map(|(i, j, k)| s.point(i, j, k).x.powi(2) * s.psi[s.index(i, j, k)].powi(2))
        .sum::<f64>()
        * s.cell_volume();
    assert!((x2 / (0.5 * a * a) - 1.0).abs() < 1e-2);
}

#[test]
fn thomas_fermi_limit_and_virial_theorem() {
    let sp = Species::rb87();
    let n = 1e6;
    let s = solve_harmonic(&sp, n, 16.0, 48);
    let a = a_ho(&sp, OMEGA);
    let mu_tf = 0.5 * HBAR * OMEGA * (15.0 * n * sp.scattering_length / a).powf(0.4);
    assert!((s.mu / mu_tf - 1.0).abs() < 0.05, "mu / mu_TF = {}", s.mu / mu_tf);
    let virial = (2.0 * s.e_kin - 2.0 * s.e_pot + 3.0 * s.e_int) / s.energy;
    assert!(virial.abs() < 0.02, "virial {virial}");
    // mu = (E_kin + E_pot + 2 E_int) / N
    assert!(((s.e_kin + s.e_pot + 2.0 * s.e_int) / n / s.mu - 1.0).abs() < 1e-3);
}

#[test]
fn energy_history_never_increases() {
    let s = solve_harmonic(&Species::rb87(), 1e5, 12.0, 32);
    assert!(s.energy_history.len() > 2);
    for w in s.energy_history.windows(2) {
        assert!(w[1] <= w[0] + 1e-12 * w[0].abs(), "{} -> {}", w[0], w[1]);
    }
}

#[test]
fn chemical_potential_grows_with_atom_number() {
    let sp = Species::rb87();
    let mut prev = 0.0;
    for n in [1e3, 1e4, 1e5] {
        let s = solve_harmonic(&sp, n, 12.0, 32);
        assert!(s.mu > prev, "N = {n}: {} <= {prev}", s.mu);
        prev = s.mu;
    }
}

#[test]
fn normalisation_and_density_maps() {
    let n = 2e4;
    let s = solve_harmonic(&Species::rb87(), n, 12.0, 32);
    assert!((s.norm() / n - 1.0).abs() < 1e-10);
    let line: f64 = s.line_density().iter().sum::<f64>() * s.spacing.x;
    assert!((line / n - 1.0).abs() < 1e-10);
    for axis in 0..3 {
        let (a, b, map) = s.density_map(axis).unwrap();
        assert_eq!(map.len(), a * b);
        let (h1, h2) = match axis {
            0 => (s.spacing.y, s.spacing.z),
            1 => (s.spacing.x, s.spacing.z),
            _ => (s.spacing.x, s.spacing.y),
        };
        assert!((map.iter().sum::<f64>() * h1 * h2 / n - 1.0).abs() < 1e-10);
    }
    assert!(s.density_map(3).is_err());
}

#[test]
fn ground_state_respects_mirror_symmetry() {
    let sp = Species::rb87();
    let v = harmonic(&sp, Vec3::new(OMEGA / 3.0, OMEGA, 1.3 * OMEGA));
    let a = a_ho(&sp, OMEGA / 3.0);
    let p = GpProblem::sample(&v, Vec3::zeros(), Vec3::new(10.0 * a, 5.0 * a, 5.0 * a), [48, 24, 24], 1e4, sp).unwrap();
    let s = solve_ground_state(&p, &GpOptions { tol: 1e-6, ..Default::default() }).unwrap();
    let [nx, ny, nz] = s.dims;
    let peak = s.psi.iter().cloned().fold(0.0, f64::max);
    for i in 0..nx {
        for j in 0..ny {
            for k in 0..nz {
                let here = s.psi[s.index(i, j, k)];
                let mirror = s.psi[s.index(nx - 1 - i, ny - 1 - j, k)];
                assert!((here - mirror).abs() < 1e-4 * peak);
                assert!(here >= -1e-8 * peak);
            }
        }
    }
}

/// Flat-bottomed guide: hard-ish walls along x, harmonic across.
fn flat_guide(sp: &Species, half_length: f64, omega_t: f64) -> impl Fn(&Vec3) -> nanotrap::Result<f64> {
    let m = sp.mass;
    move |r: &Vec3| {
        let out = (r.x.abs() - half_length).max(0.0);
        Ok(0.5 * m * omega_t * omega_t * (r.y * r.y + r.z * r.z + 400.0 * out * out))
    }
}

#[test]
fn smooth_flat_guide_has_uniform_line_density() {
    let sp = Species::rb87();
    let omega_t = 2.0 * PI * 2000.0;
    let at = a_ho(&sp, omega_t);
    let v = flat_guide(&sp, 20e-6, omega_t);
    let p = GpProblem::sample(&v, Vec3::zeros(), Vec3::new(24e-6, 5.0 * at, 5.0 * at), [256, 16, 16], 1e4, sp).unwrap();
    let s = solve_ground_state(&p, &GpOptions::default()).unwrap();
    let stats = line_density_stats(&s);
    assert!(stats.std_relative < 0.01, "std/mean = {}", stats.std_relative);
    assert!(stats.extent.0 < -18e-6 && stats.extent.1 > 18e-6);
    assert_eq!(relative_fragmentation(&s, &s).unwrap(), 0.0);
}

#[test]
fn modulated_guide_fragments() {
    let sp = Species::rb87();
    let omega_t = 2.0 * PI * 2000.0;
    let at = a_ho(&sp, omega_t);
    let smooth = flat_guide(&sp, 20e-6, omega_t);
    let e = 0.05 * HBAR * omega_t;
    let rough = |r: &Vec3| smooth(r).map(|u| u + e * (2.0 * PI * r.x / 3e-6).cos());
    let dims = [256, 16, 16];
    let half = Vec3::new(24e-6, 5.0 * at, 5.0 * at);
    let s0 = solve_ground_state(&GpProblem::sample(&smooth, Vec3::zeros(), half, dims, 1e4, sp.clone()).unwrap(), &GpOptions::default()).unwrap();
    let opts = GpOptions { initial: Some(s0.psi.clone()), ..Default::default() };
    let s1 = solve_ground_state(&GpProblem::sample(&rough, Vec3::zeros(), half, dims, 1e4, sp).unwrap(), &opts).unwrap();
    let f = relative_fragmentation(&s1, &s0).unwrap();
    // local-density response dn1 / n1 = -dV / (n1 dmu/dn1), with dmu/dn1 from a second smooth solve
    let s2 = solve_ground_state(&GpProblem::sample(&smooth, Vec3::zeros(), half, dims, 1.1e4, Species::rb87()).unwrap(), &GpOptions::default()).unwrap();
    let centre = |s: &GroundState| s.line_density()[dims[0] / 2];
    let dmu_dn = (s2.mu - s0.mu) / (centre(&s2) - centre(&s0));
    let expected = e / 2f64.sqrt() / (centre(&s0) * dmu_dn);
    assert!((f / expected - 1.0).abs() < 0.2, "{f} vs {expected}");
}

#[test]
fn basin_mask_stops_at_barriers() {
    let values = vec![0.0, 1.0, 5.0, -1.0, 0.5, 3.0, 0.2, 0.1];
    let g = PotentialGrid { origin: Vec3::zeros(), spacing: Vec3::repeat(1.0), dims: [8, 1, 1], values };
    let m = basin_mask(&g, [0, 0, 0], 2.0);
    assert_eq!(m, vec![true, true, false, false, false, false, false, false]);
    assert!(basin_mask(&g, [2, 0, 0], 2.0).iter().all(|b| !b));
}

#[test]
fn basin_walls_off_the_far_well() {
    let sp = Species::rb87();
    let a = a_ho(&sp, OMEGA);
    let m = sp.mass;
    // double well: the right well is deeper, separated by a barrier at x = 0
    let v = move |r: &Vec3| {
        let x = r.x / (4.0 * a);
        let u = HBAR * OMEGA * (30.0 * (x * x - 1.0).powi(2) - 5.0 * x);
        Ok(u + 0.5 * m * OMEGA * OMEGA * (r.y * r.y + r.z * r.z))
    };
    let p = GpProblem::sample(&v, Vec3::zeros(), Vec3::new(12.0 * a, 5.0 * a, 5.0 * a), [64, 16, 16], 1e3, sp).unwrap();
    let left = Vec3::new(-4.0 * a, 0.0, 0.0);
    let level = HBAR * OMEGA * 28.0;
    let p = p.with_basin(left, level).unwrap();
    assert!(p.wall.unwrap() > 0.0);
    let s = solve_ground_state(&p, &GpOptions::default()).unwrap();
    let n1 = s.line_density();
    let right: f64 = n1[32..].iter().sum::<f64>();
    let total: f64 = n1.iter().sum();
    assert!(right < 1e-3 * total, "right-well share {}", right / total);
}

#[test]
fn rejects_bad_problems() {
    let sp = Species::rb87();
    let v = harmonic(&sp, Vec3::repeat(OMEGA));
    assert!(GpProblem::sample(&v, Vec3::zeros(), Vec3::repeat(1e-6), [8, 8, 8], 0.0, sp.clone()).is_err());
    assert!(GpProblem::sample(&v, Vec3::zeros(), Vec3::repeat(1e-6), [8, 2, 8], 1.0, sp.clone()).is_err());
    let p = GpProblem::sample(&v, Vec3::zeros(), Vec3::repeat(1e-6), [8, 8, 8], 1.0, sp).unwrap();
    assert!(p.with_basin(Vec3::zeros(), -1.0).is_err());
}
