//! Datasets behind the eight figures; every function returns named tables.

use std::f64::consts::PI;

use nanotrap::casimir::{cp_prefactor, cylinder_f, cylinder_u, planar_paa_u, planar_u, CpChannels};
use nanotrap::corrugation::{dbx_rms_relative, dbx_spectrum, potential_resolution, RoughnessSpectrum};
use nanotrap::fieldsolver::{barrier_for_probability, tunneling_control_curve, Potential, Vec3};
use nanotrap::lossmodel::{decoherence_rate, surface_tunneling_rate, thermal_spinflip_rate, NoiseGeometry};
use nanotrap::physcore::consts::MU0;
use nanotrap::physcore::{joule_to_kelvin, kelvin_to_joule, Layer, WaferStack};
use nanotrap::wiremodel::{max_current, resistivity_ratio, CrossSection};
use nanotrap::{Error, Result};

use crate::output::Table;
use crate::pipeline;
use crate::scenario::Scenario;

pub type Dataset = Vec<(String, Table)>;

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

pub fn figure(n: u32, sc: &Scenario, seed: u64) -> Result<Dataset> {
    match n {
        1 => control(sc),
        2 => resistivity(sc),
        3 => corrugation(sc),
        4 => resolution(sc),
        5 => casimir(sc),
        6 => lifetimes(sc),
        7 => maps(sc, seed),
        8 => decoherence(sc),
        _ => Err(Error::domain(format!("figure number must be 1..=8, got {n}"))),
    }
}

const CONTROL_HEIGHTS_UM: [f64; 5] = [0.5, 1.0, 2.0, 5.0, 10.0];

/// Transmission versus fractional control-current change, and the barrier needed for P = 0.001.
fn control(sc: &Scenario) -> Result<Dataset> {
    let sp = &sc.species;
    let e = kelvin_to_joule(1e-6);
    let fractions: Vec<f64> = (0..=40).map(|i| -0.1 + 0.005 * i as f64).collect();
    let mut cols = vec!["dI_over_I".to_string()];
    cols.extend(CONTROL_HEIGHTS_UM.iter().map(|d| format!("P_d{d}um")));
    let mut t = Table { columns: cols, rows: fractions.iter().map(|&f| vec![f]).collect() };
    for d in CONTROL_HEIGHTS_UM {
        let curve = tunneling_control_curve(d * 1e-6, e, 1e-3, sp, &fractions)?;
        for (row, (_, p)) in t.rows.iter_mut().zip(&curve.points) {
            row.push(*p);
        }
    }
    let mut inset = Table::new(&["d_um", "barrier_uK"]);
    for d in log_grid(0.2e-6, 10e-6, 25) {
        inset.push(vec![d * 1e6, joule_to_kelvin(barrier_for_probability(d, e, 1e-3, sp)?) * 1e6]);
    }
    Ok(vec![("fig1_control".into(), t), ("fig1_barrier".into(), inset)])
}

/// Size-dependent resistivity and the heating-limited current of square wires.
fn resistivity(sc: &Scenario) -> Result<Dataset> {
    let mat = &sc.trap_wire().material;
    let mut t = Table::new(&["side_nm", "rho_ratio", "j_max_A_m2", "i_max_mA"]);
    for side in log_grid(20e-9, 1e-6, 18) {
        let cs = CrossSection::square(side)?;
        let lim = max_current(&cs, mat, sc.max_temperature_rise)?;
        t.push(vec![side * 1e9, resistivity_ratio(&cs, mat)?, lim.j_max, lim.i_max * 1e3]);
    }
    Ok(vec![("fig2_resistivity".into(), t)])
}

const HEIGHTS_UM: [f64; 17] = [0.1, 0.15, 0.2, 0.3, 0.4, 0.5, 0.6, 0.8, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0];

/// Relative field corrugation versus height for the measured edge roughness.
fn corrugation(sc: &Scenario) -> Result<Dataset> {
    let (rms, lambda_min, band_top) = sc.roughness.as_ref().map_or((2e-9, 100e-9, 800e-9), |r| (r.band_rms, r.lambda_min, r.band.1));
    let white = RoughnessSpectrum::from_rms(rms, 0.0, lambda_min, band_top, 0)?;
    let pink = RoughnessSpectrum::from_rms(rms, 1.0, lambda_min, band_top, 0)?;
    let widths = [50e-9, 100e-9, 200e-9];
    let mut cols = vec!["d_um".to_string(), "rel_alpha0".into(), "rel_alpha1".into()];
    cols.extend(widths.iter().map(|w| format!("rel_modes_w{:.0}nm", w * 1e9)));
    let mut t = Table { columns: cols, rows: Vec::new() };
    for d in HEIGHTS_UM {
        let z = d * 1e-6;
        let mut row = vec![d, dbx_rms_relative(&white, z)?, dbx_rms_relative(&pink, z)?];
        for w in widths {
            row.push(dbx_spectrum(&white, 1.0, z, w)?.relative);
        }
        t.push(row);
    }
    Ok(vec![("fig3_corrugation".into(), t)])
}

/// Amplitude of the engineered edge modulation for the resolution curves.
pub const RESOLUTION_AMPLITUDE: f64 = 10e-9;

/// Largest height at which a periodic potential of period lambda still holds a barrier twice the ground state.
fn resolution(sc: &Scenario) -> Result<Dataset> {
    let currents_ma = [0.05, 0.5, 5.0, 50.0];
    let mut cols = vec!["lambda_um".to_string()];
    cols.extend(currents_ma.iter().map(|i| format!("d_max_um_I{i}mA")));
    let mut t = Table { columns: cols, rows: Vec::new() };
    for lambda in log_grid(0.2e-6, 10e-6, 25) {
        let mut row = vec![lambda * 1e6];
        for i in currents_ma {
            row.push(potential_resolution(i * 1e-3, lambda, RESOLUTION_AMPLITUDE, 2.0, &sc.species)?.d_max * 1e6);
        }
        t.push(row);
    }
    Ok(vec![("fig4_resolution".into(), t)])
}

/// Casimir-Polder factor F = -U z^4 2 pi / (hbar c alpha0) of the wafer and of wires.
fn casimir(sc: &Scenario) -> Result<Dataset> {
    let alpha = sc.species.alpha0;
    let stack = sc.wafer.clone().unwrap_or_else(WaferStack::oxide_on_silicon);
    let pre = cp_prefactor(alpha);
    let f = |u: f64, z: f64| -u * z.powi(4) / pre;
    let (t_ox, e_ox) = stack.layers.first().map_or((0.0, 1.0), |l| (l.thickness, l.epsilon));
    let substrate = WaferStack { layers: vec![Layer { thickness: t_ox, epsilon: 1.0 }], substrate_epsilon: stack.substrate_epsilon };
    let oxide = WaferStack { layers: vec![Layer { thickness: t_ox, epsilon: e_ox }], substrate_epsilon: 1.0 };
    let zs = log_grid(0.05e-6, 5e-6, 30);
    let mut a = Table::new(&["z_um", "F_exact", "F_additive", "F_substrate_only", "F_layer_only"]);
    for &z in &zs {
        a.push(vec![
            z * 1e6,
            f(planar_u(z, &stack, alpha)?, z),
            f(planar_paa_u(z, &stack, alpha)?, z),
            f(planar_u(z, &substrate, alpha)?, z),
            f(planar_u(z, &oxide, alpha)?, z),
        ]);
    }
    // wires of diameter 2a lying on the wafer; z is measured from the wafer top
    let diameters = [25e-9, 50e-9, 100e-9, 200e-9];
    let mut cols = vec!["z_um".to_string(), "F_wafer".into()];
    cols.extend(diameters.iter().map(|d| format!("F_wire_{:.0}nm", d * 1e9)));
    let mut b = Table { columns: cols, rows: Vec::new() };
    for &z in &zs {
        let mut row = vec![z * 1e6, f(planar_u(z, &stack, alpha)?, z)];
        for d in diameters {
            let a_r = 0.5 * d;
            row.push(if z > d { f(cylinder_u(z - a_r, a_r, alpha)?, z) } else { f64::NAN });
        }
        b.push(row);
    }
    Ok(vec![("fig5_planar".into(), a), ("fig5_wires".into(), b)])
}

/// Thermal spin-flip lifetime versus height above square wires of the trap wire's length.
fn thermal_lifetimes(sc: &Scenario) -> Result<Table> {
    let w = sc.trap_wire();
    let mat = &w.material;
    let sides = [25e-9, 50e-9, 100e-9, 200e-9];
    let mut cols = vec!["d_um".to_string()];
    cols.extend(sides.iter().map(|s| format!("tau_s_{:.0}nm", s * 1e9)));
    cols.push("tau_s_10um_wide".into());
    let mut t = Table { columns: cols, rows: Vec::new() };
    let mut geoms = Vec::new();
    for s in sides {
        let rho = mat.rho0 * resistivity_ratio(&CrossSection::square(s)?, mat)?;
        geoms.push((s, NoiseGeometry::straight_wire(w.central_length, s, s, rho, sc.noise_temperature)?));
    }
    geoms.push((10e-6, NoiseGeometry::straight_wire(w.central_length, 10e-6, 10e-6, mat.rho0, sc.noise_temperature)?));
    for d in log_grid(0.1e-6, 5e-6, 20) {
        let mut row = vec![d * 1e6];
        for (h, g) in &geoms {
            let rate = thermal_spinflip_rate(&Vec3::new(0.0, 0.0, h + d), g, &sc.species, &Vec3::x())?.rate;
            row.push(1.0 / rate);
        }
        t.push(row);
    }
    Ok(t)
}

/// Scenario with the trapping bias chosen for an infinite-wire height `d_axis` above the axis.
fn at_height(sc: &Scenario, d_axis: f64, channels: CpChannels) -> Scenario {
    let mut s = sc.clone();
    s.bias.y = MU0 * s.trap_wire().current / (2.0 * PI * d_axis);
    s.casimir = channels;
    s
}

/// Tunnelling lifetime; zero when the trap is open.
fn tunnel_lifetime(sc: &Scenario) -> Result<(f64, f64)> {
    let t = match pipeline::trap(sc) {
        Ok(t) => t,
        Err(Error::NoMinimum(_) | Error::Saddle(_) | Error::InsideSurface(_)) => return Ok((f64::NAN, 0.0)),
        Err(e) => return Err(e),
    };
    let s = pipeline::ground_state(sc, &t.potential, &t.c, None)?;
    Ok((t.c.height_d, 1.0 / surface_tunneling_rate(&t.potential, &s, s.mu, &sc.species)?.rate))
}

fn lifetimes(sc: &Scenario) -> Result<Dataset> {
    let mut tun = Table::new(&["d_axis_um", "d_um", "tau_wafer_s", "tau_wire_s", "tau_both_s", "tau_majorana_s"]);
    // three heights around the 2 s crossing keep the figure within a minute on one core
    for d_axis in [0.45e-6, 0.55e-6, 0.65e-6] {
        let mut row = vec![d_axis * 1e6, f64::NAN];
        for ch in [CpChannels::Wafer, CpChannels::Wire, CpChannels::Both] {
            let (d, tau) = tunnel_lifetime(&at_height(sc, d_axis, ch))?;
            if d.is_finite() {
                row[1] = d * 1e6;
            }
            row.push(tau);
        }
        row.push(2.0);
        tun.push(row);
    }
    Ok(vec![("fig6_thermal".into(), thermal_lifetimes(sc)?), ("fig6_tunneling".into(), tun)])
}

/// Potential slices through the trap and the per-column tunnelling weights for each CP channel.
fn maps(sc: &Scenario, _seed: u64) -> Result<Dataset> {
    let t = pipeline::trap(sc)?;
    let r0 = t.c.r_min;
    let u0 = t.c.u_min;
    let uk = |u: f64| joule_to_kelvin(u - u0) * 1e6;
    let mut xz = Table::new(&["x_um", "z_um", "U_uK"]);
    let w = sc.trap_wire();
    let x_half = 0.5 * w.central_length + 5e-6;
    for i in 0..=120 {
        let x = -x_half + 2.0 * x_half * i as f64 / 120.0;
        for k in 0..=40 {
            let z = w.cross_section.height + 1e-9 + 2.0 * t.c.height_d * k as f64 / 40.0;
            let u = t.potential.energy(&Vec3::new(x, r0.y, z)).map_or(f64::NAN, uk);
            xz.push(vec![x * 1e6, z * 1e6, u]);
        }
    }
    let mut yz = Table::new(&["y_um", "z_um", "U_uK"]);
    let span = 2.0 * t.c.height_d;
    for j in 0..=60 {
        let y = r0.y - span + 2.0 * span * j as f64 / 60.0;
        for k in 0..=60 {
            let z = 1e-9 + 2.0 * span * k as f64 / 60.0;
            let u = t.potential.energy(&Vec3::new(0.0, y, z)).map_or(f64::NAN, uk);
            yz.push(vec![y * 1e6, z * 1e6, u]);
        }
    }
    let mut out = vec![("fig7_isopotential_xz".to_string(), xz), ("fig7_isopotential_yz".to_string(), yz)];
    for (name, ch) in [("wire", CpChannels::Wire), ("wafer", CpChannels::Wafer), ("both", CpChannels::Both)] {
        let mut s = sc.clone();
        s.casimir = ch;
        let tc = pipeline::trap(&s)?;
        let state = pipeline::ground_state(&s, &tc.potential, &tc.c, None)?;
        let r = surface_tunneling_rate(&tc.potential, &state, state.mu, &s.species)?;
        let [nx, ny, _] = state.dims;
        let mut m = Table::new(&["x_um", "y_um", "weight_per_m2_s"]);
        for i in 0..nx {
            for j in 0..ny {
                let p = state.point(i, j, 0);
                m.push(vec![p.x * 1e6, p.y * 1e6, r.weights[i * ny + j]]);
            }
        }
        out.push((format!("fig7_tunneling_{name}"), m));
    }
    Ok(out)
}

/// Decoherence between two points above the trapping wire, and the cylinder CP factor.
fn decoherence(sc: &Scenario) -> Result<Dataset> {
    let w = sc.trap_wire();
    let cs = w.cross_section;
    let rho = w.material.rho0 * resistivity_ratio(&cs, &w.material)?;
    let g = NoiseGeometry::straight_wire(w.central_length, cs.width, cs.height, rho, sc.noise_temperature)?;
    let d = 0.5e-6;
    let z = cs.height + d;
    let sp = &sc.species;
    let th = thermal_spinflip_rate(&Vec3::new(0.0, 0.0, z), &g, sp, &Vec3::x())?.rate;
    let rate = |s: f64| decoherence_rate(&Vec3::new(-0.5 * s, 0.0, z), &Vec3::new(0.5 * s, 0.0, z), &g, sp, &Vec3::x());
    let far = rate(40.0 * d)?;
    let mut dec = Table::new(&["separation_over_d", "rate_over_max", "rate_over_thermal"]);
    for i in 0..=40 {
        let s = 0.25 * i as f64;
        let r = rate(s * d)?;
        dec.push(vec![s, r / far, r / th]);
    }
    let mut cyl = Table::new(&["a_over_r", "F"]);
    let mut betas = vec![0.01, 0.02, 0.05];
    betas.extend((1..=19).map(|i| 0.05 * i as f64));
    betas.extend([0.97, 0.99, 0.995]);
    betas.sort_by(f64::total_cmp);
    betas.dedup();
    for b in betas {
        cyl.push(vec![b, cylinder_f(b)?]);
    }
    Ok(vec![("fig8_decoherence".into(), dec), ("fig8_cylinder".into(), cyl)])
}
