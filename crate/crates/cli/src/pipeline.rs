//! Scenario-level physics: trap, GP ground state, roughness and the loss budget.

use std::sync::Arc;

use nanotrap::corrugation::{CorrugationField, RoughnessSpectrum};
use nanotrap::fieldsolver::{characterize_trap, DepthOptions, TrapCharacterization, TrapPotential, Vec3};
use nanotrap::gpsolver::{relative_fragmentation, solve_ground_state, GpOptions, GpProblem, GroundState};
use nanotrap::lossmodel::{majorana_rate, surface_tunneling_rate, thermal_spinflip_rate, LossBudget, NoiseGeometry};
use nanotrap::physcore::consts::HBAR;
use nanotrap::physcore::joule_to_kelvin;
use nanotrap::{Error, Result};

use crate::output::{sub_seed, Table};
use crate::scenario::Scenario;

pub struct Trap {
    pub potential: TrapPotential,
    pub c: TrapCharacterization,
}

pub fn trap(sc: &Scenario) -> Result<Trap> {
    let potential = sc.potential()?;
    let c = characterize_trap(&potential, &DepthOptions::default())?;
    Ok(Trap { potential, c })
}

/// Elongated box around the trap minimum, cut to the basin below the spill level.
pub fn gp_problem(sc: &Scenario, pot: &TrapPotential, c: &TrapCharacterization) -> Result<GpProblem> {
    let g = &sc.grid;
    let a_ho = (HBAR / (sc.species.mass * c.radial_omega())).sqrt();
    let ht = (g.transverse_oscillator_lengths * a_ho).min(g.transverse_half_max);
    let center = Vec3::new(0.0, c.r_min.y, c.r_min.z);
    let dims = [g.axial_points, g.transverse_points, g.transverse_points];
    GpProblem::sample(pot, center, Vec3::new(g.axial_half_length, ht, ht), dims, sc.atoms, sc.species.clone())?
        .with_basin(c.r_min, c.u_min + c.depth)
}

pub fn ground_state(sc: &Scenario, pot: &TrapPotential, c: &TrapCharacterization, initial: Option<&GroundState>) -> Result<GroundState> {
    let opts = GpOptions { tol: sc.gp_tolerance, initial: initial.map(|s| s.psi.clone()), ..Default::default() };
    solve_ground_state(&gp_problem(sc, pot, c)?, &opts)
}

/// Trap potential with the field corrugation of edge-roughness realisation `index`.
pub fn rough_potential(sc: &Scenario, t: &Trap, seed: u64, index: usize) -> Result<TrapPotential> {
    let r = sc.roughness.as_ref().ok_or_else(|| Error::domain("the scenario has no [roughness] section"))?;
    let w = sc.trap_wire();
    let spec = RoughnessSpectrum::from_band_rms(r.band_rms, r.band, r.alpha, r.lambda_min, r.length, sub_seed(seed, &format!("roughness/{index}")))?;
    let axis_z = 0.5 * w.cross_section.height;
    // tabulated over the distances from the axis that the condensate box spans
    let d_axis = t.c.r_min.z - axis_z;
    let field = CorrugationField::new(&spec, w.current, -0.5 * r.length, (0.0, axis_z), (d_axis / 3.0, 3.0 * d_axis))?;
    Ok(t.potential.clone().with_perturbation(Arc::new(field)))
}

pub struct Lifetimes {
    pub budget: LossBudget,
    pub state: GroundState,
}

/// Thermal spin flips from every wire, Majorana flips at the minimum and surface tunnelling of the ground state.
pub fn lifetimes(sc: &Scenario, t: &Trap) -> Result<Lifetimes> {
    let sp = &sc.species;
    let mut bodies = Vec::new();
    for w in &sc.wires {
        bodies.extend(NoiseGeometry::from_wire(&w.spec(), sc.noise_temperature)?.bodies);
    }
    let geom = NoiseGeometry { bodies, temperature: sc.noise_temperature };
    let axis = t.potential.field(&t.c.r_min)?;
    let g_th = thermal_spinflip_rate(&t.c.r_min, &geom, sp, &axis)?.rate;
    let g_maj = majorana_rate(t.c.radial_omega(), t.c.b_min, sp)?;
    let state = ground_state(sc, &t.potential, &t.c, None)?;
    let g_tun = surface_tunneling_rate(&t.potential, &state, state.mu, sp)?.rate;
    Ok(Lifetimes { budget: LossBudget::new(g_th, g_maj, g_tun, 0.0)?, state })
}

/// Mean fragmentation (relative to the smooth ground state) over the configured realisations.
pub fn fragmentation(sc: &Scenario, t: &Trap, smooth: &GroundState, seed: u64) -> Result<f64> {
    let n = sc.roughness.as_ref().map_or(0, |r| r.realizations);
    if n == 0 {
        return Ok(f64::NAN);
    }
    let mut sum = 0.0;
    for i in 0..n {
        let rough = rough_potential(sc, t, seed, i)?;
        let s = ground_state(sc, &rough, &t.c, Some(smooth))?;
        sum += relative_fragmentation(&s, smooth)?;
    }
    Ok(sum / n as f64)
}

pub const REPORT_COLUMNS: [&str; 9] =
    ["d_um", "depth_uK", "f_radial_Hz", "mu_nK", "tau_thermal_s", "tau_majorana_s", "tau_tunnel_s", "tau_total_s", "frag_std_pct"];

pub fn report(sc: &Scenario, seed: u64) -> Result<Table> {
    let t = trap(sc)?;
    let l = lifetimes(sc, &t)?;
    let frag = fragmentation(sc, &t, &l.state, seed)?;
    let b = &l.budget;
    let mut table = Table::new(&REPORT_COLUMNS);
    table.push(vec![
        t.c.height_d * 1e6,
        joule_to_kelvin(t.c.depth) * 1e6,
        t.c.radial_omega() / (2.0 * std::f64::consts::PI),
        joule_to_kelvin(l.state.mu - t.c.u_min) * 1e9,
        1.0 / b.gamma_th,
        1.0 / b.gamma_majorana,
        1.0 / b.gamma_tunnel,
        b.lifetime,
        frag * 100.0,
    ]);
    Ok(table)
}
