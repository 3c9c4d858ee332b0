//! `nanotrap` command line: single calculations, figure datasets and full scenario reports.

mod figures;
mod output;
mod pipeline;
mod scenario;

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use nanotrap::casimir::{cylinder_f, cylinder_u, planar_paa_u, planar_u, cp_prefactor};
use nanotrap::corrugation::{dbx_rms_relative, edge_realization, RoughnessSpectrum};
use nanotrap::fieldsolver::Vec3;
use nanotrap::lossmodel::{decoherence_rate, thermal_spinflip_rate, NoiseGeometry};
use nanotrap::physcore::{joule_to_kelvin, parse_as, Dimension, WaferStack};
use nanotrap::wiremodel::{max_current, resistivity_ratio, CrossSection};
use nanotrap::ErrorKind;

use output::{write_atomic, Provenance, Table};
use scenario::{ConfigError, Scenario, UnitCheck, Z50};

#[derive(Parser)]
#[command(name = "nanotrap", version, about = "Magnetic nanowire atom traps: fields, losses and condensates")]
struct Cli {
    /// Top-level seed; sub-seeds are derived per purpose. Overrides the scenario's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (the solvers currently run on one).
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    threads: u32,
    /// Directory for output files.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Whether bare numbers without unit suffixes are accepted as SI.
    #[arg(long, global = true, value_enum, default_value = "strict")]
    units: UnitCheck,
    /// Scenario file for commands that need one (default: the bundled z50 trap).
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Size-dependent resistivity ratio of a rectangular wire.
    Resistivity {
        #[arg(long)]
        width: Option<String>,
        #[arg(long)]
        height: Option<String>,
    },
    /// Heating-limited maximum current.
    Maxcurrent {
        #[arg(long)]
        width: Option<String>,
        #[arg(long)]
        height: Option<String>,
        /// Allowed temperature rise (default from the scenario).
        #[arg(long)]
        rise: Option<String>,
    },
    /// Trap position, depth and frequencies.
    Trap,
    /// Relative field corrugation at a height, or an edge realisation with --edge.
    Corrugation {
        #[arg(long, default_value = "0.6 um")]
        height: String,
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        /// Dump an edge profile with this many points instead.
        #[arg(long)]
        edge: Option<usize>,
    },
    /// Casimir-Polder potential of the wafer and of the trapping wire.
    Casimir {
        #[arg(long, default_value = "0.6 um")]
        z: String,
    },
    /// Loss budget of the scenario trap.
    Lifetime,
    /// Decoherence rate versus separation above the trapping wire.
    Decoherence {
        #[arg(long, default_value = "0.5 um")]
        height: String,
    },
    /// Ground state: summary, line density and density map.
    Gp {
        /// Add the field corrugation of this roughness realisation.
        #[arg(long)]
        rough_seed: Option<u64>,
    },
    /// Write the dataset(s) behind figure n.
    Figure {
        #[arg(value_parser = clap::value_parser!(u32).range(1..=8))]
        n: u32,
    },
    /// Characterise, solve and budget a scenario; writes report.csv.
    Run { scenario: PathBuf },
}

/// Exit codes: 2 configuration, 3 physics, 4 non-convergence.
fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    match e.downcast_ref::<nanotrap::Error>().map(nanotrap::Error::kind) {
        Some(ErrorKind::Config) => 2,
        Some(ErrorKind::Convergence) => 4,
        Some(ErrorKind::Physics) => 3,
        None => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

struct Ctx {
    text: String,
    sc: Scenario,
    seed: u64,
    out_dir: Option<PathBuf>,
}

impl Ctx {
    fn load(cli: &Cli, path: Option<&Path>) -> Result<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p)
                .map_err(|e| ConfigError(format!("cannot read scenario {}: {e}", p.display())))?,
            None => Z50.to_string(),
        };
        let sc = Scenario::parse(&text, cli.units)?;
        let seed = cli.seed.or(sc.seed).unwrap_or(0);
        let out_dir = cli.out_dir.clone().or_else(|| sc.output_dir.as_ref().map(PathBuf::from));
        Ok(Ctx { text, sc, seed, out_dir })
    }

    fn provenance(&self, params: &str) -> Provenance {
        Provenance::new(&self.text, params, self.seed)
    }

    fn dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    /// Print the table; also save it when an output directory was given.
    fn emit(&self, name: &str, params: &str, table: &Table) -> Result<()> {
        let text = table.render(&self.provenance(params));
        if let Some(dir) = &self.out_dir {
            save(&dir.join(format!("{name}.csv")), &text)?;
        }
        print!("{text}");
        Ok(())
    }

    fn save(&self, name: &str, params: &str, table: &Table) -> Result<PathBuf> {
        let path = self.dir().join(format!("{name}.csv"));
        save(&path, &table.render(&self.provenance(params)))?;
        Ok(path)
    }
}

fn save(path: &Path, text: &str) -> Result<()> {
    write_atomic(path, text).with_context(|| format!("writing {}", path.display()))
}

fn quantity(text: &str, dim: Dimension, key: &str) -> Result<f64> {
    parse_as(text, dim).map_err(|e| ConfigError(format!("--{key}: {e}")).into())
}

fn cross_section(ctx: &Ctx, width: &Option<String>, height: &Option<String>) -> Result<Option<CrossSection>> {
    let Some(w) = width else {
        if height.is_some() {
            return Err(ConfigError("--height needs --width".into()).into());
        }
        return Ok(None);
    };
    let w = quantity(w, Dimension::Length, "width")?;
    let h = height.as_ref().map_or(Ok(w), |h| quantity(h, Dimension::Length, "height"))?;
    let _ = ctx;
    Ok(Some(CrossSection::new(w, h)?))
}

fn sweep_sides() -> Vec<CrossSection> {
    [20e-9, 25e-9, 50e-9, 100e-9, 200e-9, 500e-9, 1e-6, 10e-6].iter().map(|&s| CrossSection::square(s).expect("positive side")).collect()
}

fn run(cli: &Cli) -> Result<()> {
    let scenario_path = match &cli.command {
        Command::Run { scenario } => Some(scenario.as_path()),
        _ => cli.scenario.as_deref(),
    };
    let ctx = Ctx::load(cli, scenario_path)?;
    let sc = &ctx.sc;
    let mat = &sc.trap_wire().material;
    match &cli.command {
        Command::Resistivity { width, height } => {
            let sections = cross_section(&ctx, width, height)?.map_or_else(sweep_sides, |c| vec![c]);
            let mut t = Table::new(&["width_nm", "height_nm", "rho_ratio", "rho_ohm_m"]);
            for cs in sections {
                let r = resistivity_ratio(&cs, mat)?;
                t.push(vec![cs.width * 1e9, cs.height * 1e9, r, r * mat.rho0]);
            }
            ctx.emit("resistivity", &format!("resistivity {width:?} {height:?}"), &t)
        }
        Command::Maxcurrent { width, height, rise } => {
            let dt = rise.as_ref().map_or(Ok(sc.max_temperature_rise), |r| quantity(r, Dimension::Temperature, "rise"))?;
            let sections = cross_section(&ctx, width, height)?.map_or_else(sweep_sides, |c| vec![c]);
            let mut t = Table::new(&["width_nm", "height_nm", "rise_K", "rho_ratio", "j_max_A_m2", "i_max_mA"]);
            for cs in sections {
                let lim = max_current(&cs, mat, dt)?;
                t.push(vec![cs.width * 1e9, cs.height * 1e9, dt, lim.ratio, lim.j_max, lim.i_max * 1e3]);
            }
            ctx.emit("maxcurrent", &format!("maxcurrent {width:?} {height:?} {dt}"), &t)
        }
        Command::Trap => {
            let t = pipeline::trap(sc)?;
            let c = &t.c;
            let mut table = Table::new(&[
                "x_um", "y_um", "z_um", "d_um", "depth_uK", "f1_Hz", "f2_Hz", "f3_Hz", "f_radial_Hz", "b_min_G", "larmor_Hz",
            ]);
            let hz = |w: f64| w / (2.0 * PI);
            table.push(vec![
                c.r_min.x * 1e6,
                c.r_min.y * 1e6,
                c.r_min.z * 1e6,
                c.height_d * 1e6,
                joule_to_kelvin(c.depth) * 1e6,
                hz(c.omega[0]),
                hz(c.omega[1]),
                hz(c.omega[2]),
                hz(c.radial_omega()),
                c.b_min * 1e4,
                c.larmor,
            ]);
            ctx.emit("trap", "trap", &table)
        }
        Command::Corrugation { height, alpha, edge } => {
            let r = sc.roughness.clone().ok_or_else(|| ConfigError("roughness: the scenario has no [roughness] section".into()))?;
            if let Some(points) = edge {
                let spec = RoughnessSpectrum::from_rms(r.band_rms, *alpha, r.lambda_min, r.length, output::sub_seed(ctx.seed, "edge"))?;
                let p = edge_realization(&spec, *points)?;
                let mut t = Table::new(&["x_m", "dy_m"]);
                for (x, dy) in p.x.iter().zip(&p.dy) {
                    t.push(vec![*x, *dy]);
                }
                return ctx.emit("edge", &format!("edge {alpha} {points}"), &t);
            }
            let z = quantity(height, Dimension::Length, "height")?;
            let spec = RoughnessSpectrum::from_rms(r.band_rms, *alpha, r.lambda_min, r.band.1, 0)?;
            let mut t = Table::new(&["d_um", "alpha", "dbx_over_b0"]);
            t.push(vec![z * 1e6, *alpha, dbx_rms_relative(&spec, z)?]);
            ctx.emit("corrugation", &format!("corrugation {z} {alpha}"), &t)
        }
        Command::Casimir { z } => {
            let z = quantity(z, Dimension::Length, "z")?;
            let alpha = sc.species.alpha0;
            let stack = sc.wafer.clone().unwrap_or_else(WaferStack::oxide_on_silicon);
            let w = sc.trap_wire();
            let a = 0.5 * w.cross_section.height;
            let pre = cp_prefactor(alpha);
            let u_wire = if z > 2.0 * a { cylinder_u(z - a, a, alpha)? } else { f64::NAN };
            let mut t = Table::new(&["z_um", "U_wafer_uK", "U_additive_uK", "U_wire_uK", "F_wafer", "F_wire_a_over_r"]);
            let uw = planar_u(z, &stack, alpha)?;
            t.push(vec![
                z * 1e6,
                joule_to_kelvin(uw) * 1e6,
                joule_to_kelvin(planar_paa_u(z, &stack, alpha)?) * 1e6,
                joule_to_kelvin(u_wire) * 1e6,
                -uw * z.powi(4) / pre,
                if z > 2.0 * a { cylinder_f(a / (z - a))? } else { f64::NAN },
            ]);
            ctx.emit("casimir", &format!("casimir {z}"), &t)
        }
        Command::Lifetime => {
            let t = pipeline::trap(sc)?;
            let l = pipeline::lifetimes(sc, &t)?;
            let b = &l.budget;
            let mut table = Table::new(&["d_um", "tau_thermal_s", "tau_majorana_s", "tau_tunnel_s", "tau_total_s"]);
            table.push(vec![t.c.height_d * 1e6, 1.0 / b.gamma_th, 1.0 / b.gamma_majorana, 1.0 / b.gamma_tunnel, b.lifetime]);
            ctx.emit("lifetime", "lifetime", &table)
        }
        Command::Decoherence { height } => {
            let d = quantity(height, Dimension::Length, "height")?;
            let w = sc.trap_wire();
            let cs = w.cross_section;
            let rho = w.material.rho0 * resistivity_ratio(&cs, &w.material)?;
            let g = NoiseGeometry::straight_wire(w.central_length, cs.width, cs.height, rho, sc.noise_temperature)?;
            let z = cs.height + d;
            let th = thermal_spinflip_rate(&Vec3::new(0.0, 0.0, z), &g, &sc.species, &Vec3::x())?.rate;
            let mut t = Table::new(&["separation_over_d", "rate_per_s", "rate_over_thermal"]);
            for i in 0..=20 {
                let s = 0.5 * i as f64 * d;
                let r = decoherence_rate(&Vec3::new(-0.5 * s, 0.0, z), &Vec3::new(0.5 * s, 0.0, z), &g, &sc.species, &Vec3::x())?;
                t.push(vec![s / d, r, r / th]);
            }
            ctx.emit("decoherence", &format!("decoherence {d}"), &t)
        }
        Command::Gp { rough_seed } => {
            let t = pipeline::trap(sc)?;
            let smooth = pipeline::ground_state(sc, &t.potential, &t.c, None)?;
            let (state, frag) = match rough_seed {
                None => (smooth, f64::NAN),
                Some(k) => {
                    let rough = pipeline::rough_potential(sc, &t, ctx.seed, *k as usize)?;
                    let s = pipeline::ground_state(sc, &rough, &t.c, Some(&smooth))?;
                    let f = nanotrap::gpsolver::relative_fragmentation(&s, &smooth)?;
                    (s, f)
                }
            };
            if let Some(w) = &state.resolution_warning {
                eprintln!("warning: {w}");
            }
            let params = format!("gp {rough_seed:?}");
            let stats = nanotrap::gpsolver::line_density_stats(&state);
            let mut summary = Table::new(&["mu_nK", "energy_per_atom_nK", "residual", "iterations", "n1_std_pct", "frag_pct"]);
            summary.push(vec![
                joule_to_kelvin(state.mu - t.c.u_min) * 1e9,
                joule_to_kelvin(state.energy / state.n_atoms - t.c.u_min) * 1e9,
                state.residual,
                state.iterations as f64,
                stats.std_relative * 100.0,
                frag * 100.0,
            ]);
            let mut n1 = Table::new(&["x_um", "n1_per_um"]);
            for (x, n) in stats.x.iter().zip(&stats.n1) {
                n1.push(vec![x * 1e6, n * 1e-6]);
            }
            let (a, _, map) = state.density_map(1)?;
            let nz = state.dims[2];
            let mut dm = Table::new(&["x_um", "z_um", "n2_per_um2"]);
            for i in 0..a {
                for k in 0..nz {
                    let p = state.point(i, 0, k);
                    dm.push(vec![p.x * 1e6, p.z * 1e6, map[i * nz + k] * 1e-12]);
                }
            }
            for (name, table) in [("gp_summary", &summary), ("gp_n1", &n1), ("gp_density_xz", &dm)] {
                let path = ctx.save(name, &params, table)?;
                println!("wrote {}", path.display());
            }
            print!("{}", summary.render(&ctx.provenance(&params)));
            Ok(())
        }
        Command::Figure { n } => {
            for (name, table) in figures::figure(*n, sc, ctx.seed)? {
                let path = ctx.save(&name, &format!("figure {n}"), &table)?;
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Run { .. } => {
            let table = pipeline::report(sc, ctx.seed)?;
            let path = ctx.save("report", "run", &table)?;
            println!("wrote {}", path.display());
            print!("{}", table.render(&ctx.provenance("run")));
            Ok(())
        }
    }
}
