//! Gross-Pitaevskii ground states on a sampled trap potential.
//!
//! The energy `E = <psi|T + V|psi> + (g/2) int psi^4` is minimised on the sphere
//! `int psi^2 = N` by a preconditioned nonlinear conjugate-gradient method: each step
//! rotates psi towards a projected search direction by the angle that minimises the
//! energy exactly (the energy along the great circle is a trigonometric polynomial),
//! so the energy never increases. The kinetic operator is spectral (periodic box)
//! and the preconditioner combines the kinetic and potential parts.

use std::collections::VecDeque;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::fieldsolver::{Potential, PotentialGrid, Vec3};
use crate::physcore::consts::HBAR;
use crate::physcore::Species;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GpProblem {
    pub potential: PotentialGrid,
    pub n_atoms: f64,
    pub species: Species,
    /// Cells removed from the domain (replaced by a wall of height `wall` above the floor).
    pub excluded: Vec<bool>,
    /// J above the lowest admitted potential value; also caps the potential.
    pub wall: Option<f64>,
}

impl GpProblem {
    pub fn new(potential: PotentialGrid, n_atoms: f64, species: Species) -> Result<Self> {
        if !(n_atoms > 0.0) {
            return Err(Error::domain("atom number must be positive"));
        }
        if potential.dims.iter().any(|&d| d < 4) || potential.spacing.iter().any(|&h| !(h > 0.0)) {
            return Err(Error::domain("GP grid needs at least 4 points and positive spacing per axis"));
        }
        let excluded = potential.values.iter().map(|v| !v.is_finite()).collect();
        Ok(GpProblem { potential, n_atoms, species, excluded, wall: None })
    }

    /// Sample `pot` on a box of half-size `half` around `center`.
    pub fn sample<P: Potential + ?Sized>(
        pot: &P,
        center: Vec3,
        half: Vec3,
        dims: [usize; 3],
        n_atoms: f64,
        species: Species,
    ) -> Result<Self> {
        let spacing = Vec3::new(
            2.0 * half.x / dims[0] as f64,
            2.0 * half.y / dims[1] as f64,
            2.0 * half.z / dims[2] as f64,
        );
        let origin = center - half + 0.5 * spacing;
        Self::new(PotentialGrid::sample(pot, origin, spacing, dims), n_atoms, species)
    }

    /// Keep only the basin connected to `start` below `level`; every other cell
    /// below the level (the far side of a barrier) becomes a wall `2 (level - U_start)` high.
    /// `level` is lowered if the basin leaks into regions far below `U_start`, which
    /// happens when `level` was found on a different grid.
    pub fn with_basin(mut self, start: Vec3, level: f64) -> Result<Self> {
        let g = &self.potential;
        let f = (start - g.origin).component_div(&g.spacing);
        let s = [0, 1, 2].map(|a| (f[a].round().max(0.0) as usize).min(g.dims[a] - 1));
        let u0 = g.values[g.index(s[0], s[1], s[2])];
        if !u0.is_finite() || u0 >= level {
            return Err(Error::domain("basin start lies in an excluded cell or above the level"));
        }
        let leaks = |lv: f64, inside: &[bool]| {
            let floor = u0 - 0.5 * (lv - u0);
            g.values.iter().zip(inside).any(|(v, &b)| b && *v < floor)
        };
        let mut lv = level;
        let mut inside = basin_mask(g, s, lv);
        let mut tries = 0;
        while leaks(lv, &inside) {
            lv = u0 + 0.95 * (lv - u0);
            inside = basin_mask(g, s, lv);
            tries += 1;
            if tries > 200 {
                return Err(Error::domain("no closed basin around the start point"));
            }
        }
        for (i, v) in g.values.iter().enumerate() {
            if !v.is_finite() || (*v < lv && !inside[i]) {
                self.excluded[i] = true;
            }
        }
        self.wall = Some(2.0 * (lv - u0));
        Ok(self)
    }
}

/// Cells connected to `start` (6-connectivity) with potential below `level`.
pub fn basin_mask(grid: &PotentialGrid, start: [usize; 3], level: f64) -> Vec<bool> {
    let [nx, ny, nz] = grid.dims;
    let mut seen = vec![false; grid.len()];
    let s = grid.index(start[0], start[1], start[2]);
    if !(grid.values[s] < level) {
        return seen;
    }
    let mut queue = VecDeque::from([s]);
    seen[s] = true;
    while let Some(c) = queue.pop_front() {
        let (i, j, k) = (c / (ny * nz), (c / nz) % ny, c % nz);
        let mut nb = Vec::with_capacity(6);
        if i > 0 {
            nb.push(c - ny * nz);
        }
        if i + 1 < nx {
            nb.push(c + ny * nz);
        }
        if j > 0 {
            nb.push(c - nz);
        }
        if j + 1 < ny {
            nb.push(c + nz);
        }
        if k > 0 {
            nb.push(c - 1);
        }
        if k + 1 < nz {
            nb.push(c + 1);
        }
        for q in nb {
            if !seen[q] && grid.values[q] < level {
                seen[q] = true;
                queue.push_back(q);
            }
        }
    }
    seen
}

#[derive(Debug, Clone, PartialEq)]
pub struct GpOptions {
    /// Target for ||(H - mu) psi|| / ||mu psi||, with mu measured from the floor.
    pub tol: f64,
    pub max_iter: usize,
    /// Starting amplitude (any normalisation); Thomas-Fermi-like guess when absent.
    pub initial: Option<Vec<f64>>,
}

impl Default for GpOptions {
    fn default() -> Self {
        GpOptions { tol: 1e-4, max_iter: 20_000, initial: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundState {
    pub origin: Vec3,
    pub spacing: Vec3,
    pub dims: [usize; 3],
    /// Real amplitude, m^-3/2, normalised to `n_atoms`.
    pub psi: Vec<f64>,
    pub n_atoms: f64,
    /// Chemical potential in the potential's own energy reference, J.
    pub mu: f64,
    /// Lowest admitted potential value on the grid, J.
    pub floor: f64,
    /// Total energy in the potential's reference, J.
    pub energy: f64,
    pub e_kin: f64,
    pub e_pot: f64,
    pub e_int: f64,
    pub residual: f64,
    pub iterations: usize,
    /// Energy after every accepted step (measured from N * floor).
    pub energy_history: Vec<f64>,
    /// Set when the grid has fewer than 4 points per oscillator or healing length.
    pub resolution_warning: Option<String>,
}

impl GroundState {
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dims[1] + j) * self.dims[2] + k
    }

    pub fn point(&self, i: usize, j: usize, k: usize) -> Vec3 {
        self.origin + Vec3::new(i as f64 * self.spacing.x, j as f64 * self.spacing.y, k as f64 * self.spacing.z)
    }

    pub fn mu_above_floor(&self) -> f64 {
        self.mu - self.floor
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.x * self.spacing.y * self.spacing.z
    }

    pub fn norm(&self) -> f64 {
        self.psi.iter().map(|p| p * p).sum::<f64>() * self.cell_volume()
    }

    /// n1(x) = int int |psi|^2 dy dz, m^-1.
    pub fn line_density(&self) -> Vec<f64> {
        let [nx, ny, nz] = self.dims;
        let a = self.spacing.y * self.spacing.z;
        (0..nx).map(|i| self.psi[i * ny * nz..(i + 1) * ny * nz].iter().map(|p| p * p).sum::<f64>() * a).collect()
    }

    /// Column density integrated along `axis` (0, 1 or 2); row-major over the other two axes.
    pub fn density_map(&self, axis: usize) -> Result<(usize, usize, Vec<f64>)> {
        if axis > 2 {
            return Err(Error::domain("axis must be 0, 1 or 2"));
        }
        let [nx, ny, nz] = self.dims;
        let (a, b) = match axis {
            0 => (ny, nz),
            1 => (nx, nz),
            _ => (nx, ny),
        };
        let mut map = vec![0.0; a * b];
        for i in 0..nx {
            for j in 0..ny {
                for k in 0..nz {
                    let p = self.psi[self.index(i, j, k)];
                    let cell = match axis {
                        0 => j * nz + k,
                        1 => i * nz + k,
                        _ => i * ny + j,
                    };
                    map[cell] += p * p;
                }
            }
        }
        let h = self.spacing[axis];
        map.iter_mut().for_each(|v| *v *= h);
        Ok((a, b, map))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineStats {
    pub x: Vec<f64>,
    pub n1: Vec<f64>,
    /// Cloud extent: where n1 exceeds 5% of its peak.
    pub extent: (f64, f64),
    /// std(n1) / mean(n1) over the central 80% of the extent.
    pub std_relative: f64,
}

pub fn line_density_stats(state: &GroundState) -> LineStats {
    let n1 = state.line_density();
    let x: Vec<f64> = (0..state.dims[0]).map(|i| state.origin.x + i as f64 * state.spacing.x).collect();
    let peak = n1.iter().cloned().fold(0.0, f64::max);
    let lo = n1.iter().position(|&v| v >= 0.05 * peak).unwrap_or(0);
    let hi = n1.iter().rposition(|&v| v >= 0.05 * peak).unwrap_or(n1.len() - 1);
    let (x0, x1) = (x[lo], x[hi]);
    let margin = 0.1 * (x1 - x0);
    let sel: Vec<f64> = x.iter().zip(&n1).filter(|(xi, _)| **xi >= x0 + margin && **xi <= x1 - margin).map(|(_, v)| *v).collect();
    let m = sel.iter().sum::<f64>() / sel.len().max(1) as f64;
    let var = sel.iter().map(|v| (v - m).powi(2)).sum::<f64>() / sel.len().max(1) as f64;
    LineStats { x, n1, extent: (x0, x1), std_relative: if m > 0.0 { var.sqrt() / m } else { 0.0 } }
}

/// 3D complex FFT along the three axes of a row-major (x, y, z) array.
struct Fft3 {
    dims: [usize; 3],
    fwd: [Arc<dyn Fft<f64>>; 3],
    inv: [Arc<dyn Fft<f64>>; 3],
    line: Vec<Complex64>,
}

impl Fft3 {
    fn new(dims: [usize; 3]) -> Self {
        let mut p = FftPlanner::new();
        let fwd = dims.map(|n| p.plan_fft_forward(n));
        let inv = dims.map(|n| p.plan_fft_inverse(n));
        Fft3 { dims, fwd, inv, line: vec![Complex64::new(0.0, 0.0); dims[0].max(dims[1])] }
    }

    fn transform(&mut self, data: &mut [Complex64], inverse: bool) {
        let [nx, ny, nz] = self.dims;
        let plans = if inverse { &self.inv } else { &self.fwd };
        plans[2].process(data);
        for i in 0..nx {
            for k in 0..nz {
                let line = &mut self.line[..ny];
                for j in 0..ny {
                    line[j] = data[(i * ny + j) * nz + k];
                }
                plans[1].process(line);
                for j in 0..ny {
                    data[(i * ny + j) * nz + k] = line[j];
                }
            }
        }
        for j in 0..ny {
            for k in 0..nz {
                let line = &mut self.line[..nx];
                for i in 0..nx {
                    line[i] = data[(i * ny + j) * nz + k];
                }
                plans[0].process(line);
                for i in 0..nx {
                    data[(i * ny + j) * nz + k] = line[i];
                }
            }
        }
    }

    /// Apply a real, even Fourier multiplier to two real fields at once (packed as re/im).
    fn apply_pair(&mut self, a: &[f64], b: &[f64], mult: &[f64], out_a: &mut [f64], out_b: &mut [f64]) {
        // equalise magnitudes so round-off in one field does not swamp the other
        let na = a.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
        let nb = b.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
        let mut buf: Vec<Complex64> = a.iter().zip(b).map(|(&x, &y)| Complex64::new(x / na, y / nb)).collect();
        self.transform(&mut buf, false);
        let scale = 1.0 / buf.len() as f64;
        buf.iter_mut().zip(mult).for_each(|(c, m)| *c *= m * scale);
        self.transform(&mut buf, true);
        for (i, c) in buf.iter().enumerate() {
            out_a[i] = c.re * na;
            out_b[i] = c.im * nb;
        }
    }
}

fn wavenumbers(n: usize, h: f64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let s = if i <= n / 2 { i as f64 } else { i as f64 - n as f64 };
            2.0 * PI * s / (n as f64 * h)
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimise the energy of `p`.
pub fn solve_ground_state(p: &GpProblem, opts: &GpOptions) -> Result<GroundState> {
    let g0 = &p.potential;
    let [nx, ny, nz] = g0.dims;
    let n = nx * ny * nz;
    let dv = g0.spacing.x * g0.spacing.y * g0.spacing.z;
    let m = p.species.mass;
    let g = p.species.g_int();
    let n_atoms = p.n_atoms;

    // potential measured from the lowest admitted value, capped by the wall
    let floor = g0
        .values
        .iter()
        .zip(&p.excluded)
        .filter(|(v, e)| !**e && v.is_finite())
        .map(|(v, _)| *v)
        .fold(f64::INFINITY, f64::min);
    if !floor.is_finite() {
        return Err(Error::domain("every grid cell is excluded"));
    }
    let wall = p.wall.unwrap_or(f64::INFINITY);
    let finite_max = g0
        .values
        .iter()
        .zip(&p.excluded)
        .filter(|(v, e)| !**e && v.is_finite())
        .map(|(v, _)| *v - floor)
        .fold(0.0, f64::max);
    let wall = if wall.is_finite() { wall } else { finite_max };
    let v: Vec<f64> = g0
        .values
        .iter()
        .zip(&p.excluded)
        .map(|(u, &e)| if e || !u.is_finite() { wall } else { (u - floor).min(wall) })
        .collect();

    let (kx, ky, kz) = (wavenumbers(nx, g0.spacing.x), wavenumbers(ny, g0.spacing.y), wavenumbers(nz, g0.spacing.z));
    let c_kin = HBAR * HBAR / (2.0 * m);
    let mut kin = vec![0.0; n];
    for i in 0..nx {
        for j in 0..ny {
            for k in 0..nz {
                kin[(i * ny + j) * nz + k] = c_kin * (kx[i] * kx[i] + ky[j] * ky[j] + kz[k] * kz[k]);
            }
        }
    }
    let mut fft = Fft3::new(g0.dims);

    let mut psi = match &opts.initial {
        Some(init) if init.len() == n => init.iter().zip(&p.excluded).map(|(v, &e)| if e { 0.0 } else { v.abs() }).collect(),
        Some(_) => return Err(Error::domain("initial guess has the wrong length")),
        None => initial_guess(&v, &p.excluded, g, n_atoms, dv),
    };
    let nrm = (dot(&psi, &psi) * dv).sqrt();
    if !(nrm > 0.0) {
        return Err(Error::domain("initial guess vanishes"));
    }
    psi.iter_mut().for_each(|x| *x *= (n_atoms).sqrt() / nrm);

    let zeros = vec![0.0; n];
    let mut tpsi = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    fft.apply_pair(&psi, &zeros, &kin, &mut tpsi, &mut scratch);

    let mut r_prev: Option<Vec<f64>> = None;
    let mut z_prev: Vec<f64> = vec![0.0; n];
    let mut p_prev: Vec<f64> = vec![0.0; n];
    let mut history = Vec::new();
    let mut residual = f64::INFINITY;
    let mut lambda = 0.0;
    let mut iters = 0;
    let mut stalled = 0;
    let mut pr = vec![0.0; n];
    let mut ppsi = vec![0.0; n];
    let mut tq = vec![0.0; n];

    let energy = |psi: &[f64], tpsi: &[f64]| -> (f64, f64, f64) {
        let ek = dot(psi, tpsi) * dv;
        let ep = psi.iter().zip(&v).map(|(a, b)| a * a * b).sum::<f64>() * dv;
        let ei = 0.5 * g * psi.iter().map(|a| a.powi(4)).sum::<f64>() * dv;
        (ek, ep, ei)
    };

    while iters < opts.max_iter {
        if iters % 32 == 31 {
            fft.apply_pair(&psi, &zeros, &kin, &mut tpsi, &mut scratch);
        }
        let hpsi: Vec<f64> = (0..n).map(|i| tpsi[i] + (v[i] + g * psi[i] * psi[i]) * psi[i]).collect();
        lambda = dot(&psi, &hpsi) * dv / n_atoms;
        let r: Vec<f64> = (0..n).map(|i| hpsi[i] - lambda * psi[i]).collect();
        residual = (dot(&r, &r) / dot(&psi, &psi)).sqrt() / lambda.abs().max(f64::MIN_POSITIVE);
        if history.is_empty() {
            let (a, b, c) = energy(&psi, &tpsi);
            history.push(a + b + c);
        }
        if residual < opts.tol {
            break;
        }
        iters += 1;

        // preconditioner (alpha + V + g psi^2)^(-1/2) (alpha + T)^(-1) (alpha + V + g psi^2)^(-1/2)
        let alpha = lambda.max(1e-3 * c_kin / g0.spacing.max().powi(2));
        let s: Vec<f64> = (0..n).map(|i| 1.0 / (alpha + v[i] + g * psi[i] * psi[i]).sqrt()).collect();
        let sr: Vec<f64> = (0..n).map(|i| s[i] * r[i]).collect();
        let spsi: Vec<f64> = (0..n).map(|i| s[i] * psi[i]).collect();
        let tinv: Vec<f64> = kin.iter().map(|k| 1.0 / (alpha + k)).collect();
        fft.apply_pair(&sr, &spsi, &tinv, &mut pr, &mut ppsi);
        for i in 0..n {
            pr[i] *= s[i];
            ppsi[i] *= s[i];
        }
        let proj = dot(&psi, &pr) / dot(&psi, &ppsi);
        let z: Vec<f64> = (0..n).map(|i| pr[i] - proj * ppsi[i]).collect();

        let beta = match &r_prev {
            Some(rp) => {
                let num: f64 = (0..n).map(|i| (r[i] - rp[i]) * z[i]).sum();
                let den = dot(rp, &z_prev);
                if den > 0.0 {
                    (num / den).max(0.0)
                } else {
                    0.0
                }
            }
            None => 0.0,
        };
        let mut dir: Vec<f64> = (0..n).map(|i| -z[i] + beta * p_prev[i]).collect();
        let c = dot(&dir, &psi) / dot(&psi, &psi);
        dir.iter_mut().zip(&psi).for_each(|(d, x)| *d -= c * x);
        if dot(&dir, &r) >= 0.0 {
            dir = z.iter().map(|x| -x).collect();
            let c = dot(&dir, &psi) / dot(&psi, &psi);
            dir.iter_mut().zip(&psi).for_each(|(d, x)| *d -= c * x);
        }
        let dn = (dot(&dir, &dir) * dv).sqrt();
        if !(dn > 0.0) {
            break;
        }
        let q: Vec<f64> = dir.iter().map(|d| d * n_atoms.sqrt() / dn).collect();
        fft.apply_pair(&q, &zeros, &kin, &mut tq, &mut scratch);

        // energy along psi(theta) = cos(theta) psi + sin(theta) q
        let a0 = (dot(&psi, &tpsi) + psi.iter().zip(&v).map(|(a, b)| a * a * b).sum::<f64>()) * dv;
        let a1 = (dot(&psi, &tq) + (0..n).map(|i| psi[i] * v[i] * q[i]).sum::<f64>()) * dv;
        let a2 = (dot(&q, &tq) + q.iter().zip(&v).map(|(a, b)| a * a * b).sum::<f64>()) * dv;
        let mut b = [0.0; 5];
        for i in 0..n {
            let (x, y) = (psi[i], q[i]);
            let (x2, y2) = (x * x, y * y);
            b[0] += x2 * x2;
            b[1] += x2 * x * y;
            b[2] += x2 * y2;
            b[3] += x * y2 * y;
            b[4] += y2 * y2;
        }
        let h = 0.5 * g * dv;
        let de = |t: f64| {
            let (s, c) = t.sin_cos();
            let s2 = s * s;
            -s2 * a0
                + 2.0 * c * s * a1
                + s2 * a2
                + h * (-s2 * (1.0 + c * c) * b[0] + 4.0 * c * c * c * s * b[1] + 6.0 * c * c * s2 * b[2] + 4.0 * c * s2 * s * b[3] + s2 * s2 * b[4])
        };
        let theta = minimise_angle(&de);
        let gain = de(theta);
        if !(theta > 0.0) || !(gain < 0.0) {
            stalled += 1;
            r_prev = None;
            if stalled > 3 {
                break;
            }
            continue;
        }
        stalled = 0;
        let (st, ct) = theta.sin_cos();
        for i in 0..n {
            psi[i] = ct * psi[i] + st * q[i];
            tpsi[i] = ct * tpsi[i] + st * tq[i];
        }
        // keep the norm exact against round-off
        let nn = (dot(&psi, &psi) * dv / n_atoms).sqrt();
        psi.iter_mut().for_each(|x| *x /= nn);
        tpsi.iter_mut().for_each(|x| *x /= nn);
        let last = *history.last().unwrap();
        history.push(last + gain);
        r_prev = Some(r);
        z_prev = z;
        p_prev = q.iter().map(|x| x * dn / n_atoms.sqrt()).collect();
    }

    fft.apply_pair(&psi, &zeros, &kin, &mut tpsi, &mut scratch);
    let (e_kin, e_pot, e_int) = energy(&psi, &tpsi);
    let hpsi: Vec<f64> = (0..n).map(|i| tpsi[i] + (v[i] + g * psi[i] * psi[i]) * psi[i]).collect();
    lambda = if iters > 0 || lambda == 0.0 { dot(&psi, &hpsi) * dv / n_atoms } else { lambda };
    let r: Vec<f64> = (0..n).map(|i| hpsi[i] - lambda * psi[i]).collect();
    residual = residual.min((dot(&r, &r) / dot(&psi, &psi)).sqrt() / lambda.abs().max(f64::MIN_POSITIVE));
    if residual >= opts.tol {
        return Err(Error::NonConvergence { what: "GP ground state", iterations: iters, residual });
    }
    psi.iter_mut().for_each(|x| *x = x.abs());
    let resolution_warning = resolution_check(&v, g0, m, g, &psi);
    Ok(GroundState {
        origin: g0.origin,
        spacing: g0.spacing,
        dims: g0.dims,
        psi,
        n_atoms,
        mu: lambda + floor,
        floor,
        energy: e_kin + e_pot + e_int + n_atoms * floor,
        e_kin,
        e_pot: e_pot + n_atoms * floor,
        e_int,
        residual,
        iterations: iters,
        energy_history: history,
        resolution_warning,
    })
}

/// Oscillator lengths from the potential curvature at the lowest cell, and the
/// healing length at the peak density, compared with the grid spacing.
fn resolution_check(v: &[f64], grid: &PotentialGrid, m: f64, g: f64, psi: &[f64]) -> Option<String> {
    let [nx, ny, nz] = grid.dims;
    let c = (0..v.len()).min_by(|&a, &b| v[a].total_cmp(&v[b]))?;
    let idx = [c / (ny * nz), (c / nz) % ny, c % nz];
    let stride = [ny * nz, nz, 1];
    let mut issues = Vec::new();
    for a in 0..3 {
        let n = [nx, ny, nz][a];
        if idx[a] == 0 || idx[a] + 1 >= n {
            continue;
        }
        let h = grid.spacing[a];
        let curv = (v[c + stride[a]] + v[c - stride[a]] - 2.0 * v[c]) / (h * h);
        if curv > 0.0 {
            let len = (HBAR / (m * (curv / m).sqrt())).sqrt();
            if h > len / 4.0 {
                issues.push(format!("axis {a}: spacing {h:.3e} m vs oscillator length {len:.3e} m"));
            }
        }
    }
    let n_peak = psi.iter().fold(0.0f64, |acc, p| acc.max(p * p));
    if g > 0.0 && n_peak > 0.0 {
        let xi = HBAR / (2.0 * m * g * n_peak).sqrt();
        let h = grid.spacing.min();
        if h > xi / 4.0 {
            issues.push(format!("spacing {h:.3e} m vs healing length {xi:.3e} m"));
        }
    }
    (!issues.is_empty()).then(|| format!("under-resolved grid: {}", issues.join("; ")))
}

/// std/mean of `n1_rough / n1_smooth` over the central 80% of the smooth cloud:
/// the density modulation caused by a perturbation alone, without the smooth envelope.
pub fn relative_fragmentation(rough: &GroundState, smooth: &GroundState) -> Result<f64> {
    if rough.dims != smooth.dims || rough.origin != smooth.origin || rough.spacing != smooth.spacing {
        return Err(Error::domain("states must share the same grid"));
    }
    let a = line_density_stats(rough);
    let b = line_density_stats(smooth);
    let (x0, x1) = b.extent;
    let margin = 0.1 * (x1 - x0);
    let ratio: Vec<f64> = b
        .x
        .iter()
        .zip(a.n1.iter().zip(&b.n1))
        .filter(|(x, (_, s))| **x >= x0 + margin && **x <= x1 - margin && **s > 0.0)
        .map(|(_, (r, s))| r / s)
        .collect();
    if ratio.is_empty() {
        return Err(Error::domain("smooth cloud has no extent"));
    }
    let mean = ratio.iter().sum::<f64>() / ratio.len() as f64;
    let var = ratio.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / ratio.len() as f64;
    Ok(var.sqrt() / mean)
}

/// Angle in (0, pi/2] minimising `de`, by a coarse scan and golden-section polish.
fn minimise_angle<F: Fn(f64) -> f64>(de: &F) -> f64 {
    // steps shrink towards convergence, so scan logarithmically
    let mut best = (0.0, 0.0);
    let n = 160;
    let mut prev_t = 0.0;
    let mut bracket = (0.0, 0.0);
    for i in 0..=n {
        let t = 0.5 * PI * 10f64.powf(-12.0 * (1.0 - i as f64 / n as f64));
        let e = de(t);
        if e < best.1 {
            best = (t, e);
            bracket = (prev_t, t);
        }
        prev_t = t;
    }
    if best.0 == 0.0 {
        return 0.0;
    }
    // extend the bracket to the next scan point on the right
    let hi = (best.0 * 10f64.powf(12.0 / n as f64)).min(0.5 * PI);
    let (mut a, mut b) = (bracket.0, hi);
    let gr = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let c = b - gr * (b - a);
        let d = a + gr * (b - a);
        if de(c) < de(d) {
            b = d;
        } else {
            a = c;
        }
        if b - a < 1e-10 * b {
            break;
        }
    }
    let t = 0.5 * (a + b);
    if de(t) < best.1 {
        t
    } else {
        best.0
    }
}

/// Thomas-Fermi profile plus a broad tail so no admitted cell starts at zero.
fn initial_guess(v: &[f64], excluded: &[bool], g: f64, n_atoms: f64, dv: f64) -> Vec<f64> {
    let count = |mu: f64| v.iter().zip(excluded).filter(|(_, e)| !**e).map(|(u, _)| (mu - u).max(0.0)).sum::<f64>() * dv / g;
    let mu = if g > 0.0 {
        let (mut lo, mut hi) = (0.0, v.iter().cloned().fold(0.0, f64::max).max(1e-40));
        while count(hi) < n_atoms && hi < 1e10 * (1.0 + lo) {
            hi *= 2.0;
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if count(mid) < n_atoms {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    } else {
        0.0
    };
    // tail width: at least the lowest percentile of the potential
    let mut admitted: Vec<f64> = v.iter().zip(excluded).filter(|(_, e)| !**e).map(|(u, _)| *u).collect();
    admitted.sort_by(f64::total_cmp);
    let scale = mu.max(admitted[admitted.len() / 100]).max(f64::MIN_POSITIVE);
    let amp = if g > 0.0 { (mu / g).sqrt() } else { 1.0 };
    v.iter()
        .zip(excluded)
        .map(|(u, &e)| {
            if e {
                0.0
            } else {
                let tf = if g > 0.0 { ((mu - u).max(0.0) / g).sqrt() } else { 0.0 };
                tf + amp * 0.05 * (-u / scale).exp()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    #[test]
    fn paired_transform_keeps_fields_apart() {
        let dims = [8, 6, 4];
        let n = 192;
        let a: Vec<f64> = (0..n).map(|i| ((i * 7919) % 13) as f64).collect();
        let b: Vec<f64> = (0..n).map(|i| ((i * 31) % 5) as f64).collect();
        let mut f = Fft3::new(dims);
        let (mut oa, mut ob) = (vec![0.0; n], vec![0.0; n]);
        f.apply_pair(&a, &b, &vec![1.0; n], &mut oa, &mut ob);
        let e: f64 = (0..n).map(|i| (oa[i] - a[i]).abs() + (ob[i] - b[i]).abs()).sum();
        assert!(e < 1e-9, "{e}");
        let dims = [32, 32, 32];
        let n = 32768;
        let kx = wavenumbers(32, 0.1);
        let mut m = vec![0.0; n];
        for i in 0..32 { for j in 0..32 { for k in 0..32 { m[(i*32+j)*32+k] = 1.0/(1.0 + kx[i]*kx[i]+kx[j]*kx[j]+kx[k]*kx[k]); }}}
        let a: Vec<f64> = (0..n).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
        let b: Vec<f64> = (0..n).map(|i| ((i * 31) % 5) as f64).collect();
        let mut f = Fft3::new(dims);
        let (mut oa, mut ob) = (vec![0.0; n], vec![0.0; n]);
        f.apply_pair(&a, &b, &m, &mut oa, &mut ob);
        let (mut oa2, mut ob2) = (vec![0.0; n], vec![0.0; n]);
        f.apply_pair(&a, &vec![0.0; n], &m, &mut oa2, &mut ob2);
        let e: f64 = (0..n).map(|i| (oa[i] - oa2[i]).abs()).sum();
        assert!(dot(&a, &oa) > 0.0 && e < 1e-9, "{} {e}", dot(&a, &oa));
    }
}
