//! Locating and characterising the trap: minimum, curvature, and depth.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use nalgebra::{Matrix3, SymmetricEigen};

use super::{Potential, TrapPotential, Vec3};
use crate::physcore::consts::HBAR;
use crate::{Error, Result};

/// Minimise `f` with the Nelder-Mead simplex method from `x0` with initial steps `step`.
pub fn nelder_mead<F: FnMut(&Vec3) -> f64>(mut f: F, x0: Vec3, step: Vec3, iters: usize, xtol: f64) -> Vec3 {
    let mut pts = vec![x0];
    for i in 0..3 {
        let mut p = x0;
        p[i] += step[i];
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(&mut f).collect();
    for _ in 0..iters {
        let mut idx = [0usize, 1, 2, 3];
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        let (best, worst, second) = (idx[0], idx[3], idx[2]);
        let size = (0..4).map(|i| (pts[i] - pts[best]).abs().max()).fold(0.0, f64::max);
        if size < xtol {
            break;
        }
        let centroid = (pts[idx[0]] + pts[idx[1]] + pts[idx[2]]) / 3.0;
        let refl = centroid + (centroid - pts[worst]);
        let fr = f(&refl);
        if fr < vals[best] {
            let exp = centroid + (centroid - pts[worst]) * 2.0;
            let fe = f(&exp);
            if fe < fr {
                pts[worst] = exp;
                vals[worst] = fe;
            } else {
                pts[worst] = refl;
                vals[worst] = fr;
            }
        } else if fr < vals[second] {
            pts[worst] = refl;
            vals[worst] = fr;
        } else {
            let con = centroid + (pts[worst] - centroid) * 0.5;
            let fc = f(&con);
            if fc < vals[worst] {
                pts[worst] = con;
                vals[worst] = fc;
            } else {
                let b = pts[best];
                for i in 0..4 {
                    if i != best {
                        pts[i] = b + (pts[i] - b) * 0.5;
                        vals[i] = f(&pts[i]);
                    }
                }
            }
        }
    }
    let best = (0..4).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    pts[best]
}

/// Central-difference Hessian with per-axis steps.
pub fn hessian<P: Potential + ?Sized>(pot: &P, r: &Vec3, h: &Vec3) -> Result<Matrix3<f64>> {
    let e = |dx: f64, dy: f64, dz: f64| pot.energy(&(r + Vec3::new(dx, dy, dz)));
    let u0 = pot.energy(r)?;
    let mut m = Matrix3::zeros();
    let d = |i: usize, s: f64| {
        let mut v = Vec3::zeros();
        v[i] = s * h[i];
        v
    };
    for i in 0..3 {
        let p = d(i, 1.0);
        m[(i, i)] = (e(p.x, p.y, p.z)? - 2.0 * u0 + e(-p.x, -p.y, -p.z)?) / (h[i] * h[i]);
        for j in i + 1..3 {
            let (a, b) = (d(i, 1.0), d(j, 1.0));
            let pp = a + b;
            let pm = a - b;
            let v = (e(pp.x, pp.y, pp.z)? - e(pm.x, pm.y, pm.z)? - e(-pm.x, -pm.y, -pm.z)? + e(-pp.x, -pp.y, -pp.z)?)
                / (4.0 * h[i] * h[j]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(m)
}

fn gradient<P: Potential + ?Sized>(pot: &P, r: &Vec3, h: &Vec3) -> Result<Vec3> {
    let mut g = Vec3::zeros();
    for i in 0..3 {
        let mut d = Vec3::zeros();
        d[i] = h[i];
        g[i] = (pot.energy(&(r + d))? - pot.energy(&(r - d))?) / (2.0 * h[i]);
    }
    Ok(g)
}

/// Polish a minimum with Newton steps on finite-difference derivatives.
pub fn newton_refine<P: Potential + ?Sized>(pot: &P, mut r: Vec3, h: &Vec3, steps: usize) -> Result<Vec3> {
    for _ in 0..steps {
        let g = gradient(pot, &r, h)?;
        let hm = hessian(pot, &r, h)?;
        let Some(inv) = hm.try_inverse() else { break };
        let dx = -(inv * g);
        // Do not let a Newton step leave the neighbourhood of the simplex result.
        let lim = 20.0 * h.max();
        let dx = if dx.norm() > lim { dx * (lim / dx.norm()) } else { dx };
        let u0 = pot.energy(&r)?;
        match pot.energy(&(r + dx)) {
            Ok(u1) if u1 <= u0 => r += dx,
            _ => break,
        }
        if dx.norm() < 1e-6 * h.min() {
            break;
        }
    }
    Ok(r)
}

/// Potential sampled on a regular grid; `values[(i * ny + j) * nz + k]` at
/// origin + (i dx, j dy, k dz). Points inside a body hold `-inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialGrid {
    pub origin: Vec3,
    pub spacing: Vec3,
    pub dims: [usize; 3],
    pub values: Vec<f64>,
}

impl PotentialGrid {
    pub fn sample<P: Potential + ?Sized>(pot: &P, origin: Vec3, spacing: Vec3, dims: [usize; 3]) -> Self {
        let mut values = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
        for i in 0..dims[0] {
            for j in 0..dims[1] {
                for k in 0..dims[2] {
                    let r = origin + Vec3::new(i as f64 * spacing.x, j as f64 * spacing.y, k as f64 * spacing.z);
                    values.push(pot.energy(&r).unwrap_or(f64::NEG_INFINITY));
                }
            }
        }
        PotentialGrid { origin, spacing, dims, values }
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dims[1] + j) * self.dims[2] + k
    }

    pub fn point(&self, i: usize, j: usize, k: usize) -> Vec3 {
        self.origin + Vec3::new(i as f64 * self.spacing.x, j as f64 * self.spacing.y, k as f64 * self.spacing.z)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Trilinear interpolation; `None` outside the grid or next to excluded cells.
    pub fn interpolate(&self, r: &Vec3) -> Option<f64> {
        let f = (r - self.origin).component_div(&self.spacing);
        let mut base = [0usize; 3];
        let mut t = [0.0; 3];
        for a in 0..3 {
            if !(f[a] >= 0.0) || f[a] > (self.dims[a] - 1) as f64 {
                return None;
            }
            base[a] = (f[a].floor() as usize).min(self.dims[a].saturating_sub(2));
            t[a] = f[a] - base[a] as f64;
        }
        let mut acc = 0.0;
        for c in 0..8 {
            let (di, dj, dk) = (c >> 2 & 1, c >> 1 & 1, c & 1);
            let w = (if di == 1 { t[0] } else { 1.0 - t[0] })
                * (if dj == 1 { t[1] } else { 1.0 - t[1] })
                * (if dk == 1 { t[2] } else { 1.0 - t[2] });
            let ii = (base[0] + di).min(self.dims[0] - 1);
            let jj = (base[1] + dj).min(self.dims[1] - 1);
            let kk = (base[2] + dk).min(self.dims[2] - 1);
            let v = self.values[self.index(ii, jj, kk)];
            if !v.is_finite() {
                return None;
            }
            acc += w * v;
        }
        Some(acc)
    }
}

impl Potential for PotentialGrid {
    fn energy(&self, r: &Vec3) -> Result<f64> {
        self.interpolate(r).ok_or(Error::InsideSurface([r.x, r.y, r.z]))
    }
}

/// Result of a minimax flood from a start cell to an escape set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spill {
    /// Lowest energy at which the start basin connects to the escape set.
    pub level: f64,
    /// Cell at which the escape set was first reached.
    pub exit: [usize; 3],
    /// Highest cell on the minimax path, i.e. the saddle.
    pub saddle: [usize; 3],
}

/// Priority flood: the lowest energy E such that cells with U <= E connect `start`
/// to a cell for which `escape` is true (6-connectivity). Equivalent to bisecting a
/// threshold flood fill, but exact on the grid.
pub fn spill_level<F: Fn(usize, usize, usize) -> bool>(grid: &PotentialGrid, start: [usize; 3], escape: F) -> Option<Spill> {
    let [nx, ny, nz] = grid.dims;
    let mut level = vec![f64::INFINITY; grid.len()];
    let mut from = vec![usize::MAX; grid.len()];
    let mut done = vec![false; grid.len()];
    let s = grid.index(start[0], start[1], start[2]);
    level[s] = grid.values[s];
    let key = |v: f64| Reverse(ordered(v));
    let mut heap = BinaryHeap::new();
    heap.push((key(level[s]), s));
    while let Some((_, c)) = heap.pop() {
        if done[c] {
            continue;
        }
        done[c] = true;
        let k = c % nz;
        let j = (c / nz) % ny;
        let i = c / (ny * nz);
        if escape(i, j, k) {
            // Walk back to find the highest cell on the path.
            let mut best = c;
            let mut p = c;
            while p != usize::MAX {
                if grid.values[p] > grid.values[best] || !grid.values[best].is_finite() {
                    best = p;
                }
                p = from[p];
            }
            let un = |q: usize| [q / (ny * nz), (q / nz) % ny, q % nz];
            return Some(Spill { level: level[c], exit: [i, j, k], saddle: un(best) });
        }
        let mut push = |q: usize| {
            if !done[q] {
                let l = level[c].max(grid.values[q]);
                if l < level[q] {
                    level[q] = l;
                    from[q] = c;
                    heap.push((key(l), q));
                }
            }
        };
        if i > 0 {
            push(c - ny * nz);
        }
        if i + 1 < nx {
            push(c + ny * nz);
        }
        if j > 0 {
            push(c - nz);
        }
        if j + 1 < ny {
            push(c + nz);
        }
        if k > 0 {
            push(c - 1);
        }
        if k + 1 < nz {
            push(c + 1);
        }
    }
    None
}

/// Total order on f64 for the heap (-inf sorts first).
fn ordered(v: f64) -> i64 {
    let b = v.to_bits() as i64;
    if b < 0 {
        b ^ i64::MAX
    } else {
        b
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthOptions {
    /// Transverse grid spacing as a fraction of the trap height.
    pub transverse_fraction: f64,
    /// Spacing along the wire axis (x), m.
    pub axial_spacing: f64,
    /// Extra length beyond the central segment ends, m.
    pub axial_margin: f64,
    /// Transverse half-extent of the grid in units of the trap height.
    pub extent: f64,
}

impl Default for DepthOptions {
    fn default() -> Self {
        DepthOptions { transverse_fraction: 1.0 / 20.0, axial_spacing: 0.1e-6, axial_margin: 5e-6, extent: 3.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrapCharacterization {
    pub r_min: Vec3,
    /// Height of the minimum above the top of the trapping wire, m.
    pub height_d: f64,
    /// Principal angular frequencies, ascending, rad/s.
    pub omega: [f64; 3],
    /// Columns: principal axes matching `omega`.
    pub axes: Matrix3<f64>,
    pub u_min: f64,
    /// J
    pub depth: f64,
    /// Where the spill path crosses its highest point.
    pub saddle: Vec3,
    pub b_min: f64,
    pub larmor: f64,
}

impl TrapCharacterization {
    /// Geometric mean of the two largest frequencies, rad/s.
    pub fn radial_omega(&self) -> f64 {
        (self.omega[1] * self.omega[2]).sqrt()
    }

    /// Angular frequency of the principal axis closest to the given direction.
    pub fn omega_along(&self, dir: &Vec3) -> f64 {
        let mut best = (0.0, 0.0);
        for i in 0..3 {
            let c = self.axes.column(i).dot(dir).abs();
            if c > best.0 {
                best = (c, self.omega[i]);
            }
        }
        best.1
    }
}

/// Middle segment of the first wire's path (the central bar of a Z or U wire).
fn central_segment(pot: &TrapPotential) -> Result<(Vec3, Vec3)> {
    let w = pot.cfg.wires.first().ok_or_else(|| Error::NoMinimum("no wires in configuration".into()))?;
    let n = w.path.len() - 1;
    let i = n / 2 - usize::from(n % 2 == 0 && n > 1);
    Ok((w.path[i], w.path[i + 1]))
}

/// Find the trap minimum above the middle of the central segment of the first wire.
pub fn find_minimum(pot: &TrapPotential) -> Result<Vec3> {
    let (a, b) = central_segment(pot)?;
    let mid = 0.5 * (a + b);
    let top = pot.cfg.wires[0].top();
    // log-spaced scan in height above the wire top
    let n = 400;
    let (h0, h1): (f64, f64) = (2e-9, 200e-6);
    let scan: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let h = h0 * (h1 / h0).powf(i as f64 / (n - 1) as f64);
            let z = top + h;
            (z, pot.energy(&Vec3::new(mid.x, mid.y, z)).unwrap_or(f64::NEG_INFINITY))
        })
        .collect();
    let mut cand: Option<(f64, f64)> = None;
    for w in scan.windows(3) {
        if w[1].1.is_finite() && w[1].1 < w[0].1 && w[1].1 <= w[2].1 && cand.map_or(true, |c| w[1].1 < c.1) {
            cand = Some((w[1].0, w[1].1));
        }
    }
    let Some((z0, _)) = cand else {
        let profile = scan
            .iter()
            .step_by(40)
            .map(|(z, u)| format!("z={z:.3e} m U={u:.3e} J"))
            .collect::<Vec<_>>()
            .join("; ");
        return Err(Error::NoMinimum(format!("no local minimum along z above the wire: {profile}")));
    };
    let d = z0 - top;
    let x0 = Vec3::new(mid.x, mid.y, z0);
    // keep the search local: the leads carry far-away field zeros of their own
    let half_x = 0.5 * (b.x - a.x).abs() + 2.0 * d;
    let f = |r: &Vec3| {
        let q = r - x0;
        if q.x.abs() > half_x || q.y.abs() > 2.0 * d || q.z.abs() > 0.9 * d {
            return f64::INFINITY;
        }
        pot.energy(r).unwrap_or(f64::INFINITY)
    };
    let step = Vec3::new(0.5 * d, 0.1 * d, 0.1 * d);
    let mut r = nelder_mead(f, x0, step, 4000, 1e-5 * d);
    r = nelder_mead(f, r, step * 0.05, 4000, 1e-7 * d);
    let h = Vec3::new(d * 1e-2, d * 1e-3, d * 1e-3);
    newton_refine(pot, r, &h, 8)
}

/// Locate the trap, its principal frequencies and the depth to the surface.
pub fn characterize_trap(pot: &TrapPotential, opts: &DepthOptions) -> Result<TrapCharacterization> {
    let r_min = find_minimum(pot)?;
    let top = pot.cfg.wires[0].top();
    let d = r_min.z - top;
    let h = Vec3::new(d * 2e-2, d * 5e-3, d * 5e-3);
    let hm = hessian(pot, &r_min, &h)?;
    let eig = SymmetricEigen::new(hm);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    if eig.eigenvalues[order[0]] < 0.0 {
        return Err(Error::Saddle(eig.eigenvalues[order[0]]));
    }
    let m = pot.species.mass;
    let omega = order.map(|i| (eig.eigenvalues[i] / m).sqrt());
    let axes = Matrix3::from_columns(&order.map(|i| eig.eigenvectors.column(i).into_owned()));
    let u_min = pot.energy(&r_min)?;
    let b_min = pot.field(&r_min)?.norm();
    let (depth, saddle) = trap_depth(pot, &r_min, u_min, d, opts)?;
    Ok(TrapCharacterization {
        r_min,
        height_d: d,
        omega,
        axes,
        u_min,
        depth,
        saddle,
        b_min,
        larmor: pot.species.moment() * b_min / HBAR,
    })
}

/// Grid used for the depth flood around a trap at `r_min`, height `d` above the wire.
pub fn depth_grid(pot: &TrapPotential, r_min: &Vec3, d: f64, opts: &DepthOptions) -> Result<PotentialGrid> {
    let (a, b) = central_segment(pot)?;
    let x_lo = a.x.min(b.x) - opts.axial_margin;
    let x_hi = a.x.max(b.x) + opts.axial_margin;
    let ds = opts.transverse_fraction * d;
    let nx = ((x_hi - x_lo) / opts.axial_spacing).ceil() as usize + 1;
    let half = opts.extent * d;
    let ny = (2.0 * half / ds).ceil() as usize + 1;
    let z_hi = r_min.z + half;
    let nz = ((z_hi - 0.5 * ds) / ds).ceil() as usize + 1;
    let origin = Vec3::new(x_lo, r_min.y - half, 0.5 * ds);
    let spacing = Vec3::new((x_hi - x_lo) / (nx - 1) as f64, ds, ds);
    Ok(PotentialGrid::sample(pot, origin, spacing, [nx, ny, nz]))
}

/// Depth of the trap: lowest spill energy from the minimum into the
/// surface-adjacent region, minus the minimum energy.
pub fn trap_depth(pot: &TrapPotential, r_min: &Vec3, u_min: f64, d: f64, opts: &DepthOptions) -> Result<(f64, Vec3)> {
    let grid = depth_grid(pot, r_min, d, opts)?;
    let f = (r_min - grid.origin).component_div(&grid.spacing);
    let start = [0, 1, 2].map(|a| (f[a].round().max(0.0) as usize).min(grid.dims[a] - 1));
    let reach = grid.spacing.y.max(grid.spacing.z);
    let nz = grid.dims[2];
    let escape = |i: usize, j: usize, k: usize| {
        let v = grid.values[grid.index(i, j, k)];
        if !v.is_finite() {
            return true;
        }
        let p = grid.point(i, j, k);
        if p.z <= reach * (1.0 + 1e-9) || pot.wire_clearance(&p) <= reach {
            return true;
        }
        // Inside the Casimir-Polder basin: below the trap bottom and still falling downwards.
        k > 0 && k < nz && v < u_min && grid.values[grid.index(i, j, k - 1)] < v
    };
    let spill = spill_level(&grid, start, escape)
        .ok_or_else(|| Error::NoMinimum("trap basin never reaches the surface inside the depth grid".into()))?;
    let s = spill.saddle;
    Ok(((spill.level - u_min).max(0.0), grid.point(s[0], s[1], s[2])))
}
