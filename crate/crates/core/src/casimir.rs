//! Casimir-Polder attraction in the static-polarizability (retarded) limit.
//!
//! Planar stacks (one dielectric layer on a dielectric half-space) go through the
//! TE/TM reflection-coefficient integral `F(eps1, eps2, t/z)`; a nanowire is modelled
//! as a perfectly conducting cylinder of radius a, with `F(a/R)` from the
//! modified-Bessel mode sum. The two are combined pairwise-additively, which is an
//! order-of-magnitude estimator, not an exact solution.

use std::f64::consts::PI;
use std::sync::LazyLock;

use crate::bessel::{LogBesselI, LogBesselK};
use crate::physcore::consts::{C, HBAR};
use crate::physcore::WaferStack;
use crate::quad::{integrate, integrate_panels, Tol};
use crate::{Error, Result, Vector3};

/// hbar c alpha0 / (2 pi): U = -prefactor * F / gap^4.
pub fn cp_prefactor(alpha0: f64) -> f64 {
    HBAR * C * alpha0 / (2.0 * PI)
}

fn bilayer_integrand(eps1: f64, eps2: f64, b: f64, p: f64, mu: f64) -> f64 {
    let m2 = mu * mu;
    let p1 = p * (1.0 + m2 * (eps1 - 1.0)).sqrt();
    let p2 = p * (1.0 + m2 * (eps2 - 1.0)).sqrt();
    let e = if b.is_infinite() { 0.0 } else { (-2.0 * p1 * b).exp() };
    let r1_te = (p - p1) / (p + p1);
    let r12_te = (p1 - p2) / (p1 + p2);
    let r1_tm = (p - p1 / eps1) / (p + p1 / eps1);
    let r12_tm = (p1 / eps1 - p2 / eps2) / (p1 / eps1 + p2 / eps2);
    let rte = (r1_te + r12_te * e) / (1.0 + r1_te * r12_te * e);
    let rtm = (r1_tm + r12_tm * e) / (1.0 + r1_tm * r12_tm * e);
    (1.0 - 0.5 * m2) * rtm - 0.5 * m2 * rte
}

/// Dimensionless planar factor for a layer `eps1` of thickness b*z on a half-space `eps2`.
///
/// `b_over_z = 0` gives the bare `eps2` interface, `f64::INFINITY` a thick `eps1` layer.
pub fn planar_f(eps1: f64, eps2: f64, b_over_z: f64) -> Result<f64> {
    if !(eps1 >= 1.0 && eps2 >= 1.0) || !(b_over_z >= 0.0) {
        return Err(Error::domain(format!(
            "planar F needs eps >= 1 and b/z >= 0, got ({eps1}, {eps2}, {b_over_z})"
        )));
    }
    let tol = Tol::rel(1e-9).with_abs(1e-14);
    let outer = integrate_panels(
        |p: f64| {
            if p == 0.0 {
                return 0.0;
            }
            let inner = integrate(|mu| bilayer_integrand(eps1, eps2, b_over_z, p, mu), 0.0, 1.0, tol);
            2.0 * p.powi(3) * (-2.0 * p).exp() * inner.value
        },
        &[0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 45.0],
        tol,
    );
    Ok(outer.value)
}

/// Planar potential at height `z` above the top surface of `stack`.
pub fn planar_u(z: f64, stack: &WaferStack, alpha0: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::domain(format!("height above the wafer must be positive, got {z}")));
    }
    stack.validate()?;
    let (e1, e2, t) = stack_params(stack);
    Ok(-cp_prefactor(alpha0) * planar_f(e1, e2, t / z)? / z.powi(4))
}

fn stack_params(stack: &WaferStack) -> (f64, f64, f64) {
    match stack.layers.first() {
        Some(l) => (l.epsilon, stack.substrate_epsilon, l.thickness),
        None => (stack.substrate_epsilon, stack.substrate_epsilon, 0.0),
    }
}

const LN_B_LO: f64 = -18.0;
const LN_B_HI: f64 = 7.0;
const LN_B_STEP: f64 = 0.1;

/// Natural cubic spline on a uniform grid.
#[derive(Debug, Clone)]
struct UniformSpline {
    x0: f64,
    h: f64,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl UniformSpline {
    fn new(x0: f64, h: f64, y: Vec<f64>) -> Self {
        let n = y.len();
        let mut m = vec![0.0; n];
        if n > 2 {
            // Thomas algorithm for the second derivatives, natural ends.
            let mut c = vec![0.0; n];
            let mut d = vec![0.0; n];
            for i in 1..n - 1 {
                let rhs = 6.0 * (y[i + 1] - 2.0 * y[i] + y[i - 1]) / (h * h);
                let denom = 4.0 - c[i - 1];
                c[i] = 1.0 / denom;
                d[i] = (rhs - d[i - 1]) / denom;
            }
            for i in (1..n - 1).rev() {
                m[i] = d[i] - c[i] * m[i + 1];
            }
        }
        UniformSpline { x0, h, y, m }
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.y.len();
        let u = ((x - self.x0) / self.h).clamp(0.0, (n - 1) as f64);
        let i = (u.floor() as usize).min(n - 2);
        let t = u - i as f64;
        let a = 1.0 - t;
        let h2 = self.h * self.h / 6.0;
        a * self.y[i] + t * self.y[i + 1] + h2 * ((a * a * a - a) * self.m[i] + (t * t * t - t) * self.m[i + 1])
    }
}

/// Planar Casimir-Polder potential with F tabulated over ln(t/z).
#[derive(Debug, Clone)]
pub struct PlanarCp {
    pub stack: WaferStack,
    pub alpha0: f64,
    thickness: f64,
    f_thin: f64,
    f_thick: f64,
    table: Option<UniformSpline>,
}

impl PlanarCp {
    pub fn new(stack: &WaferStack, alpha0: f64) -> Result<Self> {
        stack.validate()?;
        let (e1, e2, t) = stack_params(stack);
        let f_thin = planar_f(e1, e2, 0.0)?;
        let f_thick = planar_f(e1, e2, f64::INFINITY)?;
        let table = if t > 0.0 && e1 != e2 {
            let n = ((LN_B_HI - LN_B_LO) / LN_B_STEP).round() as usize + 1;
            let y = (0..n)
                .map(|i| planar_f(e1, e2, (LN_B_LO + i as f64 * LN_B_STEP).exp()))
                .collect::<Result<Vec<_>>>()?;
            Some(UniformSpline::new(LN_B_LO, LN_B_STEP, y))
        } else {
            None
        };
        Ok(PlanarCp { stack: stack.clone(), alpha0, thickness: t, f_thin, f_thick, table })
    }

    /// F at height z.
    pub fn factor(&self, z: f64) -> f64 {
        match &self.table {
            None => self.f_thin,
            Some(s) => {
                let lb = (self.thickness / z).ln();
                if lb <= LN_B_LO {
                    self.f_thin
                } else if lb >= LN_B_HI {
                    self.f_thick
                } else {
                    s.eval(lb)
                }
            }
        }
    }

    pub fn potential(&self, z: f64) -> Result<f64> {
        if !(z > 0.0) {
            return Err(Error::InsideSurface([0.0, 0.0, z]));
        }
        Ok(-cp_prefactor(self.alpha0) * self.factor(z) / z.powi(4))
    }
}

/// Mode-summed integrand of the cylinder factor at x, before the (1 - beta)^4 prefactor.
fn cylinder_integrand(beta: f64, x: f64) -> f64 {
    let t = beta * x;
    let mut m_cap = 32 + (2.0 * x) as usize;
    loop {
        let kx = LogBesselK::new(x, m_cap);
        let kt = LogBesselK::new(t, m_cap);
        let it = LogBesselI::new(t, m_cap);
        let mut sum = 0.0;
        let mut prev = f64::INFINITY;
        for m in 0..=m_cap {
            let mf = m as f64;
            let e = it.ln_i[m] - kt.ln_k[m] + 2.0 * kx.ln_k[m];
            let bracket = x * x + 0.5 * (1.0 - it.dlog[m] / kt.dlog[m]) * (mf * mf + x * x * kx.dlog[m] * kx.dlog[m]);
            let term = x * e.exp() * bracket * if m == 0 { 1.0 } else { 2.0 };
            sum += term;
            if m >= 10 && term < 1e-13 * sum && term <= prev {
                return sum;
            }
            prev = term;
        }
        m_cap *= 2;
        if m_cap > 1 << 20 {
            return sum;
        }
    }
}

/// Cylinder factor F(a/R) for a perfectly conducting cylinder of radius a.
pub fn cylinder_f(a_over_r: f64) -> Result<f64> {
    let beta = a_over_r;
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::domain(format!("a/R must lie in (0, 1), got {beta}")));
    }
    // The integrand decays like exp(-2 (1 - beta) x).
    let scale = 0.5 / (1.0 - beta);
    let mut pts = vec![0.0];
    let mut b = scale / 64.0;
    while b < 50.0 * scale {
        pts.push(b);
        b *= 2.0;
    }
    pts.push(50.0 * scale);
    let r = integrate_panels(|x| if x == 0.0 { 0.0 } else { cylinder_integrand(beta, x) }, &pts, Tol::rel(1e-8));
    Ok((1.0 - beta).powi(4) * r.value)
}

/// Cylinder potential at distance `r` from the axis of a cylinder of radius `a`.
pub fn cylinder_u(r: f64, a: f64, alpha0: f64) -> Result<f64> {
    if !(r > a) || !(a > 0.0) {
        return Err(Error::domain(format!("need R > a > 0, got R={r}, a={a}")));
    }
    Ok(-cp_prefactor(alpha0) * cylinder_f(a / r)? / (r - a).powi(4))
}

const CYL_LO: f64 = 1e-3;
const CYL_HI: f64 = 0.99;
const CYL_NODES: usize = 81;

fn cyl_node(i: usize) -> f64 {
    // uniform in logit(beta)
    let (u0, u1) = ((CYL_LO / (1.0 - CYL_LO)).ln(), (CYL_HI / (1.0 - CYL_HI)).ln());
    let u = u0 + (u1 - u0) * i as f64 / (CYL_NODES - 1) as f64;
    1.0 / (1.0 + (-u).exp())
}

static CYL_TABLE: LazyLock<UniformSpline> = LazyLock::new(|| {
    let (u0, u1) = ((CYL_LO / (1.0 - CYL_LO)).ln(), (CYL_HI / (1.0 - CYL_HI)).ln());
    let y = (0..CYL_NODES).map(|i| cylinder_f(cyl_node(i)).expect("node inside (0,1)")).collect();
    UniformSpline::new(u0, (u1 - u0) / (CYL_NODES - 1) as f64, y)
});

/// Interpolated F(a/R); tabulated once per process. Below 1e-3 the logarithmic
/// asymptote is matched to the table, above 0.99 the value is interpolated
/// linearly to the flat-conductor limit 3/4.
pub fn cylinder_f_fast(beta: f64) -> f64 {
    if beta <= CYL_LO {
        let f_lo = CYL_TABLE.y[0];
        return f_lo * CYL_LO.ln() / beta.ln();
    }
    if beta >= CYL_HI {
        let f_hi = *CYL_TABLE.y.last().unwrap();
        return f_hi + (0.75 - f_hi) * (beta - CYL_HI) / (1.0 - CYL_HI);
    }
    CYL_TABLE.eval((beta / (1.0 - beta)).ln())
}

/// A conducting cylinder of radius `radius` around the finite axis `start`..`end`.
/// Beyond the ends, the distance is measured to the nearer end point.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderCp {
    pub start: Vector3<f64>,
    pub end: Vector3<f64>,
    pub radius: f64,
    pub alpha0: f64,
}

impl CylinderCp {
    pub fn axis_distance(&self, r: &Vector3<f64>) -> f64 {
        let d = self.end - self.start;
        let s = ((r - self.start).dot(&d) / d.norm_squared()).clamp(0.0, 1.0);
        (r - (self.start + d * s)).norm()
    }

    pub fn potential(&self, r: &Vector3<f64>) -> Result<f64> {
        let big_r = self.axis_distance(r);
        if big_r <= self.radius {
            return Err(Error::InsideSurface([r.x, r.y, r.z]));
        }
        let gap = big_r - self.radius;
        Ok(-cp_prefactor(self.alpha0) * cylinder_f_fast(self.radius / big_r) / gap.powi(4))
    }
}

/// Which surfaces contribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CpChannels {
    None,
    Wafer,
    Wire,
    Both,
}

/// Pairwise-additive sum of a planar wafer (top at z = 0) and wire cylinders.
#[derive(Debug, Clone)]
pub struct CasimirModel {
    pub planar: Option<PlanarCp>,
    pub cylinders: Vec<CylinderCp>,
}

impl CasimirModel {
    pub fn none() -> Self {
        CasimirModel { planar: None, cylinders: Vec::new() }
    }

    pub fn with_channels(&self, ch: CpChannels) -> Self {
        let (p, w) = match ch {
            CpChannels::None => (false, false),
            CpChannels::Wafer => (true, false),
            CpChannels::Wire => (false, true),
            CpChannels::Both => (true, true),
        };
        CasimirModel {
            planar: if p { self.planar.clone() } else { None },
            cylinders: if w { self.cylinders.clone() } else { Vec::new() },
        }
    }

    pub fn wafer_part(&self, r: &Vector3<f64>) -> Result<f64> {
        match &self.planar {
            Some(p) => p.potential(r.z).map_err(|_| Error::InsideSurface([r.x, r.y, r.z])),
            None => Ok(0.0),
        }
    }

    pub fn wire_part(&self, r: &Vector3<f64>) -> Result<f64> {
        self.cylinders.iter().map(|c| c.potential(r)).sum()
    }

    pub fn potential(&self, r: &Vector3<f64>) -> Result<f64> {
        Ok(self.wafer_part(r)? + self.wire_part(r)?)
    }
}

/// Pairwise-additive planar estimate: the top layer alone (vacuum below it) plus the
/// substrate half-space at depth t. Used to gauge the additivity error of the stack.
pub fn planar_paa_u(z: f64, stack: &WaferStack, alpha0: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::domain("height above the wafer must be positive"));
    }
    let (e1, e2, t) = stack_params(stack);
    let layer = planar_f(e1, 1.0, t / z)? / z.powi(4);
    let sub = planar_f(e2, e2, 0.0)? / (z + t).powi(4);
    Ok(-cp_prefactor(alpha0) * (layer + sub))
}
