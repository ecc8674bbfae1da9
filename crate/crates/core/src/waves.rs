//! Analytic and semi-analytic wave solutions.
//!
//! Phase convention: crests travel in `+x` and `η = (H/2) cos(ωt - kx)` for
//! linear waves. The stream-function wave places its crest at `x = ct + x0`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::spectral::{Field, Grid};

/// Standard gravitational acceleration.
pub const GRAVITY: f64 = 9.81;

const DISPERSION_TOL: f64 = 1e-13;

/// Linear wave parameters with `ω² = g k tanh(kh)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WaveParameters {
    pub height: f64,
    pub period: f64,
    pub length: f64,
    pub depth: f64,
    pub k: f64,
    pub omega: f64,
    pub c: f64,
    pub g: f64,
}

impl WaveParameters {
    pub fn from_period(height: f64, period: f64, depth: f64, g: f64) -> Result<Self> {
        Ok(solve_dispersion(period, depth, g)?.with_height(height))
    }

    pub fn from_length(height: f64, length: f64, depth: f64, g: f64) -> Result<Self> {
        if !(length > 0.0 && depth > 0.0 && g > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "wavelength {length} and depth {depth} must be positive"
            )));
        }
        let k = 2.0 * PI / length;
        let omega = (g * k * (k * depth).tanh()).sqrt();
        Ok(Self {
            height,
            period: 2.0 * PI / omega,
            length,
            depth,
            k,
            omega,
            c: omega / k,
            g,
        })
    }

    pub fn with_height(mut self, height: f64) -> Self {
        self.height = height;
        self
    }

    pub fn kh(&self) -> f64 {
        self.k * self.depth
    }

    pub fn steepness(&self) -> f64 {
        self.height / self.length
    }

    /// Steepness as a fraction of the breaking limit.
    pub fn breaking_fraction(&self) -> f64 {
        self.steepness() / battjes_max_steepness(self.kh())
    }

    pub fn exceeds_breaking_limit(&self) -> bool {
        self.breaking_fraction() > 1.0
    }
}

/// Solves the linear dispersion relation for given period and depth.
pub fn solve_dispersion(period: f64, depth: f64, g: f64) -> Result<WaveParameters> {
    if !(period > 0.0 && depth > 0.0 && g > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "period {period} and depth {depth} must be positive"
        )));
    }
    let omega = 2.0 * PI / period;
    let k = wavenumber(omega, depth, g)?;
    Ok(WaveParameters {
        height: 0.0,
        period,
        length: 2.0 * PI / k,
        depth,
        k,
        omega,
        c: omega / k,
        g,
    })
}

/// Root of `g k tanh(kh) = ω²` by bracketed Newton iteration.
pub fn wavenumber(omega: f64, depth: f64, g: f64) -> Result<f64> {
    let target = omega * omega / g;
    let f = |k: f64| k * (k * depth).tanh() - target;
    // tanh(x) <= min(1, x) gives the lower bound, monotonicity the rest
    let mut lo = target.max(omega / (g * depth).sqrt());
    let mut hi = 2.0 * lo;
    while f(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    let mut k = target.max(lo);
    for _ in 0..100 {
        let th = (k * depth).tanh();
        let r = k * th - target;
        if r.abs() <= DISPERSION_TOL * target {
            return Ok(k);
        }
        if r < 0.0 {
            lo = k;
        } else {
            hi = k;
        }
        let dr = th + k * depth * (1.0 - th * th);
        let mut next = k - r / dr;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if next == k {
            return Ok(k);
        }
        k = next;
    }
    Err(Error::NoConvergence {
        what: "dispersion relation",
        iterations: 100,
        residual: f(k).abs(),
    })
}

/// Maximum steepness `H/L` before breaking.
pub fn battjes_max_steepness(kh: f64) -> f64 {
    0.1401 * (0.8863 * kh).tanh()
}

/// Pointwise surface elevation and velocity of a wave solution.
pub trait WaveKinematics {
    fn elevation(&self, x: f64, t: f64) -> f64;
    /// `(u, w)` at elevation `z` (zero at still water level).
    fn velocity(&self, x: f64, z: f64, t: f64) -> (f64, f64);
}

/// Surface elevation and velocities of `wave` sampled on the σ-grid whose
/// column follows the wave's own surface over still depth `h`.
pub fn sample<W: WaveKinematics + ?Sized>(
    wave: &W,
    grid: &Grid,
    h: &[f64],
    t: f64,
) -> (Vec<f64>, Field, Field) {
    let xs = grid.x.nodes();
    let sigma = grid.z.sigma();
    let eta: Vec<f64> = xs.iter().map(|&x| wave.elevation(x, t)).collect();
    let mut u = grid.zeros();
    let mut w = grid.zeros();
    for (i, &x) in xs.iter().enumerate() {
        let d = h[i] + eta[i];
        for (m, s) in sigma.iter().enumerate() {
            let (a, b) = wave.velocity(x, -h[i] + s * d, t);
            u[[i, m]] = a;
            w[[i, m]] = b;
        }
    }
    (eta, u, w)
}

/// Like [`sample`], but the velocities are taken on the still-water column
/// `-h ≤ z ≤ 0`, which is the geometry of the linearized model.
pub fn sample_still<W: WaveKinematics + ?Sized>(
    wave: &W,
    grid: &Grid,
    h: &[f64],
    t: f64,
) -> (Vec<f64>, Field, Field) {
    let xs = grid.x.nodes();
    let sigma = grid.z.sigma();
    let eta: Vec<f64> = xs.iter().map(|&x| wave.elevation(x, t)).collect();
    let mut u = grid.zeros();
    let mut w = grid.zeros();
    for (i, &x) in xs.iter().enumerate() {
        for (m, s) in sigma.iter().enumerate() {
            let (a, b) = wave.velocity(x, -h[i] + s * h[i], t);
            u[[i, m]] = a;
            w[[i, m]] = b;
        }
    }
    (eta, u, w)
}

/// Linear (Airy) wave.
#[derive(Clone, Copy, Debug)]
pub struct AiryWave {
    pub params: WaveParameters,
}

impl AiryWave {
    pub fn new(params: WaveParameters) -> Self {
        Self { params }
    }

    fn phase(&self, x: f64, t: f64) -> f64 {
        self.params.omega * t - self.params.k * x
    }

    /// Velocity potential.
    pub fn potential(&self, x: f64, z: f64, t: f64) -> f64 {
        let p = &self.params;
        -0.5 * p.height * p.c * (p.k * (z + p.depth)).cosh() / p.kh().sinh() * self.phase(x, t).sin()
    }

    /// `∂η/∂t`.
    pub fn elevation_rate(&self, x: f64, t: f64) -> f64 {
        let p = &self.params;
        -0.5 * p.height * p.omega * self.phase(x, t).sin()
    }
}

impl WaveKinematics for AiryWave {
    fn elevation(&self, x: f64, t: f64) -> f64 {
        0.5 * self.params.height * self.phase(x, t).cos()
    }

    fn velocity(&self, x: f64, z: f64, t: f64) -> (f64, f64) {
        let p = &self.params;
        let a = 0.5 * p.height * p.omega / p.kh().sinh();
        let kz = p.k * (z + p.depth);
        let th = self.phase(x, t);
        (a * kz.cosh() * th.cos(), -a * kz.sinh() * th.sin())
    }
}

/// Oscillatory laminar boundary layer under a linear wave.
#[derive(Clone, Copy, Debug)]
pub struct StokesLayer {
    /// Free-stream orbital velocity amplitude at the bed.
    pub u0m: f64,
    pub omega: f64,
    pub k: f64,
    /// Stokes length `(2ν/ω)^½`.
    pub delta1: f64,
}

impl StokesLayer {
    pub fn new(params: &WaveParameters, nu: f64) -> Self {
        Self {
            u0m: PI * params.height / (params.period * params.kh().sinh()),
            omega: params.omega,
            k: params.k,
            delta1: (2.0 * nu / params.omega).sqrt(),
        }
    }

    /// Boundary-layer thickness `3π/4 δ1`.
    pub fn thickness(&self) -> f64 {
        0.75 * PI * self.delta1
    }

    /// Free-stream velocity just outside the layer.
    pub fn free_stream(&self, t: f64, x: f64) -> f64 {
        self.u0m * (self.omega * t - self.k * x).cos()
    }

    /// Horizontal velocity at height `z` above the bed.
    pub fn velocity(&self, z: f64, t: f64, x: f64) -> f64 {
        let th = self.omega * t - self.k * x;
        let zeta = z / self.delta1;
        self.u0m * (th.cos() - (-zeta).exp() * (th - zeta).cos())
    }
}

/// Which mean velocity of the steady wave is set to zero.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MeanCurrent {
    /// Time-mean velocity at fixed points below the trough.
    #[default]
    Eulerian,
    /// Depth-integrated mass transport, as in a closed flume.
    MassTransport,
}

/// Settings for [`stream_function_solve`].
#[derive(Clone, Copy, Debug)]
pub struct StreamFunctionOptions {
    pub modes: usize,
    pub current: MeanCurrent,
    pub g: f64,
    pub tolerance: f64,
    pub max_steps: usize,
    pub max_newton: usize,
}

impl Default for StreamFunctionOptions {
    fn default() -> Self {
        Self {
            modes: 32,
            current: MeanCurrent::Eulerian,
            g: GRAVITY,
            tolerance: 1e-12,
            max_steps: 10,
            max_newton: 60,
        }
    }
}

/// Steady nonlinear wave from Fourier collocation of the stream function.
#[derive(Clone, Debug)]
pub struct SteadyWave {
    pub height: f64,
    pub period: f64,
    pub depth: f64,
    pub k: f64,
    /// Phase speed.
    pub c: f64,
    /// Eulerian mean current; zero unless the mass transport is fixed instead.
    pub current: f64,
    /// Volume flux under the wave in the co-moving frame.
    pub q: f64,
    /// Bernoulli constant.
    pub r: f64,
    pub g: f64,
    pub modes: usize,
    /// Horizontal position of the crest at `t = 0`.
    pub x0: f64,
    pub residual: f64,
    pub warnings: Vec<String>,
    // nondimensional (g = h = 1)
    kn: f64,
    b: Vec<f64>,
    e: Vec<f64>,
}

impl SteadyWave {
    pub fn length(&self) -> f64 {
        2.0 * PI / self.k
    }

    pub fn omega(&self) -> f64 {
        2.0 * PI / self.period
    }

    pub fn kh(&self) -> f64 {
        self.kn
    }

    /// Stream-function coefficients `B_j`, scaled by `√(g h³)`.
    pub fn coefficients(&self) -> Vec<f64> {
        let s = (self.g * self.depth.powi(3)).sqrt();
        self.b.iter().map(|v| v * s).collect()
    }

    /// Surface cosine amplitudes (mean removed), scaled by `h`.
    pub fn surface_amplitudes(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self.e.iter().map(|v| v * self.depth).collect();
        e[0] -= self.depth;
        e
    }

    pub fn with_offset(mut self, x0: f64) -> Self {
        self.x0 = x0;
        self
    }

    fn theta(&self, x: f64, t: f64) -> f64 {
        self.k * (x - self.c * t - self.x0)
    }

    /// Elevation at a phase `θ = k(x - ct - x0)`.
    pub fn elevation_at_phase(&self, theta: f64) -> f64 {
        let s: f64 = self
            .e
            .iter()
            .enumerate()
            .map(|(j, e)| e * (j as f64 * theta).cos())
            .sum();
        self.depth * (s - 1.0)
    }

    /// Co-moving stream function `ψ` at phase `θ` and height `y` above the bed.
    pub fn stream_function(&self, theta: f64, y: f64) -> f64 {
        let yn = y / self.depth;
        let cn = (self.c - self.current) / (self.g * self.depth).sqrt();
        let mut psi = -cn * yn;
        for (j, b) in self.b.iter().enumerate() {
            let jk = (j + 1) as f64 * self.kn;
            psi += b * sinh_ratio(jk, yn) * ((j + 1) as f64 * theta).cos();
        }
        psi * (self.g * self.depth.powi(3)).sqrt()
    }
}

impl WaveKinematics for SteadyWave {
    fn elevation(&self, x: f64, t: f64) -> f64 {
        self.elevation_at_phase(self.theta(x, t))
    }

    fn velocity(&self, x: f64, z: f64, t: f64) -> (f64, f64) {
        let th = self.theta(x, t);
        let yn = (z + self.depth) / self.depth;
        let (mut u, mut w) = (0.0, 0.0);
        for (j, b) in self.b.iter().enumerate() {
            let jf = (j + 1) as f64;
            let jk = jf * self.kn;
            u += b * jk * cosh_ratio(jk, yn) * (jf * th).cos();
            w += b * jk * sinh_ratio(jk, yn) * (jf * th).sin();
        }
        let s = (self.g * self.depth).sqrt();
        (u * s + self.current, w * s)
    }
}

/// `sinh(a y) / cosh(a)` without overflow.
fn sinh_ratio(a: f64, y: f64) -> f64 {
    ((a * (y - 1.0)).exp() - (-a * (y + 1.0)).exp()) / (1.0 + (-2.0 * a).exp())
}

/// `cosh(a y) / cosh(a)` without overflow.
fn cosh_ratio(a: f64, y: f64) -> f64 {
    ((a * (y - 1.0)).exp() + (-a * (y + 1.0)).exp()) / (1.0 + (-2.0 * a).exp())
}

struct Collocation {
    n: usize,
    current: MeanCurrent,
    height: f64,
    period: f64,
    cos: Vec<Vec<f64>>,
    sin: Vec<Vec<f64>>,
}

impl Collocation {
    fn new(n: usize, current: MeanCurrent, height: f64, period: f64) -> Self {
        let table = |f: fn(f64) -> f64| {
            (0..=n)
                .map(|m| {
                    (1..=n)
                        .map(|j| f(j as f64 * m as f64 * PI / n as f64))
                        .collect()
                })
                .collect()
        };
        Self {
            n,
            current,
            height,
            period,
            cos: table(f64::cos),
            sin: table(f64::sin),
        }
    }

    fn size(&self) -> usize {
        2 * self.n + 5
    }

    // unknowns: [k, η_0..η_N, B_1..B_N, c, Q, R]
    fn ieta(&self, m: usize) -> usize {
        1 + m
    }
    fn ib(&self, j: usize) -> usize {
        self.n + 2 + j
    }
    fn ic(&self) -> usize {
        2 * self.n + 2
    }

    fn evaluate(&self, z: &DVector<f64>, jac: Option<&mut DMatrix<f64>>) -> DVector<f64> {
        let n = self.n;
        let (ic, iq, ir) = (self.ic(), self.ic() + 1, self.ic() + 2);
        let k = z[0];
        let c = z[ic];
        let mut f = DVector::zeros(self.size());
        let mut jac = jac;
        if let Some(jm) = jac.as_deref_mut() {
            jm.fill(0.0);
        }
        for m in 0..=n {
            let y = z[self.ieta(m)];
            let (mut psi, mut psi_k, mut u, mut w) = (0.0, 0.0, -c, 0.0);
            let (mut u_k, mut w_k, mut u_y, mut w_y) = (0.0, 0.0, 0.0, 0.0);
            for j in 0..n {
                let jf = (j + 1) as f64;
                let jk = jf * k;
                let b = z[self.ib(j)];
                let s = sinh_ratio(jk, y);
                let ch = cosh_ratio(jk, y);
                let th = (jk).tanh();
                let s_k = jf * (y * ch - s * th);
                let c_k = jf * (y * s - ch * th);
                let (cs, sn) = (self.cos[m][j], self.sin[m][j]);
                psi += b * s * cs;
                psi_k += b * s_k * cs;
                u += b * jk * ch * cs;
                w += b * jk * s * sn;
                u_k += b * jf * (ch + k * c_k) * cs;
                w_k += b * jf * (s + k * s_k) * sn;
                u_y += b * jk * jk * s * cs;
                w_y += b * jk * jk * ch * sn;
                if let Some(jm) = jac.as_deref_mut() {
                    jm[(m, self.ib(j))] = s * cs;
                }
            }
            f[m] = -c * y + psi + z[iq];
            f[n + 1 + m] = 0.5 * (u * u + w * w) + y - z[ir];
            if let Some(jm) = jac.as_deref_mut() {
                jm[(m, 0)] = psi_k;
                jm[(m, self.ieta(m))] = u;
                jm[(m, ic)] = -y;
                jm[(m, iq)] = 1.0;
                let row = n + 1 + m;
                jm[(row, 0)] = u * u_k + w * w_k;
                jm[(row, self.ieta(m))] = u * u_y + w * w_y + 1.0;
                for j in 0..n {
                    let jf = (j + 1) as f64;
                    let jk = jf * k;
                    jm[(row, self.ib(j))] = u * jk * cosh_ratio(jk, y) * self.cos[m][j]
                        + w * jk * sinh_ratio(jk, y) * self.sin[m][j];
                }
                jm[(row, ic)] = -u;
                jm[(row, ir)] = -1.0;
            }
        }
        let base = 2 * n + 2;
        let mean = (0..=n)
            .map(|m| {
                let wgt = if m == 0 || m == n { 0.5 } else { 1.0 };
                wgt * z[self.ieta(m)]
            })
            .sum::<f64>()
            / n as f64;
        f[base] = mean - 1.0;
        f[base + 1] = z[self.ieta(0)] - z[self.ieta(n)] - self.height;
        // phase speed is c (no Eulerian current) or Q / h (no mass transport)
        let ispeed = match self.current {
            MeanCurrent::Eulerian => ic,
            MeanCurrent::MassTransport => iq,
        };
        let speed = z[ispeed];
        f[base + 2] = k * speed * self.period - 2.0 * PI;
        if let Some(jm) = jac {
            for m in 0..=n {
                let wgt = if m == 0 || m == n { 0.5 } else { 1.0 };
                jm[(base, self.ieta(m))] = wgt / n as f64;
            }
            jm[(base + 1, self.ieta(0))] = 1.0;
            jm[(base + 1, self.ieta(n))] = -1.0;
            jm[(base + 2, 0)] = speed * self.period;
            jm[(base + 2, ispeed)] = k * self.period;
        }
        f
    }

    fn linear_seed(&self, height: f64) -> Result<DVector<f64>> {
        let n = self.n;
        let k = wavenumber(2.0 * PI / self.period, 1.0, 1.0)?;
        let c = 2.0 * PI / (k * self.period);
        let mut z = DVector::zeros(self.size());
        z[0] = k;
        for m in 0..=n {
            z[self.ieta(m)] = 1.0 + 0.5 * height * (m as f64 * PI / n as f64).cos();
        }
        z[self.ib(0)] = c * height / (2.0 * k.tanh());
        z[self.ic()] = c;
        z[self.ic() + 1] = c;
        z[self.ic() + 2] = 1.0 + 0.5 * c * c;
        Ok(z)
    }
}

fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |a, b| a.max(b.abs()))
}

fn newton(col: &Collocation, z: &mut DVector<f64>, opts: &StreamFunctionOptions) -> Result<f64> {
    let mut jac = DMatrix::zeros(col.size(), col.size());
    let mut f = col.evaluate(z, Some(&mut jac));
    let mut res = inf_norm(&f);
    for it in 0..opts.max_newton {
        if res <= 0.1 * opts.tolerance {
            return Ok(res);
        }
        let dz = jac
            .clone()
            .lu()
            .solve(&(-&f))
            .ok_or(Error::Singular("stream function Jacobian"))?;
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..12 {
            let trial = &*z + &dz * step;
            let ft = col.evaluate(&trial, None);
            let rt = inf_norm(&ft);
            if rt.is_finite() && (rt < res || rt <= 0.1 * opts.tolerance) {
                *z = trial;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            if res <= opts.tolerance {
                return Ok(res);
            }
            return Err(Error::NoConvergence {
                what: "stream function Newton",
                iterations: it,
                residual: res,
            });
        }
        let prev = res;
        f = col.evaluate(z, Some(&mut jac));
        res = inf_norm(&f);
        if res <= opts.tolerance && res > 0.5 * prev {
            return Ok(res);
        }
    }
    if res <= opts.tolerance {
        Ok(res)
    } else {
        Err(Error::NoConvergence {
            what: "stream function Newton",
            iterations: opts.max_newton,
            residual: res,
        })
    }
}

/// Solves for a steady wave of height `height` and period `period` in depth `depth`.
pub fn stream_function_solve(
    height: f64,
    depth: f64,
    period: f64,
    opts: StreamFunctionOptions,
) -> Result<SteadyWave> {
    if !(height > 0.0 && depth > 0.0 && period > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "wave height {height}, depth {depth} and period {period} must be positive"
        )));
    }
    if opts.modes < 8 {
        return Err(Error::InvalidParameter(format!(
            "stream function needs at least 8 modes, got {}",
            opts.modes
        )));
    }
    let g = opts.g;
    let n = opts.modes;
    let hn = height / depth;
    let tn = period * (g / depth).sqrt();
    let lin = solve_dispersion(period, depth, g)?.with_height(height);
    let frac = lin.breaking_fraction();
    let steps = ((frac * opts.max_steps as f64).ceil() as usize).clamp(1, opts.max_steps);
    let mut col = Collocation::new(n, opts.current, hn / steps as f64, tn);
    let mut z = col.linear_seed(col.height)?;
    let mut prev: Option<DVector<f64>> = None;
    let mut residual = 0.0;
    for s in 1..=steps {
        col.height = hn * s as f64 / steps as f64;
        let seed = match &prev {
            // linear extrapolation in height from the last two solutions
            Some(p) => &z * 2.0 - p,
            None => z.clone(),
        };
        let mut next = seed;
        residual = newton(&col, &mut next, &opts)?;
        prev = Some(std::mem::replace(&mut z, next));
    }
    let kn = z[0];
    let sg = (g * depth).sqrt();
    let eta: Vec<f64> = (0..=n).map(|m| z[col.ieta(m)]).collect();
    let e = cosine_coefficients(&eta);
    let b: Vec<f64> = (0..n).map(|j| z[col.ib(j)]).collect();
    let frame_speed = z[col.ic()] * sg;
    let (phase_speed, current) = match opts.current {
        MeanCurrent::Eulerian => (frame_speed, 0.0),
        MeanCurrent::MassTransport => {
            let c = z[col.ic() + 1] * sg;
            (c, c - frame_speed)
        }
    };
    let mut wave = SteadyWave {
        height,
        period,
        depth,
        k: kn / depth,
        c: phase_speed,
        current,
        q: z[col.ic() + 1] * sg * depth,
        r: z[col.ic() + 2] * g * depth,
        g,
        modes: n,
        x0: 0.0,
        residual,
        warnings: Vec::new(),
        kn,
        b,
        e,
    };
    let limit = battjes_max_steepness(wave.kh());
    if height / wave.length() > limit {
        wave.warnings.push(format!(
            "steepness {:.4} exceeds breaking limit {:.4}",
            height / wave.length(),
            limit
        ));
    }
    Ok(wave)
}

/// Cosine-series coefficients of samples at `θ_m = mπ/N`, `m = 0..=N`.
fn cosine_coefficients(v: &[f64]) -> Vec<f64> {
    let n = v.len() - 1;
    (0..=n)
        .map(|j| {
            let s: f64 = v
                .iter()
                .enumerate()
                .map(|(m, x)| {
                    let wgt = if m == 0 || m == n { 0.5 } else { 1.0 };
                    wgt * x * ((j * m) as f64 * PI / n as f64).cos()
                })
                .sum();
            let scale = if j == 0 || j == n { 1.0 } else { 2.0 };
            scale * s / n as f64
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn dispersion_reference_case() {
        let p = solve_dispersion(2.02, 0.4, GRAVITY).unwrap();
        assert_abs_diff_eq!(p.length, 3.737, epsilon = 5e-4);
        assert_abs_diff_eq!(p.kh(), 0.6725, epsilon = 5e-4);
        let deep = solve_dispersion(2.0, 1000.0, GRAVITY).unwrap();
        assert_relative_eq!(deep.k, deep.omega.powi(2) / GRAVITY, max_relative = 1e-6);
        assert!(solve_dispersion(-1.0, 1.0, GRAVITY).is_err());
    }

    #[test]
    fn breaking_limit_values() {
        assert_abs_diff_eq!(battjes_max_steepness(1e3), 0.1401, epsilon = 1e-15);
        assert_abs_diff_eq!(battjes_max_steepness(0.5), 0.0583, epsilon = 1e-4);
        assert_abs_diff_eq!(battjes_max_steepness(2.0 * PI), 0.14008, epsilon = 2e-5);
    }

    #[test]
    fn airy_surface_relation() {
        let p = WaveParameters::from_period(0.1, 1.7, 0.8, GRAVITY).unwrap();
        let a = AiryWave::new(p);
        let x = 0.3;
        let (_, w) = a.velocity(x, 0.0, 0.2);
        let phi = a.potential(x, 0.0, 0.2);
        assert_relative_eq!(w / (p.k * phi), p.kh().tanh(), max_relative = 1e-12);
        assert_eq!(a.velocity(x, -p.depth, 0.7).1, 0.0);
    }

    #[test]
    fn stokes_layer_limits() {
        let p = WaveParameters::from_period(0.02, 2.02, 0.4, GRAVITY).unwrap();
        let s = StokesLayer::new(&p, 1e-6);
        assert_abs_diff_eq!(s.delta1, 8.02e-4, epsilon = 1e-6);
        assert_eq!(s.velocity(0.0, 0.37, 0.0), 0.0);
        let far = s.velocity(20.0 * s.delta1, 0.0, 0.0);
        assert!((far - s.u0m).abs() <= s.u0m * (-20.0f64).exp());
        let peak = (1..2000)
            .map(|i| s.velocity(i as f64 * 5e-3 * s.delta1, 0.0, 0.0) / s.u0m)
            .fold(0.0, f64::max);
        assert!(peak > 1.0 && peak <= 1.07);
    }

    #[test]
    fn cosine_coefficients_of_pure_modes() {
        let n = 8;
        let v: Vec<f64> = (0..=n)
            .map(|m| 1.0 + 0.3 * (3.0 * m as f64 * PI / n as f64).cos())
            .collect();
        let e = cosine_coefficients(&v);
        assert_abs_diff_eq!(e[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e[3], 0.3, epsilon = 1e-14);
        assert_abs_diff_eq!(e[5], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn collocation_jacobian_matches_differences() {
        for current in [MeanCurrent::Eulerian, MeanCurrent::MassTransport] {
            let col = Collocation::new(8, current, 0.1, 7.0);
            let mut z = col.linear_seed(0.1).unwrap();
            z[col.ib(1)] = 0.01;
            z[col.ieta(3)] += 0.01;
            let mut jac = DMatrix::zeros(col.size(), col.size());
            let f0 = col.evaluate(&z, Some(&mut jac));
            for q in 0..col.size() {
                let h = 1e-6;
                let mut zp = z.clone();
                zp[q] += h;
                let mut zm = z.clone();
                zm[q] -= h;
                let fd = (col.evaluate(&zp, None) - col.evaluate(&zm, None)) / (2.0 * h);
                for r in 0..col.size() {
                    assert_abs_diff_eq!(jac[(r, q)], fd[r], epsilon = 1e-7);
                }
            }
            assert!(f0.iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn mass_transport_wave_has_return_current() {
        let opts = StreamFunctionOptions {
            current: MeanCurrent::MassTransport,
            ..Default::default()
        };
        let w = stream_function_solve(0.02, 0.4, 2.02, opts).unwrap();
        let e = stream_function_solve(0.02, 0.4, 2.02, StreamFunctionOptions::default()).unwrap();
        assert_eq!(e.current, 0.0);
        assert!(w.current < 0.0);
        // zero transport: the frame flux equals c h
        assert_relative_eq!(w.q, w.c * w.depth, max_relative = 1e-12);
        assert!(w.residual <= 1e-12);
    }
}
