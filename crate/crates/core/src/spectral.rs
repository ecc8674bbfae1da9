//! Fourier (horizontal, periodic) and Chebyshev Gauss–Lobatto (vertical)
//! collocation machinery.
//!
//! Nodal fields are stored as `Array2<f64>` with shape `(N+1, M+1)`: the first
//! index runs over the equispaced horizontal nodes, the second over the
//! vertical nodes with `m = 0` at the free surface (`σ = 1`) and `m = M` at the
//! bed (`σ = 0`). Vertical derivatives are always taken with respect to `σ`.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{Array2, ArrayView1, ArrayViewMut1, Axis};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Nodal scalar on the tensor-product collocation grid.
pub type Field = Array2<f64>;

/// Equispaced periodic grid with `N+1` nodes on `[0, L)`.
#[derive(Clone)]
pub struct FourierGrid {
    order: usize,
    length: f64,
    nodes: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FourierGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FourierGrid")
            .field("order", &self.order)
            .field("length", &self.length)
            .finish()
    }
}

impl FourierGrid {
    pub fn new(order: usize, length: f64) -> Result<Self> {
        if order < 1 {
            return Err(Error::InvalidParameter(
                "Fourier order must be at least 1".into(),
            ));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "domain length must be positive, got {length}"
            )));
        }
        let n = order + 1;
        let nodes = (0..n).map(|i| i as f64 * length / n as f64).collect();
        let mut planner = FftPlanner::new();
        Ok(Self {
            order,
            length,
            nodes,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.order + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.len() as f64
    }

    /// Highest wavenumber index of the symmetric set, `⌊N/2⌋`.
    pub fn max_mode(&self) -> usize {
        self.order / 2
    }

    /// Signed wavenumber index of FFT slot `j`.
    pub fn mode_index(&self, j: usize) -> i64 {
        let n = self.len();
        if 2 * j < n {
            j as i64
        } else {
            j as i64 - n as i64
        }
    }

    /// True for the unmatched Nyquist slot of an even point count.
    pub fn is_nyquist(&self, j: usize) -> bool {
        let n = self.len();
        n % 2 == 0 && 2 * j == n
    }

    /// Physical wavenumber of FFT slot `j` in 1/m.
    pub fn wavenumber(&self, j: usize) -> f64 {
        2.0 * PI / self.length * self.mode_index(j) as f64
    }

    /// Symmetric wavenumber set `{-⌊N/2⌋ … ⌊N/2⌋}·2π/L` in ascending order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let kmax = self.max_mode() as i64;
        (-kmax..=kmax)
            .map(|i| 2.0 * PI / self.length * i as f64)
            .collect()
    }

    fn derivative_multiplier(&self, j: usize, order: usize) -> Complex64 {
        let k = self.wavenumber(j);
        match order {
            1 if self.is_nyquist(j) => Complex64::new(0.0, 0.0),
            1 => Complex64::new(0.0, k),
            2 => Complex64::new(-k * k, 0.0),
            _ => unreachable!(),
        }
    }

    /// Spectral derivative of a single periodic row.
    pub fn diff(&self, f: &[f64], order: usize) -> Result<Vec<f64>> {
        if order != 1 && order != 2 {
            return Err(Error::DerivativeOrder(order));
        }
        check_len(f.len(), self.len())?;
        check_finite(f, "Fourier row")?;
        let mut out = f.to_vec();
        self.apply_multiplier_line_pair(&mut out, None, |j| {
            self.derivative_multiplier(j, order)
        });
        Ok(out)
    }

    /// Normalised complex coefficients `c_j` in FFT order so that
    /// `f(x) = Σ_j c_j exp(i k_j x)`.
    pub fn coefficients(&self, f: &[f64]) -> Vec<Complex64> {
        let n = self.len();
        let mut buf: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        let scale = 1.0 / n as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
        buf
    }

    /// Evaluates the trigonometric interpolant of `f` at an arbitrary `x`.
    pub fn interpolate(&self, f: &[f64], x: f64) -> f64 {
        let coeffs = self.coefficients(f);
        self.evaluate_coefficients(&coeffs, x)
    }

    pub fn evaluate_coefficients(&self, coeffs: &[Complex64], x: f64) -> f64 {
        let mut sum = coeffs[0].re;
        for (j, c) in coeffs.iter().enumerate().skip(1) {
            let k = self.wavenumber(j);
            if self.is_nyquist(j) {
                // real interpolant: split the Nyquist mode into a cosine
                sum += c.re * (k * x).cos();
            } else {
                let e = Complex64::new(0.0, k * x).exp();
                sum += (c * e).re;
            }
        }
        sum
    }

    /// Resamples a periodic row onto `n_out` equispaced nodes by modal
    /// truncation (coarser) or zero padding (finer).
    pub fn resample(&self, f: &[f64], n_out: usize) -> Vec<f64> {
        if n_out == self.len() {
            return f.to_vec();
        }
        let target = FourierGrid::new(n_out - 1, self.length).expect("valid resample target");
        self.resample_to(f, &target)
    }

    /// Resamples a periodic row onto the nodes of `target`.
    pub fn resample_to(&self, f: &[f64], target: &FourierGrid) -> Vec<f64> {
        let n_in = self.len();
        let n_out = target.len();
        if n_out == n_in {
            return f.to_vec();
        }
        let coeffs = self.coefficients(f);
        let mut out = vec![Complex64::new(0.0, 0.0); n_out];
        let keep_in = kept_modes(n_in);
        let keep_out = kept_modes(n_out);
        let kmax = keep_in.min(keep_out);
        for i in 0..=kmax as i64 {
            for sign in [1i64, -1] {
                if i == 0 && sign < 0 {
                    continue;
                }
                let idx = sign * i;
                let src = slot(idx, n_in);
                let dst = slot(idx, n_out);
                out[dst] = coeffs[src];
            }
        }
        // Nyquist of the source (even count): split symmetrically when the
        // target resolves that wavenumber.
        if n_in % 2 == 0 {
            let ny = (n_in / 2) as i64;
            if (ny as usize) <= keep_out {
                let c = coeffs[n_in / 2];
                out[slot(ny, n_out)] = c * 0.5;
                out[slot(-ny, n_out)] = c * 0.5;
            } else if n_out % 2 == 0 && (n_out / 2) as i64 == ny {
                out[n_out / 2] = coeffs[n_in / 2];
            }
        }
        // Nyquist of the target: fold the ±k pair into one real slot.
        if n_out % 2 == 0 {
            let ny = (n_out / 2) as i64;
            if (ny as usize) <= keep_in {
                let a = coeffs[slot(ny, n_in)];
                let b = coeffs[slot(-ny, n_in)];
                out[n_out / 2] = a + b;
            }
        }
        target.inverse.process(&mut out);
        out.iter().map(|c| c.re).collect()
    }

    /// Applies a Hermitian modal multiplier to one or two real lines at once.
    fn apply_multiplier_line_pair<F>(&self, a: &mut [f64], b: Option<&mut [f64]>, multiplier: F)
    where
        F: Fn(usize) -> Complex64,
    {
        let n = self.len();
        let mut buf: Vec<Complex64> = match &b {
            Some(b) => a
                .iter()
                .zip(b.iter())
                .map(|(&x, &y)| Complex64::new(x, y))
                .collect(),
            None => a.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        };
        self.forward.process(&mut buf);
        let scale = 1.0 / n as f64;
        for (j, c) in buf.iter_mut().enumerate() {
            *c *= multiplier(j) * scale;
        }
        self.inverse.process(&mut buf);
        for (x, c) in a.iter_mut().zip(&buf) {
            *x = c.re;
        }
        if let Some(b) = b {
            for (y, c) in b.iter_mut().zip(&buf) {
                *y = c.im;
            }
        }
    }

    /// Applies a Hermitian multiplier along the horizontal axis of a field.
    pub fn apply_multiplier<F>(&self, field: &mut Field, multiplier: F)
    where
        F: Fn(usize) -> Complex64,
    {
        let nz = field.ncols();
        let mut a = vec![0.0; self.len()];
        let mut b = vec![0.0; self.len()];
        let mut m = 0;
        while m < nz {
            if m + 1 < nz {
                copy_from(&mut a, field.column(m));
                copy_from(&mut b, field.column(m + 1));
                self.apply_multiplier_line_pair(&mut a, Some(&mut b), &multiplier);
                copy_into(field.column_mut(m), &a);
                copy_into(field.column_mut(m + 1), &b);
                m += 2;
            } else {
                copy_from(&mut a, field.column(m));
                self.apply_multiplier_line_pair(&mut a, None, &multiplier);
                copy_into(field.column_mut(m), &a);
                m += 1;
            }
        }
    }

    /// Dense differentiation matrix consistent with [`FourierGrid::diff`].
    pub fn diff_matrix(&self, order: usize) -> Array2<f64> {
        let n = self.len();
        let mut mat = Array2::zeros((n, n));
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            self.apply_multiplier_line_pair(&mut e, None, |i| self.derivative_multiplier(i, order));
            for i in 0..n {
                mat[[i, j]] = e[i];
            }
        }
        mat
    }
}

fn kept_modes(n: usize) -> usize {
    (n - 1) / 2
}

fn slot(idx: i64, n: usize) -> usize {
    if idx >= 0 {
        idx as usize
    } else {
        (n as i64 + idx) as usize
    }
}

/// Chebyshev Gauss–Lobatto grid `ξ_m = cos(mπ/M)` mapped to `σ = (ξ+1)/2`.
#[derive(Clone)]
pub struct ChebyshevGrid {
    order: usize,
    xi: Vec<f64>,
    sigma: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for ChebyshevGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChebyshevGrid")
            .field("order", &self.order)
            .finish()
    }
}

impl ChebyshevGrid {
    pub fn new(order: usize) -> Result<Self> {
        if order < 2 {
            return Err(Error::InvalidParameter(
                "Chebyshev order must be at least 2".into(),
            ));
        }
        let xi: Vec<f64> = (0..=order)
            .map(|m| {
                // symmetric evaluation keeps the nodes exactly antisymmetric
                let theta = PI * (order as f64 - 2.0 * m as f64) / (2.0 * order as f64);
                theta.sin()
            })
            .collect();
        let sigma = xi.iter().map(|x| 0.5 * (x + 1.0)).collect();
        let fft = FftPlanner::new().plan_fft_forward(2 * order);
        Ok(Self {
            order,
            xi,
            sigma,
            fft,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.order + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// Smallest gap between neighbouring σ nodes.
    pub fn min_spacing(&self) -> f64 {
        self.sigma
            .windows(2)
            .map(|w| (w[0] - w[1]).abs())
            .fold(f64::INFINITY, f64::min)
    }

    /// DCT-I of one or two real lines through a length-2M FFT of the even
    /// extension. Output slot `j` holds `x_0 + (-1)^j x_M + 2 Σ x_m cos(πjm/M)`.
    fn dct1_pair(&self, a: &mut [f64], b: Option<&mut [f64]>) {
        let m = self.order;
        let mut buf = vec![Complex64::new(0.0, 0.0); 2 * m];
        match &b {
            Some(b) => {
                for i in 0..=m {
                    buf[i] = Complex64::new(a[i], b[i]);
                }
            }
            None => {
                for i in 0..=m {
                    buf[i] = Complex64::new(a[i], 0.0);
                }
            }
        }
        for i in 1..m {
            buf[2 * m - i] = buf[i];
        }
        self.fft.process(&mut buf);
        for i in 0..=m {
            a[i] = buf[i].re;
        }
        if let Some(b) = b {
            for i in 0..=m {
                b[i] = buf[i].im;
            }
        }
    }

    fn forward_in_place(&self, a: &mut [f64], b: Option<&mut [f64]>) {
        let m = self.order;
        let scale = |j: usize| {
            if j == 0 || j == m {
                1.0 / (2.0 * m as f64)
            } else {
                1.0 / m as f64
            }
        };
        match b {
            Some(b) => {
                self.dct1_pair(a, Some(b));
                for j in 0..=m {
                    a[j] *= scale(j);
                    b[j] *= scale(j);
                }
            }
            None => {
                self.dct1_pair(a, None);
                for j in 0..=m {
                    a[j] *= scale(j);
                }
            }
        }
    }

    fn inverse_in_place(&self, a: &mut [f64], b: Option<&mut [f64]>) {
        let m = self.order;
        for j in 1..m {
            a[j] *= 0.5;
        }
        match b {
            Some(b) => {
                for j in 1..m {
                    b[j] *= 0.5;
                }
                self.dct1_pair(a, Some(b));
            }
            None => self.dct1_pair(a, None),
        }
    }

    /// Modal coefficients `c` with `f(ξ_m) = Σ c_j T_j(ξ_m)`.
    pub fn transform(&self, f: &[f64]) -> Result<Vec<f64>> {
        check_len(f.len(), self.len())?;
        let mut out = f.to_vec();
        self.forward_in_place(&mut out, None);
        Ok(out)
    }

    /// Nodal values from modal coefficients.
    pub fn inverse(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        check_len(coeffs.len(), self.len())?;
        let mut out = coeffs.to_vec();
        self.inverse_in_place(&mut out, None);
        Ok(out)
    }

    /// Derivative recursion on coefficients with respect to `ξ`.
    fn diff_coefficients_xi(c: &[f64], out: &mut [f64]) {
        let m = c.len() - 1;
        out.iter_mut().for_each(|v| *v = 0.0);
        if m == 0 {
            return;
        }
        out[m - 1] = 2.0 * m as f64 * c[m];
        for q in (1..m).rev() {
            let next = if q + 1 <= m { out[q + 1] } else { 0.0 };
            out[q - 1] = next + 2.0 * q as f64 * c[q];
        }
        out[0] *= 0.5;
    }

    /// Coefficients of the `order`-th σ-derivative.
    pub fn diff_coefficients(&self, c: &[f64], order: usize) -> Result<Vec<f64>> {
        if order != 1 && order != 2 {
            return Err(Error::DerivativeOrder(order));
        }
        check_len(c.len(), self.len())?;
        let mut cur = c.to_vec();
        let mut next = vec![0.0; c.len()];
        for _ in 0..order {
            Self::diff_coefficients_xi(&cur, &mut next);
            // dξ/dσ = 2
            next.iter_mut().for_each(|v| *v *= 2.0);
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    /// σ-derivative of a nodal column via FCT, recursion and inverse FCT.
    pub fn diff(&self, f: &[f64], order: usize) -> Result<Vec<f64>> {
        if order != 1 && order != 2 {
            return Err(Error::DerivativeOrder(order));
        }
        check_len(f.len(), self.len())?;
        check_finite(f, "Chebyshev column")?;
        let mut out = f.to_vec();
        self.diff_line_pair(&mut out, None, order);
        Ok(out)
    }

    fn diff_line_pair(&self, a: &mut [f64], b: Option<&mut [f64]>, order: usize) {
        let n = self.len();
        let mut tmp = vec![0.0; n];
        let factor = 2f64.powi(order as i32);
        let mut recurse = |line: &mut [f64]| {
            for _ in 0..order {
                Self::diff_coefficients_xi(line, &mut tmp);
                line.copy_from_slice(&tmp);
            }
            line.iter_mut().for_each(|v| *v *= factor);
        };
        match b {
            Some(b) => {
                self.forward_in_place(a, Some(b));
                recurse(a);
                recurse(b);
                self.inverse_in_place(a, Some(b));
            }
            None => {
                self.forward_in_place(a, None);
                recurse(a);
                self.inverse_in_place(a, None);
            }
        }
    }

    /// Applies a modal multiplier to every vertical line of a field.
    pub fn apply_modal<F>(&self, field: &mut Field, multiplier: F)
    where
        F: Fn(usize) -> f64,
    {
        let mult: Vec<f64> = (0..self.len()).map(&multiplier).collect();
        self.for_line_pairs(field, |a, mut b| {
            self.forward_in_place(a, b.as_deref_mut());
            for (v, w) in a.iter_mut().zip(&mult) {
                *v *= w;
            }
            if let Some(b) = b {
                for (v, w) in b.iter_mut().zip(&mult) {
                    *v *= w;
                }
                self.inverse_in_place(a, Some(b));
            } else {
                self.inverse_in_place(a, None);
            }
        });
    }

    fn for_line_pairs<F>(&self, field: &mut Field, mut op: F)
    where
        F: FnMut(&mut [f64], Option<&mut [f64]>),
    {
        let nx = field.nrows();
        let n = self.len();
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        let mut i = 0;
        while i < nx {
            if i + 1 < nx {
                copy_from(&mut a, field.row(i));
                copy_from(&mut b, field.row(i + 1));
                op(&mut a, Some(&mut b));
                copy_into(field.row_mut(i), &a);
                copy_into(field.row_mut(i + 1), &b);
                i += 2;
            } else {
                copy_from(&mut a, field.row(i));
                op(&mut a, None);
                copy_into(field.row_mut(i), &a);
                i += 1;
            }
        }
    }

    /// Clenshaw evaluation of a Chebyshev series at physical `σ ∈ [0, 1]`.
    pub fn evaluate_coefficients(coeffs: &[f64], sigma: f64) -> f64 {
        let x = 2.0 * sigma - 1.0;
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for &c in coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * x * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        x * b1 - b2 + coeffs[0]
    }

    /// Interpolates nodal values onto a Gauss–Lobatto grid of order `m_out`
    /// by modal truncation or zero padding.
    pub fn resample(&self, f: &[f64], m_out: usize) -> Vec<f64> {
        let target = ChebyshevGrid::new(m_out).expect("valid order");
        self.resample_to(f, &target)
    }

    /// Interpolates nodal values onto the nodes of `target`.
    pub fn resample_to(&self, f: &[f64], target: &ChebyshevGrid) -> Vec<f64> {
        let mut c = f.to_vec();
        self.forward_in_place(&mut c, None);
        let mut out = vec![0.0; target.len()];
        for (j, v) in out.iter_mut().enumerate() {
            if j <= self.order {
                *v = c[j];
            }
        }
        target.inverse_in_place(&mut out, None);
        out
    }

    /// Dense σ-differentiation matrix consistent with [`ChebyshevGrid::diff`].
    pub fn diff_matrix(&self, order: usize) -> Array2<f64> {
        let n = self.len();
        let mut mat = Array2::zeros((n, n));
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            self.diff_line_pair(&mut e, None, order);
            for i in 0..n {
                mat[[i, j]] = e[i];
            }
        }
        mat
    }
}

/// Exponential cut-off filter for one direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilterSpec {
    /// Highest mode index of the direction the filter acts on.
    pub max_mode: usize,
    pub cutoff: usize,
    pub alpha: f64,
    pub order: f64,
}

impl FilterSpec {
    pub fn new(max_mode: usize, cutoff: usize, alpha: f64, order: f64) -> Result<Self> {
        if cutoff > max_mode {
            return Err(Error::InvalidParameter(format!(
                "filter cutoff {cutoff} exceeds highest mode {max_mode}"
            )));
        }
        if !(alpha > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "filter strength must be positive, got {alpha}"
            )));
        }
        if !(order >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "filter exponent must be at least 1, got {order}"
            )));
        }
        Ok(Self {
            max_mode,
            cutoff,
            alpha,
            order,
        })
    }

    /// Cut-off placed at `fraction` of the highest mode.
    pub fn with_fraction(max_mode: usize, fraction: f64, alpha: f64, order: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(Error::InvalidParameter(format!(
                "filter cutoff fraction must lie in [0, 1], got {fraction}"
            )));
        }
        let cutoff = (fraction * max_mode as f64).round() as usize;
        Self::new(max_mode, cutoff.min(max_mode), alpha, order)
    }

    /// A filter that leaves every mode untouched.
    pub fn identity(max_mode: usize) -> Self {
        Self {
            max_mode,
            cutoff: max_mode,
            alpha: 1.0,
            order: 1.0,
        }
    }

    pub fn multiplier(&self, mode: usize) -> f64 {
        if mode <= self.cutoff {
            1.0
        } else {
            let span = (self.max_mode + 1 - self.cutoff) as f64;
            let r = (mode - self.cutoff) as f64 / span;
            (-self.alpha * r.powf(self.order)).exp()
        }
    }
}

/// Tensor-product Fourier × Chebyshev grid.
#[derive(Clone, Debug)]
pub struct Grid {
    pub x: FourierGrid,
    pub z: ChebyshevGrid,
}

impl Grid {
    pub fn new(n: usize, m: usize, length: f64) -> Result<Self> {
        Ok(Self {
            x: FourierGrid::new(n, length)?,
            z: ChebyshevGrid::new(m)?,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.x.len(), self.z.len())
    }

    pub fn zeros(&self) -> Field {
        Field::zeros(self.shape())
    }

    /// Field from a function of `(x, σ)`.
    pub fn field_from<F: Fn(f64, f64) -> f64>(&self, f: F) -> Field {
        let xs = self.x.nodes();
        let ss = self.z.sigma();
        Field::from_shape_fn(self.shape(), |(i, m)| f(xs[i], ss[m]))
    }

    pub fn check(&self, field: &Field) -> Result<()> {
        if field.dim() != self.shape() {
            return Err(Error::ShapeMismatch {
                expected: self.shape(),
                got: field.dim(),
            });
        }
        if let Some(index) = field.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "field",
                index,
            });
        }
        Ok(())
    }

    pub fn dx(&self, f: &Field) -> Field {
        let mut out = f.clone();
        self.x
            .apply_multiplier(&mut out, |j| self.x.derivative_multiplier(j, 1));
        out
    }

    pub fn dxx(&self, f: &Field) -> Field {
        let mut out = f.clone();
        self.x
            .apply_multiplier(&mut out, |j| self.x.derivative_multiplier(j, 2));
        out
    }

    pub fn ds(&self, f: &Field) -> Field {
        let mut out = f.clone();
        self.z.for_line_pairs(&mut out, |a, b| self.z.diff_line_pair(a, b, 1));
        out
    }

    pub fn dss(&self, f: &Field) -> Field {
        let mut out = f.clone();
        self.z.for_line_pairs(&mut out, |a, b| self.z.diff_line_pair(a, b, 2));
        out
    }

    /// Horizontal derivative of a horizontal-only line.
    pub fn dx_line(&self, f: &[f64], order: usize) -> Vec<f64> {
        let mut out = f.to_vec();
        self.x
            .apply_multiplier_line_pair(&mut out, None, |j| self.x.derivative_multiplier(j, order));
        out
    }

    /// Applies the horizontal and vertical filters.
    pub fn filter(&self, f: &mut Field, fx: &FilterSpec, fz: &FilterSpec) {
        if fx.cutoff < fx.max_mode {
            let kmax = self.x.max_mode();
            self.x.apply_multiplier(f, |j| {
                let mode = if self.x.is_nyquist(j) {
                    kmax + 1
                } else {
                    self.x.mode_index(j).unsigned_abs() as usize
                };
                Complex64::new(fx.multiplier(mode), 0.0)
            });
        }
        if fz.cutoff < fz.max_mode {
            self.z.apply_modal(f, |m| fz.multiplier(m));
        }
    }

    /// Filters a horizontal-only line.
    pub fn filter_line(&self, f: &mut [f64], fx: &FilterSpec) {
        if fx.cutoff >= fx.max_mode {
            return;
        }
        let kmax = self.x.max_mode();
        self.x.apply_multiplier_line_pair(f, None, |j| {
            let mode = if self.x.is_nyquist(j) {
                kmax + 1
            } else {
                self.x.mode_index(j).unsigned_abs() as usize
            };
            Complex64::new(fx.multiplier(mode), 0.0)
        });
    }

    /// Resamples a field onto another tensor grid.
    pub fn resample(&self, f: &Field, target: &Grid) -> Field {
        let (nx, nz) = self.shape();
        let (tx, tz) = target.shape();
        let mut tmp = Field::zeros((tx, nz));
        if tx == nx {
            tmp.assign(f);
        } else {
            for m in 0..nz {
                let line: Vec<f64> = f.column(m).to_vec();
                let r = self.x.resample_to(&line, &target.x);
                copy_into(tmp.column_mut(m), &r);
            }
        }
        if tz == nz {
            return tmp;
        }
        let mut out = Field::zeros((tx, tz));
        for i in 0..tx {
            let line: Vec<f64> = tmp.row(i).to_vec();
            let r = self.z.resample_to(&line, &target.z);
            copy_into(out.row_mut(i), &r);
        }
        out
    }

    /// Evaluates a field at arbitrary `(x, σ)` by spectral interpolation.
    pub fn interpolate(&self, f: &Field, x: f64, sigma: f64) -> f64 {
        let nz = self.z.len();
        let mut column = vec![0.0; nz];
        for (m, v) in column.iter_mut().enumerate() {
            let line: Vec<f64> = f.column(m).to_vec();
            *v = self.x.interpolate(&line, x);
        }
        let c = self.z.transform(&column).expect("column length");
        ChebyshevGrid::evaluate_coefficients(&c, sigma)
    }
}

pub(crate) fn copy_from(dst: &mut [f64], src: ArrayView1<f64>) {
    for (d, s) in dst.iter_mut().zip(src.iter()) {
        *d = *s;
    }
}

pub(crate) fn copy_into(mut dst: ArrayViewMut1<f64>, src: &[f64]) {
    for (d, s) in dst.iter_mut().zip(src.iter()) {
        *d = *s;
    }
}

fn check_len(got: usize, expected: usize) -> Result<()> {
    if got != expected {
        return Err(Error::LengthMismatch { expected, got });
    }
    Ok(())
}

fn check_finite(f: &[f64], what: &'static str) -> Result<()> {
    match f.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { what, index }),
        None => Ok(()),
    }
}

/// Trace of a field along the surface row (`σ = 1`).
pub fn surface_row(f: &Field) -> Vec<f64> {
    f.index_axis(Axis(1), 0).to_vec()
}

/// Trace of a field along the bed row (`σ = 0`).
pub fn bed_row(f: &Field) -> Vec<f64> {
    let m = f.ncols() - 1;
    f.index_axis(Axis(1), m).to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn fourier_sine_derivative() {
        let g = FourierGrid::new(16, 2.0 * PI).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|x| x.sin()).collect();
        let d = g.diff(&f, 1).unwrap();
        for (x, v) in g.nodes().iter().zip(&d) {
            assert_abs_diff_eq!(*v, x.cos(), epsilon = 1e-12);
        }
    }

    #[test]
    fn fourier_constant_second_derivative() {
        let g = FourierGrid::new(11, 3.0).unwrap();
        let d = g.diff(&vec![2.5; 12], 2).unwrap();
        assert!(d.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn fourier_rejects_nan() {
        let g = FourierGrid::new(8, 1.0).unwrap();
        let mut f = vec![0.0; 9];
        f[3] = f64::NAN;
        assert!(matches!(
            g.diff(&f, 1),
            Err(Error::NonFinite { index: 3, .. })
        ));
        assert!(matches!(g.diff(&vec![0.0; 9], 3), Err(Error::DerivativeOrder(3))));
    }

    #[test]
    fn fourier_nodes_and_wavenumbers() {
        let g = FourierGrid::new(4, 10.0).unwrap();
        assert_eq!(g.nodes(), &[0.0, 2.0, 4.0, 6.0, 8.0]);
        let k = g.wavenumbers();
        assert_eq!(k.len(), 5);
        assert_abs_diff_eq!(k[0], -2.0 * 2.0 * PI / 10.0, epsilon = 1e-15);
        let odd = FourierGrid::new(5, 1.0).unwrap();
        assert_eq!(odd.wavenumbers().len(), 5);
        assert!(odd.is_nyquist(3));
    }

    #[test]
    fn chebyshev_node_layout() {
        let g = ChebyshevGrid::new(6).unwrap();
        assert_eq!(g.xi()[0], 1.0);
        assert_eq!(g.xi()[6], -1.0);
        assert_eq!(g.sigma()[0], 1.0);
        assert_eq!(g.sigma()[6], 0.0);
        for (m, x) in g.xi().iter().enumerate() {
            assert_abs_diff_eq!(*x, (m as f64 * PI / 6.0).cos(), epsilon = 1e-15);
        }
    }

    #[test]
    fn chebyshev_t3_coefficients() {
        let g = ChebyshevGrid::new(8).unwrap();
        let f: Vec<f64> = g.xi().iter().map(|x| 4.0 * x * x * x - 3.0 * x).collect();
        let c = g.transform(&f).unwrap();
        for (j, v) in c.iter().enumerate() {
            let expect = if j == 3 { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(*v, expect, epsilon = 1e-13);
        }
    }

    #[test]
    fn chebyshev_length_mismatch() {
        let g = ChebyshevGrid::new(8).unwrap();
        assert!(matches!(
            g.transform(&[1.0; 5]),
            Err(Error::LengthMismatch { expected: 9, got: 5 })
        ));
    }

    #[test]
    fn chebyshev_t2_derivative_in_sigma() {
        let g = ChebyshevGrid::new(10).unwrap();
        let f: Vec<f64> = g.xi().iter().map(|x| 2.0 * x * x - 1.0).collect();
        let d = g.diff(&f, 1).unwrap();
        for (s, v) in g.sigma().iter().zip(&d) {
            assert_abs_diff_eq!(*v, 8.0 * (2.0 * s - 1.0), epsilon = 1e-12);
        }
        let d0 = g.diff(&vec![3.0; 11], 1).unwrap();
        assert!(d0.iter().all(|v| v.abs() < 1e-12));
        assert!(matches!(g.diff(&f, 0), Err(Error::DerivativeOrder(0))));
    }

    #[test]
    fn filter_passband_and_endpoint() {
        let spec = FilterSpec::new(32, 16, 36.0, 2.0).unwrap();
        assert_eq!(spec.multiplier(16), 1.0);
        assert_eq!(spec.multiplier(0), 1.0);
        let r: f64 = 16.0 / 17.0;
        assert_relative_eq!(spec.multiplier(32), (-36.0 * r * r).exp(), max_relative = 1e-13);
        // one index past the highest mode reaches exp(-alpha)
        assert_relative_eq!(spec.multiplier(33), 2.319522830243569e-16, max_relative = 1e-12);
        assert!(FilterSpec::new(8, 9, 36.0, 2.0).is_err());
        assert!(FilterSpec::new(8, 4, 0.0, 2.0).is_err());
        assert!(FilterSpec::new(8, 4, 36.0, 0.5).is_err());
    }

    #[test]
    fn filter_zero_field() {
        let grid = Grid::new(8, 8, 1.0).unwrap();
        let mut f = grid.zeros();
        let fx = FilterSpec::with_fraction(4, 0.5, 36.0, 2.0).unwrap();
        let fz = FilterSpec::with_fraction(8, 0.9, 36.0, 2.0).unwrap();
        grid.filter(&mut f, &fx, &fz);
        assert!(f.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn resample_roundtrip_band_limited() {
        let fine = Grid::new(16, 12, 2.0).unwrap();
        let coarse = Grid::new(8, 6, 2.0).unwrap();
        let f = coarse.field_from(|x, s| (PI * x).sin() * s * s + (2.0 * PI * x).cos());
        let up = coarse.resample(&f, &fine);
        let down = fine.resample(&up, &coarse);
        for (a, b) in f.iter().zip(down.iter()) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-12);
        }
    }

    #[test]
    fn interpolation_of_pure_mode() {
        let g = FourierGrid::new(10, 5.0).unwrap();
        let k = 2.0 * PI * 3.0 / 5.0;
        let f: Vec<f64> = g.nodes().iter().map(|x| (k * x + 0.3).cos()).collect();
        for x in [0.123, 1.7, 4.99] {
            assert_abs_diff_eq!(g.interpolate(&f, x), (k * x + 0.3).cos(), epsilon = 1e-12);
        }
    }
}
