use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // unused when std is linked
use num_traits::Float;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::activation::Activation;
use super::kernels::{CouplingKernels, KernelRules};
use crate::plane::Plane;
use crate::wavelet::{Orientation, WaveletPyramid};
use crate::{invalid, Error, Result};

/// Time-stepping scheme for the lattice equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Integrator {
    /// Forward Euler.
    Euler,
    /// Explicit trapezoid (two stages).
    Heun,
    /// Classic fourth-order Runge-Kutta.
    #[default]
    Rk4,
}

/// What lateral connections do at the image border.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum LatticeBoundary {
    /// Connections leaving the image are dropped.
    #[default]
    Open,
    /// The lattice is a torus.
    Periodic,
}

/// Inhibition spread inside a hypercolumn, `Ψ(Δs, Δθ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct PsiProfile {
    /// Same scale, orientations 45° apart (`h`–`d`, `v`–`d`).
    pub orientation_neighbor: f64,
    /// Same scale, orthogonal orientations (`h`–`v`).
    pub orthogonal: f64,
    /// Adjacent scales, same orientation.
    pub scale_neighbor: f64,
}

impl Default for PsiProfile {
    fn default() -> Self {
        Self {
            orientation_neighbor: 0.8,
            orthogonal: 0.0,
            scale_neighbor: 0.5,
        }
    }
}

impl PsiProfile {
    pub fn weight(&self, dscale: usize, a: Orientation, b: Orientation) -> f64 {
        match (dscale, a == b) {
            (0, true) => 0.0,
            (0, false) if a == Orientation::D || b == Orientation::D => self.orientation_neighbor,
            (0, false) => self.orthogonal,
            (1, true) => self.scale_neighbor,
            _ => 0.0,
        }
    }
}

/// Parameters of the excitatory/inhibitory lattice.
///
/// `ẋ = −α_x x − g_y(y) − Σ Ψ g_y(y′) + J0 g_x(x) + Σ J g_x(x′) + I + I0`
///
/// `ẏ = −α_y y + e·g_x(x) + Σ W g_x(x′) + I_c + noise`
///
/// where `e` is `inhibitory_drive`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct LatticeParams {
    pub alpha_x: f64,
    pub alpha_y: f64,
    pub j0: f64,
    pub i0: f64,
    pub ic: f64,
    /// Standard deviation of the Gaussian noise added to `I_c`, drawn once
    /// per node per step.
    pub ic_noise: f64,
    /// Sign and gain of the local excitatory drive to the inhibitory unit.
    /// `+1` gives the oscillating pair of the original lattice model; `−1`
    /// (as typeset) turns each pair into a bistable switch.
    pub inhibitory_drive: f64,
    /// Multiplier applied to the wavelet coefficients before they enter `I`.
    /// At 1 the coefficients of natural contrasts rarely lift `x` above the
    /// `g_x` threshold beyond the finest scale.
    pub input_gain: f64,
    pub activation_x: Activation,
    pub activation_y: Activation,
    pub psi: PsiProfile,
    /// `λ(Δs)` for `Δs = 0, 1, ...`; missing entries are 0.
    pub lambda: Vec<f64>,
    pub rules: KernelRules,
    pub dt: f64,
    pub t_total: f64,
    /// Length of the final stretch of the run over which `g_x` is averaged.
    pub avg_window: f64,
    pub integrator: Integrator,
    pub boundary: LatticeBoundary,
    pub seed: u64,
    /// Membrane time constant in milliseconds (informational).
    pub membrane_ms: f64,
}

impl Default for LatticeParams {
    fn default() -> Self {
        Self {
            alpha_x: 1.0,
            alpha_y: 1.0,
            j0: 0.8,
            i0: 0.85,
            ic: 1.0,
            ic_noise: 0.1,
            inhibitory_drive: 1.0,
            input_gain: 4.0,
            activation_x: Activation::li98_excitatory(),
            activation_y: Activation::li98_inhibitory(),
            psi: PsiProfile::default(),
            lambda: vec![1.0, 0.5, 0.0],
            rules: KernelRules::default(),
            dt: 0.1,
            t_total: 10.0,
            avg_window: 2.5,
            integrator: Integrator::Rk4,
            boundary: LatticeBoundary::Open,
            seed: 0,
            membrane_ms: 10.0,
        }
    }
}

impl LatticeParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.alpha_x,
            self.alpha_y,
            self.j0,
            self.i0,
            self.ic,
            self.ic_noise,
            self.inhibitory_drive,
            self.input_gain,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(invalid("lattice parameters must be finite"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid("dt must be positive"));
        }
        if !(self.t_total >= self.dt && self.t_total.is_finite()) {
            return Err(invalid("t_total must cover at least one step"));
        }
        if !(self.avg_window > 0.0 && self.avg_window <= self.t_total) {
            return Err(invalid("avg_window must lie within the simulated interval"));
        }
        if self.ic_noise < 0.0 {
            return Err(invalid("ic_noise must be nonnegative"));
        }
        if !self.activation_x.validate() || !self.activation_y.validate() {
            return Err(invalid("invalid activation definition"));
        }
        if self.lambda.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
            return Err(invalid("lambda entries must be finite and nonnegative"));
        }
        Ok(())
    }

    /// Number of steps in the run.
    pub fn steps(&self) -> usize {
        (self.t_total / self.dt).round() as usize
    }

    /// Number of final steps averaged into the mean rate.
    pub fn window_steps(&self) -> usize {
        ((self.avg_window / self.dt).round() as usize).clamp(1, self.steps())
    }
}

/// Lattice extent: `width × height` positions, each with `3 · scales` units.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticeDims {
    pub width: usize,
    pub height: usize,
    pub scales: usize,
}

impl LatticeDims {
    pub fn planes(&self) -> usize {
        self.scales * 3
    }

    pub fn plane_len(&self) -> usize {
        self.width * self.height
    }

    pub fn nodes(&self) -> usize {
        self.planes() * self.plane_len()
    }

    /// Flat index of unit `(x, y, s, θ)`, `s` counted from 1.
    pub fn index(&self, x: usize, y: usize, s: usize, o: Orientation) -> usize {
        ((s - 1) * 3 + o.index()) * self.plane_len() + y * self.width + x
    }
}

/// Membrane potentials, stored plane by plane (`plane = (s − 1)·3 + θ`).
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeState {
    pub dims: LatticeDims,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub t: f64,
}

impl LatticeState {
    pub fn at_rest(dims: LatticeDims) -> Self {
        Self {
            dims,
            x: vec![0.0; dims.nodes()],
            y: vec![0.0; dims.nodes()],
            t: 0.0,
        }
    }
}

/// Temporal-mean excitatory rates for the ON and OFF inputs of one channel,
/// one plane per `(s, θ)` in lattice plane order.
#[derive(Debug, Clone, PartialEq)]
pub struct ConspicuityResponse {
    pub mean_rate_on: Vec<Plane>,
    pub mean_rate_off: Vec<Plane>,
}

/// Lateral connections leaving one source plane, sorted by `(dy, dx)`.
/// Entry `k` adds `weight[k] · g` at `i + delta[k]` for a source unit at
/// in-plane index `i`; J targets lie in the first half of the lateral
/// buffer and W targets in the second.
#[derive(Default)]
struct Scatter {
    /// `(dy, start, end)` for every distinct `dy`.
    rows: Vec<(i32, usize, usize)>,
    dx: Vec<i32>,
    delta: Vec<isize>,
    weight: Vec<f64>,
    min_dx: i32,
    max_dx: i32,
}

impl Scatter {
    fn new(taps: &[&super::kernels::Tap], width: usize, n: usize, plane_len: usize) -> Self {
        let mut entries = Vec::with_capacity(2 * taps.len());
        for t in taps {
            let base = t.target_plane as usize * plane_len;
            for (off, w) in [(0, t.j), (n, t.w)] {
                if w > 0.0 {
                    entries.push((t.dy, t.dx, (off + base) as isize, w));
                }
            }
        }
        entries.sort_by_key(|e| (e.0, e.1, e.2));
        let mut s = Scatter::default();
        for (dy, dx, base, w) in entries {
            match s.rows.last_mut() {
                Some(r) if r.0 == dy => r.2 += 1,
                _ => s.rows.push((dy, s.dx.len(), s.dx.len() + 1)),
            }
            s.dx.push(dx);
            s.delta.push(base - dy as isize * width as isize - dx as isize);
            s.weight.push(w);
        }
        s.min_dx = s.dx.iter().copied().min().unwrap_or(0);
        s.max_dx = s.dx.iter().copied().max().unwrap_or(0);
        s
    }

    fn is_empty(&self) -> bool {
        self.dx.is_empty()
    }
}

#[inline]
fn scatter_range(lat: &mut [f64], i: usize, g: f64, delta: &[isize], weight: &[f64]) {
    for (&d, &w) in delta.iter().zip(weight) {
        lat[(i as isize + d) as usize] += w * g;
    }
}

#[derive(Clone, Copy)]
struct PsiLink {
    target: usize,
    source: usize,
    weight: f64,
}

/// Integrates the lattice for one set of input planes.
pub struct Simulator<'k> {
    params: LatticeParams,
    kernels: &'k CouplingKernels,
    dims: LatticeDims,
    scatter: Vec<Scatter>,
    psi: Vec<PsiLink>,
    // Scratch.
    gx: Vec<f64>,
    gy: Vec<f64>,
    /// `Σ J g_x` followed by `Σ W g_x`.
    lat: Vec<f64>,
}

impl<'k> Simulator<'k> {
    pub fn new(params: &LatticeParams, kernels: &'k CouplingKernels, width: usize, height: usize) -> Result<Self> {
        params.validate()?;
        if width == 0 || height == 0 {
            return Err(invalid("lattice has zero size"));
        }
        let dims = LatticeDims {
            width,
            height,
            scales: kernels.scales(),
        };
        let plane_len = dims.plane_len();
        let (w, h) = (width as i32, height as i32);
        let n = dims.nodes();
        let scatter = (0..dims.planes())
            .map(|p| {
                let taps: Vec<_> = kernels
                    .taps_from(p)
                    .iter()
                    .filter(|t| match params.boundary {
                        LatticeBoundary::Open => t.dx.abs() < w && t.dy.abs() < h,
                        LatticeBoundary::Periodic => true,
                    })
                    .collect();
                Scatter::new(&taps, width, n, plane_len)
            })
            .collect();
        let mut psi = Vec::new();
        for s in 1..=dims.scales {
            for o in Orientation::ALL {
                for sp in 1..=dims.scales {
                    for op in Orientation::ALL {
                        let weight = params.psi.weight(s.abs_diff(sp), o, op);
                        if weight != 0.0 {
                            psi.push(PsiLink {
                                target: ((s - 1) * 3 + o.index()) * plane_len,
                                source: ((sp - 1) * 3 + op.index()) * plane_len,
                                weight,
                            });
                        }
                    }
                }
            }
        }
        Ok(Self {
            params: params.clone(),
            kernels,
            dims,
            scatter,
            psi,
            gx: vec![0.0; n],
            gy: vec![0.0; n],
            lat: vec![0.0; 2 * n],
        })
    }

    pub fn dims(&self) -> LatticeDims {
        self.dims
    }

    pub fn params(&self) -> &LatticeParams {
        &self.params
    }

    pub fn kernels(&self) -> &CouplingKernels {
        self.kernels
    }

    /// Time derivatives at the stage state `(x + c·kx, y + c·ky)` for
    /// external drive `input` (already scaled) and inhibitory-unit noise
    /// `noise`.
    #[allow(clippy::too_many_arguments)]
    fn derivative(
        &mut self,
        (x, y): (&[f64], &[f64]),
        c: f64,
        (kx, ky): (&[f64], &[f64]),
        input: &[f64],
        noise: &[f64],
        (dx_out, dy_out): (&mut [f64], &mut [f64]),
    ) {
        let p = &self.params;
        let ax = p.activation_x;
        let ay = p.activation_y;
        let (ax_, ay_, j0, i0, ic, e) = (p.alpha_x, p.alpha_y, p.j0, p.i0, p.ic, p.inhibitory_drive);
        let n = x.len();
        let (x, y, kx, ky) = (&x[..n], &y[..n], &kx[..n], &ky[..n]);
        {
            let (gx, gy) = (&mut self.gx[..n], &mut self.gy[..n]);
            for i in 0..n {
                gx[i] = ax.eval(x[i] + c * kx[i]);
                gy[i] = ay.eval(y[i] + c * ky[i]);
            }
        }
        self.lateral();
        let plane_len = self.dims.plane_len();
        let mut links = self.psi.iter().peekable();
        for start in (0..n).step_by(plane_len) {
            let r = start..start + plane_len;
            let (x, y, kx, ky) = (&x[r.clone()], &y[r.clone()], &kx[r.clone()], &ky[r.clone()]);
            let (gx, gy) = (&self.gx[r.clone()], &self.gy[r.clone()]);
            let (lj, lw) = (&self.lat[r.clone()], &self.lat[n + start..n + start + plane_len]);
            let (input, noise) = (&input[r.clone()], &noise[r.clone()]);
            let (dx, dy) = (&mut dx_out[r.clone()], &mut dy_out[r]);
            for i in 0..plane_len {
                let xs = x[i] + c * kx[i];
                let ys = y[i] + c * ky[i];
                dx[i] = -ax_ * xs - gy[i] + j0 * gx[i] + lj[i] + input[i] + i0;
                dy[i] = -ay_ * ys + e * gx[i] + lw[i] + ic + noise[i];
            }
            while let Some(link) = links.next_if(|l| l.target == start) {
                let src = &self.gy[link.source..link.source + plane_len];
                for (d, &g) in dx.iter_mut().zip(src) {
                    *d -= link.weight * g;
                }
            }
        }
    }

    /// Accumulates `Σ J g_x` and `Σ W g_x` by scattering from every active
    /// unit.
    fn lateral(&mut self) {
        self.lat.fill(0.0);
        let width = self.dims.width;
        let (w, h) = (width as i32, self.dims.height as i32);
        let plane_len = self.dims.plane_len();
        let periodic = self.params.boundary == LatticeBoundary::Periodic;
        let lat = &mut self.lat;
        for (p, sc) in self.scatter.iter().enumerate() {
            if sc.is_empty() {
                continue;
            }
            let gx = &self.gx[p * plane_len..(p + 1) * plane_len];
            for (i, &g) in gx.iter().enumerate() {
                if g <= 0.0 {
                    continue;
                }
                let (x, y) = ((i % width) as i32, (i / width) as i32);
                if periodic {
                    for &(dy, start, end) in &sc.rows {
                        let ty = (y - dy).rem_euclid(h);
                        for k in start..end {
                            let tx = (x - sc.dx[k]).rem_euclid(w);
                            // `delta` holds `base − dy·w − dx`; swap in the
                            // wrapped position.
                            let base = sc.delta[k] + dy as isize * w as isize + sc.dx[k] as isize;
                            lat[base as usize + (ty * w + tx) as usize] += sc.weight[k] * g;
                        }
                    }
                    continue;
                }
                // Rows whose target row `y − dy` lies inside.
                let r0 = sc.rows.partition_point(|r| r.0 <= y - h);
                let r1 = sc.rows.partition_point(|r| r.0 <= y);
                if r0 >= r1 {
                    continue;
                }
                if x >= sc.max_dx && x - w < sc.min_dx {
                    // Every column offset stays inside.
                    let (lo, hi) = (sc.rows[r0].1, sc.rows[r1 - 1].2);
                    scatter_range(lat, i, g, &sc.delta[lo..hi], &sc.weight[lo..hi]);
                    continue;
                }
                for &(_, start, end) in &sc.rows[r0..r1] {
                    let dxs = &sc.dx[start..end];
                    let lo = start + dxs.partition_point(|&d| d <= x - w);
                    let hi = start + dxs.partition_point(|&d| d <= x);
                    if lo < hi {
                        scatter_range(lat, i, g, &sc.delta[lo..hi], &sc.weight[lo..hi]);
                    }
                }
            }
        }
    }

    /// Runs from rest on `input` (one plane per lattice plane) and returns
    /// the mean `g_x` over the final `avg_window`.
    pub fn run(&mut self, input: &[Plane]) -> Result<Vec<Plane>> {
        self.run_observed(input, &mut |_, _| {})
    }

    /// As [`Simulator::run`], calling `observer(state, g_x)` after every step.
    pub fn run_observed(
        &mut self,
        input: &[Plane],
        observer: &mut dyn FnMut(&LatticeState, &[f64]),
    ) -> Result<Vec<Plane>> {
        let dims = self.dims;
        if input.len() != dims.planes() {
            return Err(invalid("input must hold one plane per scale and orientation"));
        }
        let plane_len = dims.plane_len();
        let mut drive = Vec::with_capacity(dims.nodes());
        for plane in input {
            if plane.dims() != (dims.width, dims.height) {
                return Err(Error::DimensionMismatch {
                    expected: (dims.width, dims.height),
                    got: plane.dims(),
                });
            }
            if !plane.all_finite() {
                return Err(invalid("lattice input contains non-finite values"));
            }
            drive.extend(plane.as_slice().iter().map(|v| v * self.params.input_gain));
        }

        let n = dims.nodes();
        let dt = self.params.dt;
        let steps = self.params.steps();
        let window = self.params.window_steps();
        let integrator = self.params.integrator;
        let ax = self.params.activation_x;
        let noise_sd = self.params.ic_noise;
        let mut rng = ChaCha8Rng::seed_from_u64(self.params.seed);
        let mut noise = vec![0.0; n];

        let mut state = LatticeState::at_rest(dims);
        let mut acc = vec![0.0; n];
        let stages = match integrator {
            Integrator::Euler => 1,
            Integrator::Heun => 2,
            Integrator::Rk4 => 4,
        };
        let mut kx: Vec<Vec<f64>> = (0..stages).map(|_| vec![0.0; n]).collect();
        let mut ky: Vec<Vec<f64>> = (0..stages).map(|_| vec![0.0; n]).collect();

        for step in 0..steps {
            if noise_sd > 0.0 {
                for v in noise.iter_mut() {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    *v = noise_sd * z;
                }
            }
            let xy = (&state.x[..], &state.y[..]);
            // Stage `k` is evaluated at `x + c_k·k_{k−1}`.
            let coeffs: &[f64] = match integrator {
                Integrator::Euler => &[0.0],
                Integrator::Heun => &[0.0, dt],
                Integrator::Rk4 => &[0.0, 0.5 * dt, 0.5 * dt, dt],
            };
            for (stage, &c) in coeffs.iter().enumerate() {
                let (prev_x, cur_x) = kx.split_at_mut(stage);
                let (prev_y, cur_y) = ky.split_at_mut(stage);
                let k_prev = match stage {
                    0 => xy,
                    _ => (&prev_x[stage - 1][..], &prev_y[stage - 1][..]),
                };
                let out = (&mut cur_x[0][..], &mut cur_y[0][..]);
                self.derivative(xy, c, k_prev, &drive, &noise, out);
            }
            match integrator {
                Integrator::Euler => {
                    for i in 0..n {
                        state.x[i] += dt * kx[0][i];
                        state.y[i] += dt * ky[0][i];
                    }
                }
                Integrator::Heun => {
                    let c = 0.5 * dt;
                    for i in 0..n {
                        state.x[i] += c * (kx[0][i] + kx[1][i]);
                        state.y[i] += c * (ky[0][i] + ky[1][i]);
                    }
                }
                Integrator::Rk4 => {
                    let c = dt / 6.0;
                    for i in 0..n {
                        state.x[i] += c * (kx[0][i] + 2.0 * kx[1][i] + 2.0 * kx[2][i] + kx[3][i]);
                        state.y[i] += c * (ky[0][i] + 2.0 * ky[1][i] + 2.0 * ky[2][i] + ky[3][i]);
                    }
                }
            }
            state.t = (step + 1) as f64 * dt;
            if state.x.iter().chain(&state.y).any(|v| !v.is_finite()) {
                return Err(Error::Divergence { t: state.t, dt });
            }
            for (g, &v) in self.gx.iter_mut().zip(&state.x) {
                *g = ax.eval(v);
            }
            if step + window >= steps {
                for (a, &g) in acc.iter_mut().zip(&self.gx) {
                    *a += g;
                }
            }
            observer(&state, &self.gx);
        }

        let scale = 1.0 / window as f64;
        Ok(acc
            .chunks(plane_len)
            .map(|c| {
                Plane::from_vec(dims.width, dims.height, c.iter().map(|v| v * scale).collect())
                    .expect("chunk has plane size")
            })
            .collect())
    }
}

fn pyramid_planes(p: &WaveletPyramid) -> Vec<Plane> {
    p.bands.iter().flat_map(|b| b.iter().cloned()).collect()
}

/// Mean excitatory rates for one set of input planes.
pub fn simulate(input: &[Plane], kernels: &CouplingKernels, params: &LatticeParams) -> Result<Vec<Plane>> {
    simulate_observed(input, kernels, params, &mut |_, _| {})
}

/// [`simulate`] with a per-step observer receiving the state and `g_x`.
pub fn simulate_observed(
    input: &[Plane],
    kernels: &CouplingKernels,
    params: &LatticeParams,
    observer: &mut dyn FnMut(&LatticeState, &[f64]),
) -> Result<Vec<Plane>> {
    let (w, h) = input
        .first()
        .map(|p| p.dims())
        .ok_or_else(|| invalid("no input planes"))?;
    Simulator::new(params, kernels, w, h)?.run_observed(input, observer)
}

/// Runs the ON and OFF pyramids of one channel with the same noise seed.
/// Identical inputs are simulated once.
pub fn simulate_channel(
    on: &WaveletPyramid,
    off: &WaveletPyramid,
    kernels: &CouplingKernels,
    params: &LatticeParams,
) -> Result<ConspicuityResponse> {
    if on.num_scales() != kernels.scales() || off.num_scales() != kernels.scales() {
        return Err(invalid("pyramid scale count differs from the kernel tables"));
    }
    let on_planes = pyramid_planes(on);
    let off_planes = pyramid_planes(off);
    let mean_rate_on = simulate(&on_planes, kernels, params)?;
    let mean_rate_off = if off_planes == on_planes {
        mean_rate_on.clone()
    } else {
        simulate(&off_planes, kernels, params)?
    };
    Ok(ConspicuityResponse {
        mean_rate_on,
        mean_rate_off,
    })
}

/// `Ŝ = M(ω⁺) + M(ω⁻)` per `(s, θ)`; the residual enters at integration.
pub fn conspicuity(response: &ConspicuityResponse) -> Vec<Plane> {
    response
        .mean_rate_on
        .iter()
        .zip(&response.mean_rate_off)
        .map(|(a, b)| a.zip_map(b, |u, v| u + v))
        .collect()
}
