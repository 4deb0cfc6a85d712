//! Explicit averaging over sampled telegraph histories.
//!
//! Each history is drawn with exponential waiting times; between switches
//! the qubit Hamiltonian `H = -½ h⃗·σ⃗`, `h⃗ = B₀ẑ + s g⃗`, is constant and the
//! propagator is the closed-form `U = cos(|h|τ/2) I + i sin(|h|τ/2) ĥ·σ⃗`.
//!
//! Trajectory `i` draws qubit `q`'s history from ChaCha8 stream `2i + q` of
//! the run seed, so results do not depend on thread count. Runs are summed
//! in fixed chunks of [`CHUNK_RUNS`] and the chunk sums are combined in a
//! fixed pairwise tree.

use nalgebra::{Matrix2, Matrix3, Matrix4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;

use crate::bloch::{from_bloch, to_bloch, BlochVector2Q, DensityMatrix};
use crate::entanglement::InitialState;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::linalg::{c, kron2, pauli, C64};
use crate::noise::{QubitPair, QubitSpec, RtnSource};

/// Trajectories per summation chunk.
pub const CHUNK_RUNS: usize = 256;

/// One realization of `s(t)` on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub initial_sign: f64,
    pub switch_times: Vec<f64>,
    pub horizon: f64,
}

impl Trajectory {
    /// A history that never switches.
    pub fn constant(sign: f64, horizon: f64) -> Self {
        Trajectory {
            initial_sign: sign.signum(),
            switch_times: Vec::new(),
            horizon,
        }
    }

    /// `s(t)`; a switch at `t_k` takes effect for `t ≥ t_k`.
    pub fn sign_at(&self, t: f64) -> f64 {
        let flips = self.switch_times.partition_point(|&x| x <= t);
        if flips % 2 == 0 {
            self.initial_sign
        } else {
            -self.initial_sign
        }
    }
}

fn draw<R: Rng>(rng: &mut R, gamma: f64, horizon: f64) -> Trajectory {
    let initial_sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
    let mut switch_times = Vec::new();
    if gamma > 0.0 {
        let wait = Exp::new(gamma).expect("gamma > 0");
        let mut t = wait.sample(rng);
        while t <= horizon {
            switch_times.push(t);
            t += wait.sample(rng);
        }
    }
    Trajectory {
        initial_sign,
        switch_times,
        horizon,
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Unbiased initial sign, i.i.d. exponential waiting times with rate γ.
pub fn sample_trajectory(src: &RtnSource, horizon: f64, seed: u64) -> Result<Trajectory> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::param("horizon", format!("must be > 0, got {horizon}")));
    }
    Ok(draw(&mut stream_rng(seed, 0), src.gamma, horizon))
}

fn field(spec: &QubitSpec, s: f64) -> [f64; 3] {
    match spec.source {
        Some(src) => {
            let g = src.coupling_vector();
            [s * g[0], s * g[1], spec.b0 + s * g[2]]
        }
        None => [0.0, 0.0, spec.b0],
    }
}

/// `exp(-iHτ)` for `H = -½ h⃗·σ⃗`.
pub fn segment_unitary(h: [f64; 3], tau: f64) -> Matrix2<C64> {
    let norm = (h[0] * h[0] + h[1] * h[1] + h[2] * h[2]).sqrt();
    if norm == 0.0 {
        return Matrix2::identity();
    }
    let (s, co) = (0.5 * norm * tau).sin_cos();
    let mut u = Matrix2::identity() * c(co, 0.0);
    for (k, hk) in h.iter().enumerate() {
        u += pauli(k + 1) * c(0.0, s * hk / norm);
    }
    u
}

/// Bloch-vector image of [`segment_unitary`]: rotation by `-|h|τ` about ĥ,
/// so that `ṅ = n × h`.
pub fn segment_rotation(h: [f64; 3], tau: f64) -> Matrix3<f64> {
    let norm = (h[0] * h[0] + h[1] * h[1] + h[2] * h[2]).sqrt();
    if norm == 0.0 {
        return Matrix3::identity();
    }
    let k = crate::linalg::cross_matrix([h[0] / norm, h[1] / norm, h[2] / norm]);
    let (s, co) = (norm * tau).sin_cos();
    Matrix3::identity() - k * s + k * k * (1.0 - co)
}

/// Calls `visit(i, piece)` with the propagator accumulated up to each grid
/// time, composing `step(h, τ)` over the constant-sign pieces.
fn walk<M, F, V>(spec: &QubitSpec, traj: Option<&Trajectory>, times: &[f64], identity: M, step: F, mut visit: V)
where
    M: Copy + std::ops::Mul<Output = M>,
    F: Fn([f64; 3], f64) -> M,
    V: FnMut(usize, &M),
{
    let mut acc = identity;
    let mut now = 0.0;
    let mut k = 0;
    let switches: &[f64] = traj.map_or(&[], |t| &t.switch_times);
    let mut sign = traj.map_or(1.0, |t| t.initial_sign);
    for (i, &t) in times.iter().enumerate() {
        while k < switches.len() && switches[k] <= t {
            let ts = switches[k];
            if ts > now {
                acc = step(field(spec, sign), ts - now) * acc;
                now = ts;
            }
            sign = -sign;
            k += 1;
        }
        if t > now {
            acc = step(field(spec, sign), t - now) * acc;
            now = t;
        }
        visit(i, &acc);
    }
}

fn check_horizon(traj: Option<&Trajectory>, grid: &TimeGrid) -> Result<()> {
    if let Some(tr) = traj {
        if grid.last() > tr.horizon * (1.0 + 1e-12) {
            return Err(Error::OutsideHorizon {
                time: grid.last(),
                horizon: tr.horizon,
            });
        }
    }
    Ok(())
}

/// Exact density-matrix path for one pair of histories: `ρ(t) = U ρ₀ U†`
/// with `U = U_A ⊗ U_B`. A qubit without a source takes `None`.
pub fn evolve_trajectory(
    traj_a: Option<&Trajectory>,
    traj_b: Option<&Trajectory>,
    pair: &QubitPair,
    initial: &DensityMatrix,
    grid: &TimeGrid,
) -> Result<Vec<DensityMatrix>> {
    check_horizon(traj_a, grid)?;
    check_horizon(traj_b, grid)?;
    let times = grid.times();
    let mut ua = vec![Matrix2::<C64>::identity(); times.len()];
    let mut ub = ua.clone();
    walk(&pair.a, traj_a, times, Matrix2::identity(), segment_unitary, |i, u| ua[i] = *u);
    walk(&pair.b, traj_b, times, Matrix2::identity(), segment_unitary, |i, u| ub[i] = *u);
    let rho0 = initial.matrix();
    Ok(ua
        .iter()
        .zip(&ub)
        .map(|(a, b)| {
            let u = kron2(a, b);
            DensityMatrix::new_unchecked(u * rho0 * u.adjoint())
        })
        .collect())
}

/// Trajectory-averaged state on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub grid: TimeGrid,
    pub bloch_mean: Vec<BlochVector2Q>,
    pub rho_mean: Vec<DensityMatrix>,
    pub n_runs: usize,
    /// Standard error of the mean of each Bloch component (`[0]` unused).
    pub stderr_estimate: Vec<[f64; 16]>,
}

impl EnsembleResult {
    /// Largest standard error over all components and times.
    pub fn max_stderr(&self) -> f64 {
        self.stderr_estimate
            .iter()
            .flat_map(|s| s.iter().copied())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone)]
struct Moments {
    sum: Vec<[f64; 16]>,
    sum_sq: Vec<[f64; 16]>,
}

impl Moments {
    fn zeros(n: usize) -> Self {
        Moments {
            sum: vec![[0.0; 16]; n],
            sum_sq: vec![[0.0; 16]; n],
        }
    }

    fn add(&mut self, i: usize, n: &[f64; 16]) {
        for k in 1..16 {
            self.sum[i][k] += n[k];
            self.sum_sq[i][k] += n[k] * n[k];
        }
    }

    fn merge(mut self, other: &Moments) -> Self {
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            for k in 0..16 {
                a[k] += b[k];
            }
        }
        for (a, b) in self.sum_sq.iter_mut().zip(&other.sum_sq) {
            for k in 0..16 {
                a[k] += b[k];
            }
        }
        self
    }
}

fn pairwise(mut parts: Vec<Moments>) -> Moments {
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(a) = it.next() {
            next.push(match it.next() {
                Some(b) => a.merge(&b),
                None => a,
            });
        }
        parts = next;
    }
    parts.pop().expect("at least one chunk")
}

fn extended_rotations(
    spec: &QubitSpec,
    traj: Option<&Trajectory>,
    times: &[f64],
    out: &mut [Matrix4<f64>],
) {
    walk(spec, traj, times, Matrix3::identity(), segment_rotation, |i, o| {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(1, 1).copy_from(o);
        out[i] = m;
    });
}

/// Average of `n(t)` over `n_runs` pairs of independent histories.
///
/// Each run is propagated through the Bloch images of its unitaries,
/// `N(t) = O_A N₀ O_Bᵀ` with `N_{ab} = n_{4a+b}`, which equals
/// [`evolve_trajectory`] up to roundoff.
pub fn ensemble_average_from(
    pair: &QubitPair,
    initial: &DensityMatrix,
    grid: &TimeGrid,
    n_runs: usize,
    seed: u64,
) -> Result<EnsembleResult> {
    if n_runs == 0 {
        return Err(Error::param("n_runs", "must be >= 1"));
    }
    let n0 = to_bloch(initial)?;
    let n0m = Matrix4::from_fn(|a, b| n0.get(4 * a + b));
    let times = grid.times();
    let horizon = grid.last().max(f64::MIN_POSITIVE);
    let nt = times.len();
    let n_chunks = n_runs.div_ceil(CHUNK_RUNS);

    let chunks: Vec<Moments> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut m = Moments::zeros(nt);
            let mut oa = vec![Matrix4::identity(); nt];
            let mut ob = vec![Matrix4::identity(); nt];
            let start = chunk * CHUNK_RUNS;
            let end = (start + CHUNK_RUNS).min(n_runs);
            for run in start..end {
                let (ta, tb) = run_trajectories(pair, horizon, run, seed);
                extended_rotations(&pair.a, ta.as_ref(), times, &mut oa);
                extended_rotations(&pair.b, tb.as_ref(), times, &mut ob);
                for i in 0..nt {
                    let n = oa[i] * n0m * ob[i].transpose();
                    let flat: [f64; 16] = std::array::from_fn(|k| n[(k / 4, k % 4)]);
                    m.add(i, &flat);
                }
            }
            m
        })
        .collect();
    let total = pairwise(chunks);

    let nf = n_runs as f64;
    let mut bloch_mean = Vec::with_capacity(nt);
    let mut stderr_estimate = Vec::with_capacity(nt);
    for i in 0..nt {
        let mut mean = [0.0; 16];
        let mut se = [0.0; 16];
        mean[0] = 1.0;
        for k in 1..16 {
            let mu = total.sum[i][k] / nf;
            mean[k] = mu;
            if n_runs > 1 {
                let var = ((total.sum_sq[i][k] / nf - mu * mu) * nf / (nf - 1.0)).max(0.0);
                se[k] = (var / nf).sqrt();
            }
        }
        bloch_mean.push(BlochVector2Q::from_extended(&mean)?);
        stderr_estimate.push(se);
    }
    let rho_mean = bloch_mean.iter().map(from_bloch).collect();
    Ok(EnsembleResult {
        grid: grid.clone(),
        bloch_mean,
        rho_mean,
        n_runs,
        stderr_estimate,
    })
}

/// [`ensemble_average_from`] for an extended Werner initial state.
pub fn ensemble_average(
    pair: &QubitPair,
    state: &InitialState,
    grid: &TimeGrid,
    n_runs: usize,
    seed: u64,
) -> Result<EnsembleResult> {
    ensemble_average_from(pair, &state.density_matrix(), grid, n_runs, seed)
}

/// The histories used by run `run` of [`ensemble_average`].
pub fn run_trajectories(pair: &QubitPair, horizon: f64, run: usize, seed: u64) -> (Option<Trajectory>, Option<Trajectory>) {
    let ta = pair
        .a
        .source
        .map(|s| draw(&mut stream_rng(seed, 2 * run as u64), s.gamma, horizon));
    let tb = pair
        .b
        .source
        .map(|s| draw(&mut stream_rng(seed, 2 * run as u64 + 1), s.gamma, horizon));
    (ta, tb)
}
