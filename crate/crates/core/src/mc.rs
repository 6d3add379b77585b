//! Monte Carlo cross-validation: fractional Brownian path samplers (exact
//! constructions for alpha in {1, 2}, Cholesky and circulant embedding for
//! general alpha) and order-statistic estimators of B_alpha^h(x, E).

use alloc::vec;
use alloc::vec::Vec;
use libm::{cos, exp, fabs, log, pow, sin, sqrt};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::problem::{Domain, Drift, EvalError, Flag, Method, PBValue, Problem};

/// Path construction used by the samplers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Generator {
    /// alpha = 2: B(t) = t N, exact.
    ExactLine,
    /// alpha = 1: independent-increment random walk, exact on the grid.
    ExactBm,
    /// Dense covariance factorization; exact in distribution, O(n^2) per path.
    Cholesky,
    /// Davies-Harte circulant embedding of fractional Gaussian noise.
    Circulant,
}

#[derive(Clone, Copy, Debug)]
pub struct MCConfig {
    pub n_paths: u64,
    pub dt: f64,
    /// Truncation horizon for half-line domains; None picks one from the
    /// boundary growth.
    pub horizon: Option<f64>,
    pub seed: u64,
    /// None selects the exact construction when available, circulant otherwise.
    pub generator: Option<Generator>,
    /// Re-estimate at dt/2 with n/4 paths to expose discretization bias.
    pub refine: bool,
}

impl Default for MCConfig {
    fn default() -> Self {
        MCConfig { n_paths: 20_000, dt: 0.005, horizon: None, seed: 1, generator: None, refine: false }
    }
}

#[derive(Clone, Debug)]
pub struct MCEstimate {
    pub value: f64,
    pub std_err: f64,
    pub n_paths: u64,
    /// Estimated discretization bias when refinement was requested: the
    /// dt -> dt/2 gap extrapolated under order-(alpha/2) convergence.
    pub refinement_gap: Option<f64>,
    pub flags: Vec<Flag>,
}

impl MCEstimate {
    pub fn to_pbvalue(&self) -> PBValue {
        let mut err = 2.0 * self.std_err;
        if let Some(g) = self.refinement_gap {
            err += g;
        }
        let mut v = PBValue::new(self.value, err, Method::Mc);
        for &f in &self.flags {
            v = v.with_flag(f);
        }
        v.with_flag(Flag::McBased)
    }
}

// ---------------------------------------------------------------------------
// randomness
// ---------------------------------------------------------------------------

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent stream per (seed, path index); stable across chunked and
/// threaded execution orders.
fn path_rng(seed: u64, idx: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut s = splitmix64(seed) ^ splitmix64(idx.wrapping_mul(0xA24B_AED4_963E_E407));
    for chunk in key.chunks_mut(8) {
        s = splitmix64(s);
        chunk.copy_from_slice(&s.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

struct Normals {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl Normals {
    fn new(rng: ChaCha8Rng) -> Self {
        Normals { rng, spare: None }
    }

    fn uniform(&mut self) -> f64 {
        loop {
            let u = (self.rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0);
            if u > 0.0 {
                return u;
            }
        }
    }

    /// Box-Muller standard normal.
    fn next(&mut self) -> f64 {
        if let Some(v) = self.spare.take() {
            return v;
        }
        let r = sqrt(-2.0 * log(self.uniform()));
        let th = 2.0 * core::f64::consts::PI * self.uniform();
        self.spare = Some(r * sin(th));
        r * cos(th)
    }
}

// ---------------------------------------------------------------------------
// grid
// ---------------------------------------------------------------------------

/// Uniform grid t_k = k dt, k in [kmin, kmax], snapped to the domain.
#[derive(Clone, Debug)]
struct Grid {
    kmin: i64,
    kmax: i64,
    dt: f64,
}

impl Grid {
    fn new(domain: &Domain, dt: f64, horizon: f64) -> Result<Self, EvalError> {
        if !(dt > 0.0) {
            return Err(EvalError::InvalidInput("dt must be positive"));
        }
        let (a, b) = match *domain {
            Domain::HalfLine => (0.0, horizon),
            Domain::Interval { a, b } => (a, b),
        };
        let kmin = libm::round(a / dt) as i64;
        let kmax = libm::round(b / dt) as i64;
        if kmax <= kmin {
            return Err(EvalError::GridTooCoarse);
        }
        Ok(Grid { kmin, kmax, dt })
    }

    fn len(&self) -> usize {
        (self.kmax - self.kmin + 1) as usize
    }

    fn t(&self, i: usize) -> f64 {
        (self.kmin + i as i64) as f64 * self.dt
    }
}

// ---------------------------------------------------------------------------
// samplers
// ---------------------------------------------------------------------------

/// Per-grid state reused across paths.
struct Sampler {
    grid: Grid,
    alpha: f64,
    gen: Generator,
    /// lower-triangular factor for Cholesky (row-major, n x n over nonzero t)
    chol: Vec<f64>,
    chol_idx: Vec<usize>,
    jitter: bool,
    /// circulant spectrum weights sqrt(lambda_k / m) for Davies-Harte
    spec: Vec<f64>,
}

impl Sampler {
    fn new(alpha: f64, grid: Grid, gen: Option<Generator>) -> Result<Self, EvalError> {
        let gen = match gen {
            Some(g) => g,
            None => {
                if alpha == 2.0 {
                    Generator::ExactLine
                } else if alpha == 1.0 {
                    Generator::ExactBm
                } else {
                    Generator::Circulant
                }
            }
        };
        let mut s = Sampler {
            grid,
            alpha,
            gen,
            chol: Vec::new(),
            chol_idx: Vec::new(),
            jitter: false,
            spec: Vec::new(),
        };
        match gen {
            Generator::ExactLine => {
                if alpha != 2.0 {
                    return Err(EvalError::UnsupportedAlpha);
                }
            }
            Generator::ExactBm => {
                if alpha != 1.0 {
                    return Err(EvalError::UnsupportedAlpha);
                }
            }
            Generator::Cholesky => s.build_cholesky()?,
            Generator::Circulant => s.build_circulant(),
        }
        Ok(s)
    }

    fn build_cholesky(&mut self) -> Result<(), EvalError> {
        let n_all = self.grid.len();
        self.chol_idx = (0..n_all).filter(|&i| self.grid.kmin + i as i64 != 0).collect();
        let n = self.chol_idx.len();
        if n > 4096 {
            return Err(EvalError::InvalidInput("cholesky sampler limited to 4096 grid points"));
        }
        let a = self.alpha;
        let cov = |i: usize, j: usize| {
            let (s, t) = (self.grid.t(self.chol_idx[i]), self.grid.t(self.chol_idx[j]));
            0.5 * (pow(fabs(s), a) + pow(fabs(t), a) - pow(fabs(s - t), a))
        };
        for attempt in 0..2 {
            let jit = if attempt == 0 { 0.0 } else { 1e-12 };
            let mut l = vec![0.0f64; n * n];
            let mut ok = true;
            'outer: for i in 0..n {
                for j in 0..=i {
                    let mut s = cov(i, j);
                    if i == j {
                        s += jit * cov(i, i).max(1.0);
                    }
                    for k in 0..j {
                        s -= l[i * n + k] * l[j * n + k];
                    }
                    if i == j {
                        if s <= 0.0 {
                            ok = false;
                            break 'outer;
                        }
                        l[i * n + i] = sqrt(s);
                    } else {
                        l[i * n + j] = s / l[j * n + j];
                    }
                }
            }
            if ok {
                self.chol = l;
                self.jitter = attempt > 0;
                return Ok(());
            }
        }
        Err(EvalError::InvalidInput("covariance not factorizable"))
    }

    fn build_circulant(&mut self) {
        // fGn autocovariance on the unit grid, scaled by dt^alpha; the run is
        // extended to include the origin so the anchor B(0) = 0 is exact
        let n = (self.grid.kmax.max(0) - self.grid.kmin.min(0)) as usize;
        let a = self.alpha;
        let scale = pow(self.grid.dt, a);
        let gamma = |j: f64| 0.5 * scale * (pow(j + 1.0, a) + pow(fabs(j - 1.0), a) - 2.0 * pow(j, a));
        let mut m = 1usize;
        while m < 2 * n {
            m *= 2;
        }
        let mut re = vec![0.0f64; m];
        let mut im = vec![0.0f64; m];
        let half = m / 2;
        for j in 0..=half {
            re[j] = gamma(j as f64);
        }
        for j in 1..half {
            re[m - j] = re[j];
        }
        fft(&mut re, &mut im);
        // eigenvalues are real and (for fGn) nonnegative up to roundoff
        self.spec = re.iter().map(|&l| sqrt(l.max(0.0) / m as f64)).collect();
    }

    /// One fBm path on the grid; anchored so that B(0) = 0.
    fn sample(&self, nrm: &mut Normals, out: &mut Vec<f64>) {
        let n_all = self.grid.len();
        out.clear();
        match self.gen {
            Generator::ExactLine => {
                let z = nrm.next();
                for i in 0..n_all {
                    out.push(z * self.grid.t(i));
                }
            }
            Generator::ExactBm => {
                out.resize(n_all, 0.0);
                let sd = sqrt(self.grid.dt);
                let zero = (-self.grid.kmin) as usize;
                let anchor = if self.grid.kmin >= 0 {
                    0 // grid starts at or right of 0; walk outward from kmin
                } else if self.grid.kmax <= 0 {
                    n_all - 1
                } else {
                    zero
                };
                // walk right of the anchor
                let mut acc = 0.0;
                for i in (anchor + 1)..n_all {
                    acc += sd * nrm.next();
                    out[i] = acc;
                }
                // walk left of the anchor
                acc = 0.0;
                for i in (0..anchor).rev() {
                    acc += sd * nrm.next();
                    out[i] = acc;
                }
                // shift so B(0) = 0 exactly when 0 is interior; when the grid
                // sits off origin, add the independent bridge from 0 to the
                // anchor point
                if self.grid.kmin > 0 || self.grid.kmax < 0 {
                    let t0 = self.grid.t(anchor);
                    let b0 = sqrt(fabs(t0)) * nrm.next();
                    for v in out.iter_mut() {
                        *v += b0;
                    }
                }
            }
            Generator::Cholesky => {
                let n = self.chol_idx.len();
                let mut z = Vec::with_capacity(n);
                for _ in 0..n {
                    z.push(nrm.next());
                }
                out.resize(n_all, 0.0);
                for (r, &gi) in self.chol_idx.iter().enumerate() {
                    let mut s = 0.0;
                    for k in 0..=r {
                        s += self.chol[r * n + k] * z[k];
                    }
                    out[gi] = s;
                }
            }
            Generator::Circulant => {
                let m = self.spec.len();
                let half = m / 2;
                let mut re = vec![0.0f64; m];
                let mut im = vec![0.0f64; m];
                re[0] = self.spec[0] * nrm.next();
                re[half] = self.spec[half] * nrm.next();
                let inv_sqrt2 = 1.0 / core::f64::consts::SQRT_2;
                for k in 1..half {
                    let s = self.spec[k] * inv_sqrt2;
                    let (xr, xi) = (s * nrm.next(), s * nrm.next());
                    re[k] = xr;
                    im[k] = xi;
                    re[m - k] = xr;
                    im[m - k] = -xi;
                }
                fft(&mut re, &mut im);
                // re[0..n] is now fGn over the extended run; integrate,
                // re-anchor at t = 0, then copy out the domain window
                let ext_kmin = self.grid.kmin.min(0);
                let n = (self.grid.kmax.max(0) - ext_kmin) as usize;
                let mut ext = vec![0.0f64; n + 1];
                let mut acc = 0.0;
                for i in 0..n {
                    acc += re[i];
                    ext[i + 1] = acc;
                }
                let b0 = ext[(-ext_kmin) as usize];
                let off = (self.grid.kmin - ext_kmin) as usize;
                out.extend((0..n_all).map(|i| ext[off + i] - b0));
            }
        }
    }
}

/// In-place radix-2 FFT (n a power of two).
fn fft(re: &mut [f64], im: &mut [f64]) {
    let n = re.len();
    if n <= 1 {
        return;
    }
    // bit-reversal permutation
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            re.swap(i, j);
            im.swap(i, j);
        }
    }
    let mut len = 2usize;
    while len <= n {
        let ang = -2.0 * core::f64::consts::PI / len as f64;
        let (wr, wi) = (cos(ang), sin(ang));
        let mut i = 0;
        while i < n {
            let (mut cr, mut ci) = (1.0f64, 0.0f64);
            for k in 0..len / 2 {
                let (ur, ui) = (re[i + k], im[i + k]);
                let (vr0, vi0) = (re[i + k + len / 2], im[i + k + len / 2]);
                let (vr, vi) = (vr0 * cr - vi0 * ci, vr0 * ci + vi0 * cr);
                re[i + k] = ur + vr;
                im[i + k] = ui + vi;
                re[i + k + len / 2] = ur - vr;
                im[i + k + len / 2] = ui - vi;
                let ncr = cr * wr - ci * wi;
                ci = cr * wi + ci * wr;
                cr = ncr;
            }
            i += len;
        }
        len <<= 1;
    }
}

// ---------------------------------------------------------------------------
// public sampling API
// ---------------------------------------------------------------------------

/// One fBm path on the uniform grid covering `domain` with step `cfg.dt`;
/// returns (times, values). Intended for diagnostics and tests.
pub fn sample_fbm(alpha: f64, domain: &Domain, cfg: &MCConfig, path_idx: u64) -> Result<(Vec<f64>, Vec<f64>), EvalError> {
    let horizon = cfg.horizon.unwrap_or(100.0);
    let grid = Grid::new(domain, cfg.dt, horizon)?;
    let sampler = Sampler::new(alpha, grid.clone(), cfg.generator)?;
    let mut nrm = Normals::new(path_rng(cfg.seed, path_idx));
    let mut out = Vec::new();
    sampler.sample(&mut nrm, &mut out);
    let ts = (0..grid.len()).map(|i| grid.t(i)).collect();
    Ok((ts, out))
}

fn drift_of(drift: &Drift, alpha: f64, t: f64) -> f64 {
    match *drift {
        Drift::Zero => 0.0,
        Drift::PowerAlpha { c } => c * pow(fabs(t), alpha),
        Drift::PowerMinusQuad { c, lambda } => c * pow(fabs(t), lambda) - t * t,
    }
}

/// Horizon T with t^alpha + h(t) >= 40 + 6 sqrt(2 t^alpha) at T (doubling
/// then bisection, capped at 1e3).
pub fn default_horizon(alpha: f64, drift: &Drift) -> f64 {
    // Tilting by e^z cancels the |t|^alpha trend against the fBm variance:
    // E exp(sqrt2 B_alpha(T) - T^alpha - h(T)) = e^{-h(T)}, so the mass the
    // truncation discards is O(e^{-h(T)}). h(T) = 18 leaves ~1e-8, far below
    // any attainable Monte Carlo standard error.
    let gap = |t: f64| drift_of(drift, alpha, t) - 18.0;
    let mut hi = 1.0f64;
    while gap(hi) < 0.0 && hi < 1e3 {
        hi *= 2.0;
    }
    if hi >= 1e3 {
        return 1e3;
    }
    let mut lo = hi / 2.0;
    for _ in 0..60 {
        let m = 0.5 * (lo + hi);
        if gap(m) < 0.0 {
            lo = m;
        } else {
            hi = m;
        }
    }
    hi
}

struct Accum {
    sum: f64,
    sumsq: f64,
}

struct Estimator {
    sampler: Sampler,
    /// deterministic trend -|t|^alpha - h(t) per grid point
    base: Vec<f64>,
    /// order-statistic ranks per requested x (k-th largest, 1-based)
    kths: Vec<usize>,
}

impl Estimator {
    fn new(problem: &Problem, xs: &[f64], cfg: &MCConfig) -> Result<Self, EvalError> {
        problem.validate()?;
        let horizon = cfg.horizon.unwrap_or_else(|| default_horizon(problem.alpha, &problem.drift));
        if problem.domain == Domain::HalfLine && matches!(problem.drift, Drift::Zero) {
            return Err(EvalError::UnsupportedDomain);
        }
        let grid = Grid::new(&problem.domain, cfg.dt, horizon)?;
        let npts = grid.len();
        let mut kths = Vec::with_capacity(xs.len());
        for &x in xs {
            if !(x >= 0.0) {
                return Err(EvalError::InvalidInput("x must be nonnegative"));
            }
            // count dt > x <=> count >= floor(x/dt) + 1
            let k = libm::floor(x / grid.dt) as usize + 1;
            if k > npts {
                return Err(EvalError::GridTooCoarse);
            }
            kths.push(k);
        }
        let sampler = Sampler::new(problem.alpha, grid, cfg.generator)?;
        let base = (0..npts)
            .map(|i| {
                let t = sampler.grid.t(i);
                -pow(fabs(t), problem.alpha) - drift_of(&problem.drift, problem.alpha, t)
            })
            .collect();
        Ok(Estimator { sampler, base, kths })
    }

    /// z-levels (k-th largest field values) for one path, one per requested x.
    fn path_levels(&self, nrm: &mut Normals, path: &mut Vec<f64>, levels: &mut [f64]) {
        self.sampler.sample(nrm, path);
        let sqrt2 = core::f64::consts::SQRT_2;
        for (v, b) in path.iter_mut().zip(&self.base) {
            *v = sqrt2 * *v + b;
        }
        if self.kths.len() == 1 {
            let k = self.kths[0];
            let n = path.len();
            path.select_nth_unstable_by(n - k, |a, b| a.partial_cmp(b).unwrap());
            levels[0] = path[n - k];
        } else {
            path.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
            for (j, &k) in self.kths.iter().enumerate() {
                levels[j] = path[k - 1];
            }
        }
    }
}

/// Accumulate e^{z*} over paths [lo, hi) for several x values at once;
/// deterministic in (seed, path index) regardless of chunking. Returns one
/// (sum, sum of squares) pair per x.
pub fn mc_pb_chunk(
    problem: &Problem,
    xs: &[f64],
    cfg: &MCConfig,
    lo: u64,
    hi: u64,
) -> Result<Vec<(f64, f64)>, EvalError> {
    let est = Estimator::new(problem, xs, cfg)?;
    let mut acc: Vec<Accum> = xs.iter().map(|_| Accum { sum: 0.0, sumsq: 0.0 }).collect();
    let mut path = Vec::new();
    let mut levels = vec![0.0f64; xs.len()];
    for p in lo..hi {
        let mut nrm = Normals::new(path_rng(cfg.seed, p));
        est.path_levels(&mut nrm, &mut path, &mut levels);
        for (j, &z) in levels.iter().enumerate() {
            let w = exp(z);
            acc[j].sum += w;
            acc[j].sumsq += w * w;
        }
    }
    Ok(acc.into_iter().map(|a| (a.sum, a.sumsq)).collect())
}

fn finish(sum: f64, sumsq: f64, n: u64, jitter: bool) -> MCEstimate {
    let nf = n as f64;
    let mean = sum / nf;
    let var = ((sumsq / nf - mean * mean) / nf).max(0.0);
    let mut flags = Vec::new();
    if jitter {
        flags.push(Flag::JitterFallback);
    }
    MCEstimate { value: mean, std_err: sqrt(var), n_paths: n, refinement_gap: None, flags }
}

/// Monte Carlo estimate of B_alpha^h(x, E) via the order-statistic identity
/// int e^z 1{L_z > x} dz = e^{z*}.
pub fn mc_pb(problem: &Problem, cfg: &MCConfig) -> Result<MCEstimate, EvalError> {
    let mut est = mc_pb_multi(problem, &[problem.x], cfg)?;
    Ok(est.pop().unwrap())
}

/// Shared-path estimates for several sojourn thresholds (common random
/// numbers across the x grid).
pub fn mc_pb_multi(problem: &Problem, xs: &[f64], cfg: &MCConfig) -> Result<Vec<MCEstimate>, EvalError> {
    let est = Estimator::new(problem, xs, cfg)?;
    let jitter = est.sampler.jitter;
    let sums = mc_pb_chunk(problem, xs, cfg, 0, cfg.n_paths)?;
    let mut out: Vec<MCEstimate> = sums
        .into_iter()
        .map(|(s, s2)| finish(s, s2, cfg.n_paths, jitter))
        .collect();
    if cfg.refine && cfg.n_paths >= 64 {
        let rcfg = MCConfig {
            dt: cfg.dt / 2.0,
            n_paths: cfg.n_paths / 4,
            seed: splitmix64(cfg.seed ^ 0x5851_F42D_4C95_7F2D),
            refine: false,
            ..*cfg
        };
        let rsums = mc_pb_chunk(problem, xs, &rcfg, 0, rcfg.n_paths)?;
        // discretization bias decays like dt^(alpha/2), so the dt -> dt/2 gap
        // observes only a (1 - 2^{-alpha/2}) fraction of it; extrapolate
        let factor = 1.0 / (1.0 - pow(0.5, problem.alpha / 2.0));
        for (e, (s, _)) in out.iter_mut().zip(rsums) {
            e.refinement_gap = Some(factor * fabs(e.value - s / rcfg.n_paths as f64));
        }
    }
    Ok(out)
}

/// Definition-level estimator on an explicit z grid; slower and coarser than
/// `mc_pb`, kept as an independent check of the order-statistic identity.
pub fn mc_pb_naive(problem: &Problem, cfg: &MCConfig, zmin: f64, zmax: f64, nz: usize) -> Result<MCEstimate, EvalError> {
    if !(zmax > zmin) || nz < 2 {
        return Err(EvalError::InvalidInput("need zmax > zmin and nz >= 2"));
    }
    let est = Estimator::new(problem, &[problem.x], cfg)?;
    let mut zstars = Vec::with_capacity(cfg.n_paths as usize);
    let mut path = Vec::new();
    let mut lv = [0.0f64];
    for p in 0..cfg.n_paths {
        let mut nrm = Normals::new(path_rng(cfg.seed, p));
        est.path_levels(&mut nrm, &mut path, &mut lv);
        zstars.push(lv[0]);
    }
    // P(z) = mean 1{z* > z}; value = e^{zmin} P(zmin) + trapezoid of e^z P(z)
    let dz = (zmax - zmin) / (nz - 1) as f64;
    let pn = |z: f64| zstars.iter().filter(|&&s| s > z).count() as f64 / cfg.n_paths as f64;
    let mut v = exp(zmin) * pn(zmin);
    for i in 0..nz - 1 {
        let (z0, z1) = (zmin + dz * i as f64, zmin + dz * (i + 1) as f64);
        v += 0.5 * dz * (exp(z0) * pn(z0) + exp(z1) * pn(z1));
    }
    let mut flags = Vec::new();
    if est.sampler.jitter {
        flags.push(Flag::JitterFallback);
    }
    Ok(MCEstimate { value: v, std_err: f64::NAN, n_paths: cfg.n_paths, refinement_gap: None, flags })
}

/// P{mes{t in [0, T] : sqrt2 B_1(t) - (1 + c) t > 0} > x}, estimated on the
/// grid; the zero-level sojourn check for the alpha = 1 route.
pub fn mc_sojourn_survival(x: f64, c: f64, cfg: &MCConfig) -> Result<MCEstimate, EvalError> {
    let horizon = cfg.horizon.unwrap_or_else(|| default_horizon(1.0, &Drift::PowerAlpha { c }));
    let grid = Grid::new(&Domain::HalfLine, cfg.dt, horizon)?;
    let sampler = Sampler::new(1.0, grid.clone(), cfg.generator)?;
    let k = libm::floor(x / grid.dt) as usize + 1;
    if k > grid.len() {
        return Err(EvalError::GridTooCoarse);
    }
    let sqrt2 = core::f64::consts::SQRT_2;
    let mut hits = 0u64;
    let mut path = Vec::new();
    for p in 0..cfg.n_paths {
        let mut nrm = Normals::new(path_rng(cfg.seed, p));
        sampler.sample(&mut nrm, &mut path);
        let mut cnt = 0usize;
        for (i, &b) in path.iter().enumerate() {
            if sqrt2 * b - (1.0 + c) * grid.t(i) > 0.0 {
                cnt += 1;
                if cnt >= k {
                    break;
                }
            }
        }
        if cnt >= k {
            hits += 1;
        }
    }
    let p = hits as f64 / cfg.n_paths as f64;
    Ok(MCEstimate {
        value: p,
        std_err: sqrt((p * (1.0 - p) / cfg.n_paths as f64).max(0.0)),
        n_paths: cfg.n_paths,
        refinement_gap: None,
        flags: Vec::new(),
    })
}
