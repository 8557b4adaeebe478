//! Seeded samplers for unit spheres and for incremental input pairs.
//!
//! Draw `k` of a run always comes from chunk `k / CHUNK_LEN`, whose RNG is a
//! ChaCha8 stream keyed by `(seed, chunk)`. Sequential and parallel execution
//! therefore produce identical samples in identical order.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SrgError};
use crate::pairings::{NormKind, Vector};

pub const CHUNK_LEN: usize = 256;

/// Relative offset used to place extreme samples just inside a facet of a
/// polyhedral unit ball, where the discontinuous pairings attain their suprema.
pub const FACET_OFFSET: f64 = 1e-15;

/// Enumerating `n 2^n` near-vertex points stops above this dimension.
pub const MAX_FACET_ENUM_DIM: usize = 10;
/// Enumerating the `2^n` sign vectors stops above this dimension.
pub const MAX_SIGN_ENUM_DIM: usize = 12;

/// Execution strategy for sampling loops. `Parallel` degrades to sequential
/// execution when the crate is built without the `parallel` feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExecMode {
    Sequential,
    Parallel,
}

impl Default for ExecMode {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            ExecMode::Parallel
        } else {
            ExecMode::Sequential
        }
    }
}

impl ExecMode {
    fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == ExecMode::Parallel
    }
}

pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Evaluate `f(k, rng)` for `k in 0..count` with chunk-keyed RNG streams.
pub fn try_map_seeded<T, F>(mode: ExecMode, count: usize, seed: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &mut ChaCha8Rng) -> Result<T> + Sync,
{
    let n_chunks = count.div_ceil(CHUNK_LEN);
    let run_chunk = |c: usize| -> Result<Vec<T>> {
        let mut rng = chunk_rng(seed, c as u64);
        let start = c * CHUNK_LEN;
        let end = (start + CHUNK_LEN).min(count);
        (start..end).map(|k| f(k, &mut rng)).collect()
    };
    let chunks: Vec<Vec<T>> = if mode.is_parallel() {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            (0..n_chunks).into_par_iter().map(run_chunk).collect::<Result<_>>()?
        }
        #[cfg(not(feature = "parallel"))]
        unreachable!("parallel mode requires the `parallel` feature")
    } else {
        (0..n_chunks).map(run_chunk).collect::<Result<_>>()?
    };
    Ok(chunks.into_iter().flatten().collect())
}

/// Order-preserving map over a slice, parallel when the mode allows it.
pub fn try_map_slice<S, T, F>(mode: ExecMode, items: &[S], f: F) -> Result<Vec<T>>
where
    S: Sync,
    T: Send,
    F: Fn(usize, &S) -> Result<T> + Sync,
{
    if mode.is_parallel() {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            return items.par_iter().enumerate().map(|(k, s)| f(k, s)).collect();
        }
    }
    items.iter().enumerate().map(|(k, s)| f(k, s)).collect()
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n)
        .map(|_| scale * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng))
        .collect()
}

fn laplace(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let e: f64 = Exp1.sample(rng);
            if rng.random::<bool>() {
                scale * e
            } else {
                -scale * e
            }
        })
        .collect()
}

fn uniform(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| scale * rng.random_range(-1.0..=1.0)).collect()
}

fn sign_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
        .collect()
}

/// Uniform on `(0, 1]`.
fn unit_magnitude(rng: &mut ChaCha8Rng) -> f64 {
    1.0 - rng.random::<f64>()
}

fn normalized(mut x: Vec<f64>, norm: NormKind) -> Option<Vector> {
    let v = Vector::from_vec_unchecked(x.clone());
    let nx = v.norm(norm);
    if nx == 0.0 || !nx.is_finite() {
        return None;
    }
    x.iter_mut().for_each(|c| *c /= nx);
    Some(Vector::from_vec_unchecked(x))
}

/// Sampler for the unit sphere of an lp norm.
///
/// With `include_extremes`, the sample set also contains the points where the
/// pairing-based suprema of the Lumer identity are attained: coordinate
/// vectors and near-vertex facet points for l1, sign vectors and
/// single-peak sign vectors for l-infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereSampler {
    pub norm: NormKind,
    pub include_extremes: bool,
}

impl SphereSampler {
    pub fn new(norm: NormKind) -> Self {
        SphereSampler {
            norm,
            include_extremes: true,
        }
    }

    pub fn random_only(norm: NormKind) -> Self {
        SphereSampler {
            norm,
            include_extremes: false,
        }
    }

    pub fn draw_one(&self, n: usize, rng: &mut ChaCha8Rng) -> Vector {
        loop {
            let raw = match self.norm {
                NormKind::L2 => gaussian(rng, n, 1.0),
                NormKind::L1 => laplace(rng, n, 1.0),
                NormKind::LInf => {
                    let mut x = uniform(rng, n, 1.0);
                    let k = rng.random_range(0..n);
                    x[k] = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    x
                }
            };
            if let Some(v) = normalized(raw, self.norm) {
                return v;
            }
        }
    }

    /// Deterministic extreme-point family for dimension `n`.
    pub fn extremes(&self, n: usize) -> Vec<Vector> {
        let mut out = Vec::new();
        match self.norm {
            NormKind::L2 => {}
            NormKind::L1 => {
                for i in 0..n {
                    for s in [1.0, -1.0] {
                        out.push(Vector::basis(n, i).scaled(s));
                    }
                }
                if n <= MAX_FACET_ENUM_DIM && n > 1 {
                    for sigma in sign_patterns(n) {
                        for j in 0..n {
                            let x: Vec<f64> = (0..n)
                                .map(|i| if i == j { sigma[i] } else { FACET_OFFSET * sigma[i] })
                                .collect();
                            out.extend(normalized(x, NormKind::L1));
                        }
                    }
                }
            }
            NormKind::LInf => {
                if n <= MAX_SIGN_ENUM_DIM {
                    for sigma in sign_patterns(n) {
                        out.push(Vector::from_vec_unchecked(sigma));
                    }
                }
                if n <= MAX_FACET_ENUM_DIM && n > 1 {
                    for sigma in sign_patterns(n) {
                        for j in 0..n {
                            let x: Vec<f64> = (0..n)
                                .map(|i| if i == j { sigma[i] } else { (1.0 - FACET_OFFSET) * sigma[i] })
                                .collect();
                            out.push(Vector::from_vec_unchecked(x));
                        }
                    }
                }
            }
        }
        out
    }

    /// `count` random unit vectors (seeded), preceded by the extreme family if enabled.
    pub fn sample(&self, n: usize, count: usize, seed: u64) -> Vec<Vector> {
        let mut out = if self.include_extremes {
            self.extremes(n)
        } else {
            Vec::new()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        out.extend((0..count).map(|_| self.draw_one(n, &mut rng)));
        out
    }
}

/// All vectors in `{-1, +1}^n`, in binary counting order.
pub fn sign_patterns(n: usize) -> impl Iterator<Item = Vec<f64>> {
    (0u64..(1u64 << n)).map(move |mask| {
        (0..n)
            .map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 })
            .collect()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum SamplerKind {
    /// Independent Gaussian base points.
    Gaussian,
    /// Independent Laplace base points (sparse-ish increments).
    Laplace,
    /// Independent points uniform on the box `[-scale, scale]^n`.
    Uniform,
    /// Gaussian base point and a sign-vector increment (bang-bang directions).
    Sign,
    /// Gaussian base point and a coordinate-impulse increment.
    Impulse,
    /// Round robin over Gaussian, Laplace, Sign and Impulse.
    Mixed,
    /// Round robin over box-uniform pairs and box-based sign increments.
    ValueBox,
}

impl SamplerKind {
    pub fn name(self) -> &'static str {
        match self {
            SamplerKind::Gaussian => "gaussian",
            SamplerKind::Laplace => "laplace",
            SamplerKind::Uniform => "uniform",
            SamplerKind::Sign => "sign",
            SamplerKind::Impulse => "impulse",
            SamplerKind::Mixed => "mixed",
            SamplerKind::ValueBox => "value-box",
        }
    }
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SamplerKind {
    type Err = SrgError;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "gaussian" => SamplerKind::Gaussian,
            "laplace" => SamplerKind::Laplace,
            "uniform" => SamplerKind::Uniform,
            "sign" => SamplerKind::Sign,
            "impulse" => SamplerKind::Impulse,
            "mixed" => SamplerKind::Mixed,
            "value-box" => SamplerKind::ValueBox,
            other => {
                return Err(SrgError::InvalidParameter(format!("unknown sampler {other:?}")))
            }
        })
    }
}

impl From<SamplerKind> for String {
    fn from(k: SamplerKind) -> String {
        k.name().to_string()
    }
}

impl TryFrom<String> for SamplerKind {
    type Error = SrgError;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Draws pairs of base points `(x1, x2)`; the operator's increment is then
/// `(x1 - x2, T x1 - T x2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncrementSampler {
    pub kind: SamplerKind,
    pub scale: f64,
}

impl IncrementSampler {
    pub fn new(kind: SamplerKind) -> Self {
        IncrementSampler { kind, scale: 1.0 }
    }

    pub fn with_scale(kind: SamplerKind, scale: f64) -> Self {
        IncrementSampler { kind, scale }
    }

    pub fn id(&self) -> &'static str {
        self.kind.name()
    }

    pub fn draw(&self, n: usize, k: usize, rng: &mut ChaCha8Rng) -> (Vector, Vector) {
        let s = self.scale;
        let kind = match self.kind {
            SamplerKind::Mixed => [
                SamplerKind::Gaussian,
                SamplerKind::Laplace,
                SamplerKind::Sign,
                SamplerKind::Impulse,
            ][k % 4],
            other => other,
        };
        let (x1, x2) = match kind {
            SamplerKind::Gaussian => (gaussian(rng, n, s), gaussian(rng, n, s)),
            SamplerKind::Laplace => (laplace(rng, n, s), laplace(rng, n, s)),
            SamplerKind::Uniform => (uniform(rng, n, s), uniform(rng, n, s)),
            SamplerKind::Sign => {
                let x1 = gaussian(rng, n, s);
                let t = s * unit_magnitude(rng);
                let x2 = x1
                    .iter()
                    .zip(sign_vector(rng, n))
                    .map(|(a, sg)| a - t * sg)
                    .collect();
                (x1, x2)
            }
            SamplerKind::Impulse => {
                let x1 = gaussian(rng, n, s);
                let mut x2 = x1.clone();
                let i = rng.random_range(0..n);
                let sg = if rng.random::<bool>() { 1.0 } else { -1.0 };
                x2[i] -= sg * s * unit_magnitude(rng);
                (x1, x2)
            }
            SamplerKind::ValueBox => {
                if k.is_multiple_of(2) {
                    (uniform(rng, n, s), uniform(rng, n, s))
                } else {
                    let x1 = uniform(rng, n, s);
                    let t = s * unit_magnitude(rng);
                    let x2 = x1
                        .iter()
                        .zip(sign_vector(rng, n))
                        .map(|(a, sg)| a - t * sg)
                        .collect();
                    (x1, x2)
                }
            }
            SamplerKind::Mixed => unreachable!("resolved above"),
        };
        (Vector::from_vec_unchecked(x1), Vector::from_vec_unchecked(x2))
    }

    /// `count` base-point pairs for dimension `n`; identical for identical `(seed, count)`.
    pub fn sample_points(&self, mode: ExecMode, n: usize, count: usize, seed: u64) -> Vec<(Vector, Vector)> {
        try_map_seeded(mode, count, seed, |k, rng| Ok(self.draw(n, k, rng)))
            .expect("sampling is infallible")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_samples_have_unit_norm() {
        for norm in [NormKind::L1, NormKind::L2, NormKind::LInf] {
            let s = SphereSampler::new(norm);
            for x in s.sample(4, 200, 7) {
                assert!((x.norm(norm) - 1.0).abs() < 1e-14, "{norm}: {}", x.norm(norm));
            }
        }
    }

    #[test]
    fn extreme_family_sizes() {
        assert_eq!(SphereSampler::new(NormKind::L1).extremes(3).len(), 6 + 3 * 8);
        assert_eq!(SphereSampler::new(NormKind::LInf).extremes(3).len(), 8 + 3 * 8);
        assert!(SphereSampler::new(NormKind::L2).extremes(3).is_empty());
        assert_eq!(SphereSampler::new(NormKind::LInf).extremes(12).len(), 1 << 12);
    }

    #[test]
    fn seeded_sampling_is_reproducible_and_mode_independent() {
        let s = IncrementSampler::new(SamplerKind::Mixed);
        let a = s.sample_points(ExecMode::Sequential, 3, 1000, 42);
        let b = s.sample_points(ExecMode::default(), 3, 1000, 42);
        assert_eq!(a, b);
        let c = s.sample_points(ExecMode::Sequential, 3, 1000, 43);
        assert_ne!(a, c);
        // prefix stability
        let d = s.sample_points(ExecMode::Sequential, 3, 300, 42);
        assert_eq!(&a[..300], &d[..]);
    }

    #[test]
    fn structured_increments() {
        let mut rng = chunk_rng(1, 0);
        let s = IncrementSampler::new(SamplerKind::Sign);
        for k in 0..50 {
            let (x1, x2) = s.draw(5, k, &mut rng);
            let u = &x1 - &x2;
            let m = u.norm(NormKind::LInf);
            assert!(u.iter().all(|c| (c.abs() - m).abs() < 1e-12 * (1.0 + m) + 1e-12));
        }
        let s = IncrementSampler::new(SamplerKind::Impulse);
        for k in 0..50 {
            let (x1, x2) = s.draw(5, k, &mut rng);
            let u = &x1 - &x2;
            assert_eq!(u.iter().filter(|c| **c != 0.0).count(), 1);
        }
    }

    #[test]
    fn sampler_names_round_trip() {
        for k in [
            SamplerKind::Gaussian,
            SamplerKind::Laplace,
            SamplerKind::Uniform,
            SamplerKind::Sign,
            SamplerKind::Impulse,
            SamplerKind::Mixed,
            SamplerKind::ValueBox,
        ] {
            assert_eq!(k.name().parse::<SamplerKind>().unwrap(), k);
        }
    }
}
