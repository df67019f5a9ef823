//! Seeded samplers: uniform points on spheres, Gaussian vectors, Haar subspaces.
//!
//! Every random quantity in the crate is a pure function of a [`SeedSpec`].
//! Bulk sampling splits the index range into fixed chunks of [`CHUNK_SIZE`];
//! chunk `c` draws from the substream `seed / chunk:c`, so results do not
//! depend on how many worker threads process the chunks.

use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Samples per reproducibility chunk.
pub const CHUNK_SIZE: usize = 1 << 14;

/// Generator behind every substream.
pub type SampleRng = ChaCha8Rng;

const MAX_RESAMPLES: usize = 16;
const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SeedStep {
    pub label: String,
    pub index: u64,
}

/// Root seed plus the derivation path of a substream.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SeedSpec {
    pub root: u64,
    pub path: Vec<SeedStep>,
}

impl SeedSpec {
    pub fn new(root: u64) -> Self {
        SeedSpec { root, path: Vec::new() }
    }

    /// Derive the substream `self / label:index`.
    pub fn child(&self, label: &str, index: u64) -> Self {
        let mut path = self.path.clone();
        path.push(SeedStep { label: label.to_string(), index });
        SeedSpec { root: self.root, path }
    }

    /// 256-bit generator key. The encoding is length-prefixed, hence
    /// injective on paths.
    pub fn key(&self) -> [u8; 32] {
        let mut hasher = Sha256::new();
        hasher.update(b"dvlab-seed-v1");
        hasher.update(self.root.to_le_bytes());
        hasher.update((self.path.len() as u64).to_le_bytes());
        for step in &self.path {
            hasher.update((step.label.len() as u64).to_le_bytes());
            hasher.update(step.label.as_bytes());
            hasher.update(step.index.to_le_bytes());
        }
        let digest = hasher.finalize();
        let mut key = [0u8; 32];
        key.copy_from_slice(&digest);
        key
    }

    pub fn rng(&self) -> SampleRng {
        ChaCha8Rng::from_seed(self.key())
    }
}

impl fmt::Display for SeedSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.root)?;
        for step in &self.path {
            write!(f, "/{}:{}", step.label, step.index)?;
        }
        Ok(())
    }
}

/// Position of one draw inside a chunked sample.
#[derive(Debug, Clone, Copy)]
pub struct DrawIndex {
    pub chunk: usize,
    pub offset: usize,
}

impl DrawIndex {
    pub fn global(&self) -> usize {
        self.chunk * CHUNK_SIZE + self.offset
    }
}

/// Map `count` draws through `draw`, chunk by chunk, in index order.
///
/// Chunks run in parallel; draws within a chunk share the chunk's generator
/// sequentially.
pub fn chunked_map<T, F>(seed: &SeedSpec, count: usize, draw: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut SampleRng, DrawIndex) -> T + Sync,
{
    let chunks = count.div_ceil(CHUNK_SIZE);
    let per_chunk: Vec<Vec<T>> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = seed.child("chunk", chunk as u64).rng();
            let len = CHUNK_SIZE.min(count - chunk * CHUNK_SIZE);
            (0..len)
                .map(|offset| draw(&mut rng, DrawIndex { chunk, offset }))
                .collect()
        })
        .collect();
    per_chunk.into_iter().flatten().collect()
}

/// Seed of the chunk holding draw `index` of a chunked sample.
pub fn chunk_seed(seed: &SeedSpec, index: usize) -> SeedSpec {
    seed.child("chunk", (index / CHUNK_SIZE) as u64)
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Uniform point on S^{n-1}: a normalized standard Gaussian vector.
pub fn sphere_point<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    debug_assert!(n >= 1);
    loop {
        let mut g = gaussian_vector(rng, n);
        let r = euclidean_norm(&g);
        if r > 0.0 && r.is_finite() {
            g.iter_mut().for_each(|v| *v /= r);
            return g;
        }
    }
}

pub fn sample_sphere(n: usize, seed: &SeedSpec) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    Ok(sphere_point(&mut seed.rng(), n))
}

pub fn sample_gaussian(n: usize, seed: &SeedSpec) -> Vec<f64> {
    gaussian_vector(&mut seed.rng(), n)
}

/// `count` sphere points; point `i` is reproducible from (seed, i).
pub fn sphere_points(n: usize, count: usize, seed: &SeedSpec) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    Ok(chunked_map(seed, count, |rng, _| sphere_point(rng, n)))
}

/// An l-dimensional subspace of R^n stored as an orthonormal n×l frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subspace {
    ambient_dim: usize,
    dim: usize,
    /// Column-major n×l.
    frame: Vec<f64>,
}

impl Subspace {
    /// Build from explicit columns, checking orthonormality to 1e-10.
    pub fn from_columns(ambient_dim: usize, columns: &[Vec<f64>]) -> Result<Self> {
        if ambient_dim == 0 || columns.is_empty() {
            return Err(Error::ZeroDimension);
        }
        if columns.len() > ambient_dim {
            return Err(Error::SubspaceTooLarge { n: ambient_dim, l: columns.len() });
        }
        for c in columns {
            if c.len() != ambient_dim {
                return Err(Error::DimensionMismatch { expected: ambient_dim, got: c.len() });
            }
        }
        let sub = Subspace {
            ambient_dim,
            dim: columns.len(),
            frame: columns.concat(),
        };
        let deviation = sub.orthonormality_defect();
        if deviation > 1e-10 {
            return Err(Error::NotOrthonormal { deviation });
        }
        Ok(sub)
    }

    /// span(e_i : i in `indices`).
    pub fn coordinate(ambient_dim: usize, indices: &[usize]) -> Result<Self> {
        let columns: Vec<Vec<f64>> = indices
            .iter()
            .map(|&i| {
                let mut c = vec![0.0; ambient_dim];
                if i < ambient_dim {
                    c[i] = 1.0;
                }
                c
            })
            .collect();
        if indices.iter().any(|&i| i >= ambient_dim) {
            return Err(Error::InvalidArgument(format!(
                "coordinate index out of range for dimension {ambient_dim}"
            )));
        }
        Self::from_columns(ambient_dim, &columns)
    }

    pub fn full(ambient_dim: usize) -> Result<Self> {
        let idx: Vec<usize> = (0..ambient_dim).collect();
        Self::coordinate(ambient_dim, &idx)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.frame[j * self.ambient_dim..(j + 1) * self.ambient_dim]
    }

    pub fn frame(&self) -> &[f64] {
        &self.frame
    }

    /// frame · z
    pub fn embed(&self, z: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.ambient_dim];
        self.embed_into(z, &mut x);
        x
    }

    pub fn embed_into(&self, z: &[f64], out: &mut [f64]) {
        debug_assert_eq!(z.len(), self.dim);
        out.iter_mut().for_each(|v| *v = 0.0);
        for (j, &zj) in z.iter().enumerate() {
            if zj == 0.0 {
                continue;
            }
            for (o, &f) in out.iter_mut().zip(self.column(j)) {
                *o += zj * f;
            }
        }
    }

    /// frameᵀ · x
    pub fn coordinates(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim).map(|j| dot(self.column(j), x)).collect()
    }

    /// Euclidean norms of the frame's rows.
    pub fn row_norms(&self) -> Vec<f64> {
        (0..self.ambient_dim)
            .map(|i| {
                (0..self.dim)
                    .map(|j| self.frame[j * self.ambient_dim + i].powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect()
    }

    /// max |frameᵀ frame − I| entrywise.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..self.dim {
            for b in a..self.dim {
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot(self.column(a), self.column(b)) - target).abs());
            }
        }
        worst
    }
}

/// Orthonormalize the columns of a Gaussian draw by modified Gram–Schmidt
/// with one reorthogonalization pass. Returns `None` when a column collapses.
fn orthonormalize(n: usize, mut columns: Vec<Vec<f64>>) -> Option<Vec<Vec<f64>>> {
    for j in 0..columns.len() {
        let original = euclidean_norm(&columns[j]);
        if original == 0.0 || !original.is_finite() {
            return None;
        }
        let (done, rest) = columns.split_at_mut(j);
        let col = &mut rest[0];
        for _pass in 0..2 {
            for q in done.iter() {
                let proj = dot(q, col);
                col.iter_mut().zip(q).for_each(|(c, qv)| *c -= proj * qv);
            }
        }
        let r = euclidean_norm(col);
        if r <= RANK_TOLERANCE * original {
            return None;
        }
        col.iter_mut().for_each(|c| *c /= r);
        debug_assert_eq!(col.len(), n);
    }
    Some(columns)
}

/// Haar subspace from a generator. Also returns how many rank-deficient
/// draws were discarded.
///
/// Columns are drawn one after another, so for l = 1 the frame is exactly
/// the sphere point the same generator would have produced.
pub fn grassmannian_from_rng<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    l: usize,
) -> Result<(Subspace, usize)> {
    if n == 0 || l == 0 {
        return Err(Error::ZeroDimension);
    }
    if l > n {
        return Err(Error::SubspaceTooLarge { n, l });
    }
    for attempt in 0..MAX_RESAMPLES {
        let columns: Vec<Vec<f64>> = (0..l).map(|_| gaussian_vector(rng, n)).collect();
        if let Some(q) = orthonormalize(n, columns) {
            if attempt > 0 {
                log::debug!("grassmannian draw resampled {attempt} times");
            }
            return Ok((
                Subspace { ambient_dim: n, dim: l, frame: q.concat() },
                attempt,
            ));
        }
    }
    Err(Error::RankDeficient { attempts: MAX_RESAMPLES })
}

pub fn sample_grassmannian(n: usize, l: usize, seed: &SeedSpec) -> Result<Subspace> {
    grassmannian_from_rng(&mut seed.rng(), n, l).map(|(s, _)| s)
}

/// `count` Haar subspaces, chunked like [`sphere_points`].
pub fn grassmannian_samples(
    n: usize,
    l: usize,
    count: usize,
    seed: &SeedSpec,
) -> Result<Vec<Subspace>> {
    if n == 0 || l == 0 {
        return Err(Error::ZeroDimension);
    }
    if l > n {
        return Err(Error::SubspaceTooLarge { n, l });
    }
    let draws = chunked_map(seed, count, |rng, _| grassmannian_from_rng(rng, n, l));
    let mut out = Vec::with_capacity(count);
    let mut resampled = 0;
    for d in draws {
        let (s, r) = d?;
        resampled += r;
        out.push(s);
    }
    if resampled > 0 {
        log::info!("{resampled} rank-deficient gaussian draws resampled");
    }
    Ok(out)
}

/// Uniform point on S(E) = S^{n-1} ∩ E.
pub fn subspace_sphere_point<R: Rng + ?Sized>(rng: &mut R, subspace: &Subspace) -> Vec<f64> {
    let z = sphere_point(rng, subspace.dim());
    subspace.embed(&z)
}

pub fn sample_subspace_sphere(subspace: &Subspace, seed: &SeedSpec) -> Vec<f64> {
    subspace_sphere_point(&mut seed.rng(), subspace)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn euclidean_norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_n1_is_sign() {
        for i in 0..20 {
            let x = sample_sphere(1, &SeedSpec::new(i)).unwrap();
            assert!(x[0] == 1.0 || x[0] == -1.0);
        }
    }

    #[test]
    fn zero_dimension_rejected() {
        assert_eq!(sample_sphere(0, &SeedSpec::new(1)), Err(Error::ZeroDimension));
        assert!(matches!(
            sample_grassmannian(3, 4, &SeedSpec::new(1)),
            Err(Error::SubspaceTooLarge { n: 3, l: 4 })
        ));
    }

    #[test]
    fn sphere_is_deterministic_and_unit() {
        let s = SeedSpec::new(42).child("x", 3);
        let a = sample_sphere(3, &s).unwrap();
        let b = sample_sphere(3, &s).unwrap();
        assert_eq!(a, b);
        assert!((euclidean_norm(&a) - 1.0).abs() < 1e-12);
        let c = sample_sphere(3, &SeedSpec::new(42).child("x", 4)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn seed_keys_distinguish_paths() {
        let base = SeedSpec::new(7);
        let keys = [
            base.key(),
            base.child("a", 0).key(),
            base.child("a", 1).key(),
            base.child("b", 0).key(),
            base.child("a", 0).child("a", 0).key(),
            SeedSpec::new(8).key(),
            // label boundaries cannot be confused with indices
            base.child("ab", 0).key(),
        ];
        for i in 0..keys.len() {
            for j in (i + 1)..keys.len() {
                assert_ne!(keys[i], keys[j], "{i} vs {j}");
            }
        }
        assert_eq!(base.child("a", 2).to_string(), "7/a:2");
    }

    #[test]
    fn full_dimensional_frame_is_orthogonal() {
        let e = sample_grassmannian(6, 6, &SeedSpec::new(3)).unwrap();
        assert!(e.orthonormality_defect() < 1e-10);
        // rows of an orthogonal matrix are unit vectors too
        for r in e.row_norms() {
            assert!((r - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn one_dimensional_subspace_matches_sphere_draw() {
        let seed = SeedSpec::new(11);
        let pts = sphere_points(9, 40, &seed).unwrap();
        let subs = grassmannian_samples(9, 1, 40, &seed).unwrap();
        for (p, s) in pts.iter().zip(&subs) {
            assert_eq!(p.as_slice(), s.column(0));
        }
    }

    #[test]
    fn subspace_sphere_point_lies_in_span() {
        let e = sample_grassmannian(20, 4, &SeedSpec::new(5)).unwrap();
        let x = sample_subspace_sphere(&e, &SeedSpec::new(6));
        assert!((euclidean_norm(&x) - 1.0).abs() < 1e-12);
        let back = e.embed(&e.coordinates(&x));
        let resid: f64 = back.iter().zip(&x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(resid <= 1e-10);
    }

    #[test]
    fn coordinate_plane_sample_has_zero_third_coordinate() {
        let e = Subspace::coordinate(3, &[0, 1]).unwrap();
        for i in 0..10 {
            let x = sample_subspace_sphere(&e, &SeedSpec::new(i));
            assert_eq!(x[2], 0.0);
        }
    }

    #[test]
    fn line_subspace_sample_is_signed_column() {
        let e = sample_grassmannian(5, 1, &SeedSpec::new(9)).unwrap();
        let x = sample_subspace_sphere(&e, &SeedSpec::new(10));
        let col = e.column(0);
        let plus = x.iter().zip(col).all(|(a, b)| (a - b).abs() < 1e-15);
        let minus = x.iter().zip(col).all(|(a, b)| (a + b).abs() < 1e-15);
        assert!(plus || minus);
    }

    #[test]
    fn from_columns_rejects_non_orthonormal() {
        let r = Subspace::from_columns(2, &[vec![1.0, 0.0], vec![1.0, 1.0]]);
        assert!(matches!(r, Err(Error::NotOrthonormal { .. })));
    }

    #[test]
    fn chunked_map_spans_chunks_in_order() {
        let seed = SeedSpec::new(1);
        let idx = chunked_map(&seed, CHUNK_SIZE + 5, |_, d| d.global());
        assert_eq!(idx.len(), CHUNK_SIZE + 5);
        assert!(idx.iter().enumerate().all(|(i, &g)| i == g));
    }
}
