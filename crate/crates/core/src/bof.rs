//! Visual vocabulary by k-means and bag-of-features histograms.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;

/// Minimum separation between two centroids of a valid vocabulary.
pub const CENTROID_SEPARATION: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansParams {
    pub k: usize,
    pub max_iter: usize,
    pub seed: u64,
    /// Z-score every component with training statistics before clustering.
    pub standardize: bool,
}

impl Default for KMeansParams {
    fn default() -> Self {
        Self {
            k: 20,
            max_iter: 100,
            seed: 0,
            standardize: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Vocabulary<T: Real> {
    pub k: usize,
    pub seed: u64,
    /// Centroids in standardized coordinates.
    pub centroids: Vec<Vec<T>>,
    pub mean: Vec<T>,
    pub scale: Vec<T>,
    pub iterations: usize,
    /// Inertia after each assignment step.
    pub inertia: Vec<T>,
}

impl<T: Real> Vocabulary<T> {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn final_inertia(&self) -> T {
        self.inertia.last().copied().unwrap_or_else(T::zero)
    }

    pub fn standardized(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(x.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(&v, (&m, &s))| (v - m) / s)
            .collect())
    }

    /// Centroids mapped back to feature units.
    pub fn raw_centroids(&self) -> Vec<Vec<T>> {
        self.centroids
            .iter()
            .map(|c| {
                c.iter()
                    .zip(self.mean.iter().zip(&self.scale))
                    .map(|(&v, (&m, &s))| v * s + m)
                    .collect()
            })
            .collect()
    }

    /// Index of the nearest centroid; ties go to the lowest index.
    pub fn nearest(&self, x: &[T]) -> Result<usize> {
        let z = self.standardized(x)?;
        Ok(nearest_centroid(&self.centroids, &z).0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::arg(format!("invalid vocabulary: {m}")));
        if self.k == 0 || self.centroids.len() != self.k {
            return bad(format!("{} centroids for k = {}", self.centroids.len(), self.k));
        }
        let d = self.dim();
        if self.scale.len() != d || self.centroids.iter().any(|c| c.len() != d) {
            return bad("inconsistent dimensions".into());
        }
        if self.scale.iter().any(|&s| !(s > T::zero()))
            || self.centroids.iter().flatten().chain(&self.mean).any(|v| !v.is_finite_val())
        {
            return bad("non-finite values or non-positive scale".into());
        }
        let sep = T::lit(CENTROID_SEPARATION);
        for i in 0..self.k {
            for j in i + 1..self.k {
                if sq_dist(&self.centroids[i], &self.centroids[j]).sqrt() <= sep {
                    return bad(format!("centroids {i} and {j} coincide"));
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: Self = serde_json::from_str(text)?;
        v.validate()?;
        Ok(v)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn sq_dist<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| {
        let d = x - y;
        acc + d * d
    })
}

fn nearest_centroid<T: Real>(centroids: &[Vec<T>], x: &[T]) -> (usize, T) {
    let mut best = (0, sq_dist(&centroids[0], x));
    for (i, c) in centroids.iter().enumerate().skip(1) {
        let d = sq_dist(c, x);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

fn check_features<T: Real>(features: &[Vec<T>]) -> Result<usize> {
    let d = features
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::arg("empty feature set"))?;
    if d == 0 {
        return Err(Error::arg("zero-dimensional features"));
    }
    for f in features {
        if f.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: f.len() });
        }
        if f.iter().any(|v| !v.is_finite_val()) {
            return Err(Error::arg("non-finite feature value"));
        }
    }
    Ok(d)
}

fn column_stats<T: Real>(features: &[Vec<T>], d: usize, standardize: bool) -> (Vec<T>, Vec<T>) {
    if !standardize {
        return (vec![T::zero(); d], vec![T::one(); d]);
    }
    let n = T::from_count(features.len());
    let mut mean = vec![T::zero(); d];
    for f in features {
        for (m, &v) in mean.iter_mut().zip(f) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![T::zero(); d];
    for f in features {
        for ((s, &v), &m) in var.iter_mut().zip(f).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let scale = var
        .into_iter()
        .map(|s| {
            let sd = (s / n).sqrt();
            if sd > T::zero() { sd } else { T::one() }
        })
        .collect();
    (mean, scale)
}

fn plus_plus_seeds<T: Real>(data: &[Vec<T>], k: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<T>>> {
    let mut centroids = vec![data[rng.random_range(0..data.len())].clone()];
    let mut d2: Vec<f64> = data.iter().map(|x| sq_dist(x, &centroids[0]).as_f64()).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        if !(total > 0.0) {
            return Err(Error::Degenerate(format!(
                "fewer than k = {k} distinct features"
            )));
        }
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = None;
        for (i, &w) in d2.iter().enumerate() {
            acc += w;
            if w > 0.0 && acc > target {
                pick = Some(i);
                break;
            }
        }
        let pick = pick.unwrap_or_else(|| d2.iter().rposition(|&w| w > 0.0).expect("positive total"));
        let c = data[pick].clone();
        d2.iter_mut()
            .zip(data)
            .for_each(|(w, x)| *w = w.min(sq_dist(x, &c).as_f64()));
        centroids.push(c);
    }
    Ok(centroids)
}

/// k-means++ seeding followed by Lloyd iterations until the assignment stops
/// changing or `max_iter` is reached.
pub fn build_vocabulary<T: Real>(features: &[Vec<T>], params: &KMeansParams) -> Result<Vocabulary<T>> {
    let d = check_features(features)?;
    let k = params.k;
    if k == 0 {
        return Err(Error::arg("k must be positive"));
    }
    if features.len() < k {
        return Err(Error::arg(format!(
            "{} features are fewer than k = {k}",
            features.len()
        )));
    }
    let (mean, scale) = column_stats(features, d, params.standardize);
    let data: Vec<Vec<T>> = features
        .iter()
        .map(|f| {
            f.iter()
                .zip(mean.iter().zip(&scale))
                .map(|(&v, (&m, &s))| (v - m) / s)
                .collect()
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut centroids = plus_plus_seeds(&data, k, &mut rng)?;
    let mut assignment: Vec<usize> = Vec::new();
    let mut inertia = Vec::new();
    let mut iterations = 0;
    for _ in 0..params.max_iter.max(1) {
        let nearest: Vec<(usize, T)> = data.par_iter().map(|x| nearest_centroid(&centroids, x)).collect();
        let next: Vec<usize> = nearest.iter().map(|p| p.0).collect();
        inertia.push(nearest.iter().fold(T::zero(), |a, p| a + p.1));
        iterations += 1;
        if next == assignment {
            break;
        }
        assignment = next;

        let mut sums = vec![vec![T::zero(); d]; k];
        let mut counts = vec![0usize; k];
        for (x, &c) in data.iter().zip(&assignment) {
            counts[c] += 1;
            for (s, &v) in sums[c].iter_mut().zip(x) {
                *s += v;
            }
        }
        let mut taken = vec![false; data.len()];
        for c in 0..k {
            if counts[c] > 0 {
                let n = T::from_count(counts[c]);
                centroids[c] = sums[c].iter().map(|&s| s / n).collect();
            } else {
                // farthest point from its own centroid; lowest index on ties
                let far = nearest
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| !taken[i])
                    .fold(None::<(usize, T)>, |best, (i, p)| match best {
                        Some((_, bd)) if p.1 <= bd => best,
                        _ => Some((i, p.1)),
                    })
                    .map(|p| p.0)
                    .ok_or_else(|| Error::Degenerate("no point left to re-seed an empty cluster".into()))?;
                taken[far] = true;
                centroids[c] = data[far].clone();
            }
        }
    }
    let vocab = Vocabulary {
        k,
        seed: params.seed,
        centroids,
        mean,
        scale,
        iterations,
        inertia,
    };
    vocab.validate().map_err(|_| {
        Error::Degenerate(format!("fewer than k = {k} distinct clusters in the features"))
    })?;
    Ok(vocab)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    Surface,
    Segment(u8),
}

impl std::fmt::Display for Scope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scope::Surface => write!(f, "surface"),
            Scope::Segment(s) => write!(f, "{s}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct BoFHistogram<T: Real> {
    pub frequencies: Vec<T>,
    pub scope: Scope,
}

/// Word counts of `features` against `vocabulary`, normalized to sum to one.
pub fn quantize<T: Real>(features: &[Vec<T>], vocabulary: &Vocabulary<T>, scope: Scope) -> Result<BoFHistogram<T>> {
    if features.is_empty() {
        return Err(Error::arg("cannot quantize an empty feature set"));
    }
    let words: Vec<usize> = features
        .par_iter()
        .map(|f| vocabulary.nearest(f))
        .collect::<Result<_>>()?;
    let mut counts = vec![0usize; vocabulary.k];
    for w in words {
        counts[w] += 1;
    }
    let n = T::from_count(features.len());
    Ok(BoFHistogram {
        frequencies: counts.into_iter().map(|c| T::from_count(c) / n).collect(),
        scope,
    })
}

/// One CSV row per histogram with columns `word_0..word_{k-1}`.
pub fn write_histograms_csv<T: Real, W: Write>(hists: &[BoFHistogram<T>], w: &mut W) -> std::io::Result<()> {
    let k = hists.first().map_or(0, |h| h.frequencies.len());
    let header: Vec<String> = (0..k).map(|i| format!("word_{i}")).collect();
    writeln!(w, "{}", header.join(","))?;
    for h in hists {
        let row: Vec<String> = h.frequencies.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    fn blobs(seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = Normal::new(0.0, 0.1).unwrap();
        (0..1000)
            .map(|i| {
                let c = if i % 2 == 0 { 0.0 } else { 10.0 };
                (0..23).map(|_| c + n.sample(&mut rng)).collect()
            })
            .collect()
    }

    #[test]
    fn k_equals_n_recovers_points() {
        let pts: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, (i * i) as f64 * 0.1]).collect();
        let v = build_vocabulary(
            &pts,
            &KMeansParams { k: 20, ..KMeansParams::default() },
        )
        .unwrap();
        assert!(v.final_inertia() < 1e-20);
        let mut raw = v.raw_centroids();
        raw.sort_by(|a, b| a[0].partial_cmp(&b[0]).unwrap());
        for (c, p) in raw.iter().zip(&pts) {
            assert!((c[0] - p[0]).abs() < 1e-9 && (c[1] - p[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn two_blobs() {
        let pts = blobs(3);
        let v = build_vocabulary(&pts, &KMeansParams { k: 2, seed: 9, ..KMeansParams::default() }).unwrap();
        let w = v.inertia.windows(2).all(|w| w[1] <= w[0]);
        assert!(w, "{:?}", v.inertia);
        let mut raw = v.raw_centroids();
        raw.sort_by(|a, b| a[0].partial_cmp(&b[0]).unwrap());
        for (c, target) in raw.iter().zip([0.0, 10.0]) {
            assert!(c.iter().all(|x| (x - target).abs() < 0.05));
        }
    }

    #[test]
    fn duplicates_below_k_error() {
        let pts = vec![vec![1.0f64, 2.0]; 30];
        assert!(build_vocabulary(&pts, &KMeansParams { k: 3, ..KMeansParams::default() }).is_err());
        assert!(build_vocabulary(&pts[..2], &KMeansParams { k: 3, ..KMeansParams::default() }).is_err());
    }

    #[test]
    fn quantize_split_and_one_hot() {
        let v = Vocabulary {
            k: 4,
            seed: 0,
            centroids: vec![vec![0.0f64], vec![100.0], vec![200.0], vec![300.0]],
            mean: vec![0.0],
            scale: vec![1.0],
            iterations: 0,
            inertia: vec![],
        };
        let f: Vec<Vec<f64>> = (0..500).map(|i| vec![if i < 300 { 1.0 } else { 99.0 }]).collect();
        let h = quantize(&f, &v, Scope::Surface).unwrap();
        assert_eq!(h.frequencies, vec![0.6, 0.4, 0.0, 0.0]);
        let h = quantize(&[vec![300.0]], &v, Scope::Segment(3)).unwrap();
        assert_eq!(h.frequencies, vec![0.0, 0.0, 0.0, 1.0]);
        // equidistant: lowest index
        assert_eq!(v.nearest(&[50.0]).unwrap(), 0);
        assert!(quantize(&[], &v, Scope::Surface).is_err());
    }

    #[test]
    fn json_round_trip() {
        let v = build_vocabulary(&blobs(1), &KMeansParams { k: 2, ..KMeansParams::default() }).unwrap();
        let back: Vocabulary<f64> = Vocabulary::from_json(&v.to_json().unwrap()).unwrap();
        assert_eq!(back, v);
    }
}
