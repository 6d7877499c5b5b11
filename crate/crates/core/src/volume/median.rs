use rayon::prelude::*;

use super::ScalarVolume;
use crate::error::{Error, Result};
use crate::num::Real;

/// Replaces each voxel by the median of its `kernel` window (odd extents per
/// axis, coordinates clamped at the border). A `[7, 7, 1]` kernel filters each
/// z-slice independently.
pub fn median_filter<T: Real>(volume: &ScalarVolume<T>, kernel: [usize; 3]) -> Result<ScalarVolume<T>> {
    if let Some(&k) = kernel.iter().find(|&&k| k == 0 || k % 2 == 0) {
        return Err(Error::arg(format!(
            "median kernel extents must be odd and >= 1, got {k} in {kernel:?}"
        )));
    }
    let [nx, ny, nz] = volume.dims();
    let half = kernel.map(|k| (k / 2) as isize);
    let clamp = |i: isize, n: usize| i.clamp(0, n as isize - 1) as usize;
    let mut out = vec![T::zero(); volume.values().len()];
    out.par_chunks_mut(nx * ny)
        .enumerate()
        .for_each(|(k, slice)| {
            let mut window = Vec::with_capacity(kernel.iter().product());
            for j in 0..ny {
                for i in 0..nx {
                    window.clear();
                    for dk in -half[2]..=half[2] {
                        let kk = clamp(k as isize + dk, nz);
                        for dj in -half[1]..=half[1] {
                            let jj = clamp(j as isize + dj, ny);
                            for di in -half[0]..=half[0] {
                                let ii = clamp(i as isize + di, nx);
                                window.push(volume.get(ii, jj, kk));
                            }
                        }
                    }
                    let mid = window.len() / 2;
                    let (_, m, _) = window.select_nth_unstable_by(mid, |a, b| a.total_cmp_val(b));
                    slice[i + nx * j] = *m;
                }
            }
        });
    Ok(volume.with_values(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_median(v: &ScalarVolume<f64>, i: usize, j: usize, k: usize, kernel: [usize; 3]) -> f64 {
        let d = v.dims();
        let mut w = Vec::new();
        for dk in 0..kernel[2] {
            for dj in 0..kernel[1] {
                for di in 0..kernel[0] {
                    let c = |x: usize, dx: usize, h: usize, n: usize| {
                        (x as i64 + dx as i64 - h as i64).clamp(0, n as i64 - 1) as usize
                    };
                    w.push(v.get(
                        c(i, di, kernel[0] / 2, d[0]),
                        c(j, dj, kernel[1] / 2, d[1]),
                        c(k, dk, kernel[2] / 2, d[2]),
                    ));
                }
            }
        }
        w.sort_by(|a, b| a.partial_cmp(b).unwrap());
        w[w.len() / 2]
    }

    #[test]
    fn constant_volume_unchanged() {
        let v = ScalarVolume::new([4, 5, 3], [1.0f64; 3], [0.0; 3], vec![2.5; 60]).unwrap();
        assert_eq!(median_filter(&v, [3, 3, 3]).unwrap(), v);
        assert_eq!(median_filter(&v, [7, 7, 1]).unwrap(), v);
    }

    #[test]
    fn impulse_removed() {
        let mut vals = vec![0.0f64; 25 * 2];
        vals[2 + 5 * 2] = 100.0;
        let v = ScalarVolume::new([5, 5, 2], [1.0; 3], [0.0; 3], vals).unwrap();
        let f = median_filter(&v, [3, 3, 1]).unwrap();
        assert!(f.values().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn ramp_interior_unchanged() {
        // 5x5 ramp slice, duplicated so dims >= 2 along z
        let v = ScalarVolume::from_fn([5, 5, 2], [1.0f64; 3], [0.0; 3], |p| p[0] + 5.0 * p[1]).unwrap();
        let f = median_filter(&v, [3, 3, 1]).unwrap();
        for k in 0..2 {
            for j in 0..5 {
                for i in 0..5 {
                    let brute = brute_median(&v, i, j, k, [3, 3, 1]);
                    assert_eq!(f.get(i, j, k), brute);
                    if (1..4).contains(&i) && (1..4).contains(&j) {
                        assert_eq!(f.get(i, j, k), v.get(i, j, k));
                    }
                }
            }
        }
    }

    #[test]
    fn even_kernel_rejected() {
        let v = ScalarVolume::new([2, 2, 2], [1.0f64; 3], [0.0; 3], vec![0.0; 8]).unwrap();
        assert!(median_filter(&v, [2, 3, 1]).is_err());
        assert!(median_filter(&v, [3, 3, 0]).is_err());
    }

    proptest! {
        #[test]
        fn matches_brute_force_and_stays_in_range(
            vals in proptest::collection::vec(-50.0f64..50.0, 4 * 3 * 3),
            kx in 0usize..3, kz in 0usize..2,
        ) {
            let v = ScalarVolume::new([4, 3, 3], [1.0; 3], [0.0; 3], vals).unwrap();
            let kernel = [2 * kx + 1, 3, 2 * kz + 1];
            let f = median_filter(&v, kernel).unwrap();
            let (lo, hi) = v.min_max();
            for k in 0..3 { for j in 0..3 { for i in 0..4 {
                prop_assert_eq!(f.get(i, j, k), brute_median(&v, i, j, k, kernel));
                prop_assert!(f.get(i, j, k) >= lo && f.get(i, j, k) <= hi);
            }}}
        }
    }
}
