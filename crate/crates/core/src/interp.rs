//! Lagrange interpolation on uniform grids.

use crate::num::{FieldValue, Real};

/// Six-point Lagrange weights for nodes `-2..=3` at fractional position `f` in `[0, 1)`.
#[inline]
pub fn lagrange6<T: Real>(f: T) -> [T; 6] {
    let mut w = [T::one(); 6];
    for (m, wm) in w.iter_mut().enumerate() {
        let xm = T::lit(m as f64 - 2.0);
        for l in 0..6 {
            if l != m {
                let xl = T::lit(l as f64 - 2.0);
                *wm *= (f - xl) / (xm - xl);
            }
        }
    }
    w
}

/// Four-point Lagrange weights for nodes `0..=3` at position `x`.
#[inline]
pub fn lagrange4<T: Real>(x: T) -> [T; 4] {
    let mut w = [T::one(); 4];
    for (m, wm) in w.iter_mut().enumerate() {
        let xm = T::from_usize_lossy(m);
        for l in 0..4 {
            if l != m {
                let xl = T::from_usize_lossy(l);
                *wm *= (x - xl) / (xm - xl);
            }
        }
    }
    w
}

/// Splits a fractional index into floor and weights; exact integers get a unit weight.
#[inline]
fn split<T: Real>(x: T) -> (isize, [T; 6]) {
    let fl = x.floor();
    let f = x - fl;
    let base = fl.to_isize().unwrap_or(isize::MIN / 2);
    if f == T::zero() {
        let mut w = [T::zero(); 6];
        w[2] = T::one();
        (base, w)
    } else {
        (base, lagrange6(f))
    }
}

/// Resamples a zero-padded array: `out(i, j) = src(i + offset[0], j + offset[1])` with
/// separable six-point interpolation. `sdims[1] = odims[1] = 1` in one dimension.
pub fn shift_sample<T: Real, V: FieldValue<T>>(src: &[V], sdims: [usize; 2], offset: [T; 2], odims: [usize; 2]) -> Vec<V> {
    let (b0, w0) = split(offset[0]);
    let (b1, w1) = split(offset[1]);
    // pass along axis 0: rows of src (all sdims[1]) onto odims[0] columns
    let mut tmp = vec![V::zero(); odims[0] * sdims[1]];
    for j in 0..sdims[1] {
        let row = &src[j * sdims[0]..(j + 1) * sdims[0]];
        for i in 0..odims[0] {
            let c = i as isize + b0;
            let mut acc = V::zero();
            for (m, &w) in w0.iter().enumerate() {
                if w == T::zero() {
                    continue;
                }
                let s = c + m as isize - 2;
                if s >= 0 && (s as usize) < sdims[0] {
                    acc += row[s as usize] * w;
                }
            }
            tmp[j * odims[0] + i] = acc;
        }
    }
    if sdims[1] == 1 && odims[1] == 1 && b1 == 0 {
        return tmp;
    }
    let mut out = vec![V::zero(); odims[0] * odims[1]];
    for j in 0..odims[1] {
        let c = j as isize + b1;
        for (m, &w) in w1.iter().enumerate() {
            if w == T::zero() {
                continue;
            }
            let s = c + m as isize - 2;
            if s < 0 || s as usize >= sdims[1] {
                continue;
            }
            let srow = &tmp[s as usize * odims[0]..(s as usize + 1) * odims[0]];
            let orow = &mut out[j * odims[0]..(j + 1) * odims[0]];
            for (o, &v) in orow.iter_mut().zip(srow) {
                *o += v * w;
            }
        }
    }
    out
}

/// Six-point interpolation of a zero-padded array at a single fractional index.
pub fn sample_at<T: Real, V: FieldValue<T>>(src: &[V], sdims: [usize; 2], x: [T; 2]) -> V {
    let (b0, w0) = split(x[0]);
    let (b1, w1) = if sdims[1] == 1 {
        (0, {
            let mut w = [T::zero(); 6];
            w[2] = T::one();
            w
        })
    } else {
        split(x[1])
    };
    let mut acc = V::zero();
    for (n, &v1) in w1.iter().enumerate() {
        if v1 == T::zero() {
            continue;
        }
        let j = b1 + n as isize - 2;
        if j < 0 || j as usize >= sdims[1] {
            continue;
        }
        for (m, &v0) in w0.iter().enumerate() {
            if v0 == T::zero() {
                continue;
            }
            let i = b0 + m as isize - 2;
            if i < 0 || i as usize >= sdims[0] {
                continue;
            }
            acc += src[j as usize * sdims[0] + i as usize] * (v0 * v1);
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_reproduce_quintics() {
        let f = 0.37;
        let w = lagrange6(f);
        for p in 0..6 {
            let s: f64 = (0..6).map(|m| w[m] * (m as f64 - 2.0).powi(p)).sum();
            assert!((s - f.powi(p)).abs() < 1e-13);
        }
        let w4 = lagrange4(2.5);
        assert!((w4.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((w4[0] - 1.0 / 16.0).abs() < 1e-15 && (w4[3] - 5.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn shift_sample_is_accurate() {
        let n = 64;
        let dx = 0.05;
        let f = |x: f64, y: f64| (x * 1.3).sin() * (y * 0.7).cos();
        let src: Vec<f64> = (0..n).flat_map(|j| (0..n).map(move |i| f(i as f64 * dx, j as f64 * dx))).collect();
        let off = [3.3, -2.6];
        let out = shift_sample(&src, [n, n], off, [50, 50]);
        let pt = sample_at(&src, [n, n], [20.0 + off[0], 20.0 + off[1]]);
        for j in 5..45 {
            for i in 5..45 {
                let e = out[j * 50 + i] - f((i as f64 + off[0]) * dx, (j as f64 + off[1]) * dx);
                assert!(e.abs() < 1e-9, "{e}");
            }
        }
        assert!((pt - out[20 * 50 + 20]).abs() < 1e-14);
    }
}
