//! Slice-level forward/backward kernels. Shapes are validated by the callers.

use crate::scalar::Real;

#[inline]
fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    let mut acc = T::zero();
    for (&x, &y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

#[inline]
fn axpy<T: Real>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn transpose<T: Real>(x: &[T], rows: usize, cols: usize) -> Vec<T> {
    let mut t = vec![T::zero(); rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            t[c * rows + r] = x[r * cols + c];
        }
    }
    t
}

/// `y[g, c] = sum_f w[g, f] x[f, c] + b[g]` for x of shape `f x c`, w of shape `g x f`.
pub fn fc_forward<T: Real>(x: &[T], w: &[T], b: &[T], f: usize, c: usize, g: usize) -> Vec<T> {
    let xt = transpose(x, f, c);
    let mut y = vec![T::zero(); g * c];
    for gi in 0..g {
        let wrow = &w[gi * f..(gi + 1) * f];
        for ci in 0..c {
            y[gi * c + ci] = dot(wrow, &xt[ci * f..(ci + 1) * f]) + b[gi];
        }
    }
    y
}

#[allow(clippy::too_many_arguments)]
pub fn fc_backward<T: Real>(
    x: &[T],
    w: &[T],
    gy: &[T],
    f: usize,
    c: usize,
    g: usize,
    gx: Option<&mut [T]>,
    gw: Option<&mut [T]>,
    gb: Option<&mut [T]>,
) {
    if let Some(gb) = gb {
        for gi in 0..g {
            gb[gi] += gy[gi * c..(gi + 1) * c].iter().copied().sum::<T>();
        }
    }
    if let Some(gw) = gw {
        let xt = transpose(x, f, c);
        for gi in 0..g {
            let row = &mut gw[gi * f..(gi + 1) * f];
            for ci in 0..c {
                let s = gy[gi * c + ci];
                if s != T::zero() {
                    axpy(s, &xt[ci * f..(ci + 1) * f], row);
                }
            }
        }
    }
    if let Some(gx) = gx {
        let mut gxt = vec![T::zero(); c * f];
        for gi in 0..g {
            let wrow = &w[gi * f..(gi + 1) * f];
            for ci in 0..c {
                let s = gy[gi * c + ci];
                if s != T::zero() {
                    axpy(s, wrow, &mut gxt[ci * f..(ci + 1) * f]);
                }
            }
        }
        for fi in 0..f {
            for ci in 0..c {
                gx[fi * c + ci] += gxt[ci * f + fi];
            }
        }
    }
}

/// Geometry of a "same"-padded 2-D convolution over an `h x w x cin` input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvGeom {
    pub h: usize,
    pub w: usize,
    pub cin: usize,
    pub kh: usize,
    pub kw: usize,
    pub cout: usize,
}

impl ConvGeom {
    /// Zero padding before the first row/column; the remainder goes after.
    pub fn pad_before(k: usize) -> usize {
        (k - 1) / 2
    }

    /// Input coordinate hit by output position `o` and kernel tap `t`, if inside the input.
    #[inline]
    fn src(o: usize, t: usize, k: usize, n: usize) -> Option<usize> {
        let p = o + t;
        let pb = Self::pad_before(k);
        if p < pb || p - pb >= n {
            None
        } else {
            Some(p - pb)
        }
    }
}

/// Cross-correlation with kernels laid out `kh x kw x cin x cout`; output `h x w x cout`.
pub fn conv2d_forward<T: Real>(x: &[T], k: &[T], b: &[T], geo: ConvGeom) -> Vec<T> {
    let ConvGeom {
        h,
        w,
        cin,
        kh,
        kw,
        cout,
    } = geo;
    let mut y = vec![T::zero(); h * w * cout];
    for i in 0..h {
        for j in 0..w {
            let out = &mut y[(i * w + j) * cout..(i * w + j + 1) * cout];
            out.copy_from_slice(b);
            for di in 0..kh {
                let Some(si) = ConvGeom::src(i, di, kh, h) else {
                    continue;
                };
                for dj in 0..kw {
                    let Some(sj) = ConvGeom::src(j, dj, kw, w) else {
                        continue;
                    };
                    let xin = &x[(si * w + sj) * cin..(si * w + sj + 1) * cin];
                    let kbase = (di * kw + dj) * cin * cout;
                    for (ci, &xv) in xin.iter().enumerate() {
                        if xv != T::zero() {
                            axpy(xv, &k[kbase + ci * cout..kbase + (ci + 1) * cout], out);
                        }
                    }
                }
            }
        }
    }
    y
}

#[allow(clippy::too_many_arguments)]
pub fn conv2d_backward<T: Real>(
    x: &[T],
    k: &[T],
    gy: &[T],
    geo: ConvGeom,
    mut gx: Option<&mut [T]>,
    mut gk: Option<&mut [T]>,
    gb: Option<&mut [T]>,
) {
    let ConvGeom {
        h,
        w,
        cin,
        kh,
        kw,
        cout,
    } = geo;
    if let Some(gb) = gb {
        for pos in 0..h * w {
            for (co, g) in gb.iter_mut().enumerate() {
                *g += gy[pos * cout + co];
            }
        }
    }
    for i in 0..h {
        for j in 0..w {
            let gout = &gy[(i * w + j) * cout..(i * w + j + 1) * cout];
            for di in 0..kh {
                let Some(si) = ConvGeom::src(i, di, kh, h) else {
                    continue;
                };
                for dj in 0..kw {
                    let Some(sj) = ConvGeom::src(j, dj, kw, w) else {
                        continue;
                    };
                    let xoff = (si * w + sj) * cin;
                    let kbase = (di * kw + dj) * cin * cout;
                    for ci in 0..cin {
                        let krow = kbase + ci * cout..kbase + (ci + 1) * cout;
                        if let Some(gx) = gx.as_deref_mut() {
                            gx[xoff + ci] += dot(&k[krow.clone()], gout);
                        }
                        if let Some(gk) = gk.as_deref_mut() {
                            let xv = x[xoff + ci];
                            if xv != T::zero() {
                                axpy(xv, gout, &mut gk[krow]);
                            }
                        }
                    }
                }
            }
        }
    }
}

/// Layer norm over the leading axis of an `f x c` view, per trailing column.
/// Returns `(y, x_hat, inv_std)`.
pub fn layer_norm_forward<T: Real>(x: &[T], w: &[T], b: &[T], f: usize, c: usize, eps: T) -> (Vec<T>, Vec<T>, Vec<T>) {
    let nf = T::from_usize(f).unwrap();
    let mut y = vec![T::zero(); f * c];
    let mut xhat = vec![T::zero(); f * c];
    let mut inv_std = vec![T::zero(); c];
    for ci in 0..c {
        let mut mean = T::zero();
        for fi in 0..f {
            mean += x[fi * c + ci];
        }
        mean /= nf;
        let mut var = T::zero();
        for fi in 0..f {
            let d = x[fi * c + ci] - mean;
            var += d * d;
        }
        var /= nf;
        let is = (var + eps).sqrt().recip();
        inv_std[ci] = is;
        for fi in 0..f {
            let xh = (x[fi * c + ci] - mean) * is;
            xhat[fi * c + ci] = xh;
            y[fi * c + ci] = w[fi] * xh + b[fi];
        }
    }
    (y, xhat, inv_std)
}

#[allow(clippy::too_many_arguments)]
pub fn layer_norm_backward<T: Real>(
    xhat: &[T],
    inv_std: &[T],
    w: &[T],
    gy: &[T],
    f: usize,
    c: usize,
    gx: Option<&mut [T]>,
    gw: Option<&mut [T]>,
    gb: Option<&mut [T]>,
) {
    if let Some(gw) = gw {
        for fi in 0..f {
            for ci in 0..c {
                gw[fi] += gy[fi * c + ci] * xhat[fi * c + ci];
            }
        }
    }
    if let Some(gb) = gb {
        for fi in 0..f {
            for ci in 0..c {
                gb[fi] += gy[fi * c + ci];
            }
        }
    }
    if let Some(gx) = gx {
        let nf = T::from_usize(f).unwrap();
        for ci in 0..c {
            let mut s1 = T::zero();
            let mut s2 = T::zero();
            for fi in 0..f {
                let gh = gy[fi * c + ci] * w[fi];
                s1 += gh;
                s2 += gh * xhat[fi * c + ci];
            }
            for fi in 0..f {
                let gh = gy[fi * c + ci] * w[fi];
                gx[fi * c + ci] += inv_std[ci] * (gh - s1 / nf - xhat[fi * c + ci] * s2 / nf);
            }
        }
    }
}

const GELU_K: f64 = 0.044_715;

pub fn gelu<T: Real>(x: T) -> T {
    let a = T::lit((2.0 / std::f64::consts::PI).sqrt());
    let half = T::lit(0.5);
    half * x * (T::one() + (a * (x + T::lit(GELU_K) * x * x * x)).tanh())
}

pub fn gelu_grad<T: Real>(x: T) -> T {
    let a = T::lit((2.0 / std::f64::consts::PI).sqrt());
    let k = T::lit(GELU_K);
    let half = T::lit(0.5);
    let t = (a * (x + k * x * x * x)).tanh();
    half * (T::one() + t) + half * x * (T::one() - t * t) * a * (T::one() + T::lit(3.0) * k * x * x)
}

/// Row-wise softmax with max subtraction.
pub fn softmax_rows<T: Real>(x: &[T], rows: usize, cols: usize) -> Vec<T> {
    let mut y = vec![T::zero(); rows * cols];
    for r in 0..rows {
        let row = &x[r * cols..(r + 1) * cols];
        let m = row.iter().copied().fold(T::neg_infinity(), T::max);
        let mut s = T::zero();
        for (c, &v) in row.iter().enumerate() {
            let e = (v - m).exp();
            y[r * cols + c] = e;
            s += e;
        }
        for v in &mut y[r * cols..(r + 1) * cols] {
            *v /= s;
        }
    }
    y
}

/// `a (m x k) * b (k x n)`, or `a * b^T` with b stored `n x k` when `trans_b`.
pub fn matmul<T: Real>(a: &[T], b: &[T], m: usize, k: usize, n: usize, trans_b: bool) -> Vec<T> {
    let mut y = vec![T::zero(); m * n];
    if trans_b {
        for i in 0..m {
            for j in 0..n {
                y[i * n + j] = dot(&a[i * k..(i + 1) * k], &b[j * k..(j + 1) * k]);
            }
        }
    } else {
        for i in 0..m {
            let out = &mut y[i * n..(i + 1) * n];
            for p in 0..k {
                axpy(a[i * k + p], &b[p * n..(p + 1) * n], out);
            }
        }
    }
    y
}
