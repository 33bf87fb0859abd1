//! Jet kernels on channel-major buffers `buf[c * w + j]`, `c = 0..1 + 2D`.

#[inline]
pub(super) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(super) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// `pre = V y_jet + b`, where the input jet has value `y`, first derivative
/// `e_{dirs[k]}` and zero second derivatives. `v` starts at the block.
pub(super) fn input_affine(v: &[f64], b: &[f64], y: &[f64], dirs: &[usize], w: usize, pre: &mut [f64]) {
    let n_in = y.len();
    let nd = dirs.len();
    for i in 0..w {
        let row = &v[i * n_in..(i + 1) * n_in];
        pre[i] = dot(row, y) + b[i];
        for (k, &d) in dirs.iter().enumerate() {
            pre[(1 + k) * w + i] = row[d];
            pre[(1 + nd + k) * w + i] = 0.0;
        }
    }
}

/// `out += W x` channel by channel; `W` is `rows × cols`.
pub(super) fn add_matvec(wm: &[f64], x: &[f64], rows: usize, cols: usize, c: usize, out: &mut [f64]) {
    for ch in 0..c {
        let xc = &x[ch * cols..(ch + 1) * cols];
        let oc = &mut out[ch * rows..(ch + 1) * rows];
        for (i, o) in oc.iter_mut().enumerate() {
            *o += dot(&wm[i * cols..(i + 1) * cols], xc);
        }
    }
}

/// `dx += Wᵀ da` channel by channel.
pub(super) fn add_matvec_t(wm: &[f64], da: &[f64], rows: usize, cols: usize, c: usize, dx: &mut [f64]) {
    for ch in 0..c {
        let dc = &da[ch * rows..(ch + 1) * rows];
        let xc = &mut dx[ch * cols..(ch + 1) * cols];
        for (i, &g) in dc.iter().enumerate() {
            if g != 0.0 {
                axpy(g, &wm[i * cols..(i + 1) * cols], xc);
            }
        }
    }
}

/// `g += Σ_c da_c x_cᵀ`.
pub(super) fn outer_acc(da: &[f64], x: &[f64], rows: usize, cols: usize, c: usize, g: &mut [f64]) {
    for ch in 0..c {
        let dc = &da[ch * rows..(ch + 1) * rows];
        let xc = &x[ch * cols..(ch + 1) * cols];
        for (i, &gi) in dc.iter().enumerate() {
            if gi != 0.0 {
                axpy(gi, xc, &mut g[i * cols..(i + 1) * cols]);
            }
        }
    }
}

pub(super) fn tanh_forward(a: &[f64], out: &mut [f64], nd: usize, w: usize) {
    for j in 0..w {
        let s = a[j].tanh();
        let s1 = 1.0 - s * s;
        let s2 = -2.0 * s * s1;
        out[j] = s;
        for k in 0..nd {
            let ag = a[(1 + k) * w + j];
            out[(1 + k) * w + j] = s1 * ag;
            out[(1 + nd + k) * w + j] = s1 * a[(1 + nd + k) * w + j] + s2 * ag * ag;
        }
    }
}

/// Overwrites `da` with the pullback of `dout` through `out = tanh(a)`.
pub(super) fn tanh_backward(a: &[f64], out: &[f64], dout: &[f64], da: &mut [f64], nd: usize, w: usize) {
    for j in 0..w {
        let s = out[j];
        let s1 = 1.0 - s * s;
        let s2 = -2.0 * s * s1;
        let s3 = -2.0 * s1 * s1 + 4.0 * s * s * s1;
        let mut d0 = dout[j] * s1;
        for k in 0..nd {
            let (ig, ih) = ((1 + k) * w + j, (1 + nd + k) * w + j);
            let (ag, ah) = (a[ig], a[ih]);
            let (dg, dh) = (dout[ig], dout[ih]);
            d0 += dg * ag * s2 + dh * (ah * s2 + ag * ag * s3);
            da[ig] = dg * s1 + dh * 2.0 * s2 * ag;
            da[ih] = dh * s1;
        }
        da[j] = d0;
    }
}

/// `out = p ⊙ q` (overwrites).
pub(super) fn hadamard(p: &[f64], q: &[f64], out: &mut [f64], nd: usize, w: usize) {
    for j in 0..w {
        let (p0, q0) = (p[j], q[j]);
        out[j] = p0 * q0;
        for k in 0..nd {
            let (ig, ih) = ((1 + k) * w + j, (1 + nd + k) * w + j);
            out[ig] = p[ig] * q0 + p0 * q[ig];
            out[ih] = p[ih] * q0 + 2.0 * p[ig] * q[ig] + p0 * q[ih];
        }
    }
}

/// Accumulates the pullback of `dout` through `p ⊙ q` into `dp` and `dq`.
pub(super) fn hadamard_back(p: &[f64], q: &[f64], dout: &[f64], dp: &mut [f64], dq: &mut [f64], nd: usize, w: usize) {
    for j in 0..w {
        let (p0, q0, d0) = (p[j], q[j], dout[j]);
        let mut dp0 = d0 * q0;
        let mut dq0 = d0 * p0;
        for k in 0..nd {
            let (ig, ih) = ((1 + k) * w + j, (1 + nd + k) * w + j);
            let (dg, dh) = (dout[ig], dout[ih]);
            dp0 += dg * q[ig] + dh * q[ih];
            dq0 += dg * p[ig] + dh * p[ih];
            dp[ig] += dg * q0 + 2.0 * dh * q[ig];
            dq[ig] += dg * p0 + 2.0 * dh * p[ig];
            dp[ih] += dh * q0;
            dq[ih] += dh * p0;
        }
        dp[j] += dp0;
        dq[j] += dq0;
    }
}
