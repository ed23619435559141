//! Dense row-major kernels used by the encoder and head.

/// `out[n×m] = a[n×k] · b[k×m]`
pub fn matmul(a: &[f64], b: &[f64], n: usize, k: usize, m: usize, out: &mut [f64]) {
    out[..n * m].fill(0.0);
    for i in 0..n {
        let row = &mut out[i * m..(i + 1) * m];
        for (p, &aip) in a[i * k..(i + 1) * k].iter().enumerate() {
            if aip == 0.0 {
                continue;
            }
            for (o, &bpj) in row.iter_mut().zip(&b[p * m..(p + 1) * m]) {
                *o += aip * bpj;
            }
        }
    }
}

/// `out[n×m] = a[n×k] · w[k×m] + bias[m]`
pub fn affine(a: &[f64], w: &[f64], bias: &[f64], n: usize, k: usize, m: usize, out: &mut [f64]) {
    matmul(a, w, n, k, m, out);
    for row in out[..n * m].chunks_exact_mut(m) {
        for (o, &b) in row.iter_mut().zip(bias) {
            *o += b;
        }
    }
}

/// `dw[k×m] += a[n×k]ᵀ · dy[n×m]`
pub fn acc_at_b(a: &[f64], dy: &[f64], n: usize, k: usize, m: usize, dw: &mut [f64]) {
    for i in 0..n {
        let dyi = &dy[i * m..(i + 1) * m];
        for (p, &aip) in a[i * k..(i + 1) * k].iter().enumerate() {
            if aip == 0.0 {
                continue;
            }
            for (d, &g) in dw[p * m..(p + 1) * m].iter_mut().zip(dyi) {
                *d += aip * g;
            }
        }
    }
}

/// `dx[n×k] += dy[n×m] · w[k×m]ᵀ`
pub fn acc_a_bt(dy: &[f64], w: &[f64], n: usize, k: usize, m: usize, dx: &mut [f64]) {
    for i in 0..n {
        let dyi = &dy[i * m..(i + 1) * m];
        for p in 0..k {
            let wp = &w[p * m..(p + 1) * m];
            let mut s = 0.0;
            for (a, b) in dyi.iter().zip(wp) {
                s += a * b;
            }
            dx[i * k + p] += s;
        }
    }
}

/// `db[m] += Σ_rows dy[n×m]`
pub fn acc_col_sum(dy: &[f64], m: usize, db: &mut [f64]) {
    for row in dy.chunks_exact(m) {
        for (d, &g) in db.iter_mut().zip(row) {
            *d += g;
        }
    }
}
