//! Direct Cholesky factorizations: banded (for the finite-difference
//! operators, whose lower bandwidth is 1 in 1-D and `n0 - 2` in 2-D) and
//! dense (for covariance matrices). Both are plain `LL^T` with positive-pivot
//! checks; failure reports the offending pivot index so callers can escalate
//! (the covariance module walks a jitter ladder on failure).

/// Symmetric banded matrix stored by lower diagonals:
/// `bands[d * n + j] = A[j + d][j]` for `0 <= d <= bandwidth`, `j < n - d`.
#[derive(Debug, Clone)]
pub(crate) struct BandMatrix {
    pub n: usize,
    pub bandwidth: usize,
    bands: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, bandwidth: usize) -> BandMatrix {
        BandMatrix {
            n,
            bandwidth,
            bands: vec![0.0; (bandwidth + 1) * n],
        }
    }

    #[inline]
    pub fn get(&self, d: usize, j: usize) -> f64 {
        self.bands[d * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, d: usize, j: usize, v: f64) {
        self.bands[d * self.n + j] = v;
    }

    #[inline]
    pub fn add(&mut self, d: usize, j: usize, v: f64) {
        self.bands[d * self.n + j] += v;
    }

    /// `y = A x` using the symmetric lower-band storage.
    pub fn sym_matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = vec![0.0; n];
        for j in 0..n {
            y[j] += self.get(0, j) * x[j];
        }
        for d in 1..=self.bandwidth {
            for j in 0..n - d {
                let a = self.get(d, j);
                y[j + d] += a * x[j];
                y[j] += a * x[j + d];
            }
        }
        y
    }
}

/// Lower-band Cholesky factor of an SPD band matrix; `Err(j)` reports a
/// non-positive (or non-finite) pivot at column `j`.
pub(crate) fn band_cholesky(a: &BandMatrix) -> Result<BandMatrix, usize> {
    let n = a.n;
    let bw = a.bandwidth;
    let mut l = BandMatrix::zeros(n, bw);
    for j in 0..n {
        let lo = j.saturating_sub(bw);
        let mut s = a.get(0, j);
        for k in lo..j {
            let v = l.get(j - k, k);
            s -= v * v;
        }
        if !s.is_finite() || s <= 0.0 {
            return Err(j);
        }
        let d = s.sqrt();
        l.set(0, j, d);
        let hi = (j + bw).min(n - 1);
        for i in (j + 1)..=hi {
            let mut s = a.get(i - j, j);
            let klo = lo.max(i.saturating_sub(bw));
            for k in klo..j {
                s -= l.get(i - k, k) * l.get(j - k, k);
            }
            l.set(i - j, j, s / d);
        }
    }
    Ok(l)
}

/// Solves `L L^T x = b` given the band factor.
pub(crate) fn band_solve(l: &BandMatrix, b: &[f64]) -> Vec<f64> {
    let n = l.n;
    let bw = l.bandwidth;
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        let lo = i.saturating_sub(bw);
        for (k, yk) in y.iter().enumerate().take(i).skip(lo) {
            s -= l.get(i - k, k) * yk;
        }
        y[i] = s / l.get(0, i);
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        let hi = (i + bw).min(n - 1);
        for (k, xk) in x.iter().enumerate().take(hi + 1).skip(i + 1) {
            s -= l.get(k - i, i) * xk;
        }
        x[i] = s / l.get(0, i);
    }
    x
}

/// Dense lower Cholesky of a symmetric matrix in row-major full storage
/// (reads the lower triangle); the returned factor has an explicit zero
/// upper triangle. `Err(j)` reports the failing pivot.
pub(crate) fn dense_cholesky(n: usize, a: &[f64]) -> Result<Vec<f64>, usize> {
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut s = a[j * n + j];
        for k in 0..j {
            let v = l[j * n + k];
            s -= v * v;
        }
        if !s.is_finite() || s <= 0.0 {
            return Err(j);
        }
        let d = s.sqrt();
        l[j * n + j] = d;
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / d;
        }
    }
    Ok(l)
}

/// `y = L z` for a dense lower-triangular factor.
pub(crate) fn dense_lower_matvec(n: usize, l: &[f64], z: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; n];
    for i in 0..n {
        let row = &l[i * n..i * n + i + 1];
        let mut s = 0.0;
        for (lik, zk) in row.iter().zip(&z[..i + 1]) {
            s += lik * zk;
        }
        y[i] = s;
    }
    y
}
