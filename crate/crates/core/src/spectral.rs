//! Singular-value machinery: top singular value, the bipartite mixing
//! bounds, blow-ups, and the tr(M²) ≥ λ⁴ bound.

use std::collections::hash_map::DefaultHasher;
use std::fmt::Write as _;
use std::hash::{Hash, Hasher};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};

/// Dense real matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::input("matrix dimensions must be positive"));
        }
        if data.len() != rows * cols {
            return Err(Error::input("matrix data length mismatch"));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::input("matrix entries must be finite"));
        }
        Ok(RealMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        RealMatrix::new(rows, cols, vec![0.0; rows * cols])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> RealMatrix {
        let mut data = vec![0.0; self.rows * self.cols];
        for i in 0..self.rows {
            for j in 0..self.cols {
                data[j * self.rows + i] = self.get(i, j);
            }
        }
        RealMatrix { rows: self.cols, cols: self.rows, data }
    }

    /// y = A·x
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let row = self.row(i);
            let mut s = 0.0;
            for (a, b) in row.iter().zip(x.iter()) {
                s += a * b;
            }
            *yi = s;
        }
    }

    /// y = Aᵀ·x
    fn apply_transposed(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for (i, &xi) in x.iter().enumerate() {
            let row = self.row(i);
            for (yj, a) in y.iter_mut().zip(row.iter()) {
                *yj += a * xi;
            }
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Matrix text format: header `mat <rows> <cols>`, then one line per row.
pub fn parse_matrix(text: &str) -> Result<RealMatrix> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::input("empty matrix file"))?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some("mat") {
        return Err(Error::input("matrix file must start with 'mat <rows> <cols>'"));
    }
    let rows: usize = parts
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::input("bad row count"))?;
    let cols: usize = parts
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::input("bad column count"))?;
    let mut data = Vec::with_capacity(rows * cols);
    for (i, line) in lines.enumerate() {
        if i >= rows {
            if line.trim().is_empty() {
                continue;
            }
            return Err(Error::input("too many matrix rows"));
        }
        let row: Vec<f64> = line
            .split(' ')
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| Error::input(format!("row {i}: bad entry '{tok}'")))
            })
            .collect::<Result<_>>()?;
        if row.len() != cols {
            return Err(Error::input(format!("row {i} has {} entries, expected {cols}", row.len())));
        }
        data.extend(row);
    }
    if data.len() != rows * cols {
        return Err(Error::input("missing matrix rows"));
    }
    RealMatrix::new(rows, cols, data)
}

pub fn write_matrix(m: &RealMatrix) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "mat {} {}", m.rows(), m.cols());
    for i in 0..m.rows() {
        for (j, v) in m.row(i).iter().enumerate() {
            if j > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{v}");
        }
        out.push('\n');
    }
    out
}

/// Deterministic start vector derived from the matrix contents, so runs
/// are reproducible without an RNG seed parameter.
fn seed_vector(m: &RealMatrix, len: usize) -> Vec<f64> {
    let mut h = DefaultHasher::new();
    m.rows.hash(&mut h);
    m.cols.hash(&mut h);
    for x in &m.data {
        x.to_bits().hash(&mut h);
    }
    let mut rng = ChaCha12Rng::seed_from_u64(h.finish());
    let mut v: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        v[0] = 1.0;
    } else {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}

/// Cyclic Jacobi eigenvalues of a symmetric matrix (used as the exact
/// small-dimension fallback via the Gram matrix).
fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..60 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[i][j] * a[i][j];
            }
        }
        if off <= 1e-28 * (n * n) as f64 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

fn gram_top_singular(m: &RealMatrix) -> f64 {
    // Gram matrix on the smaller side.
    let (r, c) = (m.rows, m.cols);
    let small = r.min(c);
    let mut g = vec![vec![0.0f64; small]; small];
    if c <= r {
        // G = AᵀA
        for i in 0..small {
            for j in i..small {
                let mut s = 0.0;
                for k in 0..r {
                    s += m.get(k, i) * m.get(k, j);
                }
                g[i][j] = s;
                g[j][i] = s;
            }
        }
    } else {
        // G = AAᵀ
        for i in 0..small {
            for j in i..small {
                let mut s = 0.0;
                let (ri, rj) = (m.row(i), m.row(j));
                for k in 0..c {
                    s += ri[k] * rj[k];
                }
                g[i][j] = s;
                g[j][i] = s;
            }
        }
    }
    let eigs = jacobi_eigenvalues(g);
    eigs.into_iter().fold(0.0f64, |acc, l| acc.max(l)).max(0.0).sqrt()
}

/// Largest singular value within `tol·max(1, σ_max)`.
///
/// Power iteration (alternating A, Aᵀ) from a deterministic seed-derived
/// start, with a Gram-matrix fallback for dimensions ≤ 64. Carries the
/// best bracket when it fails to converge on larger matrices.
pub fn top_singular_value(m: &RealMatrix, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::input("tolerance must be positive"));
    }
    if m.data.iter().all(|&x| x == 0.0) {
        return Ok(0.0);
    }
    let dim = m.rows.max(m.cols);
    let cap = (10.0 * dim as f64 * (1.0 / tol).ln()).ceil() as usize;
    let mut v = seed_vector(m, m.cols);
    let mut y = vec![0.0; m.rows];
    let mut sigma = 0.0f64;
    let mut stable = 0;
    for _ in 0..cap.max(8) {
        m.apply(&v, &mut y);
        let ny = y.iter().map(|x| x * x).sum::<f64>().sqrt();
        if ny == 0.0 {
            break; // v in the kernel; fall through to the Gram fallback
        }
        let prev = sigma;
        sigma = ny;
        m.apply_transposed(&y, &mut v);
        let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nv == 0.0 {
            break;
        }
        v.iter_mut().for_each(|x| *x /= nv);
        if (sigma - prev).abs() <= 0.25 * tol * sigma.max(1.0) {
            stable += 1;
            if stable >= 3 {
                return Ok(sigma);
            }
        } else {
            stable = 0;
        }
    }
    if m.rows.min(m.cols) <= 64 {
        return Ok(gram_top_singular(m));
    }
    Err(Error::Numerical {
        msg: "power iteration did not converge".into(),
        lower: sigma,
        upper: m.frobenius_norm(),
    })
}

/// Both sides of the two mixing bounds for row set B and column set C:
/// (Σ_v d_C(v)², λ²|C|, |e(B,C)|, λ√(|B||C|)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingReport {
    pub degree_square_sum: f64,
    pub degree_square_bound: f64,
    pub edge_sum_abs: f64,
    pub edge_sum_bound: f64,
}

pub fn mixing_report(m: &RealMatrix, b: &[usize], c: &[usize]) -> Result<MixingReport> {
    for &v in b {
        if v >= m.rows {
            return Err(Error::input(format!("row index {v} out of range")));
        }
    }
    for &w in c {
        if w >= m.cols {
            return Err(Error::input(format!("column index {w} out of range")));
        }
    }
    let lambda = top_singular_value(m, 1e-10)?;
    let mut in_b = vec![false; m.rows];
    for &v in b {
        in_b[v] = true;
    }
    let mut degree_square_sum = 0.0;
    let mut e_bc = 0.0;
    for v in 0..m.rows {
        let row = m.row(v);
        let mut d = 0.0;
        for &w in c {
            d += row[w];
        }
        degree_square_sum += d * d;
        if in_b[v] {
            e_bc += d;
        }
    }
    Ok(MixingReport {
        degree_square_sum,
        degree_square_bound: lambda * lambda * c.len() as f64,
        edge_sum_abs: e_bc.abs(),
        edge_sum_bound: lambda * ((b.len() * c.len()) as f64).sqrt(),
    })
}

/// k-blow-up: replace each entry a_ij by the k×k constant block a_ij·J.
pub fn blow_up(m: &RealMatrix, k: usize) -> Result<RealMatrix> {
    if k < 1 {
        return Err(Error::input("blow-up factor must be at least 1"));
    }
    let (r, c) = (m.rows * k, m.cols * k);
    if r.checked_mul(c).map_or(true, |e| e > 100_000_000) {
        return Err(Error::capacity("blow-up result exceeds the dense-storage budget"));
    }
    let mut out = RealMatrix::zeros(r, c)?;
    for i in 0..r {
        for j in 0..c {
            out.set(i, j, m.get(i / k, j / k));
        }
    }
    Ok(out)
}

/// (tr((AAᵀ)²), λ⁴) for square A; the trace always dominates.
pub fn trace_m2_bound(m: &RealMatrix) -> Result<(f64, f64)> {
    if m.rows != m.cols {
        return Err(Error::input("trace bound requires a square matrix"));
    }
    let n = m.rows;
    // tr(M²) = ‖M‖_F² for symmetric M = AAᵀ.
    let mut trace = 0.0;
    for i in 0..n {
        for j in 0..n {
            let (ri, rj) = (m.row(i), m.row(j));
            let mut s = 0.0;
            for k in 0..n {
                s += ri[k] * rj[k];
            }
            trace += s * s;
        }
    }
    let lambda = top_singular_value(m, 1e-10)?;
    Ok((trace, lambda.powi(4)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn random_matrix(rng: &mut ChaCha12Rng, r: usize, c: usize) -> RealMatrix {
        RealMatrix::new(r, c, (0..r * c).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
    }

    /// Independent small-matrix oracle: largest eigenvalue of AᵀA via the
    /// characteristic polynomial (Faddeev–LeVerrier) and Newton from the
    /// right.
    fn char_poly_top_singular(m: &RealMatrix) -> f64 {
        let n = m.cols();
        // G = AᵀA
        let mut g = vec![vec![0.0f64; n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..m.rows() {
                    s += m.get(k, i) * m.get(k, j);
                }
                g[i][j] = s;
            }
        }
        // Faddeev–LeVerrier: p(x) = x^n + c_1 x^(n-1) + … + c_n
        let mut coeffs = vec![1.0f64];
        let mut mat = vec![vec![0.0; n]; n];
        let mut prev = vec![vec![0.0; n]; n];
        for step in 1..=n {
            // mat = G·(prev + c_{step-1}·I)
            let mut tmp = prev.clone();
            for (i, row) in tmp.iter_mut().enumerate() {
                row[i] += coeffs[step - 1];
            }
            for i in 0..n {
                for j in 0..n {
                    let mut s = 0.0;
                    for k in 0..n {
                        s += g[i][k] * tmp[k][j];
                    }
                    mat[i][j] = s;
                }
            }
            let trace: f64 = (0..n).map(|i| mat[i][i]).sum();
            coeffs.push(-trace / step as f64);
            prev = mat.clone();
        }
        // Newton from above the largest root.
        let ub: f64 = (0..n).map(|i| g[i][i]).sum::<f64>() + 1.0;
        let eval = |x: f64| {
            let mut p = 0.0;
            let mut dp = 0.0;
            for &c in &coeffs {
                dp = dp * x + p;
                p = p * x + c;
            }
            (p, dp)
        };
        let mut x = ub;
        for _ in 0..200 {
            let (p, dp) = eval(x);
            if dp == 0.0 {
                break;
            }
            let nx = x - p / dp;
            if (nx - x).abs() <= 1e-14 * x.max(1.0) {
                x = nx;
                break;
            }
            x = nx;
        }
        x.max(0.0).sqrt()
    }

    #[test]
    fn diagonal_and_constant_examples() {
        let d = RealMatrix::new(2, 2, vec![3.0, 0.0, 0.0, 4.0]).unwrap();
        assert!((top_singular_value(&d, 1e-10).unwrap() - 4.0).abs() < 1e-8);
        let c = RealMatrix::new(5, 5, vec![0.3; 25]).unwrap();
        assert!((top_singular_value(&c, 1e-10).unwrap() - 1.5).abs() < 1e-8);
        let z = RealMatrix::zeros(3, 3).unwrap();
        assert_eq!(top_singular_value(&z, 1e-10).unwrap(), 0.0);
    }

    #[test]
    fn matches_char_poly_oracle_on_random_4x4() {
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        for _ in 0..50 {
            let m = random_matrix(&mut rng, 4, 4);
            let sigma = top_singular_value(&m, 1e-12).unwrap();
            let oracle = char_poly_top_singular(&m);
            assert!(
                (sigma - oracle).abs() < 1e-8 * oracle.max(1.0),
                "{sigma} vs {oracle}"
            );
        }
    }

    #[test]
    fn transpose_invariance() {
        let mut rng = ChaCha12Rng::seed_from_u64(15);
        for _ in 0..20 {
            let (r, c) = (rng.gen_range(2..7), rng.gen_range(2..7));
            let m = random_matrix(&mut rng, r, c);
            let a = top_singular_value(&m, 1e-10).unwrap();
            let b = top_singular_value(&m.transpose(), 1e-10).unwrap();
            assert!((a - b).abs() < 1e-8 * a.max(1.0));
        }
    }

    #[test]
    fn mixing_identity_equality_case() {
        let id = RealMatrix::new(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let rep = mixing_report(&id, &[0, 1], &[0]).unwrap();
        assert!((rep.degree_square_sum - 1.0).abs() < 1e-9);
        assert!((rep.degree_square_bound - 1.0).abs() < 1e-8);
        assert!(rep.degree_square_sum <= rep.degree_square_bound + 1e-8);
    }

    #[test]
    fn mixing_constant_matrix_algebra() {
        // constant α: Σ_v d_C(v)² = n·α²|C|² ≤ (nα)²|C|
        let n = 6;
        let alpha = 0.25;
        let m = RealMatrix::new(n, n, vec![alpha; n * n]).unwrap();
        let c: Vec<usize> = vec![1, 3, 4];
        let rep = mixing_report(&m, &[0, 2], &c).unwrap();
        let expect = n as f64 * alpha * alpha * (c.len() * c.len()) as f64;
        assert!((rep.degree_square_sum - expect).abs() < 1e-9);
        assert!(rep.degree_square_sum <= rep.degree_square_bound + 1e-8);
        assert!(rep.edge_sum_abs <= rep.edge_sum_bound + 1e-8);
    }

    #[test]
    fn mixing_holds_on_all_subsets_of_random_matrices() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        for _ in 0..10 {
            let m = random_matrix(&mut rng, 6, 6);
            let lambda = top_singular_value(&m, 1e-10).unwrap();
            // precompute d_C for every C via subset recursion
            for cm in 0u64..64 {
                let c: Vec<usize> = (0..6).filter(|&w| cm >> w & 1 == 1).collect();
                let rep_all = mixing_report(&m, &[], &c).unwrap();
                assert!(
                    rep_all.degree_square_sum <= lambda * lambda * c.len() as f64 + 1e-8,
                    "part 1 violated"
                );
                for bm in 0u64..64 {
                    let b: Vec<usize> = (0..6).filter(|&v| bm >> v & 1 == 1).collect();
                    let mut e = 0.0;
                    for &v in &b {
                        for &w in &c {
                            e += m.get(v, w);
                        }
                    }
                    assert!(
                        e.abs() <= lambda * ((b.len() * c.len()) as f64).sqrt() + 1e-8,
                        "part 2 violated"
                    );
                }
            }
        }
    }

    #[test]
    fn mixing_part_one_implies_part_two() {
        // Whenever Σ_v d_C(v)² ≤ λ²|C| holds, Cauchy–Schwarz forces
        // |e(B,C)| ≤ √(|B|·Σ d²) ≤ λ√(|B||C|); check the chain
        // numerically on independent computations of both sides.
        let mut rng = ChaCha12Rng::seed_from_u64(77);
        for _ in 0..30 {
            let m = random_matrix(&mut rng, 7, 7);
            for _ in 0..20 {
                let b: Vec<usize> = (0..7).filter(|_| rng.gen_bool(0.5)).collect();
                let c: Vec<usize> = (0..7).filter(|_| rng.gen_bool(0.5)).collect();
                let rep = mixing_report(&m, &b, &c).unwrap();
                if rep.degree_square_sum <= rep.degree_square_bound + 1e-8 {
                    let via_cs = ((b.len() as f64) * rep.degree_square_sum).sqrt();
                    assert!(rep.edge_sum_abs <= via_cs + 1e-8);
                    // compare squares to keep the tolerance linear
                    assert!(via_cs.powi(2) <= rep.edge_sum_bound.powi(2) + 1e-6);
                    assert!(rep.edge_sum_abs <= rep.edge_sum_bound + 1e-8);
                }
            }
        }
    }

    #[test]
    fn blow_up_basics() {
        let one = RealMatrix::new(1, 1, vec![1.0]).unwrap();
        let b = blow_up(&one, 2).unwrap();
        assert_eq!((b.rows(), b.cols()), (2, 2));
        assert!(b.row(0).iter().chain(b.row(1)).all(|&x| x == 1.0));
        let m = RealMatrix::new(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(blow_up(&m, 1).unwrap(), m);
    }

    #[test]
    fn blow_up_of_identity_has_doubled_spectrum() {
        let id = RealMatrix::new(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let b = blow_up(&id, 2).unwrap();
        let sigma = top_singular_value(&b, 1e-10).unwrap();
        assert!((sigma - 2.0).abs() < 1e-8);
        // Frobenius² = Σ σᵢ² = 8 pins the remaining spectrum to {2, 0, 0}.
        assert!((b.frobenius_norm().powi(2) - 8.0).abs() < 1e-9);
    }

    #[test]
    fn blow_up_law_on_random_matrices() {
        let mut rng = ChaCha12Rng::seed_from_u64(99);
        for _ in 0..20 {
            let n = rng.gen_range(1..=6);
            let k = rng.gen_range(1..=4);
            let m = random_matrix(&mut rng, n, n);
            let sigma = top_singular_value(&m, 1e-11).unwrap();
            let blown = blow_up(&m, k).unwrap();
            let sigma_k = top_singular_value(&blown, 1e-11).unwrap();
            assert!(
                (sigma_k - k as f64 * sigma).abs() <= 1e-8 * (k as f64 * sigma).max(1.0),
                "{sigma_k} vs {}",
                k as f64 * sigma
            );
        }
    }

    #[test]
    fn trace_bound_examples_and_property() {
        let d = RealMatrix::new(2, 2, vec![2.0, 0.0, 0.0, 1.0]).unwrap();
        let (tr, l4) = trace_m2_bound(&d).unwrap();
        assert!((tr - 17.0).abs() < 1e-9);
        assert!((l4 - 16.0).abs() < 1e-7);
        let z = RealMatrix::zeros(3, 3).unwrap();
        assert_eq!(trace_m2_bound(&z).unwrap(), (0.0, 0.0));
        let mut rng = ChaCha12Rng::seed_from_u64(123);
        for _ in 0..50 {
            let m = random_matrix(&mut rng, 6, 6);
            let (tr, l4) = trace_m2_bound(&m).unwrap();
            assert!(tr >= l4 - 1e-8, "trace {tr} below λ⁴ {l4}");
        }
    }

    #[test]
    fn matrix_format_round_trip() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let m = random_matrix(&mut rng, 3, 5);
        let text = write_matrix(&m);
        assert!(text.starts_with("mat 3 5\n"));
        let back = parse_matrix(&text).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn deterministic_results() {
        let mut rng = ChaCha12Rng::seed_from_u64(500);
        let m = random_matrix(&mut rng, 8, 8);
        let a = top_singular_value(&m, 1e-10).unwrap();
        let b = top_singular_value(&m, 1e-10).unwrap();
        assert_eq!(a, b);
    }
}
