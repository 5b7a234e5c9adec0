//! Small dense integer matrices and Smith normal form, used to audit
//! abelianized embeddings. Entry growth is tame for the matrices that show
//! up here (signed incidence-style columns), so plain `i64` arithmetic is
//! used throughout.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn zero(rows: usize, cols: usize) -> IntMatrix {
        IntMatrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<i64>>) -> Result<IntMatrix> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::Invalid("ragged matrix rows".into()));
        }
        Ok(IntMatrix {
            rows: nrows,
            cols: ncols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> i64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: i64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row_vectors(&self) -> Vec<Vec<i64>> {
        (0..self.rows)
            .map(|r| self.data[r * self.cols..(r + 1) * self.cols].to_vec())
            .collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for r in 0..self.rows {
            self.data.swap(r * self.cols + a, r * self.cols + b);
        }
    }

    fn add_row_multiple(&mut self, target: usize, source: usize, factor: i64) {
        for c in 0..self.cols {
            let v = self.get(source, c) * factor;
            self.data[target * self.cols + c] += v;
        }
    }

    fn add_col_multiple(&mut self, target: usize, source: usize, factor: i64) {
        for r in 0..self.rows {
            let v = self.get(r, source) * factor;
            self.data[r * self.cols + target] += v;
        }
    }
}

/// The diagonal of the Smith normal form: nonnegative invariant factors in a
/// divisibility chain, then zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithForm {
    pub diag: Vec<i64>,
    pub rank: usize,
}

impl SmithForm {
    pub fn invariant_factors(&self) -> &[i64] {
        &self.diag[..self.rank]
    }

    pub fn all_invariant_factors_one(&self) -> bool {
        self.invariant_factors().iter().all(|&d| d == 1)
    }
}

/// Computes the Smith normal form diagonal by row/column elimination with a
/// minimal-pivot strategy and the usual divisibility fix-up.
pub fn smith_normal_form(m: &IntMatrix) -> SmithForm {
    let mut m = m.clone();
    let (rows, cols) = (m.rows, m.cols);
    let bound = rows.min(cols);
    let mut diag = Vec::with_capacity(bound);

    for k in 0..bound {
        'pivot: loop {
            // Smallest nonzero entry of the trailing submatrix becomes the pivot.
            let mut best: Option<(usize, usize)> = None;
            for r in k..rows {
                for c in k..cols {
                    let v = m.get(r, c).abs();
                    if v != 0 && best.is_none_or(|(br, bc)| v < m.get(br, bc).abs()) {
                        best = Some((r, c));
                    }
                }
            }
            let Some((pr, pc)) = best else {
                // trailing submatrix is zero
                diag.resize(bound, 0);
                let rank = diag.iter().take_while(|&&d| d != 0).count();
                return SmithForm { diag, rank };
            };
            m.swap_rows(k, pr);
            m.swap_cols(k, pc);
            let p = m.get(k, k);

            // Clear the pivot row and column; leftover remainders shrink the
            // minimum, so the loop terminates.
            let mut dirty = false;
            for r in k + 1..rows {
                let q = m.get(r, k).div_euclid(p);
                if q != 0 {
                    m.add_row_multiple(r, k, -q);
                }
                if m.get(r, k) != 0 {
                    dirty = true;
                }
            }
            for c in k + 1..cols {
                let q = m.get(k, c).div_euclid(p);
                if q != 0 {
                    m.add_col_multiple(c, k, -q);
                }
                if m.get(k, c) != 0 {
                    dirty = true;
                }
            }
            if dirty {
                continue 'pivot;
            }

            // Divisibility: the pivot must divide every remaining entry.
            for r in k + 1..rows {
                for c in k + 1..cols {
                    if m.get(r, c) % p != 0 {
                        m.add_row_multiple(k, r, 1);
                        continue 'pivot;
                    }
                }
            }
            break;
        }
        diag.push(m.get(k, k).abs());
    }

    // Move zeros to the end (they can only arise once the trailing block is
    // zero, but normalize anyway) and count the rank.
    let rank = diag.iter().filter(|&&d| d != 0).count();
    diag.sort_by_key(|&d| d == 0);
    SmithForm { diag, rank }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// gcd of all k-by-k minors, by brute-force enumeration. Independent
    /// oracle: the i-th invariant factor equals d_i / d_{i-1}.
    fn determinant(m: &IntMatrix, rows: &[usize], cols: &[usize]) -> i128 {
        let n = rows.len();
        if n == 0 {
            return 1;
        }
        let mut a = vec![vec![0i128; n]; n];
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                a[i][j] = m.get(r, c) as i128;
            }
        }
        // fraction-free Gaussian elimination (Bareiss)
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..n {
            if a[k][k] == 0 {
                let Some(swap) = (k + 1..n).find(|&r| a[r][k] != 0) else {
                    return 0;
                };
                a.swap(k, swap);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
                }
                a[i][k] = 0;
            }
            prev = a[k][k];
        }
        sign * a[n - 1][n - 1]
    }

    fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![vec![]];
        }
        if k > n {
            return vec![];
        }
        let mut out = Vec::new();
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            out.push(idx.clone());
            let mut i = k;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                if idx[i] != i + n - k {
                    break;
                }
            }
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }

    fn minor_gcd(m: &IntMatrix, k: usize) -> i128 {
        let mut g: i128 = 0;
        for rows in subsets(m.rows(), k) {
            for cols in subsets(m.cols(), k) {
                let d = determinant(m, &rows, &cols).abs();
                g = gcd(g, d);
            }
        }
        g
    }

    fn gcd(a: i128, b: i128) -> i128 {
        if b == 0 {
            a.abs()
        } else {
            gcd(b, a % b)
        }
    }

    fn check_against_minor_oracle(m: &IntMatrix) {
        let snf = smith_normal_form(m);
        let mut prev = 1i128;
        for (i, &d) in snf.diag.iter().enumerate() {
            let dk = minor_gcd(m, i + 1);
            if dk == 0 {
                assert_eq!(d, 0, "factor {i} of {m:?}");
            } else {
                assert_eq!(d as i128, dk / prev, "factor {i} of {m:?}");
                prev = dk;
            }
        }
        assert_eq!(snf.rank, snf.diag.iter().filter(|&&d| d != 0).count());
    }

    #[test]
    fn diagonal_gcd_lcm() {
        let m = IntMatrix::from_rows(vec![vec![2, 0], vec![0, 3]]).unwrap();
        let snf = smith_normal_form(&m);
        assert_eq!(snf.diag, vec![1, 6]);
        assert_eq!(snf.rank, 2);
    }

    #[test]
    fn unit_columns() {
        // columns (1,0,0) and (1,1,0): the abelianized minimal split
        let m = IntMatrix::from_rows(vec![vec![1, 1], vec![0, 1], vec![0, 0]]).unwrap();
        let snf = smith_normal_form(&m);
        assert_eq!(snf.diag, vec![1, 1]);
        assert!(snf.all_invariant_factors_one());
        assert_eq!(m.rows() - snf.rank, 1);
    }

    #[test]
    fn zero_and_empty() {
        let m = IntMatrix::zero(3, 2);
        let snf = smith_normal_form(&m);
        assert_eq!(snf.diag, vec![0, 0]);
        assert_eq!(snf.rank, 0);

        let empty = IntMatrix::zero(0, 0);
        assert_eq!(smith_normal_form(&empty).diag, Vec::<i64>::new());
    }

    #[test]
    fn matches_minor_gcd_oracle_on_small_matrices() {
        let cases = vec![
            vec![vec![4, 6], vec![6, 9]],
            vec![vec![2, 4, 4], vec![-6, 6, 12], vec![10, 4, 16]],
            vec![vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 9]],
            vec![vec![0, 0], vec![0, 5]],
            vec![vec![3, 1, -2], vec![1, -1, 4]],
            vec![vec![6], vec![10], vec![15]],
        ];
        for rows in cases {
            check_against_minor_oracle(&IntMatrix::from_rows(rows).unwrap());
        }
    }

    #[test]
    fn matches_minor_gcd_oracle_on_seeded_random() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..60 {
            let r = rng.gen_range(1..=4);
            let c = rng.gen_range(1..=4);
            let rows: Vec<Vec<i64>> = (0..r)
                .map(|_| (0..c).map(|_| rng.gen_range(-6..=6)).collect())
                .collect();
            check_against_minor_oracle(&IntMatrix::from_rows(rows).unwrap());
        }
    }
}
