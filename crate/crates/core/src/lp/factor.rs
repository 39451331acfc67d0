//! Basis factorisation for the revised simplex.
//!
//! Row singletons and column singletons of the basis matrix are peeled off
//! first; whatever remains (the nucleus) is factorised densely with partial
//! pivoting. Basis changes are appended as eta columns until the next
//! refactorisation.

/// Sparse column `(row, value)` pairs.
pub(crate) type SparseCol = Vec<(usize, f64)>;

const SINGULAR_TOL: f64 = 1e-11;

#[derive(Debug, Clone)]
struct Eta {
    pos: usize,
    pivot: f64,
    /// Off-pivot entries of the transformed entering column.
    entries: Vec<(usize, f64)>,
}

#[derive(Debug, Clone)]
pub(crate) struct Factor {
    m: usize,
    /// Columns of the basis at factorisation time, by position.
    cols: Vec<SparseCol>,
    /// Row-singleton pivots `(row, position, value)` in elimination order.
    lower: Vec<(usize, usize, f64)>,
    /// Column-singleton pivots in elimination order.
    upper: Vec<(usize, usize, f64)>,
    nuc_rows: Vec<usize>,
    nuc_cols: Vec<usize>,
    /// Dense LU of the nucleus (row-major, unit lower part implied).
    nuc_lu: Vec<f64>,
    nuc_perm: Vec<usize>,
    etas: Vec<Eta>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Singular;

impl Factor {
    pub(crate) fn new(m: usize, cols: Vec<SparseCol>) -> Result<Self, Singular> {
        debug_assert_eq!(cols.len(), m);
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); m];
        for (p, col) in cols.iter().enumerate() {
            for &(i, v) in col {
                if v != 0.0 {
                    rows[i].push(p);
                }
            }
        }
        let mut row_alive = vec![true; m];
        let mut col_alive = vec![true; m];
        let mut row_count: Vec<usize> = rows.iter().map(|r| r.len()).collect();

        let mut lower = Vec::new();
        let mut queue: Vec<usize> = (0..m).filter(|&i| row_count[i] == 1).collect();
        while let Some(r) = queue.pop() {
            if !row_alive[r] || row_count[r] != 1 {
                continue;
            }
            let p = *rows[r]
                .iter()
                .find(|&&p| col_alive[p])
                .expect("row count tracks live columns");
            let v = entry(&cols[p], r);
            if v.abs() < SINGULAR_TOL {
                return Err(Singular);
            }
            lower.push((r, p, v));
            row_alive[r] = false;
            col_alive[p] = false;
            for &(i, a) in &cols[p] {
                if a != 0.0 && row_alive[i] {
                    row_count[i] -= 1;
                    if row_count[i] == 1 {
                        queue.push(i);
                    }
                }
            }
        }
        if (0..m).any(|i| row_alive[i] && row_count[i] == 0) {
            return Err(Singular);
        }

        let mut col_count: Vec<usize> = cols
            .iter()
            .map(|c| c.iter().filter(|&&(i, v)| v != 0.0 && row_alive[i]).count())
            .collect();
        let mut upper = Vec::new();
        let mut queue: Vec<usize> = (0..m)
            .filter(|&p| col_alive[p] && col_count[p] == 1)
            .collect();
        while let Some(p) = queue.pop() {
            if !col_alive[p] || col_count[p] != 1 {
                continue;
            }
            let (r, v) = cols[p]
                .iter()
                .copied()
                .find(|&(i, v)| v != 0.0 && row_alive[i])
                .expect("column count tracks live rows");
            if v.abs() < SINGULAR_TOL {
                return Err(Singular);
            }
            upper.push((r, p, v));
            row_alive[r] = false;
            col_alive[p] = false;
            for &q in &rows[r] {
                if col_alive[q] {
                    col_count[q] -= 1;
                    if col_count[q] == 1 {
                        queue.push(q);
                    }
                }
            }
        }

        let nuc_rows: Vec<usize> = (0..m).filter(|&i| row_alive[i]).collect();
        let nuc_cols: Vec<usize> = (0..m).filter(|&p| col_alive[p]).collect();
        if nuc_rows.len() != nuc_cols.len() {
            return Err(Singular);
        }
        let k = nuc_rows.len();
        let mut local = vec![usize::MAX; m];
        for (a, &i) in nuc_rows.iter().enumerate() {
            local[i] = a;
        }
        let mut lu = vec![0.0; k * k];
        for (b, &p) in nuc_cols.iter().enumerate() {
            for &(i, v) in &cols[p] {
                if local[i] != usize::MAX {
                    lu[local[i] * k + b] = v;
                }
            }
        }
        let mut perm: Vec<usize> = (0..k).collect();
        for c in 0..k {
            let (piv_row, piv_abs) =
                (c..k)
                    .map(|r| (r, lu[r * k + c].abs()))
                    .fold(
                        (c, -1.0),
                        |best, cur| if cur.1 > best.1 { cur } else { best },
                    );
            if piv_abs < SINGULAR_TOL {
                return Err(Singular);
            }
            if piv_row != c {
                for t in 0..k {
                    lu.swap(c * k + t, piv_row * k + t);
                }
                perm.swap(c, piv_row);
            }
            let piv = lu[c * k + c];
            for r in c + 1..k {
                let f = lu[r * k + c] / piv;
                if f == 0.0 {
                    continue;
                }
                lu[r * k + c] = f;
                for t in c + 1..k {
                    lu[r * k + t] -= f * lu[c * k + t];
                }
            }
        }

        Ok(Self {
            m,
            cols,
            lower,
            upper,
            nuc_rows,
            nuc_cols,
            nuc_lu: lu,
            nuc_perm: perm,
            etas: Vec::new(),
        })
    }

    pub(crate) fn num_etas(&self) -> usize {
        self.etas.len()
    }

    /// Solves `B x = w` in place; `w` is indexed by row on entry and by
    /// basis position on exit.
    pub(crate) fn ftran(&self, w: &mut [f64]) {
        let m = self.m;
        let mut x = vec![0.0; m];
        for &(r, p, piv) in &self.lower {
            let v = w[r] / piv;
            x[p] = v;
            if v != 0.0 {
                for &(i, a) in &self.cols[p] {
                    w[i] -= a * v;
                }
            }
        }
        let k = self.nuc_rows.len();
        if k > 0 {
            let mut z: Vec<f64> = self.nuc_perm.iter().map(|&a| w[self.nuc_rows[a]]).collect();
            let lu = &self.nuc_lu;
            for r in 0..k {
                let mut s = z[r];
                for t in 0..r {
                    s -= lu[r * k + t] * z[t];
                }
                z[r] = s;
            }
            for r in (0..k).rev() {
                let mut s = z[r];
                for t in r + 1..k {
                    s -= lu[r * k + t] * z[t];
                }
                z[r] = s / lu[r * k + r];
            }
            for (b, &p) in self.nuc_cols.iter().enumerate() {
                let v = z[b];
                x[p] = v;
                if v != 0.0 {
                    for &(i, a) in &self.cols[p] {
                        w[i] -= a * v;
                    }
                }
            }
        }
        for &(r, p, piv) in self.upper.iter().rev() {
            let v = w[r] / piv;
            x[p] = v;
            if v != 0.0 {
                for &(i, a) in &self.cols[p] {
                    w[i] -= a * v;
                }
            }
        }
        for eta in &self.etas {
            let v = x[eta.pos] / eta.pivot;
            x[eta.pos] = v;
            if v != 0.0 {
                for &(i, a) in &eta.entries {
                    x[i] -= a * v;
                }
            }
        }
        w.copy_from_slice(&x);
    }

    /// Solves `yᵀ B = vᵀ` in place; `v` is indexed by basis position on
    /// entry and by row on exit.
    pub(crate) fn btran(&self, v: &mut [f64]) {
        let m = self.m;
        for eta in self.etas.iter().rev() {
            let mut s = v[eta.pos];
            for &(i, a) in &eta.entries {
                s -= a * v[i];
            }
            v[eta.pos] = s / eta.pivot;
        }
        let mut y = vec![0.0; m];
        let dot =
            |p: usize, y: &[f64]| -> f64 { self.cols[p].iter().map(|&(i, a)| a * y[i]).sum() };
        for &(r, p, piv) in &self.upper {
            y[r] = (v[p] - dot(p, &y)) / piv;
        }
        let k = self.nuc_rows.len();
        if k > 0 {
            let lu = &self.nuc_lu;
            let mut z: Vec<f64> = self.nuc_cols.iter().map(|&p| v[p] - dot(p, &y)).collect();
            // (P N)ᵀ = Uᵀ Lᵀ: solve Uᵀ t = z, then Lᵀ s = t
            for c in 0..k {
                let mut s = z[c];
                for t in 0..c {
                    s -= lu[t * k + c] * z[t];
                }
                z[c] = s / lu[c * k + c];
            }
            for c in (0..k).rev() {
                let mut s = z[c];
                for t in c + 1..k {
                    s -= lu[t * k + c] * z[t];
                }
                z[c] = s;
            }
            for (a, &orig) in self.nuc_perm.iter().enumerate() {
                y[self.nuc_rows[orig]] = z[a];
            }
        }
        for &(r, p, piv) in self.lower.iter().rev() {
            y[r] = (v[p] - dot(p, &y)) / piv;
        }
        v.copy_from_slice(&y);
    }

    /// Records that the column at `pos` was replaced by a column whose
    /// transformed form (`B⁻¹ a`, by position) is `alpha`.
    pub(crate) fn update(&mut self, pos: usize, alpha: &[f64]) {
        let entries = alpha
            .iter()
            .enumerate()
            .filter(|&(i, &a)| i != pos && a != 0.0)
            .map(|(i, &a)| (i, a))
            .collect();
        self.etas.push(Eta {
            pos,
            pivot: alpha[pos],
            entries,
        });
    }
}

fn entry(col: &SparseCol, row: usize) -> f64 {
    col.iter()
        .find(|&&(i, _)| i == row)
        .map(|&(_, v)| v)
        .unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dense_cols(a: &[Vec<f64>]) -> Vec<SparseCol> {
        let m = a.len();
        (0..m)
            .map(|c| {
                (0..m)
                    .filter(|&r| a[r][c] != 0.0)
                    .map(|r| (r, a[r][c]))
                    .collect()
            })
            .collect()
    }

    fn mat_vec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
        a.iter()
            .map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum())
            .collect()
    }

    fn random_sparse(rng: &mut ChaCha8Rng, m: usize, density: f64) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; m]; m];
        for (i, row) in a.iter_mut().enumerate() {
            row[i] = rng.random_range(1.0..3.0);
            for v in row.iter_mut() {
                if rng.random_bool(density) {
                    *v = rng.random_range(-2.0..2.0);
                }
            }
        }
        a
    }

    #[test]
    fn solves_match_matrix_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &(m, density) in &[(1, 0.0), (5, 0.2), (12, 0.1), (30, 0.05), (20, 0.5)] {
            let a = random_sparse(&mut rng, m, density);
            let f = Factor::new(m, dense_cols(&a)).expect("diagonally weighted");
            let x: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut w = mat_vec(&a, &x);
            f.ftran(&mut w);
            for (u, v) in w.iter().zip(&x) {
                assert!((u - v).abs() < 1e-9);
            }
            let y: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut v: Vec<f64> = (0..m)
                .map(|c| (0..m).map(|r| a[r][c] * y[r]).sum())
                .collect();
            f.btran(&mut v);
            for (u, w) in v.iter().zip(&y) {
                assert!((u - w).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn eta_updates_track_column_replacement() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = 8;
        let mut a = random_sparse(&mut rng, m, 0.3);
        let mut f = Factor::new(m, dense_cols(&a)).unwrap();
        for step in 0..5 {
            let pos = (step * 3) % m;
            let newcol: Vec<f64> = (0..m)
                .map(|r| {
                    if r == pos {
                        4.0
                    } else {
                        rng.random_range(-0.5..0.5)
                    }
                })
                .collect();
            let mut alpha = newcol.clone();
            f.ftran(&mut alpha);
            f.update(pos, &alpha);
            for (r, row) in a.iter_mut().enumerate() {
                row[pos] = newcol[r];
            }
            let x: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut w = mat_vec(&a, &x);
            f.ftran(&mut w);
            for (u, v) in w.iter().zip(&x) {
                assert!((u - v).abs() < 1e-8);
            }
            let y: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut v: Vec<f64> = (0..m)
                .map(|c| (0..m).map(|r| a[r][c] * y[r]).sum())
                .collect();
            f.btran(&mut v);
            for (u, w) in v.iter().zip(&y) {
                assert!((u - w).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn permuted_identity_is_all_singletons() {
        let m = 4;
        let cols = vec![
            vec![(2, 1.0)],
            vec![(0, -2.0)],
            vec![(3, 1.0)],
            vec![(1, 0.5)],
        ];
        let f = Factor::new(m, cols).unwrap();
        assert!(f.nuc_rows.is_empty());
        let mut w = vec![1.0, 2.0, 3.0, 4.0];
        f.ftran(&mut w);
        assert_eq!(w, vec![3.0, -0.5, 4.0, 4.0]);
    }

    #[test]
    fn singular_basis_is_rejected() {
        let cols = vec![vec![(0, 1.0), (1, 1.0)], vec![(0, 2.0), (1, 2.0)]];
        assert_eq!(Factor::new(2, cols).err(), Some(Singular));
        let cols = vec![vec![(0, 1.0)], vec![(0, 1.0)]];
        assert!(Factor::new(2, cols).is_err());
    }
}
