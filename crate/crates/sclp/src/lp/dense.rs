//! Dense linear algebra for the simplex kernel: LU factorization with
//! partial pivoting plus a product-form eta file for basis updates.
//!
//! Interval LPs in this crate have at most a few hundred rows, so a dense
//! factorization is both simpler and faster than sparse machinery. The eta
//! file keeps pivots O(m²) instead of O(m³); the solver refactors from
//! scratch every [`crate::tolerances::REFACTOR_EVERY`] pivots to bound
//! drift.

use crate::tolerances;

/// LU factors of a square basis matrix, `P·B = L·U`, stored packed
/// (U on and above the diagonal, unit-diagonal L strictly below).
#[derive(Debug, Clone)]
pub struct LuFactors {
    n: usize,
    /// Row-major packed L\U.
    lu: Vec<f64>,
    /// Row permutation: row `i` of `P·B` is row `perm[i]` of `B`.
    perm: Vec<usize>,
}

/// The basis matrix is numerically singular: no pivot above the tolerance
/// was available in the given elimination column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SingularBasis {
    /// Elimination step at which factorization failed.
    pub step: usize,
}

impl std::fmt::Display for SingularBasis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "basis matrix is singular at elimination step {}", self.step)
    }
}

impl std::error::Error for SingularBasis {}

impl LuFactors {
    /// Factor a basis given its dense columns (each of length `n`).
    pub fn factor(n: usize, columns: &[Vec<f64>]) -> Result<Self, SingularBasis> {
        assert_eq!(columns.len(), n, "basis must be square");
        let mut lu = vec![0.0; n * n];
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), n, "basis column has wrong length");
            for i in 0..n {
                lu[i * n + j] = col[i];
            }
        }
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            // Partial pivoting: largest magnitude in column k at or below row k.
            let mut best = k;
            let mut best_val = lu[k * n + k].abs();
            for r in (k + 1)..n {
                let v = lu[r * n + k].abs();
                if v > best_val {
                    best = r;
                    best_val = v;
                }
            }
            if best_val < tolerances::PIVOT {
                return Err(SingularBasis { step: k });
            }
            if best != k {
                perm.swap(k, best);
                for j in 0..n {
                    lu.swap(k * n + j, best * n + j);
                }
            }
            let pivot = lu[k * n + k];
            for r in (k + 1)..n {
                let factor = lu[r * n + k] / pivot;
                lu[r * n + k] = factor;
                if factor != 0.0 {
                    for j in (k + 1)..n {
                        lu[r * n + j] -= factor * lu[k * n + j];
                    }
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    /// Solve `B·x = v` in place (`v` becomes `x`).
    pub fn solve(&self, v: &mut [f64]) {
        let n = self.n;
        debug_assert_eq!(v.len(), n);
        // Apply the row permutation: w = P·v.
        let mut w = vec![0.0; n];
        for i in 0..n {
            w[i] = v[self.perm[i]];
        }
        // Forward substitution with unit-diagonal L.
        for i in 0..n {
            let mut s = w[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * w[j];
            }
            w[i] = s;
        }
        // Back substitution with U.
        for i in (0..n).rev() {
            let mut s = w[i];
            for j in (i + 1)..n {
                s -= self.lu[i * n + j] * w[j];
            }
            w[i] = s / self.lu[i * n + i];
        }
        v.copy_from_slice(&w);
    }

    /// Solve `Bᵀ·y = c` in place (`c` becomes `y`).
    pub fn solve_transpose(&self, c: &mut [f64]) {
        let n = self.n;
        debug_assert_eq!(c.len(), n);
        // Bᵀ = Uᵀ·Lᵀ·P, so solve Uᵀw = c, then Lᵀz = w, then y = Pᵀz.
        let mut w = c.to_vec();
        for i in 0..n {
            let mut s = w[i];
            for j in 0..i {
                s -= self.lu[j * n + i] * w[j];
            }
            w[i] = s / self.lu[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = w[i];
            for j in (i + 1)..n {
                s -= self.lu[j * n + i] * w[j];
            }
            w[i] = s;
        }
        for (i, &p) in self.perm.iter().enumerate() {
            c[p] = w[i];
        }
    }
}

/// One product-form update: the basis column at position `row` was replaced,
/// and `col` holds the FTRAN image of the entering column at pivot time.
#[derive(Debug, Clone)]
struct Eta {
    row: usize,
    col: Vec<f64>,
}

/// LU factors plus a chronological eta file, representing the inverse of a
/// basis that has undergone `num_updates` column replacements since its last
/// factorization.
#[derive(Debug, Clone)]
pub struct BasisFactors {
    lu: LuFactors,
    etas: Vec<Eta>,
}

impl BasisFactors {
    /// Factor a fresh basis with an empty eta file.
    pub fn factor(n: usize, columns: &[Vec<f64>]) -> Result<Self, SingularBasis> {
        Ok(Self { lu: LuFactors::factor(n, columns)?, etas: Vec::new() })
    }

    /// Number of eta updates since the last full factorization.
    pub fn num_updates(&self) -> usize {
        self.etas.len()
    }

    /// Solve `B·x = v` in place through the base factors and the eta file.
    pub fn ftran(&self, v: &mut [f64]) {
        self.lu.solve(v);
        for eta in &self.etas {
            let t = v[eta.row] / eta.col[eta.row];
            for (j, &d) in eta.col.iter().enumerate() {
                if j == eta.row {
                    v[j] = t;
                } else if d != 0.0 {
                    v[j] -= d * t;
                }
            }
        }
    }

    /// Solve `Bᵀ·y = c` in place (eta transposes in reverse, then the base).
    pub fn btran(&self, c: &mut [f64]) {
        for eta in self.etas.iter().rev() {
            let r = eta.row;
            let mut dot = 0.0;
            for (j, &d) in eta.col.iter().enumerate() {
                if j != r {
                    dot += d * c[j];
                }
            }
            c[r] = (c[r] - dot) / eta.col[r];
        }
        self.lu.solve_transpose(c);
    }

    /// Record a basis update: position `row` of the basis now holds a column
    /// whose current FTRAN image is `col` (i.e. `col = B_old⁻¹·a_entering`).
    ///
    /// Fails if the pivot element `col[row]` is numerically zero.
    pub fn push_update(&mut self, row: usize, col: Vec<f64>) -> Result<(), SingularBasis> {
        if col[row].abs() < tolerances::PIVOT {
            return Err(SingularBasis { step: row });
        }
        self.etas.push(Eta { row, col });
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn columns_of(rows: &[&[f64]]) -> Vec<Vec<f64>> {
        let n = rows.len();
        (0..n).map(|j| rows.iter().map(|r| r[j]).collect()).collect()
    }

    #[test]
    fn lu_solves_a_fixed_system() {
        // 3x3 system with known solution x = (1, -2, 3):
        // rows chosen to force at least one row swap.
        let rows: &[&[f64]] = &[&[0.0, 2.0, 1.0], &[4.0, 1.0, -1.0], &[2.0, -3.0, 2.0]];
        let b = [
            0.0 * 1.0 + 2.0 * -2.0 + 1.0 * 3.0,
            4.0 * 1.0 + 1.0 * -2.0 + -1.0 * 3.0,
            2.0 * 1.0 + -3.0 * -2.0 + 2.0 * 3.0,
        ];
        let lu = LuFactors::factor(3, &columns_of(rows)).unwrap();
        let mut x = b;
        lu.solve(&mut x);
        for (got, want) in x.iter().zip([1.0, -2.0, 3.0]) {
            assert!((got - want).abs() < 1e-12, "solve mismatch: {x:?}");
        }
    }

    #[test]
    fn lu_transpose_solve_matches_direct_factorization_of_transpose() {
        let rows: &[&[f64]] = &[&[3.0, 1.0, 0.0], &[-1.0, 2.0, 4.0], &[0.5, 0.0, 1.0]];
        let c = [1.0, 2.0, -1.0];
        let lu = LuFactors::factor(3, &columns_of(rows)).unwrap();
        let mut y = c;
        lu.solve_transpose(&mut y);
        // Check Bᵀy = c directly.
        for i in 0..3 {
            let mut s = 0.0;
            for j in 0..3 {
                s += rows[j][i] * y[j];
            }
            assert!((s - c[i]).abs() < 1e-12, "Bᵀy residual at row {i}");
        }
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let rows: &[&[f64]] = &[&[1.0, 2.0], &[2.0, 4.0]];
        assert!(LuFactors::factor(2, &columns_of(rows)).is_err());
    }

    #[test]
    fn eta_updates_track_explicit_refactorization() {
        // Start from B0, replace column 1 with a new column, and compare
        // ftran/btran through the eta file against a fresh factorization.
        let b0: &[&[f64]] = &[&[2.0, 0.0, 1.0], &[1.0, 3.0, 0.0], &[0.0, 1.0, 4.0]];
        let new_col = [1.0, -1.0, 2.0];
        let mut cols = columns_of(b0);

        let mut factors = BasisFactors::factor(3, &cols).unwrap();
        let mut img = new_col;
        factors.ftran(&mut img);
        factors.push_update(1, img.to_vec()).unwrap();

        cols[1] = new_col.to_vec();
        let fresh = BasisFactors::factor(3, &cols).unwrap();

        let v = [1.0, 2.0, 3.0];
        let mut via_eta = v;
        factors.ftran(&mut via_eta);
        let mut via_fresh = v;
        fresh.ftran(&mut via_fresh);
        for (a, b) in via_eta.iter().zip(&via_fresh) {
            assert!((a - b).abs() < 1e-12, "ftran mismatch {via_eta:?} vs {via_fresh:?}");
        }

        let mut bt_eta = v;
        factors.btran(&mut bt_eta);
        let mut bt_fresh = v;
        fresh.btran(&mut bt_fresh);
        for (a, b) in bt_eta.iter().zip(&bt_fresh) {
            assert!((a - b).abs() < 1e-12, "btran mismatch {bt_eta:?} vs {bt_fresh:?}");
        }
        assert_eq!(factors.num_updates(), 1);
    }
}
