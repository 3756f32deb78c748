//! Exact elimination over the rationals.
//!
//! Rows are scaled to big integers and reduced by fraction-free (Bareiss)
//! elimination, whose intermediate entries are minors of the scaled matrix
//! and whose divisions are exact. Pivots are chosen by a Markowitz-style
//! fill-in score, which keeps the structured wedge-operator matrices sparse
//! and their entries small. Kernels and solutions are recovered from the
//! integer echelon by rational back-substitution.

use num::{BigInt, BigRational, One, Zero};

/// Echelon data of an exact elimination: `transform * scaled_input` equals
/// the staircase rows for the first `rank` transform rows and zero for the
/// rest, where `scaled_input` is the input with each row multiplied by its
/// denominator lcm (absorbed into `transform`, so `transform * input` holds
/// over the rationals as stated).
pub struct ExactElimination {
    rows: usize,
    cols: usize,
    rank: usize,
    /// Pivot columns in elimination order.
    pivot_cols: Vec<usize>,
    /// `rank` staircase rows, full width; row `i` has its first nonzero in
    /// `pivot_cols[i]` and zeros in all earlier pivot columns.
    echelon: Vec<Vec<BigInt>>,
    /// Row-operation history applied to the (row-scaled) input: first `rank`
    /// rows produce the echelon rows, the remaining produce zero rows. Only
    /// kept when the elimination was built for solving.
    transform: Option<Vec<Vec<BigRational>>>,
}

fn lcm_of_denominators(row: &[BigRational]) -> BigInt {
    let mut lcm = BigInt::one();
    for entry in row {
        let den = entry.denom();
        let g = num::integer::gcd(lcm.clone(), den.clone());
        lcm = lcm / g * den;
    }
    lcm
}

impl ExactElimination {
    /// Eliminates a row-major rational matrix for rank and kernel queries.
    /// `cols` must be supplied explicitly so empty matrices keep their
    /// shape.
    pub fn new(input: &[Vec<BigRational>], cols: usize) -> Self {
        Self::build(input, cols, false)
    }

    /// Like [`ExactElimination::new`], but also records the row-operation
    /// history needed by [`ExactElimination::solve`]. Roughly doubles the
    /// elimination work.
    pub fn with_solver(input: &[Vec<BigRational>], cols: usize) -> Self {
        Self::build(input, cols, true)
    }

    fn build(input: &[Vec<BigRational>], cols: usize, want_transform: bool) -> Self {
        let rows = input.len();
        let mut work: Vec<Vec<BigInt>> = Vec::with_capacity(rows);
        let mut scales: Vec<BigRational> = Vec::with_capacity(rows);
        for row in input {
            debug_assert_eq!(row.len(), cols);
            let scale = lcm_of_denominators(row);
            let scaled: Vec<BigInt> = row
                .iter()
                .map(|x| {
                    let s = x * BigRational::from_integer(scale.clone());
                    debug_assert!(s.denom().is_one());
                    s.numer().clone()
                })
                .collect();
            scales.push(BigRational::from_integer(scale));
            work.push(scaled);
        }
        // Identity block carrying the row operations, pre-scaled so the
        // transform acts on the original rational rows.
        let mut trans: Vec<Vec<BigInt>> = if want_transform {
            (0..rows)
                .map(|i| {
                    let mut row = vec![BigInt::zero(); rows];
                    row[i] = BigInt::one();
                    row
                })
                .collect()
        } else {
            Vec::new()
        };

        let mut active: Vec<usize> = (0..rows).collect();
        let mut col_free = vec![true; cols];
        let mut pivot_cols = Vec::new();
        let mut pivot_rows = Vec::new();
        let mut prev = BigInt::one();

        loop {
            // Markowitz-style pivot search over the active block.
            let mut row_nnz = vec![0usize; rows];
            let mut col_nnz = vec![0usize; cols];
            for &r in &active {
                for (c, free) in col_free.iter().enumerate() {
                    if *free && !work[r][c].is_zero() {
                        row_nnz[r] += 1;
                        col_nnz[c] += 1;
                    }
                }
            }
            let mut best: Option<(usize, usize, usize, u64)> = None;
            for &r in &active {
                if row_nnz[r] == 0 {
                    continue;
                }
                for (c, free) in col_free.iter().enumerate() {
                    if !*free || work[r][c].is_zero() {
                        continue;
                    }
                    let score = (row_nnz[r] - 1) * (col_nnz[c] - 1);
                    let bits = work[r][c].magnitude().bits();
                    let better = match &best {
                        None => true,
                        Some((_, _, s, b)) => score < *s || (score == *s && bits < *b),
                    };
                    if better {
                        best = Some((r, c, score, bits));
                    }
                }
            }
            let Some((pr, pc, _, _)) = best else { break };

            active.retain(|&r| r != pr);
            col_free[pc] = false;
            let pivot = work[pr][pc].clone();
            let pivot_work = work[pr].clone();
            let pivot_trans = if want_transform {
                trans[pr].clone()
            } else {
                Vec::new()
            };
            for &r in &active {
                let factor = work[r][pc].clone();
                for c in 0..cols {
                    if c == pc {
                        continue;
                    }
                    if work[r][c].is_zero() && (factor.is_zero() || pivot_work[c].is_zero()) {
                        continue;
                    }
                    work[r][c] = (&pivot * &work[r][c] - &factor * &pivot_work[c]) / &prev;
                }
                if want_transform {
                    for c in 0..rows {
                        if trans[r][c].is_zero() && (factor.is_zero() || pivot_trans[c].is_zero())
                        {
                            continue;
                        }
                        trans[r][c] = (&pivot * &trans[r][c] - &factor * &pivot_trans[c]) / &prev;
                    }
                }
                work[r][pc] = BigInt::zero();
            }
            prev = pivot;
            pivot_cols.push(pc);
            pivot_rows.push(pr);
        }

        let rank = pivot_rows.len();
        let mut echelon = Vec::with_capacity(rank);
        for &r in &pivot_rows {
            echelon.push(std::mem::take(&mut work[r]));
        }
        let transform = want_transform.then(|| {
            let mut t = Vec::with_capacity(rows);
            for &r in &pivot_rows {
                t.push(Self::scaled_transform_row(&trans[r], &scales));
            }
            for &r in &active {
                debug_assert!(work[r].iter().all(Zero::is_zero));
                t.push(Self::scaled_transform_row(&trans[r], &scales));
            }
            t
        });
        Self {
            rows,
            cols,
            rank,
            pivot_cols,
            echelon,
            transform,
        }
    }

    fn scaled_transform_row(row: &[BigInt], scales: &[BigRational]) -> Vec<BigRational> {
        row.iter()
            .zip(scales)
            .map(|(t, s)| BigRational::from_integer(t.clone()) * s)
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn pivot_columns(&self) -> &[usize] {
        &self.pivot_cols
    }

    /// Basis of the right kernel, one vector per non-pivot column.
    pub fn kernel_basis(&self) -> Vec<Vec<BigRational>> {
        let pivot_set: Vec<bool> = {
            let mut set = vec![false; self.cols];
            for &c in &self.pivot_cols {
                set[c] = true;
            }
            set
        };
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_set[free] {
                continue;
            }
            let mut x = vec![BigRational::zero(); self.cols];
            x[free] = BigRational::one();
            self.back_substitute(&mut x, &vec![BigRational::zero(); self.rank]);
            basis.push(x);
        }
        basis
    }

    /// Solves `A x = b`; returns `None` when `b` is outside the image. Free
    /// variables are set to zero. Requires an elimination built by
    /// [`ExactElimination::with_solver`].
    pub fn solve(&self, b: &[BigRational]) -> Option<Vec<BigRational>> {
        assert_eq!(b.len(), self.rows, "right-hand side length");
        let transform = self
            .transform
            .as_ref()
            .expect("solve requires an elimination built with_solver");
        let mut reduced = Vec::with_capacity(self.rank);
        for (i, trow) in transform.iter().enumerate() {
            let mut acc = BigRational::zero();
            for (t, bv) in trow.iter().zip(b) {
                if !t.is_zero() && !bv.is_zero() {
                    acc += t * bv;
                }
            }
            if i < self.rank {
                reduced.push(acc);
            } else if !acc.is_zero() {
                return None;
            }
        }
        let mut x = vec![BigRational::zero(); self.cols];
        self.back_substitute(&mut x, &reduced);
        Some(x)
    }

    /// Solves the staircase system `echelon * x = rhs` for the pivot
    /// variables, taking the non-pivot entries of `x` as given.
    fn back_substitute(&self, x: &mut [BigRational], rhs: &[BigRational]) {
        for i in (0..self.rank).rev() {
            let pc = self.pivot_cols[i];
            let mut acc = rhs[i].clone();
            for (c, entry) in self.echelon[i].iter().enumerate() {
                if c == pc || entry.is_zero() || x[c].is_zero() {
                    continue;
                }
                acc -= BigRational::from_integer(entry.clone()) * &x[c];
            }
            x[pc] = acc / BigRational::from_integer(self.echelon[i][pc].clone());
        }
    }

    /// The nonzero rows of the echelon form as rational vectors: a basis of
    /// the row space.
    pub fn row_space_basis(&self) -> Vec<Vec<BigRational>> {
        self.echelon
            .iter()
            .map(|row| {
                row.iter()
                    .map(|x| BigRational::from_integer(x.clone()))
                    .collect()
            })
            .collect()
    }
}
