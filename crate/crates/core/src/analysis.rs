//! Commutant computation, irreducibility verdicts and the genus-1 modular
//! invariant search.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

use crate::matrix::Mat;
use crate::mcg;
use crate::scalars::{Ctx, CycloField, CycloScalar};
use crate::Result;
use crate::SkeinError;

/// Result of an exact commutant computation.
#[derive(Debug, Clone)]
pub struct CommutantReport {
    pub generator_count: usize,
    pub space_dimension: usize,
    pub commutant_dimension: usize,
    pub basis: Vec<Mat>,
    pub irreducible: bool,
}

/// Exact commutant of a list of square matrices: the nullspace of
/// `X -> ([X, M_1], ..., [X, M_k])` over the scalar field. The nullspace
/// dimension is invariant under field extension, so it equals the complex
/// commutant dimension and `d = 1` certifies irreducibility over the
/// complex numbers.
///
/// Diagonal generators are processed first: they restrict the support of X
/// to positions with equal eigenvalues, which keeps the elimination small.
pub fn commutant(fld: &CycloField, mats: &[Mat]) -> Result<CommutantReport> {
    let n = match mats.first() {
        Some(m) => m.rows(),
        None => {
            return Err(SkeinError::DimensionMismatch(
                "commutant of an empty generator list".into(),
            ))
        }
    };
    for m in mats {
        if !m.is_square() || m.rows() != n {
            return Err(SkeinError::DimensionMismatch(format!(
                "expected {n} x {n}, got {} x {}",
                m.rows(),
                m.cols()
            )));
        }
    }
    // projective normalization: commutators are insensitive to scalars and
    // normalized entries keep the elimination in the base field
    let mats: Vec<Mat> = mats
        .iter()
        .map(|m| m.projective_normalize(fld))
        .collect::<Result<_>>()?;
    // support restriction from diagonal generators
    let mut support: Vec<(usize, usize)> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let allowed = mats.iter().all(|m| {
                if !m.is_diagonal() {
                    return true;
                }
                m.at(i, i) == m.at(j, j)
            });
            if allowed {
                support.push((i, j));
            }
        }
    }
    let var_of: std::collections::HashMap<(usize, usize), usize> = support
        .iter()
        .copied()
        .enumerate()
        .map(|(v, ij)| (ij, v))
        .collect();
    let nvars = support.len();
    // constraint rows from non-diagonal generators:
    // [X, M]_{ij} = sum_k X_{ik} M_{kj} - M_{ik} X_{kj}
    let mut rows: Vec<Vec<CycloScalar>> = Vec::new();
    for m in mats.iter().filter(|m| !m.is_diagonal()) {
        for i in 0..n {
            for j in 0..n {
                let mut row = vec![fld.zero(); nvars];
                let mut nonzero = false;
                for k in 0..n {
                    if let Some(&v) = var_of.get(&(i, k)) {
                        let c = m.at(k, j);
                        if !c.is_zero() {
                            row[v] = fld.add(&row[v], c);
                            nonzero = true;
                        }
                    }
                    if let Some(&v) = var_of.get(&(k, j)) {
                        let c = m.at(i, k);
                        if !c.is_zero() {
                            row[v] = fld.sub(&row[v], c);
                            nonzero = true;
                        }
                    }
                }
                if nonzero {
                    rows.push(row);
                }
            }
        }
    }
    let basis_vecs = if rows.is_empty() {
        // commutant = everything on the support
        (0..nvars)
            .map(|v| {
                let mut x = vec![fld.zero(); nvars];
                x[v] = fld.one();
                x
            })
            .collect::<Vec<_>>()
    } else {
        let sys = Mat::from_fn(fld, rows.len(), nvars, |i, j| rows[i][j].clone());
        sys.nullspace(fld)?
    };
    let mut basis = Vec::new();
    for v in &basis_vecs {
        let mut x = Mat::zero(fld, n, n);
        for (t, &(i, j)) in support.iter().enumerate() {
            *x.at_mut(i, j) = v[t].clone();
        }
        // exactness check: the returned basis really commutes
        for m in &mats {
            debug_assert!(x.commutator(fld, m).is_zero());
        }
        basis.push(x);
    }
    let d = basis.len();
    Ok(CommutantReport {
        generator_count: mats.len(),
        space_dimension: n,
        commutant_dimension: d,
        basis,
        irreducible: d == 1,
    })
}

/// Commutant of the standard mapping class group generators on `RH_g`.
pub fn irreducibility_verdict(ctx: &Ctx, genus: usize) -> Result<CommutantReport> {
    let gens = mcg::generator_matrices(ctx, genus)?;
    commutant(&ctx.field, &gens)
}

/// A genus-1 modular invariant: a non-negative integer matrix with
/// `Z_00 = 1` commuting exactly with S and T.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModularInvariant {
    pub z: Vec<Vec<i64>>,
}

impl ModularInvariant {
    pub fn is_diagonal(&self) -> bool {
        self.z
            .iter()
            .enumerate()
            .all(|(i, row)| row.iter().enumerate().all(|(j, &x)| i == j || x == 0))
    }
}

fn rational_parts(x: &CycloScalar, degree: usize) -> Vec<BigRational> {
    // coordinates of base and eta parts in the power basis
    let mut out = Vec::with_capacity(2 * degree);
    for i in 0..degree {
        out.push(
            x.base_coeffs()
                .get(i)
                .cloned()
                .unwrap_or_else(BigRational::zero),
        );
    }
    for i in 0..degree {
        out.push(
            x.eta_coeffs()
                .get(i)
                .cloned()
                .unwrap_or_else(BigRational::zero),
        );
    }
    out
}

/// All modular invariants with entries in `[0, bound]`: the search runs
/// inside the rational solution space of `[Z, T] = 0, [Z, H] = 0` (real
/// integer unknowns against cyclotomic coefficients, split into rational
/// coordinate equations), then filters by integrality, the entry bound and
/// `Z_00 = 1`.
pub fn modular_invariants(ctx: &Ctx, bound: i64) -> Result<Vec<ModularInvariant>> {
    let fld = &ctx.field;
    let n = (ctx.r() - 1) as usize;
    let t = mcg::t_matrix(ctx);
    // commutation with S is equivalent to commutation with the Hopf matrix
    let mut h = Mat::zero(fld, n, n);
    for a in 0..n {
        for b in 0..n {
            *h.at_mut(a, b) = crate::recoupling::hopf_value(ctx, a as u8, b as u8)?;
        }
    }
    // support from the diagonal T: Z_ij free only when xi_i = xi_j
    let mut support: Vec<(usize, usize)> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if t.at(i, i) == t.at(j, j) {
                support.push((i, j));
            }
        }
    }
    let var_of: std::collections::HashMap<(usize, usize), usize> = support
        .iter()
        .copied()
        .enumerate()
        .map(|(v, ij)| (ij, v))
        .collect();
    let nvars = support.len();
    let degree = fld.degree();
    // rational rows: [Z, H]_{ij} = 0 split into 2*degree coordinates
    let mut rows: Vec<Vec<BigRational>> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let mut coeffs: Vec<CycloScalar> = vec![fld.zero(); nvars];
            let mut nonzero = false;
            for k in 0..n {
                if let Some(&v) = var_of.get(&(i, k)) {
                    let c = h.at(k, j);
                    if !c.is_zero() {
                        coeffs[v] = fld.add(&coeffs[v], c);
                        nonzero = true;
                    }
                }
                if let Some(&v) = var_of.get(&(k, j)) {
                    let c = h.at(i, k);
                    if !c.is_zero() {
                        coeffs[v] = fld.sub(&coeffs[v], c);
                        nonzero = true;
                    }
                }
            }
            if !nonzero {
                continue;
            }
            for coord in 0..2 * degree {
                let row: Vec<BigRational> = coeffs
                    .iter()
                    .map(|c| rational_parts(c, degree)[coord].clone())
                    .collect();
                if row.iter().any(|x| !x.is_zero()) {
                    rows.push(row);
                }
            }
        }
    }
    // rational nullspace by fraction-free echelon
    let basis = rational_nullspace(&rows, nvars);
    // echelon-reduce so every basis vector owns a pivot variable with
    // entry 1 and zeros in the other pivots: integer solutions then have
    // integer combination coefficients read off at the pivots
    let (echelon, pivots) = echelonize(basis);
    let d = echelon.len();
    let mut out = Vec::new();
    let mut combo = vec![0i64; d];
    enumerate_combos(&mut combo, 0, bound, &mut |c| {
        let mut z_vals = vec![BigRational::zero(); nvars];
        for (bi, v) in echelon.iter().enumerate() {
            if c[bi] == 0 {
                continue;
            }
            let w = BigRational::from_integer(BigInt::from(c[bi]));
            for (t, x) in v.iter().enumerate() {
                if !x.is_zero() {
                    z_vals[t] += x * &w;
                }
            }
        }
        // integrality and bounds
        let mut z = vec![vec![0i64; n]; n];
        for (t, val) in z_vals.iter().enumerate() {
            if !val.denom().is_one() {
                return;
            }
            let Some(v) = val.numer().to_i64() else { return };
            if v < 0 || v > bound {
                return;
            }
            let (i, j) = support[t];
            z[i][j] = v;
        }
        if z[0][0] != 1 {
            return;
        }
        out.push(ModularInvariant { z });
    });
    let _ = pivots;
    // deterministic order
    out.sort_by(|a, b| a.z.cmp(&b.z));
    out.dedup();
    // re-substitute: every returned invariant commutes exactly with S and T
    let retained: Vec<ModularInvariant> = out
        .into_iter()
        .filter(|inv| {
            let zm = Mat::from_fn(fld, n, n, |i, j| fld.int(inv.z[i][j]));
            zm.commutator(fld, &t).is_zero() && zm.commutator(fld, &h).is_zero()
        })
        .collect();
    Ok(retained)
}

fn rational_nullspace(rows: &[Vec<BigRational>], nvars: usize) -> Vec<Vec<BigRational>> {
    let mut m: Vec<Vec<BigRational>> = rows.to_vec();
    let nrows = m.len();
    let mut pivot_col_of_row: Vec<usize> = Vec::new();
    let mut rank = 0usize;
    for col in 0..nvars {
        let mut pivot = None;
        for row in rank..nrows {
            if !m[row][col].is_zero() {
                pivot = Some(row);
                break;
            }
        }
        let Some(p) = pivot else { continue };
        m.swap(rank, p);
        let pinv = m[rank][col].recip();
        for x in m[rank].iter_mut() {
            *x = &*x * &pinv;
        }
        for row in 0..nrows {
            if row != rank && !m[row][col].is_zero() {
                let factor = m[row][col].clone();
                for j in 0..nvars {
                    let t = &m[rank][j] * &factor;
                    m[row][j] -= t;
                }
            }
        }
        pivot_col_of_row.push(col);
        rank += 1;
        if rank == nrows {
            break;
        }
    }
    let pivot_cols: std::collections::HashSet<usize> = pivot_col_of_row.iter().copied().collect();
    let mut basis = Vec::new();
    for free in 0..nvars {
        if pivot_cols.contains(&free) {
            continue;
        }
        let mut v = vec![BigRational::zero(); nvars];
        v[free] = BigRational::one();
        for (row, &pc) in pivot_col_of_row.iter().enumerate() {
            v[pc] = -m[row][free].clone();
        }
        basis.push(v);
    }
    basis
}

/// Reduced echelon form of a basis: every vector has entry 1 at its pivot
/// and zeros at the other pivots.
fn echelonize(mut basis: Vec<Vec<BigRational>>) -> (Vec<Vec<BigRational>>, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut row = 0usize;
    if basis.is_empty() {
        return (basis, pivots);
    }
    let nvars = basis[0].len();
    for col in 0..nvars {
        let mut pivot = None;
        for ri in row..basis.len() {
            if !basis[ri][col].is_zero() {
                pivot = Some(ri);
                break;
            }
        }
        let Some(p) = pivot else { continue };
        basis.swap(row, p);
        let pinv = basis[row][col].recip();
        for x in basis[row].iter_mut() {
            *x = &*x * &pinv;
        }
        for ri in 0..basis.len() {
            if ri != row && !basis[ri][col].is_zero() {
                let factor = basis[ri][col].clone();
                for j in 0..nvars {
                    let t = &basis[row][j] * &factor;
                    basis[ri][j] -= t;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == basis.len() {
            break;
        }
    }
    (basis, pivots)
}

fn enumerate_combos(combo: &mut Vec<i64>, idx: usize, bound: i64, f: &mut impl FnMut(&[i64])) {
    if idx == combo.len() {
        f(combo);
        return;
    }
    for v in 0..=bound {
        combo[idx] = v;
        enumerate_combos(combo, idx + 1, bound, f);
    }
    combo[idx] = 0;
}

/// The reducible 2x2 example: an operator with distinct eigenvalues whose
/// orbit of a non-eigenvector spans, yet whose commutant has dimension 2.
#[derive(Debug, Clone)]
pub struct CounterexampleReport {
    pub orbit_rank: usize,
    pub commutant_dimension: usize,
    pub irreducible: bool,
}

pub fn counterexample_demo(ctx: &Ctx) -> Result<CounterexampleReport> {
    let f = &ctx.field;
    let m = Mat::from_fn(f, 2, 2, |i, j| {
        if i == j {
            f.int(1 + i as i64)
        } else {
            f.zero()
        }
    });
    // orbit of the non-eigenvector (1, 1) under the group generated by m
    let v = vec![f.one(), f.one()];
    let mut space = crate::matrix::RowSpace::new(f, 2);
    space.insert(&v)?;
    let w = m.mul_vec(f, &v);
    space.insert(&w)?;
    let rep = commutant(f, std::slice::from_ref(&m))?;
    Ok(CounterexampleReport {
        orbit_rank: space.rank(),
        commutant_dimension: rep.commutant_dimension,
        irreducible: rep.irreducible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recoupling;
    use crate::scalars::Ctx;

    fn ctx(r: u32) -> Ctx {
        Ctx::new(r).unwrap()
    }

    #[test]
    fn commutant_of_identity_is_everything() {
        let c = ctx(5);
        let id = Mat::identity(&c.field, 3);
        let rep = commutant(&c.field, &[id]).unwrap();
        assert_eq!(rep.commutant_dimension, 9);
        assert!(!rep.irreducible);
    }

    #[test]
    fn commutant_of_distinct_diagonal() {
        let c = ctx(5);
        let f = &c.field;
        let m = Mat::from_fn(f, 2, 2, |i, j| {
            if i == j {
                recoupling::xi(&c, i as u8)
            } else {
                f.zero()
            }
        });
        let rep = commutant(f, &[m]).unwrap();
        assert_eq!(rep.commutant_dimension, 2);
    }

    #[test]
    fn genus1_commutant_trivial_at_small_primes() {
        for r in [3u32, 5] {
            let c = ctx(r);
            let f = &c.field;
            let s = mcg::s_matrix(&c).unwrap();
            let t = mcg::t_matrix(&c);
            let rep = commutant(f, &[s, t]).unwrap();
            assert_eq!(rep.commutant_dimension, 1, "d = 1 at r={r}");
            assert!(rep.irreducible);
        }
    }

    #[test]
    fn commutant_basis_commutes_and_scalar_insensitive() {
        let c = ctx(5);
        let f = &c.field;
        let s = mcg::s_matrix(&c).unwrap();
        let t = mcg::t_matrix(&c);
        let rep = commutant(f, &[s.clone(), t.clone()]).unwrap();
        for x in &rep.basis {
            assert!(x.commutator(f, &s.projective_normalize(f).unwrap()).is_zero());
            assert!(x.commutator(f, &t).is_zero());
        }
        // scaling a generator changes nothing
        let s_scaled = s.scale(f, &f.pow_a(7));
        let rep2 = commutant(f, &[s_scaled, t]).unwrap();
        assert_eq!(rep2.commutant_dimension, rep.commutant_dimension);
    }

    #[test]
    fn commutant_dimension_stable_under_conjugation() {
        let c = ctx(5);
        let f = &c.field;
        let s = mcg::s_matrix(&c).unwrap();
        let t = mcg::t_matrix(&c);
        // a fixed invertible rational matrix
        let n = s.rows();
        let p = Mat::from_fn(f, n, n, |i, j| {
            if i == j {
                f.one()
            } else if j == (i + 1) % n {
                f.int(2)
            } else if i == 0 && j == n - 1 {
                f.int(3)
            } else {
                f.zero()
            }
        });
        assert!(!p.det(f).unwrap().is_zero());
        let pinv = p.inverse(f).unwrap();
        let sc = p.mul(f, &s).mul(f, &pinv);
        let tc = p.mul(f, &t).mul(f, &pinv);
        let rep = commutant(f, &[sc, tc]).unwrap();
        assert_eq!(rep.commutant_dimension, 1);
    }

    #[test]
    fn modular_invariants_prime_is_identity_only() {
        let c = ctx(5);
        let inv = modular_invariants(&c, 3).unwrap();
        assert_eq!(inv.len(), 1, "only the identity at r=5");
        let id = &inv[0];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(id.z[i][j], i64::from(i == j));
            }
        }
    }

    #[test]
    fn modular_invariants_r6_contains_nondiagonal() {
        let c = ctx(6);
        let inv = modular_invariants(&c, 3).unwrap();
        // identity present
        assert!(inv.iter().any(|z| {
            (0..5).all(|i| (0..5).all(|j| z.z[i][j] == i64::from(i == j)))
        }));
        // at least one non-diagonal invariant; the D-series invariant
        // |chi_0 + chi_4|^2 + 2 |chi_2|^2 is the expected witness
        let nondiag: Vec<_> = inv.iter().filter(|z| !z.is_diagonal()).collect();
        assert!(!nondiag.is_empty(), "non-diagonal invariant at r=6");
        let d_series = ModularInvariant {
            z: vec![
                vec![1, 0, 0, 0, 1],
                vec![0, 0, 0, 0, 0],
                vec![0, 0, 2, 0, 0],
                vec![0, 0, 0, 0, 0],
                vec![1, 0, 0, 0, 1],
            ],
        };
        assert!(inv.contains(&d_series), "D-series invariant found: {inv:?}");
    }

    #[test]
    fn counterexample_is_reducible_with_full_orbit() {
        let c = ctx(3);
        let rep = counterexample_demo(&c).unwrap();
        assert_eq!(rep.orbit_rank, 2);
        assert_eq!(rep.commutant_dimension, 2);
        assert!(!rep.irreducible);
    }
}
