//! Exact integer and rational linear algebra on short vectors: rank, kernels,
//! lattice saturation, and primitive normal vectors of simplicial cones.

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("the zero vector has no primitive direction")]
    ZeroVector,
    #[error("tau is not a facet of sigma")]
    NotAFacet,
}

pub fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `(g, s, t)` with `s*a + t*b = g = gcd(a, b) >= 0`.
pub fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i128, 0i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

fn content(v: &[i128]) -> i128 {
    v.iter().fold(0, |g, &x| gcd(g, x))
}

fn reduce(v: &mut [i128]) {
    let g = content(v);
    if g > 1 {
        v.iter_mut().for_each(|x| *x /= g);
    }
}

fn widen(v: &[i64]) -> Vec<i128> {
    v.iter().map(|&x| x as i128).collect()
}

fn narrow(v: &[i128]) -> Vec<i64> {
    v.iter()
        .map(|&x| i64::try_from(x).expect("lattice entry overflows i64"))
        .collect()
}

/// `v` divided by the gcd of its entries.
pub fn primitive(v: &[i64]) -> Result<Vec<i64>, LatticeError> {
    let w = widen(v);
    let g = content(&w);
    if g == 0 {
        return Err(LatticeError::ZeroVector);
    }
    Ok(v.iter().map(|&x| x / g as i64).collect())
}

/// Integer row echelon form (fraction-free, rows kept primitive).
/// Returns the reduced rows and their pivot columns.
fn echelon(rows: &[Vec<i128>], dim: usize) -> (Vec<Vec<i128>>, Vec<usize>) {
    let mut m: Vec<Vec<i128>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..dim {
        let Some(p) = (r..m.len()).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(r, p);
        for i in 0..m.len() {
            if i != r && m[i][c] != 0 {
                let (a, b) = (m[r][c], m[i][c]);
                let g = gcd(a, b);
                let (fa, fb) = (a / g, b / g);
                let pivot = m[r].clone();
                for (x, y) in m[i].iter_mut().zip(pivot) {
                    *x = fa * *x - fb * y;
                }
                reduce(&mut m[i]);
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    m.truncate(r);
    (m, pivots)
}

pub fn rank(vectors: &[Vec<i64>]) -> usize {
    let Some(first) = vectors.first() else {
        return 0;
    };
    let rows: Vec<Vec<i128>> = vectors.iter().map(|v| widen(v)).collect();
    echelon(&rows, first.len()).1.len()
}

/// Primitive integer vectors spanning the rational kernel `{x : row·x = 0}`.
/// Not necessarily a lattice basis of the integer kernel.
pub fn rational_kernel(rows: &[Vec<i64>], dim: usize) -> Vec<Vec<i64>> {
    let wide: Vec<Vec<i128>> = rows.iter().map(|v| widen(v)).collect();
    narrow_all(rational_kernel_wide(&wide, dim))
}

fn narrow_all(v: Vec<Vec<i128>>) -> Vec<Vec<i64>> {
    v.iter().map(|x| narrow(x)).collect()
}

fn rational_kernel_wide(rows: &[Vec<i128>], dim: usize) -> Vec<Vec<i128>> {
    let (m, pivots) = echelon(rows, dim);
    let mut out = Vec::new();
    for f in (0..dim).filter(|c| !pivots.contains(c)) {
        // scale so every pivot division is exact
        let l = pivots
            .iter()
            .enumerate()
            .fold(1i128, |acc, (r, &c)| {
                let p = m[r][c].abs();
                acc / gcd(acc, p) * p
            });
        let mut x = vec![0i128; dim];
        x[f] = l;
        for (r, &c) in pivots.iter().enumerate() {
            x[c] = -l * m[r][f] / m[r][c];
        }
        reduce(&mut x);
        out.push(x);
    }
    out
}

/// A lattice basis of `{x ∈ Z^dim : row·x = 0 for every row}`, via column
/// Hermite reduction with a tracked unimodular transform.
pub fn integer_kernel(rows: &[Vec<i64>], dim: usize) -> Vec<Vec<i64>> {
    let wide: Vec<Vec<i128>> = rows.iter().map(|v| widen(v)).collect();
    narrow_all(integer_kernel_wide(&wide, dim))
}

fn integer_kernel_wide(rows: &[Vec<i128>], dim: usize) -> Vec<Vec<i128>> {
    let mut a: Vec<Vec<i128>> = rows.to_vec();
    // u[k] is the k-th column of the transform
    let mut u: Vec<Vec<i128>> = (0..dim)
        .map(|k| (0..dim).map(|i| i128::from(i == k)).collect())
        .collect();
    let mut col = 0;
    for row in 0..a.len() {
        if col == dim {
            break;
        }
        for j in col + 1..dim {
            let (x, y) = (a[row][col], a[row][j]);
            if y == 0 {
                continue;
            }
            let (g, s, t) = ext_gcd(x, y);
            let (xg, yg) = (x / g, y / g);
            for r in a.iter_mut() {
                let (c0, c1) = (r[col], r[j]);
                r[col] = s * c0 + t * c1;
                r[j] = xg * c1 - yg * c0;
            }
            let (u0, u1) = (u[col].clone(), u[j].clone());
            for i in 0..dim {
                u[col][i] = s * u0[i] + t * u1[i];
                u[j][i] = xg * u1[i] - yg * u0[i];
            }
        }
        if a[row][col] != 0 {
            col += 1;
        }
    }
    u.split_off(col)
}

/// A lattice basis of `span(gens) ∩ Z^d`.
pub fn saturation(gens: &[Vec<i64>], dim: usize) -> Vec<Vec<i64>> {
    if gens.is_empty() || rank(gens) == 0 {
        return Vec::new();
    }
    let complement = rational_kernel(gens, dim);
    integer_kernel(&complement, dim)
}

pub fn in_span(v: &[i64], gens: &[Vec<i64>]) -> bool {
    if v.iter().all(|&x| x == 0) {
        return true;
    }
    let mut all = gens.to_vec();
    all.push(v.to_vec());
    rank(&all) == rank(gens)
}

/// Rational coefficients `c` with `Σ c_k basis_k = v`, for linearly
/// independent `basis`; `None` if `v` is outside the span.
pub fn solve_in_basis(v: &[Rational], basis: &[Vec<i64>]) -> Option<Vec<Rational>> {
    let dim = v.len();
    let k = basis.len();
    // augmented system: dim rows, k+1 columns
    let mut m: Vec<Vec<Rational>> = (0..dim)
        .map(|i| {
            let mut row: Vec<Rational> = basis.iter().map(|b| Rational::from_integer(b[i].into())).collect();
            row.push(v[i].clone());
            row
        })
        .collect();
    let mut pivot_row = 0;
    let mut pivot_cols = Vec::new();
    for c in 0..k {
        let p = (pivot_row..dim).find(|&i| !m[i][c].is_zero())?;
        m.swap(pivot_row, p);
        let inv = m[pivot_row][c].recip();
        for x in m[pivot_row].iter_mut() {
            *x *= &inv;
        }
        for i in 0..dim {
            if i != pivot_row && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                let pivot = m[pivot_row].clone();
                for (x, y) in m[i].iter_mut().zip(&pivot).take(k + 1) {
                    *x -= &f * y;
                }
            }
        }
        pivot_cols.push(c);
        pivot_row += 1;
    }
    if m[pivot_row..].iter().any(|row| !row[k].is_zero()) {
        return None;
    }
    Some((0..k).map(|r| m[r][k].clone()).collect())
}

/// Whether the rational vector `v` lies in the linear span of `gens`.
pub fn rational_in_span(v: &[Rational], gens: &[Vec<i64>]) -> bool {
    if v.iter().all(Zero::is_zero) {
        return true;
    }
    let dim = v.len();
    let basis = independent_subset(gens, dim);
    solve_in_basis(v, &basis).is_some()
}

/// A maximal linearly independent subset, greedily in input order.
pub fn independent_subset(gens: &[Vec<i64>], _dim: usize) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = Vec::new();
    for g in gens {
        let mut trial = out.clone();
        trial.push(g.clone());
        if rank(&trial) == trial.len() {
            out = trial;
        }
    }
    out
}

/// Lattice normal vector of the simplicial cone `sigma` relative to its facet
/// `tau`: a vector in `span(sigma) ∩ Z^d` whose class generates the rank-one
/// quotient of the saturated lattices and points into `sigma`. When the
/// generator of `sigma` outside `tau` already generates, it is returned.
pub fn primitive_normal(sigma: &[Vec<i64>], tau: &[Vec<i64>]) -> Result<Vec<i64>, LatticeError> {
    let dim = sigma.first().ok_or(LatticeError::NotAFacet)?.len();
    if !tau.iter().all(|t| sigma.contains(t)) || rank(sigma) != rank(tau) + 1 || rank(sigma) != sigma.len() {
        return Err(LatticeError::NotAFacet);
    }
    let extra = sigma.iter().find(|s| !tau.contains(s)).ok_or(LatticeError::NotAFacet)?;
    let bs = saturation(sigma, dim);
    let bt = saturation(tau, dim);
    let coords = |v: &[i64]| -> Vec<i128> {
        let q: Vec<Rational> = v.iter().map(|&x| Rational::from_integer(x.into())).collect();
        solve_in_basis(&q, &bs)
            .expect("vector lies in span(sigma)")
            .iter()
            .map(|c| {
                assert!(c.is_integer(), "saturated lattice contains tau");
                i128::try_from(c.to_integer()).expect("small coordinates")
            })
            .collect()
    };
    let tau_coords: Vec<Vec<i128>> = bt.iter().map(|b| coords(b)).collect();
    let k = bs.len();
    let mut phi = if tau_coords.is_empty() {
        // the quotient is span(sigma) ∩ Z^d itself, of rank one
        vec![1i128]
    } else {
        let ker = rational_kernel_wide(&tau_coords, k);
        debug_assert_eq!(ker.len(), 1);
        ker.into_iter().next().unwrap()
    };
    let extra_c = coords(extra);
    let dot = |a: &[i128], b: &[i128]| a.iter().zip(b).map(|(x, y)| x * y).sum::<i128>();
    let mut along = dot(&phi, &extra_c);
    if along < 0 {
        phi.iter_mut().for_each(|x| *x = -*x);
        along = -along;
    }
    if along == 1 {
        return Ok(extra.clone());
    }
    // x with phi·x = 1
    let mut x = vec![0i128; k];
    let mut g = 0i128;
    for i in 0..k {
        if phi[i] == 0 {
            continue;
        }
        if g == 0 {
            g = phi[i];
            x[i] = 1;
        } else {
            let (ng, s, t) = ext_gcd(g, phi[i]);
            x.iter_mut().for_each(|v| *v *= s);
            x[i] = t;
            g = ng;
        }
    }
    if g < 0 {
        x.iter_mut().for_each(|v| *v = -*v);
    }
    let mut u = vec![0i128; dim];
    for (c, b) in x.iter().zip(&bs) {
        for i in 0..dim {
            u[i] += c * b[i] as i128;
        }
    }
    Ok(narrow(&u))
}

/// Sign-aware test for a rational vector: all entries non-negative.
pub fn all_nonnegative(v: &[Rational]) -> bool {
    v.iter().all(|x| !x.is_negative())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn primitive_examples() {
        assert_eq!(primitive(&[2, 2, 0]).unwrap(), [1, 1, 0]);
        assert_eq!(primitive(&[0, 0, 1]).unwrap(), [0, 0, 1]);
        assert_eq!(primitive(&[-3, -3, -3]).unwrap(), [-1, -1, -1]);
        assert_eq!(primitive(&[0, 0]), Err(LatticeError::ZeroVector));
    }

    #[test]
    fn saturation_fills_in_the_lattice() {
        // span of (2,0,0),(0,2,2) meets Z^3 in span of (1,0,0),(0,1,1)
        let b = saturation(&[vec![2, 0, 0], vec![0, 2, 2]], 3);
        assert_eq!(b.len(), 2);
        assert!(in_span(&[1, 0, 0], &b));
        assert!(in_span(&[0, 1, 1], &b));
        // determinant check: the Gram determinant is that of (1,0,0),(0,1,1)
        let gram = |u: &[i64], v: &[i64]| u.iter().zip(v).map(|(a, b)| a * b).sum::<i64>();
        let det = gram(&b[0], &b[0]) * gram(&b[1], &b[1]) - gram(&b[0], &b[1]).pow(2);
        assert_eq!(det, 2);
    }

    #[test]
    fn normal_examples() {
        let u = primitive_normal(&[vec![1, 0], vec![0, 1]], &[vec![1, 0]]).unwrap();
        assert_eq!(u, [0, 1]);
        let u = primitive_normal(&[vec![1, 1, 0], vec![0, 0, 1]], &[vec![0, 0, 1]]).unwrap();
        assert_eq!(u, [1, 1, 0]);
        // non-unimodular: sigma = cone((1,0),(1,2)), tau = cone((1,0)); the
        // quotient Z^2/Z(1,0) is generated by (0,1) up to tau
        let u = primitive_normal(&[vec![1, 0], vec![1, 2]], &[vec![1, 0]]).unwrap();
        assert_eq!(u[1], 1);
        assert_eq!(
            primitive_normal(&[vec![1, 0], vec![0, 1]], &[vec![1, 1]]),
            Err(LatticeError::NotAFacet)
        );
        // rays as facets of a one-dimensional cone
        assert_eq!(primitive_normal(&[vec![-2, -2]], &[]).unwrap(), [-1, -1]);
    }

    proptest! {
        #[test]
        fn integer_kernel_is_a_kernel(rows in proptest::collection::vec(proptest::collection::vec(-3i64..4, 5), 0..4)) {
            let ker = integer_kernel(&rows, 5);
            prop_assert_eq!(ker.len(), 5 - rank(&rows));
            for k in &ker {
                for r in &rows {
                    prop_assert_eq!(r.iter().zip(k).map(|(a, b)| a * b).sum::<i64>(), 0);
                }
            }
            prop_assert_eq!(rank(&ker), ker.len());
        }

        #[test]
        fn saturation_contains_generators(gens in proptest::collection::vec(proptest::collection::vec(-4i64..5, 4), 1..4)) {
            let b = saturation(&gens, 4);
            prop_assert_eq!(b.len(), rank(&gens));
            for g in &gens {
                prop_assert!(in_span(g, &b));
                let q: Vec<Rational> = g.iter().map(|&x| Rational::from_integer(x.into())).collect();
                if !b.is_empty() {
                    let c = solve_in_basis(&q, &b).unwrap();
                    prop_assert!(c.iter().all(|x| x.is_integer()));
                }
            }
        }
    }
}
