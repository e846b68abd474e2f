//! Exact polyhedral cones by the double description method.
//!
//! Cones are kept as integer data. [`HRep`] is `{x : E x = 0, A x >= 0}` and
//! [`VRep`] is `span(lineality) + cone(rays)`.

use crate::lattice::{gcd, rational_kernel};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HRep {
    pub dim: usize,
    pub equalities: Vec<Vec<i64>>,
    pub inequalities: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VRep {
    pub dim: usize,
    pub lineality: Vec<Vec<i64>>,
    pub rays: Vec<Vec<i64>>,
}

fn dot(a: &[i128], b: &[i128]) -> i128 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn dot64(a: &[i64], b: &[i64]) -> i128 {
    a.iter().zip(b).map(|(&x, &y)| x as i128 * y as i128).sum()
}

fn normalize(v: &mut [i128]) {
    let g = v.iter().fold(0, |g, &x| gcd(g, x));
    if g > 1 {
        v.iter_mut().for_each(|x| *x /= g);
    }
}

fn to_i64(v: &[i128]) -> Vec<i64> {
    v.iter().map(|&x| i64::try_from(x).expect("cone entry overflows i64")).collect()
}

#[derive(Clone)]
struct Ray {
    v: Vec<i128>,
    /// processed inequalities tight at this ray
    tight: Vec<bool>,
}

/// Extreme rays and lineality space of an H-representation.
pub fn h_to_v(h: &HRep) -> VRep {
    let dim = h.dim;
    let mut lineality: Vec<Vec<i128>> = if h.equalities.is_empty() {
        (0..dim).map(|k| (0..dim).map(|i| i128::from(i == k)).collect()).collect()
    } else {
        rational_kernel(&h.equalities, dim)
            .into_iter()
            .map(|v| v.into_iter().map(i128::from).collect())
            .collect()
    };
    let mut rays: Vec<Ray> = Vec::new();
    let ineqs: Vec<Vec<i128>> = h
        .inequalities
        .iter()
        .map(|a| a.iter().map(|&x| x as i128).collect())
        .collect();
    for (step, a) in ineqs.iter().enumerate() {
        if let Some(p) = lineality.iter().position(|l| dot(a, l) != 0) {
            let mut l0 = lineality.swap_remove(p);
            if dot(a, &l0) < 0 {
                l0.iter_mut().for_each(|x| *x = -*x);
            }
            let al0 = dot(a, &l0);
            for l in lineality.iter_mut() {
                let al = dot(a, l);
                if al != 0 {
                    for i in 0..dim {
                        l[i] = al0 * l[i] - al * l0[i];
                    }
                    normalize(l);
                }
            }
            for r in rays.iter_mut() {
                let ar = dot(a, &r.v);
                if ar != 0 {
                    for (x, &y) in r.v.iter_mut().zip(l0.iter()) {
                        *x = al0 * *x - ar * y;
                    }
                    normalize(&mut r.v);
                }
                r.tight.push(true);
            }
            let mut tight = vec![true; step];
            tight.push(false);
            normalize(&mut l0);
            rays.push(Ray { v: l0, tight });
            continue;
        }
        let vals: Vec<i128> = rays.iter().map(|r| dot(a, &r.v)).collect();
        let mut next: Vec<Ray> = Vec::new();
        for (r, &val) in rays.iter().zip(&vals) {
            if val >= 0 {
                let mut r = r.clone();
                r.tight.push(val == 0);
                next.push(r);
            }
        }
        for (i, p) in rays.iter().enumerate() {
            if vals[i] <= 0 {
                continue;
            }
            for (j, m) in rays.iter().enumerate() {
                if vals[j] >= 0 {
                    continue;
                }
                let common: Vec<bool> = p.tight.iter().zip(&m.tight).map(|(x, y)| *x && *y).collect();
                let adjacent = !rays.iter().enumerate().any(|(k, r)| {
                    k != i && k != j && common.iter().zip(&r.tight).all(|(c, t)| !c || *t)
                });
                if !adjacent {
                    continue;
                }
                let mut v: Vec<i128> = (0..dim).map(|t| vals[i] * m.v[t] - vals[j] * p.v[t]).collect();
                normalize(&mut v);
                let mut tight = common;
                tight.push(true);
                next.push(Ray { v, tight });
            }
        }
        rays = next;
    }
    VRep {
        dim,
        lineality: lineality.iter().map(|l| to_i64(l)).collect(),
        rays: rays.iter().map(|r| to_i64(&r.v)).collect(),
    }
}

/// Facet description of `cone(gens)`.
pub fn v_to_h(gens: &[Vec<i64>], dim: usize) -> HRep {
    let dual = h_to_v(&HRep { dim, equalities: Vec::new(), inequalities: gens.to_vec() });
    HRep { dim, equalities: dual.lineality, inequalities: dual.rays }
}

impl HRep {
    pub fn contains(&self, x: &[i64]) -> bool {
        self.equalities.iter().all(|e| dot64(e, x) == 0)
            && self.inequalities.iter().all(|a| dot64(a, x) >= 0)
    }

    pub fn intersect(&self, other: &HRep) -> HRep {
        let mut equalities = self.equalities.clone();
        equalities.extend(other.equalities.iter().cloned());
        let mut inequalities = self.inequalities.clone();
        inequalities.extend(other.inequalities.iter().cloned());
        HRep { dim: self.dim, equalities, inequalities }
    }
}

impl VRep {
    /// Whether every generator (both signs of lineality) satisfies `h`.
    pub fn is_inside(&self, h: &HRep) -> bool {
        self.rays.iter().all(|r| h.contains(r))
            && self.lineality.iter().all(|l| {
                let neg: Vec<i64> = l.iter().map(|x| -x).collect();
                h.contains(l) && h.contains(&neg)
            })
    }

    pub fn is_origin(&self) -> bool {
        self.rays.is_empty() && self.lineality.is_empty()
    }
}

/// `cone(a) ∩ cone(b) == cone(c)` as sets.
pub fn intersection_equals(a: &[Vec<i64>], b: &[Vec<i64>], c: &[Vec<i64>], dim: usize) -> bool {
    let ha = v_to_h(a, dim);
    let hb = v_to_h(b, dim);
    let hc = v_to_h(c, dim);
    let meet = h_to_v(&ha.intersect(&hb));
    if !meet.is_inside(&hc) {
        return false;
    }
    c.iter().all(|g| ha.contains(g) && hb.contains(g))
}

/// `cone(small) ⊆ cone(big)`.
pub fn cone_contains(big: &[Vec<i64>], small: &[Vec<i64>], dim: usize) -> bool {
    let h = v_to_h(big, dim);
    small.iter().all(|g| h.contains(g))
}

/// Generators of `cone(gens)` that are not in the cone of the others.
pub fn extreme_generators(gens: &[Vec<i64>], dim: usize) -> Vec<Vec<i64>> {
    let mut distinct: Vec<Vec<i64>> = Vec::new();
    for g in gens {
        if g.iter().any(|&x| x != 0) && !distinct.contains(g) {
            distinct.push(g.clone());
        }
    }
    (0..distinct.len())
        .filter(|&k| {
            let others: Vec<Vec<i64>> =
                distinct.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, g)| g.clone()).collect();
            others.is_empty() || !v_to_h(&others, dim).contains(&distinct[k])
        })
        .map(|k| distinct[k].clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn quadrant_facets() {
        let h = v_to_h(&[vec![1, 0], vec![0, 1]], 2);
        assert!(h.equalities.is_empty());
        assert_eq!(h.inequalities.len(), 2);
        assert!(h.contains(&[3, 5]));
        assert!(!h.contains(&[-1, 5]));
    }

    #[test]
    fn lower_dimensional_cone_gets_equalities() {
        let h = v_to_h(&[vec![1, 0, 0], vec![0, 1, 0]], 3);
        assert_eq!(h.equalities.len(), 1);
        assert!(!h.contains(&[0, 0, 1]));
        assert!(h.contains(&[2, 7, 0]));
    }

    #[test]
    fn square_pyramid_has_four_rays() {
        let h = HRep {
            dim: 3,
            equalities: vec![],
            inequalities: vec![vec![1, 0, 1], vec![-1, 0, 1], vec![0, 1, 1], vec![0, -1, 1]],
        };
        let v = h_to_v(&h);
        assert!(v.lineality.is_empty());
        let mut rays = v.rays.clone();
        rays.sort();
        assert_eq!(rays, vec![vec![-1, -1, 1], vec![-1, 1, 1], vec![1, -1, 1], vec![1, 1, 1]]);
    }

    #[test]
    fn halfspace_keeps_lineality() {
        let h = HRep { dim: 3, equalities: vec![], inequalities: vec![vec![0, 0, 1]] };
        let v = h_to_v(&h);
        assert_eq!(v.lineality.len(), 2);
        assert_eq!(v.rays, vec![vec![0, 0, 1]]);
    }

    #[test]
    fn two_cones_meet_in_common_ray() {
        let a = [vec![1, 0], vec![1, 1]];
        let b = [vec![1, 1], vec![0, 1]];
        assert!(intersection_equals(&a, &b, &[vec![1, 1]], 2));
        let c = [vec![1, 0], vec![0, 1]];
        assert!(!intersection_equals(&a, &c, &[vec![1, 0]], 2));
        assert!(intersection_equals(&a, &c, &a, 2));
    }

    #[test]
    fn redundant_generators_are_dropped() {
        let e = extreme_generators(&[vec![1, 0], vec![1, 1], vec![0, 1], vec![0, 0]], 2);
        assert_eq!(e, vec![vec![1, 0], vec![0, 1]]);
        let e = extreme_generators(&[vec![1, 0], vec![-1, 0]], 2);
        assert_eq!(e.len(), 2);
    }

    proptest! {
        #[test]
        fn generators_satisfy_their_facets(gens in proptest::collection::vec(proptest::collection::vec(-3i64..4, 3), 1..5)) {
            let h = v_to_h(&gens, 3);
            for g in &gens {
                prop_assert!(h.contains(g));
            }
            let back = h_to_v(&h);
            // the V-representation of the facet description spans the same cone
            for r in &back.rays {
                let s: i64 = r.iter().map(|x| x.abs()).sum();
                prop_assert!(s > 0);
            }
            prop_assert!(back.is_inside(&h));
            let sum: Vec<i64> = (0..3).map(|i| gens.iter().map(|g| g[i]).sum()).collect();
            prop_assert!(h.contains(&sum));
        }
    }
}
