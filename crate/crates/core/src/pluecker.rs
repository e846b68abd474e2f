//! Plücker coordinates of one-parameter families of points on the projective
//! line, their t-adic tropicalization, and the cross-ratio units that
//! separate boundary divisors.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::graphs::{complement_clique_partition, StabilityGraph};
use crate::sets::IndexSet;
use crate::trees::{DistanceVector, MetricTree, NestedFamily, TreeError};
use crate::valuation::{CoordinateFrame, LatticeVector};
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlueckerError {
    #[error("cannot parse family: {0}")]
    Parse(String),
    #[error("point p{0} vanishes identically")]
    DegeneratePoint(usize),
    #[error("coordinate x{0}{1} is identically zero")]
    IdenticallyZeroCoordinate(usize, usize),
    #[error("generic fiber does not lie in the graphically stable locus")]
    NotGammaOpen,
    #[error("markings {a},{b},{c} must be distinct labels in 2..{n}")]
    InvalidUnit { a: usize, b: usize, c: usize, n: usize },
    #[error("{set} meets {{{a},{b},{c}}} in a pair other than {{{a},{b}}}")]
    AmbiguousSplit { set: IndexSet, a: usize, b: usize, c: usize },
    #[error("malformed monomial: {0}")]
    MalformedMonomial(String),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// Univariate polynomial in `t` with rational coefficients, lowest degree first.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly(Vec<Rational>);

impl Poly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Poly(coeffs)
    }

    pub fn constant(c: Rational) -> Self {
        Poly::new(vec![c])
    }

    pub fn int(c: i64) -> Self {
        Poly::constant(Rational::from_integer(c.into()))
    }

    /// `t`.
    pub fn t() -> Self {
        Poly::new(vec![Rational::zero(), Rational::one()])
    }

    pub fn monomial(c: Rational, deg: usize) -> Self {
        let mut v = vec![Rational::zero(); deg + 1];
        v[deg] = c;
        Poly::new(v)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Lowest exponent with a nonzero coefficient; `None` for the zero polynomial.
    pub fn ord(&self) -> Option<usize> {
        self.0.iter().position(|c| !c.is_zero())
    }

    pub fn eval0(&self) -> Rational {
        self.0.first().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, t: &Rational) -> Rational {
        self.0.iter().rev().fold(Rational::zero(), |acc, c| acc * t + c)
    }

    pub fn pow(&self, k: u32) -> Poly {
        (0..k).fold(Poly::int(1), |acc, _| &acc * self)
    }

    /// Divides by `t^k`; the caller guarantees divisibility.
    fn shift_down(&self, k: usize) -> Poly {
        Poly::new(self.0[k.min(self.0.len())..].to_vec())
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let len = self.0.len().max(o.0.len());
        let z = Rational::zero();
        Poly::new((0..len).map(|k| self.0.get(k).unwrap_or(&z) + o.0.get(k).unwrap_or(&z)).collect())
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly(self.0.iter().map(|c| -c).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        self + &(-o)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::default();
        }
        let mut out = vec![Rational::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.0.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let (sign, mag) = if c.is_negative() { ("-", -c) } else { ("+", c.clone()) };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let show_coeff = k == 0 || !mag.is_one();
            if show_coeff {
                write!(f, "{mag}")?;
            }
            match k {
                0 => {}
                1 => write!(f, "{}t", if show_coeff { "*" } else { "" })?,
                _ => write!(f, "{}t^{k}", if show_coeff { "*" } else { "" })?,
            }
        }
        Ok(())
    }
}

struct PolyParser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl PolyParser<'_> {
    fn peek(&mut self) -> Option<u8> {
        while self.s.get(self.pos).is_some_and(u8::is_ascii_whitespace) {
            self.pos += 1;
        }
        self.s.get(self.pos).copied()
    }

    fn err(&self, what: &str) -> PlueckerError {
        PlueckerError::Parse(format!("{what} at byte {}", self.pos))
    }

    fn expr(&mut self) -> Result<Poly, PlueckerError> {
        let mut acc = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if c == b'+' { &acc + &rhs } else { &acc - &rhs };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Poly, PlueckerError> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = &acc * &self.power()?;
                }
                Some(b'/') => {
                    self.pos += 1;
                    let d = self.power()?;
                    if d.0.len() != 1 {
                        return Err(self.err("division by a non-constant"));
                    }
                    let inv = Poly::constant(d.0[0].recip());
                    acc = &acc * &inv;
                }
                Some(b't' | b'(' | b'0'..=b'9') => acc = &acc * &self.power()?,
                _ => return Ok(acc),
            }
        }
    }

    fn power(&mut self) -> Result<Poly, PlueckerError> {
        let base = self.unary()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.peek();
            let k = self.digits()?;
            let k: u32 = k.parse().map_err(|_| self.err("exponent"))?;
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<Poly, PlueckerError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-&self.unary()?)
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn digits(&mut self) -> Result<String, PlueckerError> {
        let start = self.pos;
        while self.s.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a number"));
        }
        Ok(String::from_utf8_lossy(&self.s[start..self.pos]).into_owned())
    }

    fn atom(&mut self) -> Result<Poly, PlueckerError> {
        match self.peek() {
            Some(b't') => {
                self.pos += 1;
                Ok(Poly::t())
            }
            Some(b'(') => {
                self.pos += 1;
                let p = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(p)
            }
            Some(b'0'..=b'9') => {
                let d = self.digits()?;
                Ok(Poly::constant(Rational::from_integer(d.parse().unwrap())))
            }
            _ => Err(self.err("unexpected input")),
        }
    }
}

impl FromStr for Poly {
    type Err = PlueckerError;

    /// Integer and rational coefficients in `t`, e.g. `1 + 2t - 1/3 t^2`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = PolyParser { s: s.as_bytes(), pos: 0 };
        let out = p.expr()?;
        if p.peek().is_some() {
            return Err(p.err("trailing input"));
        }
        Ok(out)
    }
}

/// `n` points `(x_i(t) : y_i(t))` on the projective line over `ℚ[t]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointFamily {
    points: Vec<(Poly, Poly)>,
}

impl PointFamily {
    /// Clears the common power of `t` from each point.
    pub fn new(points: Vec<(Poly, Poly)>) -> Result<Self, PlueckerError> {
        let mut out = Vec::with_capacity(points.len());
        for (k, (x, y)) in points.into_iter().enumerate() {
            let m = match (x.ord(), y.ord()) {
                (None, None) => return Err(PlueckerError::DegeneratePoint(k + 1)),
                (Some(a), None) | (None, Some(a)) => a,
                (Some(a), Some(b)) => a.min(b),
            };
            out.push((x.shift_down(m), y.shift_down(m)));
        }
        Ok(PointFamily { points: out })
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn point(&self, i: usize) -> &(Poly, Poly) {
        &self.points[i - 1]
    }

    /// One point per line, `p3 = (1+t : 1)`; `#` starts a comment. Every
    /// label from 1 to the largest one must appear exactly once.
    pub fn parse(text: &str) -> Result<Self, PlueckerError> {
        let mut found: BTreeMap<usize, (Poly, Poly)> = BTreeMap::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (lhs, rhs) = line
                .split_once('=')
                .ok_or_else(|| PlueckerError::Parse(format!("missing '=' in `{line}`")))?;
            let label: usize = lhs
                .trim()
                .strip_prefix('p')
                .and_then(|s| s.parse().ok())
                .filter(|&l| l >= 1)
                .ok_or_else(|| PlueckerError::Parse(format!("bad point label `{}`", lhs.trim())))?;
            let body = rhs
                .trim()
                .strip_prefix('(')
                .and_then(|s| s.strip_suffix(')'))
                .ok_or_else(|| PlueckerError::Parse(format!("expected `(x : y)` in `{line}`")))?;
            let (x, y) = body
                .split_once(':')
                .ok_or_else(|| PlueckerError::Parse(format!("missing ':' in `{line}`")))?;
            if found.insert(label, (x.parse()?, y.parse()?)).is_some() {
                return Err(PlueckerError::Parse(format!("p{label} given twice")));
            }
        }
        let n = found.keys().next_back().copied().unwrap_or(0);
        if found.len() != n || n < 4 {
            return Err(PlueckerError::Parse(format!("expected points p1..p{n} with n >= 4")));
        }
        PointFamily::new(found.into_values().collect())
    }

    pub fn to_text(&self) -> String {
        self.points
            .iter()
            .enumerate()
            .map(|(k, (x, y))| format!("p{} = ({x} : {y})\n", k + 1))
            .collect()
    }

    /// `p1 = ∞`, markings of `set` at `t·k` for `k = 1, 2, ...`, the rest at
    /// their own label.
    pub fn collision(n: usize, set: IndexSet) -> Self {
        let mut points = vec![(Poly::int(1), Poly::int(0))];
        let mut speed = 0;
        for i in 2..=n {
            let x = if set.contains(i) {
                speed += 1;
                &Poly::t() * &Poly::int(speed)
            } else {
                Poly::int(i as i64)
            };
            points.push((x, Poly::int(1)));
        }
        PointFamily::new(points).unwrap()
    }

    /// A family whose limit has combinatorial type `family` with unit edge
    /// speeds: `p1 = ∞` and each other point sits at `Σ_k c_k t^k`, where the
    /// `k`-th term separates the members at nesting depth `k`.
    pub fn for_type(family: &NestedFamily) -> Self {
        let n = family.n();
        let mut x: Vec<Poly> = vec![Poly::default(); n + 1];
        place(family, IndexSet::range(2, n), 0, &mut x);
        let mut points = vec![(Poly::int(1), Poly::int(0))];
        points.extend((2..=n).map(|i| (x[i].clone(), Poly::int(1))));
        PointFamily::new(points).unwrap()
    }
}

/// Children of `region` in `family` get distinct constants at depth `depth`,
/// as do the loose markings.
fn place(family: &NestedFamily, region: IndexSet, depth: usize, x: &mut [Poly]) {
    let inside: Vec<IndexSet> = family.sets().iter().copied().filter(|s| s.is_subset(region) && *s != region).collect();
    let children: Vec<IndexSet> = inside
        .iter()
        .copied()
        .filter(|s| !inside.iter().any(|o| o != s && s.is_subset(*o)))
        .collect();
    let mut covered = IndexSet::EMPTY;
    let mut slot = 0i64;
    for &c in &children {
        slot += 1;
        for i in c.iter() {
            x[i] = &x[i] + &Poly::monomial(Rational::from_integer(slot.into()), depth);
        }
        covered = covered.union(c);
        place(family, c, depth + 1, x);
    }
    for i in region.difference(covered).iter() {
        slot += 1;
        x[i] = &x[i] + &Poly::monomial(Rational::from_integer(slot.into()), depth);
    }
}

/// The 2×2 minors `x_ij = x_i y_j − x_j y_i`, `1 <= i < j <= n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlueckerVector {
    n: usize,
    minors: Vec<Poly>,
}

impl PlueckerVector {
    pub fn n(&self) -> usize {
        self.n
    }

    fn index(&self, i: usize, j: usize) -> usize {
        (i - 1) * (2 * self.n - i) / 2 + (j - i - 1)
    }

    /// `x_ij`, antisymmetric in its indices.
    pub fn get(&self, i: usize, j: usize) -> Poly {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.minors[self.index(i, j)].clone(),
            std::cmp::Ordering::Greater => -&self.minors[self.index(j, i)],
            std::cmp::Ordering::Equal => Poly::default(),
        }
    }

    /// Checks `x_ij x_kl − x_ik x_jl + x_il x_jk = 0` for all `i<j<k<l`.
    pub fn relations_hold(&self) -> bool {
        IndexSet::range(1, self.n).subsets_of_size(4).into_iter().all(|q| {
            let v = q.to_vec();
            let (i, j, k, l) = (v[0], v[1], v[2], v[3]);
            let a = &self.get(i, j) * &self.get(k, l);
            let b = &self.get(i, k) * &self.get(j, l);
            let c = &self.get(i, l) * &self.get(j, k);
            (&(&a - &b) + &c).is_zero()
        })
    }
}

pub fn pluecker(family: &PointFamily) -> PlueckerVector {
    let n = family.n();
    let mut minors = Vec::with_capacity(n * (n - 1) / 2);
    for i in 1..=n {
        for j in i + 1..=n {
            let (xi, yi) = family.point(i);
            let (xj, yj) = family.point(j);
            minors.push(&(xi * yj) - &(xj * yi));
        }
    }
    let v = PlueckerVector { n, minors };
    debug_assert!(v.relations_hold());
    v
}

fn required_pairs(g: &StabilityGraph) -> Vec<(usize, usize)> {
    let mut pairs: Vec<(usize, usize)> = (2..=g.n()).map(|j| (1, j)).collect();
    pairs.extend(g.edges());
    pairs
}

/// The special fiber lies in the graphically stable locus: `x_1j(0) ≠ 0` for
/// all `j` and `x_ij(0) ≠ 0` for every edge `{i,j}` of `g`.
pub fn gamma_open_check(pv: &PlueckerVector, g: &StabilityGraph) -> bool {
    required_pairs(g).into_iter().all(|(i, j)| !pv.get(i, j).eval0().is_zero())
}

/// The generic fiber lies in the graphically stable locus.
pub fn gamma_open_generic(pv: &PlueckerVector, g: &StabilityGraph) -> bool {
    required_pairs(g).into_iter().all(|(i, j)| !pv.get(i, j).is_zero())
}

fn ord_of(pv: &PlueckerVector, i: usize, j: usize) -> Result<i64, PlueckerError> {
    pv.get(i, j).ord().map(|k| k as i64).ok_or(PlueckerError::IdenticallyZeroCoordinate(i, j))
}

/// `ord_t(x_ij) − ord_t(x_23)` over the frame of `g`.
pub fn trop_family(pv: &PlueckerVector, g: &StabilityGraph) -> Result<LatticeVector, PlueckerError> {
    let base = ord_of(pv, 2, 3)?;
    let coords = CoordinateFrame::for_graph(g)
        .pairs()
        .iter()
        .map(|&(i, j)| Ok(ord_of(pv, i, j)? - base))
        .collect::<Result<Vec<_>, PlueckerError>>()?;
    Ok(LatticeVector(coords))
}

/// Whether every frame ratio `x_ij / x_23` is finite and nonzero at `t = 0`.
pub fn frame_ratios_are_units(pv: &PlueckerVector, g: &StabilityGraph) -> Result<bool, PlueckerError> {
    let base = ord_of(pv, 2, 3)?;
    for &(i, j) in CoordinateFrame::for_graph(g).pairs() {
        if ord_of(pv, i, j)? != base {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Metric tree of the limit curve, from `dist(i,j) = −2 ord_t(x_ij)`. A
/// collision at rate `t` gives an edge of length one.
pub fn limit_tree(pv: &PlueckerVector) -> Result<MetricTree, PlueckerError> {
    let n = pv.n();
    let mut entries = Vec::with_capacity(n * (n - 1) / 2);
    for i in 1..=n {
        for j in i + 1..=n {
            entries.push(Rational::from_integer((-2 * ord_of(pv, i, j)?).into()));
        }
    }
    Ok(MetricTree::from_distances(&DistanceVector::new(n, entries))?)
}

/// The cross ratio on markings `{1,a,b,c}` that vanishes when `a` and `b`
/// come together away from `1` and `c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CrossRatioUnit {
    pub a: usize,
    pub b: usize,
    pub c: usize,
}

impl CrossRatioUnit {
    pub fn new(a: usize, b: usize, c: usize, n: usize) -> Result<Self, PlueckerError> {
        let ok = [a, b, c].iter().all(|&x| (2..=n).contains(&x)) && a != b && b != c && a != c;
        if !ok {
            return Err(PlueckerError::InvalidUnit { a, b, c, n });
        }
        Ok(CrossRatioUnit { a, b, c })
    }

    /// `ord_t` of `x_ab x_1c / (x_ac x_1b)` along an explicit family.
    pub fn ord_along(&self, pv: &PlueckerVector) -> Result<i64, PlueckerError> {
        let (a, b, c) = (self.a, self.b, self.c);
        Ok(ord_of(pv, a, b)? + ord_of(pv, 1, c)? - ord_of(pv, a, c)? - ord_of(pv, 1, b)?)
    }
}

impl fmt::Display for CrossRatioUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{}}}|{{1,{}}}", self.a, self.b, self.c)
    }
}

/// Order of vanishing of `u` along the divisor `D_J`, decided from index sets.
pub fn cross_ratio_valuation(u: CrossRatioUnit, j: IndexSet) -> Result<u8, PlueckerError> {
    let meet = j.intersection(IndexSet::from_labels([u.a, u.b, u.c]));
    if meet.len() != 2 {
        Ok(0)
    } else if meet == IndexSet::from_labels([u.a, u.b]) {
        Ok(1)
    } else {
        Err(PlueckerError::AmbiguousSplit { set: j, a: u.a, b: u.b, c: u.c })
    }
}

/// Whether `u` has valuation one on `target` and zero on every other member.
pub fn separates(u: CrossRatioUnit, family: &NestedFamily, target: IndexSet) -> bool {
    family.sets().iter().all(|&s| {
        let want = u8::from(s == target);
        cross_ratio_valuation(u, s) == Ok(want)
    })
}

/// A unit with valuation one on `D_I` and zero on the other divisors of the
/// stratum `S`, built by splitting `S` at the two vertices joined by the
/// `I`-edge.
///
/// Below the edge, `I` falls into the child tails of `Z` and the loose legs at
/// `Z`; a valid pair `a,b` is a Γ-edge between two different parts, with the
/// pair taken from an edge inside a child tail when there is one. Above the
/// edge, `c` must lie in every member strictly containing `I`.
pub fn find_separating_unit(s: &NestedFamily, i: IndexSet, g: &StabilityGraph) -> Option<CrossRatioUnit> {
    let n = g.n();
    assert!(s.contains(i), "I must be a member of S");
    let below: Vec<IndexSet> = s.sets().iter().copied().filter(|m| m.is_subset(i) && *m != i).collect();
    let children: Vec<IndexSet> = below
        .iter()
        .copied()
        .filter(|m| !below.iter().any(|o| o != m && m.is_subset(*o)))
        .collect();
    let parent = s
        .sets()
        .iter()
        .copied()
        .filter(|m| i.is_subset(*m) && *m != i)
        .min_by_key(|m| m.len());
    let c = match parent {
        Some(p) => p.difference(i).min()?,
        None => IndexSet::range(2, n).difference(i).min()?,
    };
    let part_of = |x: usize| children.iter().position(|ch| ch.contains(x));
    let different_parts = |a: usize, b: usize| match (part_of(a), part_of(b)) {
        (Some(p), Some(q)) => p != q,
        _ => true,
    };

    let mut pick = None;
    'proof: for &a_part in &children {
        for (a1, a2) in g.edges_within(a_part) {
            for b in i.difference(a_part).iter() {
                if let Some(a) = [a1, a2].into_iter().find(|&a| g.has_edge(a, b)) {
                    pick = Some((a, b));
                    break 'proof;
                }
            }
        }
    }
    if pick.is_none() {
        pick = g.edges_within(i).into_iter().find(|&(a, b)| different_parts(a, b));
    }
    let (a, b) = pick?;
    let u = CrossRatioUnit::new(a, b, c, n).ok()?;
    debug_assert!(separates(u, s, i));
    Some(u)
}

/// One factor of a stratum: a component of the dual tree with its special
/// points other than the one toward marking 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StratumFactor {
    /// Markings on the non-root side of the component's root-ward node
    /// (all of `2..n` for the root component).
    pub region: IndexSet,
    /// Special points: a single marking or the markings behind a node.
    pub points: Vec<IndexSet>,
    /// Pairs of points whose collision stays graphically stable.
    pub edges: Vec<(usize, usize)>,
    pub multipartite: bool,
}

/// Splits the stratum of `s` into one factor per component. A node point
/// carries a Γ-edge behind it, so it is adjacent to every other point; two
/// markings are adjacent when they are joined in `g`.
pub fn stratum_factor_graphs(s: &NestedFamily, g: &StabilityGraph) -> Vec<StratumFactor> {
    let n = g.n();
    let mut regions = vec![IndexSet::range(2, n)];
    regions.extend(s.sets().iter().copied());
    regions
        .into_iter()
        .map(|region| {
            let inside: Vec<IndexSet> =
                s.sets().iter().copied().filter(|m| m.is_subset(region) && *m != region).collect();
            let mut points: Vec<IndexSet> = inside
                .iter()
                .copied()
                .filter(|m| !inside.iter().any(|o| o != m && m.is_subset(*o)))
                .collect();
            let covered = points.iter().fold(IndexSet::EMPTY, |acc, p| acc.union(*p));
            points.extend(region.difference(covered).iter().map(IndexSet::singleton));
            points.sort();
            let adjacent = |p: usize, q: usize| {
                let (x, y) = (points[p], points[q]);
                x.len() > 1 || y.len() > 1 || g.has_edge(x.min().unwrap(), y.min().unwrap())
            };
            let mut edges = Vec::new();
            for p in 0..points.len() {
                for q in p + 1..points.len() {
                    if adjacent(p, q) {
                        edges.push((p, q));
                    }
                }
            }
            // point k is vertex k + 1 of the factor graph
            let multipartite = points.len() <= 30
                && complement_clique_partition(IndexSet::range(1, points.len()), |p, q| adjacent(p - 1, q - 1))
                    .is_some();
            StratumFactor { region, points, edges, multipartite }
        })
        .collect()
}

/// A point of the projective line in the chart with coordinates `x_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ChartPoint {
    Coord(usize),
    Zero,
    One,
    Infinity,
}

impl ChartPoint {
    fn at(self, values: &BTreeMap<usize, Rational>) -> (Rational, Rational) {
        match self {
            ChartPoint::Coord(i) => (values[&i].clone(), Rational::one()),
            ChartPoint::Zero => (Rational::zero(), Rational::one()),
            ChartPoint::One => (Rational::one(), Rational::one()),
            ChartPoint::Infinity => (Rational::one(), Rational::zero()),
        }
    }
}

/// `[P1 P2][P3 P4] / ([P1 P3][P2 P4])` with `[PQ]` the 2×2 determinant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CrossRatio(pub [ChartPoint; 4]);

impl CrossRatio {
    pub fn eval(&self, values: &BTreeMap<usize, Rational>) -> Rational {
        let p: Vec<(Rational, Rational)> = self.0.iter().map(|q| q.at(values)).collect();
        let det = |a: usize, b: usize| &p[a].0 * &p[b].1 - &p[b].0 * &p[a].1;
        det(0, 1) * det(2, 3) / (det(0, 2) * det(1, 3))
    }
}

/// Factor of a monomial: `x_i`, `x_i − 1` or `x_i − x_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum UnitFactor {
    Coord(usize),
    CoordMinusOne(usize),
    Difference(usize, usize),
}

impl UnitFactor {
    fn eval(self, values: &BTreeMap<usize, Rational>) -> Rational {
        match self {
            UnitFactor::Coord(i) => values[&i].clone(),
            UnitFactor::CoordMinusOne(i) => &values[&i] - Rational::one(),
            UnitFactor::Difference(i, j) => &values[&i] - &values[&j],
        }
    }

    fn labels(self) -> Vec<usize> {
        match self {
            UnitFactor::Coord(i) | UnitFactor::CoordMinusOne(i) => vec![i],
            UnitFactor::Difference(i, j) => vec![i, j],
        }
    }

    /// Cross ratios whose product is this factor up to the returned constant.
    fn as_cross_ratios(self) -> (Vec<CrossRatio>, Rational) {
        use ChartPoint::*;
        match self {
            UnitFactor::Coord(i) => (vec![CrossRatio([Coord(i), Zero, Infinity, One])], Rational::one()),
            UnitFactor::CoordMinusOne(i) => (vec![CrossRatio([Coord(i), One, Infinity, Zero])], -Rational::one()),
            UnitFactor::Difference(i, j) => (
                vec![CrossRatio([Coord(i), Zero, Infinity, One]), CrossRatio([Coord(i), Coord(j), Zero, Infinity])],
                Rational::one(),
            ),
        }
    }
}

/// A monomial `Π f_k^{e_k}` in the chart units, written like
/// `x4^2 * (x4-1) * (x4-x5)^-1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnitMonomial(pub Vec<(UnitFactor, i32)>);

impl FromStr for UnitMonomial {
    type Err = PlueckerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |why: &str| PlueckerError::MalformedMonomial(format!("{why} in `{s}`"));
        let coord = |tok: &str| -> Result<usize, PlueckerError> {
            tok.trim()
                .strip_prefix('x')
                .and_then(|d| d.parse().ok())
                .filter(|&i| i >= 1)
                .ok_or_else(|| bad(&format!("bad coordinate `{}`", tok.trim())))
        };
        let mut out = Vec::new();
        for raw in s.split('*') {
            let raw = raw.trim();
            if raw.is_empty() {
                return Err(bad("empty factor"));
            }
            let (base, exp) = match raw.rsplit_once('^') {
                Some((b, e)) if !b.trim().ends_with('(') => {
                    (b.trim(), e.trim().parse::<i32>().map_err(|_| bad("bad exponent"))?)
                }
                _ => (raw, 1),
            };
            let factor = if let Some(inner) = base.strip_prefix('(').and_then(|b| b.strip_suffix(')')) {
                let (l, r) = inner.split_once('-').ok_or_else(|| bad("expected a difference"))?;
                let i = coord(l)?;
                if r.trim() == "1" {
                    UnitFactor::CoordMinusOne(i)
                } else {
                    let j = coord(r)?;
                    if i == j {
                        return Err(bad("difference of equal coordinates"));
                    }
                    UnitFactor::Difference(i, j)
                }
            } else {
                UnitFactor::Coord(coord(base)?)
            };
            if exp != 0 {
                out.push((factor, exp));
            }
        }
        Ok(UnitMonomial(out))
    }
}

impl UnitMonomial {
    pub fn eval(&self, values: &BTreeMap<usize, Rational>) -> Rational {
        self.0.iter().fold(Rational::one(), |acc, &(f, e)| acc * pow(f.eval(values), e))
    }

    fn labels(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.0.iter().flat_map(|(f, _)| f.labels()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

fn pow(x: Rational, e: i32) -> Rational {
    let base = if e < 0 { x.recip() } else { x };
    (0..e.unsigned_abs()).fold(Rational::one(), |acc, _| acc * &base)
}

/// Cross-ratio factors with exponents and the constant by which their
/// product differs from the monomial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnitDecomposition {
    pub factors: Vec<(CrossRatio, i32)>,
    #[serde(serialize_with = "crate::pluecker::ser_rational")]
    pub constant: Rational,
}

pub(crate) fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

impl UnitDecomposition {
    pub fn eval(&self, values: &BTreeMap<usize, Rational>) -> Rational {
        self.factors.iter().fold(self.constant.clone(), |acc, &(c, e)| acc * pow(c.eval(values), e))
    }
}

/// Writes a monomial in `x_i`, `x_i − 1`, `x_i − x_j` as a product of cross
/// ratios with entries among the coordinates and `0, 1, ∞`.
pub fn units_monomial_decompose(spec: &str) -> Result<UnitDecomposition, PlueckerError> {
    let m: UnitMonomial = spec.parse()?;
    let mut factors = Vec::new();
    let mut constant = Rational::one();
    for &(f, e) in &m.0 {
        let (crs, k) = f.as_cross_ratios();
        constant *= pow(k, e);
        factors.extend(crs.into_iter().map(|c| (c, e)));
    }
    Ok(UnitDecomposition { factors, constant })
}

/// Compares monomial and decomposition at `samples` random points of the
/// chart, skipping points where some factor vanishes.
pub fn verify_decomposition(spec: &str, samples: usize, seed: u64) -> Result<bool, PlueckerError> {
    let m: UnitMonomial = spec.parse()?;
    let d = units_monomial_decompose(spec)?;
    let labels = m.labels();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0;
    while checked < samples {
        let values: BTreeMap<usize, Rational> = labels
            .iter()
            .map(|&i| (i, Rational::new(rng.gen_range(-50i64..50).into(), rng.gen_range(1i64..20).into())))
            .collect();
        let vals: Vec<&Rational> = values.values().collect();
        let degenerate = vals.iter().any(|v| v.is_zero() || v.is_one())
            || vals.iter().enumerate().any(|(k, v)| vals[k + 1..].contains(v));
        if degenerate {
            continue;
        }
        if m.eval(&values) != d.eval(&values) {
            return Ok(false);
        }
        checked += 1;
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::validate_graph;
    use crate::valuation::pi_gamma;

    fn gamma_tilde() -> StabilityGraph {
        validate_graph(5, &[(2, 3), (2, 4), (2, 5), (3, 4)]).unwrap()
    }

    fn set(v: &[usize]) -> IndexSet {
        IndexSet::from_labels(v.iter().copied())
    }

    #[test]
    fn poly_parsing_and_ord() {
        let p: Poly = "1 + 2t - 1/3 t^2".parse().unwrap();
        assert_eq!(p.coeffs().len(), 3);
        assert_eq!(p.ord(), Some(0));
        let q: Poly = "t^2*(3 - t)".parse().unwrap();
        assert_eq!(q.ord(), Some(2));
        assert_eq!(q.to_string(), "3*t^2 - t^3");
        assert_eq!("(1+t) - (1+t)".parse::<Poly>().unwrap().ord(), None);
        assert!("1 + ".parse::<Poly>().is_err());
        assert!("1/t".parse::<Poly>().is_err());
    }

    #[test]
    fn constant_configuration() {
        let f = PointFamily::parse("p1 = (0:1)\np2 = (1:1)\np3 = (1:0)\np4 = (5 : 1)").unwrap();
        let pv = pluecker(&f);
        assert_eq!(pv.get(1, 2), Poly::int(-1));
        assert!(pv.minors.iter().all(|m| m.ord() == Some(0)));
        assert!(pv.relations_hold());
        for i in 1..=4 {
            for j in 1..=4 {
                assert_eq!(pv.get(i, j), -&pv.get(j, i));
            }
        }
    }

    #[test]
    fn single_collision() {
        let text = "p1 = (1:0)\np2 = (2:1)\np3 = (1:1)\np4 = (1+t : 1)\np5 = (7:1)\n";
        let pv = pluecker(&PointFamily::parse(text).unwrap());
        assert_eq!(pv.get(3, 4), -&Poly::t());
        let g = gamma_tilde();
        assert_eq!(trop_family(&pv, &g).unwrap().0, vec![0, 0, 1]);
        // e34 is an edge of both graphs
        assert!(!gamma_open_check(&pv, &g));
        let k4 = StabilityGraph::complete(5).unwrap();
        assert!(!gamma_open_check(&pv, &k4));
        assert!(gamma_open_generic(&pv, &k4));
    }

    #[test]
    fn non_edge_collision_is_gamma_open() {
        let text = "p1 = (1:0)\np2 = (2:1)\np3 = (3:1)\np4 = (1:1)\np5 = (1+t : 1)\n";
        let pv = pluecker(&PointFamily::parse(text).unwrap());
        assert_eq!(pv.get(4, 5), -&Poly::t());
        assert!(gamma_open_check(&pv, &gamma_tilde()));
        assert!(!gamma_open_check(&pv, &StabilityGraph::complete(5).unwrap()));
    }

    #[test]
    fn triple_collision_lands_on_the_shared_ray() {
        let pv = pluecker(&PointFamily::collision(5, set(&[3, 4, 5])));
        assert_eq!(trop_family(&pv, &gamma_tilde()).unwrap().0, vec![0, 0, 1]);
        let pv = pluecker(&PointFamily::collision(5, IndexSet::EMPTY));
        assert_eq!(trop_family(&pv, &gamma_tilde()).unwrap().0, vec![0, 0, 0]);
        assert!(frame_ratios_are_units(&pv, &gamma_tilde()).unwrap());
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(
            PointFamily::new(vec![(Poly::default(), Poly::default())]).unwrap_err(),
            PlueckerError::DegeneratePoint(1)
        );
        let same = "p1 = (1:0)\np2 = (1:1)\np3 = (1:1)\np4 = (2:1)";
        let pv = pluecker(&PointFamily::parse(same).unwrap());
        let g = StabilityGraph::complete(4).unwrap();
        assert_eq!(trop_family(&pv, &g), Err(PlueckerError::IdenticallyZeroCoordinate(2, 3)));
        assert!(PointFamily::parse("p1 = (1:0)\np3 = (1:1)").is_err());
        // a common power of t is cleared
        let f = PointFamily::new(vec![(Poly::t(), &Poly::t() * &Poly::t())]).unwrap();
        assert_eq!(f.point(1).0, Poly::int(1));
    }

    #[test]
    fn limit_tree_of_a_type_family() {
        let fam = NestedFamily::parse(6, "{3,4};{3,4,5}").unwrap();
        let pv = pluecker(&PointFamily::for_type(&fam));
        let m = limit_tree(&pv).unwrap();
        let cuts: Vec<_> = m.weighted_cuts().into_iter().map(|(s, l)| (s.to_string(), l.to_string())).collect();
        assert_eq!(cuts, [("{3,4}".to_string(), "1".to_string()), ("{3,4,5}".to_string(), "1".to_string())]);
    }

    #[test]
    fn valuation_cases() {
        let u = CrossRatioUnit::new(3, 4, 2, 5).unwrap();
        assert_eq!(cross_ratio_valuation(u, set(&[3, 4])), Ok(1));
        assert_eq!(cross_ratio_valuation(u, set(&[3, 4, 5])), Ok(1));
        assert_eq!(cross_ratio_valuation(u, set(&[3, 5])), Ok(0));
        assert_eq!(cross_ratio_valuation(u, set(&[2, 3, 4])), Ok(0));
        assert!(matches!(cross_ratio_valuation(u, set(&[2, 3])), Err(PlueckerError::AmbiguousSplit { .. })));
        assert!(CrossRatioUnit::new(3, 3, 2, 5).is_err());
        assert!(CrossRatioUnit::new(1, 3, 2, 5).is_err());
    }

    #[test]
    fn combinatorial_and_algebraic_valuations_agree() {
        let n = 6;
        for d in crate::complex::all_index_sets(n) {
            let pv = pluecker(&PointFamily::collision(n, d));
            for t in IndexSet::range(2, n).subsets_of_size(3) {
                let v = t.to_vec();
                for (a, b, c) in [(v[0], v[1], v[2]), (v[0], v[2], v[1]), (v[1], v[2], v[0])] {
                    let u = CrossRatioUnit::new(a, b, c, n).unwrap();
                    let along = u.ord_along(&pv).unwrap();
                    match cross_ratio_valuation(u, d) {
                        Ok(k) => assert_eq!(along, i64::from(k)),
                        Err(_) => assert_ne!(along, 1),
                    }
                }
            }
        }
    }

    #[test]
    fn separating_units() {
        let g = gamma_tilde();
        let fig7 = NestedFamily::parse(5, "{3,4};{3,4,5}").unwrap();
        assert_eq!(find_separating_unit(&fig7, set(&[3, 4, 5]), &g), None);
        let u = find_separating_unit(&fig7, set(&[3, 4]), &g).unwrap();
        assert!(separates(u, &fig7, set(&[3, 4])));
        let single = NestedFamily::parse(5, "{2,4,5}").unwrap();
        let u = find_separating_unit(&single, set(&[2, 4, 5]), &g).unwrap();
        assert_eq!((u.a, u.b, u.c), (2, 4, 3));
    }

    #[test]
    fn stratum_factors() {
        let g = gamma_tilde();
        let fig7 = NestedFamily::parse(5, "{3,4};{3,4,5}").unwrap();
        let f = stratum_factor_graphs(&fig7, &g);
        assert_eq!(f.len(), 3);
        assert!(f.iter().all(|x| x.multipartite));
        let k22 = validate_graph(5, &[(2, 3), (2, 4), (3, 5), (4, 5)]).unwrap();
        let s = NestedFamily::parse(5, "{2,3}").unwrap();
        let f = stratum_factor_graphs(&s, &k22);
        assert_eq!(f[0].points.len(), 3);
        assert_eq!(f[0].edges.len(), 3);
    }

    #[test]
    fn coordinate_monomial_decompositions() {
        use ChartPoint::*;
        let d = units_monomial_decompose("x4").unwrap();
        assert_eq!(d.factors, vec![(CrossRatio([Coord(4), Zero, Infinity, One]), 1)]);
        assert_eq!(d.constant, Rational::one());
        let d = units_monomial_decompose("(x4-1)").unwrap();
        assert_eq!(d.factors, vec![(CrossRatio([Coord(4), One, Infinity, Zero]), 1)]);
        assert_eq!(d.constant, -Rational::one());
        let d = units_monomial_decompose("(x4-x5)").unwrap();
        assert_eq!(d.factors.len(), 2);
        assert_eq!(d.factors[1].0, CrossRatio([Coord(4), Coord(5), Zero, Infinity]));
        for spec in ["x4", "(x4-1)^3", "x4^2 * (x4-1)^-1 * (x4-x5)", "(x5-x4)^-2 * x6"] {
            assert!(verify_decomposition(spec, 20, 7).unwrap(), "{spec}");
        }
        for bad in ["", "y4", "(x4-x4)", "x4^a", "(x4+1)"] {
            assert!(matches!(units_monomial_decompose(bad), Err(PlueckerError::MalformedMonomial(_))), "{bad}");
        }
    }

    #[test]
    fn collision_family_gives_divisor_vector() {
        let g = gamma_tilde();
        for d in crate::complex::enumerate_divisors(&g) {
            let pv = pluecker(&PointFamily::collision(5, d));
            assert_eq!(trop_family(&pv, &g).unwrap(), pi_gamma(d, &g).unwrap());
        }
    }
}
