//! Hypercube combinatorics: design points, orbits `O_k` (points with exactly
//! `k` entries at +1), count-restricted regions, and orbit-weighted designs.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{domain, DesignError, Result};
use crate::Rational;

/// Largest factor count for which binomials are computed exactly.
pub const MAX_FACTORS: usize = 64;

/// Tolerance on the total weight of an [`OrbitDesign`].
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// A vertex of `{-1, +1}^K`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DesignPoint(Vec<i8>);

impl DesignPoint {
    pub fn new(entries: Vec<i8>) -> Result<Self> {
        if entries.is_empty() {
            return Err(domain("design point", "needs at least one factor"));
        }
        if let Some(bad) = entries.iter().find(|&&e| e != 1 && e != -1) {
            return Err(domain(
                "design point",
                format!("entry {bad} is not -1 or +1"),
            ));
        }
        Ok(Self(entries))
    }

    /// Point whose +1 entries sit at the given (0-based) positions.
    pub fn from_active(k_factors: usize, active: &[usize]) -> Self {
        let mut entries = vec![-1; k_factors];
        for &i in active {
            entries[i] = 1;
        }
        Self(entries)
    }

    pub fn entries(&self) -> &[i8] {
        &self.0
    }

    pub fn k_factors(&self) -> usize {
        self.0.len()
    }

    /// Interaction products `x_i x_j`, `i < j`, in lexicographic pair order.
    pub fn interactions(&self) -> Vec<i8> {
        let x = &self.0;
        let mut out = Vec::with_capacity(x.len() * (x.len().saturating_sub(1)) / 2);
        for i in 0..x.len() {
            for j in i + 1..x.len() {
                out.push(x[i] * x[j]);
            }
        }
        out
    }

    /// Regression vector `f(x) = (1, x, x̃)`.
    pub fn regression_vector(&self) -> Vec<i8> {
        let mut f = Vec::with_capacity(1 + self.0.len() * (self.0.len() + 1) / 2);
        f.push(1);
        f.extend_from_slice(&self.0);
        f.extend(self.interactions());
        f
    }
}

impl fmt::Display for DesignPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<&str> = self
            .0
            .iter()
            .map(|&e| if e > 0 { "+1" } else { "-1" })
            .collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Number of active factors `d(x)`, i.e. entries equal to +1.
pub fn active_count(x: &DesignPoint) -> usize {
    x.0.iter().filter(|&&e| e > 0).count()
}

/// Exact binomial coefficient `C(n, k)` by the Pascal recurrence.
pub fn orbit_size(n: usize, k: usize) -> Result<u128> {
    if n > MAX_FACTORS {
        return Err(DesignError::Overflow { n, k });
    }
    if k > n {
        return Err(domain("orbit index", format!("k = {k} exceeds K = {n}")));
    }
    let mut row = vec![0u128; n + 1];
    row[0] = 1;
    for i in 1..=n {
        for j in (1..=i.min(k)).rev() {
            row[j] = row[j]
                .checked_add(row[j - 1])
                .ok_or(DesignError::Overflow { n, k })?;
        }
    }
    Ok(row[k])
}

pub(crate) fn binom(n: usize, k: usize) -> u128 {
    orbit_size(n, k).expect("binomial arguments checked by caller")
}

/// Iterator over the points of `O_k` in lexicographic order of their
/// +1-position sets.
#[derive(Debug, Clone)]
pub struct OrbitPoints {
    k_factors: usize,
    subset: Vec<usize>,
    done: bool,
}

impl Iterator for OrbitPoints {
    type Item = DesignPoint;

    fn next(&mut self) -> Option<DesignPoint> {
        if self.done {
            return None;
        }
        let point = DesignPoint::from_active(self.k_factors, &self.subset);
        // advance to the next k-subset
        let n = self.k_factors;
        let r = self.subset.len();
        let mut i = r;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.subset[i] < n - r + i {
                self.subset[i] += 1;
                for j in i + 1..r {
                    self.subset[j] = self.subset[j - 1] + 1;
                }
                break;
            }
        }
        Some(point)
    }
}

/// Enumerates `O_k`. Intended for `K <= 22`.
pub fn enumerate_orbit(k_factors: usize, k: usize) -> Result<OrbitPoints> {
    if k_factors == 0 || k > k_factors {
        return Err(domain(
            "orbit index",
            format!("need 0 <= k <= K with K >= 1, got K = {k_factors}, k = {k}"),
        ));
    }
    Ok(OrbitPoints {
        k_factors,
        subset: (0..k).collect(),
        done: false,
    })
}

/// The region `X_{L,U}`: points with between `lower` and `upper` active factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Region {
    k_factors: usize,
    lower: usize,
    upper: usize,
}

impl Region {
    pub fn new(k_factors: usize, lower: usize, upper: usize) -> Result<Self> {
        if k_factors == 0 || k_factors > MAX_FACTORS {
            return Err(domain("K", format!("{k_factors} not in 1..={MAX_FACTORS}")));
        }
        if lower > upper || upper > k_factors {
            return Err(domain(
                "region",
                format!("need 0 <= L <= U <= K, got L = {lower}, U = {upper}, K = {k_factors}"),
            ));
        }
        Ok(Self {
            k_factors,
            lower,
            upper,
        })
    }

    /// `X_{L,K-L}`.
    pub fn symmetric_bounds(k_factors: usize, lower: usize) -> Result<Self> {
        if 2 * lower > k_factors {
            return Err(domain(
                "region",
                format!("L = {lower} leaves no points for K = {k_factors}"),
            ));
        }
        Self::new(k_factors, lower, k_factors - lower)
    }

    pub fn k_factors(&self) -> usize {
        self.k_factors
    }

    pub fn lower(&self) -> usize {
        self.lower
    }

    pub fn upper(&self) -> usize {
        self.upper
    }

    pub fn symmetric(&self) -> bool {
        self.lower + self.upper == self.k_factors
    }

    pub fn contains_orbit(&self, k: usize) -> bool {
        (self.lower..=self.upper).contains(&k)
    }

    pub fn orbits(&self) -> std::ops::RangeInclusive<usize> {
        self.lower..=self.upper
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Layout {
    /// Weights for `k <= K/2`; `w[K-k]` mirrors `w[k]`.
    Folded(Vec<f64>),
    Full(Vec<f64>),
}

/// A permutation-invariant design, given by its orbit weights `w̄_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitDesign {
    k_factors: usize,
    layout: Layout,
}

impl OrbitDesign {
    /// Sign-flip symmetric design. Entries may name either `k` or `K-k`;
    /// naming both with different weights is an error.
    pub fn symmetric<I>(k_factors: usize, weights: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, f64)>,
    {
        check_factors(k_factors)?;
        let half = k_factors / 2;
        let mut folded: Vec<Option<f64>> = vec![None; half + 1];
        for (k, w) in weights {
            if k > k_factors {
                return Err(DesignError::InvalidDesign(format!(
                    "orbit {k} exceeds K = {k_factors}"
                )));
            }
            let idx = k.min(k_factors - k);
            match folded[idx] {
                Some(prev) if prev != w => {
                    return Err(DesignError::InvalidDesign(format!(
                        "orbits {k} and {} carry different weights {prev} and {w}",
                        k_factors - k
                    )))
                }
                _ => folded[idx] = Some(w),
            }
        }
        let folded: Vec<f64> = folded.into_iter().map(|w| w.unwrap_or(0.0)).collect();
        let design = Self {
            k_factors,
            layout: Layout::Folded(folded),
        };
        design.validate()?;
        Ok(design)
    }

    /// Arbitrary invariant design on orbits `0..=K`.
    pub fn general<I>(k_factors: usize, weights: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, f64)>,
    {
        check_factors(k_factors)?;
        let mut full = vec![0.0; k_factors + 1];
        let mut seen = vec![false; k_factors + 1];
        for (k, w) in weights {
            if k > k_factors {
                return Err(DesignError::InvalidDesign(format!(
                    "orbit {k} exceeds K = {k_factors}"
                )));
            }
            if seen[k] {
                return Err(DesignError::InvalidDesign(format!(
                    "orbit {k} listed twice"
                )));
            }
            seen[k] = true;
            full[k] = w;
        }
        let design = Self {
            k_factors,
            layout: Layout::Full(full),
        };
        design.validate()?;
        Ok(design)
    }

    /// Uniform design on all `2^K` points.
    pub fn full_factorial(k_factors: usize) -> Result<Self> {
        check_factors(k_factors)?;
        let total = 2f64.powi(k_factors as i32);
        Self::symmetric(
            k_factors,
            (0..=k_factors / 2).map(|k| (k, binom(k_factors, k) as f64 / total)),
        )
    }

    fn validate(&self) -> Result<()> {
        let mut sum = 0.0;
        for (k, w) in self.iter_all() {
            if !w.is_finite() || w < 0.0 {
                return Err(DesignError::InvalidDesign(format!(
                    "orbit {k} has weight {w}"
                )));
            }
            sum += w;
        }
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(DesignError::InvalidDesign(format!(
                "orbit weights sum to {sum}, not 1"
            )));
        }
        Ok(())
    }

    pub fn k_factors(&self) -> usize {
        self.k_factors
    }

    pub fn is_symmetric(&self) -> bool {
        matches!(self.layout, Layout::Folded(_))
    }

    /// Orbit weight `w̄_k`; zero outside `0..=K`.
    pub fn weight(&self, k: usize) -> f64 {
        if k > self.k_factors {
            return 0.0;
        }
        match &self.layout {
            Layout::Folded(w) => w[k.min(self.k_factors - k)],
            Layout::Full(w) => w[k],
        }
    }

    fn iter_all(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        (0..=self.k_factors).map(move |k| (k, self.weight(k)))
    }

    /// Orbits with positive weight, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.iter_all()
            .filter(|&(_, w)| w > 0.0)
            .map(|(k, _)| k)
            .collect()
    }

    /// `(k, w̄_k)` for every supported orbit, ascending.
    pub fn orbit_weights(&self) -> Vec<(usize, f64)> {
        self.iter_all().filter(|&(_, w)| w > 0.0).collect()
    }

    /// Supported symmetric orbits `Õ_k`, identified by `k <= K/2`.
    pub fn symmetric_support(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .support()
            .into_iter()
            .map(|k| k.min(self.k_factors - k))
            .collect();
        out.dedup();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn support_within(&self, region: &Region) -> bool {
        region.k_factors() == self.k_factors
            && self.support().into_iter().all(|k| region.contains_orbit(k))
    }

    /// Converts a general layout whose weights mirror exactly into the
    /// folded layout.
    pub fn into_symmetric(self) -> Option<Self> {
        match &self.layout {
            Layout::Folded(_) => Some(self),
            Layout::Full(w) => {
                let kf = self.k_factors;
                if (0..=kf).all(|k| w[k] == w[kf - k]) {
                    Some(Self {
                        k_factors: kf,
                        layout: Layout::Folded(w[..=kf / 2].to_vec()),
                    })
                } else {
                    None
                }
            }
        }
    }
}

/// Weight `w̄_k / C(K,k)` carried by each single point of orbit `k`.
pub fn point_weight(design: &OrbitDesign, k: usize) -> Result<f64> {
    let kf = design.k_factors();
    if k > kf {
        return Err(domain("orbit index", format!("k = {k} exceeds K = {kf}")));
    }
    let w = design.weight(k);
    if w == 0.0 {
        return Ok(0.0);
    }
    Ok(w / orbit_size(kf, k)? as f64)
}

fn check_factors(k_factors: usize) -> Result<()> {
    if k_factors == 0 || k_factors > MAX_FACTORS {
        return Err(domain("K", format!("{k_factors} not in 1..={MAX_FACTORS}")));
    }
    Ok(())
}

/// Orbit weights held as exact rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactDesign {
    k_factors: usize,
    weights: BTreeMap<usize, Rational>,
}

impl ExactDesign {
    pub fn new<I>(k_factors: usize, weights: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, Rational)>,
    {
        check_factors(k_factors)?;
        let zero = Rational::from_integer(0);
        let mut map = BTreeMap::new();
        for (k, w) in weights {
            if k > k_factors {
                return Err(DesignError::InvalidDesign(format!(
                    "orbit {k} exceeds K = {k_factors}"
                )));
            }
            if w < zero {
                return Err(DesignError::InvalidDesign(format!(
                    "orbit {k} has weight {w}"
                )));
            }
            if w > zero && map.insert(k, w).is_some() {
                return Err(DesignError::InvalidDesign(format!(
                    "orbit {k} listed twice"
                )));
            }
        }
        let total: Rational = map.values().copied().sum();
        if total != Rational::from_integer(1) {
            return Err(DesignError::InvalidDesign(format!(
                "orbit weights sum to {total}, not 1"
            )));
        }
        Ok(Self {
            k_factors,
            weights: map,
        })
    }

    /// Exact uniform design on all `2^K` points.
    pub fn full_factorial(k_factors: usize) -> Result<Self> {
        check_factors(k_factors)?;
        let total = 1i128 << k_factors;
        Self::new(
            k_factors,
            (0..=k_factors).map(|k| (k, Rational::new(binom(k_factors, k) as i128, total))),
        )
    }

    pub fn k_factors(&self) -> usize {
        self.k_factors
    }

    pub fn weight(&self, k: usize) -> Rational {
        self.weights
            .get(&k)
            .copied()
            .unwrap_or_else(|| Rational::from_integer(0))
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Rational)> + '_ {
        self.weights.iter().map(|(&k, &w)| (k, w))
    }

    pub fn is_symmetric(&self) -> bool {
        self.weights
            .iter()
            .all(|(&k, &w)| self.weight(self.k_factors - k) == w)
    }

    pub fn to_orbit_design(&self) -> Result<OrbitDesign> {
        let pairs = self.iter().map(|(k, w)| (k, crate::rational_to_f64(w)));
        if self.is_symmetric() {
            OrbitDesign::symmetric(self.k_factors, pairs)
        } else {
            OrbitDesign::general(self.k_factors, pairs)
        }
    }
}
