//! Invariant moments `m_1..m_4` of orbit designs.
//!
//! For a permutation-invariant design every off-diagonal entry of the
//! information matrix is one of four moments: the mean of a product of
//! `j` distinct factors, `j = 1..4`.

use num_traits::Zero;

use crate::error::{domain, Result};
use crate::orbit::{binom, ExactDesign, OrbitDesign, MAX_FACTORS};
use crate::{rational_to_f64, Rational};

/// The four moments of a design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments<T> {
    pub m1: T,
    pub m2: T,
    pub m3: T,
    pub m4: T,
}

pub type MomentSet = Moments<f64>;

impl<T: Copy> Moments<T> {
    pub fn get(&self, j: usize) -> T {
        match j {
            1 => self.m1,
            2 => self.m2,
            3 => self.m3,
            4 => self.m4,
            _ => panic!("moment order {j} not in 1..=4"),
        }
    }

    pub fn from_fn(mut f: impl FnMut(usize) -> T) -> Self {
        Self {
            m1: f(1),
            m2: f(2),
            m3: f(3),
            m4: f(4),
        }
    }
}

impl<T: Zero + Copy> Moments<T> {
    pub fn zero() -> Self {
        Self::from_fn(|_| T::zero())
    }
}

impl MomentSet {
    /// True when the odd moments vanish up to `tol`.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.m1.abs() <= tol && self.m3.abs() <= tol
    }
}

impl Moments<Rational> {
    pub fn to_f64(&self) -> MomentSet {
        Moments::from_fn(|j| rational_to_f64(self.get(j)))
    }
}

fn check_args(k_factors: usize, k: usize, j: usize) -> Result<()> {
    if k_factors == 0 || k_factors > MAX_FACTORS {
        return Err(domain("K", format!("{k_factors} not in 1..={MAX_FACTORS}")));
    }
    if k > k_factors {
        return Err(domain(
            "orbit index",
            format!("k = {k} exceeds K = {k_factors}"),
        ));
    }
    if !(1..=4).contains(&j) {
        return Err(domain("moment order", format!("j = {j} not in 1..=4")));
    }
    Ok(())
}

/// `m_j` of the uniform design on `O_k`, from the closed-form polynomials in
/// `t = 2k - K`.
pub fn orbit_moment_exact(k_factors: usize, k: usize, j: usize) -> Result<Rational> {
    check_args(k_factors, k, j)?;
    if j > k_factors {
        return Ok(Rational::zero());
    }
    let kf = k_factors as i128;
    let t = 2 * k as i128 - kf;
    let (num, den) = match j {
        1 => (t, kf),
        2 => (t * t - kf, kf * (kf - 1)),
        3 => (t.pow(3) - (3 * kf - 2) * t, kf * (kf - 1) * (kf - 2)),
        _ => (
            t.pow(4) - (6 * kf - 8) * t * t + 3 * kf * (kf - 2),
            kf * (kf - 1) * (kf - 2) * (kf - 3),
        ),
    };
    Ok(Rational::new(num, den))
}

/// `m_j` of the uniform design on `O_k` by the alternating binomial sum
/// `C(K,k)^{-1} Σ_i (-1)^{i+j} C(j,i) C(K-j,k-i)`.
pub fn orbit_moment_alternating(k_factors: usize, k: usize, j: usize) -> Result<Rational> {
    check_args(k_factors, k, j)?;
    if j > k_factors {
        return Ok(Rational::zero());
    }
    let mut acc: i128 = 0;
    for i in 0..=j.min(k) {
        if k - i > k_factors - j {
            continue;
        }
        let term = binom(j, i) as i128 * binom(k_factors - j, k - i) as i128;
        if (i + j).is_multiple_of(2) {
            acc += term;
        } else {
            acc -= term;
        }
    }
    Ok(Rational::new(acc, binom(k_factors, k) as i128))
}

/// `m_j(ξ̄_k)` as a float.
pub fn orbit_moment(k_factors: usize, k: usize, j: usize) -> Result<f64> {
    orbit_moment_exact(k_factors, k, j).map(rational_to_f64)
}

/// All four moments of the single-orbit design `ξ̄_k`.
pub fn orbit_moments(k_factors: usize, k: usize) -> Result<MomentSet> {
    Ok(Moments {
        m1: orbit_moment(k_factors, k, 1)?,
        m2: orbit_moment(k_factors, k, 2)?,
        m3: orbit_moment(k_factors, k, 3)?,
        m4: orbit_moment(k_factors, k, 4)?,
    })
}

/// Moments of a mixture, linear in the orbit weights. Symmetric designs
/// return `m1 = m3 = 0` exactly.
pub fn design_moments(design: &OrbitDesign) -> MomentSet {
    let kf = design.k_factors();
    let mut m = MomentSet::zero();
    for (k, w) in design.orbit_weights() {
        let om = orbit_moments(kf, k).expect("support lies in 0..=K");
        m.m1 += w * om.m1;
        m.m2 += w * om.m2;
        m.m3 += w * om.m3;
        m.m4 += w * om.m4;
    }
    if design.is_symmetric() {
        m.m1 = 0.0;
        m.m3 = 0.0;
    }
    m
}

/// Moments of an exact design, in rational arithmetic.
pub fn exact_design_moments(design: &ExactDesign) -> Moments<Rational> {
    let kf = design.k_factors();
    let mut m = Moments::<Rational>::zero();
    for (k, w) in design.iter() {
        for j in 1..=4 {
            let v = w * orbit_moment_exact(kf, k, j).expect("support lies in 0..=K");
            match j {
                1 => m.m1 += v,
                2 => m.m2 += v,
                3 => m.m3 += v,
                _ => m.m4 += v,
            }
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbit::enumerate_orbit;

    fn r(n: i128, d: i128) -> Rational {
        Rational::new(n, d)
    }

    /// Mean of x_1 x_2 ... x_j over O_k by enumeration.
    fn brute_moment(kf: usize, k: usize, j: usize) -> Rational {
        if j > kf {
            return Rational::zero();
        }
        let mut sum = 0i128;
        let mut count = 0i128;
        for x in enumerate_orbit(kf, k).unwrap() {
            sum += x.entries()[..j]
                .iter()
                .map(|&e| e as i128)
                .product::<i128>();
            count += 1;
        }
        r(sum, count)
    }

    #[test]
    fn all_low_orbit() {
        let got: Vec<f64> = (1..=4).map(|j| orbit_moment(6, 0, j).unwrap()).collect();
        assert_eq!(got, vec![-1.0, 1.0, -1.0, 1.0]);
    }

    #[test]
    fn orbit_two_of_six() {
        assert_eq!(orbit_moment_exact(6, 2, 1).unwrap(), r(-1, 3));
        assert_eq!(orbit_moment_exact(6, 2, 2).unwrap(), r(-1, 15));
        assert_eq!(orbit_moment_exact(6, 2, 3).unwrap(), r(1, 5));
        assert_eq!(orbit_moment_exact(6, 2, 4).unwrap(), r(-1, 15));
        for j in 1..=4 {
            assert_eq!(orbit_moment_exact(6, 2, j).unwrap(), brute_moment(6, 2, j));
        }
    }

    #[test]
    fn central_orbit_first_moment_vanishes() {
        for kf in (2..=22).step_by(2) {
            assert_eq!(orbit_moment(kf, kf / 2, 1).unwrap(), 0.0);
        }
    }

    #[test]
    fn orders_beyond_k_are_zero() {
        assert_eq!(orbit_moment(3, 1, 4).unwrap(), 0.0);
        assert_eq!(orbit_moment(2, 1, 3).unwrap(), 0.0);
        assert_eq!(orbit_moment_alternating(1, 0, 2).unwrap(), Rational::zero());
    }

    #[test]
    fn bad_arguments() {
        assert!(orbit_moment(6, 7, 1).is_err());
        assert!(orbit_moment(6, 2, 0).is_err());
        assert!(orbit_moment(6, 2, 5).is_err());
        assert!(orbit_moment(0, 0, 1).is_err());
    }

    #[test]
    fn closed_form_matches_alternating_sum() {
        for kf in 1..=22 {
            for k in 0..=kf {
                for j in 1..=4 {
                    let a = orbit_moment_exact(kf, k, j).unwrap();
                    let b = orbit_moment_alternating(kf, k, j).unwrap();
                    assert_eq!(a, b, "K={kf} k={k} j={j}");
                    assert!((rational_to_f64(a) - rational_to_f64(b)).abs() <= 1e-14);
                }
            }
        }
    }

    #[test]
    fn closed_form_matches_enumeration() {
        for kf in 1..=10 {
            for k in 0..=kf {
                for j in 1..=4 {
                    let brute = brute_moment(kf, k, j);
                    assert_eq!(orbit_moment_exact(kf, k, j).unwrap(), brute);
                    assert!(
                        (orbit_moment(kf, k, j).unwrap() - rational_to_f64(brute)).abs() <= 1e-14
                    );
                }
            }
        }
    }

    #[test]
    fn reflection_symmetry() {
        for kf in 1..=12 {
            for k in 0..=kf {
                for j in 1..=4 {
                    let a = orbit_moment_exact(kf, k, j).unwrap();
                    let b = orbit_moment_exact(kf, kf - k, j).unwrap();
                    let sign = if j % 2 == 0 { 1 } else { -1 };
                    assert_eq!(b, a * Rational::from_integer(sign));
                }
            }
        }
    }

    #[test]
    fn second_moment_strictly_decreasing_to_centre() {
        for kf in 2..=22 {
            for k in 0..kf / 2 {
                assert!(
                    orbit_moment_exact(kf, k, 2).unwrap()
                        > orbit_moment_exact(kf, k + 1, 2).unwrap()
                );
            }
        }
    }

    #[test]
    fn full_factorial_moments_vanish() {
        let d = OrbitDesign::full_factorial(4).unwrap();
        let m = design_moments(&d);
        for j in 1..=4 {
            assert!(m.get(j).abs() < 1e-15);
        }
        let e = exact_design_moments(&ExactDesign::full_factorial(4).unwrap());
        assert_eq!(e, Moments::zero());
    }

    #[test]
    fn half_fraction_of_six_has_zero_moments() {
        let e = ExactDesign::new(6, [(1, r(6, 32)), (3, r(20, 32)), (5, r(6, 32))]).unwrap();
        assert_eq!(exact_design_moments(&e), Moments::zero());
        let d = e.to_orbit_design().unwrap();
        assert_eq!(design_moments(&d), MomentSet::zero());
    }

    #[test]
    fn worked_example_moments_match_enumeration() {
        let w2 = 0.3865;
        let w3 = 1.0 - 2.0 * w2;
        let d = OrbitDesign::symmetric(6, [(2, w2), (3, w3)]).unwrap();
        let m = design_moments(&d);
        let expect_m2 = 2.0 * w2 * (-1.0 / 15.0) + w3 * (-1.0 / 5.0);
        assert!((m.m2 - expect_m2).abs() < 1e-15);
        // brute force over the 50 points of O2 ∪ O3 ∪ O4
        let mut m2 = 0.0;
        let mut m4 = 0.0;
        for (k, w) in d.orbit_weights() {
            let pts: Vec<_> = enumerate_orbit(6, k).unwrap().collect();
            let pw = w / pts.len() as f64;
            for x in &pts {
                let e = x.entries();
                m2 += pw * (e[0] * e[1]) as f64;
                m4 += pw * (e[0] * e[1] * e[2] * e[3]) as f64;
            }
        }
        assert!((m.m2 - m2).abs() < 1e-14);
        assert!((m.m4 - m4).abs() < 1e-14);
    }
}
