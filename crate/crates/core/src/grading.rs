//! Index, degree and parity formulas for Reeb orbits and moduli spaces.

use serde::Serialize;

use crate::error::{Result, SftError};
use crate::superpoly::{int, Parity, Scalar};

/// Grading data of a single orbit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct OrbitGradingData {
    pub cz: i64,
    pub multiplicity: u32,
    /// Total multiplicity of return-map eigenvalues in `(-1, 0)`.
    pub return_map_neg_eigen_mult: u32,
    pub n: i64,
}

/// Expected dimension of a moduli space of curves with `s+` positive and `s-` negative punctures.
pub fn moduli_dim(cz_plus: &[i64], cz_minus: &[i64], g: i64, r: i64, c1_of_a: i64, n: i64) -> i64 {
    let s = (cz_plus.len() + cz_minus.len()) as i64;
    cz_plus.iter().sum::<i64>() - cz_minus.iter().sum::<i64>() + (n - 3) * (2 - 2 * g - s) + 2 * c1_of_a + 2 * r
}

/// Cotangent-bundle variant: Morse indices of geodesics replace the CZ indices, no negative ends.
pub fn moduli_dim_morse(morse: &[i64], g: i64, n: i64) -> i64 {
    moduli_dim(morse, &[], g, 0, 0, n)
}

/// `(deg p, deg q)` of an orbit with the given CZ index.
pub fn degrees_pq(cz: i64, n: i64) -> (i64, i64) {
    (-cz + n - 3, cz + n - 3)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BottDegrees {
    pub p: Scalar,
    pub q: Scalar,
    pub t: Scalar,
    pub tau: Scalar,
}

/// Degrees of `p_{k,i}`, `q_{k,i}`, `t_i`, `tau_i` for a base class of degree `delta_deg`,
/// with `c = c1(A0) / l`.
pub fn bott_degrees(k: i64, delta_deg: i64, c1_a0: i64, l: i64) -> Result<BottDegrees> {
    if k < 1 {
        return Err(SftError::Range(format!("orbit multiplicity must be positive, got {k}")));
    }
    if l < 1 {
        return Err(SftError::Range(format!("fiber order must be positive, got {l}")));
    }
    let c = Scalar::new(c1_a0.into(), l.into());
    let shift = int(2 * k) * c;
    let base = int(delta_deg - 2);
    Ok(BottDegrees { p: &base - &shift, q: &base + &shift, t: base, tau: int(delta_deg - 1) })
}

/// Fractional degree `CZ - 2m / l` of an orbit in a torsion class.
pub fn fractional_degree(cz_g: i64, maslov_correction_2m: i64, l: i64) -> Result<Scalar> {
    if l < 1 {
        return Err(SftError::Range(format!("torsion order must be positive, got {l}")));
    }
    Ok(int(cz_g) - Scalar::new(maslov_correction_2m.into(), l.into()))
}

/// Parity of the CZ index from the sign of `det(I - A)`.
pub fn parity_from_return_map(n: i64, det_sign: i8) -> Result<Parity> {
    if det_sign == 0 {
        return Err(SftError::Validation("degenerate orbit: det(I - A) = 0".into()));
    }
    let n_minus_one_odd = (n - 1).rem_euclid(2) == 1;
    Ok(Parity::from_odd(n_minus_one_odd != (det_sign < 0)))
}

/// Whether the `multiple`-fold cover of the orbit is bad.
pub fn is_bad_even_multiple(data: &OrbitGradingData, multiple: u32) -> bool {
    multiple % 2 == 0 && data.return_map_neg_eigen_mult % 2 == 1
}

/// Brieskorn value `c_k` together with every `N` realising the exceptional case.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BrieskornValue {
    pub k: i64,
    pub c_k: u32,
    pub witnesses: Vec<i64>,
    /// Set when more than one clause or more than one `N` applies.
    pub collision: bool,
}

fn brieskorn_exceptional(p: i64, n: i64, big_n: i64) -> Option<i64> {
    if (2 * big_n + 1) % p == 0 {
        return None;
    }
    Some(2 * (2 * big_n).div_euclid(p) + 2 * (big_n + 1) * (n - 2))
}

fn check_brieskorn(p: i64, n: i64) -> Result<()> {
    if p.rem_euclid(8) != 1 || p < 1 {
        return Err(SftError::Validation(format!("p = {p} is not 1 mod 8")));
    }
    if n % 2 == 0 || n < 3 {
        return Err(SftError::Validation(format!("n = {n} must be odd and at least 3")));
    }
    Ok(())
}

/// Dimension of the contact homology group of degree `k` for the Brieskorn sphere
/// `Sigma(2, ..., 2, p)`, evaluated clause by clause.
pub fn brieskorn_ck(p: i64, n: i64, k: i64) -> Result<BrieskornValue> {
    check_brieskorn(p, n)?;
    let mut witnesses = Vec::new();
    if k % 2 == 0 && k >= 2 {
        // k/2 = floor(2N/p) + (N+1)(n-2) pins N to a short interval
        let m = k / 2;
        let lo = ((m - (n - 2)) * p).div_euclid((n - 2) * p + 2).max(1);
        let hi = m / (n - 2) - 1;
        for big_n in lo..=hi {
            if brieskorn_exceptional(p, n, big_n) == Some(k) {
                witnesses.push(big_n);
            }
        }
    }
    let zero_clause = k % 2 != 0 || k < 2 * n - 4;
    let collision = witnesses.len() > 1 || (zero_clause && !witnesses.is_empty());
    let c_k = if zero_clause {
        0
    } else if !witnesses.is_empty() {
        2
    } else {
        1
    };
    Ok(BrieskornValue { k, c_k, witnesses, collision })
}

/// Degrees of the generators `q_{i,j}` of a subcritical Stein filling, `1 <= i <= i_max`.
pub fn yau_generators(n: i64, homology_dims: &[(String, i64)], i_max: i64) -> Result<Vec<(String, i64)>> {
    if let Some((name, d)) = homology_dims.iter().find(|(_, d)| *d >= n || *d < 0) {
        return Err(SftError::Validation(format!("class {name} of dimension {d} is not subcritical for n = {n}")));
    }
    let mut out = Vec::new();
    for i in 1..=i_max {
        for (name, d) in homology_dims {
            out.push((format!("q_{{{i},{name}}}"), 2 * (n + i - 2) - d));
        }
    }
    Ok(out)
}

/// Contact homology degrees of the ellipsoid: one orbit with `CZ = n + 2i - 1` per `i >= 1`.
pub fn ellipsoid_degrees(n: i64, count: i64) -> Vec<i64> {
    (1..=count).map(|i| degrees_pq(n + 2 * i - 1, n).1).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::superpoly::rat;

    #[test]
    fn dimension_examples() {
        assert_eq!(moduli_dim(&[3], &[], 0, 0, 0, 2), 2);
        assert_eq!(moduli_dim(&[], &[], 1, 0, 0, 4), 0);
        assert_eq!(moduli_dim_morse(&[1, 2], 0, 3), 3);
    }

    #[test]
    fn pq_examples() {
        assert_eq!(degrees_pq(3, 2), (-4, 2));
        assert_eq!(degrees_pq(0, 5), (2, 2));
        let (p, q) = degrees_pq(7, 3);
        assert_eq!(p + q, 0);
    }

    #[test]
    fn bott_examples() {
        let d = bott_degrees(1, 0, 2, 1).unwrap();
        assert_eq!((d.p, d.q), (int(-6), int(2)));
        assert_eq!(bott_degrees(3, 0, 2, 1).unwrap().q, int(10));
        assert_eq!(bott_degrees(3, 0, 2, 2).unwrap().q, int(4));
        assert_eq!(bott_degrees(1, 0, 3, 2).unwrap().q, rat(1, 1));
        assert!(matches!(bott_degrees(0, 0, 2, 1), Err(SftError::Range(_))));
    }

    #[test]
    fn fractional_and_parity() {
        assert_eq!(fractional_degree(5, 0, 3).unwrap(), int(5));
        assert_eq!(fractional_degree(5, 4, 1).unwrap(), int(1));
        assert_eq!(fractional_degree(5, 2, 2).unwrap(), int(4));
        assert_eq!(parity_from_return_map(2, 1).unwrap(), Parity::Odd);
        assert_eq!(parity_from_return_map(3, 1).unwrap(), Parity::Even);
        assert_eq!(parity_from_return_map(3, -1).unwrap(), Parity::Odd);
    }

    #[test]
    fn bad_orbits() {
        let d = OrbitGradingData { cz: 2, multiplicity: 1, return_map_neg_eigen_mult: 1, n: 2 };
        assert!(is_bad_even_multiple(&d, 2));
        assert!(!is_bad_even_multiple(&d, 3));
        let e = OrbitGradingData { return_map_neg_eigen_mult: 2, ..d };
        assert!(!is_bad_even_multiple(&e, 2));
    }

    #[test]
    fn brieskorn_clauses() {
        assert_eq!(brieskorn_ck(9, 5, 7).unwrap().c_k, 0);
        assert_eq!(brieskorn_ck(9, 5, 4).unwrap().c_k, 0);
        // N = 1: 2*floor(2/9) + 2*2*3 = 12
        let v = brieskorn_ck(9, 5, 12).unwrap();
        assert_eq!((v.c_k, v.witnesses.clone()), (2, vec![1]));
        assert_eq!(brieskorn_ck(9, 5, 8).unwrap().c_k, 1);
        assert!(brieskorn_ck(7, 5, 8).is_err());
        assert!(brieskorn_ck(9, 4, 8).is_err());
    }

    #[test]
    fn yau_and_ellipsoid() {
        let g = yau_generators(2, &[("pt".into(), 0)], 3).unwrap();
        assert_eq!(g.iter().map(|x| x.1).collect::<Vec<_>>(), vec![2, 4, 6]);
        assert_eq!(ellipsoid_degrees(2, 3), vec![2, 4, 6]);
        assert!(yau_generators(2, &[("x".into(), 2)], 1).is_err());
        assert!(yau_generators(3, &[], 4).unwrap().is_empty());
    }
}
