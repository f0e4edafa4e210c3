//! Lifted eigenvalues of `A` modulo `p^k` with their orders and Korobov
//! exponents.

use crate::arith::{self, inv_mod, max_exponent, mul_mod, PrimePowerModulus};
use crate::error::{CatError, Result};
use crate::symplectic::{char_poly, SymplecticMatrix};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectralData {
    p: u64,
    k: u32,
    d: usize,
    /// Eigenvalues modulo `p^k`, ordered by their residue modulo `p`.
    pub lambdas: Vec<u64>,
    /// The same eigenvalues to the maximal supported precision.
    precise: Vec<u64>,
    pub orders: Vec<u64>,
    pub gammas: Vec<u32>,
    /// `(i, j, gamma_ij)` for the ratios `lambda_i / lambda_j`, `i != j`.
    pub ratio_gammas: Vec<(usize, usize, u32)>,
    pub gamma_max: u32,
}

impl SpectralData {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Eigenvalues reduced modulo `p^r`, `r <= k`.
    pub fn lambdas_mod(&self, r: u32) -> Result<Vec<u64>> {
        if r > self.k {
            return Err(CatError::PrecisionExceeded { r, k: self.k });
        }
        let m = self.p.pow(r);
        Ok(self.lambdas.iter().map(|&l| l % m).collect())
    }

    /// `ord(lambda_i, p^r)` for each eigenvalue.
    pub fn orders_mod(&self, r: u32) -> Result<Vec<u64>> {
        if r > self.k {
            return Err(CatError::PrecisionExceeded { r, k: self.k });
        }
        if r == 0 {
            return Ok(vec![1; self.lambdas.len()]);
        }
        self.precise.iter().map(|&l| arith::mult_order(l as i128, self.p, r)).collect()
    }
}

/// Eigenvalue data for a good prime `p`.
pub fn spectral_data(a: &SymplecticMatrix, p: u64, k: u32) -> Result<SpectralData> {
    let ctx = PrimePowerModulus::new(p, k)?;
    let f = char_poly(a);
    let disc = arith::poly_discriminant(&f)?;
    if p <= 2 * a.d() as u64 || disc % p as i128 == 0 || !arith::splits_completely(&f, p) {
        return Err(CatError::NotGoodPrime { p });
    }
    let kmax = max_exponent(p);
    let big = p.pow(kmax);
    let precise = arith::hensel_lift_roots(&f, p, kmax)?;
    let lambdas: Vec<u64> = precise.iter().map(|&l| l % ctx.n()).collect();
    let orders = precise.iter().map(|&l| arith::mult_order(l as i128, p, k)).collect::<Result<Vec<_>>>()?;
    let gammas = precise.iter().map(|&l| arith::korobov_gamma(l as i128, p)).collect::<Result<Vec<_>>>()?;
    let mut ratio_gammas = Vec::new();
    for (i, &li) in precise.iter().enumerate() {
        for (j, &lj) in precise.iter().enumerate() {
            if i != j {
                let rho = mul_mod(li, inv_mod(lj, big).expect("eigenvalues are units"), big);
                ratio_gammas.push((i, j, arith::korobov_gamma(rho as i128, p)?));
            }
        }
    }
    let gamma_max = gammas.iter().copied().chain(ratio_gammas.iter().map(|g| g.2)).max().unwrap_or(0);
    Ok(SpectralData { p, k, d: a.d(), lambdas, precise, orders, gammas, ratio_gammas, gamma_max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn a2_examples() {
        let sd = spectral_data(&fixtures::a2(), 5, 2).unwrap();
        let mut l = sd.lambdas.clone();
        l.sort_unstable();
        assert_eq!(l, vec![12, 23]);
        assert_eq!(sd.orders, vec![20, 20]);
        assert_eq!(sd.gammas, vec![1, 1]);
        assert!(sd.ratio_gammas.iter().all(|g| g.2 == 1));
        assert_eq!(sd.gamma_max, 1);
        assert_eq!(sd.lambdas_mod(1).unwrap(), vec![2, 3]);
        assert_eq!(sd.orders_mod(1).unwrap(), vec![4, 4]);
        assert!(matches!(sd.lambdas_mod(3), Err(CatError::PrecisionExceeded { r: 3, k: 2 })));
    }

    #[test]
    fn bad_prime() {
        assert_eq!(spectral_data(&fixtures::a2(), 7, 1), Err(CatError::NotGoodPrime { p: 7 }));
    }

    #[test]
    fn orders_follow_gamma() {
        for (a, p) in [(fixtures::a1(), 7u64), (fixtures::a2(), 19), (fixtures::d2(), 101)] {
            let sd = spectral_data(&a, p, 4).unwrap();
            for (i, &o) in sd.orders.iter().enumerate() {
                let o1 = sd.orders_mod(1).unwrap()[i];
                let g = sd.gammas[i];
                if 4 >= g {
                    assert_eq!(o, o1 * p.pow(4 - g));
                }
            }
        }
    }
}
