//! Prime-field arithmetic, univariate polynomials over `F_p`, and the
//! deterministic selection of primes and irreducible polynomials that pins
//! down every tower built by this crate.

use crate::error::{Error, Result};

/// The prime field `F_p` with residues stored as `u32`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u32,
}

impl PrimeField {
    pub fn new(p: u32) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(Error::InvalidParameter(format!("{p} is not prime")));
        }
        Ok(Self { p })
    }

    /// Skips the primality check; for moduli validated elsewhere.
    pub(crate) fn new_unchecked(p: u32) -> Self {
        Self { p }
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn reduce(&self, x: u64) -> u32 {
        (x % self.p as u64) as u32
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        let s = a as u64 + b as u64;
        if s >= self.p as u64 {
            (s - self.p as u64) as u32
        } else {
            s as u32
        }
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            (a as u64 + self.p as u64 - b as u64) as u32
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    pub fn pow(&self, mut base: u32, mut e: u64) -> u32 {
        let mut acc = 1 % self.p;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: u32) -> Result<u32> {
        if a.is_multiple_of(self.p) {
            return Err(Error::ZeroDivision);
        }
        Ok(self.pow(a, self.p as u64 - 2))
    }
}

/// Polynomial over `F_p`, constant term first, trailing zeros trimmed.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PrimeFieldPoly {
    p: u32,
    coeffs: Vec<u32>,
}

impl PrimeFieldPoly {
    /// Builds a polynomial, reducing coefficients mod `p` and trimming.
    pub fn new(p: u32, coeffs: Vec<u32>) -> Self {
        let mut coeffs: Vec<u32> = coeffs.into_iter().map(|c| c % p).collect();
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Self { p, coeffs }
    }

    pub fn zero(p: u32) -> Self {
        Self { p, coeffs: Vec::new() }
    }

    pub fn x(p: u32) -> Self {
        Self::new(p, vec![0, 1])
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    /// Coefficient of `x^i` (zero past the degree).
    pub fn coeff(&self, i: usize) -> u32 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last() == Some(&1)
    }

    fn field(&self) -> PrimeField {
        PrimeField { p: self.p }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let f = self.field();
        let len = self.coeffs.len().max(other.coeffs.len());
        let c = (0..len).map(|i| f.sub(self.coeff(i), other.coeff(i))).collect();
        Self::new(self.p, c)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.p);
        }
        let f = self.field();
        let mut out = vec![0u32; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(a, b));
            }
        }
        Self::new(self.p, out)
    }

    /// Remainder of division by a nonzero polynomial.
    pub fn rem(&self, modulus: &Self) -> Result<Self> {
        let md = modulus.degree().ok_or(Error::ZeroDivision)?;
        let f = self.field();
        let lead_inv = f.inv(modulus.coeffs[md])?;
        let mut r = self.coeffs.clone();
        while r.len() > md {
            let top = r.len() - 1;
            let c = f.mul(r[top], lead_inv);
            if c != 0 {
                let shift = top - md;
                for (j, &m) in modulus.coeffs.iter().enumerate() {
                    r[shift + j] = f.sub(r[shift + j], f.mul(c, m));
                }
            }
            r.pop();
            while r.last() == Some(&0) {
                r.pop();
            }
        }
        Ok(Self::new(self.p, r))
    }

    pub fn mul_mod(&self, other: &Self, modulus: &Self) -> Result<Self> {
        self.mul(other).rem(modulus)
    }

    pub fn pow_mod(&self, mut e: u64, modulus: &Self) -> Result<Self> {
        let mut acc = Self::new(self.p, vec![1]).rem(modulus)?;
        let mut base = self.rem(modulus)?;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_mod(&base, modulus)?;
            }
            base = base.mul_mod(&base, modulus)?;
            e >>= 1;
        }
        Ok(acc)
    }

    /// Monic greatest common divisor (zero if both are zero).
    pub fn gcd(&self, other: &Self) -> Result<Self> {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b)?;
            a = b;
            b = r;
        }
        if let Some(d) = a.degree() {
            let f = self.field();
            let inv = f.inv(a.coeffs[d])?;
            let c = a.coeffs.iter().map(|&c| f.mul(c, inv)).collect();
            a = Self::new(self.p, c);
        }
        Ok(a)
    }

    /// Evaluates at a residue.
    pub fn eval(&self, x: u32) -> u32 {
        let f = self.field();
        self.coeffs.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, x), c))
    }
}

impl std::fmt::Display for PrimeFieldPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, "+")?;
            }
            first = false;
            match (i, c) {
                (0, c) => write!(f, "{c}")?,
                (1, 1) => write!(f, "x")?,
                (1, c) => write!(f, "{c}x")?,
                (i, 1) => write!(f, "x^{i}")?,
                (i, c) => write!(f, "{c}x^{i}")?,
            }
        }
        Ok(())
    }
}

fn is_prime(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= q {
        if q.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_divisors(mut m: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= m {
        if m.is_multiple_of(d) {
            out.push(d);
            while m.is_multiple_of(d) {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}

/// The `count` smallest primes congruent to 1 modulo `modulus`, ascending.
///
/// Candidates are scanned in blocks of the progression `1 + m*modulus`,
/// growing the block until enough primes are found.
pub fn select_primes(count: usize, modulus: u64) -> Result<Vec<u64>> {
    if modulus == 0 {
        return Err(Error::InvalidParameter("modulus must be at least 1".into()));
    }
    let mut out = Vec::with_capacity(count);
    let mut m = 1u64;
    let mut block = 64u64;
    while out.len() < count {
        for step in m..m + block {
            let q = modulus
                .checked_mul(step)
                .and_then(|v| v.checked_add(1))
                .ok_or_else(|| Error::InvalidParameter("prime search overflowed".into()))?;
            if is_prime(q) {
                out.push(q);
                if out.len() == count {
                    break;
                }
            }
        }
        m += block;
        block *= 2;
    }
    Ok(out)
}

/// Rabin's irreducibility test.
pub fn is_irreducible(f: &PrimeFieldPoly) -> Result<bool> {
    let d = match f.degree() {
        Some(d) if d >= 1 && f.is_monic() => d,
        _ => return Err(Error::NotMonic),
    };
    if d == 1 {
        return Ok(true);
    }
    let p = f.p();
    let x = PrimeFieldPoly::x(p);
    // frob[j] = x^(p^j) mod f
    let mut frob = vec![x.rem(f)?];
    for _ in 0..d {
        let next = frob.last().unwrap().pow_mod(p as u64, f)?;
        frob.push(next);
    }
    if frob[d] != x.rem(f)? {
        return Ok(false);
    }
    for q in prime_divisors(d) {
        let h = frob[d / q].sub(&x);
        if h.gcd(f)?.degree() != Some(0) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The monic irreducible of the given degree with the smallest encoding,
/// where the non-leading coefficients are read as a base-`p` integer with
/// the constant term as least significant digit.
pub fn find_irreducible(p: u32, degree: usize) -> Result<PrimeFieldPoly> {
    PrimeField::new(p)?;
    if degree == 0 {
        return Err(Error::InvalidParameter("degree must be at least 1".into()));
    }
    let mut digits = vec![0u32; degree];
    loop {
        let mut coeffs = digits.clone();
        coeffs.push(1);
        let f = PrimeFieldPoly::new(p, coeffs);
        if is_irreducible(&f)? {
            return Ok(f);
        }
        // increment the base-p counter, constant term first
        let mut i = 0;
        loop {
            if i == degree {
                // every monic polynomial of this degree was reducible; impossible over a field
                return Err(Error::InvalidParameter(format!("no irreducible of degree {degree} over F_{p}")));
            }
            digits[i] += 1;
            if digits[i] == p {
                digits[i] = 0;
                i += 1;
            } else {
                break;
            }
        }
    }
}

/// Power sums `S_0..=S_upto` of the roots of a monic irreducible `f`,
/// via Newton's identities. `S_0 = deg f mod p`.
pub fn power_sums(f: &PrimeFieldPoly, upto: usize) -> Result<Vec<u32>> {
    if !is_irreducible(f)? {
        return Err(Error::Reducible(f.p()));
    }
    Ok(newton_power_sums(f, upto))
}

/// Newton's identities without the irreducibility check (caller guarantees it).
pub(crate) fn newton_power_sums(f: &PrimeFieldPoly, upto: usize) -> Vec<u32> {
    let fld = PrimeField { p: f.p() };
    let d = f.degree().expect("nonzero polynomial");
    // monic: x^d + a_{d-1} x^{d-1} + ... + a_0, with a_j = coeff(j)
    let mut s = Vec::with_capacity(upto + 1);
    s.push(fld.reduce(d as u64));
    for e in 1..=upto {
        let mut acc = 0u32;
        let lo = e.saturating_sub(d);
        for (i, &si) in s.iter().enumerate().take(e).skip(lo.max(1)) {
            // a_{d-(e-i)} * S_i
            let a = f.coeff(d - (e - i));
            acc = fld.add(acc, fld.mul(a, si));
        }
        // past the degree the recurrence is homogeneous (the loop already reaches a_0)
        if e <= d {
            let a = f.coeff(d - e);
            acc = fld.add(acc, fld.mul(fld.reduce(e as u64), a));
        }
        s.push(fld.neg(acc));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(p: u32, c: &[u32]) -> PrimeFieldPoly {
        PrimeFieldPoly::new(p, c.to_vec())
    }

    /// Independent oracle: primes by plain trial division over the progression.
    fn sieve_oracle(count: usize, modulus: u64) -> Vec<u64> {
        (2u64..).filter(|q| q % modulus == 1 % modulus && (2..*q).all(|d| q % d != 0)).take(count).collect()
    }

    #[test]
    fn select_primes_examples() {
        assert_eq!(select_primes(3, 2).unwrap(), vec![3, 5, 7]);
        assert_eq!(select_primes(4, 6).unwrap(), sieve_oracle(4, 6));
        assert_eq!(select_primes(4, 6).unwrap(), vec![7, 13, 19, 31]);
        assert!(select_primes(0, 24).unwrap().is_empty());
        assert_eq!(select_primes(4, 1).unwrap(), vec![2, 3, 5, 7]);
        assert!(select_primes(1, 0).is_err());
    }

    #[test]
    fn select_primes_matches_oracle() {
        for modulus in [1u64, 2, 4, 6, 24, 120] {
            assert_eq!(select_primes(7, modulus).unwrap(), sieve_oracle(7, modulus));
        }
    }

    #[test]
    fn irreducibility_examples() {
        assert!(!is_irreducible(&poly(2, &[1, 0, 1])).unwrap());
        assert!(is_irreducible(&poly(2, &[1, 1, 0, 1])).unwrap());
        assert!(is_irreducible(&poly(2, &[0, 1])).unwrap());
        assert!(is_irreducible(&poly(2, &[1])).is_err());
        assert!(is_irreducible(&poly(3, &[2, 1])).unwrap());
        assert!(is_irreducible(&poly(3, &[0, 1, 2])).is_err());
    }

    /// Exhaustive oracle: f is irreducible iff no monic factor of degree <= d/2 divides it.
    fn irreducible_oracle(f: &PrimeFieldPoly) -> bool {
        let p = f.p();
        let d = f.degree().unwrap();
        for g_deg in 1..=d / 2 {
            let total = (p as usize).pow(g_deg as u32);
            for code in 0..total {
                let mut c = Vec::new();
                let mut v = code;
                for _ in 0..g_deg {
                    c.push((v % p as usize) as u32);
                    v /= p as usize;
                }
                c.push(1);
                if f.rem(&PrimeFieldPoly::new(p, c)).unwrap().is_zero() {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn rabin_agrees_with_exhaustive_search() {
        for (p, dmax) in [(2u32, 8usize), (3, 5), (5, 3)] {
            for d in 1..=dmax {
                let total = (p as usize).pow(d as u32);
                for code in 0..total {
                    let mut c = Vec::new();
                    let mut v = code;
                    for _ in 0..d {
                        c.push((v % p as usize) as u32);
                        v /= p as usize;
                    }
                    c.push(1);
                    let f = PrimeFieldPoly::new(p, c);
                    assert_eq!(is_irreducible(&f).unwrap(), irreducible_oracle(&f), "{f}");
                }
            }
        }
    }

    #[test]
    fn find_irreducible_examples() {
        assert_eq!(find_irreducible(2, 2).unwrap(), poly(2, &[1, 1, 1]));
        assert_eq!(find_irreducible(2, 3).unwrap(), poly(2, &[1, 1, 0, 1]));
        assert_eq!(find_irreducible(2, 1).unwrap(), poly(2, &[0, 1]));
        assert_eq!(find_irreducible(2, 6).unwrap(), poly(2, &[1, 1, 0, 0, 0, 0, 1]));
    }

    #[test]
    fn find_irreducible_is_minimal() {
        for (p, d) in [(2u32, 5usize), (2, 7), (3, 3), (5, 2)] {
            let f = find_irreducible(p, d).unwrap();
            let encode = |g: &PrimeFieldPoly| (0..d).rev().fold(0u64, |acc, i| acc * p as u64 + g.coeff(i) as u64);
            let target = encode(&f);
            for code in 0..target {
                let mut c = Vec::new();
                let mut v = code;
                for _ in 0..d {
                    c.push((v % p as u64) as u32);
                    v /= p as u64;
                }
                c.push(1);
                assert!(!is_irreducible(&PrimeFieldPoly::new(p, c)).unwrap());
            }
        }
    }

    #[test]
    fn power_sum_examples() {
        assert_eq!(power_sums(&poly(2, &[1, 1, 0, 1]), 1).unwrap(), vec![1, 0]);
        assert_eq!(power_sums(&poly(2, &[1, 1, 1]), 2).unwrap(), vec![0, 1, 1]);
        assert_eq!(power_sums(&poly(2, &[1, 1, 0, 1]), 0).unwrap(), vec![1]);
        assert!(power_sums(&poly(2, &[1, 0, 1]), 3).is_err());
    }

    /// Brute-force root power sums: the roots of f in F_p[x]/(f) are x^(p^i),
    /// and their e-th powers summed give a constant polynomial.
    fn brute_power_sums(f: &PrimeFieldPoly, upto: usize) -> Vec<u32> {
        let p = f.p();
        let d = f.degree().unwrap();
        let fld = PrimeField::new(p).unwrap();
        let mut roots = vec![PrimeFieldPoly::x(p)];
        for _ in 1..d {
            let r = roots.last().unwrap().pow_mod(p as u64, f).unwrap();
            roots.push(r);
        }
        (0..=upto)
            .map(|e| {
                let mut acc = PrimeFieldPoly::zero(p);
                for r in &roots {
                    let term = r.pow_mod(e as u64, f).unwrap();
                    let len = acc.coeffs().len().max(term.coeffs().len());
                    let c = (0..len).map(|i| fld.add(acc.coeff(i), term.coeff(i))).collect();
                    acc = PrimeFieldPoly::new(p, c);
                }
                assert!(acc.degree().unwrap_or(0) == 0, "power sum must lie in F_p");
                acc.coeff(0)
            })
            .collect()
    }

    #[test]
    fn newton_matches_brute_force_roots() {
        for (p, dmax) in [(2u32, 8usize), (3, 6), (5, 4), (7, 3)] {
            for d in 1..=dmax {
                let f = find_irreducible(p, d).unwrap();
                assert_eq!(power_sums(&f, 2 * d + 3).unwrap(), brute_power_sums(&f, 2 * d + 3));
            }
        }
    }

    #[test]
    fn odd_degree_binary_trace_of_one() {
        for d in [1usize, 3, 5, 7, 9, 11] {
            let f = find_irreducible(2, d).unwrap();
            assert_eq!(power_sums(&f, 0).unwrap()[0], 1);
        }
    }

    #[test]
    fn prime_field_ops() {
        let f = PrimeField::new(5).unwrap();
        assert_eq!(f.inv(2).unwrap(), 3);
        assert_eq!(f.inv(4).unwrap(), 4);
        assert!(f.inv(0).is_err());
        assert_eq!(f.sub(1, 3), 3);
        assert!(PrimeField::new(6).is_err());
    }
}
