//! Exact arithmetic in GF(p^k) for odd prime powers q = p^k <= 2^16.
//!
//! An element is stored as its canonical index in [0, q): the base-p digits
//! of the index, least significant first, are the coefficients of the
//! polynomial-basis representation (constant term first). All arithmetic
//! goes through the owning [`Field`], which carries the irreducible modulus.

use thiserror::Error;

/// Largest supported field order; keeps every intermediate product in a u64.
pub const MAX_Q: u64 = 1 << 16;

/// Largest supported extension degree (3^10 is the deepest tower under MAX_Q).
pub const MAX_K: usize = 10;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FfError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("characteristic {0} is even; an odd prime power is required")]
    EvenCharacteristic(u64),
    #[error("p={p}, k={k}: need k in [1, {MAX_K}] and p^k <= {MAX_Q}")]
    DegreeOutOfRange { p: u64, k: usize },
    #[error("requested {requested} nonsquares, field has only {available}")]
    NotEnoughNonsquares { requested: usize, available: usize },
    #[error("division by zero")]
    DivisionByZero,
    #[error("element index {0} out of range for field of order {1}")]
    ElementOutOfRange(u64, u64),
    #[error("bad coefficient vector {0:?}")]
    BadElement(Vec<u64>),
    #[error("modulus {0:?} is not a monic irreducible of the stated degree")]
    BadModulus(Vec<u64>),
    #[error("element does not belong to this field")]
    FieldMismatch,
}

/// An element of GF(p^k), identified by its canonical index in [0, q).
///
/// The index order (0, 1, ..., q-1) is the canonical element order used
/// everywhere: for "least" choices, for tie-breaking, and for enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FieldElement(pub(crate) u32);

impl FieldElement {
    pub fn index(self) -> u32 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// GF(p^k) with a fixed monic irreducible modulus of degree k.
///
/// `make_field` always chooses the canonical modulus: the monic irreducible
/// whose non-leading coefficient vector [c_0..c_{k-1}] is smallest as a
/// base-p integer (constant term least significant).
#[derive(Debug, Clone)]
pub struct Field {
    p: u64,
    k: usize,
    q: u64,
    /// k+1 coefficients, constant first, leading coefficient 1.
    modulus: Vec<u64>,
    /// xpow[i] = x^(k+i) reduced mod the modulus, for i in 0..k-1.
    xpow: Vec<Vec<u64>>,
    /// sqrt[a] = least b with b*b = a, or u32::MAX if a is a nonsquare.
    sqrt_table: Vec<u32>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.k == other.k && self.modulus == other.modulus
    }
}

impl Eq for Field {}

/// Construct GF(p^k) with the canonical (lexicographically least) modulus.
pub fn make_field(p: u64, k: usize) -> Result<Field, FfError> {
    Field::new(p, k)
}

impl Field {
    pub fn new(p: u64, k: usize) -> Result<Field, FfError> {
        check_pk(p, k)?;
        let modulus = if k == 1 {
            vec![0, 1] // x itself; never used in degree-1 arithmetic
        } else {
            canonical_modulus(p, k)
        };
        Field::from_parts_unchecked(p, k, modulus)
    }

    /// Construct GF(p^k) with an explicit modulus (validated).
    pub fn with_modulus(p: u64, k: usize, modulus: Vec<u64>) -> Result<Field, FfError> {
        check_pk(p, k)?;
        if modulus.len() != k + 1
            || modulus[k] != 1
            || modulus.iter().any(|&c| c >= p)
            || (k > 1 && !is_irreducible(p, &modulus))
        {
            return Err(FfError::BadModulus(modulus));
        }
        Field::from_parts_unchecked(p, k, modulus)
    }

    fn from_parts_unchecked(p: u64, k: usize, modulus: Vec<u64>) -> Result<Field, FfError> {
        let q = p.pow(k as u32);
        let mut field = Field {
            p,
            k,
            q,
            modulus,
            xpow: Vec::new(),
            sqrt_table: Vec::new(),
        };
        field.xpow = field.build_xpow();
        field.sqrt_table = field.build_sqrt_table();
        Ok(field)
    }

    /// x^(k+i) mod modulus for i in 0..k-1, as coefficient vectors.
    fn build_xpow(&self) -> Vec<Vec<u64>> {
        let (p, k) = (self.p, self.k);
        let mut pows = Vec::with_capacity(k.saturating_sub(1));
        if k < 2 {
            return pows;
        }
        // x^k = -(m_0 + m_1 x + ... + m_{k-1} x^{k-1})
        let base: Vec<u64> = (0..k).map(|i| (p - self.modulus[i] % p) % p).collect();
        pows.push(base);
        for _ in 1..k - 1 {
            let prev = pows.last().unwrap();
            // multiply by x, then reduce the overflowing x^k term
            let carry = prev[k - 1];
            let mut next = vec![0u64; k];
            next[1..k].copy_from_slice(&prev[..k - 1]);
            if carry != 0 {
                for i in 0..k {
                    next[i] = (next[i] + carry * pows[0][i]) % p;
                }
            }
            pows.push(next);
        }
        pows
    }

    fn build_sqrt_table(&self) -> Vec<u32> {
        let mut table = vec![u32::MAX; self.q as usize];
        for b in 0..self.q as u32 {
            let s = self.mul(FieldElement(b), FieldElement(b)).0;
            if table[s as usize] == u32::MAX {
                table[s as usize] = b;
            }
        }
        table
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// Modulus coefficients [c_0..c_k], constant first, leading 1.
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement(0)
    }

    pub fn one(&self) -> FieldElement {
        FieldElement(1)
    }

    /// The element with the given canonical index.
    pub fn element(&self, idx: u64) -> Result<FieldElement, FfError> {
        if idx < self.q {
            Ok(FieldElement(idx as u32))
        } else {
            Err(FfError::ElementOutOfRange(idx, self.q))
        }
    }

    /// In-range shorthand used where the index is known valid; panics otherwise.
    pub fn el(&self, idx: u64) -> FieldElement {
        assert!(
            idx < self.q,
            "element index {} out of range (q={})",
            idx,
            self.q
        );
        FieldElement(idx as u32)
    }

    /// n mod p, embedded as a constant polynomial.
    pub fn scalar(&self, n: u64) -> FieldElement {
        FieldElement((n % self.p) as u32)
    }

    /// All elements in canonical order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> {
        (0..self.q as u32).map(FieldElement)
    }

    pub fn contains(&self, a: FieldElement) -> bool {
        (a.0 as u64) < self.q
    }

    fn check(&self, a: FieldElement) -> Result<(), FfError> {
        if self.contains(a) {
            Ok(())
        } else {
            Err(FfError::FieldMismatch)
        }
    }

    /// Build an element from coefficients [c_0..c_{k-1}], constant first.
    pub fn from_coeffs(&self, coeffs: &[u64]) -> Result<FieldElement, FfError> {
        if coeffs.len() != self.k || coeffs.iter().any(|&c| c >= self.p) {
            return Err(FfError::BadElement(coeffs.to_vec()));
        }
        let mut idx = 0u64;
        for &c in coeffs.iter().rev() {
            idx = idx * self.p + c;
        }
        Ok(FieldElement(idx as u32))
    }

    /// Coefficients [c_0..c_{k-1}] of the element, constant first.
    pub fn coeffs(&self, a: FieldElement) -> Vec<u64> {
        let mut ds = vec![0u64; self.k];
        self.digits(a.0, &mut ds);
        ds
    }

    fn digits(&self, idx: u32, out: &mut [u64]) {
        let mut v = idx as u64;
        for d in out.iter_mut() {
            *d = v % self.p;
            v /= self.p;
        }
    }

    fn undigits(&self, ds: &[u64]) -> u32 {
        let mut idx = 0u64;
        for &d in ds.iter().rev() {
            idx = idx * self.p + d;
        }
        idx as u32
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        debug_assert!(self.contains(a) && self.contains(b));
        if self.k == 1 {
            return FieldElement(((a.0 as u64 + b.0 as u64) % self.p) as u32);
        }
        let mut da = [0u64; MAX_K];
        let mut db = [0u64; MAX_K];
        self.digits(a.0, &mut da[..self.k]);
        self.digits(b.0, &mut db[..self.k]);
        for i in 0..self.k {
            da[i] = (da[i] + db[i]) % self.p;
        }
        FieldElement(self.undigits(&da[..self.k]))
    }

    pub fn neg(&self, a: FieldElement) -> FieldElement {
        debug_assert!(self.contains(a));
        if self.k == 1 {
            return FieldElement(((self.p - a.0 as u64) % self.p) as u32);
        }
        let mut da = [0u64; MAX_K];
        self.digits(a.0, &mut da[..self.k]);
        for d in da[..self.k].iter_mut() {
            *d = (self.p - *d) % self.p;
        }
        FieldElement(self.undigits(&da[..self.k]))
    }

    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        debug_assert!(self.contains(a) && self.contains(b));
        if self.k == 1 {
            return FieldElement(((a.0 as u64 * b.0 as u64) % self.p) as u32);
        }
        let k = self.k;
        let mut da = [0u64; MAX_K];
        let mut db = [0u64; MAX_K];
        self.digits(a.0, &mut da[..k]);
        self.digits(b.0, &mut db[..k]);
        // schoolbook product; terms stay below 2^36 for p < 2^16, k <= 10
        let mut acc = [0u64; 2 * MAX_K - 1];
        for i in 0..k {
            if da[i] == 0 {
                continue;
            }
            for j in 0..k {
                acc[i + j] += da[i] * db[j];
            }
        }
        for c in acc.iter_mut() {
            *c %= self.p;
        }
        // fold x^(k+i) terms back down using the precomputed reductions
        for d in (k..2 * k - 1).rev() {
            let c = acc[d];
            if c == 0 {
                continue;
            }
            acc[d] = 0;
            let red = &self.xpow[d - k];
            for i in 0..k {
                acc[i] = (acc[i] + c * red[i]) % self.p;
            }
        }
        FieldElement(self.undigits(&acc[..k]))
    }

    pub fn pow(&self, a: FieldElement, mut e: u64) -> FieldElement {
        debug_assert!(self.contains(a));
        let mut base = a;
        let mut out = self.one();
        while e > 0 {
            if e & 1 == 1 {
                out = self.mul(out, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        out
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, FfError> {
        self.check(a)?;
        if a.is_zero() {
            return Err(FfError::DivisionByZero);
        }
        // a^(q-2) = a^(-1): the multiplicative group has order q-1
        Ok(self.pow(a, self.q - 2))
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FfError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Euler's criterion: a != 0 is a square iff a^((q-1)/2) = 1. Zero counts
    /// as a square.
    pub fn is_square(&self, a: FieldElement) -> bool {
        debug_assert!(self.contains(a));
        if a.is_zero() {
            return true;
        }
        self.pow(a, (self.q - 1) / 2) == self.one()
    }

    /// Least square root of `a` in canonical order, if one exists.
    pub fn sqrt(&self, a: FieldElement) -> Option<FieldElement> {
        debug_assert!(self.contains(a));
        let b = self.sqrt_table[a.0 as usize];
        (b != u32::MAX).then_some(FieldElement(b))
    }

    /// The first `count` nonsquares in canonical element order.
    pub fn nonsquares(&self, count: usize) -> Result<Vec<FieldElement>, FfError> {
        let available = ((self.q - 1) / 2) as usize;
        if count > available {
            return Err(FfError::NotEnoughNonsquares {
                requested: count,
                available,
            });
        }
        let mut out = Vec::with_capacity(count);
        for a in self.elements() {
            if out.len() == count {
                break;
            }
            if !self.is_square(a) {
                out.push(a);
            }
        }
        Ok(out)
    }

    /// Number of squares, zero included.
    pub fn square_count(&self) -> u64 {
        self.q.div_ceil(2)
    }

    /// Short human-readable form of an element, e.g. "4" or "[1,2]".
    pub fn format_element(&self, a: FieldElement) -> String {
        if self.k == 1 {
            format!("{}", a.0)
        } else {
            let cs: Vec<String> = self.coeffs(a).iter().map(|c| c.to_string()).collect();
            format!("[{}]", cs.join(","))
        }
    }
}

impl std::fmt::Display for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.k == 1 {
            write!(f, "GF({})", self.p)
        } else {
            write!(
                f,
                "GF({}^{}) mod {}",
                self.p,
                self.k,
                format_poly(&self.modulus)
            )
        }
    }
}

fn format_poly(coeffs: &[u64]) -> String {
    let mut terms = Vec::new();
    for (i, &c) in coeffs.iter().enumerate().rev() {
        if c == 0 {
            continue;
        }
        let t = match i {
            0 => format!("{}", c),
            1 if c == 1 => "x".to_string(),
            1 => format!("{}x", c),
            _ if c == 1 => format!("x^{}", i),
            _ => format!("{}x^{}", c, i),
        };
        terms.push(t);
    }
    if terms.is_empty() {
        "0".to_string()
    } else {
        terms.join("+")
    }
}

fn check_pk(p: u64, k: usize) -> Result<(), FfError> {
    if !is_prime(p) {
        return Err(FfError::NotPrime(p));
    }
    if p == 2 {
        return Err(FfError::EvenCharacteristic(p));
    }
    if k == 0 || k > MAX_K {
        return Err(FfError::DegreeOutOfRange { p, k });
    }
    let mut q: u64 = 1;
    for _ in 0..k {
        q = q.saturating_mul(p);
        if q > MAX_Q {
            return Err(FfError::DegreeOutOfRange { p, k });
        }
    }
    Ok(())
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Factor q as p^k with p prime, if q is a prime power.
pub fn factor_prime_power(q: u64) -> Option<(u64, usize)> {
    if q < 2 {
        return None;
    }
    let mut p = 2;
    while p * p <= q {
        if q.is_multiple_of(p) {
            let mut rest = q;
            let mut k = 0;
            while rest.is_multiple_of(p) {
                rest /= p;
                k += 1;
            }
            return (rest == 1).then_some((p, k));
        }
        p += 1;
    }
    Some((q, 1))
}

/// First monic irreducible of degree k over GF(p), scanning non-leading
/// coefficient vectors in canonical base-p order.
fn canonical_modulus(p: u64, k: usize) -> Vec<u64> {
    let total = p.pow(k as u32);
    for idx in 0..total {
        let mut poly = vec![0u64; k + 1];
        let mut v = idx;
        for c in poly.iter_mut().take(k) {
            *c = v % p;
            v /= p;
        }
        poly[k] = 1;
        if is_irreducible(p, &poly) {
            return poly;
        }
    }
    unreachable!("irreducible polynomials of every degree exist over GF(p)")
}

/// Exhaustive trial division by all monic polynomials of degree 1..=deg/2.
fn is_irreducible(p: u64, poly: &[u64]) -> bool {
    let deg = poly.len() - 1;
    if deg == 1 {
        return true;
    }
    for d in 1..=deg / 2 {
        let total = p.pow(d as u32);
        for idx in 0..total {
            let mut div = vec![0u64; d + 1];
            let mut v = idx;
            for c in div.iter_mut().take(d) {
                *c = v % p;
                v /= p;
            }
            div[d] = 1;
            if poly_rem_is_zero(p, poly, &div) {
                return false;
            }
        }
    }
    true
}

/// Remainder test for monic divisors over GF(p).
fn poly_rem_is_zero(p: u64, poly: &[u64], div: &[u64]) -> bool {
    let mut rem: Vec<u64> = poly.to_vec();
    let d = div.len() - 1;
    while rem.len() > d {
        let lead = *rem.last().unwrap() % p;
        let shift = rem.len() - 1 - d;
        if lead != 0 {
            for (i, &dc) in div.iter().enumerate().take(d + 1) {
                let idx = shift + i;
                rem[idx] = (rem[idx] + p * p - (lead * dc) % p) % p;
            }
        }
        rem.pop();
    }
    rem.iter().all(|&c| c % p == 0)
}
