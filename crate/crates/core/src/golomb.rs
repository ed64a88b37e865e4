//! Prime-field and quadratic-extension arithmetic, and the Bose-Chowla
//! construction of Sidon sets (modular Golomb rulers).
//!
//! GF(p²) is represented as GF(p)[x] / (x² + c₁x + c₀) with the
//! lexicographically smallest irreducible monic quadratic. All arithmetic is
//! exact integer arithmetic.

use crate::spatial::SensorSet;
use crate::{Error, Result};

/// Largest supported prime (exclusive).
pub const MAX_PRIME: u64 = 1 << 15;

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Distinct prime factors by trial division.
fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeField {
    p: u32,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if p >= MAX_PRIME {
            return Err(Error::PrimeTooLarge(p));
        }
        Ok(PrimeField { p: p as u32 })
    }

    pub fn modulus(&self) -> u32 {
        self.p
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        (a + b) % self.p
    }

    pub fn sub(&self, a: u32, b: u32) -> u32 {
        (a + self.p - b) % self.p
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    pub fn neg(&self, a: u32) -> u32 {
        (self.p - a) % self.p
    }
}

/// Monic quadratic `x² + c1·x + c0` over GF(p).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonicQuadratic {
    pub c1: u32,
    pub c0: u32,
}

/// Smallest `(c1, c0)` in lexicographic order such that `x² + c1 x + c0`
/// has no root in GF(p). A monic quadratic without roots is irreducible.
pub fn find_irreducible_quadratic(field: PrimeField) -> MonicQuadratic {
    let p = field.p;
    for c1 in 0..p {
        for c0 in 0..p {
            let has_root = (0..p).any(|x| {
                let v = field.add(field.add(field.mul(x, x), field.mul(c1, x)), c0);
                v == 0
            });
            if !has_root {
                return MonicQuadratic { c1, c0 };
            }
        }
    }
    unreachable!("every prime field has an irreducible quadratic")
}

/// Element `a + b·x` of GF(p²).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuadExtElement {
    pub a: u32,
    pub b: u32,
}

impl QuadExtElement {
    pub const ONE: QuadExtElement = QuadExtElement { a: 1, b: 0 };
    pub const ZERO: QuadExtElement = QuadExtElement { a: 0, b: 0 };

    /// Lies in the prime subfield.
    pub fn in_base_field(&self) -> bool {
        self.b == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadExtField {
    base: PrimeField,
    modulus: MonicQuadratic,
}

impl QuadExtField {
    pub fn new(p: u64) -> Result<Self> {
        let base = PrimeField::new(p)?;
        Ok(QuadExtField { base, modulus: find_irreducible_quadratic(base) })
    }

    pub fn base(&self) -> PrimeField {
        self.base
    }

    pub fn modulus(&self) -> MonicQuadratic {
        self.modulus
    }

    /// `q² - 1`, the order of the multiplicative group.
    pub fn group_order(&self) -> u64 {
        let p = self.base.p as u64;
        p * p - 1
    }

    pub fn element(&self, a: u32, b: u32) -> QuadExtElement {
        QuadExtElement { a: a % self.base.p, b: b % self.base.p }
    }

    pub fn add(&self, u: QuadExtElement, v: QuadExtElement) -> QuadExtElement {
        let f = self.base;
        QuadExtElement { a: f.add(u.a, v.a), b: f.add(u.b, v.b) }
    }

    pub fn sub(&self, u: QuadExtElement, v: QuadExtElement) -> QuadExtElement {
        let f = self.base;
        QuadExtElement { a: f.sub(u.a, v.a), b: f.sub(u.b, v.b) }
    }

    pub fn mul(&self, u: QuadExtElement, v: QuadExtElement) -> QuadExtElement {
        let f = self.base;
        // (a + bx)(c + dx) = ac + (ad + bc)x + bd x², with x² = -c1 x - c0
        let bd = f.mul(u.b, v.b);
        let a = f.sub(f.mul(u.a, v.a), f.mul(bd, self.modulus.c0));
        let b = f.sub(f.add(f.mul(u.a, v.b), f.mul(u.b, v.a)), f.mul(bd, self.modulus.c1));
        QuadExtElement { a, b }
    }

    pub fn pow(&self, mut base: QuadExtElement, mut exp: u64) -> QuadExtElement {
        let mut acc = QuadExtElement::ONE;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via `u^(q²-2)`; `None` for zero.
    pub fn inv(&self, u: QuadExtElement) -> Option<QuadExtElement> {
        if u == QuadExtElement::ZERO {
            return None;
        }
        Some(self.pow(u, self.group_order() - 1))
    }

    pub fn is_primitive(&self, g: QuadExtElement) -> bool {
        if g == QuadExtElement::ZERO {
            return false;
        }
        let n = self.group_order();
        self.pow(g, n) == QuadExtElement::ONE
            && prime_factors(n).into_iter().all(|l| self.pow(g, n / l) != QuadExtElement::ONE)
    }
}

/// First primitive element of GF(p²) scanning `b` in the outer loop and `a`
/// in the inner loop.
pub fn find_primitive_element(field: &QuadExtField) -> QuadExtElement {
    let p = field.base.p;
    for b in 0..p {
        for a in 0..p {
            let g = QuadExtElement { a, b };
            if field.is_primitive(g) {
                return g;
            }
        }
    }
    unreachable!("the multiplicative group of a finite field is cyclic")
}

/// Sidon set of `q` marks in `Z_{q²-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GolombRuler {
    marks: Vec<usize>,
    modulus: usize,
}

impl GolombRuler {
    pub fn marks(&self) -> &[usize] {
        &self.marks
    }

    pub fn modulus(&self) -> usize {
        self.modulus
    }

    pub fn len(&self) -> usize {
        self.marks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.marks.is_empty()
    }

    pub fn to_sensor_set(&self) -> SensorSet {
        SensorSet::new(self.marks.clone()).expect("ruler marks are strictly increasing")
    }
}

/// True if all differences `m_i - m_j (mod modulus)`, `i != j`, are distinct.
pub fn is_modular_sidon(marks: &[usize], modulus: usize) -> bool {
    let mut seen = vec![false; modulus];
    for (i, &x) in marks.iter().enumerate() {
        for (j, &y) in marks.iter().enumerate() {
            if i == j {
                continue;
            }
            let d = (x % modulus + modulus - y % modulus) % modulus;
            if d == 0 || seen[d] {
                return false;
            }
            seen[d] = true;
        }
    }
    true
}

/// Bose-Chowla ruler `{ i in 1..=q²-2 : g^i - g in GF(q) }` for prime `q = p`.
pub fn bose_chowla(p: u64) -> Result<GolombRuler> {
    let field = QuadExtField::new(p)?;
    let g = find_primitive_element(&field);
    bose_chowla_with(&field, g)
}

/// Bose-Chowla ruler for an explicit primitive element.
pub fn bose_chowla_with(field: &QuadExtField, g: QuadExtElement) -> Result<GolombRuler> {
    if !field.is_primitive(g) {
        return Err(Error::Internal(format!("{g:?} is not primitive")));
    }
    let q = field.base.p as usize;
    let modulus = q * q - 1;
    let mut marks = Vec::with_capacity(q);
    let mut power = QuadExtElement::ONE;
    for i in 1..=modulus - 1 {
        power = field.mul(power, g);
        if field.sub(power, g).in_base_field() {
            marks.push(i);
        }
    }
    if marks.len() != q {
        return Err(Error::Internal(format!("ruler has {} marks, expected {q}", marks.len())));
    }
    if !is_modular_sidon(&marks, modulus) {
        return Err(Error::Internal("ruler fails the Sidon property".into()));
    }
    Ok(GolombRuler { marks, modulus })
}

/// Ruler marks followed by `extra` consecutive positions after the largest mark.
pub fn extend_ruler(ruler: &GolombRuler, extra: usize) -> SensorSet {
    let start = ruler.marks.last().map_or(0, |&m| m + 1);
    let positions = ruler.marks.iter().copied().chain(start..start + extra).collect();
    SensorSet::new(positions).expect("appended marks keep the set increasing")
}

/// Primes up to and including `n`.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    (2..=n).filter(|&k| is_prime(k)).collect()
}

pub fn is_prime_u64(n: u64) -> bool {
    is_prime(n)
}
