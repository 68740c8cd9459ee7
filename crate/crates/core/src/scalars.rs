//! Exact arithmetic in `Q(zeta_{4r})[eta]`.
//!
//! Every skein quantity is an element of the cyclotomic field `Q(zeta_{4r})`
//! (where `A = zeta_{4r} = e^{2 pi i / 4r}`) extended by the scalar `eta`
//! with `eta^2 = -(A^2 - A^{-2})^2 / 2r`, which already lies in the base
//! field. An element is stored as `base + etaPart * eta` with both parts
//! reduced modulo the 4r-th cyclotomic polynomial, so equality is
//! component-wise and no rounding ever happens.

use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;

use num::bigint::BigInt;
use num::complex::Complex64;
use num::rational::BigRational;
use num::{One, ToPrimitive, Zero};

use crate::error::SkeinError;
use crate::Result;

pub type Rat = BigRational;

/// The level parameter `r >= 3` fixing `A = e^{2 pi i / 4r}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Level {
    r: u32,
}

impl Level {
    pub fn new(r: u32) -> Result<Self> {
        if r < 3 {
            return Err(SkeinError::InvalidLevel(r));
        }
        Ok(Level { r })
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    /// Largest admissible color, `r - 2`.
    pub fn max_color(&self) -> u8 {
        (self.r - 2) as u8
    }
}

fn euler_phi(mut n: u32) -> u32 {
    let mut result = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

/// Monic integer polynomial, dense little-endian coefficients.
type IntPoly = Vec<BigInt>;

fn int_poly_div_exact(num: &IntPoly, den: &IntPoly) -> IntPoly {
    // Exact division of monic polynomials over Z.
    let mut rem = num.clone();
    let dd = den.len() - 1;
    let nd = num.len() - 1;
    let mut quot = vec![BigInt::zero(); nd - dd + 1];
    for k in (0..=nd - dd).rev() {
        let c = rem[k + dd].clone();
        quot[k] = c.clone();
        if !c.is_zero() {
            for j in 0..=dd {
                let t = &den[j] * &c;
                rem[k + j] -= t;
            }
        }
    }
    debug_assert!(rem.iter().all(|c| c.is_zero()));
    quot
}

/// The n-th cyclotomic polynomial, computed by dividing `x^n - 1` by the
/// cyclotomic polynomials of the proper divisors of n.
fn cyclotomic_poly(n: u32) -> IntPoly {
    let mut memo: HashMap<u32, IntPoly> = HashMap::new();
    fn go(n: u32, memo: &mut HashMap<u32, IntPoly>) -> IntPoly {
        if let Some(p) = memo.get(&n) {
            return p.clone();
        }
        let mut num = vec![BigInt::zero(); n as usize + 1];
        num[0] = BigInt::from(-1);
        num[n as usize] = BigInt::one();
        let mut result = num;
        for d in 1..n {
            if n % d == 0 {
                let phi_d = go(d, memo);
                result = int_poly_div_exact(&result, &phi_d);
            }
        }
        memo.insert(n, result.clone());
        result
    }
    go(n, &mut memo)
}

fn trim(v: &mut Vec<Rat>) {
    while v.last().map_or(false, |c| c.is_zero()) {
        v.pop();
    }
}

/// An exact element `base + etaPart * eta` of `Q(zeta_{4r})[eta]`.
///
/// Coefficient vectors are in the power basis of `zeta_{4r}`, fully reduced
/// modulo the cyclotomic polynomial and trimmed of trailing zeros, so
/// `PartialEq` is exact value equality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycloScalar {
    base: Vec<Rat>,
    eta: Vec<Rat>,
}

impl CycloScalar {
    pub fn is_zero(&self) -> bool {
        self.base.is_empty() && self.eta.is_empty()
    }

    pub fn has_eta_part(&self) -> bool {
        !self.eta.is_empty()
    }

    pub fn base_coeffs(&self) -> &[Rat] {
        &self.base
    }

    pub fn eta_coeffs(&self) -> &[Rat] {
        &self.eta
    }
}

/// Arithmetic context for `Q(zeta_{4r})[eta]`.
pub struct CycloField {
    level: Level,
    n: u32,
    degree: usize,
    /// `x^k mod Phi_n` for every k needed by products and `A`-powers.
    pow_table: Vec<Vec<Rat>>,
    /// `eta^2` as a base-field element.
    eta_sq: Vec<Rat>,
}

impl CycloField {
    pub fn new(level: Level) -> Self {
        let n = 4 * level.r();
        let degree = euler_phi(n) as usize;
        let phi = cyclotomic_poly(n);
        debug_assert_eq!(phi.len(), degree + 1);
        let phi_q: Vec<Rat> = phi.iter().map(|c| Rat::from_integer(c.clone())).collect();

        let table_len = (n as usize).max(2 * degree - 1);
        let mut pow_table: Vec<Vec<Rat>> = Vec::with_capacity(table_len);
        let mut row = vec![Rat::zero(); degree];
        row[0] = Rat::one();
        pow_table.push(row.clone());
        for _k in 1..table_len {
            // multiply by x, substitute x^degree = -(lower part of Phi)
            let top = row[degree - 1].clone();
            for i in (1..degree).rev() {
                row[i] = row[i - 1].clone();
            }
            row[0] = Rat::zero();
            if !top.is_zero() {
                for i in 0..degree {
                    let t = &phi_q[i] * &top;
                    row[i] -= t;
                }
            }
            pow_table.push(row.clone());
        }

        let mut field = CycloField {
            level,
            n,
            degree,
            pow_table,
            eta_sq: Vec::new(),
        };
        // eta^2 = -(A^2 - A^{-2})^2 / 2r
        let a2 = field.base_pow_zeta(2);
        let a2inv = field.base_pow_zeta(-2);
        let diff = field.base_sub(&a2, &a2inv);
        let sq = field.base_mul(&diff, &diff);
        let factor = Rat::new(BigInt::from(-1), BigInt::from(2 * level.r() as i64));
        field.eta_sq = sq.iter().map(|c| c * &factor).collect();
        trim(&mut field.eta_sq);
        field
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn r(&self) -> u32 {
        self.level.r()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    // ---- base-field (eta-free) polynomial arithmetic ----

    fn base_pow_zeta(&self, k: i64) -> Vec<Rat> {
        let n = self.n as i64;
        let k = k.rem_euclid(n) as usize;
        let mut v = self.pow_table[k].clone();
        trim(&mut v);
        v
    }

    fn base_add(&self, a: &[Rat], b: &[Rat]) -> Vec<Rat> {
        let mut out = vec![Rat::zero(); a.len().max(b.len())];
        for (i, c) in a.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in b.iter().enumerate() {
            out[i] += c;
        }
        trim(&mut out);
        out
    }

    fn base_sub(&self, a: &[Rat], b: &[Rat]) -> Vec<Rat> {
        let mut out = vec![Rat::zero(); a.len().max(b.len())];
        for (i, c) in a.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in b.iter().enumerate() {
            out[i] -= c;
        }
        trim(&mut out);
        out
    }

    fn base_neg(&self, a: &[Rat]) -> Vec<Rat> {
        a.iter().map(|c| -c).collect()
    }

    fn base_mul(&self, a: &[Rat], b: &[Rat]) -> Vec<Rat> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut conv = vec![Rat::zero(); a.len() + b.len() - 1];
        for (i, ca) in a.iter().enumerate() {
            if ca.is_zero() {
                continue;
            }
            for (j, cb) in b.iter().enumerate() {
                if cb.is_zero() {
                    continue;
                }
                conv[i + j] += ca * cb;
            }
        }
        self.base_reduce(conv)
    }

    fn base_reduce(&self, mut conv: Vec<Rat>) -> Vec<Rat> {
        if conv.len() <= self.degree {
            trim(&mut conv);
            return conv;
        }
        let mut out: Vec<Rat> = conv[..self.degree].to_vec();
        for k in self.degree..conv.len() {
            let c = std::mem::replace(&mut conv[k], Rat::zero());
            if c.is_zero() {
                continue;
            }
            for (i, t) in self.pow_table[k].iter().enumerate() {
                if !t.is_zero() {
                    out[i] += t * &c;
                }
            }
        }
        trim(&mut out);
        out
    }

    /// Extended Euclid inverse in `Q[x]/(Phi_n)`; `a` must be nonzero.
    fn base_inv(&self, a: &[Rat]) -> Vec<Rat> {
        assert!(!a.is_empty(), "base_inv of zero");
        // Work with (r0, r1) = (Phi, a), Bezout coefficients (t0, t1) = (0, 1).
        let mut r0: Vec<Rat> = cyclotomic_poly(self.n)
            .iter()
            .map(|c| Rat::from_integer(c.clone()))
            .collect();
        let mut r1: Vec<Rat> = a.to_vec();
        let mut t0: Vec<Rat> = Vec::new();
        let mut t1: Vec<Rat> = vec![Rat::one()];
        while !r1.is_empty() {
            let (q, rem) = poly_divmod(&r0, &r1);
            let qt1 = poly_mul_plain(&q, &t1);
            let t2 = poly_sub_plain(&t0, &qt1);
            r0 = r1;
            r1 = rem;
            t0 = t1;
            t1 = t2;
        }
        // r0 = gcd (a nonzero constant, since Phi is irreducible over Q)
        debug_assert_eq!(r0.len(), 1);
        let inv_g = Rat::one() / r0[0].clone();
        let mut out: Vec<Rat> = t0.iter().map(|c| c * &inv_g).collect();
        trim(&mut out);
        self.base_reduce(out)
    }

    // ---- scalar constructors ----

    pub fn zero(&self) -> CycloScalar {
        CycloScalar {
            base: Vec::new(),
            eta: Vec::new(),
        }
    }

    pub fn one(&self) -> CycloScalar {
        CycloScalar {
            base: vec![Rat::one()],
            eta: Vec::new(),
        }
    }

    pub fn int(&self, v: i64) -> CycloScalar {
        if v == 0 {
            return self.zero();
        }
        CycloScalar {
            base: vec![Rat::from_integer(BigInt::from(v))],
            eta: Vec::new(),
        }
    }

    pub fn rational(&self, num: i64, den: i64) -> CycloScalar {
        let q = Rat::new(BigInt::from(num), BigInt::from(den));
        if q.is_zero() {
            return self.zero();
        }
        CycloScalar {
            base: vec![q],
            eta: Vec::new(),
        }
    }

    /// `A^k` in canonical form (`A = zeta_{4r}`, so `A^{4r} = 1`).
    pub fn pow_a(&self, k: i64) -> CycloScalar {
        CycloScalar {
            base: self.base_pow_zeta(k),
            eta: Vec::new(),
        }
    }

    /// The formal extension scalar `eta`.
    pub fn eta(&self) -> CycloScalar {
        CycloScalar {
            base: Vec::new(),
            eta: vec![Rat::one()],
        }
    }

    /// `eta^2` as a base-field element.
    pub fn eta_sq(&self) -> CycloScalar {
        CycloScalar {
            base: self.eta_sq.clone(),
            eta: Vec::new(),
        }
    }

    /// Loop value `delta = -A^2 - A^{-2}`.
    pub fn delta_loop(&self) -> CycloScalar {
        let s = self.add(&self.pow_a(2), &self.pow_a(-2));
        self.neg(&s)
    }

    // ---- scalar arithmetic ----

    pub fn add(&self, x: &CycloScalar, y: &CycloScalar) -> CycloScalar {
        CycloScalar {
            base: self.base_add(&x.base, &y.base),
            eta: self.base_add(&x.eta, &y.eta),
        }
    }

    pub fn sub(&self, x: &CycloScalar, y: &CycloScalar) -> CycloScalar {
        CycloScalar {
            base: self.base_sub(&x.base, &y.base),
            eta: self.base_sub(&x.eta, &y.eta),
        }
    }

    pub fn neg(&self, x: &CycloScalar) -> CycloScalar {
        CycloScalar {
            base: self.base_neg(&x.base),
            eta: self.base_neg(&x.eta),
        }
    }

    pub fn mul(&self, x: &CycloScalar, y: &CycloScalar) -> CycloScalar {
        // (b1 + e1 eta)(b2 + e2 eta) = b1 b2 + eta^2 e1 e2 + (b1 e2 + e1 b2) eta
        let mut base = self.base_mul(&x.base, &y.base);
        if !x.eta.is_empty() && !y.eta.is_empty() {
            let ee = self.base_mul(&x.eta, &y.eta);
            let folded = self.base_mul(&ee, &self.eta_sq);
            base = self.base_add(&base, &folded);
        }
        let mut eta = self.base_mul(&x.base, &y.eta);
        let eb = self.base_mul(&x.eta, &y.base);
        eta = self.base_add(&eta, &eb);
        CycloScalar { base, eta }
    }

    pub fn inv(&self, y: &CycloScalar) -> Result<CycloScalar> {
        if y.is_zero() {
            return Err(SkeinError::DivisionByZero);
        }
        if y.eta.is_empty() {
            return Ok(CycloScalar {
                base: self.base_inv(&y.base),
                eta: Vec::new(),
            });
        }
        if y.base.is_empty() {
            // (e eta)^{-1} = eta / (e eta^2)
            let den = self.base_mul(&y.eta, &self.eta_sq);
            return Ok(CycloScalar {
                base: Vec::new(),
                eta: self.base_inv(&den),
            });
        }
        // (b + e eta)^{-1} = (b - e eta) / (b^2 - eta^2 e^2)
        let b2 = self.base_mul(&y.base, &y.base);
        let e2 = self.base_mul(&y.eta, &y.eta);
        let e2s = self.base_mul(&e2, &self.eta_sq);
        let norm = self.base_sub(&b2, &e2s);
        if norm.is_empty() {
            // Only possible when eta happens to lie in the base field
            // (composite r); such elements are zero divisors.
            return Err(SkeinError::ZeroDivisor { r: self.r() });
        }
        let ninv = self.base_inv(&norm);
        Ok(CycloScalar {
            base: self.base_mul(&y.base, &ninv),
            eta: self.base_neg(&self.base_mul(&y.eta, &ninv)),
        })
    }

    pub fn div(&self, x: &CycloScalar, y: &CycloScalar) -> Result<CycloScalar> {
        Ok(self.mul(x, &self.inv(y)?))
    }

    pub fn pow(&self, x: &CycloScalar, k: u32) -> CycloScalar {
        let mut acc = self.one();
        for _ in 0..k {
            acc = self.mul(&acc, x);
        }
        acc
    }

    /// `x * A^k`, the most common scaling in bracket expansions.
    pub fn mul_pow_a(&self, x: &CycloScalar, k: i64) -> CycloScalar {
        self.mul(x, &self.pow_a(k))
    }

    // ---- numeric embedding ----

    /// Standard embedding `zeta_{4r} -> e^{2 pi i/4r}`,
    /// `eta -> sqrt(2/r) sin(pi/r)` (the real positive branch).
    pub fn embed(&self, x: &CycloScalar) -> Complex64 {
        let zeta = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / self.n as f64);
        let eval = |coeffs: &[Rat]| -> Complex64 {
            let mut acc = Complex64::new(0.0, 0.0);
            for c in coeffs.iter().rev() {
                let cf = c.numer().to_f64().unwrap_or(f64::NAN)
                    / c.denom().to_f64().unwrap_or(f64::NAN);
                acc = acc * zeta + Complex64::new(cf, 0.0);
            }
            acc
        };
        let r = self.r() as f64;
        let eta_num = (2.0 / r).sqrt() * (std::f64::consts::PI / r).sin();
        eval(&x.base) + eval(&x.eta) * eta_num
    }

    // ---- serialization ----

    /// Spec wire format: `{ "r": r, "base": [[num,den],...], "eta": [[num,den],...] }`
    /// with coefficient index i meaning `zeta_{4r}^i`. Integers that fit in an
    /// i64 are emitted as JSON numbers, larger ones as decimal strings.
    pub fn to_json(&self, x: &CycloScalar) -> serde_json::Value {
        let enc_int = |v: &BigInt| -> serde_json::Value {
            match v.to_i64() {
                Some(i) => serde_json::Value::from(i),
                None => serde_json::Value::from(v.to_string()),
            }
        };
        let enc = |coeffs: &[Rat]| -> serde_json::Value {
            let mut out = Vec::with_capacity(self.degree);
            for i in 0..self.degree {
                let c = coeffs.get(i).cloned().unwrap_or_else(Rat::zero);
                out.push(serde_json::Value::Array(vec![
                    enc_int(c.numer()),
                    enc_int(c.denom()),
                ]));
            }
            serde_json::Value::Array(out)
        };
        serde_json::json!({
            "r": self.r(),
            "base": enc(&x.base),
            "eta": enc(&x.eta),
        })
    }

    pub fn from_json(&self, v: &serde_json::Value) -> Result<CycloScalar> {
        let bad = |m: &str| SkeinError::Parse(format!("scalar json: {m}"));
        let obj = v.as_object().ok_or_else(|| bad("expected object"))?;
        let r = obj
            .get("r")
            .and_then(|x| x.as_u64())
            .ok_or_else(|| bad("missing r"))?;
        if r != self.r() as u64 {
            return Err(bad(&format!("r mismatch: {} vs {}", r, self.r())));
        }
        let dec_int = |v: &serde_json::Value| -> Result<BigInt> {
            if let Some(i) = v.as_i64() {
                return Ok(BigInt::from(i));
            }
            if let Some(s) = v.as_str() {
                return s
                    .parse::<BigInt>()
                    .map_err(|e| bad(&format!("bad integer {s}: {e}")));
            }
            Err(bad("expected integer or string"))
        };
        let dec = |key: &str| -> Result<Vec<Rat>> {
            let arr = obj
                .get(key)
                .and_then(|x| x.as_array())
                .ok_or_else(|| bad(&format!("missing {key}")))?;
            let mut out = Vec::with_capacity(arr.len());
            for pair in arr {
                let p = pair.as_array().ok_or_else(|| bad("expected [num,den]"))?;
                if p.len() != 2 {
                    return Err(bad("expected [num,den]"));
                }
                let num = dec_int(&p[0])?;
                let den = dec_int(&p[1])?;
                if den.is_zero() {
                    return Err(bad("zero denominator"));
                }
                out.push(Rat::new(num, den));
            }
            trim(&mut out);
            Ok(out)
        };
        Ok(CycloScalar {
            base: dec("base")?,
            eta: dec("eta")?,
        })
    }

    /// Human-readable rendering (debug output and CSV tables).
    pub fn render(&self, x: &CycloScalar) -> String {
        fn part(coeffs: &[Rat]) -> String {
            if coeffs.is_empty() {
                return "0".to_string();
            }
            let mut terms = Vec::new();
            for (i, c) in coeffs.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let cs = if c.is_one() && i > 0 {
                    String::new()
                } else if (-c.clone()).is_one() && i > 0 {
                    "-".to_string()
                } else {
                    format!("{c}")
                };
                let t = match i {
                    0 => format!("{c}"),
                    1 => format!("{cs}A"),
                    _ => format!("{cs}A^{i}"),
                };
                terms.push(t);
            }
            terms.join("+").replace("+-", "-")
        }
        match (x.base.is_empty(), x.eta.is_empty()) {
            (true, true) => "0".to_string(),
            (false, true) => part(&x.base),
            (true, false) => format!("({})eta", part(&x.eta)),
            (false, false) => format!("{}+({})eta", part(&x.base), part(&x.eta)),
        }
    }
}

// ---- plain (unreduced) rational polynomial helpers for the Euclid loop ----

fn poly_divmod(num: &[Rat], den: &[Rat]) -> (Vec<Rat>, Vec<Rat>) {
    let mut rem: Vec<Rat> = num.to_vec();
    trim(&mut rem);
    let dd = den.len() - 1;
    let lead_inv = Rat::one() / den[dd].clone();
    if rem.len() <= dd {
        return (Vec::new(), rem);
    }
    let mut quot = vec![Rat::zero(); rem.len() - dd];
    while rem.len() > dd {
        let k = rem.len() - 1 - dd;
        let c = rem.last().unwrap() * &lead_inv;
        quot[k] = c.clone();
        for j in 0..=dd {
            let t = &den[j] * &c;
            rem[k + j] -= t;
        }
        trim(&mut rem);
        if rem.len() <= dd {
            break;
        }
    }
    trim(&mut quot);
    (quot, rem)
}

fn poly_mul_plain(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Rat::zero(); a.len() + b.len() - 1];
    for (i, ca) in a.iter().enumerate() {
        if ca.is_zero() {
            continue;
        }
        for (j, cb) in b.iter().enumerate() {
            out[i + j] += ca * cb;
        }
    }
    trim(&mut out);
    out
}

fn poly_sub_plain(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let mut out = vec![Rat::zero(); a.len().max(b.len())];
    for (i, c) in a.iter().enumerate() {
        out[i] += c;
    }
    for (i, c) in b.iter().enumerate() {
        out[i] -= c;
    }
    trim(&mut out);
    out
}

// ---- shared computation context ----

/// Shared context: the field plus concurrent-read memo tables for the
/// Jones-Wenzl idempotents, recoupling scalars and diagram evaluations.
pub struct Ctx {
    pub field: CycloField,
    pub(crate) jw_cache: Mutex<HashMap<u8, std::sync::Arc<crate::tl::TLElement>>>,
    pub(crate) theta_cache: Mutex<HashMap<(u8, u8, u8), CycloScalar>>,
    pub(crate) tet_cache: Mutex<HashMap<[u8; 6], CycloScalar>>,
    pub(crate) hopf_cache: Mutex<HashMap<(u8, u8), CycloScalar>>,
    pub(crate) halftwist_cache: Mutex<HashMap<(u8, u8, u8, bool), CycloScalar>>,
    pub(crate) eval_cache: Mutex<HashMap<Vec<u8>, CycloScalar>>,
}

impl Ctx {
    pub fn new(r: u32) -> Result<Self> {
        let level = Level::new(r)?;
        Ok(Ctx {
            field: CycloField::new(level),
            jw_cache: Mutex::new(HashMap::new()),
            theta_cache: Mutex::new(HashMap::new()),
            tet_cache: Mutex::new(HashMap::new()),
            hopf_cache: Mutex::new(HashMap::new()),
            halftwist_cache: Mutex::new(HashMap::new()),
            eval_cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn level(&self) -> Level {
        self.field.level()
    }

    pub fn r(&self) -> u32 {
        self.field.r()
    }
}

impl fmt::Debug for Ctx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ctx(r = {})", self.r())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fld(r: u32) -> CycloField {
        CycloField::new(Level::new(r).unwrap())
    }

    #[test]
    fn cyclotomic_polys() {
        // Phi_12 = x^4 - x^2 + 1
        let p = cyclotomic_poly(12);
        let expect: Vec<i64> = vec![1, 0, -1, 0, 1];
        assert_eq!(p, expect.into_iter().map(BigInt::from).collect::<Vec<_>>());
        // Phi_20 = x^8 - x^6 + x^4 - x^2 + 1
        let p = cyclotomic_poly(20);
        let expect: Vec<i64> = vec![1, 0, -1, 0, 1, 0, -1, 0, 1];
        assert_eq!(p, expect.into_iter().map(BigInt::from).collect::<Vec<_>>());
    }

    #[test]
    fn a_inverse_pair() {
        for r in 3..=8 {
            let f = fld(r);
            let prod = f.mul(&f.pow_a(1), &f.pow_a(-1));
            assert_eq!(prod, f.one(), "A * A^-1 = 1 at r={r}");
            assert_eq!(f.pow_a(0), f.one());
            assert_eq!(f.pow_a(4 * r as i64), f.one(), "A^(4r) = 1");
            assert_eq!(f.pow_a(2 * r as i64), f.int(-1), "A^(2r) = -1");
        }
    }

    #[test]
    fn a_power_r_is_i() {
        // r = 3, k = 3: e^{2 pi i 3/12} = i; i^2 = -1
        let f = fld(3);
        let i = f.pow_a(3);
        assert_eq!(f.mul(&i, &i), f.int(-1));
        // also at every level, A^r squared is -1
        for r in 3..=7 {
            let f = fld(r);
            let i = f.pow_a(r as i64);
            assert_eq!(f.mul(&i, &i), f.int(-1));
        }
    }

    #[test]
    fn r3_a2_plus_a_minus_2_is_one() {
        // 2 cos(pi/3) = 1
        let f = fld(3);
        let s = f.add(&f.pow_a(2), &f.pow_a(-2));
        assert_eq!(s, f.one());
    }

    #[test]
    fn eta_square_folds() {
        for r in 3..=8 {
            let f = fld(r);
            let e = f.eta();
            let sq = f.mul(&e, &e);
            assert!(!sq.has_eta_part());
            // -(A^2 - A^{-2})^2 / 2r
            let diff = f.sub(&f.pow_a(2), &f.pow_a(-2));
            let want = f.mul(
                &f.mul(&diff, &diff),
                &f.rational(-1, 2 * r as i64),
            );
            assert_eq!(sq, want, "eta^2 at r={r}");
            // equivalently (A^2 - A^{-2})^2 = -2r eta^2
            let lhs = f.mul(&diff, &diff);
            let rhs = f.mul(&f.int(-2 * r as i64), &sq);
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn division_round_trip() {
        let f = fld(5);
        let x = f.add(&f.pow_a(3), &f.mul(&f.int(2), &f.eta()));
        let y = f.sub(&f.pow_a(7), &f.eta());
        let q = f.div(&x, &y).unwrap();
        assert_eq!(f.mul(&q, &y), x);
        assert_eq!(f.div(&x, &x).unwrap(), f.one());
        assert!(matches!(
            f.div(&x, &f.zero()),
            Err(SkeinError::DivisionByZero)
        ));
    }

    #[test]
    fn numeric_embedding_values() {
        let f = fld(5);
        // eta = sqrt(2/5) sin(36 deg) = 0.37174803...
        let e = f.embed(&f.eta());
        assert!((e.re - 0.37174803446018445).abs() < 1e-12, "eta re {}", e.re);
        assert!(e.im.abs() < 1e-12);
        let f3 = fld(3);
        // delta(r=3) = -2 cos(pi/3) = -1
        let d = f3.embed(&f3.delta_loop());
        assert!((d.re + 1.0).abs() < 1e-12);
        assert!(d.im.abs() < 1e-12);
        let one = f3.embed(&f3.one());
        assert!((one.re - 1.0).abs() < 1e-15 && one.im.abs() < 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let f = fld(5);
        let x = f.div(&f.add(&f.pow_a(9), &f.eta()), &f.int(7)).unwrap();
        let j = f.to_json(&x);
        let y = f.from_json(&j).unwrap();
        assert_eq!(x, y);
        let j2 = f.to_json(&y);
        assert_eq!(j, j2, "serialization is bit-exact stable");
    }

    #[test]
    fn zero_divisor_detected_not_miscalled() {
        // r = 6: eta lies in Q(zeta_24), so b + e*eta can be a zero divisor.
        let f = fld(6);
        // Find eta0 in the base field with eta0^2 = eta^2 would be needed to
        // construct one; instead check that ordinary divisions still work.
        let x = f.add(&f.pow_a(5), &f.eta());
        let q = f.div(&f.one(), &x);
        match q {
            Ok(q) => assert_eq!(f.mul(&q, &x), f.one()),
            Err(SkeinError::ZeroDivisor { r }) => assert_eq!(r, 6),
            Err(e) => panic!("unexpected error {e:?}"),
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;
        use proptest::strategy::ValueTree;

        fn arb_scalar(r: u32) -> impl Strategy<Value = CycloScalar> {
            let deg = euler_phi(4 * r) as usize;
            (
                proptest::collection::vec(-6i64..=6, deg),
                proptest::collection::vec(-6i64..=6, deg),
                1i64..=4,
            )
                .prop_map(move |(b, e, den)| {
                    let f = fld(r);
                    let mut acc = f.zero();
                    for (i, c) in b.iter().enumerate() {
                        let t = f.mul(&f.rational(*c, den), &f.pow_a(i as i64));
                        acc = f.add(&acc, &t);
                    }
                    for (i, c) in e.iter().enumerate() {
                        let t = f.mul(
                            &f.mul(&f.rational(*c, den), &f.pow_a(i as i64)),
                            &f.eta(),
                        );
                        acc = f.add(&acc, &t);
                    }
                    acc
                })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn ring_axioms(r in 3u32..=8, seed in 0u64..1000) {
                let f = fld(r);
                let mut runner = proptest::test_runner::TestRunner::deterministic();
                let _ = seed;
                let x = arb_scalar(r).new_tree(&mut runner).unwrap().current();
                let y = arb_scalar(r).new_tree(&mut runner).unwrap().current();
                let z = arb_scalar(r).new_tree(&mut runner).unwrap().current();
                // associativity & commutativity & distributivity
                prop_assert_eq!(f.mul(&f.mul(&x, &y), &z), f.mul(&x, &f.mul(&y, &z)));
                prop_assert_eq!(f.mul(&x, &y), f.mul(&y, &x));
                prop_assert_eq!(
                    f.mul(&x, &f.add(&y, &z)),
                    f.add(&f.mul(&x, &y), &f.mul(&x, &z))
                );
                prop_assert_eq!(f.add(&f.sub(&x, &y), &y), x.clone());
            }

            #[test]
            fn embed_is_homomorphic(r in 3u32..=7, _seed in 0u64..1000) {
                let f = fld(r);
                let mut runner = proptest::test_runner::TestRunner::deterministic();
                let x = arb_scalar(r).new_tree(&mut runner).unwrap().current();
                let y = arb_scalar(r).new_tree(&mut runner).unwrap().current();
                let lhs = f.embed(&f.mul(&x, &y));
                let rhs = f.embed(&x) * f.embed(&y);
                let scale = 1.0f64.max(lhs.norm()).max(rhs.norm());
                prop_assert!((lhs - rhs).norm() / scale < 1e-9);
                let lhs = f.embed(&f.add(&x, &y));
                let rhs = f.embed(&x) + f.embed(&y);
                let scale = 1.0f64.max(lhs.norm()).max(rhs.norm());
                prop_assert!((lhs - rhs).norm() / scale < 1e-9);
            }
        }
    }
}
