//! Exact evaluation of every derived constant, and the composed χ-loss
//! functions of the cleaning pipeline.
//!
//! Values are arbitrary-precision naturals. A value whose bit length would
//! exceed [`MATERIALIZE_BITS`] is kept as an expression over exact operands;
//! it still has exact residues modulo any `u64` and proven bit-length
//! bounds, and renders as its expression.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::structures::Params;

/// Largest bit length that is evaluated eagerly.
pub const MATERIALIZE_BITS: u64 = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Add,
    Mul,
    Pow,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Deferred {
    pub op: Op,
    pub lhs: Nat,
    pub rhs: Nat,
    lo: u64,
    hi: u64,
}

/// A natural number, exact or deferred.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Nat {
    Exact(BigUint),
    Deferred(Box<Deferred>),
}

fn bit_len(x: &BigUint) -> u64 {
    x.bits()
}

impl Nat {
    pub fn from_u64(x: u64) -> Nat {
        Nat::Exact(BigUint::from(x))
    }

    pub fn exact(&self) -> Option<&BigUint> {
        match self {
            Nat::Exact(v) => Some(v),
            Nat::Deferred(_) => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Nat::Exact(_))
    }

    /// Lower and upper bounds on the bit length (equal when exact).
    pub fn bits(&self) -> (u64, u64) {
        match self {
            Nat::Exact(v) => (bit_len(v), bit_len(v)),
            Nat::Deferred(d) => (d.lo, d.hi),
        }
    }

    fn defer(op: Op, lhs: Nat, rhs: Nat, lo: u64, hi: u64) -> Nat {
        Nat::Deferred(Box::new(Deferred { op, lhs, rhs, lo, hi }))
    }

    pub fn add(&self, other: &Nat) -> Nat {
        if let (Nat::Exact(a), Nat::Exact(b)) = (self, other) {
            return Nat::Exact(a + b);
        }
        let ((la, ha), (lb, hb)) = (self.bits(), other.bits());
        Nat::defer(Op::Add, self.clone(), other.clone(), la.max(lb), ha.max(hb).saturating_add(1))
    }

    pub fn mul(&self, other: &Nat) -> Nat {
        if let (Nat::Exact(a), Nat::Exact(b)) = (self, other) {
            return Nat::Exact(a * b);
        }
        if self.is_zero() || other.is_zero() {
            return Nat::Exact(BigUint::zero());
        }
        let ((la, ha), (lb, hb)) = (self.bits(), other.bits());
        Nat::defer(
            Op::Mul,
            self.clone(),
            other.clone(),
            (la + lb).saturating_sub(1),
            ha.saturating_add(hb),
        )
    }

    pub fn pow(&self, exp: &Nat) -> Nat {
        if exp.is_zero() {
            return Nat::Exact(BigUint::one());
        }
        if self.is_zero() {
            return Nat::Exact(BigUint::zero());
        }
        if self.exact().is_some_and(|b| b.is_one()) {
            return Nat::Exact(BigUint::one());
        }
        let (lb, hb) = self.bits();
        let (elo, ehi) = match exp.exact().and_then(|e| e.to_u64()) {
            Some(e) => (e, e),
            None => (exp.bits().0.saturating_sub(1).clamp(1, 63), u64::MAX),
        };
        let exp_lo = if exp.exact().is_some() { elo } else { 1u64 << elo.saturating_sub(1).min(62) };
        let lo = (lb.saturating_sub(1)).saturating_mul(exp_lo).saturating_add(1);
        let hi = hb.saturating_mul(ehi);
        if let (Nat::Exact(b), Some(e)) = (self, exp.exact().and_then(|e| e.to_u32())) {
            if hi <= MATERIALIZE_BITS {
                return Nat::Exact(b.pow(e));
            }
        }
        Nat::defer(Op::Pow, self.clone(), exp.clone(), lo, hi)
    }

    pub fn is_zero(&self) -> bool {
        self.exact().is_some_and(|v| v.is_zero())
    }

    /// `self mod m` for `m ≥ 1`; `None` only for a power whose exponent is
    /// itself deferred.
    pub fn residue(&self, m: u64) -> Option<u64> {
        let modulus = BigUint::from(m);
        match self {
            Nat::Exact(v) => (v % &modulus).to_u64(),
            Nat::Deferred(d) => {
                let a = d.lhs.residue(m)? as u128;
                match d.op {
                    Op::Add => Some(((a + d.rhs.residue(m)? as u128) % m as u128) as u64),
                    Op::Mul => Some(((a * d.rhs.residue(m)? as u128) % m as u128) as u64),
                    Op::Pow => {
                        let e = d.rhs.exact()?;
                        BigUint::from(a as u64).modpow(e, &modulus).to_u64()
                    }
                }
            }
        }
    }

    /// Decimal digits when exact, the expression otherwise.
    pub fn render(&self) -> String {
        match self {
            Nat::Exact(v) => v.to_string(),
            Nat::Deferred(d) => {
                let wrap = |n: &Nat| match n {
                    Nat::Exact(_) => n.render(),
                    Nat::Deferred(_) => format!("({})", n.render()),
                };
                let sym = match d.op {
                    Op::Add => " + ",
                    Op::Mul => " * ",
                    Op::Pow => "^",
                };
                format!("{}{}{}", wrap(&d.lhs), sym, wrap(&d.rhs))
            }
        }
    }

    /// `Some(ordering)` when the order of two values is certain.
    pub fn try_cmp(&self, other: &Nat) -> Option<core::cmp::Ordering> {
        if let (Nat::Exact(a), Nat::Exact(b)) = (self, other) {
            return Some(a.cmp(b));
        }
        let ((la, ha), (lb, hb)) = (self.bits(), other.bits());
        if ha < lb {
            Some(core::cmp::Ordering::Less)
        } else if hb < la {
            Some(core::cmp::Ordering::Greater)
        } else if self == other {
            Some(core::cmp::Ordering::Equal)
        } else {
            None
        }
    }
}

impl From<u64> for Nat {
    fn from(x: u64) -> Nat {
        Nat::from_u64(x)
    }
}

impl From<BigUint> for Nat {
    fn from(x: BigUint) -> Nat {
        Nat::Exact(x)
    }
}

impl Serialize for Nat {
    fn serialize<S: Serializer>(&self, serializer: S) -> core::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.render())
    }
}

/// One ledger value with its source and defining formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub key: &'static str,
    pub theorem: &'static str,
    pub formula: &'static str,
    pub value: Nat,
}

impl Serialize for Entry {
    fn serialize<S: Serializer>(&self, serializer: S) -> core::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Entry", 6)?;
        s.serialize_field("key", self.key)?;
        s.serialize_field("theorem", self.theorem)?;
        s.serialize_field("formula", self.formula)?;
        s.serialize_field("value", &self.value)?;
        s.serialize_field("exact", &self.value.is_exact())?;
        s.serialize_field("bits", &self.value.bits())?;
        s.end()
    }
}

/// Every derived constant for one parameter set, in definition order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Ledger {
    pub params: Params,
    pub entries: Vec<Entry>,
}

impl Ledger {
    pub fn get(&self, key: &str) -> Option<&Nat> {
        self.entries.iter().find(|e| e.key == key).map(|e| &e.value)
    }

    /// Exact value of `key` as `u64`, when it fits.
    pub fn small(&self, key: &str) -> Option<u64> {
        self.get(key)?.exact()?.to_u64()
    }

    pub fn theorems(&self) -> Vec<&'static str> {
        let mut out: Vec<&'static str> = Vec::new();
        for e in &self.entries {
            if !out.contains(&e.theorem) {
                out.push(e.theorem);
            }
        }
        out
    }
}

/// Source theorem ids.
pub mod ids {
    pub const Y_INDICES: &str = "y-neighbour-indices";
    pub const H_INDICES: &str = "h-neighbour-indices";
    pub const STRONG_H: &str = "strong-h-indices";
    pub const DENSE: &str = "dense-vertices";
    pub const LEFTOVER: &str = "leftover-extraction";
    pub const PARTIAL_1: &str = "partial-1-cleaning";
    pub const CLEAN_1: &str = "1-cleaning";
    pub const PARTIAL_2: &str = "partial-2-cleaning";
    pub const CLEAN_2: &str = "2-cleaning";
    pub const CLEAN_3: &str = "3-cleaning";
    pub const HEAVY_U: &str = "heavy-u-vertices";
    pub const COMMON_ROOT: &str = "common-root";
    pub const NESTED: &str = "nested-arrays";
    pub const STRONG_TRIPLES: &str = "strong-triples";
}

struct Builder {
    entries: Vec<Entry>,
}

impl Builder {
    fn put(&mut self, key: &'static str, theorem: &'static str, formula: &'static str, value: Nat) -> Nat {
        self.entries.push(Entry {
            key,
            theorem,
            formula,
            value: value.clone(),
        });
        value
    }
}

fn n(x: u64) -> Nat {
    Nat::from_u64(x)
}

/// Evaluates every constant for `p`.
pub fn ledger(p: &Params) -> Result<Ledger> {
    p.validate()?;
    use ids::*;
    let delta = n(p.delta as u64);
    let tau = n(p.tau as u64);
    let alpha = n(p.alpha as u64);
    let beta = n(p.beta as u64);
    let zeta = n(p.zeta as u64);
    let one = n(1);
    let two = n(2);
    let mut b = Builder { entries: Vec::new() };

    let two_delta = two.mul(&delta);
    b.put("y_indices.bound", Y_INDICES, "2*delta", two_delta.clone());
    let gamma = b.put(
        "gamma",
        H_INDICES,
        "(2*delta*tau+1)*(2*delta+1)",
        two_delta.mul(&tau).add(&one).mul(&two_delta.add(&one)),
    );
    let epsilon = b.put(
        "epsilon",
        CLEAN_3,
        "(beta+1)*gamma*delta",
        beta.add(&one).mul(&gamma).mul(&delta),
    );
    let d = b.put("d", PARTIAL_2, "gamma*(delta-1)", gamma.mul(&n(p.delta as u64 - 1)));
    let two_bz = two.pow(&beta.mul(&zeta));
    let dense_t = b.put("dense.t", DENSE, "alpha*tau*2^(beta*zeta)", alpha.mul(&tau).mul(&two_bz));

    let s3 = b.put("strong_h.s3", STRONG_H, "2*delta*tau", two_delta.mul(&tau));
    let s2 = b.put(
        "strong_h.s2",
        STRONG_H,
        "(2*(delta+1)*gamma+1)*strong_h.s3",
        two.mul(&delta.add(&one)).mul(&gamma).add(&one).mul(&s3),
    );
    let s1 = b.put("strong_h.s1", STRONG_H, "strong_h.s2+gamma", s2.add(&gamma));
    b.put("strong_h.s", STRONG_H, "zeta*beta*strong_h.s1", zeta.mul(&beta).mul(&s1));

    b.put(
        "two_clean.t",
        CLEAN_2,
        "(d+1)*beta*zeta*tau",
        d.add(&one).mul(&beta).mul(&zeta).mul(&tau),
    );

    let hs = b.put(
        "heavy_u.s",
        HEAVY_U,
        "2*(2*gamma+1)*delta*tau+gamma",
        two.mul(&two.mul(&gamma).add(&one)).mul(&delta).mul(&tau).add(&gamma),
    );
    let hq = b.put(
        "heavy_u.q",
        HEAVY_U,
        "2*delta*(2*gamma*(delta+1)+1)+gamma",
        two_delta.mul(&two.mul(&gamma).mul(&delta.add(&one)).add(&one)).add(&gamma),
    );
    let delta_sq = delta.mul(&delta);
    let j_size = |q: &Nat, s: &Nat| {
        let inner = one
            .add(&q.add(s).mul(&delta_sq.add(&one)))
            .add(&two_delta)
            .add(&delta.mul(&tau));
        two.mul(q).mul(&zeta).mul(&beta).mul(&inner).mul(&tau)
    };
    let hm = b.put(
        "heavy_u.m",
        HEAVY_U,
        "2*heavy_u.q*zeta*beta*(1+(heavy_u.q+heavy_u.s)*(delta^2+1)+2*delta+delta*tau)*tau",
        j_size(&hq, &hs),
    );
    b.put(
        "heavy_u.l",
        HEAVY_U,
        "2*heavy_u.s*heavy_u.m*zeta^2*delta*(2*(delta+2)*heavy_u.s+3)*beta^2*tau^3",
        two.mul(&hs)
            .mul(&hm)
            .mul(&zeta.mul(&zeta))
            .mul(&delta)
            .mul(&two.mul(&delta.add(&two)).mul(&hs).add(&n(3)))
            .mul(&beta.mul(&beta))
            .mul(&tau.mul(&tau).mul(&tau)),
    );
    b.put(
        "common_root.j",
        COMMON_ROOT,
        "2*heavy_u.q*zeta*beta*(1+(heavy_u.q+heavy_u.s)*(delta^2+1)+2*delta+delta*tau)*tau",
        j_size(&hq, &hs),
    );

    let eta_min = b.put(
        "nested.eta_min",
        NESTED,
        "alpha+2*(delta+1)^3*(epsilon+1)^2",
        alpha.add(&two.mul(&delta.add(&one).pow(&n(3))).mul(&epsilon.add(&one).pow(&two))),
    );
    b.put("nested.zeta_min", NESTED, "nested.eta_min+delta", eta_min.add(&delta));
    let ns3 = b.put(
        "nested.s3",
        NESTED,
        "(delta*(delta+1)+1)*epsilon+delta",
        delta.mul(&delta.add(&one)).add(&one).mul(&epsilon).add(&delta),
    );
    let ns2 = b.put(
        "nested.s2",
        NESTED,
        "((2*delta*epsilon+1)*delta*tau+epsilon)*nested.s3",
        two_delta.mul(&epsilon).add(&one).mul(&delta).mul(&tau).add(&epsilon).mul(&ns3),
    );
    let ns1 = b.put(
        "nested.s1",
        NESTED,
        "(2*epsilon+1)*tau*nested.s2",
        two.mul(&epsilon).add(&one).mul(&tau).mul(&ns2),
    );
    let ns = b.put("nested.s", NESTED, "nested.s1+epsilon", ns1.add(&epsilon));
    let t4 = b.put("nested.t4", NESTED, "2*delta", two_delta.clone());
    let t3 = b.put("nested.t3", NESTED, "2*delta*nested.t4", two_delta.mul(&t4));
    let t2 = b.put(
        "nested.t2",
        NESTED,
        "(alpha*tau*2^(beta*zeta)+1)*nested.t3",
        dense_t.add(&one).mul(&t3),
    );
    let t1 = b.put("nested.t1", NESTED, "nested.t2^nested.s2", t2.pow(&ns2));
    b.put(
        "nested.t",
        NESTED,
        "1+2^nested.s2*delta*tau+nested.t1",
        one.add(&two.pow(&ns2).mul(&delta).mul(&tau)).add(&t1),
    );

    let bq = b.put("strong_triples.q", STRONG_TRIPLES, "2*delta+nested.s", two_delta.add(&ns));
    let r_tail = one.add(
        &tau.mul(
            &bq.add(&ns)
                .mul(&delta_sq)
                .add(&two.mul(&ns).mul(&delta.add(&one)).add(&one).mul(&delta).mul(&tau)),
        ),
    );
    let r = b.put(
        "strong_triples.r",
        STRONG_TRIPLES,
        "(4*(delta+1)*nested.s+1)*strong_triples.q*zeta*beta*tau*(1+tau*((strong_triples.q+nested.s)*delta^2+(2*nested.s*(delta+1)+1)*delta*tau))",
        n(4).mul(&delta.add(&one))
            .mul(&ns)
            .add(&one)
            .mul(&bq)
            .mul(&zeta)
            .mul(&beta)
            .mul(&tau)
            .mul(&r_tail),
    );
    b.put(
        "strong_triples.bound",
        STRONG_TRIPLES,
        "3*strong_triples.r*nested.s*beta*delta*zeta*tau^2",
        n(3).mul(&r).mul(&ns).mul(&beta).mul(&delta).mul(&zeta).mul(&tau.mul(&tau)),
    );

    Ok(Ledger {
        params: p.clone(),
        entries: b.entries,
    })
}

/// The constants the cleaning passes and audits compare against, in machine
/// width; `None` where a value overflows `u128`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Thresholds {
    pub gamma: u128,
    pub epsilon: u128,
    pub d: u128,
    pub dense_t: Option<u128>,
    pub strong_h_s: u128,
    pub two_clean_t: u128,
    pub heavy_u_l: Option<u128>,
    pub nested_s: Option<u128>,
}

fn checked_product(xs: &[u128]) -> Option<u128> {
    xs.iter().try_fold(1u128, |acc, &x| acc.checked_mul(x))
}

/// Machine-width versions of the ledger values used at instance scale.
pub fn thresholds(p: &Params) -> Result<Thresholds> {
    p.validate()?;
    let [delta, tau, alpha, beta, zeta] = [p.delta, p.tau, p.alpha, p.beta, p.zeta].map(|x| x as u128);
    let overflow = || Error::InvalidParameter("parameters overflow machine-width constants".into());
    let gamma = (2 * delta * tau + 1)
        .checked_mul(2 * delta + 1)
        .ok_or_else(overflow)?;
    let epsilon = checked_product(&[beta + 1, gamma, delta]).ok_or_else(overflow)?;
    let d = gamma.checked_mul(delta - 1).ok_or_else(overflow)?;
    let dense_t = u32::try_from(beta * zeta)
        .ok()
        .and_then(|e| 2u128.checked_pow(e))
        .and_then(|x| checked_product(&[alpha, tau, x]));
    let s3 = 2 * delta * tau;
    let s2 = checked_product(&[2 * (delta + 1), gamma]).and_then(|x| (x + 1).checked_mul(s3));
    let strong_h_s = s2
        .and_then(|s2| checked_product(&[zeta, beta, s2 + gamma]))
        .ok_or_else(overflow)?;
    let two_clean_t = checked_product(&[d + 1, beta, zeta, tau]).ok_or_else(overflow)?;
    let heavy_u_l = (|| {
        let s = checked_product(&[2, 2 * gamma + 1, delta, tau])? + gamma;
        let q = checked_product(&[2 * delta, 2 * gamma * (delta + 1) + 1])? + gamma;
        let inner = 1 + checked_product(&[q + s, delta * delta + 1])? + 2 * delta + delta * tau;
        let m = checked_product(&[2, q, zeta, beta, inner, tau])?;
        let mid = checked_product(&[2 * (delta + 2), s])? + 3;
        checked_product(&[2, s, m, zeta, zeta, delta, mid, beta, beta, tau, tau, tau])
    })();
    let nested_s = (|| {
        let s3 = checked_product(&[delta * (delta + 1) + 1, epsilon])? + delta;
        let s2 = checked_product(&[checked_product(&[2 * delta, epsilon])? + 1, delta, tau])? + epsilon;
        let s2 = s2.checked_mul(s3)?;
        let s1 = checked_product(&[2 * epsilon + 1, tau, s2])?;
        s1.checked_add(epsilon)
    })();
    Ok(Thresholds {
        gamma,
        epsilon,
        d,
        dense_t,
        strong_h_s,
        two_clean_t,
        heavy_u_l,
        nested_s,
    })
}

/// `(q, r, 3rsβδζτ²)` for the strong-triple bound with index-count bound `s`.
pub fn strong_triple_bound(p: &Params, s: u64) -> (BigUint, BigUint, BigUint) {
    let b = |x: usize| BigUint::from(x);
    let (delta, tau, beta, zeta) = (b(p.delta), b(p.tau), b(p.beta), b(p.zeta));
    let s = BigUint::from(s);
    let one = BigUint::one();
    let q = &delta * 2u32 + &s;
    let tail = &one
        + &tau
            * ((&q + &s) * &delta * &delta + (&s * 2u32 * (&delta + &one) + &one) * &delta * &tau);
    let r = (&s * 4u32 * (&delta + &one) + &one) * &q * &zeta * &beta * &tau * tail;
    let bound = &r * 3u32 * &s * &beta * &delta * &zeta * &tau * &tau;
    (q, r, bound)
}

// --- χ-loss functions -----------------------------------------------------

/// One stage's χ-loss function `φ(x) = ψ(arg(x))`, where `ψ` is the
/// function of the previous stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum PhiStep {
    /// `φ(x) = x + θ(ζ)`; the innermost stage, `ψ` is ignored.
    Leftover { theta_zeta: BigUint },
    /// `φ(x) = ψ((2t+1)x)`.
    Partial1 { t: BigUint },
    /// `φ(x) = ψ(x + tτ)`.
    Clean1 { t: BigUint, tau: BigUint },
    /// `φ(x) = ψ((2s+1)x)`.
    Partial2 { s: BigUint },
    /// `φ(x) = ψ((x + β + 1)t)`.
    Clean2 { t: BigUint, beta: BigUint },
    /// `φ(x) = ψ(x + δτ² + ℓ)`.
    Clean3 { delta: BigUint, tau: BigUint, ell: BigUint },
}

impl PhiStep {
    /// The value handed to `ψ`.
    pub fn argument(&self, x: &BigUint) -> BigUint {
        let one = BigUint::one();
        match self {
            PhiStep::Leftover { theta_zeta } => x + theta_zeta,
            PhiStep::Partial1 { t } => (t * 2u32 + &one) * x,
            PhiStep::Clean1 { t, tau } => x + t * tau,
            PhiStep::Partial2 { s } => (s * 2u32 + &one) * x,
            PhiStep::Clean2 { t, beta } => (x + beta + &one) * t,
            PhiStep::Clean3 { delta, tau, ell } => x + delta * tau * tau + ell,
        }
    }

    pub fn apply(&self, x: &BigUint, psi: &dyn Fn(&BigUint) -> BigUint) -> BigUint {
        match self {
            PhiStep::Leftover { .. } => self.argument(x),
            _ => psi(&self.argument(x)),
        }
    }
}

/// Stage ids from innermost to outermost.
pub const PIPELINE: [&str; 6] = [
    ids::LEFTOVER,
    ids::PARTIAL_1,
    ids::CLEAN_1,
    ids::PARTIAL_2,
    ids::CLEAN_2,
    ids::CLEAN_3,
];

fn exact_of(l: &Ledger, key: &str) -> Result<BigUint> {
    l.get(key)
        .and_then(|v| v.exact().cloned())
        .ok_or_else(|| Error::TooLarge {
            what: "constant",
            size: l.get(key).map_or(0, |v| v.bits().0 as usize),
            limit: MATERIALIZE_BITS as usize,
        })
}

/// The step for stage `id`, with its constants taken from the ledger.
pub fn phi_step(p: &Params, id: &str) -> Result<PhiStep> {
    let l = ledger(p)?;
    let big = |x: usize| BigUint::from(x);
    Ok(match id {
        ids::LEFTOVER => PhiStep::Leftover {
            theta_zeta: BigUint::from(p.theta.value(p.zeta)),
        },
        ids::PARTIAL_1 => PhiStep::Partial1 {
            t: exact_of(&l, "dense.t")?,
        },
        ids::CLEAN_1 => PhiStep::Clean1 {
            t: exact_of(&l, "dense.t")?,
            tau: big(p.tau),
        },
        ids::PARTIAL_2 => PhiStep::Partial2 {
            s: exact_of(&l, "strong_h.s")?,
        },
        ids::CLEAN_2 => PhiStep::Clean2 {
            t: exact_of(&l, "two_clean.t")?,
            beta: big(p.beta),
        },
        ids::CLEAN_3 => PhiStep::Clean3 {
            delta: big(p.delta),
            tau: big(p.tau),
            ell: exact_of(&l, "heavy_u.l")?,
        },
        other => return Err(Error::Unknown(other.into())),
    })
}

/// `φ(c)` for stage `id` with the supplied inner `ψ`.
pub fn phi_chain(p: &Params, id: &str, c: &BigUint, psi: &dyn Fn(&BigUint) -> BigUint) -> Result<BigUint> {
    Ok(phi_step(p, id)?.apply(c, psi))
}

/// The fully composed bound through stage `id`: each stage's `ψ` is the
/// previous stage's `φ`.
pub fn composed_phi(p: &Params, id: &str, c: &BigUint) -> Result<BigUint> {
    let upto = PIPELINE
        .iter()
        .position(|&s| s == id)
        .ok_or_else(|| Error::Unknown(id.into()))?;
    let steps = PIPELINE[..=upto]
        .iter()
        .map(|s| phi_step(p, s))
        .collect::<Result<Vec<_>>>()?;
    let mut x = c.clone();
    for step in steps.iter().rev() {
        x = step.argument(&x);
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    const PRIMES: [u64; 4] = [1_000_000_007, 998_244_353, 2_147_483_647, 4_294_967_291];

    /// Independent evaluation of a stored formula string: exact value when
    /// small, residues modulo `PRIMES` always.
    #[derive(Clone, Debug)]
    struct Val {
        exact: Option<BigUint>,
        res: [u64; 4],
    }

    struct Eval<'a> {
        toks: Vec<String>,
        pos: usize,
        env: &'a BTreeMap<String, Val>,
    }

    fn lex(s: &str) -> Vec<String> {
        let mut out = Vec::new();
        let cs: Vec<char> = s.chars().collect();
        let mut i = 0;
        while i < cs.len() {
            let c = cs[i];
            if c.is_ascii_alphanumeric() || c == '_' || c == '.' {
                let st = i;
                while i < cs.len() && (cs[i].is_ascii_alphanumeric() || cs[i] == '_' || cs[i] == '.') {
                    i += 1;
                }
                out.push(cs[st..i].iter().collect());
            } else {
                if !c.is_whitespace() {
                    out.push(c.to_string());
                }
                i += 1;
            }
        }
        out
    }

    fn combine(a: &Val, b: &Val, op: char) -> Val {
        let mut res = [0u64; 4];
        for k in 0..4 {
            let m = PRIMES[k] as u128;
            let (x, y) = (a.res[k] as u128, b.res[k] as u128);
            res[k] = match op {
                '+' => ((x + y) % m) as u64,
                '-' => ((x + m - y) % m) as u64,
                '*' => ((x * y) % m) as u64,
                _ => {
                    // exponent must be exact
                    let e = b.exact.clone().expect("exact exponent");
                    BigUint::from(x as u64).modpow(&e, &BigUint::from(m as u64)).to_u64().unwrap()
                }
            };
        }
        let exact = match (&a.exact, &b.exact) {
            (Some(x), Some(y)) => match op {
                '+' => Some(x + y),
                '-' => Some(x - y),
                '*' => Some(x * y),
                _ => {
                    let e = y.to_u64().unwrap_or(u64::MAX);
                    if x.bits().saturating_mul(e) <= MATERIALIZE_BITS || x <= &BigUint::one() {
                        Some(x.pow(e as u32))
                    } else {
                        None
                    }
                }
            },
            _ => None,
        };
        Val { exact, res }
    }

    impl Eval<'_> {
        fn peek(&self) -> Option<&str> {
            self.toks.get(self.pos).map(|s| s.as_str())
        }
        fn next(&mut self) -> String {
            self.pos += 1;
            self.toks[self.pos - 1].clone()
        }
        fn expr(&mut self) -> Val {
            let mut v = self.term();
            while let Some(op @ ("+" | "-")) = self.peek() {
                let op = op.chars().next().unwrap();
                self.next();
                let r = self.term();
                v = combine(&v, &r, op);
            }
            v
        }
        fn term(&mut self) -> Val {
            let mut v = self.power();
            while self.peek() == Some("*") {
                self.next();
                let r = self.power();
                v = combine(&v, &r, '*');
            }
            v
        }
        fn power(&mut self) -> Val {
            let base = self.atom();
            if self.peek() == Some("^") {
                self.next();
                let e = self.power();
                return combine(&base, &e, '^');
            }
            base
        }
        fn atom(&mut self) -> Val {
            let t = self.next();
            if t == "(" {
                let v = self.expr();
                assert_eq!(self.next(), ")");
                return v;
            }
            if let Ok(x) = t.parse::<u64>() {
                let mut res = [0; 4];
                for k in 0..4 {
                    res[k] = x % PRIMES[k];
                }
                return Val {
                    exact: Some(BigUint::from(x)),
                    res,
                };
            }
            self.env.get(&t).unwrap_or_else(|| panic!("unbound {t}")).clone()
        }
    }

    fn reevaluate(l: &Ledger) -> BTreeMap<String, Val> {
        let p = &l.params;
        let mut env = BTreeMap::new();
        for (k, v) in [
            ("delta", p.delta),
            ("tau", p.tau),
            ("alpha", p.alpha),
            ("beta", p.beta),
            ("zeta", p.zeta),
            ("eta", p.eta),
        ] {
            let x = v as u64;
            let mut res = [0; 4];
            for i in 0..4 {
                res[i] = x % PRIMES[i];
            }
            env.insert(k.to_string(), Val { exact: Some(BigUint::from(x)), res });
        }
        for e in &l.entries {
            let mut ev = Eval {
                toks: lex(e.formula),
                pos: 0,
                env: &env,
            };
            let v = ev.expr();
            assert_eq!(ev.pos, ev.toks.len(), "trailing tokens in {}", e.formula);
            env.insert(e.key.to_string(), v);
        }
        env
    }

    fn agrees(l: &Ledger) {
        let env = reevaluate(l);
        for e in &l.entries {
            let v = &env[e.key];
            match (&e.value, &v.exact) {
                (Nat::Exact(a), Some(b)) => assert_eq!(a, b, "{}", e.key),
                (Nat::Deferred(_), None) => {}
                _ => panic!("{}: exactness differs", e.key),
            }
            for (k, &m) in PRIMES.iter().enumerate() {
                assert_eq!(e.value.residue(m), Some(v.res[k]), "{} mod {m}", e.key);
            }
            if let Some(b) = &v.exact {
                let (lo, hi) = e.value.bits();
                assert!(lo <= b.bits() && b.bits() <= hi);
            }
        }
    }

    fn params(delta: usize, tau: usize, beta: usize, zeta: usize) -> Params {
        let mut p = Params::minimal(delta, tau, 1, beta);
        p.zeta = zeta;
        p
    }

    #[test]
    fn hand_values() {
        let l = ledger(&params(1, 1, 2, 3)).unwrap();
        for (k, v) in [
            ("gamma", 9),
            ("epsilon", 27),
            ("d", 0),
            ("strong_h.s3", 2),
            ("strong_h.s2", 74),
            ("strong_h.s1", 83),
            ("strong_h.s", 498),
        ] {
            assert_eq!(l.small(k), Some(v), "{k}");
        }
        agrees(&l);
    }

    #[test]
    fn ledger_matches_independent_evaluator() {
        for delta in 1..=2 {
            for tau in 0..=2 {
                for beta in 2..=3 {
                    let p = Params::minimal(delta, tau, 1, beta);
                    agrees(&ledger(&p).unwrap());
                }
            }
        }
    }

    #[test]
    fn nested_power_is_large() {
        let l = ledger(&params(1, 1, 2, 4)).unwrap();
        let t1 = l.get("nested.t1").unwrap();
        assert!(t1.bits().0 > 100);
        assert!(t1.is_exact());
        // large parameters stay deferred but keep exact residues
        let big = ledger(&params(2, 2, 3, 4)).unwrap();
        let t = big.get("nested.t").unwrap();
        assert!(!t.is_exact());
        assert!(t.bits().0 > 1 << 22);
        assert!(t.residue(PRIMES[0]).is_some());
    }

    #[test]
    fn monotone_in_each_parameter() {
        let grid = |d, t, b, z| ledger(&params(d, t, b, z)).unwrap();
        let base = [(1, 1, 2, 3), (1, 0, 2, 3), (2, 1, 2, 4)];
        for &(d, t, b, z) in &base {
            let l0 = grid(d, t, b, z);
            for l1 in [grid(d + 1, t, b, z + 1), grid(d, t + 1, b, z), grid(d, t, b + 1, z), grid(d, t, b, z + 1)] {
                for (e0, e1) in l0.entries.iter().zip(&l1.entries) {
                    if let Some(ord) = e0.value.try_cmp(&e1.value) {
                        assert_ne!(ord, core::cmp::Ordering::Greater, "{}", e0.key);
                    }
                }
            }
        }
    }

    #[test]
    fn nat_arithmetic() {
        let a = Nat::from_u64(3);
        let huge = a.pow(&Nat::from_u64(10_000_000));
        assert!(!huge.is_exact());
        let s = huge.add(&Nat::from_u64(1));
        // 3^k mod 2 = 1, so 3^k + 1 is even
        assert_eq!(s.residue(2), Some(0));
        assert_eq!(huge.render(), "3^10000000");
        assert_eq!(s.render(), "(3^10000000) + 1");
        assert_eq!(Nat::from_u64(0).pow(&Nat::from_u64(0)), Nat::from_u64(1));
        assert_eq!(Nat::from_u64(2).pow(&Nat::from_u64(10)), Nat::from_u64(1024));
        let (lo, hi) = huge.bits();
        // log2(3) * 1e7 ≈ 15849625
        assert!(lo <= 15_849_626 && 15_849_626 <= hi);
    }

    #[test]
    fn thresholds_agree_with_ledger() {
        for delta in 1..=2 {
            for tau in 0..=2 {
                for beta in 2..=3 {
                    let p = Params::minimal(delta, tau, 1, beta);
                    let l = ledger(&p).unwrap();
                    let t = thresholds(&p).unwrap();
                    let get = |k: &str| l.get(k).unwrap().exact().unwrap().to_u128().unwrap();
                    assert_eq!(t.gamma, get("gamma"));
                    assert_eq!(t.epsilon, get("epsilon"));
                    assert_eq!(t.d, get("d"));
                    assert_eq!(t.dense_t, Some(get("dense.t")));
                    assert_eq!(t.strong_h_s, get("strong_h.s"));
                    assert_eq!(t.two_clean_t, get("two_clean.t"));
                    assert_eq!(t.heavy_u_l, Some(get("heavy_u.l")));
                    assert_eq!(t.nested_s, Some(get("nested.s")));
                    let s = t.nested_s.unwrap() as u64;
                    let (q, r, bound) = strong_triple_bound(&p, s);
                    assert_eq!(q.to_u128().unwrap(), get("strong_triples.q"));
                    assert_eq!(r.to_u128(), l.get("strong_triples.r").unwrap().exact().unwrap().to_u128());
                    assert_eq!(&bound, l.get("strong_triples.bound").unwrap().exact().unwrap());
                }
            }
        }
    }

    #[test]
    fn phi_examples() {
        let id = |x: &BigUint| x.clone();
        let c = BigUint::from(2u32);
        assert_eq!(PhiStep::Partial1 { t: 1u32.into() }.apply(&c, &id), 6u32.into());
        let step = PhiStep::Clean1 {
            t: 2u32.into(),
            tau: 3u32.into(),
        };
        assert_eq!(step.apply(&BigUint::from(5u32), &id), 11u32.into());
        let zero = BigUint::zero();
        for step in [
            PhiStep::Partial1 { t: zero.clone() },
            PhiStep::Partial2 { s: zero.clone() },
            PhiStep::Clean1 {
                t: zero.clone(),
                tau: 4u32.into(),
            },
        ] {
            assert_eq!(step.apply(&zero, &id), zero);
        }
        let p = params(1, 1, 2, 3);
        assert!(phi_chain(&p, "no-such-stage", &c, &id).is_err());
        // dense.t = 1*1*2^6 = 64, so partial-1 gives (2*64+1)*2
        assert_eq!(phi_chain(&p, ids::PARTIAL_1, &c, &id).unwrap(), 258u32.into());
    }

    #[test]
    fn composition_follows_pipeline() {
        let p = params(1, 1, 2, 3);
        let c = BigUint::from(1u32);
        // innermost stage: x + θ(ζ) with the identity table
        assert_eq!(composed_phi(&p, ids::LEFTOVER, &c).unwrap(), 4u32.into());
        // partial-1 then leftover: (2*64+1)*1 + 3
        assert_eq!(composed_phi(&p, ids::PARTIAL_1, &c).unwrap(), 132u32.into());
        let a = composed_phi(&p, ids::CLEAN_2, &c).unwrap();
        let b = composed_phi(&p, ids::CLEAN_3, &c).unwrap();
        assert!(a < b);
        // composing manually gives the same value
        let l1 = |x: &BigUint| phi_chain(&p, ids::LEFTOVER, x, &|y| y.clone()).unwrap();
        let p1 = |x: &BigUint| phi_chain(&p, ids::PARTIAL_1, x, &l1).unwrap();
        let c1 = |x: &BigUint| phi_chain(&p, ids::CLEAN_1, x, &p1).unwrap();
        assert_eq!(c1(&c), composed_phi(&p, ids::CLEAN_1, &c).unwrap());
    }
}
