//! Negacyclic polynomial kernels over a single prime: reference NTT/INTT,
//! the hierarchical N1×N2 NTT, automorphisms and the triadic MAS unit.
//!
//! Matrix layout: coefficient `i` sits in memory `i / N1` at address `i % N1`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::modarith::{bit_reverse, PrimeModulus, TwiddleGen, TwiddleMode, TwiddleTable};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolyError {
    #[error("expected {expected:?} domain, found {found:?}")]
    DomainError { expected: Domain, found: Domain },
    #[error("operands are in different domains")]
    DomainMismatch,
    #[error("operands use different moduli ({0} vs {1})")]
    ModulusMismatch(usize, usize),
    #[error("plan {n1}x{n2} does not factor N={n}")]
    PlanMismatch { n1: usize, n2: usize, n: usize },
    #[error("galois element {0} is not odd or out of range")]
    InvalidGalois(u64),
    #[error("MAC needs an accumulator")]
    MissingAccumulator,
    #[error("length {found} does not match ring degree {expected}")]
    LengthMismatch { expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Domain {
    Coeff,
    Ntt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    pub coeffs: Vec<u64>,
    pub modulus_id: usize,
    pub domain: Domain,
}

impl Poly {
    pub fn zero(n: usize, modulus_id: usize, domain: Domain) -> Self {
        Self { coeffs: vec![0; n], modulus_id, domain }
    }

    pub fn from_coeffs(coeffs: Vec<u64>, modulus_id: usize) -> Self {
        Self { coeffs, modulus_id, domain: Domain::Coeff }
    }

    pub fn n(&self) -> usize {
        self.coeffs.len()
    }

    fn expect(&self, d: Domain) -> Result<(), PolyError> {
        if self.domain == d {
            Ok(())
        } else {
            Err(PolyError::DomainError { expected: d, found: self.domain })
        }
    }
}

/// A modulus with its bit-reversed twiddle tables.
#[derive(Debug, Clone)]
pub struct NttContext {
    pub m: PrimeModulus,
    pub table: TwiddleTable,
}

impl NttContext {
    pub fn new(m: PrimeModulus) -> Self {
        let table = TwiddleTable::new(&m);
        Self { m, table }
    }

    pub fn n(&self) -> usize {
        self.m.n()
    }
}

/// In-place Cooley-Tukey negacyclic NTT; natural-order input, bit-reversed output.
pub fn negacyclic_ct(a: &mut [u64], m: &PrimeModulus, psi_rev: &[u64]) {
    let n = a.len();
    let mut t = n;
    let mut stride = 1;
    while stride < n {
        t >>= 1;
        for i in 0..stride {
            let j1 = 2 * i * t;
            let s = psi_rev[stride + i];
            for j in j1..j1 + t {
                let u = a[j];
                let v = m.mul(a[j + t], s);
                a[j] = m.add(u, v);
                a[j + t] = m.sub(u, v);
            }
        }
        stride <<= 1;
    }
}

/// In-place Gentleman-Sande inverse of [`negacyclic_ct`], without the 1/N scaling.
pub fn negacyclic_gs(a: &mut [u64], m: &PrimeModulus, psi_inv_rev: &[u64]) {
    let n = a.len();
    let mut t = 1;
    let mut stride = n;
    while stride > 1 {
        let h = stride >> 1;
        let mut j1 = 0;
        for i in 0..h {
            let s = psi_inv_rev[h + i];
            for j in j1..j1 + t {
                let u = a[j];
                let v = a[j + t];
                a[j] = m.add(u, v);
                a[j + t] = m.mul(m.sub(u, v), s);
            }
            j1 += 2 * t;
        }
        t <<= 1;
        stride = h;
    }
}

pub fn ntt_reference(ctx: &NttContext, p: &Poly) -> Result<Poly, PolyError> {
    p.expect(Domain::Coeff)?;
    let mut out = p.clone();
    negacyclic_ct(&mut out.coeffs, &ctx.m, &ctx.table.psi_rev);
    out.domain = Domain::Ntt;
    Ok(out)
}

pub fn intt_reference(ctx: &NttContext, p: &Poly) -> Result<Poly, PolyError> {
    p.expect(Domain::Ntt)?;
    let mut out = p.clone();
    negacyclic_gs(&mut out.coeffs, &ctx.m, &ctx.table.psi_inv_rev);
    for c in out.coeffs.iter_mut() {
        *c = ctx.m.mul(*c, ctx.m.n_inv);
    }
    out.domain = Domain::Coeff;
    Ok(out)
}

/// Factorization `N = N1·N2` of the hierarchical transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NttPlan {
    pub n1: usize,
    pub n2: usize,
    #[serde(default)]
    pub twiddle_mode: TwiddleMode,
}

impl NttPlan {
    pub fn new(n1: usize, n2: usize, twiddle_mode: TwiddleMode) -> Self {
        Self { n1, n2, twiddle_mode }
    }

    pub fn validate(&self, n: usize) -> Result<(), PolyError> {
        if self.n1 * self.n2 != n || !self.n1.is_power_of_two() || !self.n2.is_power_of_two() {
            return Err(PolyError::PlanMismatch { n1: self.n1, n2: self.n2, n });
        }
        Ok(())
    }

    /// Every power-of-two split of `n`.
    pub fn all_splits(n: usize, mode: TwiddleMode) -> Vec<NttPlan> {
        (0..=n.trailing_zeros()).map(|b| NttPlan::new(n >> b, 1 << b, mode)).collect()
    }
}

/// Twiddle material for one plan: bit-reversed sub-root tables for both phases
/// plus the inter-phase multipliers `psi^(a·(2·e2+1-N2))`.
#[derive(Debug, Clone)]
pub struct HybridTwiddles {
    pub col_psi_rev: Vec<u64>,
    pub row_psi_rev: Vec<u64>,
    /// Indexed `[e2 * N1 + a]`.
    pub cross: Vec<u64>,
}

impl HybridTwiddles {
    pub fn new(ctx: &NttContext, plan: &NttPlan) -> Result<Self, PolyError> {
        let n = ctx.n();
        plan.validate(n)?;
        let (n1, n2) = (plan.n1, plan.n2);
        let two_n = 2 * n;
        let m = &ctx.m;
        let (lg1, lg2) = (n1.trailing_zeros(), n2.trailing_zeros());
        let cross_exp = |e2: usize| (2 * e2 + 1 + two_n - n2) % two_n;
        match plan.twiddle_mode {
            TwiddleMode::Stored => {
                let t = &ctx.table;
                let col = (0..n2).map(|i| t.natural(n1 * bit_reverse(i, lg2) % two_n)).collect();
                let row = (0..n1).map(|i| t.natural(n2 * bit_reverse(i, lg1) % two_n)).collect();
                let mut cross = Vec::with_capacity(n);
                for e2 in 0..n2 {
                    let step = cross_exp(e2);
                    cross.extend((0..n1).map(|a| t.natural(a * step % two_n)));
                }
                Ok(Self { col_psi_rev: col, row_psi_rev: row, cross })
            }
            TwiddleMode::OnTheFly => {
                let sub_table = |root: u64, len: usize, lg: u32| {
                    let powers: Vec<u64> = TwiddleGen::new(m, 1, root).take(len).collect();
                    (0..len).map(|i| powers[bit_reverse(i, lg)]).collect::<Vec<_>>()
                };
                let col = sub_table(m.pow(m.psi, n1 as u64), n2, lg2);
                let row = sub_table(m.pow(m.psi, n2 as u64), n1, lg1);
                let mut cross = Vec::with_capacity(n);
                for e2 in 0..n2 {
                    let step = m.pow(m.psi, cross_exp(e2) as u64);
                    cross.extend(TwiddleGen::new(m, 1, step).take(n1));
                }
                Ok(Self { col_psi_rev: col, row_psi_rev: row, cross })
            }
        }
    }
}

/// Hierarchical NTT producing the same bit-reversed ordering as [`ntt_reference`].
///
/// Phase one runs N1 negacyclic transforms of length N2, one per address,
/// across the N2 memories. Phase two multiplies by the cross twiddles and runs
/// N2 transforms of length N1 inside each memory. The result is gathered
/// straight into reference order.
pub fn ntt_hybrid(ctx: &NttContext, p: &Poly, plan: &NttPlan) -> Result<Poly, PolyError> {
    p.expect(Domain::Coeff)?;
    let tw = HybridTwiddles::new(ctx, plan)?;
    ntt_hybrid_with(ctx, p, plan, &tw)
}

pub fn ntt_hybrid_with(ctx: &NttContext, p: &Poly, plan: &NttPlan, tw: &HybridTwiddles) -> Result<Poly, PolyError> {
    p.expect(Domain::Coeff)?;
    let n = ctx.n();
    plan.validate(n)?;
    if p.n() != n {
        return Err(PolyError::LengthMismatch { expected: n, found: p.n() });
    }
    let (n1, n2) = (plan.n1, plan.n2);
    let m = &ctx.m;
    // mem[j][a] holds coefficient j*N1 + a; phase one works on one address row at a time.
    let mut mem: Vec<Vec<u64>> = p.coeffs.chunks(n1).map(|c| c.to_vec()).collect();
    let mut row = vec![0u64; n2];
    for a in 0..n1 {
        for j in 0..n2 {
            row[j] = mem[j][a];
        }
        negacyclic_ct(&mut row, m, &tw.col_psi_rev);
        // position k2 holds the evaluation index e2 = bitrev(k2)
        for k2 in 0..n2 {
            let e2 = bit_reverse(k2, n2.trailing_zeros());
            mem[e2][a] = m.mul(row[k2], tw.cross[e2 * n1 + a]);
        }
    }
    for col in mem.iter_mut() {
        negacyclic_ct(col, m, &tw.row_psi_rev);
    }
    let (lg, lg1) = (n.trailing_zeros(), n1.trailing_zeros());
    let coeffs = (0..n)
        .map(|k| {
            let e = bit_reverse(k, lg);
            let (e2, e1) = (e % n2, e / n2);
            mem[e2][bit_reverse(e1, lg1)]
        })
        .collect();
    Ok(Poly { coeffs, modulus_id: p.modulus_id, domain: Domain::Ntt })
}

fn check_galois(gle: u64, n: usize) -> Result<(), PolyError> {
    if gle % 2 == 0 || gle >= 2 * n as u64 {
        return Err(PolyError::InvalidGalois(gle));
    }
    Ok(())
}

/// Direct O(N) negacyclic map `x -> x^gle`.
pub fn automorphism_oracle(ctx: &NttContext, p: &Poly, gle: u64) -> Result<Poly, PolyError> {
    p.expect(Domain::Coeff)?;
    let n = p.n();
    check_galois(gle, n)?;
    let two_n = 2 * n as u64;
    let mut out = vec![0u64; n];
    for (i, &c) in p.coeffs.iter().enumerate() {
        let t = (i as u64 * gle) % two_n;
        let v = if t >= n as u64 { ctx.m.neg(c) } else { c };
        out[(t % n as u64) as usize] = v;
    }
    Ok(Poly { coeffs: out, modulus_id: p.modulus_id, domain: Domain::Coeff })
}

/// Galois element for a slot rotation: `5^rot mod 2N`.
pub fn galois_element(rot: i64, n: usize) -> u64 {
    let two_n = 2 * n as u64;
    let order = (n / 2) as i64;
    let r = rot.rem_euclid(order) as u64;
    let mut g = 1u64;
    for _ in 0..r {
        g = g * 5 % two_n;
    }
    g
}

/// Routes `lanes[j]` to lane `dest[j]` through log2(len) pairwise exchange
/// stages, fixing one destination bit per stage from the least significant up.
/// Returns `None` if two lanes contend for the same slot.
pub fn shuffle_tree<T: Copy>(lanes: &mut [(usize, T)]) -> Option<()> {
    let len = lanes.len();
    let stages = len.trailing_zeros();
    for s in 0..stages {
        let bit = 1usize << s;
        for p in 0..len {
            if p & bit != 0 {
                continue;
            }
            let q = p | bit;
            let want_p = lanes[p].0 & bit;
            let want_q = lanes[q].0 & bit;
            if want_p == want_q {
                return None;
            }
            if want_p != 0 {
                lanes.swap(p, q);
            }
        }
    }
    Some(())
}

/// Fault knobs for mutation testing of the shuffle path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShuffleFault {
    #[default]
    None,
    /// Writes each row one address past its true destination.
    AddressOffByOne,
}

/// Row-by-row automorphism over the matrix layout.
///
/// Each address `l0` holds N2 coefficients that all land on the same address
/// `l1 = l0·gle mod N1`; the lane permutation `j -> (c + j·gle) mod N2` passes
/// through [`shuffle_tree`] and the negacyclic sign is applied on write.
pub fn automorphism_shuffle(ctx: &NttContext, p: &Poly, gle: u64, plan: &NttPlan) -> Result<Poly, PolyError> {
    automorphism_shuffle_faulty(ctx, p, gle, plan, ShuffleFault::None)
}

pub fn automorphism_shuffle_faulty(
    ctx: &NttContext,
    p: &Poly,
    gle: u64,
    plan: &NttPlan,
    fault: ShuffleFault,
) -> Result<Poly, PolyError> {
    p.expect(Domain::Coeff)?;
    let n = p.n();
    check_galois(gle, n)?;
    plan.validate(n)?;
    let (n1, n2) = (plan.n1, plan.n2);
    let two_n = 2 * n as u64;
    let mut out = vec![0u64; n];
    let mut lanes: Vec<(usize, (u64, bool))> = vec![(0, (0, false)); n2];
    for l0 in 0..n1 {
        let s = (l0 as u64 * gle) % two_n;
        let mut l1 = (s % n1 as u64) as usize;
        if fault == ShuffleFault::AddressOffByOne {
            l1 = (l1 + 1) % n1;
        }
        let c = s / n1 as u64;
        for (j, lane) in lanes.iter_mut().enumerate() {
            let u = (c + j as u64 * gle) % (2 * n2 as u64);
            let coeff = p.coeffs[j * n1 + l0];
            *lane = ((u % n2 as u64) as usize, (coeff, u >= n2 as u64));
        }
        shuffle_tree(&mut lanes).expect("affine lane map is always routable");
        for (j, &(_, (coeff, negate))) in lanes.iter().enumerate() {
            out[j * n1 + l1] = if negate { ctx.m.neg(coeff) } else { coeff };
        }
    }
    Ok(Poly { coeffs: out, modulus_id: p.modulus_id, domain: Domain::Coeff })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MasOp {
    Add,
    Sub,
    Mul,
    Mac,
}

/// Triadic pointwise unit; `Mac` returns `acc + a·b`.
pub fn mas(m: &PrimeModulus, op: MasOp, a: &Poly, b: &Poly, acc: Option<&Poly>) -> Result<Poly, PolyError> {
    if a.modulus_id != b.modulus_id {
        return Err(PolyError::ModulusMismatch(a.modulus_id, b.modulus_id));
    }
    if a.domain != b.domain {
        return Err(PolyError::DomainMismatch);
    }
    if a.n() != b.n() {
        return Err(PolyError::LengthMismatch { expected: a.n(), found: b.n() });
    }
    let coeffs = match op {
        MasOp::Add => a.coeffs.iter().zip(&b.coeffs).map(|(&x, &y)| m.add(x, y)).collect(),
        MasOp::Sub => a.coeffs.iter().zip(&b.coeffs).map(|(&x, &y)| m.sub(x, y)).collect(),
        MasOp::Mul => a.coeffs.iter().zip(&b.coeffs).map(|(&x, &y)| m.mul(x, y)).collect(),
        MasOp::Mac => {
            let acc = acc.ok_or(PolyError::MissingAccumulator)?;
            if acc.modulus_id != a.modulus_id {
                return Err(PolyError::ModulusMismatch(acc.modulus_id, a.modulus_id));
            }
            if acc.domain != a.domain {
                return Err(PolyError::DomainMismatch);
            }
            a.coeffs
                .iter()
                .zip(&b.coeffs)
                .zip(&acc.coeffs)
                .map(|((&x, &y), &z)| m.add(z, m.mul(x, y)))
                .collect()
        }
    };
    Ok(Poly { coeffs, modulus_id: a.modulus_id, domain: a.domain })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modarith::find_ntt_prime;

    fn ctx(bits: u32, n: usize) -> NttContext {
        NttContext::new(find_ntt_prime(bits, 2 * n as u64, 0).unwrap())
    }

    #[test]
    fn delta_goes_to_ones() {
        let c = ctx(20, 64);
        let mut d = Poly::zero(64, 0, Domain::Coeff);
        d.coeffs[0] = 1;
        let f = ntt_reference(&c, &d).unwrap();
        assert!(f.coeffs.iter().all(|&x| x == 1));
        assert_eq!(intt_reference(&c, &f).unwrap(), d);
    }

    #[test]
    fn reference_output_is_bitreversed_evaluation() {
        let c = ctx(20, 16);
        let p = Poly::from_coeffs((1..=16).collect(), 0);
        let f = ntt_reference(&c, &p).unwrap();
        for k in 0..16 {
            let x = c.m.pow(c.m.psi, 2 * bit_reverse(k, 4) as u64 + 1);
            let eval = p.coeffs.iter().rev().fold(0, |acc, &a| c.m.add(c.m.mul(acc, x), a));
            assert_eq!(f.coeffs[k], eval);
        }
    }

    #[test]
    fn domain_guard() {
        let c = ctx(20, 16);
        let p = Poly::zero(16, 0, Domain::Ntt);
        assert!(matches!(ntt_reference(&c, &p), Err(PolyError::DomainError { .. })));
        assert!(matches!(
            ntt_hybrid(&c, &Poly::zero(16, 0, Domain::Coeff), &NttPlan::new(4, 8, TwiddleMode::Stored)),
            Err(PolyError::PlanMismatch { .. })
        ));
    }

    #[test]
    fn hand_worked_automorphisms() {
        let c = ctx(17, 8);
        let mut x = Poly::zero(8, 0, Domain::Coeff);
        x.coeffs[1] = 1;
        let y = automorphism_oracle(&c, &x, 3).unwrap();
        assert_eq!(y.coeffs[3], 1);
        let mut x3 = Poly::zero(8, 0, Domain::Coeff);
        x3.coeffs[3] = 1;
        let y = automorphism_oracle(&c, &x3, 3).unwrap();
        assert_eq!(y.coeffs[1], c.m.q - 1);
        assert_eq!(automorphism_oracle(&c, &x3, 4), Err(PolyError::InvalidGalois(4)));
    }

    #[test]
    fn shuffle_tree_identity_passes_through() {
        let mut lanes: Vec<(usize, u32)> = (0..16).map(|j| (j, j as u32)).collect();
        shuffle_tree(&mut lanes).unwrap();
        assert!(lanes.iter().enumerate().all(|(j, &(_, v))| v == j as u32));
    }

    #[test]
    fn mac_needs_accumulator() {
        let c = ctx(17, 8);
        let a = Poly::zero(8, 0, Domain::Ntt);
        assert_eq!(mas(&c.m, MasOp::Mac, &a, &a, None), Err(PolyError::MissingAccumulator));
        let b = Poly::zero(8, 1, Domain::Ntt);
        assert_eq!(mas(&c.m, MasOp::Add, &a, &b, None), Err(PolyError::ModulusMismatch(0, 1)));
    }
}
