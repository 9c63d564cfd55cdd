//! Little-endian binary formats.
//!
//! * polynomial: `N`, `modulus_id`, `domain` (0 = coefficient, 1 = NTT) as
//!   `u64`, then `N` residues as `u64`.
//! * ciphertext: `N`, `level`, `dnum` as `u64`, `scale` as `f64`, then the
//!   `level+1` limbs of `c0` followed by those of `c1`, residues only.
//! * seeded key: `N`, `dnum`, `K`, `limbs` as `u64`; per digit the `ksk0`
//!   residues followed by one 8-byte seed per limb.

use thiserror::Error;

use crate::ckks::{Ciphertext, KeySwitchKey, Ksk1, KskDigit, RnsPoly};
use crate::poly::{Domain, Poly};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodecError {
    #[error("input truncated at byte {0}")]
    Truncated(usize),
    #[error("unknown domain tag {0}")]
    BadDomain(u64),
    #[error("key is not in seeded form")]
    NotSeeded,
    #[error("{0} trailing bytes")]
    Trailing(usize),
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn u64(&mut self) -> Result<u64, CodecError> {
        let end = self.pos + 8;
        let bytes = self.buf.get(self.pos..end).ok_or(CodecError::Truncated(self.pos))?;
        self.pos = end;
        Ok(u64::from_le_bytes(bytes.try_into().expect("8 bytes")))
    }

    fn residues(&mut self, n: usize) -> Result<Vec<u64>, CodecError> {
        (0..n).map(|_| self.u64()).collect()
    }

    fn done(&self) -> Result<(), CodecError> {
        match self.buf.len() - self.pos {
            0 => Ok(()),
            r => Err(CodecError::Trailing(r)),
        }
    }
}

fn put(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_all(out: &mut Vec<u8>, vs: &[u64]) {
    for &v in vs {
        put(out, v);
    }
}

pub fn encode_poly(p: &Poly) -> Vec<u8> {
    let mut out = Vec::with_capacity(24 + 8 * p.n());
    put(&mut out, p.n() as u64);
    put(&mut out, p.modulus_id as u64);
    put(&mut out, matches!(p.domain, Domain::Ntt) as u64);
    put_all(&mut out, &p.coeffs);
    out
}

pub fn decode_poly(buf: &[u8]) -> Result<Poly, CodecError> {
    let mut r = Reader { buf, pos: 0 };
    let n = r.u64()? as usize;
    let modulus_id = r.u64()? as usize;
    let domain = match r.u64()? {
        0 => Domain::Coeff,
        1 => Domain::Ntt,
        t => return Err(CodecError::BadDomain(t)),
    };
    let coeffs = r.residues(n)?;
    r.done()?;
    Ok(Poly { coeffs, modulus_id, domain })
}

pub fn encode_ciphertext(ct: &Ciphertext, dnum: usize) -> Vec<u8> {
    let n = ct.c0.limbs[0].n();
    let mut out = Vec::new();
    put(&mut out, n as u64);
    put(&mut out, ct.level as u64);
    put(&mut out, dnum as u64);
    out.extend_from_slice(&ct.scale.to_le_bytes());
    for limb in ct.c0.limbs.iter().chain(&ct.c1.limbs) {
        put_all(&mut out, &limb.coeffs);
    }
    out
}

/// Returns the ciphertext (NTT form) and the `dnum` recorded in its header.
pub fn decode_ciphertext(buf: &[u8]) -> Result<(Ciphertext, usize), CodecError> {
    let mut r = Reader { buf, pos: 0 };
    let n = r.u64()? as usize;
    let level = r.u64()? as usize;
    let dnum = r.u64()? as usize;
    let scale = f64::from_bits(r.u64()?);
    let read = |r: &mut Reader| -> Result<RnsPoly, CodecError> {
        let limbs = (0..=level)
            .map(|id| Ok(Poly { coeffs: r.residues(n)?, modulus_id: id, domain: Domain::Ntt }))
            .collect::<Result<Vec<_>, CodecError>>()?;
        Ok(RnsPoly { limbs, level })
    };
    let c0 = read(&mut r)?;
    let c1 = read(&mut r)?;
    r.done()?;
    Ok((Ciphertext { c0, c1, level, scale }, dnum))
}

pub fn encode_seeded_key(key: &KeySwitchKey) -> Result<Vec<u8>, CodecError> {
    let first = &key.digits[0].ksk0;
    let n = first.limbs[0].n();
    let limbs = first.limbs.len();
    let mut out = Vec::new();
    put(&mut out, n as u64);
    put(&mut out, key.dnum as u64);
    put(&mut out, key.k as u64);
    put(&mut out, limbs as u64);
    for d in &key.digits {
        for limb in &d.ksk0.limbs {
            put_all(&mut out, &limb.coeffs);
        }
        match &d.ksk1 {
            Ksk1::Seeded(seeds) => put_all(&mut out, seeds),
            Ksk1::Expanded(_) => return Err(CodecError::NotSeeded),
        }
    }
    Ok(out)
}

pub fn decode_seeded_key(buf: &[u8]) -> Result<KeySwitchKey, CodecError> {
    let mut r = Reader { buf, pos: 0 };
    let n = r.u64()? as usize;
    let dnum = r.u64()? as usize;
    let k = r.u64()? as usize;
    let limbs = r.u64()? as usize;
    let mut digits = Vec::with_capacity(dnum);
    for _ in 0..dnum {
        let ksk0 = (0..limbs)
            .map(|id| Ok(Poly { coeffs: r.residues(n)?, modulus_id: id, domain: Domain::Ntt }))
            .collect::<Result<Vec<_>, CodecError>>()?;
        let seeds = r.residues(limbs)?;
        digits.push(KskDigit { ksk0: RnsPoly { limbs: ksk0, level: limbs - k - 1 }, ksk1: Ksk1::Seeded(seeds) });
    }
    r.done()?;
    Ok(KeySwitchKey { dnum, k, digits })
}
