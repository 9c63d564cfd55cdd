//! Trivium keystream with a 64-bit seed, producing 64 bits per step.
//!
//! The 64-bit seed fills both the 80-bit key and the 80-bit IV slots: bits
//! 0..64 hold the seed and bits 64..80 repeat its low 16 bits. Initialization
//! runs 18 rounds of 64 clocks (1152 clocks total).

use crate::modarith::PrimeModulus;

const MASK_A: u128 = (1u128 << 93) - 1;
const MASK_B: u128 = (1u128 << 84) - 1;
const MASK_C: u128 = (1u128 << 111) - 1;

/// Number of 64-step rounds run before output starts.
pub const INIT_ROUNDS: usize = 18;

fn seed_bit(seed: u64, i: usize) -> bool {
    (seed >> (i % 64)) & 1 == 1
}

/// Register bank split into its three shift registers. Bit `k` of each word is
/// register position `k`, with position 0 receiving the feedback.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriviumState {
    a: u128,
    b: u128,
    c: u128,
}

impl TriviumState {
    pub fn new(seed: u64) -> Self {
        let mut st = Self::loaded(seed);
        for _ in 0..INIT_ROUNDS {
            st.step64();
        }
        st
    }

    fn loaded(seed: u64) -> Self {
        let mut a = 0u128;
        let mut b = 0u128;
        for i in 0..80 {
            if seed_bit(seed, i) {
                a |= 1 << i;
                b |= 1 << i;
            }
        }
        let c = 0b111u128 << 108;
        Self { a, b, c }
    }

    #[inline]
    fn taps(reg: u128, k: u32) -> u64 {
        // word bit m = register bit (k - m): the value seen at tap k on clock m
        ((reg >> (k - 63)) as u64).reverse_bits()
    }

    /// Advances 64 clocks and returns the 64 output bits, clock `m` in bit `m`.
    pub fn step64(&mut self) -> u64 {
        let (a, b, c) = (self.a, self.b, self.c);
        let t1 = Self::taps(a, 65) ^ Self::taps(a, 92);
        let t2 = Self::taps(b, 68) ^ Self::taps(b, 83);
        let t3 = Self::taps(c, 65) ^ Self::taps(c, 110);
        let z = t1 ^ t2 ^ t3;
        let na = t3 ^ (Self::taps(c, 108) & Self::taps(c, 109)) ^ Self::taps(a, 68);
        let nb = t1 ^ (Self::taps(a, 90) & Self::taps(a, 91)) ^ Self::taps(b, 77);
        let nc = t2 ^ (Self::taps(b, 81) & Self::taps(b, 82)) ^ Self::taps(c, 86);
        self.a = ((a << 64) | na.reverse_bits() as u128) & MASK_A;
        self.b = ((b << 64) | nb.reverse_bits() as u128) & MASK_B;
        self.c = ((c << 64) | nc.reverse_bits() as u128) & MASK_C;
        z
    }
}

/// Deterministic keystream of `count` 64-bit words.
pub fn trivium_stream(seed: u64, count: usize) -> Vec<u64> {
    let mut st = TriviumState::new(seed);
    (0..count).map(|_| st.step64()).collect()
}

/// One-bit-per-clock Trivium over a 288-entry state, used as the ground truth
/// for the word-parallel version.
#[derive(Debug, Clone)]
pub struct BitSerialTrivium {
    s: [bool; 288],
}

impl BitSerialTrivium {
    pub fn new(seed: u64) -> Self {
        let mut s = [false; 288];
        for i in 0..80 {
            s[i] = seed_bit(seed, i);
            s[93 + i] = seed_bit(seed, i);
        }
        s[285] = true;
        s[286] = true;
        s[287] = true;
        let mut t = Self { s };
        for _ in 0..INIT_ROUNDS * 64 {
            t.clock();
        }
        t
    }

    pub fn clock(&mut self) -> bool {
        let s = &mut self.s;
        let t1 = s[65] ^ s[92];
        let t2 = s[161] ^ s[176];
        let t3 = s[242] ^ s[287];
        let z = t1 ^ t2 ^ t3;
        let n1 = t1 ^ (s[90] & s[91]) ^ s[170];
        let n2 = t2 ^ (s[174] & s[175]) ^ s[263];
        let n3 = t3 ^ (s[285] & s[286]) ^ s[68];
        s.copy_within(0..287, 1);
        s[0] = n3;
        s[93] = n1;
        s[177] = n2;
        z
    }

    pub fn next_word(&mut self) -> u64 {
        (0..64).fold(0u64, |w, m| w | (self.clock() as u64) << m)
    }
}

/// Uniform residues mod `q` drawn from the keystream by rejection sampling on
/// the low `bits(q)` bits of each word.
#[derive(Debug, Clone)]
pub struct ResidueSampler {
    state: TriviumState,
}

impl ResidueSampler {
    pub fn new(seed: u64) -> Self {
        Self { state: TriviumState::new(seed) }
    }

    pub fn next(&mut self, m: &PrimeModulus) -> u64 {
        let mask = if m.bits() >= 64 { u64::MAX } else { (1u64 << m.bits()) - 1 };
        loop {
            let v = self.state.step64() & mask;
            if v < m.q {
                return v;
            }
        }
    }

    pub fn fill(&mut self, m: &PrimeModulus, n: usize) -> Vec<u64> {
        (0..n).map(|_| self.next(m)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_matches_bit_serial() {
        for seed in [0u64, 1, 0xdead_beef_0123_4567, u64::MAX] {
            let mut serial = BitSerialTrivium::new(seed);
            for (i, w) in trivium_stream(seed, 64).into_iter().enumerate() {
                assert_eq!(w, serial.next_word(), "seed {seed:#x} word {i}");
            }
        }
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        assert_eq!(trivium_stream(42, 8), trivium_stream(42, 8));
        assert_ne!(trivium_stream(42, 1), trivium_stream(43, 1));
        assert!(trivium_stream(7, 0).is_empty());
    }
}
