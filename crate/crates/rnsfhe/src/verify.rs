//! Oracle-differential suites: each fast path is compared against a slow,
//! obviously-correct reference on seeded random inputs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::ckks::{self, CkksContext, CkksParams, ExtCiphertext, OpCensus};
use crate::modarith::{find_ntt_prime, TwiddleMode};
use crate::poly::{
    automorphism_oracle, automorphism_shuffle_faulty, galois_element, intt_reference, ntt_hybrid, ntt_reference,
    NttContext, NttPlan, Poly, ShuffleFault,
};
use crate::trivium::{trivium_stream, BitSerialTrivium};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    Kernels,
    Ckks,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Size {
    Toy,
    Small,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fault {
    #[default]
    None,
    ShuffleOffByOne,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub comparisons: u64,
    pub passed: bool,
    pub first_failure: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifySummary {
    pub schema: u32,
    pub scope: Scope,
    pub size: Size,
    pub seed: u64,
    pub suites: Vec<SuiteResult>,
    pub total_comparisons: u64,
    pub passed: bool,
}

struct Suite {
    name: &'static str,
    comparisons: u64,
    failure: Option<String>,
}

impl Suite {
    fn new(name: &'static str) -> Self {
        Self { name, comparisons: 0, failure: None }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.comparisons += 1;
        if !ok && self.failure.is_none() {
            self.failure = Some(what());
        }
    }

    fn finish(self) -> SuiteResult {
        SuiteResult {
            name: self.name.to_string(),
            comparisons: self.comparisons,
            passed: self.failure.is_none(),
            first_failure: self.failure,
        }
    }
}

fn random_poly(rng: &mut ChaCha20Rng, ctx: &NttContext) -> Poly {
    Poly::from_coeffs((0..ctx.n()).map(|_| rng.random_range(0..ctx.m.q)).collect(), 0)
}

/// O(N^2) product modulo `x^N + 1`.
pub fn schoolbook_negacyclic(a: &[u64], b: &[u64], q: u64) -> Vec<u64> {
    let n = a.len();
    let mut out = vec![0u128; n];
    let qq = q as u128;
    for i in 0..n {
        for j in 0..n {
            let p = a[i] as u128 * b[j] as u128 % qq;
            let k = i + j;
            if k < n {
                out[k] = (out[k] + p) % qq;
            } else {
                out[k - n] = (out[k - n] + qq - p) % qq;
            }
        }
    }
    out.into_iter().map(|v| v as u64).collect()
}

fn ntt_suite(rng: &mut ChaCha20Rng, sizes: &[usize], inputs: usize) -> SuiteResult {
    let mut s = Suite::new("ntt_hybrid_vs_reference");
    for &n in sizes {
        let ctx = NttContext::new(find_ntt_prime(54, 2 * n as u64, 0).expect("prime"));
        for plan in NttPlan::all_splits(n, TwiddleMode::Stored).into_iter().filter(|p| p.n2 <= 64) {
            for mode in [TwiddleMode::Stored, TwiddleMode::OnTheFly] {
                let plan = NttPlan { twiddle_mode: mode, ..plan };
                for _ in 0..inputs {
                    let p = random_poly(rng, &ctx);
                    let want = ntt_reference(&ctx, &p).expect("coeff input");
                    let got = ntt_hybrid(&ctx, &p, &plan).expect("valid plan");
                    s.check(got == want, || format!("N={n} plan {}x{} {:?}", plan.n1, plan.n2, mode));
                    let back = intt_reference(&ctx, &want).expect("ntt input");
                    s.check(back == p, || format!("N={n} inverse"));
                }
            }
        }
    }
    s.finish()
}

fn product_suite(rng: &mut ChaCha20Rng, sizes: &[usize], inputs: usize) -> SuiteResult {
    let mut s = Suite::new("ntt_product_vs_schoolbook");
    for &n in sizes {
        let ctx = NttContext::new(find_ntt_prime(30, 2 * n as u64, 0).expect("prime"));
        for _ in 0..inputs {
            let a = random_poly(rng, &ctx);
            let b = random_poly(rng, &ctx);
            let fa = ntt_reference(&ctx, &a).expect("coeff");
            let fb = ntt_reference(&ctx, &b).expect("coeff");
            let prod = crate::poly::mas(&ctx.m, crate::poly::MasOp::Mul, &fa, &fb, None).expect("same modulus");
            let got = intt_reference(&ctx, &prod).expect("ntt");
            let want = schoolbook_negacyclic(&a.coeffs, &b.coeffs, ctx.m.q);
            s.check(got.coeffs == want, || format!("N={n} product"));
        }
    }
    s.finish()
}

fn automorphism_suite(rng: &mut ChaCha20Rng, exhaustive_n: usize, random_n: usize, fault: Fault) -> SuiteResult {
    let mut s = Suite::new("automorphism_shuffle_vs_oracle");
    let f = match fault {
        Fault::None => ShuffleFault::None,
        Fault::ShuffleOffByOne => ShuffleFault::AddressOffByOne,
    };
    let mut run = |n: usize, gles: Vec<u64>, rng: &mut ChaCha20Rng| {
        let ctx = NttContext::new(find_ntt_prime(40, 2 * n as u64, 0).expect("prime"));
        let plans: Vec<NttPlan> = NttPlan::all_splits(n, TwiddleMode::Stored).into_iter().filter(|p| p.n2 <= 64).collect();
        for g in gles {
            let p = random_poly(rng, &ctx);
            let want = automorphism_oracle(&ctx, &p, g).expect("odd");
            for plan in &plans {
                let got = automorphism_shuffle_faulty(&ctx, &p, g, plan, f).expect("odd");
                s.check(got == want, || format!("N={n} gle={g} plan {}x{}", plan.n1, plan.n2));
            }
        }
    };
    let all_odd: Vec<u64> = (1..2 * exhaustive_n as u64).step_by(2).collect();
    run(exhaustive_n, all_odd, rng);
    let random: Vec<u64> = (0..50).map(|_| rng.random_range(0..random_n as u64) * 2 + 1).collect();
    run(random_n, random, rng);
    let _ = galois_element(1, random_n);
    s.finish()
}

fn trivium_suite(seeds: &[u64], words: usize) -> SuiteResult {
    let mut s = Suite::new("trivium_parallel_vs_bit_serial");
    for &seed in seeds {
        let mut serial = BitSerialTrivium::new(seed);
        for (i, w) in trivium_stream(seed, words).into_iter().enumerate() {
            let want = serial.next_word();
            s.check(w == want, || format!("seed {seed:#x} word {i}"));
        }
    }
    s.finish()
}

fn max_rel_err(got: &[(f64, f64)], want: &[(f64, f64)]) -> f64 {
    let norm = want.iter().map(|&(r, i)| r.hypot(i)).fold(0.0, f64::max).max(1e-300);
    got.iter().zip(want).map(|(&(a, b), &(c, d))| (a - c).hypot(b - d) / norm).fold(0.0, f64::max)
}

fn ckks_suite(rng: &mut ChaCha20Rng, seed: u64, params: CkksParams) -> SuiteResult {
    let mut s = Suite::new("ckks_end_to_end");
    let ctx = CkksContext::new(params).expect("parameters");
    let (sk, keys) = ckks::keygen(&ctx, seed, &[1]);
    let slots = ctx.encoder.slots();
    let a: Vec<(f64, f64)> = (0..slots).map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let b: Vec<(f64, f64)> = (0..slots).map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let l = ctx.basis.l_max;
    let ca = ctx.encrypt(&ctx.encode(&a, l, ctx.delta).expect("slots"), &sk, ctx.delta, rng.random());
    let cb = ctx.encrypt(&ctx.encode(&b, l, ctx.delta).expect("slots"), &sk, ctx.delta, rng.random());
    let prod = ctx.mult(&ca, &cb).expect("same level");
    let relin = ckks::relinearize(&ctx, &prod, &keys).expect("key");
    let res = ctx.rescale(&relin).expect("level");
    let got = ctx.decode(&ctx.decrypt(&res, &sk), res.scale);
    let want: Vec<(f64, f64)> = a.iter().zip(&b).map(|(&(x, y), &(u, v))| (x * u - y * v, x * v + y * u)).collect();
    let err = max_rel_err(&got, &want);
    s.check(err < 1e-4, || format!("mult relative error {err:e}"));
    let rot = ckks::rotate(&ctx, &ca, 1, &keys).expect("key");
    let got = ctx.decode(&ctx.decrypt(&rot, &sk), rot.scale);
    let want: Vec<(f64, f64)> = (0..slots).map(|k| a[(k + 1) % slots]).collect();
    let err = max_rel_err(&got, &want);
    s.check(err < 1e-4, || format!("rotation relative error {err:e}"));
    s.finish()
}

fn degeneration_suite(seed: u64) -> SuiteResult {
    let mut s = Suite::new("keyswitch_generic_vs_full_dnum");
    let params = CkksParams { n: 1 << 10, l_max: 3, dnum: 4, q_bits: 40, p_bits: 41, scale_bits: 39, sigma: 3.2, insecure: true };
    let ctx = CkksContext::new(params).expect("parameters");
    let (sk, keys) = ckks::keygen(&ctx, seed, &[]);
    let v: Vec<(f64, f64)> = (0..ctx.encoder.slots()).map(|k| ((k % 7) as f64 / 7.0, 0.0)).collect();
    for level in (0..=ctx.basis.l_max).rev() {
        let pt = ctx.encode(&v, level, ctx.delta).expect("slots");
        let c = ctx.encrypt(&pt, &sk, ctx.delta, seed ^ level as u64);
        let d: ExtCiphertext = ctx.mult(&c, &c).expect("level");
        let mut c1 = OpCensus::default();
        let mut c2 = OpCensus::default();
        let full = ckks::keyswitch_full_dnum(&ctx, &d, &keys.relin, &mut c1).expect("K=1");
        let gen = ckks::keyswitch_generic(&ctx, &d, &keys.relin, ctx.basis.dnum, &mut c2).expect("dnum");
        s.check(full == gen, || format!("level {level}"));
    }
    s.finish()
}

pub fn run(scope: Scope, size: Size, seed: u64, fault: Fault) -> VerifySummary {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut suites = Vec::new();
    if matches!(scope, Scope::Kernels | Scope::All) {
        let (sizes, inputs): (Vec<usize>, usize) = match size {
            Size::Toy => (vec![1 << 8, 1 << 10], 4),
            Size::Small => (vec![1 << 8, 1 << 10, 1 << 12], 8),
        };
        suites.push(ntt_suite(&mut rng, &sizes, inputs));
        suites.push(product_suite(&mut rng, &[16, 32, 64], 4));
        let random_n = if size == Size::Toy { 1 << 10 } else { 1 << 12 };
        suites.push(automorphism_suite(&mut rng, 1 << 8, random_n, fault));
        let seeds: Vec<u64> = (0..10).map(|_| rng.random()).collect();
        suites.push(trivium_suite(&seeds, 1000));
    }
    if matches!(scope, Scope::Ckks | Scope::All) {
        let params = match size {
            Size::Toy => CkksParams { n: 1 << 10, l_max: 3, dnum: 2, ..CkksParams::toy() },
            Size::Small => CkksParams::toy(),
        };
        suites.push(ckks_suite(&mut rng, seed, params));
        suites.push(degeneration_suite(seed));
    }
    let total_comparisons = suites.iter().map(|s| s.comparisons).sum();
    let passed = suites.iter().all(|s| s.passed);
    VerifySummary { schema: 1, scope, size, seed, suites, total_comparisons, passed }
}
