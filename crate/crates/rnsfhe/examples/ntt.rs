//! Forward transform through every four-step split, checked against the
//! reference transform, plus a negacyclic product.

use rnsfhe::modarith::{find_ntt_prime, TwiddleMode};
use rnsfhe::poly::{intt_reference, mas, ntt_hybrid, ntt_reference, MasOp, NttContext, NttPlan, Poly};
use rnsfhe::trivium::ResidueSampler;

fn main() {
    let n = 1 << 10;
    let ctx = NttContext::new(find_ntt_prime(54, 2 * n as u64, 0).unwrap());
    println!("q = {} (N = {n})", ctx.m.q);

    let mut rng = ResidueSampler::new(42);
    let a = Poly::from_coeffs(rng.fill(&ctx.m, n), 0);
    let want = ntt_reference(&ctx, &a).unwrap();
    for plan in NttPlan::all_splits(n, TwiddleMode::OnTheFly) {
        let ok = ntt_hybrid(&ctx, &a, &plan).unwrap() == want;
        println!("{:>5} x {:<5} {}", plan.n1, plan.n2, if ok { "match" } else { "MISMATCH" });
    }

    // x * x^(N-1) = x^N = -1
    let mut x = vec![0; n];
    x[1] = 1;
    let mut y = vec![0; n];
    y[n - 1] = 1;
    let fx = ntt_reference(&ctx, &Poly::from_coeffs(x, 0)).unwrap();
    let fy = ntt_reference(&ctx, &Poly::from_coeffs(y, 0)).unwrap();
    let prod = intt_reference(&ctx, &mas(&ctx.m, MasOp::Mul, &fx, &fy, None).unwrap()).unwrap();
    println!("x * x^(N-1) has constant term q-1: {}", prod.coeffs[0] == ctx.m.q - 1);
}
