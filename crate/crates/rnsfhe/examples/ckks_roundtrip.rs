//! Encrypt two vectors, multiply, relinearize, rescale and rotate.

use rnsfhe::ckks::{self, CkksContext, CkksParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ctx = CkksContext::new(CkksParams::toy())?;
    let (sk, keys) = ckks::keygen(&ctx, 7, &[1]);
    let l = ctx.basis.l_max;

    let a: Vec<(f64, f64)> = (0..8).map(|i| (0.1 * i as f64, 0.0)).collect();
    let b: Vec<(f64, f64)> = (0..8).map(|i| (1.0 - 0.05 * i as f64, 0.0)).collect();
    let ca = ctx.encrypt(&ctx.encode(&a, l, ctx.delta)?, &sk, ctx.delta, 1);
    let cb = ctx.encrypt(&ctx.encode(&b, l, ctx.delta)?, &sk, ctx.delta, 2);

    let prod = ctx.rescale(&ckks::relinearize(&ctx, &ctx.mult(&ca, &cb)?, &keys)?)?;
    let got = ctx.decode(&ctx.decrypt(&prod, &sk), prod.scale);
    println!("level {} -> {}", l, prod.level);
    for i in 0..8 {
        println!("{:.3} * {:.3} = {:+.6}", a[i].0, b[i].0, got[i].0);
    }

    let rot = ckks::rotate(&ctx, &ca, 1, &keys)?;
    let got = ctx.decode(&ctx.decrypt(&rot, &sk), rot.scale);
    let shown: Vec<String> = got[..8].iter().map(|v| format!("{:.3}", v.0)).collect();
    println!("rotated by one: [{}]", shown.join(", "));
    Ok(())
}
