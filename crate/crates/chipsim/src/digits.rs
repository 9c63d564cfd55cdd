//! KeySwitch with `dnum` digits of `K` limbs each.

use serde::{Deserialize, Serialize};

use crate::analytic::Q;
use crate::build::{Builder, Simulation};
use crate::config::ChipletConfig;
use crate::engine::{MicroKind, Phase, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DigitStrategy {
    /// Limbs interleaved across chiplets; every INTT result circles the ring.
    Alternate,
    /// One digit per chiplet; partial products are reduce-scattered.
    Digitwise,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DigitError {
    #[error("dnum·K = {have} does not cover {need} limbs")]
    Coverage { have: usize, need: usize },
    #[error("digit-wise placement needs dnum <= r (dnum = {dnum}, r = {r})")]
    TooFewChiplets { dnum: usize, r: usize },
    #[error(transparent)]
    Sim(#[from] SimError),
}

fn digit_of(i: usize, k: usize) -> usize {
    i / k
}

fn digit_range(d: usize, k: usize, l: usize) -> std::ops::Range<usize> {
    d * k..((d + 1) * k).min(l + 1)
}

/// Simulates one KeySwitch at level `l` with `dnum` digits of `k` limbs.
pub fn schedule_keyswitch_digits(
    cfg: &ChipletConfig,
    l: usize,
    dnum: usize,
    k: usize,
    strategy: DigitStrategy,
) -> Result<Simulation, DigitError> {
    if dnum * k < l + 1 {
        return Err(DigitError::Coverage { have: dnum * k, need: l + 1 });
    }
    // digits past the top limb are empty at this level
    let dnum = (l + 1).div_ceil(k);
    match strategy {
        DigitStrategy::Alternate => Ok(alternate(cfg, l, dnum, k)?),
        DigitStrategy::Digitwise => {
            if dnum > cfg.r {
                return Err(DigitError::TooFewChiplets { dnum, r: cfg.r });
            }
            Ok(digitwise(cfg, l, dnum, k)?)
        }
    }
}

fn alternate(cfg: &ChipletConfig, l: usize, dnum: usize, k: usize) -> Result<Simulation, SimError> {
    let r = cfg.r;
    let mut b = Builder::new(cfg, r);
    let n_ext = l + 1 + k;
    let owner = |i: usize| i % r;
    let own: Vec<Vec<usize>> = (0..r).map(|c| (0..n_ext).filter(|&i| owner(i) == c).collect()).collect();
    let is_q = |i: usize| i <= l;

    // all own INTTs up front, each forwarded around the ring
    let mut src = vec![vec![None; r]; l + 1];
    for c in 0..r {
        for &i in own[c].iter().filter(|&&i| is_q(i)) {
            let id = b.transform(c, MicroKind::Intt, Phase::ModUp, i, digit_of(i, k), &[]);
            src[i] = b.broadcast_open(c, id, Phase::ModUp, i, digit_of(i, k));
            src[i][c] = Some(id);
        }
    }
    let mut acc = vec![None; n_ext];
    let mut md = [vec![vec![None; r]; k], vec![vec![None; r]; k]];
    for c in 0..r {
        // key products of a digit's own limbs need no conversion; the MAS unit
        // works through them while the INTTs run
        for &t in own[c].iter().filter(|&&t| is_q(t)) {
            acc[t] = Some(b.keyed_mas(c, Phase::ModUp, t, digit_of(t, k), &[]));
        }
        for d in 0..dnum {
            let range = digit_range(d, k, l);
            let s = range.len() as u32;
            let deps: Vec<usize> = range.clone().map(|i| src[i][c].expect("digit limb reaches every chiplet")).collect();
            let mut targets: Vec<usize> = own[c].iter().copied().filter(|t| !range.contains(t)).collect();
            let last = d + 1 == dnum;
            if last {
                // special limbs first, so their ModDown INTTs and transfers
                // overlap the remaining NTTs of the last digit
                targets.sort_by_key(|&t| is_q(t));
            }
            let n_special = targets.iter().filter(|&&t| !is_q(t)).count();
            for (n, t) in targets.into_iter().enumerate() {
                if last && n == n_special {
                    moddown_intts(&mut b, c, &own[c], l, &acc, &mut md);
                }
                let mut dd = deps.clone();
                dd.extend(acc[t]);
                acc[t] = Some(b.keyed_ntt(c, Phase::ModUp, t, d, &dd, s).1);
            }
            if last && n_special == own[c].iter().filter(|t| !range.contains(t)).count() {
                moddown_intts(&mut b, c, &own[c], l, &acc, &mut md);
            }
        }
    }

    let mut foreign_first = 0u64;
    for c in 0..r {
        foreign_first += (l + 1..n_ext).filter(|&p| owner(p) != c).count() as u64;
        for m in &md {
            let deps: Vec<usize> = m.iter().map(|a| a[c].expect("special limb reaches every chiplet")).collect();
            for &i in own[c].iter().filter(|&&i| is_q(i)) {
                let mut dd = deps.clone();
                dd.extend(acc[i]);
                let id = b.transform(c, MicroKind::Ntt, Phase::ModDown, i, 0, &dd);
                b.dag.ops[id].bconv_mas = k as u32;
            }
        }
    }
    let mut sim = b.finish()?;
    sim.census_ntt_equiv = Some(ntt_equivalents(&sim, foreign_first));
    sim.report.warnings = cfg.bound_warning(l).into_iter().collect();
    Ok(sim)
}

/// INTTs of both components of the special limbs chiplet `c` owns, each broadcast.
fn moddown_intts(b: &mut Builder, c: usize, own: &[usize], l: usize, acc: &[Option<usize>], md: &mut [Vec<Vec<Option<usize>>>; 2]) {
    for (comp, m) in md.iter_mut().enumerate() {
        for &p in own.iter().filter(|&&i| i > l) {
            let j = p - (l + 1);
            let id = b.transform(c, MicroKind::Intt, Phase::ModDown, p, comp, &acc[p].into_iter().collect::<Vec<_>>());
            m[j] = b.broadcast_open(c, id, Phase::ModDown, p, comp);
            m[j][c] = Some(id);
        }
    }
}

/// Transforms per chiplet, counting every first-component special limb a
/// chiplet receives as one transform slot and its own ModDown INTTs as none.
fn ntt_equivalents(sim: &Simulation, foreign_first: u64) -> Q {
    let c = &sim.report.census;
    let md_intt = sim.dag.ops.iter().filter(|o| o.kind == MicroKind::Intt && o.phase == Phase::ModDown).count() as u64;
    Q::new(c.intt + c.ntt + foreign_first - md_intt, sim.dag.r as u64)
}

fn digitwise(cfg: &ChipletConfig, l: usize, dnum: usize, k: usize) -> Result<Simulation, SimError> {
    let r = cfg.r;
    let mut b = Builder::new(cfg, r);
    let n_ext = l + 1 + k;
    let is_q = |i: usize| i <= l;
    let owner = |i: usize| if is_q(i) { digit_of(i, k) } else { (i - l - 1) % dnum };
    let active: Vec<usize> = (0..dnum).collect();

    // local ModUp: each chiplet extends its own digit to every other limb
    let mut acc = vec![vec![None; n_ext]; dnum];
    for d in 0..dnum {
        let range = digit_range(d, k, l);
        let intts: Vec<usize> =
            range.clone().map(|i| b.transform(d, MicroKind::Intt, Phase::ModUp, i, d, &[])).collect();
        for t in range.clone() {
            acc[d][t] = Some(b.keyed_mas(d, Phase::ModUp, t, d, &[]));
        }
        for t in (0..n_ext).filter(|t| !range.contains(t)) {
            acc[d][t] = Some(b.keyed_ntt(d, Phase::ModUp, t, d, &intts, range.len() as u32).1);
        }
    }

    // reduce-scatter: limb t's partials travel o+1 -> ... -> o, summed on the way
    for t in 0..n_ext {
        let o = owner(t);
        for comp in 0..2 {
            let chain: Vec<usize> = (1..=dnum).map(|m| active[(o + m) % dnum]).collect();
            let mut carry = acc[chain[0]][t].expect("partial exists");
            for w in chain.windows(2) {
                let hop = b.forward(w[0], w[1], Phase::ModUp, t, comp, carry);
                carry = b.mas(w[1], Phase::ModUp, t, comp, 1, [hop].into_iter().chain(acc[w[1]][t]));
            }
            if comp == 1 {
                acc[o][t] = Some(carry);
            }
        }
    }

    let mut md = [vec![vec![None; r]; k], vec![vec![None; r]; k]];
    for d in 0..dnum {
        for (comp, m) in md.iter_mut().enumerate() {
            for p in (l + 1..n_ext).filter(|&p| owner(p) == d) {
                let j = p - (l + 1);
                let id = b.transform(d, MicroKind::Intt, Phase::ModDown, p, comp, &acc[d][p].into_iter().collect::<Vec<_>>());
                m[j][d] = Some(id);
                let mut prev = id;
                let mut at = d;
                for step in 1..dnum {
                    let to = active[(d + step) % dnum];
                    prev = b.forward(at, to, Phase::ModDown, p, comp, prev);
                    m[j][to] = Some(prev);
                    at = to;
                }
            }
        }
    }
    for d in 0..dnum {
        for m in &md {
            let deps: Vec<usize> = m.iter().map(|a| a[d].expect("special limb reaches every digit")).collect();
            for i in digit_range(d, k, l) {
                let mut dd = deps.clone();
                dd.extend(acc[d][i]);
                let id = b.transform(d, MicroKind::Ntt, Phase::ModDown, i, 0, &dd);
                b.dag.ops[id].bconv_mas = k as u32;
            }
        }
    }
    b.finish()
}
