//! Baseline KeySwitch distributions with point-to-point links.
//!
//! These exist to be compared against the ring schedule. Every chiplet pair
//! gets its own link, so only the volume of traffic and its dependency
//! structure limit them.

use serde::{Deserialize, Serialize};

use crate::build::{Builder, Simulation};
use crate::config::ChipletConfig;
use crate::engine::{MicroKind, Phase, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strawman {
    /// Four chiplets split by function: transforms, key MACs, and one
    /// ModDown chiplet per ciphertext component.
    A,
    /// One chiplet per limb; every INTT result goes to every chiplet.
    B,
    /// One chiplet per limb; input limbs are duplicated everywhere and each
    /// chiplet runs all INTTs itself.
    C,
}

impl Strawman {
    /// Chiplets the technique occupies at level `l`.
    pub fn chiplets(self, l: usize) -> usize {
        match self {
            Strawman::A => 4,
            Strawman::B | Strawman::C => l + 2,
        }
    }
}

/// Simulates one KeySwitch at level `l`. `cfg.r` is ignored; the chiplet
/// count follows from the technique.
pub fn schedule_strawman(cfg: &ChipletConfig, l: usize, tech: Strawman) -> Result<Simulation, SimError> {
    let mut b = Builder::new(cfg, tech.chiplets(l));
    match tech {
        Strawman::A => function_split(&mut b, l),
        Strawman::B => limb_split(&mut b, l, false),
        Strawman::C => limb_split(&mut b, l, true),
    }
    b.finish()
}

fn function_split(b: &mut Builder, l: usize) {
    let (xf, mac) = (0, 1);
    let p = l + 1;
    let mut acc = vec![None; l + 2];
    for i in 0..=l {
        let intt = b.transform(xf, MicroKind::Intt, Phase::ModUp, i, 0, &[]);
        for t in 0..=p {
            let ntt = b.transform(xf, MicroKind::Ntt, Phase::ModUp, t, 0, &[intt]);
            let hop = b.send(xf, mac, Phase::ModUp, t, 0, ntt);
            acc[t] = Some(b.keyed_mas(mac, Phase::ModUp, t, 0, &[Some(hop), acc[t]].into_iter().flatten().collect::<Vec<_>>()));
        }
    }
    // each component's accumulators move to its own ModDown chiplet
    for comp in 0..2 {
        let md = 2 + comp;
        let arrived: Vec<usize> = (0..=p).map(|t| b.send(mac, md, Phase::ModDown, t, comp, acc[t].expect("accumulated"))).collect();
        let intt = b.transform(md, MicroKind::Intt, Phase::ModDown, p, comp, &[arrived[p]]);
        for i in 0..=l {
            let id = b.transform(md, MicroKind::Ntt, Phase::ModDown, i, comp, &[intt, arrived[i]]);
            b.dag.ops[id].bconv_mas = 1;
        }
    }
}

fn limb_split(b: &mut Builder, l: usize, duplicate: bool) {
    let n = l + 2;
    let p = l + 1;
    // src[i][c]: the op after which chiplet c holds limb i in the coefficient domain
    let mut src = vec![vec![0usize; n]; l + 1];
    if duplicate {
        let copies: Vec<Vec<usize>> =
            (0..=l).map(|i| (0..n).map(|c| b.send_after(i, c, Phase::ModUp, i, 0, [])).collect()).collect();
        for c in 0..n {
            for i in 0..=l {
                src[i][c] = b.transform(c, MicroKind::Intt, Phase::ModUp, i, 0, &[copies[i][c]]);
            }
        }
    } else {
        for i in 0..=l {
            let intt = b.transform(i, MicroKind::Intt, Phase::ModUp, i, 0, &[]);
            for c in 0..n {
                src[i][c] = b.send(i, c, Phase::ModUp, i, 0, intt);
            }
        }
    }
    let mut acc = vec![0usize; n];
    for c in 0..n {
        let mut last = None;
        for row in &src {
            let deps: Vec<usize> = [Some(row[c]), last].into_iter().flatten().collect();
            last = Some(b.keyed_ntt(c, Phase::ModUp, c, 0, &deps, 0).1);
        }
        acc[c] = last.expect("at least one limb");
    }
    for comp in 0..2 {
        let intt = b.transform(p, MicroKind::Intt, Phase::ModDown, p, comp, &[acc[p]]);
        for c in 0..=l {
            let hop = b.send(p, c, Phase::ModDown, p, comp, intt);
            let id = b.transform(c, MicroKind::Ntt, Phase::ModDown, c, comp, &[hop, acc[c]]);
            b.dag.ops[id].bconv_mas = 1;
        }
    }
}
