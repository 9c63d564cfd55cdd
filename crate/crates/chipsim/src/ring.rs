//! KeySwitch with one limb per digit on a unidirectional ring.
//!
//! Every chiplet INTTs the limbs it owns, forwards each result around the
//! ring, and NTTs every limb it sees into the target limbs it owns. A hop
//! overlaps with the `(l+2)/r` NTTs each received limb costs, so links slower
//! than one transform per hop still never block.

use crate::build::{Builder, Simulation};
use crate::config::ChipletConfig;
use crate::engine::{MicroKind, Phase, SimError};

/// Which chiplet owns each q-limb `0..=l`, and who takes the special limb.
#[derive(Debug, Clone)]
pub(crate) struct Layout {
    pub l: usize,
    pub own: Vec<Vec<usize>>,
    pub owner: Vec<usize>,
    pub p_owner: usize,
}

impl Layout {
    pub fn new(owner: &[usize], r: usize) -> Self {
        let mut own = vec![Vec::new(); r];
        for (i, &c) in owner.iter().enumerate() {
            own[c].push(i);
        }
        let p_owner = (0..r).min_by_key(|&c| (own[c].len(), c)).expect("at least one chiplet");
        Self { l: owner.len() - 1, own, owner: owner.to_vec(), p_owner }
    }

    pub fn interleaved(l: usize, r: usize) -> Self {
        Self::new(&(0..=l).map(|i| i % r).collect::<Vec<_>>(), r)
    }

    fn p(&self) -> usize {
        self.l + 1
    }

    fn targets(&self, c: usize) -> Vec<usize> {
        let mut t = self.own[c].clone();
        if c == self.p_owner {
            t.push(self.p());
        }
        t
    }
}

#[derive(Debug, Clone, Copy)]
enum Task {
    Intt(usize),
    Ntt { src: usize, tgt: usize },
}

/// Per-chiplet ModUp programs. Each chiplet INTTs all of its limbs up front
/// so every limb enters the ring as early as possible, then NTTs limbs round
/// by round in the order they arrive.
fn modup_tasks(b: &Builder, lay: &Layout) -> Vec<Vec<Task>> {
    let r = b.r();
    let rounds = lay.own.iter().map(Vec::len).max().unwrap_or(0);
    (0..r)
        .map(|c| {
            let targets = lay.targets(c);
            let mut prog: Vec<Task> = lay.own[c].iter().map(|&x| Task::Intt(x)).collect();
            for j in 0..rounds {
                for m in 0..r {
                    if let Some(&x) = lay.own[(c + r - m) % r].get(j) {
                        prog.extend(targets.iter().map(|&tgt| Task::Ntt { src: x, tgt }));
                    }
                }
            }
            prog
        })
        .collect()
}

/// Emits ModUp and key multiplication. `prior[i]` is the last writer of input
/// limb `i`. Returns, per chiplet, the last op touching the special limb
/// accumulator (only meaningful on the owner).
pub(crate) fn emit_modup(b: &mut Builder, lay: &Layout, prior: &[Option<usize>]) -> Option<usize> {
    let r = b.r();
    let tasks = modup_tasks(b, lay);
    let mut intt = vec![None; lay.l + 1];
    let mut arrival: Vec<Vec<Option<usize>>> = vec![vec![None; r]; lay.l + 1];
    let mut pending: Vec<(usize, usize, usize)> = Vec::new();
    let mut p_last = None;
    for (c, rounds) in tasks.iter().enumerate() {
        for task in rounds {
            match *task {
                Task::Intt(x) => {
                    let id = b.transform(c, MicroKind::Intt, Phase::ModUp, x, 0, &prior[x].into_iter().collect::<Vec<_>>());
                    intt[x] = Some(id);
                    arrival[x] = b.broadcast(c, id, Phase::ModUp, x, 0);
                }
                Task::Ntt { src, tgt } => {
                    let dep = if lay.owner[src] == c { intt[src] } else { arrival[src][c] };
                    let deps: Vec<usize> = dep.into_iter().collect();
                    let (ntt, last) = b.keyed_ntt(c, Phase::ModUp, tgt, 0, &deps, 0);
                    if dep.is_none() {
                        pending.push((ntt, src, c));
                    }
                    if tgt == lay.p() {
                        p_last = Some(last);
                    }
                }
            }
        }
    }
    for (op, src, c) in pending {
        let d = if lay.owner[src] == c { intt[src] } else { arrival[src][c] };
        b.dag.add_dep(op, d.expect("every limb reaches every chiplet"));
    }
    p_last
}

/// Emits ModDown of both components after ModUp, optionally fused with a
/// rescale that drops limb `l`. `prior[i]` orders limb `i` behind earlier
/// work. Returns the last writer of each surviving limb.
pub(crate) fn emit_moddown(b: &mut Builder, lay: &Layout, p_ready: Option<usize>, prior: &[Option<usize>], rescale: bool) -> Vec<Option<usize>> {
    let r = b.r();
    let po = lay.p_owner;
    let mut src = [vec![None; r], vec![None; r]];
    for (comp, s) in src.iter_mut().enumerate() {
        let id = b.transform(po, MicroKind::Intt, Phase::ModDown, lay.p(), comp, &p_ready.into_iter().collect::<Vec<_>>());
        *s = b.broadcast(po, id, Phase::ModDown, lay.p(), comp);
        s[po] = Some(id);
    }
    let mut writer = vec![None; lay.l + 1];
    let top = lay.l;
    let top_owner = lay.owner[top];
    // The chiplet holding the dropped limb goes first so its rescale INTTs exist
    // before anyone depends on them.
    let order: Vec<usize> = if rescale { std::iter::once(top_owner).chain((0..r).filter(|&c| c != top_owner)).collect() } else { (0..r).collect() };
    let mut rs_src = [vec![None; r], vec![None; r]];
    for &c in &order {
        for comp in 0..2 {
            let mut limbs = lay.own[c].clone();
            if rescale && c == top_owner {
                limbs.retain(|&i| i != top);
                let deps: Vec<usize> = src[comp][c].into_iter().chain(prior[top]).collect();
                let id = b.transform(c, MicroKind::Ntt, Phase::ModDown, top, comp, &deps);
                b.dag.ops[id].bconv_mas = 1;
                let rs = b.transform(c, MicroKind::Intt, Phase::Rescale, top, comp, &[id]);
                rs_src[comp] = b.broadcast(c, rs, Phase::Rescale, top, comp);
                rs_src[comp][c] = Some(rs);
            }
            for i in limbs {
                let deps: Vec<usize> = src[comp][c].into_iter().chain(prior[i]).collect();
                let id = b.transform(c, MicroKind::Ntt, Phase::ModDown, i, comp, &deps);
                b.dag.ops[id].bconv_mas = 1;
                writer[i] = Some(id);
            }
        }
        if rescale {
            for comp in 0..2 {
                for &i in lay.own[c].iter().filter(|&&i| i != top) {
                    let id = b.transform(c, MicroKind::Ntt, Phase::Rescale, i, comp, &[rs_src[comp][c].unwrap()]);
                    writer[i] = Some(id);
                }
            }
        }
    }
    if rescale {
        writer.truncate(top);
    }
    writer
}

/// Standalone rescale of a two-component ciphertext at level `l`.
pub(crate) fn emit_rescale(b: &mut Builder, lay: &Layout, prior: &[Option<usize>]) -> Vec<Option<usize>> {
    let r = b.r();
    let top = lay.l;
    let o = lay.owner[top];
    let mut src = [vec![None; r], vec![None; r]];
    for (comp, s) in src.iter_mut().enumerate() {
        let id = b.transform(o, MicroKind::Intt, Phase::Rescale, top, comp, &prior[top].into_iter().collect::<Vec<_>>());
        *s = b.broadcast(o, id, Phase::Rescale, top, comp);
        s[o] = Some(id);
    }
    let mut writer = prior[..top].to_vec();
    for c in 0..r {
        for s in &src {
            for &i in lay.own[c].iter().filter(|&&i| i != top) {
                let deps: Vec<usize> = s[c].into_iter().chain(prior[i]).collect();
                writer[i] = Some(b.transform(c, MicroKind::Ntt, Phase::Rescale, i, 0, &deps));
            }
        }
    }
    writer
}

fn check_level(cfg: &ChipletConfig, l: usize) -> Vec<String> {
    cfg.bound_warning(l).into_iter().collect()
}

/// ModUp, key multiplication and ModDown for `dnum = l+1` with interleaved
/// limbs.
pub fn schedule_keyswitch_ring(cfg: &ChipletConfig, l: usize) -> Result<Simulation, SimError> {
    keyswitch_ring_with(cfg, l, false)
}

/// As [`schedule_keyswitch_ring`], with ModDown fused into a rescale.
pub fn schedule_keyswitch_rescale_ring(cfg: &ChipletConfig, l: usize) -> Result<Simulation, SimError> {
    keyswitch_ring_with(cfg, l, true)
}

fn keyswitch_ring_with(cfg: &ChipletConfig, l: usize, rescale: bool) -> Result<Simulation, SimError> {
    let mut b = Builder::new(cfg, cfg.r);
    let lay = Layout::interleaved(l, cfg.r);
    let p_last = emit_modup(&mut b, &lay, &vec![None; l + 1]);
    emit_moddown(&mut b, &lay, p_last, &vec![None; l + 1], rescale && l > 0);
    let mut sim = b.finish()?;
    sim.report.warnings = check_level(cfg, l);
    Ok(sim)
}

/// ModDown of both components on its own, accumulators already in place.
pub fn schedule_moddown_ring(cfg: &ChipletConfig, l: usize) -> Result<Simulation, SimError> {
    let mut b = Builder::new(cfg, cfg.r);
    let lay = Layout::interleaved(l, cfg.r);
    emit_moddown(&mut b, &lay, None, &vec![None; l + 1], false);
    b.finish()
}

/// Rescale of a ciphertext at level `l >= 1` on its own.
pub fn schedule_rescale_ring(cfg: &ChipletConfig, l: usize) -> Result<Simulation, SimError> {
    let mut b = Builder::new(cfg, cfg.r);
    let lay = Layout::interleaved(l, cfg.r);
    emit_rescale(&mut b, &lay, &vec![None; l + 1]);
    b.finish()
}
