//! Micro-operation DAG and the deterministic event loop that times it.
//!
//! Compute units (transform pipe, MAS, AUT, HBM port) issue strictly in
//! program order, i.e. the order ops were pushed for that chiplet. Links are
//! shared queues: whenever a link frees up it takes the ready transfer with the
//! lowest `(digit, limb, op_id)`.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    /// The transform pipeline; also issues unshadowed MAS work.
    Ntt,
    Mas,
    Aut,
    Hbm,
    Link,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MicroKind {
    Ntt,
    Intt,
    Mas,
    Aut,
    Send,
    HbmRd,
}

impl MicroKind {
    pub fn is_transform(self) -> bool {
        matches!(self, MicroKind::Ntt | MicroKind::Intt | MicroKind::Aut)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    ModUp,
    ModDown,
    Rescale,
    #[default]
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MicroOp {
    pub id: usize,
    pub chiplet: usize,
    pub unit: Unit,
    pub kind: MicroKind,
    pub phase: Phase,
    pub limb: u32,
    pub digit: u32,
    /// Destination chiplet of a transfer.
    pub dst: Option<usize>,
    pub duration: u64,
    pub deps: Vec<usize>,
    /// Upstream transfer this one relays; the relay may begin `fill` cycles
    /// after that transfer starts instead of waiting for it to finish.
    pub relay_of: Option<usize>,
    /// Key multiply-accumulates fused into this op.
    pub key_mas: u32,
    /// Base-conversion multiply-accumulates fused into this op.
    pub bconv_mas: u32,
    pub bytes: u64,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("deadlock: {done} of {total} micro-ops completed")]
    DeadlockDetected { done: usize, total: usize },
    #[error("op {op} depends on unknown op {dep}")]
    DanglingDependency { op: usize, dep: usize },
}

/// A program of micro-ops for `r` chiplets.
#[derive(Debug, Clone)]
pub struct Dag {
    pub r: usize,
    pub fill: u64,
    pub ops: Vec<MicroOp>,
}

/// Fields of a new op; `id` and defaults are filled in by [`Dag::push`].
#[derive(Debug, Clone)]
pub struct OpSpec {
    pub chiplet: usize,
    pub unit: Unit,
    pub kind: MicroKind,
    pub phase: Phase,
    pub limb: u32,
    pub digit: u32,
    pub duration: u64,
    pub deps: Vec<usize>,
}

impl OpSpec {
    pub fn new(chiplet: usize, unit: Unit, kind: MicroKind, duration: u64) -> Self {
        Self { chiplet, unit, kind, phase: Phase::Other, limb: 0, digit: 0, duration, deps: Vec::new() }
    }

    pub fn phase(mut self, p: Phase) -> Self {
        self.phase = p;
        self
    }

    pub fn limb(mut self, limb: usize, digit: usize) -> Self {
        self.limb = limb as u32;
        self.digit = digit as u32;
        self
    }

    pub fn deps(mut self, deps: impl IntoIterator<Item = usize>) -> Self {
        self.deps.extend(deps);
        self
    }
}

impl Dag {
    pub fn new(r: usize, fill: u64) -> Self {
        Self { r, fill, ops: Vec::new() }
    }

    pub fn push(&mut self, spec: OpSpec) -> usize {
        let id = self.ops.len();
        let mut deps = spec.deps;
        deps.sort_unstable();
        deps.dedup();
        self.ops.push(MicroOp {
            id,
            chiplet: spec.chiplet,
            unit: spec.unit,
            kind: spec.kind,
            phase: spec.phase,
            limb: spec.limb,
            digit: spec.digit,
            dst: None,
            duration: spec.duration,
            deps,
            relay_of: None,
            key_mas: 0,
            bconv_mas: 0,
            bytes: 0,
        });
        id
    }

    /// One link hop `from -> to` carrying `bytes`.
    pub fn send(&mut self, from: usize, to: usize, bytes: u64, cycles: u64, spec: OpSpec) -> usize {
        let id = self.push(OpSpec { chiplet: from, unit: Unit::Link, kind: MicroKind::Send, duration: cycles, ..spec });
        self.ops[id].dst = Some(to);
        self.ops[id].bytes = bytes;
        id
    }

    /// A transfer that forwards `upstream` cut-through.
    pub fn relay(&mut self, upstream: usize, to: usize, spec: OpSpec) -> usize {
        let (from, bytes, duration) = {
            let u = &self.ops[upstream];
            (u.dst.expect("relay of a transfer"), u.bytes, u.duration)
        };
        let id = self.push(OpSpec { chiplet: from, unit: Unit::Link, kind: MicroKind::Send, duration, ..spec });
        self.ops[id].dst = Some(to);
        self.ops[id].bytes = bytes;
        self.ops[id].relay_of = Some(upstream);
        id
    }

    pub fn add_dep(&mut self, op: usize, dep: usize) {
        let deps = &mut self.ops[op].deps;
        if let Err(pos) = deps.binary_search(&dep) {
            deps.insert(pos, dep);
        }
    }

    /// Extra latency on edges leaving `op`.
    fn latency(&self, op: usize) -> u64 {
        if self.ops[op].kind.is_transform() {
            self.fill
        } else {
            0
        }
    }

    /// Resource key of an op: ordered units per chiplet, links per directed pair.
    fn resource(op: &MicroOp) -> (usize, usize, Unit) {
        match op.unit {
            Unit::Link => (op.chiplet, op.dst.expect("transfer has a destination"), Unit::Link),
            u => (op.chiplet, usize::MAX, u),
        }
    }

    pub fn simulate(&self) -> Result<Trace, SimError> {
        let n = self.ops.len();
        let mut dependents = vec![Vec::new(); n];
        let mut relays = vec![Vec::new(); n];
        let mut waiting = vec![0usize; n];
        for op in &self.ops {
            for &d in op.deps.iter().chain(&op.relay_of) {
                if d >= n {
                    return Err(SimError::DanglingDependency { op: op.id, dep: d });
                }
            }
            for &d in &op.deps {
                dependents[d].push(op.id);
            }
            if let Some(u) = op.relay_of {
                relays[u].push(op.id);
            }
            waiting[op.id] = op.deps.len() + op.relay_of.is_some() as usize;
        }

        let mut res_index: BTreeMap<(usize, usize, Unit), usize> = BTreeMap::new();
        let mut res_of = vec![0usize; n];
        for op in &self.ops {
            let len = res_index.len();
            res_of[op.id] = *res_index.entry(Self::resource(op)).or_insert(len);
        }
        let nres = res_index.len();
        let mut is_link = vec![false; nres];
        for (&(_, _, u), &i) in &res_index {
            is_link[i] = u == Unit::Link;
        }
        let mut queue: Vec<Vec<usize>> = vec![Vec::new(); nres];
        for op in &self.ops {
            queue[res_of[op.id]].push(op.id);
        }
        let mut head = vec![0usize; nres];
        let mut free_at = vec![0u64; nres];
        let mut link_ready: Vec<Vec<usize>> = vec![Vec::new(); nres];

        let mut ready_at = vec![0u64; n];
        let mut start = vec![u64::MAX; n];
        let mut end = vec![u64::MAX; n];
        // (time, 0 = completion / 1 = wake / 2 = relay release, op)
        let mut events: BinaryHeap<Reverse<(u64, u8, usize)>> = BinaryHeap::new();
        for op in &self.ops {
            if waiting[op.id] == 0 {
                if is_link[res_of[op.id]] {
                    link_ready[res_of[op.id]].push(op.id);
                }
                events.push(Reverse((0, 1, op.id)));
            }
        }
        let mut done = 0usize;
        while let Some(Reverse((t, _, _))) = events.peek().copied() {
            while let Some(&Reverse((et, kind, id))) = events.peek() {
                if et != t {
                    break;
                }
                events.pop();
                let (avail, targets) = match kind {
                    0 => {
                        done += 1;
                        (end[id] + self.latency(id), &dependents[id])
                    }
                    2 => (t, &relays[id]),
                    _ => continue,
                };
                for &s in targets {
                    ready_at[s] = ready_at[s].max(avail);
                    waiting[s] -= 1;
                    if waiting[s] == 0 {
                        if is_link[res_of[s]] {
                            link_ready[res_of[s]].push(s);
                        }
                        events.push(Reverse((ready_at[s].max(t), 1, s)));
                    }
                }
            }
            for r in 0..nres {
                if free_at[r] > t {
                    continue;
                }
                let pick = if is_link[r] {
                    let best = link_ready[r]
                        .iter()
                        .enumerate()
                        .filter(|&(_, &o)| ready_at[o] <= t)
                        .min_by_key(|&(_, &o)| (self.ops[o].digit, self.ops[o].limb, o))
                        .map(|(i, _)| i);
                    best.map(|i| link_ready[r].swap_remove(i))
                } else {
                    queue[r].get(head[r]).copied().filter(|&o| waiting[o] == 0 && ready_at[o] <= t).inspect(|_| head[r] += 1)
                };
                if let Some(o) = pick {
                    start[o] = t;
                    end[o] = t + self.ops[o].duration;
                    free_at[r] = end[o];
                    events.push(Reverse((end[o], 0, o)));
                    if !relays[o].is_empty() {
                        events.push(Reverse((t + self.fill, 2, o)));
                    }
                }
            }
        }
        if done < n {
            return Err(SimError::DeadlockDetected { done, total: n });
        }
        Ok(Trace { start, end })
    }

    /// The dependency of `op` that became available last, if any.
    pub fn critical_dep(&self, trace: &Trace, op: usize) -> Option<usize> {
        let o = &self.ops[op];
        let full = o.deps.iter().map(|&d| (trace.end[d] + self.latency(d), d));
        let relay = o.relay_of.map(|u| (trace.start[u] + self.fill, u));
        full.chain(relay).max().map(|(_, d)| d)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub start: Vec<u64>,
    pub end: Vec<u64>,
}

impl Trace {
    pub fn makespan(&self) -> u64 {
        self.end.iter().copied().max().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn in_order_unit_serializes() {
        let mut d = Dag::new(1, 0);
        let a = d.push(OpSpec::new(0, Unit::Ntt, MicroKind::Intt, 10));
        let b = d.push(OpSpec::new(0, Unit::Ntt, MicroKind::Ntt, 10));
        let c = d.push(OpSpec::new(0, Unit::Mas, MicroKind::Mas, 5).deps([a]));
        let t = d.simulate().unwrap();
        assert_eq!((t.start[a], t.start[b], t.start[c]), (0, 10, 10));
        assert_eq!(t.makespan(), 20);
    }

    #[test]
    fn fill_delays_dependents_only() {
        let mut d = Dag::new(1, 3);
        let a = d.push(OpSpec::new(0, Unit::Ntt, MicroKind::Intt, 10));
        let b = d.push(OpSpec::new(0, Unit::Ntt, MicroKind::Ntt, 10));
        let c = d.push(OpSpec::new(0, Unit::Mas, MicroKind::Mas, 1).deps([a]));
        let t = d.simulate().unwrap();
        assert_eq!(t.start[b], 10);
        assert_eq!(t.start[c], 13);
    }

    #[test]
    fn link_picks_lowest_key_among_ready() {
        let mut d = Dag::new(2, 0);
        let x = d.send(0, 1, 8, 4, OpSpec::new(0, Unit::Link, MicroKind::Send, 0).limb(5, 0));
        let y = d.send(0, 1, 8, 4, OpSpec::new(0, Unit::Link, MicroKind::Send, 0).limb(2, 0));
        let t = d.simulate().unwrap();
        assert_eq!((t.start[y], t.start[x]), (0, 4));
    }

    #[test]
    fn relay_starts_after_upstream_begins() {
        let mut d = Dag::new(3, 5);
        let a = d.send(0, 1, 8, 100, OpSpec::new(0, Unit::Link, MicroKind::Send, 0));
        let b = d.relay(a, 2, OpSpec::new(1, Unit::Link, MicroKind::Send, 0));
        let t = d.simulate().unwrap();
        assert_eq!((t.start[b], t.end[b]), (5, 105));
        assert_eq!(d.critical_dep(&t, b), Some(a));
    }

    #[test]
    fn cycles_are_reported_as_deadlock() {
        let mut d = Dag::new(1, 0);
        let a = d.push(OpSpec::new(0, Unit::Ntt, MicroKind::Ntt, 1));
        let b = d.push(OpSpec::new(0, Unit::Mas, MicroKind::Mas, 1).deps([a]));
        d.add_dep(a, b);
        assert!(matches!(d.simulate(), Err(SimError::DeadlockDetected { .. })));
    }

    #[test]
    fn in_order_head_blocks_later_ops() {
        let mut d = Dag::new(2, 0);
        let s = d.send(1, 0, 8, 50, OpSpec::new(1, Unit::Link, MicroKind::Send, 0));
        let a = d.push(OpSpec::new(0, Unit::Ntt, MicroKind::Ntt, 10).deps([s]));
        let b = d.push(OpSpec::new(0, Unit::Ntt, MicroKind::Ntt, 10));
        let t = d.simulate().unwrap();
        assert_eq!((t.start[a], t.start[b]), (50, 60));
    }
}
