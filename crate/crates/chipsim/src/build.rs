use crate::config::ChipletConfig;
use crate::engine::{Dag, MicroKind, OpSpec, Phase, SimError, Trace, Unit};
use crate::report::CycleReport;
use crate::analytic::Q;

/// A scheduled program together with its timing and report.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub dag: Dag,
    pub trace: Trace,
    pub report: CycleReport,
    /// NTT-equivalent transforms per chiplet, for flows that define one.
    pub census_ntt_equiv: Option<Q>,
}

impl Simulation {
    pub fn run(cfg: &ChipletConfig, dag: Dag) -> Result<Self, SimError> {
        let trace = dag.simulate()?;
        let report = CycleReport::build(cfg, &dag, &trace);
        Ok(Self { dag, trace, report, census_ntt_equiv: None })
    }

    /// End of the last op of `phase`, or zero.
    pub fn phase_end(&self, phase: Phase) -> u64 {
        self.report.phase(phase).map_or(0, |p| p.last_end)
    }
}

/// Emits micro-ops with the configured durations.
pub(crate) struct Builder<'a> {
    pub cfg: &'a ChipletConfig,
    pub dag: Dag,
    pub n1: u64,
    pub hop: u64,
    pub hbm: u64,
    pub bytes: u64,
    /// Key consumers per chiplet, for the two-deep prefetch window.
    consumers: Vec<Vec<usize>>,
}

impl<'a> Builder<'a> {
    pub fn new(cfg: &'a ChipletConfig, r: usize) -> Self {
        Self {
            cfg,
            dag: Dag::new(r, cfg.fill()),
            n1: cfg.n1 as u64,
            hop: cfg.c2c_cycles(),
            hbm: cfg.hbm_cycles(),
            bytes: cfg.poly_bytes(),
            consumers: vec![Vec::new(); r],
        }
    }

    pub fn r(&self) -> usize {
        self.dag.r
    }

    pub fn transform(&mut self, c: usize, kind: MicroKind, phase: Phase, limb: usize, digit: usize, deps: &[usize]) -> usize {
        self.dag.push(OpSpec::new(c, Unit::Ntt, kind, self.n1).phase(phase).limb(limb, digit).deps(deps.iter().copied()))
    }

    /// Prefetch of one key limb into the idle half of the ping-pong buffer.
    /// Fetch `k` may start once consumer `k-2` has released its half.
    fn fetch(&mut self, c: usize, phase: Phase, limb: usize, digit: usize) -> usize {
        let hist = &self.consumers[c];
        let dep = hist.len().checked_sub(2).map(|i| hist[i]);
        self.dag.push(OpSpec::new(c, Unit::Hbm, MicroKind::HbmRd, self.hbm).phase(phase).limb(limb, digit).deps(dep))
    }

    /// NTT into one target limb followed by the two key MACs. Returns the
    /// NTT and the op that completes the accumulation.
    pub fn keyed_ntt(&mut self, c: usize, phase: Phase, limb: usize, digit: usize, deps: &[usize], bconv: u32) -> (usize, usize) {
        let f = self.fetch(c, phase, limb, digit);
        let mut d = deps.to_vec();
        let last;
        let ntt;
        if self.cfg.shadow_mas {
            d.push(f);
            ntt = self.transform(c, MicroKind::Ntt, phase, limb, digit, &d);
            self.dag.ops[ntt].key_mas = 2;
            last = ntt;
        } else {
            ntt = self.transform(c, MicroKind::Ntt, phase, limb, digit, &d);
            let m0 = self.dag.push(OpSpec::new(c, Unit::Ntt, MicroKind::Mas, self.n1).phase(phase).limb(limb, digit).deps([ntt, f]));
            let m1 = self.dag.push(OpSpec::new(c, Unit::Ntt, MicroKind::Mas, self.n1).phase(phase).limb(limb, digit).deps([m0]));
            self.dag.ops[m0].key_mas = 1;
            self.dag.ops[m1].key_mas = 1;
            last = m1;
        }
        self.dag.ops[ntt].bconv_mas = bconv;
        self.consumers[c].push(last);
        (ntt, last)
    }

    /// Key MACs on a limb that needs no transform.
    pub fn keyed_mas(&mut self, c: usize, phase: Phase, limb: usize, digit: usize, deps: &[usize]) -> usize {
        let f = self.fetch(c, phase, limb, digit);
        let id = self.mas(c, phase, limb, digit, 2, deps.iter().copied().chain([f]));
        self.consumers[c].push(id);
        id
    }

    /// A pointwise op on the MAS unit covering `lanes` products or sums.
    pub fn mas(&mut self, c: usize, phase: Phase, limb: usize, digit: usize, lanes: u32, deps: impl IntoIterator<Item = usize>) -> usize {
        let id = self.dag.push(OpSpec::new(c, Unit::Mas, MicroKind::Mas, self.n1).phase(phase).limb(limb, digit).deps(deps));
        self.dag.ops[id].key_mas = lanes;
        id
    }

    pub fn send(&mut self, from: usize, to: usize, phase: Phase, limb: usize, digit: usize, dep: usize) -> usize {
        self.send_after(from, to, phase, limb, digit, [dep])
    }

    pub fn send_after(&mut self, from: usize, to: usize, phase: Phase, limb: usize, digit: usize, deps: impl IntoIterator<Item = usize>) -> usize {
        let spec = OpSpec::new(from, Unit::Link, MicroKind::Send, 0).phase(phase).limb(limb, digit).deps(deps);
        self.dag.send(from, to, self.bytes, self.hop, spec)
    }

    /// Hops of one ring broadcast: a full circle, or nothing on a single chiplet.
    pub fn ring_hops(&self) -> usize {
        if self.r() == 1 {
            0
        } else {
            self.r()
        }
    }

    /// Forwards the result of `src` from `origin` around the full ring. Returns
    /// the arrival op per chiplet (`None` at the origin).
    pub fn broadcast(&mut self, origin: usize, src: usize, phase: Phase, limb: usize, digit: usize) -> Vec<Option<usize>> {
        let hops = self.ring_hops();
        self.broadcast_hops(origin, src, phase, limb, digit, hops)
    }

    /// Like [`Builder::broadcast`], stopping once every other chiplet has a copy.
    pub fn broadcast_open(&mut self, origin: usize, src: usize, phase: Phase, limb: usize, digit: usize) -> Vec<Option<usize>> {
        let hops = self.r() - 1;
        self.broadcast_hops(origin, src, phase, limb, digit, hops)
    }

    fn broadcast_hops(&mut self, origin: usize, src: usize, phase: Phase, limb: usize, digit: usize, hops: usize) -> Vec<Option<usize>> {
        let r = self.r();
        let mut arrival = vec![None; r];
        let (mut at, mut prev) = (origin, src);
        for h in 0..hops {
            let to = (at + 1) % r;
            prev = if h == 0 { self.send(at, to, phase, limb, digit, prev) } else { self.relay(prev, to, phase, limb, digit) };
            if to != origin && arrival[to].is_none() {
                arrival[to] = Some(prev);
            }
            at = to;
        }
        arrival
    }

    /// Moves data from `from` to `to` along the ring; returns the final hop.
    pub fn forward(&mut self, from: usize, to: usize, phase: Phase, limb: usize, digit: usize, dep: usize) -> usize {
        let r = self.r();
        let (mut at, mut prev) = (from, dep);
        let mut first = true;
        while at != to {
            let next = (at + 1) % r;
            prev = if first { self.send(at, next, phase, limb, digit, prev) } else { self.relay(prev, next, phase, limb, digit) };
            first = false;
            at = next;
        }
        prev
    }

    fn relay(&mut self, upstream: usize, to: usize, phase: Phase, limb: usize, digit: usize) -> usize {
        let from = self.dag.ops[upstream].dst.expect("relay of a transfer");
        self.dag.relay(upstream, to, OpSpec::new(from, Unit::Link, MicroKind::Send, 0).phase(phase).limb(limb, digit))
    }

    pub fn finish(self) -> Result<Simulation, SimError> {
        Simulation::run(self.cfg, self.dag)
    }
}
