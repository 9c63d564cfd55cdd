//! Link traffic and latency of the three naive splits against the ring.

use chipsim::{schedule_keyswitch_ring, schedule_strawman, ChipletConfig, CommRule, Strawman};

fn main() {
    let cfg = ChipletConfig { comm_rule: CommRule::TwiceLinear, ..ChipletConfig::preset_1024x64() };
    for l in [6, 14, 30] {
        let ring = schedule_keyswitch_ring(&cfg, l).unwrap().report;
        println!("l={l:<2} ring  {:>5} transfers {:>9} cycles", ring.polynomials_transferred, ring.total_cycles);
        for s in [Strawman::A, Strawman::B, Strawman::C] {
            let rep = schedule_strawman(&cfg, l, s).unwrap().report;
            println!("     {s:?}     {:>5} transfers {:>9} cycles", rep.polynomials_transferred, rep.total_cycles);
        }
    }
}
