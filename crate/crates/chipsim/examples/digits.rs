//! Three-digit KeySwitch: digits spread over the ring versus one digit per chiplet.

use chipsim::{schedule_keyswitch_digits, ChipletConfig, DigitStrategy};

fn main() {
    let cfg = ChipletConfig::preset_1024x64();
    for strategy in [DigitStrategy::Alternate, DigitStrategy::Digitwise] {
        let rep = schedule_keyswitch_digits(&cfg, 22, 3, 8, strategy).unwrap().report;
        println!(
            "{strategy:?}: {} cycles, utilization {:.3}, comm overhead {:.3}, {} transfers",
            rep.total_cycles, rep.ntt_utilization, rep.comm_overhead, rep.polynomials_transferred
        );
    }
}
