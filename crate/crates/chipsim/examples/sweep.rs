//! Mean KeySwitch time over the bootstrapping levels for 4, 8 and 12 chiplets.

use chipsim::sweep::{bootstrap_levels, sweep_chiplets};
use chipsim::ChipletConfig;

fn main() {
    let sw = sweep_chiplets(&ChipletConfig::preset_1024x64(), &[4, 8, 12], bootstrap_levels(30, 15)).unwrap();
    for s in &sw.summary {
        println!("r={:<2} mean {:.4} ms, ratio {:.4}", s.r, s.mean_time_ms, s.ratio);
    }
}
