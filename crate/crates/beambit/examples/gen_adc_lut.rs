//! Regenerates `data/adc_lut.json` from the built-in quantizer-gain table.
//!
//! The table is computed at runtime (and cached) from the Lloyd-Max fixed
//! point, so the data file is a convenience snapshot for external tools, not
//! an input. A unit test keeps the two in sync.
//!
//! Run with `cargo run --example gen_adc_lut`.

use beambit::aqnm::AdcTable;

fn main() {
    let table = AdcTable::default();
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/adc_lut.json");
    let text = serde_json::to_string_pretty(&table).expect("serialize table");
    std::fs::write(path, text + "\n").expect("write data file");
    println!("wrote {path}");
}
