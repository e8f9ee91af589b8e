//! Driving a sweep from a JSON config in code, with a dotted-path override, and rendering
//! the CSV that `decoh factor` would write.

use adiabatic_decoherence::cli::{cmd_factor, parse_config};

fn main() {
    let config = r#"{
        "ensemble": {"spectrum": {"kind": "homogeneous_band", "omega1": 0.5, "omega2": 1.5, "n": 50, "g": 0.1, "samples": 50}},
        "positions": [[1.0, 0.0], [1.0, -1.0]],
        "times": {"start": 0.0, "stop": 4.0, "count": 5}
    }"#;
    let cfg = match parse_config(config, &["mode=exact".to_owned()]) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    };
    match cmd_factor(&cfg) {
        Ok(table) => print!("{}", table.render()),
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}
