//! Run every stage on the bundled fixture and print the report.
//!
//! cargo run --example full_pipeline [-- output-dir]

use std::path::{Path, PathBuf};

use tabooscope::pipeline::{config, run_pipeline};

fn main() {
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/mini/config.toml");
    let out = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("tabooscope-example"));
    let mut cfg = match config::load_config(&fixture, None) {
        Ok(c) => c,
        Err(problems) => {
            eprintln!("{}", problems.join("\n"));
            std::process::exit(1);
        }
    };
    cfg.output.secrets = out.with_extension("secrets");
    cfg.output.dir = out;
    match run_pipeline(&cfg) {
        Ok(summary) => {
            for (stage, status) in &summary.stages {
                println!("{stage:<8} {status:?}");
            }
            let report = std::fs::read_to_string(summary.report_dir.join("report.txt")).unwrap_or_default();
            println!("{report}");
        }
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}
