//! Identity-revert detection with a ten-revision look-ahead.

use tabooscope::revisions::{detect_reverts, RevertDetector};

fn main() {
    let history = ["A", "B", "C", "A", "D", "D", "E"];
    let flags = detect_reverts(&history, 10);
    for (c, f) in history.iter().zip(&flags) {
        println!("{c} {}", if *f { "reverted" } else { "" });
    }

    // Streaming form: decisions arrive once each window closes.
    let mut detector = RevertDetector::new(2);
    for c in ["A", "B", "C", "A", "B"] {
        println!("push {c}: {:?}", detector.push(c));
    }
    println!("finish: {:?}", detector.finish());
}
