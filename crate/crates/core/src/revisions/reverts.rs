//! Identity-revert detection.
//!
//! Revision `r` is reverted when one of the next `window` revisions has the
//! same content checksum as some revision before `r`: the page was restored to
//! a state that predates `r`. The restoring revision is not itself marked.
//!
//! If `first(c)` is the index where checksum `c` first appears, then a later
//! revision `j` restores a state before `r` exactly when `first(c_j) < r`. The
//! detector tracks `first` incrementally and holds at most `window` undecided
//! revisions.

use std::collections::{HashMap, VecDeque};

use super::RevisionRecord;

#[derive(Debug)]
pub struct RevertDetector {
    window: usize,
    first_seen: HashMap<String, usize>,
    next: usize,
    pending: VecDeque<(usize, bool)>,
}

impl RevertDetector {
    pub fn new(window: usize) -> Self {
        RevertDetector {
            window,
            first_seen: HashMap::new(),
            next: 0,
            pending: VecDeque::with_capacity(window + 1),
        }
    }

    /// Feeds the next revision's checksum. Returns `(index, reverted)` for
    /// every revision whose look-ahead window is now complete.
    pub fn push(&mut self, checksum: &str) -> Vec<(usize, bool)> {
        let j = self.next;
        self.next += 1;
        let first = *self.first_seen.entry(checksum.to_string()).or_insert(j);
        for (r, reverted) in self.pending.iter_mut() {
            if first < *r {
                *reverted = true;
            }
        }
        self.pending.push_back((j, false));
        let mut done = Vec::new();
        while let Some(&(r, flag)) = self.pending.front() {
            if r + self.window <= j {
                done.push((r, flag));
                self.pending.pop_front();
            } else {
                break;
            }
        }
        done
    }

    /// Flushes revisions whose window runs past the end of the history.
    pub fn finish(mut self) -> Vec<(usize, bool)> {
        self.pending.drain(..).collect()
    }
}

pub fn detect_reverts<S: AsRef<str>>(checksums: &[S], window: usize) -> Vec<bool> {
    let mut out = vec![false; checksums.len()];
    let mut detector = RevertDetector::new(window);
    for c in checksums {
        for (i, flag) in detector.push(c.as_ref()) {
            out[i] = flag;
        }
    }
    for (i, flag) in detector.finish() {
        out[i] = flag;
    }
    out
}

/// Sets `is_reverted` on one page's revisions, which must already be ordered.
pub fn annotate_reverts(revisions: &mut [RevisionRecord], window: usize) {
    let checksums: Vec<&str> = revisions.iter().map(|r| r.checksum.as_str()).collect();
    let flags = detect_reverts(&checksums, window);
    for (r, flag) in revisions.iter_mut().zip(flags) {
        r.is_reverted = flag;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singleton() {
        assert_eq!(detect_reverts(&["A"], 10), [false]);
    }

    #[test]
    fn simple_revert() {
        assert_eq!(detect_reverts(&["A", "B", "A"], 10), [false, true, false]);
    }

    #[test]
    fn restore_beyond_window_is_ignored() {
        // B at index 1, A restored at index 12: distance 11
        let mut seq = vec!["A".to_string(), "B".to_string()];
        seq.extend((0..10).map(|i| format!("C{i}")));
        seq.push("A".into());
        let flags = detect_reverts(&seq, 10);
        assert!(!flags[1]);
        // the ten revisions within reach are reverted
        assert!(flags[2..12].iter().all(|&f| f));
        assert!(!flags[12]);
    }

    #[test]
    fn restore_at_window_edge_counts() {
        let mut seq = vec!["A".to_string(), "B".to_string()];
        seq.extend((0..9).map(|i| format!("C{i}")));
        seq.push("A".into());
        assert!(detect_reverts(&seq, 10)[1]);
    }

    #[test]
    fn zero_window() {
        assert_eq!(detect_reverts(&["A", "B", "A"], 0), [false, false, false]);
    }

    #[test]
    fn repeated_identical_content_is_not_a_revert() {
        assert_eq!(detect_reverts(&["A", "B", "B"], 10), [false, false, false]);
    }
}
