use std::collections::HashMap;

use super::{Contributor, RevisionRecord};

/// Identity used for experience counting. Suppressed contributors have none.
pub fn contributor_key(c: &Contributor) -> Option<String> {
    match c {
        Contributor::Account(n) | Contributor::Bot(n) => Some(format!("u:{n}")),
        Contributor::Anonymous(ip) => Some(format!("ip:{ip}")),
        Contributor::Suppressed => None,
    }
}

/// Numbers each contributor's revisions 1..n in global
/// `(timestamp, revision_id)` order across every page in `revisions`.
pub fn compute_experience(revisions: &mut [RevisionRecord]) {
    let mut order: Vec<usize> = (0..revisions.len()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (&revisions[a], &revisions[b]);
        ra.timestamp
            .cmp(&rb.timestamp)
            .then(ra.revision_id.cmp(&rb.revision_id))
            .then(ra.page_id.cmp(&rb.page_id))
    });
    let mut counts: HashMap<String, u64> = HashMap::new();
    for idx in order {
        let rev = &mut revisions[idx];
        rev.editor_nth_edit = contributor_key(&rev.contributor).map(|key| {
            let n = counts.entry(key).or_insert(0);
            *n += 1;
            *n
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::month::parse_instant;

    fn rev(page: u64, id: u64, day: &str, who: Contributor) -> RevisionRecord {
        RevisionRecord::new(page, id, parse_instant(day).unwrap(), who, "c")
    }

    #[test]
    fn counts_across_articles_in_time_order() {
        let alice = || Contributor::Account("Alice".into());
        let mut revs = vec![
            rev(2, 20, "2010-03-01", alice()),
            rev(1, 10, "2010-01-01", alice()),
            rev(1, 11, "2010-02-01", Contributor::Anonymous("1.1.1.1".into())),
            rev(1, 12, "2010-04-01", alice()),
            rev(1, 13, "2010-05-01", Contributor::Suppressed),
        ];
        compute_experience(&mut revs);
        let nth: Vec<Option<u64>> = revs.iter().map(|r| r.editor_nth_edit).collect();
        assert_eq!(nth, [Some(2), Some(1), Some(1), Some(3), None]);
    }

    #[test]
    fn ties_break_on_revision_id() {
        let bob = || Contributor::Account("Bob".into());
        let mut revs = vec![rev(1, 9, "2010-01-01", bob()), rev(2, 3, "2010-01-01", bob())];
        compute_experience(&mut revs);
        assert_eq!(revs[1].editor_nth_edit, Some(1));
        assert_eq!(revs[0].editor_nth_edit, Some(2));
    }
}
