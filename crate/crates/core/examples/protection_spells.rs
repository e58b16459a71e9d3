//! Protection spells from log events and the protected share of a window.

use chrono::{TimeZone, Utc};
use tabooscope::revisions::{build_protection_spells, protected_proportion, ProtectionAction, ProtectionEvent};

fn main() {
    let t = |y, m, d| Utc.with_ymd_and_hms(y, m, d, 0, 0, 0).unwrap();
    let ev = |when, action, level: &str| ProtectionEvent {
        page_id: Some(1),
        title: None,
        timestamp: when,
        action,
        level: level.into(),
        expiry: None,
    };
    let events = [
        ev(t(2009, 1, 1), ProtectionAction::Protect, "edit=autoconfirmed:move=sysop"),
        ev(t(2009, 1, 1), ProtectionAction::Protect, "edit=autoconfirmed:move=sysop"),
        ev(t(2010, 1, 1), ProtectionAction::Modify, "edit=sysop"),
        ev(t(2011, 1, 1), ProtectionAction::Unprotect, ""),
        ev(t(2012, 1, 1), ProtectionAction::Protect, "move=sysop"),
        ev(t(2012, 6, 1), ProtectionAction::Protect, "[edit=sysop] (indefinite)"),
    ];
    let horizon = t(2013, 1, 1);
    let (spells, warnings) = build_protection_spells(1, &events, horizon);
    for s in &spells {
        println!("{} .. {:?} {}", s.start, s.end, s.level);
    }
    for w in warnings {
        println!("warning: {w}");
    }
    println!("protected share since 2008: {:.3}", protected_proportion(&spells, t(2008, 1, 1), horizon));
}
