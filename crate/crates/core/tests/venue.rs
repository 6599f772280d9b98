mod common;

use std::collections::BTreeMap;

use chrono::FixedOffset;
use common::*;
use proptest::prelude::*;
use telebrain_core::model::*;
use telebrain_core::osc::{OscArg, OscMessage};
use telebrain_core::venue::*;

#[test]
fn precedence_table_covers_every_combination() {
    let cat = catalog();
    let mut p = performance(ROSTER, 11);
    p.resolve_fraction(&match &cat[&id(FRAC_PERSIST)] {
        Document::FractionalAssignment(f) => f.clone(),
        _ => unreachable!(),
    })
    .unwrap();
    let mut rows = 0;
    for mask in 1u32..64 {
        let chosen: Vec<Mechanism> = (0..6).filter(|i| mask & (1 << i) != 0).map(|i| MECHANISMS[i]).collect();
        let d = chosen.iter().fold(Designation::default(), |d, m| with(d, *m));
        let winner = chosen[0];
        assert_eq!(d.mechanism(), Some(winner), "mask {mask:#b}");
        let got = p.resolve_targets("Bruno", &send(d.clone(), IMAGE), &cat).unwrap();
        assert_eq!(targets(&got), expected(winner, &p), "mask {mask:#b} {winner:?}");
        let again = p.resolve_targets("Bruno", &send(d, IMAGE), &cat).unwrap();
        assert_eq!(got, again, "deterministic");
        rows += 1;
    }
    assert_eq!(rows, 63);
}

#[test]
fn image7_all_send_reaches_image_receivers() {
    let cat = catalog();
    let mut p = performance(&[("Nick", "Receiver"), ("Rachel", "Receiver"), ("Bruno", "Receiver")], 1);
    let d = p.dispatch("Nick", &send(Designation::all(), IMAGE), &cat, 1_000).unwrap();
    assert_eq!(targets(&d.cues[0].deliveries), set(&["Nick", "Rachel", "Bruno"]));
    assert_eq!(d.entries[0].line(), "Nick: show image: Fsharp4");
}

#[test]
fn pair_degrades_per_receiver() {
    let cat = catalog();
    let mut p = performance(ROSTER, 2);
    let got = p
        .resolve_targets("Bruno", &send(Designation::performers(["Ann", "Ivy", "Nick", "Dee"]), PAIR), &cat)
        .unwrap();
    let kinds: BTreeMap<_, Vec<PartKind>> =
        got.iter().map(|d| (d.nickname.as_str(), d.parts.iter().map(|p| p.kind).collect())).collect();
    assert_eq!(kinds["Ann"], vec![PartKind::Audio]);
    assert_eq!(kinds["Ivy"], vec![PartKind::Image]);
    assert_eq!(kinds["Nick"], vec![PartKind::Audio, PartKind::Image]);
    assert!(!kinds.contains_key("Dee"));
}

#[test]
fn empty_result_lists_reasons() {
    let cat = catalog();
    let mut p = performance(ROSTER, 2);
    let err = p
        .resolve_targets("Bruno", &send(Designation::performers(["Ann", "Ghost"]), IMAGE), &cat)
        .unwrap_err();
    let VenueError::NoTargets(reasons) = &err else { panic!("{err:?}") };
    assert_eq!(err.code(), "no_targets");
    let by: BTreeMap<_, _> = reasons.iter().map(|r| (r.nickname.as_str(), r.reason.as_str())).collect();
    assert_eq!(by["Ann"], "lacks receive-image");
    assert_eq!(by["Ghost"], "not in the performance");
}

#[test]
fn sender_needs_the_send_flag() {
    let cat = catalog();
    let mut p = performance(ROSTER, 2);
    let err = p.dispatch("Ann", &send(Designation::all(), IMAGE), &cat, 0).unwrap_err();
    assert_eq!(
        err,
        VenueError::CapabilityDenied {
            nickname: "Ann".into(),
            capability: Capability::SendImage
        }
    );
    let err = p.dispatch("Nick", &send(Designation { multi_role: Some(id(MULTI)), ..Default::default() }, IMAGE), &cat, 0);
    assert_eq!(err.unwrap_err().code(), "capability_denied");
}

#[test]
fn osc_parts_need_a_local_ip() {
    let cat = catalog();
    let mut p = performance(&[("Bruno", "Prompter")], 2);
    let mut with_ip = join("Pat", "Prompter");
    with_ip.local_ip = Some("192.168.1.20".into());
    p.join(&with_ip, 9).unwrap();
    let req = SendRequest {
        designation: Designation::all(),
        payload: Some(Payload::Osc {
            message: OscMessage::new("/go", vec![OscArg::Int(1)]),
        }),
    };
    let got = p.resolve_targets("Bruno", &req, &cat).unwrap();
    assert_eq!(targets(&got), set(&["Pat"]));
}

#[test]
fn lifecycle_three_in_three_out() {
    let mut stage = Stage::new();
    stage
        .start(venue(), "Free-For-All", &join("Nick", "Receiver"), 1, PerformanceOptions::default())
        .unwrap();
    stage.join("Free-For-All", &join("Rachel", "Receiver"), 2).unwrap();
    stage.join("Free-For-All", &join("Bruno", "Prompter"), 3).unwrap();
    assert_eq!(stage.summaries()[0].performers, 3);
    assert_eq!(stage.leave("Free-For-All", "Nick").unwrap(), LeaveOutcome::Left);
    assert_eq!(stage.leave("Free-For-All", "Rachel").unwrap(), LeaveOutcome::Left);
    assert_eq!(stage.leave("Free-For-All", "Bruno").unwrap(), LeaveOutcome::Destroyed);
    let err = stage.join("Free-For-All", &join("Nick", "Receiver"), 4).unwrap_err();
    assert_eq!(err.code(), "gone");
    assert!(stage.summaries().is_empty());
    assert!(stage.ended_log("Free-For-All").is_some());
    assert_eq!(stage.join("Nowhere", &join("Nick", "Receiver"), 5).unwrap_err().code(), "not_found");
}

#[test]
fn destroyed_performance_rejects_everything() {
    let cat = catalog();
    let mut p = performance(&[("Nick", "Receiver")], 0);
    assert_eq!(p.leave("Nick").unwrap(), LeaveOutcome::Destroyed);
    assert!(!p.is_live());
    assert!(p.roster().is_empty());
    assert_eq!(p.join(&join("Nick", "Receiver"), 2).unwrap_err().code(), "gone");
    assert_eq!(p.dispatch("Nick", &send(Designation::all(), IMAGE), &cat, 0).unwrap_err().code(), "gone");
    assert_eq!(p.leave("Nick").unwrap_err().code(), "gone");
}

#[test]
fn duplicate_live_name_is_rejected() {
    let mut stage = Stage::new();
    let opts = PerformanceOptions::default();
    stage.start(venue(), "A", &join("Nick", "Receiver"), 1, opts).unwrap();
    let err = stage.start(venue(), "A", &join("Rachel", "Receiver"), 2, opts).unwrap_err();
    assert_eq!(err.code(), "duplicate_name");
}

#[test]
fn join_guards() {
    let mut p = performance(&[("Nick", "Receiver")], 0);
    assert_eq!(p.join(&join("Nick", "Receiver"), 2).unwrap_err().code(), "nickname_taken");
    assert_eq!(p.join(&join("  ", "Receiver"), 2).unwrap_err().code(), "nickname_required");
    assert_eq!(p.join(&join("X", "Conductor"), 2).unwrap_err().code(), "unknown_role");
    p.join(&join("D1", "Duo"), 3).unwrap();
    p.join(&join("D2", "Duo"), 4).unwrap();
    assert_eq!(p.join(&join("D3", "Duo"), 5).unwrap_err(), VenueError::Capacity("Duo".into()));
}

#[test]
fn passcode_and_local_ip_requirements() {
    let mut v = venue();
    v.passcode = Some(PasscodeDigest::new("cobra"));
    v.join_requirements.insert(JoinRequirement::LocalIp);
    let opts = PerformanceOptions::default();
    let err = Performance::start(v.clone(), "P", &join("Nick", "Receiver"), 1, opts).unwrap_err();
    assert_eq!(err, VenueError::Passcode);
    let mut req = join("Nick", "Receiver");
    req.passcode = Some("viper".into());
    assert_eq!(Performance::start(v.clone(), "P", &req, 1, opts).unwrap_err(), VenueError::Passcode);
    req.passcode = Some("cobra".into());
    assert_eq!(Performance::start(v.clone(), "P", &req, 1, opts).unwrap_err(), VenueError::LocalIpRequired);
    req.local_ip = Some("10.0.0.2".into());
    let p = Performance::start(v, "P", &req, 1, opts).unwrap();
    assert_eq!(p.performer("Nick").unwrap().local_ip.as_deref(), Some("10.0.0.2"));
}

#[test]
fn rejoin_keeps_persistent_fraction() {
    let cat = catalog();
    let Document::FractionalAssignment(fa) = &cat[&id(FRAC_PERSIST)] else { unreachable!() };
    let roster = [("a", "Receiver"), ("b", "Receiver"), ("c", "Receiver"), ("d", "Receiver")];
    let mut p = performance(&roster, 5);
    let before = p.resolve_fraction(fa).unwrap();
    let home = before.iter().position(|f| f.contains(&"c".to_string())).unwrap();
    p.leave("c").unwrap();
    let during = p.resolve_fraction(fa).unwrap();
    assert!(during.iter().all(|f| !f.contains(&"c".to_string())));
    p.join(&join("c", "Receiver"), 77).unwrap();
    let after = p.resolve_fraction(fa).unwrap();
    assert!(after[home].contains(&"c".to_string()));
    let sorted = |mut v: Partition| {
        v.iter_mut().for_each(|f| f.sort());
        v
    };
    assert_eq!(sorted(before), sorted(after));
}

#[test]
fn persistent_fraction_is_stable_over_100_calls() {
    let cat = catalog();
    let Document::FractionalAssignment(fa) = &cat[&id(FRAC_PERSIST)] else { unreachable!() };
    let mut p = performance(ROSTER, 9);
    let first = p.resolve_fraction(fa).unwrap();
    for _ in 0..100 {
        assert_eq!(p.resolve_fraction(fa).unwrap(), first);
    }
}

#[test]
fn dynamic_fraction_frequency_is_uniform() {
    let cat = catalog();
    let Document::FractionalAssignment(fa) = &cat[&id(FRAC_DYNAMIC)] else { unreachable!() };
    let names = ["w", "x", "y", "z"];
    let roster: Vec<_> = names.iter().map(|n| (*n, "Receiver")).collect();
    let mut p = performance(&roster, 2024);
    let trials = 10_000;
    let mut hits = BTreeMap::new();
    for _ in 0..trials {
        for n in &p.resolve_fraction(fa).unwrap()[0] {
            *hits.entry(n.clone()).or_insert(0u32) += 1;
        }
    }
    for n in names {
        let f = f64::from(hits[n]) / f64::from(trials);
        assert!((f - 0.5).abs() <= 0.02, "{n}: {f}");
    }
}

#[test]
fn five_into_two_is_three_two() {
    assert_eq!(fraction_sizes(5, 2), vec![3, 2]);
}

fn assignment(k: usize, mode: FractionMode) -> FractionalAssignment {
    FractionalAssignment {
        id: id("frac-k"),
        name: "k".into(),
        target: FractionTarget::All,
        mode,
        fractions: vec![id(IMAGE); k],
        lock: None,
    }
}

fn check_laws(part: &Partition, group: &[String], k: usize) {
    assert_eq!(part.len(), k);
    let mut all: Vec<String> = part.concat();
    all.sort();
    let mut want = group.to_vec();
    want.sort();
    assert_eq!(all, want, "cover and disjoint");
    let sizes: Vec<usize> = part.iter().map(Vec::len).collect();
    assert!(sizes.windows(2).all(|w| w[0] >= w[1]), "larger first {sizes:?}");
    assert!(sizes[0] - sizes[k - 1] <= 1, "balanced {sizes:?}");
}

#[test]
fn partition_laws_for_all_sizes() {
    for n in 1..=20 {
        let names: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
        let roster: Vec<(&str, &str)> = names.iter().map(|s| (s.as_str(), "Receiver")).collect();
        for k in 2..=5 {
            for mode in [FractionMode::Dynamic, FractionMode::Persistent] {
                let mut p = performance(&roster, (n * 10 + k) as u64);
                let part = p.resolve_fraction(&assignment(k, mode)).unwrap();
                check_laws(&part, &names, k);
            }
        }
    }
}

proptest! {
    #[test]
    fn persistent_refresh_stays_balanced_after_churn(
        n in 1usize..15,
        k in 2usize..5,
        leavers in prop::collection::btree_set(0usize..15, 0..5),
        newcomers in 0usize..5,
        seed: u64,
    ) {
        let names: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
        let roster: Vec<(&str, &str)> = names.iter().map(|s| (s.as_str(), "Receiver")).collect();
        let mut p = performance(&roster, seed);
        let fa = assignment(k, FractionMode::Persistent);
        p.resolve_fraction(&fa).unwrap();
        for i in leavers.iter().filter(|i| **i < n && **i != 0) {
            p.leave(&names[*i]).unwrap();
        }
        for j in 0..newcomers {
            p.join(&join(&format!("new{j}"), "Receiver"), 100 + j as u64).unwrap();
        }
        let group: Vec<String> = p.roster().iter().map(|r| r.nickname.clone()).collect();
        let part = p.resolve_fraction(&fa).unwrap();
        let mut all = part.concat();
        all.sort();
        let mut want = group.clone();
        want.sort();
        prop_assert_eq!(all, want);
    }
}

#[test]
fn bruno_audio_entry_and_log_scopes() {
    let cat = catalog();
    let mut p = performance(ROSTER, 3);
    let at = (17 * 60 + 46) * 60_000;
    let d = p.dispatch("Bruno", &send(Designation::all(), AUDIO), &cat, at).unwrap();
    assert_eq!(d.entries.len(), 1);
    let e = &d.entries[0];
    assert_eq!(e.line(), "Bruno: play audio: Put your phone in your pocket");
    assert_eq!(e.render(&FixedOffset::east_opt(0).unwrap()), "Bruno: play audio: Put your phone in your pocket\t17:46");
    assert_eq!(e.receivers, able(Capability::ReceiveAudio));
    p.dispatch("Nick", &send(Designation::performers(["Ivy"]), IMAGE), &cat, at - 5).unwrap();
    let global = p.log().global();
    assert_eq!(global.len(), 2);
    assert!(global.windows(2).all(|w| w[0].timestamp <= w[1].timestamp));
    assert_eq!(p.log().for_performer("Ivy").count(), 1);
    assert_eq!(p.log().for_performer("Dee").count(), 0);
    for (n, _) in ROSTER {
        assert!(p.log().for_performer(n).all(|e| global.contains(e)));
    }
}

#[test]
fn cue_schedule_uses_delay_budget() {
    let cat = catalog();
    let mut p = performance(ROSTER, 3);
    let d = p.dispatch("Bruno", &send(Designation::all(), IMAGE), &cat, 5_000).unwrap();
    let cue = &d.cues[0];
    assert_eq!(cue.issued_at, 5_000);
    assert_eq!(cue.schedule.execute_at, 5_000 + p.delay_budget_ms() as i64);
    let next = p.dispatch("Bruno", &send(Designation::all(), IMAGE), &cat, 5_001).unwrap();
    assert_eq!(next.cues[0].cue_id, cue.cue_id + 1);
}

#[test]
fn change_guards_and_test_mode() {
    let cat = catalog();
    let mut p = performance(ROSTER, 3);
    assert_eq!(p.change_role("Nick", "Prompter").unwrap_err().code(), "capability_denied");
    p.join(&join("Dee2", "Duo"), 50).unwrap();
    assert_eq!(p.change_role("Bruno", "Duo").unwrap_err(), VenueError::Capacity("Duo".into()));
    p.change_role("Dee", "Receiver").unwrap();
    assert_eq!(p.performer("Dee").unwrap().capabilities, venue().role("Receiver").unwrap().role.capabilities);
    assert_eq!(p.change_functionality("Nick", CapabilitySet::full()).unwrap_err().code(), "capability_denied");

    p.set_test_mode("Bruno", true).unwrap();
    let d = p.dispatch("Bruno", &send(Designation::all(), IMAGE), &cat, 10).unwrap();
    assert_eq!(targets(&d.cues[0].deliveries), set(&["Bruno"]));
    assert!(d.cues[0].test);
    assert_eq!(d.entries[0].line(), "Bruno: show image: Fsharp4 [test]");
    assert_eq!(p.set_test_mode("Nick", true).unwrap_err().code(), "capability_denied");
}

#[test]
fn change_functionality_narrows_receiving() {
    let cat = catalog();
    let mut p = performance(ROSTER, 3);
    p.change_functionality("Bruno", CapabilitySet::from([Capability::SendImage, Capability::ChangeFunctionality]))
        .unwrap();
    let got = p.resolve_targets("Bruno", &send(Designation::all(), IMAGE), &cat).unwrap();
    assert!(!targets(&got).contains("Bruno"));
}

#[test]
fn distribution_steps_advance_on_dispatch_only() {
    let cat = catalog();
    let mut p = performance(ROSTER, 3);
    let by_alg = SendRequest {
        designation: Designation {
            algorithm: Some(id(DISTRIBUTION)),
            ..Default::default()
        },
        payload: None,
    };
    let peek = p.resolve_targets("Bruno", &by_alg, &cat).unwrap();
    assert_eq!(targets(&peek), set(&["Nick", "Rachel"]));
    let first = p.dispatch("Bruno", &by_alg, &cat, 0).unwrap();
    assert_eq!(targets(&first.cues[0].deliveries), set(&["Nick", "Rachel"]));
    let second = p.dispatch("Bruno", &by_alg, &cat, 1).unwrap();
    assert_eq!(targets(&second.cues[0].deliveries), able(Capability::ReceiveAudio));
    let third = p.dispatch("Bruno", &by_alg, &cat, 2).unwrap();
    assert_eq!(targets(&third.cues[0].deliveries), set(&["Nick", "Rachel"]), "wraps around");
}

fn by_algorithm(alg: &str) -> SendRequest {
    SendRequest {
        designation: Designation {
            algorithm: Some(id(alg)),
            ..Default::default()
        },
        payload: None,
    }
}

#[test]
fn timed_organization_fires_then_disarms() {
    let cat = catalog();
    let mut p = performance(ROSTER, 3);
    let on = p.dispatch("Bruno", &by_algorithm(TIMED), &cat, 1_000).unwrap();
    assert_eq!(on.armed, vec![id(TIMED)]);
    assert!(on.cues.is_empty());
    assert_eq!(p.next_deadline(), Some(4_000));
    assert!(p.fire_due(&cat, 3_999).cues.is_empty());
    let fired = p.fire_due(&cat, 4_000);
    assert_eq!(fired.cues.len(), 1);
    assert_eq!(targets(&fired.cues[0].deliveries), able(Capability::ReceiveImage));
    assert_eq!(fired.cues[0].sender, "Bruno");
    assert_eq!(p.next_deadline(), None, "a timer fires once");

    // Still armed after firing; the next send switches it off.
    let off = p.dispatch("Bruno", &by_algorithm(TIMED), &cat, 10_000).unwrap();
    assert_eq!(off.disarmed, vec![id(TIMED)]);
    let on = p.dispatch("Bruno", &by_algorithm(TIMED), &cat, 20_000).unwrap();
    assert_eq!(on.armed, vec![id(TIMED)]);
    p.dispatch("Bruno", &by_algorithm(TIMED), &cat, 21_000).unwrap();
    assert!(p.fire_due(&cat, 30_000).cues.is_empty(), "disarming cancels the pending fire");
}

#[test]
fn metronome_driven_organization_repeats_on_the_grid() {
    let mut cat = catalog();
    cat.insert(
        id("alg-timed-metro"),
        Document::Algorithm(AlgorithmObject {
            id: id("alg-timed-metro"),
            name: "metro".into(),
            kind: AlgorithmKind::TimedOrganization {
                entries: vec![TimedEntry {
                    trigger: id(METRONOME),
                    action: DistributionStep {
                        content: id(IMAGE),
                        target: StepTarget::Performers(set(&["Ivy"])),
                    },
                }],
            },
            lock: None,
        }),
    );
    let mut p = performance(ROSTER, 3);
    p.dispatch("Bruno", &by_algorithm("alg-timed-metro"), &cat, 1_000).unwrap();
    let mut at = Vec::new();
    while let Some(deadline) = p.next_deadline().filter(|d| *d <= 1_750) {
        let fired = p.fire_due(&cat, deadline);
        at.extend(fired.cues.iter().map(|c| c.issued_at));
        assert!(fired.cues.iter().all(|c| targets(&c.deliveries) == set(&["Ivy"])));
    }
    assert_eq!(at, vec![1_000, 1_250, 1_500, 1_750]);
    assert_eq!(p.next_deadline(), Some(2_000));
}

#[test]
fn osc_bindings_route_in_and_out() {
    let cat = catalog();
    let mut p = performance(ROSTER, 3);
    let cue = OscMessage::new("/cue/1", vec![]);
    assert!(p.osc_inbound(&cue, &cat, 0).cues.is_empty(), "unbound until armed");
    p.dispatch("Bruno", &by_algorithm(OSC_IN), &cat, 0).unwrap();
    let hit = p.osc_inbound(&cue, &cat, 10);
    assert_eq!(targets(&hit.cues[0].deliveries), able(Capability::ReceiveImage));
    assert!(p.osc_inbound(&OscMessage::new("/cue/2", vec![]), &cat, 10).cues.is_empty());

    let mut listener = join("Desk", "Prompter");
    listener.local_ip = Some("127.0.0.1".into());
    p.join(&listener, 40).unwrap();
    p.dispatch("Bruno", &by_algorithm(OSC_OUT), &cat, 20).unwrap();
    let d = p.dispatch("Bruno", &send(Designation::performers(["Desk"]), IMAGE), &cat, 30).unwrap();
    let parts = &d.cues[0].deliveries[0].parts;
    let osc = parts.iter().find(|p| p.kind == PartKind::Osc).expect("osc part");
    assert_eq!(osc.osc.as_ref().unwrap().address, "/telebrain/image");
    assert_eq!(osc.osc.as_ref().unwrap().args, vec![OscArg::Str("Fsharp4".into())]);
}

#[test]
fn text_and_folder_payloads() {
    let cat = catalog();
    let mut p = performance(ROSTER, 3);
    let text = SendRequest {
        designation: Designation::all(),
        payload: Some(Payload::Text { text: "look up".into() }),
    };
    let d = p.dispatch("Bruno", &text, &cat, 0).unwrap();
    assert_eq!(targets(&d.cues[0].deliveries), able(Capability::ReceiveText));
    assert_eq!(d.entries[0].line(), "Bruno: show text: look up");

    let folder = p.resolve_targets("Bruno", &send(Designation::performers(["Dee", "Ivy"]), FOLDER), &cat).unwrap();
    let kinds: BTreeMap<_, Vec<PartKind>> =
        folder.iter().map(|d| (d.nickname.as_str(), d.parts.iter().map(|p| p.kind).collect())).collect();
    assert_eq!(kinds["Dee"], vec![PartKind::Teleprompt]);
    assert_eq!(kinds["Ivy"], vec![PartKind::Image]);
}
