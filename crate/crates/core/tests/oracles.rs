//! Core operations checked against slow, obviously-correct reimplementations.

use proptest::prelude::*;
use subforge_core::cues::compute_cues;
use subforge_core::interval::normalize;
use subforge_core::miner::{music_overlap, CandidateSegment, Verdict};
use subforge_core::{edit_distance, Label, LabeledInterval, PipelineConfig, SegmentId, Status, SubtitleSegment, Timecode};

/// Plain exponential recursion; only for very short inputs.
fn naive_distance(a: &[char], b: &[char]) -> usize {
    match (a.split_first(), b.split_first()) {
        (None, _) => b.len(),
        (_, None) => a.len(),
        (Some((x, ra)), Some((y, rb))) if x == y => naive_distance(ra, rb),
        (Some((_, ra)), Some((_, rb))) => {
            1 + naive_distance(ra, b).min(naive_distance(a, rb)).min(naive_distance(ra, rb))
        }
    }
}

fn candidate(start: u64, end: u64) -> CandidateSegment {
    CandidateSegment {
        start: Timecode(start),
        end: Timecode(end),
        subtitle_ids: Vec::new(),
        char_count: 1,
        secs_per_char: 0.0,
        music_overlap_ratio: 0.0,
        smad_pass: false,
        verdict: Verdict::Unreviewed,
    }
}

#[test]
fn edit_distance_matches_recursion_on_binary_strings() {
    let mut strings = vec![String::new()];
    for len in 1..=5 {
        strings.extend((0..1u32 << len).map(|bits| (0..len).map(|i| if bits >> i & 1 == 1 { 'b' } else { 'a' }).collect()));
    }
    for a in &strings {
        for b in &strings {
            let (ca, cb): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
            assert_eq!(edit_distance(a, b), naive_distance(&ca, &cb), "{a:?} {b:?}");
        }
    }
}

fn track() -> impl Strategy<Value = Vec<LabeledInterval>> {
    proptest::collection::vec((0u64..5000, 1u64..2000, any::<bool>()), 0..6).prop_map(|raw| {
        let raw = raw
            .into_iter()
            .map(|(s, d, music)| LabeledInterval::new(s, s + d, if music { Label::Music } else { Label::Speech }))
            .collect();
        normalize(raw).unwrap()
    })
}

fn segments() -> impl Strategy<Value = Vec<SubtitleSegment>> {
    proptest::collection::vec((0u64..600, 1u64..1000, any::<bool>()), 0..20).prop_map(|items| {
        let mut t = 0;
        items
            .into_iter()
            .map(|(gap, dur, deleted)| {
                t += gap;
                let s = SubtitleSegment {
                    id: SegmentId::for_start(Timecode(t)),
                    text: "字".into(),
                    start: Timecode(t),
                    end: Timecode(t + dur),
                    conf: 1.0,
                    status: if deleted { Status::Deleted } else { Status::Auto },
                };
                t += dur;
                s
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn edit_distance_matches_recursion_on_mixed_text(a in "[ab字幕…]{0,7}", b in "[ab字幕…]{0,7}") {
        let (ca, cb): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
        prop_assert_eq!(edit_distance(&a, &b), naive_distance(&ca, &cb));
    }

    #[test]
    fn music_overlap_matches_millisecond_count(track in track(), start in 0u64..6000, len in 1u64..3000) {
        let end = start + len;
        let covered = (start..end)
            .filter(|&t| track.iter().any(|i| i.label == Label::Music && i.start.0 <= t && t < i.end.0))
            .count();
        let want = covered as f64 / len as f64;
        prop_assert!((music_overlap(&candidate(start, end), &track) - want).abs() <= 1.0 / len as f64);
    }

    #[test]
    fn cues_follow_the_gap_between_live_neighbours(segs in segments()) {
        let cfg = PipelineConfig::default();
        let cues = compute_cues(&segs, &cfg);
        let live: Vec<&SubtitleSegment> = segs.iter().filter(|s| s.status != Status::Deleted).collect();
        prop_assert_eq!(cues.len(), live.len());
        for (k, (cue, seg)) in cues.iter().zip(&live).enumerate() {
            prop_assert_eq!(&cue.segment_id, &seg.id);
            let adjacent = k > 0 && seg.start.0 - live[k - 1].end.0 <= cfg.adjacency_gap_ms;
            prop_assert_eq!(cue.adjacent_to_prev, adjacent);
            prop_assert_eq!(cue.sequence_start, !adjacent);
        }
    }
}
