//! Singing-segment mining: subtitle display-duration heuristic, candidate
//! chaining, music-overlap filtering and corpus statistics.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::domain::{Label, LabeledInterval, PipelineConfig, SegmentId, Status, SubtitleSegment, Timecode};
use crate::interval::{overlap_ms, spans_with_label};

const MS_PER_HOUR: f64 = 3_600_000.0;

#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "snake_case"))]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Verdict {
    #[default]
    Unreviewed,
    Singing,
    NotSinging,
}

/// A potential singing span built from one or more consecutive subtitles.
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSegment {
    #[cfg_attr(feature = "serde", serde(rename = "start_ms"))]
    pub start: Timecode,
    #[cfg_attr(feature = "serde", serde(rename = "end_ms"))]
    pub end: Timecode,
    #[cfg_attr(feature = "serde", serde(default))]
    pub subtitle_ids: Vec<SegmentId>,
    pub char_count: usize,
    pub secs_per_char: f64,
    pub music_overlap_ratio: f64,
    /// Whether the candidate met the overlap threshold when filtered.
    #[cfg_attr(feature = "serde", serde(default))]
    pub smad_pass: bool,
    pub verdict: Verdict,
}

impl CandidateSegment {
    pub fn duration_ms(&self) -> u64 {
        self.end - self.start
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MinerError {
    #[error("segment {0} has no countable characters")]
    NoCharacters(SegmentId),
    #[error("segment {0} does not end after it starts")]
    EmptySpan(SegmentId),
}

/// Sung-syllable count: characters other than whitespace and ellipses.
pub fn char_count(text: &str, cfg: &PipelineConfig) -> usize {
    let mut ellipses: Vec<&str> = cfg.ellipsis_set.iter().map(String::as_str).collect();
    ellipses.sort_by_key(|e| core::cmp::Reverse(e.len()));
    let mut count = 0;
    let mut rest = text;
    'outer: while let Some(c) = rest.chars().next() {
        for e in &ellipses {
            if let Some(r) = rest.strip_prefix(e) {
                rest = r;
                continue 'outer;
            }
        }
        if !c.is_whitespace() {
            count += 1;
        }
        rest = &rest[c.len_utf8()..];
    }
    count
}

/// True when the subtitle has at least `singing_min_chars` characters and
/// stays on screen strictly longer than `singing_secs_per_char` per character.
pub fn is_singing_subtitle(seg: &SubtitleSegment, cfg: &PipelineConfig) -> Result<bool, MinerError> {
    if seg.end <= seg.start {
        return Err(MinerError::EmptySpan(seg.id.clone()));
    }
    let chars = char_count(&seg.text, cfg);
    if chars == 0 {
        return Err(MinerError::NoCharacters(seg.id.clone()));
    }
    // compared in milliseconds so 2.4 s over 6 characters is exactly on the boundary
    let threshold_ms = cfg.singing_secs_per_char * 1000.0 * chars as f64;
    Ok(chars >= cfg.singing_min_chars && seg.duration_ms() as f64 > threshold_ms)
}

/// Chains qualifying subtitles separated by at most `candidate_gap_ms`.
/// Any non-qualifying subtitle breaks the chain. Deleted segments are ignored.
pub fn build_candidates(segments: &[SubtitleSegment], cfg: &PipelineConfig) -> Vec<CandidateSegment> {
    let mut out: Vec<CandidateSegment> = Vec::new();
    let mut chain_open = false;
    for seg in segments.iter().filter(|s| s.status != Status::Deleted) {
        let qualifies = matches!(is_singing_subtitle(seg, cfg), Ok(true));
        if !qualifies {
            chain_open = false;
            continue;
        }
        let chars = char_count(&seg.text, cfg);
        match out.last_mut() {
            Some(last) if chain_open && seg.start - last.end <= cfg.candidate_gap_ms => {
                last.end = last.end.max(seg.end);
                last.char_count += chars;
                last.subtitle_ids.push(seg.id.clone());
            }
            _ => out.push(CandidateSegment {
                start: seg.start,
                end: seg.end,
                subtitle_ids: alloc::vec![seg.id.clone()],
                char_count: chars,
                secs_per_char: 0.0,
                music_overlap_ratio: 0.0,
                smad_pass: false,
                verdict: Verdict::Unreviewed,
            }),
        }
        chain_open = true;
    }
    for c in &mut out {
        c.secs_per_char = c.duration_ms() as f64 / 1000.0 / c.char_count as f64;
    }
    out
}

/// Fraction of the candidate covered by music intervals.
pub fn music_overlap(c: &CandidateSegment, track: &[LabeledInterval]) -> f64 {
    let dur = c.duration_ms();
    if dur == 0 {
        return 0.0;
    }
    let covered: u64 = spans_with_label(track, Label::Music)
        .into_iter()
        .map(|(s, e)| overlap_ms(c.start, c.end, s, e))
        .sum();
    covered as f64 / dur as f64
}

/// Stores the music overlap ratio and pass flag on every candidate and
/// returns the ones at or above `overlap_theta`.
pub fn filter_by_smad(
    cands: &mut [CandidateSegment],
    track: &[LabeledInterval],
    cfg: &PipelineConfig,
) -> Vec<CandidateSegment> {
    for c in cands.iter_mut() {
        c.music_overlap_ratio = music_overlap(c, track);
        c.smad_pass = c.music_overlap_ratio >= cfg.overlap_theta;
    }
    cands.iter().filter(|c| c.smad_pass).cloned().collect()
}

/// Per-episode mining record.
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeManifest {
    pub episode_id: String,
    pub total_ms: u64,
    pub candidates: Vec<CandidateSegment>,
}

/// Candidate mining for one episode: build, then filter against the track.
pub fn mine_episode(
    episode_id: impl Into<String>,
    total_ms: u64,
    segments: &[SubtitleSegment],
    track: &[LabeledInterval],
    cfg: &PipelineConfig,
) -> EpisodeManifest {
    let mut candidates = build_candidates(segments, cfg);
    filter_by_smad(&mut candidates, track, cfg);
    EpisodeManifest { episode_id: episode_id.into(), total_ms, candidates }
}

#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusStats {
    pub episodes: usize,
    pub total_hours: f64,
    pub candidate_count: usize,
    pub candidate_hours: f64,
    pub reduction_pct: f64,
    pub filtered_count: usize,
    pub filtered_hours: f64,
    pub confirmed_count: usize,
    pub confirmed_hours: f64,
    pub precision_pct: f64,
    pub segments_per_episode: f64,
    pub min_len_s: f64,
    pub max_len_s: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("no episodes")]
    NoEpisodes,
    #[error("total duration is zero")]
    ZeroDuration,
    #[error("{0} confirmed segments but none passed filtering")]
    ConfirmedWithoutFiltered(usize),
}

/// Rounds half away from zero at `decimals` places.
pub fn round_half_up(x: f64, decimals: u32) -> f64 {
    let scale = (0..decimals).fold(1.0, |acc, _| acc * 10.0);
    let scaled = x.abs() * scale + 0.5;
    // truncating cast is floor for the non-negative value
    let rounded = (scaled as u64) as f64 / scale;
    if x < 0.0 { -rounded } else { rounded }
}

pub fn compute_stats(manifests: &[EpisodeManifest]) -> Result<CorpusStats, StatsError> {
    if manifests.is_empty() {
        return Err(StatsError::NoEpisodes);
    }
    let total_ms: u64 = manifests.iter().map(|m| m.total_ms).sum();
    if total_ms == 0 {
        return Err(StatsError::ZeroDuration);
    }
    let all = || manifests.iter().flat_map(|m| m.candidates.iter());
    let candidate_count = all().count();
    let candidate_ms: u64 = all().map(CandidateSegment::duration_ms).sum();
    let filtered_count = all().filter(|c| c.smad_pass).count();
    let filtered_ms: u64 = all().filter(|c| c.smad_pass).map(CandidateSegment::duration_ms).sum();
    let confirmed: Vec<&CandidateSegment> = all().filter(|c| c.verdict == Verdict::Singing).collect();
    let confirmed_count = confirmed.len();
    if filtered_count == 0 && confirmed_count > 0 {
        return Err(StatsError::ConfirmedWithoutFiltered(confirmed_count));
    }
    let confirmed_ms: u64 = confirmed.iter().map(|c| c.duration_ms()).sum();
    let min_len_ms = confirmed.iter().map(|c| c.duration_ms()).min().unwrap_or(0);
    let max_len_ms = confirmed.iter().map(|c| c.duration_ms()).max().unwrap_or(0);

    let total_hours = total_ms as f64 / MS_PER_HOUR;
    let candidate_hours = candidate_ms as f64 / MS_PER_HOUR;
    Ok(CorpusStats {
        episodes: manifests.len(),
        total_hours,
        candidate_count,
        candidate_hours,
        reduction_pct: 100.0 * (total_hours - candidate_hours) / total_hours,
        filtered_count,
        filtered_hours: filtered_ms as f64 / MS_PER_HOUR,
        confirmed_count,
        confirmed_hours: confirmed_ms as f64 / MS_PER_HOUR,
        precision_pct: if filtered_count == 0 {
            0.0
        } else {
            100.0 * confirmed_count as f64 / filtered_count as f64
        },
        segments_per_episode: filtered_count as f64 / manifests.len() as f64,
        min_len_s: min_len_ms as f64 / 1000.0,
        max_len_s: max_len_ms as f64 / 1000.0,
    })
}

impl CorpusStats {
    /// Plain-text report; percentages and rates at one decimal, hours at two.
    pub fn report(&self) -> String {
        let h = |x: f64| round_half_up(x, 2);
        let p = |x: f64| round_half_up(x, 1);
        let mut s = String::new();
        let _ = writeln!(s, "episodes {}", self.episodes);
        let _ = writeln!(s, "total {:.2} h", h(self.total_hours));
        let _ = writeln!(s, "candidates {} ({:.2} h)", self.candidate_count, h(self.candidate_hours));
        let _ = writeln!(s, "reduction {:.1}%", p(self.reduction_pct));
        let _ = writeln!(s, "filtered {} ({:.2} h)", self.filtered_count, h(self.filtered_hours));
        let _ = writeln!(s, "confirmed {} ({:.2} h)", self.confirmed_count, h(self.confirmed_hours));
        let _ = writeln!(s, "precision {:.1}%", p(self.precision_pct));
        let _ = writeln!(s, "segments/episode {:.1}", p(self.segments_per_episode));
        let _ = writeln!(s, "confirmed length {:.2} - {:.2} s", h(self.min_len_s), h(self.max_len_s));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn seg(text: &str, start: u64, end: u64) -> SubtitleSegment {
        SubtitleSegment {
            id: SegmentId::for_start(Timecode(start)),
            text: text.to_string(),
            start: Timecode(start),
            end: Timecode(end),
            conf: 1.0,
            status: Status::Auto,
        }
    }

    fn cand(start: u64, end: u64) -> CandidateSegment {
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
    fn singing_heuristic_boundaries() {
        let cfg = PipelineConfig::default();
        assert!(is_singing_subtitle(&seg("一二三四五六", 0, 5400), &cfg).unwrap());
        assert!(!is_singing_subtitle(&seg("一二三四五六", 0, 2400), &cfg).unwrap());
        assert!(!is_singing_subtitle(&seg("一二三", 0, 3000), &cfg).unwrap());
        assert!(matches!(is_singing_subtitle(&seg("…", 0, 3000), &cfg), Err(MinerError::NoCharacters(_))));
    }

    #[test]
    fn spaces_and_ellipses_are_not_counted() {
        let cfg = PipelineConfig::default();
        assert_eq!(char_count("你好 世界…", &cfg), 4);
        assert_eq!(char_count("a...b", &cfg), 2);
        assert_eq!(char_count("a..b", &cfg), 4);
    }

    #[test]
    fn chaining() {
        let cfg = PipelineConfig::default();
        let c = build_candidates(&[seg("一二三四五六", 0, 5400), seg("七八九十壹貳", 5400, 10000)], &cfg);
        assert_eq!(c.len(), 1);
        assert_eq!((c[0].start.0, c[0].end.0, c[0].char_count), (0, 10000, 12));
        assert_eq!(c[0].subtitle_ids.len(), 2);

        let c = build_candidates(&[seg("一二三四五六", 0, 5400), seg("七八九十壹貳", 9000, 14000)], &cfg);
        assert_eq!(c.len(), 2);
        assert!((c[0].secs_per_char - 0.9).abs() < 1e-12);

        assert!(build_candidates(&[seg("一二三四五六", 0, 1000)], &cfg).is_empty());
    }

    #[test]
    fn non_qualifier_breaks_chain() {
        let cfg = PipelineConfig::default();
        let c = build_candidates(
            &[seg("一二三四五六", 0, 5400), seg("說白", 5400, 6000), seg("七八九十壹貳", 6000, 12000)],
            &cfg,
        );
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn overlap_examples() {
        let music = |s, e| LabeledInterval::new(s, e, Label::Music);
        assert_eq!(music_overlap(&cand(10000, 20000), &[music(12000, 25000)]), 0.8);
        assert_eq!(music_overlap(&cand(0, 10000), &[]), 0.0);
        assert_eq!(music_overlap(&cand(0, 4000), &[music(2000, 3000)]), 0.25);
        assert_eq!(music_overlap(&cand(0, 4000), &[LabeledInterval::new(0, 4000, Label::Speech)]), 0.0);
    }

    #[test]
    fn filter_threshold_is_inclusive() {
        let cfg = PipelineConfig::default();
        let track = [LabeledInterval::new(0, 5000, Label::Music)];
        let mut cands = [cand(0, 6250), cand(0, 20000), cand(0, 10000)];
        let kept = filter_by_smad(&mut cands, &track, &cfg);
        assert_eq!(kept.len(), 2);
        assert!(cands[0].smad_pass && !cands[1].smad_pass && cands[2].smad_pass);
        assert_eq!(cands[1].music_overlap_ratio, 0.25);
    }

    #[test]
    fn rounding() {
        assert_eq!(round_half_up(51.49, 1), 51.5);
        assert_eq!(round_half_up(60.07, 1), 60.1);
        assert_eq!(round_half_up(6.36, 1), 6.4);
        assert_eq!(round_half_up(0.25, 1), 0.3);
        assert_eq!(round_half_up(-0.25, 1), -0.3);
    }

    #[test]
    fn stats_errors() {
        assert_eq!(compute_stats(&[]), Err(StatsError::NoEpisodes));
        let mut c = cand(0, 1000);
        c.verdict = Verdict::Singing;
        let m = EpisodeManifest { episode_id: "e".into(), total_ms: 10_000, candidates: vec![c] };
        assert_eq!(compute_stats(&[m]), Err(StatsError::ConfirmedWithoutFiltered(1)));
    }
}
