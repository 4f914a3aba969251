//! Synthetic episodes with known ground truth, a textual noise model for
//! corrupting them into OCR-like frame streams, and scoring of recovered
//! subtitles against the truth.
//!
//! All randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64(seed)`. Stream 0 draws the ground truth and stream 1 draws
//! the noise, so the truth for a seed does not depend on the noise settings.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::consolidate::{base_text, is_similar};
use crate::domain::{Label, LabeledInterval, PipelineConfig, SegmentId, Status, SubtitleSegment, Timecode};
use crate::interval::{normalize, overlap_ms};
use crate::ocr::FrameLine;

/// Name recorded in report headers.
pub const GENERATOR_NAME: &str = "ChaCha8Rng/seed_from_u64 (truth stream 0, noise stream 1)";

const TRUTH_STREAM: u64 = 0;
const NOISE_STREAM: u64 = 1;

/// Characters drawn for synthetic subtitle text.
const CHAR_POOL: &str = "春夏秋冬風花雪月山水天地人心情愛恨離別相思夢魂歌舞戲台君臣父母兄弟姊妹\
朋友英雄美人江湖刀劍琴棋書畫詩酒茶香燈火星辰日夜晨昏雲霧雨露霜冰河海湖泉林木竹松梅蘭菊荷\
金銀珠玉寶貝城門宮殿廟堂家園故鄉路途千萬百十一二三四五六七八九東西南北前後左右上下高低";

#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    pub seed: u64,
    /// Per-character substitution probability.
    pub char_sub_prob: f64,
    /// Probability that a frame showing a subtitle reads as blank.
    pub dropout_prob: f64,
    /// Probability that a blank frame reads as a short spurious text.
    pub ghost_prob: f64,
    pub conf_mean_true: f64,
    pub conf_mean_noise: f64,
}

impl NoiseModel {
    pub fn noiseless(seed: u64) -> Self {
        NoiseModel { seed, char_sub_prob: 0.0, dropout_prob: 0.0, ghost_prob: 0.0, conf_mean_true: 0.9, conf_mean_noise: 0.3 }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let probs = [
            ("char_sub_prob", self.char_sub_prob),
            ("dropout_prob", self.dropout_prob),
            ("ghost_prob", self.ghost_prob),
            ("conf_mean_true", self.conf_mean_true),
            ("conf_mean_noise", self.conf_mean_noise),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(SynthError::BadProbability(name));
            }
        }
        Ok(())
    }
}

/// Shape of a generated episode.
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeParams {
    pub duration_ms: u64,
    pub line_count: usize,
    /// Probability that the next block is a song rather than a spoken line.
    pub song_prob: f64,
    pub lines_per_song: (usize, usize),
    pub chars_per_line: (usize, usize),
    pub speech_secs_per_char: f64,
    pub singing_secs_per_char: f64,
    /// Relative jitter applied to per-character durations.
    pub duration_jitter: f64,
    /// Silence between blocks.
    pub block_gap_ms: (u64, u64),
    /// Gap between consecutive lines of one song.
    pub song_line_gap_ms: (u64, u64),
    /// Probability of an instrumental passage between blocks.
    pub instrumental_prob: f64,
    pub sampling_period_ms: u64,
}

impl Default for EpisodeParams {
    fn default() -> Self {
        EpisodeParams {
            duration_ms: 900_000,
            line_count: 60,
            song_prob: 0.3,
            lines_per_song: (2, 6),
            chars_per_line: (4, 14),
            speech_secs_per_char: 0.4,
            singing_secs_per_char: 0.9,
            duration_jitter: 0.2,
            block_gap_ms: (300, 3000),
            song_line_gap_ms: (0, 1000),
            instrumental_prob: 0.15,
            sampling_period_ms: PipelineConfig::default().sampling_period_ms,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("{needed_ms} ms of content does not fit in a {duration_ms} ms episode")]
    Infeasible { needed_ms: u64, duration_ms: u64 },
    #[error("{0} must lie in [0,1]")]
    BadProbability(&'static str),
    #[error("invalid parameters: {0}")]
    BadParams(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticEpisode {
    pub truth: Vec<SubtitleSegment>,
    pub track: Vec<LabeledInterval>,
    pub stream: Vec<FrameLine>,
    /// Truth subtitles that belong to songs.
    pub singing_ids: Vec<SegmentId>,
}

fn pool() -> Vec<char> {
    CHAR_POOL.chars().collect()
}

fn random_text(rng: &mut ChaCha8Rng, pool: &[char], len: usize) -> String {
    (0..len).map(|_| pool[rng.random_range(0..pool.len())]).collect()
}

fn quantize(ms: f64, period: u64) -> u64 {
    let steps = (ms / period as f64 + 0.5) as u64;
    steps.max(1) * period
}

fn range_u64(rng: &mut ChaCha8Rng, (lo, hi): (u64, u64), period: u64) -> u64 {
    let v = if hi > lo { rng.random_range(lo..=hi) } else { lo };
    (v / period) * period
}

fn range_usize(rng: &mut ChaCha8Rng, (lo, hi): (usize, usize)) -> usize {
    if hi > lo { rng.random_range(lo..=hi) } else { lo }
}

struct TruthBuilder<'a> {
    rng: ChaCha8Rng,
    params: &'a EpisodeParams,
    pool: Vec<char>,
    cursor: u64,
    truth: Vec<SubtitleSegment>,
    track: Vec<LabeledInterval>,
    singing_ids: Vec<SegmentId>,
    conf: f64,
}

/// Truth segments, activity track and the ids of sung lines.
type Built = (Vec<SubtitleSegment>, Vec<LabeledInterval>, Vec<SegmentId>);

impl TruthBuilder<'_> {
    fn line(&mut self, secs_per_char: f64, singing: bool) {
        let p = self.params;
        let chars = range_usize(&mut self.rng, p.chars_per_line);
        let prev = self.truth.last().map(|s| s.text.clone()).unwrap_or_default();
        let cfg = PipelineConfig::default();
        let text = loop {
            let t = random_text(&mut self.rng, &self.pool, chars);
            if !is_similar(&t, &prev) && base_text(&t, &cfg) != base_text(&prev, &cfg) {
                break t;
            }
        };
        let jitter = 1.0 + p.duration_jitter * (2.0 * self.rng.random::<f64>() - 1.0);
        let dur = quantize(chars as f64 * secs_per_char * 1000.0 * jitter, p.sampling_period_ms);
        let start = Timecode(self.cursor);
        let end = start.add_millis(dur);
        let id = SegmentId::for_start(start);
        if singing {
            self.singing_ids.push(id.clone());
        }
        self.truth.push(SubtitleSegment { id, text, start, end, conf: self.conf, status: Status::Auto });
        self.cursor = end.0;
    }

    fn build(mut self) -> Result<Built, SynthError> {
        let p = self.params;
        let period = p.sampling_period_ms;
        self.cursor = range_u64(&mut self.rng, p.block_gap_ms, period);
        while self.truth.len() < p.line_count {
            if self.rng.random_bool(p.instrumental_prob) {
                let len = range_u64(&mut self.rng, (3000, 10_000), period);
                self.track.push(LabeledInterval::new(self.cursor, self.cursor + len, Label::Music));
                self.cursor += len + range_u64(&mut self.rng, p.block_gap_ms, period);
            }
            if self.rng.random_bool(p.song_prob) {
                let intro = range_u64(&mut self.rng, (0, 2000), period);
                let music_start = self.cursor;
                self.cursor += intro;
                let n = range_usize(&mut self.rng, p.lines_per_song).min(p.line_count - self.truth.len());
                for k in 0..n {
                    if k > 0 {
                        self.cursor += range_u64(&mut self.rng, p.song_line_gap_ms, period);
                    }
                    self.line(p.singing_secs_per_char, true);
                }
                self.cursor += range_u64(&mut self.rng, (0, 2000), period);
                self.track.push(LabeledInterval::new(music_start, self.cursor.max(music_start + period), Label::Music));
            } else {
                self.line(p.speech_secs_per_char, false);
                let last = self.truth.last().expect("line pushed");
                self.track.push(LabeledInterval::new(last.start.0, last.end.0, Label::Speech));
            }
            self.cursor += range_u64(&mut self.rng, p.block_gap_ms, period).max(period);
            if self.cursor > p.duration_ms {
                return Err(SynthError::Infeasible { needed_ms: self.cursor, duration_ms: p.duration_ms });
            }
        }
        let track = normalize(self.track).map_err(|_| SynthError::BadParams("degenerate interval"))?;
        Ok((self.truth, track, self.singing_ids))
    }
}

/// Generates truth subtitles, an activity track and a noisy frame stream.
pub fn generate_episode(params: &EpisodeParams, noise: &NoiseModel) -> Result<SyntheticEpisode, SynthError> {
    noise.validate()?;
    if params.sampling_period_ms == 0 {
        return Err(SynthError::BadParams("sampling_period_ms must be positive"));
    }
    if params.chars_per_line.0 == 0 || params.chars_per_line.0 > params.chars_per_line.1 {
        return Err(SynthError::BadParams("chars_per_line"));
    }
    if params.lines_per_song.0 == 0 || params.lines_per_song.0 > params.lines_per_song.1 {
        return Err(SynthError::BadParams("lines_per_song"));
    }
    if !(0.0..=1.0).contains(&params.song_prob) || !(0.0..=1.0).contains(&params.instrumental_prob) {
        return Err(SynthError::BadParams("block probabilities must lie in [0,1]"));
    }

    let mut truth_rng = ChaCha8Rng::seed_from_u64(noise.seed);
    truth_rng.set_stream(TRUTH_STREAM);
    let builder = TruthBuilder {
        rng: truth_rng,
        params,
        pool: pool(),
        cursor: 0,
        truth: Vec::new(),
        track: Vec::new(),
        singing_ids: Vec::new(),
        conf: noise.conf_mean_true,
    };
    let (truth, track, singing_ids) = builder.build()?;
    let stream = corrupt(&truth, params.duration_ms, params.sampling_period_ms, noise);
    Ok(SyntheticEpisode { truth, track, stream, singing_ids })
}

/// Samples the truth at the given cadence and applies the noise model.
pub fn corrupt(truth: &[SubtitleSegment], duration_ms: u64, period: u64, noise: &NoiseModel) -> Vec<FrameLine> {
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    rng.set_stream(NOISE_STREAM);
    let pool = pool();
    let mut out = Vec::with_capacity((duration_ms / period) as usize);
    let mut idx = 0;
    let mut t = 0;
    while t < duration_ms {
        while idx < truth.len() && truth[idx].end.0 <= t {
            idx += 1;
        }
        let tc = Timecode(t);
        let showing = truth.get(idx).filter(|s| s.start.0 <= t);
        let line = match showing {
            Some(seg) => {
                if rng.random_bool(noise.dropout_prob) {
                    FrameLine::blank(tc)
                } else {
                    let mut text = String::with_capacity(seg.text.len());
                    let mut conf_sum = 0.0;
                    let mut n = 0usize;
                    for c in seg.text.chars() {
                        if rng.random_bool(noise.char_sub_prob) {
                            let mut r = pool[rng.random_range(0..pool.len())];
                            while r == c {
                                r = pool[rng.random_range(0..pool.len())];
                            }
                            text.push(r);
                            conf_sum += noise.conf_mean_noise;
                        } else {
                            text.push(c);
                            conf_sum += noise.conf_mean_true;
                        }
                        n += 1;
                    }
                    FrameLine::new(tc, text, conf_sum / n.max(1) as f64)
                }
            }
            None => {
                if rng.random_bool(noise.ghost_prob) {
                    let len = rng.random_range(1..=2);
                    FrameLine::new(tc, random_text(&mut rng, &pool, len), noise.conf_mean_noise)
                } else {
                    FrameLine::blank(tc)
                }
            }
        };
        out.push(line);
        t += period;
    }
    out
}

/// Replays segments as a noiseless frame stream covering `[0, duration_ms)`.
pub fn replay_segments(segments: &[SubtitleSegment], duration_ms: u64, period: u64) -> Vec<FrameLine> {
    let noise = NoiseModel { conf_mean_true: 1.0, ..NoiseModel::noiseless(0) };
    let mut lines = corrupt(segments, duration_ms, period, &noise);
    for line in &mut lines {
        if let Some(seg) = segments.iter().find(|s| s.start <= line.t && line.t < s.end) {
            line.conf = seg.conf;
        }
    }
    lines
}

#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub truth_count: usize,
    pub recovered_count: usize,
    pub matched: usize,
    pub segment_recall: f64,
    pub segment_precision: f64,
    pub text_exact_rate: f64,
    pub mean_boundary_error_ms: f64,
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "truth_segments {}", self.truth_count)?;
        writeln!(f, "recovered_segments {}", self.recovered_count)?;
        writeln!(f, "matched {}", self.matched)?;
        writeln!(f, "segment_recall {:.4}", self.segment_recall)?;
        writeln!(f, "segment_precision {:.4}", self.segment_precision)?;
        writeln!(f, "text_exact_rate {:.4}", self.text_exact_rate)?;
        writeln!(f, "mean_boundary_error_ms {:.1}", self.mean_boundary_error_ms)
    }
}

/// True when the overlap covers at least half of each span.
fn spans_match(a: &SubtitleSegment, b: &SubtitleSegment) -> Option<u64> {
    let ov = overlap_ms(a.start, a.end, b.start, b.end);
    (ov > 0 && 2 * ov >= a.duration_ms() && 2 * ov >= b.duration_ms()).then_some(ov)
}

/// Greedy one-to-one matching by decreasing overlap, then scoring.
pub fn evaluate(truth: &[SubtitleSegment], recovered: &[SubtitleSegment]) -> EvalReport {
    let truth: Vec<&SubtitleSegment> = truth.iter().filter(|s| s.status != Status::Deleted).collect();
    let recovered: Vec<&SubtitleSegment> = recovered.iter().filter(|s| s.status != Status::Deleted).collect();

    let mut pairs: Vec<(u64, usize, usize)> = Vec::new();
    let mut first = 0;
    for (i, t) in truth.iter().enumerate() {
        while first < recovered.len() && recovered[first].end <= t.start {
            first += 1;
        }
        for (j, r) in recovered.iter().enumerate().skip(first) {
            if r.start >= t.end {
                break;
            }
            if let Some(ov) = spans_match(t, r) {
                pairs.push((ov, i, j));
            }
        }
    }
    pairs.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut truth_used = alloc::vec![false; truth.len()];
    let mut rec_used = alloc::vec![false; recovered.len()];
    let mut matched = 0usize;
    let mut exact = 0usize;
    let mut boundary_sum = 0.0;
    for (_, i, j) in pairs {
        if truth_used[i] || rec_used[j] {
            continue;
        }
        truth_used[i] = true;
        rec_used[j] = true;
        matched += 1;
        let (t, r) = (truth[i], recovered[j]);
        if t.text == r.text {
            exact += 1;
        }
        let ds = t.start.0.abs_diff(r.start.0) as f64;
        let de = t.end.0.abs_diff(r.end.0) as f64;
        boundary_sum += (ds + de) / 2.0;
    }

    let ratio = |num: usize, den: usize| if den == 0 { 1.0 } else { num as f64 / den as f64 };
    EvalReport {
        truth_count: truth.len(),
        recovered_count: recovered.len(),
        matched,
        segment_recall: ratio(matched, truth.len()),
        segment_precision: ratio(matched, recovered.len()),
        text_exact_rate: if matched == 0 {
            if truth.is_empty() { 1.0 } else { 0.0 }
        } else {
            exact as f64 / matched as f64
        },
        mean_boundary_error_ms: if matched == 0 { 0.0 } else { boundary_sum / matched as f64 },
    }
}
