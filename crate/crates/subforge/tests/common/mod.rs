//! Helpers shared by the integration tests and the acceptance suite.
#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};
use std::path::Path;
use std::process::{Command, Output};

use subforge_core::miner::{CandidateSegment, EpisodeManifest, Verdict};
use subforge_core::{Label, LabeledInterval, Timecode};

pub const BIN: &str = env!("CARGO_BIN_EXE_subforge");

pub fn subforge(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("SUBFORGE_CONFIG").output().expect("spawn subforge")
}

pub fn fixture(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// Splits `total` into `n` integer parts differing by at most one.
fn spread(total: u64, n: u64) -> impl Iterator<Item = u64> {
    let (base, extra) = (total / n, total % n);
    (0..n).map(move |i| base + u64::from(i < extra))
}

fn candidate(len: u64, pass: bool, verdict: Verdict) -> CandidateSegment {
    CandidateSegment {
        start: Timecode(0),
        end: Timecode(len),
        subtitle_ids: Vec::new(),
        char_count: 10,
        secs_per_char: len as f64 / 10_000.0,
        music_overlap_ratio: if pass { 0.8 } else { 0.1 },
        smad_pass: pass,
        verdict,
    }
}

/// A corpus with the published counts: 220 episodes totalling 94.28 h,
/// 1,798 candidates (45.73 h), 1,400 passing the music filter (42.67 h),
/// 841 confirmed (35.68 h, 22.47 s to 1,352.10 s).
pub fn published_corpus() -> Vec<EpisodeManifest> {
    const H: u64 = 3_600_000;
    let total_ms = 9428 * H / 100;
    let filtered_ms = 4267 * H / 100;
    let confirmed_ms = 3568 * H / 100;
    let candidate_ms = 4573 * H / 100;
    let (shortest, longest) = (22_470, 1_352_100);

    let mut cands = vec![candidate(longest, true, Verdict::Singing), candidate(shortest, true, Verdict::Singing)];
    cands.extend(spread(confirmed_ms - shortest - longest, 839).map(|l| candidate(l, true, Verdict::Singing)));
    cands.extend(spread(filtered_ms - confirmed_ms, 559).map(|l| candidate(l, true, Verdict::NotSinging)));
    cands.extend(spread(candidate_ms - filtered_ms, 398).map(|l| candidate(l, false, Verdict::Unreviewed)));

    let mut eps: Vec<EpisodeManifest> = spread(total_ms, 220)
        .enumerate()
        .map(|(i, t)| EpisodeManifest { episode_id: format!("ep{i:03}"), total_ms: t, candidates: Vec::new() })
        .collect();
    // lay candidates end to end, each into the episode with the most room left
    let mut used = vec![0u64; eps.len()];
    for mut c in cands {
        let len = c.duration_ms();
        let i = (0..eps.len()).max_by_key(|&i| (eps[i].total_ms - used[i], std::cmp::Reverse(i))).unwrap();
        assert!(eps[i].total_ms - used[i] >= len);
        c.start = Timecode(used[i]);
        c.end = Timecode(used[i] + len);
        used[i] += len;
        eps[i].candidates.push(c);
    }
    eps
}

/// Edit distances from `a` to every string over `alphabet` of length at
/// most `max_len`, by breadth-first search over single-character edits.
pub fn bfs_distances(a: &[char], alphabet: &[char], max_len: usize) -> HashMap<Vec<char>, usize> {
    let mut seen: HashMap<Vec<char>, usize> = HashMap::from([(a.to_vec(), 0)]);
    let mut queue = VecDeque::from([a.to_vec()]);
    while let Some(s) = queue.pop_front() {
        let d = seen[&s];
        let mut next = Vec::new();
        for i in 0..=s.len() {
            if i < s.len() {
                let mut del = s.clone();
                del.remove(i);
                next.push(del);
                for &c in alphabet.iter().filter(|&&c| c != s[i]) {
                    let mut sub = s.clone();
                    sub[i] = c;
                    next.push(sub);
                }
            }
            if s.len() < max_len {
                for &c in alphabet {
                    let mut ins = s.clone();
                    ins.insert(i, c);
                    next.push(ins);
                }
            }
        }
        for n in next {
            if !seen.contains_key(&n) {
                seen.insert(n.clone(), d + 1);
                queue.push_back(n);
            }
        }
    }
    seen
}

/// Edit distance by the textbook recursion, memoized on suffix positions.
pub fn recursive_distance(a: &[char], b: &[char]) -> usize {
    fn go(a: &[char], b: &[char], i: usize, j: usize, memo: &mut HashMap<(usize, usize), usize>) -> usize {
        if i == a.len() {
            return b.len() - j;
        }
        if j == b.len() {
            return a.len() - i;
        }
        if let Some(&d) = memo.get(&(i, j)) {
            return d;
        }
        let d = if a[i] == b[j] {
            go(a, b, i + 1, j + 1, memo)
        } else {
            1 + go(a, b, i + 1, j, memo).min(go(a, b, i, j + 1, memo)).min(go(a, b, i + 1, j + 1, memo))
        };
        memo.insert((i, j), d);
        d
    }
    go(a, b, 0, 0, &mut HashMap::new())
}

/// All strings over `alphabet` of length at most `max_len`.
pub fn all_strings(alphabet: &[char], max_len: usize) -> Vec<Vec<char>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|s: &Vec<char>| {
                alphabet.iter().map(move |&c| {
                    let mut t = s.clone();
                    t.push(c);
                    t
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

/// Fraction of a candidate covered by music, counted one millisecond at a time.
pub fn brute_music_overlap(start: u64, end: u64, track: &[LabeledInterval]) -> f64 {
    if end <= start {
        return 0.0;
    }
    let covered = (start..end)
        .filter(|&t| track.iter().any(|i| i.label == Label::Music && i.start.0 <= t && t < i.end.0))
        .count();
    covered as f64 / (end - start) as f64
}
