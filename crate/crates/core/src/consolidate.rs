//! Temporal merging of per-frame subtitle lines into stable segments.

use alloc::string::String;
use alloc::vec::Vec;

use crate::domain::{PipelineConfig, SegmentId, Status, SubtitleSegment, Timecode};
use crate::ocr::FrameLine;

/// Levenshtein distance over Unicode scalar values with unit costs.
pub fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();

    let prefix = a.iter().zip(&b).take_while(|(x, y)| x == y).count();
    let (a, b) = (&a[prefix..], &b[prefix..]);
    let suffix = a.iter().rev().zip(b.iter().rev()).take_while(|(x, y)| x == y).count();
    let (a, b) = (&a[..a.len() - suffix], &b[..b.len() - suffix]);

    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if short.is_empty() {
        return long.len();
    }

    let mut row: Vec<usize> = (0..=short.len()).collect();
    for (i, lc) in long.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, sc) in short.iter().enumerate() {
            let above = row[j + 1];
            let cost = usize::from(lc != sc);
            row[j + 1] = (diag + cost).min(above + 1).min(row[j] + 1);
            diag = above;
        }
    }
    row[short.len()]
}

/// Removes denied characters, collapses whitespace runs and trims.
pub fn strip_denylist(s: &str, cfg: &PipelineConfig) -> String {
    let kept: String = s.chars().filter(|c| !cfg.denylist.contains(c)).collect();
    let mut out = String::with_capacity(kept.len());
    for word in kept.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Text with end-anchored ellipses removed. Interior ellipses are kept.
pub fn base_text<'a>(s: &'a str, cfg: &PipelineConfig) -> &'a str {
    let mut rest = s.trim();
    loop {
        let before = rest.len();
        for e in &cfg.ellipsis_set {
            while let Some(r) = rest.strip_prefix(e.as_str()) {
                rest = r.trim_start();
            }
            while let Some(r) = rest.strip_suffix(e.as_str()) {
                rest = r.trim_end();
            }
        }
        if rest.len() == before {
            return rest;
        }
    }
}

/// Length-conditioned similarity: the shorter string picks the class.
/// Up to 2 characters must match exactly, up to 6 may differ by one edit,
/// longer strings by two.
pub fn is_similar(a: &str, b: &str) -> bool {
    let shorter = a.chars().count().min(b.chars().count());
    match shorter {
        0..=2 => a == b,
        3..=6 => edit_distance(a, b) <= 1,
        _ => edit_distance(a, b) <= 2,
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConsolidateError {
    #[error("frame timestamps not increasing: {next} ms after {prev} ms")]
    NonMonotonic { prev: u64, next: u64 },
}

/// The segment currently being observed.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveRun {
    pub text: String,
    pub conf: f64,
    pub start: Timecode,
    pub last_seen: Timecode,
}

/// Streaming form of [`consolidate_stream`]: feed lines in timestamp order
/// with [`Consolidator::push`] and drain with [`Consolidator::finish`].
///
/// When dissimilar text displaces the active run, that run is held back
/// until the newcomer has itself lasted the retention threshold. A newcomer
/// that dies younger is a misreading: if the held run's text comes back it
/// resumes as though the misread frames were dropouts, otherwise the held run
/// is finalized and the newcomer discarded.
#[derive(Debug)]
pub struct Consolidator<'c> {
    cfg: &'c PipelineConfig,
    active: Option<ActiveRun>,
    /// Displaced run and the end it would get if finalized now.
    held: Option<(ActiveRun, Timecode)>,
    prev_t: Option<Timecode>,
    out: Vec<SubtitleSegment>,
}

impl<'c> Consolidator<'c> {
    pub fn new(cfg: &'c PipelineConfig) -> Self {
        Consolidator { cfg, active: None, held: None, prev_t: None, out: Vec::new() }
    }

    pub fn active(&self) -> Option<&ActiveRun> {
        self.active.as_ref()
    }

    pub fn emitted(&self) -> &[SubtitleSegment] {
        &self.out
    }

    fn end_of(&self, run: &ActiveRun) -> Timecode {
        run.last_seen.add_millis(self.cfg.sampling_period_ms)
    }

    fn is_retained(&self, run: &ActiveRun) -> bool {
        self.end_of(run) - run.start >= self.cfg.retention_t_ms
    }

    /// Stores `run` as a segment ending at `end` if it lasted long enough.
    fn finalize(&mut self, run: ActiveRun, end: Timecode) {
        if end - run.start >= self.cfg.retention_t_ms {
            self.out.push(SubtitleSegment {
                id: SegmentId::for_start(run.start),
                text: run.text,
                start: run.start,
                end,
                conf: run.conf,
                status: Status::Auto,
            });
        }
    }

    fn release_held(&mut self) {
        if let Some((run, end)) = self.held.take() {
            self.finalize(run, end);
        }
    }

    /// Ends the active run on silence or end of stream.
    fn close(&mut self) {
        let Some(run) = self.active.take() else { return };
        if self.held.is_some() {
            // the newcomer never reached the threshold
            self.release_held();
        } else {
            let end = self.end_of(&run);
            self.finalize(run, end);
        }
    }

    /// Applies the same-text and similar-text rules. Returns false when the
    /// text is dissimilar and nothing was changed.
    fn absorb(&self, run: &mut ActiveRun, text: &str, line: &FrameLine) -> bool {
        if base_text(text, self.cfg) == base_text(&run.text, self.cfg) {
            if text.chars().count() > run.text.chars().count() {
                run.text = String::from(text);
            }
        } else if is_similar(text, &run.text) {
            if line.conf > run.conf {
                run.text = String::from(text);
            }
        } else {
            return false;
        }
        run.conf = run.conf.max(line.conf);
        run.last_seen = line.t;
        true
    }

    pub fn push(&mut self, line: &FrameLine) -> Result<(), ConsolidateError> {
        if let Some(prev) = self.prev_t {
            if line.t <= prev {
                return Err(ConsolidateError::NonMonotonic { prev: prev.0, next: line.t.0 });
            }
        }
        self.prev_t = Some(line.t);

        let period = self.cfg.sampling_period_ms;
        let text = strip_denylist(&line.text, self.cfg);

        if text.is_empty() {
            // One blank frame is tolerated; a second one closes the run.
            if let Some(run) = &self.active {
                if line.t - run.last_seen > period {
                    self.close();
                }
            }
            return Ok(());
        }

        // Missing frames in a sparse stream count as blanks.
        if let Some(run) = &self.active {
            if line.t - run.last_seen > 2 * period {
                self.close();
            }
        }

        let fresh = ActiveRun { text: text.clone(), conf: line.conf, start: line.t, last_seen: line.t };
        let Some(mut run) = self.active.take() else {
            self.active = Some(fresh);
            return Ok(());
        };

        if self.absorb(&mut run, &text, line) {
            let settled = self.is_retained(&run);
            self.active = Some(run);
            if settled {
                self.release_held();
            }
            return Ok(());
        }

        match self.held.take() {
            Some((mut prior, end)) => {
                if self.absorb(&mut prior, &text, line) {
                    // misreading over, the displaced text is back
                    self.active = Some(prior);
                } else {
                    self.finalize(prior, end);
                    self.active = Some(fresh);
                }
            }
            None => {
                let end = self.end_of(&run).min(line.t);
                self.held = Some((run, end));
                self.active = Some(fresh);
                if self.active.as_ref().is_some_and(|r| self.is_retained(r)) {
                    self.release_held();
                }
            }
        }
        Ok(())
    }

    pub fn finish(mut self) -> Vec<SubtitleSegment> {
        self.close();
        self.out
    }
}

/// Folds a timestamp-ordered frame line stream into subtitle segments.
pub fn consolidate_stream(
    lines: &[FrameLine],
    cfg: &PipelineConfig,
) -> Result<Vec<SubtitleSegment>, ConsolidateError> {
    let mut c = Consolidator::new(cfg);
    for line in lines {
        c.push(line)?;
    }
    Ok(c.finish())
}
