mod common;

use std::fs;

use common::{fixture, published_corpus, subforge};
use subforge::files;
use subforge_core::miner::Verdict;
use subforge_core::project::Project;
use subforge_core::{Label, LabeledInterval, PipelineConfig, SegmentId, Status, SubtitleSegment, Timecode};

fn ok(out: &std::process::Output) {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

fn s(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn consolidate_fixture_into_project_and_srt() {
    let dir = tempfile::tempdir().unwrap();
    let project = dir.path().join("two.project.json");
    let srt = dir.path().join("two.srt");
    let det = fixture("two_lines.det.jsonl");
    let out = subforge(&["consolidate", "--detections", s(&det), "--out-project", s(&project), "--out-srt", s(&srt)]);
    ok(&out);

    let p = files::load_project(&project).unwrap();
    assert_eq!(p.episode_id, "two_lines");
    let got: Vec<_> = p.segments.iter().map(|s| (s.id.0.as_str(), s.text.as_str(), s.start.0, s.end.0, s.conf)).collect();
    assert_eq!(got, [("t0", "AB CD", 0, 1000, 0.9), ("t1000", "WXYZ", 1000, 2000, 0.8)]);
    assert_eq!(
        fs::read_to_string(&srt).unwrap(),
        "1\n00:00:00,000 --> 00:00:01,000\nAB CD\n\n2\n00:00:01,000 --> 00:00:02,000\nWXYZ\n\n"
    );

    let again = dir.path().join("again.srt");
    ok(&subforge(&["export-srt", "--project", s(&project), "--out", s(&again)]));
    assert_eq!(fs::read(&again).unwrap(), fs::read(&srt).unwrap());
}

#[test]
fn update_keeps_manual_segments() {
    let dir = tempfile::tempdir().unwrap();
    let project = dir.path().join("ep.project.json");
    let det = fixture("two_lines.det.jsonl");
    ok(&subforge(&["consolidate", "--detections", s(&det), "--out-project", s(&project)]));
    let mut p = files::load_project(&project).unwrap();
    let rev = p.revision;
    p.patch_segment(
        &SegmentId("t1000".into()),
        &subforge_core::project::SegmentPatch { text: Some("修正".into()), ..Default::default() },
        rev,
    )
    .unwrap();
    files::save_project(&project, &p).unwrap();

    ok(&subforge(&["consolidate", "--detections", s(&det), "--out-project", s(&project), "--update"]));
    let q = files::load_project(&project).unwrap();
    let texts: Vec<_> = q.segments.iter().map(|s| (s.text.as_str(), s.status)).collect();
    assert_eq!(texts, [("AB CD", Status::Auto), ("修正", Status::Edited)]);
    assert_eq!(q.revision, rev + 2);
}

#[test]
fn config_file_changes_the_gate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("strict.toml");
    // the "WXYZ" line is read at 0.8 and no longer passes
    fs::write(&cfg, "conf_gate = 0.85\n").unwrap();
    let project = dir.path().join("ep.project.json");
    let det = fixture("two_lines.det.jsonl");
    ok(&subforge(&["consolidate", "--detections", s(&det), "--config", s(&cfg), "--out-project", s(&project)]));
    let p = files::load_project(&project).unwrap();
    assert_eq!(p.segments.len(), 1);
    assert_eq!(p.config.conf_gate, 0.85);

    fs::write(&cfg, "conf_gate = 2.0\n").unwrap();
    let out = subforge(&["consolidate", "--detections", s(&det), "--config", s(&cfg), "--out-project", s(&project)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("conf_gate"));
}

fn seg(text: &str, start: u64, end: u64) -> SubtitleSegment {
    SubtitleSegment {
        id: SegmentId::for_start(Timecode(start)),
        text: text.into(),
        start: Timecode(start),
        end: Timecode(end),
        conf: 0.9,
        status: Status::Auto,
    }
}

#[test]
fn mine_builds_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let project = dir.path().join("ep.project.json");
    let mut p = Project::new("ep", PipelineConfig::default());
    p.segments = vec![seg("ABCD", 0, 2000), seg("EFGH", 2500, 4500), seg("IJKL", 10_000, 10_500)];
    files::save_project(&project, &p).unwrap();
    let smad = dir.path().join("ep.smad.json");
    let track = [LabeledInterval::new(0, 3000, Label::Music), LabeledInterval::new(3000, 12_000, Label::Speech)];
    fs::write(&smad, files::write_smad(&track)).unwrap();
    let manifest = dir.path().join("ep.manifest.json");

    ok(&subforge(&["mine", "--project", s(&project), "--smad", s(&smad), "--out-manifest", s(&manifest)]));
    let m = files::load(&manifest, files::read_manifest).unwrap();
    assert_eq!(m.total_ms, 12_000);
    assert_eq!(m.candidates.len(), 1);
    let c = &m.candidates[0];
    assert_eq!((c.start.0, c.end.0, c.char_count), (0, 4500, 8));
    assert_eq!(c.subtitle_ids, [SegmentId("t0".into()), SegmentId("t2500".into())]);
    assert!((c.music_overlap_ratio - 3000.0 / 4500.0).abs() < 1e-12);
    assert!(c.smad_pass);
    assert_eq!(c.verdict, Verdict::Unreviewed);
}

#[test]
fn stats_over_published_counts() {
    let dir = tempfile::tempdir().unwrap();
    for m in published_corpus() {
        fs::write(dir.path().join(format!("{}.manifest.json", m.episode_id)), files::write_manifest(&m)).unwrap();
    }
    fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
    let json = dir.path().join("stats.json");
    let out = subforge(&["stats", "--manifests", s(dir.path()), "--json", s(&json)]);
    ok(&out);
    let text = String::from_utf8(out.stdout).unwrap();
    for line in [
        "episodes 220",
        "total 94.28 h",
        "candidates 1798 (45.73 h)",
        "reduction 51.5%",
        "filtered 1400 (42.67 h)",
        "confirmed 841 (35.68 h)",
        "precision 60.1%",
        "segments/episode 6.4",
        "confirmed length 22.47 - 1352.10 s",
    ] {
        assert!(text.lines().any(|l| l == line), "missing {line:?} in\n{text}");
    }
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["confirmed_count"], 841);
}

#[test]
fn stats_on_empty_directory_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = subforge(&["stats", "--manifests", s(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn synth_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let report = dir.path().join(name);
        let args = ["synth", "--seed", "42", "--char-sub-prob", "0.05", "--dropout-prob", "0.05", "--report", s(&report)];
        ok(&subforge(&args));
        fs::read_to_string(report).unwrap()
    };
    let a = run("a.txt");
    assert_eq!(a, run("b.txt"));
    assert!(a.starts_with("generator "));
    assert!(a.contains("[seed 42]"));
}

#[test]
fn synth_out_dir_feeds_consolidate() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.txt");
    ok(&subforge(&["synth", "--seed", "7", "--report", s(&report), "--out-dir", s(dir.path())]));
    let project = dir.path().join("synth-7.project.json");
    let srt = dir.path().join("synth-7.srt");
    let det = dir.path().join("synth-7.det.jsonl");
    ok(&subforge(&["consolidate", "--detections", s(&det), "--out-project", s(&project), "--out-srt", s(&srt)]));
    // noiseless synthetic detections reproduce the truth exactly
    assert_eq!(fs::read(&srt).unwrap(), fs::read(dir.path().join("synth-7.truth.srt")).unwrap());
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(subforge(&["consolidate", "--bogus"]).status.code(), Some(1));
    assert_eq!(subforge(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(subforge(&["--help"]).status.code(), Some(0));
    let out = subforge(&["export-srt", "--project", "/no/such.project.json", "--out", "/tmp/x.srt"]);
    assert_eq!(out.status.code(), Some(1));
}
