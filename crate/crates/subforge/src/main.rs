use std::fs;
use std::io::{BufReader, Write};
use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use subforge::config::resolve_config;
use subforge::detections::{lines_as_detections, parse_detections, write_detections};
use subforge::files::{self, write_atomic};
use subforge::service::{serve, ServeOptions};
use subforge::{srt, Error};
use subforge_core::miner::{compute_stats, mine_episode, EpisodeManifest};
use subforge_core::project::{extract_segments, Project};
use subforge_core::synth::{evaluate, generate_episode, EpisodeParams, EvalReport, NoiseModel, GENERATOR_NAME};
use subforge_core::{consolidate_stream, BBox, SubtitleSegment};

/// Burned-in subtitle consolidation and singing-segment mining.
#[derive(Debug, Parser)]
#[command(name = "subforge", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Turn an OCR detections file into a project (and optionally an SRT).
    Consolidate(ConsolidateArgs),
    /// Build singing candidates from a project and an activity track.
    Mine(MineArgs),
    /// Aggregate corpus statistics over a directory of manifests.
    Stats(StatsArgs),
    /// Generate a synthetic episode, consolidate it and score the result.
    Synth(SynthArgs),
    /// Run the correction service for one project.
    Serve(ServeArgs),
    /// Write the live segments of a project as SRT.
    ExportSrt(ExportArgs),
}

#[derive(Debug, Args)]
struct ConsolidateArgs {
    #[arg(long)]
    detections: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out_project: PathBuf,
    #[arg(long)]
    out_srt: Option<PathBuf>,
    /// Defaults to the detections file name without its extensions.
    #[arg(long)]
    episode_id: Option<String>,
    /// Re-run into an existing project, keeping manually edited segments.
    #[arg(long)]
    update: bool,
}

#[derive(Debug, Args)]
struct MineArgs {
    #[arg(long)]
    project: PathBuf,
    #[arg(long)]
    smad: PathBuf,
    #[arg(long)]
    out_manifest: PathBuf,
    /// Overrides the project's configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Episode length; defaults to the latest subtitle or interval end.
    #[arg(long)]
    total_ms: Option<u64>,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[arg(long)]
    manifests: PathBuf,
    /// Also write the statistics as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of consecutive seeds to run, starting at --seed.
    #[arg(long, default_value_t = 1)]
    runs: u64,
    #[arg(long, default_value_t = 0.0)]
    char_sub_prob: f64,
    #[arg(long, default_value_t = 0.0)]
    dropout_prob: f64,
    #[arg(long, default_value_t = 0.0)]
    ghost_prob: f64,
    #[arg(long, default_value_t = 0.9)]
    conf_true: f64,
    #[arg(long, default_value_t = 0.3)]
    conf_noise: f64,
    #[arg(long)]
    duration_ms: Option<u64>,
    #[arg(long)]
    lines: Option<usize>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    report: PathBuf,
    /// Write truth SRT, activity track and detections for the first run here.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long)]
    project: PathBuf,
    #[arg(long)]
    media: Option<PathBuf>,
    /// Command template printing one image, e.g. "ffmpeg -ss {t_s} -i {media} -frames:v 1 -f image2 -c png -".
    #[arg(long)]
    frame_cmd: Option<String>,
    #[arg(long, default_value_t = 8765)]
    port: u16,
    #[arg(long, default_value_t = IpAddr::V4(Ipv4Addr::LOCALHOST))]
    bind: IpAddr,
    /// Static editor assets served at `/`.
    #[arg(long)]
    ui_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExportArgs {
    #[arg(long)]
    project: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn episode_id_from(path: &Path) -> String {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    name.split('.').next().filter(|s| !s.is_empty()).unwrap_or("episode").to_string()
}

fn write_srt_file(path: &Path, segments: &[SubtitleSegment]) -> Result<(), Error> {
    let live: Vec<SubtitleSegment> =
        segments.iter().filter(|s| s.status != subforge_core::Status::Deleted).cloned().collect();
    let doc = srt::write_srt(&live).map_err(|source| Error::Srt { path: path.to_path_buf(), source })?;
    write_atomic(path, doc.as_bytes())
}

fn consolidate(args: ConsolidateArgs) -> Result<(), Error> {
    let cfg = resolve_config(args.config.as_deref())?;
    let file = fs::File::open(&args.detections).map_err(|e| Error::io(&args.detections, e))?;
    let frames = parse_detections(BufReader::new(file))
        .map_err(|source| Error::Detections { path: args.detections.clone(), source })?;
    let mut project = if args.update && args.out_project.exists() {
        let mut p = files::load_project(&args.out_project)?;
        p.config = cfg;
        p
    } else {
        let id = args.episode_id.clone().unwrap_or_else(|| episode_id_from(&args.detections));
        Project::new(id, cfg)
    };
    let autos = extract_segments(&frames, &project.config)?;
    project.replace_auto_segments(autos);
    files::save_project(&args.out_project, &project)?;
    if let Some(srt_path) = &args.out_srt {
        write_srt_file(srt_path, &project.segments)?;
    }
    eprintln!("{} segments from {} frames", project.live_segments().count(), frames.len());
    Ok(())
}

fn mine(args: MineArgs) -> Result<(), Error> {
    let project = files::load_project(&args.project)?;
    let cfg = match &args.config {
        Some(p) => resolve_config(Some(p))?,
        None => project.config.clone(),
    };
    let track = files::load(&args.smad, files::read_smad)?;
    let total_ms = args.total_ms.unwrap_or_else(|| {
        let seg_end = project.segments.iter().map(|s| s.end.0).max().unwrap_or(0);
        let track_end = track.iter().map(|i| i.end.0).max().unwrap_or(0);
        seg_end.max(track_end)
    });
    let live: Vec<SubtitleSegment> = project.live_segments().cloned().collect();
    let manifest = mine_episode(project.episode_id.clone(), total_ms, &live, &track, &cfg);
    write_atomic(&args.out_manifest, files::write_manifest(&manifest).as_bytes())?;
    let kept = manifest.candidates.iter().filter(|c| c.smad_pass).count();
    eprintln!("{} candidates, {} pass the music-overlap filter", manifest.candidates.len(), kept);
    Ok(())
}

fn stats(args: StatsArgs) -> Result<(), Error> {
    let entries = fs::read_dir(&args.manifests).map_err(|e| Error::io(&args.manifests, e))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.file_name().is_some_and(|n| n.to_string_lossy().ends_with(".manifest.json")))
        .collect();
    paths.sort();
    let mut manifests: Vec<EpisodeManifest> =
        paths.iter().map(|p| files::load(p, files::read_manifest)).collect::<Result<_, _>>()?;
    manifests.sort_by(|a, b| a.episode_id.cmp(&b.episode_id));
    let stats = compute_stats(&manifests)?;
    print!("{}", stats.report());
    if let Some(json) = &args.json {
        write_atomic(json, files::write_stats(&stats).as_bytes())?;
    }
    Ok(())
}

fn synth(args: SynthArgs) -> Result<(), Error> {
    let cfg = resolve_config(args.config.as_deref())?;
    let mut params = EpisodeParams { sampling_period_ms: cfg.sampling_period_ms, ..EpisodeParams::default() };
    if let Some(d) = args.duration_ms {
        params.duration_ms = d;
    }
    if let Some(n) = args.lines {
        params.line_count = n;
    }
    if args.runs == 0 {
        return Err(Error::Usage("--runs must be at least 1".into()));
    }
    let mut report = String::new();
    report.push_str(&format!("generator {GENERATOR_NAME}\n"));
    report.push_str(&format!(
        "noise char_sub_prob={} dropout_prob={} ghost_prob={} conf_true={} conf_noise={}\n",
        args.char_sub_prob, args.dropout_prob, args.ghost_prob, args.conf_true, args.conf_noise
    ));
    report.push_str(&format!("episode duration_ms={} lines={}\n", params.duration_ms, params.line_count));
    let mut reports: Vec<EvalReport> = Vec::new();
    for seed in args.seed..args.seed + args.runs {
        let noise = NoiseModel {
            seed,
            char_sub_prob: args.char_sub_prob,
            dropout_prob: args.dropout_prob,
            ghost_prob: args.ghost_prob,
            conf_mean_true: args.conf_true,
            conf_mean_noise: args.conf_noise,
        };
        let ep = generate_episode(&params, &noise)?;
        let recovered = consolidate_stream(&ep.stream, &cfg)?;
        let r = evaluate(&ep.truth, &recovered);
        report.push_str(&format!("\n[seed {seed}]\n{r}"));
        if seed == args.seed {
            if let Some(dir) = &args.out_dir {
                fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
                write_srt_file(&dir.join(format!("synth-{seed}.truth.srt")), &ep.truth)?;
                write_atomic(&dir.join(format!("synth-{seed}.smad.json")), files::write_smad(&ep.track).as_bytes())?;
                let roi = cfg.roi;
                let bbox = BBox::new(
                    roi.x0 + (roi.x1 - roi.x0) * 0.05,
                    roi.y0 + (roi.y1 - roi.y0) * 0.25,
                    roi.x1 - (roi.x1 - roi.x0) * 0.05,
                    roi.y1 - (roi.y1 - roi.y0) * 0.25,
                );
                let mut buf = Vec::new();
                write_detections(&lines_as_detections(&ep.stream, bbox), &mut buf)
                    .map_err(|e| Error::Internal(e.to_string()))?;
                write_atomic(&dir.join(format!("synth-{seed}.det.jsonl")), &buf)?;
            }
        }
        reports.push(r);
    }
    if reports.len() > 1 {
        let n = reports.len() as f64;
        let mean = |f: fn(&EvalReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
        report.push_str(&format!(
            "\n[mean over {} seeds]\nsegment_recall {:.4}\nsegment_precision {:.4}\ntext_exact_rate {:.4}\nmean_boundary_error_ms {:.1}\n",
            reports.len(),
            mean(|r| r.segment_recall),
            mean(|r| r.segment_precision),
            mean(|r| r.text_exact_rate),
            mean(|r| r.mean_boundary_error_ms),
        ));
    }
    write_atomic(&args.report, report.as_bytes())
}

fn export_srt(args: ExportArgs) -> Result<(), Error> {
    let project = files::load_project(&args.project)?;
    write_srt_file(&args.out, &project.segments)
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Consolidate(a) => consolidate(a),
        Command::Mine(a) => mine(a),
        Command::Stats(a) => stats(a),
        Command::Synth(a) => synth(a),
        Command::ExportSrt(a) => export_srt(a),
        Command::Serve(a) => {
            let rt = tokio::runtime::Runtime::new().map_err(|e| Error::Internal(e.to_string()))?;
            rt.block_on(serve(ServeOptions {
                project: a.project,
                media: a.media,
                frame_cmd: a.frame_cmd,
                addr: SocketAddr::new(a.bind, a.port),
                ui_dir: a.ui_dir,
            }))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => {
            let _ = std::io::stdout().flush();
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
