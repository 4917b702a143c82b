use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use basedet::dice::{modified_dice, DiceMaskSpec};
use basedet::eval::{evaluate, EvalParams};
use basedet::formats::{
    format_polylines, format_properties, parse_polylines, parse_properties, parse_synth_spec, read_text,
    write_atomic,
};
use basedet::netspec::{compute_shapes, count_aux_heads, count_parameters, format_machine, format_table, NetSpec};
use basedet::pipeline::{detect, ClassifierSource, DetectConfig, MapSource, OracleNoise, OracleSource};
use basedet::{generate_page, pgm, Polyline};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "basedet", version, about = "Baseline detection for document images")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect poly-baselines on a page image.
    #[command(long_about = DETECT_HELP)]
    Detect(DetectArgs),
    /// Score predicted baselines against groundtruth.
    Eval(EvalArgs),
    /// Render a synthetic page with groundtruth.
    #[command(long_about = SYNTH_HELP)]
    Synth(SynthArgs),
    /// Print the layer shapes of a network description.
    Netspec(NetspecArgs),
    /// Modified dice coefficient of a prediction against groundtruth.
    Dice(DiceArgs),
}

const DETECT_HELP: &str = "\
Detect poly-baselines on a page image.

The properties file holds key=value lines, each value in [0, 1]:
  spac   large leading
  dblp   double page
  lnds   landscape orientation
  notxt  no text
Without --props, props.txt next to the image is used when present.

Polyline files (--gt, --regions, --out, --regions-out) hold one polyline per
line as x1,y1;x2,y2;... in page pixel coordinates.

The oracle classifier derives predictions from --gt (default: baselines.txt
next to the image) and, when --regions is given, runs the region pass on
region groundtruth. The file classifier reads --prob-map (a PGM of baseline
probabilities at page resolution) and filters by --regions directly.";

const SYNTH_HELP: &str = "\
Render a synthetic page with groundtruth.

The spec file holds key=value lines; missing keys take their defaults:
  page_w       page width in pixels (1600)
  page_h       page height in pixels (2000)
  n_lines      number of text lines (24)
  leading      baseline spacing in pixels (60)
  skew         maximum rotation in degrees (1)
  columns      1 or 2 (1)
  margin_text  true to add marginal notes (false)
  seed         random seed (1)

Writes page.pgm, baselines.txt, regions.txt and props.txt into --out.";

#[derive(Clone, Copy, ValueEnum)]
enum ClassifierKind {
    Oracle,
    File,
}

#[derive(clap::Args)]
struct DetectArgs {
    #[arg(long)]
    image: PathBuf,
    #[arg(long)]
    props: Option<PathBuf>,
    /// Region polygons.
    #[arg(long)]
    regions: Option<PathBuf>,
    /// Write the region polygons used for filtering.
    #[arg(long)]
    regions_out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "oracle")]
    classifier: ClassifierKind,
    /// Baseline groundtruth for the oracle classifier.
    #[arg(long)]
    gt: Option<PathBuf>,
    /// Baseline probability map for the file classifier.
    #[arg(long)]
    prob_map: Option<PathBuf>,
    /// Oracle noise seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Probability of flipping an oracle emission.
    #[arg(long, default_value_t = 0.0)]
    flip_rate: f64,
    /// Oracle emission on groundtruth foreground.
    #[arg(long, default_value_t = 1.0)]
    p_fg: f64,
    /// Oracle emission on groundtruth background.
    #[arg(long, default_value_t = 0.0)]
    p_bg: f64,
    /// Directory for thresholded mask PGMs.
    #[arg(long)]
    dump_masks: Option<PathBuf>,
    /// Classify windows on one thread.
    #[arg(long)]
    serial: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct EvalArgs {
    #[arg(long)]
    gt: PathBuf,
    #[arg(long)]
    pred: PathBuf,
    /// Coverage distance in pixels.
    #[arg(long, default_value_t = 20.0)]
    tolerance: f64,
    /// Covered fraction needed to count a groundtruth line as matched.
    #[arg(long, default_value_t = 0.75)]
    ttf: f64,
    /// Arc-length sampling step in pixels.
    #[arg(long, default_value_t = 1.0)]
    step: f64,
}

#[derive(clap::Args)]
struct SynthArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum NetKind {
    Da,
    Bl,
}

#[derive(clap::Args)]
struct NetspecArgs {
    #[arg(long, value_enum)]
    net: NetKind,
}

#[derive(clap::Args)]
struct DiceArgs {
    /// Prediction PGM.
    #[arg(long)]
    h: PathBuf,
    /// Groundtruth PGM.
    #[arg(long)]
    y: PathBuf,
    /// Inner mask bounds `a,b` (1-based, inclusive).
    #[arg(long, value_parser = parse_pair)]
    inner: (usize, usize),
    /// Surrounding mask bounds `a,b`.
    #[arg(long, value_parser = parse_pair)]
    outer: (usize, usize),
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected a,b")?;
    let num = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("`{t}`: {e}"));
    Ok((num(a)?, num(b)?))
}

/// A failure and the process exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Self {
            code: 1,
            error: e.into(),
        }
    }
}

fn usage(error: anyhow::Error) -> Failure {
    Failure { code: 2, error }
}

fn read_polylines(path: &Path) -> anyhow::Result<Vec<Polyline>> {
    let text = read_text(path)?;
    parse_polylines(&text).with_context(|| path.display().to_string())
}

fn sibling(image: &Path, name: &str) -> PathBuf {
    image.parent().unwrap_or(Path::new(".")).join(name)
}

fn run_detect(args: DetectArgs) -> Result<(), Failure> {
    let props_path = match &args.props {
        Some(p) => p.clone(),
        None => {
            let fallback = sibling(&args.image, "props.txt");
            if !fallback.is_file() {
                return Err(usage(anyhow!("no document properties: pass --props <file>")));
            }
            fallback
        }
    };
    let gt_path = match args.classifier {
        ClassifierKind::Oracle => Some(args.gt.clone().unwrap_or_else(|| sibling(&args.image, "baselines.txt"))),
        ClassifierKind::File => None,
    };
    if matches!(args.classifier, ClassifierKind::File) && args.prob_map.is_none() {
        return Err(usage(anyhow!("--classifier file needs --prob-map <pgm>")));
    }

    let props = read_text(&props_path)
        .map_err(anyhow::Error::from)
        .and_then(|t| parse_properties(&t).with_context(|| props_path.display().to_string()))
        .map_err(usage)?;
    let image = pgm::read(&args.image)?;
    let regions = args.regions.as_deref().map(read_polylines).transpose()?;

    let source: Box<dyn ClassifierSource> = match args.classifier {
        ClassifierKind::Oracle => Box::new(OracleSource {
            baselines: read_polylines(gt_path.as_deref().expect("oracle has a groundtruth path"))?,
            regions: regions.clone(),
            noise: OracleNoise {
                p_fg: args.p_fg,
                p_bg: args.p_bg,
                flip_rate: args.flip_rate,
                seed: args.seed,
            },
        }),
        ClassifierKind::File => {
            let map = pgm::read(args.prob_map.as_deref().expect("checked above"))?;
            if (map.width(), map.height()) != (image.width(), image.height()) {
                return Err(anyhow!(
                    "probability map is {}x{}, image is {}x{}",
                    map.width(),
                    map.height(),
                    image.width(),
                    image.height()
                )
                .into());
            }
            Box::new(MapSource {
                baseline_map: map,
                region_map: None,
            })
        }
    };
    let direct_regions = match args.classifier {
        ClassifierKind::Oracle => None,
        ClassifierKind::File => regions.as_deref(),
    };
    let cfg = DetectConfig {
        parallel: !args.serial,
        ..DetectConfig::default()
    };
    let det = detect(&image, &props, source.as_ref(), direct_regions, &cfg)?;

    if let Some(dir) = &args.dump_masks {
        fs::create_dir_all(dir).with_context(|| dir.display().to_string())?;
        write_atomic(&dir.join("baseline_mask.pgm"), &pgm::encode(&det.baseline_mask))?;
        if let Some(mask) = &det.region_mask {
            write_atomic(&dir.join("region_mask.pgm"), &pgm::encode(mask))?;
        }
    }
    if let Some(path) = &args.regions_out {
        let polys = det.regions.as_deref().unwrap_or(&[]);
        write_atomic(path, format_polylines(polys).as_bytes())?;
    }
    write_atomic(&args.out, format_polylines(&det.baselines).as_bytes())?;
    Ok(())
}

fn run_eval(args: EvalArgs) -> Result<(), Failure> {
    let gt = read_polylines(&args.gt)?;
    let pred = read_polylines(&args.pred)?;
    let params = EvalParams {
        tolerance: args.tolerance,
        t_tf: args.ttf,
        sample_step: args.step,
    };
    params.validate().map_err(|e| usage(e.into()))?;
    let report = evaluate(&gt, &pred, &params)?;
    println!("{report}");
    println!("{}", report.machine_line());
    Ok(())
}

fn run_synth(args: SynthArgs) -> Result<(), Failure> {
    let text = read_text(&args.spec)?;
    let spec = parse_synth_spec(&text).with_context(|| args.spec.display().to_string())?;
    let page = generate_page(&spec)?;
    fs::create_dir_all(&args.out).with_context(|| args.out.display().to_string())?;
    let files: [(&str, Vec<u8>); 4] = [
        ("page.pgm", pgm::encode(&page.image)),
        ("baselines.txt", format_polylines(&page.baselines).into_bytes()),
        ("regions.txt", format_polylines(&page.regions).into_bytes()),
        ("props.txt", format_properties(&page.props).into_bytes()),
    ];
    for (name, data) in files {
        write_atomic(&args.out.join(name), &data)?;
    }
    Ok(())
}

fn run_netspec(args: NetspecArgs) -> Result<(), Failure> {
    let net = match args.net {
        NetKind::Da => NetSpec::da(),
        NetKind::Bl => NetSpec::bl(),
    };
    let stages = compute_shapes(&net)?;
    print!("{}", format_table(&stages));
    println!("aux heads  {:>6}", count_aux_heads(&net));
    println!("parameters {:>6}", count_parameters(&net));
    println!();
    print!("{}", format_machine(&stages));
    Ok(())
}

fn run_dice(args: DiceArgs) -> Result<(), Failure> {
    let h = pgm::read(&args.h)?;
    let y = pgm::read(&args.y)?;
    if h.width() != h.height() {
        return Err(anyhow!("prediction must be square, got {}x{}", h.width(), h.height()).into());
    }
    let spec = DiceMaskSpec::new(h.width(), args.inner, args.outer, args.gamma).map_err(|e| usage(e.into()))?;
    let d = modified_dice(&h, &y, &spec)?;
    println!("D    {d:.6}");
    println!("1-D  {:.6}", 1.0 - d);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Detect(a) => run_detect(a),
        Command::Eval(a) => run_eval(a),
        Command::Synth(a) => run_synth(a),
        Command::Netspec(a) => run_netspec(a),
        Command::Dice(a) => run_dice(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
