//! Command-line front end. [`run`] parses arguments, dispatches and returns
//! the process exit code: 0 for success or a positive verdict, 1 for a
//! negative verdict, 2 for input or usage errors.

use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use parbundle::angle::{AngleFunction, DEFAULT_EPS_KIND};
use parbundle::bundle::{cut_bundle_check, CutReport, DEFAULT_EPS_TOL};
use parbundle::classify::{
    class_generator, classify, feasibility_chain, BundleClass, Orientation, DEFAULT_EPS_GEO,
    DEFAULT_SWEEPS,
};
use parbundle::geom::{BoundingBox, Vec2};
use parbundle::map::{parse_map, validate_map, MapGeometry, OrientedEdge};
use parbundle::svg::{render_map, render_trace, RenderStyle};
use parbundle::trace::{
    bundle_oracle, dump_paths, trace_family, FamilyTrace, Ray, RayFamily, TraceOptions,
    DEFAULT_MAX_CROSSINGS,
};
use parbundle::{edge_bundle_check, edge_profile, slope, Cut};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FALSE: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "parbundle",
    version,
    about = "Parallel bundle checks on planar maps with angle factors"
)]
struct Cli {
    /// Print only key=value lines.
    #[arg(long, global = true)]
    porcelain: bool,
    /// Verdict tolerance for slope and angle sums.
    #[arg(long, global = true, default_value_t = DEFAULT_EPS_TOL)]
    eps: f64,
    /// Tolerance for the elliptic / euclidean / hyperbolic split.
    #[arg(long = "eps-kind", global = true, default_value_t = DEFAULT_EPS_KIND)]
    eps_kind: f64,
    /// Geometric tolerance in length units.
    #[arg(long = "eps-geo", global = true, default_value_t = DEFAULT_EPS_GEO)]
    eps_geo: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the map for structural problems.
    Validate { file: PathBuf },
    /// Single-edge bundle check.
    EdgeCheck {
        file: PathBuf,
        #[arg(long)]
        edge: String,
        /// Traverse the edge from v to u.
        #[arg(long)]
        reverse: bool,
    },
    /// Prefix-sum bundle check on a declared cut.
    CutCheck {
        file: PathBuf,
        #[arg(long)]
        cut: String,
    },
    /// Sweep the map and report its bundle class.
    Classify {
        file: PathBuf,
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        orientation: Option<(f64, f64)>,
        #[arg(long, default_value_t = DEFAULT_SWEEPS)]
        sweeps: usize,
    },
    /// Trace a family of parallel rays and test it for intersections.
    Trace {
        file: PathBuf,
        #[command(flatten)]
        rays: TraceArgs,
        /// Write waypoints and crossing events to this file.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Write an SVG figure of the map, optionally with traced rays.
    Render {
        file: PathBuf,
        #[command(flatten)]
        rays: OptionalTraceArgs,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
        /// Label each vertex with its total angle.
        #[arg(long)]
        labels: bool,
    },
    /// Write a small map realizing a class code.
    GenClass {
        #[arg(long)]
        code: String,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
}

#[derive(Args, Debug)]
struct TraceArgs {
    #[arg(long)]
    rays: usize,
    #[arg(long)]
    spacing: f64,
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    origin: (f64, f64),
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    dir: (f64, f64),
    #[arg(long = "max-crossings", default_value_t = DEFAULT_MAX_CROSSINGS)]
    max_crossings: usize,
}

#[derive(Args, Debug)]
struct OptionalTraceArgs {
    #[arg(long, requires_all = ["spacing", "origin", "dir"])]
    rays: Option<usize>,
    #[arg(long)]
    spacing: Option<f64>,
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    origin: Option<(f64, f64)>,
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    dir: Option<(f64, f64)>,
    #[arg(long = "max-crossings", default_value_t = DEFAULT_MAX_CROSSINGS)]
    max_crossings: usize,
}

impl OptionalTraceArgs {
    fn resolve(&self) -> Option<TraceArgs> {
        Some(TraceArgs {
            rays: self.rays?,
            spacing: self.spacing?,
            origin: self.origin?,
            dir: self.dir?,
            max_crossings: self.max_crossings,
        })
    }
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected <a>,<b>, got `{s}`"))?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    Ok((num(a)?, num(b)?))
}

/// Error surfaced as exit code 2 with a one-line message.
struct Failure(String);

impl<E: Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type Outcome = Result<i32, Failure>;

/// Output sink that honours `--porcelain`.
struct Report<'a> {
    out: &'a mut dyn Write,
    porcelain: bool,
}

impl Report<'_> {
    fn kv(&mut self, key: &str, value: impl Display) {
        if self.porcelain {
            let _ = writeln!(self.out, "{key}={value}");
        }
    }

    fn human(&mut self, line: impl Display) {
        if !self.porcelain {
            let _ = writeln!(self.out, "{line}");
        }
    }
}

/// Runs the command line `args` (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return EXIT_OK;
            }
            let text = e.to_string();
            let line = text
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("usage error");
            let _ = writeln!(err, "{}", line.trim());
            return EXIT_ERROR;
        }
    };
    let mut report = Report {
        out,
        porcelain: cli.porcelain,
    };
    match dispatch(&cli, &mut report) {
        Ok(code) => code,
        Err(Failure(msg)) => {
            let _ = writeln!(err, "error: {}", msg.replace('\n', " "));
            EXIT_ERROR
        }
    }
}

fn load(path: &Path) -> Result<MapGeometry, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    parse_map(&text).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn check_tolerance(name: &str, v: f64) -> Result<(), Failure> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Failure(format!(
            "--{name} must be a finite nonnegative number"
        )))
    }
}

fn dispatch(cli: &Cli, r: &mut Report) -> Outcome {
    check_tolerance("eps", cli.eps)?;
    check_tolerance("eps-kind", cli.eps_kind)?;
    check_tolerance("eps-geo", cli.eps_geo)?;
    match &cli.command {
        Command::Validate { file } => validate(&load(file)?, r),
        Command::EdgeCheck {
            file,
            edge,
            reverse,
        } => edge_check(&load(file)?, edge, *reverse, cli.eps, r),
        Command::CutCheck { file, cut } => cut_check(&load(file)?, cut, cli.eps, r),
        Command::Classify {
            file,
            orientation,
            sweeps,
        } => classify_cmd(&load(file)?, *orientation, *sweeps, cli, r),
        Command::Trace { file, rays, dump } => {
            trace_cmd(&load(file)?, rays, dump.as_deref(), cli, r)
        }
        Command::Render {
            file,
            rays,
            output,
            labels,
        } => render_cmd(
            &load(file)?,
            rays.resolve().as_ref(),
            output,
            *labels,
            cli,
            r,
        ),
        Command::GenClass { code, output } => gen_class(code, output, r),
    }
}

fn validate(map: &MapGeometry, r: &mut Report) -> Outcome {
    let violations = validate_map(map);
    r.kv("valid", violations.is_empty());
    r.kv("violations", violations.len());
    for (i, v) in violations.iter().enumerate() {
        r.kv(
            &format!("violation.{}", i + 1),
            format!("{}: {v}", v.rule()),
        );
        r.human(format!("{}: {v}", v.rule()));
    }
    if violations.is_empty() {
        r.human("ok");
        Ok(EXIT_OK)
    } else {
        Ok(EXIT_FALSE)
    }
}

fn edge_check(map: &MapGeometry, id: &str, reverse: bool, eps: f64, r: &mut Report) -> Outcome {
    let idx = map
        .edge_idx(id)
        .ok_or_else(|| Failure(format!("unknown edge `{id}`")))?;
    let oe = if reverse {
        OrientedEdge::reverse(idx)
    } else {
        OrientedEdge::forward(idx)
    };
    let p = edge_profile(map, oe)?;
    let ok = edge_bundle_check(&p, eps);
    let label = map.oriented_label(oe);
    r.kv("edge", &label);
    r.kv("a", p.near());
    r.kv("b", p.far());
    r.kv("length", p.length());
    r.kv("slope", slope(&p));
    r.kv("bundle", ok);
    r.human(format!("edge {label}"));
    r.human(format!(
        "  a = {:.6}  b = {:.6}  d = {:.6}",
        p.near(),
        p.far(),
        p.length()
    ));
    r.human(format!("  slope = {:.6}", slope(&p)));
    r.human(format!("  bundle: {}", yes_no(ok)));
    Ok(verdict(ok))
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn verdict(b: bool) -> i32 {
    if b {
        EXIT_OK
    } else {
        EXIT_FALSE
    }
}

fn cut_check(map: &MapGeometry, id: &str, eps: f64, r: &mut Report) -> Outcome {
    let declared = map
        .declared_cut(id)
        .ok_or_else(|| Failure(format!("unknown cut `{id}`")))?;
    let cut = Cut::from_map(map, &declared.edges)?;
    let rep = cut_bundle_check(&cut, eps);
    let labels: Vec<String> = cut.edges().iter().map(|&e| map.oriented_label(e)).collect();
    r.kv("cut", id);
    r.kv("edges", labels.join(","));
    for (i, (s, p)) in rep.slopes.iter().zip(&rep.prefix_sums).enumerate() {
        r.kv(&format!("slope.{}", i + 1), s);
        r.kv(&format!("prefix.{}", i + 1), p);
    }
    write_cut_verdicts(&rep, r);

    r.human(format!("cut {id}"));
    r.human(format!(
        "{:>3}  {:<12} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "i", "edge", "a", "b", "d", "slope", "prefix"
    ));
    for (i, p) in cut.profiles().iter().enumerate() {
        r.human(format!(
            "{:>3}  {:<12} {:>10.6} {:>10.6} {:>10.6} {:>10.6} {:>10.6}",
            i + 1,
            labels[i],
            p.near(),
            p.far(),
            p.length(),
            rep.slopes[i],
            rep.prefix_sums[i]
        ));
    }
    r.human(format!("bundle: {}", yes_no(rep.is_bundle)));
    if let Some(i) = rep.first_violation {
        r.human(format!("first negative prefix sum at edge {}", i + 1));
    }
    r.human(format!("stays parallel: {}", yes_no(rep.stays_parallel)));
    r.human(format!(
        "parallels initial direction: {}",
        yes_no(rep.parallels_initial)
    ));
    Ok(verdict(rep.is_bundle))
}

fn write_cut_verdicts(rep: &CutReport, r: &mut Report) {
    r.kv("slope_sum", rep.slope_sum());
    r.kv("min_prefix", rep.min_prefix());
    r.kv(
        "first_violation",
        rep.first_violation
            .map_or("none".to_string(), |i| (i + 1).to_string()),
    );
    r.kv("bundle", rep.is_bundle);
    r.kv("stays_parallel", rep.stays_parallel);
    r.kv("parallels_initial", rep.parallels_initial);
}

fn orientation_for(map: &MapGeometry, flag: Option<(f64, f64)>) -> Result<Orientation, Failure> {
    let (dx, dy) = match (flag, map.default_orientation()) {
        (Some(pair), _) => pair,
        (None, Some(v)) => (v.x, v.y),
        (None, None) => return Err(Failure(
            "no orientation: pass --orientation <dx>,<dy> or add an orientation line to the map"
                .into(),
        )),
    };
    Ok(Orientation::new(dx, dy)?)
}

fn classify_cmd(
    map: &MapGeometry,
    flag: Option<(f64, f64)>,
    sweeps: usize,
    cli: &Cli,
    r: &mut Report,
) -> Outcome {
    let o = orientation_for(map, flag)?;
    let c = classify(map, o, sweeps, cli.eps, cli.eps_geo)?;
    r.kv("class", c.class);
    r.kv("cuts", c.cuts.len());
    r.human(format!("class={}", c.class));
    for (k, cut) in c.cuts.iter().enumerate() {
        let value = cut.value.map_or("varying".to_string(), |v| format!("{v}"));
        let n = k + 1;
        r.kv(&format!("cut.{n}.type"), cut.kind.name());
        r.kv(&format!("cut.{n}.value"), &value);
        r.kv(&format!("cut.{n}.size"), cut.report.len());
        r.kv(&format!("cut.{n}.bundle"), cut.report.is_bundle);
        let shown = cut
            .value
            .map_or("varying".to_string(), |v| format!("{v:.6}"));
        r.human(format!(
            "cut {n}: type={} f(C)={shown} |C|={}",
            cut.kind.name(),
            cut.report.len()
        ));
    }
    if c.all_bundles() {
        let chain = feasibility_chain(&c.sequence, cli.eps)?;
        r.kv("chain", chain.holds);
        match chain.first_violation {
            None => r.human("chain: nondecreasing"),
            Some((i, j)) => r.human(format!("chain: decreases between cuts {i} and {j}")),
        }
    } else {
        r.kv("chain", "na");
        r.human("chain: not checked (some cut is not a bundle)");
    }
    Ok(EXIT_OK)
}

fn trace_domain(map: &MapGeometry, origin: Vec2) -> Result<BoundingBox, Failure> {
    let bb = BoundingBox::around(map.vertices().iter().map(|v| v.position))
        .ok_or_else(|| Failure("map has no vertices".into()))?
        .including(origin);
    let margin = 0.25 * bb.width().max(bb.height()).max(1.0);
    Ok(bb.expanded(margin))
}

fn run_family(map: &MapGeometry, args: &TraceArgs, eps_geo: f64) -> Result<FamilyTrace, Failure> {
    let origin = Vec2::new(args.origin.0, args.origin.1);
    let base = Ray::new(origin, Vec2::new(args.dir.0, args.dir.1))?;
    let family = RayFamily::new(base, args.rays, args.spacing)?;
    let domain = trace_domain(map, origin)?;
    let opts = TraceOptions {
        max_crossings: args.max_crossings,
        eps_geo,
    };
    Ok(trace_family(map, &family, &domain, &opts)?)
}

fn trace_cmd(
    map: &MapGeometry,
    args: &TraceArgs,
    dump: Option<&Path>,
    cli: &Cli,
    r: &mut Report,
) -> Outcome {
    let traced = run_family(map, args, cli.eps_geo)?;
    if let Some(path) = dump {
        fs::write(path, dump_paths(map, &traced.paths))
            .map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    }
    let oracle = bundle_oracle(&traced.paths, cli.eps_geo);
    r.kv("rays", traced.paths.len());
    r.kv(
        "perturbation",
        traced
            .perturbation
            .map_or("none".to_string(), |(_, s)| s.to_string()),
    );
    for (k, p) in traced.paths.iter().enumerate() {
        r.kv(&format!("ray.{k}.crossings"), p.events.len());
        r.kv(&format!("ray.{k}.turn"), p.net_turn());
        r.kv(&format!("ray.{k}.truncated"), p.truncated);
        r.human(format!(
            "ray {k}: crossings={} turn={:.6} rad{}",
            p.events.len(),
            p.net_turn(),
            if p.truncated { " (truncated)" } else { "" }
        ));
    }
    if let Some((k, s)) = traced.perturbation {
        r.human(format!(
            "family shifted by {s:e} after {k} attempt(s) to avoid a vertex"
        ));
    }
    r.kv("min_separation", oracle.min_separation);
    r.kv("intersects", !oracle.verdict);
    r.kv("converges_beyond", oracle.converges_beyond);
    r.kv("strict", oracle.strict_verdict());
    r.kv("bundle", oracle.verdict);
    r.human(format!("min separation: {:.6e}", oracle.min_separation));
    if oracle.converges_beyond {
        r.human("paths converge beyond the domain");
    }
    r.human(format!("bundle: {}", yes_no(oracle.verdict)));
    Ok(verdict(oracle.verdict))
}

fn render_cmd(
    map: &MapGeometry,
    rays: Option<&TraceArgs>,
    output: &Path,
    labels: bool,
    cli: &Cli,
    r: &mut Report,
) -> Outcome {
    let style = RenderStyle {
        labels,
        eps_kind: cli.eps_kind,
        ..RenderStyle::default()
    };
    let svg = match rays {
        Some(args) => render_trace(map, &run_family(map, args, cli.eps_geo)?.paths, &style)?,
        None => render_map(map, &style)?,
    };
    fs::write(output, svg).map_err(|e| Failure(format!("{}: {e}", output.display())))?;
    r.kv("output", output.display());
    r.human(format!("wrote {}", output.display()));
    Ok(EXIT_OK)
}

fn gen_class(code: &str, output: &Path, r: &mut Report) -> Outcome {
    let class: BundleClass = code.parse()?;
    let (map, _) = class_generator(class)?;
    fs::write(output, map.to_pmg()).map_err(|e| Failure(format!("{}: {e}", output.display())))?;
    r.kv("class", class);
    r.kv("vertices", map.vertices().len());
    r.kv("edges", map.edges().len());
    r.kv("output", output.display());
    r.human(format!(
        "wrote {} ({}: {} vertices, {} edges)",
        output.display(),
        class,
        map.vertices().len(),
        map.edges().len()
    ));
    Ok(EXIT_OK)
}
