//! `qvista`: build, verify and transform multi-scale covers from the command line.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use sha2::{Digest, Sha256};

use qvista::boundary::{
    boundary_metric, diam_comparability, phi_injectivity_check, phi_regularity_check, tie_break_sensitivity,
    Regularity, TieBreak,
};
use qvista::builder::{build_visual_width0, build_visual_width1, DEFAULT_DOUBLING_CAP};
use qvista::dynamics::{dynamical_checks, DynamicalOptions};
use qvista::fixtures::{circle_doubling_map, fixture, FixtureParams, FIXTURE_NAMES};
use qvista::io::{load_cover_standalone, load_map, load_space, load_thresholds, save_cover, save_json, save_space, MapFile};
use qvista::julia::{degree_probe, julia_cover, julia_sample, verify_dynamical_qv, RationalMap, DEFAULT_RINGS, MAX_RINGS};
use qvista::proximity::{check_combinatorially_visual, compute_proximity, synthesize_visual_metric};
use qvista::quasisym::{fit_power_quasisymmetry, snowflake_check};
use qvista::report::{render_text, to_canonical_json, RunManifest};
use qvista::tilegraph::{
    build_tile_graph, cluster_cover_sequence, compare_m_gromov, hyperbolicity_constant, HyperbolicityMode,
    EXACT_TRIPLE_CAP,
};
use qvista::verify::{derive_rho_tau_nu, quasiball_check, verify_quasi_visual, verify_visual};
use qvista::{ConditionRecord, Thresholds, Verdict, VerificationReport, Witness};

#[derive(Parser)]
#[command(name = "qvista", version, about = "Multi-scale covers of finite metric spaces")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for sampled computations; QVISTA_SEED overrides the default 0.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output format on standard output.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the JSON report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Thresholds file (JSON); missing fields keep their defaults.
    #[arg(long, global = true, conflicts_with = "threshold")]
    thresholds: Option<PathBuf>,
    /// Use this value for every multiplicative threshold.
    #[arg(long, global = true)]
    threshold: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Visual,
    QuasiVisual,
    Dynamical,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Tie {
    Lowest,
    Highest,
}

#[derive(Subcommand)]
enum Command {
    /// Build a visual cover of a space.
    Build {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(0..=1))]
        width: u8,
        /// Closed balls instead of open ones.
        #[arg(long)]
        closed: bool,
        #[arg(long, default_value_t = DEFAULT_DOUBLING_CAP)]
        doubling_cap: usize,
        #[arg(long)]
        cover_out: PathBuf,
    },
    /// Verify a cover against a metric.
    Verify {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        cover: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::QuasiVisual)]
        mode: Mode,
        #[arg(long)]
        width: Option<usize>,
        #[arg(long)]
        lambda: Option<f64>,
        /// Point map for the dynamical mode.
        #[arg(long)]
        map: Option<PathBuf>,
        /// Require tiles to map onto tiles in the dynamical mode.
        #[arg(long)]
        exact_image: bool,
    },
    /// Proximity table and combinatorial visuality check.
    Proximity {
        #[arg(long)]
        cover: PathBuf,
        #[arg(long)]
        width: Option<usize>,
        #[arg(long)]
        table_out: Option<PathBuf>,
    },
    /// Synthesize a visual metric from a combinatorially visual cover.
    Synthesize {
        #[arg(long)]
        cover: PathBuf,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        width: Option<usize>,
        #[arg(long)]
        space_out: Option<PathBuf>,
    },
    /// Power quasisymmetry (and optionally snowflake) fit between two metrics.
    Qscheck {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        other: PathBuf,
        #[arg(long)]
        snowflake: bool,
    },
    /// Tile graph, Gromov products and hyperbolicity.
    Tilegraph {
        #[arg(long)]
        cover: PathBuf,
        /// Sample this many triples instead of the exact scan.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        graph_out: Option<PathBuf>,
        /// Cluster radius for a cluster cover.
        #[arg(long)]
        cluster: Option<usize>,
        #[arg(long, requires = "cluster")]
        cluster_out: Option<PathBuf>,
    },
    /// Boundary metric of the tile graph and the regularity of the identification.
    Boundary {
        #[arg(long)]
        cover: PathBuf,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        space: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Tie::Lowest)]
        tie: Tie,
        #[arg(long)]
        metric_out: Option<PathBuf>,
    },
    /// Dynamical cover of a sampled Julia set.
    Julia {
        /// Rational map, e.g. "z^2-2" or "(z^2+(0.1+0.2i))/(z-1)".
        #[arg(long)]
        map: String,
        #[arg(long, default_value_t = 10)]
        depth: usize,
        /// Prune the sample to this many points.
        #[arg(long)]
        target: Option<usize>,
        #[arg(long)]
        cover_radius: f64,
        #[arg(long, default_value_t = 6)]
        levels: usize,
        #[arg(long, default_value_t = DEFAULT_RINGS)]
        rings: usize,
        #[arg(long, default_value_t = MAX_RINGS)]
        max_rings: usize,
        /// Degree probes at this many sample points.
        #[arg(long, default_value_t = 0)]
        probes: usize,
        #[arg(long, default_value_t = 0.1)]
        probe_radius: f64,
        #[arg(long)]
        sample_out: Option<PathBuf>,
        #[arg(long)]
        cover_out: Option<PathBuf>,
    },
    /// Write a named fixture space and cover.
    Fixture {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(FIXTURE_NAMES))]
        name: String,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        sample_depth: Option<usize>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

struct Run {
    manifest: RunManifest,
    report: VerificationReport,
    extra: Option<serde_json::Value>,
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

fn input(m: &mut RunManifest, role: &str, path: &Path) -> Result<()> {
    m.inputs.insert(role.into(), sha256_file(path)?);
    Ok(())
}

fn thresholds(g: &Global) -> Result<Thresholds> {
    Ok(match (&g.thresholds, g.threshold) {
        (Some(p), _) => load_thresholds(p).with_context(|| format!("loading thresholds {}", p.display()))?,
        (None, Some(c)) => Thresholds::uniform(c),
        (None, None) => Thresholds::default(),
    })
}

fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var("QVISTA_SEED") {
        Ok(v) => v.trim().parse().with_context(|| format!("QVISTA_SEED is not an unsigned integer: {v:?}")),
        Err(_) => Ok(0),
    }
}

fn info(id: &str, description: &str, constant: f64) -> ConditionRecord {
    ConditionRecord {
        id: id.into(),
        description: description.into(),
        constant,
        threshold: None,
        verdict: Verdict::Pass,
        witness: None,
        per_level: Vec::new(),
    }
}

fn run(cli: &Cli) -> Result<Run> {
    let g = &cli.global;
    let th = thresholds(g)?;
    let seed = resolve_seed(g.seed)?;
    match &cli.command {
        Command::Build { space, lambda, depth, width, closed, doubling_cap, cover_out } => {
            let mut m = RunManifest::new("build", seed)
                .param("lambda", lambda)
                .param("depth", depth)
                .param("width", width)
                .param("closed", closed)
                .param("doubling_cap", doubling_cap)
                .param("thresholds", &th);
            input(&mut m, "space", space)?;
            let s = load_space(space)?;
            let cover = if *width == 1 {
                build_visual_width1(&s, *lambda, *depth, *closed)?
            } else {
                build_visual_width0(&s, *lambda, *depth, *closed, *doubling_cap)?.0
            };
            save_cover(cover_out, &cover)?;
            let report = verify_visual(&s, &cover, &th)?;
            Ok(Run { manifest: m, report, extra: None })
        }
        Command::Verify { space, cover, mode, width, lambda, map, exact_image } => {
            let mut m = RunManifest::new("verify", seed)
                .param("mode", match mode {
                    Mode::Visual => "visual",
                    Mode::QuasiVisual => "quasi-visual",
                    Mode::Dynamical => "dynamical",
                })
                .param("width", width)
                .param("lambda", lambda)
                .param("exact_image", exact_image)
                .param("thresholds", &th);
            input(&mut m, "space", space)?;
            input(&mut m, "cover", cover)?;
            let s = load_space(space)?;
            let mut c = load_cover_standalone(cover)?.revalidated(s.len())?;
            if let Some(w) = width {
                c = c.with_width(*w);
            }
            if lambda.is_some() {
                c = c.with_lambda(*lambda);
            }
            let report = match mode {
                Mode::Visual => {
                    if c.lambda.is_none() {
                        bail!("visual mode needs --lambda or a cover with a lambda");
                    }
                    verify_visual(&s, &c, &th)?
                }
                Mode::QuasiVisual => {
                    let mut r = verify_quasi_visual(&s, &c, &th)?;
                    if r.passed() {
                        if let Ok(f) = derive_rho_tau_nu(&s, &c) {
                            r.derived.insert("rho".into(), f.rho);
                            r.derived.insert("tau".into(), f.tau);
                            r.derived.insert("nu".into(), f.nu);
                        }
                        let qb = quasiball_check(&s, &c);
                        r.derived.insert("r0".into(), qb.r0);
                        r.derived.insert("R0".into(), qb.big_r0);
                    }
                    r
                }
                Mode::Dynamical => {
                    let Some(mp) = map else { bail!("dynamical mode needs --map") };
                    input(&mut m, "map", mp)?;
                    let points = load_map(mp)?;
                    let opts = DynamicalOptions { exact_image: *exact_image, ..DynamicalOptions::default() };
                    dynamical_checks(&s, &c, &points, &opts, &th)?
                }
            };
            Ok(Run { manifest: m, report, extra: None })
        }
        Command::Proximity { cover, width, table_out } => {
            let mut m = RunManifest::new("proximity", seed).param("width", width).param("thresholds", &th);
            input(&mut m, "cover", cover)?;
            let mut c = load_cover_standalone(cover)?;
            if let Some(w) = width {
                c = c.with_width(*w);
            }
            let table = compute_proximity(&c)?;
            if let Some(p) = table_out {
                save_json(p, &json!({ "truncation": table.truncation, "width": table.width, "m": table.rows() }))?;
            }
            let check = check_combinatorially_visual(&c, &table, &th);
            let mut report = check.report;
            report.derived.insert("saturated_pairs".into(), check.saturated as f64);
            report.derived.insert("C_cv".into(), check.c_cv);
            Ok(Run { manifest: m, report, extra: None })
        }
        Command::Synthesize { cover, lambda, width, space_out } => {
            let mut m = RunManifest::new("synthesize", seed)
                .param("lambda", lambda)
                .param("width", width)
                .param("thresholds", &th);
            input(&mut m, "cover", cover)?;
            let mut c = load_cover_standalone(cover)?;
            if let Some(w) = width {
                c = c.with_width(*w);
            }
            let table = compute_proximity(&c)?;
            let check = check_combinatorially_visual(&c, &table, &th);
            if !check.report.passed() {
                let mut report = check.report;
                report.notes.push("cover is not combinatorially visual; no metric synthesized".into());
                return Ok(Run { manifest: m, report, extra: None });
            }
            let (d, report) = synthesize_visual_metric(&c, *lambda, &th)?;
            if let Some(p) = space_out {
                save_space(p, &d)?;
            }
            Ok(Run { manifest: m, report, extra: None })
        }
        Command::Qscheck { space, other, snowflake } => {
            let mut m = RunManifest::new("qscheck", seed).param("snowflake", snowflake).param("thresholds", &th);
            input(&mut m, "space", space)?;
            input(&mut m, "other", other)?;
            let a = load_space(space)?;
            let b = load_space(other)?;
            if a.len() != b.len() {
                bail!("spaces have {} and {} points", a.len(), b.len());
            }
            let fit = fit_power_quasisymmetry(&a, &b, None, th.qs_cap);
            let mut r = VerificationReport::new("quasisymmetry", 0, 0, None);
            for (id, dir) in [("forward", &fit.forward), ("backward", &fit.backward)] {
                let mut c = ConditionRecord::bounded(
                    id,
                    "power distortion K max(t^nu, t^(1/nu))",
                    dir.best.k,
                    th.qs_cap,
                    dir.witness.map(|(x, y, z)| Witness::points(vec![x, y, z], dir.best.k)),
                );
                c.verdict = dir.verdict;
                r.conditions.push(c);
                r.derived.insert(format!("nu_{id}"), dir.best.nu);
            }
            if *snowflake {
                let sf = snowflake_check(&a, &b, None, th.snowflake);
                r.conditions.push(ConditionRecord::bounded("snowflake", "d2 comparable to d1^alpha", sf.c, th.snowflake, None));
                r.derived.insert("alpha".into(), sf.alpha);
            }
            Ok(Run { manifest: m, report: r.finish(), extra: None })
        }
        Command::Tilegraph { cover, samples, graph_out, cluster, cluster_out } => {
            let mut m = RunManifest::new("tilegraph", seed)
                .param("samples", samples)
                .param("cluster", cluster)
                .param("thresholds", &th);
            input(&mut m, "cover", cover)?;
            let c = load_cover_standalone(cover)?;
            let graph = build_tile_graph(&c);
            if let Some(p) = graph_out {
                save_json(p, &graph.export())?;
            }
            let table = compute_proximity(&c)?;
            let check = check_combinatorially_visual(&c, &table, &th);
            let gc = compare_m_gromov(&graph, &c, &table);
            let mode = match samples {
                Some(k) => HyperbolicityMode::Sampled { samples: *k, seed },
                None if graph.len() > EXACT_TRIPLE_CAP => HyperbolicityMode::Sampled { samples: 1_000_000, seed },
                None => HyperbolicityMode::Exact,
            };
            let h = hyperbolicity_constant(&graph, mode)?;
            let mut r = VerificationReport::new("tile_graph", c.depth(), c.width, c.lambda);
            r.conditions.push(ConditionRecord::bounded(
                "gromov",
                "|(X.Y) - m(X,Y)| bounded",
                gc.constant,
                th.additive,
                gc.witness.map(|(a, b)| Witness::points(vec![a, b], gc.constant)),
            ));
            let hyp = if check.report.passed() {
                ConditionRecord::bounded(
                    "hyperbolicity",
                    "C_Gamma <= 2 C_gromov + C_cv",
                    h.constant,
                    2.0 * gc.constant + check.c_cv,
                    h.witness.map(|(x, y, z)| Witness::points(vec![x, y, z], h.constant)),
                )
            } else {
                info("hyperbolicity", "Gromov hyperbolicity constant", h.constant)
            };
            r.conditions.push(hyp);
            r.derived.insert("vertices".into(), graph.len() as f64);
            r.derived.insert("edges".into(), graph.edge_count() as f64);
            r.derived.insert("diameter".into(), graph.diameter() as f64);
            r.derived.insert("levgr".into(), gc.levgr as f64);
            r.derived.insert("C_cv".into(), check.c_cv);
            if let Some(t) = gc.triangle_excess {
                r.derived.insert("triangle_excess".into(), t as f64);
            }
            if h.lower_bound_only {
                r.notes.push(format!("hyperbolicity sampled over {} triples: lower bound only", h.triples));
            }
            if let (Some(radius), Some(p)) = (cluster, cluster_out) {
                save_cover(p, &cluster_cover_sequence(&graph, &c, *radius)?)?;
            }
            Ok(Run { manifest: m, report: r.finish(), extra: None })
        }
        Command::Boundary { cover, lambda, space, tie, metric_out } => {
            let mut m = RunManifest::new("boundary", seed)
                .param("lambda", lambda)
                .param("tie", if *tie == Tie::Lowest { "lowest" } else { "highest" })
                .param("thresholds", &th);
            input(&mut m, "cover", cover)?;
            let c = load_cover_standalone(cover)?;
            let graph = build_tile_graph(&c);
            let tb = if *tie == Tie::Lowest { TieBreak::Lowest } else { TieBreak::Highest };
            let bm = boundary_metric(&c, &graph, *lambda, tb)?;
            if let Some(p) = metric_out {
                save_json(p, &json!({ "distances": bm.as_space().rows(), "doubled_products": bm.doubled_products }))?;
            }
            let inj = phi_injectivity_check(&bm);
            let mut r = VerificationReport::new("boundary", c.depth(), c.width, Some(*lambda));
            let mut ic = ConditionRecord::bounded(
                "injectivity",
                "distinct points have positive boundary distance",
                inj.collapsed_pairs as f64,
                0.0,
                inj.witness.map(|(x, y)| Witness::points(vec![x, y], 0.0)),
            );
            ic.verdict = inj.verdict;
            r.conditions.push(ic);
            let sens = tie_break_sensitivity(&c, &graph, *lambda)?;
            r.derived.insert("tie_break_max_doubled_change".into(), sens.max_doubled_change as f64);
            r.derived.insert("ambiguous_points".into(), sens.ambiguous_points as f64);
            if let Some(sp) = space {
                input(&mut m, "space", sp)?;
                let s = load_space(sp)?;
                if s.len() != c.n_points() {
                    bail!("space has {} points, cover has {}", s.len(), c.n_points());
                }
                let (dc, w) = diam_comparability(&s, &c, &graph, *lambda);
                r.conditions.push(ConditionRecord::bounded(
                    "diam",
                    "diam comparable to lambda^-(X.Y)",
                    dc,
                    th.comparability,
                    w.map(|(a, b)| Witness::tiles(vec![a, b], dc)),
                ));
                let reg = phi_regularity_check(&s, &bm, &th, false);
                r.derived.insert("snowflake_C".into(), reg.snowflake.c);
                r.derived.insert("snowflake_alpha".into(), reg.snowflake.alpha);
                if let Some(q) = &reg.quasisymmetry {
                    r.derived.insert("qs_K".into(), q.forward.best.k.max(q.backward.best.k));
                }
                let mut rc = info("regularity", "identification is a snowflake or a power quasisymmetry", match reg.class {
                    Regularity::Snowflake => reg.snowflake.c,
                    _ => reg.quasisymmetry.as_ref().map_or(f64::INFINITY, |q| q.forward.best.k.max(q.backward.best.k)),
                });
                rc.verdict = Verdict::from_bool(reg.class != Regularity::Fail);
                r.conditions.push(rc);
                r.notes.push(format!(
                    "regularity class: {}",
                    match reg.class {
                        Regularity::Snowflake => "snowflake",
                        Regularity::Quasisymmetry => "quasisymmetry",
                        Regularity::Fail => "fail",
                    }
                ));
            }
            Ok(Run { manifest: m, report: r.finish(), extra: None })
        }
        Command::Julia {
            map,
            depth,
            target,
            cover_radius,
            levels,
            rings,
            max_rings,
            probes,
            probe_radius,
            sample_out,
            cover_out,
        } => {
            let m = RunManifest::new("julia", seed)
                .param("map", map)
                .param("depth", depth)
                .param("target", target)
                .param("cover_radius", cover_radius)
                .param("levels", levels)
                .param("rings", rings)
                .param("max_rings", max_rings)
                .param("probes", probes)
                .param("probe_radius", probe_radius)
                .param("thresholds", &th);
            let g = RationalMap::parse(map)?;
            let sample = julia_sample(&g, *depth, *target)?;
            if let Some(p) = sample_out {
                save_json(p, &sample)?;
            }
            let jc = julia_cover(&g, sample, *cover_radius, *levels, *rings, *max_rings)?;
            if let Some(p) = cover_out {
                save_cover(p, &jc.cover)?;
            }
            let mut report = verify_dynamical_qv(&jc, &th, &DynamicalOptions::default())?;
            if *probes > 0 {
                let n = jc.sample.len();
                let mut per_level = vec![0usize; *levels];
                for j in 0..*probes {
                    let w0 = jc.sample.points[j * n / probes];
                    let p = degree_probe(&g, w0, *probe_radius, *levels, *rings, *max_rings)?;
                    for (a, b) in per_level.iter_mut().zip(&p.max_per_level) {
                        *a = (*a).max(*b);
                    }
                }
                report.derived.insert("max_degree".into(), per_level.iter().copied().max().unwrap_or(0) as f64);
                for (k, d) in per_level.iter().enumerate() {
                    report.derived.insert(format!("max_degree_n{}", k + 1), *d as f64);
                }
            }
            let extra = json!({
                "sample_points": jc.sample.len(),
                "regions_per_level": jc.pullback.regions.iter().map(|l| l.len()).collect::<Vec<_>>(),
                "local_degrees": jc.pullback.regions.iter().map(|l| l.iter().map(|r| r.local_degree).max().unwrap_or(0)).collect::<Vec<_>>(),
                "refinements": jc.pullback.refinements,
            });
            Ok(Run { manifest: m, report, extra: Some(extra) })
        }
        Command::Fixture { name, depth, sample_depth, out_dir } => {
            let params = FixtureParams { depth: *depth, sample_depth: *sample_depth };
            let m = RunManifest::new("fixture", seed).param("name", name).param("params", params);
            let (s, c) = fixture(name, params)?;
            save_space(&out_dir.join("space.json"), &s)?;
            save_cover(&out_dir.join("cover.json"), &c)?;
            if name == "circle_dyadic" {
                let sd = sample_depth.unwrap_or(depth + 2);
                save_json(&out_dir.join("map.json"), &MapFile { map: circle_doubling_map(sd) })?;
            }
            let mut r = VerificationReport::new("fixture", c.depth(), c.width, c.lambda);
            r.derived.insert("points".into(), s.len() as f64);
            r.derived.insert("tiles".into(), c.tile_count() as f64);
            Ok(Run { manifest: m, report: r.finish(), extra: None })
        }
    }
}

fn emit(g: &Global, run: &Run) -> Result<()> {
    let mut envelope = json!({ "manifest": run.manifest, "report": run.report });
    if let Some(x) = &run.extra {
        envelope["details"] = x.clone();
    }
    let text = to_canonical_json(&envelope);
    if let Some(p) = &g.out {
        if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        fs::write(p, text.clone() + "\n").with_context(|| format!("writing {}", p.display()))?;
    }
    match g.format {
        Format::Text => print!("{}", render_text(&run.report)),
        Format::Json if g.out.is_none() => println!("{text}"),
        Format::Json => {}
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(k) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli).and_then(|r| emit(&cli.global, &r).map(|_| r)) {
        Ok(r) if r.report.passed() => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
