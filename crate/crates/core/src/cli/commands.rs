use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::address::ArityProfile;
use crate::appendix::{build_example_space, discontinuity_witness, witness_csv, DiscontinuityWitness};
use crate::balanced::{build_balanced_set, verify_conditions, CellTree};
use crate::error::{GifsError, Result};
use crate::gifs::certify::certify_lipschitz;
use crate::gifs::description::{load_system, LoadedSystem, SystemDescription};
use crate::gifs::inf::{hutchinson_step_inf, GifsInfSystem, TuplePolicy};
use crate::gifs::iterate::{iterate_to_fixed_point, trace_dominated, FixedPointRun, InfOperator};
use crate::gifs::witness::{build_refined_system_in, build_union_system, build_witness_system_in, union_geometry};
use crate::gifs::DEFAULT_TUPLE_CAP;
use crate::lipschitz::{check_extension_agreement, extend_system, sample_ambient_ratio};
use crate::measure::{premeasure_upper, CellHierarchy, CoverStrategy, GaugeFunction};
use crate::metric::{CompactNet, Interval, Point};
use crate::svg::{render_cells, render_scatter, render_trace};

use super::{config_hash, file_section, Cli, Command, Overlay};

/// Random extended tuples per map on top of one tuple per read class.
const AGREEMENT_RANDOM: usize = 200;
/// Slack on sampled and traced inequalities.
const SLACK: f64 = 1e-9;

#[derive(Serialize)]
struct Report<'a, C: Serialize, B: Serialize> {
    command: &'a str,
    config_hash: String,
    config: &'a C,
    passed: bool,
    #[serde(flatten)]
    body: B,
}

fn resolve<T>(cli: &Cli, flags: &T, defaults: T) -> Result<T>
where
    T: Overlay + Clone + Default + for<'de> serde::Deserialize<'de>,
{
    let file: T = file_section(cli.config.as_deref(), cli.command.name())?;
    Ok(flags.clone().overlay(file).overlay(defaults))
}

fn need<T>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| GifsError::InvalidParameter(format!("--{flag} is required")))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn write_report<C: Serialize, B: Serialize>(
    path: &Path,
    command: &str,
    config: &C,
    passed: bool,
    body: B,
) -> Result<()> {
    let r = Report {
        command,
        config_hash: config_hash(command, config)?,
        config,
        passed,
        body,
    };
    write_text(path, &(serde_json::to_string_pretty(&r)? + "\n"))
}

/// `dir/stem.json` -> `dir/stem<suffix>`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn load_inf(path: &Path) -> Result<GifsInfSystem> {
    match load_system(path)? {
        LoadedSystem::GifsInf(s) => Ok(s),
        _ => Err(GifsError::InvalidParameter(format!(
            "{} is not an infinite-order system",
            path.display()
        ))),
    }
}

/// A tree from a tree file or from the domain of a system file.
fn load_tree_or_system(path: &Path) -> Result<(CellTree, Option<usize>)> {
    let text = std::fs::read_to_string(path)?;
    let v: serde_json::Value = serde_json::from_str(&text)?;
    if v.get("kind").is_some() {
        let sys = load_inf(path)?;
        Ok((sys.domain().tree().clone(), Some(sys.domain().dim())))
    } else {
        Ok((CellTree::from_json(&text)?, None))
    }
}

fn parse_policy(s: &str) -> Result<TuplePolicy> {
    match s {
        "auto" => Ok(TuplePolicy::Auto),
        "read-view" | "read_view" => Ok(TuplePolicy::ReadView),
        "exhaustive" => Ok(TuplePolicy::Exhaustive {
            cap: DEFAULT_TUPLE_CAP,
        }),
        "anchor-nearest" | "anchor_nearest" => Ok(TuplePolicy::AnchorNearest),
        other => Err(GifsError::Parse(format!("unknown tuple policy {other:?}"))),
    }
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|t| t.trim().parse::<T>().map_err(|_| GifsError::Parse(format!("bad {what} {t:?}"))))
        .collect()
}

pub fn run_command(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::BuildBalanced(a) => build(cli, a),
        Command::Verify(a) => verify(cli, a),
        Command::Attractor(a) => attractor(cli, a),
        Command::Witness(a) => witness(cli, a),
        Command::Refine(a) => refine(cli, a),
        Command::Union(a) => union(cli, a),
        Command::Certify(a) => certify(cli, a),
        Command::Extend(a) => extend(cli, a),
        Command::Premeasure(a) => premeasure(cli, a),
        Command::AppendixDemo(a) => appendix(cli, a),
        Command::Export(a) => export(cli, a),
    }
}

fn build(cli: &Cli, flags: &super::BuildArgs) -> Result<bool> {
    let a = resolve(cli, flags, super::BuildArgs::defaults())?;
    let q = need(a.q, "q")?;
    let profile: ArityProfile = need(a.profile.clone(), "profile")?.parse()?;
    let tree = build_balanced_set(q, &profile, Interval::new(need(a.lo, "lo")?, need(a.hi, "hi")?))?;
    let report = verify_conditions(&tree);
    let out = need(a.out.clone(), "out")?;
    write_text(&out, &(tree.to_json()? + "\n"))?;
    let report_path = a.report.clone().unwrap_or_else(|| sibling(&out, ".report.json"));
    write_report(&report_path, "build-balanced", &a, report.all_passed(), &report)?;
    write_text(&a.svg.clone().unwrap_or_else(|| sibling(&out, ".svg")), &render_cells(&tree, 3))?;
    println!(
        "built {} leaf cells at depth {}; conditions {}",
        tree.cells_at(tree.depth()).len(),
        tree.depth(),
        if report.all_passed() { "pass" } else { "FAIL" }
    );
    Ok(report.all_passed())
}

fn verify(cli: &Cli, flags: &super::VerifyArgs) -> Result<bool> {
    let a = resolve(cli, flags, super::VerifyArgs::defaults())?;
    let path = need(a.tree.clone(), "tree")?;
    let tree = CellTree::load(&path)?;
    let report = verify_conditions(&tree);
    for c in &report.conditions {
        println!(
            "{:<22} level {:>4} {} margin {:e}",
            c.condition.to_string(),
            c.level.map_or("-".into(), |l| l.to_string()),
            if c.passed { "pass" } else { "FAIL" },
            c.margin
        );
    }
    let report_path = a.report.clone().unwrap_or_else(|| sibling(&path, ".report.json"));
    write_report(&report_path, "verify", &a, report.all_passed(), &report)?;
    Ok(report.all_passed())
}

#[derive(Serialize)]
struct AttractorBody<'a> {
    converged: bool,
    steps: usize,
    contraction: f64,
    threshold: f64,
    trace_dominated: bool,
    error_bound: f64,
    points: usize,
    trace: &'a [f64],
}

fn attractor(cli: &Cli, flags: &super::AttractorArgs) -> Result<bool> {
    let a = resolve(cli, flags, super::AttractorArgs::defaults())?;
    let sys_path = need(a.system.clone(), "system")?;
    let tol = need(a.tol, "tol")?;
    let max_iter = need(a.max_iter, "max-iter")?;
    let policy = parse_policy(&need(a.policy.clone(), "policy")?)?;
    let sys = load_system(&sys_path)?;
    let s0 = match (&a.s0, &sys) {
        (Some(p), _) => CompactNet::load(p)?,
        (None, LoadedSystem::GifsInf(s)) => CompactNet::exact(vec![s.domain().leaves()[0].clone()])?,
        (None, _) => CompactNet::interval_grid(0.0, 1.0, 33)?,
    };
    let run: FixedPointRun = match &sys {
        LoadedSystem::Ifs(s) => iterate_to_fixed_point(s, &s0, tol, max_iter)?,
        LoadedSystem::Gifs(s) => iterate_to_fixed_point(s, &s0, tol, max_iter)?,
        LoadedSystem::GifsInf(s) => iterate_to_fixed_point(&InfOperator { sys: s, policy }, &s0, tol, max_iter)?,
    };
    let dominated = trace_dominated(&run.trace, run.contraction, SLACK);
    let passed = run.converged && dominated;
    write_text(&need(a.out.clone(), "out")?, &(run.net.to_json()? + "\n"))?;
    write_text(&need(a.trace.clone(), "trace")?, &run.trace_csv())?;
    if let Some(svg) = &a.svg {
        write_text(svg, &render_trace(&run.trace))?;
    }
    let body = AttractorBody {
        converged: run.converged,
        steps: run.steps,
        contraction: run.contraction,
        threshold: run.threshold,
        trace_dominated: dominated,
        error_bound: run.error_bound(),
        points: run.net.len(),
        trace: &run.trace,
    };
    let out = need(a.out.clone(), "out")?;
    let report = a.report.clone().unwrap_or_else(|| sibling(&out, ".report.json"));
    write_report(&report, "attractor", &a, passed, body)?;
    println!(
        "{} after {} steps, {} points, last delta {:e}",
        if run.converged { "converged" } else { "NOT converged" },
        run.steps,
        run.net.len(),
        run.trace.last().copied().unwrap_or(0.0)
    );
    Ok(passed)
}

const COMPACT_IMAGE_NOTE: &str =
    "images of products of compact subsets of K have compact closure since K is compact and every map is Lipschitz; recorded, not recomputed";

fn write_system(path: &Path, sys: &GifsInfSystem) -> Result<()> {
    let desc = SystemDescription::of_inf(sys, vec![COMPACT_IMAGE_NOTE.into()]);
    write_text(path, &(desc.to_json()? + "\n"))
}

fn witness(cli: &Cli, flags: &super::WitnessArgs) -> Result<bool> {
    let a = resolve(cli, flags, super::WitnessArgs::defaults())?;
    let tree = CellTree::load(&need(a.tree.clone(), "tree")?)?;
    let sys = build_witness_system_in(&tree, need(a.dim, "dim")?)?;
    write_system(&need(a.out.clone(), "out")?, &sys)?;
    println!("{} maps, declared bound {}", sys.maps().len(), sys.contraction());
    Ok(true)
}

fn refine(cli: &Cli, flags: &super::RefineArgs) -> Result<bool> {
    let a = resolve(cli, flags, super::RefineArgs::defaults())?;
    let tree = CellTree::load(&need(a.tree.clone(), "tree")?)?;
    let sys = build_refined_system_in(&tree, need(a.r, "r")?, need(a.dim, "dim")?)?;
    write_system(&need(a.out.clone(), "out")?, &sys)?;
    println!("{} maps, declared bound {}", sys.maps().len(), sys.contraction());
    Ok(true)
}

fn union(cli: &Cli, flags: &super::UnionArgs) -> Result<bool> {
    let a = resolve(cli, flags, super::UnionArgs::defaults())?;
    let tree = CellTree::load(&need(a.tree.clone(), "tree")?)?;
    let extra = match (&a.extra, &a.points) {
        (Some(p), _) => CompactNet::load(p)?,
        (None, Some(s)) => CompactNet::from_scalars(&parse_list::<f64>(s, "point")?)?,
        (None, None) => return Err(GifsError::InvalidParameter("--extra or --points is required".into())),
    };
    let r = need(a.r, "r")?;
    let geo = union_geometry(&tree, &extra, r)?;
    let sys = build_union_system(&tree, &extra, r)?;
    write_system(&need(a.out.clone(), "out")?, &sys)?;
    println!(
        "{} maps, distance to K >= {}, base order {}, declared bound {}",
        sys.maps().len(),
        geo.gap_lower,
        geo.order,
        sys.contraction()
    );
    Ok(true)
}

fn certify(cli: &Cli, flags: &super::CertifyArgs) -> Result<bool> {
    let a = resolve(cli, flags, super::CertifyArgs::defaults())?;
    let sys = load_inf(&need(a.system.clone(), "system")?)?;
    let report = certify_lipschitz(&sys)?;
    for m in &report.maps {
        println!(
            "map {:>3} {:<20} declared {:<10} certified {:<22} violations {}",
            m.map,
            m.kind,
            m.declared_bound,
            m.certified_ratio,
            m.violations.len()
        );
    }
    write_report(&need(a.report.clone(), "report")?, "certify", &a, report.passed(), &report)?;
    Ok(report.passed())
}

#[derive(Serialize)]
struct ExtendBody {
    maps: usize,
    declared_bound: f64,
    agreement: crate::lipschitz::AgreementReport,
    certificate_passed: bool,
    sampled_max_ratio: f64,
    sampled_max_coordinate_ratio: f64,
    sampled_pairs: usize,
    fixes_net: bool,
}

fn extend(cli: &Cli, flags: &super::ExtendArgs) -> Result<bool> {
    let a = resolve(cli, flags, super::ExtendArgs::defaults())?;
    let (tree, sys_dim) = load_tree_or_system(&need(a.system.clone(), "system")?)?;
    let dim = a.dim.or(sys_dim).unwrap_or(1);
    let seed = need(a.seed, "seed")?;
    let samples = need(a.samples, "samples")?;
    let ext = extend_system(&build_witness_system_in(&tree, dim)?, need(a.r, "r")?)?;
    let agreement = check_extension_agreement(&ext, AGREEMENT_RANDOM, seed)?;
    let cert = certify_lipschitz(&ext)?;
    let (mut max_ratio, mut max_coord, mut ok) = (0.0f64, 0.0f64, true);
    for (i, f) in ext.maps().iter().enumerate() {
        let r = sample_ambient_ratio(f, samples, 0.5, seed.wrapping_add(i as u64))?;
        let crate::gifs::inf::InfMapKind::Extended { coordinate_bound, .. } = f.kind() else {
            unreachable!("extend_system builds extended maps")
        };
        ok &= r.max_ratio <= f.declared_bound() + SLACK && r.max_coordinate_ratio <= coordinate_bound + SLACK;
        max_ratio = max_ratio.max(r.max_ratio);
        max_coord = max_coord.max(r.max_coordinate_ratio);
    }
    let knet = ext.domain().knet();
    let fixes_net = hutchinson_step_inf(&ext, knet, TuplePolicy::Auto)?.same_points(knet);
    let passed = agreement.passed() && cert.passed() && ok && fixes_net;
    let out = need(a.out.clone(), "out")?;
    write_system(&out, &ext)?;
    let body = ExtendBody {
        maps: ext.maps().len(),
        declared_bound: ext.contraction(),
        agreement,
        certificate_passed: cert.passed(),
        sampled_max_ratio: max_ratio,
        sampled_max_coordinate_ratio: max_coord,
        sampled_pairs: samples * ext.maps().len(),
        fixes_net,
    };
    println!(
        "{} extended maps in R^{dim}, declared bound {}, sampled ratio {}, agreement mismatches {}, net fixed {}",
        body.maps, body.declared_bound, body.sampled_max_ratio, body.agreement.mismatches, fixes_net
    );
    write_report(&a.report.clone().unwrap_or_else(|| sibling(&out, ".report.json")), "extend", &a, passed, body)?;
    Ok(passed)
}

#[derive(Serialize)]
struct PremeasureBody {
    gauge: String,
    strategy: CoverStrategy,
    cover: crate::measure::CoverReport,
}

fn premeasure(cli: &Cli, flags: &super::PremeasureArgs) -> Result<bool> {
    let a = resolve(cli, flags, super::PremeasureArgs::defaults())?;
    let gauge: GaugeFunction = need(a.gauge.clone(), "gauge")?.parse()?;
    let delta = need(a.delta, "delta")?;
    let hier = match (&a.tree, a.cantor) {
        (Some(t), _) => Some(CellHierarchy::of_tree(&CellTree::load(t)?)),
        (None, Some(m)) => Some(CellHierarchy::ternary_cantor(m)?),
        (None, None) => None,
    };
    let set = match (&a.set, &hier) {
        (Some(p), _) => CompactNet::load(p)?,
        (None, Some(h)) => h.net()?,
        (None, None) => return Err(GifsError::InvalidParameter("--set, --tree or --cantor is required".into())),
    };
    let strategy: CoverStrategy = match &a.strategy {
        Some(s) => s.parse()?,
        None if hier.is_some() => CoverStrategy::Cells(None),
        None => CoverStrategy::Intervals,
    };
    let cover = premeasure_upper(&set, &gauge, delta, strategy, hier.as_ref())?;
    println!("upper bound {} from {} pieces", cover.value, cover.pieces);
    if let Some(r) = &a.report {
        let body = PremeasureBody {
            gauge: gauge.to_string(),
            strategy,
            cover,
        };
        write_report(r, "premeasure", &a, true, body)?;
    }
    Ok(true)
}

#[derive(Serialize)]
struct AppendixBody {
    rows: Vec<DiscontinuityWitness>,
}

fn appendix(cli: &Cli, flags: &super::AppendixArgs) -> Result<bool> {
    let a = resolve(cli, flags, super::AppendixArgs::defaults())?;
    let ns: Vec<usize> = parse_list(&need(a.n.clone(), "n")?, "n")?;
    let n_max = ns.iter().copied().max().ok_or_else(|| GifsError::InvalidParameter("empty --n".into()))?;
    let space = build_example_space(n_max, need(a.resolution, "resolution")?)?;
    let rows = ns
        .iter()
        .map(|&n| discontinuity_witness(n, &space))
        .collect::<Result<Vec<_>>>()?;
    // h1 is at most the distance from mid-gap points of the segment to the grid
    let passed = rows
        .iter()
        .all(|w| w.h2 == 1.0 && w.h1 <= 5f64.sqrt() / (2.0 * w.n as f64) + w.resolution);
    let csv = witness_csv(&rows);
    print!("{csv}");
    write_text(&need(a.csv.clone(), "csv")?, &csv)?;
    let highlight = space.k_n(*ns.first().expect("nonempty"))?;
    let svg = render_scatter(&[
        ("#999999", space.perfect.points()),
        ("#1f77b4", space.isolated.points()),
        ("#d62728", highlight.points()),
    ]);
    write_text(&need(a.svg.clone(), "svg")?, &svg)?;
    if let Some(r) = &a.report {
        write_report(r, "appendix-demo", &a, passed, AppendixBody { rows })?;
    }
    Ok(passed)
}

fn export(cli: &Cli, flags: &super::ExportArgs) -> Result<bool> {
    let a = resolve(cli, flags, super::ExportArgs::defaults())?;
    // a system contributes its tree and, when it has one, its finite part
    let (tree, extra) = match (&a.tree, &a.system) {
        (Some(p), _) => (Some(CellTree::load(p)?), None),
        (None, Some(p)) => {
            let sys = load_inf(p)?;
            (Some(sys.domain().tree().clone()), sys.domain().extra().cloned())
        }
        (None, None) => (None, None),
    };
    let net = match (&a.net, &tree) {
        (Some(p), _) => CompactNet::load(p)?,
        (None, Some(t)) => {
            let k = t.materialize_net(a.depth.unwrap_or(t.depth()).clamp(1, t.depth()))?;
            match &extra {
                Some(e) => k.union(e)?,
                None => k,
            }
        }
        (None, None) => return Err(GifsError::InvalidParameter("--tree, --net or --system is required".into())),
    };
    if let Some(p) = &a.csv {
        let mut buf = Vec::new();
        net.write_csv(&mut buf)?;
        write_text(p, &String::from_utf8(buf).expect("csv is utf-8"))?;
    }
    if let Some(p) = &a.svg {
        let svg = match &tree {
            Some(t) => render_cells(t, a.depth.unwrap_or(3)),
            None => {
                let pts: Vec<Point> = net
                    .points()
                    .iter()
                    .map(|p| Point::xy(p.x(), p.coords().get(1).copied().unwrap_or(0.0)))
                    .collect();
                render_scatter(&[("#1f77b4", &pts)])
            }
        };
        write_text(p, &svg)?;
    }
    if let Some(p) = &a.json {
        let t = tree
            .as_ref()
            .ok_or_else(|| GifsError::InvalidParameter("--json needs --tree or --system".into()))?;
        write_text(p, &(t.to_json()? + "\n"))?;
    }
    println!("{} points", net.len());
    Ok(true)
}
