use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use lect::analysis::{marginal_curves, marginal_distance, DistanceOptions, ThresholdRule};
use lect::generators::gen_field_suite;
use lect::io::{self as lio, Format, LoadedField};
use lect::moduli::{delta_bound, verify_class, ModuliParams};
use lect::pipeline::{classify, distance_matrix, shared_request, transform_field};
use lect::stats::{classical_mds, cut_tree, hierarchical_cluster, DistanceMatrix, Linkage};
use lect::{
    align_2d, default_thresholds, euler_scan, global_range, make_directions, normalize_field, rescale_geometry_of, voxel_to_pl, Normalization, PlField,
    TransformGrid, TransformKind,
};

/// Thresholds of the MRI preset, as voxel counts out of 9061.
const MRI_THRESHOLDS: [f64; 9] = [5.0, 10.0, 100.0, 200.0, 400.0, 800.0, 1600.0, 3200.0, 6400.0];
const MRI_SCALE: f64 = 9061.0;

#[derive(Parser, Serialize)]
#[command(name = "lect", version, about = "Euler characteristic transforms of piecewise-linear fields")]
struct Cli {
    /// Directory for all outputs.
    #[arg(long, global = true, env = "LECT_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,

    /// Worker threads for the parallel scans (default: all cores).
    #[arg(long, global = true, env = "LECT_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize)]
enum Command {
    /// Load a mesh or voxel file, convert it to a PL field and write it as a mesh.
    Ingest(IngestArgs),
    /// Compute SELECT, LECT or ECT grids for one or more fields.
    Transform(TransformArgs),
    /// Pairwise distances between transform grids.
    Dist(DistArgs),
    /// Threshold-integrated Euler curves of a SELECT grid.
    Marginal(MarginalArgs),
    /// Best cyclic direction shift between two 2D transform grids.
    Align2d(AlignArgs),
    /// Generate the quadric simulation suite as voxel files.
    Simulate(SimulateArgs),
    /// MDS embedding and hierarchical clustering of a distance matrix.
    Cluster(ClusterArgs),
    /// Kernel SVM on a distance matrix with a stratified train/test split.
    Classify(ClassifyArgs),
    /// Check a field against the moduli class conditions.
    VerifyClass(VerifyArgs),
    /// Leading term of the scan-count bound.
    Bound(BoundArgs),
    /// One exact Euler curve of a field.
    EulerCurve(EulerCurveArgs),
}

#[derive(Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
enum FormatArg {
    Mesh,
    Voxel,
}

#[derive(Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
enum NormalizeArg {
    None,
    PerField,
    Global,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
enum KindArg {
    Select,
    Lect,
    Ect,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
enum Preset {
    Sim3d,
    Mri,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
enum RuleArg {
    Trapezoid,
    Step,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
enum LinkageArg {
    Average,
    Single,
    Complete,
}

#[derive(Args, Serialize)]
struct FieldInput {
    /// Input format; detected from the header when omitted.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,

    /// Value normalization applied after loading.
    #[arg(long, value_enum, default_value = "global")]
    normalize: NormalizeArg,

    /// Center each field's bounding box and scale it into [-1, 1]^d.
    #[arg(long)]
    rescale_geometry: bool,
}

#[derive(Args, Serialize)]
struct IngestArgs {
    input: PathBuf,
    #[command(flatten)]
    field: FieldInput,
}

#[derive(Args, Serialize)]
struct TransformArgs {
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[command(flatten)]
    field: FieldInput,
    #[arg(long, value_enum, default_value = "select")]
    kind: KindArg,
    /// Axis preset: sim3d = 362 x 100 x 30, mri = 362 x 100 x 9.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Number of directions.
    #[arg(long)]
    directions: Option<usize>,
    /// Number of heights.
    #[arg(long)]
    heights: Option<usize>,
    /// Number of uniform thresholds k/n on (0, 1].
    #[arg(long, conflicts_with = "threshold_list")]
    thresholds: Option<usize>,
    /// Explicit comma-separated thresholds.
    #[arg(long, value_delimiter = ',')]
    threshold_list: Option<Vec<f64>>,
    /// Also write each grid as long-format CSV.
    #[arg(long)]
    csv: bool,
}

#[derive(Args, Serialize)]
struct DistArgs {
    #[arg(required = true)]
    grids: Vec<PathBuf>,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, value_enum, default_value = "trapezoid")]
    rule: RuleArg,
    /// Divide by the height range times the largest threshold.
    #[arg(long)]
    normalized: bool,
    /// Compare marginal curves instead of full grids.
    #[arg(long)]
    marginal: bool,
    #[arg(long, default_value = "distances.csv")]
    output: String,
}

#[derive(Args, Serialize)]
struct MarginalArgs {
    grid: PathBuf,
}

#[derive(Args, Serialize)]
struct AlignArgs {
    a: PathBuf,
    b: PathBuf,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
}

#[derive(Args, Serialize)]
struct SimulateArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    setup: u8,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    n_per_family: usize,
}

#[derive(Args, Serialize)]
struct ClusterArgs {
    distances: PathBuf,
    #[arg(long, value_enum, default_value = "average")]
    linkage: LinkageArg,
    /// Number of flat clusters to cut the dendrogram into.
    #[arg(long, default_value_t = 4)]
    k: usize,
    /// Embedding dimension.
    #[arg(long, default_value_t = 2)]
    mds_dim: usize,
}

#[derive(Args, Serialize)]
struct ClassifyArgs {
    distances: PathBuf,
    /// CSV with header `id,label` and labels +1 / -1.
    #[arg(long)]
    labels: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    train_fraction: f64,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Serialize)]
struct ModuliArgs {
    #[arg(short = 'd', long)]
    dim: usize,
    #[arg(short = 'k', long)]
    k: usize,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    delta_b: f64,
    /// Radius of the observing direction ball in radians.
    #[arg(long, default_value_t = 0.1)]
    delta_k: f64,
}

impl ModuliArgs {
    fn params(&self) -> ModuliParams {
        ModuliParams {
            d: self.dim,
            k: self.k,
            delta_k: self.delta_k,
            delta_b: self.delta_b,
            delta: self.delta,
        }
    }
}

#[derive(Args, Serialize)]
struct VerifyArgs {
    input: PathBuf,
    #[command(flatten)]
    moduli: ModuliArgs,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long, default_value_t = 64)]
    directions: usize,
    #[arg(long, default_value_t = 30)]
    thresholds: usize,
    /// Ball centers and directions per ball for the observability check.
    #[arg(long, default_value_t = 16)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Serialize)]
struct BoundArgs {
    #[command(flatten)]
    moduli: ModuliArgs,
}

#[derive(Args, Serialize)]
struct EulerCurveArgs {
    input: PathBuf,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Comma-separated direction; normalized before use.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    direction: Vec<f64>,
    #[arg(long)]
    threshold: f64,
}

fn format_of(f: Option<FormatArg>) -> Option<Format> {
    f.map(|f| match f {
        FormatArg::Mesh => Format::MeshText,
        FormatArg::Voxel => Format::VoxelText,
    })
}

fn load_pl(path: &Path, format: Option<FormatArg>) -> Result<PlField> {
    let loaded = lio::load_field(path, format_of(format)).with_context(|| format!("reading {}", path.display()))?;
    Ok(match loaded {
        LoadedField::Pl(f) => f,
        LoadedField::Voxel(g) => voxel_to_pl(&g)?,
    })
}

fn load_fields(paths: &[PathBuf], opts: &FieldInput) -> Result<(Vec<PlField>, Vec<bool>)> {
    let fields = paths.iter().map(|p| load_pl(p, opts.format)).collect::<Result<Vec<_>>>()?;
    let global = global_range(&fields);
    let mut out = Vec::with_capacity(fields.len());
    let mut degenerate = Vec::with_capacity(fields.len());
    for f in &fields {
        let mode = match opts.normalize {
            NormalizeArg::None => {
                out.push(if opts.rescale_geometry { rescale_geometry_of(f) } else { f.clone() });
                degenerate.push(false);
                continue;
            }
            NormalizeArg::PerField => Normalization::PerField,
            NormalizeArg::Global => Normalization::Global { min: global.0, max: global.1 },
        };
        let n = normalize_field(f, mode, opts.rescale_geometry)?;
        out.push(n.field);
        degenerate.push(n.degenerate);
    }
    Ok((out, degenerate))
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "field".into())
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    Ok(BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?))
}

fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<()> {
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn read_grid(path: &Path) -> Result<TransformGrid> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    lio::parse_grid(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_distances(path: &Path) -> Result<DistanceMatrix> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    lio::parse_distance_csv(&text).with_context(|| format!("parsing {}", path.display()))
}

fn cmd_ingest(out: &Path, a: &IngestArgs) -> Result<serde_json::Value> {
    let (fields, degenerate) = load_fields(std::slice::from_ref(&a.input), &a.field)?;
    let f = &fields[0];
    let name = format!("{}.mesh", stem(&a.input));
    let mut w = create(out, &name)?;
    lio::write_mesh(f, &mut w)?;
    w.flush()?;
    let (lo, hi) = f.value_range();
    Ok(json!({
        "output": name,
        "dim": f.dim(),
        "vertices": f.num_vertices(),
        "f_vector": f.complex().f_vector(),
        "euler_characteristic": f.complex().euler_characteristic(),
        "value_range": [lo, hi],
        "degenerate": degenerate[0],
    }))
}

fn cmd_transform(out: &Path, a: &TransformArgs) -> Result<serde_json::Value> {
    let (fields, degenerate) = load_fields(&a.inputs, &a.field)?;
    let dim = fields[0].dim();
    if fields.iter().any(|f| f.dim() != dim) {
        bail!(lect::Error::InvalidParameter("all inputs must have the same dimension".into()));
    }
    let (mut n_dirs, mut n_heights, mut thresholds) = (if dim == 2 { 64 } else { 362 }, 100, default_thresholds(30));
    match a.preset {
        Some(Preset::Sim3d) => (n_dirs, n_heights, thresholds) = (362, 100, default_thresholds(30)),
        Some(Preset::Mri) => {
            (n_dirs, n_heights) = (362, 100);
            thresholds = MRI_THRESHOLDS.iter().map(|t| t / MRI_SCALE).collect();
        }
        None => {}
    }
    n_dirs = a.directions.unwrap_or(n_dirs);
    n_heights = a.heights.unwrap_or(n_heights);
    if let Some(n) = a.thresholds {
        thresholds = default_thresholds(n);
    }
    if let Some(list) = &a.threshold_list {
        thresholds = list.clone();
    }
    let kind = match a.kind {
        KindArg::Select => TransformKind::Select,
        KindArg::Lect => TransformKind::Lect,
        KindArg::Ect => TransformKind::Ect,
    };
    let req = shared_request(kind, &fields, make_directions(dim, n_dirs)?, n_heights, thresholds)?;
    let mut outputs = Vec::new();
    for (path, f) in a.inputs.iter().zip(&fields) {
        let grid = transform_field(f, &req)?;
        let name = format!("{}.grid", stem(path));
        let mut w = create(out, &name)?;
        lio::write_grid(&grid, &mut w)?;
        w.flush()?;
        if a.csv {
            let mut w = create(out, &format!("{}.grid.csv", stem(path)))?;
            lio::write_grid_csv(&grid, &mut w)?;
            w.flush()?;
        }
        outputs.push(name);
    }
    Ok(json!({
        "kind": kind.name(),
        "axes": [req.directions.len(), req.heights.len(), req.thresholds.len()],
        "height_range": [req.heights[0], req.heights[req.heights.len() - 1]],
        "thresholds": req.thresholds,
        "outputs": outputs,
        "degenerate_inputs": a.inputs.iter().zip(&degenerate).filter(|(_, d)| **d).map(|(p, _)| p.display().to_string()).collect::<Vec<_>>(),
    }))
}

fn cmd_dist(out: &Path, a: &DistArgs) -> Result<serde_json::Value> {
    let grids = a.grids.iter().map(|p| read_grid(p)).collect::<Result<Vec<_>>>()?;
    let ids: Vec<String> = a.grids.iter().map(|p| stem(p)).collect();
    let d = if a.marginal {
        let curves = grids.iter().map(marginal_curves).collect::<lect::Result<Vec<_>>>()?;
        let mut err = None;
        let d = DistanceMatrix::from_fn(ids, |i, j| {
            marginal_distance(&curves[i], &curves[j], a.p).unwrap_or_else(|e| {
                err.get_or_insert(e);
                0.0
            })
        });
        if let Some(e) = err {
            return Err(e.into());
        }
        d?
    } else {
        let opts = DistanceOptions {
            p: a.p,
            rule: match a.rule {
                RuleArg::Trapezoid => ThresholdRule::Trapezoid,
                RuleArg::Step => ThresholdRule::Step,
            },
            normalized: a.normalized,
        };
        distance_matrix(ids, &grids, &opts)?
    };
    let mut w = create(out, &a.output)?;
    lio::write_distance_csv(&d, &mut w)?;
    w.flush()?;
    Ok(json!({ "output": a.output, "n": d.len() }))
}

fn cmd_marginal(out: &Path, a: &MarginalArgs) -> Result<serde_json::Value> {
    let m = marginal_curves(&read_grid(&a.grid)?)?;
    let name = format!("{}.marginal.csv", stem(&a.grid));
    let mut w = create(out, &name)?;
    lio::write_marginal_csv(&m, &mut w)?;
    w.flush()?;
    Ok(json!({ "output": name }))
}

fn cmd_align(out: &Path, a: &AlignArgs) -> Result<serde_json::Value> {
    let al = align_2d(&read_grid(&a.a)?, &read_grid(&a.b)?, a.p)?;
    let report = json!({ "shift": al.shift, "distance": al.distance, "profile": al.profile });
    write_json(out, "align.json", &report)?;
    Ok(report)
}

fn cmd_simulate(out: &Path, a: &SimulateArgs) -> Result<serde_json::Value> {
    let suite = gen_field_suite(a.n_per_family, a.setup, a.seed)?;
    let mut manifest = create(out, "manifest.csv")?;
    writeln!(manifest, "id,family,alpha,beta,gamma,delta,noise_sd,seed,file")?;
    for m in &suite {
        let file = format!("{}.voxel", m.id);
        let mut w = create(out, &file)?;
        lio::write_voxel(&m.grid, &mut w)?;
        w.flush()?;
        let s = &m.spec;
        writeln!(
            manifest,
            "{},{},{},{},{},{},{},{},{file}",
            m.id, m.family, s.alpha, s.beta, s.gamma, s.delta, s.noise_sd, s.seed
        )?;
    }
    manifest.flush()?;
    Ok(json!({ "fields": suite.len(), "manifest": "manifest.csv" }))
}

fn cmd_cluster(out: &Path, a: &ClusterArgs) -> Result<serde_json::Value> {
    let d = read_distances(&a.distances)?;
    if d.len() < 2 {
        bail!(lect::Error::InvalidParameter("clustering needs at least two points".into()));
    }
    let coords = classical_mds(&d, a.mds_dim);
    let mut w = create(out, "mds.csv")?;
    lio::write_coords_csv(d.ids(), &coords, &mut w)?;
    w.flush()?;
    let linkage = match a.linkage {
        LinkageArg::Average => Linkage::Average,
        LinkageArg::Single => Linkage::Single,
        LinkageArg::Complete => Linkage::Complete,
    };
    let tree = hierarchical_cluster(&d, linkage);
    let mut w = create(out, "merges.csv")?;
    lio::write_merges_csv(&tree, &mut w)?;
    w.flush()?;
    let labels = cut_tree(&tree, a.k)?;
    let mut w = create(out, "clusters.csv")?;
    writeln!(w, "id,cluster")?;
    for (id, l) in d.ids().iter().zip(&labels) {
        writeln!(w, "{id},{l}")?;
    }
    w.flush()?;
    Ok(json!({ "outputs": ["mds.csv", "merges.csv", "clusters.csv"], "linkage": linkage.name(), "k": a.k }))
}

/// Reads an `id,label` CSV and returns the indices of the labeled ids in
/// `ids` together with their labels. Unlabeled ids are left out.
fn read_labels(path: &Path, ids: &[String]) -> Result<(Vec<usize>, Vec<i8>)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut map = std::collections::HashMap::new();
    for (n, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let (id, label) = line
            .split_once(',')
            .ok_or_else(|| lect::Error::Parse { line: n + 1, msg: "expected `id,label`".into() })?;
        let label: i8 = label
            .trim()
            .parse()
            .map_err(|_| lect::Error::Parse { line: n + 1, msg: format!("bad label {label:?}") })?;
        map.insert(id.trim().to_string(), label);
    }
    if let Some(id) = map.keys().find(|id| !ids.contains(id)) {
        return Err(lect::Error::InvalidParameter(format!("label for unknown id {id}")).into());
    }
    Ok(ids.iter().enumerate().filter_map(|(i, id)| map.get(id).map(|&l| (i, l))).unzip())
}

fn cmd_classify(out: &Path, a: &ClassifyArgs) -> Result<serde_json::Value> {
    let d = read_distances(&a.distances)?;
    let (idx, labels) = read_labels(&a.labels, d.ids())?;
    let d = d.submatrix(&idx);
    let report = classify(&d, &labels, a.train_fraction, a.c, a.seed)?;
    write_json(out, "classify.json", &report)?;
    Ok(json!({ "auc": report.auc, "ci": [report.ci_low, report.ci_high], "n": idx.len(), "output": "classify.json" }))
}

fn cmd_verify(out: &Path, a: &VerifyArgs) -> Result<serde_json::Value> {
    let f = load_pl(&a.input, a.format)?;
    let dirs = make_directions(f.dim(), a.directions)?;
    let report = verify_class(&f, &a.moduli.params(), &dirs, &default_thresholds(a.thresholds), a.samples, a.seed)?;
    write_json(out, "class_report.json", &report)?;
    Ok(json!({
        "cond1": report.cond1,
        "cond2": report.cond2,
        "cond3": report.cond3,
        "cond4": report.cond4,
        "cond4_pass": report.cond4_pass,
        "overall": report.overall,
        "output": "class_report.json",
    }))
}

fn cmd_bound(a: &BoundArgs) -> Result<serde_json::Value> {
    Ok(serde_json::to_value(delta_bound(&a.moduli.params())?)?)
}

fn cmd_euler_curve(out: &Path, a: &EulerCurveArgs) -> Result<serde_json::Value> {
    let f = load_pl(&a.input, a.format)?;
    let norm = a.direction.iter().map(|x| x * x).sum::<f64>().sqrt();
    if a.direction.len() != f.dim() || !(norm > 0.0 && norm.is_finite()) {
        bail!(lect::Error::InvalidParameter(format!("direction must be a nonzero {}-vector", f.dim())));
    }
    let v: Vec<f64> = a.direction.iter().map(|x| x / norm).collect();
    let curve = euler_scan(&f, &v, a.threshold)?;
    let name = format!("{}.curve.csv", stem(&a.input));
    let mut w = create(out, &name)?;
    writeln!(w, "height,value")?;
    for (h, value) in curve.jumps() {
        writeln!(w, "{h},{value}")?;
    }
    w.flush()?;
    Ok(json!({ "direction": v, "threshold": a.threshold, "jumps": curve.jumps(), "final_value": curve.final_value(), "output": name }))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Ingest(_) => "ingest",
        Command::Transform(_) => "transform",
        Command::Dist(_) => "dist",
        Command::Marginal(_) => "marginal",
        Command::Align2d(_) => "align2d",
        Command::Simulate(_) => "simulate",
        Command::Cluster(_) => "cluster",
        Command::Classify(_) => "classify",
        Command::VerifyClass(_) => "verify-class",
        Command::Bound(_) => "bound",
        Command::EulerCurve(_) => "euler-curve",
    }
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let out = cli.out_dir.as_path();
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let summary = match &cli.command {
        Command::Ingest(a) => cmd_ingest(out, a)?,
        Command::Transform(a) => cmd_transform(out, a)?,
        Command::Dist(a) => cmd_dist(out, a)?,
        Command::Marginal(a) => cmd_marginal(out, a)?,
        Command::Align2d(a) => cmd_align(out, a)?,
        Command::Simulate(a) => cmd_simulate(out, a)?,
        Command::Cluster(a) => cmd_cluster(out, a)?,
        Command::Classify(a) => cmd_classify(out, a)?,
        Command::VerifyClass(a) => cmd_verify(out, a)?,
        Command::Bound(a) => cmd_bound(a)?,
        Command::EulerCurve(a) => cmd_euler_curve(out, a)?,
    };
    let name = command_name(&cli.command);
    let manifest = json!({
        "tool": "lect",
        "version": env!("CARGO_PKG_VERSION"),
        "subcommand": name,
        "arguments": &cli.command,
        "result": &summary,
    });
    write_json(out, &format!("manifest-{name}.json"), &manifest)?;
    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "{}", serde_json::to_string_pretty(&summary)?).context("writing the summary")?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let internal = e.chain().any(|c| c.downcast_ref::<lect::Error>().is_some_and(|le| !le.is_input_error()));
            ExitCode::from(if internal { 3 } else { 2 })
        }
    }
}
