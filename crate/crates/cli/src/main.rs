//! `rgw`: enumerate, measure and glue strata, and compute Floer and
//! spectral-sequence data from JSON inputs.
//!
//! Every verb writes one JSON document to stdout. Exit status is 0 on
//! success, 1 when the input is well formed but fails a check, and 2 on
//! usage errors (bad flags, unreadable files, malformed JSON).

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use rgw::divisor_trees::{enumerate_sd, DetailedTree, RibbonKind, SdBounds, SplittingTable};
use rgw::floer::{d_squared_audit, floer_homology, floer_homology_novikov, monotonicity_audit, FloerData, FloerHomology};
use rgw::io::{self, IoError};
use rgw::novikov::homology_decomposition;
use rgw::palette::validate_palette;
use rgw::spectral::{converge_check, pages, Fringe};
use rgw::strata::{
    boundary_faces, close_under_moves, closure, forget_boundary_mark, glue, level0_edge_shrink, level_shrink, stratum_dimension,
    tree_dimension, Stratum,
};
use rgw::trees::{enumerate, DecoratedTree, EnumBounds, TreeType};
use rgw::{dot, parse_rational, selftest, Palette, QFilteredComplex, QGappedComplex, Q, SCHEMA};

#[derive(Parser, Debug)]
#[command(name = "rgw", version, about = "Strata of relative stable maps and Floer-type homological algebra")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Compact single-line JSON instead of pretty-printed.
    #[arg(long, global = true)]
    json: bool,
    /// Graphviz output instead of JSON, where the verb has a picture.
    #[arg(long, global = true)]
    dot: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a palette and optionally a tree, counts file or complex against it.
    Validate {
        #[arg(long)]
        palette: Option<PathBuf>,
        #[arg(long)]
        tree: Option<PathBuf>,
        #[arg(long)]
        counts: Option<PathBuf>,
        #[arg(long)]
        complex: Option<PathBuf>,
    },
    /// Enumerate decorated trees of a type (`--alpha`, `--m`) or strip trees (`--from`, `--to`).
    Enum {
        #[arg(long)]
        palette: PathBuf,
        #[arg(long)]
        alpha: Option<String>,
        /// Multiplicities, input first, e.g. `--m=-3,-1`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        m: Vec<i64>,
        #[arg(long)]
        from: Option<String>,
        #[arg(long)]
        to: Option<String>,
        #[command(flatten)]
        bounds: Bounds,
    },
    /// Dimension of the stratum of a tree.
    Dim {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        palette: Option<PathBuf>,
        /// Complex dimension of the ambient space.
        #[arg(long, default_value_t = 2)]
        n: i64,
    },
    /// One-step shrinkings of a tree, or a specific one.
    Shrink {
        #[arg(long)]
        tree: PathBuf,
        /// Merge levels `i` and `i+1` (`0` for the ribbon level on ribbon trees).
        #[arg(long)]
        level: Option<usize>,
        /// Contract the level-0 edge into this vertex (ribbon trees).
        #[arg(long)]
        edge: Option<usize>,
    },
    /// The strata whose closure meets the given one, within enumeration bounds.
    Closure {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        palette: PathBuf,
        #[command(flatten)]
        bounds: Bounds,
    },
    /// Codimension-one faces of the strip moduli of a tree's type.
    Boundary {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        palette: PathBuf,
        #[command(flatten)]
        bounds: Bounds,
    },
    /// Glue two strip trees end to end over every merge of their levels.
    Glue {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
    },
    /// Forget the `j`-th boundary mark of a disc tree.
    Forget {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        mark: usize,
    },
    /// Betti number and torsion of a gapped complex over the Novikov ring.
    Homology {
        #[arg(long)]
        complex: PathBuf,
        /// Truncate the differential to exponents at most this value first.
        #[arg(long)]
        energy_cut: Option<String>,
    },
    /// Floer boundary from counts: square audit and homology.
    Floer {
        #[arg(long)]
        counts: PathBuf,
        #[arg(long)]
        palette: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Rational)]
        mode: Mode,
        #[arg(long)]
        energy_cut: Option<String>,
    },
    /// Page table of the spectral sequence of a filtered complex.
    Ss {
        #[arg(long)]
        complex: PathBuf,
        #[arg(long, value_enum, default_value_t = FringeArg::Image)]
        fringe: FringeArg,
        /// Last page to print.
        #[arg(long)]
        r_max: Option<usize>,
    },
    /// Run the seeded property suites.
    Selftest {
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

#[derive(Args, Debug, Clone, Copy)]
struct Bounds {
    /// Interior vertices (strip trees) or inside vertices (decorated trees).
    #[arg(long, default_value_t = 3)]
    max_vertices: usize,
    #[arg(long, default_value_t = 2)]
    max_levels: usize,
    #[arg(long, default_value_t = 1)]
    max_divisor: usize,
    #[arg(long, default_value_t = 1)]
    max_marks: usize,
}

impl Bounds {
    fn sd(self) -> SdBounds {
        SdBounds {
            max_interior: self.max_vertices,
            max_levels: self.max_levels,
            max_divisor: self.max_divisor,
            max_marks: self.max_marks,
            ..SdBounds::default()
        }
    }

    fn decorated(self) -> EnumBounds {
        EnumBounds { max_inside: self.max_vertices, max_levels: self.max_levels, ..EnumBounds::default() }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Rational,
    Novikov,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum FringeArg {
    Image,
    Kernel,
}

#[derive(Debug)]
enum Failure {
    /// Exit 2.
    Usage(String),
    /// Exit 1, with a JSON body on stdout.
    Invalid(Value),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => f.write_str(m),
            Failure::Invalid(v) => write!(f, "{v}"),
        }
    }
}

fn invalid(message: impl fmt::Display) -> Failure {
    Failure::Invalid(json!({ "ok": false, "error": message.to_string() }))
}

fn from_io(path: &Path, e: IoError) -> Failure {
    match &e {
        IoError::Json(j) if j.is_syntax() || j.is_eof() => Failure::Usage(format!("{}: {e}", path.display())),
        _ => invalid(format!("{}: {e}", path.display())),
    }
}

enum Output {
    Json(Value),
    Dot(String),
}

type Outcome = Result<Output, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_palette(path: Option<&Path>) -> Result<Palette, Failure> {
    match path {
        Some(p) => Palette::from_json(&read(p)?).map_err(|e| from_io(p, e)),
        None => Ok(Palette::new([])),
    }
}

enum Tree {
    Decorated(DecoratedTree),
    Ribbon(DetailedTree),
}

fn load_tree(path: &Path) -> Result<Tree, Failure> {
    let text = read(path)?;
    let value: Value = serde_json::from_str(&text).map_err(|e| from_io(path, e.into()))?;
    if value.get("edges").is_some() {
        io::decorated_tree_from_json(&text).map(Tree::Decorated).map_err(|e| from_io(path, e))
    } else {
        io::ribbon_tree_from_json(&text).map(Tree::Ribbon).map_err(|e| from_io(path, e))
    }
}

fn load_ribbon(path: &Path) -> Result<DetailedTree, Failure> {
    match load_tree(path)? {
        Tree::Ribbon(t) => Ok(t),
        Tree::Decorated(_) => Err(invalid(format!("{}: expected a ribbon tree", path.display()))),
    }
}

enum Complex {
    Filtered(QFilteredComplex),
    Gapped(QGappedComplex),
}

fn load_complex(path: &Path) -> Result<Complex, Failure> {
    let text = read(path)?;
    let value: Value = serde_json::from_str(&text).map_err(|e| from_io(path, e.into()))?;
    if value.get("basis").is_some() {
        io::filtered_from_json(&text).map(Complex::Filtered).map_err(|e| from_io(path, e))
    } else {
        io::gapped_from_json(&text).map(Complex::Gapped).map_err(|e| from_io(path, e))
    }
}

fn rational_arg(s: Option<&str>) -> Result<Option<Q>, Failure> {
    s.map(|s| parse_rational(s).ok_or_else(|| Failure::Usage(format!("not a rational: `{s}`")))).transpose()
}

fn ribbon_json(t: &DetailedTree) -> Value {
    let mut v = io::ribbon_tree_to_json(t);
    v["key"] = json!(t.canonical_form());
    v
}

fn decorated_json(t: &DecoratedTree) -> Value {
    let mut v = io::decorated_tree_to_json(t);
    v["key"] = json!(t.canonical_form());
    v
}

fn tree_json(t: &Tree) -> Value {
    match t {
        Tree::Decorated(d) => decorated_json(d),
        Tree::Ribbon(r) => ribbon_json(r),
    }
}

fn trees_dot(trees: &[Tree]) -> String {
    trees
        .iter()
        .map(|t| match t {
            Tree::Decorated(d) => dot::decorated_tree(d),
            Tree::Ribbon(r) => dot::ribbon_tree(r),
        })
        .collect()
}

fn trees_output(trees: Vec<Tree>, as_dot: bool) -> Output {
    if as_dot {
        Output::Dot(trees_dot(&trees))
    } else {
        Output::Json(json!({ "count": trees.len(), "trees": trees.iter().map(tree_json).collect::<Vec<_>>() }))
    }
}

fn validate(palette: Option<&Path>, tree: Option<&Path>, counts: Option<&Path>, complex: Option<&Path>) -> Outcome {
    let p = load_palette(palette)?;
    let mut report = serde_json::Map::new();
    let mut ok = true;
    if palette.is_some() {
        let v = validate_palette(&p);
        ok &= v.is_empty();
        report.insert("palette".into(), json!(v));
    }
    if let Some(path) = tree {
        let v = match load_tree(path)? {
            Tree::Decorated(t) => json!(t.validate(&p)),
            Tree::Ribbon(t) => json!(t.validate(&p)),
        };
        ok &= v.as_array().is_some_and(Vec::is_empty);
        report.insert("tree".into(), v);
    }
    if let Some(path) = counts {
        let data = io::floer_from_json(&read(path)?).map_err(|e| from_io(path, e))?;
        let v: Vec<String> = data.validate(&p).err().map(|e| e.to_string()).into_iter().collect();
        ok &= v.is_empty();
        report.insert("counts".into(), json!(v));
    }
    if let Some(path) = complex {
        let v: Vec<String> = match load_complex(path)? {
            Complex::Filtered(c) => c.validate().err().map(|e| e.to_string()),
            Complex::Gapped(c) => c.validate().err().map(|e| e.to_string()),
        }
        .into_iter()
        .collect();
        ok &= v.is_empty();
        report.insert("complex".into(), json!(v));
    }
    report.insert("ok".into(), json!(ok));
    let body = Value::Object(report);
    if ok {
        Ok(Output::Json(body))
    } else {
        Err(Failure::Invalid(body))
    }
}

fn enumerate_trees(
    palette: &Path,
    alpha: Option<&str>,
    m: &[i64],
    ends: (Option<&str>, Option<&str>),
    bounds: Bounds,
    as_dot: bool,
) -> Outcome {
    let p = load_palette(Some(palette))?;
    let trees: Vec<Tree> = match (alpha, ends) {
        (Some(a), _) => {
            let alpha = a.parse().map_err(|e| Failure::Usage(format!("--alpha: {e}")))?;
            let ty = TreeType::new(alpha, m.to_vec());
            enumerate(&ty, &p, &bounds.decorated()).map_err(invalid)?.into_iter().map(Tree::Decorated).collect()
        }
        (None, (Some(from), Some(to))) => {
            enumerate_sd(&p, from, to, &bounds.sd()).map_err(invalid)?.into_iter().map(Tree::Ribbon).collect()
        }
        _ => return Err(Failure::Usage("enum needs --alpha (with --m) or both --from and --to".into())),
    };
    Ok(trees_output(trees, as_dot))
}

fn dimension(tree: &Path, palette: Option<&Path>, n: i64) -> Outcome {
    let p = load_palette(palette)?;
    let report = match load_tree(tree)? {
        Tree::Decorated(t) => tree_dimension(&t, &p, n),
        Tree::Ribbon(t) => stratum_dimension(&t, &p, n),
    }
    .map_err(invalid)?;
    Ok(Output::Json(json!({
        "sum": report.sum_dimension,
        "quotient": report.quotient_dimension,
        "closed_form": report.closed_form,
        "levels": report.levels,
        "corner_codim": report.corner_codim,
        "report": report,
    })))
}

fn shrink(tree: &Path, level: Option<usize>, edge: Option<usize>, as_dot: bool) -> Outcome {
    let results: Vec<Tree> = match (load_tree(tree)?, level, edge) {
        (_, Some(_), Some(_)) => return Err(Failure::Usage("give at most one of --level and --edge".into())),
        (Tree::Decorated(t), None, None) => t.shrink_moves().into_iter().map(Tree::Decorated).collect(),
        (Tree::Decorated(t), Some(i), None) => vec![Tree::Decorated(t.shrink_levels(i).map_err(invalid)?)],
        (Tree::Decorated(_), None, Some(_)) => return Err(Failure::Usage("--edge needs a ribbon tree".into())),
        (Tree::Ribbon(t), None, None) => t.moves().into_iter().map(Tree::Ribbon).collect(),
        (Tree::Ribbon(t), Some(i), None) => vec![Tree::Ribbon(level_shrink(&t, i).map_err(invalid)?)],
        (Tree::Ribbon(t), None, Some(v)) => vec![Tree::Ribbon(level0_edge_shrink(&t, v).map_err(invalid)?)],
    };
    Ok(trees_output(results, as_dot))
}

/// Strip trees of the same type as `t` within bounds, closed under shrinking, `t` included.
fn strip_universe(t: &DetailedTree, p: &Palette, bounds: Bounds) -> Result<Vec<DetailedTree>, Failure> {
    let RibbonKind::Strip { from, to } = &t.kind else {
        return Err(invalid("closure and boundary need a strip tree"));
    };
    let mut seeds = enumerate_sd(p, from, to, &bounds.sd()).map_err(invalid)?;
    seeds.push(t.clone());
    let ty = t.type_key();
    Ok(close_under_moves(&seeds).into_iter().filter(|s| s.type_key() == ty).collect())
}

fn closure_of(tree: &Path, palette: &Path, bounds: Bounds) -> Outcome {
    let p = load_palette(Some(palette))?;
    let (keys, universe) = match load_tree(tree)? {
        Tree::Ribbon(t) => {
            let universe = strip_universe(&t, &p, bounds)?;
            let members = closure(&t, &universe).map_err(invalid)?;
            (members.iter().map(|&i| universe[i].key()).collect::<Vec<_>>(), universe.len())
        }
        Tree::Decorated(t) => {
            let mut seeds = enumerate(&t.tree_type(), &p, &bounds.decorated()).map_err(invalid)?;
            seeds.push(t.clone());
            let universe = close_under_moves(&seeds);
            let members = closure(&t, &universe).map_err(invalid)?;
            (members.iter().map(|&i| universe[i].key()).collect(), universe.len())
        }
    };
    Ok(Output::Json(json!({ "universe": universe, "count": keys.len(), "closure": keys })))
}

fn boundary(tree: &Path, palette: &Path, bounds: Bounds, as_dot: bool) -> Outcome {
    let p = load_palette(Some(palette))?;
    let t = load_ribbon(tree)?;
    let ty = t.ribbon_type();
    let universe = strip_universe(&t, &p, bounds)?;
    let table = SplittingTable::from_palette(&p, ty.beta.atom_count().max(1) as usize).map_err(invalid)?;
    let census = boundary_faces(&ty, &p, &table, &universe).map_err(invalid)?;
    if as_dot {
        return Ok(Output::Dot(dot::face_lattice(&census, &ty.to_string())));
    }
    let faces: Vec<Value> = census
        .faces
        .iter()
        .map(|f| {
            json!({
                "kind": f.kind(),
                "class": f.data.class().to_string(),
                "data": format!("{:?}", f.data),
                "template": ribbon_json(&f.template),
                "members": f.members.len(),
            })
        })
        .collect();
    Ok(Output::Json(json!({
        "type": ty.to_string(),
        "universe": universe.len(),
        "faces": faces,
        "rejected": census.rejected,
        "unassigned": census.unassigned.len(),
    })))
}

fn glue_trees(left: &Path, right: &Path, as_dot: bool) -> Outcome {
    let (l, r) = (load_ribbon(left)?, load_ribbon(right)?);
    let glued = glue(&l, &r).map_err(invalid)?;
    if as_dot {
        return Ok(Output::Dot(glued.iter().map(|g| dot::ribbon_tree(&g.tree)).collect()));
    }
    let results: Vec<Value> = glued.iter().map(|g| json!({ "h": g.h, "levels": g.levels, "tree": ribbon_json(&g.tree) })).collect();
    Ok(Output::Json(json!({ "count": results.len(), "results": results })))
}

fn forget(tree: &Path, mark: usize, as_dot: bool) -> Outcome {
    let t = load_ribbon(tree)?;
    let f = forget_boundary_mark(&t, mark).map_err(invalid)?;
    if as_dot {
        return Ok(Output::Dot(dot::ribbon_tree(&f.tree)));
    }
    Ok(Output::Json(json!({ "case": f.case, "k": f.tree.ribbon_type().k(), "tree": ribbon_json(&f.tree) })))
}

fn strings(xs: &[Q]) -> Vec<String> {
    xs.iter().map(Q::to_string).collect()
}

fn homology(complex: &Path, energy_cut: Option<&str>) -> Outcome {
    let Complex::Gapped(mut c) = load_complex(complex)? else {
        return Err(invalid("homology needs a gapped complex"));
    };
    if let Some(cut) = rational_arg(energy_cut)? {
        c = c.energy_cut(&cut).map_err(invalid)?;
    }
    let dec = homology_decomposition(&c, None).map_err(invalid)?;
    Ok(Output::Json(json!({ "betti": dec.betti, "torsion": strings(&dec.torsion) })))
}

fn homology_json(h: &FloerHomology) -> Value {
    json!({ "generators": h.generators, "rank": h.rank, "torsion": strings(&h.torsion), "rank_bound_ok": h.rank_bound_ok })
}

fn floer(counts: &Path, palette: &Path, mode: Mode, energy_cut: Option<&str>) -> Outcome {
    let p = load_palette(Some(palette))?;
    let data: FloerData = io::floer_from_json(&read(counts)?).map_err(|e| from_io(counts, e))?;
    data.validate(&p).map_err(invalid)?;
    let cut = rational_arg(energy_cut)?;
    let audit = d_squared_audit(&data, &p).map_err(invalid)?;
    let mut body = json!({
        "audit": {
            "expected": audit.expected.to_string(),
            "scalar": audit.scalar.as_ref().map(Q::to_string),
            "offending": audit.offending,
            "passed": audit.passed(),
        },
    });
    let mut ok = audit.passed();
    if let Some(c) = &data.monotonicity {
        let m = monotonicity_audit(&data, &p, c).map_err(invalid)?;
        ok &= m.consistent();
        body["monotonicity"] = json!({ "consistent": m.consistent(), "witness": m.witness.as_ref().map(|w| format!("{w:?}")) });
    }
    let h = match mode {
        Mode::Rational => floer_homology(&data, &p),
        Mode::Novikov => floer_homology_novikov(&data, &p, cut.as_ref()),
    };
    match h {
        Ok(h) => {
            ok &= h.rank_bound_ok;
            body["homology"] = homology_json(&h);
        }
        Err(e) => {
            ok = false;
            body["error"] = json!(e.to_string());
        }
    }
    body["ok"] = json!(ok);
    if ok {
        Ok(Output::Json(body))
    } else {
        Err(Failure::Invalid(body))
    }
}

fn degree_map(m: &std::collections::BTreeMap<i64, usize>) -> Value {
    Value::Object(m.iter().map(|(d, n)| (d.to_string(), json!(n))).collect())
}

fn spectral(complex: &Path, fringe: FringeArg, r_max: Option<usize>) -> Outcome {
    let Complex::Filtered(fc) = load_complex(complex)? else {
        return Err(invalid("ss needs a filtered complex"));
    };
    let fringe = match fringe {
        FringeArg::Image => Fringe::Image,
        FringeArg::Kernel => Fringe::Kernel,
    };
    let table = pages(&fc, r_max, fringe).map_err(invalid)?;
    let report = converge_check(&fc, fringe).map_err(invalid)?;
    let rows: Vec<Value> = table
        .iter()
        .map(|page| {
            let ranks: Vec<Value> = page.differentials.iter().map(|(p, d)| json!({ "from": p, "rank": d.rank() })).collect();
            json!({ "page": page.r, "dims": degree_map(&page.dims), "total": page.total(), "differentials": ranks })
        })
        .collect();
    let body = json!({
        "pages": rows,
        "e_infinity": degree_map(&report.e_infinity),
        "stable_page": report.stable_page,
        "d0_homology": degree_map(&report.d0_homology),
        "total_homology": report.total_homology,
        "converges": report.passed(),
    });
    if report.passed() {
        Ok(Output::Json(body))
    } else {
        Err(Failure::Invalid(body))
    }
}

fn run_selftest(seed: u64) -> Outcome {
    let report = selftest::run(seed);
    let body = serde_json::to_value(&report).map_err(invalid)?;
    if report.passed() {
        Ok(Output::Json(body))
    } else {
        Err(Failure::Invalid(body))
    }
}

fn run(cli: &Cli) -> Outcome {
    let as_dot = cli.dot;
    match &cli.command {
        Command::Validate { palette, tree, counts, complex } => {
            validate(palette.as_deref(), tree.as_deref(), counts.as_deref(), complex.as_deref())
        }
        Command::Enum { palette, alpha, m, from, to, bounds } => {
            enumerate_trees(palette, alpha.as_deref(), m, (from.as_deref(), to.as_deref()), *bounds, as_dot)
        }
        Command::Dim { tree, palette, n } => dimension(tree, palette.as_deref(), *n),
        Command::Shrink { tree, level, edge } => shrink(tree, *level, *edge, as_dot),
        Command::Closure { tree, palette, bounds } => closure_of(tree, palette, *bounds),
        Command::Boundary { tree, palette, bounds } => boundary(tree, palette, *bounds, as_dot),
        Command::Glue { left, right } => glue_trees(left, right, as_dot),
        Command::Forget { tree, mark } => forget(tree, *mark, as_dot),
        Command::Homology { complex, energy_cut } => homology(complex, energy_cut.as_deref()),
        Command::Floer { counts, palette, mode, energy_cut } => floer(counts, palette, *mode, energy_cut.as_deref()),
        Command::Ss { complex, fringe, r_max } => spectral(complex, *fringe, *r_max),
        Command::Selftest { seed } => run_selftest(*seed),
    }
}

fn render(v: Value, compact: bool) -> String {
    let v = io::document(v);
    if compact {
        v.to_string()
    } else {
        serde_json::to_string_pretty(&v).unwrap_or_default()
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version.
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let diagnostic = json!({ "schema": SCHEMA, "ok": false, "usage": e.kind().to_string(), "error": e.to_string() });
            eprintln!("{diagnostic}");
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(Output::Json(v)) => {
            println!("{}", render(v, cli.json));
            ExitCode::SUCCESS
        }
        Ok(Output::Dot(d)) => {
            print!("{d}");
            ExitCode::SUCCESS
        }
        Err(Failure::Invalid(v)) => {
            println!("{}", render(v, cli.json));
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("{}", json!({ "schema": SCHEMA, "ok": false, "usage": "input", "error": m }));
            ExitCode::from(2)
        }
    }
}
