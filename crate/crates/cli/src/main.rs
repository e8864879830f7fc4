//! `gsf`: command-line front end for the gsf-core library.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gsf_core::formats::{
    parse_family, parse_graph, parse_hanf, parse_marked_graph, parse_profile, parse_rotation_map, parse_signature,
    parse_structure, write_family, write_graph, write_hanf, write_profile, write_provenance, write_rotation_map,
    write_structure,
};
use gsf_core::gsf::{compile_profile_union, covers_family, find_embedding, is_family_free, UNION_ENVELOPE};
use gsf_core::hanf::{compile_hanf_to_profiles, lift_sentence, Satisfiability};
use gsf_core::harness::{
    always_accept, coin_flip, epsilon_distance_graph, epsilon_distance_structure, propagation_probe, run_trials,
    spectral_gap, Distance, Target, TypeAvoidanceTester, DEFAULT_SET_CAP,
};
use gsf_core::neighborhoods::{
    enumerate_types, exhaustive_supported, graph_histogram, graph_profile_violation, histogram_vector, profile_violation,
    CatalogMode, NeighbourhoodProfile, TypeCatalog,
};
use gsf_core::reduction::{apply_reduction, parse_vertex_id, vertex_id, Layout, QueryTranslator};
use gsf_core::zigzag::{toy_rotation_map, Component, RotationMap, ZigZag, ZigZagSignature};
use gsf_core::{Graph, Signature, Structure};

#[derive(Parser, Debug)]
#[command(name = "gsf", version, about = "Neighbourhood profiles, GSF families, zig-zag models and local reductions")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Degree bound.
    #[arg(long, global = true)]
    d: Option<usize>,
    /// Neighbourhood radius.
    #[arg(long, global = true)]
    r: Option<usize>,
    /// Seed for every random choice; recorded in the output.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for parallel stages.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Size or search budget; meaning depends on the subcommand.
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Output file (stdout if absent).
    #[arg(short = 'o', long = "output", global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the r-types of degree d.
    Types {
        /// Signature for structure types, e.g. `R/2, T/3`; graph types if absent.
        #[arg(long)]
        signature: Option<String>,
    },
    /// Histogram vector of a structure or graph.
    Hist { input: PathBuf },
    /// Does a structure or graph obey a profile?
    Obeys { input: PathBuf, profile: PathBuf },
    /// Compile 0-profiles (their union, if several) into a GSF family.
    CompileGsf {
        #[arg(required = true)]
        profiles: Vec<PathBuf>,
    },
    /// Find an embedding of a marked graph into a graph.
    Embed { marked: PathBuf, graph: PathBuf },
    /// Is a graph free of a family?
    Free { graph: PathBuf, family: PathBuf },
    /// Compile a single-radius Hanf sentence into profiles.
    HanfCompile {
        sentence: PathBuf,
        #[arg(long)]
        signature: Option<String>,
    },
    /// Lift a Hanf sentence to a larger radius.
    Lift {
        sentence: PathBuf,
        #[arg(long)]
        signature: Option<String>,
    },
    /// Generate a canonical zig-zag model, or the toy base map.
    ZzGen {
        /// Base degree.
        #[arg(long = "D")]
        base_degree: Option<usize>,
        #[arg(long, default_value_t = 1)]
        levels: usize,
        /// Base rotation map; the toy map if absent.
        #[arg(long)]
        base: Option<PathBuf>,
        /// Write the base rotation map instead of a model.
        #[arg(long)]
        emit_base: bool,
    },
    /// Run a zig-zag component checker.
    ZzCheck {
        model: PathBuf,
        #[arg(long, default_value = "zigzag")]
        which: String,
        #[arg(long)]
        base: Option<PathBuf>,
    },
    /// Reduce a binary structure to a bounded-degree graph.
    Reduce {
        input: PathBuf,
        /// Provenance sidecar file.
        #[arg(long)]
        provenance: Option<PathBuf>,
    },
    /// Answer a reduced-graph neighbour query through structure queries.
    SimQuery {
        input: PathBuf,
        /// Vertex id (`e:a`, `v:k:a:i`, `w:a:i`) or index.
        #[arg(long)]
        vertex: String,
        /// 1-based port; all ports if absent.
        #[arg(long)]
        port: Option<usize>,
    },
    /// Exact epsilon-distance to a property by exhaustive modification search.
    Dist {
        input: PathBuf,
        /// Zig-zag component name (structures).
        #[arg(long)]
        property: Option<String>,
        /// Profile file: distance to obeying it.
        #[arg(long)]
        profile: Option<PathBuf>,
        /// Family file: distance to freeness (graphs).
        #[arg(long)]
        family: Option<PathBuf>,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        base: Option<PathBuf>,
    },
    /// Run a tester repeatedly and report acceptance statistics.
    Pot {
        input: PathBuf,
        /// always-accept, coin-flip or type-avoidance.
        #[arg(long, default_value = "type-avoidance")]
        tester: String,
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Per-trial query ceiling.
        #[arg(long)]
        ceiling: Option<usize>,
    },
    /// Second-largest absolute eigenvalue of a regular graph's walk matrix.
    Gap { graph: PathBuf },
    /// Does a vertex set cover every embedding of a family?
    Covers {
        graph: PathBuf,
        family: PathBuf,
        /// Comma-separated vertex ids.
        #[arg(long, default_value = "")]
        set: String,
    },
    /// Covers check plus the smallest repair towards freeness.
    Probe {
        graph: PathBuf,
        family: PathBuf,
        #[arg(long, default_value = "")]
        set: String,
    },
}

type Outcome = Result<String, String>;

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn load<T>(path: &Path, parse: impl Fn(&str) -> gsf_core::Result<T>) -> Result<T, String> {
    parse(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

enum Input {
    Structure(Structure),
    Graph(Graph),
}

fn first_content_line(text: &str) -> &str {
    text.lines().map(|l| l.split('#').next().unwrap_or("").trim()).find(|l| !l.is_empty()).unwrap_or("")
}

fn load_input(path: &Path) -> Result<Input, String> {
    let text = read(path)?;
    let wrap = |e: gsf_core::Error| format!("{}: {e}", path.display());
    match first_content_line(&text) {
        "graph v1" => parse_graph(&text).map(Input::Graph).map_err(wrap),
        _ => parse_structure(&text).map(Input::Structure).map_err(wrap),
    }
}

fn load_structure(path: &Path) -> Result<Structure, String> {
    match load_input(path)? {
        Input::Structure(s) => Ok(s),
        Input::Graph(g) => Ok(g.to_structure()),
    }
}

fn load_graph(path: &Path) -> Result<Graph, String> {
    match load_input(path)? {
        Input::Graph(g) => Ok(g),
        Input::Structure(s) => s.as_graph().map_err(|e| format!("{}: {e}", path.display())),
    }
}

fn core(e: gsf_core::Error) -> String {
    e.to_string()
}

fn signature_arg(s: &Option<String>) -> Result<Option<Signature>, String> {
    s.as_deref().map(|t| parse_signature(1, t).map_err(|e| format!("--signature: {e}"))).transpose()
}

fn need(v: Option<usize>, flag: &str) -> Result<usize, String> {
    v.ok_or_else(|| format!("missing --{flag}"))
}

/// Exhaustive catalog when supported, otherwise the types observed in `corpus`.
fn catalog_for(sig: &Signature, d: usize, r: usize, graph: bool, corpus: &[Structure]) -> Result<TypeCatalog, String> {
    let mode = if exhaustive_supported(sig, d, r, graph) { CatalogMode::Exhaustive } else { CatalogMode::Observed(corpus) };
    enumerate_types(sig, d, r, graph, mode).map_err(core)
}

fn exhaustive_catalog(rho: &NeighbourhoodProfile) -> Result<TypeCatalog, String> {
    enumerate_types(&rho.signature, rho.degree, rho.radius, rho.graph, CatalogMode::Exhaustive).map_err(core)
}

fn zigzag_for(sig: &Signature, base: &Option<PathBuf>) -> Result<ZigZag, String> {
    match base {
        Some(p) => ZigZag::new(load(p, parse_rotation_map)?).map_err(core),
        None => {
            let zs = ZigZagSignature::detect(sig).ok_or("structure is not over a zig-zag signature")?;
            ZigZag::toy(zs.base_degree).map_err(core)
        }
    }
}

fn vertex_set(g: &Graph, spec: &str) -> Result<Vec<usize>, String> {
    spec.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| g.index_of(s).ok_or_else(|| format!("unknown vertex `{s}`")))
        .collect()
}

fn bool_line(out: &mut String, key: &str, b: bool) {
    let _ = writeln!(out, "{key}: {b}");
}

fn run(cmd: &Command, c: &Common) -> Outcome {
    let mut out = String::new();
    match cmd {
        Command::Types { signature } => {
            let (d, r) = (need(c.d, "d")?, need(c.r, "r")?);
            let (sig, graph) = match signature_arg(signature)? {
                Some(s) => (s, false),
                None => (Signature::graph(), true),
            };
            let cat = enumerate_types(&sig, d, r, graph, CatalogMode::Exhaustive).map_err(core)?;
            let _ = writeln!(out, "types: {}", cat.len());
            for (key, ball) in cat.entries() {
                let _ = writeln!(out, "type: {key} elements={} tuples={}", ball.structure.len(), ball.structure.tuple_count());
            }
        }
        Command::Hist { input } => {
            let r = need(c.r, "r")?;
            let (hist, cat) = match load_input(input)? {
                Input::Graph(g) => {
                    let d = c.d.unwrap_or(g.degree_bound());
                    let cat = catalog_for(&Signature::graph(), d, r, true, &[g.to_structure()])?;
                    (graph_histogram(&g, &cat).map_err(core)?, cat)
                }
                Input::Structure(s) => {
                    let d = c.d.unwrap_or(s.degree_bound());
                    let graph = s.signature() == &Signature::graph() && s.is_graph_like();
                    let cat = catalog_for(s.signature(), d, r, graph, std::slice::from_ref(&s))?;
                    (histogram_vector(&s, &cat).map_err(core)?, cat)
                }
            };
            let _ = writeln!(out, "catalog: {}", if cat.exhaustive { "exhaustive" } else { "observed" });
            let _ = writeln!(out, "total: {}", hist.total());
            for (key, count) in cat.keys().zip(&hist.counts) {
                let _ = writeln!(out, "type: {key} {count}");
            }
        }
        Command::Obeys { input, profile } => {
            let rho = load(profile, parse_profile)?;
            let violation = match load_input(input)? {
                Input::Graph(g) if rho.graph => graph_profile_violation(&g, &rho, &[]),
                Input::Graph(g) => profile_violation(&g.to_structure(), &rho),
                Input::Structure(s) => profile_violation(&s, &rho),
            };
            bool_line(&mut out, "result", violation.is_none());
            if let Some((key, count)) = violation {
                let _ = writeln!(out, "violation: {key} count {count} outside {}", rho.bound(&key));
            }
        }
        Command::CompileGsf { profiles } => {
            let rhos = profiles.iter().map(|p| load(p, parse_profile)).collect::<Result<Vec<_>, _>>()?;
            let cat = exhaustive_catalog(&rhos[0])?;
            let max = c.budget.map_or(UNION_ENVELOPE, |b| b as usize);
            let fam = compile_profile_union(&rhos, &cat, max).map_err(core)?;
            let _ = writeln!(out, "# members: {}", fam.len());
            out.push_str(&write_family(&fam));
        }
        Command::Embed { marked, graph } => {
            let f = load(marked, parse_marked_graph)?;
            let g = load_graph(graph)?;
            match find_embedding(&f, &g) {
                Some(map) => {
                    bool_line(&mut out, "result", true);
                    for (x, y) in map.iter().enumerate() {
                        let _ = writeln!(out, "map: {} {}", f.graph.id(x), g.id(*y));
                    }
                }
                None => bool_line(&mut out, "result", false),
            }
        }
        Command::Free { graph, family } => {
            let g = load_graph(graph)?;
            let fam = load(family, parse_family)?;
            let free = is_family_free(&g, &fam);
            bool_line(&mut out, "result", free);
            if !free {
                for (i, f) in fam.members.iter().enumerate() {
                    if let Some(map) = find_embedding(f, &g) {
                        let ids: Vec<&str> = map.iter().map(|&v| g.id(v)).collect();
                        let _ = writeln!(out, "witness: member {} at {}", i + 1, ids.join(","));
                        break;
                    }
                }
            }
        }
        Command::HanfCompile { sentence, signature } => {
            let phi = load(sentence, parse_hanf)?;
            let d = need(c.d, "d")?;
            let r = match phi.radii().iter().next() {
                Some(&r) => r,
                None => need(c.r, "r")?,
            };
            let (sig, graph) = match signature_arg(signature)? {
                Some(s) => (s, false),
                None => (Signature::graph(), true),
            };
            let cat = enumerate_types(&sig, d, r, graph, CatalogMode::Exhaustive).map_err(core)?;
            let bound = c.budget.map_or(4, |b| b as usize);
            let compiled = compile_hanf_to_profiles(&phi, &cat, bound).map_err(core)?;
            let _ = writeln!(out, "# profiles: {}", compiled.len());
            let parts: Vec<String> = compiled
                .iter()
                .map(|cd| {
                    let status = match cd.status {
                        Satisfiability::Sat => "sat",
                        Satisfiability::Unknown => "unknown",
                    };
                    format!("# status: {status}\n{}", write_profile(&cd.profile))
                })
                .collect();
            out.push_str(&parts.join("---\n"));
        }
        Command::Lift { sentence, signature } => {
            let phi = load(sentence, parse_hanf)?;
            let (d, r) = (need(c.d, "d")?, need(c.r, "r")?);
            let (sig, graph) = match signature_arg(signature)? {
                Some(s) => (s, false),
                None => (Signature::graph(), true),
            };
            let cat = enumerate_types(&sig, d, r, graph, CatalogMode::Exhaustive).map_err(core)?;
            out.push_str(&write_hanf(&lift_sentence(&phi, r, &cat).map_err(core)?));
        }
        Command::ZzGen { base_degree, levels, base, emit_base } => {
            let rot: RotationMap = match base {
                Some(p) => load(p, parse_rotation_map)?,
                None => toy_rotation_map(need(*base_degree, "D")?).map_err(core)?,
            };
            if let Some(dd) = base_degree {
                if rot.degree() != *dd {
                    return Err(format!("base map has degree {}, not {dd}", rot.degree()));
                }
            }
            if *emit_base {
                out.push_str(&write_rotation_map(&rot));
            } else {
                let zz = ZigZag::new(rot).map_err(core)?;
                let budget = c.budget.map_or(100_000, |b| b as usize);
                out.push_str(&write_structure(&zz.canonical_model(*levels, budget).map_err(core)?));
            }
        }
        Command::ZzCheck { model, which, base } => {
            let a = load(model, parse_structure)?;
            let comp: Component = which.parse().map_err(|e: gsf_core::Error| e.to_string())?;
            let zz = zigzag_for(a.signature(), base)?;
            let violation = zz.check(&a, comp).map_err(core)?;
            bool_line(&mut out, "result", violation.is_none());
            if let Some(v) = violation {
                let _ = writeln!(out, "violation: {}", v.describe(&a));
            }
        }
        Command::Reduce { input, provenance } => {
            let a = load_structure(input)?;
            let rg = apply_reduction(&a).map_err(core)?;
            if let Some(p) = provenance {
                let text = format!("# gsf reduce seed={}\n{}", c.seed, write_provenance(&rg, &a));
                std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display()))?;
            }
            out.push_str(&write_graph(&rg.graph));
        }
        Command::SimQuery { input, vertex, port } => {
            let a = load_structure(input)?;
            let layout = Layout { d: a.degree_bound(), ell: a.signature().len() };
            let v = match vertex.parse::<usize>() {
                Ok(i) if i < a.len() * layout.block() => i,
                Ok(i) => return Err(format!("vertex index {i} outside the reduced graph")),
                Err(_) => layout.index(parse_vertex_id(vertex, &a).map_err(core)?),
            };
            let mut oracle = gsf_core::harness::CountingOracle::structure(&a);
            let mut tr = QueryTranslator::new(&mut oracle).map_err(core)?;
            let ports: Vec<usize> = match port {
                Some(p) => vec![*p],
                None => (1..=gsf_core::reduction::reduced_degree_bound(layout.d, layout.ell)).collect(),
            };
            let _ = writeln!(out, "vertex: {}", vertex_id(layout.decode(v), &a));
            for p in ports {
                let (ans, used) = tr.translate(v, p).map_err(core)?;
                let shown = ans.map_or("none".to_string(), |w| vertex_id(layout.decode(w), &a));
                let _ = writeln!(out, "port: {p} answer: {shown} queries: {used}");
            }
        }
        Command::Dist { input, property, profile, family, eps, base } => {
            let cap = c.budget.unwrap_or(DEFAULT_SET_CAP);
            let chosen = [property.is_some(), profile.is_some(), family.is_some()].iter().filter(|b| **b).count();
            if chosen != 1 {
                return Err("give exactly one of --property, --profile, --family".into());
            }
            let (dist, shown): (Distance, Option<Structure>) = match load_input(input)? {
                Input::Graph(g) => {
                    let dist = if let Some(p) = profile {
                        let rho = load(p, parse_profile)?;
                        epsilon_distance_graph(&g, |h| graph_profile_violation(h, &rho, &[]).is_none(), *eps, cap)
                    } else if let Some(f) = family {
                        let fam = load(f, parse_family)?;
                        epsilon_distance_graph(&g, |h| is_family_free(h, &fam), *eps, cap)
                    } else {
                        return Err("zig-zag properties apply to structures, not graphs".into());
                    };
                    (dist, None)
                }
                Input::Structure(a) => {
                    let dist = if let Some(p) = profile {
                        let rho = load(p, parse_profile)?;
                        epsilon_distance_structure(&a, |b| profile_violation(b, &rho).is_none(), *eps, cap)
                    } else if let Some(name) = property {
                        let comp: Component = name.parse().map_err(|e: gsf_core::Error| e.to_string())?;
                        let zz = zigzag_for(a.signature(), base)?;
                        epsilon_distance_structure(&a, |b| zz.holds(b, comp).unwrap_or(false), *eps, cap)
                    } else {
                        return Err("family freeness applies to graphs".into());
                    };
                    (dist, Some(a))
                }
            };
            match dist {
                Distance::Close(mods) => {
                    let _ = writeln!(out, "result: close");
                    let _ = writeln!(out, "modifications: {}", mods.len());
                    for m in &mods {
                        let _ = writeln!(out, "witness: {}", m.describe_in(shown.as_ref()));
                    }
                }
                Distance::Far => {
                    let _ = writeln!(out, "result: far");
                }
                Distance::Exhausted(n) => {
                    let _ = writeln!(out, "result: exhausted");
                    let _ = writeln!(out, "sets-tried: {n}");
                }
            }
        }
        Command::Pot { input, tester, profile, trials, ceiling } => {
            let inp = load_input(input)?;
            let target = match &inp {
                Input::Graph(g) => Target::Graph(g),
                Input::Structure(s) => Target::Structure(s),
            };
            let report = match tester.as_str() {
                "always-accept" => run_trials(&always_accept, target, *trials, c.seed, *ceiling),
                "coin-flip" => run_trials(&coin_flip, target, *trials, c.seed, *ceiling),
                "type-avoidance" => {
                    let p = profile.as_ref().ok_or("type-avoidance needs --profile")?;
                    let rho = load(p, parse_profile)?;
                    run_trials(&TypeAvoidanceTester { profile: &rho }, target, *trials, c.seed, *ceiling)
                }
                other => return Err(format!("unknown tester `{other}`")),
            }
            .map_err(core)?;
            out.push_str(&report.render());
        }
        Command::Gap { graph } => {
            let g = load_graph(graph)?;
            let lambda = spectral_gap(&g).map_err(core)?;
            let _ = writeln!(out, "lambda: {lambda:.12}");
            let _ = writeln!(out, "gap: {:.12}", 1.0 - lambda);
        }
        Command::Covers { graph, family, set } => {
            let g = load_graph(graph)?;
            let fam = load(family, parse_family)?;
            let b = vertex_set(&g, set)?;
            bool_line(&mut out, "result", covers_family(&g, &b, &fam));
        }
        Command::Probe { graph, family, set } => {
            let g = load_graph(graph)?;
            let fam = load(family, parse_family)?;
            let b = vertex_set(&g, set)?;
            let budget = c.budget.map_or(2, |x| x as usize);
            let rep = propagation_probe(&g, &fam, &b, budget, DEFAULT_SET_CAP);
            bool_line(&mut out, "covers", rep.covers);
            let _ = writeln!(out, "repair: {}", rep.repair.map_or("none".into(), |k| k.to_string()));
            let _ = writeln!(out, "repair-near-set: {}", rep.repair_near_b.map_or("none".into(), |k| k.to_string()));
            bool_line(&mut out, "exhausted", rep.exhausted);
        }
    }
    Ok(out)
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Types { .. } => "types",
        Command::Hist { .. } => "hist",
        Command::Obeys { .. } => "obeys",
        Command::CompileGsf { .. } => "compile-gsf",
        Command::Embed { .. } => "embed",
        Command::Free { .. } => "free",
        Command::HanfCompile { .. } => "hanf-compile",
        Command::Lift { .. } => "lift",
        Command::ZzGen { .. } => "zz-gen",
        Command::ZzCheck { .. } => "zz-check",
        Command::Reduce { .. } => "reduce",
        Command::SimQuery { .. } => "sim-query",
        Command::Dist { .. } => "dist",
        Command::Pot { .. } => "pot",
        Command::Gap { .. } => "gap",
        Command::Covers { .. } => "covers",
        Command::Probe { .. } => "probe",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = run(&cli.command, &cli.common).and_then(|body| {
        let text = format!("# gsf {} seed={}\n{body}", command_name(&cli.command), cli.common.seed);
        match &cli.common.output {
            Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {}", msg.replace('\n', " "));
            ExitCode::from(1)
        }
    }
}
