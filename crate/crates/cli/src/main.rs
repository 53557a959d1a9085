//! Command-line front end: file I/O, metric queries, regularity runs,
//! samplers, and reproducible desk-scale convergence experiments.
//!
//! Exit codes: 0 success, 2 parse/invalid input, 3 resolution or size guard,
//! 4 upper regularity falsified mid-run (certificate written), 5 dominant
//! node.

use graphon_lab::counting::{self, MotifGraph};
use graphon_lab::cutmetric::{self, DeltaOptions};
use graphon_lab::graphon::{embed_graph, StepGraphon};
use graphon_lab::regularity::{self, RegularityParams};
use graphon_lab::sampling::{self, DoublingOptions};
use graphon_lab::upperreg;
use graphon_lab::{Error, WeightedGraph};
use serde_json::json;
use std::collections::BTreeMap;
use std::process::ExitCode;

mod experiment;

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    match run(&argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Parse(_) | Error::InvalidParameter(_) | Error::Io(_) => 2,
        Error::ResolutionGuard { .. }
        | Error::TooManyClasses { .. }
        | Error::TooManyVertices { .. }
        | Error::SizeGuard { .. }
        | Error::EpsTooSmallForGrid => 3,
        Error::UpperRegularityViolated(_) => 4,
        Error::DominantNode { .. } => 5,
        _ => 1,
    }
}

const USAGE: &str = "graphon-lab — Lᵖ graphon toolkit

USAGE: graphon-lab <COMMAND> [OPTIONS]

COMMANDS:
  dist <A> <B>       cut distance between two graph/graphon files
  norms <FILE>       Lᵖ norms and cut norm of a graph or graphon
  regularize <G>     weak regularity partition of a weighted graph
  check-upper <G>    decide/falsify (C,η)-upper Lᵖ regularity
  sample             draw W-random, power-law, clique, doubling graphs
  experiment         run a reproducible experiment, emit CSV
  motif              homomorphism densities of a motif

GLOBAL OPTIONS:
  --seed N           base PRNG seed (default 0)
  --threads N        worker threads for experiment cells (default 1)
  --tolerance X      comparison tolerance in reports (default 1e-9)
  --max-classes N    resolution guard (or GRAPHONLAB_MAX_CLASSES)";

/// Minimal flag parser: `--key value`, `--key=value`, bare `--flag`.
pub struct Args {
    positional: Vec<String>,
    flags: BTreeMap<String, String>,
}

impl Args {
    fn parse(argv: &[String]) -> Result<Args, Error> {
        let mut positional = Vec::new();
        let mut flags = BTreeMap::new();
        let mut it = argv.iter().peekable();
        while let Some(tok) = it.next() {
            if let Some(stripped) = tok.strip_prefix("--") {
                if let Some((k, v)) = stripped.split_once('=') {
                    flags.insert(k.to_string(), v.to_string());
                } else if it.peek().map(|n| !n.starts_with("--")).unwrap_or(false) {
                    flags.insert(stripped.to_string(), it.next().unwrap().clone());
                } else {
                    flags.insert(stripped.to_string(), String::new());
                }
            } else {
                positional.push(tok.clone());
            }
        }
        Ok(Args { positional, flags })
    }

    pub fn has(&self, key: &str) -> bool {
        self.flags.contains_key(key)
    }

    pub fn str_opt(&self, key: &str) -> Option<&str> {
        self.flags.get(key).map(|s| s.as_str())
    }

    pub fn f64_opt(&self, key: &str) -> Result<Option<f64>, Error> {
        match self.flags.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|_| Error::Parse(format!("--{key} expects a number, got `{v}`"))),
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, Error> {
        Ok(self.f64_opt(key)?.unwrap_or(default))
    }

    pub fn f64_required(&self, key: &str) -> Result<f64, Error> {
        self.f64_opt(key)?
            .ok_or_else(|| Error::Parse(format!("missing required flag --{key}")))
    }

    pub fn usize_opt(&self, key: &str) -> Result<Option<usize>, Error> {
        match self.flags.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<usize>()
                .map(Some)
                .map_err(|_| Error::Parse(format!("--{key} expects an integer, got `{v}`"))),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, Error> {
        Ok(self.usize_opt(key)?.unwrap_or(default))
    }

    pub fn seed(&self) -> Result<u64, Error> {
        match self.flags.get("seed") {
            None => Ok(0),
            Some(v) => v
                .parse::<u64>()
                .map_err(|_| Error::Parse(format!("--seed expects an integer, got `{v}`"))),
        }
    }
}

fn run(argv: &[String]) -> Result<(), Error> {
    let Some(command) = argv.first() else {
        println!("{USAGE}");
        return Ok(());
    };
    let args = Args::parse(&argv[1..])?;
    if let Some(v) = args.str_opt("max-classes") {
        std::env::set_var("GRAPHONLAB_MAX_CLASSES", v);
    }
    match command.as_str() {
        "dist" => cmd_dist(&args),
        "norms" => cmd_norms(&args),
        "regularize" => cmd_regularize(&args),
        "check-upper" => cmd_check_upper(&args),
        "sample" => cmd_sample(&args),
        "experiment" => experiment::cmd_experiment(&args),
        "motif" => cmd_motif(&args),
        "--help" | "help" => {
            println!("{USAGE}");
            Ok(())
        }
        other => Err(Error::Parse(format!("unknown command `{other}`"))),
    }
}

/// Read a file as a graphon: TSV graphs are embedded, JSON graphons loaded.
pub fn load_graphon_any(path: &str) -> Result<StepGraphon, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{path}: {e}")))?;
    if text.trim_start().starts_with('{') {
        StepGraphon::from_json(&text)
    } else {
        embed_graph(&WeightedGraph::from_tsv(&text)?)
    }
}

pub fn load_graph(path: &str) -> Result<WeightedGraph, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{path}: {e}")))?;
    WeightedGraph::from_tsv(&text)
}

fn cmd_dist(args: &Args) -> Result<(), Error> {
    let [a, b] = args.positional.as_slice() else {
        return Err(Error::Parse("dist expects two files".into()));
    };
    let u = load_graphon_any(a)?;
    let w = load_graphon_any(b)?;
    let guard = graphon_lab::max_classes();
    if u.num_classes() + w.num_classes() > guard {
        return Err(Error::ResolutionGuard {
            requested: u.num_classes() + w.num_classes(),
            limit: guard,
        });
    }
    let d = cutmetric::d_cut(&u, &w)?;
    let opts = DeltaOptions {
        classes: args.usize_or("delta-classes", 24)?,
        budget: args.usize_or("budget", 8)?,
        seed: args.seed()?,
    };
    let delta = cutmetric::delta_cut_upper(&u, &w, &opts)?;
    let out = json!({
        "d_cut": {"lower": d.lower, "upper": d.upper, "method": d.method},
        "delta_upper": delta.upper,
        "delta_upper_certified": delta.certified,
        "delta_lower": cutmetric::delta_cut_lower(&u, &w),
        "regrid_error": delta.regrid_error,
        "witness": d.witness,
    });
    println!("{out}");
    Ok(())
}

fn cmd_norms(args: &Args) -> Result<(), Error> {
    let [path] = args.positional.as_slice() else {
        return Err(Error::Parse("norms expects one file".into()));
    };
    let w = load_graphon_any(path)?;
    let ps: Vec<f64> = match args.str_opt("p") {
        None => vec![1.0, 2.0, f64::INFINITY],
        Some(list) => list
            .split(',')
            .map(|tok| {
                let tok = tok.trim();
                if tok == "inf" {
                    Ok(f64::INFINITY)
                } else {
                    tok.parse::<f64>()
                        .map_err(|_| Error::Parse(format!("bad p value `{tok}`")))
                }
            })
            .collect::<Result<_, _>>()?,
    };
    let mut norms = serde_json::Map::new();
    for p in ps {
        let key = if p.is_infinite() { "inf".to_string() } else { format!("{p}") };
        norms.insert(key, json!(w.lp_norm(p)?));
    }
    let cut = cutmetric::cut_norm(&w);
    let inf1 = cutmetric::infty_to_one_norm(&w);
    let out = json!({
        "classes": w.num_classes(),
        "mean": w.mean(),
        "lp": norms,
        "cut": {"lower": cut.lower, "upper": cut.upper, "method": cut.method},
        "infty_to_one": {"lower": inf1.lower, "upper": inf1.upper, "method": inf1.method},
    });
    println!("{out}");
    Ok(())
}

fn cmd_regularize(args: &Args) -> Result<(), Error> {
    let [path] = args.positional.as_slice() else {
        return Err(Error::Parse("regularize expects one graph file".into()));
    };
    let g = load_graph(path)?;
    let c = args.f64_required("c")?;
    let p = args.f64_or("p", 2.0)?;
    let eps = args.f64_required("eps")?;
    let default_eta = 1.0 / (g.vertex_count().max(2) as f64);
    let eta = args.f64_or("eta", default_eta)?;
    let params = RegularityParams::new(p, eps, c, eta)?;
    let out_prefix = args.str_opt("out").unwrap_or("regularity").to_string();
    match regularity::weak_regularity_graph(&g, &params) {
        Ok(report) => {
            let wn = graphon_lab::graphon::normalize_graph(&g)?;
            let u = wn.quotient(&report.partition)?;
            std::fs::write(format!("{out_prefix}.partition.json"), report.to_json())?;
            std::fs::write(format!("{out_prefix}.graphon.json"), u.to_json())?;
            let summary = json!({
                "classes": report.partition.num_classes(),
                "error_cut": report.error_cut,
                "certified": report.certified,
                "iterations": report.iterations,
                "min_part_weight": report.partition.min_class_weight() * g.total_weight(),
                "eta_alpha": eta * g.total_weight(),
                "norm_bound": u.lp_norm(p)?,
                "partition_file": format!("{out_prefix}.partition.json"),
                "graphon_file": format!("{out_prefix}.graphon.json"),
            });
            println!("{summary}");
            Ok(())
        }
        Err(Error::UpperRegularityViolated(violation)) => {
            let cert = json!({
                "worst_value": violation.worst_value,
                "iterations": violation.iterations,
                "partition": violation.partition,
                "c": c, "eta": eta, "p": p,
            });
            let cert_path = format!("{out_prefix}.certificate.json");
            std::fs::write(&cert_path, cert.to_string())?;
            eprintln!("falsification certificate written to {cert_path}");
            Err(Error::UpperRegularityViolated(violation))
        }
        Err(e) => Err(e),
    }
}

fn cmd_check_upper(args: &Args) -> Result<(), Error> {
    let [path] = args.positional.as_slice() else {
        return Err(Error::Parse("check-upper expects one graph file".into()));
    };
    let g = load_graph(path)?;
    let c = args.f64_required("c")?;
    let eta = args.f64_required("eta")?;
    let p = args.f64_or("p", 2.0)?;
    let verdict = if args.has("exact") {
        upperreg::check_upper_regular_exact(&g, c, eta, p)?
    } else {
        upperreg::falsify_upper_regular(&g, c, eta, p, args.usize_or("budget", 64)?, args.seed()?)?
    };
    println!("{}", verdict.to_json());
    Ok(())
}

fn write_graph(path: &str, g: &WeightedGraph) -> Result<(), Error> {
    std::fs::write(path, g.to_tsv())?;
    Ok(())
}

pub fn default_two_block() -> StepGraphon {
    StepGraphon::new(vec![0.5, 0.5], vec![vec![0.8, 0.2], vec![0.2, 0.6]])
        .expect("valid two-block graphon")
}

fn graphon_from_flag(args: &Args) -> Result<StepGraphon, Error> {
    match args.str_opt("graphon") {
        Some(path) => load_graphon_any(path),
        None => Ok(default_two_block()),
    }
}

fn cmd_sample(args: &Args) -> Result<(), Error> {
    let kind = args
        .str_opt("kind")
        .ok_or_else(|| Error::Parse("sample needs --kind".into()))?;
    let out = args
        .str_opt("out")
        .ok_or_else(|| Error::Parse("sample needs --out".into()))?
        .to_string();
    let seed = args.seed()?;
    match kind {
        "h" => {
            let n = args.usize_or("n", 100)?;
            let cfg = sampling::SamplerConfig::new(n, 1.0, seed, args.has("keep-coords"))?;
            let w = graphon_from_flag(args)?;
            if cfg.keep_coords {
                let (h, coords) = sampling::sample_h_with_coords(cfg.n, &w, cfg.seed)?;
                write_graph(&out, &h)?;
                let listing: Vec<String> = coords.iter().map(f64::to_string).collect();
                std::fs::write(format!("{out}.coords"), listing.join("\n") + "\n")?;
            } else {
                write_graph(&out, &sampling::sample_h(cfg.n, &w, cfg.seed)?)?;
            }
        }
        "g" => {
            let n = args.usize_or("n", 100)?;
            let rho = args.f64_or("rho", 1.0 / (n as f64).sqrt())?;
            let cfg = sampling::SamplerConfig::new(n, rho, seed, false)?;
            let w = graphon_from_flag(args)?;
            write_graph(&out, &sampling::sample_g(cfg.n, &w, cfg.rho, cfg.seed)?)?;
        }
        "power-law" => {
            let n = args.usize_or("n", 500)?;
            let alpha = args.f64_or("alpha", 0.5)?;
            let beta = args.f64_or("beta", 0.5)?;
            write_graph(&out, &sampling::power_law_graph(n, alpha, beta, seed)?)?;
        }
        "power-law-graphon" => {
            let alpha = args.f64_or("alpha", 0.5)?;
            let grid = args.usize_or("grid", 64)?;
            std::fs::write(&out, sampling::power_law_graphon(alpha, grid)?.to_json())?;
        }
        "clique" => {
            let idx = args.usize_or("idx", 3)?;
            write_graph(&out, &sampling::clique_sequence(idx)?)?;
        }
        "doubling" => {
            let steps = args.usize_or("steps", 2)?;
            let opts = DoublingOptions {
                quasirandom_vertices: args.usize_or("factor-vertices", 32)?,
                max_retries: args.usize_or("retries", 100)?,
            };
            let family = sampling::doubling_sequence_with(steps, seed, &opts)?;
            for (i, g) in family.graphs.iter().enumerate() {
                write_graph(&format!("{out}.{}", i + 1), g)?;
            }
            let steps_json =
                serde_json::to_string(&family.steps).map_err(|e| Error::Io(e.to_string()))?;
            println!("{steps_json}");
        }
        other => return Err(Error::Parse(format!("unknown sample kind `{other}`"))),
    }
    Ok(())
}

fn cmd_motif(args: &Args) -> Result<(), Error> {
    let motif = args
        .str_opt("motif")
        .ok_or_else(|| Error::Parse("motif needs --motif (edge list or K2/P3/K3/C4/K4)".into()))?;
    let f = MotifGraph::parse(motif)?;
    let mut out = json!({
        "vertices": f.vertex_count(),
        "edges": f.edge_count(),
        "max_degree": f.max_degree(),
    });
    if let Some(path) = args.str_opt("file") {
        let w = load_graphon_any(path)?;
        let t = counting::hom_density_graphon(&f, &w)?;
        let holder = counting::holder_bound(&f, &w)?;
        out["t"] = json!(t);
        out["holder_bound"] = json!(holder);
        out["holder_holds"] = json!(t.abs() <= holder + args.f64_or("tolerance", 1e-9)?);
    }
    println!("{out}");
    Ok(())
}
