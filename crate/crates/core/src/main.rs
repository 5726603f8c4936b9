//! Command-line front end: run experiments, compare reports, inspect
//! topologies, and generate workloads.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use icnsim::error::{Error, Result};
use icnsim::harness::{self, AggregateReport, ExperimentSpec};
use icnsim::topology::{self, Graph, RoleParams};
use icnsim::workload::{self, PopularityModel, SizeModel};

#[derive(Parser)]
#[command(name = "icnsim", version, about = "Cache network simulator and metrics engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment spec and write its report files.
    Run {
        /// Experiment spec (JSON).
        spec: PathBuf,
        /// Output directory; overrides the spec's `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write per-run event logs and final cache snapshots as CSV.
        #[arg(long)]
        dump_logs: bool,
    },
    /// Rank strategies across one or two aggregate reports.
    Compare {
        report_a: PathBuf,
        report_b: Option<PathBuf>,
        /// Emit the comparison as JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Summarize an edge-list topology; optionally dump centrality as CSV.
    TopoStats {
        edgelist: PathBuf,
        /// Write `node,degree,betweenness` CSV here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Generate a content catalog and, optionally, a request trace.
    GenWorkload(GenWorkload),
}

#[derive(Args)]
struct GenWorkload {
    /// Catalog size.
    #[arg(long)]
    objects: usize,
    /// Zipf exponent.
    #[arg(long, conflicts_with_all = ["weibull_shape", "weibull_scale"])]
    zipf: Option<f64>,
    #[arg(long, requires = "weibull_scale")]
    weibull_shape: Option<f64>,
    #[arg(long, requires = "weibull_shape")]
    weibull_scale: Option<f64>,
    /// Fixed object size in bytes.
    #[arg(long, conflicts_with_all = ["size_min", "size_max"])]
    size_fixed: Option<u64>,
    #[arg(long, requires = "size_max")]
    size_min: Option<u64>,
    #[arg(long, requires = "size_min")]
    size_max: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Catalog CSV destination (stdout when omitted).
    #[arg(long)]
    catalog_out: Option<PathBuf>,
    /// Sample a request trace of this length (needs --topology).
    #[arg(long, requires = "topology")]
    requests: Option<usize>,
    /// Edge-list topology used for client placement.
    #[arg(long)]
    topology: Option<PathBuf>,
    #[arg(long)]
    n_servers: Option<usize>,
    #[arg(long, default_value_t = 0.25)]
    client_fraction: f64,
    /// Trace CSV destination (stdout when omitted).
    #[arg(long)]
    trace_out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let payload = serde_json::json!({
                "error": { "kind": e.kind(), "message": e.to_string() }
            });
            eprintln!("{payload}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { spec, out, dump_logs } => cmd_run(&spec, out, dump_logs),
        Command::Compare { report_a, report_b, json } => cmd_compare(&report_a, report_b, json),
        Command::TopoStats { edgelist, csv } => cmd_topo_stats(&edgelist, csv),
        Command::GenWorkload(args) => cmd_gen_workload(args),
    }
}

fn cmd_run(spec_path: &PathBuf, out: Option<PathBuf>, dump_logs: bool) -> Result<()> {
    let spec = ExperimentSpec::from_json(&fs::read_to_string(spec_path)?)?;
    let out_dir = out
        .or_else(|| spec.output_dir.clone())
        .ok_or_else(|| Error::Config("no output directory: set `output_dir` or pass --out".into()))?;
    let aggregate = harness::run_experiment(&spec, &out_dir, dump_logs)?;
    let table = harness::compare(&[&aggregate])?;
    print!("{}", harness::render_comparison(&table));
    println!("\nreports written to {}", out_dir.display());
    Ok(())
}

fn cmd_compare(report_a: &PathBuf, report_b: Option<PathBuf>, json: bool) -> Result<()> {
    let a = AggregateReport::from_json(&fs::read_to_string(report_a)?)?;
    let b = report_b
        .map(|p| -> Result<AggregateReport> {
            AggregateReport::from_json(&fs::read_to_string(p)?)
        })
        .transpose()?;
    let reports: Vec<&AggregateReport> = match &b {
        Some(b) => vec![&a, b],
        None => vec![&a],
    };
    let table = harness::compare(&reports)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&table)?);
    } else {
        print!("{}", harness::render_comparison(&table));
    }
    Ok(())
}

fn cmd_topo_stats(edgelist: &PathBuf, csv: Option<PathBuf>) -> Result<()> {
    let graph = topology::load_topology(&fs::read_to_string(edgelist)?)?;
    let degrees: Vec<usize> = graph.nodes().map(|v| graph.degree(v)).collect();
    let mut summary = serde_json::json!({
        "nodes": graph.node_count(),
        "edges": graph.edge_count(),
        "connected": graph.is_connected(),
        "components": graph.components().iter().map(|(rep, size)| {
            serde_json::json!({"min_node": rep.0, "size": size})
        }).collect::<Vec<_>>(),
        "min_degree": degrees.iter().min(),
        "median_degree": graph.median_degree(),
        "max_degree": degrees.iter().max(),
    });
    if graph.is_connected() {
        let table = topology::betweenness(&graph)?;
        let mut top: Vec<(usize, f64)> =
            graph.nodes().map(|v| (v.0, table.get(v))).collect();
        top.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        summary["top_betweenness"] = top
            .iter()
            .take(5)
            .map(|&(node, value)| serde_json::json!({"node": node, "betweenness": value}))
            .collect();
        if let Some(path) = csv {
            fs::write(path, topology::centrality_csv(&graph, &table))?;
        }
    } else if csv.is_some() {
        return Err(Error::Disconnected { components: graph.components().to_vec() });
    }
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

fn cmd_gen_workload(args: GenWorkload) -> Result<()> {
    let popularity = match (args.zipf, args.weibull_shape, args.weibull_scale) {
        (Some(exponent), None, None) => PopularityModel::Zipf { exponent },
        (None, Some(shape), Some(scale)) => PopularityModel::Weibull { shape, scale },
        _ => {
            return Err(Error::InvalidParameter(
                "choose --zipf <s> or --weibull-shape <k> --weibull-scale <l>".into(),
            ))
        }
    };
    let size = match (args.size_fixed, args.size_min, args.size_max) {
        (Some(bytes), None, None) => SizeModel::Fixed { bytes },
        (None, Some(min), Some(max)) => SizeModel::Uniform { min, max },
        _ => {
            return Err(Error::InvalidParameter(
                "choose --size-fixed <b> or --size-min <a> --size-max <b>".into(),
            ))
        }
    };
    let catalog = workload::build_catalog(args.objects, popularity, size, args.seed)?;
    emit(args.catalog_out.as_deref(), &catalog.to_csv())?;

    if let Some(n_requests) = args.requests {
        let path = args.topology.as_ref().expect("clap enforces --topology");
        let graph: Graph = topology::load_topology(&fs::read_to_string(path)?)?;
        let params = RoleParams {
            n_servers: args
                .n_servers
                .unwrap_or_else(|| ((0.05 * graph.node_count() as f64).round() as usize).max(1)),
            client_fraction: args.client_fraction,
            edge_degree_threshold: None,
            external: topology::ExternalServers::All,
        };
        let roles = topology::assign_roles(&graph, args.objects, &params, args.seed)?;
        let stream = workload::sample_requests(&catalog, &roles, n_requests, args.seed)?;
        emit(args.trace_out.as_deref(), &stream.to_csv())?;
    }
    Ok(())
}

fn emit(path: Option<&std::path::Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, content)?,
        None => print!("{content}"),
    }
    Ok(())
}
