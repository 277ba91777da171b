use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use wawpart::bench::{generate_lubm, lubm_workload, lubm_workload_text, GeneratorSpec};
use wawpart::clustering::{dendrogram_dot, dendrogram_text, matrix_json};
use wawpart::config::Config;
use wawpart::exec::{compare_table, run_workload};
use wawpart::partitioner::{emit_metadata, load_metadata, BalanceReport, Partitioning};
use wawpart::pipeline::{analyze, evaluate, partition_random, partition_wawpart};
use wawpart::query::{parse_workload, serialize_federated};
use wawpart::rewriter::rewrite;
use wawpart::{parse_ntriples, write_ntriples, KnowledgeGraph, Query, Report, Scalar, ShardId};

#[derive(Parser)]
#[command(name = "wawpart", version, about = "Workload-aware partitioning of RDF graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic university dataset and its query workload.
    Generate(Common),
    /// Write the query distance matrix and dendrogram.
    Analyze(Common),
    /// Partition the dataset and write shard dumps plus metadata.
    Partition(Common),
    /// Print the federated form of every workload query.
    Rewrite(Common),
    /// Run the workload against written shards and write the report.
    Run(Common),
    /// Partition with both strategies and print a side-by-side table.
    Compare(Common),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Strategy {
    Wawpart,
    Random,
}

impl Strategy {
    fn name(self) -> &'static str {
        match self {
            Strategy::Wawpart => "wawpart",
            Strategy::Random => "random",
        }
    }
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    /// single, complete or average.
    #[arg(long)]
    linkage: Option<String>,
    /// Cut the dendrogram at this distance instead of at k clusters.
    #[arg(long)]
    cut_distance: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Triple count for `generate` and for datasets generated on the fly.
    #[arg(long)]
    triples: Option<usize>,
    #[arg(long, value_enum, default_value = "wawpart")]
    strategy: Strategy,
    /// Output directory; inputs default to files written there earlier.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// N-Triples input instead of `<out>/dataset.nt`.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Workload input instead of `<out>/workload.rq`.
    #[arg(long)]
    workload: Option<PathBuf>,
}

impl Common {
    fn config(&self) -> Result<Config> {
        let mut config = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                Config::parse(&text).with_context(|| format!("in {}", path.display()))?
            }
            None => Config::default(),
        };
        let overrides = [
            ("k", self.k.map(|v| v.to_string())),
            ("linkage", self.linkage.clone()),
            ("cut_distance", self.cut_distance.clone()),
            ("seed", self.seed.map(|v| v.to_string())),
            ("triples", self.triples.map(|v| v.to_string())),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                config.apply(key, &v)?;
            }
        }
        Ok(config)
    }

    fn out_file(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    /// The given dataset, else `<out>/dataset.nt`, else a generated one.
    fn dataset(&self, config: &Config) -> Result<KnowledgeGraph> {
        let path = self.dataset.clone().unwrap_or_else(|| self.out_file("dataset.nt"));
        if self.dataset.is_some() || path.exists() {
            return read_graph(&path);
        }
        Ok(generate_lubm(&GeneratorSpec { seed: config.seed, triples: config.triples })?)
    }

    /// The given workload, else `<out>/workload.rq`, else the built-in one.
    fn workload(&self) -> Result<Vec<Query>> {
        let path = self.workload.clone().unwrap_or_else(|| self.out_file("workload.rq"));
        if self.workload.is_some() || path.exists() {
            let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            return parse_workload(&text).with_context(|| format!("in {}", path.display()));
        }
        Ok(lubm_workload())
    }
}

fn read_graph(path: &Path) -> Result<KnowledgeGraph> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    parse_ntriples(BufReader::new(file)).with_context(|| format!("in {}", path.display()))
}

fn write_graph(path: &Path, g: &KnowledgeGraph) -> Result<()> {
    let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = std::io::BufWriter::new(file);
    write_ntriples(g, &mut out).with_context(|| format!("writing {}", path.display()))
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(v)? + "\n";
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn balance_json(b: &BalanceReport) -> Value {
    serde_json::to_value(b).expect("balance report serializes")
}

fn generate(c: &Common) -> Result<String> {
    let config = c.config()?;
    fs::create_dir_all(&c.out)?;
    let g = generate_lubm(&GeneratorSpec { seed: config.seed, triples: config.triples })?;
    write_graph(&c.out_file("dataset.nt"), &g)?;
    fs::write(c.out_file("workload.rq"), lubm_workload_text())?;
    Ok(format!("wrote {} triples and 14 queries to {}\n", g.len(), c.out.display()))
}

fn analyze_cmd(c: &Common) -> Result<String> {
    let config = c.config()?;
    let analysis = analyze(&c.workload()?, config.linkage)?;
    let (Some(m), Some(d)) = (&analysis.matrix, &analysis.dendrogram) else {
        bail!("workload is empty");
    };
    fs::create_dir_all(&c.out)?;
    write_json(&c.out_file("matrix.json"), &matrix_json(m))?;
    fs::write(c.out_file("dendrogram.txt"), dendrogram_text(d))?;
    fs::write(c.out_file("dendrogram.dot"), dendrogram_dot(d))?;
    let width = m.ids().iter().map(String::len).max().unwrap_or(0).max(6);
    let mut out = format!("{:width$}", "");
    for id in m.ids() {
        out += &format!(" {id:>width$}");
    }
    out.push('\n');
    for (i, id) in m.ids().iter().enumerate() {
        out += &format!("{id:width$}");
        for v in m.row(i) {
            out += &format!(" {:>width$.4}", v.to_f64_lossy());
        }
        out.push('\n');
    }
    Ok(out)
}

fn build(strategy: Strategy, g: &KnowledgeGraph, wl: &[Query], config: &Config) -> Result<(Partitioning, BalanceReport)> {
    Ok(match strategy {
        Strategy::Wawpart => {
            let run = partition_wawpart(g, wl, config)?;
            (run.outcome.partitioning, run.outcome.report)
        }
        Strategy::Random => {
            let p = partition_random(g, config)?;
            let sizes: Vec<usize> = p.sizes.values().copied().collect();
            let report = BalanceReport::new(sizes.clone(), vec![0; sizes.len()], 0, config.epsilon);
            (p, report)
        }
    })
}

fn partition_cmd(c: &Common) -> Result<String> {
    let config = c.config()?;
    let g = c.dataset(&config)?;
    let (p, balance) = build(c.strategy, &g, &c.workload()?, &config)?;
    fs::create_dir_all(&c.out)?;
    for (shard, graph) in p.shard_graphs(&g) {
        write_graph(&c.out_file(&format!("shard-{}.nt", shard.0)), &graph)?;
    }
    let mut doc = emit_metadata(&p);
    doc["strategy"] = json!(c.strategy.name());
    doc["balance"] = balance_json(&balance);
    write_json(&c.out_file("partition.json"), &doc)?;
    let devs: Vec<String> = balance.deviations.iter().map(|d| format!("{:+.1}%", d * 100.0)).collect();
    Ok(format!("{} shards of {:?} triples ({})\n", p.k, balance.sizes, devs.join(", ")))
}

fn read_partition(c: &Common) -> Result<(Value, Partitioning)> {
    let path = c.out_file("partition.json");
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}; run `partition` first", path.display()))?;
    let doc: Value = serde_json::from_str(&text).with_context(|| format!("in {}", path.display()))?;
    let homes = load_metadata(&doc)?;
    let k = doc["k"].as_u64().unwrap_or(0) as usize;
    Ok((doc, Partitioning::from_assignment(k, &[], homes)))
}

fn rewrite_cmd(c: &Common) -> Result<String> {
    let config = c.config()?;
    let (_, meta) = read_partition(c)?;
    let endpoints = config.endpoint_map(meta.k);
    let mut blocks = Vec::new();
    for q in c.workload()? {
        let plan = rewrite(&q, &meta).with_context(|| format!("query {}", q.id))?;
        let text = serialize_federated(&plan.query, &endpoints)?;
        blocks.push(format!(
            "# id: {}\n# ppn: shard {}, distributed joins: {}\n{text}",
            q.id,
            plan.query.ppn.0,
            plan.distributed_joins()
        ));
    }
    Ok(blocks.join("---\n"))
}

fn run_cmd(c: &Common) -> Result<String> {
    let config = c.config()?;
    let (doc, meta) = read_partition(c)?;
    let shards = (0..meta.k)
        .map(|i| Ok((ShardId(i), read_graph(&c.out_file(&format!("shard-{i}.nt")))?)))
        .collect::<Result<_>>()?;
    let report: Report = run_workload(&c.workload()?, &meta, &shards, &config.cost);
    let mut out = report.to_json();
    out["strategy"] = doc["strategy"].clone();
    out["balance"] = doc["balance"].clone();
    write_json(&c.out_file("report.json"), &out)?;
    let mut text = report.to_text();
    if let Some(b) = doc["balance"].as_object() {
        text += &format!("balance: sizes {} within epsilon {}\n", b["sizes"], b["within_epsilon"]);
    }
    Ok(text)
}

fn compare_cmd(c: &Common) -> Result<String> {
    let config = c.config()?;
    let g = c.dataset(&config)?;
    let wl = c.workload()?;
    let (w, _) = build(Strategy::Wawpart, &g, &wl, &config)?;
    let (r, _) = build(Strategy::Random, &g, &wl, &config)?;
    let (wr, rr) = (evaluate(&g, &wl, &w, &config), evaluate(&g, &wl, &r, &config));
    let mut text = compare_table("wawpart", &wr, "random", &rr);
    text += &format!(
        "total distributed joins: wawpart {}, random {}; mean simulated ms: wawpart {:.4}, random {:.4}\n",
        wr.total_distributed_joins(),
        rr.total_distributed_joins(),
        wr.mean_simulated_time().to_f64_lossy(),
        rr.mean_simulated_time().to_f64_lossy()
    );
    fs::create_dir_all(&c.out)?;
    write_json(&c.out_file("report.json"), &json!({ "wawpart": wr.to_json(), "random": rr.to_json() }))?;
    Ok(text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generate(c) => generate(c),
        Command::Analyze(c) => analyze_cmd(c),
        Command::Partition(c) => partition_cmd(c),
        Command::Rewrite(c) => rewrite_cmd(c),
        Command::Run(c) => run_cmd(c),
        Command::Compare(c) => compare_cmd(c),
    };
    match result {
        Ok(text) => {
            // A closed pipe (`| head`) is not an error.
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(text.as_bytes()).and_then(|()| stdout.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
                _ => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
