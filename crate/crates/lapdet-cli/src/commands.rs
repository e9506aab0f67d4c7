//! Subcommand implementations and the exit-code contract:
//! 0 = success (for `analyze`: detectable), 2 = analyzed but not
//! detectable, 1 = input or processing error.

use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lapdet::{
    certify_stabilizability, check_inf_norm_uniqueness, check_positivity,
    check_right_stochastic, detectability_report, discretize, expm, format_graph,
    generate_graph, load_schedule, lpv_detectability, lpv_transition, parse_graph,
    run_estimator, run_estimator_lpv, simulate, DenseMatrix, GraphKind, KalmanConfig,
    LpvSchedule, OutputSpec, WeightedGraph,
};

use crate::io::{parse_node_list, parse_vector, read_matrix_file, write_output};
use crate::report::{
    InputEcho, LaplacianSummary, ReportDocument, SpectralEvidence, StabilizabilityEvidence,
    SCHEMA_VERSION,
};
use crate::{AnalyzeArgs, Cli, Command, EstimateArgs, Format, GenerateArgs, SimulateArgs};

const EXIT_OK: u8 = 0;
const EXIT_NOT_DETECTABLE: u8 = 2;

pub fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Analyze(args) => cmd_analyze(&args),
        Command::Generate(args) => cmd_generate(&args),
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Estimate(args) => cmd_estimate(&args),
    }
}

fn require_positive_dt(dt: Option<f64>) -> Result<f64> {
    let dt = dt.context("--dt is required")?;
    if !(dt.is_finite() && dt > 0.0) {
        bail!("dt must be positive");
    }
    Ok(dt)
}

/// Builds the output spec from `--measure`/`--c-matrix`; `n` validates node
/// indices.
fn output_spec(measure: &Option<String>, c_matrix: &Option<PathBuf>, n: usize) -> Result<OutputSpec> {
    match (measure, c_matrix) {
        (Some(list), None) => Ok(OutputSpec::MeasuredNodes(parse_node_list(list, n)?)),
        (None, Some(path)) => Ok(OutputSpec::Matrix(read_matrix_file(path)?)),
        (None, None) => bail!("one of --measure or --c-matrix is required"),
        (Some(_), Some(_)) => unreachable!("clap marks the flags as conflicting"),
    }
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<u8> {
    if let Some(dir) = &args.batch {
        return analyze_batch(dir, args);
    }
    let document = if let Some(path) = &args.schedule {
        analyze_schedule_document(path, args)?
    } else if let Some(path) = &args.graph {
        analyze_graph_document(path, args)?
    } else {
        bail!("one of --graph, --schedule, or --batch is required");
    };

    let rendered = match args.format {
        Format::Json => document.to_pretty_json(),
        Format::Csv => document.to_csv(),
    };
    write_output(args.out.as_deref(), &rendered)?;
    Ok(if document.detectable() { EXIT_OK } else { EXIT_NOT_DETECTABLE })
}

fn analyze_graph_document(path: &Path, args: &AnalyzeArgs) -> Result<ReportDocument> {
    let started = Instant::now();
    let dt = require_positive_dt(args.dt)?;
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let graph = parse_graph(&text).with_context(|| format!("parsing {}", path.display()))?;
    let out = output_spec(&args.measure, &args.c_matrix, graph.node_count())?;

    let transition = expm(&graph.laplacian().scale(-dt))?.value;
    let spectral = spectral_evidence(&transition, args.trials, args.seed);
    let detectability = detectability_report(&graph, &out, dt)?;

    let stabilizability = match &args.b_matrix {
        Some(b_path) => {
            let b = read_matrix_file(b_path)?;
            let (applicable, stabilizable) = certify_stabilizability(&graph, &b, dt)?;
            Some(StabilizabilityEvidence { applicable, stabilizable })
        }
        None => None,
    };

    Ok(ReportDocument {
        schema_version: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        input: input_echo(args, Some(path), None, Some(dt))?,
        laplacian_summary: LaplacianSummary {
            n: graph.node_count(),
            edge_count: graph.edge_count(),
            segments: None,
            strongly_connected: graph.is_strongly_connected(),
        },
        spectral,
        detectability,
        stabilizability,
        timing_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

fn analyze_schedule_document(path: &Path, args: &AnalyzeArgs) -> Result<ReportDocument> {
    let started = Instant::now();
    if args.b_matrix.is_some() {
        bail!("--b-matrix applies to single-graph analysis, not schedules");
    }
    let schedule = load_schedule(path)?;
    let out = output_spec(&args.measure, &args.c_matrix, schedule.node_count())?;

    let product = lpv_transition(&schedule)?;
    let spectral = spectral_evidence(&product, args.trials, args.seed);
    let detectability = lpv_detectability(&schedule, &out)?;

    Ok(ReportDocument {
        schema_version: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        input: input_echo(args, None, Some(path), args.dt)?,
        laplacian_summary: schedule_summary(&schedule),
        spectral,
        detectability,
        stabilizability: None,
        timing_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

fn schedule_summary(schedule: &LpvSchedule) -> LaplacianSummary {
    LaplacianSummary {
        n: schedule.node_count(),
        edge_count: schedule.segments().iter().map(|s| s.graph.edge_count()).sum(),
        segments: Some(schedule.segments().len()),
        strongly_connected: schedule.segments().iter().all(|s| s.graph.is_strongly_connected()),
    }
}

fn spectral_evidence(transition: &DenseMatrix, trials: usize, seed: u64) -> SpectralEvidence {
    SpectralEvidence {
        positivity: check_positivity(transition, None),
        stochasticity: check_right_stochastic(transition, None),
        // Precondition failures (matrix not strictly stochastic) count as
        // evidence against uniqueness, not as a run error.
        inf_norm_uniqueness: check_inf_norm_uniqueness(transition, trials, seed)
            .unwrap_or(false),
    }
}

fn input_echo(
    args: &AnalyzeArgs,
    graph: Option<&Path>,
    schedule: Option<&Path>,
    dt: Option<f64>,
) -> Result<InputEcho> {
    let measured_nodes = match &args.measure {
        Some(list) => Some(crate::io::parse_usize_list(list)?),
        None => None,
    };
    Ok(InputEcho {
        graph: graph.map(|p| p.display().to_string()),
        schedule: schedule.map(|p| p.display().to_string()),
        dt,
        measured_nodes,
        c_matrix: args.c_matrix.as_ref().map(|p| p.display().to_string()),
        b_matrix: args.b_matrix.as_ref().map(|p| p.display().to_string()),
        trials: args.trials,
        seed: args.seed,
    })
}

fn analyze_batch(dir: &Path, args: &AnalyzeArgs) -> Result<u8> {
    let out_dir = args
        .out
        .as_ref()
        .context("--out <directory> is required in batch mode")?;
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;

    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "txt"))
        .collect();
    files.sort();
    if files.is_empty() {
        bail!("no .txt graph files in {}", dir.display());
    }

    let results: Mutex<Vec<(String, Result<bool>)>> = Mutex::new(Vec::new());
    let workers = std::thread::available_parallelism().map_or(1, |p| p.get()).min(files.len());
    let queue = Mutex::new(files.into_iter());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let Some(path) = queue.lock().unwrap().next() else {
                    break;
                };
                let name = path.file_stem().unwrap_or_default().to_string_lossy().to_string();
                let outcome = analyze_graph_document(&path, args).and_then(|document| {
                    let rendered = match args.format {
                        Format::Json => document.to_pretty_json(),
                        Format::Csv => document.to_csv(),
                    };
                    let extension = if args.format == Format::Json { "json" } else { "csv" };
                    write_output(
                        Some(&out_dir.join(format!("{name}.{extension}"))),
                        &rendered,
                    )?;
                    Ok(document.detectable())
                });
                results.lock().unwrap().push((name, outcome));
            });
        }
    });

    let mut results = results.into_inner().unwrap();
    results.sort_by(|a, b| a.0.cmp(&b.0));
    let mut any_error = false;
    let mut all_detectable = true;
    for (name, outcome) in &results {
        match outcome {
            Ok(true) => println!("{name}: detectable"),
            Ok(false) => {
                all_detectable = false;
                println!("{name}: not detectable");
            }
            Err(err) => {
                any_error = true;
                println!("{name}: error: {err:#}");
            }
        }
    }
    if any_error {
        bail!("batch run had failures");
    }
    Ok(if all_detectable { EXIT_OK } else { EXIT_NOT_DETECTABLE })
}

fn cmd_generate(args: &GenerateArgs) -> Result<u8> {
    let (kind, n) = match args.kind.as_str() {
        "grid" => {
            let rows = args.rows.context("grid needs --rows")?;
            let cols = args.cols.context("grid needs --cols")?;
            let n = rows * cols;
            if let Some(requested) = args.n {
                if requested != n {
                    bail!("--n {requested} does not match {rows}x{cols} = {n}");
                }
            }
            (GraphKind::Grid { rows, cols }, n)
        }
        "diffusion1d" => (
            GraphKind::Diffusion1d { diffusivity: args.diffusivity },
            args.n.context("--n is required")?,
        ),
        "path" => (GraphKind::Path, args.n.context("--n is required")?),
        "cycle" => (GraphKind::Cycle, args.n.context("--n is required")?),
        "complete" => (GraphKind::Complete, args.n.context("--n is required")?),
        "random" => (GraphKind::Random, args.n.context("--n is required")?),
        other => bail!(
            "unknown graph kind {other:?} (expected path, cycle, complete, grid, diffusion1d, or random)"
        ),
    };
    let graph = generate_graph(&kind, n, args.seed, (args.weight_lo, args.weight_hi))?;
    write_output(Some(&args.out), &format_graph(&graph))?;
    Ok(EXIT_OK)
}

fn load_graph(path: &Path) -> Result<WeightedGraph> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_graph(&text).with_context(|| format!("parsing {}", path.display()))
}

fn cmd_simulate(args: &SimulateArgs) -> Result<u8> {
    if !(args.dt.is_finite() && args.dt > 0.0) {
        bail!("dt must be positive");
    }
    let graph = load_graph(&args.graph)?;
    let n = graph.node_count();
    let out = match (&args.measure, &args.c_matrix) {
        (None, None) => OutputSpec::Matrix(DenseMatrix::identity(n)),
        (measure, c_matrix) => output_spec(measure, c_matrix, n)?,
    };
    let b = args.b_matrix.as_ref().map(|p| read_matrix_file(p)).transpose()?;
    let system = discretize(&graph, args.dt, b, &out)?;

    let x0 = match &args.x0 {
        Some(list) => {
            let x0 = parse_vector(list)?;
            if x0.len() != n {
                bail!("--x0 has {} entries, expected {n}", x0.len());
            }
            x0
        }
        None => {
            let mut e1 = vec![0.0; n];
            e1[0] = 1.0;
            e1
        }
    };

    let trajectory = simulate(&system, &x0, &[], args.steps)?;
    let rendered = match args.format {
        Format::Csv => trajectory.to_csv(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&serde_json::json!({
                "times": trajectory.times,
                "states": trajectory.states,
                "outputs": trajectory.outputs,
            }))?;
            s.push('\n');
            s
        }
    };
    write_output(args.out.as_deref(), &rendered)?;
    Ok(EXIT_OK)
}

fn cmd_estimate(args: &EstimateArgs) -> Result<u8> {
    enum Plant {
        Lti(lapdet::DiscreteSystem),
        Lpv(LpvSchedule, OutputSpec),
    }

    let (plant, n, m) = if let Some(path) = &args.schedule {
        let schedule = load_schedule(path)?;
        let n = schedule.node_count();
        let out = output_spec(&args.measure, &args.c_matrix, n)?;
        let m = out.output_matrix(n)?.rows();
        (Plant::Lpv(schedule, out), n, m)
    } else if let Some(path) = &args.graph {
        let dt = require_positive_dt(args.dt)?;
        let graph = load_graph(path)?;
        let n = graph.node_count();
        let out = output_spec(&args.measure, &args.c_matrix, n)?;
        let system = discretize(&graph, dt, None, &out)?;
        let m = system.output_dim();
        (Plant::Lti(system), n, m)
    } else {
        bail!("one of --graph or --schedule is required");
    };

    let cfg = KalmanConfig::diagonal(
        n,
        m,
        args.process_noise,
        args.measurement_noise,
        args.initial_cov,
    )?;

    let true_x0 = match &args.x0 {
        Some(list) => {
            let x0 = parse_vector(list)?;
            if x0.len() != n {
                bail!("--x0 has {} entries, expected {n}", x0.len());
            }
            x0
        }
        None => {
            // Drawn from a stream distinct from the run's noise stream.
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed.wrapping_add(0x9e37_79b9));
            (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect()
        }
    };
    let est_x0 = match &args.est_x0 {
        Some(list) => {
            let est = parse_vector(list)?;
            if est.len() != n {
                bail!("--est-x0 has {} entries, expected {n}", est.len());
            }
            est
        }
        None => vec![0.0; n],
    };

    let trace = match &plant {
        Plant::Lti(system) => {
            run_estimator(system, &cfg, &true_x0, &est_x0, args.steps, args.seed)?
        }
        Plant::Lpv(schedule, out) => {
            run_estimator_lpv(schedule, out, &cfg, &true_x0, &est_x0, args.steps, args.seed)?
        }
    };

    let rendered = match args.format {
        Format::Csv => trace.to_csv(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&serde_json::json!({
                "estimates": trace.estimates,
                "covariance_traces": trace.covariance_traces,
                "error_norms": trace.error_norms,
            }))?;
            s.push('\n');
            s
        }
    };
    write_output(args.out.as_deref(), &rendered)?;
    Ok(EXIT_OK)
}
