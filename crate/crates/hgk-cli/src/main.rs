use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hgk_core::datagen::{gen_synthie, random_labeled_graph, SynthieParams};
use hgk_core::eval::{cross_validate, CvConfig, FeaturizerKind};
use hgk_core::features::{sp_feature_map, wl_feature_map, WlContext};
use hgk_core::graph::{parse_tu_dataset, write_tu_dataset, AttributedGraph, GraphCollection};
use hgk_core::hgk::{
    cosine_normalize, featurize_collection, gram_from_features, standardize_attributes,
    FeatureRegistry,
};
use hgk_core::oracles::{
    approx_error_experiment, implicit_sp, implicit_wl, AttributeKernel, DistanceKernel,
};
use hgk_core::{dot, BaseKernel, HashMode, HgkConfig, LabelMode, SeedSpec};

#[derive(Parser)]
#[command(name = "hgk", version, about = "Hash graph kernels for attributed graphs")]
struct Cli {
    /// Master seed; every randomized stage derives from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Hashing iterations I.
    #[arg(long, global = true, default_value_t = 20)]
    iterations: u32,
    /// Base kernel applied to the hashed graphs.
    #[arg(long, global = true, value_enum, default_value_t = BaseArg::Wl)]
    base: BaseArg,
    /// Refinement depth of the WL base kernel.
    #[arg(long, global = true, default_value_t = 4)]
    wl_depth: u16,
    /// LSH bucket width.
    #[arg(long, global = true, default_value_t = 1.0)]
    r: f64,
    #[arg(long, global = true, value_enum, default_value_t = HashModeArg::Shared)]
    hash_mode: HashModeArg,
    /// cont hashes attributes only; label-cont also uses discrete labels.
    #[arg(long, global = true, value_enum, default_value_t = LabelModeArg::Cont)]
    label_mode: LabelModeArg,
    /// Worker threads; 0 keeps the rayon default.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BaseArg {
    Wl,
    Sp,
}

#[derive(Clone, Copy, ValueEnum)]
enum HashModeArg {
    Shared,
    Independent,
}

#[derive(Clone, Copy, ValueEnum)]
enum LabelModeArg {
    Cont,
    LabelCont,
}

#[derive(Subcommand)]
enum Command {
    /// Write sparse feature vectors (index:value lines) plus a key registry.
    Featurize {
        /// Directory holding the dataset in TU layout.
        dataset: PathBuf,
        /// Dataset name (file prefix); defaults to the directory name.
        #[arg(long)]
        name: Option<String>,
        /// Output feature file; the registry goes to <output>.registry.
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Write the cosine-normalized gram matrix as CSV plus a class-label sidecar.
    Gram {
        dataset: PathBuf,
        #[arg(long)]
        name: Option<String>,
        /// Output CSV; class labels go to <output>.labels.
        #[arg(long, short)]
        output: PathBuf,
        /// Skip cosine normalization.
        #[arg(long)]
        raw: bool,
    },
    /// Repeated stratified k-fold cross validation with a linear SVM.
    Cv {
        dataset: PathBuf,
        #[arg(long)]
        name: Option<String>,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        #[arg(long, default_value_t = 10)]
        repetitions: usize,
        #[arg(long, default_value_t = 5)]
        inner_folds: usize,
        /// Comma-separated SVM C grid.
        #[arg(long, default_value = "0.001,0.01,0.1,1,10,100,1000", value_delimiter = ',')]
        c_grid: Vec<f64>,
        #[arg(long, default_value_t = 20)]
        epochs: usize,
        /// Select the WL depth from {0..wl-depth} by inner CV instead of
        /// fixing it.
        #[arg(long)]
        select_depth: bool,
        /// Evaluate the discrete-label base kernel instead of the hashed one.
        #[arg(long)]
        discrete: bool,
    },
    /// Generate a synthetic attributed benchmark in TU layout.
    Synthie {
        /// Output directory.
        #[arg(long, short)]
        output: PathBuf,
        #[arg(long, default_value_t = 10)]
        seed_graph_size: usize,
        #[arg(long, default_value_t = 0.2)]
        er_edge_prob: f64,
        #[arg(long, default_value_t = 0.25)]
        perturbation_fraction: f64,
        #[arg(long, default_value_t = 10)]
        seeds_per_graph: usize,
        #[arg(long, default_value_t = 200)]
        graphs_per_superclass: usize,
        #[arg(long, default_value_t = 15)]
        attr_dim: usize,
        #[arg(long, default_value_t = 0.8)]
        mix_prob: f64,
    },
    /// Run the implicit/explicit equivalence and Hoeffding-band checks.
    OracleCheck {
        /// Random graphs per equivalence check.
        #[arg(long, default_value_t = 30)]
        graphs: usize,
        /// Repetitions of the approximation experiment.
        #[arg(long, default_value_t = 100)]
        repetitions: usize,
        /// Monte-Carlo trials per collision-kernel entry.
        #[arg(long, default_value_t = 20000)]
        collision_trials: usize,
    },
    /// Featurization runtime against the iteration count.
    Bench {
        /// Dataset directory; a small synthetic collection when omitted.
        dataset: Option<PathBuf>,
        #[arg(long)]
        name: Option<String>,
        #[arg(long, default_value = "5,10,20,40", value_delimiter = ',')]
        iteration_grid: Vec<u32>,
    },
}

fn dataset_name(dir: &Path, name: Option<String>) -> Result<String> {
    match name {
        Some(n) => Ok(n),
        None => dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .context("cannot infer dataset name from path; pass --name"),
    }
}

/// Standardizes attributes when present and falls back to degree labels when
/// the configuration needs discrete labels the dataset does not have.
fn prepare(c: GraphCollection, cfg: &HgkConfig) -> Result<GraphCollection> {
    let mut c = if c.attribute_dim.is_some() { standardize_attributes(&c)? } else { c };
    let needs_labels = cfg.label_mode == LabelMode::LabelCont || c.attribute_dim.is_none();
    if needs_labels {
        c = GraphCollection::new(
            c.name.clone(),
            c.graphs.iter().map(|g| g.labeled_by_degree(false)).collect(),
        )?;
    }
    Ok(c)
}

fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn run_oracle_check(
    cfg: &HgkConfig,
    graphs: usize,
    repetitions: usize,
    collision_trials: usize,
) -> Result<bool> {
    let mut all_ok = true;
    let mut row = |name: &str, ok: bool, detail: String| {
        println!("{name}\t{}\t{detail}", if ok { "pass" } else { "FAIL" });
        all_ok &= ok;
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.master);
    let sp_graphs: Vec<AttributedGraph> = (0..graphs)
        .map(|_| random_labeled_graph(2 + (rng_next(&mut rng) % 7) as usize, 0.3, 4, &mut rng))
        .collect();
    let mut sp_bad = 0usize;
    for i in 0..sp_graphs.len() {
        for j in i..sp_graphs.len() {
            let explicit = dot(&sp_feature_map(&sp_graphs[i])?, &sp_feature_map(&sp_graphs[j])?);
            let implicit = implicit_sp(
                &sp_graphs[i],
                &sp_graphs[j],
                &AttributeKernel::Dirac,
                &DistanceKernel::Dirac,
            )?;
            if explicit != implicit {
                sp_bad += 1;
            }
        }
    }
    row("sp-equivalence", sp_bad == 0, format!("{sp_bad} mismatches over {graphs} graphs"));

    let mut wl_bad = 0usize;
    let mut wl_pairs = 0usize;
    while wl_pairs < graphs {
        let g = random_labeled_graph(2 + (rng_next(&mut rng) % 5) as usize, 0.35, 3, &mut rng);
        let h = random_labeled_graph(2 + (rng_next(&mut rng) % 5) as usize, 0.35, 3, &mut rng);
        let deg_ok =
            |g: &AttributedGraph| (0..g.node_count()).all(|v| g.neighbors(v).unwrap().len() <= 3);
        if !deg_ok(&g) || !deg_ok(&h) {
            continue;
        }
        wl_pairs += 1;
        for depth in 0..=2u16 {
            let mut ctx = WlContext::new();
            let explicit =
                dot(&wl_feature_map(&g, depth, &mut ctx)?, &wl_feature_map(&h, depth, &mut ctx)?);
            if explicit != implicit_wl(&g, &h, depth, &AttributeKernel::Dirac)? {
                wl_bad += 1;
            }
        }
    }
    row("wl-equivalence", wl_bad == 0, format!("{wl_bad} mismatches over {graphs} pairs"));

    let make = |n: usize, edges: &[(u32, u32)], rng: &mut ChaCha8Rng| -> Result<AttributedGraph> {
        let attrs = (0..n)
            .map(|_| vec![rng_unit(rng), rng_unit(rng)])
            .collect();
        Ok(AttributedGraph::new(n, edges)?.with_attributes(attrs)?)
    };
    let pairs = [
        (make(3, &[(0, 1), (1, 2)], &mut rng)?, make(3, &[(0, 1), (1, 2), (2, 0)], &mut rng)?),
        (
            make(5, &[(0, 1), (1, 2), (2, 3), (3, 4)], &mut rng)?,
            make(5, &[(0, 1), (0, 2), (0, 3), (3, 4)], &mut rng)?,
        ),
    ];
    let lambdas = [0.05, 0.1, 0.2];
    for (i, (g, h)) in pairs.iter().enumerate() {
        let exp_cfg = HgkConfig {
            base: BaseKernel::Sp,
            hash_mode: HashMode::Independent,
            label_mode: LabelMode::Cont,
            ..*cfg
        };
        let report =
            approx_error_experiment(g, h, &exp_cfg, repetitions, &lambdas, collision_trials, &mut rng)?;
        let mut violated = Vec::new();
        for &(lambda, freq, bound) in &report.exceedances {
            let p = bound.min(1.0);
            let se = (p * (1.0 - p) / repetitions as f64).sqrt();
            if freq > bound + 3.0 * se {
                violated.push(format!("lambda {lambda}: {freq} > {:.4}", bound + 3.0 * se));
            }
        }
        row(
            &format!("hoeffding-pair-{i}"),
            violated.is_empty(),
            if violated.is_empty() {
                format!("mean {:.4}, oracle {:.4}", report.mean, report.oracle)
            } else {
                violated.join("; ")
            },
        );
    }
    Ok(all_ok)
}

fn rng_next(rng: &mut ChaCha8Rng) -> u64 {
    rand::Rng::gen(rng)
}

fn rng_unit(rng: &mut ChaCha8Rng) -> f64 {
    rand::Rng::gen_range(rng, -1.0..1.0)
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global()?;
    }
    let cfg = HgkConfig {
        iterations: cli.iterations,
        base: match cli.base {
            BaseArg::Wl => BaseKernel::Wl { depth: cli.wl_depth },
            BaseArg::Sp => BaseKernel::Sp,
        },
        width: cli.r,
        hash_mode: match cli.hash_mode {
            HashModeArg::Shared => HashMode::Shared,
            HashModeArg::Independent => HashMode::Independent,
        },
        label_mode: match cli.label_mode {
            LabelModeArg::Cont => LabelMode::Cont,
            LabelModeArg::LabelCont => LabelMode::LabelCont,
        },
        seed: SeedSpec::new(cli.seed),
    };

    match cli.command {
        Command::Featurize { dataset, name, output } => {
            let name = dataset_name(&dataset, name)?;
            let collection = prepare(parse_tu_dataset(&dataset, &name)?, &cfg)?;
            let features = featurize_collection(&collection, &cfg)?;
            let registry = FeatureRegistry::build(&features);
            write(&output, &registry.features_to_text(&features))?;
            write(&sidecar(&output, ".registry"), &registry.to_text())?;
        }
        Command::Gram { dataset, name, output, raw } => {
            let name = dataset_name(&dataset, name)?;
            let collection = prepare(parse_tu_dataset(&dataset, &name)?, &cfg)?;
            let features = featurize_collection(&collection, &cfg)?;
            let mut gram = gram_from_features(&features)?;
            if !raw {
                gram = cosine_normalize(&gram);
            }
            write(&output, &gram.to_csv())?;
            let labels: String = collection
                .class_labels()
                .iter()
                .map(|l| match l {
                    Some(v) => format!("{v}\n"),
                    None => "NA\n".to_string(),
                })
                .collect();
            write(&sidecar(&output, ".labels"), &labels)?;
        }
        Command::Cv {
            dataset,
            name,
            folds,
            repetitions,
            inner_folds,
            c_grid,
            epochs,
            select_depth,
            discrete,
        } => {
            let name = dataset_name(&dataset, name)?;
            let collection = prepare(parse_tu_dataset(&dataset, &name)?, &cfg)?;
            let depth_grid: Vec<u16> = (0..=cli.wl_depth).collect();
            let kind = match (discrete, cli.base) {
                (true, BaseArg::Wl) => FeaturizerKind::DiscreteWl { depth_grid },
                (true, BaseArg::Sp) => FeaturizerKind::DiscreteSp,
                (false, _) => FeaturizerKind::Hgk {
                    cfg,
                    depth_grid: if select_depth && matches!(cli.base, BaseArg::Wl) {
                        Some(depth_grid)
                    } else {
                        None
                    },
                },
            };
            let cv = CvConfig {
                folds,
                repetitions,
                c_grid,
                inner_folds,
                epochs,
                seed: SeedSpec::new(cli.seed),
            };
            let report = cross_validate(&collection, &kind, &cv)?;
            println!(
                "{name}: {:.2}% +- {:.2} over {} folds x {} repetitions",
                report.mean_accuracy, report.std_accuracy, folds, repetitions
            );
            print!("{}", report.to_text());
        }
        Command::Synthie {
            output,
            seed_graph_size,
            er_edge_prob,
            perturbation_fraction,
            seeds_per_graph,
            graphs_per_superclass,
            attr_dim,
            mix_prob,
        } => {
            let params = SynthieParams {
                seed_graph_size,
                er_edge_prob,
                perturbation_fraction,
                seeds_per_graph,
                graphs_per_superclass,
                attr_dim,
                mix_prob,
                seed: SeedSpec::new(cli.seed),
            };
            let collection = gen_synthie(&params)?;
            let files = write_tu_dataset(&collection, &output)?;
            for f in files {
                println!("wrote {}", f.display());
            }
        }
        Command::OracleCheck { graphs, repetitions, collision_trials } => {
            if !run_oracle_check(&cfg, graphs, repetitions, collision_trials)? {
                bail!("oracle checks failed");
            }
        }
        Command::Bench { dataset, name, iteration_grid } => {
            let collection = match dataset {
                Some(dir) => {
                    let name = dataset_name(&dir, name)?;
                    prepare(parse_tu_dataset(&dir, &name)?, &cfg)?
                }
                None => prepare(
                    gen_synthie(&SynthieParams {
                        graphs_per_superclass: 50,
                        seed: SeedSpec::new(cli.seed),
                        ..SynthieParams::default()
                    })?,
                    &cfg,
                )?,
            };
            println!("iterations\tfeaturize_secs\tgram_secs");
            for iterations in iteration_grid {
                let run_cfg = HgkConfig { iterations, ..cfg };
                let t0 = std::time::Instant::now();
                let features = featurize_collection(&collection, &run_cfg)?;
                let featurize_secs = t0.elapsed().as_secs_f64();
                let t1 = std::time::Instant::now();
                let gram = gram_from_features(&features)?;
                let gram_secs = t1.elapsed().as_secs_f64();
                debug_assert_eq!(gram.size(), collection.len());
                println!("{iterations}\t{featurize_secs:.3}\t{gram_secs:.3}");
            }
        }
    }
    Ok(())
}
