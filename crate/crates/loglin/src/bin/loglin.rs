use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use loglin::data::cell_counts;
use loglin::experiments::{
    draw_theta, provenance, run_equality_study, run_existence_study, run_face4x4, run_rate_study,
    EqualityConfig, Estimator, ExistenceConfig, RateConfig, StatisticFixture,
};
use loglin::faces::{local_face_analysis, smallest_face, FaceOptions, Observed};
use loglin::io::{self, FaceReport};
use loglin::model::Model;
use loglin::report::{estimation_report, SampleSidecar, ThetaFile};
use loglin::sampler::{make_face_dataset, sample, FaceSpec, Method, SamplerConfig};
use loglin::Error;

#[derive(Parser)]
#[command(name = "loglin", version, about = "Faces, existence and composite likelihood for loglinear models")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build or inspect a model file.
    #[command(subcommand)]
    Model(ModelCmd),
    /// Draw synthetic samples from a model.
    Sample(SampleArgs),
    /// Smallest face containing the data (exit code 3 when it is proper).
    #[command(subcommand)]
    Face(FaceCmd),
    /// Fit the global or a composite estimator: global, ps, ps2, m1, m2.
    Fit(FitArgs),
    /// Experiment drivers.
    #[command(subcommand)]
    Exp(ExpCmd),
}

#[derive(Args)]
struct Output {
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print JSON instead of a summary.
    #[arg(long)]
    json: bool,
    /// Include wall-clock timings (reports are then no longer reproducible byte for byte).
    #[arg(long)]
    timings: bool,
}

#[derive(Subcommand)]
enum ModelCmd {
    Build {
        /// Lattice shape, e.g. `4x4`.
        #[arg(long, conflicts_with_all = ["edges", "generating_class"])]
        lattice: Option<String>,
        /// Edges as `1-2,2-3` (1-based).
        #[arg(long)]
        edges: Option<String>,
        /// Generating class as `1,2;2,3;1;2;3` (1-based, downward closed).
        #[arg(long)]
        generating_class: Option<String>,
        /// Number of variables (required with --edges or --generating-class).
        #[arg(long)]
        p: Option<usize>,
        #[arg(long, default_value_t = 2)]
        levels: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Show {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    model: PathBuf,
    /// Parameter file (`theta`); drawn uniformly on (−scale, scale) when absent.
    #[arg(long)]
    theta: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    theta_scale: f64,
    #[arg(long, short = 'n')]
    n: usize,
    /// exact, gibbs or auto.
    #[arg(long, default_value = "auto")]
    method: String,
    #[arg(long, default_value_t = 1000)]
    burn_in: usize,
    #[arg(long, default_value_t = 10)]
    thinning: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Forbidden pattern `v=l,w=m` (1-based vertices); repeatable. Produces data on a face.
    #[arg(long)]
    forbid: Vec<String>,
    /// Samples CSV; a `.json` side file with the generating configuration is written next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum FaceCmd {
    Find {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        samples: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    Local {
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, required_unless_present = "fixture")]
        samples: Option<PathBuf>,
        /// Statistic fixture (`t` only, sample size unknown).
        #[arg(long)]
        fixture: Option<PathBuf>,
        /// `rows:k` or `1,2,3;4,5,6`.
        #[arg(long, default_value = "rows:2")]
        subsets: String,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Args)]
struct FitArgs {
    kind: String,
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    samples: PathBuf,
    /// True parameter (theta file or sampler side file) for the relative error.
    #[arg(long)]
    theta_star: Option<PathBuf>,
    /// Also fit the other family at the same hop and tabulate the discrepancies.
    #[arg(long)]
    check_equality: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Subcommand)]
enum ExpCmd {
    Face4x4 {
        #[arg(long)]
        fixture: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    Equality {
        #[arg(long, default_value_t = 5)]
        rows: usize,
        #[arg(long, default_value_t = 10)]
        cols: usize,
        #[arg(long, short = 'n', default_value_t = 500)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Also write the per-parameter table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    Existence {
        #[arg(long, value_delimiter = ',', default_value = "40,60,80")]
        n_list: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        replicates: usize,
        #[arg(long, default_value_t = 2)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    Rate {
        #[arg(long, default_value_t = 4)]
        size: usize,
        #[arg(long, value_delimiter = ',', default_value = "250,500,1000,2000,4000")]
        n_list: Vec<usize>,
        #[arg(long, default_value_t = 20)]
        replicates: usize,
        #[arg(long, default_value_t = 3)]
        seed: u64,
        #[arg(long, default_value = "ps")]
        estimator: String,
        #[command(flatten)]
        output: Output,
    },
}

type Res<T> = std::result::Result<T, Error>;

fn emit<T: Serialize>(report: &T, output: &Output, summary: impl FnOnce() -> String) -> Res<()> {
    let json = io::to_json(report)?;
    if let Some(path) = &output.out {
        std::fs::write(path, &json)?;
    }
    if output.json {
        print!("{json}");
    } else {
        println!("{}", summary());
    }
    Ok(())
}

fn parse_pairs(s: &str, sep: char) -> Res<Vec<(usize, usize)>> {
    s.split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|e| {
            let (a, b) = e
                .split_once(sep)
                .ok_or_else(|| Error::Invalid(format!("expected 'a{sep}b', got '{e}'")))?;
            let num = |x: &str| x.trim().parse::<usize>().map_err(|_| Error::Invalid(format!("bad number '{x}'")));
            Ok((num(a)?, num(b)?))
        })
        .collect()
}

fn one_based(v: usize) -> Res<usize> {
    v.checked_sub(1).ok_or_else(|| Error::Invalid("vertex ids are 1-based".into()))
}

fn model_cmd(cmd: ModelCmd) -> Res<u8> {
    match cmd {
        ModelCmd::Build { lattice, edges, generating_class, p, levels, out } => {
            let model = if let Some(shape) = lattice {
                let (r, c) = shape
                    .split_once('x')
                    .and_then(|(r, c)| Some((r.parse().ok()?, c.parse().ok()?)))
                    .ok_or_else(|| Error::Invalid(format!("bad lattice shape '{shape}'")))?;
                Model::lattice_with_levels(r, c, levels)?
            } else {
                let p = p.ok_or_else(|| Error::Invalid("--p is required".into()))?;
                match (edges, generating_class) {
                    (Some(e), None) => {
                        let e = parse_pairs(&e, '-')?
                            .into_iter()
                            .map(|(a, b)| Ok((one_based(a)?, one_based(b)?)))
                            .collect::<Res<Vec<_>>>()?;
                        Model::from_graph(vec![levels; p], &e)?
                    }
                    (None, Some(g)) => {
                        let class = g
                            .split(';')
                            .map(|d| {
                                d.split(',')
                                    .map(|x| {
                                        x.trim()
                                            .parse::<usize>()
                                            .map_err(|_| Error::Invalid(format!("bad vertex '{x}'")))
                                            .and_then(one_based)
                                    })
                                    .collect::<Res<Vec<_>>>()
                            })
                            .collect::<Res<Vec<_>>>()?;
                        Model::from_generating_class(vec![levels; p], &class)?
                    }
                    _ => return Err(Error::Invalid("give one of --lattice, --edges, --generating-class".into())),
                }
            };
            let json = io::model_to_json(&model)?;
            match out {
                Some(path) => std::fs::write(path, json)?,
                None => print!("{json}"),
            }
            Ok(0)
        }
        ModelCmd::Show { model, json } => {
            let m = io::read_model(model)?;
            if json {
                print!("{}", io::model_to_json(&m)?);
                return Ok(0);
            }
            println!("variables: {}", m.p());
            println!("levels: {:?}", m.levels());
            if let Some((r, c)) = m.lattice_shape() {
                println!("lattice: {r}x{c}");
            }
            println!("interaction sets: {}", m.interactions().len());
            println!("|J|: {}", m.j_len());
            match m.cell_count() {
                Some(c) => println!("cells: {c}"),
                None => println!("cells: overflow"),
            }
            for j in 0..m.j_len() {
                println!("  {}", m.j_label(j));
            }
            Ok(0)
        }
    }
}

fn sample_cmd(a: SampleArgs) -> Res<u8> {
    let model = io::read_model(&a.model)?;
    let theta = match &a.theta {
        Some(p) => ThetaFile::from_json(&std::fs::read_to_string(p)?, &model)?,
        None => draw_theta(&model, a.seed, a.theta_scale),
    };
    let base = match a.method.as_str() {
        "auto" => SamplerConfig::auto(&model, a.n, a.seed),
        m => SamplerConfig { method: m.parse::<Method>()?, ..SamplerConfig::exact(a.n, a.seed) },
    };
    let config = SamplerConfig { burn_in: a.burn_in, thinning: a.thinning, ..base };
    config.validate()?;
    let forbid = a
        .forbid
        .iter()
        .map(|f| parse_pairs(f, '='))
        .collect::<Res<Vec<_>>>()?;
    let samples = if forbid.is_empty() {
        sample(&model, &theta, &config)?
    } else {
        let spec = FaceSpec {
            forbid: forbid
                .iter()
                .map(|pat| pat.iter().map(|&(v, l)| Ok((one_based(v)?, l))).collect::<Res<Vec<_>>>())
                .collect::<Res<Vec<_>>>()?,
        };
        make_face_dataset(&model, &theta, &config, &spec)?.samples
    };
    io::write_samples_file(&a.out, &samples, &model)?;
    let sidecar = SampleSidecar {
        format_version: io::FORMAT_VERSION,
        provenance: provenance(&(&config, &theta, &forbid))?,
        sampler: config,
        theta,
        forbid,
    };
    let mut side = a.out.clone().into_os_string();
    side.push(".json");
    io::write_json(PathBuf::from(side), &sidecar)?;
    Ok(0)
}

fn face_summary(r: &FaceReport) -> String {
    let mut s = format!(
        "proper: {}\nfacial set: {} of {} cells\ndimension: {} (cone {})",
        r.proper, r.facial_set_size, r.cells, r.dimension, r.cone_dimension
    );
    if !r.local_dimensions.is_empty() {
        s += &format!(
            "\nlocal cone dimensions: {:?}\nextended cone dimensions: {:?}",
            r.local_cone_dimensions, r.extended_cone_dimensions
        );
    }
    if r.proper {
        s += &format!("\ncertificate: [{}]", r.g.join(", "));
    }
    s
}

fn face_cmd(cmd: FaceCmd) -> Res<u8> {
    let report = match cmd {
        FaceCmd::Find { model, samples, output } => {
            let m = io::read_model(model)?;
            let s = io::read_samples(samples, &m)?;
            let face = smallest_face(&cell_counts(&s, &m)?, &m)?;
            let r = FaceReport::from_face(&face);
            emit(&r, &output, || face_summary(&r))?;
            r
        }
        FaceCmd::Local { model, samples, fixture, subsets, output } => {
            let (m, stat) = match (&fixture, &model) {
                (Some(f), _) => {
                    let fx = StatisticFixture::from_json(&std::fs::read_to_string(f)?)?;
                    (Model::lattice(fx.lattice.rows, fx.lattice.cols)?, Some(fx.t))
                }
                (None, Some(mp)) => (io::read_model(mp)?, None),
                (None, None) => return Err(Error::Invalid("--model is required".into())),
            };
            let subsets = io::parse_subsets(&subsets, &m)?;
            let counts;
            let data = match &stat {
                Some(t) => Observed::Statistic { t, n: None },
                None => {
                    let path = samples.ok_or_else(|| Error::Invalid("--samples is required".into()))?;
                    counts = cell_counts(&io::read_samples(path, &m)?, &m)?;
                    Observed::Counts(&counts)
                }
            };
            let rep = local_face_analysis(&m, &subsets, data, &FaceOptions::default())?;
            let r = FaceReport::from_local(&rep);
            emit(&r, &output, || face_summary(&r))?;
            r
        }
    };
    Ok(if report.proper { 3 } else { 0 })
}

fn fit_cmd(a: FitArgs) -> Res<u8> {
    let estimator: Estimator = a.kind.parse()?;
    let model = io::read_model(&a.model)?;
    let samples = io::read_samples(&a.samples, &model)?;
    let theta_star = match &a.theta_star {
        Some(p) => Some(ThetaFile::from_json(&std::fs::read_to_string(p)?, &model)?),
        None => None,
    };
    let r = estimation_report(
        estimator,
        &samples,
        &model,
        theta_star.as_deref(),
        a.check_equality,
        a.output.timings,
    )?;
    emit(&r, &a.output, || {
        let mut s = format!("estimator: {}\nN: {}\n", estimator.name(), r.n);
        let flagged = r.fits.iter().filter(|f| f.nonexistence_flag).count();
        s += &format!("fits: {} ({} without a maximizer)\n", r.fits.len(), flagged);
        for (j, x) in r.theta_hat.iter().enumerate() {
            s += &format!("  {:<12} {x:>10.4}\n", model.j_label(j));
        }
        if let Some(e) = r.relative_mse {
            s += &format!("relative MSE: {e:.6}\n");
        }
        if !r.equality.is_empty() {
            let worst = r.equality.iter().map(|e| e.max_discrepancy).fold(0.0, f64::max);
            s += &format!("max conditional/marginal discrepancy: {worst:.3e}\n");
        }
        s += &format!("D_max: {:.4}  C_min: {:.4}", r.diagnostics.d_max_hat, r.diagnostics.c_min_hat);
        s
    })?;
    Ok(0)
}

fn exp_cmd(cmd: ExpCmd) -> Res<u8> {
    match cmd {
        ExpCmd::Face4x4 { fixture, output } => {
            let fx = match fixture {
                Some(p) => StatisticFixture::from_json(&std::fs::read_to_string(p)?)?,
                None => StatisticFixture::bundled()?,
            };
            let r = run_face4x4(&fx, output.timings)?;
            emit(&r, &output, || {
                format!(
                    "{}\nordering: {}\nextended - local: {:?} (expected {:?})\nt in face: {}\ncertificate valid: {}\nmatches expected dimensions: {}",
                    face_summary(&r.face),
                    r.ordering,
                    r.additivity,
                    r.expected_additivity,
                    r.t_in_face,
                    r.certificate_valid,
                    r.matches_expected
                )
            })?;
        }
        ExpCmd::Equality { rows, cols, n, seed, csv, output } => {
            let cfg = EqualityConfig { rows, cols, n, seed, ..Default::default() };
            let r = run_equality_study(&cfg, output.timings)?;
            if let Some(p) = csv {
                std::fs::write(p, r.to_csv()?)?;
            }
            emit(&r, &output, || {
                format!(
                    "max |ps - m1|: {:.3e}\nmax |ps2 - m2| where the buffer is the two-hop shell: {:.3e}\nvertices outside that hypothesis: {:?}",
                    r.max_discrepancy_hop1, r.max_discrepancy_hop2_hypothesis, r.hypothesis_fails
                )
            })?;
        }
        ExpCmd::Existence { n_list, replicates, seed, output } => {
            let cfg = ExistenceConfig { n_list, replicates, seed, ..Default::default() };
            let r = run_existence_study(&cfg, output.timings)?;
            emit(&r, &output, || {
                let mut s = format!("{:>4} {:<9} {:<7} {:>12} {:>9}\n", "N", "regime", "est.", "median rMSE", "poisoned");
                for row in &r.rows {
                    s += &format!(
                        "{:>4} {:<9} {:<7} {:>12.4} {:>6}/{}\n",
                        row.n,
                        row.regime,
                        row.estimator.name(),
                        row.median_relative_mse,
                        row.poisoned_replicates,
                        row.replicates
                    );
                }
                s += &format!("on-face above off-face everywhere: {}", r.ordering_holds);
                s
            })?;
        }
        ExpCmd::Rate { size, n_list, replicates, seed, estimator, output } => {
            let cfg = RateConfig {
                rows: size,
                cols: size,
                n_list,
                replicates,
                seed,
                estimator: estimator.parse()?,
                ..Default::default()
            };
            let r = run_rate_study(&cfg, output.timings)?;
            emit(&r, &output, || {
                let mut s = String::new();
                for p in &r.points {
                    s += &format!("N={:<6} median error {:.4}\n", p.n, p.median_error);
                }
                s += &format!(
                    "slope: {:.3}\nsum d_v / |J| = {}/{} = {}",
                    r.slope, r.sum_d_v, r.j_len, r.efficiency_ratio
                );
                s
            })?;
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Model(c) => model_cmd(c),
        Cmd::Sample(a) => sample_cmd(a),
        Cmd::Face(c) => face_cmd(c),
        Cmd::Fit(a) => fit_cmd(a),
        Cmd::Exp(c) => exp_cmd(c),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Numerical(_) | Error::Lp(_) | Error::Certificate(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}
