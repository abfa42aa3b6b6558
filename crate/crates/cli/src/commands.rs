use std::path::{Path, PathBuf};

use mfising::diagnostics::{gelman_rubin_split, summarize, CoverageStudy};
use mfising::io;
use mfising::model::{ModelSummary, Theta};
use mfising::posterior::{GradientSource, Posterior, PriorSpec};
use mfising::samplers::{
    grid_search, run_chain, Chain, ChiSchedule, GridSpec, Kernel, SamplerConfig,
};
use mfising::scenarios::{Scenario, ScenarioRun};
use mfising::simulate::{Dataset, DatasetMeta};
use mfising::{Error, Result, RngSpec};
use rayon::prelude::*;

use crate::config::{ConfigEcho, ConfigMap};
use crate::{GridArgs, SamplerArgs, ThetaArgs};

/// Default seed for `reproduce`; the published manifests use this value.
const DEFAULT_SCENARIO_SEED: u64 = 2;

fn parse_triple(text: &str) -> Result<[f64; 3]> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(Error::InvalidConfig(format!(
            "expected three comma-separated values, got `{text}`"
        )));
    }
    let mut out = [0.0f64; 3];
    for (slot, part) in out.iter_mut().zip(&parts) {
        *slot = part
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("not a number: `{part}`")))?;
    }
    Ok(out)
}

fn resolve_theta(args: &ThetaArgs, cfg: &ConfigMap) -> Result<Theta> {
    let k = args.k.or(cfg.f64("theta.k")?);
    let j = args.j.or(cfg.f64("theta.j")?);
    let h = args.h.or(cfg.f64("theta.h")?);
    match (k, j, h) {
        (Some(k), Some(j), Some(h)) => Ok(Theta::new(k, j, h)),
        _ => Err(Error::InvalidConfig(
            "parameters required: pass --K --J --h or theta.k/j/h config keys".into(),
        )),
    }
}

fn resolve_sampler(
    args: &SamplerArgs,
    cfg: &ConfigMap,
) -> Result<(SamplerConfig, usize, PriorSpec)> {
    let mut sampler = SamplerConfig::default();
    if let Some(kernel) = args.kernel.clone().or(cfg.string("sampler.kernel")?) {
        sampler.kernel = kernel.parse()?;
    }
    if let Some(v) = args.iters.or(cfg.usize("sampler.iters")?) {
        sampler.n_iter = v;
    }
    if let Some(v) = args.burnin.or(cfg.usize("sampler.burnin")?) {
        sampler.burn_in = v;
    }
    if let Some(v) = args.eps.or(cfg.f64("sampler.step_size")?) {
        sampler.step_size = v;
    }
    if let Some(v) = args.leapfrog.or(cfg.usize("sampler.leapfrog")?) {
        sampler.leapfrog_steps = v;
    }
    let chi_burnin = args.chi_burnin.or(cfg.f64("sampler.chi_burnin")?);
    let chi_after = args.chi_after.or(cfg.f64("sampler.chi_after")?);
    sampler.chi = ChiSchedule {
        burnin: chi_burnin.unwrap_or(sampler.chi.burnin),
        after: chi_after.unwrap_or(sampler.chi.after),
    };
    if let Some(v) = args.amh_scale.or(cfg.f64("sampler.amh_scale")?) {
        sampler.amh_scale = v;
    }
    if let Some(v) = args.amh_warmup.or(cfg.usize("sampler.amh_warmup")?) {
        sampler.amh_warmup = v;
    }
    if let Some(v) = args.amh_fallback_sd.or(cfg.f64("sampler.amh_fallback_sd")?) {
        sampler.amh_fallback_sd = v;
    }
    if let Some(v) = args.jitter.or(cfg.f64("sampler.jitter")?) {
        sampler.jitter = v;
    }
    sampler.adapt_step_size =
        args.adapt_eps || cfg.bool("sampler.adapt_step_size")?.unwrap_or(false);

    let chains = args.chains.or(cfg.usize("sampler.chains")?).unwrap_or(4);
    if chains == 0 {
        return Err(Error::InvalidConfig("need at least one chain".into()));
    }
    let prior_sd = args.prior_sd.or(cfg.f64("prior.sd")?);
    let prior = match prior_sd {
        Some(sd) => PriorSpec::isotropic(sd)?,
        None => PriorSpec::default(),
    };
    Ok((sampler, chains, prior))
}

fn resolve_grad(args: &SamplerArgs, cfg: &ConfigMap) -> Result<GradientSource> {
    match args.grad.clone().or(cfg.string("sampler.grad")?) {
        None => Ok(GradientSource::Posterior),
        Some(s) => match s.as_str() {
            "posterior" => Ok(GradientSource::Posterior),
            "likelihood" => Ok(GradientSource::Likelihood),
            other => Err(Error::InvalidConfig(format!(
                "unknown gradient source `{other}` (expected posterior or likelihood)"
            ))),
        },
    }
}

fn resolve_grid(args: &GridArgs, cfg: &ConfigMap) -> Result<GridSpec> {
    let mut grid = GridSpec::default();
    let parse_bound = |text: &str| -> Result<[f64; 3]> {
        if text.contains(',') {
            parse_triple(text)
        } else {
            let v: f64 = text
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("not a number: `{text}`")))?;
            Ok([v; 3])
        }
    };
    if let Some(text) = args.grid_lo.clone().or(cfg.string("grid.lo")?) {
        grid.lo = parse_bound(&text)?;
    }
    if let Some(text) = args.grid_hi.clone().or(cfg.string("grid.hi")?) {
        grid.hi = parse_bound(&text)?;
    }
    if let Some(step) = args.grid_step.or(cfg.f64("grid.step")?) {
        grid.step = step;
    }
    Ok(grid)
}

fn load_dataset(path: &Path, n_flag: Option<usize>) -> Result<Dataset> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => io::read_dataset_json(path),
        Some("csv") => {
            let n = n_flag.ok_or_else(|| {
                Error::InvalidConfig("CSV datasets need --n (spectrum size)".into())
            })?;
            let meta = DatasetMeta {
                theta_true: None,
                seed: 0,
                stream: 0,
            };
            io::read_dataset_csv(path, n, meta)
        }
        _ => Err(Error::InvalidConfig(format!(
            "unrecognized dataset extension: {}",
            path.display()
        ))),
    }
}

fn echo_sampler(echo: &mut ConfigEcho, sampler: &SamplerConfig, chains: usize, prior: &PriorSpec) {
    echo.put("sampler.kernel", sampler.kernel.to_string());
    echo.put("sampler.iters", sampler.n_iter as u64);
    echo.put("sampler.burnin", sampler.burn_in as u64);
    echo.put("sampler.chains", chains as u64);
    echo.put("sampler.step_size", sampler.step_size);
    echo.put("sampler.leapfrog", sampler.leapfrog_steps as u64);
    echo.put("sampler.chi_burnin", sampler.chi.burnin);
    echo.put("sampler.chi_after", sampler.chi.after);
    echo.put("sampler.amh_scale", sampler.amh_scale);
    echo.put("sampler.amh_warmup", sampler.amh_warmup as u64);
    echo.put("sampler.amh_fallback_sd", sampler.amh_fallback_sd);
    echo.put("sampler.jitter", sampler.jitter);
    echo.put("sampler.adapt_step_size", sampler.adapt_step_size);
    echo.put("prior.sd", prior.sd[0]);
}

pub fn simulate(
    theta_args: ThetaArgs,
    n: Option<usize>,
    m: Option<usize>,
    seed: Option<u64>,
    stream: Option<u64>,
    out: Option<PathBuf>,
    config: Option<PathBuf>,
) -> Result<()> {
    let cfg = ConfigMap::load(config.as_deref())?;
    let theta = resolve_theta(&theta_args, &cfg)?;
    let n = n
        .or(cfg.usize("data.n")?)
        .ok_or_else(|| Error::InvalidConfig("--n required".into()))?;
    let m = m
        .or(cfg.usize("data.m")?)
        .ok_or_else(|| Error::InvalidConfig("--m required".into()))?;
    let seed = seed.or(cfg.u64("rng.seed")?).unwrap_or(0);
    let stream = stream.or(cfg.u64("rng.stream")?).unwrap_or(0);
    let out = out
        .or(cfg.string("out.prefix")?.map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("dataset"));

    let data = Dataset::sample(theta, n, m, RngSpec::new(seed, stream))?;
    let csv_path = out.with_extension("csv");
    let json_path = out.with_extension("json");
    io::write_dataset_csv(&csv_path, &data)?;
    io::write_dataset_json(&json_path, &data)?;

    let s = data.suffstats();
    let moments = data.empirical_moments();
    println!("dataset: N={n} M={m} seed={seed} stream={stream} theta={theta}");
    println!("suffstats: S1={} S2={} S3={}", s.s1, s.s2, s.s3);
    println!(
        "sample moments: mean={:.6} mean(m^2)={:.6} mean(m^3)={:.6}",
        moments[0], moments[1], moments[2]
    );
    print_histogram(data.values());
    println!("wrote {} and {}", csv_path.display(), json_path.display());
    Ok(())
}

fn print_histogram(values: &[f64]) {
    const BINS: usize = 21;
    let mut counts = [0usize; BINS];
    for &m in values {
        let bin = (((m + 1.0) / 2.0) * BINS as f64) as usize;
        counts[bin.min(BINS - 1)] += 1;
    }
    let max = counts.iter().copied().max().unwrap_or(1).max(1);
    println!("histogram over [-1, 1]:");
    for (i, &count) in counts.iter().enumerate() {
        let lo = -1.0 + 2.0 * i as f64 / BINS as f64;
        let bar = "#".repeat(count * 40 / max);
        println!("  {lo:6.2} {count:>7} {bar}");
    }
}

#[allow(clippy::too_many_arguments)]
pub fn fit(
    data_path: Option<PathBuf>,
    n: Option<usize>,
    init: Option<String>,
    level: Option<f64>,
    seed: Option<u64>,
    stream: Option<u64>,
    sampler_args: SamplerArgs,
    grid_args: GridArgs,
    out: Option<PathBuf>,
    config: Option<PathBuf>,
) -> Result<()> {
    let cfg = ConfigMap::load(config.as_deref())?;
    let data_path = data_path
        .or(cfg.string("data.path")?.map(PathBuf::from))
        .ok_or_else(|| Error::InvalidConfig("--data required".into()))?;
    let n = n.or(cfg.usize("data.n")?);
    let data = load_dataset(&data_path, n)?;
    let (sampler, n_chains, prior) = resolve_sampler(&sampler_args, &cfg)?;
    let grad = resolve_grad(&sampler_args, &cfg)?;
    let grid = resolve_grid(&grid_args, &cfg)?;
    let level = level.or(cfg.f64("report.level")?).unwrap_or(0.95);
    let seed = seed.or(cfg.u64("rng.seed")?).unwrap_or(0);
    let stream_base = stream.or(cfg.u64("rng.stream")?).unwrap_or(0);
    let out = out
        .or(cfg.string("out.prefix")?.map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("fit"));
    let init = match init.or(cfg.string("fit.init")?) {
        Some(text) => Some(Theta::from_array(parse_triple(&text)?)),
        None => None,
    };

    let posterior = Posterior::new(&data, prior)?.with_gradient_source(grad);

    // Chain 0 starts at --init or the lattice argmax; the rest take the
    // next-best distinct lattice points.
    let starts: Vec<Theta> = if n_chains == 1 && init.is_some() {
        vec![init.unwrap()]
    } else {
        let mut ranked = grid_search(&posterior, &grid, n_chains)?;
        if ranked.len() < n_chains {
            return Err(Error::InvalidConfig(format!(
                "grid provides {} starting points for {} chains",
                ranked.len(),
                n_chains
            )));
        }
        if let Some(first) = init {
            ranked[0] = first;
        }
        ranked
    };

    let chains: Vec<Chain> = (0..n_chains)
        .into_par_iter()
        .map(|c| {
            let cfg_c = SamplerConfig {
                rng: RngSpec::new(seed, stream_base + c as u64),
                ..sampler
            };
            run_chain(&posterior, &cfg_c, starts[c])
        })
        .collect::<Result<_>>()?;

    let report = summarize(&chains, sampler.burn_in, level)?;

    let mut chain_paths = Vec::new();
    for (c, chain) in chains.iter().enumerate() {
        let path = PathBuf::from(format!("{}_chain{c}.csv", out.display()));
        io::write_chain_csv(&path, chain)?;
        chain_paths.push(path);
    }
    let report_path = PathBuf::from(format!("{}_report.json", out.display()));
    io::write_json(&report_path, &report)?;

    let mut echo = ConfigEcho::default();
    echo.put("data.path", data_path.display().to_string());
    echo.put("data.n", data.n() as u64);
    echo.put("rng.seed", seed);
    echo.put("rng.stream", stream_base);
    echo.put("report.level", level);
    echo.put(
        "sampler.grad",
        match grad {
            GradientSource::Posterior => "posterior",
            GradientSource::Likelihood => "likelihood",
        },
    );
    echo.put(
        "grid.lo",
        format!("{},{},{}", grid.lo[0], grid.lo[1], grid.lo[2]),
    );
    echo.put(
        "grid.hi",
        format!("{},{},{}", grid.hi[0], grid.hi[1], grid.hi[2]),
    );
    echo.put("grid.step", grid.step);
    echo_sampler(&mut echo, &sampler, n_chains, &prior);
    if let Some(first) = init {
        echo.put("fit.init", format!("{},{},{}", first.k, first.j, first.h));
    }
    let config_path = PathBuf::from(format!("{}_config.json", out.display()));
    io::write_json(&config_path, &echo.into_map())?;

    println!("starts:");
    for (c, s) in starts.iter().enumerate() {
        println!("  chain {c}: {s}");
    }
    print_report(&report);
    for path in &chain_paths {
        println!("wrote {}", path.display());
    }
    println!("wrote {}", report_path.display());
    println!("wrote {}", config_path.display());
    Ok(())
}

fn print_report(report: &mfising::diagnostics::DiagnosticsReport) {
    println!(
        "draws used: {} across {} chain(s), interval level {}",
        report.draws_used, report.n_chains, report.ci_level
    );
    for (c, name) in ["K", "J", "h"].iter().enumerate() {
        println!(
            "  {name}: mean {:>10.5}  ci [{:>10.5}, {:>10.5}]  psrf {:.4}",
            report.post_mean[c], report.ci[c][0], report.ci[c][1], report.psrf[c]
        );
    }
}

pub fn init_grid(
    data_path: Option<PathBuf>,
    n: Option<usize>,
    top: Option<usize>,
    prior_sd: Option<f64>,
    grid_args: GridArgs,
    out: Option<PathBuf>,
    config: Option<PathBuf>,
) -> Result<()> {
    let cfg = ConfigMap::load(config.as_deref())?;
    let data_path = data_path
        .or(cfg.string("data.path")?.map(PathBuf::from))
        .ok_or_else(|| Error::InvalidConfig("--data required".into()))?;
    let data = load_dataset(&data_path, n.or(cfg.usize("data.n")?))?;
    let grid = resolve_grid(&grid_args, &cfg)?;
    let top = top.or(cfg.usize("grid.top")?).unwrap_or(5);
    let prior = match prior_sd.or(cfg.f64("prior.sd")?) {
        Some(sd) => PriorSpec::isotropic(sd)?,
        None => PriorSpec::default(),
    };
    let posterior = Posterior::new(&data, prior)?;
    let ranked = grid_search(&posterior, &grid, top)?;
    println!("top {} lattice points by log-posterior:", ranked.len());
    let mut rows = Vec::new();
    for theta in &ranked {
        let lp = posterior.log_posterior(*theta)?;
        println!("  {theta}  logpost {lp:.3}");
        rows.push(serde_json::json!({
            "k": theta.k, "j": theta.j, "h": theta.h, "logpost": lp,
        }));
    }
    if let Some(out) = out {
        io::write_json(&out, &rows)?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

pub fn density(
    theta_texts: Vec<String>,
    n: Option<usize>,
    out: Option<PathBuf>,
    config: Option<PathBuf>,
) -> Result<()> {
    let cfg = ConfigMap::load(config.as_deref())?;
    let mut thetas: Vec<Theta> = Vec::new();
    for text in &theta_texts {
        thetas.push(Theta::from_array(parse_triple(text)?));
    }
    if thetas.is_empty() {
        if let (Some(k), Some(j), Some(h)) = (
            cfg.f64("theta.k")?,
            cfg.f64("theta.j")?,
            cfg.f64("theta.h")?,
        ) {
            thetas.push(Theta::new(k, j, h));
        }
    }
    if thetas.is_empty() {
        return Err(Error::InvalidConfig(
            "at least one --theta K,J,h required".into(),
        ));
    }
    let n = n
        .or(cfg.usize("data.n")?)
        .ok_or_else(|| Error::InvalidConfig("--n required".into()))?;

    let mut pmfs = Vec::new();
    for &theta in &thetas {
        pmfs.push(ModelSummary::new(theta, n)?.pmf);
    }
    let atoms: Vec<f64> = mfising::model::Spectrum::new(n)?.atoms().collect();

    match out {
        Some(path) => {
            io::write_density_csv(&path, &atoms, &pmfs)?;
            println!("wrote {}", path.display());
        }
        None => {
            let mut header = String::from("m");
            for i in 1..=pmfs.len() {
                header.push_str(&format!(",pmf_{i}"));
            }
            println!("{header}");
            for (k, &m) in atoms.iter().enumerate() {
                let mut line = format!("{m}");
                for pmf in &pmfs {
                    line.push_str(&format!(",{}", pmf[k]));
                }
                println!("{line}");
            }
        }
    }
    if thetas.len() == 2 {
        let tv = mfising::diagnostics::density_compare(thetas[0], thetas[1], n)?;
        println!("total variation distance: {tv}");
    }
    Ok(())
}

pub fn diagnose(
    chain_paths: Vec<PathBuf>,
    burnin: Option<usize>,
    level: Option<f64>,
    split: bool,
    out: Option<PathBuf>,
    config: Option<PathBuf>,
) -> Result<()> {
    let cfg = ConfigMap::load(config.as_deref())?;
    let burnin = burnin.or(cfg.usize("sampler.burnin")?).unwrap_or(0);
    let level = level.or(cfg.f64("report.level")?).unwrap_or(0.95);
    let split = split || cfg.bool("report.split")?.unwrap_or(false);

    let mut chains = Vec::new();
    for path in &chain_paths {
        chains.push(io::read_chain_csv(path)?);
    }
    let mut report = summarize(&chains, burnin, level)?;
    if split {
        report.psrf = gelman_rubin_split(&chains, burnin)?;
    }
    print_report(&report);
    if let Some(out) = out {
        io::write_json(&out, &report)?;
        println!("wrote {}", out.display());
    } else {
        println!(
            "{}",
            serde_json::to_string_pretty(&report).expect("report serializes")
        );
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn coverage(
    theta_args: ThetaArgs,
    n: Option<usize>,
    m: Option<usize>,
    reps: Option<usize>,
    level: Option<f64>,
    seed: Option<u64>,
    stream: Option<u64>,
    sampler_args: SamplerArgs,
    grid_args: GridArgs,
    out: Option<PathBuf>,
    config: Option<PathBuf>,
) -> Result<()> {
    let cfg = ConfigMap::load(config.as_deref())?;
    let theta = resolve_theta(&theta_args, &cfg)?;
    let n = n.or(cfg.usize("data.n")?).unwrap_or(300);
    let m = m.or(cfg.usize("data.m")?).unwrap_or(1000);
    let reps = reps.or(cfg.usize("coverage.reps")?).unwrap_or(20);
    let level = level.or(cfg.f64("report.level")?).unwrap_or(0.95);
    let seed = seed.or(cfg.u64("rng.seed")?).unwrap_or(0);
    let stream = stream.or(cfg.u64("rng.stream")?).unwrap_or(0);
    let (mut sampler, _chains, prior) = resolve_sampler(&sampler_args, &cfg)?;
    // Chains take a stream window far above the dataset streams.
    sampler.rng = RngSpec::new(seed, 1_000_000 + stream);
    let grid = resolve_grid(&grid_args, &cfg)?;

    let study = CoverageStudy {
        theta_true: theta,
        n,
        m_count: m,
        n_reps: reps,
        level,
        sampler,
        grid,
        prior,
        rng: RngSpec::new(seed, stream),
    };
    let result = study.run()?;
    println!(
        "coverage over {} replications at level {level}: K {:.3} J {:.3} h {:.3}",
        result.n_replications, result.coverage[0], result.coverage[1], result.coverage[2]
    );
    println!(
        "mean interval widths: K {:.4} J {:.4} h {:.4}",
        result.mean_width[0], result.mean_width[1], result.mean_width[2]
    );
    if !result.failed_reps.is_empty() {
        println!("failed replications: {:?}", result.failed_reps);
    }

    let mut echo = ConfigEcho::default();
    echo.put("theta.k", theta.k);
    echo.put("theta.j", theta.j);
    echo.put("theta.h", theta.h);
    echo.put("data.n", n as u64);
    echo.put("data.m", m as u64);
    echo.put("coverage.reps", reps as u64);
    echo.put("report.level", level);
    echo.put("rng.seed", seed);
    echo.put("rng.stream", stream);
    echo_sampler(&mut echo, &study.sampler, 1, &prior);
    let payload = serde_json::json!({
        "config": echo.into_map(),
        "result": result,
    });
    match out {
        Some(path) => {
            io::write_json(&path, &payload)?;
            println!("wrote {}", path.display());
        }
        None => println!(
            "{}",
            serde_json::to_string_pretty(&payload).expect("serializes")
        ),
    }
    Ok(())
}

pub fn reproduce(
    scenario_name: String,
    seed: Option<u64>,
    out: Option<PathBuf>,
    config: Option<PathBuf>,
) -> Result<()> {
    let cfg = ConfigMap::load(config.as_deref())?;
    let scenario = Scenario::parse(&scenario_name)?;
    let seed = seed
        .or(cfg.u64("rng.seed")?)
        .unwrap_or(DEFAULT_SCENARIO_SEED);
    let dir = out
        .or(cfg.string("out.dir")?.map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(format!("reproduce_{}", scenario.name())));

    let run = ScenarioRun::new(scenario, seed);
    let outcome = run.run()?;

    io::write_dataset_csv(&dir.join("dataset.csv"), &outcome.dataset)?;
    io::write_dataset_json(&dir.join("dataset.json"), &outcome.dataset)?;
    for result in outcome.kernels.values() {
        for (c, chain) in result.chains.iter().enumerate() {
            let path = dir.join(format!("chain_{}_{c}.csv", result.kernel));
            io::write_chain_csv(&path, chain)?;
        }
        let path = dir.join(format!("report_{}.json", result.kernel));
        io::write_json(&path, &result.report)?;
    }
    if let Some(mean) = outcome.posterior_mean {
        let atoms: Vec<f64> = outcome.dataset.spectrum().atoms().collect();
        let truth_pmf = ModelSummary::new(outcome.theta_true, outcome.dataset.n())?.pmf;
        let mean_pmf = ModelSummary::new(mean, outcome.dataset.n())?.pmf;
        io::write_density_csv(&dir.join("density.csv"), &atoms, &[truth_pmf, mean_pmf])?;
    }
    if scenario == Scenario::Nonident {
        if let Some(hybrid) = outcome.kernels.get(&Kernel::Hybrid) {
            let mut rows = String::from("chain,iter,b\n");
            for (c, chain) in hybrid.chains.iter().enumerate() {
                for (i, theta) in chain.kept(run.sampler.burn_in).iter().enumerate() {
                    let b = mfising::diagnostics::theoretical_mean(*theta, run.n)?;
                    rows.push_str(&format!("{c},{},{b}\n", run.sampler.burn_in + i + 1));
                }
            }
            io::write_text(&dir.join("b_trace.csv"), &rows)?;
        }
    }

    let manifest = outcome.manifest(&run);
    io::write_json(&dir.join("manifest.json"), &manifest)?;

    println!(
        "scenario {} (seed {seed}, truth {}):",
        scenario.name(),
        outcome.theta_true
    );
    for result in outcome.kernels.values() {
        println!(
            "  {:7} psrf [{:.4}, {:.4}, {:.4}] acceptance {:?}",
            result.kernel.to_string(),
            result.report.psrf[0],
            result.report.psrf[1],
            result.report.psrf[2],
            result.acceptance_rates()
        );
    }
    if let Some(tv) = outcome.density_tv {
        println!("  density tv (truth vs posterior mean): {tv:.4}");
    }
    for check in &outcome.checks {
        let op = match check.op {
            mfising::scenarios::CheckOp::Le => "<=",
            mfising::scenarios::CheckOp::Ge => ">=",
        };
        println!(
            "  check {:28} {:>12.4} {op} {:<8} {}",
            check.name,
            check.value,
            check.target,
            if check.pass { "PASS" } else { "FAIL" }
        );
    }
    println!(
        "overall: {} ({})",
        if outcome.all_pass() { "PASS" } else { "FAIL" },
        dir.join("manifest.json").display()
    );
    Ok(())
}
