use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use dofbench::dmc::{self, DmcSpec};
use dofbench::geometry::{write_halfspaces_csv, write_vertices_csv};
use dofbench::plot::region_svg;
use dofbench::rational::{self, Rational};
use dofbench::regions::{self, ScenarioFamily};
use dofbench::schemes::{self, SchemeId, SchemeParams};
use dofbench::sim::{self, SnrSweep};
use dofbench::{Execution, ScenarioConfig};

const DEFAULT_SEED: u64 = 1;

/// Degrees-of-freedom workbench for MISO broadcast channels with static and
/// dynamic users.
#[derive(Parser)]
#[command(name = "dofbench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inner and outer regions of a scenario as CSV, optionally SVG.
    Region {
        #[arg(long)]
        config: PathBuf,
        /// Output directory for the CSV files.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Noiseless scheme runs over many seeds.
    Verify {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long, default_value_t = 100)]
        seeds: u64,
        /// Writes the first seed's transcript as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo rate estimates and DoF slopes.
    Simulate {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long = "snr-db", value_delimiter = ',', default_values_t = [40.0, 60.0])]
        snr_db: Vec<f64>,
        #[arg(long, default_value_t = 2000)]
        trials: usize,
        /// Rate table CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Weighted sum-DoF gap between inner and outer regions.
    Gap {
        #[arg(long)]
        config: PathBuf,
        /// Extra weight vectors, one per flag, comma separated.
        #[arg(long)]
        weights: Vec<String>,
    },
    /// Degraded-message-set region of a finite-alphabet channel.
    Dmc {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0.0625)]
        grid: f64,
        #[arg(long = "u-card")]
        u_card: Option<usize>,
        #[arg(long = "v-card")]
        v_card: Option<usize>,
        /// Frontier CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Two-user region figures (fig4 to fig7) as SVG plus CSV.
    Figure {
        name: String,
        #[arg(long)]
        svg: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SchemeArgs {
    /// ps, mat-static, mat-dynamic, dd3, hpn, hpd2 or hpd-multi.
    #[arg(long)]
    scheme: SchemeId,
    #[arg(long = "T")]
    t: usize,
    #[arg(long = "Tprime")]
    t_prime: Option<usize>,
    /// Number of static users for hpn and hpd-multi.
    #[arg(long = "mprime")]
    m_prime: Option<usize>,
}

impl SchemeArgs {
    fn params(&self) -> Result<SchemeParams> {
        Ok(SchemeParams::new(self.scheme, self.t, self.t_prime, self.m_prime)?)
    }
}

/// Failure that maps to exit status 2.
#[derive(Debug)]
struct Usage(anyhow::Error);

fn usage<E: Into<anyhow::Error>>(e: E) -> Usage {
    Usage(e.into())
}

fn seed() -> Result<u64, Usage> {
    match std::env::var("DOF_SEED") {
        Ok(s) => s.trim().parse().with_context(|| format!("DOF_SEED={s:?} is not an integer")).map_err(usage),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn check_input(path: &Path) -> Result<(), Usage> {
    if !path.is_file() {
        return Err(usage(anyhow::anyhow!("input file {} does not exist", path.display())));
    }
    Ok(())
}

fn check_output(path: &Path, is_dir: bool) -> Result<(), Usage> {
    let parent_ok = |p: &Path| p.parent().is_none_or(|q| q.as_os_str().is_empty() || q.is_dir());
    let ok = if is_dir { path.is_dir() || (!path.exists() && parent_ok(path)) } else { !path.is_dir() && parent_ok(path) };
    if ok {
        Ok(())
    } else {
        Err(usage(anyhow::anyhow!("cannot write to {}", path.display())))
    }
}

fn load_family(path: &Path) -> Result<ScenarioFamily, Usage> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(usage)?;
    let cfg = ScenarioConfig::from_json(&text).map_err(usage)?;
    ScenarioFamily::from_config(cfg).map_err(usage)
}

fn write_region(family: &ScenarioFamily, dir: &Path) -> Result<regions::InnerRegion> {
    fs::create_dir_all(dir)?;
    let labels = family.labels();
    let inner = regions::inner_region(family)?;
    let outer = regions::outer_region(family)?;
    write_vertices_csv(fs::File::create(dir.join("inner_vertices.csv"))?, &labels, &inner.region.vertices)?;
    write_halfspaces_csv(fs::File::create(dir.join("inner_halfspaces.csv"))?, &labels, &inner.region.halfspaces)?;
    write_vertices_csv(fs::File::create(dir.join("outer_vertices.csv"))?, &labels, &outer.vertices)?;
    write_halfspaces_csv(fs::File::create(dir.join("outer_halfspaces.csv"))?, &labels, &outer.halfspaces)?;
    println!("family {} dim {}", family.tag, family.dim());
    println!("inner vertices {}:", inner.region.vertices.len());
    for v in inner.labeled_vertices() {
        println!("  ({})  {}", fmt_point(&v.point), v.scheme);
    }
    println!("outer vertices {}:", outer.vertices.len());
    for v in &outer.vertices {
        println!("  ({})", fmt_point(v));
    }
    Ok(inner)
}

fn write_svg(family: &ScenarioFamily, title: &str, path: &Path) -> Result<()> {
    let inner = regions::inner_region(family)?;
    let outer = regions::outer_region(family)?;
    let labels = if family.cfg.m_static == 1 && family.cfg.m_dynamic == 1 {
        ["d' (static)".to_string(), "d (dynamic)".to_string()]
    } else {
        let l = family.labels();
        [l[0].clone(), l.get(1).cloned().unwrap_or_default()]
    };
    let svg = region_svg(title, [&labels[0], &labels[1]], &inner.region, &outer)?;
    fs::write(path, svg)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn fmt_point(p: &[Rational]) -> String {
    p.iter().map(rational::pretty).collect::<Vec<_>>().join(", ")
}

fn run(cli: Cli) -> Result<ExitCode, Usage> {
    match cli.command {
        Command::Region { config, out, svg } => {
            check_input(&config)?;
            check_output(&out, true)?;
            if let Some(s) = &svg {
                check_output(s, false)?;
            }
            let family = load_family(&config)?;
            if svg.is_some() && family.dim() != 2 {
                return Err(usage(anyhow::anyhow!(
                    "SVG output needs a two-user scenario, this one has {} users",
                    family.dim()
                )));
            }
            write_region(&family, &out).map_err(usage)?;
            if let Some(s) = svg {
                let title = format!("{} {:?}", family.tag, family.cfg);
                write_svg(&family, &title, &s).map_err(usage)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { scheme, seeds, out } => {
            if let Some(o) = &out {
                check_output(o, false)?;
            }
            let params = scheme.params().map_err(usage)?;
            let first = seed()?;
            let report = schemes::verify_seeds(&params, first, seeds, Execution::Parallel).map_err(usage)?;
            println!("{}", report.summary_line());
            for (what, list) in [
                ("decode failure", &report.decode_failures),
                ("dof mismatch", &report.dof_mismatches),
                ("zero-forcing residual", &report.zf_failures),
            ] {
                if let Some(s) = list.first() {
                    println!("  {what} at seed {s} ({} total)", list.len());
                }
            }
            if let Some(o) = out {
                let tr = schemes::run(&params, first).map_err(usage)?;
                fs::write(&o, serde_json::to_string_pretty(&tr).map_err(usage)?).map_err(usage)?;
            }
            Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Simulate { scheme, snr_db, trials, out } => {
            if let Some(o) = &out {
                check_output(o, false)?;
            }
            let params = scheme.params().map_err(usage)?;
            let sweep = SnrSweep::new(snr_db, trials, seed()?).map_err(usage)?;
            let table = sim::rate_estimate(&params, &sweep, Execution::Parallel).map_err(usage)?;
            match out {
                Some(o) => {
                    sim::write_rates_csv(fs::File::create(&o).map_err(usage)?, &table).map_err(usage)?;
                }
                None => sim::write_rates_csv(std::io::stdout().lock(), &table).map_err(usage)?,
            }
            if table.snr_db.len() >= 2 {
                let report = sim::slope_report(&params, &table).map_err(usage)?;
                println!("{}", serde_json::to_string_pretty(&report).map_err(usage)?);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Gap { config, weights } => {
            check_input(&config)?;
            let family = load_family(&config)?;
            let mut sets = vec![vec![Rational::from_integer(1.into()); family.dim()]];
            for w in &weights {
                let parsed = rational::parse_list(w).map_err(usage)?;
                if parsed.len() != family.dim() {
                    return Err(usage(anyhow::anyhow!(
                        "weights {w:?} have {} entries, scenario has {} users",
                        parsed.len(),
                        family.dim()
                    )));
                }
                sets.push(parsed);
            }
            println!("family {} users ({})", family.tag, family.labels().join(", "));
            for w in sets {
                let g = regions::gap_report(&family, &w).map_err(usage)?;
                let ws: Vec<String> = w.iter().map(rational::pretty).collect();
                println!(
                    "weights ({}) inner_max {} outer_max {} gap {}",
                    ws.join(", "),
                    rational::pretty(&g.inner_max),
                    rational::pretty(&g.outer_max),
                    rational::pretty(&g.gap)
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Dmc { config, grid, u_card, v_card, out } => {
            check_input(&config)?;
            if let Some(o) = &out {
                check_output(o, false)?;
            }
            let text = fs::read_to_string(&config).map_err(usage)?;
            let spec = DmcSpec::from_json(&text).map_err(usage)?;
            for c in dmc::check_degraded(&spec).map_err(usage)? {
                println!(
                    "{} stage {} -> {}: degraded={} residual={:.2e}",
                    c.chain,
                    c.stage + 1,
                    c.stage + 2,
                    c.degraded,
                    c.residual
                );
            }
            let u = u_card.unwrap_or(spec.x_card);
            let v = v_card.unwrap_or(spec.x_card);
            let res = dmc::degraded_message_region(&spec, u, v, grid, Execution::Parallel).map_err(usage)?;
            println!(
                "evaluated {} distributions, {} frontier points, {} data-processing violations",
                res.evaluated,
                res.frontier.len(),
                res.dpi_violations
            );
            match out {
                Some(o) => dmc::write_frontier_csv(fs::File::create(&o).map_err(usage)?, &res.frontier).map_err(usage)?,
                None => dmc::write_frontier_csv(std::io::stdout().lock(), &res.frontier).map_err(usage)?,
            }
            Ok(if res.dpi_violations == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Figure { name, svg, out } => {
            check_output(&svg, false)?;
            if let Some(o) = &out {
                check_output(o, true)?;
            }
            let Some((family, caption)) = regions::figure_family(&name) else {
                return Err(usage(anyhow::anyhow!(
                    "unknown figure {name:?}, expected one of {}",
                    regions::FIGURES.join(", ")
                )));
            };
            if let Some(o) = out {
                write_region(&family, &o).map_err(usage)?;
            }
            write_svg(&family, &caption, &svg).map_err(usage)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
