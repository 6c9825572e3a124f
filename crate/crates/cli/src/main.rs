use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use diqkd_core::bounds::{curve, curve_to_csv, detection_statistics, first_zero_crossing, keyrate, Scenario, Sweep};
use diqkd_core::chsh::{bb84_counterexample, phi_plus, werner, MeasurementSet};
use diqkd_core::eve::build_attack;
use diqkd_core::numfmt::sig;
use diqkd_core::protocol::{run_devices, Devices, ProtocolConfig};
use diqkd_core::verify::{blocks_sweep, lemma5_inequality_sweep, reduction_sweep, theorem1_sweep, Report};
use diqkd_core::{bounds::holevo_bound_di, Error, TSIRELSON};

const EXIT_USAGE: u8 = 2;
const EXIT_VIOLATION: u8 = 3;
const EXIT_NUMERIC: u8 = 4;
/// Largest accepted `|χ - F(S)|` for `attack`.
const SATURATION_TOL: f64 = 1e-9;

#[derive(Parser)]
#[command(name = "diqkd", version, about = "Device-independent QKD key rates, attacks and numerical checks")]
struct Cli {
    /// Default directory for output files.
    #[arg(long, env = "DIQKD_OUT_DIR", global = true, default_value = ".")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Key rate for given (Q, S).
    Rate {
        #[arg(long = "Q")]
        q: Option<f64>,
        #[arg(long = "S")]
        s: Option<f64>,
        #[arg(long, value_enum, default_value = "di")]
        scenario: ScenarioArg,
        /// Detection efficiency; without --Q/--S the statistics of Φ+ are used.
        #[arg(long)]
        eta: Option<f64>,
        /// Probability that Eve knows the settings.
        #[arg(long = "q")]
        know: Option<f64>,
    },
    /// Write the data behind a rate figure as CSV.
    Curve {
        /// 2: rate against QBER on the Werner line; 3: rate against detection efficiency.
        #[arg(long, value_parser = ["2", "3"])]
        figure: String,
        /// Which bounds to include in figure 2.
        #[arg(long, value_enum, default_value = "both")]
        scenario: CurveScenario,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1200)]
        steps: usize,
        /// Also write a gnuplot script next to the CSV.
        #[arg(long)]
        gnuplot: bool,
    },
    /// Print the optimal attack for (S, Q) and check that it saturates the bound.
    Attack {
        #[arg(long = "S")]
        s: f64,
        #[arg(long = "Q", default_value_t = 0.0)]
        q: f64,
    },
    /// Run a numerical verification sweep; exits 3 on any violation.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Failure CSV (header only when clean).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Number of Bob angles per sample in the theorem1 suite.
        #[arg(long, default_value_t = 16)]
        phi_grid: usize,
    },
    /// Simulate the protocol under a collective attack.
    Simulate {
        /// phiplus, werner:P or attack:S,Q
        #[arg(long)]
        state: String,
        #[arg(long, default_value_t = 100_000)]
        n: u64,
        #[arg(long, default_value_t = 1.0)]
        eta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Round log CSV.
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long)]
        no_symmetrize: bool,
    },
    /// The separable model reproducing ideal BB84 statistics.
    Bb84Demo,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Di,
    Standard,
    Detection,
    Partial,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum CurveScenario {
    Di,
    Standard,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Lemma5,
    Theorem1,
    Blocks,
    Reduction,
}

enum Failure {
    Usage(String),
    Violation(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::Precondition(_) | Error::Inconsistent(_) => Failure::Usage(e.to_string()),
            Error::Numeric(_) | Error::Estimation(_) | Error::Io(_) => Failure::Numeric(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Numeric(format!("i/o error: {e}"))
    }
}

type CliResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Rate { q, s, scenario, eta, know } => rate(q, s, scenario, eta, know),
        Command::Curve { figure, scenario, out, steps, gnuplot } => {
            let out = out.unwrap_or_else(|| cli.out_dir.join(format!("figure{figure}.csv")));
            curve_cmd(&figure, scenario, &out, steps, gnuplot)
        }
        Command::Attack { s, q } => attack(s, q),
        Command::Verify { suite, samples, seed, out, phi_grid } => {
            let out = out.unwrap_or_else(|| cli.out_dir.join(format!("verify_{}.csv", suite_name(suite))));
            verify(suite, samples, seed, &out, phi_grid)
        }
        Command::Simulate { state, n, eta, seed, log, no_symmetrize } => {
            simulate(&state, n, eta, seed, log, !no_symmetrize)
        }
        Command::Bb84Demo => bb84_demo(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Violation(m)) => {
            eprintln!("violation: {m}");
            ExitCode::from(EXIT_VIOLATION)
        }
        Err(Failure::Numeric(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_NUMERIC)
        }
    }
}

fn require(v: Option<f64>, flag: &str, why: &str) -> Result<f64, Failure> {
    v.ok_or_else(|| Failure::Usage(format!("{flag} is required {why}")))
}

fn rate(q: Option<f64>, s: Option<f64>, scenario: ScenarioArg, eta: Option<f64>, know: Option<f64>) -> CliResult {
    let (q, s, scenario) = match scenario {
        ScenarioArg::Di => (require(q, "--Q", "")?, require(s, "--S", "")?, Scenario::DeviceIndependent),
        ScenarioArg::Standard => (require(q, "--Q", "")?, require(s, "--S", "")?, Scenario::Standard),
        ScenarioArg::Detection => {
            let eta = require(eta, "--eta", "for the detection scenario")?;
            let (q0, s0) = detection_statistics(eta)?;
            (q.unwrap_or(q0), s.unwrap_or(s0), Scenario::DetectionEfficiency(eta))
        }
        ScenarioArg::Partial => (
            require(q, "--Q", "")?,
            require(s, "--S", "")?,
            Scenario::PartialKnowledge(require(know, "--q", "for the partial scenario")?),
        ),
    };
    print!("{}", keyrate(q, s, scenario)?.to_text());
    Ok(())
}

fn write_file(path: &Path, contents: &str) -> CliResult {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, contents)?;
    Ok(())
}

fn curve_cmd(figure: &str, which: CurveScenario, out: &Path, steps: usize, gnuplot: bool) -> CliResult {
    if steps == 0 {
        return Err(Failure::Usage("--steps must be positive".into()));
    }
    let runs: Vec<(Sweep, (f64, f64))> = if figure == "2" {
        let mut v = Vec::new();
        if which != CurveScenario::Standard {
            v.push((Sweep::WernerLine(Scenario::DeviceIndependent), (0.0, 0.12)));
        }
        if which != CurveScenario::Di {
            v.push((Sweep::WernerLine(Scenario::Standard), (0.0, 0.12)));
        }
        v
    } else {
        vec![(Sweep::DetectionEfficiency, (0.9, 1.0))]
    };

    let mut csv = String::from("scenario,x,Q,S,chi,rate\n");
    let mut names = Vec::new();
    for (sweep, range) in runs {
        let name = match sweep {
            Sweep::WernerLine(s) => s.to_string(),
            Sweep::DetectionEfficiency => "detection_efficiency".to_string(),
        };
        let rows = curve(sweep, range, steps)?;
        for line in curve_to_csv(&rows).lines().skip(1) {
            csv.push_str(&format!("{name},{line}\n"));
        }
        match first_zero_crossing(&rows) {
            Some(x) => println!("zero_crossing[{name}]={}", sig(x, 6)),
            None => println!("zero_crossing[{name}]=none"),
        }
        names.push(name);
    }
    write_file(out, &csv)?;
    println!("wrote {}", out.display());

    if gnuplot {
        let script = gnuplot_script(figure, out, &names);
        let path = out.with_extension("gp");
        write_file(&path, &script)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn gnuplot_script(figure: &str, csv: &Path, names: &[String]) -> String {
    let xlabel = if figure == "2" { "QBER Q" } else { "detection efficiency η" };
    let file = csv.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
    let plots: Vec<String> = names
        .iter()
        .map(|n| format!("'{file}' using (strcol(1) eq '{n}' ? $2 : 1/0):6 with lines title '{n}'"))
        .collect();
    format!(
        "set datafile separator ','\nset key autotitle columnhead\nset xlabel '{xlabel}'\nset ylabel 'key rate (bits)'\nset yrange [0:1]\nset grid\nplot {}\n",
        plots.join(", \\\n     ")
    )
}

fn attack(s: f64, q: f64) -> CliResult {
    let spec = build_attack(s, q)?;
    let chi = spec.chi();
    let f = holevo_bound_di(spec.s_target)?;
    let chsh = spec.chsh()?;
    let qber = spec.expected_qber()?;
    print!("{}", spec.to_kv_text());
    println!("chi={}", sig(chi, 15));
    println!("F_of_S={}", sig(f, 15));
    println!("saturation_gap={}", sig((chi - f).abs(), 3));
    println!("chsh_check={}", sig(chsh, 15));
    println!("qber_check={}", sig(qber, 15));
    let gap = (chi - f).abs().max((chsh - spec.s_target).abs()).max((qber - q).abs());
    if gap > SATURATION_TOL {
        return Err(Failure::Violation(format!("attack misses its targets by {gap}")));
    }
    println!("saturates=true");
    Ok(())
}

fn suite_name(s: Suite) -> &'static str {
    match s {
        Suite::Lemma5 => "lemma5",
        Suite::Theorem1 => "theorem1",
        Suite::Blocks => "blocks",
        Suite::Reduction => "reduction",
    }
}

fn verify(suite: Suite, samples: usize, seed: u64, out: &Path, phi_grid: usize) -> CliResult {
    let report: Report = match suite {
        Suite::Lemma5 => lemma5_inequality_sweep(samples, seed)?,
        Suite::Theorem1 => theorem1_sweep(samples, phi_grid, seed)?,
        Suite::Blocks => blocks_sweep(samples, seed)?,
        Suite::Reduction => reduction_sweep(samples, seed)?,
    };
    write_file(out, &report.to_csv())?;
    println!("{}", report.summary());
    println!("wrote {}", out.display());
    if report.is_clean() {
        Ok(())
    } else {
        Err(Failure::Violation(format!("{} failed checks in suite {}", report.violations.len(), suite_name(suite))))
    }
}

fn parse_state(spec: &str) -> Result<(Devices, Option<(f64, f64)>), Failure> {
    let bad = || Failure::Usage(format!("unrecognized state '{spec}' (expected phiplus, werner:P or attack:S,Q)"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
    if spec == "phiplus" {
        return Ok((Devices::honest(phi_plus(), MeasurementSet::standard()), None));
    }
    if let Some(p) = spec.strip_prefix("werner:") {
        return Ok((Devices::honest(werner(num(p)?)?, MeasurementSet::standard()), None));
    }
    if let Some(rest) = spec.strip_prefix("attack:") {
        let (s, q) = rest.split_once(',').ok_or_else(bad)?;
        let (s, q) = (num(s)?, num(q)?);
        let attack = build_attack(s, q)?;
        return Ok((Devices::from_attack(&attack), Some((attack.s_target, q))));
    }
    Err(bad())
}

fn simulate(state: &str, n: u64, eta: f64, seed: u64, log: Option<PathBuf>, symmetrize: bool) -> CliResult {
    let (devices, target) = parse_state(state)?;
    let cfg = ProtocolConfig { eta, symmetrize_marginals: symmetrize, ..ProtocolConfig::new(n, seed) };
    let run = run_devices(&devices, &cfg)?;
    print!("{}", run.to_text());
    println!("max_marginal_bias={}", sig(run.max_marginal_bias(), 6));
    if let Some((s, q)) = target {
        let chi_target = holevo_bound_di(s)?;
        println!("S_target={}", sig(s, 12));
        println!("Q_target={}", sig(q, 12));
        println!("chi_target={}", sig(chi_target, 12));
        println!("z_S={}", sig((run.s_hat() - s).abs() / run.sigma_s, 4));
        println!("z_Q={}", sig((run.q_hat() - q).abs() / run.sigma_q, 4));
    }
    if run.s_hat() > TSIRELSON {
        println!("note=S_hat above 2√2 by statistical fluctuation; clamped for the bound");
    }
    if let Some(path) = log {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        run.log.write_csv(BufWriter::new(fs::File::create(&path)?))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn bb84_demo() -> CliResult {
    let demo = bb84_counterexample()?;
    println!("X,Y,P(+1+1),P(+1-1),P(-1+1),P(-1-1)");
    for x in 0..2u8 {
        for y in 0..2u8 {
            let p = demo.table.require(x, y)?.probs;
            println!("{x},{y},{},{},{},{}", sig(p[0][0], 6), sig(p[0][1], 6), sig(p[1][0], 6), sig(p[1][1], 6));
        }
    }
    println!("deviation_from_ideal={}", sig(demo.deviation_from_ideal(), 3));
    println!("eve_uncertainty_alice={}", sig(demo.eve_uncertainty_alice, 6));
    println!("eve_uncertainty_bob={}", sig(demo.eve_uncertainty_bob, 6));
    println!("max_chsh_over_roles={}", sig(demo.max_chsh_over_roles, 12));
    let pairs = ["A0B0", "A0B1", "A1B0", "A1B1"];
    for (name, s) in pairs.iter().zip(demo.qubit_pair_chsh) {
        println!("horodecki_{name}={}", sig(s, 12));
    }
    let local = demo.max_chsh_over_roles <= 2.0 + diqkd_core::CHSH_SLACK;
    println!("verdict={}", if local { "S<=2: local model, no device-independent security" } else { "S>2" });
    if local {
        Ok(())
    } else {
        Err(Failure::Violation("the separable model violates CHSH".into()))
    }
}
