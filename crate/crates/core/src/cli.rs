//! The `qhe` command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::net::TcpListener;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::noise_model::{end_to_end_noise_experiment, mc_uncorrectable_rate, NoiseConfig, NoiseReport};
use crate::qhe_protocol::{
    self, decrypt, encrypt, keygen, run_inproc, serve_one, CodeChoice, LogicalCircuit, LogicalGateKind, SessionConfig,
    Transport,
};
use crate::rng::{stream, streams};
use crate::security_analysis::{
    delta_report, region_fraction_with_mode, DeltaReport, RegionMode, RegionReport, SecurityParams, DEFAULT_RESOLUTION,
};
use crate::state_sim::{DensityMatrix, GateKind, GateOp, PureState, QuantumRegister};

#[derive(Debug, Parser)]
#[command(name = "qhe", version, about = "Permutation-key quantum homomorphic encryption simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Encrypt and decrypt one message, print the fidelity.
    Roundtrip(RoundtripArgs),
    /// Run a circuit under encryption and print the decrypted output.
    Evaluate(EvaluateArgs),
    /// Security bounds for the proposed and previous schemes.
    Security(SecurityArgs),
    /// Fraction of the (m, n) square where the proposed scheme is tighter.
    Region(RegionArgs),
    /// Logical error rate against physical depolarizing probability.
    NoiseSweep(NoiseArgs),
    /// Wait for one client and evaluate a circuit for it.
    Serve(ServeArgs),
    /// Connect to a server, send encrypted inputs, decrypt the result.
    Connect(ConnectArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum TextFormat {
    Text,
    Json,
}

#[derive(Debug, Args)]
struct SessionArgs {
    /// Session config JSON; flags given explicitly override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, required_unless_present = "config")]
    seed: Option<u64>,
    /// Half-width of each group of positions.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, value_parser = parse_code)]
    code: Option<CodeChoice>,
    /// Depolarizing probability on every input position when it reaches the server.
    #[arg(long)]
    noise_p: Option<f64>,
    /// Extra syndrome round on every wire after every k gates.
    #[arg(long)]
    syndrome_interval: Option<usize>,
}

impl SessionArgs {
    fn resolve(&self) -> Result<SessionConfig> {
        let mut config = match &self.config {
            Some(path) => SessionConfig::from_json(&std::fs::read_to_string(path)?)?,
            None => SessionConfig::new(1, CodeChoice::Steane, 0),
        };
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(m) = self.m {
            config.m = m;
        }
        if let Some(code) = self.code {
            config.n_code = code;
        }
        if let Some(p) = self.noise_p {
            config.noise_p = p;
        }
        if self.syndrome_interval.is_some() {
            config.syndrome_interval = self.syndrome_interval;
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Args)]
struct RoundtripArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    m: usize,
    #[arg(long, default_value = "steane", value_parser = parse_code)]
    code: CodeChoice,
    /// Message label (0, 1, +, -, +i, -i, T); random when omitted.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_state)]
    state: Option<PureState>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// Circuit file: one gate per line (`H 0`, `T 1`, `CNOT 0 1`).
    #[arg(long)]
    circuit: PathBuf,
    /// Comma-separated input labels, one per wire (0, 1, +, -, +i, -i, T).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse_state, required = true)]
    inputs: Vec<PureState>,
    #[command(flatten)]
    session: SessionArgs,
    #[arg(long, value_enum, default_value = "text")]
    format: TextFormat,
}

#[derive(Debug, Args)]
struct SecurityArgs {
    /// T-gate counts (comma-separated).
    #[arg(long, value_delimiter = ',', required = true)]
    r: Vec<u32>,
    #[arg(long, value_delimiter = ',', required = true, value_parser = clap::value_parser!(u64).range(1..))]
    m: Vec<u64>,
    #[arg(long, value_delimiter = ',', required = true, value_parser = clap::value_parser!(u64).range(1..))]
    n: Vec<u64>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum RegionModeArg {
    Area,
    Lattice,
}

#[derive(Debug, Args)]
struct RegionArgs {
    /// Side of the square [1, N]^2 (comma-separated for several).
    #[arg(long = "N", value_delimiter = ',', required = true, value_parser = clap::value_parser!(u64).range(2..))]
    n: Vec<u64>,
    /// Simpson step along m.
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    resolution: f64,
    #[arg(long, value_enum, default_value = "area")]
    mode: RegionModeArg,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum NoiseMode {
    /// Sample errors on the bare code and decode them.
    Code,
    /// Run the whole encrypted pipeline per trial.
    EndToEnd,
}

#[derive(Debug, Args)]
struct NoiseArgs {
    #[arg(long = "p-list", value_delimiter = ',', required = true)]
    p_list: Vec<f64>,
    #[arg(long, default_value_t = 100_000)]
    trials: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value = "code")]
    mode: NoiseMode,
    #[arg(long, default_value_t = 1)]
    m: usize,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    #[arg(long)]
    circuit: PathBuf,
    #[command(flatten)]
    session: SessionArgs,
}

#[derive(Debug, Args)]
struct ConnectArgs {
    /// Server address, host:port.
    #[arg(long)]
    address: String,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse_state, required = true)]
    inputs: Vec<PureState>,
    #[command(flatten)]
    session: SessionArgs,
    #[arg(long, value_enum, default_value = "text")]
    format: TextFormat,
}

fn parse_state(s: &str) -> std::result::Result<PureState, String> {
    PureState::from_label(s).map_err(|e| e.to_string())
}

fn parse_code(s: &str) -> std::result::Result<CodeChoice, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Runs the CLI on real stdio and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// Exit codes: 0 success, 2 usage or malformed input, 1 runtime failure.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    if !text.contains("Usage") {
                        use clap::CommandFactory;
                        let _ = write!(err, "\n{}\n", Cli::command().render_usage());
                    }
                    2
                }
            };
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::Malformed(_) | Error::Contract(_) => 2,
                _ => 1,
            }
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Roundtrip(a) => roundtrip(a, out),
        Command::Evaluate(a) => evaluate(a, out),
        Command::Security(a) => {
            let mut rows = Vec::new();
            for &r in &a.r {
                for &m in &a.m {
                    for &n in &a.n {
                        rows.push(delta_report(SecurityParams::new(r, m, n)?));
                    }
                }
            }
            emit_report(&Report::Delta(rows), a.format, out)
        }
        Command::Region(a) => {
            if !(a.resolution > 0.0) {
                return Err(Error::contract("resolution must be positive"));
            }
            let mode = match a.mode {
                RegionModeArg::Area => RegionMode::Area,
                RegionModeArg::Lattice => RegionMode::Lattice,
            };
            let rows = a
                .n
                .iter()
                .map(|&n| region_fraction_with_mode(n, a.resolution, mode))
                .collect::<Result<Vec<_>>>()?;
            emit_report(&Report::Region(rows), a.format, out)
        }
        Command::NoiseSweep(a) => noise_sweep(a, out),
        Command::Serve(a) => {
            let mut config = a.session.resolve()?;
            config.transport = Transport::Tcp;
            let circuit = read_circuit(&a.circuit)?;
            let listener = TcpListener::bind((a.host.as_str(), a.port))?;
            writeln!(out, "listening on {}", listener.local_addr()?)?;
            out.flush()?;
            let summary = serve_one(&config, &circuit, &listener)?;
            writeln!(
                out,
                "served: t_count {} transversal_gates {} syndrome_rounds {}",
                summary.t_count, summary.transversal_gates, summary.syndrome_rounds
            )?;
            Ok(())
        }
        Command::Connect(a) => {
            let mut config = a.session.resolve()?;
            config.transport = Transport::Tcp;
            config.address = Some(a.address.clone());
            let outcome = qhe_protocol::connect(&config, &a.inputs, a.address.as_str())?;
            print_outcome(out, a.format, &outcome, None, None)
        }
    }
}

fn roundtrip(a: RoundtripArgs, out: &mut dyn Write) -> Result<()> {
    let code = a.code.code();
    let mut rng = stream(a.seed, streams::CLIENT);
    let key = keygen(a.m, code.n(), &mut rng)?;
    let message = a.state.unwrap_or_else(|| PureState::random(1, &mut rng));
    let ct = encrypt(&key, &code, &message, 0)?;
    let d = decrypt(&key, &code, &ct, 0)?;
    writeln!(out, "positions {}", ct.register.num_positions())?;
    writeln!(out, "swap_count {}", d.swap_count)?;
    writeln!(out, "fidelity {}", sig7(d.state.fidelity_with_pure(&message)?))?;
    Ok(())
}

fn read_circuit(path: &PathBuf) -> Result<LogicalCircuit> {
    let text = std::fs::read_to_string(path)?;
    LogicalCircuit::parse(&text)
}

/// Dense reference output of `circuit` on `inputs`, without encryption.
fn plain_output(circuit: &LogicalCircuit, inputs: &[PureState]) -> Result<DensityMatrix> {
    let joint = inputs[1..].iter().fold(inputs[0].clone(), |acc, s| acc.tensor(s));
    let mut reg = QuantumRegister::from_pure(&joint);
    let mut rng = crate::rng::seeded(0);
    for g in &circuit.gates {
        let op = match g.gate {
            LogicalGateKind::X => GateOp::single(GateKind::X, g.wires[0]),
            LogicalGateKind::Z => GateOp::single(GateKind::Z, g.wires[0]),
            LogicalGateKind::H => GateOp::single(GateKind::H, g.wires[0]),
            LogicalGateKind::S => GateOp::single(GateKind::S, g.wires[0]),
            LogicalGateKind::T => GateOp::single(GateKind::T, g.wires[0]),
            LogicalGateKind::Cnot => GateOp::cnot(g.wires[0], g.wires[1]),
        };
        reg.apply_gate(&op, &mut rng)?;
    }
    reg.densify(&(0..inputs.len()).collect::<Vec<_>>())
}

fn evaluate(a: EvaluateArgs, out: &mut dyn Write) -> Result<()> {
    let config = a.session.resolve()?;
    let circuit = read_circuit(&a.circuit)?;
    if a.inputs.len() != circuit.num_wires {
        return Err(Error::contract(format!(
            "circuit has {} wires but {} inputs were given",
            circuit.num_wires,
            a.inputs.len()
        )));
    }
    let (outcome, summary) = run_inproc(&config, &circuit, &a.inputs)?;
    let ideal = plain_output(&circuit, &a.inputs)?;
    let fidelity = outcome.decryption.state.fidelity(&ideal)?;
    print_outcome(out, a.format, &outcome, Some(&summary), Some(fidelity))
}

fn print_outcome(
    out: &mut dyn Write,
    format: TextFormat,
    outcome: &qhe_protocol::SessionOutcome,
    summary: Option<&qhe_protocol::EvaluationSummary>,
    fidelity: Option<f64>,
) -> Result<()> {
    let rho = &outcome.decryption.state;
    match format {
        TextFormat::Json => {
            let mut obj = Map::new();
            if let Some(s) = summary {
                obj.insert("t_count".into(), json!(s.t_count));
                obj.insert("transversal_gates".into(), json!(s.transversal_gates));
                obj.insert("syndrome_rounds".into(), json!(s.syndrome_rounds));
            }
            obj.insert("swap_count".into(), json!(outcome.decryption.swap_count));
            if let Some(f) = fidelity {
                obj.insert("fidelity".into(), json!(round7(f)));
            }
            obj.insert("branch_log".into(), serde_json::to_value(&outcome.branch_log)?);
            let matrix: Vec<Vec<[f64; 2]>> = (0..rho.dim())
                .map(|i| {
                    (0..rho.dim())
                        .map(|j| {
                            let z = rho.entry(i, j);
                            [round7(z.re), round7(z.im)]
                        })
                        .collect()
                })
                .collect();
            obj.insert("density_matrix".into(), json!(matrix));
            writeln!(out, "{}", Value::Object(obj))?;
        }
        TextFormat::Text => {
            if let Some(s) = summary {
                writeln!(
                    out,
                    "t_count {} transversal_gates {} syndrome_rounds {}",
                    s.t_count, s.transversal_gates, s.syndrome_rounds
                )?;
            }
            writeln!(out, "swap_count {}", outcome.decryption.swap_count)?;
            if let Some(f) = fidelity {
                writeln!(out, "fidelity {}", sig7(f))?;
            }
            writeln!(out, "branch_log")?;
            for e in &outcome.branch_log {
                writeln!(out, "  {}", serde_json::to_string(e)?)?;
            }
            writeln!(out, "density_matrix")?;
            for i in 0..rho.dim() {
                let row: Vec<String> = (0..rho.dim())
                    .map(|j| {
                        let z = rho.entry(i, j);
                        format!("{}{:+}i", sig7(z.re), round7(z.im))
                    })
                    .collect();
                writeln!(out, "  {}", row.join(" "))?;
            }
        }
    }
    Ok(())
}

fn noise_sweep(a: NoiseArgs, out: &mut dyn Write) -> Result<()> {
    if a.jobs == Some(0) {
        return Err(Error::contract("--jobs must be at least 1"));
    }
    let work = || -> Result<Vec<NoiseReport>> {
        a.p_list
            .iter()
            .map(|&p| match a.mode {
                NoiseMode::Code => mc_uncorrectable_rate(&crate::css_code::steane_code(), p, a.trials, a.seed),
                NoiseMode::EndToEnd => end_to_end_noise_experiment(
                    &SessionConfig::new(a.m, CodeChoice::Steane, a.seed),
                    &NoiseConfig::transmission(p, a.trials, a.seed),
                ),
            })
            .collect()
    };
    let rows = match a.jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| Error::contract(e.to_string()))?
            .install(work)?,
        None => work()?,
    };
    emit_report(&Report::Noise(rows), a.format, out)
}

/// Typed reports the CLI can emit.
#[derive(Clone, Debug)]
pub enum Report {
    Delta(Vec<DeltaReport>),
    Region(Vec<RegionReport>),
    Noise(Vec<NoiseReport>),
}

enum Cell {
    Int(u64),
    Float(f64),
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => sig7(*v),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Float(v) => json!(round7(*v)),
        }
    }
}

impl Report {
    fn header(&self) -> &'static [&'static str] {
        match self {
            Report::Delta(_) => &[
                "r",
                "m",
                "n",
                "delta_proposed",
                "delta_previous_exact",
                "delta_previous_stirling",
            ],
            Report::Region(_) => &["N", "resolution", "fraction"],
            Report::Noise(_) => &[
                "p",
                "trials",
                "uncorrectable_rate",
                "decoder_failure_rate",
                "closed_form_pl",
                "stderr",
            ],
        }
    }

    fn rows(&self) -> Vec<Vec<Cell>> {
        use Cell::{Float, Int};
        match self {
            Report::Delta(rows) => rows
                .iter()
                .map(|d| {
                    vec![
                        Int(d.r.into()),
                        Int(d.m),
                        Int(d.n),
                        Float(d.delta_proposed),
                        Float(d.delta_previous_exact),
                        Float(d.delta_previous_stirling),
                    ]
                })
                .collect(),
            Report::Region(rows) => rows
                .iter()
                .map(|r| vec![Int(r.n), Float(r.resolution), Float(r.fraction)])
                .collect(),
            Report::Noise(rows) => rows
                .iter()
                .map(|r| {
                    vec![
                        Float(r.p),
                        Int(r.trials as u64),
                        Float(r.uncorrectable_rate),
                        Float(r.decoder_failure_rate),
                        Float(r.closed_form_pl),
                        Float(r.stderr),
                    ]
                })
                .collect(),
        }
    }
}

/// Writes a report as CSV (header plus one row per entry) or JSON (an object
/// for a single entry, an array otherwise). Floats carry 7 significant digits.
pub fn emit_report(report: &Report, format: Format, sink: &mut dyn Write) -> Result<()> {
    let header = report.header();
    let rows = report.rows();
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *sink);
            w.write_record(header).map_err(csv_error)?;
            for row in &rows {
                w.write_record(row.iter().map(Cell::text)).map_err(csv_error)?;
            }
            w.flush()?;
        }
        Format::Json => {
            let mut objects: Vec<Value> = rows
                .iter()
                .map(|row| {
                    Value::Object(
                        header
                            .iter()
                            .zip(row)
                            .map(|(k, c)| ((*k).to_string(), c.json()))
                            .collect(),
                    )
                })
                .collect();
            let value = if objects.len() == 1 {
                objects.pop().expect("one row")
            } else {
                Value::Array(objects)
            };
            writeln!(sink, "{value}")?;
        }
    }
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

/// `x` with 7 significant digits, fixed notation for moderate magnitudes.
pub fn sig7(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..7).contains(&exp) {
        return format!("{x:.6e}");
    }
    let decimals = (6 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}

fn round7(x: f64) -> f64 {
    sig7(x).parse().unwrap_or(x)
}
