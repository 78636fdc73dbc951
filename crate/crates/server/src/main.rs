use std::io::{BufRead, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mini_internet::bgpsim::{converge, DEFAULT_MAX_ROUNDS};
use mini_internet::grader::{parse_rubric, run_rubric};
use mini_internet::monitor::{connectivity_matrix, diagnose};
use mini_internet::scenario::{load_scenario, run_scenario, script_notes};
use mini_internet::shell::Session;
use mini_internet::topo::{instantiate, parse_topology_spec, Asn, Network, DEFAULT_TOPOLOGY};
use mininet_sim::{router, spawn_refresh, AppState, Tokens};

#[derive(Parser)]
#[command(name = "mininet-sim", version, about = "Classroom mini-Internet emulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse and instantiate a topology, converge it and print the matrix.
    Build {
        topology: PathBuf,
        /// Configure every AS with the reference configuration.
        #[arg(long)]
        reference: bool,
    },
    /// Replay a scenario directory.
    Run {
        dir: PathBuf,
        /// Output directory (default: <dir>/out).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Interactive session bound to one AS.
    Shell {
        #[arg(long = "as")]
        asn: Asn,
        #[command(flatten)]
        net: NetArgs,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: String,
        /// Converge deferred changes on this interval; 0 is event-driven only.
        #[arg(long, default_value_t = 0)]
        refresh_ms: u64,
        /// Write the bearer tokens here instead of stdout.
        #[arg(long)]
        token_file: Option<PathBuf>,
        #[command(flatten)]
        net: NetArgs,
    },
    /// Grade one AS against a rubric file.
    Grade {
        #[arg(long = "as")]
        asn: Asn,
        #[arg(long)]
        rubric: PathBuf,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        net: NetArgs,
    },
}

#[derive(clap::Args)]
struct NetArgs {
    /// Topology file (default: the shipped 20-AS topology).
    #[arg(long)]
    topology: Option<PathBuf>,
    /// Scenario directory whose topology and configs to load.
    #[arg(long, conflicts_with = "topology")]
    scenario: Option<PathBuf>,
}

impl NetArgs {
    fn load(&self) -> Result<Network, String> {
        if let Some(dir) = &self.scenario {
            let sc = load_scenario(dir).map_err(|e| e.to_string())?;
            let mut net = instantiate(&sc.topology).map_err(|e| e.to_string())?;
            for (asn, scripts) in &sc.configs {
                for (dev, script) in scripts {
                    let o = mini_internet::confcli::load_config_script(&mut net, *asn, dev, script, false)
                        .map_err(|e| e.to_string())?;
                    for n in script_notes(*asn, dev, &o) {
                        eprintln!("{n}");
                    }
                }
            }
            return Ok(net);
        }
        let text = match &self.topology {
            Some(p) => read(p)?,
            None => DEFAULT_TOPOLOGY.to_string(),
        };
        let spec = parse_topology_spec(&text).map_err(|e| e.to_string())?;
        instantiate(&spec).map_err(|e| e.to_string())
    }
}

fn read(p: &Path) -> Result<String, String> {
    std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("error")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.cmd {
        Cmd::Build { topology, reference } => {
            let spec = parse_topology_spec(&read(&topology)?).map_err(|e| e.to_string())?;
            let mut net = instantiate(&spec).map_err(|e| e.to_string())?;
            if reference {
                for asn in spec.asns() {
                    for phase in [1, 2] {
                        net.apply_reference_phase(asn, phase).map_err(|e| e.to_string())?;
                    }
                }
            }
            let r = converge(&mut net, DEFAULT_MAX_ROUNDS);
            let m = connectivity_matrix(&net);
            println!(
                "{} ASes, {} IXPs, {} devices; {} in {} rounds",
                spec.ases.len(),
                spec.ixps.len(),
                net.devices.len(),
                if r.converged { "converged" } else { "not converged" },
                r.rounds
            );
            print!("{}", m.render());
            for f in diagnose(&m).findings {
                println!("{:?} AS {}{}", f.code, f.asn, f.peer.map(|p| format!(" peer {p}")).unwrap_or_default());
            }
            Ok(if r.converged { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Cmd::Run { dir, out } => {
            let out = out.unwrap_or_else(|| dir.join("out"));
            let res = run_scenario(&dir, &out).map_err(|e| e.to_string())?;
            for n in &res.notes {
                eprintln!("{n}");
            }
            for g in &res.grades {
                println!("AS {}: {}/{}", g.asn, g.score, g.max_score);
            }
            for f in &res.failures {
                println!(
                    "no convergence after {} rounds (event {:?}), churning: {:?}",
                    f.report.rounds, f.event, f.report.churning
                );
            }
            if let Some(m) = res.last_matrix() {
                print!("{}", m.render());
            }
            println!("outputs in {}", out.display());
            Ok(if res.success() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Cmd::Shell { asn, net } => {
            let mut network = net.load()?;
            if network.spec.as_spec(asn).is_none() {
                return Err(format!("unknown AS {asn}"));
            }
            converge(&mut network, DEFAULT_MAX_ROUNDS);
            let mut s = Session::new(asn);
            let stdin = std::io::stdin();
            let mut lines = stdin.lock().lines();
            loop {
                print!("{}", s.prompt());
                std::io::stdout().flush().ok();
                let Some(Ok(line)) = lines.next() else { break };
                match s.handle(&mut network, &line) {
                    Ok(r) => {
                        print!("{}", r.output);
                        if r.exit {
                            break;
                        }
                    }
                    Err(e) => println!("% {e}"),
                }
            }
            for l in &s.log {
                log::info!("{l}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Serve {
            port,
            bind,
            refresh_ms,
            token_file,
            net,
        } => {
            let network = net.load()?;
            let tokens = Tokens::generate(&network.spec.asns(), &mut rand::thread_rng());
            let mut listing = format!("instructor {}\n", tokens.instructor);
            for (a, t) in &tokens.groups {
                listing.push_str(&format!("as{a} {t}\n"));
            }
            match token_file {
                Some(p) => std::fs::write(&p, listing).map_err(|e| format!("{}: {e}", p.display()))?,
                None => print!("{listing}"),
            }
            let addr: SocketAddr = format!("{bind}:{port}").parse().map_err(|e| format!("bad address: {e}"))?;
            let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
            rt.block_on(async move {
                let state = AppState::new(network, tokens);
                if refresh_ms > 0 {
                    spawn_refresh(state.clone(), refresh_ms);
                }
                let listener = tokio::net::TcpListener::bind(addr)
                    .await
                    .map_err(|e| format!("bind {addr}: {e}"))?;
                eprintln!("listening on {addr}");
                axum::serve(listener, router(state)).await.map_err(|e| e.to_string())
            })?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Grade { asn, rubric, json, net } => {
            let rubric = parse_rubric(&read(&rubric)?).map_err(|e| e.to_string())?;
            let mut network = net.load()?;
            let r = converge(&mut network, DEFAULT_MAX_ROUNDS);
            if !r.converged {
                eprintln!("warning: network did not converge after {} rounds", r.rounds);
            }
            let report = run_rubric(&network, asn, &rubric);
            if json {
                println!("{}", report.to_json());
            } else {
                print!("{}", report.render());
            }
            Ok(if report.all_passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
    }
}
