//! `gecka`: serve, validate and export sessions, generate dungeons, run
//! headless games, report POAG statistics and build the seed corpus.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use gecka_core::io::assertions::assertions_to_tsv;
use gecka_core::io::corpus::{load_word_list, TsvCounts};
use gecka_core::io::{apply_session, bootstrap_corpus, extract_assertions, parse_session_xml, Session};
use gecka_core::sim::{
    commands_from_trace, generate_dungeon, parse_script, render_script, run_trace, DungeonParams, Game, GameConfig,
};
use gecka_core::{KnowledgeBase, Scene};
use gecka_server::{poag_stats, stored_sessions, ServerConfig, Store, DEFAULT_PORT};

#[derive(Parser)]
#[command(name = "gecka", version, about = "Commonsense-acquisition game engine tools")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the HTTP server. Set GECKA_TOKEN to require a bearer token on writes.
    Serve(ServeArgs),
    /// Check session XML files against the schema and their references.
    Validate {
        /// Session files, replayed in order.
        #[arg(required = true)]
        sessions: Vec<PathBuf>,
    },
    /// Export the assertions a session yields as TSV.
    Export {
        /// Session file to read.
        #[arg(long, value_name = "SESSION_XML")]
        assertions: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate a dungeon scene as canonical JSON.
    GenDungeon(DungeonArgs),
    /// Play a command script headlessly and print the JSON-lines trace.
    Simulate(SimulateArgs),
    /// Most frequent POAGs across the sessions in a data directory.
    Stats {
        #[arg(long)]
        data_dir: PathBuf,
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..))]
        top: u32,
    },
    /// Score every verb-noun pair with offline hit counts.
    Corpus {
        #[arg(long)]
        nouns: PathBuf,
        #[arg(long)]
        verbs: PathBuf,
        /// `verb<TAB>noun<TAB>count` lines.
        #[arg(long)]
        counts: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    #[arg(long, default_value_t = DEFAULT_PORT)]
    port: u16,
    #[arg(long, default_value = "gecka-data")]
    data_dir: PathBuf,
    /// Directory of static web assets served at `/`.
    #[arg(long)]
    static_dir: Option<PathBuf>,
}

#[derive(Args)]
struct DungeonArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 32)]
    width: u32,
    #[arg(long, default_value_t = 32)]
    height: u32,
    #[arg(long, default_value_t = 3)]
    zombies: u32,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Scene JSON; the first is where play starts, the rest are portal targets.
    #[arg(long, required = true)]
    scene: Vec<PathBuf>,
    #[arg(long)]
    seed: u64,
    /// One command per line: `move x y`, `interact id verb`,
    /// `combine id verb ids`, `portal`, `wait`.
    #[arg(long, required_unless_present = "replay", conflicts_with = "replay")]
    script: Option<PathBuf>,
    /// Take the commands from an earlier trace instead of a script.
    #[arg(long)]
    replay: Option<PathBuf>,
    /// Session XML files defining the knowledge base, replayed in order.
    #[arg(long)]
    session: Vec<PathBuf>,
    #[arg(long, default_value_t = GameConfig::default().vision_radius)]
    vision: u32,
    /// Write the trace here instead of stdout.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Also write the commands actually played as a script.
    #[arg(long)]
    script_out: Option<PathBuf>,
}

struct Failure(String);

impl<E: Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn fail<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(msg.into()))
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn emit(output: Option<&Path>, text: &str) -> Outcome {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| Failure(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_session(path: &Path) -> Result<Session, Failure> {
    parse_session_xml(&read(path)?).map_err(|e| Failure(format!("{}:{}: {e}", path.display(), e.line())))
}

/// Replays sessions into a fresh knowledge base, checking each first.
fn load_kb(paths: &[PathBuf]) -> Result<(KnowledgeBase, Vec<Session>), Failure> {
    let mut kb = KnowledgeBase::new();
    let mut sessions = Vec::new();
    for path in paths {
        let session = load_session(path)?;
        session
            .check(&kb)
            .map_err(|e| Failure(format!("{}: {e}", path.display())))?;
        apply_session(&mut kb, &session).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
        sessions.push(session);
    }
    Ok((kb, sessions))
}

fn validate(paths: &[PathBuf]) -> Outcome {
    let (_, sessions) = load_kb(paths)?;
    for (path, s) in paths.iter().zip(&sessions) {
        println!("ok\t{}\t{}\t{} actions", path.display(), s.id, s.actions.len());
    }
    Ok(())
}

fn export(path: &Path, output: Option<&Path>) -> Outcome {
    let session = load_session(path)?;
    let assertions =
        extract_assertions(&session, &KnowledgeBase::new()).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    emit(output, &assertions_to_tsv(&assertions))
}

fn gen_dungeon(a: &DungeonArgs) -> Outcome {
    let mut params = DungeonParams::new(a.width, a.height, a.seed);
    params.zombie_count = a.zombies;
    let scene = generate_dungeon(&params)?;
    emit(a.output.as_deref(), &(scene.to_canonical_json() + "\n"))
}

fn load_scene(path: &Path) -> Result<Scene, Failure> {
    serde_json::from_str(&read(path)?).map_err(|e| Failure(format!("{}:{}: {e}", path.display(), e.line())))
}

fn simulate(a: &SimulateArgs) -> Outcome {
    let (kb, _) = load_kb(&a.session)?;
    let mut scenes = BTreeMap::new();
    let mut start = None;
    for path in &a.scene {
        let scene = load_scene(path)?;
        start.get_or_insert_with(|| scene.id.clone());
        if scenes.insert(scene.id.clone(), scene).is_some() {
            return fail(format!("{}: scene id given twice", path.display()));
        }
    }
    let start = start.expect("clap requires one scene");
    let commands = match (&a.script, &a.replay) {
        (Some(p), _) => parse_script(&read(p)?).map_err(|e| Failure(format!("{}:{e}", p.display())))?,
        (None, Some(p)) => commands_from_trace(&read(p)?).map_err(|e| Failure(format!("{}: {e}", p.display())))?,
        (None, None) => unreachable!("clap requires a script or a trace"),
    };
    let config = GameConfig {
        vision_radius: a.vision,
        ..GameConfig::default()
    };
    let mut game = Game::new(Arc::new(kb), Arc::new(scenes), &start, a.seed, config)?;
    let trace = run_trace(&mut game, &commands);
    if let Some(p) = &a.script_out {
        emit(Some(p), &render_script(&commands))?;
    }
    emit(a.trace.as_deref(), &trace)
}

fn stats(dir: &Path, top: u32) -> Outcome {
    if !dir.is_dir() {
        return fail(format!("{}: not a directory", dir.display()));
    }
    let store = Store::open(dir)?;
    let sessions = stored_sessions(&store)?;
    for s in poag_stats(&sessions, top as usize) {
        println!(
            "{}\t{}\t{}\t{}\t{}\t{}",
            s.frequency,
            s.item,
            s.action,
            s.prerequisites.join(", "),
            s.outcome.join(", "),
            s.goal.as_deref().unwrap_or("--")
        );
    }
    Ok(())
}

fn corpus(nouns: &Path, verbs: &Path, counts: &Path, output: Option<&Path>) -> Outcome {
    let list = |p: &Path| load_word_list(&read(p)?).map_err(|e| Failure(format!("{}: {e}", p.display())));
    let nouns = list(nouns)?;
    let verbs = list(verbs)?;
    let counts = TsvCounts::parse(&read(counts)?).map_err(|e| Failure(format!("{}: {e}", counts.display())))?;
    let report = bootstrap_corpus(&nouns, &verbs, &counts)?;
    for (verb, noun, why) in &report.failures {
        eprintln!("warning: skipped {verb} {noun}: {why}");
    }
    emit(output, &report.to_tsv())
}

fn serve(a: ServeArgs) -> Outcome {
    let token = std::env::var("GECKA_TOKEN").ok().filter(|t| !t.is_empty());
    let config = ServerConfig {
        host: a.host,
        port: a.port,
        data_dir: a.data_dir,
        static_dir: a.static_dir,
        token,
    };
    tokio::runtime::Runtime::new()?.block_on(gecka_server::serve(config))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Cmd::Serve(a) => serve(a),
        Cmd::Validate { sessions } => validate(&sessions),
        Cmd::Export { assertions, output } => export(&assertions, output.as_deref()),
        Cmd::GenDungeon(a) => gen_dungeon(&a),
        Cmd::Simulate(a) => simulate(&a),
        Cmd::Stats { data_dir, top } => stats(&data_dir, top),
        Cmd::Corpus {
            nouns,
            verbs,
            counts,
            output,
        } => corpus(&nouns, &verbs, &counts, output.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(msg)) => {
            eprintln!("error: {}", msg.replace('\n', " "));
            ExitCode::from(1)
        }
    }
}
