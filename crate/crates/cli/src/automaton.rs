use std::io::{BufRead, Write};
use std::path::PathBuf;

use clap::Args;
use cdam_core::experiments::{AutomatonSession, QueryOutcome, TranscriptEntry};
use cdam_core::ingest::compose_automaton_patterns;
use cdam_core::{normalize, AutomatonSpec, StopRule};

use crate::{CliResult, Failure};

#[derive(Args, Debug)]
pub struct AutomatonArgs {
    /// Automaton spec (TOML); defaults to the family tree.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Tokens to apply in order, comma or space separated. State names reset
    /// the network, anything else is a label.
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    pub script: Vec<String>,
    /// File of tokens, one or more per line.
    #[arg(long)]
    pub script_file: Option<PathBuf>,
    /// Starting state (default: the first state).
    #[arg(long)]
    pub start: Option<String>,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Update cap per query.
    #[arg(long, default_value_t = 2000)]
    pub steps: usize,
    /// Also write the transcript as JSON lines to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn tokens(text: &str) -> impl Iterator<Item = &str> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
}

struct Printer {
    log: Vec<String>,
}

impl Printer {
    fn entry(&mut self, e: &TranscriptEntry) -> CliResult {
        match &e.outcome {
            QueryOutcome::SetState => println!("{}", e.after),
            QueryOutcome::Answered => println!(
                "{} --{}--> {} (r = {:.3})",
                e.before,
                e.label.as_deref().unwrap_or(&e.input),
                e.after,
                e.r
            ),
            QueryOutcome::Rejected(why) => {
                eprintln!("warning: `{}` rejected ({why}); still at {}", e.input, e.after)
            }
        }
        self.log.push(serde_json::to_string(e).map_err(cdam_core::CdamError::from)?);
        Ok(())
    }
}

pub fn run(args: &AutomatonArgs) -> CliResult {
    let spec = match &args.spec {
        Some(p) => AutomatonSpec::load(p)?,
        None => AutomatonSpec::family_tree(),
    };
    if args.n == 0 || args.steps == 0 {
        return Err(Failure::Usage("--n and --steps must be >= 1".into()));
    }
    let mut script: Vec<String> = args
        .script
        .iter()
        .flat_map(|s| tokens(s).map(str::to_string).collect::<Vec<_>>())
        .collect();
    if let Some(path) = &args.script_file {
        let text = std::fs::read_to_string(path)?;
        script.extend(tokens(&text).map(str::to_string));
    }
    if let Some(s) = &args.start {
        spec.state_index(s)?;
    }
    let composed = compose_automaton_patterns(&spec, args.n, args.seed)?;
    let coupling = normalize(&composed.graph);
    let stop = StopRule {
        max_steps: args.steps,
        tol: 1e-9,
    };
    let mut session = AutomatonSession::new(&composed, &coupling, stop)?;
    let mut printer = Printer { log: Vec::new() };
    let start = args.start.clone().unwrap_or_else(|| spec.states[0].name.clone());
    printer.entry(session.set_state(&start)?)?;

    // labels outside the automaton's vocabulary leave the state alone
    let known = |token: &str| {
        let label = spec.resolve_label(token);
        spec.state_index(token).is_ok()
            || spec.transitions.iter().any(|t| t.label.eq_ignore_ascii_case(&label))
    };
    let mut step = |token: &str, printer: &mut Printer| -> CliResult {
        if known(token) {
            let e = session.apply(token)?.clone();
            printer.entry(&e)
        } else {
            eprintln!("warning: unknown label `{token}`; still at {}", session.current());
            Ok(())
        }
    };

    if !script.is_empty() {
        for t in &script {
            step(t, &mut printer)?;
        }
    } else {
        let stdin = std::io::stdin();
        let mut line = String::new();
        loop {
            print!("> ");
            std::io::stdout().flush()?;
            line.clear();
            if stdin.lock().read_line(&mut line)? == 0 {
                break;
            }
            let input = line.trim();
            if input == ":quit" || input == ":q" {
                break;
            }
            if let Some(name) = input.strip_prefix(":state") {
                match spec.state_index(name.trim()) {
                    Ok(_) => step(name.trim(), &mut printer)?,
                    Err(e) => eprintln!("warning: {e}"),
                }
                continue;
            }
            for t in tokens(input) {
                step(t, &mut printer)?;
            }
        }
    }

    if let Some(out) = &args.out {
        if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let mut body = printer.log.join("\n");
        body.push('\n');
        std::fs::write(out, body)?;
    }
    Ok(())
}
