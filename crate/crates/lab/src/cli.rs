//! Command-line front end. Every subcommand takes `--config <file>`,
//! `--out-dir <dir>` and one `--<key>` flag per schema key (underscores
//! become hyphens).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Arg, ArgAction, ArgMatches, Command};

use crate::commands;
use crate::config::{output_root, read_file, schema, Kind, ResolvedConfig, SUBCOMMANDS};
use crate::error::{LabError, EXIT_OK};
use crate::report::Artifacts;

fn about(sub: &str) -> &'static str {
    match sub {
        "project" => "Leray-project a snapshot or random field",
        "besov" => "Besov norms by dyadic blocks and by the heat flow",
        "simulate2d" => "Three-component Navier-Stokes on T^2",
        "simulate3d" => "Navier-Stokes on T^3",
        "pipeline" => "Decomposition u = u_F + u_2D + R of the oscillating example",
        "picard" => "Picard iteration for the perturbed system",
        "example" => "Write the oscillating initial data",
        "conditions" => "Hypothesis report (check) or N scan (scan)",
        "scan" => "Same as `conditions scan`",
        _ => "",
    }
}

pub fn flag_name(key: &str) -> String {
    key.replace('_', "-")
}

pub fn command() -> Command {
    let mut root = Command::new("nslab")
        .about("Batch experiments for nslab-core")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true);
    for sub in SUBCOMMANDS {
        let mut c = Command::new(sub)
            .about(about(sub))
            .arg(Arg::new("config").long("config").value_name("FILE").help("flat key = value config file"))
            .arg(
                Arg::new("out-dir")
                    .long("out-dir")
                    .value_name("DIR")
                    .help("output directory (default: $NSLAB_OUT or .)"),
            );
        if sub == "conditions" {
            c = c.arg(
                Arg::new("mode-arg")
                    .value_parser(["check", "scan"])
                    .help("check (default) or scan"),
            );
        }
        for k in schema(sub).unwrap() {
            let mut help = k.help.to_string();
            if let Some(d) = k.default {
                help.push_str(&format!(" [default: {d}]"));
            }
            if let Kind::Choice(opts) = k.kind {
                help.push_str(&format!(" [one of: {}]", opts.join(", ")));
            }
            c = c.arg(
                Arg::new(k.name)
                    .long(flag_name(k.name))
                    .value_name("VALUE")
                    .allow_negative_numbers(true)
                    .action(ArgAction::Set)
                    .help(help),
            );
        }
        root = root.subcommand(c);
    }
    root
}

fn flags_of(sub: &str, m: &ArgMatches) -> BTreeMap<String, String> {
    let mut flags = BTreeMap::new();
    for k in schema(sub).unwrap() {
        if let Some(v) = m.get_one::<String>(k.name) {
            flags.insert(k.name.to_string(), v.clone());
        }
    }
    if let Ok(Some(mode)) = m.try_get_one::<String>("mode-arg") {
        flags.insert("mode".into(), mode.clone());
    }
    flags
}

fn dispatch(cfg: &ResolvedConfig, out: &mut Artifacts) -> Result<(), LabError> {
    match cfg.subcommand.as_str() {
        "project" => commands::project(cfg, out),
        "besov" => commands::besov(cfg, out),
        "simulate2d" => commands::simulate2d(cfg, out),
        "simulate3d" => commands::simulate3d(cfg, out),
        "pipeline" => commands::pipeline(cfg, out),
        "picard" => commands::picard(cfg, out),
        "example" => commands::example(cfg, out),
        "conditions" | "scan" => commands::conditions(cfg, out),
        other => Err(LabError::Config(format!("unknown subcommand `{other}`"))),
    }
}

fn report_error(e: &LabError, dir: Option<&PathBuf>) -> i32 {
    let j = e.to_json();
    eprintln!("{j}");
    if let Some(d) = dir {
        if std::fs::create_dir_all(d).is_ok() {
            let mut text = serde_json::to_string_pretty(&j).expect("serialisable");
            text.push('\n');
            let _ = std::fs::write(d.join("error.json"), text);
        }
    }
    e.exit_code()
}

/// Runs the CLI on `args` (program name first) and returns the exit status.
/// A leading `run` word is accepted and ignored.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    if args.get(1).map(|a| a == "run").unwrap_or(false) {
        args.remove(1);
    }
    let matches = match command().try_get_matches_from(&args) {
        Ok(m) => m,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return EXIT_OK;
            }
            let _ = e.print();
            let text = e.render().to_string();
            let line = text.lines().next().unwrap_or_default().trim_start_matches("error: ");
            return report_error(&LabError::Config(line.to_string()), None);
        }
    };
    let (sub, m) = matches.subcommand().expect("subcommand required");
    let dir = output_root(m.get_one::<String>("out-dir").map(String::as_str));
    let file = match m.get_one::<String>("config") {
        Some(p) => match read_file(std::path::Path::new(p)) {
            Ok(f) => f,
            Err(e) => return report_error(&e, Some(&dir)),
        },
        None => BTreeMap::new(),
    };
    let cfg = match ResolvedConfig::resolve(sub, &file, &flags_of(sub, m)) {
        Ok(c) => c,
        Err(e) => return report_error(&e, Some(&dir)),
    };
    let mut out = match Artifacts::new(&dir, cfg.clone()) {
        Ok(o) => o,
        Err(e) => return report_error(&e, Some(&dir)),
    };
    match dispatch(&cfg, &mut out) {
        Ok(()) => EXIT_OK,
        Err(e) => report_error(&e, Some(&dir)),
    }
}
