//! `key = value` configuration files, merged under the command line.
//!
//! Keys are long option names of the global flags or of the chosen
//! subcommand (`_` and `-` are interchangeable). Lines starting with `#` are
//! comments. A key may repeat for options that accept several values.

use std::ffi::OsString;
use std::path::Path;

use clap::{ArgAction, Command};
use odd_core::{Error, Result};

pub fn read(path: &Path) -> Result<Vec<(String, String)>> {
    parse(&std::fs::read_to_string(path)?)
}

pub fn parse(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("config line {}: expected key = value, got `{line}`", no + 1)))?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(Error::Parse(format!("config line {}: empty key", no + 1)));
        }
        let v = v.trim();
        let v = v
            .strip_prefix('"')
            .and_then(|x| x.strip_suffix('"'))
            .unwrap_or(v);
        out.push((key, v.to_string()));
    }
    Ok(out)
}

fn given(raw: &[OsString], long: &str, short: Option<char>) -> bool {
    let flag = format!("--{long}");
    let joined = format!("--{long}=");
    raw.iter().filter_map(|a| a.to_str()).any(|a| {
        a == flag
            || a.starts_with(&joined)
            || short.is_some_and(|c| a.starts_with('-') && !a.starts_with("--") && a[1..].starts_with(c))
    })
}

/// Appends config entries not already present on the command line.
pub fn merge(cmd: &Command, sub: &str, raw: &[OsString], entries: &[(String, String)]) -> Result<Vec<OsString>> {
    let sub_cmd = cmd
        .find_subcommand(sub)
        .ok_or_else(|| Error::Parse(format!("unknown subcommand `{sub}`")))?;
    let mut args = raw.to_vec();
    for (key, value) in entries {
        if key == "config" {
            return Err(Error::Parse("config files cannot include other config files".into()));
        }
        let arg = sub_cmd
            .get_arguments()
            .chain(cmd.get_arguments())
            .find(|a| a.get_long() == Some(key.as_str()) || a.get_all_aliases().is_some_and(|al| al.contains(&key.as_str())))
            .ok_or_else(|| Error::Parse(format!("unknown config key `{key}` for `{sub}`")))?;
        let long = arg.get_long().unwrap_or(key);
        if given(raw, long, arg.get_short()) {
            continue;
        }
        match arg.get_action() {
            ArgAction::SetTrue => {
                if parse_bool(key, value)? {
                    args.push(format!("--{long}").into());
                }
            }
            ArgAction::Count => {
                let n: usize = value
                    .parse()
                    .map_err(|_| Error::Parse(format!("config key `{key}` expects a count, got `{value}`")))?;
                args.extend((0..n).map(|_| OsString::from(format!("--{long}"))));
            }
            _ => args.push(format!("--{long}={value}").into()),
        }
    }
    Ok(args)
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Parse(format!("config key `{key}` expects true or false, got `{v}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_quotes_and_underscores() {
        let e = parse("# run\nseed = 7\n\nout_dir = \"x y\"\n").unwrap();
        assert_eq!(e, vec![("seed".into(), "7".into()), ("out-dir".into(), "x y".into())]);
        assert!(parse("seed 7").is_err());
        assert!(parse("= 7").is_err());
    }

    #[test]
    fn detects_flags_on_the_command_line() {
        let raw: Vec<OsString> = ["odd", "-vv", "gen", "--seed=3", "--r", "2"].iter().map(OsString::from).collect();
        assert!(given(&raw, "seed", None));
        assert!(given(&raw, "r", None));
        assert!(given(&raw, "verbose", Some('v')));
        assert!(!given(&raw, "c", None));
    }
}
