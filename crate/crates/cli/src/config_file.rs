//! `key = value` config files, spliced into argv ahead of the command-line flags.

use std::ffi::OsString;
use std::path::Path;

use clap::{ArgAction, Command};

pub fn read(path: &Path) -> Result<String, cwr_core::Error> {
    std::fs::read_to_string(path).map_err(|source| cwr_core::Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses `key = value` lines (`#` starts a comment) into flag tokens for `sub`.
/// Keys are long flag names of the subcommand or the global `threads`.
pub fn to_flags(
    text: &str,
    root: &Command,
    sub: &str,
) -> Result<(Vec<OsString>, Vec<OsString>), cwr_core::Error> {
    let sub_cmd = root
        .find_subcommand(sub)
        .ok_or_else(|| cwr_core::Error::InvalidParameter(format!("unknown subcommand `{sub}`")))?;
    let mut global = Vec::new();
    let mut local = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |message: String| cwr_core::Error::Parse {
            line: n + 1,
            message,
        };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_err(format!("expected `key = value`, got `{line}`")))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        let (arg, target) = match sub_cmd
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()))
        {
            Some(a) => (a, &mut local),
            None => match root
                .get_arguments()
                .find(|a| a.get_long() == Some(key.as_str()) && key != "config")
            {
                Some(a) => (a, &mut global),
                None => return Err(parse_err(format!("unknown key `{key}` for `{sub}`"))),
            },
        };
        if matches!(arg.get_action(), ArgAction::SetTrue) {
            match value {
                "true" => target.push(format!("--{key}").into()),
                "false" => {}
                _ => return Err(parse_err(format!("`{key}` expects true or false"))),
            }
        } else {
            target.push(format!("--{key}").into());
            target.push(value.into());
        }
    }
    Ok((global, local))
}

/// Removes `--config PATH` / `--config=PATH` from `argv` and splices the file's flags in
/// front of the user's own, so command-line flags win.
pub fn expand(argv: Vec<OsString>, root: &Command) -> Result<Vec<OsString>, cwr_core::Error> {
    let mut args = Vec::with_capacity(argv.len());
    let mut config = None;
    let mut iter = argv.into_iter();
    while let Some(a) = iter.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            config = iter.next();
        } else if let Some(p) = s.strip_prefix("--config=") {
            config = Some(p.into());
        } else {
            args.push(a);
        }
    }
    let Some(path) = config else {
        return Ok(args);
    };
    let text = read(Path::new(&path))?;
    let Some(sub_pos) = subcommand_position(&args, root) else {
        return Ok(args);
    };
    let sub = args[sub_pos].to_string_lossy().into_owned();
    let (global, local) = to_flags(&text, root, &sub)?;
    let mut out: Vec<OsString> = Vec::with_capacity(args.len() + global.len() + local.len());
    out.push(args[0].clone());
    out.extend(global);
    out.extend(args[1..=sub_pos].iter().cloned());
    out.extend(local);
    out.extend(args[sub_pos + 1..].iter().cloned());
    Ok(out)
}

fn subcommand_position(args: &[OsString], root: &Command) -> Option<usize> {
    let mut i = 1;
    while i < args.len() {
        let s = args[i].to_string_lossy();
        if root.find_subcommand(s.as_ref()).is_some() {
            return Some(i);
        }
        let takes_value = s.starts_with("--")
            && !s.contains('=')
            && root
                .get_arguments()
                .any(|a| a.get_long() == Some(&s[2..]) && a.get_action().takes_values());
        i += if takes_value { 2 } else { 1 };
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn splices_file_flags_after_the_subcommand() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.cfg");
        std::fs::write(
            &path,
            "threads = 2\nbins = 4 # quarters\nforce = true\nfull_radial = false\n",
        )
        .unwrap();
        let root = crate::Cli::command();
        let argv = os(&[
            "cwr",
            "--config",
            path.to_str().unwrap(),
            "estimate",
            "--bins",
            "8",
        ]);
        let out = expand(argv, &root).unwrap();
        assert_eq!(
            out,
            os(&[
                "cwr",
                "--threads",
                "2",
                "estimate",
                "--bins",
                "4",
                "--force",
                "--bins",
                "8"
            ])
        );
    }

    #[test]
    fn rejects_unknown_keys_and_bad_booleans() {
        let root = crate::Cli::command();
        assert!(to_flags("tau = 0.1\n", &root, "density").is_err());
        assert!(to_flags("force = yes\n", &root, "estimate").is_err());
        assert!(to_flags("just words\n", &root, "density").is_err());
        assert!(to_flags("config = other.cfg\n", &root, "density").is_err());
    }
}
