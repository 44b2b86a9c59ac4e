//! Loading inputs. A path that does not exist may name a built-in fixture.

use std::fs;
use std::path::Path;

use mealycheck::automata::parse_dot;
use mealycheck::cpm::{parse_annotated_dot, parse_cpm, AnnotatedMachine};
use mealycheck::fixtures;
use mealycheck::learning::{MachineSul, Sul};
use mealycheck::ltl::{load_properties, property_library, Property, GENERIC};
use mealycheck::{Cpm, MealyMachine};

use crate::error::CliError;

pub fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub fn write(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    }
    fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

/// Writes to `out`, or to standard output without one.
pub fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn is_file(arg: &str) -> bool {
    Path::new(arg).exists()
}

fn unknown(kind: &str, arg: &str, known: &str) -> CliError {
    CliError::Usage(format!("{arg}: no such file, and not a built-in {kind} ({known})"))
}

const FIXTURES: &str = "example, emrtd, uds, uds-patched";

pub fn model(arg: &str) -> Result<MealyMachine, CliError> {
    if is_file(arg) {
        return parse_dot(&read(Path::new(arg))?).map_err(|e| CliError::input(arg, e));
    }
    fixtures::by_name(arg).map(|f| f.machine).ok_or_else(|| unknown("fixture", arg, FIXTURES))
}

pub fn annotated(arg: &str) -> Result<AnnotatedMachine, CliError> {
    parse_annotated_dot(&read(Path::new(arg))?).map_err(|e| CliError::input(arg, e))
}

pub fn cpm(arg: &str) -> Result<Cpm, CliError> {
    if is_file(arg) {
        return parse_cpm(&read(Path::new(arg))?).map_err(|e| CliError::input(arg, e));
    }
    if arg == "empty" {
        return Ok(Cpm::default());
    }
    fixtures::cpm_for(arg).ok_or_else(|| unknown("proposition map", arg, "example, emrtd, uds, empty"))
}

/// A property file, or `generic` (P1 to P4), `emrtd`, or `library`.
pub fn properties(arg: Option<&str>, cpm: &Cpm) -> Result<Vec<Property>, CliError> {
    let arg = arg.unwrap_or("generic");
    if is_file(arg) {
        return load_properties(&read(Path::new(arg))?, cpm).map_err(|e| CliError::input(arg, e));
    }
    match arg {
        "generic" => Ok(property_library(cpm).into_iter().filter(|p| GENERIC.contains(&p.name.as_str())).collect()),
        "emrtd" => Ok(load_properties(fixtures::EMRTD_PROPERTIES, cpm)?),
        "library" => Ok(property_library(cpm)),
        _ => Err(unknown("property set", arg, "generic, emrtd, library")),
    }
}

/// A simulated SUL, its alphabet and the machine behind it.
pub fn sul(arg: &str) -> Result<(Box<dyn Sul>, Vec<String>, MealyMachine), CliError> {
    let (machine, sul): (MealyMachine, Box<dyn Sul>) = if is_file(arg) {
        let m = model(arg)?;
        (m.clone(), Box::new(MachineSul::new(m)))
    } else {
        let f = fixtures::by_name(arg).ok_or_else(|| unknown("fixture", arg, FIXTURES))?;
        let sul: Box<dyn Sul> = if arg.starts_with("uds") {
            Box::new(fixtures::uds_sul(&f))
        } else {
            Box::new(MachineSul::new(f.machine.clone()))
        };
        (f.machine, sul)
    };
    let alphabet = machine.inputs().to_vec();
    Ok((sul, alphabet, machine))
}
