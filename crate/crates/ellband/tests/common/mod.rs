#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

pub fn ellband() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ellband"));
    c.env_remove("ELLBAND_TABLE_DIR");
    c
}

pub fn run(args: &[&str]) -> Output {
    ellband().args(args).output().expect("binary runs")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 output")
}

pub fn write_values(path: &Path, values: &[f64]) {
    let text: String = values.iter().map(|v| format!("{v}\n")).collect();
    std::fs::write(path, text).unwrap();
}
