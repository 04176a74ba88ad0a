#![allow(dead_code)]

use std::path::PathBuf;

pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run_cli(args: &[&str]) -> Output {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("tunclock").chain(args.iter().copied());
    let code = tunclock::cli::run(argv, &mut out, &mut err);
    Output {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

/// CSV body as header-keyed rows.
pub fn rows(csv_text: &str) -> Vec<Vec<(String, String)>> {
    let mut r = csv::Reader::from_reader(csv_text.as_bytes());
    let headers: Vec<String> = r.headers().unwrap().iter().map(str::to_string).collect();
    r.records()
        .map(|rec| headers.iter().cloned().zip(rec.unwrap().iter().map(str::to_string)).collect())
        .collect()
}

pub fn field<'a>(row: &'a [(String, String)], name: &str) -> &'a str {
    &row.iter().find(|(k, _)| k == name).unwrap_or_else(|| panic!("no column {name}")).1
}

pub fn num(row: &[(String, String)], name: &str) -> f64 {
    field(row, name).parse().unwrap_or_else(|_| panic!("{name} = {:?}", field(row, name)))
}

/// `quantity,value` tables as a lookup.
pub fn quantity(csv_text: &str, name: &str) -> f64 {
    let rs = rows(csv_text);
    let row = rs.iter().find(|r| field(r, "quantity") == name).unwrap_or_else(|| panic!("no row {name}"));
    num(row, "value")
}

pub fn data_file(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name).to_string_lossy().into_owned()
}

pub fn temp_file(name: &str, contents: &str) -> String {
    let dir = std::env::temp_dir().join(format!("tunclock-tests-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path.to_string_lossy().into_owned()
}

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}
