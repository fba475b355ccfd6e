use std::io::Write;
use std::process::{Command, Output};

use tempfile::NamedTempFile;

const LET_EXAMPLE: &str = "Let x be NewTag[Top] in Extract{New{< >}(x)}\n";

fn program(src: &str) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(src.as_bytes()).unwrap();
    f
}

fn toto(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toto")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(f: &NamedTempFile) -> &str {
    f.path().to_str().unwrap()
}

#[test]
fn typecheck_let_example() {
    let f = program(LET_EXAMPLE);
    let o = toto(&["typecheck", path(&f)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "Top\n");
}

#[test]
fn eval_let_example_with_trace() {
    let f = program(LET_EXAMPLE);
    let o = toto(&["eval", "--trace", path(&f)]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let trace: Vec<&str> = out.lines().take_while(|l| !l.starts_with("value:")).collect();
    assert_eq!(trace.len(), 4);
    assert_eq!(trace[3], "3: r_untag2  e := < >");
    assert!(out.contains("value: < >\n"));
    assert!(out.contains("store:\n#0 -> .\n"));
}

#[test]
fn eval_json_is_stable() {
    let f = program(LET_EXAMPLE);
    let a = toto(&["eval", "--json", path(&f)]);
    let b = toto(&["eval", "--json", path(&f)]);
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["status"], "value");
    assert_eq!(v["steps"], 3);
    assert_eq!(v["type"], "Top");
    assert_eq!(v["term"], "< >");
    assert_eq!(v["store"], serde_json::json!(["#0 -> ."]));
}

#[test]
fn exit_codes() {
    let bad_parse = program("Match{e}(");
    assert_eq!(toto(&["parse", path(&bad_parse)]).status.code(), Some(1));
    let ill_typed = program("Extract{< >}");
    assert_eq!(toto(&["typecheck", path(&ill_typed)]).status.code(), Some(1));
    assert_eq!(toto(&["eval", path(&ill_typed)]).status.code(), Some(1));
    assert_eq!(toto(&["eval", "--unchecked", path(&ill_typed)]).status.code(), Some(2));
    let diverges = program("Fix{/f:Top,f}");
    let o = toto(&["eval", "--fuel", "50", path(&diverges)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).starts_with("out of fuel after 50 steps"));
    let bad_decl = program("tag #1 : Top extends #0;\n< >");
    assert_eq!(toto(&["typecheck", path(&bad_decl)]).status.code(), Some(1));
    assert_eq!(toto(&["typecheck", "/nonexistent/file.toto"]).status.code(), Some(1));
}

#[test]
fn parse_prints_canonical_form() {
    let f = program("tag #0 : Top;\ntag #1:{f:Top} extends #0;\n  (/x:Top,x)   < >");
    let o = toto(&["parse", path(&f)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "tag #0 : Top;\ntag #1 : {f:Top} extends #0;\n(/x:Top,x) < >\n");
    let again = program(&stdout(&o));
    assert_eq!(stdout(&toto(&["parse", path(&again)])), stdout(&o));
}

#[test]
fn selftest_is_deterministic() {
    let args = ["selftest", "--cases", "100", "--seed", "7", "--depth", "2"];
    let a = toto(&args);
    let b = toto(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).ends_with("selftest passed\n"));
}
