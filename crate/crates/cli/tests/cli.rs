use std::path::PathBuf;
use std::process::{Command, Output};

fn tsite(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tsite")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("tsite-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn instance(name: &str) -> String {
    format!("{}/../../instances/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn generated_boundary_has_the_expected_ext() {
    let closed = scratch("closed.ts");
    let open = scratch("open.ts");
    let c = closed.to_str().unwrap();
    let o = open.to_str().unwrap();
    assert!(tsite(&["gen", "--name", "boundary", "--params", "(0,1)+(2,3);(0,3)", "-o", c]).status.success());
    assert!(tsite(&["gen", "--name", "constant", "--params", "(0,1)", "-o", o]).status.success());
    let out = tsite(&["ext", c, o]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "hom 0\next1 1\n");
}

#[test]
fn exit_codes() {
    let line = instance("line.ts");
    assert_eq!(tsite(&["flabby", &line]).status.code(), Some(1));
    assert_eq!(tsite(&["stalk", &line, "--point", "1+"]).status.code(), Some(0));
    assert_eq!(tsite(&["stalk", &line, "--point", "+inf"]).status.code(), Some(2));
    assert_eq!(tsite(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(tsite(&["--field", "fp:4", "flabby", &line]).status.code(), Some(2));
}

#[test]
fn sections_list_a_basis() {
    let out = tsite(&["sections", "--sheaf", &instance("line.ts"), "--open", "(0,1)+(2,3)"]);
    let text = stdout(&out);
    assert!(text.starts_with("dim 2\n"), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("section")).count(), 2);
}

#[test]
fn sheafify_glues_the_two_points() {
    let out = tsite(&["sheafify", &instance("two_points.tpp")]);
    let text = stdout(&out);
    let whole = text.lines().find(|l| l.starts_with("{a,b}")).unwrap();
    assert_eq!(whole.split_whitespace().collect::<Vec<_>>(), ["{a,b}", "2", "2", "-"]);
    assert!(text.contains("input is a sheaf: false"));
}

#[test]
fn spectrum_of_a_declared_family() {
    let out = tsite(&["spectrum", "--instance", &instance("sierpinski_members.tp")]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("2 points"));
}

#[test]
fn verify_is_deterministic() {
    let a = tsite(&["verify", "--filter", "isiuei", "--seed", "9"]);
    let b = tsite(&["verify", "--filter", "isiuei", "--seed", "9"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let json = tsite(&["verify", "--filter", "lwc", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(v["items"][0]["id"], "lwc");
}
