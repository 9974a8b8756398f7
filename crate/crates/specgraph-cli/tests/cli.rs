//! End-to-end runs of the `specgraph` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

struct Scratch(PathBuf);

impl Scratch {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("specgraph-cli-{tag}-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        fs::create_dir_all(&dir).unwrap();
        Scratch(dir)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = fs::remove_dir_all(&self.0);
    }
}

fn specgraph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_specgraph")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn generate(dir: &Scratch, name: &str, levels: usize) -> PathBuf {
    let out = dir.path(&format!("{name}.json"));
    let o = specgraph(&["generate", name, "--levels", &levels.to_string(), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn arc_is_lax_fraisse_in_a() {
    let dir = Scratch::new("arc");
    let seq = generate(&dir, "arc_dyadic", 5);
    let o = specgraph(&["classify", s(&seq), "--category", "A", "--horizon", "5"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().next().unwrap(), "lax-Fraïssé at horizon 5: Holds");
}

#[test]
fn nasty_fan_fails_in_x_with_the_fan_target() {
    let dir = Scratch::new("nasty");
    let seq = generate(&dir, "nasty_fan", 5);
    let o = specgraph(&["classify", s(&seq), "--category", "X", "--horizon", "5"]);
    assert_eq!(code(&o), 2);
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), "lax-Fraïssé at horizon 5: FailsOnPrefix");
    let json: serde_json::Value = serde_json::from_str(text.split_once('\n').unwrap().1).unwrap();
    let parts = json["witness"]["parts"].as_array().unwrap();
    let probe = parts.iter().find(|p| p[0].as_str().unwrap().contains("three-spoke fan")).expect("target-fan part");
    assert_eq!(probe[1]["verdict"], "fails-on-prefix");
}

#[test]
fn cantor_spectrum_report() {
    let dir = Scratch::new("spectrum");
    let seq = generate(&dir, "cantor_doubling", 5);
    let report = dir.path("report.json");
    let o = specgraph(&["spectrum", s(&seq), "--horizon", "5", "--report", s(&report)]);
    assert_eq!(code(&o), 0);
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(r["connected"]["verdict"], "fails-on-prefix");
    assert_eq!(r["hausdorff"]["verdict"], "holds");
    assert_eq!(r["perfect"]["verdict"], "holds");
}

#[test]
fn check_exit_codes_follow_the_verdict() {
    let dir = Scratch::new("check");
    let seq = generate(&dir, "cantor_doubling", 4);
    let o = specgraph(&["check", s(&seq), "--property", "anti-injective", "--horizon", "4"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"], "holds");

    let mono = generate(&dir, "modification_patterns", 3);
    let o = specgraph(&["check", s(&mono), "--property", "anti-injective", "--horizon", "3"]);
    assert_eq!(code(&o), 2);

    // Declared guarantees decide even an empty horizon; without them
    // nothing is known.
    let o = specgraph(&["check", s(&seq), "--property", "anti-injective", "--horizon", "0"]);
    assert_eq!(code(&o), 0);
    let bare = generate(&dir, "modification_fail", 2);
    let o = specgraph(&["check", s(&bare), "--property", "anti-injective", "--horizon", "0"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn bad_input_exits_one() {
    let dir = Scratch::new("bad");
    assert_eq!(code(&specgraph(&["generate", "no_such", "--levels", "2"])), 1);
    assert_eq!(code(&specgraph(&["generate", "arc_dyadic"])), 1);
    assert_eq!(code(&specgraph(&["generate", "constant", "--levels", "2", "--param", "colour=red"])), 1);
    let junk = dir.path("junk.json");
    fs::write(&junk, "{not json").unwrap();
    assert_eq!(code(&specgraph(&["check", s(&junk), "--property", "monotone", "--horizon", "2"])), 1);
    let seq = generate(&dir, "arc_dyadic", 2);
    assert_eq!(code(&specgraph(&["classify", s(&seq), "--category", "Q", "--horizon", "2"])), 1);
    assert_eq!(code(&specgraph(&["check", s(&seq), "--property", "shiny", "--horizon", "2"])), 1);
}

#[test]
fn generated_json_survives_reexport() {
    let dir = Scratch::new("roundtrip");
    for name in ["cantor_fan", "lelek", "modification_fail", "cycle_roots"] {
        let seq = generate(&dir, name, 3);
        let again = dir.path(&format!("{name}.again.json"));
        let o = specgraph(&["export", s(&seq), "--json", s(&again)]);
        assert_eq!(code(&o), 0);
        assert_eq!(fs::read(&seq).unwrap(), fs::read(&again).unwrap(), "{name}");
    }
}

#[test]
fn dot_export_writes_one_file_per_level() {
    let dir = Scratch::new("dot");
    let seq = generate(&dir, "arc_dyadic", 3);
    let out = dir.path("dots");
    let o = specgraph(&["export", s(&seq), "--dot", s(&out), "--poset"]);
    assert_eq!(code(&o), 0);
    let level3 = fs::read_to_string(out.join("level_3.dot")).unwrap();
    assert_eq!(level3.matches("[label=").count(), 7);
    assert!(out.join("poset.dot").exists());
    assert_eq!(code(&specgraph(&["export", s(&seq)])), 1, "nothing requested");
}

#[test]
fn amalgamation_square_commutes() {
    let dir = Scratch::new("amalgam");
    // Two monotone maps from three-vertex paths onto an edge.
    let f = r#"{"dom":{"vertices":["x","y","z"],"edges":[[0,1],[1,2]]},
               "cod":{"vertices":["a","b"],"edges":[[0,1]]},
               "pairs":[[0,0],[1,1],[1,2]]}"#;
    let g = r#"{"dom":{"vertices":["u","v","w"],"edges":[[0,1],[1,2]]},
               "cod":{"vertices":["a","b"],"edges":[[0,1]]},
               "pairs":[[0,0],[0,1],[1,2]]}"#;
    fs::write(dir.path("f.json"), f).unwrap();
    fs::write(dir.path("g.json"), g).unwrap();
    let out = dir.path("square.json");
    let o = specgraph(&[
        "amalgamate",
        "--category",
        "A",
        s(&dir.path("f.json")),
        s(&dir.path("g.json")),
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let sq: specgraph::io::SquareJson = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let (fm, gm, left, right) = (sq.f.build().unwrap(), sq.g.build().unwrap(), sq.left.build().unwrap(), sq.right.build().unwrap());
    let top = specgraph::Morphism::compose(&fm, &left).unwrap();
    let bottom = specgraph::Morphism::compose(&gm, &right).unwrap();
    assert_eq!(top.pairs(), bottom.pairs());

    // Discrete graphs only in D.
    assert_eq!(code(&specgraph(&["amalgamate", "--category", "D", s(&dir.path("f.json")), s(&dir.path("g.json"))])), 1);
}

#[test]
fn fraisse_is_reproducible_and_logged() {
    let dir = Scratch::new("fraisse");
    let run = |out: &Path| {
        let o = specgraph(&["fraisse", "--category", "D", "--steps", "4", "--seed", "7", "--out", s(out)]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        fs::read(out).unwrap()
    };
    let (a, b) = (dir.path("a.json"), dir.path("b.json"));
    assert_eq!(run(&a), run(&b));
    let log: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path("a.log.json")).unwrap()).unwrap();
    assert_eq!(log["seed"], 7);
    assert_eq!(log["absorbed"].as_array().unwrap().len(), 4);
    let o = specgraph(&["classify", s(&a), "--category", "D", "--horizon", "4", "--strict"]);
    assert_eq!(stdout(&o).lines().next().unwrap(), "Fraïssé at horizon 4: Holds");
}

#[test]
fn thread_count_is_validated() {
    let o = Command::new(env!("CARGO_BIN_EXE_specgraph")).arg("list").env("SPECGRAPH_THREADS", "two").output().unwrap();
    assert_eq!(code(&o), 1);
    let o = Command::new(env!("CARGO_BIN_EXE_specgraph")).arg("list").env("SPECGRAPH_THREADS", "2").output().unwrap();
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("arc_dyadic"));
}
