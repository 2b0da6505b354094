use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const ROMA: &str = "<http://data.linkedopendata.it/musei/resource/Roma> \
                    <http://www.w3.org/2000/01/rdf-schema#label> \"Roma\" .\n";

const TWO_PREDICATES: &str = "<http://ex.org/s> <http://ex.org/p1> <http://ex.org/o> .\n\
                              <http://ex.org/s> <http://ex.org/p2> <http://ex.org/o> .\n";

fn rdftopo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rdftopo"))
        .args(args)
        .env_remove("RDFTOPO_CONFIG")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = rdftopo(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(rdftopo(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(rdftopo(&["analyze", "--bogus-flag", "x"]).status.code(), Some(2));
    assert_eq!(rdftopo(&[]).status.code(), Some(2));
}

#[test]
fn help_lists_every_subcommand() {
    let out = ok(&["--help"]);
    let help = String::from_utf8(out.stdout).unwrap();
    for cmd in ["prepare", "build", "analyze", "batch", "probe", "hist", "correlate", "resolve"] {
        assert!(help.contains(cmd), "{cmd} missing from help");
    }
}

#[test]
fn operational_failure_names_stage() {
    let dir = tempfile::tempdir().unwrap();
    let out = rdftopo(&["build", s(&dir.path().join("missing.txt"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("build"));

    let bad = dir.path().join("bad.nt");
    fs::write(&bad, "not rdf at all\n").unwrap();
    let out = rdftopo(&["prepare", s(&bad), "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("prepare"));
}

#[test]
fn analyze_two_predicate_graph() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("fixture.nt");
    fs::write(&input, TWO_PREDICATES).unwrap();
    ok(&["prepare", s(&input), "--out", s(dir.path())]);
    ok(&["build", s(&dir.path().join("edgelist.txt")), "--out", s(&dir.path().join("fixture.graph"))]);
    let report = dir.path().join("report.json");
    ok(&["analyze", s(&dir.path().join("fixture.graph")), "--out", s(&report)]);
    let r = json(&report);
    assert_eq!((r["n"].as_u64(), r["m"].as_u64()), (Some(2), Some(2)));
    assert_eq!(r["m_p"].as_u64(), Some(1));
    assert_eq!(r["dataset"], "fixture");
}

#[test]
fn resolve_roma_label() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("roma.nt");
    fs::write(&input, ROMA).unwrap();
    ok(&["prepare", s(&input), "--out", s(dir.path())]);
    let edgelist = fs::read_to_string(dir.path().join("edgelist.txt")).unwrap();
    assert_eq!(edgelist, "43f2f4f2e41ae099 c9643559faeed68e 02325f53aeba2f02\n");
    let out = ok(&["resolve", s(&dir.path().join("dictionary.tsv")), "02325f53aeba2f02"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "<http://www.w3.org/2000/01/rdf-schema#label>\n");

    let out = rdftopo(&["resolve", s(&dir.path().join("dictionary.tsv")), "0000000000000001"]);
    assert_eq!(out.status.code(), Some(1));
    let out = rdftopo(&["resolve", s(&dir.path().join("dictionary.tsv")), "xyz"]);
    assert_eq!(out.status.code(), Some(1));
}

fn fixture(dir: &Path, name: &str, n: usize) -> std::path::PathBuf {
    let mut text = String::new();
    for i in 0..n {
        text.push_str(&format!("<http://ex.org/{i}> <http://ex.org/p> <http://ex.org/{}> .\n", (i * 7 + 3) % n));
        text.push_str(&format!("<http://ex.org/{i}> <http://ex.org/q> <http://ex.org/{}> .\n", (i * i + 1) % n));
        text.push_str(&format!("<http://ex.org/{i}> <http://ex.org/label> \"node {}\" .\n", i % 5));
    }
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn stages_compose_to_batch() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture(dir.path(), "ds.nt", 40);
    let single = dir.path().join("single");
    ok(&["prepare", s(&input), "--out", s(&single)]);
    ok(&["build", s(&single.join("edgelist.txt"))]);
    ok(&["analyze", s(&single.join("graph.bin")), "--id", "ds", "--domain", "Testing", "--out", s(&single.join("report.json"))]);

    let manifest = dir.path().join("manifest.tsv");
    fs::write(&manifest, "id\tdomain\turl\tmedia_type\nds\tTesting\tds.nt\tnt\n").unwrap();
    let batch = dir.path().join("batch");
    ok(&["batch", s(&manifest), "--out", s(&batch), "--workers-prepare", "2", "--workers-analyze", "2"]);

    for file in ["edgelist.txt", "dictionary.tsv", "graph.bin", "report.json"] {
        assert_eq!(fs::read(single.join(file)).unwrap(), fs::read(batch.join("ds").join(file)).unwrap(), "{file}");
    }
    assert!(batch.join("ledger.json").exists());
    assert_eq!(fs::read_to_string(batch.join("reports.csv")).unwrap().lines().count(), 2);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture(dir.path(), "ds.nt", 30);
    let out = dir.path().join("o");
    let run = || {
        ok(&["prepare", s(&input), "--out", s(&out)]);
        ok(&["build", s(&out.join("edgelist.txt"))]);
        ok(&["analyze", s(&out.join("graph.bin")), "--out", s(&out.join("report.json")), "--plots", s(&out.join("plots"))]);
        ok(&["hist", s(&out.join("graph.bin")), "--mode", "all", "--out", s(&out.join("hist.tsv"))]);
        ["edgelist.txt", "dictionary.tsv", "graph.bin", "report.json", "plots/total_degree.tsv", "plots/in_degree.tsv", "hist.tsv"]
            .map(|f| fs::read(out.join(f)).unwrap())
    };
    assert_eq!(run(), run());
}

#[test]
fn batch_failure_sets_exit_status_and_correlate_reads_reports() {
    let dir = tempfile::tempdir().unwrap();
    let mut rows = String::from("id\tdomain\turl\tmedia_type\n");
    for (i, n) in [12, 20, 33, 41].iter().enumerate() {
        fixture(dir.path(), &format!("d{i}.nt"), *n);
        rows.push_str(&format!("d{i}\tTesting\td{i}.nt\tnt\n"));
    }
    fs::write(dir.path().join("broken.nt.gz"), b"\x1f\x8b\x08\x00garbage").unwrap();
    rows.push_str("broken\tTesting\tbroken.nt.gz\tgzip\n");
    rows.push_str("mixed\tTesting\tx\thtml_json_ld_ttl_rdf_xml\n");
    let manifest = dir.path().join("m.tsv");
    fs::write(&manifest, rows).unwrap();
    let out_dir = dir.path().join("out");
    let out = rdftopo(&["batch", s(&manifest), "--out", s(&out_dir)]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("progress\t"), "{stderr}");
    assert!(stderr.contains("broken: prepare"), "{stderr}");

    let ledger = json(&out_dir.join("ledger.json"));
    let states: Vec<&str> = ledger["entries"].as_array().unwrap().iter().map(|e| e["outcome"]["state"].as_str().unwrap()).collect();
    assert_eq!(states, ["success", "success", "success", "success", "failed", "skipped"]);

    let csv = dir.path().join("corr.csv");
    let heat = dir.path().join("heat.tsv");
    ok(&["correlate", s(&out_dir), "--measures", "n,m,m_u,z", "--out", s(&csv), "--heatmap", s(&heat)]);
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), "measure,n,m,m_u,z");
    assert_eq!(fs::read_to_string(&heat).unwrap().lines().count(), 1 + 16);
    let out = rdftopo(&["correlate", s(&out_dir), "--measures", "nonsense"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn probe_local_manifest() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.nt"), ROMA).unwrap();
    let manifest = dir.path().join("m.json");
    fs::write(
        &manifest,
        r#"[{"id": "a", "url": "a.nt", "media_type": "nt"}, {"id": "b", "url": "b.nt", "media_type": "nt"}]"#,
    )
    .unwrap();
    let out = ok(&["probe", s(&manifest)]);
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).map(|l| l.split('\t').nth(1).unwrap()).collect();
    assert_eq!(rows, ["true", "false"]);
}
