use std::path::PathBuf;
use std::process::{Command, Output};

fn jtree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jtree"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn temp_file(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("jtree-tests-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

/// Rows of the table titled `title` (after header and rule), split on runs of spaces.
fn table_rows(text: &str, title: &str) -> Vec<Vec<String>> {
    let mut lines = text.lines().skip_while(|l| *l != title).skip(3);
    let mut rows = Vec::new();
    for l in lines.by_ref() {
        if l.trim().is_empty() {
            break;
        }
        rows.push(
            l.split("  ")
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect(),
        );
    }
    rows
}

fn keyed(text: &str, title: &str, key: &str) -> f64 {
    table_rows(text, title)
        .into_iter()
        .find(|r| r[0] == key)
        .unwrap_or_else(|| panic!("no `{key}` in\n{text}"))[1]
        .parse()
        .unwrap()
}

const FREE3: &str = "\
# two vertices joined by three edges
vertex x b=0
vertex y b=0
edge e1 x y a=1
edge e2 x y a=1
edge e3 x y a=1
";

#[test]
fn spectrum_of_a_graph_file() {
    let path = temp_file("free3.graph", FREE3);
    let out = jtree(&["spectrum", path.to_str().unwrap(), "--resolution", "201"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    let bands = table_rows(&text, "bands");
    assert_eq!(bands.len(), 1, "{text}");
    let (lo, hi): (f64, f64) = (bands[0][0].parse().unwrap(), bands[0][1].parse().unwrap());
    let s = 8f64.sqrt();
    assert!((lo + s).abs() < 1e-3 && (hi - s).abs() < 1e-3, "{lo} {hi}");
    assert_eq!(table_rows(&text, "point masses")[0], vec!["(none)"]);
}

#[test]
fn rg_verify_table() {
    let out = jtree(&["rg-verify", "3", "2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let title = "rg(3,2) zero-energy eigenfunction";
    assert_eq!(keyed(&text, title, "norm limit"), 3.0);
    assert!((keyed(&text, title, "residue") + 1.0 / 3.0).abs() < 1e-8);
    assert!((keyed(&text, title, "weight at 0") - 0.2).abs() < 1e-8);
    assert!(keyed(&text, title, "max |Hu|") < 1e-14);
}

#[test]
fn leaf_is_reported_with_exit_one() {
    let path = temp_file("leaf.graph", "vertex a b=0\nvertex b b=0\nvertex c b=0\nedge e1 a b a=1\nedge e2 a b a=1\nedge e3 b c a=1\n");
    let out = jtree(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("`c`") && err.lines().count() == 1, "{err}");
}

#[test]
fn exit_codes() {
    assert_eq!(
        jtree(&["validate", "/definitely/missing.graph"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        jtree(&["spectrum", "--model", "free:3", "--bogus"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        jtree(&["spectrum", "--model", "nonsense"]).status.code(),
        Some(1)
    );
    assert_eq!(
        jtree(&["dos", "--model", "free:3", "--resolution", "5"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        jtree(&["dos", "--model", "free:3", "--eps", "0"])
            .status
            .code(),
        Some(1)
    );
    // a numerical limit rather than bad input
    let out = jtree(&[
        "ball-eig", "--model", "free:3", "--radius", "20", "--budget", "100",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(jtree(&["--help"]).status.success());
}

#[test]
fn output_is_deterministic() {
    for args in [
        &[
            "dos",
            "--model",
            "rg:3,2",
            "--resolution",
            "40",
            "--format",
            "csv",
        ][..],
        &["spectrum", "--model", "altb:1", "--resolution", "101"][..],
        &["perron", "--model", "petersen"][..],
    ] {
        assert_eq!(jtree(args).stdout, jtree(args).stdout);
    }
}

#[test]
fn csv_matches_table() {
    let common = [
        "dos",
        "--model",
        "altb:0.5",
        "--resolution",
        "25",
        "--range=-3.5,3.5",
    ];
    let table = stdout(&jtree(&[&common[..], &["--format", "table"]].concat()));
    let csv = stdout(&jtree(&[&common[..], &["--format", "csv"]].concat()));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,density,eps_used"));
    let rows = table_rows(&table, "density");
    let parsed: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), parsed.len());
    for (r, p) in rows.iter().zip(&parsed) {
        for (cell, &x) in r.iter().zip(p) {
            let shown: f64 = cell.parse().unwrap();
            assert!(
                (shown - x).abs() <= 5e-9 * x.abs().max(1e-300),
                "{cell} vs {x}"
            );
        }
    }
}

#[test]
fn every_subcommand_documents_its_flags() {
    for (cmd, flags) in [
        ("validate", &["--model", "--format", "--out"][..]),
        ("perron", &["--model"][..]),
        (
            "spectrum",
            &[
                "--range",
                "--resolution",
                "--eps",
                "--format",
                "--out",
                "--model",
            ][..],
        ),
        ("gap-report", &["--range", "--resolution", "--eps"][..]),
        ("gap-bounds", &["--tilde", "--reference", "--minus"][..]),
        ("green", &["--z", "--vertex"][..]),
        ("dos", &["--range", "--resolution", "--eps"][..]),
        ("rg-verify", &["--depth", "--format"][..]),
        ("ball-eig", &["--radius", "--base", "--budget"][..]),
    ] {
        let out = jtree(&[cmd, "--help"]);
        assert!(out.status.success());
        let help = stdout(&out);
        for f in flags {
            assert!(help.contains(f), "{cmd} help lacks {f}");
        }
        assert!(help.contains("default"), "{cmd} help shows no defaults");
    }
}

#[test]
fn writes_to_a_file() {
    let path = std::env::temp_dir().join(format!("jtree-out-{}.csv", std::process::id()));
    let out = jtree(&[
        "ball-eig",
        "--model",
        "cube",
        "--radius",
        "3",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success() && out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(
        text.lines().next(),
        Some("radius,nodes,top,distance_to_sigma")
    );
    assert_eq!(text.lines().count(), 5);
    std::fs::remove_file(path).unwrap();
}

#[test]
fn gap_bounds_contain_the_estimate() {
    let path = temp_file(
        "petersen-tilde.graph",
        &jtree_model_file("petersen", |k| 1.0 + 0.05 * ((k % 3) as f64 - 1.0)),
    );
    let out = jtree(&[
        "gap-bounds",
        "--model",
        "petersen",
        "--tilde",
        path.to_str().unwrap(),
        "--check",
        "--resolution",
        "151",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    let row = table_rows(&text, "gap bounds")
        .into_iter()
        .find(|r| r[0] == "within bounds")
        .unwrap();
    assert_eq!(row[1], "yes", "{text}");
}

/// Serialized built-in model with edge weights replaced by `a(k)`.
fn jtree_model_file(model: &str, a: impl Fn(usize) -> f64) -> String {
    let (g, params) = model
        .parse::<jacobi_tree::models::Model>()
        .unwrap()
        .build()
        .unwrap();
    let weights = (0..g.q()).map(a).collect();
    let params = jacobi_tree::graph::JacobiParams::new(&g, weights, params.b).unwrap();
    jacobi_tree::graph::serialize_graph(&g, &params)
}

#[test]
fn green_at_a_real_energy_above_sigma() {
    let out = jtree(&[
        "green", "--model", "free:3", "--z", "4", "--vertex", "plus", "--format", "csv",
    ]);
    let text = stdout(&out);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let z = num_complex::Complex64::new(4.0, 0.0);
    let exact =
        jacobi_tree::green_models::eval_free(3, jacobi_tree::green_models::SheetedPoint::first(z))
            .unwrap()
            .re;
    assert_eq!(row[0], "plus");
    assert!((row[1].parse::<f64>().unwrap() - exact).abs() < 1e-10);
}
