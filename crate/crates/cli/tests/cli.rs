use std::path::Path;
use std::process::{Command, Output};

fn followup(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_followup"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn simulate(dir: &Path, seed: &str) -> std::path::PathBuf {
    let out = dir.join(format!("sim_{seed}.csv"));
    let o = followup(&["simulate", "--seed", seed, "--out", path(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn seeded_runs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = std::fs::read(simulate(dir.path(), "11")).unwrap();
    let b = followup(&["simulate", "--seed", "11"]).stdout;
    assert_eq!(a, b);
    let c = followup(&["simulate", "--seed", "12"]).stdout;
    assert_ne!(a, c);

    let sim = dir.path().join("sim_11.csv");
    let args = [
        "quantify",
        "-i",
        path(&sim),
        "--ltfu-fraction",
        "0.3",
        "--seed",
        "5",
    ];
    let first = followup(&args);
    assert_eq!(code(&first), 0);
    assert_eq!(first.stdout, followup(&args).stdout);

    let power = [
        "power",
        "--reps",
        "20",
        "--tests",
        "logrank,rmst:36",
        "--seed",
        "9",
    ];
    let p1 = followup(&power);
    assert_eq!(code(&p1), 0, "{}", String::from_utf8_lossy(&p1.stderr));
    assert_eq!(p1.stdout, followup(&power).stdout);
    let report: serde_json::Value = serde_json::from_slice(&p1.stdout).unwrap();
    assert_eq!(report["reps"], 20);
    assert_eq!(report["results"].as_array().unwrap().len(), 2);
}

#[test]
fn analyze_writes_every_format() {
    let dir = tempfile::tempdir().unwrap();
    let sim = simulate(dir.path(), "3");
    let json = dir.path().join("report.json");
    let plot = dir.path().join("curves.csv");
    let o = followup(&[
        "analyze",
        "-i",
        path(&sim),
        "--milestones",
        "24,36",
        "--tau",
        "48",
        "--d-fin",
        "500",
        "--fh",
        "0:1",
        "--out",
        path(&json),
        "--plotdata",
        path(&plot),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["schema_version"], "1.0");
    let ids: Vec<&str> = v["sections"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["id"].as_str().unwrap())
        .collect();
    for q in [
        "followup", "Q1", "Q2", "Q3", "Q4", "Q5", "Q6", "Q7", "Q8", "Q9", "accrual",
    ] {
        assert!(ids.contains(&q), "missing section {q}");
    }
    let plot = std::fs::read_to_string(&plot).unwrap();
    assert!(plot.starts_with("curve_id,t,value,se,n_risk\n"));
    assert!(plot.contains("\nkm_control,") && plot.contains("\naccrual_ecdf,"));

    let md = followup(&["analyze", "-i", path(&sim), "--format", "markdown"]);
    assert_eq!(code(&md), 0);
    assert!(String::from_utf8(md.stdout).unwrap().starts_with("# "));

    let csv_dir = dir.path().join("tables");
    let o = followup(&[
        "analyze",
        "-i",
        path(&sim),
        "--format",
        "csv-dir",
        "--out",
        path(&csv_dir),
    ]);
    assert_eq!(code(&o), 0);
    assert!(csv_dir.join("metadata.csv").exists());
}

#[test]
fn km_emits_plot_data_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.csv");
    std::fs::write(
        &input,
        "patient_id,arm,entry_time,time,status\n1,a,0,2,event\n2,a,0,5,admin\n3,b,1,3,ltfu\n4,b,0,4,event\n",
    )
    .unwrap();
    let plot = dir.path().join("p.csv");
    let svg = dir.path().join("p.svg");
    let o = followup(&[
        "km",
        "-i",
        path(&input),
        "--plotdata",
        path(&plot),
        "--svg",
        path(&svg),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = std::fs::read_to_string(&plot).unwrap();
    assert!(rows.contains("km_a,2,1,0,2\nkm_a,2,0.5,"));
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
}

#[test]
fn report_compares_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let early = dir.path().join("early.csv");
    let late = dir.path().join("late.csv");
    std::fs::write(
        &early,
        "patient_id,arm,entry_time,time,status\n1,a,0,4,event\n2,a,1,9,admin\n3,b,2,8,admin\n4,b,3,2,event\n",
    )
    .unwrap();
    std::fs::write(
        &late,
        "patient_id,arm,entry_time,time,status\n1,a,0,4,event\n2,a,1,12,event\n3,b,2,18,admin\n4,b,3,2,event\n",
    )
    .unwrap();
    let o = followup(&[
        "report",
        "-i",
        path(&early),
        "-i",
        path(&late),
        "--ccod",
        "10",
        "--ccod",
        "20",
        "--label",
        "first",
        "--label",
        "second",
        "--format",
        "markdown",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("| quantifier | first | second | Δ | Δ% |"));
    // Time to CCOD grows by exactly the CCOD gap.
    let rows: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("| 4. Time to CCOD"))
        .collect();
    assert_eq!(
        rows[0],
        "| 4. Time to CCOD | 8.5000 | 18.5000 | 10.0000 | 117.6471 |"
    );
    assert_eq!(
        rows[2],
        "| 4. Time to CCOD | 7.5000 | 17.5000 | 10.0000 | 133.3333 |"
    );

    let bad = followup(&[
        "report",
        "-i",
        path(&early),
        "-i",
        path(&late),
        "--ccod",
        "10",
    ]);
    assert_eq!(code(&bad), 2);
}

#[test]
fn exit_codes_separate_input_signal_and_io() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(
        &bad,
        "patient_id,arm,entry_time,time,status\n1,a,0,2,dead\n",
    )
    .unwrap();
    assert_eq!(code(&followup(&["km", "-i", path(&bad), "--strict"])), 2);
    assert_eq!(
        code(&followup(&[
            "km",
            "-i",
            path(&dir.path().join("missing.csv"))
        ])),
        4
    );
    assert_eq!(
        code(&followup(&[
            "quantify",
            "-i",
            path(&bad),
            "--quantifier",
            "q9"
        ])),
        2
    );
    assert_eq!(code(&followup(&["analyze", "--bogus"])), 2);

    // Every event falls in one arm: the Cox estimate diverges.
    let monotone = dir.path().join("monotone.csv");
    let mut text = String::from("patient_id,arm,entry_time,time,status\n");
    for i in 0..6 {
        text.push_str(&format!("c{i},control,0,{},event\n", i + 1));
        text.push_str(&format!("t{i},treatment,0,{},admin\n", i + 1));
    }
    std::fs::write(&monotone, text).unwrap();
    let o = followup(&["analyze", "-i", path(&monotone), "--milestones", "3"]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("signal:"));
    // The report is still written before the signal is raised.
    assert!(serde_json::from_slice::<serde_json::Value>(&o.stdout).is_ok());

    let sim = simulate(dir.path(), "1");
    let target = dir.path().join("no/such/dir/out.json");
    assert_eq!(
        code(&followup(&[
            "analyze",
            "-i",
            path(&sim),
            "--out",
            path(&target)
        ])),
        4
    );
}

#[test]
fn stability_pooled_and_per_arm() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.csv");
    std::fs::write(
        &input,
        "patient_id,arm,entry_time,time,status\n1,a,0,1,event\n2,a,0,2,admin\n3,b,0,1,admin\n4,b,0,3,event\n",
    )
    .unwrap();
    let pooled = followup(&["stability", "-i", path(&input), "--delta-days", "0"]);
    assert_eq!(code(&pooled), 0);
    let v: serde_json::Value = serde_json::from_slice(&pooled.stdout).unwrap();
    let values = v["sections"][0]["values"].as_array().unwrap();
    assert_eq!(values[0]["name"], "stability index [pooled]");
    let per_arm = followup(&["stability", "-i", path(&input), "--per-arm"]);
    assert_eq!(code(&per_arm), 0);
    let v: serde_json::Value = serde_json::from_slice(&per_arm.stdout).unwrap();
    let names: Vec<&str> = v["sections"][0]["values"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x["name"].as_str().unwrap())
        .collect();
    assert!(names.contains(&"stability index [a]") && names.contains(&"stability index [b]"));
    assert_eq!(
        code(&followup(&[
            "stability",
            "-i",
            path(&input),
            "--delta-days",
            "-1"
        ])),
        2
    );
}
