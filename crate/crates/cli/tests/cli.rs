use serde_json::{json, Value};
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::path::Path;
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

const KEEP: &str = r##"<svg viewBox="0 0 20 20"><rect width="10" height="10" fill="#ff0000"/><circle cx="15" cy="15" r="4" fill="blue"/></svg>"##;
const MONO: &str = r##"<svg viewBox="0 0 20 20"><rect width="10" height="10"/></svg>"##;

fn svgrefine(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_svgrefine")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn jsonl(path: &Path) -> Vec<Value> {
    fs::read_to_string(path).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

fn critique(score: f64) -> String {
    json!({"score": score, "critique": "c", "suggestions": ["s"]}).to_string()
}

fn svg_reply(color: &str) -> String {
    format!(
        r##"Here it is:
<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 100 100"><rect width="60" height="60" fill="{color}"/><circle cx="70" cy="70" r="20" fill="#00ff00"/></svg>"##
    )
}

#[test]
fn normalize_keeps_and_rejects_with_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let (input, output) = (dir.path().join("in"), dir.path().join("out"));
    fs::create_dir(&input).unwrap();
    fs::write(input.join("a.svg"), KEEP).unwrap();
    fs::write(input.join("b.svg"), MONO).unwrap();
    fs::write(input.join("notes.txt"), "ignored").unwrap();

    let out = svgrefine(&["normalize", "--in", s(&input), "--out", s(&output), "--token-limit", "8000"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = jsonl(&output.join("report.jsonl"));
    assert_eq!(report.len(), 2);
    assert_eq!(report[0]["file"], "a.svg");
    assert_eq!(report[0]["status"], "keep");
    assert_eq!(report[0]["colors"], 2);
    assert_eq!(report[1]["status"], "reject");
    assert_eq!(report[1]["reason"], "monochrome");
    assert!(output.join("a.svg").exists() && !output.join("b.svg").exists());
    // stderr carries line-delimited JSON logs
    for line in String::from_utf8_lossy(&out.stderr).lines() {
        serde_json::from_str::<Value>(line).expect("json log line");
    }
}

#[test]
fn token_limit_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in");
    fs::create_dir(&input).unwrap();
    fs::write(input.join("a.svg"), KEEP).unwrap();
    let cfg = dir.path().join("cfg.toml");
    fs::write(&cfg, "[normalize]\ntoken_limit = 5\n").unwrap();

    let out_cfg = dir.path().join("o1");
    svgrefine(&["normalize", "--config", s(&cfg), "--in", s(&input), "--out", s(&out_cfg)]);
    assert_eq!(jsonl(&out_cfg.join("report.jsonl"))[0]["status"], "reject");

    let out_flag = dir.path().join("o2");
    svgrefine(&["normalize", "--config", s(&cfg), "--in", s(&input), "--out", s(&out_flag), "--token-limit", "8000"]);
    assert_eq!(jsonl(&out_flag.join("report.jsonl"))[0]["status"], "keep");
}

#[test]
fn usage_and_config_errors_exit_two() {
    assert_eq!(code(&svgrefine(&["frobnicate"])), 2);
    assert_eq!(code(&svgrefine(&["normalize", "--in", "a", "--out", "b", "--bogus"])), 2);
    assert_eq!(code(&svgrefine(&[])), 2);

    let dir = tempfile::tempdir().unwrap();
    let prompts = dir.path().join("p.txt");
    fs::write(&prompts, "a cat\n").unwrap();
    let missing = dir.path().join("nope.toml");
    let out = svgrefine(&[
        "loop",
        "--prompt-file",
        s(&prompts),
        "--backend",
        &format!("http:{}", s(&missing)),
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(code(&out), 2);

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[loop]\nn_maximum = 3\n").unwrap();
    assert_eq!(code(&svgrefine(&["stats", "--config", s(&bad), "--in", s(dir.path()), "--report", "r.json"])), 2);

    // configured endpoint but no key in the environment
    let nokey = dir.path().join("nokey.toml");
    fs::write(
        &nokey,
        "[backend]\nendpoint = \"http://127.0.0.1:9\"\nmodel = \"m\"\napi_key_env = \"SVGREFINE_TEST_UNSET_KEY\"\n",
    )
    .unwrap();
    let out = svgrefine(&[
        "loop",
        "--prompt-file",
        s(&prompts),
        "--backend",
        &format!("http:{}", s(&nokey)),
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn render_writes_png_and_ppm() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("a.svg");
    fs::write(&svg, KEEP).unwrap();
    let png = dir.path().join("a.png");
    assert_eq!(code(&svgrefine(&["render", "--in", s(&svg), "--out", s(&png), "--size", "64"])), 0);
    let bytes = fs::read(&png).unwrap();
    let mut dec = zune_png::PngDecoder::new(&bytes);
    let pixels = dec.decode_raw().unwrap();
    assert_eq!(dec.get_dimensions().unwrap(), (64, 64));
    // top-left quadrant is the red rect
    assert_eq!(&pixels[..3], &[255, 0, 0]);

    let ppm = dir.path().join("a.ppm");
    assert_eq!(code(&svgrefine(&["render", "--in", s(&svg), "--out", s(&ppm), "--size", "8"])), 0);
    assert!(fs::read(&ppm).unwrap().starts_with(b"P6\n8 8\n255\n"));

    let broken = dir.path().join("broken.svg");
    fs::write(&broken, "<svg").unwrap();
    assert_eq!(code(&svgrefine(&["render", "--in", s(&broken), "--out", s(&png)])), 1);
}

#[test]
fn stats_and_export_renders() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("gen");
    fs::create_dir(&input).unwrap();
    fs::write(input.join("a.svg"), KEEP).unwrap();
    fs::write(input.join("b.svg"), MONO).unwrap();
    fs::write(input.join("c.svg"), "<svg><path d='M0 0 L").unwrap();
    let report = dir.path().join("report.json");

    let out = svgrefine(&["stats", "--in", s(&input), "--report", s(&report), "--table"]);
    assert_eq!(code(&out), 0);
    let r: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["method"], "gen");
    assert_eq!(r["n_samples"], 3);
    assert_eq!(r["rsr_percent"], 66.67);
    assert_eq!(r["fid"], Value::Null);
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.contains("RSR%") && table.contains("66.67") && table.contains("n/a"));

    let pngs = dir.path().join("png");
    let out = svgrefine(&["export-renders", "--in", s(&input), "--out", s(&pngs), "--size", "32"]);
    assert_eq!(code(&out), 1, "one input does not render");
    assert!(pngs.join("a.png").exists() && pngs.join("b.png").exists() && !pngs.join("c.png").exists());
}

fn loop_script() -> Value {
    json!({
        "generate": [svg_reply("#ff0000"), svg_reply("#aa0000")],
        "critique": [critique(4.0), critique(9.7)],
        "score": [json!({"image_1_score": 80, "image_2_score": 70, "image_3_score": 60}).to_string()],
        "by_prompt": {
            "a fox": {
                "generate": [svg_reply("#ff8800"), "no svg here", svg_reply("#ffaa00")],
                "critique": ["not json", critique(9.9), critique(9.9)],
                "score": [json!({"image_1_score": 90, "image_2_score": 20}).to_string()]
            }
        }
    })
}

fn run_loop_cli(dir: &Path, out: &str) -> Output {
    let script = dir.join("script.json");
    fs::write(&script, loop_script().to_string()).unwrap();
    let prompts = dir.join("prompts.txt");
    fs::write(&prompts, "a red square\n\na fox\n").unwrap();
    svgrefine(&[
        "loop",
        "--prompt-file",
        s(&prompts),
        "--backend",
        &format!("mock:{}", s(&script)),
        "--out",
        s(&dir.join(out)),
        "--n-max",
        "3",
        "--tau",
        "9.5",
        "--workers",
        "2",
    ])
}

fn tree_bytes(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(root).unwrap().display().to_string(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn loop_with_mock_writes_deterministic_transcripts() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_loop_cli(dir.path(), "t1");
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let t: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("t1/0001/transcript.json")).unwrap()).unwrap();
    assert_eq!(t["prompt"], "a red square");
    assert_eq!(t["terminated_by"], "threshold");
    assert_eq!(t["iterations"].as_array().unwrap().len(), 2);
    assert!(dir.path().join("t1/0001/iter0.png").exists());
    assert!(dir.path().join("t1/0001/iter1.png").exists());
    let fox: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("t1/0002/transcript.json")).unwrap()).unwrap();
    assert_eq!(fox["prompt"], "a fox");
    assert_eq!(fox["iterations"][0]["reasks"], 1);

    run_loop_cli(dir.path(), "t2");
    assert_eq!(tree_bytes(&dir.path().join("t1")), tree_bytes(&dir.path().join("t2")));
}

#[test]
fn build_pref_with_mock_and_transcripts() {
    let dir = tempfile::tempdir().unwrap();
    run_loop_cli(dir.path(), "t");
    let script = dir.path().join("pref.json");
    fs::write(
        &script,
        json!({
            "generate": [svg_reply("#ff0000"), svg_reply("#0000ff"), "<svg broken", svg_reply("#00ffff")],
            "score": [json!({"image_1_score": 90, "image_2_score": 50, "image_3_score": 88}).to_string()]
        })
        .to_string(),
    )
    .unwrap();
    let prompts = dir.path().join("prompts.txt");
    fs::write(&prompts, "a red square\n").unwrap();
    let data = dir.path().join("data");
    let out = svgrefine(&[
        "build-pref",
        "--prompts",
        s(&prompts),
        "--backend",
        &format!("mock:{}", s(&script)),
        "--n",
        "4",
        "--delta",
        "5",
        "--out",
        s(&data),
        "--transcripts",
        s(&dir.path().join("t")),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    // scores 90, 50, (broken), 88: render pairs 0>2, 1>2, 3>2; score pairs 0>1, 3>1
    let pref = jsonl(&data.join("pref.jsonl"));
    assert_eq!(pref.len(), 5);
    let manifest: Value = serde_json::from_str(&fs::read_to_string(data.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["files"]["pref.jsonl"]["count"], 5);
    let critiques = jsonl(&data.join("critique.jsonl"));
    assert!(!critiques.is_empty());
    assert!(critiques[0]["image_path"].as_str().unwrap().starts_with("0001/iter"));
    assert_eq!(jsonl(&data.join("candidates.jsonl")).len(), 4);
}

/// Minimal HTTP/1.1 server: the first `fail` requests get 429, the rest a fixed completion.
fn stub_server(fail: usize, content: String) -> (String, Arc<AtomicUsize>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let hits = Arc::new(AtomicUsize::new(0));
    let counter = Arc::clone(&hits);
    std::thread::spawn(move || {
        for stream in listener.incoming() {
            let mut stream = stream.unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut len = 0;
            loop {
                let mut line = String::new();
                if reader.read_line(&mut line).unwrap() == 0 || line == "\r\n" {
                    break;
                }
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
            }
            let mut body = vec![0; len];
            reader.read_exact(&mut body).unwrap();
            let n = counter.fetch_add(1, Ordering::SeqCst);
            let resp = if n < fail {
                "HTTP/1.1 429 Too Many Requests\r\nRetry-After: 0\r\nContent-Length: 0\r\nConnection: close\r\n\r\n"
                    .to_string()
            } else {
                let payload = json!({
                    "choices": [{"message": {"content": content}}],
                    "usage": {"prompt_tokens": 3, "completion_tokens": 5}
                })
                .to_string();
                format!("HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}", payload.len())
            };
            stream.write_all(resp.as_bytes()).unwrap();
        }
    });
    (format!("http://{addr}/v1/chat/completions"), hits)
}

#[test]
fn http_backend_retries_rate_limits() {
    let content = format!("{}\n{}", critique(9.8), svg_reply("#123456"));
    let (endpoint, hits) = stub_server(2, content);
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("http.toml");
    fs::write(&cfg, format!("[backend]\nendpoint = \"{endpoint}\"\nmodel = \"test-model\"\napi_key_env = \"SVGREFINE_STUB_KEY\"\ntimeout_s = 10\n")).unwrap();
    let prompts = dir.path().join("p.txt");
    fs::write(&prompts, "a square\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_svgrefine"))
        .args([
            "loop",
            "--prompt-file",
            s(&prompts),
            "--backend",
            &format!("http:{}", s(&cfg)),
            "--out",
            s(&dir.path().join("t")),
        ])
        .env("SVGREFINE_STUB_KEY", "secret")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let t: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("t/0001/transcript.json")).unwrap()).unwrap();
    assert_eq!(t["terminated_by"], "threshold");
    assert_eq!(t["final_score"], 9.8);
    // two rate-limited attempts, then generation and critique
    assert_eq!(hits.load(Ordering::SeqCst), 4);
    assert!(!String::from_utf8_lossy(&out.stderr).contains("secret"));
}
