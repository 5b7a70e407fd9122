//! Drive the external-process adapters against a real child process: a small
//! Python worker speaking the line-JSON protocol. Skips cleanly when no
//! python3 is on the PATH.

use std::process::Command;

use taxacc_core::baseline::{SentenceEncoder, SubprocessEncoder};
use taxacc_core::corpus::Annotation;
use taxacc_core::pipeline::{ClassifierBackend, StageConfig, SubprocessBackend};
use taxacc_core::{Corpus, Example, Language};

/// Word-count classifier plus a toy encoder, all state in memory.
const WORKER: &str = r#"
import sys, json, hashlib

state = {"pos": {}, "neg": {}}

def tokens(text):
    return [w.strip(".,!?;:").lower() for w in text.split()]

def handle(req):
    op = req["op"]
    if op == "fine_tune":
        for text, label in zip(req["texts"], req["labels"]):
            bucket = state["pos"] if label == 1 else state["neg"]
            for w in tokens(text):
                bucket[w] = bucket.get(w, 0) + 1
        return {"ok": True}
    if op == "predict":
        labels = []
        for text in req["texts"]:
            score = sum(state["pos"].get(w, 0) - state["neg"].get(w, 0)
                        for w in tokens(text))
            labels.append(1 if score >= 0 else 0)
        return {"ok": True, "labels": labels}
    if op == "fingerprint":
        blob = json.dumps(state, sort_keys=True).encode()
        return {"ok": True, "fingerprint": hashlib.sha1(blob).hexdigest()[:16]}
    if op == "save":
        with open(req["path"], "w") as f:
            json.dump(state, f, sort_keys=True)
        return {"ok": True}
    if op == "load":
        with open(req["path"]) as f:
            loaded = json.load(f)
        state.clear()
        state.update(loaded)
        return {"ok": True}
    if op == "encode":
        vectors = []
        for text in req["texts"]:
            ws = tokens(text)
            vectors.append([
                float(len(ws)),
                float(sum(len(w) for w in ws)),
                float(len(set(ws))),
            ])
        return {"ok": True, "vectors": vectors}
    return {"ok": False, "error": "unknown op %r" % op}

for line in sys.stdin:
    if not line.strip():
        continue
    try:
        resp = handle(json.loads(line))
    except Exception as e:
        resp = {"ok": False, "error": str(e)}
    sys.stdout.write(json.dumps(resp) + "\n")
    sys.stdout.flush()
"#;

fn python3_available() -> bool {
    Command::new("python3")
        .arg("--version")
        .output()
        .map(|out| out.status.success())
        .unwrap_or(false)
}

fn worker_script(dir: &tempfile::TempDir) -> String {
    let path = dir.path().join("worker.py");
    std::fs::write(&path, WORKER).unwrap();
    path.display().to_string()
}

fn stage() -> StageConfig {
    StageConfig {
        datasets: vec!["original".to_string()],
        learning_rate: 3e-5,
        epochs: 4,
        batch_size: 8,
        optimizer: "adamw".to_string(),
        lr_schedule: "linear_decay".to_string(),
    }
}

fn training_corpus() -> Corpus {
    let rows = [
        ("good fine lovely", 1u8),
        ("good great nice", 1),
        ("bad awful wrong", 0),
        ("bad poor broken", 0),
    ];
    let examples = rows
        .iter()
        .enumerate()
        .map(|(i, &(text, label))| Example {
            id: format!("w{i}"),
            text: text.to_string(),
            language: Language::En,
            annotation: Annotation::Label(label),
        })
        .collect();
    Corpus::new(Language::En, examples).unwrap()
}

#[test]
fn python_classifier_worker_round_trip() {
    if !python3_available() {
        eprintln!("skipping: python3 unavailable");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let script = worker_script(&dir);
    let mut backend = SubprocessBackend::spawn("python3", &[script.clone()]).unwrap();

    assert!(
        backend.predict(&["good".to_string()]).is_err(),
        "prediction before training must be refused"
    );

    let before = backend.fingerprint();
    backend.fine_tune(&training_corpus(), &stage()).unwrap();
    assert_ne!(backend.fingerprint(), before, "training must change state");

    let queries: Vec<String> = ["great lovely", "awful poor", "nice", "wrong broken"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let labels = backend.predict(&queries).unwrap();
    assert_eq!(labels, vec![1, 0, 1, 0]);

    // a second worker restores the saved state and answers identically
    let snapshot = dir.path().join("state.json");
    backend.save(&snapshot).unwrap();
    let mut restored = SubprocessBackend::spawn("python3", &[script]).unwrap();
    restored.load(&snapshot).unwrap();
    assert_eq!(restored.predict(&queries).unwrap(), labels);
    assert_eq!(restored.fingerprint(), backend.fingerprint());
}

#[test]
fn python_encoder_worker_round_trip() {
    if !python3_available() {
        eprintln!("skipping: python3 unavailable");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let script = worker_script(&dir);
    let encoder = SubprocessEncoder::spawn("python3", &[script], 3).unwrap();
    assert_eq!(encoder.dim(), 3);

    let texts: Vec<String> = ["one two three", "four four"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let vectors = encoder.encode(&texts).unwrap();
    assert_eq!(vectors, vec![vec![3.0, 11.0, 3.0], vec![2.0, 8.0, 1.0]]);
}

#[test]
fn encoder_rejects_vectors_of_the_wrong_width() {
    if !python3_available() {
        eprintln!("skipping: python3 unavailable");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let script = worker_script(&dir);
    // the worker always answers with 3 numbers; declaring 5 must fail
    let encoder = SubprocessEncoder::spawn("python3", &[script], 5).unwrap();
    let err = encoder.encode(&["anything".to_string()]).unwrap_err();
    assert!(
        err.to_string().contains('5') || err.to_string().contains("dim"),
        "error should mention the dimension mismatch: {err}"
    );
}

#[test]
fn worker_errors_surface_as_backend_errors() {
    if !python3_available() {
        eprintln!("skipping: python3 unavailable");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let script = worker_script(&dir);
    let mut backend = SubprocessBackend::spawn("python3", &[script]).unwrap();
    let err = backend
        .load(std::path::Path::new("/no/such/state.json"))
        .unwrap_err();
    assert!(
        err.to_string().contains("No such file"),
        "worker-side message should pass through: {err}"
    );
}
