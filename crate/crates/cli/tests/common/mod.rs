#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

pub fn repo_path(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Output {
    pub fn json(&self) -> Value {
        serde_json::from_str(&self.stdout).unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", self.stdout))
    }

    pub fn json_lines(&self) -> Vec<Value> {
        self.stdout.lines().map(|l| serde_json::from_str(l).unwrap()).collect()
    }
}

pub fn diagiso(args: &[&str]) -> Output {
    diagiso_env(args, &[])
}

pub fn diagiso_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_diagiso"));
    cmd.args(args).env_remove(diagiso_cli::JOBS_ENV);
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    Output {
        code: out.status.code().expect("exited normally"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

pub struct Schema(jsonschema::Validator);

impl Schema {
    pub fn load(name: &str) -> Schema {
        let text = fs::read_to_string(repo_path("schemas").join(name)).unwrap();
        let value: Value = serde_json::from_str(&text).unwrap();
        Schema(jsonschema::validator_for(&value).unwrap_or_else(|e| panic!("{name}: {e}")))
    }

    pub fn check(&self, instance: &Value) {
        let errors = self.0.iter_errors(instance).map(|e| format!("{} at {}", e, e.instance_path)).collect::<Vec<_>>();
        assert!(errors.is_empty(), "schema violations: {errors:#?}\n{instance:#}");
    }

    pub fn is_valid(&self, instance: &Value) -> bool {
        self.0.is_valid(instance)
    }
}

pub fn write(dir: &Path, name: &str, contents: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, contents).unwrap();
    p.to_str().unwrap().to_string()
}
