//! Line-oriented JSON client for external adapter processes.
//!
//! Adapters (classifier backends, sentence encoders, fill models) run as
//! child processes speaking one JSON object per line: a request on stdin, a
//! response on stdout. The protocol is synchronous; the child owns any
//! internal batching or device management.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};

pub struct ProcClient {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
    command: String,
}

impl ProcClient {
    pub fn spawn(command: &str, args: &[String]) -> std::io::Result<ProcClient> {
        let mut child = Command::new(command)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(ProcClient {
            child,
            stdin,
            stdout,
            command: command.to_string(),
        })
    }

    /// Send one request line, wait for one response line.
    pub fn call(&mut self, request: &serde_json::Value) -> std::io::Result<serde_json::Value> {
        let mut line = serde_json::to_string(request)?;
        line.push('\n');
        self.stdin.write_all(line.as_bytes())?;
        self.stdin.flush()?;

        let mut response = String::new();
        let read = self.stdout.read_line(&mut response)?;
        if read == 0 {
            return Err(std::io::Error::new(
                std::io::ErrorKind::UnexpectedEof,
                format!("adapter process `{}` closed its pipe", self.command),
            ));
        }
        serde_json::from_str(&response).map_err(|e| {
            std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                format!("adapter `{}` sent malformed JSON: {e}", self.command),
            )
        })
    }
}

impl Drop for ProcClient {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
