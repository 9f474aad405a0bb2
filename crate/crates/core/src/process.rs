//! Running an external solver with a timeout and capturing its output.

use std::io::{self, Read};
use std::os::unix::process::CommandExt;
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

#[derive(Debug)]
pub struct ProcessOutcome {
    pub stdout: String,
    /// Exit code, `None` if the process was killed or died from a signal.
    pub exit_code: Option<i32>,
    pub timed_out: bool,
    pub wall_time: Duration,
    /// Peak resident set size of the child, in kilobytes, when reported.
    pub peak_rss_kb: Option<u64>,
}

/// Splits a command template on whitespace and substitutes `{name}`
/// placeholders.
pub fn expand_template(template: &str, vars: &[(&str, &str)]) -> Vec<String> {
    template
        .split_whitespace()
        .map(|word| {
            vars.iter().fold(word.to_owned(), |acc, (k, v)| {
                acc.replace(&format!("{{{k}}}"), v)
            })
        })
        .collect()
}

/// Runs `argv`, killing it once `timeout` has elapsed.
pub fn run(argv: &[String], timeout: Duration) -> io::Result<ProcessOutcome> {
    let (program, args) = argv
        .split_first()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "empty command"))?;
    let start = Instant::now();
    let mut child = Command::new(program)
        .args(args)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .process_group(0)
        .spawn()?;
    let mut stdout = child.stdout.take().expect("piped stdout");
    let reader = thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = stdout.read_to_end(&mut buf);
        buf
    });

    let pid = child.id() as libc::pid_t;
    let mut timed_out = false;
    let (status, usage) = loop {
        let mut status: libc::c_int = 0;
        // SAFETY: rusage is plain old data and both pointers are valid.
        let mut usage: libc::rusage = unsafe { std::mem::zeroed() };
        let ret = unsafe { libc::wait4(pid, &mut status, libc::WNOHANG, &mut usage) };
        if ret == pid {
            break (status, usage);
        }
        if ret < 0 {
            let err = io::Error::last_os_error();
            if err.kind() == io::ErrorKind::Interrupted {
                continue;
            }
            return Err(err);
        }
        if !timed_out && start.elapsed() >= timeout {
            timed_out = true;
            // Kill the whole group so no grandchild keeps stdout open.
            unsafe { libc::kill(-pid, libc::SIGKILL) };
            let _ = child.kill();
        }
        thread::sleep(Duration::from_millis(2));
    };
    let wall_time = start.elapsed();
    let stdout = String::from_utf8_lossy(&reader.join().unwrap_or_default()).into_owned();

    let exit_code = libc::WIFEXITED(status).then(|| libc::WEXITSTATUS(status));
    let peak_rss_kb = u64::try_from(usage.ru_maxrss).ok().filter(|&kb| kb > 0);
    Ok(ProcessOutcome {
        stdout,
        exit_code,
        timed_out,
        wall_time,
        peak_rss_kb,
    })
}
