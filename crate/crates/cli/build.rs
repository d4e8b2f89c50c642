//! Embeds a git-style version string (`<semver>+<short-commit>`) into the
//! binary so run reports identify the exact build. Falls back to
//! `<semver>+unknown` outside a git checkout.

use std::process::Command;

fn main() {
    let hash = Command::new("git")
        .args(["rev-parse", "--short=9", "HEAD"])
        .output()
        .ok()
        .filter(|out| out.status.success())
        .and_then(|out| String::from_utf8(out.stdout).ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "unknown".to_string());
    println!("cargo:rustc-env=COLLOC_GIT_HASH={hash}");
    // The hash changes whenever HEAD moves; recording the dependency keeps
    // stale hashes out of incremental builds without forcing full rebuilds.
    println!("cargo:rerun-if-changed=../../.git/HEAD");
}
