//! Compiles and runs a small C program against the generated header and
//! the shared library.

use std::env;
use std::path::{Path, PathBuf};
use std::process::Command;

/// Directory holding the shared library. Under `cargo test` it sits next to
/// the test binary in `deps/`; after `cargo build` it is one level up.
fn library_dir() -> PathBuf {
    let deps = env::current_exe().unwrap().parent().unwrap().to_path_buf();
    let up = deps.parent().unwrap().to_path_buf();
    [deps.clone(), up]
        .into_iter()
        .find(|d| d.join("librenyi_select_ffi.so").exists())
        .unwrap_or(deps)
}

#[test]
fn header_is_generated_with_the_api() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/renyi_select.h")).unwrap();
    for needle in [
        "typedef struct RenyiDataset RenyiDataset;",
        "RENYI_STATUS_OK = 0",
        "RENYI_CRITERION_CMI_PERMUTATION",
        "renyi_select(",
        "renyi_last_error(",
        "renyi_wilcoxon_rank_sum(",
    ] {
        assert!(header.contains(needle), "header lacks {needle}");
    }
}

#[test]
fn c_program_links_and_runs() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let lib_dir = library_dir();
    assert!(
        lib_dir.join("librenyi_select_ffi.so").exists(),
        "shared library missing in {}",
        lib_dir.display()
    );
    let out = tempfile::tempdir().unwrap();
    let exe = out.path().join("smoke");
    let cc = env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(&cc)
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg("-L")
        .arg(&lib_dir)
        .arg(format!("-Wl,-rpath,{}", lib_dir.display()))
        .args(["-lrenyi_select_ffi", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler available");
    assert!(status.success(), "C compilation failed");
    let run = Command::new(&exe).output().unwrap();
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(run.status.success(), "smoke program failed: {}", String::from_utf8_lossy(&run.stderr));
    assert!(stdout.starts_with("ok "), "{stdout}");
}
