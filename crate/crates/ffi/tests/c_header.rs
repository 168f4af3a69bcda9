use std::path::{Path, PathBuf};
use std::process::Command;

fn manifest() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

/// Directory holding the library artifacts (`target/<profile>`).
fn artifact_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

fn cc() -> Option<String> {
    ["cc", "clang", "gcc"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok())
        .map(str::to_string)
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(manifest().join("include/polyconv.h")).unwrap();
    for name in [
        "pc_distribution_parse",
        "pc_distribution_format",
        "pc_distribution_free",
        "pc_convolve",
        "pc_power",
        "pc_compound_poisson",
        "pc_mixture",
        "pc_char_fn",
        "pc_kolmogorov",
        "pc_measure",
        "pc_last_error_message",
        "typedef struct PcDistribution PcDistribution",
        "PC_STATUS_OK = 0",
    ] {
        assert!(h.contains(name), "{name} missing from header");
    }
}

#[test]
fn c_program_links_and_runs() {
    let Some(cc) = cc() else {
        eprintln!("no C compiler; skipped");
        return;
    };
    let lib = artifact_dir().join("libpolyconv_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());
    let tmp = tempfile::tempdir().unwrap();
    let exe = tmp.path().join("smoke");
    let status = Command::new(&cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest().join("include"))
        .arg(manifest().join("tests/smoke.c"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl"])
        .arg("-o")
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "kolmogorov 0.5 status 3");
}
