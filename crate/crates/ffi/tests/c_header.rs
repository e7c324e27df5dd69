//! Compiles and runs a small C program against the generated header and
//! the static library.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include <string.h>
#include "viewpulse.h"

int main(void) {
    double a[5] = {1, 2, 3, 4, 5};
    double b[5] = {5, 6, 7, 8, 7};
    double r = 0;
    if (vp_srcc(a, b, 5, &r) != VP_STATUS_OK) return 1;
    if (fabs(r - 0.8207826816681233) > 1e-12) return 2;
    if (fabs(vp_composite(0.381, 0.499, 0.039, 0.795) - 1.466) > 1e-12) return 3;
    VpModel *m = NULL;
    if (vp_model_load("/nonexistent/model.ckpt", &m) != VP_STATUS_IO) return 4;
    if (m != NULL || vp_last_error() == NULL) return 5;
    if (strlen(vp_version()) == 0) return 6;
    printf("ok\n");
    return 0;
}
"#;

fn find_compiler() -> Option<String> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok())
        .map(String::from)
}

#[test]
fn c_program_links_and_runs() {
    let Some(cc) = find_compiler() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap();
    let lib = profile_dir.join("libviewpulse_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let bin = dir.path().join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let status = Command::new(cc)
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "C program exited {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}
