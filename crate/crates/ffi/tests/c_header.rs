//! Compiles a C program against the generated header and the static library.

use std::env;
use std::fs;
use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "funcoord.h"

int main(void) {
    FcGrid *grid = NULL;
    if (fc_grid_line(-6.0, 6.0, 129, false, &grid) != FC_STATUS_OK) return 1;
    double dev = 1.0, scalar = 0.0;
    if (fc_dual_metric_deviation(grid, 6.0, &dev, &scalar) != FC_STATUS_OK) return 2;
    fc_grid_free(grid);
    if (!(dev < 1e-6) || fabs(scalar - sqrt(M_PI / 2.0)) > 1e-10) return 3;
    if (fc_grid_line(1.0, 0.0, 4, false, &grid) != FC_STATUS_INVALID_ARGUMENT) return 4;
    if (fc_last_error_message() == NULL) return 5;
    printf("ok %s\n", fc_version());
    return 0;
}
"#;

#[test]
fn c_program_links_and_runs() {
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // target/<profile>/deps/<test binary>
    let exe = env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libfuncoord_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());

    let work = tempfile::TempDir::new().unwrap();
    let src = work.path().join("main.c");
    let bin = work.path().join("main");
    fs::write(&src, PROGRAM).unwrap();
    let cc = env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(&cc)
        .args(["-std=c11", "-D_DEFAULT_SOURCE", "-Wall", "-Werror", "-o"])
        .arg(&bin)
        .arg(&src)
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .status()
        .expect("C compiler available");
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
