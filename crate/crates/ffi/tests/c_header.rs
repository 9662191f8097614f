use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "pnkhb.h"

int main(void) {
    PnkhbProblem *problem = NULL;
    if (pnkhb_problem_fig1(&problem) != PNKHB_STATUS_OK) return 10;
    PnkhbConfig *config = pnkhb_config_new();
    if (pnkhb_config_set(config, "solver.max_rank", "oops") != PNKHB_STATUS_INVALID_ARGUMENT) return 11;
    if (pnkhb_last_error_message()[0] == '\0') return 12;
    PnkhbResult *result = NULL;
    if (pnkhb_solve(problem, config, PNKHB_METHOD_PNKHB, NULL, 0, &result) != PNKHB_STATUS_OK) return 13;
    double x[2];
    if (pnkhb_result_x(result, x, 2) != PNKHB_STATUS_OK) return 14;
    PnkhbRecord rec;
    if (pnkhb_result_record(result, 0, &rec) != PNKHB_STATUS_OK || rec.iter != 0) return 15;
    printf("%.6f %.6f %zu\n", x[0], x[1], pnkhb_result_iterations(result));
    pnkhb_result_free(result);
    pnkhb_config_free(config);
    pnkhb_problem_free(problem);
    return fabs(x[0] + 4.0) < 1e-6 && fabs(x[1] - 3.0) < 1e-6 ? 0 : 16;
}
"#;

fn cc() -> Option<String> {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    Command::new(&cc).arg("--version").output().ok().filter(|o| o.status.success()).map(|_| cc)
}

fn include_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include")
}

// target/<profile>/deps/<test> -> target/<profile>
fn profile_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

fn write_program(dir: &Path) -> PathBuf {
    let src = dir.join("smoke.c");
    std::fs::write(&src, PROGRAM).unwrap();
    src
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let Some(cc) = cc() else {
        eprintln!("no C compiler, skipping");
        return;
    };
    let dir = tempfile::tempdir().unwrap();
    let src = write_program(dir.path());
    for lang in [["-xc", "-std=c99"], ["-xc++", "-std=c++11"]] {
        let out = Command::new(&cc)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-pedantic"])
            .args(lang)
            .arg("-I")
            .arg(include_dir())
            .arg(&src)
            .output()
            .unwrap();
        assert!(out.status.success(), "{lang:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn c_program_links_against_the_static_library() {
    let Some(cc) = cc() else {
        eprintln!("no C compiler, skipping");
        return;
    };
    let profile = profile_dir();
    let lib = profile.join("libpnkhb_ffi.a");
    if !lib.exists() {
        // Test harnesses only link the rlib; build the archive on demand.
        let mut build = Command::new(env!("CARGO"));
        build.args(["build", "-p", "pnkhb-ffi", "--lib", "--target-dir"]).arg(profile.parent().unwrap());
        if profile.file_name().is_some_and(|n| n == "release") {
            build.arg("--release");
        }
        let out = build.output().unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let dir = tempfile::tempdir().unwrap();
    let src = write_program(dir.path());
    let exe = dir.path().join("smoke");
    let out = Command::new(&cc)
        .arg("-I")
        .arg(include_dir())
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "-4.000000 3.000000 1");
}
