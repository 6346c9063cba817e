use std::path::PathBuf;
use std::process::Command;

fn target_profile_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_declares_every_entry_point() {
    let header =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/homoclinic.h"))
            .unwrap();
    for name in [
        "hc_problem_new",
        "hc_problem_set_solver",
        "hc_problem_free",
        "hc_minimize",
        "hc_refine",
        "hc_report_free",
        "hc_report_summary",
        "hc_report_orbit_len",
        "hc_report_orbit",
        "hc_report_times",
        "hc_report_json",
        "hc_string_free",
        "hc_coercivity_bound",
        "hc_last_error_message",
        "hc_version",
        "typedef struct HcProblem HcProblem;",
        "typedef struct HcReport HcReport;",
        "HC_STATUS_BUFFER_TOO_SMALL",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}

#[test]
fn c_program_links_against_static_library() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found, skipping");
        return;
    };
    let dir = target_profile_dir();
    let lib = dir.join("libhomoclinic_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());
    let tmp = tempfile::tempdir().unwrap();
    let exe = tmp.path().join("smoke");
    let manifest = env!("CARGO_MANIFEST_DIR");
    let status = Command::new(&cc)
        .arg(format!("{manifest}/tests/smoke.c"))
        .arg(format!("-I{manifest}/include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "compiling smoke.c failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(
        out.status.success(),
        "smoke failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}

fn which_cc() -> Result<String, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if Command::new(cc).arg("--version").output().is_ok() {
            return Ok(cc.to_string());
        }
    }
    Err(())
}
