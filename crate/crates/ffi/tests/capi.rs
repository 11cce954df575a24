//! Exercise the C ABI the way a foreign binding would: through raw
//! pointers and status codes only.

use std::ffi::{c_char, CString};
use std::ptr;

use stratal_ffi::{
    stratal_last_error_message, stratal_pool_free, stratal_pool_frontier_size,
    stratal_pool_generate, stratal_pool_len, stratal_pool_load, stratal_pool_output_dim,
    stratal_pool_stratum_count, stratal_pool_stratum_of, stratal_run_experiment, stratal_version,
    StratalCase, StratalPool, StratalStatus,
};

fn last_error() -> String {
    unsafe {
        let needed = stratal_last_error_message(ptr::null_mut(), 0);
        let mut buf = vec![0u8; needed + 1];
        stratal_last_error_message(buf.as_mut_ptr().cast::<c_char>(), buf.len());
        String::from_utf8_lossy(&buf[..needed]).into_owned()
    }
}

#[test]
fn generate_query_free_lifecycle() {
    unsafe {
        let mut pool: *mut StratalPool = ptr::null_mut();
        let status = stratal_pool_generate(StratalCase::Circular, 200, 9, &mut pool);
        assert_eq!(status, StratalStatus::Ok);
        assert!(!pool.is_null());

        assert_eq!(stratal_pool_len(pool), 200);
        assert_eq!(stratal_pool_output_dim(pool), 2);
        let frontier = stratal_pool_frontier_size(pool);
        let strata = stratal_pool_stratum_count(pool);
        assert!(frontier >= 1 && frontier <= 200);
        assert!(strata >= 1);

        // Stratum numbers are a total function into 1..=strata.
        let mut on_frontier = 0;
        for i in 0..200 {
            let mut s = 0usize;
            assert_eq!(stratal_pool_stratum_of(pool, i, &mut s), StratalStatus::Ok);
            assert!(s >= 1 && s <= strata);
            if s == 1 {
                on_frontier += 1;
            }
        }
        assert_eq!(on_frontier, frontier);

        stratal_pool_free(pool);
    }
}

#[test]
fn invalid_inputs_yield_status_codes_and_messages() {
    unsafe {
        let mut pool: *mut StratalPool = ptr::null_mut();
        assert_eq!(
            stratal_pool_generate(StratalCase::Linear, 1, 0, &mut pool),
            StratalStatus::InvalidArgument
        );
        assert!(pool.is_null());
        assert!(last_error().contains("at least 2"));

        assert_eq!(
            stratal_pool_generate(StratalCase::Linear, 10, 0, ptr::null_mut()),
            StratalStatus::NullPointer
        );

        let mut s = 0usize;
        assert_eq!(
            stratal_pool_stratum_of(ptr::null(), 0, &mut s),
            StratalStatus::NullPointer
        );

        assert_eq!(stratal_pool_generate(StratalCase::Bat, 16, 1, &mut pool), StratalStatus::Ok);
        assert_eq!(
            stratal_pool_stratum_of(pool, 16, &mut s),
            StratalStatus::InvalidArgument
        );
        stratal_pool_free(pool);

        let missing = CString::new("/nonexistent/stratal-pool").unwrap();
        let mut loaded: *mut StratalPool = ptr::null_mut();
        assert_eq!(
            stratal_pool_load(missing.as_ptr(), &mut loaded),
            StratalStatus::IoError
        );
        assert!(loaded.is_null());
    }
}

#[test]
fn experiment_runs_through_the_c_surface() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("results");
    let config = format!(
        r#"
[dataset]
case = "linear"
n = 60
seed = 2

[run]
initial = 6
iterations = 4
runs = 2
master_seed = 5
output_dir = "{}"

[surrogate]
n_trees = 8

[[strategies]]
kind = "random"
"#,
        out.display()
    );
    let cfg_path = tmp.path().join("exp.toml");
    std::fs::write(&cfg_path, config).unwrap();
    let c_path = CString::new(cfg_path.to_str().unwrap()).unwrap();
    unsafe {
        assert_eq!(stratal_run_experiment(c_path.as_ptr()), StratalStatus::Ok);
        assert_eq!(
            stratal_run_experiment(ptr::null()),
            StratalStatus::NullPointer
        );
    }
    assert!(out.join("manifest.json").exists());
    assert!(out.join("trajectories").join("random-run001.csv").exists());

    // Bad config surfaces as a config status, not a crash.
    let bad_path = tmp.path().join("bad.toml");
    std::fs::write(&bad_path, "not really toml [").unwrap();
    let c_bad = CString::new(bad_path.to_str().unwrap()).unwrap();
    unsafe {
        assert_eq!(
            stratal_run_experiment(c_bad.as_ptr()),
            StratalStatus::ConfigError
        );
    }
    assert!(!last_error().is_empty());
}

#[test]
fn generated_header_declares_the_surface() {
    let header = std::fs::read_to_string(
        std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include/stratal.h"),
    )
    .expect("cbindgen header missing");
    for symbol in [
        "stratal_pool_generate",
        "stratal_pool_load",
        "stratal_pool_free",
        "stratal_pool_stratum_of",
        "stratal_run_experiment",
        "stratal_last_error_message",
        "stratal_version",
        "StratalStatus",
        "StratalCase",
        "struct StratalPool",
    ] {
        assert!(header.contains(symbol), "header lacks `{symbol}`");
    }
}

#[test]
fn version_matches_crate() {
    let v = unsafe { std::ffi::CStr::from_ptr(stratal_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
