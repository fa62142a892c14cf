use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use alv_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(alv_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn standard_pair_on_sl2() {
    unsafe {
        let mut model = ptr::null_mut();
        assert_eq!(alv_model_sl2(&mut model), AlvStatus::Ok);
        assert_eq!(alv_model_len(model), 1);
        let mut pair = ptr::null_mut();
        assert_eq!(alv_pair_standard(model, &mut pair), AlvStatus::Ok);
        let mut m = AlvMarginSummary::default();
        assert_eq!(alv_pair_classify(pair, 0.0, 0.0, &mut m), AlvStatus::Ok);
        assert_eq!((m.al.margin, m.lin_al.margin), (4.0, 2.0));
        assert!(m.al.holds && m.balanced.holds && m.closed.holds);
        assert_eq!(m.al.verdict, 1);
        let mut r = AlvReebSummary::default();
        assert_eq!(alv_pair_reeb(pair, &mut r), AlvStatus::Ok);
        assert_eq!((r.determinant_min, r.determinant_max), (0.5, 0.5));
        assert!(r.sum.holds);
        alv_pair_free(pair);
        alv_model_free(model);
    }
}

#[test]
fn actions_and_counterexample() {
    unsafe {
        let mut model = ptr::null_mut();
        let spec = CString::new("sol:catmap").unwrap();
        assert_eq!(alv_model_from_spec(spec.as_ptr(), 64, &mut model), AlvStatus::Ok);
        let mut ce = ptr::null_mut();
        assert_eq!(alv_pair_counterexample(model, 1.0, &mut ce), AlvStatus::Ok);
        let mut m = AlvMarginSummary::default();
        alv_pair_classify(ce, 0.0, 0.0, &mut m);
        assert!(m.al.holds && !m.lin_al.holds);

        let mut std_pair = ptr::null_mut();
        assert_eq!(alv_pair_standard(model, &mut std_pair), AlvStatus::Ok);
        let big = CString::new("0.2*sin(2*pi*t)").unwrap();
        let mut moved = ptr::null_mut();
        assert_eq!(alv_pair_conformal(std_pair, big.as_ptr(), &mut moved), AlvStatus::Ok);
        alv_pair_classify(moved, 0.0, 0.0, &mut m);
        assert!(!m.al.holds);
        alv_pair_free(moved);
        let mut gauged = ptr::null_mut();
        assert_eq!(alv_pair_gauge(std_pair, big.as_ptr(), &mut gauged), AlvStatus::Ok);
        alv_pair_classify(gauged, 0.0, 0.0, &mut m);
        assert!(m.al.holds && !m.balanced.holds);

        let bad = CString::new("sin(").unwrap();
        let mut none = ptr::null_mut();
        assert_eq!(alv_pair_gauge(std_pair, bad.as_ptr(), &mut none), AlvStatus::Parse);
        assert!(none.is_null());
        assert!(last_error().contains("expression"));

        for p in [ce, std_pair, gauged] {
            alv_pair_free(p);
        }
        alv_model_free(model);
    }
}

#[test]
fn errors_and_null_handles() {
    unsafe {
        let mut model = ptr::null_mut();
        assert_eq!(alv_model_sol(-1.0, 16, &mut model), AlvStatus::InvalidArgument);
        assert!(!last_error().is_empty());
        let mut pair = ptr::null_mut();
        assert_eq!(alv_pair_standard(ptr::null(), &mut pair), AlvStatus::NullPointer);
        assert_eq!(alv_model_sl2(ptr::null_mut()), AlvStatus::NullPointer);
        alv_model_free(ptr::null_mut());
        alv_pair_free(ptr::null_mut());
        alv_string_free(ptr::null_mut());
        assert_eq!(alv_model_len(ptr::null()), 0);
        assert_eq!(CStr::from_ptr(alv_version()).to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}

#[test]
fn verify_json_report() {
    unsafe {
        let config = CString::new("model = \"sl2\"\ndeterministic = true\n").unwrap();
        let mut json = ptr::null_mut();
        let mut code = -1;
        assert_eq!(alv_verify_json(config.as_ptr(), &mut json, &mut code), AlvStatus::Ok);
        assert_eq!(code, 0);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        alv_string_free(json);
        assert!(text.contains("\"schema\": \"alv-report/1\""));
        let config = CString::new("[homotopy]\nepsilon = 0.5\n").unwrap();
        assert_eq!(alv_verify_json(config.as_ptr(), &mut json, &mut code), AlvStatus::InvalidArgument);
        let config = CString::new("grid = \"many\"").unwrap();
        assert_eq!(alv_verify_json(config.as_ptr(), &mut json, &mut code), AlvStatus::Config);
    }
}

#[test]
fn header_compiles_as_c() {
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let header = std::fs::read_to_string(include.join("alv.h")).unwrap();
    for name in ["alv_model_sl2", "alv_pair_classify", "alv_verify_json", "ALV_STATUS_PANIC", "typedef struct AlvPair AlvPair"] {
        assert!(header.contains(name), "{name}");
    }
    let dir = tempfile_dir();
    let src = dir.join("use_header.c");
    std::fs::write(
        &src,
        "#include \"alv.h\"\nint main(void) { AlvMarginSummary m; AlvModel *p = 0; (void)m; return alv_model_sl2(&p) == ALV_STATUS_OK ? 0 : 1; }\n",
    )
    .unwrap();
    match Command::new("cc").arg("-fsyntax-only").arg("-Wall").arg("-I").arg(&include).arg(&src).output() {
        Ok(out) => assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr)),
        Err(_) => eprintln!("no C compiler found, header syntax not checked"),
    }
}

fn tempfile_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("alv-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
