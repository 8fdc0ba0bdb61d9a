use std::path::PathBuf;

use nsdwt::report::cmd_count;
use nsdwt::{build_variant, get_wavelet, SchemeKind};

// Set UPDATE_GOLDEN=1 to rewrite the files after an intended change.
fn check(name: &str, actual: &str) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "{name} differs from golden file");
}

#[test]
fn dump_cdf53_nonseparable_lifting_optimized() {
    let w = get_wavelet("cdf53").unwrap();
    check(
        "cdf53_ns-lift_opt.txt",
        &build_variant(SchemeKind::NonSeparableLifting, &w, true).unwrap().dump(),
    );
}

#[test]
fn dump_cdf53_polyconvolution() {
    let w = get_wavelet("cdf53").unwrap();
    check(
        "cdf53_ns-polyconv.txt",
        &build_variant(SchemeKind::NonSeparablePolyconvolution, &w, false)
            .unwrap()
            .dump(),
    );
}

#[test]
fn dump_dd137_separable_lifting() {
    let w = get_wavelet("dd137").unwrap();
    check(
        "dd137_sep-lift.txt",
        &build_variant(SchemeKind::SeparableLifting, &w, false).unwrap().dump(),
    );
}

#[test]
fn count_tables() {
    for name in ["cdf53", "cdf97", "dd137"] {
        check(
            &format!("count_{name}.csv"),
            &cmd_count(&get_wavelet(name).unwrap()).unwrap(),
        );
    }
}
