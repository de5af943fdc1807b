use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use dmiat_ffi::*;

const TOY: &str = "x,y\n1,a\n2,a\n3,a\n4,b\n5,b\n6,b\n7,b\n8,b\n9,b\n10,b\n";

fn parse(text: &str) -> *mut DmiatDataset {
    let text = CString::new(text).unwrap();
    let mut ds = ptr::null_mut();
    let status = unsafe { dmiat_dataset_parse(text.as_ptr(), DmiatFormat::Csv, &mut ds) };
    assert_eq!(status, DmiatStatus::Ok);
    assert!(!ds.is_null());
    ds
}

fn last_error() -> String {
    let p = dmiat_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn dataset_lifecycle() {
    let ds = parse(TOY);
    unsafe {
        assert_eq!(dmiat_dataset_n_rows(ds), 10);
        assert_eq!(dmiat_dataset_n_attributes(ds), 1);
        assert_eq!(dmiat_dataset_n_classes(ds), 2);
        let mut labels = [9usize; 10];
        assert_eq!(
            dmiat_dataset_labels(ds, labels.as_mut_ptr(), labels.len()),
            DmiatStatus::Ok
        );
        assert_eq!(labels, [0, 0, 0, 1, 1, 1, 1, 1, 1, 1]);
        let mut short = [0usize; 3];
        assert_eq!(
            dmiat_dataset_labels(ds, short.as_mut_ptr(), 3),
            DmiatStatus::OutOfRange
        );
        dmiat_dataset_free(ds);
        dmiat_dataset_free(ptr::null_mut());
        assert_eq!(dmiat_dataset_n_rows(ptr::null()), 0);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    let text = CString::new("x,y\n1\n").unwrap();
    let mut ds = ptr::null_mut();
    let status = unsafe { dmiat_dataset_parse(text.as_ptr(), DmiatFormat::Csv, &mut ds) };
    assert_eq!(status, DmiatStatus::Parse);
    assert!(ds.is_null());
    assert!(last_error().contains("line 2"));

    let status = unsafe { dmiat_dataset_parse(ptr::null(), DmiatFormat::Csv, &mut ds) };
    assert_eq!(status, DmiatStatus::NullArgument);

    let missing = CString::new("/nonexistent/file.csv").unwrap();
    assert_eq!(
        unsafe { dmiat_dataset_load(missing.as_ptr(), &mut ds) },
        DmiatStatus::Io
    );

    let toy = parse(TOY);
    let crit = CString::new("lift0.9").unwrap();
    let mut cuts = ptr::null_mut();
    let status = unsafe { dmiat_cuts_generate(toy, ptr::null(), 0, 0.1, crit.as_ptr(), &mut cuts) };
    assert_eq!(status, DmiatStatus::InvalidConfig);
    unsafe { dmiat_dataset_free(toy) };

    let mut h = 0.0;
    assert_eq!(
        unsafe { dmiat_entropy([1usize, 1].as_ptr(), 2, &mut h) },
        DmiatStatus::Ok
    );
    assert!(dmiat_last_error_message().is_null());
}

#[test]
fn load_keel_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("toy.dat");
    std::fs::write(
        &path,
        "@relation toy\n@attribute x real\n@attribute c {p,q}\n@outputs c\n@data\n1,p\n2,q\n",
    )
    .unwrap();
    let path = CString::new(path.to_str().unwrap()).unwrap();
    let mut ds = ptr::null_mut();
    assert_eq!(
        unsafe { dmiat_dataset_load(path.as_ptr(), &mut ds) },
        DmiatStatus::Ok
    );
    assert_eq!(unsafe { dmiat_dataset_n_rows(ds) }, 2);
    unsafe { dmiat_dataset_free(ds) };
}

#[test]
fn fold_assignment() {
    let ds = parse(TOY);
    let mut folds = [99usize; 10];
    unsafe {
        assert_eq!(
            dmiat_kfold_assign(ds, 2, 7, folds.as_mut_ptr(), 10),
            DmiatStatus::Ok
        );
        assert!(folds.iter().all(|&f| f < 2));
        assert_eq!(folds.iter().filter(|&&f| f == 0).count(), 5);
        assert_eq!(
            dmiat_kfold_assign(ds, 11, 7, folds.as_mut_ptr(), 10),
            DmiatStatus::InvalidConfig
        );
        dmiat_dataset_free(ds);
    }
}

#[test]
fn cut_generation_and_use() {
    let ds = parse(TOY);
    let crit = CString::new("entropy0").unwrap();
    let mut cuts = ptr::null_mut();
    unsafe {
        assert_eq!(
            dmiat_cuts_generate(ds, ptr::null(), 0, 0.1, crit.as_ptr(), &mut cuts),
            DmiatStatus::Ok
        );
        assert_eq!(dmiat_cuts_len(cuts), 2);

        let mut info: DmiatCutInfo = std::mem::zeroed();
        assert_eq!(dmiat_cuts_get(cuts, 0, &mut info), DmiatStatus::Ok);
        assert_eq!(info.attr, 0);
        assert_eq!(info.direction, DmiatDirection::Low);
        assert_eq!(info.threshold, 3.0);
        assert_eq!(info.criterion, DmiatCriterionKind::EntropyZero);
        assert_eq!(
            (info.target_class, info.subset_size, info.subset_class_count),
            (0, 3, 3)
        );
        assert_eq!(dmiat_cuts_get(cuts, 1, &mut info), DmiatStatus::Ok);
        assert_eq!(
            (info.direction, info.threshold, info.target_class),
            (DmiatDirection::High, 4.0, 1)
        );
        assert_eq!(dmiat_cuts_get(cuts, 2, &mut info), DmiatStatus::OutOfRange);

        let mut bits = [7u8; 2];
        assert_eq!(
            dmiat_cuts_apply(cuts, ds, 0, bits.as_mut_ptr(), 2),
            DmiatStatus::Ok
        );
        assert_eq!(bits, [1, 0]);
        assert_eq!(
            dmiat_cuts_apply(cuts, ds, 9, bits.as_mut_ptr(), 2),
            DmiatStatus::Ok
        );
        assert_eq!(bits, [0, 1]);
        assert_eq!(
            dmiat_cuts_apply(cuts, ds, 10, bits.as_mut_ptr(), 2),
            DmiatStatus::OutOfRange
        );

        let mut text = ptr::null_mut();
        assert_eq!(dmiat_cuts_export(cuts, &mut text), DmiatStatus::Ok);
        let exported = CStr::from_ptr(text).to_str().unwrap().to_owned();
        dmiat_string_free(text);
        assert_eq!(
            exported,
            "0\tlow\t3\tentropy0\ta\t3\t3\n0\thigh\t4\tentropy0\tb\t7\t7\n"
        );

        let rows = [0usize, 1, 2, 3, 4];
        let mut subset = ptr::null_mut();
        assert_eq!(
            dmiat_cuts_generate(
                ds,
                rows.as_ptr(),
                rows.len(),
                0.1,
                crit.as_ptr(),
                &mut subset
            ),
            DmiatStatus::Ok
        );
        assert_eq!(dmiat_cuts_len(subset), 2);
        let bad_rows = [0usize, 42];
        let mut none = ptr::null_mut();
        assert_eq!(
            dmiat_cuts_generate(ds, bad_rows.as_ptr(), 2, 0.1, crit.as_ptr(), &mut none),
            DmiatStatus::OutOfRange
        );
        dmiat_cuts_free(subset);
        dmiat_cuts_free(cuts);
        dmiat_dataset_free(ds);
    }
}

#[test]
fn entropy_and_lift_helpers() {
    let mut out = 0.0;
    unsafe {
        assert_eq!(
            dmiat_entropy([5usize, 5].as_ptr(), 2, &mut out),
            DmiatStatus::Ok
        );
        assert!((out - 1.0).abs() < 1e-12);
        assert_eq!(
            dmiat_lift([8usize, 2].as_ptr(), [10usize, 90].as_ptr(), 2, 0, &mut out),
            DmiatStatus::Ok
        );
        assert!((out - 8.0).abs() < 1e-12);
        assert_eq!(
            dmiat_lift([0usize, 0].as_ptr(), [10usize, 90].as_ptr(), 2, 0, &mut out),
            DmiatStatus::Domain
        );
    }
}

fn header() -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/dmiat.h")).unwrap()
}

#[test]
fn header_declares_the_api() {
    let h = header();
    for name in [
        "dmiat_last_error_message",
        "dmiat_dataset_parse",
        "dmiat_dataset_load",
        "dmiat_dataset_free",
        "dmiat_dataset_labels",
        "dmiat_kfold_assign",
        "dmiat_cuts_generate",
        "dmiat_cuts_len",
        "dmiat_cuts_get",
        "dmiat_cuts_apply",
        "dmiat_cuts_export",
        "dmiat_cuts_free",
        "dmiat_string_free",
        "dmiat_entropy",
        "dmiat_lift",
        "typedef struct DmiatDataset DmiatDataset;",
        "typedef struct DmiatCuts DmiatCuts;",
        "DMIAT_STATUS_OK = 0",
        "DMIAT_STATUS_PANIC = 10",
    ] {
        assert!(h.contains(name), "header lacks {name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(out) = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-x", "c"])
        .arg(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/dmiat.h"))
        .output()
    else {
        eprintln!("no C compiler found, skipping");
        return;
    };
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include "dmiat.h"

int main(void) {
    DmiatDataset *ds = NULL;
    if (dmiat_dataset_parse("x,y\n1,a\n2,a\n3,a\n4,b\n5,b\n6,b\n", DMIAT_FORMAT_CSV, &ds) != DMIAT_STATUS_OK) {
        return 1;
    }
    DmiatCuts *cuts = NULL;
    if (dmiat_cuts_generate(ds, NULL, 0, 0.1, "entropy0,lift1.5", &cuts) != DMIAT_STATUS_OK) {
        printf("%s\n", dmiat_last_error_message());
        return 2;
    }
    DmiatCutInfo info;
    dmiat_cuts_get(cuts, 0, &info);
    printf("%zu %g\n", dmiat_cuts_len(cuts), info.threshold);
    dmiat_cuts_free(cuts);
    dmiat_dataset_free(ds);
    return dmiat_dataset_parse(NULL, DMIAT_FORMAT_CSV, &ds) == DMIAT_STATUS_NULL_ARGUMENT ? 0 : 3;
}
"#;

#[test]
fn c_program_links_against_static_library() {
    // Integration tests run from target/<profile>/deps; the static library sits one level up.
    let exe = std::env::current_exe().unwrap();
    let lib_dir = exe.parent().and_then(Path::parent).unwrap();
    if !lib_dir.join("libdmiat_ffi.a").exists() {
        eprintln!("static library not built, skipping");
        return;
    }
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("main.c");
    let bin = tmp.path().join("main");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let Ok(out) = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(Path::new(env!("CARGO_MANIFEST_DIR")).join("include"))
        .arg(lib_dir.join("libdmiat_ffi.a"))
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
    else {
        eprintln!("no C compiler found, skipping");
        return;
    };
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status);
    assert_eq!(String::from_utf8_lossy(&run.stdout), "4 3\n");
}
