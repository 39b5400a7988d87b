use std::ffi::{CStr, CString};
use std::ptr;

use ksc_ffi::*;

fn last_error() -> String {
    let p = ksc_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn blobs(n: usize) -> (Vec<f64>, Vec<i64>) {
    let centers = [(0.0, 0.0), (5.0, 0.0), (0.0, 5.0)];
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for i in 0..n {
        let (x, y) = centers[i % 3];
        values.push(x + ((i as f64 * 0.618).fract() - 0.5) * 0.8);
        values.push(y + ((i as f64 * 0.414).fract() - 0.5) * 0.8);
        labels.push((i % 3) as i64);
    }
    (values, labels)
}

#[test]
fn train_predict_save_load() {
    let (values, labels) = blobs(300);
    unsafe {
        let mut ds = ptr::null_mut();
        assert_eq!(
            ksc_dataset_new(values.as_ptr(), 300, 2, labels.as_ptr(), &mut ds),
            KscStatus::Ok
        );
        assert_eq!((ksc_dataset_len(ds), ksc_dataset_dim(ds)), (300, 2));

        let mut opts = std::mem::zeroed::<KscTrainOptions>();
        ksc_train_options_default(&mut opts);
        opts.k_clusters = 3;
        opts.param = 1.0;
        let mut model = ptr::null_mut();
        assert_eq!(ksc_train(ds, &opts, &mut model), KscStatus::Ok);
        assert!(ksc_model_rank(model) > 0);
        assert_eq!(ksc_model_clusters(model), 3);

        let mut pred = vec![0usize; 300];
        assert_eq!(
            ksc_model_predict(model, ds, pred.as_mut_ptr(), pred.len()),
            KscStatus::Ok
        );
        let pred: Vec<i64> = pred.iter().map(|&p| p as i64).collect();
        let mut ari = 0.0;
        assert_eq!(
            ksc_adjusted_rand_index(labels.as_ptr(), pred.as_ptr(), 300, &mut ari),
            KscStatus::Ok
        );
        assert_eq!(ari, 1.0);

        let dir = tempfile::tempdir().unwrap();
        let path = CString::new(dir.path().join("m.ksc").to_str().unwrap()).unwrap();
        assert_eq!(ksc_model_save(model, path.as_ptr()), KscStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(ksc_model_load(path.as_ptr(), &mut back), KscStatus::Ok);
        let mut a = vec![0.0; 600];
        let mut b = vec![0.0; 600];
        assert_eq!(
            ksc_model_scores(model, ds, a.as_mut_ptr(), a.len()),
            KscStatus::Ok
        );
        assert_eq!(
            ksc_model_scores(back, ds, b.as_mut_ptr(), b.len()),
            KscStatus::Ok
        );
        assert_eq!(a, b);

        ksc_model_free(back);
        ksc_model_free(model);
        ksc_dataset_free(ds);
    }
}

#[test]
fn errors_set_status_and_message() {
    unsafe {
        let mut ds = ptr::null_mut();
        assert_eq!(
            ksc_dataset_new(ptr::null(), 3, 2, ptr::null(), &mut ds),
            KscStatus::NullPointer
        );
        assert!(ds.is_null());
        assert!(last_error().contains("values"));

        let v = [1.0, 2.0, f64::NAN, 4.0];
        assert_eq!(
            ksc_dataset_new(v.as_ptr(), 2, 2, ptr::null(), &mut ds),
            KscStatus::Numerical
        );

        let missing = CString::new("/nonexistent/ksc/model").unwrap();
        let mut m = ptr::null_mut();
        assert_eq!(ksc_model_load(missing.as_ptr(), &mut m), KscStatus::Io);
        assert!(last_error().starts_with("io:"));

        let (values, _) = blobs(30);
        assert_eq!(
            ksc_dataset_new(values.as_ptr(), 30, 2, ptr::null(), &mut ds),
            KscStatus::Ok
        );
        let mut opts = std::mem::zeroed::<KscTrainOptions>();
        ksc_train_options_default(&mut opts);
        opts.n_tr = 31;
        assert_eq!(ksc_train(ds, &opts, &mut m), KscStatus::InvalidArgument);
        assert!(m.is_null());

        // a successful call clears the message
        assert_eq!(ksc_train(ds, ptr::null(), &mut m), KscStatus::Ok);
        assert!(ksc_last_error().is_null());

        let mut small = [0usize; 5];
        assert_eq!(
            ksc_model_predict(m, ds, small.as_mut_ptr(), small.len()),
            KscStatus::InvalidArgument
        );

        let wide = [0.0; 9];
        let mut ds3 = ptr::null_mut();
        assert_eq!(
            ksc_dataset_new(wide.as_ptr(), 3, 3, ptr::null(), &mut ds3),
            KscStatus::Ok
        );
        let mut out = [0usize; 3];
        assert_eq!(
            ksc_model_predict(m, ds3, out.as_mut_ptr(), 3),
            KscStatus::Dimension
        );

        ksc_model_free(m);
        ksc_dataset_free(ds);
        ksc_dataset_free(ds3);
        ksc_dataset_free(ptr::null_mut());
        ksc_model_free(ptr::null_mut());
    }
}

#[test]
fn spirals_and_version() {
    unsafe {
        let mut ds = ptr::null_mut();
        assert_eq!(ksc_dataset_two_spirals(200, 0.0, 1, &mut ds), KscStatus::Ok);
        let mut labels = vec![0i64; 200];
        assert_eq!(
            ksc_dataset_labels(ds, labels.as_mut_ptr(), 200),
            KscStatus::Ok
        );
        assert_eq!(labels.iter().filter(|&&l| l == 1).count(), 100);
        ksc_dataset_free(ds);
        assert_eq!(
            CStr::from_ptr(ksc_version()).to_str().unwrap(),
            env!("CARGO_PKG_VERSION")
        );
    }
}
