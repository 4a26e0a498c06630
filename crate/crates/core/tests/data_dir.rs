//! The data-directory override is process-wide, so it lives in its own
//! test binary.

use hitgate::hitfilter::{Criterion, HitFilter};
use hitgate::patterns::AlertCatalog;
use hitgate::smiles::parse_smiles;

#[test]
fn data_dir_overrides_alert_catalog() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("alerts.tsv"),
        "CCO\t42\tethanol_probe\tprobe alert\n",
    )
    .unwrap();
    std::env::set_var("HITGATE_DATA_DIR", dir.path());
    let catalog = AlertCatalog::load_default().unwrap();
    assert_eq!(catalog.len(), 1);
    let mut filter = HitFilter::with_defaults();
    filter.catalog = &catalog;
    let o = filter.apply("m", &parse_smiles("CCOc1ccccc1").unwrap(), None);
    assert_eq!(o.record(Criterion::Sev).value, Some(42.0));
    assert!(!o.record(Criterion::Sev).pass);

    std::fs::write(dir.path().join("alerts.tsv"), "C(\t1\tbroken\n").unwrap();
    assert!(AlertCatalog::load_default().is_err());
    std::env::remove_var("HITGATE_DATA_DIR");
}
