use cloudview::formats::{
    instance_json, load_catalog, load_instance, load_selection, CatalogDoc, CatalogRef, InstanceDoc, SelectionDoc,
};
use cloudview_core::{catalogs, evaluate, generate_instance, greedy_assignment, GenConfig};

#[test]
fn catalog_round_trip_keeps_costs() {
    let probes = [0.0, 1.0, 4.999, 5.0, 10.0, 1023.9, 1024.0, 5000.0, 10240.0, 51200.0, 153600.0, 1e6];
    for c in catalogs::all() {
        let text = serde_json::to_string_pretty(&CatalogDoc::from_catalog(&c)).unwrap();
        let back = load_catalog(&text).unwrap();
        for x in probes {
            assert_eq!(c.transfer_out().eval(x), back.transfer_out().eval(x), "{} transfer {x}", c.name());
            assert_eq!(c.storage().price.eval(x), back.storage().price.eval(x), "{} storage {x}", c.name());
        }
    }
}

#[test]
fn catalog_file_relative_to_instance() {
    let dir = tempfile::tempdir().unwrap();
    let mut cat = CatalogDoc::from_catalog(&catalogs::azure());
    cat.name = "my-azure".into();
    std::fs::write(dir.path().join("cat.json"), serde_json::to_string(&cat).unwrap()).unwrap();

    let inst = generate_instance(&GenConfig::new(4, 3, 9)).unwrap();
    let mut doc = InstanceDoc::from_instance(&inst);
    doc.catalog = CatalogRef::Named("cat.json".into());
    doc.fleet.instance_type = "small".into();
    let path = dir.path().join("inst.json");
    std::fs::write(&path, serde_json::to_string(&doc).unwrap()).unwrap();

    let loaded = load_instance(&format!("@{}", path.display())).unwrap();
    assert_eq!(loaded.catalog().name(), "my-azure");
    assert_eq!(loaded.queries(), inst.queries());
}

#[test]
fn selection_round_trip() {
    let inst = generate_instance(&GenConfig::new(8, 6, 4)).unwrap();
    let sel = greedy_assignment(&inst, &[true, false, true, true, false, true]);
    let text = serde_json::to_string(&SelectionDoc::from_selection(&inst, &sel)).unwrap();
    let back = load_selection(&text, &inst).unwrap();
    assert_eq!(back, sel);
    assert_eq!(evaluate(&inst, &back).unwrap(), evaluate(&inst, &sel).unwrap());
}

#[test]
fn instance_json_is_stable() {
    let inst = generate_instance(&GenConfig::new(5, 5, 42)).unwrap();
    let text = instance_json(&inst);
    assert_eq!(text, instance_json(&load_instance(&text).unwrap()));
}

#[test]
fn malformed_documents() {
    assert!(load_instance(r#"{"catalog": "ec2-s3"}"#).is_err());
    assert!(load_instance("/definitely/not/here.json").is_err());
    let inst = generate_instance(&GenConfig::new(3, 3, 1)).unwrap();
    assert!(load_selection(r#"{"materialized": ["v1"], "extra": 1}"#, &inst).is_err());
    let negative = instance_json(&inst).replacen("\"dataset_gb\": 500.0", "\"dataset_gb\": -1.0", 1);
    assert!(load_instance(&negative).is_err());
}
