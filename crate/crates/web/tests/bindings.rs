use credhier_web::{analyze_csv_json, analyze_toy_json, question_counts_json, rankograms_toy_json};
use serde_json::Value;

fn parse(s: Result<String, String>) -> Value {
    serde_json::from_str(&s.unwrap()).unwrap()
}

#[test]
fn toy_catalog_matches_core() {
    let doc = parse(analyze_toy_json(1000, 3, 0.8, 0.0, true));
    let entries = doc["entries"].as_array().unwrap();
    let rps: Vec<&Value> = entries.iter().filter(|e| e["kind"] == "ranked_permutation").collect();
    assert_eq!(rps.len(), 1);
    assert_eq!(rps[0]["display"], "(A, B)_1^2");
    assert!(entries.iter().any(|e| e["redundant"] == true));
    assert!(doc["manifest"].get("timings").is_none());

    let untrimmed = parse(analyze_toy_json(1000, 3, 0.8, 0.0, false));
    assert_eq!(untrimmed["entries"].as_array().unwrap().len(), entries.len());
}

#[test]
fn rankograms_carry_hdrs() {
    let doc = parse(rankograms_toy_json(1000, 3, 0.8));
    let rows = doc.as_array().unwrap();
    assert_eq!(rows.len(), 5);
    for r in rows {
        let total: u64 = r["counts"].as_array().unwrap().iter().map(|c| c.as_u64().unwrap()).sum();
        assert_eq!(total, 1000);
        assert!(r["hdr_pi_hat"].as_f64().unwrap() >= 0.8 - 1e-12);
    }
}

#[test]
fn counts_grow_and_stay_exact() {
    let doc = parse(question_counts_json(30));
    let rows = doc.as_array().unwrap();
    assert_eq!(rows.len(), 29);
    assert_eq!(rows[3]["n"], 5);
    assert_eq!(rows[3]["total"], "1005");
    assert_eq!(rows[7]["total"], "2501295");
    let logs: Vec<f64> = rows.iter().map(|r| r["log10_total"].as_f64().unwrap()).collect();
    assert!(logs.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn pasted_csv() {
    let text = "X,Y,Z\n0.1,0.5,0.9\n0.2,0.4,0.8\n0.15,0.6,0.7\n";
    let doc = parse(analyze_csv_json(text, 0.9, 0.0, false, true));
    assert_eq!(doc["manifest"]["labels"], serde_json::json!(["X", "Y", "Z"]));
    let higher = parse(analyze_csv_json(text, 0.9, 0.0, true, true));
    assert!(higher["entries"].as_array().unwrap().iter().any(|e| e["display"] == "(Z, Y)_1^2"));
}

#[test]
fn bad_input_is_an_error_not_a_panic() {
    assert!(analyze_toy_json(0, 1, 0.8, 0.0, true).is_err());
    assert!(analyze_toy_json(1000, 1, 1.5, 0.0, true).is_err());
    assert!(analyze_toy_json(1000, 1, 0.8, -0.1, true).is_err());
    assert!(analyze_csv_json("A,B\n1,x\n", 0.8, 0.0, false, true).is_err());
    assert!(analyze_csv_json("", 0.8, 0.0, false, true).is_err());
    assert!(rankograms_toy_json(100_000, 1, 0.8).is_err());
}
