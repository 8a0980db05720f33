use serde_json::Value;
use sumstate_wasm::{oracle_json, rouge_json, spans_json};

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn rouge_identity_and_disjoint() {
    let v = parse(&rouge_json("the cat sat\non the mat", "the cat sat\non the mat"));
    for k in ["r1", "r2", "rl"] {
        assert_eq!(v[k]["f1"], 1.0);
    }
    let v = parse(&rouge_json("a b c", "x y z"));
    assert_eq!(v["r1"]["f1"], 0.0);
    let v = parse(&rouge_json("", "x y z"));
    assert_eq!(v["rl"]["f1"], 0.0);
}

#[test]
fn compressive_oracle_deletes_the_aside() {
    let text = "the mayor ( a former judge ) praised crews\nmarkets were calm";
    let v = parse(&oracle_json(text, "the mayor praised crews", "compressive", 0, 3).unwrap());
    assert_eq!(v["score"], 1.0);
    assert_eq!(v["summary"], "the mayor praised crews");
    assert_eq!(v["sentences"][0]["selected"], true);
    assert_eq!(v["sentences"][1]["selected"], false);
    assert_eq!(v["scores"]["r1"]["f1"], 1.0);
}

#[test]
fn extractive_and_bow_objectives() {
    let text = "storms hit the coast\nthe mayor praised crews";
    let v = parse(&oracle_json(text, "the mayor praised crews", "extractive", 32, 2).unwrap());
    assert_eq!(v["summary"], "the mayor praised crews");
    let v = parse(&oracle_json(text, "the mayor praised crews", "bow", 32, 2).unwrap());
    let kept: Vec<bool> = v["sentences"][0]["tokens"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t["kept"].as_bool().unwrap())
        .collect();
    assert_eq!(kept, [false, false, true, false]);
}

#[test]
fn bad_requests_are_errors() {
    assert!(oracle_json("a b", "a", "lead", 1, 1).is_err());
    assert!(oracle_json("", "a", "extractive", 1, 1).is_err());
    assert!(oracle_json("a b", "  ", "extractive", 1, 1).is_err());
    assert!(oracle_json("a b", "a", "extractive", 1, 0).is_err());
}

#[test]
fn spans_mark_deletable_tokens() {
    let v = parse(&spans_json("he said ( quietly ) no\nplain sentence"));
    assert_eq!(v[0]["spans"], serde_json::json!([[2, 5]]));
    let kept: Vec<bool> = v[0]["tokens"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t["kept"].as_bool().unwrap())
        .collect();
    assert_eq!(kept, [true, true, false, false, false, true]);
    assert_eq!(v[1]["spans"], serde_json::json!([]));
    assert_eq!(spans_json("\n\n"), "[]");
}
