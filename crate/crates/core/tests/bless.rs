//! Regenerates the checked-in fixtures. Ignored by default:
//!
//! ```text
//! cargo test -p jsonoracle --test bless -- --ignored
//! ```
//!
//! Every generator here asserts the property the fixture exists for, so a
//! drifting backend fails the bless instead of silently rewriting a golden.

mod common;

use std::collections::HashMap;
use std::fs;
use std::sync::{Arc, Mutex};

use jsonoracle::backends::{execute, resolve_backend, ExecutionLimits, TestOutcome};
use jsonoracle::classify::{
    build_classify_prompt, CaseLine, Category, ClassifyParams, FailedCase, Mode,
};
use jsonoracle::corpus::load_corpus;
use jsonoracle::llm::{
    build_context, pick_rule, render_transcript, ChatRequest, MutationMode, MutationRule,
    RecordingClient, Scenario, ScenarioEntry,
};
use jsonoracle::pipeline::{run, PipelineConfig};
use jsonoracle::tdsl::parse_script;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{fenced, fixture, read_fixture};

fn summary_for(seed_id: &str) -> &'static str {
    match seed_id {
        "Issue1204" => "The test serializes a decimal just above the 64-bit range, checks the text, and parses it back with UseBigDecimalForFloats, comparing against the stripped original.",
        "Issue1874" => "The test builds a bean with a boolean field and serializes it with WriteBooleanAsNumber, expecting the boolean to be written as 1.",
        "Issue1965" => "The test parses an object holding a one-element array and checks that JSONPath evaluation of `$.data[0]` is not null on both the object and its serialized text.",
        other => panic!("no summary for {other}"),
    }
}

/// Replies per seed, in replicate order.
fn responses_for(seed_id: &str) -> [&'static str; 3] {
    match seed_id {
        "Issue1204" => [
            "issue1204_typed_scale.t",
            "issue1204_typed_overflow.t",
            "issue1204_wrong_expectation.t",
        ],
        "Issue1874" => [
            "issue1874_bool_as_number.t",
            "issue1874_nonstring_as_string.t",
            "issue1874_write_nulls.t",
        ],
        "Issue1965" => [
            "issue1965_path_scalar_index.t",
            "issue1965_path_member.t",
            "issue1965_getters.t",
        ],
        other => panic!("no responses for {other}"),
    }
}

fn seed_of(req: &ChatRequest, seeds: &[(String, String)]) -> String {
    let first_user = &req.messages[1].content;
    seeds
        .iter()
        .find(|(_, text)| first_user.contains(text.as_str()))
        .map(|(id, _)| id.clone())
        .expect("request names a known seed")
}

#[test]
#[ignore]
fn bless_pipeline_replay() {
    let cfg_path = fixture("pipeline/config.json");
    let mut config = PipelineConfig::load(&cfg_path).unwrap();
    config.llm.mock_scenario = None;
    let corpus = load_corpus(&fixture("pipeline/manifest.json")).unwrap();
    let seeds: Vec<(String, String)> = corpus
        .seeds
        .iter()
        .map(|s| (s.id.clone(), s.script_text.clone()))
        .collect();
    let cursor: Arc<Mutex<HashMap<String, usize>>> = Arc::default();
    let client = RecordingClient::new(move |req| {
        let id = seed_of(req, &seeds);
        if req.messages.len() == 2 {
            return summary_for(&id).to_string();
        }
        let mut c = cursor.lock().unwrap();
        let n = c.entry(id.clone()).or_default();
        let file = responses_for(&id)[*n];
        *n += 1;
        fenced(&read_fixture(&format!("pipeline/responses/{file}")))
    });
    let out = run(&config, &corpus, &client).unwrap();
    assert_eq!(out.report.bugs.len(), 3);
    client
        .scenario()
        .save(&fixture("pipeline/replay.json"))
        .unwrap();
}

/// Criterion-5 scenario: three seeds of three replicates each, eight valid
/// scripts (two of them failing an assertion) and one prose reply. The
/// scripted list interleaves the per-seed summaries.
#[test]
#[ignore]
fn bless_taxonomy_scripted() {
    let corpus = load_corpus(&fixture("pipeline/manifest.json")).unwrap();
    let generated = [
        fenced(&read_fixture("pipeline/responses/issue1204_typed_scale.t")),
        fenced(&read_fixture("pipeline/responses/issue1204_wrong_expectation.t")),
        fenced(&read_fixture("pipeline/responses/issue1204_typed_overflow.t")),
        fenced(&read_fixture("pipeline/responses/issue1874_bool_as_number.t")),
        "A good follow-up would serialize the bean with WriteNonStringValueAsString and check that the boolean is quoted.".to_string(),
        fenced(&read_fixture("pipeline/responses/issue1874_write_nulls.t")),
        fenced(&read_fixture("classify/cases/f_bad_01.t")),
        fenced(&read_fixture("pipeline/responses/issue1965_path_member.t")),
        fenced(&read_fixture("pipeline/responses/issue1965_getters.t")),
    ];
    let mut responses = Vec::new();
    for (i, seed) in corpus.seeds.iter().enumerate() {
        responses.push(summary_for(&seed.id).to_string());
        responses.extend(generated[i * 3..i * 3 + 3].iter().cloned());
    }
    Scenario::Scripted { responses }
        .save(&fixture("pipeline/taxonomy/scripted.json"))
        .unwrap();
}

#[test]
#[ignore]
fn bless_prompt_goldens() {
    let corpus = load_corpus(&fixture("pipeline/manifest.json")).unwrap();
    let seed = corpus.get("Issue1874").unwrap();
    let summary = summary_for("Issue1874");
    let dir = fixture("goldens");
    fs::create_dir_all(&dir).unwrap();
    fs::write(
        dir.join("context_plain.txt"),
        render_transcript(&build_context(seed, summary, None)),
    )
    .unwrap();
    for rule in MutationRule::ALL {
        let path = dir.join(format!("context_{}.txt", rule.as_str()));
        fs::write(
            path,
            render_transcript(&build_context(seed, summary, Some(rule))),
        )
        .unwrap();
    }
    let case = golden_case();
    fs::write(
        dir.join("classify_fs.txt"),
        render_transcript(&build_classify_prompt(&case, Mode::Fs)),
    )
    .unwrap();
    fs::write(
        dir.join("classify_fs_cot.txt"),
        render_transcript(&build_classify_prompt(&case, Mode::FsCot)),
    )
    .unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let rules: Vec<&str> = (0..20)
        .map(|_| {
            pick_rule(&mut rng, MutationMode::RandomOne)
                .unwrap()
                .as_str()
        })
        .collect();
    fs::write(
        dir.join("pick_rule_seed42.json"),
        serde_json::to_string_pretty(&rules).unwrap() + "\n",
    )
    .unwrap();
}

/// An object of one member asserted to be empty.
pub fn golden_case() -> FailedCase {
    let text = read_fixture("classify/cases/f_bad_01.t");
    let script = parse_script(&text).unwrap();
    let b = resolve_backend("reference").unwrap();
    let outcome = execute(&script, b.as_ref(), ExecutionLimits::default());
    FailedCase {
        id: "f_bad_01".into(),
        script,
        script_text: text,
        outcome,
        backend: "reference".into(),
        category: Category::FBad,
    }
}

struct CaseSpec {
    id: String,
    category: Category,
    backend: &'static str,
    script: String,
}

fn q(s: &str) -> String {
    format!("{s:?}")
}

fn case_specs() -> Vec<CaseSpec> {
    let mut out = Vec::new();
    let mut push = |category: Category, backend: &'static str, script: String| {
        let prefix = match category {
            Category::EBad => "e_bad",
            Category::EGood => "e_good",
            Category::FBad => "f_bad",
            Category::FGood => "f_good",
            Category::Unknown => unreachable!(),
        };
        let n = out
            .iter()
            .filter(|c: &&CaseSpec| c.category == category)
            .count()
            + 1;
        out.push(CaseSpec {
            id: format!("{prefix}_{n:02}"),
            category,
            backend,
            script,
        });
    };

    let e_bad = [
        format!("let o = parse({});\nassert_eq(get(o, \"a\", integer), 1);\n", q("{'a': 1}")),
        format!("let o = parse({}, [TrimString]);\nassert_eq(get(o, \"name\", string), \"x\");\n", q("{'name': ' x '}")),
        format!("let o = parse({});\nassert_eq(get(o, \"a\", integer), 1);\n", q(r#"{"a": 1,}"#)),
        format!("let arr = parse({});\nassert_eq(get(arr, \"a\", integer), 1);\n", q("[1, 2]")),
        format!("let o = parse({});\nassert_eq(get(o, \"b\", integer), 1);\n", q(r#"{"a": 1}"#)),
        format!("let o = parse({});\nassert_eq(path(o, \"$..a\"), 1);\n", q(r#"{"a": 1}"#)),
        format!("bean Item {{ id: integer }}\nlet item = parse_typed({}, Item);\nassert_eq(get(item, \"id\", integer), 1);\n", q("[1, 2]")),
        format!("let o = parse({});\nassert_eq(size(get(o, \"a\", value)), 0);\n", q(r#"{"a": null}"#)),
        format!("let o = parse({});\nassert_eq(size(get(o, \"data\", object)), 1);\n", q(r#"{"data": [1]}"#)),
        format!("let o = parse({});\nlet flag = get(o, \"flag\", boolean);\nassert_eq(flag, true);\n", q(r#"{"flag": "yes"}"#)),
    ];
    for s in e_bad {
        push(Category::EBad, "reference", s);
    }

    let fields = ["flag", "ok", "enabled", "visible", "active"];
    for (i, f) in fields.iter().enumerate() {
        for v in [true, false] {
            let bean = format!("Bean{}", i + 1);
            push(
                Category::EGood,
                "planted:L2",
                format!(
                    "bean {bean} {{ {f}: boolean }}\nlet bean = new {bean} {{ {f}: {v} }};\nlet json = serialize(bean, [WriteNonStringValueAsString]);\nlet o = parse(json);\nlet inner = parse(get(o, \"{f}\", value));\nassert_eq(inner, {v});\n"
                ),
            );
        }
    }

    let f_bad = [
        format!("let arr = parse({});\nlet o = get(arr, 0, object);\nassert_not_null(o);\nassert_eq(size(o), 0);\n", q(r#"[{"name":"mask"}]"#)),
        format!("let o = parse({});\nassert_eq(serialize(o), {});\n", q(r#"{"a": 1.50}"#), q(r#"{"a":1.5}"#)),
        format!("let o = parse({});\nassert_eq(get(o, \"a\", integer), 1.0d);\n", q(r#"{"a": 1}"#)),
        format!("bean Bean {{ b: boolean }}\nlet bean = new Bean {{ b: true }};\nassert_eq(serialize(bean, [WriteBooleanAsNumber]), {});\n", q(r#"{"b":true}"#)),
        format!("let o = parse({});\nassert_null(get(o, \"a\", value));\n", q(r#"{"a": 0}"#)),
        "let d = 1.500d;\nassert_eq(strip_zeros(d), 1.50d);\n".to_string(),
        format!("let o = parse({});\nassert_eq(size(o), 3);\n", q(r#"{"a": 1, "b": 2}"#)),
        format!("let o = parse({}, [TrimString]);\nassert_eq(get(o, \"s\", string), \" x \");\n", q(r#"{"s": " x "}"#)),
        format!("assert_eq(is_valid({}), true);\n", q("{'a': 1}")),
        format!("let o = parse({});\nassert_eq(path(o, \"$.data[1]\"), 1);\n", q(r#"{"data": [1, 2]}"#)),
        format!("let o = parse({});\nassert_eq(serialize(o, [WriteNulls]), {});\n", q(r#"{"a": null}"#), q(r#"{"a":"null"}"#)),
    ];
    for s in f_bad {
        push(Category::FBad, "reference", s);
    }

    for (key, elem) in [
        ("data", "1"),
        ("items", "2"),
        ("flags", "true"),
        ("names", "\"x\""),
    ] {
        let doc = format!("{{\"{key}\": [{elem}]}}");
        push(
            Category::FGood,
            "planted:L1",
            format!(
                "let obj = parse({});\nlet str = serialize(obj);\nassert_eq(path(str, \"$.{key}[0][0]\"), path(obj, \"$.{key}[0][0]\"));\n",
                q(&doc)
            ),
        );
    }
    for (bean, f, v) in [
        ("Bean", "b", true),
        ("Flags", "flag", true),
        ("Opt", "ok", false),
        ("Toggle", "on", false),
    ] {
        let want = format!("{{\"{f}\":\"{v}\"}}");
        push(
            Category::FGood,
            "planted:L2",
            format!(
                "bean {bean} {{ {f}: boolean }}\nlet bean = new {bean} {{ {f}: {v} }};\nlet json = serialize(bean, [WriteNonStringValueAsString]);\nassert_eq(json, {});\n",
                q(&want)
            ),
        );
    }
    for (bean, f, lit) in [
        ("Holder", "value", "9223372036854775808"),
        ("Price", "amount", "9223372036854775809"),
        ("Wrapper", "big", "18446744073709551616"),
        ("Total", "sum", "9223372036854775811"),
    ] {
        let doc = format!("{{\"{f}\": {lit}}}");
        push(
            Category::FGood,
            "planted:L3",
            format!(
                "bean {bean} {{ {f}: decimal }}\nlet dec = {lit}d;\nlet h = parse_typed({}, {bean});\nassert_eq(get(h, \"{f}\", decimal), strip_zeros(dec));\n",
                q(&doc)
            ),
        );
    }
    out
}

/// Six-vote patterns. G and B are parseable votes, U is unparseable and
/// `L` is a reply whose earlier sentence says good but whose last says bad.
const TO_GOOD: &[&str] = &["GGGGGG", "GGGGBB", "GGGBBU", "GUUUUU", "GGBUUU"];
const TO_BAD: &[&str] = &["BBBBBB", "GGGBBB", "UUUUUU", "BBBGGU", "GGGLLL", "GBBUUU"];

/// Correct labels per category; the rest get the opposite label.
fn planned_correct(mode: Mode, c: Category) -> usize {
    match (mode, c) {
        (Mode::Fs, Category::EBad) => 7,
        (Mode::Fs, Category::EGood) => 4,
        (Mode::Fs, Category::FBad) => 10,
        (Mode::Fs, Category::FGood) => 10,
        (Mode::FsCot, Category::EBad) => 5,
        (Mode::FsCot, Category::EGood) => 5,
        (Mode::FsCot, Category::FBad) => 10,
        (Mode::FsCot, Category::FGood) => 10,
        _ => unreachable!(),
    }
}

fn reply(mode: Mode, vote: char, k: usize) -> String {
    let reason = match mode {
        Mode::Fs => String::new(),
        Mode::FsCot => {
            "The failing statement compares the library output with the value the test expects. "
                .to_string()
        }
    };
    match vote {
        'G' => format!("{reason}The code logic is correct. Therefore, this test is a good test."),
        'B' => format!("{reason}The code logic is incorrect. Therefore, this test is a bad test."),
        'L' => format!("{reason}At first glance this looks like a good test. On reflection, this test is a bad test."),
        'U' => match k % 3 {
            0 => format!("{reason}I cannot tell whether this is a good test or a bad test."),
            1 => format!("{reason}More context about the intended behaviour is needed."),
            _ => String::new(),
        },
        _ => unreachable!(),
    }
}

#[test]
#[ignore]
fn bless_classify_cases() {
    let dir = fixture("classify/cases");
    fs::create_dir_all(&dir).unwrap();
    let reference = resolve_backend("reference").unwrap();
    let mut lines = String::new();
    let mut cases = Vec::new();
    for spec in case_specs() {
        let script = parse_script(&spec.script)
            .unwrap_or_else(|e| panic!("{}: {e}\n{}", spec.id, spec.script));
        let b = resolve_backend(spec.backend).unwrap();
        let outcome = execute(&script, b.as_ref(), ExecutionLimits::default());
        let on_reference = execute(&script, reference.as_ref(), ExecutionLimits::default());
        let want_error = matches!(spec.category, Category::EBad | Category::EGood);
        match (&outcome, want_error) {
            (TestOutcome::Error { .. }, true) | (TestOutcome::Fail { .. }, false) => {}
            _ => panic!("{} on {}: {outcome:?}", spec.id, spec.backend),
        }
        if spec.category.expected() == Some(jsonoracle::classify::Label::Good) {
            assert!(
                on_reference.is_pass(),
                "{} should pass on the reference: {on_reference:?}",
                spec.id
            );
        }
        let file = format!("cases/{}.t", spec.id);
        fs::write(fixture(&format!("classify/{file}")), &spec.script).unwrap();
        let line = CaseLine {
            script_path: file,
            outcome: outcome.clone(),
            category: spec.category,
            backend: spec.backend.to_string(),
        };
        lines.push_str(&serde_json::to_string(&line).unwrap());
        lines.push('\n');
        cases.push(FailedCase {
            id: spec.id,
            script,
            script_text: spec.script,
            outcome,
            backend: spec.backend.to_string(),
            category: spec.category,
        });
    }
    fs::write(fixture("classify/cases.jsonl"), lines).unwrap();

    let params = ClassifyParams::default();
    for (mode, file) in [
        (Mode::Fs, "classify/replay_fs.json"),
        (Mode::FsCot, "classify/replay_fs_cot.json"),
    ] {
        let mut entries = Vec::new();
        let mut seen: HashMap<Category, usize> = HashMap::new();
        for case in &cases {
            let i = seen.entry(case.category).or_default();
            let correct = *i < planned_correct(mode, case.category);
            let to_good =
                (case.category.expected() == Some(jsonoracle::classify::Label::Good)) == correct;
            let pool = if to_good { TO_GOOD } else { TO_BAD };
            let pattern = pool[*i % pool.len()];
            *i += 1;
            let req = ChatRequest {
                model: params.model.clone(),
                messages: build_classify_prompt(case, mode),
                temperature: params.temperature,
                top_p: params.top_p,
            };
            entries.push(ScenarioEntry {
                request_hash: req.hash(),
                responses: pattern
                    .chars()
                    .enumerate()
                    .map(|(k, v)| reply(mode, v, k))
                    .collect(),
                label: Some(format!("{} {pattern}", case.id)),
            });
        }
        Scenario::Replay { entries }.save(&fixture(file)).unwrap();
    }
}
