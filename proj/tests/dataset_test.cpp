#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include <json.hpp>

#include "relex/dataset.hpp"
#include "relex/error.hpp"
#include "test_support.hpp"

using namespace relex;
using relex::testing::data_dir;
using relex::testing::make_instance;
using relex::testing::TempDir;

TEST(DatasetNames, CanonicalSpellings) {
    EXPECT_EQ(canonical_dataset_name("semeval"), "SemEVAL");
    EXPECT_EQ(canonical_dataset_name("SemEval"), "SemEVAL");
    EXPECT_EQ(canonical_dataset_name("re_tacred"), "Re-TACRED");
    EXPECT_EQ(canonical_dataset_name("retacred"), "Re-TACRED");
    EXPECT_EQ(canonical_dataset_name("tacrev"), "TACREV");
    EXPECT_EQ(canonical_dataset_name("my-corpus"), "my-corpus");
    EXPECT_TRUE(is_semeval("SEMEVAL"));
    EXPECT_TRUE(is_tacred_family("Re-TACRED"));
    EXPECT_FALSE(is_tacred_family("SemEVAL"));
    EXPECT_EQ(negative_label_for("SemEVAL"), "Other");
    EXPECT_EQ(negative_label_for("TACRED"), "no_relation");
    EXPECT_TRUE(is_directional("SemEVAL"));
    EXPECT_FALSE(is_directional("TACREV"));
}

TEST(DatasetNames, PublishedCounts) {
    const auto tacred = expected_counts("TACRED").value();
    EXPECT_EQ(tacred.train, 68124u);
    EXPECT_EQ(tacred.test, 15509u);
    EXPECT_EQ(tacred.prompt, 22631u);
    EXPECT_EQ(tacred.relations, 42u);
    const auto tacrev = expected_counts("TACREV").value();
    EXPECT_EQ(tacrev.train, 68124u);
    EXPECT_EQ(tacrev.test, 15509u);
    EXPECT_EQ(tacrev.relations, 42u);
    const auto re = expected_counts("Re-TACRED").value();
    EXPECT_EQ(re.train, 58465u);
    EXPECT_EQ(re.test, 13418u);
    EXPECT_EQ(re.prompt, 19584u);
    EXPECT_EQ(re.relations, 40u);
    const auto sem = expected_counts("SemEVAL").value();
    EXPECT_EQ(sem.train, 8000u);
    EXPECT_EQ(sem.test, 2717u);
    EXPECT_EQ(sem.relations, 19u);
    EXPECT_FALSE(expected_counts("custom").has_value());
}

TEST(DatasetNames, ReferenceLabelSetsMatchPublishedCounts) {
    for (const char* name : {"TACRED", "TACREV", "Re-TACRED", "SemEVAL"}) {
        const auto schema = reference_schema(name);
        EXPECT_EQ(schema.labels.size(), expected_counts(name)->relations) << name;
        EXPECT_TRUE(std::is_sorted(schema.labels.begin(), schema.labels.end())) << name;
        EXPECT_EQ(std::adjacent_find(schema.labels.begin(), schema.labels.end()), schema.labels.end()) << name;
        EXPECT_TRUE(schema.contains(schema.negative_label)) << name;
    }
    const auto sem = reference_schema("SemEVAL");
    EXPECT_TRUE(sem.contains("Entity-Origin(e1,e2)"));
    EXPECT_TRUE(sem.contains("Entity-Origin(e2,e1)"));
    EXPECT_TRUE(reference_schema("TACRED").contains("org:founded"));
    EXPECT_TRUE(reference_labels("custom").empty());
}

// ---------------------------------------------------------------------------
// SemEval

TEST(SemEval, FixtureSpansAreHalfOpenTokenIntervals) {
    const auto instances = load_semeval(data_dir() / "semeval_sample.txt", Split::train);
    ASSERT_EQ(instances.size(), 3u);
    const auto& first = instances[0];
    EXPECT_EQ(first.id, "1");
    // The quick brown <e1>fox jumped</e1> over the very lazy <e2>dog</e2> today.
    //  0    1     2      3    4           5    6   7    8        9          10  11
    const std::vector<std::string> tokens = {"The", "quick", "brown", "fox", "jumped", "over",
                                             "the", "very",  "lazy",  "dog", "today",  "."};
    EXPECT_EQ(first.tokens, tokens);
    EXPECT_EQ(first.head, (Span{3, 5}));
    EXPECT_EQ(first.tail, (Span{9, 10}));
    EXPECT_EQ(first.gold_label, "Other");
    EXPECT_FALSE(first.head_type.has_value());
    EXPECT_FALSE(first.tail_type.has_value());
    EXPECT_EQ(first.head_text(), "fox jumped");
    EXPECT_EQ(first.tail_text(), "dog");

    EXPECT_EQ(instances[1].gold_label, "Component-Whole(e2,e1)");
    EXPECT_EQ(instances[1].tokens.back(), "!");
    EXPECT_EQ(instances[2].gold_label, "Entity-Origin(e1,e2)");
    EXPECT_EQ(instances[2].tail_text(), "village");
}

TEST(SemEval, AcceptsCrlfLineEndings) {
    const auto instances = load_semeval(data_dir() / "semeval_crlf.txt", Split::test);
    ASSERT_EQ(instances.size(), 1u);
    EXPECT_EQ(instances[0].gold_label, "Content-Container(e2,e1)");
    EXPECT_EQ(instances[0].split, Split::test);
    EXPECT_EQ(instances[0].head_text(), "box");
}

TEST(SemEval, MissingClosingMarkerIsParseError) {
    EXPECT_THROW(parse_semeval("5\t\"A <e1>cat sat on the <e2>mat</e2>.\"\nOther\nComment:\n", Split::train),
                 ParseError);
}

TEST(SemEval, MissingRelationLineIsParseError) {
    EXPECT_THROW(parse_semeval("5\t\"A <e1>cat</e1> sat on the <e2>mat</e2>.\"\n", Split::train), ParseError);
    EXPECT_THROW(parse_semeval("5\t\"A <e1>cat</e1> sat on the <e2>mat</e2>.\"\n"
                               "6\t\"A <e1>dog</e1> sat on the <e2>rug</e2>.\"\nOther\n",
                               Split::train),
                 ParseError);
}

TEST(SemEval, MarkersSurviveReinsertion) {
    const auto instances = load_semeval(data_dir() / "semeval_sample.txt", Split::train);
    for (const auto& inst : instances) {
        const auto marked = mark_entities(inst);
        const auto again = parse_marked_sentence(inst.id, marked, inst.gold_label, inst.split);
        EXPECT_EQ(again, inst) << marked;
    }
}

TEST(SemEval, MarkerInsideWordSplitsTheToken) {
    const auto inst = parse_marked_sentence("x", "The <e1>sun</e1>'s <e2>heat</e2>.", "Other", Split::train);
    const std::vector<std::string> tokens = {"The", "sun", "'s", "heat", "."};
    EXPECT_EQ(inst.tokens, tokens);
    EXPECT_EQ(inst.head, (Span{1, 2}));
    EXPECT_EQ(inst.tail, (Span{3, 4}));
}

// ---------------------------------------------------------------------------
// TACRED family

TEST(Tacred, FixtureConvertsInclusiveEndsAndKeepsTypes) {
    const auto instances = load_tacred_family(data_dir() / "tacred_sample.json", "TACRED", Split::train);
    ASSERT_EQ(instances.size(), 3u);
    EXPECT_EQ(instances[0].id, "t-001");
    EXPECT_EQ(instances[0].head, (Span{0, 2}));
    EXPECT_EQ(instances[0].tail, (Span{5, 7}));
    EXPECT_EQ(instances[0].head_text(), "Acme Corp");
    EXPECT_EQ(instances[0].tail_text(), "Jane Doe");
    EXPECT_EQ(instances[0].head_type, "ORGANIZATION");
    EXPECT_EQ(instances[0].tail_type, "PERSON");
    EXPECT_EQ(instances[1].head, (Span{0, 1}));
    EXPECT_EQ(instances[2].gold_label, "per:city_of_birth");
}

TEST(Tacred, EmptyArrayGivesEmptyList) { EXPECT_TRUE(parse_tacred_json("[]", Split::test).empty()); }

TEST(Tacred, MalformedJsonReportsByteOffset) {
    try {
        parse_tacred_json("[{\"id\": \"a\",, }]", Split::train);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_NE(e.offset(), ParseError::npos);
        EXPECT_NE(std::string(e.what()).find("byte"), std::string::npos);
    }
}

TEST(Tacred, EmptySpanNamesTheInstance) {
    try {
        load_tacred_family(data_dir() / "tacred_bad_span.json", "TACRED", Split::train);
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("b-002"), std::string::npos) << e.what();
    }
}

TEST(Tacred, UnknownRelationRejectedWhenSchemaGiven) {
    const auto schema = reference_schema("TACRED");
    const std::string text = R"([{"id": "u", "relation": "per:favourite_color", "token": ["a", "b"],
        "subj_start": 0, "subj_end": 0, "obj_start": 1, "obj_end": 1,
        "subj_type": "PERSON", "obj_type": "COLOR"}])";
    EXPECT_THROW(parse_tacred_json(text, Split::train, &schema), ValidationError);
    EXPECT_NO_THROW(parse_tacred_json(text, Split::train));
}

TEST(Tacred, IndexFieldsRecoverable) {
    const auto instances = load_tacred_family(data_dir() / "tacred_sample.json", "TACRED", Split::train);
    const auto raw = nlohmann::json::parse(read_file(data_dir() / "tacred_sample.json"));
    for (std::size_t i = 0; i < instances.size(); ++i) {
        EXPECT_EQ(instances[i].head.start, raw[i]["subj_start"].get<std::size_t>());
        EXPECT_EQ(instances[i].head.end - 1, raw[i]["subj_end"].get<std::size_t>());
        EXPECT_EQ(instances[i].tail.start, raw[i]["obj_start"].get<std::size_t>());
        EXPECT_EQ(instances[i].tail.end - 1, raw[i]["obj_end"].get<std::size_t>());
    }
}

// ---------------------------------------------------------------------------
// Schema and bundle

TEST(Schema, SingleLabelGetsNegativeInjected) {
    std::vector<RelationInstance> instances = {
        make_instance("a", {"x", "y"}, {0, 1}, {1, 2}, "L"),
        make_instance("b", {"x", "y"}, {0, 1}, {1, 2}, "L"),
    };
    const auto schema = derive_schema(instances, "custom");
    EXPECT_EQ(schema.labels, (std::vector<std::string>{"L", "no_relation"}));
    EXPECT_EQ(schema.negative_label, "no_relation");
    EXPECT_FALSE(schema.directional);
}

TEST(Schema, NamedDatasetCountMismatchReportsBothCounts) {
    std::vector<RelationInstance> instances = {make_instance("a", {"x", "y"}, {0, 1}, {1, 2}, "org:founded")};
    try {
        derive_schema(instances, "TACRED");
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        const std::string what = e.what();
        EXPECT_NE(what.find("42"), std::string::npos) << what;
        EXPECT_NE(what.find("2"), std::string::npos) << what;
    }
}

TEST(Schema, EmptyInputRejected) { EXPECT_THROW(derive_schema({}, "custom"), ValidationError); }

TEST(Schema, IdempotentAndOrderInsensitive) {
    auto bundle = relex::testing::toy_bundle(60, 0);
    const auto base = derive_schema(bundle.train, "toy");
    std::mt19937 rng(3);
    for (int round = 0; round < 20; ++round) {
        std::shuffle(bundle.train.begin(), bundle.train.end(), rng);
        EXPECT_EQ(derive_schema(bundle.train, "toy"), base);
    }
    // Feeding the schema's own labels back yields the same schema.
    std::vector<RelationInstance> from_labels;
    for (const auto& l : base.labels) from_labels.push_back(make_instance(l, {"x", "y"}, {0, 1}, {1, 2}, l));
    EXPECT_EQ(derive_schema(from_labels, "toy"), base);
}

TEST(Bundle, DisjointSplitsAssemble) {
    const auto bundle = relex::testing::toy_bundle(5, 3);
    EXPECT_EQ(bundle.split(Split::train).size(), 5u);
    EXPECT_EQ(bundle.split(Split::test).size(), 3u);
    EXPECT_TRUE(bundle.split(Split::prompt).empty());
}

TEST(Bundle, SharedIdAcrossSplitsRejected) {
    auto bundle = relex::testing::toy_bundle(3, 2);
    auto test = bundle.test;
    test[1].id = bundle.train[0].id;
    try {
        assemble_bundle(bundle.schema, bundle.train, test, {});
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find(bundle.train[0].id), std::string::npos);
    }
}

TEST(Bundle, SemEvalPromptSplitRejected) {
    RelationSchema schema{"SemEVAL", {"Other"}, "Other", true};
    std::vector<RelationInstance> train = {make_instance("1", {"a", "b"}, {0, 1}, {1, 2}, "Other")};
    std::vector<RelationInstance> test = {make_instance("2", {"a", "b"}, {0, 1}, {1, 2}, "Other", Split::test)};
    std::vector<RelationInstance> prompt = {make_instance("3", {"a", "b"}, {0, 1}, {1, 2}, "Other", Split::prompt)};
    EXPECT_NO_THROW(assemble_bundle(schema, train, test, {}));
    EXPECT_THROW(assemble_bundle(schema, train, test, prompt), ValidationError);
}

TEST(Bundle, LabelOutsideSchemaRejected) {
    auto bundle = relex::testing::toy_bundle(3, 1);
    bundle.train[0].gold_label = "per:unknown";
    EXPECT_THROW(assemble_bundle(bundle.schema, bundle.train, bundle.test, {}), ValidationError);
}

// ---------------------------------------------------------------------------
// Persistence

TEST(Jsonl, StableKeyOrder) {
    auto inst = make_instance("id-1", {"A", "b"}, {0, 1}, {1, 2}, "org:founded", Split::test);
    inst.head_type = "ORGANIZATION";
    EXPECT_EQ(to_jsonl_line(inst),
              R"({"id":"id-1","tokens":["A","b"],"head_start":0,"head_end":1,"tail_start":1,"tail_end":2,)"
              R"("head_type":"ORGANIZATION","tail_type":null,"gold_label":"org:founded","split":"test"})");
}

TEST(Jsonl, RoundTripIsFieldEqual) {
    TempDir dir;
    auto instances = load_semeval(data_dir() / "semeval_sample.txt", Split::train);
    const auto tacred = load_tacred_family(data_dir() / "tacred_sample.json", "TACRED", Split::prompt);
    instances.insert(instances.end(), tacred.begin(), tacred.end());
    write_instances_jsonl(dir / "x.jsonl", instances);
    EXPECT_EQ(read_instances_jsonl(dir / "x.jsonl"), instances);
    for (const auto& inst : instances) EXPECT_EQ(from_jsonl_line(to_jsonl_line(inst)), inst);
}

TEST(Jsonl, UnicodeSurvives) {
    const auto inst = make_instance("u", {"Zoë", "café", "東京"}, {0, 1}, {2, 3}, "L");
    EXPECT_EQ(from_jsonl_line(to_jsonl_line(inst)), inst);
}

TEST(Jsonl, BadLineIsParseError) { EXPECT_THROW(from_jsonl_line("{\"id\": 3}"), ParseError); }

TEST(Bundle, SaveLoadRoundTrip) {
    TempDir dir;
    const auto bundle = relex::testing::toy_bundle(20, 7);
    save_bundle(bundle, dir.path());
    const auto loaded = load_bundle(dir.path());
    EXPECT_EQ(loaded.schema, bundle.schema);
    EXPECT_EQ(loaded.train, bundle.train);
    EXPECT_EQ(loaded.test, bundle.test);
    EXPECT_EQ(loaded.prompt, bundle.prompt);
}
