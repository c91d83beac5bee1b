#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "agentrec/ingest.hpp"
#include "agentrec/trace_model.hpp"

using namespace agentrec;

namespace {

bool has_issue(const std::vector<IngestIssue>& issues, const std::string& rule) {
    for (const auto& i : issues)
        if (i.rule == rule) return true;
    return false;
}

std::size_t count_issue(const std::vector<IngestIssue>& issues,
                        const std::string& rule) {
    std::size_t n = 0;
    for (const auto& i : issues)
        if (i.rule == rule) ++n;
    return n;
}

RawEvent ev(std::string session, std::uint64_t index, std::string agent,
            double ts) {
    RawEvent e;
    e.session_id = std::move(session);
    e.event_index = index;
    e.agent_id = std::move(agent);
    e.timestamp = ts;
    return e;
}

}  // namespace

TEST_CASE("parse_events groups by session and sorts by event index") {
    std::istringstream in(
        "{\"session_id\":\"s2\",\"event_index\":0,\"agent_id\":\"x\"}\n"
        "{\"session_id\":\"s1\",\"event_index\":1,\"agent_id\":\"b\"}\n"
        "{\"session_id\":\"s1\",\"event_index\":0,\"agent_id\":\"a\"}\n");
    const ParsedEvents p = parse_events(in);
    CHECK(p.issues.empty());
    REQUIRE(p.sessions.size() == 2);
    const auto& s1 = p.sessions.at("s1");
    REQUIRE(s1.size() == 2);
    CHECK(s1[0].agent_id == "a");
    CHECK(s1[1].agent_id == "b");
}

TEST_CASE("parse_events reports malformed lines with line numbers") {
    std::istringstream in(
        "{\"session_id\":\"s\",\"event_index\":0,\"agent_id\":\"a\"}\n"
        "this is not json\n"
        "[1,2,3]\n"
        "{\"session_id\":\"s\",\"event_index\":1,\"agent_id\":\"b\"}\n");
    const ParsedEvents p = parse_events(in);
    CHECK(p.sessions.at("s").size() == 2);
    CHECK(count_issue(p.issues, "malformed_record") == 2);
    CHECK(p.issues[0].detail.find("line 2") != std::string::npos);
    CHECK(p.issues[1].detail.find("line 3") != std::string::npos);
}

TEST_CASE("parse_events rejects records missing required fields") {
    std::istringstream in(
        "{\"event_index\":0,\"agent_id\":\"a\"}\n"
        "{\"session_id\":\"s\",\"agent_id\":\"a\"}\n"
        "{\"session_id\":\"s\",\"event_index\":1}\n"
        "{\"session_id\":\"s\",\"event_index\":2,\"agent_id\":\"ok\"}\n");
    const ParsedEvents p = parse_events(in);
    CHECK(p.sessions.at("s").size() == 1);
    CHECK(count_issue(p.issues, "record_rejected") == 3);
    CHECK(p.issues[0].detail.find("missing session_id") != std::string::npos);
    CHECK(p.issues[1].detail.find("missing event_index") != std::string::npos);
    CHECK(p.issues[2].detail.find("missing agent_id") != std::string::npos);
}

TEST_CASE("parse_events keeps the first of duplicate events and skips blanks") {
    std::istringstream in(
        "{\"session_id\":\"s\",\"event_index\":0,\"agent_id\":\"first\"}\n"
        "\n"
        "   \n"
        "{\"session_id\":\"s\",\"event_index\":0,\"agent_id\":\"second\"}\n");
    const ParsedEvents p = parse_events(in);
    REQUIRE(p.sessions.at("s").size() == 1);
    CHECK(p.sessions.at("s")[0].agent_id == "first");
    CHECK(count_issue(p.issues, "duplicate_event") == 1);
}

TEST_CASE("parse_events preserves unknown keys in meta") {
    std::istringstream in(
        "{\"session_id\":\"s\",\"event_index\":0,\"agent_id\":\"a\","
        "\"custom_field\":42,\"nested\":{\"x\":true}}\n");
    const ParsedEvents p = parse_events(in);
    const RawEvent& e = p.sessions.at("s")[0];
    CHECK(e.meta.at("custom_field") == 42);
    CHECK(e.meta.at("nested").at("x") == true);
}

TEST_CASE("parse_events_file throws on an unreadable path") {
    CHECK_THROWS_AS((void)parse_events_file("no/such/file.jsonl"),
                    std::runtime_error);
}

TEST_CASE("resolve_parents defaults to the preceding invocation") {
    std::vector<RawEvent> events = {ev("s", 0, "a", 0), ev("s", 1, "b", 1),
                                    ev("s", 2, "c", 2)};
    const ParentMap m = resolve_parents(events);
    CHECK_FALSE(m.at(0).has_value());
    CHECK(m.at(1) == 0);
    CHECK(m.at(2) == 1);
}

TEST_CASE("resolve_parents honors caller_index over the fallback") {
    std::vector<RawEvent> events = {ev("s", 0, "a", 0), ev("s", 1, "b", 1),
                                    ev("s", 2, "c", 2)};
    events[2].caller_index = 0;
    const ParentMap m = resolve_parents(events);
    CHECK(m.at(2) == 0);
}

TEST_CASE("span matching beats caller_index") {
    std::vector<RawEvent> events = {ev("s", 0, "a", 0), ev("s", 1, "b", 1),
                                    ev("s", 2, "c", 2)};
    events[0].span_id = "root-span";
    events[2].parent_span_id = "root-span";
    events[2].caller_index = 1;  // would pick event 1, span says event 0
    const ParentMap m = resolve_parents(events);
    CHECK(m.at(2) == 0);
}

TEST_CASE("latest prior span match wins on duplicate span ids") {
    std::vector<RawEvent> events = {ev("s", 0, "a", 0), ev("s", 1, "b", 1),
                                    ev("s", 2, "c", 2)};
    events[0].span_id = "dup";
    events[1].span_id = "dup";
    events[2].parent_span_id = "dup";
    const ParentMap m = resolve_parents(events);
    CHECK(m.at(2) == 1);
}

TEST_CASE("unmatched spans warn and fall through to caller_index") {
    std::vector<RawEvent> events = {ev("s", 0, "a", 0), ev("s", 1, "b", 1),
                                    ev("s", 2, "c", 2)};
    events[2].parent_span_id = "ghost-span";
    events[2].caller_index = 0;
    std::vector<IngestIssue> issues;
    const ParentMap m = resolve_parents(events, &issues);
    CHECK(m.at(2) == 0);
    CHECK(has_issue(issues, "span_unmatched"));
}

TEST_CASE("forward and self links are dropped with a warning") {
    std::vector<RawEvent> events = {ev("s", 0, "a", 0), ev("s", 1, "b", 1),
                                    ev("s", 2, "c", 2)};
    events[1].caller_index = 2;  // forward
    std::vector<IngestIssue> issues;
    const ParentMap m = resolve_parents(events, &issues);
    CHECK(m.at(1) == 0);  // falls back to preceding invocation
    CHECK(count_issue(issues, "forward_link_dropped") == 1);

    events[1].caller_index = 1;  // self
    issues.clear();
    const ParentMap m2 = resolve_parents(events, &issues);
    CHECK(m2.at(1) == 0);
    CHECK(count_issue(issues, "forward_link_dropped") == 1);
}

TEST_CASE("caller_index matching no prior event warns and falls back") {
    // Indices 0,2,3 with a gap at 1.
    std::vector<RawEvent> events = {ev("s", 0, "a", 0), ev("s", 2, "b", 1),
                                    ev("s", 3, "c", 2)};
    events[2].caller_index = 1;
    std::vector<IngestIssue> issues;
    const ParentMap m = resolve_parents(events, &issues);
    CHECK(m.at(3) == 2);  // preceding invocation
    CHECK(has_issue(issues, "caller_unmatched"));
}

TEST_CASE("the first event is always the root") {
    std::vector<RawEvent> events = {ev("s", 0, "a", 0), ev("s", 1, "b", 1)};
    events[0].parent_span_id = "anything";
    events[0].caller_index = 1;
    const ParentMap m = resolve_parents(events);
    CHECK_FALSE(m.at(0).has_value());
}

TEST_CASE("build_tree produces a valid tree with padded node ids") {
    std::vector<RawEvent> events = {ev("s", 0, "a", 10.0), ev("s", 1, "b", 11.0),
                                    ev("s", 2, "c", 12.0)};
    events[1].task_text = "subtask";
    const ParentMap m = resolve_parents(events);
    std::vector<IngestIssue> issues;
    const CallingTree t = build_tree(events, m, &issues);
    CHECK(validate_tree(t).empty());
    REQUIRE(t.nodes.size() == 3);
    CHECK(t.nodes[0].node_id == "n000000000000");
    CHECK(t.nodes[1].node_id == "n000000000001");
    CHECK(t.nodes[1].parent == "n000000000000");
    CHECK(t.nodes[1].task_text == "subtask");
    CHECK(t.nodes[0].timestamp == 10.0);
    CHECK_FALSE(has_issue(issues, "timestamp_fallback"));
}

TEST_CASE("session_query is taken from the first event carrying it") {
    std::vector<RawEvent> events = {ev("s", 0, "a", 0), ev("s", 1, "b", 1)};
    events[1].session_query = "the question";
    const CallingTree t = build_tree(events, resolve_parents(events));
    CHECK(t.session_query == "the question");
}

TEST_CASE("missing timestamps switch the whole session to event order") {
    std::vector<RawEvent> events = {ev("s", 0, "a", 100.0), ev("s", 1, "b", 101.0),
                                    ev("s", 2, "c", 102.0)};
    events[1].timestamp.reset();
    std::vector<IngestIssue> issues;
    const CallingTree t = build_tree(events, resolve_parents(events), &issues);
    CHECK(has_issue(issues, "timestamp_fallback"));
    CHECK(t.nodes[0].timestamp == 0.0);
    CHECK(t.nodes[1].timestamp == 1.0);
    CHECK(t.nodes[2].timestamp == 2.0);
}

TEST_CASE("non-monotonic timestamps along an edge trigger the fallback") {
    std::vector<RawEvent> events = {ev("s", 0, "a", 100.0), ev("s", 1, "b", 99.0)};
    std::vector<IngestIssue> issues;
    const CallingTree t = build_tree(events, resolve_parents(events), &issues);
    CHECK(has_issue(issues, "timestamp_fallback"));
    CHECK(t.nodes[1].timestamp == 1.0);
}

TEST_CASE("several parentless events get a synthetic orchestrator root") {
    std::vector<RawEvent> events = {ev("s", 0, "a", 0), ev("s", 1, "b", 1),
                                    ev("s", 2, "c", 2)};
    ParentMap m;
    m[0] = std::nullopt;
    m[1] = std::nullopt;  // second root
    m[2] = 1;
    std::vector<IngestIssue> issues;
    const CallingTree t = build_tree(events, m, &issues);
    CHECK(has_issue(issues, "synthetic_root"));
    CHECK(validate_tree(t).empty());
    REQUIRE(t.nodes.size() == 4);
    CHECK(t.nodes[0].node_id == "root");
    CHECK(t.nodes[0].agent_id == "__root__");
    CHECK(t.nodes[0].timestamp == 0.0);  // min over real nodes
    CHECK(t.nodes[1].parent == "root");
    CHECK(t.nodes[2].parent == "root");
    CHECK(t.nodes[3].parent == "n000000000001");
}

TEST_CASE("hand-supplied parent maps with cycles are broken") {
    std::vector<RawEvent> events = {ev("s", 0, "a", 0), ev("s", 1, "b", 1),
                                    ev("s", 2, "c", 2)};
    ParentMap m;
    m[0] = std::nullopt;
    m[1] = 2;  // would form 1 <-> 2
    m[2] = 1;
    std::vector<IngestIssue> issues;
    const CallingTree t = build_tree(events, m, &issues);
    CHECK(has_issue(issues, "cycle_broken"));
    CHECK(validate_tree(t).empty());
    CHECK(t.nodes[1].parent == "n000000000000");  // preceding invocation
    CHECK(t.nodes[2].parent == "n000000000001");
}

TEST_CASE("parent map entries outside the session are dropped") {
    std::vector<RawEvent> events = {ev("s", 0, "a", 0), ev("s", 1, "b", 1)};
    ParentMap m;
    m[0] = std::nullopt;
    m[1] = 99;
    std::vector<IngestIssue> issues;
    const CallingTree t = build_tree(events, m, &issues);
    CHECK(has_issue(issues, "invalid_link_dropped"));
    CHECK(t.nodes[1].parent == "n000000000000");
}

TEST_CASE("build_agent_pool merges metadata and tallies from trees") {
    std::vector<RawEvent> events = {ev("s", 0, "orc", 0), ev("s", 1, "a", 1),
                                    ev("s", 2, "a", 2)};
    events[0].agent_name = "boss";
    events[1].agent_name = "worker";
    events[1].agent_description = "does stuff";
    events[1].status = CallStatus::success;
    events[2].status = CallStatus::failure;
    std::map<std::string, std::vector<RawEvent>> sessions{{"s", events}};
    const CallingTree t = build_tree(events, resolve_parents(events));
    const auto pool = build_agent_pool(sessions, {t});
    REQUIRE(pool.size() == 2);  // sorted by id: "a", "orc"
    CHECK(pool[0].id == "a");
    CHECK(pool[0].name == "worker");
    CHECK(pool[0].description == "does stuff");
    CHECK(pool[0].invocation_count == 2);
    CHECK(pool[0].success_count == 1);
    CHECK(pool[1].id == "orc");
    CHECK(pool[1].name == "boss");
    CHECK(pool[1].invocation_count == 1);
}

TEST_CASE("conflicting descriptions keep the first and warn once") {
    std::vector<RawEvent> events = {ev("s", 0, "a", 0), ev("s", 1, "a", 1),
                                    ev("s", 2, "a", 2)};
    events[0].agent_description = "original";
    events[1].agent_description = "changed";
    events[2].agent_description = "changed again";
    std::map<std::string, std::vector<RawEvent>> sessions{{"s", events}};
    const CallingTree t = build_tree(events, resolve_parents(events));
    std::vector<IngestIssue> issues;
    const auto pool = build_agent_pool(sessions, {t}, &issues);
    CHECK(pool[0].description == "original");
    CHECK(count_issue(issues, "metadata_conflict") == 1);
}

TEST_CASE("agents with no name fall back to their id") {
    std::vector<RawEvent> events = {ev("s", 0, "anon", 0)};
    std::map<std::string, std::vector<RawEvent>> sessions{{"s", events}};
    const CallingTree t = build_tree(events, resolve_parents(events));
    const auto pool = build_agent_pool(sessions, {t});
    CHECK(pool[0].name == "anon");
}

TEST_CASE("prune removes exactly the trees with at most one non-root node") {
    auto mk = [](const std::string& sid, std::size_t n) {
        CallingTree t;
        t.session_id = sid;
        for (std::size_t i = 0; i < n; ++i) {
            CallNode c;
            c.node_id = "n" + std::to_string(i);
            c.agent_id = "a";
            c.timestamp = static_cast<double>(i);
            if (i) c.parent = "n" + std::to_string(i - 1);
            t.nodes.push_back(std::move(c));
        }
        return t;
    };
    const PruneResult pr =
        prune_degenerate({mk("one", 1), mk("two", 2), mk("three", 3), mk("four", 4)});
    CHECK(pr.pruned == 2);
    REQUIRE(pr.kept.size() == 2);
    CHECK(pr.kept[0].session_id == "three");
    CHECK(pr.kept[1].session_id == "four");
}

TEST_CASE("corpus stats are plain count ratios") {
    const CorpusStats s = CorpusStats::from_counts(14, 229, 557);
    CHECK(s.avg_calls_per_tool == doctest::Approx(557.0 / 14.0).epsilon(1e-12));
    CHECK(s.avg_nodes_per_graph == doctest::Approx(557.0 / 229.0).epsilon(1e-12));
    CHECK_FALSE(s.degenerate);

    const CorpusStats z = CorpusStats::from_counts(0, 0, 0);
    CHECK(z.degenerate);
    CHECK(z.avg_calls_per_tool == 0.0);
}

TEST_CASE("ingest_events runs the full pipeline") {
    std::istringstream in(
        "{\"session_id\":\"s1\",\"event_index\":0,\"agent_id\":\"orc\","
        "\"timestamp\":1,\"session_query\":\"do the thing\",\"agent_name\":\"boss\"}\n"
        "{\"session_id\":\"s1\",\"event_index\":1,\"agent_id\":\"a\","
        "\"timestamp\":2,\"task_text\":\"part one\",\"status\":\"success\"}\n"
        "{\"session_id\":\"s1\",\"event_index\":2,\"agent_id\":\"b\","
        "\"timestamp\":3,\"caller_index\":0,\"task_text\":\"part two\"}\n"
        "{\"session_id\":\"s2\",\"event_index\":0,\"agent_id\":\"solo\","
        "\"timestamp\":5}\n");
    const IngestResult r = ingest_events(in, /*prune=*/false);
    CHECK(r.issues.empty());
    CHECK(r.corpus.trees.size() == 2);
    CHECK(r.corpus.agents.size() == 4);
    CHECK(r.stats.graph_count == 2);
    CHECK(r.stats.node_count == 4);
    CHECK(r.stats.tool_count == 4);
    CHECK(r.pruned == 0);

    // s1: both children under the root (one via fallback, one via caller).
    const CallingTree& t = r.corpus.trees[0];
    CHECK(t.session_query == "do the thing");
    CHECK(*t.nodes[1].parent == t.nodes[0].node_id);
    CHECK(*t.nodes[2].parent == t.nodes[0].node_id);
}

TEST_CASE("ingest_events with prune drops degenerate sessions") {
    std::istringstream in(
        "{\"session_id\":\"s1\",\"event_index\":0,\"agent_id\":\"a\",\"timestamp\":1}\n"
        "{\"session_id\":\"s1\",\"event_index\":1,\"agent_id\":\"b\",\"timestamp\":2}\n"
        "{\"session_id\":\"s2\",\"event_index\":0,\"agent_id\":\"a\",\"timestamp\":1}\n"
        "{\"session_id\":\"s2\",\"event_index\":1,\"agent_id\":\"b\",\"timestamp\":2}\n"
        "{\"session_id\":\"s2\",\"event_index\":2,\"agent_id\":\"c\",\"timestamp\":3}\n");
    const IngestResult r = ingest_events(in, /*prune=*/true);
    CHECK(r.pruned == 1);
    REQUIRE(r.corpus.trees.size() == 1);
    CHECK(r.corpus.trees[0].session_id == "s2");
    // The pool is built before pruning, so s1's agents still count.
    CHECK(r.stats.tool_count == 3);
}

TEST_CASE("pruning everything leaves a flagged empty corpus") {
    std::istringstream in(
        "{\"session_id\":\"s1\",\"event_index\":0,\"agent_id\":\"a\",\"timestamp\":1}\n");
    const IngestResult r = ingest_events(in, /*prune=*/true);
    CHECK(r.corpus.trees.empty());
    CHECK(r.pruned == 1);
    CHECK(has_issue(r.issues, "empty_after_prune"));
    CHECK(r.stats.degenerate);
}

TEST_CASE("corpus save/load round-trips byte-identically") {
    std::istringstream in(
        "{\"session_id\":\"s1\",\"event_index\":0,\"agent_id\":\"orc\","
        "\"timestamp\":1,\"session_query\":\"q\",\"latency_ms\":12.5,"
        "\"token_count\":77}\n"
        "{\"session_id\":\"s1\",\"event_index\":1,\"agent_id\":\"a\","
        "\"timestamp\":2,\"status\":\"success\",\"task_text\":\"t\"}\n");
    const IngestResult r = ingest_events(in, false);
    const std::string p1 = "tmp_corpus_rt1.json";
    const std::string p2 = "tmp_corpus_rt2.json";
    save_corpus(r.corpus, p1);
    const Corpus loaded = load_corpus(p1);
    CHECK(loaded.trees.size() == r.corpus.trees.size());
    CHECK(loaded.agents.size() == r.corpus.agents.size());
    CHECK(loaded.trees[0].nodes[0].token_count == 77);
    CHECK(loaded.trees[0].nodes[0].latency_ms == 12.5);
    CHECK(loaded.trees[0].nodes[1].status == CallStatus::success);
    save_corpus(loaded, p2);
    std::ifstream f1(p1), f2(p2);
    std::stringstream b1, b2;
    b1 << f1.rdbuf();
    b2 << f2.rdbuf();
    CHECK(b1.str() == b2.str());
    CHECK(!b1.str().empty());
    std::remove(p1.c_str());
    std::remove(p2.c_str());
}

TEST_CASE("load_corpus rejects missing files and bad versions") {
    CHECK_THROWS_AS((void)load_corpus("missing_corpus.json"), std::runtime_error);
    const std::string path = "tmp_corpus_badver.json";
    {
        std::ofstream out(path);
        out << "{\"version\": 99, \"sessions\": [], \"agents\": []}\n";
    }
    CHECK_THROWS_AS((void)load_corpus(path), std::runtime_error);
    std::remove(path.c_str());
}

TEST_CASE("save_issues writes one JSON line per issue") {
    const std::string path = "tmp_issues.jsonl";
    save_issues({{"s1", "some_rule", "detail text"},
                 {"", "other_rule", "more"}},
                path);
    std::ifstream in(path);
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line)) lines.push_back(line);
    REQUIRE(lines.size() == 2);
    CHECK(lines[0].find("some_rule") != std::string::npos);
    CHECK(lines[0].find("s1") != std::string::npos);
    std::remove(path.c_str());
}
