#pragma once
// Event-log normalization: parse raw JSONL events, resolve parent links,
// build calling trees and the agent pool, compute corpus statistics.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "agentrec/types.hpp"

namespace agentrec {

// Canonical event tuple, one per invocation in the raw log.
struct RawEvent {
    std::string session_id;
    std::uint64_t event_index = 0;  // order within session
    std::optional<double> timestamp;
    std::string agent_id;
    std::string agent_name;
    std::string agent_description;
    std::vector<std::string> tags;
    std::optional<std::string> span_id;
    std::optional<std::string> parent_span_id;
    std::optional<std::int64_t> caller_index;  // event_index of caller
    CallStatus status = CallStatus::unknown;
    std::optional<double> latency_ms;
    std::optional<std::uint64_t> token_count;
    std::optional<double> cost;
    std::string category;
    std::string task_text;
    std::string session_query;    // carried on the first event
    nlohmann::json meta;          // unknown keys, preserved verbatim
};

// One skip/warning/rejection emitted anywhere in the pipeline.
struct IngestIssue {
    std::string session_id;  // empty for file-level issues
    std::string rule;        // e.g. "malformed_record", "forward_link_dropped"
    std::string detail;
};

struct ParsedEvents {
    // grouped by session_id (sorted), each group sorted by event_index
    std::map<std::string, std::vector<RawEvent>> sessions;
    std::vector<IngestIssue> issues;
};

// Parses JSON Lines events. Malformed or duplicate records are rejected
// and reported with line numbers; parsing itself never throws on bad rows.
ParsedEvents parse_events(std::istream& in);
ParsedEvents parse_events_file(const std::string& path);  // throws on I/O error

// parent event_index per event; the root maps to nullopt.
using ParentMap = std::map<std::uint64_t, std::optional<std::uint64_t>>;

// Rule priority per event: (1) parent_span_id matched against the span_id
// of a prior event (latest match wins); (2) caller_index; (3) the
// immediately preceding event. Links pointing at the event itself or
// forward are dropped with a warning, so resolved parents always point
// backward and the result is acyclic by construction. The first event is
// the root.
ParentMap resolve_parents(const std::vector<RawEvent>& events,
                          std::vector<IngestIssue>* issues = nullptr);

// Arranges one session's events into a valid CallingTree. A synthetic
// orchestrator root is prepended only when the parent map leaves several
// events parentless; cycles in a hand-supplied map are broken in favor of
// last-invocation matching. If raw timestamps are missing anywhere or
// non-monotonic along a resolved edge, the whole session falls back to
// event_index timestamps (warned). Output always passes validate_tree.
CallingTree build_tree(const std::vector<RawEvent>& events,
                       const ParentMap& parents,
                       std::vector<IngestIssue>* issues = nullptr);

// One record per distinct agent_id with invocation/success tallies;
// metadata comes from the first event carrying it, later conflicts warned.
std::vector<AgentRecord> build_agent_pool(
    const std::map<std::string, std::vector<RawEvent>>& sessions,
    const std::vector<CallingTree>& trees,
    std::vector<IngestIssue>* issues = nullptr);

struct PruneResult {
    std::vector<CallingTree> kept;
    std::uint64_t pruned = 0;
};

// Removes trees whose non-root node count is <= 1. Off by default at the
// CLI; single-step corpora are legitimate.
PruneResult prune_degenerate(std::vector<CallingTree> trees);

struct CorpusStats {
    std::uint64_t tool_count = 0;
    std::uint64_t graph_count = 0;
    std::uint64_t node_count = 0;
    double avg_calls_per_tool = 0;   // node_count / tool_count
    double avg_nodes_per_graph = 0;  // node_count / graph_count
    bool degenerate = false;         // a zero denominator was hit

    static CorpusStats from_counts(std::uint64_t tools, std::uint64_t graphs,
                                   std::uint64_t nodes);
};

CorpusStats corpus_stats(const std::vector<AgentRecord>& pool,
                         const std::vector<CallingTree>& trees);

struct IngestResult {
    Corpus corpus;
    CorpusStats stats;
    std::uint64_t pruned = 0;
    std::vector<IngestIssue> issues;
};

// Full pipeline: parse -> resolve -> build -> pool -> (prune) -> stats.
IngestResult ingest_events(std::istream& in, bool prune);
IngestResult ingest_events_file(const std::string& path, bool prune);

// Unified corpus file: {version:1, sessions:[...], agents:[...]}.
void save_corpus(const Corpus& corpus, const std::string& path);
Corpus load_corpus(const std::string& path);  // throws on I/O or schema error

void save_issues(const std::vector<IngestIssue>& issues, const std::string& path);

}  // namespace agentrec
