#include "agentrec/ingest.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <set>
#include <stdexcept>
#include <utility>

namespace agentrec {

namespace {

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "session_id",     "event_index", "timestamp",      "agent_id",
        "agent_name",     "agent_description", "tags",     "span_id",
        "parent_span_id", "caller_index", "status",        "latency_ms",
        "token_count",    "cost",        "category",       "task_text",
        "session_query",  "meta"};
    return keys;
}

std::string line_tag(std::uint64_t line) {
    return "line " + std::to_string(line) + ": ";
}

// Zero-padded so lexicographic node_id order equals event order.
std::string event_node_id(std::uint64_t event_index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "n%012llu",
                  static_cast<unsigned long long>(event_index));
    return buf;
}

}  // namespace

ParsedEvents parse_events(std::istream& in) {
    ParsedEvents out;
    std::set<std::pair<std::string, std::uint64_t>> seen;
    std::string line;
    std::uint64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            out.issues.push_back(
                {"", "malformed_record", line_tag(line_no) + "not a JSON object"});
            continue;
        }
        auto get_str = [&](const char* key) -> std::string {
            auto it = j.find(key);
            if (it != j.end() && it->is_string()) return it->get<std::string>();
            return {};
        };
        auto get_num = [&](const char* key) -> std::optional<double> {
            auto it = j.find(key);
            if (it != j.end() && it->is_number()) return it->get<double>();
            return std::nullopt;
        };

        RawEvent ev;
        ev.session_id = get_str("session_id");
        if (ev.session_id.empty()) {
            out.issues.push_back(
                {"", "record_rejected", line_tag(line_no) + "missing session_id"});
            continue;
        }
        auto idx_it = j.find("event_index");
        if (idx_it == j.end() || !idx_it->is_number_integer() ||
            (idx_it->is_number_integer() && !idx_it->is_number_unsigned() &&
             idx_it->get<std::int64_t>() < 0)) {
            out.issues.push_back({ev.session_id, "record_rejected",
                                  line_tag(line_no) + "missing event_index"});
            continue;
        }
        ev.event_index = idx_it->get<std::uint64_t>();
        ev.agent_id = get_str("agent_id");
        if (ev.agent_id.empty()) {
            out.issues.push_back({ev.session_id, "record_rejected",
                                  line_tag(line_no) + "missing agent_id"});
            continue;
        }
        if (!seen.insert({ev.session_id, ev.event_index}).second) {
            out.issues.push_back(
                {ev.session_id, "duplicate_event",
                 line_tag(line_no) + "duplicate event_index " +
                     std::to_string(ev.event_index) + " in session " +
                     ev.session_id});
            continue;
        }

        ev.timestamp = get_num("timestamp");
        ev.agent_name = get_str("agent_name");
        ev.agent_description = get_str("agent_description");
        if (auto it = j.find("tags"); it != j.end() && it->is_array())
            for (const auto& t : *it)
                if (t.is_string()) ev.tags.push_back(t.get<std::string>());
        if (auto s = get_str("span_id"); !s.empty()) ev.span_id = s;
        if (auto s = get_str("parent_span_id"); !s.empty()) ev.parent_span_id = s;
        if (auto it = j.find("caller_index");
            it != j.end() && it->is_number_integer())
            ev.caller_index = it->get<std::int64_t>();
        ev.status = status_from_string(get_str("status"));
        ev.latency_ms = get_num("latency_ms");
        if (auto it = j.find("token_count");
            it != j.end() && it->is_number_unsigned())
            ev.token_count = it->get<std::uint64_t>();
        else if (auto it2 = j.find("token_count");
                 it2 != j.end() && it2->is_number_integer() &&
                 it2->get<std::int64_t>() >= 0)
            ev.token_count = static_cast<std::uint64_t>(it2->get<std::int64_t>());
        ev.cost = get_num("cost");
        ev.category = get_str("category");
        ev.task_text = get_str("task_text");
        ev.session_query = get_str("session_query");
        ev.meta = nlohmann::json::object();
        if (auto it = j.find("meta"); it != j.end() && it->is_object())
            ev.meta = *it;
        for (auto it = j.begin(); it != j.end(); ++it)
            if (!known_keys().count(it.key())) ev.meta[it.key()] = it.value();

        out.sessions[ev.session_id].push_back(std::move(ev));
    }
    for (auto& [sid, events] : out.sessions)
        std::sort(events.begin(), events.end(),
                  [](const RawEvent& a, const RawEvent& b) {
                      return a.event_index < b.event_index;
                  });
    return out;
}

ParsedEvents parse_events_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read events file: " + path);
    return parse_events(in);
}

ParentMap resolve_parents(const std::vector<RawEvent>& events,
                          std::vector<IngestIssue>* issues) {
    ParentMap parents;
    if (events.empty()) return parents;
    auto warn = [&](const std::string& rule, const std::string& detail) {
        if (issues) issues->push_back({events.front().session_id, rule, detail});
    };
    parents[events.front().event_index] = std::nullopt;
    for (std::size_t i = 1; i < events.size(); ++i) {
        const RawEvent& e = events[i];
        std::optional<std::uint64_t> parent;
        if (e.parent_span_id) {
            for (std::size_t k = i; k-- > 0;) {  // latest prior match wins
                if (events[k].span_id && *events[k].span_id == *e.parent_span_id) {
                    parent = events[k].event_index;
                    break;
                }
            }
            if (!parent)
                warn("span_unmatched",
                     "event " + std::to_string(e.event_index) +
                         ": parent_span_id '" + *e.parent_span_id +
                         "' has no prior match");
        }
        if (!parent && e.caller_index) {
            std::int64_t c = *e.caller_index;
            if (c < 0 || static_cast<std::uint64_t>(c) >= e.event_index) {
                warn("forward_link_dropped",
                     "event " + std::to_string(e.event_index) + ": caller_index " +
                         std::to_string(c) + " is not a prior event");
            } else {
                bool found = false;
                for (std::size_t k = 0; k < i; ++k)
                    if (events[k].event_index == static_cast<std::uint64_t>(c)) {
                        found = true;
                        break;
                    }
                if (found)
                    parent = static_cast<std::uint64_t>(c);
                else
                    warn("caller_unmatched",
                         "event " + std::to_string(e.event_index) +
                             ": caller_index " + std::to_string(c) +
                             " matches no event");
            }
        }
        if (!parent) parent = events[i - 1].event_index;  // last invocation
        parents[e.event_index] = parent;
    }
    return parents;
}

CallingTree build_tree(const std::vector<RawEvent>& events,
                       const ParentMap& parents,
                       std::vector<IngestIssue>* issues) {
    CallingTree tree;
    if (events.empty()) return tree;
    const std::string& session = events.front().session_id;
    tree.session_id = session;
    for (const RawEvent& e : events)
        if (!e.session_query.empty()) {
            tree.session_query = e.session_query;
            break;
        }
    auto warn = [&](const std::string& rule, const std::string& detail) {
        if (issues) issues->push_back({session, rule, detail});
    };

    // Normalize links: each parent must be a prior event of this session.
    // Anything else (forward/self/unknown, i.e. a potential cycle) is dropped
    // in favor of last-invocation matching, so the result is acyclic.
    std::map<std::uint64_t, std::size_t> pos;
    for (std::size_t i = 0; i < events.size(); ++i) pos[events[i].event_index] = i;
    std::vector<std::optional<std::uint64_t>> parent_of(events.size());
    std::uint64_t unresolved = 0;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const RawEvent& e = events[i];
        auto it = parents.find(e.event_index);
        if (i == 0) {
            if (it != parents.end() && it->second)
                warn("invalid_link_dropped",
                     "event " + std::to_string(e.event_index) +
                         ": first event cannot have a parent");
            parent_of[0] = std::nullopt;
            continue;
        }
        std::optional<std::uint64_t> p;
        if (it == parents.end()) {
            ++unresolved;
            p = events[i - 1].event_index;
        } else if (!it->second) {
            p = std::nullopt;
        } else {
            std::uint64_t cand = *it->second;
            auto pit = pos.find(cand);
            if (pit == pos.end()) {
                warn("invalid_link_dropped",
                     "event " + std::to_string(e.event_index) + ": parent " +
                         std::to_string(cand) + " is not in the session");
                p = events[i - 1].event_index;
            } else if (cand >= e.event_index) {
                warn("cycle_broken",
                     "event " + std::to_string(e.event_index) + ": link to " +
                         std::to_string(cand) +
                         " dropped; parented to preceding invocation");
                p = events[i - 1].event_index;
            } else {
                p = cand;
            }
        }
        parent_of[i] = p;
    }
    if (unresolved)
        warn("unresolved_parent",
             "session " + session + ": " + std::to_string(unresolved) +
                 " events missing from parent map; last-invocation fallback used");

    std::size_t parentless = 0;
    for (const auto& p : parent_of)
        if (!p) ++parentless;
    const bool synth_root = parentless > 1;

    // Whole-session timestamp fallback keeps edges monotone.
    bool fallback = false;
    for (const RawEvent& e : events)
        if (!e.timestamp) {
            fallback = true;
            break;
        }
    if (!fallback) {
        for (std::size_t i = 1; i < events.size(); ++i) {
            if (!parent_of[i]) continue;
            const RawEvent& par = events[pos[*parent_of[i]]];
            if (*events[i].timestamp < *par.timestamp) {
                fallback = true;
                break;
            }
        }
    }
    if (fallback)
        warn("timestamp_fallback",
             "session " + session +
                 ": timestamps missing or non-monotonic; using event order");

    if (synth_root) {
        warn("synthetic_root",
             "session " + session + ": " + std::to_string(parentless) +
                 " parentless events; orchestrator root inserted");
        CallNode root;
        root.node_id = "root";
        root.agent_id = "__root__";
        root.task_text = tree.session_query;
        root.status = CallStatus::unknown;
        tree.nodes.push_back(std::move(root));
    }
    for (std::size_t i = 0; i < events.size(); ++i) {
        const RawEvent& e = events[i];
        CallNode n;
        n.node_id = event_node_id(e.event_index);
        n.agent_id = e.agent_id;
        n.task_text = e.task_text;
        n.timestamp =
            fallback ? static_cast<double>(e.event_index) : *e.timestamp;
        n.status = e.status;
        n.latency_ms = e.latency_ms;
        n.token_count = e.token_count;
        if (parent_of[i])
            n.parent = event_node_id(*parent_of[i]);
        else if (synth_root)
            n.parent = "root";
        tree.nodes.push_back(std::move(n));
    }
    if (synth_root) {
        double mn = tree.nodes[1].timestamp;
        for (std::size_t i = 1; i < tree.nodes.size(); ++i)
            mn = std::min(mn, tree.nodes[i].timestamp);
        tree.nodes.front().timestamp = mn;
    }
    return tree;
}

std::vector<AgentRecord> build_agent_pool(
    const std::map<std::string, std::vector<RawEvent>>& sessions,
    const std::vector<CallingTree>& trees,
    std::vector<IngestIssue>* issues) {
    std::map<std::string, AgentRecord> pool;
    std::set<std::string> conflict_reported;
    for (const auto& [sid, events] : sessions) {
        for (const RawEvent& e : events) {
            AgentRecord& rec = pool.try_emplace(e.agent_id).first->second;
            if (rec.id.empty()) rec.id = e.agent_id;
            if (rec.name.empty() && !e.agent_name.empty()) rec.name = e.agent_name;
            if (!e.agent_description.empty()) {
                if (rec.description.empty()) {
                    rec.description = e.agent_description;
                } else if (e.agent_description != rec.description &&
                           conflict_reported.insert(e.agent_id).second) {
                    if (issues)
                        issues->push_back({sid, "metadata_conflict",
                                           "agent " + e.agent_id +
                                               ": conflicting description"});
                }
            }
            if (rec.tags.empty() && !e.tags.empty()) rec.tags = e.tags;
            if (rec.category.empty() && !e.category.empty())
                rec.category = e.category;
        }
    }
    for (const CallingTree& t : trees) {
        for (const CallNode& n : t.nodes) {
            AgentRecord& rec = pool.try_emplace(n.agent_id).first->second;
            if (rec.id.empty()) {
                rec.id = n.agent_id;
                if (n.agent_id == "__root__") {
                    rec.name = "orchestrator";
                    rec.description = "synthetic orchestrator root";
                    rec.category = "system";
                }
            }
            ++rec.invocation_count;
            if (n.status == CallStatus::success) ++rec.success_count;
        }
    }
    std::vector<AgentRecord> out;
    out.reserve(pool.size());
    for (auto& [id, rec] : pool) {
        if (rec.name.empty()) rec.name = id;
        out.push_back(std::move(rec));
    }
    return out;
}

PruneResult prune_degenerate(std::vector<CallingTree> trees) {
    PruneResult out;
    for (auto& t : trees) {
        const std::size_t non_root = t.nodes.empty() ? 0 : t.nodes.size() - 1;
        if (non_root <= 1)
            ++out.pruned;
        else
            out.kept.push_back(std::move(t));
    }
    return out;
}

CorpusStats CorpusStats::from_counts(std::uint64_t tools, std::uint64_t graphs,
                                     std::uint64_t nodes) {
    CorpusStats s;
    s.tool_count = tools;
    s.graph_count = graphs;
    s.node_count = nodes;
    s.degenerate = tools == 0 || graphs == 0;
    s.avg_calls_per_tool =
        tools ? static_cast<double>(nodes) / static_cast<double>(tools) : 0.0;
    s.avg_nodes_per_graph =
        graphs ? static_cast<double>(nodes) / static_cast<double>(graphs) : 0.0;
    return s;
}

CorpusStats corpus_stats(const std::vector<AgentRecord>& pool,
                         const std::vector<CallingTree>& trees) {
    std::uint64_t nodes = 0;
    for (const auto& t : trees) nodes += t.nodes.size();
    return CorpusStats::from_counts(pool.size(), trees.size(), nodes);
}

IngestResult ingest_events(std::istream& in, bool prune) {
    IngestResult out;
    ParsedEvents parsed = parse_events(in);
    out.issues = std::move(parsed.issues);
    std::vector<CallingTree> trees;
    trees.reserve(parsed.sessions.size());
    for (const auto& [sid, events] : parsed.sessions) {
        ParentMap parents = resolve_parents(events, &out.issues);
        trees.push_back(build_tree(events, parents, &out.issues));
    }
    out.corpus.agents = build_agent_pool(parsed.sessions, trees, &out.issues);
    if (prune) {
        PruneResult pr = prune_degenerate(std::move(trees));
        out.pruned = pr.pruned;
        if (pr.kept.empty() && pr.pruned > 0)
            out.issues.push_back(
                {"", "empty_after_prune", "all trees were degenerate"});
        trees = std::move(pr.kept);
    }
    out.corpus.trees = std::move(trees);
    out.stats = corpus_stats(out.corpus.agents, out.corpus.trees);
    return out;
}

IngestResult ingest_events_file(const std::string& path, bool prune) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read events file: " + path);
    return ingest_events(in, prune);
}

void save_corpus(const Corpus& corpus, const std::string& path) {
    nlohmann::ordered_json doc;
    doc["version"] = 1;
    doc["sessions"] = nlohmann::ordered_json::array();
    std::vector<const CallingTree*> trees;
    trees.reserve(corpus.trees.size());
    for (const auto& t : corpus.trees) trees.push_back(&t);
    std::sort(trees.begin(), trees.end(),
              [](const CallingTree* a, const CallingTree* b) {
                  return a->session_id < b->session_id;
              });
    for (const CallingTree* t : trees) {
        nlohmann::ordered_json s;
        s["session_id"] = t->session_id;
        s["session_query"] = t->session_query;
        s["nodes"] = nlohmann::ordered_json::array();
        for (const CallNode& n : t->nodes) {
            nlohmann::ordered_json nj;
            nj["node_id"] = n.node_id;
            nj["agent_id"] = n.agent_id;
            nj["task_text"] = n.task_text;
            nj["timestamp"] = n.timestamp;
            nj["status"] = to_string(n.status);
            if (n.parent) nj["parent"] = *n.parent;
            if (n.latency_ms) nj["latency_ms"] = *n.latency_ms;
            if (n.token_count) nj["token_count"] = *n.token_count;
            s["nodes"].push_back(std::move(nj));
        }
        doc["sessions"].push_back(std::move(s));
    }
    doc["agents"] = nlohmann::ordered_json::array();
    std::vector<const AgentRecord*> agents;
    agents.reserve(corpus.agents.size());
    for (const auto& a : corpus.agents) agents.push_back(&a);
    std::sort(agents.begin(), agents.end(),
              [](const AgentRecord* a, const AgentRecord* b) {
                  return a->id < b->id;
              });
    for (const AgentRecord* a : agents) {
        nlohmann::ordered_json aj;
        aj["id"] = a->id;
        aj["name"] = a->name;
        aj["description"] = a->description;
        aj["tags"] = a->tags;
        aj["category"] = a->category;
        aj["invocation_count"] = a->invocation_count;
        aj["success_count"] = a->success_count;
        doc["agents"].push_back(std::move(aj));
    }
    std::ofstream outf(path);
    if (!outf) throw std::runtime_error("cannot write corpus file: " + path);
    outf << doc.dump(2) << "\n";
    if (!outf) throw std::runtime_error("write failed: " + path);
}

Corpus load_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read corpus file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("invalid corpus file " + path + ": " + e.what());
    }
    try {
        if (doc.at("version").get<int>() != 1)
            throw std::runtime_error("unsupported corpus version in " + path);
        Corpus corpus;
        for (const auto& s : doc.at("sessions")) {
            CallingTree t;
            t.session_id = s.at("session_id").get<std::string>();
            t.session_query = s.value("session_query", std::string{});
            for (const auto& nj : s.at("nodes")) {
                CallNode n;
                n.node_id = nj.at("node_id").get<std::string>();
                n.agent_id = nj.at("agent_id").get<std::string>();
                n.task_text = nj.value("task_text", std::string{});
                n.timestamp = nj.at("timestamp").get<double>();
                n.status = status_from_string(nj.value("status", "unknown"));
                if (nj.contains("parent"))
                    n.parent = nj["parent"].get<std::string>();
                if (nj.contains("latency_ms"))
                    n.latency_ms = nj["latency_ms"].get<double>();
                if (nj.contains("token_count"))
                    n.token_count = nj["token_count"].get<std::uint64_t>();
                t.nodes.push_back(std::move(n));
            }
            corpus.trees.push_back(std::move(t));
        }
        for (const auto& aj : doc.at("agents")) {
            AgentRecord a;
            a.id = aj.at("id").get<std::string>();
            a.name = aj.value("name", std::string{});
            a.description = aj.value("description", std::string{});
            if (aj.contains("tags"))
                for (const auto& tg : aj["tags"])
                    a.tags.push_back(tg.get<std::string>());
            a.category = aj.value("category", std::string{});
            a.invocation_count = aj.value("invocation_count", std::uint64_t{0});
            a.success_count = aj.value("success_count", std::uint64_t{0});
            corpus.agents.push_back(std::move(a));
        }
        return corpus;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("invalid corpus file " + path + ": " + e.what());
    }
}

void save_issues(const std::vector<IngestIssue>& issues,
                 const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write issues file: " + path);
    for (const auto& is : issues) {
        nlohmann::ordered_json j;
        j["session_id"] = is.session_id;
        j["rule"] = is.rule;
        j["detail"] = is.detail;
        out << j.dump() << "\n";
    }
}

}  // namespace agentrec
