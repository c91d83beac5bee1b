#include "agentrec/synth.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace agentrec {

namespace {

// Platform-stable draws: mt19937_64 output is standardized, std::uniform_*
// distributions are not.
std::uint64_t draw_index(std::mt19937_64& rng, std::uint64_t n) {
    return n ? rng() % n : 0;
}

double draw_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

std::string padded(const char* prefix, std::uint64_t i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%04llu", prefix,
                  static_cast<unsigned long long>(i));
    return buf;
}

const std::vector<std::string>& verbs() {
    static const std::vector<std::string> v = {
        "run", "solve", "handle", "process",
        "execute", "analyze", "compute", "resolve"};
    return v;
}

const std::vector<std::string>& categories() {
    static const std::vector<std::string> v = {
        "search", "math", "code", "data", "web", "file", "chat", "plan"};
    return v;
}

struct SynthAgent {
    std::string id;
    std::string name;
    std::string description;
    std::string category;
    std::array<std::string, 3> sig;
};

std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (const auto& p : parts) {
        if (!out.empty()) out += ' ';
        out += p;
    }
    return out;
}

}  // namespace

SynthOutput synth_corpus(const SynthConfig& config) {
    if (config.agent_count == 0 || config.session_count == 0)
        throw std::invalid_argument("synth: agent_count and session_count must be positive");
    const std::uint64_t depth_min = std::max<std::uint64_t>(1, config.depth_min);
    const std::uint64_t depth_max = std::max(depth_min, config.depth_max);

    std::mt19937_64 rng(config.seed);

    std::vector<std::string> vocab;
    vocab.reserve(config.vocab_size);
    for (std::uint64_t i = 0; i < config.vocab_size; ++i)
        vocab.push_back(padded("topic", i));

    std::vector<SynthAgent> agents(config.agent_count);
    for (std::uint64_t i = 0; i < config.agent_count; ++i) {
        SynthAgent& a = agents[i];
        a.id = padded("agent_", i);
        a.sig = {padded("sig", i) + "a", padded("sig", i) + "b",
                 padded("sig", i) + "c"};
        a.name = a.sig[0] + " unit";
        a.description =
            "handles " + a.sig[0] + " " + a.sig[1] + " " + a.sig[2] + " requests";
        a.category = categories()[draw_index(rng, categories().size())];
    }

    const double success_rate = config.planted_signal ? 0.9 : 0.6;

    auto planted_task = [&](const SynthAgent& a) {
        return verbs()[draw_index(rng, verbs().size())] + " " + a.sig[0] + " " +
               a.sig[1] + " " + a.sig[2];
    };
    auto noise_task = [&]() {
        std::vector<std::string> words = {
            verbs()[draw_index(rng, verbs().size())]};
        for (int i = 0; i < 3; ++i)
            words.push_back(vocab.empty()
                                ? padded("topic", 0)
                                : vocab[draw_index(rng, vocab.size())]);
        return join(words);
    };

    nlohmann::ordered_json manifest;
    manifest["seed"] = config.seed;
    manifest["config"] = {{"agent_count", config.agent_count},
                          {"session_count", config.session_count},
                          {"depth_min", depth_min},
                          {"depth_max", depth_max},
                          {"branch_max", config.branch_max},
                          {"vocab_size", config.vocab_size},
                          {"planted_signal", config.planted_signal}};
    manifest["orchestrator_id"] = "orchestrator";
    manifest["agents"] = nlohmann::ordered_json::array();
    for (const SynthAgent& a : agents) {
        manifest["agents"].push_back(
            {{"id", a.id},
             {"signature_tokens", {a.sig[0], a.sig[1], a.sig[2]}}});
    }
    manifest["sessions"] = nlohmann::ordered_json::array();

    std::string events;
    std::set<std::vector<std::string>> used_multisets;

    for (std::uint64_t s = 0; s < config.session_count; ++s) {
        const std::string session_id = padded("sess_", s);
        const std::uint64_t depth =
            depth_min + draw_index(rng, depth_max - depth_min + 1);

        // One node per non-root call: spine below the root plus extra leaves.
        // parent_slot[i] = event index of the call's parent.
        std::vector<std::uint64_t> call_agents;  // indices into agents
        std::vector<std::uint64_t> parent_slot;
        bool has_orchestrator = depth >= 2;
        for (int attempt = 0; attempt < 500; ++attempt) {
            call_agents.clear();
            parent_slot.clear();
            if (depth == 1) {
                call_agents.push_back(draw_index(rng, agents.size()));
            } else {
                const std::uint64_t spine = depth - 1;
                for (std::uint64_t i = 0; i < spine; ++i) {
                    call_agents.push_back(draw_index(rng, agents.size()));
                    parent_slot.push_back(i);  // event i+1 called by event i
                }
                const std::uint64_t leaves =
                    config.branch_max ? draw_index(rng, config.branch_max + 1) : 0;
                for (std::uint64_t i = 0; i < leaves; ++i) {
                    call_agents.push_back(draw_index(rng, agents.size()));
                    parent_slot.push_back(draw_index(rng, spine + 1));
                }
            }
            std::vector<std::string> key;
            key.reserve(call_agents.size());
            for (std::uint64_t ai : call_agents) key.push_back(agents[ai].id);
            std::sort(key.begin(), key.end());
            if (used_multisets.insert(key).second) break;
            // else: duplicate agent multiset, redraw for an unambiguous corpus
        }

        // Session query covers every call in event order.
        std::string session_query;
        if (config.planted_signal) {
            std::vector<std::string> words = {
                verbs()[draw_index(rng, verbs().size())]};
            for (std::uint64_t ai : call_agents) {
                words.push_back(agents[ai].sig[0]);
                words.push_back(agents[ai].sig[1]);
                words.push_back(agents[ai].sig[2]);
            }
            session_query = join(words);
        } else {
            session_query = noise_task();
        }

        std::vector<nlohmann::ordered_json> session_events;
        auto push_event = [&](std::uint64_t index, const std::string& agent_id,
                              const std::string& name, const std::string& desc,
                              const std::string& category,
                              const std::string& task, bool root) {
            nlohmann::ordered_json e;
            e["session_id"] = session_id;
            e["event_index"] = index;
            e["timestamp"] = static_cast<double>(index);
            e["agent_id"] = agent_id;
            e["agent_name"] = name;
            e["agent_description"] = desc;
            if (!category.empty()) {
                e["tags"] = {category};
                e["category"] = category;
            }
            if (!root) e["caller_index"] = parent_slot[index - 1];
            e["status"] =
                draw_unit(rng) < success_rate ? "success" : "failure";
            e["latency_ms"] = 50 + static_cast<double>(draw_index(rng, 1000));
            e["token_count"] = 20 + draw_index(rng, 500);
            e["task_text"] = task;
            if (root) e["session_query"] = session_query;
            session_events.push_back(std::move(e));
        };

        if (has_orchestrator) {
            push_event(0, "orchestrator", "orchestrator",
                       "delegates subtasks to specialist agents", "system", "",
                       true);
            for (std::size_t i = 0; i < call_agents.size(); ++i) {
                const SynthAgent& a = agents[call_agents[i]];
                const std::string task = config.planted_signal
                                             ? planted_task(a)
                                             : noise_task();
                push_event(i + 1, a.id, a.name, a.description, a.category, task,
                           false);
            }
        } else {
            const SynthAgent& a = agents[call_agents[0]];
            const std::string task =
                config.planted_signal ? planted_task(a) : session_query;
            push_event(0, a.id, a.name, a.description, a.category,
                       config.planted_signal ? task : session_query, true);
        }

        for (const auto& e : session_events) {
            events += e.dump();
            events += '\n';
        }

        nlohmann::ordered_json ms;
        ms["session_id"] = session_id;
        ms["session_query"] = session_query;
        ms["depth"] = depth;
        ms["node_count"] = session_events.size();
        ms["gold_agent_ids"] = nlohmann::ordered_json::array();
        for (std::uint64_t ai : call_agents)
            ms["gold_agent_ids"].push_back(agents[ai].id);
        manifest["sessions"].push_back(std::move(ms));
    }

    SynthOutput out;
    out.events_jsonl = std::move(events);
    out.manifest_json = manifest.dump(2) + "\n";
    return out;
}

void write_synth(const SynthOutput& out, const std::string& events_path,
                 const std::string& manifest_path) {
    std::ofstream ev(events_path);
    if (!ev) throw std::runtime_error("cannot write events file: " + events_path);
    ev << out.events_jsonl;
    if (!ev) throw std::runtime_error("write failed: " + events_path);
    std::ofstream mf(manifest_path);
    if (!mf)
        throw std::runtime_error("cannot write manifest file: " + manifest_path);
    mf << out.manifest_json;
    if (!mf) throw std::runtime_error("write failed: " + manifest_path);
}

}  // namespace agentrec
