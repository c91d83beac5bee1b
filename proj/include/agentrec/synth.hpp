#pragma once
// Deterministic synthetic corpus generator. With the planted signal on,
// every gold agent's profile shares signature vocabulary with its query
// and invoked agents succeed at elevated rates, so the linear scorer has
// a provably learnable signal; session agent multisets are kept distinct
// so graph-level retrieval is unambiguous too.

#include <cstdint>
#include <string>
#include <vector>

namespace agentrec {

struct SynthConfig {
    std::uint64_t seed = 42;
    std::uint64_t agent_count = 50;
    std::uint64_t session_count = 250;
    std::uint64_t depth_min = 3;    // tree levels including the root
    std::uint64_t depth_max = 3;
    std::uint64_t branch_max = 0;   // extra leaf children per spine node
    std::uint64_t vocab_size = 48;  // shared filler vocabulary
    bool planted_signal = true;
};

struct SynthOutput {
    std::string events_jsonl;    // one event per line, ingest-ready
    std::string manifest_json;   // seed/config echo + per-session golds
};

// Pure function of the config; identical configs give identical bytes.
SynthOutput synth_corpus(const SynthConfig& config);

void write_synth(const SynthOutput& out, const std::string& events_path,
                 const std::string& manifest_path);

}  // namespace agentrec
